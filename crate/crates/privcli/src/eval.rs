//! The evaluation matrix: every attack undefended and behind the PII
//! engine, over several seeds, plus retrieval, latency and scalability.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Instant;

use privlab_core::attacks::{
    build_corpus, canary_for_seed, extraction_attack, extraction_run, inversion_run,
    inversion_training_set, median, mia_run, plant_canary, poisoning_run, property_attack,
    train_inversion_model, train_property_target_with, AttackError, AttackKind, AttackReport,
    ClassifierConfig, ExtractionConfig, InversionConfig, MiaConfig, PoisoningConfig,
    PropertyConfig, PropertyEstimator,
};
use privlab_core::synthdata::{generate, generate_range, Dataset};
use privlab_gateway::bench::{perturb, recall_at_1, synthetic_docs};
use privlab_gateway::{
    AuditLog, Gateway, GatewayConfig, KeyStore, ManualClock, MockBackend, VectorStore, EMBED_DIM,
};
use privlab_pii::{sanitize, sanitize_record, Principal, RedactionPolicy, Role, Vault, VaultKey};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::risk::{
    exposure_from_attacks, risk_score, Exposure, ExposureThresholds, Level, RiskLevel, RISK_TABLE,
};
use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MiaSetup {
    pub config: MiaConfig,
    pub train_size: usize,
    pub holdout_size: usize,
}

impl Default for MiaSetup {
    fn default() -> Self {
        Self {
            config: MiaConfig::default(),
            train_size: 64,
            holdout_size: 64,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExtractionSetup {
    pub config: ExtractionConfig,
    pub corpus_bytes: usize,
    /// Also run an undefended cell with no planted copies.
    pub zero_repetition_control: bool,
}

impl Default for ExtractionSetup {
    fn default() -> Self {
        Self {
            config: ExtractionConfig::default(),
            corpus_bytes: 5000,
            zero_repetition_control: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PoisoningSetup {
    pub config: PoisoningConfig,
    pub records: usize,
}

impl Default for PoisoningSetup {
    fn default() -> Self {
        Self {
            config: PoisoningConfig::default(),
            records: 1000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InversionSetup {
    pub config: InversionConfig,
    pub targets: Vec<f64>,
    pub train_size: usize,
    pub model: ClassifierConfig,
}

impl Default for InversionSetup {
    fn default() -> Self {
        Self {
            config: InversionConfig::default(),
            targets: vec![0.1, 0.3, 0.5, 0.7, 0.9],
            train_size: 1000,
            model: ClassifierConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PropertySetup {
    pub config: PropertyConfig,
    pub prevalences: Vec<f64>,
}

impl Default for PropertySetup {
    fn default() -> Self {
        Self {
            config: PropertyConfig::default(),
            prevalences: vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RetrievalSetup {
    pub docs: usize,
    pub perturbation: f64,
    /// Wall-clock latency and throughput; excluded from determinism checks.
    pub measure_timing: bool,
    pub latency_queries: usize,
    pub scale_doc_counts: Vec<usize>,
    pub scale_queries: usize,
}

impl Default for RetrievalSetup {
    fn default() -> Self {
        Self {
            docs: 1000,
            perturbation: 0.1,
            measure_timing: true,
            latency_queries: 200,
            scale_doc_counts: vec![100, 1000, 10_000],
            scale_queries: 100,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalConfig {
    pub seeds: Vec<u64>,
    pub attacks: Vec<AttackKind>,
    pub run_defended: bool,
    /// Data-owner judgement of how sensitive the data is.
    pub sensitivity: Level,
    pub thresholds: ExposureThresholds,
    pub policy: RedactionPolicy,
    pub mia: MiaSetup,
    pub extraction: ExtractionSetup,
    pub poisoning: PoisoningSetup,
    pub inversion: InversionSetup,
    pub property: PropertySetup,
    pub retrieval: RetrievalSetup,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            seeds: vec![0, 1, 2, 3, 4],
            attacks: AttackKind::ALL.to_vec(),
            run_defended: true,
            sensitivity: Level::High,
            thresholds: ExposureThresholds::default(),
            policy: RedactionPolicy::default(),
            mia: MiaSetup::default(),
            extraction: ExtractionSetup::default(),
            poisoning: PoisoningSetup::default(),
            inversion: InversionSetup::default(),
            property: PropertySetup::default(),
            retrieval: RetrievalSetup::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub attack: AttackKind,
    pub defended: bool,
    pub seed: u64,
    /// Sub-experiment label such as `y=0.3`; empty when there is one run.
    pub variant: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<AttackReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub attack: AttackKind,
    pub defended: bool,
    pub variant: String,
    pub runs: usize,
    pub failures: usize,
    /// Median over seeds of every metric the runs reported.
    pub median: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RetrievalReport {
    pub recall_at_1: f64,
    pub per_seed: Vec<(u64, f64)>,
    pub embedding_dim: usize,
    pub index_size: usize,
    pub perturbation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatencyReport {
    pub requests: usize,
    pub indexed_docs: usize,
    pub p50_ms: f64,
    pub p95_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalePoint {
    pub docs: usize,
    pub queries: usize,
    pub throughput_qps: f64,
    pub mean_query_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimingReport {
    pub latency: LatencyReport,
    pub scalability: Vec<ScalePoint>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// Unix seconds at creation; excluded from determinism checks.
    pub generated_at: Option<u64>,
    pub config: EvalConfig,
    pub cells: Vec<Cell>,
    pub summary: Vec<CellSummary>,
    pub retrieval: RetrievalReport,
    /// Wall-clock measurements; excluded from determinism checks.
    pub timing: Option<TimingReport>,
    pub exposure: Exposure,
    pub privacy_risk: RiskLevel,
    pub exposure_defended: Option<Exposure>,
    pub privacy_risk_defended: Option<RiskLevel>,
    pub risk_table: [[Level; 3]; 3],
    /// Metrics not produced, with the reason.
    pub skipped: Vec<String>,
}

impl EvalReport {
    /// The report with timestamp and wall-clock timings removed.
    pub fn deterministic(&self) -> Self {
        Self {
            generated_at: None,
            timing: None,
            ..self.clone()
        }
    }

    pub fn deterministic_json(&self) -> String {
        serde_json::to_string_pretty(&self.deterministic()).expect("report serializes")
    }

    pub fn cells_for(&self, attack: AttackKind, defended: bool) -> impl Iterator<Item = &Cell> {
        self.cells
            .iter()
            .filter(move |c| c.attack == attack && c.defended == defended)
    }

    pub fn summary_for(
        &self,
        attack: AttackKind,
        defended: bool,
        variant: &str,
    ) -> Option<&CellSummary> {
        self.summary
            .iter()
            .find(|s| s.attack == attack && s.defended == defended && s.variant == variant)
    }

    /// Internal consistency; a failure here is a bug, not an experiment result.
    pub fn check_invariants(&self) -> Result<(), String> {
        for c in &self.cells {
            match (&c.report, &c.error) {
                (Some(r), None) => r
                    .validate()
                    .map_err(|e| format!("{:?} seed {} {}: {e}", c.attack, c.seed, c.variant))?,
                (None, Some(_)) => {}
                _ => {
                    return Err(format!(
                        "cell {:?} seed {} has neither or both outcomes",
                        c.attack, c.seed
                    ))
                }
            }
        }
        let expect = risk_score(self.privacy_risk.sensitivity, self.privacy_risk.exposure);
        if expect != self.privacy_risk || self.risk_table != RISK_TABLE {
            return Err("privacy risk disagrees with the risk table".into());
        }
        if !(0.0..=1.0).contains(&self.retrieval.recall_at_1) {
            return Err("recall@1 outside [0, 1]".into());
        }
        Ok(())
    }
}

fn sanitize_dataset(
    ds: &Dataset,
    policy: &RedactionPolicy,
    vault: Option<&Vault>,
) -> Result<Dataset, AttackError> {
    let records = ds
        .records
        .iter()
        .map(|r| sanitize_record(r, policy, vault))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| AttackError::InvalidConfig(format!("sanitize: {e}")))?;
    Ok(Dataset {
        records,
        bounds: ds.bounds,
    })
}

/// Redacts a corpus line by line.
pub fn redact_corpus(
    corpus: &str,
    policy: &RedactionPolicy,
    vault: Option<&Vault>,
) -> Result<String, AttackError> {
    let mut out = String::with_capacity(corpus.len());
    for line in corpus.lines() {
        let r = sanitize(line, policy, vault)
            .map_err(|e| AttackError::InvalidConfig(format!("redact: {e}")))?;
        out.push_str(&r.text);
        out.push('\n');
    }
    Ok(out)
}

/// Deterministic per-seed vault so pseudonymizing policies reproduce.
fn eval_vault(seed: u64) -> Vault {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(b"evalvlt!");
    Vault::new(&VaultKey::from_bytes(key))
}

struct Job {
    attack: AttackKind,
    defended: bool,
    seed: u64,
}

type Outcome = Vec<(String, Result<AttackReport, AttackError>)>;

fn single(r: Result<AttackReport, AttackError>) -> Outcome {
    vec![(String::new(), r)]
}

fn mark(mut r: AttackReport, defended: bool) -> AttackReport {
    r.defended = defended;
    r
}

fn run_mia(cfg: &EvalConfig, seed: u64, defended: bool) -> Outcome {
    let go = || {
        let m = &cfg.mia;
        let mut train = generate_range(0, m.train_size, seed)?;
        let mut hold = generate_range(m.train_size as u64, m.holdout_size, seed)?;
        if defended {
            let v = eval_vault(seed);
            train = sanitize_dataset(&train, &cfg.policy, Some(&v))?;
            hold = sanitize_dataset(&hold, &cfg.policy, Some(&v))?;
        }
        let mc = MiaConfig {
            seed,
            ..m.config.clone()
        };
        mia_run(&train, &hold, &mc)
    };
    single(go())
}

fn run_extraction(cfg: &EvalConfig, seed: u64, defended: bool) -> Outcome {
    let e = &cfg.extraction;
    let corpus = build_corpus(e.corpus_bytes, seed);
    let canary = canary_for_seed(seed);
    let ec = ExtractionConfig {
        seed,
        prefix_len: canary.prefix.len(),
        ..e.config.clone()
    };
    if defended {
        let go = || {
            let planted = plant_canary(&corpus, &canary, ec.repetitions, ec.seed);
            let v = eval_vault(seed);
            let redacted = redact_corpus(&planted, &cfg.policy, Some(&v))?;
            extraction_attack(&redacted, &canary, &ec)
        };
        return single(go());
    }
    let mut out = single(extraction_run(&corpus, &canary.text(), &ec));
    if e.zero_repetition_control {
        let zero = ExtractionConfig {
            repetitions: 0,
            ..ec.clone()
        };
        out.push((
            "repetitions=0".into(),
            extraction_run(&corpus, &canary.text(), &zero),
        ));
    }
    out
}

fn run_poisoning(cfg: &EvalConfig, seed: u64, defended: bool) -> Outcome {
    let go = || {
        let mut ds = generate(cfg.poisoning.records, seed)?;
        if defended {
            ds = sanitize_dataset(&ds, &cfg.policy, Some(&eval_vault(seed)))?;
        }
        let pc = PoisoningConfig {
            seed,
            ..cfg.poisoning.config.clone()
        };
        poisoning_run(&ds, &pc)
    };
    single(go())
}

fn run_inversion(cfg: &EvalConfig, seed: u64, defended: bool) -> Outcome {
    let inv = &cfg.inversion;
    let target = (|| {
        let (mut ds, labels) = inversion_training_set(inv.train_size, seed)?;
        if defended {
            ds = sanitize_dataset(&ds, &cfg.policy, Some(&eval_vault(seed)))?;
        }
        train_inversion_model(&ds, &labels, &inv.model, seed)
    })();
    let ic = InversionConfig {
        seed,
        ..inv.config.clone()
    };
    inv.targets
        .iter()
        .map(|&y| {
            let r = match &target {
                Ok(net) => inversion_run(net, y, None, &ic),
                Err(e) => Err(AttackError::InvalidConfig(format!(
                    "target training failed: {e}"
                ))),
            };
            (format!("y={y}"), r)
        })
        .collect()
}

fn run_property(cfg: &EvalConfig, seed: u64, defended: bool) -> Outcome {
    let p = &cfg.property;
    let pc = PropertyConfig {
        seed,
        ..p.config.clone()
    };
    let vault = eval_vault(seed);
    let prep = |ds: Dataset| {
        if defended {
            sanitize_dataset(&ds, &cfg.policy, Some(&vault))
        } else {
            Ok(ds)
        }
    };
    let est = PropertyEstimator::fit_with(&pc, prep);
    p.prevalences
        .iter()
        .map(|&prev| {
            let r = match &est {
                Ok(est) => train_property_target_with(prev, &pc, seed, prep)
                    .and_then(|target| property_attack(est, &target, prev, &pc)),
                Err(e) => Err(AttackError::InvalidConfig(format!(
                    "shadow fitting failed: {e}"
                ))),
            };
            (format!("p={prev}"), r)
        })
        .collect()
}

fn run_job(cfg: &EvalConfig, job: &Job) -> Vec<Cell> {
    let outcome = match job.attack {
        AttackKind::Mia => run_mia(cfg, job.seed, job.defended),
        AttackKind::Extraction => run_extraction(cfg, job.seed, job.defended),
        AttackKind::Poisoning => run_poisoning(cfg, job.seed, job.defended),
        AttackKind::Inversion => run_inversion(cfg, job.seed, job.defended),
        AttackKind::Property => run_property(cfg, job.seed, job.defended),
    };
    outcome
        .into_iter()
        .map(|(variant, r)| {
            let (report, error) = match r {
                Ok(r) => (Some(mark(r, job.defended)), None),
                Err(e) => (None, Some(e.to_string())),
            };
            Cell {
                attack: job.attack,
                defended: job.defended,
                seed: job.seed,
                variant,
                report,
                error,
            }
        })
        .collect()
}

/// One attack at one seed, as `eval` would run it.
pub fn run_attack(cfg: &EvalConfig, attack: AttackKind, seed: u64, defended: bool) -> Vec<Cell> {
    run_job(
        cfg,
        &Job {
            attack,
            defended,
            seed,
        },
    )
}

fn summarize(cells: &[Cell]) -> Vec<CellSummary> {
    let mut groups: BTreeMap<(AttackKind, bool, String), Vec<&Cell>> = BTreeMap::new();
    for c in cells {
        groups
            .entry((c.attack, c.defended, c.variant.clone()))
            .or_default()
            .push(c);
    }
    groups
        .into_iter()
        .map(|((attack, defended, variant), cs)| {
            let mut values: BTreeMap<String, Vec<f64>> = BTreeMap::new();
            for r in cs.iter().filter_map(|c| c.report.as_ref()) {
                for (k, v) in &r.metrics {
                    values.entry(k.clone()).or_default().push(*v);
                }
            }
            CellSummary {
                attack,
                defended,
                variant,
                runs: cs.len(),
                failures: cs.iter().filter(|c| c.error.is_some()).count(),
                median: values.into_iter().map(|(k, v)| (k, median(&v))).collect(),
            }
        })
        .collect()
}

fn retrieval(cfg: &EvalConfig) -> Result<RetrievalReport, CliError> {
    let r = &cfg.retrieval;
    let per_seed = cfg
        .seeds
        .par_iter()
        .map(|&s| recall_at_1(&synthetic_docs(r.docs, s), r.perturbation, s).map(|v| (s, v)))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::Experiment(format!("retrieval: {e}")))?;
    let values: Vec<f64> = per_seed.iter().map(|p| p.1).collect();
    Ok(RetrievalReport {
        recall_at_1: if values.is_empty() {
            0.0
        } else {
            median(&values)
        },
        per_seed,
        embedding_dim: EMBED_DIM,
        index_size: r.docs,
        perturbation: r.perturbation,
    })
}

fn percentile_ms(sorted: &[f64], p: f64) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    sorted[((p / 100.0) * (sorted.len() - 1) as f64).round() as usize]
}

/// Chat latency against the mock backend with `docs` indexed documents.
pub fn measure_latency(docs: usize, requests: usize, seed: u64) -> Result<LatencyReport, CliError> {
    let mut gcfg = GatewayConfig {
        key_pepper: "eval".into(),
        ..GatewayConfig::default()
    };
    gcfg.rate_limit.capacity = 1e15;
    gcfg.dp.seed = Some(seed);
    let mut keys = KeyStore::new(b"eval".to_vec());
    keys.add_key(
        Principal::new("eval-admin", Role::Admin, "eval"),
        "eval-admin-key",
    );
    keys.add_key(
        Principal::new("eval-analyst", Role::Analyst, "eval"),
        "eval-analyst-key",
    );
    let gw = Gateway::new(
        gcfg,
        keys,
        RedactionPolicy::default(),
        None,
        Arc::new(MockBackend::new()),
        Arc::new(ManualClock::new(0.0)),
        AuditLog::in_memory(),
    )
    .map_err(|e| CliError::Experiment(e.to_string()))?;
    let corpus = synthetic_docs(docs, seed);
    for (i, d) in corpus.iter().enumerate() {
        gw.handle_docs(Some("eval-admin-key"), &format!("doc-{i:06}"), d.as_bytes())
            .map_err(|e| CliError::Experiment(e.to_string()))?;
    }
    let mut ms = Vec::with_capacity(requests);
    for (i, d) in corpus.iter().cycle().take(requests).enumerate() {
        let q = perturb(d, 0.1, seed.wrapping_add(i as u64));
        let t = Instant::now();
        gw.handle_chat(Some("eval-analyst-key"), q.as_bytes())
            .map_err(|e| CliError::Experiment(e.to_string()))?;
        ms.push(t.elapsed().as_secs_f64() * 1000.0);
    }
    ms.sort_by(f64::total_cmp);
    Ok(LatencyReport {
        requests,
        indexed_docs: docs,
        p50_ms: percentile_ms(&ms, 50.0),
        p95_ms: percentile_ms(&ms, 95.0),
    })
}

/// kNN query throughput at each index size.
pub fn measure_scalability(
    doc_counts: &[usize],
    queries: usize,
    seed: u64,
) -> Result<Vec<ScalePoint>, CliError> {
    doc_counts
        .iter()
        .map(|&n| {
            let docs = synthetic_docs(n, seed);
            let mut store = VectorStore::new(false);
            for (i, d) in docs.iter().enumerate() {
                store
                    .index_put(&format!("doc-{i:06}"), d)
                    .map_err(|e| CliError::Experiment(e.to_string()))?;
            }
            let qs: Vec<String> = (0..queries)
                .map(|i| {
                    perturb(
                        &docs[i % docs.len().max(1)],
                        0.1,
                        seed.wrapping_add(i as u64),
                    )
                })
                .collect();
            let t = Instant::now();
            for q in &qs {
                std::hint::black_box(store.knn(q, 5));
            }
            let secs = t.elapsed().as_secs_f64().max(1e-9);
            Ok(ScalePoint {
                docs: n,
                queries,
                throughput_qps: queries as f64 / secs,
                mean_query_ms: secs * 1000.0 / queries.max(1) as f64,
            })
        })
        .collect()
}

pub fn run_eval(cfg: &EvalConfig) -> Result<EvalReport, CliError> {
    if cfg.seeds.is_empty() {
        return Err(CliError::Usage("at least one seed is required".into()));
    }
    let mut jobs = Vec::new();
    for &attack in &cfg.attacks {
        for defended in [false, true] {
            if defended && !cfg.run_defended {
                continue;
            }
            for &seed in &cfg.seeds {
                jobs.push(Job {
                    attack,
                    defended,
                    seed,
                });
            }
        }
    }
    let cells: Vec<Cell> = jobs.par_iter().flat_map_iter(|j| run_job(cfg, j)).collect();
    let summary = summarize(&cells);
    let retrieval = retrieval(cfg)?;

    let mut skipped = Vec::new();
    let timing = if cfg.retrieval.measure_timing {
        let seed = cfg.seeds[0];
        Some(TimingReport {
            latency: measure_latency(cfg.retrieval.docs, cfg.retrieval.latency_queries, seed)?,
            scalability: measure_scalability(
                &cfg.retrieval.scale_doc_counts,
                cfg.retrieval.scale_queries,
                seed,
            )?,
        })
    } else {
        skipped.push("timing: disabled by retrieval.measure_timing".into());
        None
    };
    for c in cells.iter().filter(|c| c.error.is_some()) {
        skipped.push(format!(
            "{} seed {} {}{}: {}",
            c.attack.as_str(),
            c.seed,
            if c.defended { "defended " } else { "" },
            c.variant,
            c.error.as_deref().unwrap_or_default()
        ));
    }

    let reports = |defended: bool| -> Vec<&AttackReport> {
        cells
            .iter()
            .filter(|c| c.defended == defended && c.variant.is_empty())
            .filter_map(|c| c.report.as_ref())
            .collect()
    };
    let exposure = exposure_from_attacks(&reports(false), &cfg.thresholds);
    let privacy_risk = risk_score(cfg.sensitivity, exposure.level);
    let exposure_defended = cfg
        .run_defended
        .then(|| exposure_from_attacks(&reports(true), &cfg.thresholds));
    let privacy_risk_defended = exposure_defended
        .as_ref()
        .map(|e| risk_score(cfg.sensitivity, e.level));
    let generated_at = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .ok()
        .map(|d| d.as_secs());

    let report = EvalReport {
        generated_at,
        config: cfg.clone(),
        cells,
        summary,
        retrieval,
        timing,
        exposure,
        privacy_risk,
        exposure_defended,
        privacy_risk_defended,
        risk_table: RISK_TABLE,
        skipped,
    };
    report.check_invariants().map_err(CliError::Invariant)?;
    Ok(report)
}
