use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use privcli::eval::Cell;
use privcli::{plot, run_attack, run_eval, CliError, EvalConfig, EvalReport};
use privlab_core::attacks::{AttackKind, ClassifierConfig};
use privlab_core::nn::LayerSpec;
use privlab_core::synthdata::{generate, render_text, split, TEMPLATES};
use privlab_gateway::{Gateway, GatewayConfig};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(name = "privcli", version, about = "Privacy red-team lab harness")]
struct Cli {
    /// Base seed for single runs.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// JSON config: evaluation config for gen/train/attack/eval, gateway config for serve.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Print machine-readable JSON on stdout.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate synthetic identity records (CSV) and optionally a text corpus.
    Gen {
        #[arg(long, default_value_t = 1000)]
        n: usize,
        /// Also write one rendered sentence per record to corpus.txt.
        #[arg(long)]
        text: bool,
    },
    /// Train the condition classifier and save its parameters.
    Train {
        #[arg(long, default_value_t = 1000)]
        n: usize,
    },
    /// Run one attack at `--seed`.
    Attack {
        #[arg(value_enum)]
        kind: AttackArg,
        /// Train on data passed through the PII engine first.
        #[arg(long)]
        defended: bool,
    },
    /// Run the full attack × defence matrix.
    Eval {
        /// Comma-separated seeds, overriding the config.
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        /// Skip wall-clock latency and throughput measurements.
        #[arg(long)]
        no_timing: bool,
    },
    /// Start the gateway.
    Serve {
        /// Allow plaintext HTTP when no TLS is configured.
        #[arg(long)]
        insecure_dev: bool,
    },
    /// Write CSV series from an evaluation report.
    Plot {
        /// Report to read; defaults to `<out>/eval_report.json`.
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum AttackArg {
    Mia,
    Extract,
    Poison,
    Invert,
    Property,
}

impl From<AttackArg> for AttackKind {
    fn from(a: AttackArg) -> Self {
        match a {
            AttackArg::Mia => AttackKind::Mia,
            AttackArg::Extract => AttackKind::Extraction,
            AttackArg::Poison => AttackKind::Poisoning,
            AttackArg::Invert => AttackKind::Inversion,
            AttackArg::Property => AttackKind::Property,
        }
    }
}

#[derive(Serialize)]
struct ModelFile {
    specs: Vec<LayerSpec>,
    parameters: Vec<f64>,
    train_accuracy: f64,
    test_accuracy: f64,
    config: ClassifierConfig,
    seed: u64,
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, v: &T) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    let text = serde_json::to_string_pretty(v).map_err(|e| CliError::Invariant(e.to_string()))?;
    std::fs::write(path, text + "\n").map_err(|e| io_err(path, e))
}

fn eval_config(cli: &Cli) -> Result<EvalConfig, CliError> {
    match &cli.config {
        Some(p) => read_json(p),
        None => Ok(EvalConfig::default()),
    }
}

fn emit<T: Serialize>(cli: &Cli, v: &T, human: impl FnOnce()) {
    if cli.json {
        println!("{}", serde_json::to_string_pretty(v).expect("serializable"));
    } else {
        human();
    }
}

fn accuracy(pred: &privlab_core::nn::Matrix, y: &privlab_core::nn::Matrix) -> f64 {
    let hits = pred
        .data()
        .iter()
        .zip(y.data())
        .filter(|(p, t)| (**p >= 0.5) == (**t >= 0.5))
        .count();
    hits as f64 / y.rows().max(1) as f64
}

fn print_cells(cells: &[Cell]) {
    for c in cells {
        let tag = if c.variant.is_empty() {
            String::new()
        } else {
            format!(" [{}]", c.variant)
        };
        match (&c.report, &c.error) {
            (Some(r), _) => {
                let metrics: Vec<String> = c
                    .attack
                    .required_metrics()
                    .iter()
                    .filter_map(|m| r.metric(m).map(|v| format!("{m}={v:.4}")))
                    .collect();
                println!(
                    "{} seed {}{}: {}",
                    c.attack.as_str(),
                    c.seed,
                    tag,
                    metrics.join(" ")
                );
            }
            (None, Some(e)) => println!("{} seed {}{}: FAILED {e}", c.attack.as_str(), c.seed, tag),
            _ => {}
        }
    }
}

fn print_report(r: &EvalReport) {
    println!(
        "{:<11} {:<9} {:<14} {}",
        "attack", "defended", "variant", "median metrics"
    );
    for s in &r.summary {
        let metrics: Vec<String> = s
            .attack
            .required_metrics()
            .iter()
            .filter_map(|m| s.median.get(*m).map(|v| format!("{m}={v:.4}")))
            .collect();
        println!(
            "{:<11} {:<9} {:<14} {}{}",
            s.attack.as_str(),
            s.defended,
            s.variant,
            metrics.join(" "),
            if s.failures > 0 {
                format!(" ({} failed)", s.failures)
            } else {
                String::new()
            }
        );
    }
    println!("retrieval recall@1 = {:.3}", r.retrieval.recall_at_1);
    if let Some(t) = &r.timing {
        println!(
            "chat latency p50 = {:.3} ms, p95 = {:.3} ms",
            t.latency.p50_ms, t.latency.p95_ms
        );
        for p in &t.scalability {
            println!("  {} docs: {:.0} queries/s", p.docs, p.throughput_qps);
        }
    }
    println!(
        "privacy risk: {} (sensitivity {}, exposure {})",
        r.privacy_risk.risk, r.privacy_risk.sensitivity, r.privacy_risk.exposure
    );
    if let Some(d) = &r.privacy_risk_defended {
        println!(
            "defended privacy risk: {} (exposure {})",
            d.risk, d.exposure
        );
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Gen { n, text } => {
            let ds = generate(*n, cli.seed).map_err(|e| CliError::Usage(e.to_string()))?;
            std::fs::create_dir_all(&cli.out).map_err(|e| io_err(&cli.out, e))?;
            let path = cli.out.join("records.csv");
            let mut w = csv::Writer::from_path(&path).map_err(|e| io_err(&path, e))?;
            for r in &ds.records {
                w.serialize(r).map_err(|e| io_err(&path, e))?;
            }
            w.flush().map_err(|e| io_err(&path, e))?;
            let mut files = vec![path];
            if *text {
                let mut corpus = String::new();
                for (i, r) in ds.records.iter().enumerate() {
                    let t = render_text(r, i % TEMPLATES.len())
                        .map_err(|e| CliError::Invariant(e.to_string()))?;
                    corpus.push_str(&t.text);
                    corpus.push('\n');
                }
                let p = cli.out.join("corpus.txt");
                std::fs::write(&p, corpus).map_err(|e| io_err(&p, e))?;
                files.push(p);
            }
            emit(cli, &files, || {
                for f in &files {
                    println!("wrote {}", f.display());
                }
            });
        }
        Command::Train { n } => {
            let model_cfg = match &cli.config {
                Some(_) => eval_config(cli)?.poisoning.config.model,
                None => ClassifierConfig::default(),
            };
            let ds = generate(*n, cli.seed).map_err(|e| CliError::Usage(e.to_string()))?;
            let (train, test) =
                split(&ds, 0.8, cli.seed).map_err(|e| CliError::Usage(e.to_string()))?;
            let (net, _) = model_cfg
                .fit(
                    &train.feature_view(),
                    &train.label_view(),
                    cli.seed,
                    cli.seed.wrapping_add(1),
                )
                .map_err(|e| CliError::Experiment(e.to_string()))?;
            let acc = |d: &privlab_core::synthdata::Dataset| -> Result<f64, CliError> {
                let p = net
                    .predict(&d.feature_view())
                    .map_err(|e| CliError::Experiment(e.to_string()))?;
                Ok(accuracy(&p, &d.label_view()))
            };
            let file = ModelFile {
                specs: net.specs(),
                parameters: net.parameters(),
                train_accuracy: acc(&train)?,
                test_accuracy: acc(&test)?,
                config: model_cfg,
                seed: cli.seed,
            };
            let path = cli.out.join("model.json");
            write_json(&path, &file)?;
            emit(cli, &file, || {
                println!(
                    "train accuracy {:.4}, test accuracy {:.4}; wrote {}",
                    file.train_accuracy,
                    file.test_accuracy,
                    path.display()
                )
            });
        }
        Command::Attack { kind, defended } => {
            let cfg = eval_config(cli)?;
            let kind = AttackKind::from(*kind);
            let cells = run_attack(&cfg, kind, cli.seed, *defended);
            let path = cli.out.join(format!(
                "attack_{}{}.json",
                kind.as_str(),
                if *defended { "_defended" } else { "" }
            ));
            write_json(&path, &cells)?;
            emit(cli, &cells, || print_cells(&cells));
            for c in &cells {
                if let Some(r) = &c.report {
                    r.validate()
                        .map_err(|e| CliError::Invariant(e.to_string()))?;
                }
            }
            if let Some(e) = cells.iter().find_map(|c| c.error.as_ref()) {
                return Err(CliError::Experiment(e.clone()));
            }
        }
        Command::Eval { seeds, no_timing } => {
            let mut cfg = eval_config(cli)?;
            if let Some(s) = seeds {
                cfg.seeds = s.clone();
            }
            if *no_timing {
                cfg.retrieval.measure_timing = false;
            }
            let report = run_eval(&cfg)?;
            let path = cli.out.join("eval_report.json");
            write_json(&path, &report)?;
            emit(cli, &report, || {
                print_report(&report);
                println!("wrote {}", path.display());
            });
            if report.cells.iter().any(|c| c.error.is_some()) {
                return Err(CliError::Experiment(
                    "one or more cells failed; see `skipped`".into(),
                ));
            }
        }
        Command::Serve { insecure_dev } => {
            let path = cli
                .config
                .as_ref()
                .ok_or_else(|| CliError::Usage("serve needs --config <gateway.json>".into()))?;
            let cfg = GatewayConfig::load(path).map_err(|e| CliError::Usage(e.to_string()))?;
            privlab_gateway::server::choose_transport(cfg.tls.as_ref(), *insecure_dev)
                .map_err(|e| CliError::Usage(e.to_string()))?;
            let gw =
                Arc::new(Gateway::from_config(cfg).map_err(|e| CliError::Usage(e.to_string()))?);
            let rt = tokio::runtime::Runtime::new().map_err(|e| CliError::Io(e.to_string()))?;
            rt.block_on(privlab_gateway::server::serve(gw, *insecure_dev))
                .map_err(|e| CliError::Experiment(e.to_string()))?;
        }
        Command::Plot { report } => {
            let path = report
                .clone()
                .unwrap_or_else(|| cli.out.join("eval_report.json"));
            let r: EvalReport = read_json(&path)?;
            let files = plot(&r, &cli.out.join("plots"))?;
            emit(cli, &files, || {
                for f in &files {
                    println!("wrote {}", f.display());
                }
            });
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .with_writer(std::io::stderr)
        .init();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
