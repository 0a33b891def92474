//! CSV series for figures.

use std::fs;
use std::path::{Path, PathBuf};

use privlab_core::attacks::AttackKind;

use crate::eval::EvalReport;
use crate::CliError;

fn writer(path: &Path) -> Result<csv::Writer<fs::File>, CliError> {
    csv::Writer::from_path(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn io(e: impl std::fmt::Display) -> CliError {
    CliError::Io(e.to_string())
}

/// Writes every series the report supports into `out_dir`; returns the paths.
///
/// * `mia_roc_seed{s}[_defended].csv`: `fpr,tpr`
/// * `inversion_loss_seed{s}_y{y}[_defended].csv`: `step,loss`
/// * `poisoning_accuracy.csv`: `seed,defended,accuracy_clean,accuracy_poisoned`
/// * `scalability.csv`: `docs,queries,throughput_qps,mean_query_ms`
pub fn plot(report: &EvalReport, out_dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(out_dir).map_err(|e| CliError::Io(format!("{}: {e}", out_dir.display())))?;
    let mut written = Vec::new();
    let suffix = |d: bool| if d { "_defended" } else { "" };

    for c in report.cells.iter().filter(|c| c.attack == AttackKind::Mia) {
        let Some(roc) = c.report.as_ref().and_then(|r| r.artifacts.roc.as_ref()) else {
            continue;
        };
        let path = out_dir.join(format!("mia_roc_seed{}{}.csv", c.seed, suffix(c.defended)));
        let mut w = writer(&path)?;
        w.write_record(["fpr", "tpr"]).map_err(io)?;
        for (fpr, tpr) in roc {
            w.write_record([fpr.to_string(), tpr.to_string()])
                .map_err(io)?;
        }
        w.flush().map_err(io)?;
        written.push(path);
    }

    for c in report
        .cells
        .iter()
        .filter(|c| c.attack == AttackKind::Inversion)
    {
        let Some(trace) = c
            .report
            .as_ref()
            .and_then(|r| r.artifacts.loss_trace.as_ref())
        else {
            continue;
        };
        let y = c.variant.trim_start_matches("y=");
        let path = out_dir.join(format!(
            "inversion_loss_seed{}_y{}{}.csv",
            c.seed,
            y,
            suffix(c.defended)
        ));
        let mut w = writer(&path)?;
        w.write_record(["step", "loss"]).map_err(io)?;
        for (i, l) in trace.iter().enumerate() {
            w.write_record([i.to_string(), l.to_string()]).map_err(io)?;
        }
        w.flush().map_err(io)?;
        written.push(path);
    }

    let poison: Vec<_> = report
        .cells
        .iter()
        .filter(|c| c.attack == AttackKind::Poisoning)
        .filter_map(|c| c.report.as_ref().map(|r| (c, r)))
        .collect();
    if !poison.is_empty() {
        let path = out_dir.join("poisoning_accuracy.csv");
        let mut w = writer(&path)?;
        w.write_record(["seed", "defended", "accuracy_clean", "accuracy_poisoned"])
            .map_err(io)?;
        for (c, r) in poison {
            let m = |k: &str| r.metric(k).map_or_else(String::new, |v| v.to_string());
            w.write_record([
                c.seed.to_string(),
                c.defended.to_string(),
                m("accuracy_clean"),
                m("accuracy_poisoned"),
            ])
            .map_err(io)?;
        }
        w.flush().map_err(io)?;
        written.push(path);
    }

    if let Some(t) = &report.timing {
        let path = out_dir.join("scalability.csv");
        let mut w = writer(&path)?;
        w.write_record(["docs", "queries", "throughput_qps", "mean_query_ms"])
            .map_err(io)?;
        for p in &t.scalability {
            w.write_record([
                p.docs.to_string(),
                p.queries.to_string(),
                p.throughput_qps.to_string(),
                p.mean_query_ms.to_string(),
            ])
            .map_err(io)?;
        }
        w.flush().map_err(io)?;
        written.push(path);
    }
    Ok(written)
}
