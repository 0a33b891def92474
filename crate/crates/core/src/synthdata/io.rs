use std::io::{BufRead, Write};

use super::{Dataset, Record, SynthError};

/// One JSON object per line, field names as in [`Record`].
pub fn write_jsonl<W: Write>(ds: &Dataset, mut out: W) -> Result<(), SynthError> {
    for r in &ds.records {
        serde_json::to_writer(&mut out, r).map_err(|source| SynthError::Json { line: r.id as usize, source })?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_jsonl<R: BufRead>(input: R) -> Result<Dataset, SynthError> {
    let mut records = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let r: Record = serde_json::from_str(&line).map_err(|source| SynthError::Json { line: i + 1, source })?;
        records.push(r);
    }
    Ok(Dataset::from_records(records))
}

/// CSV of the normalized feature view plus the label column.
pub fn write_features_csv<W: Write>(ds: &Dataset, out: W) -> Result<(), SynthError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["id", "age_norm", "income_norm", "gender", "condition"])?;
    for r in &ds.records {
        let f = ds.features_of(r);
        w.write_record([
            r.id.to_string(),
            f[0].to_string(),
            f[1].to_string(),
            f[2].to_string(),
            r.condition.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
