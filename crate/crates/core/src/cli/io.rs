//! CSV ingestion and emission.

use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use super::CliError;
use crate::metrics::ValidationSet;

/// Reads `risk,outcome[,cluster]` by header name; other columns are ignored.
pub fn read_dataset(path: &Path, cluster_col: Option<&str>) -> Result<ValidationSet, CliError> {
    let shown = path.display();
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::io(format!("{shown}: {e}")))?;
    let headers = reader
        .headers()
        .map_err(|e| CliError::malformed(format!("{shown}: cannot read header: {e}")))?
        .clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::malformed(format!("{shown}: missing column `{name}`")))
    };
    let risk_at = column("risk")?;
    let outcome_at = column("outcome")?;
    let cluster_at = cluster_col.map(column).transpose()?;

    let (mut risks, mut outcomes, mut clusters) = (Vec::new(), Vec::new(), Vec::new());
    for (k, record) in reader.records().enumerate() {
        let row = k + 1;
        let record = record.map_err(|e| CliError::malformed(format!("{shown}: row {row}: {e}")))?;
        let field = |at: usize| record.get(at).unwrap_or("");
        let risk: f64 = field(risk_at)
            .parse()
            .map_err(|_| CliError::malformed(format!("{shown}: row {row}: risk `{}` is not a number", field(risk_at))))?;
        if !(0.0..=1.0).contains(&risk) {
            return Err(CliError::malformed(format!("{shown}: row {row}: risk {risk} is outside [0, 1]")));
        }
        let outcome = match field(outcome_at) {
            "0" => false,
            "1" => true,
            other => {
                return Err(CliError::malformed(format!(
                    "{shown}: row {row}: outcome `{other}` is not 0 or 1"
                )))
            }
        };
        risks.push(risk);
        outcomes.push(outcome);
        if let Some(at) = cluster_at {
            clusters.push(field(at).to_string());
        }
    }
    if risks.is_empty() {
        return Err(CliError::malformed(format!("{shown}: no data rows")));
    }
    let data = ValidationSet::new(risks, outcomes)?;
    if cluster_at.is_some() {
        Ok(data.with_clusters(clusters)?)
    } else {
        Ok(data)
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_value(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn create(path: &Path) -> Result<File, CliError> {
    File::create(path).map_err(|e| CliError::io(format!("{}: {e}", path.display())))
}

/// Writes one CSV per model. Extra columns are given as `(name, values)`.
pub fn write_dataset(
    path: &Path,
    data: &ValidationSet,
    extra: &[(&str, Vec<String>)],
) -> Result<(), CliError> {
    let mut writer = csv::Writer::from_writer(io::BufWriter::new(create(path)?));
    let mut header = vec!["risk", "outcome"];
    header.extend(extra.iter().map(|(name, _)| *name));
    writer.write_record(&header).map_err(CliError::from_csv)?;
    for (i, (r, y)) in data.iter().enumerate() {
        let mut row = vec![fmt_value(r), u8::from(y).to_string()];
        row.extend(extra.iter().map(|(_, values)| values[i].clone()));
        writer.write_record(&row).map_err(CliError::from_csv)?;
    }
    writer.flush().map_err(|e| CliError::io(e.to_string()))
}

pub fn csv_writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::Writer::from_writer(out)
}
