//! CSV ingestion and writers. Numbers are written with 17 significant
//! digits so they read back to the same double.

use anyhow::{bail, Context, Result};
use corrclust_core::model::Dataset;
use corrclust_core::numerics::DenseMatrix;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Reads a numeric CSV with a header row of variable names.
pub fn read_data(path: &Path) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("opening {}", path.display()))?;
    let header: Vec<String> = reader
        .headers()
        .with_context(|| format!("reading header of {}", path.display()))?
        .iter()
        .map(str::to_string)
        .collect();
    let k = header.len();
    let mut values = Vec::new();
    let mut n = 0;
    for (r, record) in reader.records().enumerate() {
        // Row numbers count data rows from 1; the header is row 0.
        let row = r + 1;
        let record = record.with_context(|| format!("{}: row {row}", path.display()))?;
        if record.len() != k {
            bail!(
                "{}: row {row} has {} fields, expected {k} (one per header column)",
                path.display(),
                record.len()
            );
        }
        for (c, cell) in record.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| {
                anyhow::anyhow!(
                    "{}: row {row}, column {} ('{}'): cannot parse '{cell}' as a number",
                    path.display(),
                    c + 1,
                    header[c]
                )
            })?;
            if !v.is_finite() {
                bail!(
                    "{}: row {row}, column {} ('{}'): value is not finite",
                    path.display(),
                    c + 1,
                    header[c]
                );
            }
            values.push(v);
        }
        n += 1;
    }
    if n <= 1 {
        bail!("{}: need at least 2 data rows, found {n}", path.display());
    }
    let y = DenseMatrix::from_vec(n, k, values)?;
    Ok(Dataset::new(y, Some(header))?)
}

pub fn variable_names(data: &Dataset) -> Vec<String> {
    data.column_labels()
        .map(<[String]>::to_vec)
        .unwrap_or_else(|| (1..=data.k()).map(|i| format!("V{i}")).collect())
}

pub fn write_data(path: &Path, data: &Dataset) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(variable_names(data))?;
    let y = data.observations();
    for i in 0..y.rows() {
        w.write_record(y.row(i).iter().map(|&v| fmt_f64(v)))?;
    }
    w.flush()?;
    Ok(())
}

/// `variable,label` rows with labels shifted to start at 1.
pub fn write_labels(path: &Path, names: &[String], labels: &[usize]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["variable", "label"])?;
    for (name, &l) in names.iter().zip(labels) {
        w.write_record([name.clone(), (l + 1).to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a `variable,label` file; labels are returned as written.
pub fn read_labels(path: &Path) -> Result<(Vec<String>, Vec<usize>)> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("opening {}", path.display()))?;
    let (mut names, mut labels) = (Vec::new(), Vec::new());
    for (r, record) in reader.records().enumerate() {
        let row = r + 1;
        let record = record.with_context(|| format!("{}: row {row}", path.display()))?;
        if record.len() != 2 {
            bail!(
                "{}: row {row} has {} fields, expected 2 (variable, label)",
                path.display(),
                record.len()
            );
        }
        let label: usize = record[1].parse().map_err(|_| {
            anyhow::anyhow!(
                "{}: row {row}, column 2 ('label'): cannot parse '{}' as a label",
                path.display(),
                &record[1]
            )
        })?;
        names.push(record[0].to_string());
        labels.push(label);
    }
    if labels.is_empty() {
        bail!("{}: no labels", path.display());
    }
    Ok((names, labels))
}

pub fn writer(path: &Path) -> Result<csv::Writer<File>> {
    csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))
}

pub fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let mut f =
        BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    serde_json::to_writer_pretty(&mut f, value)?;
    writeln!(f)?;
    f.flush()?;
    Ok(())
}
