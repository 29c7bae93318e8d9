//! CSV emission and parsing (RFC 4180, '.' decimal separator, UTF-8).

use std::path::Path;
use std::sync::Arc;

use crate::divergence::DivergenceResult;
use crate::error::{Error, Result};
use crate::estimators::{CoefficientField, FieldMeta};
use crate::harness::runner::ConvergenceCurve;
use crate::spectrum::{BasisElement, BasisKind, FrequencyVector, SpectrumSlice};

/// Serializes curves to the `(estimator, n, mean, stderr, slope, slope_stderr)`
/// row schema. Byte-deterministic for identical inputs.
pub fn curves_to_csv(curves: &[ConvergenceCurve]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["estimator", "n", "mean", "stderr", "slope", "slope_stderr"])
        .map_err(csv_err)?;
    for c in curves {
        for i in 0..c.ns.len() {
            w.write_record([
                c.estimator.label().to_string(),
                c.ns[i].to_string(),
                c.means[i].to_string(),
                c.stderrs[i].to_string(),
                c.slope.to_string(),
                c.slope_stderr.to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    w.into_inner().map_err(|e| Error::Config(e.to_string()))
}

/// Divergence rows `(metric, param, value, tail_lo, tail_hi)`.
pub fn divergences_to_csv(rows: &[(String, f64, DivergenceResult)]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["metric", "param", "value", "tail_lo", "tail_hi"])
        .map_err(csv_err)?;
    for (metric, param, r) in rows {
        w.write_record([
            metric.clone(),
            param.to_string(),
            r.value.to_string(),
            r.tail_lo.to_string(),
            r.tail_hi.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| Error::Config(e.to_string()))
}

/// Coefficient-field export: `(kind, v0…v{d-1}, lambda, value)` per element.
pub fn field_to_csv(field: &CoefficientField) -> Result<Vec<u8>> {
    let slice = &field.slice;
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["kind".to_string()];
    for j in 0..slice.dim {
        header.push(format!("v{j}"));
    }
    header.push("lambda".into());
    header.push("value".into());
    w.write_record(&header).map_err(csv_err)?;
    for (i, e) in slice.elements.iter().enumerate() {
        let kind = match e.kind {
            BasisKind::Constant => "constant",
            BasisKind::Cosine => "cosine",
            BasisKind::Sine => "sine",
        };
        let mut row = vec![kind.to_string()];
        for &v in &e.freq.0 {
            row.push(v.to_string());
        }
        row.push(slice.lambdas[i].to_string());
        row.push(field.values[i].to_string());
        w.write_record(&row).map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| Error::Config(e.to_string()))
}

/// Parses a coefficient-field CSV produced by [`field_to_csv`] (or any
/// conforming source): reconstructs the slice from the listed elements.
pub fn field_from_csv(bytes: &[u8]) -> Result<CoefficientField> {
    let mut reader = csv::ReaderBuilder::new().from_reader(bytes);
    let header = reader.headers().map_err(csv_err)?.clone();
    if header.len() < 3 || &header[0] != "kind" {
        return Err(Error::Config("field CSV: bad header".into()));
    }
    let d = header.len() - 3;
    for j in 0..d {
        if header[1 + j] != format!("v{j}") {
            return Err(Error::Config("field CSV: bad frequency columns".into()));
        }
    }
    if &header[1 + d] != "lambda" || &header[2 + d] != "value" {
        return Err(Error::Config("field CSV: bad trailing columns".into()));
    }
    let mut elements = Vec::new();
    let mut values = Vec::new();
    let mut lambda_max = 0.0f64;
    for record in reader.records() {
        let record = record.map_err(csv_err)?;
        if record.len() != header.len() {
            return Err(Error::Config("field CSV: ragged row".into()));
        }
        let kind = match &record[0] {
            "constant" => BasisKind::Constant,
            "cosine" => BasisKind::Cosine,
            "sine" => BasisKind::Sine,
            other => return Err(Error::Config(format!("field CSV: unknown kind '{other}'"))),
        };
        let mut freq = Vec::with_capacity(d);
        for j in 0..d {
            freq.push(
                record[1 + j]
                    .parse::<i64>()
                    .map_err(|e| Error::Config(format!("field CSV: bad frequency: {e}")))?,
            );
        }
        let freq = FrequencyVector(freq);
        match kind {
            BasisKind::Constant => {
                if !freq.is_zero() {
                    return Err(Error::Config("field CSV: constant with nonzero freq".into()));
                }
            }
            _ => {
                if !freq.is_canonical() {
                    return Err(Error::Config("field CSV: non-canonical frequency".into()));
                }
            }
        }
        let lambda: f64 = record[1 + d]
            .parse()
            .map_err(|e| Error::Config(format!("field CSV: bad lambda: {e}")))?;
        let expected = crate::spectrum::eigenvalue(&freq);
        if !(lambda.is_finite() && (lambda - expected).abs() <= 1e-9 * (1.0 + expected)) {
            return Err(Error::Config("field CSV: lambda/frequency mismatch".into()));
        }
        let value: f64 = record[2 + d]
            .parse()
            .map_err(|e| Error::Config(format!("field CSV: bad value: {e}")))?;
        if !value.is_finite() {
            return Err(Error::Config("field CSV: non-finite value".into()));
        }
        lambda_max = lambda_max.max(expected);
        elements.push(BasisElement { freq, kind });
        values.push(value);
    }
    if elements.is_empty() {
        return Err(Error::Config("field CSV: no elements".into()));
    }
    // Reassemble in canonical slice order, rejecting duplicates.
    let mut order: Vec<usize> = (0..elements.len()).collect();
    order.sort_by(|&a, &b| element_key(&elements[a]).cmp(&element_key(&elements[b])));
    for w in order.windows(2) {
        if element_key(&elements[w[0]]) == element_key(&elements[w[1]]) {
            return Err(Error::Config("field CSV: duplicate element".into()));
        }
    }
    let sorted_elements: Vec<BasisElement> = order.iter().map(|&i| elements[i].clone()).collect();
    let sorted_values: Vec<f64> = order.iter().map(|&i| values[i]).collect();
    if sorted_elements[0].kind != BasisKind::Constant {
        return Err(Error::Config("field CSV: missing constant element".into()));
    }
    let freqs: Vec<FrequencyVector> = sorted_elements
        .iter()
        .filter(|e| e.kind == BasisKind::Cosine)
        .map(|e| e.freq.clone())
        .collect();
    // Every cosine must pair with a sine and vice versa.
    let slice = SpectrumSlice::from_canonical_freqs(d, lambda_max, freqs);
    if slice.elements.len() != sorted_elements.len()
        || slice
            .elements
            .iter()
            .zip(&sorted_elements)
            .any(|(a, b)| a != b)
    {
        return Err(Error::Config(
            "field CSV: elements do not form a cosine/sine-paired slice".into(),
        ));
    }
    Ok(CoefficientField::new(
        Arc::new(slice),
        sorted_values,
        FieldMeta::default(),
    ))
}

fn element_key(e: &BasisElement) -> (i64, Vec<i64>, u8) {
    let kind_rank = match e.kind {
        BasisKind::Constant => 0,
        BasisKind::Cosine => 1,
        BasisKind::Sine => 2,
    };
    (e.freq.sq_norm(), e.freq.0.clone(), kind_rank)
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, bytes)?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Config(format!("csv: {e}"))
}
