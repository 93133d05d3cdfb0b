use std::path::Path;

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::{feature_names, feature_source, feature_vector, FeatureConfig};
use crate::dataset::ImageSample;
use crate::error::{Error, Result};
use crate::filters::SourceSelection;

/// Feature values of a labeled sample set, one row per sample.
///
/// On disk this is the feature cache: a CSV with header
/// `id,label,<feature names...>` and one row per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub ids: Vec<String>,
    pub labels: Vec<String>,
    pub names: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// Extracts all five sources of every sample in parallel.
pub fn extract_table(samples: &[ImageSample], config: &FeatureConfig) -> Result<FeatureTable> {
    config.validate()?;
    let rows = samples
        .par_iter()
        .map(|s| feature_vector(s, SourceSelection::ALL, config).map(|v| v.values))
        .collect::<Result<Vec<_>>>()?;
    Ok(FeatureTable {
        ids: samples.iter().map(|s| s.id().to_string()).collect(),
        labels: samples.iter().map(|s| s.label().to_string()).collect(),
        names: feature_names(SourceSelection::ALL),
        rows,
    })
}

impl FeatureTable {
    pub fn new(
        ids: Vec<String>,
        labels: Vec<String>,
        names: Vec<String>,
        rows: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let t = Self {
            ids,
            labels,
            names,
            rows,
        };
        t.validate()?;
        Ok(t)
    }

    fn validate(&self) -> Result<()> {
        let n = self.ids.len();
        if self.labels.len() != n || self.rows.len() != n {
            return Err(Error::Data(format!(
                "{} ids, {} labels, {} rows",
                n,
                self.labels.len(),
                self.rows.len()
            )));
        }
        for (id, row) in self.ids.iter().zip(&self.rows) {
            if row.len() != self.names.len() {
                return Err(Error::Data(format!(
                    "sample {id}: {} values for {} features",
                    row.len(),
                    self.names.len()
                )));
            }
            if let Some(k) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::Data(format!(
                    "sample {id}: non-finite feature {}",
                    self.names[k]
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Column indices of the features belonging to `selection`, in table order.
    pub fn columns_for(&self, selection: SourceSelection) -> Result<Vec<usize>> {
        let cols: Vec<usize> = self
            .names
            .iter()
            .enumerate()
            .filter(|(_, n)| feature_source(n).is_some_and(|s| selection.contains(s)))
            .map(|(i, _)| i)
            .collect();
        let expected = selection.len() * super::BLOCK_LEN;
        if cols.len() != expected {
            return Err(Error::Data(format!(
                "feature table has {} of the {expected} columns needed by case {}",
                cols.len(),
                selection.case()
            )));
        }
        Ok(cols)
    }

    /// Dense `rows x cols` sub-matrix.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
        DMatrix::from_fn(rows.len(), cols.len(), |r, c| self.rows[rows[r]][cols[c]])
    }

    pub fn labels_of(&self, rows: &[usize]) -> Vec<String> {
        rows.iter().map(|&r| self.labels[r].clone()).collect()
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)
            .map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
        let mut header = vec!["id".to_string(), "label".to_string()];
        header.extend(self.names.iter().cloned());
        w.write_record(&header)?;
        for ((id, label), row) in self.ids.iter().zip(&self.labels).zip(&self.rows) {
            let mut rec = vec![id.clone(), label.clone()];
            rec.extend(row.iter().map(|v| v.to_string()));
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path).map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => {
                Error::Config(format!("cannot open feature cache {}: {e}", path.display()))
            }
            _ => Error::Data(e.to_string()),
        })?;
        let header = r.headers()?.clone();
        if header.len() < 3 || &header[0] != "id" || &header[1] != "label" {
            return Err(Error::Data(format!(
                "{}: header must start with id,label",
                path.display()
            )));
        }
        let names: Vec<String> = header.iter().skip(2).map(str::to_string).collect();
        let (mut ids, mut labels, mut rows) = (Vec::new(), Vec::new(), Vec::new());
        for rec in r.records() {
            let rec = rec?;
            ids.push(rec[0].to_string());
            labels.push(rec[1].to_string());
            let row = rec
                .iter()
                .skip(2)
                .enumerate()
                .map(|(k, v)| {
                    v.parse::<f64>().map_err(|_| {
                        Error::Data(format!(
                            "sample {}: bad value {v:?} for {}",
                            &rec[0], names[k]
                        ))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        Self::new(ids, labels, names, rows)
    }
}
