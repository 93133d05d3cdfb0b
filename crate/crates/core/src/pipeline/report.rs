use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::Stage;
use super::experiment::CaseResult;
use crate::bayes::ConfusionMatrix;
use crate::error::{Error, Result};
use crate::features::feature_group;
use crate::filters::Source;
#[cfg(test)]
use crate::filters::SourceSelection;

pub const RESULTS_CSV: &str = "results.csv";
pub const RESULTS_JSON: &str = "results.json";
pub const CONFUSION_DIR: &str = "confusion";

pub const TABLE_HEADER: [&str; 14] = [
    "case", "V", "E", "C", "G", "O", "mu0", "sd0", "mu_pca", "sd_pca", "mu_ga", "sd_ga", "nf0",
    "nf_ga",
];

/// Order in which correlation coefficients are reported.
pub const CORRELATION_ORDER: [Source; 5] = [
    Source::Original,
    Source::Variance,
    Source::Entropy,
    Source::Canny,
    Source::Gaussian,
];

/// One row of the results table, in file units (percent, two decimals).
#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub case: u8,
    pub flags: [bool; 5],
    pub mu0: Option<f64>,
    pub sd0: Option<f64>,
    pub mu_pca: Option<f64>,
    pub sd_pca: Option<f64>,
    pub mu_ga: Option<f64>,
    pub sd_ga: Option<f64>,
    pub nf0: usize,
    pub nf_ga: Option<f64>,
}

fn pct(v: f64) -> String {
    format!("{:.2}", 100.0 * v)
}

fn opt(v: Option<String>) -> String {
    v.unwrap_or_default()
}

/// Writes the results table; success values are percentages with two decimals.
pub fn write_results_table(path: &Path, results: &[CaseResult]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)
        .map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
    w.write_record(TABLE_HEADER)?;
    for r in results {
        let mut rec = vec![r.case.to_string()];
        rec.extend(r.flags.iter().map(|&f| u8::from(f).to_string()));
        for stage in Stage::ALL {
            let s = r.stage(stage);
            rec.push(opt(s.map(|s| pct(s.mean))));
            rec.push(opt(s.map(|s| pct(s.std))));
        }
        rec.push(r.nf0.to_string());
        rec.push(opt(r.nf_ga.map(|v| format!("{v:.2}"))));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn parse_opt(field: &str, what: &str) -> Result<Option<f64>> {
    if field.is_empty() {
        return Ok(None);
    }
    field
        .parse()
        .map(Some)
        .map_err(|_| Error::Data(format!("bad {what} value {field:?}")))
}

pub fn read_results_table(path: &Path) -> Result<Vec<TableRow>> {
    let mut r = csv::Reader::from_path(path)
        .map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != TABLE_HEADER {
        return Err(Error::Data(format!(
            "{}: unexpected header",
            path.display()
        )));
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let int = |i: usize| -> Result<usize> {
            rec[i]
                .parse()
                .map_err(|_| Error::Data(format!("bad {} value {:?}", TABLE_HEADER[i], &rec[i])))
        };
        let case = u8::try_from(int(0)?).map_err(|_| Error::Data("case out of range".into()))?;
        let mut flags = [false; 5];
        for (k, f) in flags.iter_mut().enumerate() {
            *f = match &rec[1 + k] {
                "0" => false,
                "1" => true,
                other => return Err(Error::Data(format!("bad flag {other:?}"))),
            };
        }
        let f = |i: usize| parse_opt(&rec[i], TABLE_HEADER[i]);
        rows.push(TableRow {
            case,
            flags,
            mu0: f(6)?,
            sd0: f(7)?,
            mu_pca: f(8)?,
            sd_pca: f(9)?,
            mu_ga: f(10)?,
            sd_ga: f(11)?,
            nf0: int(12)?,
            nf_ga: f(13)?,
        });
    }
    Ok(rows)
}

/// Full-precision results; reading them back reproduces every value exactly.
pub fn write_results_json(path: &Path, results: &[CaseResult]) -> Result<()> {
    let text = serde_json::to_string_pretty(results)
        .map_err(|e| Error::Data(format!("cannot serialize results: {e}")))?;
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

pub fn read_results_json(path: &Path) -> Result<Vec<CaseResult>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Data(format!("{}: {e}", path.display())))
}

/// Reads `results.json` from a results directory.
pub fn read_results_dir(dir: &Path) -> Result<Vec<CaseResult>> {
    read_results_json(&dir.join(RESULTS_JSON))
}

/// Confusion matrix as CSV: the first row and column hold class names.
pub fn write_confusion(path: &Path, cm: &ConfusionMatrix) -> Result<()> {
    let mut w = csv::Writer::from_path(path)
        .map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
    w.write_record(
        std::iter::once("true\\predicted").chain(cm.classes.iter().map(String::as_str)),
    )?;
    for (class, row) in cm.classes.iter().zip(&cm.counts) {
        let mut rec = vec![class.clone()];
        rec.extend(row.iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_confusion(path: &Path) -> Result<ConfusionMatrix> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
    let mut records = r.records();
    let header = records
        .next()
        .ok_or_else(|| Error::Data(format!("{}: empty confusion file", path.display())))??;
    let classes: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let mut counts = Vec::new();
    for (i, rec) in records.enumerate() {
        let rec = rec?;
        if rec.len() != classes.len() + 1 || classes.get(i).map(String::as_str) != Some(&rec[0]) {
            return Err(Error::Data(format!(
                "{}: malformed row {}",
                path.display(),
                i + 1
            )));
        }
        let row = rec
            .iter()
            .skip(1)
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|_| Error::Data(format!("bad count {v:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        counts.push(row);
    }
    if counts.len() != classes.len() {
        return Err(Error::Data(format!(
            "{}: confusion matrix is not square",
            path.display()
        )));
    }
    Ok(ConfusionMatrix { classes, counts })
}

pub fn confusion_file_name(case: u8) -> String {
    format!("case_{case:02}.csv")
}

/// Writes the table, the JSON results and one confusion file per case.
pub fn write_outputs(dir: &Path, results: &[CaseResult]) -> Result<()> {
    let cdir = dir.join(CONFUSION_DIR);
    fs::create_dir_all(&cdir).map_err(|e| Error::io(&cdir, e))?;
    write_results_table(&dir.join(RESULTS_CSV), results)?;
    write_results_json(&dir.join(RESULTS_JSON), results)?;
    for r in results {
        write_confusion(&cdir.join(confusion_file_name(r.case)), &r.confusion)?;
    }
    Ok(())
}

fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    (sxx > 0.0 && syy > 0.0).then(|| sxy / (sxx * syy).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceCorrelation {
    pub source: Source,
    /// `None` when the source is included in every case or in none.
    pub coefficient: Option<f64>,
}

/// Pearson correlation between each source's inclusion indicator and the
/// stage mean success, ordered Original, Variance, Entropy, Canny, Gaussian.
pub fn filter_correlations(results: &[CaseResult], stage: Stage) -> Result<Vec<SourceCorrelation>> {
    if results.len() < 3 {
        return Err(Error::UndefinedCorrelation(format!(
            "need at least 3 cases, got {}",
            results.len()
        )));
    }
    let success = results
        .iter()
        .map(|r| {
            r.stage(stage)
                .map(|s| s.mean)
                .ok_or_else(|| Error::Data(format!("case {} has no {stage} stage", r.case)))
        })
        .collect::<Result<Vec<f64>>>()?;
    let first = success[0];
    if success.iter().all(|&s| s == first) {
        return Err(Error::UndefinedCorrelation(format!(
            "{stage} success is constant across cases"
        )));
    }
    Ok(CORRELATION_ORDER
        .iter()
        .map(|&source| {
            let ind: Vec<f64> = results
                .iter()
                .map(|r| f64::from(u8::from(r.selection().contains(source))))
                .collect();
            SourceCorrelation {
                source,
                coefficient: pearson(&ind, &success),
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelevanceEntry {
    /// Feature name without source and variant prefixes, e.g. `f9`.
    pub group: String,
    pub label: String,
    /// Mean selection frequency over every feature of the group in every GA case.
    pub frequency: f64,
    /// Number of (case, feature) pairs averaged.
    pub members: usize,
}

/// Readable name of a feature group; correlation and local homogeneity carry both names.
pub fn group_label(group: &str) -> String {
    use crate::features::{GLCM_FEATURE_LABELS, GLCM_FEATURE_NAMES};
    match group {
        "f3" => "correlation".into(),
        "f5" => "inverse difference moment / local homogeneity".into(),
        "fd" => "fractal dimension".into(),
        "mle" => "maximum Lyapunov exponent".into(),
        g => GLCM_FEATURE_NAMES
            .iter()
            .position(|n| *n == g)
            .map(|i| GLCM_FEATURE_LABELS[i].to_string())
            .unwrap_or_else(|| g.to_string()),
    }
}

/// Feature groups ranked by mean GA selection frequency, highest first.
/// Cases without a GA stage are ignored; ties break by group name.
pub fn relevance_report(results: &[CaseResult]) -> Vec<RelevanceEntry> {
    let mut acc: BTreeMap<&str, (f64, usize)> = BTreeMap::new();
    for r in results.iter().filter(|r| !r.selection_frequency.is_empty()) {
        for (name, &f) in r.feature_names.iter().zip(&r.selection_frequency) {
            let e = acc.entry(feature_group(name)).or_default();
            e.0 += f;
            e.1 += 1;
        }
    }
    let mut out: Vec<RelevanceEntry> = acc
        .into_iter()
        .map(|(g, (sum, n))| RelevanceEntry {
            group: g.to_string(),
            label: group_label(g),
            frequency: sum / n as f64,
            members: n,
        })
        .collect();
    out.sort_by(|a, b| {
        b.frequency
            .total_cmp(&a.frequency)
            .then_with(|| a.group.cmp(&b.group))
    });
    out
}
