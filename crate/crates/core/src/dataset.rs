//! Labeled image collections, quantization and seeded train/test splits.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::grid::{Grid, Intensity, QuantizedImage};
use crate::rng;

/// Minimum accepted image side.
pub const MIN_SIDE: usize = 16;

/// File name that, when present in the dataset root, replaces directory discovery.
pub const MANIFEST_NAME: &str = "manifest.csv";

const IMAGE_EXTENSIONS: &[&str] = &["png", "jpg", "jpeg", "bmp", "tif", "tiff", "pgm"];

#[derive(Debug, Clone, PartialEq)]
pub struct ImageSample {
    id: String,
    label: String,
    pixels: Intensity,
}

impl ImageSample {
    pub fn new(id: impl Into<String>, label: impl Into<String>, pixels: Intensity) -> Result<Self> {
        let id = id.into();
        let label = label.into();
        if label.is_empty() {
            return Err(Error::Dataset(format!("sample {id}: empty label")));
        }
        if pixels.height() < MIN_SIDE || pixels.width() < MIN_SIDE {
            return Err(Error::Dataset(format!(
                "sample {id}: {}x{} is smaller than {MIN_SIDE}x{MIN_SIDE}",
                pixels.height(),
                pixels.width()
            )));
        }
        if let Some(v) = pixels
            .data()
            .iter()
            .find(|v| !v.is_finite() || **v < 0.0 || **v > 1.0)
        {
            return Err(Error::Dataset(format!(
                "sample {id}: intensity {v} outside [0, 1]"
            )));
        }
        Ok(Self { id, label, pixels })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn pixels(&self) -> &Intensity {
        &self.pixels
    }
}

/// Seeded train/test split parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub seed: u64,
    pub train_fraction: f64,
}

impl SplitSpec {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            train_fraction: 0.6,
        }
    }

    pub fn with_fraction(seed: u64, train_fraction: f64) -> Self {
        Self {
            seed,
            train_fraction,
        }
    }
}

/// Sample indices of a train/test partition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

#[derive(Debug, Deserialize)]
struct ManifestRow {
    id: String,
    label: String,
    path: String,
}

/// Loads `<root>/<class>/<image>` or, when `<root>/manifest.csv` exists, the
/// rows of that manifest (`id,label,path`, paths relative to the root).
///
/// Samples are returned sorted by class then file name so the result does not
/// depend on directory iteration order.
pub fn load_dataset(root: &Path) -> Result<Vec<ImageSample>> {
    if !root.is_dir() {
        return Err(Error::Config(format!(
            "dataset root {} does not exist or is not a directory",
            root.display()
        )));
    }
    let manifest = root.join(MANIFEST_NAME);
    let entries = if manifest.is_file() {
        read_manifest(root, &manifest)?
    } else {
        discover(root)?
    };
    let mut ids = HashSet::new();
    let mut samples = Vec::with_capacity(entries.len());
    for (id, label, path) in entries {
        if !ids.insert(id.clone()) {
            return Err(Error::Dataset(format!("duplicate sample id {id}")));
        }
        let pixels = decode_luminance(&path)?;
        samples.push(ImageSample::new(id, label, pixels)?);
    }
    Ok(samples)
}

fn read_manifest(root: &Path, manifest: &Path) -> Result<Vec<(String, String, PathBuf)>> {
    let mut reader = csv::Reader::from_path(manifest)
        .map_err(|e| Error::Config(format!("cannot read manifest {}: {e}", manifest.display())))?;
    let headers = reader.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["id", "label", "path"] {
        return Err(Error::Config(format!(
            "manifest {} must have header id,label,path",
            manifest.display()
        )));
    }
    let mut out = Vec::new();
    for row in reader.deserialize() {
        let row: ManifestRow = row?;
        out.push((row.id, row.label, root.join(row.path)));
    }
    if out.is_empty() {
        return Err(Error::Dataset("manifest lists no samples".into()));
    }
    Ok(out)
}

fn discover(root: &Path) -> Result<Vec<(String, String, PathBuf)>> {
    let mut classes = BTreeMap::new();
    for entry in std::fs::read_dir(root).map_err(|e| Error::io(root, e))? {
        let entry = entry.map_err(|e| Error::io(root, e))?;
        let path = entry.path();
        if !path.is_dir() {
            continue;
        }
        let label = entry.file_name().to_string_lossy().into_owned();
        let mut files = BTreeSet::new();
        for f in std::fs::read_dir(&path).map_err(|e| Error::io(&path, e))? {
            let f = f.map_err(|e| Error::io(&path, e))?.path();
            let is_image = f
                .extension()
                .and_then(|e| e.to_str())
                .is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()));
            if f.is_file() && is_image {
                files.insert(f);
            }
        }
        if files.is_empty() {
            return Err(Error::Dataset(format!("class {label} has no images")));
        }
        classes.insert(label, files);
    }
    if classes.is_empty() {
        return Err(Error::Dataset(format!(
            "no class directories under {}",
            root.display()
        )));
    }
    let mut out = Vec::new();
    for (label, files) in classes {
        for path in files {
            let name = path.file_name().unwrap_or_default().to_string_lossy();
            out.push((format!("{label}/{name}"), label.clone(), path));
        }
    }
    Ok(out)
}

/// Decodes an image and reduces it to luminance `0.299 R + 0.587 G + 0.114 B` in `[0, 1]`.
pub fn decode_luminance(path: &Path) -> Result<Intensity> {
    let img = image::open(path).map_err(|e| Error::Decode {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let data = if img.color().has_color() {
        img.to_rgb8()
            .pixels()
            .map(|p| {
                let [r, g, b] = p.0;
                let y = 0.299 * f64::from(r) + 0.587 * f64::from(g) + 0.114 * f64::from(b);
                (y / 255.0).clamp(0.0, 1.0)
            })
            .collect()
    } else {
        img.to_luma8()
            .pixels()
            .map(|p| f64::from(p.0[0]) / 255.0)
            .collect()
    };
    Grid::new(h, w, data)
}

/// Uniform-width binning: `floor(v * levels)` clamped to `levels - 1`.
pub fn quantize_intensity(img: &Intensity, levels: u16) -> Result<QuantizedImage> {
    if !(2..=256).contains(&levels) {
        return Err(Error::Parameter(format!(
            "levels must be in [2, 256], got {levels}"
        )));
    }
    let l = f64::from(levels);
    let top = levels - 1;
    let grid = img.map(|v| {
        let b = (v * l).floor();
        if b <= 0.0 {
            0
        } else {
            (b as u16).min(top)
        }
    });
    QuantizedImage::new(levels, grid)
}

pub fn quantize(sample: &ImageSample, levels: u16) -> Result<QuantizedImage> {
    quantize_intensity(sample.pixels(), levels)
}

/// Training-set size for `n` samples: `train_fraction * n` rounded half up.
pub fn train_size(n: usize, train_fraction: f64) -> usize {
    ((train_fraction * n as f64) + 0.5).floor() as usize
}

/// Shuffles sample indices with the seeded generator and cuts the first
/// `train_size` as training. Sample order is canonicalized by id first, so the
/// partition depends only on the id set and the seed.
pub fn permute_split(samples: &[ImageSample], spec: SplitSpec) -> Result<Split> {
    let ids: Vec<&str> = samples.iter().map(ImageSample::id).collect();
    let labels: Vec<&str> = samples.iter().map(ImageSample::label).collect();
    permute_split_labels(&ids, &labels, spec)
}

/// [`permute_split`] over bare id/label columns.
pub fn permute_split_labels<S: AsRef<str>>(
    ids: &[S],
    labels: &[S],
    spec: SplitSpec,
) -> Result<Split> {
    if ids.len() != labels.len() {
        return Err(Error::Dimension {
            expected: ids.len(),
            got: labels.len(),
        });
    }
    if !(spec.train_fraction > 0.0 && spec.train_fraction < 1.0) {
        return Err(Error::Parameter(format!(
            "train fraction must be in (0, 1), got {}",
            spec.train_fraction
        )));
    }
    let classes: BTreeSet<&str> = labels.iter().map(AsRef::as_ref).collect();
    if classes.len() < 2 {
        return Err(Error::Split(format!(
            "need at least 2 classes, found {}",
            classes.len()
        )));
    }
    let n = ids.len();
    let n_train = train_size(n, spec.train_fraction);
    if n_train == 0 || n_train == n {
        return Err(Error::Split(format!(
            "{n} samples at fraction {} leave an empty side",
            spec.train_fraction
        )));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| ids[a].as_ref().cmp(ids[b].as_ref()));
    let mut rng = rng::seeded(spec.seed);
    order.shuffle(&mut rng);

    let test = order.split_off(n_train);
    let train = order;

    let train_classes: BTreeSet<&str> = train.iter().map(|&i| labels[i].as_ref()).collect();
    if let Some(missing) = classes.difference(&train_classes).next() {
        return Err(Error::Split(format!(
            "seed {}: class {missing} absent from training set",
            spec.seed
        )));
    }
    Ok(Split { train, test })
}
