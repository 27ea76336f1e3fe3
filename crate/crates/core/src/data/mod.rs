//! MNIST ingestion and the binary-imbalance / categorical datasets built from it.

pub mod idx;

use std::io::Read;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub const PIXELS: usize = idx::IMAGE_SIDE * idx::IMAGE_SIDE;
pub const DIGITS: usize = 10;
/// Positives taken per binary dataset slice.
pub const SLICE_SIZE: usize = 630;

/// File names and published byte lengths of the four MNIST files.
pub const TRAIN_IMAGES: (&str, u64) = ("train-images-idx3-ubyte", 47_040_016);
pub const TRAIN_LABELS: (&str, u64) = ("train-labels-idx1-ubyte", 60_008);
pub const TEST_IMAGES: (&str, u64) = ("t10k-images-idx3-ubyte", 7_840_016);
pub const TEST_LABELS: (&str, u64) = ("t10k-labels-idx1-ubyte", 10_008);

/// Environment variable naming the directory that holds the MNIST files.
pub const DATA_DIR_ENV: &str = "RWWCE_DATA_DIR";

/// The full MNIST pool with original file order preserved (train file, then test file).
#[derive(Debug, Clone)]
pub struct RawMnist {
    pixels: Arc<Vec<u8>>,
    labels: Vec<u8>,
}

impl RawMnist {
    /// Parses one image file and one label file.
    pub fn from_idx(images: &[u8], labels: &[u8]) -> Result<Self> {
        Self::from_named_idx(images, "images", labels, "labels")
    }

    fn from_named_idx(
        images: &[u8],
        image_name: &str,
        labels: &[u8],
        label_name: &str,
    ) -> Result<Self> {
        let (count, pixels) = idx::parse_images(images, image_name)?;
        let labels = idx::parse_labels(labels, label_name)?;
        if count != labels.len() {
            return Err(Error::Idx {
                source_name: format!("{image_name} / {label_name}"),
                reason: format!("{count} images but {} labels", labels.len()),
            });
        }
        Ok(RawMnist {
            pixels: Arc::new(pixels),
            labels,
        })
    }

    /// Concatenates pools in order.
    pub fn concat(parts: Vec<RawMnist>) -> RawMnist {
        let mut pixels = Vec::with_capacity(parts.iter().map(|p| p.pixels.len()).sum());
        let mut labels = Vec::new();
        for p in parts {
            pixels.extend_from_slice(&p.pixels);
            labels.extend_from_slice(&p.labels);
        }
        RawMnist {
            pixels: Arc::new(pixels),
            labels,
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn image(&self, i: usize) -> &[u8] {
        &self.pixels[i * PIXELS..(i + 1) * PIXELS]
    }

    /// Pixels of image `i` scaled to [0,1].
    pub fn features(&self, i: usize) -> Vec<f64> {
        self.image(i).iter().map(|&p| p as f64 / 255.0).collect()
    }

    pub fn class_counts(&self) -> [usize; DIGITS] {
        let mut counts = [0; DIGITS];
        for &l in &self.labels {
            counts[l as usize] += 1;
        }
        counts
    }
}

/// Directory named by the data-directory environment variable, else `data/mnist`.
pub fn default_data_dir() -> PathBuf {
    std::env::var_os(DATA_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("data/mnist"))
}

/// Paths to the four standard MNIST files.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MnistFiles {
    pub train_images: PathBuf,
    pub train_labels: PathBuf,
    pub test_images: PathBuf,
    pub test_labels: PathBuf,
}

impl MnistFiles {
    pub fn in_dir(dir: impl AsRef<Path>) -> Self {
        let dir = dir.as_ref();
        MnistFiles {
            train_images: dir.join(TRAIN_IMAGES.0),
            train_labels: dir.join(TRAIN_LABELS.0),
            test_images: dir.join(TEST_IMAGES.0),
            test_labels: dir.join(TEST_LABELS.0),
        }
    }

    fn entries(&self) -> [(&Path, u32, u64); 4] {
        [
            (&self.train_images, idx::IMAGE_MAGIC, TRAIN_IMAGES.1),
            (&self.train_labels, idx::LABEL_MAGIC, TRAIN_LABELS.1),
            (&self.test_images, idx::IMAGE_MAGIC, TEST_IMAGES.1),
            (&self.test_labels, idx::LABEL_MAGIC, TEST_LABELS.1),
        ]
    }

    /// Checks that every file exists, starts with the right magic number and
    /// has its published byte length.
    pub fn verify(&self) -> Result<()> {
        for (path, magic, expected) in self.entries() {
            let mut header = Vec::with_capacity(4);
            std::fs::File::open(path)
                .and_then(|f| f.take(4).read_to_end(&mut header))
                .map_err(|e| Error::io(path, e))?;
            idx::check_magic(&header, magic, &path.display().to_string())?;
            let len = std::fs::metadata(path)
                .map_err(|e| Error::io(path, e))?
                .len();
            if len != expected {
                return Err(Error::Idx {
                    source_name: path.display().to_string(),
                    reason: format!("{len} bytes, expected {expected}"),
                });
            }
        }
        Ok(())
    }

    /// Loads train and test files and concatenates them into one 70,000-example pool.
    pub fn load(&self) -> Result<RawMnist> {
        self.verify()?;
        let read = |p: &Path| std::fs::read(p).map_err(|e| Error::io(p, e));
        let name = |p: &Path| p.display().to_string();
        let train = RawMnist::from_named_idx(
            &read(&self.train_images)?,
            &name(&self.train_images),
            &read(&self.train_labels)?,
            &name(&self.train_labels),
        )?;
        let test = RawMnist::from_named_idx(
            &read(&self.test_images)?,
            &name(&self.test_images),
            &read(&self.test_labels)?,
            &name(&self.test_labels),
        )?;
        Ok(RawMnist::concat(vec![train, test]))
    }
}

#[derive(Debug, Clone)]
enum Features {
    /// Rows of an image pool, scaled by 1/255 when materialized.
    Pixels(Arc<Vec<u8>>),
    Dense(Arc<Matrix>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Targets {
    Binary,
    Categorical { classes: usize },
}

/// Examples plus binary labels or class indices.
///
/// Rows index into shared feature storage, so subsets and splits never copy
/// pixels. Feature and target matrices are materialized per batch.
#[derive(Debug, Clone)]
pub struct Dataset {
    features: Features,
    rows: Vec<usize>,
    labels: Vec<u8>,
    targets: Targets,
}

impl Dataset {
    pub fn binary_from_matrix(x: Matrix, labels: Vec<u8>) -> Result<Self> {
        if let Some(bad) = labels.iter().find(|&&l| l > 1) {
            return Err(Error::Input(format!("binary label {bad}")));
        }
        Self::from_matrix(x, labels, Targets::Binary)
    }

    pub fn categorical_from_matrix(x: Matrix, classes: Vec<u8>, k: usize) -> Result<Self> {
        if let Some(bad) = classes.iter().find(|&&c| c as usize >= k) {
            return Err(Error::Input(format!("class {bad} with only {k} classes")));
        }
        Self::from_matrix(x, classes, Targets::Categorical { classes: k })
    }

    fn from_matrix(x: Matrix, labels: Vec<u8>, targets: Targets) -> Result<Self> {
        if x.rows() != labels.len() {
            return Err(Error::Shape(format!(
                "{} feature rows for {} labels",
                x.rows(),
                labels.len()
            )));
        }
        Ok(Dataset {
            rows: (0..x.rows()).collect(),
            features: Features::Dense(Arc::new(x)),
            labels,
            targets,
        })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn is_binary(&self) -> bool {
        self.targets == Targets::Binary
    }

    /// Number of classes of a categorical dataset.
    pub fn classes(&self) -> Option<usize> {
        match self.targets {
            Targets::Binary => None,
            Targets::Categorical { classes } => Some(classes),
        }
    }

    pub fn input_dim(&self) -> usize {
        match &self.features {
            Features::Pixels(_) => PIXELS,
            Features::Dense(m) => m.cols(),
        }
    }

    /// Binary labels, or class indices for categorical data.
    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    /// Positions into the underlying feature storage (into the MNIST pool for MNIST-built sets).
    pub fn source_rows(&self) -> &[usize] {
        &self.rows
    }

    pub fn features_for(&self, batch: &[usize]) -> Matrix {
        let dim = self.input_dim();
        let mut out = Vec::with_capacity(batch.len() * dim);
        for &i in batch {
            let r = self.rows[i];
            match &self.features {
                Features::Pixels(p) => out.extend(
                    p[r * PIXELS..(r + 1) * PIXELS]
                        .iter()
                        .map(|&v| v as f64 / 255.0),
                ),
                Features::Dense(m) => out.extend_from_slice(m.row(r)),
            }
        }
        Matrix::from_vec(batch.len(), dim, out).expect("row lengths are fixed")
    }

    /// M×1 labels for binary data, M×K one-hot rows for categorical data.
    pub fn targets_for(&self, batch: &[usize]) -> Matrix {
        match self.targets {
            Targets::Binary => Matrix::column(
                &batch
                    .iter()
                    .map(|&i| self.labels[i] as f64)
                    .collect::<Vec<_>>(),
            ),
            Targets::Categorical { classes } => {
                let mut y = Matrix::zeros(batch.len(), classes);
                for (row, &i) in batch.iter().enumerate() {
                    y[(row, self.labels[i] as usize)] = 1.0;
                }
                y
            }
        }
    }

    pub fn features(&self) -> Matrix {
        self.features_for(&(0..self.len()).collect::<Vec<_>>())
    }

    pub fn targets(&self) -> Matrix {
        self.targets_for(&(0..self.len()).collect::<Vec<_>>())
    }

    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            features: self.features.clone(),
            rows: indices.iter().map(|&i| self.rows[i]).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            targets: self.targets.clone(),
        }
    }
}

/// Binary dataset for one digit: occurrences `[slice·630, (slice+1)·630)` of the
/// digit (in pool order) are positives, every other digit's example is a negative.
pub fn make_binary_dataset(raw: &RawMnist, digit: u8, slice_index: usize) -> Result<Dataset> {
    if digit as usize >= DIGITS {
        return Err(Error::Config(format!("digit {digit} is not 0-9")));
    }
    let lo = slice_index * SLICE_SIZE;
    let hi = lo + SLICE_SIZE;
    let available = raw.labels.iter().filter(|&&l| l == digit).count();
    if available < hi {
        return Err(Error::Config(format!(
            "digit {digit} has {available} examples, slice {slice_index} needs {hi}"
        )));
    }
    let mut rows = Vec::with_capacity(raw.len() - available + SLICE_SIZE);
    let mut labels = Vec::with_capacity(rows.capacity());
    let mut seen = 0;
    for (i, &l) in raw.labels.iter().enumerate() {
        if l == digit {
            if (lo..hi).contains(&seen) {
                rows.push(i);
                labels.push(1);
            }
            seen += 1;
        } else {
            rows.push(i);
            labels.push(0);
        }
    }
    Ok(Dataset {
        features: Features::Pixels(raw.pixels.clone()),
        rows,
        labels,
        targets: Targets::Binary,
    })
}

/// Every example with its digit as one of ten classes.
pub fn make_categorical_dataset(raw: &RawMnist) -> Dataset {
    Dataset {
        features: Features::Pixels(raw.pixels.clone()),
        rows: (0..raw.len()).collect(),
        labels: raw.labels.clone(),
        targets: Targets::Categorical { classes: DIGITS },
    }
}

#[derive(Debug, Clone)]
pub struct SplitDataset {
    pub train: Dataset,
    pub validation: Dataset,
    pub test: Dataset,
}

/// Smallest dataset [`split`] accepts.
pub const MIN_SPLIT_SIZE: usize = 40;

/// (test, validation, train) sizes: ⌊25%⌋, ⌊7.5%⌋ and the remainder.
pub fn split_sizes(m: usize) -> (usize, usize, usize) {
    let test = m / 4;
    let validation = m * 75 / 1000;
    (test, validation, m - test - validation)
}

/// Seeded shuffle, then contiguous cuts into test, validation and train.
pub fn split(dataset: &Dataset, seed: u64) -> Result<SplitDataset> {
    let m = dataset.len();
    if m < MIN_SPLIT_SIZE {
        return Err(Error::Input(format!(
            "need at least {MIN_SPLIT_SIZE} examples to split, got {m}"
        )));
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (test, validation, _) = split_sizes(m);
    Ok(SplitDataset {
        test: dataset.subset(&order[..test]),
        validation: dataset.subset(&order[test..test + validation]),
        train: dataset.subset(&order[test + validation..]),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Pool of `n` tiny images whose first pixel encodes the index.
    fn synthetic_pool(labels: &[u8]) -> RawMnist {
        let mut pixels = vec![0u8; labels.len() * PIXELS];
        for i in 0..labels.len() {
            pixels[i * PIXELS] = (i % 256) as u8;
        }
        let images = idx::encode_images(labels.len(), &pixels);
        RawMnist::from_idx(&images, &idx::encode_labels(labels)).unwrap()
    }

    #[test]
    fn white_image_loads_as_ones() {
        let images = idx::encode_images(1, &[255; PIXELS]);
        let raw = RawMnist::from_idx(&images, &idx::encode_labels(&[4])).unwrap();
        assert_eq!(raw.len(), 1);
        assert_eq!(raw.features(0), vec![1.0; PIXELS]);
        assert_eq!(raw.labels(), &[4]);
    }

    #[test]
    fn count_mismatch_rejected() {
        let images = idx::encode_images(2, &[0; 2 * PIXELS]);
        assert!(RawMnist::from_idx(&images, &idx::encode_labels(&[1, 2, 3])).is_err());
    }

    #[test]
    fn binary_slices() {
        // 3 digits cycling, 4000 examples: ~1334 of digit 0
        let labels: Vec<u8> = (0..4000).map(|i| (i % 3) as u8).collect();
        let raw = synthetic_pool(&labels);
        let d0 = make_binary_dataset(&raw, 0, 0).unwrap();
        let d1 = make_binary_dataset(&raw, 0, 1).unwrap();
        assert_eq!(d0.labels().iter().filter(|&&l| l == 1).count(), SLICE_SIZE);
        let negatives = labels.iter().filter(|&&l| l != 0).count();
        assert_eq!(d0.len(), SLICE_SIZE + negatives);

        let positives = |d: &Dataset| -> Vec<usize> {
            d.labels()
                .iter()
                .zip(d.source_rows())
                .filter(|(&l, _)| l == 1)
                .map(|(_, &r)| r)
                .collect()
        };
        let (p0, p1) = (positives(&d0), positives(&d1));
        assert!(p0.iter().all(|r| !p1.contains(r)));
        // slice 1 starts at occurrence 630 of digit 0, i.e. pool index 1890
        assert_eq!(p1[0], 630 * 3);
        assert!(make_binary_dataset(&raw, 0, 2).is_err());
        assert!(make_binary_dataset(&raw, 10, 0).is_err());
    }

    #[test]
    fn categorical_targets_are_one_hot() {
        let labels: Vec<u8> = (0..50).map(|i| (i % 10) as u8).collect();
        let raw = synthetic_pool(&labels);
        let d = make_categorical_dataset(&raw);
        assert_eq!(d.len(), 50);
        assert_eq!(d.classes(), Some(10));
        let y = d.targets();
        assert_eq!(y.shape(), (50, 10));
        for (i, row) in y.iter_rows().enumerate() {
            assert_eq!(row.iter().sum::<f64>(), 1.0);
            assert_eq!(row[labels[i] as usize], 1.0);
        }
    }

    #[test]
    fn split_sizes_follow_floor_rule() {
        assert_eq!(split_sizes(63_630), (15_907, 4_772, 42_951));
        assert_eq!(split_sizes(40), (10, 3, 27));
        assert_eq!(split_sizes(70_000), (17_500, 5_250, 47_250));
    }

    #[test]
    fn split_is_disjoint_and_deterministic() {
        let labels: Vec<u8> = (0..200).map(|i| (i % 10) as u8).collect();
        let d = make_categorical_dataset(&synthetic_pool(&labels));
        let a = split(&d, 3).unwrap();
        let b = split(&d, 3).unwrap();
        assert_eq!(a.train.source_rows(), b.train.source_rows());
        let mut all: Vec<usize> = [&a.train, &a.validation, &a.test]
            .iter()
            .flat_map(|s| s.source_rows().to_vec())
            .collect();
        all.sort_unstable();
        assert_eq!(all, (0..200).collect::<Vec<_>>());
        assert_eq!(
            (a.test.len(), a.validation.len(), a.train.len()),
            (50, 15, 135)
        );
        let c = split(&d, 4).unwrap();
        assert_ne!(a.test.source_rows(), c.test.source_rows());
        assert!(split(&d.subset(&(0..39).collect::<Vec<_>>()), 0).is_err());
    }

    #[test]
    fn features_scaled_to_unit_interval() {
        let labels: Vec<u8> = (0..300).map(|i| (i % 10) as u8).collect();
        let d = make_categorical_dataset(&synthetic_pool(&labels));
        let x = d.features_for(&[255, 3]);
        assert_eq!(x[(0, 0)], 1.0);
        assert_eq!(x[(1, 0)], 3.0 / 255.0);
        assert!(x.as_slice().iter().all(|v| (0.0..=1.0).contains(v)));
    }
}
