//! Built-in desk-scale datasets.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::seed;

#[derive(Debug, Clone, PartialEq)]
pub enum Targets {
    Classes { labels: Vec<usize>, classes: usize },
    Values { values: Vec<f64>, dim: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Target<'a> {
    Class(usize),
    Value(&'a [f64]),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<f64>,
    dim: usize,
    targets: Targets,
}

impl Dataset {
    pub fn new(features: Vec<f64>, dim: usize, targets: Targets) -> Result<Self> {
        ensure!(dim >= 1, "feature dimension must be at least 1");
        ensure!(features.len().is_multiple_of(dim), "feature buffer is not a multiple of dim {dim}");
        let n = features.len() / dim;
        ensure!(n >= 1, "dataset is empty");
        match &targets {
            Targets::Classes { labels, classes } => {
                ensure!(labels.len() == n, "{} labels for {n} samples", labels.len());
                ensure!(*classes >= 2, "classification needs at least 2 classes");
                ensure!(labels.iter().all(|&l| l < *classes), "label out of range");
            }
            Targets::Values { values, dim } => {
                ensure!(*dim >= 1 && values.len() == n * dim, "{} target values for {n} samples", values.len());
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Data("non-finite regression target".into()));
                }
            }
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data("non-finite feature".into()));
        }
        Ok(Self { features, dim, targets })
    }

    pub fn len(&self) -> usize {
        self.features.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn input_dim(&self) -> usize {
        self.dim
    }

    /// Width of the network output this dataset needs.
    pub fn output_dim(&self) -> usize {
        match &self.targets {
            Targets::Classes { classes, .. } => *classes,
            Targets::Values { dim, .. } => *dim,
        }
    }

    pub fn is_classification(&self) -> bool {
        matches!(self.targets, Targets::Classes { .. })
    }

    pub fn features(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    pub fn target(&self, i: usize) -> Target<'_> {
        match &self.targets {
            Targets::Classes { labels, .. } => Target::Class(labels[i]),
            Targets::Values { values, dim } => Target::Value(&values[i * dim..(i + 1) * dim]),
        }
    }

    pub fn targets(&self) -> &Targets {
        &self.targets
    }

    pub fn labels(&self) -> Option<&[usize]> {
        match &self.targets {
            Targets::Classes { labels, .. } => Some(labels),
            Targets::Values { .. } => None,
        }
    }

    /// Copy with class labels permuted uniformly at random; the label
    /// multiset is unchanged.
    pub fn with_shuffled_labels(&self, seed: u64) -> Result<Self> {
        let Targets::Classes { labels, classes } = &self.targets else {
            return Err(Error::InvalidArgument("label shuffling needs a classification dataset".into()));
        };
        let mut labels = labels.clone();
        labels.shuffle(&mut seed::rng(seed));
        Ok(Self { targets: Targets::Classes { labels, classes: *classes }, ..self.clone() })
    }

    /// Copy where each label is, with probability `fraction`, replaced by a
    /// different class drawn uniformly.
    pub fn with_label_noise(&self, fraction: f64, seed: u64) -> Result<Self> {
        ensure!((0.0..=1.0).contains(&fraction), "label-noise fraction must be in [0, 1]");
        let Targets::Classes { labels, classes } = &self.targets else {
            return Err(Error::InvalidArgument("label noise needs a classification dataset".into()));
        };
        let mut rng = seed::rng(seed);
        let labels = labels
            .iter()
            .map(|&l| {
                if rng.random::<f64>() < fraction {
                    (l + rng.random_range(1..*classes)) % classes
                } else {
                    l
                }
            })
            .collect();
        Ok(Self { targets: Targets::Classes { labels, classes: *classes }, ..self.clone() })
    }

    /// Rows `range` as a new dataset.
    fn slice(&self, range: std::ops::Range<usize>) -> Self {
        let features = self.features[range.start * self.dim..range.end * self.dim].to_vec();
        let targets = match &self.targets {
            Targets::Classes { labels, classes } => {
                Targets::Classes { labels: labels[range].to_vec(), classes: *classes }
            }
            Targets::Values { values, dim } => {
                Targets::Values { values: values[range.start * dim..range.end * dim].to_vec(), dim: *dim }
            }
        };
        Self { features, dim: self.dim, targets }
    }
}

/// Which built-in generator to use.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DatasetSpec {
    TwoMoons { noise: f64 },
    Blobs { classes: usize, dim: usize, spread: f64 },
    Regression { noise: f64 },
    Xor,
}

impl DatasetSpec {
    pub fn name(&self) -> &'static str {
        match self {
            DatasetSpec::TwoMoons { .. } => "two-moons",
            DatasetSpec::Blobs { .. } => "blobs",
            DatasetSpec::Regression { .. } => "regression",
            DatasetSpec::Xor => "xor",
        }
    }

    pub fn generate(&self, n: usize, seed: u64) -> Result<Dataset> {
        match *self {
            DatasetSpec::TwoMoons { noise } => two_moons(n, noise, seed),
            DatasetSpec::Blobs { classes, dim, spread } => gaussian_blobs(n, classes, dim, spread, seed),
            DatasetSpec::Regression { noise } => regression_surface(n, noise, seed),
            DatasetSpec::Xor => Ok(xor()),
        }
    }
}

/// Train set of `n_train` points and a held-out split of the same size, drawn
/// from one generated sample of `2 · n_train`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainTest {
    pub train: Dataset,
    pub test: Dataset,
}

impl TrainTest {
    pub fn generate(spec: &DatasetSpec, n_train: usize, seed: u64) -> Result<Self> {
        ensure!(n_train >= 1, "training set must be nonempty");
        let all = spec.generate(2 * n_train, seed)?;
        let n = all.len();
        if n < 2 * n_train {
            // fixed-size generators (xor) evaluate on the training points
            return Ok(Self { train: all.clone(), test: all });
        }
        Ok(Self { train: all.slice(0..n_train), test: all.slice(n_train..n) })
    }
}

fn normal(rng: &mut impl Rng, sd: f64) -> f64 {
    if sd == 0.0 {
        return 0.0;
    }
    Normal::new(0.0, sd).expect("finite positive sd").sample(rng)
}

/// Two interleaving half circles with Gaussian noise; classes alternate.
pub fn two_moons(n: usize, noise: f64, seed: u64) -> Result<Dataset> {
    ensure!(n >= 2, "two-moons needs at least 2 points");
    ensure!(noise >= 0.0 && noise.is_finite(), "noise must be nonnegative");
    let mut rng = seed::rng(seed);
    let mut features = Vec::with_capacity(2 * n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let class = i % 2;
        let t = std::f64::consts::PI * rng.random::<f64>();
        let (x, y) = if class == 0 { (t.cos(), t.sin()) } else { (1.0 - t.cos(), 0.5 - t.sin()) };
        features.push(x + normal(&mut rng, noise));
        features.push(y + normal(&mut rng, noise));
        labels.push(class);
    }
    Dataset::new(features, 2, Targets::Classes { labels, classes: 2 })
}

/// Isotropic Gaussian clusters with centers on a scaled simplex-like layout.
pub fn gaussian_blobs(n: usize, classes: usize, dim: usize, spread: f64, seed: u64) -> Result<Dataset> {
    ensure!(classes >= 2 && dim >= 1 && n >= classes, "invalid blob parameters");
    ensure!(spread >= 0.0 && spread.is_finite(), "spread must be nonnegative");
    let mut rng = seed::rng(seed);
    let centers: Vec<Vec<f64>> = (0..classes)
        .map(|c| (0..dim).map(|d| if d == c % dim { 2.0 * (1 + c / dim) as f64 } else { 0.0 }).collect())
        .collect();
    let mut features = Vec::with_capacity(n * dim);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let class = i % classes;
        for &c in &centers[class] {
            features.push(c + normal(&mut rng, spread));
        }
        labels.push(class);
    }
    Dataset::new(features, dim, Targets::Classes { labels, classes })
}

/// `y = sin(2 x₁) · cos(x₂) + noise` on `[-1, 1]²`.
pub fn regression_surface(n: usize, noise: f64, seed: u64) -> Result<Dataset> {
    ensure!(n >= 1, "regression surface needs at least 1 point");
    ensure!(noise >= 0.0 && noise.is_finite(), "noise must be nonnegative");
    let mut rng = seed::rng(seed);
    let mut features = Vec::with_capacity(2 * n);
    let mut values = Vec::with_capacity(n);
    for _ in 0..n {
        let a: f64 = rng.random_range(-1.0..1.0);
        let b: f64 = rng.random_range(-1.0..1.0);
        features.push(a);
        features.push(b);
        values.push((2.0 * a).sin() * b.cos() + normal(&mut rng, noise));
    }
    Dataset::new(features, 2, Targets::Values { values, dim: 1 })
}

/// The four XOR points.
pub fn xor() -> Dataset {
    Dataset::new(
        vec![0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 1.0, 1.0],
        2,
        Targets::Classes { labels: vec![0, 1, 1, 0], classes: 2 },
    )
    .expect("static dataset is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted(v: &[usize]) -> Vec<usize> {
        let mut v = v.to_vec();
        v.sort_unstable();
        v
    }

    #[test]
    fn shuffled_labels_keep_multiset() {
        let d = gaussian_blobs(60, 2, 2, 0.5, 1).unwrap();
        let s = d.with_shuffled_labels(9).unwrap();
        assert_eq!(sorted(d.labels().unwrap()), sorted(s.labels().unwrap()));
        assert_ne!(d.labels(), s.labels());
        assert_eq!(d.features(3), s.features(3));
    }

    #[test]
    fn label_noise_changes_some_labels() {
        let d = two_moons(200, 0.1, 0).unwrap();
        let noisy = d.with_label_noise(0.5, 1).unwrap();
        let changed = d.labels().unwrap().iter().zip(noisy.labels().unwrap()).filter(|(a, b)| a != b).count();
        assert!(changed > 50 && changed < 150, "{changed}");
        assert_eq!(d.with_label_noise(0.0, 1).unwrap(), d);
    }

    #[test]
    fn generators_are_deterministic() {
        assert_eq!(two_moons(50, 0.1, 3).unwrap(), two_moons(50, 0.1, 3).unwrap());
        assert_ne!(two_moons(50, 0.1, 3).unwrap(), two_moons(50, 0.1, 4).unwrap());
        let r = regression_surface(10, 0.0, 1).unwrap();
        assert!(!r.is_classification());
        assert_eq!(r.output_dim(), 1);
    }

    #[test]
    fn train_test_split_sizes() {
        let tt = TrainTest::generate(&DatasetSpec::TwoMoons { noise: 0.1 }, 100, 0).unwrap();
        assert_eq!(tt.train.len(), 100);
        assert_eq!(tt.test.len(), 100);
        let x = TrainTest::generate(&DatasetSpec::Xor, 4, 0).unwrap();
        assert_eq!(x.train.len(), 4);
    }

    #[test]
    fn validation() {
        assert!(Dataset::new(vec![0.0; 4], 2, Targets::Classes { labels: vec![0], classes: 2 }).is_err());
        assert!(Dataset::new(vec![0.0; 2], 2, Targets::Classes { labels: vec![3], classes: 2 }).is_err());
        assert!(Dataset::new(vec![f64::NAN, 0.0], 2, Targets::Classes { labels: vec![0], classes: 2 }).is_err());
        assert!(regression_surface(5, 0.0, 0).unwrap().with_shuffled_labels(0).is_err());
    }
}
