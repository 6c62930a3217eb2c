//! Synthetic binary maps on `[-1, 1]^2`.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Inner and outer radius of the `rings` annulus.
pub const RING_RADII: (f64, f64) = (0.4, 0.8);

/// A named ground-truth map from a 2-D point to a `+-1` label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Labeler {
    /// `sign(x1)`.
    HalfPlane,
    /// `+1` inside the annulus `0.4 <= r <= 0.8`, `-1` elsewhere.
    Rings,
    /// `sign(x1 * x2)`.
    Checker2x2,
}

impl Labeler {
    pub const ALL: [Labeler; 3] = [Labeler::HalfPlane, Labeler::Rings, Labeler::Checker2x2];

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "halfplane" => Ok(Labeler::HalfPlane),
            "rings" => Ok(Labeler::Rings),
            "checker2x2" => Ok(Labeler::Checker2x2),
            other => Err(Error::UnknownLabeler(other.to_string())),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Labeler::HalfPlane => "halfplane",
            Labeler::Rings => "rings",
            Labeler::Checker2x2 => "checker2x2",
        }
    }

    pub fn label(self, x1: f64, x2: f64) -> f64 {
        let positive = match self {
            Labeler::HalfPlane => x1 >= 0.0,
            Labeler::Rings => {
                let r = x1.hypot(x2);
                (RING_RADII.0..=RING_RADII.1).contains(&r)
            }
            Labeler::Checker2x2 => x1 * x2 >= 0.0,
        };
        if positive {
            1.0
        } else {
            -1.0
        }
    }

    /// Exact share of the square labelled `+1`.
    pub fn positive_fraction(self) -> f64 {
        match self {
            Labeler::HalfPlane | Labeler::Checker2x2 => 0.5,
            Labeler::Rings => {
                let (r0, r1) = RING_RADII;
                std::f64::consts::PI * (r1 * r1 - r0 * r0) / 4.0
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSpec {
    pub labeler: Labeler,
    pub n_train: usize,
    pub n_test: usize,
    pub seed: u64,
}

impl Default for DatasetSpec {
    fn default() -> Self {
        DatasetSpec {
            labeler: Labeler::Rings,
            n_train: 200_000,
            n_test: 20_000,
            seed: 1,
        }
    }
}

/// Row-major inputs with one `+-1` label per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub inputs: Array2<f64>,
    pub labels: Vec<f64>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn input(&self, i: usize) -> &[f64] {
        self.inputs.row(i).to_slice().expect("row-major dataset")
    }

    /// `n` i.i.d. points uniform on the square.
    pub fn sample<R: Rng + ?Sized>(labeler: Labeler, n: usize, rng: &mut R) -> Self {
        let mut inputs = Array2::zeros((n, 2));
        let mut labels = Vec::with_capacity(n);
        for i in 0..n {
            let x1 = rng.random_range(-1.0..=1.0);
            let x2 = rng.random_range(-1.0..=1.0);
            inputs[[i, 0]] = x1;
            inputs[[i, 1]] = x2;
            labels.push(labeler.label(x1, x2));
        }
        Dataset { inputs, labels }
    }
}

/// Train and test sets drawn from independent streams of the same seed.
pub fn make_map_dataset(spec: &DatasetSpec) -> (Dataset, Dataset) {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let train = Dataset::sample(spec.labeler, spec.n_train, &mut rng);
    let test = Dataset::sample(spec.labeler, spec.n_test, &mut rng);
    (train, test)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_labeler_is_rejected() {
        assert!(matches!(
            Labeler::from_name("face"),
            Err(Error::UnknownLabeler(_))
        ));
        for l in Labeler::ALL {
            assert_eq!(Labeler::from_name(l.name()).unwrap(), l);
        }
    }

    #[test]
    fn class_fractions_match_geometry() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for labeler in Labeler::ALL {
            let n = 200_000;
            let data = Dataset::sample(labeler, n, &mut rng);
            let p = labeler.positive_fraction();
            let measured = data.labels.iter().filter(|&&y| y > 0.0).count() as f64 / n as f64;
            let sigma = (p * (1.0 - p) / n as f64).sqrt();
            assert!(
                (measured - p).abs() < 4.0 * sigma,
                "{labeler:?}: {measured} vs {p}"
            );
        }
        assert!((Labeler::Rings.positive_fraction() - 0.376_991_118_430_775).abs() < 1e-12);
    }

    #[test]
    fn inputs_stay_in_square_and_seed_is_reproducible() {
        let spec = DatasetSpec {
            n_train: 1000,
            n_test: 100,
            ..Default::default()
        };
        let (a, _) = make_map_dataset(&spec);
        let (b, _) = make_map_dataset(&spec);
        assert_eq!(a, b);
        assert!(a.inputs.iter().all(|v| (-1.0..=1.0).contains(v)));
        let other = make_map_dataset(&DatasetSpec { seed: 2, ..spec }).0;
        assert_ne!(a, other);
    }
}
