//! DCT basis functions shared by the adaptive activations and the waveform.
//!
//! The basis is indexed on a grid of `N` points: the integer symbol `k`
//! maps to the argument `x = -1 + 2k/N`, so the phase term `N(x+1)+1`
//! becomes the odd integer `2k+1`. Every activation therefore has two
//! equivalent evaluation routes, one on a real argument and one on an
//! integer index, and both are exposed here.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Sign carried next to a folded index (the BPSK bit of the folded
/// modulation, or the parity of a reflection).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Sign {
    #[default]
    Plus,
    Minus,
}

impl Sign {
    pub fn of(value: f64) -> Sign {
        // sign(0) counts as positive
        if value < 0.0 {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }

    pub fn from_parity(odd: bool) -> Sign {
        if odd {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

impl std::ops::Mul for Sign {
    type Output = Sign;

    fn mul(self, rhs: Sign) -> Sign {
        if self == rhs {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

#[inline]
fn phase(i: usize, x: f64, n: usize) -> f64 {
    let n = n as f64;
    PI / (2.0 * n) * (2 * i - 1) as f64 * (n * (x + 1.0) + 1.0)
}

#[inline]
fn index_phase(i: usize, k: i64, n: usize) -> f64 {
    PI / (2.0 * n as f64) * ((2 * i - 1) as f64) * ((2 * k + 1) as f64)
}

fn check_args(i: usize, x: f64, n: usize) -> Result<()> {
    if i == 0 {
        return Err(Error::InvalidParameter("basis index starts at 1".into()));
    }
    if n < 2 {
        return Err(Error::InvalidParameter(format!("grid size {n} < 2")));
    }
    if !x.is_finite() {
        return Err(Error::NonFinite("basis argument"));
    }
    Ok(())
}

/// `cos((pi/2N)(2i-1)(N(x+1)+1))`.
pub fn dct_basis_cos(i: usize, x: f64, n: usize) -> Result<f64> {
    check_args(i, x, n)?;
    Ok(phase(i, x, n).cos())
}

pub(crate) fn dct_basis_cos_unchecked(i: usize, x: f64, n: usize) -> f64 {
    phase(i, x, n).cos()
}

/// Sine companion of [`dct_basis_cos`]; appears in the activation slope.
pub fn dct_basis_sin(i: usize, x: f64, n: usize) -> Result<f64> {
    check_args(i, x, n)?;
    Ok(phase(i, x, n).sin())
}

/// `sum_q F[q] cos_q(z)`.
///
/// Coefficients are indexed from zero here: `coeffs[0]` multiplies the
/// first basis function.
pub fn activation(coeffs: &[f64], z: f64, n: usize) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .map(|(q, f)| f * phase(q + 1, z, n).cos())
        .sum()
}

/// `sum_q F[q] (2q-1) sin_q(z)`.
///
/// The activation derivative is `-(pi/2)` times this sum.
pub fn activation_slope(coeffs: &[f64], z: f64, n: usize) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .map(|(q, f)| f * (2 * q + 1) as f64 * phase(q + 1, z, n).sin())
        .sum()
}

/// Activation derivative with respect to its real argument.
pub fn activation_derivative(coeffs: &[f64], z: f64, n: usize) -> f64 {
    -0.5 * PI * activation_slope(coeffs, z, n)
}

/// Activation evaluated directly on an integer grid index (exact phase).
pub fn activation_at_index(coeffs: &[f64], k: i64, n: usize) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .map(|(q, f)| f * index_phase(q + 1, k, n).cos())
        .sum()
}

/// [`activation_slope`] on an integer grid index.
pub fn activation_slope_at_index(coeffs: &[f64], k: i64, n: usize) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .map(|(q, f)| f * (2 * q + 1) as f64 * index_phase(q + 1, k, n).sin())
        .sum()
}

/// Grid argument of index `k`: `-1 + 2k/N`.
pub fn argument_of_index(k: i64, n: usize) -> f64 {
    -1.0 + 2.0 * k as f64 / n as f64
}

/// Folds an integer index into `[0, N-1]` using the half-period sign flip
/// of the odd-frequency basis: `sigma(z) = (-1)^floor(z/N) sigma(z mod N)`.
///
/// The modulo is Euclidean, so negative indices fold onto the same
/// residue class the periodic extension uses.
pub fn fold_index(z_bar: i64, n: usize) -> (usize, Sign) {
    let n = n as i64;
    let k = z_bar.rem_euclid(n);
    let turns = z_bar.div_euclid(n);
    (k as usize, Sign::from_parity(turns.rem_euclid(2) == 1))
}

/// Folded evaluation: `sign * sigma(argument_of_index(k))`.
pub fn activation_folded(coeffs: &[f64], k: usize, sign: Sign, n: usize) -> Result<f64> {
    if k >= n {
        return Err(Error::IndexOutOfRange {
            index: k as i64,
            limit: n,
        });
    }
    Ok(sign.value() * activation(coeffs, argument_of_index(k as i64, n), n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    // Straight transcription of the basis definition, kept apart from the
    // shared phase helper.
    fn cos_oracle(i: usize, x: f64, n: usize) -> f64 {
        let n = n as f64;
        ((PI / (2.0 * n)) * (2.0 * i as f64 - 1.0) * (n * (x + 1.0) + 1.0)).cos()
    }

    #[test]
    fn basis_values() {
        assert_abs_diff_eq!(
            dct_basis_cos(1, -1.0, 4).unwrap(),
            0.923_879_532_511_286_7,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(dct_basis_cos(1, -0.25, 4).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            dct_basis_cos(2, -1.0, 8).unwrap(),
            0.831_469_612_302_545_2,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            dct_basis_cos(2, -1.0, 8).unwrap(),
            cos_oracle(2, -1.0, 8),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(dct_basis_sin(1, -0.25, 4).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            dct_basis_sin(1, -1.0, 4).unwrap(),
            0.382_683_432_365_089_8,
            epsilon = 1e-12
        );
    }

    #[test]
    fn basis_rejects_bad_input() {
        assert!(dct_basis_cos(1, f64::NAN, 4).is_err());
        assert!(dct_basis_sin(1, f64::INFINITY, 4).is_err());
        assert!(dct_basis_cos(0, 0.0, 4).is_err());
        assert!(dct_basis_cos(1, 0.0, 1).is_err());
    }

    #[test]
    fn activation_examples() {
        let z = 0.3;
        assert_eq!(activation(&[0.0; 6], z, 16), 0.0);
        assert_abs_diff_eq!(
            activation(&[1.0, 0.0, 0.0], z, 16),
            cos_oracle(1, z, 16),
            epsilon = 1e-15
        );
        let expected = 0.5 * cos_oracle(1, 0.3, 16) - 0.2 * cos_oracle(2, 0.3, 16);
        assert_abs_diff_eq!(activation(&[0.5, -0.2], 0.3, 16), expected, epsilon = 1e-15);
    }

    #[test]
    fn fold_index_examples() {
        assert_eq!(fold_index(8 + 3, 8), (3, Sign::Minus));
        assert_eq!(fold_index(5, 8), (5, Sign::Plus));
        assert_eq!(fold_index(17, 8), (1, Sign::Plus));
        assert_eq!(fold_index(-1, 8), (7, Sign::Minus));
        assert_eq!(fold_index(-8, 8), (0, Sign::Minus));
        assert_eq!(fold_index(-9, 8), (7, Sign::Plus));
    }

    #[test]
    fn folded_rejects_out_of_range() {
        assert!(activation_folded(&[1.0], 8, Sign::Plus, 8).is_err());
    }

    #[test]
    fn odd_symmetry_about_grid_centre() {
        // cos_i(-2/N - x) = -cos_i(x): the basis is odd about the midpoint
        // between grid indices N/2 - 1 and N/2.
        let n = 16;
        for i in 1..=6 {
            for step in 0..200 {
                let x = -3.0 + 0.03 * step as f64;
                let mirrored = -2.0 / n as f64 - x;
                assert_abs_diff_eq!(
                    dct_basis_cos(i, mirrored, n).unwrap(),
                    -dct_basis_cos(i, x, n).unwrap(),
                    epsilon = 1e-12
                );
            }
        }
    }

    #[test]
    fn index_route_matches_argument_route() {
        let coeffs = [0.3, -0.7, 0.2, 0.05];
        for k in -40..40 {
            let x = argument_of_index(k, 16);
            assert_abs_diff_eq!(
                activation_at_index(&coeffs, k, 16),
                activation(&coeffs, x, 16),
                epsilon = 1e-12
            );
            assert_abs_diff_eq!(
                activation_slope_at_index(&coeffs, k, 16),
                activation_slope(&coeffs, x, 16),
                epsilon = 1e-12
            );
        }
    }

    proptest! {
        #[test]
        fn basis_is_bounded_and_pythagorean(i in 1usize..20, x in -50.0f64..50.0, n in 2usize..512) {
            let c = dct_basis_cos(i, x, n).unwrap();
            let s = dct_basis_sin(i, x, n).unwrap();
            prop_assert!(c.abs() <= 1.0 && s.abs() <= 1.0);
            prop_assert!((c * c + s * s - 1.0).abs() < 1e-12);
        }

        #[test]
        fn activation_bounded_by_coefficient_mass(coeffs in proptest::collection::vec(-2.0f64..2.0, 1..8), z in -10.0f64..10.0) {
            let bound: f64 = coeffs.iter().map(|c| c.abs()).sum();
            prop_assert!(activation(&coeffs, z, 32).abs() <= bound + 1e-12);
        }

        #[test]
        fn folding_matches_unfolded_evaluation(
            coeffs in proptest::collection::vec(-1.0f64..1.0, 1..8),
            z_bar in -64i64..64,
        ) {
            let n = 16;
            let (k, sign) = fold_index(z_bar, n);
            let folded = activation_folded(&coeffs, k, sign, n).unwrap();
            let direct = activation(&coeffs, argument_of_index(z_bar, n), n);
            prop_assert!((folded - direct).abs() < 1e-12);
        }
    }
}
