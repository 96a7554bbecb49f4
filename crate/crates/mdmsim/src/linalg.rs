//! Dense inversion for the small (<= 16x16) real matrices this crate
//! meets: Gauss-Jordan with partial pivoting plus one Newton refinement
//! step, and a 1-norm condition number.

use ndarray::Array2;

use crate::error::{Error, Result};

/// Inverse of a small square matrix. Singular (or numerically singular)
/// inputs are rejected.
pub(crate) fn invert(a: &Array2<f64>) -> Result<Array2<f64>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::NotSquare {
            rows: n,
            cols: a.ncols(),
        });
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("matrix to invert".into()));
    }
    // Augmented [A | I], reduced in place.
    let mut m = vec![vec![0.0f64; 2 * n]; n];
    for i in 0..n {
        for j in 0..n {
            m[i][j] = a[[i, j]];
        }
        m[i][n + i] = 1.0;
    }
    let scale = a.iter().fold(0.0f64, |acc, v| acc.max(v.abs())).max(1.0);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&r, &s| m[r][col].abs().partial_cmp(&m[s][col].abs()).unwrap())
            .unwrap();
        if m[pivot][col].abs() <= f64::EPSILON * scale * n as f64 {
            return Err(Error::Singular);
        }
        m.swap(col, pivot);
        let p = m[col][col];
        for v in &mut m[col] {
            *v /= p;
        }
        for row in 0..n {
            if row == col {
                continue;
            }
            let f = m[row][col];
            if f == 0.0 {
                continue;
            }
            for k in 0..2 * n {
                m[row][k] -= f * m[col][k];
            }
        }
    }
    let mut inv = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            inv[[i, j]] = m[i][n + j];
        }
    }
    // One Newton step X <- X (2I - A X) sharpens the last bits.
    let ax = a.dot(&inv);
    let mut two_i_minus = -ax;
    for i in 0..n {
        two_i_minus[[i, i]] += 2.0;
    }
    Ok(inv.dot(&two_i_minus))
}

/// 1-norm condition number ||A||_1 * ||A^-1||_1.
pub(crate) fn condition_1norm(a: &Array2<f64>, inv: &Array2<f64>) -> f64 {
    norm_1(a) * norm_1(inv)
}

fn norm_1(a: &Array2<f64>) -> f64 {
    (0..a.ncols())
        .map(|j| a.column(j).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::{Rng, SeedableRng};

    #[test]
    fn inverts_known_2x2() {
        let a = array![[4.0, 7.0], [2.0, 6.0]];
        let inv = invert(&a).unwrap();
        let expected = array![[0.6, -0.7], [-0.2, 0.4]];
        for (x, y) in inv.iter().zip(expected.iter()) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn inverse_times_original_is_identity() {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(11);
        for n in [2usize, 3, 4, 8] {
            let a = Array2::from_shape_fn((n, n), |_| rng.gen_range(-1.0..1.0));
            let inv = match invert(&a) {
                Ok(inv) => inv,
                Err(Error::Singular) => continue,
                Err(e) => panic!("{e}"),
            };
            let prod = a.dot(&inv);
            for i in 0..n {
                for j in 0..n {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!(
                        (prod[[i, j]] - want).abs() < 1e-12,
                        "n={n} ({i},{j}): {}",
                        prod[[i, j]]
                    );
                }
            }
        }
    }

    #[test]
    fn rejects_singular() {
        let a = array![[1.0, 2.0], [2.0, 4.0]];
        assert!(matches!(invert(&a), Err(Error::Singular)));
    }

    #[test]
    fn condition_of_identity_is_one() {
        let id: Array2<f64> = Array2::eye(5);
        let inv = invert(&id).unwrap();
        assert!((condition_1norm(&id, &inv) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn condition_grows_with_diagonal_spread() {
        let a = array![[1.0, 0.0], [0.0, 1e-6]];
        let inv = invert(&a).unwrap();
        let cond = condition_1norm(&a, &inv);
        assert!((cond - 1e6).abs() < 1.0, "cond = {cond}");
    }
}
