//! Dense self-adjoint spectral routines on complex matrices, with an
//! iterative Lanczos path for norms of large matrices.

use crate::{Error, Result};
use nalgebra::{Complex, DMatrix, DVector};

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;

/// Dimension cap for dense eigendecomposition.
pub const DENSE_DIM_CAP: usize = 4000;
/// Above this dimension, op_norm switches to the Lanczos path.
pub const NORM_ITERATIVE_THRESHOLD: usize = 512;

pub fn hermitian_deviation(m: &CMat) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            let d = (m[(i, j)] - m[(j, i)].conj()).norm();
            if d > worst {
                worst = d;
            }
        }
    }
    worst
}

fn check_self_adjoint(m: &CMat, tol: f64) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} is not square",
            m.nrows(),
            m.ncols()
        )));
    }
    let scale = m.iter().map(|c| c.norm()).fold(1.0f64, f64::max);
    let dev = hermitian_deviation(m);
    if dev > tol * scale {
        return Err(Error::NotSelfAdjoint(format!(
            "hermitian deviation {dev:.3e} exceeds {tol:.1e} * scale"
        )));
    }
    Ok(())
}

/// All eigenvalues of a self-adjoint matrix (dense path).
pub fn spectrum(m: &CMat) -> Result<Vec<f64>> {
    check_self_adjoint(m, 1e-10)?;
    if m.nrows() > DENSE_DIM_CAP {
        return Err(Error::SizeCap(format!(
            "dense eigensolver capped at {DENSE_DIM_CAP}, got {}",
            m.nrows()
        )));
    }
    let eig = m.clone().symmetric_eigen();
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(vals)
}

#[derive(Clone, Copy, Debug)]
pub struct OpNorm {
    pub value: f64,
    pub iterative: bool,
}

/// Largest absolute eigenvalue of a self-adjoint matrix. Dense through
/// NORM_ITERATIVE_THRESHOLD, Lanczos with full reorthogonalization beyond
/// (the iterative flag is set on that path).
pub fn op_norm_detailed(m: &CMat) -> Result<OpNorm> {
    check_self_adjoint(m, 1e-10)?;
    let n = m.nrows();
    if n == 0 {
        return Ok(OpNorm {
            value: 0.0,
            iterative: false,
        });
    }
    if n <= NORM_ITERATIVE_THRESHOLD {
        let vals = spectrum(m)?;
        let value = vals
            .iter()
            .fold(0.0f64, |acc, &v| acc.max(v.abs()));
        return Ok(OpNorm {
            value,
            iterative: false,
        });
    }
    Ok(OpNorm {
        value: lanczos_extreme(m, 160, 1e-10),
        iterative: true,
    })
}

pub fn op_norm(m: &CMat) -> Result<f64> {
    Ok(op_norm_detailed(m)?.value)
}

/// Normalized trace of h applied to a self-adjoint matrix: the average of h
/// over the spectrum.
pub fn trace_stat<F: Fn(f64) -> f64>(h: F, m: &CMat) -> Result<f64> {
    let vals = spectrum(m)?;
    Ok(vals.iter().map(|&x| h(x)).sum::<f64>() / vals.len() as f64)
}

/// Largest |eigenvalue| by Lanczos with full reorthogonalization and a
/// deterministic start vector.
pub fn lanczos_extreme(m: &CMat, max_iter: usize, tol: f64) -> f64 {
    let n = m.nrows();
    let steps = max_iter.min(n);
    // deterministic pseudo-random start
    let mut seed = 0x9e3779b97f4a7c15u64 ^ (n as u64);
    let mut next = || {
        seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let z = seed >> 11;
        z as f64 / (1u64 << 53) as f64 - 0.5
    };
    let mut v = DVector::<C64>::from_fn(n, |_, _| C64::new(next(), next()));
    let norm = v.norm();
    v /= C64::new(norm, 0.0);
    let mut basis: Vec<DVector<C64>> = vec![v.clone()];
    let mut alphas: Vec<f64> = vec![];
    let mut betas: Vec<f64> = vec![];
    let mut prev_extreme = f64::NAN;
    for it in 0..steps {
        let mut w = m * basis.last().unwrap();
        let alpha = basis
            .last()
            .unwrap()
            .dotc(&w)
            .re;
        alphas.push(alpha);
        // full reorthogonalization, twice for stability
        for _ in 0..2 {
            for b in &basis {
                let c = b.dotc(&w);
                w -= b * c;
            }
        }
        let beta = w.norm();
        // converged Krylov space
        if beta < 1e-14 {
            break;
        }
        let extreme = tridiag_extreme(&alphas, &betas);
        if it > 8 && (extreme - prev_extreme).abs() < tol * extreme.abs().max(1.0) {
            return extreme;
        }
        prev_extreme = extreme;
        betas.push(beta);
        w /= C64::new(beta, 0.0);
        basis.push(w);
    }
    tridiag_extreme(&alphas, &betas)
}

/// Largest |eigenvalue| of the symmetric tridiagonal matrix with the given
/// diagonal and off-diagonal, via bisection on the Sturm sequence.
fn tridiag_extreme(alphas: &[f64], betas: &[f64]) -> f64 {
    let k = alphas.len();
    if k == 0 {
        return 0.0;
    }
    // Gershgorin bounds
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..k {
        let r = if i > 0 { betas[i - 1].abs() } else { 0.0 }
            + if i < betas.len() { betas[i].abs() } else { 0.0 };
        lo = lo.min(alphas[i] - r);
        hi = hi.max(alphas[i] + r);
    }
    let count_below = |x: f64| -> usize {
        // Sturm: number of eigenvalues < x
        let mut count = 0;
        let mut d = 1.0f64;
        for i in 0..k {
            let b2 = if i > 0 { betas[i - 1] * betas[i - 1] } else { 0.0 };
            d = alphas[i] - x - b2 / d;
            if d == 0.0 {
                d = 1e-300;
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    };
    let bisect = |target: usize| -> f64 {
        let (mut a, mut b) = (lo - 1.0, hi + 1.0);
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if count_below(mid) > target {
                b = mid;
            } else {
                a = mid;
            }
            if b - a < 1e-13 * (1.0 + b.abs()) {
                break;
            }
        }
        0.5 * (a + b)
    };
    let smallest = bisect(0);
    let largest = bisect(k - 1);
    largest.abs().max(smallest.abs())
}

/// Kronecker product a ⊗ b.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(values: &[f64]) -> CMat {
        let n = values.len();
        CMat::from_fn(n, n, |i, j| {
            if i == j {
                C64::new(values[i], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    #[test]
    fn norm_of_diagonal() {
        let m = diag(&[1.0, -3.5, 2.0]);
        assert!((op_norm(&m).unwrap() - 3.5).abs() < 1e-12);
    }

    #[test]
    fn trace_stat_square() {
        let m = diag(&[1.0, 2.0, 3.0]);
        let v = trace_stat(|x| x * x, &m).unwrap();
        assert!((v - 14.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut m = diag(&[1.0, 1.0]);
        m[(0, 1)] = C64::new(0.5, 0.0);
        assert!(matches!(op_norm(&m), Err(Error::NotSelfAdjoint(_))));
    }

    #[test]
    fn lanczos_matches_dense() {
        // hermitian test matrix with known structure
        let n = 60;
        let mut m = CMat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new((i as f64 / n as f64) - 0.3, 0.0);
            if i + 1 < n {
                m[(i, i + 1)] = C64::new(0.4, 0.2);
                m[(i + 1, i)] = C64::new(0.4, -0.2);
            }
        }
        let dense = op_norm(&m).unwrap();
        let fast = lanczos_extreme(&m, 120, 1e-12);
        assert!((dense - fast).abs() < 1e-8, "dense {dense} vs lanczos {fast}");
    }
}
