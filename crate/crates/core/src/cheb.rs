//! Chebyshev bases, floating expansions on [-K, K], uniform norms, and the
//! two polynomial inequalities (Bernstein and extrapolation) the exact
//! pipeline leans on.

use crate::poly::Poly;
use crate::rat::Rat;
use crate::{Error, Result};
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChebKind {
    First,
    Second,
}

/// Exact coefficients of T_j or U_j via the three-term recurrence.
pub fn cheb_poly(kind: ChebKind, j: usize) -> Poly {
    let mut prev = Poly::one();
    let mut cur = match kind {
        ChebKind::First => Poly::x(),
        ChebKind::Second => Poly::from_i64(&[0, 2]),
    };
    if j == 0 {
        return prev;
    }
    let two_x = Poly::from_i64(&[0, 2]);
    for _ in 1..j {
        let next = two_x.mul(&cur).sub(&prev);
        prev = cur;
        cur = next;
    }
    cur
}

/// Truncated Chebyshev expansion of a function on [-K, K] in the basis
/// T_j(x/K). Coefficients are stored densely; dropped coefficients are zeroed
/// and their mass goes into `truncation_error` together with an aliasing
/// estimate from the top half of the computed spectrum.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChebSeries {
    pub radius: f64,
    pub coeffs: Vec<f64>,
    pub truncation_error: f64,
}

impl ChebSeries {
    /// Clenshaw evaluation.
    pub fn eval(&self, x: f64) -> f64 {
        let t = (x / self.radius).clamp(-1.0, 1.0);
        let mut b1 = 0.0f64;
        let mut b2 = 0.0f64;
        for &a in self.coeffs.iter().skip(1).rev() {
            let b0 = 2.0 * t * b1 - b2 + a;
            b2 = b1;
            b1 = b0;
        }
        let a0 = self.coeffs.first().copied().unwrap_or(0.0);
        t * b1 - b2 + a0
    }

    pub fn max_retained(&self) -> usize {
        self.coeffs
            .iter()
            .rposition(|&a| a != 0.0)
            .unwrap_or(0)
    }

    /// Exact Chebyshev coefficients of a polynomial on [-K, K] with rational
    /// radius; no truncation error.
    pub fn from_poly_exact(h: &Poly, radius: &Rat) -> ChebSeries {
        let coeffs = cheb_coeffs_exact(h, radius);
        ChebSeries {
            radius: crate::rat::rat_to_f64(radius),
            coeffs: coeffs.iter().map(crate::rat::rat_to_f64).collect(),
            truncation_error: 0.0,
        }
    }
}

/// Exact change of basis: coefficients a_j with h(x) = sum a_j T_j(x/K).
pub fn cheb_coeffs_exact(h: &Poly, radius: &Rat) -> Vec<Rat> {
    if h.is_zero() {
        return vec![];
    }
    // Work on g(t) = h(K t), expand in T_j(t) by repeated leading-term removal.
    let mut g = h.compose_scaled_arg(radius);
    let mut out = vec![Rat::zero(); g.degree() + 1];
    while !g.is_zero() {
        let d = g.degree();
        let t = cheb_poly(ChebKind::First, d);
        let lead = g.coeff(d) / t.coeff(d);
        out[d] = lead.clone();
        g = g.sub(&t.scale(&lead));
        if !g.is_zero() && g.degree() >= d && d > 0 {
            // degree must strictly decrease
            unreachable!("chebyshev reduction failed to reduce degree");
        }
        if d == 0 {
            break;
        }
    }
    out
}

/// Chebyshev-node quadrature expansion of `f` on [-K, K].
///
/// `nodes` must be a power of two >= 64. Coefficients below `tol` are
/// dropped into the reported truncation error.
pub fn cheb_expand<F: Fn(f64) -> f64>(
    f: F,
    radius: f64,
    nodes: usize,
    tol: f64,
) -> Result<ChebSeries> {
    if nodes < 64 || !nodes.is_power_of_two() {
        return Err(Error::Domain(format!(
            "nodes must be a power of two >= 64, got {nodes}"
        )));
    }
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::Domain(format!("bad radius {radius}")));
    }
    let n = nodes;
    let mut values = Vec::with_capacity(n);
    for k in 0..n {
        let theta = (k as f64 + 0.5) * std::f64::consts::PI / n as f64;
        let v = f(radius * theta.cos());
        if !v.is_finite() {
            return Err(Error::Evaluation(format!(
                "non-finite function value at x = {}",
                radius * theta.cos()
            )));
        }
        values.push(v);
    }
    let mut coeffs = vec![0.0f64; n];
    for (j, c) in coeffs.iter_mut().enumerate() {
        let mut acc = 0.0f64;
        for (k, v) in values.iter().enumerate() {
            let theta = (k as f64 + 0.5) * std::f64::consts::PI / n as f64;
            acc += v * (j as f64 * theta).cos();
        }
        *c = acc * 2.0 / n as f64;
    }
    coeffs[0] *= 0.5;
    // Top half of the spectrum is aliasing-contaminated; treat it as a
    // quadrature residual estimate and never retain it.
    let alias: f64 = coeffs[n / 2..].iter().map(|a| a.abs()).sum();
    let mut dropped = 0.0f64;
    let mut retained = vec![0.0f64; n / 2];
    for j in 0..n / 2 {
        if coeffs[j].abs() >= tol {
            retained[j] = coeffs[j];
        } else {
            dropped += coeffs[j].abs();
        }
    }
    while retained.last() == Some(&0.0) && retained.len() > 1 {
        retained.pop();
    }
    Ok(ChebSeries {
        radius,
        coeffs: retained,
        truncation_error: dropped + alias,
    })
}

/// Uniform norm of |h| over [a, b] via a dense Chebyshev grid plus
/// golden-section refinement around the best candidates.
pub fn sup_norm(h: &Poly, a: f64, b: f64) -> Result<f64> {
    if a > b {
        return Err(Error::Domain(format!("empty interval [{a}, {b}]")));
    }
    if a == b {
        return Ok(h.eval_f64(a).abs());
    }
    let q = h.degree();
    let n = 8 * q + 64;
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let g = |x: f64| h.eval_f64(x).abs();
    let mut best = g(a).max(g(b));
    let mut best_idx = 0usize;
    let mut grid = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let theta = k as f64 * std::f64::consts::PI / n as f64;
        let x = mid + half * theta.cos();
        let v = g(x);
        grid.push((x, v));
        if v > best {
            best = v;
            best_idx = grid.len() - 1;
        }
    }
    // refine around the best grid node
    let lo = if best_idx + 1 < grid.len() {
        grid[best_idx + 1].0
    } else {
        a
    };
    let hi = if best_idx > 0 { grid[best_idx - 1].0 } else { b };
    best = best.max(golden_max(&g, lo.min(hi), lo.max(hi), 1e-12));
    Ok(best)
}

fn golden_max<F: Fn(f64) -> f64>(g: &F, mut a: f64, mut b: f64, rel_tol: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = g(c);
    let mut fd = g(d);
    let scale = (a.abs() + b.abs()).max(1.0);
    for _ in 0..200 {
        if (b - a).abs() < rel_tol * scale {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = g(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = g(d);
        }
    }
    fc.max(fd)
}

/// Right-hand side of the derivative bound (2q / (delta*sqrt(1-(x/delta)^2)))^m
/// for degree-q polynomials bounded on [-delta, delta].
pub fn bernstein_rhs(q: usize, delta: f64, m: usize, x: f64) -> Result<f64> {
    if m == 0 {
        return Err(Error::Domain("derivative order m must be >= 1".into()));
    }
    if !(x.abs() < delta) {
        return Err(Error::Domain(format!(
            "need |x| < delta, got x = {x}, delta = {delta}"
        )));
    }
    let base = 2.0 * q as f64 / (delta * (1.0 - (x / delta).powi(2)).sqrt());
    Ok(base.powi(m as i32))
}

/// Growth bound (2|x|/K)^q * sup_{[-K,K]} |h| for |x| outside [-K, K].
pub fn extrapolation_bound(h: &Poly, radius: f64, x: f64) -> Result<f64> {
    if x.abs() <= radius {
        return Err(Error::Domain(format!(
            "need |x| > K, got x = {x}, K = {radius}"
        )));
    }
    let q = h.degree() as i32;
    let sup = sup_norm(h, -radius, radius)?;
    Ok((2.0 * x.abs() / radius).powi(q) * sup)
}

/// Apply a linear functional given by its values on the Chebyshev basis
/// T_j(x/K) to a truncated series: returns (sum_j a_j * basis[j], error),
/// where the error is the series' truncation mass scaled by the caller's
/// growth envelope for the dropped modes.
pub fn apply_functional(
    basis: &[f64],
    series: &ChebSeries,
    tail_envelope: f64,
) -> Result<(f64, f64)> {
    let top = series.max_retained();
    if basis.len() <= top {
        return Err(Error::IncompleteBasis(format!(
            "need basis values through j = {top}, have {}",
            basis.len()
        )));
    }
    let value = series
        .coeffs
        .iter()
        .zip(basis)
        .map(|(a, b)| a * b)
        .sum::<f64>();
    Ok((value, series.truncation_error * tail_envelope))
}

/// Exact functional application on a polynomial: given exact basis values
/// nu(T_j(x/K)), evaluate nu(h) by exact change of basis.
pub fn apply_functional_exact(basis: &[Rat], h: &Poly, radius: &Rat) -> Result<Rat> {
    let coeffs = cheb_coeffs_exact(h, radius);
    if basis.len() < coeffs.len() {
        return Err(Error::IncompleteBasis(format!(
            "need {} basis values, have {}",
            coeffs.len(),
            basis.len()
        )));
    }
    let mut acc = Rat::zero();
    for (a, b) in coeffs.iter().zip(basis) {
        acc += a * b;
    }
    Ok(acc)
}

/// T_j(x/K) as an exact polynomial for rational K.
pub fn cheb_basis_poly(j: usize, radius: &Rat) -> Poly {
    cheb_poly(ChebKind::First, j).compose_scaled_arg(&(Rat::one() / radius))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat_frac;

    #[test]
    fn cheb_poly_base_cases() {
        assert_eq!(cheb_poly(ChebKind::First, 0), Poly::one());
        assert_eq!(cheb_poly(ChebKind::First, 2), Poly::from_i64(&[-1, 0, 2]));
        assert_eq!(cheb_poly(ChebKind::Second, 2), Poly::from_i64(&[-1, 0, 4]));
    }

    #[test]
    fn cheb_identity_on_nodes() {
        // T_5(cos t) = cos(5t) on a few angles
        let t5 = cheb_poly(ChebKind::First, 5);
        for k in 0..7 {
            let theta = 0.3 + k as f64 * 0.4;
            let lhs = t5.eval_f64(theta.cos());
            assert!((lhs - (5.0 * theta).cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn expand_linear_function() {
        let s = cheb_expand(|x| x, 1.0, 64, 1e-13).unwrap();
        assert!((s.coeffs[1] - 1.0).abs() < 1e-14);
        for (j, a) in s.coeffs.iter().enumerate() {
            if j != 1 {
                assert!(a.abs() < 1e-13);
            }
        }
    }

    #[test]
    fn expand_t3_on_radius_two() {
        let t3 = cheb_poly(ChebKind::First, 3);
        let s = cheb_expand(|x| t3.eval_f64(x / 2.0), 2.0, 128, 1e-13).unwrap();
        assert!((s.coeffs[3] - 1.0).abs() < 1e-12);
        assert!(s.truncation_error < 1e-10);
    }

    #[test]
    fn expand_exp_reconstructs() {
        let s = cheb_expand(|x| x.exp(), 1.0, 128, 1e-15).unwrap();
        // deterministic pseudo-random points
        for k in 0..32u64 {
            let x = ((k as f64 * 0.61803398875).fract() - 0.5) * 2.0;
            assert!(
                (s.eval(x) - x.exp()).abs() < 1e-12,
                "mismatch at {x}: {} vs {}",
                s.eval(x),
                x.exp()
            );
        }
    }

    #[test]
    fn sup_norm_examples() {
        let x2 = Poly::from_i64(&[0, 0, 1]);
        assert!((sup_norm(&x2, -1.0, 1.0).unwrap() - 1.0).abs() < 1e-10);
        let one_minus_x = Poly::from_i64(&[1, -1]);
        assert!((sup_norm(&one_minus_x, 0.0, 1.0).unwrap() - 1.0).abs() < 1e-10);
        let t5 = cheb_poly(ChebKind::First, 5);
        assert!((sup_norm(&t5, -1.0, 1.0).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn bernstein_rhs_values() {
        assert!((bernstein_rhs(1, 1.0, 1, 0.0).unwrap() - 2.0).abs() < 1e-15);
        assert!((bernstein_rhs(3, 2.0, 2, 0.0).unwrap() - 9.0).abs() < 1e-15);
        assert!(bernstein_rhs(3, 1.0, 1, 1.0).is_err());
    }

    #[test]
    fn extrapolation_examples() {
        let x = Poly::x();
        assert!((extrapolation_bound(&x, 1.0, 2.0).unwrap() - 4.0).abs() < 1e-9);
        let t4 = cheb_poly(ChebKind::First, 4);
        let bound = extrapolation_bound(&t4, 1.0, 1.5).unwrap();
        assert!((bound - 81.0).abs() < 1e-6);
        assert!(bound >= t4.eval_f64(1.5).abs());
        assert!(extrapolation_bound(&x, 1.0, 0.5).is_err());
    }

    #[test]
    fn exact_basis_change_roundtrip() {
        let h = Poly::from_i64(&[1, -2, 0, 5]);
        let radius = rat_frac(7, 3);
        let coeffs = cheb_coeffs_exact(&h, &radius);
        // reassemble sum a_j T_j(x/K) and compare exactly
        let mut acc = Poly::zero();
        for (j, a) in coeffs.iter().enumerate() {
            acc = acc.add(&cheb_basis_poly(j, &radius).scale(a));
        }
        assert_eq!(acc, h);
    }

    #[test]
    fn apply_functional_point_evaluation() {
        // nu = evaluation at 0: nu(T_j(x/K)) = T_j(0)
        let series = cheb_expand(|x| x * x, 1.0, 64, 1e-14).unwrap();
        let basis: Vec<f64> = (0..series.coeffs.len().max(4))
            .map(|j| cheb_poly(ChebKind::First, j).eval_f64(0.0))
            .collect();
        let (v, _) = apply_functional(&basis, &series, 1.0).unwrap();
        assert!(v.abs() < 1e-12);
    }
}
