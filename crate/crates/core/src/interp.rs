//! Interpolation of polynomials from their values at reciprocal integers,
//! the equispaced Rakhmanov check, and the polynomial approximations behind
//! the rational Bernstein inequality.

use crate::cheb::{cheb_poly, sup_norm, ChebKind};
use crate::poly::Poly;
use crate::rat::{rat_frac, rat_i64, rat_to_f64, Rat};
use crate::{Error, Result};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InterpReport {
    pub degree: usize,
    pub delta: f64,
    /// sup_{[0,delta]} |h| divided by the max of |h| over the 1/N samples.
    pub ratio: f64,
    pub n_samples_used: usize,
}

/// Compare the uniform norm of h on [0, delta] against its values at the
/// points 1/N with 1/N <= 2*delta. Valid for 0 < delta <= 1/(24 deg h).
pub fn inverse_integer_ratio(h: &Poly, delta: f64) -> Result<InterpReport> {
    let q = h.degree().max(1);
    if !(delta > 0.0 && delta <= 1.0 / (24.0 * q as f64)) {
        return Err(Error::Domain(format!(
            "need 0 < delta <= 1/(24q) = {}, got {delta}",
            1.0 / (24.0 * q as f64)
        )));
    }
    // integers with 1/N <= 2 delta, capped for cheap exact evaluation
    let n_min = (1.0 / (2.0 * delta)).ceil() as i64;
    let n_cap = (10 * q as i64).max((4.0 / delta).ceil() as i64);
    let mut best = Rat::zero();
    let mut used = 0usize;
    for n in n_min..=n_cap {
        let v = h.eval(&rat_frac(1, n)).abs();
        if v > best {
            best = v;
        }
        used += 1;
    }
    if best.is_zero() {
        // h vanishes at every sample; report infinite ratio unless h == 0
        let sup = sup_norm(h, 0.0, delta)?;
        return Ok(InterpReport {
            degree: q,
            delta,
            ratio: if sup == 0.0 { 1.0 } else { f64::INFINITY },
            n_samples_used: used,
        });
    }
    let sup = sup_norm(h, 0.0, delta)?;
    Ok(InterpReport {
        degree: q,
        delta,
        ratio: sup / rat_to_f64(&best),
        n_samples_used: used,
    })
}

/// The extremal example h_q(x) = T_q(qx) * prod_{j=1..q} (1 - jx), which is
/// bounded by 1 at every reciprocal integer yet grows geometrically on
/// [0, c/q].
pub fn optimality_example(q: usize) -> Result<Poly> {
    if q < 1 {
        return Err(Error::Domain("q must be >= 1".into()));
    }
    let tq = cheb_poly(ChebKind::First, q).compose_scaled_arg(&rat_i64(q as i64));
    let mut prod = Poly::one();
    for j in 1..=q as i64 {
        prod = prod.mul(&Poly::from_coeffs(vec![Rat::one(), -rat_i64(j)]));
    }
    Ok(tq.mul(&prod))
}

/// ||h||_[-1/2,1/2] over the max of |h| at the 2M midpoints -1 + (2k-1)/(2M).
pub fn rakhmanov_ratio(h: &Poly, m_points: usize) -> Result<f64> {
    if h.degree() > m_points {
        return Err(Error::Domain(format!(
            "need deg h <= M, got {} > {m_points}",
            h.degree()
        )));
    }
    let mut best = Rat::zero();
    for k in 1..=2 * m_points {
        let x = rat_i64(-1) + rat_frac(2 * k as i64 - 1, 2 * m_points as i64);
        let v = h.eval(&x).abs();
        if v > best {
            best = v;
        }
    }
    let sup = sup_norm(h, -0.5, 0.5)?;
    if best.is_zero() {
        return Ok(if sup == 0.0 { 1.0 } else { f64::INFINITY });
    }
    Ok(sup / rat_to_f64(&best))
}

/// Degree-7q Taylor truncation t of 1/(2+x)^q; satisfies
/// |1/(2+x)^q - t(x)| <= 4^-q on [-1,1].
pub fn approx_inverse_shifted_power(q: usize) -> Result<Poly> {
    if q < 1 {
        return Err(Error::Domain("q must be >= 1".into()));
    }
    // 1/(2+x)^q = sum_k (-1)^k C(q+k-1, k) 2^{-(q+k)} x^k
    let deg = 7 * q;
    let mut coeffs = Vec::with_capacity(deg + 1);
    let mut binom = BigInt::one(); // C(q-1+k, k), starts at k=0
    for k in 0..=deg {
        let mut c = Rat::new(
            binom.clone(),
            BigInt::one() << (q + k),
        );
        if k % 2 == 1 {
            c = -c;
        }
        coeffs.push(c);
        binom = binom * BigInt::from(q + k) / BigInt::from(k + 1);
    }
    Ok(Poly::from_coeffs(coeffs))
}

/// g_q(x) = prod_{j=1..q} (1 - (jx)^2)^{floor(q/j)}, the universal Haar
/// denominator.
pub fn gq_poly(q: usize) -> Result<Poly> {
    if q < 1 {
        return Err(Error::Domain("q must be >= 1".into()));
    }
    let mut out = Poly::one();
    for j in 1..=q {
        let factor = Poly::from_coeffs(vec![
            Rat::one(),
            Rat::zero(),
            -rat_i64((j * j) as i64),
        ]);
        out = out.mul(&factor.pow((q / j) as u32));
    }
    Ok(out)
}

/// Expected degree of g_q: 2 * sum_j floor(q/j).
pub fn gq_degree(q: usize) -> usize {
    2 * (1..=q).map(|j| q / j).sum::<usize>()
}

/// Degree-2bq Taylor truncation s of 1/g_q at 0.
pub fn approx_inverse_gq(q: usize, b: usize) -> Result<Poly> {
    if q < 1 || b < 1 {
        return Err(Error::Domain("need q >= 1 and b >= 1".into()));
    }
    let g = gq_poly(q)?;
    g.inverse_series(2 * b * q + 1)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RationalBernsteinReport {
    pub degree_num: usize,
    pub degree_gq: usize,
    pub order: usize,
    /// |r^(m)(0)| / m! for r = f/g_q, exact then rounded.
    pub taylor_coeff_abs: f64,
    /// sup over the reciprocal-integer set I_q of |r|.
    pub sup_on_samples: f64,
    /// implied constant kappa with |r^(m)(0)|/m! = (kappa p)^{2m}/m! * sup.
    pub kappa: f64,
}

/// Exact m-th Taylor coefficient of f/g_q at 0 against the sampled sup norm
/// on I_q = {1/N : |N| > q}; reports the empirical constant.
pub fn rational_bernstein_check(f: &Poly, q: usize, m: usize) -> Result<RationalBernsteinReport> {
    if m < 1 {
        return Err(Error::Domain("m must be >= 1".into()));
    }
    if f.degree() < q {
        return Err(Error::Domain(format!(
            "need deg f >= q, got {} < {q}",
            f.degree()
        )));
    }
    let g = gq_poly(q)?;
    let coeffs = f.div_series(&g, m + 1)?;
    let cm = rat_to_f64(&coeffs[m].abs());
    let p = f.degree();
    let n_cap = (10 * p).max(100) as i64;
    let mut sup = 0.0f64;
    for n in (q as i64 + 1)..=n_cap {
        let x = rat_frac(1, n);
        let v = rat_to_f64(&(f.eval(&x) / g.eval(&x)).abs());
        sup = sup.max(v);
        let xm = rat_frac(1, -n);
        let vm = rat_to_f64(&(f.eval(&xm) / g.eval(&xm)).abs());
        sup = sup.max(vm);
    }
    let mut fact = 1.0f64;
    for k in 2..=m {
        fact *= k as f64;
    }
    // solve cm = (kappa p)^{2m}/m! * sup for kappa
    let kappa = if sup > 0.0 && cm > 0.0 {
        (cm * fact / sup).powf(1.0 / (2.0 * m as f64)) / p as f64
    } else {
        0.0
    };
    Ok(RationalBernsteinReport {
        degree_num: p,
        degree_gq: g.degree(),
        order: m,
        taylor_coeff_abs: cm,
        sup_on_samples: sup,
        kappa,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat_frac;

    #[test]
    fn constant_ratio_one() {
        let h = Poly::one();
        let r = inverse_integer_ratio(&h, 1.0 / 48.0).unwrap();
        assert!((r.ratio - 1.0).abs() < 1e-12);
    }

    #[test]
    fn linear_ratio_close_to_one() {
        // max of x on [0, delta] is delta; the largest sample 1/24 = 2 delta
        // dominates it, so the ratio sits in [delta/(2 delta), 1]
        let h = Poly::x();
        let r = inverse_integer_ratio(&h, 1.0 / 48.0).unwrap();
        assert!(r.ratio >= 0.5 - 1e-9, "ratio {}", r.ratio);
        assert!(r.ratio <= 1.0 + 1e-9, "ratio {}", r.ratio);
    }

    #[test]
    fn optimality_example_small() {
        // q = 1: T_1(x)(1-x) = x - x^2
        let h = optimality_example(1).unwrap();
        assert_eq!(h, Poly::from_i64(&[0, 1, -1]));
        // |h_q(1/N)| <= 1 for q = 4, N = 1..40, exact
        let h4 = optimality_example(4).unwrap();
        for n in 1..=40i64 {
            let v = h4.eval(&rat_frac(1, n)).abs();
            assert!(v <= Rat::one(), "N={n}: {}", v);
        }
    }

    #[test]
    fn optimality_growth() {
        // on [0, 1/q] the sup is exactly 1 for even q (|T_q(qx)| <= 1 and
        // every factor 1 - jx lies in [0, 1] there); the geometric blowup
        // lives on the wider window [0, 2/q]
        let h4 = optimality_example(4).unwrap();
        let h8 = optimality_example(8).unwrap();
        assert!((sup_norm(&h4, 0.0, 0.25).unwrap() - 1.0).abs() < 1e-9);
        assert!((sup_norm(&h8, 0.0, 0.125).unwrap() - 1.0).abs() < 1e-9);
        let s4 = sup_norm(&h4, 0.0, 0.5).unwrap();
        let s8 = sup_norm(&h8, 0.0, 0.25).unwrap();
        assert!(s8 / s4 >= 2.0, "s8={s8} s4={s4}");
    }

    #[test]
    fn rakhmanov_basics() {
        assert!((rakhmanov_ratio(&Poly::one(), 4).unwrap() - 1.0).abs() < 1e-12);
        let r = rakhmanov_ratio(&Poly::x(), 4).unwrap();
        assert!(r <= 1.0 + 1e-12);
    }

    #[test]
    fn inverse_shifted_power_error() {
        for q in [1usize, 3] {
            let t = approx_inverse_shifted_power(q).unwrap();
            assert_eq!(t.degree(), 7 * q);
            let mut worst = 0.0f64;
            for k in 0..=1000 {
                let x = -1.0 + 2.0 * k as f64 / 1000.0;
                let exact = (2.0 + x).powi(-(q as i32));
                let err = (exact - t.eval_f64(x)).abs();
                worst = worst.max(err);
                // sandwich (4/7)|t| <= |r| <= 4|t|
                let tv = t.eval_f64(x);
                assert!(4.0 / 7.0 * tv.abs() <= exact.abs() + 1e-15);
                assert!(exact.abs() <= 4.0 * tv.abs() + 1e-15);
            }
            assert!(worst <= 4.0f64.powi(-(q as i32)), "q={q} err={worst}");
        }
    }

    #[test]
    fn gq_small_cases() {
        assert_eq!(gq_poly(1).unwrap(), Poly::from_i64(&[1, 0, -1]));
        let g2 = gq_poly(2).unwrap();
        let expect = Poly::from_i64(&[1, 0, -1])
            .pow(2)
            .mul(&Poly::from_i64(&[1, 0, -4]));
        assert_eq!(g2, expect);
        for q in 1..=12 {
            assert_eq!(gq_poly(q).unwrap().degree(), gq_degree(q), "q={q}");
        }
    }

    #[test]
    fn inverse_gq_bounds() {
        for (q, b) in [(1usize, 2usize), (2, 2), (4, 2), (6, 2)] {
            let s = approx_inverse_gq(q, b).unwrap();
            assert!(s.coeff(0) == Rat::one());
            let g = gq_poly(q).unwrap();
            let lim = 1.0 / (8.0 * q as f64);
            let mut worst = 0.0f64;
            for k in 0..=400 {
                let x = -lim + 2.0 * lim * k as f64 / 400.0;
                let inv = 1.0 / g.eval_f64(x);
                let err = (inv - s.eval_f64(x)).abs();
                worst = worst.max(err);
                assert!(0.5 * inv <= s.eval_f64(x) + 1e-12, "q={q} x={x}");
                assert!(s.eval_f64(x) <= 1.5 * inv + 1e-12, "q={q} x={x}");
            }
            assert!(
                worst <= 2.0f64.powi(-((b * q) as i32)),
                "q={q} b={b}: {worst}"
            );
        }
    }

    #[test]
    fn rational_bernstein_trivial_cases() {
        let q = 3;
        let g = gq_poly(q).unwrap();
        // f = g_q -> r = 1, derivatives vanish
        for m in 1..=4 {
            let rep = rational_bernstein_check(&g, q, m).unwrap();
            assert_eq!(rep.taylor_coeff_abs, 0.0);
        }
        // f = x g_q -> r = x: first coefficient 1, higher vanish
        let xg = Poly::x().mul(&g);
        let rep = rational_bernstein_check(&xg, q, 1).unwrap();
        assert!((rep.taylor_coeff_abs - 1.0).abs() < 1e-15);
        let rep2 = rational_bernstein_check(&xg, q, 2).unwrap();
        assert_eq!(rep2.taylor_coeff_abs, 0.0);
    }
}
