//! Smooth [0,1]-valued step functions used to convert expansion bounds into
//! norm tail bounds: zero on a plateau around the limiting spectrum, one
//! past it, with controlled high-order derivatives.
//!
//! Construction: an (m+1)-fold convolution of a hard step with a uniform
//! kernel of width eps/(2(m+1)), so chi is C^m and its (m+1)-th derivative
//! stays bounded. The transition is the Irwin-Hall CDF rescaled to
//! [rho + eps/2, rho + eps], which is piecewise polynomial and exactly
//! evaluable.

use crate::cheb::{cheb_expand, ChebSeries};
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct TestFunction {
    pub smoothness_order: usize,
    pub radius: f64,
    pub plateau: f64,
    pub width: f64,
    pub series: ChebSeries,
}

/// CDF of the sum of m iid uniforms on [0,1], evaluated at s.
fn irwin_hall_cdf(m: usize, s: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    if s >= m as f64 {
        return 1.0;
    }
    // 1/m! * sum_{j<=floor(s)} (-1)^j C(m,j) (s-j)^m
    let mut acc = 0.0f64;
    let mut binom = 1.0f64;
    let mut sign = 1.0f64;
    for j in 0..=(s.floor() as usize) {
        acc += sign * binom * (s - j as f64).powi(m as i32);
        sign = -sign;
        binom *= (m - j) as f64 / (j + 1) as f64;
    }
    let mut fact = 1.0f64;
    for k in 2..=m {
        fact *= k as f64;
    }
    (acc / fact).clamp(0.0, 1.0)
}

impl TestFunction {
    /// chi(x): 0 for |x| <= rho + eps/2, 1 for |x| >= rho + eps, monotone
    /// Irwin-Hall transition in between.
    pub fn eval(&self, x: f64) -> f64 {
        let t = x.abs();
        let lo = self.plateau + self.width / 2.0;
        let hi = self.plateau + self.width;
        if t <= lo {
            return 0.0;
        }
        if t >= hi {
            return 1.0;
        }
        let folds = self.smoothness_order + 1;
        let w = self.width / (2.0 * folds as f64);
        irwin_hall_cdf(folds, (t - lo) / w)
    }

    /// f(theta) = chi(K cos theta).
    pub fn f_theta(&self, theta: f64) -> f64 {
        self.eval(self.radius * theta.cos())
    }

    /// Max |f^(k+1)| over a theta grid, by divided differences of order k+1.
    /// For piecewise-polynomial chi the divided difference is an average of
    /// the true derivative against a B-spline kernel, so it never exceeds
    /// the essential sup of |f^(k+1)|.
    pub fn max_f_derivative_fd(&self, k: usize, grid: usize) -> f64 {
        let order = k + 1;
        let h = match order {
            1..=3 => 1e-5,
            4 | 5 => 1e-3,
            _ => 4e-3,
        };
        // binomial weights for the central difference of given order
        let mut w = vec![1.0f64];
        for _ in 0..order {
            let mut next = vec![0.0; w.len() + 1];
            for (i, c) in w.iter().enumerate() {
                next[i] += c;
                next[i + 1] -= c;
            }
            w = next;
        }
        let mut best = 0.0f64;
        for g in 0..grid {
            let theta = g as f64 * 2.0 * std::f64::consts::PI / grid as f64;
            let mut acc = 0.0;
            for (i, c) in w.iter().enumerate() {
                acc += c * self.f_theta(theta + (order as f64 / 2.0 - i as f64) * h);
            }
            best = best.max((acc / h.powi(order as i32)).abs());
        }
        best
    }

    /// The derivative envelope 8^(k+1) m^k (K/eps)^(k+1).
    pub fn derivative_envelope(&self, k: usize) -> f64 {
        let m = self.smoothness_order as f64;
        let ratio = self.radius / self.width;
        8.0f64.powi(k as i32 + 1) * m.powi(k as i32) * ratio.powi(k as i32 + 1)
    }
}

/// Build the smooth step for parameters (m, K, rho, eps) with rho + eps < K.
pub fn build_test_function(
    m: usize,
    radius: f64,
    plateau: f64,
    width: f64,
) -> Result<TestFunction> {
    if m < 1 {
        return Err(Error::Domain("smoothness order m must be >= 1".into()));
    }
    if !(width > 0.0 && plateau >= 0.0 && plateau + width < radius) {
        return Err(Error::Domain(format!(
            "need 0 < eps and rho + eps < K, got rho = {plateau}, eps = {width}, K = {radius}"
        )));
    }
    let mut tf = TestFunction {
        smoothness_order: m,
        radius,
        plateau,
        width,
        series: ChebSeries {
            radius,
            coeffs: vec![],
            truncation_error: 0.0,
        },
    };
    let probe = tf.clone();
    tf.series = cheb_expand(move |x| probe.eval(x), radius, 4096, 1e-14)?;
    Ok(tf)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn irwin_hall_symmetry() {
        for m in 1..=8 {
            let mid = m as f64 / 2.0;
            assert!((irwin_hall_cdf(m, mid) - 0.5).abs() < 1e-12);
            for s in [0.3, 0.9, 1.7] {
                if s < m as f64 {
                    let a = irwin_hall_cdf(m, s);
                    let b = irwin_hall_cdf(m, m as f64 - s);
                    assert!((a + b - 1.0).abs() < 1e-10, "m={m} s={s}");
                }
            }
        }
    }

    #[test]
    fn plateau_and_saturation_exact() {
        let tf = build_test_function(4, 3.0, 2.0, 0.4).unwrap();
        assert_eq!(tf.eval(2.1), 0.0); // rho + eps/4
        assert_eq!(tf.eval(-2.2), 0.0); // boundary of plateau
        assert_eq!(tf.eval(2.8), 1.0); // rho + 2 eps
        assert_eq!(tf.eval(-2.4), 1.0);
        // monotone on the transition, values in [0,1]
        let mut prev = 0.0;
        for k in 0..=100 {
            let x = 2.2 + 0.2 * k as f64 / 100.0;
            let v = tf.eval(x);
            assert!((0.0..=1.0).contains(&v));
            assert!(v + 1e-12 >= prev);
            prev = v;
        }
    }

    #[test]
    fn derivative_bounds_small_m() {
        // spot check the envelope at a coarse grid; the acceptance suite
        // runs the full 1e4-point battery
        let tf = build_test_function(4, 3.0, 2.0, 0.5).unwrap();
        for k in 0..=4usize {
            let fd = tf.max_f_derivative_fd(k, 400);
            let bound = tf.derivative_envelope(k);
            assert!(fd <= bound, "k={k}: fd {fd} > bound {bound}");
        }
    }

    #[test]
    fn series_matches_function() {
        let tf = build_test_function(6, 3.0, 1.5, 0.9).unwrap();
        for k in 0..50 {
            let x = -3.0 + 6.0 * k as f64 / 49.0;
            let err = (tf.series.eval(x) - tf.eval(x)).abs();
            assert!(
                err < 1e-3 + tf.series.truncation_error,
                "x={x} err={err} trunc={}",
                tf.series.truncation_error
            );
        }
    }
}
