//! Dense univariate polynomials with exact rational coefficients.
//!
//! This is the carrier type for everything the exact pipeline manipulates:
//! Chebyshev polynomials, the genus-expansion encodings in x = 1/N, the
//! denominators g_q(x), and reconstructed numerators.

use crate::rat::{rat_parse, rat_to_f64, rat_to_string, Rat};
use crate::{Error, Result};
use num_traits::{One, Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;

/// Coefficients lowest-degree first; no trailing zero coefficient is stored,
/// so the zero polynomial has an empty coefficient list.
#[derive(Clone, PartialEq, Eq)]
pub struct Poly {
    coeffs: Vec<Rat>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly { coeffs: vec![] }
    }

    pub fn one() -> Self {
        Poly::constant(Rat::one())
    }

    pub fn x() -> Self {
        Poly::from_coeffs(vec![Rat::zero(), Rat::one()])
    }

    pub fn constant(c: Rat) -> Self {
        Poly::from_coeffs(vec![c])
    }

    /// c * x^k
    pub fn monomial(c: Rat, k: usize) -> Self {
        let mut coeffs = vec![Rat::zero(); k + 1];
        coeffs[k] = c;
        Poly::from_coeffs(coeffs)
    }

    pub fn from_coeffs(mut coeffs: Vec<Rat>) -> Self {
        while coeffs.last().map(|c| c.is_zero()).unwrap_or(false) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Poly::from_coeffs(coeffs.iter().map(|&c| crate::rat::rat_i64(c)).collect())
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Rat {
        self.coeffs.get(k).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree of the zero polynomial is reported as 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, x: &Rat) -> Rat {
        let mut acc = Rat::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        let mut acc = 0.0f64;
        for c in self.coeffs.iter().rev() {
            acc = acc * x + rat_to_f64(c);
        }
        acc
    }

    pub fn add(&self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let mut out = vec![Rat::zero(); n];
        for (i, c) in self.coeffs.iter().enumerate() {
            out[i] += c;
        }
        for (i, c) in rhs.coeffs.iter().enumerate() {
            out[i] += c;
        }
        Poly::from_coeffs(out)
    }

    pub fn sub(&self, rhs: &Poly) -> Poly {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> Poly {
        Poly {
            coeffs: self.coeffs.iter().map(|c| -c.clone()).collect(),
        }
    }

    pub fn scale(&self, s: &Rat) -> Poly {
        if s.is_zero() {
            return Poly::zero();
        }
        Poly {
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn mul(&self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![Rat::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    out[i + j] += a * b;
                }
            }
        }
        Poly::from_coeffs(out)
    }

    pub fn pow(&self, mut e: u32) -> Poly {
        let mut base = self.clone();
        let mut acc = Poly::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn derivative(&self) -> Poly {
        if self.coeffs.len() <= 1 {
            return Poly::zero();
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c * Rat::from_integer(k.into()))
            .collect();
        Poly::from_coeffs(coeffs)
    }

    /// m-th derivative evaluated at a point, exactly.
    pub fn derivative_at(&self, m: usize, x: &Rat) -> Rat {
        let mut d = self.clone();
        for _ in 0..m {
            d = d.derivative();
        }
        d.eval(x)
    }

    /// h(a*x): substitute a scaled argument.
    pub fn compose_scaled_arg(&self, a: &Rat) -> Poly {
        let mut pow = Rat::one();
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| {
                let out = c * &pow;
                pow = &pow * a;
                out
            })
            .collect();
        Poly::from_coeffs(coeffs)
    }

    /// Truncate to degree < n (keep coefficients 0..n).
    pub fn truncated(&self, n: usize) -> Poly {
        Poly::from_coeffs(self.coeffs.iter().take(n).cloned().collect())
    }

    /// Product truncated to degree < n.
    pub fn mul_truncated(&self, rhs: &Poly, n: usize) -> Poly {
        let mut out = vec![Rat::zero(); n.min(self.coeffs.len() + rhs.coeffs.len()).max(1)];
        for (i, a) in self.coeffs.iter().enumerate() {
            if i >= n || a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                if i + j >= n {
                    break;
                }
                if !b.is_zero() {
                    out[i + j] += a * b;
                }
            }
        }
        Poly::from_coeffs(out)
    }

    /// Power-series inverse modulo x^n; requires a nonzero constant term.
    pub fn inverse_series(&self, n: usize) -> Result<Poly> {
        let c0 = self.coeff(0);
        if c0.is_zero() {
            return Err(Error::Domain(
                "series inverse needs nonzero constant term".into(),
            ));
        }
        let inv0 = Rat::one() / c0;
        let mut inv = vec![Rat::zero(); n];
        inv[0] = inv0.clone();
        for k in 1..n {
            // coefficient of x^k in self*inv must vanish
            let mut acc = Rat::zero();
            for j in 0..k {
                let a = self.coeff(k - j);
                if !a.is_zero() {
                    acc += &a * &inv[j];
                }
            }
            inv[k] = -acc * &inv0;
        }
        Ok(Poly::from_coeffs(inv))
    }

    /// First n Taylor coefficients of self / den at 0.
    pub fn div_series(&self, den: &Poly, n: usize) -> Result<Vec<Rat>> {
        let inv = den.inverse_series(n)?;
        let q = self.mul_truncated(&inv, n);
        Ok((0..n).map(|k| q.coeff(k)).collect())
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.coeffs.iter().map(rat_to_string).collect()
    }

    pub fn from_strings(items: &[String]) -> Result<Poly> {
        let coeffs = items
            .iter()
            .map(|s| rat_parse(s))
            .collect::<Result<Vec<_>>>()?;
        Ok(Poly::from_coeffs(coeffs))
    }

    /// True iff every odd-degree coefficient vanishes.
    pub fn is_even(&self) -> bool {
        self.coeffs
            .iter()
            .skip(1)
            .step_by(2)
            .all(|c| c.is_zero())
    }

    /// Largest |coefficient| as f64, for scale estimates.
    pub fn coeff_scale(&self) -> f64 {
        self.coeffs
            .iter()
            .map(|c| rat_to_f64(&c.abs()))
            .fold(0.0, f64::max)
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| {
                let c = if c.denom().is_one() {
                    c.numer().to_string()
                } else {
                    format!("({})", c)
                };
                match k {
                    0 => c,
                    1 => format!("{c}*x"),
                    _ => format!("{c}*x^{k}"),
                }
            })
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

// Wire format: JSON array of "numerator/denominator" strings, lowest degree
// first.
impl Serialize for Poly {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_strings().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Poly {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let items = Vec::<String>::deserialize(deserializer)?;
        Poly::from_strings(&items).map_err(|e| D::Error::custom(e.to_string()))
    }
}

/// Lagrange interpolation through exact points, via Newton divided
/// differences. Nodes must be pairwise distinct.
pub fn interpolate(points: &[(Rat, Rat)]) -> Result<Poly> {
    let n = points.len();
    if n == 0 {
        return Ok(Poly::zero());
    }
    // divided-difference table
    let mut dd: Vec<Rat> = points.iter().map(|(_, y)| y.clone()).collect();
    let xs: Vec<Rat> = points.iter().map(|(x, _)| x.clone()).collect();
    for level in 1..n {
        for i in (level..n).rev() {
            let dx = &xs[i] - &xs[i - level];
            if dx.is_zero() {
                return Err(Error::Domain("repeated interpolation node".into()));
            }
            dd[i] = (&dd[i] - &dd[i - 1]) / dx;
        }
    }
    // Horner-style expansion of the Newton form
    let mut acc = Poly::constant(dd[n - 1].clone());
    for i in (0..n - 1).rev() {
        let lin = Poly::from_coeffs(vec![-xs[i].clone(), Rat::one()]);
        acc = acc.mul(&lin).add(&Poly::constant(dd[i].clone()));
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{rat_frac, rat_i64};

    #[test]
    fn arithmetic_basics() {
        let p = Poly::from_i64(&[1, 2]); // 1 + 2x
        let q = Poly::from_i64(&[0, 0, 3]); // 3x^2
        assert_eq!(p.mul(&q), Poly::from_i64(&[0, 0, 3, 6]));
        assert_eq!(p.pow(2), Poly::from_i64(&[1, 4, 4]));
        assert_eq!(p.eval(&rat_i64(2)), rat_i64(5));
        assert_eq!(p.degree(), 1);
    }

    #[test]
    fn trailing_zeros_trimmed() {
        let p = Poly::from_i64(&[1, 0, 0]);
        assert_eq!(p.degree(), 0);
        let z = Poly::from_i64(&[3]).sub(&Poly::from_i64(&[3]));
        assert!(z.is_zero());
    }

    #[test]
    fn series_inverse() {
        // 1/(1-x) = 1 + x + x^2 + ...
        let g = Poly::from_i64(&[1, -1]);
        let inv = g.inverse_series(5).unwrap();
        assert_eq!(inv, Poly::from_i64(&[1, 1, 1, 1, 1]));
        let div = Poly::from_i64(&[2]).div_series(&g, 3).unwrap();
        assert_eq!(div, vec![rat_i64(2), rat_i64(2), rat_i64(2)]);
    }

    #[test]
    fn interpolation_recovers_poly() {
        let p = Poly::from_i64(&[3, -1, 0, 2]);
        let pts: Vec<(Rat, Rat)> = (1..=4i64)
            .map(|n| {
                let x = rat_frac(1, n);
                let y = p.eval(&x);
                (x, y)
            })
            .collect();
        let q = interpolate(&pts).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn json_roundtrip() {
        let p = Poly::from_coeffs(vec![rat_frac(1, 2), rat_i64(-3)]);
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, r#"["1/2","-3/1"]"#);
        let q: Poly = serde_json::from_str(&s).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn scaled_argument() {
        // (1+x)^2 at 3x -> 1 + 6x + 9x^2
        let p = Poly::from_i64(&[1, 2, 1]);
        assert_eq!(p.compose_scaled_arg(&rat_i64(3)), Poly::from_i64(&[1, 6, 9]));
    }
}
