//! Arbitrary-precision rational scalars used by every exact engine.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

pub type Rat = BigRational;

pub fn rat_i64(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn rat_frac(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Fall back to a quotient of leading digits for extreme magnitudes.
        let n = r.numer().to_f64().unwrap_or(f64::INFINITY);
        let d = r.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

/// Exact conversion of a finite f64 into a rational.
pub fn rat_from_f64(x: f64) -> Option<Rat> {
    Rat::from_float(x)
}

/// Parse "a/b" or "a" into a rational.
pub fn rat_parse(s: &str) -> crate::Result<Rat> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = num
        .parse()
        .map_err(|e| crate::Error::Parse(format!("bad numerator {num:?}: {e}")))?;
    let d: BigInt = den
        .parse()
        .map_err(|e| crate::Error::Parse(format!("bad denominator {den:?}: {e}")))?;
    if d.is_zero() {
        return Err(crate::Error::Parse(format!("zero denominator in {s:?}")));
    }
    Ok(Rat::new(n, d))
}

pub fn rat_to_string(r: &Rat) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Complex number with exact rational real and imaginary parts.
#[derive(Clone, PartialEq, Eq)]
pub struct CRat {
    pub re: Rat,
    pub im: Rat,
}

impl CRat {
    pub fn zero() -> Self {
        CRat {
            re: Rat::zero(),
            im: Rat::zero(),
        }
    }

    pub fn one() -> Self {
        CRat {
            re: Rat::one(),
            im: Rat::zero(),
        }
    }

    pub fn real(re: Rat) -> Self {
        CRat {
            re,
            im: Rat::zero(),
        }
    }

    pub fn new(re: Rat, im: Rat) -> Self {
        CRat { re, im }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        CRat {
            re: self.re.clone(),
            im: -self.im.clone(),
        }
    }

    /// Squared modulus as an exact rational.
    pub fn norm_sqr(&self) -> Rat {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn abs_f64(&self) -> f64 {
        rat_to_f64(&self.norm_sqr()).sqrt()
    }

    pub fn scale(&self, s: &Rat) -> Self {
        CRat {
            re: &self.re * s,
            im: &self.im * s,
        }
    }
}

impl fmt::Debug for CRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} + {}i)", self.re, self.im)
    }
}

impl Add for &CRat {
    type Output = CRat;
    fn add(self, rhs: &CRat) -> CRat {
        CRat {
            re: &self.re + &rhs.re,
            im: &self.im + &rhs.im,
        }
    }
}

impl Sub for &CRat {
    type Output = CRat;
    fn sub(self, rhs: &CRat) -> CRat {
        CRat {
            re: &self.re - &rhs.re,
            im: &self.im - &rhs.im,
        }
    }
}

impl Mul for &CRat {
    type Output = CRat;
    fn mul(self, rhs: &CRat) -> CRat {
        CRat {
            re: &self.re * &rhs.re - &self.im * &rhs.im,
            im: &self.re * &rhs.im + &self.im * &rhs.re,
        }
    }
}

impl Neg for CRat {
    type Output = CRat;
    fn neg(self) -> CRat {
        CRat {
            re: -self.re,
            im: -self.im,
        }
    }
}

impl AddAssign<&CRat> for CRat {
    fn add_assign(&mut self, rhs: &CRat) {
        self.re += &rhs.re;
        self.im += &rhs.im;
    }
}

impl SubAssign<&CRat> for CRat {
    fn sub_assign(&mut self, rhs: &CRat) {
        self.re -= &rhs.re;
        self.im -= &rhs.im;
    }
}

impl MulAssign<&CRat> for CRat {
    fn mul_assign(&mut self, rhs: &CRat) {
        let out = &*self * rhs;
        *self = out;
    }
}

/// Absolute value helper used by sup-norm style comparisons on exact data.
pub fn rat_abs(r: &Rat) -> Rat {
    r.abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_roundtrip() {
        let r = rat_parse("-3/7").unwrap();
        assert_eq!(rat_to_string(&r), "-3/7");
        assert_eq!(rat_parse("5").unwrap(), rat_i64(5));
        assert!(rat_parse("1/0").is_err());
    }

    #[test]
    fn complex_mul() {
        let a = CRat::new(rat_i64(1), rat_i64(2));
        let b = CRat::new(rat_i64(3), rat_i64(-1));
        let c = &a * &b;
        assert_eq!(c.re, rat_i64(5));
        assert_eq!(c.im, rat_i64(5));
        assert_eq!((&a * &a.conj()).re, a.norm_sqr());
    }

    #[test]
    fn f64_conversion_exact() {
        let r = rat_from_f64(0.375).unwrap();
        assert_eq!(r, rat_frac(3, 8));
    }
}
