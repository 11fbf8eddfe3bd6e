//! Scalar tower: exact complex rationals and double-precision complex numbers.

use std::fmt::Debug;
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{Num, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exact complex rational `re + i·im`.
pub type Exact = Complex<BigRational>;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalarMode {
    #[default]
    Exact,
    Float,
}

impl std::fmt::Display for ScalarMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ScalarMode::Exact => "exact",
            ScalarMode::Float => "float",
        })
    }
}

/// Field elements a [`crate::Tensor`] can hold.
pub trait Scalar:
    Clone + Debug + PartialEq + Num + std::ops::Neg<Output = Self> + Send + Sync + 'static
{
    const MODE: ScalarMode;

    fn to_complex64(&self) -> Complex64;

    /// Text form of the real and imaginary parts as written in JSON files.
    fn to_parts(&self) -> (String, String);

    fn from_parts(re: &str, im: &str) -> Result<Self>;

    fn conj(&self) -> Self;
}

impl Scalar for Exact {
    const MODE: ScalarMode = ScalarMode::Exact;

    fn to_complex64(&self) -> Complex64 {
        Complex64::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }

    fn to_parts(&self) -> (String, String) {
        (self.re.to_string(), self.im.to_string())
    }

    fn from_parts(re: &str, im: &str) -> Result<Self> {
        Ok(Complex::new(parse_rational(re)?, parse_rational(im)?))
    }

    fn conj(&self) -> Self {
        Complex::conj(self)
    }
}

impl Scalar for Complex64 {
    const MODE: ScalarMode = ScalarMode::Float;

    fn to_complex64(&self) -> Complex64 {
        *self
    }

    fn to_parts(&self) -> (String, String) {
        (format_f64(self.re), format_f64(self.im))
    }

    fn from_parts(re: &str, im: &str) -> Result<Self> {
        let parse = |s: &str| {
            f64::from_str(s.trim())
                .map_err(|e| Error::input("re/im", format!("`{s}` is not a float: {e}")))
        };
        Ok(Complex64::new(parse(re)?, parse(im)?))
    }

    fn conj(&self) -> Self {
        Complex::conj(self)
    }
}

fn format_f64(x: f64) -> String {
    // `{:?}` always keeps a decimal point or exponent, and round-trips.
    format!("{x:?}")
}

/// Parses `"p/q"` or `"p"` with decimal integers.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = |why: &str| Error::input("re/im", format!("`{s}` is not a rational: {why}"));
    let (num, den) = match s.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (s, "1"),
    };
    let num = BigInt::from_str_radix(num, 10).map_err(|_| bad("bad numerator"))?;
    let den = BigInt::from_str_radix(den, 10).map_err(|_| bad("bad denominator"))?;
    if den.is_zero() {
        return Err(bad("zero denominator"));
    }
    Ok(BigRational::new(num, den))
}

/// Exact integer scalar.
pub fn int(v: i64) -> Exact {
    Complex::new(BigRational::from_integer(v.into()), BigRational::zero())
}

/// Exact rational scalar `num/den`.
pub fn frac(num: i64, den: i64) -> Exact {
    Complex::new(
        BigRational::new(num.into(), den.into()),
        BigRational::zero(),
    )
}

/// Exact `|z|²` as a rational.
pub fn norm_sqr(z: &Exact) -> BigRational {
    &z.re * &z.re + &z.im * &z.im
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_strings() {
        assert_eq!(parse_rational("3/6").unwrap(), BigRational::new(1.into(), 2.into()));
        assert_eq!(parse_rational("-7").unwrap(), BigRational::from_integer((-7).into()));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
        assert!(parse_rational("0.5").is_err());
        let z = frac(-3, 4);
        assert_eq!(z.to_parts(), ("-3/4".to_string(), "0".to_string()));
        assert_eq!(Exact::from_parts("-3/4", "0").unwrap(), z);
    }

    #[test]
    fn float_parts_roundtrip() {
        let z = Complex64::new(0.1, -2.5e-300);
        let (re, im) = z.to_parts();
        assert_eq!(Complex64::from_parts(&re, &im).unwrap(), z);
    }
}
