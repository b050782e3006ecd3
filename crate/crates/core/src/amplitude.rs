//! Scalar arithmetic for scattering amplitudes.
//!
//! Every amplitude produced by a single pair-scattering event is linear in the
//! two process amplitudes `S_A` and `S_B`, so it is carried symbolically as
//! `c0 + cA*S_A + cB*S_B` and only evaluated when a concrete pair is supplied.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Complex scalar used throughout the crate.
pub type Complex = Complex64;

/// Default relative tolerance for semantic comparisons.
pub const DEFAULT_TOLERANCE: f64 = 1e-10;

/// A scalar of the form `c0 + cA*S_A + cB*S_B`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeForm {
    pub c0: Complex,
    pub ca: Complex,
    pub cb: Complex,
}

impl AmplitudeForm {
    pub const ZERO: AmplitudeForm = AmplitudeForm {
        c0: Complex::new(0.0, 0.0),
        ca: Complex::new(0.0, 0.0),
        cb: Complex::new(0.0, 0.0),
    };

    pub fn new(c0: Complex, ca: Complex, cb: Complex) -> Self {
        let form = AmplitudeForm { c0, ca, cb };
        debug_assert!(form.is_finite(), "non-finite amplitude form {form:?}");
        form
    }

    pub fn constant(c0: impl Into<Complex>) -> Self {
        Self::new(c0.into(), Complex::ZERO, Complex::ZERO)
    }

    /// `coeff * S_A`
    pub fn along_a(coeff: impl Into<Complex>) -> Self {
        Self::new(Complex::ZERO, coeff.into(), Complex::ZERO)
    }

    /// `coeff * S_B`
    pub fn along_b(coeff: impl Into<Complex>) -> Self {
        Self::new(Complex::ZERO, Complex::ZERO, coeff.into())
    }

    pub fn eval(&self, sa: Complex, sb: Complex) -> Complex {
        self.c0 + self.ca * sa + self.cb * sb
    }

    /// Exact zero in all six float components.
    pub fn is_zero(&self) -> bool {
        *self == Self::ZERO
    }

    /// True when the form carries no `S_A`/`S_B` dependence.
    pub fn is_constant(&self) -> bool {
        self.ca == Complex::ZERO && self.cb == Complex::ZERO
    }

    pub fn is_finite(&self) -> bool {
        [self.c0, self.ca, self.cb].iter().all(|c| c.is_finite())
    }

    pub fn scale(&self, factor: impl Into<Complex>) -> Self {
        let f = factor.into();
        Self::new(self.c0 * f, self.ca * f, self.cb * f)
    }
}

impl Add for AmplitudeForm {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.c0 + rhs.c0, self.ca + rhs.ca, self.cb + rhs.cb)
    }
}

impl AddAssign for AmplitudeForm {
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl Sub for AmplitudeForm {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Neg for AmplitudeForm {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.c0, -self.ca, -self.cb)
    }
}

impl Mul<Complex> for AmplitudeForm {
    type Output = Self;
    fn mul(self, rhs: Complex) -> Self {
        self.scale(rhs)
    }
}

impl Mul<f64> for AmplitudeForm {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        self.scale(rhs)
    }
}

impl fmt::Display for AmplitudeForm {
    /// Renders only the non-zero parts, e.g. `0.5*S_A + -0.5*S_B`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if self.c0 != Complex::ZERO {
            parts.push(format_complex(self.c0));
        }
        for (coeff, name) in [(self.ca, "S_A"), (self.cb, "S_B")] {
            if coeff != Complex::ZERO {
                if coeff.im == 0.0 || coeff.re == 0.0 {
                    parts.push(format!("{}*{name}", format_complex(coeff)));
                } else {
                    parts.push(format!("({})*{name}", format_complex(coeff)));
                }
            }
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

/// `|a - b| <= tol * max(1, |a|, |b|)`
pub fn approx_eq(a: Complex, b: Complex, tol: f64) -> bool {
    debug_assert!(tol > 0.0);
    (a - b).norm() <= tol * 1f64.max(a.norm()).max(b.norm())
}

/// Real-valued variant of [`approx_eq`].
pub fn approx_eq_real(a: f64, b: f64, tol: f64) -> bool {
    approx_eq(Complex::new(a, 0.0), Complex::new(b, 0.0), tol)
}

/// Deviation measured on the same scale as [`approx_eq`]: `approx_eq(a, b, tol)`
/// holds iff `relative_deviation(a, b) <= tol`.
pub fn relative_deviation(a: f64, b: f64) -> f64 {
    (a - b).abs() / 1f64.max(a.abs()).max(b.abs())
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("invalid complex literal {0:?}")]
pub struct ParseComplexError(pub String);

/// Parses `"a+bi"`, `"a-bi"`, `"a"`, `"bi"`, `"i"`, `"-i"` with decimal or
/// exponent literals.
pub fn parse_complex(text: &str) -> Result<Complex, ParseComplexError> {
    let err = || ParseComplexError(text.to_string());
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err(err());
    }
    let finite = |v: f64| if v.is_finite() { Ok(v) } else { Err(err()) };
    let Some(body) = s.strip_suffix('i') else {
        return Ok(Complex::new(finite(s.parse().map_err(|_| err())?)?, 0.0));
    };
    // Split at the last sign that is neither leading nor part of an exponent.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| matches!(bytes[i], b'+' | b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let (re_text, im_text) = match split {
        Some(i) => (&body[..i], &body[i..]),
        None => ("", body),
    };
    let im = match im_text {
        "" | "+" => 1.0,
        "-" => -1.0,
        t => t.parse::<f64>().map_err(|_| err())?,
    };
    let re = if re_text.is_empty() {
        0.0
    } else {
        re_text.parse::<f64>().map_err(|_| err())?
    };
    Ok(Complex::new(finite(re)?, finite(im)?))
}

/// Inverse of [`parse_complex`]; shortest round-trip float formatting.
pub fn format_complex(c: Complex) -> String {
    // -0.0 renders as "0"
    let re = if c.re == 0.0 { 0.0 } else { c.re };
    let im = if c.im == 0.0 { 0.0 } else { c.im };
    match (re == 0.0, im == 0.0) {
        (_, true) => format!("{re}"),
        (true, false) => format!("{im}i"),
        (false, false) if im < 0.0 => format!("{re}-{}i", -im),
        (false, false) => format!("{re}+{im}i"),
    }
}

/// Wrapper giving [`Complex`] `FromStr`/`Display` in the `a+bi` syntax.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexLiteral(pub Complex);

impl FromStr for ComplexLiteral {
    type Err = ParseComplexError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_complex(s).map(ComplexLiteral)
    }
}

impl fmt::Display for ComplexLiteral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_complex(self.0))
    }
}

/// Serde adapter storing a [`Complex`] as its `a+bi` literal.
pub mod complex_literal {
    use super::{format_complex, parse_complex, Complex};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(value: &Complex, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&format_complex(*value))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<Complex, D::Error> {
        let text = String::deserialize(deserializer)?;
        parse_complex(&text).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    #[test]
    fn eval_worked_example_total() {
        let k = 2.0 / 6f64.sqrt();
        let form = AmplitudeForm::new(Complex::ZERO, c(k, 0.0), c(k, 0.0));
        let v = form.eval(c(1.0, 0.0), c(1.0, 0.0));
        assert!(approx_eq(v, c(4.0 / 6f64.sqrt(), 0.0), 1e-12));
    }

    #[test]
    fn eval_zero_and_cancellation() {
        assert_eq!(AmplitudeForm::ZERO.eval(c(3.0, 1.0), c(-2.0, 5.0)), Complex::ZERO);
        let form = AmplitudeForm::new(c(1.0, 0.0), c(-1.0, 0.0), Complex::ZERO);
        assert_eq!(form.eval(c(1.0, 0.0), c(7.0, 0.0)), Complex::ZERO);
    }

    #[test]
    fn approx_eq_policy() {
        assert!(approx_eq(Complex::ZERO, Complex::ZERO, 1e-10));
        assert!(approx_eq(c(1.0, 0.0), c(1.0 + 1e-12, 0.0), 1e-10));
        assert!(!approx_eq(c(1.0, 0.0), c(1.1, 0.0), 1e-10));
        // relative regime for large magnitudes
        assert!(approx_eq(c(1e6, 0.0), c(1e6 + 1e-5, 0.0), 1e-10));
        assert!(!approx_eq(c(1e-3, 0.0), c(2e-3, 0.0), 1e-10));
    }

    #[test]
    fn parse_literals() {
        assert_eq!(parse_complex("0.3+0.1i").unwrap(), c(0.3, 0.1));
        assert_eq!(parse_complex("1").unwrap(), c(1.0, 0.0));
        assert_eq!(parse_complex("-2i").unwrap(), c(0.0, -2.0));
        assert_eq!(parse_complex("i").unwrap(), c(0.0, 1.0));
        assert_eq!(parse_complex("-i").unwrap(), c(0.0, -1.0));
        assert_eq!(parse_complex("1-i").unwrap(), c(1.0, -1.0));
        assert_eq!(parse_complex("1e-3-2.5e+1i").unwrap(), c(1e-3, -25.0));
        assert_eq!(parse_complex(" -0.5 + 2 i ").unwrap(), c(-0.5, 2.0));
        for bad in ["", "abc", "1+", "1+2j", "nan", "inf", "1++2i"] {
            assert!(parse_complex(bad).is_err(), "{bad:?} accepted");
        }
    }

    #[test]
    fn format_literals() {
        assert_eq!(format_complex(c(0.3, 0.1)), "0.3+0.1i");
        assert_eq!(format_complex(c(1.0, 0.0)), "1");
        assert_eq!(format_complex(c(0.0, -2.0)), "-2i");
        assert_eq!(format_complex(c(-0.0, 0.0)), "0");
        assert_eq!(format_complex(c(0.5, -0.25)), "0.5-0.25i");
    }

    #[test]
    fn display_form() {
        assert_eq!(AmplitudeForm::ZERO.to_string(), "0");
        assert_eq!(AmplitudeForm::along_a(0.5).to_string(), "0.5*S_A");
        let f = AmplitudeForm::new(c(1.0, 0.0), Complex::ZERO, c(1.0, 1.0));
        assert_eq!(f.to_string(), "1 + (1+1i)*S_B");
    }

    fn complex_strategy() -> impl Strategy<Value = Complex> {
        (-10.0..10.0f64, -10.0..10.0f64).prop_map(|(re, im)| Complex::new(re, im))
    }

    fn form_strategy() -> impl Strategy<Value = AmplitudeForm> {
        (complex_strategy(), complex_strategy(), complex_strategy()).prop_map(|(a, b, d)| AmplitudeForm::new(a, b, d))
    }

    proptest! {
        #[test]
        fn eval_is_linear(f in form_strategy(), g in form_strategy(), lambda in complex_strategy(),
                          sa in complex_strategy(), sb in complex_strategy()) {
            prop_assert!(approx_eq((f + g).eval(sa, sb), f.eval(sa, sb) + g.eval(sa, sb), 1e-12));
            prop_assert!(approx_eq((f * lambda).eval(sa, sb), lambda * f.eval(sa, sb), 1e-12));
        }

        #[test]
        fn literal_round_trip(z in complex_strategy()) {
            prop_assert_eq!(parse_complex(&format_complex(z)).unwrap(), z);
        }
    }
}
