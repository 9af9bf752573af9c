//! Small helpers around [`rug::Rational`] shared by the exact layers.

use rug::ops::Pow;
use rug::{Integer, Rational};

use crate::error::{Error, Result};

/// Renders a rational as `num/den`, including integers (`-2/1`).
pub fn to_fraction_string(x: &Rational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// Parses `num/den` or a bare integer. The result is reduced.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational number: {s:?}"));
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num: Integer = num.parse().map_err(|_| bad())?;
    let den: Integer = den.parse().map_err(|_| bad())?;
    if den == 0 {
        return Err(Error::Parse(format!("zero denominator in {s:?}")));
    }
    Ok(Rational::from((num, den)))
}

pub fn binomial(n: u32, k: u32) -> Integer {
    if k > n {
        return Integer::new();
    }
    Integer::from(Integer::binomial_u(n, k))
}

pub fn pow(base: &Rational, exp: u32) -> Rational {
    Rational::from(base.pow(exp as i32))
}

/// Approximate `log2 |x|`; `-inf` for zero. Good to a fraction of a bit,
/// which is all the precision budgeting needs.
pub fn log2_abs(x: &Rational) -> f64 {
    if *x == 0 {
        return f64::NEG_INFINITY;
    }
    log2_integer(x.numer()) - log2_integer(x.denom())
}

fn log2_integer(x: &Integer) -> f64 {
    let bits = x.significant_bits();
    if bits <= 64 {
        return x.to_f64().abs().log2();
    }
    let shift = bits - 64;
    let top = Integer::from(x >> shift);
    top.to_f64().abs().log2() + shift as f64
}
