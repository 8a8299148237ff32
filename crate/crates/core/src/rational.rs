//! Exact rational values used throughout the crate.
//!
//! All welfare and fairness comparisons are strict inequalities over exact
//! rationals; floating point is only ever produced as a cosmetic
//! approximation for output.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

pub type Rational = num_rational::BigRational;

/// Rational from an unsigned integer.
pub fn rat_u64(x: u64) -> Rational {
    Rational::from_integer(BigInt::from(x))
}

/// Rational from a signed integer.
pub fn rat_i64(x: i64) -> Rational {
    Rational::from_integer(BigInt::from(x))
}

/// Parses `"p"`, `"p/q"` or a decimal string like `"3.25"` into an exact
/// rational. Exponent notation is rejected.
pub fn parse_rational(text: &str) -> Result<Rational, String> {
    let t = text.trim();
    if t.is_empty() {
        return Err("empty rational literal".to_string());
    }
    if let Some((num, den)) = t.split_once('/') {
        let n: BigInt = num
            .trim()
            .parse()
            .map_err(|_| format!("invalid numerator in `{t}`"))?;
        let d: BigInt = den
            .trim()
            .parse()
            .map_err(|_| format!("invalid denominator in `{t}`"))?;
        if d.is_zero() {
            return Err(format!("zero denominator in `{t}`"));
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((int_part, frac_part)) = t.split_once('.') {
        let int_part = if int_part.is_empty() { "0" } else { int_part };
        if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(format!("invalid decimal literal `{t}`"));
        }
        let negative = int_part.starts_with('-');
        let whole: BigInt = int_part
            .parse()
            .map_err(|_| format!("invalid decimal literal `{t}`"))?;
        let frac: BigInt = frac_part
            .parse()
            .map_err(|_| format!("invalid decimal literal `{t}`"))?;
        let scale = BigInt::from(10u32).pow(frac_part.len() as u32);
        let frac = Rational::new(if negative { -frac } else { frac }, scale);
        return Ok(Rational::from_integer(whole) + frac);
    }
    let n: BigInt = t
        .parse()
        .map_err(|_| format!("invalid integer literal `{t}`"))?;
    Ok(Rational::from_integer(n))
}

/// Formats a rational exactly, as `"p"` or `"p/q"`.
pub fn format_rational(r: &Rational) -> String {
    if r.denom() == &BigInt::from(1) {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Best-effort `f64` approximation, for display next to the exact form.
pub fn approx_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}
