use std::fmt::Debug;
use std::ops::Neg;

use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};

/// Field elements the tensor and form code is generic over: `f64` and exact
/// `BigRational`.
pub trait Scalar:
    num::Num + num::traits::NumAssignRef + Neg<Output = Self> + Clone + Debug + PartialOrd + Send + Sync + 'static
{
    fn as_f64(&self) -> f64;
    fn from_f64_lossless(x: f64) -> Option<Self>;
    fn abs_val(&self) -> Self;
}

impl Scalar for f64 {
    fn as_f64(&self) -> f64 {
        *self
    }
    fn from_f64_lossless(x: f64) -> Option<Self> {
        Some(x)
    }
    fn abs_val(&self) -> Self {
        self.abs()
    }
}

impl Scalar for BigRational {
    fn as_f64(&self) -> f64 {
        ratio_to_f64(self)
    }
    fn from_f64_lossless(x: f64) -> Option<Self> {
        BigRational::from_float(x)
    }
    fn abs_val(&self) -> Self {
        self.abs()
    }
}

/// Nearest-ish f64 of a big rational; falls back to a scaled division when
/// numerator or denominator overflow f64 on their own.
pub fn ratio_to_f64(r: &BigRational) -> f64 {
    if let Some(x) = ToPrimitive::to_f64(r) {
        if x.is_finite() {
            return x;
        }
    }
    let n = r.numer().to_f64().unwrap_or(f64::NAN);
    let d = r.denom().to_f64().unwrap_or(f64::NAN);
    n / d
}

/// Parse `p/q`, an integer, or a finite decimal (optionally with exponent)
/// into an exact rational.
pub fn parse_rational(token: &str) -> Option<BigRational> {
    let t = token.trim();
    if t.is_empty() {
        return None;
    }
    if let Some((p, q)) = t.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        if q.is_zero() {
            return None;
        }
        return Some(BigRational::new(p, q));
    }
    let (mantissa, exponent) = match t.find(['e', 'E']) {
        Some(pos) => (&t[..pos], t[pos + 1..].parse::<i64>().ok()?),
        None => (t, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((a, b)) => (a, b),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut value = BigRational::from_integer(all_digits.parse::<BigInt>().ok()?);
    let scale = exponent - frac_part.len() as i64;
    if scale.unsigned_abs() > 100_000 {
        return None;
    }
    let ten = BigRational::from_integer(BigInt::from(10));
    let pow = num::pow(ten, scale.unsigned_abs() as usize);
    if scale >= 0 {
        value *= pow;
    } else {
        value /= pow;
    }
    Some(if negative { -value } else { value })
}

/// `p/q`, or just `p` when the denominator is one.
pub fn format_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn rational(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}
