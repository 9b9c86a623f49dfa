use std::str::FromStr;

use mis_lab::{BigInt, BigRational, BigUint, MisError, Result};

pub fn big_uint(field: &str, s: &str) -> Result<BigUint> {
    BigUint::from_str(s.trim()).map_err(|_| invalid(field, format!("{s:?} is not a non-negative integer")))
}

/// Accepts `a/b`, decimals such as `-0.25`, and exponents such as `1e-3`.
pub fn rational(field: &str, s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || invalid(field, format!("{s:?} is not a rational number"));
    if let Some((n, d)) = s.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
        let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
        if d == BigInt::from(0) {
            return Err(invalid(field, "zero denominator"));
        }
        return Ok(BigRational::new(n, d));
    }
    let (mantissa, exp) = match s.split_once(['e', 'E']) {
        Some((m, e)) => (m, i32::from_str(e).map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all = format!("{int_part}{frac_part}");
    let mut num = BigInt::from_str(if all.is_empty() { "0" } else { &all }).map_err(|_| bad())?;
    if neg {
        num = -num;
    }
    let scale = exp - frac_part.len() as i32;
    if scale.unsigned_abs() > 10_000 {
        return Err(invalid(field, "exponent out of range"));
    }
    let ten = BigInt::from(10u32);
    Ok(if scale >= 0 {
        BigRational::from_integer(num * ten.pow(scale as u32))
    } else {
        BigRational::new(num, ten.pow(scale.unsigned_abs()))
    })
}

pub fn u32_list(field: &str, s: &str) -> Result<Vec<u32>> {
    let mut out = Vec::new();
    for part in s.split(',') {
        let part = part.trim();
        if let Some((a, b)) = part.split_once("..") {
            let a: u32 = a.parse().map_err(|_| invalid(field, format!("bad range {part:?}")))?;
            let b: u32 = b.trim_start_matches('=').parse().map_err(|_| invalid(field, format!("bad range {part:?}")))?;
            if a > b {
                return Err(invalid(field, format!("empty range {part:?}")));
            }
            out.extend(a..=b);
        } else {
            out.push(part.parse().map_err(|_| invalid(field, format!("{part:?} is not an integer")))?);
        }
    }
    Ok(out)
}

fn invalid(field: &str, reason: impl Into<String>) -> MisError {
    MisError::InvalidSpec {
        field: field.into(),
        reason: reason.into(),
    }
}
