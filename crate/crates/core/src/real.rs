//! Ball arithmetic on fixed-point big integers.
//!
//! A [`HighPrecReal`] stores a midpoint `mid` and a radius `rad`, both in
//! units of `2^-prec`, and stands for every real in
//! `[(mid - rad) / 2^prec, (mid + rad) / 2^prec]`. Every operation rounds the
//! midpoint and grows the radius so that the true result stays inside the
//! ball. Errors are absolute, which is what the surface-entropy work needs:
//! it subtracts quantities of size `2^k` and keeps an answer of size `O(k)`.
//!
//! Logarithms come from [`LnContext`], which caches `ln 2` for one working
//! precision.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HighPrecReal {
    mid: BigInt,
    rad: BigUint,
    prec: u32,
}

fn pow2(bits: u32) -> BigUint {
    BigUint::one() << bits
}

/// `round(n / 2^k)`, ties away from zero.
fn shr_round(n: &BigInt, k: u32) -> BigInt {
    if k == 0 {
        return n.clone();
    }
    let half = BigInt::one() << (k - 1);
    if n.is_negative() {
        -((-n + half) >> k)
    } else {
        (n + half) >> k
    }
}

fn shr_ceil(n: &BigUint, k: u32) -> BigUint {
    if k == 0 {
        return n.clone();
    }
    let mask = pow2(k) - 1u32;
    let q = n >> k;
    if (n & mask).is_zero() {
        q
    } else {
        q + 1u32
    }
}

/// `round(n / d)` for `d > 0`.
fn div_round(n: &BigInt, d: &BigInt) -> BigInt {
    let (q, r) = n.div_mod_floor(d);
    if (&r << 1u32) >= *d {
        q + 1
    } else {
        q
    }
}

fn div_ceil_u(n: &BigUint, d: &BigUint) -> BigUint {
    let (q, r) = n.div_rem(d);
    if r.is_zero() {
        q
    } else {
        q + 1u32
    }
}

/// `x * 2^e` without overflowing intermediate powers.
fn ldexp(mut x: f64, mut e: i64) -> f64 {
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
        if x.is_infinite() {
            return x;
        }
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
        if x == 0.0 {
            return x;
        }
    }
    x * 2f64.powi(e as i32)
}

fn bigint_to_f64_scaled(n: &BigInt, prec: u32) -> f64 {
    let bits = n.bits();
    if bits <= 1000 {
        return ldexp(n.to_f64().unwrap_or(f64::NAN), -(prec as i64));
    }
    let shift = bits - 64;
    let top = (n >> shift).to_f64().unwrap_or(f64::NAN);
    ldexp(top, shift as i64 - prec as i64)
}

impl HighPrecReal {
    pub fn zero(prec: u32) -> Self {
        HighPrecReal {
            mid: BigInt::zero(),
            rad: BigUint::zero(),
            prec,
        }
    }

    pub fn from_integer(n: &BigInt, prec: u32) -> Self {
        HighPrecReal {
            mid: n << prec,
            rad: BigUint::zero(),
            prec,
        }
    }

    pub fn from_u64(n: u64, prec: u32) -> Self {
        Self::from_integer(&BigInt::from(n), prec)
    }

    /// Nearest ball to `num / den`; panics on a zero denominator.
    pub fn from_ratio(num: &BigInt, den: &BigInt, prec: u32) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        let (num, den) = if den.is_negative() {
            (-num, -den)
        } else {
            (num.clone(), den.clone())
        };
        let scaled = num << prec;
        let (q, r) = scaled.div_mod_floor(&den);
        if r.is_zero() {
            HighPrecReal {
                mid: q,
                rad: BigUint::zero(),
                prec,
            }
        } else {
            HighPrecReal {
                mid: div_round(&scaled, &den),
                rad: BigUint::one(),
                prec,
            }
        }
    }

    pub fn from_rational(x: &BigRational, prec: u32) -> Self {
        Self::from_ratio(x.numer(), x.denom(), prec)
    }

    /// Builds a ball directly from scaled midpoint and radius.
    pub fn from_parts(mid: BigInt, rad: BigUint, prec: u32) -> Self {
        HighPrecReal { mid, rad, prec }
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn mid_scaled(&self) -> &BigInt {
        &self.mid
    }

    pub fn rad_scaled(&self) -> &BigUint {
        &self.rad
    }

    /// Re-expresses the ball at another precision; lowering rounds outward.
    pub fn with_prec(&self, prec: u32) -> Self {
        match prec.cmp(&self.prec) {
            Ordering::Equal => self.clone(),
            Ordering::Greater => {
                let k = prec - self.prec;
                HighPrecReal {
                    mid: &self.mid << k,
                    rad: &self.rad << k,
                    prec,
                }
            }
            Ordering::Less => {
                let k = self.prec - prec;
                let mid = shr_round(&self.mid, k);
                let exact = (&self.mid - (&mid << k)).is_zero();
                let mut rad = shr_ceil(&self.rad, k);
                if !exact {
                    rad += 1u32;
                }
                HighPrecReal { mid, rad, prec }
            }
        }
    }

    fn aligned(&self, other: &Self) -> (Self, Self) {
        let p = self.prec.max(other.prec);
        (self.with_prec(p), other.with_prec(p))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let (a, b) = self.aligned(other);
        let p = a.prec;
        let prod = &a.mid * &b.mid;
        let mid = shr_round(&prod, p);
        let am = a.mid.magnitude();
        let bm = b.mid.magnitude();
        let spread = am * &b.rad + bm * &a.rad + &a.rad * &b.rad;
        let mut rad = shr_ceil(&spread, p);
        if !(prod - (&mid << p)).is_zero() {
            rad += 1u32;
        }
        HighPrecReal { mid, rad, prec: p }
    }

    pub fn mul_int(&self, k: &BigInt) -> Self {
        HighPrecReal {
            mid: &self.mid * k,
            rad: &self.rad * k.magnitude(),
            prec: self.prec,
        }
    }

    /// Division by a nonzero integer.
    pub fn div_int(&self, k: &BigInt) -> Self {
        assert!(!k.is_zero(), "division by zero");
        let (mid_in, k) = if k.is_negative() {
            (-&self.mid, -k)
        } else {
            (self.mid.clone(), k.clone())
        };
        let (_, r) = mid_in.div_mod_floor(&k);
        let mid = div_round(&mid_in, &k);
        let mut rad = div_ceil_u(&self.rad, k.magnitude());
        if !r.is_zero() {
            rad += 1u32;
        }
        HighPrecReal {
            mid,
            rad,
            prec: self.prec,
        }
    }

    pub fn mul_rational(&self, x: &BigRational) -> Self {
        self.mul_int(x.numer()).div_int(x.denom())
    }

    /// Ball division; `None` when the divisor ball contains zero.
    pub fn checked_div(&self, other: &Self) -> Option<Self> {
        let (a, b) = self.aligned(other);
        let p = a.prec;
        let bmag = b.mid.magnitude().clone();
        if bmag <= b.rad {
            return None;
        }
        let num = &a.mid << p;
        let mid = div_round(&num, &b.mid);
        // |a/b - a0/b0| <= (|a0| rb + |b0| ra) / (|b0| (|b0| - rb))
        let spread = a.mid.magnitude() * &b.rad + &bmag * &a.rad;
        let denom = &bmag * (&bmag - &b.rad);
        let rad = div_ceil_u(&(spread << p), &denom) + 1u32;
        Some(HighPrecReal { mid, rad, prec: p })
    }

    /// Adds `extra` (a nonnegative rational) to the radius.
    pub fn widen(&self, extra: &BigRational) -> Self {
        let scaled = extra.abs() * BigRational::from_integer(BigInt::from(pow2(self.prec)));
        let add = scaled.ceil().to_integer();
        HighPrecReal {
            mid: self.mid.clone(),
            rad: &self.rad + add.magnitude(),
            prec: self.prec,
        }
    }

    pub fn lower(&self) -> BigRational {
        BigRational::new(
            &self.mid - BigInt::from(self.rad.clone()),
            BigInt::from(pow2(self.prec)),
        )
    }

    pub fn upper(&self) -> BigRational {
        BigRational::new(
            &self.mid + BigInt::from(self.rad.clone()),
            BigInt::from(pow2(self.prec)),
        )
    }

    pub fn mid_rational(&self) -> BigRational {
        BigRational::new(self.mid.clone(), BigInt::from(pow2(self.prec)))
    }

    pub fn to_f64(&self) -> f64 {
        bigint_to_f64_scaled(&self.mid, self.prec)
    }

    /// Radius as an `f64` (rounded, so only for reporting).
    pub fn error_bound(&self) -> f64 {
        bigint_to_f64_scaled(&BigInt::from(self.rad.clone()), self.prec)
    }

    /// Upper bound on `|x|` over the ball, as `f64`.
    pub fn abs_upper_f64(&self) -> f64 {
        let m = BigInt::from(self.mid.magnitude() + &self.rad);
        bigint_to_f64_scaled(&m, self.prec)
    }

    pub fn contains_rational(&self, x: &BigRational) -> bool {
        &self.lower() <= x && x <= &self.upper()
    }

    pub fn contains_zero(&self) -> bool {
        self.mid.magnitude() <= &self.rad
    }

    pub fn overlaps(&self, other: &Self) -> bool {
        (self - other).contains_zero()
    }

    /// `true` when every point of `self` is below every point of `other`.
    pub fn definitely_lt(&self, other: &Self) -> bool {
        let d = other - self;
        d.mid.is_positive() && d.mid.magnitude() > &d.rad
    }

    pub fn is_definitely_positive(&self) -> bool {
        self.mid.is_positive() && self.mid.magnitude() > &self.rad
    }

    /// Upper bound on `|self - other|`.
    pub fn distance_upper(&self, other: &Self) -> f64 {
        (self - other).abs_upper_f64()
    }

    /// Smallest ball containing the pointwise maximum of the two balls.
    pub fn max_hull(&self, other: &Self) -> Self {
        let lo = self.lower().max(other.lower());
        let hi = self.upper().max(other.upper());
        Self::from_bounds(&lo, &hi, self.prec.max(other.prec))
    }

    /// Ball covering the interval `[lo, hi]`.
    pub fn from_bounds(lo: &BigRational, hi: &BigRational, prec: u32) -> Self {
        let two = BigRational::from_integer(BigInt::from(2));
        let mid = (lo + hi) / &two;
        let half = (hi - lo) / two;
        Self::from_rational(&mid, prec).widen(&half)
    }

    /// Natural logarithm; `None` unless the ball is strictly positive.
    pub fn ln(&self, ctx: &LnContext) -> Option<Self> {
        if !self.is_definitely_positive() {
            return None;
        }
        let mid = self.mid.magnitude().clone();
        let center = ctx.ln_ratio(&mid, &pow2(self.prec));
        if self.rad.is_zero() {
            return Some(center);
        }
        // |ln x - ln m| <= rad / (m - rad)
        let bound = BigRational::new(
            BigInt::from(self.rad.clone()),
            BigInt::from(mid - &self.rad),
        );
        Some(center.widen(&bound))
    }

    /// Fixed-point decimal rendering of the midpoint with `digits` fractional
    /// digits.
    pub fn to_decimal_string(&self, digits: usize) -> String {
        let scale = BigInt::from(10u32).pow(digits as u32);
        let q = shr_round(&(&self.mid * &scale), self.prec);
        let neg = q.is_negative();
        let s = q.magnitude().to_str_radix(10);
        let s = if s.len() <= digits {
            format!("{}{}", "0".repeat(digits + 1 - s.len()), s)
        } else {
            s
        };
        let (int_part, frac_part) = s.split_at(s.len() - digits);
        let sign = if neg { "-" } else { "" };
        if digits == 0 {
            format!("{sign}{int_part}")
        } else {
            format!("{sign}{int_part}.{frac_part}")
        }
    }

    /// Scientific rendering with `sig` significant digits, for values that
    /// may be very large.
    pub fn to_sci_string(&self, sig: usize) -> String {
        let v = self.mid_rational();
        if v.is_zero() {
            return "0".to_string();
        }
        let neg = v.is_negative();
        let v = v.abs();
        // Estimate decimal exponent, then fix it up exactly.
        let est = self.to_f64().abs();
        let mut exp10: i64 = if est.is_finite() && est > 0.0 {
            est.log10().floor() as i64
        } else {
            let bits = self.mid.bits() as i64 - self.prec as i64;
            (bits as f64 * std::f64::consts::LOG10_2).floor() as i64
        };
        let ten = BigRational::from_integer(BigInt::from(10));
        let pow10 = |e: i64| -> BigRational {
            if e >= 0 {
                BigRational::from_integer(BigInt::from(10u32).pow(e as u32))
            } else {
                BigRational::new(BigInt::one(), BigInt::from(10u32).pow((-e) as u32))
            }
        };
        loop {
            let lo = pow10(exp10);
            if v < lo {
                exp10 -= 1;
            } else if v >= &lo * &ten {
                exp10 += 1;
            } else {
                break;
            }
        }
        let scaled = &v / pow10(exp10 - sig as i64 + 1);
        let mut digits = scaled.round().to_integer();
        if digits >= BigInt::from(10u32).pow(sig as u32) {
            digits /= 10;
            exp10 += 1;
        }
        let ds = digits.to_str_radix(10);
        let (head, tail) = ds.split_at(1);
        let sign = if neg { "-" } else { "" };
        if tail.is_empty() {
            format!("{sign}{head}e{exp10}")
        } else {
            format!("{sign}{head}.{tail}e{exp10}")
        }
    }
}

impl fmt::Display for HighPrecReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f.precision().unwrap_or(12);
        write!(f, "{}", self.to_decimal_string(digits))
    }
}

impl Add for &HighPrecReal {
    type Output = HighPrecReal;
    fn add(self, rhs: &HighPrecReal) -> HighPrecReal {
        let (a, b) = self.aligned(rhs);
        HighPrecReal {
            mid: a.mid + b.mid,
            rad: a.rad + b.rad,
            prec: a.prec,
        }
    }
}

impl Add for HighPrecReal {
    type Output = HighPrecReal;
    fn add(self, rhs: HighPrecReal) -> HighPrecReal {
        &self + &rhs
    }
}

impl Sub for &HighPrecReal {
    type Output = HighPrecReal;
    fn sub(self, rhs: &HighPrecReal) -> HighPrecReal {
        let (a, b) = self.aligned(rhs);
        HighPrecReal {
            mid: a.mid - b.mid,
            rad: a.rad + b.rad,
            prec: a.prec,
        }
    }
}

impl Sub for HighPrecReal {
    type Output = HighPrecReal;
    fn sub(self, rhs: HighPrecReal) -> HighPrecReal {
        &self - &rhs
    }
}

impl Neg for HighPrecReal {
    type Output = HighPrecReal;
    fn neg(self) -> HighPrecReal {
        HighPrecReal {
            mid: -self.mid,
            rad: self.rad,
            prec: self.prec,
        }
    }
}

impl std::iter::Sum for HighPrecReal {
    fn sum<I: Iterator<Item = HighPrecReal>>(iter: I) -> Self {
        iter.fold(HighPrecReal::zero(0), |acc, x| &acc + &x)
    }
}

/// Guard bits carried inside series evaluation.
const GUARD_BITS: u32 = 64;

/// Logarithm evaluator for one target precision.
///
/// `ln(n/d)` is reduced to `e ln 2 + 2 atanh(z)` with `|z| <= 1/5`; ratios
/// already close to one give tiny `z` and converge in a handful of terms,
/// which is what makes long runs of consecutive word-count ratios cheap.
#[derive(Clone, Debug)]
pub struct LnContext {
    prec: u32,
    work: u32,
    ln2: BigInt,
    ln2_err: u64,
}

/// `2 atanh(a/b)` in fixed point with `work` fractional bits, together with
/// an error bound in units of `2^-work`. Requires `|a/b| <= 1/3`.
fn two_atanh(a: &BigInt, b: &BigInt, work: u32) -> (BigInt, u64) {
    debug_assert!(b.is_positive());
    debug_assert!((a.magnitude() * 3u32) <= *b.magnitude());
    let negative = a.is_negative();
    let z = {
        let scaled: BigUint = a.magnitude() << work;
        let (q, r) = scaled.div_rem(b.magnitude());
        if (r << 1u32) >= *b.magnitude() {
            q + 1u32
        } else {
            q
        }
    };
    let z2 = (&z * &z) >> work;
    let mut term = z;
    let mut sum = BigUint::zero();
    let mut k: u64 = 0;
    while !term.is_zero() {
        sum += &term / BigUint::from(2 * k + 1);
        term = (&term * &z2) >> work;
        k += 1;
    }
    // Per-term error stays below 4.5 ulp for |z| <= 1/3; the neglected tail
    // adds at most 6 ulp.
    let err = 2 * (5 * (k + 1) + 8);
    let value = BigInt::from_biguint(Sign::Plus, sum << 1u32);
    (if negative { -value } else { value }, err)
}

impl LnContext {
    pub fn new(prec: u32) -> Self {
        let work = prec + GUARD_BITS;
        let (ln2, ln2_err) = two_atanh(&BigInt::one(), &BigInt::from(3), work);
        LnContext {
            prec,
            work,
            ln2,
            ln2_err,
        }
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn ln2(&self) -> HighPrecReal {
        self.finish(self.ln2.clone(), self.ln2_err)
    }

    fn finish(&self, value: BigInt, err: u64) -> HighPrecReal {
        HighPrecReal {
            mid: value,
            rad: BigUint::from(err),
            prec: self.work,
        }
        .with_prec(self.prec)
    }

    /// `ln(num / den)` for positive integers.
    pub fn ln_ratio(&self, num: &BigUint, den: &BigUint) -> HighPrecReal {
        assert!(!num.is_zero() && !den.is_zero(), "logarithm of zero");
        if num == den {
            return HighPrecReal::zero(self.prec);
        }
        // Pick e with num / (den 2^e) in [3/4, 3/2).
        let mut e: i64 = num.bits() as i64 - den.bits() as i64;
        let scaled = |e: i64| -> (BigUint, BigUint) {
            if e >= 0 {
                (num.clone(), den << (e as u64))
            } else {
                (num << ((-e) as u64), den.clone())
            }
        };
        let (mut n, mut d) = scaled(e);
        if &n * 4u32 < &d * 3u32 {
            e -= 1;
            (n, d) = scaled(e);
        } else if &n * 2u32 >= &d * 3u32 {
            e += 1;
            (n, d) = scaled(e);
        }
        let a = BigInt::from(n.clone()) - BigInt::from(d.clone());
        let b = BigInt::from(n + d);
        let (mut value, mut err) = two_atanh(&a, &b, self.work);
        if e != 0 {
            value += &self.ln2 * BigInt::from(e);
            err += self.ln2_err * e.unsigned_abs();
        }
        self.finish(value, err + 1)
    }

    pub fn ln_uint(&self, n: &BigUint) -> HighPrecReal {
        self.ln_ratio(n, &BigUint::one())
    }

    pub fn ln_u64(&self, n: u64) -> HighPrecReal {
        self.ln_uint(&BigUint::from(n))
    }

    pub fn ln_rational(&self, x: &BigRational) -> Option<HighPrecReal> {
        if !x.is_positive() {
            return None;
        }
        Some(self.ln_ratio(x.numer().magnitude(), x.denom().magnitude()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn ln2_digits() {
        let ctx = LnContext::new(200);
        let v = ctx.ln2();
        assert_eq!(
            v.to_decimal_string(40),
            "0.6931471805599453094172321214581765680755"
        );
        assert!(v.error_bound() < 1e-55);
    }

    #[test]
    fn ln_known_values() {
        let ctx = LnContext::new(128);
        assert!((ctx.ln_u64(10).to_f64() - 10f64.ln()).abs() < 1e-15);
        assert!((ctx.ln_u64(3).to_f64() - 3f64.ln()).abs() < 1e-15);
        assert!(ctx.ln_u64(1).contains_zero());
        let q = ctx.ln_rational(&rat(1, 7)).unwrap();
        assert!((q.to_f64() + 7f64.ln()).abs() < 1e-15);
        // ln 10 to 30 digits
        assert_eq!(
            ctx.ln_u64(10).to_decimal_string(30),
            "2.302585092994045684017991454684"
        );
    }

    #[test]
    fn ln_of_huge_integer() {
        let ctx = LnContext::new(256);
        let n = BigUint::from(3u32).pow(1000);
        let v = ctx.ln_uint(&n);
        let expected = ctx.ln_u64(3).mul_int(&BigInt::from(1000));
        assert!(v.overlaps(&expected));
        assert!((v.to_f64() - 1000.0 * 3f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn ball_encloses_higher_precision_recomputation() {
        let lo = LnContext::new(80);
        let hi = LnContext::new(400);
        for n in [2u64, 5, 17, 1_000_003, u64::MAX] {
            let a = lo.ln_u64(n);
            let b = hi.ln_u64(n);
            assert!(a.contains_rational(&b.mid_rational()), "n = {n}");
        }
        let x = lo.ln_u64(7).mul(&lo.ln_u64(11));
        let y = hi.ln_u64(7).mul(&hi.ln_u64(11));
        assert!(x.contains_rational(&y.mid_rational()));
        let q = lo.ln_u64(7).checked_div(&lo.ln_u64(11)).unwrap();
        let r = hi.ln_u64(7).checked_div(&hi.ln_u64(11)).unwrap();
        assert!(q.contains_rational(&r.mid_rational()));
    }

    #[test]
    fn rational_round_trip_and_rounding() {
        let x = HighPrecReal::from_rational(&rat(1, 3), 64);
        assert!(x.contains_rational(&rat(1, 3)));
        let y = x.with_prec(10);
        assert!(y.contains_rational(&rat(1, 3)));
        assert!(HighPrecReal::from_rational(&rat(3, 4), 8).rad_scaled().is_zero());
        let d = HighPrecReal::from_u64(10, 32).div_int(&BigInt::from(3));
        assert!(d.contains_rational(&rat(10, 3)));
    }

    #[test]
    fn decimal_rendering() {
        let x = HighPrecReal::from_rational(&rat(-5, 4), 16);
        assert_eq!(x.to_decimal_string(3), "-1.250");
        assert_eq!(HighPrecReal::from_rational(&rat(1, 8), 16).to_decimal_string(2), "0.13");
        assert_eq!(HighPrecReal::from_u64(12345, 8).to_sci_string(3), "1.23e4");
        assert_eq!(HighPrecReal::from_rational(&rat(-1, 400), 40).to_sci_string(2), "-2.5e-3");
    }

    #[test]
    fn division_by_ball_containing_zero_is_refused() {
        let z = HighPrecReal::from_parts(BigInt::from(1), BigUint::from(2u32), 4);
        assert!(HighPrecReal::from_u64(1, 4).checked_div(&z).is_none());
    }

    #[test]
    fn ln_of_ball_covers_endpoints() {
        let ctx = LnContext::new(100);
        let x = HighPrecReal::from_rational(&rat(3, 2), 100).widen(&rat(1, 1000));
        let l = x.ln(&ctx).unwrap();
        let lo = ctx.ln_rational(&(rat(3, 2) - rat(1, 1000))).unwrap();
        let hi = ctx.ln_rational(&(rat(3, 2) + rat(1, 1000))).unwrap();
        assert!(l.contains_rational(&lo.mid_rational()));
        assert!(l.contains_rational(&hi.mid_rational()));
    }
}
