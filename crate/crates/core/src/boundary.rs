//! Boundary complexity along regions `ℕ_m \ ℕ_{f(m)}` whose inner box grows
//! at speed ratio `τ`, and the inverse problem of realizing a target value.
//!
//! For `1/P^ℓ < τ <= 1/P^{ℓ-1}` the limit is
//! `(1/(1−τ)) Σ_i c_i(τ) ln|Ω_i|` with
//!
//! * `c_i = (1 − 1/P)(P − 1)/P^i` for `i <= ℓ − 2`,
//! * `c_{ℓ-1} = (1 − 1/P)/P^{ℓ-2} − 1/P^{ℓ-1} + τ`,
//! * `c_ℓ = 1/P^{ℓ-1} − τ`.
//!
//! The numerator is affine in `τ`, so a target value inverts in closed form.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::count::{log_pattern_count_region, mis_entropy_bits, BoundaryRegion, MisSpec};
use crate::error::{MisError, Result};
use crate::lattice::{LatticeBox, MultiplierVector};
use crate::real::HighPrecReal;

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn inv_pow(p: &BigUint, e: u32) -> BigRational {
    BigRational::new(BigInt::one(), BigInt::from(p.pow(e)))
}

/// Unique `ℓ >= 1` with `1/P^ℓ < τ <= 1/P^{ℓ-1}`.
pub fn classify_level(tau: &BigRational, p_total: &BigUint) -> Result<u32> {
    if !tau.is_positive() {
        return Err(MisError::ZeroTau);
    }
    if *tau > BigRational::one() {
        return Err(MisError::invalid("tau", format!("{tau} exceeds 1")));
    }
    let mut ell = 1u32;
    while *tau <= inv_pow(p_total, ell) {
        ell += 1;
    }
    Ok(ell)
}

/// Numerator coefficients `c_1, …, c_ℓ` (index 0 unused) on band `ℓ`,
/// evaluated at `τ`.
fn band_coefficients(p_total: &BigUint, ell: u32, tau: &BigRational) -> Vec<BigRational> {
    let p = BigRational::from_integer(BigInt::from(p_total.clone()));
    let one = BigRational::one();
    let keep = &one - p.recip();
    let mut c = vec![BigRational::zero(); ell as usize + 1];
    for (i, ci) in c.iter_mut().enumerate().take(ell as usize - 1).skip(1) {
        *ci = &keep * (&p - &one) * inv_pow(p_total, i as u32);
    }
    if ell >= 2 {
        c[ell as usize - 1] = &keep * inv_pow(p_total, ell - 2) - inv_pow(p_total, ell - 1) + tau;
    }
    c[ell as usize] = inv_pow(p_total, ell - 1) - tau;
    c
}

/// Level and numerator coefficients `c_1, …, c_ℓ` (index 0 unused).
pub fn boundary_coefficients(p_total: &BigUint, tau: &BigRational) -> Result<(u32, Vec<BigRational>)> {
    let ell = classify_level(tau, p_total)?;
    Ok((ell, band_coefficients(p_total, ell, tau)))
}

/// Closed-form boundary complexity at speed ratio `τ`, within `2^-prec`.
/// `τ = 0` gives the topological entropy.
pub fn h_boundary(mis: &MisSpec, tau: &BigRational, prec: u32) -> Result<HighPrecReal> {
    if tau.is_zero() {
        return mis_entropy_bits(mis, prec);
    }
    if *tau == BigRational::one() {
        return Err(MisError::DegenerateRegion);
    }
    let (ell, c) = boundary_coefficients(&mis.product(), tau)?;
    let wp = prec + 16;
    let logs = mis.omega.word_logs(ell as usize, wp)?;
    let mut acc = HighPrecReal::zero(wp);
    for i in 1..=ell as usize {
        if !c[i].is_zero() {
            acc = &acc + &logs[i].mul_rational(&c[i]);
        }
    }
    let scale = (BigRational::one() - tau).recip();
    Ok(acc.mul_rational(&scale).with_prec(prec))
}

/// `A_k`, the boundary complexity at `τ = 1/P^{k-1}`; the values on level
/// `k` fill `(A_{k+1}, A_k]`.
pub fn thresholds_a(mis: &MisSpec, k: u32, prec: u32) -> Result<HighPrecReal> {
    if k < 2 {
        return Err(MisError::invalid("k", "thresholds start at k = 2"));
    }
    h_boundary(mis, &inv_pow(&mis.product(), k - 1), prec)
}

/// Per-axis slopes `f_k(m) = ⌊tau_k m⌋`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpeedSpec {
    taus: Vec<BigRational>,
}

/// Denominator bits used when splitting `τ` across axes.
const SPLIT_BITS: u32 = 64;

impl SpeedSpec {
    pub fn new(taus: Vec<BigRational>) -> Result<Self> {
        if taus.is_empty() {
            return Err(MisError::invalid("speed", "need at least one axis"));
        }
        for (k, t) in taus.iter().enumerate() {
            if t.is_negative() || *t > BigRational::one() {
                return Err(MisError::invalid("speed", format!("tau_{} = {t} outside [0, 1]", k + 1)));
            }
        }
        Ok(SpeedSpec { taus })
    }

    pub fn taus(&self) -> &[BigRational] {
        &self.taus
    }

    /// `τ = ∏ tau_k`.
    pub fn ratio(&self) -> BigRational {
        self.taus.iter().fold(BigRational::one(), |a, t| a * t)
    }

    /// Splits `τ` so that every axis sits in the same level band
    /// `1/p_k^ℓ < tau_k <= 1/p_k^{ℓ-1}`: with `τ = P^{θ−ℓ}`, `θ ∈ (0, 1]`,
    /// axis `k` gets `p_k^{θ−ℓ}`. All but the last axis are rounded to
    /// dyadic rationals; the last one absorbs the rounding exactly.
    pub fn balanced(tau: &BigRational, p: &MultiplierVector) -> Result<Self> {
        let d = p.dim();
        if d == 1 {
            return Self::new(vec![tau.clone()]);
        }
        if tau.is_zero() {
            return Self::new(vec![BigRational::zero(); d]);
        }
        if *tau == BigRational::one() {
            return Self::new(vec![BigRational::one(); d]);
        }
        let ell = classify_level(tau, &p.product())?;
        let ps = p.as_slice();
        if *tau == inv_pow(&p.product(), ell - 1) {
            return Self::new(ps.iter().map(|&pk| inv_pow(&BigUint::from(pk), ell - 1)).collect());
        }
        let ln_tau = ln_rational_f64(tau);
        let ln_p = (p.product().to_f64().unwrap_or(f64::MAX)).ln();
        let theta = (ln_tau + ell as f64 * ln_p) / ln_p;
        let mut taus = Vec::with_capacity(d);
        let mut prod = BigRational::one();
        for &pk in &ps[..d - 1] {
            let v = (pk as f64).powf(theta - ell as f64);
            let t = dyadic(v, SPLIT_BITS);
            prod *= &t;
            taus.push(t);
        }
        taus.push(tau / prod);
        for (k, (t, &pk)) in taus.iter().zip(ps).enumerate() {
            let pk = BigUint::from(pk);
            if !(*t > inv_pow(&pk, ell) && *t <= inv_pow(&pk, ell - 1)) {
                return Err(MisError::DegenerateSpeed(format!(
                    "axis {} slope {} leaves band {} of p = {}",
                    k + 1,
                    t.to_f64().unwrap_or(f64::NAN),
                    ell,
                    pk
                )));
            }
        }
        Self::new(taus)
    }

    /// Inner box `⌊tau_k m_k⌋`.
    pub fn inner_box(&self, outer: &LatticeBox) -> Result<LatticeBox> {
        if outer.dim() != self.taus.len() {
            return Err(MisError::invalid("speed", "dimension differs from the box"));
        }
        LatticeBox::new(
            outer
                .sides()
                .iter()
                .zip(&self.taus)
                .map(|(m, t)| {
                    (BigRational::from_integer(BigInt::from(m.clone())) * t)
                        .floor()
                        .to_integer()
                        .to_biguint()
                        .expect("nonnegative")
                })
                .collect(),
        )
    }
}

fn ln_rational_f64(x: &BigRational) -> f64 {
    let n = x.numer();
    let d = x.denom();
    let f = |v: &BigInt| -> f64 {
        let bits = v.bits();
        if bits <= 1000 {
            v.to_f64().unwrap_or(f64::NAN).ln()
        } else {
            let shift = bits - 60;
            (v >> shift).to_f64().unwrap_or(f64::NAN).ln() + shift as f64 * std::f64::consts::LN_2
        }
    };
    f(n) - f(d)
}

fn dyadic(v: f64, bits: u32) -> BigRational {
    let scaled = (v * 2f64.powi(bits as i32)).round();
    BigRational::new(BigInt::from(scaled as u128), BigInt::one() << bits)
}

/// Result of inverting the boundary complexity.
#[derive(Clone, Debug)]
pub struct RealizationResult {
    /// Level band of `τ`; `None` stands for `τ = 0`.
    pub level: Option<u32>,
    pub tau: BigRational,
    pub achieved: HighPrecReal,
}

/// Steps allowed when walking down the thresholds `A_k`.
const MAX_LEVELS: u32 = 100_000;

/// Finds `τ` whose boundary complexity equals `target`.
pub fn realize(mis: &MisSpec, target: &HighPrecReal, prec: u32) -> Result<RealizationResult> {
    let wp = prec + 32;
    let pt = mis.product();
    let top = thresholds_a(mis, 2, wp)?;
    let bottom = mis_entropy_bits(mis, wp)?;
    let range_err = || MisError::TargetOutOfRange {
        target: target.to_decimal_string(12),
        low: bottom.to_decimal_string(12),
        high: top.to_decimal_string(12),
    };
    if target.definitely_lt(&bottom) || top.definitely_lt(target) {
        return Err(range_err());
    }
    let tol = BigRational::new(BigInt::one(), BigInt::one() << (prec + 4));
    let within = |a: &HighPrecReal, b: &HighPrecReal| {
        let d = a - b;
        d.lower().abs() <= tol && d.upper().abs() <= tol
    };
    if within(target, &top) {
        let tau = (BigRational::one() + BigRational::new(BigInt::one(), BigInt::from(pt.clone()))) / rat(2, 1);
        let achieved = h_boundary(mis, &tau, prec)?;
        return Ok(RealizationResult {
            level: Some(1),
            tau,
            achieved,
        });
    }
    if within(target, &bottom) {
        return Ok(RealizationResult {
            level: None,
            tau: BigRational::zero(),
            achieved: mis_entropy_bits(mis, prec)?,
        });
    }
    // Walk A_2 > A_3 > … until the target falls in (A_{k+1}, A_k].
    let mut a_k = thresholds_a(mis, 2, wp)?;
    let mut k = 2u32;
    loop {
        if k > MAX_LEVELS {
            return Err(range_err());
        }
        let a_next = thresholds_a(mis, k + 1, wp)?;
        if a_k.definitely_lt(&a_next) {
            return Err(MisError::NonMonotoneThresholds { k });
        }
        if a_next.definitely_lt(target) {
            break;
        }
        a_k = a_next;
        k += 1;
    }
    // Solve h(1 − τ) = N0 + τ (L_{k-1} − L_k) on level k.
    let logs = mis.omega.word_logs(k as usize, wp)?;
    let lo_tau = inv_pow(&pt, k);
    let c_at_zero = band_coefficients(&pt, k, &BigRational::zero());
    let mut n0 = HighPrecReal::zero(wp);
    for i in 1..=k as usize {
        if !c_at_zero[i].is_zero() {
            n0 = &n0 + &logs[i].mul_rational(&c_at_zero[i]);
        }
    }
    let t = target.with_prec(wp);
    let num = &n0 - &t;
    let den = &(&logs[k as usize] - &logs[k as usize - 1]) - &t;
    let tau_ball = num.checked_div(&den).ok_or(MisError::DegenerateSpeed(
        "denominator of the speed formula vanishes".into(),
    ))?;
    let mut tau = tau_ball.mid_rational();
    let hi_tau = inv_pow(&pt, k - 1);
    if tau <= lo_tau {
        tau = lo_tau + BigRational::new(BigInt::one(), BigInt::one() << wp);
    }
    if tau > hi_tau {
        tau = hi_tau;
    }
    let achieved = h_boundary(mis, &tau, prec)?;
    Ok(RealizationResult {
        level: Some(k),
        tau,
        achieved,
    })
}

/// Normalized log pattern count on the finite region `ℕ_m \ ℕ_{f(m)}`.
pub fn empirical_h_boundary(mis: &MisSpec, m: &LatticeBox, speed: &SpeedSpec, prec: u32) -> Result<HighPrecReal> {
    let inner = speed.inner_box(m)?;
    let region = BoundaryRegion::new(m.clone(), inner)?;
    let size = region.size();
    if size.is_zero() {
        return Err(MisError::DegenerateRegion);
    }
    let wp = prec + size.bits() as u32 + 8;
    let total = log_pattern_count_region(mis, &region, wp)?;
    Ok(total.div_int(&BigInt::from(size)).with_prec(prec))
}
