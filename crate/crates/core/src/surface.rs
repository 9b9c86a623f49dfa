//! Surface correction `ln|P(Z_N)| − (∏N) h` without forming either term.
//!
//! With `w_ℓ = (P−1)²/P^{ℓ+1}` and `R` the longest chain in the box,
//!
//! `ln|P(Z_N)| − V h = Σ_{ℓ<=R} (K_ℓ − V w_ℓ) ln|Ω_ℓ| − V Σ_{ℓ>R} w_ℓ ln|Ω_ℓ|`.
//!
//! The residuals `K_ℓ − V w_ℓ` are exact rationals of the size of the box
//! faces, and the tail is a geometric series, so the working precision only
//! has to cover the face size rather than the volume.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed};
use rayon::prelude::*;

use crate::count::{entropy_tail_bound, level_density, MisSpec};
use crate::error::{MisError, Result};
use crate::lattice::{chain_log_bound, hist_k, LatticeBox};
use crate::real::HighPrecReal;
use crate::subshift::SubshiftKind;

/// One level of the rearranged series.
#[derive(Clone, Debug)]
pub struct LevelTerm {
    pub ell: u32,
    /// `K_ℓ − V (P−1)²/P^{ℓ+1}`.
    pub residual: BigRational,
    pub log_words: HighPrecReal,
}

#[derive(Clone, Debug)]
pub struct CorrectionSeries {
    /// `r = min_j ⌊log_{p_j} N_j⌋`; chains hold at most `r + 1` points.
    pub r_n: u32,
    /// Levels `1..=r_n + 1`.
    pub level_terms: Vec<LevelTerm>,
    /// `−V Σ_{ℓ > r_n + 1} (P−1)²/P^{ℓ+1} ln|Ω_ℓ|`.
    pub tail: HighPrecReal,
    pub total: HighPrecReal,
    /// Working precision in bits.
    pub prec: u32,
}

/// Working precision `64 + 4 ⌈log2 V⌉`.
pub fn auto_precision(bx: &LatticeBox) -> u64 {
    let v = bx.volume();
    let lg = if v <= BigUint::one() { 0 } else { (v - 1u32).bits() };
    64 + 4 * lg
}

/// Supplies `ln|Ω_ℓ|` for `ℓ = 0..=max_len` at a given precision.
pub type WordLogs<'a> = dyn Fn(usize, u32) -> Result<Vec<HighPrecReal>> + Sync + 'a;

/// Surface correction of the box. `prec` is raised to at least
/// `64 + 2 bits(V)`; the result is certified to `2^-(prec/2)`.
pub fn surface_correction(mis: &MisSpec, bx: &LatticeBox, prec: u32) -> Result<CorrectionSeries> {
    let omega = &mis.omega;
    surface_correction_with_word_logs(mis, bx, prec, &|len, p| omega.word_logs(len, p))
}

/// [`surface_correction`] with the word logarithms supplied by the caller,
/// for comparing word-length conventions. `ln|Ω_ℓ| <= ℓ ln r` must hold
/// for the tail bound.
pub fn surface_correction_with_word_logs(
    mis: &MisSpec,
    bx: &LatticeBox,
    prec: u32,
    word_logs: &WordLogs<'_>,
) -> Result<CorrectionSeries> {
    if bx.dim() != mis.dim() {
        return Err(MisError::invalid("box", "dimension differs from the system"));
    }
    let Some(r_n) = chain_log_bound(bx, &mis.multipliers) else {
        return Err(MisError::invalid("box", "sides must be at least 1"));
    };
    let vol = bx.volume();
    let prec = prec.max(64 + 2 * vol.bits() as u32);
    let pt = mis.product();
    let r = mis.omega.alphabet_size();
    let vol_rat = BigRational::from_integer(BigInt::from(vol.clone()));
    let k = hist_k(bx, &mis.multipliers);
    let top = r_n + 1;
    // Tail terms beyond `last` are bounded using ln|Ω_ℓ| <= ℓ ln r.
    let target = BigRational::new(BigInt::one(), BigInt::one() << (prec + 2));
    let mut last = top;
    while &vol_rat * entropy_tail_bound(&pt, r, last) > target {
        last += 1;
    }
    let wp = prec + 16 + (u32::BITS - last.leading_zeros());
    let logs = word_logs(last as usize, wp)?;
    let mut level_terms = Vec::with_capacity(top as usize);
    let mut sum = HighPrecReal::zero(wp);
    for ell in 1..=top {
        let residual = BigRational::from_integer(BigInt::from(k.get(ell))) - &vol_rat * level_density(&pt, ell);
        let term = logs[ell as usize].mul_rational(&residual);
        sum = &sum + &term;
        level_terms.push(LevelTerm {
            ell,
            residual,
            log_words: logs[ell as usize].with_prec(prec),
        });
    }
    let mut tail = HighPrecReal::zero(wp);
    for ell in top + 1..=last {
        let w = &vol_rat * level_density(&pt, ell);
        tail = &tail - &logs[ell as usize].mul_rational(&w);
    }
    // remainder lies in [−V·bound, 0]
    let rem = &vol_rat * entropy_tail_bound(&pt, r, last);
    let tail = HighPrecReal::from_bounds(&(tail.lower() - &rem), &tail.upper(), wp);
    let total = (&sum + &tail).with_prec(prec);
    Ok(CorrectionSeries {
        r_n,
        level_terms,
        tail: tail.with_prec(prec),
        total,
        prec,
    })
}

/// `−(1 − 1/P) ln λ_A`, the slope of the leading correction term.
pub fn predicted_slope(mis: &MisSpec, prec: u32) -> Result<HighPrecReal> {
    if mis.omega.kind() == SubshiftKind::VertexSft && !mis.omega.is_mixing() {
        return Err(MisError::NotMixing {
            period: mis.omega.matrix().period().unwrap_or(0),
        });
    }
    let ln_lambda = mis.omega.entropy_rate_1d(prec + 8)?;
    let pt = BigInt::from(mis.product());
    let keep = BigRational::new(&pt - 1, pt);
    Ok((-ln_lambda.mul_rational(&keep)).with_prec(prec))
}

/// `r_n ∏x / P^{r_n}`, the growth factor of the leading term for a box.
pub fn leading_scale(mis: &MisSpec, bx: &LatticeBox) -> Result<BigRational> {
    let r_n = chain_log_bound(bx, &mis.multipliers)
        .ok_or_else(|| MisError::invalid("box", "sides must be at least 1"))?;
    Ok(BigRational::new(
        BigInt::from(bx.volume()) * BigInt::from(r_n),
        BigInt::from(mis.product().pow(r_n)),
    ))
}

/// Leading correction `−(1 − 1/P) ln λ_A r_n ∏x / P^{r_n}` for powers
/// `x^{(i)} = p_i^{k_i n}`; in the plane with `k_1 >= k_2` this is
/// `−(1 − 1/P) ln λ_A k_2 n p_1^{(k_1−k_2) n}`.
pub fn predicted_correction_power(mis: &MisSpec, exponents: &[u32], n: u32, prec: u32) -> Result<HighPrecReal> {
    let seq = SequenceSpec::power(exponents.to_vec());
    let bx = seq.box_at(mis, n)?;
    let slope = predicted_slope(mis, prec)?;
    Ok(slope.mul_rational(&leading_scale(mis, &bx)?))
}

/// Box sequences along which corrections are tabulated.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SequenceSpec {
    /// `x^{(i)}_n = p_i^{k_i n}`.
    Power { exponents: Vec<u32> },
    /// `x^{(i)}_n = p^n + sign·k` on every axis, all multipliers equal to `p`.
    Offset { k: u64, sign: i8 },
}

impl SequenceSpec {
    pub fn power(exponents: Vec<u32>) -> Self {
        SequenceSpec::Power { exponents }
    }

    pub fn validate(&self, mis: &MisSpec) -> Result<()> {
        match self {
            SequenceSpec::Power { exponents } => {
                if exponents.len() != mis.dim() {
                    return Err(MisError::invalid("seq", format!("need {} exponents", mis.dim())));
                }
                if exponents.iter().any(|&k| k == 0) {
                    return Err(MisError::invalid("seq", "exponents must be at least 1"));
                }
                Ok(())
            }
            SequenceSpec::Offset { k, sign } => {
                let ps = mis.multipliers.as_slice();
                if ps.iter().any(|&q| q != ps[0]) {
                    return Err(MisError::invalid("seq", "offset sequences need equal multipliers"));
                }
                if *k < 1 || *k > ps[0] {
                    return Err(MisError::invalid("seq", format!("need 1 <= k <= p = {}", ps[0])));
                }
                if *sign != 1 && *sign != -1 {
                    return Err(MisError::invalid("seq", "sign must be + or -"));
                }
                Ok(())
            }
        }
    }

    pub fn box_at(&self, mis: &MisSpec, n: u32) -> Result<LatticeBox> {
        self.validate(mis)?;
        let ps = mis.multipliers.as_slice();
        let sides = match self {
            SequenceSpec::Power { exponents } => ps
                .iter()
                .zip(exponents)
                .map(|(&p, &k)| BigUint::from(p).pow(k * n))
                .collect(),
            SequenceSpec::Offset { k, sign } => {
                let base = BigUint::from(ps[0]).pow(n);
                let side = if *sign > 0 {
                    base + *k
                } else if base > BigUint::from(*k) {
                    base - *k
                } else {
                    return Err(MisError::invalid("n", format!("p^{n} - {k} is not positive")));
                };
                vec![side; ps.len()]
            }
        };
        LatticeBox::new(sides)
    }

    /// Normalizer of the correction along the sequence.
    pub fn scale(&self, mis: &MisSpec, n: u32) -> Result<BigRational> {
        match self {
            SequenceSpec::Power { .. } => leading_scale(mis, &self.box_at(mis, n)?),
            SequenceSpec::Offset { .. } => Ok(BigRational::from_integer(BigInt::from(n))),
        }
    }

    /// Predicted limit of `correction / scale`.
    pub fn predicted(&self, mis: &MisSpec, prec: u32) -> Result<HighPrecReal> {
        match self {
            SequenceSpec::Power { .. } => predicted_slope(mis, prec),
            SequenceSpec::Offset { .. } => Ok(HighPrecReal::zero(prec)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PrecisionPolicy {
    Auto,
    Bits(u32),
}

impl PrecisionPolicy {
    pub fn resolve(self, bx: &LatticeBox, ceiling: u64) -> Result<u32> {
        let needed = match self {
            PrecisionPolicy::Auto => auto_precision(bx),
            PrecisionPolicy::Bits(b) => b as u64,
        };
        if needed > ceiling {
            return Err(MisError::PrecisionBudgetExceeded {
                needed,
                limit: ceiling,
            });
        }
        Ok(needed as u32)
    }
}

#[derive(Clone, Debug)]
pub struct TableRow {
    pub n: u32,
    pub sides: Vec<BigUint>,
    pub correction: HighPrecReal,
    pub scaled: HighPrecReal,
    pub predicted: HighPrecReal,
    pub deviation: HighPrecReal,
    pub prec: u32,
}

/// Deviation `|correction(n)/scale(n) − predicted|` for each `n`, in input
/// order. Rows are computed in parallel.
pub fn convergence_table(
    mis: &MisSpec,
    seq: &SequenceSpec,
    n_values: &[u32],
    policy: PrecisionPolicy,
    precision_ceiling: u64,
) -> Result<Vec<TableRow>> {
    seq.validate(mis)?;
    // Check every row's budget before spending time on any of them.
    let boxes: Vec<(u32, LatticeBox, u32)> = n_values
        .iter()
        .map(|&n| {
            let bx = seq.box_at(mis, n)?;
            let prec = policy.resolve(&bx, precision_ceiling)?;
            Ok((n, bx, prec))
        })
        .collect::<Result<_>>()?;
    boxes
        .into_par_iter()
        .map(|(n, bx, prec)| table_row(mis, seq, n, &bx, prec))
        .collect()
}

fn table_row(mis: &MisSpec, seq: &SequenceSpec, n: u32, bx: &LatticeBox, prec: u32) -> Result<TableRow> {
    let series = surface_correction(mis, bx, prec)?;
    let out_prec = series.prec / 2;
    let scale = seq.scale(mis, n)?;
    let scaled = series.total.mul_rational(&scale.recip()).with_prec(out_prec);
    let predicted = seq.predicted(mis, out_prec + 8)?.with_prec(out_prec);
    let diff = &scaled - &predicted;
    let deviation = if diff.mid_scaled().is_negative() { -diff } else { diff };
    Ok(TableRow {
        n,
        sides: bx.sides().to_vec(),
        correction: series.total.with_prec(out_prec),
        scaled,
        predicted,
        deviation,
        prec: series.prec,
    })
}

/// Growth check of `|correction(n)| / n` along `x_n = p^n ± k`.
#[derive(Clone, Debug)]
pub struct OffsetBound {
    /// `(n, correction(n) / n)`.
    pub ratios: Vec<(u32, f64)>,
    /// `max |correction(n)| / n` over the range.
    pub c: f64,
    pub middle_max: f64,
    pub last_max: f64,
    /// `last_max <= 1.1 · middle_max`.
    pub stabilized: bool,
}

pub fn bounded_correction_offset(
    mis: &MisSpec,
    k: u64,
    sign: i8,
    n_values: &[u32],
    precision_ceiling: u64,
) -> Result<OffsetBound> {
    if mis.dim() != 2 {
        return Err(MisError::invalid("multipliers", "offset sequences are defined in the plane"));
    }
    if n_values.len() < 3 {
        return Err(MisError::invalid("n", "need at least three values of n"));
    }
    let seq = SequenceSpec::Offset { k, sign };
    let rows = convergence_table(mis, &seq, n_values, PrecisionPolicy::Auto, precision_ceiling)?;
    let ratios: Vec<(u32, f64)> = rows.iter().map(|r| (r.n, r.scaled.to_f64())).collect();
    let third = ratios.len() / 3;
    let max_abs = |s: &[(u32, f64)]| s.iter().map(|x| x.1.abs()).fold(0.0f64, f64::max);
    let middle_max = max_abs(&ratios[third..2 * third]);
    let last_max = max_abs(&ratios[2 * third..]);
    let c = max_abs(&ratios);
    Ok(OffsetBound {
        stabilized: last_max <= 1.1 * middle_max,
        ratios,
        c,
        middle_max,
        last_max,
    })
}

/// `ln|P(Z_N)| − V h` evaluated directly, for cross-checking the
/// rearranged series on modest boxes.
pub fn naive_correction(mis: &MisSpec, bx: &LatticeBox, prec: u32) -> Result<HighPrecReal> {
    let vol = BigInt::from(bx.volume());
    let extra = vol.bits() as u32 + 8;
    let lg = crate::count::log_pattern_count(mis, bx, prec + extra)?;
    let h = crate::count::mis_entropy_bits(mis, prec + extra)?;
    Ok((&lg - &h.mul_int(&vol)).with_prec(prec))
}

/// Word logs re-indexed as `ℓ ↦ ln|Ω_{ℓ+shift}|`, for comparing word-length
/// conventions. The tail bound is only approximate when `shift > 0`.
pub fn shifted_word_logs(mis: &MisSpec, shift: usize) -> impl Fn(usize, u32) -> Result<Vec<HighPrecReal>> + Sync + '_ {
    move |len, prec| {
        let logs = mis.omega.word_logs(len + shift, prec)?;
        let mut out = vec![HighPrecReal::zero(prec)];
        out.extend(logs.into_iter().skip(1 + shift));
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::MultiplierVector;
    use crate::subshift::SubshiftSpec;

    fn gm(p: &[u64]) -> MisSpec {
        MisSpec::new(MultiplierVector::new(p.to_vec()).unwrap(), SubshiftSpec::golden_mean())
    }

    fn full(p: &[u64], r: usize) -> MisSpec {
        MisSpec::new(
            MultiplierVector::new(p.to_vec()).unwrap(),
            SubshiftSpec::full_shift(r).unwrap(),
        )
    }

    #[test]
    fn full_shift_correction_vanishes() {
        let mis = full(&[2, 3], 2);
        for n in [1u32, 5, 20] {
            let bx = SequenceSpec::power(vec![1, 1]).box_at(&mis, n).unwrap();
            let s = surface_correction(&mis, &bx, 128).unwrap();
            let bound = 2f64.powi(-(s.prec as i32) / 2);
            assert!(s.total.abs_upper_f64() <= bound, "n = {n}: {}", s.total.abs_upper_f64());
        }
    }

    #[test]
    fn matches_naive_difference() {
        for (mis, sides) in [
            (gm(&[2, 3]), vec![2u64, 3]),
            (gm(&[2, 3]), vec![4, 9]),
            (gm(&[2, 3]), vec![37, 101]),
            (gm(&[2, 2]), vec![1000, 999]),
            (gm(&[3]), vec![500_000]),
            (gm(&[2, 2, 3]), vec![20, 30, 40]),
        ] {
            let bx = LatticeBox::from_u64(&sides).unwrap();
            let s = surface_correction(&mis, &bx, 128).unwrap();
            let naive = naive_correction(&mis, &bx, 4 * s.prec).unwrap();
            assert!(
                s.total.distance_upper(&naive) <= 2f64.powi(-(s.prec as i32) / 2),
                "{sides:?}"
            );
        }
    }

    #[test]
    fn exact_small_corrections() {
        // Oracle values from the direct difference at 1000 bits.
        let mis = gm(&[2, 3]);
        let s1 = surface_correction(&mis, &LatticeBox::from_u64(&[2, 3]).unwrap(), 128).unwrap();
        assert!((s1.total.to_f64() - (-0.016493614859)).abs() < 1e-10);
        assert_eq!(s1.r_n, 1);
        assert_eq!(s1.level_terms.len(), 2);
    }

    #[test]
    fn residuals_are_face_sized() {
        for p in [[2u64, 2], [2, 3], [3, 5]] {
            let mis = gm(&p);
            for sides in [[100u64, 100], [1000, 17], [12345, 6789]] {
                let bx = LatticeBox::from_u64(&sides).unwrap();
                let s = surface_correction(&mis, &bx, 64).unwrap();
                let face = BigRational::from_integer(BigInt::from(16 * (sides[0] + sides[1])));
                for t in &s.level_terms {
                    assert!(t.residual.abs() <= face);
                }
            }
        }
    }

    #[test]
    fn predictions() {
        let mis = gm(&[2, 3]);
        let g = (1.0 + 5f64.sqrt()) / 2.0;
        for n in [1u32, 3, 7] {
            let v = predicted_correction_power(&mis, &[1, 1], n, 64).unwrap();
            assert!((v.to_f64() - (-5.0 * g.ln() / 6.0 * n as f64)).abs() < 1e-12);
        }
        let one = MisSpec::new(MultiplierVector::new(vec![2, 3]).unwrap(), SubshiftSpec::vertex_sft(&[vec![1]]).unwrap());
        assert!(predicted_correction_power(&one, &[1, 1], 4, 64).unwrap().contains_zero());
        let d1 = gm(&[3]);
        let v = predicted_correction_power(&d1, &[2], 5, 64).unwrap();
        assert!((v.to_f64() - (-(2.0 / 3.0) * g.ln() * 10.0)).abs() < 1e-12);
        let flip = MisSpec::new(
            MultiplierVector::new(vec![2, 3]).unwrap(),
            SubshiftSpec::vertex_sft(&[vec![0, 1], vec![1, 0]]).unwrap(),
        );
        assert_eq!(predicted_slope(&flip, 64).unwrap_err(), MisError::NotMixing { period: 2 });
    }

    #[test]
    fn full_shift_table_has_constant_deviation() {
        let mis = full(&[2, 3], 2);
        let rows = convergence_table(&mis, &SequenceSpec::power(vec![1, 1]), &[1, 4, 9], PrecisionPolicy::Auto, 1 << 15).unwrap();
        let expected = 5.0 / 6.0 * 2f64.ln();
        for r in rows {
            assert!((r.deviation.to_f64() - expected).abs() < 1e-9);
        }
    }

    #[test]
    fn precision_budget() {
        let mis = gm(&[2, 3]);
        let err = convergence_table(&mis, &SequenceSpec::power(vec![1, 1]), &[1, 100], PrecisionPolicy::Auto, 500).unwrap_err();
        assert!(matches!(err, MisError::PrecisionBudgetExceeded { .. }));
    }

    #[test]
    fn offset_sequences() {
        let mis = full(&[2, 2], 2);
        let b = bounded_correction_offset(&mis, 1, -1, &(3..=15).collect::<Vec<_>>(), 1 << 15).unwrap();
        assert!(b.c.is_finite());
        assert!(SequenceSpec::Offset { k: 3, sign: 1 }.validate(&mis).is_err());
        assert!(SequenceSpec::Offset { k: 1, sign: 1 }.validate(&gm(&[2, 3])).is_err());
    }
}
