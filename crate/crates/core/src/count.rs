//! Pattern counts of `X_Ω^p` on boxes and boundary regions, and its
//! topological entropy.
//!
//! The system decomposes into independent chains: a configuration is valid
//! exactly when the word read along every chain is admissible in Ω. A box
//! therefore carries `∏_ℓ |Ω_ℓ|^{K_ℓ}` patterns, with `K` the head histogram.

use std::sync::atomic::{AtomicU64, Ordering};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::error::{MisError, Result};
use crate::lattice::{
    chain_in_box, hist_k, is_index_head, region_segment_histogram, LatticeBox,
    MultiplierVector,
};
use crate::real::{HighPrecReal, LnContext};
use crate::subshift::{SubshiftKind, SubshiftSpec};

/// A 2-multiplicative integer system on ℕ^d.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MisSpec {
    pub multipliers: MultiplierVector,
    pub omega: SubshiftSpec,
}

impl MisSpec {
    pub fn new(multipliers: MultiplierVector, omega: SubshiftSpec) -> Self {
        MisSpec { multipliers, omega }
    }

    pub fn dim(&self) -> usize {
        self.multipliers.dim()
    }

    /// `P = ∏ p_j`.
    pub fn product(&self) -> BigUint {
        self.multipliers.product()
    }

    fn check_box(&self, bx: &LatticeBox) -> Result<()> {
        if bx.dim() != self.dim() {
            return Err(MisError::invalid(
                "box",
                format!("box has dimension {} but the system has {}", bx.dim(), self.dim()),
            ));
        }
        Ok(())
    }

    pub(crate) fn require_irreducible(&self) -> Result<()> {
        if self.omega.is_irreducible() {
            Ok(())
        } else {
            Err(MisError::NotIrreducible)
        }
    }
}

/// `outer \ inner`, both anchored at the origin corner.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundaryRegion {
    outer: LatticeBox,
    inner: LatticeBox,
}

impl BoundaryRegion {
    pub fn new(outer: LatticeBox, inner: LatticeBox) -> Result<Self> {
        if outer.dim() != inner.dim() {
            return Err(MisError::invalid("region", "outer and inner boxes differ in dimension"));
        }
        if let Some(k) = outer.sides().iter().zip(inner.sides()).position(|(m, f)| f > m) {
            return Err(MisError::invalid(
                "region",
                format!("inner side {} exceeds outer side {} on axis {}", inner.sides()[k], outer.sides()[k], k + 1),
            ));
        }
        Ok(BoundaryRegion { outer, inner })
    }

    pub fn outer(&self) -> &LatticeBox {
        &self.outer
    }

    pub fn inner(&self) -> &LatticeBox {
        &self.inner
    }

    pub fn size(&self) -> BigUint {
        self.outer.volume() - self.inner.volume()
    }
}

fn log2_estimate(n: &BigUint) -> f64 {
    let bits = n.bits();
    if bits <= 64 {
        return n.to_f64().unwrap_or(0.0).log2();
    }
    let top = (n >> (bits - 53)).to_f64().unwrap_or(0.0);
    top.log2() + (bits - 53) as f64
}

/// `∏_ℓ |Ω_ℓ|^{K_ℓ}` exactly, refusing results over `max_bits` bits.
pub fn pattern_count_exact(mis: &MisSpec, bx: &LatticeBox, max_bits: u64) -> Result<BigUint> {
    mis.check_box(bx)?;
    let k = hist_k(bx, &mis.multipliers);
    let words = mis.omega.word_counts(k.max_len() as usize);
    let bits: f64 = k
        .counts
        .iter()
        .map(|(&l, c)| c.to_f64().unwrap_or(f64::INFINITY) * log2_estimate(&words[l as usize]))
        .sum();
    if bits > max_bits as f64 {
        return Err(MisError::ResultTooLarge {
            bits: bits.min(u64::MAX as f64) as u64,
            limit: max_bits,
        });
    }
    let mut out = BigUint::one();
    for (&l, c) in &k.counts {
        let w = &words[l as usize];
        if w.is_zero() {
            return Ok(BigUint::zero());
        }
        if w.is_one() {
            continue;
        }
        let e = c.to_u32().expect("bounded by the bit guard");
        out *= w.pow(e);
    }
    Ok(out)
}

/// Row-major point list and chains (as point indices) of a small box.
struct SmallBox {
    points: usize,
    chains: Vec<Vec<usize>>,
}

fn index_of(pt: &[u64], sides: &[u64]) -> usize {
    pt.iter()
        .zip(sides)
        .fold(0usize, |acc, (&x, &n)| acc * n as usize + (x - 1) as usize)
}

fn small_box(mis: &MisSpec, bx: &LatticeBox) -> SmallBox {
    let sides = bx.sides_u64().expect("small box");
    let points: usize = sides.iter().map(|&s| s as usize).product();
    let mut chains = Vec::new();
    let mut pt = vec![1u64; sides.len()];
    for _ in 0..points {
        if is_index_head(&pt, &mis.multipliers) {
            let chain = chain_in_box(&pt, &mis.multipliers, bx).expect("inside");
            chains.push(chain.iter().map(|q| index_of(q, &sides)).collect());
        }
        for k in (0..pt.len()).rev() {
            if pt[k] < sides[k] {
                pt[k] += 1;
                break;
            }
            pt[k] = 1;
        }
    }
    SmallBox { points, chains }
}

fn configuration_budget(r: usize, points: usize, max_configs: u64) -> Result<u64> {
    let total = BigUint::from(r).pow(points as u32);
    match total.to_u64() {
        Some(t) if t <= max_configs => Ok(t),
        _ => Err(MisError::BoxTooLarge {
            size: format!("{r}^{points}"),
            limit: max_configs.to_string(),
        }),
    }
}

fn decode(mut code: u64, r: u64, out: &mut [u8]) {
    for x in out.iter_mut() {
        *x = (code % r) as u8;
        code /= r;
    }
}

fn chains_admissible(omega: &SubshiftSpec, chains: &[Vec<usize>], cfg: &[u8]) -> bool {
    chains.iter().all(|c| {
        c.windows(2)
            .all(|w| omega.allows(cfg[w[0]] as usize, cfg[w[1]] as usize))
    })
}

const CHUNK: u64 = 1 << 14;

/// Exhaustive count of valid configurations on the box.
pub fn pattern_count_bruteforce(mis: &MisSpec, bx: &LatticeBox, max_configs: u64) -> Result<BigUint> {
    mis.check_box(bx)?;
    if bx.is_empty() {
        return Ok(BigUint::one());
    }
    if bx.volume() > BigUint::from(64u32) {
        return Err(MisError::BoxTooLarge {
            size: bx.volume().to_string(),
            limit: max_configs.to_string(),
        });
    }
    let sb = small_box(mis, bx);
    let r = mis.omega.alphabet_size();
    let total = configuration_budget(r, sb.points, max_configs)?;
    let chunks = total.div_ceil(CHUNK);
    let count: u64 = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut cfg = vec![0u8; sb.points];
            let mut n = 0u64;
            for code in c * CHUNK..((c + 1) * CHUNK).min(total) {
                decode(code, r as u64, &mut cfg);
                if chains_admissible(&mis.omega, &sb.chains, &cfg) {
                    n += 1;
                }
            }
            n
        })
        .sum();
    Ok(BigUint::from(count))
}

/// Working precision that keeps `Σ c_ℓ · ln|Ω_ℓ|` within `2^-prec` when the
/// weights sum to at most `weight`.
fn inner_prec(prec: u32, weight: &BigUint, terms: usize) -> u32 {
    prec + weight.bits() as u32 + (usize::BITS - terms.leading_zeros()) + 4
}

fn weighted_log_sum<'a>(
    omega: &SubshiftSpec,
    weights: impl Iterator<Item = (u32, &'a BigUint)> + Clone,
    prec: u32,
) -> Result<HighPrecReal> {
    let max_len = weights.clone().map(|(l, _)| l).max().unwrap_or(0) as usize;
    let total: BigUint = weights.clone().map(|(l, c)| c * l).sum();
    let terms = weights.clone().count();
    let wp = inner_prec(prec, &total, terms);
    let logs = omega.word_logs(max_len, wp)?;
    let mut acc = HighPrecReal::zero(wp);
    for (l, c) in weights {
        acc = &acc + &logs[l as usize].mul_int(&BigInt::from(c.clone()));
    }
    Ok(acc.with_prec(prec))
}

/// `Σ_ℓ K_ℓ ln|Ω_ℓ|`, absolute error at most `2^-prec`.
pub fn log_pattern_count(mis: &MisSpec, bx: &LatticeBox, prec: u32) -> Result<HighPrecReal> {
    mis.check_box(bx)?;
    let k = hist_k(bx, &mis.multipliers);
    weighted_log_sum(&mis.omega, k.counts.iter().map(|(&l, c)| (l, c)), prec)
}

/// Log of the number of distinct region projections, by summing
/// `ln|Ω_s|` over the chain segments inside the region.
pub fn log_pattern_count_region(mis: &MisSpec, region: &BoundaryRegion, prec: u32) -> Result<HighPrecReal> {
    mis.check_box(region.outer())?;
    mis.require_irreducible()?;
    let seg = region_segment_histogram(region.outer(), region.inner(), &mis.multipliers);
    weighted_log_sum(&mis.omega, seg.iter().map(|(&l, c)| (l, c)), prec)
}

/// Distinct restrictions to the region of valid configurations on the outer
/// box, by exhaustive enumeration.
pub fn region_projection_bruteforce(mis: &MisSpec, region: &BoundaryRegion, max_configs: u64) -> Result<BigUint> {
    let outer = region.outer();
    mis.check_box(outer)?;
    if outer.is_empty() {
        return Ok(BigUint::one());
    }
    if outer.volume() > BigUint::from(64u32) {
        return Err(MisError::BoxTooLarge {
            size: outer.volume().to_string(),
            limit: max_configs.to_string(),
        });
    }
    let sb = small_box(mis, outer);
    let r = mis.omega.alphabet_size();
    let total = configuration_budget(r, sb.points, max_configs)?;
    let sides = outer.sides_u64().expect("small");
    let mut in_region = Vec::with_capacity(sb.points);
    let mut pt = vec![1u64; sides.len()];
    for _ in 0..sb.points {
        in_region.push(!region.inner().contains(&pt));
        for k in (0..pt.len()).rev() {
            if pt[k] < sides[k] {
                pt[k] += 1;
                break;
            }
            pt[k] = 1;
        }
    }
    let region_cells: Vec<usize> = (0..sb.points).filter(|&i| in_region[i]).collect();
    let keys = (r as u64).pow(region_cells.len() as u32);
    let seen: Vec<AtomicU64> = (0..keys.div_ceil(64)).map(|_| AtomicU64::new(0)).collect();
    let chunks = total.div_ceil(CHUNK);
    (0..chunks).into_par_iter().for_each(|c| {
        let mut cfg = vec![0u8; sb.points];
        for code in c * CHUNK..((c + 1) * CHUNK).min(total) {
            decode(code, r as u64, &mut cfg);
            if chains_admissible(&mis.omega, &sb.chains, &cfg) {
                let key = region_cells
                    .iter()
                    .rev()
                    .fold(0u64, |acc, &i| acc * r as u64 + cfg[i] as u64);
                seen[(key / 64) as usize].fetch_or(1 << (key % 64), Ordering::Relaxed);
            }
        }
    });
    let n: u64 = seen.iter().map(|w| w.load(Ordering::Relaxed).count_ones() as u64).sum();
    Ok(BigUint::from(n))
}

/// `(P−1)² / P^{ℓ+1}`, the asymptotic density of heads with chain length ℓ.
pub fn level_density(p_total: &BigUint, ell: u32) -> BigRational {
    let pm1 = BigInt::from(p_total.clone()) - 1;
    BigRational::new(&pm1 * &pm1, BigInt::from(p_total.pow(ell + 1)))
}

/// Rational upper bound on `ln r`.
pub(crate) fn ln_upper(r: usize) -> BigRational {
    // ln 2 < 0.7 and ln r <= ceil(log2 r) ln 2
    let bits = (usize::BITS - (r.max(1) - 1).leading_zeros()).max(if r > 1 { 1 } else { 0 });
    BigRational::new(BigInt::from(7 * bits), BigInt::from(10))
}

/// `Σ_{ℓ>L} ℓ (P−1)² / P^{ℓ+1} · ln r` bound, i.e. `ln r ((P−1)L + P) / P^{L+1}`.
pub fn entropy_tail_bound(p_total: &BigUint, r: usize, after: u32) -> BigRational {
    let p = BigInt::from(p_total.clone());
    let num = (&p - 1) * BigInt::from(after) + &p;
    ln_upper(r) * BigRational::new(num, p.pow(after + 1))
}

/// Topological entropy `Σ_ℓ (P−1)²/P^{ℓ+1} ln|Ω_ℓ|` within absolute error
/// `2^-bits`; the truncated tail is folded into the ball radius.
pub fn mis_entropy_bits(mis: &MisSpec, bits: u32) -> Result<HighPrecReal> {
    let pt = mis.product();
    let r = mis.omega.alphabet_size();
    let prec = bits + 8;
    if mis.omega.kind() == SubshiftKind::FullShift {
        return Ok(LnContext::new(prec).ln_u64(r as u64).with_prec(bits));
    }
    let half = BigRational::new(BigInt::one(), BigInt::one() << (bits + 1));
    let mut last = 1u32;
    while entropy_tail_bound(&pt, r, last) > half {
        last += 1;
    }
    let logs = mis.omega.word_logs(last as usize, prec + 4)?;
    let mut acc = HighPrecReal::zero(prec + 4);
    for l in 1..=last {
        acc = &acc + &logs[l as usize].mul_rational(&level_density(&pt, l));
    }
    let tail = entropy_tail_bound(&pt, r, last);
    let lo = acc.lower();
    let hi = acc.upper() + tail;
    Ok(HighPrecReal::from_bounds(&lo, &hi, bits + 4))
}

/// Bits needed for an absolute tolerance `tol`.
pub fn tol_to_bits(tol: f64) -> Result<u32> {
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(MisError::invalid("tol", "must be positive and finite"));
    }
    Ok((-tol.log2()).ceil().max(1.0) as u32 + 1)
}

/// Topological entropy within absolute error `tol`.
pub fn mis_entropy(mis: &MisSpec, tol: f64) -> Result<HighPrecReal> {
    mis_entropy_bits(mis, tol_to_bits(tol)?)
}
