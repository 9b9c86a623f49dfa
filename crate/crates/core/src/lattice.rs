//! Multiplicative chains `i, i·p, i·p², …` in ℕ^d and their length
//! histograms inside rectangular boxes.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{MisError, Result};

/// Per-axis multipliers `p_1, …, p_d`, each at least 2.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u64>", into = "Vec<u64>")]
pub struct MultiplierVector {
    p: Vec<u64>,
}

impl TryFrom<Vec<u64>> for MultiplierVector {
    type Error = MisError;
    fn try_from(p: Vec<u64>) -> Result<Self> {
        MultiplierVector::new(p)
    }
}

impl From<MultiplierVector> for Vec<u64> {
    fn from(m: MultiplierVector) -> Self {
        m.p
    }
}

impl MultiplierVector {
    pub fn new(p: Vec<u64>) -> Result<Self> {
        if p.is_empty() {
            return Err(MisError::invalid("multipliers", "need at least one axis"));
        }
        if let Some(j) = p.iter().position(|&x| x < 2) {
            return Err(MisError::invalid(
                "multipliers",
                format!("p_j >= 2 required, got p_{} = {}", j + 1, p[j]),
            ));
        }
        Ok(MultiplierVector { p })
    }

    pub fn dim(&self) -> usize {
        self.p.len()
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.p
    }

    /// `P = p_1 ⋯ p_d`.
    pub fn product(&self) -> BigUint {
        self.p.iter().map(|&x| BigUint::from(x)).product()
    }
}

/// Box `[1, N_1] × ⋯ × [1, N_d]`. Sides may be zero, giving the empty box.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LatticeBox {
    sides: Vec<BigUint>,
}

impl LatticeBox {
    pub fn new(sides: Vec<BigUint>) -> Result<Self> {
        if sides.is_empty() {
            return Err(MisError::invalid("box", "need at least one side"));
        }
        Ok(LatticeBox { sides })
    }

    pub fn from_u64(sides: &[u64]) -> Result<Self> {
        Self::new(sides.iter().map(|&x| BigUint::from(x)).collect())
    }

    pub fn dim(&self) -> usize {
        self.sides.len()
    }

    pub fn sides(&self) -> &[BigUint] {
        &self.sides
    }

    pub fn volume(&self) -> BigUint {
        volume(&self.sides)
    }

    pub fn is_empty(&self) -> bool {
        self.sides.iter().any(|s| s.is_zero())
    }

    pub fn contains(&self, point: &[u64]) -> bool {
        point.len() == self.sides.len()
            && point
                .iter()
                .zip(&self.sides)
                .all(|(&x, n)| x >= 1 && BigUint::from(x) <= *n)
    }

    /// Sides as machine integers, when they fit.
    pub fn sides_u64(&self) -> Option<Vec<u64>> {
        self.sides.iter().map(|s| s.to_u64()).collect()
    }

    fn check_dim(&self, p: &MultiplierVector) -> Result<()> {
        if self.dim() != p.dim() {
            return Err(MisError::invalid(
                "box",
                format!("box has dimension {} but multipliers have {}", self.dim(), p.dim()),
            ));
        }
        Ok(())
    }
}

impl fmt::Display for LatticeBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.sides.iter().map(|s| s.to_string()).collect();
        write!(f, "{}", parts.join("x"))
    }
}

fn volume(sides: &[BigUint]) -> BigUint {
    sides.iter().product()
}

/// `⌊N_k / p_k^e⌋` componentwise.
fn shrink(sides: &[BigUint], p: &[u64], e: u32) -> Vec<BigUint> {
    sides
        .iter()
        .zip(p)
        .map(|(n, &pk)| n / BigUint::from(pk).pow(e))
        .collect()
}

/// Number of heads (points of `I_p`) inside a box.
fn heads_in(sides: &[BigUint], p: &[u64]) -> BigUint {
    volume(sides) - volume(&shrink(sides, p, 1))
}

/// Largest `e` with `p^e <= n`, for `n >= 1`.
pub fn ilog(n: &BigUint, p: u64) -> u32 {
    let p = BigUint::from(p);
    let mut e = 0u32;
    let mut acc = p.clone();
    while acc <= *n {
        e += 1;
        acc *= &p;
    }
    e
}

/// `r = min_j ⌊log_{p_j} N_j⌋`; chains meet the box in at most `r + 1`
/// points. `None` for an empty box.
pub fn chain_log_bound(bx: &LatticeBox, p: &MultiplierVector) -> Option<u32> {
    if bx.is_empty() {
        return None;
    }
    bx.sides.iter().zip(&p.p).map(|(n, &pk)| ilog(n, pk)).min()
}

/// `true` when some coordinate is not divisible by its multiplier.
pub fn is_index_head(i: &[u64], p: &MultiplierVector) -> bool {
    i.iter().zip(&p.p).any(|(&x, &pk)| x % pk != 0)
}

/// Points `i·p^m`, `m = 0, 1, …`, that stay inside the box.
pub fn chain_in_box(i: &[u64], p: &MultiplierVector, bx: &LatticeBox) -> Result<Vec<Vec<u64>>> {
    bx.check_dim(p)?;
    if !bx.contains(i) {
        return Err(MisError::OutOfBox { point: i.to_vec() });
    }
    let mut out = vec![i.to_vec()];
    loop {
        let last = out.last().expect("nonempty");
        let next: Option<Vec<u64>> = last.iter().zip(&p.p).map(|(&x, &pk)| x.checked_mul(pk)).collect();
        match next {
            Some(pt) if bx.contains(&pt) => out.push(pt),
            _ => break,
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum HistFlavor {
    /// Indexed by lattice points.
    J,
    /// Indexed by chain heads.
    K,
}

/// Map from chain length `ℓ >= 1` to a count; zero entries are omitted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainHistogram {
    pub flavor: HistFlavor,
    pub counts: BTreeMap<u32, BigUint>,
}

impl ChainHistogram {
    fn new(flavor: HistFlavor) -> Self {
        ChainHistogram {
            flavor,
            counts: BTreeMap::new(),
        }
    }

    fn add(&mut self, ell: u32, n: BigUint) {
        if !n.is_zero() {
            *self.counts.entry(ell).or_insert_with(BigUint::zero) += n;
        }
    }

    pub fn get(&self, ell: u32) -> BigUint {
        self.counts.get(&ell).cloned().unwrap_or_default()
    }

    pub fn max_len(&self) -> u32 {
        self.counts.keys().next_back().copied().unwrap_or(0)
    }

    /// `Σ_ℓ counts[ℓ]`.
    pub fn total(&self) -> BigUint {
        self.counts.values().sum()
    }

    /// `Σ_ℓ ℓ · counts[ℓ]`.
    pub fn weighted_total(&self) -> BigUint {
        self.counts.iter().map(|(&l, c)| c * l).sum()
    }

    /// JSON object `{"ℓ": "count"}` with decimal-string counts.
    pub fn to_json(&self) -> serde_json::Value {
        let map: serde_json::Map<String, serde_json::Value> = self
            .counts
            .iter()
            .map(|(l, c)| (l.to_string(), serde_json::Value::String(c.to_string())))
            .collect();
        serde_json::Value::Object(map)
    }
}

fn j_from_sides(sides: &[BigUint], p: &[u64]) -> ChainHistogram {
    let mut h = ChainHistogram::new(HistFlavor::J);
    if sides.iter().any(|s| s.is_zero()) {
        return h;
    }
    let mut prev = volume(sides);
    let mut ell = 1u32;
    while !prev.is_zero() {
        let next = volume(&shrink(sides, p, ell));
        h.add(ell, &prev - &next);
        prev = next;
        ell += 1;
    }
    h
}

/// Points whose forward chain meets the box in exactly `ℓ` points:
/// `∏⌊N_k/p_k^{ℓ-1}⌋ − ∏⌊N_k/p_k^ℓ⌋`.
pub fn hist_j(bx: &LatticeBox, p: &MultiplierVector) -> ChainHistogram {
    assert_eq!(bx.dim(), p.dim(), "dimension mismatch");
    j_from_sides(&bx.sides, &p.p)
}

/// Chain heads whose chain meets the box in exactly `ℓ` points, as the
/// difference `J(N) − J(⌊N/p⌋)`.
pub fn hist_k(bx: &LatticeBox, p: &MultiplierVector) -> ChainHistogram {
    assert_eq!(bx.dim(), p.dim(), "dimension mismatch");
    let outer = j_from_sides(&bx.sides, &p.p);
    let inner = j_from_sides(&shrink(&bx.sides, &p.p, 1), &p.p);
    let mut h = ChainHistogram::new(HistFlavor::K);
    for (&l, c) in &outer.counts {
        h.add(l, c - inner.get(l));
    }
    h
}

/// Forward chain length of `x` inside a box with machine-sized sides.
fn forward_len(x: &[u64], p: &[u64], sides: &[u64]) -> u32 {
    let mut cur = x.to_vec();
    let mut len = 0u32;
    loop {
        if cur.iter().zip(sides).any(|(&c, &n)| c > n) {
            return len;
        }
        len += 1;
        for (c, &pk) in cur.iter_mut().zip(p) {
            *c = c.saturating_mul(pk);
        }
    }
}

fn for_each_point(sides: &[u64], prefix: &mut Vec<u64>, f: &mut impl FnMut(&[u64])) {
    if prefix.len() == sides.len() {
        f(prefix);
        return;
    }
    let n = sides[prefix.len()];
    for x in 1..=n {
        prefix.push(x);
        for_each_point(sides, prefix, f);
        prefix.pop();
    }
}

/// J and K histograms by visiting every point, with no closed forms.
pub fn enumerate_hist_oracle(
    bx: &LatticeBox,
    p: &MultiplierVector,
    max_points: u64,
) -> Result<(ChainHistogram, ChainHistogram)> {
    bx.check_dim(p)?;
    let vol = bx.volume();
    if vol > BigUint::from(max_points) {
        return Err(MisError::BoxTooLarge {
            size: vol.to_string(),
            limit: max_points.to_string(),
        });
    }
    let sides = bx.sides_u64().expect("volume bound keeps sides small");
    let mut jh = ChainHistogram::new(HistFlavor::J);
    let mut kh = ChainHistogram::new(HistFlavor::K);
    if bx.is_empty() {
        return Ok((jh, kh));
    }
    let pv = &p.p;
    // Slabs along the first axis are independent; merging is order-free.
    let slabs: Vec<(BTreeMap<u32, u64>, BTreeMap<u32, u64>)> = (1..=sides[0])
        .into_par_iter()
        .map(|x0| {
            let mut j = BTreeMap::new();
            let mut k = BTreeMap::new();
            let mut prefix = vec![x0];
            for_each_point(&sides, &mut prefix, &mut |pt| {
                let len = forward_len(pt, pv, &sides);
                *j.entry(len).or_insert(0u64) += 1;
                if pt.iter().zip(pv).any(|(&x, &pk)| x % pk != 0) {
                    *k.entry(len).or_insert(0u64) += 1;
                }
            });
            (j, k)
        })
        .collect();
    for (j, k) in slabs {
        for (l, c) in j {
            jh.add(l, BigUint::from(c));
        }
        for (l, c) in k {
            kh.add(l, BigUint::from(c));
        }
    }
    Ok((jh, kh))
}

/// For the region `outer \ inner`, the number of chain heads whose chain
/// meets the region in exactly `s` points, for every `s >= 1`.
///
/// A head `i` meets the outer box in a prefix of length `a` and the inner box
/// in a prefix of length `b <= a`, so the region holds the segment of length
/// `a − b`. Heads with prefix lengths at least `(α, β)` are exactly the heads
/// of the box `min(⌊m/p^{α-1}⌋, ⌊f/p^{β-1}⌋)`, and inclusion–exclusion
/// recovers the exact `(a, b)` counts.
pub fn region_segment_histogram(
    outer: &LatticeBox,
    inner: &LatticeBox,
    p: &MultiplierVector,
) -> BTreeMap<u32, BigUint> {
    assert_eq!(outer.dim(), p.dim(), "dimension mismatch");
    assert_eq!(inner.dim(), p.dim(), "dimension mismatch");
    let pv = &p.p;
    let at_least = |alpha: u32, beta: u32| -> BigUint {
        let mut sides = shrink(&outer.sides, pv, alpha - 1);
        if beta >= 1 {
            let f = shrink(&inner.sides, pv, beta - 1);
            for (s, fk) in sides.iter_mut().zip(f) {
                if fk < *s {
                    *s = fk;
                }
            }
        }
        if sides.iter().any(|s| s.is_zero()) {
            return BigUint::zero();
        }
        heads_in(&sides, pv)
    };
    let mut out = BTreeMap::new();
    let Some(r_out) = chain_log_bound(outer, p) else {
        return out;
    };
    let r_in = chain_log_bound(inner, p).map_or(0, |r| r + 1);
    for a in 1..=r_out + 1 {
        for b in 0..=r_in.min(a - 1) {
            let plus = at_least(a, b) + at_least(a + 1, b + 1);
            let minus = at_least(a + 1, b) + at_least(a, b + 1);
            let exact = plus - minus;
            if !exact.is_zero() {
                *out.entry(a - b).or_insert_with(BigUint::zero) += exact;
            }
        }
    }
    out
}

/// The same histogram as [`region_segment_histogram`], by walking every head.
pub fn region_segment_oracle(
    outer: &LatticeBox,
    inner: &LatticeBox,
    p: &MultiplierVector,
    max_points: u64,
) -> Result<BTreeMap<u32, BigUint>> {
    outer.check_dim(p)?;
    let vol = outer.volume();
    if vol > BigUint::from(max_points) {
        return Err(MisError::BoxTooLarge {
            size: vol.to_string(),
            limit: max_points.to_string(),
        });
    }
    let mut out: BTreeMap<u32, BigUint> = BTreeMap::new();
    if outer.is_empty() {
        return Ok(out);
    }
    let sides = outer.sides_u64().expect("small box");
    let mut prefix = Vec::new();
    for_each_point(&sides, &mut prefix, &mut |pt| {
        if !is_index_head(pt, p) {
            return;
        }
        let chain = chain_in_box(pt, p, outer).expect("inside");
        let s = chain.iter().filter(|q| !inner.contains(q)).count() as u32;
        if s > 0 {
            *out.entry(s).or_insert_with(BigUint::zero) += BigUint::one();
        }
    });
    Ok(out)
}
