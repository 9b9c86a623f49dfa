//! Two-dimensional SFTs given by their allowed 2×2 blocks: strip transfer
//! systems, strip entropies, frame counts and a bounded block-gluing probe.
//!
//! A block `[a,b;c,d]` has `a` top-left, `b` top-right, `c` bottom-left and
//! `d` bottom-right. Rows run top to bottom, columns left to right.
//!
//! A rectangular pattern is admissible when every 2×2 window is allowed.
//! Patterns one cell thick have no windows; for them every adjacent pair must
//! occur inside some allowed block (a row pair as a block row, a column pair
//! as a block column), and a single cell must carry a symbol used by some
//! block. This makes the thickness-1 strips of a spec carry the 1-D rules
//! that its blocks induce.

use std::collections::HashMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::error::{MisError, Result};
use crate::real::HighPrecReal;
use crate::subshift::TransitionMatrix;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sft2dSpec {
    r: usize,
    allowed: Vec<bool>,
    row_pairs: Vec<bool>,
    col_pairs: Vec<bool>,
    symbols: Vec<bool>,
}

impl Sft2dSpec {
    /// Builds a spec from its allowed blocks `[a, b, c, d]`.
    pub fn new(alphabet_size: usize, allowed: &[[u8; 4]]) -> Result<Self> {
        if alphabet_size < 1 || alphabet_size > 36 {
            return Err(MisError::invalid("alphabet_size", "must be between 1 and 36"));
        }
        let r = alphabet_size;
        let mut table = vec![false; r.pow(4)];
        for b in allowed {
            if let Some(&s) = b.iter().find(|&&s| s as usize >= r) {
                return Err(MisError::invalid(
                    "allowed_2x2",
                    format!("symbol {s} outside alphabet of size {r}"),
                ));
            }
            table[Self::code(r, b)] = true;
        }
        let mut row_pairs = vec![false; r * r];
        let mut col_pairs = vec![false; r * r];
        let mut symbols = vec![false; r];
        for b in allowed {
            let [a, bb, c, d] = b.map(|x| x as usize);
            row_pairs[a * r + bb] = true;
            row_pairs[c * r + d] = true;
            col_pairs[a * r + c] = true;
            col_pairs[bb * r + d] = true;
            for s in [a, bb, c, d] {
                symbols[s] = true;
            }
        }
        let spec = Sft2dSpec {
            r,
            allowed: table,
            row_pairs,
            col_pairs,
            symbols,
        };
        if spec.box_pattern_count(3, 3, u64::MAX)?.is_zero() {
            return Err(MisError::EmptyLanguage);
        }
        Ok(spec)
    }

    /// Parses blocks written as strings of four symbols `"abcd"`, each a
    /// base-36 digit.
    pub fn from_strings(alphabet_size: usize, allowed: &[String]) -> Result<Self> {
        let mut blocks = Vec::with_capacity(allowed.len());
        for s in allowed {
            let digits: Option<Vec<u8>> = s.chars().map(|c| c.to_digit(36).map(|d| d as u8)).collect();
            match digits {
                Some(d) if d.len() == 4 => blocks.push([d[0], d[1], d[2], d[3]]),
                _ => {
                    return Err(MisError::invalid(
                        "allowed_2x2",
                        format!("{s:?} is not four symbols"),
                    ))
                }
            }
        }
        Self::new(alphabet_size, &blocks)
    }

    fn code(r: usize, b: &[u8; 4]) -> usize {
        b.iter().fold(0usize, |acc, &x| acc * r + x as usize)
    }

    pub fn alphabet_size(&self) -> usize {
        self.r
    }

    pub fn allows(&self, b: &[u8; 4]) -> bool {
        self.allowed[Self::code(self.r, b)]
    }

    /// Allowed blocks as strings, in lexicographic order.
    pub fn allowed_strings(&self) -> Vec<String> {
        let r = self.r;
        (0..r.pow(4))
            .filter(|&c| self.allowed[c])
            .map(|c| {
                let digits = [c / (r * r * r), (c / (r * r)) % r, (c / r) % r, c % r];
                digits
                    .iter()
                    .map(|&d| std::char::from_digit(d as u32, 36).expect("digit"))
                    .collect()
            })
            .collect()
    }

    /// Mirror across the main diagonal: `[a,b;c,d] → [a,c;b,d]`.
    pub fn transpose(&self) -> Self {
        self.remap(|[a, b, c, d]| [a, c, b, d])
    }

    /// Mirror across the anti-diagonal: `[a,b;c,d] → [d,b;c,a]`. Swaps the
    /// top rows of a box with its rightmost columns.
    pub fn anti_transpose(&self) -> Self {
        self.remap(|[a, b, c, d]| [d, b, c, a])
    }

    fn remap(&self, f: impl Fn([u8; 4]) -> [u8; 4]) -> Self {
        let r = self.r;
        let blocks: Vec<[u8; 4]> = (0..r.pow(4))
            .filter(|&c| self.allowed[c])
            .map(|c| f([c / (r * r * r), (c / (r * r)) % r, (c / r) % r, c % r].map(|x| x as u8)))
            .collect();
        Self::new(r, &blocks).expect("mirror images keep the language nonempty")
    }

    fn checker(&self, height: usize, width: usize) -> Checker<'_> {
        Checker {
            spec: self,
            height,
            width,
        }
    }

    /// Admissible `height × width` patterns (`width` columns).
    pub fn box_pattern_count(&self, width: usize, height: usize, max_row_states: u64) -> Result<BigUint> {
        if width == 0 || height == 0 {
            return Ok(BigUint::one());
        }
        if width > height {
            return self.transpose().box_pattern_count(height, width, max_row_states);
        }
        let rows = RowSet::build(self, width, height, max_row_states)?;
        let mut v = vec![BigUint::one(); rows.rows.len()];
        for _ in 1..height {
            let mut next = vec![BigUint::zero(); rows.rows.len()];
            for (u, cu) in v.iter().enumerate() {
                if cu.is_zero() {
                    continue;
                }
                for &w in &rows.succ[u] {
                    next[w] += cu;
                }
            }
            v = next;
        }
        Ok(v.into_iter().sum())
    }

    /// Transfer system of thickness-`i` cross-sections. Direction 1 stacks
    /// rows of width `i` vertically; direction 2 stacks columns of height
    /// `i` horizontally.
    pub fn build_strip(&self, direction: usize, thickness: usize, max_row_states: u64) -> Result<StripSystem> {
        if thickness == 0 {
            return Err(MisError::invalid("thickness", "must be at least 1"));
        }
        let base = match direction {
            1 => self.clone(),
            2 => self.transpose(),
            _ => return Err(MisError::invalid("direction", "only directions 1 and 2 exist in the plane")),
        };
        // Rows of a strip at least two cells tall.
        let rows = RowSet::build(&base, thickness, 2, max_row_states)?;
        let states: Vec<usize> = (0..rows.rows.len()).filter(|&u| rows.row_ok_alone[u]).collect();
        if states.is_empty() {
            return Err(MisError::EmptyStates);
        }
        let pos: HashMap<usize, usize> = states.iter().enumerate().map(|(k, &u)| (u, k)).collect();
        let n = states.len();
        let mut cells = vec![false; n * n];
        for (a, &u) in states.iter().enumerate() {
            for w in &rows.succ[u] {
                if let Some(&b) = pos.get(w) {
                    cells[a * n + b] = true;
                }
            }
        }
        let matrix = TransitionMatrix::from_fn(n, |a, b| cells[a * n + b]);
        Ok(StripSystem {
            direction,
            thickness,
            states: states.into_iter().map(|u| rows.rows[u].clone()).collect(),
            matrix,
        })
    }

    /// `h_i^{(k)}`, the log Perron value of the strip transfer matrix; the
    /// flag is `false` when the matrix was reducible and the largest cyclic
    /// component was used.
    pub fn strip_entropy(&self, direction: usize, thickness: usize, prec: u32, max_row_states: u64) -> Result<(HighPrecReal, bool)> {
        let strip = self.build_strip(direction, thickness, max_row_states)?;
        strip.matrix.log_spectral_radius(prec)
    }

    /// Distinct restrictions of admissible `height × width` patterns to the
    /// frame made of the top `i` rows and the rightmost `i` columns.
    pub fn frame_count(&self, width: usize, height: usize, i: usize, max_row_states: u64) -> Result<BigUint> {
        if width == 0 || height == 0 {
            return Ok(BigUint::one());
        }
        if width > height {
            return self.anti_transpose().frame_count(height, width, i, max_row_states);
        }
        let rows = RowSet::build(self, width, height, max_row_states)?;
        let fw = i.min(width);
        let part = |u: usize| -> &[u8] { &rows.rows[u][width - fw..] };
        // Rows grouped by their frame part.
        let mut by_part: HashMap<Vec<u8>, Vec<usize>> = HashMap::new();
        for u in 0..rows.rows.len() {
            by_part.entry(part(u).to_vec()).or_default().push(u);
        }
        let mut groups: Vec<(Vec<u8>, Vec<usize>)> = by_part.into_iter().collect();
        groups.sort();
        let words = rows.rows.len().div_ceil(64);
        let mut memo: HashMap<(usize, Vec<u64>), BigUint> = HashMap::new();
        let mut budget = MEMO_BUDGET;
        let mut total = BigUint::zero();
        // Row 0 is entirely frame when i >= 1.
        for u in 0..rows.rows.len() {
            let mut s = vec![0u64; words];
            s[u / 64] |= 1 << (u % 64);
            total += frame_suffix(&rows, &groups, height, i, 0, s, &mut memo, &mut budget)?;
        }
        Ok(total)
    }

    /// The same count as [`Sft2dSpec::frame_count`] by enumerating every
    /// pattern on the box.
    pub fn frame_count_bruteforce(&self, width: usize, height: usize, i: usize, max_configs: u64) -> Result<BigUint> {
        let cells = width * height;
        let total = BigUint::from(self.r).pow(cells as u32);
        if total > BigUint::from(max_configs) {
            return Err(MisError::BoxTooLarge {
                size: total.to_string(),
                limit: max_configs.to_string(),
            });
        }
        let total: u64 = total.try_into().expect("bounded");
        let check = self.checker(height, width);
        let frame: Vec<usize> = (0..cells)
            .filter(|&c| c / width < i || c % width >= width.saturating_sub(i))
            .collect();
        let mut seen = std::collections::HashSet::new();
        let mut grid = vec![0u8; cells];
        for code in 0..total {
            let mut x = code;
            for g in grid.iter_mut() {
                *g = (x % self.r as u64) as u8;
                x /= self.r as u64;
            }
            if check.full(&grid) {
                seen.insert(frame.iter().map(|&c| grid[c]).collect::<Vec<u8>>());
            }
        }
        Ok(BigUint::from(seen.len()))
    }

    /// Admissible `w × w` blocks.
    pub fn admissible_blocks(&self, w: usize, max_row_states: u64) -> Result<Vec<Vec<u8>>> {
        let rows = RowSet::build(self, w, w, max_row_states)?;
        let mut out = Vec::new();
        let mut stack: Vec<usize> = Vec::new();
        fn walk(rows: &RowSet, w: usize, stack: &mut Vec<usize>, out: &mut Vec<Vec<u8>>) {
            if stack.len() == w {
                out.push(stack.iter().flat_map(|&u| rows.rows[u].iter().copied()).collect());
                return;
            }
            let next: Vec<usize> = match stack.last() {
                None => (0..rows.rows.len()).collect(),
                Some(&u) => rows.succ[u].clone(),
            };
            for v in next {
                stack.push(v);
                walk(rows, w, stack, out);
                stack.pop();
            }
        }
        walk(&rows, w, &mut stack, &mut out);
        Ok(out)
    }

    /// Bounded check of block gluing with constant `n`: every pair of
    /// admissible `w × w` blocks, placed side by side, one above the other,
    /// or diagonally with gaps `n` and `n + 1`, must extend to an admissible
    /// pattern on their bounding rectangle.
    pub fn block_gluing_probe(&self, n: usize, w: usize, max_checks: u64) -> Result<GluingProbe> {
        if w == 0 || w > 6 {
            return Err(MisError::invalid("window", "must be between 1 and 6"));
        }
        let blocks = self.admissible_blocks(w, 1 << 16)?;
        let placements = placements(n, w);
        let checks = (blocks.len() as u64)
            .saturating_mul(blocks.len() as u64)
            .saturating_mul(placements.len() as u64);
        if checks > max_checks {
            return Err(MisError::TooLarge(format!(
                "{checks} gluing checks exceed the limit {max_checks}"
            )));
        }
        let nb = blocks.len();
        let found = (0..nb * nb).into_par_iter().find_map_first(|idx| {
            let (a, b) = (idx / nb, idx % nb);
            for pl in &placements {
                if !self.glue(&blocks[a], &blocks[b], w, pl) {
                    return Some(GluingProbe::Counterexample {
                        first: blocks[a].clone(),
                        second: blocks[b].clone(),
                        offset: (pl.dy, pl.dx),
                    });
                }
            }
            None
        });
        Ok(found.unwrap_or(GluingProbe::Verified {
            window: w,
            gap: n,
            pairs: (nb * nb) as u64,
        }))
    }

    fn glue(&self, a: &[u8], b: &[u8], w: usize, pl: &Placement) -> bool {
        let (ay, ax) = (if pl.dy < 0 { -pl.dy } else { 0 } as usize, if pl.dx < 0 { -pl.dx } else { 0 } as usize);
        let (by, bx) = ((ay as i64 + pl.dy) as usize, (ax as i64 + pl.dx) as usize);
        let height = (ay.max(by)) + w;
        let width = (ax.max(bx)) + w;
        let mut fixed: Vec<Option<u8>> = vec![None; height * width];
        for y in 0..w {
            for x in 0..w {
                fixed[(ay + y) * width + ax + x] = Some(a[y * w + x]);
                fixed[(by + y) * width + bx + x] = Some(b[y * w + x]);
            }
        }
        let check = self.checker(height, width);
        let mut grid = vec![0u8; height * width];
        check.complete(&fixed, &mut grid, 0)
    }
}

/// Outcome of [`Sft2dSpec::block_gluing_probe`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GluingProbe {
    Verified { window: usize, gap: usize, pairs: u64 },
    /// Two blocks (row-major) and the offset `(dy, dx)` of the second's
    /// top-left corner from the first's that admit no joint pattern.
    Counterexample {
        first: Vec<u8>,
        second: Vec<u8>,
        offset: (i64, i64),
    },
}

struct Placement {
    dy: i64,
    dx: i64,
}

fn placements(n: usize, w: usize) -> Vec<Placement> {
    let mut out = Vec::new();
    for g in [n, n + 1] {
        let s = (w + g) as i64;
        out.push(Placement { dy: 0, dx: s });
        out.push(Placement { dy: s, dx: 0 });
        out.push(Placement { dy: s, dx: s });
        out.push(Placement { dy: s, dx: -s });
    }
    out
}

/// Memoized states allowed in one frame count.
const MEMO_BUDGET: usize = 1 << 20;

#[allow(clippy::too_many_arguments)]
fn frame_suffix(
    rows: &RowSet,
    groups: &[(Vec<u8>, Vec<usize>)],
    height: usize,
    i: usize,
    t: usize,
    s: Vec<u64>,
    memo: &mut HashMap<(usize, Vec<u64>), BigUint>,
    budget: &mut usize,
) -> Result<BigUint> {
    if t + 1 == height {
        return Ok(BigUint::one());
    }
    if let Some(v) = memo.get(&(t, s.clone())) {
        return Ok(v.clone());
    }
    if *budget == 0 {
        return Err(MisError::TooLarge("frame count state space exceeds its budget".into()));
    }
    *budget -= 1;
    let words = s.len();
    let mut reach = vec![0u64; words];
    for (wi, &word) in s.iter().enumerate() {
        let mut bits = word;
        while bits != 0 {
            let u = wi * 64 + bits.trailing_zeros() as usize;
            bits &= bits - 1;
            for &v in &rows.succ[u] {
                reach[v / 64] |= 1 << (v % 64);
            }
        }
    }
    let mut total = BigUint::zero();
    if t + 1 < i {
        // Whole next row is frame.
        for (wi, &word) in reach.iter().enumerate() {
            let mut bits = word;
            while bits != 0 {
                let v = wi * 64 + bits.trailing_zeros() as usize;
                bits &= bits - 1;
                let mut next = vec![0u64; words];
                next[v / 64] |= 1 << (v % 64);
                total += frame_suffix(rows, groups, height, i, t + 1, next, memo, budget)?;
            }
        }
    } else {
        for (_, members) in groups {
            let mut next = vec![0u64; words];
            let mut any = false;
            for &v in members {
                if reach[v / 64] >> (v % 64) & 1 == 1 {
                    next[v / 64] |= 1 << (v % 64);
                    any = true;
                }
            }
            if any {
                total += frame_suffix(rows, groups, height, i, t + 1, next, memo, budget)?;
            }
        }
    }
    memo.insert((t, s), total.clone());
    Ok(total)
}

/// Rows admissible inside a box of the given height, and which rows may sit
/// directly below which.
struct RowSet {
    rows: Vec<Vec<u8>>,
    /// Row admissible on its own, as a 1-thick pattern.
    row_ok_alone: Vec<bool>,
    succ: Vec<Vec<usize>>,
}

impl RowSet {
    fn build(spec: &Sft2dSpec, width: usize, height: usize, max_row_states: u64) -> Result<Self> {
        let r = spec.r;
        let count = BigUint::from(r).pow(width as u32);
        if count > BigUint::from(max_row_states) {
            return Err(MisError::TooLarge(format!(
                "{count} row states exceed the limit {max_row_states}"
            )));
        }
        let count: usize = count.try_into().expect("bounded");
        let alone = spec.checker(1, width);
        let mut rows = Vec::with_capacity(count);
        let mut row_ok_alone = Vec::with_capacity(count);
        for code in 0..count {
            let mut x = code;
            let mut row = vec![0u8; width];
            for c in row.iter_mut().rev() {
                *c = (x % r) as u8;
                x /= r;
            }
            let ok = alone.full(&row);
            if height == 1 && !ok {
                continue;
            }
            row_ok_alone.push(ok);
            rows.push(row);
        }
        let pair = spec.checker(2, width);
        let succ: Vec<Vec<usize>> = (0..rows.len())
            .into_par_iter()
            .map(|u| {
                (0..rows.len())
                    .filter(|&v| {
                        let mut g = rows[u].clone();
                        g.extend_from_slice(&rows[v]);
                        pair.full(&g)
                    })
                    .collect()
            })
            .collect();
        Ok(RowSet {
            rows,
            row_ok_alone,
            succ,
        })
    }
}

/// Local admissibility on a fixed rectangle, cell by cell in row-major
/// order.
struct Checker<'a> {
    spec: &'a Sft2dSpec,
    height: usize,
    width: usize,
}

impl Checker<'_> {
    /// Checks every constraint whose last cell (in row-major order) is
    /// `(y, x)`.
    fn ok_at(&self, g: &[u8], y: usize, x: usize) -> bool {
        let s = self.spec;
        let r = s.r;
        let w = self.width;
        let at = |yy: usize, xx: usize| g[yy * w + xx] as usize;
        match (self.height >= 2, w >= 2) {
            (true, true) => {
                y == 0 || x == 0 || s.allows(&[at(y - 1, x - 1) as u8, at(y - 1, x) as u8, at(y, x - 1) as u8, at(y, x) as u8])
            }
            (false, true) => x == 0 || s.row_pairs[at(y, x - 1) * r + at(y, x)],
            (true, false) => y == 0 || s.col_pairs[at(y - 1, x) * r + at(y, x)],
            (false, false) => s.symbols[at(y, x)],
        }
    }

    fn full(&self, g: &[u8]) -> bool {
        (0..self.height).all(|y| (0..self.width).all(|x| self.ok_at(g, y, x)))
    }

    /// Depth-first completion of the free cells.
    fn complete(&self, fixed: &[Option<u8>], g: &mut [u8], pos: usize) -> bool {
        if pos == g.len() {
            return true;
        }
        let (y, x) = (pos / self.width, pos % self.width);
        match fixed[pos] {
            Some(v) => {
                g[pos] = v;
                self.ok_at(g, y, x) && self.complete(fixed, g, pos + 1)
            }
            None => {
                for v in 0..self.spec.r as u8 {
                    g[pos] = v;
                    if self.ok_at(g, y, x) && self.complete(fixed, g, pos + 1) {
                        return true;
                    }
                }
                false
            }
        }
    }
}

/// Cross-section transfer system of a strip.
#[derive(Clone, Debug)]
pub struct StripSystem {
    pub direction: usize,
    pub thickness: usize,
    /// Cross-sections, each read left to right (direction 1) or top to
    /// bottom (direction 2).
    pub states: Vec<Vec<u8>>,
    pub matrix: TransitionMatrix,
}

/// Weighted combination `Σ_k (W_k / Σ_j W_j) h^{(k)} / i` with
/// `W_k = ∏_{ℓ≠k} i_ℓ`, for strip entropies `h^{(k)}` of thickness `i`.
///
/// In the plane, weights `(t, 1 − t)` give `((1 − t) h^{(1)} + t h^{(2)}) / i`.
pub fn sft_boundary_complexity(rates: &[HighPrecReal], thickness: u32, weights: &[BigRational]) -> Result<HighPrecReal> {
    if rates.len() != weights.len() || rates.len() < 2 {
        return Err(MisError::BadWeights(format!(
            "{} weights for {} strip entropies",
            weights.len(),
            rates.len()
        )));
    }
    if thickness == 0 {
        return Err(MisError::invalid("thickness", "must be at least 1"));
    }
    if weights.iter().any(|w| w.is_negative()) {
        return Err(MisError::BadWeights("negative weight".into()));
    }
    let sum: BigRational = weights.iter().sum();
    if sum != BigRational::one() {
        return Err(MisError::BadWeights(format!("weights sum to {sum}, not 1")));
    }
    let products: Vec<BigRational> = (0..weights.len())
        .map(|k| {
            weights
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != k)
                .fold(BigRational::one(), |a, (_, w)| a * w)
        })
        .collect();
    let denom: BigRational = products.iter().sum();
    if denom.is_zero() {
        return Err(MisError::BadWeights(
            "every cross product of weights vanishes; put weight on at least two axes".into(),
        ));
    }
    let prec = rates.iter().map(|r| r.prec()).max().unwrap_or(64);
    let mut acc = HighPrecReal::zero(prec);
    for (rate, w) in rates.iter().zip(&products) {
        acc = &acc + &rate.mul_rational(&(w / &denom));
    }
    Ok(acc.div_int(&BigInt::from(thickness)))
}

/// Mixing parameter `t` with `(1 − t) a + t b = target`, where `a` and `b`
/// are the per-thickness strip rates `h^{(1)}/i` and `h^{(2)}/i`. Either
/// ordering of `a`, `b` is accepted.
pub fn sft_realize_t(rate_v: &HighPrecReal, rate_h: &HighPrecReal, target: &HighPrecReal) -> Result<HighPrecReal> {
    let prec = rate_v.prec().max(rate_h.prec()).max(target.prec());
    let tol = BigRational::new(BigInt::one(), BigInt::one() << (prec.saturating_sub(8)));
    let den = rate_h - rate_v;
    let num = target - rate_v;
    if den.contains_zero() {
        let close = num.lower().abs() <= tol && num.upper().abs() <= tol;
        return if close {
            Ok(HighPrecReal::zero(prec))
        } else {
            Err(MisError::DegenerateInterval)
        };
    }
    let t = num.checked_div(&den).expect("denominator excludes zero");
    let zero = BigRational::zero();
    let one = BigRational::one();
    if t.upper() < &zero - &tol || t.lower() > &one + &tol {
        let (lo, hi) = if rate_v.definitely_lt(rate_h) { (rate_v, rate_h) } else { (rate_h, rate_v) };
        return Err(MisError::TargetOutOfRange {
            target: target.to_decimal_string(12),
            low: lo.to_decimal_string(12),
            high: hi.to_decimal_string(12),
        });
    }
    Ok(t)
}

/// The five worked specs used throughout the tests and the CLI.
pub mod catalog {
    use super::Sft2dSpec;

    fn spec(allowed: &[&str]) -> Sft2dSpec {
        let v: Vec<String> = allowed.iter().map(|s| s.to_string()).collect();
        Sft2dSpec::from_strings(2, &v).expect("catalog spec")
    }

    /// At most one `1` in every 2×2 block; `0` is a safe symbol.
    pub fn one_per_block() -> Sft2dSpec {
        spec(&["0000", "1000", "0100", "0010", "0001"])
    }

    /// Golden-mean rule along columns, free along rows.
    pub fn vertical_golden_mean() -> Sft2dSpec {
        spec(&["0000", "0001", "0010", "0011", "0100", "0110", "1000", "1001", "1100"])
    }

    /// Only the two checkerboards.
    pub fn checkerboard() -> Sft2dSpec {
        spec(&["0110", "1001"])
    }

    /// Exactly one `1` per block, or the main diagonal `[1,0;0,1]`.
    pub fn single_or_diagonal() -> Sft2dSpec {
        spec(&["1000", "0100", "0010", "0001", "1001"])
    }

    /// Blocks with an even number of `1`s.
    pub fn even_blocks() -> Sft2dSpec {
        spec(&["0000", "1111", "1100", "0011", "1010", "0101", "1001", "0110"])
    }

    pub fn full(r: usize) -> Sft2dSpec {
        let mut blocks = Vec::new();
        for c in 0..r.pow(4) {
            blocks.push([(c / (r * r * r)) as u8, ((c / (r * r)) % r) as u8, ((c / r) % r) as u8, (c % r) as u8]);
        }
        Sft2dSpec::new(r, &blocks).expect("full shift")
    }
}

#[cfg(test)]
mod tests {
    use super::catalog::*;
    use super::*;
    use crate::real::LnContext;

    const ROWS: u64 = 1 << 16;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn strips_of_vertical_golden_mean() {
        let s = vertical_golden_mean();
        let v = s.build_strip(1, 1, ROWS).unwrap();
        assert_eq!(v.matrix.rows(), vec![vec![1, 1], vec![1, 0]]);
        let h = s.build_strip(2, 1, ROWS).unwrap();
        assert_eq!(h.matrix.rows(), vec![vec![1, 1], vec![1, 1]]);
    }

    #[test]
    fn full_shift_strips() {
        let s = full(2);
        let st = s.build_strip(1, 2, ROWS).unwrap();
        assert_eq!(st.states.len(), 4);
        assert!(st.matrix.rows().iter().all(|r| r.iter().all(|&x| x == 1)));
        let ln2 = LnContext::new(80).ln_u64(2);
        for k in [1, 2] {
            for i in 1..=3 {
                let (h, irr) = s.strip_entropy(k, i, 64, ROWS).unwrap();
                assert!(irr);
                assert!(h.overlaps(&ln2.mul_int(&BigInt::from(i))));
            }
        }
    }

    #[test]
    fn checkerboard_strip_is_two_cycles() {
        let s = checkerboard();
        let v = s.build_strip(1, 1, ROWS).unwrap();
        assert_eq!(v.matrix.rows(), vec![vec![0, 1], vec![1, 0]]);
        let (h, _) = s.strip_entropy(1, 1, 64, ROWS).unwrap();
        assert!(h.contains_zero() || h.to_f64().abs() < 1e-15);
        for w in 1..=6 {
            for hgt in 1..=6 {
                assert_eq!(s.box_pattern_count(w, hgt, ROWS).unwrap(), BigUint::from(2u32));
            }
        }
    }

    #[test]
    fn frame_counts_match_bruteforce() {
        for s in [one_per_block(), vertical_golden_mean(), checkerboard(), single_or_diagonal(), even_blocks()] {
            for (w, h) in [(2, 2), (3, 3), (4, 3), (3, 4), (2, 5), (1, 4), (4, 1)] {
                for i in 1..=2 {
                    assert_eq!(
                        s.frame_count(w, h, i, ROWS).unwrap(),
                        s.frame_count_bruteforce(w, h, i, 1 << 20).unwrap(),
                        "{w}x{h} i={i}"
                    );
                }
            }
        }
    }

    #[test]
    fn frame_count_examples() {
        let fib = |k: usize| {
            let (mut a, mut b) = (2u64, 3u64);
            for _ in 1..k {
                (a, b) = (b, a + b);
            }
            a
        };
        let s4 = single_or_diagonal();
        let s5 = even_blocks();
        for m in 1..=6 {
            for n in 1..=6 {
                assert_eq!(s4.frame_count(m, n, 1, ROWS).unwrap(), BigUint::from(fib(m + n - 1)), "{m}x{n}");
                assert_eq!(s5.frame_count(m, n, 1, ROWS).unwrap(), BigUint::from(1u64 << (m + n - 1)));
            }
        }
        let f = full(2);
        assert_eq!(f.frame_count(4, 3, 1, ROWS).unwrap(), BigUint::from(1u32 << 6));
    }

    #[test]
    fn mixing_formula() {
        let lt = LnContext::new(100).ln_u64(2);
        let s = vertical_golden_mean();
        let (hv, _) = s.strip_entropy(1, 1, 80, ROWS).unwrap();
        let (hh, _) = s.strip_entropy(2, 1, 80, ROWS).unwrap();
        assert!(hh.overlaps(&lt));
        let golden = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((hv.to_f64() - golden.ln()).abs() < 1e-15);
        let t0 = sft_boundary_complexity(&[hv.clone(), hh.clone()], 1, &[rat(0, 1), rat(1, 1)]).unwrap();
        assert!(t0.overlaps(&hv));
        let t1 = sft_boundary_complexity(&[hv.clone(), hh.clone()], 1, &[rat(1, 1), rat(0, 1)]).unwrap();
        assert!(t1.overlaps(&hh));
        let half = sft_boundary_complexity(&[hv.clone(), hh.clone()], 1, &[rat(1, 2), rat(1, 2)]).unwrap();
        assert!((half.to_f64() - (2f64.ln() + golden.ln()) / 2.0).abs() < 1e-15);
        let s3 = HighPrecReal::from_rational(&rat(5, 7), 64);
        let eq = sft_boundary_complexity(&[s3.clone(), s3.clone(), s3.clone()], 2, &[rat(1, 3), rat(1, 3), rat(1, 3)]).unwrap();
        assert!(eq.overlaps(&HighPrecReal::from_rational(&rat(5, 14), 64)));
        assert!(matches!(
            sft_boundary_complexity(&[hv.clone(), hh.clone()], 1, &[rat(1, 2), rat(1, 3)]),
            Err(MisError::BadWeights(_))
        ));
        assert!(matches!(
            sft_boundary_complexity(&[s3.clone(), s3.clone(), s3.clone()], 1, &[rat(1, 1), rat(0, 1), rat(0, 1)]),
            Err(MisError::BadWeights(_))
        ));
    }

    #[test]
    fn realize_mixing_parameter() {
        let s = vertical_golden_mean();
        let (hv, _) = s.strip_entropy(1, 1, 80, ROWS).unwrap();
        let (hh, _) = s.strip_entropy(2, 1, 80, ROWS).unwrap();
        let t = sft_realize_t(&hv, &hh, &hh).unwrap();
        assert!((t.to_f64() - 1.0).abs() < 1e-15);
        let t = sft_realize_t(&hv, &hh, &hv).unwrap();
        assert!(t.to_f64().abs() < 1e-15);
        let target = HighPrecReal::from_rational(&rat(6, 10), 80);
        let t = sft_realize_t(&hv, &hh, &target).unwrap();
        let tr = t.mid_rational();
        let back = sft_boundary_complexity(&[hv.clone(), hh.clone()], 1, &[tr.clone(), BigRational::one() - tr]).unwrap();
        assert!(back.distance_upper(&target) < 1e-12);
        // reversed ordering of the two rates
        let t2 = sft_realize_t(&hh, &hv, &target).unwrap();
        assert!((t2.to_f64() - (1.0 - t.to_f64())).abs() < 1e-12);
        let far = HighPrecReal::from_rational(&rat(1, 1), 80);
        assert!(matches!(sft_realize_t(&hv, &hh, &far), Err(MisError::TargetOutOfRange { .. })));
        assert_eq!(sft_realize_t(&hv, &hv, &target).unwrap_err(), MisError::DegenerateInterval);
    }

    #[test]
    fn gluing_probe() {
        assert!(matches!(full(2).block_gluing_probe(1, 2, 1 << 24).unwrap(), GluingProbe::Verified { .. }));
        assert!(matches!(
            vertical_golden_mean().block_gluing_probe(1, 3, 1 << 24).unwrap(),
            GluingProbe::Verified { .. }
        ));
        assert!(matches!(
            checkerboard().block_gluing_probe(1, 2, 1 << 24).unwrap(),
            GluingProbe::Counterexample { .. }
        ));
    }

    #[test]
    fn construction_errors() {
        assert_eq!(Sft2dSpec::from_strings(2, &["0110".into()]).unwrap_err(), MisError::EmptyLanguage);
        assert!(Sft2dSpec::from_strings(2, &["012".into()]).is_err());
        assert!(Sft2dSpec::from_strings(2, &["0120".into()]).is_err());
        let s = vertical_golden_mean();
        assert_eq!(s.transpose().transpose(), s);
        assert_eq!(Sft2dSpec::from_strings(2, &s.allowed_strings()).unwrap(), s);
    }
}
