//! One-dimensional subshifts: full shifts and vertex SFTs given by a 0/1
//! transition matrix, exact word counts, and Perron data.

use std::collections::VecDeque;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::{Deserialize, Serialize};

use crate::error::{MisError, Result};
use crate::real::{HighPrecReal, LnContext};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubshiftKind {
    FullShift,
    VertexSft,
}

/// A square 0/1 matrix stored row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TransitionMatrix {
    n: usize,
    cells: Vec<bool>,
}

impl TransitionMatrix {
    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(MisError::invalid("transition", "matrix is empty"));
        }
        let mut cells = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(MisError::invalid(
                    "transition",
                    format!("matrix is not square: row {i} has {} entries, expected {n}", row.len()),
                ));
            }
            for &x in row {
                match x {
                    0 => cells.push(false),
                    1 => cells.push(true),
                    _ => {
                        return Err(MisError::invalid(
                            "transition",
                            format!("entry {x} in row {i} is not 0 or 1"),
                        ))
                    }
                }
            }
        }
        Ok(TransitionMatrix { n, cells })
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> bool) -> Self {
        let mut cells = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                cells.push(f(i, j));
            }
        }
        TransitionMatrix { n, cells }
    }

    pub fn all_ones(n: usize) -> Self {
        Self::from_fn(n, |_, _| true)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.cells[i * self.n + j]
    }

    pub fn rows(&self) -> Vec<Vec<u8>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j) as u8).collect())
            .collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self.get(j, i))
    }

    fn successors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&j| self.get(i, j))
    }

    fn reachable_from(&self, start: usize) -> Vec<bool> {
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(u) = queue.pop_front() {
            for v in self.successors(u) {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        seen
    }

    /// Strong connectivity of the digraph (a 1×1 matrix needs its loop).
    pub fn is_irreducible(&self) -> bool {
        if self.n == 1 {
            return self.get(0, 0);
        }
        self.reachable_from(0).iter().all(|&b| b) && self.transpose().reachable_from(0).iter().all(|&b| b)
    }

    /// Period of an irreducible matrix: gcd of all cycle lengths.
    pub fn period(&self) -> Option<usize> {
        if !self.is_irreducible() {
            return None;
        }
        let mut level = vec![usize::MAX; self.n];
        level[0] = 0;
        let mut queue = VecDeque::from([0usize]);
        let mut g = 0usize;
        while let Some(u) = queue.pop_front() {
            for v in self.successors(u) {
                if level[v] == usize::MAX {
                    level[v] = level[u] + 1;
                    queue.push_back(v);
                } else {
                    let diff = (level[u] + 1).abs_diff(level[v]);
                    g = g.gcd(&diff);
                }
            }
        }
        Some(g)
    }

    pub fn is_primitive(&self) -> bool {
        self.period() == Some(1)
    }

    /// Strongly connected components that carry at least one cycle.
    pub fn cyclic_components(&self) -> Vec<Vec<usize>> {
        let mut g = DiGraph::<(), ()>::new();
        let nodes: Vec<_> = (0..self.n).map(|_| g.add_node(())).collect();
        for i in 0..self.n {
            for j in self.successors(i) {
                g.add_edge(nodes[i], nodes[j], ());
            }
        }
        let mut out: Vec<Vec<usize>> = tarjan_scc(&g)
            .into_iter()
            .map(|c| {
                let mut c: Vec<usize> = c.into_iter().map(|x| x.index()).collect();
                c.sort_unstable();
                c
            })
            .filter(|c| c.len() > 1 || self.get(c[0], c[0]))
            .collect();
        out.sort();
        out
    }

    pub fn submatrix(&self, idx: &[usize]) -> Self {
        Self::from_fn(idx.len(), |a, b| self.get(idx[a], idx[b]))
    }

    /// `A v` over the naturals.
    pub fn apply(&self, v: &[BigUint]) -> Vec<BigUint> {
        (0..self.n)
            .map(|i| {
                let mut s = BigUint::zero();
                for j in self.successors(i) {
                    s += &v[j];
                }
                s
            })
            .collect()
    }

    /// Exact power `A^k` as a matrix of big naturals.
    pub fn power(&self, k: u32) -> Vec<Vec<BigUint>> {
        let n = self.n;
        let mut acc: Vec<Vec<BigUint>> = (0..n)
            .map(|i| (0..n).map(|j| BigUint::from((i == j) as u32)).collect())
            .collect();
        for _ in 0..k {
            acc = (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            let mut s = BigUint::zero();
                            for m in 0..n {
                                if self.get(m, j) {
                                    s += &acc[i][m];
                                }
                            }
                            s
                        })
                        .collect()
                })
                .collect();
        }
        acc
    }

    /// Sums of all entries of `A^0, A^1, …, A^(len-1)`, i.e. admissible word
    /// counts for lengths `1..=len`; index 0 holds the empty word count 1.
    pub fn word_counts(&self, len: usize) -> Vec<BigUint> {
        let mut out = Vec::with_capacity(len + 1);
        out.push(BigUint::one());
        let mut v = vec![BigUint::one(); self.n];
        for l in 1..=len {
            if l > 1 {
                v = self.apply(&v);
            }
            out.push(v.iter().sum());
        }
        out
    }

    /// Perron data of an irreducible matrix.
    pub fn perron_data(&self, prec: u32) -> Result<PerronData> {
        if !self.is_irreducible() {
            return Err(MisError::ReducibleMatrix);
        }
        let (lambda, right) = dominant_pair(self, prec)?;
        let (_, left) = dominant_pair(&self.transpose(), prec)?;
        let wp = prec + 16;
        let rsum = right.iter().fold(HighPrecReal::zero(wp), |a, x| &a + x);
        let right: Vec<HighPrecReal> = right
            .iter()
            .map(|x| x.checked_div(&rsum).expect("positive sum"))
            .collect();
        let dot = left
            .iter()
            .zip(&right)
            .fold(HighPrecReal::zero(wp), |a, (l, r)| &a + &l.mul(r));
        let left = left
            .iter()
            .map(|x| x.checked_div(&dot).expect("positive dot").with_prec(prec))
            .collect();
        let right = right.into_iter().map(|x| x.with_prec(prec)).collect();
        Ok(PerronData {
            lambda,
            left,
            right,
        })
    }

    /// Natural log of the spectral radius. For a reducible matrix this is the
    /// maximum over cyclic components; the flag reports irreducibility.
    pub fn log_spectral_radius(&self, prec: u32) -> Result<(HighPrecReal, bool)> {
        let ctx = LnContext::new(prec + 8);
        if self.is_irreducible() {
            let (lambda, _) = dominant_pair(self, prec + 8)?;
            let ln = lambda.ln(&ctx).expect("Perron value of irreducible matrix is >= 1");
            return Ok((ln.with_prec(prec), true));
        }
        let comps = self.cyclic_components();
        if comps.is_empty() {
            return Err(MisError::EmptyLanguage);
        }
        let mut best: Option<HighPrecReal> = None;
        for c in comps {
            let sub = self.submatrix(&c);
            let (lambda, _) = dominant_pair(&sub, prec + 8)?;
            let ln = lambda.ln(&ctx).expect("cyclic component has radius >= 1");
            best = Some(match best {
                None => ln,
                Some(b) => b.max_hull(&ln),
            });
        }
        Ok((best.expect("nonempty").with_prec(prec), false))
    }
}

/// Upper bound on power-iteration steps before giving up.
pub const PERRON_STEP_BUDGET: usize = 200_000;

/// Dominant eigenvalue and (unnormalized) eigenvector of an irreducible
/// matrix by power iteration on `B = I + A`, which is primitive. Each step
/// certifies `λ_B` between the Collatz–Wielandt bounds
/// `min (Bv)_i / v_i` and `max (Bv)_i / v_i`.
fn dominant_pair(a: &TransitionMatrix, prec: u32) -> Result<(HighPrecReal, Vec<HighPrecReal>)> {
    let n = a.dim();
    let keep = prec as u64 + 48;
    let mut v = vec![BigUint::one() << keep; n];
    let tol = BigRational::new(BigInt::one(), BigInt::one() << (prec + 4));
    for step in 0..PERRON_STEP_BUDGET {
        let mut w = a.apply(&v);
        for (wi, vi) in w.iter_mut().zip(&v) {
            *wi += vi;
        }
        let mut lo: Option<BigRational> = None;
        let mut hi: Option<BigRational> = None;
        for (wi, vi) in w.iter().zip(&v) {
            let q = BigRational::new(BigInt::from(wi.clone()), BigInt::from(vi.clone()));
            if lo.as_ref().map_or(true, |l| &q < l) {
                lo = Some(q.clone());
            }
            if hi.as_ref().map_or(true, |h| &q > h) {
                hi = Some(q);
            }
        }
        let (lo, hi) = (lo.expect("n >= 1"), hi.expect("n >= 1"));
        if (&hi - &lo) <= &lo * &tol {
            let one = BigRational::one();
            let lambda = HighPrecReal::from_bounds(&(lo - &one), &(hi - one), prec);
            let wp = prec + 16;
            let vec = v
                .iter()
                .map(|x| HighPrecReal::from_ratio(&BigInt::from(x.clone()), &BigInt::from(BigUint::one() << keep), wp))
                .collect();
            return Ok((lambda, vec));
        }
        let min_bits = w.iter().map(|x| x.bits()).min().unwrap_or(0);
        if min_bits > keep + 8 {
            let shift = min_bits - keep;
            for x in w.iter_mut() {
                *x >>= shift;
            }
        }
        v = w;
        let _ = step;
    }
    Err(MisError::NonConvergence {
        iterations: PERRON_STEP_BUDGET,
    })
}

/// Dominant eigenvalue with normalized eigenvectors, `Σ right = 1` and
/// `left · right = 1`.
#[derive(Clone, Debug)]
pub struct PerronData {
    pub lambda: HighPrecReal,
    pub left: Vec<HighPrecReal>,
    pub right: Vec<HighPrecReal>,
}

/// The one-dimensional system Ω.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubshiftSpec {
    kind: SubshiftKind,
    matrix: TransitionMatrix,
}

impl SubshiftSpec {
    pub fn full_shift(alphabet_size: usize) -> Result<Self> {
        if alphabet_size < 1 {
            return Err(MisError::invalid("alphabet_size", "must be at least 1"));
        }
        Ok(SubshiftSpec {
            kind: SubshiftKind::FullShift,
            matrix: TransitionMatrix::all_ones(alphabet_size),
        })
    }

    pub fn vertex_sft(rows: &[Vec<u8>]) -> Result<Self> {
        Ok(SubshiftSpec {
            kind: SubshiftKind::VertexSft,
            matrix: TransitionMatrix::from_rows(rows)?,
        })
    }

    /// Binary shift forbidding the word `11`.
    pub fn golden_mean() -> Self {
        Self::vertex_sft(&[vec![1, 1], vec![1, 0]]).expect("valid matrix")
    }

    pub fn kind(&self) -> SubshiftKind {
        self.kind
    }

    pub fn alphabet_size(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &TransitionMatrix {
        &self.matrix
    }

    pub fn is_irreducible(&self) -> bool {
        self.matrix.is_irreducible()
    }

    pub fn is_mixing(&self) -> bool {
        self.matrix.is_primitive()
    }

    pub fn allows(&self, a: usize, b: usize) -> bool {
        self.matrix.get(a, b)
    }

    /// Whether `word` is admissible.
    pub fn admits(&self, word: &[usize]) -> bool {
        word.iter().all(|&s| s < self.alphabet_size()) && word.windows(2).all(|w| self.allows(w[0], w[1]))
    }

    /// `|Ω_len|`.
    pub fn word_count(&self, len: usize) -> BigUint {
        match self.kind {
            SubshiftKind::FullShift => BigUint::from(self.alphabet_size()).pow(len as u32),
            SubshiftKind::VertexSft => self.matrix.word_counts(len).pop().expect("nonempty"),
        }
    }

    /// `|Ω_0|, |Ω_1|, …, |Ω_len|` with `|Ω_0| = 1`.
    pub fn word_counts(&self, len: usize) -> Vec<BigUint> {
        match self.kind {
            SubshiftKind::FullShift => {
                let r = BigUint::from(self.alphabet_size());
                let mut out = vec![BigUint::one()];
                for l in 1..=len {
                    let next = &out[l - 1] * &r;
                    out.push(next);
                }
                out
            }
            SubshiftKind::VertexSft => self.matrix.word_counts(len),
        }
    }

    pub fn perron_data(&self, prec: u32) -> Result<PerronData> {
        self.matrix.perron_data(prec)
    }

    /// `ln λ_A`.
    pub fn entropy_rate_1d(&self, prec: u32) -> Result<HighPrecReal> {
        let ctx = LnContext::new(prec + 8);
        if self.kind == SubshiftKind::FullShift {
            return Ok(ctx.ln_u64(self.alphabet_size() as u64).with_prec(prec));
        }
        let data = self.perron_data(prec + 8)?;
        let ln = data.lambda.ln(&ctx).ok_or(MisError::ReducibleMatrix)?;
        Ok(ln.with_prec(prec))
    }

    /// `ln |Ω_ℓ|` for `ℓ = 0..=max_len`, each within `2^-prec`.
    ///
    /// Large lengths go through second differences of the logs:
    /// `ln(S_ℓ S_{ℓ-2} / S_{ℓ-1}^2)` is tiny once the count ratios settle, so
    /// each new term costs a few series steps instead of a full logarithm.
    pub fn word_logs(&self, max_len: usize, prec: u32) -> Result<Vec<HighPrecReal>> {
        let guard = 2 * (usize::BITS - max_len.leading_zeros()) + 16;
        let ctx = LnContext::new(prec + guard);
        if self.kind == SubshiftKind::FullShift {
            let ln_r = ctx.ln_u64(self.alphabet_size() as u64);
            return Ok((0..=max_len)
                .map(|l| ln_r.mul_int(&BigInt::from(l)).with_prec(prec))
                .collect());
        }
        let counts = self.word_counts(max_len);
        if let Some(l) = counts.iter().position(|c| c.is_zero()) {
            return Err(MisError::invalid(
                "omega",
                format!("no admissible words of length {l}"),
            ));
        }
        let mut logs = Vec::with_capacity(max_len + 1);
        logs.push(HighPrecReal::zero(prec + guard));
        const DIRECT: usize = 3;
        for l in 1..=max_len.min(DIRECT) {
            logs.push(ctx.ln_uint(&counts[l]));
        }
        if max_len > DIRECT {
            let mut step = ctx.ln_ratio(&counts[DIRECT], &counts[DIRECT - 1]);
            for l in DIRECT + 1..=max_len {
                let num = &counts[l] * &counts[l - 2];
                let den = &counts[l - 1] * &counts[l - 1];
                step = &step + &ctx.ln_ratio(&num, &den);
                let next = &logs[l - 1] + &step;
                logs.push(next);
            }
        }
        Ok(logs.into_iter().map(|x| x.with_prec(prec)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_words(spec: &SubshiftSpec, len: usize) -> usize {
        let r = spec.alphabet_size();
        let total = r.pow(len as u32);
        (0..total)
            .filter(|&mut_code| {
                let mut code = mut_code;
                let mut w = Vec::with_capacity(len);
                for _ in 0..len {
                    w.push(code % r);
                    code /= r;
                }
                spec.admits(&w)
            })
            .count()
    }

    #[test]
    fn word_count_examples() {
        let gm = SubshiftSpec::golden_mean();
        assert_eq!(SubshiftSpec::full_shift(2).unwrap().word_count(3), BigUint::from(8u32));
        assert_eq!(gm.word_count(2), BigUint::from(3u32));
        assert_eq!(gm.word_count(5), BigUint::from(13u32));
        for len in 1..=10 {
            assert_eq!(gm.word_count(len), BigUint::from(brute_words(&gm, len)));
        }
    }

    #[test]
    fn full_shift_matches_all_ones_sft() {
        let full = SubshiftSpec::full_shift(3).unwrap();
        let ones = SubshiftSpec::vertex_sft(&vec![vec![1; 3]; 3]).unwrap();
        for len in 1..=10 {
            assert_eq!(full.word_count(len), ones.word_count(len));
        }
    }

    #[test]
    fn irreducibility_and_period() {
        let gm = SubshiftSpec::golden_mean();
        assert!(gm.is_irreducible() && gm.is_mixing());
        let flip = TransitionMatrix::from_rows(&[vec![0, 1], vec![1, 0]]).unwrap();
        assert!(flip.is_irreducible());
        assert_eq!(flip.period(), Some(2));
        let tri = TransitionMatrix::from_rows(&[vec![1, 1], vec![0, 1]]).unwrap();
        assert!(!tri.is_irreducible());
        assert_eq!(tri.cyclic_components(), vec![vec![0], vec![1]]);
        assert!(TransitionMatrix::from_rows(&[vec![1]]).unwrap().is_irreducible());
        assert!(!TransitionMatrix::from_rows(&[vec![0]]).unwrap().is_irreducible());
    }

    #[test]
    fn bad_matrices_rejected() {
        assert!(SubshiftSpec::vertex_sft(&[vec![1, 1], vec![1]]).is_err());
        assert!(SubshiftSpec::vertex_sft(&[vec![1, 2], vec![1, 0]]).is_err());
        assert!(SubshiftSpec::vertex_sft(&[]).is_err());
    }

    #[test]
    fn perron_examples() {
        let g = (1.0 + 5f64.sqrt()) / 2.0;
        let gm = SubshiftSpec::golden_mean().perron_data(128).unwrap();
        assert!((gm.lambda.to_f64() - g).abs() < 1e-15);
        assert!(gm.lambda.error_bound() < 1e-35);
        let one = SubshiftSpec::vertex_sft(&[vec![1]]).unwrap().perron_data(64).unwrap();
        assert!((one.lambda.to_f64() - 1.0).abs() < 1e-15);
        assert!((one.left[0].to_f64() - 1.0).abs() < 1e-15);
        assert!((one.right[0].to_f64() - 1.0).abs() < 1e-15);
        let two = SubshiftSpec::full_shift(2).unwrap().perron_data(64).unwrap();
        assert!((two.lambda.to_f64() - 2.0).abs() < 1e-15);
        let flip = SubshiftSpec::vertex_sft(&[vec![0, 1], vec![1, 0]]).unwrap();
        assert!((flip.perron_data(64).unwrap().lambda.to_f64() - 1.0).abs() < 1e-15);
        let tri = SubshiftSpec::vertex_sft(&[vec![1, 1], vec![0, 1]]).unwrap();
        assert_eq!(tri.perron_data(64).unwrap_err(), MisError::ReducibleMatrix);
    }

    #[test]
    fn entropy_rate_examples() {
        let g = (1.0 + 5f64.sqrt()) / 2.0;
        let h = SubshiftSpec::golden_mean().entropy_rate_1d(100).unwrap();
        assert!((h.to_f64() - g.ln()).abs() < 1e-15);
        assert_eq!(h.to_decimal_string(10), "0.4812118251");
        let h2 = SubshiftSpec::full_shift(2).unwrap().entropy_rate_1d(64).unwrap();
        assert_eq!(h2.to_decimal_string(10), "0.6931471806");
        let h1 = SubshiftSpec::vertex_sft(&[vec![1]]).unwrap().entropy_rate_1d(64).unwrap();
        assert!(h1.contains_zero());
    }

    #[test]
    fn word_logs_agree_with_direct_logs() {
        let gm = SubshiftSpec::golden_mean();
        let logs = gm.word_logs(200, 128).unwrap();
        let ctx = LnContext::new(400);
        let counts = gm.word_counts(200);
        for l in [0usize, 1, 2, 3, 4, 5, 50, 199, 200] {
            let direct = ctx.ln_uint(&counts[l]);
            assert!(logs[l].contains_rational(&direct.mid_rational()), "l = {l}");
            assert!(logs[l].error_bound() < 1e-36);
        }
        let periodic = SubshiftSpec::vertex_sft(&[vec![0, 1, 0], vec![0, 0, 1], vec![1, 1, 0]]).unwrap();
        let logs = periodic.word_logs(60, 96).unwrap();
        let counts = periodic.word_counts(60);
        for l in 1..=60 {
            let direct = ctx.ln_uint(&counts[l]);
            assert!(logs[l].contains_rational(&direct.mid_rational()), "l = {l}");
        }
    }

    #[test]
    fn log_spectral_radius_of_reducible_matrix() {
        // component {0,1} is golden mean, {2} is a single loop
        let m = TransitionMatrix::from_rows(&[vec![1, 1, 1], vec![1, 0, 0], vec![0, 0, 1]]).unwrap();
        let (h, irreducible) = m.log_spectral_radius(64).unwrap();
        assert!(!irreducible);
        let g = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((h.to_f64() - g.ln()).abs() < 1e-12);
        let nil = TransitionMatrix::from_rows(&[vec![0, 1], vec![0, 0]]).unwrap();
        assert_eq!(nil.log_spectral_radius(64).unwrap_err(), MisError::EmptyLanguage);
    }
}
