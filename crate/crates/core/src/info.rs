//! Exact information measures on finite joint distributions, plus the
//! entropy-based lemma verifiers that check the converse machinery on
//! concrete schemes: the per-demand cut-set bound, the averaged subset
//! inequality, and the distinct-demand count identity.

use std::cell::RefCell;
use std::collections::{HashMap, HashSet};

use thiserror::Error;

use crate::bounds::pow_one_minus;
use crate::scheme::{CacheScheme, Library, SchemeError};
use crate::types::DemandVector;

#[derive(Debug, Error)]
pub enum InfoError {
    #[error("probabilities must be finite, nonnegative and sum to 1 (sum = {sum})")]
    NotAPmf { sum: f64 },
    #[error("table shape mismatch: {cells} cells for the given alphabet sizes")]
    ShapeMismatch { cells: usize },
    #[error("{what} = {needed} exceeds the cap {cap}")]
    CapExceeded {
        what: &'static str,
        needed: u128,
        cap: u128,
    },
    #[error("variable index {index} out of range (n = {n_vars})")]
    BadIndex { index: usize, n_vars: usize },
    #[error("variable subset must be nonempty")]
    EmptySubset,
    #[error("variable sets must be pairwise disjoint")]
    OverlappingSets,
    #[error("subset level l = {l} outside 1..={total}")]
    BadHanLevel { l: usize, total: usize },
    #[error("blocks are not mutually independent (entropy gap = {gap})")]
    IndependenceViolated { gap: f64 },
    #[error("ell = {ell} outside 1..={max}")]
    BadEll { ell: u32, max: u32 },
    #[error(transparent)]
    Scheme(#[from] SchemeError),
}

/// Branch-free compensated accumulator for entropy sums.
#[derive(Clone, Copy, Default)]
struct Kahan {
    sum: f64,
    comp: f64,
}

impl Kahan {
    #[inline]
    fn add(&mut self, x: f64) {
        let y = x - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    fn value(self) -> f64 {
        self.sum
    }
}

/// Dense joint distribution over a small product alphabet, row-major with
/// the last variable varying fastest.
#[derive(Debug, Clone)]
pub struct JointPmf {
    sizes: Vec<usize>,
    strides: Vec<usize>,
    probs: Vec<f64>,
}

const MAX_CELLS: usize = 1 << 20;
const MAX_VARS: usize = 16;

impl JointPmf {
    pub fn new(sizes: Vec<usize>, probs: Vec<f64>) -> Result<Self, InfoError> {
        if sizes.len() > MAX_VARS {
            return Err(InfoError::CapExceeded {
                what: "variables",
                needed: sizes.len() as u128,
                cap: MAX_VARS as u128,
            });
        }
        let mut total: usize = 1;
        for &s in &sizes {
            if s == 0 {
                return Err(InfoError::ShapeMismatch { cells: 0 });
            }
            total = total.checked_mul(s).unwrap_or(usize::MAX);
            if total > MAX_CELLS {
                return Err(InfoError::CapExceeded {
                    what: "table cells",
                    needed: total as u128,
                    cap: MAX_CELLS as u128,
                });
            }
        }
        if probs.len() != total {
            return Err(InfoError::ShapeMismatch { cells: probs.len() });
        }
        let mut sum = Kahan::default();
        for &p in &probs {
            if !p.is_finite() || p < 0.0 {
                return Err(InfoError::NotAPmf { sum: f64::NAN });
            }
            sum.add(p);
        }
        let sum = sum.value();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(InfoError::NotAPmf { sum });
        }
        let mut strides = vec![1usize; sizes.len()];
        for i in (0..sizes.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * sizes[i + 1];
        }
        Ok(Self {
            sizes,
            strides,
            probs,
        })
    }

    pub fn n_vars(&self) -> usize {
        self.sizes.len()
    }

    pub fn alphabet_sizes(&self) -> &[usize] {
        &self.sizes
    }

    fn subset_to_mask(&self, subset: &[usize]) -> Result<u32, InfoError> {
        let mut mask = 0u32;
        for &i in subset {
            if i >= self.sizes.len() {
                return Err(InfoError::BadIndex {
                    index: i,
                    n_vars: self.sizes.len(),
                });
            }
            mask |= 1 << i;
        }
        Ok(mask)
    }

    pub(crate) fn entropy_of_mask(&self, mask: u32) -> f64 {
        if mask == 0 {
            return 0.0;
        }
        let vars: Vec<usize> = (0..self.sizes.len()).filter(|i| mask >> i & 1 == 1).collect();
        let marg_len: usize = vars.iter().map(|&i| self.sizes[i]).product();
        let mut marginal = vec![0.0f64; marg_len];
        for (idx, &p) in self.probs.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let mut m = 0usize;
            for &i in &vars {
                m = m * self.sizes[i] + (idx / self.strides[i]) % self.sizes[i];
            }
            marginal[m] += p;
        }
        let mut h = Kahan::default();
        for &p in &marginal {
            if p > 0.0 {
                h.add(-p * p.log2());
            }
        }
        h.value()
    }

    /// Shannon entropy (bits) of the marginal on `subset`.
    pub fn entropy(&self, subset: &[usize]) -> Result<f64, InfoError> {
        if subset.is_empty() {
            return Err(InfoError::EmptySubset);
        }
        Ok(self.entropy_of_mask(self.subset_to_mask(subset)?))
    }

    /// `I(A; B | C)`, clamped to zero when the exact value rounds to a tiny
    /// negative.
    pub fn conditional_mi(
        &self,
        a: &[usize],
        b: &[usize],
        c: &[usize],
    ) -> Result<f64, InfoError> {
        if a.is_empty() || b.is_empty() {
            return Err(InfoError::EmptySubset);
        }
        let ma = self.subset_to_mask(a)?;
        let mb = self.subset_to_mask(b)?;
        let mc = self.subset_to_mask(c)?;
        if ma & mb != 0 || ma & mc != 0 || mb & mc != 0 {
            return Err(InfoError::OverlappingSets);
        }
        let raw = self.entropy_of_mask(ma | mc) + self.entropy_of_mask(mb | mc)
            - self.entropy_of_mask(ma | mb | mc)
            - self.entropy_of_mask(mc);
        debug_assert!(raw >= -1e-10, "conditional MI fell below -1e-10: {raw}");
        Ok(if raw < 0.0 && raw >= -1e-10 { 0.0 } else { raw })
    }
}

/// Both sides of the averaged-subset mutual-information inequality for
/// independent blocks `A_1..A_L` and side variable set `v`: the mean of
/// `I(A_S; V)` over all `|S| = l` against `(l/L) I(A_1..A_L; V)`.
pub fn han_check(
    pmf: &JointPmf,
    parts: &[Vec<usize>],
    v: &[usize],
    l: usize,
) -> Result<(f64, f64), InfoError> {
    let total = parts.len();
    if l < 1 || l > total {
        return Err(InfoError::BadHanLevel { l, total });
    }
    let mut part_masks = Vec::with_capacity(total);
    let mut all = 0u32;
    for p in parts {
        if p.is_empty() {
            return Err(InfoError::EmptySubset);
        }
        let m = pmf.subset_to_mask(p)?;
        if m & all != 0 {
            return Err(InfoError::OverlappingSets);
        }
        all |= m;
        part_masks.push(m);
    }
    let mv = pmf.subset_to_mask(v)?;
    if mv & all != 0 {
        return Err(InfoError::OverlappingSets);
    }

    let joint = pmf.entropy_of_mask(all);
    let sum_parts: f64 = part_masks.iter().map(|&m| pmf.entropy_of_mask(m)).sum();
    let gap = (joint - sum_parts).abs();
    if gap > 1e-9 {
        return Err(InfoError::IndependenceViolated { gap });
    }

    let h_v = pmf.entropy_of_mask(mv);
    let mi = |mask: u32| pmf.entropy_of_mask(mask) + h_v - pmf.entropy_of_mask(mask | mv);

    // All l-subsets of the L blocks via Gosper's hack.
    let mut lhs = Kahan::default();
    let mut count = 0u64;
    let mut sel: u32 = (1 << l) - 1;
    while sel < 1 << total {
        let mut mask = 0u32;
        for (i, &m) in part_masks.iter().enumerate() {
            if sel >> i & 1 == 1 {
                mask |= m;
            }
        }
        lhs.add(mi(mask));
        count += 1;
        let low = sel & sel.wrapping_neg();
        let carry = sel + low;
        sel = carry | (((sel ^ carry) / low) >> 2);
    }
    let lhs = lhs.value() / count as f64;
    let rhs = l as f64 / total as f64 * mi(all);
    Ok((lhs, rhs))
}

/// Expected number of distinct entries of a uniform demand prefix of length
/// `ell` over `N` files: `N (1 - (1 - 1/N)^ell)`.
pub fn expected_distinct(files: u32, ell: u32) -> f64 {
    let n = f64::from(files);
    n * (1.0 - pow_one_minus(1.0 / n, f64::from(ell)))
}

/// The same expectation by exhaustive enumeration of all `N^ell` prefixes.
pub fn expected_distinct_enumerated(files: u32, ell: u32) -> Result<f64, InfoError> {
    let count = u128::from(files).pow(ell);
    if count > 1_000_000 {
        return Err(InfoError::CapExceeded {
            what: "prefix enumeration",
            needed: count,
            cap: 1_000_000,
        });
    }
    let mut sum: u64 = 0;
    for d in DemandVector::enumerate(ell as usize, files) {
        sum += u64::from(d.distinct_prefix(ell as usize));
    }
    Ok(sum as f64 / count as f64)
}

/// Outcome of the per-demand cut-set check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lemma1Report {
    pub distinct: u32,
    pub rate_bound: f64,
    pub achieved_rate: f64,
}

/// Outcome of the distinct-prefix averaged bound check.
#[derive(Debug, Clone, PartialEq)]
pub struct Lemma3Report {
    pub alphas: Vec<f64>,
    pub bound_quadratic: f64,
    pub bound_harmonic: f64,
    pub memory: f64,
}

/// Outcome of the repeated-prefix averaged bound check.
#[derive(Debug, Clone, PartialEq)]
pub struct Lemma4Report {
    pub betas: Vec<f64>,
    pub bound_coverage: f64,
    pub bound_triangular: f64,
    pub memory: f64,
}

const DECODE_CHECK_SEED: u64 = 0x5eed;

/// Exact joint distribution induced by a concrete scheme under uniform
/// messages. Entropies are computed by counting preimage sizes, so no
/// floating-point probability enters before the final log step.
pub struct SchemeEntropyContext {
    scheme: CacheScheme,
    files: usize,
    f_bits: usize,
    total: usize,
    cache_bits: usize,
    /// `cache_vals[k-1][outcome]`: receiver k's cache contents.
    cache_vals: Vec<Vec<u64>>,
    memo: RefCell<HashMap<(u32, u32), f64>>,
}

impl SchemeEntropyContext {
    pub fn new(scheme: CacheScheme) -> Result<Self, InfoError> {
        let ps = scheme.problem();
        let files = ps.files() as usize;
        let f_bits = scheme.f_bits();
        let joint_bits = files * f_bits;
        if joint_bits > 20 {
            return Err(InfoError::CapExceeded {
                what: "joint outcome bits",
                needed: joint_bits as u128,
                cap: 20,
            });
        }
        let cached = scheme.cached_subfile_indices(1);
        let cache_bits = cached.len() * scheme.subfile_bits() * files;
        if joint_bits + ps.users() as usize * cache_bits > 128 {
            return Err(InfoError::CapExceeded {
                what: "entropy key bits",
                needed: (joint_bits + ps.users() as usize * cache_bits) as u128,
                cap: 128,
            });
        }
        let total = 1usize << joint_bits;
        let sub_bits = scheme.subfile_bits();
        let sub_mask = (1u64 << sub_bits) - 1;
        let mut cache_vals = Vec::with_capacity(ps.users() as usize);
        for k in 1..=ps.users() {
            let cached = scheme.cached_subfile_indices(k);
            let mut vals = Vec::with_capacity(total);
            for outcome in 0..total as u64 {
                let mut v: u64 = 0;
                for n in 0..files {
                    let w = outcome >> (n * f_bits);
                    for &s in &cached {
                        v = (v << sub_bits) | (w >> (s as usize * sub_bits)) & sub_mask;
                    }
                }
                vals.push(v);
            }
            cache_vals.push(vals);
        }
        Ok(Self {
            scheme,
            files,
            f_bits,
            total,
            cache_bits,
            cache_vals,
            memo: RefCell::new(HashMap::new()),
        })
    }

    pub fn scheme(&self) -> &CacheScheme {
        &self.scheme
    }

    fn message_of(&self, outcome: usize, n: usize) -> u64 {
        (outcome as u64 >> (n * self.f_bits)) & ((1u64 << self.f_bits) - 1)
    }

    fn entropy_of_counts<I: Iterator<Item = u64>>(&self, counts: I) -> f64 {
        let total = self.total as f64;
        let mut acc = Kahan::default();
        for c in counts {
            let c = c as f64;
            acc.add(c * c.log2());
        }
        total.log2() - acc.value() / total
    }

    /// Joint entropy (bits) of `{W_n : n in w_mask} u {V_k : k in v_mask}`.
    pub fn entropy_wv(&self, w_mask: u32, v_mask: u32) -> f64 {
        if let Some(&h) = self.memo.borrow().get(&(w_mask, v_mask)) {
            return h;
        }
        let mut counts: HashMap<u128, u64> = HashMap::new();
        for outcome in 0..self.total {
            let mut key: u128 = 0;
            for n in 0..self.files {
                if w_mask >> n & 1 == 1 {
                    key = (key << self.f_bits) | u128::from(self.message_of(outcome, n));
                }
            }
            for (k, vals) in self.cache_vals.iter().enumerate() {
                if v_mask >> k & 1 == 1 {
                    key = (key << self.cache_bits) | u128::from(vals[outcome]);
                }
            }
            *counts.entry(key).or_insert(0) += 1;
        }
        let h = self.entropy_of_counts(counts.into_values());
        self.memo.borrow_mut().insert((w_mask, v_mask), h);
        h
    }

    pub fn cache_entropy(&self, k: u32) -> f64 {
        self.entropy_wv(0, 1 << (k - 1))
    }

    /// Tightest memory (files) the scheme actually uses: `max_k H(V_k)/F`.
    pub fn memory_files(&self) -> f64 {
        (1..=self.scheme.problem().users())
            .map(|k| self.cache_entropy(k) / self.f_bits as f64)
            .fold(0.0, f64::max)
    }

    /// `I(W_A; V_B | W_C)` with set-union semantics: a demanded file already
    /// in the conditioning set contributes exactly zero.
    fn cmi_w_v(&self, w_a: u32, v_b: u32, w_c: u32) -> f64 {
        let raw = self.entropy_wv(w_a | w_c, 0) + self.entropy_wv(w_c, v_b)
            - self.entropy_wv(w_a | w_c, v_b)
            - self.entropy_wv(w_c, 0);
        debug_assert!(raw >= -1e-10);
        raw.max(0.0)
    }

    /// `log2 |range(X_d)| / F`: the exact per-demand rate of the transcript
    /// map, by enumerating all message realizations.
    pub fn achieved_rate(&self, d: &DemandVector) -> Result<f64, InfoError> {
        let plan = self.scheme.plan(d)?;
        let sub_bits = self.scheme.subfile_bits();
        if plan.blocks.len() * sub_bits > 128 {
            return Err(InfoError::CapExceeded {
                what: "transcript bits",
                needed: (plan.blocks.len() * sub_bits) as u128,
                cap: 128,
            });
        }
        let sub_mask = (1u64 << sub_bits) - 1;
        let mut range: HashSet<u128> = HashSet::new();
        for outcome in 0..self.total {
            let mut key: u128 = 0;
            for (_, terms) in &plan.blocks {
                let mut block: u64 = 0;
                for &(file, s) in terms {
                    block ^=
                        (self.message_of(outcome, file as usize) >> (s as usize * sub_bits))
                            & sub_mask;
                }
                key = (key << sub_bits) | u128::from(block);
            }
            range.insert(key);
        }
        Ok((range.len() as f64).log2() / self.f_bits as f64)
    }

    /// Per-demand converse check: the cut-set style bound against the rate
    /// the transcript actually achieves. The caller asserts
    /// `achieved_rate >= rate_bound - 1e-9`.
    pub fn lemma1_check(&self, d: &DemandVector, ell: u32) -> Result<Lemma1Report, InfoError> {
        let nbar = self.scheme.problem().nbar();
        if ell < 1 || ell > nbar {
            return Err(InfoError::BadEll { ell, max: nbar });
        }
        // The bound only applies to schemes that actually decode d.
        let lib = Library::random(self.scheme.problem(), self.f_bits, DECODE_CHECK_SEED);
        self.scheme.deliver(d, &lib)?;

        let mut sum = 0.0;
        let mut w_c = 0u32;
        for k in 1..=ell as usize {
            let file = d.entries()[k - 1] - 1;
            let v_b = (1u32 << k) - 1;
            sum += self.cmi_w_v(1 << file, v_b, w_c);
            w_c |= 1 << file;
        }
        let distinct = d.distinct_prefix(ell as usize);
        Ok(Lemma1Report {
            distinct,
            rate_bound: f64::from(distinct) - sum / self.f_bits as f64,
            achieved_rate: self.achieved_rate(d)?,
        })
    }

    /// Averaged bound over ordered distinct demand prefixes; the caller
    /// asserts `sum(alphas) <= min(bound_quadratic, bound_harmonic) + 1e-9`.
    pub fn lemma3_alphas(&self, ell: u32) -> Result<Lemma3Report, InfoError> {
        let ps = self.scheme.problem();
        if ell < 1 || ell > ps.nbar() {
            return Err(InfoError::BadEll {
                ell,
                max: ps.nbar(),
            });
        }
        if ps.files() > 5 || ell > 4 {
            return Err(InfoError::CapExceeded {
                what: "distinct-prefix enumeration (N <= 5, ell <= 4)",
                needed: u128::from(ps.files()),
                cap: 5,
            });
        }
        let n = ps.files();
        let ell_us = ell as usize;
        let mut alphas = vec![0.0f64; ell_us];
        let mut count = 0u64;
        let mut tuple: Vec<u32> = Vec::with_capacity(ell_us);
        self.visit_distinct_tuples(n, ell_us, &mut tuple, &mut |ctx, tuple| {
            count += 1;
            let mut w_c = 0u32;
            for (k, &file) in tuple.iter().enumerate() {
                let v_b = (1u32 << (k + 1)) - 1;
                alphas[k] += ctx.cmi_w_v(1 << (file - 1), v_b, w_c);
                w_c |= 1 << (file - 1);
            }
        });
        for a in &mut alphas {
            *a /= count as f64 * self.f_bits as f64;
        }
        let memory = self.memory_files();
        let nf = f64::from(n);
        let lf = f64::from(ell);
        let bound_quadratic = lf * lf * memory / nf;
        let bound_harmonic = (1..=ell)
            .map(|k| f64::from(k) * memory / (nf - f64::from(k) + 1.0))
            .sum();
        Ok(Lemma3Report {
            alphas,
            bound_quadratic,
            bound_harmonic,
            memory,
        })
    }

    /// Ordered distinct tuples from `1..=n` of length `ell`, lexicographic.
    fn visit_distinct_tuples(
        &self,
        n: u32,
        ell: usize,
        tuple: &mut Vec<u32>,
        f: &mut impl FnMut(&Self, &[u32]),
    ) {
        if tuple.len() == ell {
            f(self, tuple);
            return;
        }
        for c in 1..=n {
            if !tuple.contains(&c) {
                tuple.push(c);
                self.visit_distinct_tuples(n, ell, tuple, f);
                tuple.pop();
            }
        }
    }

    /// Averaged bound over repeated demand prefixes; the caller asserts
    /// `sum(betas) <= min(bound_coverage, bound_triangular) + 1e-9`.
    pub fn lemma4_betas(&self, ell: u32) -> Result<Lemma4Report, InfoError> {
        let ps = self.scheme.problem();
        if ell < 1 || ell > ps.users() {
            return Err(InfoError::BadEll {
                ell,
                max: ps.users(),
            });
        }
        let n = ps.files();
        let count = u128::from(n).pow(ell);
        if count > 10_000 {
            return Err(InfoError::CapExceeded {
                what: "repeated-prefix enumeration",
                needed: count,
                cap: 10_000,
            });
        }
        let mut betas = vec![0.0f64; ell as usize];
        for (k, beta) in betas.iter_mut().enumerate() {
            let k1 = k + 1;
            let mut acc = Kahan::default();
            for d in DemandVector::enumerate(k1, n) {
                let mut w_c = 0u32;
                for &file in &d.entries()[..k] {
                    w_c |= 1 << (file - 1);
                }
                let file = d.entries()[k] - 1;
                acc.add(self.cmi_w_v(1 << file, (1u32 << k1) - 1, w_c));
            }
            *beta = acc.value() / (f64::from(n).powi(k1 as i32) * self.f_bits as f64);
        }
        let memory = self.memory_files();
        let nf = f64::from(n);
        let lf = f64::from(ell);
        Ok(Lemma4Report {
            betas,
            bound_coverage: expected_distinct(n, ell) * lf * memory / nf,
            bound_triangular: lf * (lf + 1.0) / 2.0 * memory / nf,
            memory,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheme::place;
    use crate::types::ProblemSize;
    use approx::assert_relative_eq;

    fn ps(k: u32, n: u32) -> ProblemSize {
        ProblemSize::new(k, n).unwrap()
    }

    fn demand(entries: &[u32], n: u32) -> DemandVector {
        DemandVector::new(entries.to_vec(), n).unwrap()
    }

    #[test]
    fn entropy_basics() {
        let bit = JointPmf::new(vec![2], vec![0.5, 0.5]).unwrap();
        assert_eq!(bit.entropy(&[0]).unwrap(), 1.0);

        let two = JointPmf::new(vec![2, 2], vec![0.25; 4]).unwrap();
        assert_eq!(two.entropy(&[0, 1]).unwrap(), 2.0);

        let skew = JointPmf::new(vec![2], vec![0.25, 0.75]).unwrap();
        // Fifty-digit reference: 0.81127812445913286390969579...
        assert_relative_eq!(
            skew.entropy(&[0]).unwrap(),
            0.811_278_124_459_132_9,
            max_relative = 1e-12
        );
    }

    #[test]
    fn pmf_validation() {
        assert!(JointPmf::new(vec![2], vec![0.5, 0.6]).is_err());
        assert!(JointPmf::new(vec![2], vec![-0.5, 1.5]).is_err());
        assert!(JointPmf::new(vec![2], vec![0.5, 0.25, 0.25]).is_err());
        let p = JointPmf::new(vec![2], vec![0.5, 0.5]).unwrap();
        assert!(p.entropy(&[1]).is_err());
        assert!(p.entropy(&[]).is_err());
    }

    #[test]
    fn conditional_mi_cases() {
        // Independent bits.
        let indep = JointPmf::new(vec![2, 2], vec![0.25; 4]).unwrap();
        assert_eq!(indep.conditional_mi(&[0], &[1], &[]).unwrap(), 0.0);

        // Perfect copy: I(A;B) = H(A) = 1.
        let copy = JointPmf::new(vec![2, 2], vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        assert_eq!(copy.conditional_mi(&[0], &[1], &[]).unwrap(), 1.0);

        // A, B uniform bits, C = A xor B: I(A;B|C) = 1.
        let mut probs = vec![0.0; 8];
        for a in 0..2usize {
            for b in 0..2usize {
                let c = a ^ b;
                probs[a * 4 + b * 2 + c] = 0.25;
            }
        }
        let xor = JointPmf::new(vec![2, 2, 2], probs).unwrap();
        assert_eq!(xor.conditional_mi(&[0], &[1], &[2]).unwrap(), 1.0);

        assert!(xor.conditional_mi(&[0], &[0], &[]).is_err());
        assert!(xor.conditional_mi(&[0], &[1], &[1]).is_err());
    }

    fn xor_pmf() -> JointPmf {
        let mut probs = vec![0.0; 8];
        for a in 0..2usize {
            for b in 0..2usize {
                probs[a * 4 + b * 2 + (a ^ b)] = 0.25;
            }
        }
        JointPmf::new(vec![2, 2, 2], probs).unwrap()
    }

    #[test]
    fn han_check_xor_and_degenerate_levels() {
        let pmf = xor_pmf();
        let parts = vec![vec![0], vec![1]];
        let (lhs, rhs) = han_check(&pmf, &parts, &[2], 1).unwrap();
        assert_relative_eq!(lhs, 0.0, epsilon = 1e-12);
        assert_relative_eq!(rhs, 0.5, max_relative = 1e-12);

        // l = L collapses to equality.
        let (lhs, rhs) = han_check(&pmf, &parts, &[2], 2).unwrap();
        assert_relative_eq!(lhs, rhs, max_relative = 1e-12);
        assert_relative_eq!(lhs, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn han_check_independent_side_variable() {
        // V independent of (A_1, A_2): both sides vanish.
        let mut probs = vec![0.0; 8];
        for a in 0..2usize {
            for b in 0..2usize {
                for v in 0..2usize {
                    probs[a * 4 + b * 2 + v] = 0.125;
                }
            }
        }
        let pmf = JointPmf::new(vec![2, 2, 2], probs).unwrap();
        let (lhs, rhs) = han_check(&pmf, &[vec![0], vec![1]], &[2], 1).unwrap();
        assert_relative_eq!(lhs, 0.0, epsilon = 1e-12);
        assert_relative_eq!(rhs, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn han_check_rejects_dependent_blocks() {
        let copy = JointPmf::new(vec![2, 2, 2], {
            let mut p = vec![0.0; 8];
            p[0] = 0.5; // (0,0,0)
            p[7] = 0.5; // (1,1,1)
            p
        })
        .unwrap();
        assert!(matches!(
            han_check(&copy, &[vec![0], vec![1]], &[2], 1),
            Err(InfoError::IndependenceViolated { .. })
        ));
    }

    #[test]
    fn expected_distinct_closed_form_vs_enumeration() {
        assert_relative_eq!(expected_distinct(2, 2), 1.5, max_relative = 1e-15);
        assert_eq!(expected_distinct(1, 5), 1.0);
        assert_relative_eq!(expected_distinct(3, 3), 19.0 / 9.0, max_relative = 1e-15);
        assert_relative_eq!(
            expected_distinct_enumerated(3, 3).unwrap(),
            19.0 / 9.0,
            max_relative = 1e-15
        );
        for n in 1..=6u32 {
            for ell in 1..=5u32 {
                assert_relative_eq!(
                    expected_distinct(n, ell),
                    expected_distinct_enumerated(n, ell).unwrap(),
                    max_relative = 1e-12
                );
            }
        }
        assert!(expected_distinct_enumerated(100, 4).is_err());
    }

    #[test]
    fn message_entropies_are_exact() {
        let ctx =
            SchemeEntropyContext::new(place(ps(2, 2), 2, 1).unwrap()).unwrap();
        for mask in 1..4u32 {
            let want = f64::from(mask.count_ones()) * 2.0;
            assert_relative_eq!(ctx.entropy_wv(mask, 0), want, max_relative = 1e-12);
        }
        // Each cache holds one bit of each file.
        assert_relative_eq!(ctx.cache_entropy(1), 2.0, max_relative = 1e-12);
        assert_relative_eq!(ctx.memory_files(), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn lemma1_uncached_and_full_caching() {
        // Empty caches, K = N = 2, F = 1: the bound is tight at 2.
        let ctx = SchemeEntropyContext::new(place(ps(2, 2), 1, 0).unwrap()).unwrap();
        let r = ctx.lemma1_check(&demand(&[1, 2], 2), 2).unwrap();
        assert_eq!(r.distinct, 2);
        assert_relative_eq!(r.rate_bound, 2.0, epsilon = 1e-12);
        assert_relative_eq!(r.achieved_rate, 2.0, epsilon = 1e-12);

        // Full caching: bound <= 0, achieved exactly 0.
        let full = SchemeEntropyContext::new(place(ps(2, 2), 1, 2).unwrap()).unwrap();
        for d in DemandVector::enumerate(2, 2) {
            let r = full.lemma1_check(&d, 2).unwrap();
            assert!(r.rate_bound <= 1e-12);
            assert_eq!(r.achieved_rate, 0.0);
        }
    }

    #[test]
    fn lemma1_half_caching() {
        let ctx = SchemeEntropyContext::new(place(ps(2, 2), 2, 1).unwrap()).unwrap();
        for d in DemandVector::enumerate(2, 2) {
            for ell in 1..=2u32 {
                let r = ctx.lemma1_check(&d, ell).unwrap();
                assert!(
                    r.achieved_rate >= r.rate_bound - 1e-9,
                    "d={d} ell={ell}: {r:?}"
                );
            }
        }
        let r = ctx.lemma1_check(&demand(&[1, 2], 2), 2).unwrap();
        assert_relative_eq!(r.achieved_rate, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn lemma3_examples() {
        // Empty caches: all alphas vanish.
        let empty = SchemeEntropyContext::new(place(ps(2, 2), 1, 0).unwrap()).unwrap();
        let r = empty.lemma3_alphas(2).unwrap();
        assert!(r.alphas.iter().all(|&a| a.abs() < 1e-12));
        assert_eq!(r.memory, 0.0);

        // Full caches, K = N = 2, F = 1: sum = 2 <= min(4, 5) with M = 2.
        let full = SchemeEntropyContext::new(place(ps(2, 2), 1, 2).unwrap()).unwrap();
        let r = full.lemma3_alphas(2).unwrap();
        let sum: f64 = r.alphas.iter().sum();
        assert_relative_eq!(sum, 2.0, max_relative = 1e-12);
        assert_relative_eq!(r.memory, 2.0, max_relative = 1e-12);
        assert_relative_eq!(r.bound_quadratic, 4.0, max_relative = 1e-12);
        assert_relative_eq!(r.bound_harmonic, 5.0, max_relative = 1e-12);

        // Half caching: sum = 1.5 <= min(2, 2.5) with M = 1.
        let half = SchemeEntropyContext::new(place(ps(2, 2), 2, 1).unwrap()).unwrap();
        let r = half.lemma3_alphas(2).unwrap();
        let sum: f64 = r.alphas.iter().sum();
        assert!(sum <= r.bound_quadratic.min(r.bound_harmonic) + 1e-9);
        assert_relative_eq!(sum, 1.5, max_relative = 1e-12);
    }

    #[test]
    fn lemma4_examples() {
        let half = SchemeEntropyContext::new(place(ps(2, 2), 2, 1).unwrap()).unwrap();
        let r = half.lemma4_betas(2).unwrap();
        let sum: f64 = r.betas.iter().sum();
        assert_relative_eq!(r.bound_coverage, 1.5, max_relative = 1e-12);
        assert_relative_eq!(r.bound_triangular, 1.5, max_relative = 1e-12);
        assert!(sum <= 1.5 + 1e-9);

        // Single-file library: beta_1 = I(W_1; V_1)/F <= M.
        let single = SchemeEntropyContext::new(place(ps(2, 1), 2, 1).unwrap()).unwrap();
        let r = single.lemma4_betas(1).unwrap();
        assert!(r.betas[0] <= r.memory + 1e-12);

        // Empty caches.
        let empty = SchemeEntropyContext::new(place(ps(2, 2), 1, 0).unwrap()).unwrap();
        let r = empty.lemma4_betas(2).unwrap();
        assert!(r.betas.iter().all(|&b| b.abs() < 1e-12));
    }

    #[test]
    fn context_caps() {
        // 4 files * 8 bits = 32 joint bits exceeds the 2^20 outcome cap.
        assert!(SchemeEntropyContext::new(place(ps(2, 4), 8, 1).unwrap()).is_err());
        let ctx = SchemeEntropyContext::new(place(ps(2, 2), 2, 1).unwrap()).unwrap();
        assert!(ctx.lemma3_alphas(0).is_err());
        assert!(ctx.lemma3_alphas(3).is_err());
        assert!(ctx.lemma4_betas(3).is_err());
    }
}
