//! Centralized subfile placement with XOR-coded delivery, the achievability
//! side that every converse bound must stay below. Files are bit vectors,
//! subfiles are contiguous bit ranges in colexicographic subset order, and
//! decoding runs exact GF(2) elimination on what a receiver actually knows.

use std::collections::HashMap;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::types::{DemandVector, ProblemSize, Rate, TypeError};

#[derive(Debug, Error, PartialEq)]
pub enum SchemeError {
    #[error("placement parameter t = {t} outside 0..={users}")]
    PlacementOutOfRange { t: u32, users: u32 },
    #[error("file length {f_bits} bits not divisible into {subfiles} subfiles")]
    IndivisibleFileLength { f_bits: usize, subfiles: u64 },
    #[error("demand vector has {got} entries, expected K = {users}")]
    DemandLength { got: usize, users: u32 },
    #[error(transparent)]
    BadDemand(#[from] TypeError),
    #[error("receiver {receiver} failed to decode demand {demand}; this is a bug signal")]
    DecodeFailed { receiver: u32, demand: String },
    #[error("library does not match the scheme ({files} files of {f_bits} bits expected)")]
    LibraryMismatch { files: u32, f_bits: usize },
    #[error("{what} = {needed} exceeds the cap {cap}; pass an explicit sampling budget")]
    CapExceeded {
        what: &'static str,
        needed: u128,
        cap: u128,
    },
}

pub(crate) fn binomial(n: u32, k: u32) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * u128::from(n - i) / u128::from(i + 1);
    }
    acc.try_into().expect("binomial fits in u64 at these sizes")
}

/// Fixed-length bit string, the contents of files, caches, and XOR blocks.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Bits {
    len: usize,
    words: Vec<u64>,
}

impl Bits {
    pub fn zeros(len: usize) -> Self {
        Bits {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn random(len: usize, rng: &mut impl RngCore) -> Self {
        let mut bits = Bits::zeros(len);
        for w in &mut bits.words {
            *w = rng.next_u64();
        }
        let tail = len % 64;
        if tail != 0 {
            let last = bits.words.len() - 1;
            bits.words[last] &= (1u64 << tail) - 1;
        }
        bits
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize, v: bool) {
        assert!(i < self.len);
        let mask = 1u64 << (i % 64);
        if v {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    pub fn xor_assign(&mut self, other: &Bits) {
        assert_eq!(self.len, other.len, "xor of unequal lengths");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn slice(&self, start: usize, len: usize) -> Bits {
        assert!(start + len <= self.len);
        let mut out = Bits::zeros(len);
        for i in 0..len {
            out.set(i, self.get(start + i));
        }
        out
    }

    /// Hex dump, first bit = most significant bit of the first digit; the
    /// final nibble is zero-padded.
    pub fn hex(&self) -> String {
        let mut out = String::with_capacity(self.len.div_ceil(4));
        for nib in 0..self.len.div_ceil(4) {
            let mut v = 0u8;
            for o in 0..4 {
                let i = nib * 4 + o;
                if i < self.len && self.get(i) {
                    v |= 1 << (3 - o);
                }
            }
            out.push(char::from_digit(u32::from(v), 16).expect("nibble"));
        }
        out
    }
}

/// The message library: `N` files of `F` bits each.
#[derive(Debug, Clone)]
pub struct Library {
    f_bits: usize,
    files: Vec<Bits>,
}

impl Library {
    pub fn random(ps: ProblemSize, f_bits: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let files = (0..ps.files())
            .map(|_| Bits::random(f_bits, &mut rng))
            .collect();
        Library { f_bits, files }
    }

    pub fn from_files(files: Vec<Bits>) -> Self {
        let f_bits = files.first().map_or(0, Bits::len);
        assert!(files.iter().all(|f| f.len() == f_bits));
        Library { f_bits, files }
    }

    pub fn f_bits(&self) -> usize {
        self.f_bits
    }

    pub fn file(&self, idx: usize) -> &Bits {
        &self.files[idx]
    }

    pub fn len(&self) -> usize {
        self.files.len()
    }

    pub fn is_empty(&self) -> bool {
        self.files.is_empty()
    }
}

/// One XOR-coded block: the receivers it serves, the subfiles it combines,
/// and (in a concrete transcript) its payload bits.
#[derive(Debug, Clone)]
pub struct TranscriptBlock {
    /// Bitmask over receivers, bit `k-1` for receiver `k`.
    pub receivers: u32,
    /// `(file index, subfile index)` pairs XORed into this block.
    pub terms: Vec<(u32, u32)>,
    pub bits: Bits,
}

/// Concrete delivery output for one demand vector.
#[derive(Debug, Clone)]
pub struct DeliveryTranscript {
    pub demand: DemandVector,
    pub blocks: Vec<TranscriptBlock>,
    total_bits: usize,
}

impl DeliveryTranscript {
    pub fn total_bits(&self) -> usize {
        self.total_bits
    }

    pub fn rate(&self, f_bits: usize) -> Rate {
        Rate::new(self.total_bits as f64 / f_bits as f64)
    }

    /// Debug dump: one line per block, `subset=<sorted ids> bits=<hex>`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for b in &self.blocks {
            let ids: Vec<String> = (0..32)
                .filter(|k| b.receivers >> k & 1 == 1)
                .map(|k| (k + 1).to_string())
                .collect();
            out.push_str(&format!("subset={} bits={}\n", ids.join(","), b.bits.hex()));
        }
        out
    }
}

/// Symbolic delivery plan: which blocks get sent for a demand, before any
/// message values are filled in.
#[derive(Debug, Clone)]
pub struct DeliveryPlan {
    pub blocks: Vec<(u32, Vec<(u32, u32)>)>,
    pub total_bits: usize,
}

/// A placed caching scheme with parameter `t`: receiver `k` stores, for
/// every file, the subfiles labeled by `t`-subsets containing `k`.
#[derive(Debug, Clone)]
pub struct CacheScheme {
    ps: ProblemSize,
    f_bits: usize,
    t: u32,
    suppress_duplicates: bool,
    /// All `t`-subsets of receivers as bitmasks in ascending (colex) order.
    subsets: Vec<u32>,
    subfile_bits: usize,
}

/// Split every file into `C(K,t)` equal subfiles and assign them to caches.
pub fn place(ps: ProblemSize, f_bits: usize, t: u32) -> Result<CacheScheme, SchemeError> {
    let k = ps.users();
    if t > k {
        return Err(SchemeError::PlacementOutOfRange { t, users: k });
    }
    let n_subsets = binomial(k, t);
    if n_subsets > 1 << 20 {
        return Err(SchemeError::CapExceeded {
            what: "subfile count",
            needed: u128::from(n_subsets),
            cap: 1 << 20,
        });
    }
    if f_bits == 0 || f_bits as u64 % n_subsets != 0 {
        return Err(SchemeError::IndivisibleFileLength {
            f_bits,
            subfiles: n_subsets,
        });
    }
    if k > 30 {
        return Err(SchemeError::CapExceeded {
            what: "users",
            needed: u128::from(k),
            cap: 30,
        });
    }
    // Gosper's hack walks the t-subsets in ascending mask (colex) order.
    let mut subsets: Vec<u32> = Vec::with_capacity(n_subsets as usize);
    if t == 0 {
        subsets.push(0);
    } else {
        let mut mask: u32 = (1 << t) - 1;
        while mask < 1 << k {
            subsets.push(mask);
            let low = mask & mask.wrapping_neg();
            let carry = mask + low;
            mask = carry | (((mask ^ carry) / low) >> 2);
        }
    }
    debug_assert_eq!(subsets.len() as u64, n_subsets);
    Ok(CacheScheme {
        ps,
        f_bits,
        t,
        suppress_duplicates: false,
        subfile_bits: f_bits / n_subsets as usize,
        subsets,
    })
}

impl CacheScheme {
    /// Skip blocks that only serve repeated demands (leader rule). Off by
    /// default: the baseline sends one block per `(t+1)`-subset regardless.
    pub fn with_duplicate_suppression(mut self, on: bool) -> Self {
        self.suppress_duplicates = on;
        self
    }

    pub fn problem(&self) -> ProblemSize {
        self.ps
    }

    pub fn f_bits(&self) -> usize {
        self.f_bits
    }

    pub fn t(&self) -> u32 {
        self.t
    }

    pub fn suppresses_duplicates(&self) -> bool {
        self.suppress_duplicates
    }

    pub fn subfile_count(&self) -> usize {
        self.subsets.len()
    }

    pub fn subfile_bits(&self) -> usize {
        self.subfile_bits
    }

    /// Memory footprint in files: `N * C(K-1,t-1) / C(K,t) = N*t/K`.
    pub fn memory_used(&self) -> f64 {
        f64::from(self.ps.files()) * f64::from(self.t) / f64::from(self.ps.users())
    }

    /// Subfile indices every receiver `k` caches (for each file).
    pub fn cached_subfile_indices(&self, k: u32) -> Vec<u32> {
        let bit = 1u32 << (k - 1);
        (0..self.subsets.len() as u32)
            .filter(|&s| self.subsets[s as usize] & bit != 0)
            .collect()
    }

    pub fn cached_bits_per_user(&self) -> usize {
        if self.t == 0 {
            return 0;
        }
        self.ps.files() as usize
            * binomial(self.ps.users() - 1, self.t - 1) as usize
            * self.subfile_bits
    }

    /// Receiver `k`'s cache contents: cached subfiles of every file,
    /// concatenated in (file asc, subfile asc) order.
    pub fn cache_for(&self, k: u32, lib: &Library) -> Result<Bits, SchemeError> {
        self.check_library(lib)?;
        let cached = self.cached_subfile_indices(k);
        let mut out = Bits::zeros(cached.len() * self.subfile_bits * lib.len());
        let mut pos = 0;
        for n in 0..lib.len() {
            for &s in &cached {
                let sub = lib
                    .file(n)
                    .slice(s as usize * self.subfile_bits, self.subfile_bits);
                for i in 0..self.subfile_bits {
                    out.set(pos + i, sub.get(i));
                }
                pos += self.subfile_bits;
            }
        }
        Ok(out)
    }

    fn check_library(&self, lib: &Library) -> Result<(), SchemeError> {
        if lib.len() != self.ps.files() as usize || lib.f_bits() != self.f_bits {
            return Err(SchemeError::LibraryMismatch {
                files: self.ps.files(),
                f_bits: self.f_bits,
            });
        }
        Ok(())
    }

    fn check_demand(&self, d: &DemandVector) -> Result<(), SchemeError> {
        if d.len() != self.ps.users() as usize {
            return Err(SchemeError::DemandLength {
                got: d.len(),
                users: self.ps.users(),
            });
        }
        Ok(())
    }

    /// Leader mask: for each distinct demanded file, the smallest receiver
    /// demanding it.
    fn leaders(&self, d: &DemandVector) -> u32 {
        let mut seen: Vec<u32> = Vec::new();
        let mut mask = 0u32;
        for (i, &file) in d.entries().iter().enumerate() {
            if !seen.contains(&file) {
                seen.push(file);
                mask |= 1 << i;
            }
        }
        mask
    }

    fn subfile_rank(&self, subset: u32) -> u32 {
        self.subsets
            .binary_search(&subset)
            .expect("subset is a placed t-subset") as u32
    }

    /// Symbolic delivery: the block list without payload bits.
    pub fn plan(&self, d: &DemandVector) -> Result<DeliveryPlan, SchemeError> {
        self.check_demand(d)?;
        let k = self.ps.users();
        let leaders = self.leaders(d);
        let mut blocks = Vec::new();
        if self.t < k {
            for mask in 0u32..1 << k {
                if mask.count_ones() != self.t + 1 {
                    continue;
                }
                if self.suppress_duplicates && mask & leaders == 0 {
                    continue;
                }
                let mut terms = Vec::with_capacity(self.t as usize + 1);
                for r in 0..k {
                    if mask >> r & 1 == 1 {
                        let label = mask & !(1 << r);
                        terms.push((d.entries()[r as usize] - 1, self.subfile_rank(label)));
                    }
                }
                blocks.push((mask, terms));
            }
        }
        let total_bits = blocks.len() * self.subfile_bits;
        Ok(DeliveryPlan { blocks, total_bits })
    }

    /// Deliver demand `d` from a concrete library, then execute every
    /// receiver's decoder and verify the reconstruction is exact.
    pub fn deliver(
        &self,
        d: &DemandVector,
        lib: &Library,
    ) -> Result<DeliveryTranscript, SchemeError> {
        self.check_library(lib)?;
        let plan = self.plan(d)?;
        let blocks: Vec<TranscriptBlock> = plan
            .blocks
            .into_iter()
            .map(|(receivers, terms)| {
                let mut bits = Bits::zeros(self.subfile_bits);
                for &(file, sub) in &terms {
                    bits.xor_assign(
                        &lib.file(file as usize)
                            .slice(sub as usize * self.subfile_bits, self.subfile_bits),
                    );
                }
                TranscriptBlock {
                    receivers,
                    terms,
                    bits,
                }
            })
            .collect();
        let transcript = DeliveryTranscript {
            demand: d.clone(),
            blocks,
            total_bits: plan.total_bits,
        };
        for k in 1..=self.ps.users() {
            let cache = self.cache_for(k, lib)?;
            let decoded = self.decode(&transcript, k, &cache)?;
            let want = lib.file(d.entries()[k as usize - 1] as usize - 1);
            if decoded != *want {
                return Err(SchemeError::DecodeFailed {
                    receiver: k,
                    demand: d.to_string(),
                });
            }
        }
        Ok(transcript)
    }

    /// Reconstruct receiver `k`'s demanded file from the transcript and its
    /// own cache, by GF(2) elimination over subfile symbols.
    pub fn decode(
        &self,
        transcript: &DeliveryTranscript,
        k: u32,
        cache: &Bits,
    ) -> Result<Bits, SchemeError> {
        self.check_demand(&transcript.demand)?;
        let n_sub = self.subsets.len() as u32;
        let var = |file: u32, sub: u32| file * n_sub + sub;

        let mut solver = Gf2Solver::default();
        // Cached subfiles are known outright.
        let cached = self.cached_subfile_indices(k);
        let mut pos = 0;
        for n in 0..self.ps.files() {
            for &s in &cached {
                solver.insert(vec![var(n, s)], cache.slice(pos, self.subfile_bits));
                pos += self.subfile_bits;
            }
        }
        for block in &transcript.blocks {
            let vars = block.terms.iter().map(|&(f, s)| var(f, s)).collect();
            solver.insert(vars, block.bits.clone());
        }

        let file = transcript.demand.entries()[k as usize - 1] - 1;
        let mut out = Bits::zeros(self.f_bits);
        for s in 0..n_sub {
            let value = solver
                .solve(var(file, s), self.subfile_bits)
                .ok_or_else(|| SchemeError::DecodeFailed {
                    receiver: k,
                    demand: transcript.demand.to_string(),
                })?;
            for i in 0..self.subfile_bits {
                out.set(s as usize * self.subfile_bits + i, value.get(i));
            }
        }
        Ok(out)
    }

    fn demand_bits(&self, distinct: u32) -> usize {
        let k = self.ps.users();
        let sent = if self.suppress_duplicates {
            binomial(k, self.t + 1) - binomial(k - distinct, self.t + 1)
        } else {
            binomial(k, self.t + 1)
        };
        sent as usize * self.subfile_bits
    }

    /// Worst-case and average rate over all `N^K` demands (exact
    /// enumeration, capped at 1e6 demands).
    pub fn measure_rates(&self) -> Result<(Rate, Rate), SchemeError> {
        let count = (u128::from(self.ps.files())).pow(self.ps.users());
        if count > 1_000_000 {
            return Err(SchemeError::CapExceeded {
                what: "demand enumeration",
                needed: count,
                cap: 1_000_000,
            });
        }
        let mut worst = 0usize;
        let mut total: u128 = 0;
        for d in DemandVector::enumerate(self.ps.users() as usize, self.ps.files()) {
            let bits = self.demand_bits(d.distinct_prefix(d.len()));
            worst = worst.max(bits);
            total += bits as u128;
        }
        let avg = total as f64 / count as f64 / self.f_bits as f64;
        Ok((
            Rate::new(worst as f64 / self.f_bits as f64),
            Rate::new(avg),
        ))
    }

    /// Monte-Carlo rate estimate for instances beyond the enumeration cap.
    pub fn measure_rates_sampled(&self, seed: u64, samples: usize) -> (Rate, Rate) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = 0usize;
        let mut total: u128 = 0;
        for _ in 0..samples {
            let entries: Vec<u32> = (0..self.ps.users())
                .map(|_| 1 + (rng.next_u32() % self.ps.files()))
                .collect();
            let d = DemandVector::new(entries, self.ps.files()).expect("entries in range");
            let bits = self.demand_bits(d.distinct_prefix(d.len()));
            worst = worst.max(bits);
            total += bits as u128;
        }
        (
            Rate::new(worst as f64 / self.f_bits as f64),
            Rate::new(total as f64 / samples as f64 / self.f_bits as f64),
        )
    }
}

/// Incremental GF(2) row-echelon solver over subfile symbols.
#[derive(Default)]
struct Gf2Solver {
    /// Leading variable -> (sorted row variables, row value).
    pivots: HashMap<u32, (Vec<u32>, Bits)>,
}

fn xor_merge(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

impl Gf2Solver {
    fn reduce(&self, vars: Vec<u32>, mut value: Bits) -> (Vec<u32>, Bits) {
        // Sort and cancel duplicated terms in pairs (x ^ x = 0).
        let mut sorted = vars;
        sorted.sort_unstable();
        let mut vars: Vec<u32> = Vec::with_capacity(sorted.len());
        let mut i = 0;
        while i < sorted.len() {
            if i + 1 < sorted.len() && sorted[i] == sorted[i + 1] {
                i += 2;
            } else {
                vars.push(sorted[i]);
                i += 1;
            }
        }
        loop {
            let Some(&lead) = vars.first() else { break };
            let Some((pvars, pval)) = self.pivots.get(&lead) else {
                break;
            };
            vars = xor_merge(&vars, pvars);
            value.xor_assign(pval);
        }
        (vars, value)
    }

    fn insert(&mut self, vars: Vec<u32>, value: Bits) {
        let (vars, value) = self.reduce(vars, value);
        if let Some(&lead) = vars.first() {
            self.pivots.insert(lead, (vars, value));
        }
    }

    fn solve(&self, var: u32, width: usize) -> Option<Bits> {
        let (vars, value) = self.reduce(vec![var], Bits::zeros(width));
        vars.is_empty().then_some(value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::{avg_case_lower, worst_case_lower};
    use crate::types::Memory;

    fn ps(k: u32, n: u32) -> ProblemSize {
        ProblemSize::new(k, n).unwrap()
    }

    fn demand(entries: &[u32], n: u32) -> DemandVector {
        DemandVector::new(entries.to_vec(), n).unwrap()
    }

    #[test]
    fn placement_edges() {
        let empty = place(ps(3, 2), 1, 0).unwrap();
        assert_eq!(empty.memory_used(), 0.0);
        assert_eq!(empty.cached_bits_per_user(), 0);
        assert_eq!(empty.subfile_count(), 1);

        let full = place(ps(3, 2), 1, 3).unwrap();
        assert_eq!(full.memory_used(), 2.0);
        assert_eq!(full.cached_bits_per_user(), 2);

        assert_eq!(
            place(ps(2, 2), 3, 1).unwrap_err(),
            SchemeError::IndivisibleFileLength {
                f_bits: 3,
                subfiles: 2
            }
        );
        assert!(matches!(
            place(ps(2, 2), 2, 3),
            Err(SchemeError::PlacementOutOfRange { .. })
        ));
    }

    #[test]
    fn half_caching_two_users() {
        let s = place(ps(2, 2), 2, 1).unwrap();
        assert_eq!(s.memory_used(), 1.0);
        assert_eq!(s.subfile_bits(), 1);
        assert_eq!(s.cached_subfile_indices(1), vec![0]);
        assert_eq!(s.cached_subfile_indices(2), vec![1]);
        assert_eq!(s.cached_bits_per_user(), 2);
    }

    #[test]
    fn delivery_single_xor_block() {
        let s = place(ps(2, 2), 2, 1).unwrap();
        // File 1 = bits (1,0), file 2 = bits (0,1).
        let mut f1 = Bits::zeros(2);
        f1.set(0, true);
        let mut f2 = Bits::zeros(2);
        f2.set(1, true);
        let lib = Library::from_files(vec![f1, f2]);
        let tx = s.deliver(&demand(&[1, 2], 2), &lib).unwrap();
        assert_eq!(tx.blocks.len(), 1);
        assert_eq!(tx.total_bits(), 1);
        assert_eq!(tx.rate(2).get(), 0.5);
        // Block = bit 1 of file 1 XOR bit 0 of file 2 = 0 ^ 0 = 0.
        assert!(!tx.blocks[0].bits.get(0));
        assert_eq!(tx.dump(), "subset=1,2 bits=0\n");
    }

    #[test]
    fn transcript_dump_is_stable() {
        let s = place(ps(3, 3), 3, 1).unwrap();
        let lib = Library::random(ps(3, 3), 3, 7);
        let tx = s.deliver(&demand(&[1, 2, 3], 3), &lib).unwrap();
        let dump = s
            .deliver(&demand(&[1, 2, 3], 3), &lib)
            .unwrap()
            .dump();
        assert_eq!(tx.dump(), dump);
        assert_eq!(dump.lines().count(), 3);
        assert!(dump.starts_with("subset=1,2 bits="));
    }

    #[test]
    fn full_caching_sends_nothing() {
        let s = place(ps(2, 2), 1, 2).unwrap();
        let lib = Library::random(ps(2, 2), 1, 3);
        for d in DemandVector::enumerate(2, 2) {
            let tx = s.deliver(&d, &lib).unwrap();
            assert_eq!(tx.total_bits(), 0);
        }
        let (worst, avg) = s.measure_rates().unwrap();
        assert_eq!(worst.get(), 0.0);
        assert_eq!(avg.get(), 0.0);
    }

    #[test]
    fn uncached_delivery_with_suppression_counts_distinct_files() {
        let s = place(ps(2, 2), 1, 0)
            .unwrap()
            .with_duplicate_suppression(true);
        let lib = Library::random(ps(2, 2), 1, 11);
        let repeated = s.deliver(&demand(&[1, 1], 2), &lib).unwrap();
        assert_eq!(repeated.total_bits(), 1);
        let distinct = s.deliver(&demand(&[1, 2], 2), &lib).unwrap();
        assert_eq!(distinct.total_bits(), 2);
        let (worst, avg) = s.measure_rates().unwrap();
        assert_eq!(worst.get(), 2.0); // nbar
        assert_eq!(avg.get(), 1.5); // E[distinct] over 4 demands
    }

    #[test]
    fn measured_rates_match_the_closed_form() {
        let s = place(ps(2, 2), 2, 1).unwrap();
        let (worst, avg) = s.measure_rates().unwrap();
        assert_eq!(worst.get(), 0.5);
        assert_eq!(avg.get(), 0.5);
    }

    #[test]
    fn baseline_rate_formula_exact_integer_accounting() {
        for k in 1..=4u32 {
            for n in 1..=3u32 {
                for t in 0..=k {
                    let f = binomial(k, t) as usize;
                    let s = place(ps(k, n), f, t).unwrap();
                    let d = DemandVector::enumerate(k as usize, n).next().unwrap();
                    let plan = s.plan(&d).unwrap();
                    // total_bits * (t+1) == F * (K-t) as exact integers.
                    assert_eq!(
                        plan.total_bits * (t as usize + 1),
                        f * (k - t) as usize,
                        "K={k} N={n} t={t}"
                    );
                }
            }
        }
    }

    #[test]
    fn memory_accounting_is_exact() {
        for k in 1..=4u32 {
            for t in 0..=k {
                let f = binomial(k, t) as usize;
                let s = place(ps(k, 3), f, t).unwrap();
                // cached bits per user * K == F * N * t, exactly.
                assert_eq!(
                    s.cached_bits_per_user() * k as usize,
                    f * 3 * t as usize,
                    "K={k} t={t}"
                );
            }
        }
    }

    #[test]
    fn corpus_decodes_every_demand() {
        for k in 1..=3u32 {
            for n in 1..=3u32 {
                for t in 0..=k {
                    let f = binomial(k, t) as usize;
                    for suppress in [false, true] {
                        let s = place(ps(k, n), f, t)
                            .unwrap()
                            .with_duplicate_suppression(suppress);
                        let lib = Library::random(ps(k, n), f, 42);
                        for d in DemandVector::enumerate(k as usize, n) {
                            s.deliver(&d, &lib).unwrap_or_else(|e| {
                                panic!("K={k} N={n} t={t} suppress={suppress} d={d}: {e}")
                            });
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn rates_dominate_lower_bounds() {
        for k in 1..=3u32 {
            for n in 1..=3u32 {
                for t in 0..k {
                    // t = K stores everything; the bounds are undefined at M = N.
                    let f = binomial(k, t) as usize;
                    let p = ps(k, n);
                    let s = place(p, f, t).unwrap();
                    let m = Memory::new(s.memory_used());
                    let (worst, avg) = s.measure_rates().unwrap();
                    let lower_w = worst_case_lower(p, m).unwrap().get();
                    let lower_a = avg_case_lower(p, m).unwrap().get();
                    assert!(worst.get() >= lower_w - 1e-9, "K={k} N={n} t={t}");
                    assert!(avg.get() >= lower_a - 1e-9, "K={k} N={n} t={t}");
                }
            }
        }
    }

    #[test]
    fn sampled_rates_agree_on_small_instance() {
        let s = place(ps(2, 2), 2, 1)
            .unwrap()
            .with_duplicate_suppression(true);
        let (worst_exact, _) = s.measure_rates().unwrap();
        let (worst_sampled, avg_sampled) = s.measure_rates_sampled(9, 400);
        assert_eq!(worst_exact.get(), worst_sampled.get());
        assert!(avg_sampled.get() <= worst_sampled.get());
    }

    #[test]
    fn enumeration_cap_is_enforced() {
        let s = place(ps(21, 5), binomial(21, 2) as usize, 2).unwrap();
        assert!(matches!(
            s.measure_rates(),
            Err(SchemeError::CapExceeded { .. })
        ));
    }
}
