//! Shared domain types: problem instances, memory/rate quantities, demand
//! vectors, corner-point ladders and piecewise-linear curves.

use std::fmt;

use thiserror::Error;

/// Errors raised while constructing or evaluating the shared domain types.
#[derive(Debug, Error, PartialEq)]
pub enum TypeError {
    #[error("problem size must have K >= 1 and N >= 1 (got K = {users}, N = {files})")]
    InvalidProblemSize { users: u32, files: u32 },
    #[error("demand entry {entry} outside 1..={files}")]
    DemandOutOfRange { entry: u32, files: u32 },
    #[error("piecewise-linear curve needs >= 2 breakpoints with strictly increasing memory")]
    InvalidBreakpoints,
    #[error("memory {memory} outside curve domain [{lo}, {hi})")]
    CurveDomain { memory: f64, lo: f64, hi: f64 },
}

/// A coded-caching instance: `K` receivers, a library of `N` files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ProblemSize {
    users: u32,
    files: u32,
}

impl ProblemSize {
    pub fn new(users: u32, files: u32) -> Result<Self, TypeError> {
        if users == 0 || files == 0 {
            return Err(TypeError::InvalidProblemSize { users, files });
        }
        Ok(Self { users, files })
    }

    pub fn users(&self) -> u32 {
        self.users
    }

    pub fn files(&self) -> u32 {
        self.files
    }

    /// `min(K, N)`: the number of distinct demands that can matter.
    pub fn nbar(&self) -> u32 {
        self.users.min(self.files)
    }

    pub fn users_f(&self) -> f64 {
        f64::from(self.users)
    }

    pub fn files_f(&self) -> f64 {
        f64::from(self.files)
    }

    pub fn nbar_f(&self) -> f64 {
        f64::from(self.nbar())
    }
}

impl fmt::Display for ProblemSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "K={} N={}", self.users, self.files)
    }
}

/// Per-receiver cache size in files (the normalized `M`).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Memory(f64);

impl Memory {
    pub fn new(m: f64) -> Self {
        Memory(m)
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl From<f64> for Memory {
    fn from(m: f64) -> Self {
        Memory(m)
    }
}

impl fmt::Display for Memory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Delivery rate in files per demand.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Rate(f64);

impl Rate {
    pub fn new(r: f64) -> Self {
        Rate(r)
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl fmt::Display for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Which delivery scenario a ladder or envelope refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CornerKind {
    Worst,
    Avg,
}

impl fmt::Display for CornerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CornerKind::Worst => write!(f, "worst"),
            CornerKind::Avg => write!(f, "avg"),
        }
    }
}

/// The memory values at which the piecewise-linear lower bounds change slope,
/// listed as `(ell, memory)` for `ell = 0..=nbar`. Memory strictly decreases
/// from `N` at `ell = 0` down to `0` at `ell = nbar`.
#[derive(Debug, Clone, PartialEq)]
pub struct CornerLadder {
    pub kind: CornerKind,
    points: Vec<(u32, Memory)>,
}

impl CornerLadder {
    pub(crate) fn from_points(kind: CornerKind, points: Vec<(u32, Memory)>) -> Self {
        debug_assert!(points
            .windows(2)
            .all(|w| w[0].1.get() > w[1].1.get() && w[0].0 + 1 == w[1].0));
        Self { kind, points }
    }

    pub fn points(&self) -> &[(u32, Memory)] {
        &self.points
    }

    /// Memory at corner index `ell`.
    pub fn memory_of(&self, ell: u32) -> Option<Memory> {
        self.points
            .iter()
            .find(|(l, _)| *l == ell)
            .map(|&(_, m)| m)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Continuous piecewise-linear function given by breakpoints sorted by
/// strictly increasing memory. Evaluation is closed on the left endpoint and
/// half-open at the right one.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseCurve {
    points: Vec<(f64, f64)>,
}

impl PiecewiseCurve {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self, TypeError> {
        if points.len() < 2 || points.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(TypeError::InvalidBreakpoints);
        }
        Ok(Self { points })
    }

    pub fn breakpoints(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.points[0].0, self.points[self.points.len() - 1].0)
    }

    /// Linear interpolation between breakpoints; errors outside `[lo, hi)`.
    pub fn eval(&self, memory: f64) -> Result<f64, TypeError> {
        let (lo, hi) = self.domain();
        if !(memory >= lo && memory < hi) {
            return Err(TypeError::CurveDomain { memory, lo, hi });
        }
        let idx = match self
            .points
            .binary_search_by(|p| p.0.partial_cmp(&memory).expect("finite breakpoints"))
        {
            Ok(i) => return Ok(self.points[i].1),
            Err(i) => i,
        };
        let (x0, y0) = self.points[idx - 1];
        let (x1, y1) = self.points[idx];
        let w = (memory - x0) / (x1 - x0);
        Ok(y0 + w * (y1 - y0))
    }
}

/// A demand vector `d = (d_1, ..., d_K)` with entries in `1..=N`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DemandVector {
    entries: Vec<u32>,
}

impl DemandVector {
    pub fn new(entries: Vec<u32>, files: u32) -> Result<Self, TypeError> {
        for &e in &entries {
            if e == 0 || e > files {
                return Err(TypeError::DemandOutOfRange { entry: e, files });
            }
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Number of distinct files among the first `ell` entries.
    pub fn distinct_prefix(&self, ell: usize) -> u32 {
        let ell = ell.min(self.entries.len());
        let prefix = &self.entries[..ell];
        let mut count = 0;
        for (i, &e) in prefix.iter().enumerate() {
            if !prefix[..i].contains(&e) {
                count += 1;
            }
        }
        count
    }

    /// All `N^len` demand vectors of a given length, in lexicographic order.
    pub fn enumerate(len: usize, files: u32) -> DemandIter {
        DemandIter {
            files,
            next: Some(vec![1; len]),
        }
    }
}

impl fmt::Display for DemandVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// Lexicographic odometer over all demand vectors of a fixed length.
pub struct DemandIter {
    files: u32,
    next: Option<Vec<u32>>,
}

impl Iterator for DemandIter {
    type Item = DemandVector;

    fn next(&mut self) -> Option<Self::Item> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut pos = succ.len();
        loop {
            if pos == 0 {
                self.next = None;
                break;
            }
            pos -= 1;
            if succ[pos] < self.files {
                succ[pos] += 1;
                for e in succ.iter_mut().skip(pos + 1) {
                    *e = 1;
                }
                self.next = Some(succ);
                break;
            }
        }
        Some(DemandVector { entries: current })
    }
}
