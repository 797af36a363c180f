//! Gap-ratio analysis: the closed-form majorants `phi`, `psi`, `eta`, the
//! corner ratios `Xi` and `Theta`, and the derivative-free maximizers that
//! reproduce the 2.315 / 2.507 worst-case and average-case gap constants.

use rayon::prelude::*;
use thiserror::Error;

use crate::bounds::{
    avg_case_lower_floor, corner_points, worst_case_lower_secondbranch, yma_envelope, yma_upper,
    BoundsError,
};
use crate::types::{CornerKind, Memory, ProblemSize};

#[derive(Debug, Error, PartialEq)]
pub enum GapError {
    #[error("argument {name} = {value} outside its domain {domain}")]
    OutOfDomain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },
    #[error("ell must be a positive integer")]
    EllOutOfRange,
    #[error("{func} denominator {value} not positive at {at:?}; this is an implementation bug")]
    NonPositiveDenominator {
        func: &'static str,
        value: f64,
        at: (f64, f64),
    },
}

/// Distance kept from every open interval endpoint during scans and polish.
pub const ENDPOINT_GUARD: f64 = 1e-12;

/// Branch-free compensated accumulator.
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

    #[inline]
    fn value(self) -> f64 {
        self.sum
    }
}

/// `sum_{j=0}^{ell-1} 1/(ell - a*j)`, summed in descending magnitude
/// (j = ell-1 first) with compensation so that scans up to ell = 1e4 stay
/// reproducible to 1e-9.
fn phi_denominator_sum(a: f64, ell: u32) -> f64 {
    let ellf = f64::from(ell);
    let mut acc = Kahan::default();
    for j in (0..ell).rev() {
        acc.add(1.0 / (ellf - a * f64::from(j)));
    }
    acc.value()
}

/// Worst-case gap majorant.
pub fn phi(a: f64, ell: u32) -> Result<f64, GapError> {
    if ell < 1 {
        return Err(GapError::EllOutOfRange);
    }
    if !(a > 0.0 && a < 1.0) {
        return Err(GapError::OutOfDomain {
            name: "a",
            value: a,
            domain: "(0,1)",
        });
    }
    let ellf = f64::from(ell);
    // ((ell+a)/(ell+1))^(ell/a) = exp((ell/a) * ln(1 - (1-a)/(ell+1)))
    let power = ((ellf / a) * ((a - 1.0) / (ellf + 1.0)).ln_1p()).exp();
    let numerator = a * (ellf + 1.0) / ((1.0 - a) * ellf) * (1.0 - power);
    let denominator = 1.0 - (1.0 - a) * phi_denominator_sum(a, ell);
    if !(denominator > 0.0) {
        return Err(GapError::NonPositiveDenominator {
            func: "phi",
            value: denominator,
            at: (a, ellf),
        });
    }
    Ok(numerator / denominator)
}

/// Large-`ell` continuation of [`phi`] with `b` standing in for `1/ell`.
pub fn psi(a: f64, b: f64) -> Result<f64, GapError> {
    if !(a > 0.0 && a < 1.0) {
        return Err(GapError::OutOfDomain {
            name: "a",
            value: a,
            domain: "(0,1)",
        });
    }
    if !(b > 0.0) {
        return Err(GapError::OutOfDomain {
            name: "b",
            value: b,
            domain: "(0,inf)",
        });
    }
    // ((1+ab)/(1+b))^(1/(ab)) = exp(ln(1 - b(1-a)/(1+b)) / (ab))
    let power = ((-b * (1.0 - a) / (1.0 + b)).ln_1p() / (a * b)).exp();
    let numerator = a * (1.0 + b) / (1.0 - a) * (1.0 - power);
    let denominator = 1.0 - (1.0 - a) * b / (1.0 - a + a * b)
        + (1.0 - a) / a * (-a * (1.0 - b)).ln_1p();
    if !(denominator > 0.0) {
        return Err(GapError::NonPositiveDenominator {
            func: "psi",
            value: denominator,
            at: (a, b),
        });
    }
    Ok(numerator / denominator)
}

/// Average-case gap majorant.
pub fn eta(u: f64, v: f64) -> Result<f64, GapError> {
    if !(u > 0.0 && u <= 1.0) {
        return Err(GapError::OutOfDomain {
            name: "u",
            value: u,
            domain: "(0,1]",
        });
    }
    if !(v > 0.0 && v <= 0.5) {
        return Err(GapError::OutOfDomain {
            name: "v",
            value: v,
            domain: "(0,1/2]",
        });
    }
    // q = (1-v)^(u/v), evaluated in log space for v near 0.
    let q = ((u / v) * (-v).ln_1p()).exp();
    let bracket = ((-(v / (u + v)) * q).ln_1p() / v).exp();
    let numerator = (u + v - v * q) * (1.0 - bracket);
    let denominator = q * (1.0 - (1.0 + u / 2.0) * q);
    if !(denominator > 0.0) || !denominator.is_finite() {
        return Err(GapError::NonPositiveDenominator {
            func: "eta",
            value: denominator,
            at: (u, v),
        });
    }
    Ok(numerator / denominator)
}

/// How a maximization result was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMethod {
    Grid,
    GridPolish,
}

impl SearchMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            SearchMethod::Grid => "grid",
            SearchMethod::GridPolish => "grid+polish",
        }
    }
}

/// Argmax of a `phi` scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiArgmax {
    pub a: f64,
    pub ell: u32,
}

/// Result of a grid (optionally polished) maximization. `value` is always
/// the function evaluated at `argmax`.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxResult<P> {
    pub argmax: P,
    pub value: f64,
    pub evaluations: u64,
    pub method: SearchMethod,
}

const GOLDEN_INV: f64 = 0.618_033_988_749_894_9;
const GOLDEN_ITERS: usize = 60;

/// Maximize `a -> phi(a, ell)` by a dense grid over (0,1) followed by a
/// golden-section polish around the best grid point.
pub fn max_phi_over_a(ell: u32, grid_step: f64, polish: bool) -> MaxResult<f64> {
    assert!(ell >= 1, "ell must be positive");
    assert!(
        grid_step > 0.0 && grid_step < 0.5,
        "grid step must lie in (0, 0.5)"
    );
    let ellf = f64::from(ell);
    let grid: Vec<f64> = (1..)
        .map(|k| k as f64 * grid_step)
        .take_while(|&a| a < 1.0 - ENDPOINT_GUARD)
        .collect();
    let n = grid.len();

    // Denominator sums for the whole grid at once: outer loop over j keeps
    // the per-point operation order identical to `phi_denominator_sum`.
    let mut sum = vec![0.0f64; n];
    let mut comp = vec![0.0f64; n];
    for j in (0..ell).rev() {
        let jf = f64::from(j);
        for i in 0..n {
            let x = 1.0 / (ellf - grid[i] * jf);
            let y = x - comp[i];
            let t = sum[i] + y;
            comp[i] = (t - sum[i]) - y;
            sum[i] = t;
        }
    }

    let mut evaluations = 0u64;
    let mut best_a = grid[0];
    let mut best_v = f64::NEG_INFINITY;
    for i in 0..n {
        let a = grid[i];
        let power = ((ellf / a) * ((a - 1.0) / (ellf + 1.0)).ln_1p()).exp();
        let numerator = a * (ellf + 1.0) / ((1.0 - a) * ellf) * (1.0 - power);
        let denominator = 1.0 - (1.0 - a) * sum[i];
        assert!(
            denominator > 0.0,
            "phi denominator not positive at a={a} ell={ell}"
        );
        let v = numerator / denominator;
        evaluations += 1;
        if v > best_v {
            best_v = v;
            best_a = a;
        }
    }

    if !polish {
        return MaxResult {
            argmax: best_a,
            value: best_v,
            evaluations,
            method: SearchMethod::Grid,
        };
    }

    let mut lo = (best_a - grid_step).max(ENDPOINT_GUARD);
    let mut hi = (best_a + grid_step).min(1.0 - ENDPOINT_GUARD);
    let eval = |a: f64, evals: &mut u64| {
        *evals += 1;
        phi(a, ell).expect("polish stays inside the guarded domain")
    };
    let mut x1 = hi - GOLDEN_INV * (hi - lo);
    let mut x2 = lo + GOLDEN_INV * (hi - lo);
    let mut f1 = eval(x1, &mut evaluations);
    let mut f2 = eval(x2, &mut evaluations);
    for _ in 0..GOLDEN_ITERS {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + GOLDEN_INV * (hi - lo);
            f2 = eval(x2, &mut evaluations);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - GOLDEN_INV * (hi - lo);
            f1 = eval(x1, &mut evaluations);
        }
        if f1 > best_v {
            best_v = f1;
            best_a = x1;
        }
        if f2 > best_v {
            best_v = f2;
            best_a = x2;
        }
    }

    MaxResult {
        argmax: best_a,
        value: best_v,
        evaluations,
        method: SearchMethod::GridPolish,
    }
}

/// Maximize `phi` over `ell in 1..=ell_max` and `a in (0,1)`.
///
/// Per-`ell` scans run in parallel; the merge is a sequential fold over the
/// ordered results, so the outcome is independent of the worker count. Ties
/// go to the smaller `ell`.
pub fn scan_phi(ell_max: u32, grid_step: f64, polish: bool) -> MaxResult<PhiArgmax> {
    assert!(ell_max >= 1, "ell_max must be positive");
    let per_ell: Vec<MaxResult<f64>> = (1..=ell_max)
        .into_par_iter()
        .map(|ell| max_phi_over_a(ell, grid_step, polish))
        .collect();
    let mut best: Option<(u32, &MaxResult<f64>)> = None;
    let mut evaluations = 0u64;
    for (i, r) in per_ell.iter().enumerate() {
        evaluations += r.evaluations;
        let ell = i as u32 + 1;
        if best.map_or(true, |(_, b)| r.value > b.value) {
            best = Some((ell, r));
        }
    }
    let (ell, r) = best.expect("ell_max >= 1");
    MaxResult {
        argmax: PhiArgmax { a: r.argmax, ell },
        value: r.value,
        evaluations,
        method: r.method,
    }
}

/// Rectangular search domain; the lower edges are always open, the upper
/// edges may be closed.
#[derive(Debug, Clone, Copy)]
pub struct Box2 {
    pub x_lo: f64,
    pub x_hi: f64,
    pub x_closed_hi: bool,
    pub y_lo: f64,
    pub y_hi: f64,
    pub y_closed_hi: bool,
}

impl Box2 {
    fn clamp(&self, x: f64, y: f64) -> (f64, f64) {
        let hi_x = if self.x_closed_hi {
            self.x_hi
        } else {
            self.x_hi - ENDPOINT_GUARD
        };
        let hi_y = if self.y_closed_hi {
            self.y_hi
        } else {
            self.y_hi - ENDPOINT_GUARD
        };
        (
            x.clamp(self.x_lo + ENDPOINT_GUARD, hi_x),
            y.clamp(self.y_lo + ENDPOINT_GUARD, hi_y),
        )
    }
}

/// Search box for the `psi` scan: `(0,1) x (0,1e-4)`.
pub fn psi_default_box() -> Box2 {
    Box2 {
        x_lo: 0.0,
        x_hi: 1.0,
        x_closed_hi: false,
        y_lo: 0.0,
        y_hi: 1e-4,
        y_closed_hi: false,
    }
}

/// Search box for the `eta` scan: `(0,1] x (0,1/2]`.
pub fn eta_default_box() -> Box2 {
    Box2 {
        x_lo: 0.0,
        x_hi: 1.0,
        x_closed_hi: true,
        y_lo: 0.0,
        y_hi: 0.5,
        y_closed_hi: true,
    }
}

/// Dense grid scan over `bx` at the given steps, optionally followed by a
/// Nelder-Mead polish started from the best grid point. The result never
/// falls below the best grid value.
pub fn maximize_2d<F>(f: F, bx: Box2, steps: (f64, f64), polish: bool) -> MaxResult<(f64, f64)>
where
    F: Fn(f64, f64) -> Result<f64, GapError>,
{
    let (sx, sy) = steps;
    assert!(sx > 0.0 && sy > 0.0, "grid steps must be positive");
    let nx = ((bx.x_hi - bx.x_lo) / sx + 1e-9).floor() as usize;
    let ny = ((bx.y_hi - bx.y_lo) / sy + 1e-9).floor() as usize;
    let xs: Vec<f64> = (1..=nx)
        .map(|k| bx.x_lo + k as f64 * sx)
        .filter(|&x| bx.x_closed_hi || x < bx.x_hi)
        .collect();
    let ys: Vec<f64> = (1..=ny)
        .map(|k| bx.y_lo + k as f64 * sy)
        .filter(|&y| bx.y_closed_hi || y < bx.y_hi)
        .collect();
    assert!(!xs.is_empty() && !ys.is_empty(), "empty search grid");

    let mut evaluations = 0u64;
    let mut best = (xs[0], ys[0]);
    let mut best_v = f64::NEG_INFINITY;
    for &x in &xs {
        for &y in &ys {
            let v = f(x, y).expect("grid point inside the domain");
            evaluations += 1;
            if v > best_v {
                best_v = v;
                best = (x, y);
            }
        }
    }

    if !polish {
        return MaxResult {
            argmax: best,
            value: best_v,
            evaluations,
            method: SearchMethod::Grid,
        };
    }

    let (argmax, value, evals) = nelder_mead_2d(&f, &bx, best, best_v, (sx, sy));
    MaxResult {
        argmax,
        value,
        evaluations: evaluations + evals,
        method: SearchMethod::GridPolish,
    }
}

/// Deterministic box-projected Nelder-Mead ascent from `start`.
fn nelder_mead_2d<F>(
    f: &F,
    bx: &Box2,
    start: (f64, f64),
    start_value: f64,
    step: (f64, f64),
) -> ((f64, f64), f64, u64)
where
    F: Fn(f64, f64) -> Result<f64, GapError>,
{
    const MAX_ITERS: usize = 300;
    let mut evals = 0u64;
    let eval = |p: (f64, f64), evals: &mut u64| -> ((f64, f64), f64) {
        let q = bx.clamp(p.0, p.1);
        *evals += 1;
        (q, f(q.0, q.1).expect("clamped into the domain"))
    };

    let mut simplex = vec![(start, start_value)];
    for p in [
        (start.0 + step.0, start.1),
        (start.0, start.1 + step.1),
    ] {
        simplex.push(eval(p, &mut evals));
    }
    let mut best = simplex[0];

    for _ in 0..MAX_ITERS {
        // Descending by value: index 0 is the best vertex.
        simplex.sort_by(|a, b| b.1.partial_cmp(&a.1).expect("finite values"));
        if simplex[0].1 > best.1 {
            best = simplex[0];
        }
        let spread = (simplex[0].1 - simplex[2].1).abs();
        let diam = (simplex[0].0 .0 - simplex[2].0 .0).abs()
            + (simplex[0].0 .1 - simplex[2].0 .1).abs();
        if spread < 1e-15 && diam < 1e-13 {
            break;
        }
        let centroid = (
            0.5 * (simplex[0].0 .0 + simplex[1].0 .0),
            0.5 * (simplex[0].0 .1 + simplex[1].0 .1),
        );
        let worst = simplex[2];
        let reflect = (
            centroid.0 + (centroid.0 - worst.0 .0),
            centroid.1 + (centroid.1 - worst.0 .1),
        );
        let (rp, rv) = eval(reflect, &mut evals);
        if rv > simplex[0].1 {
            let expand = (
                centroid.0 + 2.0 * (centroid.0 - worst.0 .0),
                centroid.1 + 2.0 * (centroid.1 - worst.0 .1),
            );
            let (ep, ev) = eval(expand, &mut evals);
            simplex[2] = if ev > rv { (ep, ev) } else { (rp, rv) };
            continue;
        }
        if rv > simplex[1].1 {
            simplex[2] = (rp, rv);
            continue;
        }
        let contract = (
            centroid.0 + 0.5 * (worst.0 .0 - centroid.0),
            centroid.1 + 0.5 * (worst.0 .1 - centroid.1),
        );
        let (cp, cv) = eval(contract, &mut evals);
        if cv > worst.1 {
            simplex[2] = (cp, cv);
            continue;
        }
        // Shrink toward the best vertex.
        for i in 1..3 {
            let p = (
                simplex[0].0 .0 + 0.5 * (simplex[i].0 .0 - simplex[0].0 .0),
                simplex[0].0 .1 + 0.5 * (simplex[i].0 .1 - simplex[0].0 .1),
            );
            simplex[i] = eval(p, &mut evals);
        }
    }
    simplex.sort_by(|a, b| b.1.partial_cmp(&a.1).expect("finite values"));
    if simplex[0].1 > best.1 {
        best = simplex[0];
    }
    (best.0, best.1, evals)
}

/// Maximize `psi` over its default box.
pub fn max_psi(steps: (f64, f64), polish: bool) -> MaxResult<(f64, f64)> {
    maximize_2d(psi, psi_default_box(), steps, polish)
}

/// Maximize `eta` over its default box.
pub fn max_eta(steps: (f64, f64), polish: bool) -> MaxResult<(f64, f64)> {
    maximize_2d(eta, eta_default_box(), steps, polish)
}

/// Worst-case corner ratios `Xi(K, N, M_ell)` for `ell = 1..=nbar`: the
/// envelope of the achievable rate over the simplified lower-bound floor,
/// both evaluated at the corner points.
pub fn xi_at_corners(ps: ProblemSize) -> Vec<(u32, f64)> {
    let ladder = corner_points(ps, CornerKind::Worst);
    (1..=ps.nbar())
        .map(|ell| {
            let m = ladder.memory_of(ell).expect("ladder covers 0..=nbar");
            let num = yma_upper(ps, m).expect("corner inside [0,N)").get();
            let den = worst_case_lower_secondbranch(ps, m)
                .expect("corner inside [0,N)")
                .get();
            assert!(den > 0.0, "worst-case floor must be positive at corners");
            (ell, num / den)
        })
        .collect()
}

/// Average-case corner ratios `Theta(K, N, Mtilde_ell)` for `ell = 1..=nbar`.
pub fn theta_at_corners(ps: ProblemSize) -> Vec<(u32, f64)> {
    let ladder = corner_points(ps, CornerKind::Avg);
    (1..=ps.nbar())
        .map(|ell| {
            let m = ladder.memory_of(ell).expect("ladder covers 0..=nbar");
            let num = yma_upper(ps, m).expect("corner inside [0,N)").get();
            let den = avg_case_lower_floor(ps, m)
                .expect("corner inside [0,N)")
                .get();
            assert!(den > 0.0, "average-case floor must be positive at corners");
            (ell, num / den)
        })
        .collect()
}

/// `Xi(K, N, m)` at an arbitrary memory point in `[0, N)`.
pub fn xi_profile(ps: ProblemSize, memory: f64) -> Result<f64, BoundsError> {
    let envelope = yma_envelope(ps, CornerKind::Worst);
    let num = envelope
        .eval(memory)
        .map_err(|_| BoundsError::MemoryOutOfRange {
            memory,
            files: ps.files(),
        })?;
    let den = worst_case_lower_secondbranch(ps, Memory::new(memory))?.get();
    assert!(den > 0.0, "worst-case floor must be positive on [0,N)");
    Ok(num / den)
}

/// `Theta(K, N, m)` at an arbitrary memory point in `[0, N)`.
pub fn theta_profile(ps: ProblemSize, memory: f64) -> Result<f64, BoundsError> {
    let envelope = yma_envelope(ps, CornerKind::Avg);
    let num = envelope
        .eval(memory)
        .map_err(|_| BoundsError::MemoryOutOfRange {
            memory,
            files: ps.files(),
        })?;
    let den = avg_case_lower_floor(ps, Memory::new(memory))?.get();
    assert!(den > 0.0, "average-case floor must be positive on [0,N)");
    Ok(num / den)
}
