//! Closed-form rate-memory bounds: the worst-case and average-case lower
//! bounds, the decentralized achievable rate, and the corner-point ladders
//! with their piecewise-linear upper envelopes.

use thiserror::Error;

use crate::types::{CornerKind, CornerLadder, Memory, PiecewiseCurve, ProblemSize, Rate};

#[derive(Debug, Error, PartialEq)]
pub enum BoundsError {
    #[error("memory {memory} outside [0, {files}): bounds are only defined there")]
    MemoryOutOfRange { memory: f64, files: u32 },
}

fn check_memory(ps: ProblemSize, m: Memory) -> Result<f64, BoundsError> {
    let v = m.get();
    if !(v >= 0.0 && v < ps.files_f()) {
        return Err(BoundsError::MemoryOutOfRange {
            memory: v,
            files: ps.files(),
        });
    }
    Ok(v)
}

/// `(1 - x)^e` in log space, so that small `x` and large `e` do not lose
/// precision. `e = 0` returns exactly 1, also at `x = 1`.
pub(crate) fn pow_one_minus(x: f64, e: f64) -> f64 {
    if e == 0.0 {
        return 1.0;
    }
    (e * (-x).ln_1p()).exp()
}

/// Worst-case lower bound on the rate-memory tradeoff: the maximum over
/// `ell in 1..=nbar` of the larger of the two linear branches
/// `ell - m*ell^2/N` and `ell - m * sum_{k<=ell} k/(N-k+1)`.
///
/// Returns the raw maximum without clamping; it is positive on `[0, N)`.
pub fn worst_case_lower(ps: ProblemSize, m: Memory) -> Result<Rate, BoundsError> {
    let m = check_memory(ps, m)?;
    let n = ps.files_f();
    let mut best = f64::NEG_INFINITY;
    let mut harmonic = 0.0;
    for ell in 1..=ps.nbar() {
        let l = f64::from(ell);
        harmonic += l / (n - l + 1.0);
        let quadratic = l - m * l * l / n;
        let weighted = l - m * harmonic;
        let branch = quadratic.max(weighted);
        if branch > best {
            best = branch;
        }
    }
    Ok(Rate::new(best))
}

/// The simplified worst-case floor used by the gap analysis:
/// `max_ell sum_{j<=ell} (1 - j*m/(N-j+1))`. Never exceeds
/// [`worst_case_lower`].
pub fn worst_case_lower_secondbranch(ps: ProblemSize, m: Memory) -> Result<Rate, BoundsError> {
    let m = check_memory(ps, m)?;
    let n = ps.files_f();
    let mut best = f64::NEG_INFINITY;
    let mut sum = 0.0;
    for j in 1..=ps.nbar() {
        let j = f64::from(j);
        sum += 1.0 - j * m / (n - j + 1.0);
        if sum > best {
            best = sum;
        }
    }
    Ok(Rate::new(best))
}

/// Average-case lower bound on the rate-memory tradeoff; the maximum runs
/// over `ell in 1..=K` (not `nbar`).
pub fn avg_case_lower(ps: ProblemSize, m: Memory) -> Result<Rate, BoundsError> {
    let m = check_memory(ps, m)?;
    let n = ps.files_f();
    let mut best = f64::NEG_INFINITY;
    for ell in 1..=ps.users() {
        let l = f64::from(ell);
        let coverage = 1.0 - pow_one_minus(1.0 / n, l);
        let linear = coverage * (n - l * m);
        let triangular = coverage * n - l * (l + 1.0) * m / (2.0 * n);
        let branch = linear.max(triangular);
        if branch > best {
            best = branch;
        }
    }
    Ok(Rate::new(best))
}

/// The simplified average-case floor used by the gap analysis:
/// `max_{ell in 1..=nbar} sum_{k<=ell} [(1-1/N)^{k-1} - k*m/N]`.
pub fn avg_case_lower_floor(ps: ProblemSize, m: Memory) -> Result<Rate, BoundsError> {
    let m = check_memory(ps, m)?;
    let n = ps.files_f();
    let mut best = f64::NEG_INFINITY;
    let mut sum = 0.0;
    for k in 1..=ps.nbar() {
        let k = f64::from(k);
        sum += pow_one_minus(1.0 / n, k - 1.0) - k * m / n;
        if sum > best {
            best = sum;
        }
    }
    Ok(Rate::new(best))
}

/// Decentralized achievable rate: `nbar` at `m = 0`, otherwise
/// `((N-m)/m) * (1 - (1-m/N)^nbar)`. Upper bounds both tradeoffs.
pub fn yma_upper(ps: ProblemSize, m: Memory) -> Result<Rate, BoundsError> {
    let m = check_memory(ps, m)?;
    if m == 0.0 {
        return Ok(Rate::new(ps.nbar_f()));
    }
    let n = ps.files_f();
    let rate = (n - m) / m * (1.0 - pow_one_minus(m / n, ps.nbar_f()));
    Ok(Rate::new(rate))
}

fn corner_memory(ps: ProblemSize, kind: CornerKind, ell: u32) -> f64 {
    let n = ps.files_f();
    if ell == ps.nbar() {
        return 0.0;
    }
    let l = f64::from(ell);
    match kind {
        CornerKind::Worst => (n - l) / (l + 1.0),
        CornerKind::Avg => n / (l + 1.0) * pow_one_minus(1.0 / n, l),
    }
}

/// Corner-point ladder `(ell, M_ell)` for `ell = 0..=nbar`; memory strictly
/// decreases from `N` down to `0`.
pub fn corner_points(ps: ProblemSize, kind: CornerKind) -> CornerLadder {
    let points = (0..=ps.nbar())
        .map(|ell| (ell, Memory::new(corner_memory(ps, kind, ell))))
        .collect();
    CornerLadder::from_points(kind, points)
}

/// Piecewise-linear upper envelope of [`yma_upper`] with breakpoints at the
/// corner points. Dominates the underlying convex rate everywhere on
/// `[0, N)` and coincides with it at every breakpoint.
pub fn yma_envelope(ps: ProblemSize, kind: CornerKind) -> PiecewiseCurve {
    let ladder = corner_points(ps, kind);
    let mut points = Vec::with_capacity(ladder.len());
    for &(_, m) in ladder.points().iter().rev() {
        let rate = if m.get() < ps.files_f() {
            yma_upper(ps, m).expect("corner memory is inside [0, N)").get()
        } else {
            // The ladder tops out at M_0 = N where the achievable rate is 0.
            0.0
        };
        points.push((m.get(), rate));
    }
    PiecewiseCurve::new(points).expect("corner ladder is strictly decreasing")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn ps(k: u32, n: u32) -> ProblemSize {
        ProblemSize::new(k, n).unwrap()
    }

    /// Independent evaluation of the worst-case bound: plain loops and
    /// powers, no shared helpers with the implementation.
    fn oracle_worst(k: u32, n: u32, m: f64) -> f64 {
        let nbar = k.min(n);
        let mut best = f64::NEG_INFINITY;
        for ell in 1..=nbar {
            let l = ell as f64;
            let b1 = l - m * l * l / n as f64;
            let mut s = 0.0;
            for j in 1..=ell {
                s += j as f64 / (n as f64 - j as f64 + 1.0);
            }
            let b2 = l - m * s;
            best = best.max(b1).max(b2);
        }
        best
    }

    fn oracle_avg(k: u32, n: u32, m: f64) -> f64 {
        let nf = n as f64;
        let mut best = f64::NEG_INFINITY;
        for ell in 1..=k {
            let l = ell as f64;
            let p = 1.0 - (1.0 - 1.0 / nf).powi(ell as i32);
            let b1 = p * (nf - l * m);
            let b2 = p * nf - l * (l + 1.0) * m / (2.0 * nf);
            best = best.max(b1).max(b2);
        }
        best
    }

    #[test]
    fn worst_case_examples() {
        assert_eq!(worst_case_lower(ps(16, 64), 0.0.into()).unwrap().get(), 16.0);
        assert_eq!(worst_case_lower(ps(2, 2), 1.0.into()).unwrap().get(), 0.5);
        let got = worst_case_lower(ps(16, 64), 4.0.into()).unwrap().get();
        assert_relative_eq!(got, oracle_worst(16, 64, 4.0), max_relative = 1e-14);
    }

    #[test]
    fn worst_case_rejects_bad_memory() {
        assert!(worst_case_lower(ps(2, 2), (-0.1).into()).is_err());
        assert!(worst_case_lower(ps(2, 2), 2.0.into()).is_err());
        assert!(worst_case_lower(ps(2, 2), f64::NAN.into()).is_err());
    }

    #[test]
    fn secondbranch_examples() {
        assert_eq!(
            worst_case_lower_secondbranch(ps(2, 2), 1.0.into()).unwrap().get(),
            0.5
        );
        assert_eq!(
            worst_case_lower_secondbranch(ps(16, 64), 0.0.into()).unwrap().get(),
            16.0
        );
        assert_eq!(
            worst_case_lower_secondbranch(ps(3, 7), 0.0.into()).unwrap().get(),
            3.0
        );
        // At M_8 the floor agrees with a brute-force scan over ell.
        let m8 = corner_points(ps(16, 64), CornerKind::Worst)
            .memory_of(8)
            .unwrap();
        let mut oracle = f64::NEG_INFINITY;
        for ell in 1..=16u32 {
            let mut s = 0.0;
            for j in 1..=ell {
                s += 1.0 - j as f64 * m8.get() / (64.0 - j as f64 + 1.0);
            }
            oracle = oracle.max(s);
        }
        let got = worst_case_lower_secondbranch(ps(16, 64), m8).unwrap().get();
        assert_relative_eq!(got, oracle, max_relative = 1e-13);
    }

    #[test]
    fn secondbranch_never_exceeds_main_bound() {
        for &(k, n) in &[(2u32, 2u32), (16, 64), (64, 16), (5, 3)] {
            let p = ps(k, n);
            for i in 0..200 {
                let m = Memory::new(i as f64 / 200.0 * (n as f64 - 1e-9));
                let floor = worst_case_lower_secondbranch(p, m).unwrap().get();
                let main = worst_case_lower(p, m).unwrap().get();
                assert!(floor <= main + 1e-12, "K={k} N={n} m={m}");
            }
        }
    }

    #[test]
    fn avg_case_examples() {
        assert_eq!(avg_case_lower(ps(1, 1), 0.0.into()).unwrap().get(), 1.0);
        assert_relative_eq!(
            avg_case_lower(ps(2, 2), 0.0.into()).unwrap().get(),
            1.5,
            max_relative = 1e-15
        );
        let got = avg_case_lower(ps(16, 64), 2.0.into()).unwrap().get();
        assert_relative_eq!(got, oracle_avg(16, 64, 2.0), max_relative = 1e-13);
    }

    #[test]
    fn avg_case_scans_all_users_not_just_nbar() {
        // K = 4 users, N = 2 files: ell ranges to 4 and the larger ell wins
        // at m = 0.
        let got = avg_case_lower(ps(4, 2), 0.0.into()).unwrap().get();
        assert_relative_eq!(got, oracle_avg(4, 2, 0.0), max_relative = 1e-15);
        let nbar_only = (1..=2u32)
            .map(|l| (1.0 - 0.5f64.powi(l as i32)) * 2.0)
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(got > nbar_only);
    }

    #[test]
    fn yma_examples() {
        assert_eq!(yma_upper(ps(16, 64), 0.0.into()).unwrap().get(), 16.0);
        assert_relative_eq!(
            yma_upper(ps(1, 1), 0.5.into()).unwrap().get(),
            0.5,
            max_relative = 1e-15
        );
        // Direct substitution at every worst-case corner.
        let p = ps(16, 64);
        for &(ell, m) in corner_points(p, CornerKind::Worst).points() {
            if ell == 0 {
                continue;
            }
            let direct = if m.get() == 0.0 {
                16.0
            } else {
                (64.0 - m.get()) / m.get() * (1.0 - (1.0 - m.get() / 64.0).powi(16))
            };
            assert_relative_eq!(
                yma_upper(p, m).unwrap().get(),
                direct,
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn corner_ladders_match_formulas() {
        let worst = corner_points(ps(2, 2), CornerKind::Worst);
        assert_eq!(worst.points().len(), 3);
        assert_eq!(worst.points()[0], (0, Memory::new(2.0)));
        assert_eq!(worst.points()[1], (1, Memory::new(0.5)));
        assert_eq!(worst.points()[2], (2, Memory::new(0.0)));

        let tiny = corner_points(ps(1, 1), CornerKind::Worst);
        assert_eq!(tiny.points(), &[(0, Memory::new(1.0)), (1, Memory::new(0.0))]);

        let avg = corner_points(ps(2, 2), CornerKind::Avg);
        assert_eq!(avg.points()[0], (0, Memory::new(2.0)));
        assert_relative_eq!(avg.points()[1].1.get(), 0.5, max_relative = 1e-15);
        assert_eq!(avg.points()[2], (2, Memory::new(0.0)));
    }

    #[test]
    fn corner_ladder_exact_to_formula() {
        for &(k, n) in &[(16u32, 64u32), (64, 16), (50, 50), (7, 3)] {
            let p = ps(k, n);
            for kind in [CornerKind::Worst, CornerKind::Avg] {
                let ladder = corner_points(p, kind);
                for &(ell, m) in ladder.points() {
                    let expect = if ell == p.nbar() {
                        0.0
                    } else {
                        match kind {
                            CornerKind::Worst => (n as f64 - ell as f64) / (ell as f64 + 1.0),
                            CornerKind::Avg => {
                                n as f64 / (ell as f64 + 1.0)
                                    * (1.0 - 1.0 / n as f64).powi(ell as i32)
                            }
                        }
                    };
                    if expect == 0.0 {
                        assert_eq!(m.get(), 0.0);
                    } else {
                        assert_relative_eq!(m.get(), expect, max_relative = 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn envelope_touches_rate_at_corners_and_dominates_between() {
        let p = ps(16, 64);
        for kind in [CornerKind::Worst, CornerKind::Avg] {
            let envelope = yma_envelope(p, kind);
            let ladder = corner_points(p, kind);
            for &(_, m) in ladder.points() {
                if m.get() >= p.files_f() {
                    continue;
                }
                let e = envelope.eval(m.get()).unwrap();
                let r = yma_upper(p, m).unwrap().get();
                assert_relative_eq!(e, r, max_relative = 1e-12);
            }
            // Strict domination at interior segment midpoints.
            let bps = envelope.breakpoints();
            for w in bps.windows(2) {
                let mid = 0.5 * (w[0].0 + w[1].0);
                let e = envelope.eval(mid).unwrap();
                let r = yma_upper(p, Memory::new(mid)).unwrap().get();
                assert!(e >= r, "envelope must dominate at {mid}");
                if w[1].0 < p.files_f() {
                    assert!(e - r > 0.0, "gap should be strictly positive at {mid}");
                }
            }
        }
    }

    #[test]
    fn envelope_degenerate_single_segment() {
        let envelope = yma_envelope(ps(1, 1), CornerKind::Worst);
        assert_eq!(envelope.breakpoints(), &[(0.0, 1.0), (1.0, 0.0)]);
        assert_relative_eq!(envelope.eval(0.25).unwrap(), 0.75, max_relative = 1e-15);
    }

    #[test]
    fn linear_branch_scale_free_identity() {
        // First branch at ell with m = N/ell^2 equals ell - 1; exact in
        // binary floats when N/ell^2 is exact.
        for &(ell, n) in &[(1u32, 5u32), (2, 8), (4, 64), (8, 128)] {
            let l = ell as f64;
            let m = n as f64 / (l * l);
            let branch = l - m * l * l / n as f64;
            assert_eq!(branch, l - 1.0);
        }
    }
}
