//! Reusable verification suites: randomized entropy-axiom and subset
//! inequality checks, the scheme corpus soundness checks, and the LP
//! dominance checks. The CLI `verify` command and the acceptance tests both
//! run these.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rand::RngCore;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bounds::{avg_case_lower, worst_case_lower};
use crate::gap::{phi, psi};
use crate::info::{
    expected_distinct, expected_distinct_enumerated, han_check, JointPmf, SchemeEntropyContext,
};
use crate::lp::{all_demands, build_model, solve_with, LpObjective, PivotRule, SolveOptions};
use crate::scheme::{place, CacheScheme, Library};
use crate::types::{DemandVector, Memory, ProblemSize};

/// Outcome of one verification check.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn from_failures(name: &str, failures: Vec<String>, ok_detail: String) -> Check {
        if failures.is_empty() {
            Check {
                name: name.to_string(),
                passed: true,
                detail: ok_detail,
            }
        } else {
            Check {
                name: name.to_string(),
                passed: false,
                detail: format!("{} failures: {}", failures.len(), failures.join("; ")),
            }
        }
    }
}

fn uniform_open(rng: &mut ChaCha8Rng) -> f64 {
    // (0, 1]: never returns 0, so -ln is finite.
    1.0 - (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Dirichlet(1,..,1)-distributed dense table over the given shape.
pub fn random_pmf(rng: &mut ChaCha8Rng, sizes: Vec<usize>) -> JointPmf {
    let cells: usize = sizes.iter().product();
    let mut raw: Vec<f64> = (0..cells).map(|_| -uniform_open(rng).ln()).collect();
    let total: f64 = raw.iter().sum();
    for p in &mut raw {
        *p /= total;
    }
    // Renormalize the largest cell so the table sums to 1 within 1e-12.
    let drift: f64 = 1.0 - raw.iter().sum::<f64>();
    if let Some(mx) = raw
        .iter_mut()
        .max_by(|a, b| a.partial_cmp(b).expect("finite"))
    {
        *mx += drift;
    }
    JointPmf::new(sizes, raw).expect("normalized random table")
}

/// Independent blocks `A_1..A_L` (one variable each) with a random channel
/// to `V`: returns the joint table plus the block/side index sets.
pub fn random_han_instance(
    rng: &mut ChaCha8Rng,
) -> (JointPmf, Vec<Vec<usize>>, Vec<usize>) {
    let l = 2 + (rng.next_u32() % 2) as usize; // 2 or 3 blocks
    let sizes: Vec<usize> = (0..l)
        .map(|_| 2 + (rng.next_u32() % 2) as usize)
        .collect();
    let v_size = 2 + (rng.next_u32() % 3) as usize;

    let marginals: Vec<Vec<f64>> = sizes
        .iter()
        .map(|&s| {
            let mut m: Vec<f64> = (0..s).map(|_| -uniform_open(rng).ln()).collect();
            let t: f64 = m.iter().sum();
            m.iter_mut().for_each(|p| *p /= t);
            m
        })
        .collect();
    let a_cells: usize = sizes.iter().product();
    let channel: Vec<Vec<f64>> = (0..a_cells)
        .map(|_| {
            let mut c: Vec<f64> = (0..v_size).map(|_| -uniform_open(rng).ln()).collect();
            let t: f64 = c.iter().sum();
            c.iter_mut().for_each(|p| *p /= t);
            c
        })
        .collect();

    let mut probs = Vec::with_capacity(a_cells * v_size);
    for a_idx in 0..a_cells {
        let mut rem = a_idx;
        let mut p_a = 1.0;
        for i in (0..l).rev() {
            p_a *= marginals[i][rem % sizes[i]];
            rem /= sizes[i];
        }
        for v in 0..v_size {
            probs.push(p_a * channel[a_idx][v]);
        }
    }
    let drift: f64 = 1.0 - probs.iter().sum::<f64>();
    if let Some(mx) = probs
        .iter_mut()
        .max_by(|a, b| a.partial_cmp(b).expect("finite"))
    {
        *mx += drift;
    }
    let mut shape = sizes.clone();
    shape.push(v_size);
    let pmf = JointPmf::new(shape, probs).expect("normalized channel table");
    let parts: Vec<Vec<usize>> = (0..l).map(|i| vec![i]).collect();
    (pmf, parts, vec![l])
}

/// Every placement for `K, N <= 3` at minimal feasible file length.
pub fn corpus() -> Vec<CacheScheme> {
    let mut out = Vec::new();
    for k in 1..=3u32 {
        for n in 1..=3u32 {
            for t in 0..=k {
                let f = crate::scheme::binomial(k, t) as usize;
                out.push(place(ProblemSize::new(k, n).unwrap(), f, t).unwrap());
            }
        }
    }
    out
}

/// `(N, ell)` grid on which the distinct-demand expectation is checked
/// exhaustively: every feasible `ell` for `N <= 12`, plus wide-library spot
/// checks, all within the `N^ell <= 1e6` enumeration cap.
pub fn expected_distinct_grid() -> Vec<(u32, u32)> {
    let mut grid = Vec::new();
    for n in 1..=12u32 {
        for ell in 1..=20u32 {
            if u128::from(n).pow(ell) <= 1_000_000 {
                grid.push((n, ell));
            }
        }
    }
    for &n in &[50u32, 100, 1000] {
        for ell in 1..=20u32 {
            if u128::from(n).pow(ell) <= 1_000_000 {
                grid.push((n, ell));
            }
        }
    }
    grid
}

fn pmf_axioms_check(seed: u64, instances: usize) -> Check {
    let failures: Vec<String> = (0..instances)
        .into_par_iter()
        .filter_map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (i as u64).wrapping_mul(0x9e37));
            let n = 2 + (rng.next_u32() % 2) as usize;
            let sizes: Vec<usize> = (0..n).map(|_| 2 + (rng.next_u32() % 3) as usize).collect();
            let pmf = random_pmf(&mut rng, sizes);
            let a = vec![0usize];
            let b = vec![1usize];
            let ab = vec![0usize, 1];
            let h_a = pmf.entropy(&a).unwrap();
            let h_b = pmf.entropy(&b).unwrap();
            let h_ab = pmf.entropy(&ab).unwrap();
            if h_a < -1e-12 || h_b < -1e-12 {
                return Some(format!("instance {i}: negative entropy"));
            }
            if h_ab > h_a + h_b + 1e-9 {
                return Some(format!("instance {i}: subadditivity violated"));
            }
            if h_ab + 1e-9 < h_a.max(h_b) {
                return Some(format!("instance {i}: monotonicity violated"));
            }
            if n >= 3 {
                let mi = pmf.conditional_mi(&[0], &[1], &[2]).unwrap();
                if mi < 0.0 {
                    return Some(format!("instance {i}: negative conditional MI"));
                }
            }
            None
        })
        .collect();
    Check::from_failures(
        "pmf-axioms",
        failures,
        format!("{instances} random tables satisfy the entropy axioms"),
    )
}

fn han_suite_check(seed: u64, instances: usize) -> Check {
    let failures: Vec<String> = (0..instances)
        .into_par_iter()
        .filter_map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (i as u64).wrapping_mul(0x51ed));
            let (pmf, parts, v) = random_han_instance(&mut rng);
            for l in 1..=parts.len() {
                match han_check(&pmf, &parts, &v, l) {
                    Ok((lhs, rhs)) => {
                        if lhs > rhs + 1e-9 {
                            return Some(format!("instance {i} l={l}: {lhs} > {rhs}"));
                        }
                    }
                    Err(e) => return Some(format!("instance {i} l={l}: {e}")),
                }
            }
            None
        })
        .collect();
    Check::from_failures(
        "han-inequality",
        failures,
        format!("{instances} random instances, all subset levels"),
    )
}

fn distinct_demands_check() -> Check {
    let grid = expected_distinct_grid();
    let failures: Vec<String> = grid
        .par_iter()
        .filter_map(|&(n, ell)| {
            let closed = expected_distinct(n, ell);
            match expected_distinct_enumerated(n, ell) {
                Ok(brute) => {
                    if (closed - brute).abs() > 1e-9 * brute.max(1.0) {
                        Some(format!("N={n} ell={ell}: {closed} vs {brute}"))
                    } else {
                        None
                    }
                }
                Err(e) => Some(format!("N={n} ell={ell}: {e}")),
            }
        })
        .collect();
    Check::from_failures(
        "distinct-demands",
        failures,
        format!("closed form matches enumeration on {} grid points", grid.len()),
    )
}

fn message_uniformity_check() -> Check {
    let mut failures = Vec::new();
    for scheme in corpus() {
        let ps = scheme.problem();
        let f = scheme.f_bits() as f64;
        let ctx = match SchemeEntropyContext::new(scheme) {
            Ok(c) => c,
            Err(e) => {
                failures.push(format!("{ps}: {e}"));
                continue;
            }
        };
        for mask in 1u32..1 << ps.files() {
            let want = f64::from(mask.count_ones()) * f;
            let got = ctx.entropy_wv(mask, 0);
            if (got - want).abs() > 1e-9 {
                failures.push(format!("{ps} S={mask:b}: H = {got}, want {want}"));
            }
        }
    }
    Check::from_failures(
        "message-uniformity",
        failures,
        "H(W_S) = |S| F exactly across the corpus".into(),
    )
}

fn lemma1_check_all() -> Check {
    let mut failures = Vec::new();
    for base in corpus() {
        for suppress in [false, true] {
            let scheme = base.clone().with_duplicate_suppression(suppress);
            let ps = scheme.problem();
            let ctx = SchemeEntropyContext::new(scheme).expect("corpus fits the caps");
            for d in DemandVector::enumerate(ps.users() as usize, ps.files()) {
                for ell in 1..=ps.nbar() {
                    match ctx.lemma1_check(&d, ell) {
                        Ok(r) => {
                            if r.achieved_rate < r.rate_bound - 1e-9 {
                                failures.push(format!(
                                    "{ps} t={} suppress={suppress} d={d} ell={ell}: {} < {}",
                                    ctx.scheme().t(),
                                    r.achieved_rate,
                                    r.rate_bound
                                ));
                            }
                        }
                        Err(e) => failures.push(format!("{ps} d={d} ell={ell}: {e}")),
                    }
                }
            }
        }
    }
    Check::from_failures(
        "lemma1-soundness",
        failures,
        "per-demand bound below the achieved rate on the full corpus".into(),
    )
}

fn lemma3_check_all() -> Check {
    let mut failures = Vec::new();
    for scheme in corpus() {
        let ps = scheme.problem();
        let t = scheme.t();
        let ctx = SchemeEntropyContext::new(scheme).expect("corpus fits the caps");
        for ell in 1..=ps.nbar().min(4) {
            match ctx.lemma3_alphas(ell) {
                Ok(r) => {
                    let sum: f64 = r.alphas.iter().sum();
                    let cap = r.bound_quadratic.min(r.bound_harmonic);
                    if sum > cap + 1e-9 {
                        failures.push(format!("{ps} t={t} ell={ell}: {sum} > {cap}"));
                    }
                }
                Err(e) => failures.push(format!("{ps} t={t} ell={ell}: {e}")),
            }
        }
    }
    Check::from_failures(
        "lemma3-soundness",
        failures,
        "averaged distinct-prefix bound holds on the full corpus".into(),
    )
}

fn lemma4_check_all() -> Check {
    let mut failures = Vec::new();
    for scheme in corpus() {
        let ps = scheme.problem();
        let t = scheme.t();
        let ctx = SchemeEntropyContext::new(scheme).expect("corpus fits the caps");
        for ell in 1..=ps.users() {
            match ctx.lemma4_betas(ell) {
                Ok(r) => {
                    let sum: f64 = r.betas.iter().sum();
                    let cap = r.bound_coverage.min(r.bound_triangular);
                    if sum > cap + 1e-9 {
                        failures.push(format!("{ps} t={t} ell={ell}: {sum} > {cap}"));
                    }
                }
                Err(e) => failures.push(format!("{ps} t={t} ell={ell}: {e}")),
            }
        }
    }
    Check::from_failures(
        "lemma4-soundness",
        failures,
        "averaged repeated-prefix bound holds on the full corpus".into(),
    )
}

/// Entropy-lemma verification: random-table axioms, the subset inequality,
/// the distinct-demand expectation, and the three scheme lemmas.
pub fn lemmas_suite(seed: u64) -> Vec<Check> {
    vec![
        pmf_axioms_check(seed, 1000),
        han_suite_check(seed, 1000),
        distinct_demands_check(),
        message_uniformity_check(),
        lemma1_check_all(),
        lemma3_check_all(),
        lemma4_check_all(),
    ]
}

/// Scheme verification: exact decoding, rate and memory accounting, and the
/// converse sandwich.
pub fn schemes_suite() -> Vec<Check> {
    let mut decode_failures = Vec::new();
    let mut rate_failures = Vec::new();
    let mut memory_failures = Vec::new();
    let mut sandwich_failures = Vec::new();
    let mut format_failures = Vec::new();

    for base in corpus() {
        let ps = base.problem();
        let t = base.t();
        let f = base.f_bits();
        // Exact integer accounting identities.
        if base.cached_bits_per_user() * ps.users() as usize
            != f * ps.files() as usize * t as usize
        {
            memory_failures.push(format!("{ps} t={t}"));
        }
        let d0 = DemandVector::enumerate(ps.users() as usize, ps.files())
            .next()
            .expect("at least one demand");
        let plan = base.plan(&d0).expect("valid demand");
        if plan.total_bits * (t as usize + 1) != f * (ps.users() - t) as usize {
            rate_failures.push(format!("{ps} t={t}: {} bits", plan.total_bits));
        }

        for suppress in [false, true] {
            let scheme = base.clone().with_duplicate_suppression(suppress);
            let lib = Library::random(ps, f, 0xC0FFEE);
            for d in DemandVector::enumerate(ps.users() as usize, ps.files()) {
                match scheme.deliver(&d, &lib) {
                    Ok(tx) => {
                        for line in tx.dump().lines() {
                            if !transcript_line_ok(line) {
                                format_failures.push(format!("{ps} t={t} d={d}: {line}"));
                            }
                        }
                    }
                    Err(e) => {
                        decode_failures.push(format!("{ps} t={t} suppress={suppress} d={d}: {e}"))
                    }
                }
            }
        }

        if t < ps.users() {
            let m = Memory::new(base.memory_used());
            let (worst, avg) = base.measure_rates().expect("under the enumeration cap");
            let lw = worst_case_lower(ps, m).expect("memory inside [0,N)").get();
            let la = avg_case_lower(ps, m).expect("memory inside [0,N)").get();
            if worst.get() < lw - 1e-9 || avg.get() < la - 1e-9 {
                sandwich_failures.push(format!("{ps} t={t}"));
            }
        }
    }

    vec![
        Check::from_failures(
            "decode-all-demands",
            decode_failures,
            "every corpus scheme decodes every demand exactly".into(),
        ),
        Check::from_failures(
            "rate-formula",
            rate_failures,
            "baseline delivery sends exactly C(K,t+1)/C(K,t) files".into(),
        ),
        Check::from_failures(
            "memory-accounting",
            memory_failures,
            "cached bits match F*N*t/K exactly".into(),
        ),
        Check::from_failures(
            "rate-sandwich",
            sandwich_failures,
            "measured rates dominate both lower bounds".into(),
        ),
        Check::from_failures(
            "transcript-format",
            format_failures,
            "transcript dumps follow `subset=... bits=...`".into(),
        ),
    ]
}

fn transcript_line_ok(line: &str) -> bool {
    let Some(rest) = line.strip_prefix("subset=") else {
        return false;
    };
    let Some((ids, bits)) = rest.split_once(" bits=") else {
        return false;
    };
    let ids_ok = !ids.is_empty()
        && ids
            .split(',')
            .all(|p| !p.is_empty() && p.bytes().all(|b| b.is_ascii_digit()));
    let bits_ok = bits.bytes().all(|b| b.is_ascii_hexdigit());
    ids_ok && bits_ok
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// The worst-case lower bound evaluated in exact rational arithmetic.
pub fn worst_case_lower_rational(ps: ProblemSize, m: &BigRational) -> BigRational {
    let n = rat(i64::from(ps.files()), 1);
    let mut best: Option<BigRational> = None;
    let mut harmonic = BigRational::zero();
    for ell in 1..=ps.nbar() {
        let l = rat(i64::from(ell), 1);
        harmonic += &l / (&n - &l + rat(1, 1));
        let quadratic = &l - m * &l * &l / &n;
        let weighted = &l - m * &harmonic;
        let branch = quadratic.max(weighted);
        best = Some(match best {
            None => branch,
            Some(b) => b.max(branch),
        });
    }
    best.expect("nbar >= 1")
}

/// Exact memory-sharing envelope of the baseline scheme rates
/// `(t N / K, (K-t)/(t+1))` for `t = 0..=K`.
pub fn scheme_interpolated_rate(ps: ProblemSize, m: &BigRational) -> BigRational {
    let k = i64::from(ps.users());
    let n = i64::from(ps.files());
    let point = |t: i64| -> (BigRational, BigRational) {
        (rat(t * n, k), rat(k - t, t + 1))
    };
    for t in 0..k {
        let (m0, r0) = point(t);
        let (m1, r1) = point(t + 1);
        if *m >= m0 && *m <= m1 {
            let w = (m - &m0) / (&m1 - &m0);
            return &r0 + w * (&r1 - &r0);
        }
    }
    BigRational::zero()
}

/// LP verification: the hand-solvable instance, dominance over the
/// closed-form bound, the achievability cap, monotonicity, and pivot-rule
/// agreement. Returns the checks; the `2x2` exact values feed the
/// acceptance suite as well.
pub fn lp_suite() -> Vec<Check> {
    let mut checks = Vec::new();

    // One user, one file: R*(M) = 1 - M, solvable by hand.
    let tiny = ProblemSize::new(1, 1).unwrap();
    let tiny_demands = all_demands(tiny);
    let mut failures = Vec::new();
    for (num, den) in [(0i64, 1i64), (1, 4), (1, 2), (3, 4)] {
        let m = rat(num, den);
        let model = build_model(tiny, m.clone(), &tiny_demands, LpObjective::Worst)
            .expect("tiny model fits");
        match crate::lp::solve(&model) {
            Ok(sol) => {
                let want = rat(den - num, den);
                if sol.optimal_rate != want {
                    failures.push(format!("M={num}/{den}: got {}", sol.optimal_rate));
                }
            }
            Err(e) => failures.push(format!("M={num}/{den}: {e}")),
        }
    }
    checks.push(Check::from_failures(
        "lp-hand-solution",
        failures,
        "single-user single-file optimum equals 1 - M exactly".into(),
    ));

    // Two users, two files, all four demands.
    let two = ProblemSize::new(2, 2).unwrap();
    let demands = all_demands(two);
    let grid = [
        rat(0, 1),
        rat(1, 4),
        rat(1, 2),
        rat(3, 4),
        rat(1, 1),
        rat(3, 2),
    ];
    let mut dominance = Vec::new();
    let mut achievability = Vec::new();
    let mut monotone = Vec::new();
    let mut values: Vec<BigRational> = Vec::new();
    for m in &grid {
        let model = build_model(two, m.clone(), &demands, LpObjective::Worst)
            .expect("2x2 model fits");
        match crate::lp::solve(&model) {
            Ok(sol) => {
                let floor = worst_case_lower_rational(two, m);
                if sol.optimal_rate < floor {
                    dominance.push(format!("M={m}: {} < {floor}", sol.optimal_rate));
                }
                let cap = scheme_interpolated_rate(two, m);
                if sol.optimal_rate > cap {
                    achievability.push(format!("M={m}: {} > {cap}", sol.optimal_rate));
                }
                values.push(sol.optimal_rate);
            }
            Err(e) => dominance.push(format!("M={m}: {e}")),
        }
    }
    for w in values.windows(2) {
        if w[1] > w[0] {
            monotone.push(format!("{} then {}", w[0], w[1]));
        }
    }
    checks.push(Check::from_failures(
        "lp-dominance",
        dominance,
        "LP optimum dominates the closed-form lower bound at every grid point".into(),
    ));
    checks.push(Check::from_failures(
        "lp-achievability",
        achievability,
        "LP optimum stays below the interpolated scheme rate".into(),
    ));
    checks.push(Check::from_failures(
        "lp-monotone",
        monotone,
        "LP optimum is nonincreasing in memory".into(),
    ));

    // Pivot-rule independence at one interior memory point.
    let model = build_model(two, rat(1, 2), &demands, LpObjective::Worst).expect("fits");
    let bland = solve_with(
        &model,
        SolveOptions {
            rule: PivotRule::Bland,
            symmetrize: false,
        },
    );
    let dantzig = solve_with(
        &model,
        SolveOptions {
            rule: PivotRule::Dantzig,
            symmetrize: false,
        },
    );
    let pivot_failures = match (bland, dantzig) {
        (Ok(b), Ok(d)) if b.optimal_rate == d.optimal_rate => Vec::new(),
        (Ok(b), Ok(d)) => vec![format!("{} vs {}", b.optimal_rate, d.optimal_rate)],
        (b, d) => vec![format!("solve failed: {:?} / {:?}", b.is_err(), d.is_err())],
    };
    checks.push(Check::from_failures(
        "lp-pivot-agreement",
        pivot_failures,
        "Bland and steepest-coefficient rules give the same optimum".into(),
    ));

    checks
}

/// All suites, in order.
pub fn all_suites(seed: u64) -> Vec<Check> {
    let mut checks = lemmas_suite(seed);
    checks.extend(schemes_suite());
    checks.extend(lp_suite());
    checks
}

/// `psi(a, 1/ell) >= phi(a, ell)` on an `a` grid, the mechanism that extends
/// the scan beyond the enumerated `ell` range.
pub fn phi_psi_domination(a_points: usize, ell_lo: u32, ell_hi: u32) -> Check {
    let failures: Vec<String> = (ell_lo..=ell_hi)
        .into_par_iter()
        .filter_map(|ell| {
            for i in 1..=a_points {
                let a = i as f64 / (a_points + 1) as f64;
                let p = phi(a, ell).expect("interior point");
                let q = psi(a, 1.0 / f64::from(ell)).expect("interior point");
                if q < p - 1e-9 {
                    return Some(format!("a={a} ell={ell}: psi={q} < phi={p}"));
                }
            }
            None
        })
        .collect();
    Check::from_failures(
        "phi-psi-domination",
        failures,
        format!("psi(a, 1/ell) dominates phi(a, ell) on {a_points} x [{ell_lo}, {ell_hi}]"),
    )
}

/// Denominators of the three gap majorants stay positive across dense grids.
pub fn gap_denominator_positivity() -> Check {
    let mut failures = Vec::new();
    let phi_bad: Vec<String> = (1u32..=1000)
        .into_par_iter()
        .filter_map(|ell| {
            for i in 1..1000 {
                let a = i as f64 * 1e-3;
                if let Err(e) = phi(a, ell) {
                    return Some(format!("phi a={a} ell={ell}: {e}"));
                }
            }
            None
        })
        .collect();
    failures.extend(phi_bad);
    for i in 1..1000 {
        let a = i as f64 * 1e-3;
        for j in 1..100 {
            let b = j as f64 * 1e-6;
            if let Err(e) = psi(a, b) {
                failures.push(format!("psi a={a} b={b}: {e}"));
            }
        }
    }
    for i in 1..=1000 {
        let u = i as f64 * 1e-3;
        for j in 1..=500 {
            let v = j as f64 * 1e-3;
            if let Err(e) = crate::gap::eta(u, v) {
                failures.push(format!("eta u={u} v={v}: {e}"));
            }
        }
    }
    Check::from_failures(
        "gap-denominators",
        failures,
        "phi, psi, eta evaluate cleanly on dense domain grids".into(),
    )
}
