//! Machine-generated converse bounds: minimize the delivery rate over the
//! Shannon outer bound for tiny instances. Variables are the joint entropies
//! of every nonempty subset of `(W_1..W_N, V_1..V_K, X_d for d in D)`;
//! constraints are the elemental polymatroid inequalities plus the problem
//! equalities (uniform independent messages, cache size, deterministic
//! placement and encoding, decodability). All arithmetic is exact.

pub mod rational;
pub mod simplex;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::types::{DemandVector, ProblemSize};
pub use simplex::{LinCon, LpOptimum, PivotRule, Relop, SolveFailure};

#[derive(Debug, Error)]
pub enum LpError {
    #[error("model has {rvs} random variables; the cap is {cap}")]
    TooManyVariables { rvs: usize, cap: usize },
    #[error("demand set invalid: {0}")]
    BadDemandSet(String),
    #[error("memory must be nonnegative (got {0})")]
    NegativeMemory(BigRational),
    #[error("symmetry reduction needs a permutation-closed demand set")]
    SymmetryUnavailable,
    #[error("LP reported {0:?}; the model is feasible and bounded by construction, so this is a modeling bug")]
    SolverFailure(SolveFailure),
}

/// Which rate the model minimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpObjective {
    /// One rate variable `R` with `H(X_d) <= R` for every demand.
    Worst,
    /// Per-demand rate variables, minimizing their mean.
    Avg,
}

/// Options for [`solve_with`].
#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub rule: PivotRule,
    /// Add orbit equalities under file/receiver permutations. Only valid
    /// (and only accepted) when the demand set is permutation-closed.
    pub symmetrize: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            rule: PivotRule::Dantzig,
            symmetrize: false,
        }
    }
}

/// Entropy LP for one instance at one memory point.
pub struct EntropyLpModel {
    ps: ProblemSize,
    memory: BigRational,
    demands: Vec<DemandVector>,
    objective_kind: LpObjective,
    rv_names: Vec<String>,
    n_rvs: usize,
    subset_vars: usize,
    rate_var_names: Vec<String>,
    constraints: Vec<LinCon>,
    labels: Vec<String>,
    n_problem: usize,
    initial_active: Vec<usize>,
    objective: Vec<(usize, BigRational)>,
}

/// Exact optimum with the supporting multipliers of the active constraints.
#[derive(Debug, Clone)]
pub struct LpSolution {
    pub optimal_rate: BigRational,
    /// Values of every model variable (subset entropies, then rate vars).
    pub values: Vec<BigRational>,
    /// `(constraint index, multiplier)` for constraints with nonzero duals.
    pub dual_certificate: Option<Vec<(usize, BigRational)>>,
}

const MAX_RVS: usize = 10;

fn big(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// All `N^K` demand vectors, the canonical worst-case demand set.
pub fn all_demands(ps: ProblemSize) -> Vec<DemandVector> {
    DemandVector::enumerate(ps.users() as usize, ps.files()).collect()
}

pub fn build_model(
    ps: ProblemSize,
    memory: BigRational,
    demands: &[DemandVector],
    objective: LpObjective,
) -> Result<EntropyLpModel, LpError> {
    if memory.is_negative() {
        return Err(LpError::NegativeMemory(memory));
    }
    if demands.is_empty() {
        return Err(LpError::BadDemandSet("no demands given".into()));
    }
    for d in demands {
        if d.len() != ps.users() as usize {
            return Err(LpError::BadDemandSet(format!(
                "demand {d} does not have K = {} entries",
                ps.users()
            )));
        }
    }
    for (i, d) in demands.iter().enumerate() {
        if demands[..i].contains(d) {
            return Err(LpError::BadDemandSet(format!("duplicate demand {d}")));
        }
    }
    let n = ps.files() as usize;
    let k = ps.users() as usize;
    let n_rvs = n + k + demands.len();
    if n_rvs > MAX_RVS {
        return Err(LpError::TooManyVariables {
            rvs: n_rvs,
            cap: MAX_RVS,
        });
    }

    let mut rv_names: Vec<String> = Vec::with_capacity(n_rvs);
    for i in 1..=n {
        rv_names.push(format!("W{i}"));
    }
    for i in 1..=k {
        rv_names.push(format!("V{i}"));
    }
    for d in demands {
        let digits: String = d.entries().iter().map(u32::to_string).collect();
        rv_names.push(format!("X{digits}"));
    }

    let subset_vars = (1usize << n_rvs) - 1;
    let var = |mask: u32| -> usize { mask as usize - 1 };
    let w_all: u32 = (1 << n) - 1;
    let w_bit = |file: u32| -> u32 { 1 << (file - 1) };
    let v_bit = |recv: usize| -> u32 { 1 << (n + recv) };
    let x_bit = |di: usize| -> u32 { 1 << (n + k + di) };

    let (rate_var_names, objective_terms): (Vec<String>, Vec<(usize, BigRational)>) =
        match objective {
            LpObjective::Worst => (vec!["R".to_string()], vec![(subset_vars, big(1))]),
            LpObjective::Avg => {
                let weight = BigRational::new(BigInt::from(1), BigInt::from(demands.len()));
                let names = demands
                    .iter()
                    .map(|d| {
                        let digits: String = d.entries().iter().map(u32::to_string).collect();
                        format!("R{digits}")
                    })
                    .collect();
                let terms = (0..demands.len())
                    .map(|i| (subset_vars + i, weight.clone()))
                    .collect();
                (names, terms)
            }
        };

    let mut constraints: Vec<LinCon> = Vec::new();
    let mut labels: Vec<String> = Vec::new();
    let push = |con: LinCon, label: String, constraints: &mut Vec<LinCon>, labels: &mut Vec<String>| {
        constraints.push(con);
        labels.push(label);
    };

    // Uniform independent messages: H(W_S) = |S| for every nonempty S.
    for mask in 1..=w_all {
        push(
            LinCon {
                terms: vec![(var(mask), big(1))],
                op: Relop::Eq,
                rhs: big(i64::from(mask.count_ones())),
            },
            format!("uniform:{mask:b}"),
            &mut constraints,
            &mut labels,
        );
    }
    // Cache size: H(V_k) <= M.
    for r in 0..k {
        push(
            LinCon {
                terms: vec![(var(v_bit(r)), big(1))],
                op: Relop::Le,
                rhs: memory.clone(),
            },
            format!("cache-size:V{}", r + 1),
            &mut constraints,
            &mut labels,
        );
    }
    // Deterministic placement: H(V_k | W_all) = 0.
    for r in 0..k {
        push(
            LinCon {
                terms: vec![(var(v_bit(r) | w_all), big(1)), (var(w_all), big(-1))],
                op: Relop::Eq,
                rhs: big(0),
            },
            format!("placement:V{}", r + 1),
            &mut constraints,
            &mut labels,
        );
    }
    // Deterministic encoding: H(X_d | W_all) = 0.
    for (di, d) in demands.iter().enumerate() {
        push(
            LinCon {
                terms: vec![(var(x_bit(di) | w_all), big(1)), (var(w_all), big(-1))],
                op: Relop::Eq,
                rhs: big(0),
            },
            format!("encoding:{d}"),
            &mut constraints,
            &mut labels,
        );
    }
    // Decodability: H(W_{d_k} | X_d, V_k) = 0.
    for (di, d) in demands.iter().enumerate() {
        for (r, &file) in d.entries().iter().enumerate() {
            let known = x_bit(di) | v_bit(r);
            push(
                LinCon {
                    terms: vec![
                        (var(w_bit(file) | known), big(1)),
                        (var(known), big(-1)),
                    ],
                    op: Relop::Eq,
                    rhs: big(0),
                },
                format!("decode:{d}:V{}", r + 1),
                &mut constraints,
                &mut labels,
            );
        }
    }
    // Rate coupling.
    for (di, d) in demands.iter().enumerate() {
        let rate_var = match objective {
            LpObjective::Worst => subset_vars,
            LpObjective::Avg => subset_vars + di,
        };
        push(
            LinCon {
                terms: vec![(var(x_bit(di)), big(1)), (rate_var, big(-1))],
                op: Relop::Le,
                rhs: big(0),
            },
            format!("rate:{d}"),
            &mut constraints,
            &mut labels,
        );
    }
    let n_problem = constraints.len();
    let mut initial_active: Vec<usize> = (0..n_problem).collect();

    // Elemental inequalities: monotonicity on the full set, then elemental
    // submodularity for every pair and conditioning subset.
    let full: u32 = (1 << n_rvs) - 1;
    for i in 0..n_rvs {
        let rest = full & !(1 << i);
        let mut terms = vec![(var(full), big(1))];
        if rest != 0 {
            terms.push((var(rest), big(-1)));
        }
        initial_active.push(constraints.len());
        push(
            LinCon {
                terms,
                op: Relop::Ge,
                rhs: big(0),
            },
            format!("mono:{}", rv_names[i]),
            &mut constraints,
            &mut labels,
        );
    }
    for i in 0..n_rvs {
        for j in (i + 1)..n_rvs {
            let pair = (1 << i) | (1 << j);
            let others: Vec<usize> = (0..n_rvs).filter(|&b| pair >> b & 1 == 0).collect();
            for sub in 0u32..1 << others.len() {
                let mut s: u32 = 0;
                for (bi, &b) in others.iter().enumerate() {
                    if sub >> bi & 1 == 1 {
                        s |= 1 << b;
                    }
                }
                let mut terms = vec![
                    (var(s | 1 << i), big(1)),
                    (var(s | 1 << j), big(1)),
                    (var(s | pair), big(-1)),
                ];
                if s != 0 {
                    terms.push((var(s), big(-1)));
                }
                if s.count_ones() <= 1 {
                    initial_active.push(constraints.len());
                }
                push(
                    LinCon {
                        terms,
                        op: Relop::Ge,
                        rhs: big(0),
                    },
                    format!("submod:{},{}|{:b}", rv_names[i], rv_names[j], s),
                    &mut constraints,
                    &mut labels,
                );
            }
        }
    }

    Ok(EntropyLpModel {
        ps,
        memory,
        demands: demands.to_vec(),
        objective_kind: objective,
        rv_names,
        n_rvs,
        subset_vars,
        rate_var_names,
        constraints,
        labels,
        n_problem,
        initial_active,
        objective: objective_terms,
    })
}

impl EntropyLpModel {
    pub fn problem(&self) -> ProblemSize {
        self.ps
    }

    pub fn memory(&self) -> &BigRational {
        &self.memory
    }

    pub fn demands(&self) -> &[DemandVector] {
        &self.demands
    }

    pub fn objective_kind(&self) -> LpObjective {
        self.objective_kind
    }

    pub fn rv_count(&self) -> usize {
        self.n_rvs
    }

    /// Number of subset-entropy variables, `2^n - 1`.
    pub fn subset_variable_count(&self) -> usize {
        self.subset_vars
    }

    pub fn variable_count(&self) -> usize {
        self.subset_vars + self.rate_var_names.len()
    }

    pub fn constraint_count(&self) -> usize {
        self.constraints.len()
    }

    pub fn elemental_count(&self) -> usize {
        self.constraints.len() - self.n_problem
    }

    pub fn constraints(&self) -> &[LinCon] {
        &self.constraints
    }

    pub fn label(&self, idx: usize) -> &str {
        &self.labels[idx]
    }

    pub fn var_name(&self, idx: usize) -> String {
        if idx < self.subset_vars {
            let mask = (idx + 1) as u32;
            let mut names: Vec<&str> = (0..self.n_rvs)
                .filter(|&b| mask >> b & 1 == 1)
                .map(|b| self.rv_names[b].as_str())
                .collect();
            names.sort_unstable();
            format!("H({})", names.join(","))
        } else {
            self.rate_var_names[idx - self.subset_vars].clone()
        }
    }

    /// Line-oriented text dump: `minimize ...` then one constraint per line,
    /// `<coef>*H(<subset>) ... <relop> <rhs>`.
    pub fn export(&self) -> String {
        let mut out = String::new();
        out.push_str("minimize ");
        out.push_str(&self.terms_to_string(&self.objective));
        out.push('\n');
        for c in &self.constraints {
            out.push_str(&self.terms_to_string(&c.terms));
            out.push(' ');
            out.push_str(c.op.as_str());
            out.push(' ');
            out.push_str(&c.rhs.to_string());
            out.push('\n');
        }
        out
    }

    fn terms_to_string(&self, terms: &[(usize, BigRational)]) -> String {
        terms
            .iter()
            .map(|(v, c)| format!("{}*{}", c, self.var_name(*v)))
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Orbit equalities under file and receiver transpositions. Requires the
    /// demand set to be closed under both actions.
    fn symmetry_constraints(&self) -> Result<Vec<LinCon>, LpError> {
        let n = self.ps.files() as usize;
        let k = self.ps.users() as usize;
        let mut perms: Vec<Vec<usize>> = Vec::new();

        let demand_index = |entries: &[u32]| -> Option<usize> {
            self.demands.iter().position(|d| d.entries() == entries)
        };

        // File transpositions (f, f+1).
        for f in 0..n.saturating_sub(1) {
            let mut perm: Vec<usize> = (0..self.n_rvs).collect();
            perm.swap(f, f + 1);
            for (di, d) in self.demands.iter().enumerate() {
                let mapped: Vec<u32> = d
                    .entries()
                    .iter()
                    .map(|&e| {
                        if e == f as u32 + 1 {
                            f as u32 + 2
                        } else if e == f as u32 + 2 {
                            f as u32 + 1
                        } else {
                            e
                        }
                    })
                    .collect();
                let target = demand_index(&mapped).ok_or(LpError::SymmetryUnavailable)?;
                perm[n + k + di] = n + k + target;
            }
            perms.push(perm);
        }
        // Receiver transpositions (r, r+1).
        for r in 0..k.saturating_sub(1) {
            let mut perm: Vec<usize> = (0..self.n_rvs).collect();
            perm.swap(n + r, n + r + 1);
            for (di, d) in self.demands.iter().enumerate() {
                let mut mapped = d.entries().to_vec();
                mapped.swap(r, r + 1);
                let target = demand_index(&mapped).ok_or(LpError::SymmetryUnavailable)?;
                perm[n + k + di] = n + k + target;
            }
            perms.push(perm);
        }

        // Canonical representative per orbit by breadth-first closure.
        let total = (1usize << self.n_rvs) - 1;
        let mut canon: Vec<u32> = (0..=total as u32).collect();
        let apply = |perm: &[usize], mask: u32| -> u32 {
            let mut out = 0u32;
            for b in 0..self.n_rvs {
                if mask >> b & 1 == 1 {
                    out |= 1 << perm[b];
                }
            }
            out
        };
        // Iterate to a fixed point: canon[m] = min over the orbit.
        let mut changed = true;
        while changed {
            changed = false;
            for m in 1..=total as u32 {
                for perm in &perms {
                    let img = apply(perm, m);
                    let target = canon[img as usize].min(canon[m as usize]);
                    if canon[m as usize] != target {
                        canon[m as usize] = target;
                        changed = true;
                    }
                    if canon[img as usize] != target {
                        canon[img as usize] = target;
                        changed = true;
                    }
                }
            }
        }

        let mut cons = Vec::new();
        for m in 1..=total as u32 {
            let c = canon[m as usize];
            if c != m {
                cons.push(LinCon {
                    terms: vec![(m as usize - 1, big(1)), (c as usize - 1, big(-1))],
                    op: Relop::Eq,
                    rhs: big(0),
                });
            }
        }
        Ok(cons)
    }
}

/// Solve with the default pivot rule and no symmetry reduction.
pub fn solve(model: &EntropyLpModel) -> Result<LpSolution, LpError> {
    solve_with(model, SolveOptions::default())
}

/// Lazily activated exact solve: start from the problem constraints plus a
/// small elemental core, then repeatedly add the most violated elemental
/// inequalities until the optimum satisfies the entire model. The final
/// point is feasible for every constraint and optimal for the relaxation,
/// hence optimal for the full model.
pub fn solve_with(model: &EntropyLpModel, opts: SolveOptions) -> Result<LpSolution, LpError> {
    const BATCH: usize = 512;
    // Rounds after which non-binding rows are no longer dropped, so the
    // active set grows monotonically and the loop provably terminates.
    const PRUNE_ROUNDS: usize = 40;
    let n_vars = model.variable_count();

    let symmetry = if opts.symmetrize {
        model.symmetry_constraints()?
    } else {
        Vec::new()
    };

    let mut active: Vec<usize> = model.initial_active.clone();
    let mut in_active = vec![false; model.constraints.len()];
    for &i in &active {
        in_active[i] = true;
    }
    let keep_always = model.initial_active.len();

    for round in 0.. {
        let mut cons: Vec<LinCon> = active
            .iter()
            .map(|&i| model.constraints[i].clone())
            .collect();
        cons.extend(symmetry.iter().cloned());
        let opt = simplex::solve_lp(n_vars, &cons, &model.objective, opts.rule)
            .map_err(LpError::SolverFailure)?;

        let mut violated: Vec<(usize, BigRational)> = Vec::new();
        for (i, c) in model.constraints.iter().enumerate() {
            if in_active[i] {
                continue;
            }
            let v = c.violation_at(&opt.x);
            if v.is_positive() {
                violated.push((i, v));
            }
        }
        if violated.is_empty() {
            debug_assert!(model
                .constraints
                .iter()
                .all(|c| c.satisfied_at(&opt.x)));
            assert!(
                !opt.objective.is_negative(),
                "rate optimum must be nonnegative"
            );
            let dual_certificate = if opts.symmetrize {
                None
            } else {
                Some(
                    active
                        .iter()
                        .zip(&opt.duals)
                        .filter(|(_, y)| !y.is_zero())
                        .map(|(&i, y)| (i, y.clone()))
                        .collect(),
                )
            };
            return Ok(LpSolution {
                optimal_rate: opt.objective,
                values: opt.x,
                dual_certificate,
            });
        }

        // Drop lazily added rows that went slack; they return if violated
        // again. The initial core is never dropped.
        if round < PRUNE_ROUNDS {
            let mut kept = Vec::with_capacity(active.len());
            for (pos, &i) in active.iter().enumerate() {
                let binding = pos < keep_always
                    || model.constraints[i].violation_at(&opt.x).is_zero();
                if binding {
                    kept.push(i);
                } else {
                    in_active[i] = false;
                }
            }
            active = kept;
        }

        violated.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        for (i, _) in violated.into_iter().take(BATCH) {
            in_active[i] = true;
            active.push(i);
        }
    }
    unreachable!("the active set grows monotonically after pruning stops")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ps(k: u32, n: u32) -> ProblemSize {
        ProblemSize::new(k, n).unwrap()
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn single_demand_model(m: BigRational) -> EntropyLpModel {
        let d = vec![DemandVector::new(vec![1], 1).unwrap()];
        build_model(ps(1, 1), m, &d, LpObjective::Worst).unwrap()
    }

    #[test]
    fn tiny_instance_matches_hand_solution() {
        // One user, one file: R*(M) = 1 - M on [0, 1), solvable by hand.
        for (num, den) in [(0, 1), (1, 4), (1, 2), (3, 4)] {
            let model = single_demand_model(rat(num, den));
            let sol = solve(&model).unwrap();
            assert_eq!(sol.optimal_rate, rat(den - num, den), "M = {num}/{den}");
        }
    }

    #[test]
    fn tiny_model_shape() {
        let model = single_demand_model(rat(1, 2));
        assert_eq!(model.rv_count(), 3);
        assert_eq!(model.subset_variable_count(), 7);
        // 6 problem constraints + 3 monotonicity + 3*2 submodularity.
        assert_eq!(model.constraint_count(), 15);
        assert_eq!(model.elemental_count(), 9);
        let text = model.export();
        assert!(text.starts_with("minimize 1*R\n"));
        assert_eq!(text.lines().count(), 16);
        assert!(text.contains("1*H(W1) = 1"));
        assert!(text.contains("1*H(V1) <= 1/2"));
        assert!(text.contains("1*H(X1) -1*R <= 0"));
    }

    #[test]
    fn two_by_two_no_cache_rate_is_two() {
        let model = build_model(
            ps(2, 2),
            BigRational::zero(),
            &all_demands(ps(2, 2)),
            LpObjective::Worst,
        )
        .unwrap();
        assert_eq!(model.subset_variable_count(), 255);
        assert_eq!(
            model.elemental_count(),
            8 + 28 * 64,
            "n + C(n,2) 2^(n-2) elemental inequalities"
        );
        let sol = solve(&model).unwrap();
        assert_eq!(sol.optimal_rate, rat(2, 1));
    }

    #[test]
    fn two_by_two_half_cache_sandwiched_exactly() {
        // At M = 1: lower bound 1/2 and the t = 1 scheme rate 1/2 coincide.
        let model = build_model(
            ps(2, 2),
            rat(1, 1),
            &all_demands(ps(2, 2)),
            LpObjective::Worst,
        )
        .unwrap();
        let sol = solve(&model).unwrap();
        assert_eq!(sol.optimal_rate, rat(1, 2));
    }

    #[test]
    fn pivot_rules_agree() {
        let model = build_model(
            ps(2, 2),
            rat(1, 2),
            &all_demands(ps(2, 2)),
            LpObjective::Worst,
        )
        .unwrap();
        let bland = solve_with(
            &model,
            SolveOptions {
                rule: PivotRule::Bland,
                symmetrize: false,
            },
        )
        .unwrap();
        let dantzig = solve_with(
            &model,
            SolveOptions {
                rule: PivotRule::Dantzig,
                symmetrize: false,
            },
        )
        .unwrap();
        assert_eq!(bland.optimal_rate, dantzig.optimal_rate);
    }

    #[test]
    fn symmetry_reduction_preserves_the_optimum() {
        let model = build_model(
            ps(2, 2),
            rat(1, 2),
            &all_demands(ps(2, 2)),
            LpObjective::Worst,
        )
        .unwrap();
        let plain = solve(&model).unwrap();
        let sym = solve_with(
            &model,
            SolveOptions {
                rule: PivotRule::Bland,
                symmetrize: true,
            },
        )
        .unwrap();
        assert_eq!(plain.optimal_rate, sym.optimal_rate);
        assert!(sym.dual_certificate.is_none());
    }

    #[test]
    fn symmetry_requires_closed_demand_set() {
        let d = vec![DemandVector::new(vec![1, 2], 2).unwrap()];
        let model = build_model(ps(2, 2), rat(1, 2), &d, LpObjective::Worst).unwrap();
        assert!(matches!(
            solve_with(
                &model,
                SolveOptions {
                    rule: PivotRule::Bland,
                    symmetrize: true,
                }
            ),
            Err(LpError::SymmetryUnavailable)
        ));
    }

    #[test]
    fn duals_certify_the_tiny_optimum() {
        let model = single_demand_model(rat(1, 4));
        let sol = solve(&model).unwrap();
        let cert = sol.dual_certificate.unwrap();
        assert!(!cert.is_empty());
        // sum_i y_i b_i == optimum, exactly.
        let mut dual_value = BigRational::zero();
        for (idx, y) in &cert {
            dual_value += y * &model.constraints()[*idx].rhs;
        }
        assert_eq!(dual_value, sol.optimal_rate);
    }

    #[test]
    fn average_objective_never_exceeds_worst() {
        let demands = all_demands(ps(2, 2));
        for (num, den) in [(0, 1), (1, 2), (1, 1)] {
            let worst = solve(
                &build_model(ps(2, 2), rat(num, den), &demands, LpObjective::Worst).unwrap(),
            )
            .unwrap();
            let avg = solve(
                &build_model(ps(2, 2), rat(num, den), &demands, LpObjective::Avg).unwrap(),
            )
            .unwrap();
            assert!(avg.optimal_rate <= worst.optimal_rate, "M = {num}/{den}");
        }
    }

    #[test]
    fn model_validation() {
        assert!(matches!(
            build_model(ps(1, 1), rat(-1, 2), &all_demands(ps(1, 1)), LpObjective::Worst),
            Err(LpError::NegativeMemory(_))
        ));
        assert!(matches!(
            build_model(ps(1, 1), rat(1, 2), &[], LpObjective::Worst),
            Err(LpError::BadDemandSet(_))
        ));
        // 3 files + 3 users + 27 demands blows the RV cap.
        assert!(matches!(
            build_model(
                ps(3, 3),
                rat(1, 2),
                &all_demands(ps(3, 3)),
                LpObjective::Worst
            ),
            Err(LpError::TooManyVariables { .. })
        ));
    }
}
