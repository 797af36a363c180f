//! Dense two-phase simplex over exact rationals. All variables are
//! nonnegative; rows may be <=, >= or =. Bland's rule is the anti-cycling
//! default; the steepest-coefficient rule falls back to Bland if it stalls.

use num_rational::BigRational;
use num_traits::Zero;

use super::rational::{LpScalar, Q128};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relop {
    Le,
    Ge,
    Eq,
}

impl Relop {
    pub fn as_str(self) -> &'static str {
        match self {
            Relop::Le => "<=",
            Relop::Ge => ">=",
            Relop::Eq => "=",
        }
    }
}

/// One linear constraint over nonnegative variables.
#[derive(Debug, Clone)]
pub struct LinCon {
    pub terms: Vec<(usize, BigRational)>,
    pub op: Relop,
    pub rhs: BigRational,
}

impl LinCon {
    /// Exact left-hand-side value at a point.
    pub fn lhs_at(&self, x: &[BigRational]) -> BigRational {
        let mut acc = BigRational::zero();
        for (var, coef) in &self.terms {
            acc += coef * &x[*var];
        }
        acc
    }

    /// Whether the constraint holds exactly at a point.
    pub fn satisfied_at(&self, x: &[BigRational]) -> bool {
        let lhs = self.lhs_at(x);
        match self.op {
            Relop::Le => lhs <= self.rhs,
            Relop::Ge => lhs >= self.rhs,
            Relop::Eq => lhs == self.rhs,
        }
    }

    /// Amount by which the constraint is violated (positive = violated).
    pub fn violation_at(&self, x: &[BigRational]) -> BigRational {
        let lhs = self.lhs_at(x);
        match self.op {
            Relop::Le => lhs - &self.rhs,
            Relop::Ge => &self.rhs - lhs,
            Relop::Eq => {
                let d = lhs - &self.rhs;
                if d.is_negative() {
                    -d
                } else {
                    d
                }
            }
        }
    }
}

use num_traits::Signed;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PivotRule {
    /// Smallest-index entering variable throughout: guaranteed finite, slow
    /// under heavy degeneracy.
    Bland,
    /// Most-negative reduced cost, switching to Bland if the objective
    /// stalls; the anti-cycling guarantee comes from the Bland fallback.
    Dantzig,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolveFailure {
    Overflow,
    Infeasible,
    Unbounded,
    IterationLimit,
}

/// Exact optimum of `min c'x` subject to the constraints and `x >= 0`.
#[derive(Debug, Clone)]
pub struct LpOptimum {
    pub objective: BigRational,
    pub x: Vec<BigRational>,
    /// One multiplier per input constraint, oriented for the constraint as
    /// given (so that `sum_i y_i * rhs_i == objective`).
    pub duals: Vec<BigRational>,
}

/// Solve with the checked 128-bit fast path, redoing the whole solve in
/// arbitrary precision if anything overflows.
pub fn solve_lp(
    n_vars: usize,
    cons: &[LinCon],
    objective: &[(usize, BigRational)],
    rule: PivotRule,
) -> Result<LpOptimum, SolveFailure> {
    match simplex_generic::<Q128>(n_vars, cons, objective, rule) {
        Err(SolveFailure::Overflow) => simplex_generic::<BigRational>(n_vars, cons, objective, rule),
        other => other,
    }
}

struct Tableau<T> {
    rows: Vec<Vec<T>>,
    rhs: Vec<T>,
    basis: Vec<usize>,
    /// Initial basis column of each row: the embedded identity under which
    /// the current tableau shows B^-1, used for lexicographic tie-breaks.
    basis0: Vec<usize>,
    n_cols: usize,
}

fn simplex_generic<T: LpScalar>(
    n_vars: usize,
    cons: &[LinCon],
    objective: &[(usize, BigRational)],
    rule: PivotRule,
) -> Result<LpOptimum, SolveFailure> {
    let m = cons.len();
    let needs_flip = |c: &LinCon| c.rhs.is_negative() || (c.op == Relop::Ge && c.rhs.is_zero());
    let mut n_slack = 0usize;
    let mut n_art = 0usize;
    for c in cons {
        let op = match (c.op, needs_flip(c)) {
            (Relop::Eq, _) => Relop::Eq,
            (Relop::Le, false) | (Relop::Ge, true) => Relop::Le,
            (Relop::Ge, false) | (Relop::Le, true) => Relop::Ge,
        };
        match op {
            Relop::Le => n_slack += 1,
            Relop::Ge => {
                n_slack += 1;
                n_art += 1;
            }
            Relop::Eq => n_art += 1,
        }
    }
    let n_cols = n_vars + n_slack + n_art;
    let conv = |r: &BigRational| T::from_big(r).ok_or(SolveFailure::Overflow);

    // Build rows with rhs >= 0; flipping a row negates its dual.
    let mut rows: Vec<Vec<T>> = Vec::with_capacity(m);
    let mut rhs: Vec<T> = Vec::with_capacity(m);
    let mut flipped = vec![false; m];
    let mut slack_col = vec![usize::MAX; m];
    let mut art_col = vec![usize::MAX; m];
    let mut basis = vec![usize::MAX; m];
    let mut next_slack = n_vars;
    let mut next_art = n_vars + n_slack;

    for (i, c) in cons.iter().enumerate() {
        let mut row = vec![T::zero_val(); n_cols];
        // Flip rows so the rhs is nonnegative, and flip >=0 rows into <=0
        // form so their slack starts basic and no artificial is needed.
        let flip = needs_flip(c);
        flipped[i] = flip;
        for (var, coef) in &c.terms {
            let v = conv(coef)?;
            let v = if flip { v.neg_val() } else { v };
            row[*var] = row[*var].try_add(&v).ok_or(SolveFailure::Overflow)?;
        }
        let b = conv(&c.rhs)?;
        let b = if flip { b.neg_val() } else { b };
        let op = match (c.op, flip) {
            (Relop::Eq, _) => Relop::Eq,
            (Relop::Le, false) | (Relop::Ge, true) => Relop::Le,
            (Relop::Ge, false) | (Relop::Le, true) => Relop::Ge,
        };
        match op {
            Relop::Le => {
                row[next_slack] = T::one_val();
                slack_col[i] = next_slack;
                next_slack += 1;
                // A <=-row with nonnegative rhs starts basic on its slack.
                basis[i] = slack_col[i];
            }
            Relop::Ge => {
                row[next_slack] = T::one_val().neg_val();
                slack_col[i] = next_slack;
                next_slack += 1;
            }
            Relop::Eq => {}
        }
        if basis[i] == usize::MAX {
            row[next_art] = T::one_val();
            art_col[i] = next_art;
            next_art += 1;
            basis[i] = art_col[i];
        }
        rows.push(row);
        rhs.push(b);
    }

    let basis0 = basis.clone();
    let mut tab = Tableau {
        rows,
        rhs,
        basis,
        basis0,
        n_cols,
    };

    // Phase 1: minimize the sum of artificial variables.
    let art_start = n_vars + n_slack;
    let mut cost1 = vec![T::zero_val(); n_cols];
    for c in cost1.iter_mut().skip(art_start) {
        *c = T::one_val();
    }
    let (val1, _) = optimize(&mut tab, &cost1, rule, &[])?;
    if val1.is_positive_val() {
        return Err(SolveFailure::Infeasible);
    }
    drive_out_artificials(&mut tab, art_start)?;

    // Phase 2: the real objective, artificial columns banned.
    let mut cost2 = vec![T::zero_val(); n_cols];
    for (var, coef) in objective {
        cost2[*var] = cost2[*var]
            .try_add(&conv(coef)?)
            .ok_or(SolveFailure::Overflow)?;
    }
    let banned: Vec<usize> = (art_start..n_cols).collect();
    let (obj, reduced) = optimize(&mut tab, &cost2, rule, &banned)?;

    // Primal solution.
    let mut x = vec![BigRational::zero(); n_vars];
    for (i, &b) in tab.basis.iter().enumerate() {
        if b < n_vars {
            x[b] = tab.rhs[i].to_big();
        }
    }

    // Duals from the reduced costs of each row's identity column, flipped
    // back to the original row orientation.
    let mut duals = vec![BigRational::zero(); m];
    for i in 0..m {
        let (col, sign_neg) = if slack_col[i] != usize::MAX {
            // +slack for Le, -surplus for Ge: y = -r for Le, +r for Ge.
            let le = !ge_row(cons[i].op, flipped[i]);
            (slack_col[i], le)
        } else {
            (art_col[i], true)
        };
        let r = reduced[col].to_big();
        let mut y = if sign_neg { -r } else { r };
        if flipped[i] {
            y = -y;
        }
        duals[i] = y;
    }

    Ok(LpOptimum {
        objective: obj.to_big(),
        x,
        duals,
    })
}

fn ge_row(op: Relop, flipped: bool) -> bool {
    matches!(
        (op, flipped),
        (Relop::Ge, false) | (Relop::Le, true)
    )
}

/// Pivot until optimal for the given costs. Returns the objective value and
/// the final reduced-cost row.
fn optimize<T: LpScalar>(
    tab: &mut Tableau<T>,
    cost: &[T],
    rule: PivotRule,
    banned: &[usize],
) -> Result<(T, Vec<T>), SolveFailure> {
    const MAX_PIVOTS: usize = 200_000;
    let mut is_banned = vec![false; tab.n_cols];
    for &b in banned {
        is_banned[b] = true;
    }

    // Reduced costs r_j = c_j - c_B . column_j and objective c_B . rhs.
    let mut reduced = cost.to_vec();
    let mut objective = T::zero_val();
    for (i, &b) in tab.basis.iter().enumerate() {
        if cost[b].is_zero_val() {
            continue;
        }
        objective = objective
            .try_add(&cost[b].try_mul(&tab.rhs[i]).ok_or(SolveFailure::Overflow)?)
            .ok_or(SolveFailure::Overflow)?;
        for j in 0..tab.n_cols {
            if !tab.rows[i][j].is_zero_val() {
                let adj = cost[b]
                    .try_mul(&tab.rows[i][j])
                    .ok_or(SolveFailure::Overflow)?;
                reduced[j] = reduced[j].try_sub(&adj).ok_or(SolveFailure::Overflow)?;
            }
        }
    }

    for _pivot in 0..MAX_PIVOTS {
        // Entering column.
        let mut entering: Option<usize> = None;
        for j in 0..tab.n_cols {
            if is_banned[j] || !reduced[j].is_negative_val() {
                continue;
            }
            match rule {
                PivotRule::Bland => {
                    entering = Some(j);
                    break;
                }
                PivotRule::Dantzig => match entering {
                    None => entering = Some(j),
                    Some(e) => {
                        if reduced[j]
                            .try_cmp(&reduced[e])
                            .ok_or(SolveFailure::Overflow)?
                            == std::cmp::Ordering::Less
                        {
                            entering = Some(j);
                        }
                    }
                },
            }
        }
        let Some(col) = entering else {
            return Ok((objective, reduced));
        };

        // Ratio test with lexicographic tie-breaking over the embedded
        // identity columns; this blocks cycling under any entering rule.
        let mut leave: Option<(usize, T)> = None;
        for i in 0..tab.rows.len() {
            if !tab.rows[i][col].is_positive_val() {
                continue;
            }
            let ratio = tab.rhs[i]
                .try_div(&tab.rows[i][col])
                .ok_or(SolveFailure::Overflow)?;
            let better = match &leave {
                None => true,
                Some((r, best)) => match ratio.try_cmp(best).ok_or(SolveFailure::Overflow)? {
                    std::cmp::Ordering::Less => true,
                    std::cmp::Ordering::Equal => lex_less(tab, i, *r, col)?,
                    std::cmp::Ordering::Greater => false,
                },
            };
            if better {
                leave = Some((i, ratio));
            }
        }
        let Some((row, _ratio)) = leave else {
            return Err(SolveFailure::Unbounded);
        };

        pivot(tab, row, col)?;
        // Update the reduced costs against the pivoted row; the objective
        // itself moves by r_col * (new basic value).
        let factor = reduced[col].clone();
        if !factor.is_zero_val() {
            let nz: Vec<usize> = (0..tab.n_cols)
                .filter(|&j| !tab.rows[row][j].is_zero_val())
                .collect();
            for &j in &nz {
                let adj = factor
                    .try_mul(&tab.rows[row][j])
                    .ok_or(SolveFailure::Overflow)?;
                reduced[j] = reduced[j].try_sub(&adj).ok_or(SolveFailure::Overflow)?;
            }
            let adj = factor
                .try_mul(&tab.rhs[row])
                .ok_or(SolveFailure::Overflow)?;
            objective = objective.try_add(&adj).ok_or(SolveFailure::Overflow)?;
        }
    }
    Err(SolveFailure::IterationLimit)
}

/// Whether row `i` precedes row `r` lexicographically after scaling both by
/// their entries in the entering column. Scanning the initial-identity
/// columns is enough: the corresponding B^-1 rows are independent, so a
/// first difference always exists.
fn lex_less<T: LpScalar>(
    tab: &Tableau<T>,
    i: usize,
    r: usize,
    col: usize,
) -> Result<bool, SolveFailure> {
    let ai = &tab.rows[i][col];
    let ar = &tab.rows[r][col];
    for &t in &tab.basis0 {
        let vi = tab.rows[i][t].try_div(ai).ok_or(SolveFailure::Overflow)?;
        let vr = tab.rows[r][t].try_div(ar).ok_or(SolveFailure::Overflow)?;
        match vi.try_cmp(&vr).ok_or(SolveFailure::Overflow)? {
            std::cmp::Ordering::Less => return Ok(true),
            std::cmp::Ordering::Greater => return Ok(false),
            std::cmp::Ordering::Equal => {}
        }
    }
    Ok(false)
}

fn pivot<T: LpScalar>(tab: &mut Tableau<T>, row: usize, col: usize) -> Result<(), SolveFailure> {
    let piv = tab.rows[row][col].clone();
    for j in 0..tab.n_cols {
        if !tab.rows[row][j].is_zero_val() {
            tab.rows[row][j] = tab.rows[row][j]
                .try_div(&piv)
                .ok_or(SolveFailure::Overflow)?;
        }
    }
    tab.rhs[row] = tab.rhs[row].try_div(&piv).ok_or(SolveFailure::Overflow)?;

    // Nonzero columns of the pivot row; only these change anywhere.
    let nz: Vec<usize> = (0..tab.n_cols)
        .filter(|&j| !tab.rows[row][j].is_zero_val())
        .collect();
    for i in 0..tab.rows.len() {
        if i == row || tab.rows[i][col].is_zero_val() {
            continue;
        }
        let factor = tab.rows[i][col].clone();
        for &j in &nz {
            let adj = factor
                .try_mul(&tab.rows[row][j])
                .ok_or(SolveFailure::Overflow)?;
            tab.rows[i][j] = tab.rows[i][j]
                .try_sub(&adj)
                .ok_or(SolveFailure::Overflow)?;
        }
        let adj = factor
            .try_mul(&tab.rhs[row])
            .ok_or(SolveFailure::Overflow)?;
        tab.rhs[i] = tab.rhs[i].try_sub(&adj).ok_or(SolveFailure::Overflow)?;
    }
    tab.basis[row] = col;
    Ok(())
}

/// Pivot any artificial variable still basic after phase 1 out of the basis,
/// or learn that its row is redundant and zero it out.
fn drive_out_artificials<T: LpScalar>(
    tab: &mut Tableau<T>,
    art_start: usize,
) -> Result<(), SolveFailure> {
    for i in 0..tab.rows.len() {
        if tab.basis[i] < art_start {
            continue;
        }
        debug_assert!(tab.rhs[i].is_zero_val(), "artificial basic at nonzero level");
        let col = (0..art_start).find(|&j| !tab.rows[i][j].is_zero_val());
        if let Some(col) = col {
            pivot(tab, i, col)?;
        }
        // If no eligible column exists the row is 0 = 0 and stays inert.
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn solve(
        n: usize,
        cons: &[LinCon],
        obj: &[(usize, BigRational)],
        rule: PivotRule,
    ) -> LpOptimum {
        solve_lp(n, cons, obj, rule).unwrap()
    }

    #[test]
    fn minimizes_single_variable_floor() {
        // min x s.t. x >= 3
        let cons = vec![LinCon {
            terms: vec![(0, r(1, 1))],
            op: Relop::Ge,
            rhs: r(3, 1),
        }];
        for rule in [PivotRule::Bland, PivotRule::Dantzig] {
            let opt = solve(1, &cons, &[(0, r(1, 1))], rule);
            assert_eq!(opt.objective, r(3, 1));
            assert_eq!(opt.x[0], r(3, 1));
            // Strong duality: y * b == objective.
            assert_eq!(&opt.duals[0] * r(3, 1), r(3, 1));
        }
    }

    #[test]
    fn solves_textbook_lp() {
        // min -x - 2y s.t. x + y <= 4, x <= 2, y <= 3  -> x=1? no:
        // optimum at (1,3): -1-6 = -7.
        let cons = vec![
            LinCon {
                terms: vec![(0, r(1, 1)), (1, r(1, 1))],
                op: Relop::Le,
                rhs: r(4, 1),
            },
            LinCon {
                terms: vec![(0, r(1, 1))],
                op: Relop::Le,
                rhs: r(2, 1),
            },
            LinCon {
                terms: vec![(1, r(1, 1))],
                op: Relop::Le,
                rhs: r(3, 1),
            },
        ];
        let obj = vec![(0, r(-1, 1)), (1, r(-2, 1))];
        for rule in [PivotRule::Bland, PivotRule::Dantzig] {
            let opt = solve(2, &cons, &obj, rule);
            assert_eq!(opt.objective, r(-7, 1));
            assert_eq!(opt.x, vec![r(1, 1), r(3, 1)]);
            let dual_value: BigRational = opt
                .duals
                .iter()
                .zip(&cons)
                .map(|(y, c)| y * &c.rhs)
                .sum();
            assert_eq!(dual_value, r(-7, 1));
        }
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        let infeasible = vec![
            LinCon {
                terms: vec![(0, r(1, 1))],
                op: Relop::Le,
                rhs: r(1, 1),
            },
            LinCon {
                terms: vec![(0, r(1, 1))],
                op: Relop::Ge,
                rhs: r(2, 1),
            },
        ];
        assert_eq!(
            solve_lp(1, &infeasible, &[(0, r(1, 1))], PivotRule::Bland).unwrap_err(),
            SolveFailure::Infeasible
        );

        let unbounded = vec![LinCon {
            terms: vec![(0, r(1, 1))],
            op: Relop::Ge,
            rhs: r(1, 1),
        }];
        assert_eq!(
            solve_lp(1, &unbounded, &[(0, r(-1, 1))], PivotRule::Bland).unwrap_err(),
            SolveFailure::Unbounded
        );
    }

    #[test]
    fn equality_rows_and_negative_rhs() {
        // min x + y s.t. x - y = -2, x + y >= 4  ->  x=1, y=3.
        let cons = vec![
            LinCon {
                terms: vec![(0, r(1, 1)), (1, r(-1, 1))],
                op: Relop::Eq,
                rhs: r(-2, 1),
            },
            LinCon {
                terms: vec![(0, r(1, 1)), (1, r(1, 1))],
                op: Relop::Ge,
                rhs: r(4, 1),
            },
        ];
        let obj = vec![(0, r(1, 1)), (1, r(1, 1))];
        for rule in [PivotRule::Bland, PivotRule::Dantzig] {
            let opt = solve(2, &cons, &obj, rule);
            assert_eq!(opt.objective, r(4, 1));
            assert_eq!(opt.x, vec![r(1, 1), r(3, 1)]);
            let dual_value: BigRational = opt
                .duals
                .iter()
                .zip(&cons)
                .map(|(y, c)| y * &c.rhs)
                .sum();
            assert_eq!(dual_value, r(4, 1));
        }
    }

    #[test]
    fn fractional_data_stays_exact() {
        // min x s.t. 3x >= 1/7  ->  x = 1/21.
        let cons = vec![LinCon {
            terms: vec![(0, r(3, 1))],
            op: Relop::Ge,
            rhs: r(1, 7),
        }];
        let opt = solve(1, &cons, &[(0, r(1, 1))], PivotRule::Bland);
        assert_eq!(opt.objective, r(1, 21));
    }
}
