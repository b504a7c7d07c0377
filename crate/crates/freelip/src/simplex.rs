//! A small dense simplex solver, generic over the scalar backend.
//!
//! Solves `min c . x` subject to `A x = b`, `x >= 0`, starting from a
//! caller-supplied feasible basis. Both linear programs in this crate — the
//! quotient norm and the dual bound on the transport norm — admit an obvious
//! feasible basis (flows routed through the base point, or slack variables),
//! so no phase-one machinery is needed.
//!
//! Pivoting uses Dantzig's rule (most negative reduced cost) and falls back
//! to Bland's rule when a run of degenerate pivots suggests cycling, which
//! guarantees termination. On exact backends the optimum is exact; on the
//! float backend zero tests use the backend tolerance.

use crate::scalar::Scalar;

/// `min costs . x` subject to `rows * x = rhs`, `x >= 0`.
#[derive(Debug, Clone)]
pub struct StandardLp<S> {
    pub costs: Vec<S>,
    pub rows: Vec<Vec<S>>,
    pub rhs: Vec<S>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SimplexError {
    #[error("objective is unbounded below")]
    Unbounded,
    #[error("pivot limit exceeded")]
    PivotLimit,
}

#[derive(Debug, Clone)]
pub struct LpSolution<S> {
    pub value: S,
    pub x: Vec<S>,
}

/// Consecutive degenerate pivots tolerated before switching to Bland's rule.
const STALL_THRESHOLD: u32 = 64;

/// Hard cap on total pivots; hitting it indicates a bug, not a hard input.
const PIVOT_LIMIT: u32 = 100_000;

fn is_strictly_neg<S: Scalar>(v: &S) -> bool {
    v.lt_scalar(&S::zero()) && !v.eq_scalar(&S::zero())
}

fn is_strictly_pos<S: Scalar>(v: &S) -> bool {
    S::zero().lt_scalar(v) && !v.eq_scalar(&S::zero())
}

/// Solves the program starting from `basis`, which must name one column per
/// row such that the basic solution is feasible. The basis columns may form
/// any invertible square matrix; the tableau is normalized by elimination
/// before iterating.
pub fn solve_min<S: Scalar>(
    lp: &StandardLp<S>,
    mut basis: Vec<usize>,
) -> Result<LpSolution<S>, SimplexError> {
    let m = lp.rows.len();
    let ncols = lp.costs.len();
    assert_eq!(basis.len(), m, "one basic column per row");
    assert_eq!(lp.rhs.len(), m);
    for row in &lp.rows {
        assert_eq!(row.len(), ncols, "ragged constraint matrix");
    }

    // Tableau: m rows of [A | b].
    let mut tab: Vec<Vec<S>> = lp
        .rows
        .iter()
        .zip(&lp.rhs)
        .map(|(row, b)| {
            let mut r = row.clone();
            r.push(b.clone());
            r
        })
        .collect();

    // Normalize so that basis column i is the i-th unit vector.
    for i in 0..m {
        let col = basis[i];
        let pivot_row = (i..m)
            .find(|&r| !tab[r][col].eq_scalar(&S::zero()))
            .expect("basis matrix is singular");
        tab.swap(i, pivot_row);
        let inv = S::one() / tab[i][col].clone();
        for v in tab[i].iter_mut() {
            *v = v.clone() * inv.clone();
        }
        for r in 0..m {
            if r == i || tab[r][col].is_zero() {
                continue;
            }
            let factor = tab[r][col].clone();
            for j in 0..=ncols {
                let delta = factor.clone() * tab[i][j].clone();
                tab[r][j] = tab[r][j].clone() - delta;
            }
            tab[r][col] = S::zero();
        }
    }
    for row in tab.iter() {
        debug_assert!(
            S::zero().le_tol(&row[ncols]),
            "starting basis is infeasible"
        );
    }

    // Reduced-cost row: costs minus the basic-cost combination of the rows.
    let mut reduced: Vec<S> = lp.costs.clone();
    reduced.push(S::zero()); // objective value (negated) lives in the last slot
    for i in 0..m {
        let cb = lp.costs[basis[i]].clone();
        if cb.is_zero() {
            continue;
        }
        for j in 0..=ncols {
            let delta = cb.clone() * tab[i][j].clone();
            reduced[j] = reduced[j].clone() - delta;
        }
    }

    let mut stall = 0u32;
    let mut bland = false;
    for _pivots in 0..PIVOT_LIMIT {
        // Entering column.
        let entering = if bland {
            (0..ncols).find(|&j| is_strictly_neg(&reduced[j]))
        } else {
            let mut best: Option<usize> = None;
            for j in 0..ncols {
                if is_strictly_neg(&reduced[j])
                    && best.map_or(true, |b| reduced[j].lt_scalar(&reduced[b]))
                {
                    best = Some(j);
                }
            }
            best
        };
        let Some(enter) = entering else {
            // Optimal: read off the solution.
            let mut x = vec![S::zero(); ncols];
            for i in 0..m {
                x[basis[i]] = tab[i][ncols].clone();
            }
            let value = S::zero() - reduced[ncols].clone();
            return Ok(LpSolution { value, x });
        };

        // Leaving row: tightest positive ratio. Under Bland, break ties by
        // the smallest basic variable index; otherwise by row order.
        let mut leave: Option<usize> = None;
        let mut best_ratio: Option<S> = None;
        for i in 0..m {
            if !is_strictly_pos(&tab[i][enter]) {
                continue;
            }
            let ratio = tab[i][ncols].clone() / tab[i][enter].clone();
            let better = match &best_ratio {
                None => true,
                Some(cur) => {
                    if ratio.lt_scalar(cur) && !ratio.eq_scalar(cur) {
                        true
                    } else if ratio.eq_scalar(cur) && bland {
                        basis[i] < basis[leave.expect("ratio implies row")]
                    } else {
                        false
                    }
                }
            };
            if better {
                best_ratio = Some(ratio);
                leave = Some(i);
            }
        }
        let Some(leave) = leave else {
            return Err(SimplexError::Unbounded);
        };

        let degenerate = tab[leave][ncols].eq_scalar(&S::zero());
        if degenerate {
            stall += 1;
            if stall >= STALL_THRESHOLD {
                bland = true;
            }
        } else {
            stall = 0;
        }

        // Pivot on (leave, enter).
        let inv = S::one() / tab[leave][enter].clone();
        for v in tab[leave].iter_mut() {
            *v = v.clone() * inv.clone();
        }
        tab[leave][enter] = S::one();
        for r in 0..m {
            if r == leave || tab[r][enter].is_zero() {
                continue;
            }
            let factor = tab[r][enter].clone();
            for j in 0..=ncols {
                let delta = factor.clone() * tab[leave][j].clone();
                tab[r][j] = tab[r][j].clone() - delta;
            }
            tab[r][enter] = S::zero();
        }
        if !reduced[enter].is_zero() {
            let factor = reduced[enter].clone();
            for j in 0..=ncols {
                let delta = factor.clone() * tab[leave][j].clone();
                reduced[j] = reduced[j].clone() - delta;
            }
            reduced[enter] = S::zero();
        }
        basis[leave] = enter;
    }
    Err(SimplexError::PivotLimit)
}

/// Solves `max costs . x` subject to `rows * x <= rhs`, `x >= 0`, where all
/// of `rhs` is non-negative, by adding slacks and starting from the slack
/// basis. Returns the maximum value and the primal solution (slacks
/// stripped).
pub fn solve_max_leq<S: Scalar>(
    costs: &[S],
    rows: &[Vec<S>],
    rhs: &[S],
) -> Result<LpSolution<S>, SimplexError> {
    let n = costs.len();
    let m = rows.len();
    let mut full_rows = Vec::with_capacity(m);
    for (i, row) in rows.iter().enumerate() {
        assert_eq!(row.len(), n, "ragged constraint matrix");
        debug_assert!(
            !is_strictly_neg(&rhs[i]),
            "slack basis needs non-negative right-hand sides"
        );
        let mut r = row.clone();
        r.extend((0..m).map(|k| if k == i { S::one() } else { S::zero() }));
        full_rows.push(r);
    }
    // max c.x = -min (-c).x
    let mut full_costs: Vec<S> = costs.iter().map(|c| S::zero() - c.clone()).collect();
    full_costs.extend(std::iter::repeat_with(S::zero).take(m));
    let lp = StandardLp { costs: full_costs, rows: full_rows, rhs: rhs.to_vec() };
    let basis = (n..n + m).collect();
    let mut sol = solve_min(&lp, basis)?;
    sol.value = S::zero() - sol.value;
    sol.x.truncate(n);
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, Scalar};
    use num::BigRational;

    fn r(v: i64) -> BigRational {
        rat(v, 1)
    }

    #[test]
    fn maximizes_a_textbook_program_exactly() {
        // max 3x + 5y st x <= 4, 2y <= 12, 3x + 2y <= 18  ->  36 at (2, 6)
        let sol = solve_max_leq(
            &[r(3), r(5)],
            &[
                vec![r(1), r(0)],
                vec![r(0), r(2)],
                vec![r(3), r(2)],
            ],
            &[r(4), r(12), r(18)],
        )
        .unwrap();
        assert_eq!(sol.value, r(36));
        assert_eq!(sol.x, vec![r(2), r(6)]);
    }

    #[test]
    fn equality_form_with_a_signed_basis() {
        // min x + y st x - y = -2, x, y >= 0  ->  2 at (0, 2).
        // Basis column for the single row is y with coefficient -1, so the
        // normalization step has to rescale it.
        let lp = StandardLp {
            costs: vec![r(1), r(1)],
            rows: vec![vec![r(1), r(-1)]],
            rhs: vec![r(-2)],
        };
        let sol = solve_min(&lp, vec![1]).unwrap();
        assert_eq!(sol.value, r(2));
        assert_eq!(sol.x, vec![r(0), r(2)]);
    }

    #[test]
    fn detects_unbounded_programs() {
        // min -x st x - y = 0: x can grow forever.
        let lp = StandardLp {
            costs: vec![r(-1), r(0)],
            rows: vec![vec![r(1), r(-1)]],
            rhs: vec![r(0)],
        };
        assert_eq!(solve_min(&lp, vec![0]).unwrap_err(), SimplexError::Unbounded);
    }

    #[test]
    fn fractional_optima_stay_exact() {
        // max x + y st 2x + y <= 3, x + 2y <= 3 -> optimum 2 at (1, 1);
        // perturb to force a fractional vertex.
        let sol = solve_max_leq(
            &[r(2), r(1)],
            &[vec![r(2), r(1)], vec![r(1), r(2)]],
            &[r(3), r(3)],
        )
        .unwrap();
        assert_eq!(sol.value, rat(3, 1));
        assert_eq!(sol.x, vec![rat(3, 2), rat(0, 1)]);
    }

    #[test]
    fn float_backend_agrees_with_exact() {
        let sol = solve_max_leq(
            &[3.0, 5.0],
            &[
                vec![1.0, 0.0],
                vec![0.0, 2.0],
                vec![3.0, 2.0],
            ],
            &[4.0, 12.0, 18.0],
        )
        .unwrap();
        assert!(sol.value.eq_scalar(&36.0));
    }
}
