//! Dense two-phase primal simplex with Bland's anti-cycling rule.
//!
//! All variables are nonnegative. The solver is generic over [`Scalar`], so
//! with [`Rational`](crate::numeric::Rational) every pivot is exact; with
//! `f64` entries below [`Scalar::pivot_eps`] are treated as zero, and a
//! floating-point run that ends infeasible or stalled is repeated exactly on
//! the rational image of the program.

use crate::numeric::{Rational, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone)]
struct Constraint<N> {
    coeffs: Vec<N>,
    relation: Relation,
    rhs: N,
}

/// `optimize c·x` subject to linear constraints and `x ≥ 0`.
#[derive(Debug, Clone)]
pub struct LinearProgram<N> {
    sense: Sense,
    objective: Vec<N>,
    constraints: Vec<Constraint<N>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome<N> {
    Optimal { value: N, x: Vec<N> },
    Infeasible,
    Unbounded,
    /// Pivot limit hit; only possible through floating-point trouble.
    Stalled,
}

impl<N> LpOutcome<N> {
    pub fn optimal(self) -> Option<(N, Vec<N>)> {
        match self {
            LpOutcome::Optimal { value, x } => Some((value, x)),
            _ => None,
        }
    }
}

const MAX_PIVOTS: usize = 100_000;

impl<N: Scalar> LinearProgram<N> {
    pub fn new(sense: Sense, objective: Vec<N>) -> Self {
        Self {
            sense,
            objective,
            constraints: Vec::new(),
        }
    }

    pub fn maximize(objective: Vec<N>) -> Self {
        Self::new(Sense::Maximize, objective)
    }

    pub fn minimize(objective: Vec<N>) -> Self {
        Self::new(Sense::Minimize, objective)
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    /// Adds `coeffs · x (relation) rhs`; `coeffs` may be shorter than the
    /// number of variables (missing entries are zero).
    pub fn constrain(&mut self, mut coeffs: Vec<N>, relation: Relation, rhs: N) -> &mut Self {
        assert!(coeffs.len() <= self.num_vars(), "constraint has too many coefficients");
        coeffs.resize(self.num_vars(), N::zero());
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
        self
    }

    pub fn solve(&self) -> LpOutcome<N> {
        let out = self.solve_tableau();
        if N::EXACT || !matches!(out, LpOutcome::Infeasible | LpOutcome::Stalled) {
            return out;
        }
        match self.to_exact().solve_tableau() {
            LpOutcome::Optimal { value, x } => LpOutcome::Optimal {
                value: N::from_rational(&value),
                x: x.iter().map(N::from_rational).collect(),
            },
            LpOutcome::Infeasible => LpOutcome::Infeasible,
            LpOutcome::Unbounded => LpOutcome::Unbounded,
            LpOutcome::Stalled => LpOutcome::Stalled,
        }
    }

    fn to_exact(&self) -> LinearProgram<Rational> {
        let conv = |v: &[N]| v.iter().map(Scalar::to_rational).collect();
        LinearProgram {
            sense: self.sense,
            objective: conv(&self.objective),
            constraints: self
                .constraints
                .iter()
                .map(|c| Constraint {
                    coeffs: conv(&c.coeffs),
                    relation: c.relation,
                    rhs: c.rhs.to_rational(),
                })
                .collect(),
        }
    }

    fn solve_tableau(&self) -> LpOutcome<N> {
        let n = self.num_vars();
        let eps = N::pivot_eps();
        let feas_eps = eps.clone() * N::from_ratio(100, 1);

        // Normalise to nonnegative right-hand sides.
        let rows: Vec<Constraint<N>> = self
            .constraints
            .iter()
            .map(|c| {
                if c.rhs < N::zero() {
                    Constraint {
                        coeffs: c.coeffs.iter().map(|a| -a.clone()).collect(),
                        relation: match c.relation {
                            Relation::Le => Relation::Ge,
                            Relation::Ge => Relation::Le,
                            Relation::Eq => Relation::Eq,
                        },
                        rhs: -c.rhs.clone(),
                    }
                } else {
                    c.clone()
                }
            })
            .collect();

        let m = rows.len();
        let num_slack = rows.iter().filter(|c| c.relation != Relation::Eq).count();
        let num_art = rows.iter().filter(|c| c.relation != Relation::Le).count();
        let art_start = n + num_slack;
        let width = art_start + num_art;

        let mut t = Tableau {
            rows: Vec::with_capacity(m),
            obj: vec![N::zero(); width + 1],
            basis: Vec::with_capacity(m),
            width,
        };
        let (mut next_slack, mut next_art) = (n, art_start);
        for c in &rows {
            let mut row = vec![N::zero(); width + 1];
            row[..n].clone_from_slice(&c.coeffs);
            row[width] = c.rhs.clone();
            match c.relation {
                Relation::Le => {
                    row[next_slack] = N::one();
                    t.basis.push(next_slack);
                    next_slack += 1;
                }
                Relation::Ge => {
                    row[next_slack] = -N::one();
                    next_slack += 1;
                    row[next_art] = N::one();
                    t.basis.push(next_art);
                    next_art += 1;
                }
                Relation::Eq => {
                    row[next_art] = N::one();
                    t.basis.push(next_art);
                    next_art += 1;
                }
            }
            t.rows.push(row);
        }

        // Phase 1: maximise -Σ artificials.
        if num_art > 0 {
            let mut cost = vec![N::zero(); width];
            for c in cost.iter_mut().skip(art_start) {
                *c = -N::one();
            }
            t.set_objective(&cost);
            match t.run(width, &eps) {
                RunResult::Optimal => {}
                RunResult::Unbounded => return LpOutcome::Infeasible,
                RunResult::Stalled => return LpOutcome::Stalled,
            }
            if t.artificial_level(art_start) > feas_eps {
                return LpOutcome::Infeasible;
            }
            t.expel_artificials(art_start, &eps);
        }

        // Phase 2.
        let mut cost: Vec<N> = match self.sense {
            Sense::Maximize => self.objective.clone(),
            Sense::Minimize => self.objective.iter().map(|c| -c.clone()).collect(),
        };
        cost.resize(width, N::zero());
        t.set_objective(&cost);
        match t.run(art_start, &eps) {
            RunResult::Optimal => {}
            RunResult::Unbounded => return LpOutcome::Unbounded,
            RunResult::Stalled => return LpOutcome::Stalled,
        }

        let mut x = vec![N::zero(); n];
        for (i, &b) in t.basis.iter().enumerate() {
            if b < n {
                let v = t.rows[i][width].clone();
                x[b] = if !N::EXACT && v < N::zero() { N::zero() } else { v };
            }
        }
        let value = x
            .iter()
            .zip(&self.objective)
            .fold(N::zero(), |acc, (xi, ci)| acc + xi.clone() * ci.clone());
        LpOutcome::Optimal { value, x }
    }
}

enum RunResult {
    Optimal,
    Unbounded,
    Stalled,
}

struct Tableau<N> {
    rows: Vec<Vec<N>>,
    /// Reduced costs (entering when positive); last entry is minus the
    /// objective value of the current basis.
    obj: Vec<N>,
    basis: Vec<usize>,
    width: usize,
}

impl<N: Scalar> Tableau<N> {
    fn set_objective(&mut self, cost: &[N]) {
        let w = self.width;
        let mut obj: Vec<N> = cost.to_vec();
        obj.push(N::zero());
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = cost[b].clone();
            if cb.is_zero() {
                continue;
            }
            for j in 0..=w {
                obj[j] = obj[j].clone() - cb.clone() * self.rows[i][j].clone();
            }
        }
        self.obj = obj;
    }

    /// Simplex iterations with entering columns restricted to `< limit`.
    fn run(&mut self, limit: usize, eps: &N) -> RunResult {
        for _ in 0..MAX_PIVOTS {
            // Bland: lowest-index improving column.
            let Some(enter) = (0..limit).find(|&j| self.obj[j] > *eps) else {
                return RunResult::Optimal;
            };
            let leave = if N::EXACT {
                self.bland_ratio(enter, eps)
            } else {
                self.harris_ratio(enter, eps)
            };
            let Some(row) = leave else {
                return RunResult::Unbounded;
            };
            self.pivot(row, enter);
        }
        RunResult::Stalled
    }

    /// Minimum ratio; ties to the lowest basic variable index.
    fn bland_ratio(&self, enter: usize, eps: &N) -> Option<usize> {
        let w = self.width;
        let mut leave: Option<(usize, N)> = None;
        for i in 0..self.rows.len() {
            let a = &self.rows[i][enter];
            if *a <= *eps {
                continue;
            }
            let ratio = self.rows[i][w].clone() / a.clone();
            leave = match leave {
                Some((li, lr)) if !(ratio < lr || (ratio == lr && self.basis[i] < self.basis[li])) => Some((li, lr)),
                _ => Some((i, ratio)),
            };
        }
        leave.map(|(i, _)| i)
    }

    /// Two-pass ratio test: among rows whose ratio is within a small
    /// relaxation of the minimum, pivot on the largest entry.
    fn harris_ratio(&self, enter: usize, eps: &N) -> Option<usize> {
        let w = self.width;
        let slack = N::from_ratio(1, 1_000_000_000);
        let candidates: Vec<usize> = (0..self.rows.len()).filter(|&i| self.rows[i][enter] > *eps).collect();
        let bound = candidates
            .iter()
            .map(|&i| (self.rows[i][w].clone() + slack.clone()) / self.rows[i][enter].clone())
            .reduce(Scalar::min_of)?;
        candidates
            .into_iter()
            .filter(|&i| self.rows[i][w].clone() / self.rows[i][enter].clone() <= bound)
            .reduce(|best, i| if self.rows[i][enter] > self.rows[best][enter] { i } else { best })
    }

    /// Total value of artificial variables still in the basis.
    fn artificial_level(&self, art_start: usize) -> N {
        let w = self.width;
        self.basis
            .iter()
            .enumerate()
            .filter(|(_, &b)| b >= art_start)
            .fold(N::zero(), |acc, (i, _)| acc + self.rows[i][w].abs())
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let w = self.width;
        let p = self.rows[row][col].clone();
        for j in 0..=w {
            self.rows[row][j] = self.rows[row][j].clone() / p.clone();
        }
        self.rows[row][col] = N::one();
        let pivot_row = self.rows[row].clone();
        for (i, r) in self.rows.iter_mut().enumerate() {
            if i == row {
                continue;
            }
            let f = r[col].clone();
            if f.is_zero() {
                continue;
            }
            for j in 0..=w {
                if !pivot_row[j].is_zero() {
                    r[j] = r[j].clone() - f.clone() * pivot_row[j].clone();
                }
            }
            r[col] = N::zero();
        }
        let f = self.obj[col].clone();
        if !f.is_zero() {
            for j in 0..=w {
                if !pivot_row[j].is_zero() {
                    self.obj[j] = self.obj[j].clone() - f.clone() * pivot_row[j].clone();
                }
            }
            self.obj[col] = N::zero();
        }
        self.basis[row] = col;
    }

    /// Pivots zero-level artificials out of the basis, dropping redundant rows.
    fn expel_artificials(&mut self, art_start: usize, eps: &N) {
        let mut i = 0;
        while i < self.rows.len() {
            if self.basis[i] < art_start {
                i += 1;
                continue;
            }
            match (0..art_start).find(|&j| self.rows[i][j].abs() > *eps) {
                Some(j) => {
                    self.pivot(i, j);
                    i += 1;
                }
                None => {
                    self.rows.remove(i);
                    self.basis.remove(i);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    fn qs(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| q(x, 1)).collect()
    }

    #[test]
    fn textbook_maximisation() {
        // max 3x + 5y  s.t. x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18  → (2, 6), 36
        let mut lp = LinearProgram::maximize(qs(&[3, 5]));
        lp.constrain(qs(&[1, 0]), Relation::Le, q(4, 1))
            .constrain(qs(&[0, 2]), Relation::Le, q(12, 1))
            .constrain(qs(&[3, 2]), Relation::Le, q(18, 1));
        let (value, x) = lp.solve().optimal().unwrap();
        assert_eq!(value, q(36, 1));
        assert_eq!(x, vec![q(2, 1), q(6, 1)]);
    }

    #[test]
    fn minimisation_with_ge_and_eq() {
        // min x + y  s.t. x + 2y ≥ 4, x - y = 1 → x = 2, y = 1
        let mut lp = LinearProgram::minimize(qs(&[1, 1]));
        lp.constrain(qs(&[1, 2]), Relation::Ge, q(4, 1))
            .constrain(qs(&[1, -1]), Relation::Eq, q(1, 1));
        let (value, x) = lp.solve().optimal().unwrap();
        assert_eq!(value, q(3, 1));
        assert_eq!(x, vec![q(2, 1), q(1, 1)]);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::maximize(qs(&[1]));
        lp.constrain(qs(&[1]), Relation::Le, q(1, 1))
            .constrain(qs(&[1]), Relation::Ge, q(2, 1));
        assert_eq!(lp.solve(), LpOutcome::Infeasible);

        let mut lp = LinearProgram::maximize(qs(&[1, 0]));
        lp.constrain(qs(&[0, 1]), Relation::Le, q(1, 1));
        assert_eq!(lp.solve(), LpOutcome::Unbounded);
    }

    #[test]
    fn negative_rhs_is_normalised() {
        // max x s.t. -x ≥ -3
        let mut lp = LinearProgram::maximize(vec![1.0]);
        lp.constrain(vec![-1.0], Relation::Ge, -3.0);
        let (value, _) = lp.solve().optimal().unwrap();
        assert!((value - 3.0).abs() < 1e-12);
    }

    #[test]
    fn redundant_equalities() {
        // x + y = 1 twice; max x.
        let mut lp = LinearProgram::maximize(qs(&[1, 0]));
        lp.constrain(qs(&[1, 1]), Relation::Eq, q(1, 1))
            .constrain(qs(&[1, 1]), Relation::Eq, q(1, 1));
        let (value, _) = lp.solve().optimal().unwrap();
        assert_eq!(value, q(1, 1));
    }

    #[test]
    fn beale_cycling_example_terminates() {
        // Classic degenerate LP that cycles under the largest-coefficient rule.
        // max 3/4 x4 - 20 x5 + 1/2 x6 - 6 x7
        let mut lp = LinearProgram::maximize(vec![q(3, 4), q(-20, 1), q(1, 2), q(-6, 1)]);
        lp.constrain(vec![q(1, 4), q(-8, 1), q(-1, 1), q(9, 1)], Relation::Le, q(0, 1))
            .constrain(vec![q(1, 2), q(-12, 1), q(-1, 2), q(3, 1)], Relation::Le, q(0, 1))
            .constrain(vec![q(0, 1), q(0, 1), q(1, 1), q(0, 1)], Relation::Le, q(1, 1));
        let (value, _) = lp.solve().optimal().unwrap();
        assert_eq!(value, q(5, 4));
    }

    #[test]
    fn narrow_band_is_feasible_in_float() {
        let v = 0.33333333333333337f64;
        let tau = 1e-9;
        let mut lp = LinearProgram::maximize(vec![0.0, 1.0]);
        lp.constrain(vec![1.0, -1.0], Relation::Ge, 0.0)
            .constrain(vec![1.0], Relation::Eq, 1.0)
            .constrain(vec![v], Relation::Ge, v - tau)
            .constrain(vec![v], Relation::Le, v + tau)
            .constrain(vec![0.4166666666666667, -1.0], Relation::Ge, v + tau)
            .constrain(vec![1.0, -1.0], Relation::Ge, v + tau);
        let (value, x) = lp.solve().optimal().unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12);
        assert!((value - (0.4166666666666667 - v - tau)).abs() < 1e-12);
    }

    #[test]
    fn tiny_payoffs_solve_in_float() {
        let m = [
            vec![7.212217072644773e-10, 2.0606334432188532e-10, 6.18190032965656e-10],
            vec![0.0, 1.1676922873411884e-9, 0.7500000004808145],
        ];
        let (value, mix) = crate::matrix::solve_matrix_game(&m).unwrap();
        let exact: Vec<Vec<Rational>> = m.iter().map(|r| r.iter().map(|x| x.to_rational()).collect()).collect();
        let (want, _) = crate::matrix::solve_matrix_game(&exact).unwrap();
        assert!((value - want.to_f64()).abs() < 1e-15);
        assert!((mix.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
