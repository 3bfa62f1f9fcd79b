//! Exact-rational simplex for the memory-sharing LP family.
//!
//! The instances solved here always have the same shape: columns with
//! non-negative costs, one convexity row (weights sum to 1) and two budget
//! rows (`<=`). That is small enough that a dense tableau with Bland's rule
//! over exact rationals is both simple and degeneracy-proof. Not a
//! general-purpose LP interface.
//!
//! Tie-breaking: with `lex` enabled the solver returns, among all optimal
//! vertices, the one whose weight vector is lexicographically smallest in
//! column order. This is done by pricing against a stack of objective rows
//! (the real cost first, then one unit row per column) and entering only on
//! lexicographically negative reduced-cost vectors.

use crate::rat::Rat;

/// One column of the LP: its objective cost and its coefficients in the two
/// budget rows.
#[derive(Debug, Clone)]
pub struct LpColumn {
    pub cost: Rat,
    pub budget: [Rat; 2],
}

/// minimize sum cost_j * w_j
/// s.t.     sum w_j = 1
///          sum budget_r[j] * w_j <= budgets[r],  r = 0, 1
///          w >= 0
#[derive(Debug, Clone)]
pub struct LpProblem {
    pub columns: Vec<LpColumn>,
    pub budgets: [Rat; 2],
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub value: Rat,
    pub weights: Vec<Rat>,
}

#[derive(Debug, Clone)]
pub enum LpOutcome {
    Optimal(LpSolution),
    Infeasible,
}

struct Tableau {
    /// 3 constraint rows, each `ncols + 1` wide with the RHS last.
    rows: Vec<Vec<Rat>>,
    basis: [usize; 3],
    ncols: usize,
    struct_cols: usize,
    banned: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> &Rat {
        &self.rows[i][self.ncols]
    }

    #[allow(clippy::needless_range_loop)]
    fn pivot(&mut self, row: usize, col: usize, objectives: &mut [Vec<Rat>]) {
        let piv = self.rows[row][col].clone();
        for v in self.rows[row].iter_mut() {
            if !v.is_zero() {
                *v /= &piv;
            }
        }
        for i in 0..self.rows.len() {
            if i == row {
                continue;
            }
            let factor = self.rows[i][col].clone();
            if factor.is_zero() {
                continue;
            }
            for c in 0..=self.ncols {
                if self.rows[row][c].is_zero() {
                    continue;
                }
                let delta = &factor * &self.rows[row][c];
                self.rows[i][c] -= &delta;
            }
        }
        for obj in objectives.iter_mut() {
            let factor = obj[col].clone();
            if factor.is_zero() {
                continue;
            }
            for c in 0..=self.ncols {
                if self.rows[row][c].is_zero() {
                    continue;
                }
                let delta = &factor * &self.rows[row][c];
                obj[c] -= &delta;
            }
        }
        self.basis[row] = col;
    }

    /// Bland's rule on a stack of objective rows: the entering column is the
    /// lowest-index non-banned column whose reduced-cost vector is
    /// lexicographically negative.
    fn entering(&self, objectives: &[Vec<Rat>]) -> Option<usize> {
        'col: for j in 0..self.ncols {
            if j >= self.banned {
                continue;
            }
            if self.basis.contains(&j) {
                continue;
            }
            for obj in objectives {
                if obj[j].is_negative() {
                    return Some(j);
                }
                if obj[j].is_positive() {
                    continue 'col;
                }
            }
        }
        None
    }

    /// Minimum-ratio row for column `col`; ties resolved toward the smallest
    /// basic variable index (Bland).
    fn leaving(&self, col: usize) -> Option<usize> {
        let mut best: Option<(Rat, usize)> = None;
        for i in 0..self.rows.len() {
            if self.rows[i][col].is_positive() {
                let ratio = self.rhs(i) / &self.rows[i][col];
                match &best {
                    None => best = Some((ratio, i)),
                    Some((r, bi)) => {
                        if ratio < *r || (ratio == *r && self.basis[i] < self.basis[*bi]) {
                            best = Some((ratio, i));
                        }
                    }
                }
            }
        }
        best.map(|(_, i)| i)
    }

    fn run(&mut self, objectives: &mut [Vec<Rat>]) {
        while let Some(col) = self.entering(objectives) {
            let row = self
                .leaving(col)
                .expect("bounded feasible region: weights sum to 1");
            self.pivot(row, col, objectives);
        }
    }

    /// Reduced-cost row for raw costs `c` (length `ncols`) against the
    /// current basis.
    #[allow(clippy::needless_range_loop)]
    fn reduced_row(&self, c: &[Rat]) -> Vec<Rat> {
        let mut row: Vec<Rat> = c.to_vec();
        row.push(Rat::zero());
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = c[b].clone();
            if cb.is_zero() {
                continue;
            }
            for j in 0..=self.ncols {
                if self.rows[i][j].is_zero() {
                    continue;
                }
                let delta = &cb * &self.rows[i][j];
                row[j] -= &delta;
            }
        }
        row
    }
}

/// Solves the problem. `lex` selects the lexicographic tie-break among
/// optimal vertices (slower; use `false` for value-only grid work).
pub fn solve(problem: &LpProblem, lex: bool) -> LpOutcome {
    solve_with(&problem.columns, &problem.budgets, lex)
}

/// Column/budget form of [`solve`], avoiding a problem clone when one column
/// set is swept over many budget pairs.
pub fn solve_with(columns: &[LpColumn], budgets: &[Rat; 2], lex: bool) -> LpOutcome {
    let n = columns.len();
    // columns: structural | slack_r | slack_t | artificial
    let ncols = n + 3;
    let art = n + 2;
    let mut rows = vec![vec![Rat::zero(); ncols + 1]; 3];
    for (j, col) in columns.iter().enumerate() {
        rows[0][j] = Rat::one();
        rows[1][j] = col.budget[0].clone();
        rows[2][j] = col.budget[1].clone();
    }
    rows[0][art] = Rat::one();
    rows[1][n] = Rat::one();
    rows[2][n + 1] = Rat::one();
    rows[0][ncols] = Rat::one();
    rows[1][ncols] = budgets[0].clone();
    rows[2][ncols] = budgets[1].clone();
    debug_assert!(!budgets[0].is_negative() && !budgets[1].is_negative());

    let mut t = Tableau { rows, basis: [art, n, n + 1], ncols, struct_cols: n, banned: ncols };

    // phase 1: drive the artificial variable of the convexity row to zero
    let mut phase1_cost = vec![Rat::zero(); ncols];
    phase1_cost[art] = Rat::one();
    let mut objectives = vec![t.reduced_row(&phase1_cost)];
    t.run(&mut objectives);
    let art_value = objectives[0][ncols].clone();
    // objective row carries -value in the RHS slot after reductions
    if !art_value.is_zero() {
        return LpOutcome::Infeasible;
    }
    if let Some(row) = t.basis.iter().position(|&b| b == art) {
        // degenerate: artificial basic at level zero; pivot any structural
        // or slack column in
        let col = (0..n + 2)
            .find(|&j| !t.rows[row][j].is_zero() && !t.basis.contains(&j))
            .expect("convexity row always has a replacement column");
        let mut none: [Vec<Rat>; 0] = [];
        t.pivot(row, col, &mut none);
    }
    t.banned = art; // the artificial column may never re-enter

    // phase 2
    let mut cost = vec![Rat::zero(); ncols];
    for (j, col) in columns.iter().enumerate() {
        cost[j] = col.cost.clone();
    }
    let mut objectives = vec![t.reduced_row(&cost)];
    if lex {
        for j in 0..n {
            let mut unit = vec![Rat::zero(); ncols];
            unit[j] = Rat::one();
            objectives.push(t.reduced_row(&unit));
        }
    }
    t.run(&mut objectives);

    let mut weights = vec![Rat::zero(); n];
    for (i, &b) in t.basis.iter().enumerate() {
        if b < t.struct_cols {
            weights[b] = t.rhs(i).clone();
        }
    }
    let value = columns
        .iter()
        .zip(&weights)
        .map(|(c, w)| &c.cost * w)
        .sum();
    LpOutcome::Optimal(LpSolution { value, weights })
}
