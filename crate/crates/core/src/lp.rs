//! Exact-rational linear programming: two-phase tableau simplex with Bland's rule.
//!
//! All variables are non-negative. Callers split free variables themselves.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug)]
pub struct Row {
    pub coeffs: Vec<BigRational>,
    pub relation: Relation,
    pub rhs: BigRational,
}

#[derive(Clone, Debug, Default)]
pub struct LinearProgram {
    num_vars: usize,
    objective: Vec<BigRational>,
    rows: Vec<Row>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal {
        value: BigRational,
        solution: Vec<BigRational>,
    },
    Infeasible,
    Unbounded,
}

impl LinearProgram {
    pub fn new(num_vars: usize) -> Self {
        LinearProgram {
            num_vars,
            objective: vec![BigRational::zero(); num_vars],
            rows: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    /// Sets the objective to maximise.
    pub fn set_objective(&mut self, c: Vec<BigRational>) {
        assert_eq!(c.len(), self.num_vars);
        self.objective = c;
    }

    pub fn add(&mut self, coeffs: Vec<BigRational>, relation: Relation, rhs: BigRational) {
        assert_eq!(coeffs.len(), self.num_vars);
        self.rows.push(Row {
            coeffs,
            relation,
            rhs,
        });
    }

    /// Sparse form of [`LinearProgram::add`].
    pub fn add_sparse(&mut self, terms: &[(usize, BigRational)], relation: Relation, rhs: BigRational) {
        let mut coeffs = vec![BigRational::zero(); self.num_vars];
        for (j, c) in terms {
            coeffs[*j] += c;
        }
        self.add(coeffs, relation, rhs);
    }

    pub fn maximize(&self) -> LpOutcome {
        Tableau::build(self).solve(&self.objective)
    }
}

struct Tableau {
    /// `rows × (cols + 1)`; the last column is the right-hand side.
    t: Vec<Vec<BigRational>>,
    basis: Vec<usize>,
    cols: usize,
    structural: usize,
    artificial_from: usize,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Self {
        let n = lp.num_vars;
        let mut rows: Vec<Row> = lp
            .rows
            .iter()
            .map(|r| {
                if r.rhs.is_negative() {
                    Row {
                        coeffs: r.coeffs.iter().map(|c| -c).collect(),
                        relation: match r.relation {
                            Relation::Le => Relation::Ge,
                            Relation::Ge => Relation::Le,
                            Relation::Eq => Relation::Eq,
                        },
                        rhs: -&r.rhs,
                    }
                } else {
                    r.clone()
                }
            })
            .collect();
        let slack_count = rows.iter().filter(|r| r.relation != Relation::Eq).count();
        let art_count = rows.iter().filter(|r| r.relation != Relation::Le).count();
        let artificial_from = n + slack_count;
        let cols = artificial_from + art_count;
        let mut t = Vec::with_capacity(rows.len());
        let mut basis = Vec::with_capacity(rows.len());
        let (mut slack, mut art) = (n, artificial_from);
        for r in rows.drain(..) {
            let mut line = r.coeffs;
            line.resize(cols + 1, BigRational::zero());
            match r.relation {
                Relation::Le => {
                    line[slack] = BigRational::one();
                    basis.push(slack);
                    slack += 1;
                }
                Relation::Ge => {
                    line[slack] = -BigRational::one();
                    slack += 1;
                    line[art] = BigRational::one();
                    basis.push(art);
                    art += 1;
                }
                Relation::Eq => {
                    line[art] = BigRational::one();
                    basis.push(art);
                    art += 1;
                }
            }
            line[cols] = r.rhs;
            t.push(line);
        }
        Tableau {
            t,
            basis,
            cols,
            structural: n,
            artificial_from,
        }
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.t[row][col].clone();
        for x in self.t[row].iter_mut() {
            *x /= &p;
        }
        let pivot_row = self.t[row].clone();
        for (i, line) in self.t.iter_mut().enumerate() {
            if i == row || line[col].is_zero() {
                continue;
            }
            let factor = line[col].clone();
            for (x, y) in line.iter_mut().zip(&pivot_row) {
                if !y.is_zero() {
                    *x -= &factor * y;
                }
            }
        }
        self.basis[row] = col;
    }

    /// Maximises `c · x` over the columns `< allowed`. Returns false if unbounded.
    fn optimise(&mut self, c: &[BigRational], allowed: usize) -> bool {
        loop {
            let mut entering = None;
            for j in 0..allowed {
                if self.basis.contains(&j) {
                    continue;
                }
                let mut d = c[j].clone();
                for (i, &b) in self.basis.iter().enumerate() {
                    if !self.t[i][j].is_zero() && !c[b].is_zero() {
                        d -= &c[b] * &self.t[i][j];
                    }
                }
                if d.is_positive() {
                    entering = Some(j);
                    break;
                }
            }
            let Some(j) = entering else { return true };
            let mut leaving: Option<(usize, BigRational)> = None;
            for i in 0..self.t.len() {
                if !self.t[i][j].is_positive() {
                    continue;
                }
                let ratio = &self.t[i][self.cols] / &self.t[i][j];
                let better = match &leaving {
                    None => true,
                    Some((l, r)) => ratio < *r || (ratio == *r && self.basis[i] < self.basis[*l]),
                };
                if better {
                    leaving = Some((i, ratio));
                }
            }
            let Some((i, _)) = leaving else { return false };
            self.pivot(i, j);
        }
    }

    fn solve(mut self, objective: &[BigRational]) -> LpOutcome {
        let mut phase_one = vec![BigRational::zero(); self.cols];
        for x in &mut phase_one[self.artificial_from..] {
            *x = -BigRational::one();
        }
        self.optimise(&phase_one, self.cols);
        let infeasibility: BigRational = self
            .basis
            .iter()
            .enumerate()
            .filter(|(_, &b)| b >= self.artificial_from)
            .map(|(i, _)| self.t[i][self.cols].clone())
            .sum();
        if infeasibility.is_positive() {
            return LpOutcome::Infeasible;
        }
        let mut i = 0;
        while i < self.t.len() {
            if self.basis[i] >= self.artificial_from {
                match (0..self.artificial_from).find(|&j| !self.t[i][j].is_zero()) {
                    Some(j) => {
                        self.pivot(i, j);
                        i += 1;
                    }
                    None => {
                        self.t.remove(i);
                        self.basis.remove(i);
                    }
                }
            } else {
                i += 1;
            }
        }
        let mut c = objective.to_vec();
        c.resize(self.cols, BigRational::zero());
        if !self.optimise(&c, self.artificial_from) {
            return LpOutcome::Unbounded;
        }
        let mut solution = vec![BigRational::zero(); self.structural];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.structural {
                solution[b] = self.t[i][self.cols].clone();
            }
        }
        let value = solution
            .iter()
            .zip(objective)
            .map(|(x, c)| x * c)
            .sum();
        LpOutcome::Optimal { value, solution }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::value::rational;
    use proptest::prelude::*;

    fn r(n: i64) -> BigRational {
        rational(n, 1)
    }

    #[test]
    fn textbook_maximum() {
        // max 3x + 5y s.t. x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18
        let mut lp = LinearProgram::new(2);
        lp.set_objective(vec![r(3), r(5)]);
        lp.add(vec![r(1), r(0)], Relation::Le, r(4));
        lp.add(vec![r(0), r(2)], Relation::Le, r(12));
        lp.add(vec![r(3), r(2)], Relation::Le, r(18));
        match lp.maximize() {
            LpOutcome::Optimal { value, solution } => {
                assert_eq!(value, r(36));
                assert_eq!(solution, vec![r(2), r(6)]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn equality_and_ge_rows() {
        // max x s.t. x + y = 1, y ≥ 1/3
        let mut lp = LinearProgram::new(2);
        lp.set_objective(vec![r(1), r(0)]);
        lp.add(vec![r(1), r(1)], Relation::Eq, r(1));
        lp.add(vec![r(0), r(1)], Relation::Ge, rational(1, 3));
        assert_eq!(
            lp.maximize(),
            LpOutcome::Optimal {
                value: rational(2, 3),
                solution: vec![rational(2, 3), rational(1, 3)]
            }
        );
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::new(1);
        lp.add(vec![r(1)], Relation::Ge, r(2));
        lp.add(vec![r(1)], Relation::Le, r(1));
        assert_eq!(lp.maximize(), LpOutcome::Infeasible);

        let mut lp = LinearProgram::new(2);
        lp.set_objective(vec![r(1), r(0)]);
        lp.add(vec![r(1), r(-1)], Relation::Le, r(1));
        assert_eq!(lp.maximize(), LpOutcome::Unbounded);
    }

    #[test]
    fn negative_rhs_and_redundant_rows() {
        let mut lp = LinearProgram::new(2);
        lp.set_objective(vec![r(-1), r(-1)]);
        lp.add(vec![r(-1), r(-1)], Relation::Le, r(-2));
        lp.add(vec![r(1), r(1)], Relation::Eq, r(2));
        lp.add(vec![r(2), r(2)], Relation::Eq, r(4));
        match lp.maximize() {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, r(-2)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn degenerate_cycle_candidate_terminates() {
        // A classic cycling example for the largest-coefficient rule.
        let mut lp = LinearProgram::new(4);
        lp.set_objective(vec![rational(3, 4), r(-150), rational(1, 50), r(-6)]);
        lp.add(vec![rational(1, 4), r(-60), rational(-1, 25), r(9)], Relation::Le, r(0));
        lp.add(vec![rational(1, 2), r(-90), rational(-1, 50), r(3)], Relation::Le, r(0));
        lp.add(vec![r(0), r(0), r(1), r(0)], Relation::Le, r(1));
        match lp.maximize() {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, rational(1, 20)),
            other => panic!("{other:?}"),
        }
    }

    proptest! {
        #[test]
        fn optimum_beats_every_grid_point(
            c in prop::collection::vec(-3i64..4, 2),
            rows in prop::collection::vec((prop::collection::vec(-3i64..4, 2), 0i64..6), 1..4),
        ) {
            let mut lp = LinearProgram::new(2);
            lp.set_objective(c.iter().map(|&x| r(x)).collect());
            for (a, b) in &rows {
                lp.add(a.iter().map(|&x| r(x)).collect(), Relation::Le, r(*b));
            }
            lp.add(vec![r(1), r(0)], Relation::Le, r(5));
            lp.add(vec![r(0), r(1)], Relation::Le, r(5));
            let LpOutcome::Optimal { value, solution } = lp.maximize() else {
                return Err(TestCaseError::fail("bounded feasible program"));
            };
            for (a, b) in &rows {
                let lhs = &solution[0] * r(a[0]) + &solution[1] * r(a[1]);
                prop_assert!(lhs <= r(*b));
            }
            for x in 0..=5 {
                for y in 0..=5 {
                    let feasible = rows.iter().all(|(a, b)| a[0] * x + a[1] * y <= *b);
                    if feasible {
                        prop_assert!(r(c[0] * x + c[1] * y) <= value);
                    }
                }
            }
        }
    }
}
