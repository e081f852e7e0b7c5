//! LP relaxations of the allocation problem and an exact simplex solver.
//!
//! Three relaxations share one builder: assignment rows (one per query)
//! are always present, capacity rows (one per customer) and budget rows
//! (one per advertiser) are switched on by [`Variant`]. The right-hand side
//! of an assignment row is either the arrival probability or the realized
//! arrival indicator.

use std::fmt::{self, Write as _};

use num_traits::{One, Signed, Zero};

use crate::model::{validate_instance, FractionalAssignment, Instance, ModelError, Scenario};
use crate::rational::{format_rational, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Assignment and budget rows.
    B,
    /// Assignment and capacity rows.
    C,
    /// All three families.
    BC,
}

impl Variant {
    pub fn has_budget(self) -> bool {
        matches!(self, Variant::B | Variant::BC)
    }

    pub fn has_capacity(self) -> bool {
        matches!(self, Variant::C | Variant::BC)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpMode<'a> {
    /// Right-hand side `p_j` for each query.
    Expectation,
    /// Right-hand side is the 0/1 arrival flag in the scenario.
    Realized(&'a Scenario),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RowTag {
    /// `sum_i x_ij <= rhs_j` for query j.
    Assign(usize),
    /// `sum_{j of k} sum_i x_ij <= c_k` for customer k.
    Capacity(usize),
    /// `sum_j u_ij x_ij <= b_i` for advertiser i.
    Budget(usize),
    /// Anything added by hand.
    Other(usize),
}

impl fmt::Display for RowTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RowTag::Assign(j) => write!(f, "F{j}"),
            RowTag::Capacity(k) => write!(f, "C{k}"),
            RowTag::Budget(i) => write!(f, "B{i}"),
            RowTag::Other(n) => write!(f, "R{n}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    /// Sparse (column, coefficient) pairs with nonzero coefficients.
    pub coeffs: Vec<(usize, Rational)>,
    pub relation: Relation,
    pub rhs: Rational,
    pub tag: RowTag,
}

impl Constraint {
    pub fn activity(&self, values: &[Rational]) -> Rational {
        self.coeffs.iter().map(|(c, a)| a * &values[*c]).sum()
    }

    pub fn holds(&self, values: &[Rational]) -> bool {
        let lhs = self.activity(values);
        match self.relation {
            Relation::Le => lhs <= self.rhs,
            Relation::Eq => lhs == self.rhs,
            Relation::Ge => lhs >= self.rhs,
        }
    }
}

/// Maximize `objective · x` subject to `constraints` and `0 <= x <= 1`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LinearProgram {
    pub objective: Vec<Rational>,
    pub constraints: Vec<Constraint>,
    /// Column to (advertiser, query); empty for programs built by hand.
    pub columns: Vec<(usize, usize)>,
}

impl LinearProgram {
    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn column_of(&self, advertiser: usize, query: usize) -> Option<usize> {
        self.columns
            .binary_search_by(|&(i, j)| (j, i).cmp(&(query, advertiser)))
            .ok()
    }

    pub fn row(&self, tag: RowTag) -> Option<&Constraint> {
        self.constraints.iter().find(|c| c.tag == tag)
    }

    /// First violated constraint or bound, if any.
    pub fn first_violation(&self, values: &[Rational]) -> Option<String> {
        if values.len() != self.num_vars() {
            return Some(format!(
                "{} values for {} variables",
                values.len(),
                self.num_vars()
            ));
        }
        for (c, v) in values.iter().enumerate() {
            if v.is_negative() || *v > Rational::one() {
                return Some(format!("bound on column {c}: {}", format_rational(v)));
            }
        }
        self.constraints
            .iter()
            .find(|row| !row.holds(values))
            .map(|row| format!("row {}", row.tag))
    }

    pub fn evaluate(&self, values: &[Rational]) -> Rational {
        self.objective.iter().zip(values).map(|(c, v)| c * v).sum()
    }

    fn column_name(&self, c: usize) -> String {
        match self.columns.get(c) {
            Some((i, j)) => format!("x_{i}_{j}"),
            None => format!("x{c}"),
        }
    }

    fn write_linear(&self, out: &mut String, coeffs: impl Iterator<Item = (usize, Rational)>) {
        let mut first = true;
        for (c, a) in coeffs {
            if a.is_zero() {
                continue;
            }
            let sign = if a.is_negative() { "-" } else { "+" };
            let mag = a.abs();
            if !first || a.is_negative() {
                let _ = write!(out, " {sign} ");
            } else {
                out.push(' ');
            }
            if !mag.is_one() {
                let _ = write!(out, "{} ", format_rational(&mag));
            }
            out.push_str(&self.column_name(c));
            first = false;
        }
        if first {
            out.push_str(" 0");
        }
    }

    /// Human readable dump in an LP-file-like layout with exact rationals.
    pub fn to_text(&self) -> String {
        let mut out = String::from("maximize\n  obj:");
        self.write_linear(&mut out, self.objective.iter().cloned().enumerate());
        out.push_str("\nsubject to\n");
        for row in &self.constraints {
            let _ = write!(out, "  {}:", row.tag);
            self.write_linear(&mut out, row.coeffs.iter().cloned());
            let _ = writeln!(out, " {} {}", row.relation, format_rational(&row.rhs));
        }
        out.push_str("bounds\n");
        for c in 0..self.num_vars() {
            let _ = writeln!(out, "  0 <= {} <= 1", self.column_name(c));
        }
        out.push_str("end\n");
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Column values; all zero unless optimal.
    pub values: Vec<Rational>,
    pub objective_value: Rational,
}

impl LpSolution {
    /// Column values mapped back onto (advertiser, query) pairs.
    pub fn assignment(&self, lp: &LinearProgram) -> FractionalAssignment {
        let mut y = FractionalAssignment::new();
        for (&(i, j), v) in lp.columns.iter().zip(&self.values) {
            y.set(i, j, v.clone());
        }
        y
    }
}

#[derive(Debug, thiserror::Error)]
pub enum LpError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("internal solver failure: {0}")]
    Internal(String),
}

pub fn build_lp(
    inst: &Instance,
    variant: Variant,
    mode: LpMode<'_>,
) -> Result<LinearProgram, LpError> {
    let report = validate_instance(inst);
    if !report.is_empty() {
        return Err(ModelError::Invalid(report).into());
    }
    if let LpMode::Realized(s) = mode {
        s.check(inst)?;
    }
    let columns: Vec<(usize, usize)> = inst.edges().map(|(i, j, _)| (i, j)).collect();
    let objective: Vec<Rational> = inst.edges().map(|(_, _, b)| b.clone()).collect();

    let mut by_query: Vec<Vec<usize>> = vec![Vec::new(); inst.num_queries()];
    let mut by_adv: Vec<Vec<usize>> = vec![Vec::new(); inst.num_advertisers()];
    for (c, &(i, j)) in columns.iter().enumerate() {
        by_query[j].push(c);
        by_adv[i].push(c);
    }

    let ones = |cols: &[usize]| {
        cols.iter()
            .map(|&c| (c, Rational::one()))
            .collect::<Vec<_>>()
    };
    let mut constraints = Vec::new();
    for (j, cols) in by_query.iter().enumerate() {
        if cols.is_empty() {
            continue;
        }
        let rhs = match mode {
            LpMode::Expectation => inst.queries[j].prob.clone(),
            LpMode::Realized(s) => s.indicator(j),
        };
        constraints.push(Constraint {
            coeffs: ones(cols),
            relation: Relation::Le,
            rhs,
            tag: RowTag::Assign(j),
        });
    }
    if variant.has_capacity() {
        for (k, queries) in inst.customer_queries().iter().enumerate() {
            let cols: Vec<usize> = queries
                .iter()
                .flat_map(|&j| by_query[j].iter().copied())
                .collect();
            if cols.is_empty() {
                continue;
            }
            let mut sorted = cols;
            sorted.sort_unstable();
            constraints.push(Constraint {
                coeffs: ones(&sorted),
                relation: Relation::Le,
                rhs: Rational::from_integer(inst.customers[k].capacity.into()),
                tag: RowTag::Capacity(k),
            });
        }
    }
    if variant.has_budget() {
        for (i, cols) in by_adv.iter().enumerate() {
            if cols.is_empty() {
                continue;
            }
            constraints.push(Constraint {
                coeffs: cols.iter().map(|&c| (c, objective[c].clone())).collect(),
                relation: Relation::Le,
                rhs: inst.advertisers[i].budget.clone(),
                tag: RowTag::Budget(i),
            });
        }
    }
    Ok(LinearProgram {
        objective,
        constraints,
        columns,
    })
}

type RawRow = (Vec<(usize, Rational)>, Relation, Rational);

/// Solves the program exactly. Upper bounds become explicit `x <= 1` rows.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    let n = lp.num_vars();
    let mut rows: Vec<RawRow> = lp
        .constraints
        .iter()
        .map(|c| (c.coeffs.clone(), c.relation, c.rhs.clone()))
        .collect();
    for c in 0..n {
        rows.push((vec![(c, Rational::one())], Relation::Le, Rational::one()));
    }
    for (coeffs, _, _) in &rows {
        if let Some((c, _)) = coeffs.iter().find(|(c, _)| *c >= n) {
            return Err(LpError::Internal(format!(
                "row references column {c} of {n}"
            )));
        }
    }
    let mut tableau = Tableau::new(n, rows);
    match tableau.solve(&lp.objective)? {
        LpStatus::Optimal => {
            let values = tableau.primal(n);
            let objective_value = lp.evaluate(&values);
            if let Some(v) = lp.first_violation(&values) {
                return Err(LpError::Internal(format!("optimal point violates {v}")));
            }
            Ok(LpSolution {
                status: LpStatus::Optimal,
                values,
                objective_value,
            })
        }
        LpStatus::Infeasible => Ok(LpSolution {
            status: LpStatus::Infeasible,
            values: vec![Rational::zero(); n],
            objective_value: Rational::zero(),
        }),
        LpStatus::Unbounded => Err(LpError::Internal(
            "simplex reported an unbounded direction on a box-bounded program".into(),
        )),
    }
}

pub fn lp_round_trip(
    inst: &Instance,
    variant: Variant,
    mode: LpMode<'_>,
) -> Result<LpSolution, LpError> {
    solve_lp(&build_lp(inst, variant, mode)?)
}

/// Dense two-phase tableau. Columns are laid out as structural variables,
/// then one slack or surplus per inequality row, then artificials.
struct Tableau {
    rows: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    basis: Vec<usize>,
    width: usize,
    first_artificial: usize,
}

impl Tableau {
    fn new(n: usize, rows: Vec<RawRow>) -> Self {
        let slack_count = rows.iter().filter(|r| r.1 != Relation::Eq).count();
        // Normalize to rhs >= 0 first so we know which rows need artificials.
        let rows: Vec<_> = rows
            .into_iter()
            .map(|(coeffs, rel, rhs)| {
                if rhs.is_negative() {
                    let flipped = match rel {
                        Relation::Le => Relation::Ge,
                        Relation::Ge => Relation::Le,
                        Relation::Eq => Relation::Eq,
                    };
                    (
                        coeffs.into_iter().map(|(c, a)| (c, -a)).collect(),
                        flipped,
                        -rhs,
                        true,
                    )
                } else {
                    (coeffs, rel, rhs, false)
                }
            })
            .collect();
        let art_count = rows.iter().filter(|r| r.1 != Relation::Le).count();
        let first_artificial = n + slack_count;
        let width = first_artificial + art_count;
        let mut dense = Vec::with_capacity(rows.len());
        let mut rhs_vec = Vec::with_capacity(rows.len());
        let mut basis = Vec::with_capacity(rows.len());
        let mut slack = n;
        let mut art = first_artificial;
        for (coeffs, rel, rhs, _) in rows {
            let mut row = vec![Rational::zero(); width];
            for (c, a) in coeffs {
                row[c] += a;
            }
            match rel {
                Relation::Le => {
                    row[slack] = Rational::one();
                    basis.push(slack);
                    slack += 1;
                }
                Relation::Ge => {
                    row[slack] = -Rational::one();
                    slack += 1;
                    row[art] = Rational::one();
                    basis.push(art);
                    art += 1;
                }
                Relation::Eq => {
                    row[art] = Rational::one();
                    basis.push(art);
                    art += 1;
                }
            }
            dense.push(row);
            rhs_vec.push(rhs);
        }
        Tableau {
            rows: dense,
            rhs: rhs_vec,
            basis,
            width,
            first_artificial,
        }
    }

    fn solve(&mut self, objective: &[Rational]) -> Result<LpStatus, LpError> {
        if self.first_artificial < self.width {
            let mut phase1 = vec![Rational::zero(); self.width];
            for v in &mut phase1[self.first_artificial..] {
                *v = -Rational::one();
            }
            let (status, value) = self.optimize(phase1, self.width)?;
            if status != LpStatus::Optimal {
                return Err(LpError::Internal(
                    "phase one did not reach an optimum".into(),
                ));
            }
            if value.is_negative() {
                return Ok(LpStatus::Infeasible);
            }
            self.evict_artificials();
        }
        let mut cost = vec![Rational::zero(); self.width];
        cost[..objective.len()].clone_from_slice(objective);
        let (status, _) = self.optimize(cost, self.first_artificial)?;
        Ok(status)
    }

    /// Pivots artificial variables (all at zero) out of the basis, dropping
    /// rows that turn out to be redundant.
    fn evict_artificials(&mut self) {
        let mut r = 0;
        while r < self.rows.len() {
            if self.basis[r] >= self.first_artificial {
                let entering = (0..self.first_artificial).find(|&c| !self.rows[r][c].is_zero());
                match entering {
                    Some(c) => self.pivot(r, c, None),
                    None => {
                        self.rows.remove(r);
                        self.rhs.remove(r);
                        self.basis.remove(r);
                        continue;
                    }
                }
            }
            r += 1;
        }
    }

    /// Maximizes `cost · x` over columns `< limit` using Bland's rule.
    /// Returns the status and optimal value.
    fn optimize(
        &mut self,
        mut cost: Vec<Rational>,
        limit: usize,
    ) -> Result<(LpStatus, Rational), LpError> {
        // Reduced-cost row: value = -obj_rhs + sum_j cost_j x_j over nonbasics.
        let mut obj_rhs = Rational::zero();
        for r in 0..self.rows.len() {
            let b = self.basis[r];
            if !cost[b].is_zero() {
                let f = cost[b].clone();
                for (c, a) in cost.iter_mut().zip(&self.rows[r]) {
                    if !a.is_zero() {
                        *c -= &f * a;
                    }
                }
                obj_rhs -= &f * &self.rhs[r];
            }
        }
        let mut row_obj = (cost, obj_rhs);
        loop {
            let entering = (0..limit).find(|&c| row_obj.0[c].is_positive());
            let Some(e) = entering else {
                return Ok((LpStatus::Optimal, -row_obj.1));
            };
            let mut leave: Option<(usize, Rational)> = None;
            for r in 0..self.rows.len() {
                let a = &self.rows[r][e];
                if a.is_positive() {
                    let ratio = &self.rhs[r] / a;
                    let better = match &leave {
                        None => true,
                        Some((lr, best)) => {
                            ratio < *best || (ratio == *best && self.basis[r] < self.basis[*lr])
                        }
                    };
                    if better {
                        leave = Some((r, ratio));
                    }
                }
            }
            let Some((r, _)) = leave else {
                return Ok((LpStatus::Unbounded, Rational::zero()));
            };
            self.pivot(r, e, Some(&mut row_obj));
        }
    }

    fn pivot(&mut self, r: usize, e: usize, obj: Option<&mut (Vec<Rational>, Rational)>) {
        let inv = Rational::one() / &self.rows[r][e];
        let support: Vec<usize> = (0..self.width)
            .filter(|&c| !self.rows[r][c].is_zero())
            .collect();
        for &c in &support {
            self.rows[r][c] *= &inv;
        }
        self.rhs[r] *= &inv;
        let pivot_row = std::mem::take(&mut self.rows[r]);
        let pivot_rhs = self.rhs[r].clone();
        for k in 0..self.rows.len() {
            if k == r || self.rows[k][e].is_zero() {
                continue;
            }
            let f = self.rows[k][e].clone();
            for &c in &support {
                self.rows[k][c] -= &f * &pivot_row[c];
            }
            self.rhs[k] -= &f * &pivot_rhs;
        }
        if let Some((cost, obj_rhs)) = obj {
            if !cost[e].is_zero() {
                let f = cost[e].clone();
                for &c in &support {
                    cost[c] -= &f * &pivot_row[c];
                }
                *obj_rhs -= &f * &pivot_rhs;
            }
        }
        self.rows[r] = pivot_row;
        self.basis[r] = e;
    }

    fn primal(&self, n: usize) -> Vec<Rational> {
        let mut x = vec![Rational::zero(); n];
        for (r, &b) in self.basis.iter().enumerate() {
            if b < n {
                x[b] = self.rhs[r].clone();
            }
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Advertiser, Customer, Query};
    use crate::rational::{int, ratio};

    fn gap(n: i64) -> Instance {
        Instance::new(
            vec![Advertiser { budget: int(1) }],
            (0..n)
                .map(|t| Query::new(0, t, ratio(1, n), [(0, int(1))]))
                .collect(),
            vec![Customer { capacity: n as u32 }],
        )
    }

    fn half_tight(eps: Rational) -> Instance {
        let one = Rational::one();
        Instance::new(
            vec![Advertiser {
                budget: &one / &eps,
            }],
            vec![
                Query::new(0, 1, &one - &eps, [(0, one.clone())]),
                Query::new(0, 2, eps.clone(), [(0, (&one - &eps) / &eps)]),
            ],
            vec![Customer { capacity: 1 }],
        )
    }

    #[test]
    fn single_variable_transcription() {
        let inst = Instance::new(
            vec![Advertiser { budget: int(3) }],
            vec![Query::new(0, 0, ratio(1, 2), [(0, int(1))])],
            vec![Customer { capacity: 1 }],
        );
        let lp = build_lp(&inst, Variant::B, LpMode::Expectation).unwrap();
        assert_eq!(lp.num_vars(), 1);
        assert_eq!(lp.constraints.len(), 2);
        assert_eq!(lp.constraints[0].rhs, ratio(1, 2));
        assert_eq!(lp.constraints[1].tag, RowTag::Budget(0));
        assert_eq!(lp.constraints[1].rhs, int(3));
    }

    #[test]
    fn integrality_gap_rows() {
        let lp = build_lp(&gap(4), Variant::B, LpMode::Expectation).unwrap();
        assert_eq!(lp.num_vars(), 4);
        let f_rows: Vec<_> = lp
            .constraints
            .iter()
            .filter(|c| matches!(c.tag, RowTag::Assign(_)))
            .collect();
        assert_eq!(f_rows.len(), 4);
        assert!(f_rows.iter().all(|r| r.rhs == ratio(1, 4)));
        let b_rows: Vec<_> = lp
            .constraints
            .iter()
            .filter(|c| matches!(c.tag, RowTag::Budget(_)))
            .collect();
        assert_eq!(b_rows.len(), 1);
        assert_eq!(b_rows[0].rhs, int(1));
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.objective_value, int(1));
    }

    #[test]
    fn absent_query_gets_zero_rhs() {
        let inst = gap(2);
        let s = Scenario {
            arrived: vec![true, false],
        };
        let lp = build_lp(&inst, Variant::BC, LpMode::Realized(&s)).unwrap();
        assert_eq!(lp.row(RowTag::Assign(1)).unwrap().rhs, int(0));
        assert_eq!(lp.row(RowTag::Assign(0)).unwrap().rhs, int(1));
    }

    #[test]
    fn trivial_box_program() {
        let lp = LinearProgram {
            objective: vec![int(1)],
            constraints: vec![Constraint {
                coeffs: vec![(0, int(1))],
                relation: Relation::Le,
                rhs: int(1),
                tag: RowTag::Other(0),
            }],
            columns: vec![],
        };
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert_eq!(sol.values, vec![int(1)]);
        assert_eq!(sol.objective_value, int(1));
    }

    #[test]
    fn half_tight_capacity_lp() {
        let sol =
            lp_round_trip(&half_tight(ratio(1, 10)), Variant::C, LpMode::Expectation).unwrap();
        assert_eq!(sol.objective_value, ratio(9, 5));
        assert_eq!(sol.values, vec![ratio(9, 10), ratio(1, 10)]);
    }

    #[test]
    fn equality_and_ge_rows_and_infeasibility() {
        // maximize x0 + 2 x1 with x0 + x1 = 1, x0 >= 1/3
        let row = |coeffs: Vec<(usize, Rational)>, relation, rhs| Constraint {
            coeffs,
            relation,
            rhs,
            tag: RowTag::Other(0),
        };
        let lp = LinearProgram {
            objective: vec![int(1), int(2)],
            constraints: vec![
                row(vec![(0, int(1)), (1, int(1))], Relation::Eq, int(1)),
                row(vec![(0, int(1))], Relation::Ge, ratio(1, 3)),
            ],
            columns: vec![],
        };
        let sol = solve_lp(&lp).unwrap();
        assert_eq!(sol.values, vec![ratio(1, 3), ratio(2, 3)]);
        assert_eq!(sol.objective_value, ratio(5, 3));

        let bad = LinearProgram {
            objective: vec![int(1)],
            constraints: vec![row(vec![(0, int(1))], Relation::Ge, int(2))],
            columns: vec![],
        };
        assert_eq!(solve_lp(&bad).unwrap().status, LpStatus::Infeasible);

        let negative = LinearProgram {
            objective: vec![int(-1)],
            constraints: vec![row(vec![(0, int(-1))], Relation::Le, ratio(-1, 2))],
            columns: vec![],
        };
        assert_eq!(solve_lp(&negative).unwrap().values, vec![ratio(1, 2)]);
    }

    #[test]
    fn empty_instance_objective_zero() {
        let sol = lp_round_trip(&Instance::default(), Variant::BC, LpMode::Expectation).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert_eq!(sol.objective_value, int(0));
    }

    #[test]
    fn invalid_instance_is_rejected() {
        let mut inst = gap(2);
        inst.customers[0].capacity = 0;
        assert!(matches!(
            build_lp(&inst, Variant::C, LpMode::Expectation),
            Err(LpError::Model(ModelError::Invalid(_)))
        ));
    }

    #[test]
    fn dump_is_readable() {
        let lp = build_lp(&gap(2), Variant::BC, LpMode::Expectation).unwrap();
        let text = lp.to_text();
        assert!(text.contains("F0: x_0_0 <= 1/2"));
        assert!(text.contains("C0: x_0_0 + x_0_1 <= 2"));
        assert!(text.contains("0 <= x_0_1 <= 1"));
    }

    #[test]
    fn column_lookup() {
        let inst = Instance::new(
            vec![Advertiser { budget: int(1) }, Advertiser { budget: int(1) }],
            vec![
                Query::new(0, 0, int(1), [(0, int(1)), (1, int(1))]),
                Query::new(0, 1, int(1), [(1, int(1))]),
            ],
            vec![Customer { capacity: 1 }],
        );
        let lp = build_lp(&inst, Variant::BC, LpMode::Expectation).unwrap();
        assert_eq!(lp.column_of(1, 0), Some(1));
        assert_eq!(lp.column_of(1, 1), Some(2));
        assert_eq!(lp.column_of(0, 1), None);
    }
}
