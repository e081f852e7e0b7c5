//! Static structure of the realized program, indexed for the rounding loop.

use num_traits::{One, Zero};

use super::forest::SupportForest;
use crate::lp::RowTag;
use crate::model::Instance;
use crate::rational::{is_strictly_fractional, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) enum Row {
    Assign(usize),
    Capacity(usize),
    Budget(usize),
}

impl Row {
    pub fn tag(self) -> RowTag {
        match self {
            Row::Assign(j) => RowTag::Assign(j),
            Row::Capacity(k) => RowTag::Capacity(k),
            Row::Budget(i) => RowTag::Budget(i),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Context {
    pub m: usize,
    pub n: usize,
    /// (advertiser, query) per column, in `Instance::edges` order.
    pub columns: Vec<(usize, usize)>,
    pub bids: Vec<Rational>,
    pub query_cols: Vec<Vec<usize>>,
    pub adv_cols: Vec<Vec<usize>>,
    pub customer_cols: Vec<Vec<usize>>,
    pub customer_queries: Vec<Vec<usize>>,
    pub query_customer: Vec<usize>,
    pub assign_rhs: Vec<Rational>,
    pub capacity: Vec<Rational>,
    pub budgets: Vec<Rational>,
}

impl Context {
    pub fn new(inst: &Instance, assign_rhs: Vec<Rational>) -> Self {
        let m = inst.num_advertisers();
        let n = inst.num_queries();
        let mut columns = Vec::new();
        let mut bids = Vec::new();
        let mut query_cols = vec![Vec::new(); n];
        let mut adv_cols = vec![Vec::new(); m];
        let mut customer_cols = vec![Vec::new(); inst.num_customers()];
        for (c, (i, j, b)) in inst.edges().enumerate() {
            columns.push((i, j));
            bids.push(b.clone());
            query_cols[j].push(c);
            adv_cols[i].push(c);
            customer_cols[inst.queries[j].customer].push(c);
        }
        Context {
            m,
            n,
            columns,
            bids,
            query_cols,
            adv_cols,
            customer_cols,
            customer_queries: inst.customer_queries(),
            query_customer: inst.queries.iter().map(|q| q.customer).collect(),
            assign_rhs,
            capacity: inst
                .customers
                .iter()
                .map(|c| Rational::from_integer(c.capacity.into()))
                .collect(),
            budgets: inst.advertisers.iter().map(|a| a.budget.clone()).collect(),
        }
    }

    pub fn row_cols(&self, row: Row) -> &[usize] {
        match row {
            Row::Assign(j) => &self.query_cols[j],
            Row::Capacity(k) => &self.customer_cols[k],
            Row::Budget(i) => &self.adv_cols[i],
        }
    }

    pub fn coeff(&self, row: Row, col: usize) -> Rational {
        match row {
            Row::Budget(_) => self.bids[col].clone(),
            _ => Rational::one(),
        }
    }

    pub fn rhs(&self, row: Row) -> &Rational {
        match row {
            Row::Assign(j) => &self.assign_rhs[j],
            Row::Capacity(k) => &self.capacity[k],
            Row::Budget(i) => &self.budgets[i],
        }
    }

    pub fn activity(&self, row: Row, x: &[Rational]) -> Rational {
        self.row_cols(row)
            .iter()
            .filter(|&&c| !x[c].is_zero())
            .map(|&c| self.coeff(row, c) * &x[c])
            .sum()
    }

    pub fn is_tight(&self, row: Row, x: &[Rational]) -> bool {
        self.activity(row, x) == *self.rhs(row)
    }

    pub fn all_rows(&self) -> impl Iterator<Item = Row> + '_ {
        (0..self.n)
            .filter(|&j| !self.query_cols[j].is_empty())
            .map(Row::Assign)
            .chain(
                (0..self.customer_cols.len())
                    .filter(|&k| !self.customer_cols[k].is_empty())
                    .map(Row::Capacity),
            )
            .chain(
                (0..self.m)
                    .filter(|&i| !self.adv_cols[i].is_empty())
                    .map(Row::Budget),
            )
    }

    /// First assignment or capacity row that `x` violates.
    pub fn first_hard_violation(&self, x: &[Rational]) -> Option<Row> {
        self.all_rows()
            .filter(|r| !matches!(r, Row::Budget(_)))
            .find(|&r| self.activity(r, x) > *self.rhs(r))
    }

    pub fn payments(&self, x: &[Rational]) -> Vec<Rational> {
        (0..self.m)
            .map(|i| self.activity(Row::Budget(i), x))
            .collect()
    }

    pub fn forest(&self, x: &[Rational]) -> SupportForest {
        SupportForest::new(
            self.m,
            self.n,
            self.columns
                .iter()
                .enumerate()
                .filter(|(c, _)| is_strictly_fractional(&x[*c]))
                .map(|(c, &(i, j))| (i, j, c)),
        )
    }
}
