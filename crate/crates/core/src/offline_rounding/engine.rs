//! Case dispatch: choose a chain of fractional edges (or a whole tree)
//! whose structure keeps the right rows fixed, and build its subsystem.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{Signed, Zero};

use super::context::{Context, Row};
use super::forest::SupportForest;
use super::linalg::rank;
use super::subsystem::{dot, Guard, Subsystem};
use super::CaseLabel;
use crate::rational::Rational;

const SEARCH_LIMIT: usize = 200_000;

#[derive(Debug, Clone)]
pub(crate) enum Plan {
    Random {
        case: CaseLabel,
        sub: Subsystem,
    },
    Directed {
        case: CaseLabel,
        sub: Subsystem,
        direction: Vec<Rational>,
    },
}

impl Plan {
    pub fn case(&self) -> CaseLabel {
        match self {
            Plan::Random { case, .. } | Plan::Directed { case, .. } => *case,
        }
    }

    pub fn sub(&self) -> &Subsystem {
        match self {
            Plan::Random { sub, .. } | Plan::Directed { sub, .. } => sub,
        }
    }
}

/// How a node may end a chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Endpoint {
    /// Leaf advertiser: its spend moves.
    Advertiser,
    /// Query with slack in both its own row and its customer's row.
    Open,
    /// Query with slack in its own row whose customer is at capacity.
    TightSet(usize),
}

#[derive(Debug, Clone, Copy)]
enum Joint {
    Query,
    Advertiser,
    /// Two queries of the same customer in different trees.
    Join,
}

struct Segment {
    nodes: Vec<usize>,
    cols: Vec<usize>,
}

#[derive(Default)]
struct Chain {
    cols: Vec<usize>,
    joints: Vec<Joint>,
}

pub(crate) struct View<'a> {
    ctx: &'a Context,
    x: &'a [Rational],
    forest: SupportForest,
    assign_tight: Vec<bool>,
    capacity_tight: Vec<bool>,
}

impl<'a> View<'a> {
    pub fn new(ctx: &'a Context, x: &'a [Rational]) -> Self {
        let assign_tight = (0..ctx.n)
            .map(|j| ctx.is_tight(Row::Assign(j), x))
            .collect();
        let capacity_tight = (0..ctx.capacity.len())
            .map(|k| ctx.is_tight(Row::Capacity(k), x))
            .collect();
        View {
            ctx,
            x,
            forest: ctx.forest(x),
            assign_tight,
            capacity_tight,
        }
    }

    pub fn forest(&self) -> &SupportForest {
        &self.forest
    }

    fn endpoint(&self, node: usize) -> Option<Endpoint> {
        if node < self.ctx.m {
            return self.forest.is_leaf(node).then_some(Endpoint::Advertiser);
        }
        let j = node - self.ctx.m;
        if self.forest.degree(node) == 0 || self.assign_tight[j] {
            return None;
        }
        let k = self.ctx.query_customer[j];
        Some(if self.capacity_tight[k] {
            Endpoint::TightSet(k)
        } else {
            Endpoint::Open
        })
    }

    /// The first applicable case in priority order.
    pub fn plan(&self) -> Option<Plan> {
        self.two_leaf_advertisers()
            .or_else(|| self.open_pair(true))
            .or_else(|| self.open_pair(false))
            .or_else(|| self.tight_set_pair())
            .or_else(|| self.advertiser_and_open())
            .or_else(|| self.whole_tree())
            .or_else(|| {
                let starts: Vec<usize> = (0..self.ctx.m)
                    .filter(|&v| self.endpoint(v) == Some(Endpoint::Advertiser))
                    .collect();
                self.linked(&starts, CaseLabel::LinkedPath)
            })
            .or_else(|| {
                let queries = self.ctx.m..self.ctx.m + self.ctx.n;
                let mut starts: Vec<usize> = queries
                    .clone()
                    .filter(|&v| self.endpoint(v) == Some(Endpoint::Open))
                    .collect();
                starts.extend(
                    queries.filter(|&v| matches!(self.endpoint(v), Some(Endpoint::TightSet(_)))),
                );
                self.linked(&starts, CaseLabel::NoLeafAdvertiser)
            })
    }

    fn nodes_of(&self, tree: usize, pred: impl Fn(Option<Endpoint>, usize) -> bool) -> Vec<usize> {
        self.forest.trees()[tree]
            .iter()
            .copied()
            .filter(|&v| pred(self.endpoint(v), v))
            .collect()
    }

    fn pair_plan(
        &self,
        a: usize,
        b: usize,
        designated: Option<usize>,
        case: CaseLabel,
    ) -> Option<Plan> {
        let (nodes, cols) = self.forest.path(a, b)?;
        let chain = self.chain(&[Segment { nodes, cols }]);
        self.plan_chain(&chain, designated, case)
    }

    fn two_leaf_advertisers(&self) -> Option<Plan> {
        (0..self.forest.trees().len()).find_map(|t| {
            let leaves = self.nodes_of(t, |e, _| e == Some(Endpoint::Advertiser));
            if leaves.len() < 2 {
                return None;
            }
            self.pair_plan(leaves[0], leaves[1], None, CaseLabel::TwoLeafAdvertisers)
        })
    }

    fn open_pair(&self, same_set: bool) -> Option<Plan> {
        let case = if same_set {
            CaseLabel::SameSetQueries
        } else {
            CaseLabel::CrossSetQueries
        };
        let m = self.ctx.m;
        (0..self.forest.trees().len()).find_map(|t| {
            let leaves = self.nodes_of(t, |e, v| {
                e == Some(Endpoint::Open) && self.forest.is_leaf(v)
            });
            for (k, &a) in leaves.iter().enumerate() {
                for &b in &leaves[k + 1..] {
                    let same = self.ctx.query_customer[a - m] == self.ctx.query_customer[b - m];
                    if same == same_set {
                        if let Some(p) = self.pair_plan(a, b, None, case) {
                            return Some(p);
                        }
                    }
                }
            }
            None
        })
    }

    fn tight_set_pair(&self) -> Option<Plan> {
        (0..self.forest.trees().len()).find_map(|t| {
            let mut by_set: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
            for v in self.forest.trees()[t].iter().copied() {
                if let Some(Endpoint::TightSet(k)) = self.endpoint(v) {
                    by_set.entry(k).or_default().push(v);
                }
            }
            by_set.into_iter().find_map(|(k, nodes)| {
                for (idx, &a) in nodes.iter().enumerate() {
                    for &b in &nodes[idx + 1..] {
                        if let Some(p) = self.pair_plan(a, b, Some(k), CaseLabel::TightSetPair) {
                            return Some(p);
                        }
                    }
                }
                None
            })
        })
    }

    fn advertiser_and_open(&self) -> Option<Plan> {
        (0..self.forest.trees().len()).find_map(|t| {
            let advs = self.nodes_of(t, |e, _| e == Some(Endpoint::Advertiser));
            let opens = self.nodes_of(t, |e, v| {
                e == Some(Endpoint::Open) && self.forest.is_leaf(v)
            });
            advs.iter().find_map(|&a| {
                opens
                    .iter()
                    .find_map(|&q| self.pair_plan(a, q, None, CaseLabel::AdvertiserAndQuery))
            })
        })
    }

    /// All tight rows of one tree as equalities, the rest as guards; used
    /// when that system still leaves a free direction.
    fn whole_tree(&self) -> Option<Plan> {
        let ctx = self.ctx;
        (0..self.forest.trees().len()).find_map(|t| {
            let cols = self.forest.tree_columns(t);
            let local: BTreeMap<usize, usize> =
                cols.iter().enumerate().map(|(k, &c)| (c, k)).collect();
            let mut touched = BTreeSet::new();
            for &c in &cols {
                let (i, j) = ctx.columns[c];
                touched.insert(Row::Assign(j));
                touched.insert(Row::Capacity(ctx.query_customer[j]));
                touched.insert(Row::Budget(i));
            }
            let current: Vec<Rational> = cols.iter().map(|&c| self.x[c].clone()).collect();
            let mut rows = Vec::new();
            let mut guards = Vec::new();
            for row in touched {
                let mut coeffs = vec![Rational::zero(); cols.len()];
                for &c in ctx.row_cols(row) {
                    if let Some(&k) = local.get(&c) {
                        coeffs[k] = ctx.coeff(row, c);
                    }
                }
                let total = ctx.activity(row, self.x);
                let rhs = ctx.rhs(row);
                if total == *rhs {
                    rows.push(coeffs);
                } else if total < *rhs {
                    let outside = &total - dot(&coeffs, &current);
                    guards.push(Guard {
                        coeffs,
                        rhs: rhs - outside,
                        tag: Some(row.tag()),
                    });
                }
                // Budget rows already exceeded are left unconstrained.
            }
            if rank(&rows, cols.len()) >= cols.len() {
                return None;
            }
            Some(Plan::Random {
                case: CaseLabel::WholeTree,
                sub: Subsystem {
                    columns: cols,
                    rows,
                    guards,
                },
            })
        })
    }

    /// Depth-first search for chains that hop between trees through pairs
    /// of slack queries of one at-capacity customer.
    fn linked(&self, starts: &[usize], case: CaseLabel) -> Option<Plan> {
        let mut budget = SEARCH_LIMIT;
        for &start in starts {
            let (Some(kind), Some(tree)) = (self.endpoint(start), self.forest.tree_of(start))
            else {
                continue;
            };
            let mut visited = vec![false; self.forest.trees().len()];
            visited[tree] = true;
            let mut segments = Vec::new();
            if let Some(p) = self.extend(
                start,
                start,
                kind,
                &mut segments,
                &mut visited,
                &mut budget,
                case,
            ) {
                return Some(p);
            }
            if budget == 0 {
                break;
            }
        }
        None
    }

    #[allow(clippy::too_many_arguments)]
    fn extend(
        &self,
        start: usize,
        entry: usize,
        kind: Endpoint,
        segments: &mut Vec<Segment>,
        visited: &mut [bool],
        budget: &mut usize,
        case: CaseLabel,
    ) -> Option<Plan> {
        let tree = self.forest.tree_of(entry)?;
        for &target in &self.forest.trees()[tree] {
            if target == entry || target == start {
                continue;
            }
            if *budget == 0 {
                return None;
            }
            *budget -= 1;
            let (nodes, cols) = self.forest.path(entry, target)?;
            segments.push(Segment { nodes, cols });
            let reached = self.endpoint(target);
            let terminal = match (kind, reached) {
                (
                    Endpoint::Advertiser | Endpoint::Open,
                    Some(Endpoint::Advertiser | Endpoint::Open),
                ) => true,
                (Endpoint::TightSet(k), Some(Endpoint::TightSet(k2))) => k == k2,
                _ => false,
            };
            if terminal {
                let designated = match kind {
                    Endpoint::TightSet(k) => Some(k),
                    _ => None,
                };
                if let Some(p) = self.plan_chain(&self.chain(segments), designated, case) {
                    return Some(p);
                }
            }
            if let Some(Endpoint::TightSet(k)) = reached {
                for &j2 in &self.ctx.customer_queries[k] {
                    let portal = self.ctx.m + j2;
                    if portal == target || self.endpoint(portal) != Some(Endpoint::TightSet(k)) {
                        continue;
                    }
                    let Some(next_tree) = self.forest.tree_of(portal) else {
                        continue;
                    };
                    if visited[next_tree] {
                        continue;
                    }
                    visited[next_tree] = true;
                    let found = self.extend(start, portal, kind, segments, visited, budget, case);
                    visited[next_tree] = false;
                    if found.is_some() {
                        return found;
                    }
                }
            }
            segments.pop();
        }
        None
    }

    fn chain(&self, segments: &[Segment]) -> Chain {
        let mut chain = Chain::default();
        for (s, seg) in segments.iter().enumerate() {
            if s > 0 {
                chain.joints.push(Joint::Join);
            }
            for (k, &c) in seg.cols.iter().enumerate() {
                if k > 0 {
                    chain.joints.push(if seg.nodes[k] < self.ctx.m {
                        Joint::Advertiser
                    } else {
                        Joint::Query
                    });
                }
                chain.cols.push(c);
            }
        }
        chain
    }

    fn covers(&self, row: Row, col: usize) -> bool {
        let (i, j) = self.ctx.columns[col];
        match row {
            Row::Assign(q) => q == j,
            Row::Capacity(k) => self.ctx.query_customer[j] == k,
            Row::Budget(a) => a == i,
        }
    }

    /// Subsystem for a chain, or `None` when the chain would move a row
    /// that is already tight. `designated` names the one at-capacity
    /// customer a query-to-query chain may lower.
    fn plan_chain(
        &self,
        chain: &Chain,
        designated: Option<usize>,
        case: CaseLabel,
    ) -> Option<Plan> {
        let ctx = self.ctx;
        let len = chain.cols.len();
        let mut r = Vec::with_capacity(len);
        r.push(Rational::from_integer(1.into()));
        let mut rows = Vec::with_capacity(len.saturating_sub(1));
        for (k, joint) in chain.joints.iter().enumerate() {
            let (a, b) = (chain.cols[k], chain.cols[k + 1]);
            let mut row = vec![Rational::zero(); len];
            let next = match joint {
                Joint::Query | Joint::Join => {
                    row[k] = Rational::from_integer(1.into());
                    row[k + 1] = Rational::from_integer(1.into());
                    -r[k].clone()
                }
                Joint::Advertiser => {
                    row[k] = ctx.bids[a].clone();
                    row[k + 1] = ctx.bids[b].clone();
                    -(&ctx.bids[a] * &r[k]) / &ctx.bids[b]
                }
            };
            rows.push(row);
            r.push(next);
        }

        let mut touched = BTreeSet::new();
        for &c in &chain.cols {
            let j = ctx.columns[c].1;
            touched.insert(Row::Assign(j));
            touched.insert(Row::Capacity(ctx.query_customer[j]));
        }
        let current: Vec<Rational> = chain.cols.iter().map(|&c| self.x[c].clone()).collect();
        let mut guards = Vec::new();
        let mut designated_rate = Rational::zero();
        for row in touched {
            let coeffs: Vec<Rational> = chain
                .cols
                .iter()
                .map(|&c| {
                    if self.covers(row, c) {
                        ctx.coeff(row, c)
                    } else {
                        Rational::zero()
                    }
                })
                .collect();
            let rate = dot(&coeffs, &r);
            let total = ctx.activity(row, self.x);
            if total == *ctx.rhs(row) && !rate.is_zero() {
                if designated.map(Row::Capacity) == Some(row) {
                    designated_rate = rate.clone();
                } else {
                    return None;
                }
            }
            let outside = &total - dot(&coeffs, &current);
            guards.push(Guard {
                coeffs,
                rhs: ctx.rhs(row) - outside,
                tag: Some(row.tag()),
            });
        }
        let sub = Subsystem {
            columns: chain.cols.clone(),
            rows,
            guards,
        };
        if designated.is_none() {
            return Some(Plan::Random { case, sub });
        }
        // Lower the first edge unless that would raise the customer's load.
        let neg: Vec<Rational> = r.iter().map(|v| -v.clone()).collect();
        let direction = if (-designated_rate).is_positive() {
            r
        } else {
            neg
        };
        Some(Plan::Directed {
            case,
            sub,
            direction,
        })
    }
}
