//! Bipartite support graph of the strictly fractional variables.
//!
//! Node ids put advertisers first: advertiser `i` is node `i`, query `j` is
//! node `m + j`.

use std::collections::VecDeque;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Node {
    Advertiser(usize),
    Query(usize),
}

#[derive(Debug, Clone)]
pub struct SupportForest {
    m: usize,
    /// Per node: (neighbor node, LP column of the edge).
    adj: Vec<Vec<(usize, usize)>>,
    /// Component index per node; `None` for isolated nodes.
    tree_of: Vec<Option<usize>>,
    /// Nodes of each component in ascending order.
    trees: Vec<Vec<usize>>,
    edge_count: usize,
}

impl SupportForest {
    /// `edges` are (advertiser, query, column) triples.
    pub fn new(m: usize, n: usize, edges: impl IntoIterator<Item = (usize, usize, usize)>) -> Self {
        let mut adj = vec![Vec::new(); m + n];
        let mut edge_count = 0;
        for (i, j, col) in edges {
            adj[i].push((m + j, col));
            adj[m + j].push((i, col));
            edge_count += 1;
        }
        for list in adj.iter_mut() {
            list.sort_unstable();
        }
        let mut tree_of = vec![None; m + n];
        let mut trees = Vec::new();
        for root in 0..m + n {
            if tree_of[root].is_some() || adj[root].is_empty() {
                continue;
            }
            let id = trees.len();
            let mut nodes = vec![root];
            tree_of[root] = Some(id);
            let mut queue = VecDeque::from([root]);
            while let Some(v) = queue.pop_front() {
                for &(w, _) in &adj[v] {
                    if tree_of[w].is_none() {
                        tree_of[w] = Some(id);
                        nodes.push(w);
                        queue.push_back(w);
                    }
                }
            }
            nodes.sort_unstable();
            trees.push(nodes);
        }
        SupportForest {
            m,
            adj,
            tree_of,
            trees,
            edge_count,
        }
    }

    pub fn node(&self, id: usize) -> Node {
        if id < self.m {
            Node::Advertiser(id)
        } else {
            Node::Query(id - self.m)
        }
    }

    pub fn advertiser_node(&self, i: usize) -> usize {
        i
    }

    pub fn query_node(&self, j: usize) -> usize {
        self.m + j
    }

    pub fn degree(&self, id: usize) -> usize {
        self.adj[id].len()
    }

    pub fn is_leaf(&self, id: usize) -> bool {
        self.adj[id].len() == 1
    }

    pub fn neighbors(&self, id: usize) -> &[(usize, usize)] {
        &self.adj[id]
    }

    pub fn tree_of(&self, id: usize) -> Option<usize> {
        self.tree_of[id]
    }

    pub fn trees(&self) -> &[Vec<usize>] {
        &self.trees
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn is_acyclic(&self) -> bool {
        let nodes: usize = self.trees.iter().map(Vec::len).sum();
        self.edge_count + self.trees.len() == nodes
    }

    /// Columns of the edges inside a component, ascending.
    pub fn tree_columns(&self, tree: usize) -> Vec<usize> {
        let mut cols: Vec<usize> = self.trees[tree]
            .iter()
            .filter(|&&v| v < self.m)
            .flat_map(|&v| self.adj[v].iter().map(|&(_, c)| c))
            .collect();
        cols.sort_unstable();
        cols
    }

    /// Node sequence and edge columns of the path from `from` to `to`.
    /// Unique when the graph is a forest.
    pub fn path(&self, from: usize, to: usize) -> Option<(Vec<usize>, Vec<usize>)> {
        if self.tree_of[from].is_none() || self.tree_of[from] != self.tree_of[to] {
            return None;
        }
        let mut parent: Vec<Option<(usize, usize)>> = vec![None; self.adj.len()];
        let mut seen = vec![false; self.adj.len()];
        seen[from] = true;
        let mut queue = VecDeque::from([from]);
        while let Some(v) = queue.pop_front() {
            if v == to {
                break;
            }
            for &(w, c) in &self.adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    parent[w] = Some((v, c));
                    queue.push_back(w);
                }
            }
        }
        let mut nodes = vec![to];
        let mut cols = Vec::new();
        let mut v = to;
        while v != from {
            let (p, c) = parent[v]?;
            nodes.push(p);
            cols.push(c);
            v = p;
        }
        nodes.reverse();
        cols.reverse();
        Some((nodes, cols))
    }

    /// Some cycle as (nodes, columns) with `columns[k]` joining `nodes[k]`
    /// and `nodes[k + 1]` (wrapping). Starts at its smallest advertiser and
    /// continues toward the smaller of that advertiser's two cycle
    /// neighbors.
    pub fn find_cycle(&self) -> Option<(Vec<usize>, Vec<usize>)> {
        let total = self.adj.len();
        let mut parent: Vec<Option<(usize, usize)>> = vec![None; total];
        let mut depth = vec![usize::MAX; total];
        for root in 0..total {
            if depth[root] != usize::MAX || self.adj[root].is_empty() {
                continue;
            }
            depth[root] = 0;
            let mut stack = vec![root];
            while let Some(v) = stack.pop() {
                for &(w, c) in &self.adj[v] {
                    if parent[v].is_some_and(|(_, pc)| pc == c) {
                        continue;
                    }
                    if depth[w] == usize::MAX {
                        depth[w] = depth[v] + 1;
                        parent[w] = Some((v, c));
                        stack.push(w);
                    } else {
                        return Some(self.close_cycle(v, w, c, &parent, &depth));
                    }
                }
            }
        }
        None
    }

    fn close_cycle(
        &self,
        v: usize,
        w: usize,
        closing: usize,
        parent: &[Option<(usize, usize)>],
        depth: &[usize],
    ) -> (Vec<usize>, Vec<usize>) {
        // Walk both endpoints up to their common ancestor.
        let (mut a, mut b) = (v, w);
        let mut left = vec![(a, None)];
        let mut right = vec![(b, None)];
        while a != b {
            if depth[a] >= depth[b] {
                let (p, c) = parent[a].expect("non-root has a parent");
                left.last_mut().unwrap().1 = Some(c);
                a = p;
                left.push((a, None));
            } else {
                let (p, c) = parent[b].expect("non-root has a parent");
                right.last_mut().unwrap().1 = Some(c);
                b = p;
                right.push((b, None));
            }
        }
        // nodes: v .. ancestor .. w, then closing edge w -> v
        let mut nodes: Vec<usize> = left.iter().map(|x| x.0).collect();
        let mut cols: Vec<usize> = left[..left.len() - 1]
            .iter()
            .map(|x| x.1.unwrap())
            .collect();
        right.pop();
        for (node, col) in right.into_iter().rev() {
            cols.push(col.unwrap());
            nodes.push(node);
        }
        cols.push(closing);
        canonical_cycle(nodes, cols, self.m)
    }
}

fn canonical_cycle(nodes: Vec<usize>, cols: Vec<usize>, m: usize) -> (Vec<usize>, Vec<usize>) {
    let len = nodes.len();
    let start = (0..len)
        .filter(|&k| nodes[k] < m)
        .min_by_key(|&k| nodes[k])
        .expect("bipartite cycles contain advertisers");
    let rotated: Vec<usize> = (0..len).map(|k| nodes[(start + k) % len]).collect();
    let rotated_cols: Vec<usize> = (0..len).map(|k| cols[(start + k) % len]).collect();
    if rotated[1] <= rotated[len - 1] {
        return (rotated, rotated_cols);
    }
    // Reverse orientation, keeping the start node first.
    let mut rev_nodes = vec![rotated[0]];
    rev_nodes.extend(rotated[1..].iter().rev());
    let rev_cols: Vec<usize> = rotated_cols.iter().rev().copied().collect();
    (rev_nodes, rev_cols)
}
