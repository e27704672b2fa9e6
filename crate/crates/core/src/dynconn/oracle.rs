use std::collections::{BTreeSet, VecDeque};

use super::{Connectivity, DynConnError};

/// Adjacency sets with BFS answers. Accepts arbitrary graphs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphOracle {
    adj: Vec<BTreeSet<usize>>,
}

impl GraphOracle {
    pub fn new(n: usize) -> Self {
        Self { adj: vec![BTreeSet::new(); n] }
    }

    fn check(&self, v: usize) -> Result<(), DynConnError> {
        if v >= self.adj.len() {
            return Err(DynConnError::Range { vertex: v, n: self.adj.len() });
        }
        Ok(())
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj.get(u).is_some_and(|s| s.contains(&v))
    }

    pub fn edges(&self) -> BTreeSet<(usize, usize)> {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, s)| s.iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
            .collect()
    }

    /// Component label of every vertex.
    pub fn labels(&self) -> Vec<usize> {
        let n = self.adj.len();
        let mut label = vec![usize::MAX; n];
        let mut next = 0;
        for s in 0..n {
            if label[s] != usize::MAX {
                continue;
            }
            label[s] = next;
            let mut queue = VecDeque::from([s]);
            while let Some(x) = queue.pop_front() {
                for &y in &self.adj[x] {
                    if label[y] == usize::MAX {
                        label[y] = next;
                        queue.push_back(y);
                    }
                }
            }
            next += 1;
        }
        label
    }

    pub fn is_forest(&self) -> bool {
        self.edges().len() + self.components() == self.adj.len()
    }
}

impl Connectivity for GraphOracle {
    fn num_vertices(&self) -> usize {
        self.adj.len()
    }

    fn insert(&mut self, u: usize, v: usize) -> Result<(), DynConnError> {
        self.check(u)?;
        self.check(v)?;
        if u == v || self.adj[u].contains(&v) {
            return Err(DynConnError::DuplicateEdge { u, v });
        }
        self.adj[u].insert(v);
        self.adj[v].insert(u);
        Ok(())
    }

    fn delete(&mut self, u: usize, v: usize) -> Result<(), DynConnError> {
        self.check(u)?;
        self.check(v)?;
        if !self.adj[u].remove(&v) {
            return Err(DynConnError::MissingEdge { u, v });
        }
        self.adj[v].remove(&u);
        Ok(())
    }

    fn connected(&mut self, u: usize, v: usize) -> Result<bool, DynConnError> {
        self.check(u)?;
        self.check(v)?;
        let mut seen = vec![false; self.adj.len()];
        seen[u] = true;
        let mut queue = VecDeque::from([u]);
        while let Some(x) = queue.pop_front() {
            if x == v {
                return Ok(true);
            }
            for &y in &self.adj[x] {
                if !std::mem::replace(&mut seen[y], true) {
                    queue.push_back(y);
                }
            }
        }
        Ok(false)
    }

    fn components(&self) -> usize {
        self.labels().into_iter().max().map_or(0, |m| m + 1)
    }
}
