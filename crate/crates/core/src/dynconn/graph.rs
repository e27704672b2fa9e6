use std::collections::{BTreeSet, HashSet};

use super::{edge_key, Connectivity, DynConnError, EulerTourForest};
use crate::memory::{CellMemory, PlainMemory};

/// An Euler tour spanning forest plus the non-tree edges. Cutting a tree
/// edge promotes a non-tree edge that reconnects the halves, if any; the
/// search is a linear scan, fine for the few non-tree edges the reduction
/// gadget creates.
#[derive(Debug, Clone)]
pub struct DynamicGraph<M = PlainMemory> {
    forest: EulerTourForest<M>,
    non_tree: HashSet<(usize, usize)>,
}

impl DynamicGraph {
    pub fn plain(n: usize) -> Self {
        Self { forest: EulerTourForest::plain(n), non_tree: HashSet::new() }
    }
}

impl<M: CellMemory> DynamicGraph<M> {
    pub fn new(forest: EulerTourForest<M>) -> Self {
        Self { forest, non_tree: HashSet::new() }
    }

    pub fn forest(&self) -> &EulerTourForest<M> {
        &self.forest
    }

    pub fn forest_mut(&mut self) -> &mut EulerTourForest<M> {
        &mut self.forest
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.forest.has_edge(u, v) || self.non_tree.contains(&edge_key(u, v))
    }

    pub fn num_non_tree(&self) -> usize {
        self.non_tree.len()
    }
}

impl<M: CellMemory> Connectivity for DynamicGraph<M> {
    fn num_vertices(&self) -> usize {
        self.forest.num_vertices()
    }

    fn insert(&mut self, u: usize, v: usize) -> Result<(), DynConnError> {
        if u == v || self.has_edge(u, v) {
            return Err(DynConnError::DuplicateEdge { u, v });
        }
        if self.forest.connected(u, v)? {
            self.non_tree.insert(edge_key(u, v));
            Ok(())
        } else {
            self.forest.link(u, v)
        }
    }

    fn delete(&mut self, u: usize, v: usize) -> Result<(), DynConnError> {
        if self.non_tree.remove(&edge_key(u, v)) {
            return Ok(());
        }
        self.forest.cut(u, v)?;
        let mut candidates: Vec<(usize, usize)> = self.non_tree.iter().copied().collect();
        candidates.sort_unstable();
        for (x, y) in candidates {
            if !self.forest.connected(x, y)? {
                self.non_tree.remove(&(x, y));
                self.forest.link(x, y)?;
                break;
            }
        }
        Ok(())
    }

    fn connected(&mut self, u: usize, v: usize) -> Result<bool, DynConnError> {
        self.forest.connected(u, v)
    }

    fn components(&self) -> usize {
        self.forest.components()
    }
}

/// True iff the graph has exactly one component.
pub fn whole_graph_connected<G: Connectivity>(g: &G) -> bool {
    g.components() == 1
}

/// Weight of a minimum spanning forest under unit weights.
pub fn msf_cost_unit<G: Connectivity>(g: &G) -> usize {
    g.num_vertices() - g.components()
}

/// A graph with an extra vertex `s` joined to a chosen first column, which
/// answers `connected(u, v)` for first-column `u` using only edge updates and
/// whole-graph connectivity.
#[derive(Debug, Clone)]
pub struct GadgetGraph {
    graph: DynamicGraph,
    s: usize,
    first_column: Option<BTreeSet<usize>>,
    edges: BTreeSet<(usize, usize)>,
}

impl GadgetGraph {
    /// `n` ordinary vertices plus `s = n`.
    pub fn new(n: usize) -> Self {
        Self { graph: DynamicGraph::plain(n + 1), s: n, first_column: None, edges: BTreeSet::new() }
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn graph(&self) -> &DynamicGraph {
        &self.graph
    }

    /// The current edge set, gadget edges included.
    pub fn edge_set(&self) -> &BTreeSet<(usize, usize)> {
        &self.edges
    }

    pub fn insert(&mut self, u: usize, v: usize) -> Result<(), DynConnError> {
        if u >= self.s || v >= self.s {
            return Err(DynConnError::Range { vertex: u.max(v), n: self.s });
        }
        self.raw_insert(u, v)
    }

    pub fn delete(&mut self, u: usize, v: usize) -> Result<(), DynConnError> {
        if u >= self.s || v >= self.s {
            return Err(DynConnError::Range { vertex: u.max(v), n: self.s });
        }
        self.raw_delete(u, v)
    }

    fn raw_insert(&mut self, u: usize, v: usize) -> Result<(), DynConnError> {
        self.graph.insert(u, v)?;
        self.edges.insert(edge_key(u, v));
        Ok(())
    }

    fn raw_delete(&mut self, u: usize, v: usize) -> Result<(), DynConnError> {
        self.graph.delete(u, v)?;
        self.edges.remove(&edge_key(u, v));
        Ok(())
    }

    pub fn install_gadget(&mut self, first_column: &[usize]) -> Result<(), DynConnError> {
        if self.first_column.is_some() {
            return Err(DynConnError::State("gadget already installed".into()));
        }
        for &u in first_column {
            self.raw_insert(self.s, u)?;
        }
        self.first_column = Some(first_column.iter().copied().collect());
        Ok(())
    }

    pub fn whole_graph_connected(&self) -> bool {
        whole_graph_connected(&self.graph)
    }

    pub fn msf_cost_unit(&self) -> usize {
        msf_cost_unit(&self.graph)
    }

    /// Disconnects `u` from `s`, connects `v` to `s`, asks whether the whole
    /// graph is connected, then undoes both changes.
    pub fn reduce_connectivity_query_via_whole(&mut self, u: usize, v: usize) -> Result<bool, DynConnError> {
        let column = self.first_column.as_ref().ok_or_else(|| DynConnError::State("gadget not installed".into()))?;
        if !column.contains(&u) {
            return Err(DynConnError::State(format!("{u} is not a first-column vertex")));
        }
        if v >= self.s {
            return Err(DynConnError::Range { vertex: v, n: self.s });
        }
        let s = self.s;
        self.raw_delete(s, u)?;
        // v may already hang off s when it is itself in the first column
        let added = !self.graph.has_edge(s, v);
        if added {
            self.raw_insert(s, v)?;
        }
        let answer = self.whole_graph_connected();
        if added {
            self.raw_delete(s, v)?;
        }
        self.raw_insert(s, u)?;
        Ok(answer)
    }
}
