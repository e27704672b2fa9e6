use std::collections::HashMap;

use super::{edge_key, Connectivity, DynConnError};
use crate::memory::{CellMemory, PlainMemory};
use crate::rng::mix64;

const LEFT: u64 = 0;
const RIGHT: u64 = 1;
const PARENT: u64 = 2;
const NODE_CELLS: u64 = 3;

/// One element of an Euler tour: a vertex occurrence or a directed arc.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TourItem {
    Vertex(usize),
    Arc(usize, usize),
}

/// Euler tour trees over a treap whose links live in memory cells.
///
/// Each tree of the forest is stored as the in-order sequence of a treap:
/// one node per vertex plus one node per directed tree arc. A node owns
/// three cells (left, right, parent), each holding a node id plus one, zero
/// meaning none. Priorities are a hash of the node id and never stored.
/// Vertex `v` is node `v`; arc nodes are numbered from `n` and recycled.
#[derive(Debug, Clone)]
pub struct EulerTourForest<M = PlainMemory> {
    mem: M,
    n: usize,
    base: u64,
    seed: u64,
    arcs: Vec<Option<(usize, usize)>>,
    free: Vec<usize>,
    edges: HashMap<(usize, usize), (usize, usize)>,
    components: usize,
}

impl EulerTourForest {
    pub fn plain(n: usize) -> Self {
        Self::new(PlainMemory::new(64).expect("64-bit cells"), n, 0).expect("fresh memory")
    }
}

impl<M: CellMemory> EulerTourForest<M> {
    pub fn new(mut mem: M, n: usize, seed: u64) -> Result<Self, DynConnError> {
        let arc_slots = 2 * n.saturating_sub(1);
        let base = mem.alloc((n + arc_slots) as u64 * NODE_CELLS)?;
        Ok(Self {
            mem,
            n,
            base,
            seed,
            arcs: vec![None; arc_slots],
            free: (n..n + arc_slots).rev().collect(),
            edges: HashMap::new(),
            components: n,
        })
    }

    pub fn memory(&self) -> &M {
        &self.mem
    }

    pub fn memory_mut(&mut self) -> &mut M {
        &mut self.mem
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edges.contains_key(&edge_key(u, v))
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    fn check(&self, v: usize) -> Result<(), DynConnError> {
        if v >= self.n {
            return Err(DynConnError::Range { vertex: v, n: self.n });
        }
        Ok(())
    }

    fn priority(&self, x: usize) -> u64 {
        mix64(self.seed ^ mix64(x as u64))
    }

    fn get(&mut self, x: usize, field: u64) -> Result<Option<usize>, DynConnError> {
        let w = self.mem.read(self.base + x as u64 * NODE_CELLS + field)?;
        Ok((w as usize).checked_sub(1))
    }

    fn set(&mut self, x: usize, field: u64, to: Option<usize>) -> Result<(), DynConnError> {
        let w = to.map_or(0, |y| y as u128 + 1);
        self.mem.write(self.base + x as u64 * NODE_CELLS + field, w)?;
        Ok(())
    }

    fn set_parent(&mut self, x: Option<usize>, p: Option<usize>) -> Result<(), DynConnError> {
        match x {
            Some(x) => self.set(x, PARENT, p),
            None => Ok(()),
        }
    }

    fn root(&mut self, mut x: usize) -> Result<usize, DynConnError> {
        while let Some(p) = self.get(x, PARENT)? {
            x = p;
        }
        Ok(x)
    }

    /// Splits `x`'s tree into the part before `x` and the part from `x` on.
    fn split_before(&mut self, x: usize) -> Result<(Option<usize>, Option<usize>), DynConnError> {
        let mut l = self.get(x, LEFT)?;
        self.set(x, LEFT, None)?;
        let mut r = x;
        self.split_up(x, &mut l, &mut r)
    }

    /// Splits `x`'s tree into the part up to `x` and the part after it.
    fn split_after(&mut self, x: usize) -> Result<(Option<usize>, Option<usize>), DynConnError> {
        let mut r = self.get(x, RIGHT)?;
        self.set(x, RIGHT, None)?;
        let mut l = x;
        let (l_out, r_out) = self.split_up_mirror(x, &mut l, &mut r)?;
        Ok((l_out, r_out))
    }

    // Walks from x to the root, hanging each ancestor on whichever side it belongs to.
    fn split_up(
        &mut self,
        x: usize,
        l: &mut Option<usize>,
        r: &mut usize,
    ) -> Result<(Option<usize>, Option<usize>), DynConnError> {
        let mut cur = x;
        let mut up = self.get(x, PARENT)?;
        while let Some(p) = up {
            up = self.get(p, PARENT)?;
            if self.get(p, RIGHT)? == Some(cur) {
                self.set(p, RIGHT, *l)?;
                self.set_parent(*l, Some(p))?;
                *l = Some(p);
            } else {
                self.set(p, LEFT, Some(*r))?;
                self.set(*r, PARENT, Some(p))?;
                *r = p;
            }
            cur = p;
        }
        self.set_parent(*l, None)?;
        self.set(*r, PARENT, None)?;
        Ok((*l, Some(*r)))
    }

    fn split_up_mirror(
        &mut self,
        x: usize,
        l: &mut usize,
        r: &mut Option<usize>,
    ) -> Result<(Option<usize>, Option<usize>), DynConnError> {
        let mut cur = x;
        let mut up = self.get(x, PARENT)?;
        while let Some(p) = up {
            up = self.get(p, PARENT)?;
            if self.get(p, LEFT)? == Some(cur) {
                self.set(p, LEFT, *r)?;
                self.set_parent(*r, Some(p))?;
                *r = Some(p);
            } else {
                self.set(p, RIGHT, Some(*l))?;
                self.set(*l, PARENT, Some(p))?;
                *l = p;
            }
            cur = p;
        }
        self.set(*l, PARENT, None)?;
        self.set_parent(*r, None)?;
        Ok((Some(*l), *r))
    }

    /// Concatenates two treaps given by their roots.
    fn join(&mut self, a: Option<usize>, b: Option<usize>) -> Result<Option<usize>, DynConnError> {
        let root = self.join_rec(a, b)?;
        self.set_parent(root, None)?;
        Ok(root)
    }

    fn join_rec(&mut self, a: Option<usize>, b: Option<usize>) -> Result<Option<usize>, DynConnError> {
        let (a, b) = match (a, b) {
            (None, b) => return Ok(b),
            (a, None) => return Ok(a),
            (Some(a), Some(b)) => (a, b),
        };
        if self.priority(a) > self.priority(b) {
            let right = self.get(a, RIGHT)?;
            let sub = self.join_rec(right, Some(b))?;
            self.set(a, RIGHT, sub)?;
            self.set_parent(sub, Some(a))?;
            Ok(Some(a))
        } else {
            let left = self.get(b, LEFT)?;
            let sub = self.join_rec(Some(a), left)?;
            self.set(b, LEFT, sub)?;
            self.set_parent(sub, Some(b))?;
            Ok(Some(b))
        }
    }

    /// Rotates `u`'s tour to start at `u`; returns the new root.
    fn reroot(&mut self, u: usize) -> Result<usize, DynConnError> {
        let (l, r) = self.split_before(u)?;
        Ok(self.join(r, l)?.expect("tour contains u"))
    }

    fn fresh_arc(&mut self, a: usize, b: usize) -> Result<usize, DynConnError> {
        let x = self.free.pop().ok_or_else(|| DynConnError::State("arc pool exhausted".into()))?;
        self.arcs[x - self.n] = Some((a, b));
        for field in [LEFT, RIGHT, PARENT] {
            self.set(x, field, None)?;
        }
        Ok(x)
    }

    pub fn link(&mut self, u: usize, v: usize) -> Result<(), DynConnError> {
        self.check(u)?;
        self.check(v)?;
        if self.connected(u, v)? {
            return Err(DynConnError::Cycle { u, v });
        }
        let uv = self.fresh_arc(u, v)?;
        let vu = self.fresh_arc(v, u)?;
        let tu = self.reroot(u)?;
        let tv = self.reroot(v)?;
        let t = self.join(Some(tu), Some(uv))?;
        let t = self.join(t, Some(tv))?;
        self.join(t, Some(vu))?;
        let key = edge_key(u, v);
        self.edges.insert(key, if key.0 == u { (uv, vu) } else { (vu, uv) });
        self.components -= 1;
        Ok(())
    }

    pub fn cut(&mut self, u: usize, v: usize) -> Result<(), DynConnError> {
        self.check(u)?;
        self.check(v)?;
        let key = edge_key(u, v);
        let (lo_hi, hi_lo) = self.edges.remove(&key).ok_or(DynConnError::MissingEdge { u, v })?;
        let (uv, vu) = if key.0 == u { (lo_hi, hi_lo) } else { (hi_lo, lo_hi) };
        // with the tour starting at u, the arc u->v precedes v->u
        self.reroot(u)?;
        let (a, _) = self.split_before(uv)?;
        let (_, rest) = self.split_after(uv)?;
        debug_assert!(rest.is_some());
        self.split_before(vu)?;
        let (_, c) = self.split_after(vu)?;
        self.join(a, c)?;
        for x in [uv, vu] {
            self.arcs[x - self.n] = None;
            self.free.push(x);
        }
        self.components += 1;
        Ok(())
    }

    pub fn connected(&mut self, u: usize, v: usize) -> Result<bool, DynConnError> {
        self.check(u)?;
        self.check(v)?;
        Ok(u == v || self.root(u)? == self.root(v)?)
    }

    pub fn components(&self) -> usize {
        self.components
    }

    /// The Euler tour of `v`'s tree, read without probing.
    pub fn tour(&self, v: usize) -> Result<Vec<TourItem>, DynConnError> {
        self.check(v)?;
        let peek = |x: usize, field: u64| -> Result<Option<usize>, DynConnError> {
            Ok((self.mem.peek(self.base + x as u64 * NODE_CELLS + field)? as usize).checked_sub(1))
        };
        let mut root = v;
        while let Some(p) = peek(root, PARENT)? {
            root = p;
        }
        let mut out = Vec::new();
        let mut stack = Vec::new();
        let mut cur = Some(root);
        while cur.is_some() || !stack.is_empty() {
            while let Some(x) = cur {
                stack.push(x);
                cur = peek(x, LEFT)?;
            }
            let x = stack.pop().expect("nonempty stack");
            out.push(if x < self.n {
                TourItem::Vertex(x)
            } else {
                let (a, b) = self.arcs[x - self.n].ok_or_else(|| DynConnError::State("dangling arc node".into()))?;
                TourItem::Arc(a, b)
            });
            cur = peek(x, RIGHT)?;
        }
        Ok(out)
    }

    /// Checks that `v`'s tour is a closed walk over its tree's arcs with each
    /// vertex appearing once between an arc into it and an arc out of it.
    pub fn check_tour(&self, v: usize) -> Result<bool, DynConnError> {
        let tour = self.tour(v)?;
        let len = tour.len();
        let arcs: Vec<(usize, usize)> = tour
            .iter()
            .filter_map(|t| match *t {
                TourItem::Arc(a, b) => Some((a, b)),
                TourItem::Vertex(_) => None,
            })
            .collect();
        let vertices = len - arcs.len();
        if arcs.len() != 2 * (vertices - 1) {
            return Ok(false);
        }
        for i in 0..arcs.len() {
            let (_, b) = arcs[i];
            let (c, _) = arcs[(i + 1) % arcs.len()];
            if b != c {
                return Ok(false);
            }
        }
        for (i, item) in tour.iter().enumerate() {
            let TourItem::Vertex(x) = *item else { continue };
            if arcs.is_empty() {
                continue;
            }
            let before = (1..len).map(|d| tour[(i + len - d) % len]).find(|t| matches!(t, TourItem::Arc(..)));
            let after = (1..len).map(|d| tour[(i + d) % len]).find(|t| matches!(t, TourItem::Arc(..)));
            match (before, after) {
                (Some(TourItem::Arc(_, b)), Some(TourItem::Arc(a, _))) if b == x && a == x => {}
                _ => return Ok(false),
            }
        }
        Ok(true)
    }

    /// Height of the treap holding `v`, read without probing.
    pub fn treap_height(&self, v: usize) -> Result<usize, DynConnError> {
        let peek = |x: usize, field: u64| -> Result<Option<usize>, DynConnError> {
            Ok((self.mem.peek(self.base + x as u64 * NODE_CELLS + field)? as usize).checked_sub(1))
        };
        let mut root = v;
        while let Some(p) = peek(root, PARENT)? {
            root = p;
        }
        let mut best = 0;
        let mut stack = vec![(root, 1)];
        while let Some((x, d)) = stack.pop() {
            best = best.max(d);
            for f in [LEFT, RIGHT] {
                if let Some(c) = peek(x, f)? {
                    stack.push((c, d + 1));
                }
            }
        }
        Ok(best)
    }
}

impl<M: CellMemory> Connectivity for EulerTourForest<M> {
    fn num_vertices(&self) -> usize {
        self.n
    }

    fn insert(&mut self, u: usize, v: usize) -> Result<(), DynConnError> {
        self.link(u, v)
    }

    fn delete(&mut self, u: usize, v: usize) -> Result<(), DynConnError> {
        self.cut(u, v)
    }

    fn connected(&mut self, u: usize, v: usize) -> Result<bool, DynConnError> {
        EulerTourForest::connected(self, u, v)
    }

    fn components(&self) -> usize {
        self.components
    }
}
