//! GBS graph data model: validation, reducedness, sign normalisation, Betti
//! number and plateau detection.
//!
//! A GBS graph is a finite connected directed multigraph where every oriented
//! edge `e` carries a nonzero integer label `A(e)` at its origin; the label at
//! the terminus is `Omega(e) = A(e^-1)`. Only positive (declared) edges are
//! stored; inverse edges are implicit and addressed through [`OrientedEdge`].
//!
//! Vertices and edges carry stable string identifiers and all iteration
//! follows declaration order, so every downstream procedure is deterministic.

use std::collections::HashMap;
use std::fmt;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith;
use crate::Int;

/// A single named violation found while validating a raw graph description.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    DanglingEndpoint { edge: String, vertex: String },
    ZeroLabel { edge: String },
    Disconnected,
    Empty,
    DuplicateVertex { vertex: String },
    DuplicateEdge { edge: String },
    BadLabel { edge: String, text: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DanglingEndpoint { edge, vertex } => {
                write!(
                    f,
                    "dangling endpoint: edge {edge} references unknown vertex {vertex}"
                )
            }
            Violation::ZeroLabel { edge } => write!(f, "zero label on edge {edge}"),
            Violation::Disconnected => write!(f, "disconnected graph"),
            Violation::Empty => write!(f, "graph has no vertices"),
            Violation::DuplicateVertex { vertex } => write!(f, "duplicate vertex id {vertex}"),
            Violation::DuplicateEdge { edge } => write!(f, "duplicate edge id {edge}"),
            Violation::BadLabel { edge, text } => {
                write!(f, "edge {edge}: label {text:?} is not a decimal integer")
            }
        }
    }
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("invalid graph: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
    #[error("graph JSON: {0}")]
    Json(#[from] serde_json::Error),
}

/// One positive edge of a GBS graph. `a` is the label at `source`, `omega`
/// the label at `target`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GbsEdge {
    pub id: String,
    pub source: usize,
    pub target: usize,
    pub a: Int,
    pub omega: Int,
}

impl GbsEdge {
    pub fn is_loop(&self) -> bool {
        self.source == self.target
    }
}

/// Which end of a positive edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum End {
    Source,
    Target,
}

/// An edge end: the basic unit moved around by slide moves and star
/// partitions. Both ends of a loop are distinct `EndRef`s.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EndRef {
    pub edge: usize,
    pub end: End,
}

/// A positive edge together with a traversal direction. The reversed
/// orientation swaps `A` and `Omega`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OrientedEdge {
    pub edge: usize,
    pub reversed: bool,
}

impl OrientedEdge {
    pub fn forward(edge: usize) -> Self {
        OrientedEdge {
            edge,
            reversed: false,
        }
    }
    pub fn backward(edge: usize) -> Self {
        OrientedEdge {
            edge,
            reversed: true,
        }
    }
}

/// A validated GBS graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GbsGraph {
    vertices: Vec<String>,
    edges: Vec<GbsEdge>,
}

#[derive(Serialize, Deserialize)]
struct RawEdge {
    id: String,
    from: String,
    to: String,
    a: String,
    omega: String,
}

#[derive(Serialize, Deserialize)]
struct RawGraph {
    vertices: Vec<String>,
    edges: Vec<RawEdge>,
}

impl GbsGraph {
    /// Validate a raw description. Violations are collected, not
    /// short-circuited.
    pub fn new(
        vertices: Vec<String>,
        edges: Vec<(String, String, String, Int, Int)>,
    ) -> Result<Self, GraphError> {
        let mut violations = Vec::new();
        let mut vindex: HashMap<&str, usize> = HashMap::new();
        for (i, v) in vertices.iter().enumerate() {
            if vindex.insert(v.as_str(), i).is_some() {
                violations.push(Violation::DuplicateVertex { vertex: v.clone() });
            }
        }
        let mut eids: HashMap<&str, ()> = HashMap::new();
        let mut built = Vec::with_capacity(edges.len());
        for (id, from, to, a, omega) in &edges {
            if eids.insert(id.as_str(), ()).is_some() {
                violations.push(Violation::DuplicateEdge { edge: id.clone() });
            }
            let s = vindex.get(from.as_str()).copied();
            let t = vindex.get(to.as_str()).copied();
            if s.is_none() {
                violations.push(Violation::DanglingEndpoint {
                    edge: id.clone(),
                    vertex: from.clone(),
                });
            }
            if t.is_none() {
                violations.push(Violation::DanglingEndpoint {
                    edge: id.clone(),
                    vertex: to.clone(),
                });
            }
            if a.is_zero() || omega.is_zero() {
                violations.push(Violation::ZeroLabel { edge: id.clone() });
            }
            if let (Some(s), Some(t)) = (s, t) {
                built.push(GbsEdge {
                    id: id.clone(),
                    source: s,
                    target: t,
                    a: a.clone(),
                    omega: omega.clone(),
                });
            }
        }
        if vertices.is_empty() {
            violations.push(Violation::Empty);
        }
        if violations.is_empty() {
            let g = GbsGraph {
                vertices,
                edges: built,
            };
            if !g.is_connected() {
                return Err(GraphError::Invalid(vec![Violation::Disconnected]));
            }
            Ok(g)
        } else {
            Err(GraphError::Invalid(violations))
        }
    }

    /// Single-vertex, single-loop graph of the Baumslag-Solitar group
    /// `BS(m,n)`.
    pub fn bs(m: impl Into<Int>, n: impl Into<Int>) -> Self {
        Self::bouquet(&[(m.into(), n.into())])
    }

    /// One vertex `v` with loops `e0..e{k-1}` carrying the given `(A, Omega)`
    /// pairs.
    pub fn bouquet(labels: &[(Int, Int)]) -> Self {
        let edges = labels
            .iter()
            .enumerate()
            .map(|(i, (a, o))| {
                (
                    format!("e{i}"),
                    "v".to_string(),
                    "v".to_string(),
                    a.clone(),
                    o.clone(),
                )
            })
            .collect();
        Self::new(vec!["v".to_string()], edges).expect("bouquet labels must be nonzero")
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex_id(&self, v: usize) -> &str {
        &self.vertices[v]
    }

    pub fn vertex_ids(&self) -> impl Iterator<Item = &str> {
        self.vertices.iter().map(|s| s.as_str())
    }

    pub fn edges(&self) -> &[GbsEdge] {
        &self.edges
    }

    pub fn edge(&self, idx: usize) -> &GbsEdge {
        &self.edges[idx]
    }

    pub fn vertex_index(&self, id: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v == id)
    }

    pub fn edge_index(&self, id: &str) -> Option<usize> {
        self.edges.iter().position(|e| e.id == id)
    }

    pub fn origin(&self, oe: OrientedEdge) -> usize {
        let e = &self.edges[oe.edge];
        if oe.reversed {
            e.target
        } else {
            e.source
        }
    }

    pub fn terminus(&self, oe: OrientedEdge) -> usize {
        let e = &self.edges[oe.edge];
        if oe.reversed {
            e.source
        } else {
            e.target
        }
    }

    /// Label at the origin of the oriented edge: `A(e^-1) = Omega(e)`.
    pub fn a_label(&self, oe: OrientedEdge) -> &Int {
        let e = &self.edges[oe.edge];
        if oe.reversed {
            &e.omega
        } else {
            &e.a
        }
    }

    pub fn omega_label(&self, oe: OrientedEdge) -> &Int {
        let e = &self.edges[oe.edge];
        if oe.reversed {
            &e.a
        } else {
            &e.omega
        }
    }

    /// Both orientations of every positive edge, declaration order, forward
    /// before backward.
    pub fn oriented_edges(&self) -> impl Iterator<Item = OrientedEdge> {
        (0..self.edges.len()).flat_map(|i| [OrientedEdge::forward(i), OrientedEdge::backward(i)])
    }

    pub fn end_vertex(&self, r: EndRef) -> usize {
        let e = &self.edges[r.edge];
        match r.end {
            End::Source => e.source,
            End::Target => e.target,
        }
    }

    pub fn end_label(&self, r: EndRef) -> &Int {
        let e = &self.edges[r.edge];
        match r.end {
            End::Source => &e.a,
            End::Target => &e.omega,
        }
    }

    /// Edge ends incident to `v` in declaration order (source end before
    /// target end); a loop contributes both of its ends.
    pub fn ends_at(&self, v: usize) -> Vec<EndRef> {
        let mut out = Vec::new();
        for (i, e) in self.edges.iter().enumerate() {
            if e.source == v {
                out.push(EndRef {
                    edge: i,
                    end: End::Source,
                });
            }
            if e.target == v {
                out.push(EndRef {
                    edge: i,
                    end: End::Target,
                });
            }
        }
        out
    }

    /// Degree of `v`; a loop contributes 2.
    pub fn degree(&self, v: usize) -> usize {
        self.ends_at(v).len()
    }

    fn is_connected(&self) -> bool {
        if self.vertices.is_empty() {
            return false;
        }
        let mut seen = vec![false; self.vertices.len()];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for e in &self.edges {
                for (x, y) in [(e.source, e.target), (e.target, e.source)] {
                    if x == v && !seen[y] {
                        seen[y] = true;
                        stack.push(y);
                    }
                }
            }
        }
        seen.into_iter().all(|b| b)
    }

    /// True iff every non-loop edge has both labels different from `±1`.
    /// Loops are exempt.
    pub fn is_reduced(&self) -> bool {
        self.edges
            .iter()
            .all(|e| e.is_loop() || (e.a.abs() != Int::from(1) && e.omega.abs() != Int::from(1)))
    }

    /// First Betti number `E - V + 1` of the underlying connected graph;
    /// equals the rank of the quotient of the GBS group by all elliptic
    /// elements.
    pub fn betti_number(&self) -> usize {
        self.edges.len() + 1 - self.vertices.len()
    }

    /// Greedy deterministic sign normalisation.
    ///
    /// Available sign moves: negating both labels of one edge, or negating
    /// every label at one vertex; neither changes the group. We scan vertices
    /// in declaration order, flipping whenever that strictly lowers the
    /// number of mixed-sign edges, then pick the per-edge representative:
    /// both labels positive where possible, otherwise the negative sign on
    /// `A`. Loops with both labels negative become positive; a mixed-sign
    /// loop is stuck mixed (both sign moves negate both of its labels).
    pub fn sign_normalize(&self) -> GbsGraph {
        let mut g = self.clone();
        // Mixed-sign status is the per-edge minimum of negatives; vertex
        // flips toggle it for incident non-loop edges only.
        loop {
            let mut improved = false;
            for v in 0..g.vertices.len() {
                let mut mixed = 0isize;
                let mut same = 0isize;
                for e in &g.edges {
                    if e.is_loop() {
                        continue;
                    }
                    if e.source == v || e.target == v {
                        if e.a.is_negative() == e.omega.is_negative() {
                            same += 1;
                        } else {
                            mixed += 1;
                        }
                    }
                }
                if mixed > same {
                    for e in &mut g.edges {
                        if e.is_loop() {
                            if e.source == v {
                                e.a = -e.a.clone();
                                e.omega = -e.omega.clone();
                            }
                            continue;
                        }
                        if e.source == v {
                            e.a = -e.a.clone();
                        }
                        if e.target == v {
                            e.omega = -e.omega.clone();
                        }
                    }
                    improved = true;
                }
            }
            if !improved {
                break;
            }
        }
        for e in &mut g.edges {
            let flip = if e.a.is_negative() == e.omega.is_negative() {
                e.a.is_negative()
            } else {
                // Mixed: canonical representative has the sign on A.
                e.omega.is_negative()
            };
            if flip {
                e.a = -e.a.clone();
                e.omega = -e.omega.clone();
            }
        }
        g
    }

    /// Search for a proper plateau.
    ///
    /// For each prime `p` dividing some label (ascending) and each seed
    /// vertex (declaration order), grow the closure: starting from the seed,
    /// add the terminus and the underlying edge of every oriented edge whose
    /// origin is inside and whose `A`-label `p` does not divide. The result
    /// is a `p`-plateau iff no oriented edge from the closure with
    /// `p | A(e)` has its underlying edge inside. The first proper plateau
    /// found is returned.
    pub fn find_proper_plateau(&self) -> Option<Plateau> {
        let mut primes: Vec<Int> = Vec::new();
        for e in &self.edges {
            for lbl in [&e.a, &e.omega] {
                for (p, _) in arith::factorize(&lbl.abs()) {
                    if !primes.contains(&p) {
                        primes.push(p);
                    }
                }
            }
        }
        primes.sort();

        for p in &primes {
            for seed in 0..self.vertices.len() {
                if let Some(plateau) = self.plateau_closure(p, seed) {
                    return Some(plateau);
                }
            }
        }
        None
    }

    fn plateau_closure(&self, p: &Int, seed: usize) -> Option<Plateau> {
        let mut in_v = vec![false; self.vertices.len()];
        let mut in_e = vec![false; self.edges.len()];
        in_v[seed] = true;
        loop {
            let mut changed = false;
            for oe in self.oriented_edges() {
                if in_v[self.origin(oe)]
                    && !(self.a_label(oe) % p).is_zero()
                    && !(in_e[oe.edge] && in_v[self.terminus(oe)])
                {
                    in_e[oe.edge] = true;
                    in_v[self.terminus(oe)] = true;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        // Consistency: an oriented edge from the closure whose A-label p
        // divides must lie outside it.
        for oe in self.oriented_edges() {
            if in_v[self.origin(oe)] && (self.a_label(oe) % p).is_zero() && in_e[oe.edge] {
                return None;
            }
        }
        let proper = in_v.iter().any(|b| !b) || in_e.iter().any(|b| !b);
        if !proper {
            return None;
        }
        Some(Plateau {
            prime: p.clone(),
            vertices: in_v
                .iter()
                .enumerate()
                .filter(|(_, b)| **b)
                .map(|(i, _)| self.vertices[i].clone())
                .collect(),
            edges: in_e
                .iter()
                .enumerate()
                .filter(|(_, b)| **b)
                .map(|(i, _)| self.edges[i].id.clone())
                .collect(),
        })
    }

    pub fn from_json(s: &str) -> Result<Self, GraphError> {
        let raw: RawGraph = serde_json::from_str(s)?;
        let mut violations = Vec::new();
        let mut edges = Vec::with_capacity(raw.edges.len());
        for e in &raw.edges {
            let a = parse_label(&e.a, &e.id, &mut violations);
            let omega = parse_label(&e.omega, &e.id, &mut violations);
            edges.push((e.id.clone(), e.from.clone(), e.to.clone(), a, omega));
        }
        if !violations.is_empty() {
            return Err(GraphError::Invalid(violations));
        }
        Self::new(raw.vertices, edges)
    }

    /// Canonical JSON encoding; labels as decimal strings. Parsing the
    /// output reproduces the graph bit-exactly.
    pub fn to_json(&self) -> String {
        let raw = RawGraph {
            vertices: self.vertices.clone(),
            edges: self
                .edges
                .iter()
                .map(|e| RawEdge {
                    id: e.id.clone(),
                    from: self.vertices[e.source].clone(),
                    to: self.vertices[e.target].clone(),
                    a: e.a.to_string(),
                    omega: e.omega.to_string(),
                })
                .collect(),
        };
        serde_json::to_string(&raw).expect("graph serialization cannot fail")
    }

    // ---- mutation helpers for the move engine ----

    pub(crate) fn set_end_label(&mut self, r: EndRef, value: Int) {
        debug_assert!(!value.is_zero());
        let e = &mut self.edges[r.edge];
        match r.end {
            End::Source => e.a = value,
            End::Target => e.omega = value,
        }
    }

    pub(crate) fn set_end_vertex(&mut self, r: EndRef, v: usize) {
        let e = &mut self.edges[r.edge];
        match r.end {
            End::Source => e.source = v,
            End::Target => e.target = v,
        }
    }

    pub(crate) fn push_vertex(&mut self, id: String) -> usize {
        debug_assert!(self.vertex_index(&id).is_none());
        self.vertices.push(id);
        self.vertices.len() - 1
    }

    /// Remove a vertex with no incident edges, shifting higher indices down.
    pub(crate) fn remove_isolated_vertex(&mut self, v: usize) {
        debug_assert!(self.edges.iter().all(|e| e.source != v && e.target != v));
        self.vertices.remove(v);
        for e in &mut self.edges {
            if e.source > v {
                e.source -= 1;
            }
            if e.target > v {
                e.target -= 1;
            }
        }
    }

    pub(crate) fn push_edge(&mut self, e: GbsEdge) -> usize {
        debug_assert!(self.edge_index(&e.id).is_none());
        self.edges.push(e);
        self.edges.len() - 1
    }

    pub(crate) fn remove_edge_at(&mut self, idx: usize) -> GbsEdge {
        self.edges.remove(idx)
    }

    pub(crate) fn replace_edge_at(&mut self, idx: usize, e: GbsEdge) {
        self.edges[idx] = e;
    }

    #[cfg(debug_assertions)]
    pub(crate) fn assert_valid(&self) {
        assert!(self.is_connected(), "graph must stay connected");
        for e in &self.edges {
            assert!(
                !e.a.is_zero() && !e.omega.is_zero(),
                "labels must stay nonzero"
            );
            assert!(e.source < self.vertices.len() && e.target < self.vertices.len());
        }
    }
}

fn parse_label(text: &str, edge: &str, violations: &mut Vec<Violation>) -> Int {
    match text.parse::<Int>() {
        Ok(v) => v,
        Err(_) => {
            violations.push(Violation::BadLabel {
                edge: edge.to_string(),
                text: text.to_string(),
            });
            Int::from(1)
        }
    }
}

/// A connected subgraph where a fixed prime divides exactly the `A`-labels
/// of oriented edges that start inside it but lie outside it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plateau {
    pub prime: Int,
    pub vertices: Vec<String>,
    pub edges: Vec<String>,
}
