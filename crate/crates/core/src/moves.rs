//! Elementary deformations and reduced-graph moves with legality checking,
//! plus a seeded random move-sequence generator for property testing.
//!
//! Move semantics follow the standard deformation-space pictures:
//!
//! * collapse of a non-loop edge with a `±1` label absorbs the unit-side
//!   vertex, multiplying every other label there by `A(e)·Omega(e)`;
//!   expansion is its inverse and takes the extracted star explicitly;
//! * a slide moves one edge end along an oriented edge `F` it is incident
//!   to, exchanging a factor `A(F)` for `Omega(F)` (exact division only);
//! * induction over a loop with one unit label multiplies every other end
//!   at its vertex by a positive divisor of the non-unit label;
//! * the A-move splits a loop `(k, k·l·m)` into a degree-3 vertex carrying a
//!   strictly ascending loop `(1, l·m)` and a connecting edge `(l, k)`; the
//!   inverse collapses that configuration back.
//!
//! Moves identify graph elements by their stable string ids, so a serialized
//! move log can be replayed against a reparsed graph.

use num_traits::{Signed, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith;
use crate::graph::{End, EndRef, GbsEdge, GbsGraph, OrientedEdge};
use crate::Int;

/// One end of a named edge, as referenced by a move.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveEnd {
    pub edge: String,
    pub end: End,
}

impl MoveEnd {
    pub fn source(edge: impl Into<String>) -> Self {
        MoveEnd {
            edge: edge.into(),
            end: End::Source,
        }
    }
    pub fn target(edge: impl Into<String>) -> Self {
        MoveEnd {
            edge: edge.into(),
            end: End::Target,
        }
    }
}

/// A deformation move. All factors are exact integers; a move whose division
/// does not come out exact is illegal rather than rational-valued.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Move {
    /// Collapse a non-loop edge one of whose labels is `±1`.
    Collapse { edge: String },
    /// Split `vertex`: a new vertex is created, joined by an edge
    /// `(factor, 1)`, and the listed ends move there divided by `factor`.
    Expansion {
        vertex: String,
        #[serde(with = "crate::int_string")]
        factor: Int,
        moved_ends: Vec<MoveEnd>,
    },
    /// Slide `moved` over the loop `over` a signed number of times
    /// (negative counts slide over the inverse orientation).
    SlideOverLoop {
        moved: MoveEnd,
        over: String,
        count: i64,
    },
    /// Slide `moved` over a non-loop edge, from its origin to its terminus.
    SlideOverEdge {
        moved: MoveEnd,
        over: String,
        over_reversed: bool,
    },
    /// Multiply every end at the loop's vertex (except the loop itself) by
    /// `factor`, a positive divisor of the loop's non-unit label.
    Induction {
        loop_edge: String,
        #[serde(with = "crate::int_string")]
        factor: Int,
    },
    /// Split a loop `(k, k·Q)` into a strictly ascending loop `(1, Q)` at a
    /// new degree-3 vertex plus a connecting edge `(factor, k)`.
    AMove {
        loop_edge: String,
        #[serde(with = "crate::int_string")]
        factor: Int,
    },
    /// Collapse the A-move configuration at the degree-3 endpoint of `edge`
    /// back into a single loop.
    AInverse { edge: String },
}

#[derive(Debug, Error)]
pub enum MoveError {
    #[error("unknown graph element: {0}")]
    UnknownElement(String),
    #[error("illegal move: {0}")]
    Illegal(String),
}

fn illegal<T>(msg: impl Into<String>) -> Result<T, MoveError> {
    Err(MoveError::Illegal(msg.into()))
}

fn edge_idx(g: &GbsGraph, id: &str) -> Result<usize, MoveError> {
    g.edge_index(id)
        .ok_or_else(|| MoveError::UnknownElement(format!("edge {id}")))
}

fn end_ref(g: &GbsGraph, me: &MoveEnd) -> Result<EndRef, MoveError> {
    Ok(EndRef {
        edge: edge_idx(g, &me.edge)?,
        end: me.end,
    })
}

fn divides(d: &Int, x: &Int) -> bool {
    !d.is_zero() && (x % d).is_zero()
}

/// Apply a move, returning the deformed graph. The input is untouched; the
/// defined GBS group is unchanged by construction.
pub fn apply(g: &GbsGraph, mv: &Move) -> Result<GbsGraph, MoveError> {
    let out = match mv {
        Move::Collapse { edge } => apply_collapse(g, edge),
        Move::Expansion {
            vertex,
            factor,
            moved_ends,
        } => apply_expansion(g, vertex, factor, moved_ends),
        Move::SlideOverLoop { moved, over, count } => apply_slide_loop(g, moved, over, *count),
        Move::SlideOverEdge {
            moved,
            over,
            over_reversed,
        } => apply_slide_edge(g, moved, over, *over_reversed),
        Move::Induction { loop_edge, factor } => apply_induction(g, loop_edge, factor),
        Move::AMove { loop_edge, factor } => apply_a_move(g, loop_edge, factor),
        Move::AInverse { edge } => apply_a_inverse(g, edge),
    }?;
    #[cfg(debug_assertions)]
    out.assert_valid();
    Ok(out)
}

fn apply_collapse(g: &GbsGraph, edge: &str) -> Result<GbsGraph, MoveError> {
    let idx = edge_idx(g, edge)?;
    let e = g.edge(idx);
    if e.is_loop() {
        return illegal(format!("collapse: edge {edge} is a loop"));
    }
    let one = Int::from(1);
    let (absorbed, kept) = if e.omega.abs() == one {
        (e.target, e.source)
    } else if e.a.abs() == one {
        (e.source, e.target)
    } else {
        return illegal(format!("collapse: edge {edge} has no ±1 label"));
    };
    // Every label at the absorbed vertex is multiplied by the label at the
    // kept side, carrying the sign of the unit label.
    let factor = {
        let (unit, other) = if absorbed == e.target {
            (&e.omega, &e.a)
        } else {
            (&e.a, &e.omega)
        };
        other * unit
    };
    let mut out = g.clone();
    out.remove_edge_at(idx);
    for r in out.ends_at(absorbed) {
        let lbl = out.end_label(r) * &factor;
        out.set_end_label(r, lbl);
        out.set_end_vertex(r, kept);
    }
    out.remove_isolated_vertex(absorbed);
    Ok(out)
}

fn apply_expansion(
    g: &GbsGraph,
    vertex: &str,
    factor: &Int,
    moved_ends: &[MoveEnd],
) -> Result<GbsGraph, MoveError> {
    let v = g
        .vertex_index(vertex)
        .ok_or_else(|| MoveError::UnknownElement(format!("vertex {vertex}")))?;
    if factor.is_zero() {
        return illegal("expansion: zero factor");
    }
    let mut refs = Vec::with_capacity(moved_ends.len());
    for me in moved_ends {
        let r = end_ref(g, me)?;
        if g.end_vertex(r) != v {
            return illegal(format!(
                "expansion: end of {} is not at vertex {vertex}",
                me.edge
            ));
        }
        if refs.contains(&r) {
            return illegal(format!("expansion: duplicate end of {}", me.edge));
        }
        if !divides(factor, g.end_label(r)) {
            return illegal(format!(
                "expansion: factor does not divide the label of {}",
                me.edge
            ));
        }
        refs.push(r);
    }
    let new_vertex = format!("{vertex}.x");
    let new_edge = format!("{vertex}.xe");
    if g.vertex_index(&new_vertex).is_some() || g.edge_index(&new_edge).is_some() {
        return illegal(format!(
            "expansion: derived identifier {new_vertex} already in use"
        ));
    }
    let mut out = g.clone();
    let w = out.push_vertex(new_vertex);
    for r in refs {
        let lbl = out.end_label(r) / factor;
        out.set_end_label(r, lbl);
        out.set_end_vertex(r, w);
    }
    out.push_edge(GbsEdge {
        id: new_edge,
        source: v,
        target: w,
        a: factor.clone(),
        omega: Int::from(1),
    });
    Ok(out)
}

fn slide_once(g: &mut GbsGraph, moved: EndRef, over: OrientedEdge) -> Result<(), MoveError> {
    if g.origin(over) != g.end_vertex(moved) {
        return illegal("slide: end is not at the origin of the slide edge");
    }
    if over.edge == moved.edge {
        return illegal("slide: an edge cannot slide over itself");
    }
    let a = g.a_label(over).clone();
    let lbl = g.end_label(moved).clone();
    if !divides(&a, &lbl) {
        return illegal("slide: A-label of the slide edge does not divide the moved label");
    }
    let new_lbl = &lbl / &a * g.omega_label(over);
    g.set_end_label(moved, new_lbl);
    g.set_end_vertex(moved, g.terminus(over));
    Ok(())
}

fn apply_slide_loop(
    g: &GbsGraph,
    moved: &MoveEnd,
    over: &str,
    count: i64,
) -> Result<GbsGraph, MoveError> {
    let over_idx = edge_idx(g, over)?;
    if !g.edge(over_idx).is_loop() {
        return illegal(format!("slide over loop: edge {over} is not a loop"));
    }
    let moved = end_ref(g, moved)?;
    let mut out = g.clone();
    let oriented = if count >= 0 {
        OrientedEdge::forward(over_idx)
    } else {
        OrientedEdge::backward(over_idx)
    };
    for _ in 0..count.unsigned_abs() {
        slide_once(&mut out, moved, oriented)?;
    }
    Ok(out)
}

fn apply_slide_edge(
    g: &GbsGraph,
    moved: &MoveEnd,
    over: &str,
    over_reversed: bool,
) -> Result<GbsGraph, MoveError> {
    let over_idx = edge_idx(g, over)?;
    if g.edge(over_idx).is_loop() {
        return illegal(format!("slide over edge: edge {over} is a loop"));
    }
    let moved = end_ref(g, moved)?;
    let mut out = g.clone();
    slide_once(
        &mut out,
        moved,
        OrientedEdge {
            edge: over_idx,
            reversed: over_reversed,
        },
    )?;
    Ok(out)
}

/// Orient a loop so that the unit (`±1`) label comes first; `None` when
/// neither label is `±1`.
fn unit_orientation(g: &GbsGraph, idx: usize) -> Option<OrientedEdge> {
    let e = g.edge(idx);
    let one = Int::from(1);
    if e.a.abs() == one {
        Some(OrientedEdge::forward(idx))
    } else if e.omega.abs() == one {
        Some(OrientedEdge::backward(idx))
    } else {
        None
    }
}

fn apply_induction(g: &GbsGraph, loop_edge: &str, factor: &Int) -> Result<GbsGraph, MoveError> {
    let idx = edge_idx(g, loop_edge)?;
    if !g.edge(idx).is_loop() {
        return illegal(format!("induction: edge {loop_edge} is not a loop"));
    }
    let oriented = unit_orientation(g, idx).ok_or_else(|| {
        MoveError::Illegal(format!("induction: loop {loop_edge} has no ±1 label"))
    })?;
    if !factor.is_positive() {
        return illegal("induction: factor must be a positive integer");
    }
    let big = g.omega_label(oriented).clone();
    if !divides(factor, &big) {
        return illegal("induction: factor does not divide the non-unit loop label");
    }
    let v = g.origin(oriented);
    let mut out = g.clone();
    for r in out.ends_at(v) {
        if r.edge == idx {
            continue;
        }
        let lbl = out.end_label(r) * factor;
        out.set_end_label(r, lbl);
    }
    Ok(out)
}

/// Orient a loop so that `A` divides `Omega` with quotient of absolute value
/// at least 2.
fn dividing_orientation(g: &GbsGraph, idx: usize) -> Option<OrientedEdge> {
    for oe in [OrientedEdge::forward(idx), OrientedEdge::backward(idx)] {
        let a = g.a_label(oe);
        let o = g.omega_label(oe);
        if divides(a, o) && (o / a).abs() >= Int::from(2) {
            return Some(oe);
        }
    }
    None
}

fn apply_a_move(g: &GbsGraph, loop_edge: &str, factor: &Int) -> Result<GbsGraph, MoveError> {
    let idx = edge_idx(g, loop_edge)?;
    if !g.edge(idx).is_loop() {
        return illegal(format!("A-move: edge {loop_edge} is not a loop"));
    }
    let oriented = dividing_orientation(g, idx).ok_or_else(|| {
        MoveError::Illegal(format!(
            "A-move: loop {loop_edge} does not split as (k, k·Q) with |Q| ≥ 2"
        ))
    })?;
    let k = g.a_label(oriented).clone();
    let q = g.omega_label(oriented) / &k;
    if !factor.is_positive() || !divides(factor, &q) {
        return illegal("A-move: factor must be a positive divisor of the loop quotient");
    }
    let w = g.origin(oriented);
    let new_vertex = format!("{loop_edge}.v");
    let new_loop = format!("{loop_edge}.f");
    if g.vertex_index(&new_vertex).is_some() || g.edge_index(&new_loop).is_some() {
        return illegal(format!(
            "A-move: derived identifier {new_vertex} already in use"
        ));
    }
    let mut out = g.clone();
    let v = out.push_vertex(new_vertex);
    out.replace_edge_at(
        idx,
        GbsEdge {
            id: loop_edge.to_string(),
            source: v,
            target: w,
            a: factor.clone(),
            omega: k,
        },
    );
    out.push_edge(GbsEdge {
        id: new_loop,
        source: v,
        target: v,
        a: Int::from(1),
        omega: q,
    });
    Ok(out)
}

/// The A-inverse configuration at one endpoint of a non-loop edge: the
/// degree-3 vertex, the strictly ascending loop there, and the unit sign.
fn a_inverse_config(g: &GbsGraph, idx: usize) -> Option<(usize, usize, OrientedEdge)> {
    let e = g.edge(idx);
    for u in [e.source, e.target] {
        let ends = g.ends_at(u);
        if ends.len() != 3 {
            continue;
        }
        let others: Vec<EndRef> = ends.into_iter().filter(|r| r.edge != idx).collect();
        if others.len() != 2 || others[0].edge != others[1].edge {
            continue;
        }
        let loop_idx = others[0].edge;
        if !g.edge(loop_idx).is_loop() {
            continue;
        }
        let Some(oriented) = unit_orientation(g, loop_idx) else {
            continue;
        };
        // Strictly ascending: the other label has absolute value > 1.
        if g.omega_label(oriented).abs() <= Int::from(1) {
            continue;
        }
        // The connecting label at u must divide the non-unit loop label.
        let here = if u == e.source { &e.a } else { &e.omega };
        if !divides(here, g.omega_label(oriented)) {
            continue;
        }
        return Some((u, loop_idx, oriented));
    }
    None
}

fn apply_a_inverse(g: &GbsGraph, edge: &str) -> Result<GbsGraph, MoveError> {
    let idx = edge_idx(g, edge)?;
    if g.edge(idx).is_loop() {
        return illegal(format!("A-inverse: edge {edge} is a loop"));
    }
    let Some((u, loop_idx, loop_or)) = a_inverse_config(g, idx) else {
        return illegal(format!(
            "A-inverse: neither endpoint of {edge} is a degree-3 vertex with a \
             strictly ascending loop whose label its connecting label divides"
        ));
    };
    let e = g.edge(idx);
    let (w, k) = if u == e.source {
        (e.target, e.omega.clone())
    } else {
        (e.source, e.a.clone())
    };
    let unit = g.a_label(loop_or).clone();
    let big = g.omega_label(loop_or).clone();
    let new_omega = &k * &unit * &big;
    let mut out = g.clone();
    out.replace_edge_at(
        idx,
        GbsEdge {
            id: edge.to_string(),
            source: w,
            target: w,
            a: k,
            omega: new_omega,
        },
    );
    out.remove_edge_at(loop_idx);
    out.remove_isolated_vertex(u);
    Ok(out)
}

/// Enumerate legal moves in deterministic order.
///
/// Slides are enumerated with count `±1` only; induction and A-move factors
/// range over the positive divisors of the relevant label (omitting the
/// identity induction `factor = 1`). Expansions are not enumerated: their
/// parameter space (factor × star partition) is unbounded, so they are only
/// reachable through [`apply`] with explicit parameters.
pub fn legal_moves(g: &GbsGraph) -> Vec<Move> {
    let mut out = Vec::new();
    let one = Int::from(1);

    for e in g.edges() {
        if !e.is_loop() && (e.a.abs() == one || e.omega.abs() == one) {
            out.push(Move::Collapse { edge: e.id.clone() });
        }
    }

    for (idx, e) in g.edges().iter().enumerate() {
        if !e.is_loop() {
            continue;
        }
        let v = e.source;
        for r in g.ends_at(v) {
            if r.edge == idx {
                continue;
            }
            let me = MoveEnd {
                edge: g.edge(r.edge).id.clone(),
                end: r.end,
            };
            if divides(&e.a, g.end_label(r)) {
                out.push(Move::SlideOverLoop {
                    moved: me.clone(),
                    over: e.id.clone(),
                    count: 1,
                });
            }
            if divides(&e.omega, g.end_label(r)) {
                out.push(Move::SlideOverLoop {
                    moved: me,
                    over: e.id.clone(),
                    count: -1,
                });
            }
        }
    }

    for (idx, e) in g.edges().iter().enumerate() {
        if e.is_loop() {
            continue;
        }
        for reversed in [false, true] {
            let oe = OrientedEdge {
                edge: idx,
                reversed,
            };
            let u = g.origin(oe);
            for r in g.ends_at(u) {
                if r.edge == idx {
                    continue;
                }
                if divides(g.a_label(oe), g.end_label(r)) {
                    out.push(Move::SlideOverEdge {
                        moved: MoveEnd {
                            edge: g.edge(r.edge).id.clone(),
                            end: r.end,
                        },
                        over: e.id.clone(),
                        over_reversed: reversed,
                    });
                }
            }
        }
    }

    for (idx, e) in g.edges().iter().enumerate() {
        if !e.is_loop() {
            continue;
        }
        if let Some(oriented) = unit_orientation(g, idx) {
            let big = g.omega_label(oriented).abs();
            for d in arith::divisors(&big) {
                if d > one {
                    out.push(Move::Induction {
                        loop_edge: e.id.clone(),
                        factor: d,
                    });
                }
            }
        }
    }

    for (idx, e) in g.edges().iter().enumerate() {
        if !e.is_loop() {
            continue;
        }
        if let Some(oriented) = dividing_orientation(g, idx) {
            if g.vertex_index(&format!("{}.v", e.id)).is_some()
                || g.edge_index(&format!("{}.f", e.id)).is_some()
            {
                continue;
            }
            let q = (g.omega_label(oriented) / g.a_label(oriented)).abs();
            for d in arith::divisors(&q) {
                out.push(Move::AMove {
                    loop_edge: e.id.clone(),
                    factor: d,
                });
            }
        }
    }

    for (idx, e) in g.edges().iter().enumerate() {
        if !e.is_loop() && a_inverse_config(g, idx).is_some() {
            out.push(Move::AInverse { edge: e.id.clone() });
        }
    }

    out
}

/// Apply `steps` uniformly chosen legal moves (restricted to moves whose
/// result is reduced when `keep_reduced`). Deterministic for a fixed seed;
/// stops early when no legal move remains and reports the moves actually
/// applied.
pub fn random_deform(
    g: &GbsGraph,
    steps: usize,
    seed: u64,
    keep_reduced: bool,
) -> (GbsGraph, Vec<Move>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut current = g.clone();
    let mut log = Vec::new();
    for _ in 0..steps {
        let candidates: Vec<(Move, GbsGraph)> = legal_moves(&current)
            .into_iter()
            .map(|mv| {
                let h = apply(&current, &mv).expect("enumerated move must be legal");
                (mv, h)
            })
            .filter(|(_, h)| !keep_reduced || h.is_reduced())
            .collect();
        if candidates.is_empty() {
            break;
        }
        let pick = rng.gen_range(0..candidates.len());
        let (mv, next) = candidates.into_iter().nth(pick).expect("index in range");
        log.push(mv);
        current = next;
    }
    (current, log)
}

/// One move per line, for replayable logs.
pub fn moves_to_jsonl(moves: &[Move]) -> String {
    moves
        .iter()
        .map(|m| serde_json::to_string(m).expect("move serialization cannot fail"))
        .collect::<Vec<_>>()
        .join("\n")
}

pub fn moves_from_jsonl(text: &str) -> Result<Vec<Move>, serde_json::Error> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(serde_json::from_str)
        .collect()
}
