//! Normalisation of finite-index subgroups of `G^d_{1,n}`.
//!
//! Stage one collapses a positive spanning tree of the covering graph,
//! turning the cover into a bouquet whose petal labels are powers of `n`:
//! a petal coming from a closed path with `q` negative and `p` positive
//! edges gets labels `(n^q, n^p)`. Stage two is a modified Euclidean
//! algorithm by slide moves that leaves one strictly ascending loop
//! `(1, n^m)` — `m` the gcd of the exponent differences — and balanced loops
//! `(n^{p_i}, n^{p_i})` with residues `p_i` reduced mod `m`.
//!
//! Both stages run twice: once through closed-form exponent arithmetic and
//! once by literally applying collapse/slide moves to the labelled graph,
//! and the two routes are asserted against each other on every call.

use std::fmt;

use num_integer::Integer as _;
use thiserror::Error;

use crate::arith;
use crate::covering::{lift_labels, CoveringGraph};
use crate::graph::GbsGraph;
use crate::modular::{primitive_base, ModularError};
use crate::moves::{self, Move, MoveEnd};
use crate::Int;

/// A spanning tree of a covering graph with every tree edge positive and
/// oriented toward the base sheet; each non-base sheet has exactly one
/// outgoing tree edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PositiveSpanningTree {
    pub base: usize,
    /// `parent[x] = Some((petal, x))` names the tree edge from sheet `x`
    /// to `perms[petal][x]`; `None` exactly at the base.
    pub parent: Vec<Option<(usize, usize)>>,
}

impl PositiveSpanningTree {
    /// Number of tree edges on the path from `x` to the base.
    pub fn depth(&self, c: &CoveringGraph, mut x: usize) -> u64 {
        let mut d = 0;
        while let Some((petal, sheet)) = self.parent[x] {
            debug_assert_eq!(sheet, x);
            x = c.perms[petal][sheet];
            d += 1;
        }
        d
    }

    /// Ids of the tree edges in the lifted graph, declaration order.
    pub fn edge_ids(&self) -> Vec<String> {
        let mut ids: Vec<(usize, usize)> = self.parent.iter().flatten().copied().collect();
        ids.sort();
        ids.iter().map(|(i, x)| format!("e{i}_{x}")).collect()
    }
}

/// Bouquet with labels that are powers of a common base: petal `i` has
/// `A = base^{a_i}`, `Omega = base^{b_i}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExponentBouquet {
    pub base: Int,
    pub petals: Vec<(u64, u64)>,
}

impl ExponentBouquet {
    pub fn to_graph(&self) -> GbsGraph {
        let labels: Vec<(Int, Int)> = self
            .petals
            .iter()
            .map(|(a, b)| (arith::pow(&self.base, *a), arith::pow(&self.base, *b)))
            .collect();
        GbsGraph::bouquet(&labels)
    }
}

/// The canonical bouquet `NF(r, l, m; p)`: one loop `(1, n^m)` with
/// `n = r^l`, and balanced loops `(n^{p_i}, n^{p_i})` with `0 <= p_i < m`.
/// Residues are kept sorted, so equal tuples mean identical graphs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalForm {
    base: Int,
    level: u64,
    modulus: u64,
    residues: Vec<u64>,
}

impl NormalForm {
    /// A composite base is folded into its primitive base, so forms over
    /// different presentations of the same `n` stay comparable.
    pub fn new(
        base: Int,
        level: u64,
        modulus: u64,
        mut residues: Vec<u64>,
    ) -> Result<Self, NormalFormError> {
        if base < Int::from(2) || level == 0 || modulus == 0 {
            return Err(NormalFormError::BadParameters);
        }
        if residues.iter().any(|r| *r >= modulus) {
            return Err(NormalFormError::ResidueOutOfRange);
        }
        let pb = primitive_base(&base)?;
        residues.sort_unstable();
        Ok(NormalForm {
            base: pb.base,
            level: level * pb.exponent,
            modulus,
            residues,
        })
    }

    /// Primitive base `r`.
    pub fn base(&self) -> &Int {
        &self.base
    }

    /// `l` with `n = r^l`.
    pub fn level(&self) -> u64 {
        self.level
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn residues(&self) -> &[u64] {
        &self.residues
    }

    /// Petal count `k` (ascending loop included).
    pub fn k(&self) -> usize {
        self.residues.len() + 1
    }

    pub fn n(&self) -> Int {
        arith::pow(&self.base, self.level)
    }

    /// The literal bouquet graph of this form.
    pub fn to_graph(&self) -> GbsGraph {
        self.to_bouquet().to_graph()
    }

    /// Exponent bouquet over base `n = r^l`.
    pub fn to_bouquet(&self) -> ExponentBouquet {
        let mut petals = vec![(0, self.modulus)];
        petals.extend(self.residues.iter().map(|p| (*p, *p)));
        ExponentBouquet {
            base: self.n(),
            petals,
        }
    }
}

impl fmt::Display for NormalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ps: Vec<String> = self.residues.iter().map(|p| p.to_string()).collect();
        write!(
            f,
            "NF(r={},l={},m={};p=[{}])",
            self.base,
            self.level,
            self.modulus,
            ps.join(",")
        )
    }
}

#[derive(Debug, Error)]
pub enum NormalFormError {
    #[error("no ascending petal: all petals are balanced")]
    NoAscendingPetal,
    #[error("normal form parameters out of range")]
    BadParameters,
    #[error("residue exceeds the modulus")]
    ResidueOutOfRange,
    #[error(transparent)]
    BadBase(#[from] ModularError),
}

/// Deterministic spanning tree with all tree edges positive and oriented
/// toward sheet 0: repeatedly scan the lifted edges in declaration order and
/// attach any sheet whose successor is already in the tree.
pub fn positive_spanning_tree(c: &CoveringGraph) -> PositiveSpanningTree {
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; c.n_sheets];
    let mut in_tree = vec![false; c.n_sheets];
    in_tree[0] = true;
    let mut missing = c.n_sheets - 1;
    while missing > 0 {
        let mut progressed = false;
        for petal in 0..c.d {
            for sheet in 0..c.n_sheets {
                let to = c.perms[petal][sheet];
                if in_tree[to] && !in_tree[sheet] {
                    in_tree[sheet] = true;
                    parent[sheet] = Some((petal, sheet));
                    missing -= 1;
                    progressed = true;
                }
            }
        }
        assert!(progressed, "a validated cover is strongly connected");
    }
    PositiveSpanningTree { base: 0, parent }
}

/// Collapse the spanning tree: each non-tree positive edge becomes a petal
/// with exponents `(depth(source), depth(target) + 1)` — the counts of
/// negative and positive edges on the generating closed path through it.
///
/// The exponents are also certified by applying the collapse moves to the
/// lifted graph and reading the resulting loop labels.
pub fn collapse_to_bouquet(c: &CoveringGraph, n: &Int) -> Result<ExponentBouquet, NormalFormError> {
    if *n < Int::from(2) {
        return Err(ModularError::OutOfRange(n.clone()).into());
    }
    let tree = positive_spanning_tree(c);
    let mut petals = Vec::new();
    let mut petal_ids = Vec::new();
    for petal in 0..c.d {
        for sheet in 0..c.n_sheets {
            if tree.parent[sheet] == Some((petal, sheet)) {
                continue;
            }
            let a = tree.depth(c, sheet);
            let b = tree.depth(c, c.perms[petal][sheet]) + 1;
            petals.push((a, b));
            petal_ids.push(format!("e{petal}_{sheet}"));
        }
    }

    // Independent route: literally collapse the tree edges.
    let mut g = lift_labels(c, &Int::from(1), n);
    for id in tree.edge_ids() {
        g = moves::apply(&g, &Move::Collapse { edge: id.clone() })
            .expect("tree edges keep a unit label while collapsing");
    }
    assert_eq!(g.vertex_count(), 1);
    assert_eq!(g.edge_count(), petals.len());
    for (id, (a, b)) in petal_ids.iter().zip(&petals) {
        let idx = g.edge_index(id).expect("petal edge survives collapsing");
        let e = g.edge(idx);
        assert_eq!(
            (e.a.clone(), e.omega.clone()),
            (arith::pow(n, *a), arith::pow(n, *b)),
            "collapse certification failed on petal {id}"
        );
    }

    Ok(ExponentBouquet {
        base: n.clone(),
        petals,
    })
}

/// `m` from the exponent bouquet: the gcd of `|b_i - a_i|` over all petals
/// with the convention `gcd(0, x) = x`. Errors when every petal is balanced.
pub fn plateau_m(b: &ExponentBouquet) -> Result<u64, NormalFormError> {
    let m = b
        .petals
        .iter()
        .fold(0u64, |acc, (x, y)| acc.gcd(&x.abs_diff(*y)));
    if m == 0 {
        Err(NormalFormError::NoAscendingPetal)
    } else {
        Ok(m)
    }
}

/// The two-step slide procedure on a pair of loops `E = (1, n^a)`,
/// `F = (n^b, n^c)`: step 1 reduces `b, c` modulo `a`, step 2 shrinks `a`
/// by sliding `E` over the unbalanced `F`, until `F` is balanced. Returns
/// the final `(a, b)`; the closed form `(gcd(a, |b-c|), b mod gcd)` is
/// asserted on every call.
pub fn euclid_slide_pair(a: u64, b: u64, c: u64) -> (u64, u64) {
    assert!(a >= 1);
    let (mut ai, mut bi, mut ci) = (a, b, c);
    loop {
        // Step 1: slide F over E on both sides.
        bi %= ai;
        ci %= ai;
        if bi == ci {
            break;
        }
        // Step 2: slide E over F, shrinking a to mu + lo with 1 <= mu <= hi - lo.
        let (hi, lo) = (bi.max(ci), bi.min(ci));
        let diff = hi - lo;
        let lambda = (ai - lo - 1) / diff;
        ai -= lambda * diff;
    }
    let d = a.gcd(&b.abs_diff(c));
    assert_eq!(ai, d, "termination value must be the gcd");
    assert_eq!(bi, b % d);
    assert_eq!(bi, c % d);
    (ai, bi)
}

/// Slide-normalise an exponent bouquet into its normal form.
///
/// The first ascending petal (in declaration order) plays the role of the
/// strictly ascending loop; the Euclid procedure runs over the pairs it
/// forms with every other petal, and final slides reduce all residues mod
/// `m`. The emitted slide sequence is replayed on the literal bouquet graph
/// and the outcome compared petal by petal.
pub fn bouquet_normal_form(b: &ExponentBouquet) -> Result<NormalForm, NormalFormError> {
    let first = b
        .petals
        .iter()
        .position(|(a, o)| *a == 0 && *o > 0)
        .ok_or(NormalFormError::NoAscendingPetal)?;

    let mut script: Vec<Move> = Vec::new();
    let loop_id = format!("e{first}");

    let mut a_param = b.petals[first].1;
    let mut residues: Vec<(usize, u64)> = Vec::new();
    for (i, (pa, pb)) in b.petals.iter().enumerate() {
        if i == first {
            continue;
        }
        let (d, t) =
            euclid_slide_pair_scripted(a_param, *pa, *pb, &loop_id, &format!("e{i}"), &mut script);
        a_param = d;
        residues.push((i, t));
    }
    let m = a_param;
    assert_eq!(
        m,
        plateau_m(b)?,
        "Euclid chain must reproduce the exponent gcd"
    );

    // Final slides: bring every residue into [0, m).
    let mut final_residues = Vec::with_capacity(residues.len());
    for (i, l) in &residues {
        let p = l % m;
        let steps = (l / m) as i64;
        if steps > 0 {
            let id = format!("e{i}");
            script.push(Move::SlideOverLoop {
                moved: MoveEnd::source(&*id),
                over: loop_id.clone(),
                count: -steps,
            });
            script.push(Move::SlideOverLoop {
                moved: MoveEnd::target(&*id),
                over: loop_id.clone(),
                count: -steps,
            });
        }
        final_residues.push((*i, p));
    }

    // Every balanced residue is congruent to its source exponents mod m.
    for (i, p) in &final_residues {
        assert_eq!(*p, b.petals[*i].0 % m);
        assert_eq!(*p, b.petals[*i].1 % m);
    }

    // Move-level certification.
    let mut g = b.to_graph();
    for mv in &script {
        g = moves::apply(&g, mv).unwrap_or_else(|e| panic!("emitted slide must be legal: {e}"));
    }
    let expect_loop = (Int::from(1), arith::pow(&b.base, m));
    let loop_edge = g
        .edge(g.edge_index(&loop_id).expect("ascending loop id"))
        .clone();
    assert_eq!(
        (loop_edge.a, loop_edge.omega),
        expect_loop,
        "slide certification: ascending loop"
    );
    for (i, p) in &final_residues {
        let e = g
            .edge(g.edge_index(&format!("e{i}")).expect("petal id"))
            .clone();
        let v = arith::pow(&b.base, *p);
        assert_eq!(
            (e.a, e.omega),
            (v.clone(), v),
            "slide certification: petal e{i}"
        );
    }

    let pb = primitive_base(&b.base)?;
    NormalForm::new(
        pb.base,
        pb.exponent,
        m,
        final_residues.into_iter().map(|(_, p)| p).collect(),
    )
}

/// The literal Euclid loop, emitting the slide moves it performs. `E` is the
/// ascending loop `(1, n^a)`, `F` the petal `(n^b, n^c)`.
fn euclid_slide_pair_scripted(
    a: u64,
    b: u64,
    c: u64,
    loop_id: &str,
    petal_id: &str,
    script: &mut Vec<Move>,
) -> (u64, u64) {
    assert!(a >= 1);
    let (mut ai, mut bi, mut ci) = (a, b, c);
    loop {
        // Step 1: slide the two ends of F over E^{-1}.
        let s = (bi / ai) as i64;
        let t = (ci / ai) as i64;
        if s > 0 {
            script.push(Move::SlideOverLoop {
                moved: MoveEnd::source(petal_id),
                over: loop_id.to_string(),
                count: -s,
            });
        }
        if t > 0 {
            script.push(Move::SlideOverLoop {
                moved: MoveEnd::target(petal_id),
                over: loop_id.to_string(),
                count: -t,
            });
        }
        bi %= ai;
        ci %= ai;
        if bi == ci {
            break;
        }
        // Step 2: slide the big end of E over F (or F^{-1}) lambda times.
        let (hi, lo) = (bi.max(ci), bi.min(ci));
        let diff = hi - lo;
        let lambda = (ai - lo - 1) / diff;
        if lambda > 0 {
            // Over F when A(F) is the larger exponent (each pass multiplies
            // by n^{c-b} < 1), over F^{-1} otherwise.
            let count = if bi > ci {
                lambda as i64
            } else {
                -(lambda as i64)
            };
            script.push(Move::SlideOverLoop {
                moved: MoveEnd::target(loop_id),
                over: petal_id.to_string(),
                count,
            });
        }
        ai -= lambda * diff;
    }
    let expected = euclid_slide_pair(a, b, c);
    assert_eq!((ai, bi), expected);
    (ai, bi)
}

/// Full pipeline: spanning tree, collapse, slide normalisation. The stored
/// base is the primitive base `r` of `n`, so forms over different `n` remain
/// comparable.
pub fn normal_form_of_cover(c: &CoveringGraph, n: &Int) -> Result<NormalForm, NormalFormError> {
    let bouquet = collapse_to_bouquet(c, n)?;
    bouquet_normal_form(&bouquet)
}
