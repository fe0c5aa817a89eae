//! Isomorphism decision for normal-form bouquets, and the dual-graph
//! invariant used to verify deformation trajectories.
//!
//! Two normal forms over the same primitive base define isomorphic groups
//! iff (1) their total exponents `l·m` agree, (2) their petal counts agree,
//! and (3) their characteristic vectors are cyclic permutations of each
//! other. A positive answer comes with a certificate `(C, sigma)`: `C`
//! induction steps followed by slides realise the isomorphism, matching
//! petal `i` to petal `sigma(i)`.
//!
//! The dual graph is an independent verification tool for arbitrary reduced
//! graphs in the deformation space of a normal form: delete one strictly
//! ascending loop per vertex, join the remaining edge-ends at every vertex
//! into cliques labelled by exponent differences mod `m`, and check that the
//! labels are a coboundary. Along legal moves the vertex potential is an
//! invariant of the trajectory.

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::arith;
use crate::covering::CoveringGraph;
use crate::graph::{GbsGraph, OrientedEdge};
use crate::modular::primitive_base;
use crate::normalform::{normal_form_of_cover, NormalForm, NormalFormError};
use crate::Int;

/// The count vector `V` of a normal form: length `l·m`, entry `l·j` counts
/// the balanced petals with residue `j`; an isomorphism invariant up to
/// cyclic shift.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharVector {
    pub base: Int,
    pub entries: Vec<u64>,
}

/// Shift `C` plus the petal matching realising an isomorphism of normal
/// forms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IsoCertificate {
    pub shift: u64,
    /// `petal_map[i] = j`: residue `i` of the first form maps to residue `j`
    /// of the second.
    pub petal_map: Vec<usize>,
}

#[derive(Debug, Error)]
pub enum IsoError {
    #[error("dual graph precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("inconsistent potential: a closed path has nonzero label")]
    InconsistentPotential,
    #[error(transparent)]
    NormalForm(#[from] NormalFormError),
}

/// Evaluate the definition: `v[l·j]` counts residues equal to `j`.
pub fn char_vector(nf: &NormalForm) -> CharVector {
    let len = (nf.level() * nf.modulus()) as usize;
    let mut entries = vec![0u64; len];
    for p in nf.residues() {
        entries[(nf.level() * p) as usize] += 1;
    }
    CharVector {
        base: nf.base().clone(),
        entries,
    }
}

/// Smallest `C` such that shifting `v` forward by `C` gives `w`, i.e.
/// `v[j] = w[(j + C) mod L]` for all `j`; `None` when lengths differ or no
/// shift works.
pub fn cyclic_equal(v: &CharVector, w: &CharVector) -> Option<u64> {
    if v.entries.len() != w.entries.len() {
        return None;
    }
    let len = v.entries.len();
    if len == 0 {
        return Some(0);
    }
    (0..len)
        .find(|&c| (0..len).all(|j| v.entries[j] == w.entries[(j + c) % len]))
        .map(|c| c as u64)
}

/// Decide isomorphism of two normal forms; `Some(certificate)` iff the
/// defined GBS groups are isomorphic. Forms over different primitive bases
/// are never isomorphic (their modular images differ).
pub fn iso_normal_forms(nf1: &NormalForm, nf2: &NormalForm) -> Option<IsoCertificate> {
    if nf1.base() != nf2.base() {
        return None;
    }
    let s1 = nf1.level() * nf1.modulus();
    let s2 = nf2.level() * nf2.modulus();
    if s1 != s2 || nf1.k() != nf2.k() {
        return None;
    }
    let shift = cyclic_equal(&char_vector(nf1), &char_vector(nf2))?;
    // Match each residue i to an unused residue j with
    // l1·p_i + C = l2·q_j (mod S).
    let s = s1;
    let mut used = vec![false; nf2.residues().len()];
    let mut petal_map = Vec::with_capacity(nf1.residues().len());
    for p in nf1.residues() {
        let target = (nf1.level() * p + shift) % s;
        let j = nf2
            .residues()
            .iter()
            .enumerate()
            .position(|(j, q)| !used[j] && (nf2.level() * q) % s == target)
            .expect("matching shift guarantees a petal matching");
        used[j] = true;
        petal_map.push(j);
    }
    Some(IsoCertificate { shift, petal_map })
}

/// Independent check of a certificate against the two forms: the three
/// conditions plus the per-petal congruence realised by `petal_map`.
pub fn verify_certificate(nf1: &NormalForm, nf2: &NormalForm, cert: &IsoCertificate) -> bool {
    if nf1.base() != nf2.base() {
        return false;
    }
    let s = nf1.level() * nf1.modulus();
    if s != nf2.level() * nf2.modulus() || nf1.k() != nf2.k() {
        return false;
    }
    if cert.petal_map.len() != nf1.residues().len() {
        return false;
    }
    let mut seen = vec![false; nf2.residues().len()];
    for (i, &j) in cert.petal_map.iter().enumerate() {
        if j >= nf2.residues().len() || seen[j] {
            return false;
        }
        seen[j] = true;
        let lhs = (nf1.level() * nf1.residues()[i] + cert.shift) % s;
        let rhs = (nf2.level() * nf2.residues()[j]) % s;
        if lhs != rhs {
            return false;
        }
    }
    true
}

/// Decide isomorphism of two finite-index subgroups presented as covers of
/// `G^{d}_{1,n_i}` bouquets.
pub fn iso_subgroups(
    c1: &CoveringGraph,
    n1: &Int,
    c2: &CoveringGraph,
    n2: &Int,
) -> Result<bool, IsoError> {
    let b1 = primitive_base(n1).map_err(NormalFormError::from)?;
    let b2 = primitive_base(n2).map_err(NormalFormError::from)?;
    if b1.base != b2.base {
        return Ok(false);
    }
    let f1 = normal_form_of_cover(c1, n1)?;
    let f2 = normal_form_of_cover(c2, n2)?;
    Ok(iso_normal_forms(&f1, &f2).is_some())
}

/// One clique edge of the dual graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualEdge {
    pub from: usize,
    pub to: usize,
    /// The vertex of the original graph whose star produced this edge.
    pub color: String,
    pub label: u64,
}

/// The edge-labelled dual graph: one vertex per surviving edge, cliques per
/// original vertex, labels in `Z/m`, plus a consistent vertex potential.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualGraph {
    pub modulus: u64,
    /// Ids of the surviving (non-deleted) edges, declaration order.
    pub vertices: Vec<String>,
    pub edges: Vec<DualEdge>,
    pub potential: Vec<u64>,
}

impl DualGraph {
    /// Multiset comparison of potentials against residues up to one global
    /// shift mod `m` (the potential is only defined up to a constant).
    pub fn potential_matches_residues(&self, residues: &[u64]) -> bool {
        if self.potential.len() != residues.len() {
            return false;
        }
        let mut want = residues.to_vec();
        want.sort_unstable();
        (0..self.modulus).any(|s| {
            let mut got: Vec<u64> = self
                .potential
                .iter()
                .map(|p| (p + s) % self.modulus)
                .collect();
            got.sort_unstable();
            got == want
        })
    }
}

fn fail(check: impl Into<String>) -> IsoError {
    IsoError::PreconditionFailed(check.into())
}

/// Is the loop with this orientation strictly ascending (unit label first)?
fn ascending_orientation(g: &GbsGraph, idx: usize) -> Option<OrientedEdge> {
    let one = Int::from(1);
    for oe in [OrientedEdge::forward(idx), OrientedEdge::backward(idx)] {
        if g.a_label(oe).abs() == one && g.omega_label(oe).abs() > one {
            return Some(oe);
        }
    }
    None
}

/// Build the dual graph of a reduced graph claimed to lie in the deformation
/// space of a normal form with parameters `(r, l, m)`.
///
/// Checked preconditions: positive labels; a strictly ascending loop at
/// every vertex; every loop modulus a power of `r^{l·m}`; label proportions
/// at each vertex (one ascending loop removed) powers of `n = r^l`. The
/// clique labels must then be a coboundary; a closed path with nonzero label
/// signals an input outside the deformation space (or an engine bug).
pub fn dual_graph(g: &GbsGraph, r: &Int, l: u64, m: u64) -> Result<DualGraph, IsoError> {
    if *r < Int::from(2) || l == 0 || m == 0 {
        return Err(fail("parameters require r >= 2, l >= 1, m >= 1"));
    }
    if !g.is_reduced() {
        return Err(fail("graph must be reduced"));
    }
    if g.edges()
        .iter()
        .any(|e| !e.a.is_positive() || !e.omega.is_positive())
    {
        return Err(fail("labels must be positive"));
    }
    let n1 = arith::pow(r, l);
    let big = arith::pow(r, l * m);

    // Loop moduli must be powers of r^{l·m}.
    for (idx, e) in g.edges().iter().enumerate() {
        if !e.is_loop() {
            continue;
        }
        let ratio_is_power = power_ratio(&e.omega, &e.a, &big).is_some();
        if !ratio_is_power {
            return Err(fail(format!(
                "loop {} modulus is not a power of {}",
                e.id, big
            )));
        }
        let _ = idx;
    }

    // One strictly ascending loop per vertex, first in declaration order.
    let mut deleted: Vec<usize> = Vec::new();
    for v in 0..g.vertex_count() {
        let found = (0..g.edge_count()).find(|&i| {
            let e = g.edge(i);
            e.is_loop() && e.source == v && ascending_orientation(g, i).is_some()
        });
        match found {
            Some(i) => deleted.push(i),
            None => {
                return Err(fail(format!(
                    "no strictly ascending loop at vertex {}",
                    g.vertex_id(v)
                )))
            }
        }
    }

    // Surviving edges become dual vertices.
    let survivors: Vec<usize> = (0..g.edge_count())
        .filter(|i| !deleted.contains(i))
        .collect();
    let dual_index = |edge: usize| survivors.iter().position(|&e| e == edge);

    // d(v): oriented survivors starting at v, loops once.
    let mut edges: Vec<DualEdge> = Vec::new();
    for v in 0..g.vertex_count() {
        let mut star: Vec<OrientedEdge> = Vec::new();
        for &i in &survivors {
            let e = g.edge(i);
            if e.is_loop() {
                if e.source == v {
                    star.push(OrientedEdge::forward(i));
                }
            } else {
                if e.source == v {
                    star.push(OrientedEdge::forward(i));
                }
                if e.target == v {
                    star.push(OrientedEdge::backward(i));
                }
            }
        }
        for x in 0..star.len() {
            for y in (x + 1)..star.len() {
                let ax = g.a_label(star[x]);
                let ay = g.a_label(star[y]);
                let Some(c) = power_ratio(ay, ax, &n1) else {
                    return Err(fail(format!(
                        "labels at vertex {} are not proportional by powers of {}",
                        g.vertex_id(v),
                        n1
                    )));
                };
                edges.push(DualEdge {
                    from: dual_index(star[x].edge).expect("survivor"),
                    to: dual_index(star[y].edge).expect("survivor"),
                    color: g.vertex_id(v).to_string(),
                    label: c.rem_euclid(m as i64) as u64,
                });
            }
        }
    }

    // Spanning-tree potential plus the cocycle condition on every edge.
    let nv = survivors.len();
    let mut potential = vec![0u64; nv];
    let mut seen = vec![false; nv];
    for root in 0..nv {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let mut stack = vec![root];
        while let Some(x) = stack.pop() {
            for de in &edges {
                let (y, lbl) = if de.from == x {
                    (de.to, de.label)
                } else if de.to == x {
                    (de.from, (m - de.label % m) % m)
                } else {
                    continue;
                };
                if !seen[y] {
                    seen[y] = true;
                    potential[y] = (potential[x] + lbl) % m;
                    stack.push(y);
                }
            }
        }
    }
    for de in &edges {
        if (potential[de.from] + de.label) % m != potential[de.to] {
            return Err(IsoError::InconsistentPotential);
        }
    }

    Ok(DualGraph {
        modulus: m,
        vertices: survivors.iter().map(|&i| g.edge(i).id.clone()).collect(),
        edges,
        potential,
    })
}

/// `y/x` as a signed power of `base`: `Some(c)` with `y = x·base^c`.
fn power_ratio(y: &Int, x: &Int, base: &Int) -> Option<i64> {
    if (y % x).is_zero() {
        if let Some(e) = arith::exact_log(&(y / x), base) {
            return Some(e as i64);
        }
    }
    if (x % y).is_zero() {
        if let Some(e) = arith::exact_log(&(x / y), base) {
            return Some(-(e as i64));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covering::{gamma_k, CoveringGraph};
    use crate::moves::{self, Move, MoveEnd};

    fn int(v: i64) -> Int {
        Int::from(v)
    }

    fn nf(r: i64, l: u64, m: u64, ps: &[u64]) -> NormalForm {
        NormalForm::new(int(r), l, m, ps.to_vec()).unwrap()
    }

    fn cv(entries: &[u64]) -> CharVector {
        CharVector {
            base: int(2),
            entries: entries.to_vec(),
        }
    }

    #[test]
    fn char_vector_examples() {
        assert_eq!(char_vector(&nf(2, 1, 2, &[0, 1])).entries, vec![1, 1]);
        assert_eq!(
            char_vector(&nf(2, 2, 3, &[0, 2])).entries,
            vec![1, 0, 0, 0, 1, 0]
        );
        assert_eq!(char_vector(&nf(2, 1, 1, &[0, 0, 0])).entries, vec![3]);
    }

    #[test]
    fn char_vector_entry_sum_is_k_minus_1() {
        for form in [nf(2, 1, 4, &[0, 2, 2]), nf(3, 2, 2, &[1]), nf(2, 1, 1, &[])] {
            let v = char_vector(&form);
            assert_eq!(v.entries.iter().sum::<u64>() as usize, form.k() - 1);
        }
    }

    #[test]
    fn cyclic_equal_examples() {
        assert_eq!(cyclic_equal(&cv(&[1, 0]), &cv(&[0, 1])), Some(1));
        assert_eq!(
            cyclic_equal(&cv(&[1, 0, 0, 0, 1, 0]), &cv(&[0, 1, 0, 0, 0, 1])),
            Some(1)
        );
        assert_eq!(cyclic_equal(&cv(&[2, 0]), &cv(&[1, 1])), None);
        assert_eq!(cyclic_equal(&cv(&[1, 0]), &cv(&[1, 0, 0])), None);
        for v in [cv(&[1, 2, 3]), cv(&[0]), cv(&[5, 5])] {
            assert_eq!(cyclic_equal(&v, &v), Some(0));
        }
    }

    #[test]
    fn iso_examples() {
        // Identical underlying graphs: loops (1,4),(1,1).
        assert!(iso_normal_forms(&nf(2, 1, 2, &[0]), &nf(2, 2, 1, &[0])).is_some());
        // Shift by one.
        let cert = iso_normal_forms(&nf(2, 2, 3, &[0, 2]), &nf(2, 1, 6, &[1, 5])).unwrap();
        assert_eq!(cert.shift, 1);
        assert!(verify_certificate(
            &nf(2, 2, 3, &[0, 2]),
            &nf(2, 1, 6, &[1, 5]),
            &cert
        ));
        // (2,0) vs (1,1).
        assert!(iso_normal_forms(&nf(2, 1, 2, &[0, 0]), &nf(2, 1, 2, &[0, 1])).is_none());
        // Total exponents 2 vs 3.
        assert!(iso_normal_forms(&nf(2, 1, 2, &[0]), &nf(2, 1, 3, &[0])).is_none());
        // Different primitive bases.
        assert!(iso_normal_forms(&nf(2, 1, 2, &[0]), &nf(3, 1, 2, &[0])).is_none());
    }

    #[test]
    fn iso_is_reflexive_and_symmetric() {
        let forms = [
            nf(2, 1, 3, &[0, 2]),
            nf(2, 3, 1, &[0]),
            nf(2, 2, 2, &[1, 1, 0]),
            nf(2, 1, 6, &[4]),
        ];
        for a in &forms {
            let cert = iso_normal_forms(a, a).unwrap();
            assert_eq!(cert.shift, 0);
            for b in &forms {
                assert_eq!(
                    iso_normal_forms(a, b).is_some(),
                    iso_normal_forms(b, a).is_some()
                );
            }
        }
    }

    #[test]
    fn iso_implies_equal_modular_images() {
        let a = nf(2, 2, 3, &[0, 2]);
        let b = nf(2, 1, 6, &[1, 5]);
        assert!(iso_normal_forms(&a, &b).is_some());
        let ia = crate::modular::modular_image(&a.to_graph());
        let ib = crate::modular::modular_image(&b.to_graph());
        assert_eq!(ia, ib);
    }

    #[test]
    fn iso_subgroups_examples() {
        let t2 = CoveringGraph::trivial(2);
        assert!(!iso_subgroups(&t2, &int(4), &t2, &int(8)).unwrap());
        let g3 = gamma_k(3).unwrap();
        let t3 = CoveringGraph::trivial(3);
        assert!(iso_subgroups(&g3, &int(2), &t3, &int(2)).unwrap());
        assert!(iso_subgroups(&g3, &int(2), &g3, &int(2)).unwrap());
        // Different primitive bases.
        assert!(!iso_subgroups(&t2, &int(2), &t2, &int(3)).unwrap());
    }

    #[test]
    fn dual_graph_of_normal_form_is_labelled_clique() {
        let form = nf(2, 1, 3, &[0, 1, 1, 2]);
        let d = dual_graph(&form.to_graph(), &int(2), 1, 3).unwrap();
        assert_eq!(d.vertices.len(), form.k() - 1);
        // Complete graph on k-1 vertices.
        assert_eq!(d.edges.len(), (form.k() - 1) * (form.k() - 2) / 2);
        // Labels are residue differences; potentials match the residues.
        assert!(d.potential_matches_residues(form.residues()));
        for de in &d.edges {
            let diff = (d.potential[de.to] + 3 - d.potential[de.from]) % 3;
            assert_eq!(de.label, diff);
        }
    }

    #[test]
    fn dual_graph_degree_three_vertex_has_no_clique_edges() {
        // u carries only its ascending loop and one connecting edge, so it
        // contributes no clique pairs.
        let g = GbsGraph::new(
            vec!["u".into(), "w".into()],
            vec![
                ("fu".into(), "u".into(), "u".into(), int(1), int(4)),
                ("c".into(), "u".into(), "w".into(), int(2), int(2)),
                ("fw".into(), "w".into(), "w".into(), int(1), int(4)),
                ("b".into(), "w".into(), "w".into(), int(2), int(2)),
            ],
        )
        .unwrap();
        let d = dual_graph(&g, &int(2), 1, 2).unwrap();
        assert_eq!(d.vertices, vec!["c".to_string(), "b".to_string()]);
        assert!(d.edges.iter().all(|e| e.color == "w"));
        assert_eq!(d.edges.len(), 1);
        assert_eq!(d.edges[0].label, 0);
    }

    #[test]
    fn dual_graph_unchanged_by_slide_over_ascending_loop() {
        let form = nf(2, 1, 3, &[0, 1, 2]);
        let g = form.to_graph();
        let d0 = dual_graph(&g, &int(2), 1, 3).unwrap();
        // Slide a balanced loop end over the strictly ascending loop e0.
        let h = moves::apply(
            &g,
            &Move::SlideOverLoop {
                moved: MoveEnd::source("e1"),
                over: "e0".into(),
                count: 1,
            },
        )
        .unwrap();
        let d1 = dual_graph(&h, &int(2), 1, 3).unwrap();
        assert_eq!(d0, d1);
    }

    #[test]
    fn dual_graph_rejects_missing_ascending_loop() {
        let g = GbsGraph::bouquet(&[(int(2), int(2))]);
        assert!(matches!(
            dual_graph(&g, &int(2), 1, 1),
            Err(IsoError::PreconditionFailed(_))
        ));
    }

    #[test]
    fn dual_graph_rejects_bad_loop_modulus() {
        // Loop (1,2) has modulus 2, not a power of r^{l·m} = 4.
        let g = GbsGraph::bouquet(&[(int(1), int(4)), (int(1), int(2))]);
        assert!(matches!(
            dual_graph(&g, &int(2), 1, 2),
            Err(IsoError::PreconditionFailed(_))
        ));
    }

    #[test]
    fn dual_graph_detects_inconsistent_potential() {
        // Inside one clique the labels are log-differences, hence always a
        // coboundary; a contradiction needs two vertices that disagree about
        // the same pair of edges. Here the u-clique says the two connecting
        // edges differ by 0, the w-clique says they differ by 1.
        let g = GbsGraph::new(
            vec!["u".into(), "w".into()],
            vec![
                ("fu".into(), "u".into(), "u".into(), int(1), int(4)),
                ("fw".into(), "w".into(), "w".into(), int(1), int(4)),
                ("c0".into(), "u".into(), "w".into(), int(2), int(2)),
                ("c1".into(), "u".into(), "w".into(), int(2), int(4)),
            ],
        )
        .unwrap();
        assert!(matches!(
            dual_graph(&g, &int(2), 1, 2),
            Err(IsoError::InconsistentPotential)
        ));
    }

    /// Brute-force oracle: conditions (1), (2) and explicit enumeration of
    /// all cyclic shifts.
    fn iso_oracle(a: &NormalForm, b: &NormalForm) -> bool {
        if a.base() != b.base()
            || a.level() * a.modulus() != b.level() * b.modulus()
            || a.k() != b.k()
        {
            return false;
        }
        let va = char_vector(a).entries;
        let vb = char_vector(b).entries;
        let len = va.len();
        (0..len).any(|c| (0..len).all(|j| va[j] == vb[(j + c) % len]))
    }

    #[test]
    fn iso_transitive_on_random_triples() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let mut forms = Vec::new();
        for _ in 0..40 {
            let l = rng.gen_range(1..=3u64);
            let m = rng.gen_range(1..=4u64);
            let k = rng.gen_range(2..=4usize);
            let ps: Vec<u64> = (0..k - 1).map(|_| rng.gen_range(0..m)).collect();
            forms.push(nf(2, l, m, &ps));
        }
        for a in &forms {
            for b in &forms {
                assert_eq!(iso_normal_forms(a, b).is_some(), iso_oracle(a, b));
                for c in &forms {
                    if iso_normal_forms(a, b).is_some() && iso_normal_forms(b, c).is_some() {
                        assert!(iso_normal_forms(a, c).is_some());
                    }
                }
            }
        }
    }
}
