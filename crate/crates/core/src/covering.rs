//! Finite-index subgroups as labelled covering graphs.
//!
//! A finite-index subgroup of the `d`-petal bouquet group `G^d_{p,q}` (with
//! `gcd(p,q) = 1`, so the defining graph has no proper plateau) corresponds
//! to a degree-`N` cover of the bouquet: `d` permutations of the sheets, one
//! per petal, generating a transitive group. The explicit GBS graph, with
//! every edge labelled `(p, q)`, is always derived from the permutation
//! encoding.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use num_integer::Integer as _;
use num_traits::Signed;

use crate::graph::GbsGraph;
use crate::Int;

/// A degree-`n_sheets` cover of the `d`-petal bouquet: `perms[i][x]` is the
/// endpoint of the lift of petal `i` starting at sheet `x`. Sheet 0 is the
/// distinguished base sheet.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoveringGraph {
    pub d: usize,
    pub n_sheets: usize,
    pub perms: Vec<Vec<usize>>,
}

/// Names the bouquet group `G^d_{p,q}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SubgroupDescriptor {
    pub d: usize,
    pub p: Int,
    pub q: Int,
}

impl std::fmt::Display for SubgroupDescriptor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "G^{}_{{{},{}}}", self.d, self.p, self.q)
    }
}

#[derive(Debug, Error)]
pub enum CoverError {
    #[error("petal count mismatch: d = {d} but {given} permutations given")]
    PetalCount { d: usize, given: usize },
    #[error("permutation {petal} is not a bijection of 0..{n}")]
    NotBijection { petal: usize, n: usize },
    #[error("intransitive action: the cover is disconnected")]
    Intransitive,
    #[error("cover requires d >= 1 and n_sheets >= 1")]
    Empty,
    #[error("gamma_k requires k >= 3, got {0}")]
    GammaRange(usize),
    #[error("cover JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("zero is not a valid Baumslag-Solitar parameter")]
    ZeroParameter,
    #[error("subgroup index {0} exceeds the supported range")]
    IndexTooLarge(Int),
}

/// Validate `d` permutations on `n` points as a connected cover.
pub fn covering_from_permutations(
    d: usize,
    n_sheets: usize,
    perms: Vec<Vec<usize>>,
) -> Result<CoveringGraph, CoverError> {
    if d == 0 || n_sheets == 0 {
        return Err(CoverError::Empty);
    }
    if perms.len() != d {
        return Err(CoverError::PetalCount {
            d,
            given: perms.len(),
        });
    }
    for (i, p) in perms.iter().enumerate() {
        let mut hit = vec![false; n_sheets];
        if p.len() != n_sheets {
            return Err(CoverError::NotBijection {
                petal: i,
                n: n_sheets,
            });
        }
        for &img in p {
            if img >= n_sheets || hit[img] {
                return Err(CoverError::NotBijection {
                    petal: i,
                    n: n_sheets,
                });
            }
            hit[img] = true;
        }
    }
    let c = CoveringGraph { d, n_sheets, perms };
    if !c.is_transitive() {
        return Err(CoverError::Intransitive);
    }
    Ok(c)
}

impl CoveringGraph {
    /// The one-sheet cover: the defining bouquet of `G^d_{p,q}` itself.
    pub fn trivial(d: usize) -> Self {
        CoveringGraph {
            d,
            n_sheets: 1,
            perms: vec![vec![0]; d],
        }
    }

    /// Index of the represented subgroup.
    pub fn index(&self) -> usize {
        self.n_sheets
    }

    fn is_transitive(&self) -> bool {
        let mut seen = vec![false; self.n_sheets];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(x) = stack.pop() {
            for p in &self.perms {
                for y in [p[x], p.iter().position(|&z| z == x).expect("bijection")] {
                    if !seen[y] {
                        seen[y] = true;
                        stack.push(y);
                    }
                }
            }
        }
        seen.into_iter().all(|b| b)
    }

    pub fn from_json(s: &str) -> Result<Self, CoverError> {
        let raw: CoveringGraph = serde_json::from_str(s)?;
        covering_from_permutations(raw.d, raw.n_sheets, raw.perms)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("cover serialization cannot fail")
    }
}

/// The labelled GBS graph of the cover: `n_sheets` vertices `v{x}`, and for
/// each petal `i` and sheet `x` an edge `e{i}_{x}` from `v{x}` to
/// `v{perms[i][x]}` labelled `(p, q)`.
pub fn lift_labels(c: &CoveringGraph, p: &Int, q: &Int) -> GbsGraph {
    let vertices: Vec<String> = (0..c.n_sheets).map(|x| format!("v{x}")).collect();
    let mut edges = Vec::with_capacity(c.d * c.n_sheets);
    for (i, perm) in c.perms.iter().enumerate() {
        for (x, &y) in perm.iter().enumerate() {
            edges.push((
                format!("e{i}_{x}"),
                format!("v{x}"),
                format!("v{y}"),
                p.clone(),
                q.clone(),
            ));
        }
    }
    GbsGraph::new(vertices, edges).expect("a validated cover lifts to a valid graph")
}

/// The standard finite-index subgroup `H_{m,n}` of `BS(m,n)`: the kernel of
/// the map onto `Z/d` killing the stable letter, where `d = gcd(|m|, n)`.
/// It is isomorphic to `G^d_{|m|/d, n/d}` and has index `d`.
pub fn standard_subgroup(m: &Int, n: &Int) -> Result<(usize, SubgroupDescriptor), CoverError> {
    use num_traits::Zero;
    if m.is_zero() || n.is_zero() {
        return Err(CoverError::ZeroParameter);
    }
    let m_abs = m.abs();
    let n_abs = n.abs();
    let d = m_abs.gcd(&n_abs);
    let idx: usize = (&d)
        .try_into()
        .map_err(|_| CoverError::IndexTooLarge(d.clone()))?;
    Ok((
        idx,
        SubgroupDescriptor {
            d: idx,
            p: &m_abs / &d,
            q: &n_abs / &d,
        },
    ))
}

/// The index-2 subgroup of `BS(m,n)` killing the exponent sum of the stable
/// letter mod 2: a simple cycle of length 2 with both edges labelled `(m,n)`.
pub fn index2_cycle(m: &Int, n: &Int) -> GbsGraph {
    GbsGraph::new(
        vec!["u".into(), "w".into()],
        vec![
            ("c0".into(), "u".into(), "w".into(), m.clone(), n.clone()),
            ("c1".into(), "w".into(), "u".into(), m.clone(), n.clone()),
        ],
    )
    .expect("two-cycle is always valid for nonzero labels")
}

/// The `(k-1)`-sheet cover of the 2-petal bouquet whose total space has rank
/// `k`: petal `a` keeps a loop at the first sheet (and at the last sheet when
/// `k` is odd, where petal `b` keeps one instead when `k` is even), and the
/// two petals alternate transpositions along the sheet chain.
pub fn gamma_k(k: usize) -> Result<CoveringGraph, CoverError> {
    if k < 3 {
        return Err(CoverError::GammaRange(k));
    }
    let n = k - 1;
    let mut sigma_a: Vec<usize> = (0..n).collect();
    let mut sigma_b: Vec<usize> = (0..n).collect();
    // Sheets 0..n-1 stand for the chain of vertices; petal a swaps
    // (1,2),(3,4),… and petal b swaps (0,1),(2,3),…
    let mut x = 1;
    while x + 1 < n {
        sigma_a.swap(x, x + 1);
        x += 2;
    }
    let mut x = 0;
    while x + 1 < n {
        sigma_b.swap(x, x + 1);
        x += 2;
    }
    covering_from_permutations(2, n, vec![sigma_a, sigma_b])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modular::{image_generator_cyclic, modular_image};
    use rand::seq::SliceRandom;
    use rand::SeedableRng;

    fn int(v: i64) -> Int {
        Int::from(v)
    }

    /// The four-sheet cover of the 2-petal bouquet used as the golden
    /// example: petal 0 a 4-cycle, petal 1 two transpositions.
    pub(crate) fn four_sheet_cover() -> CoveringGraph {
        covering_from_permutations(2, 4, vec![vec![1, 2, 3, 0], vec![1, 0, 3, 2]]).unwrap()
    }

    #[test]
    fn trivial_cover_is_bouquet() {
        let c = CoveringGraph::trivial(2);
        let g = lift_labels(&c, &int(1), &int(3));
        assert_eq!(g.vertex_count(), 1);
        assert_eq!(g.edge_count(), 2);
        for e in g.edges() {
            assert_eq!((e.a.clone(), e.omega.clone()), (int(1), int(3)));
        }
    }

    #[test]
    fn intransitive_cover_rejected() {
        let err = covering_from_permutations(2, 2, vec![vec![0, 1], vec![0, 1]]);
        assert!(matches!(err, Err(CoverError::Intransitive)));
    }

    #[test]
    fn non_bijection_rejected() {
        let err = covering_from_permutations(1, 2, vec![vec![0, 0]]);
        assert!(matches!(err, Err(CoverError::NotBijection { .. })));
    }

    #[test]
    fn four_sheet_cover_lifts_to_figure_shape() {
        let g = lift_labels(&four_sheet_cover(), &int(1), &int(5));
        assert_eq!(g.vertex_count(), 4);
        assert_eq!(g.edge_count(), 8);
        assert_eq!(g.betti_number(), 5);
        for v in 0..4 {
            let outgoing = g.edges().iter().filter(|e| e.source == v).count();
            let incoming = g.edges().iter().filter(|e| e.target == v).count();
            assert_eq!((outgoing, incoming), (2, 2));
        }
    }

    #[test]
    fn directed_cycle_cover() {
        let c = covering_from_permutations(1, 3, vec![vec![1, 2, 0]]).unwrap();
        let g = lift_labels(&c, &int(2), &int(3));
        assert_eq!(g.vertex_count(), 3);
        assert_eq!(g.edge_count(), 3);
        assert_eq!(g.betti_number(), 1);
        assert!(g.is_reduced());
    }

    #[test]
    fn reduced_when_q_gt_p_gt_1() {
        let g = lift_labels(&four_sheet_cover(), &int(2), &int(3));
        assert!(g.is_reduced());
        assert!(g.find_proper_plateau().is_none());
    }

    #[test]
    fn standard_subgroup_examples() {
        let (d, desc) = standard_subgroup(&int(4), &int(6)).unwrap();
        assert_eq!(d, 2);
        assert_eq!(
            desc,
            SubgroupDescriptor {
                d: 2,
                p: int(2),
                q: int(3)
            }
        );
        let (d, desc) = standard_subgroup(&int(2), &int(6)).unwrap();
        assert_eq!(d, 2);
        assert_eq!(
            desc,
            SubgroupDescriptor {
                d: 2,
                p: int(1),
                q: int(3)
            }
        );
        let (d, desc) = standard_subgroup(&int(2), &int(3)).unwrap();
        assert_eq!(d, 1);
        assert_eq!(
            desc,
            SubgroupDescriptor {
                d: 1,
                p: int(2),
                q: int(3)
            }
        );
        // Signs are dropped: the subgroup is taken in BS(|m|, n).
        let (d, _) = standard_subgroup(&int(-4), &int(6)).unwrap();
        assert_eq!(d, 2);
    }

    #[test]
    fn index2_cycle_examples() {
        let g = index2_cycle(&int(2), &int(3));
        assert_eq!(g.vertex_count(), 2);
        for e in g.edges() {
            assert_eq!((e.a.clone(), e.omega.clone()), (int(2), int(3)));
        }
        let neg = index2_cycle(&int(-2), &int(3));
        assert_eq!(neg.sign_normalize(), g);
        assert_eq!(
            image_generator_cyclic(&modular_image(&g)),
            Some(crate::Rat::new(int(9), int(4)))
        );
    }

    #[test]
    fn gamma_k_small_cases() {
        // k = 3: two sheets, petal a trivial (loops at both), petal b a swap.
        let c = gamma_k(3).unwrap();
        assert_eq!(c.n_sheets, 2);
        assert_eq!(c.perms, vec![vec![0, 1], vec![1, 0]]);
        // k = 4: petal a fixes sheet 0 and swaps 1,2; petal b swaps 0,1 and
        // fixes 2.
        let c = gamma_k(4).unwrap();
        assert_eq!(c.n_sheets, 3);
        assert_eq!(c.perms, vec![vec![0, 2, 1], vec![1, 0, 2]]);
        assert!(gamma_k(2).is_err());
    }

    #[test]
    fn gamma_k_rank() {
        for k in 3..=10 {
            let g = lift_labels(&gamma_k(k).unwrap(), &int(1), &int(3));
            assert_eq!(g.betti_number(), k);
        }
    }

    #[test]
    fn cover_json_round_trip() {
        let c = four_sheet_cover();
        let s = c.to_json();
        assert_eq!(s, r#"{"d":2,"n_sheets":4,"perms":[[1,2,3,0],[1,0,3,2]]}"#);
        assert_eq!(CoveringGraph::from_json(&s).unwrap(), c);
    }

    #[test]
    fn random_covers_satisfy_degree_and_betti() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        let mut produced = 0;
        while produced < 50 {
            let d = 1 + (produced % 3);
            let n = 1 + (produced % 8);
            let perms: Vec<Vec<usize>> = (0..d)
                .map(|_| {
                    let mut p: Vec<usize> = (0..n).collect();
                    p.shuffle(&mut rng);
                    p
                })
                .collect();
            let Ok(c) = covering_from_permutations(d, n, perms) else {
                continue;
            };
            produced += 1;
            let g = lift_labels(&c, &int(2), &int(5));
            assert_eq!(g.betti_number(), n * (d - 1) + 1);
            for v in 0..n {
                assert_eq!(g.edges().iter().filter(|e| e.source == v).count(), d);
                assert_eq!(g.edges().iter().filter(|e| e.target == v).count(), d);
            }
        }
    }

    #[test]
    fn cycle_cover_modular_image_is_power_of_base() {
        for n in 1..=6usize {
            let perm: Vec<usize> = (0..n).map(|x| (x + 1) % n).collect();
            let c = covering_from_permutations(1, n, vec![perm]).unwrap();
            let g = lift_labels(&c, &int(2), &int(3));
            let expected = crate::Rat::new(
                crate::arith::pow(&int(3), n as u64),
                crate::arith::pow(&int(2), n as u64),
            );
            assert_eq!(image_generator_cyclic(&modular_image(&g)), Some(expected));
        }
    }
}
