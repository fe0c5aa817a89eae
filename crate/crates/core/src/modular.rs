//! The modular homomorphism image and rational-power relationships.
//!
//! The modular homomorphism sends a GBS group element corresponding to a
//! closed path `e_1…e_l` to the rational `A(e_1)/Omega(e_1) ··· A(e_l)/Omega(e_l)`.
//! Its image `M(G)` is a finitely generated subgroup of `Q*` and a
//! commensurability-sensitive invariant: we canonicalise it as a sign bit
//! plus a lattice of prime-exponent vectors in Hermite normal form.

use std::collections::VecDeque;
use std::fmt;

use num_integer::Integer as _;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::arith;
use crate::graph::{GbsGraph, OrientedEdge};
use crate::{Int, Rat};

/// Canonical form of a finitely generated subgroup of `Q*`: whether any
/// element is negative, the primes that occur, and a Hermite-normal-form
/// basis of the exponent lattice over those primes. The trivial image is an
/// empty basis with positive sign.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModularImage {
    pub negative: bool,
    pub primes: Vec<Int>,
    pub basis: Vec<Vec<Int>>,
}

impl ModularImage {
    pub fn trivial() -> Self {
        ModularImage {
            negative: false,
            primes: Vec::new(),
            basis: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn is_trivial(&self) -> bool {
        !self.negative && self.basis.is_empty()
    }
}

impl fmt::Display for ModularImage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_trivial() {
            return write!(f, "trivial");
        }
        let sign = if self.negative { "-" } else { "+" };
        let primes: Vec<String> = self.primes.iter().map(|p| p.to_string()).collect();
        let rows: Vec<String> = self
            .basis
            .iter()
            .map(|r| {
                let cells: Vec<String> = r.iter().map(|c| c.to_string()).collect();
                format!("[{}]", cells.join(","))
            })
            .collect();
        write!(
            f,
            "sign {sign}; primes [{}]; basis [{}]",
            primes.join(","),
            rows.join(",")
        )
    }
}

/// `n = base^exponent` with the base not a perfect power.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimitiveBase {
    pub base: Int,
    pub exponent: u64,
}

#[derive(Debug, Error)]
pub enum ModularError {
    #[error("primitive base requires n >= 2, got {0}")]
    OutOfRange(Int),
    #[error("common power requires rationals > 1 in lowest terms")]
    BadRational,
}

/// Compute the image of the modular homomorphism from a cycle basis of the
/// underlying graph: a BFS spanning tree in declaration order contributes one
/// basis cycle per chord, and each cycle's modulus is evaluated by the
/// product formula over its oriented edges.
pub fn modular_image(g: &GbsGraph) -> ModularImage {
    let n = g.vertex_count();
    let mut parent: Vec<Option<OrientedEdge>> = vec![None; n]; // oriented away from the root
    let mut seen = vec![false; n];
    let mut tree_edges = vec![false; g.edge_count()];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    while let Some(v) = queue.pop_front() {
        for oe in g.oriented_edges() {
            if g.origin(oe) == v && !seen[g.terminus(oe)] {
                let w = g.terminus(oe);
                seen[w] = true;
                tree_edges[oe.edge] = true;
                parent[w] = Some(oe);
                queue.push_back(w);
            }
        }
    }

    let mut primes: Vec<Int> = Vec::new();
    let mut gens: Vec<(bool, Vec<(usize, Int)>)> = Vec::new();

    fn prime_index(p: &Int, primes: &mut Vec<Int>) -> usize {
        if let Some(i) = primes.iter().position(|q| q == p) {
            i
        } else {
            primes.push(p.clone());
            primes.len() - 1
        }
    }

    // Exponent vector and sign of A(e)/Omega(e) for one oriented edge.
    fn edge_vec(
        g: &GbsGraph,
        oe: OrientedEdge,
        primes: &mut Vec<Int>,
    ) -> (bool, Vec<(usize, Int)>) {
        let a = g.a_label(oe);
        let o = g.omega_label(oe);
        let mut v: Vec<(usize, Int)> = Vec::new();
        for (p, e) in arith::factorize(&a.abs()) {
            let i = prime_index(&p, primes);
            bump(&mut v, i, Int::from(e));
        }
        for (p, e) in arith::factorize(&o.abs()) {
            let i = prime_index(&p, primes);
            bump(&mut v, i, -Int::from(e));
        }
        (a.is_negative() != o.is_negative(), v)
    }

    // Modulus of the tree path root -> v.
    let path_vec = |mut v: usize, primes: &mut Vec<Int>| -> (bool, Vec<(usize, Int)>) {
        let mut sign = false;
        let mut acc: Vec<(usize, Int)> = Vec::new();
        while let Some(oe) = parent[v] {
            let (s, vec) = edge_vec(g, oe, primes);
            sign ^= s;
            for (i, c) in vec {
                bump(&mut acc, i, c);
            }
            v = g.origin(oe);
        }
        (sign, acc)
    };

    for idx in 0..g.edge_count() {
        if tree_edges[idx] {
            continue;
        }
        let oe = OrientedEdge::forward(idx);
        let (se, ve) = edge_vec(g, oe, &mut primes);
        let (sa, va) = path_vec(g.origin(oe), &mut primes);
        let (so, vo) = path_vec(g.terminus(oe), &mut primes);
        // Closed path: root -> origin, the chord, terminus -> root.
        let mut vec = va;
        for (i, c) in ve {
            bump(&mut vec, i, c);
        }
        for (i, c) in vo {
            bump(&mut vec, i, -c);
        }
        gens.push((sa ^ se ^ so, vec));
    }

    canonicalize(primes, gens)
}

fn bump(v: &mut Vec<(usize, Int)>, i: usize, c: Int) {
    if let Some(slot) = v.iter_mut().find(|(j, _)| *j == i) {
        slot.1 += c;
    } else {
        v.push((i, c));
    }
}

/// Sort primes, densify the generators, reduce to Hermite normal form and
/// drop unused prime columns.
fn canonicalize(primes: Vec<Int>, gens: Vec<(bool, Vec<(usize, Int)>)>) -> ModularImage {
    let negative = gens.iter().any(|(s, _)| *s);
    let mut order: Vec<usize> = (0..primes.len()).collect();
    order.sort_by(|&x, &y| primes[x].cmp(&primes[y]));
    let mut rows: Vec<Vec<Int>> = gens
        .iter()
        .map(|(_, sparse)| {
            order
                .iter()
                .map(|&col| {
                    sparse
                        .iter()
                        .find(|(i, _)| *i == col)
                        .map(|(_, c)| c.clone())
                        .unwrap_or_else(Int::zero)
                })
                .collect()
        })
        .collect();
    let sorted_primes: Vec<Int> = order.iter().map(|&i| primes[i].clone()).collect();
    let basis = hermite_normal_form(&mut rows, sorted_primes.len());
    let used: Vec<usize> = (0..sorted_primes.len())
        .filter(|&c| basis.iter().any(|r| !r[c].is_zero()))
        .collect();
    ModularImage {
        negative,
        primes: used.iter().map(|&c| sorted_primes[c].clone()).collect(),
        basis: basis
            .iter()
            .map(|r| used.iter().map(|&c| r[c].clone()).collect())
            .collect(),
    }
}

/// Row-style Hermite normal form over Z: echelon with positive pivots and
/// entries above each pivot reduced into `[0, pivot)`. The row span is
/// unchanged, so equal lattices get identical bases.
fn hermite_normal_form(rows: &mut Vec<Vec<Int>>, cols: usize) -> Vec<Vec<Int>> {
    let mut r = 0;
    for c in 0..cols {
        loop {
            let mut pivot: Option<usize> = None;
            for i in r..rows.len() {
                if !rows[i][c].is_zero() {
                    pivot = match pivot {
                        None => Some(i),
                        Some(j) if rows[i][c].abs() < rows[j][c].abs() => Some(i),
                        keep => keep,
                    };
                }
            }
            let Some(p) = pivot else { break };
            rows.swap(r, p);
            let mut cleared = true;
            for i in (r + 1)..rows.len() {
                if !rows[i][c].is_zero() {
                    let q = rows[i][c].div_floor(&rows[r][c]);
                    for k in 0..cols {
                        let sub = &rows[r][k] * &q;
                        rows[i][k] -= sub;
                    }
                    if !rows[i][c].is_zero() {
                        cleared = false;
                    }
                }
            }
            if cleared {
                break;
            }
        }
        if r < rows.len() && !rows[r][c].is_zero() {
            if rows[r][c].is_negative() {
                for k in 0..cols {
                    rows[r][k] = -rows[r][k].clone();
                }
            }
            for i in 0..r {
                let q = rows[i][c].div_floor(&rows[r][c]);
                if !q.is_zero() {
                    for k in 0..cols {
                        let sub = &rows[r][k] * &q;
                        rows[i][k] -= sub;
                    }
                }
            }
            r += 1;
        }
    }
    rows.truncate(r);
    rows.clone()
}

/// If the image is cyclic and generated by a positive rational, return the
/// generator `q >= 1`; the trivial image yields `1`.
pub fn image_generator_cyclic(img: &ModularImage) -> Option<Rat> {
    if img.negative {
        return None;
    }
    match img.basis.len() {
        0 => Some(Rat::one()),
        1 => {
            let mut num = Int::one();
            let mut den = Int::one();
            for (p, e) in img.primes.iter().zip(&img.basis[0]) {
                let mag: u64 = e.abs().try_into().expect("desk-scale exponent");
                if e.is_positive() {
                    num *= arith::pow(p, mag);
                } else if e.is_negative() {
                    den *= arith::pow(p, mag);
                }
            }
            let q = Rat::new(num, den);
            Some(if q < Rat::one() { q.recip() } else { q })
        }
        _ => None,
    }
}

/// Factor `n >= 2` as `base^exponent` with the base not a perfect power:
/// the exponent is the gcd of the prime exponents of `n`.
pub fn primitive_base(n: &Int) -> Result<PrimitiveBase, ModularError> {
    if *n < Int::from(2) {
        return Err(ModularError::OutOfRange(n.clone()));
    }
    let fs = arith::factorize(n);
    let e = fs.iter().fold(0u64, |acc, (_, ex)| acc.gcd(ex));
    let base = fs
        .iter()
        .fold(Int::one(), |acc, (p, ex)| acc * arith::pow(p, ex / e));
    Ok(PrimitiveBase { base, exponent: e })
}

/// Minimal positive `(k, l)` with `q1^k = q2^l`, if the two rationals are
/// powers of a common rational; decided by proportionality of the
/// prime-exponent vectors.
pub fn common_power(q1: &Rat, q2: &Rat) -> Result<Option<(u64, u64)>, ModularError> {
    if *q1 <= Rat::one() || *q2 <= Rat::one() {
        return Err(ModularError::BadRational);
    }
    let v1 = exponent_vector(q1);
    let v2 = exponent_vector(q2);
    let keys: Vec<&Int> = {
        let mut k: Vec<&Int> = v1
            .iter()
            .map(|(p, _)| p)
            .chain(v2.iter().map(|(p, _)| p))
            .collect();
        k.sort();
        k.dedup();
        k
    };
    let get = |v: &[(Int, Int)], p: &Int| {
        v.iter()
            .find(|(q, _)| q == p)
            .map(|(_, e)| e.clone())
            .unwrap_or_else(Int::zero)
    };
    let dense1: Vec<Int> = keys.iter().map(|p| get(&v1, p)).collect();
    let dense2: Vec<Int> = keys.iter().map(|p| get(&v2, p)).collect();
    let g1 = dense1.iter().fold(Int::zero(), |acc, x| acc.gcd(x));
    let g2 = dense2.iter().fold(Int::zero(), |acc, x| acc.gcd(x));
    debug_assert!(g1.is_positive() && g2.is_positive());
    let prim1: Vec<Int> = dense1.iter().map(|x| x / &g1).collect();
    let prim2: Vec<Int> = dense2.iter().map(|x| x / &g2).collect();
    if prim1 != prim2 {
        return Ok(None);
    }
    let d = g1.gcd(&g2);
    let k = (&g2 / &d)
        .try_into()
        .map_err(|_| ModularError::BadRational)?;
    let l = (&g1 / &d)
        .try_into()
        .map_err(|_| ModularError::BadRational)?;
    Ok(Some((k, l)))
}

fn exponent_vector(q: &Rat) -> Vec<(Int, Int)> {
    let mut v: Vec<(Int, Int)> = Vec::new();
    for (p, e) in arith::factorize(&q.numer().abs()) {
        v.push((p, Int::from(e)));
    }
    for (p, e) in arith::factorize(&q.denom().abs()) {
        if let Some(slot) = v.iter_mut().find(|(x, _)| *x == p) {
            slot.1 -= Int::from(e);
        } else {
            v.push((p, -Int::from(e)));
        }
    }
    v.retain(|(_, e)| !e.is_zero());
    v.sort_by(|a, b| a.0.cmp(&b.0));
    v
}
