//! Commensurability classification of Baumslag-Solitar groups, with
//! constructive witness certificates.
//!
//! After normalising to `1 <= |m| <= n`, two groups `BS(m1,n1)`, `BS(m2,n2)`
//! are commensurable iff one of: both solvable (`|m| = 1`) with `n1, n2`
//! powers of the same integer; equal `(|m|, n)` pairs (the sign of `m` never
//! matters); or both strictly ascending (`|m| > 1`, `m | n`) with equal
//! ratios `n/|m|`. Every negative answer carries the reason it fails and
//! every positive answer can emit a certificate chain of finite-index
//! subgroups that an independent checker re-validates.

use num_integer::Integer as _;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::arith;
use crate::covering::{gamma_k, index2_cycle, lift_labels, standard_subgroup, CoveringGraph};
use crate::iso::iso_normal_forms;
use crate::modular::primitive_base;
use crate::normalform::normal_form_of_cover;
use crate::Int;

/// A Baumslag-Solitar parameter pair normalised to `1 <= |m| <= n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BsPair {
    #[serde(with = "crate::int_string")]
    pub m: Int,
    #[serde(with = "crate::int_string")]
    pub n: Int,
}

impl std::fmt::Display for BsPair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "BS({},{})", self.m, self.n)
    }
}

/// Which clause of the classification decided the answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CommCase {
    /// Identical normalised pairs.
    EqualPair,
    /// Both solvable, `n1` and `n2` powers of the same integer.
    SolvablePowers,
    /// Same `(|m|, n)`, opposite signs of `m`.
    SignTwin,
    /// Both strictly ascending with the same ratio `n/|m|`.
    CommonRatio,
    /// Modular images admit no common power (covers the solvable-vs-solvable
    /// failures, including `BS(±1,1)` against any other group).
    ModularObstruction,
    /// Exactly one side is solvable.
    MixedSolvability,
    /// `|m| | n` on one side only.
    DivisibilityMismatch,
    /// Both ascending but with different ratios.
    RatioMismatch,
    /// Both non-ascending and the pairs differ: rigid.
    RigidNonAscending,
}

impl CommCase {
    pub fn positive(self) -> bool {
        matches!(
            self,
            CommCase::EqualPair
                | CommCase::SolvablePowers
                | CommCase::SignTwin
                | CommCase::CommonRatio
        )
    }
}

/// Decision with its case tag; the witness is filled in by [`witness`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CommVerdict {
    pub commensurable: bool,
    pub case: CommCase,
    pub witness: Option<Certificate>,
}

/// One step of a commensurability certificate. Graph-bearing steps are
/// re-validated through the covering and normal-form machinery.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum CertStep {
    /// `H_{m,n} = G^d_{p,q}` of index `d = gcd(|m|, n)` inside `BS(m,n)`.
    StandardSubgroup {
        #[serde(with = "crate::int_string")]
        m: Int,
        #[serde(with = "crate::int_string")]
        n: Int,
        d: usize,
        #[serde(with = "crate::int_string")]
        p: Int,
        #[serde(with = "crate::int_string")]
        q: Int,
    },
    /// The index-2 cycle subgroup of `BS(m,n)`.
    Index2Cycle {
        #[serde(with = "crate::int_string")]
        m: Int,
        #[serde(with = "crate::int_string")]
        n: Int,
    },
    /// `G^k_{1,n}` embedded with index `k-1` in `G^2_{1,n}`.
    GammaKEmbedding {
        k: usize,
        #[serde(with = "crate::int_string")]
        n: Int,
        index: usize,
    },
    /// `BS(1, base^exponent)` embeds with finite index in both solvable
    /// groups.
    CommonSolvable {
        #[serde(with = "crate::int_string")]
        base: Int,
        exponent: u64,
    },
    /// Both unimodular groups contain a finite-index `F_rank × Z`.
    FreeTimesZ { rank: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Certificate {
    pub steps: Vec<CertStep>,
}

#[derive(Debug, Error)]
pub enum CommError {
    #[error("zero is not a valid Baumslag-Solitar parameter")]
    ZeroInput,
    #[error("groups are not commensurable; no witness exists")]
    NotCommensurable,
    #[error("certificate check failed: {0}")]
    BadCertificate(String),
}

/// Normalise using `BS(-m,-n) = BS(m,n) = BS(n,m)`: swap so `|m| <= |n|`,
/// then clear the sign of `n`.
pub fn bs_normalize(m: &Int, n: &Int) -> Result<BsPair, CommError> {
    if m.is_zero() || n.is_zero() {
        return Err(CommError::ZeroInput);
    }
    let (mut m, mut n) = (m.clone(), n.clone());
    if m.abs() > n.abs() {
        std::mem::swap(&mut m, &mut n);
    }
    if n.is_negative() {
        m = -m;
        n = -n;
    }
    debug_assert!(Int::one() <= m.abs() && m.abs() <= n);
    Ok(BsPair { m, n })
}

/// Decide commensurability of `BS(m1,n1)` and `BS(m2,n2)`.
pub fn commensurable(m1: &Int, n1: &Int, m2: &Int, n2: &Int) -> Result<CommVerdict, CommError> {
    let a = bs_normalize(m1, n1)?;
    let b = bs_normalize(m2, n2)?;
    let case = decide(&a, &b);
    Ok(CommVerdict {
        commensurable: case.positive(),
        case,
        witness: None,
    })
}

fn decide(a: &BsPair, b: &BsPair) -> CommCase {
    let one = Int::one();
    if a.m.abs() == b.m.abs() && a.n == b.n {
        return if a.m == b.m {
            CommCase::EqualPair
        } else {
            CommCase::SignTwin
        };
    }
    let solv_a = a.m.abs() == one;
    let solv_b = b.m.abs() == one;
    if solv_a && solv_b {
        // Distinct (|m|, n) pairs here, so n = 1 on either side is fatal:
        // Z x Z and the Klein bottle group are commensurable with nothing
        // else (their modular images are trivial, everyone else's is not).
        if a.n > one && b.n > one {
            let pa = primitive_base(&a.n).expect("n >= 2");
            let pb = primitive_base(&b.n).expect("n >= 2");
            if pa.base == pb.base {
                return CommCase::SolvablePowers;
            }
        }
        return CommCase::ModularObstruction;
    }
    if solv_a != solv_b {
        return CommCase::MixedSolvability;
    }
    let div_a = (&a.n % &a.m.abs()).is_zero();
    let div_b = (&b.n % &b.m.abs()).is_zero();
    match (div_a, div_b) {
        (true, false) | (false, true) => CommCase::DivisibilityMismatch,
        (true, true) => {
            if &a.n / a.m.abs() == &b.n / b.m.abs() {
                CommCase::CommonRatio
            } else {
                CommCase::RatioMismatch
            }
        }
        (false, false) => CommCase::RigidNonAscending,
    }
}

/// Emit a certificate chain for a positive verdict.
pub fn witness(m1: &Int, n1: &Int, m2: &Int, n2: &Int) -> Result<Certificate, CommError> {
    let a = bs_normalize(m1, n1)?;
    let b = bs_normalize(m2, n2)?;
    let case = decide(&a, &b);
    let steps = match case {
        CommCase::EqualPair => Vec::new(),
        CommCase::SignTwin => vec![
            CertStep::Index2Cycle {
                m: a.m.clone(),
                n: a.n.clone(),
            },
            CertStep::Index2Cycle {
                m: b.m.clone(),
                n: b.n.clone(),
            },
        ],
        CommCase::SolvablePowers => {
            let pa = primitive_base(&a.n).expect("n >= 2");
            let pb = primitive_base(&b.n).expect("n >= 2");
            debug_assert_eq!(pa.base, pb.base);
            vec![CertStep::CommonSolvable {
                base: pa.base,
                exponent: pa.exponent.lcm(&pb.exponent),
            }]
        }
        CommCase::CommonRatio => {
            let ka = standard_step(&a)?;
            let kb = standard_step(&b)?;
            let ratio = &a.n / a.m.abs();
            let mut steps = vec![ka.0, kb.0];
            if ratio.is_one() {
                steps.push(CertStep::FreeTimesZ { rank: 2 });
            } else {
                for k in [ka.1, kb.1] {
                    if k > 2 {
                        steps.push(CertStep::GammaKEmbedding {
                            k,
                            n: ratio.clone(),
                            index: k - 1,
                        });
                    }
                }
            }
            steps
        }
        _ => return Err(CommError::NotCommensurable),
    };
    Ok(Certificate { steps })
}

fn standard_step(p: &BsPair) -> Result<(CertStep, usize), CommError> {
    let (d, desc) = standard_subgroup(&p.m, &p.n).map_err(|_| CommError::ZeroInput)?;
    Ok((
        CertStep::StandardSubgroup {
            m: p.m.clone(),
            n: p.n.clone(),
            d,
            p: desc.p,
            q: desc.q,
        },
        d,
    ))
}

/// Independent validation of a certificate against the original pairs.
/// Every graph-bearing step is rebuilt and re-checked: covers validate,
/// indices match, and embedding steps re-run the normal-form pipeline.
pub fn validate_certificate(
    cert: &Certificate,
    m1: &Int,
    n1: &Int,
    m2: &Int,
    n2: &Int,
) -> Result<(), CommError> {
    let a = bs_normalize(m1, n1)?;
    let b = bs_normalize(m2, n2)?;
    let bad = |msg: String| Err(CommError::BadCertificate(msg));

    // Empty chain: only valid when the normalised pairs coincide.
    if cert.steps.is_empty() {
        return if a == b {
            Ok(())
        } else {
            bad("empty certificate for distinct pairs".into())
        };
    }

    if let [CertStep::Index2Cycle { m: ma, n: na }, CertStep::Index2Cycle { m: mb, n: nb }] =
        &cert.steps[..]
    {
        if (ma, na) != (&a.m, &a.n) || (mb, nb) != (&b.m, &b.n) {
            return bad("index-2 steps do not name the input pairs".into());
        }
        if ma.abs() != mb.abs() || na != nb {
            return bad("index-2 steps require |m1| = |m2| and n1 = n2".into());
        }
        let ga = index2_cycle(ma, na).sign_normalize();
        let gb = index2_cycle(mb, nb).sign_normalize();
        if ga != gb {
            return bad("sign-normalised index-2 cycles differ".into());
        }
        return Ok(());
    }

    if let [CertStep::CommonSolvable { base, exponent }] = &cert.steps[..] {
        if primitive_base(base)
            .map(|p| p.exponent != 1)
            .unwrap_or(true)
        {
            return bad(format!("{base} is not a primitive base"));
        }
        for p in [&a, &b] {
            if p.m.abs() != Int::one() {
                return bad(format!("{p} is not solvable"));
            }
            let Some(e) = arith::exact_log(&p.n, base) else {
                return bad(format!("{} is not a power of {base}", p.n));
            };
            if e == 0 || exponent % e != 0 {
                return bad(format!("exponent {exponent} is not a multiple of {e}"));
            }
        }
        return Ok(());
    }

    // Common-ratio chains: two standard subgroups, then either the
    // unimodular marker or gamma embeddings into G^2.
    let mut steps = cert.steps.iter();
    let mut ratio: Option<Int> = None;
    let mut ks: Vec<usize> = Vec::new();
    for p in [&a, &b] {
        let Some(CertStep::StandardSubgroup {
            m,
            n,
            d,
            p: sp,
            q: sq,
        }) = steps.next()
        else {
            return bad("expected a standard-subgroup step".into());
        };
        if (m, n) != (&p.m, &p.n) {
            return bad("standard subgroup step does not name the input pair".into());
        }
        let (want_d, desc) = standard_subgroup(m, n).map_err(|_| CommError::ZeroInput)?;
        if *d != want_d || *sp != desc.p || *sq != desc.q {
            return bad(format!("wrong standard subgroup for {p}"));
        }
        if !sp.is_one() {
            return bad(format!("{p} is not ascending: H has p = {sp} > 1"));
        }
        // The subgroup is a bouquet cover; make sure it is a valid graph.
        let g = lift_labels(&CoveringGraph::trivial(*d), sp, sq);
        if g.edge_count() != *d {
            return bad("standard subgroup bouquet has the wrong petal count".into());
        }
        match &ratio {
            None => ratio = Some(sq.clone()),
            Some(r) if r == sq => {}
            Some(r) => return bad(format!("ratios differ: {r} vs {sq}")),
        }
        ks.push(*d);
    }
    let ratio = ratio.expect("two standard steps seen");
    let rest: Vec<&CertStep> = steps.collect();
    if ratio.is_one() {
        let [CertStep::FreeTimesZ { rank }] = rest[..] else {
            return bad("unimodular chain must end in a free-times-Z marker".into());
        };
        if *rank < 2 || ks.iter().any(|k| *k < 2) {
            return bad("free-times-Z marker needs rank >= 2 on both sides".into());
        }
        return Ok(());
    }
    let mut want: Vec<usize> = ks.iter().copied().filter(|k| *k > 2).collect();
    for step in rest {
        let CertStep::GammaKEmbedding { k, n, index } = step else {
            return bad("expected a gamma embedding step".into());
        };
        if want.first() != Some(k) {
            return bad(format!("unexpected gamma embedding for k = {k}"));
        }
        want.remove(0);
        if *n != ratio {
            return bad("gamma embedding over the wrong base".into());
        }
        let cover = gamma_k(*k).map_err(|e| CommError::BadCertificate(e.to_string()))?;
        if cover.index() != *index || *index != k - 1 {
            return bad(format!("gamma cover for k = {k} has the wrong index"));
        }
        // The embedded image must be G^k_{1,n}: compare normal forms.
        let emb = normal_form_of_cover(&cover, &ratio)
            .map_err(|e| CommError::BadCertificate(e.to_string()))?;
        let target = normal_form_of_cover(&CoveringGraph::trivial(*k), &ratio)
            .map_err(|e| CommError::BadCertificate(e.to_string()))?;
        if emb != target || iso_normal_forms(&emb, &target).is_none() {
            return bad(format!("gamma cover for k = {k} is not G^{k}"));
        }
    }
    if !want.is_empty() {
        return bad("missing gamma embedding steps".into());
    }
    Ok(())
}
