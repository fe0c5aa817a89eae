//! Exact decision procedures for Generalised Baumslag-Solitar (GBS) groups.
//!
//! A GBS group is the fundamental group of a finite graph of groups with all
//! vertex and edge groups infinite cyclic; it is encoded here as a directed
//! multigraph with a nonzero integer label at each edge end ([`graph::GbsGraph`]).
//! On top of that model the crate provides:
//!
//! * the elementary deformations and reduced-graph moves (collapse/expansion,
//!   slides, induction, A-moves) with legality checking ([`moves`]),
//! * the modular homomorphism image as a canonical subgroup of `Q*` ([`modular`]),
//! * finite-index subgroups as labelled covers of bouquets ([`covering`]),
//! * the two-stage normalisation of finite-index subgroups of `G^d_{1,n}`
//!   into the canonical bouquet form `NF(r,l,m;p)` ([`normalform`]),
//! * the isomorphism decision for that class together with the dual-graph
//!   verification tool ([`iso`]),
//! * the complete commensurability classification of `BS(m,n)` with
//!   constructive, machine-checked certificates ([`comm`]).
//!
//! All labels are arbitrary-precision integers; every operation is a pure
//! function on immutable values, so everything is safe to share across
//! threads.
//!
//! ```
//! use gbs_core::{commensurable, normal_form_of_cover, CoveringGraph, Int};
//!
//! // BS(2,4) and BS(3,6) are commensurable: both ascend with ratio 2.
//! let v = commensurable(&Int::from(2), &Int::from(4), &Int::from(3), &Int::from(6)).unwrap();
//! assert!(v.commensurable);
//!
//! // The two-petal bouquet over n = 4 in normal form.
//! let form = normal_form_of_cover(&CoveringGraph::trivial(2), &Int::from(4)).unwrap();
//! assert_eq!(form.to_string(), "NF(r=2,l=2,m=1;p=[0])");
//! ```

pub mod arith;
pub mod comm;
pub mod covering;
pub mod graph;
pub mod iso;
pub mod modular;
pub mod moves;
pub mod normalform;

/// Edge labels and all derived quantities: exact signed integers of
/// arbitrary precision. Deformation moves multiply labels (collapsing a
/// spanning tree produces powers `n^k`), so fixed-width integers are not an
/// option.
pub type Int = num_bigint::BigInt;

/// Positive rationals such as modular-image generators.
pub type Rat = num_rational::BigRational;

/// Serialize big integers as decimal strings, matching the graph file
/// format. Use with `#[serde(with = "crate::int_string")]`.
pub(crate) mod int_string {
    use super::Int;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Int, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Int, D::Error> {
        let text = String::deserialize(d)?;
        text.parse::<Int>().map_err(serde::de::Error::custom)
    }
}

pub use comm::{
    bs_normalize, commensurable, validate_certificate, witness, BsPair, Certificate, CommCase,
    CommVerdict,
};
pub use covering::{
    covering_from_permutations, gamma_k, index2_cycle, lift_labels, standard_subgroup,
    CoveringGraph, SubgroupDescriptor,
};
pub use graph::{GbsGraph, Plateau};
pub use iso::{
    char_vector, cyclic_equal, dual_graph, iso_normal_forms, iso_subgroups, CharVector, DualGraph,
};
pub use modular::{
    common_power, image_generator_cyclic, modular_image, primitive_base, ModularImage,
    PrimitiveBase,
};
pub use moves::{apply, legal_moves, random_deform, Move};
pub use normalform::{
    bouquet_normal_form, collapse_to_bouquet, euclid_slide_pair, normal_form_of_cover,
    ExponentBouquet, NormalForm,
};
