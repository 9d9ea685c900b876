//! Exact computation in the motion groups of split links.
//!
//! A split link is a disjoint union of unsplittable pieces, each packed in
//! its own ball. Its motion group decomposes as an iterated semidirect
//! product: partial conjugations of the free product of the piece
//! complement groups (the Fouxe-Rabinovitch kernel), the motions of the
//! individual pieces, and the permutations of interchangeable pieces. This
//! crate implements that decomposition with exact arithmetic throughout; no
//! floating point, no approximation.
//!
//! Module map:
//!
//! - [`perm`]: permutations in one-line notation.
//! - [`freeprod`]: free products of free, free-abelian, and finite factor
//!   groups, with normal forms and the word problem.
//! - [`fpauto`]: symmetric automorphisms of a free product in a canonical
//!   form that decides equality; partial conjugations, factor
//!   automorphisms, factor permutations, inner automorphisms and the
//!   conjugator-recovery test.
//! - [`catalog`]: link piece descriptions (complement group, motion group,
//!   Dahm action, self-conjugation), built-in pieces, JSON ingestion, and
//!   law-level validation.
//! - [`motion`]: motion group elements and arithmetic, the Dahm
//!   homomorphism, equality before and after one-point compactification,
//!   the finiteness probe, and presentation output.
//! - [`ltree`]: rooted L-trees classifying essential separating sphere
//!   systems, their moves, laminar families, and tree stabilizer
//!   generators.
//! - [`sample`]: seeded random sampling for the test suites.

pub mod catalog;
pub mod fpauto;
pub mod freeprod;
pub mod ltree;
pub mod motion;
pub mod perm;
pub mod sample;
