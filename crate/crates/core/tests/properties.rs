//! Randomized algebraic invariants. Inputs are drawn by proptest as plain
//! integer picks and mapped onto elements inside each case, so shrinking
//! stays meaningful.

mod common;

use std::sync::{Arc, OnceLock};

use proptest::prelude::*;

use linkmotion::catalog::{htrivial, LinkSpec};
use linkmotion::fpauto::{PartialConjugation, SymmetricFPAut};
use linkmotion::freeprod::{FactorElement, FreeProduct, FreeProductWord};
use linkmotion::ltree;
use linkmotion::motion::{
    equals, inverse, iota, multiply, standard_generators, MotionElement, NamedGenerator,
};

/// One raw syllable from a `(factor, generator, exponent)` pick over the
/// mixed context; exponent 0 yields an identity syllable on purpose.
fn raw_from(picks: &[(u8, u8, i8)]) -> Vec<FactorElement> {
    picks
        .iter()
        .map(|&(f, g, e)| {
            let e = i64::from(e % 3);
            match f % 3 {
                0 => {
                    let runs = if e == 0 { Vec::new() } else { vec![((g % 2) as usize, e)] };
                    FactorElement::free(0, runs)
                }
                1 => {
                    let mut exps = vec![0i64; 2];
                    exps[(g % 2) as usize] = e;
                    FactorElement::abelian(1, exps)
                }
                _ => FactorElement::finite(2, (g % 3) as usize),
            }
        })
        .collect()
}

fn word_from(fp: &FreeProduct, picks: &[(u8, u8, i8)]) -> FreeProductWord {
    fp.normalize(&raw_from(picks)).expect("picks map to valid syllables")
}

/// A composite of partial conjugations; the whole FR family, including
/// acting factor equal to the support.
fn aut_from(fp: &Arc<FreeProduct>, picks: &[(u8, u8, i8, u8)]) -> SymmetricFPAut {
    let mut acc = SymmetricFPAut::identity(fp.clone());
    for &(f, g, e, j) in picks {
        let raw = raw_from(&[(f, g, if e % 3 == 0 { 1 } else { e })]);
        let acting = raw.into_iter().next().expect("one syllable");
        if fp.element_is_identity(&acting) {
            continue;
        }
        let pc = PartialConjugation::new(acting, (j % 3) as usize, if e < 0 { -1 } else { 1 });
        let gen = SymmetricFPAut::partial_conjugation(fp.clone(), pc).expect("valid generator");
        acc = acc.compose(&gen).expect("same context");
    }
    acc
}

fn action_agrees(fp: &FreeProduct, a: &SymmetricFPAut, b: &SymmetricFPAut) -> bool {
    for i in 0..fp.factor_count() {
        for s in fp.generators_of(i).expect("factor exists") {
            if a.apply_element(&s).expect("valid") != b.apply_element(&s).expect("valid") {
                return false;
            }
        }
    }
    true
}

/// Strip matching outer syllables `s … s^{-1}`; a conjugate of a single
/// syllable reduces to that syllable.
fn cyclic_core(fp: &FreeProduct, w: &FreeProductWord) -> Vec<FactorElement> {
    let mut syl = w.syllables().to_vec();
    while syl.len() >= 3 {
        let (first, last) = (&syl[0], syl.last().expect("nonempty"));
        if first.factor != last.factor {
            break;
        }
        let prod = fp.element_mul(first, last).expect("same factor");
        if !fp.element_is_identity(&prod) {
            break;
        }
        syl.pop();
        syl.remove(0);
    }
    syl
}

fn h21() -> &'static Arc<LinkSpec> {
    static SPEC: OnceLock<Arc<LinkSpec>> = OnceLock::new();
    SPEC.get_or_init(|| Arc::new(htrivial(2, 1).expect("builtin spec")))
}

fn h21_generators() -> &'static Vec<NamedGenerator> {
    static GENS: OnceLock<Vec<NamedGenerator>> = OnceLock::new();
    GENS.get_or_init(|| standard_generators(h21()).expect("builtin spec has generators"))
}

/// A motion element from `(generator index, invert)` picks.
fn motion_from(picks: &[(u8, bool)]) -> MotionElement {
    let gens = h21_generators();
    let mut acc = MotionElement::identity(h21()).expect("identity exists");
    for &(k, inv) in picks {
        let pick = &gens[k as usize % gens.len()].element;
        let step = if inv { inverse(pick).expect("invertible") } else { pick.clone() };
        acc = multiply(&acc, &step).expect("same spec");
    }
    acc
}

fn syllable_picks() -> impl Strategy<Value = Vec<(u8, u8, i8)>> {
    proptest::collection::vec((any::<u8>(), any::<u8>(), any::<i8>()), 0..10)
}

fn aut_picks() -> impl Strategy<Value = Vec<(u8, u8, i8, u8)>> {
    proptest::collection::vec((any::<u8>(), any::<u8>(), any::<i8>(), any::<u8>()), 0..6)
}

fn motion_picks() -> impl Strategy<Value = Vec<(u8, bool)>> {
    proptest::collection::vec((any::<u8>(), any::<bool>()), 0..6)
}

proptest! {
    #[test]
    fn normalize_agrees_with_the_rewriting_oracle(picks in syllable_picks()) {
        let fp = common::mixed_context();
        let raw = raw_from(&picks);
        let normalized = fp.normalize(&raw).expect("valid syllables");
        let oracle = common::naive_reduce(&fp, &raw);
        prop_assert_eq!(normalized.syllables(), oracle.as_slice());
    }

    #[test]
    fn words_form_a_group(a in syllable_picks(), b in syllable_picks(), c in syllable_picks()) {
        let fp = common::mixed_context();
        let (u, v, w) = (word_from(&fp, &a), word_from(&fp, &b), word_from(&fp, &c));
        let uv_w = fp.multiply(&fp.multiply(&u, &v).expect("ok"), &w).expect("ok");
        let u_vw = fp.multiply(&u, &fp.multiply(&v, &w).expect("ok")).expect("ok");
        prop_assert_eq!(uv_w, u_vw);
        let id = FreeProductWord::identity();
        prop_assert_eq!(&fp.multiply(&u, &id).expect("ok"), &u);
        prop_assert_eq!(&fp.multiply(&id, &u).expect("ok"), &u);
        prop_assert!(fp.multiply(&u, &fp.invert(&u).expect("ok")).expect("ok").is_identity());
    }

    #[test]
    fn automorphism_composition_associates_and_cancels(
        a in aut_picks(),
        b in aut_picks(),
        c in aut_picks(),
    ) {
        let fp = common::mixed_context();
        let (x, y, z) = (aut_from(&fp, &a), aut_from(&fp, &b), aut_from(&fp, &c));
        let xy_z = x.compose(&y).expect("ok").compose(&z).expect("ok");
        let x_yz = x.compose(&y.compose(&z).expect("ok")).expect("ok");
        // Canonical equality and the action must agree in both directions.
        prop_assert_eq!(&xy_z, &x_yz);
        prop_assert!(action_agrees(&fp, &xy_z, &x_yz));
        let id = SymmetricFPAut::identity(fp.clone());
        prop_assert_eq!(x.compose(&x.inverse().expect("ok")).expect("ok"), id.clone());
        prop_assert_eq!(x.inverse().expect("ok").compose(&x).expect("ok"), id);
    }

    #[test]
    fn symmetric_images_wrap_a_single_syllable(picks in aut_picks()) {
        let fp = common::mixed_context();
        let aut = aut_from(&fp, &picks);
        for i in 0..fp.factor_count() {
            for s in fp.generators_of(i).expect("factor exists") {
                let image = aut.apply_element(&s).expect("valid");
                let core = cyclic_core(&fp, &image);
                prop_assert_eq!(core.len(), 1);
                prop_assert_eq!(core[0].factor, aut.factor_perm().apply(i));
            }
        }
    }

    #[test]
    fn inner_detection_shifts_by_left_multiplication(
        picks in aut_picks(),
        wp in syllable_picks(),
    ) {
        let fp = common::mixed_context();
        let aut = aut_from(&fp, &picks);
        let w = word_from(&fp, &wp);
        let shifted = SymmetricFPAut::inner(fp.clone(), &w).expect("ok").compose(&aut).expect("ok");
        match (aut.is_inner().expect("ok"), shifted.is_inner().expect("ok")) {
            (None, None) => {}
            (Some(u), Some(v)) => {
                prop_assert_eq!(v, fp.multiply(&w, &u).expect("ok"));
            }
            (u, v) => prop_assert!(false, "inner status changed: {:?} vs {:?}", u, v),
        }
    }

    #[test]
    fn motion_products_associate_and_cancel(
        a in motion_picks(),
        b in motion_picks(),
        c in motion_picks(),
    ) {
        let (x, y, z) = (motion_from(&a), motion_from(&b), motion_from(&c));
        let xy_z = multiply(&multiply(&x, &y).expect("ok"), &z).expect("ok");
        let x_yz = multiply(&x, &multiply(&y, &z).expect("ok")).expect("ok");
        prop_assert!(equals(&xy_z, &x_yz).expect("ok"));
        let id = MotionElement::identity(h21()).expect("ok");
        prop_assert!(equals(&multiply(&x, &id).expect("ok"), &x).expect("ok"));
        prop_assert!(equals(&multiply(&id, &x).expect("ok"), &x).expect("ok"));
        prop_assert!(equals(&multiply(&x, &inverse(&x).expect("ok")).expect("ok"), &id).expect("ok"));
    }

    #[test]
    fn dahm_turns_products_into_composites(a in motion_picks(), b in motion_picks()) {
        let (x, y) = (motion_from(&a), motion_from(&b));
        let lhs = multiply(&x, &y).expect("ok").dahm().expect("ok");
        let rhs = x.dahm().expect("ok").compose(&y.dahm().expect("ok")).expect("ok");
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn iota_images_are_inner_by_the_word(wp in syllable_picks()) {
        let spec = h21();
        let fp = spec.complement_product().clone();
        // The mixed-context picks reuse factor indices 0..3, which is also
        // the piece count here; remap onto the complement's generators.
        let w = {
            let raw: Vec<FactorElement> = wp
                .iter()
                .filter_map(|&(f, g, e)| {
                    let i = (f % 3) as usize;
                    let gens = fp.generators_of(i).expect("factor exists");
                    let e = i64::from(e % 3);
                    if e == 0 {
                        return None;
                    }
                    let s = gens[(g as usize) % gens.len()].clone();
                    Some(fp.element_pow(&s, e).expect("ok"))
                })
                .collect();
            fp.normalize(&raw).expect("ok")
        };
        let m = iota(spec, &w).expect("ok");
        let lhs = m.dahm().expect("ok");
        let rhs = SymmetricFPAut::inner(fp.clone(), &w).expect("ok");
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn trees_reparse_from_their_rendering(n in 1usize..=3, idx in any::<u16>()) {
        let all = ltree::enumerate(n);
        let tree = &all[idx as usize % all.len()];
        let reparsed: ltree::LTree = tree.canonical_form().parse().expect("own rendering parses");
        prop_assert_eq!(&reparsed, tree);
    }

    #[test]
    fn laminar_families_round_trip(n in 1usize..=3, idx in any::<u16>()) {
        let all = ltree::enumerate(n);
        let tree = &all[idx as usize % all.len()];
        let family = ltree::to_laminar(tree);
        prop_assert!(family.is_laminar());
        let rebuilt = ltree::from_laminar(&family).expect("families of trees realize");
        prop_assert_eq!(&rebuilt, tree);
    }

    #[test]
    fn moves_stay_inside_the_catalog(n in 1usize..=3, idx in any::<u16>(), mv in any::<u16>()) {
        let all = ltree::enumerate(n);
        let tree = &all[idx as usize % all.len()];
        let moves = ltree::available_moves(tree);
        if !moves.is_empty() {
            let pick = &moves[mv as usize % moves.len()];
            let next = ltree::apply_move(tree, n, pick).expect("listed moves apply");
            prop_assert!(next.check(n).is_ok());
            prop_assert!(all.contains(&next));
        }
    }
}
