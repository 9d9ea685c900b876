//! End-to-end acceptance suite: one test per shipping criterion, each with
//! an explicit runtime budget. Every check is exact; set `MOTION_SEED` to
//! rerun the randomized ones on a different sample.

mod common;

use std::collections::BTreeSet;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use linkmotion::catalog::{htrivial, unlink, LinkSpec};
use linkmotion::fpauto::{check_fr_relations, SymmetricFPAut};
use linkmotion::freeprod::{FactorElement, FactorPayload, FreeProduct, FreeProductWord};
use linkmotion::ltree::{self, LTree};
use linkmotion::motion::{
    equals, equals_in_s3, finiteness_probe, inverse, iota, multiply, present,
    standard_generators, MotionElement, ProbeMode, ProbeResult,
};
use linkmotion::perm::Perm;
use linkmotion::sample;

fn within(budget: Duration, started: Instant, label: &str) {
    let elapsed = started.elapsed();
    assert!(elapsed <= budget, "{label} took {elapsed:?}, budget {budget:?}");
}

fn arc(spec: LinkSpec) -> Arc<LinkSpec> {
    Arc::new(spec)
}

#[test]
fn criterion_1_partial_conjugation_relations_hold() {
    let started = Instant::now();
    let contexts = [
        ("Z*Z*Z", arc(unlink(3).expect("builtin"))),
        ("H(2,1)", arc(htrivial(2, 1).expect("builtin"))),
    ];
    for (name, spec) in &contexts {
        let report = check_fr_relations(spec.complement_product(), 200, common::seed())
            .expect("relation check runs");
        assert!(report.all_hold(), "{name}: {report}");
        assert_eq!(report.relation1_trials, 200, "{name}: composition relation trials");
        assert_eq!(report.relation2_trials, 200, "{name}: disjoint commuting trials");
        assert_eq!(report.relation3_trials, 200, "{name}: mixed commuting trials");
    }
    within(Duration::from_secs(5), started, "criterion 1");
    println!("criterion 1 PASS: 200 trials per relation over Z*Z*Z and H(2,1)");
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

#[test]
fn criterion_2_unlink_images_are_conjugated_generators() {
    let started = Instant::now();
    let spec = arc(unlink(3).expect("builtin"));
    let fp = spec.complement_product().clone();
    let mut rng = ChaCha8Rng::seed_from_u64(common::seed() ^ 0x02);
    for _ in 0..300 {
        let steps = rng.random_range(0..=6);
        let m = sample::random_motion(&spec, &mut rng, steps).expect("sampling works");
        let aut = m.dahm().expect("image exists");
        for i in 0..fp.factor_count() {
            for s in fp.generators_of(i).expect("factor exists") {
                let image = aut.apply_element(&s).expect("applies");
                let core = cyclic_core(&fp, &image);
                assert_eq!(core.len(), 1, "image must be a conjugate of one syllable");
                match &core[0].payload {
                    FactorPayload::Free(runs) => {
                        assert_eq!(runs.len(), 1, "core must be a single generator power");
                        assert!(
                            runs[0].1 == 1 || runs[0].1 == -1,
                            "core exponent must be +1 or -1, got {}",
                            runs[0].1
                        );
                    }
                    other => panic!("unlink factors are free, got {other:?}"),
                }
            }
        }
    }
    within(Duration::from_secs(10), started, "criterion 2");
    println!("criterion 2 PASS: 300 random U3 elements send generators to conjugated generators");
}

#[test]
fn criterion_3_semidirect_actions_match_the_worked_identities() {
    let started = Instant::now();
    let spec = arc(unlink(2).expect("builtin"));
    let fp = spec.complement_product().clone();
    let a1 = fp.generator(0, 0).expect("generator a1");
    let a2 = fp.generator(1, 0).expect("generator a2");
    let chi = MotionElement::partial_conjugation(&spec, a1.clone(), 1).expect("valid");

    // Flipping piece 1 over conjugates its meridian, so conjugating the
    // partial conjugation inverts the acting element.
    let flip = spec.motion_generators(0).expect("unknot motions").remove(0);
    let t = MotionElement::motion_of(&spec, 0, flip).expect("valid");
    let conjugated =
        multiply(&multiply(&t, &chi).expect("ok"), &inverse(&t).expect("ok")).expect("ok");
    let inverted_acting = fp.element_inv(&a1).expect("ok");
    let expected =
        MotionElement::partial_conjugation(&spec, inverted_acting, 1).expect("valid");
    assert!(equals(&conjugated, &expected).expect("ok"), "flip action identity fails");

    // Swapping the two pieces relabels both the acting piece and the support.
    let swap = Perm::transposition(2, 0, 1).expect("valid transposition");
    let sigma = MotionElement::permutation(&spec, swap).expect("class preserving");
    let relabeled =
        multiply(&multiply(&sigma, &chi).expect("ok"), &inverse(&sigma).expect("ok")).expect("ok");
    let expected2 = MotionElement::partial_conjugation(&spec, a2, 0).expect("valid");
    assert!(equals(&relabeled, &expected2).expect("ok"), "swap action identity fails");

    within(Duration::from_secs(1), started, "criterion 3");
    println!("criterion 3 PASS: both worked conjugation identities hold");
}

fn probe_order(spec: &Arc<LinkSpec>, mode: ProbeMode, bound: usize) -> Option<usize> {
    match finiteness_probe(spec, mode, bound).expect("probe runs") {
        ProbeResult::Closed { order, .. } => Some(order),
        ProbeResult::ExceededBound { .. } => None,
    }
}

#[test]
fn criterion_4_finiteness_dichotomy() {
    let started = Instant::now();
    let unknot = arc(unlink(1).expect("builtin"));
    let hopf = arc(htrivial(0, 1).expect("builtin"));
    let two_unknots = arc(unlink(2).expect("builtin"));
    let two_hopfs = arc(htrivial(0, 2).expect("builtin"));

    assert_eq!(probe_order(&unknot, ProbeMode::R3, 10_000), Some(2), "unknot closes at Z/2");
    assert_eq!(probe_order(&hopf, ProbeMode::R3, 10_000), Some(8), "Hopf link closes at Q8");
    assert_eq!(
        probe_order(&two_unknots, ProbeMode::R3, 10_000),
        None,
        "two unknots never close in the plain group"
    );

    // The quotient by inner automorphisms closes up; the searches record
    // the orders themselves.
    let k_unlink = probe_order(&two_unknots, ProbeMode::S3, 10_000)
        .expect("two unknots close in the quotient");
    let k_hopf = probe_order(&two_hopfs, ProbeMode::S3, 10_000)
        .expect("two Hopf links close in the quotient");
    assert_eq!(k_unlink, 8, "(Z/2 x Z/2) x swap");
    assert_eq!(k_hopf, 128, "(Q8 x Q8) x swap");

    within(Duration::from_secs(60), started, "criterion 4");
    println!(
        "criterion 4 PASS: orders 2, 8, unbounded, quotient orders {k_unlink} and {k_hopf}"
    );
}

#[test]
fn criterion_5_sphere_kernel_is_conjugation() {
    let started = Instant::now();
    let spec = arc(htrivial(2, 1).expect("builtin"));
    let fp = spec.complement_product().clone();
    let id = MotionElement::identity(&spec).expect("identity");
    let mut rng = ChaCha8Rng::seed_from_u64(common::seed() ^ 0x05);
    for _ in 0..100 {
        let w = sample::random_word(&fp, &mut rng, 5);
        let m = iota(&spec, &w).expect("iota is defined everywhere");
        assert!(
            equals_in_s3(&m, &id).expect("ok"),
            "iota image must vanish in the quotient: {}",
            fp.display_word(&w)
        );
        let aut = m.dahm().expect("ok");
        let expected = SymmetricFPAut::inner(fp.clone(), &w).expect("ok");
        assert_eq!(aut, expected, "iota image must act as conjugation by the word");
        let witness = aut.is_inner().expect("ok").expect("conjugations are detected");
        let via_witness = SymmetricFPAut::inner(fp.clone(), &witness).expect("ok");
        assert_eq!(via_witness, expected, "witness must conjugate the same way");
    }
    within(Duration::from_secs(10), started, "criterion 5");
    println!("criterion 5 PASS: 100 embedded words vanish in the quotient with inner witnesses");
}

/// Independent tree generation: arbitrary parent arrays (filtered for
/// reaching the root) and arbitrary injective label placements, deduplicated
/// by canonical form. Shares nothing with `ltree::enumerate`, which walks
/// increasing parent arrays only.
fn brute_force_forms(n: usize) -> BTreeSet<String> {
    let mut forms = BTreeSet::new();
    for v in 1..=2 * n - 1 {
        let digits = v - 1;
        let mut code = vec![0usize; digits];
        loop {
            // parents[k] = code[k-1] for vertex k; root is vertex 0.
            let valid_shape = (1..v).all(|k| code[k - 1] != k)
                && (1..v).all(|k| {
                    let mut cur = k;
                    for _ in 0..v {
                        if cur == 0 {
                            return true;
                        }
                        cur = code[cur - 1];
                    }
                    false
                });
            if valid_shape {
                let mut children_of = vec![Vec::new(); v];
                for k in 1..v {
                    children_of[code[k - 1]].push(k);
                }
                let mut placement = vec![0usize; n];
                'labels: loop {
                    let injective = (0..n).all(|l| (0..l).all(|m| placement[l] != placement[m]));
                    if injective {
                        let mut labels = vec![None; v];
                        for (l, &vertex) in placement.iter().enumerate() {
                            labels[vertex] = Some(l);
                        }
                        let tree = build_tree(0, &children_of, &labels);
                        if tree.check(n).is_ok() {
                            forms.insert(tree.canonical_form());
                        }
                    }
                    for d in (0..n).rev() {
                        placement[d] += 1;
                        if placement[d] < v {
                            continue 'labels;
                        }
                        placement[d] = 0;
                    }
                    break;
                }
            }
            let mut advanced = false;
            for d in (0..digits).rev() {
                code[d] += 1;
                if code[d] < v {
                    advanced = true;
                    break;
                }
                code[d] = 0;
            }
            if !advanced {
                break;
            }
        }
    }
    forms
}

fn build_tree(vertex: usize, children_of: &[Vec<usize>], labels: &[Option<usize>]) -> LTree {
    let kids = children_of[vertex]
        .iter()
        .map(|&c| build_tree(c, children_of, labels))
        .collect();
    LTree::new(labels[vertex], kids)
}

fn forms_of(trees: &[LTree]) -> BTreeSet<String> {
    trees.iter().map(LTree::canonical_form).collect()
}

#[test]
fn criterion_6_tree_catalog_counts_and_moves() {
    let started = Instant::now();
    assert_eq!(ltree::enumerate(1).len(), 1, "one component admits exactly one tree");
    for n in 1..=4 {
        for tree in ltree::enumerate(n) {
            assert!(
                tree.vertex_count() <= 2 * n - 1,
                "vertex bound fails for {}",
                tree.canonical_form()
            );
        }
    }
    assert_eq!(ltree::enumerate(2).len(), 3, "two components admit three trees");

    let enumerated = forms_of(&ltree::enumerate(3));
    let brute = brute_force_forms(3);
    assert_eq!(enumerated, brute, "independent n=3 generation disagrees");

    for n in 1..=3 {
        let closure = forms_of(&ltree::move_closure(n).expect("moves apply"));
        let all = forms_of(&ltree::enumerate(n));
        assert_eq!(closure, all, "move closure misses trees for n={n}");
    }
    within(Duration::from_secs(30), started, "criterion 6");
    println!(
        "criterion 6 PASS: counts 1/3/{} with independent n=3 agreement and full move closure",
        enumerated.len()
    );
}

#[test]
fn criterion_7_presentations_are_sound() {
    let started = Instant::now();
    let specs = [arc(unlink(3).expect("builtin")), arc(htrivial(2, 1).expect("builtin"))];
    for spec in &specs {
        let pres = present(spec).expect("presentation builds");
        let gens = standard_generators(spec).expect("generators build");
        let names: Vec<String> = gens.iter().map(|g| g.name.clone()).collect();
        assert_eq!(pres.generators, names, "presentation must use the standard generators");
        let id = MotionElement::identity(spec).expect("identity");
        for relator in &pres.relators {
            let mut acc = id.clone();
            for &(gi, e) in relator {
                let step = gens[gi].element.pow(e).expect("powers exist");
                acc = multiply(&acc, &step).expect("same spec");
            }
            assert!(
                equals(&acc, &id).expect("ok"),
                "relator is not trivial: {}",
                pres.relator_display(relator)
            );
        }
    }

    let single = present(&arc(unlink(1).expect("builtin"))).expect("presentation builds");
    assert_eq!(single.generators, vec!["G[1]:t".to_string()]);
    assert_eq!(single.relators, vec![vec![(0, 2)]]);
    assert!(single.complete, "abelian-complement presentations are complete");

    within(Duration::from_secs(20), started, "criterion 7");
    println!("criterion 7 PASS: all relators trivial; single unknot presents Z/2 exactly");
}

#[test]
fn criterion_8_algebra_property_suites() {
    let started = Instant::now();
    let fp = common::mixed_context();
    let mut rng = ChaCha8Rng::seed_from_u64(common::seed() ^ 0x08);

    // Normal form against the quadratic rewriting oracle.
    for _ in 0..500 {
        let len = rng.random_range(0..=10);
        let raw = sample::raw_syllables(&fp, &mut rng, len);
        let normalized = fp.normalize(&raw).expect("valid syllables");
        let oracle = common::naive_reduce(&fp, &raw);
        assert_eq!(normalized.syllables(), oracle.as_slice(), "normal form disagrees");
    }

    // Group axioms for words.
    let idw = FreeProductWord::identity();
    for _ in 0..200 {
        let u = sample::random_word(&fp, &mut rng, 6);
        let v = sample::random_word(&fp, &mut rng, 6);
        let w = sample::random_word(&fp, &mut rng, 6);
        let uv_w = fp.multiply(&fp.multiply(&u, &v).expect("ok"), &w).expect("ok");
        let u_vw = fp.multiply(&u, &fp.multiply(&v, &w).expect("ok")).expect("ok");
        assert_eq!(uv_w, u_vw, "word multiplication must associate");
        assert_eq!(fp.multiply(&u, &idw).expect("ok"), u);
        assert_eq!(fp.multiply(&idw, &u).expect("ok"), u);
        assert!(fp.multiply(&u, &fp.invert(&u).expect("ok")).expect("ok").is_identity());
    }

    // Group axioms for symmetric automorphisms built from generators.
    let aut_id = SymmetricFPAut::identity(fp.clone());
    let random_aut = |rng: &mut ChaCha8Rng| {
        let mut acc = aut_id.clone();
        for _ in 0..rng.random_range(0..=4) {
            let i = rng.random_range(0..fp.factor_count());
            let j = rng.random_range(0..fp.factor_count());
            let acting = sample::nontrivial_factor_element(&fp, i, rng);
            let pc = linkmotion::fpauto::PartialConjugation::new(
                acting,
                j,
                if rng.random_range(0..2) == 0 { 1 } else { -1 },
            );
            let gen = SymmetricFPAut::partial_conjugation(fp.clone(), pc).expect("valid");
            acc = acc.compose(&gen).expect("same context");
        }
        acc
    };
    for _ in 0..100 {
        let a = random_aut(&mut rng);
        let b = random_aut(&mut rng);
        let c = random_aut(&mut rng);
        let ab_c = a.compose(&b).expect("ok").compose(&c).expect("ok");
        let a_bc = a.compose(&b.compose(&c).expect("ok")).expect("ok");
        assert_eq!(ab_c, a_bc, "automorphism composition must associate");
        assert_eq!(a.compose(&aut_id).expect("ok"), a);
        assert_eq!(a.compose(&a.inverse().expect("ok")).expect("ok"), aut_id);
    }

    // Group axioms for motion elements and the Dahm homomorphism.
    let spec = arc(htrivial(2, 1).expect("builtin"));
    let id = MotionElement::identity(&spec).expect("identity");
    let random_motion = |rng: &mut ChaCha8Rng| {
        let steps = rng.random_range(0..=5);
        sample::random_motion(&spec, rng, steps).expect("sampling works")
    };
    for _ in 0..100 {
        let x = random_motion(&mut rng);
        let y = random_motion(&mut rng);
        let z = random_motion(&mut rng);
        let xy_z = multiply(&multiply(&x, &y).expect("ok"), &z).expect("ok");
        let x_yz = multiply(&x, &multiply(&y, &z).expect("ok")).expect("ok");
        assert!(equals(&xy_z, &x_yz).expect("ok"), "motion multiplication must associate");
        assert!(equals(&multiply(&x, &id).expect("ok"), &x).expect("ok"));
        assert!(equals(&multiply(&id, &x).expect("ok"), &x).expect("ok"));
        assert!(equals(&multiply(&x, &inverse(&x).expect("ok")).expect("ok"), &id).expect("ok"));
    }
    for _ in 0..300 {
        let x = random_motion(&mut rng);
        let y = random_motion(&mut rng);
        let lhs = multiply(&x, &y).expect("ok").dahm().expect("ok");
        let rhs = x.dahm().expect("ok").compose(&y.dahm().expect("ok")).expect("ok");
        assert_eq!(lhs, rhs, "products must map to composed automorphisms");
    }

    within(Duration::from_secs(30), started, "criterion 8");
    println!("criterion 8 PASS: oracle x500, group axioms, homomorphism x300");
}
