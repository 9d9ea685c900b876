//! Random sampling of elements for randomized test suites. Deterministic
//! when driven by a seeded generator; not part of the mathematical API.

use std::sync::Arc;

use rand::Rng;

use crate::catalog::LinkSpec;
use crate::freeprod::{FactorElement, FreeProduct, FreeProductWord};
use crate::motion::{
    inverse, multiply, standard_generators, MotionElement, MotionError,
};

/// A uniform-ish nontrivial element of one factor: short words for free and
/// free-abelian factors, any non-identity element of a finite factor.
pub fn nontrivial_factor_element(
    fp: &FreeProduct,
    factor: usize,
    rng: &mut impl Rng,
) -> FactorElement {
    crate::fpauto::random_nontrivial_element(fp, factor, rng)
}

/// A list of raw syllables that may be unreduced: adjacent syllables can
/// share a factor and identity payloads appear with positive probability.
pub fn raw_syllables(
    fp: &FreeProduct,
    rng: &mut impl Rng,
    len: usize,
) -> Vec<FactorElement> {
    let n = fp.factor_count();
    (0..len)
        .map(|_| {
            let i = rng.random_range(0..n);
            if rng.random_range(0..4) == 0 {
                fp.identity_element(i).expect("factor index is in range")
            } else {
                nontrivial_factor_element(fp, i, rng)
            }
        })
        .collect()
}

/// A normalized word with at most `max_syllables` syllables.
pub fn random_word(
    fp: &FreeProduct,
    rng: &mut impl Rng,
    max_syllables: usize,
) -> FreeProductWord {
    let len = rng.random_range(0..=max_syllables);
    let syllables: Vec<FactorElement> = (0..len)
        .map(|_| {
            let i = rng.random_range(0..fp.factor_count());
            nontrivial_factor_element(fp, i, rng)
        })
        .collect();
    fp.normalize(&syllables).expect("sampled syllables are valid")
}

/// A product of `steps` standard generators, each possibly inverted.
pub fn random_motion(
    spec: &Arc<LinkSpec>,
    rng: &mut impl Rng,
    steps: usize,
) -> Result<MotionElement, MotionError> {
    let gens = standard_generators(spec)?;
    let mut acc = MotionElement::identity(spec)?;
    if gens.is_empty() {
        return Ok(acc);
    }
    for _ in 0..steps {
        let pick = &gens[rng.random_range(0..gens.len())].element;
        let factor = if rng.random_range(0..2) == 0 { pick.clone() } else { inverse(pick)? };
        acc = multiply(&acc, &factor)?;
    }
    Ok(acc)
}
