//! Helpers shared by the integration suites: the run seed, an independent
//! rewriting oracle for free product words, and a context mixing all three
//! factor kinds.
//!
//! Each test binary compiles this module separately, so not every helper is
//! used by every binary.
#![allow(dead_code)]

use std::sync::Arc;

use linkmotion::freeprod::{FactorElement, FactorGroup, FiniteTable, FreeProduct};

/// Seed for every randomized suite. Override with `MOTION_SEED=<u64>` to
/// reproduce a failure or to explore a different sample.
pub fn seed() -> u64 {
    std::env::var("MOTION_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(0xC0FFEE)
}

fn cyclic3() -> FiniteTable {
    FiniteTable::new(
        vec!["e".into(), "c".into(), "cc".into()],
        vec![vec![0, 1, 2], vec![1, 2, 0], vec![2, 0, 1]],
        0,
        vec![1],
    )
    .expect("Z/3 table is a group")
}

/// Free of rank 2, free abelian of rank 2, and a finite cyclic factor, so
/// every payload representation is exercised.
pub fn mixed_context() -> Arc<FreeProduct> {
    Arc::new(FreeProduct::new(vec![
        FactorGroup::free(&["a", "b"]),
        FactorGroup::free_abelian(&["x", "y"]),
        FactorGroup::Finite(cyclic3()),
    ]))
}

/// Naive rewriting oracle: repeatedly drop identity syllables and merge the
/// leftmost adjacent pair sharing a factor, until nothing applies. Quadratic
/// and structure-free, so it checks `normalize` without sharing its logic.
pub fn naive_reduce(fp: &FreeProduct, raw: &[FactorElement]) -> Vec<FactorElement> {
    let mut cur: Vec<FactorElement> = raw.to_vec();
    loop {
        if let Some(i) = cur.iter().position(|e| fp.element_is_identity(e)) {
            cur.remove(i);
            continue;
        }
        let pair = (0..cur.len().saturating_sub(1)).find(|&i| cur[i].factor == cur[i + 1].factor);
        match pair {
            Some(i) => {
                let prod = fp
                    .element_mul(&cur[i], &cur[i + 1])
                    .expect("adjacent syllables share a factor");
                cur.remove(i + 1);
                cur[i] = prod;
            }
            None => return cur,
        }
    }
}
