//! Symmetric automorphisms of a free product.
//!
//! An automorphism here is stored as a triple: a permutation π of the
//! factors (pairing factors with identical data), per-factor isomorphisms
//! φ_i : H_i → H_{π(i)}, and per-factor conjugators w_i. It acts by
//! x ∈ H_i ↦ w_i · φ_i(x) · w_i⁻¹. This class is closed under composition
//! and contains every automorphism this crate ever produces.
//!
//! Products of automorphisms are standard function composition throughout:
//! `compose(outer, inner)` applies `inner` first. Under this convention the
//! partial conjugations satisfy X(g,Hⱼ) ∘ X(g′,Hⱼ) = X(g′g, Hⱼ); the
//! classical relation lists read products in application order, so a product
//! written A·B there corresponds to compose(B, A) here. The two readings
//! agree on abelian factors.
//!
//! Canonical form: the last syllable of w_i never lies in factor π(i); such
//! a syllable is absorbed into φ_i as an inner twist of the target factor
//! (for abelian targets the twist is trivial and the syllable just drops).
//! Two canonical triples are equal exactly when the automorphisms act
//! identically, so equality is syntactic.

use crate::freeprod::{
    free_word_mul, free_word_pow, FactorElement, FactorGroup, FactorPayload, FreeProdError,
    FreeProduct, FreeProductWord,
};
use crate::perm::Perm;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FpautoError {
    #[error("factor kinds do not match: {0}")]
    KindMismatch(String),
    #[error("automorphisms belong to different factor contexts")]
    ContextMismatch,
    #[error("operation unsupported here: {0}")]
    Unsupported(String),
    #[error("invalid factor automorphism: {0}")]
    InvalidAut(String),
    #[error(transparent)]
    Word(#[from] FreeProdError),
}

/// An automorphism (or isomorphism onto an identical factor) of a single
/// factor group, in a representation matched to the factor kind.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum FactorAut {
    /// Free factor: reduced image words for each generator, with the inverse
    /// automorphism's images stored alongside (an arbitrary tuple of words
    /// need not be an automorphism; the stored inverse is the certificate).
    FreeImages { images: Vec<Vec<(usize, i64)>>, inverses: Vec<Vec<(usize, i64)>> },
    /// Free abelian factor: an integer matrix of determinant ±1 acting on
    /// exponent vectors.
    Matrix(Vec<Vec<i64>>),
    /// Finite factor: a table-respecting permutation of element indices.
    TablePerm(Vec<usize>),
}

impl FactorAut {
    /// Identity automorphism in the representation matching `factor`.
    pub fn identity_for(factor: &FactorGroup) -> FactorAut {
        match factor {
            FactorGroup::Free { names } => {
                let images: Vec<Vec<(usize, i64)>> =
                    (0..names.len()).map(|k| vec![(k, 1)]).collect();
                FactorAut::FreeImages { inverses: images.clone(), images }
            }
            FactorGroup::FreeAbelian { names } => {
                let n = names.len();
                let m = (0..n)
                    .map(|r| (0..n).map(|c| i64::from(r == c)).collect())
                    .collect();
                FactorAut::Matrix(m)
            }
            FactorGroup::Finite(t) => FactorAut::TablePerm((0..t.order()).collect()),
        }
    }

    /// Free-factor automorphism from generator images alone. Only rank one
    /// admits a closed-form inverse (the image must be x^±1); higher ranks
    /// must supply inverse images via [`FactorAut::free_images_with_inverses`].
    pub fn free_images(images: Vec<Vec<(usize, i64)>>) -> Result<FactorAut, FpautoError> {
        if images.len() == 1 {
            match images[0].as_slice() {
                [(0, e)] if *e == 1 || *e == -1 => {
                    Ok(FactorAut::FreeImages { inverses: images.clone(), images })
                }
                _ => Err(FpautoError::InvalidAut(
                    "rank-1 free image must be the generator or its inverse".into(),
                )),
            }
        } else {
            Err(FpautoError::Unsupported(
                "supply inverse images explicitly for free rank ≥ 2".into(),
            ))
        }
    }

    pub fn free_images_with_inverses(
        images: Vec<Vec<(usize, i64)>>,
        inverses: Vec<Vec<(usize, i64)>>,
    ) -> FactorAut {
        FactorAut::FreeImages { images, inverses }
    }

    /// Conjugation of `factor` by one of its own elements `s`.
    fn inner_twist(s: &FactorPayload, factor: &FactorGroup) -> FactorAut {
        match (s, factor) {
            (FactorPayload::Free(runs), FactorGroup::Free { names }) => {
                let inv: Vec<(usize, i64)> = runs.iter().rev().map(|&(g, e)| (g, -e)).collect();
                let conj = |by: &[(usize, i64)], by_inv: &[(usize, i64)], k: usize| {
                    free_word_mul(&free_word_mul(by, &[(k, 1)]), by_inv)
                };
                let images = (0..names.len()).map(|k| conj(runs, &inv, k)).collect();
                let inverses = (0..names.len()).map(|k| conj(&inv, runs, k)).collect();
                FactorAut::FreeImages { images, inverses }
            }
            (FactorPayload::Finite(s), FactorGroup::Finite(t)) => {
                let p = (0..t.order()).map(|x| t.mul(t.mul(*s, x), t.inv(*s))).collect();
                FactorAut::TablePerm(p)
            }
            _ => unreachable!("inner twists are only formed for nonabelian factors"),
        }
    }

    pub fn validate(&self, src: &FactorGroup, tgt: &FactorGroup) -> Result<(), FpautoError> {
        match (self, src, tgt) {
            (
                FactorAut::FreeImages { images, inverses },
                FactorGroup::Free { names: sn },
                FactorGroup::Free { names: tn },
            ) => {
                let r = sn.len();
                if tn.len() != r || images.len() != r || inverses.len() != r {
                    return Err(FpautoError::InvalidAut("free image count mismatch".into()));
                }
                let check_word = |w: &[(usize, i64)]| -> Result<(), FpautoError> {
                    for win in w.windows(2) {
                        if win[0].0 == win[1].0 {
                            return Err(FpautoError::InvalidAut("image word not reduced".into()));
                        }
                    }
                    for &(g, e) in w {
                        if g >= r || e == 0 {
                            return Err(FpautoError::InvalidAut("bad image word run".into()));
                        }
                    }
                    Ok(())
                };
                for w in images.iter().chain(inverses) {
                    check_word(w)?;
                }
                for k in 0..r {
                    if substitute(inverses, &images[k]) != vec![(k, 1)]
                        || substitute(images, &inverses[k]) != vec![(k, 1)]
                    {
                        return Err(FpautoError::InvalidAut(
                            "free images and inverses do not compose to the identity".into(),
                        ));
                    }
                }
                Ok(())
            }
            (
                FactorAut::Matrix(m),
                FactorGroup::FreeAbelian { names: sn },
                FactorGroup::FreeAbelian { names: tn },
            ) => {
                let r = sn.len();
                if tn.len() != r || m.len() != r || m.iter().any(|row| row.len() != r) {
                    return Err(FpautoError::InvalidAut("matrix shape mismatch".into()));
                }
                let d = det(m);
                if d != 1 && d != -1 {
                    return Err(FpautoError::InvalidAut(format!(
                        "matrix determinant {d} is not ±1"
                    )));
                }
                Ok(())
            }
            (FactorAut::TablePerm(p), FactorGroup::Finite(s), FactorGroup::Finite(t)) => {
                let k = s.order();
                if t.order() != k || p.len() != k {
                    return Err(FpautoError::InvalidAut("permutation length mismatch".into()));
                }
                let mut seen = vec![false; k];
                for &x in p {
                    if x >= k || seen[x] {
                        return Err(FpautoError::InvalidAut("not a permutation".into()));
                    }
                    seen[x] = true;
                }
                for x in 0..k {
                    for y in 0..k {
                        if p[s.mul(x, y)] != t.mul(p[x], p[y]) {
                            return Err(FpautoError::InvalidAut(
                                "permutation does not respect the multiplication table".into(),
                            ));
                        }
                    }
                }
                Ok(())
            }
            _ => Err(FpautoError::KindMismatch(
                "factor automorphism kind does not match the factor kinds".into(),
            )),
        }
    }

    /// Function composition: `outer ∘ inner`.
    pub fn compose(outer: &FactorAut, inner: &FactorAut) -> Result<FactorAut, FpautoError> {
        match (outer, inner) {
            (
                FactorAut::FreeImages { images: oi, inverses: ov },
                FactorAut::FreeImages { images: ii, inverses: iv },
            ) => Ok(FactorAut::FreeImages {
                images: ii.iter().map(|w| substitute(oi, w)).collect(),
                inverses: ov.iter().map(|w| substitute(iv, w)).collect(),
            }),
            (FactorAut::Matrix(a), FactorAut::Matrix(b)) => Ok(FactorAut::Matrix(matmul(a, b))),
            (FactorAut::TablePerm(a), FactorAut::TablePerm(b)) => {
                Ok(FactorAut::TablePerm(b.iter().map(|&x| a[x]).collect()))
            }
            _ => Err(FpautoError::KindMismatch("cannot compose mixed factor aut kinds".into())),
        }
    }

    pub fn inverse(&self) -> Result<FactorAut, FpautoError> {
        match self {
            FactorAut::FreeImages { images, inverses } => Ok(FactorAut::FreeImages {
                images: inverses.clone(),
                inverses: images.clone(),
            }),
            FactorAut::Matrix(m) => {
                let d = det(m);
                if d != 1 && d != -1 {
                    return Err(FpautoError::InvalidAut("determinant is not ±1".into()));
                }
                // det = ±1, so the integer inverse is the adjugate times det.
                let adj = adjugate(m);
                Ok(FactorAut::Matrix(
                    adj.iter().map(|row| row.iter().map(|&x| x * d).collect()).collect(),
                ))
            }
            FactorAut::TablePerm(p) => {
                let mut inv = vec![0; p.len()];
                for (x, &y) in p.iter().enumerate() {
                    inv[y] = x;
                }
                Ok(FactorAut::TablePerm(inv))
            }
        }
    }

    pub fn pow(&self, e: i64) -> Result<FactorAut, FpautoError> {
        let mut base = if e < 0 { self.inverse()? } else { self.clone() };
        let mut e = e.unsigned_abs();
        let mut acc: Option<FactorAut> = None;
        while e > 0 {
            if e & 1 == 1 {
                acc = Some(match acc {
                    None => base.clone(),
                    Some(a) => FactorAut::compose(&a, &base)?,
                });
            }
            e >>= 1;
            if e > 0 {
                base = FactorAut::compose(&base, &base)?;
            }
        }
        Ok(acc.unwrap_or_else(|| match self {
            FactorAut::FreeImages { images, .. } => {
                let id: Vec<Vec<(usize, i64)>> = (0..images.len()).map(|k| vec![(k, 1)]).collect();
                FactorAut::FreeImages { images: id.clone(), inverses: id }
            }
            FactorAut::Matrix(m) => {
                let n = m.len();
                FactorAut::Matrix(
                    (0..n).map(|r| (0..n).map(|c| i64::from(r == c)).collect()).collect(),
                )
            }
            FactorAut::TablePerm(p) => FactorAut::TablePerm((0..p.len()).collect()),
        }))
    }

    pub fn apply_payload(&self, p: &FactorPayload) -> Result<FactorPayload, FpautoError> {
        match (self, p) {
            (FactorAut::FreeImages { images, .. }, FactorPayload::Free(runs)) => {
                Ok(FactorPayload::Free(substitute(images, runs)))
            }
            (FactorAut::Matrix(m), FactorPayload::Abelian(v)) => {
                if m.len() != v.len() {
                    return Err(FpautoError::InvalidAut("matrix/vector size mismatch".into()));
                }
                let out = m.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect();
                Ok(FactorPayload::Abelian(out))
            }
            (FactorAut::TablePerm(perm), FactorPayload::Finite(x)) => {
                perm.get(*x).copied().map(FactorPayload::Finite).ok_or_else(|| {
                    FpautoError::InvalidAut("element index outside permutation".into())
                })
            }
            _ => Err(FpautoError::KindMismatch("payload kind does not match aut kind".into())),
        }
    }

    pub fn is_identity(&self) -> bool {
        match self {
            FactorAut::FreeImages { images, .. } => {
                images.iter().enumerate().all(|(k, w)| w.as_slice() == [(k, 1)])
            }
            FactorAut::Matrix(m) => m
                .iter()
                .enumerate()
                .all(|(r, row)| row.iter().enumerate().all(|(c, &x)| x == i64::from(r == c))),
            FactorAut::TablePerm(p) => p.iter().enumerate().all(|(x, &y)| x == y),
        }
    }
}

/// Applies the substitution `gen k ↦ images[k]` to a reduced run word.
fn substitute(images: &[Vec<(usize, i64)>], word: &[(usize, i64)]) -> Vec<(usize, i64)> {
    let mut acc: Vec<(usize, i64)> = Vec::new();
    for &(g, e) in word {
        acc = free_word_mul(&acc, &free_word_pow(&images[g], e));
    }
    acc
}

fn det(m: &[Vec<i64>]) -> i64 {
    let n = m.len();
    if n == 0 {
        return 1;
    }
    if n == 1 {
        return m[0][0];
    }
    let mut total = 0;
    for c in 0..n {
        let minor: Vec<Vec<i64>> = m[1..]
            .iter()
            .map(|row| {
                row.iter().enumerate().filter(|&(j, _)| j != c).map(|(_, &x)| x).collect()
            })
            .collect();
        let sign = if c % 2 == 0 { 1 } else { -1 };
        total += sign * m[0][c] * det(&minor);
    }
    total
}

fn adjugate(m: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let n = m.len();
    if n == 1 {
        return vec![vec![1]];
    }
    let mut adj = vec![vec![0i64; n]; n];
    for r in 0..n {
        for c in 0..n {
            let minor: Vec<Vec<i64>> = (0..n)
                .filter(|&i| i != r)
                .map(|i| (0..n).filter(|&j| j != c).map(|j| m[i][j]).collect())
                .collect();
            let sign = if (r + c) % 2 == 0 { 1 } else { -1 };
            // Transposed cofactor.
            adj[c][r] = sign * det(&minor);
        }
    }
    adj
}

fn matmul(a: &[Vec<i64>], b: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let n = a.len();
    (0..n)
        .map(|r| (0..n).map(|c| (0..n).map(|k| a[r][k] * b[k][c]).sum()).collect())
        .collect()
}

/// The partial conjugation generator X(g, Hⱼ): conjugate factor `support`
/// by the element `acting` and fix every other factor. `sign = -1` denotes
/// its inverse, X(g⁻¹, Hⱼ). The acting element's factor may equal the
/// support (that case is an inner twist of one factor); contexts that forbid
/// it enforce the restriction themselves.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PartialConjugation {
    pub acting: FactorElement,
    pub support: usize,
    pub sign: i8,
}

impl PartialConjugation {
    pub fn new(acting: FactorElement, support: usize, sign: i8) -> Self {
        PartialConjugation { acting, support, sign }
    }

    pub fn validate(&self, ctx: &FreeProduct) -> Result<(), FpautoError> {
        ctx.check_element(&self.acting)?;
        ctx.factor(self.support)?;
        if self.sign != 1 && self.sign != -1 {
            return Err(FpautoError::InvalidAut(format!("sign {} is not ±1", self.sign)));
        }
        if ctx.element_is_identity(&self.acting) {
            return Err(FpautoError::InvalidAut("acting element is trivial".into()));
        }
        Ok(())
    }

    pub fn inverted(&self) -> Self {
        PartialConjugation { acting: self.acting.clone(), support: self.support, sign: -self.sign }
    }

    /// The acting element with the sign folded in: g for +1, g⁻¹ for -1.
    pub fn signed_acting(&self, ctx: &FreeProduct) -> Result<FactorElement, FpautoError> {
        if self.sign == 1 {
            Ok(self.acting.clone())
        } else {
            Ok(ctx.element_inv(&self.acting)?)
        }
    }
}

/// Generator inputs for [`SymmetricFPAut::make_generator_aut`].
#[derive(Debug, Clone)]
pub enum GeneratorAut {
    Partial(PartialConjugation),
    Factor { factor: usize, aut: FactorAut },
    Permutation(Perm),
}

#[derive(Debug, Clone)]
enum TraceStep {
    Partial(PartialConjugation),
    Factor { factor: usize, aut: FactorAut },
    Permutation(Perm),
}

/// A symmetric automorphism in canonical form. Constructed from generators
/// ([`SymmetricFPAut::make_generator_aut`], [`SymmetricFPAut::inner`]) and
/// closed under [`SymmetricFPAut::compose`]; the construction history is
/// retained so that [`SymmetricFPAut::inverse`] can replay it backwards with
/// each generator inverted exactly.
#[derive(Debug, Clone)]
pub struct SymmetricFPAut {
    ctx: Arc<FreeProduct>,
    pi: Perm,
    phis: Vec<FactorAut>,
    conj: Vec<FreeProductWord>,
    trace: Vec<TraceStep>,
}

impl PartialEq for SymmetricFPAut {
    fn eq(&self, other: &Self) -> bool {
        (Arc::ptr_eq(&self.ctx, &other.ctx) || self.ctx == other.ctx)
            && self.pi == other.pi
            && self.phis == other.phis
            && self.conj == other.conj
    }
}

impl Eq for SymmetricFPAut {}

impl std::hash::Hash for SymmetricFPAut {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.pi.hash(state);
        self.phis.hash(state);
        self.conj.hash(state);
    }
}

impl SymmetricFPAut {
    pub fn identity(ctx: Arc<FreeProduct>) -> Self {
        let n = ctx.factor_count();
        let phis = ctx.factors().iter().map(FactorAut::identity_for).collect();
        SymmetricFPAut {
            pi: Perm::identity(n),
            phis,
            conj: vec![FreeProductWord::identity(); n],
            trace: Vec::new(),
            ctx,
        }
    }

    pub fn context(&self) -> &Arc<FreeProduct> {
        &self.ctx
    }

    pub fn factor_perm(&self) -> &Perm {
        &self.pi
    }

    pub fn factor_aut(&self, i: usize) -> &FactorAut {
        &self.phis[i]
    }

    pub fn conjugator(&self, i: usize) -> &FreeProductWord {
        &self.conj[i]
    }

    pub fn is_identity(&self) -> bool {
        self.pi.is_identity()
            && self.phis.iter().all(FactorAut::is_identity)
            && self.conj.iter().all(FreeProductWord::is_identity)
    }

    pub fn make_generator_aut(
        ctx: Arc<FreeProduct>,
        gen: GeneratorAut,
    ) -> Result<Self, FpautoError> {
        let n = ctx.factor_count();
        match gen {
            GeneratorAut::Partial(pc) => {
                pc.validate(&ctx)?;
                let mut conj = vec![FreeProductWord::identity(); n];
                conj[pc.support] = ctx.word_from_element(pc.signed_acting(&ctx)?)?;
                let phis = ctx.factors().iter().map(FactorAut::identity_for).collect();
                let mut aut = SymmetricFPAut {
                    pi: Perm::identity(n),
                    phis,
                    conj,
                    trace: vec![TraceStep::Partial(pc)],
                    ctx,
                };
                aut.canonicalize()?;
                Ok(aut)
            }
            GeneratorAut::Factor { factor, aut } => {
                let f = ctx.factor(factor)?;
                aut.validate(f, f)?;
                let mut phis: Vec<FactorAut> =
                    ctx.factors().iter().map(FactorAut::identity_for).collect();
                phis[factor] = aut.clone();
                Ok(SymmetricFPAut {
                    pi: Perm::identity(n),
                    phis,
                    conj: vec![FreeProductWord::identity(); n],
                    trace: vec![TraceStep::Factor { factor, aut }],
                    ctx,
                })
            }
            GeneratorAut::Permutation(p) => {
                if p.len() != n {
                    return Err(FpautoError::KindMismatch(format!(
                        "permutation of {} factors in a context of {n}",
                        p.len()
                    )));
                }
                for i in 0..n {
                    if !ctx.factors()[i].same_structure(&ctx.factors()[p.apply(i)]) {
                        return Err(FpautoError::KindMismatch(format!(
                            "permutation pairs factors {i} and {} with different structure",
                            p.apply(i)
                        )));
                    }
                }
                let phis = ctx.factors().iter().map(FactorAut::identity_for).collect();
                Ok(SymmetricFPAut {
                    pi: p.clone(),
                    phis,
                    conj: vec![FreeProductWord::identity(); n],
                    trace: vec![TraceStep::Permutation(p)],
                    ctx,
                })
            }
        }
    }

    pub fn partial_conjugation(
        ctx: Arc<FreeProduct>,
        pc: PartialConjugation,
    ) -> Result<Self, FpautoError> {
        Self::make_generator_aut(ctx, GeneratorAut::Partial(pc))
    }

    pub fn factor_automorphism(
        ctx: Arc<FreeProduct>,
        factor: usize,
        aut: FactorAut,
    ) -> Result<Self, FpautoError> {
        Self::make_generator_aut(ctx, GeneratorAut::Factor { factor, aut })
    }

    pub fn factor_permutation(ctx: Arc<FreeProduct>, p: Perm) -> Result<Self, FpautoError> {
        Self::make_generator_aut(ctx, GeneratorAut::Permutation(p))
    }

    /// Conjugation by a free product word: every factor is conjugated by `w`.
    pub fn inner(ctx: Arc<FreeProduct>, w: &FreeProductWord) -> Result<Self, FpautoError> {
        for s in w.syllables() {
            ctx.check_element(s)?;
        }
        let mut acc = SymmetricFPAut::identity(ctx.clone());
        for s in w.syllables() {
            for j in 0..ctx.factor_count() {
                let pc = PartialConjugation::new(s.clone(), j, 1);
                let gen = SymmetricFPAut::partial_conjugation(ctx.clone(), pc)?;
                acc = acc.compose(&gen)?;
            }
        }
        Ok(acc)
    }

    fn canonicalize(&mut self) -> Result<(), FpautoError> {
        for i in 0..self.ctx.factor_count() {
            let j = self.pi.apply(i);
            loop {
                let Some(last) = self.conj[i].syllables().last() else { break };
                if last.factor != j {
                    break;
                }
                let s = last.clone();
                let mut syl = self.conj[i].syllables().to_vec();
                syl.pop();
                self.conj[i] = FreeProductWord::from_normal_syllables(syl);
                let tgt = self.ctx.factor(j)?;
                if !tgt.is_abelian() {
                    let twist = FactorAut::inner_twist(&s.payload, tgt);
                    self.phis[i] = FactorAut::compose(&twist, &self.phis[i])?;
                }
            }
        }
        Ok(())
    }

    /// Image of a single syllable as a word: w_i · φ_i(x) · w_i⁻¹.
    fn apply_syllable(&self, e: &FactorElement) -> Result<Vec<FactorElement>, FpautoError> {
        self.ctx.check_element(e)?;
        let i = e.factor;
        let image = FactorElement {
            factor: self.pi.apply(i),
            payload: self.phis[i].apply_payload(&e.payload)?,
        };
        let mut out: Vec<FactorElement> = self.conj[i].syllables().to_vec();
        out.push(image);
        out.extend(self.ctx.invert(&self.conj[i])?.syllables().iter().cloned());
        Ok(out)
    }

    pub fn apply(&self, u: &FreeProductWord) -> Result<FreeProductWord, FpautoError> {
        let mut raw = Vec::new();
        for s in u.syllables() {
            raw.extend(self.apply_syllable(s)?);
        }
        Ok(self.ctx.normalize(&raw)?)
    }

    pub fn apply_element(&self, e: &FactorElement) -> Result<FreeProductWord, FpautoError> {
        Ok(self.ctx.normalize(&self.apply_syllable(e)?)?)
    }

    /// Function composition `self ∘ inner`: `inner` acts first.
    pub fn compose(&self, inner: &SymmetricFPAut) -> Result<SymmetricFPAut, FpautoError> {
        if !Arc::ptr_eq(&self.ctx, &inner.ctx) && self.ctx != inner.ctx {
            return Err(FpautoError::ContextMismatch);
        }
        let n = self.ctx.factor_count();
        let pi = self.pi.compose(&inner.pi);
        let mut phis = Vec::with_capacity(n);
        let mut conj = Vec::with_capacity(n);
        for i in 0..n {
            let mid = inner.pi.apply(i);
            phis.push(FactorAut::compose(&self.phis[mid], &inner.phis[i])?);
            let pushed = self.apply(&inner.conj[i])?;
            conj.push(self.ctx.multiply(&pushed, &self.conj[mid])?);
        }
        let mut trace = self.trace.clone();
        trace.extend(inner.trace.iter().cloned());
        let mut out = SymmetricFPAut { ctx: self.ctx.clone(), pi, phis, conj, trace };
        out.canonicalize()?;
        Ok(out)
    }

    /// Exact inverse, obtained by replaying the construction history
    /// backwards with every generator inverted. Errors if the history was
    /// stripped (internal bulk computations may do that to save memory).
    pub fn inverse(&self) -> Result<SymmetricFPAut, FpautoError> {
        if !self.is_identity() && self.trace.is_empty() {
            return Err(FpautoError::Unsupported(
                "automorphism carries no construction history".into(),
            ));
        }
        let mut acc = SymmetricFPAut::identity(self.ctx.clone());
        for step in self.trace.iter().rev() {
            let gen = match step {
                TraceStep::Partial(pc) => SymmetricFPAut::partial_conjugation(
                    self.ctx.clone(),
                    pc.inverted(),
                )?,
                TraceStep::Factor { factor, aut } => SymmetricFPAut::factor_automorphism(
                    self.ctx.clone(),
                    *factor,
                    aut.inverse()?,
                )?,
                TraceStep::Permutation(p) => {
                    SymmetricFPAut::factor_permutation(self.ctx.clone(), p.inverse())?
                }
            };
            acc = acc.compose(&gen)?;
        }
        Ok(acc)
    }

    pub(crate) fn strip_trace(&mut self) {
        self.trace.clear();
    }

    /// Decides whether this automorphism is conjugation by some word, and
    /// returns that word. Requires at least two factors, all nontrivial (the
    /// witness is then unique, and factors are self-normalizing, which the
    /// candidate search below relies on).
    ///
    /// Per factor, the conjugating element must split as w_i · c_i⁻¹ with
    /// c_i ∈ H_i accounting for φ_i: abelian factors force φ_i = id and
    /// leave c_i free (a whole coset), free factors of rank ≥ 2 determine
    /// c_i up to the trivial center (found by conjugator extraction from the
    /// generator images), and finite factors are searched exhaustively.
    /// Every candidate is verified against the full action before being
    /// returned.
    pub fn is_inner(&self) -> Result<Option<FreeProductWord>, FpautoError> {
        let ctx = &self.ctx;
        let n = ctx.factor_count();
        if n < 2 {
            return Err(FpautoError::Unsupported("inner test needs at least 2 factors".into()));
        }
        if ctx.factors().iter().any(FactorGroup::is_trivial) {
            return Err(FpautoError::Unsupported("inner test needs nontrivial factors".into()));
        }
        if !self.pi.is_identity() {
            return Ok(None);
        }

        // Finite candidate words from factors that pin the conjugator, and
        // coset targets from abelian factors that leave it free.
        let mut pinned: Option<Vec<FreeProductWord>> = None;
        let mut coset_targets: Vec<(FreeProductWord, usize)> = Vec::new();
        for i in 0..n {
            let f = ctx.factor(i)?;
            if f.is_abelian() {
                if !self.phis[i].is_identity() {
                    return Ok(None);
                }
                coset_targets.push((self.conj[i].clone(), i));
                continue;
            }
            let cands: Vec<FactorElement> = match (&self.phis[i], f) {
                (FactorAut::FreeImages { images, .. }, FactorGroup::Free { names }) => {
                    match free_conjugator(images, names.len()) {
                        Some(q) => vec![FactorElement::free(i, q)],
                        None => return Ok(None),
                    }
                }
                (FactorAut::TablePerm(p), FactorGroup::Finite(t)) => {
                    let mut hits = Vec::new();
                    for c in 0..t.order() {
                        let works =
                            (0..t.order()).all(|x| p[x] == t.mul(t.mul(t.inv(c), x), c));
                        if works {
                            hits.push(FactorElement::finite(i, t.inv(c)));
                        }
                    }
                    if hits.is_empty() {
                        return Ok(None);
                    }
                    hits
                }
                _ => unreachable!("nonabelian factor with mismatched aut kind"),
            };
            let words: Result<Vec<FreeProductWord>, FpautoError> = cands
                .into_iter()
                .map(|c| {
                    let cw = ctx.word_from_element(c)?;
                    Ok(ctx.multiply(&self.conj[i], &cw)?)
                })
                .collect();
            let words = words?;
            pinned = Some(match pinned {
                None => words,
                // Keep the smaller candidate list; any factor's list must
                // contain the witness, so one list suffices.
                Some(prev) if prev.len() <= words.len() => prev,
                Some(_) => words,
            });
        }

        let candidates: Vec<FreeProductWord> = match pinned {
            Some(list) => list,
            None => match ctx.solve_common_coset(&coset_targets)? {
                Some(w) => vec![w],
                None => return Ok(None),
            },
        };
        for w in candidates {
            if self.verify_inner_witness(&w)? {
                return Ok(Some(w));
            }
        }
        Ok(None)
    }

    fn verify_inner_witness(&self, w: &FreeProductWord) -> Result<bool, FpautoError> {
        let ctx = &self.ctx;
        for i in 0..ctx.factor_count() {
            for s in ctx.generators_of(i)? {
                let lhs = self.apply_element(&s)?;
                let rhs = ctx.conjugate(&ctx.word_from_element(s.clone())?, w)?;
                if lhs != rhs {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

/// Finds q with q·x_k·q⁻¹ = images[k] for all generators of a free factor of
/// rank ≥ 2, if it exists. Solutions for the first generator alone form
/// q ∈ p·⟨x₀⟩ where images[0] cyclically reduces to x₀ with conjugating
/// prefix p; the exponent is then pinned by the other images within a
/// length bound.
fn free_conjugator(images: &[Vec<(usize, i64)>], rank: usize) -> Option<Vec<(usize, i64)>> {
    debug_assert!(rank >= 2);
    let letters: Vec<(usize, i64)> = images[0]
        .iter()
        .flat_map(|&(g, e)| {
            let sign = e.signum();
            (0..e.unsigned_abs()).map(move |_| (g, sign))
        })
        .collect();
    let mut prefix: Vec<(usize, i64)> = Vec::new();
    let mut core = letters;
    while core.len() >= 2 {
        let first = core[0];
        let last = *core.last().unwrap();
        if first.0 == last.0 && first.1 == -last.1 {
            prefix.push(first);
            core.remove(0);
            core.pop();
        } else {
            break;
        }
    }
    if core != vec![(0, 1)] {
        return None;
    }
    let p: Vec<(usize, i64)> = prefix
        .iter()
        .fold(Vec::new(), |acc, &(g, s)| free_word_mul(&acc, &[(g, s)]));
    let max_len: i64 = images
        .iter()
        .map(|w| w.iter().map(|&(_, e)| e.abs()).sum::<i64>())
        .max()
        .unwrap_or(0);
    let bound = max_len + p.iter().map(|&(_, e)| e.abs()).sum::<i64>() + 2;
    for t in -bound..=bound {
        let q = free_word_mul(&p, &free_word_pow(&[(0, 1)], t));
        let q_inv: Vec<(usize, i64)> = q.iter().rev().map(|&(g, e)| (g, -e)).collect();
        let ok = (0..rank).all(|k| {
            free_word_mul(&free_word_mul(&q, &[(k, 1)]), &q_inv) == images[k]
        });
        if ok {
            return Some(q);
        }
    }
    None
}

/// Outcome of randomized verification of the three partial-conjugation
/// relation families. Products in the classical statements are read in
/// application order; under function composition relation (1) is checked as
/// compose(X(g′,Hⱼ), X(g,Hⱼ)) = X(gg′,Hⱼ).
#[derive(Debug, Clone, Default)]
pub struct FrRelationReport {
    pub relation1_trials: usize,
    pub relation2_trials: usize,
    pub relation3_trials: usize,
    pub violations: Vec<String>,
}

impl FrRelationReport {
    pub fn all_hold(&self) -> bool {
        self.violations.is_empty()
    }
}

impl std::fmt::Display for FrRelationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(
            f,
            "relation (1): {} trials; relation (2): {} trials; relation (3): {} trials",
            self.relation1_trials, self.relation2_trials, self.relation3_trials
        )?;
        if self.violations.is_empty() {
            write!(f, "all sampled relations hold")
        } else {
            for v in &self.violations {
                writeln!(f, "VIOLATION: {v}")?;
            }
            write!(f, "{} violation(s)", self.violations.len())
        }
    }
}

pub(crate) fn random_nontrivial_element(
    fp: &FreeProduct,
    factor: usize,
    rng: &mut impl Rng,
) -> FactorElement {
    match &fp.factors()[factor] {
        FactorGroup::Free { names } => {
            let r = names.len();
            if r == 0 {
                return FactorElement::free(factor, Vec::new());
            }
            let exps = [-2i64, -1, 1, 2];
            let g0 = rng.random_range(0..r);
            let mut runs = vec![(g0, exps[rng.random_range(0..4)])];
            if r >= 2 && rng.random_range(0..2) == 1 {
                let mut g1 = rng.random_range(0..r);
                if g1 == g0 {
                    g1 = (g1 + 1) % r;
                }
                runs.push((g1, exps[rng.random_range(0..4)]));
            }
            FactorElement::free(factor, runs)
        }
        FactorGroup::FreeAbelian { names } => {
            let r = names.len();
            if r == 0 {
                return FactorElement::abelian(factor, Vec::new());
            }
            loop {
                let v: Vec<i64> = (0..r).map(|_| rng.random_range(-2..=2)).collect();
                if v.iter().any(|&x| x != 0) {
                    return FactorElement::abelian(factor, v);
                }
            }
        }
        FactorGroup::Finite(t) => {
            if t.order() == 1 {
                return FactorElement::finite(factor, t.identity());
            }
            loop {
                let x = rng.random_range(0..t.order());
                if x != t.identity() {
                    return FactorElement::finite(factor, x);
                }
            }
        }
    }
}

/// Randomized verification of the three relation families satisfied by
/// partial conjugations: (1) same support and acting factor compose by
/// multiplying acting elements; (2) generators with disjoint supports whose
/// acting factors avoid both supports commute; (3) for distinct i, j, k the
/// product X(g,Hⱼ)X(g,H_k) commutes with X(g′,Hⱼ) when g ∈ H_i, g′ ∈ H_k.
/// Each side is built as a SymmetricFPAut and compared both canonically and
/// on every factor generator.
pub fn check_fr_relations(
    ctx: &Arc<FreeProduct>,
    trials: usize,
    seed: u64,
) -> Result<FrRelationReport, FpautoError> {
    let n = ctx.factor_count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = FrRelationReport::default();
    if n < 2 {
        return Ok(report);
    }
    let nontrivial: Vec<usize> =
        (0..n).filter(|&i| !ctx.factors()[i].is_trivial()).collect();
    if nontrivial.is_empty() {
        return Ok(report);
    }

    let make_pc = |g: &FactorElement, j: usize| -> Result<SymmetricFPAut, FpautoError> {
        SymmetricFPAut::partial_conjugation(
            ctx.clone(),
            PartialConjugation::new(g.clone(), j, 1),
        )
    };
    let agree = |a: &SymmetricFPAut, b: &SymmetricFPAut| -> Result<bool, FpautoError> {
        if a != b {
            return Ok(false);
        }
        for i in 0..n {
            for s in ctx.generators_of(i)? {
                if a.apply_element(&s)? != b.apply_element(&s)? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    };

    // Relation (1): supports equal, acting elements multiply.
    for _ in 0..trials {
        let i = nontrivial[rng.random_range(0..nontrivial.len())];
        let j = loop {
            let j = rng.random_range(0..n);
            if j != i {
                break j;
            }
        };
        let g = random_nontrivial_element(ctx, i, &mut rng);
        let g2 = random_nontrivial_element(ctx, i, &mut rng);
        let lhs = make_pc(&g2, j)?.compose(&make_pc(&g, j)?)?;
        let prod = ctx.element_mul(&g, &g2)?;
        let rhs = if ctx.element_is_identity(&prod) {
            SymmetricFPAut::identity(ctx.clone())
        } else {
            make_pc(&prod, j)?
        };
        report.relation1_trials += 1;
        if !agree(&lhs, &rhs)? {
            report.violations.push(format!(
                "relation (1) failed: acting {:?} then {:?} on support {j}",
                g, g2
            ));
        }
    }

    // Relations (2) and (3) need three factors.
    if n >= 3 {
        // (2): valid index draws (i, j, i′, j′) with j ≠ j′ and
        // {i, i′} ∩ {j, j′} = ∅; actors must be nontrivial factors.
        let mut pairs2: Vec<(usize, usize, usize, usize)> = Vec::new();
        for &i in &nontrivial {
            for &i2 in &nontrivial {
                for j in 0..n {
                    for j2 in 0..n {
                        if j != j2 && i != j && i != j2 && i2 != j && i2 != j2 {
                            pairs2.push((i, j, i2, j2));
                        }
                    }
                }
            }
        }
        for _ in 0..trials {
            if pairs2.is_empty() {
                break;
            }
            let (i, j, i2, j2) = pairs2[rng.random_range(0..pairs2.len())];
            let g = random_nontrivial_element(ctx, i, &mut rng);
            let g2 = random_nontrivial_element(ctx, i2, &mut rng);
            let a = make_pc(&g, j)?;
            let b = make_pc(&g2, j2)?;
            report.relation2_trials += 1;
            if !agree(&a.compose(&b)?, &b.compose(&a)?)? {
                report.violations.push(format!(
                    "relation (2) failed: X over supports {j}, {j2} with actors {i}, {i2}"
                ));
            }
        }
        // (3): [X(g,Hⱼ)·X(g,H_k), X(g′,Hⱼ)] = 1 for distinct i, j, k, with
        // g ∈ H_i and g′ ∈ H_k. The two parts of the first element commute
        // by relation (2), so its composition order is immaterial.
        let mut triples3: Vec<(usize, usize, usize)> = Vec::new();
        for &i in &nontrivial {
            for j in 0..n {
                for &k in &nontrivial {
                    if i != j && j != k && i != k {
                        triples3.push((i, j, k));
                    }
                }
            }
        }
        for _ in 0..trials {
            if triples3.is_empty() {
                break;
            }
            let (i, j, k) = triples3[rng.random_range(0..triples3.len())];
            let g = random_nontrivial_element(ctx, i, &mut rng);
            let g2 = random_nontrivial_element(ctx, k, &mut rng);
            let first = make_pc(&g, j)?.compose(&make_pc(&g, k)?)?;
            let second = make_pc(&g2, j)?;
            report.relation3_trials += 1;
            if !agree(&first.compose(&second)?, &second.compose(&first)?)? {
                report.violations.push(format!("relation (3) failed: i={i}, j={j}, k={k}"));
            }
        }
    }
    Ok(report)
}
