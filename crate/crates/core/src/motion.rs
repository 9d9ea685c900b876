//! The motion group of a split link, decomposed as an iterated semidirect
//! product: partial-conjugation automorphisms of the complement free product
//! (the Fouxe-Rabinovitch kernel), piece motion groups, and class-preserving
//! piece permutations.
//!
//! An element is a triple `(fr, g, p)`: a formal word of signed partial
//! conjugations, a tuple of piece motions, and a permutation of pieces.
//! Multiplication twists the right factor's `fr` word by the left factor's
//! permutation and Dahm actions:
//!
//! ```text
//! (f, g, p) * (f', g', p') = (f . gamma_g(beta_p(f')), g . alpha_p(g'), p p')
//! ```
//!
//! where `alpha_p` permutes motion coordinates, `beta_p` relabels acting and
//! support factors, and `gamma_g` maps each entry's acting payload through
//! the Dahm action of its coordinate of `g`.
//!
//! Products of automorphisms here and in [`crate::fpauto`] are function
//! compositions; the word problem for `fr` parts is delegated to the Dahm
//! homomorphism, which is faithful on the kernel. Equality in the quotient
//! that forgets ambient rotations (the one-point compactification) divides
//! further by the meridian embedding [`iota`] and is decided by
//! [`equals_in_s3`] through the inner-automorphism test.

use std::collections::HashMap;
use std::collections::VecDeque;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::catalog::{CatalogError, LinkSpec};
use crate::fpauto::{FpautoError, PartialConjugation, SymmetricFPAut};
use crate::freeprod::{
    FactorElement, FactorGroup, FactorPayload, FreeProdError, FreeProductWord,
};
use crate::perm::Perm;

#[derive(Debug, Error)]
pub enum MotionError {
    #[error("elements belong to different link specifications")]
    ContextMismatch,
    #[error("invalid generator: {0}")]
    InvalidGenerator(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("relator fails to evaluate to the identity: {0}")]
    UnsoundRelator(String),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Word(#[from] FreeProdError),
    #[error(transparent)]
    Aut(#[from] FpautoError),
}

/// A formal word of signed partial conjugations, each acting on a support
/// factor different from its acting factor. Adjacent exact inverses cancel
/// on construction; all deeper equalities are decided through the Dahm
/// image.
#[derive(Debug, Clone, Default)]
pub struct Fr0Word {
    entries: Vec<PartialConjugation>,
}

impl Fr0Word {
    pub fn identity() -> Self {
        Fr0Word::default()
    }

    pub fn entries(&self) -> &[PartialConjugation] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn push_reduced(&mut self, e: PartialConjugation) {
        let cancels = self.entries.last().is_some_and(|last| {
            last.support == e.support && last.sign == -e.sign && last.acting == e.acting
        });
        if cancels {
            self.entries.pop();
        } else {
            self.entries.push(e);
        }
    }

    fn concat(&self, other: &Fr0Word) -> Fr0Word {
        let mut out = self.clone();
        for e in &other.entries {
            out.push_reduced(e.clone());
        }
        out
    }

    fn inverted(&self) -> Fr0Word {
        Fr0Word { entries: self.entries.iter().rev().map(|e| e.inverted()).collect() }
    }

    /// Relabels acting factors and supports along `p`; payloads transfer
    /// verbatim because class-preserving permutations only connect pieces
    /// with structurally identical factors.
    fn relabeled(&self, p: &Perm) -> Fr0Word {
        Fr0Word {
            entries: self
                .entries
                .iter()
                .map(|e| {
                    PartialConjugation::new(
                        FactorElement {
                            factor: p.apply(e.acting.factor),
                            payload: e.acting.payload.clone(),
                        },
                        p.apply(e.support),
                        e.sign,
                    )
                })
                .collect(),
        }
    }

    /// Maps each entry's acting payload through the Dahm action of the
    /// motion coordinate of its acting piece; supports are untouched.
    fn twisted(&self, spec: &LinkSpec, g: &[FactorPayload]) -> Result<Fr0Word, MotionError> {
        let mut out = Fr0Word::identity();
        for e in &self.entries {
            let a = e.acting.factor;
            let payload = if spec.motion_is_identity(a, &g[a])? {
                e.acting.payload.clone()
            } else {
                spec.motion_action(a, &g[a])?.apply_payload(&e.acting.payload)?
            };
            out.push_reduced(PartialConjugation::new(
                FactorElement { factor: a, payload },
                e.support,
                e.sign,
            ));
        }
        Ok(out)
    }
}

/// One element of the motion group.
///
/// Structural comparison of `fr` parts is not group equality; use
/// [`equals`] (exact) or [`equals_in_s3`] (modulo meridional rotations).
#[derive(Debug, Clone)]
pub struct MotionElement {
    spec: Arc<LinkSpec>,
    fr: Fr0Word,
    g: Vec<FactorPayload>,
    p: Perm,
}

fn same_spec(a: &MotionElement, b: &MotionElement) -> bool {
    Arc::ptr_eq(&a.spec, &b.spec) || a.spec == b.spec
}

fn identity_motions(spec: &LinkSpec) -> Result<Vec<FactorPayload>, MotionError> {
    (0..spec.piece_count()).map(|i| Ok(spec.motion_identity(i)?)).collect()
}

impl MotionElement {
    pub fn identity(spec: &Arc<LinkSpec>) -> Result<MotionElement, MotionError> {
        Ok(MotionElement {
            spec: spec.clone(),
            fr: Fr0Word::identity(),
            g: identity_motions(spec)?,
            p: Perm::identity(spec.piece_count()),
        })
    }

    /// The generator conjugating the support piece's factor by an element of
    /// another piece's factor.
    pub fn partial_conjugation(
        spec: &Arc<LinkSpec>,
        acting: FactorElement,
        support: usize,
    ) -> Result<MotionElement, MotionError> {
        spec.piece(support)?;
        if acting.factor == support {
            return Err(MotionError::InvalidGenerator(
                "a piece cannot partially conjugate itself".into(),
            ));
        }
        let pc = PartialConjugation::new(acting, support, 1);
        pc.validate(spec.complement_product())?;
        let mut out = MotionElement::identity(spec)?;
        out.fr.push_reduced(pc);
        Ok(out)
    }

    /// The element performing motion `g` of piece `i` and nothing else.
    pub fn motion_of(
        spec: &Arc<LinkSpec>,
        i: usize,
        g: FactorPayload,
    ) -> Result<MotionElement, MotionError> {
        spec.check_motion(i, &g)?;
        let mut out = MotionElement::identity(spec)?;
        out.g[i] = g;
        Ok(out)
    }

    /// The element relabeling pieces along a class-preserving permutation.
    pub fn permutation(spec: &Arc<LinkSpec>, p: Perm) -> Result<MotionElement, MotionError> {
        if !spec.is_class_preserving(&p) {
            return Err(MotionError::InvalidGenerator(
                "permutation does not preserve isotopy classes".into(),
            ));
        }
        let mut out = MotionElement::identity(spec)?;
        out.p = p;
        Ok(out)
    }

    pub fn spec(&self) -> &Arc<LinkSpec> {
        &self.spec
    }

    pub fn fr_part(&self) -> &Fr0Word {
        &self.fr
    }

    pub fn motion_parts(&self) -> &[FactorPayload] {
        &self.g
    }

    pub fn permutation_part(&self) -> &Perm {
        &self.p
    }

    pub fn is_structurally_identity(&self) -> bool {
        self.fr.is_empty()
            && self.p.is_identity()
            && (0..self.g.len())
                .all(|i| self.spec.motion_is_identity(i, &self.g[i]).unwrap_or(false))
    }

    /// Dahm image of the `fr` part alone.
    fn dahm_fr(&self) -> Result<SymmetricFPAut, MotionError> {
        let ctx = self.spec.complement_product().clone();
        let mut acc = SymmetricFPAut::identity(ctx.clone());
        for e in self.fr.entries() {
            let gen = SymmetricFPAut::partial_conjugation(ctx.clone(), e.clone())?;
            acc = acc.compose(&gen)?;
        }
        Ok(acc)
    }

    /// The Dahm homomorphism into symmetric automorphisms of the complement
    /// free product: the composition of the partial conjugations, the piece
    /// actions of the motion coordinates, and the factor permutation.
    pub fn dahm(&self) -> Result<SymmetricFPAut, MotionError> {
        let ctx = self.spec.complement_product().clone();
        let mut acc = self.dahm_fr()?;
        for i in 0..self.g.len() {
            if !self.spec.motion_is_identity(i, &self.g[i])? {
                let aut = self.spec.motion_action(i, &self.g[i])?;
                acc = acc.compose(&SymmetricFPAut::factor_automorphism(ctx.clone(), i, aut)?)?;
            }
        }
        if !self.p.is_identity() {
            acc = acc.compose(&SymmetricFPAut::factor_permutation(ctx.clone(), self.p.clone())?)?;
        }
        Ok(acc)
    }

    pub fn pow(&self, e: i64) -> Result<MotionElement, MotionError> {
        let base = if e < 0 { inverse(self)? } else { self.clone() };
        let mut acc = MotionElement::identity(&self.spec)?;
        for _ in 0..e.unsigned_abs() {
            acc = multiply(&acc, &base)?;
        }
        Ok(acc)
    }

    /// Renders the element as a product of generator tokens that parses back
    /// to an equal element: partial conjugations `X(w,j)`, piece motions
    /// `G[i]:m`, and transpositions `P(i j)`, with 1-based piece indices.
    pub fn display(&self) -> String {
        let mut tokens = Vec::new();
        let hctx = self.spec.complement_product();
        for e in self.fr.entries() {
            let word = render_compact(
                &self.spec.pieces()[e.acting.factor].complement,
                hctx.generator_decomposition(&e.acting).unwrap_or_default(),
                &e.acting,
            );
            let tok = format!("X({word},{})", e.support + 1);
            tokens.push(if e.sign < 0 { format!("{tok}^-1") } else { tok });
        }
        for (i, g) in self.g.iter().enumerate() {
            if self.spec.motion_is_identity(i, g).unwrap_or(false) {
                continue;
            }
            let names = self.spec.pieces()[i].motion.generator_names();
            match (&self.spec.pieces()[i].motion, g) {
                (FactorGroup::Finite(t), FactorPayload::Finite(x)) => {
                    tokens.push(format!("G[{}]:{}", i + 1, t.name_of(*x)));
                }
                _ => {
                    let e = FactorElement { factor: 0, payload: g.clone() };
                    if let Ok(decomp) = self.spec.motion_context(i).unwrap().generator_decomposition(&e) {
                        for (k, exp) in decomp {
                            let tok = format!("G[{}]:{}", i + 1, names[k]);
                            tokens.push(if exp == 1 { tok } else { format!("{tok}^{exp}") });
                        }
                    }
                }
            }
        }
        for (a, b) in self.p.transpositions() {
            tokens.push(format!("P({} {})", a + 1, b + 1));
        }
        if tokens.is_empty() {
            "1".into()
        } else {
            tokens.join(" ")
        }
    }
}

/// Renders a factor element as a space-free word (`*` separates powers) for
/// use inside `X(...)` tokens.
fn render_compact(
    factor: &FactorGroup,
    decomp: Vec<(usize, i64)>,
    original: &FactorElement,
) -> String {
    if let (FactorGroup::Finite(t), FactorPayload::Finite(x)) = (factor, &original.payload) {
        return t.name_of(*x).to_string();
    }
    let names = factor.generator_names();
    if decomp.is_empty() {
        return "1".into();
    }
    decomp
        .iter()
        .map(|&(k, e)| if e == 1 { names[k].clone() } else { format!("{}^{}", names[k], e) })
        .collect::<Vec<_>>()
        .join("*")
}

impl fmt::Display for MotionElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display())
    }
}

pub fn multiply(x: &MotionElement, y: &MotionElement) -> Result<MotionElement, MotionError> {
    if !same_spec(x, y) {
        return Err(MotionError::ContextMismatch);
    }
    let spec = &x.spec;
    let fr = x.fr.concat(&y.fr.relabeled(&x.p).twisted(spec, &x.g)?);
    let p_inv = x.p.inverse();
    let g = (0..x.g.len())
        .map(|k| Ok(spec.motion_mul(k, &x.g[k], &y.g[p_inv.apply(k)])?))
        .collect::<Result<Vec<_>, MotionError>>()?;
    Ok(MotionElement { spec: spec.clone(), fr, g, p: x.p.compose(&y.p) })
}

pub fn inverse(x: &MotionElement) -> Result<MotionElement, MotionError> {
    let spec = &x.spec;
    let p = x.p.inverse();
    let g = (0..x.g.len())
        .map(|k| Ok(spec.motion_inv(k, &x.g[x.p.apply(k)])?))
        .collect::<Result<Vec<_>, MotionError>>()?;
    // gamma by the pointwise inverses, then relabel by the inverse
    // permutation; together with the new g and p this inverts exactly.
    let g_pointwise_inv = (0..x.g.len())
        .map(|k| Ok(spec.motion_inv(k, &x.g[k])?))
        .collect::<Result<Vec<_>, MotionError>>()?;
    let fr = x.fr.inverted().twisted(spec, &g_pointwise_inv)?.relabeled(&p);
    Ok(MotionElement { spec: spec.clone(), fr, g, p })
}

/// Exact equality: permutation and motion coordinates agree and the `fr`
/// parts have the same Dahm image.
pub fn equals(x: &MotionElement, y: &MotionElement) -> Result<bool, MotionError> {
    if !same_spec(x, y) {
        return Err(MotionError::ContextMismatch);
    }
    if x.p != y.p || x.g != y.g {
        return Ok(false);
    }
    if x.fr.entries() == y.fr.entries() {
        return Ok(true);
    }
    Ok(x.dahm_fr()? == y.dahm_fr()?)
}

/// The meridian embedding: a word `w` in the complement free product maps to
/// the motion whose Dahm image is conjugation by `w`. Each syllable `s` of a
/// piece `i` contributes its partial conjugations of all other pieces
/// together with the piece's own self-conjugation motion.
pub fn iota(spec: &Arc<LinkSpec>, w: &FreeProductWord) -> Result<MotionElement, MotionError> {
    let n = spec.piece_count();
    let mut acc = MotionElement::identity(spec)?;
    for s in w.syllables() {
        spec.complement_product().check_element(s)?;
        let i = s.factor;
        let mut syllable = MotionElement::identity(spec)?;
        for j in 0..n {
            if j != i {
                syllable.fr.push_reduced(PartialConjugation::new(s.clone(), j, 1));
            }
        }
        syllable.g[i] = spec.self_conjugation_of(i, &s.payload)?;
        acc = multiply(&acc, &syllable)?;
    }
    Ok(acc)
}

/// Equality in the quotient by meridional rotations (motions that become
/// trivial after one-point compactification of the ambient space): `x` and
/// `y` are identified when `x y^-1` lies in the image of [`iota`].
///
/// Needs at least two pieces with nontrivial complement factors (the inner
/// automorphism test is undefined otherwise) and self-conjugation data on
/// every piece a witness word touches.
pub fn equals_in_s3(x: &MotionElement, y: &MotionElement) -> Result<bool, MotionError> {
    if !same_spec(x, y) {
        return Err(MotionError::ContextMismatch);
    }
    if x.p != y.p {
        return Ok(false);
    }
    let z = multiply(x, &inverse(y)?)?;
    match z.dahm()?.is_inner()? {
        None => Ok(false),
        Some(w) => equals(&z, &iota(&x.spec, &w)?),
    }
}

/// What a standard generator is, structurally.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GeneratorKind {
    /// `X(s,j)`: generator `k` of piece `i` conjugating piece `j`.
    Partial { piece: usize, generator: usize, support: usize },
    /// Generator `k` of the motion group of piece `i`.
    Motion { piece: usize, generator: usize },
    /// Transposition of two pieces of one isotopy class.
    Transposition { a: usize, b: usize },
}

#[derive(Debug, Clone)]
pub struct NamedGenerator {
    pub name: String,
    pub kind: GeneratorKind,
    pub element: MotionElement,
}

/// The standard generating set, in a fixed order: partial conjugations
/// (acting piece, then acting generator, then support), piece motion
/// generators, then adjacent transpositions within each class block.
pub fn standard_generators(spec: &Arc<LinkSpec>) -> Result<Vec<NamedGenerator>, MotionError> {
    let n = spec.piece_count();
    let hctx = spec.complement_product();
    let mut out = Vec::new();
    for i in 0..n {
        for (k, s) in hctx.generators_of(i)?.into_iter().enumerate() {
            for j in 0..n {
                if j == i {
                    continue;
                }
                let name = format!(
                    "X({},{})",
                    spec.pieces()[i].complement.generator_names()[k],
                    j + 1
                );
                out.push(NamedGenerator {
                    name,
                    kind: GeneratorKind::Partial { piece: i, generator: k, support: j },
                    element: MotionElement::partial_conjugation(spec, s.clone(), j)?,
                });
            }
        }
    }
    for i in 0..n {
        let names = spec.pieces()[i].motion.generator_names();
        for (k, g) in spec.motion_generators(i)?.into_iter().enumerate() {
            out.push(NamedGenerator {
                name: format!("G[{}]:{}", i + 1, names[k]),
                kind: GeneratorKind::Motion { piece: i, generator: k },
                element: MotionElement::motion_of(spec, i, g)?,
            });
        }
    }
    for t in spec.class_transpositions() {
        let (a, b) = t.transpositions()[0];
        out.push(NamedGenerator {
            name: format!("P({} {})", a + 1, b + 1),
            kind: GeneratorKind::Transposition { a, b },
            element: MotionElement::permutation(spec, t)?,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbeMode {
    /// Exact equality.
    R3,
    /// Equality modulo meridional rotations.
    S3,
}

#[derive(Debug, Clone)]
pub enum ProbeResult {
    Closed { order: usize, elements: Vec<MotionElement> },
    ExceededBound { bound: usize },
}

/// Breadth-first closure of the standard generators under right
/// multiplication. Deterministic: fixed generator order, FIFO discovery.
/// Exact mode deduplicates on the canonical form of the Dahm image together
/// with the motion and permutation coordinates; quotient mode compares
/// against every kept representative with [`equals_in_s3`]. A finite
/// closure is reported with its order; discovery of more than `bound`
/// distinct elements stops the search.
pub fn finiteness_probe(
    spec: &Arc<LinkSpec>,
    mode: ProbeMode,
    bound: usize,
) -> Result<ProbeResult, MotionError> {
    let gens = standard_generators(spec)?;
    let identity = MotionElement::identity(spec)?;
    match mode {
        ProbeMode::R3 => {
            type Key = (Perm, Vec<FactorPayload>, SymmetricFPAut);
            let gen_auts: Vec<SymmetricFPAut> =
                gens.iter().map(|g| g.element.dahm()).collect::<Result<_, _>>()?;
            let mut id_aut = identity.dahm()?;
            id_aut.strip_trace();
            let mut elements = vec![identity.clone()];
            let mut auts = vec![id_aut.clone()];
            let mut index: HashMap<Key, usize> = HashMap::new();
            index.insert((identity.p.clone(), identity.g.clone(), id_aut), 0);
            let mut queue = VecDeque::from([0usize]);
            while let Some(qi) = queue.pop_front() {
                for (gi, gen) in gens.iter().enumerate() {
                    let next = multiply(&elements[qi], &gen.element)?;
                    let mut aut = auts[qi].compose(&gen_auts[gi])?;
                    aut.strip_trace();
                    let key = (next.p.clone(), next.g.clone(), aut.clone());
                    if index.contains_key(&key) {
                        continue;
                    }
                    if elements.len() >= bound {
                        return Ok(ProbeResult::ExceededBound { bound });
                    }
                    index.insert(key, elements.len());
                    queue.push_back(elements.len());
                    elements.push(next);
                    auts.push(aut);
                }
            }
            Ok(ProbeResult::Closed { order: elements.len(), elements })
        }
        ProbeMode::S3 => {
            let mut elements = vec![identity];
            let mut queue = VecDeque::from([0usize]);
            while let Some(qi) = queue.pop_front() {
                'cand: for gen in &gens {
                    let next = multiply(&elements[qi], &gen.element)?;
                    for seen in &elements {
                        if equals_in_s3(&next, seen)? {
                            continue 'cand;
                        }
                    }
                    if elements.len() >= bound {
                        return Ok(ProbeResult::ExceededBound { bound });
                    }
                    queue.push_back(elements.len());
                    elements.push(next);
                }
            }
            Ok(ProbeResult::Closed { order: elements.len(), elements })
        }
    }
}

/// A finite presentation of the motion group on the standard generators.
#[derive(Debug, Clone)]
pub struct Presentation {
    pub generators: Vec<String>,
    /// Words over generator indices with exponents.
    pub relators: Vec<Vec<(usize, i64)>>,
    /// True when the emitted relator families are known to define the group:
    /// every complement factor abelian or finite.
    pub complete: bool,
}

impl Presentation {
    pub fn relator_display(&self, r: &[(usize, i64)]) -> String {
        if r.is_empty() {
            return "1".into();
        }
        r.iter()
            .map(|&(g, e)| {
                if e == 1 {
                    self.generators[g].clone()
                } else {
                    format!("{}^{}", self.generators[g], e)
                }
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

impl fmt::Display for Presentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "generators:")?;
        for g in &self.generators {
            writeln!(f, "{g}")?;
        }
        writeln!(f, "relators:")?;
        for r in &self.relators {
            writeln!(f, "{}", self.relator_display(r))?;
        }
        write!(f, "complete: {}", self.complete)
    }
}

fn reduce_index_word(w: Vec<(usize, i64)>) -> Vec<(usize, i64)> {
    let mut out: Vec<(usize, i64)> = Vec::with_capacity(w.len());
    for (g, e) in w {
        if e == 0 {
            continue;
        }
        match out.last_mut() {
            Some((h, f)) if *h == g => {
                *f += e;
                if *f == 0 {
                    out.pop();
                }
            }
            _ => out.push((g, e)),
        }
    }
    out
}

fn invert_index_word(w: &[(usize, i64)]) -> Vec<(usize, i64)> {
    w.iter().rev().map(|&(g, e)| (g, -e)).collect()
}

/// Emits generators and relator families for the motion group and verifies
/// every relator multiplies out to the identity before returning.
///
/// Families: composition and commutation of partial conjugations (the three
/// classical relation families, with non-generator acting elements expanded
/// over generators in reversed order, matching composition order), defining
/// relators of each piece motion group, commutation of distinct piece
/// motion groups, symmetric-group relators per class block with cross-block
/// commutators, and the actions of piece motions and permutations on the
/// other coordinates.
pub fn present(spec: &Arc<LinkSpec>) -> Result<Presentation, MotionError> {
    let n = spec.piece_count();
    let hctx = spec.complement_product().clone();
    let gens = standard_generators(spec)?;
    let mut fr_idx: HashMap<(usize, usize, usize), usize> = HashMap::new();
    let mut g_idx: HashMap<(usize, usize), usize> = HashMap::new();
    let mut p_idx: HashMap<(usize, usize), usize> = HashMap::new();
    for (t, gen) in gens.iter().enumerate() {
        match gen.kind {
            GeneratorKind::Partial { piece, generator, support } => {
                fr_idx.insert((piece, generator, support), t);
            }
            GeneratorKind::Motion { piece, generator } => {
                g_idx.insert((piece, generator), t);
            }
            GeneratorKind::Transposition { a, b } => {
                p_idx.insert((a, b), t);
            }
        }
    }

    // chi(h, j) for arbitrary h expands over generator partial conjugations
    // in reversed decomposition order, so that left-to-right composition of
    // the images multiplies the acting elements back in the original order.
    let expand_chi = |h: &FactorElement, j: usize| -> Result<Vec<(usize, i64)>, MotionError> {
        let decomp = hctx.generator_decomposition(h)?;
        Ok(decomp.into_iter().rev().map(|(k, e)| (fr_idx[&(h.factor, k, j)], e)).collect())
    };
    let expand_motion = |i: usize, x: &FactorPayload| -> Result<Vec<(usize, i64)>, MotionError> {
        let e = FactorElement { factor: 0, payload: x.clone() };
        let decomp = spec.motion_context(i)?.generator_decomposition(&e)?;
        Ok(decomp.into_iter().map(|(k, e)| (g_idx[&(i, k)], e)).collect())
    };

    let mut relators: Vec<Vec<(usize, i64)>> = Vec::new();
    let mut push = |w: Vec<(usize, i64)>| {
        let w = reduce_index_word(w);
        if !w.is_empty() {
            relators.push(w);
        }
    };

    // Acting elements instantiating the partial conjugation relations: all
    // nontrivial elements of a finite factor, the distinguished generators
    // otherwise.
    let samples: Vec<Vec<FactorElement>> = (0..n)
        .map(|i| match &spec.pieces()[i].complement {
            FactorGroup::Finite(t) => (0..t.order())
                .filter(|&x| x != t.identity())
                .map(|x| FactorElement::finite(i, x))
                .collect(),
            _ => hctx.generators_of(i).unwrap_or_default(),
        })
        .collect();

    // Same support: chi(g,j) chi(g',j) = chi(g'g, j).
    for j in 0..n {
        for (i, sample) in samples.iter().enumerate() {
            if i == j {
                continue;
            }
            for g in sample {
                for g2 in sample {
                    let prod = hctx.element_mul(g2, g)?;
                    let mut w = expand_chi(g, j)?;
                    w.extend(expand_chi(g2, j)?);
                    if !hctx.element_is_identity(&prod) {
                        w.extend(expand_chi(&hctx.element_inv(&prod)?, j)?);
                    }
                    push(w);
                }
            }
        }
    }
    // Disjoint pairs commute: supports differ and neither acting piece is a
    // support.
    for i in 0..n {
        for i2 in 0..n {
            for j in 0..n {
                for j2 in 0..n {
                    let valid = j != j2 && i != j && i != j2 && i2 != j && i2 != j2;
                    let ordered = (i, j) < (i2, j2);
                    if !valid || !ordered {
                        continue;
                    }
                    for (k, _) in samples[i].iter().enumerate() {
                        for (k2, _) in samples[i2].iter().enumerate() {
                            let (a, b) = (fr_idx[&(i, k, j)], fr_idx[&(i2, k2, j2)]);
                            push(vec![(a, 1), (b, 1), (a, -1), (b, -1)]);
                        }
                    }
                }
            }
        }
    }
    // For distinct i, j, k: chi(s,j) chi(s,k) commutes with chi(s',j) when
    // s is of piece i and s' of piece k.
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                if i == j || j == k || i == k {
                    continue;
                }
                for (ks, _) in samples[i].iter().enumerate() {
                    for (ks2, _) in samples[k].iter().enumerate() {
                        let a = fr_idx[&(i, ks, j)];
                        let b = fr_idx[&(i, ks, k)];
                        let c = fr_idx[&(k, ks2, j)];
                        push(vec![(a, 1), (b, 1), (c, 1), (b, -1), (a, -1), (c, -1)]);
                    }
                }
            }
        }
    }
    // Only generator-expressible acting elements are instantiated above, so
    // the families define the kernel only when every factor is abelian or
    // finite.
    let complete = spec
        .pieces()
        .iter()
        .all(|p| p.complement.is_abelian() || matches!(p.complement, FactorGroup::Finite(_)));

    // Defining relators of each piece motion group.
    for i in 0..n {
        match &spec.pieces()[i].motion {
            FactorGroup::Finite(t) => {
                for x in 0..t.order() {
                    for y in 0..t.order() {
                        if x == t.identity() || y == t.identity() {
                            continue;
                        }
                        let mut w = expand_motion(i, &FactorPayload::Finite(x))?;
                        w.extend(expand_motion(i, &FactorPayload::Finite(y))?);
                        let xy = expand_motion(i, &FactorPayload::Finite(t.mul(x, y)))?;
                        w.extend(invert_index_word(&xy));
                        push(w);
                    }
                }
            }
            other => {
                for k in 0..other.rank() {
                    for l in k + 1..other.rank() {
                        let (a, b) = (g_idx[&(i, k)], g_idx[&(i, l)]);
                        push(vec![(a, 1), (b, 1), (a, -1), (b, -1)]);
                    }
                }
            }
        }
    }
    // Motions of distinct pieces commute.
    for i in 0..n {
        for l in i + 1..n {
            for k in 0..spec.pieces()[i].motion.rank() {
                for k2 in 0..spec.pieces()[l].motion.rank() {
                    let (a, b) = (g_idx[&(i, k)], g_idx[&(l, k2)]);
                    push(vec![(a, 1), (b, 1), (a, -1), (b, -1)]);
                }
            }
        }
    }
    // Symmetric group relators per class block, plus cross-block
    // commutation.
    let blocks = spec.class_blocks();
    let block_sigmas: Vec<Vec<usize>> = blocks
        .iter()
        .map(|b| b.windows(2).map(|w| p_idx[&(w[0], w[1])]).collect())
        .collect();
    for sigmas in &block_sigmas {
        for (t, &s) in sigmas.iter().enumerate() {
            push(vec![(s, 2)]);
            if t + 1 < sigmas.len() {
                let s2 = sigmas[t + 1];
                push(vec![(s, 1), (s2, 1), (s, 1), (s2, 1), (s, 1), (s2, 1)]);
            }
            for &s2 in sigmas.get(t + 2..).unwrap_or_default() {
                push(vec![(s, 1), (s2, 1), (s, 1), (s2, 1)]);
            }
        }
    }
    for b in 0..block_sigmas.len() {
        for b2 in b + 1..block_sigmas.len() {
            for &s in &block_sigmas[b] {
                for &s2 in &block_sigmas[b2] {
                    push(vec![(s, 1), (s2, 1), (s, -1), (s2, -1)]);
                }
            }
        }
    }
    // Action of piece motions on partial conjugations: conjugating
    // chi(s,j) by a motion y of the acting piece maps the acting element
    // through the Dahm action; motions of any other piece commute with it.
    for i in 0..n {
        for (ky, _) in spec.motion_generators(i)?.iter().enumerate() {
            let y = g_idx[&(i, ky)];
            for a in 0..n {
                for (k, s) in hctx.generators_of(a)?.iter().enumerate() {
                    for j in 0..n {
                        if j == a {
                            continue;
                        }
                        let x = fr_idx[&(a, k, j)];
                        if a == i {
                            let moved = spec.pieces()[i].dahm_action[ky]
                                .apply_payload(&s.payload)?;
                            let image = FactorElement { factor: a, payload: moved };
                            let mut w = vec![(y, 1), (x, 1), (y, -1)];
                            w.extend(invert_index_word(&expand_chi(&image, j)?));
                            push(w);
                        } else {
                            push(vec![(y, 1), (x, 1), (y, -1), (x, -1)]);
                        }
                    }
                }
            }
        }
    }
    // Action of transpositions: relabel partial conjugations and permute
    // motion coordinates.
    for (&(pa, pb), &sidx) in &p_idx {
        let perm = Perm::transposition(n, pa, pb).expect("distinct");
        for a in 0..n {
            for k in 0..spec.pieces()[a].complement.rank() {
                for j in 0..n {
                    if j == a {
                        continue;
                    }
                    let x = fr_idx[&(a, k, j)];
                    let x2 = fr_idx[&(perm.apply(a), k, perm.apply(j))];
                    push(vec![(sidx, 1), (x, 1), (sidx, -1), (x2, -1)]);
                }
            }
        }
        for i in 0..n {
            for k in 0..spec.pieces()[i].motion.rank() {
                let y = g_idx[&(i, k)];
                let y2 = g_idx[&(perm.apply(i), k)];
                push(vec![(sidx, 1), (y, 1), (sidx, -1), (y2, -1)]);
            }
        }
    }

    // Soundness gate: every relator must evaluate to the identity.
    let presentation = Presentation {
        generators: gens.iter().map(|g| g.name.clone()).collect(),
        relators,
        complete,
    };
    let identity = MotionElement::identity(spec)?;
    for r in &presentation.relators {
        let mut acc = identity.clone();
        for &(g, e) in r {
            acc = multiply(&acc, &gens[g].element.pow(e)?)?;
        }
        if !equals(&acc, &identity)? {
            return Err(MotionError::UnsoundRelator(presentation.relator_display(r)));
        }
    }
    Ok(presentation)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{htrivial, unlink};

    fn u2() -> Arc<LinkSpec> {
        Arc::new(unlink(2).unwrap())
    }

    fn x_gen(spec: &Arc<LinkSpec>, name: &str, support: usize) -> MotionElement {
        let (i, k) = spec.complement_product().find_generator(name).unwrap();
        let s = spec.complement_product().generator(i, k).unwrap();
        MotionElement::partial_conjugation(spec, s, support).unwrap()
    }

    #[test]
    fn identity_laws() {
        let spec = u2();
        let one = MotionElement::identity(&spec).unwrap();
        let x = x_gen(&spec, "a1", 1);
        assert!(equals(&multiply(&x, &one).unwrap(), &x).unwrap());
        assert!(equals(&multiply(&one, &x).unwrap(), &x).unwrap());
        assert!(one.is_structurally_identity());
    }

    #[test]
    fn inverse_round_trips_through_all_coordinates() {
        let spec = u2();
        let one = MotionElement::identity(&spec).unwrap();
        let x = x_gen(&spec, "a1", 1);
        let t = MotionElement::motion_of(&spec, 0, FactorPayload::Finite(1)).unwrap();
        let s = MotionElement::permutation(&spec, Perm::transposition(2, 0, 1).unwrap()).unwrap();
        let w = multiply(&multiply(&x, &t).unwrap(), &s).unwrap();
        let winv = inverse(&w).unwrap();
        assert!(equals(&multiply(&w, &winv).unwrap(), &one).unwrap());
        assert!(equals(&multiply(&winv, &w).unwrap(), &one).unwrap());
    }

    #[test]
    fn dahm_matches_direct_partial_conjugation() {
        let spec = u2();
        let x = x_gen(&spec, "a1", 1);
        let ctx = spec.complement_product().clone();
        let a1 = ctx.generator(0, 0).unwrap();
        let direct = SymmetricFPAut::partial_conjugation(
            ctx,
            PartialConjugation::new(a1, 1, 1),
        )
        .unwrap();
        assert_eq!(x.dahm().unwrap(), direct);
    }

    #[test]
    fn flip_conjugates_partial_conjugation_to_inverted_acting() {
        // t chi(a,j) t^-1 = chi(a^-1,j) when t is the flip of the acting
        // piece.
        let spec = u2();
        let x = x_gen(&spec, "a1", 1);
        let t = MotionElement::motion_of(&spec, 0, FactorPayload::Finite(1)).unwrap();
        let lhs = multiply(&multiply(&t, &x).unwrap(), &inverse(&t).unwrap()).unwrap();
        let a1_inv = FactorElement::free(0, vec![(0, -1)]);
        let rhs = MotionElement::partial_conjugation(&spec, a1_inv, 1).unwrap();
        assert!(equals(&lhs, &rhs).unwrap());
    }

    #[test]
    fn transposition_relabels_partial_conjugation() {
        // (1 2) chi(a1, L2) (1 2)^-1 = chi(a2, L1).
        let spec = u2();
        let x = x_gen(&spec, "a1", 1);
        let s = MotionElement::permutation(&spec, Perm::transposition(2, 0, 1).unwrap()).unwrap();
        let lhs = multiply(&multiply(&s, &x).unwrap(), &inverse(&s).unwrap()).unwrap();
        let rhs = x_gen(&spec, "a2", 0);
        assert!(equals(&lhs, &rhs).unwrap());
    }

    #[test]
    fn iota_realizes_conjugation() {
        let spec = u2();
        let ctx = spec.complement_product().clone();
        let w = ctx
            .normalize(&[
                FactorElement::free(0, vec![(0, 1)]),
                FactorElement::free(1, vec![(0, -1)]),
            ])
            .unwrap();
        let m = iota(&spec, &w).unwrap();
        assert_eq!(m.dahm().unwrap(), SymmetricFPAut::inner(ctx, &w).unwrap());
    }

    #[test]
    fn iota_is_multiplicative() {
        let spec = Arc::new(htrivial(1, 1).unwrap());
        let ctx = spec.complement_product().clone();
        let u = ctx
            .normalize(&[
                FactorElement::free(0, vec![(0, 1)]),
                FactorElement::abelian(1, vec![1, -1]),
            ])
            .unwrap();
        let v = ctx
            .normalize(&[
                FactorElement::abelian(1, vec![0, 2]),
                FactorElement::free(0, vec![(0, -1)]),
            ])
            .unwrap();
        let lhs = multiply(&iota(&spec, &u).unwrap(), &iota(&spec, &v).unwrap()).unwrap();
        let rhs = iota(&spec, &ctx.multiply(&u, &v).unwrap()).unwrap();
        assert!(equals(&lhs, &rhs).unwrap());
    }

    #[test]
    fn meridian_image_vanishes_in_the_compactified_group() {
        let spec = u2();
        let one = MotionElement::identity(&spec).unwrap();
        let x = x_gen(&spec, "a1", 1);
        // chi(a1, L2) has Dahm image conjugation by a1, so it is a
        // meridional rotation.
        assert!(equals_in_s3(&x, &one).unwrap());
        assert!(!equals(&x, &one).unwrap());
        // The flip of a piece survives compactification.
        let t = MotionElement::motion_of(&spec, 0, FactorPayload::Finite(1)).unwrap();
        assert!(!equals_in_s3(&t, &one).unwrap());
    }

    #[test]
    fn probe_single_unknot_closes_at_two() {
        let spec = Arc::new(unlink(1).unwrap());
        match finiteness_probe(&spec, ProbeMode::R3, 100).unwrap() {
            ProbeResult::Closed { order, .. } => assert_eq!(order, 2),
            other => panic!("expected closure, got {other:?}"),
        }
    }

    #[test]
    fn probe_single_hopf_closes_at_eight() {
        let spec = Arc::new(htrivial(0, 1).unwrap());
        match finiteness_probe(&spec, ProbeMode::R3, 100).unwrap() {
            ProbeResult::Closed { order, .. } => assert_eq!(order, 8),
            other => panic!("expected closure, got {other:?}"),
        }
    }

    #[test]
    fn probe_two_unknots_compactified_closes_at_eight() {
        let spec = u2();
        match finiteness_probe(&spec, ProbeMode::S3, 100).unwrap() {
            ProbeResult::Closed { order, .. } => assert_eq!(order, 8),
            other => panic!("expected closure, got {other:?}"),
        }
    }

    #[test]
    fn probe_two_unknots_exact_is_infinite() {
        let spec = u2();
        match finiteness_probe(&spec, ProbeMode::R3, 200).unwrap() {
            ProbeResult::ExceededBound { bound } => assert_eq!(bound, 200),
            other => panic!("expected exceeded bound, got {other:?}"),
        }
    }

    #[test]
    fn present_single_unknot_is_order_two() {
        let spec = Arc::new(unlink(1).unwrap());
        let p = present(&spec).unwrap();
        assert_eq!(p.generators, vec!["G[1]:t".to_string()]);
        assert_eq!(p.relators, vec![vec![(0, 2)]]);
        assert!(p.complete);
    }

    #[test]
    fn present_counts_standard_generators() {
        // n unknots and m Hopf pieces: (n+2m)(n+m-1) partial conjugations,
        // n+2m piece motion generators, and adjacent transpositions within
        // the two class blocks.
        let spec = Arc::new(htrivial(2, 1).unwrap());
        let p = present(&spec).unwrap();
        let fr = p.generators.iter().filter(|g| g.starts_with("X(")).count();
        let gm = p.generators.iter().filter(|g| g.starts_with("G[")).count();
        let pp = p.generators.iter().filter(|g| g.starts_with("P(")).count();
        assert_eq!(fr, (2 + 2) * 2);
        assert_eq!(gm, 2 + 2);
        assert_eq!(pp, 1);
        assert!(p.complete);
    }

    #[test]
    fn present_unlink3_is_sound() {
        let spec = Arc::new(unlink(3).unwrap());
        let p = present(&spec).unwrap();
        assert_eq!(p.generators.len(), 6 + 3 + 2);
        assert!(p.complete);
    }

    #[test]
    fn display_round_trips_structurally() {
        let spec = u2();
        let x = x_gen(&spec, "a1", 1);
        let t = MotionElement::motion_of(&spec, 0, FactorPayload::Finite(1)).unwrap();
        let s = MotionElement::permutation(&spec, Perm::transposition(2, 0, 1).unwrap()).unwrap();
        let w = multiply(&multiply(&x, &t).unwrap(), &s).unwrap();
        assert_eq!(w.display(), "X(a1,2) G[1]:t P(1 2)");
        assert_eq!(MotionElement::identity(&spec).unwrap().display(), "1");
        let xinv = inverse(&x).unwrap();
        assert_eq!(xinv.display(), "X(a1,2)^-1");
    }
}
