//! Link-piece catalog: builtin pieces, whole-link specifications, their
//! validation, and the JSON document format the CLI consumes.
//!
//! A link specification is an ordered list of pieces. Piece `i` carries the
//! group data the motion-group construction needs:
//!
//! * `complement`: the factor `H_i` contributed to the free product `H_L`,
//! * `motion`: the piece motion group `G_i` (finite or free abelian),
//! * `dahm_action`: the Dahm homomorphism `G_i -> Aut(H_i)`, recorded on the
//!   distinguished generators of `G_i`,
//! * `self_conjugation`: optionally a homomorphism `H_i -> G_i` choosing, for
//!   each generator of `H_i`, a motion of the piece that acts on `H_i` as
//!   conjugation by that generator.
//!
//! Pieces sharing an isotopy class must carry identical data up to generator
//! names (names are per-piece so they can stay globally unique), so
//! relabeling pieces along a permutation never needs a translation step:
//! payloads transfer verbatim.
//!
//! Construction ([`LinkSpec::new`]) refuses data that is malformed at the
//! level of a single automorphism or payload; [`LinkSpec::validate`] reports
//! on the laws relating them (homomorphism properties, compatibility of the
//! self-conjugation with the action, class consistency).

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fpauto::{FactorAut, FpautoError};
use crate::freeprod::{
    free_word_mul, FactorElement, FactorGroup, FactorPayload, FiniteTable, FreeProdError,
    FreeProduct, TableError,
};
use crate::perm::Perm;

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("unknown builtin piece `{0}`")]
    UnknownPiece(String),
    #[error("a link needs at least one piece")]
    EmptyLink,
    #[error("piece {piece} carries no self-conjugation data")]
    MissingSelfConjugation { piece: usize },
    #[error("invalid link specification: {0}")]
    InvalidSpec(String),
    #[error("malformed link document: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Word(#[from] FreeProdError),
    #[error(transparent)]
    Aut(#[from] FpautoError),
    #[error(transparent)]
    Table(#[from] TableError),
}

/// Group data for one piece of a link.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PieceSpec {
    pub id: String,
    /// Pieces with equal class labels may be permuted by motions of the link.
    pub isotopy_class: String,
    /// Number of circle components; carried as metadata only.
    pub components: usize,
    /// The factor `H_i` of the complement free product.
    pub complement: FactorGroup,
    /// The piece motion group `G_i`; finite or free abelian.
    pub motion: FactorGroup,
    /// One automorphism of `complement` per distinguished generator of
    /// `motion`, in generator order.
    pub dahm_action: Vec<FactorAut>,
    /// One motion payload per generator of `complement`, in generator order.
    pub self_conjugation: Option<Vec<FactorPayload>>,
}

/// Builtin piece data.
///
/// `"unknot"`: `H = Z` on one meridional generator `a`; motion group of
/// order two whose nontrivial element `t` (the flip) inverts `a`.
///
/// `"hopf"`: `H = Z^2` on meridional generators `x`, `y`; motion group the
/// quaternion group of order eight, with `i` exchanging the two meridians,
/// `j` inverting both, and `m1` (the central involution) acting trivially.
///
/// Builtins leave `self_conjugation` unset; [`unlink`] and [`htrivial`]
/// attach the trivial choice, which is the unique valid one for the unknot
/// and one of the two valid central choices for the Hopf piece.
pub fn builtin_piece(name: &str) -> Result<PieceSpec, CatalogError> {
    match name {
        "unknot" => Ok(PieceSpec {
            id: "unknot".into(),
            isotopy_class: "unknot".into(),
            components: 1,
            complement: FactorGroup::free(&["a"]),
            motion: FactorGroup::Finite(FiniteTable::new(
                vec!["e".into(), "t".into()],
                vec![vec![0, 1], vec![1, 0]],
                0,
                vec![1],
            )?),
            dahm_action: vec![FactorAut::free_images(vec![vec![(0, -1)]])?],
            self_conjugation: None,
        }),
        "hopf" => Ok(PieceSpec {
            id: "hopf".into(),
            isotopy_class: "hopf".into(),
            components: 2,
            complement: FactorGroup::free_abelian(&["x", "y"]),
            motion: FactorGroup::Finite(quaternion_table()?),
            dahm_action: vec![
                FactorAut::Matrix(vec![vec![0, 1], vec![1, 0]]),
                FactorAut::Matrix(vec![vec![-1, 0], vec![0, -1]]),
            ],
            self_conjugation: None,
        }),
        other => Err(CatalogError::UnknownPiece(other.to_string())),
    }
}

pub fn builtin_names() -> &'static [&'static str] {
    &["unknot", "hopf"]
}

/// Quaternion group of order eight. Element index is `2*basis + sign` with
/// basis order `1, i, j, k` and sign bit 1 for the negative of the basis
/// element; generators are `i` and `j`.
fn quaternion_table() -> Result<FiniteTable, TableError> {
    const BASIS_MUL: [[(usize, bool); 4]; 4] = [
        [(0, false), (1, false), (2, false), (3, false)],
        [(1, false), (0, true), (3, false), (2, true)],
        [(2, false), (3, true), (0, true), (1, false)],
        [(3, false), (2, false), (1, true), (0, true)],
    ];
    let names = ["e", "m1", "i", "mi", "j", "mj", "k", "mk"];
    let mut table = vec![vec![0usize; 8]; 8];
    for (a, row) in table.iter_mut().enumerate() {
        for (b, cell) in row.iter_mut().enumerate() {
            let (bc, flip) = BASIS_MUL[a / 2][b / 2];
            let neg = (a % 2 == 1) ^ (b % 2 == 1) ^ flip;
            *cell = 2 * bc + usize::from(neg);
        }
    }
    FiniteTable::new(names.iter().map(|s| s.to_string()).collect(), table, 0, vec![2, 4])
}

/// An ordered list of pieces together with cached contexts for the
/// complement free product and per-piece motion arithmetic.
#[derive(Debug, Clone)]
pub struct LinkSpec {
    pieces: Vec<PieceSpec>,
    complement: Arc<FreeProduct>,
    motion_ctxs: Vec<FreeProduct>,
    /// For a finite motion group, the action of every element, indexed by
    /// element; extends `dahm_action` along breadth-first generator words.
    action_cache: Vec<Option<Vec<FactorAut>>>,
}

impl PartialEq for LinkSpec {
    fn eq(&self, other: &Self) -> bool {
        self.pieces == other.pieces
    }
}

impl Eq for LinkSpec {}

impl LinkSpec {
    pub fn new(pieces: Vec<PieceSpec>) -> Result<LinkSpec, CatalogError> {
        if pieces.is_empty() {
            return Err(CatalogError::EmptyLink);
        }
        let mut seen_names = HashSet::new();
        for p in &pieces {
            for name in p.complement.generator_names() {
                if name.is_empty() {
                    return Err(CatalogError::InvalidSpec(format!(
                        "piece {}: empty generator name",
                        p.id
                    )));
                }
                if !seen_names.insert(name.clone()) {
                    return Err(CatalogError::InvalidSpec(format!(
                        "generator name `{name}` appears in more than one piece"
                    )));
                }
            }
            if p.dahm_action.len() != p.motion.rank() {
                return Err(CatalogError::InvalidSpec(format!(
                    "piece {}: {} actions for {} motion generators",
                    p.id,
                    p.dahm_action.len(),
                    p.motion.rank()
                )));
            }
            for (k, aut) in p.dahm_action.iter().enumerate() {
                aut.validate(&p.complement, &p.complement).map_err(|e| {
                    CatalogError::InvalidSpec(format!(
                        "piece {}: action of motion generator {} is not an automorphism: {e}",
                        p.id,
                        p.motion.generator_names()[k]
                    ))
                })?;
            }
            if let Some(iota) = &p.self_conjugation {
                if iota.len() != p.complement.rank() {
                    return Err(CatalogError::InvalidSpec(format!(
                        "piece {}: {} self-conjugation values for {} generators",
                        p.id,
                        iota.len(),
                        p.complement.rank()
                    )));
                }
                let mctx = FreeProduct::new(vec![p.motion.clone()]);
                for (k, payload) in iota.iter().enumerate() {
                    let e = FactorElement { factor: 0, payload: payload.clone() };
                    mctx.check_element(&e).map_err(|err| {
                        CatalogError::InvalidSpec(format!(
                            "piece {}: self-conjugation value for {} is not a motion element: {err}",
                            p.id,
                            p.complement.generator_names()[k]
                        ))
                    })?;
                }
            }
        }
        let complement =
            Arc::new(FreeProduct::new(pieces.iter().map(|p| p.complement.clone()).collect()));
        let motion_ctxs: Vec<FreeProduct> =
            pieces.iter().map(|p| FreeProduct::new(vec![p.motion.clone()])).collect();
        let mut action_cache = Vec::with_capacity(pieces.len());
        for p in &pieces {
            action_cache.push(match &p.motion {
                FactorGroup::Finite(t) => {
                    let mut auts = Vec::with_capacity(t.order());
                    for word in t.element_words() {
                        let mut acc = FactorAut::identity_for(&p.complement);
                        for g in word {
                            let k = t.generators().iter().position(|&h| h == g).unwrap();
                            acc = FactorAut::compose(&acc, &p.dahm_action[k])?;
                        }
                        auts.push(acc);
                    }
                    Some(auts)
                }
                _ => None,
            });
        }
        Ok(LinkSpec { pieces, complement, motion_ctxs, action_cache })
    }

    pub fn piece_count(&self) -> usize {
        self.pieces.len()
    }

    pub fn pieces(&self) -> &[PieceSpec] {
        &self.pieces
    }

    pub fn piece(&self, i: usize) -> Result<&PieceSpec, CatalogError> {
        self.pieces.get(i).ok_or(CatalogError::Word(FreeProdError::IndexOutOfRange {
            factor: i,
            bound: self.pieces.len(),
        }))
    }

    /// The complement free product `H_L`, shared so automorphism contexts
    /// compare by pointer.
    pub fn complement_product(&self) -> &Arc<FreeProduct> {
        &self.complement
    }

    /// Single-factor context for arithmetic in the motion group `G_i`.
    pub fn motion_context(&self, i: usize) -> Result<&FreeProduct, CatalogError> {
        self.piece(i)?;
        Ok(&self.motion_ctxs[i])
    }

    pub fn motion_identity(&self, i: usize) -> Result<FactorPayload, CatalogError> {
        Ok(self.motion_context(i)?.identity_element(0)?.payload)
    }

    pub fn motion_generators(&self, i: usize) -> Result<Vec<FactorPayload>, CatalogError> {
        let gens = self.motion_context(i)?.generators_of(0)?;
        Ok(gens.into_iter().map(|e| e.payload).collect())
    }

    pub fn check_motion(&self, i: usize, g: &FactorPayload) -> Result<(), CatalogError> {
        let e = FactorElement { factor: 0, payload: g.clone() };
        self.motion_context(i)?.check_element(&e)?;
        Ok(())
    }

    pub fn motion_is_identity(&self, i: usize, g: &FactorPayload) -> Result<bool, CatalogError> {
        self.check_motion(i, g)?;
        let e = FactorElement { factor: 0, payload: g.clone() };
        Ok(self.motion_ctxs[i].element_is_identity(&e))
    }

    pub fn motion_mul(
        &self,
        i: usize,
        a: &FactorPayload,
        b: &FactorPayload,
    ) -> Result<FactorPayload, CatalogError> {
        let ctx = self.motion_context(i)?;
        let a = FactorElement { factor: 0, payload: a.clone() };
        let b = FactorElement { factor: 0, payload: b.clone() };
        Ok(ctx.element_mul(&a, &b)?.payload)
    }

    pub fn motion_inv(&self, i: usize, a: &FactorPayload) -> Result<FactorPayload, CatalogError> {
        let ctx = self.motion_context(i)?;
        let a = FactorElement { factor: 0, payload: a.clone() };
        Ok(ctx.element_inv(&a)?.payload)
    }

    pub fn motion_pow(
        &self,
        i: usize,
        a: &FactorPayload,
        e: i64,
    ) -> Result<FactorPayload, CatalogError> {
        let ctx = self.motion_context(i)?;
        let a = FactorElement { factor: 0, payload: a.clone() };
        Ok(ctx.element_pow(&a, e)?.payload)
    }

    pub fn display_motion(&self, i: usize, g: &FactorPayload) -> String {
        match self.motion_ctxs.get(i) {
            Some(ctx) => ctx.display_element(&FactorElement { factor: 0, payload: g.clone() }),
            None => "<out of range>".into(),
        }
    }

    /// Resolves a motion element by name: for a finite motion group any
    /// element name, for a free abelian one a generator name.
    pub fn motion_payload_by_name(&self, i: usize, name: &str) -> Option<FactorPayload> {
        match &self.pieces.get(i)?.motion {
            FactorGroup::Finite(t) => t.index_of(name).map(FactorPayload::Finite),
            FactorGroup::FreeAbelian { names } | FactorGroup::Free { names } => {
                let k = names.iter().position(|n| n == name)?;
                match &self.pieces[i].motion {
                    FactorGroup::FreeAbelian { .. } => {
                        let mut exps = vec![0i64; names.len()];
                        exps[k] = 1;
                        Some(FactorPayload::Abelian(exps))
                    }
                    _ => Some(FactorPayload::Free(vec![(k, 1)])),
                }
            }
        }
    }

    /// The action of an arbitrary motion element `g` of piece `i` on `H_i`,
    /// extending `dahm_action` along a generator decomposition of `g`.
    pub fn motion_action(&self, i: usize, g: &FactorPayload) -> Result<FactorAut, CatalogError> {
        let piece = self.piece(i)?;
        self.check_motion(i, g)?;
        if let (Some(cache), FactorPayload::Finite(x)) = (&self.action_cache[i], g) {
            return Ok(cache[*x].clone());
        }
        let e = FactorElement { factor: 0, payload: g.clone() };
        let decomp = self.motion_ctxs[i].generator_decomposition(&e)?;
        let mut acc = FactorAut::identity_for(&piece.complement);
        for (k, exp) in decomp {
            acc = FactorAut::compose(&acc, &piece.dahm_action[k].pow(exp)?)?;
        }
        Ok(acc)
    }

    pub fn has_self_conjugation(&self, i: usize) -> bool {
        self.pieces.get(i).is_some_and(|p| p.self_conjugation.is_some())
    }

    /// The self-conjugation homomorphism extended over an arbitrary element
    /// of `H_i`: decomposes `h` into generators and multiplies the chosen
    /// motions out in `G_i`.
    pub fn self_conjugation_of(
        &self,
        i: usize,
        h: &FactorPayload,
    ) -> Result<FactorPayload, CatalogError> {
        let piece = self.piece(i)?;
        let iota = piece
            .self_conjugation
            .as_ref()
            .ok_or(CatalogError::MissingSelfConjugation { piece: i })?;
        let e = FactorElement { factor: i, payload: h.clone() };
        let decomp = self.complement.generator_decomposition(&e)?;
        let mctx = &self.motion_ctxs[i];
        let mut acc = mctx.identity_element(0)?;
        for (k, exp) in decomp {
            let gen = FactorElement { factor: 0, payload: iota[k].clone() };
            acc = mctx.element_mul(&acc, &mctx.element_pow(&gen, exp)?)?;
        }
        Ok(acc.payload)
    }

    /// Piece indices grouped by isotopy class, in order of first appearance.
    pub fn class_blocks(&self) -> Vec<Vec<usize>> {
        let mut blocks: Vec<(&str, Vec<usize>)> = Vec::new();
        for (i, p) in self.pieces.iter().enumerate() {
            match blocks.iter_mut().find(|(c, _)| *c == p.isotopy_class) {
                Some((_, v)) => v.push(i),
                None => blocks.push((&p.isotopy_class, vec![i])),
            }
        }
        blocks.into_iter().map(|(_, v)| v).collect()
    }

    /// Whether `p` only permutes pieces within isotopy classes.
    pub fn is_class_preserving(&self, p: &Perm) -> bool {
        p.len() == self.pieces.len()
            && (0..self.pieces.len())
                .all(|i| self.pieces[p.apply(i)].isotopy_class == self.pieces[i].isotopy_class)
    }

    /// Adjacent transpositions within each class block; these generate the
    /// group of class-preserving permutations.
    pub fn class_transpositions(&self) -> Vec<Perm> {
        let n = self.pieces.len();
        let mut out = Vec::new();
        for block in self.class_blocks() {
            for w in block.windows(2) {
                out.push(Perm::transposition(n, w[0], w[1]).expect("distinct indices"));
            }
        }
        out
    }

    /// Checks the laws relating the piece data and lists every violation.
    ///
    /// Covered: the motion-kind restriction, extension of `dahm_action` to a
    /// homomorphism `G_i -> Aut(H_i)` (exhaustive for finite `G_i`, pairwise
    /// commutation for free abelian), well-definedness of the
    /// self-conjugation map, its compatibility with the action (the motion
    /// chosen for a generator `s` must act on `H_i` as conjugation by `s`),
    /// its equivariance `iota(g(s)) = g iota(s) g^-1`, and identity of data
    /// across pieces of one isotopy class.
    pub fn validate(&self) -> ValidationReport {
        let mut problems = Vec::new();
        for i in 0..self.pieces.len() {
            self.check_motion_kind(i, &mut problems);
            self.check_action_homomorphism(i, &mut problems);
            self.check_self_conjugation(i, &mut problems);
        }
        self.check_class_consistency(&mut problems);
        let mut ids = HashSet::new();
        for p in &self.pieces {
            if !ids.insert(&p.id) {
                problems.push(format!("duplicate piece id `{}`", p.id));
            }
        }
        ValidationReport { problems }
    }

    fn check_motion_kind(&self, i: usize, problems: &mut Vec<String>) {
        let p = &self.pieces[i];
        if matches!(p.motion, FactorGroup::Free { .. }) && p.motion.rank() > 1 {
            problems.push(format!(
                "piece {}: motion group must be finite or free abelian",
                p.id
            ));
        }
    }

    fn check_action_homomorphism(&self, i: usize, problems: &mut Vec<String>) {
        let p = &self.pieces[i];
        match (&p.motion, &self.action_cache[i]) {
            (FactorGroup::Finite(t), Some(auts)) => {
                for x in 0..t.order() {
                    for y in 0..t.order() {
                        let composed = match FactorAut::compose(&auts[x], &auts[y]) {
                            Ok(a) => a,
                            Err(e) => {
                                problems.push(format!("piece {}: {e}", p.id));
                                return;
                            }
                        };
                        if composed != auts[t.mul(x, y)] {
                            problems.push(format!(
                                "piece {}: action table violates the homomorphism law at {} * {}",
                                p.id,
                                t.name_of(x),
                                t.name_of(y)
                            ));
                        }
                    }
                }
            }
            _ => {
                let names = p.motion.generator_names();
                for k in 0..p.dahm_action.len() {
                    for l in k + 1..p.dahm_action.len() {
                        let kl = FactorAut::compose(&p.dahm_action[k], &p.dahm_action[l]);
                        let lk = FactorAut::compose(&p.dahm_action[l], &p.dahm_action[k]);
                        match (kl, lk) {
                            (Ok(a), Ok(b)) if a == b => {}
                            _ => problems.push(format!(
                                "piece {}: action images of motion generators {} and {} do not commute",
                                p.id, names[k], names[l]
                            )),
                        }
                    }
                }
            }
        }
    }

    fn check_self_conjugation(&self, i: usize, problems: &mut Vec<String>) {
        let p = &self.pieces[i];
        let Some(iota) = &p.self_conjugation else { return };
        let hnames = p.complement.generator_names();
        // Well-definedness over the relations of H_i.
        match &p.complement {
            FactorGroup::Free { .. } => {}
            FactorGroup::FreeAbelian { .. } => {
                for k in 0..iota.len() {
                    for l in k + 1..iota.len() {
                        let kl = self
                            .motion_mul(i, &iota[k], &iota[l])
                            .expect("payloads checked at construction");
                        let lk = self
                            .motion_mul(i, &iota[l], &iota[k])
                            .expect("payloads checked at construction");
                        if kl != lk {
                            problems.push(format!(
                                "piece {}: self-conjugation images of {} and {} do not commute",
                                p.id, hnames[k], hnames[l]
                            ));
                        }
                    }
                }
            }
            FactorGroup::Finite(t) => {
                // Extend along breadth-first words, then check every product.
                let words = t.element_words();
                let mut images = Vec::with_capacity(t.order());
                for word in &words {
                    let mut acc = self.motion_identity(i).expect("piece in range");
                    for g in word {
                        let k = t.generators().iter().position(|h| h == g).unwrap();
                        acc = self
                            .motion_mul(i, &acc, &iota[k])
                            .expect("payloads checked at construction");
                    }
                    images.push(acc);
                }
                for x in 0..t.order() {
                    for y in 0..t.order() {
                        let xy = self
                            .motion_mul(i, &images[x], &images[y])
                            .expect("payloads checked at construction");
                        if xy != images[t.mul(x, y)] {
                            problems.push(format!(
                                "piece {}: self-conjugation is not multiplicative at {} * {}",
                                p.id,
                                t.name_of(x),
                                t.name_of(y)
                            ));
                        }
                    }
                }
            }
        }
        // The chosen motion must act as conjugation by its generator.
        let gens = self.complement.generators_of(i).expect("piece in range");
        for (k, payload) in iota.iter().enumerate() {
            let aut = match self.motion_action(i, payload) {
                Ok(a) => a,
                Err(e) => {
                    problems.push(format!("piece {}: {e}", p.id));
                    continue;
                }
            };
            let s = self.complement.generator(i, k).expect("generator in range");
            let s_inv = self.complement.element_inv(&s).expect("valid generator");
            for x in &gens {
                let lhs = match aut.apply_payload(&x.payload) {
                    Ok(v) => v,
                    Err(e) => {
                        problems.push(format!("piece {}: {e}", p.id));
                        continue;
                    }
                };
                let sx = self.complement.element_mul(&s, x).expect("same factor");
                let conj = self.complement.element_mul(&sx, &s_inv).expect("same factor");
                if lhs != conj.payload {
                    problems.push(format!(
                        "piece {}: motion assigned to {} does not act as conjugation by {}",
                        p.id, hnames[k], hnames[k]
                    ));
                    break;
                }
            }
        }
        // Equivariance: iota(g(s)) = g iota(s) g^-1 for motion generators g.
        // With multiplicativity this extends to all of G_i and makes the
        // image of the meridian map a normal subgroup downstream.
        let mgens = self.motion_generators(i).expect("piece in range");
        let mnames = p.motion.generator_names();
        for (ky, y) in mgens.iter().enumerate() {
            let y_inv = self.motion_inv(i, y).expect("payloads checked at construction");
            for (k, s) in gens.iter().enumerate() {
                let moved = match p.dahm_action[ky].apply_payload(&s.payload) {
                    Ok(v) => v,
                    Err(e) => {
                        problems.push(format!("piece {}: {e}", p.id));
                        continue;
                    }
                };
                let lhs = match self.self_conjugation_of(i, &moved) {
                    Ok(v) => v,
                    Err(e) => {
                        problems.push(format!("piece {}: {e}", p.id));
                        continue;
                    }
                };
                let rhs = self
                    .motion_mul(i, &self.motion_mul(i, y, &iota[k]).expect("checked"), &y_inv)
                    .expect("checked");
                if lhs != rhs {
                    problems.push(format!(
                        "piece {}: self-conjugation is not equivariant for motion generator {} at {}",
                        p.id, mnames[ky], hnames[k]
                    ));
                }
            }
        }
    }

    fn check_class_consistency(&self, problems: &mut Vec<String>) {
        for block in self.class_blocks() {
            let first = &self.pieces[block[0]];
            for &i in &block[1..] {
                let p = &self.pieces[i];
                let mut differ = Vec::new();
                if p.components != first.components {
                    differ.push("component count");
                }
                if !p.complement.same_structure(&first.complement) {
                    differ.push("complement group");
                }
                if !p.motion.same_structure(&first.motion) {
                    differ.push("motion group");
                }
                if p.dahm_action != first.dahm_action {
                    differ.push("action");
                }
                if p.self_conjugation != first.self_conjugation {
                    differ.push("self-conjugation");
                }
                if !differ.is_empty() {
                    problems.push(format!(
                        "pieces {} and {} share isotopy class `{}` but differ in {}",
                        first.id,
                        p.id,
                        p.isotopy_class,
                        differ.join(", ")
                    ));
                }
            }
        }
    }

    pub fn from_document(doc: &LinkDocument) -> Result<LinkSpec, CatalogError> {
        let mut pieces = Vec::with_capacity(doc.pieces.len());
        for pd in &doc.pieces {
            pieces.push(piece_from_document(pd)?);
        }
        LinkSpec::new(pieces)
    }

    pub fn to_document(&self) -> LinkDocument {
        LinkDocument { pieces: self.pieces.iter().map(piece_to_document).collect() }
    }

    pub fn from_json(s: &str) -> Result<LinkSpec, CatalogError> {
        LinkSpec::from_document(&serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("document serializes")
    }
}

/// The trivial link on `n` unknots.
pub fn unlink(n: usize) -> Result<LinkSpec, CatalogError> {
    htrivial(n, 0)
}

/// `n` unknots followed by `m` Hopf links, all split. Piece `k` (1-based
/// over the whole list) contributes generators `a{k}` for an unknot and
/// `x{k}`, `y{k}` for a Hopf piece.
pub fn htrivial(n: usize, m: usize) -> Result<LinkSpec, CatalogError> {
    if n + m == 0 {
        return Err(CatalogError::EmptyLink);
    }
    let mut pieces = Vec::with_capacity(n + m);
    for k in 1..=n {
        let mut p = builtin_piece("unknot")?;
        p.id = format!("unknot{k}");
        let name = format!("a{k}");
        p.complement = FactorGroup::free(&[name.as_str()]);
        p.self_conjugation = Some(vec![FactorPayload::Finite(0)]);
        pieces.push(p);
    }
    for j in 1..=m {
        let k = n + j;
        let mut p = builtin_piece("hopf")?;
        p.id = format!("hopf{k}");
        let (x, y) = (format!("x{k}"), format!("y{k}"));
        p.complement = FactorGroup::free_abelian(&[x.as_str(), y.as_str()]);
        p.self_conjugation = Some(vec![FactorPayload::Finite(0), FactorPayload::Finite(0)]);
        pieces.push(p);
    }
    LinkSpec::new(pieces)
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub problems: Vec<String>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.problems.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.problems.is_empty() {
            return write!(f, "ok");
        }
        for (i, p) in self.problems.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

/// JSON document form of a link specification.
///
/// ```json
/// {
///   "pieces": [
///     {
///       "id": "unknot1",
///       "isotopy_class": "unknot",
///       "components": 1,
///       "complement": { "kind": "free", "generators": ["a1"] },
///       "motion": {
///         "kind": "finite",
///         "elements": ["e", "t"],
///         "table": [[0, 1], [1, 0]],
///         "identity": "e",
///         "generators": ["t"]
///       },
///       "dahm_action": { "t": { "free_images": { "images": ["a1^-1"] } } },
///       "self_conjugation": { "a1": "e" }
///     }
///   ]
/// }
/// ```
///
/// Words over the generators of one factor are whitespace-separated
/// `name` or `name^exponent` tokens; `1` is the empty word. Actions are
/// `free_images` (with `inverse_images` required at rank two and higher),
/// a `matrix` for a free abelian factor, or a `permutation` listing image
/// element names for a finite factor. Self-conjugation values are element
/// names for a finite motion group or exponent vectors for a free abelian
/// one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkDocument {
    pub pieces: Vec<PieceDocument>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PieceDocument {
    pub id: String,
    pub isotopy_class: String,
    #[serde(default = "default_components")]
    pub components: usize,
    pub complement: GroupDocument,
    pub motion: GroupDocument,
    pub dahm_action: BTreeMap<String, ActionDocument>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub self_conjugation: Option<BTreeMap<String, MotionValueDocument>>,
}

fn default_components() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GroupDocument {
    Free { generators: Vec<String> },
    FreeAbelian { generators: Vec<String> },
    Finite { elements: Vec<String>, table: Vec<Vec<usize>>, identity: String, generators: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionDocument {
    FreeImages {
        images: Vec<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        inverse_images: Option<Vec<String>>,
    },
    Matrix(Vec<Vec<i64>>),
    Permutation(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MotionValueDocument {
    Name(String),
    Exponents(Vec<i64>),
}

/// Parses a whitespace-separated word over named generators into reduced
/// runs; `1` or the empty string is the identity.
pub fn parse_factor_word(names: &[String], s: &str) -> Result<Vec<(usize, i64)>, CatalogError> {
    let s = s.trim();
    if s.is_empty() || s == "1" {
        return Ok(Vec::new());
    }
    let mut out: Vec<(usize, i64)> = Vec::new();
    for tok in s.split_whitespace() {
        let (base, exp) = match tok.split_once('^') {
            Some((b, e)) => (
                b,
                e.parse::<i64>().map_err(|_| {
                    CatalogError::InvalidSpec(format!("bad exponent in `{tok}`"))
                })?,
            ),
            None => (tok, 1),
        };
        let k = names.iter().position(|n| n == base).ok_or_else(|| {
            CatalogError::InvalidSpec(format!("unknown generator `{base}`"))
        })?;
        if exp != 0 {
            out = free_word_mul(&out, &[(k, exp)]);
        }
    }
    Ok(out)
}

/// Renders reduced runs back into the word grammar of [`parse_factor_word`].
pub fn render_factor_word(names: &[String], runs: &[(usize, i64)]) -> String {
    if runs.is_empty() {
        return "1".into();
    }
    runs.iter()
        .map(|&(k, e)| if e == 1 { names[k].clone() } else { format!("{}^{}", names[k], e) })
        .collect::<Vec<_>>()
        .join(" ")
}

fn group_from_document(doc: &GroupDocument, id: &str) -> Result<FactorGroup, CatalogError> {
    match doc {
        GroupDocument::Free { generators } => {
            Ok(FactorGroup::Free { names: generators.clone() })
        }
        GroupDocument::FreeAbelian { generators } => {
            Ok(FactorGroup::FreeAbelian { names: generators.clone() })
        }
        GroupDocument::Finite { elements, table, identity, generators } => {
            let find = |name: &str| {
                elements.iter().position(|n| n == name).ok_or_else(|| {
                    CatalogError::InvalidSpec(format!("piece {id}: unknown element `{name}`"))
                })
            };
            let identity = find(identity)?;
            let gens =
                generators.iter().map(|n| find(n)).collect::<Result<Vec<_>, CatalogError>>()?;
            Ok(FactorGroup::Finite(FiniteTable::new(
                elements.clone(),
                table.clone(),
                identity,
                gens,
            )?))
        }
    }
}

fn group_to_document(f: &FactorGroup) -> GroupDocument {
    match f {
        FactorGroup::Free { names } => GroupDocument::Free { generators: names.clone() },
        FactorGroup::FreeAbelian { names } => {
            GroupDocument::FreeAbelian { generators: names.clone() }
        }
        FactorGroup::Finite(t) => GroupDocument::Finite {
            elements: t.element_names().to_vec(),
            table: (0..t.order()).map(|x| (0..t.order()).map(|y| t.mul(x, y)).collect()).collect(),
            identity: t.name_of(t.identity()).to_string(),
            generators: t.generators().iter().map(|&g| t.name_of(g).to_string()).collect(),
        },
    }
}

fn action_from_document(
    doc: &ActionDocument,
    complement: &FactorGroup,
    id: &str,
) -> Result<FactorAut, CatalogError> {
    match (doc, complement) {
        (ActionDocument::FreeImages { images, inverse_images }, FactorGroup::Free { names }) => {
            let imgs = images
                .iter()
                .map(|w| parse_factor_word(names, w))
                .collect::<Result<Vec<_>, _>>()?;
            match inverse_images {
                Some(ws) => {
                    let invs = ws
                        .iter()
                        .map(|w| parse_factor_word(names, w))
                        .collect::<Result<Vec<_>, _>>()?;
                    Ok(FactorAut::free_images_with_inverses(imgs, invs))
                }
                None => FactorAut::free_images(imgs).map_err(|_| {
                    CatalogError::InvalidSpec(format!(
                        "piece {id}: free images at rank two and higher need inverse_images"
                    ))
                }),
            }
        }
        (ActionDocument::Matrix(m), FactorGroup::FreeAbelian { .. }) => {
            Ok(FactorAut::Matrix(m.clone()))
        }
        (ActionDocument::Permutation(images), FactorGroup::Finite(t)) => {
            let perm = images
                .iter()
                .map(|n| {
                    t.index_of(n).ok_or_else(|| {
                        CatalogError::InvalidSpec(format!("piece {id}: unknown element `{n}`"))
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(FactorAut::TablePerm(perm))
        }
        _ => Err(CatalogError::InvalidSpec(format!(
            "piece {id}: action kind does not match the complement kind"
        ))),
    }
}

fn action_to_document(aut: &FactorAut, complement: &FactorGroup) -> ActionDocument {
    match (aut, complement) {
        (FactorAut::FreeImages { images, inverses }, FactorGroup::Free { names }) => {
            ActionDocument::FreeImages {
                images: images.iter().map(|w| render_factor_word(names, w)).collect(),
                inverse_images: Some(
                    inverses.iter().map(|w| render_factor_word(names, w)).collect(),
                ),
            }
        }
        (FactorAut::Matrix(m), _) => ActionDocument::Matrix(m.clone()),
        (FactorAut::TablePerm(p), FactorGroup::Finite(t)) => {
            ActionDocument::Permutation(p.iter().map(|&x| t.name_of(x).to_string()).collect())
        }
        // Construction guarantees the action kind matches the factor kind.
        _ => unreachable!("action kind checked against complement kind"),
    }
}

fn motion_value_from_document(
    doc: &MotionValueDocument,
    motion: &FactorGroup,
    id: &str,
) -> Result<FactorPayload, CatalogError> {
    match (doc, motion) {
        (MotionValueDocument::Name(n), FactorGroup::Finite(t)) => t
            .index_of(n)
            .map(FactorPayload::Finite)
            .ok_or_else(|| {
                CatalogError::InvalidSpec(format!("piece {id}: unknown motion element `{n}`"))
            }),
        (MotionValueDocument::Exponents(v), FactorGroup::FreeAbelian { names }) => {
            if v.len() != names.len() {
                return Err(CatalogError::InvalidSpec(format!(
                    "piece {id}: exponent vector of length {} for rank {}",
                    v.len(),
                    names.len()
                )));
            }
            Ok(FactorPayload::Abelian(v.clone()))
        }
        _ => Err(CatalogError::InvalidSpec(format!(
            "piece {id}: self-conjugation value does not match the motion kind"
        ))),
    }
}

fn motion_value_to_document(payload: &FactorPayload, motion: &FactorGroup) -> MotionValueDocument {
    match (payload, motion) {
        (FactorPayload::Finite(x), FactorGroup::Finite(t)) => {
            MotionValueDocument::Name(t.name_of(*x).to_string())
        }
        (FactorPayload::Abelian(v), _) => MotionValueDocument::Exponents(v.clone()),
        // Construction guarantees the payload kind matches the motion kind.
        _ => unreachable!("payload kind checked against motion kind"),
    }
}

fn piece_from_document(pd: &PieceDocument) -> Result<PieceSpec, CatalogError> {
    let complement = group_from_document(&pd.complement, &pd.id)?;
    let motion = group_from_document(&pd.motion, &pd.id)?;
    let mgen_names = motion.generator_names();
    for key in pd.dahm_action.keys() {
        if !mgen_names.contains(key) {
            return Err(CatalogError::InvalidSpec(format!(
                "piece {}: action for `{key}`, which is not a motion generator",
                pd.id
            )));
        }
    }
    let dahm_action = mgen_names
        .iter()
        .map(|name| {
            let ad = pd.dahm_action.get(name).ok_or_else(|| {
                CatalogError::InvalidSpec(format!(
                    "piece {}: no action for motion generator {name}",
                    pd.id
                ))
            })?;
            action_from_document(ad, &complement, &pd.id)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let self_conjugation = match &pd.self_conjugation {
        None => None,
        Some(map) => {
            let hnames = complement.generator_names();
            for key in map.keys() {
                if !hnames.contains(key) {
                    return Err(CatalogError::InvalidSpec(format!(
                        "piece {}: self-conjugation for `{key}`, which is not a generator",
                        pd.id
                    )));
                }
            }
            Some(
                hnames
                    .iter()
                    .map(|name| {
                        let v = map.get(name).ok_or_else(|| {
                            CatalogError::InvalidSpec(format!(
                                "piece {}: no self-conjugation value for {name}",
                                pd.id
                            ))
                        })?;
                        motion_value_from_document(v, &motion, &pd.id)
                    })
                    .collect::<Result<Vec<_>, _>>()?,
            )
        }
    };
    Ok(PieceSpec {
        id: pd.id.clone(),
        isotopy_class: pd.isotopy_class.clone(),
        components: pd.components,
        complement,
        motion,
        dahm_action,
        self_conjugation,
    })
}

fn piece_to_document(p: &PieceSpec) -> PieceDocument {
    let mgen_names = p.motion.generator_names();
    let dahm_action = mgen_names
        .iter()
        .zip(&p.dahm_action)
        .map(|(n, a)| (n.clone(), action_to_document(a, &p.complement)))
        .collect();
    let self_conjugation = p.self_conjugation.as_ref().map(|iota| {
        p.complement
            .generator_names()
            .iter()
            .zip(iota)
            .map(|(n, v)| (n.clone(), motion_value_to_document(v, &p.motion)))
            .collect()
    });
    PieceDocument {
        id: p.id.clone(),
        isotopy_class: p.isotopy_class.clone(),
        components: p.components,
        complement: group_to_document(&p.complement),
        motion: group_to_document(&p.motion),
        dahm_action,
        self_conjugation,
    }
}
