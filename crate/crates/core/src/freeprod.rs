//! Words in a free product of finitely many factor groups.
//!
//! A factor is a free group, a free abelian group, or a finite group given by
//! its multiplication table; all three have decidable word problems, so every
//! operation here is exact. A word is a sequence of syllables in normal form:
//! no identity syllables, and adjacent syllables lie in distinct factors.
//! Normal forms are unique, so syllable-wise equality decides equality in the
//! free product.

use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FreeProdError {
    #[error("factor index {factor} out of range (context has {bound} factors)")]
    IndexOutOfRange { factor: usize, bound: usize },
    #[error("malformed payload: {0}")]
    MalformedPayload(String),
    #[error("operands belong to different factor contexts")]
    ContextMismatch,
    #[error("coset targets repeat factor {0}")]
    DuplicateCosetFactor(usize),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TableError {
    #[error("table is not square over {0} elements")]
    NotSquare(usize),
    #[error("table entry {value} at ({row},{col}) out of range")]
    EntryOutOfRange { row: usize, col: usize, value: usize },
    #[error("element {0} is not a two-sided identity")]
    BadIdentity(usize),
    #[error("element {0} has no inverse")]
    NoInverse(usize),
    #[error("associativity fails at ({0},{1},{2})")]
    NotAssociative(usize, usize, usize),
    #[error("element names must be nonempty and distinct")]
    BadNames,
    #[error("generator index {0} out of range")]
    GeneratorOutOfRange(usize),
    #[error("declared generators do not generate the group")]
    NotGenerating,
}

/// A finite group presented by its full multiplication table.
/// `table[x][y]` is the product `x * y`. Construction validates the group
/// axioms exhaustively and precomputes inverses.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FiniteTable {
    element_names: Vec<String>,
    table: Vec<Vec<usize>>,
    identity: usize,
    inverse: Vec<usize>,
    generators: Vec<usize>,
}

impl FiniteTable {
    pub fn new(
        element_names: Vec<String>,
        table: Vec<Vec<usize>>,
        identity: usize,
        generators: Vec<usize>,
    ) -> Result<Self, TableError> {
        let k = element_names.len();
        if k == 0 {
            return Err(TableError::BadNames);
        }
        {
            let mut sorted = element_names.clone();
            sorted.sort();
            sorted.dedup();
            if sorted.len() != k || element_names.iter().any(|n| n.is_empty()) {
                return Err(TableError::BadNames);
            }
        }
        if table.len() != k {
            return Err(TableError::NotSquare(k));
        }
        for (r, row) in table.iter().enumerate() {
            if row.len() != k {
                return Err(TableError::NotSquare(k));
            }
            for (c, &v) in row.iter().enumerate() {
                if v >= k {
                    return Err(TableError::EntryOutOfRange { row: r, col: c, value: v });
                }
            }
        }
        if identity >= k {
            return Err(TableError::BadIdentity(identity));
        }
        for x in 0..k {
            if table[identity][x] != x || table[x][identity] != x {
                return Err(TableError::BadIdentity(identity));
            }
        }
        let mut inverse = vec![usize::MAX; k];
        for x in 0..k {
            for y in 0..k {
                if table[x][y] == identity && table[y][x] == identity {
                    inverse[x] = y;
                    break;
                }
            }
            if inverse[x] == usize::MAX {
                return Err(TableError::NoInverse(x));
            }
        }
        for x in 0..k {
            for y in 0..k {
                for z in 0..k {
                    if table[table[x][y]][z] != table[x][table[y][z]] {
                        return Err(TableError::NotAssociative(x, y, z));
                    }
                }
            }
        }
        {
            let mut gens = generators.clone();
            gens.sort();
            gens.dedup();
            if gens.len() != generators.len() {
                return Err(TableError::BadNames);
            }
        }
        for &g in &generators {
            if g >= k {
                return Err(TableError::GeneratorOutOfRange(g));
            }
        }
        // Closure of the generators under multiplication must be everything.
        let mut reach = vec![false; k];
        reach[identity] = true;
        let mut queue = vec![identity];
        while let Some(x) = queue.pop() {
            for &g in &generators {
                let y = table[x][g];
                if !reach[y] {
                    reach[y] = true;
                    queue.push(y);
                }
            }
        }
        if reach.iter().any(|r| !r) {
            return Err(TableError::NotGenerating);
        }
        Ok(FiniteTable { element_names, table, identity, inverse, generators })
    }

    pub fn order(&self) -> usize {
        self.element_names.len()
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn mul(&self, x: usize, y: usize) -> usize {
        self.table[x][y]
    }

    pub fn inv(&self, x: usize) -> usize {
        self.inverse[x]
    }

    pub fn generators(&self) -> &[usize] {
        &self.generators
    }

    pub fn element_names(&self) -> &[String] {
        &self.element_names
    }

    pub fn name_of(&self, x: usize) -> &str {
        &self.element_names[x]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.element_names.iter().position(|n| n == name)
    }

    /// Shortest expression of every element as a sequence of generator
    /// indices, found by breadth-first search from the identity. The search
    /// order is fixed, so the words are deterministic.
    pub fn element_words(&self) -> Vec<Vec<usize>> {
        let k = self.order();
        let mut words: Vec<Option<Vec<usize>>> = vec![None; k];
        words[self.identity] = Some(Vec::new());
        let mut queue = std::collections::VecDeque::new();
        queue.push_back(self.identity);
        while let Some(x) = queue.pop_front() {
            for &g in &self.generators {
                let y = self.table[x][g];
                if words[y].is_none() {
                    let mut w = words[x].clone().unwrap();
                    w.push(g);
                    words[y] = Some(w);
                    queue.push_back(y);
                }
            }
        }
        words.into_iter().map(|w| w.expect("generators generate")).collect()
    }

    pub fn pow(&self, x: usize, e: i64) -> usize {
        let (mut base, mut e) = if e < 0 { (self.inv(x), e.unsigned_abs()) } else { (x, e as u64) };
        let mut acc = self.identity;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }
}

/// One factor of the free product.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum FactorGroup {
    /// Free group on named generators.
    Free { names: Vec<String> },
    /// Free abelian group on named generators.
    FreeAbelian { names: Vec<String> },
    /// Finite group with a full multiplication table.
    Finite(FiniteTable),
}

impl FactorGroup {
    pub fn free(names: &[&str]) -> Self {
        FactorGroup::Free { names: names.iter().map(|s| s.to_string()).collect() }
    }

    pub fn free_abelian(names: &[&str]) -> Self {
        FactorGroup::FreeAbelian { names: names.iter().map(|s| s.to_string()).collect() }
    }

    pub fn rank(&self) -> usize {
        match self {
            FactorGroup::Free { names } | FactorGroup::FreeAbelian { names } => names.len(),
            FactorGroup::Finite(t) => t.generators().len(),
        }
    }

    /// Names of the distinguished generators (for a finite factor, the names
    /// of the chosen generating elements).
    pub fn generator_names(&self) -> Vec<String> {
        match self {
            FactorGroup::Free { names } | FactorGroup::FreeAbelian { names } => names.clone(),
            FactorGroup::Finite(t) => {
                t.generators().iter().map(|&g| t.name_of(g).to_string()).collect()
            }
        }
    }

    /// Structural equality ignoring generator and element names: payloads
    /// valid for one factor are valid for the other with the same meaning.
    pub fn same_structure(&self, other: &FactorGroup) -> bool {
        match (self, other) {
            (FactorGroup::Free { names: a }, FactorGroup::Free { names: b })
            | (FactorGroup::FreeAbelian { names: a }, FactorGroup::FreeAbelian { names: b }) => {
                a.len() == b.len()
            }
            (FactorGroup::Finite(s), FactorGroup::Finite(t)) => {
                s.table == t.table && s.identity == t.identity && s.generators == t.generators
            }
            _ => false,
        }
    }

    /// True when every pair of elements commutes.
    pub fn is_abelian(&self) -> bool {
        match self {
            FactorGroup::Free { names } => names.len() == 1,
            FactorGroup::FreeAbelian { .. } => true,
            FactorGroup::Finite(t) => {
                let k = t.order();
                (0..k).all(|x| (0..k).all(|y| t.mul(x, y) == t.mul(y, x)))
            }
        }
    }

    pub fn is_trivial(&self) -> bool {
        match self {
            FactorGroup::Free { names } | FactorGroup::FreeAbelian { names } => names.is_empty(),
            FactorGroup::Finite(t) => t.order() == 1,
        }
    }
}

/// Payload of one syllable, interpreted by the owning factor's kind.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum FactorPayload {
    /// Reduced word as runs `(generator, exponent)` with nonzero exponents
    /// and distinct adjacent generators.
    Free(Vec<(usize, i64)>),
    /// Exponent vector, one entry per generator.
    Abelian(Vec<i64>),
    /// Element index into the multiplication table.
    Finite(usize),
}

/// One syllable: an element of a single factor.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FactorElement {
    pub factor: usize,
    pub payload: FactorPayload,
}

impl FactorElement {
    pub fn free(factor: usize, runs: Vec<(usize, i64)>) -> Self {
        FactorElement { factor, payload: FactorPayload::Free(runs) }
    }

    pub fn abelian(factor: usize, exps: Vec<i64>) -> Self {
        FactorElement { factor, payload: FactorPayload::Abelian(exps) }
    }

    pub fn finite(factor: usize, index: usize) -> Self {
        FactorElement { factor, payload: FactorPayload::Finite(index) }
    }
}

/// A word in normal form. Obtain one through [`FreeProduct::normalize`] or
/// the other word operations; the constructor for raw syllable lists is
/// deliberately not public.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct FreeProductWord {
    syllables: Vec<FactorElement>,
}

impl FreeProductWord {
    pub fn identity() -> Self {
        FreeProductWord { syllables: Vec::new() }
    }

    pub fn is_identity(&self) -> bool {
        self.syllables.is_empty()
    }

    pub fn syllables(&self) -> &[FactorElement] {
        &self.syllables
    }

    /// Internal constructor for syllable lists already known to be in normal
    /// form (e.g. prefixes of a normal form).
    pub(crate) fn from_normal_syllables(syllables: Vec<FactorElement>) -> Self {
        FreeProductWord { syllables }
    }

    pub fn len(&self) -> usize {
        self.syllables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.syllables.is_empty()
    }
}

/// The ambient free product: an ordered list of factor groups. All word
/// operations live here so that payloads are always interpreted against the
/// right factor data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FreeProduct {
    factors: Vec<FactorGroup>,
}

impl FreeProduct {
    pub fn new(factors: Vec<FactorGroup>) -> Self {
        FreeProduct { factors }
    }

    pub fn factor_count(&self) -> usize {
        self.factors.len()
    }

    pub fn factors(&self) -> &[FactorGroup] {
        &self.factors
    }

    pub fn factor(&self, i: usize) -> Result<&FactorGroup, FreeProdError> {
        self.factors
            .get(i)
            .ok_or(FreeProdError::IndexOutOfRange { factor: i, bound: self.factors.len() })
    }

    /// The `k`-th distinguished generator of factor `i` as an element.
    pub fn generator(&self, i: usize, k: usize) -> Result<FactorElement, FreeProdError> {
        let f = self.factor(i)?;
        let fail = || FreeProdError::MalformedPayload(format!("factor {i} has no generator {k}"));
        match f {
            FactorGroup::Free { names } => {
                if k >= names.len() {
                    return Err(fail());
                }
                Ok(FactorElement::free(i, vec![(k, 1)]))
            }
            FactorGroup::FreeAbelian { names } => {
                if k >= names.len() {
                    return Err(fail());
                }
                let mut exps = vec![0; names.len()];
                exps[k] = 1;
                Ok(FactorElement::abelian(i, exps))
            }
            FactorGroup::Finite(t) => {
                let &g = t.generators().get(k).ok_or_else(fail)?;
                Ok(FactorElement::finite(i, g))
            }
        }
    }

    /// All distinguished generators of factor `i`.
    pub fn generators_of(&self, i: usize) -> Result<Vec<FactorElement>, FreeProdError> {
        let n = self.factor(i)?.rank();
        (0..n).map(|k| self.generator(i, k)).collect()
    }

    pub fn identity_element(&self, i: usize) -> Result<FactorElement, FreeProdError> {
        let f = self.factor(i)?;
        Ok(match f {
            FactorGroup::Free { .. } => FactorElement::free(i, Vec::new()),
            FactorGroup::FreeAbelian { names } => FactorElement::abelian(i, vec![0; names.len()]),
            FactorGroup::Finite(t) => FactorElement::finite(i, t.identity()),
        })
    }

    pub fn check_element(&self, e: &FactorElement) -> Result<(), FreeProdError> {
        let f = self.factor(e.factor)?;
        let bad = |msg: String| Err(FreeProdError::MalformedPayload(msg));
        match (&e.payload, f) {
            (FactorPayload::Free(runs), FactorGroup::Free { names }) => {
                for w in runs.windows(2) {
                    if w[0].0 == w[1].0 {
                        return bad(format!("unreduced runs in factor {}", e.factor));
                    }
                }
                for &(g, exp) in runs {
                    if g >= names.len() {
                        return bad(format!("generator {g} out of range in factor {}", e.factor));
                    }
                    if exp == 0 {
                        return bad(format!("zero exponent run in factor {}", e.factor));
                    }
                }
                Ok(())
            }
            (FactorPayload::Abelian(exps), FactorGroup::FreeAbelian { names }) => {
                if exps.len() != names.len() {
                    bad(format!(
                        "exponent vector of length {} in rank-{} factor {}",
                        exps.len(),
                        names.len(),
                        e.factor
                    ))
                } else {
                    Ok(())
                }
            }
            (FactorPayload::Finite(x), FactorGroup::Finite(t)) => {
                if *x >= t.order() {
                    bad(format!("element index {x} out of range in factor {}", e.factor))
                } else {
                    Ok(())
                }
            }
            _ => bad(format!("payload kind does not match factor {} kind", e.factor)),
        }
    }

    pub fn element_is_identity(&self, e: &FactorElement) -> bool {
        match &e.payload {
            FactorPayload::Free(runs) => runs.is_empty(),
            FactorPayload::Abelian(exps) => exps.iter().all(|&x| x == 0),
            FactorPayload::Finite(x) => match &self.factors[e.factor] {
                FactorGroup::Finite(t) => *x == t.identity(),
                _ => false,
            },
        }
    }

    /// Product of two elements of the same factor.
    pub fn element_mul(
        &self,
        a: &FactorElement,
        b: &FactorElement,
    ) -> Result<FactorElement, FreeProdError> {
        if a.factor != b.factor {
            return Err(FreeProdError::MalformedPayload(
                "cannot multiply syllables from different factors".into(),
            ));
        }
        self.check_element(a)?;
        self.check_element(b)?;
        let payload = match (&a.payload, &b.payload) {
            (FactorPayload::Free(x), FactorPayload::Free(y)) => {
                FactorPayload::Free(free_word_mul(x, y))
            }
            (FactorPayload::Abelian(x), FactorPayload::Abelian(y)) => {
                FactorPayload::Abelian(x.iter().zip(y).map(|(a, b)| a + b).collect())
            }
            (FactorPayload::Finite(x), FactorPayload::Finite(y)) => {
                let FactorGroup::Finite(t) = &self.factors[a.factor] else { unreachable!() };
                FactorPayload::Finite(t.mul(*x, *y))
            }
            _ => unreachable!("check_element enforces matching kinds"),
        };
        Ok(FactorElement { factor: a.factor, payload })
    }

    pub fn element_inv(&self, a: &FactorElement) -> Result<FactorElement, FreeProdError> {
        self.check_element(a)?;
        let payload = match &a.payload {
            FactorPayload::Free(runs) => {
                FactorPayload::Free(runs.iter().rev().map(|&(g, e)| (g, -e)).collect())
            }
            FactorPayload::Abelian(exps) => {
                FactorPayload::Abelian(exps.iter().map(|&e| -e).collect())
            }
            FactorPayload::Finite(x) => {
                let FactorGroup::Finite(t) = &self.factors[a.factor] else {
                    return Err(FreeProdError::MalformedPayload("kind mismatch".into()));
                };
                FactorPayload::Finite(t.inv(*x))
            }
        };
        Ok(FactorElement { factor: a.factor, payload })
    }

    pub fn element_pow(&self, a: &FactorElement, e: i64) -> Result<FactorElement, FreeProdError> {
        self.check_element(a)?;
        let payload = match &a.payload {
            FactorPayload::Free(runs) => FactorPayload::Free(free_word_pow(runs, e)),
            FactorPayload::Abelian(exps) => {
                FactorPayload::Abelian(exps.iter().map(|&x| x * e).collect())
            }
            FactorPayload::Finite(x) => {
                let FactorGroup::Finite(t) = &self.factors[a.factor] else { unreachable!() };
                FactorPayload::Finite(t.pow(*x, e))
            }
        };
        Ok(FactorElement { factor: a.factor, payload })
    }

    /// Rewrites a raw syllable list into normal form: identity syllables are
    /// dropped and adjacent syllables of the same factor are multiplied out,
    /// repeating until stable. One stack pass suffices.
    pub fn normalize(&self, raw: &[FactorElement]) -> Result<FreeProductWord, FreeProdError> {
        let mut out: Vec<FactorElement> = Vec::new();
        for s in raw {
            self.check_element(s)?;
            let mut cur = s.clone();
            loop {
                if self.element_is_identity(&cur) {
                    break;
                }
                match out.last() {
                    Some(last) if last.factor == cur.factor => {
                        let merged = self.element_mul(last, &cur)?;
                        out.pop();
                        cur = merged;
                    }
                    _ => {
                        out.push(cur);
                        break;
                    }
                }
            }
        }
        Ok(FreeProductWord { syllables: out })
    }

    pub fn word_from_element(&self, e: FactorElement) -> Result<FreeProductWord, FreeProdError> {
        self.normalize(std::slice::from_ref(&e))
    }

    pub fn multiply(
        &self,
        u: &FreeProductWord,
        v: &FreeProductWord,
    ) -> Result<FreeProductWord, FreeProdError> {
        let mut raw = u.syllables.clone();
        raw.extend(v.syllables.iter().cloned());
        self.normalize(&raw)
    }

    pub fn invert(&self, w: &FreeProductWord) -> Result<FreeProductWord, FreeProdError> {
        let mut syl = Vec::with_capacity(w.syllables.len());
        for s in w.syllables.iter().rev() {
            syl.push(self.element_inv(s)?);
        }
        // An inverted normal form is already normal: the factor pattern is
        // reversed and no syllable became trivial.
        Ok(FreeProductWord { syllables: syl })
    }

    pub fn conjugate(
        &self,
        w: &FreeProductWord,
        by: &FreeProductWord,
    ) -> Result<FreeProductWord, FreeProdError> {
        let inv = self.invert(by)?;
        self.multiply(&self.multiply(by, w)?, &inv)
    }

    /// Finds some `w` lying in every left coset `w_j · H_j`, or `None` when
    /// the intersection is empty.
    ///
    /// Membership `w ∈ w_j · H_j` means exactly: `w` equals the prefix `p_j`
    /// obtained from `w_j` by stripping a trailing factor-`j` syllable, or
    /// `p_j` extended by one factor-`j` syllable. With at least two distinct
    /// target factors, at most one target can take the extended shape, so
    /// some stripped prefix is itself the solution whenever one exists; the
    /// candidate set `{p_j}` is therefore complete.
    pub fn solve_common_coset(
        &self,
        targets: &[(FreeProductWord, usize)],
    ) -> Result<Option<FreeProductWord>, FreeProdError> {
        let mut seen = std::collections::BTreeSet::new();
        for (w, j) in targets {
            self.factor(*j)?;
            for s in w.syllables() {
                self.check_element(s)?;
            }
            if !seen.insert(*j) {
                return Err(FreeProdError::DuplicateCosetFactor(*j));
            }
        }
        if targets.is_empty() {
            return Ok(Some(FreeProductWord::identity()));
        }
        let strip = |w: &FreeProductWord, j: usize| -> FreeProductWord {
            let mut syl = w.syllables.clone();
            if syl.last().is_some_and(|s| s.factor == j) {
                syl.pop();
            }
            FreeProductWord { syllables: syl }
        };
        let prefixes: Vec<FreeProductWord> =
            targets.iter().map(|(w, j)| strip(w, *j)).collect();
        let member = |w: &FreeProductWord, p: &FreeProductWord, j: usize| -> bool {
            if w.syllables.len() == p.syllables.len() {
                w == p
            } else if w.syllables.len() == p.syllables.len() + 1 {
                w.syllables[..p.syllables.len()] == p.syllables && w.syllables.last().unwrap().factor == j
            } else {
                false
            }
        };
        let mut candidates: Vec<&FreeProductWord> = Vec::new();
        for p in &prefixes {
            if !candidates.contains(&p) {
                candidates.push(p);
            }
        }
        for cand in candidates {
            if targets.iter().zip(&prefixes).all(|((_, j), p)| member(cand, p, *j)) {
                return Ok(Some(cand.clone()));
            }
        }
        Ok(None)
    }

    /// Renders a word using generator names; the identity prints as `1`.
    pub fn display_word(&self, w: &FreeProductWord) -> String {
        if w.is_identity() {
            return "1".to_string();
        }
        let parts: Vec<String> =
            w.syllables.iter().map(|s| self.display_element(s)).collect();
        parts.join(" ")
    }

    pub fn display_element(&self, e: &FactorElement) -> String {
        let f = &self.factors[e.factor];
        match (&e.payload, f) {
            (FactorPayload::Free(runs), FactorGroup::Free { names }) => {
                if runs.is_empty() {
                    return "1".into();
                }
                runs.iter()
                    .map(|&(g, exp)| {
                        if exp == 1 {
                            names[g].clone()
                        } else {
                            format!("{}^{}", names[g], exp)
                        }
                    })
                    .collect::<Vec<_>>()
                    .join(" ")
            }
            (FactorPayload::Abelian(exps), FactorGroup::FreeAbelian { names }) => {
                let parts: Vec<String> = exps
                    .iter()
                    .enumerate()
                    .filter(|(_, &e)| e != 0)
                    .map(|(g, &exp)| {
                        if exp == 1 {
                            names[g].clone()
                        } else {
                            format!("{}^{}", names[g], exp)
                        }
                    })
                    .collect();
                if parts.is_empty() {
                    "1".into()
                } else {
                    parts.join(" ")
                }
            }
            (FactorPayload::Finite(x), FactorGroup::Finite(t)) => t.name_of(*x).to_string(),
            _ => "<malformed>".into(),
        }
    }

    /// Expresses a factor element as an ordered product of distinguished
    /// generator powers: the returned `(generator, exponent)` list multiplies
    /// out, left to right, to the element. Finite factors use shortest
    /// generator words found by breadth-first search.
    pub fn generator_decomposition(
        &self,
        e: &FactorElement,
    ) -> Result<Vec<(usize, i64)>, FreeProdError> {
        self.check_element(e)?;
        Ok(match &e.payload {
            FactorPayload::Free(runs) => runs.clone(),
            FactorPayload::Abelian(exps) => exps
                .iter()
                .enumerate()
                .filter(|(_, &x)| x != 0)
                .map(|(k, &x)| (k, x))
                .collect(),
            FactorPayload::Finite(x) => {
                let FactorGroup::Finite(t) = &self.factors[e.factor] else { unreachable!() };
                let word = &t.element_words()[*x];
                word.iter()
                    .map(|&g| {
                        let k = t.generators().iter().position(|&h| h == g).unwrap();
                        (k, 1)
                    })
                    .collect()
            }
        })
    }

    /// Looks up a distinguished generator by its (globally unique) name,
    /// returning `(factor, generator index)`.
    pub fn find_generator(&self, name: &str) -> Option<(usize, usize)> {
        for (i, f) in self.factors.iter().enumerate() {
            if let Some(k) = f.generator_names().iter().position(|n| n == name) {
                return Some((i, k));
            }
        }
        None
    }
}

pub(crate) fn free_word_mul(a: &[(usize, i64)], b: &[(usize, i64)]) -> Vec<(usize, i64)> {
    let mut out = a.to_vec();
    for &(g, e) in b {
        push_run(&mut out, g, e);
    }
    out
}

fn push_run(out: &mut Vec<(usize, i64)>, g: usize, e: i64) {
    if e == 0 {
        return;
    }
    if let Some(&(lg, le)) = out.last() {
        if lg == g {
            out.pop();
            let sum = le + e;
            if sum != 0 {
                out.push((g, sum));
            }
            return;
        }
    }
    out.push((g, e));
}

pub(crate) fn free_word_pow(runs: &[(usize, i64)], e: i64) -> Vec<(usize, i64)> {
    if e == 0 {
        return Vec::new();
    }
    let (base, times): (Vec<(usize, i64)>, i64) = if e < 0 {
        (runs.iter().rev().map(|&(g, x)| (g, -x)).collect(), -e)
    } else {
        (runs.to_vec(), e)
    };
    let mut acc: Vec<(usize, i64)> = Vec::new();
    for _ in 0..times {
        acc = free_word_mul(&acc, &base);
    }
    acc
}

impl fmt::Display for FreeProductWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.syllables.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .syllables
            .iter()
            .map(|s| format!("[{}:{:?}]", s.factor, s.payload))
            .collect();
        write!(f, "{}", parts.join(" "))
    }
}
