//! Command-line front end for the motion-group library: spec ingestion,
//! presentations, element arithmetic, equality queries, L-tree enumeration,
//! and finiteness probes.
//!
//! Element grammar (whitespace-separated product, applied left to right):
//!
//! - `X(w,j)` is the partial conjugation of piece `j` by the word `w` over
//!   one piece's complement generators (`*` separates powers: `X(x1^2*y1,2)`;
//!   finite factors also accept element names).
//! - `G[i]:m` is the motion `m` of piece `i` (an element name of a finite
//!   motion group, or a generator name of a free-abelian one).
//! - `P(i j)` is the transposition lift swapping pieces `i` and `j`.
//! - `1` is the identity; any token takes a postfix exponent, e.g.
//!   `X(a1,2)^-1` or `G[1]:t^2`.
//!
//! Piece indices are 1-based. Every element printed by the CLI re-parses
//! to an equal element.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};

use linkmotion::catalog::LinkSpec;
use linkmotion::freeprod::{FactorElement, FactorGroup};
use linkmotion::ltree;
use linkmotion::motion::{
    equals, equals_in_s3, finiteness_probe, multiply, present, MotionElement, ProbeMode,
    ProbeResult,
};
use linkmotion::perm::Perm;

#[derive(Debug, Parser)]
#[command(name = "linkmotion", version, about = "Exact motion-group computation for split links")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print a presentation of the motion group on the standard generators
    Present {
        /// Path to a link specification (JSON)
        #[arg(long)]
        spec: PathBuf,
        /// Emit JSON instead of gen:/rel: lines
        #[arg(long)]
        json: bool,
    },
    /// Multiply motion elements and print the product
    Mul {
        #[arg(long)]
        spec: PathBuf,
        /// One or more element expressions, multiplied left to right
        #[arg(required = true)]
        exprs: Vec<String>,
    },
    /// Decide exact equality of two elements
    Eq {
        #[arg(long)]
        spec: PathBuf,
        a: String,
        b: String,
    },
    /// Decide equality after one-point compactification of the ambient space
    #[command(name = "eq-s3")]
    EqS3 {
        #[arg(long)]
        spec: PathBuf,
        a: String,
        b: String,
    },
    /// Print the Dahm image of an element: factor permutation and generator images
    Dahm {
        #[arg(long)]
        spec: PathBuf,
        expr: String,
    },
    /// Enumerate rooted L-trees for n pieces, one per line
    Ltrees {
        #[arg(long)]
        n: usize,
    },
    /// Print the stabilizer generators of a rooted L-tree
    #[command(name = "tree-gens")]
    TreeGens {
        #[arg(long)]
        spec: PathBuf,
        /// Tree in nested-parenthesis form, e.g. "(root:∅ (1) (2))"
        #[arg(long)]
        tree: String,
    },
    /// Probe whether the motion group closes under the standard generators
    Probe {
        #[arg(long)]
        spec: PathBuf,
        /// r3 for exact equality, s3 for equality modulo meridional rotations
        #[arg(long, value_enum)]
        mode: Mode,
        /// Stop after discovering this many distinct elements
        #[arg(long, default_value_t = 10000)]
        bound: usize,
    },
    /// Check a link specification and report problems
    Validate {
        #[arg(long)]
        spec: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Mode {
    R3,
    S3,
}

/// What a command run produced. Exit codes: success 0, a mathematically
/// false answer 1, usage or expression errors 2, an invalid spec 3.
#[derive(Debug, PartialEq, Eq)]
pub enum Outcome {
    /// Printed to stdout; exit 0.
    Success(String),
    /// Printed to stdout; exit 1 (equality is false, probe exceeded bound).
    False(String),
    /// Printed to stderr; exit 2.
    Usage(String),
    /// Printed to stderr; exit 3.
    InvalidSpec(String),
}

impl Outcome {
    pub fn code(&self) -> i32 {
        match self {
            Outcome::Success(_) => 0,
            Outcome::False(_) => 1,
            Outcome::Usage(_) => 2,
            Outcome::InvalidSpec(_) => 3,
        }
    }

    pub fn text(&self) -> &str {
        match self {
            Outcome::Success(s) | Outcome::False(s) | Outcome::Usage(s) | Outcome::InvalidSpec(s) => s,
        }
    }
}

fn load_spec(path: &Path) -> Result<Arc<LinkSpec>, Outcome> {
    let raw = std::fs::read_to_string(path)
        .map_err(|e| Outcome::Usage(format!("cannot read {}: {e}", path.display())))?;
    let spec = LinkSpec::from_json(&raw)
        .map_err(|e| Outcome::InvalidSpec(format!("invalid spec {}: {e}", path.display())))?;
    let report = spec.validate();
    if !report.is_ok() {
        return Err(Outcome::InvalidSpec(format!(
            "spec {} fails validation:\n{report}",
            path.display()
        )));
    }
    Ok(Arc::new(spec))
}

/// Splits an expression into generator tokens: whitespace separates tokens
/// only outside parentheses, so `P(1 2)` stays one token.
fn tokenize(expr: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut cur = String::new();
    let mut depth = 0usize;
    for c in expr.chars() {
        match c {
            '(' | '[' => {
                depth += 1;
                cur.push(c);
            }
            ')' | ']' => {
                depth = depth.saturating_sub(1);
                cur.push(c);
            }
            c if c.is_whitespace() && depth == 0 => {
                if !cur.is_empty() {
                    tokens.push(std::mem::take(&mut cur));
                }
            }
            c => cur.push(c),
        }
    }
    if !cur.is_empty() {
        tokens.push(cur);
    }
    tokens
}

/// Splits a postfix exponent off a token: the last `^` at bracket depth 0.
fn split_exponent(token: &str) -> Result<(&str, i64), String> {
    let mut depth = 0usize;
    let mut split = None;
    for (pos, c) in token.char_indices() {
        match c {
            '(' | '[' => depth += 1,
            ')' | ']' => depth = depth.saturating_sub(1),
            '^' if depth == 0 => split = Some(pos),
            _ => {}
        }
    }
    match split {
        None => Ok((token, 1)),
        Some(pos) => {
            let exp: i64 = token[pos + 1..]
                .parse()
                .map_err(|_| format!("bad exponent in '{token}'"))?;
            Ok((&token[..pos], exp))
        }
    }
}

fn parse_piece_index(spec: &LinkSpec, text: &str) -> Result<usize, String> {
    let v: usize = text.trim().parse().map_err(|_| format!("bad piece index '{text}'"))?;
    if v == 0 || v > spec.piece_count() {
        return Err(format!("piece index {v} out of range 1..={}", spec.piece_count()));
    }
    Ok(v - 1)
}

/// Parses the acting word of an `X(...)` token: `*`-separated powers of one
/// piece's complement generators, or an element name of a finite factor.
fn parse_acting(spec: &LinkSpec, word: &str) -> Result<FactorElement, String> {
    let hctx = spec.complement_product();
    let mut factor: Option<usize> = None;
    let mut parts = Vec::new();
    for part in word.split('*') {
        let (base, exp) = split_exponent(part)?;
        let (i, elem) = if let Some((i, k)) = hctx.find_generator(base) {
            (i, hctx.generator(i, k).map_err(|e| e.to_string())?)
        } else if let Some(found) = (0..spec.piece_count()).find_map(|i| {
            if let FactorGroup::Finite(t) = &spec.pieces()[i].complement {
                t.index_of(base).map(|x| (i, FactorElement::finite(i, x)))
            } else {
                None
            }
        }) {
            found
        } else {
            return Err(format!("unknown complement generator '{base}'"));
        };
        if *factor.get_or_insert(i) != i {
            return Err(format!("'{word}' mixes generators of different pieces"));
        }
        parts.push(hctx.element_pow(&elem, exp).map_err(|e| e.to_string())?);
    }
    let i = factor.ok_or_else(|| format!("empty acting word in '{word}'"))?;
    let mut acc = hctx.identity_element(i).map_err(|e| e.to_string())?;
    for p in &parts {
        acc = hctx.element_mul(&acc, p).map_err(|e| e.to_string())?;
    }
    Ok(acc)
}

fn parse_generator(spec: &Arc<LinkSpec>, base: &str) -> Result<MotionElement, String> {
    if base == "1" {
        return MotionElement::identity(spec).map_err(|e| e.to_string());
    }
    if let Some(inner) = base.strip_prefix("X(").and_then(|r| r.strip_suffix(')')) {
        let (word, support) = inner
            .rsplit_once(',')
            .ok_or_else(|| format!("expected X(word,piece), got '{base}'"))?;
        let acting = parse_acting(spec, word.trim())?;
        let j = parse_piece_index(spec, support)?;
        return MotionElement::partial_conjugation(spec, acting, j).map_err(|e| e.to_string());
    }
    if let Some(inner) = base.strip_prefix("G[") {
        let (idx, name) = inner
            .split_once("]:")
            .ok_or_else(|| format!("expected G[piece]:motion, got '{base}'"))?;
        let i = parse_piece_index(spec, idx)?;
        let payload = spec
            .motion_payload_by_name(i, name)
            .ok_or_else(|| format!("unknown motion '{name}' for piece {}", i + 1))?;
        return MotionElement::motion_of(spec, i, payload).map_err(|e| e.to_string());
    }
    if let Some(inner) = base.strip_prefix("P(").and_then(|r| r.strip_suffix(')')) {
        let mut it = inner.split_whitespace();
        let (a, b) = match (it.next(), it.next(), it.next()) {
            (Some(a), Some(b), None) => (a, b),
            _ => return Err(format!("expected P(i j), got '{base}'")),
        };
        let a = parse_piece_index(spec, a)?;
        let b = parse_piece_index(spec, b)?;
        let p = Perm::transposition(spec.piece_count(), a, b)
            .ok_or_else(|| "transposition needs two distinct pieces".to_string())?;
        return MotionElement::permutation(spec, p).map_err(|e| e.to_string());
    }
    Err(format!("unknown generator '{base}'"))
}

/// Parses a whitespace-separated product of generator tokens.
pub fn parse_element(spec: &Arc<LinkSpec>, expr: &str) -> Result<MotionElement, Outcome> {
    let tokens = tokenize(expr);
    if tokens.is_empty() {
        return Err(Outcome::Usage("empty element expression".into()));
    }
    let mut acc = MotionElement::identity(spec)
        .map_err(|e| Outcome::Usage(e.to_string()))?;
    for (pos, token) in tokens.iter().enumerate() {
        let step = (|| -> Result<MotionElement, String> {
            let (base, exp) = split_exponent(token)?;
            let gen = parse_generator(spec, base)?;
            gen.pow(exp).map_err(|e| e.to_string())
        })()
        .map_err(|msg| Outcome::Usage(format!("token {} ('{token}'): {msg}", pos + 1)))?;
        acc = multiply(&acc, &step).map_err(|e| Outcome::Usage(e.to_string()))?;
    }
    Ok(acc)
}

fn render_cycles(p: &Perm) -> String {
    if p.is_identity() {
        return "identity".into();
    }
    let n = p.len();
    let mut seen = vec![false; n];
    let mut out = String::new();
    for start in 0..n {
        if seen[start] || p.apply(start) == start {
            continue;
        }
        let mut cycle = vec![start];
        seen[start] = true;
        let mut cur = p.apply(start);
        while cur != start {
            seen[cur] = true;
            cycle.push(cur);
            cur = p.apply(cur);
        }
        let rendered: Vec<String> = cycle.iter().map(|v| (v + 1).to_string()).collect();
        let _ = write!(out, "({})", rendered.join(" "));
    }
    out
}

fn run_dahm(spec: &Arc<LinkSpec>, expr: &str) -> Result<Outcome, Outcome> {
    let x = parse_element(spec, expr)?;
    let aut = x.dahm().map_err(|e| Outcome::Usage(e.to_string()))?;
    let hctx = spec.complement_product();
    let mut out = String::new();
    let _ = writeln!(out, "pi: {}", render_cycles(aut.factor_perm()));
    for i in 0..spec.piece_count() {
        let names = spec.pieces()[i].complement.generator_names();
        for (k, name) in names.iter().enumerate() {
            let gen = hctx.generator(i, k).map_err(|e| Outcome::Usage(e.to_string()))?;
            let image = aut
                .apply_element(&gen)
                .map_err(|e| Outcome::Usage(e.to_string()))?;
            let _ = writeln!(out, "{name} -> {}", hctx.display_word(&image));
        }
    }
    Ok(Outcome::Success(out))
}

pub fn execute(cli: Cli) -> Outcome {
    match run(cli) {
        Ok(outcome) | Err(outcome) => outcome,
    }
}

fn run(cli: Cli) -> Result<Outcome, Outcome> {
    match cli.command {
        Command::Present { spec, json } => {
            let spec = load_spec(&spec)?;
            let p = present(&spec).map_err(|e| Outcome::InvalidSpec(e.to_string()))?;
            if json {
                let doc = serde_json::json!({
                    "generators": p.generators,
                    "relators": p.relators.iter().map(|r| p.relator_display(r)).collect::<Vec<_>>(),
                    "complete": p.complete,
                });
                let body = serde_json::to_string_pretty(&doc)
                    .expect("presentation serializes");
                Ok(Outcome::Success(format!("{body}\n")))
            } else {
                let mut out = String::new();
                for g in &p.generators {
                    let _ = writeln!(out, "gen: {g}");
                }
                for r in &p.relators {
                    let _ = writeln!(out, "rel: {}", p.relator_display(r));
                }
                let _ = writeln!(out, "complete: {}", p.complete);
                Ok(Outcome::Success(out))
            }
        }
        Command::Mul { spec, exprs } => {
            let spec = load_spec(&spec)?;
            let mut acc = MotionElement::identity(&spec)
                .map_err(|e| Outcome::Usage(e.to_string()))?;
            for expr in &exprs {
                let x = parse_element(&spec, expr)?;
                acc = multiply(&acc, &x).map_err(|e| Outcome::Usage(e.to_string()))?;
            }
            Ok(Outcome::Success(format!("{}\n", acc.display())))
        }
        Command::Eq { spec, a, b } => {
            let spec = load_spec(&spec)?;
            let x = parse_element(&spec, &a)?;
            let y = parse_element(&spec, &b)?;
            let same = equals(&x, &y).map_err(|e| Outcome::Usage(e.to_string()))?;
            Ok(answer(same))
        }
        Command::EqS3 { spec, a, b } => {
            let spec = load_spec(&spec)?;
            let x = parse_element(&spec, &a)?;
            let y = parse_element(&spec, &b)?;
            let same = equals_in_s3(&x, &y).map_err(|e| Outcome::Usage(e.to_string()))?;
            Ok(answer(same))
        }
        Command::Dahm { spec, expr } => {
            let spec = load_spec(&spec)?;
            run_dahm(&spec, &expr)
        }
        Command::Ltrees { n } => {
            if n == 0 {
                return Err(Outcome::Usage("n must be at least 1".into()));
            }
            let mut out = String::new();
            for t in ltree::enumerate(n) {
                let _ = writeln!(out, "{t}");
            }
            Ok(Outcome::Success(out))
        }
        Command::TreeGens { spec, tree } => {
            let spec = load_spec(&spec)?;
            let t: ltree::LTree = tree
                .parse()
                .map_err(|e: ltree::LtreeError| Outcome::Usage(e.to_string()))?;
            let gens = ltree::tree_motion_generators(&t, &spec)
                .map_err(|e| Outcome::Usage(e.to_string()))?;
            let mut out = String::new();
            for g in &gens {
                let _ = writeln!(out, "{}", g.display());
            }
            Ok(Outcome::Success(out))
        }
        Command::Probe { spec, mode, bound } => {
            let spec = load_spec(&spec)?;
            let mode = match mode {
                Mode::R3 => ProbeMode::R3,
                Mode::S3 => ProbeMode::S3,
            };
            let result = finiteness_probe(&spec, mode, bound)
                .map_err(|e| Outcome::Usage(e.to_string()))?;
            match result {
                ProbeResult::Closed { order, .. } => {
                    Ok(Outcome::Success(format!("Closed order={order}\n")))
                }
                ProbeResult::ExceededBound { bound } => {
                    Ok(Outcome::False(format!("ExceededBound bound={bound}\n")))
                }
            }
        }
        Command::Validate { spec } => {
            let raw = std::fs::read_to_string(&spec)
                .map_err(|e| Outcome::Usage(format!("cannot read {}: {e}", spec.display())))?;
            let parsed = LinkSpec::from_json(&raw)
                .map_err(|e| Outcome::InvalidSpec(format!("invalid spec: {e}")))?;
            let report = parsed.validate();
            if report.is_ok() {
                Ok(Outcome::Success("ok\n".into()))
            } else {
                Ok(Outcome::InvalidSpec(format!("{report}\n")))
            }
        }
    }
}

fn answer(b: bool) -> Outcome {
    if b {
        Outcome::Success("true\n".into())
    } else {
        Outcome::False("false\n".into())
    }
}
