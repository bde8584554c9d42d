//! The KO7 term algebra.
//!
//! Seven constructors, no variables and no binders. Terms are plain owned
//! trees; equality is structural and is the equality consulted by every
//! rule guard.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// A KO7 term.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Void,
    Delta(Box<Term>),
    Integrate(Box<Term>),
    Merge(Box<Term>, Box<Term>),
    App(Box<Term>, Box<Term>),
    RecD(Box<Term>, Box<Term>, Box<Term>),
    EqW(Box<Term>, Box<Term>),
}

/// Constructor symbols, in the fixed order used by enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Symbol {
    Void,
    Delta,
    Integrate,
    Merge,
    App,
    #[serde(rename = "rec")]
    RecD,
    #[serde(rename = "eqw")]
    EqW,
}

impl Symbol {
    pub const ALL: [Symbol; 7] = [
        Symbol::Void,
        Symbol::Delta,
        Symbol::Integrate,
        Symbol::Merge,
        Symbol::App,
        Symbol::RecD,
        Symbol::EqW,
    ];

    pub fn arity(self) -> usize {
        match self {
            Symbol::Void => 0,
            Symbol::Delta | Symbol::Integrate => 1,
            Symbol::Merge | Symbol::App | Symbol::EqW => 2,
            Symbol::RecD => 3,
        }
    }

    /// Surface-syntax keyword.
    pub fn keyword(self) -> &'static str {
        match self {
            Symbol::Void => "void",
            Symbol::Delta => "delta",
            Symbol::Integrate => "integrate",
            Symbol::Merge => "merge",
            Symbol::App => "app",
            Symbol::RecD => "rec",
            Symbol::EqW => "eqw",
        }
    }

    pub fn from_keyword(word: &str) -> Option<Symbol> {
        Symbol::ALL.into_iter().find(|s| s.keyword() == word)
    }

    pub fn index(self) -> usize {
        self as usize
    }

    /// Builds a term from this symbol and exactly `arity()` children.
    pub fn build(self, mut children: Vec<Term>) -> Term {
        assert_eq!(
            children.len(),
            self.arity(),
            "arity mismatch for {}",
            self.keyword()
        );
        let mut next = || Box::new(children.remove(0));
        match self {
            Symbol::Void => Term::Void,
            Symbol::Delta => Term::Delta(next()),
            Symbol::Integrate => Term::Integrate(next()),
            Symbol::Merge => {
                let a = next();
                Term::Merge(a, next())
            }
            Symbol::App => {
                let a = next();
                Term::App(a, next())
            }
            Symbol::RecD => {
                let b = next();
                let s = next();
                Term::RecD(b, s, next())
            }
            Symbol::EqW => {
                let a = next();
                Term::EqW(a, next())
            }
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

// Smart constructors. These keep test code and rule right-hand sides legible.

pub fn void() -> Term {
    Term::Void
}

pub fn delta(t: Term) -> Term {
    Term::Delta(Box::new(t))
}

pub fn integrate(t: Term) -> Term {
    Term::Integrate(Box::new(t))
}

pub fn merge(a: Term, b: Term) -> Term {
    Term::Merge(Box::new(a), Box::new(b))
}

pub fn app(a: Term, b: Term) -> Term {
    Term::App(Box::new(a), Box::new(b))
}

pub fn rec(base: Term, step: Term, arg: Term) -> Term {
    Term::RecD(Box::new(base), Box::new(step), Box::new(arg))
}

pub fn eqw(a: Term, b: Term) -> Term {
    Term::EqW(Box::new(a), Box::new(b))
}

impl Term {
    pub fn symbol(&self) -> Symbol {
        match self {
            Term::Void => Symbol::Void,
            Term::Delta(_) => Symbol::Delta,
            Term::Integrate(_) => Symbol::Integrate,
            Term::Merge(..) => Symbol::Merge,
            Term::App(..) => Symbol::App,
            Term::RecD(..) => Symbol::RecD,
            Term::EqW(..) => Symbol::EqW,
        }
    }

    pub fn children(&self) -> Vec<&Term> {
        match self {
            Term::Void => vec![],
            Term::Delta(c) | Term::Integrate(c) => vec![c],
            Term::Merge(a, b) | Term::App(a, b) | Term::EqW(a, b) => vec![a, b],
            Term::RecD(b, s, n) => vec![b, s, n],
        }
    }

    fn child_mut(&mut self, index: usize) -> Option<&mut Term> {
        let child = match (self, index) {
            (Term::Delta(c) | Term::Integrate(c), 0) => c,
            (Term::Merge(a, _) | Term::App(a, _) | Term::EqW(a, _), 0) => a,
            (Term::Merge(_, b) | Term::App(_, b) | Term::EqW(_, b), 1) => b,
            (Term::RecD(b, _, _), 0) => b,
            (Term::RecD(_, s, _), 1) => s,
            (Term::RecD(_, _, n), 2) => n,
            _ => return None,
        };
        Some(child)
    }

    /// Number of constructor nodes.
    pub fn size(&self) -> usize {
        1 + self.children().into_iter().map(Term::size).sum::<usize>()
    }

    /// Length of the longest root-to-leaf path, counting nodes.
    pub fn depth(&self) -> usize {
        1 + self
            .children()
            .into_iter()
            .map(Term::depth)
            .max()
            .unwrap_or(0)
    }

    /// Pre-order walk over every subterm occurrence, root first.
    pub fn subterms(&self) -> Vec<&Term> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(t) = stack.pop() {
            out.push(t);
            stack.extend(t.children().into_iter().rev());
        }
        out
    }

    pub fn subterm_at(&self, pos: &Position) -> Result<&Term, PositionError> {
        let mut cur = self;
        for (depth, &i) in pos.0.iter().enumerate() {
            cur = *cur
                .children()
                .get(i)
                .ok_or(PositionError { index: i, depth })?;
        }
        Ok(cur)
    }

    /// Functional replacement of the subterm at `pos`.
    pub fn replace_at(&self, pos: &Position, u: Term) -> Result<Term, PositionError> {
        let mut out = self.clone();
        let mut cur = &mut out;
        for (depth, &i) in pos.0.iter().enumerate() {
            cur = cur.child_mut(i).ok_or(PositionError { index: i, depth })?;
        }
        *cur = u;
        Ok(out)
    }

    /// Canonical surface syntax.
    pub fn render(&self) -> String {
        self.to_string()
    }

    pub fn contains_symbol(&self, sym: Symbol) -> bool {
        self.subterms().into_iter().any(|t| t.symbol() == sym)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Term::Void = self {
            return f.write_str("void");
        }
        write!(f, "({}", self.symbol().keyword())?;
        for c in self.children() {
            write!(f, " {c}")?;
        }
        f.write_str(")")
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Path of 0-based child indices from the root.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Position(pub Vec<usize>);

impl Position {
    pub fn root() -> Self {
        Position(Vec::new())
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    /// `self` with `index` prepended, i.e. the position one level further up.
    pub fn under(&self, index: usize) -> Position {
        let mut path = Vec::with_capacity(self.0.len() + 1);
        path.push(index);
        path.extend_from_slice(&self.0);
        Position(path)
    }
}

impl From<Vec<usize>> for Position {
    fn from(path: Vec<usize>) -> Self {
        Position(path)
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, idx) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{idx}")?;
        }
        write!(f, "]")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("invalid position: no child {index} at depth {depth}")]
pub struct PositionError {
    /// The first offending child index.
    pub index: usize,
    pub depth: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error(
        "arity error at byte {offset}: `{constructor}` takes {expected} argument(s), found {found}"
    )]
    Arity {
        offset: usize,
        constructor: &'static str,
        expected: usize,
        found: usize,
    },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. } | ParseError::Arity { offset, .. } => *offset,
        }
    }
}

/// Parses the S-expression surface syntax.
pub fn parse(text: &str) -> Result<Term, ParseError> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    let t = p.term()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.syntax("trailing input after term"));
    }
    Ok(t)
}

impl FromStr for Term {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn syntax(&self, message: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            offset: self.pos,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn word(&mut self) -> &str {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
            self.pos += 1;
        }
        // Only ASCII alphanumerics were consumed.
        std::str::from_utf8(&self.src[start..self.pos]).unwrap_or_default()
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        self.skip_ws();
        let start = self.pos;
        match self.src.get(self.pos) {
            None => Err(self.syntax("unexpected end of input, expected a term")),
            Some(b'(') => {
                self.pos += 1;
                self.skip_ws();
                let kw_at = self.pos;
                let word = self.word().to_owned();
                let sym = match Symbol::from_keyword(&word) {
                    Some(Symbol::Void) => {
                        return Err(ParseError::Syntax {
                            offset: kw_at,
                            message: "`void` is atomic and must not be parenthesized".into(),
                        })
                    }
                    Some(sym) => sym,
                    None if word.is_empty() => {
                        self.pos = kw_at;
                        return Err(self.syntax("expected a constructor keyword"));
                    }
                    None => {
                        return Err(ParseError::Syntax {
                            offset: kw_at,
                            message: format!("unknown constructor `{word}`"),
                        })
                    }
                };
                let mut children = Vec::new();
                loop {
                    self.skip_ws();
                    match self.src.get(self.pos) {
                        Some(b')') => {
                            self.pos += 1;
                            break;
                        }
                        None => return Err(self.syntax("unexpected end of input, expected `)`")),
                        Some(_) => children.push(self.term()?),
                    }
                }
                if children.len() != sym.arity() {
                    return Err(ParseError::Arity {
                        offset: start,
                        constructor: sym.keyword(),
                        expected: sym.arity(),
                        found: children.len(),
                    });
                }
                Ok(sym.build(children))
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let word = self.word().to_owned();
                match Symbol::from_keyword(&word) {
                    Some(Symbol::Void) => Ok(Term::Void),
                    Some(sym) => Err(ParseError::Arity {
                        offset: start,
                        constructor: sym.keyword(),
                        expected: sym.arity(),
                        found: 0,
                    }),
                    None => Err(ParseError::Syntax {
                        offset: start,
                        message: format!("unknown atom `{word}`"),
                    }),
                }
            }
            Some(&c) => Err(self.syntax(format!("unexpected character `{}`", c as char))),
        }
    }
}

/// All terms of size at most `max_size`, each exactly once.
///
/// Order: by size, then constructor (`Symbol` order), then children compared
/// left to right in this same order.
pub fn enumerate(max_size: usize) -> Vec<Term> {
    enumerate_by_size(max_size).into_iter().flatten().collect()
}

/// `levels[n]` holds every term of size exactly `n` (`levels[0]` is empty).
pub fn enumerate_by_size(max_size: usize) -> Vec<Vec<Term>> {
    let mut levels: Vec<Vec<Term>> = vec![Vec::new()];
    for n in 1..=max_size {
        let mut level = Vec::new();
        for sym in Symbol::ALL {
            let arity = sym.arity();
            if arity == 0 {
                if n == 1 {
                    level.push(Term::Void);
                }
                continue;
            }
            if n < arity + 1 {
                continue;
            }
            push_children(&levels, n - 1, arity, &mut Vec::new(), sym, &mut level);
        }
        levels.push(level);
    }
    levels
}

/// Emits `sym(children)` for every child tuple of total size `budget`, with
/// children chosen left to right in enumeration order.
fn push_children(
    levels: &[Vec<Term>],
    budget: usize,
    remaining: usize,
    prefix: &mut Vec<Term>,
    sym: Symbol,
    out: &mut Vec<Term>,
) {
    if remaining == 0 {
        if budget == 0 {
            out.push(sym.build(prefix.clone()));
        }
        return;
    }
    let sizes = if remaining == 1 {
        budget..=budget
    } else {
        1..=budget.saturating_sub(remaining - 1)
    };
    for size in sizes {
        for t in &levels[size] {
            prefix.push(t.clone());
            push_children(levels, budget - size, remaining - 1, prefix, sym, out);
            prefix.pop();
        }
    }
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    k: Symbol,
    c: Vec<TermJson>,
}

impl From<&Term> for TermJson {
    fn from(t: &Term) -> Self {
        TermJson {
            k: t.symbol(),
            c: t.children().into_iter().map(TermJson::from).collect(),
        }
    }
}

impl TryFrom<TermJson> for Term {
    type Error = String;

    fn try_from(j: TermJson) -> Result<Self, Self::Error> {
        if j.c.len() != j.k.arity() {
            return Err(format!(
                "`{}` takes {} children, found {}",
                j.k,
                j.k.arity(),
                j.c.len()
            ));
        }
        let children =
            j.c.into_iter()
                .map(Term::try_from)
                .collect::<Result<Vec<_>, _>>()?;
        Ok(j.k.build(children))
    }
}

impl Serialize for Term {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        TermJson::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Term {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let j = TermJson::deserialize(deserializer)?;
        Term::try_from(j).map_err(serde::de::Error::custom)
    }
}
