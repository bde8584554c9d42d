//! Lexicographic path order over the seven-symbol signature.
//!
//! LPO orients every KO7 rule once a suitable precedence is fixed, because
//! its subterm clause makes `f(.., t, ..) > t` hold unconditionally.

use std::fmt;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::rewrite::{RelationKind, StepWitness};
use crate::term::{enumerate, Symbol, Term};

/// Total order on the constructor symbols; higher rank is greater.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Precedence {
    rank: [u8; 7],
}

impl Default for Precedence {
    /// void < delta < integrate < merge < app < eqw < rec
    fn default() -> Self {
        Precedence::from_ascending(&[
            Symbol::Void,
            Symbol::Delta,
            Symbol::Integrate,
            Symbol::Merge,
            Symbol::App,
            Symbol::EqW,
            Symbol::RecD,
        ])
    }
}

impl Precedence {
    /// Builds a precedence from the symbols listed smallest first.
    ///
    /// Panics unless `order` is a permutation of all seven symbols.
    pub fn from_ascending(order: &[Symbol]) -> Self {
        assert_eq!(order.len(), 7, "precedence must list all seven symbols");
        let mut rank = [u8::MAX; 7];
        for (r, s) in order.iter().enumerate() {
            assert_eq!(rank[s.index()], u8::MAX, "duplicate symbol {s}");
            rank[s.index()] = r as u8;
        }
        Precedence { rank }
    }

    pub fn rank(&self, s: Symbol) -> u8 {
        self.rank[s.index()]
    }

    pub fn greater(&self, a: Symbol, b: Symbol) -> bool {
        self.rank(a) > self.rank(b)
    }

    /// Symbols smallest first.
    pub fn ascending(&self) -> Vec<Symbol> {
        Symbol::ALL
            .into_iter()
            .sorted_by_key(|s| self.rank(*s))
            .collect()
    }
}

impl fmt::Display for Precedence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}",
            self.ascending().iter().map(|s| s.keyword()).join(" < ")
        )
    }
}

impl Serialize for Precedence {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.ascending().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Precedence {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let order = Vec::<Symbol>::deserialize(deserializer)?;
        if order.len() != 7 || order.iter().unique().count() != 7 {
            return Err(serde::de::Error::custom(
                "precedence must list all seven symbols once",
            ));
        }
        Ok(Precedence::from_ascending(&order))
    }
}

/// `s >lpo t`.
pub fn lpo_greater(s: &Term, t: &Term, prec: &Precedence) -> bool {
    if s == t {
        return false;
    }
    let ss = s.children();
    // subterm clause: some argument is >= t
    if ss.iter().any(|si| *si == t || lpo_greater(si, t, prec)) {
        return true;
    }
    let ts = t.children();
    let dominates_args = || ts.iter().all(|tj| lpo_greater(s, tj, prec));
    let (f, g) = (s.symbol(), t.symbol());
    if prec.greater(f, g) {
        return dominates_args();
    }
    if f == g {
        // same head: first differing argument decides
        if let Some((a, b)) = ss.iter().zip(&ts).find(|(a, b)| a != b) {
            return lpo_greater(a, b, prec) && dominates_args();
        }
    }
    false
}

/// First rule instance not oriented left-to-right, or `None` if all are.
pub fn first_unoriented<'a>(
    prec: &Precedence,
    instances: impl IntoIterator<Item = &'a StepWitness>,
) -> Option<&'a StepWitness> {
    instances
        .into_iter()
        .find(|w| !lpo_greater(&w.source, &w.result, prec))
}

/// All unguarded root rule instances over terms up to `max_size`.
pub fn rule_instances(max_size: usize) -> Vec<StepWitness> {
    enumerate(max_size)
        .iter()
        .flat_map(|t| RelationKind::FullRoot.steps(t))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrecedenceSearch {
    #[serde(rename = "maxSize")]
    pub max_size: usize,
    pub instances: usize,
    pub tried: usize,
    /// Number of precedences orienting every instance.
    pub orienting: usize,
    /// First orienting precedence in search order.
    pub found: Option<Precedence>,
}

/// Scans all 5040 precedences for ones under which LPO orients every rule
/// instance up to `max_size`.
pub fn search_precedence_report(max_size: usize) -> PrecedenceSearch {
    let inst = rule_instances(max_size);
    let mut tried = 0;
    let mut orienting = 0;
    let mut found = None;
    for perm in Symbol::ALL.into_iter().permutations(7) {
        tried += 1;
        let prec = Precedence::from_ascending(&perm);
        if first_unoriented(&prec, &inst).is_none() {
            orienting += 1;
            found.get_or_insert(prec);
        }
    }
    PrecedenceSearch {
        max_size,
        instances: inst.len(),
        tried,
        orienting,
        found,
    }
}

pub const LPO_MAX_SIZE: usize = 5;

pub fn search_precedence() -> Option<Precedence> {
    search_precedence_report(LPO_MAX_SIZE).found
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::{app, delta, merge, rec, void};

    #[test]
    fn subterm_clause() {
        let t = delta(void());
        for perm in Symbol::ALL.into_iter().permutations(7).step_by(97) {
            let p = Precedence::from_ascending(&perm);
            assert!(lpo_greater(&merge(t.clone(), t.clone()), &t, &p));
            assert!(!lpo_greater(&t, &t, &p));
        }
    }

    #[test]
    fn default_precedence_orients_every_rule() {
        let inst = rule_instances(6);
        assert_eq!(first_unoriented(&Precedence::default(), &inst), None);
    }

    #[test]
    fn rec_must_beat_app() {
        let p = Precedence::from_ascending(&[
            Symbol::Void,
            Symbol::Delta,
            Symbol::Integrate,
            Symbol::Merge,
            Symbol::RecD,
            Symbol::App,
            Symbol::EqW,
        ]);
        let lhs = rec(void(), void(), delta(void()));
        let rhs = app(void(), rec(void(), void(), void()));
        assert!(!lpo_greater(&lhs, &rhs, &p));
        assert!(lpo_greater(&lhs, &rhs, &Precedence::default()));
    }

    #[test]
    fn lpo_is_irreflexive_and_asymmetric_on_samples() {
        let terms = enumerate(4);
        let p = Precedence::default();
        for a in &terms {
            assert!(!lpo_greater(a, a, &p));
            for b in &terms {
                assert!(!(lpo_greater(a, b, &p) && lpo_greater(b, a, &p)), "{a} {b}");
            }
        }
    }

    #[test]
    fn search_finds_a_precedence() {
        let r = search_precedence_report(LPO_MAX_SIZE);
        assert_eq!(r.tried, 5040);
        let p = r.found.expect("some precedence orients KO7");
        assert!(p.greater(Symbol::RecD, Symbol::App));
        assert!(p.greater(Symbol::EqW, Symbol::Integrate));
        assert!(p.greater(Symbol::EqW, Symbol::Merge));
    }

    #[test]
    fn precedence_json_roundtrip() {
        let p = Precedence::default();
        let j = serde_json::to_string(&p).unwrap();
        assert_eq!(
            j,
            r#"["void","delta","integrate","merge","app","eqw","rec"]"#
        );
        assert_eq!(serde_json::from_str::<Precedence>(&j).unwrap(), p);
        assert!(serde_json::from_str::<Precedence>(r#"["void"]"#).is_err());
    }
}
