//! The triple-lexicographic termination measure `(delta flag, kappa multiset, tau)`.
//!
//! `delta_flag` is a root-shape bit, `kappa_m` collects the tau weight of every
//! rec-rooted occurrence and is compared with the Dershowitz–Manna multiset
//! order, and `tau` is a weighted node count that breaks the remaining ties.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::rewrite::{root_steps_safe, RuleId, StepWitness};
use crate::term::{enumerate, Term};

/// Finite multiset of naturals.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct NatMultiset {
    counts: BTreeMap<u64, usize>,
}

impl NatMultiset {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, x: u64) {
        *self.counts.entry(x).or_insert(0) += 1;
    }

    pub fn multiplicity(&self, x: u64) -> usize {
        self.counts.get(&x).copied().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.counts.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Elements in ascending order, repeated by multiplicity.
    pub fn to_vec(&self) -> Vec<u64> {
        self.counts
            .iter()
            .flat_map(|(&x, &m)| std::iter::repeat_n(x, m))
            .collect()
    }

    pub fn max(&self) -> Option<u64> {
        self.counts.keys().next_back().copied()
    }

    /// Multiset sum.
    pub fn union(&self, other: &NatMultiset) -> NatMultiset {
        let mut out = self.clone();
        for (&x, &m) in &other.counts {
            *out.counts.entry(x).or_insert(0) += m;
        }
        out
    }

    /// Multiset difference `self - other` (truncated at zero).
    pub fn difference(&self, other: &NatMultiset) -> NatMultiset {
        let counts = self
            .counts
            .iter()
            .filter_map(|(&x, &m)| {
                let left = m.saturating_sub(other.multiplicity(x));
                (left > 0).then_some((x, left))
            })
            .collect();
        NatMultiset { counts }
    }

    pub fn is_submultiset_of(&self, other: &NatMultiset) -> bool {
        self.counts
            .iter()
            .all(|(&x, &m)| other.multiplicity(x) >= m)
    }

    /// Strict sub-multiset: the "naive" multiset order.
    pub fn is_proper_submultiset_of(&self, other: &NatMultiset) -> bool {
        self != other && self.is_submultiset_of(other)
    }
}

impl FromIterator<u64> for NatMultiset {
    fn from_iter<I: IntoIterator<Item = u64>>(iter: I) -> Self {
        let mut m = NatMultiset::new();
        for x in iter {
            m.insert(x);
        }
        m
    }
}

impl fmt::Debug for NatMultiset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for NatMultiset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, x) in self.to_vec().iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, "}}")
    }
}

impl Serialize for NatMultiset {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_vec().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for NatMultiset {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        Ok(Vec::<u64>::deserialize(deserializer)?.into_iter().collect())
    }
}

/// Dershowitz–Manna order: `x < y` iff `x = (y - Z) + W` with `Z` nonempty
/// and every element of `W` below some element of `Z`.
///
/// Taking `Z = y - x` and `W = x - y` is the minimal decomposition; any other
/// valid one differs by a common part that cancels.
pub fn dm_less(x: &NatMultiset, y: &NatMultiset) -> bool {
    let removed = y.difference(x);
    let added = x.difference(y);
    let Some(top) = removed.max() else {
        return false;
    };
    added.max().is_none_or(|w| w < top)
}

/// 1 iff `t` is `(rec _ _ (delta _))`.
pub fn delta_flag(t: &Term) -> u8 {
    match t {
        Term::RecD(_, _, arg) if matches!(**arg, Term::Delta(_)) => 1,
        _ => 0,
    }
}

/// Whether any subterm occurrence is rec-rooted, i.e. `kappa_m(t)` is nonempty.
pub fn has_rec(t: &Term) -> bool {
    match t {
        Term::RecD(..) => true,
        _ => t.children().into_iter().any(has_rec),
    }
}

/// Weighted node count; eqw nodes weigh 3, every other node 1.
pub fn tau(t: &Term) -> u64 {
    let own = match t {
        Term::EqW(..) => 3,
        _ => 1,
    };
    own + t.children().into_iter().map(tau).sum::<u64>()
}

/// `{ tau(u) | u a rec-rooted subterm occurrence of t }`.
pub fn kappa_m(t: &Term) -> NatMultiset {
    t.subterms()
        .into_iter()
        .filter(|u| matches!(u, Term::RecD(..)))
        .map(tau)
        .collect()
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Measure3 {
    pub dflag: u8,
    pub kappa_m: NatMultiset,
    pub tau: u64,
}

impl Measure3 {
    pub fn new(dflag: u8, kappa_m: impl IntoIterator<Item = u64>, tau: u64) -> Self {
        Measure3 {
            dflag,
            kappa_m: kappa_m.into_iter().collect(),
            tau,
        }
    }
}

pub fn measure3(t: &Term) -> Measure3 {
    Measure3 {
        dflag: delta_flag(t),
        kappa_m: kappa_m(t),
        tau: tau(t),
    }
}

/// Strict lexicographic order on (flag, multiset under DM, tau).
pub fn lex3_less(a: &Measure3, b: &Measure3) -> bool {
    deciding_component(a, b).is_some()
}

/// Which component makes `after < before`, or `None` if it does not hold.
pub fn deciding_component(after: &Measure3, before: &Measure3) -> Option<Component> {
    if after.dflag != before.dflag {
        return (after.dflag < before.dflag).then_some(Component::Dflag);
    }
    if after.kappa_m != before.kappa_m {
        return dm_less(&after.kappa_m, &before.kappa_m).then_some(Component::KappaM);
    }
    (after.tau < before.tau).then_some(Component::Tau)
}

impl fmt::Debug for Measure3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Measure3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.dflag, self.kappa_m, self.tau)
    }
}

// JSON form is the array `[d, [k...], t]`.
impl Serialize for Measure3 {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        (self.dflag, &self.kappa_m, self.tau).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Measure3 {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let (dflag, kappa_m, tau) = <(u8, NatMultiset, u64)>::deserialize(deserializer)?;
        Ok(Measure3 {
            dflag,
            kappa_m,
            tau,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Component {
    #[serde(rename = "dflag")]
    Dflag,
    #[serde(rename = "kappaM")]
    KappaM,
    #[serde(rename = "tau")]
    Tau,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentCounts {
    pub dflag: usize,
    #[serde(rename = "kappaM")]
    pub kappa_m: usize,
    pub tau: usize,
}

impl ComponentCounts {
    fn bump(&mut self, c: Component) {
        match c {
            Component::Dflag => self.dflag += 1,
            Component::KappaM => self.kappa_m += 1,
            Component::Tau => self.tau += 1,
        }
    }

    fn add(&mut self, other: &ComponentCounts) {
        self.dflag += other.dflag;
        self.kappa_m += other.kappa_m;
        self.tau += other.tau;
    }

    pub fn total(&self) -> usize {
        self.dflag + self.kappa_m + self.tau
    }
}

/// Outcome of checking every root safe step over an enumeration.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DecreaseReport {
    #[serde(rename = "maxSize")]
    pub max_size: usize,
    pub checked: usize,
    pub violations: Vec<StepWitness>,
    #[serde(rename = "decidedBy")]
    pub decided_by: ComponentCounts,
    #[serde(rename = "perRule")]
    pub per_rule: BTreeMap<RuleId, ComponentCounts>,
}

impl DecreaseReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    /// Associative merge of two partial reports.
    pub fn merge(mut self, other: DecreaseReport) -> DecreaseReport {
        self.max_size = self.max_size.max(other.max_size);
        self.checked += other.checked;
        self.violations.extend(other.violations);
        self.decided_by.add(&other.decided_by);
        for (rule, counts) in other.per_rule {
            self.per_rule.entry(rule).or_default().add(&counts);
        }
        self
    }

    fn record(&mut self, w: StepWitness) {
        self.checked += 1;
        match deciding_component(&measure3(&w.result), &measure3(&w.source)) {
            Some(c) => {
                self.decided_by.bump(c);
                self.per_rule.entry(w.rule).or_default().bump(c);
            }
            None => self.violations.push(w),
        }
    }
}

/// Checks `measure3(result) < measure3(source)` for every root safe step of
/// every term up to `max_size`.
pub fn check_decrease_sweep(max_size: usize) -> DecreaseReport {
    let terms = enumerate(max_size);
    let partials: Vec<DecreaseReport> = terms
        .par_iter()
        .map(|t| {
            let mut r = DecreaseReport::default();
            for w in root_steps_safe(t) {
                r.record(w);
            }
            r
        })
        .collect();
    let mut report = partials
        .into_iter()
        .fold(DecreaseReport::default(), DecreaseReport::merge);
    report.max_size = max_size;
    report
}
