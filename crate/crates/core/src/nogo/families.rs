//! Candidate termination measures and the counterexample hunter.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::measure::{delta_flag, dm_less, lex3_less, measure3, Measure3, NatMultiset};
use crate::rewrite::{RelationKind, RuleId, StepWitness};
use crate::term::{enumerate, Term};

use super::lpo::Precedence;
use super::search::{LinearInterpretation, WeightAssignment};

/// Value of a candidate measure on one term.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Value {
    Nat(u64),
    Pair(u64, u64),
    Multiset(NatMultiset),
    Bit(u8),
    Triple(Measure3),
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Nat(n) => write!(f, "{n}"),
            Value::Pair(a, b) => write!(f, "({a}, {b})"),
            Value::Multiset(m) => write!(f, "{m}"),
            Value::Bit(b) => write!(f, "{b}"),
            Value::Triple(m) => write!(f, "{m}"),
        }
    }
}

/// Strict order a family compares its values with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrderKind {
    /// `<` on naturals (also used for bits).
    Nat,
    /// Lexicographic `<` on pairs of naturals.
    LexPair,
    /// Proper sub-multiset.
    SubMultiset,
    /// Dershowitz–Manna multiset order.
    Dm,
    /// Lexicographic (flag, DM multiset, natural).
    Lex3,
}

impl OrderKind {
    /// `a < b`. Values of the wrong kind are incomparable.
    pub fn less(self, a: &Value, b: &Value) -> bool {
        match (self, a, b) {
            (OrderKind::Nat, Value::Nat(x), Value::Nat(y)) => x < y,
            (OrderKind::Nat, Value::Bit(x), Value::Bit(y)) => x < y,
            (OrderKind::LexPair, Value::Pair(a1, a2), Value::Pair(b1, b2)) => (a1, a2) < (b1, b2),
            (OrderKind::SubMultiset, Value::Multiset(x), Value::Multiset(y)) => {
                x.is_proper_submultiset_of(y)
            }
            (OrderKind::Dm, Value::Multiset(x), Value::Multiset(y)) => dm_less(x, y),
            (OrderKind::Lex3, Value::Triple(x), Value::Triple(y)) => lex3_less(x, y),
            _ => false,
        }
    }
}

type Valuation = Arc<dyn Fn(&Term) -> Value + Send + Sync>;

/// A named candidate termination measure: a valuation plus a strict order.
#[derive(Clone)]
pub struct MeasureFamily {
    /// Item number in the failure catalog; 0 for measures outside it.
    pub id: u8,
    pub name: String,
    pub description: String,
    pub order: OrderKind,
    /// Rule the family's failure is attributed to; the hunter only looks at
    /// instances of this rule when set.
    pub focus: Option<RuleId>,
    valuation: Valuation,
}

impl fmt::Debug for MeasureFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MeasureFamily")
            .field("id", &self.id)
            .field("name", &self.name)
            .field("order", &self.order)
            .field("focus", &self.focus)
            .finish()
    }
}

impl MeasureFamily {
    pub fn new(
        name: impl Into<String>,
        order: OrderKind,
        valuation: impl Fn(&Term) -> Value + Send + Sync + 'static,
    ) -> Self {
        MeasureFamily {
            id: 0,
            name: name.into(),
            description: String::new(),
            order,
            focus: None,
            valuation: Arc::new(valuation),
        }
    }

    fn catalogued(mut self, id: u8, description: &str, focus: Option<RuleId>) -> Self {
        self.id = id;
        self.description = description.to_owned();
        self.focus = focus;
        self
    }

    pub fn with_focus(mut self, rule: RuleId) -> Self {
        self.focus = Some(rule);
        self
    }

    pub fn value(&self, t: &Term) -> Value {
        (self.valuation)(t)
    }

    pub fn less(&self, a: &Value, b: &Value) -> bool {
        self.order.less(a, b)
    }

    /// `None` if the step strictly decreases the measure, else the verdict.
    pub fn judge(&self, w: &StepWitness) -> Option<(Value, Value, Verdict)> {
        let before = self.value(&w.source);
        let after = self.value(&w.result);
        if self.less(&after, &before) {
            return None;
        }
        let verdict = if self.less(&before, &after) {
            Verdict::Increase
        } else {
            Verdict::NoStrictDrop
        };
        Some((before, after, verdict))
    }
}

/// Delta-nesting depth: only delta nodes count.
pub fn kappa_depth(t: &Term) -> u64 {
    let below = t.children().into_iter().map(kappa_depth).max().unwrap_or(0);
    match t {
        Term::Delta(_) => 1 + below,
        _ => below,
    }
}

/// Multiset of the sizes of every subterm occurrence.
pub fn node_size_multiset(t: &Term) -> NatMultiset {
    t.subterms().into_iter().map(|u| u.size() as u64).collect()
}

/// `kappa_depth + k`.
pub fn additive_kappa(k: u64) -> MeasureFamily {
    MeasureFamily::new(format!("additive-kappa+{k}"), OrderKind::Nat, move |t| {
        Value::Nat(kappa_depth(t) + k)
    })
    .catalogued(
        1,
        "delta-nesting depth plus a fixed constant",
        Some(RuleId::RecSucc),
    )
}

/// The triple-lexicographic measure, as a family for the same hunter.
pub fn canonical_measure() -> MeasureFamily {
    MeasureFamily::new("measure3", OrderKind::Lex3, |t| Value::Triple(measure3(t)))
}

/// The twelve executable failure families, in catalog order.
pub fn catalog() -> Vec<MeasureFamily> {
    let poly = LinearInterpretation::uniform(2, 1);
    let kbo = WeightAssignment::representative();
    let prec = Precedence::default();
    vec![
        additive_kappa(1),
        MeasureFamily::new("lex-kappa-size", OrderKind::LexPair, |t| {
            Value::Pair(kappa_depth(t), t.size() as u64)
        })
        .catalogued(
            2,
            "lexicographic pair (delta depth, size)",
            Some(RuleId::RecSucc),
        ),
        MeasureFamily::new("linear-poly", OrderKind::Nat, move |t| {
            Value::Nat(poly.eval(t) as u64)
        })
        .catalogued(
            3,
            "linear interpretation, every slot coefficient 2, every constant 1",
            Some(RuleId::RecSucc),
        ),
        MeasureFamily::new("delta-flag", OrderKind::Nat, |t| Value::Bit(delta_flag(t))).catalogued(
            4,
            "single delta-flag bit",
            Some(RuleId::MergeVoidLeft),
        ),
        MeasureFamily::new("size", OrderKind::Nat, |t| Value::Nat(t.size() as u64)).catalogued(
            5,
            "node count as a plain ordinal",
            None,
        ),
        MeasureFamily::new("kappa-depth", OrderKind::Nat, |t| {
            Value::Nat(kappa_depth(t))
        })
        .catalogued(6, "delta-nesting depth alone", Some(RuleId::MergeCancel)),
        MeasureFamily::new("naive-multiset", OrderKind::SubMultiset, |t| {
            Value::Multiset(node_size_multiset(t))
        })
        .catalogued(
            7,
            "multiset of subterm sizes under proper sub-multiset",
            Some(RuleId::RecSucc),
        ),
        MeasureFamily::new("hybrid-flag-size", OrderKind::LexPair, |t| {
            Value::Pair(u64::from(delta_flag(t)), t.size() as u64)
        })
        .catalogued(9, "lexicographic pair (delta flag, size)", None),
        MeasureFamily::new("raw-recursion", OrderKind::Nat, |t| {
            Value::Nat(t.size() as u64)
        })
        .catalogued(
            10,
            "size on unguarded rec-succ instances",
            Some(RuleId::RecSucc),
        ),
        MeasureFamily::new("head-precedence", OrderKind::Nat, move |t| {
            Value::Nat(prec.rank(t.symbol()) as u64)
        })
        .catalogued(
            12,
            "rank of the head symbol only",
            Some(RuleId::MergeCancel),
        ),
        MeasureFamily::new("kbo-weight", OrderKind::Nat, move |t| {
            Value::Nat(kbo.weight(t))
        })
        .catalogued(13, "linear symbol-weight sum", Some(RuleId::RecSucc)),
        MeasureFamily::new("tree-depth", OrderKind::Nat, |t| {
            Value::Nat(t.depth() as u64)
        })
        .catalogued(
            14,
            "maximum depth, every node counts",
            Some(RuleId::RecSucc),
        ),
    ]
}

/// Catalog lookup by name or by item number.
pub fn family_by_name(name: &str) -> Option<MeasureFamily> {
    if name == "measure3" {
        return Some(canonical_measure());
    }
    catalog().into_iter().find(|f| {
        f.name == name || f.id.to_string() == name || name == "additive-kappa" && f.id == 1
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    NoStrictDrop,
    Increase,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleReport {
    pub family: String,
    #[serde(flatten)]
    pub witness: StepWitness,
    #[serde(rename = "before")]
    pub value_before: Value,
    #[serde(rename = "after")]
    pub value_after: Value,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status")]
pub enum HuntOutcome {
    Counterexample(CounterexampleReport),
    NoViolation {
        family: String,
        #[serde(rename = "instancesChecked")]
        instances_checked: usize,
        #[serde(rename = "maxSize")]
        max_size: usize,
    },
}

impl HuntOutcome {
    pub fn counterexample(&self) -> Option<&CounterexampleReport> {
        match self {
            HuntOutcome::Counterexample(c) => Some(c),
            HuntOutcome::NoViolation { .. } => None,
        }
    }
}

fn instances(
    family: &MeasureFamily,
    relation: RelationKind,
    max_size: usize,
) -> impl Iterator<Item = StepWitness> + '_ {
    enumerate(max_size)
        .into_iter()
        .flat_map(move |t| relation.steps(&t))
        .filter(move |w| family.focus.is_none_or(|r| r == w.rule))
}

fn report(family: &MeasureFamily, w: StepWitness) -> Option<CounterexampleReport> {
    let (value_before, value_after, verdict) = family.judge(&w)?;
    Some(CounterexampleReport {
        family: family.name.clone(),
        witness: w,
        value_before,
        value_after,
        verdict,
    })
}

/// First rule instance, in enumeration order, on which `family` fails to
/// strictly decrease.
pub fn find_violation(
    family: &MeasureFamily,
    relation: RelationKind,
    max_size: usize,
) -> HuntOutcome {
    let mut checked = 0;
    for w in instances(family, relation, max_size) {
        checked += 1;
        if let Some(c) = report(family, w) {
            return HuntOutcome::Counterexample(c);
        }
    }
    HuntOutcome::NoViolation {
        family: family.name.clone(),
        instances_checked: checked,
        max_size,
    }
}

/// Every failing instance, in enumeration order.
pub fn all_violations(
    family: &MeasureFamily,
    relation: RelationKind,
    max_size: usize,
) -> Vec<CounterexampleReport> {
    instances(family, relation, max_size)
        .filter_map(|w| report(family, w))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KappaTieReport {
    pub witness: Option<StepWitness>,
    #[serde(rename = "kappaBefore")]
    pub kappa_before: u64,
    #[serde(rename = "kappaAfter")]
    pub kappa_after: u64,
    /// `(k, tie preserved)` for each offset tried.
    pub offsets: Vec<(u64, bool)>,
}

impl KappaTieReport {
    pub fn passed(&self) -> bool {
        self.witness.is_some() && self.offsets.iter().all(|(_, tie)| *tie)
    }
}

/// Finds a rec-succ instance whose duplicated operand has positive delta
/// depth and on which delta depth ties, then checks each `kappa + k` ties too.
pub fn kappa_tie_witness(max_size: usize, offsets: &[u64]) -> KappaTieReport {
    let found = enumerate(max_size)
        .into_iter()
        .flat_map(|t| RelationKind::FullRoot.steps(&t))
        .find(|w| {
            let Term::RecD(_, s, _) = &w.source else {
                return false;
            };
            w.rule == RuleId::RecSucc
                && kappa_depth(s) >= 1
                && kappa_depth(&w.source) == kappa_depth(&w.result)
        });
    let Some(w) = found else {
        return KappaTieReport {
            witness: None,
            kappa_before: 0,
            kappa_after: 0,
            offsets: vec![],
        };
    };
    let offsets = offsets
        .iter()
        .map(|&k| {
            let f = additive_kappa(k);
            (k, f.value(&w.source) == f.value(&w.result))
        })
        .collect();
    KappaTieReport {
        kappa_before: kappa_depth(&w.source),
        kappa_after: kappa_depth(&w.result),
        witness: Some(w),
        offsets,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StressReport {
    #[serde(rename = "maxSize")]
    pub max_size: usize,
    pub instances: usize,
    /// Exact fit `size(after) - size(before) = slope * size(s) + intercept`
    /// over every instance, if one exists.
    pub slope: Option<i64>,
    pub intercept: Option<i64>,
    /// Instances violating the fitted identity.
    #[serde(rename = "fitFailures")]
    pub fit_failures: usize,
    /// Instances violating `size(after) = size(before) - 1 + size(s)`.
    #[serde(rename = "unitRedexFailures")]
    pub unit_redex_failures: usize,
    /// Instances where the step is not a strict size drop.
    #[serde(rename = "noStrictDrop")]
    pub no_strict_drop: usize,
}

impl StressReport {
    pub fn passed(&self) -> bool {
        self.instances > 0 && self.slope == Some(1) && self.fit_failures == 0
    }
}

/// Fits the growth of node count along rec-succ against the size of the
/// duplicated operand.
pub fn duplication_stress_check(max_size: usize) -> StressReport {
    let mut points = Vec::new();
    for t in enumerate(max_size) {
        for w in RelationKind::FullRoot.steps(&t) {
            let Term::RecD(_, s, _) = &w.source else {
                continue;
            };
            if w.rule != RuleId::RecSucc {
                continue;
            }
            let before = w.source.size() as i64;
            let after = w.result.size() as i64;
            points.push((s.size() as i64, before, after));
        }
    }
    let fit = exact_linear_fit(points.iter().map(|&(x, b, a)| (x, a - b)));
    let (slope, intercept) = match fit {
        Some((m, c)) => (Some(m), Some(c)),
        None => (None, None),
    };
    let fit_failures = match fit {
        Some((m, c)) => points
            .iter()
            .filter(|&&(x, b, a)| a - b != m * x + c)
            .count(),
        None => points.len(),
    };
    StressReport {
        max_size,
        instances: points.len(),
        slope,
        intercept,
        fit_failures,
        unit_redex_failures: points.iter().filter(|&&(x, b, a)| a != b - 1 + x).count(),
        no_strict_drop: points.iter().filter(|&&(_, b, a)| a >= b).count(),
    }
}

/// Integer line through every point, if all points lie on one.
fn exact_linear_fit(points: impl Iterator<Item = (i64, i64)>) -> Option<(i64, i64)> {
    let pts: Vec<(i64, i64)> = points.collect();
    let (x0, y0) = *pts.first()?;
    let slope = match pts.iter().find(|(x, _)| *x != x0) {
        Some(&(x1, y1)) => {
            if (y1 - y0) % (x1 - x0) != 0 {
                return None;
            }
            (y1 - y0) / (x1 - x0)
        }
        None => 0,
    };
    let intercept = y0 - slope * x0;
    pts.iter()
        .all(|&(x, y)| y == slope * x + intercept)
        .then_some((slope, intercept))
}
