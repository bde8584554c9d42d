//! The eight KO7 rules, their guarded variants, and the two context closures.
//!
//! Every relation is exposed as a successor enumerator returning
//! [`StepWitness`] values in (position, rule) order.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::measure::{delta_flag, has_rec};
use crate::term::{app, integrate, merge, Position, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RuleId {
    MergeVoidLeft,
    MergeVoidRight,
    MergeCancel,
    RecZero,
    RecSucc,
    IntDelta,
    EqRefl,
    EqDiff,
}

impl RuleId {
    pub const ALL: [RuleId; 8] = [
        RuleId::MergeVoidLeft,
        RuleId::MergeVoidRight,
        RuleId::MergeCancel,
        RuleId::RecZero,
        RuleId::RecSucc,
        RuleId::IntDelta,
        RuleId::EqRefl,
        RuleId::EqDiff,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RuleId::MergeVoidLeft => "MergeVoidLeft",
            RuleId::MergeVoidRight => "MergeVoidRight",
            RuleId::MergeCancel => "MergeCancel",
            RuleId::RecZero => "RecZero",
            RuleId::RecSucc => "RecSucc",
            RuleId::IntDelta => "IntDelta",
            RuleId::EqRefl => "EqRefl",
            RuleId::EqDiff => "EqDiff",
        }
    }

    /// Rule schema in surface syntax, for reports.
    pub fn schema(self) -> &'static str {
        match self {
            RuleId::MergeVoidLeft => "(merge void t) -> t",
            RuleId::MergeVoidRight => "(merge t void) -> t",
            RuleId::MergeCancel => "(merge t t) -> t",
            RuleId::RecZero => "(rec b s void) -> b",
            RuleId::RecSucc => "(rec b s (delta n)) -> (app s (rec b s n))",
            RuleId::IntDelta => "(integrate (delta t)) -> void",
            RuleId::EqRefl => "(eqw a a) -> void",
            RuleId::EqDiff => "(eqw a b) -> (integrate (merge a b))",
        }
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One rewrite event.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StepWitness {
    pub rule: RuleId,
    #[serde(rename = "pos")]
    pub position: Position,
    #[serde(rename = "from")]
    pub source: Term,
    #[serde(rename = "to")]
    pub result: Term,
}

impl fmt::Display for StepWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} at {}: {} => {}",
            self.rule, self.position, self.source, self.result
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RelationKind {
    /// All eight rules at the root, no guards.
    FullRoot,
    /// Guarded rules at the root.
    SafeRoot,
    /// Guarded rules under integrate/merge/app/rec positions.
    SafeCtx,
    /// Unguarded rules at every position.
    FullCtx,
}

impl RelationKind {
    pub const ALL: [RelationKind; 4] = [
        RelationKind::FullRoot,
        RelationKind::SafeRoot,
        RelationKind::SafeCtx,
        RelationKind::FullCtx,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RelationKind::FullRoot => "full-root",
            RelationKind::SafeRoot => "safe",
            RelationKind::SafeCtx => "safe-ctx",
            RelationKind::FullCtx => "full",
        }
    }

    pub fn from_name(name: &str) -> Option<RelationKind> {
        match name {
            "full-root" => Some(RelationKind::FullRoot),
            "safe" | "safe-root" => Some(RelationKind::SafeRoot),
            "safe-ctx" => Some(RelationKind::SafeCtx),
            "full" | "full-ctx" => Some(RelationKind::FullCtx),
            _ => None,
        }
    }

    pub fn is_safe(self) -> bool {
        matches!(self, RelationKind::SafeRoot | RelationKind::SafeCtx)
    }

    /// All one-step successors of `t` under this relation.
    pub fn steps(self, t: &Term) -> Vec<StepWitness> {
        match self {
            RelationKind::FullRoot => root_steps_full(t),
            RelationKind::SafeRoot => root_steps_safe(t),
            RelationKind::SafeCtx => ctx_steps_safe(t),
            RelationKind::FullCtx => ctx_steps_full(t),
        }
    }
}

impl fmt::Display for RelationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Root redexes as (rule, contractum) pairs, before guards.
fn root_matches(t: &Term) -> Vec<(RuleId, Term)> {
    let mut out = Vec::new();
    match t {
        Term::Merge(a, b) => {
            if **a == Term::Void {
                out.push((RuleId::MergeVoidLeft, (**b).clone()));
            }
            if **b == Term::Void {
                out.push((RuleId::MergeVoidRight, (**a).clone()));
            }
            if a == b {
                out.push((RuleId::MergeCancel, (**a).clone()));
            }
        }
        Term::RecD(base, step, arg) => match &**arg {
            Term::Void => out.push((RuleId::RecZero, (**base).clone())),
            Term::Delta(n) => out.push((
                RuleId::RecSucc,
                app(
                    (**step).clone(),
                    Term::RecD(base.clone(), step.clone(), n.clone()),
                ),
            )),
            _ => {}
        },
        Term::Integrate(c) => {
            if let Term::Delta(_) = &**c {
                out.push((RuleId::IntDelta, Term::Void));
            }
        }
        Term::EqW(a, b) => {
            if a == b {
                out.push((RuleId::EqRefl, Term::Void));
            }
            out.push((
                RuleId::EqDiff,
                integrate(merge((**a).clone(), (**b).clone())),
            ));
        }
        Term::Void | Term::Delta(_) | Term::App(..) => {}
    }
    out
}

/// Side condition for `rule` firing at the root of `t`.
fn guard_holds(rule: RuleId, t: &Term) -> bool {
    match (rule, t) {
        (RuleId::MergeVoidLeft, Term::Merge(_, kept)) => delta_flag(kept) == 0,
        (RuleId::MergeVoidRight, Term::Merge(kept, _)) => delta_flag(kept) == 0,
        (RuleId::MergeCancel, t) => !has_rec(t),
        (RuleId::RecZero, Term::RecD(base, _, _)) => delta_flag(base) == 0,
        (RuleId::RecSucc, _) | (RuleId::IntDelta, _) => true,
        (RuleId::EqRefl, Term::EqW(a, b)) => a == b && !has_rec(a),
        (RuleId::EqDiff, Term::EqW(a, b)) => a != b,
        _ => false,
    }
}

fn root_witnesses(t: &Term, guarded: bool) -> Vec<StepWitness> {
    root_matches(t)
        .into_iter()
        .filter(|(rule, _)| !guarded || guard_holds(*rule, t))
        .map(|(rule, result)| StepWitness {
            rule,
            position: Position::root(),
            source: t.clone(),
            result,
        })
        .collect()
}

/// Unguarded rules at the root. `eqw a a` yields both EqRefl and EqDiff.
pub fn root_steps_full(t: &Term) -> Vec<StepWitness> {
    root_witnesses(t, false)
}

/// Guarded rules at the root.
///
/// | rule            | guard                                   |
/// |-----------------|-----------------------------------------|
/// | MergeVoidLeft/Right | delta flag of the kept operand is 0 |
/// | MergeCancel     | no rec node anywhere in the redex        |
/// | RecZero         | delta flag of the base is 0              |
/// | RecSucc, IntDelta | none                                   |
/// | EqRefl          | operands equal, no rec node in them      |
/// | EqDiff          | operands differ                          |
pub fn root_steps_safe(t: &Term) -> Vec<StepWitness> {
    root_witnesses(t, true)
}

/// Lifts every witness produced by `inner` on the children of `t` back to `t`.
fn close(
    t: &Term,
    root: Vec<StepWitness>,
    descend: bool,
    inner: fn(&Term) -> Vec<StepWitness>,
) -> Vec<StepWitness> {
    let mut out = root;
    if !descend {
        return out;
    }
    for (i, child) in t.children().into_iter().enumerate() {
        for w in inner(child) {
            let position = w.position.under(i);
            let result = t
                .replace_at(&Position(vec![i]), w.result)
                .expect("child index is valid by construction");
            out.push(StepWitness {
                rule: w.rule,
                position,
                source: t.clone(),
                result,
            });
        }
    }
    out
}

/// Guarded rules at the root and under integrate, merge, app and rec nodes.
/// Delta and eqw nodes are never entered.
pub fn ctx_steps_safe(t: &Term) -> Vec<StepWitness> {
    let descend = matches!(
        t,
        Term::Integrate(_) | Term::Merge(..) | Term::App(..) | Term::RecD(..)
    );
    close(t, root_steps_safe(t), descend, ctx_steps_safe)
}

/// Unguarded rules at every position.
pub fn ctx_steps_full(t: &Term) -> Vec<StepWitness> {
    close(t, root_steps_full(t), true, ctx_steps_full)
}

/// Checks that `w` is a genuine instance of its rule: the redex at
/// `w.position` has the rule's left-hand shape and `w.result` is the source
/// with that redex replaced by the instantiated right-hand side.
///
/// Written as an independent pattern check against the rule schemas.
pub fn witness_is_sound(w: &StepWitness) -> bool {
    let Ok(redex) = w.source.subterm_at(&w.position) else {
        return false;
    };
    let Ok(contractum) = w.result.subterm_at(&w.position) else {
        return false;
    };
    let shape_ok = match (w.rule, redex) {
        (RuleId::MergeVoidLeft, Term::Merge(a, b)) => **a == Term::Void && contractum == &**b,
        (RuleId::MergeVoidRight, Term::Merge(a, b)) => **b == Term::Void && contractum == &**a,
        (RuleId::MergeCancel, Term::Merge(a, b)) => a == b && contractum == &**a,
        (RuleId::RecZero, Term::RecD(b, _, n)) => **n == Term::Void && contractum == &**b,
        (RuleId::RecSucc, Term::RecD(b, s, n)) => match &**n {
            Term::Delta(m) => {
                *contractum == app((**s).clone(), Term::RecD(b.clone(), s.clone(), m.clone()))
            }
            _ => false,
        },
        (RuleId::IntDelta, Term::Integrate(c)) => {
            matches!(&**c, Term::Delta(_)) && *contractum == Term::Void
        }
        (RuleId::EqRefl, Term::EqW(a, b)) => a == b && *contractum == Term::Void,
        (RuleId::EqDiff, Term::EqW(a, b)) => {
            *contractum == integrate(merge((**a).clone(), (**b).clone()))
        }
        _ => false,
    };
    shape_ok
        && w.source
            .replace_at(&w.position, contractum.clone())
            .as_ref()
            == Ok(&w.result)
}
