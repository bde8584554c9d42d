//! Root normalizer for the guarded relation, a budgeted runner for the full
//! relation, and the fixed-target reachability decider built on top.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::measure::{lex3_less, measure3, Measure3};
use crate::rewrite::{ctx_steps_full, root_steps_safe, StepWitness};
use crate::term::Term;

pub const DEFAULT_FUEL: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub witness: StepWitness,
    pub before: Measure3,
    pub after: Measure3,
}

/// A root safe reduction from `source` to a normal form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub source: Term,
    pub steps: Vec<TraceStep>,
    #[serde(rename = "normalForm")]
    pub final_term: Term,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Checks the chaining, strict-decrease and normal-form invariants.
    pub fn is_well_formed(&self) -> bool {
        let mut cur = &self.source;
        for s in &self.steps {
            if &s.witness.source != cur
                || s.before != measure3(&s.witness.source)
                || s.after != measure3(&s.witness.result)
                || !lex3_less(&s.after, &s.before)
            {
                return false;
            }
            cur = &s.witness.result;
        }
        cur == &self.final_term && is_normal_form_safe(&self.final_term)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NormalizeError {
    #[error("measure did not decrease: {witness} ({before} -> {after})")]
    NoDecrease {
        witness: Box<StepWitness>,
        before: Measure3,
        after: Measure3,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReachError {
    #[error("target {0} is not a safe normal form")]
    TargetNotNormal(Term),
}

/// No root safe rule applies.
pub fn is_normal_form_safe(t: &Term) -> bool {
    root_steps_safe(t).is_empty()
}

/// Rewrites with the first root safe witness until none applies, checking
/// that the measure drops on every step.
pub fn normalize_safe(t: &Term) -> Result<Trace, NormalizeError> {
    let mut steps = Vec::new();
    let mut cur = t.clone();
    let mut before = measure3(&cur);
    while let Some(w) = root_steps_safe(&cur).into_iter().next() {
        let after = measure3(&w.result);
        if !lex3_less(&after, &before) {
            return Err(NormalizeError::NoDecrease {
                witness: Box::new(w),
                before,
                after,
            });
        }
        cur = w.result.clone();
        steps.push(TraceStep {
            witness: w,
            before,
            after: after.clone(),
        });
        before = after;
    }
    Ok(Trace {
        source: t.clone(),
        steps,
        final_term: cur,
    })
}

/// Result of a budgeted run of the unguarded context relation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status")]
pub enum FullRunResult {
    Normalized {
        source: Term,
        steps: Vec<StepWitness>,
        #[serde(rename = "normalForm")]
        normal_form: Term,
    },
    FuelExhausted {
        #[serde(rename = "lastTerm")]
        last_term: Term,
        #[serde(rename = "stepsTaken")]
        steps_taken: usize,
    },
}

/// Takes the first full-context witness up to `fuel` times.
pub fn normalize_full(t: &Term, fuel: usize) -> FullRunResult {
    let mut steps = Vec::new();
    let mut cur = t.clone();
    loop {
        let Some(w) = ctx_steps_full(&cur).into_iter().next() else {
            return FullRunResult::Normalized {
                source: t.clone(),
                steps,
                normal_form: cur,
            };
        };
        if steps.len() == fuel {
            return FullRunResult::FuelExhausted {
                last_term: cur,
                steps_taken: steps.len(),
            };
        }
        cur = w.result.clone();
        steps.push(w);
    }
}

/// Decides whether `t` reduces to the safe normal form `target`.
pub fn reaches_target(t: &Term, target: &Term) -> Result<bool, ReachError> {
    if !is_normal_form_safe(target) {
        return Err(ReachError::TargetNotNormal(target.clone()));
    }
    let trace = normalize_safe(t).expect("measure decreases on every safe root step");
    Ok(&trace.final_term == target)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::tau;
    use crate::rewrite::RuleId;
    use crate::term::{app, delta, enumerate, eqw, integrate, merge, rec, void};
    use std::collections::{BTreeSet, VecDeque};

    #[test]
    fn normal_form_examples() {
        assert!(is_normal_form_safe(&void()));
        assert!(is_normal_form_safe(&integrate(merge(void(), void()))));
        assert!(!is_normal_form_safe(&eqw(void(), void())));
    }

    #[test]
    fn normalize_safe_examples() {
        let tr = normalize_safe(&integrate(delta(void()))).unwrap();
        assert_eq!(tr.final_term, void());
        assert_eq!(tr.len(), 1);
        assert_eq!(tr.steps[0].witness.rule, RuleId::IntDelta);

        let tr = normalize_safe(&eqw(delta(void()), void())).unwrap();
        assert_eq!(tr.final_term, integrate(merge(delta(void()), void())));
        assert_eq!(tr.len(), 1);
        assert_eq!(tr.steps[0].witness.rule, RuleId::EqDiff);

        let tr = normalize_safe(&rec(void(), void(), delta(void()))).unwrap();
        assert_eq!(tr.final_term, app(void(), rec(void(), void(), void())));
        assert_eq!(tr.steps[0].witness.rule, RuleId::RecSucc);
        assert!(tr.is_well_formed());
    }

    #[test]
    fn normalize_full_examples() {
        match normalize_full(&integrate(merge(void(), void())), 10) {
            FullRunResult::Normalized {
                steps, normal_form, ..
            } => {
                assert_eq!(normal_form, integrate(void()));
                assert_eq!(steps.len(), 1);
                assert_eq!(steps[0].position.0, vec![0]);
            }
            r => panic!("{r:?}"),
        }
        assert_eq!(
            normalize_full(&void(), 0),
            FullRunResult::Normalized {
                source: void(),
                steps: vec![],
                normal_form: void()
            }
        );
        match normalize_full(&eqw(void(), void()), 10) {
            FullRunResult::Normalized {
                steps, normal_form, ..
            } => {
                assert_eq!(normal_form, void());
                assert_eq!(steps[0].rule, RuleId::EqRefl);
            }
            r => panic!("{r:?}"),
        }
        // one step needed, none allowed
        assert_eq!(
            normalize_full(&integrate(delta(void())), 0),
            FullRunResult::FuelExhausted {
                last_term: integrate(delta(void())),
                steps_taken: 0
            }
        );
    }

    #[test]
    fn fuel_exhaustion_counts_steps() {
        // eqw-diff at the root, then merge-void-right inside: two steps needed
        let t = eqw(merge(void(), void()), void());
        match normalize_full(&t, 1) {
            FullRunResult::FuelExhausted { steps_taken, .. } => assert_eq!(steps_taken, 1),
            r => panic!("{r:?}"),
        }
    }

    #[test]
    fn reaches_examples() {
        assert_eq!(
            reaches_target(&integrate(delta(delta(void()))), &void()),
            Ok(true)
        );
        assert_eq!(reaches_target(&void(), &void()), Ok(true));
        assert_eq!(
            reaches_target(&eqw(delta(void()), void()), &void()),
            Ok(false)
        );
        assert_eq!(
            reaches_target(&void(), &eqw(void(), void())),
            Err(ReachError::TargetNotNormal(eqw(void(), void())))
        );
    }

    #[test]
    fn traces_are_sound_and_short() {
        for t in enumerate(7) {
            let tr = normalize_safe(&t).unwrap();
            assert!(tr.is_well_formed(), "{t}");
            assert!(tr.len() as u64 <= tau(&t), "{t}");
        }
    }

    #[test]
    fn tau_can_grow_while_the_flag_drops() {
        let s = delta(void());
        let w = root_steps_safe(&rec(void(), s.clone(), delta(void()))).remove(0);
        assert_eq!(w.rule, RuleId::RecSucc);
        assert_eq!(tau(&w.result), tau(&w.source) + tau(&s));
        assert!(lex3_less(&measure3(&w.result), &measure3(&w.source)));
    }

    fn all_safe_root_normal_forms(t: &Term) -> BTreeSet<Term> {
        let mut seen = BTreeSet::from([t.clone()]);
        let mut queue = VecDeque::from([t.clone()]);
        let mut nfs = BTreeSet::new();
        while let Some(u) = queue.pop_front() {
            let next = root_steps_safe(&u);
            if next.is_empty() {
                nfs.insert(u);
            }
            for w in next {
                if seen.insert(w.result.clone()) {
                    queue.push_back(w.result);
                }
            }
        }
        nfs
    }

    #[test]
    fn final_term_is_strategy_independent() {
        for t in enumerate(6) {
            let nfs = all_safe_root_normal_forms(&t);
            assert_eq!(nfs.len(), 1, "{t}: {nfs:?}");
            assert_eq!(
                nfs.into_iter().next().unwrap(),
                normalize_safe(&t).unwrap().final_term
            );
        }
    }

    #[test]
    fn trace_json_shape() {
        let tr = normalize_safe(&integrate(delta(void()))).unwrap();
        let v = serde_json::to_value(&tr).unwrap();
        assert_eq!(v["steps"][0]["before"], serde_json::json!([0, [], 3]));
        assert_eq!(v["steps"][0]["after"], serde_json::json!([0, [], 1]));
        assert_eq!(v["normalForm"], serde_json::json!({"k": "void", "c": []}));
        assert_eq!(v["steps"][0]["witness"]["rule"], "IntDelta");
        let back: Trace = serde_json::from_value(v).unwrap();
        assert_eq!(back, tr);
    }
}
