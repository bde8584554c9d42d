//! Exhaustive searches over linear interpretations and symbol-weight sums.
//!
//! Neither family can orient rec-succ: the step operand occurs once on the
//! left and twice on the right, so its coefficient on the right is strictly
//! larger and a heavy enough operand breaks the inequality.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::rewrite::{RelationKind, RuleId, StepWitness};
use crate::term::{app, delta, enumerate, rec, void, Symbol, Term};

/// Instances of the unguarded rules over terms up to this size are checked.
pub const SEARCH_INSTANCE_SIZE: usize = 6;

/// `[[f]](x1..xn) = c1*x1 + .. + cn*xn + c0` for each symbol `f`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LinearInterpretation {
    /// Slot coefficients, indexed by symbol; unused slots are 0.
    pub coef: [[u64; 3]; 7],
    pub constant: [u64; 7],
}

impl LinearInterpretation {
    /// Every slot coefficient `c`, every constant `k`.
    pub fn uniform(c: u64, k: u64) -> Self {
        let mut coef = [[0; 3]; 7];
        for s in Symbol::ALL {
            for slot in coef[s.index()].iter_mut().take(s.arity()) {
                *slot = c;
            }
        }
        LinearInterpretation {
            coef,
            constant: [k; 7],
        }
    }

    pub fn eval(&self, t: &Term) -> u128 {
        let i = t.symbol().index();
        t.children()
            .into_iter()
            .enumerate()
            .fold(u128::from(self.constant[i]), |acc, (slot, c)| {
                acc.saturating_add(u128::from(self.coef[i][slot]).saturating_mul(self.eval(c)))
            })
    }

    pub fn orients(&self, w: &StepWitness) -> bool {
        self.eval(&w.result) < self.eval(&w.source)
    }
}

/// Total symbol-weight sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WeightAssignment {
    pub weight: [u64; 7],
}

impl WeightAssignment {
    /// Weight 1 everywhere except rec and eqw, which weigh 2.
    pub fn representative() -> Self {
        WeightAssignment {
            weight: [1, 1, 1, 1, 1, 2, 2],
        }
    }

    pub fn weight(&self, t: &Term) -> u64 {
        t.subterms()
            .into_iter()
            .map(|u| self.weight[u.symbol().index()])
            .sum()
    }

    pub fn orients(&self, w: &StepWitness) -> bool {
        self.weight(&w.result) < self.weight(&w.source)
    }
}

/// `s_0 = void`, `s_1 = (delta void)`, `s_(k+1) = (app s_k s_k)`.
fn heavy_operand(k: usize) -> Term {
    match k {
        0 => void(),
        1 => delta(void()),
        _ => {
            let s = heavy_operand(k - 1);
            app(s.clone(), s)
        }
    }
}

/// Longest operand tower tried before giving up on a constructed witness.
const MAX_TOWER: usize = 24;

/// `(rec void s (delta void))` for the k-th heavy operand.
fn tower_instance(k: usize) -> StepWitness {
    let s = heavy_operand(k);
    let source = rec(void(), s.clone(), delta(void()));
    let result = app(s.clone(), rec(void(), s, void()));
    StepWitness {
        rule: RuleId::RecSucc,
        position: Default::default(),
        source,
        result,
    }
}

fn uses_only(t: &Term, allowed: &[Symbol]) -> bool {
    t.subterms()
        .into_iter()
        .all(|u| allowed.contains(&u.symbol()))
}

const REC_SUCC_SIGNATURE: [Symbol; 4] = [Symbol::Void, Symbol::Delta, Symbol::App, Symbol::RecD];

/// Rec-succ instances up to the scan size whose terms only use void, delta,
/// app and rec, so their values depend on those four symbols alone.
fn rec_succ_scan_instances() -> Vec<StepWitness> {
    enumerate(SEARCH_INSTANCE_SIZE)
        .iter()
        .flat_map(|t| RelationKind::FullRoot.steps(t))
        .filter(|w| w.rule == RuleId::RecSucc && uses_only(&w.source, &REC_SUCC_SIGNATURE))
        .collect()
}

/// A rec-succ instance `interp` fails to orient: first from the scan, else
/// from the operand tower.
pub fn refute_linear(interp: &LinearInterpretation) -> Option<StepWitness> {
    refute_with(interp, &rec_succ_scan_instances())
}

fn refute_with(interp: &LinearInterpretation, scan: &[StepWitness]) -> Option<StepWitness> {
    scan.iter()
        .find(|w| !interp.orients(w))
        .cloned()
        .or_else(|| {
            (0..=MAX_TOWER)
                .map(tower_instance)
                .find(|w| !interp.orients(w))
        })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolySearchReport {
    #[serde(rename = "coefBound")]
    pub coef_bound: u64,
    /// Size of the whole assignment space.
    pub assignments: u64,
    /// Distinct (void, delta, app, rec) parameter choices; rec-succ witnesses
    /// over that sub-signature depend on nothing else.
    pub classes: usize,
    #[serde(rename = "refutedByScan")]
    pub refuted_by_scan: usize,
    #[serde(rename = "refutedByTower")]
    pub refuted_by_tower: usize,
    #[serde(rename = "largestWitnessSize")]
    pub largest_witness_size: usize,
    /// Classes with no rec-succ witness found; each is checked exhaustively.
    pub unrefuted: usize,
    pub orienting: u64,
    #[serde(rename = "sampleWitness")]
    pub sample_witness: Option<StepWitness>,
}

impl PolySearchReport {
    pub fn passed(&self) -> bool {
        self.orienting == 0 && self.unrefuted == 0
    }
}

/// All values `0..=bound` for constants and `1..=bound` for slot coefficients.
fn symbol_choices(sym: Symbol, bound: u64) -> Vec<([u64; 3], u64)> {
    let mut slots: Vec<[u64; 3]> = vec![[0; 3]];
    for i in 0..sym.arity() {
        slots = slots
            .into_iter()
            .flat_map(|c| {
                (1..=bound).map(move |v| {
                    let mut c = c;
                    c[i] = v;
                    c
                })
            })
            .collect();
    }
    slots
        .into_iter()
        .flat_map(|c| (0..=bound).map(move |k| (c, k)))
        .collect()
}

/// Every linear interpretation with coefficients in `1..=bound` and constants
/// in `0..=bound`, tested against rec-succ.
pub fn poly_search(coef_bound: u64) -> PolySearchReport {
    assert!(coef_bound >= 1);
    let choices: Vec<Vec<([u64; 3], u64)>> = Symbol::ALL
        .iter()
        .map(|s| symbol_choices(*s, coef_bound))
        .collect();
    let assignments = choices.iter().map(|c| c.len() as u64).product();
    let scan = rec_succ_scan_instances();

    let classes: Vec<LinearInterpretation> = itertools::iproduct!(
        &choices[Symbol::Void.index()],
        &choices[Symbol::Delta.index()],
        &choices[Symbol::App.index()],
        &choices[Symbol::RecD.index()]
    )
    .map(|(v, d, a, r)| {
        let mut li = LinearInterpretation::uniform(1, 0);
        for (sym, (c, k)) in [
            (Symbol::Void, v),
            (Symbol::Delta, d),
            (Symbol::App, a),
            (Symbol::RecD, r),
        ] {
            li.coef[sym.index()] = *c;
            li.constant[sym.index()] = *k;
        }
        li
    })
    .collect();

    let outcomes: Vec<Option<(bool, StepWitness)>> = classes
        .par_iter()
        .map(|li| {
            let by_scan = scan.iter().find(|w| !li.orients(w)).cloned();
            match by_scan {
                Some(w) => Some((true, w)),
                None => refute_with(li, &[]).map(|w| (false, w)),
            }
        })
        .collect();

    let mut report = PolySearchReport {
        coef_bound,
        assignments,
        classes: classes.len(),
        refuted_by_scan: 0,
        refuted_by_tower: 0,
        largest_witness_size: 0,
        unrefuted: 0,
        orienting: 0,
        sample_witness: None,
    };
    let rest = [Symbol::Integrate, Symbol::Merge, Symbol::EqW];
    let instances: Vec<StepWitness> = enumerate(SEARCH_INSTANCE_SIZE)
        .iter()
        .flat_map(|t| RelationKind::FullRoot.steps(t))
        .collect();
    for (li, outcome) in classes.iter().zip(outcomes) {
        match outcome {
            Some((scanned, w)) => {
                if scanned {
                    report.refuted_by_scan += 1;
                } else {
                    report.refuted_by_tower += 1;
                }
                report.largest_witness_size = report.largest_witness_size.max(w.source.size());
                report.sample_witness.get_or_insert(w);
            }
            None => {
                report.unrefuted += 1;
                // complete the class and check every instance
                for (i, m, e) in itertools::iproduct!(
                    &choices[rest[0].index()],
                    &choices[rest[1].index()],
                    &choices[rest[2].index()]
                ) {
                    let mut full = *li;
                    for (sym, (c, k)) in rest.iter().zip([i, m, e]) {
                        full.coef[sym.index()] = *c;
                        full.constant[sym.index()] = *k;
                    }
                    if instances.iter().all(|w| full.orients(w)) {
                        report.orienting += 1;
                    }
                }
            }
        }
    }
    report
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KboSearchReport {
    #[serde(rename = "weightBound")]
    pub weight_bound: u64,
    pub assignments: usize,
    pub instances: usize,
    pub orienting: usize,
    /// Assignments for which some rec-succ instance fails.
    #[serde(rename = "refutedByRecSucc")]
    pub refuted_by_rec_succ: usize,
    #[serde(rename = "sampleWitness")]
    pub sample_witness: Option<StepWitness>,
}

impl KboSearchReport {
    pub fn passed(&self) -> bool {
        self.orienting == 0 && self.refuted_by_rec_succ == self.assignments
    }
}

/// Every weight assignment in `0..=bound` per symbol, checked against all
/// unguarded rule instances up to the scan size.
pub fn kbo_search(weight_bound: u64) -> KboSearchReport {
    assert!(weight_bound >= 1);
    let instances: Vec<StepWitness> = enumerate(SEARCH_INSTANCE_SIZE)
        .iter()
        .flat_map(|t| RelationKind::FullRoot.steps(t))
        .collect();
    // symbol counts make each weight a dot product
    let counts = |t: &Term| {
        let mut c = [0u64; 7];
        for u in t.subterms() {
            c[u.symbol().index()] += 1;
        }
        c
    };
    let profiles: Vec<([u64; 7], [u64; 7], bool)> = instances
        .iter()
        .map(|w| {
            (
                counts(&w.source),
                counts(&w.result),
                w.rule == RuleId::RecSucc,
            )
        })
        .collect();
    let base = weight_bound + 1;
    let assignments: Vec<[u64; 7]> = (0..base.pow(7))
        .map(|mut n| {
            let mut w = [0; 7];
            for slot in &mut w {
                *slot = n % base;
                n /= base;
            }
            w
        })
        .collect();
    let results: Vec<(bool, Option<usize>)> = assignments
        .par_iter()
        .map(|w| {
            let dot = |c: &[u64; 7]| c.iter().zip(w).map(|(a, b)| a * b).sum::<u64>();
            let fails = |(l, r, _): &([u64; 7], [u64; 7], bool)| dot(r) >= dot(l);
            let all_ok = !profiles.iter().any(fails);
            let rec_fail = profiles.iter().position(|p| p.2 && fails(p));
            (all_ok, rec_fail)
        })
        .collect();
    KboSearchReport {
        weight_bound,
        assignments: assignments.len(),
        instances: instances.len(),
        orienting: results.iter().filter(|r| r.0).count(),
        refuted_by_rec_succ: results.iter().filter(|r| r.1.is_some()).count(),
        sample_witness: results
            .iter()
            .find_map(|r| r.1)
            .map(|i| instances[i].clone()),
    }
}
