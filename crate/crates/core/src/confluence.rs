//! Forks, bounded joinability, and the confluence sweeps.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::measure::has_rec;
use crate::normalize::{normalize_full, normalize_safe, FullRunResult};
use crate::rewrite::{root_steps_full, root_steps_safe, RelationKind, RuleId, StepWitness};
use crate::term::{enumerate, eqw, void, Term};

/// Two distinct one-step successors of the same term.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fork {
    pub source: Term,
    pub left: StepWitness,
    pub right: StepWitness,
}

/// Every unordered pair of distinct witnesses at `t`.
pub fn forks(t: &Term, relation: RelationKind) -> Vec<Fork> {
    let ws = relation.steps(t);
    let mut out = Vec::new();
    for (i, l) in ws.iter().enumerate() {
        for r in &ws[i + 1..] {
            if l != r {
                out.push(Fork {
                    source: t.clone(),
                    left: l.clone(),
                    right: r.clone(),
                });
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status")]
pub enum JoinResult {
    Joined {
        #[serde(rename = "commonReduct")]
        common_reduct: Term,
        #[serde(rename = "leftPath")]
        left_path: Vec<StepWitness>,
        #[serde(rename = "rightPath")]
        right_path: Vec<StepWitness>,
    },
    NotJoined {
        #[serde(rename = "budgetUsed")]
        budget_used: usize,
        /// Both reduct sets were fully explored, so the answer is definite.
        exhaustive: bool,
    },
}

impl JoinResult {
    pub fn is_joined(&self) -> bool {
        matches!(self, JoinResult::Joined { .. })
    }
}

struct Side {
    parent: HashMap<Term, Option<StepWitness>>,
    queue: VecDeque<Term>,
    expanded: usize,
}

impl Side {
    fn new(start: &Term) -> Self {
        Side {
            parent: HashMap::from([(start.clone(), None)]),
            queue: VecDeque::from([start.clone()]),
            expanded: 0,
        }
    }

    fn path_to(&self, target: &Term) -> Vec<StepWitness> {
        let mut path = Vec::new();
        let mut cur = target;
        while let Some(Some(w)) = self.parent.get(cur) {
            path.push(w.clone());
            cur = &w.source;
        }
        path.reverse();
        path
    }
}

/// Breadth-first search for a common reduct of `u` and `v`, expanding at
/// most `budget` terms on each side.
pub fn joinable(u: &Term, v: &Term, relation: RelationKind, budget: usize) -> JoinResult {
    let mut sides = [Side::new(u), Side::new(v)];
    if u == v {
        return JoinResult::Joined {
            common_reduct: u.clone(),
            left_path: vec![],
            right_path: vec![],
        };
    }
    loop {
        let mut progressed = false;
        for me in 0..2 {
            let other = 1 - me;
            if sides[me].expanded >= budget {
                continue;
            }
            let Some(x) = sides[me].queue.pop_front() else {
                continue;
            };
            sides[me].expanded += 1;
            progressed = true;
            for w in relation.steps(&x) {
                if sides[me].parent.contains_key(&w.result) {
                    continue;
                }
                let next = w.result.clone();
                sides[me].parent.insert(next.clone(), Some(w));
                if sides[other].parent.contains_key(&next) {
                    let (l, r) = if me == 0 { (0, 1) } else { (1, 0) };
                    return JoinResult::Joined {
                        left_path: sides[l].path_to(&next),
                        right_path: sides[r].path_to(&next),
                        common_reduct: next,
                    };
                }
                sides[me].queue.push_back(next);
            }
        }
        if !progressed {
            break;
        }
    }
    JoinResult::NotJoined {
        budget_used: sides[0].expanded + sides[1].expanded,
        exhaustive: sides.iter().all(|s| s.queue.is_empty()),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForkRecord {
    pub fork: Fork,
    #[serde(rename = "budgetUsed")]
    pub budget_used: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepReport {
    pub relation: RelationKind,
    #[serde(rename = "maxSize")]
    pub max_size: usize,
    pub budget: usize,
    #[serde(rename = "forksChecked")]
    pub forks_checked: usize,
    pub joined: usize,
    pub inconclusive: Vec<ForkRecord>,
    pub violations: Vec<ForkRecord>,
}

impl SweepReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty() && self.inconclusive.is_empty()
    }
}

/// Checks that every fork over terms up to `max_size` joins.
///
/// A fork left unjoined by an exhausted search is a violation. A budget
/// cut-off is a violation for the root relations, where the reduct sets are
/// finite, and inconclusive for the context relations.
pub fn local_join_sweep(max_size: usize, relation: RelationKind, budget: usize) -> SweepReport {
    let rooted = matches!(relation, RelationKind::SafeRoot | RelationKind::FullRoot);
    let per_term: Vec<(usize, usize, Vec<ForkRecord>, Vec<ForkRecord>)> = enumerate(max_size)
        .par_iter()
        .map(|t| {
            let (mut checked, mut joined) = (0, 0);
            let (mut inconclusive, mut violations) = (Vec::new(), Vec::new());
            for fork in forks(t, relation) {
                checked += 1;
                match joinable(&fork.left.result, &fork.right.result, relation, budget) {
                    JoinResult::Joined { .. } => joined += 1,
                    JoinResult::NotJoined {
                        budget_used,
                        exhaustive,
                    } => {
                        let rec = ForkRecord { fork, budget_used };
                        if exhaustive || rooted {
                            violations.push(rec);
                        } else {
                            inconclusive.push(rec);
                        }
                    }
                }
            }
            (checked, joined, inconclusive, violations)
        })
        .collect();
    let mut report = SweepReport {
        relation,
        max_size,
        budget,
        forks_checked: 0,
        joined: 0,
        inconclusive: vec![],
        violations: vec![],
    };
    for (c, j, i, v) in per_term {
        report.forks_checked += c;
        report.joined += j;
        report.inconclusive.extend(i);
        report.violations.extend(v);
    }
    report
}

/// Every safe root normal form reachable from `t`, by exhaustive search.
///
/// Finite because the root safe relation terminates.
pub fn safe_root_normal_forms(t: &Term) -> BTreeSet<Term> {
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

/// Every safe root reduct of `t`, including `t`.
pub fn safe_root_reducts(t: &Term) -> BTreeSet<Term> {
    let mut seen = BTreeSet::from([t.clone()]);
    let mut queue = VecDeque::from([t.clone()]);
    while let Some(u) = queue.pop_front() {
        for w in root_steps_safe(&u) {
            if seen.insert(w.result.clone()) {
                queue.push_back(w.result);
            }
        }
    }
    seen
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UniqueNfViolation {
    pub term: Term,
    #[serde(rename = "normalForms")]
    pub normal_forms: Vec<Term>,
    pub normalizer: Term,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UniqueNfReport {
    #[serde(rename = "maxSize")]
    pub max_size: usize,
    #[serde(rename = "termsChecked")]
    pub terms_checked: usize,
    pub violations: Vec<UniqueNfViolation>,
}

impl UniqueNfReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// For every term, all root safe reduction sequences end in the same normal
/// form, and it is the one the normalizer returns.
pub fn unique_nf_sweep(max_size: usize) -> UniqueNfReport {
    let terms = enumerate(max_size);
    let violations: Vec<UniqueNfViolation> = terms
        .par_iter()
        .filter_map(|t| {
            let nfs = safe_root_normal_forms(t);
            let normalizer = normalize_safe(t).expect("measure decreases").final_term;
            (nfs.len() != 1 || !nfs.contains(&normalizer)).then(|| UniqueNfViolation {
                term: t.clone(),
                normal_forms: nfs.into_iter().collect(),
                normalizer,
            })
        })
        .collect();
    UniqueNfReport {
        max_size,
        terms_checked: terms.len(),
        violations,
    }
}

/// Root shapes with explicit local-join coverage, each with its unique target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CoverageRow {
    IntDelta,
    MergeVoidLeft,
    MergeVoidRight,
    MergeSelf,
    RecZero,
    RecSucc,
    EqwDistinct,
    EqwSelfNoRec,
    /// `eqw a a` with a rec node in `a`: no safe successor at all.
    EqwSelfWithRec,
}

impl CoverageRow {
    pub const ALL: [CoverageRow; 9] = [
        CoverageRow::IntDelta,
        CoverageRow::MergeVoidLeft,
        CoverageRow::MergeVoidRight,
        CoverageRow::MergeSelf,
        CoverageRow::RecZero,
        CoverageRow::RecSucc,
        CoverageRow::EqwDistinct,
        CoverageRow::EqwSelfNoRec,
        CoverageRow::EqwSelfWithRec,
    ];

    pub fn shape(self) -> &'static str {
        match self {
            CoverageRow::IntDelta => "(integrate (delta t)) => void",
            CoverageRow::MergeVoidLeft => "(merge void t) => t",
            CoverageRow::MergeVoidRight => "(merge t void) => t",
            CoverageRow::MergeSelf => "(merge t t) => t",
            CoverageRow::RecZero => "(rec b s void) => b",
            CoverageRow::RecSucc => "(rec b s (delta n)) => (app s (rec b s n))",
            CoverageRow::EqwDistinct => "(eqw a b), a != b => (integrate (merge a b))",
            CoverageRow::EqwSelfNoRec => "(eqw a a), no rec in a => void",
            CoverageRow::EqwSelfWithRec => "(eqw a a), rec in a => no step",
        }
    }

    /// Rows matching `t` together with each row's stated target (`None` for
    /// the blocked row).
    fn classify(t: &Term) -> Vec<(CoverageRow, Option<Term>)> {
        let mut out = Vec::new();
        match t {
            Term::Integrate(c) if matches!(**c, Term::Delta(_)) => {
                out.push((CoverageRow::IntDelta, Some(void())))
            }
            Term::Merge(a, b) => {
                if **a == Term::Void {
                    out.push((CoverageRow::MergeVoidLeft, Some((**b).clone())));
                }
                if **b == Term::Void {
                    out.push((CoverageRow::MergeVoidRight, Some((**a).clone())));
                }
                if a == b {
                    out.push((CoverageRow::MergeSelf, Some((**a).clone())));
                }
            }
            Term::RecD(b, s, n) => match &**n {
                Term::Void => out.push((CoverageRow::RecZero, Some((**b).clone()))),
                Term::Delta(m) => out.push((
                    CoverageRow::RecSucc,
                    Some(crate::term::app(
                        (**s).clone(),
                        Term::RecD(b.clone(), s.clone(), m.clone()),
                    )),
                )),
                _ => {}
            },
            Term::EqW(a, b) if a != b => out.push((
                CoverageRow::EqwDistinct,
                Some(crate::term::integrate(crate::term::merge(
                    (**a).clone(),
                    (**b).clone(),
                ))),
            )),
            Term::EqW(a, _) if has_rec(a) => out.push((CoverageRow::EqwSelfWithRec, None)),
            Term::EqW(..) => out.push((CoverageRow::EqwSelfNoRec, Some(void()))),
            _ => {}
        }
        out
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowCounts {
    /// Terms with this root shape.
    pub instances: usize,
    /// Instances where a safe root step fires and every successor is the stated target.
    #[serde(rename = "onTarget")]
    pub on_target: usize,
    /// Instances with no safe root successor (guard-blocked).
    pub blocked: usize,
    /// Instances with a successor other than the stated target.
    #[serde(rename = "offTarget")]
    pub off_target: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageReport {
    #[serde(rename = "maxSize")]
    pub max_size: usize,
    pub rows: BTreeMap<CoverageRow, RowCounts>,
}

impl CoverageReport {
    /// Every target row is realized on target, nothing lands off target, and
    /// the blocked row is never stepped.
    pub fn passed(&self) -> bool {
        CoverageRow::ALL.iter().all(|row| {
            let c = self.rows.get(row).copied().unwrap_or_default();
            let realized = match row {
                CoverageRow::EqwSelfWithRec => c.instances > 0 && c.blocked == c.instances,
                _ => c.on_target > 0,
            };
            realized && c.off_target == 0
        })
    }
}

/// Smallest enumeration bound containing an instance of every row.
pub const COVERAGE_MIN_SIZE: usize = 9;

/// Tallies, per root shape, whether the safe root successors match the
/// shape's unique target.
pub fn critical_pair_coverage(max_size: usize) -> CoverageReport {
    let mut rows: BTreeMap<CoverageRow, RowCounts> = CoverageRow::ALL
        .iter()
        .map(|r| (*r, RowCounts::default()))
        .collect();
    for t in enumerate(max_size) {
        let succ: BTreeSet<Term> = root_steps_safe(&t).into_iter().map(|w| w.result).collect();
        for (row, target) in CoverageRow::classify(&t) {
            let c = rows.entry(row).or_default();
            c.instances += 1;
            match target {
                _ if succ.is_empty() => c.blocked += 1,
                Some(target) if succ.len() == 1 && succ.contains(&target) => c.on_target += 1,
                _ => c.off_target += 1,
            }
        }
    }
    CoverageReport { max_size, rows }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonJoinReport {
    pub source: Term,
    #[serde(rename = "reductA")]
    pub reduct_a: StepWitness,
    #[serde(rename = "reductB")]
    pub reduct_b: StepWitness,
    #[serde(rename = "normalFormA")]
    pub normal_form_a: Term,
    #[serde(rename = "normalFormB")]
    pub normal_form_b: Term,
    pub budget: usize,
    pub join: JoinResult,
}

impl std::fmt::Display for NonJoinReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "fork at {}", self.source)?;
        writeln!(f, "  {} => {}", self.reduct_a.rule, self.reduct_a.result)?;
        writeln!(f, "  {} => {}", self.reduct_b.rule, self.reduct_b.result)?;
        writeln!(f, "normal forms under the full relation")?;
        writeln!(f, "  {}", self.normal_form_a)?;
        writeln!(f, "  {}", self.normal_form_b)?;
        let how = match self.join {
            JoinResult::NotJoined {
                exhaustive: true, ..
            } => "search exhaustive",
            _ => "budget exhausted",
        };
        writeln!(f, "verdict: not joinable (budget {}, {how})", self.budget)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WitnessError {
    #[error("expected two full root reducts of {0}, found {1}")]
    UnexpectedFork(Term, usize),
    #[error("full-context run from {0} did not normalize within fuel")]
    NoNormalForm(Term),
    #[error("reducts {0} and {1} joined; the witness is falsified")]
    Joined(Term, Term),
}

pub const NON_JOIN_FUEL: usize = 10_000;
pub const NON_JOIN_BUDGET: usize = 1_000;

/// The full relation is not locally confluent at `eqw void void`.
pub fn non_join_witness_full() -> Result<NonJoinReport, WitnessError> {
    let source = eqw(void(), void());
    let ws = root_steps_full(&source);
    let [a, b] = <[StepWitness; 2]>::try_from(ws.clone())
        .map_err(|_| WitnessError::UnexpectedFork(source.clone(), ws.len()))?;
    debug_assert_eq!((a.rule, b.rule), (RuleId::EqRefl, RuleId::EqDiff));
    let nf = |t: &Term| match normalize_full(t, NON_JOIN_FUEL) {
        FullRunResult::Normalized { normal_form, .. } => Ok(normal_form),
        FullRunResult::FuelExhausted { .. } => Err(WitnessError::NoNormalForm(t.clone())),
    };
    let normal_form_a = nf(&a.result)?;
    let normal_form_b = nf(&b.result)?;
    let join = joinable(&a.result, &b.result, RelationKind::FullCtx, NON_JOIN_BUDGET);
    if join.is_joined() || normal_form_a == normal_form_b {
        return Err(WitnessError::Joined(a.result, b.result));
    }
    Ok(NonJoinReport {
        source,
        reduct_a: a,
        reduct_b: b,
        normal_form_a,
        normal_form_b,
        budget: NON_JOIN_BUDGET,
        join,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::{delta, integrate, merge, rec};

    #[test]
    fn fork_examples() {
        let fs = forks(&eqw(void(), void()), RelationKind::FullRoot);
        assert_eq!(fs.len(), 1);
        assert_eq!(
            (fs[0].left.rule, fs[0].right.rule),
            (RuleId::EqRefl, RuleId::EqDiff)
        );
        assert!(forks(&eqw(void(), void()), RelationKind::SafeRoot).is_empty());
        let fs = forks(&merge(void(), void()), RelationKind::SafeRoot);
        assert_eq!(fs.len(), 3);
        assert!(fs
            .iter()
            .all(|f| f.left.result == void() && f.right.result == void()));
    }

    #[test]
    fn joinable_examples() {
        let b = integrate(merge(void(), void()));
        assert!(matches!(
            joinable(&void(), &b, RelationKind::SafeRoot, 100),
            JoinResult::NotJoined {
                exhaustive: true,
                ..
            }
        ));
        let t = rec(void(), void(), delta(void()));
        for rel in RelationKind::ALL {
            assert_eq!(
                joinable(&t, &t, rel, 0),
                JoinResult::Joined {
                    common_reduct: t.clone(),
                    left_path: vec![],
                    right_path: vec![]
                }
            );
        }
        assert!(!joinable(&void(), &b, RelationKind::FullCtx, 100).is_joined());
    }

    #[test]
    fn joined_paths_are_chains() {
        let u = merge(merge(void(), void()), void());
        let v = merge(void(), void());
        match joinable(&u, &v, RelationKind::SafeCtx, 50) {
            JoinResult::Joined {
                common_reduct,
                left_path,
                right_path,
            } => {
                for (start, path) in [(&u, &left_path), (&v, &right_path)] {
                    let mut cur = start.clone();
                    for w in path {
                        assert_eq!(w.source, cur);
                        assert!(RelationKind::SafeCtx.steps(&cur).contains(w));
                        cur = w.result.clone();
                    }
                    assert_eq!(cur, common_reduct);
                }
            }
            r => panic!("{r:?}"),
        }
    }

    #[test]
    fn budget_zero_is_inconclusive_for_distinct_terms() {
        assert_eq!(
            joinable(&merge(void(), void()), &void(), RelationKind::SafeRoot, 0),
            JoinResult::NotJoined {
                budget_used: 0,
                exhaustive: false
            }
        );
    }

    #[test]
    fn safe_root_sweep_small() {
        let r = local_join_sweep(5, RelationKind::SafeRoot, 100);
        assert!(r.passed(), "{r:?}");
        assert!(r.forks_checked > 0);
        assert_eq!(r.joined, r.forks_checked);
    }

    #[test]
    fn full_root_sweep_finds_the_eqw_fork() {
        let r = local_join_sweep(3, RelationKind::FullRoot, 100);
        assert_eq!(r.violations.len(), 1);
        assert_eq!(r.violations[0].fork.source, eqw(void(), void()));
    }

    #[test]
    fn unique_nf_small() {
        let r = unique_nf_sweep(5);
        assert!(r.passed(), "{:?}", r.violations);
        assert_eq!(
            safe_root_normal_forms(&merge(void(), void())),
            BTreeSet::from([void()])
        );
        assert_eq!(safe_root_normal_forms(&void()), BTreeSet::from([void()]));
    }

    #[test]
    fn coverage_rows() {
        // the blocked row needs `eqw a a` with a rec in `a`: size 9 at least
        let r = critical_pair_coverage(8);
        assert_eq!(r.rows[&CoverageRow::EqwSelfWithRec].instances, 0);
        assert!(!r.passed());
        let r = critical_pair_coverage(9);
        assert!(r.passed(), "{r:?}");
        let blocked = r.rows[&CoverageRow::EqwSelfWithRec];
        assert_eq!(blocked.instances, 1);
        assert_eq!(blocked.blocked, 1);
    }

    #[test]
    fn non_join_witness() {
        let r = non_join_witness_full().unwrap();
        assert_eq!(r.reduct_a.result, void());
        assert_eq!(r.reduct_b.result, integrate(merge(void(), void())));
        assert_eq!(r.normal_form_a, void());
        assert_eq!(r.normal_form_b, integrate(void()));
        assert!(matches!(
            r.join,
            JoinResult::NotJoined {
                exhaustive: true,
                ..
            }
        ));
        assert_eq!(
            r.to_string(),
            "fork at (eqw void void)\n  EqRefl => void\n  EqDiff => (integrate (merge void void))\n\
             normal forms under the full relation\n  void\n  (integrate void)\n\
             verdict: not joinable (budget 1000, search exhaustive)\n"
        );
    }
}
