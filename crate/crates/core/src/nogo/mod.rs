//! Executable catalog of termination methods that fail on KO7, and the path
//! order that succeeds only by importing the subterm property.

mod families;
mod lpo;
mod search;

pub use families::{
    additive_kappa, all_violations, canonical_measure, catalog, duplication_stress_check,
    family_by_name, find_violation, kappa_depth, kappa_tie_witness, node_size_multiset,
    CounterexampleReport, HuntOutcome, KappaTieReport, MeasureFamily, OrderKind, StressReport,
    Value, Verdict,
};
pub use lpo::{
    first_unoriented, lpo_greater, rule_instances, search_precedence, search_precedence_report,
    Precedence, PrecedenceSearch, LPO_MAX_SIZE,
};
pub use search::{
    kbo_search, poly_search, refute_linear, KboSearchReport, LinearInterpretation,
    PolySearchReport, WeightAssignment, SEARCH_INSTANCE_SIZE,
};

use serde::{Deserialize, Serialize};

use crate::rewrite::RelationKind;

/// Smallest bound at which every catalog family has a counterexample; the
/// head-precedence tie on merge-cancel needs `(merge t t)` with `t` a merge.
pub const CATALOG_MAX_SIZE: usize = 7;

/// Runs the hunter for every catalog family.
pub fn catalog_sweep(relation: RelationKind, max_size: usize) -> Vec<HuntOutcome> {
    catalog()
        .iter()
        .map(|f| find_violation(f, relation, max_size))
        .collect()
}

/// LPO with a precedence orients every rule, while the precedence rank on its
/// own (no subterm clause) does not.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryReport {
    pub lpo: PrecedenceSearch,
    #[serde(rename = "headPrecedence")]
    pub head_precedence: HuntOutcome,
}

impl BoundaryReport {
    pub fn passed(&self) -> bool {
        self.lpo.found.is_some() && self.head_precedence.counterexample().is_some()
    }
}

pub fn boundary_report(max_size: usize) -> BoundaryReport {
    let lpo = search_precedence_report(LPO_MAX_SIZE);
    let rank = family_by_name("head-precedence").expect("catalog family");
    BoundaryReport {
        lpo,
        head_precedence: find_violation(&rank, RelationKind::FullRoot, max_size),
    }
}
