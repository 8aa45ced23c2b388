//! Clause predicates and composed labeling functions over removal events,
//! plus their evaluation against ground-truth refactor labels.
//!
//! Clauses are atomic predicates registered by name; labeling functions are
//! conjunctions of possibly-negated clause references, so new compositions
//! need no evaluator changes.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vcs::RemovalEvent;

/// Lines changed at or above which a commit counts as a massive change.
pub const MASSIVE_CHANGE_LINES: u64 = 300;

/// Deleted lines must exceed this multiple of added lines to count as
/// mostly-delete.
pub const MOSTLY_DELETE_RATIO: u64 = 3;

// ---------------------------------------------------------------------------
// Clauses
// ---------------------------------------------------------------------------

/// The commit added at least one line to the file.
pub fn clause_added_lines(event: &RemovalEvent) -> bool {
    event.added_lines > 0
}

/// A new function appeared in the file (rename of an existing function is a
/// documented false-positive mode).
pub fn clause_new_function(event: &RemovalEvent) -> bool {
    event.new_function_added
}

/// At least 300 lines changed, added and deleted combined.
pub fn clause_massive_change(event: &RemovalEvent) -> bool {
    event.added_lines + event.deleted_lines >= MASSIVE_CHANGE_LINES
}

/// Strictly more deleted lines than three times the added lines.
pub fn clause_mostly_delete(event: &RemovalEvent) -> bool {
    event.deleted_lines > MOSTLY_DELETE_RATIO * event.added_lines
}

/// The maximum McCabe of the functions in the file went down.
pub fn clause_mccabe_reduced(event: &RemovalEvent) -> bool {
    event.mccabe_max_diff < 0
}

pub type ClauseFn = fn(&RemovalEvent) -> bool;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClauseVerdict {
    pub clause: String,
    pub hit: bool,
}

/// Registry of clauses addressable by name.
pub fn clause_registry() -> BTreeMap<&'static str, ClauseFn> {
    let mut reg: BTreeMap<&'static str, ClauseFn> = BTreeMap::new();
    reg.insert("added-lines", clause_added_lines);
    reg.insert("new-function", clause_new_function);
    reg.insert("massive-change", clause_massive_change);
    reg.insert("mostly-delete", clause_mostly_delete);
    reg.insert("mccabe-reduced", clause_mccabe_reduced);
    reg
}

/// Evaluate every registered clause on one event.
pub fn clause_verdicts(event: &RemovalEvent) -> Vec<ClauseVerdict> {
    clause_registry()
        .iter()
        .map(|(name, clause)| ClauseVerdict { clause: (*name).into(), hit: clause(event) })
        .collect()
}

// ---------------------------------------------------------------------------
// Labeling functions
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Term {
    pub clause: String,
    pub negated: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelingFunction {
    pub name: String,
    pub terms: Vec<Term>,
}

impl LabelingFunction {
    pub fn new(name: &str, terms: &[(&str, bool)]) -> LabelingFunction {
        LabelingFunction {
            name: name.into(),
            terms: terms
                .iter()
                .map(|(clause, negated)| Term { clause: (*clause).into(), negated: *negated })
                .collect(),
        }
    }

    /// Conjunction of the (possibly negated) clauses.
    pub fn evaluate(
        &self,
        registry: &BTreeMap<&'static str, ClauseFn>,
        event: &RemovalEvent,
    ) -> Result<bool> {
        for term in &self.terms {
            let clause = registry
                .get(term.clause.as_str())
                .ok_or_else(|| Error::Config(format!("unknown clause {:?}", term.clause)))?;
            if clause(event) == term.negated {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Max McCabe reduction with new lines in the commit.
pub fn lf_reduced_mccabe(event: &RemovalEvent) -> bool {
    clause_mccabe_reduced(event) && clause_added_lines(event)
}

/// Reduced McCabe, and neither mostly-delete nor a massive change.
pub fn lf_suitable_mccabe(event: &RemovalEvent) -> bool {
    lf_reduced_mccabe(event) && !clause_mostly_delete(event) && !clause_massive_change(event)
}

/// A new function was added in the commit.
pub fn lf_added_function(event: &RemovalEvent) -> bool {
    clause_new_function(event)
}

/// The three built-in labeling functions, in presentation order.
pub fn builtin_functions() -> Vec<LabelingFunction> {
    vec![
        LabelingFunction::new("reduced-mccabe-refactor", &[("mccabe-reduced", false), ("added-lines", false)]),
        LabelingFunction::new(
            "suitable-mccabe-refactor",
            &[
                ("mccabe-reduced", false),
                ("added-lines", false),
                ("mostly-delete", true),
                ("massive-change", true),
            ],
        ),
        LabelingFunction::new("added-function-refactor", &[("new-function", false)]),
    ]
}

// ---------------------------------------------------------------------------
// Evaluation against ground truth
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LabeledEvent {
    pub event: RemovalEvent,
    /// Ground truth when available: did this removal refactor the code?
    pub is_refactor: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabelingEvalRow {
    pub name: String,
    pub hits: u64,
    pub recall: f64,
    /// Fraction of hits that are true refactorings; absent with zero hits.
    pub refactor_precision: Option<f64>,
}

/// Per function: recall = hits / |events|, precision over hits against the
/// ground truth. Every event must carry ground truth.
pub fn evaluate_functions(
    events: &[LabeledEvent],
    functions: &[LabelingFunction],
) -> Result<Vec<LabelingEvalRow>> {
    if events.is_empty() {
        return Err(Error::InvalidInput("no events to evaluate".into()));
    }
    if events.iter().any(|e| e.is_refactor.is_none()) {
        return Err(Error::InvalidInput(
            "every event needs a ground-truth is_refactor label".into(),
        ));
    }
    let registry = clause_registry();
    let mut rows = Vec::new();
    for function in functions {
        let mut hits = 0u64;
        let mut refactor_hits = 0u64;
        for labeled in events {
            if function.evaluate(&registry, &labeled.event)? {
                hits += 1;
                if labeled.is_refactor == Some(true) {
                    refactor_hits += 1;
                }
            }
        }
        let recall = hits as f64 / events.len() as f64;
        let refactor_precision = (hits > 0).then(|| refactor_hits as f64 / hits as f64);
        rows.push(LabelingEvalRow { name: function.name.clone(), hits, recall, refactor_precision });
    }
    Ok(rows)
}
