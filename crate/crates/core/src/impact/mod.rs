//! CCP-difference aggregation, CCP-group stratification, feature
//! construction, and per-feature evaluation.

pub mod logistic;
pub mod tree;

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ccp::CcpWindow;
use crate::detect::{AlertKind, ALL_ALERT_KINDS};
use crate::vcs::RemovalEvent;

/// A removal event together with its CCP windows; the unit of all impact
/// analysis.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MinedEvent {
    pub event: RemovalEvent,
    pub before_window: CcpWindow,
    pub after_window: CcpWindow,
}

impl MinedEvent {
    /// CCP after minus CCP before, in percentage points.
    pub fn ccp_diff(&self) -> f64 {
        ccp_diff(&self.before_window, &self.after_window)
    }
}

pub fn ccp_diff(before: &CcpWindow, after: &CcpWindow) -> f64 {
    100.0 * (after.ccp - before.ccp)
}

// ---------------------------------------------------------------------------
// CCP groups
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CcpGroup {
    Low,
    Medium,
    High,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CcpGroupThresholds {
    pub low: f64,
    pub high: f64,
}

impl Default for CcpGroupThresholds {
    fn default() -> Self {
        CcpGroupThresholds { low: 0.09, high: 0.39 }
    }
}

/// Stratify by prior CCP: low below 9%, high above 39%, medium between
/// (inclusive at both cut points).
pub fn ccp_group(before_ccp: f64, thresholds: CcpGroupThresholds) -> CcpGroup {
    if before_ccp < thresholds.low {
        CcpGroup::Low
    } else if before_ccp > thresholds.high {
        CcpGroup::High
    } else {
        CcpGroup::Medium
    }
}

// ---------------------------------------------------------------------------
// Impact aggregation
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImpactRow {
    pub context: String,
    pub alert_kind: Option<AlertKind>,
    pub mean_ccp_diff: f64,
    pub samples: u64,
    /// Sample standard deviation over sqrt(samples); absent for one sample.
    pub std_error: Option<f64>,
    pub mean_mccabe_diff: Option<f64>,
}

/// Mean CCP difference over the events passing both filters; `None` when no
/// event passes.
pub fn aggregate_impact(
    events: &[MinedEvent],
    context_name: &str,
    context: impl Fn(&RemovalEvent) -> bool,
    alert_filter: Option<AlertKind>,
) -> Option<ImpactRow> {
    let selected: Vec<&MinedEvent> = events
        .iter()
        .filter(|m| alert_filter.map_or(true, |k| m.event.alert_kind == k))
        .filter(|m| context(&m.event))
        .collect();
    if selected.is_empty() {
        return None;
    }
    let diffs: Vec<f64> = selected.iter().map(|m| m.ccp_diff()).collect();
    let samples = diffs.len() as u64;
    let mean = diffs.iter().sum::<f64>() / samples as f64;
    let std_error = (samples >= 2).then(|| {
        let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (samples as f64 - 1.0);
        var.sqrt() / (samples as f64).sqrt()
    });
    let mean_mccabe_diff = Some(
        selected.iter().map(|m| m.event.mccabe_max_diff as f64).sum::<f64>() / samples as f64,
    );
    Some(ImpactRow {
        context: context_name.to_string(),
        alert_kind: alert_filter,
        mean_ccp_diff: mean,
        samples,
        std_error,
        mean_mccabe_diff,
    })
}

// ---------------------------------------------------------------------------
// Feature construction
// ---------------------------------------------------------------------------

/// Quantities that get empirical-quartile high/low flags.
const QUARTILE_QUANTITIES: [&str; 4] =
    ["McCabe max before", "McCabe sum before", "McCabe max diff", "McCabe sum diff"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct QuartileCuts {
    q25: f64,
    q75: f64,
}

/// Builds boolean feature vectors. Quartile cut points are fitted on the
/// training split only and frozen for any later transform.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeatureBuilder {
    cuts: BTreeMap<String, QuartileCuts>,
    thresholds: CcpGroupThresholds,
}

#[derive(Debug, Clone, Serialize)]
pub struct FeatureSet {
    pub names: Vec<String>,
    pub rows: Vec<Vec<bool>>,
    /// True when the event reduced CCP (strictly negative difference).
    pub labels: Vec<bool>,
    /// Positive fraction of `labels`.
    pub base_rate: f64,
}

impl FeatureBuilder {
    pub fn fit(train: &[MinedEvent], thresholds: CcpGroupThresholds) -> FeatureBuilder {
        let mut cuts = BTreeMap::new();
        for quantity in QUARTILE_QUANTITIES {
            let mut values: Vec<f64> = train.iter().map(|m| quantity_value(m, quantity)).collect();
            values.sort_by(|a, b| a.partial_cmp(b).unwrap());
            if !values.is_empty() {
                cuts.insert(
                    quantity.to_string(),
                    QuartileCuts {
                        q25: nearest_rank(&values, 0.25),
                        q75: nearest_rank(&values, 0.75),
                    },
                );
            }
        }
        FeatureBuilder { cuts, thresholds }
    }

    pub fn feature_names(&self) -> Vec<String> {
        let mut names = vec![
            "mostly delete".to_string(),
            "only removal".to_string(),
            "massive change".to_string(),
            "is refactor".to_string(),
            "new function".to_string(),
            "high ccp group".to_string(),
            "low ccp group".to_string(),
        ];
        for quantity in QUARTILE_QUANTITIES {
            names.push(format!("high {quantity}"));
            names.push(format!("low {quantity}"));
        }
        for kind in ALL_ALERT_KINDS {
            names.push(kind.name().to_string());
        }
        names
    }

    pub fn transform(&self, events: &[MinedEvent]) -> FeatureSet {
        let names = self.feature_names();
        let mut rows = Vec::with_capacity(events.len());
        let mut labels = Vec::with_capacity(events.len());
        for mined in events {
            let event = &mined.event;
            let group = ccp_group(mined.before_window.ccp, self.thresholds);
            let mut row = vec![
                crate::labeling::clause_mostly_delete(event),
                event.added_lines == 0,
                crate::labeling::clause_massive_change(event),
                event.message_mentions_refactor,
                event.new_function_added,
                group == CcpGroup::High,
                group == CcpGroup::Low,
            ];
            for quantity in QUARTILE_QUANTITIES {
                let value = quantity_value(mined, quantity);
                match self.cuts.get(quantity) {
                    Some(c) => {
                        row.push(value > c.q75);
                        row.push(value < c.q25);
                    }
                    None => {
                        row.push(false);
                        row.push(false);
                    }
                }
            }
            for kind in ALL_ALERT_KINDS {
                row.push(event.alert_kind == kind);
            }
            debug_assert_eq!(row.len(), names.len());
            rows.push(row);
            labels.push(mined.ccp_diff() < 0.0);
        }
        let base_rate = if labels.is_empty() {
            0.0
        } else {
            labels.iter().filter(|&&l| l).count() as f64 / labels.len() as f64
        };
        FeatureSet { names, rows, labels, base_rate }
    }
}

fn quantity_value(mined: &MinedEvent, quantity: &str) -> f64 {
    match quantity {
        "McCabe max before" => mined.event.before.metrics.mccabe_max as f64,
        "McCabe sum before" => mined.event.before.metrics.mccabe_sum as f64,
        "McCabe max diff" => mined.event.mccabe_max_diff as f64,
        "McCabe sum diff" => mined.event.mccabe_sum_diff as f64,
        _ => unreachable!("unknown quartile quantity"),
    }
}

/// Nearest-rank quantile on pre-sorted values.
fn nearest_rank(sorted: &[f64], p: f64) -> f64 {
    let rank = (p * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

// ---------------------------------------------------------------------------
// Per-feature evaluation
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureEvalRow {
    pub name: String,
    pub accuracy: f64,
    pub hit_rate: f64,
    pub precision: Option<f64>,
    /// precision / base_rate - 1; absent without hits.
    pub precision_lift: Option<f64>,
    pub recall: f64,
}

/// Treat one boolean feature as a classifier of the labels.
pub fn evaluate_feature(
    name: &str,
    column: &[bool],
    labels: &[bool],
    base_rate: f64,
) -> FeatureEvalRow {
    assert_eq!(column.len(), labels.len());
    assert!(!labels.is_empty());
    let n = labels.len() as f64;
    let hits = column.iter().filter(|&&c| c).count() as f64;
    let positives = labels.iter().filter(|&&l| l).count() as f64;
    let true_positives =
        column.iter().zip(labels).filter(|(&c, &l)| c && l).count() as f64;
    let correct = column.iter().zip(labels).filter(|(&c, &l)| c == l).count() as f64;
    let precision = (hits > 0.0).then(|| true_positives / hits);
    let precision_lift = match precision {
        Some(p) if base_rate > 0.0 => Some(p / base_rate - 1.0),
        _ => None,
    };
    let recall = if positives > 0.0 { true_positives / positives } else { 0.0 };
    FeatureEvalRow {
        name: name.to_string(),
        accuracy: correct / n,
        hit_rate: hits / n,
        precision,
        precision_lift,
        recall,
    }
}

/// Evaluate every feature column, ordered by precision lift descending
/// (rows without a lift come last).
pub fn evaluate_all_features(set: &FeatureSet) -> Vec<FeatureEvalRow> {
    let mut rows: Vec<FeatureEvalRow> = set
        .names
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let column: Vec<bool> = set.rows.iter().map(|r| r[j]).collect();
            evaluate_feature(name, &column, &set.labels, set.base_rate)
        })
        .collect();
    rows.sort_by(|a, b| match (b.precision_lift, a.precision_lift) {
        (Some(x), Some(y)) => x.partial_cmp(&y).unwrap().then_with(|| a.name.cmp(&b.name)),
        (Some(_), None) => std::cmp::Ordering::Greater,
        (None, Some(_)) => std::cmp::Ordering::Less,
        (None, None) => a.name.cmp(&b.name),
    });
    rows
}

// ---------------------------------------------------------------------------
// Train/test split
// ---------------------------------------------------------------------------

/// Stratified split into train and test index sets: within each label class
/// a seeded shuffle sends one third to the test side.
pub fn stratified_split(labels: &[bool], seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for class in [true, false] {
        let mut members: Vec<usize> =
            (0..labels.len()).filter(|&i| labels[i] == class).collect();
        members.shuffle(&mut rng);
        let test_len = members.len() / 3;
        test.extend(members.iter().take(test_len).copied());
        train.extend(members.iter().skip(test_len).copied());
    }
    train.sort_unstable();
    test.sort_unstable();
    (train, test)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixture::EventBuilder;

    fn window(corrective: u64, total: u64) -> CcpWindow {
        CcpWindow {
            commit_ids: (0..total).map(|i| format!("c{i}")).collect(),
            corrective_count: corrective,
            total,
            ccp: corrective as f64 / total as f64,
        }
    }

    fn mined(diff_sign: i64) -> MinedEvent {
        // diff_sign < 0 builds an event whose CCP dropped.
        let (before, after) = if diff_sign < 0 {
            (window(3, 10), window(1, 10))
        } else if diff_sign > 0 {
            (window(1, 10), window(3, 10))
        } else {
            (window(2, 10), window(2, 10))
        };
        MinedEvent { event: EventBuilder::new().build(), before_window: before, after_window: after }
    }

    #[test]
    fn ccp_diff_examples() {
        assert!((ccp_diff(&window(30, 100), &window(25, 100)) - -5.0).abs() < 1e-12);
        assert_eq!(ccp_diff(&window(2, 10), &window(2, 10)), 0.0);
        assert_eq!(ccp_diff(&window(0, 5), &window(5, 5)), 100.0);
    }

    #[test]
    fn ccp_group_thresholds() {
        let t = CcpGroupThresholds::default();
        assert_eq!(ccp_group(0.05, t), CcpGroup::Low);
        assert_eq!(ccp_group(0.20, t), CcpGroup::Medium);
        assert_eq!(ccp_group(0.50, t), CcpGroup::High);
        // Boundaries belong to medium.
        assert_eq!(ccp_group(0.09, t), CcpGroup::Medium);
        assert_eq!(ccp_group(0.39, t), CcpGroup::Medium);
        assert_eq!(ccp_group(0.0899999, t), CcpGroup::Low);
        assert_eq!(ccp_group(0.3900001, t), CcpGroup::High);
    }

    #[test]
    fn stratification_is_a_partition() {
        let t = CcpGroupThresholds::default();
        for i in 0..=100 {
            let ccp = i as f64 / 100.0;
            let group = ccp_group(ccp, t);
            let members = [CcpGroup::Low, CcpGroup::Medium, CcpGroup::High]
                .into_iter()
                .filter(|&g| g == group)
                .count();
            assert_eq!(members, 1);
        }
    }

    #[test]
    fn aggregate_arithmetic() {
        // Diffs -2, -4, -6 percentage points.
        let events = vec![
            MinedEvent {
                event: EventBuilder::new().build(),
                before_window: window(10, 100),
                after_window: window(8, 100),
            },
            MinedEvent {
                event: EventBuilder::new().build(),
                before_window: window(10, 100),
                after_window: window(6, 100),
            },
            MinedEvent {
                event: EventBuilder::new().build(),
                before_window: window(10, 100),
                after_window: window(4, 100),
            },
        ];
        let row = aggregate_impact(&events, "all", |_| true, None).unwrap();
        assert!((row.mean_ccp_diff - -4.0).abs() < 1e-9);
        assert_eq!(row.samples, 3);
        let expected = 2.0 / 3.0_f64.sqrt();
        assert!((row.std_error.unwrap() - expected).abs() < 1e-9);
    }

    #[test]
    fn aggregate_single_sample_has_no_std_error() {
        let events = vec![mined(-1)];
        let row = aggregate_impact(&events, "all", |_| true, None).unwrap();
        assert_eq!(row.samples, 1);
        assert_eq!(row.std_error, None);
    }

    #[test]
    fn aggregate_empty_selection_is_absent() {
        let events = vec![mined(-1)];
        assert!(aggregate_impact(&events, "none", |_| false, None).is_none());
        assert!(
            aggregate_impact(&events, "all", |_| true, Some(AlertKind::WildcardImport)).is_none()
        );
    }

    #[test]
    fn feature_labels_and_base_rate() {
        let events = vec![mined(-1), mined(1), mined(0), mined(-1)];
        let builder = FeatureBuilder::fit(&events, CcpGroupThresholds::default());
        let set = builder.transform(&events);
        assert_eq!(set.labels, vec![true, false, false, true]);
        assert!((set.base_rate - 0.5).abs() < 1e-12);
        assert_eq!(set.names.len(), set.rows[0].len());
        assert_eq!(set.names.len(), 7 + 8 + 17);
    }

    #[test]
    fn high_low_flags_are_exclusive() {
        let mut events = Vec::new();
        for i in 0..40 {
            let mut m = mined(if i % 2 == 0 { -1 } else { 1 });
            m.event.mccabe_max_diff = i as i64 - 20;
            m.event.mccabe_sum_diff = (i as i64 % 7) - 3;
            events.push(m);
        }
        let builder = FeatureBuilder::fit(&events, CcpGroupThresholds::default());
        let set = builder.transform(&events);
        for quantity in super::QUARTILE_QUANTITIES {
            let hi = set.names.iter().position(|n| *n == format!("high {quantity}")).unwrap();
            let lo = set.names.iter().position(|n| *n == format!("low {quantity}")).unwrap();
            for row in &set.rows {
                assert!(!(row[hi] && row[lo]), "high and low {quantity} both set");
            }
        }
    }

    #[test]
    fn quartile_cuts_frozen_from_training_split() {
        let mut train = Vec::new();
        for i in 0..8 {
            let mut m = mined(-1);
            m.event.mccabe_max_diff = i as i64; // 0..7, q75 boundary near 5
            train.push(m);
        }
        let builder = FeatureBuilder::fit(&train, CcpGroupThresholds::default());
        // A transform-time value far above the training range is "high" even
        // if the new batch is uniform.
        let mut probe = mined(-1);
        probe.event.mccabe_max_diff = 100;
        let set = builder.transform(&[probe]);
        let hi = set.names.iter().position(|n| n == "high McCabe max diff").unwrap();
        assert!(set.rows[0][hi]);
    }

    #[test]
    fn evaluate_feature_oracle_identities() {
        let labels = [true, false, true, false, true, false, false, false];
        let base = 3.0 / 8.0;
        // The feature equal to the label.
        let oracle = labels;
        let row = evaluate_feature("oracle", &oracle, &labels, base);
        assert_eq!(row.accuracy, 1.0);
        assert_eq!(row.precision, Some(1.0));
        assert_eq!(row.recall, 1.0);
        assert!((row.precision_lift.unwrap() - (1.0 / base - 1.0)).abs() < 1e-12);
        // A constant-false feature.
        let never = [false; 8];
        let row = evaluate_feature("never", &never, &labels, base);
        assert_eq!(row.hit_rate, 0.0);
        assert_eq!(row.recall, 0.0);
        assert!((row.accuracy - (1.0 - base)).abs() < 1e-12);
        assert_eq!(row.precision, None);
        assert_eq!(row.precision_lift, None);
    }

    #[test]
    fn precision_at_base_rate_has_zero_lift() {
        // Half the labels positive; feature hits half of each class:
        // precision = base rate = 0.5 -> lift 0.
        let labels = [true, true, false, false];
        let column = [true, false, true, false];
        let row = evaluate_feature("coin", &column, &labels, 0.5);
        assert_eq!(row.precision, Some(0.5));
        assert!(row.precision_lift.unwrap().abs() < 1e-12);
    }

    #[test]
    fn feature_rows_sorted_by_lift() {
        let events: Vec<MinedEvent> = (0..30)
            .map(|i| {
                let mut m = mined(if i % 3 == 0 { -1 } else { 1 });
                m.event.new_function_added = i % 3 == 0; // perfectly aligned feature
                m.event.added_lines = (i % 5) as u64;
                m
            })
            .collect();
        let builder = FeatureBuilder::fit(&events, CcpGroupThresholds::default());
        let set = builder.transform(&events);
        let rows = evaluate_all_features(&set);
        assert_eq!(rows[0].name, "new function");
        let lifts: Vec<f64> = rows.iter().filter_map(|r| r.precision_lift).collect();
        assert!(lifts.windows(2).all(|w| w[0] >= w[1]));
        // Rows without lift trail the ranked ones.
        let first_none = rows.iter().position(|r| r.precision_lift.is_none());
        if let Some(first_none) = first_none {
            assert!(rows[first_none..].iter().all(|r| r.precision_lift.is_none()));
        }
    }

    #[test]
    fn split_is_stratified_and_deterministic() {
        let labels: Vec<bool> = (0..90).map(|i| i % 3 == 0).collect();
        let (train_a, test_a) = stratified_split(&labels, 42);
        let (train_b, test_b) = stratified_split(&labels, 42);
        assert_eq!(train_a, train_b);
        assert_eq!(test_a, test_b);
        assert_eq!(train_a.len() + test_a.len(), 90);
        let positives_in_test = test_a.iter().filter(|&&i| labels[i]).count();
        assert_eq!(positives_in_test, 10); // a third of the 30 positives
        assert_eq!(test_a.len(), 30);
        let (train_c, _) = stratified_split(&labels, 43);
        assert_ne!(train_a, train_c);
    }
}
