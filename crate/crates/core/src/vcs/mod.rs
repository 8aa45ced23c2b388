//! Version-control mining: commit records, snapshot analyses, and
//! alert-removal events.

mod git;
mod mine;

pub use git::GitRepo;
pub use mine::{mine_removals, snapshot_filter, MineConfig, MineTargets};

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::detect::{count_by_kind, detect_all, AlertInstance, AlertKind, DetectorConfig};
use crate::metrics::{file_metrics, FileMetrics};
use crate::source::parse_bytes;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileChange {
    pub added: u64,
    pub deleted: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommitRecord {
    pub id: String,
    /// Committer timestamp, Unix seconds UTC.
    pub timestamp: i64,
    pub message: String,
    pub per_file: BTreeMap<String, FileChange>,
    /// First parent; absent for a root commit.
    pub parent: Option<String>,
}

/// Alerts and metrics for one file at one commit. An absent file (deleted or
/// not yet created) is represented by an empty analysis with `present = false`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SnapshotAnalysis {
    pub path: String,
    pub commit_id: String,
    pub present: bool,
    pub alerts: Vec<AlertInstance>,
    pub metrics: FileMetrics,
    pub function_names: BTreeSet<String>,
}

impl SnapshotAnalysis {
    pub fn absent(path: &str, commit_id: &str) -> SnapshotAnalysis {
        SnapshotAnalysis {
            path: path.to_string(),
            commit_id: commit_id.to_string(),
            present: false,
            alerts: Vec::new(),
            metrics: FileMetrics::empty(),
            function_names: BTreeSet::new(),
        }
    }

    pub fn counts(&self) -> BTreeMap<AlertKind, u64> {
        count_by_kind(&self.alerts)
    }
}

/// Analyze one snapshot's bytes. `Err` carries the parse diagnostic; the
/// caller skips the (commit, file) pair and logs it.
pub fn analyze_snapshot(
    path: &str,
    commit_id: &str,
    bytes: Option<&[u8]>,
    detectors: &DetectorConfig,
) -> std::result::Result<SnapshotAnalysis, String> {
    let Some(bytes) = bytes else {
        return Ok(SnapshotAnalysis::absent(path, commit_id));
    };
    let unit = parse_bytes(bytes, path);
    if !unit.parse_ok {
        return Err(unit.parse_error.unwrap_or_else(|| "parse failure".into()));
    }
    Ok(SnapshotAnalysis {
        path: path.to_string(),
        commit_id: commit_id.to_string(),
        present: true,
        alerts: detect_all(&unit, detectors),
        metrics: file_metrics(&unit),
        function_names: unit.functions.iter().map(|f| f.qualified_name.clone()).collect(),
    })
}

/// One alert-count decrease at one commit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RemovalEvent {
    pub alert_kind: AlertKind,
    pub path: String,
    pub commit: CommitRecord,
    pub removed_count: u64,
    pub before: SnapshotAnalysis,
    pub after: SnapshotAnalysis,
    /// Metric differences are after minus before.
    pub mccabe_max_diff: i64,
    pub mccabe_sum_diff: i64,
    pub loc_diff: i64,
    pub added_lines: u64,
    pub deleted_lines: u64,
    pub new_function_added: bool,
    pub message_mentions_refactor: bool,
}

impl RemovalEvent {
    /// Stable identifier used to join ground-truth labels.
    pub fn id(&self) -> String {
        format!("{}:{}:{}", self.commit.id, self.path, self.alert_kind)
    }
}

/// Test-file rule shared by the miner and the candidate picker: any path
/// segment `test`/`tests`, or a file stem named `test`, starting with
/// `test_`, or ending with `_test`.
pub fn is_test_path(path: &str) -> bool {
    let normalized = path.replace('\\', "/");
    let mut segments = normalized.split('/').filter(|s| !s.is_empty()).peekable();
    while let Some(segment) = segments.next() {
        let is_last = segments.peek().is_none();
        if !is_last {
            if segment == "test" || segment == "tests" {
                return true;
            }
            continue;
        }
        let stem = segment.rsplit_once('.').map(|(s, _)| s).unwrap_or(segment);
        if stem == "test" || stem == "tests" || stem.starts_with("test_") || stem.ends_with("_test") {
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn test_path_rule() {
        assert!(is_test_path("tests/helpers.py"));
        assert!(is_test_path("pkg/test/x.py"));
        assert!(is_test_path("pkg/test_utils.py"));
        assert!(is_test_path("pkg/utils_test.py"));
        assert!(is_test_path("test.py"));
        assert!(!is_test_path("pkg/contest.py"));
        assert!(!is_test_path("pkg/testing_grounds/../real.py"));
        assert!(!is_test_path("src/latest/metrics.py"));
    }

    #[test]
    fn analyze_absent_snapshot() {
        let snap = analyze_snapshot("a.py", "c0", None, &DetectorConfig::default()).unwrap();
        assert!(!snap.present);
        assert_eq!(snap.metrics.function_count, 0);
        assert_eq!(snap.counts().values().sum::<u64>(), 0);
    }

    #[test]
    fn analyze_unparseable_snapshot_is_error() {
        let res = analyze_snapshot("a.py", "c0", Some(b"def f(:\n"), &DetectorConfig::default());
        assert!(res.is_err());
    }

    #[test]
    fn analyze_populates_names_and_counts() {
        let src = b"from x import *\n\ndef f():\n    return 1\n";
        let snap = analyze_snapshot("a.py", "c0", Some(src), &DetectorConfig::default()).unwrap();
        assert!(snap.present);
        assert!(snap.function_names.contains("f"));
        assert_eq!(snap.counts()[&AlertKind::WildcardImport], 1);
    }
}
