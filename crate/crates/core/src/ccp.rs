//! Corrective Commit Probability: commit classification, windowed ratios,
//! and the maximum-likelihood positive-rate correction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::keywords::{default_corrective_keywords, KeywordMatcher};
use crate::vcs::{CommitRecord, RemovalEvent};

/// Message-based bug-fix classifier with a configurable keyword list.
#[derive(Debug, Clone)]
pub struct CorrectiveClassifier {
    matcher: KeywordMatcher,
}

impl CorrectiveClassifier {
    pub fn new<S: AsRef<str>>(keywords: &[S]) -> Result<CorrectiveClassifier> {
        Ok(CorrectiveClassifier { matcher: KeywordMatcher::new(keywords)? })
    }

    pub fn classify(&self, message: &str) -> bool {
        self.matcher.matches(message)
    }
}

impl Default for CorrectiveClassifier {
    fn default() -> Self {
        CorrectiveClassifier::new(&default_corrective_keywords()).expect("default keywords compile")
    }
}

/// Classify with the default corrective keyword list.
pub fn classify_corrective(message: &str) -> bool {
    use std::sync::OnceLock;
    static DEFAULT: OnceLock<CorrectiveClassifier> = OnceLock::new();
    DEFAULT.get_or_init(CorrectiveClassifier::default).classify(message)
}

/// CCP over an ordered run of commits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CcpWindow {
    pub commit_ids: Vec<String>,
    pub corrective_count: u64,
    pub total: u64,
    pub ccp: f64,
}

/// Corrective ratio of a non-empty commit window.
pub fn ccp_of(commits: &[CommitRecord], classifier: &CorrectiveClassifier) -> Result<CcpWindow> {
    if commits.is_empty() {
        return Err(Error::InvalidInput("CCP window must contain at least one commit".into()));
    }
    let corrective_count = commits.iter().filter(|c| classifier.classify(&c.message)).count() as u64;
    let total = commits.len() as u64;
    Ok(CcpWindow {
        commit_ids: commits.iter().map(|c| c.id.clone()).collect(),
        corrective_count,
        total,
        ccp: corrective_count as f64 / total as f64,
    })
}

/// Classifier quality for the MLE correction; the estimator is defined only
/// when recall exceeds the false-positive rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifierQuality {
    pub recall: f64,
    pub false_positive_rate: f64,
}

impl ClassifierQuality {
    pub fn new(recall: f64, false_positive_rate: f64) -> Result<ClassifierQuality> {
        if !(recall > 0.0 && recall <= 1.0) {
            return Err(Error::InvalidInput(format!("recall must be in (0, 1], got {recall}")));
        }
        if !(0.0..1.0).contains(&false_positive_rate) {
            return Err(Error::InvalidInput(format!(
                "false positive rate must be in [0, 1), got {false_positive_rate}"
            )));
        }
        if recall <= false_positive_rate {
            return Err(Error::InvalidInput(format!(
                "recall ({recall}) must exceed the false positive rate ({false_positive_rate})"
            )));
        }
        Ok(ClassifierQuality { recall, false_positive_rate })
    }
}

/// Invert the mixture `hit_rate = p * recall + (1 - p) * fpr` for the true
/// positive rate `p`, clamped into [0, 1].
pub fn mle_positive_rate(hit_rate: f64, quality: ClassifierQuality) -> Result<f64> {
    let denom = quality.recall - quality.false_positive_rate;
    if denom <= 0.0 {
        return Err(Error::UndefinedEstimator(
            "recall equals the false positive rate; the mixture cannot be inverted".into(),
        ));
    }
    Ok(((hit_rate - quality.false_positive_rate) / denom).clamp(0.0, 1.0))
}

/// Count-based event windows: all commits strictly before and strictly after
/// the event commit within the path's history. Absent when either side has
/// fewer than `min_commits` or the event commit is not in the history.
pub fn windows_for_event(
    event: &RemovalEvent,
    history: &[CommitRecord],
    min_commits: usize,
    classifier: &CorrectiveClassifier,
) -> Option<(CcpWindow, CcpWindow)> {
    let idx = history.iter().position(|c| c.id == event.commit.id)?;
    let before = &history[..idx];
    let after = &history[idx + 1..];
    if before.len() < min_commits || after.len() < min_commits {
        return None;
    }
    let before = ccp_of(before, classifier).expect("non-empty window");
    let after = ccp_of(after, classifier).expect("non-empty window");
    Some((before, after))
}

/// Time-boxed variant: windows hold the commits within `duration_secs` on
/// each side of the event commit, still requiring `min_commits` per side.
pub fn windows_for_event_timeboxed(
    event: &RemovalEvent,
    history: &[CommitRecord],
    duration_secs: i64,
    min_commits: usize,
    classifier: &CorrectiveClassifier,
) -> Option<(CcpWindow, CcpWindow)> {
    let idx = history.iter().position(|c| c.id == event.commit.id)?;
    let event_ts = history[idx].timestamp;
    let before: Vec<CommitRecord> = history[..idx]
        .iter()
        .filter(|c| c.timestamp >= event_ts - duration_secs)
        .cloned()
        .collect();
    let after: Vec<CommitRecord> = history[idx + 1..]
        .iter()
        .filter(|c| c.timestamp <= event_ts + duration_secs)
        .cloned()
        .collect();
    if before.len() < min_commits || after.len() < min_commits {
        return None;
    }
    let before = ccp_of(&before, classifier).expect("non-empty window");
    let after = ccp_of(&after, classifier).expect("non-empty window");
    Some((before, after))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixture::EventBuilder;

    fn commit(id: &str, ts: i64, message: &str) -> CommitRecord {
        CommitRecord {
            id: id.into(),
            timestamp: ts,
            message: message.into(),
            per_file: Default::default(),
            parent: None,
        }
    }

    fn history(messages: &[&str]) -> Vec<CommitRecord> {
        messages
            .iter()
            .enumerate()
            .map(|(i, m)| commit(&format!("c{i}"), 1000 + i as i64 * 100, m))
            .collect()
    }

    #[test]
    fn classify_examples() {
        assert!(classify_corrective("Fix crash on empty input"));
        assert!(!classify_corrective("Add feature flag"));
        assert!(!classify_corrective("prefix cleanup"));
    }

    #[test]
    fn ccp_ratios() {
        let classifier = CorrectiveClassifier::default();
        let commits = history(&[
            "fix a", "add b", "add c", "fix d", "add e", "add f", "add g", "add h", "add i", "add j",
        ]);
        let window = ccp_of(&commits, &classifier).unwrap();
        assert_eq!(window.corrective_count, 2);
        assert_eq!(window.total, 10);
        assert!((window.ccp - 0.20).abs() < 1e-12);

        let none = history(&["add a", "add b"]);
        assert_eq!(ccp_of(&none, &classifier).unwrap().ccp, 0.0);
        let all = history(&["fix a", "bug b"]);
        assert_eq!(ccp_of(&all, &classifier).unwrap().ccp, 1.0);
        assert!(ccp_of(&[], &classifier).is_err());
    }

    #[test]
    fn adding_corrective_commit_increases_ccp() {
        let classifier = CorrectiveClassifier::default();
        let base = history(&["add a", "fix b", "add c"]);
        let mut more = base.clone();
        more.push(commit("cx", 99_999, "fix regression"));
        let lo = ccp_of(&base, &classifier).unwrap().ccp;
        let hi = ccp_of(&more, &classifier).unwrap().ccp;
        assert!(hi > lo);
    }

    #[test]
    fn mle_examples() {
        let q = ClassifierQuality::new(0.9, 0.1).unwrap();
        assert!((mle_positive_rate(0.5, q).unwrap() - 0.5).abs() < 1e-12);
        let perfect = ClassifierQuality::new(1.0, 0.0).unwrap();
        assert_eq!(mle_positive_rate(0.37, perfect).unwrap(), 0.37);
        // Hit rate below the false positive rate clamps to zero.
        assert_eq!(mle_positive_rate(0.05, q).unwrap(), 0.0);
        assert_eq!(mle_positive_rate(0.99, ClassifierQuality::new(0.5, 0.1).unwrap()).unwrap(), 1.0);
    }

    #[test]
    fn quality_validation() {
        assert!(ClassifierQuality::new(0.5, 0.5).is_err());
        assert!(ClassifierQuality::new(0.4, 0.5).is_err());
        assert!(ClassifierQuality::new(0.0, 0.0).is_err());
        assert!(ClassifierQuality::new(1.1, 0.0).is_err());
        assert!(ClassifierQuality::new(0.9, 1.0).is_err());
    }

    #[test]
    fn windows_sizes_and_threshold() {
        let classifier = CorrectiveClassifier::default();
        let mut commits = history(&[
            "a", "b", "c", "d", "e", "f", "g", "event here", "h", "i", "j", "k", "l", "m",
        ]);
        // 7 commits before index 7, 6 after.
        let event = EventBuilder::new().commit(commits[7].clone()).build();
        let (before, after) = windows_for_event(&event, &commits, 5, &classifier).unwrap();
        assert_eq!(before.total, 7);
        assert_eq!(after.total, 6);
        // Disjoint and excluding the event commit.
        assert!(!before.commit_ids.contains(&"c7".to_string()));
        assert!(!after.commit_ids.contains(&"c7".to_string()));
        assert!(before.commit_ids.iter().all(|id| !after.commit_ids.contains(id)));

        // 4 before, 9 after -> absent.
        let event4 = EventBuilder::new().commit(commits[4].clone()).build();
        assert!(windows_for_event(&event4, &commits, 5, &classifier).is_none());
        // Event at history head -> absent.
        let head = EventBuilder::new().commit(commits[0].clone()).build();
        assert!(windows_for_event(&head, &commits, 5, &classifier).is_none());
        // Unknown commit -> absent.
        commits.pop();
        let ghost = EventBuilder::new().commit(commit("ghost", 1, "x")).build();
        assert!(windows_for_event(&ghost, &commits, 1, &classifier).is_none());
    }

    #[test]
    fn timeboxed_windows_respect_duration() {
        let classifier = CorrectiveClassifier::default();
        let commits: Vec<CommitRecord> = (0..9)
            .map(|i| commit(&format!("c{i}"), 1000 * (i as i64 + 1), "add"))
            .collect();
        let event = EventBuilder::new().commit(commits[4].clone()).build();
        // Duration of 2100s captures two commits on each side.
        let (before, after) =
            windows_for_event_timeboxed(&event, &commits, 2100, 2, &classifier).unwrap();
        assert_eq!(before.total, 2);
        assert_eq!(after.total, 2);
        assert!(windows_for_event_timeboxed(&event, &commits, 2100, 3, &classifier).is_none());
    }

    #[test]
    fn mixture_recovery_smoke() {
        use rand::rngs::StdRng;
        use rand::{Rng, SeedableRng};
        let mut rng = StdRng::seed_from_u64(7);
        let quality = ClassifierQuality::new(0.8, 0.2).unwrap();
        let p = 0.35;
        let n = 20_000;
        let mut hits = 0u64;
        for _ in 0..n {
            let positive = rng.random::<f64>() < p;
            let hit = if positive {
                rng.random::<f64>() < quality.recall
            } else {
                rng.random::<f64>() < quality.false_positive_rate
            };
            hits += hit as u64;
        }
        let estimate = mle_positive_rate(hits as f64 / n as f64, quality).unwrap();
        assert!((estimate - p).abs() < 0.02, "estimate {estimate} vs planted {p}");
    }
}
