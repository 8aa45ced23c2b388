//! Alert-removal mining over first-parent history.

use std::collections::BTreeSet;

use rayon::prelude::*;

use crate::detect::{AlertKind, DetectorConfig};
use crate::error::{Error, Result};
use crate::keywords::KeywordMatcher;
use crate::vcs::{analyze_snapshot, is_test_path, CommitRecord, GitRepo, RemovalEvent};

#[derive(Debug, Clone)]
pub struct MineConfig {
    pub detectors: DetectorConfig,
    pub refactor_keywords: Vec<String>,
    /// Skip files matched by the shared test-file rule.
    pub exclude_tests: bool,
}

impl Default for MineConfig {
    fn default() -> Self {
        MineConfig {
            detectors: DetectorConfig::default(),
            refactor_keywords: crate::keywords::default_refactor_keywords(),
            exclude_tests: true,
        }
    }
}

#[derive(Debug, Clone)]
pub enum MineTargets {
    /// Every Python file touched by history.
    All,
    /// Only these (path, kind) pairs, as produced by `snapshot_filter`.
    Pairs(Vec<(String, AlertKind)>),
}

impl MineTargets {
    fn accepts_path(&self, path: &str) -> bool {
        match self {
            MineTargets::All => true,
            MineTargets::Pairs(pairs) => pairs.iter().any(|(p, _)| p == path),
        }
    }

    fn accepts_kind(&self, path: &str, kind: AlertKind) -> bool {
        match self {
            MineTargets::All => true,
            MineTargets::Pairs(pairs) => pairs.iter().any(|(p, k)| p == path && *k == kind),
        }
    }
}

fn eligible_path(path: &str, cfg: &MineConfig) -> bool {
    path.ends_with(".py") && !(cfg.exclude_tests && is_test_path(path))
}

/// Walk every commit, analyze parent and child snapshots of each touched
/// target file, and emit one event per alert kind whose count strictly
/// decreased. Unparseable snapshots skip their (commit, file) pair with a
/// logged diagnostic.
pub fn mine_removals(
    repo: &GitRepo,
    targets: &MineTargets,
    cfg: &MineConfig,
) -> Result<Vec<RemovalEvent>> {
    let commits = repo.list_commits(None)?;
    let matcher = KeywordMatcher::new(&cfg.refactor_keywords)?;
    let work: Vec<(usize, String)> = commits
        .iter()
        .enumerate()
        .flat_map(|(idx, commit)| {
            commit
                .per_file
                .keys()
                .filter(|path| eligible_path(path, cfg) && targets.accepts_path(path))
                .map(move |path| (idx, path.clone()))
                .collect::<Vec<_>>()
        })
        .collect();

    let batches: Vec<Result<Vec<RemovalEvent>>> = work
        .par_iter()
        .map(|(idx, path)| mine_pair(repo, &commits[*idx], path, targets, cfg, &matcher))
        .collect();

    let mut events = Vec::new();
    for batch in batches {
        events.extend(batch?);
    }
    Ok(events)
}

fn mine_pair(
    repo: &GitRepo,
    commit: &CommitRecord,
    path: &str,
    targets: &MineTargets,
    cfg: &MineConfig,
    matcher: &KeywordMatcher,
) -> Result<Vec<RemovalEvent>> {
    let before_bytes = match &commit.parent {
        Some(parent) => repo.read_file_at(parent, path)?,
        None => None,
    };
    let after_bytes = repo.read_file_at(&commit.id, path)?;
    let parent_id = commit.parent.clone().unwrap_or_default();
    let before = match analyze_snapshot(path, &parent_id, before_bytes.as_deref(), &cfg.detectors) {
        Ok(snap) => snap,
        Err(diag) => {
            log::warn!("skipping {}:{path}: parent snapshot unparseable: {diag}", commit.id);
            return Ok(Vec::new());
        }
    };
    let after = match analyze_snapshot(path, &commit.id, after_bytes.as_deref(), &cfg.detectors) {
        Ok(snap) => snap,
        Err(diag) => {
            log::warn!("skipping {}:{path}: snapshot unparseable: {diag}", commit.id);
            return Ok(Vec::new());
        }
    };

    let counts_before = before.counts();
    let counts_after = after.counts();
    let change = commit.per_file.get(path).copied().unwrap_or(crate::vcs::FileChange {
        added: 0,
        deleted: 0,
    });
    let new_function_added = after
        .function_names
        .difference(&before.function_names)
        .next()
        .is_some();
    let message_mentions_refactor = matcher.matches(&commit.message);

    let mut events = Vec::new();
    for (kind, &before_count) in &counts_before {
        let after_count = counts_after[kind];
        if after_count >= before_count || !targets.accepts_kind(path, *kind) {
            continue;
        }
        events.push(RemovalEvent {
            alert_kind: *kind,
            path: path.to_string(),
            commit: commit.clone(),
            removed_count: before_count - after_count,
            before: before.clone(),
            after: after.clone(),
            mccabe_max_diff: after.metrics.mccabe_max as i64 - before.metrics.mccabe_max as i64,
            mccabe_sum_diff: after.metrics.mccabe_sum as i64 - before.metrics.mccabe_sum as i64,
            loc_diff: after.metrics.loc as i64 - before.metrics.loc as i64,
            added_lines: change.added,
            deleted_lines: change.deleted,
            new_function_added,
            message_mentions_refactor,
        });
    }
    Ok(events)
}

/// Two-snapshot gate: (path, kind) pairs where the kind is present in the
/// file at the last commit at or before `snapshot_a`, the file changed in
/// (a, b], and the kind is absent at the last commit at or before
/// `snapshot_b`. These pairs bound the per-commit mining.
pub fn snapshot_filter(
    repo: &GitRepo,
    snapshot_a: i64,
    snapshot_b: i64,
    cfg: &MineConfig,
) -> Result<Vec<(String, AlertKind)>> {
    if snapshot_a >= snapshot_b {
        return Err(Error::InvalidInput(format!(
            "snapshot_a ({snapshot_a}) must precede snapshot_b ({snapshot_b})"
        )));
    }
    let commits = repo.list_commits(None)?;
    let idx_a = last_at_or_before(&commits, snapshot_a);
    let idx_b = last_at_or_before(&commits, snapshot_b);
    let (Some(idx_a), Some(idx_b)) = (idx_a, idx_b) else {
        return Ok(Vec::new());
    };
    if idx_b <= idx_a {
        return Ok(Vec::new());
    }
    let commit_a = &commits[idx_a];
    let commit_b = &commits[idx_b];

    let changed: BTreeSet<&String> = commits[idx_a + 1..=idx_b]
        .iter()
        .flat_map(|c| c.per_file.keys())
        .collect();

    let files_at_a: Vec<String> = repo
        .list_files_at(&commit_a.id)?
        .into_iter()
        .filter(|p| eligible_path(p, cfg) && changed.contains(p))
        .collect();

    let pairs: Vec<Result<Vec<(String, AlertKind)>>> = files_at_a
        .par_iter()
        .map(|path| {
            let at_a = repo.read_file_at(&commit_a.id, path)?;
            let at_b = repo.read_file_at(&commit_b.id, path)?;
            // Files absent at either snapshot are skipped.
            let (Some(at_a), Some(at_b)) = (at_a, at_b) else {
                return Ok(Vec::new());
            };
            let before = match analyze_snapshot(path, &commit_a.id, Some(&at_a), &cfg.detectors) {
                Ok(s) => s,
                Err(_) => return Ok(Vec::new()),
            };
            let after = match analyze_snapshot(path, &commit_b.id, Some(&at_b), &cfg.detectors) {
                Ok(s) => s,
                Err(_) => return Ok(Vec::new()),
            };
            let counts_a = before.counts();
            let counts_b = after.counts();
            Ok(counts_a
                .iter()
                .filter(|(kind, &count)| count > 0 && counts_b[*kind] == 0)
                .map(|(kind, _)| (path.clone(), *kind))
                .collect())
        })
        .collect();

    let mut out = Vec::new();
    for batch in pairs {
        out.extend(batch?);
    }
    out.sort();
    Ok(out)
}

fn last_at_or_before(commits: &[CommitRecord], instant: i64) -> Option<usize> {
    let mut found = None;
    for (idx, commit) in commits.iter().enumerate() {
        if commit.timestamp <= instant {
            found = Some(idx);
        }
    }
    found
}
