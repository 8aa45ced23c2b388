//! Manual-intervention candidate selection: scan a working tree, split the
//! files into control and intervention groups with a seeded generator, and
//! choose one eligible alert kind per intervention file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use walkdir::WalkDir;

use crate::detect::{count_by_kind, detect_all, AlertKind, DetectorConfig};
use crate::error::{Error, Result};
use crate::source::parse_bytes;
use crate::vcs::is_test_path;

/// An alert kind is eligible for intervention when it occurs at most this
/// many times in the file.
pub const MAX_INSTANCES_FOR_INTERVENTION: u64 = 2;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterventionCandidate {
    pub path: PathBuf,
    pub kind: AlertKind,
    /// Lines of the chosen kind's instances.
    pub lines: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExcludedFile {
    pub path: PathBuf,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidatePlan {
    pub seed: u64,
    pub control: Vec<PathBuf>,
    pub intervention: Vec<InterventionCandidate>,
    pub excluded: Vec<ExcludedFile>,
}

/// Scan `root` for non-test Python files, split them 50/50 with the seeded
/// generator, and pick one alert kind with 1–2 instances per intervention
/// file. The plan is a pure function of (tree content, config, seed).
pub fn pick_candidates(root: &Path, cfg: &DetectorConfig, seed: u64) -> Result<CandidatePlan> {
    let mut files: Vec<PathBuf> = Vec::new();
    for entry in WalkDir::new(root).sort_by_file_name() {
        let entry = entry.map_err(|e| Error::Git(format!("walking {}: {e}", root.display())))?;
        if !entry.file_type().is_file() {
            continue;
        }
        let rel = entry
            .path()
            .strip_prefix(root)
            .unwrap_or(entry.path())
            .to_path_buf();
        let rel_str = rel.to_string_lossy();
        if rel_str.ends_with(".py") && !is_test_path(&rel_str) {
            files.push(rel);
        }
    }
    files.sort();

    let mut excluded = Vec::new();
    let mut analyzed: Vec<(PathBuf, BTreeMap<AlertKind, Vec<u32>>)> = Vec::new();
    for rel in files {
        let full = root.join(&rel);
        let bytes = std::fs::read(&full).map_err(|e| Error::io(&full, e))?;
        let unit = parse_bytes(&bytes, &rel);
        if !unit.parse_ok {
            excluded.push(ExcludedFile {
                path: rel,
                reason: format!(
                    "parse failure: {}",
                    unit.parse_error.as_deref().unwrap_or("unknown")
                ),
            });
            continue;
        }
        let alerts = detect_all(&unit, cfg);
        let mut by_kind: BTreeMap<AlertKind, Vec<u32>> = BTreeMap::new();
        for alert in &alerts {
            by_kind.entry(alert.kind).or_default().push(alert.line);
        }
        analyzed.push((rel, by_kind));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..analyzed.len()).collect();
    order.shuffle(&mut rng);
    let half = order.len() / 2;
    let mut intervention_idx: Vec<usize> = order[..half].to_vec();
    let mut control_idx: Vec<usize> = order[half..].to_vec();
    intervention_idx.sort_unstable();
    control_idx.sort_unstable();

    let mut intervention = Vec::new();
    for idx in intervention_idx {
        let (path, by_kind) = &analyzed[idx];
        let eligible: Vec<(&AlertKind, &Vec<u32>)> = by_kind
            .iter()
            .filter(|(_, lines)| {
                !lines.is_empty() && lines.len() as u64 <= MAX_INSTANCES_FOR_INTERVENTION
            })
            .collect();
        if eligible.is_empty() {
            excluded.push(ExcludedFile { path: path.clone(), reason: "no eligible kind".into() });
            continue;
        }
        let chosen = rng.random_range(0..eligible.len());
        let (kind, lines) = eligible[chosen];
        intervention.push(InterventionCandidate {
            path: path.clone(),
            kind: *kind,
            lines: lines.clone(),
        });
    }
    let control: Vec<PathBuf> = control_idx.iter().map(|&i| analyzed[i].0.clone()).collect();

    Ok(CandidatePlan { seed, control, intervention, excluded })
}
