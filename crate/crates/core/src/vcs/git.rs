//! Read-only git access through command-line plumbing.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;

use crate::error::{Error, Result};
use crate::vcs::{CommitRecord, FileChange};

#[derive(Debug, Clone)]
pub struct GitRepo {
    root: PathBuf,
}

impl GitRepo {
    pub fn open(path: impl AsRef<Path>) -> Result<GitRepo> {
        let root = path.as_ref().to_path_buf();
        let out = git(&root, &["rev-parse", "--git-dir"])?;
        if !out.status.success() {
            return Err(Error::Git(format!(
                "{} is not a readable git repository: {}",
                root.display(),
                String::from_utf8_lossy(&out.stderr).trim()
            )));
        }
        Ok(GitRepo { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// First-parent history, oldest first. With a path filter, only commits
    /// touching that path; an unknown path yields an empty list.
    pub fn list_commits(&self, path_filter: Option<&str>) -> Result<Vec<CommitRecord>> {
        let mut meta_args = vec![
            "log",
            "--first-parent",
            "--reverse",
            "--format=%x01%H%x00%ct%x00%P%x00%B",
        ];
        if let Some(path) = path_filter {
            meta_args.push("--");
            meta_args.push(path);
        }
        let meta_out = git(&self.root, &meta_args)?;
        if !meta_out.status.success() {
            let stderr = String::from_utf8_lossy(&meta_out.stderr);
            if is_empty_history(&stderr) {
                return Ok(Vec::new());
            }
            return Err(Error::Git(format!("git log failed: {}", stderr.trim())));
        }
        let mut commits = parse_log_metadata(&String::from_utf8_lossy(&meta_out.stdout))?;

        let mut stat_args = vec![
            "log",
            "--first-parent",
            "--reverse",
            "--no-renames",
            "--numstat",
            "--format=%x01%H",
        ];
        if let Some(path) = path_filter {
            stat_args.push("--");
            stat_args.push(path);
        }
        let stat_out = git(&self.root, &stat_args)?;
        if !stat_out.status.success() {
            return Err(Error::Git(format!(
                "git log --numstat failed: {}",
                String::from_utf8_lossy(&stat_out.stderr).trim()
            )));
        }
        let stats = parse_numstat(&String::from_utf8_lossy(&stat_out.stdout));
        for commit in &mut commits {
            if let Some(per_file) = stats.get(&commit.id) {
                commit.per_file = per_file.clone();
            }
        }
        Ok(commits)
    }

    /// File contents at a commit; `None` when the path is absent there.
    pub fn read_file_at(&self, commit: &str, path: &str) -> Result<Option<Vec<u8>>> {
        let spec = format!("{commit}:{path}");
        let out = git(&self.root, &["show", &spec])?;
        if out.status.success() {
            Ok(Some(out.stdout))
        } else {
            Ok(None)
        }
    }

    /// All paths present in the tree at a commit.
    pub fn list_files_at(&self, commit: &str) -> Result<Vec<String>> {
        let out = git(&self.root, &["ls-tree", "-r", "--name-only", "-z", commit])?;
        if !out.status.success() {
            return Err(Error::Git(format!(
                "git ls-tree failed: {}",
                String::from_utf8_lossy(&out.stderr).trim()
            )));
        }
        Ok(String::from_utf8_lossy(&out.stdout)
            .split('\0')
            .filter(|s| !s.is_empty())
            .map(String::from)
            .collect())
    }
}

fn git(root: &Path, args: &[&str]) -> Result<std::process::Output> {
    Command::new("git")
        .arg("-C")
        .arg(root)
        .args(args)
        .output()
        .map_err(|e| Error::Git(format!("failed to run git: {e}")))
}

fn is_empty_history(stderr: &str) -> bool {
    stderr.contains("does not have any commits yet")
        || stderr.contains("unknown revision")
        || stderr.contains("bad default revision")
}

/// Records start with `\x01` and carry `hash NUL timestamp NUL parents NUL
/// body`. Parents are empty for a root commit; bodies cannot contain NUL.
fn parse_log_metadata(raw: &str) -> Result<Vec<CommitRecord>> {
    let mut commits = Vec::new();
    for record in raw.split('\x01') {
        let record = record.trim_start_matches(['\n', '\r']);
        if record.is_empty() {
            continue;
        }
        let mut fields = record.splitn(4, '\0');
        let (Some(id), Some(ts), Some(parents), Some(body)) =
            (fields.next(), fields.next(), fields.next(), fields.next())
        else {
            return Err(Error::Git(format!("malformed log record: {record:?}")));
        };
        let timestamp: i64 = ts
            .trim()
            .parse()
            .map_err(|_| Error::Git(format!("bad commit timestamp {ts:?}")))?;
        let parent = parents.split_whitespace().next().map(String::from);
        commits.push(CommitRecord {
            id: id.trim().to_string(),
            timestamp,
            message: body.trim_end().to_string(),
            per_file: BTreeMap::new(),
            parent,
        });
    }
    Ok(commits)
}

/// Blocks are `\x01hash` then numstat lines `added TAB deleted TAB path`.
fn parse_numstat(raw: &str) -> BTreeMap<String, BTreeMap<String, FileChange>> {
    let mut stats = BTreeMap::new();
    for block in raw.split('\x01') {
        let block = block.trim_start_matches('\n');
        if block.is_empty() {
            continue;
        }
        let mut lines = block.lines();
        let Some(id) = lines.next() else { continue };
        let mut per_file = BTreeMap::new();
        for line in lines {
            let mut cols = line.splitn(3, '\t');
            let (Some(added), Some(deleted), Some(path)) = (cols.next(), cols.next(), cols.next())
            else {
                continue;
            };
            // Binary files report "-": count them as zero-line changes.
            let added = added.trim().parse().unwrap_or(0);
            let deleted = deleted.trim().parse().unwrap_or(0);
            per_file.insert(path.to_string(), FileChange { added, deleted });
        }
        stats.insert(id.trim().to_string(), per_file);
    }
    stats
}
