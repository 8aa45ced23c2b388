//! Scripted git repository construction for tests and benchmarks.
//!
//! Commits go through `git fast-import`, so building a thousand-commit
//! repository takes well under a second. Timestamps are scripted and
//! strictly increasing by default.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};

use crate::detect::AlertKind;
use crate::error::{Error, Result};
use crate::vcs::{CommitRecord, RemovalEvent, SnapshotAnalysis};

#[derive(Debug, Clone)]
pub struct PlannedCommit {
    pub message: String,
    pub timestamp: i64,
    /// `Some(content)` writes the file, `None` deletes it.
    pub files: BTreeMap<String, Option<String>>,
}

#[derive(Debug)]
pub struct RepoBuilder {
    root: PathBuf,
    commits: Vec<PlannedCommit>,
    next_timestamp: i64,
}

impl RepoBuilder {
    pub fn new(root: impl AsRef<Path>) -> RepoBuilder {
        RepoBuilder {
            root: root.as_ref().to_path_buf(),
            commits: Vec::new(),
            next_timestamp: 1_600_000_000,
        }
    }

    /// Queue a commit writing the given files (path, content).
    pub fn commit(&mut self, message: &str, files: &[(&str, &str)]) -> &mut Self {
        let files = files
            .iter()
            .map(|(p, c)| (p.to_string(), Some(c.to_string())))
            .collect();
        self.push(message, files)
    }

    /// Queue a commit that deletes the given paths.
    pub fn delete(&mut self, message: &str, paths: &[&str]) -> &mut Self {
        let files = paths.iter().map(|p| (p.to_string(), None)).collect();
        self.push(message, files)
    }

    pub fn commit_at(
        &mut self,
        message: &str,
        timestamp: i64,
        files: &[(&str, &str)],
    ) -> &mut Self {
        let files = files
            .iter()
            .map(|(p, c)| (p.to_string(), Some(c.to_string())))
            .collect();
        self.commits.push(PlannedCommit { message: message.into(), timestamp, files });
        self.next_timestamp = self.next_timestamp.max(timestamp + 1000);
        self
    }

    fn push(&mut self, message: &str, files: BTreeMap<String, Option<String>>) -> &mut Self {
        let timestamp = self.next_timestamp;
        self.next_timestamp += 1000;
        self.commits.push(PlannedCommit { message: message.into(), timestamp, files });
        self
    }

    /// Materialize the repository and return its path.
    pub fn build(&self) -> Result<PathBuf> {
        std::fs::create_dir_all(&self.root).map_err(|e| Error::io(&self.root, e))?;
        run_git(&self.root, &["init", "-q"])?;
        run_git(&self.root, &["symbolic-ref", "HEAD", "refs/heads/master"])?;

        let mut stream = String::new();
        for (n, commit) in self.commits.iter().enumerate() {
            let mark = n + 1;
            stream.push_str(&format!("commit refs/heads/master\nmark :{mark}\n"));
            stream.push_str(&format!(
                "author Fixture <fixture@example.com> {} +0000\n",
                commit.timestamp
            ));
            stream.push_str(&format!(
                "committer Fixture <fixture@example.com> {} +0000\n",
                commit.timestamp
            ));
            stream.push_str(&format!("data {}\n{}\n", commit.message.len(), commit.message));
            if n > 0 {
                stream.push_str(&format!("from :{n}\n"));
            }
            for (path, content) in &commit.files {
                match content {
                    Some(content) => {
                        stream.push_str(&format!("M 100644 inline {path}\n"));
                        stream.push_str(&format!("data {}\n{content}\n", content.len()));
                    }
                    None => stream.push_str(&format!("D {path}\n")),
                }
            }
            stream.push('\n');
        }
        stream.push_str("done\n");

        let mut child = Command::new("git")
            .arg("-C")
            .arg(&self.root)
            .args(["fast-import", "--quiet", "--done"])
            .stdin(Stdio::piped())
            .stdout(Stdio::null())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| Error::Git(format!("failed to spawn git fast-import: {e}")))?;
        child
            .stdin
            .as_mut()
            .expect("piped stdin")
            .write_all(stream.as_bytes())
            .map_err(|e| Error::Git(format!("fast-import stream: {e}")))?;
        let out = child
            .wait_with_output()
            .map_err(|e| Error::Git(format!("fast-import: {e}")))?;
        if !out.status.success() {
            return Err(Error::Git(format!(
                "git fast-import failed: {}",
                String::from_utf8_lossy(&out.stderr).trim()
            )));
        }
        Ok(self.root.clone())
    }
}

/// Synthetic removal events for exercising clauses, labeling functions, and
/// aggregation without a repository.
#[derive(Debug, Clone)]
pub struct EventBuilder {
    kind: AlertKind,
    path: String,
    commit: Option<CommitRecord>,
    added: u64,
    deleted: u64,
    mccabe_max_diff: i64,
    mccabe_sum_diff: i64,
    loc_diff: i64,
    new_function: bool,
    mentions_refactor: bool,
}

impl Default for EventBuilder {
    fn default() -> Self {
        Self::new()
    }
}

impl EventBuilder {
    pub fn new() -> EventBuilder {
        EventBuilder {
            kind: AlertKind::TooManyBranches,
            path: "src/module.py".into(),
            commit: None,
            added: 10,
            deleted: 5,
            mccabe_max_diff: 0,
            mccabe_sum_diff: 0,
            loc_diff: 0,
            new_function: false,
            mentions_refactor: false,
        }
    }

    pub fn kind(mut self, kind: AlertKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn path(mut self, path: &str) -> Self {
        self.path = path.into();
        self
    }

    pub fn commit(mut self, commit: CommitRecord) -> Self {
        self.commit = Some(commit);
        self
    }

    pub fn lines(mut self, added: u64, deleted: u64) -> Self {
        self.added = added;
        self.deleted = deleted;
        self
    }

    pub fn mccabe_max_diff(mut self, diff: i64) -> Self {
        self.mccabe_max_diff = diff;
        self
    }

    pub fn mccabe_sum_diff(mut self, diff: i64) -> Self {
        self.mccabe_sum_diff = diff;
        self
    }

    pub fn loc_diff(mut self, diff: i64) -> Self {
        self.loc_diff = diff;
        self
    }

    pub fn new_function(mut self, yes: bool) -> Self {
        self.new_function = yes;
        self
    }

    pub fn mentions_refactor(mut self, yes: bool) -> Self {
        self.mentions_refactor = yes;
        self
    }

    pub fn build(self) -> RemovalEvent {
        let commit = self.commit.unwrap_or_else(|| CommitRecord {
            id: "0000000000000000000000000000000000000000".into(),
            timestamp: 1_600_000_000,
            message: "synthetic".into(),
            per_file: BTreeMap::new(),
            parent: None,
        });
        RemovalEvent {
            alert_kind: self.kind,
            path: self.path.clone(),
            removed_count: 1,
            before: SnapshotAnalysis::absent(&self.path, "before"),
            after: SnapshotAnalysis::absent(&self.path, &commit.id),
            commit,
            mccabe_max_diff: self.mccabe_max_diff,
            mccabe_sum_diff: self.mccabe_sum_diff,
            loc_diff: self.loc_diff,
            added_lines: self.added,
            deleted_lines: self.deleted,
            new_function_added: self.new_function,
            message_mentions_refactor: self.mentions_refactor,
        }
    }
}

fn run_git(root: &Path, args: &[&str]) -> Result<()> {
    let out = Command::new("git")
        .arg("-C")
        .arg(root)
        .args(args)
        .output()
        .map_err(|e| Error::Git(format!("failed to run git: {e}")))?;
    if !out.status.success() {
        return Err(Error::Git(format!(
            "git {args:?} failed: {}",
            String::from_utf8_lossy(&out.stderr).trim()
        )));
    }
    Ok(())
}
