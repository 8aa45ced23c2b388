//! Depth-bounded decision tree over boolean features.
//!
//! Greedy Gini-impurity splits; ties go to the lowest feature index, and a
//! split is taken even at zero gain while depth remains. Leaves predict the
//! majority label, ties predicting negative.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TreeNode {
    Leaf { label: bool },
    Split { feature: usize, low: Box<TreeNode>, high: Box<TreeNode> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub root: TreeNode,
    pub max_depth: usize,
}

impl DecisionTree {
    pub fn predict(&self, row: &[bool]) -> bool {
        let mut node = &self.root;
        loop {
            match node {
                TreeNode::Leaf { label } => return *label,
                TreeNode::Split { feature, low, high } => {
                    node = if row.get(*feature).copied().unwrap_or(false) { high } else { low };
                }
            }
        }
    }

    pub fn training_accuracy(&self, x: &[Vec<bool>], y: &[bool]) -> f64 {
        let correct = x.iter().zip(y).filter(|(row, &label)| self.predict(row) == label).count();
        correct as f64 / y.len() as f64
    }

    /// Human-readable rule dump.
    pub fn rules(&self, feature_names: &[String]) -> String {
        fn walk(node: &TreeNode, names: &[String], indent: usize, out: &mut String) {
            let pad = "  ".repeat(indent);
            match node {
                TreeNode::Leaf { label } => {
                    out.push_str(&format!("{pad}predict {}\n", if *label { "reduced" } else { "not reduced" }));
                }
                TreeNode::Split { feature, low, high } => {
                    let name = names
                        .get(*feature)
                        .cloned()
                        .unwrap_or_else(|| format!("feature {feature}"));
                    out.push_str(&format!("{pad}if {name}:\n"));
                    walk(high, names, indent + 1, out);
                    out.push_str(&format!("{pad}else:\n"));
                    walk(low, names, indent + 1, out);
                }
            }
        }
        let mut out = String::new();
        walk(&self.root, feature_names, 0, &mut out);
        out
    }
}

pub fn train_tree(x: &[Vec<bool>], y: &[bool], max_depth: usize) -> Result<DecisionTree> {
    if max_depth < 1 {
        return Err(Error::InvalidInput("max_depth must be at least 1".into()));
    }
    if x.len() != y.len() || x.is_empty() {
        return Err(Error::InvalidInput(format!(
            "matrix rows ({}) must match labels ({}) and be non-empty",
            x.len(),
            y.len()
        )));
    }
    let dims = x[0].len();
    if x.iter().any(|row| row.len() != dims) {
        return Err(Error::InvalidInput("ragged feature matrix".into()));
    }
    let indices: Vec<usize> = (0..x.len()).collect();
    let root = build(x, y, &indices, max_depth);
    Ok(DecisionTree { root, max_depth })
}

fn majority(y: &[bool], indices: &[usize]) -> bool {
    let positives = indices.iter().filter(|&&i| y[i]).count();
    // Strictly more positives than negatives; a tie predicts negative.
    positives * 2 > indices.len()
}

fn gini(y: &[bool], indices: &[usize]) -> f64 {
    if indices.is_empty() {
        return 0.0;
    }
    let p = indices.iter().filter(|&&i| y[i]).count() as f64 / indices.len() as f64;
    2.0 * p * (1.0 - p)
}

fn is_pure(y: &[bool], indices: &[usize]) -> bool {
    indices.windows(2).all(|w| y[w[0]] == y[w[1]])
}

fn build(x: &[Vec<bool>], y: &[bool], indices: &[usize], depth: usize) -> TreeNode {
    if depth == 0 || is_pure(y, indices) {
        return TreeNode::Leaf { label: majority(y, indices) };
    }
    let dims = x[0].len();
    let total = indices.len() as f64;
    let mut best: Option<(f64, usize)> = None;
    for feature in 0..dims {
        let (low, high): (Vec<usize>, Vec<usize>) =
            indices.iter().partition(|&&i| !x[i][feature]);
        if low.is_empty() || high.is_empty() {
            continue;
        }
        let weighted = (low.len() as f64 / total) * gini(y, &low)
            + (high.len() as f64 / total) * gini(y, &high);
        // Strict improvement keeps ties on the lowest feature index.
        if best.map_or(true, |(b, _)| weighted < b) {
            best = Some((weighted, feature));
        }
    }
    let Some((_, feature)) = best else {
        return TreeNode::Leaf { label: majority(y, indices) };
    };
    let (low, high): (Vec<usize>, Vec<usize>) = indices.iter().partition(|&&i| !x[i][feature]);
    TreeNode::Split {
        feature,
        low: Box::new(build(x, y, &low, depth - 1)),
        high: Box::new(build(x, y, &high, depth - 1)),
    }
}

/// Best achievable number of correct training predictions by any tree of the
/// given depth, by exhaustive search over all split sequences. Test oracle
/// for tiny datasets.
pub fn exhaustive_best_correct(x: &[Vec<bool>], y: &[bool], indices: &[usize], depth: usize) -> usize {
    let positives = indices.iter().filter(|&&i| y[i]).count();
    let leaf_best = positives.max(indices.len() - positives);
    if depth == 0 || indices.is_empty() {
        return leaf_best;
    }
    let mut best = leaf_best;
    for feature in 0..x[0].len() {
        let (low, high): (Vec<usize>, Vec<usize>) = indices.iter().partition(|&&i| !x[i][feature]);
        if low.is_empty() || high.is_empty() {
            continue;
        }
        let split = exhaustive_best_correct(x, y, &low, depth - 1)
            + exhaustive_best_correct(x, y, &high, depth - 1);
        best = best.max(split);
    }
    best
}
