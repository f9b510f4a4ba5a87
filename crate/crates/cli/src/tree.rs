//! Dendrogram file formats.

use anyhow::{Context, Result};
use baryclust::ward::Merge;
use baryclust::Dendrogram;
use serde::{Deserialize, Serialize};
use std::fmt::Write;
use std::path::Path;

#[derive(Debug, Serialize, Deserialize)]
pub struct MergeRecord {
    pub left: usize,
    pub right: usize,
    /// Ward cost of the merge (inertia gain).
    pub height: f64,
    pub size: usize,
    pub mass: f64,
}

/// Leaves are `0..leaves`; merge `j` creates node `leaves + j`.
#[derive(Debug, Serialize, Deserialize)]
pub struct DendrogramFile {
    pub leaves: usize,
    /// Input row of every leaf.
    pub row_ids: Vec<usize>,
    pub merges: Vec<MergeRecord>,
}

impl DendrogramFile {
    pub fn new(d: &Dendrogram, row_ids: &[usize]) -> Self {
        DendrogramFile {
            leaves: d.leaves(),
            row_ids: row_ids.to_vec(),
            merges: d
                .merges()
                .iter()
                .map(|m| MergeRecord {
                    left: m.left,
                    right: m.right,
                    height: m.cost,
                    size: m.size,
                    mass: m.mass,
                })
                .collect(),
        }
    }

    pub fn load(path: &Path) -> Result<(Dendrogram, Vec<usize>)> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let file: DendrogramFile =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        if file.row_ids.len() != file.leaves {
            return Err(crate::UsageError(format!(
                "{}: {} row ids for {} leaves",
                path.display(),
                file.row_ids.len(),
                file.leaves
            ))
            .into());
        }
        let merges = file
            .merges
            .iter()
            .enumerate()
            .map(|(j, m)| Merge {
                left: m.left,
                right: m.right,
                cost: m.height,
                node: file.leaves + j,
                mass: m.mass,
                size: m.size,
            })
            .collect();
        let d = Dendrogram::from_merges(file.leaves, merges).with_context(|| format!("checking {}", path.display()))?;
        Ok((d, file.row_ids))
    }
}

/// Height of every node: 0 for leaves, the merge cost for internal nodes.
pub fn node_heights(d: &Dendrogram) -> Vec<f64> {
    let mut h = vec![0.0; d.leaves()];
    h.extend(d.merges().iter().map(|m| m.cost));
    h
}

fn parents(d: &Dendrogram) -> Vec<usize> {
    let n = d.leaves();
    let mut p = vec![usize::MAX; 2 * n - 1];
    for m in d.merges() {
        p[m.left] = m.node;
        p[m.right] = m.node;
    }
    p
}

/// Newick text with leaf names taken from `row_ids` and branch lengths
/// equal to the height difference between parent and child.
pub fn newick(d: &Dendrogram, row_ids: &[usize]) -> String {
    enum Step {
        Visit(usize),
        Comma,
        Close(usize),
    }
    let n = d.leaves();
    let heights = node_heights(d);
    let parent = parents(d);
    let root = 2 * n - 2;
    let mut out = String::new();
    let branch = |out: &mut String, node: usize| {
        if node != root {
            let _ = write!(out, ":{}", heights[parent[node]] - heights[node]);
        }
    };
    let mut stack = vec![Step::Visit(root)];
    while let Some(step) = stack.pop() {
        match step {
            Step::Visit(node) if node < n => {
                let _ = write!(out, "{}", row_ids[node]);
                branch(&mut out, node);
            }
            Step::Visit(node) => {
                let m = &d.merges()[node - n];
                out.push('(');
                stack.push(Step::Close(node));
                stack.push(Step::Visit(m.right));
                stack.push(Step::Comma);
                stack.push(Step::Visit(m.left));
            }
            Step::Comma => out.push(','),
            Step::Close(node) => {
                out.push(')');
                branch(&mut out, node);
            }
        }
    }
    out.push_str(";\n");
    out
}

/// Leaves in drawing order (left subtree first).
pub fn leaf_order(d: &Dendrogram) -> Vec<usize> {
    let n = d.leaves();
    let mut order = Vec::with_capacity(n);
    let mut stack = vec![2 * n - 2];
    while let Some(node) = stack.pop() {
        if node < n {
            order.push(node);
        } else {
            let m = &d.merges()[node - n];
            stack.push(m.right);
            stack.push(m.left);
        }
    }
    order
}
