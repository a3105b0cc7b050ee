use super::{feature_set_of, FeatureVector, LabeledSample};
use crate::error::{Error, Result};
use crate::kv::{KvReader, KvWriter};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeConfig {
    pub max_depth: usize,
    /// Minimum number of samples on each side of a split.
    pub min_leaf: usize,
    /// Leaf label when a leaf holds equally many samples of both classes.
    pub tie_positive: bool,
}

impl Default for TreeConfig {
    fn default() -> Self {
        Self {
            max_depth: 8,
            min_leaf: 5,
            tie_positive: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TreeNode {
    Leaf {
        label: bool,
    },
    /// Samples with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeModel {
    pub dim: usize,
    /// Node 0 is the root.
    pub nodes: Vec<TreeNode>,
}

impl TreeModel {
    pub fn predict(&self, f: &FeatureVector) -> bool {
        let x = f.as_slice();
        let mut at = 0;
        loop {
            match self.nodes[at] {
                TreeNode::Leaf { label } => return label,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if x[feature] <= threshold { left } else { right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[TreeNode], at: usize) -> usize {
            match nodes[at] {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub(super) fn write(&self, w: &mut KvWriter) {
        w.put("dim", self.dim).put("nodes", self.nodes.len());
        for (i, node) in self.nodes.iter().enumerate() {
            let text = match *node {
                TreeNode::Leaf { label } => format!("leaf {}", u8::from(label)),
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => format!("split {feature} {threshold} {left} {right}"),
            };
            w.put(&format!("node.{i}"), text);
        }
    }

    pub(super) fn read(kv: &mut KvReader) -> Result<Self> {
        let dim: usize = kv.require("dim")?;
        let count: usize = kv.require("nodes")?;
        let mut nodes = Vec::with_capacity(count);
        for i in 0..count {
            let (line, raw) = kv.require_str(&format!("node.{i}"))?;
            let parts: Vec<&str> = raw.split_whitespace().collect();
            let bad = || Error::parse(line, format!("bad tree node `{raw}`"));
            let node = match parts.as_slice() {
                ["leaf", "0"] => TreeNode::Leaf { label: false },
                ["leaf", "1"] => TreeNode::Leaf { label: true },
                ["split", f, t, l, r] => {
                    let node = TreeNode::Split {
                        feature: f.parse().map_err(|_| bad())?,
                        threshold: t.parse().map_err(|_| bad())?,
                        left: l.parse().map_err(|_| bad())?,
                        right: r.parse().map_err(|_| bad())?,
                    };
                    match node {
                        TreeNode::Split { feature, left, right, .. }
                            if feature < dim && left < count && right < count && left > i && right > i => {}
                        _ => return Err(bad()),
                    }
                    node
                }
                _ => return Err(bad()),
            };
            nodes.push(node);
        }
        if nodes.is_empty() {
            return Err(Error::parse(0, "tree has no nodes"));
        }
        Ok(Self { dim, nodes })
    }
}

fn gini(pos: usize, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let p = pos as f64 / n as f64;
    2.0 * p * (1.0 - p)
}

struct Builder<'a> {
    data: &'a [LabeledSample],
    cfg: TreeConfig,
    dim: usize,
    nodes: Vec<TreeNode>,
}

impl Builder<'_> {
    fn leaf_label(&self, pos: usize, n: usize) -> bool {
        match (2 * pos).cmp(&n) {
            std::cmp::Ordering::Greater => true,
            std::cmp::Ordering::Less => false,
            std::cmp::Ordering::Equal => self.cfg.tie_positive,
        }
    }

    /// Best `(feature, threshold)` by Gini gain; `None` when no split improves
    /// impurity under the `min_leaf` constraint.
    fn best_split(&self, idx: &[usize]) -> Option<(usize, f64)> {
        let n = idx.len();
        let pos = idx.iter().filter(|&&i| self.data[i].label).count();
        let parent = gini(pos, n);
        let min_leaf = self.cfg.min_leaf.max(1);
        let mut best: Option<(f64, usize, f64)> = None;
        let mut column: Vec<(f64, bool)> = Vec::with_capacity(n);
        for feature in 0..self.dim {
            column.clear();
            column.extend(idx.iter().map(|&i| (self.data[i].features.as_slice()[feature], self.data[i].label)));
            column.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut left_pos = 0;
            for split in 1..n {
                left_pos += usize::from(column[split - 1].1);
                if column[split - 1].0 == column[split].0 || split < min_leaf || n - split < min_leaf {
                    continue;
                }
                let weighted = (split as f64 * gini(left_pos, split)
                    + (n - split) as f64 * gini(pos - left_pos, n - split))
                    / n as f64;
                let gain = parent - weighted;
                if gain > 1e-12 && best.is_none_or(|(g, _, _)| gain > g) {
                    best = Some((gain, feature, 0.5 * (column[split - 1].0 + column[split].0)));
                }
            }
        }
        best.map(|(_, f, t)| (f, t))
    }

    fn grow(&mut self, idx: Vec<usize>, depth: usize) -> usize {
        let at = self.nodes.len();
        let pos = idx.iter().filter(|&&i| self.data[i].label).count();
        self.nodes.push(TreeNode::Leaf {
            label: self.leaf_label(pos, idx.len()),
        });
        if depth >= self.cfg.max_depth {
            return at;
        }
        let Some((feature, threshold)) = self.best_split(&idx) else {
            return at;
        };
        let (l, r): (Vec<usize>, Vec<usize>) = idx
            .into_iter()
            .partition(|&i| self.data[i].features.as_slice()[feature] <= threshold);
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[at] = TreeNode::Split {
            feature,
            threshold,
            left,
            right,
        };
        at
    }
}

/// Greedy CART-style tree on Gini impurity over raw (unstandardized) features.
pub fn fit_tree(data: &[LabeledSample], cfg: &TreeConfig) -> Result<TreeModel> {
    let set = feature_set_of(data)?;
    let mut builder = Builder {
        data,
        cfg: *cfg,
        dim: set.dim(),
        nodes: Vec::new(),
    };
    builder.grow((0..data.len()).collect(), 0);
    Ok(TreeModel {
        dim: set.dim(),
        nodes: builder.nodes,
    })
}
