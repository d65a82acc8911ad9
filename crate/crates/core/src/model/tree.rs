//! CART classification tree with Gini impurity.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::ModelSchema;
use crate::dataset::{Dataset, FeatureKind};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitTest {
    /// `x <= threshold` goes left.
    LessOrEqual(f64),
    /// `x == category code` goes left.
    Equals(f64),
}

impl SplitTest {
    pub fn goes_left(&self, value: f64) -> bool {
        match *self {
            SplitTest::LessOrEqual(t) => value <= t,
            SplitTest::Equals(c) => value == c,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeNode {
    Split {
        feature: usize,
        test: SplitTest,
        left: usize,
        right: usize,
        counts: Vec<usize>,
    },
    Leaf {
        counts: Vec<usize>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub schema: ModelSchema,
    pub max_depth: usize,
    /// Node 0 is the root.
    pub nodes: Vec<TreeNode>,
}

/// One condition along a root-to-leaf path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleCondition {
    pub feature: usize,
    pub test: SplitTest,
    /// `false` when the path takes the right branch (test negated).
    pub holds: bool,
}

/// A root-to-leaf path of the tree read as an if-then rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionRule {
    pub conditions: Vec<RuleCondition>,
    pub class_index: usize,
    pub probabilities: Vec<f64>,
    pub support: usize,
}

fn normalize(counts: &[usize]) -> Vec<f64> {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return vec![1.0 / counts.len() as f64; counts.len()];
    }
    counts.iter().map(|&c| c as f64 / total as f64).collect()
}

fn gini(counts: &[usize], total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let n = total as f64;
    1.0 - counts
        .iter()
        .map(|&c| {
            let p = c as f64 / n;
            p * p
        })
        .sum::<f64>()
}

impl TreeParams {
    pub fn leaf_index(&self, x: &[f64]) -> usize {
        let mut node = 0;
        loop {
            match &self.nodes[node] {
                TreeNode::Leaf { .. } => return node,
                TreeNode::Split {
                    feature,
                    test,
                    left,
                    right,
                    ..
                } => {
                    node = if test.goes_left(x[*feature]) { *left } else { *right };
                }
            }
        }
    }

    pub fn predict_proba(&self, x: &[f64]) -> Vec<f64> {
        match &self.nodes[self.leaf_index(x)] {
            TreeNode::Leaf { counts } | TreeNode::Split { counts, .. } => normalize(counts),
        }
    }

    /// Depth of the deepest leaf (root alone has depth 0).
    pub fn depth(&self) -> usize {
        fn walk(nodes: &[TreeNode], at: usize) -> usize {
            match &nodes[at] {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn rules(&self) -> Vec<DecisionRule> {
        let mut out = Vec::new();
        let mut path = Vec::new();
        self.collect_rules(0, &mut path, &mut out);
        out
    }

    fn collect_rules(&self, at: usize, path: &mut Vec<RuleCondition>, out: &mut Vec<DecisionRule>) {
        match &self.nodes[at] {
            TreeNode::Leaf { counts } => {
                let probabilities = normalize(counts);
                out.push(DecisionRule {
                    conditions: path.clone(),
                    class_index: crate::math::argmax(&probabilities),
                    probabilities,
                    support: counts.iter().sum(),
                });
            }
            TreeNode::Split {
                feature,
                test,
                left,
                right,
                ..
            } => {
                for (child, holds) in [(*left, true), (*right, false)] {
                    path.push(RuleCondition {
                        feature: *feature,
                        test: *test,
                        holds,
                    });
                    self.collect_rules(child, path, out);
                    path.pop();
                }
            }
        }
    }
}

struct Builder<'a> {
    dataset: &'a Dataset,
    n_classes: usize,
    max_depth: usize,
    nodes: Vec<TreeNode>,
}

struct BestSplit {
    feature: usize,
    test: SplitTest,
    impurity: f64,
}

impl Builder<'_> {
    fn counts(&self, rows: &[usize]) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes];
        for &r in rows {
            counts[self.dataset.labels()[r]] += 1;
        }
        counts
    }

    fn grow(&mut self, rows: &[usize], depth: usize) -> usize {
        let counts = self.counts(rows);
        let id = self.nodes.len();
        self.nodes.push(TreeNode::Leaf {
            counts: counts.clone(),
        });
        let parent = gini(&counts, rows.len());
        if depth >= self.max_depth || parent == 0.0 {
            return id;
        }
        let Some(best) = self.best_split(rows) else {
            return id;
        };
        if parent - best.impurity <= 1e-12 {
            return id;
        }
        let (l, r): (Vec<usize>, Vec<usize>) = rows
            .iter()
            .partition(|&&i| best.test.goes_left(self.dataset.rows()[i][best.feature]));
        let left = self.grow(&l, depth + 1);
        let right = self.grow(&r, depth + 1);
        self.nodes[id] = TreeNode::Split {
            feature: best.feature,
            test: best.test,
            left,
            right,
            counts,
        };
        id
    }

    /// Lowest weighted child impurity; earlier feature / smaller threshold wins ties.
    fn best_split(&self, rows: &[usize]) -> Option<BestSplit> {
        let n = rows.len();
        let data = self.dataset.rows();
        let labels = self.dataset.labels();
        let total = self.counts(rows);
        let mut best: Option<BestSplit> = None;
        let mut consider = |feature: usize, test: SplitTest, left: &[usize], n_left: usize| {
            let n_right = n - n_left;
            if n_left == 0 || n_right == 0 {
                return;
            }
            let right: Vec<usize> = total.iter().zip(left).map(|(t, l)| t - l).collect();
            let impurity = (n_left as f64 * gini(left, n_left) + n_right as f64 * gini(&right, n_right))
                / n as f64;
            if best.as_ref().is_none_or(|b| impurity < b.impurity) {
                best = Some(BestSplit {
                    feature,
                    test,
                    impurity,
                });
            }
        };
        for (j, meta) in self.dataset.features().iter().enumerate() {
            match meta.kind {
                FeatureKind::Continuous => {
                    let mut sorted: Vec<usize> = rows.to_vec();
                    sorted.sort_by(|&a, &b| data[a][j].total_cmp(&data[b][j]));
                    let mut left = vec![0; self.n_classes];
                    for k in 0..sorted.len() - 1 {
                        left[labels[sorted[k]]] += 1;
                        let (a, b) = (data[sorted[k]][j], data[sorted[k + 1]][j]);
                        if a < b {
                            consider(j, SplitTest::LessOrEqual(0.5 * (a + b)), &left, k + 1);
                        }
                    }
                }
                FeatureKind::Categorical => {
                    let n_cat = meta.categories().map_or(0, |c| c.len());
                    for code in 0..n_cat {
                        let mut left = vec![0; self.n_classes];
                        let mut n_left = 0;
                        for &r in rows {
                            if data[r][j] == code as f64 {
                                left[labels[r]] += 1;
                                n_left += 1;
                            }
                        }
                        consider(j, SplitTest::Equals(code as f64), &left, n_left);
                    }
                }
            }
        }
        best
    }
}

pub(super) fn fit(dataset: &Dataset, max_depth: usize) -> TreeParams {
    let mut builder = Builder {
        dataset,
        n_classes: dataset.n_classes(),
        max_depth,
        nodes: Vec::new(),
    };
    let rows: Vec<usize> = (0..dataset.len()).collect();
    builder.grow(&rows, 0);
    TreeParams {
        schema: ModelSchema::of(dataset),
        max_depth,
        nodes: builder.nodes,
    }
}
