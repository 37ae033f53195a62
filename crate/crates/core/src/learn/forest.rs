//! Random forest of depth-capped CART trees with Gini splits.
//!
//! Each tree fits a bootstrap resample, considering a random feature subset
//! at every node (all features in natural order when the subset covers
//! them). Candidate thresholds are midpoints of consecutive distinct sorted
//! values; the first strictly-best split wins, which keeps fitting fully
//! deterministic under the configured seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{check_xy, TrainError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_leaf: usize,
    /// Features considered per split; `None` means floor(sqrt(d)).
    pub mtry: Option<usize>,
    /// Fit each tree on an n-sample bootstrap resample.
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 100,
            max_depth: 4,
            min_leaf: 1,
            mtry: None,
            bootstrap: true,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        class1_fraction: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    /// Leaf value reached by `x`.
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut idx = 0;
        loop {
            match &self.nodes[idx] {
                Node::Leaf { class1_fraction } => return *class1_fraction,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    idx = if x[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    /// Number of split levels on the deepest path (a lone leaf is depth 0).
    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], idx: usize) -> usize {
            match &nodes[idx] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<Tree>,
    pub n_trees: usize,
    pub max_depth: usize,
    /// Seed each tree's bootstrap/feature sampling derived from.
    pub tree_seeds: Vec<u64>,
}

impl ForestModel {
    /// Mean leaf class-1 fraction across trees.
    pub fn score(&self, x: &[f64]) -> f64 {
        let sum: f64 = self.trees.iter().map(|t| t.predict(x)).sum();
        sum / self.trees.len() as f64
    }
}

struct SplitChoice {
    feature: usize,
    threshold: f64,
    impurity: f64,
}

fn gini(ones: usize, total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let p = ones as f64 / total as f64;
    2.0 * p * (1.0 - p)
}

/// Best Gini split over `features`, or None when no threshold satisfies the
/// min-leaf constraint or improves on a pure assignment.
fn best_split(
    x: &[Vec<f64>],
    y: &[u8],
    indices: &[usize],
    features: &[usize],
    min_leaf: usize,
) -> Option<SplitChoice> {
    let n = indices.len();
    let mut best: Option<SplitChoice> = None;
    let mut pairs: Vec<(f64, u8)> = Vec::with_capacity(n);
    for &f in features {
        pairs.clear();
        pairs.extend(indices.iter().map(|&i| (x[i][f], y[i])));
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

        let total_ones = pairs.iter().filter(|(_, l)| *l == 1).count();
        let mut left_ones = 0usize;
        for k in 1..n {
            left_ones += (pairs[k - 1].1 == 1) as usize;
            if pairs[k - 1].0 == pairs[k].0 {
                continue;
            }
            if k < min_leaf || n - k < min_leaf {
                continue;
            }
            let impurity = (k as f64 * gini(left_ones, k)
                + (n - k) as f64 * gini(total_ones - left_ones, n - k))
                / n as f64;
            let threshold = (pairs[k - 1].0 + pairs[k].0) / 2.0;
            let better = match &best {
                None => true,
                Some(b) => impurity < b.impurity,
            };
            if better {
                best = Some(SplitChoice {
                    feature: f,
                    threshold,
                    impurity,
                });
            }
        }
    }
    best
}

fn grow(
    nodes: &mut Vec<Node>,
    x: &[Vec<f64>],
    y: &[u8],
    indices: Vec<usize>,
    depth: usize,
    params: &ForestParams,
    mtry: usize,
    rng: &mut ChaCha8Rng,
) -> usize {
    let d = x[0].len();
    let ones = indices.iter().filter(|&&i| y[i] == 1).count();
    let fraction = ones as f64 / indices.len() as f64;

    let make_leaf = |nodes: &mut Vec<Node>| {
        nodes.push(Node::Leaf {
            class1_fraction: fraction,
        });
        nodes.len() - 1
    };

    if depth >= params.max_depth || ones == 0 || ones == indices.len() || indices.len() < 2 {
        return make_leaf(nodes);
    }

    let features: Vec<usize> = if mtry >= d {
        (0..d).collect()
    } else {
        sample_without_replacement(d, mtry, rng)
    };

    let Some(choice) = best_split(x, y, &indices, &features, params.min_leaf) else {
        return make_leaf(nodes);
    };
    let parent_impurity = gini(ones, indices.len());
    if choice.impurity >= parent_impurity {
        return make_leaf(nodes);
    }

    let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = indices
        .into_iter()
        .partition(|&i| x[i][choice.feature] <= choice.threshold);

    let here = nodes.len();
    nodes.push(Node::Leaf {
        class1_fraction: fraction,
    });
    let left = grow(nodes, x, y, left_idx, depth + 1, params, mtry, rng);
    let right = grow(nodes, x, y, right_idx, depth + 1, params, mtry, rng);
    nodes[here] = Node::Split {
        feature: choice.feature,
        threshold: choice.threshold,
        left,
        right,
    };
    here
}

fn sample_without_replacement(d: usize, m: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..d).collect();
    for k in 0..m {
        let j = rng.random_range(k..d);
        pool.swap(k, j);
    }
    pool.truncate(m);
    pool
}

pub fn train_forest(
    x: &[Vec<f64>],
    y: &[u8],
    params: &ForestParams,
) -> Result<ForestModel, TrainError> {
    let d = check_xy(x, y)?;
    if params.n_trees == 0 {
        return Err(TrainError::InsufficientRows { needed: 1, got: 0 });
    }
    let mtry = params
        .mtry
        .unwrap_or_else(|| (d as f64).sqrt().floor() as usize)
        .max(1);
    let mut master = ChaCha8Rng::seed_from_u64(params.seed);
    let tree_seeds: Vec<u64> = (0..params.n_trees).map(|_| master.random()).collect();

    let n = x.len();
    let mut trees = Vec::with_capacity(params.n_trees);
    for &seed in &tree_seeds {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let indices: Vec<usize> = if params.bootstrap {
            (0..n).map(|_| rng.random_range(0..n)).collect()
        } else {
            (0..n).collect()
        };
        let mut nodes = Vec::new();
        // A bootstrap resample can be single-class; the root just becomes
        // that class's leaf.
        grow(&mut nodes, x, y, indices, 0, params, mtry, &mut rng);
        trees.push(Tree { nodes });
    }

    Ok(ForestModel {
        trees,
        n_trees: params.n_trees,
        max_depth: params.max_depth,
        tree_seeds,
    })
}
