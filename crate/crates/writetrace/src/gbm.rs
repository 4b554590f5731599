//! Gradient-boosted regression trees for binary classification.
//!
//! Logistic loss, depth-limited trees grown by exact greedy split search
//! over midpoints of sorted unique feature values, leaf values by a single
//! Newton step (gradient sum over hessian sum, hessian floored at 1e-12).
//! Missing values are imputed with per-feature training medians, which are
//! stored in the model so prediction imputes the same way.
//!
//! Fitting is deterministic: no subsampling, split ties broken by lowest
//! feature index then lowest threshold, and all node statistics are
//! accumulated in a canonical row order so permuting the training rows does
//! not change the fitted model.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const MODEL_VERSION: u32 = 1;
const HESSIAN_FLOOR: f64 = 1e-12;
const MIN_GAIN: f64 = 1e-12;

/// Training hyperparameters; serialized with the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub n_rounds: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub min_leaf: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            n_rounds: 200,
            learning_rate: 0.1,
            max_depth: 3,
            min_leaf: 5,
            seed: 0,
        }
    }
}

/// One tree node; trees are stored as arenas with the root at index 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        value: f64,
    },
}

/// One regression tree over imputed feature rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    /// Unscaled leaf value for a dense (imputed) row.
    pub fn predict(&self, row: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { value } => return *value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    i = if row[*feature] < *threshold {
                        *left
                    } else {
                        *right
                    };
                }
            }
        }
    }
}

/// Fitted gradient-boosted ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbmModel {
    pub version: u32,
    pub config: TrainConfig,
    pub feature_names: Vec<String>,
    /// Per-feature training medians used to fill missing values.
    pub imputation_values: Vec<f64>,
    /// Log-odds of the training positive rate.
    pub base_score: f64,
    pub trees: Vec<Tree>,
    /// Mean training logistic loss before any tree and after each round.
    pub train_loss: Vec<f64>,
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Numerically stable mean logistic loss of raw scores against 0/1 labels.
fn logistic_loss(scores: &[f64], labels: &[u8]) -> f64 {
    let n = scores.len() as f64;
    scores
        .iter()
        .zip(labels)
        .map(|(&f, &y)| {
            // softplus(f) - y*f, stable for large |f|
            let softplus = f.max(0.0) + (-f.abs()).exp().ln_1p();
            softplus - f64::from(y) * f
        })
        .sum::<f64>()
        / n
}

fn median_of(mut values: Vec<f64>) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

/// Sum gradient/hessian pairs in a canonical order so the result does not
/// depend on the caller's row order.
fn canonical_sums(pairs: &mut [(f64, f64)]) -> (f64, f64) {
    pairs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut g = 0.0;
    let mut h = 0.0;
    for (gi, hi) in pairs.iter() {
        g += gi;
        h += hi;
    }
    (g, h)
}

struct TreeBuilder<'a> {
    x: &'a [Vec<f64>], // imputed rows
    grad: &'a [f64],
    hess: &'a [f64],
    config: &'a TrainConfig,
    nodes: Vec<Node>,
}

impl<'a> TreeBuilder<'a> {
    fn leaf_value(&self, rows: &[usize]) -> f64 {
        let mut pairs: Vec<(f64, f64)> =
            rows.iter().map(|&r| (self.grad[r], self.hess[r])).collect();
        let (g, h) = canonical_sums(&mut pairs);
        -g / h.max(HESSIAN_FLOOR)
    }

    fn build(&mut self, rows: Vec<usize>, depth: usize) -> usize {
        if depth < self.config.max_depth && rows.len() >= 2 * self.config.min_leaf {
            if let Some((feature, threshold)) = self.best_split(&rows) {
                let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows
                    .into_iter()
                    .partition(|&r| self.x[r][feature] < threshold);
                let idx = self.nodes.len();
                self.nodes.push(Node::Leaf { value: 0.0 }); // placeholder
                let left = self.build(left_rows, depth + 1);
                let right = self.build(right_rows, depth + 1);
                self.nodes[idx] = Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                };
                return idx;
            }
        }
        let idx = self.nodes.len();
        self.nodes.push(Node::Leaf {
            value: self.leaf_value(&rows),
        });
        idx
    }

    /// Exact greedy search: candidate thresholds are midpoints between
    /// adjacent distinct values; gain is the standard second-order score
    /// G_L^2/H_L + G_R^2/H_R - G^2/H. Strictly better gain wins, so the
    /// first candidate in (feature index, threshold) order takes ties.
    fn best_split(&self, rows: &[usize]) -> Option<(usize, f64)> {
        let n_features = self.x[rows[0]].len();
        let mut all: Vec<(f64, f64)> = rows
            .iter()
            .map(|&r| (self.grad[r], self.hess[r]))
            .collect();
        let (g_total, h_total) = canonical_sums(&mut all);
        let parent_score = g_total * g_total / h_total.max(HESSIAN_FLOOR);

        let mut best: Option<(f64, usize, f64)> = None; // (gain, feature, threshold)
        for feature in 0..n_features {
            // Sort by (value, grad, hess): canonical under row permutation.
            let mut ordered: Vec<(f64, f64, f64)> = rows
                .iter()
                .map(|&r| (self.x[r][feature], self.grad[r], self.hess[r]))
                .collect();
            ordered.sort_by(|a, b| a.partial_cmp(b).unwrap());

            let mut g_left = 0.0;
            let mut h_left = 0.0;
            for i in 0..ordered.len() - 1 {
                g_left += ordered[i].1;
                h_left += ordered[i].2;
                if ordered[i].0 == ordered[i + 1].0 {
                    continue; // not a value boundary
                }
                let n_left = i + 1;
                let n_right = ordered.len() - n_left;
                if n_left < self.config.min_leaf || n_right < self.config.min_leaf {
                    continue;
                }
                let g_right = g_total - g_left;
                let h_right = h_total - h_left;
                let gain = g_left * g_left / h_left.max(HESSIAN_FLOOR)
                    + g_right * g_right / h_right.max(HESSIAN_FLOOR)
                    - parent_score;
                if gain > MIN_GAIN && best.is_none_or(|(bg, _, _)| gain > bg) {
                    let threshold = (ordered[i].0 + ordered[i + 1].0) / 2.0;
                    best = Some((gain, feature, threshold));
                }
            }
        }
        best.map(|(_, feature, threshold)| (feature, threshold))
    }
}

/// Fit a boosted ensemble on rows with optional missing values.
///
/// Requires at least two rows, both classes present, and a rectangular
/// table. Deterministic given identical input.
pub fn fit_gbm(
    rows: &[Vec<Option<f64>>],
    labels: &[u8],
    feature_names: &[String],
    config: &TrainConfig,
) -> Result<GbmModel> {
    if rows.len() < 2 {
        return Err(Error::InvalidInput(
            "training needs at least two rows".into(),
        ));
    }
    if rows.len() != labels.len() {
        return Err(Error::InvalidInput(format!(
            "{} rows but {} labels",
            rows.len(),
            labels.len()
        )));
    }
    let n_features = feature_names.len();
    if rows.iter().any(|r| r.len() != n_features) {
        return Err(Error::SchemaMismatch(format!(
            "all rows must have {n_features} features"
        )));
    }
    let n_pos = labels.iter().filter(|&&y| y == 1).count();
    if n_pos == 0 || n_pos == labels.len() {
        return Err(Error::InvalidInput(
            "training needs both classes present".into(),
        ));
    }

    let imputation_values: Vec<f64> = (0..n_features)
        .map(|j| median_of(rows.iter().filter_map(|r| r[j]).collect()))
        .collect();
    let x: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| {
            r.iter()
                .enumerate()
                .map(|(j, v)| v.unwrap_or(imputation_values[j]))
                .collect()
        })
        .collect();

    let p = n_pos as f64 / labels.len() as f64;
    let base_score = (p / (1.0 - p)).ln();
    let mut scores = vec![base_score; x.len()];
    let mut train_loss = vec![logistic_loss(&scores, labels)];

    let mut trees = Vec::with_capacity(config.n_rounds);
    for _ in 0..config.n_rounds {
        let grad: Vec<f64> = scores
            .iter()
            .zip(labels)
            .map(|(&f, &y)| sigmoid(f) - f64::from(y))
            .collect();
        let hess: Vec<f64> = scores
            .iter()
            .map(|&f| {
                let p = sigmoid(f);
                p * (1.0 - p)
            })
            .collect();

        let mut builder = TreeBuilder {
            x: &x,
            grad: &grad,
            hess: &hess,
            config,
            nodes: Vec::new(),
        };
        let root = builder.build((0..x.len()).collect(), 0);
        debug_assert_eq!(root, 0);
        let tree = Tree {
            nodes: builder.nodes,
        };

        for (i, row) in x.iter().enumerate() {
            scores[i] += config.learning_rate * tree.predict(row);
        }
        train_loss.push(logistic_loss(&scores, labels));
        trees.push(tree);
    }

    debug_assert!(
        train_loss.windows(2).all(|w| w[1] <= w[0] + 1e-9),
        "training loss increased: {train_loss:?}"
    );

    Ok(GbmModel {
        version: MODEL_VERSION,
        config: config.clone(),
        feature_names: feature_names.to_vec(),
        imputation_values,
        base_score,
        trees,
        train_loss,
    })
}

impl GbmModel {
    /// Raw log-odds score; missing features are imputed with the stored
    /// training medians.
    pub fn predict_score(&self, row: &[Option<f64>]) -> Result<f64> {
        if row.len() != self.feature_names.len() {
            return Err(Error::SchemaMismatch(format!(
                "row has {} features, model expects {}",
                row.len(),
                self.feature_names.len()
            )));
        }
        let dense: Vec<f64> = row
            .iter()
            .enumerate()
            .map(|(j, v)| v.unwrap_or(self.imputation_values[j]))
            .collect();
        let tree_sum: f64 = self.trees.iter().map(|t| t.predict(&dense)).sum();
        Ok(self.base_score + self.config.learning_rate * tree_sum)
    }

    /// Probability of the positive class.
    pub fn predict_prob(&self, row: &[Option<f64>]) -> Result<f64> {
        Ok(sigmoid(self.predict_score(row)?))
    }

    pub fn save(&self, mut w: impl Write) -> Result<()> {
        serde_json::to_writer(&mut w, self).map_err(|e| Error::ModelFormat(e.to_string()))?;
        w.write_all(b"\n")?;
        Ok(())
    }

    pub fn load(r: impl Read) -> Result<Self> {
        let model: GbmModel =
            serde_json::from_reader(r).map_err(|e| Error::ModelFormat(e.to_string()))?;
        if model.version != MODEL_VERSION {
            return Err(Error::ModelFormat(format!(
                "unsupported model version {} (expected {MODEL_VERSION})",
                model.version
            )));
        }
        let n = model.feature_names.len();
        if model.imputation_values.len() != n {
            return Err(Error::ModelFormat(
                "imputation table does not match feature names".into(),
            ));
        }
        for tree in &model.trees {
            for node in &tree.nodes {
                if let Node::Split {
                    feature,
                    left,
                    right,
                    ..
                } = node
                {
                    if *feature >= n || *left >= tree.nodes.len() || *right >= tree.nodes.len() {
                        return Err(Error::ModelFormat("tree references out of range".into()));
                    }
                }
            }
        }
        Ok(model)
    }
}
