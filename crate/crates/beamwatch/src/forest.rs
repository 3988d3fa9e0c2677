//! From-scratch Isolation Forest: random binary trees over subsamples,
//! path-length scoring, contamination-calibrated thresholding and the final
//! decision function.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Euler constant used by the harmonic-number approximation.
pub const EULER_GAMMA: f64 = 0.5772156649;

/// Harmonic number approximation `H(m) = ln(m) + gamma`, used verbatim
/// including at m = 1.
pub fn harmonic(m: u64) -> Result<f64> {
    if m < 1 {
        return Err(Error::HarmonicUndefined);
    }
    Ok((m as f64).ln() + EULER_GAMMA)
}

/// Expected path length of an unsuccessful search in a binary search tree of
/// `n` points: `2 H(n-1) - 2(n-1)/n` for n >= 2, and 0 for n <= 1 (a single
/// point needs no split).
pub fn avg_path_length(n: usize) -> f64 {
    if n < 2 {
        return 0.0;
    }
    let nf = n as f64;
    2.0 * harmonic(n as u64 - 1).expect("n >= 2") - 2.0 * (nf - 1.0) / nf
}

/// One node of an isolation tree, stored in preorder in a flat arena.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Node {
    Split {
        feature: usize,
        value: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        size: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsolationTree {
    pub nodes: Vec<Node>,
    pub height_limit: usize,
}

impl IsolationTree {
    /// Recursively partitions `points` with uniformly random feature/value
    /// splits. A node becomes external at the height limit, when at most one
    /// point remains, or when all remaining points are identical.
    pub fn build(points: &[&[f64]], height_limit: usize, rng: &mut impl Rng) -> IsolationTree {
        let mut tree = IsolationTree {
            nodes: Vec::new(),
            height_limit,
        };
        let idx: Vec<usize> = (0..points.len()).collect();
        tree.build_node(points, &idx, height_limit, rng);
        tree
    }

    fn build_node(
        &mut self,
        points: &[&[f64]],
        idx: &[usize],
        depth_left: usize,
        rng: &mut impl Rng,
    ) -> usize {
        let dim = if points.is_empty() { 0 } else { points[0].len() };
        if depth_left == 0 || idx.len() <= 1 {
            let node = self.nodes.len();
            self.nodes.push(Node::Leaf { size: idx.len() });
            return node;
        }
        // Features with a non-degenerate range among the points at this node.
        let mut candidates = Vec::with_capacity(dim);
        for f in 0..dim {
            let mut mn = f64::INFINITY;
            let mut mx = f64::NEG_INFINITY;
            for &i in idx {
                let v = points[i][f];
                mn = mn.min(v);
                mx = mx.max(v);
            }
            if mx > mn {
                candidates.push((f, mn, mx));
            }
        }
        if candidates.is_empty() {
            let node = self.nodes.len();
            self.nodes.push(Node::Leaf { size: idx.len() });
            return node;
        }
        let (feature, mn, mx) = candidates[rng.gen_range(0..candidates.len())];
        let value = loop {
            let v = rng.gen_range(mn..mx);
            if v > mn {
                break v;
            }
        };
        let (left_idx, right_idx): (Vec<usize>, Vec<usize>) =
            idx.iter().partition(|&&i| points[i][feature] < value);

        let node = self.nodes.len();
        // Placeholder; preorder layout means left child is node + 1.
        self.nodes.push(Node::Leaf { size: 0 });
        let left = self.build_node(points, &left_idx, depth_left - 1, rng);
        let right = self.build_node(points, &right_idx, depth_left - 1, rng);
        self.nodes[node] = Node::Split {
            feature,
            value,
            left,
            right,
        };
        node
    }

    /// Path length `h(x)`: edges from the root to the reached external node
    /// plus `c(size)` of that node, the adjustment for unbuilt subtrees.
    pub fn path_length(&self, x: &[f64]) -> f64 {
        let mut node = 0usize;
        let mut depth = 0.0;
        loop {
            match &self.nodes[node] {
                Node::Leaf { size } => return depth + avg_path_length(*size),
                Node::Split {
                    feature,
                    value,
                    left,
                    right,
                } => {
                    node = if x[*feature] < *value { *left } else { *right };
                    depth += 1.0;
                }
            }
        }
    }
}

/// A fitted forest. Only produced by [`IsolationForestModel::fit`], so it is
/// always calibrated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsolationForestModel {
    pub trees: Vec<IsolationTree>,
    pub n_trees: usize,
    /// Subsample size used for `c(psi)` normalization.
    pub psi: usize,
    /// Contamination rate used for threshold calibration.
    pub tau: f64,
    /// `(1 - tau)`-quantile of the training scores.
    pub score_threshold: f64,
    pub seed: u64,
    dim: usize,
}

/// Verdict for one instance: the raw anomaly score, the decision value
/// `f = threshold - score`, and the final label (`true` = anomaly).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub score: f64,
    pub f_value: f64,
    pub anomalous: bool,
}

impl IsolationForestModel {
    /// Builds `n_trees` trees on independent uniform subsamples of size
    /// `psi` (lowered to the dataset size when smaller) with height limit
    /// `ceil(log2 psi)`, then calibrates the score threshold so that at most
    /// a `tau` fraction of the training points is flagged.
    ///
    /// Each tree draws its RNG stream from `(seed, tree index)`.
    pub fn fit(
        points: &[Vec<f64>],
        n_trees: usize,
        psi: usize,
        tau: f64,
        seed: u64,
    ) -> Result<Self> {
        let n = points.len();
        if n < 2 {
            return Err(Error::TooFewSamples { needed: 2, got: n });
        }
        if n_trees == 0 {
            return Err(Error::InvalidConfig("n_trees must be >= 1".into()));
        }
        if !(tau > 0.0 && tau <= 0.5) {
            return Err(Error::InvalidConfig(format!(
                "tau must be in (0, 0.5], got {tau}"
            )));
        }
        if psi < 2 {
            return Err(Error::InvalidConfig("psi must be >= 2".into()));
        }
        let dim = points[0].len();
        for p in points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: p.len(),
                });
            }
        }
        let psi = psi.min(n);
        let height_limit = (psi as f64).log2().ceil() as usize;

        let mut trees = Vec::with_capacity(n_trees);
        for t in 0..n_trees {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(t as u64 + 1);
            let sample = subsample(n, psi, &mut rng);
            let refs: Vec<&[f64]> = sample.iter().map(|&i| points[i].as_slice()).collect();
            trees.push(IsolationTree::build(&refs, height_limit, &mut rng));
        }

        let mut model = IsolationForestModel {
            trees,
            n_trees,
            psi,
            tau,
            score_threshold: 0.5,
            seed,
            dim,
        };
        // Higher-interpolation quantile: the smallest training score such
        // that at most a tau fraction lies strictly above it.
        let mut scores: Vec<f64> = points.iter().map(|p| model.score(p).expect("fitted")).collect();
        scores.sort_by(|a, b| b.partial_cmp(a).expect("finite scores"));
        let m = (tau * n as f64).floor() as usize;
        model.score_threshold = scores[m.min(n - 1)];
        Ok(model)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Mean path length over all trees.
    pub fn mean_path_length(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        let sum: f64 = self.trees.iter().map(|t| t.path_length(x)).sum();
        Ok(sum / self.trees.len() as f64)
    }

    /// Anomaly score `s = 2^(-E[h(x)] / c(psi))`, strictly in (0, 1) for any
    /// finite positive mean path length.
    pub fn score(&self, x: &[f64]) -> Result<f64> {
        Ok(anomaly_score(self.mean_path_length(x)?, self.psi))
    }

    /// Decision function `f = threshold - score`; anomaly iff `f < 0`
    /// (ties resolve to normal).
    pub fn decide(&self, x: &[f64]) -> Result<Decision> {
        let score = self.score(x)?;
        let f_value = self.score_threshold - score;
        Ok(Decision {
            score,
            f_value,
            anomalous: f_value < 0.0,
        })
    }
}

/// `s = 2^(-mean_path / c(psi))`.
pub fn anomaly_score(mean_path: f64, psi: usize) -> f64 {
    (2.0f64).powf(-mean_path / avg_path_length(psi))
}

/// Uniform subsample of `psi` indices out of `n`, without replacement.
fn subsample(n: usize, psi: usize, rng: &mut impl Rng) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    for i in 0..psi {
        let j = rng.gen_range(i..n);
        idx.swap(i, j);
    }
    idx.truncate(psi);
    idx
}

#[cfg(test)]
mod tests {
    use super::*;

    fn points_1d(vals: &[f64]) -> Vec<Vec<f64>> {
        vals.iter().map(|&v| vec![v]).collect()
    }

    #[test]
    fn harmonic_matches_direct_evaluation() {
        assert!((harmonic(1).unwrap() - EULER_GAMMA).abs() < 1e-15);
        assert!((harmonic(10).unwrap() - (10.0f64.ln() + EULER_GAMMA)).abs() < 1e-15);
        assert!(harmonic(0).is_err());
    }

    #[test]
    fn harmonic_is_monotone() {
        for m in 1..100u64 {
            assert!(harmonic(m + 1).unwrap() > harmonic(m).unwrap());
        }
    }

    #[test]
    fn avg_path_length_known_values() {
        assert_eq!(avg_path_length(0), 0.0);
        assert_eq!(avg_path_length(1), 0.0);
        assert!((avg_path_length(2) - (2.0 * EULER_GAMMA - 1.0)).abs() < 1e-12);
        let c256 = 2.0 * (255.0f64.ln() + EULER_GAMMA) - 510.0 / 256.0;
        assert!((avg_path_length(256) - c256).abs() < 1e-12);
    }

    #[test]
    fn build_tree_single_point() {
        let pts = points_1d(&[1.0]);
        let refs: Vec<&[f64]> = pts.iter().map(|p| p.as_slice()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let tree = IsolationTree::build(&refs, 8, &mut rng);
        assert_eq!(tree.nodes, vec![Node::Leaf { size: 1 }]);
        assert_eq!(tree.path_length(&[1.0]), 0.0);
    }

    #[test]
    fn build_tree_two_distinct_points_split_once() {
        let pts = points_1d(&[1.0, 5.0]);
        let refs: Vec<&[f64]> = pts.iter().map(|p| p.as_slice()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let tree = IsolationTree::build(&refs, 8, &mut rng);
        let leaves = tree
            .nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf { size: 1 }))
            .count();
        assert_eq!(leaves, 2);
        assert_eq!(tree.path_length(&[1.0]), 1.0);
        assert_eq!(tree.path_length(&[5.0]), 1.0);
    }

    #[test]
    fn build_tree_identical_points_become_one_leaf() {
        let pts = points_1d(&[3.0; 7]);
        let refs: Vec<&[f64]> = pts.iter().map(|p| p.as_slice()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let tree = IsolationTree::build(&refs, 8, &mut rng);
        assert_eq!(tree.nodes, vec![Node::Leaf { size: 7 }]);
        assert_eq!(tree.path_length(&[3.0]), avg_path_length(7));
    }

    #[test]
    fn path_length_adds_leaf_adjustment() {
        // Hand-built tree: root split, left leaf of size 4, right leaf of size 1.
        let tree = IsolationTree {
            nodes: vec![
                Node::Split {
                    feature: 0,
                    value: 10.0,
                    left: 1,
                    right: 2,
                },
                Node::Leaf { size: 4 },
                Node::Leaf { size: 1 },
            ],
            height_limit: 1,
        };
        let expected = 1.0 + 2.0 * (3.0f64.ln() + EULER_GAMMA) - 6.0 / 4.0;
        assert!((tree.path_length(&[0.0]) - expected).abs() < 1e-12);
        assert_eq!(tree.path_length(&[20.0]), 1.0);
    }

    #[test]
    fn score_boundary_values() {
        let psi = 64;
        assert!((anomaly_score(avg_path_length(psi), psi) - 0.5).abs() < 1e-15);
        assert_eq!(anomaly_score(0.0, psi), 1.0);
        assert!(anomaly_score(1e6, psi) < 1e-6);
    }

    #[test]
    fn fit_is_deterministic() {
        let pts = points_1d(&(0..100).map(|i| i as f64 * 0.1).collect::<Vec<_>>());
        let a = IsolationForestModel::fit(&pts, 20, 32, 0.1, 7).unwrap();
        let b = IsolationForestModel::fit(&pts, 20, 32, 0.1, 7).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn calibration_flags_tau_fraction() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts: Vec<Vec<f64>> = (0..1000)
            .map(|_| vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])
            .collect();
        let model = IsolationForestModel::fit(&pts, 50, 128, 0.1, 11).unwrap();
        let flagged = pts
            .iter()
            .filter(|p| model.decide(p).unwrap().anomalous)
            .count();
        assert!(
            (flagged as f64 / 1000.0 - 0.1).abs() <= 1.0 / 1000.0,
            "flagged {flagged}"
        );
    }

    fn gauss(rng: &mut ChaCha8Rng) -> f64 {
        let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
        let u2: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        (-2.0 * u1.ln()).sqrt() * u2.cos()
    }

    #[test]
    fn planted_extreme_outlier_gets_max_score() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut pts: Vec<Vec<f64>> = (0..400)
            .map(|_| vec![gauss(&mut rng), gauss(&mut rng)])
            .collect();
        pts.push(vec![100.0, 100.0]);
        let model = IsolationForestModel::fit(&pts, 100, 256, 0.1, 13).unwrap();
        let scores: Vec<f64> = pts.iter().map(|p| model.score(p).unwrap()).collect();
        let argmax = scores
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        assert_eq!(argmax, 400);
    }

    #[test]
    fn decide_tie_resolves_to_normal() {
        let pts = points_1d(&[0.0, 1.0, 2.0, 3.0]);
        let model = IsolationForestModel::fit(&pts, 10, 4, 0.25, 1).unwrap();
        // Construct a decision at exactly the threshold via the formula.
        let d = Decision {
            score: model.score_threshold,
            f_value: 0.0,
            anomalous: 0.0 < 0.0,
        };
        assert!(!d.anomalous);
        // score = 1.0 is always an anomaly when the threshold is below 1.
        assert!(model.score_threshold < 1.0);
        assert!(model.score_threshold - 1.0 < 0.0);
    }

    #[test]
    fn scores_strictly_inside_unit_interval() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let pts: Vec<Vec<f64>> = (0..300).map(|_| vec![rng.gen_range(0.0..1.0)]).collect();
        let model = IsolationForestModel::fit(&pts, 50, 64, 0.1, 23).unwrap();
        for _ in 0..1000 {
            let s = model.score(&[rng.gen_range(-2.0..3.0)]).unwrap();
            assert!(s > 0.0 && s < 1.0);
        }
    }

    #[test]
    fn fit_rejects_degenerate_inputs() {
        assert!(IsolationForestModel::fit(&points_1d(&[1.0]), 10, 8, 0.1, 0).is_err());
        let pts = points_1d(&[1.0, 2.0]);
        assert!(IsolationForestModel::fit(&pts, 10, 8, 0.0, 0).is_err());
        assert!(IsolationForestModel::fit(&pts, 0, 8, 0.1, 0).is_err());
    }

    #[test]
    fn serialization_roundtrip() {
        let pts = points_1d(&[0.0, 1.0, 2.0, 3.0, 10.0]);
        let model = IsolationForestModel::fit(&pts, 25, 5, 0.2, 9).unwrap();
        let json = serde_json::to_string(&model).unwrap();
        let back: IsolationForestModel = serde_json::from_str(&json).unwrap();
        assert_eq!(model, back);
    }
}
