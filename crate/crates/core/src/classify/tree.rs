//! C4.5-style decision tree: gain-ratio splits, multiway nominal branches,
//! binary numeric thresholds, and pessimistic error-based pruning.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{require_both_classes, ClassifyError, Prediction};
use crate::features::{AttributeKind, Class, Dataset, Schema, Value, EMPTY_SLOT};

const MIN_GAIN: f64 = 1e-12;

/// Slack C4.5 allows when comparing a collapsed leaf with its subtree.
const PRUNE_SLACK: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    /// Confidence level of the pessimistic error estimate.
    pub confidence: f64,
    /// Nodes with fewer instances are not split.
    pub min_split: usize,
    pub prune: bool,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            confidence: 0.25,
            min_split: 2,
            prune: true,
        }
    }
}

/// Every node keeps the training class distribution `[positive, negative]`
/// that reached it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum Node {
    Leaf {
        distribution: [u64; 2],
    },
    Nominal {
        attribute: usize,
        distribution: [u64; 2],
        branches: BTreeMap<String, Node>,
    },
    Numeric {
        attribute: usize,
        distribution: [u64; 2],
        threshold: f64,
        le: Box<Node>,
        gt: Box<Node>,
    },
}

impl Node {
    pub fn distribution(&self) -> [u64; 2] {
        match self {
            Node::Leaf { distribution }
            | Node::Nominal { distribution, .. }
            | Node::Numeric { distribution, .. } => *distribution,
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, Node::Leaf { .. })
    }

    fn children(&self) -> Vec<&Node> {
        match self {
            Node::Leaf { .. } => Vec::new(),
            Node::Nominal { branches, .. } => branches.values().collect(),
            Node::Numeric { le, gt, .. } => vec![le, gt],
        }
    }

    pub fn node_count(&self) -> usize {
        1 + self
            .children()
            .iter()
            .map(|c| c.node_count())
            .sum::<usize>()
    }

    pub fn leaf_count(&self) -> usize {
        if self.is_leaf() {
            1
        } else {
            self.children().iter().map(|c| c.leaf_count()).sum()
        }
    }

    pub fn depth(&self) -> usize {
        self.children()
            .iter()
            .map(|c| 1 + c.depth())
            .max()
            .unwrap_or(0)
    }

    /// The attribute tested at this node, if any.
    pub fn split_attribute(&self) -> Option<usize> {
        match self {
            Node::Leaf { .. } => None,
            Node::Nominal { attribute, .. } | Node::Numeric { attribute, .. } => Some(*attribute),
        }
    }

    /// Follows the tests down to the node that decides `features`: a leaf,
    /// or the nominal node whose branches lack the value.
    pub fn route<'a>(&'a self, features: &[Value]) -> &'a Node {
        match self {
            Node::Leaf { .. } => self,
            Node::Nominal {
                attribute,
                branches,
                ..
            } => {
                let v = features[*attribute].as_nominal().unwrap_or(EMPTY_SLOT);
                branches.get(v).map_or(self, |child| child.route(features))
            }
            Node::Numeric {
                attribute,
                threshold,
                le,
                gt,
                ..
            } => {
                let x = features[*attribute].as_numeric().unwrap_or(0.0);
                if x <= *threshold {
                    le.route(features)
                } else {
                    gt.route(features)
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub schema: Schema,
    pub params: TreeParams,
    pub root: Node,
}

impl DecisionTree {
    pub fn train(ds: &Dataset, params: &TreeParams) -> Result<Self, ClassifyError> {
        require_both_classes(ds)?;
        let rows: Vec<usize> = (0..ds.len()).collect();
        let mut root = grow(ds, &rows, params);
        if params.prune {
            prune(&mut root, params.confidence);
        }
        Ok(DecisionTree {
            schema: ds.schema.clone(),
            params: *params,
            root,
        })
    }

    pub(super) fn predict_unchecked(&self, features: &[Value]) -> Prediction {
        let [p, n] = self.root.route(features).distribution();
        let total = (p + n) as f64;
        Prediction::from_scores([p as f64 / total, n as f64 / total])
    }
}

fn distribution(ds: &Dataset, rows: &[usize]) -> [u64; 2] {
    let mut d = [0u64; 2];
    for &r in rows {
        d[ds.instances[r].class.index()] += 1;
    }
    d
}

fn entropy(d: [u64; 2]) -> f64 {
    let total = (d[0] + d[1]) as f64;
    d.iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total;
            -p * p.log2()
        })
        .sum()
}

/// Information gain and split information of a partition, given the class
/// distribution of each part.
fn gain_and_split_info(parts: &[[u64; 2]]) -> (f64, f64) {
    let mut whole = [0u64; 2];
    for p in parts {
        whole[0] += p[0];
        whole[1] += p[1];
    }
    let total = (whole[0] + whole[1]) as f64;
    let mut remainder = 0.0;
    let mut split_info = 0.0;
    for p in parts {
        let n = (p[0] + p[1]) as f64;
        if n == 0.0 {
            continue;
        }
        let w = n / total;
        remainder += w * entropy(*p);
        split_info -= w * w.log2();
    }
    (entropy(whole) - remainder, split_info)
}

/// Gain ratio of a partition; zero when the split information is zero.
pub fn gain_ratio(parts: &[[u64; 2]]) -> f64 {
    let (gain, split_info) = gain_and_split_info(parts);
    if split_info <= 0.0 {
        0.0
    } else {
        gain / split_info
    }
}

enum Candidate<'a> {
    Nominal(BTreeMap<&'a str, Vec<usize>>),
    Numeric(f64),
}

struct Scored<'a> {
    attribute: usize,
    ratio: f64,
    candidate: Candidate<'a>,
}

fn nominal_candidate<'a>(ds: &'a Dataset, rows: &[usize], j: usize) -> Option<Scored<'a>> {
    let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for &r in rows {
        let v = ds.instances[r].features[j]
            .as_nominal()
            .unwrap_or(EMPTY_SLOT);
        groups.entry(v).or_default().push(r);
    }
    if groups.len() < 2 {
        return None;
    }
    let parts: Vec<[u64; 2]> = groups.values().map(|g| distribution(ds, g)).collect();
    let (gain, split_info) = gain_and_split_info(&parts);
    if gain <= MIN_GAIN || split_info <= 0.0 {
        return None;
    }
    Some(Scored {
        attribute: j,
        ratio: gain / split_info,
        candidate: Candidate::Nominal(groups),
    })
}

fn numeric_candidate<'a>(ds: &'a Dataset, rows: &[usize], j: usize) -> Option<Scored<'a>> {
    let mut points: Vec<(f64, Class)> = rows
        .iter()
        .map(|&r| {
            let inst = &ds.instances[r];
            (inst.features[j].as_numeric().unwrap_or(0.0), inst.class)
        })
        .collect();
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    let whole = distribution(ds, rows);
    let mut left = [0u64; 2];
    let mut best: Option<(f64, f64, f64)> = None; // (gain, split_info, threshold)
    for i in 0..points.len() - 1 {
        left[points[i].1.index()] += 1;
        if points[i].0 == points[i + 1].0 {
            continue;
        }
        let right = [whole[0] - left[0], whole[1] - left[1]];
        let (gain, split_info) = gain_and_split_info(&[left, right]);
        if best.is_none_or(|b| gain > b.0) {
            best = Some((gain, split_info, (points[i].0 + points[i + 1].0) / 2.0));
        }
    }
    let (gain, split_info, threshold) = best?;
    if gain <= MIN_GAIN || split_info <= 0.0 {
        return None;
    }
    Some(Scored {
        attribute: j,
        ratio: gain / split_info,
        candidate: Candidate::Numeric(threshold),
    })
}

fn grow(ds: &Dataset, rows: &[usize], params: &TreeParams) -> Node {
    let dist = distribution(ds, rows);
    if dist[0] == 0 || dist[1] == 0 || rows.len() < params.min_split.max(2) {
        return Node::Leaf { distribution: dist };
    }
    let mut best: Option<Scored> = None;
    for (j, attr) in ds.schema.attributes.iter().enumerate() {
        let scored = match attr.kind {
            AttributeKind::Nominal => nominal_candidate(ds, rows, j),
            AttributeKind::Numeric => numeric_candidate(ds, rows, j),
        };
        if let Some(s) = scored {
            if best.as_ref().is_none_or(|b| s.ratio > b.ratio) {
                best = Some(s);
            }
        }
    }
    let Some(best) = best else {
        return Node::Leaf { distribution: dist };
    };
    match best.candidate {
        Candidate::Nominal(groups) => Node::Nominal {
            attribute: best.attribute,
            distribution: dist,
            branches: groups
                .into_iter()
                .map(|(v, g)| (v.to_string(), grow(ds, &g, params)))
                .collect(),
        },
        Candidate::Numeric(threshold) => {
            let (le, gt): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&r| {
                ds.instances[r].features[best.attribute]
                    .as_numeric()
                    .unwrap_or(0.0)
                    <= threshold
            });
            Node::Numeric {
                attribute: best.attribute,
                distribution: dist,
                threshold,
                le: Box::new(grow(ds, &le, params)),
                gt: Box::new(grow(ds, &gt, params)),
            }
        }
    }
}

/// Upper-tail standard normal quantile (Acklam's rational approximation).
fn normal_quantile(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e1,
        2.209460984245205e2,
        -2.759285104469687e2,
        1.383577518672690e2,
        -3.066479806614716e1,
        2.506628277459239e0,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e1,
        1.615858368580409e2,
        -1.556989798598866e2,
        6.680131188771972e1,
        -1.328068155288572e1,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-3,
        -3.223964580411365e-1,
        -2.400758277161838e0,
        -2.549732539343734e0,
        4.374664141464968e0,
        2.938163982698783e0,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-3,
        3.224671290700398e-1,
        2.445134137142996e0,
        3.754408661907416e0,
    ];
    let tail = |q: f64| {
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    if p < 0.02425 {
        tail((-2.0 * p.ln()).sqrt())
    } else if p > 1.0 - 0.02425 {
        -tail((-2.0 * (1.0 - p).ln()).sqrt())
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    }
}

/// Extra errors the pessimistic estimate adds to `errors` observed among
/// `n` instances at confidence `cf`.
pub fn add_errors(n: f64, errors: f64, cf: f64) -> f64 {
    if errors < 1.0 {
        let base = n * (1.0 - cf.powf(1.0 / n));
        if errors == 0.0 {
            return base;
        }
        return base + errors * (add_errors(n, 1.0, cf) - base);
    }
    if errors + 0.5 >= n {
        return (n - errors).max(0.0);
    }
    let z = normal_quantile(1.0 - cf);
    let f = (errors + 0.5) / n;
    let r = (f + z * z / (2.0 * n) + z * (f / n - f * f / n + z * z / (4.0 * n * n)).sqrt())
        / (1.0 + z * z / n);
    r * n - errors
}

fn leaf_estimate(d: [u64; 2], cf: f64) -> f64 {
    let n = (d[0] + d[1]) as f64;
    let errors = d[0].min(d[1]) as f64;
    errors + add_errors(n, errors, cf)
}

/// Bottom-up subtree replacement. Returns the estimated errors of `node`
/// after pruning.
fn prune(node: &mut Node, cf: f64) -> f64 {
    let subtree = match node {
        Node::Leaf { distribution } => return leaf_estimate(*distribution, cf),
        Node::Nominal { branches, .. } => branches.values_mut().map(|c| prune(c, cf)).sum(),
        Node::Numeric { le, gt, .. } => prune(le, cf) + prune(gt, cf),
    };
    let dist = node.distribution();
    let as_leaf = leaf_estimate(dist, cf);
    if as_leaf <= subtree + PRUNE_SLACK {
        *node = Node::Leaf { distribution: dist };
        as_leaf
    } else {
        subtree
    }
}
