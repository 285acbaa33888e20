use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{require_both_classes, ClassifyError, Prediction};
use crate::features::{AttributeKind, Dataset, Schema, Value, EMPTY_SLOT};

/// Smallest per-class variance used by the Gaussian likelihoods.
pub const VARIANCE_FLOOR: f64 = 1e-9;

/// Per-attribute sufficient statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum NbAttribute {
    /// Add-one smoothed categorical likelihoods over `domain_size` values:
    /// the values observed in training plus the empty slot.
    Nominal {
        domain_size: usize,
        counts: BTreeMap<String, [u64; 2]>,
    },
    Gaussian {
        mean: [f64; 2],
        variance: [f64; 2],
    },
}

/// Naive Bayes with Laplace-smoothed priors, add-one nominal likelihoods,
/// and per-class Gaussians for numeric attributes. Scores are computed in
/// log space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveBayes {
    pub schema: Schema,
    pub priors: [f64; 2],
    pub class_counts: [u64; 2],
    pub attributes: Vec<NbAttribute>,
}

impl NaiveBayes {
    pub fn train(ds: &Dataset) -> Result<Self, ClassifyError> {
        let [p, n] = require_both_classes(ds)?;
        let total = (p + n) as f64;
        let priors = [
            (p as f64 + 1.0) / (total + 2.0),
            (n as f64 + 1.0) / (total + 2.0),
        ];
        let class_counts = [p as u64, n as u64];

        let attributes = ds
            .schema
            .attributes
            .iter()
            .enumerate()
            .map(|(j, attr)| match attr.kind {
                AttributeKind::Nominal => {
                    let mut counts: BTreeMap<String, [u64; 2]> = BTreeMap::new();
                    for inst in &ds.instances {
                        let v = inst.features[j].as_nominal().unwrap_or(EMPTY_SLOT);
                        counts.entry(v.to_string()).or_default()[inst.class.index()] += 1;
                    }
                    let mut domain: BTreeSet<&str> = counts.keys().map(String::as_str).collect();
                    domain.insert(EMPTY_SLOT);
                    NbAttribute::Nominal {
                        domain_size: domain.len(),
                        counts,
                    }
                }
                AttributeKind::Numeric => {
                    let mut sum = [0.0f64; 2];
                    for inst in &ds.instances {
                        sum[inst.class.index()] += inst.features[j].as_numeric().unwrap_or(0.0);
                    }
                    let mean = [sum[0] / p as f64, sum[1] / n as f64];
                    let mut ss = [0.0f64; 2];
                    for inst in &ds.instances {
                        let c = inst.class.index();
                        let d = inst.features[j].as_numeric().unwrap_or(0.0) - mean[c];
                        ss[c] += d * d;
                    }
                    let variance = [
                        (ss[0] / p as f64).max(VARIANCE_FLOOR),
                        (ss[1] / n as f64).max(VARIANCE_FLOOR),
                    ];
                    NbAttribute::Gaussian { mean, variance }
                }
            })
            .collect();

        Ok(NaiveBayes {
            schema: ds.schema.clone(),
            priors,
            class_counts,
            attributes,
        })
    }

    /// Unnormalized log posterior per class.
    pub fn log_scores(&self, features: &[Value]) -> [f64; 2] {
        let mut log = [self.priors[0].ln(), self.priors[1].ln()];
        for (attr, value) in self.attributes.iter().zip(features) {
            for (c, slot) in log.iter_mut().enumerate() {
                *slot += match attr {
                    NbAttribute::Nominal {
                        domain_size,
                        counts,
                    } => {
                        let v = value.as_nominal().unwrap_or(EMPTY_SLOT);
                        let hits = counts.get(v).map_or(0, |cs| cs[c]);
                        ((hits + 1) as f64).ln()
                            - ((self.class_counts[c] + *domain_size as u64) as f64).ln()
                    }
                    NbAttribute::Gaussian { mean, variance } => {
                        let x = value.as_numeric().unwrap_or(0.0);
                        let d = x - mean[c];
                        -0.5 * (2.0 * std::f64::consts::PI * variance[c]).ln()
                            - d * d / (2.0 * variance[c])
                    }
                };
            }
        }
        log
    }

    pub(super) fn predict_unchecked(&self, features: &[Value]) -> Prediction {
        let log = self.log_scores(features);
        let top = log[0].max(log[1]);
        let w = [(log[0] - top).exp(), (log[1] - top).exp()];
        let z = w[0] + w[1];
        Prediction::from_scores([w[0] / z, w[1] / z])
    }
}
