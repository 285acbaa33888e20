use serde::{Deserialize, Serialize};

use super::{ClassifyError, Prediction};
use crate::features::{Class, Dataset, Schema};

/// Always predicts the training majority class (positive on ties).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroR {
    pub schema: Schema,
    pub majority: Class,
    pub class_counts: [usize; 2],
}

impl ZeroR {
    pub fn train(ds: &Dataset) -> Result<Self, ClassifyError> {
        if ds.is_empty() {
            return Err(ClassifyError::EmptyDataset);
        }
        let [p, n] = ds.class_counts();
        Ok(ZeroR {
            schema: ds.schema.clone(),
            majority: if p >= n {
                Class::Positive
            } else {
                Class::Negative
            },
            class_counts: [p, n],
        })
    }

    pub fn predict(&self) -> Prediction {
        Prediction::one_hot(self.majority)
    }
}
