use nalgebra::DVector;

use crate::error::{check_dim, Error, Result};

/// Raw model input before featurization.
#[derive(Debug, Clone, PartialEq)]
pub enum RawInput {
    Scalar(f64),
    Vector(Vec<f64>),
}

impl RawInput {
    fn is_finite(&self) -> bool {
        match self {
            RawInput::Scalar(x) => x.is_finite(),
            RawInput::Vector(v) => v.iter().all(|x| x.is_finite()),
        }
    }
}

impl From<f64> for RawInput {
    fn from(x: f64) -> Self {
        RawInput::Scalar(x)
    }
}

impl From<Vec<f64>> for RawInput {
    fn from(v: Vec<f64>) -> Self {
        RawInput::Vector(v)
    }
}

/// Labeled data points `z_i = (x_i, y_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    inputs: Vec<RawInput>,
    labels: Vec<f64>,
}

impl Dataset {
    pub fn new(inputs: Vec<RawInput>, labels: Vec<f64>) -> Result<Self> {
        check_dim(inputs.len(), labels.len())?;
        if !inputs.iter().all(RawInput::is_finite) || !labels.iter().all(|y| y.is_finite()) {
            return Err(Error::InvalidInput("dataset contains non-finite values".into()));
        }
        Ok(Self { inputs, labels })
    }

    /// Scalar inputs, e.g. for a polynomial feature map.
    pub fn from_scalars(xs: &[f64], ys: &[f64]) -> Result<Self> {
        Self::new(xs.iter().copied().map(RawInput::Scalar).collect(), ys.to_vec())
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn inputs(&self) -> &[RawInput] {
        &self.inputs
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn point(&self, i: usize) -> (&RawInput, f64) {
        (&self.inputs[i], self.labels[i])
    }

    /// The points at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            inputs: indices.iter().map(|&i| self.inputs[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }

    /// All points except `index`.
    pub fn without(&self, index: usize) -> Dataset {
        let keep: Vec<usize> = (0..self.len()).filter(|&i| i != index).collect();
        self.subset(&keep)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureMap {
    /// Scalar `x` to `(1, x, …, x^degree)`.
    Polynomial { degree: usize },
    /// Vector inputs of fixed dimension used as-is.
    Identity { dim: usize },
}

impl FeatureMap {
    pub fn dim(&self) -> usize {
        match *self {
            FeatureMap::Polynomial { degree } => degree + 1,
            FeatureMap::Identity { dim } => dim,
        }
    }

    pub fn featurize(&self, x: &RawInput) -> Result<DVector<f64>> {
        match (self, x) {
            (FeatureMap::Polynomial { degree }, RawInput::Scalar(x)) => {
                if !x.is_finite() {
                    return Err(Error::InvalidInput(format!("non-finite input {x}")));
                }
                let mut out = DVector::zeros(degree + 1);
                let mut power = 1.0;
                for k in 0..=*degree {
                    out[k] = power;
                    power *= x;
                }
                Ok(out)
            }
            (FeatureMap::Polynomial { .. }, RawInput::Vector(_)) => Err(Error::InvalidInput(
                "polynomial feature map requires scalar inputs".into(),
            )),
            (FeatureMap::Identity { dim }, RawInput::Vector(v)) => {
                check_dim(*dim, v.len())?;
                if !v.iter().all(|x| x.is_finite()) {
                    return Err(Error::InvalidInput("non-finite input".into()));
                }
                Ok(DVector::from_column_slice(v))
            }
            (FeatureMap::Identity { dim: 1 }, RawInput::Scalar(x)) => {
                if !x.is_finite() {
                    return Err(Error::InvalidInput(format!("non-finite input {x}")));
                }
                Ok(DVector::from_element(1, *x))
            }
            (FeatureMap::Identity { dim }, RawInput::Scalar(_)) => {
                Err(Error::DimensionMismatch { expected: *dim, found: 1 })
            }
        }
    }
}

/// Feature vector `φ(x)` of a raw input.
pub fn featurize(x: &RawInput, map: &FeatureMap) -> Result<DVector<f64>> {
    map.featurize(x)
}
