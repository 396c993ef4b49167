use serde::{Deserialize, Serialize};

use crate::linalg3::SymmetricSpectrum;

/// Three exponents (or eigenvalues) in descending order.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct OrderedExponents([f64; 3]);

impl OrderedExponents {
    /// Sorts `values` descending.
    pub fn new(mut values: [f64; 3]) -> Self {
        values.sort_by(|a, b| b.total_cmp(a));
        OrderedExponents(values)
    }

    pub fn values(&self) -> [f64; 3] {
        self.0
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

impl From<[f64; 3]> for OrderedExponents {
    fn from(v: [f64; 3]) -> Self {
        OrderedExponents::new(v)
    }
}

impl From<OrderedExponents> for [f64; 3] {
    fn from(e: OrderedExponents) -> Self {
        e.0
    }
}

impl From<SymmetricSpectrum> for OrderedExponents {
    fn from(s: SymmetricSpectrum) -> Self {
        OrderedExponents::new(s.0)
    }
}

/// Anything that carries an exponent-like spectrum.
pub trait Exponents {
    fn exponents(&self) -> [f64; 3];
}

impl Exponents for OrderedExponents {
    fn exponents(&self) -> [f64; 3] {
        self.0
    }
}

impl Exponents for SymmetricSpectrum {
    fn exponents(&self) -> [f64; 3] {
        self.0
    }
}

impl Exponents for [f64; 3] {
    fn exponents(&self) -> [f64; 3] {
        *self
    }
}

impl Exponents for crate::variational::FiniteTimeSpectrum {
    fn exponents(&self) -> [f64; 3] {
        self.les.values()
    }
}
