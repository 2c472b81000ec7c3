//! Forward-mode dual numbers.
//!
//! A [`Dual`] carries a value and its derivative with respect to a single
//! designated variable (here always the regularity `s`, or the direction of a
//! Hessian-vector product). Arithmetic follows the usual rules with `ε² = 0`.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use nalgebra::DVector;

use crate::error::{check_dim, Error, Result};

/// Scalar arithmetic shared by plain `f64` and [`Dual`].
///
/// Generic loss and regularizer code is written once against this trait so
/// that the value stream of a dual computation performs exactly the same
/// floating point operations as the plain computation.
pub trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + From<f64>
    + fmt::Debug
{
    fn value(self) -> f64;

    /// Derivative part; zero for plain reals.
    fn tangent(self) -> f64 {
        0.0
    }
}

impl Scalar for f64 {
    #[inline]
    fn value(self) -> f64 {
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Dual {
    pub re: f64,
    pub eps: f64,
}

impl Dual {
    #[inline]
    pub const fn new(re: f64, eps: f64) -> Self {
        Self { re, eps }
    }

    /// A variable: derivative one with respect to itself.
    #[inline]
    pub const fn variable(re: f64) -> Self {
        Self { re, eps: 1.0 }
    }

    #[inline]
    pub const fn constant(re: f64) -> Self {
        Self { re, eps: 0.0 }
    }
}

impl From<f64> for Dual {
    #[inline]
    fn from(re: f64) -> Self {
        Dual::constant(re)
    }
}

impl Add for Dual {
    type Output = Dual;
    #[inline]
    fn add(self, rhs: Dual) -> Dual {
        Dual::new(self.re + rhs.re, self.eps + rhs.eps)
    }
}

impl AddAssign for Dual {
    #[inline]
    fn add_assign(&mut self, rhs: Dual) {
        self.re += rhs.re;
        self.eps += rhs.eps;
    }
}

impl Sub for Dual {
    type Output = Dual;
    #[inline]
    fn sub(self, rhs: Dual) -> Dual {
        Dual::new(self.re - rhs.re, self.eps - rhs.eps)
    }
}

impl Mul for Dual {
    type Output = Dual;
    #[inline]
    fn mul(self, rhs: Dual) -> Dual {
        Dual::new(self.re * rhs.re, self.re * rhs.eps + self.eps * rhs.re)
    }
}

impl Neg for Dual {
    type Output = Dual;
    #[inline]
    fn neg(self) -> Dual {
        Dual::new(-self.re, -self.eps)
    }
}

impl fmt::Display for Dual {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + {}ε", self.re, self.eps)
    }
}

impl Scalar for Dual {
    #[inline]
    fn value(self) -> f64 {
        self.re
    }

    #[inline]
    fn tangent(self) -> f64 {
        self.eps
    }
}

/// Parameter vector θ paired with its regularity tangent θ̇ = dθ/ds.
#[derive(Debug, Clone, PartialEq)]
pub struct DualParams {
    pub value: DVector<f64>,
    pub tangent: DVector<f64>,
}

impl DualParams {
    pub fn new(value: DVector<f64>, tangent: DVector<f64>) -> Result<Self> {
        check_dim(value.len(), tangent.len())?;
        if value.iter().chain(tangent.iter()).any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("non-finite dual parameter".into()));
        }
        Ok(Self { value, tangent })
    }

    /// θ with a zero tangent.
    pub fn primal(value: DVector<f64>) -> Self {
        let tangent = DVector::zeros(value.len());
        Self { value, tangent }
    }

    pub fn dim(&self) -> usize {
        self.value.len()
    }

    pub fn to_duals(&self) -> Vec<Dual> {
        self.value
            .iter()
            .zip(self.tangent.iter())
            .map(|(&re, &eps)| Dual::new(re, eps))
            .collect()
    }

    pub fn from_duals(duals: &[Dual]) -> Self {
        Self {
            value: DVector::from_iterator(duals.len(), duals.iter().map(|d| d.re)),
            tangent: DVector::from_iterator(duals.len(), duals.iter().map(|d| d.eps)),
        }
    }
}

/// Split a slice of duals into its value and tangent vectors.
pub fn split(duals: &[Dual]) -> (DVector<f64>, DVector<f64>) {
    let dp = DualParams::from_duals(duals);
    (dp.value, dp.tangent)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_rule() {
        let x = Dual::variable(3.0);
        let y = x * x * x;
        assert_eq!(y, Dual::new(27.0, 27.0));
    }

    #[test]
    fn constants_have_no_tangent() {
        let c = Dual::from(2.5);
        let x = Dual::variable(4.0);
        assert_eq!(c * x - c, Dual::new(7.5, 2.5));
        assert_eq!(-(c + x), Dual::new(-6.5, -1.0));
    }

    #[test]
    fn dual_params_roundtrip() {
        let dp = DualParams::new(DVector::from_vec(vec![1.0, 2.0]), DVector::from_vec(vec![-1.0, 0.5]))
            .unwrap();
        assert_eq!(DualParams::from_duals(&dp.to_duals()), dp);
        assert!(DualParams::new(DVector::zeros(2), DVector::zeros(3)).is_err());
        assert!(DualParams::new(DVector::from_vec(vec![f64::NAN]), DVector::zeros(1)).is_err());
    }
}
