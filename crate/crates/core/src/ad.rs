//! Second-order forward-mode automatic differentiation.
//!
//! A [`Jet`] carries a value together with its gradient and Hessian with
//! respect to a fixed set of `n` seed variables. The dynamics and feature
//! code is written once against the [`Real`] trait and evaluated either on
//! plain `f64` (simulation) or on `Jet` (IRL derivatives of trajectory cost
//! with respect to the demonstrated controls).

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Scalar operations needed by the vehicle dynamics and cost features.
pub trait Real:
    Clone
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
{
    fn constant(&self, v: f64) -> Self;
    fn value(&self) -> f64;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn exp(&self) -> Self;
    fn sqrt(&self) -> Self;

    fn square(&self) -> Self {
        self.clone() * self.clone()
    }
}

impl Real for f64 {
    #[inline]
    fn constant(&self, v: f64) -> Self {
        v
    }
    #[inline]
    fn value(&self) -> f64 {
        *self
    }
    #[inline]
    fn sin(&self) -> Self {
        f64::sin(*self)
    }
    #[inline]
    fn cos(&self) -> Self {
        f64::cos(*self)
    }
    #[inline]
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    #[inline]
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    #[inline]
    fn square(&self) -> Self {
        self * self
    }
}

/// Value, gradient and (dense, row-major) Hessian of a scalar function of `n` variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    pub val: f64,
    pub grad: Vec<f64>,
    pub hess: Vec<f64>,
}

impl Jet {
    pub fn constant_n(n: usize, val: f64) -> Self {
        Jet {
            val,
            grad: vec![0.0; n],
            hess: vec![0.0; n * n],
        }
    }

    /// The `i`-th seed variable of an `n`-dimensional input.
    pub fn variable(n: usize, i: usize, val: f64) -> Self {
        let mut j = Jet::constant_n(n, val);
        j.grad[i] = 1.0;
        j
    }

    pub fn dim(&self) -> usize {
        self.grad.len()
    }

    /// Applies a scalar function with first derivative `d1` and second derivative `d2`.
    fn chain(&self, val: f64, d1: f64, d2: f64) -> Jet {
        let n = self.dim();
        let grad = self.grad.iter().map(|g| d1 * g).collect();
        let mut hess = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                hess[i * n + j] = d1 * self.hess[i * n + j] + d2 * self.grad[i] * self.grad[j];
            }
        }
        Jet { val, grad, hess }
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(mut self, rhs: Jet) -> Jet {
        self.val += rhs.val;
        self.grad
            .iter_mut()
            .zip(&rhs.grad)
            .for_each(|(a, b)| *a += b);
        self.hess
            .iter_mut()
            .zip(&rhs.hess)
            .for_each(|(a, b)| *a += b);
        self
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(mut self, rhs: Jet) -> Jet {
        self.val -= rhs.val;
        self.grad
            .iter_mut()
            .zip(&rhs.grad)
            .for_each(|(a, b)| *a -= b);
        self.hess
            .iter_mut()
            .zip(&rhs.hess)
            .for_each(|(a, b)| *a -= b);
        self
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        let n = self.dim();
        let mut hess = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let k = i * n + j;
                hess[k] = self.val * rhs.hess[k]
                    + rhs.val * self.hess[k]
                    + self.grad[i] * rhs.grad[j]
                    + rhs.grad[i] * self.grad[j];
            }
        }
        let grad = self
            .grad
            .iter()
            .zip(&rhs.grad)
            .map(|(a, b)| self.val * b + rhs.val * a)
            .collect();
        Jet {
            val: self.val * rhs.val,
            grad,
            hess,
        }
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, rhs: Jet) -> Jet {
        let v = rhs.val;
        let inv = rhs.chain(1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v));
        self * inv
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(mut self) -> Jet {
        self.val = -self.val;
        self.grad.iter_mut().for_each(|g| *g = -*g);
        self.hess.iter_mut().for_each(|h| *h = -*h);
        self
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, rhs: f64) -> Jet {
        self.val += rhs;
        self
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(mut self, rhs: f64) -> Jet {
        self.val -= rhs;
        self
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(mut self, rhs: f64) -> Jet {
        self.val *= rhs;
        self.grad.iter_mut().for_each(|g| *g *= rhs);
        self.hess.iter_mut().for_each(|h| *h *= rhs);
        self
    }
}

impl Real for Jet {
    fn constant(&self, v: f64) -> Self {
        Jet::constant_n(self.dim(), v)
    }
    fn value(&self) -> f64 {
        self.val
    }
    fn sin(&self) -> Self {
        let (s, c) = self.val.sin_cos();
        self.chain(s, c, -s)
    }
    fn cos(&self) -> Self {
        let (s, c) = self.val.sin_cos();
        self.chain(c, -s, -c)
    }
    fn exp(&self) -> Self {
        let e = self.val.exp();
        self.chain(e, e, e)
    }
    fn sqrt(&self) -> Self {
        let r = self.val.sqrt();
        self.chain(r, 0.5 / r, -0.25 / (r * self.val))
    }
}
