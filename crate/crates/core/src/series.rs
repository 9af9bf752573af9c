//! Truncated formal power series `Σ_{j<J} a_j x^j` with exact rational
//! coefficients, where `x = 1/n` throughout this crate.
//!
//! The truncation order is fixed when a series is built. Every operation
//! truncates eagerly, and mixing two orders yields the smaller one.

use std::ops::{Add, Mul, Neg, Sub};

use rug::Rational;

use crate::rational::{binomial, pow};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormalSeries {
    coeffs: Vec<Rational>,
}

impl FormalSeries {
    /// The zero series of the given order. Panics on order 0.
    pub fn zero(order: usize) -> Self {
        assert!(order > 0, "truncation order must be positive");
        Self { coeffs: vec![Rational::new(); order] }
    }

    /// Takes the first `order` coefficients, padding with zeros.
    pub fn from_coeffs<I>(order: usize, coeffs: I) -> Self
    where
        I: IntoIterator<Item = Rational>,
    {
        let mut s = Self::zero(order);
        for (slot, c) in s.coeffs.iter_mut().zip(coeffs) {
            *slot = c;
        }
        s
    }

    pub fn constant(order: usize, c: Rational) -> Self {
        Self::from_coeffs(order, [c])
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn coeff(&self, j: usize) -> &Rational {
        &self.coeffs[j]
    }

    pub fn coeff_mut(&mut self, j: usize) -> &mut Rational {
        &mut self.coeffs[j]
    }

    pub fn truncate(mut self, order: usize) -> Self {
        assert!(order > 0 && order <= self.order());
        self.coeffs.truncate(order);
        self
    }

    pub fn scale(&self, k: &Rational) -> Self {
        Self { coeffs: self.coeffs.iter().map(|c| Rational::from(c * k)).collect() }
    }

    /// `exp(self)`, requiring a zero constant term.
    pub fn exp(&self) -> Self {
        assert!(self.coeffs[0] == 0, "exp needs a zero constant term");
        let order = self.order();
        // f' = a' f, solved coefficient by coefficient
        let mut out = Self::zero(order);
        out.coeffs[0] = Rational::from(1);
        for k in 1..order {
            let mut acc = Rational::new();
            for i in 1..=k {
                acc += Rational::from(&self.coeffs[i] * &out.coeffs[k - i]) * i as u32;
            }
            out.coeffs[k] = acc / k as u32;
        }
        out
    }

    /// Re-expands `Σ a_j /(n-1)^j` in powers of `1/n`, using
    /// `1/(n-1)^j = x^j Σ_l C(l+j-1, j-1) x^l`.
    pub fn shift_by_one(&self) -> Self {
        let order = self.order();
        let mut out = Self::zero(order);
        out.coeffs[0] = self.coeffs[0].clone();
        for j in 1..order {
            if self.coeffs[j] == 0 {
                continue;
            }
            for l in 0..order - j {
                let b = binomial((l + j - 1) as u32, (j - 1) as u32);
                out.coeffs[j + l] += Rational::from(&self.coeffs[j] * b);
            }
        }
        out
    }

    /// Exact value at `x = 1/n`.
    pub fn eval_at_n(&self, n: &Rational) -> Rational {
        let x = Rational::from(n.recip_ref());
        let mut acc = Rational::new();
        for c in self.coeffs.iter().rev() {
            acc *= &x;
            acc += c;
        }
        acc
    }

    /// `Σ c^j x^j`, the expansion of `1/(1 - c x)`.
    pub fn geometric(order: usize, c: &Rational) -> Self {
        Self::from_coeffs(order, (0..order as u32).map(|j| pow(c, j)))
    }
}

impl Add for &FormalSeries {
    type Output = FormalSeries;
    fn add(self, rhs: &FormalSeries) -> FormalSeries {
        let order = self.order().min(rhs.order());
        FormalSeries::from_coeffs(
            order,
            self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| Rational::from(a + b)),
        )
    }
}

impl Sub for &FormalSeries {
    type Output = FormalSeries;
    fn sub(self, rhs: &FormalSeries) -> FormalSeries {
        let order = self.order().min(rhs.order());
        FormalSeries::from_coeffs(
            order,
            self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| Rational::from(a - b)),
        )
    }
}

impl Neg for &FormalSeries {
    type Output = FormalSeries;
    fn neg(self) -> FormalSeries {
        FormalSeries { coeffs: self.coeffs.iter().map(|c| Rational::from(-c)).collect() }
    }
}

impl Mul for &FormalSeries {
    type Output = FormalSeries;
    fn mul(self, rhs: &FormalSeries) -> FormalSeries {
        let order = self.order().min(rhs.order());
        let mut out = FormalSeries::zero(order);
        for (i, a) in self.coeffs.iter().enumerate().take(order) {
            if *a == 0 {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate().take(order - i) {
                out.coeffs[i + j] += Rational::from(a * b);
            }
        }
        out
    }
}
