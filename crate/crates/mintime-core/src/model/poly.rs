//! Univariate polynomials with scalar coefficients, ascending powers of x.

use super::jet::Jet;
use super::scalar::Scalar;

/// Polynomial sum of coeffs[i] * x^i. The zero polynomial has no
/// coefficients; trailing zeros are trimmed on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly<T> {
    coeffs: Vec<T>,
}

impl<T: Scalar> Poly<T> {
    pub fn new(mut coeffs: Vec<T>) -> Self {
        while coeffs.last().map_or(false, |c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn constant(c: T) -> Self {
        Poly::new(vec![c])
    }

    pub fn from_ints(coeffs: &[i64]) -> Self {
        Poly::new(coeffs.iter().map(|&c| T::from_int(c)).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    /// Degree, or None for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> T {
        self.coeffs.get(i).cloned().unwrap_or_else(T::zero)
    }

    pub fn eval(&self, x: &T) -> T {
        let mut acc = T::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x.clone() + c.clone();
        }
        acc
    }

    pub fn eval_zero(&self) -> T {
        self.coeff(0)
    }

    pub fn derivative(&self) -> Poly<T> {
        if self.coeffs.len() <= 1 {
            return Poly::zero();
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c.clone() * T::from_int(i as i64))
            .collect();
        Poly::new(coeffs)
    }

    /// Taylor jet at x = 0 of the requested order. Polynomial coefficients
    /// are already f^(l)(0)/l!, so this is pad-or-truncate.
    pub fn to_jet(&self, order: usize) -> Jet<T> {
        let coeffs = (0..=order).map(|i| self.coeff(i)).collect();
        Jet::new(coeffs)
    }

    pub fn scale(&self, s: &T) -> Poly<T> {
        Poly::new(self.coeffs.iter().map(|c| c.clone() * s.clone()).collect())
    }

    pub fn add(&self, other: &Poly<T>) -> Poly<T> {
        let len = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..len).map(|i| self.coeff(i) + other.coeff(i)).collect();
        Poly::new(coeffs)
    }

    pub fn sub(&self, other: &Poly<T>) -> Poly<T> {
        let len = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..len).map(|i| self.coeff(i) - other.coeff(i)).collect();
        Poly::new(coeffs)
    }

    pub fn mul(&self, other: &Poly<T>) -> Poly<T> {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut coeffs = vec![T::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a.clone() * b.clone();
            }
        }
        Poly::new(coeffs)
    }

    pub fn neg(&self) -> Poly<T> {
        Poly::new(self.coeffs.iter().map(|c| -c.clone()).collect())
    }

    /// Map coefficients into another backend.
    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Poly<U> {
        Poly::new(self.coeffs.iter().map(f).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    type Q = BigRational;

    #[test]
    fn eval_and_derivative() {
        // 1 + 2x + 3x^2
        let p = Poly::<Q>::from_ints(&[1, 2, 3]);
        assert_eq!(p.eval(&Scalar::from_int(2)), Scalar::from_int(17));
        let d = p.derivative();
        assert_eq!(d.coeffs(), &[Scalar::from_int(2), Scalar::from_int(6)]);
        assert_eq!(d.derivative().degree(), Some(0));
        assert!(d.derivative().derivative().is_zero());
    }

    #[test]
    fn trailing_zeros_trimmed() {
        let p = Poly::<Q>::from_ints(&[1, 0, 0]);
        assert_eq!(p.degree(), Some(0));
        assert!(Poly::<Q>::from_ints(&[0, 0]).is_zero());
    }

    #[test]
    fn jet_of_poly_pads() {
        let p = Poly::<Q>::from_ints(&[0, 1]);
        let j = p.to_jet(3);
        assert_eq!(j.order(), 3);
        assert_eq!(j.coeff(1), &Scalar::from_int(1));
        assert!(j.coeff(3).is_zero());
    }
}
