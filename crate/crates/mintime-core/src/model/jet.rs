//! Truncated Taylor expansions at x = 0 (jets).
//!
//! A jet of order K stores K+1 coefficients, coeffs[l] = f^(l)(0)/l!.
//! Binary operations truncate to the smaller input order; derivation loses
//! one order and integration gains one with constant term zero.

use crate::error::{Error, Result};

use super::scalar::{factorial, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct Jet<T> {
    coeffs: Vec<T>,
}

impl<T: Scalar> Jet<T> {
    /// Jet from coefficients f^(l)(0)/l!; must be nonempty.
    pub fn new(coeffs: Vec<T>) -> Self {
        assert!(!coeffs.is_empty(), "a jet has at least a constant term");
        Jet { coeffs }
    }

    pub fn zero(order: usize) -> Self {
        Jet::new(vec![T::zero(); order + 1])
    }

    pub fn constant(c: T, order: usize) -> Self {
        let mut coeffs = vec![T::zero(); order + 1];
        coeffs[0] = c;
        Jet::new(coeffs)
    }

    /// The identity function x as a jet (requires order >= 1 to be useful).
    pub fn identity(order: usize) -> Self {
        let mut coeffs = vec![T::zero(); order + 1];
        if order >= 1 {
            coeffs[1] = T::one();
        }
        Jet::new(coeffs)
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn coeff(&self, l: usize) -> &T {
        &self.coeffs[l]
    }

    /// f(0).
    pub fn eval_zero(&self) -> T {
        self.coeffs[0].clone()
    }

    /// Raw derivative f^(l)(0) = l! * coeffs[l]; None above the order.
    pub fn raw_derivative(&self, l: usize) -> Option<T> {
        self.coeffs
            .get(l)
            .map(|c| c.clone() * factorial::<T>(l))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Keep the first new_order + 1 coefficients (new_order <= order).
    pub fn truncate(&self, new_order: usize) -> Jet<T> {
        assert!(new_order <= self.order(), "truncate cannot extend a jet");
        Jet::new(self.coeffs[..=new_order].to_vec())
    }

    pub fn neg(&self) -> Jet<T> {
        Jet::new(self.coeffs.iter().map(|c| -c.clone()).collect())
    }

    pub fn scale(&self, s: &T) -> Jet<T> {
        Jet::new(self.coeffs.iter().map(|c| c.clone() * s.clone()).collect())
    }

    pub fn add(&self, other: &Jet<T>) -> Jet<T> {
        let order = self.order().min(other.order());
        let coeffs = (0..=order)
            .map(|l| self.coeffs[l].clone() + other.coeffs[l].clone())
            .collect();
        Jet::new(coeffs)
    }

    pub fn sub(&self, other: &Jet<T>) -> Jet<T> {
        let order = self.order().min(other.order());
        let coeffs = (0..=order)
            .map(|l| self.coeffs[l].clone() - other.coeffs[l].clone())
            .collect();
        Jet::new(coeffs)
    }

    /// Cauchy product truncated to the smaller order.
    pub fn mul(&self, other: &Jet<T>) -> Jet<T> {
        let order = self.order().min(other.order());
        let mut coeffs = vec![T::zero(); order + 1];
        for i in 0..=order {
            if self.coeffs[i].is_zero() {
                continue;
            }
            for j in 0..=order - i {
                coeffs[i + j] += self.coeffs[i].clone() * other.coeffs[j].clone();
            }
        }
        Jet::new(coeffs)
    }

    /// Series quotient; requires other(0) != 0.
    pub fn div(&self, other: &Jet<T>) -> Result<Jet<T>> {
        if other.coeffs[0].is_zero() {
            return Err(Error::DivisionByZeroConstantTerm);
        }
        let order = self.order().min(other.order());
        let b0 = other.coeffs[0].clone();
        let mut q = vec![T::zero(); order + 1];
        for l in 0..=order {
            let mut acc = self.coeffs[l].clone();
            for j in 1..=l {
                acc -= other.coeffs[j].clone() * q[l - j].clone();
            }
            q[l] = acc / b0.clone();
        }
        Ok(Jet::new(q))
    }

    /// Composition self(inner); requires inner(0) = 0. Horner evaluation.
    pub fn compose(&self, inner: &Jet<T>) -> Result<Jet<T>> {
        if !inner.coeffs[0].is_zero() {
            return Err(Error::CompositionConstantTermNonzero);
        }
        let order = self.order().min(inner.order());
        let g = inner.truncate(order);
        let mut acc = Jet::constant(self.coeffs[order].clone(), order);
        for l in (0..order).rev() {
            acc = acc.mul(&g);
            acc.coeffs[0] += self.coeffs[l].clone();
        }
        Ok(acc)
    }

    /// Derivative jet, one order lower; None when nothing remains.
    pub fn derive(&self) -> Option<Jet<T>> {
        if self.order() == 0 {
            return None;
        }
        let coeffs = (1..self.coeffs.len())
            .map(|l| self.coeffs[l].clone() * T::from_int(l as i64))
            .collect();
        Some(Jet::new(coeffs))
    }

    /// Antiderivative with constant term 0, one order higher.
    pub fn integrate(&self) -> Jet<T> {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(T::zero());
        for (l, c) in self.coeffs.iter().enumerate() {
            coeffs.push(c.clone() / T::from_int((l + 1) as i64));
        }
        Jet::new(coeffs)
    }

    /// exp(self); requires self(0) = 0 (used for exp of integrals vanishing
    /// at 0). Recurrence e_k = (1/k) sum_{j=1..k} j a_j e_{k-j}.
    pub fn exp(&self) -> Result<Jet<T>> {
        if !self.coeffs[0].is_zero() {
            return Err(Error::ExpConstantTermNonzero);
        }
        let order = self.order();
        let mut e = vec![T::zero(); order + 1];
        e[0] = T::one();
        for k in 1..=order {
            let mut acc = T::zero();
            for j in 1..=k {
                acc += T::from_int(j as i64) * self.coeffs[j].clone() * e[k - j].clone();
            }
            e[k] = acc / T::from_int(k as i64);
        }
        Ok(Jet::new(e))
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Jet<U> {
        Jet::new(self.coeffs.iter().map(f).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    type Q = BigRational;

    fn jet(vals: &[(i64, i64)]) -> Jet<Q> {
        Jet::new(vals.iter().map(|&(n, d)| Scalar::from_ratio(n, d)).collect())
    }

    #[test]
    fn mul_example() {
        // (1+x)(1-x) = 1 - x^2, truncated at order 1 -> (1, 0)
        let a = jet(&[(1, 1), (1, 1)]);
        let b = jet(&[(1, 1), (-1, 1)]);
        assert_eq!(a.mul(&b), jet(&[(1, 1), (0, 1)]));
    }

    #[test]
    fn compose_identity_with_half() {
        // identity composed with x/2 is x/2
        let f = Jet::<Q>::identity(1);
        let g = jet(&[(0, 1), (1, 2)]);
        assert_eq!(f.compose(&g).unwrap(), jet(&[(0, 1), (1, 2)]));
    }

    #[test]
    fn compose_rejects_nonzero_inner_constant() {
        let f = Jet::<Q>::identity(2);
        let g = Jet::<Q>::constant(Scalar::one(), 2);
        assert_eq!(f.compose(&g), Err(Error::CompositionConstantTermNonzero));
    }

    #[test]
    fn exp_of_x_matches_factorials() {
        // exp(x) at order 3: coefficients 1/l!
        let x = Jet::<Q>::identity(3);
        let e = x.exp().unwrap();
        // Oracle: closed form 1/l! computed independently.
        for l in 0..=3 {
            let expected = Q::one() / factorial::<Q>(l);
            assert_eq!(e.coeff(l), &expected);
        }
    }

    #[test]
    fn div_requires_unit_constant() {
        let a = Jet::<Q>::identity(2);
        assert_eq!(a.div(&Jet::zero(2)), Err(Error::DivisionByZeroConstantTerm));
        let b = jet(&[(1, 1), (1, 1), (0, 1)]);
        let q = a.div(&b).unwrap();
        // x/(1+x) = x - x^2 + ...
        assert_eq!(q, jet(&[(0, 1), (1, 1), (-1, 1)]));
    }

    #[test]
    fn derive_then_integrate_roundtrip() {
        let a = jet(&[(2, 1), (3, 1), (5, 7), (1, 3)]);
        let d = a.derive().unwrap();
        let back = d.integrate();
        // constant term is lost by derivation; the rest must return exactly
        assert_eq!(back.coeffs()[1..], a.coeffs()[1..]);
        assert!(a.truncate(0).derive().is_none());
    }

    #[test]
    fn raw_derivatives_scale_by_factorial() {
        let a = jet(&[(1, 1), (1, 1), (1, 2), (1, 6)]);
        assert_eq!(a.raw_derivative(3).unwrap(), Scalar::from_int(1));
        assert_eq!(a.raw_derivative(4), None);
    }
}
