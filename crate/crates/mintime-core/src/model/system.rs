//! System specification and validation.

use std::ops::Deref;

use crate::error::{Error, Result};

use super::poly::Poly;
use super::scalar::Scalar;
use super::sturm::sign_definite_on_unit_interval;

/// Number of interior sample intervals used by the float-mode validator.
const FLOAT_CHECK_GRID: usize = 1024;

/// A 1D first-order linear hyperbolic system with m negative and p positive
/// speeds, internal coupling matrix of polynomials and constant boundary
/// coupling matrix acting at x = 0.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec<T> {
    /// Count of negative speeds.
    pub m: usize,
    /// Count of positive speeds.
    pub p: usize,
    /// Diagonal speeds, length n = m + p, ordered increasingly.
    pub lambda: Vec<Poly<T>>,
    /// Internal coupling matrix, n x n.
    pub coupling: Vec<Vec<Poly<T>>>,
    /// Boundary coupling matrix, p x m.
    pub boundary: Vec<Vec<T>>,
    /// Regularity order r: derivatives up to order r + 1 are usable.
    pub regularity: usize,
}

impl<T: Scalar> SystemSpec<T> {
    pub fn n(&self) -> usize {
        self.m + self.p
    }

    pub fn nmin(&self) -> usize {
        self.m.min(self.p)
    }

    /// Usable jet order r + 1.
    pub fn base_order(&self) -> usize {
        self.regularity + 1
    }

    pub fn lambda_at_zero(&self, i: usize) -> T {
        self.lambda[i].eval_zero()
    }

    /// Convert to the float backend (used by the oracle).
    pub fn to_f64(&self) -> SystemSpec<f64> {
        SystemSpec {
            m: self.m,
            p: self.p,
            lambda: self.lambda.iter().map(|p| p.map(|c| c.to_f64())).collect(),
            coupling: self
                .coupling
                .iter()
                .map(|row| row.iter().map(|p| p.map(|c| c.to_f64())).collect())
                .collect(),
            boundary: self
                .boundary
                .iter()
                .map(|row| row.iter().map(|c| c.to_f64()).collect())
                .collect(),
            regularity: self.regularity,
        }
    }

    fn check_dimensions(&self) -> Result<()> {
        if self.m == 0 || self.p == 0 {
            return Err(Error::EmptySide);
        }
        let n = self.n();
        if self.lambda.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "expected {n} speeds, got {}",
                self.lambda.len()
            )));
        }
        if self.coupling.len() != n || self.coupling.iter().any(|row| row.len() != n) {
            return Err(Error::DimensionMismatch(format!(
                "internal coupling matrix must be {n} x {n}"
            )));
        }
        if self.boundary.len() != self.p || self.boundary.iter().any(|row| row.len() != self.m) {
            return Err(Error::DimensionMismatch(format!(
                "boundary coupling matrix must be {} x {}",
                self.p, self.m
            )));
        }
        Ok(())
    }

    /// Certify the strict speed ordering and sign pattern on [0, 1]:
    /// exact mode by Sturm root counting, float mode on a sample grid.
    fn check_speed_order(&self) -> Result<()> {
        if T::EXACT {
            for (i, lam) in self.lambda.iter().enumerate() {
                let positive = i >= self.m;
                if !sign_definite_on_unit_interval(lam, positive) {
                    return Err(Error::SpeedOrderViolation(format!(
                        "speed {} must be {} on [0, 1]",
                        i + 1,
                        if positive { "positive" } else { "negative" }
                    )));
                }
            }
            for i in 0..self.n() - 1 {
                let diff = self.lambda[i + 1].sub(&self.lambda[i]);
                if !sign_definite_on_unit_interval(&diff, true) {
                    return Err(Error::SpeedOrderViolation(format!(
                        "speeds {} and {} are not strictly ordered on [0, 1]",
                        i + 1,
                        i + 2
                    )));
                }
            }
        } else {
            for k in 0..=FLOAT_CHECK_GRID {
                let x = T::from_f64(k as f64 / FLOAT_CHECK_GRID as f64);
                let values: Vec<T> = self.lambda.iter().map(|lam| lam.eval(&x)).collect();
                for (i, v) in values.iter().enumerate() {
                    let ok = if i < self.m {
                        v.is_negative() && !v.is_zero()
                    } else {
                        !v.is_negative() && !v.is_zero()
                    };
                    if !ok {
                        return Err(Error::SpeedOrderViolation(format!(
                            "speed {} has the wrong sign at x = {}",
                            i + 1,
                            x
                        )));
                    }
                }
                for i in 0..values.len() - 1 {
                    if values[i] >= values[i + 1] {
                        return Err(Error::SpeedOrderViolation(format!(
                            "speeds {} and {} are not strictly ordered at x = {}",
                            i + 1,
                            i + 2,
                            x
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Validate with the backend's default tolerance (zero in exact mode,
    /// 1e-9 relative in float mode).
    pub fn validate(self) -> Result<Validated<T>> {
        let tol = if T::EXACT {
            T::zero()
        } else {
            T::from_f64(1e-9)
        };
        self.validate_with_tol(tol)
    }

    pub fn validate_with_tol(self, tol: T) -> Result<Validated<T>> {
        self.check_dimensions()?;
        self.check_speed_order()?;
        Ok(Validated { spec: self, tol })
    }
}

/// A spec that passed validation, carrying the comparison tolerance used by
/// every rank/zero test downstream (zero in exact mode).
#[derive(Debug, Clone)]
pub struct Validated<T> {
    spec: SystemSpec<T>,
    tol: T,
}

impl<T: Scalar> Validated<T> {
    pub fn tol(&self) -> &T {
        &self.tol
    }

    pub fn spec(&self) -> &SystemSpec<T> {
        &self.spec
    }

    pub fn to_f64(&self) -> Validated<f64> {
        Validated {
            spec: self.spec.to_f64(),
            tol: if self.tol.is_zero() {
                1e-9
            } else {
                self.tol.to_f64()
            },
        }
    }
}

impl<T> Deref for Validated<T> {
    type Target = SystemSpec<T>;

    fn deref(&self) -> &SystemSpec<T> {
        &self.spec
    }
}

/// Transport times T_i = integral of 1 / |lambda_i| over [0, 1], indexed
/// like the speeds (0-based internally).
#[derive(Debug, Clone, PartialEq)]
pub struct TimeVector<T> {
    pub values: Vec<T>,
}

impl<T: Scalar> TimeVector<T> {
    /// T_i with the 0-based speed index.
    pub fn time(&self, i: usize) -> &T {
        &self.values[i]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    type Q = BigRational;

    pub fn diag_system(speeds: &[i64]) -> SystemSpec<Q> {
        let m = speeds.iter().filter(|&&s| s < 0).count();
        let n = speeds.len();
        SystemSpec {
            m,
            p: n - m,
            lambda: speeds.iter().map(|&s| Poly::from_ints(&[s])).collect(),
            coupling: vec![vec![Poly::zero(); n]; n],
            boundary: vec![vec![Scalar::zero(); m]; n - m],
            regularity: 2,
        }
    }

    #[test]
    fn minimal_system_validates() {
        let spec = diag_system(&[-1, 1]);
        assert!(spec.validate().is_ok());
    }

    #[test]
    fn wrong_sign_pattern_rejected() {
        // positive speed listed first
        let mut spec = diag_system(&[-1, 1]);
        spec.lambda.swap(0, 1);
        assert!(matches!(
            spec.validate(),
            Err(Error::SpeedOrderViolation(_))
        ));
    }

    #[test]
    fn equal_speeds_rejected() {
        let mut spec = diag_system(&[-1, -1, 1]);
        spec.m = 2;
        assert!(matches!(
            spec.validate(),
            Err(Error::SpeedOrderViolation(_))
        ));
    }

    #[test]
    fn speed_crossing_zero_rejected() {
        // lambda_1 = x - 1/2 crosses zero inside [0, 1]
        let mut spec = diag_system(&[-1, 1]);
        spec.lambda[0] = Poly::new(vec![Scalar::from_ratio(-1, 2), Scalar::one()]);
        assert!(matches!(
            spec.validate(),
            Err(Error::SpeedOrderViolation(_))
        ));
    }

    #[test]
    fn dimension_checks() {
        let mut spec = diag_system(&[-1, 1]);
        spec.boundary = vec![];
        assert!(matches!(spec.validate(), Err(Error::DimensionMismatch(_))));
        let mut spec = diag_system(&[-1, 1]);
        spec.m = 0;
        spec.p = 2;
        assert!(matches!(spec.validate(), Err(Error::EmptySide)));
    }

    #[test]
    fn float_grid_validation() {
        let spec = diag_system(&[-2, -1, 1]).to_f64();
        assert!(spec.validate().is_ok());
        let mut bad = diag_system(&[-2, -1, 1]).to_f64();
        bad.lambda[2] = Poly::new(vec![1.0, -1.5]); // 1 - 1.5x crosses zero
        assert!(bad.validate().is_err());
    }
}
