//! Sturm-sequence sign certification for polynomials on [0, 1].
//!
//! Only meaningful for the exact backend; the float path validates on a
//! sample grid instead (see `system.rs`).

use super::poly::Poly;
use super::scalar::Scalar;

/// Polynomial remainder of a by b (b nonzero), over a field backend.
fn poly_rem<T: Scalar>(a: &Poly<T>, b: &Poly<T>) -> Poly<T> {
    let db = b.degree().expect("division by zero polynomial");
    let lead = b.coeff(db);
    let mut rem = a.clone();
    while let Some(dr) = rem.degree() {
        if dr < db {
            break;
        }
        let factor = rem.coeff(dr) / lead.clone();
        // rem -= factor * x^(dr-db) * b
        let mut shifted = vec![T::zero(); dr - db];
        shifted.extend(b.coeffs().iter().map(|c| c.clone() * factor.clone()));
        rem = rem.sub(&Poly::new(shifted));
        // guard against a non-decreasing degree from inexact arithmetic
        if rem.degree().map_or(false, |d| d >= dr) {
            let mut coeffs = rem.coeffs().to_vec();
            coeffs.truncate(dr);
            rem = Poly::new(coeffs);
        }
    }
    rem
}

/// Sturm chain p, p', -rem(...), ... down to a constant.
fn sturm_chain<T: Scalar>(p: &Poly<T>) -> Vec<Poly<T>> {
    let mut chain = vec![p.clone(), p.derivative()];
    while chain.last().map_or(false, |q| !q.is_zero()) {
        let n = chain.len();
        let r = poly_rem(&chain[n - 2], &chain[n - 1]);
        if r.is_zero() {
            break;
        }
        chain.push(r.neg());
    }
    chain
}

fn sign_variations<T: Scalar>(chain: &[Poly<T>], x: &T) -> usize {
    let mut count = 0;
    let mut last: Option<bool> = None; // is_negative of the last nonzero value
    for q in chain {
        let v = q.eval(x);
        if v.is_zero() {
            continue;
        }
        let neg = v.is_negative();
        if let Some(prev) = last {
            if prev != neg {
                count += 1;
            }
        }
        last = Some(neg);
    }
    count
}

/// Number of distinct real roots of p in the open interval (0, 1).
/// Requires p(0) != 0 and p(1) != 0.
pub fn roots_in_open_unit_interval<T: Scalar>(p: &Poly<T>) -> usize {
    let chain = sturm_chain(p);
    let v0 = sign_variations(&chain, &T::zero());
    let v1 = sign_variations(&chain, &T::one());
    v0 - v1
}

/// Certifies that p has a constant strict sign on all of [0, 1].
pub fn sign_definite_on_unit_interval<T: Scalar>(p: &Poly<T>, positive: bool) -> bool {
    if p.is_zero() {
        return false;
    }
    let at0 = p.eval(&T::zero());
    let at1 = p.eval(&T::one());
    if at0.is_zero() || at1.is_zero() {
        return false;
    }
    if at0.is_negative() == positive || at1.is_negative() == positive {
        return false;
    }
    if p.is_constant() {
        return true;
    }
    roots_in_open_unit_interval(p) == 0
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    type Q = BigRational;

    #[test]
    fn counts_roots_of_quadratic() {
        // (x - 1/3)(x - 2/3) = x^2 - x + 2/9
        let p = Poly::<Q>::new(vec![
            Scalar::from_ratio(2, 9),
            Scalar::from_int(-1),
            Scalar::from_int(1),
        ]);
        assert_eq!(roots_in_open_unit_interval(&p), 2);
        assert!(!sign_definite_on_unit_interval(&p, true));
    }

    #[test]
    fn affine_sign_certificates() {
        // 1 + x is positive on [0,1]; x - 2 negative; x - 1/2 changes sign
        assert!(sign_definite_on_unit_interval(
            &Poly::<Q>::from_ints(&[1, 1]),
            true
        ));
        assert!(sign_definite_on_unit_interval(
            &Poly::<Q>::from_ints(&[-2, 1]),
            false
        ));
        let mid = Poly::<Q>::new(vec![Scalar::from_ratio(-1, 2), Scalar::from_int(1)]);
        assert!(!sign_definite_on_unit_interval(&mid, true));
        assert!(!sign_definite_on_unit_interval(&mid, false));
    }

    #[test]
    fn double_root_inside_is_rejected() {
        // (2x - 1)^2 = 4x^2 - 4x + 1, zero at 1/2: not sign definite
        let p = Poly::<Q>::from_ints(&[1, -4, 4]);
        assert!(!sign_definite_on_unit_interval(&p, true));
    }

    #[test]
    fn endpoint_root_is_rejected() {
        let p = Poly::<Q>::from_ints(&[0, 1]); // x, zero at 0
        assert!(!sign_definite_on_unit_interval(&p, true));
    }
}
