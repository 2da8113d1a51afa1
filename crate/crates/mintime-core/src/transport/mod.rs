//! Transport times, characteristic-composition jets, and traced
//! characteristic curves.

pub mod quad;

use crate::error::{Error, Result};
use crate::model::{Jet, Poly, Scalar, TimeVector, Validated};

/// Relative tolerance for transport-time quadrature.
const TIME_REL_TOL: f64 = 1e-12;

/// T_i = integral over [0, 1] of 1 / |lambda_i|, 0-based index.
///
/// Constant speeds are exact in the backend; affine speeds use the log
/// closed form; anything else goes through adaptive quadrature. Inexact
/// values enter the exact backend as dyadic rationals, so reruns are
/// bit-identical.
pub fn transport_time<T: Scalar>(vs: &Validated<T>, i: usize) -> Result<T> {
    let lam = &vs.lambda[i];
    match lam.degree() {
        Some(0) => Ok(T::one() / lam.coeff(0).abs()),
        Some(1) => {
            // integral of 1/(a + b x) = ln((a + b)/a) / b
            let a = lam.coeff(0).to_f64();
            let b = lam.coeff(1).to_f64();
            Ok(T::from_f64((((a + b) / a).ln() / b).abs()))
        }
        _ => {
            let lam_f = lam.map(|c| c.to_f64());
            let v = quad::integrate(|x| 1.0 / lam_f.eval(&x).abs(), 0.0, 1.0, TIME_REL_TOL)?;
            Ok(T::from_f64(v))
        }
    }
}

/// All transport times for a validated system.
pub fn transport_times<T: Scalar>(vs: &Validated<T>) -> Result<TimeVector<T>> {
    let values = (0..vs.n())
        .map(|i| transport_time(vs, i))
        .collect::<Result<Vec<_>>>()?;
    Ok(TimeVector { values })
}

/// Taylor jet at 0 of the characteristic-composition function matching the
/// k-th positive flow against the j-th (both 0-based in 0..p):
/// zeta' = lambda_{m+k}(zeta) / lambda_{m+j}, zeta(0) = 0.
///
/// Computed by substituting the unknown jet into the ODE and matching
/// coefficients; each pass fixes one more coefficient, so `order` passes
/// suffice.
pub fn zeta_jet<T: Scalar>(vs: &Validated<T>, j: usize, k: usize, order: usize) -> Result<Jet<T>> {
    zeta_jet_from_polys(&vs.lambda[vs.m + j], &vs.lambda[vs.m + k], order)
}

/// The same jet from the two speed polynomials directly.
pub fn zeta_jet_from_polys<T: Scalar>(
    lam_j: &Poly<T>,
    lam_k: &Poly<T>,
    order: usize,
) -> Result<Jet<T>> {
    let mut z = Jet::zero(order);
    if order == 0 {
        return Ok(z);
    }
    let inner_order = order - 1;
    let lam_k_jet = lam_k.to_jet(inner_order);
    let lam_j_jet = lam_j.to_jet(inner_order);
    for _ in 0..order {
        let rhs = lam_k_jet.compose(&z)?.div(&lam_j_jet)?;
        z = rhs.integrate();
    }
    Ok(z)
}

/// A characteristic curve s -> chi_i(s; t, x) traced by fixed-step RK4 and
/// stored as a dense sample table, clipped where it exits [0, 1].
#[derive(Debug, Clone)]
pub struct Characteristic {
    pub index: usize,
    s_start: f64,
    step: f64,
    xs: Vec<f64>,
}

impl Characteristic {
    /// Curve position at s, by linear interpolation; None outside the
    /// traced (possibly clipped) window.
    pub fn position(&self, s: f64) -> Option<f64> {
        let (lo, hi) = self.window();
        if s < lo - 1e-12 || s > hi + 1e-12 {
            return None;
        }
        if self.xs.len() == 1 {
            return Some(self.xs[0]);
        }
        let u = ((s - self.s_start) / self.step).clamp(0.0, (self.xs.len() - 1) as f64);
        let i = (u.floor() as usize).min(self.xs.len() - 2);
        let w = u - i as f64;
        Some(self.xs[i] * (1.0 - w) + self.xs[i + 1] * w)
    }

    pub fn window(&self) -> (f64, f64) {
        (
            self.s_start,
            self.s_start + self.step * (self.xs.len() - 1) as f64,
        )
    }
}

/// One RK4 step for the autonomous ODE dx/ds = lambda(x).
pub fn rk4_step(lam: &Poly<f64>, x: f64, h: f64) -> f64 {
    let k1 = lam.eval(&x);
    let k2 = lam.eval(&(x + 0.5 * h * k1));
    let k3 = lam.eval(&(x + 0.5 * h * k2));
    let k4 = lam.eval(&(x + h * k3));
    x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

fn min_abs_speed(lam: &Poly<f64>) -> f64 {
    (0..=256)
        .map(|k| lam.eval(&(k as f64 / 256.0)).abs())
        .fold(f64::INFINITY, f64::min)
}

/// Trace chi_i(s; t, x) over the window (both directions from s = t),
/// clipping where the curve leaves [0, 1].
pub fn trace_characteristic(
    vs: &Validated<f64>,
    i: usize,
    t: f64,
    x: f64,
    window: (f64, f64),
) -> Result<Characteristic> {
    let lam = &vs.lambda[i];
    let h = 1e-3 * min_abs_speed(lam).min(1.0);
    if h < 1e-12 {
        return Err(Error::StepSizeUnderflow);
    }
    let (s_lo, s_hi) = window;
    assert!(s_lo <= t && t <= s_hi, "anchor outside window");

    let march = |dir: f64| -> Vec<f64> {
        let limit = if dir > 0.0 { s_hi - t } else { t - s_lo };
        let steps = (limit / h).ceil() as usize;
        let mut out = Vec::with_capacity(steps);
        let mut cur = x;
        for _ in 0..steps {
            cur = rk4_step(lam, cur, dir * h);
            if !(0.0..=1.0).contains(&cur) {
                break;
            }
            out.push(cur);
        }
        out
    };

    let back = march(-1.0);
    let fwd = march(1.0);
    let mut xs: Vec<f64> = back.iter().rev().copied().collect();
    let s_start = t - h * back.len() as f64;
    xs.push(x);
    xs.extend(fwd);
    Ok(Characteristic {
        index: i,
        s_start,
        step: h,
        xs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SystemSpec;
    use num_rational::BigRational;

    type Q = BigRational;

    fn constant_spec(speeds: &[i64]) -> Validated<Q> {
        let m = speeds.iter().filter(|&&s| s < 0).count();
        let n = speeds.len();
        SystemSpec {
            m,
            p: n - m,
            lambda: speeds.iter().map(|&s| Poly::from_ints(&[s])).collect(),
            coupling: vec![vec![Poly::zero(); n]; n],
            boundary: vec![vec![Scalar::zero(); m]; n - m],
            regularity: 3,
        }
        .validate()
        .unwrap()
    }

    /// The worked five-speed example: diag(-2, -1, -1/2, 1, 2).
    pub fn five_speed_spec() -> Validated<Q> {
        let halves: Vec<Poly<Q>> = vec![
            Poly::from_ints(&[-2]),
            Poly::from_ints(&[-1]),
            Poly::new(vec![Scalar::from_ratio(-1, 2)]),
            Poly::from_ints(&[1]),
            Poly::from_ints(&[2]),
        ];
        SystemSpec {
            m: 3,
            p: 2,
            lambda: halves,
            coupling: vec![vec![Poly::zero(); 5]; 5],
            boundary: vec![vec![Scalar::zero(); 3]; 2],
            regularity: 1,
        }
        .validate()
        .unwrap()
    }

    #[test]
    fn constant_times_are_exact() {
        let vs = five_speed_spec();
        let t = transport_times(&vs).unwrap();
        assert_eq!(t.time(0), &Q::from_ratio(1, 2));
        assert_eq!(t.time(1), &Q::from_int(1));
        assert_eq!(t.time(2), &Q::from_int(2));
        assert_eq!(t.time(3), &Q::from_int(1));
        assert_eq!(t.time(4), &Q::from_ratio(1, 2));
    }

    #[test]
    fn affine_time_matches_log() {
        // lambda = 1 + x on the positive side: T = ln 2
        let mut spec = constant_spec(&[-1, 1]).spec().clone();
        spec.lambda[1] = Poly::from_ints(&[1, 1]);
        let vs = spec.validate().unwrap();
        let t = transport_time(&vs, 1).unwrap();
        assert!((t.to_f64() - std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn quadratic_time_via_quadrature() {
        // lambda = -(1 + x^2): T = integral 1/(1+x^2) = pi/4
        let mut spec = constant_spec(&[-1, 1]).spec().clone();
        spec.lambda[0] = Poly::from_ints(&[-1, 0, -1]);
        let vs = spec.validate().unwrap();
        let t = transport_time(&vs, 0).unwrap();
        assert!((t.to_f64() - std::f64::consts::FRAC_PI_4).abs() < 1e-12);
    }

    #[test]
    fn zeta_identity_when_rows_match() {
        let vs = five_speed_spec();
        for j in 0..2 {
            let z = zeta_jet(&vs, j, j, 4).unwrap();
            assert_eq!(z, Jet::identity(4));
        }
    }

    #[test]
    fn zeta_halves_in_worked_example() {
        // j = 2nd positive row (speed 2), k = 1st (speed 1): zeta(x) = x/2
        let vs = five_speed_spec();
        let z = zeta_jet(&vs, 1, 0, 4).unwrap();
        let want: Q = Scalar::from_ratio(1, 2);
        assert_eq!(z.coeff(1), &want);
        for l in [0usize, 2, 3, 4] {
            assert!(z.coeff(l).is_zero(), "coefficient {l} should vanish");
        }
    }

    #[test]
    fn zeta_exponential_closed_form() {
        // lambda_k = 1 + x against lambda_j = 1: zeta' = 1 + zeta,
        // zeta = e^x - 1 with coefficients 1/l! for l >= 1.
        let lam_j = Poly::<Q>::from_ints(&[1]);
        let lam_k = Poly::<Q>::from_ints(&[1, 1]);
        let z = zeta_jet_from_polys(&lam_j, &lam_k, 5).unwrap();
        assert!(z.coeff(0).is_zero());
        for l in 1..=5 {
            let expected = Q::one() / crate::model::scalar::factorial::<Q>(l);
            assert_eq!(z.coeff(l), &expected);
        }
    }

    #[test]
    fn first_order_zeta_coefficient_is_speed_ratio() {
        let vs = five_speed_spec();
        // j = 0 (speed 1), k = 1 (speed 2): slope 2/1
        let z = zeta_jet(&vs, 0, 1, 3).unwrap();
        assert_eq!(z.coeff(1), &Q::from_int(2));
        assert!(z.coeff(0).is_zero());
    }

    #[test]
    fn characteristic_constant_speed_is_linear() {
        let vs = constant_spec(&[-1, 2]).to_f64();
        let ch = trace_characteristic(&vs, 1, 0.3, 0.1, (0.0, 1.0)).unwrap();
        // chi(s) = 0.1 + 2 (s - 0.3) while inside [0, 1]
        let x = ch.position(0.45).unwrap();
        assert!((x - 0.4).abs() < 1e-9);
    }

    #[test]
    fn characteristic_exponential_growth() {
        // lambda = 1 + x from (t, x) = (0, 0): chi(s) = e^s - 1
        let mut spec = constant_spec(&[-1, 1]).spec().clone();
        spec.lambda[1] = Poly::from_ints(&[1, 1]);
        let vs = spec.validate().unwrap().to_f64();
        let ch = trace_characteristic(&vs, 1, 0.0, 0.0, (0.0, 0.8)).unwrap();
        let x = ch.position(0.5).unwrap();
        assert!((x - (0.5f64.exp() - 1.0)).abs() < 1e-9);
    }

    #[test]
    fn characteristic_clips_at_domain_exit() {
        let vs = constant_spec(&[-1, 1]).to_f64();
        // speed 1 from (0, 0.5) exits at x = 1 when s = 0.5
        let ch = trace_characteristic(&vs, 1, 0.0, 0.5, (0.0, 2.0)).unwrap();
        let (_, s_hi) = ch.window();
        assert!((s_hi - 0.5).abs() < 5e-3);
        assert!(ch.position(1.5).is_none());
    }
}
