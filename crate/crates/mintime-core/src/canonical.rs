//! Canonical form of boundary coupling matrices, the minimal-time formula,
//! the literature bounds, and the closed-form special cases. Also hosts the
//! top-level pipeline driver assembling a [`TimeReport`].

use crate::error::{Error, Result};
use crate::linalg::{rank, Mat};
use crate::model::scalar::is_negligible;
use crate::model::{Scalar, TimeVector, Validated};
use crate::reduction::{run_reduction, ReductionOutcome, ReductionResult};
use crate::transport::transport_times;

/// L Q U = Q0 with L lower unitriangular and U upper triangular invertible;
/// Q0 has at most one nonzero entry per row and column, each equal to one.
/// Pivots are 0-based (row, column) pairs with strictly increasing rows.
#[derive(Debug, Clone)]
pub struct CanonicalForm<T> {
    pub q0: Mat<T>,
    pub pivots: Vec<(usize, usize)>,
    /// rank of the source matrix.
    pub rho: usize,
    /// Largest i <= p such that the first i rows of the source have rank i.
    pub rho0: usize,
    pub l: Mat<T>,
    pub u: Mat<T>,
}

/// Constructive elimination: process rows top to bottom, clear previously
/// chosen pivot columns, take the leftmost remaining nonzero entry as the
/// pivot, normalize it to one by a column scaling, clear the rest of its
/// row by column shears acting on columns to its right.
pub fn canonical_form<T: Scalar>(q: &Mat<T>, tol: &T) -> CanonicalForm<T> {
    let p = q.rows();
    let m = q.cols();
    let mut w = q.clone();
    let mut l = Mat::<T>::identity(p);
    let mut u = Mat::<T>::identity(m);
    let mut pivots: Vec<(usize, usize)> = Vec::new();

    for r in 0..p {
        // clear contributions of previously chosen pivots (row r_prev is
        // the unit row e_{c_prev} by now)
        for &(r_prev, c_prev) in &pivots {
            let coef = w.get(r, c_prev).clone();
            if coef.is_zero() {
                continue;
            }
            for c in 0..m {
                let v = w.get(r_prev, c).clone() * coef.clone();
                *w.get_mut(r, c) -= v;
            }
            for c in 0..p {
                let v = l.get(r_prev, c).clone() * coef.clone();
                *l.get_mut(r, c) -= v;
            }
        }
        let scale = crate::model::scalar::max_abs(w.row(r));
        let Some(c) = (0..m).find(|&c| !is_negligible(w.get(r, c), tol, &scale)) else {
            // fully dependent row: force it to exact zero
            for c in 0..m {
                *w.get_mut(r, c) = T::zero();
            }
            continue;
        };
        // normalize the pivot to 1 by scaling column c
        let v = w.get(r, c).clone();
        for i in 0..p {
            let nv = w.get(i, c).clone() / v.clone();
            *w.get_mut(i, c) = nv;
        }
        for i in 0..m {
            let nv = u.get(i, c).clone() / v.clone();
            *u.get_mut(i, c) = nv;
        }
        // clear the rest of row r with column shears (all to the right of c)
        for d in 0..m {
            if d == c {
                continue;
            }
            let factor = w.get(r, d).clone();
            if factor.is_zero() {
                continue;
            }
            debug_assert!(d > c, "pivot must be the leftmost nonzero");
            for i in 0..p {
                let v = w.get(i, c).clone() * factor.clone();
                *w.get_mut(i, d) -= v;
            }
            for i in 0..m {
                let v = u.get(i, c).clone() * factor.clone();
                *u.get_mut(i, d) -= v;
            }
        }
        // snap residual float noise in the pivot row to canonical entries
        for d in 0..m {
            *w.get_mut(r, d) = if d == c { T::one() } else { T::zero() };
        }
        pivots.push((r, c));
    }

    let rho = pivots.len();
    let mut rho0 = 0;
    for i in 1..=p {
        if rank(&q.leading_rows(i), tol) == i {
            rho0 = i;
        } else {
            break;
        }
    }
    CanonicalForm {
        q0: w,
        pivots,
        rho,
        rho0,
        l,
        u,
    }
}

/// T_inf when the first min(p, m) rows are independent:
/// max over pivots of T_{m+k} + T_{c_k}, joined with T_m. Pivot rows must
/// cover 0..nmin-1.
pub fn minimal_time_full_rank<T: Scalar>(
    times: &TimeVector<T>,
    pivots: &[(usize, usize)],
    m: usize,
    nmin: usize,
) -> Result<T> {
    for k in 0..nmin {
        if !pivots.iter().any(|&(r, _)| r == k) {
            return Err(Error::IncompletePivots);
        }
    }
    let mut best = times.time(m - 1).clone(); // T_m
    for &(r, c) in pivots.iter().filter(|&&(r, _)| r < nmin) {
        let v = times.time(m + r).clone() + times.time(c).clone();
        if v > best {
            best = v;
        }
    }
    Ok(best)
}

/// Every literature bound the pipeline reports.
#[derive(Debug, Clone)]
pub struct BoundsSuite<T> {
    /// T_{m+1} + T_m: universal upper bound.
    pub russell: T,
    /// Largest minimal time over all internal couplings (upper bound).
    pub max_m: T,
    /// Minimal time of the system without internal coupling (lower bound).
    pub m_zero_formula: T,
    /// Leading-minor class bound, when the boundary matrix qualifies.
    pub t_cn: Option<T>,
    /// Exact value when the boundary matrix has full row rank.
    pub rank_p_formula: Option<T>,
}

/// Whether every leading i x i minor is invertible for i <= min(p, m-1).
fn in_leading_minor_class<T: Scalar>(q: &Mat<T>, tol: &T) -> bool {
    let limit = q.rows().min(q.cols().saturating_sub(1));
    for i in 1..=limit {
        let sub = Mat::from_rows((0..i).map(|r| q.row(r)[..i].to_vec()).collect::<Vec<_>>());
        if rank(&sub, tol) != i {
            return false;
        }
    }
    true
}

pub fn bounds_suite<T: Scalar>(
    vs: &Validated<T>,
    times: &TimeVector<T>,
    cf: &CanonicalForm<T>,
) -> BoundsSuite<T> {
    let m = vs.m;
    let p = vs.p;
    let t_m = times.time(m - 1).clone();
    let t_m1 = times.time(m).clone();
    let russell = t_m1.clone() + t_m.clone();

    // minimal time without internal coupling: pivots of the original matrix
    let mut m_zero = if t_m > t_m1 { t_m.clone() } else { t_m1.clone() };
    for &(r, c) in &cf.pivots {
        let v = times.time(m + r).clone() + times.time(c).clone();
        if v > m_zero {
            m_zero = v;
        }
    }

    // largest minimal time over all internal couplings
    let mut max_m = if cf.rho0 < p {
        times.time(m + cf.rho0).clone() + t_m.clone()
    } else {
        t_m.clone()
    };
    for &(r, c) in cf.pivots.iter().filter(|&&(r, _)| r < cf.rho0) {
        let v = times.time(m + r).clone() + times.time(c).clone();
        if v > max_m {
            max_m = v;
        }
    }

    let q_mat = Mat::from_rows(vs.boundary.clone());
    let t_cn = if in_leading_minor_class(&q_mat, vs.tol()) {
        let mut v = t_m.clone();
        for k in 0..vs.nmin() {
            let cand = times.time(m + k).clone() + times.time(k).clone();
            if cand > v {
                v = cand;
            }
        }
        Some(v)
    } else {
        None
    };

    let rank_p_formula = if cf.rho == p {
        minimal_time_full_rank(times, &cf.pivots, m, p).ok()
    } else {
        None
    };

    BoundsSuite {
        russell,
        max_m,
        m_zero_formula: m_zero,
        t_cn,
        rank_p_formula,
    }
}

/// Upper bound when the reduction stopped after finalizing rows 0..k0:
/// max over the completed pivots joined with T_{m+k0+1} + T_m.
pub fn early_stop_bound<T: Scalar>(
    times: &TimeVector<T>,
    partial_pivots: &[(usize, usize)],
    k0: usize,
    m: usize,
) -> T {
    let mut best = times.time(m + k0).clone() + times.time(m - 1).clone();
    for &(r, c) in partial_pivots.iter().filter(|&&(r, _)| r < k0) {
        let v = times.time(m + r).clone() + times.time(c).clone();
        if v > best {
            best = v;
        }
    }
    best
}

fn boundary_is_zero<T: Scalar>(vs: &Validated<T>) -> bool {
    let q = Mat::from_rows(vs.boundary.clone());
    is_negligible(&q.max_abs(), vs.tol(), &T::one())
}

/// Closed form for a single positive equation with zero boundary coupling:
/// scan the coupling row for its first nonvanishing derivative order at 0;
/// the column of its first nonzero entry fixes the time. A zero row means
/// the positive component decouples and the time is max(T_m, T_{m+1}).
pub fn closed_form_p1<T: Scalar>(vs: &Validated<T>, times: &TimeVector<T>) -> Result<T> {
    if vs.p != 1 {
        return Err(Error::NotApplicable("requires exactly one positive speed"));
    }
    if !boundary_is_zero(vs) {
        return Err(Error::NotApplicable("requires zero boundary coupling"));
    }
    let m = vs.m;
    let row = &vs.coupling[m][..m];
    let r0 = row
        .iter()
        .filter_map(|poly| poly.coeffs().iter().position(|c| !c.is_zero()))
        .min();
    let t_m = times.time(m - 1).clone();
    let t_m1 = times.time(m).clone();
    match r0 {
        None => Ok(if t_m > t_m1 { t_m } else { t_m1 }),
        Some(r0) => {
            let c = row
                .iter()
                .position(|poly| !poly.coeff(r0).is_zero())
                .expect("a column attains the minimal order");
            let v = t_m1 + times.time(c).clone();
            Ok(if v > t_m { v } else { t_m })
        }
    }
}

/// Closed form for zero boundary coupling when the coupling-ratio matrix
/// Q' = (m_ab(0) / (lambda_a(0) - lambda_b(0))) has independent leading
/// rows: the pivots of Q' give the time directly.
pub fn q_zero_closed_form<T: Scalar>(vs: &Validated<T>, times: &TimeVector<T>) -> Result<T> {
    if !boundary_is_zero(vs) {
        return Err(Error::NotApplicable("requires zero boundary coupling"));
    }
    let q_prime = coupling_ratio_matrix(vs);
    let nmin = vs.nmin();
    if rank(&q_prime.leading_rows(nmin), vs.tol()) != nmin {
        return Err(Error::NotApplicable(
            "leading rows of the coupling-ratio matrix are dependent",
        ));
    }
    let cf = canonical_form(&q_prime, vs.tol());
    minimal_time_full_rank(times, &cf.pivots, vs.m, nmin)
}

/// Q' = (m_ab(0) / (lambda_a(0) - lambda_b(0))) over positive rows and
/// negative columns.
pub fn coupling_ratio_matrix<T: Scalar>(vs: &Validated<T>) -> Mat<T> {
    let mut q = Mat::zeros(vs.p, vs.m);
    for j in 0..vs.p {
        let alpha = vs.m + j;
        for beta in 0..vs.m {
            let denom = vs.lambda_at_zero(alpha) - vs.lambda_at_zero(beta);
            *q.get_mut(j, beta) = vs.coupling[alpha][beta].eval_zero() / denom;
        }
    }
    q
}

/// Final verdict on the minimal time.
#[derive(Debug, Clone, PartialEq)]
pub enum TinfValue<T> {
    Exact(T),
    Bounds { lower: T, upper: T },
}

/// Everything the pipeline knows about one system.
#[derive(Debug, Clone)]
pub struct TimeReport<T> {
    pub times: TimeVector<T>,
    pub tinf: TinfValue<T>,
    /// Pivots backing the reported value (0-based), from the reduced
    /// matrix on complete runs, from its finalized rows on partial ones.
    pub pivots: Vec<(usize, usize)>,
    pub bounds: BoundsSuite<T>,
    pub reduction: ReductionResult<T>,
    pub diagnostics: Vec<String>,
}

impl<T: Scalar> TimeReport<T> {
    pub fn is_exact(&self) -> bool {
        matches!(self.tinf, TinfValue::Exact(_))
    }
}

/// Run the full pipeline: transport times, literature bounds, the row
/// reduction, and the applicable closed forms.
pub fn analyze<T: Scalar>(vs: &Validated<T>) -> Result<TimeReport<T>> {
    let times = transport_times(vs)?;
    let q_mat = Mat::from_rows(vs.boundary.clone());
    let cf_original = canonical_form(&q_mat, vs.tol());
    let bounds = bounds_suite(vs, &times, &cf_original);
    let reduction = run_reduction(vs)?;
    let mut diagnostics = Vec::new();
    for &row in &reduction.decoupled_rows {
        diagnostics.push(format!(
            "positive row {} has no internal coupling and a dependent boundary row: \
             the component decouples",
            row + 1
        ));
    }

    let (tinf, pivots) = match reduction.outcome {
        ReductionOutcome::Complete => {
            let cf = canonical_form(&reduction.q_rows, vs.tol());
            let value = minimal_time_full_rank(&times, &cf.pivots, vs.m, vs.nmin())?;
            (TinfValue::Exact(value), cf.pivots)
        }
        ReductionOutcome::PartialAt(k0) => {
            if let Ok(value) = closed_form_p1(vs, &times) {
                diagnostics.push(
                    "exact value from the single-positive-row closed form; the reduction \
                     trace stays partial"
                        .to_string(),
                );
                (TinfValue::Exact(value), Vec::new())
            } else {
                let finalized = reduction.q_rows.leading_rows(k0);
                let cf_partial = canonical_form(&finalized, vs.tol());
                let upper = early_stop_bound(&times, &cf_partial.pivots, k0, vs.m);
                let lower = bounds.m_zero_formula.clone();
                (TinfValue::Bounds { lower, upper }, cf_partial.pivots)
            }
        }
    };

    sanity_check(vs, &times, &bounds, &tinf, &mut diagnostics);
    Ok(TimeReport {
        times,
        tinf,
        pivots,
        bounds,
        reduction,
        diagnostics,
    })
}

/// Report-level assertions: any reported value sits above max(T_m, T_{m+1})
/// and any exact value inside [no-coupling lower bound, max-coupling upper
/// bound]. Violations are bugs in exact mode; in float mode they become
/// diagnostics.
fn sanity_check<T: Scalar>(
    vs: &Validated<T>,
    times: &TimeVector<T>,
    bounds: &BoundsSuite<T>,
    tinf: &TinfValue<T>,
    diagnostics: &mut Vec<String>,
) {
    let t_m = times.time(vs.m - 1).clone();
    let t_m1 = times.time(vs.m).clone();
    let floor = if t_m > t_m1 { t_m } else { t_m1 };
    let slack = if T::EXACT {
        T::zero()
    } else {
        T::from_f64(1e-9) * bounds.russell.clone()
    };
    let check = |label: &str, ok: bool, diagnostics: &mut Vec<String>| {
        if !ok {
            if T::EXACT {
                panic!("report sanity violated: {label}");
            }
            diagnostics.push(format!("report sanity violated (float): {label}"));
        }
    };
    match tinf {
        TinfValue::Exact(v) => {
            check(
                "value below transport floor",
                v.clone() + slack.clone() >= floor,
                diagnostics,
            );
            check(
                "value below the no-coupling lower bound",
                v.clone() + slack.clone() >= bounds.m_zero_formula.clone(),
                diagnostics,
            );
            check(
                "value above the max-coupling upper bound",
                v.clone() <= bounds.max_m.clone() + slack.clone(),
                diagnostics,
            );
        }
        TinfValue::Bounds { lower, upper } => {
            check(
                "lower bound above upper bound",
                lower.clone() <= upper.clone() + slack.clone(),
                diagnostics,
            );
            check(
                "bounds below transport floor",
                upper.clone() + slack.clone() >= floor,
                diagnostics,
            );
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Poly, SystemSpec};
    use num_rational::BigRational;

    type Q = BigRational;

    fn q(n: i64, d: i64) -> Q {
        Scalar::from_ratio(n, d)
    }

    fn qi(n: i64) -> Q {
        Scalar::from_int(n)
    }

    fn qm(rows: &[&[Q]]) -> Mat<Q> {
        Mat::from_rows(rows.iter().map(|r| r.to_vec()).collect())
    }

    fn worked_example() -> Validated<Q> {
        let lambda = vec![
            Poly::from_ints(&[-2]),
            Poly::from_ints(&[-1]),
            Poly::new(vec![q(-1, 2)]),
            Poly::from_ints(&[1]),
            Poly::from_ints(&[2]),
        ];
        let rows: [[Q; 5]; 5] = [
            [qi(0), qi(0), qi(0), qi(1), qi(6)],
            [qi(0), qi(0), qi(0), qi(2), qi(1)],
            [qi(0), qi(0), qi(0), qi(3), qi(-1)],
            [qi(3), qi(2), qi(1), qi(0), qi(0)],
            [qi(8), qi(9), q(-20, 3), qi(0), qi(0)],
        ];
        let coupling = rows
            .iter()
            .map(|row| row.iter().map(|c| Poly::constant(c.clone())).collect())
            .collect();
        let boundary = vec![vec![qi(0), qi(1), qi(-2)], vec![qi(0), qi(2), qi(-4)]];
        SystemSpec {
            m: 3,
            p: 2,
            lambda,
            coupling,
            boundary,
            regularity: 1,
        }
        .validate()
        .unwrap()
    }

    #[test]
    fn reduced_matrix_canonical_form() {
        let reduced = qm(&[
            &[qi(0), qi(1), qi(-2)],
            &[qi(-2), q(149, 3), q(-305, 3)],
        ]);
        let cf = canonical_form(&reduced, &Q::zero());
        assert_eq!(cf.pivots, vec![(0, 1), (1, 0)]);
        assert_eq!(cf.rho, 2);
        assert_eq!(
            cf.q0.to_rows(),
            vec![vec![qi(0), qi(1), qi(0)], vec![qi(1), qi(0), qi(0)]]
        );
        // exact reconstruction
        let product = cf.l.matmul(&reduced).matmul(&cf.u);
        assert_eq!(product, cf.q0);
    }

    #[test]
    fn already_canonical_passthrough() {
        let c = qm(&[&[qi(0), qi(1)], &[qi(1), qi(0)]]);
        let cf = canonical_form(&c, &Q::zero());
        assert_eq!(cf.q0, c);
        assert_eq!(cf.l, Mat::identity(2));
        assert_eq!(cf.u, Mat::identity(2));
    }

    #[test]
    fn dependent_second_row_eliminated() {
        let original = qm(&[&[qi(0), qi(1), qi(-2)], &[qi(0), qi(2), qi(-4)]]);
        let cf = canonical_form(&original, &Q::zero());
        assert_eq!(cf.pivots, vec![(0, 1)]);
        assert_eq!(cf.rho, 1);
        assert_eq!(cf.rho0, 1);
        assert_eq!(
            cf.q0.to_rows(),
            vec![vec![qi(0), qi(1), qi(0)], vec![qi(0), qi(0), qi(0)]]
        );
        assert_eq!(
            cf.l.to_rows(),
            vec![vec![qi(1), qi(0)], vec![qi(-2), qi(1)]]
        );
        let product = cf.l.matmul(&original).matmul(&cf.u);
        assert_eq!(product, cf.q0);
    }

    #[test]
    fn zero_matrix_has_no_pivots() {
        let cf = canonical_form(&Mat::<Q>::zeros(2, 3), &Q::zero());
        assert!(cf.pivots.is_empty());
        assert_eq!(cf.rho, 0);
        assert_eq!(cf.rho0, 0);
    }

    /// rank of the leading i x j block, the invariant of (L, U) actions.
    fn rank_profile(mat: &Mat<Q>) -> Vec<Vec<usize>> {
        (1..=mat.rows())
            .map(|i| {
                (1..=mat.cols())
                    .map(|j| {
                        let sub = Mat::from_rows(
                            (0..i).map(|r| mat.row(r)[..j].to_vec()).collect::<Vec<_>>(),
                        );
                        rank(&sub, &Q::zero())
                    })
                    .collect()
            })
            .collect()
    }

    /// All 0/1 matrices with at most one 1 per row and column.
    fn all_canonical(p: usize, m: usize) -> Vec<Mat<Q>> {
        fn rec(
            row: usize,
            p: usize,
            m: usize,
            used: &mut Vec<bool>,
            current: &mut Vec<Option<usize>>,
            out: &mut Vec<Mat<Q>>,
        ) {
            if row == p {
                let mut mat = Mat::<Q>::zeros(p, m);
                for (r, choice) in current.iter().enumerate() {
                    if let Some(c) = choice {
                        *mat.get_mut(r, *c) = Scalar::one();
                    }
                }
                out.push(mat);
                return;
            }
            current.push(None);
            rec(row + 1, p, m, used, current, out);
            current.pop();
            for c in 0..m {
                if !used[c] {
                    used[c] = true;
                    current.push(Some(c));
                    rec(row + 1, p, m, used, current, out);
                    current.pop();
                    used[c] = false;
                }
            }
        }
        let mut out = Vec::new();
        let mut used = vec![false; m];
        let mut current = Vec::new();
        rec(0, p, m, &mut used, &mut current, &mut out);
        out
    }

    #[test]
    fn uniqueness_by_rank_profile_brute_force() {
        // the rank profile of leading blocks is invariant under the (L, U)
        // action, so no second canonical matrix with the same profile means
        // no second factorization exists
        use rand::rngs::StdRng;
        use rand::{Rng, SeedableRng};
        let mut rng = StdRng::seed_from_u64(42);
        for _ in 0..25 {
            let mat = Mat::from_rows(
                (0..3)
                    .map(|_| {
                        (0..3)
                            .map(|_| Scalar::from_ratio(rng.gen_range(-3..=3), 1))
                            .collect()
                    })
                    .collect::<Vec<Vec<Q>>>(),
            );
            let cf = canonical_form(&mat, &Q::zero());
            let profile = rank_profile(&mat);
            assert_eq!(rank_profile(&cf.q0), profile, "canonical form profile");
            let mut matches = 0;
            for candidate in all_canonical(3, 3) {
                if rank_profile(&candidate) == profile {
                    matches += 1;
                    assert_eq!(candidate, cf.q0, "a second canonical matrix matched");
                }
            }
            assert_eq!(matches, 1);
        }
    }

    #[test]
    fn worked_example_times_and_bounds() {
        let vs = worked_example();
        let times = transport_times(&vs).unwrap();
        let q_mat = Mat::from_rows(vs.boundary.clone());
        let cf = canonical_form(&q_mat, vs.tol());
        let bounds = bounds_suite(&vs, &times, &cf);
        assert_eq!(bounds.russell, qi(3));
        assert_eq!(bounds.max_m, q(5, 2));
        // no-coupling value: pivot (1,2) gives max{T_4 + T_2, T_3, T_4} = 2
        assert_eq!(bounds.m_zero_formula, qi(2));
        assert!(bounds.t_cn.is_none(), "leading minor is singular");
        assert!(bounds.rank_p_formula.is_none(), "rank is 1 < p");
    }

    #[test]
    fn minimal_time_formula_on_worked_pivots() {
        let vs = worked_example();
        let times = transport_times(&vs).unwrap();
        let t = minimal_time_full_rank(&times, &[(0, 1), (1, 0)], 3, 2).unwrap();
        assert_eq!(t, qi(2));
        // order of the pivot list does not matter
        let t2 = minimal_time_full_rank(&times, &[(1, 0), (0, 1)], 3, 2).unwrap();
        assert_eq!(t2, qi(2));
        assert_eq!(
            minimal_time_full_rank(&times, &[(0, 1)], 3, 2),
            Err(Error::IncompletePivots)
        );
    }

    #[test]
    fn early_stop_bound_cases() {
        let vs = worked_example();
        let times = transport_times(&vs).unwrap();
        // nothing reduced: the universal bound
        assert_eq!(early_stop_bound(&times, &[], 0, 3), qi(3));
        // stopped after row 1 with pivot (1, 2): max{T_4 + T_2, T_5 + T_3}
        assert_eq!(early_stop_bound(&times, &[(0, 1)], 1, 3), q(5, 2));
    }

    #[test]
    fn end_to_end_worked_example() {
        let vs = worked_example();
        let report = analyze(&vs).unwrap();
        assert_eq!(report.tinf, TinfValue::Exact(qi(2)));
        assert_eq!(report.pivots, vec![(0, 1), (1, 0)]);
        assert!(report.diagnostics.is_empty());
    }

    #[test]
    fn closed_form_p1_cases() {
        // constant row (0, 5, 0) with m = 3: first order 0, column 2
        let lambda = vec![
            Poly::from_ints(&[-2]),
            Poly::from_ints(&[-1]),
            Poly::new(vec![q(-1, 2)]),
            Poly::from_ints(&[1]),
        ];
        let mut coupling: Vec<Vec<Poly<Q>>> = vec![vec![Poly::zero(); 4]; 4];
        coupling[3][1] = Poly::from_ints(&[5]);
        let spec = SystemSpec {
            m: 3,
            p: 1,
            lambda,
            coupling,
            boundary: vec![vec![qi(0), qi(0), qi(0)]],
            regularity: 2,
        };
        let vs = spec.validate().unwrap();
        let times = transport_times(&vs).unwrap();
        // T_inf = max{T_4 + T_2, T_3} = max{1 + 1, 2} = 2
        assert_eq!(closed_form_p1(&vs, &times).unwrap(), qi(2));

        // row (x^2, 0): first nonzero derivative order 2, column 1
        let spec2 = {
            let mut coupling: Vec<Vec<Poly<Q>>> = vec![vec![Poly::zero(); 3]; 3];
            coupling[2][0] = Poly::from_ints(&[0, 0, 1]);
            SystemSpec {
                m: 2,
                p: 1,
                lambda: vec![
                    Poly::from_ints(&[-2]),
                    Poly::from_ints(&[-1]),
                    Poly::from_ints(&[1]),
                ],
                coupling,
                boundary: vec![vec![qi(0), qi(0)]],
                regularity: 3,
            }
        };
        let vs2 = spec2.validate().unwrap();
        let times2 = transport_times(&vs2).unwrap();
        // c = 1 (first column): T_inf = max{T_3 + T_1, T_2} = max{1 + 1/2, 1}
        assert_eq!(closed_form_p1(&vs2, &times2).unwrap(), q(3, 2));

        // identically zero row: max{T_m, T_{m+1}}
        let mut spec3 = vs2.spec().clone();
        spec3.coupling = vec![vec![Poly::zero(); 3]; 3];
        let vs3 = spec3.validate().unwrap();
        let times3 = transport_times(&vs3).unwrap();
        assert_eq!(closed_form_p1(&vs3, &times3).unwrap(), qi(1));

        // not applicable with nonzero boundary
        let mut spec4 = vs2.spec().clone();
        spec4.boundary = vec![vec![qi(1), qi(0)]];
        let vs4 = spec4.validate().unwrap();
        assert!(matches!(
            closed_form_p1(&vs4, &times2),
            Err(Error::NotApplicable(_))
        ));
    }

    #[test]
    fn q_zero_closed_form_identity_block() {
        // coupling chosen so Q' is the identity block
        let lambda = vec![
            Poly::from_ints(&[-2]),
            Poly::from_ints(&[-1]),
            Poly::from_ints(&[1]),
            Poly::from_ints(&[2]),
        ];
        let mut coupling: Vec<Vec<Poly<Q>>> = vec![vec![Poly::zero(); 4]; 4];
        // Q'[j][b] = m[2+j][b](0) / (lam_{2+j}(0) - lam_b(0))
        coupling[2][0] = Poly::constant(qi(1) * (qi(1) - qi(-2))); // -> 1
        coupling[3][1] = Poly::constant(qi(1) * (qi(2) - qi(-1))); // -> 1
        let spec = SystemSpec {
            m: 2,
            p: 2,
            lambda,
            coupling,
            boundary: vec![vec![qi(0), qi(0)], vec![qi(0), qi(0)]],
            regularity: 2,
        };
        let vs = spec.validate().unwrap();
        let times = transport_times(&vs).unwrap();
        let q_prime = coupling_ratio_matrix(&vs);
        assert_eq!(q_prime, Mat::identity(2));
        // T_inf = max{T_3 + T_1, T_4 + T_2, T_2} = max{1 + 1/2, 1/2 + 1, 1}
        assert_eq!(q_zero_closed_form(&vs, &times).unwrap(), q(3, 2));
        // nonzero boundary: not applicable
        let mut spec5 = vs.spec().clone();
        spec5.boundary[0][0] = qi(1);
        let vs5 = spec5.validate().unwrap();
        assert!(matches!(
            q_zero_closed_form(&vs5, &times),
            Err(Error::NotApplicable(_))
        ));
    }

    #[test]
    fn analyze_reports_bounds_on_exhaustion() {
        // Q = 0, M = 0 with p = 2: no closed form applies, bounds only
        let spec = SystemSpec::<Q> {
            m: 2,
            p: 2,
            lambda: vec![
                Poly::from_ints(&[-2]),
                Poly::from_ints(&[-1]),
                Poly::from_ints(&[1]),
                Poly::from_ints(&[2]),
            ],
            coupling: vec![vec![Poly::zero(); 4]; 4],
            boundary: vec![vec![qi(0), qi(0)], vec![qi(0), qi(0)]],
            regularity: 2,
        };
        let vs = spec.validate().unwrap();
        let report = analyze(&vs).unwrap();
        match &report.tinf {
            TinfValue::Bounds { lower, upper } => {
                // lower = max(T_m, T_{m+1}) = 1, upper = T_{m+1} + T_m = 2
                assert_eq!(lower, &qi(1));
                assert_eq!(upper, &qi(2));
            }
            other => panic!("expected bounds, got {other:?}"),
        }
        assert_eq!(report.reduction.decoupled_rows, vec![0]);
        assert!(!report.diagnostics.is_empty());
    }

    #[test]
    fn analyze_uses_p1_closed_form_past_budget() {
        // p = 1, Q = 0, coupling row x^3 with regularity 1: the reduction
        // budget (order 2) exhausts, the closed form still answers
        let mut coupling: Vec<Vec<Poly<Q>>> = vec![vec![Poly::zero(); 3]; 3];
        coupling[2][1] = Poly::from_ints(&[0, 0, 0, 1]);
        let spec = SystemSpec {
            m: 2,
            p: 1,
            lambda: vec![
                Poly::from_ints(&[-2]),
                Poly::from_ints(&[-1]),
                Poly::from_ints(&[1]),
            ],
            coupling,
            boundary: vec![vec![qi(0), qi(0)]],
            regularity: 1,
        };
        let vs = spec.validate().unwrap();
        let report = analyze(&vs).unwrap();
        assert!(matches!(
            report.reduction.outcome,
            ReductionOutcome::PartialAt(0)
        ));
        // closed form: c = 2 (1-based), T_inf = max{T_3 + T_2, T_2} = 2
        assert_eq!(report.tinf, TinfValue::Exact(qi(2)));
    }
}
