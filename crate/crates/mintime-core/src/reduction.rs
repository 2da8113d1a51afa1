//! Iterative row reduction of the boundary coupling matrix.
//!
//! Row by row, a dependent boundary row is traded for derivatives of its
//! boundary-trace coupling: combine the row to zero with the finalized rows
//! above it, then differentiate along the characteristic flow. The level
//! sequence obeys the recurrence
//!
//!   W^1 = G_k + a^0 Gz,    W^{l+1} = Dk(W^l) + a^l Gz,
//!
//! where Gz stacks the earlier rows composed with the characteristic
//! matching functions, and omega^l = W^l(0). The first level whose value is
//! independent of the rows above replaces the boundary row; each derivative
//! costs one order of the jet budget.

use crate::error::Result;
use crate::kernel::{diagonal_removal, g_row_jet, KernelOriginJets};
use crate::linalg::{rank, solve_dependency, Mat};
use crate::model::{Jet, Poly, Scalar, Validated};
use crate::transport::zeta_jet;

/// The first-order operator lambda_{m+k} d/dx applied entrywise to a row of
/// jets; each application costs one jet order.
#[derive(Debug, Clone)]
pub struct DkOperator<T> {
    lam: Poly<T>,
}

impl<T: Scalar> DkOperator<T> {
    /// Operator for the k-th positive row (0-based).
    pub fn new(vs: &Validated<T>, k: usize) -> Self {
        DkOperator {
            lam: vs.lambda[vs.m + k].clone(),
        }
    }

    /// Build directly from a speed polynomial.
    pub fn from_poly(lam: Poly<T>) -> Self {
        DkOperator { lam }
    }

    /// Entrywise lambda * d/dx; None when the row's jet order is spent.
    pub fn apply(&self, row: &[Jet<T>]) -> Option<Vec<Jet<T>>> {
        row.iter()
            .map(|entry| {
                let d = entry.derive()?;
                let lam_jet = self.lam.to_jet(d.order());
                Some(lam_jet.mul(&d))
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepOutcome {
    /// The row (possibly after replacement) is independent of the rows
    /// above it.
    Independent,
    /// The jet budget ran out before independence was reached.
    Exhausted,
}

/// Trace record for one processed row.
#[derive(Debug, Clone)]
pub struct ReductionStep<T> {
    /// Row index k, 0-based.
    pub row: usize,
    /// Whether the boundary row was replaced by a derived one.
    pub replaced: bool,
    /// s = number of dependent levels beyond the initial row.
    pub derivative_iterations: usize,
    /// a^0..a^s, each of length k.
    pub a_vectors: Vec<Vec<T>>,
    /// omega^0..omega^{s+1} (gamma levels for the first row).
    pub omegas: Vec<Vec<T>>,
    pub outcome: StepOutcome,
    /// Derivative budget consumed: s + 1 on replacement, 0 otherwise.
    pub consumed: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReductionOutcome {
    /// The first min(p, m) rows were made linearly independent.
    Complete,
    /// Only rows 0..k0 are finalized; row k0 exhausted the budget.
    PartialAt(usize),
}

#[derive(Debug, Clone)]
pub struct ReductionResult<T> {
    /// Final boundary rows (replaced rows included). On exhaustion the
    /// offending row keeps its original value.
    pub q_rows: Mat<T>,
    pub trace: Vec<ReductionStep<T>>,
    pub outcome: ReductionOutcome,
    /// Positive rows whose internal coupling row is identically zero while
    /// their boundary row stayed dependent (0-based).
    pub decoupled_rows: Vec<usize>,
}

impl<T: Scalar> ReductionResult<T> {
    pub fn is_complete(&self) -> bool {
        matches!(self.outcome, ReductionOutcome::Complete)
    }
}

/// A G row is materialized from the kernel recursion on first use.
enum GRow<T> {
    Lazy,
    Ready(Vec<Jet<T>>),
}

struct ReductionState<'a, T: Scalar> {
    vs: &'a Validated<T>,
    kjets: KernelOriginJets<T>,
    q: Mat<T>,
    g: Vec<GRow<T>>,
    trace: Vec<ReductionStep<T>>,
    decoupled: Vec<usize>,
}

impl<'a, T: Scalar> ReductionState<'a, T> {
    fn new(vs: &'a Validated<T>) -> Result<Self> {
        let m0 = diagonal_removal(vs)?;
        let fdiag = KernelOriginJets::zero_fdiag(vs);
        let kjets = KernelOriginJets::new(vs, &m0, &fdiag)?;
        Ok(ReductionState {
            vs,
            kjets,
            q: Mat::from_rows(vs.boundary.clone()),
            g: (0..vs.p).map(|_| GRow::Lazy).collect(),
            trace: Vec::new(),
            decoupled: Vec::new(),
        })
    }

    fn materialize(&mut self, j: usize) -> Result<()> {
        if matches!(self.g[j], GRow::Lazy) {
            let row = g_row_jet(self.vs, &mut self.kjets, j, self.vs.base_order())?;
            self.g[j] = GRow::Ready(row);
        }
        Ok(())
    }

    fn row_jets(&self, j: usize) -> Option<&Vec<Jet<T>>> {
        match &self.g[j] {
            GRow::Ready(row) => Some(row),
            _ => None,
        }
    }

    /// Earlier rows composed with the characteristic matching functions:
    /// entry i holds the jets of G_i(zeta_{k,i}(x)), or None for a spent
    /// row.
    fn composed_rows(&mut self, k: usize) -> Result<Vec<Vec<Jet<T>>>> {
        let mut out = Vec::with_capacity(k);
        for i in 0..k {
            self.materialize(i)?;
            let composed = match &self.g[i] {
                GRow::Ready(row) => {
                    let order = row.iter().map(|j| j.order()).min().unwrap_or(0);
                    let zeta = zeta_jet(self.vs, k, i, order)?;
                    let mut entries = Vec::with_capacity(row.len());
                    for jet in row {
                        entries.push(jet.compose(&zeta)?);
                    }
                    entries
                }
                GRow::Lazy => unreachable!("materialized above"),
            };
            out.push(composed);
        }
        Ok(out)
    }

    /// True when the internal coupling row feeding positive row k has no
    /// off-diagonal entries (its diagonal is removed by the scaling).
    fn coupling_row_is_zero(&self, k: usize) -> bool {
        let alpha = self.vs.m + k;
        self.vs.coupling[alpha]
            .iter()
            .enumerate()
            .all(|(beta, poly)| beta == alpha || poly.is_zero())
    }

    fn record_exhausted(
        &mut self,
        k: usize,
        a_vectors: Vec<Vec<T>>,
        omegas: Vec<Vec<T>>,
        iterations: usize,
    ) {
        if self.coupling_row_is_zero(k) {
            self.decoupled.push(k);
        }
        self.trace.push(ReductionStep {
            row: k,
            replaced: false,
            derivative_iterations: iterations,
            a_vectors,
            omegas,
            outcome: StepOutcome::Exhausted,
            consumed: 0,
        });
    }
}

/// Add a coefficient combination of the composed rows onto a jet row,
/// skipping zero coefficients so low-order rows that do not participate
/// cannot bound the result's order.
fn add_combination<T: Scalar>(
    base: Vec<Jet<T>>,
    coeffs: &[T],
    composed: &[Vec<Jet<T>>],
) -> Vec<Jet<T>> {
    let mut acc = base;
    for (i, c) in coeffs.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        for (entry, add) in acc.iter_mut().zip(composed[i].iter()) {
            *entry = entry.add(&add.scale(c));
        }
    }
    acc
}

fn value_at_zero<T: Scalar>(row: &[Jet<T>]) -> Vec<T> {
    row.iter().map(|j| j.eval_zero()).collect()
}

/// Gamma level for the first row: raw derivatives G_1^{(l-1)}(0).
fn gamma_level<T: Scalar>(row: &[Jet<T>], l: usize) -> Option<Vec<T>> {
    row.iter().map(|j| j.raw_derivative(l - 1)).collect()
}

/// Process row k: either it is already independent of the finalized rows
/// above, or iterate the combine-and-differentiate loop until independence
/// or exhaustion.
fn reduce_row<T: Scalar>(state: &mut ReductionState<'_, T>, k: usize) -> Result<StepOutcome> {
    let tol = state.vs.tol().clone();
    let stack = state.q.leading_rows(k);
    let candidate = state.q.row_vec(k);

    let with_candidate = |row: &[T]| {
        let mut rows = stack.to_rows();
        rows.push(row.to_vec());
        Mat::from_rows(rows)
    };
    if rank(&with_candidate(&candidate), &tol) == k + 1 {
        state.trace.push(ReductionStep {
            row: k,
            replaced: false,
            derivative_iterations: 0,
            a_vectors: Vec::new(),
            omegas: vec![candidate],
            outcome: StepOutcome::Independent,
            consumed: 0,
        });
        return Ok(StepOutcome::Independent);
    }

    // dependent path
    let mut a_vectors: Vec<Vec<T>> = Vec::new();
    let mut omegas: Vec<Vec<T>> = vec![candidate.clone()];

    let Some(a0) = solve_dependency(&stack, &candidate, &tol) else {
        state.record_exhausted(k, a_vectors, omegas, 0);
        return Ok(StepOutcome::Exhausted);
    };
    a_vectors.push(a0);

    state.materialize(k)?;
    let composed = state.composed_rows(k)?;
    let own = state
        .row_jets(k)
        .cloned()
        .expect("own row materialized above");

    let dk = DkOperator::new(state.vs, k);
    // W^1 = G_k + a^0 Gz
    let mut w = add_combination(own, &a_vectors[0], &composed);
    let first_row_gamma = k == 0;
    let mut level = 1usize;
    loop {
        let omega_l = value_at_zero(&w);
        if first_row_gamma {
            // record raw derivatives of the first G row for the trace; the
            // tested and stored row value stays omega^l = W^l(0)
            match state.row_jets(0).and_then(|row| gamma_level(row, level)) {
                Some(g) => omegas.push(g),
                None => omegas.push(omega_l.clone()),
            }
        } else {
            omegas.push(omega_l.clone());
        }

        if rank(&with_candidate(&omega_l), &tol) == k + 1 {
            // independence reached at level l = s + 1. The replacement row
            // also needs one more derivative for its own coupling row, so
            // a level that consumed the whole jet order cannot be applied.
            let s = level - 1;
            let Some(next) = dk.apply(&w) else {
                state.record_exhausted(k, a_vectors, omegas, level);
                return Ok(StepOutcome::Exhausted);
            };
            state.q.set_row(k, &omega_l);
            state.g[k] = GRow::Ready(next);
            state.trace.push(ReductionStep {
                row: k,
                replaced: true,
                derivative_iterations: s,
                a_vectors,
                omegas,
                outcome: StepOutcome::Independent,
                consumed: s + 1,
            });
            return Ok(StepOutcome::Independent);
        }

        let Some(al) = solve_dependency(&stack, &omega_l, &tol) else {
            state.record_exhausted(k, a_vectors, omegas, level);
            return Ok(StepOutcome::Exhausted);
        };
        a_vectors.push(al);

        // W^{l+1} = Dk(W^l) + a^l Gz
        let Some(derived) = dk.apply(&w) else {
            state.record_exhausted(k, a_vectors, omegas, level);
            return Ok(StepOutcome::Exhausted);
        };
        w = add_combination(derived, a_vectors.last().unwrap(), &composed);
        level += 1;
    }
}

/// Drive the full reduction over rows 0..min(p, m).
pub fn run_reduction<T: Scalar>(vs: &Validated<T>) -> Result<ReductionResult<T>> {
    let mut state = ReductionState::new(vs)?;
    let nmin = vs.nmin();
    let mut outcome = ReductionOutcome::Complete;
    for k in 0..nmin {
        match reduce_row(&mut state, k)? {
            StepOutcome::Independent => {}
            StepOutcome::Exhausted => {
                outcome = ReductionOutcome::PartialAt(k);
                break;
            }
        }
    }
    Ok(ReductionResult {
        q_rows: state.q,
        trace: state.trace,
        outcome,
        decoupled_rows: state.decoupled,
    })
}
