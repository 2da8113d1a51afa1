//! Origin jets of the backstepping kernel rows and of the boundary-trace
//! coupling G, computed through an invertible linear recursion level by
//! level. The kernel PDE is never solved globally: all quantities live at
//! the corner (x, xi) = (0, 0).

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::model::scalar::binomial;
use crate::model::{Jet, Scalar, Validated};

/// Jets at 0 of the zero-diagonal coupling matrix M0 = (D M + Lambda D') D^-1
/// together with the diagonal scaling D itself.
#[derive(Debug, Clone)]
pub struct MZeroJets<T> {
    /// n x n entry jets at order r + 1; the diagonal is identically zero.
    pub entries: Vec<Vec<Jet<T>>>,
    /// Diagonal scaling jets d_k = exp(-int m_kk / lambda_k), order r + 2.
    pub d: Vec<Jet<T>>,
}

impl<T: Scalar> MZeroJets<T> {
    /// Constant term matrix M0(0).
    pub fn at_zero(&self) -> Mat<T> {
        let n = self.entries.len();
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                *m.get_mut(i, j) = self.entries[i][j].eval_zero();
            }
        }
        m
    }
}

/// Removes the diagonal of the internal coupling by the exponential
/// diagonal scaling. The diagonal of the result vanishes identically, so
/// it is stored as the zero jet; the off-diagonal entries follow the
/// scaling formula d_a m_ab / d_b.
pub fn diagonal_removal<T: Scalar>(vs: &Validated<T>) -> Result<MZeroJets<T>> {
    let n = vs.n();
    let order = vs.base_order();
    let mut d = Vec::with_capacity(n);
    for k in 0..n {
        let ratio = vs.coupling[k][k]
            .to_jet(order)
            .div(&vs.lambda[k].to_jet(order))?;
        d.push(ratio.integrate().neg().exp()?);
    }
    let mut entries = Vec::with_capacity(n);
    for a in 0..n {
        let mut row = Vec::with_capacity(n);
        for b in 0..n {
            if a == b {
                row.push(Jet::zero(order));
            } else {
                let scaled = d[a].mul(&vs.coupling[a][b].to_jet(order)).div(&d[b])?;
                row.push(scaled);
            }
        }
        entries.push(row);
    }
    Ok(MZeroJets { entries, d })
}

/// The bidiagonal-plus-closure matrix J^(N) coupling the order-N mixed
/// partials of one kernel entry. Rows 1..N pair lam_a with lam_b on the
/// superdiagonal; the last row closes the system with the differentiated
/// boundary condition: binomials along the diagonal trace for b != a, the
/// first unit vector for b = a.
pub fn j_matrix<T: Scalar>(n_level: usize, lam_a: &T, lam_b: &T, same: bool) -> Mat<T> {
    let size = n_level + 1;
    let mut j = Mat::zeros(size, size);
    for l in 0..n_level {
        *j.get_mut(l, l) = lam_a.clone();
        *j.get_mut(l, l + 1) = lam_b.clone();
    }
    if same {
        *j.get_mut(n_level, 0) = T::one();
    } else {
        for c in 0..size {
            *j.get_mut(n_level, c) = binomial(n_level, c);
        }
    }
    j
}

/// Closed-form inverse of J^(N): the first row comes from the explicit
/// coefficient formula (or the last unit vector on the diagonal case),
/// subsequent rows from the two-term recursion.
pub fn j_matrix_inverse<T: Scalar>(
    n_level: usize,
    lam_a: &T,
    lam_b: &T,
    same: bool,
) -> Result<Mat<T>> {
    assert!(
        !lam_a.is_zero() && !lam_b.is_zero(),
        "speeds must be nonzero"
    );
    if !same && lam_a == lam_b {
        return Err(Error::DegenerateSpeeds);
    }
    let size = n_level + 1;
    let mut inv = Mat::zeros(size, size);
    if same {
        *inv.get_mut(0, size - 1) = T::one();
    } else {
        let q = lam_a.clone() / lam_b.clone();
        let base = T::one() - q.clone();
        let mut pow = T::one();
        for _ in 0..n_level {
            pow *= base.clone();
        }
        let a_last = T::one() / pow;
        *inv.get_mut(0, size - 1) = a_last.clone();
        for i in 1..=n_level {
            // a_i = -(1/lam_b) a_{N+1} sum_{j=0}^{N-i} C(N, i+j) (-q)^j
            let mut sum = T::zero();
            let mut q_pow = T::one();
            for jj in 0..=(n_level - i) {
                sum += binomial::<T>(n_level, i + jj) * q_pow.clone();
                q_pow *= -q.clone();
            }
            *inv.get_mut(0, i - 1) = -(T::one() / lam_b.clone()) * a_last.clone() * sum;
        }
    }
    let ratio = lam_a.clone() / lam_b.clone();
    for l in 1..size {
        for c in 0..size {
            let mut v = -ratio.clone() * inv.get(l - 1, c).clone();
            if c == l - 1 {
                v += T::one() / lam_b.clone();
            }
            *inv.get_mut(l, c) = v;
        }
    }
    Ok(inv)
}

/// E^(N)_sigma = diag(C(i, sigma)) for i = sigma..N-1.
fn binom_diag<T: Scalar>(n_level: usize, sigma: usize) -> Vec<T> {
    (sigma..n_level).map(|i| binomial(i, sigma)).collect()
}

/// E-check^(N)_sigma = diag(C(N - i, sigma)) for i = 1..N-sigma.
fn binom_diag_check<T: Scalar>(n_level: usize, sigma: usize) -> Vec<T> {
    (1..=n_level - sigma)
        .map(|i| binomial(n_level - i, sigma))
        .collect()
}

/// R^(N)_sigma: N x (N - sigma), zero block over E^(N)_sigma.
pub fn selector_r<T: Scalar>(n_level: usize, sigma: usize) -> Mat<T> {
    let diag = binom_diag::<T>(n_level, sigma);
    let mut m = Mat::zeros(n_level, n_level - sigma);
    for (k, v) in diag.into_iter().enumerate() {
        *m.get_mut(sigma + k, k) = v;
    }
    m
}

/// S-check^(N)_sigma: N x (N - sigma + 1), E-check in the top-left corner.
pub fn selector_s_check<T: Scalar>(n_level: usize, sigma: usize) -> Mat<T> {
    let diag = binom_diag_check::<T>(n_level, sigma);
    let mut m = Mat::zeros(n_level, n_level - sigma + 1);
    for (k, v) in diag.into_iter().enumerate() {
        *m.get_mut(k, k) = v;
    }
    m
}

/// S^(N)_sigma: N x (N - sigma + 1), E in the bottom-right corner.
pub fn selector_s<T: Scalar>(n_level: usize, sigma: usize) -> Mat<T> {
    let diag = binom_diag::<T>(n_level, sigma);
    let mut m = Mat::zeros(n_level, n_level - sigma + 1);
    for (k, v) in diag.into_iter().enumerate() {
        *m.get_mut(sigma + k, 1 + k) = v;
    }
    m
}

/// Stacked mixed partials (D^N K_alpha)(0, 0) for the rows alpha = m..n-1
/// that feed G, extended lazily level by level and capped at r + 1.
///
/// levels[alpha - m][N] is the (N+1) x n matrix whose row l holds
/// d^N / dx^(N-l) dxi^l of the kernel row at the origin.
#[derive(Debug, Clone)]
pub struct KernelOriginJets<T> {
    n: usize,
    m: usize,
    cap: usize,
    lam0: Vec<T>,
    /// lam_derivs[sigma][i] = lambda_i^(sigma)(0).
    lam_derivs: Vec<Vec<T>>,
    /// a_derivs[sigma] = A^(sigma)(0) with A = Lambda' + M0.
    a_derivs: Vec<Mat<T>>,
    /// f jets for the housed rows: f[alpha - m][beta].
    f: Vec<Vec<Jet<T>>>,
    levels: Vec<Vec<Mat<T>>>,
}

impl<T: Scalar> KernelOriginJets<T> {
    /// Build the recursion state from the zero-diagonal coupling jets and
    /// the diagonal boundary data f_alpha_alpha (one jet per housed row,
    /// indexed alpha - m; shorter jets are padded with zeros).
    pub fn new(vs: &Validated<T>, m0: &MZeroJets<T>, fdiag: &[Jet<T>]) -> Result<Self> {
        let n = vs.n();
        let m = vs.m;
        let cap = vs.base_order();
        if fdiag.len() != vs.p {
            return Err(Error::DimensionMismatch(format!(
                "expected {} diagonal boundary jets, got {}",
                vs.p,
                fdiag.len()
            )));
        }
        let lam0: Vec<T> = (0..n).map(|i| vs.lambda_at_zero(i)).collect();
        let mut lam_derivs = Vec::with_capacity(cap + 1);
        let mut current: Vec<_> = vs.lambda.clone();
        for _sigma in 0..=cap {
            lam_derivs.push(current.iter().map(|p| p.eval_zero()).collect::<Vec<T>>());
            current = current.iter().map(|p| p.derivative()).collect();
        }
        // A = Lambda' + M0 as derivative matrices at 0
        let mut a_derivs = Vec::with_capacity(cap);
        for sigma in 0..cap {
            let mut a_mat = Mat::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    let m0_part = m0.entries[i][j]
                        .raw_derivative(sigma)
                        .expect("M0 jets cover order cap");
                    let lam_part = if i == j {
                        lam_derivs[sigma + 1][i].clone()
                    } else {
                        T::zero()
                    };
                    *a_mat.get_mut(i, j) = m0_part + lam_part;
                }
            }
            a_derivs.push(a_mat);
        }
        // f rows for alpha = m..n-1
        let mut f = Vec::with_capacity(vs.p);
        for alpha in m..n {
            let mut row = Vec::with_capacity(n);
            for beta in 0..n {
                if beta == alpha {
                    let given = &fdiag[alpha - m];
                    let coeffs = (0..=cap)
                        .map(|l| {
                            if l <= given.order() {
                                given.coeff(l).clone()
                            } else {
                                T::zero()
                            }
                        })
                        .collect();
                    row.push(Jet::new(coeffs));
                } else {
                    let denom = vs.lambda[alpha].sub(&vs.lambda[beta]).to_jet(cap);
                    row.push(m0.entries[alpha][beta].div(&denom)?);
                }
            }
            f.push(row);
        }
        // level 0: k_{alpha beta}(0,0) = f_{alpha beta}(0)
        let levels = (m..n)
            .map(|alpha| {
                let mut l0 = Mat::zeros(1, n);
                for beta in 0..n {
                    *l0.get_mut(0, beta) = f[alpha - m][beta].eval_zero();
                }
                vec![l0]
            })
            .collect();
        Ok(KernelOriginJets {
            n,
            m,
            cap,
            lam0,
            lam_derivs,
            a_derivs,
            f,
            levels,
        })
    }

    /// Zero diagonal boundary data (the canonical normalization).
    pub fn zero_fdiag(vs: &Validated<T>) -> Vec<Jet<T>> {
        vec![Jet::zero(vs.base_order()); vs.p]
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn computed_order(&self, alpha: usize) -> usize {
        self.levels[alpha - self.m].len() - 1
    }

    /// Extend the recursion for row alpha (global index) up to level upto.
    pub fn ensure(&mut self, alpha: usize, upto: usize) -> Result<()> {
        if upto > self.cap {
            return Err(Error::OrderExceeded {
                requested: upto,
                cap: self.cap,
            });
        }
        while self.computed_order(alpha) < upto {
            let next = self.computed_order(alpha) + 1;
            let level = self.compute_level(alpha, next)?;
            self.levels[alpha - self.m].push(level);
        }
        Ok(())
    }

    /// The (N+1) x n stack for row alpha; must be ensured first.
    pub fn level(&self, alpha: usize, n_level: usize) -> &Mat<T> {
        &self.levels[alpha - self.m][n_level]
    }

    /// Assemble Phi and solve the level-N system column by column.
    fn compute_level(&self, alpha: usize, n_level: usize) -> Result<Mat<T>> {
        let phi = self.phi(alpha, n_level);
        let mut out = Mat::zeros(n_level + 1, self.n);
        for beta in 0..self.n {
            let jinv =
                j_matrix_inverse(n_level, &self.lam0[alpha], &self.lam0[beta], beta == alpha)?;
            let col = phi.column(beta);
            for r in 0..=n_level {
                let mut acc = T::zero();
                for c in 0..=n_level {
                    acc += jinv.get(r, c).clone() * col[c].clone();
                }
                *out.get_mut(r, beta) = acc;
            }
        }
        Ok(out)
    }

    /// The right-hand side Phi^(N) for row alpha: three selector sums over
    /// the lower levels, then the differentiated boundary data as the last
    /// row.
    fn phi(&self, alpha: usize, n_level: usize) -> Mat<T> {
        let row_levels = &self.levels[alpha - self.m];
        let mut bar = Mat::zeros(n_level, self.n);
        for sigma in 0..n_level {
            let term = selector_r::<T>(n_level, sigma)
                .matmul(&row_levels[n_level - 1 - sigma])
                .matmul(&self.a_derivs[sigma]);
            bar = bar.sub(&term);
        }
        for sigma in 1..n_level {
            let term = selector_s_check::<T>(n_level, sigma)
                .matmul(&row_levels[n_level - sigma])
                .scale(&self.lam_derivs[sigma][alpha]);
            bar = bar.sub(&term);
        }
        for sigma in 1..n_level {
            let mut term = selector_s::<T>(n_level, sigma).matmul(&row_levels[n_level - sigma]);
            for r in 0..n_level {
                for beta in 0..self.n {
                    let v = term.get(r, beta).clone() * self.lam_derivs[sigma][beta].clone();
                    *term.get_mut(r, beta) = v;
                }
            }
            bar = bar.sub(&term);
        }
        let mut phi = Mat::zeros(n_level + 1, self.n);
        for r in 0..n_level {
            phi.set_row(r, bar.row(r));
        }
        let f_row: Vec<T> = (0..self.n)
            .map(|beta| {
                self.f[alpha - self.m][beta]
                    .raw_derivative(n_level)
                    .expect("f jets cover order cap")
            })
            .collect();
        phi.set_row(n_level, &f_row);
        phi
    }

    /// Shortcut right-hand side valid when Lambda and M0 are constant:
    /// Phi^(N) = (-(D^{N-1} K_alpha) M0(0); 0). Cross-checked against the
    /// general assembly in tests.
    pub fn phi_constant_shortcut(
        &self,
        alpha: usize,
        n_level: usize,
        m0_at_zero: &Mat<T>,
    ) -> Mat<T> {
        let prev = &self.levels[alpha - self.m][n_level - 1];
        let top = prev.matmul(m0_at_zero).scale(&-T::one());
        let mut phi = Mat::zeros(n_level + 1, self.n);
        for r in 0..n_level {
            phi.set_row(r, top.row(r));
        }
        phi
    }

    /// General right-hand side, exposed for the constant-coefficient
    /// cross-check.
    pub fn phi_general(&self, alpha: usize, n_level: usize) -> Mat<T> {
        self.phi(alpha, n_level)
    }
}

/// B = -Lambda(0) (Id_m over Q): the input matrix mapping boundary traces
/// of the negative components into the G coupling.
pub fn boundary_input_matrix<T: Scalar>(vs: &Validated<T>) -> Mat<T> {
    let mut b = Mat::zeros(vs.n(), vs.m);
    for i in 0..vs.m {
        *b.get_mut(i, i) = -vs.lambda_at_zero(i);
    }
    for j in 0..vs.p {
        let scale = -vs.lambda_at_zero(vs.m + j);
        for c in 0..vs.m {
            *b.get_mut(vs.m + j, c) = scale.clone() * vs.boundary[j][c].clone();
        }
    }
    b
}

/// Jets at 0 of the rows of G restricted to the last p rows (the only ones
/// the minimal time depends on). rows[j][c] is the jet of entry c of row j.
#[derive(Debug, Clone)]
pub struct GRowJets<T> {
    pub rows: Vec<Vec<Jet<T>>>,
}

/// Jet of one G row to the requested order: coefficient N is the x-partial
/// stack row of level N times B, divided by N factorial.
pub fn g_row_jet<T: Scalar>(
    vs: &Validated<T>,
    kjets: &mut KernelOriginJets<T>,
    j: usize,
    order: usize,
) -> Result<Vec<Jet<T>>> {
    let alpha = vs.m + j;
    kjets.ensure(alpha, order)?;
    let b = boundary_input_matrix(vs);
    let mut per_col: Vec<Vec<T>> = vec![Vec::with_capacity(order + 1); vs.m];
    let mut fact = T::one();
    for n_level in 0..=order {
        if n_level > 1 {
            fact *= T::from_int(n_level as i64);
        }
        let dx_row = kjets.level(alpha, n_level).row_vec(0);
        let g_n = b.row_mul(&dx_row);
        for (c, v) in g_n.into_iter().enumerate() {
            per_col[c].push(v / fact.clone());
        }
    }
    Ok(per_col.into_iter().map(Jet::new).collect())
}

/// All G rows at one order.
pub fn g_row_jets<T: Scalar>(
    vs: &Validated<T>,
    kjets: &mut KernelOriginJets<T>,
    order: usize,
) -> Result<GRowJets<T>> {
    let rows = (0..vs.p)
        .map(|j| g_row_jet(vs, kjets, j, order))
        .collect::<Result<Vec<_>>>()?;
    Ok(GRowJets { rows })
}
