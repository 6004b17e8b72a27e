//! State-space models, block-diagonal composition, and static interconnections.
//!
//! A [`StateSpaceModel`] realizes a proper LTI transfer matrix
//! `G(s) = C (sI - A)^{-1} B + D` with real matrices. An
//! [`InterconnectedSystem`] couples `k` subsystem models through a partitioned
//! static matrix `K = [[K11, K12], [K21, K22]]` mapping the stacked subsystem
//! outputs `y_b` and the external input `u_c` to the stacked subsystem inputs
//! `u_b` and the external output `y_c`. Closing that loop ([`lft_close`]) is an
//! upper linear fractional transformation of the block-diagonal model and `K`.
//!
//! Models are immutable after construction and all operations return new
//! values, so everything here is safe to share across parallel per-frequency
//! workers.

use nalgebra::linalg::Schur;
use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Cast a real matrix to complex entries.
pub(crate) fn complexify(m: &DMatrix<f64>) -> DMatrix<Complex64> {
    m.map(|x| Complex64::new(x, 0.0))
}

/// QR iteration cap for Schur decompositions. The unbounded nalgebra variants
/// (`.schur()`, `.complex_eigenvalues()`) can spin forever on structured
/// matrices, so every eigenvalue computation in this crate goes through a
/// bounded `try_new` and surfaces non-convergence as an error.
pub(crate) fn schur_iteration_cap(n: usize) -> usize {
    40 * n + 1024
}

/// Balance a matrix in place by a diagonal similarity with power-of-two
/// entries (Parlett–Reinsch). Equalizing row and column norms can shrink the
/// backward error of the QR iteration by many orders of magnitude on badly
/// scaled matrices (e.g. cascade realizations mixing slow and fast sections),
/// and scaling by exact powers of two introduces no rounding, so the
/// eigenvalues of the balanced matrix are exactly those of the original.
fn balance_in_place(a: &mut DMatrix<f64>) {
    const RADIX: f64 = 2.0;
    let n = a.nrows();
    let mut converged = false;
    while !converged {
        converged = true;
        for i in 0..n {
            let mut row = 0.0;
            let mut col = 0.0;
            for j in 0..n {
                if j != i {
                    row += a[(i, j)].abs();
                    col += a[(j, i)].abs();
                }
            }
            if row == 0.0 || col == 0.0 || !(row.is_finite() && col.is_finite()) {
                continue;
            }
            let total = row + col;
            let mut f = 1.0;
            let mut c = col;
            let mut r = row;
            while c < r / RADIX {
                f *= RADIX;
                c *= RADIX;
                r /= RADIX;
            }
            while c >= r * RADIX {
                f /= RADIX;
                c /= RADIX;
                r *= RADIX;
            }
            if c + r < 0.95 * total {
                converged = false;
                for j in 0..n {
                    a[(i, j)] /= f;
                }
                for j in 0..n {
                    a[(j, i)] *= f;
                }
            }
        }
    }
}

/// All eigenvalues of a real square matrix via a bounded Schur decomposition.
///
/// The matrix is balanced first, which costs O(n^2) per sweep and makes the
/// result reliable for matrices whose entries span many orders of magnitude.
pub fn eigenvalues_bounded(a: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    if a.nrows() != a.ncols() {
        return Err(Error::Dimension(format!(
            "eigenvalues need a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if a.nrows() == 0 {
        return Ok(Vec::new());
    }
    let mut balanced = a.clone();
    balance_in_place(&mut balanced);
    let schur = Schur::try_new(balanced, f64::EPSILON, schur_iteration_cap(a.nrows()))
        .ok_or_else(|| Error::Numerical("Schur QR iteration did not converge".into()))?;
    Ok(schur.complex_eigenvalues().iter().copied().collect())
}

/// Largest real part of the eigenvalues of `a` (`-inf` for empty matrices).
pub fn spectral_abscissa(a: &DMatrix<f64>) -> Result<f64> {
    Ok(eigenvalues_bounded(a)?
        .iter()
        .map(|l| l.re)
        .fold(f64::NEG_INFINITY, f64::max))
}

/// A real state-space realization (A, B, C, D) of a proper LTI system.
///
/// Dimensions: `A` is n×n, `B` n×m, `C` p×n, `D` p×m; consistency is enforced
/// at construction and the matrices are immutable afterwards.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpaceModel {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    c: DMatrix<f64>,
    d: DMatrix<f64>,
}

impl StateSpaceModel {
    /// Build a model, validating dimension consistency.
    pub fn new(
        a: DMatrix<f64>,
        b: DMatrix<f64>,
        c: DMatrix<f64>,
        d: DMatrix<f64>,
    ) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::Dimension(format!(
                "A must be square, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        let (n, m, p) = (a.nrows(), b.ncols(), c.nrows());
        if b.nrows() != n || c.ncols() != n || d.nrows() != p || d.ncols() != m {
            return Err(Error::Dimension(format!(
                "inconsistent realization: A {}x{}, B {}x{}, C {}x{}, D {}x{}",
                a.nrows(),
                a.ncols(),
                b.nrows(),
                b.ncols(),
                c.nrows(),
                c.ncols(),
                d.nrows(),
                d.ncols()
            )));
        }
        Ok(Self { a, b, c, d })
    }

    /// A feedthrough-only model (no states), `G(s) = D`.
    pub fn static_gain(d: DMatrix<f64>) -> Self {
        let (p, m) = (d.nrows(), d.ncols());
        Self {
            a: DMatrix::zeros(0, 0),
            b: DMatrix::zeros(0, m),
            c: DMatrix::zeros(p, 0),
            d,
        }
    }

    /// Number of states.
    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    /// Number of inputs.
    pub fn m(&self) -> usize {
        self.b.ncols()
    }

    /// Number of outputs.
    pub fn p(&self) -> usize {
        self.c.nrows()
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn c(&self) -> &DMatrix<f64> {
        &self.c
    }

    pub fn d(&self) -> &DMatrix<f64> {
        &self.d
    }

    /// Frequency response `G(iω) = C (iωI - A)^{-1} B + D`.
    ///
    /// Evaluated with a dense complex LU solve per frequency; errors if `iω`
    /// coincides with a pole of the realization.
    pub fn freq_response(&self, omega: f64) -> Result<DMatrix<Complex64>> {
        let n = self.n();
        if n == 0 {
            return Ok(complexify(&self.d));
        }
        // iωI - A
        let mut m = complexify(&self.a);
        m.neg_mut();
        for k in 0..n {
            m[(k, k)] += Complex64::new(0.0, omega);
        }
        let lu = m.lu();
        let x = lu
            .solve(&complexify(&self.b))
            .ok_or(Error::PoleAtFrequency { omega })?;
        Ok(complexify(&self.c) * x + complexify(&self.d))
    }

    /// Stability flag plus the spectral abscissa max Re λ(A).
    ///
    /// `true` iff every eigenvalue of `A` has strictly negative real part;
    /// a state-less model is vacuously stable with abscissa `-inf`.
    pub fn stability_check(&self) -> Result<(bool, f64)> {
        let alpha = spectral_abscissa(&self.a)?;
        Ok((alpha < 0.0, alpha))
    }
}

/// Block-diagonal composition `diag(G_1, ..., G_k)` of state-space models.
///
/// The result stacks states, inputs, and outputs in list order; its frequency
/// response is the block-diagonal of the member responses at every ω.
pub fn block_diag(models: &[StateSpaceModel]) -> Result<StateSpaceModel> {
    if models.is_empty() {
        return Err(Error::Domain("block_diag of an empty model list".into()));
    }
    let n: usize = models.iter().map(|g| g.n()).sum();
    let m: usize = models.iter().map(|g| g.m()).sum();
    let p: usize = models.iter().map(|g| g.p()).sum();
    let mut a = DMatrix::zeros(n, n);
    let mut b = DMatrix::zeros(n, m);
    let mut c = DMatrix::zeros(p, n);
    let mut d = DMatrix::zeros(p, m);
    let (mut in_, mut im, mut ip) = (0, 0, 0);
    for g in models {
        a.view_mut((in_, in_), (g.n(), g.n())).copy_from(g.a());
        b.view_mut((in_, im), (g.n(), g.m())).copy_from(g.b());
        c.view_mut((ip, in_), (g.p(), g.n())).copy_from(g.c());
        d.view_mut((ip, im), (g.p(), g.m())).copy_from(g.d());
        in_ += g.n();
        im += g.m();
        ip += g.p();
    }
    StateSpaceModel::new(a, b, c, d)
}

/// Series composition `then ∘ g`: feed the output of `g` into `then`, so the
/// result realizes the product `G_then(s) · G_g(s)`.
pub fn series(g: &StateSpaceModel, then: &StateSpaceModel) -> Result<StateSpaceModel> {
    if then.m() != g.p() {
        return Err(Error::Dimension(format!(
            "series needs {} inputs downstream of {} outputs",
            then.m(),
            g.p()
        )));
    }
    let (ng, nt) = (g.n(), then.n());
    let mut a = DMatrix::zeros(ng + nt, ng + nt);
    a.view_mut((0, 0), (ng, ng)).copy_from(g.a());
    a.view_mut((ng, 0), (nt, ng)).copy_from(&(then.b() * g.c()));
    a.view_mut((ng, ng), (nt, nt)).copy_from(then.a());
    let mut b = DMatrix::zeros(ng + nt, g.m());
    b.view_mut((0, 0), (ng, g.m())).copy_from(g.b());
    b.view_mut((ng, 0), (nt, g.m())).copy_from(&(then.b() * g.d()));
    let mut c = DMatrix::zeros(then.p(), ng + nt);
    c.view_mut((0, 0), (then.p(), ng)).copy_from(&(then.d() * g.c()));
    c.view_mut((0, ng), (then.p(), nt)).copy_from(then.c());
    let d = then.d() * g.d();
    StateSpaceModel::new(a, b, c, d)
}

/// Parallel difference system `E = Ĝ - G` (same input, output subtracted).
///
/// `freq_response(E, ω) = freq_response(Ĝ, ω) - freq_response(G, ω)`; the
/// realization stacks both state vectors.
pub fn error_system(g: &StateSpaceModel, g_hat: &StateSpaceModel) -> Result<StateSpaceModel> {
    if g.m() != g_hat.m() || g.p() != g_hat.p() {
        return Err(Error::Dimension(format!(
            "error system needs matching i/o dimensions: {}x{} vs {}x{}",
            g.p(),
            g.m(),
            g_hat.p(),
            g_hat.m()
        )));
    }
    let (nh, ng) = (g_hat.n(), g.n());
    let mut a = DMatrix::zeros(nh + ng, nh + ng);
    a.view_mut((0, 0), (nh, nh)).copy_from(g_hat.a());
    a.view_mut((nh, nh), (ng, ng)).copy_from(g.a());
    let mut b = DMatrix::zeros(nh + ng, g.m());
    b.view_mut((0, 0), (nh, g.m())).copy_from(g_hat.b());
    b.view_mut((nh, 0), (ng, g.m())).copy_from(g.b());
    let mut c = DMatrix::zeros(g.p(), nh + ng);
    c.view_mut((0, 0), (g.p(), nh)).copy_from(g_hat.c());
    c.view_mut((0, nh), (g.p(), ng)).copy_from(&(-g.c()));
    let d = g_hat.d() - g.d();
    StateSpaceModel::new(a, b, c, d)
}

/// `k` subsystems coupled by a partitioned static interconnection matrix.
///
/// With `y_b` the stacked subsystem outputs and `u_c` the external input,
/// the loop is `u_b = K11 y_b + K12 u_c`, `y_c = K21 y_b + K22 u_c`.
/// Dimensions: `K11` is m_b×p_b, `K12` m_b×m_c, `K21` p_c×p_b, `K22` p_c×m_c,
/// where `m_b = Σ m_j`, `p_b = Σ p_j` over the subsystems.
#[derive(Debug, Clone)]
pub struct InterconnectedSystem {
    subsystems: Vec<StateSpaceModel>,
    k11: DMatrix<f64>,
    k12: DMatrix<f64>,
    k21: DMatrix<f64>,
    k22: DMatrix<f64>,
}

impl InterconnectedSystem {
    pub fn new(
        subsystems: Vec<StateSpaceModel>,
        k11: DMatrix<f64>,
        k12: DMatrix<f64>,
        k21: DMatrix<f64>,
        k22: DMatrix<f64>,
    ) -> Result<Self> {
        if subsystems.is_empty() {
            return Err(Error::Domain("interconnection needs at least one subsystem".into()));
        }
        let m_b: usize = subsystems.iter().map(|g| g.m()).sum();
        let p_b: usize = subsystems.iter().map(|g| g.p()).sum();
        if k11.nrows() != m_b || k11.ncols() != p_b {
            return Err(Error::Dimension(format!(
                "K11 must be {}x{}, got {}x{}",
                m_b,
                p_b,
                k11.nrows(),
                k11.ncols()
            )));
        }
        if k12.nrows() != m_b {
            return Err(Error::Dimension(format!(
                "K12 must have {} rows, got {}",
                m_b,
                k12.nrows()
            )));
        }
        if k21.ncols() != p_b {
            return Err(Error::Dimension(format!(
                "K21 must have {} columns, got {}",
                p_b,
                k21.ncols()
            )));
        }
        if k22.nrows() != k21.nrows() || k22.ncols() != k12.ncols() {
            return Err(Error::Dimension(format!(
                "K22 must be {}x{}, got {}x{}",
                k21.nrows(),
                k12.ncols(),
                k22.nrows(),
                k22.ncols()
            )));
        }
        Ok(Self {
            subsystems,
            k11,
            k12,
            k21,
            k22,
        })
    }

    pub fn subsystems(&self) -> &[StateSpaceModel] {
        &self.subsystems
    }

    /// Same interconnection matrix with the subsystem models replaced
    /// (e.g. by their reduced-order counterparts). The replacements must
    /// keep every subsystem's input/output dimensions.
    pub fn with_subsystems(&self, subsystems: Vec<StateSpaceModel>) -> Result<Self> {
        if subsystems.len() != self.subsystems.len() {
            return Err(Error::Dimension(format!(
                "expected {} subsystems, got {}",
                self.subsystems.len(),
                subsystems.len()
            )));
        }
        for (old, new) in self.subsystems.iter().zip(&subsystems) {
            if old.m() != new.m() || old.p() != new.p() {
                return Err(Error::Dimension(format!(
                    "replacement subsystem must be {}x{}, got {}x{}",
                    old.p(),
                    old.m(),
                    new.p(),
                    new.m()
                )));
            }
        }
        Self::new(
            subsystems,
            self.k11.clone(),
            self.k12.clone(),
            self.k21.clone(),
            self.k22.clone(),
        )
    }

    pub fn k11(&self) -> &DMatrix<f64> {
        &self.k11
    }

    pub fn k12(&self) -> &DMatrix<f64> {
        &self.k12
    }

    pub fn k21(&self) -> &DMatrix<f64> {
        &self.k21
    }

    pub fn k22(&self) -> &DMatrix<f64> {
        &self.k22
    }

    /// External input count.
    pub fn m_c(&self) -> usize {
        self.k12.ncols()
    }

    /// External output count.
    pub fn p_c(&self) -> usize {
        self.k21.nrows()
    }

    /// Stacked subsystem input count `m_b = Σ m_j`.
    pub fn m_b(&self) -> usize {
        self.k11.nrows()
    }

    /// Stacked subsystem output count `p_b = Σ p_j`.
    pub fn p_b(&self) -> usize {
        self.k11.ncols()
    }

    /// Per-subsystem channel dimensions `(m_j, p_j)` in stacking order.
    pub fn channel_dims(&self) -> Vec<(usize, usize)> {
        self.subsystems.iter().map(|g| (g.m(), g.p())).collect()
    }

    /// The block-diagonal model `G_b = diag(G_1, ..., G_k)`.
    pub fn block_model(&self) -> Result<StateSpaceModel> {
        block_diag(&self.subsystems)
    }

    /// Close the interconnection loop, returning a realization of
    /// `G_c(s) = K21 G_b(s) (I - K11 G_b(s))^{-1} K12 + K22`
    /// with state dimension `Σ n_j`.
    ///
    /// Errors with "ill-posed interconnection" when `I - K11 D_b` (equivalently
    /// `I - D_b K11`) is singular, i.e. the algebraic loop has no solution.
    pub fn lft_close(&self) -> Result<StateSpaceModel> {
        let gb = self.block_model()?;
        let p_b = gb.p();
        // y_b = C x + D u_b and u_b = K11 y_b + K12 u_c give
        // (I - D K11) y_b = C x + D K12 u_c.
        let loop_matrix = DMatrix::identity(p_b, p_b) - gb.d() * &self.k11;
        let lu = loop_matrix.lu();
        let r_c = lu.solve(gb.c()).ok_or(Error::IllPosed)?;
        let r_dk12 = lu.solve(&(gb.d() * &self.k12)).ok_or(Error::IllPosed)?;
        let a = gb.a() + gb.b() * &self.k11 * &r_c;
        let b = gb.b() * (&self.k11 * &r_dk12 + &self.k12);
        let c = &self.k21 * &r_c;
        let d = &self.k21 * &r_dk12 + &self.k22;
        StateSpaceModel::new(a, b, c, d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn first_order() -> StateSpaceModel {
        // G(s) = 1/(s+1)
        StateSpaceModel::new(
            DMatrix::from_element(1, 1, -1.0),
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::from_element(1, 1, 0.0),
        )
        .unwrap()
    }

    #[test]
    fn response_of_first_order_lag() {
        let g = first_order();
        let r0 = g.freq_response(0.0).unwrap();
        assert_relative_eq!(r0[(0, 0)].re, 1.0, max_relative = 1e-14);
        assert_relative_eq!(r0[(0, 0)].im, 0.0, epsilon = 1e-15);
        // 1/(1+i) = 0.5 - 0.5i
        let r1 = g.freq_response(1.0).unwrap();
        assert_relative_eq!(r1[(0, 0)].re, 0.5, max_relative = 1e-14);
        assert_relative_eq!(r1[(0, 0)].im, -0.5, max_relative = 1e-14);
    }

    #[test]
    fn response_of_static_model_is_feedthrough() {
        let d = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let g = StateSpaceModel::static_gain(d.clone());
        for omega in [0.0, 0.3, 100.0] {
            let r = g.freq_response(omega).unwrap();
            for i in 0..2 {
                for j in 0..3 {
                    assert_eq!(r[(i, j)], Complex64::new(d[(i, j)], 0.0));
                }
            }
        }
    }

    #[test]
    fn response_errors_on_pole() {
        // Integrator 1/s evaluated at ω = 0.
        let g = StateSpaceModel::new(
            DMatrix::from_element(1, 1, 0.0),
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::from_element(1, 1, 0.0),
        )
        .unwrap();
        assert!(matches!(
            g.freq_response(0.0),
            Err(Error::PoleAtFrequency { .. })
        ));
    }

    #[test]
    fn block_diag_of_singleton_is_identity_operation() {
        let g = first_order();
        let gb = block_diag(std::slice::from_ref(&g)).unwrap();
        assert_eq!(gb, g);
    }

    #[test]
    fn block_diag_stacks_dc_gains() {
        let g1 = first_order();
        // G2(s) = 3/(s+2), DC gain 1.5
        let g2 = StateSpaceModel::new(
            DMatrix::from_element(1, 1, -2.0),
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::from_element(1, 1, 3.0),
            DMatrix::from_element(1, 1, 0.0),
        )
        .unwrap();
        let gb = block_diag(&[g1, g2]).unwrap();
        assert_eq!((gb.p(), gb.m(), gb.n()), (2, 2, 2));
        let r = gb.freq_response(0.0).unwrap();
        assert_relative_eq!(r[(0, 0)].re, 1.0, max_relative = 1e-14);
        assert_relative_eq!(r[(1, 1)].re, 1.5, max_relative = 1e-14);
        assert_eq!(r[(0, 1)], Complex64::new(0.0, 0.0));
        assert_eq!(r[(1, 0)], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn block_diag_structure_is_block_diagonal() {
        let g1 = StateSpaceModel::new(
            DMatrix::identity(2, 2) * -1.0,
            DMatrix::from_element(2, 1, 1.0),
            DMatrix::from_element(1, 2, 1.0),
            DMatrix::zeros(1, 1),
        )
        .unwrap();
        let g2 = StateSpaceModel::new(
            DMatrix::identity(3, 3) * -2.0,
            DMatrix::from_element(3, 1, 1.0),
            DMatrix::from_element(1, 3, 1.0),
            DMatrix::zeros(1, 1),
        )
        .unwrap();
        let gb = block_diag(&[g1, g2]).unwrap();
        assert_eq!(gb.n(), 5);
        // off-diagonal coupling blocks must be exactly zero
        assert_eq!(gb.a().view((0, 2), (2, 3)).iter().all(|&x| x == 0.0), true);
        assert_eq!(gb.a().view((2, 0), (3, 2)).iter().all(|&x| x == 0.0), true);
    }

    #[test]
    fn block_diag_rejects_empty_list() {
        assert!(matches!(block_diag(&[]), Err(Error::Domain(_))));
    }

    #[test]
    fn error_system_of_identical_models_is_zero() {
        let g = first_order();
        let e = error_system(&g, &g).unwrap();
        for omega in [0.0, 0.5, 2.0, 10.0] {
            let r = e.freq_response(omega).unwrap();
            assert!(r[(0, 0)].norm() < 1e-15);
        }
    }

    #[test]
    fn error_system_subtracts_dc_gains() {
        let g = first_order();
        // DC gain 1.1
        let g_hat = StateSpaceModel::new(
            DMatrix::from_element(1, 1, -1.0),
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::from_element(1, 1, 1.1),
            DMatrix::from_element(1, 1, 0.0),
        )
        .unwrap();
        let e = error_system(&g, &g_hat).unwrap();
        let r = e.freq_response(0.0).unwrap();
        assert_relative_eq!(r[(0, 0)].re, 0.1, max_relative = 1e-12);
    }

    #[test]
    fn error_system_rejects_dimension_mismatch() {
        let g = first_order();
        let h = StateSpaceModel::static_gain(DMatrix::zeros(2, 1));
        assert!(matches!(error_system(&g, &h), Err(Error::Dimension(_))));
    }

    #[test]
    fn series_multiplies_responses() {
        // Two distinct lags: the cascade response must equal the product.
        let g = first_order();
        let h = StateSpaceModel::new(
            DMatrix::from_element(1, 1, -2.0),
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::from_element(1, 1, 3.0),
            DMatrix::from_element(1, 1, 0.5),
        )
        .unwrap();
        let cascade = series(&g, &h).unwrap();
        assert_eq!(cascade.n(), 2);
        for omega in [0.0, 0.3, 1.0, 7.0] {
            let product =
                h.freq_response(omega).unwrap()[(0, 0)] * g.freq_response(omega).unwrap()[(0, 0)];
            let r = cascade.freq_response(omega).unwrap()[(0, 0)];
            assert_relative_eq!(r.re, product.re, epsilon = 1e-12);
            assert_relative_eq!(r.im, product.im, epsilon = 1e-12);
        }
    }

    #[test]
    fn series_rejects_dimension_mismatch() {
        let g = first_order();
        let wide = StateSpaceModel::static_gain(DMatrix::zeros(1, 3));
        assert!(matches!(series(&g, &wide), Err(Error::Dimension(_))));
    }

    #[test]
    fn stability_check_examples() {
        let stable = first_order();
        let (ok, alpha) = stable.stability_check().unwrap();
        assert!(ok);
        assert_relative_eq!(alpha, -1.0, max_relative = 1e-12);

        // undamped oscillator: eigenvalues ±i
        let osc = StateSpaceModel::new(
            DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]),
            DMatrix::from_element(2, 1, 1.0),
            DMatrix::from_element(1, 2, 1.0),
            DMatrix::zeros(1, 1),
        )
        .unwrap();
        let (ok, alpha) = osc.stability_check().unwrap();
        assert!(!ok);
        assert!(alpha.abs() < 1e-14);

        let diag = StateSpaceModel::new(
            DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, -2.0]),
            DMatrix::from_element(2, 1, 1.0),
            DMatrix::from_element(1, 2, 1.0),
            DMatrix::zeros(1, 1),
        )
        .unwrap();
        let (ok, alpha) = diag.stability_check().unwrap();
        assert!(ok);
        assert_relative_eq!(alpha, -1.0, max_relative = 1e-12);
    }

    #[test]
    fn lft_close_passthrough() {
        // K11 = 0, K12 = K21 = I, K22 = 0 leaves G unchanged.
        let g = first_order();
        let sys = InterconnectedSystem::new(
            vec![g.clone()],
            DMatrix::zeros(1, 1),
            DMatrix::identity(1, 1),
            DMatrix::identity(1, 1),
            DMatrix::zeros(1, 1),
        )
        .unwrap();
        let gc = sys.lft_close().unwrap();
        for omega in [0.0, 1.0, 3.7] {
            let want = g.freq_response(omega).unwrap();
            let got = gc.freq_response(omega).unwrap();
            assert!((want - got).norm() < 1e-14);
        }
    }

    #[test]
    fn lft_close_unit_feedback_of_integrator() {
        // G_b = 1/s under unit negative feedback gives 1/(s+1).
        let integrator = StateSpaceModel::new(
            DMatrix::from_element(1, 1, 0.0),
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::from_element(1, 1, 0.0),
        )
        .unwrap();
        let sys = InterconnectedSystem::new(
            vec![integrator],
            DMatrix::from_element(1, 1, -1.0),
            DMatrix::identity(1, 1),
            DMatrix::identity(1, 1),
            DMatrix::zeros(1, 1),
        )
        .unwrap();
        let gc = sys.lft_close().unwrap();
        let lag = first_order();
        for omega in [0.0, 0.5, 1.0, 10.0] {
            let want = lag.freq_response(omega).unwrap();
            let got = gc.freq_response(omega).unwrap();
            assert!((want - got).norm() < 1e-14);
        }
    }

    #[test]
    fn lft_close_detects_ill_posed_loop() {
        // D_b = 1 with K11 = 1 makes I - K11 D_b = 0.
        let g = StateSpaceModel::static_gain(DMatrix::identity(1, 1));
        let sys = InterconnectedSystem::new(
            vec![g],
            DMatrix::identity(1, 1),
            DMatrix::identity(1, 1),
            DMatrix::identity(1, 1),
            DMatrix::zeros(1, 1),
        )
        .unwrap();
        assert!(matches!(sys.lft_close(), Err(Error::IllPosed)));
    }

    #[test]
    fn lft_close_without_feedback_reproduces_static_sandwich() {
        // K11 = 0: closure must be exactly K21 G_b K12 + K22.
        let g1 = first_order();
        let g2 = StateSpaceModel::new(
            DMatrix::from_row_slice(2, 2, &[-2.0, 1.0, 0.0, -3.0]),
            DMatrix::from_row_slice(2, 1, &[0.0, 1.0]),
            DMatrix::from_row_slice(1, 2, &[1.0, 1.0]),
            DMatrix::from_element(1, 1, 0.5),
        )
        .unwrap();
        let k12 = DMatrix::from_row_slice(2, 1, &[1.0, 2.0]);
        let k21 = DMatrix::from_row_slice(1, 2, &[3.0, -1.0]);
        let k22 = DMatrix::from_element(1, 1, 0.25);
        let sys = InterconnectedSystem::new(
            vec![g1.clone(), g2.clone()],
            DMatrix::zeros(2, 2),
            k12.clone(),
            k21.clone(),
            k22.clone(),
        )
        .unwrap();
        let gc = sys.lft_close().unwrap();
        let gb = block_diag(&[g1, g2]).unwrap();
        for omega in [0.0, 0.7, 5.0] {
            let want = complexify(&k21) * gb.freq_response(omega).unwrap() * complexify(&k12)
                + complexify(&k22);
            let got = gc.freq_response(omega).unwrap();
            assert!((want - got).norm() < 1e-13);
        }
    }
}
