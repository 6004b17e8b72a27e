//! Square-root balanced truncation, the Enns frequency-weighted variant,
//! and the marginal/stable decomposition used for subsystems with
//! rigid-body modes.

use nalgebra::linalg::{Cholesky, Schur, SymmetricEigen, SVD};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::lyapunov::{gramians, solve_lyapunov};
use super::weights::FittedWeight;
use super::ReductionResult;
use crate::error::{Error, Result};
use crate::lti::{block_diag, complexify, schur_iteration_cap, series, StateSpaceModel};

/// Factor a symmetric PSD matrix as `P ≈ F Fᵀ`. Cholesky is tried first —
/// when it succeeds, tiny pivots come out with full relative accuracy, which
/// the small Hankel values downstream depend on. Numerically semidefinite
/// matrices (FEM models are near-unobservable in high modes) fall back to an
/// eigendecomposition with eigenvalues floored at `1e-14·λ_max`;
/// indefiniteness beyond `-1e-6·λ_max` is a hard error.
fn psd_factor(p: &DMatrix<f64>, what: &str) -> Result<DMatrix<f64>> {
    let n = p.nrows();
    if n == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }
    let sym = (p + p.transpose()) * 0.5;
    if let Some(chol) = Cholesky::new(sym.clone()) {
        return Ok(chol.unpack());
    }
    let eig = SymmetricEigen::try_new(sym, f64::EPSILON, schur_iteration_cap(n))
        .ok_or_else(|| Error::Numerical(format!("{what} eigendecomposition did not converge")))?;
    let lmax = eig.eigenvalues.iter().copied().fold(0.0f64, f64::max);
    let lmin = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if lmin < -1e-6 * lmax {
        return Err(Error::Numerical(format!(
            "{what} is indefinite: eigenvalue {lmin:.3e} against maximum {lmax:.3e}"
        )));
    }
    let floor = 1e-14 * lmax;
    let roots = DVector::from_iterator(n, eig.eigenvalues.iter().map(|&l| l.max(floor).sqrt()));
    let mut f = eig.eigenvectors;
    for j in 0..n {
        f.column_mut(j).scale_mut(roots[j]);
    }
    Ok(f)
}

/// A balanced realization held in factored form: truncation to any order is a
/// cheap projection `(L_r A T_r, L_r B, C T_r, D)` of the stored model.
pub struct BalancedForm {
    model: StateSpaceModel,
    t: DMatrix<f64>,
    l: DMatrix<f64>,
    hankel: Vec<f64>,
}

impl BalancedForm {
    /// Square-root balancing from the two Gramians: with `P = S_P S_Pᵀ`,
    /// `Q = S_Q S_Qᵀ` and the SVD `S_Qᵀ S_P = U Σ Vᵀ`, the projections are
    /// `T = S_P V Σ^{-1/2}` and `L = Σ^{-1/2} Uᵀ S_Qᵀ`, giving `L T = I` and
    /// balanced Gramians `Σ`.
    fn from_gramians(model: &StateSpaceModel, p: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<Self> {
        let n = model.n();
        let sp = psd_factor(p, "controllability Gramian")?;
        let sq = psd_factor(q, "observability Gramian")?;
        if n == 0 {
            return Ok(Self {
                model: model.clone(),
                t: DMatrix::zeros(0, 0),
                l: DMatrix::zeros(0, 0),
                hankel: Vec::new(),
            });
        }
        let m = sq.transpose() * &sp;
        let svd = SVD::try_new(m, true, true, f64::EPSILON, schur_iteration_cap(n))
            .ok_or_else(|| Error::Numerical("balancing SVD did not converge".into()))?;
        let u = svd.u.expect("SVD was requested with U");
        let vt = svd.v_t.expect("SVD was requested with V");
        // Singular values come back in no particular order; sort descending.
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&i, &j| {
            svd.singular_values[j]
                .partial_cmp(&svd.singular_values[i])
                .expect("singular values are finite")
        });
        let hankel: Vec<f64> = idx.iter().map(|&i| svd.singular_values[i]).collect();
        let floor = (hankel[0] * 1e-14).max(1e-300);
        let inv_sqrt: Vec<f64> = hankel
            .iter()
            .map(|&s| if s > floor { 1.0 / s.sqrt() } else { 0.0 })
            .collect();
        let mut t = DMatrix::zeros(n, n);
        let mut l = DMatrix::zeros(n, n);
        let v = vt.transpose();
        let sqt = sq.transpose();
        for (k, &i) in idx.iter().enumerate() {
            let tc = &sp * v.column(i) * inv_sqrt[k];
            t.column_mut(k).copy_from(&tc);
            let lr = (u.column(i).transpose() * &sqt) * inv_sqrt[k];
            l.row_mut(k).copy_from(&lr);
        }
        Ok(Self {
            model: model.clone(),
            t,
            l,
            hankel,
        })
    }

    /// Hankel singular values, nonincreasing.
    pub fn hankel_values(&self) -> &[f64] {
        &self.hankel
    }

    /// State dimension of the balanced model.
    pub fn order(&self) -> usize {
        self.model.n()
    }

    /// Truncate to `r` states. `r = n` returns the stored model verbatim, so
    /// the error system of a full-order "reduction" is identically zero.
    pub fn truncate(&self, r: usize) -> Result<ReductionResult> {
        let n = self.model.n();
        if r > n {
            return Err(Error::Domain(format!(
                "target order {r} exceeds model order {n}"
            )));
        }
        let reduced = if r == n {
            self.model.clone()
        } else {
            let tr = self.t.columns(0, r);
            let lr = self.l.rows(0, r);
            StateSpaceModel::new(
                &lr * self.model.a() * &tr,
                &lr * self.model.b(),
                self.model.c() * &tr,
                self.model.d().clone(),
            )?
        };
        Ok(ReductionResult {
            reduced,
            original_order: n,
            reduced_order: r,
            hankel_values: self.hankel.clone(),
            margins: Vec::new(),
        })
    }
}

/// Balance a stable model against its own (unweighted) Gramians.
pub fn balance_unweighted(model: &StateSpaceModel) -> Result<BalancedForm> {
    let (p, q) = gramians(model)?;
    BalancedForm::from_gramians(model, &p, &q)
}

/// Balance against frequency-weighted Gramians (Enns): the controllability
/// Gramian is the plant-state block of the input cascade `G·V`, the
/// observability Gramian the plant-state block of the output cascade `W·G`.
pub fn balance_weighted(
    model: &StateSpaceModel,
    wout: &[FittedWeight],
    vin: &[FittedWeight],
) -> Result<BalancedForm> {
    if vin.len() != model.m() || wout.len() != model.p() {
        return Err(Error::Dimension(format!(
            "model is {}x{} but got {} output and {} input weights",
            model.p(),
            model.m(),
            wout.len(),
            vin.len()
        )));
    }
    let n = model.n();
    let v_models: Vec<StateSpaceModel> = vin.iter().map(|f| f.model().clone()).collect();
    let w_models: Vec<StateSpaceModel> = wout.iter().map(|f| f.model().clone()).collect();
    let v = block_diag(&v_models)?;
    let w = block_diag(&w_models)?;

    // Input side: u → V → G; the weight states come first in the cascade, so
    // the plant block of the controllability Gramian trails.
    let gv = series(&v, model)?;
    let (stable, alpha) = gv.stability_check()?;
    if !stable {
        return Err(Error::Unstable { abscissa: alpha });
    }
    let p_full = solve_lyapunov(gv.a(), &(gv.b() * gv.b().transpose()))?;
    let nv = v.n();
    let p = p_full.view((nv, nv), (n, n)).into_owned();

    // Output side: G then W; the plant states lead.
    let wg = series(model, &w)?;
    let (stable, alpha) = wg.stability_check()?;
    if !stable {
        return Err(Error::Unstable { abscissa: alpha });
    }
    let q_full = solve_lyapunov(&wg.a().transpose(), &(wg.c().transpose() * wg.c()))?;
    let q = q_full.view((0, 0), (n, n)).into_owned();

    BalancedForm::from_gramians(model, &p, &q)
}

/// Balanced truncation of a stable model to `r` states, with the tail bound
/// `‖G − Ĝ‖∞ ≤ 2 Σ_{i>r} σ_i`.
pub fn balanced_truncation(model: &StateSpaceModel, r: usize) -> Result<ReductionResult> {
    balance_unweighted(model)?.truncate(r)
}

/// Frequency-weighted balanced truncation (Enns scheme) with per-channel
/// output weights `wout` and input weights `vin`. No a-priori error bound
/// holds; callers must validate the reduced model against the requirement.
pub fn fw_balanced_truncation(
    model: &StateSpaceModel,
    wout: &[FittedWeight],
    vin: &[FittedWeight],
    r: usize,
) -> Result<ReductionResult> {
    balance_weighted(model, wout, vin)?.truncate(r)
}

/// Result of [`split_marginal`]: a strictly proper subsystem carrying the
/// marginally stable modes (absent when the model is asymptotically stable)
/// plus an asymptotically stable remainder that keeps the feedthrough.
pub struct MarginalSplit {
    pub marginal: Option<StateSpaceModel>,
    pub stable: StateSpaceModel,
}

/// Swap the diagonal entries at positions `j`, `j+1` of a complex Schur form
/// with a 2×2 unitary similarity, accumulating it into `u`. The first column
/// of the rotation is the in-block eigenvector `[t_{j,j+1}, t_{j+1,j+1} −
/// t_{j,j}]` of the trailing eigenvalue, which moves it to the leading slot.
fn swap_schur_adjacent(t: &mut DMatrix<Complex64>, u: &mut DMatrix<Complex64>, j: usize) {
    let a = t[(j, j)];
    let b = t[(j, j + 1)];
    let c = t[(j + 1, j + 1)];
    let v0 = b;
    let v1 = c - a;
    let norm = (v0.norm_sqr() + v1.norm_sqr()).sqrt();
    if norm == 0.0 {
        // Equal eigenvalues in a decoupled pair: the swap is a no-op.
        return;
    }
    let q00 = v0 / norm;
    let q10 = v1 / norm;
    let q01 = -v1.conj() / norm;
    let q11 = v0.conj() / norm;
    let n = t.nrows();
    for col in 0..n {
        let x = t[(j, col)];
        let y = t[(j + 1, col)];
        t[(j, col)] = q00.conj() * x + q10.conj() * y;
        t[(j + 1, col)] = q01.conj() * x + q11.conj() * y;
    }
    for row in 0..n {
        let x = t[(row, j)];
        let y = t[(row, j + 1)];
        t[(row, j)] = x * q00 + y * q10;
        t[(row, j + 1)] = x * q01 + y * q11;
    }
    for row in 0..u.nrows() {
        let x = u[(row, j)];
        let y = u[(row, j + 1)];
        u[(row, j)] = x * q00 + y * q10;
        u[(row, j + 1)] = x * q01 + y * q11;
    }
    t[(j + 1, j)] = Complex64::new(0.0, 0.0);
}

/// Extract a real orthonormal basis of the subspace spanned by the columns of
/// a complex matrix (which is real for self-conjugate eigenvalue sets) from a
/// rank-revealing QR of `[Re V | Im V]`.
fn real_subspace_basis(v: &DMatrix<Complex64>, dim: usize) -> Result<DMatrix<f64>> {
    let n = v.nrows();
    let k = v.ncols();
    let mut stacked = DMatrix::zeros(n, 2 * k);
    for j in 0..k {
        for i in 0..n {
            stacked[(i, j)] = v[(i, j)].re;
            stacked[(i, k + j)] = v[(i, j)].im;
        }
    }
    let qr = stacked.col_piv_qr();
    let r = qr.r();
    if dim > 0 {
        let lead = r[(0, 0)].abs();
        let tail = r[(dim - 1, dim - 1)].abs();
        if !(tail > 1e-10 * lead) {
            return Err(Error::Numerical(
                "invariant subspace has no real basis of the expected dimension".into(),
            ));
        }
    }
    Ok(qr.q().columns(0, dim).into_owned())
}

/// Decompose a model into marginally stable and asymptotically stable parts,
/// `G = G_m + G_s`, by block-diagonalizing a reordered complex Schur form of
/// `A`. Eigenvalues with real part within `1e-8·max(1, ‖A‖_F)` of zero count
/// as marginal; anything beyond that on the right is rejected as unstable.
/// The feedthrough stays with the stable part, so `G_m` is strictly proper.
pub fn split_marginal(model: &StateSpaceModel) -> Result<MarginalSplit> {
    let n = model.n();
    if n == 0 {
        return Ok(MarginalSplit {
            marginal: None,
            stable: model.clone(),
        });
    }
    let tol = 1e-8 * model.a().norm().max(1.0);
    let schur = Schur::try_new(
        complexify(model.a()),
        f64::EPSILON,
        schur_iteration_cap(n),
    )
    .ok_or_else(|| Error::Numerical("Schur iteration did not converge".into()))?;
    let (mut u, mut t) = schur.unpack();

    let abscissa = (0..n).map(|k| t[(k, k)].re).fold(f64::NEG_INFINITY, f64::max);
    if abscissa > tol {
        return Err(Error::Unstable { abscissa });
    }
    let m = (0..n).filter(|&k| t[(k, k)].re.abs() <= tol).count();
    if m == 0 {
        return Ok(MarginalSplit {
            marginal: None,
            stable: model.clone(),
        });
    }
    if m == n {
        let strictly_proper = StateSpaceModel::new(
            model.a().clone(),
            model.b().clone(),
            model.c().clone(),
            DMatrix::zeros(model.p(), model.m()),
        )?;
        return Ok(MarginalSplit {
            marginal: Some(strictly_proper),
            stable: StateSpaceModel::static_gain(model.d().clone()),
        });
    }

    // Bubble every marginal eigenvalue to the leading block.
    let mut placed = 0usize;
    for k in 0..n {
        if t[(k, k)].re.abs() <= tol {
            for j in (placed..k).rev() {
                swap_schur_adjacent(&mut t, &mut u, j);
            }
            placed += 1;
        }
    }
    debug_assert_eq!(placed, m);

    // Decouple: T11 Z − Z T22 = −T12, solved column by column; the shifted
    // diagonals T11_ii − T22_kk have real part ≥ tol by the classification.
    let nm = n - m;
    let t12 = t.view((0, m), (m, nm));
    let mut z = DMatrix::<Complex64>::zeros(m, nm);
    for k in 0..nm {
        let mut rhs = DVector::from_fn(m, |i, _| -t12[(i, k)]);
        for j in 0..k {
            let s = t[(m + j, m + k)];
            if s.norm_sqr() > 0.0 {
                for i in 0..m {
                    rhs[i] += z[(i, j)] * s;
                }
            }
        }
        let shift = t[(m + k, m + k)];
        for i in (0..m).rev() {
            let mut s = rhs[i];
            for j in (i + 1)..m {
                s -= t[(i, j)] * z[(j, k)];
            }
            let diag = t[(i, i)] - shift;
            if diag.norm() < 1e-300 {
                return Err(Error::Numerical(
                    "marginal split hit an eigenvalue collision".into(),
                ));
            }
            z[(i, k)] = s / diag;
        }
    }

    // Invariant subspaces in original coordinates: marginal = U[:, :m],
    // stable complement = U[:, :m]·Z + U[:, m:].
    let u1 = u.columns(0, m).into_owned();
    let v2 = &u1 * &z + u.columns(m, nm);
    let basis_m = real_subspace_basis(&u1, m)?;
    let basis_s = real_subspace_basis(&v2, nm)?;
    let mut w = DMatrix::zeros(n, n);
    w.view_mut((0, 0), (n, m)).copy_from(&basis_m);
    w.view_mut((0, m), (n, nm)).copy_from(&basis_s);

    let lu = w.clone().lu();
    let mut a_w = lu
        .solve(&(model.a() * &w))
        .ok_or_else(|| Error::Numerical("marginal split transform is singular".into()))?;
    let b_w = lu
        .solve(model.b())
        .ok_or_else(|| Error::Numerical("marginal split transform is singular".into()))?;
    let c_w = model.c() * &w;
    // The off-diagonal blocks are zero up to roundoff by construction.
    a_w.view_mut((0, m), (m, nm)).fill(0.0);
    a_w.view_mut((m, 0), (nm, m)).fill(0.0);

    let marginal = StateSpaceModel::new(
        a_w.view((0, 0), (m, m)).into_owned(),
        b_w.rows(0, m).into_owned(),
        c_w.columns(0, m).into_owned(),
        DMatrix::zeros(model.p(), model.m()),
    )?;
    let stable = StateSpaceModel::new(
        a_w.view((m, m), (nm, nm)).into_owned(),
        b_w.rows(m, nm).into_owned(),
        c_w.columns(m, nm).into_owned(),
        model.d().clone(),
    )?;
    Ok(MarginalSplit {
        marginal: Some(marginal),
        stable,
    })
}
