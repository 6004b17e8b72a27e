//! Dense continuous-time Lyapunov solver (Bartels–Stewart).

use nalgebra::linalg::Schur;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lti::{complexify, schur_iteration_cap, spectral_abscissa, StateSpaceModel};

/// Solve `A P + P Aᵀ + Q = 0` for symmetric `P`, given stable `A` and
/// symmetric `Q`.
///
/// Bartels–Stewart on the complex Schur form `A = U T Uᴴ`: the transformed
/// equation `T Y + Y Tᴴ + Q̃ = 0` is solved column by column from the last,
/// since column `k` couples only to later columns through `Tᴴ` acting from
/// the right, and each column needs one triangular back substitution with
/// `T + conj(T_kk) I` (nonsingular for stable spectra, where eigenvalue sums
/// have strictly negative real parts). The factorization is reused for up to
/// three iterative-refinement passes targeting a relative residual of 1e-10.
pub fn solve_lyapunov(a: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    if a.ncols() != n || q.nrows() != n || q.ncols() != n {
        return Err(Error::Dimension(format!(
            "Lyapunov needs square same-size matrices, got A {}x{} and Q {}x{}",
            a.nrows(),
            a.ncols(),
            q.nrows(),
            q.ncols()
        )));
    }
    if n == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }
    let qnorm = q.norm();
    if (q - q.transpose()).norm() > 1e-8 * qnorm.max(f64::MIN_POSITIVE) {
        return Err(Error::Domain("Lyapunov right-hand side must be symmetric".into()));
    }
    let qs = (q + q.transpose()) * 0.5;
    let alpha = spectral_abscissa(a)?;
    if alpha >= 0.0 {
        return Err(Error::Unstable { abscissa: alpha });
    }

    let schur = Schur::try_new(complexify(a), f64::EPSILON, schur_iteration_cap(n))
        .ok_or_else(|| Error::Numerical("Lyapunov Schur iteration did not converge".into()))?;
    let (u, t) = schur.unpack();
    let uh = u.adjoint();

    let solve_transformed = |rhs: &DMatrix<f64>| -> Result<DMatrix<f64>> {
        let qt = &uh * complexify(rhs) * &u;
        let mut y = DMatrix::<Complex64>::zeros(n, n);
        let mut col = DVector::<Complex64>::zeros(n);
        for k in (0..n).rev() {
            for i in 0..n {
                col[i] = -qt[(i, k)];
            }
            for j in (k + 1)..n {
                let tkj = t[(k, j)].conj();
                if tkj.norm_sqr() > 0.0 {
                    for i in 0..n {
                        col[i] -= y[(i, j)] * tkj;
                    }
                }
            }
            let shift = t[(k, k)].conj();
            for i in (0..n).rev() {
                let mut s = col[i];
                for j in (i + 1)..n {
                    s -= t[(i, j)] * y[(j, k)];
                }
                let diag = t[(i, i)] + shift;
                if diag.norm() < 1e-300 {
                    return Err(Error::Numerical(
                        "Lyapunov solve hit a vanishing eigenvalue sum".into(),
                    ));
                }
                y[(i, k)] = s / diag;
            }
        }
        let p = &u * y * &uh;
        let pr = p.map(|z| z.re);
        Ok((&pr + pr.transpose()) * 0.5)
    };

    let scale = qnorm.max(f64::MIN_POSITIVE);
    let mut p = solve_transformed(&qs)?;
    for _ in 0..3 {
        let residual = a * &p + &p * a.transpose() + &qs;
        if residual.norm() <= 1e-10 * scale {
            break;
        }
        p += solve_transformed(&residual)?;
    }
    let final_residual = (a * &p + &p * a.transpose() + &qs).norm();
    if final_residual > 1e-10 * scale {
        log::warn!(
            "Lyapunov relative residual {:.3e} above 1e-10 after refinement",
            final_residual / scale
        );
    }
    Ok(p)
}

/// Controllability and observability Gramians of a stable model:
/// `A P + P Aᵀ + B Bᵀ = 0` and `Aᵀ Q + Q A + Cᵀ C = 0`.
pub fn gramians(model: &StateSpaceModel) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let (stable, alpha) = model.stability_check()?;
    if !stable {
        return Err(Error::Unstable { abscissa: alpha });
    }
    let p = solve_lyapunov(model.a(), &(model.b() * model.b().transpose()))?;
    let q = solve_lyapunov(
        &model.a().transpose(),
        &(model.c().transpose() * model.c()),
    )?;
    Ok((p, q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn scalar_equation() {
        let p = solve_lyapunov(
            &DMatrix::from_element(1, 1, -1.0),
            &DMatrix::from_element(1, 1, 2.0),
        )
        .unwrap();
        assert_relative_eq!(p[(0, 0)], 1.0, max_relative = 1e-12);
    }

    #[test]
    fn decoupled_diagonal_equation() {
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![-1.0, -2.0]));
        let p = solve_lyapunov(&a, &DMatrix::identity(2, 2)).unwrap();
        assert_relative_eq!(p[(0, 0)], 0.5, max_relative = 1e-12);
        assert_relative_eq!(p[(1, 1)], 0.25, max_relative = 1e-12);
        assert_relative_eq!(p[(0, 1)], 0.0, epsilon = 1e-14);
    }

    #[test]
    fn random_instances_meet_residual_target() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let n = 10;
            let mut a = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
            let shift = spectral_abscissa(&a).unwrap().max(0.0) + rng.gen_range(0.2..1.0);
            for i in 0..n {
                a[(i, i)] -= shift;
            }
            let g = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
            let q = &g * g.transpose();
            let p = solve_lyapunov(&a, &q).unwrap();
            let residual = (&a * &p + &p * a.transpose() + &q).norm();
            assert!(
                residual <= 1e-10 * q.norm(),
                "relative residual {}",
                residual / q.norm()
            );
            assert!((&p - p.transpose()).norm() <= 1e-12 * p.norm());
        }
    }

    #[test]
    fn unstable_matrix_is_rejected() {
        let err = solve_lyapunov(
            &DMatrix::from_element(1, 1, 1.0),
            &DMatrix::from_element(1, 1, 1.0),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Unstable { .. }));
    }

    #[test]
    fn asymmetric_rhs_is_rejected() {
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![-1.0, -2.0]));
        let q = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, -0.5, 1.0]);
        assert!(matches!(solve_lyapunov(&a, &q), Err(Error::Domain(_))));
    }

    #[test]
    fn first_order_gramians() {
        let g = StateSpaceModel::new(
            DMatrix::from_element(1, 1, -1.0),
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::zeros(1, 1),
        )
        .unwrap();
        let (p, q) = gramians(&g).unwrap();
        assert_relative_eq!(p[(0, 0)], 0.5, max_relative = 1e-12);
        assert_relative_eq!(q[(0, 0)], 0.5, max_relative = 1e-12);
        // Hankel value for this model: sqrt(eig(PQ)) = 0.5.
        assert_relative_eq!((p[(0, 0)] * q[(0, 0)]).sqrt(), 0.5, max_relative = 1e-12);
    }

    #[test]
    fn zero_input_map_gives_zero_gramian() {
        let g = StateSpaceModel::new(
            DMatrix::from_element(1, 1, -1.0),
            DMatrix::zeros(1, 1),
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::zeros(1, 1),
        )
        .unwrap();
        let (p, _) = gramians(&g).unwrap();
        assert_eq!(p[(0, 0)], 0.0);
    }

    #[test]
    fn unstable_model_gramians_rejected() {
        let g = StateSpaceModel::new(
            DMatrix::from_element(1, 1, 0.0),
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::zeros(1, 1),
        )
        .unwrap();
        assert!(matches!(gramians(&g), Err(Error::Unstable { .. })));
    }
}
