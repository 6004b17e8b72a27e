//! Frequency grids, the nominal coupling matrix `N(iω)`, and singular-value
//! utilities.
//!
//! The nominal matrix captures how subsystem perturbations propagate to the
//! external channels of an interconnection once the loop is closed around the
//! unperturbed models:
//!
//! ```text
//! N(iω) = [ N11  N12 ]   N11 = K11 (I - G_b K11)^{-1}
//!         [ N21   0  ]   N12 = (I - K11 G_b)^{-1} K12
//!                        N21 = K21 (I - G_b K11)^{-1}
//! ```
//!
//! evaluated at `s = iω` with `G_b = diag(G_1, ..., G_k)`. The zero lower-right
//! block reflects that the external feedthrough `K22` cancels in error terms.
//!
//! All computations here are pure per-frequency functions; a grid sweep can be
//! partitioned across workers freely.

use std::io::Write;

use nalgebra::linalg::{SymmetricEigen, SVD};
use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lti::{complexify, schur_iteration_cap, InterconnectedSystem, StateSpaceModel};

/// Strictly increasing list of positive evaluation frequencies in rad/s.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid {
    omegas: Vec<f64>,
}

impl FrequencyGrid {
    /// Wrap an explicit list of frequencies, validating the grid invariants.
    pub fn new(omegas: Vec<f64>) -> Result<Self> {
        if omegas.is_empty() {
            return Err(Error::Domain("frequency grid must be nonempty".into()));
        }
        for (i, &w) in omegas.iter().enumerate() {
            if !w.is_finite() || w <= 0.0 {
                return Err(Error::Domain(format!(
                    "grid frequencies must be finite and positive, entry {i} is {w}"
                )));
            }
            if i > 0 && omegas[i - 1] >= w {
                return Err(Error::Domain(format!(
                    "grid must be strictly increasing, entries {} and {} are {} and {}",
                    i - 1,
                    i,
                    omegas[i - 1],
                    w
                )));
            }
        }
        Ok(Self { omegas })
    }

    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }

    pub fn len(&self) -> usize {
        self.omegas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omegas.is_empty()
    }
}

/// `n` log₁₀-equispaced frequencies covering `[lo, hi]`, endpoints included.
pub fn make_log_grid(lo: f64, hi: f64, n: usize) -> Result<FrequencyGrid> {
    if !(lo > 0.0 && lo < hi && hi.is_finite()) {
        return Err(Error::Domain(format!(
            "log grid needs 0 < lo < hi, got lo = {lo}, hi = {hi}"
        )));
    }
    if n < 2 {
        return Err(Error::Domain(format!("log grid needs n >= 2, got {n}")));
    }
    let (llo, lhi) = (lo.log10(), hi.log10());
    let omegas: Vec<f64> = (0..n)
        .map(|i| {
            if i == 0 {
                lo
            } else if i == n - 1 {
                hi
            } else {
                10f64.powf(llo + (lhi - llo) * i as f64 / (n - 1) as f64)
            }
        })
        .collect();
    FrequencyGrid::new(omegas)
}

/// The nominal coupling matrix `N(iω)` of an interconnection (see module docs).
#[derive(Debug, Clone)]
pub struct NominalMatrix {
    /// m_b×p_b: loop gain seen by the stacked subsystem channels.
    pub n11: DMatrix<Complex64>,
    /// m_b×m_c: external input to subsystem inputs.
    pub n12: DMatrix<Complex64>,
    /// p_c×p_b: subsystem outputs to the external output.
    pub n21: DMatrix<Complex64>,
    /// Evaluation frequency in rad/s.
    pub omega: f64,
}

impl NominalMatrix {
    pub fn m_b(&self) -> usize {
        self.n11.nrows()
    }

    pub fn p_b(&self) -> usize {
        self.n11.ncols()
    }

    pub fn m_c(&self) -> usize {
        self.n12.ncols()
    }

    pub fn p_c(&self) -> usize {
        self.n21.nrows()
    }

    /// Assemble the full `(m_b+p_c) × (p_b+m_c)` matrix including the zero
    /// lower-right block.
    pub fn full(&self) -> DMatrix<Complex64> {
        let (mb, pb, mc, pc) = (self.m_b(), self.p_b(), self.m_c(), self.p_c());
        let mut n = DMatrix::zeros(mb + pc, pb + mc);
        n.view_mut((0, 0), (mb, pb)).copy_from(&self.n11);
        n.view_mut((0, pb), (mb, mc)).copy_from(&self.n12);
        n.view_mut((mb, 0), (pc, pb)).copy_from(&self.n21);
        n
    }
}

/// Evaluate the nominal matrix of `sys` at frequency `ω`.
///
/// A single LU factorization of `I - K11 G_b(iω)` is reused for every block;
/// `N21` comes from the push-through identity
/// `K21 (I - G_b K11)^{-1} = K21 + K21 G_b (I - K11 G_b)^{-1} K11`.
pub fn compute_n(sys: &InterconnectedSystem, omega: f64) -> Result<NominalMatrix> {
    let mut gb = DMatrix::zeros(sys.p_b(), sys.m_b());
    let (mut ip, mut im) = (0, 0);
    for g in sys.subsystems() {
        gb.view_mut((ip, im), (g.p(), g.m()))
            .copy_from(&g.freq_response(omega)?);
        ip += g.p();
        im += g.m();
    }
    let k11 = complexify(sys.k11());
    let k12 = complexify(sys.k12());
    let k21 = complexify(sys.k21());
    let m_b = sys.m_b();
    let loop_matrix = DMatrix::identity(m_b, m_b) - &k11 * &gb;
    let lu = loop_matrix.lu();
    let n11 = lu.solve(&k11).ok_or(Error::IllPosedAt { omega })?;
    let n12 = lu.solve(&k12).ok_or(Error::IllPosedAt { omega })?;
    let n21 = &k21 + &k21 * &gb * &n11;
    Ok(NominalMatrix {
        n11,
        n12,
        n21,
        omega,
    })
}

/// Largest singular value σ̄ of a complex matrix.
///
/// Never fails: if the bounded SVD iteration does not converge, falls back to
/// the symmetric eigenvalue route on `MᴴM`, and as a last resort returns the
/// Frobenius norm (a valid upper bound).
pub fn sigma_max(m: &DMatrix<Complex64>) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    let cap = schur_iteration_cap(m.nrows().max(m.ncols()));
    if let Some(svd) = SVD::try_new(m.clone(), false, false, f64::EPSILON, cap) {
        return svd.singular_values.max();
    }
    let gram = m.adjoint() * m;
    if let Some(eig) = SymmetricEigen::try_new(gram, f64::EPSILON, cap) {
        return eig.eigenvalues.max().max(0.0).sqrt();
    }
    log::warn!("sigma_max: SVD and eigen iterations failed; using Frobenius bound");
    m.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Real-matrix convenience wrapper for [`sigma_max`].
pub fn sigma_max_real(m: &DMatrix<f64>) -> f64 {
    sigma_max(&complexify(m))
}

/// Grid-based lower estimate of the H∞ norm `sup_ω σ̄(G(iω))`.
///
/// Sweeps the grid, then refines locally around the maximizer by repeated
/// log-space subdivision until the relative improvement drops below
/// `refine_tol`. The DC gain and the feedthrough (ω → ∞ limit) are always
/// included as candidates. The result is a lower bound on the true norm.
pub fn hinf_norm_estimate(
    model: &StateSpaceModel,
    grid: &FrequencyGrid,
    refine_tol: f64,
) -> Result<f64> {
    let (stable, alpha) = model.stability_check()?;
    if !stable {
        return Err(Error::Unstable { abscissa: alpha });
    }
    if !(refine_tol > 0.0) {
        return Err(Error::Domain(format!(
            "refine_tol must be positive, got {refine_tol}"
        )));
    }
    let gain = |omega: f64| -> Result<f64> { Ok(sigma_max(&model.freq_response(omega)?)) };

    // Endpoint candidates: DC and the infinite-frequency limit σ̄(D).
    let mut best = gain(0.0)?;
    best = best.max(sigma_max(&complexify(model.d())));

    let mut peak_idx = 0usize;
    let mut peak = f64::NEG_INFINITY;
    for (i, &w) in grid.omegas().iter().enumerate() {
        let s = gain(w)?;
        if s > peak {
            peak = s;
            peak_idx = i;
        }
    }
    best = best.max(peak);

    // Local refinement bracket around the grid maximizer (log space).
    let omegas = grid.omegas();
    let mut lo = if peak_idx > 0 {
        omegas[peak_idx - 1]
    } else {
        omegas[0] / 10.0
    };
    let mut hi = if peak_idx + 1 < omegas.len() {
        omegas[peak_idx + 1]
    } else {
        omegas[omegas.len() - 1] * 10.0
    };
    let mut current = peak;
    for _ in 0..200 {
        let (llo, lhi) = (lo.ln(), hi.ln());
        let mut samples = [0.0f64; 7];
        let mut vals = [0.0f64; 7];
        let mut arg = 0usize;
        for j in 0..7 {
            let w = (llo + (lhi - llo) * j as f64 / 6.0).exp();
            samples[j] = w;
            vals[j] = gain(w)?;
            if vals[j] > vals[arg] {
                arg = j;
            }
        }
        let new_best = vals[arg];
        let improved = new_best - current;
        lo = samples[arg.saturating_sub(1)];
        hi = samples[(arg + 1).min(6)];
        current = current.max(new_best);
        best = best.max(current);
        if improved <= refine_tol * current.abs().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    Ok(best)
}

/// Write a frequency sweep as CSV: header `omega,<names...>`, one row per
/// frequency, full shortest-roundtrip double precision, LF line endings.
pub fn write_sweep_csv<W: Write>(
    out: &mut W,
    value_names: &[&str],
    rows: &[(f64, Vec<f64>)],
) -> Result<()> {
    write!(out, "omega")?;
    for name in value_names {
        write!(out, ",{name}")?;
    }
    writeln!(out)?;
    for (omega, values) in rows {
        if values.len() != value_names.len() {
            return Err(Error::Dimension(format!(
                "sweep row has {} values, header names {}",
                values.len(),
                value_names.len()
            )));
        }
        write!(out, "{omega}")?;
        for v in values {
            write!(out, ",{v}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn log_grid_small_example() {
        let g = make_log_grid(1.0, 100.0, 3).unwrap();
        assert_eq!(g.omegas().len(), 3);
        assert_relative_eq!(g.omegas()[0], 1.0);
        assert_relative_eq!(g.omegas()[1], 10.0, max_relative = 1e-14);
        assert_relative_eq!(g.omegas()[2], 100.0);
    }

    #[test]
    fn log_grid_endpoints_are_exact() {
        let lo = 10f64.powf(2.5);
        let hi = 1e5;
        let g = make_log_grid(lo, hi, 1000).unwrap();
        assert_eq!(g.len(), 1000);
        assert_eq!(g.omegas()[0], lo);
        assert_eq!(g.omegas()[999], hi);
    }

    #[test]
    fn log_grid_rejects_bad_bounds() {
        assert!(make_log_grid(10.0, 1.0, 3).is_err());
        assert!(make_log_grid(0.0, 1.0, 3).is_err());
        assert!(make_log_grid(1.0, 10.0, 1).is_err());
    }

    fn scalar_model(a: f64, b: f64, c: f64, d: f64) -> StateSpaceModel {
        StateSpaceModel::new(
            DMatrix::from_element(1, 1, a),
            DMatrix::from_element(1, 1, b),
            DMatrix::from_element(1, 1, c),
            DMatrix::from_element(1, 1, d),
        )
        .unwrap()
    }

    #[test]
    fn nominal_matrix_without_feedback() {
        let g = scalar_model(-1.0, 1.0, 1.0, 0.0);
        let sys = InterconnectedSystem::new(
            vec![g],
            DMatrix::zeros(1, 1),
            DMatrix::from_element(1, 1, 2.5),
            DMatrix::from_element(1, 1, -1.5),
            DMatrix::zeros(1, 1),
        )
        .unwrap();
        let n = compute_n(&sys, 1.0).unwrap();
        assert!(n.n11[(0, 0)].norm() < 1e-15);
        assert_relative_eq!(n.n12[(0, 0)].re, 2.5);
        assert_relative_eq!(n.n21[(0, 0)].re, -1.5);
    }

    #[test]
    fn nominal_matrix_scalar_loop() {
        // G_b(i0) = 1, K11 = 0.5: N11 = 1, N12 = N21 = 2.
        let g = StateSpaceModel::static_gain(DMatrix::from_element(1, 1, 1.0));
        let sys = InterconnectedSystem::new(
            vec![g],
            DMatrix::from_element(1, 1, 0.5),
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::zeros(1, 1),
        )
        .unwrap();
        let n = compute_n(&sys, 1e-3).unwrap();
        assert_relative_eq!(n.n11[(0, 0)].re, 1.0, max_relative = 1e-12);
        assert_relative_eq!(n.n12[(0, 0)].re, 2.0, max_relative = 1e-12);
        assert_relative_eq!(n.n21[(0, 0)].re, 2.0, max_relative = 1e-12);
        let full = n.full();
        assert_eq!((full.nrows(), full.ncols()), (2, 2));
        assert_eq!(full[(1, 1)], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn sigma_max_examples() {
        assert_relative_eq!(sigma_max_real(&DMatrix::identity(2, 2)), 1.0);
        let mut d = DMatrix::zeros(2, 2);
        d[(0, 0)] = Complex64::new(3.0, 0.0);
        d[(1, 1)] = Complex64::new(0.0, 4.0);
        assert_relative_eq!(sigma_max(&d), 4.0, max_relative = 1e-12);
        let n = DMatrix::from_row_slice(2, 2, &[0.0, 2.0, 0.0, 0.0]);
        assert_relative_eq!(sigma_max_real(&n), 2.0, max_relative = 1e-12);
    }

    fn random_stable(rng: &mut ChaCha8Rng, n: usize, m: usize, p: usize) -> StateSpaceModel {
        let mut a = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let shift = crate::lti::spectral_abscissa(&a).unwrap().max(0.0) + rng.gen_range(0.2..1.0);
        for i in 0..n {
            a[(i, i)] -= shift;
        }
        StateSpaceModel::new(
            a,
            DMatrix::from_fn(n, m, |_, _| rng.gen_range(-1.0..1.0)),
            DMatrix::from_fn(p, n, |_, _| rng.gen_range(-1.0..1.0)),
            DMatrix::from_fn(p, m, |_, _| rng.gen_range(-0.3..0.3)),
        )
        .unwrap()
    }

    #[test]
    fn push_through_identity_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let k = rng.gen_range(1..=3);
            let subs: Vec<_> = (0..k)
                .map(|_| {
                    let n = rng.gen_range(1..=4);
                    let m = rng.gen_range(1..=2);
                    let p = rng.gen_range(1..=2);
                    random_stable(&mut rng, n, m, p)
                })
                .collect();
            let m_b: usize = subs.iter().map(|g| g.m()).sum();
            let p_b: usize = subs.iter().map(|g| g.p()).sum();
            let sys = InterconnectedSystem::new(
                subs,
                DMatrix::from_fn(m_b, p_b, |_, _| rng.gen_range(-0.4..0.4)),
                DMatrix::from_fn(m_b, 1, |_, _| rng.gen_range(-1.0..1.0)),
                DMatrix::from_fn(1, p_b, |_, _| rng.gen_range(-1.0..1.0)),
                DMatrix::zeros(1, 1),
            )
            .unwrap();
            let omega = 10f64.powf(rng.gen_range(-1.0..2.0));
            let n = match compute_n(&sys, omega) {
                Ok(n) => n,
                Err(_) => continue, // ill-posed draw; skip
            };
            // Independent evaluation of K11 (I - G_b K11)^{-1}.
            let mut gb = DMatrix::zeros(p_b, m_b);
            let (mut ip, mut im) = (0, 0);
            for g in sys.subsystems() {
                gb.view_mut((ip, im), (g.p(), g.m()))
                    .copy_from(&g.freq_response(omega).unwrap());
                ip += g.p();
                im += g.m();
            }
            let k11 = complexify(sys.k11());
            let inner = (DMatrix::identity(p_b, p_b) - &gb * &k11)
                .lu()
                .try_inverse()
                .unwrap();
            let n11_alt = &k11 * &inner;
            let scale = sigma_max(&n11_alt).max(1.0);
            assert!(
                sigma_max(&(&n.n11 - &n11_alt)) <= 1e-10 * scale,
                "push-through identity violated at omega {omega}"
            );
            let n21_alt = complexify(sys.k21()) * &inner;
            assert!(sigma_max(&(&n.n21 - &n21_alt)) <= 1e-10 * sigma_max(&n21_alt).max(1.0));
        }
    }

    #[test]
    fn perturbation_propagation_matches_direct_difference() {
        // For Ĝ_j = G_j + W_j Δ_j V_j (per-frequency complex perturbations with
        // σ̄(Δ_j) ≤ 1), the closed-loop error must equal
        // N21 Δ̃ (I - N11 Δ̃)^{-1} N12 with Δ̃ = W_b Δ_b V_b.
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let mut tested = 0;
        while tested < 40 {
            let k = rng.gen_range(1..=2);
            let subs: Vec<_> = (0..k)
                .map(|_| {
                    let n = rng.gen_range(1..=3);
                    let m = rng.gen_range(1..=2);
                    let p = rng.gen_range(1..=2);
                    random_stable(&mut rng, n, m, p)
                })
                .collect();
            let m_b: usize = subs.iter().map(|g| g.m()).sum();
            let p_b: usize = subs.iter().map(|g| g.p()).sum();
            let sys = InterconnectedSystem::new(
                subs.clone(),
                DMatrix::from_fn(m_b, p_b, |_, _| rng.gen_range(-0.3..0.3)),
                DMatrix::from_fn(m_b, 1, |_, _| rng.gen_range(-1.0..1.0)),
                DMatrix::from_fn(1, p_b, |_, _| rng.gen_range(-1.0..1.0)),
                DMatrix::zeros(1, 1),
            )
            .unwrap();
            let omega = 10f64.powf(rng.gen_range(-1.0..1.5));
            let n = match compute_n(&sys, omega) {
                Ok(n) => n,
                Err(_) => continue,
            };
            // Random diagonal scalings and admissible perturbations.
            let w_b = DMatrix::from_diagonal(&nalgebra::DVector::from_fn(p_b, |_, _| {
                Complex64::new(10f64.powf(rng.gen_range(-1.0..1.0)), 0.0)
            }));
            let v_b = DMatrix::from_diagonal(&nalgebra::DVector::from_fn(m_b, |_, _| {
                Complex64::new(10f64.powf(rng.gen_range(-1.0..1.0)), 0.0)
            }));
            let mut delta = DMatrix::<Complex64>::zeros(p_b, m_b);
            let (mut ip, mut im) = (0, 0);
            for g in &subs {
                let raw = DMatrix::from_fn(g.p(), g.m(), |_, _| {
                    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                });
                let s = sigma_max(&raw).max(1e-9);
                let scale = rng.gen_range(0.0..1.0) / s;
                delta
                    .view_mut((ip, im), (g.p(), g.m()))
                    .copy_from(&(raw * Complex64::new(scale, 0.0)));
                ip += g.p();
                im += g.m();
            }
            let dt = &w_b * &delta * &v_b;

            // Formula route.
            let inner = (DMatrix::identity(m_b, m_b) - &n.n11 * &dt).lu();
            let ec_formula = &n.n21 * &dt * inner.solve(&n.n12).unwrap();

            // Direct route: perturbed closed loop minus nominal closed loop.
            let mut gb = DMatrix::zeros(p_b, m_b);
            let (mut ip, mut im) = (0, 0);
            for g in &subs {
                gb.view_mut((ip, im), (g.p(), g.m()))
                    .copy_from(&g.freq_response(omega).unwrap());
                ip += g.p();
                im += g.m();
            }
            let close = |g: &DMatrix<Complex64>| -> Option<DMatrix<Complex64>> {
                let k11 = complexify(sys.k11());
                let lu = (DMatrix::identity(m_b, m_b) - &k11 * g).lu();
                let x = lu.solve(&complexify(sys.k12()))?;
                Some(complexify(sys.k21()) * g * x + complexify(sys.k22()))
            };
            let gc = close(&gb).unwrap();
            let gb_hat = &gb + &dt;
            let gc_hat = match close(&gb_hat) {
                Some(v) => v,
                None => continue,
            };
            let ec_direct = &gc_hat - &gc;
            let scale = sigma_max(&ec_direct).max(1e-6);
            assert!(
                sigma_max(&(&ec_formula - &ec_direct)) <= 1e-8 * scale,
                "propagation formula mismatch at omega {omega}"
            );
            tested += 1;
        }
    }

    #[test]
    fn hinf_estimate_of_first_order_lag() {
        let g = scalar_model(-1.0, 1.0, 1.0, 0.0);
        let grid = make_log_grid(0.01, 100.0, 50).unwrap();
        let est = hinf_norm_estimate(&g, &grid, 1e-9).unwrap();
        assert_relative_eq!(est, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn hinf_estimate_of_static_gain() {
        let g = StateSpaceModel::static_gain(DMatrix::from_element(1, 1, 2.0));
        let grid = make_log_grid(0.1, 10.0, 5).unwrap();
        assert_relative_eq!(hinf_norm_estimate(&g, &grid, 1e-6).unwrap(), 2.0);
    }

    #[test]
    fn hinf_estimate_resolves_sharp_resonance() {
        // 1/(s² + 2ζs + 1) with ζ = 0.01 peaks at 1/(2ζ√(1-ζ²)) ≈ 50.0025.
        let zeta = 0.01;
        let g = StateSpaceModel::new(
            DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, -2.0 * zeta]),
            DMatrix::from_row_slice(2, 1, &[0.0, 1.0]),
            DMatrix::from_row_slice(1, 2, &[1.0, 0.0]),
            DMatrix::zeros(1, 1),
        )
        .unwrap();
        let grid = make_log_grid(0.1, 10.0, 30).unwrap();
        let est = hinf_norm_estimate(&g, &grid, 1e-8).unwrap();
        let peak = 1.0 / (2.0 * zeta * (1.0 - zeta * zeta).sqrt());
        assert_relative_eq!(est, peak, max_relative = 1e-3);
    }

    #[test]
    fn hinf_estimate_rejects_unstable_models() {
        let g = scalar_model(1.0, 1.0, 1.0, 0.0);
        let grid = make_log_grid(0.1, 10.0, 5).unwrap();
        assert!(matches!(
            hinf_norm_estimate(&g, &grid, 1e-6),
            Err(Error::Unstable { .. })
        ));
    }

    #[test]
    fn hinf_estimate_monotone_under_grid_refinement() {
        let zeta = 0.01;
        let g = StateSpaceModel::new(
            DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, -2.0 * zeta]),
            DMatrix::from_row_slice(2, 1, &[0.0, 1.0]),
            DMatrix::from_row_slice(1, 2, &[1.0, 0.0]),
            DMatrix::zeros(1, 1),
        )
        .unwrap();
        // A (2n-1)-point log grid contains the n-point grid exactly.
        let coarse = make_log_grid(0.1, 10.0, 11).unwrap();
        let fine = make_log_grid(0.1, 10.0, 21).unwrap();
        let e1 = hinf_norm_estimate(&g, &coarse, 1e-4).unwrap();
        let e2 = hinf_norm_estimate(&g, &fine, 1e-4).unwrap();
        assert!(e2 >= e1 * (1.0 - 1e-12));
    }

    #[test]
    fn sweep_csv_format() {
        let rows = vec![(1.0, vec![0.5, 2.0]), (10.0, vec![0.25, 4.0])];
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &["s1", "s2"], &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "omega,s1,s2\n1,0.5,2\n10,0.25,4\n");
    }
}
