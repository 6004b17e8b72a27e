//! Subsystem reduction: Lyapunov/Gramian machinery, balanced truncation,
//! frequency-weighted balanced truncation with fitted minimum-phase weights,
//! and the requirement-driven order search.
//!
//! The entry point for the pipeline is [`reduce_to_requirement`]: it splits
//! off marginally stable modes (which are kept verbatim — rigid-body modes of
//! free-free structures must survive reduction untouched), fits per-channel
//! weights from the synthesized scalings, balances the stable part once, and
//! then searches for the smallest truncation order whose weighted error
//! satisfies the subsystem requirement at every grid frequency.

mod balanced;
mod lyapunov;
mod weights;

pub use balanced::{
    balance_unweighted, balance_weighted, balanced_truncation, fw_balanced_truncation,
    split_marginal, BalancedForm, MarginalSplit,
};
pub use lyapunov::{gramians, solve_lyapunov};
pub use weights::{fit_weight, FittedWeight};

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::freq::FrequencyGrid;
use crate::lti::StateSpaceModel;
use crate::synthesis::check_subsystem_requirement;

/// Outcome of a reduction: the reduced model plus the evidence (Hankel
/// spectrum, per-frequency requirement margins) justifying the order choice.
#[derive(Debug, Clone)]
pub struct ReductionResult {
    pub reduced: StateSpaceModel,
    pub original_order: usize,
    pub reduced_order: usize,
    /// Hankel singular values of the (stable part of the) original model,
    /// nonincreasing.
    pub hankel_values: Vec<f64>,
    /// Per-frequency requirement margins; empty when the reduction was not
    /// driven by a requirement.
    pub margins: Vec<RequirementMargin>,
}

/// Weighted error size at one grid frequency, as checked against the
/// subsystem requirement `σ̄(W⁻¹ E V⁻¹) ≤ 1`.
#[derive(Debug, Clone, Copy)]
pub struct RequirementMargin {
    pub omega: f64,
    pub sigma_weighted: f64,
    pub pass: bool,
}

/// A balancing strategy the order search can drive. Implementations produce
/// the [`BalancedForm`] whose truncations are tested against the requirement.
pub trait ReductionMethod: Send + Sync {
    /// Identifier used on the command line and in logs.
    fn name(&self) -> &'static str;
    /// Balance `model` (already asymptotically stable) for truncation.
    fn balance(
        &self,
        model: &StateSpaceModel,
        wout: &[FittedWeight],
        vin: &[FittedWeight],
    ) -> Result<BalancedForm>;
}

/// Enns frequency-weighted balancing against the fitted scaling weights.
pub struct FrequencyWeighted;

impl ReductionMethod for FrequencyWeighted {
    fn name(&self) -> &'static str {
        "fwbt"
    }

    fn balance(
        &self,
        model: &StateSpaceModel,
        wout: &[FittedWeight],
        vin: &[FittedWeight],
    ) -> Result<BalancedForm> {
        balance_weighted(model, wout, vin)
    }
}

/// Plain balanced truncation; the fitted weights are ignored (the order
/// search still checks the weighted requirement, so the result is sound,
/// merely less economical).
pub struct Unweighted;

impl ReductionMethod for Unweighted {
    fn name(&self) -> &'static str {
        "bt"
    }

    fn balance(
        &self,
        model: &StateSpaceModel,
        _wout: &[FittedWeight],
        _vin: &[FittedWeight],
    ) -> Result<BalancedForm> {
        balance_unweighted(model)
    }
}

static METHODS: &[&dyn ReductionMethod] = &[&FrequencyWeighted, &Unweighted];

/// Names of the registered reduction methods, default first.
pub fn method_names() -> Vec<&'static str> {
    METHODS.iter().map(|m| m.name()).collect()
}

/// Find a registered reduction method by name.
pub fn lookup_method(name: &str) -> Result<&'static dyn ReductionMethod> {
    METHODS
        .iter()
        .copied()
        .find(|m| m.name() == name)
        .ok_or_else(|| {
            Error::Domain(format!(
                "unknown reduction method '{name}' (available: {})",
                method_names().join(", ")
            ))
        })
}

/// Knobs for [`reduce_to_requirement`].
#[derive(Debug, Clone)]
pub struct ReduceOptions {
    /// Denominator order of each per-channel weight fit.
    pub fit_order: usize,
    /// Advisory fit quality; worse fits are logged, not failed.
    pub fit_tol: f64,
    /// Slack added to the requirement check (`σ̄ ≤ 1 + slack`).
    pub slack: f64,
}

impl Default for ReduceOptions {
    fn default() -> Self {
        Self {
            fit_order: 4,
            fit_tol: 0.1,
            slack: 0.0,
        }
    }
}

/// Parallel interconnection `G_1 + G_2` (shared input, outputs added).
fn parallel_sum(g1: &StateSpaceModel, g2: &StateSpaceModel) -> Result<StateSpaceModel> {
    if g1.m() != g2.m() || g1.p() != g2.p() {
        return Err(Error::Dimension(format!(
            "parallel sum needs matching shapes, got {}x{} and {}x{}",
            g1.p(),
            g1.m(),
            g2.p(),
            g2.m()
        )));
    }
    let (n1, n2) = (g1.n(), g2.n());
    let mut a = DMatrix::zeros(n1 + n2, n1 + n2);
    a.view_mut((0, 0), (n1, n1)).copy_from(g1.a());
    a.view_mut((n1, n1), (n2, n2)).copy_from(g2.a());
    let mut b = DMatrix::zeros(n1 + n2, g1.m());
    b.rows_mut(0, n1).copy_from(g1.b());
    b.rows_mut(n1, n2).copy_from(g2.b());
    let mut c = DMatrix::zeros(g1.p(), n1 + n2);
    c.columns_mut(0, n1).copy_from(g1.c());
    c.columns_mut(n1, n2).copy_from(g2.c());
    StateSpaceModel::new(a, b, c, g1.d() + g2.d())
}

/// Reduce `model` to the smallest order that satisfies the synthesized
/// subsystem requirement at every grid point.
///
/// `v` and `w` are grid-major per-channel scalings (`v[t][ch]` scales input
/// channel `ch` at `grid[t]`); the weights fed to the balancing method are
/// fits of their inverses, so the weighted-error objective matches the check
/// `σ̄(diag(w)⁻¹ E diag(v)⁻¹) ≤ 1`. Marginally stable modes are split off,
/// carried verbatim, and re-attached — they cancel exactly in the error
/// system, so the requirement is decided by the stable part alone.
///
/// The pass/fail predicate is close to monotone in the order but not
/// guaranteed to be; a binary search finds the boundary and a downward
/// linear walk then verifies it, settling on the smallest passing order of
/// the final run.
pub fn reduce_to_requirement(
    model: &StateSpaceModel,
    v: &[Vec<f64>],
    w: &[Vec<f64>],
    grid: &FrequencyGrid,
    method: &dyn ReductionMethod,
    opts: &ReduceOptions,
) -> Result<ReductionResult> {
    if v.len() != grid.len() || w.len() != grid.len() {
        return Err(Error::Dimension(format!(
            "scaling tables have {} and {} rows for a {}-point grid",
            v.len(),
            w.len(),
            grid.len()
        )));
    }
    for (t, (vt, wt)) in v.iter().zip(w.iter()).enumerate() {
        if vt.len() != model.m() || wt.len() != model.p() {
            return Err(Error::Dimension(format!(
                "scaling row {t} has ({}, {}) channels, model needs ({}, {})",
                vt.len(),
                wt.len(),
                model.m(),
                model.p()
            )));
        }
        if vt.iter().chain(wt.iter()).any(|&x| !(x > 0.0) || !x.is_finite()) {
            return Err(Error::Domain(format!(
                "scalings must be positive and finite (row {t})"
            )));
        }
    }
    if !(opts.slack >= 0.0) {
        return Err(Error::Domain(format!(
            "slack must be nonnegative, got {}",
            opts.slack
        )));
    }

    let split = split_marginal(model)?;
    let stable = &split.stable;
    let ns = stable.n();
    let nm = split.marginal.as_ref().map_or(0, |m| m.n());
    let omegas = grid.omegas();

    let fit_channel = |samples: Vec<f64>| -> Result<FittedWeight> {
        fit_weight(omegas, &samples, opts.fit_order, opts.fit_tol)
    };
    let vin: Vec<FittedWeight> = (0..model.m())
        .map(|ch| fit_channel((0..grid.len()).map(|t| 1.0 / v[t][ch]).collect()))
        .collect::<Result<_>>()?;
    let wout: Vec<FittedWeight> = (0..model.p())
        .map(|ch| fit_channel((0..grid.len()).map(|t| 1.0 / w[t][ch]).collect()))
        .collect::<Result<_>>()?;

    let form = method.balance(stable, &wout, &vin)?;
    let originals: Vec<_> = omegas
        .par_iter()
        .map(|&omega| stable.freq_response(omega))
        .collect::<Result<_>>()?;

    // Margins of one truncation order, or None as soon as any point fails.
    let margins_for = |r: usize| -> Result<Option<Vec<RequirementMargin>>> {
        let reduced = form.truncate(r)?.reduced;
        let rows: Vec<(RequirementMargin, bool)> = omegas
            .par_iter()
            .enumerate()
            .map(|(t, &omega)| -> Result<(RequirementMargin, bool)> {
                let e = reduced.freq_response(omega)? - &originals[t];
                let (pass, margin) = check_subsystem_requirement(&e, &v[t], &w[t], opts.slack)?;
                Ok((
                    RequirementMargin {
                        omega,
                        sigma_weighted: 1.0 - margin,
                        pass,
                    },
                    pass,
                ))
            })
            .collect::<Result<_>>()?;
        if rows.iter().all(|&(_, pass)| pass) {
            Ok(Some(rows.into_iter().map(|(m, _)| m).collect()))
        } else {
            Ok(None)
        }
    };

    // The full stable order always passes: truncate(ns) returns the stable
    // part verbatim, so the error responses are identically zero.
    let full = margins_for(ns)?.ok_or(Error::Unattainable { max_order: ns })?;
    let mut best_r = ns;
    let mut best_margins = full;
    let mut lo = 0usize;
    let mut hi = ns;
    while lo < hi {
        let mid = (lo + hi) / 2;
        match margins_for(mid)? {
            Some(m) => {
                hi = mid;
                best_r = mid;
                best_margins = m;
            }
            None => lo = mid + 1,
        }
    }
    while best_r > 0 {
        match margins_for(best_r - 1)? {
            Some(m) => {
                best_r -= 1;
                best_margins = m;
            }
            None => break,
        }
    }

    let reduced_stable = form.truncate(best_r)?.reduced;
    let reduced = match &split.marginal {
        Some(m) => parallel_sum(m, &reduced_stable)?,
        None => reduced_stable,
    };
    Ok(ReductionResult {
        reduced,
        original_order: model.n(),
        reduced_order: nm + best_r,
        hankel_values: form.hankel_values().to_vec(),
        margins: best_margins,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::freq::make_log_grid;
    use approx::assert_relative_eq;
    use nalgebra::DMatrix;

    fn two_mode_with_feedthrough() -> StateSpaceModel {
        StateSpaceModel::new(
            DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, -5.0]),
            DMatrix::from_column_slice(2, 1, &[1.0, 1.0]),
            DMatrix::from_row_slice(1, 2, &[1.0, 0.8]),
            DMatrix::from_element(1, 1, 0.3),
        )
        .unwrap()
    }

    fn uniform_scalings(grid: &FrequencyGrid, m: usize, p: usize, level: f64) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let v = vec![vec![level; m]; grid.len()];
        let w = vec![vec![level; p]; grid.len()];
        (v, w)
    }

    #[test]
    fn method_registry_resolves_known_names() {
        assert_eq!(method_names(), vec!["fwbt", "bt"]);
        assert_eq!(lookup_method("fwbt").unwrap().name(), "fwbt");
        assert_eq!(lookup_method("bt").unwrap().name(), "bt");
        assert!(matches!(lookup_method("modal"), Err(Error::Domain(_))));
    }

    #[test]
    fn loose_budgets_truncate_everything() {
        let g = two_mode_with_feedthrough();
        let grid = make_log_grid(0.1, 100.0, 15).unwrap();
        let (v, w) = uniform_scalings(&grid, 1, 1, 1e6);
        let res = reduce_to_requirement(
            &g,
            &v,
            &w,
            &grid,
            lookup_method("fwbt").unwrap(),
            &ReduceOptions::default(),
        )
        .unwrap();
        assert_eq!(res.reduced_order, 0);
        assert!(res.margins.iter().all(|m| m.pass));
    }

    #[test]
    fn tight_budgets_keep_the_model_verbatim() {
        let g = two_mode_with_feedthrough();
        let grid = make_log_grid(0.1, 100.0, 15).unwrap();
        let (v, w) = uniform_scalings(&grid, 1, 1, 1e-9);
        let res = reduce_to_requirement(
            &g,
            &v,
            &w,
            &grid,
            lookup_method("fwbt").unwrap(),
            &ReduceOptions::default(),
        )
        .unwrap();
        // Only the exact model passes a (1e-9)² error budget, and it does so
        // with an identically zero error system.
        assert_eq!(res.reduced_order, 2);
        assert_eq!(res.reduced, g);
        assert!(res.margins.iter().all(|m| m.sigma_weighted == 0.0));
    }

    #[test]
    fn unweighted_method_also_satisfies_the_requirement() {
        let g = two_mode_with_feedthrough();
        let grid = make_log_grid(0.1, 100.0, 15).unwrap();
        let (v, w) = uniform_scalings(&grid, 1, 1, 1.0);
        let res = reduce_to_requirement(
            &g,
            &v,
            &w,
            &grid,
            lookup_method("bt").unwrap(),
            &ReduceOptions::default(),
        )
        .unwrap();
        assert!(res.margins.iter().all(|m| m.pass));
        assert!(res.reduced_order <= 2);
    }

    #[test]
    fn rigid_modes_are_carried_through_reduction() {
        // Double integrator in parallel with the damped two-mode model: the
        // requirement is decided by the stable part; the rigid pair must
        // reappear untouched in the reduced model.
        let a = DMatrix::from_row_slice(
            4,
            4,
            &[
                0.0, 1.0, 0.0, 0.0, //
                0.0, 0.0, 0.0, 0.0, //
                0.0, 0.0, -1.0, 0.0, //
                0.0, 0.0, 0.0, -5.0,
            ],
        );
        let b = DMatrix::from_column_slice(4, 1, &[0.0, 1.0, 1.0, 1.0]);
        let c = DMatrix::from_row_slice(1, 4, &[1.0, 0.0, 1.0, 0.8]);
        let d = DMatrix::from_element(1, 1, 0.3);
        let g = StateSpaceModel::new(a, b, c, d).unwrap();

        let grid = make_log_grid(0.1, 100.0, 25).unwrap();
        let (v, w) = uniform_scalings(&grid, 1, 1, 1.0);
        let res = reduce_to_requirement(
            &g,
            &v,
            &w,
            &grid,
            lookup_method("fwbt").unwrap(),
            &ReduceOptions::default(),
        )
        .unwrap();

        // Unit budgets: dropping everything fails (|E| ≈ 1.15 at 0.1 rad/s)
        // but one stable state suffices (tail bound 2σ₂ ≈ 0.1), so the
        // result is the 2-state rigid pair plus one stable state.
        assert_eq!(res.original_order, 4);
        assert_eq!(res.reduced_order, 3);
        assert_eq!(res.reduced.n(), 3);
        assert!(res.margins.iter().all(|m| m.pass));

        // The margins were computed on the stable part; confirm they match
        // the honest error of the reassembled model against the original.
        for m in &res.margins {
            let e = res.reduced.freq_response(m.omega).unwrap()
                - g.freq_response(m.omega).unwrap();
            let (pass, margin) =
                check_subsystem_requirement(&e, &[1.0], &[1.0], 0.0).unwrap();
            assert!(pass);
            assert_relative_eq!(1.0 - margin, m.sigma_weighted, epsilon = 1e-8);
        }
    }

    #[test]
    fn scaling_table_shape_is_validated() {
        let g = two_mode_with_feedthrough();
        let grid = make_log_grid(0.1, 100.0, 10).unwrap();
        let (v, _) = uniform_scalings(&grid, 1, 1, 1.0);
        let w_short = vec![vec![1.0]; 9];
        assert!(matches!(
            reduce_to_requirement(
                &g,
                &v,
                &w_short,
                &grid,
                lookup_method("fwbt").unwrap(),
                &ReduceOptions::default()
            ),
            Err(Error::Dimension(_))
        ));
        let w_bad_row = vec![vec![1.0, 2.0]; 10];
        assert!(matches!(
            reduce_to_requirement(
                &g,
                &v,
                &w_bad_row,
                &grid,
                lookup_method("fwbt").unwrap(),
                &ReduceOptions::default()
            ),
            Err(Error::Dimension(_))
        ));
    }
}
