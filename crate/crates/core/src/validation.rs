//! End-to-end verification of a reduction run.
//!
//! After synthesis has distributed the interconnected accuracy requirement
//! into per-subsystem budgets and each subsystem has been reduced against
//! its budget, this module checks the outcome on the frequency grid: every
//! subsystem error must sit inside its budget set, the interconnected error
//! must sit inside the requirement set, and — since the budget translation
//! is certified — any frequency where all subsystem checks pass under a
//! feasible certificate must also pass the interconnected check. The report
//! carries per-frequency margins for plotting and the order bookkeeping for
//! the reduction summary.

use std::io::Write;

use rayon::prelude::*;
use serde_json::json;

use crate::error::{Error, Result};
use crate::freq::{sigma_max, write_sweep_csv, FrequencyGrid};
use crate::lti::{InterconnectedSystem, StateSpaceModel};
use crate::synthesis::{
    check_interconnected_requirement, check_subsystem_requirement, RequirementSpec,
    ScalingSolution,
};

/// Outcome of every requirement check at one grid frequency. Margins are
/// `1 − σ̄(weighted error)`, so negative means violation; subsystem margins
/// are `NaN` where synthesis produced no scalings.
#[derive(Debug, Clone)]
pub struct OmegaChecks {
    pub omega: f64,
    /// Budget-check margin per subsystem.
    pub sub_margins: Vec<f64>,
    pub sub_pass: Vec<bool>,
    /// Requirement-check margin of the interconnected error.
    pub interconnected_margin: f64,
    pub interconnected_pass: bool,
    /// Whether the scaled small-gain certificate was feasible here.
    pub certified: bool,
}

impl OmegaChecks {
    pub fn all_subsystems_pass(&self) -> bool {
        self.sub_pass.iter().all(|&p| p)
    }
}

/// Grid-wide verification result with reduction totals.
#[derive(Debug, Clone)]
pub struct RequirementReport {
    pub per_omega: Vec<OmegaChecks>,
    /// State dimension `n_j` of each original subsystem.
    pub original_orders: Vec<usize>,
    /// State dimension `r_j` of each reduced subsystem.
    pub reduced_orders: Vec<usize>,
    /// Frequencies where all subsystem checks passed under a feasible
    /// certificate and the interconnected check still failed. The guarantee
    /// says this cannot happen; a nonzero count means a bug or broken input.
    pub implication_violations: usize,
}

impl RequirementReport {
    pub fn total_original(&self) -> usize {
        self.original_orders.iter().sum()
    }

    pub fn total_reduced(&self) -> usize {
        self.reduced_orders.iter().sum()
    }

    /// Reduction percentage, exactly `100·(1 − Σr_j/Σn_j)`.
    pub fn reduction_percentage(&self) -> f64 {
        100.0 * (1.0 - self.total_reduced() as f64 / self.total_original() as f64)
    }

    /// True when every frequency passes both the subsystem and the
    /// interconnected checks.
    pub fn all_pass(&self) -> bool {
        self.per_omega
            .iter()
            .all(|c| c.all_subsystems_pass() && c.interconnected_pass)
    }

    /// Serialize in the report schema:
    /// `{"per_omega": [{"omega", "sub": [..], "interconnected"}], "totals": {..}}`.
    pub fn to_json(&self) -> serde_json::Value {
        let per_omega: Vec<serde_json::Value> = self
            .per_omega
            .iter()
            .map(|c| {
                json!({
                    "omega": c.omega,
                    "sub": c.sub_margins,
                    "sub_pass": c.sub_pass,
                    "interconnected": c.interconnected_margin,
                    "interconnected_pass": c.interconnected_pass,
                    "certified": c.certified,
                })
            })
            .collect();
        json!({
            "per_omega": per_omega,
            "totals": {
                "original_orders": self.original_orders,
                "reduced_orders": self.reduced_orders,
                "total_original": self.total_original(),
                "total_reduced": self.total_reduced(),
                "reduction_percentage": self.reduction_percentage(),
                "all_pass": self.all_pass(),
                "implication_violations": self.implication_violations,
            }
        })
    }
}

/// Check a finished reduction run at every grid frequency.
///
/// For each subsystem `j` the error `E_j = Ĝ_j − G_j` must satisfy
/// `σ̄(diag(w_j)⁻¹ E_j diag(v_j)⁻¹) ≤ 1` against the synthesized scalings,
/// and the interconnected error `E_c = Ĝ_c − G_c` of the closed loops must
/// satisfy `σ̄(diag(v_c) E_c diag(w_c)) < 1` against the requirement. The
/// report also audits the certificate guarantee (see
/// [`RequirementReport::implication_violations`]).
pub fn validate_pipeline(
    sys: &InterconnectedSystem,
    reduced: &[StateSpaceModel],
    scalings: &ScalingSolution,
    grid: &FrequencyGrid,
) -> Result<RequirementReport> {
    let k = sys.subsystems().len();
    if reduced.len() != k {
        return Err(Error::Dimension(format!(
            "{} reduced subsystems for a {}-subsystem interconnection",
            reduced.len(),
            k
        )));
    }
    for (j, (g, r)) in sys.subsystems().iter().zip(reduced).enumerate() {
        if g.m() != r.m() || g.p() != r.p() {
            return Err(Error::Dimension(format!(
                "reduced subsystem {} is {}x{} but the original is {}x{}",
                j + 1,
                r.p(),
                r.m(),
                g.p(),
                g.m()
            )));
        }
    }
    if scalings.entries.len() != grid.len()
        || scalings
            .entries
            .iter()
            .zip(grid.omegas())
            .any(|(e, &w)| (e.omega - w).abs() > 1e-12 * w.abs())
    {
        return Err(Error::Domain(format!(
            "scalings cover {} frequencies, validation grid has {}; the grids must match",
            scalings.entries.len(),
            grid.len()
        )));
    }

    let gc = sys.lft_close()?;
    let gc_hat = InterconnectedSystem::new(
        reduced.to_vec(),
        sys.k11().clone(),
        sys.k12().clone(),
        sys.k21().clone(),
        sys.k22().clone(),
    )?
    .lft_close()?;

    let per_omega: Vec<OmegaChecks> = (0..grid.len())
        .into_par_iter()
        .map(|t| -> Result<OmegaChecks> {
            let omega = grid.omegas()[t];
            let entry = &scalings.entries[t];
            let point = &entry.point;

            let mut sub_margins = Vec::with_capacity(k);
            let mut sub_pass = Vec::with_capacity(k);
            for j in 0..k {
                if !entry.feasible {
                    sub_margins.push(f64::NAN);
                    sub_pass.push(false);
                    continue;
                }
                let e_j = reduced[j].freq_response(omega)? - sys.subsystems()[j].freq_response(omega)?;
                let (pass, margin) =
                    check_subsystem_requirement(&e_j, &point.v[j], &point.w[j], 0.0)?;
                sub_margins.push(margin);
                sub_pass.push(pass);
            }

            let e_c = gc_hat.freq_response(omega)? - gc.freq_response(omega)?;
            let (ipass, imargin) =
                check_interconnected_requirement(&e_c, &point.v_c, &point.w_c, 0.0)?;

            Ok(OmegaChecks {
                omega,
                sub_margins,
                sub_pass,
                interconnected_margin: imargin,
                interconnected_pass: ipass,
                certified: entry.feasible,
            })
        })
        .collect::<Result<_>>()?;

    let implication_violations = per_omega
        .iter()
        .filter(|c| c.certified && c.all_subsystems_pass() && !c.interconnected_pass)
        .count();

    Ok(RequirementReport {
        per_omega,
        original_orders: sys.subsystems().iter().map(|g| g.n()).collect(),
        reduced_orders: reduced.iter().map(|g| g.n()).collect(),
        implication_violations,
    })
}

/// Emit the interconnected Bode comparison as CSV with columns
/// `omega,mag_Gc,mag_Gc_hat,bound_lo,bound_hi`.
///
/// Magnitudes are largest singular values (the plain magnitude for a
/// single-channel model) and the bounds delimit the requirement region
/// `|G_c| ± V_c⁻¹` in linear scale, using the loosest external channel where
/// there are several. `bound_lo` may go negative at frequencies where the
/// requirement floor exceeds the response magnitude.
pub fn emit_bode_data<W: Write>(
    out: &mut W,
    gc: &StateSpaceModel,
    gc_hat: &StateSpaceModel,
    req: &RequirementSpec,
    grid: &FrequencyGrid,
) -> Result<()> {
    if req.omegas().len() != grid.len() {
        return Err(Error::Dimension(format!(
            "requirement covers {} frequencies, grid has {}",
            req.omegas().len(),
            grid.len()
        )));
    }
    let rows: Vec<(f64, Vec<f64>)> = grid
        .omegas()
        .par_iter()
        .enumerate()
        .map(|(t, &omega)| -> Result<(f64, Vec<f64>)> {
            let mag = sigma_max(&gc.freq_response(omega)?);
            let mag_hat = sigma_max(&gc_hat.freq_response(omega)?);
            let v_inv = req.v_c()[t]
                .iter()
                .map(|&v| 1.0 / v)
                .fold(0.0f64, f64::max);
            Ok((omega, vec![mag, mag_hat, mag - v_inv, mag + v_inv]))
        })
        .collect::<Result<_>>()?;
    write_sweep_csv(out, &["mag_Gc", "mag_Gc_hat", "bound_lo", "bound_hi"], &rows)
}
