//! Minimum-phase SISO magnitude fits used as reduction weights.
//!
//! The synthesis stage hands over per-channel magnitude samples over the
//! frequency grid; here they are fitted with a stable, minimum-phase
//! transfer function so the Enns cascades can absorb them as state-space
//! factors. Fitting works on log-magnitudes: a greedy pass places first- and
//! second-order sections from a candidate grid, then Levenberg–Marquardt
//! polishes gain, corners, and damping jointly.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lti::{series, StateSpaceModel};

const ZETA_RANGE: (f64, f64) = (1e-3, 0.999);

/// How far (in natural-log units) fitted corner frequencies may stray outside
/// the sampled band. A corner much beyond the band is nearly indistinguishable
/// from a gain change on the data, but it makes the realized cascade stiff,
/// so both the greedy candidates and the LM clamp stay inside this margin.
const FREQ_OVERHANG: f64 = 2.0;

/// One factor of the fitted magnitude model: `s + c` or
/// `s² + 2ζω₀s + ω₀²`, used on either the pole or the zero side.
#[derive(Clone, Copy, Debug)]
enum Section {
    First { c: f64 },
    Resonant { omega0: f64, zeta: f64 },
}

impl Section {
    fn order(&self) -> usize {
        match self {
            Section::First { .. } => 1,
            Section::Resonant { .. } => 2,
        }
    }

    /// `ln |section(iω)|`.
    fn log_mag(&self, omega: f64) -> f64 {
        match *self {
            Section::First { c } => 0.5 * (omega * omega + c * c).ln(),
            Section::Resonant { omega0, zeta } => {
                let u = omega0 * omega0 - omega * omega;
                let v = 2.0 * zeta * omega0 * omega;
                0.5 * (u * u + v * v).ln()
            }
        }
    }

    fn roots(&self) -> Vec<Complex64> {
        match *self {
            Section::First { c } => vec![Complex64::new(-c, 0.0)],
            Section::Resonant { omega0, zeta } => {
                let re = -zeta * omega0;
                let disc = zeta * zeta - 1.0;
                if disc >= 0.0 {
                    let off = omega0 * disc.sqrt();
                    vec![
                        Complex64::new(re + off, 0.0),
                        Complex64::new(re - off, 0.0),
                    ]
                } else {
                    let im = omega0 * (-disc).sqrt();
                    vec![Complex64::new(re, im), Complex64::new(re, -im)]
                }
            }
        }
    }
}

/// A per-channel reduction weight: a stable, minimum-phase SISO model plus
/// the fit quality and the pole/zero locations it realizes.
#[derive(Clone, Debug)]
pub struct FittedWeight {
    model: StateSpaceModel,
    fit_error: f64,
    poles: Vec<Complex64>,
    zeros: Vec<Complex64>,
}

impl FittedWeight {
    /// A frequency-independent weight `W(s) = gain`.
    pub fn constant(gain: f64) -> Result<Self> {
        if !(gain > 0.0 && gain.is_finite()) {
            return Err(Error::Domain(format!(
                "constant weight gain must be positive and finite, got {gain}"
            )));
        }
        Ok(Self {
            model: StateSpaceModel::static_gain(DMatrix::from_element(1, 1, gain)),
            fit_error: 0.0,
            poles: Vec::new(),
            zeros: Vec::new(),
        })
    }

    pub fn model(&self) -> &StateSpaceModel {
        &self.model
    }

    /// Largest relative magnitude deviation from the target samples on the
    /// fitting grid.
    pub fn fit_error(&self) -> f64 {
        self.fit_error
    }

    pub fn poles(&self) -> &[Complex64] {
        &self.poles
    }

    pub fn zeros(&self) -> &[Complex64] {
        &self.zeros
    }

    #[cfg(test)]
    pub(crate) fn from_model_for_tests(model: StateSpaceModel) -> Self {
        Self {
            model,
            fit_error: 0.0,
            poles: Vec::new(),
            zeros: Vec::new(),
        }
    }
}

/// Candidate corners and resonances spanning (and slightly overhanging) the
/// sample grid.
fn candidate_sections(wmin: f64, wmax: f64) -> Vec<Section> {
    let mut cands = Vec::new();
    let (lo, hi) = (wmin.ln() - FREQ_OVERHANG, wmax.ln() + FREQ_OVERHANG);
    for k in 0..40 {
        let c = (lo + (hi - lo) * k as f64 / 39.0).exp();
        cands.push(Section::First { c });
    }
    let (rlo, rhi) = (wmin.ln(), wmax.ln());
    for k in 0..30 {
        let omega0 = (rlo + (rhi - rlo) * k as f64 / 29.0).exp();
        for &zeta in &[0.05, 0.2, 0.7] {
            cands.push(Section::Resonant { omega0, zeta });
        }
    }
    cands
}

/// Sum of squares after removing the mean (the gain absorbs any constant
/// offset, so only the centered residual matters during the greedy pass).
fn centered_sse(r: &[f64]) -> f64 {
    let mean = r.iter().sum::<f64>() / r.len() as f64;
    r.iter().map(|&x| (x - mean) * (x - mean)).sum()
}

/// Greedy section placement: repeatedly add the candidate (as pole or zero,
/// properness permitting) that most reduces the centered residual energy.
fn greedy_sections(
    omegas: &[f64],
    targets: &[f64],
    order: usize,
) -> (Vec<Section>, Vec<Section>) {
    let cands = candidate_sections(
        omegas.iter().copied().fold(f64::INFINITY, f64::min),
        omegas.iter().copied().fold(0.0f64, f64::max),
    );
    let cand_lm: Vec<Vec<f64>> = cands
        .iter()
        .map(|s| omegas.iter().map(|&w| s.log_mag(w)).collect())
        .collect();

    let mut poles: Vec<Section> = Vec::new();
    let mut zeros: Vec<Section> = Vec::new();
    let mut residual = targets.to_vec();
    let mut pole_order = 0usize;
    let mut zero_order = 0usize;

    loop {
        let base = centered_sse(&residual);
        let mut best: Option<(f64, usize, bool)> = None; // (sse, cand, is_zero)
        let mut trial = vec![0.0; residual.len()];
        for (ci, cand) in cands.iter().enumerate() {
            if pole_order + cand.order() <= order {
                for (i, t) in trial.iter_mut().enumerate() {
                    *t = residual[i] + cand_lm[ci][i];
                }
                let sse = centered_sse(&trial);
                if best.map_or(true, |(b, _, _)| sse < b) {
                    best = Some((sse, ci, false));
                }
            }
            if zero_order + cand.order() <= pole_order {
                for (i, t) in trial.iter_mut().enumerate() {
                    *t = residual[i] - cand_lm[ci][i];
                }
                let sse = centered_sse(&trial);
                if best.map_or(true, |(b, _, _)| sse < b) {
                    best = Some((sse, ci, true));
                }
            }
        }
        let Some((sse, ci, is_zero)) = best else { break };
        if base - sse <= 1e-12 * base.max(1e-30) {
            break;
        }
        if is_zero {
            zeros.push(cands[ci]);
            zero_order += cands[ci].order();
            for (i, r) in residual.iter_mut().enumerate() {
                *r -= cand_lm[ci][i];
            }
        } else {
            poles.push(cands[ci]);
            pole_order += cands[ci].order();
            for (i, r) in residual.iter_mut().enumerate() {
                *r += cand_lm[ci][i];
            }
        }
        if pole_order >= order && zero_order >= pole_order {
            break;
        }
    }
    (poles, zeros)
}

/// Flatten sections into the log-parameter vector refined by LM:
/// `[gain_ln, poles..., zeros...]` with one entry per first-order corner and
/// two (ln ω₀, ln ζ) per resonant section.
fn pack(gain_ln: f64, poles: &[Section], zeros: &[Section]) -> DVector<f64> {
    let mut v = vec![gain_ln];
    for s in poles.iter().chain(zeros.iter()) {
        match *s {
            Section::First { c } => v.push(c.ln()),
            Section::Resonant { omega0, zeta } => {
                v.push(omega0.ln());
                v.push(zeta.ln());
            }
        }
    }
    DVector::from_vec(v)
}

fn unpack(
    theta: &DVector<f64>,
    poles: &mut [Section],
    zeros: &mut [Section],
    freq_clamp: (f64, f64),
) -> f64 {
    let clamp_freq = |x: f64| x.clamp(freq_clamp.0, freq_clamp.1).exp();
    let mut k = 1;
    for s in poles.iter_mut().chain(zeros.iter_mut()) {
        match s {
            Section::First { c } => {
                *c = clamp_freq(theta[k]);
                k += 1;
            }
            Section::Resonant { omega0, zeta } => {
                *omega0 = clamp_freq(theta[k]);
                *zeta = theta[k + 1].clamp(ZETA_RANGE.0.ln(), ZETA_RANGE.1.ln()).exp();
                k += 2;
            }
        }
    }
    theta[0]
}

/// Model log-magnitude and its Jacobian with respect to the packed
/// parameters, both evaluated at every grid point.
fn log_mag_model_and_jacobian(
    omegas: &[f64],
    gain_ln: f64,
    poles: &[Section],
    zeros: &[Section],
) -> (Vec<f64>, DMatrix<f64>) {
    let npar = 1
        + poles.iter().map(Section::order).sum::<usize>()
        + zeros.iter().map(Section::order).sum::<usize>();
    let mut f = vec![gain_ln; omegas.len()];
    let mut jac = DMatrix::zeros(omegas.len(), npar);
    for i in 0..omegas.len() {
        jac[(i, 0)] = 1.0;
    }
    let mut col = 1usize;
    for (sections, sign) in [(poles, -1.0f64), (zeros, 1.0f64)] {
        for s in sections {
            match *s {
                Section::First { c } => {
                    for (i, &w) in omegas.iter().enumerate() {
                        f[i] += sign * s.log_mag(w);
                        jac[(i, col)] = sign * c * c / (w * w + c * c);
                    }
                    col += 1;
                }
                Section::Resonant { omega0, zeta } => {
                    for (i, &w) in omegas.iter().enumerate() {
                        f[i] += sign * s.log_mag(w);
                        let u = omega0 * omega0 - w * w;
                        let v = 2.0 * zeta * omega0 * w;
                        let den = u * u + v * v;
                        jac[(i, col)] =
                            sign * (2.0 * u * omega0 * omega0 + 2.0 * v * zeta * omega0 * w) / den;
                        jac[(i, col + 1)] = sign * v * v / den;
                    }
                    col += 2;
                }
            }
        }
    }
    (f, jac)
}

/// Sum of squared log-magnitude residuals for a parameter set.
fn sse(omegas: &[f64], targets: &[f64], gain_ln: f64, poles: &[Section], zeros: &[Section]) -> f64 {
    let (f, _) = log_mag_model_and_jacobian(omegas, gain_ln, poles, zeros);
    targets
        .iter()
        .zip(&f)
        .map(|(&t, &fi)| (t - fi) * (t - fi))
        .sum()
}

/// Levenberg–Marquardt polish of gain and section parameters in log space.
fn refine(
    omegas: &[f64],
    targets: &[f64],
    gain_ln0: f64,
    poles: &mut Vec<Section>,
    zeros: &mut Vec<Section>,
) -> f64 {
    let wmin = omegas.iter().copied().fold(f64::INFINITY, f64::min);
    let wmax = omegas.iter().copied().fold(0.0f64, f64::max);
    let freq_clamp = (wmin.ln() - FREQ_OVERHANG, wmax.ln() + FREQ_OVERHANG);

    let sse_at = |gain_ln: f64, poles: &[Section], zeros: &[Section]| -> f64 {
        sse(omegas, targets, gain_ln, poles, zeros)
    };

    let mut theta = pack(gain_ln0, poles, zeros);
    let mut gain_ln = gain_ln0;
    let mut sse = sse_at(gain_ln, poles, zeros);
    let mut lambda = 1e-3;
    for _ in 0..40 {
        let (f, jac) = log_mag_model_and_jacobian(omegas, gain_ln, poles, zeros);
        let e = DVector::from_iterator(
            targets.len(),
            targets.iter().zip(&f).map(|(&t, &fi)| t - fi),
        );
        let jtj = jac.transpose() * &jac;
        let jte = jac.transpose() * e;
        let mut accepted = false;
        for _ in 0..12 {
            let mut m = jtj.clone();
            for k in 0..m.nrows() {
                m[(k, k)] += lambda * jtj[(k, k)].max(1e-12);
            }
            let Some(delta) = m.lu().solve(&jte) else {
                lambda *= 4.0;
                continue;
            };
            let cand = &theta + delta;
            let mut cp = poles.clone();
            let mut cz = zeros.clone();
            let cg = unpack(&cand, &mut cp, &mut cz, freq_clamp);
            let cand_sse = sse_at(cg, &cp, &cz);
            if cand_sse < sse {
                // Re-pack so clamped parameters stay consistent.
                *poles = cp;
                *zeros = cz;
                gain_ln = cg;
                theta = pack(gain_ln, poles, zeros);
                let drop = sse - cand_sse;
                sse = cand_sse;
                lambda = (lambda / 3.0).max(1e-12);
                accepted = true;
                if drop <= 1e-14 * sse.max(1e-30) {
                    return gain_ln;
                }
                break;
            }
            lambda *= 4.0;
        }
        if !accepted {
            break;
        }
    }
    gain_ln
}

/// Drop sections that LM pinned at the upper frequency clamp whenever a refit
/// without them matches the data at least as well. The greedy pass sometimes
/// spends a section on a marginal residual tilt, and LM then pushes its
/// corner above the band, where it is nearly constant in range but still
/// biases the remaining parameters. Such a section changes the in-band
/// log-magnitude by under 1%, so when the data never needed it the refit wins
/// and the section goes. Below-band sections are kept: they contribute
/// in-band slope, not a near-constant.
fn prune_pinned_sections(
    omegas: &[f64],
    targets: &[f64],
    mut gain_ln: f64,
    poles: &mut Vec<Section>,
    zeros: &mut Vec<Section>,
) -> f64 {
    let wmax = omegas.iter().copied().fold(0.0f64, f64::max);
    let hi = wmax.ln() + FREQ_OVERHANG;
    let pinned = |s: &Section| {
        let corner = match *s {
            Section::First { c } => c,
            Section::Resonant { omega0, .. } => omega0,
        };
        (corner.ln() - hi).abs() <= 1e-9 * hi.abs().max(1.0)
    };
    let mut best_sse = sse(omegas, targets, gain_ln, poles, zeros);
    loop {
        let pole_order: usize = poles.iter().map(Section::order).sum();
        let zero_order: usize = zeros.iter().map(Section::order).sum();
        let mut candidates: Vec<(bool, usize)> = Vec::new();
        for (i, s) in poles.iter().enumerate() {
            // Dropping a pole must not leave the zero order in excess, or the
            // result would have no proper realization.
            if pinned(s) && pole_order - s.order() >= zero_order {
                candidates.push((false, i));
            }
        }
        for (i, s) in zeros.iter().enumerate() {
            if pinned(s) {
                candidates.push((true, i));
            }
        }
        let mut improved = false;
        for (is_zero, i) in candidates {
            let mut tp = poles.clone();
            let mut tz = zeros.clone();
            if is_zero {
                tz.remove(i);
            } else {
                tp.remove(i);
            }
            let (f0, _) = log_mag_model_and_jacobian(omegas, 0.0, &tp, &tz);
            let g0 = targets.iter().zip(&f0).map(|(&t, &f)| t - f).sum::<f64>()
                / targets.len() as f64;
            let g = refine(omegas, targets, g0, &mut tp, &mut tz);
            let s = sse(omegas, targets, g, &tp, &tz);
            if s <= best_sse {
                *poles = tp;
                *zeros = tz;
                gain_ln = g;
                best_sse = s;
                improved = true;
                break;
            }
        }
        if !improved {
            return gain_ln;
        }
    }
}

/// Realize `gain · Π zeros / Π poles` as a cascade of first- and
/// second-order proper stages. Properness of every stage is arranged by the
/// pairing order; the fit keeps total zero order at or below total pole
/// order, so the pole supply never runs short.
///
/// Numerical scaling matters more than the pairing here: a second-order
/// section realized in raw companion form has entries of size ω₀², and a
/// gain applied to a single stage concentrates the whole dynamic range of
/// the fit in one output row. Both effects multiply through `series` and can
/// leave the cascade's `A` with a norm far beyond what the eigenvalue and
/// Lyapunov solvers downstream handle gracefully. So each second-order stage
/// uses states `(ω₀·x, ẋ)` — entries O(ω₀) — every stage is normalized to
/// unit DC gain, and the overall gain is spread uniformly across the stages.
fn realize(gain_ln: f64, poles: &[Section], zeros: &[Section]) -> Result<StateSpaceModel> {
    let mut first_poles: Vec<f64> = Vec::new();
    let mut res_poles: Vec<(f64, f64)> = Vec::new(); // (b1, b0) of s² + b1 s + b0
    for s in poles {
        match *s {
            Section::First { c } => first_poles.push(c),
            Section::Resonant { omega0, zeta } => {
                res_poles.push((2.0 * zeta * omega0, omega0 * omega0))
            }
        }
    }
    let mut first_zeros: Vec<f64> = Vec::new();
    let mut res_zeros: Vec<(f64, f64)> = Vec::new();
    for s in zeros {
        match *s {
            Section::First { c } => first_zeros.push(c),
            Section::Resonant { omega0, zeta } => {
                res_zeros.push((2.0 * zeta * omega0, omega0 * omega0))
            }
        }
    }
    // Pair fast zeros with fast poles to keep per-stage gains tame.
    first_poles.sort_by(|a, b| a.partial_cmp(b).unwrap());
    first_zeros.sort_by(|a, b| a.partial_cmp(b).unwrap());
    res_poles.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    res_zeros.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());

    // Scaled companion pair for a denominator s² + b1·s + b0: with ω₀ = √b0
    // the state transform diag(ω₀, 1) turns [[0,1],[-b0,-b1]] into the form
    // below, whose entries grow like ω₀ instead of ω₀².
    let companion = |b1: f64, b0: f64| {
        let w0 = b0.sqrt();
        (
            DMatrix::from_row_slice(2, 2, &[0.0, w0, -w0, -b1]),
            DMatrix::from_column_slice(2, 1, &[0.0, 1.0]),
            w0,
        )
    };
    // num = Some((a1, a0)) gives (s² + a1·s + a0)/(s² + b1·s + b0), None the
    // strictly proper 1/(s² + b1·s + b0). Returns the stage and its DC gain.
    let second_order =
        |num: Option<(f64, f64)>, (b1, b0): (f64, f64)| -> Result<(StateSpaceModel, f64)> {
            let (a, b, w0) = companion(b1, b0);
            let (c, d, dc) = match num {
                Some((a1, a0)) => (
                    DMatrix::from_row_slice(1, 2, &[(a0 - b0) / w0, a1 - b1]),
                    DMatrix::from_element(1, 1, 1.0),
                    a0 / b0,
                ),
                None => (
                    DMatrix::from_row_slice(1, 2, &[1.0 / w0, 0.0]),
                    DMatrix::zeros(1, 1),
                    1.0 / b0,
                ),
            };
            Ok((StateSpaceModel::new(a, b, c, d)?, dc))
        };

    let mut stages: Vec<(StateSpaceModel, f64)> = Vec::new();
    while let Some((a1, a0)) = res_zeros.pop() {
        if let Some(den) = res_poles.pop() {
            stages.push(second_order(Some((a1, a0)), den)?);
        } else if first_poles.len() >= 2 {
            let ca = first_poles.pop().unwrap();
            let cb = first_poles.pop().unwrap();
            stages.push(second_order(Some((a1, a0)), (ca + cb, ca * cb))?);
        } else {
            return Err(Error::Numerical(
                "weight realization ran out of poles for a resonant zero".into(),
            ));
        }
    }
    while let Some(cz) = first_zeros.pop() {
        if let Some(cp) = first_poles.pop() {
            stages.push((
                StateSpaceModel::new(
                    DMatrix::from_element(1, 1, -cp),
                    DMatrix::from_element(1, 1, 1.0),
                    DMatrix::from_element(1, 1, cz - cp),
                    DMatrix::from_element(1, 1, 1.0),
                )?,
                cz / cp,
            ));
        } else if let Some((b1, b0)) = res_poles.pop() {
            if let Some(cz2) = first_zeros.pop() {
                stages.push(second_order(Some((cz + cz2, cz * cz2)), (b1, b0))?);
            } else {
                let (a, b, w0) = companion(b1, b0);
                let c = DMatrix::from_row_slice(1, 2, &[cz / w0, 1.0]);
                stages.push((StateSpaceModel::new(a, b, c, DMatrix::zeros(1, 1))?, cz / b0));
            }
        } else {
            return Err(Error::Numerical(
                "weight realization ran out of poles for a first-order zero".into(),
            ));
        }
    }
    for den in res_poles {
        stages.push(second_order(None, den)?);
    }
    for c in first_poles {
        stages.push((
            StateSpaceModel::new(
                DMatrix::from_element(1, 1, -c),
                DMatrix::from_element(1, 1, 1.0),
                DMatrix::from_element(1, 1, 1.0),
                DMatrix::zeros(1, 1),
            )?,
            1.0 / c,
        ));
    }

    if stages.is_empty() {
        return Ok(StateSpaceModel::static_gain(DMatrix::from_element(
            1,
            1,
            gain_ln.exp(),
        )));
    }
    // Every corner frequency is positive, so the per-stage DC gains are all
    // positive and the log-space split below is well defined. Scaling each
    // stage to DC gain exp(total_ln / count) leaves the cascade's transfer
    // function unchanged while keeping every output row the same size.
    let total_ln = gain_ln + stages.iter().map(|(_, dc)| dc.ln()).sum::<f64>();
    let per_stage = (total_ln / stages.len() as f64).exp();
    let mut acc = StateSpaceModel::static_gain(DMatrix::from_element(1, 1, 1.0));
    for (stage, dc) in &stages {
        let s = per_stage / dc;
        let scaled = StateSpaceModel::new(
            stage.a().clone(),
            stage.b().clone(),
            stage.c() * s,
            stage.d() * s,
        )?;
        acc = series(&acc, &scaled)?;
    }
    Ok(acc)
}

/// Fit a stable minimum-phase SISO magnitude model to positive samples over
/// the grid. `order` bounds the denominator degree; `fit_tol` is the quality
/// the caller hopes for — a worse fit is reported (and logged), not failed.
pub fn fit_weight(
    omegas: &[f64],
    samples: &[f64],
    order: usize,
    fit_tol: f64,
) -> Result<FittedWeight> {
    if omegas.is_empty() || omegas.len() != samples.len() {
        return Err(Error::Dimension(format!(
            "got {} frequencies but {} samples",
            omegas.len(),
            samples.len()
        )));
    }
    if omegas.iter().any(|&w| !(w > 0.0) || !w.is_finite()) {
        return Err(Error::Domain("fit frequencies must be positive and finite".into()));
    }
    if samples.iter().any(|&s| !(s > 0.0) || !s.is_finite()) {
        return Err(Error::Domain("magnitude samples must be positive and finite".into()));
    }
    if !(fit_tol > 0.0) {
        return Err(Error::Domain(format!("fit_tol must be positive, got {fit_tol}")));
    }
    let targets: Vec<f64> = samples.iter().map(|&s| s.ln()).collect();

    let (model, pole_roots, zero_roots) = if order == 0 {
        let gain_ln = targets.iter().sum::<f64>() / targets.len() as f64;
        (
            StateSpaceModel::static_gain(DMatrix::from_element(1, 1, gain_ln.exp())),
            Vec::new(),
            Vec::new(),
        )
    } else {
        let (mut poles, mut zeros) = greedy_sections(omegas, &targets, order);
        let (f0, _) = log_mag_model_and_jacobian(omegas, 0.0, &poles, &zeros);
        let gain_ln0 = targets
            .iter()
            .zip(&f0)
            .map(|(&t, &f)| t - f)
            .sum::<f64>()
            / targets.len() as f64;
        let gain_ln = refine(omegas, &targets, gain_ln0, &mut poles, &mut zeros);
        let gain_ln = prune_pinned_sections(omegas, &targets, gain_ln, &mut poles, &mut zeros);
        let model = realize(gain_ln, &poles, &zeros)?;
        let pole_roots: Vec<Complex64> = poles.iter().flat_map(Section::roots).collect();
        let zero_roots: Vec<Complex64> = zeros.iter().flat_map(Section::roots).collect();
        (model, pole_roots, zero_roots)
    };

    let mut fit_error = 0.0f64;
    for (&w, &s) in omegas.iter().zip(samples.iter()) {
        let mag = model.freq_response(w)?[(0, 0)].norm();
        fit_error = fit_error.max((mag - s).abs() / s);
    }
    if fit_error > fit_tol {
        log::warn!(
            "weight fit error {fit_error:.3e} exceeds requested tolerance {fit_tol:.3e} \
             at order {order}"
        );
    }
    Ok(FittedWeight {
        model,
        fit_error,
        poles: pole_roots,
        zeros: zero_roots,
    })
}
