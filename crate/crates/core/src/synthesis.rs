//! Top-down requirement synthesis.
//!
//! Given an accuracy requirement on the closed interconnection — expressed as
//! positive frequency-dependent scalings `v_c(ω)`, `w_c(ω)` such that the
//! interconnected error must satisfy `σ̄(diag(v_c) E_c diag(w_c)) < 1` — this
//! module distributes it over the subsystems. At each frequency it searches
//! for per-channel subsystem scalings `v_j, w_j` and multiplier scalings
//! `d_j` such that the block certificate
//!
//! ```text
//! [ W⁻²(ω) D_r⁻¹   Nᴴ(iω)      ]
//! [ N(iω)          V⁻²(ω) D_ℓ  ]  ≻ 0
//! ```
//!
//! holds, with `V = diag(V_1..V_k, V_c)`, `W = diag(W_1..W_k, W_c)`,
//! `D_ℓ = diag(d_1 I_{m_1}, .., d_k I_{m_k}, d_c I_{p_c})`,
//! `D_r = diag(d_1 I_{p_1}, .., d_k I_{p_k}, d_c I_{m_c})`. Positive
//! definiteness of this matrix guarantees: whenever every subsystem error
//! satisfies its budget `σ̄(W_j⁻¹ E_j V_j⁻¹) ≤ 1`, the interconnected error
//! satisfies the strict requirement above.
//!
//! The search alternates two semidefinite programs per frequency, similar to
//! D-K iteration: with `d` fixed, minimize the weighted traces of
//! `𝒱 = V⁻²`, `𝒲 = W⁻²` (looser budgets mean smaller traces are *not*
//! desirable per se — minimizing trace pushes `v_j, w_j` up, i.e. budgets as
//! loose as the certificate permits); with `V, W` fixed, re-optimize `d` by
//! maximizing the certificate margin. The cost trace is nonincreasing by
//! construction: a new iterate is only accepted if it does not increase the
//! cost and still certifies.
//!
//! Numerical note: requirement scalings span many orders of magnitude (the
//! beam case has `v_c ~ 2·10⁶`, hence fixed diagonal entries `~2.5·10⁻¹³`
//! next to coupling entries `~10⁵`). All positive-definiteness decisions are
//! therefore made after a diagonal congruence (Ruiz equilibration), which
//! preserves definiteness exactly; reported certificate margins are smallest
//! eigenvalues of the equilibrated matrix — a scale-balanced diagnostic, not
//! an absolute eigenvalue.

use nalgebra::linalg::SymmetricEigen;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::freq::{compute_n, sigma_max, FrequencyGrid, NominalMatrix};
use crate::lmi::{self, LmiProblem, SdpOptions, SdpStatus};
use crate::lti::{schur_iteration_cap, InterconnectedSystem, StateSpaceModel};

/// Lower bound for the SDP variables `𝒱, 𝒲` (keeps budgets finite on
/// decoupled channels: `v = 𝒱^{-1/2} ≤ 10⁶`).
const TRACE_VAR_FLOOR: f64 = 1e-12;
/// Bounds for the multiplier scalings `d_j` (projective freedom is removed
/// by pinning `d_c = 1`; the caps keep the SDP bounded).
const D_BOUNDS: (f64, f64) = (1e-6, 1e6);
/// Fixed certificate diagonal entries below this are treated as structurally
/// infeasible: satisfying them would need budgets beyond f64 range.
const STRUCTURAL_FLOOR: f64 = 1e-290;

/// The interconnected-level requirement: per-frequency diagonals of
/// `V_c` (length `p_c`) and `W_c` (length `m_c`).
#[derive(Debug, Clone, PartialEq)]
pub struct RequirementSpec {
    omegas: Vec<f64>,
    v_c: Vec<Vec<f64>>,
    w_c: Vec<Vec<f64>>,
}

impl RequirementSpec {
    pub fn new(omegas: Vec<f64>, v_c: Vec<Vec<f64>>, w_c: Vec<Vec<f64>>) -> Result<Self> {
        if omegas.len() != v_c.len() || omegas.len() != w_c.len() {
            return Err(Error::Dimension(format!(
                "requirement has {} frequencies but {} v_c rows and {} w_c rows",
                omegas.len(),
                v_c.len(),
                w_c.len()
            )));
        }
        if omegas.is_empty() {
            return Err(Error::Domain("requirement must cover at least one frequency".into()));
        }
        let (pc, mc) = (v_c[0].len(), w_c[0].len());
        if pc == 0 || mc == 0 {
            return Err(Error::Domain("requirement needs at least one channel per side".into()));
        }
        for (i, (v, w)) in v_c.iter().zip(&w_c).enumerate() {
            if v.len() != pc || w.len() != mc {
                return Err(Error::Dimension(format!(
                    "requirement row {i} has inconsistent channel counts"
                )));
            }
            if v.iter().chain(w.iter()).any(|&x| !(x > 0.0) || !x.is_finite()) {
                return Err(Error::Domain(format!(
                    "requirement scalings must be positive and finite (row {i})"
                )));
            }
        }
        Ok(Self { omegas, v_c, w_c })
    }

    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }

    pub fn v_c(&self) -> &[Vec<f64>] {
        &self.v_c
    }

    pub fn w_c(&self) -> &[Vec<f64>] {
        &self.w_c
    }

    pub fn p_c(&self) -> usize {
        self.v_c[0].len()
    }

    pub fn m_c(&self) -> usize {
        self.w_c[0].len()
    }
}

/// Derive the interconnected requirement from the β-rule
/// `V_c⁻¹(ω) = max{β₁·|G_c(iω)|, β₂}`, `W_c(ω) = I`.
///
/// For a SISO interconnection `|G_c|` is the response magnitude; for MIMO
/// models the rule is applied per output channel using the row norm of the
/// response (each output's combined gain).
pub fn build_interconnected_requirement(
    gc: &StateSpaceModel,
    grid: &FrequencyGrid,
    beta1: f64,
    beta2: f64,
) -> Result<RequirementSpec> {
    if !(beta1 > 0.0) || !beta1.is_finite() || !(beta2 > 0.0) || !beta2.is_finite() {
        return Err(Error::Domain(format!(
            "beta parameters must be positive and finite, got beta1 = {beta1}, beta2 = {beta2}"
        )));
    }
    let v_c: Vec<Vec<f64>> = grid
        .omegas()
        .par_iter()
        .map(|&omega| -> Result<Vec<f64>> {
            let resp = gc.freq_response(omega)?;
            Ok((0..gc.p())
                .map(|i| {
                    let row_mag =
                        resp.row(i).iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
                    1.0 / (beta1 * row_mag).max(beta2)
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    let w_c = vec![vec![1.0; gc.m()]; grid.len()];
    RequirementSpec::new(grid.omegas().to_vec(), v_c, w_c)
}

/// One frequency's complete set of scalings.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingPoint {
    /// Per subsystem: input-channel scalings `v_j` (length `m_j`).
    pub v: Vec<Vec<f64>>,
    /// Per subsystem: output-channel scalings `w_j` (length `p_j`).
    pub w: Vec<Vec<f64>>,
    /// External-output scalings (length `p_c`).
    pub v_c: Vec<f64>,
    /// External-input scalings (length `m_c`).
    pub w_c: Vec<f64>,
    /// Multiplier scalings `d_1..d_k`.
    pub d: Vec<f64>,
    /// External multiplier scaling (pinned to 1 by synthesis).
    pub d_c: f64,
}

impl ScalingPoint {
    fn validate_positive(&self) -> Result<()> {
        let all_pos = self
            .v
            .iter()
            .chain(self.w.iter())
            .flatten()
            .chain(self.v_c.iter())
            .chain(self.w_c.iter())
            .chain(self.d.iter())
            .chain(std::iter::once(&self.d_c))
            .all(|&x| x > 0.0 && x.is_finite());
        if !all_pos {
            return Err(Error::Domain(
                "scaling entries must be strictly positive and finite".into(),
            ));
        }
        if self.v.len() != self.w.len() || self.v.len() != self.d.len() {
            return Err(Error::Dimension(format!(
                "scaling point has {} v-blocks, {} w-blocks, {} d entries",
                self.v.len(),
                self.w.len(),
                self.d.len()
            )));
        }
        Ok(())
    }
}

/// Channel offsets of the stacked scaling layout against a nominal matrix.
struct Layout {
    v_off: Vec<usize>,
    w_off: Vec<usize>,
    m_b: usize,
    p_b: usize,
    m_c: usize,
    p_c: usize,
}

impl Layout {
    fn new(n: &NominalMatrix, point: &ScalingPoint) -> Result<Self> {
        let mut v_off = Vec::with_capacity(point.v.len());
        let mut w_off = Vec::with_capacity(point.w.len());
        let (mut m_b, mut p_b) = (0, 0);
        for (vj, wj) in point.v.iter().zip(&point.w) {
            v_off.push(m_b);
            w_off.push(p_b);
            m_b += vj.len();
            p_b += wj.len();
        }
        if m_b != n.m_b() || p_b != n.p_b() || point.v_c.len() != n.p_c() || point.w_c.len() != n.m_c()
        {
            return Err(Error::Dimension(format!(
                "scalings cover (m_b={m_b}, p_b={p_b}, p_c={}, m_c={}) but N is (m_b={}, p_b={}, p_c={}, m_c={})",
                point.v_c.len(),
                point.w_c.len(),
                n.m_b(),
                n.p_b(),
                n.p_c(),
                n.m_c()
            )));
        }
        Ok(Self {
            v_off,
            w_off,
            m_b,
            p_b,
            m_c: n.m_c(),
            p_c: n.p_c(),
        })
    }

    /// Dimension of the W-side (upper-left) certificate block.
    fn nw(&self) -> usize {
        self.p_b + self.m_c
    }

    /// Dimension of the V-side (lower-right) certificate block.
    fn nv(&self) -> usize {
        self.m_b + self.p_c
    }
}

/// Assemble the certificate matrix of the module docs at one frequency.
pub fn assemble_certificate(n: &NominalMatrix, point: &ScalingPoint) -> Result<DMatrix<Complex64>> {
    point.validate_positive()?;
    let layout = Layout::new(n, point)?;
    let (nw, nv) = (layout.nw(), layout.nv());
    let mut a = DMatrix::<Complex64>::zeros(nw + nv, nw + nv);
    for (j, wj) in point.w.iter().enumerate() {
        for (ch, &w) in wj.iter().enumerate() {
            let q = layout.w_off[j] + ch;
            a[(q, q)] = Complex64::new(w.powi(-2) / point.d[j], 0.0);
        }
    }
    for (i, &w) in point.w_c.iter().enumerate() {
        let q = layout.p_b + i;
        a[(q, q)] = Complex64::new(w.powi(-2) / point.d_c, 0.0);
    }
    for (j, vj) in point.v.iter().enumerate() {
        for (ch, &v) in vj.iter().enumerate() {
            let q = nw + layout.v_off[j] + ch;
            a[(q, q)] = Complex64::new(v.powi(-2) * point.d[j], 0.0);
        }
    }
    for (i, &v) in point.v_c.iter().enumerate() {
        let q = nw + layout.m_b + i;
        a[(q, q)] = Complex64::new(v.powi(-2) * point.d_c, 0.0);
    }
    let full = n.full();
    for r in 0..nv {
        for c in 0..nw {
            a[(nw + r, c)] = full[(r, c)];
            a[(c, nw + r)] = full[(r, c)].conj();
        }
    }
    if a.iter().any(|e| !e.re.is_finite() || !e.im.is_finite()) {
        return Err(Error::Numerical(
            "certificate entries out of representable range".into(),
        ));
    }
    Ok(a)
}

/// Ruiz equilibration scales for a Hermitian matrix: returns `s` such that
/// `diag(s) M diag(s)` has row infinity-norms near one. Zero rows get `s = 1`.
fn ruiz_scaling(m: &DMatrix<Complex64>, iters: usize) -> Vec<f64> {
    let n = m.nrows();
    let mut s = vec![1.0f64; n];
    for _ in 0..iters {
        for q in 0..n {
            let mut norm = 0.0f64;
            for j in 0..n {
                norm = norm.max(m[(q, j)].norm() * s[q] * s[j]);
            }
            if norm > 0.0 && norm.is_finite() {
                s[q] /= norm.sqrt();
            }
        }
    }
    for v in &mut s {
        *v = v.clamp(1e-150, 1e150);
    }
    s
}

fn congruence(m: &DMatrix<Complex64>, s: &[f64]) -> DMatrix<Complex64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |r, c| m[(r, c)] * (s[r] * s[c]))
}

fn hermitian_min_eig(m: &DMatrix<Complex64>) -> f64 {
    if m.nrows() == 0 {
        return f64::INFINITY;
    }
    let cap = schur_iteration_cap(m.nrows());
    if let Some(e) = SymmetricEigen::try_new(m.clone(), f64::EPSILON, cap) {
        return e.eigenvalues.min();
    }
    match lmi::check_pd(&lmi::embed_hermitian(m)) {
        Ok((_, lam)) => lam,
        Err(_) => f64::NAN,
    }
}

/// Evaluate the certificate at one frequency.
///
/// Returns `(margin > pd_margin, margin)` where the margin is the smallest
/// eigenvalue of the Ruiz-equilibrated certificate matrix (definiteness is
/// congruence-invariant, so the verdict is exact; the magnitude is a
/// scale-balanced diagnostic).
pub fn check_certificate(
    n: &NominalMatrix,
    point: &ScalingPoint,
    pd_margin: f64,
) -> Result<(bool, f64)> {
    let a = assemble_certificate(n, point)?;
    let s = ruiz_scaling(&a, 4);
    let margin = hermitian_min_eig(&congruence(&a, &s));
    Ok((margin > pd_margin, margin))
}

/// Result of one trace-minimization step: budgets and their weighted cost.
#[derive(Debug, Clone)]
pub struct VwStep {
    pub v: Vec<Vec<f64>>,
    pub w: Vec<Vec<f64>>,
    /// `Σ_j α_j (tr 𝒱_j + tr 𝒲_j)` at the returned point.
    pub cost: f64,
}

/// Result of one multiplier step.
#[derive(Debug, Clone)]
pub struct DStep {
    pub d: Vec<f64>,
    /// Certificate margin achieved at the returned `d`: smallest eigenvalue
    /// of the Schur complement equilibrated by `diag(V⁻²D_ℓ)^{-1/2}`, with
    /// the equilibration computed once at the incoming `d` and held fixed.
    pub gamma: f64,
    /// Margin of the incoming `d` in the same metric.
    pub gamma_start: f64,
}

/// With multipliers `d` fixed, find the loosest certifiable budgets:
/// minimize `Σ_j α_j (tr 𝒱_j + tr 𝒲_j)` over diagonal `𝒱 = V⁻², 𝒲 = W⁻²`
/// subject to the certificate LMI (linear in `𝒱, 𝒲`) and the variable floor.
///
/// `req_point` supplies the fixed `v_c, w_c, d_c`; its `v`/`w` entries are
/// ignored apart from their lengths (the channel layout).
pub fn solve_vw_step(
    n: &NominalMatrix,
    req_point: &ScalingPoint,
    alpha: &[f64],
    sdp: &SdpOptions,
) -> Result<VwStep> {
    solve_vw_step_warm(n, req_point, alpha, sdp, None)
}

/// [`solve_vw_step`] with an optional warm start: budgets certifiable at the
/// current multipliers (typically the previous alternation round's accepted
/// iterate), tightened slightly to sit strictly inside the cone.
fn solve_vw_step_warm(
    n: &NominalMatrix,
    req_point: &ScalingPoint,
    alpha: &[f64],
    sdp: &SdpOptions,
    warm: Option<&VwStep>,
) -> Result<VwStep> {
    let layout = Layout::new(n, req_point)?;
    let k = req_point.v.len();
    if alpha.len() != k || alpha.iter().any(|&a| !(a > 0.0) || !a.is_finite()) {
        return Err(Error::Domain(format!(
            "alpha must hold {k} positive finite weights"
        )));
    }
    req_point.validate_positive()?;
    let (nw, nv) = (layout.nw(), layout.nv());
    let total = nw + nv;

    // Constant part: fixed external diagonals and the coupling blocks.
    let mut constant = DMatrix::<Complex64>::zeros(total, total);
    for (i, &w) in req_point.w_c.iter().enumerate() {
        let val = w.powi(-2) / req_point.d_c;
        if val < STRUCTURAL_FLOOR {
            return Err(Error::Infeasible {
                omegas: vec![n.omega],
            });
        }
        constant[(layout.p_b + i, layout.p_b + i)] = Complex64::new(val, 0.0);
    }
    for (i, &v) in req_point.v_c.iter().enumerate() {
        let val = v.powi(-2) * req_point.d_c;
        if val < STRUCTURAL_FLOOR {
            return Err(Error::Infeasible {
                omegas: vec![n.omega],
            });
        }
        let q = nw + layout.m_b + i;
        constant[(q, q)] = Complex64::new(val, 0.0);
    }
    let full = n.full();
    for r in 0..nv {
        for c in 0..nw {
            constant[(nw + r, c)] = full[(r, c)];
            constant[(c, nw + r)] = full[(r, c)].conj();
        }
    }

    // Variables: all 𝒱 channels first (index v_off[j]+ch), then all 𝒲.
    let num_vars = layout.m_b + layout.p_b;
    let mut objective = vec![0.0; num_vars];
    let scale = ruiz_scaling(&constant, 4);
    let mut coeffs: Vec<(usize, DMatrix<Complex64>)> = Vec::with_capacity(num_vars);
    for j in 0..k {
        for ch in 0..req_point.v[j].len() {
            let var = layout.v_off[j] + ch;
            let q = nw + layout.v_off[j] + ch;
            let mut m = DMatrix::<Complex64>::zeros(total, total);
            m[(q, q)] = Complex64::new(req_point.d[j] * scale[q] * scale[q], 0.0);
            coeffs.push((var, m));
            objective[var] = alpha[j];
        }
        for ch in 0..req_point.w[j].len() {
            let var = layout.m_b + layout.w_off[j] + ch;
            let q = layout.w_off[j] + ch;
            let mut m = DMatrix::<Complex64>::zeros(total, total);
            m[(q, q)] = Complex64::new(scale[q] * scale[q] / req_point.d[j], 0.0);
            coeffs.push((var, m));
            objective[var] = alpha[j];
        }
    }

    let mut problem = LmiProblem::new(num_vars, objective)?;
    problem.add_hermitian_block(congruence(&constant, &scale), coeffs)?;
    for var in 0..num_vars {
        problem.add_lower_bound(var, TRACE_VAR_FLOOR)?;
    }

    let mut opts = sdp.clone();
    opts.gap_abs = 1e-13;
    let mut start = warm.and_then(|s| {
        if s.v.len() != k
            || s.w.len() != k
            || (0..k).any(|j| {
                s.v[j].len() != req_point.v[j].len() || s.w[j].len() != req_point.w[j].len()
            })
        {
            return None;
        }
        let mut x0 = vec![0.0; num_vars];
        for j in 0..k {
            for (ch, &v) in s.v[j].iter().enumerate() {
                x0[layout.v_off[j] + ch] = v.powi(-2) * 1.02;
            }
            for (ch, &w) in s.w[j].iter().enumerate() {
                x0[layout.m_b + layout.w_off[j] + ch] = w.powi(-2) * 1.02;
            }
        }
        problem.is_strictly_feasible(&x0).then_some(x0)
    });
    // Analytic interior start: for large enough τ, 𝒱 = 𝒲 = τ·1 certifies
    // (the lower-right corner of the Schur complement tends to the fixed
    // positive external diagonal because the N22 block is zero).
    if start.is_none() {
        let mut tau = 1.0f64;
        while tau < 1e60 {
            let x0 = vec![tau; num_vars];
            if problem.is_strictly_feasible(&x0) {
                start = Some(x0);
                break;
            }
            tau *= 8.0;
        }
    }
    let sol = solve_sdp_checked(&problem, start.as_deref(), &opts, n.omega)?;

    let mut v = Vec::with_capacity(k);
    let mut w = Vec::with_capacity(k);
    for j in 0..k {
        v.push(
            (0..req_point.v[j].len())
                .map(|ch| sol.x[layout.v_off[j] + ch].max(TRACE_VAR_FLOOR).powf(-0.5))
                .collect(),
        );
        w.push(
            (0..req_point.w[j].len())
                .map(|ch| {
                    sol.x[layout.m_b + layout.w_off[j] + ch]
                        .max(TRACE_VAR_FLOOR)
                        .powf(-0.5)
                })
                .collect(),
        );
    }
    Ok(VwStep {
        v,
        w,
        cost: sol.objective,
    })
}

fn solve_sdp_checked(
    problem: &LmiProblem,
    x0: Option<&[f64]>,
    opts: &SdpOptions,
    omega: f64,
) -> Result<lmi::SdpSolution> {
    let sol = lmi::solve_sdp(problem, x0, opts)?;
    match sol.status {
        SdpStatus::Infeasible => Err(Error::Infeasible {
            omegas: vec![omega],
        }),
        SdpStatus::MaxIterations => {
            log::warn!("SDP hit the iteration budget at omega = {omega}; using best iterate");
            Ok(sol)
        }
        SdpStatus::Optimal => Ok(sol),
    }
}

/// With budgets `V, W` fixed, re-optimize the multipliers: maximize `γ` such
/// that (in the equilibrated metric) `V⁻²D_ℓ − N W² D_r Nᴴ ⪰ γ I` over
/// `d_j ∈ [1e-6, 1e6]`, `d_c = 1`.
pub fn solve_d_step(n: &NominalMatrix, point: &ScalingPoint, sdp: &SdpOptions) -> Result<DStep> {
    point.validate_positive()?;
    let layout = Layout::new(n, point)?;
    let k = point.v.len();
    let nvs = layout.nv();
    let full = n.full();

    // Schur-complement constituents: C(d) = Σ_j d_j (Ṽ_j − M_j) + C_0 with
    // M_j = N_j diag(w_j²) N_jᴴ over subsystem j's columns, C_0 holding the
    // external (d_c-weighted) parts.
    let mut coeff = Vec::with_capacity(k);
    for j in 0..k {
        let mut m = DMatrix::<Complex64>::zeros(nvs, nvs);
        for ch in 0..point.w[j].len() {
            let col = layout.w_off[j] + ch;
            let w2 = point.w[j][ch].powi(2);
            for r in 0..nvs {
                for c in 0..nvs {
                    m[(r, c)] -= full[(r, col)] * full[(c, col)].conj() * w2;
                }
            }
        }
        for ch in 0..point.v[j].len() {
            let q = layout.v_off[j] + ch;
            m[(q, q)] += Complex64::new(point.v[j][ch].powi(-2), 0.0);
        }
        coeff.push(m);
    }
    let mut c0 = DMatrix::<Complex64>::zeros(nvs, nvs);
    for i in 0..layout.m_c {
        let col = layout.p_b + i;
        let w2 = point.w_c[i].powi(2) * point.d_c;
        for r in 0..nvs {
            for c in 0..nvs {
                c0[(r, c)] -= full[(r, col)] * full[(c, col)].conj() * w2;
            }
        }
    }
    for i in 0..layout.p_c {
        let q = layout.m_b + i;
        c0[(q, q)] += Complex64::new(point.v_c[i].powi(-2) * point.d_c, 0.0);
    }

    // Jacobi equilibration by the budget diagonal diag(V⁻²D_ℓ) at the
    // incoming d, held fixed for the step. The assembled complement's own
    // diagonal is the wrong scaling source: right after a budget step the
    // complement is binding and its smallest diagonal entry can sit at
    // rounding level, which would blow the scaling up by many orders and
    // leave the solver optimizing noise.
    let mut f_in = c0.clone();
    for (j, m) in coeff.iter().enumerate() {
        f_in += m * Complex64::new(point.d[j], 0.0);
    }
    let mut dl_diag = vec![0.0f64; nvs];
    for j in 0..k {
        for ch in 0..point.v[j].len() {
            dl_diag[layout.v_off[j] + ch] = point.v[j][ch].powi(-2) * point.d[j];
        }
    }
    for i in 0..layout.p_c {
        dl_diag[layout.m_b + i] = point.v_c[i].powi(-2) * point.d_c;
    }
    let s: Vec<f64> = dl_diag
        .iter()
        .map(|&dq| {
            if dq > 1e-300 && dq.is_finite() {
                dq.powf(-0.5)
            } else {
                1.0
            }
        })
        .collect();
    let gamma_start = hermitian_min_eig(&congruence(&f_in, &s));

    let gamma_var = k;
    let mut objective = vec![0.0; k + 1];
    objective[gamma_var] = -1.0;
    let mut problem = LmiProblem::new(k + 1, objective)?;
    let mut coeffs: Vec<(usize, DMatrix<Complex64>)> = Vec::with_capacity(k + 1);
    for (j, m) in coeff.iter().enumerate() {
        coeffs.push((j, congruence(m, &s)));
    }
    let minus_i = DMatrix::from_diagonal_element(nvs, nvs, Complex64::new(-1.0, 0.0));
    coeffs.push((gamma_var, minus_i));
    problem.add_hermitian_block(congruence(&c0, &s), coeffs)?;
    for j in 0..k {
        problem.add_lower_bound(j, D_BOUNDS.0)?;
        problem.add_upper_bound(j, D_BOUNDS.1)?;
    }

    // A strictly interior start always exists: hold the incoming d and push
    // γ far enough below the current smallest eigenvalue. Handing it to the
    // solver keeps phase-1 out of the picture entirely.
    let mut start: Option<Vec<f64>> = None;
    let d0: Vec<f64> = point
        .d
        .iter()
        .map(|&d| d.clamp(D_BOUNDS.0 * 1.001, D_BOUNDS.1 * 0.999))
        .collect();
    let gap = gamma_start.abs().max(1.0);
    for factor in [0.1, 0.5, 2.0, 10.0, 1e3, 1e6] {
        let mut x0 = d0.clone();
        x0.push(gamma_start - gap * factor);
        if problem.is_strictly_feasible(&x0) {
            start = Some(x0);
            break;
        }
    }
    let mut opts = sdp.clone();
    // γ only needs enough digits to steer the alternation; never chase it
    // below 1e-9 in the equilibrated metric.
    opts.gap_abs = sdp.gap_abs.max(1e-9);
    let sol = solve_sdp_checked(&problem, start.as_deref(), &opts, n.omega)?;
    Ok(DStep {
        d: sol.x[..k].to_vec(),
        gamma: sol.x[gamma_var],
        gamma_start,
    })
}

/// Synthesis tuning knobs.
#[derive(Debug, Clone)]
pub struct SynthesisOptions {
    /// Per-subsystem cost weights (Remark-style control over the budget
    /// distribution); empty means all ones. Raising `α_j` weakly loosens
    /// subsystem `j`'s budget product `v_j w_j`.
    pub alpha: Vec<f64>,
    /// Stop the alternation when the relative cost decrease drops below this.
    pub conv_tol: f64,
    /// Maximum alternation rounds per frequency.
    pub max_outer: usize,
    /// Feasibility tolerance handed to the SDP solver.
    pub feas_tol: f64,
    /// Relative duality-gap tolerance handed to the SDP solver.
    pub gap_tol: f64,
}

impl Default for SynthesisOptions {
    fn default() -> Self {
        Self {
            alpha: Vec::new(),
            conv_tol: 1e-3,
            max_outer: 20,
            feas_tol: 1e-8,
            // Budgets feed σ̄ comparisons against 1; six relative digits per
            // step is far below anything the checks can resolve, and each
            // extra digit costs another barrier stage per solve.
            gap_tol: 1e-6,
        }
    }
}

/// One frequency's synthesized scalings, with iteration diagnostics.
#[derive(Debug, Clone)]
pub struct OmegaScalings {
    pub omega: f64,
    pub point: ScalingPoint,
    /// Weighted trace cost of the final iterate (NaN when infeasible).
    pub cost: f64,
    /// Cost after each alternation round (nonincreasing).
    pub cost_trace: Vec<f64>,
    /// Equilibrated certificate margin at the stored point (NaN when
    /// infeasible).
    pub margin: f64,
    pub feasible: bool,
}

/// Scalings synthesized for every grid frequency.
#[derive(Debug, Clone)]
pub struct ScalingSolution {
    /// Per-subsystem channel dimensions `(m_j, p_j)`.
    pub dims: Vec<(usize, usize)>,
    /// One entry per grid frequency, in grid order.
    pub entries: Vec<OmegaScalings>,
}

impl ScalingSolution {
    pub fn infeasible_omegas(&self) -> Vec<f64> {
        self.entries
            .iter()
            .filter(|e| !e.feasible)
            .map(|e| e.omega)
            .collect()
    }

    /// Panic-free invariant sweep used by tests and validation: positive
    /// entries and nonincreasing cost traces on feasible frequencies.
    pub fn validate(&self) -> Result<()> {
        for e in &self.entries {
            if !e.feasible {
                continue;
            }
            e.point.validate_positive()?;
            for pair in e.cost_trace.windows(2) {
                if pair[1] > pair[0] + 1e-9 {
                    return Err(Error::Numerical(format!(
                        "cost trace increases at omega {}: {} -> {}",
                        e.omega, pair[0], pair[1]
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Per-frequency alternation (see module docs). Never fails on per-frequency
/// infeasibility — such frequencies are flagged instead.
pub fn synthesize_requirements_partial(
    sys: &InterconnectedSystem,
    grid: &FrequencyGrid,
    req: &RequirementSpec,
    opts: &SynthesisOptions,
) -> Result<ScalingSolution> {
    let k = sys.subsystems().len();
    let dims = sys.channel_dims();
    if req.omegas().len() != grid.len()
        || req
            .omegas()
            .iter()
            .zip(grid.omegas())
            .any(|(a, b)| (a - b).abs() > 1e-12 * b.abs())
    {
        return Err(Error::Dimension(
            "requirement grid does not match the synthesis grid".into(),
        ));
    }
    if req.p_c() != sys.p_c() || req.m_c() != sys.m_c() {
        return Err(Error::Dimension(format!(
            "requirement channels ({}, {}) do not match the interconnection ({}, {})",
            req.p_c(),
            req.m_c(),
            sys.p_c(),
            sys.m_c()
        )));
    }
    let alpha: Vec<f64> = if opts.alpha.is_empty() {
        vec![1.0; k]
    } else {
        opts.alpha.clone()
    };
    if alpha.len() != k || alpha.iter().any(|&a| !(a > 0.0) || !a.is_finite()) {
        return Err(Error::Domain(format!(
            "alpha must hold {k} positive finite weights"
        )));
    }
    if !(opts.conv_tol > 0.0) || opts.max_outer == 0 {
        return Err(Error::Domain(
            "synthesis needs conv_tol > 0 and max_outer >= 1".into(),
        ));
    }
    let sdp = SdpOptions {
        feas_tol: opts.feas_tol,
        gap_tol: opts.gap_tol,
        // The multiplier step reads this as its γ floor (its objective is
        // O(1) in the equilibrated metric); the budget step keeps its own
        // much smaller floor for near-decoupled channels.
        gap_abs: 1e-5,
        ..SdpOptions::default()
    };

    let entries: Vec<OmegaScalings> = (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let omega = grid.omegas()[idx];
            synthesize_at(
                sys,
                omega,
                &dims,
                &req.v_c()[idx],
                &req.w_c()[idx],
                &alpha,
                opts,
                &sdp,
            )
        })
        .collect::<Result<Vec<_>>>()?;

    let solution = ScalingSolution { dims, entries };
    solution.validate()?;
    Ok(solution)
}

/// Strict variant: errors (listing the offending frequencies) if any grid
/// point is infeasible. Use [`synthesize_requirements_partial`] to retrieve
/// partial results instead.
pub fn synthesize_requirements(
    sys: &InterconnectedSystem,
    grid: &FrequencyGrid,
    req: &RequirementSpec,
    opts: &SynthesisOptions,
) -> Result<ScalingSolution> {
    let solution = synthesize_requirements_partial(sys, grid, req, opts)?;
    let bad = solution.infeasible_omegas();
    if !bad.is_empty() {
        return Err(Error::Infeasible { omegas: bad });
    }
    Ok(solution)
}

#[allow(clippy::too_many_arguments)]
fn synthesize_at(
    sys: &InterconnectedSystem,
    omega: f64,
    dims: &[(usize, usize)],
    v_c: &[f64],
    w_c: &[f64],
    alpha: &[f64],
    opts: &SynthesisOptions,
    sdp: &SdpOptions,
) -> Result<OmegaScalings> {
    let infeasible = |omega: f64| OmegaScalings {
        omega,
        point: ScalingPoint {
            v: dims.iter().map(|&(m, _)| vec![f64::NAN; m]).collect(),
            w: dims.iter().map(|&(_, p)| vec![f64::NAN; p]).collect(),
            v_c: v_c.to_vec(),
            w_c: w_c.to_vec(),
            d: vec![1.0; dims.len()],
            d_c: 1.0,
        },
        cost: f64::NAN,
        cost_trace: Vec::new(),
        margin: f64::NAN,
        feasible: false,
    };

    let n = match compute_n(sys, omega) {
        Ok(n) => n,
        Err(Error::IllPosedAt { .. }) | Err(Error::PoleAtFrequency { .. }) => {
            log::warn!("nominal matrix undefined at omega = {omega}; marking infeasible");
            return Ok(infeasible(omega));
        }
        Err(e) => return Err(e),
    };

    // Template carrying the fixed parts; v/w entries are placeholders whose
    // lengths define the layout.
    let template = |v: Vec<Vec<f64>>, w: Vec<Vec<f64>>, d: Vec<f64>| ScalingPoint {
        v,
        w,
        v_c: v_c.to_vec(),
        w_c: w_c.to_vec(),
        d,
        d_c: 1.0,
    };
    let ones_point = |d: Vec<f64>| {
        template(
            dims.iter().map(|&(m, _)| vec![1.0; m]).collect(),
            dims.iter().map(|&(_, p)| vec![1.0; p]).collect(),
            d,
        )
    };

    let mut d = vec![1.0; dims.len()];
    let mut step = match solve_vw_step(&n, &ones_point(d.clone()), alpha, sdp) {
        Ok(s) => s,
        Err(Error::Infeasible { .. }) => return Ok(infeasible(omega)),
        Err(e) => return Err(e),
    };
    let mut margin = match certify_with_pullback(&n, &mut step, &template, &d) {
        Some(m) => m,
        None => return Ok(infeasible(omega)),
    };
    let mut trace = vec![step.cost];

    for _ in 1..opts.max_outer {
        let prev_cost = step.cost;
        let current = template(step.v.clone(), step.w.clone(), d.clone());
        if let Ok(ds) = solve_d_step(&n, &current, sdp) {
            if ds.gamma > 0.0 && ds.gamma.is_finite() {
                let candidate = template(step.v.clone(), step.w.clone(), ds.d.clone());
                if let Ok((true, m)) = check_certificate(&n, &candidate, 0.0) {
                    d = ds.d;
                    margin = m;
                    // The margin-optimal multiplier move is conservative when
                    // the optimum lies far from the incoming point (the step's
                    // equilibration is anchored there), so extend the move
                    // geometrically in log space for as long as the
                    // certificate keeps holding at the current budgets.
                    let dir: Vec<f64> = d
                        .iter()
                        .zip(&current.d)
                        .map(|(&to, &from)| (to.max(1e-300) / from.max(1e-300)).ln())
                        .collect();
                    if dir.iter().any(|&g| g.abs() > 1e-12) {
                        for kappa in [2.0, 4.0, 8.0, 16.0, 32.0] {
                            let cand_d: Vec<f64> = current
                                .d
                                .iter()
                                .zip(&dir)
                                .map(|(&from, &g)| {
                                    (from.ln() + kappa * g)
                                        .exp()
                                        .clamp(D_BOUNDS.0, D_BOUNDS.1)
                                })
                                .collect();
                            if cand_d == d {
                                break;
                            }
                            let trial = template(step.v.clone(), step.w.clone(), cand_d.clone());
                            match check_certificate(&n, &trial, 0.0) {
                                Ok((true, m2)) => {
                                    d = cand_d;
                                    margin = m2;
                                }
                                _ => break,
                            }
                        }
                    }
                }
            }
        }
        match solve_vw_step_warm(&n, &ones_point(d.clone()), alpha, sdp, Some(&step)) {
            Ok(mut next) => {
                if let Some(m) = certify_with_pullback(&n, &mut next, &template, &d) {
                    if next.cost <= step.cost {
                        step = next;
                        margin = m;
                    }
                }
            }
            Err(Error::Infeasible { .. }) => break,
            Err(e) => return Err(e),
        }
        trace.push(step.cost);
        let rel = (prev_cost - step.cost) / prev_cost.abs().max(1e-300);
        if rel < opts.conv_tol {
            break;
        }
    }

    Ok(OmegaScalings {
        omega,
        point: template(step.v.clone(), step.w.clone(), d),
        cost: step.cost,
        cost_trace: trace,
        margin,
        feasible: true,
    })
}

/// Confirm the canonical certificate at a V-W iterate, tightening the budgets
/// slightly (which can only increase definiteness) if eigenvalue noise puts
/// the margin at or below zero. Returns the certified margin, or `None` if
/// even substantial tightening fails.
fn certify_with_pullback(
    n: &NominalMatrix,
    step: &mut VwStep,
    template: &impl Fn(Vec<Vec<f64>>, Vec<Vec<f64>>, Vec<f64>) -> ScalingPoint,
    d: &[f64],
) -> Option<f64> {
    for _ in 0..60 {
        let point = template(step.v.clone(), step.w.clone(), d.to_vec());
        match check_certificate(n, &point, 0.0) {
            Ok((true, m)) => return Some(m),
            Ok((false, _)) => {
                let shrink = 1.01f64.powf(-0.5);
                for vj in step.v.iter_mut().chain(step.w.iter_mut()) {
                    for x in vj.iter_mut() {
                        *x *= shrink;
                    }
                }
                step.cost *= 1.01;
            }
            Err(_) => return None,
        }
    }
    None
}

/// Subsystem budget check: `σ̄(diag(w)⁻¹ · E · diag(v)⁻¹) ≤ 1 + slack`
/// (non-strict). Returns `(pass, 1 - σ̄)`.
pub fn check_subsystem_requirement(
    e: &DMatrix<Complex64>,
    v: &[f64],
    w: &[f64],
    slack: f64,
) -> Result<(bool, f64)> {
    if e.nrows() != w.len() || e.ncols() != v.len() {
        return Err(Error::Dimension(format!(
            "error response is {}x{} but scalings are ({}, {})",
            e.nrows(),
            e.ncols(),
            w.len(),
            v.len()
        )));
    }
    if v.iter().chain(w.iter()).any(|&x| !(x > 0.0)) {
        return Err(Error::Domain("scalings must be strictly positive".into()));
    }
    let weighted = DMatrix::from_fn(e.nrows(), e.ncols(), |r, c| e[(r, c)] / (w[r] * v[c]));
    let sigma = sigma_max(&weighted);
    Ok((sigma <= 1.0 + slack, 1.0 - sigma))
}

/// Interconnected requirement check: `σ̄(diag(v_c) · E_c · diag(w_c)) < 1 +
/// slack` (strict). Returns `(pass, 1 - σ̄)`.
pub fn check_interconnected_requirement(
    e: &DMatrix<Complex64>,
    v_c: &[f64],
    w_c: &[f64],
    slack: f64,
) -> Result<(bool, f64)> {
    if e.nrows() != v_c.len() || e.ncols() != w_c.len() {
        return Err(Error::Dimension(format!(
            "error response is {}x{} but scalings are ({}, {})",
            e.nrows(),
            e.ncols(),
            v_c.len(),
            w_c.len()
        )));
    }
    if v_c.iter().chain(w_c.iter()).any(|&x| !(x > 0.0)) {
        return Err(Error::Domain("scalings must be strictly positive".into()));
    }
    let weighted = DMatrix::from_fn(e.nrows(), e.ncols(), |r, c| e[(r, c)] * (v_c[r] * w_c[c]));
    let sigma = sigma_max(&weighted);
    Ok((sigma < 1.0 + slack, 1.0 - sigma))
}
