//! A small, self-contained interior-point solver for linear matrix
//! inequalities.
//!
//! Problems have the form
//!
//! ```text
//! minimize    cᵀx
//! subject to  F_b(x) = F_{b,0} + Σ_i x_i F_{b,i} ⪰ 0   for every block b
//! ```
//!
//! with real symmetric blocks. Complex Hermitian blocks are accepted and
//! embedded as `[[Re M, -Im M], [Im M, Re M]]`, which is positive definite
//! exactly when the Hermitian original is. Scalar bounds are 1×1 blocks.
//!
//! The solver is a standard logarithmic-barrier method: for increasing `t` it
//! centers `t·cᵀx - Σ_b ln det F_b(x)` with damped Newton steps, stopping when
//! the barrier duality gap `ν/t` (ν = total constraint dimension) is below
//! `gap_tol` relative to the objective magnitude. When no strictly feasible
//! start is supplied (or the supplied one fails a Cholesky check), a phase-I
//! problem `minimize s  s.t.  F_b(x) + s I ⪰ 0` is solved first; `s* >
//! feas_tol` reports infeasibility.
//!
//! Everything here is dense and aimed at the small, well-structured problems
//! produced by requirement synthesis (tens of variables, block dimensions in
//! the tens); it is deliberately not a general-purpose SDP code.

use nalgebra::linalg::{Cholesky, SymmetricEigen};
use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lti::schur_iteration_cap;

/// One symmetric coefficient entry `(row, col, value)` with `row <= col`; the
/// mirrored entry is implied.
type Triplet = (usize, usize, f64);

#[derive(Debug, Clone)]
struct Block {
    dim: usize,
    constant: DMatrix<f64>,
    /// Per-variable sparse symmetric coefficients (upper triangle).
    coeffs: Vec<(usize, Vec<Triplet>)>,
}

impl Block {
    fn assemble(&self, x: &[f64]) -> DMatrix<f64> {
        let mut f = self.constant.clone();
        for (var, triplets) in &self.coeffs {
            let xv = x[*var];
            for &(r, c, v) in triplets {
                f[(r, c)] += xv * v;
                if r != c {
                    f[(c, r)] += xv * v;
                }
            }
        }
        f
    }
}

/// Symmetric-part extraction with a relative asymmetry cap.
fn symmetrize_checked(m: &DMatrix<f64>, what: &str) -> Result<DMatrix<f64>> {
    if m.nrows() != m.ncols() {
        return Err(Error::Dimension(format!(
            "{what} must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let scale = m.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1.0);
    let asym = (m - m.transpose()).iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if asym > 1e-12 * scale {
        return Err(Error::Domain(format!(
            "{what} is not symmetric (asymmetry {asym:.3e} at scale {scale:.3e})"
        )));
    }
    Ok((m + m.transpose()) * 0.5)
}

fn hermitian_checked(m: &DMatrix<Complex64>, what: &str) -> Result<DMatrix<Complex64>> {
    if m.nrows() != m.ncols() {
        return Err(Error::Dimension(format!(
            "{what} must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let scale = m.iter().fold(0.0f64, |a, v| a.max(v.norm())).max(1.0);
    let herm_err = (m - m.adjoint()).iter().fold(0.0f64, |a, v| a.max(v.norm()));
    if herm_err > 1e-12 * scale {
        return Err(Error::Domain(format!(
            "{what} is not Hermitian (deviation {herm_err:.3e} at scale {scale:.3e})"
        )));
    }
    Ok((m + m.adjoint()) * Complex64::new(0.5, 0.0))
}

/// Real embedding `[[Re M, -Im M], [Im M, Re M]]` of a complex matrix. For
/// Hermitian `M` the embedding is symmetric with the same eigenvalues, each
/// doubled in multiplicity.
pub fn embed_hermitian(m: &DMatrix<Complex64>) -> DMatrix<f64> {
    let n = m.nrows();
    let mut e = DMatrix::zeros(2 * n, 2 * n);
    for r in 0..n {
        for c in 0..m.ncols() {
            let v = m[(r, c)];
            e[(r, c)] = v.re;
            e[(r, c + n)] = -v.im;
            e[(r + n, c)] = v.im;
            e[(r + n, c + n)] = v.re;
        }
    }
    e
}

fn upper_triplets(m: &DMatrix<f64>) -> Vec<Triplet> {
    let mut t = Vec::new();
    for r in 0..m.nrows() {
        for c in r..m.ncols() {
            let v = if r == c {
                m[(r, c)]
            } else {
                0.5 * (m[(r, c)] + m[(c, r)])
            };
            if v != 0.0 {
                t.push((r, c, v));
            }
        }
    }
    t
}

/// Smallest eigenvalue of a symmetric matrix, with a Gershgorin lower bound
/// as fallback if the iteration fails to converge.
fn min_eig_sym(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return f64::INFINITY;
    }
    let cap = schur_iteration_cap(m.nrows());
    if let Some(eig) = SymmetricEigen::try_new(m.clone(), f64::EPSILON, cap) {
        return eig.eigenvalues.min();
    }
    (0..m.nrows())
        .map(|i| {
            let off: f64 = (0..m.ncols())
                .filter(|&j| j != i)
                .map(|j| m[(i, j)].abs())
                .sum();
            m[(i, i)] - off
        })
        .fold(f64::INFINITY, f64::min)
}

/// Positive-definiteness test for a real symmetric matrix.
///
/// Returns `(is_pd, min_eigenvalue)`. Rejects matrices whose asymmetry
/// exceeds `1e-12` relative to their largest entry.
pub fn check_pd(m: &DMatrix<f64>) -> Result<(bool, f64)> {
    let s = symmetrize_checked(m, "matrix")?;
    let lam = min_eig_sym(&s);
    Ok((lam > 0.0, lam))
}

/// Positive-definiteness test for a complex Hermitian matrix.
pub fn check_pd_complex(m: &DMatrix<Complex64>) -> Result<(bool, f64)> {
    let h = hermitian_checked(m, "matrix")?;
    if h.nrows() == 0 {
        return Ok((true, f64::INFINITY));
    }
    let cap = schur_iteration_cap(h.nrows());
    let lam = match SymmetricEigen::try_new(h.clone(), f64::EPSILON, cap) {
        Some(eig) => eig.eigenvalues.min(),
        None => min_eig_sym(&embed_hermitian(&h)),
    };
    Ok((lam > 0.0, lam))
}

/// An LMI feasibility/optimization problem in the form described in the
/// module docs.
#[derive(Debug, Clone)]
pub struct LmiProblem {
    num_vars: usize,
    objective: Vec<f64>,
    blocks: Vec<Block>,
}

impl LmiProblem {
    /// A problem over `num_vars` scalar variables minimizing `objective·x`.
    pub fn new(num_vars: usize, objective: Vec<f64>) -> Result<Self> {
        if num_vars == 0 {
            return Err(Error::Domain("LMI problem needs at least one variable".into()));
        }
        if objective.len() != num_vars {
            return Err(Error::Dimension(format!(
                "objective has {} entries for {} variables",
                objective.len(),
                num_vars
            )));
        }
        if objective.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("objective must be finite".into()));
        }
        Ok(Self {
            num_vars,
            objective,
            blocks: Vec::new(),
        })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    /// Add a real symmetric block `constant + Σ x_i coeff_i ⪰ 0`.
    pub fn add_real_block(
        &mut self,
        constant: DMatrix<f64>,
        coeffs: Vec<(usize, DMatrix<f64>)>,
    ) -> Result<()> {
        let f0 = symmetrize_checked(&constant, "block constant")?;
        let dim = f0.nrows();
        let mut cs = Vec::with_capacity(coeffs.len());
        for (var, m) in coeffs {
            if var >= self.num_vars {
                return Err(Error::Dimension(format!(
                    "coefficient references variable {var} of {}",
                    self.num_vars
                )));
            }
            let s = symmetrize_checked(&m, "block coefficient")?;
            if s.nrows() != dim {
                return Err(Error::Dimension(format!(
                    "coefficient is {}x{} in a block of dimension {dim}",
                    s.nrows(),
                    s.ncols()
                )));
            }
            cs.push((var, upper_triplets(&s)));
        }
        self.blocks.push(Block {
            dim,
            constant: f0,
            coeffs: cs,
        });
        Ok(())
    }

    /// Add a complex Hermitian block via its real embedding.
    pub fn add_hermitian_block(
        &mut self,
        constant: DMatrix<Complex64>,
        coeffs: Vec<(usize, DMatrix<Complex64>)>,
    ) -> Result<()> {
        let f0 = hermitian_checked(&constant, "block constant")?;
        let dim = f0.nrows();
        let mut real_coeffs = Vec::with_capacity(coeffs.len());
        for (var, m) in coeffs {
            let h = hermitian_checked(&m, "block coefficient")?;
            if h.nrows() != dim {
                return Err(Error::Dimension(format!(
                    "coefficient is {}x{} in a block of dimension {dim}",
                    h.nrows(),
                    h.ncols()
                )));
            }
            real_coeffs.push((var, embed_hermitian(&h)));
        }
        self.add_real_block(embed_hermitian(&f0), real_coeffs)
    }

    /// Constrain `x[var] >= bound` (adds a 1×1 block).
    pub fn add_lower_bound(&mut self, var: usize, bound: f64) -> Result<()> {
        self.add_real_block(
            DMatrix::from_element(1, 1, -bound),
            vec![(var, DMatrix::from_element(1, 1, 1.0))],
        )
    }

    /// Constrain `x[var] <= bound` (adds a 1×1 block).
    pub fn add_upper_bound(&mut self, var: usize, bound: f64) -> Result<()> {
        self.add_real_block(
            DMatrix::from_element(1, 1, bound),
            vec![(var, DMatrix::from_element(1, 1, -1.0))],
        )
    }

    /// Smallest eigenvalue over all assembled blocks at the point `x`.
    pub fn evaluate_min_eig(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.num_vars {
            return Err(Error::Dimension(format!(
                "point has {} entries for {} variables",
                x.len(),
                self.num_vars
            )));
        }
        Ok(self
            .blocks
            .iter()
            .map(|b| min_eig_sym(&b.assemble(x)))
            .fold(f64::INFINITY, f64::min))
    }

    fn total_dim(&self) -> usize {
        self.blocks.iter().map(|b| b.dim).sum()
    }

    /// Whether every block passes a Cholesky factorization at `x` (numerical
    /// strict feasibility). Useful for constructing warm starts.
    pub fn is_strictly_feasible(&self, x: &[f64]) -> bool {
        x.len() == self.num_vars
            && self
                .blocks
                .iter()
                .all(|b| Cholesky::new(b.assemble(x)).is_some())
    }
}

/// Solver knobs. The defaults suit the synthesis problems in this crate.
#[derive(Debug, Clone)]
pub struct SdpOptions {
    /// Phase-I slack above which the problem is declared infeasible.
    pub feas_tol: f64,
    /// Relative duality-gap target for the barrier.
    pub gap_tol: f64,
    /// Absolute duality-gap floor; stops once `ν/t` falls below
    /// `max(gap_tol·|cᵀx|, gap_abs)`. Lower it when optimal objectives are
    /// themselves tiny (e.g. trace minimization against 1e-12 bounds).
    pub gap_abs: f64,
    /// Maximum barrier (outer) iterations.
    pub max_outer: usize,
    /// Maximum Newton steps per centering.
    pub max_newton: usize,
    /// Barrier parameter growth factor.
    pub mu: f64,
}

impl Default for SdpOptions {
    fn default() -> Self {
        Self {
            feas_tol: 1e-8,
            gap_tol: 1e-8,
            gap_abs: 1e-12,
            max_outer: 200,
            max_newton: 80,
            mu: 20.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SdpStatus {
    /// Converged to the requested relative duality gap.
    Optimal,
    /// Phase-I established that no strictly feasible point exists (within
    /// `feas_tol`).
    Infeasible,
    /// Iteration budget exhausted before reaching the gap target; `x` holds
    /// the best feasible iterate.
    MaxIterations,
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub status: SdpStatus,
    pub x: Vec<f64>,
    /// `objective · x` (NaN when infeasible).
    pub objective: f64,
    /// Smallest block eigenvalue at `x`; for infeasible problems, the
    /// (negative) best achievable margin found by phase-I.
    pub min_eig_margin: f64,
}

/// Barrier objective `t·cᵀx - Σ ln det F_b(x)`, or `None` outside the domain.
fn barrier_value(blocks: &[Block], c: &[f64], t: f64, x: &[f64]) -> Option<f64> {
    let mut val = t * dot(c, x);
    for b in blocks {
        let logdet = if b.dim == 1 {
            let mut s = b.constant[(0, 0)];
            for (var, triplets) in &b.coeffs {
                s += x[*var] * triplets.iter().map(|t| t.2).sum::<f64>();
            }
            if !(s > 0.0) {
                return None;
            }
            s.ln()
        } else {
            let chol = Cholesky::new(b.assemble(x))?;
            chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>() * 2.0
        };
        if !logdet.is_finite() {
            return None;
        }
        val -= logdet;
    }
    Some(val)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// One Newton direction for the barrier at `x`. Returns `(delta, lambda²)`
/// with `lambda²` the Newton decrement squared, or `None` on numerical
/// breakdown.
fn newton_direction(blocks: &[Block], c: &[f64], t: f64, x: &[f64]) -> Option<(Vec<f64>, f64)> {
    let nv = x.len();
    let mut g: Vec<f64> = c.iter().map(|ci| t * ci).collect();
    let mut h = DMatrix::<f64>::zeros(nv, nv);
    for b in blocks {
        if b.dim == 1 {
            // Scalar constraint: F = s > 0, gradient -v/s, Hessian v·v'/s².
            let weight = |triplets: &[Triplet]| triplets.iter().map(|t| t.2).sum::<f64>();
            let mut s = b.constant[(0, 0)];
            for (var, triplets) in &b.coeffs {
                s += x[*var] * weight(triplets);
            }
            if !(s > 0.0) {
                return None;
            }
            for (vi, ti) in &b.coeffs {
                let wi = weight(ti);
                g[*vi] -= wi / s;
                for (vj, tj) in &b.coeffs {
                    h[(*vi, *vj)] += wi * weight(tj) / (s * s);
                }
            }
            continue;
        }
        let chol = Cholesky::new(b.assemble(x))?;
        let finv = chol.inverse();
        // Gradient: -tr(F⁻¹ F_i); Hessian: tr(F⁻¹ F_i F⁻¹ F_j). For a
        // coefficient matrix that is purely diagonal the Hessian entry against
        // another diagonal one collapses to Σ v_d v_e (F⁻¹)_{de}², so X_i is
        // only materialized for coefficients with off-diagonal structure.
        let diag_only: Vec<bool> = b
            .coeffs
            .iter()
            .map(|(_, triplets)| triplets.iter().all(|&(r, cc, _)| r == cc))
            .collect();
        let mut xi_mats: Vec<Option<DMatrix<f64>>> = vec![None; b.coeffs.len()];
        for (idx, (var, triplets)) in b.coeffs.iter().enumerate() {
            let mut tr = 0.0;
            for &(r, cc, v) in triplets {
                tr += v * finv[(r, cc)] * if r == cc { 1.0 } else { 2.0 };
            }
            g[*var] -= tr;
            if !diag_only[idx] {
                // X_i = F⁻¹ F_i F⁻¹ via two dense products.
                let n = b.dim;
                let mut fi = DMatrix::<f64>::zeros(n, n);
                for &(r, cc, v) in triplets {
                    fi[(r, cc)] += v;
                    if r != cc {
                        fi[(cc, r)] += v;
                    }
                }
                xi_mats[idx] = Some(&finv * fi * &finv);
            }
        }
        for (i, (vi, triplets_i)) in b.coeffs.iter().enumerate() {
            for (j, (vj, triplets_j)) in b.coeffs.iter().enumerate().skip(i) {
                let hij = if let Some(xi) = &xi_mats[i] {
                    let mut acc = 0.0;
                    for &(r, cc, v) in triplets_j {
                        acc += v * xi[(r, cc)] * if r == cc { 1.0 } else { 2.0 };
                    }
                    acc
                } else if let Some(xj) = &xi_mats[j] {
                    let mut acc = 0.0;
                    for &(r, cc, v) in triplets_i {
                        acc += v * xj[(r, cc)] * if r == cc { 1.0 } else { 2.0 };
                    }
                    acc
                } else {
                    let mut acc = 0.0;
                    for &(r, _, v1) in triplets_i {
                        for &(s, _, v2) in triplets_j {
                            let f = finv[(r, s)];
                            acc += v1 * v2 * f * f;
                        }
                    }
                    acc
                };
                h[(*vi, *vj)] += hij;
                if vi != vj {
                    h[(*vj, *vi)] += hij;
                }
            }
        }
    }
    // Jacobi-scaled, ridge-regularized solve of H δ = -g.
    let hmax = (0..nv).fold(0.0f64, |a, i| a.max(h[(i, i)]));
    if !(hmax > 0.0) || !hmax.is_finite() {
        return None;
    }
    let d: Vec<f64> = (0..nv).map(|i| h[(i, i)].max(1e-16 * hmax).sqrt()).collect();
    let mut hs = DMatrix::<f64>::zeros(nv, nv);
    for i in 0..nv {
        for j in 0..nv {
            hs[(i, j)] = h[(i, j)] / (d[i] * d[j]);
        }
    }
    let gs: Vec<f64> = (0..nv).map(|i| g[i] / d[i]).collect();
    let mut ridge = 0.0;
    for attempt in 0..14 {
        let mut m = hs.clone();
        for i in 0..nv {
            m[(i, i)] += ridge;
        }
        if let Some(chol) = Cholesky::new(m) {
            let mut rhs = nalgebra::DVector::from_column_slice(&gs);
            chol.solve_mut(&mut rhs);
            let delta: Vec<f64> = (0..nv).map(|i| -rhs[i] / d[i]).collect();
            let lambda2 = -dot(&g, &delta);
            if delta.iter().all(|v| v.is_finite()) && lambda2.is_finite() && lambda2 >= 0.0 {
                return Some((delta, lambda2));
            }
        }
        ridge = if attempt == 0 { 1e-14 } else { ridge * 100.0 };
    }
    None
}

/// Center the barrier at fixed `t`. Returns `false` on stall. After each
/// accepted step, `early_exit` may end the centering (used by phase-I).
fn center(
    blocks: &[Block],
    c: &[f64],
    t: f64,
    x: &mut Vec<f64>,
    opts: &SdpOptions,
    mut early_exit: impl FnMut(&[f64]) -> bool,
) -> bool {
    for _ in 0..opts.max_newton {
        let Some((delta, lambda2)) = newton_direction(blocks, c, t, x) else {
            return false;
        };
        if lambda2 * 0.5 <= 1e-11 {
            return true;
        }
        let phi0 = match barrier_value(blocks, c, t, x) {
            Some(v) => v,
            None => return false,
        };
        let mut alpha = 1.0f64;
        let mut stepped = false;
        while alpha >= 1e-18 {
            let xt: Vec<f64> = x.iter().zip(&delta).map(|(xi, di)| xi + alpha * di).collect();
            if let Some(phi) = barrier_value(blocks, c, t, &xt) {
                if phi <= phi0 - 0.01 * alpha * lambda2 {
                    *x = xt;
                    stepped = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if !stepped {
            return false;
        }
        if early_exit(x) {
            return true;
        }
    }
    true
}

enum PhaseOne {
    Feasible(Vec<f64>),
    Infeasible { margin: f64, x: Vec<f64> },
}

/// Solve `minimize s  s.t.  F_b(x) + s I ⪰ 0` plus a large trust region on
/// `x`, starting from `x0` (or zero).
fn phase_one(problem: &LmiProblem, x0: Option<&[f64]>, opts: &SdpOptions) -> Result<PhaseOne> {
    let nv = problem.num_vars;
    let s_idx = nv;
    let x_start: Vec<f64> = match x0 {
        Some(x) => x.to_vec(),
        None => vec![0.0; nv],
    };
    let worst = problem
        .blocks
        .iter()
        .map(|b| min_eig_sym(&b.assemble(&x_start)))
        .fold(f64::INFINITY, f64::min);
    if !worst.is_finite() && worst < 0.0 {
        return Err(Error::Numerical("phase-I start evaluation failed".into()));
    }
    let s0 = (-worst).max(0.0) * 1.01 + 1.0;
    let xinf = x_start.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let radius = 1e6_f64.max(10.0 * (s0 + xinf));

    let mut blocks: Vec<Block> = Vec::with_capacity(problem.blocks.len() + 2 * nv + 1);
    for b in &problem.blocks {
        let mut coeffs = b.coeffs.clone();
        let ident: Vec<Triplet> = (0..b.dim).map(|i| (i, i, 1.0)).collect();
        coeffs.push((s_idx, ident));
        blocks.push(Block {
            dim: b.dim,
            constant: b.constant.clone(),
            coeffs,
        });
    }
    for i in 0..nv {
        // Trust region keeps the phase-I feasible set bounded so the barrier
        // centering is well posed even for variables the blocks ignore.
        blocks.push(Block {
            dim: 1,
            constant: DMatrix::from_element(1, 1, radius),
            coeffs: vec![(i, vec![(0, 0, 1.0)])],
        });
        blocks.push(Block {
            dim: 1,
            constant: DMatrix::from_element(1, 1, radius),
            coeffs: vec![(i, vec![(0, 0, -1.0)])],
        });
    }
    blocks.push(Block {
        dim: 1,
        constant: DMatrix::from_element(1, 1, radius),
        coeffs: vec![(s_idx, vec![(0, 0, 1.0)])],
    });

    let mut c = vec![0.0; nv + 1];
    c[s_idx] = 1.0;
    let mut x: Vec<f64> = x_start.iter().copied().chain(std::iter::once(s0)).collect();
    let nu = blocks.iter().map(|b| b.dim).sum::<usize>() as f64;
    let gap_target = 0.1 * opts.feas_tol;
    let mut t = 1.0f64;
    for _ in 0..opts.max_outer {
        let mut found: Option<Vec<f64>> = None;
        center(&blocks, &c, t, &mut x, opts, |xt| {
            if xt[s_idx] < 0.0 {
                let candidate = xt[..nv].to_vec();
                if problem.is_strictly_feasible(&candidate) {
                    found = Some(candidate);
                    return true;
                }
            }
            false
        });
        if let Some(xf) = found {
            return Ok(PhaseOne::Feasible(xf));
        }
        if x[s_idx] < 0.0 && problem.is_strictly_feasible(&x[..nv]) {
            return Ok(PhaseOne::Feasible(x[..nv].to_vec()));
        }
        if nu / t <= gap_target {
            break;
        }
        t *= opts.mu;
    }
    Ok(PhaseOne::Infeasible {
        margin: -x[s_idx],
        x: x[..nv].to_vec(),
    })
}

/// Solve the problem, optionally warm-starting from a strictly feasible `x0`.
///
/// Returns `SdpStatus::Infeasible` (never an `Err`) when phase-I proves there
/// is no strict interior; errors are reserved for malformed inputs and
/// numerical breakdown.
pub fn solve_sdp(problem: &LmiProblem, x0: Option<&[f64]>, opts: &SdpOptions) -> Result<SdpSolution> {
    if problem.blocks.is_empty() {
        return Err(Error::Domain("LMI problem has no blocks".into()));
    }
    if let Some(x) = x0 {
        if x.len() != problem.num_vars {
            return Err(Error::Dimension(format!(
                "start point has {} entries for {} variables",
                x.len(),
                problem.num_vars
            )));
        }
    }
    if !(opts.feas_tol > 0.0 && opts.gap_tol > 0.0 && opts.mu > 1.0) {
        return Err(Error::Domain(
            "solver options need feas_tol > 0, gap_tol > 0, mu > 1".into(),
        ));
    }

    let mut x = match x0 {
        Some(x) if problem.is_strictly_feasible(x) => x.to_vec(),
        other => match phase_one(problem, other, opts)? {
            PhaseOne::Feasible(x) => x,
            PhaseOne::Infeasible { margin, x } => {
                return Ok(SdpSolution {
                    status: SdpStatus::Infeasible,
                    x,
                    objective: f64::NAN,
                    min_eig_margin: margin,
                });
            }
        },
    };

    let nu = problem.total_dim() as f64;
    let c = &problem.objective;
    let mut t = 1.0f64;
    let mut status = SdpStatus::MaxIterations;
    for _ in 0..opts.max_outer {
        center(&problem.blocks, c, t, &mut x, opts, |_| false);
        let obj = dot(c, &x);
        if nu / t <= (opts.gap_tol * obj.abs()).max(opts.gap_abs) {
            status = SdpStatus::Optimal;
            break;
        }
        t *= opts.mu;
    }
    let objective = dot(c, &x);
    let min_eig_margin = problem.evaluate_min_eig(&x)?;
    Ok(SdpSolution {
        status,
        x,
        objective,
        min_eig_margin,
    })
}
