//! Demo case: three Euler–Bernoulli bending beams coupled by springs.
//!
//! Two cantilever beams are connected at their free tips to the ends of a
//! free-free beam through translational and rotational springs; an external
//! force drives the middle of the free-free beam and the measured output is
//! the mid-span deflection of the second cantilever. Each beam is
//! discretized with two-node Euler bending elements (one translation and one
//! rotation per node, no shear), given 1% modal damping, and realized in a
//! scaled modal state-space form whose rigid-body modes stay exactly
//! marginally stable.

use nalgebra::linalg::{Cholesky, SymmetricEigen};
use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::freq::{make_log_grid, FrequencyGrid};
use crate::lti::{schur_iteration_cap, InterconnectedSystem, StateSpaceModel};
use crate::synthesis::{build_interconnected_requirement, RequirementSpec};

/// Boundary condition of a beam mesh.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Boundary {
    /// Node 0 fully fixed (both dofs removed).
    ClampedFree,
    /// No constraints; the stiffness matrix keeps two rigid-body modes.
    FreeFree,
}

/// Physical and discretization parameters of one beam subsystem.
#[derive(Clone, Debug)]
pub struct BeamSpec {
    pub cross_section_area: f64,
    pub second_area_moment: f64,
    pub youngs_modulus: f64,
    pub mass_density: f64,
    pub modal_damping_ratio: f64,
    pub length: f64,
    pub num_elements: usize,
    pub boundary: Boundary,
}

impl BeamSpec {
    fn validate(&self) -> Result<()> {
        let positive = [
            ("cross_section_area", self.cross_section_area),
            ("second_area_moment", self.second_area_moment),
            ("youngs_modulus", self.youngs_modulus),
            ("mass_density", self.mass_density),
            ("length", self.length),
        ];
        for (name, value) in positive {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::Domain(format!(
                    "{name} must be positive and finite, got {value}"
                )));
            }
        }
        if !(self.modal_damping_ratio > 0.0 && self.modal_damping_ratio < 1.0) {
            return Err(Error::Domain(format!(
                "modal damping ratio must lie in (0, 1), got {}",
                self.modal_damping_ratio
            )));
        }
        if self.num_elements == 0 {
            return Err(Error::Domain("a beam needs at least one element".into()));
        }
        Ok(())
    }

    /// Number of mesh nodes (`num_elements + 1`).
    pub fn num_nodes(&self) -> usize {
        self.num_elements + 1
    }

    /// Degrees of freedom after applying the boundary condition.
    pub fn num_dofs(&self) -> usize {
        match self.boundary {
            Boundary::ClampedFree => 2 * self.num_elements,
            Boundary::FreeFree => 2 * self.num_nodes(),
        }
    }
}

/// Kind of a nodal degree of freedom.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DofKind {
    Translation,
    Rotation,
}

/// Whether a channel couples to another subsystem or is exposed externally.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChannelRole {
    Coupling,
    External,
}

/// One input (force/moment) or output (translation/rotation) channel,
/// anchored at a mesh node.
#[derive(Clone, Copy, Debug)]
pub struct IoPoint {
    pub node: usize,
    pub dof: DofKind,
    pub role: ChannelRole,
}

/// Input and output channel lists of one subsystem.
#[derive(Clone, Debug)]
pub struct IoMap {
    pub inputs: Vec<IoPoint>,
    pub outputs: Vec<IoPoint>,
}

/// Stiffness and consistent-mass matrices of one two-node Euler bending
/// element with dof order `(w₁, θ₁, w₂, θ₂)`.
pub fn beam_element_matrices(
    youngs_modulus: f64,
    second_area_moment: f64,
    mass_density: f64,
    cross_section_area: f64,
    element_length: f64,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    for (name, value) in [
        ("youngs_modulus", youngs_modulus),
        ("second_area_moment", second_area_moment),
        ("mass_density", mass_density),
        ("cross_section_area", cross_section_area),
        ("element_length", element_length),
    ] {
        if !(value > 0.0) || !value.is_finite() {
            return Err(Error::Domain(format!(
                "{name} must be positive and finite, got {value}"
            )));
        }
    }
    let l = element_length;
    let ks = youngs_modulus * second_area_moment / (l * l * l);
    #[rustfmt::skip]
    let ke = DMatrix::from_row_slice(4, 4, &[
        12.0 * ks,      6.0 * l * ks,  -12.0 * ks,      6.0 * l * ks,
        6.0 * l * ks,   4.0 * l * l * ks, -6.0 * l * ks, 2.0 * l * l * ks,
        -12.0 * ks,    -6.0 * l * ks,   12.0 * ks,     -6.0 * l * ks,
        6.0 * l * ks,   2.0 * l * l * ks, -6.0 * l * ks, 4.0 * l * l * ks,
    ]);
    let ms = mass_density * cross_section_area * l / 420.0;
    #[rustfmt::skip]
    let me = DMatrix::from_row_slice(4, 4, &[
        156.0 * ms,     22.0 * l * ms,   54.0 * ms,     -13.0 * l * ms,
        22.0 * l * ms,  4.0 * l * l * ms, 13.0 * l * ms, -3.0 * l * l * ms,
        54.0 * ms,      13.0 * l * ms,   156.0 * ms,    -22.0 * l * ms,
        -13.0 * l * ms, -3.0 * l * l * ms, -22.0 * l * ms, 4.0 * l * l * ms,
    ]);
    Ok((ke, me))
}

/// Assemble the global mass and stiffness matrices of a beam mesh and apply
/// the boundary condition (clamped-free removes both node-0 dofs).
pub fn assemble_beam(spec: &BeamSpec) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    spec.validate()?;
    let le = spec.length / spec.num_elements as f64;
    let (ke, me) = beam_element_matrices(
        spec.youngs_modulus,
        spec.second_area_moment,
        spec.mass_density,
        spec.cross_section_area,
        le,
    )?;
    let full = 2 * spec.num_nodes();
    let mut k = DMatrix::zeros(full, full);
    let mut m = DMatrix::zeros(full, full);
    for e in 0..spec.num_elements {
        let off = 2 * e;
        for i in 0..4 {
            for j in 0..4 {
                k[(off + i, off + j)] += ke[(i, j)];
                m[(off + i, off + j)] += me[(i, j)];
            }
        }
    }
    match spec.boundary {
        Boundary::FreeFree => Ok((m, k)),
        Boundary::ClampedFree => {
            let kept = full - 2;
            Ok((
                m.view((2, 2), (kept, kept)).into_owned(),
                k.view((2, 2), (kept, kept)).into_owned(),
            ))
        }
    }
}

/// Row index of an I/O point in the boundary-reduced dof vector.
fn dof_index(point: &IoPoint, boundary: Boundary, ndof: usize) -> Result<usize> {
    let base = 2 * point.node
        + match point.dof {
            DofKind::Translation => 0,
            DofKind::Rotation => 1,
        };
    let idx = match boundary {
        Boundary::FreeFree => base,
        Boundary::ClampedFree => {
            if point.node == 0 {
                return Err(Error::Domain(
                    "node 0 of a clamped-free beam carries no I/O (both dofs are fixed)".into(),
                ));
            }
            base - 2
        }
    };
    if idx >= ndof {
        return Err(Error::Domain(format!(
            "node {} lies outside the {}-dof mesh",
            point.node, ndof
        )));
    }
    Ok(idx)
}

/// First-order realization of `M q̈ + C_d q̇ + K q = S_in u`, `y = S_outᵀ q`,
/// with modal damping `C_d = M Φ diag(2ζω_i) Φᵀ M`.
///
/// Modes are mass-normalized solutions of `K φ = ω² M φ`, sorted by
/// frequency. Each mode gets two states: elastic modes use the scaled pair
/// `(ω q_i, q̇_i)` so that `A` carries the well-conditioned blocks
/// `[[0, ω], [−ω, −2ζω]]`; rigid-body modes (`ω² ≤ 1e-12·max ω²`) keep
/// `(q_i, q̇_i)` with an undamped `[[0, 1], [0, 0]]` block, which leaves them
/// exactly marginally stable.
pub fn modal_damped_statespace(
    m: &DMatrix<f64>,
    k: &DMatrix<f64>,
    zeta: f64,
    io: &IoMap,
    boundary: Boundary,
) -> Result<StateSpaceModel> {
    let ndof = m.nrows();
    if m.ncols() != ndof || k.nrows() != ndof || k.ncols() != ndof {
        return Err(Error::Dimension(format!(
            "mass and stiffness must be square and equal-sized, got {}x{} and {}x{}",
            m.nrows(),
            m.ncols(),
            k.nrows(),
            k.ncols()
        )));
    }
    if !(zeta > 0.0 && zeta < 1.0) {
        return Err(Error::Domain(format!(
            "modal damping ratio must lie in (0, 1), got {zeta}"
        )));
    }
    if ndof == 0 {
        return Err(Error::Domain("empty mesh".into()));
    }

    let m_sym = (m + m.transpose()) * 0.5;
    let chol = Cholesky::new(m_sym)
        .ok_or_else(|| Error::Domain("mass matrix must be positive definite".into()))?;
    let l = chol.l();
    // K̃ = L⁻¹ K L⁻ᵀ, the stiffness in mass-normalized coordinates.
    let half = l
        .solve_lower_triangular(&((k + k.transpose()) * 0.5))
        .ok_or_else(|| Error::Numerical("mass factor is singular".into()))?;
    let kt = l
        .solve_lower_triangular(&half.transpose())
        .ok_or_else(|| Error::Numerical("mass factor is singular".into()))?;
    let kt_sym = (&kt + kt.transpose()) * 0.5;
    let eig = SymmetricEigen::try_new(kt_sym, f64::EPSILON, schur_iteration_cap(ndof))
        .ok_or_else(|| Error::Numerical("modal eigensolve did not converge".into()))?;

    let mut order: Vec<usize> = (0..ndof).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[i]
            .partial_cmp(&eig.eigenvalues[j])
            .expect("eigenvalues are finite")
    });
    let lam_max = eig.eigenvalues.iter().copied().fold(0.0f64, f64::max);
    let rigid_tol = 1e-12 * lam_max;
    if eig.eigenvalues.iter().any(|&lam| lam < -rigid_tol.max(1e-300)) {
        return Err(Error::Domain(
            "stiffness matrix must be positive semidefinite".into(),
        ));
    }

    // Mass-normalized mode shapes Φ = L⁻ᵀ Ψ, columns in frequency order.
    let mut psi = DMatrix::zeros(ndof, ndof);
    for (pos, &i) in order.iter().enumerate() {
        psi.column_mut(pos).copy_from(&eig.eigenvectors.column(i));
    }
    let phi = l
        .transpose()
        .solve_upper_triangular(&psi)
        .ok_or_else(|| Error::Numerical("mass factor is singular".into()))?;

    let n_in = io.inputs.len();
    let n_out = io.outputs.len();
    let n = 2 * ndof;
    let mut a = DMatrix::zeros(n, n);
    let mut b = DMatrix::zeros(n, n_in);
    let mut c = DMatrix::zeros(n_out, n);

    let in_dofs: Vec<usize> = io
        .inputs
        .iter()
        .map(|pt| dof_index(pt, boundary, ndof))
        .collect::<Result<_>>()?;
    let out_dofs: Vec<usize> = io
        .outputs
        .iter()
        .map(|pt| dof_index(pt, boundary, ndof))
        .collect::<Result<_>>()?;

    for i in 0..ndof {
        let lam = eig.eigenvalues[order[i]].max(0.0);
        let rigid = lam <= rigid_tol;
        let omega = lam.sqrt();
        if rigid {
            a[(2 * i, 2 * i + 1)] = 1.0;
        } else {
            a[(2 * i, 2 * i + 1)] = omega;
            a[(2 * i + 1, 2 * i)] = -omega;
            a[(2 * i + 1, 2 * i + 1)] = -2.0 * zeta * omega;
        }
        for (col, &dof) in in_dofs.iter().enumerate() {
            b[(2 * i + 1, col)] = phi[(dof, i)];
        }
        let scale = if rigid { 1.0 } else { omega };
        for (row, &dof) in out_dofs.iter().enumerate() {
            c[(row, 2 * i)] = phi[(dof, i)] / scale;
        }
    }
    StateSpaceModel::new(a, b, c, DMatrix::zeros(n_out, n_in))
}

/// Build one beam subsystem from its spec and channel map.
pub fn build_beam_subsystem(spec: &BeamSpec, io: &IoMap) -> Result<StateSpaceModel> {
    let (m, k) = assemble_beam(spec)?;
    modal_damped_statespace(&m, &k, spec.modal_damping_ratio, io, spec.boundary)
}

/// Channel maps of the three-beam topology. Coupling channels are collocated
/// force/moment inputs and translation/rotation outputs at the connection
/// nodes; the external force enters mid-span of beam 2 and the external
/// output reads the mid-span deflection of beam 3.
fn three_beam_io_maps(specs: &[BeamSpec; 3]) -> Result<[IoMap; 3]> {
    for (j, spec) in specs.iter().enumerate().skip(1) {
        if spec.num_elements % 2 != 0 {
            return Err(Error::Domain(format!(
                "subsystem {} needs an even element count for its middle node, got {}",
                j + 1,
                spec.num_elements
            )));
        }
    }
    let tip1 = specs[0].num_elements;
    let right2 = specs[1].num_elements;
    let mid2 = specs[1].num_elements / 2;
    let tip3 = specs[2].num_elements;
    let mid3 = specs[2].num_elements / 2;

    let pt = |node, dof, role| IoPoint { node, dof, role };
    use ChannelRole::{Coupling, External};
    use DofKind::{Rotation, Translation};

    let io1 = IoMap {
        inputs: vec![
            pt(tip1, Translation, Coupling),
            pt(tip1, Rotation, Coupling),
        ],
        outputs: vec![
            pt(tip1, Translation, Coupling),
            pt(tip1, Rotation, Coupling),
        ],
    };
    let io2 = IoMap {
        inputs: vec![
            pt(0, Translation, Coupling),
            pt(0, Rotation, Coupling),
            pt(right2, Translation, Coupling),
            pt(right2, Rotation, Coupling),
            pt(mid2, Translation, External),
        ],
        outputs: vec![
            pt(0, Translation, Coupling),
            pt(0, Rotation, Coupling),
            pt(right2, Translation, Coupling),
            pt(right2, Rotation, Coupling),
        ],
    };
    let io3 = IoMap {
        inputs: vec![
            pt(tip3, Translation, Coupling),
            pt(tip3, Rotation, Coupling),
        ],
        outputs: vec![
            pt(tip3, Translation, Coupling),
            pt(tip3, Rotation, Coupling),
            pt(mid3, Translation, External),
        ],
    };
    Ok([io1, io2, io3])
}

/// Assemble the three-beam interconnected system: beam 1's tip couples to
/// the left end of beam 2 and beam 3's tip to its right end, each through a
/// translational spring `k_t` and a rotational spring `k_r`. Spring forces
/// follow the force balance `u_own = k·(y_other − y_own)`, so `K11` is
/// negative in the own-displacement couplings; the external input routes to
/// beam 2's mid-force channel and the external output is beam 3's mid
/// deflection.
pub fn build_three_beam_system(
    specs: &[BeamSpec; 3],
    k_t: f64,
    k_r: f64,
) -> Result<InterconnectedSystem> {
    if !(k_t >= 0.0) || !k_t.is_finite() || !(k_r >= 0.0) || !k_r.is_finite() {
        return Err(Error::Domain(format!(
            "spring stiffnesses must be nonnegative and finite, got k_t = {k_t}, k_r = {k_r}"
        )));
    }
    let io = three_beam_io_maps(specs)?;
    let subsystems: Vec<StateSpaceModel> = specs
        .iter()
        .zip(io.iter())
        .map(|(spec, io)| build_beam_subsystem(spec, io))
        .collect::<Result<_>>()?;

    // Stacked coupling channels. Inputs: beam 1 (0..2), beam 2 (2..7 with
    // the external force at 6), beam 3 (7..9). Outputs: beam 1 (0..2),
    // beam 2 (2..6), beam 3 (6..9 with the external deflection at 8).
    let (m_b, p_b) = (9, 9);
    let mut k11 = DMatrix::zeros(m_b, p_b);
    // (input row, own output, other output, stiffness)
    let springs = [
        (0, 0, 2, k_t), // beam 1 tip force <- left end of beam 2
        (1, 1, 3, k_r), // beam 1 tip moment
        (2, 2, 0, k_t), // beam 2 left force <- beam 1 tip
        (3, 3, 1, k_r), // beam 2 left moment
        (4, 4, 6, k_t), // beam 2 right force <- beam 3 tip
        (5, 5, 7, k_r), // beam 2 right moment
        (7, 6, 4, k_t), // beam 3 tip force <- right end of beam 2
        (8, 7, 5, k_r), // beam 3 tip moment
    ];
    for (row, own, other, stiffness) in springs {
        k11[(row, own)] = -stiffness;
        k11[(row, other)] = stiffness;
    }
    let mut k12 = DMatrix::zeros(m_b, 1);
    k12[(6, 0)] = 1.0; // u_c -> beam 2 mid force
    let mut k21 = DMatrix::zeros(1, p_b);
    k21[(0, 8)] = 1.0; // beam 3 mid deflection -> y_c
    let k22 = DMatrix::zeros(1, 1);

    InterconnectedSystem::new(subsystems, k11, k12, k21, k22)
}

/// Demo grid bounds and point count: `[10^2.5, 10^5]` rad/s, 1000 points.
pub const DEMO_GRID: (f64, f64, usize) = (316.22776601683796, 1.0e5, 1000);
/// Demo requirement fraction `β₁` of `|G_c|`.
pub const DEMO_BETA1: f64 = 0.1;
/// Demo requirement floor `β₂` in m/N.
pub const DEMO_BETA2: f64 = 5.0e-7;
/// Demo translational spring stiffness in N/m.
pub const DEMO_SPRING_TRANSLATIONAL: f64 = 1.0e5;
/// Demo rotational spring stiffness in Nm/rad.
pub const DEMO_SPRING_ROTATIONAL: f64 = 1.0e3;

/// The demo beam parameters at a caller-chosen mesh resolution (subsystems
/// 2 and 3 need even element counts for their middle nodes).
pub fn demo_beam_specs_with(elements: [usize; 3]) -> [BeamSpec; 3] {
    let base = |length: f64, num_elements: usize, boundary: Boundary| BeamSpec {
        cross_section_area: 1.0e-6,
        second_area_moment: 1.0e-9,
        youngs_modulus: 2.0e11,
        mass_density: 8.0e3,
        modal_damping_ratio: 0.01,
        length,
        num_elements,
        boundary,
    };
    [
        base(1.0, elements[0], Boundary::ClampedFree),
        base(0.4, elements[1], Boundary::FreeFree),
        base(0.6, elements[2], Boundary::ClampedFree),
    ]
}

/// The demo beam parameters at full resolution (50/20/30 elements, giving
/// 200/84/120 states).
pub fn demo_beam_specs() -> [BeamSpec; 3] {
    demo_beam_specs_with([50, 20, 30])
}

/// Assemble the full-resolution demo system.
pub fn build_demo_system() -> Result<InterconnectedSystem> {
    build_three_beam_system(
        &demo_beam_specs(),
        DEMO_SPRING_TRANSLATIONAL,
        DEMO_SPRING_ROTATIONAL,
    )
}

/// The demo accuracy requirement: `V_c⁻¹(ω) = max(β₁·|G_c(iω)|, β₂)` with
/// `W_c = 1` on the demo grid.
pub fn demo_requirement(
    sys: &InterconnectedSystem,
) -> Result<(FrequencyGrid, RequirementSpec)> {
    let grid = make_log_grid(DEMO_GRID.0, DEMO_GRID.1, DEMO_GRID.2)?;
    let gc = sys.lft_close()?;
    let req = build_interconnected_requirement(&gc, &grid, DEMO_BETA1, DEMO_BETA2)?;
    Ok((grid, req))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lti::eigenvalues_bounded;
    use approx::assert_relative_eq;
    use nalgebra::DVector;

    fn ci_specs() -> [BeamSpec; 3] {
        demo_beam_specs_with([10, 4, 6])
    }

    #[test]
    fn element_matrices_are_symmetric_with_rigid_nullspace() {
        let l = 0.13;
        let (ke, me) = beam_element_matrices(2.0e11, 1.0e-9, 8.0e3, 1.0e-6, l).unwrap();
        assert_relative_eq!((&ke - ke.transpose()).norm(), 0.0, epsilon = 1e-9 * ke.norm());
        assert_relative_eq!((&me - me.transpose()).norm(), 0.0, epsilon = 1e-12 * me.norm());
        // Rigid translation (w₁=w₂=1) and rigid rotation (θ=1, w₂=L) produce
        // no elastic force.
        let translation = DVector::from_vec(vec![1.0, 0.0, 1.0, 0.0]);
        let rotation = DVector::from_vec(vec![0.0, 1.0, l, 1.0]);
        assert!((&ke * translation).norm() <= 1e-9 * ke.norm());
        assert!((&ke * rotation).norm() <= 1e-9 * ke.norm());
    }

    #[test]
    fn nonpositive_element_parameters_are_rejected() {
        assert!(beam_element_matrices(0.0, 1e-9, 8e3, 1e-6, 0.1).is_err());
        assert!(beam_element_matrices(2e11, -1e-9, 8e3, 1e-6, 0.1).is_err());
        assert!(beam_element_matrices(2e11, 1e-9, 8e3, 1e-6, 0.0).is_err());
    }

    #[test]
    fn one_element_cantilever_matches_tip_compliance() {
        let spec = BeamSpec {
            num_elements: 1,
            ..demo_beam_specs()[0].clone()
        };
        let (_, k) = assemble_beam(&spec).unwrap();
        // Unit tip force: K x = [1, 0]ᵀ; deflection = L³/(3EI).
        let x = k
            .lu()
            .solve(&DVector::from_vec(vec![1.0, 0.0]))
            .unwrap();
        let expected = 1.0f64.powi(3) / (3.0 * 2.0e11 * 1.0e-9);
        assert_relative_eq!(x[0], expected, max_relative = 1e-12);
    }

    #[test]
    fn rigid_body_kinetic_energy_recovers_total_mass() {
        let spec = demo_beam_specs()[1].clone();
        let (m, _) = assemble_beam(&spec).unwrap();
        let ndof = m.nrows();
        let v = DVector::from_fn(ndof, |i, _| if i % 2 == 0 { 1.0 } else { 0.0 });
        let mass = (v.transpose() * &m * &v)[(0, 0)];
        let expected = 8.0e3 * 1.0e-6 * 0.4;
        assert_relative_eq!(mass, expected, max_relative = 1e-12);
    }

    #[test]
    fn boundary_conditions_set_the_dof_counts() {
        let specs = demo_beam_specs();
        let (m1, _) = assemble_beam(&specs[0]).unwrap();
        let (m2, _) = assemble_beam(&specs[1]).unwrap();
        let (m3, _) = assemble_beam(&specs[2]).unwrap();
        assert_eq!(m1.nrows(), 100);
        assert_eq!(m2.nrows(), 42);
        assert_eq!(m3.nrows(), 60);
    }

    #[test]
    fn free_free_stiffness_has_exactly_two_rigid_modes() {
        let (_, k) = assemble_beam(&ci_specs()[1]).unwrap();
        let eig = SymmetricEigen::new((&k + k.transpose()) * 0.5);
        let lam_max = eig.eigenvalues.iter().copied().fold(0.0f64, f64::max);
        let rigid = eig
            .eigenvalues
            .iter()
            .filter(|&&l| l.abs() <= 1e-12 * lam_max)
            .count();
        assert_eq!(rigid, 2);
    }

    #[test]
    fn single_dof_oscillator_realization_is_exact() {
        let m = DMatrix::from_element(1, 1, 1.0);
        let k = DMatrix::from_element(1, 1, 1.0);
        let io = IoMap {
            inputs: vec![IoPoint {
                node: 0,
                dof: DofKind::Translation,
                role: ChannelRole::External,
            }],
            outputs: vec![IoPoint {
                node: 0,
                dof: DofKind::Translation,
                role: ChannelRole::External,
            }],
        };
        let g = modal_damped_statespace(&m, &k, 0.01, &io, Boundary::FreeFree).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, -0.02]);
        assert_eq!(g.a(), &expected);
        // The mode shape sign is arbitrary, but the collocated product is
        // pinned: C·B = φ²/ω = 1, and the static compliance is 1/k = 1.
        assert_relative_eq!(g.b()[(1, 0)].abs(), 1.0, max_relative = 1e-14);
        assert_relative_eq!(g.c()[(0, 0)] * g.b()[(1, 0)], 1.0, max_relative = 1e-14);
        assert_relative_eq!(
            g.freq_response(0.0).unwrap()[(0, 0)].re,
            1.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn cantilever_frequencies_match_the_analytic_series() {
        // Euler–Bernoulli clamped-free: ω_k = (βL)_k² √(EI/ρA) / L².
        let spec = demo_beam_specs()[0].clone();
        let io = IoMap {
            inputs: vec![IoPoint {
                node: spec.num_elements,
                dof: DofKind::Translation,
                role: ChannelRole::External,
            }],
            outputs: vec![IoPoint {
                node: spec.num_elements,
                dof: DofKind::Translation,
                role: ChannelRole::External,
            }],
        };
        let g = build_beam_subsystem(&spec, &io).unwrap();
        let mut moduli: Vec<f64> = eigenvalues_bounded(g.a())
            .unwrap()
            .iter()
            .map(|l| l.norm())
            .collect();
        moduli.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let scale = (2.0e11_f64 * 1.0e-9 / (8.0e3 * 1.0e-6)).sqrt();
        let beta_l = [1.87510406871196_f64, 4.69409113297417, 7.85475743823761];
        let tolerances = [1e-3, 5e-3, 5e-3];
        for (k, (&bl, &tol)) in beta_l.iter().zip(tolerances.iter()).enumerate() {
            let analytic = bl * bl * scale;
            // Eigenvalues come in conjugate pairs with |λ| = ω.
            let fem = moduli[2 * k];
            assert_relative_eq!(fem, analytic, max_relative = tol);
            assert_relative_eq!(moduli[2 * k + 1], fem, max_relative = 1e-9);
        }
    }

    #[test]
    fn free_free_beam_keeps_an_undamped_rigid_pair() {
        let spec = ci_specs()[1].clone();
        let io = IoMap {
            inputs: vec![IoPoint {
                node: 0,
                dof: DofKind::Translation,
                role: ChannelRole::Coupling,
            }],
            outputs: vec![IoPoint {
                node: spec.num_elements,
                dof: DofKind::Translation,
                role: ChannelRole::Coupling,
            }],
        };
        let g = build_beam_subsystem(&spec, &io).unwrap();
        assert_eq!(g.n(), 2 * spec.num_dofs());
        let eigs = eigenvalues_bounded(g.a()).unwrap();
        let at_origin = eigs.iter().filter(|l| l.norm() <= 1e-8).count();
        assert_eq!(at_origin, 4, "two rigid modes, two states each");
        let (stable, abscissa) = g.stability_check().unwrap();
        assert!(!stable);
        assert!(abscissa.abs() <= 1e-10);
    }

    #[test]
    fn demo_state_counts_match_at_both_scales() {
        let sys = build_three_beam_system(
            &ci_specs(),
            DEMO_SPRING_TRANSLATIONAL,
            DEMO_SPRING_ROTATIONAL,
        )
        .unwrap();
        let counts: Vec<usize> = sys.subsystems().iter().map(|g| g.n()).collect();
        assert_eq!(counts, vec![40, 20, 24]);
        let full: Vec<usize> = demo_beam_specs().iter().map(|s| 2 * s.num_dofs()).collect();
        assert_eq!(full, vec![200, 84, 120]);
        assert_eq!(sys.m_b(), 9);
        assert_eq!(sys.p_b(), 9);
        assert_eq!(sys.m_c(), 1);
        assert_eq!(sys.p_c(), 1);
    }

    #[test]
    fn collocated_transfer_blocks_are_reciprocal() {
        let sys = build_three_beam_system(
            &ci_specs(),
            DEMO_SPRING_TRANSLATIONAL,
            DEMO_SPRING_ROTATIONAL,
        )
        .unwrap();
        // Collocated (input dof == output dof) leading blocks per subsystem.
        let collocated = [2usize, 4, 2];
        for (g, &nc) in sys.subsystems().iter().zip(collocated.iter()) {
            for &omega in &[500.0, 5.0e3, 4.0e4] {
                let resp = g.freq_response(omega).unwrap();
                let scale = resp.norm().max(1e-300);
                for i in 0..nc {
                    for j in 0..i {
                        let asym = (resp[(i, j)] - resp[(j, i)]).norm();
                        assert!(
                            asym <= 1e-8 * scale,
                            "reciprocity violated at ω={omega}: {asym:.3e} vs scale {scale:.3e}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn springs_stabilize_the_interconnected_model() {
        let sys = build_three_beam_system(
            &ci_specs(),
            DEMO_SPRING_TRANSLATIONAL,
            DEMO_SPRING_ROTATIONAL,
        )
        .unwrap();
        let gc = sys.lft_close().unwrap();
        let (stable, abscissa) = gc.stability_check().unwrap();
        assert!(stable, "interconnected model unstable: abscissa {abscissa}");
    }

    #[test]
    fn k11_spring_entries_follow_the_force_balance() {
        let sys = build_three_beam_system(
            &ci_specs(),
            DEMO_SPRING_TRANSLATIONAL,
            DEMO_SPRING_ROTATIONAL,
        )
        .unwrap();
        let k11 = sys.k11();
        assert_eq!(k11[(0, 0)], -1.0e5);
        assert_eq!(k11[(0, 2)], 1.0e5);
        assert_eq!(k11[(1, 1)], -1.0e3);
        assert_eq!(k11[(2, 0)], 1.0e5);
        // The external force row couples to nothing.
        assert_eq!(k11.row(6).iter().map(|x| x.abs()).sum::<f64>(), 0.0);
        assert_eq!(sys.k12()[(6, 0)], 1.0);
        assert_eq!(sys.k21()[(0, 8)], 1.0);
        assert_eq!(sys.k22()[(0, 0)], 0.0);
    }

    #[test]
    fn zero_springs_disconnect_the_external_path() {
        let sys = build_three_beam_system(&ci_specs(), 0.0, 0.0).unwrap();
        let gc = sys.lft_close().unwrap();
        for &omega in &[400.0, 2.0e3, 8.0e4] {
            let mag = gc.freq_response(omega).unwrap()[(0, 0)].norm();
            assert!(
                mag <= 1e-15,
                "G_c should vanish without springs, got {mag} at ω={omega}"
            );
        }
    }

    #[test]
    fn odd_middle_element_counts_are_rejected() {
        let mut specs = ci_specs();
        specs[1].num_elements = 5;
        assert!(matches!(
            build_three_beam_system(&specs, 1e5, 1e3),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn demo_requirement_has_unit_wc_and_floored_vc() {
        let sys = build_three_beam_system(
            &ci_specs(),
            DEMO_SPRING_TRANSLATIONAL,
            DEMO_SPRING_ROTATIONAL,
        )
        .unwrap();
        let (grid, req) = demo_requirement(&sys).unwrap();
        assert_eq!(grid.len(), 1000);
        assert_relative_eq!(grid.omegas()[0], 316.22776601683796, max_relative = 1e-12);
        assert_relative_eq!(grid.omegas()[999], 1.0e5, max_relative = 1e-12);
        for t in 0..grid.len() {
            assert_eq!(req.w_c()[t], vec![1.0]);
            assert!(req.v_c()[t][0] <= 1.0 / DEMO_BETA2 + 1e-6);
            assert!(req.v_c()[t][0] > 0.0);
        }
        // The floor binds wherever β₁|G_c| < β₂.
        let gc = sys.lft_close().unwrap();
        let mut floor_active = 0usize;
        for (t, &omega) in grid.omegas().iter().enumerate() {
            let mag = gc.freq_response(omega).unwrap()[(0, 0)].norm();
            if DEMO_BETA1 * mag < DEMO_BETA2 {
                assert_relative_eq!(
                    req.v_c()[t][0],
                    1.0 / DEMO_BETA2,
                    max_relative = 1e-12
                );
                floor_active += 1;
            }
        }
        assert!(floor_active > 0, "expected the β₂ floor to bind somewhere");
    }
}
