//! The pipeline commands: demo case generation, budget synthesis, subsystem
//! reduction, end-to-end validation, and Bode data emission.
//!
//! Each command reads its inputs from and writes its artifacts to the run
//! directory (`--out`), under fixed names: `sub{j}.json`,
//! `interconnection.json`, `requirement.csv`, `scaling_sub{j}.csv`, `d.csv`,
//! `reduced_sub{j}.json`, `hsv_sub{j}.csv`, `margins_sub{j}.csv`,
//! `report.json`, `bode.csv`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use modred_core::beams::{
    build_three_beam_system, demo_beam_specs_with, DEMO_SPRING_ROTATIONAL,
    DEMO_SPRING_TRANSLATIONAL,
};
use modred_core::freq::{make_log_grid, FrequencyGrid};
use modred_core::io as artifacts;
use modred_core::lti::{InterconnectedSystem, StateSpaceModel};
use modred_core::reduction::{lookup_method, reduce_to_requirement, ReduceOptions};
use modred_core::synthesis::{
    build_interconnected_requirement, synthesize_requirements_partial, RequirementSpec,
    ScalingSolution, SynthesisOptions,
};
use modred_core::validation::{emit_bode_data, validate_pipeline};
use modred_core::{Error, Result};

use crate::config::Settings;

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path)?))
}

fn load_requirement(settings: &Settings) -> Result<(FrequencyGrid, RequirementSpec)> {
    let req = artifacts::read_requirement_csv(open(&settings.requirement)?)?;
    let grid = FrequencyGrid::new(req.omegas().to_vec())?;
    Ok((grid, req))
}

fn load_scalings(
    settings: &Settings,
    subsystems: usize,
    req: &RequirementSpec,
) -> Result<ScalingSolution> {
    let mut tables = Vec::with_capacity(subsystems);
    for j in 1..=subsystems {
        tables.push(open(&settings.out.join(format!("scaling_sub{j}.csv")))?);
    }
    let d = open(&settings.out.join("d.csv"))?;
    artifacts::read_scaling_solution(tables, d, req)
}

fn load_reduced(settings: &Settings, subsystems: usize) -> Result<Vec<StateSpaceModel>> {
    (1..=subsystems)
        .map(|j| {
            Ok(artifacts::read_model_file(&settings.out.join(format!("reduced_sub{j}.json")))?
                .model)
        })
        .collect()
}

/// Close the interconnection around replacement subsystem models.
fn close_with(sys: &InterconnectedSystem, subsystems: Vec<StateSpaceModel>) -> Result<StateSpaceModel> {
    InterconnectedSystem::new(
        subsystems,
        sys.k11().clone(),
        sys.k12().clone(),
        sys.k21().clone(),
        sys.k22().clone(),
    )?
    .lft_close()
}

/// Generate the three-beam demo case: subsystem models (with channel
/// labels), the interconnection file, and the requirement table.
pub fn cmd_demo_beams(settings: &Settings) -> Result<i32> {
    std::fs::create_dir_all(&settings.out)?;
    let specs = demo_beam_specs_with(settings.elements);
    let sys = build_three_beam_system(&specs, DEMO_SPRING_TRANSLATIONAL, DEMO_SPRING_ROTATIONAL)?;

    let labels: [(&[&str], &[&str]); 3] = [
        (
            &["tip_force", "tip_moment"],
            &["tip_deflection", "tip_rotation"],
        ),
        (
            &[
                "left_force",
                "left_moment",
                "right_force",
                "right_moment",
                "mid_force",
            ],
            &[
                "left_deflection",
                "left_rotation",
                "right_deflection",
                "right_rotation",
            ],
        ),
        (
            &["tip_force", "tip_moment"],
            &["tip_deflection", "tip_rotation", "mid_deflection"],
        ),
    ];
    let mut names = Vec::new();
    for (j, g) in sys.subsystems().iter().enumerate() {
        let name = format!("sub{}.json", j + 1);
        let inputs: Vec<String> = labels[j].0.iter().map(|s| s.to_string()).collect();
        let outputs: Vec<String> = labels[j].1.iter().map(|s| s.to_string()).collect();
        artifacts::write_model_file(&settings.out.join(&name), g, Some(&inputs), Some(&outputs))?;
        println!("wrote {name} ({} states)", g.n());
        names.push(name);
    }
    artifacts::write_interconnection(&settings.out.join("interconnection.json"), &sys, &names)?;
    println!(
        "wrote interconnection.json ({} coupling channels, {} external)",
        sys.m_b(),
        sys.m_c()
    );

    let grid = make_log_grid(settings.grid.lo, settings.grid.hi, settings.grid.n)?;
    let gc = sys.lft_close()?;
    let req = build_interconnected_requirement(&gc, &grid, settings.beta1, settings.beta2)?;
    artifacts::write_requirement_csv(&mut create(&settings.out.join("requirement.csv"))?, &req)?;
    println!(
        "wrote requirement.csv ({} frequencies in [{:.6e}, {:.6e}] rad/s)",
        grid.len(),
        settings.grid.lo,
        settings.grid.hi
    );
    Ok(0)
}

/// Translate the interconnected requirement into per-subsystem budgets.
pub fn cmd_synth(settings: &Settings) -> Result<i32> {
    let sys = artifacts::read_interconnection(&settings.interconnection)?;
    let (grid, req) = load_requirement(settings)?;
    let opts = SynthesisOptions {
        alpha: settings.alpha.clone(),
        conv_tol: settings.conv_tol,
        max_outer: settings.max_outer,
        feas_tol: settings.feas_tol,
        ..Default::default()
    };
    let solution = synthesize_requirements_partial(&sys, &grid, &req, &opts)?;

    std::fs::create_dir_all(&settings.out)?;
    for j in 0..sys.subsystems().len() {
        let name = format!("scaling_sub{}.csv", j + 1);
        artifacts::write_scaling_csv(&mut create(&settings.out.join(&name))?, &solution, j)?;
    }
    artifacts::write_d_csv(&mut create(&settings.out.join("d.csv"))?, &solution)?;

    let bad = solution.infeasible_omegas();
    println!(
        "synthesized budgets at {}/{} frequencies",
        grid.len() - bad.len(),
        grid.len()
    );
    if bad.is_empty() {
        Ok(0)
    } else {
        let shown: Vec<String> = bad.iter().take(8).map(|w| format!("{w:.6e}")).collect();
        eprintln!(
            "infeasible at {} frequencies (first: {} rad/s)",
            bad.len(),
            shown.join(", ")
        );
        Err(Error::Infeasible { omegas: bad })
    }
}

/// Reduce every subsystem against its synthesized budget.
pub fn cmd_reduce(settings: &Settings) -> Result<i32> {
    let sys = artifacts::read_interconnection(&settings.interconnection)?;
    let (grid, req) = load_requirement(settings)?;
    let k = sys.subsystems().len();
    let scalings = load_scalings(settings, k, &req)?;
    let bad = scalings.infeasible_omegas();
    if !bad.is_empty() {
        eprintln!(
            "budget synthesis left {} infeasible frequencies; cannot reduce against them",
            bad.len()
        );
        return Err(Error::Infeasible { omegas: bad });
    }
    let method = lookup_method(&settings.method)?;
    let opts = ReduceOptions {
        fit_order: settings.fit_order,
        fit_tol: settings.fit_tol,
        slack: 0.0,
    };

    let mut totals = (0usize, 0usize);
    for j in 0..k {
        let v: Vec<Vec<f64>> = scalings.entries.iter().map(|e| e.point.v[j].clone()).collect();
        let w: Vec<Vec<f64>> = scalings.entries.iter().map(|e| e.point.w[j].clone()).collect();
        let result = reduce_to_requirement(&sys.subsystems()[j], &v, &w, &grid, method, &opts)?;
        artifacts::write_model_file(
            &settings.out.join(format!("reduced_sub{}.json", j + 1)),
            &result.reduced,
            None,
            None,
        )?;
        artifacts::write_hsv_csv(
            &mut create(&settings.out.join(format!("hsv_sub{}.csv", j + 1)))?,
            &result.hankel_values,
        )?;
        artifacts::write_margins_csv(
            &mut create(&settings.out.join(format!("margins_sub{}.csv", j + 1)))?,
            &result.margins,
        )?;
        println!(
            "subsystem {}: {} -> {} states ({})",
            j + 1,
            result.original_order,
            result.reduced_order,
            method.name()
        );
        totals.0 += result.original_order;
        totals.1 += result.reduced_order;
    }
    println!(
        "total {} -> {} states ({:.1}% reduction)",
        totals.0,
        totals.1,
        100.0 * (1.0 - totals.1 as f64 / totals.0 as f64)
    );
    Ok(0)
}

/// Check the finished run against the requirement; exit 5 on any violation.
pub fn cmd_validate(settings: &Settings) -> Result<i32> {
    let sys = artifacts::read_interconnection(&settings.interconnection)?;
    let (grid, req) = load_requirement(settings)?;
    let k = sys.subsystems().len();
    let scalings = load_scalings(settings, k, &req)?;
    let reduced = load_reduced(settings, k)?;

    let report = validate_pipeline(&sys, &reduced, &scalings, &grid)?;
    let mut out = create(&settings.out.join("report.json"))?;
    serde_json::to_writer_pretty(&mut out, &report.to_json())?;
    out.write_all(b"\n")?;

    let sub_ok = report
        .per_omega
        .iter()
        .filter(|c| c.all_subsystems_pass())
        .count();
    let inter_ok = report
        .per_omega
        .iter()
        .filter(|c| c.interconnected_pass)
        .count();
    println!(
        "subsystem budgets hold at {}/{} frequencies, requirement holds at {}/{}",
        sub_ok,
        grid.len(),
        inter_ok,
        grid.len()
    );
    println!(
        "orders {:?} -> {:?}: {} -> {} states ({:.1}% reduction)",
        report.original_orders,
        report.reduced_orders,
        report.total_original(),
        report.total_reduced(),
        report.reduction_percentage()
    );
    if report.implication_violations > 0 {
        eprintln!(
            "{} frequencies break the certificate guarantee; this indicates corrupt inputs",
            report.implication_violations
        );
    }
    if report.all_pass() {
        println!("all requirement checks pass");
        Ok(0)
    } else {
        eprintln!("requirement violated; see report.json");
        Ok(5)
    }
}

/// Emit the interconnected Bode comparison table.
pub fn cmd_bode(settings: &Settings) -> Result<i32> {
    let sys = artifacts::read_interconnection(&settings.interconnection)?;
    let (grid, req) = load_requirement(settings)?;
    let reduced = load_reduced(settings, sys.subsystems().len())?;
    let gc = sys.lft_close()?;
    let gc_hat = close_with(&sys, reduced)?;
    emit_bode_data(
        &mut create(&settings.out.join("bode.csv"))?,
        &gc,
        &gc_hat,
        &req,
        &grid,
    )?;
    println!("wrote bode.csv ({} rows)", grid.len());
    Ok(0)
}
