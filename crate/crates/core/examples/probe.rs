use modred_core::freq::compute_n;
use modred_core::io::{read_interconnection, read_requirement_csv, read_scaling_solution};
use modred_core::lmi::SdpOptions;
use modred_core::synthesis::{check_certificate, solve_d_step, solve_vw_step};

fn main() {
    let dir = std::path::Path::new("/tmp/ci");
    let sys = read_interconnection(&dir.join("interconnection.json")).unwrap();
    let req =
        read_requirement_csv(std::fs::File::open(dir.join("requirement.csv")).unwrap()).unwrap();
    let scalings: Vec<std::fs::File> = (1..=3)
        .map(|j| std::fs::File::open(dir.join(format!("scaling_sub{j}.csv"))).unwrap())
        .collect();
    let d_file = std::fs::File::open(dir.join("d.csv")).unwrap();
    let sol = read_scaling_solution(scalings, d_file, &req).unwrap();

    let target = 4.796280e3;
    let entry = sol
        .entries
        .iter()
        .min_by(|a, b| {
            (a.omega - target)
                .abs()
                .partial_cmp(&(b.omega - target).abs())
                .unwrap()
        })
        .unwrap();
    let omega = entry.omega;
    println!("omega = {omega:.6e}");
    let n = compute_n(&sys, omega).unwrap();
    let stored = &entry.point;
    let cost = |v: &Vec<Vec<f64>>, w: &Vec<Vec<f64>>| -> f64 {
        v.iter()
            .flatten()
            .chain(w.iter().flatten())
            .map(|x| x.powi(-2))
            .sum()
    };
    println!(
        "stored: d = {:?}\n  cost = {:.6e}",
        stored.d,
        cost(&stored.v, &stored.w)
    );
    let (ok, m) = check_certificate(&n, stored, 0.0).unwrap();
    println!("  cert ok={ok} margin={m:.3e}");

    // 1) What does the d-step claim at the stored point?
    let sdp = SdpOptions::default();
    match solve_d_step(&n, stored, &sdp) {
        Ok(ds) => println!(
            "d-step at stored point: gamma_start={:.6e} gamma={:.6e}\n  d={:?}",
            ds.gamma_start, ds.gamma, ds.d
        ),
        Err(e) => println!("d-step failed: {e}"),
    }

    // 2) Margin landscape over uniform d = t (stored budgets unchanged).
    println!("\nmargin vs uniform d=t at stored budgets:");
    for &t in &[1.0, 0.3, 0.1, 0.03, 0.01, 3e-3, 1e-3, 3e-4, 1e-4] {
        let mut p = stored.clone();
        p.d = vec![t; p.d.len()];
        let (ok, m) = check_certificate(&n, &p, 0.0).unwrap();
        println!("  t={t:.1e}: ok={ok} margin={m:+.3e}");
    }

    // 3) Cost of the vw-step as a function of uniform d = t.
    println!("\nvw-step cost vs uniform d=t:");
    let alpha = vec![1.0; stored.v.len()];
    let mut best = (1.0, f64::INFINITY);
    for &t in &[1.0, 0.3, 0.1, 0.03, 0.01, 3e-3, 1e-3, 3e-4, 1e-4] {
        let mut p = stored.clone();
        p.d = vec![t; p.d.len()];
        match solve_vw_step(&n, &p, &alpha, &sdp) {
            Ok(s) => {
                println!("  t={t:.1e}: cost={:.6e}", s.cost);
                if s.cost < best.1 {
                    best = (t, s.cost);
                }
            }
            Err(e) => println!("  t={t:.1e}: vw failed: {e}"),
        }
    }

    // 4) The real single-frequency synthesis from scratch (d = 1 init).
    let _ = best;
    println!("\nfull synthesize_requirements_partial at this omega:");
    let grid = modred_core::freq::FrequencyGrid::new(vec![omega]).unwrap();
    let idx = req.omegas().iter().position(|&w| w == omega).unwrap();
    let one_req = modred_core::synthesis::RequirementSpec::new(
        vec![omega],
        vec![req.v_c()[idx].clone()],
        vec![req.w_c()[idx].clone()],
    )
    .unwrap();
    let opts = modred_core::synthesis::SynthesisOptions::default();
    let sol1 =
        modred_core::synthesis::synthesize_requirements_partial(&sys, &grid, &one_req, &opts)
            .unwrap();
    let e = &sol1.entries[0];
    println!(
        "  feasible={} cost={:.6e} margin={:+.3e}\n  d={:?}\n  trace={:?}",
        e.feasible, e.cost, e.margin, e.point.d, e.cost_trace
    );
    println!(
        "  products per subsystem (min v_ch * min w_ch): {:?}",
        e.point
            .v
            .iter()
            .zip(&e.point.w)
            .map(|(v, w)| {
                let vm = v.iter().cloned().fold(f64::INFINITY, f64::min);
                let wm = w.iter().cloned().fold(f64::INFINITY, f64::min);
                vm * wm
            })
            .collect::<Vec<_>>()
    );
}
