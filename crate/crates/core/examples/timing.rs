use modred_core::freq::compute_n;
use modred_core::io::{read_interconnection, read_requirement_csv};
use modred_core::lmi::SdpOptions;
use modred_core::synthesis::{solve_d_step, solve_vw_step, ScalingPoint};
use std::time::Instant;

fn main() {
    let dir = std::path::Path::new("/tmp/ci");
    let sys = read_interconnection(&dir.join("interconnection.json")).unwrap();
    let req =
        read_requirement_csv(std::fs::File::open(dir.join("requirement.csv")).unwrap()).unwrap();
    let idx = req
        .omegas()
        .iter()
        .position(|&w| (w - 4.796280e3).abs() < 1.0)
        .unwrap();
    let omega = req.omegas()[idx];
    let n = compute_n(&sys, omega).unwrap();
    let dims = [(2usize, 2usize), (5, 4), (2, 3)];
    let point = |d: Vec<f64>| ScalingPoint {
        v: dims.iter().map(|&(m, _)| vec![1.0; m]).collect(),
        w: dims.iter().map(|&(_, p)| vec![1.0; p]).collect(),
        v_c: req.v_c()[idx].clone(),
        w_c: req.w_c()[idx].clone(),
        d,
        d_c: 1.0,
    };
    let alpha = vec![1.0; 3];
    let sdp = SdpOptions::default();

    for t in [1.0, 1e-2, 1e-5] {
        let p = point(vec![t; 3]);
        let t0 = Instant::now();
        let mut s = None;
        for _ in 0..10 {
            s = Some(solve_vw_step(&n, &p, &alpha, &sdp).unwrap());
        }
        let el = t0.elapsed().as_secs_f64() / 10.0;
        let s = s.unwrap();
        println!("vw at d={t:.0e}: {:.1}ms cost={:.3e}", el * 1e3, s.cost);
        let mut p2 = p.clone();
        p2.v = s.v;
        p2.w = s.w;
        let t0 = Instant::now();
        let mut ds = None;
        for _ in 0..10 {
            ds = Some(solve_d_step(&n, &p2, &sdp).unwrap());
        }
        let el = t0.elapsed().as_secs_f64() / 10.0;
        let ds = ds.unwrap();
        println!(
            "  d-step: {:.1}ms gamma={:.3e} d={:?}",
            el * 1e3,
            ds.gamma,
            ds.d
        );
    }
}
