fn main() {
    let n = 60usize;
    let (lo, hi) = (1e-2f64, 1e2f64);
    let omegas: Vec<f64> = (0..n)
        .map(|k| (lo.ln() + (hi.ln() - lo.ln()) * k as f64 / (n - 1) as f64).exp())
        .collect();
    let samples: Vec<f64> = omegas.iter().map(|&w| 1.0 / (w * w + 1.0).sqrt()).collect();
    let w = modred_core::reduction::fit_weight(&omegas, &samples, 1, 1e-3).unwrap();
    println!("fit_error = {:.3e}", w.fit_error());
    println!("poles = {:?}", w.poles());
    println!("zeros = {:?}", w.zeros());
}
