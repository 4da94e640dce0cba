use phasesep::evaluation::clt_covariance_check;
use phasesep::simulation::{ScenarioConfig, WarpedUniformScenarioConfig};

fn main() {
    let reps: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(150);
    let alpha: f64 = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(0.5);
    let scenario = ScenarioConfig::WarpedUniform(WarpedUniformScenarioConfig {
        n: 20,
        tau: 400.0,
        seed: 1007,
        grid: 2049,
        ..Default::default()
    });
    let rep = clt_covariance_check(&scenario, reps, 100_000, alpha).unwrap();
    println!("empirical diag: {:?}", (0..9).map(|i| rep.empirical[i][i]).collect::<Vec<_>>());
    println!("direct    diag: {:?}", (0..9).map(|i| rep.direct[i][i]).collect::<Vec<_>>());
    println!(
        "ratio     diag: {:?}",
        (0..9).map(|i| rep.empirical[i][i] / rep.direct[i][i]).collect::<Vec<_>>()
    );
    println!(
        "max_scaled_error={:.3} max_rel_error={:.3} thresholded={}",
        rep.max_scaled_error, rep.max_rel_error, rep.thresholded_entries
    );
    let kappa_max = rep.direct.iter().flatten().fold(0.0f64, |a, &v| a.max(v.abs()));
    let mut entries: Vec<(f64, usize, usize, f64, f64)> = Vec::new();
    for i in 0..9 {
        for j in 0..9 {
            let k = rep.direct[i][j];
            if k.abs() >= 0.1 * kappa_max {
                let rel = (rep.empirical[i][j] - k).abs() / k.abs();
                entries.push((rel, i, j, k, rep.empirical[i][j]));
            }
        }
    }
    entries.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    println!("worst entries (rel, i, j, kappa, empirical):");
    for e in entries.iter().take(8) {
        println!("  {:.3} ({}, {}) kappa={:.5} emp={:.5}", e.0, e.1, e.2, e.3, e.4);
    }
    println!("kappa matrix row 0: {:?}", rep.direct[0].iter().map(|v| (v * 1e4).round() / 1e4).collect::<Vec<_>>());
    println!("kappa matrix row 4: {:?}", rep.direct[4].iter().map(|v| (v * 1e4).round() / 1e4).collect::<Vec<_>>());
}
