//! The four subcommands: simulate, register, evaluate, reproduce.

use crate::args::{RunArgs, ScenarioName, StudyName};
use crate::error::{CliError, CliResult};
use phasesep::evaluation::{
    clt_covariance_check, find_modes, gaussian_kde, interior_grid, linear_fit, pearson, run_study,
    unbiasedness_mc, StudyConfig,
};
use phasesep::frechet::arithmetic_mean;
use phasesep::io;
use phasesep::measure::{PointPattern, DEFAULT_GRID};
use phasesep::registration::{pipeline, KernelPolicy, RegistrationOutput};
use phasesep::simulation::{
    bimodal_density, BimodalScenarioConfig, ScenarioConfig, ScenarioDraw, SineWarpConfig,
    TriangularScenarioConfig, WarpedUniformScenarioConfig,
};
use serde_json::json;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

fn out_dir(args: &RunArgs) -> CliResult<PathBuf> {
    let dir = args.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn scenario_config(args: &RunArgs, seed: u64) -> CliResult<ScenarioConfig> {
    let name = args
        .scenario
        .ok_or_else(|| CliError::Usage("--scenario is required".into()))?;
    let grid = args.grid.unwrap_or(DEFAULT_GRID);
    Ok(match name {
        ScenarioName::Bimodal => {
            let mut cfg = BimodalScenarioConfig { seed, grid, ..Default::default() };
            if let Some(n) = args.n {
                cfg.n = n;
            }
            if let Some(tau) = args.tau {
                cfg.tau = tau;
            }
            ScenarioConfig::Bimodal(cfg)
        }
        ScenarioName::Triangular => {
            let mut cfg = TriangularScenarioConfig { seed, grid, ..Default::default() };
            if let Some(n) = args.n {
                cfg.n = n;
            }
            if let Some(tau) = args.tau {
                cfg.tau = tau;
            }
            ScenarioConfig::Triangular(cfg)
        }
        ScenarioName::WarpedUniform => {
            let mut cfg = WarpedUniformScenarioConfig { seed, grid, ..Default::default() };
            if let Some(n) = args.n {
                cfg.n = n;
            }
            if let Some(tau) = args.tau {
                cfg.tau = tau;
            }
            ScenarioConfig::WarpedUniform(cfg)
        }
    })
}

fn kernel_policy(args: &RunArgs) -> KernelPolicy {
    match args.sigma {
        Some(sigma) => KernelPolicy::fixed_sigma(sigma),
        None => KernelPolicy::power(args.alpha.unwrap_or(phasesep::smoothing::DEFAULT_ALPHA)),
    }
}

fn write_json(path: &Path, value: &serde_json::Value) -> CliResult<()> {
    let mut file = fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut file, value)
        .map_err(|e| CliError::Io(e.to_string()))?;
    file.write_all(b"\n")?;
    Ok(())
}

fn write_truth_bundle(dir: &Path, draw: &ScenarioDraw, scenario: &ScenarioConfig) -> CliResult<()> {
    io::write_measure_csv(&dir.join("truth_lambda.csv"), &draw.structural_mean)?;
    io::write_warps_wide_csv(&dir.join("warps_true.csv"), &draw.true_warps)?;
    io::write_patterns(&dir.join("patterns_unwarped.json"), &draw.unwarped)?;
    io::write_patterns(&dir.join("patterns_warped.json"), &draw.warped)?;
    let counts: Vec<usize> = draw.warped.iter().map(|p| p.len()).collect();
    let mut summary = json!({
        "scenario": scenario.name(),
        "n": scenario.n(),
        "tau": scenario.tau(),
        "seed": scenario.seed(),
        "grid": scenario.grid(),
        "counts": counts,
    });
    if let Some(hs) = &draw.warp_slopes {
        summary["warp_slopes"] = json!(hs);
    }
    write_json(&dir.join("summary.json"), &summary)?;
    Ok(())
}

pub fn simulate(args: &RunArgs) -> CliResult<()> {
    let seed = args.require_seed()?;
    let dir = out_dir(args)?;
    let scenario = scenario_config(args, seed)?;
    let draw = scenario.simulate()?;
    write_truth_bundle(&dir, &draw, &scenario)?;
    println!(
        "simulated {} patterns ({} scenario) into {}",
        draw.warped.len(),
        scenario.name(),
        dir.display()
    );
    Ok(())
}

fn write_registration(dir: &Path, out: &RegistrationOutput, policy: &KernelPolicy) -> CliResult<()> {
    io::write_patterns(&dir.join("patterns_registered.json"), &out.registered)?;
    io::write_measure_csv(&dir.join("lambda_hat.csv"), &out.lambda_hat)?;
    let warp_dir = dir.join("warps");
    fs::create_dir_all(&warp_dir)?;
    for (i, (warp, inv)) in out.warps.iter().zip(&out.inverse_warps).enumerate() {
        io::write_warp_csv(&warp_dir.join(format!("warp_{i:03}.csv")), warp)?;
        io::write_warp_csv(&warp_dir.join(format!("registration_{i:03}.csv")), inv)?;
    }
    let summary = json!({
        "n": out.registered.len(),
        "c_hat": out.c_hat,
        "policy": format!("{policy:?}"),
    });
    write_json(&dir.join("summary.json"), &summary)?;
    Ok(())
}

pub fn register(args: &RunArgs) -> CliResult<()> {
    let input = args
        .input
        .clone()
        .ok_or_else(|| CliError::Usage("--input is required".into()))?;
    let dir = out_dir(args)?;
    let patterns = io::read_patterns(&input)?;
    let policy = kernel_policy(args);
    let grid = args.grid.unwrap_or(DEFAULT_GRID);
    let out = pipeline(&patterns, &policy, grid)?;
    write_registration(&dir, &out, &policy)?;
    println!(
        "registered {} patterns (c_hat = {:.2}) into {}",
        out.registered.len(),
        out.c_hat,
        dir.display()
    );
    Ok(())
}

fn study_cells(args: &RunArgs, default_cells: Vec<(usize, f64)>) -> CliResult<Vec<(usize, f64)>> {
    match &args.n_list {
        None => Ok(default_cells),
        Some(ns) => {
            let rule = args.tau_rule.clone().unwrap_or_else(|| "nsq".into());
            ns.iter()
                .map(|&n| {
                    let tau = if rule == "nsq" {
                        (n * n) as f64
                    } else {
                        rule.parse::<f64>().map_err(|_| {
                            CliError::Validation(format!(
                                "--tau-rule must be 'nsq' or a number, got '{rule}'"
                            ))
                        })?
                    };
                    Ok((n, tau))
                })
                .collect()
        }
    }
}

pub fn evaluate(args: &RunArgs) -> CliResult<()> {
    let seed = args.require_seed()?;
    let dir = out_dir(args)?;
    let study = args
        .study
        .ok_or_else(|| CliError::Usage("--study is required".into()))?;
    match study {
        StudyName::Consistency | StudyName::Rate => {
            let scenario = scenario_config(args, seed)?;
            let default_cells = match study {
                StudyName::Consistency => vec![(10, 100.0), (30, 400.0), (100, 2500.0)],
                _ => vec![(8, 64.0), (16, 256.0), (32, 1024.0), (64, 4096.0)],
            };
            let cells = study_cells(args, default_cells)?;
            let mut cfg = StudyConfig::new(scenario, cells, args.replicates.unwrap_or(20));
            cfg.seed = seed;
            cfg.grid = args.grid.unwrap_or(2049);
            cfg.policy = kernel_policy(args);
            if args.sigma.is_none() && args.alpha.is_none() {
                cfg.policy = KernelPolicy::power(1.0 / 3.0);
            }
            let report = run_study(&cfg)?;
            let value =
                serde_json::to_value(&report).map_err(|e| CliError::Io(e.to_string()))?;
            write_json(&dir.join("study_report.json"), &value)?;
            let mut cells_csv = String::from(
                "n,tau,median_w2,iqr_w2,median_warp_sup,median_registration_rms\n",
            );
            for c in &report.cells {
                cells_csv.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    c.n, c.tau, c.median_w2, c.iqr_w2, c.median_warp_sup,
                    c.median_registration_rms
                ));
            }
            fs::write(dir.join("cells.csv"), cells_csv)?;
            match report.w2_slope {
                Some(slope) => println!(
                    "{} study done: slope = {slope:.3}, smoothing-bound sweep pass = {}",
                    scenario_label(study),
                    report.lemma_sweep_pass
                ),
                None => println!(
                    "{} study done: smoothing-bound sweep pass = {}",
                    scenario_label(study),
                    report.lemma_sweep_pass
                ),
            }
        }
        StudyName::Clt => {
            let mut with_default = args.clone();
            with_default.scenario = Some(args.scenario.unwrap_or(ScenarioName::WarpedUniform));
            with_default.n = Some(args.n.unwrap_or(20));
            with_default.tau = Some(args.tau.unwrap_or(400.0));
            with_default.grid = Some(args.grid.unwrap_or(2049));
            let scenario = scenario_config(&with_default, seed)?;
            let report = clt_covariance_check(
                &scenario,
                args.replicates.unwrap_or(300),
                100_000,
                args.alpha.unwrap_or(0.75),
            )?;
            let value =
                serde_json::to_value(&report).map_err(|e| CliError::Io(e.to_string()))?;
            write_json(&dir.join("covariance_report.json"), &value)?;
            let mut csv = String::from("x,y,kappa_direct,kappa_empirical\n");
            for (i, &x) in report.xs.iter().enumerate() {
                for (j, &y) in report.xs.iter().enumerate() {
                    csv.push_str(&format!(
                        "{x},{y},{},{}\n",
                        report.direct[i][j], report.empirical[i][j]
                    ));
                }
            }
            fs::write(dir.join("covariance.csv"), csv)?;
            println!(
                "clt study done: max error / max|kappa| = {:.3}, sign agreement {:.0}%",
                report.max_scaled_error,
                100.0 * report.sign_agreement
            );
        }
        StudyName::Unbiasedness => {
            let cfg = SineWarpConfig::bimodal_default();
            let report =
                unbiasedness_mc(&cfg, args.replicates.unwrap_or(10_000), &interior_grid(), seed);
            let value =
                serde_json::to_value(&report).map_err(|e| CliError::Io(e.to_string()))?;
            write_json(&dir.join("unbiasedness_report.json"), &value)?;
            let mut csv = String::from("x,mean,standard_error,flagged\n");
            for (((x, m), se), f) in report
                .xs
                .iter()
                .zip(&report.means)
                .zip(&report.standard_errors)
                .zip(&report.flagged)
            {
                csv.push_str(&format!("{x},{m},{se},{f}\n"));
            }
            fs::write(dir.join("unbiasedness.csv"), csv)?;
            println!("unbiasedness study done: flags = {}", report.any_flagged());
        }
    }
    Ok(())
}

fn scenario_label(study: StudyName) -> &'static str {
    match study {
        StudyName::Consistency => "consistency",
        StudyName::Rate => "rate",
        StudyName::Clt => "clt",
        StudyName::Unbiasedness => "unbiasedness",
    }
}

fn triangular_density(t: f64) -> f64 {
    (1.0 - t.abs()).max(0.0)
}

pub fn reproduce(args: &RunArgs) -> CliResult<()> {
    let seed = args.require_seed()?;
    let dir = out_dir(args)?;
    let name = args
        .scenario
        .ok_or_else(|| CliError::Usage("--scenario is required".into()))?;
    if name == ScenarioName::WarpedUniform {
        return Err(CliError::Usage(
            "reproduce supports the bimodal and triangular scenarios".into(),
        ));
    }
    let scenario = scenario_config(args, seed)?;
    let draw = scenario.simulate()?;
    write_truth_bundle(&dir, &draw, &scenario)?;

    // scenario-scale defaults: one domain unit of smoothing for the bimodal,
    // 0.15 units for the triangular
    let sigma = args.sigma.unwrap_or(match name {
        ScenarioName::Bimodal => 1.0 / 32.0,
        _ => 0.025,
    });
    let policy = KernelPolicy::fixed_sigma(sigma);
    let grid = args.grid.unwrap_or(DEFAULT_GRID);
    let out = pipeline(&draw.warped, &policy, grid)?;
    write_registration(&dir, &out, &policy)?;
    io::write_warps_wide_csv(&dir.join("warps_estimated.csv"), &out.warps)?;

    let naive = arithmetic_mean(&out.lambda_hats)?;
    io::write_measure_csv(&dir.join("arithmetic_mean.csv"), &naive)?;

    let truth = &draw.structural_mean;
    let residual_center = match name {
        ScenarioName::Bimodal => 0.75,
        _ => 0.5,
    };
    let mut cdf_csv = String::from(
        "x,F_true,F_frechet,F_arithmetic,residual_frechet_centered,residual_arithmetic_centered\n",
    );
    for &x in truth.grid() {
        let ft = truth.cdf_at(x);
        let ff = out.lambda_hat.cdf_at(x);
        let fa = naive.cdf_at(x);
        cdf_csv.push_str(&format!(
            "{x},{ft},{ff},{fa},{},{}\n",
            ff - ft + residual_center,
            fa - ft + residual_center
        ));
    }
    fs::write(dir.join("cdf_comparison.csv"), cdf_csv)?;

    // pooled kernel density estimates from the warped and registered points
    let kde_bandwidth = match name {
        ScenarioName::Bimodal => 1.0,
        _ => 0.15,
    };
    let pool = |patterns: &[PointPattern]| -> Vec<f64> {
        patterns.iter().flat_map(|p| p.points().iter().copied()).collect()
    };
    let xs: Vec<f64> = truth.grid().to_vec();
    let kde_warped = gaussian_kde(&pool(&draw.warped), kde_bandwidth, &xs);
    let kde_registered = gaussian_kde(&pool(&out.registered), kde_bandwidth, &xs);
    let mut density_csv = String::from("x,f_true,kde_warped,kde_registered\n");
    for (i, &x) in xs.iter().enumerate() {
        let f_true = match name {
            ScenarioName::Bimodal => bimodal_density(x, 0.1),
            _ => triangular_density(x),
        };
        density_csv.push_str(&format!("{x},{f_true},{},{}\n", kde_warped[i], kde_registered[i]));
    }
    fs::write(dir.join("density_comparison.csv"), density_csv)?;

    let w2_frechet = phasesep::wasserstein2(&out.lambda_hat, truth)?;
    let w2_arithmetic = phasesep::wasserstein2(&naive, truth)?;
    let mut summary = json!({
        "scenario": scenario.name(),
        "seed": seed,
        "sigma": sigma,
        "c_hat": out.c_hat,
        "w2_frechet_to_truth": w2_frechet,
        "w2_arithmetic_to_truth": w2_arithmetic,
    });

    match name {
        ScenarioName::Bimodal => {
            let modes = find_modes(&out.lambda_hat, 1.0, 0.05, 4.0);
            let locs: Vec<f64> = modes.iter().take(2).map(|m| m.0).collect();
            summary["modes"] = json!(locs);
        }
        ScenarioName::Triangular => {
            let h_true = draw.warp_slopes.clone().unwrap_or_default();
            let lo = out.lambda_hat.quantile_at(0.05);
            let hi = out.lambda_hat.quantile_at(0.95);
            let fit_xs: Vec<f64> =
                (0..=100).map(|i| lo + (hi - lo) * i as f64 / 100.0).collect();
            let mut slopes = Vec::with_capacity(out.warps.len());
            let mut slope_csv = String::from("index,h_true,fitted_slope\n");
            for (i, warp) in out.warps.iter().enumerate() {
                let ys: Vec<f64> = fit_xs.iter().map(|&x| warp.apply(x)).collect();
                let (_, slope) = linear_fit(&fit_xs, &ys);
                slopes.push(slope);
                slope_csv.push_str(&format!("{i},{},{slope}\n", h_true[i]));
            }
            fs::write(dir.join("slopes.csv"), slope_csv)?;
            summary["slope_pearson_r"] = json!(pearson(&slopes, &h_true));
        }
        ScenarioName::WarpedUniform => unreachable!(),
    }
    write_json(&dir.join("summary.json"), &summary)?;
    println!(
        "reproduced {} scenario into {} (W2 frechet {:.4} vs arithmetic {:.4})",
        scenario.name(),
        dir.display(),
        w2_frechet,
        w2_arithmetic
    );
    Ok(())
}
