use std::path::Path;

use num_complex::Complex64;

use gnls_core::forward::{default_eps_list, sweep};
use gnls_core::hierarchy::extract_series;
use gnls_core::inversion::{recover_all, OrderData};
use gnls_core::potential::CoefficientFunction;

use crate::config;
use crate::io::{write_file, write_reconstruction};
use crate::manifest::ManifestBuilder;
use crate::CliError;

pub fn run(config_path: &Path, out_override: Option<&Path>) -> Result<(), CliError> {
    let (cfg, text) = config::load(config_path)?;
    let out_dir = out_override
        .map(|p| p.to_path_buf())
        .unwrap_or_else(|| cfg.output.dir.clone().into());
    let mut manifest = ManifestBuilder::new("roundtrip", &text);

    manifest.start_stage("setup");
    let truth = cfg.potential.build()?;
    let grid = cfg.grids.spatial_grid(truth.support_width())?;
    let estimate = truth
        .epsilon_bound(cfg.grids.r_amplitude)
        .map_err(|e| CliError::Config(e.to_string()))?;
    manifest.add_diagnostic(format!("delta = {:.16e}", estimate.delta));
    let eps_list: Vec<Complex64> = if cfg.grids.eps.is_empty() {
        default_eps_list(estimate.delta, cfg.grids.eps_count)
    } else {
        cfg.grids
            .eps
            .iter()
            .map(|&e| Complex64::new(e, 0.0))
            .collect()
    };
    let mut warnings = Vec::new();
    for e in &eps_list {
        if e.norm() > estimate.delta {
            let line = format!(
                "|eps| = {:.3e} exceeds the guaranteed bound delta = {:.3e}",
                e.norm(),
                estimate.delta
            );
            eprintln!("warning: {line}");
            warnings.push(line);
        }
    }

    manifest.start_stage("sweep");
    let k_grid = cfg.grids.k_grid();
    let table = sweep(&truth, &k_grid, &eps_list, &grid)?;
    write_file(&out_dir, "sweep.csv", |w| table.write_table(w))?;
    manifest.add_output("sweep.csv");

    manifest.start_stage("extract");
    let fit_order = cfg.extract.n_max.min(eps_list.len());
    let series = extract_series(&table, fit_order)?;
    write_file(&out_dir, "series.csv", |w| series.write_table(w))?;
    manifest.add_output("series.csv");

    manifest.start_stage("invert");
    // The contour needs data at complex k; the synthesized potential itself
    // is the generative model for those values.
    let data = OrderData::Synthetic {
        potential: truth.clone(),
    };
    let recovery = cfg.inversion.recovery_config(cfg.potential.b)?;
    let q0 = truth.q0().clone();
    let results = recover_all(&data, q0, cfg.inversion.n_target, &recovery)?;

    manifest.start_stage("report");
    let mut rows = Vec::new();
    let mut failed = false;
    for result in &results {
        let name = format!("reconstruction_n{}.csv", result.order_n);
        write_reconstruction(&out_dir, &name, result)?;
        manifest.add_output(&name);

        let truth_coeff = truth.coeff(result.order_n - 1);
        let rel = relative_l2(&result.q, &result.nodes, &truth_coeff);
        if rel > cfg.roundtrip.tolerance {
            failed = true;
        }
        rows.push((result.order_n, rel));
        manifest.add_diagnostic(format!(
            "n = {}: relative_l2_error = {rel:.6e} (tolerance {:.1e})",
            result.order_n, cfg.roundtrip.tolerance
        ));
    }
    for warning in &warnings {
        manifest.add_diagnostic(format!("warning: {warning}"));
    }

    write_file(&out_dir, "report.csv", |w| {
        writeln!(w, "order_n,relative_l2_error,tolerance")?;
        for (n, rel) in &rows {
            writeln!(w, "{n},{rel:.16e},{:.16e}", cfg.roundtrip.tolerance)?;
        }
        Ok(())
    })?;
    manifest.add_output("report.csv");

    println!("order  relative L2 error  tolerance");
    for (n, rel) in &rows {
        let status = if *rel <= cfg.roundtrip.tolerance {
            "ok"
        } else {
            "FAIL"
        };
        println!(
            "q_{}    {rel:.6e}        {:.1e}  {status}",
            n - 1,
            cfg.roundtrip.tolerance
        );
    }
    manifest.write(&out_dir)?;

    if failed {
        return Err(CliError::Numerical(format!(
            "roundtrip exceeded the {:.1e} tolerance",
            cfg.roundtrip.tolerance
        )));
    }
    Ok(())
}

fn relative_l2(q: &[f64], nodes: &[f64], truth: &CoefficientFunction) -> f64 {
    let mut err = 0.0;
    let mut norm = 0.0;
    for (v, &x) in q.iter().zip(nodes) {
        let t = truth.eval(x);
        err += (v - t) * (v - t);
        norm += t * t;
    }
    if norm == 0.0 {
        return err.sqrt() / q.len() as f64;
    }
    (err / norm).sqrt()
}
