use std::path::Path;

use num_complex::Complex64;

use gnls_core::forward::{default_eps_list, sweep};

use crate::config;
use crate::io::write_file;
use crate::manifest::ManifestBuilder;
use crate::CliError;

pub fn run(config_path: &Path, out_override: Option<&Path>) -> Result<(), CliError> {
    let (cfg, text) = config::load(config_path)?;
    let out_dir = out_override
        .map(|p| p.to_path_buf())
        .unwrap_or_else(|| cfg.output.dir.clone().into());
    let mut manifest = ManifestBuilder::new("forward", &text);

    manifest.start_stage("setup");
    let potential = cfg.potential.build()?;
    let grid = cfg.grids.spatial_grid(potential.support_width())?;
    let estimate = potential
        .epsilon_bound(cfg.grids.r_amplitude)
        .map_err(|e| CliError::Config(e.to_string()))?;
    println!(
        "existence bound: delta = {:.6e} (r = {}, C = {:.6e})",
        estimate.delta, estimate.r, estimate.c_bound
    );
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
    for e in &eps_list {
        if e.norm() > estimate.delta {
            let line = format!(
                "|eps| = {:.3e} exceeds the guaranteed bound delta = {:.3e}; the solve may still succeed",
                e.norm(),
                estimate.delta
            );
            eprintln!("warning: {line}");
            manifest.add_diagnostic(format!("warning: {line}"));
        }
    }

    manifest.start_stage("sweep");
    let k_grid = cfg.grids.k_grid();
    let table = sweep(&potential, &k_grid, &eps_list, &grid)?;

    manifest.start_stage("write");
    write_file(&out_dir, "sweep.csv", |w| table.write_table(w))?;
    manifest.add_output("sweep.csv");
    println!(
        "wrote {} entries ({} k values x {} amplitudes) to {}",
        table.entries.len(),
        k_grid.len(),
        eps_list.len(),
        out_dir.join("sweep.csv").display()
    );
    manifest.write(&out_dir)
}
