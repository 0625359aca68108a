use std::path::Path;

use gnls_core::forward::ScatteringSweep;
use gnls_core::hierarchy::extract_series;

use crate::config;
use crate::io::write_file;
use crate::manifest::ManifestBuilder;
use crate::CliError;

pub fn run(config_path: &Path, input: &Path, out_override: Option<&Path>) -> Result<(), CliError> {
    let (cfg, text) = config::load(config_path)?;
    let out_dir = out_override
        .map(|p| p.to_path_buf())
        .unwrap_or_else(|| cfg.output.dir.clone().into());
    let mut manifest = ManifestBuilder::new("extract", &text);

    manifest.start_stage("parse");
    let table_text = std::fs::read_to_string(input)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", input.display())))?;
    let table = ScatteringSweep::parse_table(&table_text)
        .map_err(|e| CliError::Config(format!("{}: {e}", input.display())))?;
    if table.eps_list.len() < cfg.extract.n_max {
        return Err(CliError::Config(format!(
            "extraction to order {} needs at least that many amplitudes; the sweep has {}",
            cfg.extract.n_max,
            table.eps_list.len()
        )));
    }

    manifest.start_stage("fit");
    let series = extract_series(&table, cfg.extract.n_max)
        .map_err(|e| CliError::Numerical(format!("{e}; consider a wider amplitude spread")))?;
    let worst_residual = series
        .fit_residuals
        .iter()
        .fold(0.0f64, |acc, r| acc.max(*r));
    manifest.add_diagnostic(format!("max_fit_residual = {worst_residual:.16e}"));
    println!(
        "extracted orders 1..={} over {} wavenumbers; max fit residual {worst_residual:.3e}",
        cfg.extract.n_max,
        series.k_grid.len()
    );

    manifest.start_stage("write");
    write_file(&out_dir, "series.csv", |w| series.write_table(w))?;
    manifest.add_output("series.csv");
    manifest.write(&out_dir)
}
