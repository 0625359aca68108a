use std::path::Path;

use gnls_core::inversion::{recover_all, ConstantQ2, ExponentialQ2, OrderData};

use crate::config::{self, ExperimentConfig};
use crate::io::write_reconstruction;
use crate::manifest::ManifestBuilder;
use crate::CliError;

pub fn data_source(cfg: &ExperimentConfig) -> Result<OrderData, CliError> {
    let b = cfg.potential.b;
    let data = cfg
        .data
        .as_ref()
        .ok_or_else(|| CliError::Config("invert needs a [data] block".to_string()))?;
    match data.source.as_str() {
        "constant" => Ok(OrderData::ConstantQ2(ConstantQ2 {
            gamma: data.gamma.unwrap(),
            b,
        })),
        "exponential" => Ok(OrderData::ExponentialQ2(ExponentialQ2 {
            alpha: data.alpha.unwrap(),
            b,
        })),
        "synthetic" => Ok(OrderData::Synthetic {
            potential: cfg.potential.build()?,
        }),
        "series" => Err(CliError::Config(
            "data.source = \"series\" samples the real k-axis only; the contour needs data \
             evaluable at complex k. Entire extensions exist in principle, but numerical \
             continuation from tabulated real-k data is not performed — use a generative \
             source (constant, exponential, or synthetic) instead"
                .to_string(),
        )),
        _ => unreachable!("validated"),
    }
}

pub fn run(config_path: &Path, out_override: Option<&Path>) -> Result<(), CliError> {
    let (cfg, text) = config::load(config_path)?;
    let out_dir = out_override
        .map(|p| p.to_path_buf())
        .unwrap_or_else(|| cfg.output.dir.clone().into());
    let mut manifest = ManifestBuilder::new("invert", &text);

    manifest.start_stage("setup");
    let data = data_source(&cfg)?;
    let potential = cfg.potential.build()?;
    let q0 = potential.q0().clone();
    let recovery = cfg.inversion.recovery_config(cfg.potential.b)?;

    manifest.start_stage("recover");
    let results = recover_all(&data, q0, cfg.inversion.n_target, &recovery)
        .map_err(|e| CliError::Numerical(format!("order-tagged failure: {e}")))?;

    manifest.start_stage("write");
    for result in &results {
        let name = format!("reconstruction_n{}.csv", result.order_n);
        write_reconstruction(&out_dir, &name, result)?;
        manifest.add_output(&name);
        manifest.add_diagnostic(format!(
            "n = {}: xi = {:.6e}, linear_residual = {:.3e}, imag_residual = {:.3e}",
            result.order_n, result.xi, result.linear_residual, result.imag_residual
        ));
        for warning in &result.warnings {
            eprintln!("warning (n = {}): {warning}", result.order_n);
        }
        println!(
            "recovered q_{} on {} nodes (linear residual {:.3e})",
            result.order_n - 1,
            result.q.len(),
            result.linear_residual
        );
    }
    manifest.write(&out_dir)
}
