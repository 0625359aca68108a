//! Data-file writers beyond the table formats owned by the core crate.

use std::io::Write;
use std::path::Path;

use gnls_core::inversion::ReconstructionResult;

use crate::CliError;

pub fn write_file(
    out_dir: &Path,
    name: &str,
    write: impl FnOnce(&mut dyn Write) -> std::io::Result<()>,
) -> Result<(), CliError> {
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Numerical(format!("cannot create {}: {e}", out_dir.display())))?;
    let path = out_dir.join(name);
    let mut file = std::fs::File::create(&path)
        .map_err(|e| CliError::Numerical(format!("cannot create {}: {e}", path.display())))?;
    write(&mut file)
        .map_err(|e| CliError::Numerical(format!("cannot write {}: {e}", path.display())))?;
    Ok(())
}

/// Reconstruction table: diagnostics header comment, then
/// `x,q_recovered,imag_residual_local` rows in full precision.
pub fn write_reconstruction(
    out_dir: &Path,
    name: &str,
    result: &ReconstructionResult,
) -> Result<(), CliError> {
    write_file(out_dir, name, |w| {
        writeln!(w, "# reconstruction of q_{}", result.order_n - 1)?;
        writeln!(w, "# order_n = {}", result.order_n)?;
        writeln!(w, "# xi = {:.16e}", result.xi)?;
        writeln!(w, "# m_modes = {}", result.m_max)?;
        writeln!(w, "# method = {}", result.method)?;
        writeln!(w, "# route = {}", result.route.label())?;
        writeln!(w, "# s_xi = {:.16e}", result.s_xi)?;
        writeln!(w, "# linear_residual = {:.16e}", result.linear_residual)?;
        writeln!(w, "# imag_residual = {:.16e}", result.imag_residual)?;
        if let Some(terms) = result.neumann_terms {
            writeln!(w, "# neumann_terms = {terms}")?;
        }
        for warning in &result.warnings {
            writeln!(w, "# warning: {warning}")?;
        }
        writeln!(w, "x,q_recovered,imag_residual_local")?;
        for ((x, q), imag) in result.nodes.iter().zip(&result.q).zip(&result.q_imag) {
            writeln!(w, "{x:.16e},{q:.16e},{:.16e}", imag.abs())?;
        }
        Ok(())
    })
}
