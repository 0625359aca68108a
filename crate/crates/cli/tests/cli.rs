//! End-to-end tests of the command-line interface: exit codes, file
//! formats, determinism, and the documented error paths.

use std::path::Path;
use std::process::{Command, Output};

fn gnls() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gnls"))
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

fn zero_potential_config(out_dir: &Path) -> String {
    format!(
        r#"
[potential]
b = 1.0
degree = 0

[grids]
nx = 400
k_min = 0.5
k_max = 2.0
k_count = 3
eps = [0.05, 0.1]

[output]
dir = "{}"
"#,
        out_dir.display()
    )
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

#[test]
fn forward_zero_potential_produces_trivial_columns() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.toml");
    let out = dir.path().join("out");
    write(&config, &zero_potential_config(&out));

    let output = run(gnls().args(["forward", "--config"]).arg(&config));
    assert!(
        output.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );

    let table = std::fs::read_to_string(out.join("sweep.csv")).unwrap();
    let mut lines = table.lines();
    assert_eq!(lines.next().unwrap(), "k,re_eps,im_eps,re_a,im_a,re_b,im_b");
    for line in lines {
        let fields: Vec<f64> = line.split(',').map(|f| f.parse().unwrap()).collect();
        // outgoing coefficient vanishes, incoming equals eps
        assert!(fields[3].abs() <= 1e-10 && fields[4].abs() <= 1e-10);
        assert!((fields[5] - fields[1]).abs() <= 1e-10);
        assert!(fields[6].abs() <= 1e-10);
    }
    assert!(out.join("manifest.toml").exists());
}

#[test]
fn forward_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.toml");
    let out = dir.path().join("out");
    write(&config, &zero_potential_config(&out));

    assert!(run(gnls().args(["forward", "--config"]).arg(&config))
        .status
        .success());
    let first = std::fs::read(out.join("sweep.csv")).unwrap();
    let rerun = run(gnls().args(["forward", "--config"]).arg(&config));
    assert!(rerun.status.success());
    // identical config hash warns before overwriting
    assert!(
        String::from_utf8_lossy(&rerun.stderr).contains("identical configuration"),
        "stderr: {}",
        String::from_utf8_lossy(&rerun.stderr)
    );
    let second = std::fs::read(out.join("sweep.csv")).unwrap();
    assert_eq!(first, second, "sweep files must be byte-identical");
}

#[test]
fn zero_amplitude_in_config_exits_with_code_2() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.toml");
    write(
        &config,
        r#"
[potential]
b = 1.0
degree = 0

[grids]
nx = 400
k_min = 0.5
k_max = 2.0
k_count = 3
eps = [0.05, 0.0]
"#,
    );
    let output = run(gnls().args(["forward", "--config"]).arg(&config));
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("eps"), "stderr: {stderr}");
}

#[test]
fn extract_rejects_truncated_table_naming_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.toml");
    let out = dir.path().join("out");
    write(&config, &zero_potential_config(&out));
    let sweep = dir.path().join("sweep.csv");
    write(
        &sweep,
        "k,re_eps,im_eps,re_a,im_a,re_b,im_b\n1.0,0.05,0.0,0.0\n",
    );
    let output = run(gnls()
        .args(["extract", "--config"])
        .arg(&config)
        .arg("--input")
        .arg(&sweep));
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("line 2"), "stderr: {stderr}");
}

#[test]
fn extract_pure_q2_sweep_has_vanishing_second_order() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.toml");
    let out = dir.path().join("out");
    write(
        &config,
        &format!(
            r#"
[potential]
b = 1.0
degree = 2

[[potential.coefficients]]
power = 2
kind = "constant"
value = 1.0

[grids]
nx = 2000
k_min = 0.8
k_max = 1.6
k_count = 2
eps = [0.004, 0.00635, 0.008, 0.0101, 0.016]

[extract]
n_max = 5

[output]
dir = "{}"
"#,
            out.display()
        ),
    );
    assert!(run(gnls().args(["forward", "--config"]).arg(&config))
        .status
        .success());
    let output = run(gnls()
        .args(["extract", "--config"])
        .arg(&config)
        .arg("--input")
        .arg(out.join("sweep.csv")));
    assert!(output.status.success());

    let series = std::fs::read_to_string(out.join("series.csv")).unwrap();
    for line in series.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        if fields[0] == "2" {
            let re: f64 = fields[3].parse().unwrap();
            let im: f64 = fields[4].parse().unwrap();
            assert!(re.hypot(im) <= 1e-6, "A2 should vanish, got {line}");
        }
    }
}

#[test]
fn invert_constant_gamma_recovers_the_plateau() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.toml");
    let out = dir.path().join("out");
    write(
        &config,
        &format!(
            r#"
[potential]
b = 1.0
degree = 2

[data]
source = "constant"
gamma = 2.0

[inversion]
n_target = 3
xi = 0.05
m_modes = 64
nx_inv = 512

[output]
dir = "{}"
"#,
            out.display()
        ),
    );
    let output = run(gnls().args(["invert", "--config"]).arg(&config));
    assert!(
        output.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );

    let table = std::fs::read_to_string(out.join("reconstruction_n3.csv")).unwrap();
    let mut err_sq = 0.0;
    let mut count = 0usize;
    for line in table.lines() {
        if line.starts_with('#') || line.starts_with('x') {
            continue;
        }
        let fields: Vec<f64> = line.split(',').map(|f| f.parse().unwrap()).collect();
        err_sq += (fields[1] - 2.0) * (fields[1] - 2.0);
        count += 1;
    }
    let rel = (err_sq / count as f64).sqrt() / 2.0;
    assert!(rel <= 1e-2, "relative recovery error {rel:e}");
    // order 2 of the pure-q2 data is identically zero
    let n2 = std::fs::read_to_string(out.join("reconstruction_n2.csv")).unwrap();
    for line in n2.lines() {
        if line.starts_with('#') || line.starts_with('x') {
            continue;
        }
        let fields: Vec<f64> = line.split(',').map(|f| f.parse().unwrap()).collect();
        assert!(fields[1].abs() <= 1e-8, "q1 should vanish: {line}");
    }
}

#[test]
fn invert_with_series_data_documents_the_complex_k_gap() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.toml");
    write(
        &config,
        r#"
[potential]
b = 1.0
degree = 2

[data]
source = "series"
path = "series.csv"
"#,
    );
    let output = run(gnls().args(["invert", "--config"]).arg(&config));
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("complex k"), "stderr: {stderr}");
}

#[test]
fn roundtrip_command_passes_its_tolerance() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.toml");
    let out = dir.path().join("out");
    write(
        &config,
        &format!(
            r#"
[potential]
b = 1.0
degree = 2

[[potential.coefficients]]
power = 1
kind = "sinusoid"
amplitude = 0.3
wavenumber = 3.14159265358979312

[[potential.coefficients]]
power = 2
kind = "exponential"
rate = 0.5

[grids]
nx = 2000
k_min = 0.5
k_max = 5.0
k_count = 8
eps = []
eps_count = 5

[inversion]
n_target = 3
xi = 0.05
m_modes = 48
nx_inv = 384

[output]
dir = "{}"
"#,
            out.display()
        ),
    );
    let output = run(gnls().args(["roundtrip", "--config"]).arg(&config));
    assert!(
        output.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    let report = std::fs::read_to_string(out.join("report.csv")).unwrap();
    assert!(
        report.lines().count() >= 3,
        "report should list both orders"
    );
    for name in [
        "sweep.csv",
        "series.csv",
        "reconstruction_n2.csv",
        "reconstruction_n3.csv",
    ] {
        assert!(out.join(name).exists(), "{name} missing");
    }
}

#[test]
fn unknown_example_name_lists_valid_choices() {
    let output = run(gnls().args(["example", "--name", "bogus"]));
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("constant_gamma") && stderr.contains("exponential_alpha"));
}

#[test]
fn selfcheck_passes_on_a_fresh_build() {
    let output = run(gnls().arg("selfcheck"));
    assert!(output.status.success());
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("PASS"));
    assert!(!stdout.contains("FAIL"));
}
