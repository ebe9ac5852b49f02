use std::path::Path;
use std::process::{Command, Output};

fn hyqubit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hyqubit")).args(args).output().expect("spawn hyqubit")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const SMALL: &str = r#"
name = "small"
protocol = "bb84"
encoding = "polarization"

[basis]
m_max = 1
p_max = 0

[grid]
n_radial = 32
n_azimuthal = 64
r_max = 6.0

[sweep]
variable = "theta"
start = 0
stop = 30
step = 15
"#;

#[test]
fn lists_every_preset() {
    let o = hyqubit(&["list-presets"]);
    assert!(o.status.success());
    let s = stdout(&o);
    for name in ["fig3a-hybrid", "fig3a-polarization", "fig3c-tomography", "classify-knife"] {
        assert!(s.lines().any(|l| l.starts_with(name)), "{name} missing");
    }
}

#[test]
fn preset_writes_csv_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p.csv");
    let o = hyqubit(&["preset", "fig3a-polarization", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("theta,fidelity_0,"));
    assert_eq!(lines.next().unwrap().split(',').nth(5), Some("1"));
    assert_eq!(text.lines().count(), 1 + 25);
}

#[test]
fn run_is_byte_identical_across_invocations() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.toml", SMALL);
    let a = hyqubit(&["run", &cfg, "--out", "-"]);
    let b = hyqubit(&["run", &cfg, "--out", "-", "--threads", "1"]);
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
    let s = stdout(&a);
    assert_eq!(s.lines().count(), 4);
    assert!(s.lines().nth(2).unwrap().starts_with("15,0.933012701892,"));
}

#[test]
fn invalid_config_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", "name = \"x\"\nprotocol = \"bb84\"\n[[channel]]\nop = \"aperture\"\nradius = -1\n");
    let o = hyqubit(&["run", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("channel[0]"));
    let missing = hyqubit(&["run", "/nonexistent/x.toml"]);
    assert_eq!(missing.status.code(), Some(1));
    let unknown = hyqubit(&["preset", "no-such-preset"]);
    assert_eq!(unknown.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(hyqubit(&["bogus"]).status.code(), Some(1));
    assert_eq!(hyqubit(&["run"]).status.code(), Some(1));
    assert_eq!(hyqubit(&["--help"]).status.code(), Some(0));
}

#[test]
fn fully_blocked_channel_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "dark.toml",
        "name = \"x\"\nprotocol = \"bb84\"\n[basis]\nm_max = 2\np_max = 1\n[[channel]]\nop = \"knife\"\nedge = 30\n",
    );
    assert_eq!(hyqubit(&["run", &cfg]).status.code(), Some(2));
}

#[test]
fn coeffs_table_has_one_row_per_mode_pair() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.toml",
        "name = \"c\"\nprotocol = \"coeffs\"\n[basis]\nm_max = 1\np_max = 1\n[grid]\nn_radial = 48\nn_azimuthal = 64\nr_max = 6.0\n[[channel]]\nop = \"displacement\"\ndelta = 0.2\ntheta = 0\n",
    );
    let o = hyqubit(&["coeffs", &cfg]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = stdout(&o);
    assert_eq!(s.lines().next(), Some("m,m_prime,p,p_prime,re,im"));
    assert_eq!(s.lines().count(), 1 + 6 * 6);
}

#[test]
fn classify_reports_invariance_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let body = |theta_d: f64| {
        format!(
            "name = \"k\"\nprotocol = \"mub_fidelity\"\n[basis]\nm_max = 3\np_max = 2\n[grid]\nn_radial = 64\nn_azimuthal = 64\nr_max = 6.0\n[[channel]]\nop = \"combined\"\ndelta = 0.3\ntheta_d = {theta_d}\nalpha_w0 = 0.3\neta = 0\n"
        )
    };
    let aligned = write(dir.path(), "a.toml", &body(0.0));
    let crossed = write(dir.path(), "b.toml", &body(90.0));
    let a = stdout(&hyqubit(&["classify", &aligned]));
    let b = stdout(&hyqubit(&["classify", &crossed]));
    let field = |s: &str, k: usize| s.lines().nth(1).unwrap().split(',').nth(k).unwrap().to_string();
    assert_eq!(field(&a, 1), "true");
    assert_eq!(field(&b, 1), "false");
    assert_eq!(field(&a, 5), "true");
    assert_eq!(field(&b, 5), "true");
}
