use std::path::{Path, PathBuf};
use std::process::Command;

use eitcool::config::{Experiment, Scenario};
use eitcool::output::{gnuplot_stub, write_report, Table};
use eitcool::quantity::{Dimension, Quantity, Unit};
use eitcool::runner::{apply_sweep, run_scenario, settings, Overrides};
use eitcool_core::units::GAMMA_CA40;
use proptest::prelude::*;

fn scenarios_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios")
}

fn bundled() -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(scenarios_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    v.sort();
    v
}

fn eitcool(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_eitcool")).args(args).env("EITCOOL_WORKERS", "2").output().unwrap()
}

const SMALL_SCAN: &str = r#"
[scenario]
name = "small"

[[modes]]
label = "axial"
frequency = "0.2 Gamma"

[scheme]
kind = "single_eit"
mode = "axial"
delta = "3 Gamma"
field = "416 uT"

[[scheme.lasers]]
label = "pi397"
rabi = "0.3 Gamma"
eta_axial = 0.1

[[scheme.lasers]]
label = "sigma397"
rabi = "1.5 Gamma"

[[scheme.lasers]]
label = "d866"
rabi = "0.5 Gamma"

[experiment]
kind = "spectrum_scan"
start = "-0.2 Gamma"
stop = "0.6 Gamma"
points = 41
beam = "pi397"
analytic = true
"#;

fn small_cooling(extra: &str) -> String {
    format!(
        r#"
[scenario]
name = "cool"
fock = 6

[[modes]]
label = "axial"
frequency = "0.2 Gamma"
nbar0 = 1.0

[scheme]
kind = "single_eit"
mode = "axial"
delta = "3 Gamma"
coupling = "lambda"

[[scheme.lasers]]
label = "pi397"
rabi = "0.3 Gamma"
eta_axial = 0.1

[[scheme.lasers]]
label = "sigma397"
rabi = "1.5 Gamma"

[experiment]
kind = "cooling_trajectory"
duration = "0.2 us"
intervals = 10
{extra}
"#
    )
}

#[test]
fn quantities_parse_with_units_and_aliases() {
    let q: Quantity = "2.552 MHz".parse().unwrap();
    assert_eq!(q, Quantity::new(2.552, Unit::MHz));
    assert!((q.si(1.0) - std::f64::consts::TAU * 2.552e6).abs() < 1e-6);
    let g: Quantity = "3.4 Gamma".parse().unwrap();
    assert_eq!(g.si(2.0), 6.8);
    assert_eq!(g.si_default(), 3.4 * GAMMA_CA40);
    assert_eq!("416 µT".parse::<Quantity>().unwrap(), Quantity::new(416.0, Unit::Microtesla));
    assert_eq!("45 1/s".parse::<Quantity>().unwrap().unit, Unit::PerSecond);
    assert_eq!("-1e-3 s".parse::<Quantity>().unwrap(), Quantity::new(-1e-3, Unit::Second));
    assert_eq!("2e6rad/s".parse::<Quantity>().unwrap(), Quantity::new(2e6, Unit::RadPerS));
    assert_eq!("4 G".parse::<Quantity>().unwrap().si(0.0), 4e-4);
    for bad in ["", "MHz", "3", "3 furlongs", "inf MHz", "1..2 Hz"] {
        assert!(bad.parse::<Quantity>().is_err(), "{bad:?} accepted");
    }
}

#[test]
fn quantity_dimension_check() {
    let q: Quantity = "200 us".parse().unwrap();
    assert!(q.expect(Dimension::Time).is_ok());
    let e = q.expect(Dimension::Frequency).unwrap_err();
    assert!(e.to_string().contains("expected a frequency"), "{e}");
}

proptest! {
    #[test]
    fn quantity_display_round_trips(v in -1e9f64..1e9, k in 0usize..15) {
        let units = [
            Unit::RadPerS, Unit::Hz, Unit::KHz, Unit::MHz, Unit::GHz, Unit::Gamma, Unit::Tesla, Unit::Millitesla,
            Unit::Microtesla, Unit::Gauss, Unit::Second, Unit::Millisecond, Unit::Microsecond, Unit::Nanosecond,
            Unit::PerSecond,
        ];
        let q = Quantity::new(v, units[k]);
        let back: Quantity = q.to_string().parse().unwrap();
        prop_assert_eq!(back, q);
    }
}

#[test]
fn bundled_scenarios_parse_and_round_trip() {
    let files = bundled();
    assert!(files.len() >= 8);
    for p in files {
        let s = Scenario::load(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        let again = Scenario::parse(&s.to_toml().unwrap()).unwrap();
        assert_eq!(again, s, "{}", p.display());
    }
}

#[test]
fn unknown_fields_are_rejected() {
    let typo = SMALL_SCAN.replace("points = 41", "points = 41\npionts = 3");
    assert!(Scenario::parse(&typo).is_err());
    let typo = SMALL_SCAN.replace("eta_axial = 0.1", "eta_axail = 0.1");
    assert!(Scenario::parse(&typo).is_err());
    let unit = SMALL_SCAN.replace("\"3 Gamma\"", "\"3\"");
    let e = Scenario::parse(&unit).unwrap_err().to_string();
    assert!(e.contains("missing unit"), "{e}");
}

#[test]
fn check_prints_canonical_form() {
    let path = scenarios_dir().join("deit_scan.toml");
    let out = eitcool(&["check", path.to_str().unwrap()]);
    assert!(out.status.success());
    let printed = Scenario::parse(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(printed, Scenario::load(&path).unwrap());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let run = |text: &str| {
        let p = dir.path().join("s.toml");
        std::fs::write(&p, text).unwrap();
        eitcool(&["run", p.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()])
    };
    assert_eq!(run(SMALL_SCAN).status.code(), Some(0));
    assert_eq!(run("not toml [").status.code(), Some(2));
    assert_eq!(run(&SMALL_SCAN.replace("kind = \"spectrum_scan\"", "kind = \"teleport\"")).status.code(), Some(2));
    // A probe stronger than the tuned total Rabi frequency has no valid tuning.
    let untunable = format!("{SMALL_SCAN}\n[scheme.tune]\naxial = \"0.2 Gamma\"\n").replace("rabi = \"0.3 Gamma\"", "rabi = \"5 Gamma\"");
    assert_eq!(run(&untunable).status.code(), Some(3));
    let missing = eitcool(&["run", dir.path().join("absent.toml").to_str().unwrap()]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("absent.toml"));
}

#[test]
fn scan_output_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("small.toml");
    std::fs::write(&p, SMALL_SCAN).unwrap();
    let mut contents = Vec::new();
    for (k, workers) in ["1", "3"].iter().enumerate() {
        let out = dir.path().join(format!("o{k}"));
        let o = eitcool(&["run", p.to_str().unwrap(), "--out", out.to_str().unwrap(), "--workers", workers]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        contents.push(std::fs::read(out.join("small_scan.csv")).unwrap());
        assert!(out.join("small_analytic.csv").exists() || out.join("small_extrema.csv").exists());
    }
    assert_eq!(contents[0], contents[1]);
    let text = String::from_utf8(contents[0].clone()).unwrap();
    assert_eq!(text.lines().count(), 42);
}

#[test]
fn gnuplot_stubs_reference_every_column() {
    let mut t = Table::new("scan", &["x", "a", "b"]);
    t.push_numbers(&[0.0, 1.0, 2.0]);
    let s = gnuplot_stub("run_scan.csv", &t);
    assert!(s.contains("set output 'run_scan.png'"));
    assert!(s.contains("'run_scan.csv' using 1:2") && s.contains("'run_scan.csv' using 1:3"));
    assert!(!s.contains("using 1:4"));

    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("small.toml");
    std::fs::write(&p, SMALL_SCAN).unwrap();
    let out = dir.path().join("o");
    let o = eitcool(&["run", p.to_str().unwrap(), "--out", out.to_str().unwrap(), "--gnuplot-stub"]);
    assert!(o.status.success());
    assert!(out.join("small_scan.gp").exists());
    assert!(!out.join("small_summary.gp").exists());
}

#[test]
fn sweep_applies_one_parameter_per_point() {
    let scn = Scenario::parse(SMALL_SCAN).unwrap();
    let q: Quantity = "4 Gamma".parse().unwrap();
    assert_eq!(apply_sweep(&scn, "delta", q).unwrap().scheme.delta, q);
    let s = apply_sweep(&scn, "omega_sigma", q).unwrap();
    assert_eq!(s.scheme.lasers.iter().find(|l| l.label == "sigma397").unwrap().rabi, q);
    assert_eq!(apply_sweep(&scn, "mode_frequency", q).unwrap().modes[0].frequency, q);
    assert!(apply_sweep(&scn, "field", q).is_err());
    assert!(apply_sweep(&scn, "tune_axial", q).is_err());
    assert!(apply_sweep(&scn, "colour", q).is_err());

    let text = format!("{SMALL_SCAN}\n[sweep]\nparameter = \"delta\"\nvalues = [\"2 Gamma\", \"3 Gamma\"]\n");
    let scn = Scenario::parse(&text).unwrap();
    let rep = run_scenario(&scn, &settings(&scn, Overrides::default()), Path::new(".")).unwrap();
    let index = rep.table("sweep").unwrap();
    assert_eq!(index.rows.len(), 2);
    assert!(rep.table("sweep000_scan").is_some() && rep.table("sweep001_scan").is_some());
    // The 3 Gamma point reproduces the unswept run.
    let plain = Scenario::parse(SMALL_SCAN).unwrap();
    let single = run_scenario(&plain, &settings(&plain, Overrides::default()), Path::new(".")).unwrap();
    assert_eq!(rep.table("sweep001_scan").unwrap().rows, single.table("scan").unwrap().rows);
}

#[test]
fn checkpoint_restores_the_final_state() {
    let dir = tempfile::tempdir().unwrap();
    let first = Scenario::parse(&small_cooling("checkpoint = true")).unwrap();
    let set = settings(&first, Overrides::default());
    let rep = run_scenario(&first, &set, dir.path()).unwrap();
    write_report(dir.path(), "cool", &rep, false).unwrap();
    let ckpt = dir.path().join("cool_checkpoint.bin");
    assert!(ckpt.exists());
    let final_nbar = rep.summary_value("final_nbar").unwrap().to_string();

    let second = Scenario::parse(&small_cooling("restore = \"cool_checkpoint.bin\"")).unwrap();
    let rep2 = run_scenario(&second, &set, dir.path()).unwrap();
    let traj = rep2.table("trajectory").unwrap();
    assert_eq!(traj.rows[0][1], final_nbar);
    let n: Vec<f64> = traj.column("nbar").unwrap();
    assert!(n.last().unwrap() < n.first().unwrap());

    let wrong = settings(&second, Overrides { fock: Some(7), tolerance: None });
    let e = run_scenario(&second, &wrong, dir.path()).unwrap_err();
    assert_eq!(e.exit_code(), 2);
    assert!(run_scenario(&second, &set, Path::new("/nonexistent")).unwrap_err().exit_code() == 1);
}

#[test]
fn overrides_take_precedence() {
    let scn = Scenario::parse(&small_cooling("")).unwrap();
    assert_eq!(settings(&scn, Overrides::default()).fock, 6);
    let s = settings(&scn, Overrides { fock: Some(9), tolerance: Some(1e-6) });
    assert_eq!((s.fock, s.tolerance), (9, 1e-6));
    assert!(matches!(scn.experiment, Experiment::CoolingTrajectory { .. }));
}
