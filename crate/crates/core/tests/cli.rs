//! End-to-end runs of the `fluxmap` binary.

mod common;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use fluxmap::mapped::parse_mapped_blif;
use fluxmap::netlist::parse_blif;
use fluxmap::oracle::{check_equivalence, WithLibrary};
use fluxmap::report::parse_report;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("cli");
    fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fluxmap"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn alu_input() -> PathBuf {
    let p = scratch("alu4.blif");
    fs::write(&p, common::alu(4)).unwrap();
    p
}

#[test]
fn maps_verifies_and_reports() {
    let input = alu_input();
    let out = scratch("alu4.mapped.blif");
    let report = scratch("alu4.report");
    let lib = data("mcnc.genlib");
    let o = run(&[
        "--input",
        input.to_str().unwrap(),
        "--lib",
        lib.to_str().unwrap(),
        "--output",
        out.to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
        "--verify",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let l = common::lib(common::MCNC);
    let mapped = parse_mapped_blif(&fs::read_to_string(&out).unwrap(), &l).unwrap();
    assert!(mapped.balanced && mapped.splitter_legal);
    let source = parse_blif(&common::alu(4)).unwrap();
    assert!(check_equivalence(&source, &WithLibrary(&mapped, &l))
        .unwrap()
        .is_equivalent());
    let r = parse_report(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(r["mode"], "sfq");
    assert_eq!(r["final.dff_count"], mapped.dff_count().to_string());
    assert_eq!(r["final.logical_depth"], mapped.logical_depth().to_string());
    let psd0: f64 = r["phase1.psd"].parse().unwrap();
    let psd1: f64 = r["final.psd"].parse().unwrap();
    assert!(psd1 <= psd0);
}

#[test]
fn output_is_deterministic() {
    let input = alu_input();
    let lib = data("sfq.genlib");
    let args = ["--input", input.to_str().unwrap(), "--lib", lib.to_str().unwrap()];
    let a = stdout(&run(&args));
    let b = stdout(&run(&args));
    assert_eq!(a, b);
    assert!(a.contains(".gate"));
}

#[test]
fn zero_iterations_and_baseline_flags() {
    let input = data("f.blif");
    let lib = data("mcnc.genlib");
    let base = ["--input", input.to_str().unwrap(), "--lib", lib.to_str().unwrap()];
    let report = scratch("f.report");
    let mut args = base.to_vec();
    args.extend([
        "-i",
        "0",
        "--baseline",
        "--balance-outputs",
        "--report",
        report.to_str().unwrap(),
    ]);
    stdout(&run(&args));
    let r = parse_report(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(r["mode"], "baseline");
    assert_eq!(r["final.iterations"], "0");
    for key in ["gate_count", "dff_count", "splitter_count", "logical_depth", "psd"] {
        assert_eq!(r[&format!("phase1.{key}")], r[&format!("final.{key}")], "{key}");
    }
}

#[test]
fn bad_arguments_fail_cleanly() {
    let input = data("f.blif");
    let lib = data("mcnc.genlib");
    let o = run(&[
        "--input",
        input.to_str().unwrap(),
        "--lib",
        lib.to_str().unwrap(),
        "-k",
        "9",
    ]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("cut size"));
    let o = run(&["--input", "/nonexistent.blif", "--lib", lib.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("nonexistent"));
}
