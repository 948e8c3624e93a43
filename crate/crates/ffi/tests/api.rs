use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use fluxmap_ffi::*;

const MCNC: &str = include_str!("../../core/data/mcnc.genlib");
const F: &str = include_str!("../../core/data/f.blif");

fn last_error() -> String {
    let p = fm_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string()
}

fn take_string(p: *mut std::ffi::c_char) -> String {
    assert!(!p.is_null());
    let s = unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string();
    unsafe { fm_string_free(p) };
    s
}

struct Handles {
    lib: *mut FmLibrary,
    net: *mut FmNetlist,
}

impl Handles {
    fn new(blif: &str) -> Self {
        let genlib = CString::new(MCNC).unwrap();
        let blif = CString::new(blif).unwrap();
        let mut lib = ptr::null_mut();
        let mut net = ptr::null_mut();
        unsafe {
            assert_eq!(
                fm_library_from_genlib(genlib.as_ptr(), ptr::null(), &mut lib),
                FmStatus::Ok
            );
            assert_eq!(fm_netlist_from_blif(blif.as_ptr(), &mut net), FmStatus::Ok);
        }
        Handles { lib, net }
    }
}

impl Drop for Handles {
    fn drop(&mut self) {
        unsafe {
            fm_netlist_free(self.net);
            fm_library_free(self.lib);
        }
    }
}

#[test]
fn map_and_read_back() {
    let h = Handles::new(F);
    assert!(unsafe { fm_library_gate_count(h.lib) } > 0);
    let mut opts = fm_map_options_default();
    opts.verify = true;
    let mut res = ptr::null_mut();
    assert_eq!(unsafe { fm_map(h.net, h.lib, &opts, &mut res) }, FmStatus::Ok);
    assert!(fm_last_error_message().is_null());
    let mut p1 = FmStats {
        gate_count: 0,
        dff_count: 0,
        splitter_count: 0,
        logical_depth: 0,
        iterations: 0,
        worst_stage_delay: 0.0,
        psd: 0.0,
        runtime_s: 0.0,
    };
    let mut fin = p1;
    assert_eq!(unsafe { fm_result_stats(res, &mut p1, &mut fin) }, FmStatus::Ok);
    assert_eq!((fin.logical_depth, fin.dff_count), (2, 1));
    assert!(fin.psd <= p1.psd);
    let mut text = ptr::null_mut();
    assert_eq!(unsafe { fm_result_blif(res, &mut text) }, FmStatus::Ok);
    let blif = take_string(text);
    assert!(blif.starts_with(".model f"));
    assert_eq!(blif.lines().filter(|l| l.starts_with(".gate DFF")).count(), 1);
    let mut rep = ptr::null_mut();
    assert_eq!(unsafe { fm_result_report(res, &mut rep) }, FmStatus::Ok);
    let report = take_string(rep);
    assert!(report.contains("final.logical_depth=2"));
    unsafe { fm_result_free(res) };
}

#[test]
fn errors_are_reported_with_codes() {
    let mut lib = ptr::null_mut();
    assert_eq!(
        unsafe { fm_library_from_genlib(ptr::null(), ptr::null(), &mut lib) },
        FmStatus::NullPointer
    );
    assert!(lib.is_null());
    assert!(last_error().contains("genlib"));

    let bad = CString::new("GATE broken").unwrap();
    assert_eq!(
        unsafe { fm_library_from_genlib(bad.as_ptr(), ptr::null(), &mut lib) },
        FmStatus::ParseError
    );
    assert!(last_error().starts_with("genlib:"));

    let invalid = [0xffu8, 0xfe, 0];
    let mut net = ptr::null_mut();
    assert_eq!(
        unsafe { fm_netlist_from_blif(invalid.as_ptr().cast(), &mut net) },
        FmStatus::InvalidUtf8
    );

    let h = Handles::new(F);
    let mut opts = fm_map_options_default();
    opts.cut_size = 9;
    let mut res = ptr::null_mut();
    assert_eq!(unsafe { fm_map(h.net, h.lib, &opts, &mut res) }, FmStatus::MapError);
    assert!(res.is_null());
    assert!(last_error().contains("cut size"));
    assert_eq!(
        unsafe { fm_map(ptr::null(), h.lib, ptr::null(), &mut res) },
        FmStatus::NullPointer
    );
    assert_eq!(
        unsafe { fm_map(h.net, h.lib, ptr::null(), ptr::null_mut()) },
        FmStatus::NullPointer
    );
}

#[test]
fn null_handles_are_harmless() {
    unsafe {
        fm_library_free(ptr::null_mut());
        fm_netlist_free(ptr::null_mut());
        fm_result_free(ptr::null_mut());
        fm_string_free(ptr::null_mut());
        assert_eq!(fm_library_gate_count(ptr::null()), 0);
        assert_eq!(
            fm_result_stats(ptr::null(), ptr::null_mut(), ptr::null_mut()),
            FmStatus::NullPointer
        );
    }
    let v = unsafe { CStr::from_ptr(fm_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

fn profile_dir() -> PathBuf {
    // target/<profile>/deps/<test binary>
    std::env::current_exe()
        .unwrap()
        .parent()
        .unwrap()
        .parent()
        .unwrap()
        .to_path_buf()
}

#[test]
fn c_program_links_against_the_header_and_static_library() {
    let crate_dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let header_dir = crate_dir.join("include");
    assert!(header_dir.join("fluxmap.h").exists());
    let archive = profile_dir().join("libfluxmap_ffi.a");
    assert!(archive.exists(), "{} missing", archive.display());
    let exe = Path::new(env!("CARGO_TARGET_TMPDIR")).join("fluxmap_smoke");
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let status = Command::new(&cc)
        .args(["-std=c11", "-Wall", "-Werror", "-o"])
        .arg(&exe)
        .arg(crate_dir.join("tests").join("smoke.c"))
        .arg("-I")
        .arg(&header_dir)
        .arg(&archive)
        .args(["-lpthread", "-ldl", "-lm"])
        .status()
        .expect("C compiler runs");
    assert!(status.success());
    let data = crate_dir.join("../core/data");
    let out = Command::new(&exe)
        .arg(data.join("f.blif"))
        .arg(data.join("mcnc.genlib"))
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status,
        String::from_utf8_lossy(&out.stderr)
    );
    let lib = fluxmap::genlib::parse_genlib(MCNC, fluxmap::genlib::BuiltinParams::default()).unwrap();
    let raw = fluxmap::netlist::parse_blif(F).unwrap();
    let want = fluxmap::pipeline::map_netlist(&raw, &lib, &fluxmap::pipeline::MapConfig::default())
        .unwrap()
        .stats;
    let line = String::from_utf8_lossy(&out.stdout).trim().to_string();
    let field = |k: &str| line.split(' ').find_map(|kv| kv.strip_prefix(k)).unwrap().to_string();
    assert_eq!(field("depth="), want.logical_depth.to_string());
    assert_eq!(field("dffs="), want.dff_count.to_string());
    assert!((field("psd=").parse::<f64>().unwrap() - want.psd).abs() < 1e-9);
}
