//! Exercises the C surface end to end: status codes, error messages,
//! handle lifecycles, data extraction, and — through a real C client
//! compiled against the generated header — the linkable artifact itself.

use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;

use risim::experiments::{self, RunOptions};
use risim::output::write_tables;
use risim::scenario::Scenario;

use risim_capi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(risim_last_error()).to_string_lossy().into_owned() }
}

fn take_string(ptr: *mut std::ffi::c_char) -> String {
    assert!(!ptr.is_null());
    let s = unsafe { CStr::from_ptr(ptr) }.to_string_lossy().into_owned();
    unsafe { risim_string_free(ptr) };
    s
}

fn preset(name: &CStr) -> *mut risim_scenario {
    let mut handle = std::ptr::null_mut();
    let status = unsafe { risim_scenario_preset(name.as_ptr(), &mut handle) };
    assert_eq!(status, risim_status::Ok, "{}", last_error());
    assert!(!handle.is_null());
    handle
}

fn scratch_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("risim-ffi-{tag}-{}", std::process::id()));
    std::fs::remove_dir_all(&dir).ok();
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn version_and_preset_listing() {
    let version = unsafe { CStr::from_ptr(risim_version()) }.to_str().unwrap();
    assert_eq!(version, risim::VERSION);

    let count = risim_preset_count();
    assert_eq!(count, 4);
    let mut names = Vec::new();
    for i in 0..count {
        let mut ptr = std::ptr::null_mut();
        assert_eq!(unsafe { risim_preset_name(i, &mut ptr) }, risim_status::Ok);
        names.push(take_string(ptr));
    }
    assert_eq!(names, ["fig5", "fig6", "fig7", "fig8"]);

    let mut ptr = std::ptr::null_mut();
    let status = unsafe { risim_preset_name(count, &mut ptr) };
    assert_eq!(status, risim_status::RuntimeError);
    assert!(last_error().contains("preset 4"), "{}", last_error());
}

#[test]
fn constructors_reject_bad_input() {
    let mut handle = std::ptr::null_mut();

    let status = unsafe { risim_scenario_preset(c"nope".as_ptr(), &mut handle) };
    assert_eq!(status, risim_status::ConfigError);
    assert!(last_error().contains("nope"), "{}", last_error());

    let status = unsafe { risim_scenario_from_toml(c"carrier_hz = ]".as_ptr(), &mut handle) };
    assert_eq!(status, risim_status::ConfigError);
    assert!(!last_error().is_empty());

    // Parses but fails validation: zero carrier.
    let bad = CString::new("carrier_hz = 0.0").unwrap();
    let status = unsafe { risim_scenario_from_toml(bad.as_ptr(), &mut handle) };
    assert_eq!(status, risim_status::ConfigError);
    assert!(last_error().contains("carrier_hz"), "{}", last_error());

    let invalid = CString::new([0xff_u8, 0xfe].as_slice()).unwrap();
    let status = unsafe { risim_scenario_from_toml(invalid.as_ptr(), &mut handle) };
    assert_eq!(status, risim_status::InvalidUtf8);

    let status = unsafe { risim_scenario_from_file(c"/no/such/file.toml".as_ptr(), &mut handle) };
    assert_eq!(status, risim_status::ConfigError);
    assert!(last_error().contains("/no/such/file.toml"), "{}", last_error());

    let status = unsafe { risim_scenario_preset(c"fig5".as_ptr(), std::ptr::null_mut()) };
    assert_eq!(status, risim_status::NullPointer);
    let status = unsafe { risim_scenario_preset(std::ptr::null(), &mut handle) };
    assert_eq!(status, risim_status::NullPointer);

    let status = unsafe { risim_scenario_validate(std::ptr::null()) };
    assert_eq!(status, risim_status::NullPointer);
}

#[test]
fn scenario_accessors_round_trip() {
    let handle = preset(c"fig5");

    assert_eq!(unsafe { risim_scenario_validate(handle) }, risim_status::Ok);
    assert_eq!(last_error(), "");

    let mut ptr = std::ptr::null_mut();
    assert_eq!(unsafe { risim_scenario_label(handle, &mut ptr) }, risim_status::Ok);
    assert_eq!(take_string(ptr), "fig5");

    let mut ptr = std::ptr::null_mut();
    assert_eq!(unsafe { risim_scenario_config_hash(handle, &mut ptr) }, risim_status::Ok);
    let hash = take_string(ptr);
    let expected = Scenario::preset("fig5").unwrap().config_hash().unwrap();
    assert_eq!(hash, expected);
    assert_eq!(hash.len(), 16);

    let mut ptr = std::ptr::null_mut();
    assert_eq!(
        unsafe { risim_scenario_canonical_toml(handle, &mut ptr) },
        risim_status::Ok
    );
    let toml_text = take_string(ptr);
    let reparsed = Scenario::from_toml_str(&toml_text).unwrap();
    assert_eq!(reparsed.config_hash().unwrap(), hash);

    let mut options = risim_run_options {
        seed: 0,
        ensemble: 0,
        workers: 99,
        evolution_mode: -1,
    };
    assert_eq!(
        unsafe { risim_scenario_default_options(handle, &mut options) },
        risim_status::Ok
    );
    assert_eq!(options.seed, 1);
    assert_eq!(options.ensemble, 10_000);
    assert_eq!(options.workers, 0);
    assert_eq!(options.evolution_mode, risim_evolution_mode::ScenarioDefault as i32);

    unsafe { risim_scenario_free(handle) };
    unsafe { risim_scenario_free(std::ptr::null_mut()) }; // tolerated
}

#[test]
fn run_produces_extractable_tables_matching_the_native_api() {
    let handle = preset(c"fig5");
    let options = risim_run_options {
        seed: 1,
        ensemble: 48,
        workers: 2,
        evolution_mode: risim_evolution_mode::ScenarioDefault as i32,
    };

    let mut tables = std::ptr::null_mut();
    let status = unsafe {
        risim_run(handle, risim_experiment::Acf as i32, &options, &mut tables)
    };
    assert_eq!(status, risim_status::Ok, "{}", last_error());
    assert_eq!(unsafe { risim_tables_count(tables) }, 2);
    assert_eq!(unsafe { risim_tables_count(std::ptr::null()) }, 0);

    let mut ptr = std::ptr::null_mut();
    assert_eq!(unsafe { risim_tables_name(tables, 0, &mut ptr) }, risim_status::Ok);
    assert_eq!(take_string(ptr), "acf_irs_anchor0");

    let (mut rows, mut cols) = (0usize, 0usize);
    assert_eq!(
        unsafe { risim_tables_dims(tables, 0, &mut rows, &mut cols) },
        risim_status::Ok
    );
    assert_eq!((rows, cols), (51, 7));

    let mut ptr = std::ptr::null_mut();
    assert_eq!(
        unsafe { risim_tables_column_name(tables, 0, 3, &mut ptr) },
        risim_status::Ok
    );
    assert_eq!(take_string(ptr), "sim_abs");
    let mut ptr = std::ptr::null_mut();
    assert_eq!(
        unsafe { risim_tables_column_unit(tables, 0, 0, &mut ptr) },
        risim_status::Ok
    );
    assert_eq!(take_string(ptr), "s");

    let mut data = vec![0.0f64; rows * cols];
    assert_eq!(
        unsafe { risim_tables_copy_data(tables, 0, data.as_mut_ptr(), data.len()) },
        risim_status::Ok
    );
    assert_eq!(data[0], 0.0); // zero lag
    assert_eq!(data[3], 1.0); // unit normalized magnitude at zero lag

    // The same numbers the native API produces, in the same order.
    let scenario = Scenario::preset("fig5").unwrap();
    let native_opts = RunOptions { seed: 1, ensemble: 48, workers: 2, mode: None };
    let native = experiments::run_acf(&scenario, &native_opts).unwrap();
    let flat: Vec<f64> = native[0].rows.iter().flatten().copied().collect();
    assert_eq!(data, flat);

    // Written files match the native writer byte for byte.
    let dir_c = scratch_dir("capi");
    let dir_native = scratch_dir("native");
    let dir_c_str = CString::new(dir_c.to_str().unwrap()).unwrap();
    assert_eq!(
        unsafe { risim_tables_write(tables, dir_c_str.as_ptr()) },
        risim_status::Ok
    );
    let stamp = experiments::run_stamp(&scenario, &native_opts).unwrap();
    let native_paths = write_tables(&native, &dir_native, &stamp).unwrap();
    for native_path in &native_paths {
        let name = native_path.file_name().unwrap();
        let from_c = std::fs::read(dir_c.join(name)).unwrap();
        let from_native = std::fs::read(native_path).unwrap();
        assert_eq!(from_c, from_native, "{name:?} differs");
    }
    std::fs::remove_dir_all(&dir_c).ok();
    std::fs::remove_dir_all(&dir_native).ok();

    // Out-of-domain requests are reported, not UB.
    let mut ptr = std::ptr::null_mut();
    assert_eq!(
        unsafe { risim_tables_name(tables, 9, &mut ptr) },
        risim_status::RuntimeError
    );
    let mut short = vec![0.0f64; 3];
    assert_eq!(
        unsafe { risim_tables_copy_data(tables, 0, short.as_mut_ptr(), short.len()) },
        risim_status::RuntimeError
    );
    assert!(last_error().contains("51 x 7"), "{}", last_error());

    let mut bogus = std::ptr::null_mut();
    assert_eq!(
        unsafe { risim_run(handle, 99, &options, &mut bogus) },
        risim_status::RuntimeError
    );
    assert!(last_error().contains("experiment"), "{}", last_error());
    let bad_mode = risim_run_options { evolution_mode: 7, ..options };
    assert_eq!(
        unsafe { risim_run(handle, risim_experiment::Acf as i32, &bad_mode, &mut bogus) },
        risim_status::RuntimeError
    );
    assert!(last_error().contains("evolution mode"), "{}", last_error());
    assert_eq!(
        unsafe { risim_run(std::ptr::null(), 0, &options, &mut bogus) },
        risim_status::NullPointer
    );

    unsafe { risim_tables_free(tables) };
    unsafe { risim_tables_free(std::ptr::null_mut()) }; // tolerated
    unsafe { risim_scenario_free(handle) };
}

#[test]
fn null_options_fall_back_to_the_scenario_settings() {
    // The pathloss sweep ignores the ensemble, so the scenario-default
    // path stays cheap.
    let handle = preset(c"fig5");
    let mut tables = std::ptr::null_mut();
    let status = unsafe {
        risim_run(
            handle,
            risim_experiment::Pathloss as i32,
            std::ptr::null(),
            &mut tables,
        )
    };
    assert_eq!(status, risim_status::Ok, "{}", last_error());
    assert_eq!(unsafe { risim_tables_count(tables) }, 2);
    unsafe { risim_tables_free(tables) };
    unsafe { risim_scenario_free(handle) };
}

fn include_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include")
}

fn artifact_dir() -> PathBuf {
    // target/<profile>/deps/this_test -> target/<profile>
    std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn header_compiles_under_strict_c_and_cpp() {
    let header = include_dir().join("risim.h");
    assert!(header.exists(), "generated header missing at {header:?}");
    let dir = scratch_dir("header");
    let probe = dir.join("probe.c");
    std::fs::write(
        &probe,
        "#include \"risim.h\"\n\
         int main(void) {\n\
           risim_run_options o = {1, 2, 0, RISIM_EVOLUTION_MODE_SCENARIO_DEFAULT};\n\
           (void)o;\n\
           return RISIM_STATUS_OK;\n\
         }\n",
    )
    .unwrap();
    for (compiler, extra) in [("cc", vec!["-std=c99"]), ("c++", vec!["-x", "c++"])] {
        let mut cmd = Command::new(compiler);
        cmd.args(["-fsyntax-only", "-Wall", "-Wextra", "-Werror"])
            .arg("-I")
            .arg(include_dir())
            .args(&extra)
            .arg(&probe);
        let out = cmd.output().expect("compiler must be present");
        assert!(
            out.status.success(),
            "{compiler} rejected the header:\n{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn c_client_builds_links_and_runs() {
    let lib_dir = artifact_dir();
    let shared = lib_dir.join("librisim_capi.so");
    assert!(
        shared.exists(),
        "shared library missing at {shared:?}; the library target must be built \
         before integration tests run"
    );

    let dir = scratch_dir("cclient");
    let source = dir.join("client.c");
    std::fs::write(
        &source,
        r#"#include <stdio.h>
#include <stdlib.h>
#include <string.h>
#include "risim.h"

static int fail(const char *what) {
    fprintf(stderr, "FAIL %s: %s\n", what, risim_last_error());
    return 1;
}

int main(void) {
    if (strlen(risim_version()) == 0) return fail("version");
    risim_scenario *scenario = NULL;
    if (risim_scenario_preset("fig5", &scenario) != RISIM_STATUS_OK)
        return fail("preset");
    risim_run_options options;
    if (risim_scenario_default_options(scenario, &options) != RISIM_STATUS_OK)
        return fail("options");
    options.ensemble = 16;
    options.workers = 1;
    risim_tables *tables = NULL;
    if (risim_run(scenario, RISIM_EXPERIMENT_ACF, &options, &tables) != RISIM_STATUS_OK)
        return fail("run");
    size_t count = risim_tables_count(tables);
    if (count != 2) { fprintf(stderr, "FAIL count %zu\n", count); return 1; }
    size_t rows = 0, cols = 0;
    if (risim_tables_dims(tables, 0, &rows, &cols) != RISIM_STATUS_OK)
        return fail("dims");
    if (rows != 51 || cols != 7) {
        fprintf(stderr, "FAIL dims %zu x %zu\n", rows, cols);
        return 1;
    }
    double *data = malloc(rows * cols * sizeof(double));
    if (!data) return fail("malloc");
    if (risim_tables_copy_data(tables, 0, data, rows * cols) != RISIM_STATUS_OK)
        return fail("copy");
    if (data[0] != 0.0 || data[3] != 1.0) {
        fprintf(stderr, "FAIL zero-lag row %g %g\n", data[0], data[3]);
        return 1;
    }
    char *hash = NULL;
    if (risim_scenario_config_hash(scenario, &hash) != RISIM_STATUS_OK)
        return fail("hash");
    printf("c-client ok: version %s, config %s, %zu tables\n",
           risim_version(), hash, count);
    risim_string_free(hash);
    free(data);
    risim_tables_free(tables);
    risim_scenario_free(scenario);
    return 0;
}
"#,
    )
    .unwrap();

    let binary = dir.join("client");
    let out = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Wextra", "-Werror"])
        .arg(&source)
        .arg("-I")
        .arg(include_dir())
        .arg("-L")
        .arg(&lib_dir)
        .arg(format!("-Wl,-rpath,{}", lib_dir.display()))
        .args(["-lrisim_capi", "-lm", "-lpthread", "-ldl"])
        .arg("-o")
        .arg(&binary)
        .output()
        .expect("cc must be present");
    assert!(
        out.status.success(),
        "link failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let run = Command::new(&binary).output().unwrap();
    assert!(
        run.status.success(),
        "client failed:\n{}{}",
        String::from_utf8_lossy(&run.stdout),
        String::from_utf8_lossy(&run.stderr)
    );
    let stdout = String::from_utf8_lossy(&run.stdout);
    assert!(stdout.contains("c-client ok"), "unexpected output: {stdout}");
    let expected_hash = Scenario::preset("fig5").unwrap().config_hash().unwrap();
    assert!(stdout.contains(&expected_hash), "hash missing from: {stdout}");
    std::fs::remove_dir_all(&dir).ok();
}
