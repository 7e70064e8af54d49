use std::path::{Path, PathBuf};
use std::process::Command;

fn manifest_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(manifest_dir().join("include/coherence_ledger.h")).unwrap();
    for item in [
        "typedef struct ClState ClState;",
        "typedef struct ClSystem ClSystem;",
        "CL_STATUS_NULL_POINTER = 3",
        "cl_last_error_message(void)",
        "cl_state_from_json(",
        "cl_w_coh(",
        "cl_qfi(",
        "cl_tradeoff_bound(",
        "cl_ising_spectrum(",
    ] {
        assert!(header.contains(item), "missing `{item}`");
    }
}

fn static_lib() -> Option<PathBuf> {
    // target/<profile>/deps/<test binary> -> target/<profile>
    let exe = std::env::current_exe().ok()?;
    let dir = exe.parent()?.parent()?;
    let lib = dir.join("libcoherence_ledger_ffi.a");
    lib.exists().then_some(lib)
}

fn have(tool: &str) -> bool {
    Command::new(tool).arg("--version").output().is_ok()
}

#[test]
fn c_program_links_and_runs() {
    let (Some(lib), true) = (static_lib(), have("cc")) else {
        eprintln!("skipped: no C compiler or static library");
        return;
    };
    let tmp = tempfile::tempdir().unwrap();
    let src = tmp.path().join("smoke.c");
    std::fs::write(
        &src,
        r#"
#include <math.h>
#include <stdio.h>
#include "coherence_ledger.h"

int main(void) {
    const char *doc = "{\"beta\": 1, \"state\": {\"kind\": \"ghz\", \"params\": {\"n\": 3}}}";
    ClState *s = NULL;
    if (cl_state_from_json(doc, &s) != CL_STATUS_OK) { fprintf(stderr, "%s\n", cl_last_error_message()); return 1; }
    double w = -1, f = -1;
    if (cl_w_coh(s, 1.0, &w) != CL_STATUS_OK || cl_qfi(s, &f) != CL_STATUS_OK) return 2;
    cl_state_free(s);
    if (fabs(w) > 1e-9 || fabs(f - 9.0) > 1e-9) return 3;
    if (cl_qfi(NULL, &f) != CL_STATUS_NULL_POINTER) return 4;
    printf("ok\n");
    return 0;
}
"#,
    )
    .unwrap();
    let exe = tmp.path().join("smoke");
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(manifest_dir().join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm"])
        .arg("-o")
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C compilation failed");
    let out = Command::new(Path::new(&exe)).output().unwrap();
    assert!(out.status.success(), "smoke program exited with {:?}", out.status.code());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "ok");
}
