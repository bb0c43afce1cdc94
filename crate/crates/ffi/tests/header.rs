use std::path::{Path, PathBuf};
use std::process::Command;

fn header() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include").join("senmap.h")
}

#[test]
fn header_declares_the_api() {
    let text = std::fs::read_to_string(header()).expect("header generated by build script");
    for name in [
        "senmap_last_error",
        "senmap_network_init",
        "senmap_network_forward",
        "senmap_network_free",
        "senmap_multihead_prune",
        "senmap_senone_map_from_counts",
        "senmap_phone_map_from_counts",
        "senmap_map_apply",
        "typedef struct SenmapNetwork SenmapNetwork",
        "#define SENMAP_ERR_IO 27",
    ] {
        assert!(text.contains(name), "header lacks {name}");
    }
}

/// Compiles and runs a small C program against the shared library when a C
/// compiler and the built library are present.
#[test]
fn c_program_links_and_runs() {
    let Ok(cc) = which_cc() else {
        eprintln!("no C compiler found; skipping");
        return;
    };
    let exe = std::env::current_exe().unwrap();
    let target_dir = exe.parent().and_then(Path::parent).unwrap();
    let lib = target_dir.join(if cfg!(target_os = "macos") { "libsenmap_ffi.dylib" } else { "libsenmap_ffi.so" });
    if !lib.exists() {
        eprintln!("{} not built; skipping", lib.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("smoke.c");
    std::fs::write(
        &src,
        r#"
#include <stdio.h>
#include "senmap.h"
int main(void) {
    size_t dims[3] = {2, 4, 3};
    SenmapNetwork *net = NULL;
    if (senmap_network_init(dims, 3, 7, &net) != SENMAP_OK) return 1;
    double x[2] = {0.5, -0.5};
    double p[3];
    if (senmap_network_forward(net, x, 2, p, 3) != SENMAP_OK) return 2;
    double s = p[0] + p[1] + p[2];
    if (s < 0.999999 || s > 1.000001) return 3;
    if (senmap_network_forward(net, x, 1, p, 3) != SENMAP_ERR_SHAPE) return 4;
    if (senmap_last_error()[0] == '\0') return 5;
    senmap_network_free(net);
    printf("ok\n");
    return 0;
}
"#,
    )
    .unwrap();
    let bin = dir.path().join("smoke");
    let status = Command::new(&cc)
        .arg(&src)
        .arg("-I")
        .arg(header().parent().unwrap())
        .arg("-L")
        .arg(target_dir)
        .arg("-lsenmap_ffi")
        .arg(format!("-Wl,-rpath,{}", target_dir.display()))
        .arg("-o")
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "C program exited with {:?}", out.status.code());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "ok");
}

fn which_cc() -> Result<String, ()> {
    for cc in ["cc", "gcc", "clang"] {
        if Command::new(cc).arg("--version").output().is_ok_and(|o| o.status.success()) {
            return Ok(cc.to_string());
        }
    }
    Err(())
}
