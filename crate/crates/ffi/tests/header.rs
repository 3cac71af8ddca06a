use std::path::{Path, PathBuf};
use std::process::Command;

fn manifest_dir() -> &'static Path {
    Path::new(env!("CARGO_MANIFEST_DIR"))
}

fn header() -> String {
    std::fs::read_to_string(manifest_dir().join("include/wbrier.h")).expect("header generated by build.rs")
}

#[test]
fn header_declares_the_whole_api() {
    let h = header();
    assert!(h.contains("#ifndef WBRIER_H"));
    assert!(h.contains("typedef struct WbDataset WbDataset;"));
    assert!(h.contains("typedef struct WbWeight WbWeight;"));
    for status in [
        "WB_STATUS_OK = 0",
        "WB_STATUS_NULL_POINTER = 1",
        "WB_STATUS_INVALID_ARGUMENT = 2",
        "WB_STATUS_DEGENERATE = 4",
        "WB_STATUS_PANIC = 6",
    ] {
        assert!(h.contains(status), "missing {status}");
    }
    let source = std::fs::read_to_string(manifest_dir().join("src/lib.rs")).unwrap();
    let exported: Vec<&str> = source
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exported.len() > 25);
    for name in exported {
        assert!(h.contains(&format!(" {name}(")) || h.contains(&format!("*{name}(")), "{name} missing from header");
    }
}

/// `target/<profile>`, where cargo places the static library.
fn profile_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(Path::parent).unwrap().to_path_buf()
}

#[test]
fn c_program_links_and_runs() {
    let lib = profile_dir().join("libwbrier_ffi.a");
    assert!(lib.exists(), "{} not built", lib.display());
    let out_dir = tempfile::tempdir().unwrap();
    let exe = out_dir.path().join("smoke");
    let status = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-I"])
        .arg(manifest_dir().join("include"))
        .arg(manifest_dir().join("tests/c/smoke.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .expect("cc available");
    assert!(status.success());
    let run = Command::new(&exe).output().unwrap();
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert_eq!(
        String::from_utf8(run.stdout).unwrap().trim(),
        format!("wbrier {} ok", env!("CARGO_PKG_VERSION"))
    );
}
