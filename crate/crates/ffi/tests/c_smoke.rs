use std::path::PathBuf;
use std::process::Command;

/// Compiles `smoke.c` against the generated header and the static library.
#[test]
fn c_program_links_and_runs() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().unwrap().parent().unwrap();
    let lib = profile_dir.join("libcovstar_ffi.a");
    assert!(lib.exists(), "static library missing at {}", lib.display());
    let out_dir = tempfile::tempdir().unwrap();
    let bin = out_dir.path().join("smoke");
    let status = Command::new("cc")
        .arg(dir.join("tests/smoke.c"))
        .arg("-I")
        .arg(dir.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .expect("run cc");
    assert!(status.success());
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(
        text.contains("\"x1*x2\"") && text.contains("\"1\""),
        "{text}"
    );
}
