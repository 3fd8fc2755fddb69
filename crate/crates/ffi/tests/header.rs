use std::path::Path;
use std::process::Command;

const PROGRAM: &str = r#"
#include <stdio.h>
#include "wulfflab.h"

int main(void) {
    WlAnisotropy *f = NULL;
    WlEntry *e = NULL;
    char *json = NULL;
    double u[3] = {0.0, 0.0, 1.0}, out[3];
    double v = 0.0;
    size_t n = 0;
    if (wl_anisotropy_from_name("isotropic", 3, &f) != WL_STATUS_OK) {
        fprintf(stderr, "%s\n", wl_last_error());
        return 1;
    }
    wl_anisotropy_value(f, u, 3, &v);
    wl_anisotropy_phi(f, u, 3, out);
    wl_anisotropy_dual_norm(f, u, 3, &v);
    wl_anisotropy_audit_json(f, 16, &json);
    wl_string_free(json);
    wl_anisotropy_to_json(f, &json);
    wl_string_free(json);
    wl_entry_new(f, "plane", &e);
    wl_entry_curvatures(e, u, wl_entry_chart_dim(e), out, 3, &n);
    wl_entry_classify_json(e, 4, true, &json);
    wl_string_free(json);
    wl_entry_free(e);
    wl_anisotropy_free(f);
    return (int)wl_anisotropy_ambient_dim(NULL) + (wl_version() == NULL);
}
"#;

#[test]
fn header_compiles_as_c_and_cpp() {
    let dir = tempfile::tempdir().unwrap();
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    assert!(include.join("wulfflab.h").exists());
    for (compiler, file, std) in [("cc", "main.c", "-std=c99"), ("c++", "main.cpp", "-std=c++11")] {
        let src = dir.path().join(file);
        std::fs::write(&src, PROGRAM).unwrap();
        let out = Command::new(compiler)
            .args([std, "-Wall", "-Wextra", "-Werror", "-fsyntax-only", "-I"])
            .arg(&include)
            .arg(&src)
            .output()
            .unwrap_or_else(|e| panic!("{compiler}: {e}"));
        assert!(out.status.success(), "{compiler}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn c_program_links_and_runs() {
    // tests run from <target>/<profile>/deps; the static library sits one level up
    let exe = std::env::current_exe().unwrap();
    let lib_dir = exe.parent().and_then(Path::parent).unwrap();
    let lib = lib_dir.join("libwulfflab_ffi.a");
    assert!(lib.exists(), "{} missing", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    let bin = dir.path().join("main");
    std::fs::write(&src, PROGRAM).unwrap();
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let out = Command::new("cc")
        .args(["-std=c99", "-I"])
        .arg(&include)
        .arg(&src)
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&bin)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = Command::new(&bin).output().unwrap();
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
}
