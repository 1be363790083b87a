#![allow(dead_code)]

use std::io::Write;
use std::path::Path;
use std::process::{Command, Stdio};

use tune::codegen::{emit_c, TuningTrees};

/// Compiles `trees` with a stdin/stdout harness and returns, for every row
/// of `inputs`, the outputs of all emitted functions.
pub fn run_emitted_c(trees: &TuningTrees, inputs: &[Vec<f64>], workdir: &Path) -> Result<Vec<Vec<f64>>, String> {
    let src = emit_c(trees, "t").map_err(|e| e.to_string())?;
    let k = trees.inputs().len();
    let mut main = String::from("#include <stdio.h>\n\nint main(void)\n{\n");
    main.push_str(&format!("    double x[{k}];\n    for (;;) {{\n"));
    for i in 0..k {
        main.push_str(&format!("        if (scanf(\"%lf\", &x[{i}]) != 1) return 0;\n"));
    }
    let args: Vec<String> = (0..k).map(|i| format!("x[{i}]")).collect();
    for (j, t) in trees.trees().iter().enumerate() {
        let name = format!("t_{}", tune::codegen::sanitize(&t.target.name));
        let sep = if j + 1 == trees.trees().len() { "\\n" } else { " " };
        main.push_str(&format!("        printf(\"%.17g{sep}\", {name}({}));\n", args.join(", ")));
    }
    main.push_str("    }\n}\n");

    let c_path = workdir.join("harness.c");
    let exe = workdir.join("harness");
    std::fs::write(&c_path, format!("{src}\n{main}")).map_err(|e| e.to_string())?;
    let out = Command::new("cc")
        .args(["-std=c99", "-O2", "-Wall", "-Wextra", "-Werror", "-o"])
        .arg(&exe)
        .arg(&c_path)
        .output()
        .map_err(|e| format!("cannot run cc: {e}"))?;
    if !out.status.success() {
        return Err(format!("cc failed: {}", String::from_utf8_lossy(&out.stderr)));
    }
    let mut child = Command::new(&exe)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .map_err(|e| e.to_string())?;
    let mut text = String::new();
    for row in inputs {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        text.push_str(&cells.join(" "));
        text.push('\n');
    }
    let mut stdin = child.stdin.take().expect("piped");
    let writer = std::thread::spawn(move || stdin.write_all(text.as_bytes()));
    let out = child.wait_with_output().map_err(|e| e.to_string())?;
    writer.join().expect("writer thread").map_err(|e| e.to_string())?;
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .map(|l| l.split(' ').map(|c| c.parse::<f64>().map_err(|e| format!("{c}: {e}"))).collect())
        .collect()
}

pub fn have_cc() -> bool {
    Command::new("cc").arg("--version").stdout(Stdio::null()).stderr(Stdio::null()).status().is_ok_and(|s| s.success())
}
