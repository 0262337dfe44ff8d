use std::path::Path;
use std::process::{Command, Output};

fn eigent(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eigent"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

/// CSV contents with the timestamp column blanked.
fn without_timestamp(path: &Path) -> String {
    let text = std::fs::read_to_string(path).unwrap();
    text.lines()
        .map(|line| {
            let mut cells: Vec<&str> = line.split(',').collect();
            if cells.len() > 4 {
                cells[4] = "";
            }
            cells.join(",")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("config.toml");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn quadcheck_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let o = eigent(&["quadcheck", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(dir.path().join("quadcheck.csv")).unwrap();
    assert!(
        text.starts_with("schema_version,experiment,seed,code_version,timestamp,n,m,f,quantity,label,value")
    );
    assert!(text.contains("half_filling_integral"));
}

#[test]
fn page_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "[page]\ntrials = 200\ngrid = [[2, 2], [2, 8]]\nconcentration_d_a = 2\nconcentration_d_b = [4, 64]\n",
    );
    let mut outputs = Vec::new();
    for (run, threads) in [("a", "1"), ("b", "3")] {
        let out = dir.path().join(run);
        let o = eigent(&[
            "page",
            "--config",
            &config,
            "--seed",
            "11",
            "--threads",
            threads,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        outputs.push(without_timestamp(&out.join("page.csv")));
    }
    assert_eq!(outputs[0], outputs[1]);

    let other = dir.path().join("c");
    eigent(&["page", "--config", &config, "--seed", "12", "--out", other.to_str().unwrap()]);
    assert_ne!(outputs[0], without_timestamp(&other.join("page.csv")));
}

#[test]
fn figure1_small_chain() {
    let dir = tempfile::tempdir().unwrap();
    let o = eigent(&[
        "figure1",
        "--n-list",
        "6,8",
        "--g",
        "1.05",
        "--h",
        "0.5",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(dir.path().join("figure1.csv")).unwrap();
    assert!(text.contains(",sbar,"));
    assert!(text.contains(",theory_correction,"));
}

#[test]
fn unknown_config_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "sead = 3\n");
    let o = eigent(&["page", "--config", &config, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(!dir.path().join("page.csv").exists());
}

#[test]
fn invalid_parameters_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let config = write_config(dir.path(), "samples_per_sector = 10\n");
    assert_eq!(code(&eigent(&["modelm", "--config", &config, "--n-list", "6", "--out", out])), 2);
    assert_eq!(code(&eigent(&["figure1", "--n-list", "7", "--out", out])), 2);
    assert_eq!(code(&eigent(&["modelm", "--n-list", "40", "--out", out])), 2);
}

#[test]
fn failed_check_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "tightness_band = 1.0\nm_values = [2]\n[disorder]\nn = 6\nm = 3\nseeds = [1]\n",
    );
    let o =
        eigent(&["bounds", "--config", &config, "--n-list", "6,8", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 1, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("bounds.csv").exists());
    assert!(dir.path().join("entropy_records.csv").exists());
}
