//! End-to-end behaviour of the command-line entry point.

use std::fs;
use std::path::Path;

use regtan::cli::run_cli;
use regtan::model::synthetic::{gapped_dataset, GappedSpec};

fn write_data(dir: &Path) -> String {
    let d = gapped_dataset(42, GappedSpec::default());
    let mut text = String::from("x,y\n");
    for (x, y) in d.inputs().iter().zip(d.labels()) {
        let regtan::model::RawInput::Scalar(x) = x else { unreachable!() };
        text.push_str(&format!("{x:e},{y:e}\n"));
    }
    let path = dir.join("data.csv");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn run(dir: &Path, args: &[&str]) -> i32 {
    let out = dir.to_str().unwrap();
    let mut argv = vec!["regtan", "--out-dir", out];
    argv.extend_from_slice(args);
    run_cli(argv)
}

#[test]
fn fit_writes_six_coefficients_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_data(dir.path());
    assert_eq!(run(dir.path(), &["fit", "--degree", "5", "--s", "0.05", "--method", "normal", &data]), 0);
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("fit.json")).unwrap()).unwrap();
    assert_eq!(json["theta"].as_array().unwrap().len(), 6);
    assert_eq!(json["s"].as_f64(), Some(0.05));
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("fit.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"].as_u64(), Some(42));
    assert_eq!(manifest["subcommand"], "fit");
}

#[test]
fn every_subcommand_succeeds_on_reference_data() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_data(dir.path());
    let cands = dir.path().join("cands.csv");
    fs::write(&cands, "x\n-1.0\n0.0\n0.5\n1.05\n").unwrap();
    let cands = cands.to_str().unwrap();
    for args in [
        vec!["tangent", &data],
        vec!["tangent", "--tangent-method", "cg", &data],
        vec!["influence", "--test", &data, &data],
        vec!["query", "--candidates", cands, "--heuristic", "sti-labeled", &data],
        vec!["query", "--candidates", cands, "--heuristic", "si", "--reference-set", "0", &data],
        vec!["cv", "--grid", "5", &data],
        vec!["lissa-check"],
    ] {
        assert_eq!(run(dir.path(), &args), 0, "{args:?}");
    }
    let query = fs::read_to_string(dir.path().join("query.csv")).unwrap();
    assert!(query.starts_with("rank,index,x,raw,normalized"));
    assert_eq!(query.lines().count(), 5);
    let cv = fs::read_to_string(dir.path().join("cv.csv")).unwrap();
    assert_eq!(cv.lines().count(), 6);
}

#[test]
fn exit_codes_follow_error_class() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_data(dir.path());
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "a,b\n1,2\n").unwrap();
    assert_eq!(run(dir.path(), &["fit", bad.to_str().unwrap()]), 1);
    assert_eq!(run(dir.path(), &["fit", "missing.csv"]), 1);
    assert_eq!(run(dir.path(), &["bogus"]), 1);
    assert_eq!(run(dir.path(), &["--help"]), 0);
    // Singular Hessian: unregularized degree-9 fit on six points.
    assert_eq!(run(dir.path(), &["tangent", "--degree", "9", "--s", "0", &data]), 2);
    // Ten SGDF epochs are far from the fixed point.
    assert_eq!(run(dir.path(), &["tangent", "--tangent-method", "sgdf", "--epochs", "10", &data]), 3);
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let data = write_data(a.path());
    for dir in [a.path(), b.path()] {
        assert_eq!(run(dir, &["fit", "--method", "sgd", "--epochs", "2000", &data]), 0);
        assert_eq!(run(dir, &["repro", "--points", "50"]), 0);
    }
    let mut compared = 0;
    for entry in fs::read_dir(b.path()).unwrap() {
        let name = entry.unwrap().file_name().into_string().unwrap();
        if name.ends_with(".manifest.json") || name == "data.csv" {
            continue;
        }
        assert_eq!(fs::read(a.path().join(&name)).unwrap(), fs::read(b.path().join(&name)).unwrap(), "{name}");
        compared += 1;
    }
    assert_eq!(compared, 6);
}
