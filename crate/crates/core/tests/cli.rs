use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use spo_core::manifest::RunManifest;
use spo_core::{QuboInstance, Schedule};

fn spo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spo"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn ok(args: &[&str]) {
    let out = spo(args);
    assert_eq!(code(&out), 0, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
}

fn read(path: impl AsRef<Path>) -> String {
    std::fs::read_to_string(path.as_ref()).unwrap_or_else(|e| panic!("{}: {e}", path.as_ref().display()))
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// JSON with every `wall_time_s` field zeroed.
fn without_timing(text: &str) -> Value {
    fn scrub(v: &mut Value) {
        match v {
            Value::Object(map) => {
                if map.contains_key("wall_time_s") {
                    map.insert("wall_time_s".into(), Value::from(0.0));
                }
                map.values_mut().for_each(scrub);
            }
            Value::Array(items) => items.iter_mut().for_each(scrub),
            _ => {}
        }
    }
    let mut v: Value = serde_json::from_str(text).unwrap();
    scrub(&mut v);
    v
}

#[test]
fn gen_is_deterministic_and_in_range() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    ok(&["gen", "--n", "5", "--seed", "17", "--out", s(&a)]);
    ok(&["gen", "--n", "5", "--seed", "17", "--out", s(&b)]);
    assert_eq!(read(&a), read(&b));
    let inst = QuboInstance::load(&a).unwrap();
    assert_eq!(inst.n_qubits(), 5);
    assert_eq!(inst.seed(), 17);
    assert!(inst.max_coefficient() <= 1.0);
    assert_eq!(inst.couplings().len(), 10);

    let raw: Value = serde_json::from_str(&read(&a)).unwrap();
    for key in ["n", "h", "J", "seed"] {
        assert!(raw.get(key).is_some(), "missing {key}");
    }
    assert!(dir.path().join("a.json.manifest.json").exists());
}

#[test]
fn gen_many_writes_one_file_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("set");
    ok(&["gen", "--n", "3", "--count", "4", "--seed", "10", "--out", s(&out)]);
    for seed in 10..14 {
        let inst = QuboInstance::load(out.join(format!("instance_{seed}.json"))).unwrap();
        assert_eq!(inst, QuboInstance::random(3, seed).unwrap());
    }
    let m = RunManifest::load(out.join("instances.manifest.json")).unwrap();
    assert_eq!(m.seeds, vec![10, 11, 12, 13]);
}

#[test]
fn gap_profile_has_one_row_per_grid_point_and_starts_at_two() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("i.json");
    let out = dir.path().join("gap.csv");
    ok(&["gen", "--n", "4", "--seed", "3", "--out", s(&inst)]);
    ok(&["gap", "--instance", s(&inst), "--N", "20", "--k", "3", "--out", s(&out)]);
    let text = read(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "i,s,lambda0,lambda1,lambda2,gap");
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 21);
    assert!((rows[0][5] - 2.0).abs() < 1e-8);
    assert_eq!(rows[20][1], 1.0);
}

#[test]
fn optimized_schedules_satisfy_their_limits() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("i.json");
    ok(&["gen", "--n", "3", "--seed", "5", "--out", s(&inst)]);
    for method in ["direct", "convex"] {
        let out = dir.path().join(format!("{method}.csv"));
        ok(&["optimize", "--instance", s(&inst), "--method", method, "--N", "20", "--fbound", "1", "--out", s(&out)]);
        let sched = Schedule::load(&out, Some((1.0, 2.5))).unwrap();
        assert_eq!(sched.intervals(), 20);
        assert!(sched.validate_with_tolerance(1e-8).is_empty(), "{method}");
        let report: Value = serde_json::from_str(&read(dir.path().join(format!("{method}.report.json")))).unwrap();
        match method {
            "direct" => {
                for key in ["objective_history", "final_min_gap", "i_min", "wall_time_s", "stall_flag"] {
                    assert!(report.get(key).is_some(), "missing {key}");
                }
            }
            _ => {
                for it in report.as_array().unwrap() {
                    for key in ["iter", "surrogate_objective", "true_min_gap", "i_min", "cuts_added", "eta", "wall_time_s"] {
                        assert!(it.get(key).is_some(), "missing {key}");
                    }
                }
            }
        }
    }
}

#[test]
fn trivial_instance_is_always_solved() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("zero.json");
    QuboInstance::trivial(3).unwrap().save(&inst).unwrap();
    let out = dir.path().join("sweep.csv");
    ok(&["evolve", "--instance", s(&inst), "--T", "0.5,5", "--fbound", "1", "--out", s(&out)]);
    let text = read(&out);
    assert!(text.starts_with("T,p_succ,norm_drift,steps\n"));
    for line in text.lines().skip(1) {
        let p: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!((p - 1.0).abs() < 1e-9, "{line}");
    }
}

#[test]
fn evolve_doubling_writes_a_convergence_table() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("i.json");
    let out = dir.path().join("run.csv");
    ok(&["gen", "--n", "3", "--seed", "8", "--out", s(&inst)]);
    ok(&["evolve", "--instance", s(&inst), "--T", "5", "--substeps", "8", "--doubling", "--out", s(&out)]);
    let text = read(dir.path().join("run.doubling.csv"));
    let delta: f64 = text.lines().nth(1).unwrap().split(',').nth(3).unwrap().parse().unwrap();
    assert!(delta.abs() < 1e-6);
}

#[test]
fn usage_and_schema_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"n": 2, "h": [0.1], "J": [], "seed": 0}"#).unwrap();
    let out = dir.path().join("x.csv");

    assert_eq!(code(&spo(&["study", "nonsense", "--out", s(dir.path())])), 2);
    assert_eq!(code(&spo(&["gap", "--instance", s(&bad), "--out", s(&out)])), 2);
    let missing = dir.path().join("missing.json");
    assert_eq!(code(&spo(&["gap", "--instance", s(&missing), "--out", s(&out)])), 2);

    std::fs::write(&bad, "{not json").unwrap();
    assert_eq!(code(&spo(&["gap", "--instance", s(&bad), "--out", s(&out)])), 2);

    let manifest = dir.path().join("study.json");
    std::fs::write(&manifest, r#"{"command": "study", "version": "0", "parameters": {"pool_sise": 3}, "seeds": [], "input_paths": [], "output_paths": [], "wall_time_s": 0}"#).unwrap();
    let err = spo(&["study", "mine", "--manifest", s(&manifest), "--out", s(dir.path())]);
    assert_eq!(code(&err), 2);
    assert!(String::from_utf8_lossy(&err.stderr).contains("pool_sise"));
}

#[test]
fn domain_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("i.json");
    ok(&["gen", "--n", "2", "--seed", "1", "--out", s(&inst)]);
    let out = dir.path().join("x.csv");
    assert_eq!(code(&spo(&["evolve", "--instance", s(&inst), "--T=-1", "--out", s(&out)])), 1);
    assert_eq!(code(&spo(&["gap", "--instance", s(&inst), "--N", "1", "--out", s(&out)])), 1);
}

#[test]
fn replay_reproduces_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("i.json");
    ok(&["gen", "--n", "3", "--seed", "2", "--out", s(&inst)]);

    let gap = dir.path().join("gap.csv");
    ok(&["gap", "--instance", s(&inst), "--N", "10", "--out", s(&gap)]);
    let gap2 = dir.path().join("gap2.csv");
    ok(&["replay", s(&dir.path().join("gap.csv.manifest.json")), "--out", s(&gap2)]);
    assert_eq!(read(&gap), read(&gap2));

    let opt = dir.path().join("opt.csv");
    ok(&["optimize", "--instance", s(&inst), "--N", "12", "--out", s(&opt)]);
    let opt2 = dir.path().join("opt2.csv");
    ok(&["replay", s(&dir.path().join("opt.csv.manifest.json")), "--out", s(&opt2)]);
    assert_eq!(read(&opt), read(&opt2));
    assert_eq!(
        without_timing(&read(dir.path().join("opt.report.json"))),
        without_timing(&read(dir.path().join("opt2.report.json")))
    );

    let study = dir.path().join("study");
    let params = dir.path().join("params.json");
    let m = RunManifest::new("study")
        .param("n_qubits", 3)
        .param("instances", 2)
        .param("perturbations", 4)
        .param("intervals", 10)
        .param("total_time", 2.0);
    std::fs::write(&params, m.to_json().unwrap()).unwrap();
    ok(&["study", "perturb", "--manifest", s(&params), "--out", s(&study)]);
    let again = dir.path().join("again");
    ok(&["replay", s(&study.join("results.csv.manifest.json")), "--out", s(&again)]);
    for f in ["results.csv", "summary.csv", "summary.json", "hist_omega.csv", "hist_delta_p.csv"] {
        assert_eq!(read(study.join(f)), read(again.join(f)), "{f}");
    }
    let recorded = RunManifest::load(study.join("results.csv.manifest.json")).unwrap();
    let edges: Vec<f64> = recorded.get("hist_omega_edges").unwrap();
    assert_eq!(edges.len(), recorded.get::<usize>("bins").unwrap() + 1);
    let params_of = |dir: &Path| {
        let mut v = without_timing(&read(dir.join("results.csv.manifest.json")))["parameters"].clone();
        v.as_object_mut().unwrap().remove("out");
        v
    };
    assert_eq!(params_of(&study), params_of(&again));
}

#[test]
fn thread_count_does_not_change_study_results() {
    let dir = tempfile::tempdir().unwrap();
    let params = dir.path().join("params.json");
    let m = RunManifest::new("study").param("n_qubits", 4).param("pool_size", 12).param("keep", 3).param("intervals", 10);
    std::fs::write(&params, m.to_json().unwrap()).unwrap();
    let one = dir.path().join("one");
    let four = dir.path().join("four");
    ok(&["--threads", "1", "study", "mine", "--manifest", s(&params), "--out", s(&one)]);
    ok(&["--threads", "4", "study", "mine", "--manifest", s(&params), "--out", s(&four)]);
    for f in ["kept.csv", "pool.csv"] {
        assert_eq!(read(one.join(f)), read(four.join(f)), "{f}");
    }
}
