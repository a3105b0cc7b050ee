use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn safegrid(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_safegrid")).args(args).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const SMALL: &str = "pretrain_episodes = 300\ntrain_episodes = 40\ntrain_runs = 2\n";

fn small_config(dir: &Path) -> String {
    let path = dir.join("small.txt");
    fs::write(&path, SMALL).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn safe_run_without_model_fails_with_one_line() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("e.csv");
    let o = safegrid(&["run", "--task", "1", "--algo", "q", "--strategy", "safe", "--out", out.to_str().unwrap()]);
    assert!(!o.status.success());
    let err = stderr(&o);
    assert_eq!(err.trim().lines().count(), 1, "{err}");
    assert!(err.contains("--model"), "{err}");
    assert!(!out.exists());
}

#[test]
fn bad_inputs_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.txt");
    fs::write(&cfg, "warp_speed = 9\n").unwrap();
    let o = safegrid(&["pipeline", "--config", cfg.to_str().unwrap(), "--out", dir.path().join("p").to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("warp_speed"));

    let o = safegrid(&["run", "--task", "0", "--algo", "q", "--strategy", "egreedy", "--out", "x.csv"]);
    assert!(!o.status.success());
    let o = safegrid(&["fit", "--data", "/nonexistent.csv", "--model", "svm", "--out", "m", "--report", "r"]);
    assert!(!o.status.success());
    assert!(stderr(&o).starts_with("error:"));
}

#[test]
fn stepwise_commands_chain() {
    let dir = tempfile::tempdir().unwrap();
    let d = |name: &str| dir.path().join(name).to_str().unwrap().to_owned();
    let cfg = small_config(dir.path());

    let o = safegrid(&["pretrain", "--config", &cfg, "--out", &d("pre")]);
    assert!(o.status.success(), "{}", stderr(&o));
    let dataset = fs::read_to_string(d("pre/dataset.csv")).unwrap();
    assert!(dataset.starts_with("h_n,h_e,h_s,h_w,obs_dir,distance,label\n"));

    for model in ["svm", "knn", "tree"] {
        let o = safegrid(&[
            "fit", "--data", &d("pre/dataset.csv"), "--model", model, "--out", &d(&format!("{model}.txt")),
            "--report", &d(&format!("{model}_report.csv")), "--config", &cfg,
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        let report = fs::read_to_string(d(&format!("{model}_report.csv"))).unwrap();
        assert!(report.starts_with("model,accuracy,precision,recall,f1,tp,fp,tn,fn\n"));
        assert!(report.lines().nth(1).unwrap().starts_with(model));
    }

    fs::create_dir(d("runs")).unwrap();
    for strategy in ["egreedy", "safe"] {
        let out = d(&format!("runs/episodes_q_task2_{strategy}.csv"));
        let o = safegrid(&[
            "run", "--task", "2", "--algo", "q", "--strategy", strategy, "--model", &d("svm.txt"), "--out", &out,
            "--config", &cfg,
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        assert_eq!(fs::read_to_string(&out).unwrap().lines().count(), 1 + 40 * 2);
    }
    let o = safegrid(&["report", "--in", &d("runs"), "--out", &d("out/summary.csv")]);
    assert!(o.status.success(), "{}", stderr(&o));
    let summary = fs::read_to_string(d("out/summary.csv")).unwrap();
    let lines: Vec<&str> = summary.lines().collect();
    assert_eq!(lines[0], "algorithm,task,strategy,avg_collision_rate,avg_success_rate,sum_of_reward");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("q,2,egreedy,"));
    assert!(Path::new(&d("out/curves_q_task2_safe.csv")).exists());
}

#[test]
fn pipeline_writes_twelve_rows_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let o = safegrid(&["pipeline", "--config", &cfg, "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
        assert!(String::from_utf8_lossy(&o.stdout).contains("12 summary rows"));
        let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
        assert_eq!(summary.lines().count(), 13);
        for line in summary.lines().skip(1) {
            let decimals: Vec<usize> = line.split(',').skip(3).map(|f| f.split('.').nth(1).unwrap().len()).collect();
            assert_eq!(decimals, [6, 6, 6], "{line}");
        }
        outputs.push(out);
    }
    for name in ["dataset.csv", "model.txt", "summary.csv", "episodes_sarsa_task3_safe.csv", "curves_q_task1_egreedy.csv"] {
        assert_eq!(fs::read(outputs[0].join(name)).unwrap(), fs::read(outputs[1].join(name)).unwrap(), "{name}");
    }
}

#[test]
fn oracle_check_reports_zero_violations() {
    let o = safegrid(&["oracle-check", "--size", "5", "--horizon", "2", "--episodes", "500"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).contains("violations=0"));
}
