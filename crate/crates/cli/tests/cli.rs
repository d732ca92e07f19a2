use std::path::Path;
use std::process::{Command, Output};

fn helios(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_helios"))
        .env_remove("HELIOS_PARAMS")
        .args(args)
        .output()
        .expect("spawn helios")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn help_lists_formats() {
    let o = helios(&["--help"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("File formats:"));
    for sub in ["sweep", "mpp", "train", "eval", "predict", "simulate", "compare", "reproduce"] {
        let o = helios(&[sub, "--help"]);
        assert!(o.status.success(), "{sub}");
        assert!(stdout(&o).contains("File formats:"), "{sub}");
    }
    assert!(helios(&["dataset", "gen", "--help"]).status.success());
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(helios(&[]).status.code(), Some(2));
    assert_eq!(helios(&["bogus"]).status.code(), Some(2));
    assert_eq!(helios(&["mpp", "--t", "abc", "--g", "1000"]).status.code(), Some(2));
    let o = helios(&["eval", "--model", "/nonexistent/model.json", "--data", "/nonexistent/d.csv"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage:"));
}

#[test]
fn dark_module_is_a_domain_error() {
    let o = helios(&["mpp", "--t", "25", "--g", "0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("degenerate"));
}

#[test]
fn bad_params_file_is_a_domain_error() {
    let dir = tempfile::tempdir().unwrap();
    let params = dir.path().join("params.json");
    std::fs::write(&params, "{\"ns\": 54}").unwrap();
    let o = helios(&["--params", p(&params), "mpp", "--t", "25", "--g", "1000"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn stc_mpp_row() {
    let o = helios(&["mpp", "--t", "25", "--g", "1000"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("t_C,g_Wm2,v_mp_V,i_mp_A,p_max_W"));
    let row: Vec<f64> = lines.next().unwrap().split(',').map(|f| f.parse().unwrap()).collect();
    assert!((row[4] - 200.0).abs() < 2.0);
}

#[test]
fn batch_mpp_and_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let cond = dir.path().join("cond.csv");
    std::fs::write(&cond, "t_C,g_Wm2\n25,1000\n40,600\n").unwrap();
    let out = dir.path().join("mpp.csv");
    assert!(helios(&["mpp", "--input", p(&cond), "--out", p(&out)]).status.success());
    assert_eq!(std::fs::read_to_string(&out).unwrap().lines().count(), 3);

    let o = helios(&["sweep", "--t", "25", "--g", "1000", "--points", "11"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().next(), Some("v_V,i_A,p_W"));
    assert_eq!(text.lines().count(), 12);
}

#[test]
fn predict_with_published_weights() {
    let o = helios(&["predict", "--paper-weights", "--t", "25", "--g", "1000"]);
    assert!(o.status.success());
    let v: f64 = stdout(&o).trim().parse().unwrap();
    assert!(v.is_finite());
}

#[test]
fn dataset_pipeline_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |sub: &str| {
        let d = dir.path().join(sub);
        std::fs::create_dir(&d).unwrap();
        let csv = d.join("data.csv");
        assert!(helios(&["dataset", "gen", "--out", p(&csv)]).status.success());
        assert!(helios(&["dataset", "split", "--input", p(&csv), "--seed", "7"]).status.success());
        let noisy = d.join("noisy.csv");
        let o = helios(&["dataset", "noise", "--input", p(&csv), "--out", p(&noisy), "--sigma-t", "0.5", "--sigma-g", "10"]);
        assert!(o.status.success());
        ["data.csv", "data.manifest.json", "data.train.csv", "data.val.csv", "data.test.csv", "noisy.csv"]
            .map(|f| std::fs::read(d.join(f)).unwrap())
    };
    let a = run("a");
    let b = run("b");
    assert_eq!(a, b);
    let text = String::from_utf8(a[0].clone()).unwrap();
    assert_eq!(text.lines().next(), Some("T_degC,G_Wm2,Imp_A"));
    assert_eq!(text.lines().count(), 1301);
    let sizes: Vec<usize> = a[2..5].iter().map(|f| f.iter().filter(|&&c| c == b'\n').count() - 1).collect();
    assert_eq!(sizes, [1105, 130, 65]);
}

#[test]
fn train_eval_simulate_compare() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("small.csv");
    let gen = [
        "dataset", "gen", "--out", p(&csv), "--t-count", "6", "--g-count", "20",
    ];
    assert!(helios(&gen).status.success());
    let out = dir.path().join("run");
    let o = helios(&["train", "--dataset", p(&csv), "--out-dir", p(&out), "--algorithm", "adam", "--epochs", "50"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["model.json", "train_report.json", "train_history.csv"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let model = out.join("model.json");
    let o = helios(&["eval", "--model", p(&model), "--data", p(&csv), "--out-dir", p(&out)]);
    assert!(o.status.success());
    for f in ["eval.json", "histogram.csv", "regression.csv"] {
        assert!(out.join(f).exists(), "{f}");
    }

    let trace = dir.path().join("trace.csv");
    let o = helios(&[
        "simulate", "--constant", "25,1000", "--duration", "5", "--controller", "po", "--trace", p(&trace),
    ]);
    assert!(o.status.success());
    assert_eq!(std::fs::read_to_string(&trace).unwrap().lines().count(), 51);

    // nn without a model is a domain error
    assert_eq!(helios(&["simulate", "--duration", "5", "--controller", "nn"]).status.code(), Some(1));

    let report = dir.path().join("cmp.json");
    let o = helios(&[
        "compare", "--step", "25,1000,600,2.5", "--duration", "5", "--controllers", "nn,po,ic,oracle",
        "--model", p(&model), "--out", p(&report),
    ]);
    assert!(o.status.success());
    let table = stdout(&o);
    assert!(table.contains("measured") && table.contains("paper-reported"));
    assert!(report.exists());
}
