use dlo::harness::{read_best_so_far, run_experiment, ExperimentConfig, SUMMARY_HEADER, TRACE_FIXED_COLUMNS};
use dlo::stats::quantile;

fn small(out: &std::path::Path) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new("ackley-d", Some(2)).unwrap();
    cfg.seeds = vec![1, 2, 3];
    cfg.optimizer.budget = 16;
    cfg.out = out.to_path_buf();
    cfg
}

#[test]
fn files_and_schema() {
    let dir = tempfile::tempdir().unwrap();
    let report = run_experiment(&small(dir.path())).unwrap();
    assert!(report.all_complete());
    for seed in [1, 2, 3] {
        let path = dir.path().join(format!("trace_{seed}.csv"));
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        let header = lines.next().unwrap();
        let expect = [TRACE_FIXED_COLUMNS.join(","), "theta_0,theta_1".into()].join(",");
        assert_eq!(header, expect);
        assert_eq!(header, "seed,algo,objective,dim,call_index,f_value,best_so_far,beta,R,mode,wall_ms,theta_0,theta_1");
        assert_eq!(lines.count(), 16);
    }
    let summary = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    let mut lines = summary.lines();
    assert_eq!(lines.next().unwrap(), SUMMARY_HEADER.join(","));
    assert_eq!(lines.count(), 16);
    // nothing but the four CSVs (temporary files were renamed away)
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 4);
}

#[test]
fn reruns_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run_experiment(&small(a.path())).unwrap();
    let mut cfg = small(b.path());
    cfg.jobs = 2;
    run_experiment(&cfg).unwrap();
    for name in ["trace_1.csv", "trace_2.csv", "trace_3.csv", "summary.csv"] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert_eq!(x, y, "{name} differs");
    }
}

#[test]
fn summary_is_recomputable_from_traces() {
    let dir = tempfile::tempdir().unwrap();
    let report = run_experiment(&small(dir.path())).unwrap();
    let curves: Vec<Vec<f64>> = report.trace_paths.iter().map(|p| read_best_so_far(p).unwrap()).collect();
    let mut reader = csv::Reader::from_path(&report.summary_path).unwrap();
    for (k, row) in reader.records().enumerate() {
        let row = row.unwrap();
        let at_k: Vec<f64> = curves.iter().map(|c| c[k]).collect();
        assert_eq!(row[0].parse::<usize>().unwrap(), k);
        assert_eq!(row[1].parse::<usize>().unwrap(), 3);
        assert_eq!(row[2].parse::<f64>().unwrap(), quantile(&at_k, 0.5).unwrap());
        assert_eq!(row[3].parse::<f64>().unwrap(), quantile(&at_k, 0.25).unwrap());
        assert_eq!(row[4].parse::<f64>().unwrap(), quantile(&at_k, 0.75).unwrap());
        assert_eq!(&row[5], "complete");
    }
}

#[test]
fn random_algo_and_wall_clock_column() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small(dir.path());
    cfg.algo = dlo::harness::Algo::Random;
    cfg.wall_clock = true;
    run_experiment(&cfg).unwrap();
    let mut reader = csv::Reader::from_path(dir.path().join("trace_1.csv")).unwrap();
    for row in reader.records() {
        let row = row.unwrap();
        assert_eq!(&row[1], "random");
        assert!(row[10].parse::<f64>().unwrap() >= 0.0);
        assert_eq!(&row[7], "");
    }
}

#[test]
fn unwritable_output_fails_before_running() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("occupied");
    std::fs::write(&file, b"x").unwrap();
    let cfg = small(&file.join("sub"));
    let err = run_experiment(&cfg).err().expect("must fail");
    assert!(err.to_string().contains("not writable"), "{err}");
}
