use std::path::Path;
use std::process::{Command, Output};

fn ppdepth(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ppdepth"))
        .args(args)
        .current_dir(dir)
        .env_remove("PPDEPTH_SEED")
        .output()
        .expect("binary runs")
}

fn ok(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn simulate_fit_depth_rank_gof() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&ppdepth(&["simulate", "hpp", "--rate", "10", "--n", "40", "--seed", "5", "-o", "data.txt"], d));
    let data = std::fs::read_to_string(d.join("data.txt")).unwrap();
    assert!(data.starts_with("# domain: 0 1\n"));
    assert_eq!(data.lines().count(), 41);

    for kind in ["hpp", "sample-dirichlet", "ts-dirichlet", "mahalanobis"] {
        let model = format!("{kind}.json");
        ok(&ppdepth(
            &["fit", "--data", "data.txt", "--kind", kind, "--K", "30", "--seed", "1", "-o", &model],
            d,
        ));
        ok(&ppdepth(&["depth", "--model", &model, "--data", "data.txt", "-o", "depths.csv"], d));
        let rows = csv_rows(&std::fs::read_to_string(d.join("depths.csv")).unwrap());
        assert_eq!(rows[0], ["index", "cardinality", "weight", "conditional_depth", "depth"]);
        assert_eq!(rows.len(), 41);
        for r in &rows[1..] {
            let w: f64 = r[2].parse().unwrap();
            let c: f64 = r[3].parse().unwrap();
            let dep: f64 = r[4].parse().unwrap();
            assert!((0.0..=1.0).contains(&w) && (0.0..=1.0).contains(&c));
            assert!((dep - w * c).abs() < 1e-12, "{kind}: {r:?}");
        }

        let ranked =
            csv_rows(&ok(&ppdepth(&["rank", "--model", &model, "--data", "data.txt", "--top", "5"], d)));
        assert_eq!(ranked.len(), 6);
        let depths: Vec<f64> = ranked[1..].iter().map(|r| r[5].parse().unwrap()).collect();
        assert!(depths.windows(2).all(|w| w[0] >= w[1]));

        let gof = csv_rows(&ok(&ppdepth(&["gof", "--model", &model, "--data", "data.txt"], d)));
        assert_eq!(gof[0], ["index", "cardinality", "conditional_depth", "depth", "ks_statistic", "p_value"]);
        assert_eq!(gof.len(), 41);
    }
}

#[test]
fn simulation_is_seeded_and_env_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let a = ok(&ppdepth(&["simulate", "hpp", "--rate", "5", "--n", "3", "--seed", "9"], d));
    let b = ok(&ppdepth(&["simulate", "hpp", "--rate", "5", "--n", "3", "--seed", "9"], d));
    assert_eq!(a, b);
    let c = ok(&ppdepth(&["simulate", "hpp", "--rate", "5", "--n", "3", "--seed", "10"], d));
    assert_ne!(a, c);
    let env = Command::new(env!("CARGO_BIN_EXE_ppdepth"))
        .args(["simulate", "hpp", "--rate", "5", "--n", "3", "--seed", "10"])
        .env("PPDEPTH_SEED", "9")
        .output()
        .unwrap();
    assert_eq!(String::from_utf8(env.stdout).unwrap(), a);
}

#[test]
fn ipp_from_intensity_file() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("lam.txt"), "# t rate\n0 0\n1 40\n").unwrap();
    let out = ok(&ppdepth(&["simulate", "ipp", "--intensity", "lam.txt", "--n", "200", "--seed", "2"], d));
    let events: Vec<f64> = out
        .lines()
        .skip(1)
        .flat_map(|l| l.split_whitespace().map(|x| x.parse::<f64>().unwrap()).collect::<Vec<_>>())
        .collect();
    let mean = events.iter().sum::<f64>() / events.len() as f64;
    // Density proportional to t has mean 2/3.
    assert!((mean - 2.0 / 3.0).abs() < 0.02, "{mean}");
    assert!((events.len() as f64 / 200.0 - 20.0).abs() < 1.5);
}

#[test]
fn classify_reports_predictions_and_accuracy() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let mut train = String::from("# domain: 0 1\n");
    let mut test = train.clone();
    for (label, rate, seed) in [("slow", "6", "1"), ("fast", "25", "2")] {
        let sim = ok(&ppdepth(&["simulate", "hpp", "--rate", rate, "--n", "40", "--seed", seed], d));
        for (i, line) in sim.lines().skip(1).enumerate() {
            let target = if i % 2 == 0 { &mut train } else { &mut test };
            target.push_str(&format!("{label}: {line}\n"));
        }
    }
    std::fs::write(d.join("train.txt"), train).unwrap();
    std::fs::write(d.join("test.txt"), test).unwrap();
    let out = ok(&ppdepth(
        &[
            "classify",
            "--train",
            "train.txt",
            "--test",
            "test.txt",
            "--kind",
            "sample-dirichlet",
            "--baseline",
            "likelihood",
            "-o",
            "pred.csv",
        ],
        d,
    ));
    let table = csv_rows(&out);
    assert_eq!(table[0], ["method", "class", "n", "correct", "accuracy"]);
    let overall: Vec<&Vec<String>> = table.iter().filter(|r| r.len() == 5 && r[1] == "all").collect();
    assert_eq!(overall.len(), 2);
    for r in overall {
        assert_eq!(r[2], "40");
        assert!(r[4].parse::<f64>().unwrap() > 0.8, "{r:?}");
    }
    let pred = csv_rows(&std::fs::read_to_string(d.join("pred.csv")).unwrap());
    assert_eq!(pred[0], ["index", "label", "predicted", "tie", "forced", "depth_fast", "depth_slow"]);
    assert_eq!(pred.len(), 41);
}

#[test]
fn contour_grid_export() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = ok(&ppdepth(&["contour", "--kind", "dirichlet", "--resolution", "6"], d));
    let rows = csv_rows(&out);
    assert_eq!(rows[0], ["u1", "u2", "depth"]);
    assert_eq!(rows.len(), 1 + 7 * 8 / 2);
    let parsed: Vec<[f64; 3]> = rows[1..].iter().map(|r| [0, 1, 2].map(|i| r[i].parse().unwrap())).collect();
    let centre = parsed.iter().find(|p| (p[0] - 1.0 / 3.0).abs() < 1e-12 && (p[1] - 1.0 / 3.0).abs() < 1e-12);
    assert!((centre.unwrap()[2] - 1.0).abs() < 1e-12);
    ok(&ppdepth(
        &["contour", "--kind", "mahalanobis", "--resolution", "4", "--t1", "-1", "--t2", "1", "-o", "g.csv"],
        d,
    ));
    assert!(d.join("g.csv").exists());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(ppdepth(&["fit", "--data", "missing.txt", "-o", "m.json"], d).status.code(), Some(1));
    std::fs::write(d.join("bad.txt"), "# domain: 0 1\n0.5 0.2\n").unwrap();
    assert_eq!(ppdepth(&["fit", "--data", "bad.txt", "-o", "m.json"], d).status.code(), Some(2));
    std::fs::write(d.join("ok.txt"), "0.5\n0.2 0.7\n").unwrap();
    let no_domain = ppdepth(&["fit", "--data", "ok.txt", "-o", "m.json"], d);
    assert_eq!(no_domain.status.code(), Some(2));
    ok(&ppdepth(&["fit", "--data", "ok.txt", "--t1", "0", "--t2", "1", "-o", "m.json"], d));
    assert_eq!(
        ppdepth(&["fit", "--data", "ok.txt", "--t1", "0", "--t2", "1", "--r", "-1", "-o", "m.json"], d)
            .status
            .code(),
        Some(2)
    );
    assert_eq!(ppdepth(&["contour", "--resolution", "0"], d).status.code(), Some(2));
    assert_eq!(ppdepth(&["nonsense"], d).status.code(), Some(2));
}
