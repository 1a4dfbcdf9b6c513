use std::path::Path;
use std::process::{Command, Output};

use rcn_core::optimize::KNEE_BRANCH_MAX_A;
use rcn_core::{knee_energy, BoundaryConfig, PhaseField, StripGrid};

fn rcn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rcn"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

/// Data rows of a CSV file as fields, after checking the header.
fn csv(path: &Path, header: &str) -> Vec<Vec<String>> {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(header), "{}", path.display());
    lines.map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

const SWEEP_HEADER: &str = "eps,a,delta,bending,strain,total,converged,iters";

fn minimize_energy(dir: &Path, m: usize) -> f64 {
    let out = dir.join(format!("m{m}"));
    let m = m.to_string();
    let r = rcn(&[
        "minimize",
        "--eps",
        "0.8",
        "--k",
        "0",
        "--m",
        &m,
        "--n",
        &m,
        "--L",
        "20",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&r), 0, "{}", String::from_utf8_lossy(&r.stderr));
    let rows = csv(&out.join("energy.csv"), "eps,a,delta,bending,strain,total");
    assert_eq!(rows.len(), 1);
    assert!(out.join("field.txt").exists());
    num(&rows[0][5])
}

#[test]
fn knee_minimum_extrapolates_to_closed_form() {
    // Full-weight boundary rows bias the discrete energy by O(ζ); the
    // two-grid extrapolation removes it.
    let dir = tempfile::tempdir().unwrap();
    let coarse = minimize_energy(dir.path(), 64);
    let fine = minimize_energy(dir.path(), 128);
    assert!(fine < coarse);
    let extrapolated = 2.0 * fine - coarse;
    let exact = knee_energy(0.8);
    assert!((extrapolated - exact).abs() < 0.05 * exact, "{extrapolated} vs {exact}");
    assert!((fine - exact) / exact < 0.10, "{fine}");
}

#[test]
fn invalid_input_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(code(&rcn(&["minimize", "--eps", "1.2", "--out", out])), 1);
    assert_eq!(code(&rcn(&["minimize", "--k", "0", "--out", out])), 1);
    assert_eq!(
        code(&rcn(&[
            "minimize", "--eps", "0.5", "--k", "3", "--a", "0.5", "--out", out
        ])),
        1
    );
    assert_eq!(
        code(&rcn(&[
            "minimize", "--eps", "0.5", "--m", "16", "--k", "17", "--out", out
        ])),
        1
    );
    assert_eq!(
        code(&rcn(&["sweep-a", "--eps", "0.5", "--k-list", "", "--out", out])),
        1
    );
    assert_eq!(
        code(&rcn(&["minimize", "--eps", "0.5", "--seed", "spiral", "--out", out])),
        1
    );
    assert_eq!(code(&rcn(&["frobnicate"])), 1);
    assert_eq!(code(&rcn(&["--help"])), 0);
}

#[test]
fn non_convergence_exits_with_two_and_still_writes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let r = rcn(&[
        "minimize",
        "--eps",
        "0.6",
        "--k",
        "4",
        "--m",
        "16",
        "--n",
        "16",
        "--max-iters",
        "2",
        "--out",
        out,
    ]);
    assert_eq!(code(&r), 2);
    assert!(dir.path().join("field.txt").exists());
    assert_eq!(
        csv(&dir.path().join("energy.csv"), "eps,a,delta,bending,strain,total").len(),
        1
    );
}

fn sweep(eps: &str, m: &str, dir: &Path, extra: &[&str]) -> Vec<Vec<String>> {
    let mut args = vec![
        "sweep-a",
        "--eps",
        eps,
        "--m",
        m,
        "--n",
        m,
        "--out",
        dir.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    let r = rcn(&args);
    assert_eq!(code(&r), 0, "{}", String::from_utf8_lossy(&r.stderr));
    let rows = csv(&dir.join("sweep_a.csv"), SWEEP_HEADER);
    assert!(rows.windows(2).all(|w| num(&w[0][1]) < num(&w[1][1])), "sorted by a");
    assert!(rows.iter().all(|r| r[6] == "true"));
    rows
}

fn argmin_a(rows: &[Vec<String>]) -> f64 {
    let best = rows.iter().min_by(|a, b| num(&a[5]).total_cmp(&num(&b[5]))).unwrap();
    num(&best[1])
}

#[test]
fn sweeps_pick_the_knee_at_large_eps_and_a_zipper_at_small_eps() {
    let dir = tempfile::tempdir().unwrap();
    let large = sweep("0.8", "32", &dir.path().join("large"), &[]);
    assert!(argmin_a(&large) <= KNEE_BRANCH_MAX_A);
    let small = sweep("0.25", "48", &dir.path().join("small"), &[]);
    assert!(argmin_a(&small) > 0.3);
}

#[test]
fn outputs_are_deterministic_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let ks = ["--k-list", "0,4,8,12", "--refine", "false"];
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    sweep("0.4", "16", &a, &[&ks[..], &["--jobs", "1"]].concat());
    sweep("0.4", "16", &b, &[&ks[..], &["--jobs", "3"]].concat());
    let read = |p: &Path| std::fs::read(p.join("sweep_a.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# small run\neps = 0.7\nm = 16\nn = 16\nk = 2\n").unwrap();
    let out = dir.path().join("out");
    let r = rcn(&[
        "minimize",
        "--config",
        cfg.to_str().unwrap(),
        "--k",
        "4",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&r), 0, "{}", String::from_utf8_lossy(&r.stderr));
    let row = &csv(&out.join("energy.csv"), "eps,a,delta,bending,strain,total")[0];
    assert_eq!(row[0], "0.7");
    assert_eq!(num(&row[1]), 0.25);
    std::fs::write(&cfg, "eps 0.7\n").unwrap();
    assert_eq!(code(&rcn(&["minimize", "--config", cfg.to_str().unwrap()])), 1);
}

#[test]
fn energy_curve_reports_the_bracket_or_its_absence() {
    let dir = tempfile::tempdir().unwrap();
    let base = ["--m", "24", "--n", "24", "--k-list", "0,1,12,16,18,20"];
    let two = dir.path().join("two");
    let r = rcn(&[
        &["energy-curve", "--eps-list", "0.25,0.7", "--out", two.to_str().unwrap()],
        &base[..],
    ]
    .concat());
    assert_eq!(code(&r), 0, "{}", String::from_utf8_lossy(&r.stderr));
    let curve = csv(
        &two.join("energy_curve.csv"),
        "eps,k_star,a_star,delta,bending,strain,total,knee_branch,zipper_branch,knee_closed_form",
    );
    assert_eq!(curve.len(), 2);
    assert_eq!(curve[0][0], "0.7", "descending eps");
    let t = csv(
        &two.join("transition.csv"),
        "eps_hi,eps_lo,monotone_ordering,slope_jump,kink",
    );
    assert_eq!(t[0][..2], ["0.7", "0.25"]);
    assert!(!csv(&two.join("sweeps.csv"), SWEEP_HEADER).is_empty());

    let one = dir.path().join("one");
    let r = rcn(&[
        &["energy-curve", "--eps-list", "0.5", "--out", one.to_str().unwrap()],
        &base[..],
    ]
    .concat());
    assert_eq!(code(&r), 0);
    assert!(String::from_utf8_lossy(&r.stderr).contains("no transition bracket"));
    let t = csv(
        &one.join("transition.csv"),
        "eps_hi,eps_lo,monotone_ordering,slope_jump,kink",
    );
    assert_eq!(t[0][..2], ["", ""]);
}

const BOUNDS_HEADER: &str = "variant,eps,a,energy,rhs,c_sub,area,boundary,consistency,lemma_bound,pass";

#[test]
fn bounds_check_passes_converged_and_roll_fields() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");
    let r = rcn(&[
        "minimize",
        "--eps",
        "0.5",
        "--k",
        "10",
        "--m",
        "16",
        "--n",
        "16",
        "--seed",
        "zipper",
        "--out",
        run.to_str().unwrap(),
    ]);
    assert_eq!(code(&r), 0, "{}", String::from_utf8_lossy(&r.stderr));
    let field = run.join("field.txt");
    let r = rcn(&[
        "bounds-check",
        field.to_str().unwrap(),
        "--per-axis",
        "101",
        "--out",
        run.to_str().unwrap(),
    ]);
    assert_eq!(code(&r), 0);
    let rows = csv(&run.join("bounds.csv"), BOUNDS_HEADER);
    assert_eq!(
        rows.iter().map(|r| r[0].as_str()).collect::<Vec<_>>(),
        ["squeeze", "extend"]
    );
    assert!(rows.iter().all(|r| r[10] == "true" && num(&r[4]) <= num(&r[3]) * 1.01));

    // A pure roll: the boundary terms cancel, so the certified side is zero
    // up to the quadrature of the area term.
    let g = StripGrid::new(0.6, 10.0, 16, 16).unwrap();
    let roll = PhaseField::from_fn(g, BoundaryConfig::new(0, 0.1), |x, y| 0.6 * x + 0.8 * y + 0.1).unwrap();
    let path = dir.path().join("roll.txt");
    rcn_core::io::save_field(&roll, &path).unwrap();
    let out = dir.path().join("roll");
    let r = rcn(&[
        "bounds-check",
        path.to_str().unwrap(),
        "--per-axis",
        "101",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&r), 0);
    for row in csv(&out.join("bounds.csv"), BOUNDS_HEADER) {
        assert!(num(&row[4]) <= num(&row[3]));
    }
}

#[test]
fn bounds_check_rejects_corrupted_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.txt");
    std::fs::write(&path, "rcn-field 8 8 0.5 10 0 0\n1 2 3\n").unwrap();
    let r = rcn(&[
        "bounds-check",
        path.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&r), 1);
    assert!(String::from_utf8_lossy(&r.stderr).contains("parse error"));
    let missing = dir.path().join("missing.txt");
    assert_eq!(code(&rcn(&["bounds-check", missing.to_str().unwrap()])), 1);
}

#[test]
fn probe_and_knee_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let r = rcn(&[
        "selfdual-probe",
        "--eps-list",
        "0.5,0.4",
        "--spacing",
        "0.25",
        "--out",
        out,
    ]);
    assert_eq!(code(&r), 0, "{}", String::from_utf8_lossy(&r.stderr));
    let rows = csv(
        &dir.path().join("probe.csv"),
        "eps,energy_bending,energy_strain,energy_total",
    );
    assert_eq!(rows.len(), 2);
    for r in &rows {
        assert!((num(&r[1]) + num(&r[2]) - num(&r[3])).abs() < 1e-9 * num(&r[3]));
    }
    assert_eq!(
        code(&rcn(&["selfdual-probe", "--eps-list", "0.5", "--c", "3", "--out", out])),
        1
    );

    let r = rcn(&["knee", "--eps-list", "0.8,0.5", "--m", "32", "--n", "32", "--out", out]);
    assert_eq!(code(&r), 0);
    let rows = csv(
        &dir.path().join("knee.csv"),
        "eps,closed_form,sampled_energy,relative_error",
    );
    assert!((num(&rows[0][1]) - knee_energy(0.8)).abs() < 1e-11);
    assert_eq!(code(&rcn(&["knee", "--eps-list", "0", "--out", out])), 1);
}
