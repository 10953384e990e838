//! Acceptance suite. Runs every criterion in sequence (so wall-clock budgets
//! are measured without competing tests), prints one PASS/FAIL line each, and
//! exits nonzero if any criterion fails other than those listed in
//! `KNOWN_UNATTAINABLE`.

use std::fs;
use std::process::Command;
use std::time::{Duration, Instant};

use dirichlet_mc::estimator::{check_against_reference, exit_fraction, step_counts};
use dirichlet_mc::oracle::fd::DEFAULT_FD_TOL;
use dirichlet_mc::oracle::{analytic_solution, fd_solve, regularity_report, verify_barrier, BarrierSpec, RegularityStatus};
use dirichlet_mc::{
    check_mean_value, check_r_independence, derive_stream, estimate_point, sample_unit_sphere, BoundaryFunction,
    CheckSettings, Domain, HarmonicPoly, Patch, Point, WalkParams,
};

/// Criteria that fail by construction; see the README section on the
/// punctured disk. They still run and print FAIL.
const KNOWN_UNATTAINABLE: &[u32] = &[9];

const SEED: u64 = 20_240_601;

type Criterion = (u32, &'static str, u64, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn p(c: &[f64]) -> Point {
    Point::new(c.to_vec()).unwrap()
}

fn catalog() -> Vec<Domain> {
    vec![
        Domain::ball(vec![0.0, 0.0], 1.0).unwrap(),
        Domain::ball(vec![0.1, -0.2, 0.3], 0.7).unwrap(),
        Domain::axis_box(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap(),
        Domain::axis_box(vec![0.0], vec![1.0]).unwrap(),
        Domain::polytope(vec![(vec![-1.0, 0.0], 0.0), (vec![0.0, -1.0], 0.0), (vec![1.0, 1.0], 1.0)]).unwrap(),
        Domain::annulus(vec![0.0, 0.0], 1.0, 2.0).unwrap(),
        Domain::punctured_ball(vec![0.0, 0.0], 1.0, vec![0.3, 0.0]).unwrap(),
    ]
}

fn unit_square() -> Domain {
    Domain::axis_box(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap()
}

fn quad() -> BoundaryFunction {
    BoundaryFunction::HarmonicPoly2D(HarmonicPoly::X2MinusY2)
}

fn c1_constant_exactness() -> Outcome {
    let c = 0.7;
    let f = BoundaryFunction::Constant(c);
    let mut worst = String::new();
    let mut pass = true;
    for dom in catalog() {
        let v = dom.reference_point();
        let e = estimate_point(&dom, &f, &v, &WalkParams::for_domain(&dom), 100, SEED).unwrap();
        if e.mean != c || e.stderr != 0.0 {
            pass = false;
            worst = format!("{}: mean {} stderr {}", dom.kind_name(), e.mean, e.stderr);
        }
    }
    Outcome {
        pass,
        detail: if pass { "mean == 0.7, stderr == 0 on 7 domains".into() } else { worst },
    }
}

fn c2_coordinate_martingale() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for d in [2, 3] {
        let dom = Domain::ball(vec![0.0; d], 1.0).unwrap();
        let mut v = vec![0.0; d];
        v[0] = 0.3;
        let params = WalkParams::new(0.5, 1e-4 * dom.diameter(), 100_000).unwrap();
        let e = estimate_point(&dom, &BoundaryFunction::Coordinate(0), &p(&v), &params, 100_000, SEED).unwrap();
        let gap = (e.mean - 0.3).abs();
        let thr = 3.0 * e.stderr + 0.005;
        pass &= gap <= thr;
        parts.push(format!("d={d}: |{:.5} - 0.3| = {gap:.2e} <= {thr:.2e}", e.mean));
    }
    Outcome {
        pass,
        detail: parts.join("; "),
    }
}

fn c3_probes() -> Vec<Point> {
    [[0.25, 0.25], [0.75, 0.25], [0.5, 0.5], [0.25, 0.75], [0.75, 0.75]]
        .iter()
        .map(|c| p(c))
        .collect()
}

fn c3_harmonic_polynomial() -> Outcome {
    let dom = unit_square();
    let f = quad();
    let settings = CheckSettings {
        params: WalkParams::for_domain(&dom),
        n: 100_000,
        seed: SEED,
        bias_allowance: 0.005,
    };
    let probes = c3_probes();
    let exact = check_against_reference(&dom, &f, &probes, "x^2-y^2", |x| Ok(analytic_solution(&dom, &f, x).unwrap()), 0.0, &settings)
        .unwrap();
    let grid = fd_solve(&dom, &f, 1.0 / 64.0, DEFAULT_FD_TOL).unwrap();
    let fd = check_against_reference(&dom, &f, &probes, "fd", |x| grid.interpolate(x), 5e-4, &settings).unwrap();
    Outcome {
        pass: exact.pass && fd.pass,
        detail: format!(
            "analytic worst {:.2e} <= {:.2e}; fd worst {:.2e} <= {:.2e}",
            exact.max_discrepancy, exact.threshold, fd.max_discrepancy, fd.threshold
        ),
    }
}

fn c4_r_independence() -> Outcome {
    let dom = unit_square();
    let f = quad();
    let settings = CheckSettings {
        params: WalkParams::for_domain(&dom),
        n: 100_000,
        seed: SEED,
        bias_allowance: 0.005,
    };
    let r = check_r_independence(&dom, &f, &c3_probes()[1], &[0.3, 0.5, 0.9], &settings).unwrap();
    let means: Vec<String> = r.values.iter().map(|v| format!("{} {:.5}", v.label, v.mean)).collect();
    Outcome {
        pass: r.pass,
        detail: format!(
            "{}; worst gap {:.2e} <= {:.2e}",
            means.join(", "),
            r.max_discrepancy,
            r.threshold
        ),
    }
}

fn c5_mean_value() -> Outcome {
    let dom = Domain::ball(vec![0.0, 0.0], 1.0).unwrap();
    let f = BoundaryFunction::FourierCircle {
        a: vec![0.0, 0.0, 1.0],
        b: vec![],
    };
    let settings = CheckSettings::new(&dom, &f, WalkParams::for_domain(&dom), 100_000, SEED);
    let r = check_mean_value(&dom, &f, &p(&[0.2, 0.1]), 0.3, 64, &settings).unwrap();
    Outcome {
        pass: r.pass,
        detail: format!(
            "center {:.5}, sphere average {:.5}; gap {:.2e} <= {:.2e}",
            r.values[0].mean, r.values[1].mean, r.max_discrepancy, r.threshold
        ),
    }
}

fn c6_boundary_convergence() -> Outcome {
    let mut total = 0;
    let mut parts = Vec::new();
    for dom in catalog() {
        let params = WalkParams::new(0.5, 1e-4 * dom.diameter(), 100_000).unwrap();
        let counts = step_counts(&dom, &dom.reference_point(), &params, 10_000, SEED).unwrap();
        let truncated = counts.iter().filter(|(_, t)| *t).count();
        let max = counts.iter().map(|(s, _)| *s).max().unwrap();
        total += truncated;
        parts.push(format!("{} d={} max {max}", dom.kind_name(), dom.dim()));
    }
    Outcome {
        pass: total == 0,
        detail: format!("{total} truncated of 70000 walks ({})", parts.join(", ")),
    }
}

fn c7_sphere_sampler() -> Outcome {
    const N: usize = 1_000_000;
    let mut pass = true;
    let mut parts = Vec::new();
    for d in [2, 3, 8] {
        let mut stream = derive_stream(SEED, d as u64);
        let mut sum = vec![0.0; d];
        let mut sq = vec![0.0; d];
        let mut worst_norm: f64 = 0.0;
        for _ in 0..N {
            let t = sample_unit_sphere(&mut stream, d).unwrap();
            worst_norm = worst_norm.max((t.norm() - 1.0).abs());
            for j in 0..d {
                sum[j] += t[j];
                sq[j] += t[j] * t[j];
            }
        }
        let n = N as f64;
        let mean_norm = sum.iter().map(|s| (s / n).powi(2)).sum::<f64>().sqrt();
        let cov_dev = (0..d)
            .map(|j| (sq[j] / n - (sum[j] / n).powi(2) - 1.0 / d as f64).abs())
            .fold(0.0, f64::max);
        let ok = worst_norm <= 1e-12 && mean_norm <= 5.0 / n.sqrt() && cov_dev <= 5.0 * (2.0 / n).sqrt();
        pass &= ok;
        parts.push(format!("d={d}: |norm-1| {worst_norm:.1e}, |mean| {mean_norm:.1e}, cov dev {cov_dev:.1e}"));
    }
    Outcome {
        pass,
        detail: format!("{} (limits 1e-12, 5.0e-3, 7.1e-3)", parts.join("; ")),
    }
}

fn c8_barriers() -> Outcome {
    let mut pass = true;
    let mut worst_zero: f64 = 0.0;
    let mut worst_resid: f64 = 0.0;
    let mut count = 0;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let t = 1.0 / 3f64.sqrt();
    let cases: Vec<(usize, Vec<Vec<f64>>)> = vec![
        (2, vec![vec![1.0, 0.0], vec![0.0, -1.0], vec![s, s], vec![2f64.cos(), 2f64.sin()]]),
        (3, vec![vec![1.0, 0.0, 0.0], vec![0.0, 0.0, -1.0], vec![t, t, t]]),
    ];
    for (d, points) in cases {
        let dom = Domain::ball(vec![0.0; d], 1.0).unwrap();
        for (i, v) in points.into_iter().enumerate() {
            let v = p(&v);
            let ball = dom.exterior_ball(&v).unwrap().expect("tangent exterior ball");
            let spec = BarrierSpec::from_exterior_ball(v, &ball).unwrap();
            let r = verify_barrier(&dom, &spec, 10_000, SEED + i as u64).unwrap();
            let ok = r.value_at_v.abs() <= 1e-12 && r.positive_ok && r.samples_checked >= 10_000 && r.mean_value_residual <= 1e-6;
            pass &= ok;
            worst_zero = worst_zero.max(r.value_at_v.abs());
            worst_resid = worst_resid.max(r.mean_value_residual);
            count += 1;
        }
    }
    Outcome {
        pass,
        detail: format!("{count} barriers; |q(v)| <= {worst_zero:.1e}, positive on 1e4 samples each, mean-value residual <= {worst_resid:.1e}"),
    }
}

fn c9_irregular_point() -> Outcome {
    let dom = Domain::punctured_ball(vec![0.0, 0.0], 1.0, vec![0.0, 0.0]).unwrap();
    let f = BoundaryFunction::PiecewiseLabel(vec![(Patch::Outer, 1.0), (Patch::Puncture, 0.0)]);
    let v = p(&[0.3, 0.0]);
    let params = WalkParams::for_domain(&dom);
    let e = estimate_point(&dom, &f, &v, &params, 100_000, SEED).unwrap();
    let frac = exit_fraction(&dom, &v, &params, 100_000, SEED, Patch::Puncture).unwrap();
    let report = regularity_report(&dom, &[p(&[0.0, 0.0]), p(&[1.0, 0.0]), p(&[0.0, -1.0])], SEED).unwrap();
    let diagnose_ok = report[0].status == RegularityStatus::Unknown
        && report[1..].iter().all(|r| r.status == RegularityStatus::RegularPoincare);
    let estimate_ok = (0.99..=1.0).contains(&e.mean);
    let frac_ok = frac <= 1e-3;
    // Stopping shell of radius eps about the puncture is hit with probability
    // ln(1/|v|) / ln(1/eps) since ln|x| is harmonic there.
    let predicted = (1.0 / 0.3f64).ln() / (1.0 / params.epsilon()).ln();
    Outcome {
        pass: estimate_ok && frac_ok && diagnose_ok,
        detail: format!(
            "estimate {:.4} in [0.99,1]: {estimate_ok}; puncture exits {frac:.4} <= 1e-3: {frac_ok} (shell-hitting prediction {predicted:.4}); puncture diagnosed unknown, circle regular: {diagnose_ok}",
            e.mean
        ),
    }
}

fn c10_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("disk.json");
    fs::write(
        &config,
        r#"{
  "domain": {"type": "ball", "center": [0, 0], "radius": 1},
  "boundary": {"type": "coordinate", "index": 0},
  "sampling": {"n_samples": 20000, "seed": 17},
  "points": [[0.1, 0.2], [-0.4, 0.3], [0.0, -0.7], [1.0, 0.0]]
}"#,
    )
    .unwrap();
    let mut outputs = Vec::new();
    for workers in [1, 4, 8] {
        let out = dir.path().join(format!("w{workers}.csv"));
        let status = Command::new(env!("CARGO_BIN_EXE_dirichlet-mc"))
            .arg("solve")
            .arg(&config)
            .arg("--workers")
            .arg(workers.to_string())
            .arg("--out")
            .arg(&out)
            .env_remove("DIRICHLET_MC_SEED")
            .status()
            .unwrap();
        assert!(status.success());
        let mut report = out.clone().into_os_string();
        report.push(".report.txt");
        outputs.push((fs::read(&out).unwrap(), fs::read(report).unwrap()));
    }
    let same = outputs.windows(2).all(|w| w[0] == w[1]);
    Outcome {
        pass: same,
        detail: format!("CSV of {} bytes and report identical for 1, 4, 8 workers: {same}", outputs[0].0.len()),
    }
}

fn c11_one_dimensional() -> Outcome {
    let dom = Domain::axis_box(vec![0.0], vec![1.0]).unwrap();
    let f = BoundaryFunction::PiecewiseLabel(vec![
        (Patch::Face { axis: 0, upper: false }, 0.0),
        (Patch::Face { axis: 0, upper: true }, 1.0),
    ]);
    let params = WalkParams::for_domain(&dom);
    let mut pass = true;
    let mut parts = Vec::new();
    for v in [0.1, 0.5, 0.9] {
        let e = estimate_point(&dom, &f, &p(&[v]), &params, 100_000, SEED).unwrap();
        let gap = (e.mean - v).abs();
        let thr = 3.0 * e.stderr + 0.005;
        pass &= gap <= thr;
        parts.push(format!("v={v}: {:.4} (gap {gap:.1e} <= {thr:.1e})", e.mean));
    }
    Outcome {
        pass,
        detail: parts.join("; "),
    }
}

fn main() {
    let criteria: [Criterion; 11] = [
        (1, "constant exactness", 1, c1_constant_exactness),
        (2, "coordinate martingale", 30, c2_coordinate_martingale),
        (3, "harmonic polynomial vs analytic and FD", 120, c3_harmonic_polynomial),
        (4, "r-independence", 120, c4_r_independence),
        (5, "mean-value property", 120, c5_mean_value),
        (6, "boundary convergence", 60, c6_boundary_convergence),
        (7, "sphere sampler statistics", 30, c7_sphere_sampler),
        (8, "barrier certificates", 10, c8_barriers),
        (9, "irregular point (punctured disk)", 60, c9_irregular_point),
        (10, "determinism across worker counts", 60, c10_determinism),
        (11, "1-D reduction", 30, c11_one_dimensional),
    ];
    let mut unexpected = Vec::new();
    for (id, name, budget, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let in_time = elapsed < Duration::from_secs(budget);
        let pass = outcome.pass && in_time;
        println!(
            "{} [{id:>2}] {name}: {} [{:.2} s, budget {budget} s]",
            if pass { "PASS" } else { "FAIL" },
            outcome.detail,
            elapsed.as_secs_f64()
        );
        if !pass && !KNOWN_UNATTAINABLE.contains(&id) {
            unexpected.push(id);
        }
    }
    if unexpected.is_empty() {
        println!("acceptance: no unexpected failures (known unattainable: {KNOWN_UNATTAINABLE:?})");
    } else {
        println!("acceptance: unexpected failures in criteria {unexpected:?}");
        std::process::exit(1);
    }
}
