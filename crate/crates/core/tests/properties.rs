use dirichlet_mc::estimator::step_counts;
use dirichlet_mc::walk::{run_walk_traced, step_along};
use dirichlet_mc::{
    derive_stream, estimate_point, sample_unit_sphere, BoundaryFunction, Domain, HarmonicPoly, Patch, Point, WalkParams,
};
use proptest::prelude::*;

fn p(c: &[f64]) -> Point {
    Point::new(c.to_vec()).unwrap()
}

fn domains() -> Vec<Domain> {
    vec![
        Domain::ball(vec![0.0, 0.0], 1.0).unwrap(),
        Domain::ball(vec![0.1, -0.2, 0.3], 0.7).unwrap(),
        Domain::axis_box(vec![0.0, 0.0], vec![1.0, 2.0]).unwrap(),
        Domain::axis_box(vec![-1.0], vec![3.0]).unwrap(),
        Domain::polytope(vec![(vec![-1.0, 0.0], 0.0), (vec![0.0, -1.0], 0.0), (vec![1.0, 1.0], 1.0)]).unwrap(),
        Domain::annulus(vec![0.0, 0.0], 1.0, 2.0).unwrap(),
        Domain::annulus(vec![0.0, 0.0, 0.0], 0.3, 1.0).unwrap(),
        Domain::punctured_ball(vec![0.0, 0.0], 1.0, vec![0.3, 0.0]).unwrap(),
    ]
}

fn interior(dom: &Domain, seed: u64) -> Point {
    dom.sample_interior(&mut derive_stream(seed, u64::MAX))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn steps_stay_inside_and_obey_length_law(k in 0usize..8, seed in any::<u64>(), r in 0.01f64..0.99) {
        let dom = &domains()[k];
        let x = interior(dom, seed);
        let mut s = derive_stream(seed, 0);
        let theta = sample_unit_sphere(&mut s, dom.dim()).unwrap();
        let y = step_along(&x, dom, r, &theta).unwrap();
        prop_assert!(dom.contains(&y).unwrap());
        let d = dom.distance_to_boundary(&x).unwrap();
        prop_assert!((x.distance(&y) - r * d).abs() <= 1e-12);
    }

    #[test]
    fn walks_are_confined_and_exit_on_boundary(k in 0usize..8, seed in any::<u64>(), r in 0.1f64..0.9) {
        let dom = &domains()[k];
        let v = interior(dom, seed);
        let params = WalkParams::for_domain(dom).with_r(r).unwrap();
        let mut s = derive_stream(seed, 1);
        let mut inside = true;
        let res = run_walk_traced(&v, dom, &params, &mut s, |x, _| inside &= dom.contains(&Point::new(x.to_vec()).unwrap()).unwrap()).unwrap();
        prop_assert!(inside);
        prop_assert!(!res.truncated);
        prop_assert!(res.final_gap <= params.epsilon());
        prop_assert!(dom.boundary_gap(&res.exit_point).unwrap() <= 1e-9);
    }

    #[test]
    fn constant_data_is_exact(k in 0usize..8, seed in any::<u64>(), c in -1e6f64..1e6, n in 1u64..300, r in 0.05f64..0.95) {
        let dom = &domains()[k];
        let v = interior(dom, seed);
        let params = WalkParams::for_domain(dom).with_r(r).unwrap();
        let e = estimate_point(dom, &BoundaryFunction::Constant(c), &v, &params, n, seed).unwrap();
        prop_assert_eq!(e.mean, c);
        prop_assert_eq!(e.stderr, 0.0);
    }

    #[test]
    fn estimate_lies_within_sampled_range(k in 0usize..8, seed in any::<u64>(), n in 1u64..400) {
        let dom = &domains()[k];
        let v = interior(dom, seed);
        let e = estimate_point(dom, &BoundaryFunction::Coordinate(0), &v, &WalkParams::for_domain(dom), n, seed).unwrap();
        prop_assert!(e.sample_min <= e.mean && e.mean <= e.sample_max);
        prop_assert!(e.stderr >= 0.0);
    }
}

#[test]
fn estimates_are_bit_identical_across_worker_counts() {
    let dom = Domain::axis_box(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
    let f = BoundaryFunction::HarmonicPoly2D(HarmonicPoly::Xy);
    let v = p(&[0.3, 0.7]);
    let params = WalkParams::for_domain(&dom);
    let run = |w: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .unwrap()
            .install(|| estimate_point(&dom, &f, &v, &params, 5000, 99).unwrap())
    };
    let one = run(1);
    for w in [2, 4, 8] {
        let other = run(w);
        assert_eq!(one.mean.to_bits(), other.mean.to_bits());
        assert_eq!(one.stderr.to_bits(), other.stderr.to_bits());
        assert_eq!(one, other);
    }
}

#[test]
fn stderr_scales_as_inverse_root_n() {
    let dom = Domain::ball(vec![0.0, 0.0], 1.0).unwrap();
    let f = BoundaryFunction::Coordinate(0);
    let v = p(&[0.2, 0.1]);
    let params = WalkParams::for_domain(&dom);
    let small = estimate_point(&dom, &f, &v, &params, 1_000, 3).unwrap();
    let large = estimate_point(&dom, &f, &v, &params, 100_000, 3).unwrap();
    let ratio = small.stderr / large.stderr;
    assert!((10.0 / 1.5..=10.0 * 1.5).contains(&ratio), "ratio {ratio}");
}

#[test]
fn exit_points_average_to_start() {
    let dom = Domain::ball(vec![0.0, 0.0, 0.0], 1.0).unwrap();
    let v = p(&[0.3, -0.2, 0.1]);
    let params = WalkParams::for_domain(&dom);
    for j in 0..3 {
        let e = estimate_point(&dom, &BoundaryFunction::Coordinate(j), &v, &params, 100_000, 8).unwrap();
        assert!((e.mean - v[j]).abs() <= 3.0 * e.stderr + params.epsilon(), "axis {j}: {}", e.mean);
    }
}

#[test]
fn median_steps_grow_additively_per_decade() {
    let dom = Domain::ball(vec![0.0, 0.0], 1.0).unwrap();
    let v = Point::origin(2);
    let medians: Vec<f64> = [1e-3, 1e-4, 1e-5, 1e-6]
        .iter()
        .map(|&eps| {
            let params = WalkParams::new(0.5, eps, 100_000).unwrap();
            let mut steps: Vec<u64> = step_counts(&dom, &v, &params, 10_000, 4)
                .unwrap()
                .into_iter()
                .map(|(s, t)| {
                    assert!(!t);
                    s
                })
                .collect();
            steps.sort_unstable();
            steps[steps.len() / 2] as f64
        })
        .collect();
    let diffs: Vec<f64> = medians.windows(2).map(|w| w[1] - w[0]).collect();
    let mean = diffs.iter().sum::<f64>() / diffs.len() as f64;
    assert!(mean > 1.0, "medians {medians:?}");
    for d in &diffs {
        assert!((d - mean).abs() <= 0.25 * mean, "medians {medians:?}, increments {diffs:?}");
    }
}

#[test]
fn sphere_sampler_is_isotropic() {
    const N: usize = 1_000_000;
    let mut s = derive_stream(12, 0);
    // planar angle histogram, chi-square with 15 degrees of freedom
    let mut bins = [0u64; 16];
    for _ in 0..N {
        let t = sample_unit_sphere(&mut s, 2).unwrap();
        let a = t[1].atan2(t[0]) + std::f64::consts::PI;
        let b = ((a / std::f64::consts::TAU) * 16.0) as usize;
        bins[b.min(15)] += 1;
    }
    let expected = N as f64 / 16.0;
    let chi2: f64 = bins.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    // upper 1e-4 quantile of chi-square(15)
    assert!(chi2 < 44.26, "chi2 {chi2}");

    let d = 3;
    let mut s = derive_stream(13, 0);
    let mut cross = [0.0f64; 3];
    for _ in 0..N {
        let t = sample_unit_sphere(&mut s, d).unwrap();
        cross[0] += t[0] * t[1];
        cross[1] += t[0] * t[2];
        cross[2] += t[1] * t[2];
    }
    for c in cross {
        assert!((c / N as f64).abs() <= 5.0 / (N as f64).sqrt());
    }
}

#[test]
fn one_dimensional_walk_stops_at_endpoints() {
    let dom = Domain::axis_box(vec![0.0], vec![1.0]).unwrap();
    let f = BoundaryFunction::PiecewiseLabel(vec![
        (Patch::Face { axis: 0, upper: false }, 0.0),
        (Patch::Face { axis: 0, upper: true }, 1.0),
    ]);
    let e = estimate_point(&dom, &f, &p(&[0.5]), &WalkParams::for_domain(&dom), 2000, 1).unwrap();
    assert_eq!((e.sample_min, e.sample_max), (0.0, 1.0));
}
