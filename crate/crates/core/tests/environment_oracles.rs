use mini_gp::{CandidateGrid, Environment, Matrix, Objective, ObjectiveFamily};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn paper_grid() -> CandidateGrid<f64> {
    CandidateGrid::build(3, 22, -5.0, 5.0).unwrap()
}

#[test]
fn paper_grid_shape_and_bijection() {
    let g = paper_grid();
    assert_eq!(g.len(), 10_648);
    assert_eq!(g.point(0), &[-5.0, -5.0, -5.0]);
    assert_eq!(g.point(10_647), &[5.0, 5.0, 5.0]);
    for i in [0, 1, 21, 22, 483, 484, 5000, 10_647] {
        let m = g.lattice().unwrap().multi_index(i);
        assert_eq!(g.lattice().unwrap().flat_index(&m), i);
        for (k, &mk) in m.iter().enumerate() {
            let want = -5.0 + 10.0 * mk as f64 / 21.0;
            assert!((g.point(i)[k] - want).abs() < 1e-12);
        }
    }
    // last coordinate varies fastest
    assert_eq!(g.lattice().unwrap().multi_index(1), vec![0, 0, 1]);
}

#[test]
fn optimum_matches_exhaustive_scan() {
    let g = paper_grid();
    let half = 5.0 / 21.0;
    for fam in [ObjectiveFamily::Rastrigin, ObjectiveFamily::Ellipsoid] {
        let env = Environment::new(g.clone(), Objective::new(fam, 0.0).unwrap()).unwrap();
        let mut best = (0, f64::NEG_INFINITY);
        for i in 0..g.len() {
            let v = -fam.raw_value(g.point(i));
            if v > best.1 {
                best = (i, v);
            }
        }
        assert_eq!(env.true_optimum(), best);
        if fam == ObjectiveFamily::Ellipsoid {
            // p = 22 is even: the optimum sits at the ±5/21 cell nearest the origin
            assert!(g.point(best.0).iter().all(|x| (x.abs() - half).abs() < 1e-12));
        } else {
            // the cosine term pulls the grid optimum out to ±25/21
            assert!(g.point(best.0).iter().all(|x| (x + 25.0 / 21.0).abs() < 1e-12));
        }
        assert!(env.values().iter().all(|&v| v <= best.1));
    }
}

#[test]
fn separable_families_sum_over_coordinates() {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for _ in 0..100 {
        let x: Vec<f64> = (0..3).map(|_| rng.random_range(-5.0..5.0)).collect();
        let ras: f64 = x.iter().map(|&v| ObjectiveFamily::Rastrigin.raw_value(&[v])).sum();
        assert!((ObjectiveFamily::Rastrigin.raw_value(&x) - ras).abs() < 1e-9);
        let ell: f64 = x
            .iter()
            .enumerate()
            .map(|(k, &v)| 1e3f64.powi(k as i32) * v * v)
            .sum();
        assert!((ObjectiveFamily::Ellipsoid.raw_value(&x) - ell).abs() <= 1e-9 * ell.max(1.0));
    }
}

#[test]
fn noise_sample_mean_within_clt_bound() {
    let g = paper_grid();
    let xi = 0.7;
    let env = Environment::new(g, Objective::new(ObjectiveFamily::Rosenbrock, xi).unwrap()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let n = 100_000;
    let draws: Vec<f64> = (0..n).map(|_| env.evaluate(123, &mut rng)).collect();
    let mean = draws.iter().sum::<f64>() / n as f64;
    assert!((mean - env.value(123)).abs() <= 4.0 * xi / (n as f64).sqrt());
    // consecutive draws are uncorrelated
    let c: Vec<f64> = draws.iter().map(|d| d - mean).collect();
    let lag: f64 = c.windows(2).map(|w| w[0] * w[1]).sum();
    let var: f64 = c.iter().map(|v| v * v).sum();
    assert!((lag / var).abs() < 0.02);
}

#[test]
fn fresh_streams_repeat_exactly() {
    let env = Environment::new(paper_grid(), Objective::new(ObjectiveFamily::Schaffer, 0.3).unwrap()).unwrap();
    let a = env.evaluate(77, &mut ChaCha8Rng::seed_from_u64(9));
    let b = env.evaluate(77, &mut ChaCha8Rng::seed_from_u64(9));
    assert_eq!(a, b);
    let quiet = Environment::new(paper_grid(), Objective::new(ObjectiveFamily::Schaffer, 0.0).unwrap()).unwrap();
    assert_eq!(quiet.evaluate(77, &mut ChaCha8Rng::seed_from_u64(1)), quiet.value(77));
}

#[test]
fn relative_noise_normalization() {
    for fam in ObjectiveFamily::ALL {
        let env = Environment::with_relative_noise(paper_grid(), fam, 0.01, true).unwrap();
        let max = env.values().iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = env.values().iter().copied().fold(f64::INFINITY, f64::min);
        assert!((max - min - 1.0).abs() < 1e-12, "{fam}");
        assert!((env.objective().noise_std - 0.01).abs() < 1e-15);
        let raw = Environment::with_relative_noise(paper_grid(), fam, 0.01, false).unwrap();
        let range = env.objective().output_scale;
        assert!((raw.objective().noise_std - 0.01 * range).abs() <= 1e-12 * range);
    }
}

#[test]
fn single_point_grid() {
    let g = CandidateGrid::from_points(Matrix::from_rows(&[vec![0.3, -0.2, 1.0]]).unwrap()).unwrap();
    let env = Environment::new(g, Objective::new(ObjectiveFamily::Ellipsoid, 0.1).unwrap()).unwrap();
    assert_eq!(env.true_optimum().0, 0);
    assert_eq!(env.uniform_average_regret(), 0.0);
}
