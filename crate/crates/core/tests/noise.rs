use std::f64::consts::PI;

use mixdecon::noise::NoiseModel;
use mixdecon::numerics::fourier;
use mixdecon::rng::master_rng;

fn model(s: &str) -> NoiseModel {
    NoiseModel::parse(s, 1, "model").unwrap()
}

const BUILT_IN: [&str; 8] = [
    "gaussian",
    "gaussian(sigma=0.3)",
    "cauchy(gamma=2)",
    "exponential(theta=0.5)",
    "laplace",
    "uniform(m=1)",
    "uniform(m=2, lambda=0.5)",
    "uniform(m=3)",
];

#[test]
fn envelope_sandwich() {
    for s in BUILT_IN {
        let m = model(s);
        let env = m.envelope();
        let mut t = env.onset.max(1e-3);
        while t <= 100.0 {
            let v = m.abs_htilde_1d(t);
            let e = m.envelope_fn_1d(t);
            let slack = 1e-12 * e.max(1e-300);
            assert!(v >= env.c1 * e - slack, "{s} t={t}: {v} < {}", env.c1 * e);
            assert!(v <= env.c2 * e + slack, "{s} t={t}: {v} > {}", env.c2 * e);
            t += 0.0137;
        }
    }
}

#[test]
fn oscillatory_taylor_slope() {
    for (s, mu) in [("uniform(m=1)", 1.0), ("uniform(m=2)", 2.0), ("uniform(m=3, lambda=2)", 3.0)] {
        let m = model(s);
        let z = m.zeros_in_band(30.0).unwrap();
        for (_, r) in z.roots() {
            let (e1, e2) = (1e-4, 1e-3);
            for side in [-1.0, 1.0] {
                let a = m.abs_htilde_1d(r + side * e1).ln();
                let b = m.abs_htilde_1d(r + side * e2).ln();
                let slope = (b - a) / (e2.ln() - e1.ln());
                assert!((slope - mu).abs() < 0.05, "{s} root {r}: slope {slope}");
            }
        }
    }
}

#[test]
fn sampled_density_transform_matches_closed_form() {
    let cases = [
        ("gaussian", 0.02),
        ("gaussian(sigma=0.3)", 0.01),
        ("laplace", 1e-3),
        ("exponential", 1e-3),
        ("uniform(m=1)", 1e-3),
        ("uniform(m=2)", 1e-3),
        ("uniform(m=3, lambda=0.5)", 1e-3),
    ];
    for (s, dx) in cases {
        let m = model(s);
        let g = m.sample_on_grid(&[dx]).unwrap();
        let spec = fourier(&g).unwrap();
        let grid = spec.grid().clone();
        let mut worst: f64 = 0.0;
        for j in 0..grid.count(0) {
            let t = grid.frequency_node(0, j);
            if t.abs() > 10.0 {
                continue;
            }
            worst = worst.max((spec.values()[j] - m.htilde_1d(t)).norm());
        }
        assert!(worst < 1e-5, "{s}: {worst}");
    }
}

#[test]
fn uniform_sample_mean_in_clt_band() {
    let n = 100_000;
    let mut rng = master_rng(11);
    let x = model("uniform(m=1)").sample(n, &mut rng);
    let mean = x.iter().sum::<f64>() / n as f64;
    assert!(mean.abs() < 3.0 * (1.0 / 3f64.sqrt()) / (n as f64).sqrt(), "{mean}");
}

#[test]
fn uniform_sum_variance_in_clt_band() {
    let n = 100_000;
    for m in 1..=4u32 {
        let mut rng = master_rng(100 + m as u64);
        let x = model(&format!("uniform(m={m})")).sample(n, &mut rng);
        let var = x.iter().map(|v| v * v).sum::<f64>() / n as f64;
        let target = m as f64 / 3.0;
        // Var of X^2 for a sum of m uniforms: E X^4 - (m/3)^2.
        let ex4 = m as f64 / 5.0 + 3.0 * (m as f64) * (m as f64 - 1.0) / 9.0;
        let sd = ((ex4 - target * target) / n as f64).sqrt();
        assert!((var - target).abs() < 4.0 * sd, "m={m}: {var}");
    }
}

#[test]
fn empirical_characteristic_function() {
    let n = 50_000;
    for s in BUILT_IN {
        let m = model(s);
        let mut rng = master_rng(3);
        let x = m.sample(n, &mut rng);
        for t in [0.1, 0.5, 1.0] {
            let (c, si) = x.iter().fold((0.0, 0.0), |(c, s), &v| (c + (t * v).cos(), s - (t * v).sin()));
            let emp = num_complex::Complex64::new(c, si) / n as f64;
            assert!((emp - m.htilde_1d(t)).norm() < 5.0 / (n as f64).sqrt(), "{s} t={t}");
        }
    }
}

#[test]
fn fixed_seed_is_bit_identical() {
    for s in BUILT_IN {
        let m = model(s);
        let a = m.sample(1000, &mut master_rng(42));
        let b = m.sample(1000, &mut master_rng(42));
        assert_eq!(
            a.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            b.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        );
    }
}

#[test]
fn zero_counts_follow_period() {
    let m = model("uniform(m=1, lambda=0.5)");
    let z = m.zeros_in_band(20.0).unwrap();
    assert_eq!(z.count(), 2 * (20.0 / (0.5 * PI)).floor() as u64);
    for (_, r) in z.roots() {
        assert!(m.abs_htilde_1d(r) < 1e-14);
    }
}
