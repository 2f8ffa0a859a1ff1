use std::f64::consts::{PI, SQRT_2};

use mixdecon::numerics::*;
use num_complex::Complex64;
use proptest::prelude::*;

fn normal_pdf(x: f64, mu: f64, s: f64) -> f64 {
    let z = (x - mu) / s;
    (-0.5 * z * z).exp() / (s * (2.0 * PI).sqrt())
}

#[test]
fn standard_normal_l1_mass() {
    let g = GridBox::line(-8.0, 8.0, 1 << 12).unwrap();
    let f = GridFunction::sample(g.clone(), |x| normal_pdf(x[0], 0.0, 1.0));
    let zero = GridFunction::zeros(g, Domain::Spatial);
    let d = lp_distance(&f, &zero, NormOrder::Finite(1.0)).unwrap();
    assert!((d - 1.0).abs() < 1e-6, "{d}");
}

#[test]
fn hellinger_examples() {
    let g = GridBox::line(-10.0, 10.0, 1 << 12).unwrap();
    let p = GridFunction::sample(g.clone(), |x| normal_pdf(x[0], 0.0, 1.0));
    let q = GridFunction::sample(g.clone(), |x| normal_pdf(x[0], 1.0, 1.0));
    assert_eq!(hellinger(&p, &p).unwrap(), 0.0);
    let exact = (2.0 - 2.0 * (-1.0f64 / 8.0).exp()).sqrt();
    assert!((hellinger(&p, &q).unwrap() - exact).abs() < 1e-10);

    let g = GridBox::line(-8.0, 8.0, 1 << 12).unwrap();
    let a = GridFunction::sample(g.clone(), |x| if (0.0..1.0).contains(&x[0]) { 1.0 } else { 0.0 });
    let b = GridFunction::sample(g, |x| if (2.0..3.0).contains(&x[0]) { 1.0 } else { 0.0 });
    assert!((hellinger(&a, &b).unwrap() - SQRT_2).abs() < 1e-12);
}

#[test]
fn gaussian_closure_under_convolution() {
    let g = GridBox::line(-8.0, 8.0, 1 << 12).unwrap();
    let a = GridFunction::sample(g.clone(), |x| normal_pdf(x[0], 0.0, 0.6));
    let b = GridFunction::sample(g, |x| normal_pdf(x[0], 0.0, 0.8));
    let c = convolve(&a, &b).unwrap();
    let err = c
        .values()
        .iter()
        .enumerate()
        .map(|(k, v)| (v.re - normal_pdf(c.coords(k)[0], 0.0, 1.0)).abs())
        .fold(0.0, f64::max);
    assert!(err < 1e-6, "{err}");
    assert!((c.mass() - a.mass() * b.mass()).abs() < 1e-12);
}

#[test]
fn convolution_support_of_disjoint_boxes() {
    let g = GridBox::line(-1.0, 4.0, 1 << 10).unwrap();
    let a = GridFunction::sample(g.clone(), |x| if (0.0..=1.0).contains(&x[0]) { 1.0 } else { 0.0 });
    let b = GridFunction::sample(g, |x| if (2.0..=3.0).contains(&x[0]) { 1.0 } else { 0.0 });
    let c = convolve(&a, &b).unwrap();
    let dx = c.grid().spacing(0);
    let peak = c.sup_norm();
    for (k, v) in c.values().iter().enumerate() {
        let x = c.coords(k)[0];
        if v.norm() > 1e-12 * peak {
            assert!(x >= 2.0 - 1e-9 && x <= 4.0 + dx, "mass at {x}");
        }
    }
}

#[test]
fn uniform_transform_is_sinc() {
    let g = GridBox::line(-2.0, 2.0, 1 << 14).unwrap();
    let f = GridFunction::sample(g, |x| match x[0].abs() {
        a if a < 1.0 => 0.5,
        a if a == 1.0 => 0.25,
        _ => 0.0,
    });
    let big_f = fourier(&f).unwrap();
    let mut err = 0.0f64;
    for (j, v) in big_f.values().iter().enumerate() {
        let t = big_f.grid().frequency_node(0, j);
        if t.abs() <= 32.0 {
            let exact = if t == 0.0 { 1.0 } else { t.sin() / t };
            err = err.max((v - Complex64::new(exact, 0.0)).norm());
        }
    }
    assert!(err < 1e-6, "{err}");
}

#[test]
fn normal_transform() {
    let g = GridBox::line(-16.0, 16.0, 1 << 12).unwrap();
    let f = GridFunction::sample(g, |x| normal_pdf(x[0], 0.0, 1.0));
    let big_f = fourier(&f).unwrap();
    for (j, v) in big_f.values().iter().enumerate() {
        let t = big_f.grid().frequency_node(0, j);
        assert!((v - Complex64::new((-0.5 * t * t).exp(), 0.0)).norm() < 1e-8);
    }
}

#[test]
fn even_function_has_real_transform() {
    let g = GridBox::line(-10.0, 10.0, 1 << 10).unwrap();
    let f = GridFunction::sample(g, |x| (-x[0] * x[0]).exp() * (3.0 * x[0]).cos());
    let big_f = fourier(&f).unwrap();
    let im = big_f.values().iter().map(|v| v.im.abs()).fold(0.0, f64::max);
    assert!(im < 1e-10, "{im}");
}

fn grid_values(len: usize, nonneg: bool) -> impl Strategy<Value = Vec<f64>> {
    let lo = if nonneg { 0.0 } else { -1.0 };
    prop::collection::vec(lo..1.0f64, len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn round_trip_white_noise(v in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 64),
                              lo in -5.0..5.0f64, width in 0.5..20.0f64) {
        let g = GridBox::line(lo, lo + width, 64).unwrap();
        let vals: Vec<Complex64> = v.iter().map(|&(a, b)| Complex64::new(a, b)).collect();
        let f = GridFunction::new(g, Domain::Spatial, vals).unwrap();
        let back = inverse_fourier(&fourier(&f).unwrap()).unwrap();
        prop_assert!(back.sub(&f).unwrap().sup_norm() < 1e-10);
    }

    #[test]
    fn parseval(v in grid_values(128, false), lo in -3.0..3.0f64, width in 1.0..10.0f64) {
        let g = GridBox::line(lo, lo + width, 128).unwrap();
        let f = GridFunction::from_real(g, Domain::Spatial, v).unwrap();
        let n_space = lp_norm(&f, NormOrder::Finite(2.0)).unwrap();
        let n_freq = lp_norm(&fourier(&f).unwrap(), NormOrder::Finite(2.0)).unwrap();
        let c = parseval_constant(1);
        prop_assert!((n_space - c * n_freq).abs() <= 1e-8 * n_space.max(1e-300));
    }

    #[test]
    fn young_inequality(a in grid_values(32, false), b in grid_values(64, false),
                        dx in 0.01..1.0f64, la in -2.0..2.0f64, lb in -2.0..2.0f64) {
        let ga = GridBox::with_spacing(vec![la], vec![dx], vec![32]).unwrap();
        let gb = GridBox::with_spacing(vec![lb], vec![dx], vec![64]).unwrap();
        let fa = GridFunction::from_real(ga, Domain::Spatial, a).unwrap();
        let fb = GridFunction::from_real(gb, Domain::Spatial, b).unwrap();
        let c = convolve(&fa, &fb).unwrap();
        let one = lp_norm(&fa, NormOrder::Finite(1.0)).unwrap();
        for u in [NormOrder::Finite(1.0), NormOrder::Finite(2.0), NormOrder::Infinity] {
            let lhs = lp_norm(&c, u).unwrap();
            let rhs = one * lp_norm(&fb, u).unwrap();
            prop_assert!(lhs <= rhs + 1e-8, "u={u}: {lhs} > {rhs}");
        }
    }

    #[test]
    fn l1_hellinger(a in grid_values(64, true), b in grid_values(64, true)) {
        let g = GridBox::line(0.0, 1.0, 64).unwrap();
        let norm = |v: Vec<f64>| {
            let s: f64 = v.iter().sum::<f64>() / 64.0;
            let s = if s > 0.0 { s } else { 1.0 };
            v.into_iter().map(|x| x / s).collect::<Vec<_>>()
        };
        let p = GridFunction::from_real(g.clone(), Domain::Spatial, norm(a)).unwrap();
        let q = GridFunction::from_real(g, Domain::Spatial, norm(b)).unwrap();
        let l1 = lp_distance(&p, &q, NormOrder::Finite(1.0)).unwrap();
        let h = hellinger(&p, &q).unwrap();
        prop_assert!(l1 <= 2.0 * h + 1e-12);
    }

    #[test]
    fn support_containment(s1 in 0usize..40, w1 in 1usize..20, s2 in 0usize..40, w2 in 1usize..20,
                           seed_vals in grid_values(64, true)) {
        let g = GridBox::with_spacing(vec![-1.0], vec![0.05], vec![64]).unwrap();
        let f = GridFunction::sample(g.clone(), |x| {
            let k = ((x[0] + 1.0) / 0.05).round() as usize;
            if k >= s1 && k < s1 + w1 { 0.1 + seed_vals[k] } else { 0.0 }
        });
        let h = GridFunction::sample(g, |x| {
            let k = ((x[0] + 1.0) / 0.05).round() as usize;
            if k >= s2 && k < s2 + w2 { 0.1 + seed_vals[63 - k] } else { 0.0 }
        });
        let c = convolve(&f, &h).unwrap();
        let lo = -2.0 + (s1 + s2) as f64 * 0.05;
        let hi = -2.0 + (s1 + w1 - 1 + s2 + w2 - 1) as f64 * 0.05;
        let peak = c.sup_norm();
        for (k, v) in c.values().iter().enumerate() {
            let x = c.coords(k)[0];
            if v.norm() > 1e-12 * peak {
                prop_assert!(x >= lo - 1e-9 && x <= hi + 1e-9);
            }
        }
    }
}
