use chronolens::field::{
    apply_gdd, gaussian_pulse, make_time_grid, propagate_gdd, to_spectrum, to_time, ComplexEnvelope, TimeGrid,
};
use num_complex::Complex64;
use proptest::prelude::*;

fn grid() -> TimeGrid {
    make_time_grid(4096, 409.6e-12).unwrap()
}

/// Sum of a few detuned Gaussians well inside the window.
fn random_field(params: &[(f64, f64, f64, f64, f64)]) -> ComplexEnvelope {
    let g = grid();
    params.iter().fold(ComplexEnvelope::zeros(g), |acc, &(c, dur, shift, re, im)| {
        let p = gaussian_pulse(&g, c, dur, shift).unwrap().scale(Complex64::new(re, im));
        acc.add(&p).unwrap()
    })
}

fn pulse_params() -> impl Strategy<Value = Vec<(f64, f64, f64, f64, f64)>> {
    prop::collection::vec((-40e-12..40e-12, 1e-12..8e-12, -2e12..2e12, -1.0..1.0, -1.0..1.0), 1..4)
}

fn max_diff(a: &ComplexEnvelope, b: &ComplexEnvelope) -> f64 {
    a.samples().iter().zip(b.samples()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn peak(a: &ComplexEnvelope) -> f64 {
    a.peak_amplitude().max(f64::MIN_POSITIVE)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn parseval(params in pulse_params()) {
        let a = random_field(&params);
        let e_t = a.energy();
        let e_w = to_spectrum(&a).energy();
        prop_assert!((e_t - e_w).abs() <= 1e-12 * e_t);
    }

    #[test]
    fn fft_round_trip(params in pulse_params()) {
        let a = random_field(&params);
        let back = to_time(&to_spectrum(&a));
        prop_assert!(max_diff(&a, &back) <= 1e-12 * peak(&a));
    }

    #[test]
    fn gdd_conserves_energy(params in pulse_params(), d in -30e-24..30e-24f64) {
        let a = random_field(&params);
        let b = propagate_gdd(&a, d);
        prop_assert!((a.energy() - b.energy()).abs() <= 1e-12 * a.energy());
    }

    #[test]
    fn gdd_composition(params in pulse_params(), d1 in -20e-24..20e-24f64, d2 in -20e-24..20e-24f64) {
        let a = random_field(&params);
        let two = propagate_gdd(&propagate_gdd(&a, d1), d2);
        let one = propagate_gdd(&a, d1 + d2);
        prop_assert!(max_diff(&two, &one) <= 1e-12 * peak(&a));
    }

    #[test]
    fn gdd_is_linear(
        p1 in pulse_params(),
        p2 in pulse_params(),
        d in -20e-24..20e-24f64,
        a in -2.0..2.0f64,
        b in -2.0..2.0f64,
    ) {
        let (x, y) = (random_field(&p1), random_field(&p2));
        let (ca, cb) = (Complex64::new(a, 0.5 * b), Complex64::new(b, -a));
        let lhs = propagate_gdd(&x.scale(ca).add(&y.scale(cb)).unwrap(), d);
        let rhs = propagate_gdd(&x, d).scale(ca).add(&propagate_gdd(&y, d).scale(cb)).unwrap();
        let scale = peak(&x) * ca.norm() + peak(&y) * cb.norm();
        prop_assert!(max_diff(&lhs, &rhs) <= 1e-12 * scale);
    }

    #[test]
    fn chirped_gaussian_matches_closed_form(dur in 2e-12..6e-12f64, d in -10e-24..10e-24f64) {
        let g = grid();
        let a = gaussian_pulse(&g, 0.0, dur, 0.0).unwrap();
        let out = apply_gdd(&a, d).unwrap();
        // exp(-t²/2σ²) under e^{iDΩ²/2}: σ/√(σ² − iD)·exp(-t²/2(σ² − iD))
        let s2 = chronolens::field::gaussian_sigma(dur).powi(2);
        let q = Complex64::new(s2, -d);
        let pref = Complex64::new(s2.sqrt(), 0.0) / q.sqrt();
        for (k, t) in g.times().enumerate() {
            let expect = pref * (-(t * t) / (2.0 * q)).exp();
            prop_assert!((out.samples()[k] - expect).norm() < 1e-10);
        }
        // rms duration against √(σ² + D²/σ²)
        let e = out.energy();
        let var = g.times().zip(out.samples()).map(|(t, a)| t * t * a.norm_sqr()).sum::<f64>()
            * g.dt() / e;
        let expect_var = (s2 + d * d / s2) / 2.0;
        prop_assert!((var.sqrt() / expect_var.sqrt() - 1.0).abs() < 1e-6);
    }
}

#[test]
fn carrier_of_detuned_pulse_survives_dispersion() {
    let g = grid();
    let a = gaussian_pulse(&g, 0.0, 3e-12, 1.5e12).unwrap();
    let b = apply_gdd(&a, 8e-24).unwrap();
    assert!((a.carrier_frequency() - b.carrier_frequency()).abs() < 1e-6 * g.d_omega());
}
