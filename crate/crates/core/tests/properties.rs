use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;

use femtohom::autocorr::{effective_sigma, gamma_gaussian_at};
use femtohom::interference::{bar_beta_c_gamma, dip_at_lengths};
use femtohom::quadrature::{integrate_1d, integrate_2d};
use femtohom::{
    beta_c_gamma, rho_analytic, rho_numeric, DelayLine, FilterPair, Method, PumpPulse, QuadratureConfig,
    SetupConfig,
};

fn setup(tau: f64, chirp: f64, filter_nm: f64, crystal: (f64, f64, f64), delay: (f64, f64)) -> SetupConfig {
    let s = SetupConfig::reference(3.0, tau, chirp, FilterPair::equal_nm(filter_nm).unwrap()).unwrap();
    let q = DelayLine::quartz(0.0).unwrap();
    s.with_crystal(s.crystal.with_second_order(crystal.0, crystal.1, crystal.2).unwrap())
        .with_delay(DelayLine::new(q.inv_g1, q.inv_g2, delay.0, delay.1, 0.0).unwrap())
}

fn gaussian_identity_error(al1: Complex64, al2: Complex64, al12: Complex64, a1: f64, a2: f64) -> f64 {
    let det = al1 * al2 - al12 * al12;
    let closed =
        PI / det.sqrt() * (-(al2 * (a1 * a1) + al1 * (a2 * a2) + al12 * (2.0 * a1 * a2)) / (4.0 * det)).exp();
    let (p, q, r) = (al1.re, al2.re, al12.re);
    let lmin = 0.5 * (p + q) - (0.25 * (p - q) * (p - q) + r * r).sqrt();
    let reach = (36.0 / lmin).sqrt();
    let cfg = QuadratureConfig::new(64, 4, 1e-10).unwrap();
    let numeric = integrate_2d(
        |x, y| {
            Ok((-(al1 * (x * x)) - al2 * (y * y) - al12 * (2.0 * x * y) + Complex64::new(0.0, a1 * x - a2 * y))
                .exp())
        },
        (-reach, reach),
        (-reach, reach),
        &cfg,
    )
    .unwrap()
    .value;
    (numeric - closed).norm() / closed.norm()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn gaussian_integral_identity(
        p in 0.5f64..2.0,
        q in 0.5f64..2.0,
        r in -0.7f64..0.7,
        ip in -0.5f64..0.5,
        iq in -0.5f64..0.5,
        ir in -0.5f64..0.5,
        a1 in -2.0f64..2.0,
        a2 in -2.0f64..2.0,
    ) {
        let al1 = Complex64::new(p, ip);
        let al2 = Complex64::new(q, iq);
        let al12 = Complex64::new(r * (p * q).sqrt(), ir);
        prop_assume!((al1 * al2 - al12 * al12).re > 0.0);
        prop_assert!(gaussian_identity_error(al1, al2, al12, a1, a2) <= 1e-6);
    }

    #[test]
    fn doubling_the_order_keeps_converged_results(k in 0.2f64..3.0, w in 0.5f64..4.0) {
        let f = |z: f64| Ok(Complex64::new(-k * z * z, w * z).exp());
        let base = QuadratureConfig::default();
        let doubled = QuadratureConfig::new(2 * base.base_order, base.max_refinements, base.rel_tol).unwrap();
        let a = integrate_1d(f, -3.0, 0.0, &base).unwrap();
        let b = integrate_1d(f, -3.0, 0.0, &doubled).unwrap();
        prop_assume!(a.converged && b.converged);
        prop_assert!((a.value - b.value).norm() <= base.rel_tol * a.value.norm());
    }

    #[test]
    fn propagation_keeps_b(tau in 5e-14f64..1e-12, chirp in -5.0f64..5.0, dp_l in -1e-24f64..1e-24) {
        let p = PumpPulse::new(tau, chirp).unwrap();
        let q = p.propagate(dp_l);
        prop_assert!((q.b() - p.b()).abs() <= 1e-12 * p.b());
        let back = q.propagate(-dp_l);
        prop_assert!((back.chirp - p.chirp).abs() <= 1e-9 * (1.0 + p.chirp.abs()));
    }

    #[test]
    fn amplitude_kernel_has_positive_definite_real_part(
        dp in 0.0f64..3e-25,
        d1 in 0.0f64..1e-25,
        dd in 0.0f64..1e-25,
        z in -3.0f64..0.0,
        filter in 20.0f64..1000.0,
    ) {
        let s = setup(1.55e-13, 0.0, filter, (dp, d1, 0.0), (dd, dd)).with_delay_length(25.0).unwrap();
        let k = beta_c_gamma(&s, z, 1e-13, -2e-13);
        prop_assert!(k.beta1().re > 0.0 && k.real_part_determinant() > 0.0);
        prop_assert!(k.value((z, z)).is_ok());
    }

    #[test]
    fn rho_kernel_keeps_a_positive_real_determinant(
        dp in 0.0f64..3e-25,
        z1 in -3.0f64..0.0,
        z2 in -3.0f64..0.0,
        filter in 20.0f64..1000.0,
    ) {
        let s = setup(1.55e-13, 0.0, filter, (dp, 0.0, 0.0), (0.0, 0.0));
        prop_assert!(bar_beta_c_gamma(&s, z1, z2).determinant().re > 0.0);
    }

    #[test]
    fn correlation_is_hermitian(
        z1 in -1.5f64..1.5,
        z2 in -1.5f64..1.5,
        x in -5e-13f64..5e-13,
        dp in 0.0f64..3e-25,
    ) {
        let s = setup(1.55e-13, 0.5, 50.0, (dp, 0.0, 0.0), (0.0, 0.0));
        let sigma = effective_sigma(&s);
        let g = gamma_gaussian_at(&s.pump_input, &s.crystal, sigma, z1, z2, x);
        let h = gamma_gaussian_at(&s.pump_input, &s.crystal, sigma, z2, z1, -x);
        prop_assert!((g - h.conj()).norm() <= 1e-12 * g.norm());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn common_delay_line_dispersion_cancels(
        d1 in 0.0f64..1e-25,
        d2 in 0.0f64..1e-25,
        shift in 0.0f64..5e-26,
        l in 0.0f64..25.0,
    ) {
        let cfg = QuadratureConfig::default();
        let a = setup(1.55e-13, 0.0, 50.0, (1e-25, 0.0, 0.0), (d1 + shift, d2 + shift));
        let b = setup(1.55e-13, 0.0, 50.0, (1e-25, 0.0, 0.0), (d1, d2));
        let ra = rho_numeric(&a.with_delay_length(l).unwrap(), &cfg).unwrap().rho;
        let rb = rho_numeric(&b.with_delay_length(l).unwrap(), &cfg).unwrap().rho;
        prop_assert!((ra - rb).abs() <= 1e-10, "{} vs {}", ra, rb);
    }

    #[test]
    fn equal_bandwidth_pumps_give_equal_curves(
        chirp in -3.0f64..3.0,
        other in -3.0f64..3.0,
        dp in 0.0f64..2e-25,
        d1 in 0.0f64..1e-25,
        dd in 0.0f64..1e-25,
    ) {
        let cfg = QuadratureConfig::default();
        let tau = 1.55e-13;
        let a = setup(tau, chirp, 50.0, (dp, d1, 0.0), (dd, 0.0));
        let tau_b = tau * ((1.0 + other * other) / (1.0 + chirp * chirp)).sqrt();
        let b = a.with_pump_input(PumpPulse::new(tau_b, other).unwrap());
        let lengths = [2.0, 8.0, 10.8, 14.0];
        let ca = dip_at_lengths(&a, &lengths, Method::Numeric, &cfg).unwrap();
        let cb = dip_at_lengths(&b, &lengths, Method::Numeric, &cfg).unwrap();
        for (x, y) in ca.samples.iter().zip(&cb.samples) {
            prop_assert!((x.rho - y.rho).abs() <= 1e-7);
            prop_assert!((x.rn - (1.0 - x.rho)).abs() == 0.0);
            prop_assert!(x.rho <= 1.0 + 1e-6);
        }
    }

    #[test]
    fn closed_form_dip_is_even(frac in 0.0f64..1.2, tau in 5e-14f64..1e-11, chirp in -3.0f64..3.0) {
        let s = SetupConfig::reference(3.0, tau, chirp, FilterPair::none()).unwrap();
        let x = frac * 0.5 * s.crystal.dip_width();
        let (p, m) = (rho_analytic(&s, x).unwrap(), rho_analytic(&s, -x).unwrap());
        prop_assert!((p - m).abs() <= 1e-14);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&p));
    }

    #[test]
    fn pump_only_dispersion_dip_is_even(frac in 0.05f64..0.95, dp in 0.0f64..3e-25) {
        let cfg = QuadratureConfig::default();
        let s = setup(1.55e-13, 0.0, 50.0, (dp, 0.0, 0.0), (0.0, 0.0));
        let x = frac * 0.5 * s.crystal.dip_width();
        let p = rho_numeric(&s.with_dtau(x).unwrap(), &cfg).unwrap().rho;
        let m = rho_numeric(&s.with_dtau(-x).unwrap(), &cfg).unwrap().rho;
        prop_assert!((p - m).abs() <= 1e-6, "{} vs {}", p, m);
    }
}
