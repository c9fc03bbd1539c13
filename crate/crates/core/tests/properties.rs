//! Property tests over randomized inputs.

use std::sync::OnceLock;

use nlkg::config::{Command, RunConfig, KEYS};
use nlkg::grid::deriv1;
use nlkg::multiplier::bessel_multiplier;
use nlkg::run::Lab;
use nlkg::virial::{Functionals, Transform};
use nlkg::weights::WeightSet;
use nlkg::{inner, Field, Grid, Parity, StatePair};
use num_complex::Complex64;
use proptest::prelude::*;

struct Fixture {
    lab: Lab,
    transform: Transform,
    functionals: Functionals,
}

fn fixture() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| {
        let grid = Grid::new(100.0, 2048, 20.0).unwrap();
        let lab = Lab::new(2.0, &grid, 40.0, 0.1, 0.5).unwrap();
        let cfg = RunConfig::new(Command::Virial);
        let (transform, functionals) = lab.functionals(&cfg).unwrap();
        Fixture { lab, transform, functionals }
    })
}

/// Sum of Gaussian bumps `a_i e^{−x²/w_i}` (times `x` for odd parity).
fn bumps(grid: &std::sync::Arc<Grid>, parity: Parity, coeffs: &[(f64, f64)]) -> Field {
    Field::from_fn(grid, parity, |x| {
        let s: f64 = coeffs.iter().map(|(a, w)| a * (-x * x / w).exp()).sum();
        if parity == Parity::Odd {
            x * s
        } else {
            s
        }
    })
}

fn coeffs() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, 0.5..40.0f64), 1..4)
}

fn parity() -> impl Strategy<Value = Parity> {
    prop_oneof![Just(Parity::Even), Just(Parity::Odd)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn parity_algebra(a in coeffs(), b in coeffs(), pa in parity(), pb in parity()) {
        let g = fixture().lab.grid.clone();
        let (f, h) = (bumps(&g, pa, &a), bumps(&g, pb, &b));
        prop_assert_eq!(f.mul_field(&h).parity(), pa.times(pb));
        prop_assert_eq!(deriv1(&f).parity(), pa.flip());
        prop_assert_eq!(bessel_multiplier(&f, 1.5, 0.3).parity(), pa);
    }

    #[test]
    fn multiplier_is_self_adjoint_and_invertible(a in coeffs(), b in coeffs(), s in -3.0..3.0f64, eps in 0.05..1.0f64, pa in parity()) {
        let g = fixture().lab.grid.clone();
        let (f, h) = (bumps(&g, pa, &a), bumps(&g, pa, &b));
        let lhs = inner(&bessel_multiplier(&f, s, eps), &h).unwrap();
        let rhs = inner(&f, &bessel_multiplier(&h, s, eps)).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()));
        let back = bessel_multiplier(&bessel_multiplier(&f, s, eps), -s, eps);
        prop_assert!((&back - &f).max_abs() <= 1e-9 * (1.0 + f.max_abs()));
    }

    #[test]
    fn functionals_are_quadratic(a in coeffs(), b in coeffs(), alpha in -5.0..5.0f64, zr in -0.05..0.05f64, zi in -0.05..0.05f64) {
        let fx = fixture();
        let g = fx.lab.grid.clone();
        let eta = StatePair::new(bumps(&g, Parity::Even, &a).scaled(1e-2), bumps(&g, Parity::Even, &b).scaled(1e-2));
        let z2 = Complex64::new(zr, zi);
        let v = fx.transform.apply(&eta);
        let eta_s = eta.scaled(alpha);
        let v_s = fx.transform.apply(&eta_s);
        let base = fx.functionals.all(&eta, &v, z2);
        let scaled = fx.functionals.all(&eta_s, &v_s, z2);
        // J_FGR is linear in η, the four virial functionals quadratic
        let expect = [alpha, alpha * alpha, alpha * alpha, alpha * alpha, alpha * alpha];
        for k in 0..5 {
            let e = expect[k] * base[k];
            prop_assert!((scaled[k] - e).abs() <= 1e-10 * (e.abs() + base[k].abs() + 1e-30), "k = {}: {} vs {}", k, scaled[k], e);
        }
    }

    #[test]
    fn decomposition_recovers_modes(x in prop::array::uniform4(-0.02..0.02f64), a in coeffs()) {
        let prof = &fixture().lab.profile;
        let g = prof.grid().clone();
        let z = [Complex64::new(x[0], x[1]), Complex64::new(x[2], x[3])];
        let raw = StatePair::new(bumps(&g, Parity::Even, &a).scaled(1e-3), Field::zeros(&g, Parity::Even));
        let eta = prof.decompose(&(&prof.ground() + &raw)).unwrap().eta;
        let d = prof.decompose(&(&prof.profile(&z) + &eta)).unwrap();
        for k in 0..2 {
            prop_assert!((d.z[k] - z[k]).norm() < 1e-12);
        }
        prop_assert!((&d.eta - &eta).max_abs() < 1e-12);
        prop_assert!(d.residuals.iter().all(|r| r.abs() < 1e-12));
    }

    #[test]
    fn weights_are_even_and_bounded(a in 5.0..80.0f64, b in 2.0..20.0f64, kappa in 0.02..0.5f64) {
        let g = fixture().lab.grid.clone();
        let w = WeightSet::new(&g, a, b, kappa, 0.3);
        prop_assert!(w.chi_a.iter().all(|c| (0.0..=1.0).contains(c)));
        prop_assert!(w.zeta_a.iter().all(|z| *z > 0.0 && *z <= 1.0));
        prop_assert!(w.phi_a.windows(2).all(|p| p[1] >= p[0]));
    }

    #[test]
    fn config_header_round_trips(p in 1.67..2.0f64, n in 64usize..9000, t in 0.0..200.0f64, z2 in -0.05..0.05f64, seed in any::<u64>()) {
        let mut c = RunConfig::new(Command::Evolve);
        c.p = p;
        c.n_points = n;
        c.t_final = t;
        c.z2 = z2;
        c.seed = seed;
        c.a_weight = Some(0.4);
        c.input = Some("ckpt".into());
        let mut back = RunConfig::new(Command::Evolve);
        for line in c.header().lines() {
            let body = line.trim_start_matches('#').trim();
            if let Some((k, v)) = body.split_once('=') {
                if KEYS.contains(&k.trim()) {
                    back.set(k.trim(), v).unwrap();
                }
            }
        }
        prop_assert_eq!(back, c);
    }

    #[test]
    fn config_rejects_garbage(key in "[a-z_]{1,12}", value in "[^\n#]{0,8}") {
        let mut c = RunConfig::new(Command::Evolve);
        match c.set(&key, &value) {
            Ok(()) => prop_assert!(KEYS.contains(&key.as_str())),
            Err(e) => prop_assert_eq!(e.exit_code(), 2),
        }
    }
}
