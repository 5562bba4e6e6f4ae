//! Structural properties of the scheme over random smooth initial data.

use proptest::prelude::*;

use radial_chemotaxis::functionals::EnergyRecord;
use radial_chemotaxis::grid::{build_grid, RadialField};
use radial_chemotaxis::model::{initial_state, ModelParams};
use radial_chemotaxis::oracles::exact_v_mass_bound;
use radial_chemotaxis::stepper::{run, step, StepperConfig};

/// `a + b cos(kπr)` with `|b| < a`, so the profile stays positive.
fn profile(a: f64, b: f64, k: u32) -> impl Fn(f64) -> f64 {
    move |r| a + b * (k as f64 * std::f64::consts::PI * r).cos()
}

fn data() -> impl Strategy<Value = [(f64, f64, u32); 3]> {
    let one = (0.1f64..5.0, 0.0f64..0.9, 1u32..4).prop_map(|(a, f, k)| (a, a * f, k));
    [one.clone(), one.clone(), one]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn steps_conserve_mass_and_positivity(d in data(), cells in 16usize..96) {
        let g = build_grid(5, 1.0, cells).unwrap();
        let p = ModelParams::fully_parabolic(5, 1.0);
        let [a, b, c] = d;
        let mut s = initial_state(
            &p,
            &g,
            RadialField::from_fn(g.clone(), profile(a.0, a.1, a.2)),
            RadialField::from_fn(g.clone(), profile(b.0, b.1, b.2)),
            RadialField::from_fn(g.clone(), profile(c.0, c.1, c.2)),
        )
        .unwrap();
        let m0 = s.u.integrate();
        let cfg = StepperConfig::default();
        for _ in 0..30 {
            s = step(&p, &s, &cfg).unwrap();
            prop_assert!((s.u.integrate() - m0).abs() <= 1e-12 * m0);
            prop_assert!(s.u.min() >= 0.0 && s.v.min() >= 0.0 && s.w.min() >= 0.0);
        }
    }

    #[test]
    fn signal_mass_stays_below_the_envelope(d in data()) {
        let g = build_grid(5, 1.0, 64).unwrap();
        let p = ModelParams::fully_parabolic(5, 1.0);
        let [a, b, c] = d;
        let s = initial_state(
            &p,
            &g,
            RadialField::from_fn(g.clone(), profile(a.0, a.1, a.2)),
            RadialField::from_fn(g.clone(), profile(b.0, b.1, b.2)),
            RadialField::from_fn(g.clone(), profile(c.0, c.1, c.2)),
        )
        .unwrap();
        let bound = exact_v_mass_bound([s.u.integrate(), s.v.integrate(), s.w.integrate()]);
        let cfg = StepperConfig { horizon: 0.2, record_stride: 1, ..Default::default() };
        let mut recs: Vec<EnergyRecord> = Vec::new();
        run(&p, s, &cfg, &mut recs).unwrap();
        for r in &recs {
            prop_assert!(r.mass_v <= bound * (1.0 + 1e-10));
            prop_assert!(r.mass_w <= bound * (1.0 + 1e-10));
        }
    }
}
