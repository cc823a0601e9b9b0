use proptest::prelude::*;

use halfspace_spectral::experiments::paraproduct::paraproduct_split;
use halfspace_spectral::experiments::report::{classify, exponent};
use halfspace_spectral::extension::parity_defect;
use halfspace_spectral::io::{read_field, write_field, StoredField};
use halfspace_spectral::spectral::{apply_multiplier, Multiplier};
use halfspace_spectral::*;

fn half_values(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0..10.0_f64, n / 2)
}

fn grid(n: usize) -> GridSpec {
    GridSpec::new(1, 2.0, n, true).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn product_parity_is_exact(a in half_values(64), b in half_values(64)) {
        let g = grid(64);
        let f = HalfField::from_values(g, a, Bc::Dirichlet).unwrap();
        let h = HalfField::from_values(g, b, Bc::Dirichlet).unwrap();
        let left = odd_extend(&f.product(&h, Bc::Dirichlet).unwrap()).unwrap();
        let (fo, ho) = (odd_extend(&f).unwrap(), odd_extend(&h).unwrap());
        let right = apply_sign(&fo.zip_with(&ho, |x, y| x * y).unwrap()).unwrap();
        prop_assert_eq!(left.values(), right.values());
    }

    #[test]
    fn triple_product_parity_is_exact(a in half_values(32), b in half_values(32), c in half_values(32)) {
        let g = grid(32);
        let f = HalfField::from_values(g, a, Bc::Dirichlet).unwrap();
        let h = HalfField::from_values(g, b, Bc::Dirichlet).unwrap();
        let k = HalfField::from_values(g, c, Bc::Dirichlet).unwrap();
        let left = odd_extend(&f.product(&h, Bc::Dirichlet).unwrap().product(&k, Bc::Dirichlet).unwrap()).unwrap();
        let right = odd_extend(&f).unwrap()
            .zip_with(&odd_extend(&h).unwrap(), |x, y| x * y).unwrap()
            .zip_with(&odd_extend(&k).unwrap(), |x, y| x * y).unwrap();
        prop_assert_eq!(left.values(), right.values());
    }

    #[test]
    fn radial_multipliers_keep_parity(a in half_values(128), s in 0.1..3.0_f64, odd in any::<bool>()) {
        let (bc, parity) = if odd { (Bc::Dirichlet, Parity::Odd) } else { (Bc::Neumann, Parity::Even) };
        let f = extend(&HalfField::from_values(grid(128), a, bc).unwrap(), parity).unwrap();
        for m in [Multiplier::radial_power(s), Multiplier::bessel(s), Multiplier::stable_semigroup(0.05, s.min(2.0))] {
            let out = apply_multiplier(&f, &m).unwrap();
            prop_assert!(parity_defect(&out, parity) <= 1e-12 * out.max_abs().max(1.0));
        }
    }

    #[test]
    fn extension_doubles_mass(a in half_values(64), p in 1.0..8.0_f64) {
        let h = HalfField::from_values(grid(64), a, Bc::Dirichlet).unwrap();
        let full = lp_norm(&odd_extend(&h).unwrap(), p).unwrap();
        let half = lp_norm(&h, p).unwrap();
        prop_assert!((full - 2.0_f64.powf(1.0 / p) * half).abs() <= 1e-12 * full.max(1e-300));
        prop_assert_eq!(
            lp_norm(&odd_extend(&h).unwrap(), f64::INFINITY).unwrap(),
            lp_norm(&h, f64::INFINITY).unwrap()
        );
    }

    #[test]
    fn restriction_inverts_extension(a in half_values(64), odd in any::<bool>()) {
        let (bc, parity) = if odd { (Bc::Dirichlet, Parity::Odd) } else { (Bc::Neumann, Parity::Even) };
        let h = HalfField::from_values(grid(64), a, bc).unwrap();
        let back = restrict(&extend(&h, parity).unwrap(), bc).unwrap();
        prop_assert_eq!(back, h);
    }

    #[test]
    fn normal_derivative_twice_restores_tag(k in 1u32..20, odd in any::<bool>()) {
        let bc = if odd { Bc::Dirichlet } else { Bc::Neumann };
        let k = k as f64;
        let h = HalfField::sample(GridSpec::new(1, std::f64::consts::PI, 256, true).unwrap(), bc, |x| {
            if odd { (k * x[0]).sin() } else { (k * x[0]).cos() }
        }).unwrap();
        let once = normal_derivative(&h).unwrap();
        prop_assert_eq!(once.bc(), bc.swapped());
        let twice = normal_derivative(&once).unwrap();
        prop_assert_eq!(twice.bc(), bc);
        for (a, b) in twice.values().iter().zip(h.values()) {
            prop_assert!((a + k * k * b).abs() < 1e-9 * k * k);
        }
    }

    #[test]
    fn paraproduct_pieces_sum_to_product(
        fa in prop::collection::vec(-1.0..1.0_f64, 6),
        ga in prop::collection::vec(-1.0..1.0_f64, 6),
    ) {
        let g = grid(256);
        let bank = build_bank(&g).unwrap();
        let series = |c: Vec<f64>| SampledField::sample(g, move |x| {
            c.iter().enumerate().map(|(m, a)| a * ((m as f64 + 1.0) * 3.0 * x[0]).cos()).sum()
        }).unwrap();
        let split = paraproduct_split(&series(fa), &series(ga), &bank).unwrap();
        prop_assert!(split.reconstruction_residual < 1e-8);
    }

    #[test]
    fn verdict_ignores_scale(r in prop::collection::vec(0.1..10.0_f64, 4), c in 0.01..100.0_f64) {
        let points = [1024, 2048, 4096, 8192];
        let scaled: Vec<f64> = r.iter().map(|v| v * c).collect();
        prop_assert_eq!(classify(&points, &r, 2.0).1, classify(&points, &scaled, 2.0).1);
        prop_assert_eq!(classify(&points, &r, 2.0), classify(&points, &r, 2.0));
    }

    #[test]
    fn field_files_round_trip(a in half_values(32), tag in 0usize..3) {
        let bc = [Bc::None, Bc::Dirichlet, Bc::Neumann][tag];
        let field = StoredField::Half(HalfField::from_values(grid(32), a, bc).unwrap());
        let mut buf = Vec::new();
        write_field(&mut buf, &field).unwrap();
        prop_assert_eq!(read_field(&mut buf.as_slice()).unwrap(), field);
    }

    #[test]
    fn exponent_text_round_trips(p in prop_oneof![Just(f64::INFINITY), 1.0..100.0_f64]) {
        #[derive(serde::Serialize, serde::Deserialize)]
        struct W(#[serde(with = "exponent")] f64);
        let text = serde_json::to_string(&W(p)).unwrap();
        let back: W = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back.0, p);
    }
}
