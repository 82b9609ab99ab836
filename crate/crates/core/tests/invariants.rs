//! Property tests for the measure-model and kernel invariants.

use proptest::prelude::*;

use oplab::geometry::{BoxN, Rect};
use oplab::measure::{
    capacity_decompose, jordan_decompose, mutually_singular, total_variation, Density, Measure,
};
use oplab::potential::{averaged_kernel, fundamental_solution, Dim};

fn arb_measure() -> impl Strategy<Value = Measure> {
    let atom = (0.05f64..0.95, 0.05f64..0.95, -3.0f64..3.0);
    (
        proptest::collection::vec(atom, 0..4),
        proptest::option::of((-2.0f64..2.0, -2.0f64..2.0, -1.0f64..1.0)),
        proptest::option::of((0.1f64..0.4, 0.6f64..0.9, -2.0f64..2.0)),
    )
        .prop_map(|(atoms, affine, curve)| {
            let mut m = Measure::new(2, BoxN::from_rect(Rect::unit_square())).unwrap();
            for (x, y, mass) in atoms {
                if mass != 0.0 {
                    if let Ok(next) = m.clone().with_atom([x, y, 0.0], mass) {
                        m = next;
                    }
                }
            }
            if let Some((ax, ay, c)) = affine {
                m = m
                    .with_density(Density::Affine {
                        a: [ax, ay, 0.0],
                        c,
                    })
                    .unwrap();
            }
            if let Some((x0, x1, d)) = curve {
                if d != 0.0 {
                    m = m
                        .with_curve(vec![[x0, 0.3, 0.0], [x1, 0.7, 0.0]], d)
                        .unwrap();
                }
            }
            m
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn jordan_split_reconstructs_and_adds_variation(mu in arb_measure()) {
        let (plus, minus) = jordan_decompose(&mu);
        // nonnegative representation on both parts
        for a in plus.atoms().iter().chain(minus.atoms()) {
            prop_assert!(a.mass > 0.0);
        }
        for c in plus.curves().iter().chain(minus.curves()) {
            prop_assert!(c.linear_density > 0.0);
        }
        // reconstruction is exact pointwise and atomwise
        let back = plus.linear_combination(&minus, -1.0).unwrap();
        for a in mu.atoms() {
            let b = back.atoms().iter().find(|b| b.location == a.location);
            prop_assert_eq!(b.map(|b| b.mass), Some(a.mass));
        }
        for &x in &[0.11, 0.43, 0.77] {
            for &y in &[0.21, 0.58, 0.91] {
                let p = [x, y, 0.0];
                prop_assert_eq!(back.density_at(p), mu.density_at(p));
            }
        }
        // total variation splits additively (quadrature tolerance)
        let tv = total_variation(&mu);
        let split = total_variation(&plus) + total_variation(&minus);
        prop_assert!((tv - split).abs() <= 1e-6 * (1.0 + tv));
        // the two parts are mutually singular in the data model
        prop_assert!(mutually_singular(&plus, &minus).unwrap());
    }

    #[test]
    fn capacity_split_partitions_the_carriers(mu in arb_measure()) {
        let dec = capacity_decompose(&mu).unwrap();
        prop_assert!(dec.singular.densities().is_empty());
        prop_assert_eq!(
            dec.regular.atoms().len() + dec.singular.atoms().len(),
            mu.atoms().len()
        );
        // in the plane the singular part is purely atomic
        prop_assert!(dec.singular.curves().is_empty());
        prop_assert_eq!(dec.regular.curves().len(), mu.curves().len());
        let back = dec.regular.linear_combination(&dec.singular, 1.0).unwrap();
        prop_assert_eq!(back.atoms().len(), mu.atoms().len());
    }

    #[test]
    fn mutual_singularity_is_symmetric(a in arb_measure(), b in arb_measure()) {
        prop_assert_eq!(
            mutually_singular(&a, &b).unwrap(),
            mutually_singular(&b, &a).unwrap()
        );
        let zero = Measure::new(2, BoxN::from_rect(Rect::unit_square())).unwrap();
        prop_assert!(mutually_singular(&a, &zero).unwrap());
    }

    #[test]
    fn averaged_kernel_dominated_by_fundamental(
        r in 1e-4f64..0.9,
        sfrac in 0.0f64..3.0,
    ) {
        let s = r * sfrac;
        for dim in [Dim::Two, Dim::Three] {
            let ak = averaged_kernel(dim, r, s).unwrap();
            if s >= r {
                prop_assert_eq!(ak, fundamental_solution(dim, s).unwrap());
            } else if s > 0.0 {
                prop_assert!(ak <= fundamental_solution(dim, s).unwrap() + 1e-15);
            }
        }
    }
}
