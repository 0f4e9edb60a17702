use std::f64::consts::{FRAC_PI_2, TAU};

use proptest::prelude::*;
use su3cat::dynamics::evolve_diagonal;
use su3cat::husimi::{q_slice, q_symbol, SlicePoint};
use su3cat::{
    dimension, index_of, su2_23_coherent, su3_coherent, triple_of, BasisIndex, CoherentParams,
    FockTriple,
};

fn params() -> impl Strategy<Value = CoherentParams> {
    (
        -4.0f64..4.0,
        -4.0f64..4.0,
        -10.0f64..10.0,
        -10.0f64..10.0,
        -10.0f64..10.0,
    )
        .prop_map(|(xi, th, a, b, c)| CoherentParams::new(xi, th, a, b, c))
}

proptest! {
    #[test]
    fn index_round_trip(n1 in 0u32..60, n2 in 0u32..60, n3 in 0u32..60) {
        let t = FockTriple::new(n1, n2, n3);
        let b = index_of(t);
        prop_assert!(b.idx < dimension(b.n as i64).unwrap());
        prop_assert_eq!(triple_of(b).unwrap(), t);
    }

    #[test]
    fn triple_round_trip(n in 0u32..80, frac in 0.0f64..1.0) {
        let idx = ((dimension(n as i64).unwrap() as f64 - 1.0) * frac) as usize;
        let t = triple_of(BasisIndex { idx, n }).unwrap();
        prop_assert_eq!(t.total(), n);
        prop_assert_eq!(index_of(t).idx, idx);
    }

    #[test]
    fn coherent_states_are_normalised(p in params(), n in 0u32..40) {
        prop_assert!((su3_coherent(&p, n).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reduced_parameters_are_fixed_points(p in params()) {
        prop_assert!((0.0..=FRAC_PI_2).contains(&p.xi()));
        prop_assert!((0.0..=FRAC_PI_2).contains(&p.theta()));
        let again = CoherentParams::new(p.xi(), p.theta(), p.phi(), p.phi1(), p.phi2());
        prop_assert_eq!(again, p);
    }

    #[test]
    fn evolution_is_unitary(p in params(), n in 0u32..25, t in -5.0f64..5.0) {
        let psi = evolve_diagonal(&su3_coherent(&p, n), 1.0, t);
        prop_assert!((psi.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn q_values_are_probabilities(p in params(), q in params(), n in 0u32..12, t in 0.0f64..3.0) {
        let psi = evolve_diagonal(&su3_coherent(&p, n), 1.0, t);
        let v = q_symbol(&psi, &q).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&v));
    }

    #[test]
    fn slice_q_bounded_and_periodic(xi0 in 0.0f64..FRAC_PI_2, phi in 0.0f64..TAU, xi in 0.0f64..FRAC_PI_2, phi2 in 0.0f64..TAU, n in 0u32..14, t in 0.0f64..3.0) {
        let psi = evolve_diagonal(&su2_23_coherent(xi0, phi, n), 1.0, t);
        let v = q_slice(&psi, &SlicePoint::new(xi, phi2)).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&v));
        let w = q_slice(&psi, &SlicePoint::new(xi, phi2 + TAU)).unwrap();
        prop_assert!((v - w).abs() < 1e-12);
    }
}
