use kloos::field::{FieldElement, FieldSpec, QuadraticRoots};
use kloos::ksum::kloosterman;
use proptest::prelude::*;

fn field_and_elems(n: usize) -> impl Strategy<Value = (FieldSpec, Vec<FieldElement>)> {
    (1u32..=32).prop_flat_map(move |m| {
        let mask = if m == 32 { u32::MAX } else { (1u32 << m) - 1 };
        prop::collection::vec(any::<u32>(), n).prop_map(move |raw| {
            let f = FieldSpec::with_default_poly(m).unwrap();
            let elems = raw.into_iter().map(|r| FieldElement::from_bits(r & mask)).collect();
            (f, elems)
        })
    })
}

proptest! {
    #[test]
    fn ring_axioms((f, e) in field_and_elems(3)) {
        let (a, b, c) = (e[0], e[1], e[2]);
        prop_assert_eq!(f.mul(a, b), f.mul(b, a));
        prop_assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
        prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
        prop_assert_eq!(f.mul(a, FieldElement::ONE), a);
        prop_assert_eq!(f.add(a, a), FieldElement::ZERO);
    }

    #[test]
    fn inverse_sqrt_frobenius((f, e) in field_and_elems(2)) {
        let (a, b) = (e[0], e[1]);
        if !a.is_zero() {
            prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), FieldElement::ONE);
        }
        prop_assert_eq!(f.square(f.sqrt(a)), a);
        prop_assert_eq!(f.square(f.add(a, b)), f.add(f.square(a), f.square(b)));
        prop_assert_eq!(f.pow(a, f.order()), a);
    }

    #[test]
    fn trace_is_linear_and_frobenius_invariant((f, e) in field_and_elems(2)) {
        let (a, b) = (e[0], e[1]);
        prop_assert!(f.trace(a) <= 1);
        prop_assert_eq!(f.trace(f.add(a, b)), f.trace(a) ^ f.trace(b));
        prop_assert_eq!(f.trace(f.square(a)), f.trace(a));
        prop_assert_eq!(f.trace(a), f.trace_by_definition(a));
    }

    #[test]
    fn dual_matrix_represents_trace_form((f, e) in field_and_elems(2)) {
        let (a, x) = (e[0], e[1]);
        let ta = f.dual_apply(a);
        let parity = ((ta & x.bits()).count_ones() % 2) as u8;
        prop_assert_eq!(f.trace(f.mul(a, x)), parity);
    }

    #[test]
    fn quadratic_roots_substitute((f, e) in field_and_elems(2)) {
        let (b, c) = (e[0], e[1]);
        let roots = f.solve_quadratic(b, c);
        for y in roots.roots() {
            prop_assert_eq!(f.add(f.add(f.square(y), f.mul(b, y)), c), FieldElement::ZERO);
        }
        if !b.is_zero() {
            let solvable = f.trace(f.div(c, f.square(b)).unwrap()) == 0;
            prop_assert_eq!(matches!(roots, QuadraticRoots::TwoRoots(..)), solvable);
        }
    }

    #[test]
    fn artin_schreier_roots((f, e) in field_and_elems(1)) {
        let c = e[0];
        match f.solve_artin_schreier(c) {
            Some(y) => {
                prop_assert_eq!(f.trace(c), 0);
                prop_assert_eq!(f.add(f.square(y), y), c);
            }
            None => prop_assert_eq!(f.trace(c), 1),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kloosterman_frobenius_and_residue(m in 3u32..=14, raw in any::<u32>()) {
        let f = FieldSpec::with_default_poly(m).unwrap();
        let a = FieldElement::from_bits(raw & ((1 << m) - 1));
        let k = kloosterman(&f, a);
        prop_assert_eq!(k, kloosterman(&f, f.square(a)));
        prop_assert_eq!(k.rem_euclid(4), 3);
        prop_assert!(a.is_zero() || k * k <= 4 * f.order() as i64);
    }
}
