use num_traits::{One, Zero};
use proptest::prelude::*;

use contact_core::curve::{laplacian_power, lowest_term_profile, pullback};
use contact_core::fdb::laplacian_power_fdb;
use contact_core::{
    Curve, ExponentPair, Gaussian, GaussianRational, Kind, Order, Polynomial, Rational, Truncation,
};

const N: usize = 2;

fn coefficient() -> impl Strategy<Value = GaussianRational> {
    (-6i64..=6, 1i64..=4, -3i64..=3).prop_map(|(a, b, c)| {
        Gaussian::new(Rational::new(a.into(), b.into()), Rational::from_integer(c.into()))
    })
}

fn exponent(max: u32) -> impl Strategy<Value = ExponentPair> {
    (prop::collection::vec(0..=max, N), prop::collection::vec(0..=max, N))
        .prop_map(|(h, a)| ExponentPair::new(&h, &a))
}

fn poly() -> impl Strategy<Value = Polynomial> {
    prop::collection::vec((exponent(2), coefficient()), 0..5)
        .prop_map(|terms| Polynomial::from_terms(N, terms, Truncation::Exact))
}

fn mixed_poly() -> impl Strategy<Value = Polynomial> {
    prop::collection::vec((exponent(2), coefficient()), 1..5).prop_map(|terms| {
        let terms = terms.into_iter().map(|(mut e, c)| {
            if !e.is_mixed() {
                e.holo[0] += 1;
                e.anti[0] += 1;
            }
            (e, c)
        });
        Polynomial::from_terms(N, terms, Truncation::Exact)
    })
}

fn curve() -> impl Strategy<Value = Curve> {
    prop::collection::vec(prop::collection::vec((-2i64..=2, -2i64..=2), 4), N)
        .prop_filter_map("constant curve", |rows| {
            let coeffs = rows
                .into_iter()
                .map(|row| {
                    std::iter::once(GaussianRational::zero())
                        .chain(row.into_iter().map(|(a, b)| GaussianRational::from_ints(a, b)))
                        .collect()
                })
                .collect();
            Curve::from_coefficients(coeffs, Truncation::Exact).ok()
        })
}

fn factorial(k: u32) -> Rational {
    (1..=k as i64).fold(Rational::one(), |a, b| a * Rational::from_integer(b.into()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn ring_axioms(f in poly(), g in poly(), h in poly()) {
        prop_assert_eq!(&(&f + &g) + &h, &f + &(&g + &h));
        prop_assert_eq!(&f + &g, &g + &f);
        prop_assert_eq!(&(&f * &g) * &h, &f * &(&g * &h));
        prop_assert_eq!(&f * &g, &g * &f);
        prop_assert_eq!(&f * &(&g + &h), &(&f * &g) + &(&f * &h));
        prop_assert_eq!(&f * &Polynomial::one(N), f.clone());
        prop_assert!((&f - &f).is_zero());
    }

    #[test]
    fn conjugation_is_an_involutive_ring_map(f in poly(), g in poly()) {
        prop_assert_eq!(f.conjugate().conjugate(), f.clone());
        prop_assert_eq!((&f * &g).conjugate(), &f.conjugate() * &g.conjugate());
        prop_assert!((&f + &f.conjugate()).is_real_valued());
    }

    #[test]
    fn wirtinger_product_rule(f in poly(), g in poly(), j in 0..N, holo in any::<bool>()) {
        let kind = if holo { Kind::Holo } else { Kind::Anti };
        let lhs = (&f * &g).wirtinger(j, kind);
        let rhs = &(&f.wirtinger(j, kind) * &g) + &(&f * &g.wirtinger(j, kind));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn wirtinger_commutes_with_conjugation(f in poly(), j in 0..N) {
        prop_assert_eq!(f.wirtinger(j, Kind::Holo).conjugate(), f.conjugate().wirtinger(j, Kind::Anti));
    }

    #[test]
    fn order_is_additive(f in poly(), g in poly()) {
        prop_assume!(!f.is_zero() && !g.is_zero());
        let (a, b) = (f.order_of_vanishing().exact().unwrap(), g.order_of_vanishing().exact().unwrap());
        prop_assert_eq!((&f * &g).order_of_vanishing(), Order::Exact(a + b));
    }

    #[test]
    fn pullback_keeps_mixed_only(g in mixed_poly(), z in curve()) {
        let u = pullback(&g, &z).unwrap();
        prop_assert!(u.is_mixed_only());
    }

    #[test]
    fn laplacian_power_reads_the_balanced_coefficient(g in mixed_poly(), z in curve()) {
        let u = pullback(&(&g + &g.conjugate()), &z).unwrap();
        if let Order::Exact(d) = u.order_of_vanishing() {
            let profile = lowest_term_profile(&u).unwrap();
            match profile.ck {
                Some(ck) => {
                    let k = d / 2;
                    let f = factorial(k);
                    prop_assert_eq!(laplacian_power(&u, k).unwrap(), ck.scale(&(f.clone() * f)));
                }
                None => prop_assert!(d % 2 == 1),
            }
        }
    }

    #[test]
    fn expansion_matches_direct_operator(g in mixed_poly(), z in curve(), k in 1u32..=3) {
        let direct = laplacian_power(&pullback(&g, &z).unwrap(), k).unwrap();
        prop_assert_eq!(laplacian_power_fdb(&g, &z, k).unwrap(), direct);
    }

    #[test]
    fn reparametrization_scales_orders(g in mixed_poly(), z in curve(), a in 1i64..=2, b in -1i64..=1) {
        let lambda = GaussianRational::from_ints(a, b);
        let w = z.rescale_parameter(&lambda).unwrap();
        prop_assert_eq!(w.multiplicity(), z.multiplicity());
        let (u, v) = (pullback(&g, &z).unwrap(), pullback(&g, &w).unwrap());
        prop_assert_eq!(u.order_of_vanishing(), v.order_of_vanishing());
    }

    #[test]
    fn composing_with_t_squared_doubles_orders(g in mixed_poly(), z in curve()) {
        let sq: Vec<Polynomial> = z
            .to_polynomials()
            .iter()
            .map(|c| c.substitute(&[Polynomial::var(1, 0).pow(2)]).unwrap())
            .collect();
        let w = Curve::from_polynomials(&sq).unwrap();
        prop_assert_eq!(w.multiplicity(), 2 * z.multiplicity());
        let (u, v) = (pullback(&g, &z).unwrap().order_of_vanishing(), pullback(&g, &w).unwrap().order_of_vanishing());
        match (u, v) {
            (Order::Exact(a), Order::Exact(b)) => prop_assert_eq!(b, 2 * a),
            (a, b) => prop_assert_eq!(a, b),
        }
    }
}
