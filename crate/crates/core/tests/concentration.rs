use proptest::prelude::*;
use sievelab_core::concentration::{
    azuma_bound, empirical_tail_check, generalized_azuma_bound, BoundKind, Generator,
    IncrementProfile, Sided, TraceProfile,
};
use sievelab_core::random_models::{IncrementBounds, Normalization};

fn sieve(normalization: Normalization, profile: TraceProfile) -> Generator {
    Generator::SieveTrace {
        y: 1000.0,
        w1: 10.0,
        w2: 1000.0,
        normalization,
        profile,
    }
}

#[test]
fn sieve_traces_respect_bounds() {
    let analytic = IncrementBounds::analytic(1000.0, 10.0, 1000.0, Normalization::Theta).unwrap();
    let spread = IncrementProfile::from(analytic).sum_c_squared().sqrt();
    for profile in [TraceProfile::Analytic, TraceProfile::Empirical] {
        let r =
            empirical_tail_check(sieve(Normalization::Theta, profile), spread, 5_000, 1).unwrap();
        assert_eq!(r.bound_kind, BoundKind::AzumaTwoSided);
        assert!(!r.violation, "{}", r.to_json());
    }
    let hat = IncrementBounds::analytic(1000.0, 10.0, 1000.0, Normalization::ThetaHat).unwrap();
    let hat = IncrementProfile::from(hat);
    let t = (2.0 * hat.sum_d()).max(hat.sum_c_squared().sqrt()) * 1.01;
    let r = empirical_tail_check(
        sieve(Normalization::ThetaHat, TraceProfile::Analytic),
        t,
        5_000,
        1,
    )
    .unwrap();
    assert_eq!(r.bound_kind, BoundKind::GeneralizedAzuma);
    assert!(!r.violation, "{}", r.to_json());
}

#[test]
fn empirical_profile_is_tighter() {
    let a = empirical_tail_check(
        sieve(Normalization::Theta, TraceProfile::Analytic),
        1.0,
        500,
        9,
    )
    .unwrap();
    let e = empirical_tail_check(
        sieve(Normalization::Theta, TraceProfile::Empirical),
        1.0,
        500,
        9,
    )
    .unwrap();
    assert!(e.sum_c_squared <= a.sum_c_squared);
    assert_eq!(a.hits, e.hits);
}

#[test]
fn drifted_walk_respects_generalized_bound() {
    let r = empirical_tail_check(
        Generator::DriftedWalk {
            steps: 25,
            drift: 0.1,
        },
        10.0,
        20_000,
        4,
    )
    .unwrap();
    assert!((r.bound - 2.0 * (-0.5f64).exp()).abs() < 1e-12);
    assert!(!r.violation);
    assert!(empirical_tail_check(
        Generator::DriftedWalk {
            steps: 25,
            drift: 0.1
        },
        5.0,
        10,
        4
    )
    .is_err());
}

#[test]
fn reports_reproduce() {
    let g = Generator::FairWalk { steps: 50 };
    assert_eq!(
        empirical_tail_check(g, 10.0, 3_000, 77).unwrap(),
        empirical_tail_check(g, 10.0, 3_000, 77).unwrap()
    );
}

proptest! {
    #[test]
    fn azuma_monotone(
        c in prop::collection::vec(0.01f64..5.0, 1..40),
        eps in 0.0f64..50.0,
        extra in 0.0f64..10.0,
        bump in 0.0f64..2.0,
        at in any::<prop::sample::Index>(),
    ) {
        let p = IncrementProfile::driftless(c.clone()).unwrap();
        let b = azuma_bound(eps, &p, Sided::One).unwrap();
        prop_assert!(azuma_bound(eps + extra, &p, Sided::One).unwrap() <= b);
        let mut wider = c;
        let i = at.index(wider.len());
        wider[i] += bump;
        let q = IncrementProfile::driftless(wider).unwrap();
        prop_assert!(azuma_bound(eps, &q, Sided::One).unwrap() >= b);
        prop_assert!(generalized_azuma_bound(eps.max(1e-9), &p).unwrap()
            >= azuma_bound(eps.max(1e-9), &p, Sided::Two).unwrap());
    }
}
