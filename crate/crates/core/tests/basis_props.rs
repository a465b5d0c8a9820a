use fermat_tower::basis::{
    annihilator, member_basis, BasisEnumeration, BasisError, MemberBudget, Strategy,
};
use fermat_tower::census::{z_element, Relabeling};
use fermat_tower::tower::{ElementShape, Tower, TowerConfig, TowerElem};
use proptest::prelude::{any, prop_assert, prop_assert_eq, proptest, ProptestConfig};
use proptest::strategy::Strategy as _;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn tower(primes: &[u64]) -> Tower {
    Tower::new(&TowerConfig::new(primes.to_vec())).unwrap()
}

/// Non-rational elements of `Q(x0, y0)` outside `exclude`.
fn samples(t: &Tower, exclude: &[TowerElem], count: usize, seed: u64) -> Vec<TowerElem> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<TowerElem> = Vec::new();
    while out.len() < count {
        let e = t.random_element_shaped(&mut rng, 1, &ElementShape::light());
        let fresh = !exclude.iter().chain(&out).any(|x| t.eq(x, &e));
        if e.rational_value().is_none() && fresh {
            out.push(e);
        }
    }
    out
}

fn agrees_with_ground_truth(enumeration: BasisEnumeration, seed: u64) {
    let t = tower(&[5, 7]);
    let gens = enumeration.prefix(&t, 2).unwrap();
    let budget = MemberBudget::default();
    for g in &gens {
        assert!(member_basis(&t, g, &enumeration, budget.clone()).unwrap());
    }
    assert!(!member_basis(&t, &t.int(3), &enumeration, budget.clone()).unwrap());
    for e in samples(&t, &gens, 20, seed) {
        let got = member_basis(&t, &e, &enumeration, budget.clone());
        assert!(matches!(got, Ok(false)), "{}: {got:?}", t.pretty(&e));
    }
}

#[test]
fn intrinsic_membership_matches_ground_truth() {
    agrees_with_ground_truth(BasisEnumeration::Intrinsic, 21);
}

#[test]
fn coordinate_membership_matches_ground_truth() {
    agrees_with_ground_truth(BasisEnumeration::Coordinates, 22);
}

#[test]
fn z_membership_survives_relabeling() {
    let t = tower(&[5, 7]);
    for i in 0..2 {
        let z = z_element(&t, i).unwrap();
        for r in Relabeling::ALL {
            let mut images = t.identity_images();
            let (x, y) = r
                .apply(&t, &t.gen_x(i).unwrap(), &t.gen_y(i).unwrap())
                .unwrap();
            images[i].x = x;
            images[i].y = Some(y);
            let moved = t.substitute(&z, &images, &t).unwrap();
            assert!(t.eq(&moved, &z), "level {i} relabeling {r}");
            let member = member_basis(
                &t,
                &moved,
                &BasisEnumeration::Intrinsic,
                MemberBudget::default(),
            );
            assert!(member.unwrap());
        }
    }
}

#[test]
fn witnesses_vanish_and_are_nonzero() {
    let t = tower(&[5, 7]);
    let x0 = t.gen_x(0).unwrap();
    let z0 = z_element(&t, 0).unwrap();
    for e in samples(&t, &[], 6, 5) {
        for gens in [vec![x0.clone()], vec![z0.clone()]] {
            let w = annihilator(&t, &e, &gens, Strategy::interpolation()).unwrap();
            assert!(w.degree() >= 1);
            assert!(w.coefficients().iter().any(|c| !c.is_zero()));
            assert!(w.evaluate(&t, &e, &gens).unwrap().is_zero());
        }
    }
}

fn small_case() -> impl proptest::strategy::Strategy<Value = (bool, i64, u64)> {
    (any::<bool>(), -3i64..=3, 1u64..=3).prop_filter("nonzero", |(_, c, _)| *c != 0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    // c*y0^k and x0^k + c over [x0]: small enough for blind enumeration
    #[test]
    fn strategies_agree((use_y, c, k) in small_case()) {
        let t = tower(&[5]);
        let x0 = t.gen_x(0).unwrap();
        let e = if use_y {
            t.mul(&t.int(c), &t.pow(&t.gen_y(0).unwrap(), k))
        } else {
            t.add(&t.pow(&x0, k), &t.int(c))
        };
        let gens = [x0];
        let mut found = Vec::new();
        for s in [Strategy::elimination(), Strategy::interpolation(), Strategy::enumeration()] {
            match annihilator(&t, &e, &gens, s) {
                Ok(w) => found.push(w.coefficient_images(&t, &gens).unwrap()),
                Err(BasisError::NotFound) | Err(BasisError::BudgetExhausted { .. }) => {}
                Err(other) => panic!("{other}"),
            }
        }
        prop_assert!(found.len() >= 2);
        for w in &found[1..] {
            prop_assert_eq!(w.len(), found[0].len());
            for (a, b) in w.iter().zip(&found[0]) {
                prop_assert!(t.eq(a, b));
            }
        }
    }
}
