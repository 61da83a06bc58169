//! Randomized algebraic invariants.

use eisrec::arith::{rat, rint, Rat};
use eisrec::cyclotomic::CycNumber;
use eisrec::eisenstein::{self, TorsionIndex};
use eisrec::qseries::QExpansion;
use eisrec::tadic::{self, PmElement, TadicElement};
use eisrec::tower::TowerElement;
use proptest::prelude::*;

fn small_rat() -> impl Strategy<Value = Rat> {
    (-20i64..20, 1i64..6).prop_map(|(n, d)| rat(n, d))
}

fn cyc(level: u64) -> impl Strategy<Value = CycNumber> {
    let deg = eisrec::cyclotomic::field(level).degree;
    prop::collection::vec(small_rat(), deg).prop_map(move |c| CycNumber::from_coords(level, c))
}

fn level() -> impl Strategy<Value = u64> {
    prop::sample::select(vec![1u64, 3, 4, 5, 6, 12, 15])
}

fn series(level: u64, d: u64) -> impl Strategy<Value = QExpansion> {
    prop::collection::vec((0i64..(3 * d as i64), cyc(level)), 0..5).prop_map(move |ts| {
        let mut x = QExpansion::zero(d, level, rint(3));
        for (n, c) in ts {
            x.add_term(n, &c);
        }
        x
    })
}

fn unit_series(level: u64, d: u64) -> impl Strategy<Value = QExpansion> {
    (series(level, d), 1i64..5).prop_map(move |(x, c)| {
        // nonzero constant term, so the series is invertible
        let mut y = x.clone();
        y.add_term(0, &CycNumber::from_int(level, c));
        y.add_term(0, &(-&x.constant_term()));
        y
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn field_ring_laws((x, y, z) in level().prop_flat_map(|l| (cyc(l), cyc(l), cyc(l)))) {
        prop_assert_eq!(&x * &y, &y * &x);
        prop_assert_eq!(&(&x * &y) * &z, &x * &(&y * &z));
        prop_assert_eq!(&x * &(&y + &z), &(&x * &y) + &(&x * &z));
        prop_assert_eq!(&(&x - &y) + &y, x.clone());
    }

    #[test]
    fn field_inverse(x in level().prop_flat_map(cyc)) {
        prop_assume!(!x.is_zero());
        prop_assert!((&x * &x.inv().unwrap()).is_one());
    }

    #[test]
    fn embedding_is_a_ring_map((x, y) in (cyc(5), cyc(5)), mult in prop::sample::select(vec![2u64, 3, 5])) {
        let big = 5 * mult;
        let lhs = (&x * &y).embed(big).unwrap();
        let rhs = &x.embed(big).unwrap() * &y.embed(big).unwrap();
        prop_assert_eq!(lhs, rhs);
        for t in 0..2 {
            prop_assert_eq!(x.is_p_integral(5, t), x.embed(big).unwrap().is_p_integral(5, t));
        }
    }

    #[test]
    fn galois_is_a_ring_map((x, y) in (cyc(15), cyc(15)), d in prop::sample::select(vec![2i64, 4, 7, 8, 11, 13, 14])) {
        let lhs = (&x * &y).galois_sigma(d).unwrap();
        let rhs = &x.galois_sigma(d).unwrap() * &y.galois_sigma(d).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn series_ring_laws((x, y, z) in (series(5, 10), series(5, 10), series(5, 10))) {
        prop_assert!(x.mul(&y).unwrap().eq_to_prec(&y.mul(&x).unwrap()));
        prop_assert!(x.mul(&y).unwrap().mul(&z).unwrap().eq_to_prec(&x.mul(&y.mul(&z).unwrap()).unwrap()));
        let lhs = x.mul(&y.add(&z).unwrap()).unwrap();
        let rhs = x.mul(&y).unwrap().add(&x.mul(&z).unwrap()).unwrap();
        prop_assert!(lhs.eq_to_prec(&rhs));
    }

    #[test]
    fn series_inverse(x in unit_series(3, 6)) {
        let one = x.mul(&x.invert().unwrap()).unwrap();
        prop_assert!(one.eq_to_prec(&QExpansion::constant(CycNumber::one(3), rint(3))));
    }

    #[test]
    fn derivative_is_a_derivation((x, y) in (series(4, 4), series(4, 4))) {
        let lhs = x.mul(&y).unwrap().q_derivative();
        let rhs = x.q_derivative().mul(&y).unwrap().add(&x.mul(&y.q_derivative()).unwrap()).unwrap();
        prop_assert!(lhs.eq_to_prec(&rhs));
    }

    #[test]
    fn json_roundtrip(x in series(12, 24)) {
        prop_assert_eq!(QExpansion::from_json(&x.to_json()).unwrap(), x);
    }

    #[test]
    fn theta_periodicity(l in 2u64..6, a in 1i64..12, b in 0i64..6, k in 2u32..5) {
        // E_k for k >= 2 is periodic in a with period L; D2 log theta drops by 1
        let lp = l as i64;
        prop_assume!(a % lp != 0 || b % lp != 0);
        let e0 = eisenstein::e_series_at_lift(k, 1, l, a, b, &rint(2)).unwrap();
        let e1 = eisenstein::e_series_at_lift(k, 1, l, a + lp, b, &rint(2)).unwrap();
        prop_assert!(e0.eq_to_prec(&e1));
        let g0 = eisenstein::d2log_at_lift(1, l, a, b, &rint(2)).unwrap();
        let g1 = eisenstein::d2log_at_lift(1, l, a + lp, b, &rint(2)).unwrap();
        let minus_one = QExpansion::constant(CycNumber::from_int(l, -1), rint(2));
        prop_assert!(g1.sub(&g0).unwrap().eq_to_prec(&minus_one));
    }

    #[test]
    fn siegel_lift_independence(l in prop::sample::select(vec![2u64, 3, 4, 5]), a in 0i64..5, b in 0i64..5, j in -2i64..3, m in -2i64..3) {
        let idx = TorsionIndex::new(l, a, b);
        prop_assume!(!idx.is_zero());
        let li = l as i64;
        let x = eisenstein::siegel_unit_c(7, &idx, &rint(2)).unwrap();
        let y = eisenstein::siegel_unit_c_at_lift(7, l, idx.a + j * li, idx.b + m * li, &rint(2)).unwrap();
        prop_assert_eq!(x, y);
    }

    #[test]
    fn trace_after_inclusion_is_identity(x in series(5, 5), n in 1u32..3) {
        let t = TowerElement::inclusion(&x, 5, 5, n).unwrap();
        prop_assert_eq!(t.trace_rm().to_series().unwrap(), x.with_exp_denom(5).unwrap());
    }

    #[test]
    fn tower_basis_roundtrip(x in series(25, 25)) {
        let t = TowerElement::from_series(5, 5, 1, &x).unwrap();
        prop_assert_eq!(t.to_series().unwrap(), x.with_exp_denom(25).unwrap());
    }

    #[test]
    fn trace_is_linear((x, y) in (series(25, 25), series(25, 25)), c in small_rat()) {
        let tx = TowerElement::from_series(5, 5, 1, &x).unwrap();
        let ty = TowerElement::from_series(5, 5, 1, &y).unwrap();
        let lhs = tx.add(&ty.scale_rat(&c)).unwrap().trace_rm();
        let rhs = tx.trace_rm().add(&ty.trace_rm().scale_rat(&c)).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn commutator_on_random_monomials(r in 0i64..15, s in 0usize..4, c in 0i64..5, m in 1u32..3) {
        let x = TadicElement::monomial(4, CycNumber::root_of_unity(5, c), &rat(r, 5), s, 5, &rint(3)).unwrap();
        prop_assert!(tadic::commutator_check(&x, 5, m));
    }

    #[test]
    fn group_law_on_random_elements(u1 in -3i64..4, v1 in -3i64..4, u2 in -3i64..4, v2 in -3i64..4, r in 0i64..10, s in 0usize..3) {
        let g1 = PmElement::new(rint(5 * u1), rint(5 * v1), 5, 1).unwrap();
        let g2 = PmElement::new(rint(5 * u2), rint(5 * v2), 5, 1).unwrap();
        let x = TadicElement::monomial(4, CycNumber::one(5), &rat(r, 5), s, 5, &rint(3)).unwrap();
        let rep = tadic::group_law_check(&g1, &g2, &[x], 5, 1, 4);
        prop_assert!(rep.passed());
    }
}
