//! Randomized property suites for the algebraic building blocks.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use relendo::eo;
use relendo::field::{frobenius, make_field, minimal_poly, subfield_member, Restriction};
use relendo::linalg::{Fp, Matrix};
use relendo::mass::{local_factor, mass_lambda};
use relendo::pair::{end_algebra, SubspacePair};
use relendo::quat::{quat_ctx, quat_mul};
use relendo::strata::gaussian_binomial;
use num::bigint::BigUint;
use num::{One, Signed};
use std::sync::Arc;

fn small_field() -> impl Strategy<Value = (u64, usize)> {
    prop_oneof![
        Just((2u64, 1usize)),
        Just((2, 2)),
        Just((2, 4)),
        Just((3, 1)),
        Just((3, 2)),
        Just((3, 3)),
        Just((5, 2)),
        Just((7, 1)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn field_axioms((p, e) in small_field(), seed in any::<u64>()) {
        let ctx = make_field(p, e).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = ctx.random(&mut rng);
        let b = ctx.random(&mut rng);
        let c = ctx.random(&mut rng);
        prop_assert_eq!(a.mul(&b), b.mul(&a));
        prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
        prop_assert_eq!(a.add(&a.neg()), ctx.zero());
        if !a.is_zero() {
            prop_assert_eq!(a.mul(&a.inv().unwrap()), ctx.one());
        }
    }

    #[test]
    fn frobenius_is_an_automorphism((p, e) in small_field(), seed in any::<u64>()) {
        let ctx = make_field(p, e).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = ctx.random(&mut rng);
        let b = ctx.random(&mut rng);
        prop_assert_eq!(frobenius(&a.mul(&b), 1), frobenius(&a, 1).mul(&frobenius(&b, 1)));
        prop_assert_eq!(frobenius(&a.add(&b), 1), frobenius(&a, 1).add(&frobenius(&b, 1)));
        // full Frobenius orbit closes up
        prop_assert_eq!(frobenius(&a, e), a);
    }

    #[test]
    fn minimal_polynomials_vanish((p, e) in small_field(), seed in any::<u64>()) {
        let ctx = make_field(p, e).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = ctx.random(&mut rng);
        let poly = minimal_poly(&a, 1).unwrap();
        // monic, degree divides e, and a is a root
        prop_assert!(poly.last().unwrap().is_one());
        prop_assert_eq!(e % (poly.len() - 1), 0);
        let mut acc = ctx.zero();
        let mut pw = ctx.one();
        for coeff in &poly {
            acc = acc.add(&coeff.mul(&pw));
            pw = pw.mul(&a);
        }
        prop_assert!(acc.is_zero());
        // membership in the prime field matches minimal degree 1
        prop_assert_eq!(subfield_member(&a, 1).unwrap(), poly.len() == 2);
    }

    #[test]
    fn rank_nullity_and_rref(
        p in prop_oneof![Just(2u64), Just(3), Just(5)],
        rows in 1usize..6,
        cols in 1usize..6,
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = Matrix::from_fn(rows, cols, |_, _| Fp::new(p, rng.gen_range(0..p)));
        let ker = m.kernel();
        prop_assert_eq!(m.rank() + ker.cols, cols);
        if ker.cols > 0 {
            prop_assert!(m.matmul(&ker).is_zero_matrix());
        }
        let (r, piv) = m.rref();
        prop_assert_eq!(r.rref().0, r);
        prop_assert_eq!(piv.len(), m.rank());
    }

    #[test]
    fn inverse_iff_full_rank(
        p in prop_oneof![Just(2u64), Just(3), Just(5)],
        n in 1usize..5,
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = Matrix::from_fn(n, n, |_, _| Fp::new(p, rng.gen_range(0..p)));
        match m.inverse() {
            Some(inv) => {
                prop_assert_eq!(m.matmul(&inv), Matrix::identity(&Fp::new(p, 0), n));
                prop_assert_eq!(m.rank(), n);
            }
            None => prop_assert!(m.rank() < n),
        }
    }

    #[test]
    fn solve_produces_solutions(
        p in prop_oneof![Just(2u64), Just(3), Just(5)],
        rows in 1usize..5,
        cols in 1usize..5,
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = Matrix::from_fn(rows, cols, |_, _| Fp::new(p, rng.gen_range(0..p)));
        // right-hand sides built from a known solution are always solvable
        let x: Vec<Fp> = (0..cols).map(|_| Fp::new(p, rng.gen_range(0..p))).collect();
        let b = m.mul_vec(&x);
        let sol = m.solve(&b).expect("consistent system");
        prop_assert_eq!(m.mul_vec(&sol), b);
    }

    #[test]
    fn eo_sequences_are_consistent(g in 1usize..12, mask in any::<u32>()) {
        let all = eo::enumerate(g).unwrap();
        let s = &all[(mask as usize) % all.len()];
        prop_assert_eq!(s.g(), g);
        prop_assert!(s.depth() <= g);
        let m = eo::phi_max(g);
        if s.is_ss() {
            for k in 0..=g {
                prop_assert!(s.values[k] <= m.values[k]);
            }
        }
        // dimension is bounded by the triangular number of the final value
        prop_assert!(s.dim() <= (g * (g + 1) / 2) as u64);
    }

    #[test]
    fn mass_is_positive_and_linear(
        g in 1usize..6,
        c_frac in 0usize..3,
        p in prop_oneof![Just(2u64), Just(3), Just(5)],
        index in 1u64..500,
    ) {
        let c = c_frac.min(g / 2);
        prop_assert!(local_factor(g, p, c).unwrap().is_positive());
        let m1 = mass_lambda(g, p, c, &BigUint::one()).unwrap();
        let mk = mass_lambda(g, p, c, &BigUint::from(index)).unwrap();
        prop_assert!(mk.value.is_positive());
        prop_assert_eq!(
            mk.value,
            m1.value * relendo::linalg::ExactRational::from_integer(index.into())
        );
    }

    #[test]
    fn gaussian_binomial_symmetry(n in 1usize..8, r in 0usize..8, q in 2u64..6) {
        let r = r.min(n);
        prop_assert_eq!(gaussian_binomial(n, r, q), gaussian_binomial(n, n - r, q));
        // specialization at q -> 1 analogue: coefficient positivity
        prop_assert!(gaussian_binomial(n, r, q) >= BigUint::one());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn endo_algebra_structure(seed in any::<u64>(), code in 0u64..255) {
        // random lines in F_{16}^2 over the F_4-structure
        let rest = Arc::new(Restriction::new(&make_field(2, 4).unwrap(), 2).unwrap());
        let ctx = &rest.ctx;
        let v = vec![ctx.from_code(code % 16), ctx.from_code(code / 16)];
        prop_assume!(v.iter().any(|x| !x.is_zero()));
        let _ = seed;
        let s = SubspacePair::new(rest.clone(), Matrix::from_cols(vec![v])).unwrap();
        let e = end_algebra(&s).unwrap();
        prop_assert!(e.contains_identity);
        prop_assert!((1..=4).contains(&e.dim));
        // closure under products is part of the solver's contract
        for a in &e.basis {
            for b in &e.basis {
                prop_assert!(e.span_contains(&a.matmul(b)));
            }
        }
    }

    #[test]
    fn quaternion_matrix_ring(seed in any::<u64>(), s in 2usize..5, n in 1usize..3) {
        let ctx = quat_ctx(3, 2, n, s).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = ctx.random(&mut rng);
        let y = ctx.random(&mut rng);
        let z = ctx.random(&mut rng);
        prop_assert_eq!(quat_mul(&x, &quat_mul(&y, &z)), quat_mul(&quat_mul(&x, &y), &z));
        prop_assert_eq!(quat_mul(&x.add(&y), &z), quat_mul(&x, &z).add(&quat_mul(&y, &z)));
        prop_assert_eq!(quat_mul(&x, &y).conj(), quat_mul(&y.conj(), &x.conj()));
    }
}
