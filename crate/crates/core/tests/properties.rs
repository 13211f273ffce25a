use num_traits::{Signed, Zero};
use proptest::prelude::*;

use toric_factor::cli::gen_instance;
use toric_factor::factorization::{factor, verify_trace};
use toric_factor::formal_real::floor_ratio;
use toric_factor::lattice::{interior_contains, star_subdivide, LatticeVector};
use toric_factor::{FormalReal, RealBasis, Side, Sign, TraceStep, UnimodularCone};

fn real(c: &[i64]) -> FormalReal {
    FormalReal::from_ints(&RealBasis::default_sqrt(4), c).unwrap()
}

fn coeffs() -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-50i64..50, 4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sign_agrees_with_floating_point(c in coeffs()) {
        let x = real(&c);
        let f = x.to_f64();
        let sign = x.sign().unwrap();
        if x.is_zero() {
            prop_assert_eq!(sign, Sign::Zero);
        } else if f.abs() > 1e-9 {
            prop_assert_eq!(sign == Sign::Positive, f > 0.0);
        }
    }

    #[test]
    fn compare_is_antisymmetric(a in coeffs(), b in coeffs()) {
        let (x, y) = (real(&a), real(&b));
        let xy = x.compare(&y).unwrap();
        let yx = y.compare(&x).unwrap();
        prop_assert_eq!(xy.as_i32(), -yx.as_i32());
        prop_assert_eq!(xy, x.try_sub(&y).unwrap().sign().unwrap());
    }

    #[test]
    fn floor_ratio_brackets(a in 1i64..40, b in 1i64..40, c in 1i64..40, d in 1i64..40) {
        let x = real(&[a, b, 0, 0]);
        let y = real(&[0, 0, c, d]);
        let k = floor_ratio(&x, &y).unwrap();
        let low = x.sub_multiple(&k, &y).unwrap();
        prop_assert_eq!(low.sign().unwrap(), Sign::Positive);
        prop_assert_eq!(low.compare(&y).unwrap(), Sign::Negative);
    }

    #[test]
    fn star_subdivision_keeps_valuation_inside(seed in 0u64..1000, i in 0usize..3, j in 0usize..3) {
        prop_assume!(i != j);
        let inst = gen_instance(3, 10, 20, seed).unwrap();
        let (cone, step) = star_subdivide(&inst.tau, i, j, &inst.v, Side::Tau).unwrap();
        prop_assert!(interior_contains(&cone, &inst.v).unwrap());
        prop_assert_eq!(cone.determinant().abs(), num_bigint::BigInt::from(1));
        prop_assert_eq!(&step.new_generator, &inst.tau.generators()[i].add(&inst.tau.generators()[j]));
    }

    #[test]
    fn corrupted_steps_are_rejected(seed in 0u64..200, pick in 0usize..1000, shift in 1i64..4) {
        let inst = gen_instance(2, 10, 20, seed).unwrap();
        let mut trace = factor(&inst.tau, &inst.sigma, &inst.v).unwrap();
        prop_assert!(verify_trace(&inst.sigma, &inst.tau, &inst.v, &trace).ok);
        let stars: Vec<usize> = trace
            .sigma_steps
            .iter()
            .enumerate()
            .filter(|(_, s)| matches!(s, TraceStep::Star(_)))
            .map(|(k, _)| k)
            .collect();
        prop_assume!(!stars.is_empty());
        let k = stars[pick % stars.len()];
        if let TraceStep::Star(rec) = &mut trace.sigma_steps[k] {
            let mut e = rec.new_generator.entries().to_vec();
            e[0] += shift;
            rec.new_generator = LatticeVector::new(e);
        }
        let report = verify_trace(&inst.sigma, &inst.tau, &inst.v, &trace);
        prop_assert!(!report.ok);
        prop_assert_eq!(report.violation.unwrap().step, Some(k));
    }

    #[test]
    fn generated_instances_are_valid(n in 2usize..6, seed in 0u64..10_000) {
        let inst = gen_instance(n, 10, 20, seed).unwrap();
        prop_assert!(inst.tau.generators().iter().flat_map(|g| g.entries()).all(|x| x.magnitude() <= &10u32.into()));
        prop_assert!(interior_contains(&inst.tau, &inst.v).unwrap());
        prop_assert!(interior_contains(&inst.sigma, &inst.v).unwrap());
        prop_assert_eq!(inst.sigma, UnimodularCone::identity(n));
        prop_assert!(!inst.v.ambient().iter().any(|x| x.coeffs().iter().all(Zero::is_zero)));
    }
}
