use std::sync::Arc;

use primcount::arith::{divisors, prime_powers_up_to};
use primcount::budget::WorkBudget;
use primcount::charsum::CharTable;
use primcount::count::count_primitive_brute;
use primcount::fermat::{
    primitive_count_fermat_charsum, primitive_count_fermat_exact, sphere_scan, theorem2_bound_at_zero,
    theorem2_check,
};
use primcount::field::{FieldCtx, FqElem};
use primcount::poly::FermatShape;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const B: WorkBudget = WorkBudget::DEFAULT;

#[test]
fn three_methods_agree_on_random_ternary_shapes() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for q in prime_powers_up_to(121) {
        let ctx = Arc::new(FieldCtx::of_order(q).unwrap());
        let table = Arc::new(CharTable::new(ctx.clone()));
        let m = ctx.group_order();
        let divs = divisors(m, false).unwrap();
        for _ in 0..8 {
            let d: Vec<u64> = (0..3).map(|_| *divs.choose(&mut rng).unwrap()).collect();
            let a: Vec<FqElem> = (0..3).map(|_| ctx.from_exponent(rng.gen_range(0..m))).collect();
            let b = *[FqElem::ZERO, FqElem::ONE, ctx.generator()].choose(&mut rng).unwrap();
            let shape = FermatShape::new(a, d, b).unwrap();
            let f = shape.to_poly(ctx.clone()).unwrap();
            let brute = count_primitive_brute(&f, B).unwrap();
            assert_eq!(primitive_count_fermat_exact(&ctx, &shape, B).unwrap(), brute, "q={q} f={f}");
            assert_eq!(
                primitive_count_fermat_charsum(table.clone(), &shape, B).unwrap(),
                brute,
                "q={q} f={f}"
            );
        }
    }
}

#[test]
fn diagonal_bounds_hold_for_two_and_three_variables() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let mut printed_zero_failures = 0usize;
    let mut zero_cases = 0usize;
    for q in prime_powers_up_to(121) {
        let ctx = Arc::new(FieldCtx::of_order(q).unwrap());
        let m = ctx.group_order();
        let divs = divisors(m, false).unwrap();
        for s in 2..=3usize {
            for _ in 0..40 {
                let d: Vec<u64> = (0..s).map(|_| *divs.choose(&mut rng).unwrap()).collect();
                let a: Vec<FqElem> = (0..s).map(|_| ctx.from_exponent(rng.gen_range(0..m))).collect();
                for b in [FqElem::ONE, ctx.generator()] {
                    let r = theorem2_check(&ctx, &FermatShape::new(a.clone(), d.clone(), b).unwrap(), B).unwrap();
                    assert_eq!(r.holds, Some(true), "q={q} {}", r.poly);
                }
                let r = theorem2_check(&ctx, &FermatShape::new(a, d.clone(), FqElem::ZERO).unwrap(), B).unwrap();
                assert!(r.deviation <= theorem2_bound_at_zero(q, &d).unwrap(), "q={q} {}", r.poly);
                zero_cases += 1;
                if r.holds != Some(true) {
                    printed_zero_failures += 1;
                }
            }
        }
    }
    println!("b = 0: additive-delta form exceeded in {printed_zero_failures} of {zero_cases} cases");
}

#[test]
fn sphere_exceptions_below_1000() {
    assert_eq!(sphere_scan(1000, 2, None).unwrap().exceptional, vec![3, 5, 9, 13, 25]);
}
