mod common;

use common::{edge, exhaustive_optimum, random_instance, rational_lp_max, relaxation_optimum};
use num_rational::BigRational;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use trs_core::optimize::{solve, verify_integral, MatchingInstance, Objective};

#[test]
fn rational_simplex_small_program() {
    // max x + 2y, x + y <= 4, y <= 3.
    let v = rational_lp_max(&[1, 2], &[vec![1, 1], vec![0, 1]], &[4, 3]);
    assert_eq!(v, BigRational::from_integer(7.into()));
    // A fractional optimum: the odd cycle relaxation of a triangle.
    let tri = rational_lp_max(&[1, 1, 1], &[vec![1, 1, 0], vec![0, 1, 1], vec![1, 0, 1]], &[1, 1, 1]);
    assert_eq!(tri, BigRational::new(3.into(), 2.into()));
}

#[test]
fn two_driver_example() {
    let edges = vec![edge(1, 10, 100), edge(1, 10, 120), edge(1, 10, 80), edge(1, 20, 50), edge(2, 20, 30), edge(3, 20, 40)];
    let inst = MatchingInstance::new(edges, Objective::MaxMatches);
    assert_eq!(exhaustive_optimum(&inst), 2);
    assert_eq!(solve(&inst).objective_value, 2);
}

#[test]
fn solve_agrees_with_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..300 {
        for obj in Objective::ALL {
            let inst = random_instance(&mut rng, 20, obj);
            let a = solve(&inst);
            inst.check_selection(&a.selected).unwrap();
            assert_eq!(a.objective_value, exhaustive_optimum(&inst));
        }
    }
}

#[test]
fn relaxation_is_integral_on_small_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..150 {
        for obj in Objective::ALL {
            let inst = random_instance(&mut rng, 12, obj);
            let exact = relaxation_optimum(&inst);
            assert_eq!(exact, BigRational::from_integer(exhaustive_optimum(&inst).into()));
            let rep = verify_integral(&inst).unwrap();
            assert!((rep.lp_objective - solve(&inst).objective_value as f64).abs() < 1e-6);
        }
    }
}

#[test]
fn relaxation_is_integral_at_500_edges() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for obj in Objective::ALL {
        let edges = (0..500)
            .map(|_| {
                use rand::Rng;
                edge(rng.gen_range(0..150), 1000 + rng.gen_range(0..150), rng.gen_range(-300..3000))
            })
            .collect();
        let inst = MatchingInstance::new(edges, obj);
        let rep = verify_integral(&inst).unwrap();
        assert!(rep.max_fractionality <= 1e-9);
        let a = solve(&inst);
        assert!((rep.lp_objective - a.objective_value as f64).abs() < 1e-6);
        let lp_value: i64 = rep.ones.iter().map(|&k| inst.weight(k)).sum();
        assert_eq!(lp_value, a.objective_value);
    }
}

proptest! {
    #[test]
    fn objectives_dominate_each_other(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let z1 = random_instance(&mut rng, 40, Objective::MaxMatches);
        let z2 = z1.with_objective(Objective::MaxSavings);
        let (a1, a2) = (solve(&z1), solve(&z2));
        prop_assert!(a1.count() >= a2.count());
        prop_assert!(a2.savings(&z2) >= a1.savings(&z1));
    }

    #[test]
    fn scaling_savings_keeps_the_optimum(seed in any::<u64>(), factor in 1i64..50) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_instance(&mut rng, 30, Objective::MaxSavings);
        let mut scaled = inst.clone();
        for e in &mut scaled.edges {
            e.t_vhrs *= factor;
        }
        let (a, b) = (solve(&inst), solve(&scaled));
        prop_assert_eq!(b.objective_value, a.objective_value * factor);
        prop_assert_eq!(scaled.value_of(&a.selected), b.objective_value);
    }

    #[test]
    fn never_selects_a_participant_twice(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_instance(&mut rng, 200, Objective::MaxMatches);
        let a = solve(&inst);
        prop_assert!(inst.check_selection(&a.selected).is_ok());
        prop_assert_eq!(a.objective_value as usize, a.count());
    }
}
