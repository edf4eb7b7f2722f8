//! Second, independently coded enumerators for the exact space oracle, and
//! the library-level trajectory/curve equivalence run.

use mutent::entropy::{entropy_curve, LogBase};
use mutent::matrix::{CellStatus, KillMatrix};
use mutent::spacelab::{
    enumerate_feasible, exact_entropy, machine, nested_entropy_trajectory, Distribution,
    PredicateRule, ProgramSpace, SemanticPredicate,
};

const TOL: f64 = 1e-12;

/// The L=4, N=4 toy-bytecode space with three behavioral predicates,
/// recounted with literal nested loops and inline rule logic.
#[test]
fn four_by_four_space_recounted_with_nested_loops() {
    let predicates = vec![
        SemanticPredicate::new("at_least_2", PredicateRule::ResultAtLeast { value: 2 }),
        SemanticPredicate::new("even", PredicateRule::ResultEven),
        SemanticPredicate::new("shallow", PredicateRule::MaxDepthAtMost { depth: 2 }),
    ];
    let space = ProgramSpace::new(4, 4);
    let (w, _) = enumerate_feasible(&space, &predicates, false).unwrap();

    let mut recount = 0u64;
    for a in 1..=4u8 {
        for b in 1..=4u8 {
            for c in 1..=4u8 {
                for d in 1..=4u8 {
                    let out = machine::run(&[a, b, c, d]);
                    if out.result >= 2 && out.result % 2 == 0 && out.max_depth <= 2 {
                        recount += 1;
                    }
                }
            }
        }
    }
    assert_eq!(w, recount);
    assert!(w > 0);
}

#[test]
fn trajectory_equals_predicate_induced_entropy_curve() {
    let predicates = vec![
        SemanticPredicate::new("nonneg", PredicateRule::ResultAtLeast { value: 0 }),
        SemanticPredicate::new("even", PredicateRule::ResultEven),
        SemanticPredicate::new("has_dup", PredicateRule::ContainsSymbol { symbol: 5 }),
        SemanticPredicate::new("ends_add", PredicateRule::LastSymbol { symbol: 3 }),
    ];
    let space = ProgramSpace::new(3, 6);
    let trajectory = nested_entropy_trajectory(&space, &predicates, LogBase::E).unwrap();

    // every valid program becomes a "mutant", every predicate a "test"
    let (_, programs) = enumerate_feasible(&space, &[], true).unwrap();
    let programs = programs.unwrap();
    let ids: Vec<String> = programs
        .iter()
        .map(|p| p.iter().map(u8::to_string).collect())
        .collect();
    let names: Vec<String> = predicates.iter().map(|p| p.name.clone()).collect();
    let mut matrix = KillMatrix::new(names.clone(), ids.clone());
    for (program, id) in programs.iter().zip(&ids) {
        for p in &predicates {
            let status = if p.eval(program) {
                CellStatus::Pass
            } else {
                CellStatus::Fail
            };
            matrix.set_cell(id, &p.name, status).unwrap();
        }
    }
    let curve = entropy_curve(&matrix, &names, LogBase::E).unwrap();
    assert_eq!(curve.points.len(), trajectory.steps.len());
    for (step, point) in trajectory.steps.iter().zip(&curve.points) {
        assert_eq!(step.w, point.w_lower);
        assert_eq!(step.w, point.w_upper);
        match (step.s, point.s_point) {
            (Some(a), Some(b)) => assert!((a - b).abs() <= TOL),
            (None, None) => {}
            other => panic!("marker mismatch at {}: {other:?}", step.index),
        }
    }
}

#[test]
fn explicit_distributions_never_beat_log_w() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
    for _ in 0..50 {
        let w = rng.random_range(1..=200u64);
        let mut table: Vec<f64> = (0..w).map(|_| rng.random::<f64>() + 1e-9).collect();
        let sum: f64 = table.iter().sum();
        for x in &mut table {
            *x /= sum;
        }
        // renormalize the largest entry to absorb rounding
        let drift: f64 = 1.0 - table.iter().sum::<f64>();
        table[0] += drift;
        let h = exact_entropy(w, &Distribution::Explicit(table), LogBase::E).unwrap();
        assert!(h <= (w as f64).ln() + TOL, "H = {h} beats ln {w}");
        assert!(h >= 0.0);
    }
}

#[test]
fn uniform_identity_across_random_spaces() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
    let mut checked = 0;
    while checked < 30 {
        let space = ProgramSpace::new(rng.random_range(1..=5), rng.random_range(1..=4));
        let rule = match rng.random_range(0..4) {
            0 => PredicateRule::ResultEven,
            1 => PredicateRule::ResultAtLeast { value: 1 },
            2 => PredicateRule::MaxDepthAtMost { depth: 1 },
            _ => PredicateRule::Tautology,
        };
        let predicates = [SemanticPredicate::new("p", rule)];
        let (w, _) = enumerate_feasible(&space, &predicates, false).unwrap();
        if w == 0 {
            continue;
        }
        let h = exact_entropy(w, &Distribution::Uniform, LogBase::Two).unwrap();
        assert!((h - (w as f64).log2()).abs() <= TOL);
        checked += 1;
    }
}
