//! Mutant composition: all order-1 mutants first, then seeded sampling of
//! disjoint higher-order combinations up to a cap.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Mutant, Mutation};

/// Combination counts above this are sampled by rejection instead of being
/// enumerated and shuffled.
const ENUM_LIMIT: u128 = 100_000;

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut result: u128 = 1;
    for i in 0..k {
        result = result.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    result
}

fn combo_disjoint(mutations: &[Mutation], combo: &[usize]) -> bool {
    for (pos, &i) in combo.iter().enumerate() {
        for &j in &combo[pos + 1..] {
            let (a, b) = (&mutations[i], &mutations[j]);
            if a.unit_path == b.unit_path && !a.span.disjoint(&b.span) {
                return false;
            }
        }
    }
    true
}

fn mutant_from_combo(mutations: &[Mutation], combo: &[usize]) -> Mutant {
    Mutant::from_mutations(combo.iter().map(|&i| mutations[i].clone()).collect())
}

/// Lexicographic k-combinations of 0..n.
fn for_each_combination(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k == 0 || k > n {
        return;
    }
    let mut combo: Vec<usize> = (0..k).collect();
    loop {
        f(&combo);
        // advance
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if combo[i] != i + n - k {
                break;
            }
            if i == 0 {
                return;
            }
        }
        combo[i] += 1;
        for j in i + 1..k {
            combo[j] = combo[j - 1] + 1;
        }
    }
}

/// Compose mutants from the enumerated mutation list.
///
/// Order-1 mutants are exhaustive whenever they fit under `cap`. Each higher
/// order fills the remaining quota with uniformly sampled disjoint-span
/// combinations; everything is deterministic in (mutations, max_order, cap,
/// seed), and ids are unique.
pub fn compose_mutants(
    mutations: &[Mutation],
    max_order: usize,
    cap: usize,
    seed: u64,
) -> Vec<Mutant> {
    assert!(max_order >= 1, "max_order must be at least 1");
    assert!(cap >= 1, "cap must be at least 1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mutants: Vec<Mutant> = Vec::new();
    let mut seen = std::collections::BTreeSet::new();

    for m in mutations {
        if mutants.len() >= cap {
            break;
        }
        let mutant = Mutant::from_mutations(vec![m.clone()]);
        if seen.insert(mutant.id.clone()) {
            mutants.push(mutant);
        }
    }

    let n = mutations.len();
    for order in 2..=max_order {
        if mutants.len() >= cap {
            break;
        }
        let quota = cap - mutants.len();
        if binomial(n, order) <= ENUM_LIMIT {
            let mut candidates: Vec<Mutant> = Vec::new();
            for_each_combination(n, order, |combo| {
                if combo_disjoint(mutations, combo) {
                    let mutant = mutant_from_combo(mutations, combo);
                    if !seen.contains(&mutant.id) {
                        candidates.push(mutant);
                    }
                }
            });
            candidates.sort_by(|a, b| a.id.cmp(&b.id));
            candidates.dedup_by(|a, b| a.id == b.id);
            if candidates.len() > quota {
                candidates.shuffle(&mut rng);
                candidates.truncate(quota);
                candidates.sort_by(|a, b| a.id.cmp(&b.id));
            }
            for mutant in candidates {
                seen.insert(mutant.id.clone());
                mutants.push(mutant);
            }
        } else {
            // Rejection sampling with a bounded attempt budget; the space is
            // so large here that duplicates and overlap rejections are rare.
            let budget = (quota as u64).saturating_mul(200).max(10_000);
            let mut accepted = Vec::with_capacity(quota);
            let mut attempts = 0;
            while accepted.len() < quota && attempts < budget {
                attempts += 1;
                let mut combo = std::collections::BTreeSet::new();
                while combo.len() < order {
                    combo.insert(rng.random_range(0..n));
                }
                let combo: Vec<usize> = combo.into_iter().collect();
                if !combo_disjoint(mutations, &combo) {
                    continue;
                }
                let mutant = mutant_from_combo(mutations, &combo);
                if seen.insert(mutant.id.clone()) {
                    accepted.push(mutant);
                }
            }
            accepted.sort_by(|a, b| a.id.cmp(&b.id));
            mutants.extend(accepted);
        }
    }
    mutants
}
