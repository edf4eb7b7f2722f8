//! Property tests for the mutation engine: determinism, disjointness,
//! apply/revert round trips, and order-1 completeness over generated
//! sources.

use std::collections::BTreeMap;

use proptest::prelude::*;

use mutent::mutagen::{
    apply_mutant_to_texts, compose_mutants, enumerate_mutations, OperatorRegistry, SourceUnit,
};

/// Small valid toy-language sources with plenty of mutation sites.
fn toy_source_strategy() -> impl Strategy<Value = String> {
    let expr = prop_oneof![
        Just("a + b".to_string()),
        Just("a - b * 2".to_string()),
        Just("a / 3 + b".to_string()),
        Just("a * a - b".to_string()),
    ];
    let cond = prop_oneof![
        Just("a < b".to_string()),
        Just("a <= 0".to_string()),
        Just("a == b or b > 1".to_string()),
        Just("a != 4 and b >= a".to_string()),
        Just("true".to_string()),
        Just("false or a < 7".to_string()),
    ];
    (expr, cond, 0u8..=60).prop_map(|(expr, cond, pad)| {
        format!(
            "# generated case {pad}\nfn f(a, b) {{\n    if {cond} {{\n        return {expr}\n    }}\n    return {pad}\n}}\n"
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn enumeration_is_deterministic_and_sound(src in toy_source_strategy()) {
        let registry = OperatorRegistry::default_registry();
        let unit = SourceUnit::new("gen.toy", src.clone(), "toy");
        let first = enumerate_mutations(&unit, &registry).unwrap();
        let second = enumerate_mutations(&unit, &registry).unwrap();
        prop_assert_eq!(&first, &second);
        for m in &first {
            prop_assert_eq!(&src[m.span.start..m.span.end], m.original_fragment.as_str());
            prop_assert_ne!(&m.original_fragment, &m.replacement_fragment);
        }
        // sorted by span start and free of (span, replacement) duplicates
        let mut keys: Vec<(usize, usize, &str)> = first
            .iter()
            .map(|m| (m.span.start, m.span.end, m.replacement_fragment.as_str()))
            .collect();
        let original = keys.clone();
        keys.sort();
        keys.dedup();
        prop_assert_eq!(keys.len(), original.len());
    }

    #[test]
    fn apply_then_revert_is_identity(src in toy_source_strategy(), seed in 0u64..1000) {
        let registry = OperatorRegistry::default_registry();
        let unit = SourceUnit::new("gen.toy", src.clone(), "toy");
        let mutations = enumerate_mutations(&unit, &registry).unwrap();
        let mutants = compose_mutants(&mutations, 3, 64, seed);
        let pristine: BTreeMap<String, String> =
            BTreeMap::from([("gen.toy".to_string(), src.clone())]);
        for mutant in &mutants {
            prop_assert!(mutant.spans_disjoint());
            let patched = apply_mutant_to_texts(&pristine, mutant).unwrap();
            prop_assert_ne!(&patched["gen.toy"], &src);
            // reverting = applying the inverse edit set against the patched text
            let inverse = mutent::mutagen::Mutant::from_mutations(
                reversed_edits(mutant, &patched["gen.toy"], &src),
            );
            let restored = apply_mutant_to_texts(&patched, &inverse).unwrap();
            prop_assert_eq!(&restored["gen.toy"], &src);
        }
    }

    #[test]
    fn order_one_composition_is_complete(src in toy_source_strategy()) {
        let registry = OperatorRegistry::default_registry();
        let unit = SourceUnit::new("gen.toy", src, "toy");
        let mutations = enumerate_mutations(&unit, &registry).unwrap();
        let mutants = compose_mutants(&mutations, 1, mutations.len() + 10, 0);
        prop_assert_eq!(mutants.len(), mutations.len());
        prop_assert!(mutants.iter().all(|m| m.order == 1));
        let ids: std::collections::BTreeSet<&String> = mutants.iter().map(|m| &m.id).collect();
        prop_assert_eq!(ids.len(), mutants.len());
    }
}

/// Build the inverse edit list of `mutant` with spans positioned in the
/// patched text (edits applied left to right shift later offsets by the
/// accumulated length delta).
fn reversed_edits(
    mutant: &mutent::mutagen::Mutant,
    _patched: &str,
    _original: &str,
) -> Vec<mutent::mutagen::Mutation> {
    let mut shift: isize = 0;
    let mut sorted = mutant.mutations.clone();
    sorted.sort_by_key(|m| m.span.start);
    sorted
        .into_iter()
        .map(|m| {
            let start = (m.span.start as isize + shift) as usize;
            let end = start + m.replacement_fragment.len();
            shift += m.replacement_fragment.len() as isize - m.span.len() as isize;
            mutent::mutagen::Mutation {
                operator_name: m.operator_name,
                unit_path: m.unit_path,
                span: mutent::mutagen::Span { start, end },
                original_fragment: m.replacement_fragment,
                replacement_fragment: m.original_fragment,
            }
        })
        .collect()
}

#[test]
fn composition_determinism_across_orders() {
    let src = "fn f(a, b) { if a < b and a != 0 { return a + b * 2 } return b - 1 }";
    let registry = OperatorRegistry::default_registry();
    let unit = SourceUnit::new("gen.toy", src, "toy");
    let mutations = enumerate_mutations(&unit, &registry).unwrap();
    for order in 1..=4 {
        for cap in [5, 50, 5000] {
            let a = compose_mutants(&mutations, order, cap, 99);
            let b = compose_mutants(&mutations, order, cap, 99);
            assert_eq!(
                a.iter().map(|m| &m.id).collect::<Vec<_>>(),
                b.iter().map(|m| &m.id).collect::<Vec<_>>()
            );
            assert!(a.len() <= cap);
        }
    }
}
