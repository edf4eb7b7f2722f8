//! Mutation operators and the loadable operator registry.
//!
//! The default set sticks to standard first-order operators: arithmetic and
//! relational swaps, boolean literal flips, numeric literal perturbation,
//! and logical-connective swaps. New language tags and operator tables load
//! from a JSON registry file without code changes.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::MutagenError;

/// Syntactic category a site can belong to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PatternClass {
    #[serde(rename = "binary-arithmetic-op")]
    BinaryArithmeticOp,
    #[serde(rename = "relational-op")]
    RelationalOp,
    #[serde(rename = "boolean-literal")]
    BooleanLiteral,
    #[serde(rename = "numeric-literal")]
    NumericLiteral,
    #[serde(rename = "unary-negation-site")]
    UnaryNegationSite,
    #[serde(rename = "logical-connective")]
    LogicalConnective,
}

/// Deterministic fragment-to-fragment mapping. Never maps a fragment to
/// itself; rules that would (numeric zero on "0") skip the site instead.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReplacementRule {
    Table { map: BTreeMap<String, String> },
    NumericIncrement,
    NumericZero,
    /// Drop the matched fragment (e.g. removing a unary minus).
    Delete,
}

impl ReplacementRule {
    pub fn apply(&self, fragment: &str) -> Option<String> {
        match self {
            ReplacementRule::Table { map } => map.get(fragment).cloned(),
            ReplacementRule::NumericIncrement => {
                let value: u128 = fragment.parse().ok()?;
                let next = value.checked_add(1)?;
                Some(next.to_string())
            }
            ReplacementRule::NumericZero => {
                let value: u128 = fragment.parse().ok()?;
                if value == 0 {
                    None // self-map
                } else {
                    Some("0".to_string())
                }
            }
            ReplacementRule::Delete => {
                if fragment.is_empty() {
                    None
                } else {
                    Some(String::new())
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MutationOperator {
    pub name: String,
    pub pattern_class: PatternClass,
    pub rule: ReplacementRule,
}

/// How sites are found for a given language tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchMode {
    /// Exact token classification via the bundled toy-language lexer;
    /// comments never produce sites.
    Grammar,
    /// Word-boundary-safe generic scanner; may match inside comments and
    /// string literals.
    Token,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OperatorRegistry {
    pub language_tags: BTreeMap<String, MatchMode>,
    pub operators: Vec<MutationOperator>,
}

impl OperatorRegistry {
    /// The built-in operator set and language tags.
    pub fn default_registry() -> OperatorRegistry {
        let table = |pairs: &[(&str, &str)]| ReplacementRule::Table {
            map: pairs
                .iter()
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect(),
        };
        let operators = vec![
            MutationOperator {
                name: "arith-swap".into(),
                pattern_class: PatternClass::BinaryArithmeticOp,
                rule: table(&[("+", "-"), ("-", "+"), ("*", "/"), ("/", "*")]),
            },
            MutationOperator {
                name: "rel-swap".into(),
                pattern_class: PatternClass::RelationalOp,
                rule: table(&[
                    ("<", "<="),
                    ("<=", "<"),
                    (">", ">="),
                    (">=", ">"),
                    ("==", "!="),
                    ("!=", "=="),
                ]),
            },
            MutationOperator {
                name: "bool-flip".into(),
                pattern_class: PatternClass::BooleanLiteral,
                rule: table(&[("true", "false"), ("false", "true")]),
            },
            MutationOperator {
                name: "num-increment".into(),
                pattern_class: PatternClass::NumericLiteral,
                rule: ReplacementRule::NumericIncrement,
            },
            MutationOperator {
                name: "num-zero".into(),
                pattern_class: PatternClass::NumericLiteral,
                rule: ReplacementRule::NumericZero,
            },
            MutationOperator {
                name: "logic-swap".into(),
                pattern_class: PatternClass::LogicalConnective,
                rule: table(&[("and", "or"), ("or", "and")]),
            },
        ];
        let mut language_tags = BTreeMap::new();
        language_tags.insert("toy".to_string(), MatchMode::Grammar);
        language_tags.insert("text".to_string(), MatchMode::Token);
        OperatorRegistry {
            language_tags,
            operators,
        }
    }

    pub fn from_json_str(json: &str) -> Result<OperatorRegistry, MutagenError> {
        let registry: OperatorRegistry = serde_json::from_str(json)
            .map_err(|e| MutagenError::InvalidRegistry(e.to_string()))?;
        registry.validate()?;
        Ok(registry)
    }

    pub fn validate(&self) -> Result<(), MutagenError> {
        let mut names = std::collections::BTreeSet::new();
        for op in &self.operators {
            if !names.insert(&op.name) {
                return Err(MutagenError::InvalidRegistry(format!(
                    "duplicate operator name `{}`",
                    op.name
                )));
            }
            if let ReplacementRule::Table { map } = &op.rule {
                if map.is_empty() {
                    return Err(MutagenError::InvalidRegistry(format!(
                        "operator `{}` has an empty table",
                        op.name
                    )));
                }
                for (k, v) in map {
                    if k == v {
                        return Err(MutagenError::InvalidRegistry(format!(
                            "operator `{}` maps `{k}` to itself",
                            op.name
                        )));
                    }
                }
            }
        }
        if self.language_tags.is_empty() {
            return Err(MutagenError::InvalidRegistry(
                "no language tags declared".to_string(),
            ));
        }
        Ok(())
    }

    pub fn mode_for(&self, language_tag: &str) -> Result<MatchMode, MutagenError> {
        self.language_tags
            .get(language_tag)
            .copied()
            .ok_or_else(|| MutagenError::UnknownLanguageTag(language_tag.to_string()))
    }

    pub fn operators_for(&self, class: PatternClass) -> impl Iterator<Item = &MutationOperator> {
        self.operators
            .iter()
            .filter(move |op| op.pattern_class == class)
    }
}

impl Default for OperatorRegistry {
    fn default() -> Self {
        Self::default_registry()
    }
}
