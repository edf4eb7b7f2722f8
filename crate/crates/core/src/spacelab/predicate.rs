//! Declarative predicate and labeling rules over toy programs.
//!
//! Rules are total by construction (the machine halts on every input), which
//! is exactly what lets this module serve as a decidable miniature of the
//! real, undecidable feasible-set membership problem.

use serde::{Deserialize, Serialize};

use super::machine;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PredicateRule {
    ResultEquals { value: i64 },
    ResultAtLeast { value: i64 },
    ResultEven,
    ResultOdd,
    FirstSymbol { symbol: u8 },
    LastSymbol { symbol: u8 },
    ContainsSymbol { symbol: u8 },
    MaxDepthAtMost { depth: usize },
    FinalDepthEquals { depth: usize },
    Tautology,
    Contradiction,
}

impl PredicateRule {
    pub fn eval(&self, program: &[u8]) -> bool {
        match self {
            PredicateRule::ResultEquals { value } => machine::run(program).result == *value,
            PredicateRule::ResultAtLeast { value } => machine::run(program).result >= *value,
            PredicateRule::ResultEven => machine::run(program).result % 2 == 0,
            PredicateRule::ResultOdd => machine::run(program).result % 2 != 0,
            PredicateRule::FirstSymbol { symbol } => program.first() == Some(symbol),
            PredicateRule::LastSymbol { symbol } => program.last() == Some(symbol),
            PredicateRule::ContainsSymbol { symbol } => program.contains(symbol),
            PredicateRule::MaxDepthAtMost { depth } => machine::run(program).max_depth <= *depth,
            PredicateRule::FinalDepthEquals { depth } => {
                machine::run(program).final_depth == *depth
            }
            PredicateRule::Tautology => true,
            PredicateRule::Contradiction => false,
        }
    }
}

/// A named total boolean property; the lab analogue of one test.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SemanticPredicate {
    pub name: String,
    pub rule: PredicateRule,
}

impl SemanticPredicate {
    pub fn new(name: impl Into<String>, rule: PredicateRule) -> Self {
        SemanticPredicate {
            name: name.into(),
            rule,
        }
    }

    pub fn eval(&self, program: &[u8]) -> bool {
        self.rule.eval(program)
    }
}

/// Splits the feasible set into benign and harmful microstates: benign iff
/// the rule holds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionLabeling {
    pub benign_rule: PredicateRule,
}

impl PartitionLabeling {
    pub fn is_benign(&self, program: &[u8]) -> bool {
        self.benign_rule.eval(program)
    }
}
