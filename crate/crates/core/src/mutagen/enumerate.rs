//! Site discovery and mutation enumeration.

use crate::toylang::{lex, TokKind};

use super::operators::{MatchMode, OperatorRegistry, PatternClass};
use super::{MutagenError, Mutation, SourceUnit, Span};

#[derive(Debug, Clone)]
struct Site {
    span: Span,
    text: String,
    class: PatternClass,
}

/// Grammar-mode sites: exact toy-language token classification. A minus is
/// a unary-negation site when nothing value-like precedes it.
fn grammar_sites(unit: &SourceUnit) -> Result<Vec<Site>, MutagenError> {
    let tokens = lex(&unit.text).map_err(|e| MutagenError::UnparsableSource {
        path: unit.path.clone(),
        message: e.to_string(),
    })?;
    let mut sites = Vec::new();
    for (i, tok) in tokens.iter().enumerate() {
        let class = match tok.kind {
            TokKind::Plus | TokKind::Star | TokKind::Slash => {
                Some(PatternClass::BinaryArithmeticOp)
            }
            TokKind::Minus => {
                let binary = i > 0
                    && matches!(
                        tokens[i - 1].kind,
                        TokKind::Ident | TokKind::Int | TokKind::RParen | TokKind::True | TokKind::False
                    );
                Some(if binary {
                    PatternClass::BinaryArithmeticOp
                } else {
                    PatternClass::UnaryNegationSite
                })
            }
            TokKind::Lt | TokKind::Le | TokKind::Gt | TokKind::Ge | TokKind::EqEq | TokKind::Ne => {
                Some(PatternClass::RelationalOp)
            }
            TokKind::True | TokKind::False => Some(PatternClass::BooleanLiteral),
            TokKind::Int => Some(PatternClass::NumericLiteral),
            TokKind::And | TokKind::Or => Some(PatternClass::LogicalConnective),
            _ => None,
        };
        if let Some(class) = class {
            sites.push(Site {
                span: Span {
                    start: tok.start,
                    end: tok.end,
                },
                text: tok.text.clone(),
                class,
            });
        }
    }
    Ok(sites)
}

const OPERATOR_CHARS: &[u8] = b"+-*/<>=!";

/// Token-level sites over arbitrary text. Words and digit runs are matched
/// at word boundaries; operator characters are consumed as maximal runs and
/// only exact matches of known operators become sites, so compound tokens
/// like `+=` or `++` never match. Comments and string literals are scanned
/// like everything else.
fn token_sites(text: &str) -> Vec<Site> {
    let bytes = text.as_bytes();
    let mut sites = Vec::new();
    let mut i = 0;
    let is_word = |b: u8| b.is_ascii_alphanumeric() || b == b'_';
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_alphabetic() || c == b'_' {
            let start = i;
            while i < bytes.len() && is_word(bytes[i]) {
                i += 1;
            }
            let word = &text[start..i];
            let class = match word {
                "true" | "false" => Some(PatternClass::BooleanLiteral),
                "and" | "or" => Some(PatternClass::LogicalConnective),
                _ => None,
            };
            if let Some(class) = class {
                sites.push(Site {
                    span: Span { start, end: i },
                    text: word.to_string(),
                    class,
                });
            }
        } else if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            // skip digit runs glued to a word tail: `x1`, `3px`
            let boundary_after = i >= bytes.len() || !is_word(bytes[i]);
            if boundary_after {
                sites.push(Site {
                    span: Span { start, end: i },
                    text: text[start..i].to_string(),
                    class: PatternClass::NumericLiteral,
                });
            }
        } else if OPERATOR_CHARS.contains(&c) {
            let start = i;
            while i < bytes.len() && OPERATOR_CHARS.contains(&bytes[i]) {
                i += 1;
            }
            let run = &text[start..i];
            let class = match run {
                "+" | "-" | "*" | "/" => Some(PatternClass::BinaryArithmeticOp),
                "<" | "<=" | ">" | ">=" | "==" | "!=" => Some(PatternClass::RelationalOp),
                _ => None,
            };
            if let Some(class) = class {
                sites.push(Site {
                    span: Span { start, end: i },
                    text: run.to_string(),
                    class,
                });
            }
        } else {
            i += 1;
        }
    }
    sites
}

/// Enumerate every single-site mutation of `unit` under `registry`.
///
/// Deterministic: sorted by (span start, operator name, replacement) with
/// duplicates (same span, same replacement) removed.
pub fn enumerate_mutations(
    unit: &SourceUnit,
    registry: &OperatorRegistry,
) -> Result<Vec<Mutation>, MutagenError> {
    let sites = match registry.mode_for(&unit.language_tag)? {
        MatchMode::Grammar => grammar_sites(unit)?,
        MatchMode::Token => token_sites(&unit.text),
    };
    let mut mutations = Vec::new();
    for site in &sites {
        for op in registry.operators_for(site.class) {
            if let Some(replacement) = op.rule.apply(&site.text) {
                debug_assert_ne!(replacement, site.text, "self-map from operator {}", op.name);
                mutations.push(Mutation {
                    operator_name: op.name.clone(),
                    unit_path: unit.path.clone(),
                    span: site.span,
                    original_fragment: site.text.clone(),
                    replacement_fragment: replacement,
                });
            }
        }
    }
    mutations.sort_by(|a, b| {
        (a.span.start, &a.operator_name, &a.replacement_fragment).cmp(&(
            b.span.start,
            &b.operator_name,
            &b.replacement_fragment,
        ))
    });
    mutations.dedup_by(|a, b| a.span == b.span && a.replacement_fragment == b.replacement_fragment);
    Ok(mutations)
}
