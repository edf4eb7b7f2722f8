//! Entropy metrics over survivor counts, kill matrices, and probability
//! tables.
//!
//! Everything here is a pure function. The central quantity is the survivor
//! log-count S = log W: the equiprobable upper bound on how much information
//! the implementation still carries given the constraints the test subset
//! enforces. Refining the subset can only shrink W, so S falls; the drop
//! between two nested subsets is the entropy loss ΔS = log W₁ − log W₂.
//!
//! W = 0 is a distinguished "fully constrained locally" state, never −∞:
//! survivor-free points carry a marker instead of a value so downstream
//! arithmetic cannot silently propagate infinities.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::{KillMatrix, MatrixError};

/// Log units: natural log (nats, default) or base 2 (bits).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogBase {
    #[default]
    E,
    Two,
}

impl LogBase {
    pub fn log(self, x: f64) -> f64 {
        match self {
            LogBase::E => x.ln(),
            LogBase::Two => x.log2(),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            LogBase::E => "e",
            LogBase::Two => "2",
        }
    }
}

/// A nonnegative entropy (or entropy difference) in a declared unit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyValue {
    pub value: f64,
    pub log_base: LogBase,
}

#[derive(Debug, Error)]
pub enum EntropyError {
    #[error("zero survivors: entropy undefined, subset is fully constrained locally")]
    ZeroSurvivors,
    #[error("survivor count grew from {from} to {to} under a larger test set; upstream nondeterminism")]
    OrderViolation { from: u64, to: u64 },
    #[error("information weights undefined: no mutant counted for any test")]
    UndefinedWeights,
    #[error("all fuzzy weights are zero: no program carries mass")]
    AllZeroWeight,
    #[error("entry ({row}, {col}) = {value} is not a probability in [0, 1]")]
    InvalidProbability { row: usize, col: usize, value: f64 },
    #[error("coverage missing for {} tests (first: {})", .0.len(), .0[0])]
    MissingCoverage(Vec<String>),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

/// S = log W. Errors with `ZeroSurvivors` when W = 0.
pub fn entropy_upper_bound(w: u64, base: LogBase) -> Result<EntropyValue, EntropyError> {
    if w == 0 {
        return Err(EntropyError::ZeroSurvivors);
    }
    Ok(EntropyValue {
        value: base.log(w as f64),
        log_base: base,
    })
}

/// ΔS = log W₁ − log W₂ = −log ρ for nested subsets with survivor counts
/// W₁ ≥ W₂ ≥ 1.
pub fn entropy_loss(w1: u64, w2: u64, base: LogBase) -> Result<EntropyValue, EntropyError> {
    if w2 > w1 {
        return Err(EntropyError::OrderViolation { from: w1, to: w2 });
    }
    if w2 == 0 {
        return Err(EntropyError::ZeroSurvivors);
    }
    Ok(EntropyValue {
        value: base.log(w1 as f64) - base.log(w2 as f64),
        log_base: base,
    })
}

/// Which per-test kill set the weights were computed from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightVariant {
    /// K_i: mutants killed only by t_i.
    Unique,
    /// K'_i: mutants killed by t_i when run alone.
    RunAlone,
}

impl WeightVariant {
    pub fn as_str(self) -> &'static str {
        match self {
            WeightVariant::Unique => "unique",
            WeightVariant::RunAlone => "run_alone",
        }
    }
}

/// Information weights α_i = |K_i| / Σ|K_j| plus their inputs.
///
/// When Σ|K_j| = 0 the profile is undefined; no uniform fallback is
/// fabricated. `alphas` is `None` and reports must say so.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightProfile {
    pub k_sizes: Vec<u64>,
    pub alphas: Option<Vec<f64>>,
    pub variant: WeightVariant,
}

pub fn information_weights(k_sizes: &[u64], variant: WeightVariant) -> WeightProfile {
    let total: u64 = k_sizes.iter().sum();
    let alphas = if total == 0 {
        None
    } else {
        Some(
            k_sizes
                .iter()
                .map(|&k| k as f64 / total as f64)
                .collect(),
        )
    };
    WeightProfile {
        k_sizes: k_sizes.to_vec(),
        alphas,
        variant,
    }
}

/// MTI₁: fraction of tests with a nonempty kill set.
pub fn mti1(k_sizes: &[u64]) -> f64 {
    assert!(!k_sizes.is_empty(), "mti1 needs at least one test");
    k_sizes.iter().filter(|&&k| k > 0).count() as f64 / k_sizes.len() as f64
}

/// MTI₂: Shannon entropy of the weight profile normalized by log m,
/// in [0, 1]. Base-independent (a ratio of logs).
///
/// Conventions: 0·log 0 = 0; m = 1 yields 1 (the single constraint carries
/// all weight, trivially even); an exactly uniform profile yields exactly
/// 1.0 rather than 1 ± rounding.
pub fn mti2(profile: &WeightProfile) -> Result<f64, EntropyError> {
    let alphas = profile.alphas.as_ref().ok_or(EntropyError::UndefinedWeights)?;
    let m = alphas.len();
    if m == 1 {
        return Ok(1.0);
    }
    let first = profile.k_sizes[0];
    if first > 0 && profile.k_sizes.iter().all(|&k| k == first) {
        return Ok(1.0);
    }
    let numerator: f64 = alphas
        .iter()
        .map(|&a| if a > 0.0 { -a * a.ln() } else { 0.0 })
        .sum();
    Ok((numerator / (m as f64).ln()).clamp(0.0, 1.0))
}

/// Local entropy density: full-suite entropy loss per character of source.
pub fn sed_local(w0: u64, wm: u64, l_code: u64, base: LogBase) -> Result<EntropyValue, EntropyError> {
    assert!(l_code >= 1, "sed_local needs a positive code length");
    let loss = entropy_loss(w0, wm, base)?;
    Ok(EntropyValue {
        value: loss.value / l_code as f64,
        log_base: base,
    })
}

/// One point of an entropy curve over nested test prefixes.
///
/// `s_*` are `None` exactly when the corresponding count is zero: the
/// distinguished zero-survivor marker.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub index: usize,
    pub w_lower: u64,
    pub w_upper: u64,
    pub s_lower: Option<f64>,
    pub s_point: Option<f64>,
    pub s_upper: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct EntropyCurve {
    pub points: Vec<CurvePoint>,
    pub ordering: Vec<String>,
    pub log_base: LogBase,
}

/// Entropy curve over the prefixes of `ordering`: point i uses the first i
/// tests, from i = 0 (empty suite) to i = m.
pub fn entropy_curve(
    matrix: &KillMatrix,
    ordering: &[String],
    base: LogBase,
) -> Result<EntropyCurve, EntropyError> {
    matrix.check_ordering(ordering)?;
    let mut points = Vec::with_capacity(ordering.len() + 1);
    for i in 0..=ordering.len() {
        let survivors = matrix.survivors(&ordering[..i])?;
        let w_lower = survivors.w_lower();
        let w_upper = survivors.w_upper();
        let log_of = |w: u64| (w >= 1).then(|| base.log(w as f64));
        points.push(CurvePoint {
            index: i,
            w_lower,
            w_upper,
            s_lower: log_of(w_lower),
            s_point: log_of(w_lower),
            s_upper: log_of(w_upper),
        });
    }
    Ok(EntropyCurve {
        points,
        ordering: ordering.to_vec(),
        log_base: base,
    })
}

/// Mutation score with a timeout-uncertainty interval.
///
/// `lower` counts only confirmed kills; `upper` additionally counts the
/// timeout-unresolved mutants as killed. The plain score is `lower`.
#[derive(Debug, Clone, PartialEq)]
pub struct MutationScore {
    pub total: usize,
    pub killed: usize,
    pub timeout_unresolved: usize,
    pub lower: f64,
    pub upper: f64,
}

pub fn mutation_score(matrix: &KillMatrix) -> Result<MutationScore, EntropyError> {
    let all: Vec<String> = matrix.tests().to_vec();
    let survivors = matrix.survivors(&all)?;
    let total = matrix.mutants().len();
    assert!(total > 0, "mutation score needs at least one mutant");
    let confirmed = survivors.confirmed.len();
    let uncertain = survivors.uncertain.len();
    let killed = total - confirmed - uncertain;
    Ok(MutationScore {
        total,
        killed,
        timeout_unresolved: uncertain,
        lower: killed as f64 / total as f64,
        upper: (killed + uncertain) as f64 / total as f64,
    })
}

/// Gibbs–Shannon entropy of a fuzzy macrostate.
///
/// `table[p][i]` is the probability that program p satisfies property i.
/// Program weights multiply across properties, normalize to ν, and
/// S[ν] = −Σ ν log ν. A {0,1} table reduces to log(survivor count).
pub fn fuzzy_entropy(table: &[Vec<f64>], base: LogBase) -> Result<EntropyValue, EntropyError> {
    for (row, probs) in table.iter().enumerate() {
        for (col, &p) in probs.iter().enumerate() {
            if !(0.0..=1.0).contains(&p) || p.is_nan() {
                return Err(EntropyError::InvalidProbability { row, col, value: p });
            }
        }
    }
    let weights: Vec<f64> = table
        .iter()
        .map(|probs| probs.iter().product::<f64>())
        .collect();
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(EntropyError::AllZeroWeight);
    }
    let value = weights
        .iter()
        .filter(|&&w| w > 0.0)
        .map(|&w| {
            let nu = w / total;
            -nu * base.log(nu)
        })
        .sum();
    Ok(EntropyValue {
        value,
        log_base: base,
    })
}

/// One row of the coverage-versus-weight report.
#[derive(Debug, Clone, Serialize)]
pub struct ContrastRow {
    pub test_id: String,
    pub k_size: u64,
    pub alpha: Option<f64>,
    pub coverage: f64,
    /// Coverage at or above the suite median while α is far below the
    /// uniform share, the case coverage alone cannot see.
    pub flagged: bool,
}

/// Pair per-test information weights with coverage fractions, sorted by α
/// descending. Flags tests whose coverage looks strong while their unique
/// constraint power is weak.
pub fn coverage_contrast(
    profile: &WeightProfile,
    test_ids: &[String],
    coverage: &std::collections::BTreeMap<String, f64>,
) -> Result<Vec<ContrastRow>, EntropyError> {
    assert_eq!(profile.k_sizes.len(), test_ids.len());
    let missing: Vec<String> = test_ids
        .iter()
        .filter(|t| !coverage.contains_key(*t))
        .cloned()
        .collect();
    if !missing.is_empty() {
        return Err(EntropyError::MissingCoverage(missing));
    }
    let m = test_ids.len();
    let fractions: Vec<f64> = test_ids.iter().map(|t| coverage[t]).collect();
    let median = {
        let mut sorted = fractions.clone();
        sorted.sort_by(|a, b| a.total_cmp(b));
        sorted[(sorted.len() - 1) / 2]
    };
    let low_alpha = 0.5 / m as f64;
    let mut rows: Vec<ContrastRow> = Vec::with_capacity(m);
    for (i, t) in test_ids.iter().enumerate() {
        let alpha = profile.alphas.as_ref().map(|a| a[i]);
        let flagged = fractions[i] >= median && alpha.map(|a| a < low_alpha).unwrap_or(false);
        rows.push(ContrastRow {
            test_id: t.clone(),
            k_size: profile.k_sizes[i],
            alpha,
            coverage: fractions[i],
            flagged,
        });
    }
    rows.sort_by(|a, b| match (b.alpha, a.alpha) {
        (Some(x), Some(y)) => x.total_cmp(&y).then(a.test_id.cmp(&b.test_id)),
        _ => a.test_id.cmp(&b.test_id),
    });
    Ok(rows)
}
