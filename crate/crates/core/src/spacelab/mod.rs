//! Exact brute-force oracle over tiny program spaces.
//!
//! The universe is the lattice of all length-L strings over an alphabet of N
//! symbols; an optional syntactic rule carves out the valid subset, semantic
//! predicates carve out the feasible subset, and every entropy quantity the
//! estimation pipeline approximates is computed here exactly by direct
//! enumeration. Diverges from real program spaces in one deliberate way:
//! every predicate is total, so membership is decidable.

pub mod machine;
mod predicate;

pub use machine::MachineOutcome;
pub use predicate::{PartitionLabeling, PredicateRule, SemanticPredicate};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::entropy::LogBase;

pub const DEFAULT_ENUMERATION_CAP: u64 = 10_000_000;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProgramSpace {
    /// String length L; every program has exactly this many symbols.
    pub length: usize,
    /// Alphabet size N; symbols take values 1..=N.
    pub alphabet: u8,
    /// Membership rule for the syntactically valid subset, when any.
    pub syntactic: Option<PredicateRule>,
    /// Refuse to enumerate universes larger than this.
    #[serde(default = "default_cap")]
    pub cap: u64,
}

fn default_cap() -> u64 {
    DEFAULT_ENUMERATION_CAP
}

#[derive(Debug, Error)]
pub enum SpaceError {
    #[error("universe has {size} points, above the cap of {cap}")]
    UniverseTooLarge { size: u128, cap: u64 },
    #[error("distribution sums to {sum}, not 1")]
    NotNormalized { sum: f64 },
    #[error("distribution has {got} entries for {expected} programs")]
    LengthMismatch { expected: usize, got: usize },
    #[error("feasible set is empty")]
    EmptyFeasibleSet,
    #[error("alphabet size must be at least 1")]
    EmptyAlphabet,
}

impl ProgramSpace {
    pub fn new(length: usize, alphabet: u8) -> ProgramSpace {
        ProgramSpace {
            length,
            alphabet,
            syntactic: None,
            cap: DEFAULT_ENUMERATION_CAP,
        }
    }

    pub fn universe_size(&self) -> u128 {
        (self.alphabet as u128).pow(self.length as u32)
    }

    fn check_cap(&self) -> Result<(), SpaceError> {
        if self.alphabet == 0 {
            return Err(SpaceError::EmptyAlphabet);
        }
        let size = self.universe_size();
        if size > self.cap as u128 {
            return Err(SpaceError::UniverseTooLarge {
                size,
                cap: self.cap,
            });
        }
        Ok(())
    }

    /// Visit every lattice point in lexicographic order.
    fn for_each_program(&self, mut f: impl FnMut(&[u8])) {
        let mut program = vec![1u8; self.length];
        if self.length == 0 {
            f(&program);
            return;
        }
        loop {
            f(&program);
            // odometer increment
            let mut i = self.length;
            loop {
                if i == 0 {
                    return;
                }
                i -= 1;
                if program[i] < self.alphabet {
                    program[i] += 1;
                    for slot in program.iter_mut().skip(i + 1) {
                        *slot = 1;
                    }
                    break;
                }
                if i == 0 {
                    return;
                }
            }
        }
    }

    fn in_valid_subset(&self, program: &[u8]) -> bool {
        self.syntactic
            .as_ref()
            .map(|rule| rule.eval(program))
            .unwrap_or(true)
    }
}

/// One point of the lattice: a symbol string with values in 1..=N.
pub type Program = Vec<u8>;

/// Count (and optionally materialize) the programs in the valid subset that
/// satisfy every predicate.
pub fn enumerate_feasible(
    space: &ProgramSpace,
    predicates: &[SemanticPredicate],
    materialize: bool,
) -> Result<(u64, Option<Vec<Program>>), SpaceError> {
    space.check_cap()?;
    let mut count = 0u64;
    let mut collected = materialize.then(Vec::new);
    space.for_each_program(|program| {
        if !space.in_valid_subset(program) {
            return;
        }
        if predicates.iter().all(|p| p.eval(program)) {
            count += 1;
            if let Some(collected) = collected.as_mut() {
                collected.push(program.to_vec());
            }
        }
    });
    Ok((count, collected))
}

/// Probability distribution over a materialized feasible set.
#[derive(Debug, Clone)]
pub enum Distribution {
    Uniform,
    Explicit(Vec<f64>),
}

const NORMALIZATION_TOL: f64 = 1e-12;

/// Exact information entropy H = −Σ μ(p) log μ(p) over the feasible set.
///
/// The uniform case is computed as the literal sum, not short-circuited to
/// log W: agreement of the two routes is exactly what the oracle suite
/// checks.
pub fn exact_entropy(
    feasible_count: u64,
    distribution: &Distribution,
    base: LogBase,
) -> Result<f64, SpaceError> {
    if feasible_count == 0 {
        return Err(SpaceError::EmptyFeasibleSet);
    }
    match distribution {
        Distribution::Uniform => {
            let mu = 1.0 / feasible_count as f64;
            let term = -mu * base.log(mu);
            Ok((0..feasible_count).map(|_| term).sum())
        }
        Distribution::Explicit(table) => {
            if table.len() != feasible_count as usize {
                return Err(SpaceError::LengthMismatch {
                    expected: feasible_count as usize,
                    got: table.len(),
                });
            }
            let sum: f64 = table.iter().sum();
            if (sum - 1.0).abs() > NORMALIZATION_TOL {
                return Err(SpaceError::NotNormalized { sum });
            }
            Ok(table
                .iter()
                .filter(|&&mu| mu > 0.0)
                .map(|&mu| -mu * base.log(mu))
                .sum())
        }
    }
}

/// Fraction of feasible microstates the labeling calls benign: f = W₊ / W.
pub fn defect_fraction(
    feasible: &[Program],
    labeling: &PartitionLabeling,
) -> Result<f64, SpaceError> {
    if feasible.is_empty() {
        return Err(SpaceError::EmptyFeasibleSet);
    }
    let benign = feasible
        .iter()
        .filter(|p| labeling.is_benign(p))
        .count();
    Ok(benign as f64 / feasible.len() as f64)
}

/// One refinement step of an exact trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryStep {
    /// Number of predicates applied (0 = just the valid subset).
    pub index: usize,
    pub w: u64,
    /// `None` marks the zero-survivor state.
    pub s: Option<f64>,
    /// Entropy lost relative to the previous step; `None` at step 0 or when
    /// either endpoint has no survivors.
    pub delta_s: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub steps: Vec<TrajectoryStep>,
    pub log_base: LogBase,
}

/// Apply predicates cumulatively and record the exact (W_j, S_j, ΔS) series.
/// W is non-increasing by construction; every ΔS is nonnegative.
pub fn nested_entropy_trajectory(
    space: &ProgramSpace,
    predicates: &[SemanticPredicate],
    base: LogBase,
) -> Result<Trajectory, SpaceError> {
    space.check_cap()?;
    let mut steps = Vec::with_capacity(predicates.len() + 1);
    let mut previous_s: Option<f64> = None;
    for j in 0..=predicates.len() {
        let (w, _) = enumerate_feasible(space, &predicates[..j], false)?;
        let s = (w >= 1).then(|| base.log(w as f64));
        let delta_s = match (j, previous_s, s) {
            (0, _, _) => None,
            (_, Some(prev), Some(curr)) => Some(prev - curr),
            _ => None,
        };
        steps.push(TrajectoryStep {
            index: j,
            w,
            s,
            delta_s,
        });
        previous_s = s;
    }
    Ok(Trajectory {
        steps,
        log_base: base,
    })
}

/// Declarative lab-space definition, loadable from a JSON file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpaceConfig {
    pub length: usize,
    pub alphabet: u8,
    #[serde(default)]
    pub syntactic: Option<PredicateRule>,
    pub predicates: Vec<SemanticPredicate>,
    #[serde(default)]
    pub labeling: Option<PartitionLabeling>,
    /// Optional explicit distribution over the feasible set of the full
    /// predicate sequence.
    #[serde(default)]
    pub mu: Option<Vec<f64>>,
    #[serde(default = "default_cap")]
    pub cap: u64,
}

impl SpaceConfig {
    pub fn space(&self) -> ProgramSpace {
        ProgramSpace {
            length: self.length,
            alphabet: self.alphabet,
            syntactic: self.syntactic.clone(),
            cap: self.cap,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-12;

    #[test]
    fn full_lattice_count() {
        let space = ProgramSpace::new(2, 3);
        let (w, _) = enumerate_feasible(&space, &[], false).unwrap();
        assert_eq!(w, 9);
    }

    #[test]
    fn first_symbol_filter() {
        let space = ProgramSpace::new(2, 3);
        let predicates = [SemanticPredicate::new(
            "starts_with_1",
            PredicateRule::FirstSymbol { symbol: 1 },
        )];
        let (w, programs) = enumerate_feasible(&space, &predicates, true).unwrap();
        assert_eq!(w, 3);
        assert_eq!(programs.unwrap().len(), 3);
    }

    #[test]
    fn cap_is_enforced() {
        let mut space = ProgramSpace::new(10, 10);
        space.cap = 1000;
        assert!(matches!(
            enumerate_feasible(&space, &[], false),
            Err(SpaceError::UniverseTooLarge { .. })
        ));
    }

    #[test]
    fn singleton_entropy_is_zero() {
        assert_eq!(
            exact_entropy(1, &Distribution::Uniform, LogBase::E).unwrap(),
            0.0
        );
    }

    #[test]
    fn uniform_16_is_4_bits() {
        let h = exact_entropy(16, &Distribution::Uniform, LogBase::Two).unwrap();
        assert!((h - 4.0).abs() < TOL);
    }

    #[test]
    fn explicit_half_half_is_one_bit() {
        let h = exact_entropy(2, &Distribution::Explicit(vec![0.5, 0.5]), LogBase::Two).unwrap();
        assert!((h - 1.0).abs() < TOL);
    }

    #[test]
    fn explicit_must_normalize() {
        assert!(matches!(
            exact_entropy(2, &Distribution::Explicit(vec![0.6, 0.6]), LogBase::E),
            Err(SpaceError::NotNormalized { .. })
        ));
        assert!(matches!(
            exact_entropy(3, &Distribution::Explicit(vec![0.5, 0.5]), LogBase::E),
            Err(SpaceError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn defect_fraction_counts() {
        let feasible: Vec<Vec<u8>> = (1..=10u8).map(|i| vec![i]).collect();
        // benign = result >= 1 → push1/push2 only (symbols 1, 2)
        let labeling = PartitionLabeling {
            benign_rule: PredicateRule::ResultAtLeast { value: 1 },
        };
        let f = defect_fraction(&feasible, &labeling).unwrap();
        assert!((f - 0.2).abs() < TOL);
        let all_benign = PartitionLabeling {
            benign_rule: PredicateRule::Tautology,
        };
        assert_eq!(defect_fraction(&feasible, &all_benign).unwrap(), 1.0);
        let none_benign = PartitionLabeling {
            benign_rule: PredicateRule::Contradiction,
        };
        assert_eq!(defect_fraction(&feasible, &none_benign).unwrap(), 0.0);
        assert!(matches!(
            defect_fraction(&[], &all_benign),
            Err(SpaceError::EmptyFeasibleSet)
        ));
    }

    #[test]
    fn tautology_step_loses_nothing() {
        let space = ProgramSpace::new(3, 3);
        let predicates = [
            SemanticPredicate::new("free", PredicateRule::Tautology),
            SemanticPredicate::new("even", PredicateRule::ResultEven),
        ];
        let trajectory = nested_entropy_trajectory(&space, &predicates, LogBase::Two).unwrap();
        assert_eq!(trajectory.steps[0].w, 27);
        assert_eq!(trajectory.steps[1].w, 27);
        assert_eq!(trajectory.steps[1].delta_s, Some(0.0));
        assert!(trajectory.steps[2].delta_s.unwrap() >= 0.0);
    }

    #[test]
    fn exact_halving_loses_one_bit() {
        // over length-1, alphabet-2: result is 1 or 2; evenness keeps one
        let space = ProgramSpace::new(1, 2);
        let predicates = [SemanticPredicate::new("even", PredicateRule::ResultEven)];
        let trajectory = nested_entropy_trajectory(&space, &predicates, LogBase::Two).unwrap();
        assert_eq!(trajectory.steps[0].w, 2);
        assert_eq!(trajectory.steps[1].w, 1);
        assert!((trajectory.steps[1].delta_s.unwrap() - 1.0).abs() < TOL);
    }

    #[test]
    fn emptying_predicate_yields_marker() {
        let space = ProgramSpace::new(2, 2);
        let predicates = [SemanticPredicate::new(
            "impossible",
            PredicateRule::Contradiction,
        )];
        let trajectory = nested_entropy_trajectory(&space, &predicates, LogBase::E).unwrap();
        assert_eq!(trajectory.steps[1].w, 0);
        assert_eq!(trajectory.steps[1].s, None);
        assert_eq!(trajectory.steps[1].delta_s, None);
    }

    #[test]
    fn uniform_identity_and_max_entropy_bound() {
        let space = ProgramSpace::new(3, 4);
        let predicates = [SemanticPredicate::new(
            "shallow",
            PredicateRule::MaxDepthAtMost { depth: 2 },
        )];
        let (w, _) = enumerate_feasible(&space, &predicates, false).unwrap();
        assert!(w > 1);
        let h = exact_entropy(w, &Distribution::Uniform, LogBase::E).unwrap();
        assert!((h - (w as f64).ln()).abs() < TOL);
        // a skewed distribution never exceeds log W
        let mut table = vec![0.5; 1];
        table.extend(std::iter::repeat_n(0.5 / (w as f64 - 1.0), w as usize - 1));
        let h_skewed = exact_entropy(w, &Distribution::Explicit(table), LogBase::E).unwrap();
        assert!(h_skewed <= (w as f64).ln() + TOL);
    }
}
