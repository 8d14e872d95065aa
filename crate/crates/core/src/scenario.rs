//! Bell scenarios, behaviors and the CHSH functional.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::events::Outcome;

/// Normalization tolerance for a single context.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-12;
/// Tolerance used when comparing marginals for the no-signaling check.
pub const SIGNALING_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("behavior has no table for context {0:?}")]
    UndefinedContext(Vec<String>),
    #[error("parameter {0} outside [0, 1/2]")]
    OutOfRange(f64),
    #[error("malformed behavior: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BellScenario {
    pub parties: Vec<String>,
    /// Observable labels available to each party, in party order.
    pub settings: Vec<Vec<String>>,
}

impl BellScenario {
    /// Every combination of one setting per party, first party varying slowest.
    pub fn contexts(&self) -> Vec<Vec<String>> {
        self.settings.iter().fold(vec![Vec::new()], |acc, options| {
            acc.iter()
                .flat_map(|prefix| {
                    options.iter().map(move |s| {
                        let mut c = prefix.clone();
                        c.push(s.clone());
                        c
                    })
                })
                .collect()
        })
    }

    pub fn outcomes_per_context(&self) -> usize {
        1 << self.parties.len()
    }
}

/// Alice chooses `A0`/`A1`, Bob chooses `B0`/`B1`.
pub fn chsh_scenario() -> BellScenario {
    BellScenario {
        parties: vec!["Alice".into(), "Bob".into()],
        settings: vec![
            vec!["A0".into(), "A1".into()],
            vec!["B0".into(), "B1".into()],
        ],
    }
}

/// Two independent copies of the CHSH scenario.
pub fn two_copy_scenario() -> BellScenario {
    BellScenario {
        parties: vec!["Alice".into(), "Bob".into(), "Alice'".into(), "Bob'".into()],
        settings: vec![
            vec!["A0".into(), "A1".into()],
            vec!["B0".into(), "B1".into()],
            vec!["A'0".into(), "A'1".into()],
            vec!["B'0".into(), "B'1".into()],
        ],
    }
}

/// Whether `P(A_i a, B_j b)` is one of the eight terms of the CHSH sum.
///
/// The terms are the correlated outcomes for `(A0,B0)`, `(A0,B1)`, `(A1,B0)` and
/// the anti-correlated outcomes for `(A1,B1)`.
pub fn is_chsh_term(alice_setting: usize, a: Outcome, bob_setting: usize, b: Outcome) -> bool {
    if alice_setting == 1 && bob_setting == 1 {
        a != b
    } else {
        a == b
    }
}

/// The eight terms of the CHSH sum as `(A_i, a, B_j, b)`, in the order they are
/// summed.
pub fn chsh_terms() -> [(usize, Outcome, usize, Outcome); 8] {
    use Outcome::{Minus, Plus};
    [
        (0, Plus, 0, Plus),
        (0, Minus, 0, Minus),
        (0, Plus, 1, Plus),
        (0, Minus, 1, Minus),
        (1, Plus, 0, Plus),
        (1, Minus, 0, Minus),
        (1, Plus, 1, Minus),
        (1, Minus, 1, Plus),
    ]
}

/// Joint outcome probabilities, stored per context.
///
/// Each context maps to `2^parties` probabilities indexed by outcome string,
/// `"+…+"` first; party 0 is the most significant position.
#[derive(Debug, Clone, PartialEq)]
pub struct Behavior {
    parties: usize,
    table: BTreeMap<Vec<String>, Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct BehaviorFile {
    contexts: Vec<ContextEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ContextEntry {
    settings: Vec<String>,
    probs: BTreeMap<String, f64>,
}

pub fn outcome_index(outcomes: &[Outcome]) -> usize {
    outcomes
        .iter()
        .fold(0, |acc, o| (acc << 1) | usize::from(*o == Outcome::Minus))
}

pub fn outcome_string(index: usize, parties: usize) -> String {
    (0..parties)
        .map(|k| {
            if index >> (parties - 1 - k) & 1 == 1 {
                '-'
            } else {
                '+'
            }
        })
        .collect()
}

fn parse_outcome_string(s: &str) -> Option<Vec<Outcome>> {
    s.chars().map(Outcome::from_symbol).collect()
}

impl Behavior {
    /// Builds a behavior from per-context probability vectors.
    pub fn from_table(
        parties: usize,
        table: impl IntoIterator<Item = (Vec<String>, Vec<f64>)>,
    ) -> Result<Self, ScenarioError> {
        let mut out = BTreeMap::new();
        for (settings, probs) in table {
            if settings.len() != parties || probs.len() != 1 << parties {
                return Err(ScenarioError::Malformed(format!(
                    "context {settings:?} has {} settings and {} probabilities",
                    settings.len(),
                    probs.len()
                )));
            }
            if out.insert(settings.clone(), probs).is_some() {
                return Err(ScenarioError::Malformed(format!(
                    "context {settings:?} listed twice"
                )));
            }
        }
        Ok(Behavior {
            parties,
            table: out,
        })
    }

    pub fn parties(&self) -> usize {
        self.parties
    }

    pub fn contexts(&self) -> impl Iterator<Item = (&Vec<String>, &Vec<f64>)> {
        self.table.iter()
    }

    pub fn context<S: AsRef<str>>(&self, settings: &[S]) -> Option<&[f64]> {
        let key: Vec<String> = settings.iter().map(|s| s.as_ref().to_string()).collect();
        self.table.get(&key).map(Vec::as_slice)
    }

    pub fn probability<S: AsRef<str>>(&self, settings: &[S], outcomes: &[Outcome]) -> Option<f64> {
        if outcomes.len() != self.parties {
            return None;
        }
        self.context(settings).map(|p| p[outcome_index(outcomes)])
    }

    fn require<S: AsRef<str>>(
        &self,
        settings: &[S],
        outcomes: &[Outcome],
    ) -> Result<f64, ScenarioError> {
        self.probability(settings, outcomes).ok_or_else(|| {
            ScenarioError::UndefinedContext(
                settings.iter().map(|s| s.as_ref().to_string()).collect(),
            )
        })
    }

    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        let file: BehaviorFile =
            serde_json::from_str(text).map_err(|e| ScenarioError::Malformed(e.to_string()))?;
        let parties = file
            .contexts
            .first()
            .map(|c| c.settings.len())
            .ok_or_else(|| ScenarioError::Malformed("no contexts".into()))?;
        let mut rows = Vec::with_capacity(file.contexts.len());
        for entry in file.contexts {
            let mut probs = vec![f64::NAN; 1 << parties];
            for (key, value) in &entry.probs {
                let outcomes = parse_outcome_string(key)
                    .filter(|o| o.len() == parties)
                    .ok_or_else(|| ScenarioError::Malformed(format!("bad outcome key `{key}`")))?;
                probs[outcome_index(&outcomes)] = *value;
            }
            if probs.iter().any(|p| p.is_nan()) {
                return Err(ScenarioError::Malformed(format!(
                    "context {:?} does not list every joint outcome",
                    entry.settings
                )));
            }
            rows.push((entry.settings, probs));
        }
        Behavior::from_table(parties, rows)
    }

    pub fn to_json(&self) -> String {
        let file = BehaviorFile {
            contexts: self
                .table
                .iter()
                .map(|(settings, probs)| ContextEntry {
                    settings: settings.clone(),
                    probs: probs
                        .iter()
                        .enumerate()
                        .map(|(i, &p)| (outcome_string(i, self.parties), p))
                        .collect(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("behavior serializes")
    }
}

/// Builds a CHSH behavior from a function of `(i, a, j, b)`.
fn chsh_behavior_from(f: impl Fn(usize, Outcome, usize, Outcome) -> f64) -> Behavior {
    let mut rows = Vec::with_capacity(4);
    for i in 0..2 {
        for j in 0..2 {
            let mut probs = vec![0.0; 4];
            for a in Outcome::ALL {
                for b in Outcome::ALL {
                    probs[outcome_index(&[a, b])] = f(i, a, j, b);
                }
            }
            rows.push((vec![format!("A{i}"), format!("B{j}")], probs));
        }
    }
    Behavior::from_table(2, rows).expect("well-shaped table")
}

/// Sum of the eight CHSH probabilities.
///
/// Summed pairwise, so that eight equal terms add up to exactly `8p`.
pub fn chsh_functional(b: &Behavior) -> Result<f64, ScenarioError> {
    let terms = chsh_terms()
        .iter()
        .map(|&(i, a, j, bo)| b.require(&[format!("A{i}"), format!("B{j}")], &[a, bo]))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(pairwise_sum(&terms))
}

fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        n => pairwise_sum(&values[..n / 2]) + pairwise_sum(&values[n / 2..]),
    }
}

/// Every CHSH term equals `p`; every complementary probability equals `1/2 - p`.
pub fn symmetric_behavior(p: f64) -> Result<Behavior, ScenarioError> {
    if !(0.0..=0.5).contains(&p) {
        return Err(ScenarioError::OutOfRange(p));
    }
    Ok(chsh_behavior_from(|i, a, j, b| {
        if is_chsh_term(i, a, j, b) {
            p
        } else {
            0.5 - p
        }
    }))
}

/// All sixteen probabilities equal to 1/4.
pub fn uniform_behavior() -> Behavior {
    chsh_behavior_from(|_, _, _, _| 0.25)
}

/// Deterministic local strategy: each observable returns a fixed outcome.
pub fn deterministic_behavior(alice: [Outcome; 2], bob: [Outcome; 2]) -> Behavior {
    chsh_behavior_from(|i, a, j, b| {
        if alice[i] == a && bob[j] == b {
            1.0
        } else {
            0.0
        }
    })
}

/// A CHSH behavior whose four context tables are independent flat-Dirichlet
/// samples. No-signaling is not imposed.
pub fn random_chsh_behavior<R: Rng + ?Sized>(rng: &mut R) -> Behavior {
    let mut rows = Vec::with_capacity(4);
    for i in 0..2 {
        for j in 0..2 {
            let raw: Vec<f64> = (0..4).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
            let total: f64 = raw.iter().sum();
            rows.push((
                vec![format!("A{i}"), format!("B{j}")],
                raw.iter().map(|x| x / total).collect(),
            ));
        }
    }
    Behavior::from_table(2, rows).expect("well-shaped table")
}

/// Appends a prime to the party letter: `A0` becomes `A'0`.
pub fn primed(label: &str) -> String {
    let mut chars = label.chars();
    match chars.next() {
        Some(first) => format!("{first}'{}", chars.as_str()),
        None => String::new(),
    }
}

/// Two-copy behavior in which the copies are statistically independent:
/// `P(A_i a, B_j b, A'_k a', B'_l b') = P1(A_i a, B_j b) * P2(A_k a', B_l b')`.
pub fn product_behavior(b1: &Behavior, b2: &Behavior) -> Result<Behavior, ScenarioError> {
    if b1.parties != 2 || b2.parties != 2 {
        return Err(ScenarioError::Malformed(
            "product behavior needs two two-party behaviors".into(),
        ));
    }
    let mut rows = Vec::with_capacity(b1.table.len() * b2.table.len());
    for (c1, p1) in &b1.table {
        for (c2, p2) in &b2.table {
            let settings = vec![c1[0].clone(), c1[1].clone(), primed(&c2[0]), primed(&c2[1])];
            let probs = (0..16).map(|idx| p1[idx >> 2] * p2[idx & 3]).collect();
            rows.push((settings, probs));
        }
    }
    Behavior::from_table(4, rows)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NormalizationViolation {
        context: Vec<String>,
        sum: f64,
    },
    NegativeProbability {
        context: Vec<String>,
        outcome: String,
        value: f64,
    },
    NonFinite {
        context: Vec<String>,
        outcome: String,
    },
    /// The marginal over `parties` depends on the settings of the other parties.
    Signaling {
        parties: Vec<usize>,
        context: Vec<String>,
        reference: Vec<String>,
    },
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ValidationOptions {
    pub no_signaling: bool,
}

/// Normalization and nonnegativity check. An empty list means valid.
pub fn validate_behavior(b: &Behavior) -> Vec<Violation> {
    validate_behavior_with(b, ValidationOptions::default())
}

pub fn validate_behavior_with(b: &Behavior, options: ValidationOptions) -> Vec<Violation> {
    let mut out = Vec::new();
    for (context, probs) in &b.table {
        for (i, &p) in probs.iter().enumerate() {
            if !p.is_finite() {
                out.push(Violation::NonFinite {
                    context: context.clone(),
                    outcome: outcome_string(i, b.parties),
                });
            } else if p < 0.0 {
                out.push(Violation::NegativeProbability {
                    context: context.clone(),
                    outcome: outcome_string(i, b.parties),
                    value: p,
                });
            }
        }
        let sum: f64 = probs.iter().sum();
        if sum.is_nan() || (sum - 1.0).abs() > NORMALIZATION_TOLERANCE {
            out.push(Violation::NormalizationViolation {
                context: context.clone(),
                sum,
            });
        }
    }
    if options.no_signaling {
        out.extend(signaling_violations(b));
    }
    out
}

fn signaling_violations(b: &Behavior) -> Vec<Violation> {
    let n = b.parties;
    let mut out = Vec::new();
    for subset in 1..(1usize << n) - 1 {
        let members: Vec<usize> = (0..n).filter(|k| subset >> (n - 1 - k) & 1 == 1).collect();
        let mut reference: BTreeMap<Vec<&String>, (&Vec<String>, Vec<f64>)> = BTreeMap::new();
        for (context, probs) in &b.table {
            let key: Vec<&String> = members.iter().map(|&k| &context[k]).collect();
            let marginal = marginalize(probs, n, &members);
            match reference.get(&key) {
                None => {
                    reference.insert(key, (context, marginal));
                }
                Some((ref_context, ref_marginal)) => {
                    let differs = marginal
                        .iter()
                        .zip(ref_marginal)
                        .any(|(x, y)| (x - y).abs() > SIGNALING_TOLERANCE);
                    if differs {
                        out.push(Violation::Signaling {
                            parties: members.clone(),
                            context: context.clone(),
                            reference: (*ref_context).clone(),
                        });
                    }
                }
            }
        }
    }
    out
}

fn marginalize(probs: &[f64], n: usize, members: &[usize]) -> Vec<f64> {
    let mut out = vec![0.0; 1 << members.len()];
    for (idx, p) in probs.iter().enumerate() {
        let sub = members
            .iter()
            .fold(0, |acc, &k| (acc << 1) | (idx >> (n - 1 - k) & 1));
        out[sub] += p;
    }
    out
}
