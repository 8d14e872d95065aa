//! Tsirelson bound from nine-event exclusivity sets.
//!
//! Two copies of the CHSH scenario are joined by parity observables
//! `A_iA'_k`. Sets of nine pairwise exclusive events (eight product events and
//! one parity event) give inequalities `Σ P ≤ 1`; summed over enough sets they
//! collapse to a quadratic inequality in the CHSH value.

mod enumerate;
pub mod exact;
mod product;
mod table1;

use serde::Serialize;
use thiserror::Error;

use crate::events::{EventError, Outcome};
use crate::scenario::{chsh_functional, product_behavior, Behavior, ScenarioError};

pub use enumerate::{
    admissible_ninth_events, all_nine_sets, coverage, enumerate_nine_sets, Coverage,
    PARITY_FAMILIES,
};
use exact::{QSqrt2, QuadPoly};
pub use product::{classify, product_events, split_product, Class, ProductParts};
pub use table1::{
    build_table1, verify_exclusive, verify_set, ExclusivityCheck, NineEventSet, PairCheck,
    SetVerification, SymbolicProbability,
};

/// Digits after the decimal point in rendered bounds.
pub const DECIMAL_DIGITS: u32 = 10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProofError {
    #[error("`{0}` is not a signed pair of parities from one family")]
    InvalidNinthEvent(String),
    #[error("set {0} failed verification")]
    SetFailed(String),
    #[error("the {0} sets do not tile the product events")]
    CoverageFailed(&'static str),
    #[error("expected {expected} sets around {ninth}, found {found}")]
    UnexpectedCount {
        ninth: String,
        expected: usize,
        found: usize,
    },
    #[error("{0}")]
    Algebra(String),
    #[error(transparent)]
    Event(#[from] EventError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProofMode {
    Symmetric,
    General,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Assumption {
    pub name: String,
    pub statement: String,
}

fn assumption(name: &str, statement: &str) -> Assumption {
    Assumption {
        name: name.into(),
        statement: statement.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NinthEventCount {
    pub ninth: String,
    pub sets: usize,
    /// Table labels of hand-built sets found among them.
    pub table1: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Enumeration {
    pub per_ninth: Vec<NinthEventCount>,
    pub total: usize,
    pub coverage_tiling: bool,
}

/// `lhs(x) + ninth_total <= rhs` before elimination of the ninth-event terms.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Aggregate {
    pub rendered: String,
    pub product_terms: QuadPoly,
    pub ninth_total: QSqrt2,
    pub rhs: QSqrt2,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Bound {
    pub exact: QSqrt2,
    pub decimal: String,
}

impl Bound {
    fn new(exact: QSqrt2) -> Self {
        Bound {
            decimal: exact.to_decimal(DECIMAL_DIGITS),
            exact,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProofReport {
    pub mode: ProofMode,
    pub variable: String,
    pub sets: Vec<SetVerification>,
    pub enumeration: Option<Enumeration>,
    pub aggregate: Aggregate,
    /// Coefficients of the reduced quadratic `q(x) <= 0`.
    pub quadratic: QuadPoly,
    pub inequality: String,
    pub roots: [QSqrt2; 2],
    /// Largest admissible value of `variable`.
    pub bound: Bound,
    /// The corresponding bound on the CHSH sum `S`.
    pub chsh_bound: Bound,
    pub assumptions: Vec<Assumption>,
    pub steps: Vec<String>,
    pub verified: bool,
}

fn factorization() -> Assumption {
    assumption(
        "factorization",
        "P(A_i a, B_j b, A'_k a', B'_l b') = P(A_i a, B_j b) P(A'_k a', B'_l b')",
    )
}

fn joint_distribution(family: [&str; 2]) -> Assumption {
    let [x, y] = family;
    assumption(
        &format!("joint-distribution {x} {y}"),
        &format!("sum over a, b of P({x} a, {y} b) = 1"),
    )
}

fn exclusivity_principle() -> Assumption {
    assumption(
        "exclusivity",
        "the probabilities of pairwise exclusive events sum to at most 1",
    )
}

/// The four parity events of `family`, each used equally often, sum to one.
/// Returns the total probability mass contributed by ninth events.
fn eliminate_ninths(sets: &[NineEventSet]) -> Result<(QSqrt2, Vec<usize>), ProofError> {
    let ninths = admissible_ninth_events();
    let mut multiplicity = vec![0usize; ninths.len()];
    for set in sets {
        let ninth = set
            .ninth()
            .ok_or_else(|| ProofError::Algebra("empty set".into()))?;
        let k = ninths
            .iter()
            .position(|e| e.to_string() == ninth.to_string())
            .ok_or_else(|| ProofError::InvalidNinthEvent(ninth.to_string()))?;
        multiplicity[k] += 1;
    }
    let mut total = 0;
    for family in multiplicity.chunks(4) {
        let m = family[0];
        if family.iter().any(|&c| c != m) {
            return Err(ProofError::Algebra(
                "ninth events of a family are not used equally often".into(),
            ));
        }
        total += m;
    }
    Ok((QSqrt2::integer(total as i64), multiplicity))
}

fn verify_all(sets: &[NineEventSet]) -> Result<Vec<SetVerification>, ProofError> {
    sets.iter()
        .map(|s| {
            let report = verify_set(s);
            if report.verified {
                Ok(report)
            } else {
                Err(ProofError::SetFailed(s.label.clone()))
            }
        })
        .collect()
}

fn reduce(aggregate: &Aggregate) -> Result<(QuadPoly, [QSqrt2; 2]), ProofError> {
    let shifted =
        &aggregate.product_terms + &QuadPoly::constant(&aggregate.ninth_total - &aggregate.rhs);
    let quadratic = shifted
        .primitive()
        .ok_or_else(|| ProofError::Algebra("aggregate has irrational coefficients".into()))?;
    if quadratic.c2.signum() != std::cmp::Ordering::Greater {
        return Err(ProofError::Algebra(
            "aggregate is not an upward quadratic".into(),
        ));
    }
    let (lo, hi) = quadratic
        .roots()
        .ok_or_else(|| ProofError::Algebra("quadratic has no roots in Q(√2)".into()))?;
    Ok((quadratic, [lo, hi]))
}

fn symmetric_case_count(sets: &[NineEventSet]) -> (usize, usize) {
    let mut counts = (0, 0);
    for s in sets {
        for p in &s.probabilities[..s.probabilities.len() - 1] {
            if *p == SymbolicProbability::p_squared() {
                counts.0 += 1;
            } else if *p == SymbolicProbability::q_squared() {
                counts.1 += 1;
            }
        }
    }
    counts
}

/// Bound from the four hand-built sets under the symmetric behavior.
pub fn symmetric_bound() -> Result<ProofReport, ProofError> {
    let sets = build_table1();
    let verifications = verify_all(&sets)?;
    let product_terms = sets.iter().flat_map(|s| &s.probabilities[..8]).try_fold(
        QuadPoly::zero(),
        |acc, p| match p {
            SymbolicProbability::Poly(poly) => Ok(&acc + poly),
            SymbolicProbability::Opaque(name) => {
                Err(ProofError::Algebra(format!("unexpected symbol {name}")))
            }
        },
    )?;
    let (ninth_total, _) = eliminate_ninths(&sets)?;
    let rhs = QSqrt2::integer(sets.len() as i64);
    let (np, nq) = symmetric_case_count(&sets);
    let aggregate = Aggregate {
        rendered: format!("{np}p^2 + {nq}(1/2 - p)^2 + {ninth_total} <= {rhs}"),
        product_terms,
        ninth_total,
        rhs,
    };
    let (quadratic, roots) = reduce(&aggregate)?;
    let p_max = roots[1].clone();
    let s_max = &QSqrt2::integer(8) * &p_max;
    let names: Vec<String> = sets.iter().map(|s| s.label.clone()).collect();
    let steps = vec![
        format!("verified sets {} pairwise exclusive", names.join(", ")),
        "each set: sum of its eight probabilities plus its parity event <= 1".into(),
        format!(
            "summing the {} inequalities: {}",
            sets.len(),
            aggregate.rendered
        ),
        format!(
            "parity events of {} {} sum to {}",
            PARITY_FAMILIES[0][0], PARITY_FAMILIES[0][1], aggregate.ninth_total
        ),
        format!("reduced: {} <= 0", quadratic.render("p")),
        format!("roots {} and {}", roots[0], roots[1]),
        format!("p <= {}, so S = 8p <= {}", p_max, s_max),
    ];
    Ok(ProofReport {
        mode: ProofMode::Symmetric,
        variable: "p".into(),
        sets: verifications,
        enumeration: None,
        inequality: format!("{} <= 0", quadratic.render("p")),
        aggregate,
        quadratic,
        roots,
        bound: Bound::new(p_max),
        chsh_bound: Bound::new(s_max),
        assumptions: vec![
            exclusivity_principle(),
            factorization(),
            joint_distribution(PARITY_FAMILIES[0]),
            assumption(
                "symmetric-behavior",
                "every CHSH term has probability p and every complementary term 1/2 - p",
            ),
        ],
        steps,
        verified: true,
    })
}

/// Bound on `S` for arbitrary behaviors, from all sixteen enumerated sets.
pub fn general_bound() -> Result<ProofReport, ProofError> {
    let sets = all_nine_sets();
    let verifications = verify_all(sets)?;
    let table = build_table1();
    let mut per_ninth = Vec::new();
    for ninth in admissible_ninth_events() {
        let found: Vec<&NineEventSet> = sets
            .iter()
            .filter(|s| s.ninth().map(ToString::to_string) == Some(ninth.to_string()))
            .collect();
        if found.len() != 2 {
            return Err(ProofError::UnexpectedCount {
                ninth: ninth.to_string(),
                expected: 2,
                found: found.len(),
            });
        }
        per_ninth.push(NinthEventCount {
            ninth: ninth.to_string(),
            sets: found.len(),
            table1: table
                .iter()
                .filter(|t| found.iter().any(|s| s.same_events(t)))
                .map(|t| t.label.clone())
                .collect(),
        });
    }
    let cov = coverage(sets);
    if !cov.is_tiling() {
        return Err(ProofError::CoverageFailed("enumerated"));
    }
    let s = QuadPoly::x();
    let four_minus_s = QuadPoly::linear(QSqrt2::integer(4), QSqrt2::integer(-1));
    let product_terms =
        &s.square().expect("degree two") + &four_minus_s.square().expect("degree two");
    let (ninth_total, _) = eliminate_ninths(sets)?;
    let rhs = QSqrt2::integer(sets.len() as i64);
    let aggregate = Aggregate {
        rendered: format!("S^2 + (4 - S)^2 + {ninth_total} <= {rhs}"),
        product_terms,
        ninth_total,
        rhs,
    };
    let (quadratic, roots) = reduce(&aggregate)?;
    let s_max = roots[1].clone();
    let steps = vec![
        format!("enumerated {} sets, two around each of 8 parity events, all verified", sets.len()),
        "every ordered pair of CHSH terms, and of complementary terms, is one product event exactly once".into(),
        "by factorization the product events sum to S^2 + (4 - S)^2".into(),
        format!("each parity family sums to 1 and appears twice: total {}", aggregate.ninth_total),
        format!("summing the {} inequalities: {}", sets.len(), aggregate.rendered),
        format!("reduced: {} <= 0", quadratic.render("S")),
        format!("roots {} and {}", roots[0], roots[1]),
        format!("S <= {s_max}"),
    ];
    Ok(ProofReport {
        mode: ProofMode::General,
        variable: "S".into(),
        sets: verifications,
        enumeration: Some(Enumeration {
            total: sets.len(),
            per_ninth,
            coverage_tiling: true,
        }),
        inequality: format!("{} <= 0", quadratic.render("S")),
        aggregate,
        quadratic,
        roots,
        bound: Bound::new(s_max.clone()),
        chsh_bound: Bound::new(s_max),
        assumptions: vec![
            exclusivity_principle(),
            factorization(),
            joint_distribution(PARITY_FAMILIES[0]),
            joint_distribution(PARITY_FAMILIES[1]),
        ],
        steps,
        verified: true,
    })
}

/// `|Σ P(product events over the sixteen sets) - (S^2 + (4 - S)^2)|` for the
/// product behavior `b × b`.
pub fn sum_identity_residual(b: &Behavior) -> Result<f64, ProofError> {
    let s = chsh_functional(b)?;
    let joint = product_behavior(b, b)?;
    let mut sum = 0.0;
    for set in all_nine_sets() {
        for event in set.product_events() {
            let parts = split_product(event)
                .ok_or_else(|| ProofError::Algebra(format!("{event} is not a product event")))?;
            let context = parts.context();
            let outcomes: [Outcome; 4] = parts.outcomes;
            sum += joint
                .probability(&context, &outcomes)
                .ok_or_else(|| ScenarioError::UndefinedContext(context.to_vec()))?;
        }
    }
    Ok((sum - (s * s + (4.0 - s) * (4.0 - s))).abs())
}
