//! The four hand-built nine-event sets and their verification.

use serde::Serialize;

use crate::events::{exclusivity_witness, Event, Registry};

use super::exact::{QSqrt2, QuadPoly};
use super::product::{classify, Class};

/// Probability of an event as a function of `p`, or a named unknown.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "value")]
#[allow(clippy::large_enum_variant)]
pub enum SymbolicProbability {
    Poly(QuadPoly),
    Opaque(String),
}

impl SymbolicProbability {
    /// `p^2`
    pub fn p_squared() -> Self {
        SymbolicProbability::Poly(QuadPoly::from_integers(0, 0, 1))
    }

    /// `(1/2 - p)^2`
    pub fn q_squared() -> Self {
        SymbolicProbability::Poly(half_minus_p().square().expect("degree two"))
    }

    /// `p (1/2 - p)`
    pub fn mixed() -> Self {
        SymbolicProbability::Poly(
            QuadPoly::x()
                .checked_mul(&half_minus_p())
                .expect("degree two"),
        )
    }

    /// Probability of a product event under the symmetric behavior with
    /// independent copies.
    pub fn for_class(class: Class) -> Self {
        match class {
            Class::InIn => Self::p_squared(),
            Class::OutOut => Self::q_squared(),
            Class::Mixed => Self::mixed(),
        }
    }

    pub fn render(&self) -> String {
        match self {
            SymbolicProbability::Poly(poly) if *poly == QuadPoly::from_integers(0, 0, 1) => {
                "p^2".into()
            }
            SymbolicProbability::Poly(poly) if Some(poly) == half_minus_p().square().as_ref() => {
                "(1/2 - p)^2".into()
            }
            SymbolicProbability::Poly(poly) => poly.render("p"),
            SymbolicProbability::Opaque(name) => name.clone(),
        }
    }

    pub fn eval_f64(&self, p: f64) -> Option<f64> {
        match self {
            SymbolicProbability::Poly(poly) => Some(poly.eval_f64(p)),
            SymbolicProbability::Opaque(_) => None,
        }
    }
}

fn half_minus_p() -> QuadPoly {
    QuadPoly::linear(QSqrt2::fraction(1, 2), QSqrt2::integer(-1))
}

/// Eight product events and one parity event (last), with names and symbolic
/// probabilities.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NineEventSet {
    pub label: String,
    pub names: Vec<String>,
    pub events: Vec<Event>,
    pub probabilities: Vec<SymbolicProbability>,
}

impl NineEventSet {
    /// The product events, i.e. everything but the last event.
    pub fn product_events(&self) -> &[Event] {
        &self.events[..self.events.len().saturating_sub(1)]
    }

    pub fn ninth(&self) -> Option<&Event> {
        self.events.last()
    }

    /// Same events, compared as unordered sets of product events plus the ninth.
    pub fn same_events(&self, other: &NineEventSet) -> bool {
        let key = |s: &NineEventSet| {
            let mut v: Vec<String> = s.product_events().iter().map(Event::to_string).collect();
            v.sort();
            (v, s.ninth().map(Event::to_string))
        };
        key(self) == key(other)
    }
}

const TABLE: [(&str, [&str; 9]); 4] = [
    (
        "e",
        [
            "A0+ B0+ A'0+ B'1+",
            "A0- B0- A'0- B'1-",
            "A0+ B0- A'0+ B'1-",
            "A0- B0+ A'0- B'1+",
            "A1+ B0+ A'1+ B'1-",
            "A1- B0- A'1- B'1+",
            "A1+ B0- A'1+ B'1+",
            "A1- B0+ A'1- B'1-",
            "A0A'0- A1A'1-",
        ],
    ),
    (
        "f",
        [
            "A0+ B0+ A'0+ B'0+",
            "A0- B0- A'0- B'0-",
            "A0+ B0- A'0+ B'0-",
            "A0- B0+ A'0- B'0+",
            "A1+ B0+ A'1- B'0-",
            "A1- B0- A'1+ B'0+",
            "A1+ B0- A'1- B'0+",
            "A1- B0+ A'1+ B'0-",
            "A0A'0- A1A'1+",
        ],
    ),
    (
        "g",
        [
            "A0+ B0+ A'0- B'0-",
            "A0- B0- A'0+ B'0+",
            "A0+ B0- A'0- B'0+",
            "A0- B0+ A'0+ B'0-",
            "A1+ B0+ A'1+ B'0+",
            "A1- B0- A'1- B'0-",
            "A1+ B0- A'1+ B'0-",
            "A1- B0+ A'1- B'0+",
            "A0A'0+ A1A'1-",
        ],
    ),
    (
        "h",
        [
            "A0+ B0+ A'0- B'1-",
            "A0- B0- A'0+ B'1+",
            "A0+ B0- A'0- B'1+",
            "A0- B0+ A'0+ B'1-",
            "A1+ B0+ A'1- B'1+",
            "A1- B0- A'1+ B'1-",
            "A1+ B0- A'1- B'1-",
            "A1- B0+ A'1+ B'1+",
            "A0A'0+ A1A'1+",
        ],
    ),
];

/// Rows 1, 2, 5, 6 carry `p^2`; rows 3, 4, 7, 8 carry `(1/2 - p)^2`.
const P_SQUARED_ROWS: [bool; 8] = [true, true, false, false, true, true, false, false];

/// The sets `{e_i}`, `{f_i}`, `{g_i}`, `{h_i}` with their probabilities.
pub fn build_table1() -> Vec<NineEventSet> {
    let registry = Registry::two_copy_chsh();
    TABLE
        .iter()
        .map(|(label, rows)| {
            let events = rows
                .iter()
                .map(|text| Event::parse(&registry, text).expect("table events are consistent"))
                .collect();
            let mut probabilities: Vec<_> = P_SQUARED_ROWS
                .iter()
                .map(|&p2| {
                    if p2 {
                        SymbolicProbability::p_squared()
                    } else {
                        SymbolicProbability::q_squared()
                    }
                })
                .collect();
            probabilities.push(SymbolicProbability::Opaque(format!("P({label}_9)")));
            NineEventSet {
                label: (*label).to_string(),
                names: (1..=9).map(|k| format!("{label}_{k}")).collect(),
                events,
                probabilities,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PairCheck {
    pub first: String,
    pub second: String,
    pub witness: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExclusivityCheck {
    pub pairs: Vec<PairCheck>,
    /// Pairs without a witness.
    pub failures: Vec<(String, String)>,
}

impl ExclusivityCheck {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks every unordered pair of `events` for exclusivity.
pub fn verify_exclusive(names: &[String], events: &[Event]) -> ExclusivityCheck {
    let mut pairs = Vec::new();
    let mut failures = Vec::new();
    for i in 0..events.len() {
        for j in i + 1..events.len() {
            let witness = exclusivity_witness(&events[i], &events[j])
                .map(|id| events[i].registry().label(id).to_string());
            if witness.is_none() {
                failures.push((names[i].clone(), names[j].clone()));
            }
            pairs.push(PairCheck {
                first: names[i].clone(),
                second: names[j].clone(),
                witness,
            });
        }
    }
    ExclusivityCheck { pairs, failures }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SetVerification {
    pub label: String,
    pub events: Vec<String>,
    pub exclusivity: ExclusivityCheck,
    pub in_in: usize,
    pub out_out: usize,
    pub mixed: usize,
    /// Product events that are not of the form `(A_i a, B_j b, A'_k a', B'_l b')`.
    pub malformed: Vec<String>,
    /// `None` for sets that do not have eight product events.
    pub pattern_ok: Option<bool>,
    /// Names whose stored probability differs from the one implied by the event.
    pub probability_mismatches: Vec<String>,
    pub verified: bool,
}

/// Verifies pairwise exclusivity, the four-in/four-out pattern and the
/// stored probabilities of `set`. Failures are reported, never raised.
pub fn verify_set(set: &NineEventSet) -> SetVerification {
    let exclusivity = verify_exclusive(&set.names, &set.events);
    let (mut in_in, mut out_out, mut mixed) = (0, 0, 0);
    let mut malformed = Vec::new();
    let mut probability_mismatches = Vec::new();
    for (k, event) in set.product_events().iter().enumerate() {
        match classify(event) {
            Some(class) => {
                match class {
                    Class::InIn => in_in += 1,
                    Class::OutOut => out_out += 1,
                    Class::Mixed => mixed += 1,
                }
                if set.probabilities.get(k) != Some(&SymbolicProbability::for_class(class)) {
                    probability_mismatches.push(set.names[k].clone());
                }
            }
            None => malformed.push(set.names[k].clone()),
        }
    }
    if let Some(last) = set.probabilities.last() {
        if set.events.len() > 1 && !matches!(last, SymbolicProbability::Opaque(_)) {
            probability_mismatches.push(set.names[set.events.len() - 1].clone());
        }
    }
    let pattern_ok =
        (set.events.len() == 9).then_some(in_in == 4 && out_out == 4 && malformed.is_empty());
    let verified = exclusivity.passed()
        && pattern_ok.unwrap_or(true)
        && probability_mismatches.is_empty()
        && set.probabilities.len() == set.events.len();
    SetVerification {
        label: set.label.clone(),
        events: set.events.iter().map(Event::to_string).collect(),
        exclusivity,
        in_in,
        out_out,
        mixed,
        malformed,
        pattern_ok,
        probability_mismatches,
        verified,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::events::Outcome;

    fn set(label: &str) -> NineEventSet {
        build_table1()
            .into_iter()
            .find(|s| s.label == label)
            .unwrap()
    }

    #[test]
    fn rows_render_with_their_parities() {
        let e = set("e");
        assert_eq!(e.events[0].to_string(), "A0+ B0+ A'0+ B'1+ A0A'0+");
        assert_eq!(e.probabilities[0].render(), "p^2");
        let f = set("f");
        assert_eq!(f.events[4].to_string(), "A1+ B0+ A'1- B'0- A1A'1-");
        assert_eq!(f.probabilities[4].render(), "p^2");
        assert_eq!(f.probabilities[6].render(), "(1/2 - p)^2");
        let g = set("g");
        assert_eq!(g.events[8].to_string(), "A0A'0+ A1A'1-");
        assert_eq!(
            g.probabilities[8],
            SymbolicProbability::Opaque("P(g_9)".into())
        );
    }

    #[test]
    fn ninth_events() {
        let ninths: Vec<String> = build_table1()
            .iter()
            .map(|s| s.ninth().unwrap().to_string())
            .collect();
        assert_eq!(
            ninths,
            [
                "A0A'0- A1A'1-",
                "A0A'0- A1A'1+",
                "A0A'0+ A1A'1-",
                "A0A'0+ A1A'1+"
            ]
        );
    }

    #[test]
    fn every_set_verifies() {
        for s in build_table1() {
            let report = verify_set(&s);
            assert!(report.verified, "{report:?}");
            assert_eq!(report.exclusivity.pairs.len(), 36);
            assert!(report.exclusivity.pairs.iter().all(|p| p.witness.is_some()));
            assert_eq!((report.in_in, report.out_out, report.mixed), (4, 4, 0));
        }
    }

    #[test]
    fn flipping_a_primed_outcome_breaks_the_set() {
        let mut f = set("f");
        let registry = Registry::two_copy_chsh();
        let a1p = registry.lookup("A'1").unwrap();
        let base: Vec<_> = f.events[4]
            .assignment()
            .into_iter()
            .filter(|(id, _)| registry.label(*id).len() <= 3)
            .map(|(id, o)| {
                if id == a1p {
                    (id, Outcome::Plus)
                } else {
                    (id, o)
                }
            })
            .collect();
        f.events[4] = Event::new(&registry, &base).unwrap();
        let report = verify_set(&f);
        assert!(!report.verified);
        assert_eq!(
            report.exclusivity.failures,
            vec![("f_5".to_string(), "f_9".to_string())]
        );
        assert_eq!(report.pattern_ok, Some(false));
        assert_eq!(report.mixed, 1);
    }

    #[test]
    fn singleton_is_vacuous() {
        let e = set("e");
        let single = NineEventSet {
            label: "single".into(),
            names: vec![e.names[0].clone()],
            events: vec![e.events[0].clone()],
            probabilities: vec![e.probabilities[0].clone()],
        };
        let report = verify_set(&single);
        assert!(report.exclusivity.pairs.is_empty());
        assert!(report.verified);
    }

    #[test]
    fn probabilities_evaluate() {
        assert_eq!(
            SymbolicProbability::q_squared().eval_f64(0.25),
            Some(0.0625)
        );
        assert_eq!(SymbolicProbability::mixed().render(), "-p^2 + 1/2p");
    }
}
