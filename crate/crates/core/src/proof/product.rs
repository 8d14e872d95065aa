//! Product events `(A_i a, B_j b, A'_k a', B'_l b')` of the two-copy scenario.

use std::sync::OnceLock;

use serde::Serialize;

use crate::events::{Event, Outcome, Registry};
use crate::scenario::{chsh_terms, is_chsh_term};

/// Whether each copy's half of a product event is a CHSH term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Class {
    InIn,
    OutOut,
    Mixed,
}

/// Settings and outcomes of a product event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ProductParts {
    pub settings: [usize; 4],
    pub outcomes: [Outcome; 4],
}

const PARTIES: [&str; 4] = ["A", "B", "A'", "B'"];

impl ProductParts {
    pub fn class(&self) -> Class {
        let [i, j, k, l] = self.settings;
        let [a, b, a2, b2] = self.outcomes;
        match (is_chsh_term(i, a, j, b), is_chsh_term(k, a2, l, b2)) {
            (true, true) => Class::InIn,
            (false, false) => Class::OutOut,
            _ => Class::Mixed,
        }
    }

    /// Context labels, e.g. `["A0", "B1", "A'0", "B'0"]`.
    pub fn context(&self) -> [String; 4] {
        std::array::from_fn(|p| format!("{}{}", PARTIES[p], self.settings[p]))
    }

    /// Index of each half among the eight in-terms or the eight out-terms.
    pub fn halves(&self) -> (usize, usize) {
        let [i, j, k, l] = self.settings;
        let [a, b, a2, b2] = self.outcomes;
        (half_index(i, a, j, b), half_index(k, a2, l, b2))
    }

    /// Sort key: settings, then in-in before out-out, then outcomes.
    pub fn sort_key(&self) -> ([usize; 4], Class, [Outcome; 4]) {
        (self.settings, self.class(), self.outcomes)
    }

    pub fn event(&self) -> Event {
        let registry = Registry::two_copy_chsh();
        let labels = self.context();
        let assignment: Vec<_> = labels
            .iter()
            .zip(self.outcomes)
            .map(|(l, o)| (l.as_str(), o))
            .collect();
        Event::from_labels(&registry, &assignment).expect("product events are consistent")
    }
}

/// Position of `(A_i a, B_j b)` among the CHSH terms, or among their complements
/// taken in the same order with Bob's outcome flipped.
fn half_index(i: usize, a: Outcome, j: usize, b: Outcome) -> usize {
    let b = if is_chsh_term(i, a, j, b) {
        b
    } else {
        b.flipped()
    };
    chsh_terms()
        .iter()
        .position(|&t| t == (i, a, j, b))
        .expect("every outcome pair is a term or a flipped term")
}

/// Reads the product structure of a two-copy event: exactly one setting per
/// party assigned, and no parity beyond the one implied.
pub fn split_product(event: &Event) -> Option<ProductParts> {
    let mut settings = [0; 4];
    let mut outcomes = [Outcome::Plus; 4];
    for (p, party) in PARTIES.iter().enumerate() {
        let assigned: Vec<_> = (0..2)
            .filter_map(|s| event.get_label(&format!("{party}{s}")).map(|o| (s, o)))
            .collect();
        let [(s, o)] = assigned[..] else {
            return None;
        };
        settings[p] = s;
        outcomes[p] = o;
    }
    let parts = ProductParts { settings, outcomes };
    (parts.event() == *event).then_some(parts)
}

pub fn classify(event: &Event) -> Option<Class> {
    split_product(event).map(|p| p.class())
}

/// All 256 closed product events in sort-key order.
pub fn product_events() -> &'static [(ProductParts, Event)] {
    static ALL: OnceLock<Vec<(ProductParts, Event)>> = OnceLock::new();
    ALL.get_or_init(|| {
        let mut out = Vec::with_capacity(256);
        for code in 0..256usize {
            let settings = std::array::from_fn(|p| code >> (7 - p) & 1);
            let outcomes = std::array::from_fn(|p| {
                if code >> (3 - p) & 1 == 1 {
                    Outcome::Minus
                } else {
                    Outcome::Plus
                }
            });
            let parts = ProductParts { settings, outcomes };
            out.push((parts, parts.event()));
        }
        out.sort_by_key(|(p, _)| p.sort_key());
        out
    })
}
