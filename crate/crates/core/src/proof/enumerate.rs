//! Exhaustive search for nine-event sets around a given parity event.

use std::sync::OnceLock;

use serde::Serialize;

use crate::events::{are_exclusive, Event, Outcome, Registry};

use super::product::{product_events, Class, ProductParts};
use super::table1::{NineEventSet, SymbolicProbability};
use super::ProofError;

/// The two parity families; a ninth event fixes one sign in each parity of a family.
pub const PARITY_FAMILIES: [[&str; 2]; 2] = [["A0A'0", "A1A'1"], ["A0A'1", "A1A'0"]];

/// The eight ninth events: each family, sign pairs `--`, `-+`, `+-`, `++`.
pub fn admissible_ninth_events() -> Vec<Event> {
    let registry = Registry::two_copy_chsh();
    let signs = [
        (Outcome::Minus, Outcome::Minus),
        (Outcome::Minus, Outcome::Plus),
        (Outcome::Plus, Outcome::Minus),
        (Outcome::Plus, Outcome::Plus),
    ];
    PARITY_FAMILIES
        .iter()
        .flat_map(|[x, y]| {
            let registry = registry.clone();
            signs.iter().map(move |&(s, t)| {
                Event::from_labels(&registry, &[(x, s), (y, t)]).expect("parities are registered")
            })
        })
        .collect()
}

/// Re-expresses `ninth` over the standard registry and checks its shape.
fn normalize_ninth(ninth: &Event) -> Result<(Event, usize), ProofError> {
    let invalid = || ProofError::InvalidNinthEvent(ninth.to_string());
    let registry = Registry::two_copy_chsh();
    let event = Event::parse(&registry, &ninth.to_string()).map_err(|_| invalid())?;
    let labels: Vec<&str> = event
        .assignment()
        .iter()
        .map(|(id, _)| registry.label(*id))
        .collect();
    let family = PARITY_FAMILIES
        .iter()
        .position(|f| labels == f[..])
        .ok_or_else(invalid)?;
    Ok((event, family))
}

/// All sets of eight product events that are pairwise exclusive, exclusive
/// with `ninth`, and split four in-in and four out-out. Each set lists its
/// product events in sort-key order; the sets are sorted by their event lists.
pub fn enumerate_nine_sets(ninth: &Event) -> Result<Vec<NineEventSet>, ProofError> {
    let (ninth, _) = normalize_ninth(ninth)?;
    let candidates: Vec<&(ProductParts, Event)> = product_events()
        .iter()
        .filter(|(p, e)| p.class() != Class::Mixed && are_exclusive(e, &ninth))
        .collect();
    let n = candidates.len();
    let adjacent: Vec<Vec<bool>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| i != j && are_exclusive(&candidates[i].1, &candidates[j].1))
                .collect()
        })
        .collect();
    let mut found = Vec::new();
    let mut chosen = Vec::with_capacity(8);
    search(&candidates, &adjacent, 0, &mut chosen, [0, 0], &mut found);

    let mut sets: Vec<Vec<usize>> = found;
    sets.sort();
    let label = ninth.to_string();
    Ok(sets
        .into_iter()
        .enumerate()
        .map(|(k, members)| {
            let mut events: Vec<Event> = members.iter().map(|&m| candidates[m].1.clone()).collect();
            let mut probabilities: Vec<SymbolicProbability> = members
                .iter()
                .map(|&m| SymbolicProbability::for_class(candidates[m].0.class()))
                .collect();
            let set_label = format!("{label} #{}", k + 1);
            events.push(ninth.clone());
            probabilities.push(SymbolicProbability::Opaque(format!("P({label})")));
            NineEventSet {
                names: (1..=9).map(|i| format!("{set_label}/{i}")).collect(),
                label: set_label,
                events,
                probabilities,
            }
        })
        .collect())
}

fn search(
    candidates: &[&(ProductParts, Event)],
    adjacent: &[Vec<bool>],
    start: usize,
    chosen: &mut Vec<usize>,
    counts: [usize; 2],
    found: &mut Vec<Vec<usize>>,
) {
    if chosen.len() == 8 {
        found.push(chosen.clone());
        return;
    }
    for v in start..candidates.len() {
        if candidates.len() - v < 8 - chosen.len() {
            break;
        }
        let slot = usize::from(candidates[v].0.class() == Class::OutOut);
        if counts[slot] == 4 || !chosen.iter().all(|&u| adjacent[u][v]) {
            continue;
        }
        let mut next = counts;
        next[slot] += 1;
        chosen.push(v);
        search(candidates, adjacent, v + 1, chosen, next, found);
        chosen.pop();
    }
}

/// The sixteen sets found around the eight admissible ninth events, grouped by
/// ninth event in [`admissible_ninth_events`] order.
pub fn all_nine_sets() -> &'static [NineEventSet] {
    static ALL: OnceLock<Vec<NineEventSet>> = OnceLock::new();
    ALL.get_or_init(|| {
        admissible_ninth_events()
            .iter()
            .flat_map(|e| enumerate_nine_sets(e).expect("admissible ninth event"))
            .collect()
    })
}

/// How often each ordered pair of halves appears as a product event.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Coverage {
    /// `in_in[8 * h1 + h2]`: pair of CHSH terms `(h1, h2)`.
    pub in_in: Vec<usize>,
    /// `out_out[8 * h1 + h2]`: pair of complementary terms.
    pub out_out: Vec<usize>,
    pub mixed: usize,
}

impl Coverage {
    /// Every ordered pair of in-terms and every ordered pair of out-terms
    /// appears exactly once.
    pub fn is_tiling(&self) -> bool {
        self.in_in.iter().chain(&self.out_out).all(|&c| c == 1) && self.mixed == 0
    }
}

pub fn coverage(sets: &[NineEventSet]) -> Coverage {
    let mut cov = Coverage {
        in_in: vec![0; 64],
        out_out: vec![0; 64],
        mixed: 0,
    };
    for set in sets {
        for event in set.product_events() {
            let Some(parts) = super::product::split_product(event) else {
                cov.mixed += 1;
                continue;
            };
            let (h1, h2) = parts.halves();
            match parts.class() {
                Class::InIn => cov.in_in[8 * h1 + h2] += 1,
                Class::OutOut => cov.out_out[8 * h1 + h2] += 1,
                Class::Mixed => cov.mixed += 1,
            }
        }
    }
    cov
}
