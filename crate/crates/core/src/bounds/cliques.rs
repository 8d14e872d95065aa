//! Maximal clique enumeration (Bron–Kerbosch with Tomita pivoting).

use fixedbitset::FixedBitSet;

/// Enumeration stopped because more than `limit` maximal cliques exist.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TooManyCliques {
    pub limit: usize,
}

/// All maximal cliques of the graph, each sorted ascending, the list sorted
/// lexicographically. Isolated vertices appear as singleton cliques.
pub fn maximal_cliques(
    adjacency: &[Vec<bool>],
    limit: usize,
) -> Result<Vec<Vec<usize>>, TooManyCliques> {
    let n = adjacency.len();
    let neighbors: Vec<FixedBitSet> = adjacency
        .iter()
        .map(|row| {
            let mut set = FixedBitSet::with_capacity(n);
            for (j, &edge) in row.iter().enumerate() {
                set.set(j, edge);
            }
            set
        })
        .collect();
    let mut search = Search {
        neighbors,
        limit,
        out: Vec::new(),
    };
    let mut candidates = FixedBitSet::with_capacity(n);
    candidates.insert_range(..);
    let mut current = Vec::new();
    search.expand(&mut current, candidates, FixedBitSet::with_capacity(n))?;
    let mut out = search.out;
    for clique in &mut out {
        clique.sort_unstable();
    }
    out.sort();
    Ok(out)
}

struct Search {
    neighbors: Vec<FixedBitSet>,
    limit: usize,
    out: Vec<Vec<usize>>,
}

impl Search {
    fn expand(
        &mut self,
        current: &mut Vec<usize>,
        mut candidates: FixedBitSet,
        mut excluded: FixedBitSet,
    ) -> Result<(), TooManyCliques> {
        if candidates.is_clear() {
            if excluded.is_clear() && !current.is_empty() {
                if self.out.len() == self.limit {
                    return Err(TooManyCliques { limit: self.limit });
                }
                self.out.push(current.clone());
            }
            return Ok(());
        }
        // Pivot maximizing |P ∩ N(u)|; lowest index on ties.
        let pivot = candidates
            .ones()
            .chain(excluded.ones())
            .max_by_key(|&u| {
                (
                    self.neighbors[u].intersection_count(&candidates),
                    std::cmp::Reverse(u),
                )
            })
            .expect("candidates nonempty");
        let mut branch = candidates.clone();
        branch.difference_with(&self.neighbors[pivot]);
        for v in branch.ones() {
            let mut next_candidates = candidates.clone();
            next_candidates.intersect_with(&self.neighbors[v]);
            let mut next_excluded = excluded.clone();
            next_excluded.intersect_with(&self.neighbors[v]);
            current.push(v);
            self.expand(current, next_candidates, next_excluded)?;
            current.pop();
            candidates.set(v, false);
            excluded.insert(v);
        }
        Ok(())
    }
}
