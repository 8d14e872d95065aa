//! Exact maximum-weight independent set by branch and bound over `u64` masks.

/// Largest vertex count the bitmask search supports.
pub const MAX_INDEPENDENCE_VERTICES: usize = 40;

/// Returns a maximum-weight independent set (ascending vertex indices) and its
/// weight.
///
/// Vertices are branched in index order, including before excluding, and only
/// strict improvements replace the incumbent; among optimal sets the one
/// reached first (preferring lower-index vertices) is returned.
///
/// Panics if the graph has more than [`MAX_INDEPENDENCE_VERTICES`] vertices.
pub fn max_weight_independent_set(adjacency: &[Vec<bool>], weights: &[f64]) -> (Vec<usize>, f64) {
    let n = adjacency.len();
    assert!(
        n <= MAX_INDEPENDENCE_VERTICES,
        "independence search supports at most 40 vertices"
    );
    let neighbors: Vec<u64> = adjacency
        .iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .filter(|(_, &e)| e)
                .fold(0u64, |m, (j, _)| m | 1 << j)
        })
        .collect();
    let total: f64 = weights.iter().sum();
    let mut search = Search {
        neighbors,
        weights: weights.to_vec(),
        eps: 1e-12 * (1.0 + total),
        best: 0,
        best_weight: f64::NEG_INFINITY,
    };
    let all = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    search.run(0, 0.0, all);
    let set = (0..n).filter(|&v| search.best >> v & 1 == 1).collect();
    let weight = (0..n)
        .filter(|&v| search.best >> v & 1 == 1)
        .map(|v| weights[v])
        .sum();
    (set, weight)
}

struct Search {
    neighbors: Vec<u64>,
    weights: Vec<f64>,
    eps: f64,
    best: u64,
    best_weight: f64,
}

impl Search {
    fn run(&mut self, chosen: u64, weight: f64, candidates: u64) {
        if candidates == 0 {
            if weight > self.best_weight + self.eps {
                self.best = chosen;
                self.best_weight = weight;
            }
            return;
        }
        if weight + self.clique_cover_bound(candidates) <= self.best_weight + self.eps {
            return;
        }
        let v = candidates.trailing_zeros() as usize;
        let bit = 1u64 << v;
        self.run(
            chosen | bit,
            weight + self.weights[v],
            candidates & !bit & !self.neighbors[v],
        );
        self.run(chosen, weight, candidates & !bit);
    }

    /// Greedy partition of `candidates` into cliques; an independent set takes at
    /// most one vertex from each, so the sum of per-clique maxima bounds it.
    fn clique_cover_bound(&self, mut candidates: u64) -> f64 {
        let mut bound = 0.0;
        while candidates != 0 {
            let v = candidates.trailing_zeros() as usize;
            let mut clique_max = self.weights[v];
            let mut extend = candidates & self.neighbors[v];
            candidates &= !(1u64 << v);
            while extend != 0 {
                let u = extend.trailing_zeros() as usize;
                clique_max = clique_max.max(self.weights[u]);
                candidates &= !(1u64 << u);
                extend &= self.neighbors[u] & !(1u64 << u);
            }
            bound += clique_max;
        }
        bound
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn adjacency(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<bool>> {
        let mut a = vec![vec![false; n]; n];
        for &(i, j) in edges {
            a[i][j] = true;
            a[j][i] = true;
        }
        a
    }

    #[test]
    fn pentagon() {
        let edges: Vec<_> = (0..5).map(|i| (i, (i + 1) % 5)).collect();
        let (set, w) = max_weight_independent_set(&adjacency(5, &edges), &[1.0; 5]);
        assert_eq!(w, 2.0);
        assert_eq!(set, vec![0, 2]);
    }

    #[test]
    fn edgeless_and_empty() {
        let (set, w) = max_weight_independent_set(&adjacency(6, &[]), &[1.0; 6]);
        assert_eq!((set.len(), w), (6, 6.0));
        assert_eq!(max_weight_independent_set(&[], &[]), (vec![], 0.0));
    }

    #[test]
    fn weights_change_the_answer() {
        // Path 0-1-2: the middle vertex wins when heavy enough.
        let a = adjacency(3, &[(0, 1), (1, 2)]);
        assert_eq!(
            max_weight_independent_set(&a, &[1.0, 1.5, 1.0]).0,
            vec![0, 2]
        );
        assert_eq!(max_weight_independent_set(&a, &[1.0, 2.5, 1.0]).0, vec![1]);
    }

    #[test]
    fn lexicographic_tie_break() {
        let a = adjacency(4, &[(0, 1), (2, 3)]);
        assert_eq!(max_weight_independent_set(&a, &[1.0; 4]).0, vec![0, 2]);
    }

    #[test]
    fn forty_vertex_cycle() {
        let edges: Vec<_> = (0..40).map(|i| (i, (i + 1) % 40)).collect();
        let (set, w) = max_weight_independent_set(&adjacency(40, &edges), &[1.0; 40]);
        assert_eq!(w, 20.0);
        assert_eq!(set.len(), 20);
    }
}
