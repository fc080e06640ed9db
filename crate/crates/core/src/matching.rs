//! Minimum-cost perfect matching on square integer cost matrices.
//!
//! Two independent solvers are provided: exhaustive enumeration of all
//! permutations and the O(k³) shortest-augmenting-path Hungarian method.
//! [`min_cost_assignment`] dispatches on size; the tests cross-check both on
//! the overlapping range.

use itertools::Itertools;

/// Largest size solved by enumeration in [`min_cost_assignment`].
pub const BRUTE_FORCE_LIMIT: usize = 6;

/// An optimal assignment: `assignment[row] = column`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    pub cost: u64,
    pub assignment: Vec<usize>,
}

/// Solves the assignment problem for a `size × size` row-major matrix.
pub fn min_cost_assignment(cost: &[u64], size: usize) -> Assignment {
    if size <= BRUTE_FORCE_LIMIT {
        brute_force_assignment(cost, size)
    } else {
        hungarian_assignment(cost, size)
    }
}

/// Enumerates all `size!` permutations in lexicographic order and keeps the
/// first one of minimum cost.
pub fn brute_force_assignment(cost: &[u64], size: usize) -> Assignment {
    assert_eq!(cost.len(), size * size, "cost matrix must be size × size");
    if size == 0 {
        return Assignment {
            cost: 0,
            assignment: Vec::new(),
        };
    }
    let mut best = Assignment {
        cost: u64::MAX,
        assignment: Vec::new(),
    };
    for perm in (0..size).permutations(size) {
        let total: u64 = perm.iter().enumerate().map(|(row, &col)| cost[row * size + col]).sum();
        if total < best.cost {
            best = Assignment {
                cost: total,
                assignment: perm,
            };
        }
    }
    best
}

/// Hungarian method with row/column potentials (Jonker–Volgenant style
/// shortest augmenting paths). Exact on integer costs.
pub fn hungarian_assignment(cost: &[u64], size: usize) -> Assignment {
    assert_eq!(cost.len(), size * size, "cost matrix must be size × size");
    if size == 0 {
        return Assignment {
            cost: 0,
            assignment: Vec::new(),
        };
    }
    let c = |i: usize, j: usize| cost[i * size + j] as i128;
    // 1-based arrays; index 0 is the virtual column used to start each path.
    let mut u = vec![0i128; size + 1];
    let mut v = vec![0i128; size + 1];
    let mut matched_row = vec![0usize; size + 1];
    let mut way = vec![0usize; size + 1];

    for row in 1..=size {
        matched_row[0] = row;
        let mut col0 = 0usize;
        let mut minv = vec![i128::MAX; size + 1];
        let mut used = vec![false; size + 1];
        loop {
            used[col0] = true;
            let i0 = matched_row[col0];
            let mut delta = i128::MAX;
            let mut col1 = 0usize;
            for j in 1..=size {
                if used[j] {
                    continue;
                }
                let reduced = c(i0 - 1, j - 1) - u[i0] - v[j];
                if reduced < minv[j] {
                    minv[j] = reduced;
                    way[j] = col0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    col1 = j;
                }
            }
            for j in 0..=size {
                if used[j] {
                    u[matched_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            col0 = col1;
            if matched_row[col0] == 0 {
                break;
            }
        }
        loop {
            let col1 = way[col0];
            matched_row[col0] = matched_row[col1];
            col0 = col1;
            if col0 == 0 {
                break;
            }
        }
    }

    let mut assignment = vec![0usize; size];
    for j in 1..=size {
        assignment[matched_row[j] - 1] = j - 1;
    }
    let total = assignment
        .iter()
        .enumerate()
        .map(|(row, &col)| cost[row * size + col])
        .sum();
    Assignment {
        cost: total,
        assignment,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empty_and_singleton() {
        assert_eq!(min_cost_assignment(&[], 0).cost, 0);
        assert_eq!(hungarian_assignment(&[7], 1).cost, 7);
        assert_eq!(brute_force_assignment(&[7], 1).assignment, vec![0]);
    }

    #[test]
    fn small_known_matrix() {
        // rows pick (0->1, 1->0, 2->2): 1 + 2 + 3
        let cost = [4, 1, 3, 2, 0, 5, 3, 2, 2];
        assert_eq!(brute_force_assignment(&cost, 3).cost, 5);
        assert_eq!(hungarian_assignment(&cost, 3).cost, 5);
    }

    #[test]
    fn brute_force_prefers_first_permutation_on_ties() {
        let cost = [1, 1, 1, 1];
        assert_eq!(brute_force_assignment(&cost, 2).assignment, vec![0, 1]);
    }

    fn square(max: usize) -> impl Strategy<Value = (usize, Vec<u64>)> {
        (1..=max).prop_flat_map(|size| (Just(size), proptest::collection::vec(0u64..50, size * size)))
    }

    proptest! {
        #[test]
        fn hungarian_matches_enumeration((size, cost) in square(7)) {
            let brute = brute_force_assignment(&cost, size);
            let hung = hungarian_assignment(&cost, size);
            prop_assert_eq!(brute.cost, hung.cost);
            let mut cols = hung.assignment.clone();
            cols.sort_unstable();
            prop_assert_eq!(cols, (0..size).collect::<Vec<_>>());
        }
    }
}
