//! Brute-force oracles for the source problems. Small inputs only; these
//! are the ground truth the reductions are tested against.

use super::{ForgeError, Rxc3Instance};

/// Minimum balanced-cut width over all partitions into two halves, by
/// enumeration. Accepts any graph with an even number of nodes, up to 16.
pub fn oracle_bisection(num_nodes: usize, edges: &[(usize, usize)]) -> Result<u64, ForgeError> {
    if num_nodes > 16 {
        return Err(ForgeError::OracleTooLarge(format!("{num_nodes} nodes > 16")));
    }
    if !num_nodes.is_multiple_of(2) {
        return Err(ForgeError::MalformedSource("odd number of nodes".into()));
    }
    if num_nodes == 0 {
        return Ok(0);
    }
    let half = (num_nodes / 2) as u32;
    let mut best = u64::MAX;
    // node 0 may sit on side A without loss of generality
    for mask in 0u32..(1 << num_nodes) {
        if mask & 1 == 0 || mask.count_ones() != half {
            continue;
        }
        let cut = edges.iter().filter(|(u, v)| (mask >> u & 1) != (mask >> v & 1)).count() as u64;
        best = best.min(cut);
    }
    Ok(best)
}

/// Backtracking search for an exact cover; returns the first cover found
/// (clause indices, ascending) or `None`.
pub fn oracle_exact_cover(inst: &Rxc3Instance) -> Result<Option<Vec<usize>>, ForgeError> {
    if inst.elements.len() > 30 {
        return Err(ForgeError::OracleTooLarge(format!("{} elements > 30", inst.elements.len())));
    }
    inst.validate()?;

    // clauses containing each element, in index order
    let mut containing: Vec<Vec<usize>> = vec![Vec::new(); inst.elements.len()];
    for (j, c) in inst.clauses.iter().enumerate() {
        for &x in c {
            containing[x].push(j);
        }
    }

    fn rec(
        inst: &Rxc3Instance,
        containing: &[Vec<usize>],
        covered: &mut Vec<bool>,
        chosen: &mut Vec<usize>,
    ) -> bool {
        let Some(x) = covered.iter().position(|c| !c) else {
            return true;
        };
        for &j in &containing[x] {
            let c = &inst.clauses[j];
            if c.iter().any(|&y| covered[y]) {
                continue;
            }
            for &y in c {
                covered[y] = true;
            }
            chosen.push(j);
            if rec(inst, containing, covered, chosen) {
                return true;
            }
            chosen.pop();
            for &y in c {
                covered[y] = false;
            }
        }
        false
    }

    let mut covered = vec![false; inst.elements.len()];
    let mut chosen = Vec::new();
    if rec(inst, &containing, &mut covered, &mut chosen) {
        chosen.sort_unstable();
        Ok(Some(chosen))
    } else {
        Ok(None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forge::BisectionInstance;

    #[test]
    fn k4_width_is_four() {
        let k4 = BisectionInstance::k4(4);
        assert_eq!(oracle_bisection(4, &k4.edges).unwrap(), 4);
    }

    #[test]
    fn c6_width_is_two() {
        let edges = [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0)];
        assert_eq!(oracle_bisection(6, &edges).unwrap(), 2);
    }

    #[test]
    fn q3_width_is_four() {
        let mut edges = Vec::new();
        for v in 0..8usize {
            for b in 0..3 {
                let w = v ^ (1 << b);
                if v < w {
                    edges.push((v, w));
                }
            }
        }
        assert_eq!(oracle_bisection(8, &edges).unwrap(), 4);
    }

    #[test]
    fn oversized_inputs_rejected() {
        assert!(matches!(oracle_bisection(18, &[]), Err(ForgeError::OracleTooLarge(_))));
    }

    #[test]
    fn single_pattern_cover() {
        // three identical clauses over three elements: cover is {c_0}
        let inst = Rxc3Instance {
            elements: (1..=3).map(|i| i.to_string()).collect(),
            clauses: vec![[0, 1, 2], [0, 1, 2], [0, 1, 2]],
        };
        assert_eq!(oracle_exact_cover(&inst).unwrap(), Some(vec![0]));
    }

    #[test]
    fn small_yes_cover() {
        let inst = Rxc3Instance::small_yes();
        assert_eq!(oracle_exact_cover(&inst).unwrap(), Some(vec![0, 1]));
    }

    #[test]
    fn overlapping_family_has_no_cover() {
        // every pair of clauses intersects, so no two disjoint clauses exist
        let inst = Rxc3Instance {
            elements: (1..=6).map(|i| i.to_string()).collect(),
            clauses: vec![[0, 1, 3], [0, 2, 4], [0, 3, 5], [1, 2, 5], [1, 4, 5], [2, 3, 4]],
        };
        inst.validate().unwrap();
        assert_eq!(oracle_exact_cover(&inst).unwrap(), None);
    }
}
