//! Set cover over small finite universes.

/// Greedy set cover of `0..n` by `sets`. Returns chosen set indices, or
/// `None` if the union of all sets misses an element. Ties go to the lowest
/// set index.
pub fn greedy(n: usize, sets: &[Vec<usize>]) -> Option<Vec<usize>> {
    let mut covered = vec![false; n];
    let mut remaining = n;
    let mut chosen = Vec::new();
    while remaining > 0 {
        let mut best = None;
        let mut best_gain = 0;
        for (i, s) in sets.iter().enumerate() {
            let gain = s.iter().filter(|&&e| !covered[e]).count();
            if gain > best_gain {
                best_gain = gain;
                best = Some(i);
            }
        }
        let i = best?;
        for &e in &sets[i] {
            if !covered[e] {
                covered[e] = true;
                remaining -= 1;
            }
        }
        chosen.push(i);
    }
    Some(chosen)
}

/// Minimum set cover of the universe `target` (a bitmask) by `sets`, by
/// iterative deepening that always branches on the lowest uncovered element.
/// Returns the chosen set indices; `None` if no cover exists.
pub fn exact(target: u64, sets: &[u64]) -> Option<Vec<usize>> {
    if target == 0 {
        return Some(Vec::new());
    }
    let union = sets.iter().fold(0u64, |acc, s| acc | s);
    if union & target != target {
        return None;
    }
    let mut stack = Vec::new();
    for depth in 1..=target.count_ones() as usize {
        if search(target, sets, depth, &mut stack) {
            return Some(stack);
        }
    }
    unreachable!("singleton branching always finds a cover within |target| sets")
}

fn search(uncovered: u64, sets: &[u64], depth: usize, stack: &mut Vec<usize>) -> bool {
    if uncovered == 0 {
        return true;
    }
    if depth == 0 {
        return false;
    }
    let low = uncovered & uncovered.wrapping_neg();
    for (i, &s) in sets.iter().enumerate() {
        if s & low != 0 {
            stack.push(i);
            if search(uncovered & !s, sets, depth - 1, stack) {
                return true;
            }
            stack.pop();
        }
    }
    false
}
