//! Maximum bipartite matching (Hopcroft–Karp).

use std::collections::VecDeque;

const NIL: usize = usize::MAX;

/// A maximum matching of the bipartite graph with `adj[u]` listing the
/// right-side neighbours of left vertex `u`. Returns `mate[u]` for every
/// left vertex (`None` when unmatched).
pub fn hopcroft_karp(adj: &[Vec<usize>], right_count: usize) -> Vec<Option<usize>> {
    let left_count = adj.len();
    let mut mate_left = vec![NIL; left_count];
    let mut mate_right = vec![NIL; right_count];
    let mut dist = vec![0usize; left_count];
    loop {
        // BFS layering from free left vertices
        let mut queue = VecDeque::new();
        for u in 0..left_count {
            if mate_left[u] == NIL {
                dist[u] = 0;
                queue.push_back(u);
            } else {
                dist[u] = usize::MAX;
            }
        }
        let mut found = false;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                let w = mate_right[v];
                if w == NIL {
                    found = true;
                } else if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        if !found {
            break;
        }
        let mut progress = false;
        for u in 0..left_count {
            if mate_left[u] == NIL && augment(u, adj, &mut mate_left, &mut mate_right, &mut dist) {
                progress = true;
            }
        }
        if !progress {
            break;
        }
    }
    mate_left.into_iter().map(|m| (m != NIL).then_some(m)).collect()
}

/// Iterative DFS along the BFS layers.
fn augment(
    root: usize,
    adj: &[Vec<usize>],
    mate_left: &mut [usize],
    mate_right: &mut [usize],
    dist: &mut [usize],
) -> bool {
    let mut stack: Vec<(usize, usize)> = vec![(root, 0)];
    while let Some(&mut (u, ref mut next)) = stack.last_mut() {
        if *next == adj[u].len() {
            dist[u] = usize::MAX;
            stack.pop();
            continue;
        }
        let v = adj[u][*next];
        *next += 1;
        let w = mate_right[v];
        if w == NIL {
            // flip the path recorded on the stack
            let mut v = v;
            while let Some((u, _)) = stack.pop() {
                let previous = mate_left[u];
                mate_left[u] = v;
                mate_right[v] = u;
                v = previous;
            }
            return true;
        }
        if dist[w] == dist[u] + 1 {
            stack.push((w, 0));
        }
    }
    false
}
