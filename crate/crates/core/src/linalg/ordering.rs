//! Reverse Cuthill-McKee bandwidth reduction.

use std::collections::VecDeque;

use super::SparseMatrix;

/// Returns `perm` with `perm[new] = old` for the symmetrized pattern of `m`.
pub fn reverse_cuthill_mckee(m: &SparseMatrix) -> Vec<usize> {
    let n = m.nrows();
    let adj = symmetric_adjacency(m);
    let degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);

    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&v| (degree[v], v));

    for &seed in &by_degree {
        if visited[seed] {
            continue;
        }
        let start = pseudo_peripheral(seed, &adj, &degree);
        visited[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = adj[v].iter().copied().filter(|&w| !visited[w]).collect();
            next.sort_by_key(|&w| (degree[w], w));
            for w in next {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

/// Lower and upper bandwidth of `m` under the permutation `perm[new] = old`.
pub fn bandwidth(m: &SparseMatrix, perm: &[usize]) -> (usize, usize) {
    let mut inv = vec![0; perm.len()];
    for (new, &old) in perm.iter().enumerate() {
        inv[old] = new;
    }
    let (mut kl, mut ku) = (0, 0);
    for i in 0..m.nrows() {
        let (cols, _) = m.row(i);
        for &j in cols {
            let (r, c) = (inv[i], inv[j]);
            if r > c {
                kl = kl.max(r - c);
            } else {
                ku = ku.max(c - r);
            }
        }
    }
    (kl, ku)
}

fn symmetric_adjacency(m: &SparseMatrix) -> Vec<Vec<usize>> {
    let n = m.nrows();
    let mut adj = vec![Vec::new(); n];
    for i in 0..n {
        let (cols, _) = m.row(i);
        for &j in cols {
            if i != j {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    for a in &mut adj {
        a.sort_unstable();
        a.dedup();
    }
    adj
}

fn level_structure(root: usize, adj: &[Vec<usize>]) -> (Vec<usize>, usize) {
    let mut level = vec![usize::MAX; adj.len()];
    level[root] = 0;
    let mut queue = VecDeque::from([root]);
    let mut last = vec![root];
    let mut depth = 0;
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if level[w] == usize::MAX {
                level[w] = level[v] + 1;
                if level[w] > depth {
                    depth = level[w];
                    last.clear();
                }
                last.push(w);
                queue.push_back(w);
            }
        }
    }
    (last, depth)
}

fn pseudo_peripheral(seed: usize, adj: &[Vec<usize>], degree: &[usize]) -> usize {
    let mut root = seed;
    let (mut last, mut depth) = level_structure(root, adj);
    loop {
        let candidate = *last
            .iter()
            .min_by_key(|&&v| (degree[v], v))
            .expect("level set is nonempty");
        let (cand_last, cand_depth) = level_structure(candidate, adj);
        if cand_depth > depth {
            root = candidate;
            last = cand_last;
            depth = cand_depth;
        } else {
            return root;
        }
    }
}
