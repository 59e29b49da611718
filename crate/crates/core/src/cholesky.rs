//! Sparse Cholesky factorization `P A Pᵀ = L Lᵀ` for symmetric positive
//! definite matrices.
//!
//! The ordering is George's automatic nested dissection: the middle level
//! of a breadth-first level structure rooted at a pseudo-peripheral vertex
//! separates each subgraph, separators are numbered last. The numeric phase
//! is the up-looking row algorithm driven by the elimination tree.

use std::collections::VecDeque;

use thiserror::Error;

use crate::sparse::CsrMatrix;

/// Subgraphs at or below this size are not dissected further.
const LEAF_SIZE: usize = 48;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FactorError {
    #[error("matrix not positive definite (pivot {pivot:.3e} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },
}

#[derive(Clone, Debug)]
pub struct SparseCholesky {
    n: usize,
    /// `perm[new] = old`.
    perm: Vec<usize>,
    l_ptr: Vec<usize>,
    l_idx: Vec<usize>,
    l_val: Vec<f64>,
}

impl SparseCholesky {
    pub fn factor(a: &CsrMatrix) -> Result<SparseCholesky, FactorError> {
        let n = a.dim();
        let adj: Vec<Vec<usize>> = (0..n)
            .map(|i| a.row(i).map(|(j, _)| j).filter(|&j| j != i).collect())
            .collect();
        let perm = nested_dissection(&adj);
        let mut iperm = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            iperm[old] = new;
        }

        // Upper triangle of P A Pᵀ, column k holding rows i <= k.
        let mut c_ptr = vec![0; n + 1];
        let mut c_idx = Vec::with_capacity(a.nnz() / 2 + n);
        let mut c_val = Vec::with_capacity(a.nnz() / 2 + n);
        for k in 0..n {
            let mut col: Vec<(usize, f64)> = a
                .row(perm[k])
                .map(|(j, v)| (iperm[j], v))
                .filter(|&(i, _)| i <= k)
                .collect();
            col.sort_by_key(|&(i, _)| i);
            for (i, v) in col {
                c_idx.push(i);
                c_val.push(v);
            }
            c_ptr[k + 1] = c_idx.len();
        }

        let parent = etree(n, &c_ptr, &c_idx);

        // Column counts of L from the row patterns.
        let mut counts = vec![1usize; n];
        let mut stack = vec![0usize; n];
        let mut mark = vec![usize::MAX; n];
        for k in 0..n {
            let top = ereach(k, &c_ptr, &c_idx, &parent, &mut stack, &mut mark);
            for &i in &stack[top..] {
                counts[i] += 1;
            }
        }
        let mut l_ptr = vec![0; n + 1];
        for k in 0..n {
            l_ptr[k + 1] = l_ptr[k] + counts[k];
        }
        let nnz = l_ptr[n];
        let mut l_idx = vec![0; nnz];
        let mut l_val = vec![0.0; nnz];
        let mut fill: Vec<usize> = l_ptr[..n].to_vec();
        let mut x = vec![0.0; n];
        mark.iter_mut().for_each(|m| *m = usize::MAX);

        for k in 0..n {
            let top = ereach(k, &c_ptr, &c_idx, &parent, &mut stack, &mut mark);
            for p in c_ptr[k]..c_ptr[k + 1] {
                x[c_idx[p]] = c_val[p];
            }
            let mut d = x[k];
            x[k] = 0.0;
            for &i in &stack[top..] {
                let lki = x[i] / l_val[l_ptr[i]];
                x[i] = 0.0;
                for p in l_ptr[i] + 1..fill[i] {
                    x[l_idx[p]] -= l_val[p] * lki;
                }
                d -= lki * lki;
                let p = fill[i];
                fill[i] += 1;
                l_idx[p] = k;
                l_val[p] = lki;
            }
            if !(d > 0.0) {
                return Err(FactorError::NotPositiveDefinite {
                    row: perm[k],
                    pivot: d,
                });
            }
            let p = fill[k];
            fill[k] += 1;
            l_idx[p] = k;
            l_val[p] = d.sqrt();
        }

        Ok(SparseCholesky {
            n,
            perm,
            l_ptr,
            l_idx,
            l_val,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Nonzeros in the factor `L`, diagonal included.
    pub fn factor_nnz(&self) -> usize {
        self.l_val.len()
    }

    /// Overwrites `b` with `A⁻¹ b`.
    pub fn solve_in_place(&self, b: &mut [f64], work: &mut Vec<f64>) {
        let n = self.n;
        work.clear();
        work.extend(self.perm.iter().map(|&old| b[old]));
        let x = work.as_mut_slice();
        for j in 0..n {
            let start = self.l_ptr[j];
            x[j] /= self.l_val[start];
            let xj = x[j];
            for p in start + 1..self.l_ptr[j + 1] {
                x[self.l_idx[p]] -= self.l_val[p] * xj;
            }
        }
        for j in (0..n).rev() {
            let start = self.l_ptr[j];
            let mut s = x[j];
            for p in start + 1..self.l_ptr[j + 1] {
                s -= self.l_val[p] * x[self.l_idx[p]];
            }
            x[j] = s / self.l_val[start];
        }
        for (new, &old) in self.perm.iter().enumerate() {
            b[old] = x[new];
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut out = b.to_vec();
        let mut work = Vec::with_capacity(self.n);
        self.solve_in_place(&mut out, &mut work);
        out
    }
}

fn etree(n: usize, c_ptr: &[usize], c_idx: &[usize]) -> Vec<usize> {
    const NONE: usize = usize::MAX;
    let mut parent = vec![NONE; n];
    let mut ancestor = vec![NONE; n];
    for k in 0..n {
        for &start in &c_idx[c_ptr[k]..c_ptr[k + 1]] {
            let mut i = start;
            while i != NONE && i < k {
                let next = ancestor[i];
                ancestor[i] = k;
                if next == NONE {
                    parent[i] = k;
                }
                i = next;
            }
        }
    }
    parent
}

/// Pattern of row `k` of `L` (excluding the diagonal), left in
/// `stack[top..]` in topological order.
fn ereach(
    k: usize,
    c_ptr: &[usize],
    c_idx: &[usize],
    parent: &[usize],
    stack: &mut [usize],
    mark: &mut [usize],
) -> usize {
    let n = parent.len();
    let mut top = n;
    mark[k] = k;
    let mut path = Vec::new();
    for &start in &c_idx[c_ptr[k]..c_ptr[k + 1]] {
        let mut i = start;
        if i > k {
            continue;
        }
        path.clear();
        while mark[i] != k {
            path.push(i);
            mark[i] = k;
            i = parent[i];
        }
        while let Some(v) = path.pop() {
            top -= 1;
            stack[top] = v;
        }
    }
    top
}

/// Elimination order (`order[new] = old`) by recursive level-structure
/// bisection.
pub fn nested_dissection(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let mut order = Vec::with_capacity(n);
    // `owner[v]` is the id of the subproblem currently holding `v`.
    let mut owner = vec![0usize; n];
    let mut next_id = 1usize;
    let mut level = vec![usize::MAX; n];
    let mut tasks: Vec<Task> = vec![Task::Dissect((0..n).collect())];
    // Depth-first with explicit stack: children pushed so that the first
    // part is ordered first and the separator last.
    while let Some(task) = tasks.pop() {
        match task {
            Task::Emit(vs) => order.extend(vs),
            Task::Dissect(part) => {
                if part.len() <= LEAF_SIZE {
                    order.extend(part);
                    continue;
                }
                let id = next_id;
                next_id += 1;
                for &v in &part {
                    owner[v] = id;
                }
                let comps = components(&part, adj, &owner, id, &mut level);
                if comps.len() > 1 {
                    for c in comps.into_iter().rev() {
                        tasks.push(Task::Dissect(c));
                    }
                    continue;
                }
                match split(&part, adj, &owner, id, &mut level) {
                    Some((a, b, sep)) => {
                        tasks.push(Task::Emit(sep));
                        tasks.push(Task::Dissect(b));
                        tasks.push(Task::Dissect(a));
                    }
                    None => order.extend(part),
                }
            }
        }
    }
    order
}

enum Task {
    Dissect(Vec<usize>),
    Emit(Vec<usize>),
}

fn components(
    part: &[usize],
    adj: &[Vec<usize>],
    owner: &[usize],
    id: usize,
    seen: &mut [usize],
) -> Vec<Vec<usize>> {
    for &v in part {
        seen[v] = usize::MAX;
    }
    let mut out = Vec::new();
    for &s in part {
        if seen[s] != usize::MAX {
            continue;
        }
        let mut comp = vec![s];
        seen[s] = 0;
        let mut head = 0;
        while head < comp.len() {
            let v = comp[head];
            head += 1;
            for &w in &adj[v] {
                if owner[w] == id && seen[w] == usize::MAX {
                    seen[w] = 0;
                    comp.push(w);
                }
            }
        }
        out.push(comp);
    }
    out
}

/// BFS levels from `root` inside the subproblem; returns vertices grouped
/// by level.
fn level_structure(
    root: usize,
    part: &[usize],
    adj: &[Vec<usize>],
    owner: &[usize],
    id: usize,
    level: &mut [usize],
) -> Vec<Vec<usize>> {
    for &v in part {
        level[v] = usize::MAX;
    }
    let mut levels: Vec<Vec<usize>> = vec![vec![root]];
    level[root] = 0;
    let mut queue = VecDeque::from([root]);
    while let Some(v) = queue.pop_front() {
        let lv = level[v];
        for &w in &adj[v] {
            if owner[w] == id && level[w] == usize::MAX {
                level[w] = lv + 1;
                if levels.len() <= lv + 1 {
                    levels.push(Vec::new());
                }
                levels[lv + 1].push(w);
                queue.push_back(w);
            }
        }
    }
    levels
}

fn split(
    part: &[usize],
    adj: &[Vec<usize>],
    owner: &[usize],
    id: usize,
    level: &mut [usize],
) -> Option<(Vec<usize>, Vec<usize>, Vec<usize>)> {
    // Pseudo-peripheral root: restart from a minimum-degree vertex of the
    // last level until the eccentricity stops growing.
    let degree = |v: usize| adj[v].iter().filter(|&&w| owner[w] == id).count();
    let mut root = part[0];
    let mut levels = level_structure(root, part, adj, owner, id, level);
    for _ in 0..8 {
        let cand = *levels
            .last()
            .unwrap()
            .iter()
            .min_by_key(|&&v| (degree(v), v))
            .unwrap();
        let trial = level_structure(cand, part, adj, owner, id, level);
        if trial.len() > levels.len() {
            root = cand;
            levels = trial;
        } else {
            break;
        }
    }
    // `level` must reflect the structure we keep.
    let levels = level_structure(root, part, adj, owner, id, level);
    if levels.len() < 3 {
        return None;
    }
    let mid = levels.len() / 2;
    let mut sep = Vec::new();
    let mut a = Vec::new();
    for &v in &levels[mid] {
        if adj[v].iter().any(|&w| owner[w] == id && level[w] == mid + 1) {
            sep.push(v);
        } else {
            a.push(v);
        }
    }
    a.extend(levels[..mid].iter().flatten().copied());
    let b: Vec<usize> = levels[mid + 1..].iter().flatten().copied().collect();
    if a.is_empty() || b.is_empty() {
        return None;
    }
    Some((a, b, sep))
}
