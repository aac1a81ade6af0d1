//! Compressed-row sparse matrices and an envelope Cholesky factorization.

use std::collections::VecDeque;
use std::fmt::Write as _;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinearSolveError {
    #[error("matrix is not positive definite: pivot {pivot:e} at row {row}")]
    NotPositiveDefinite { row: usize, pivot: f64 },
    #[error("linear solve residual {residual:e} exceeds tolerance {tolerance:e}")]
    Inaccurate { residual: f64, tolerance: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("dense system is singular")]
    Singular,
}

/// Square sparse matrix in compressed-row layout with sorted column indices.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Sums duplicate entries. Duplicates are accumulated in input order, so the
    /// result is deterministic for a fixed triplet sequence.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut counts = vec![0usize; n + 1];
        for &(i, _, _) in triplets {
            counts[i + 1] += 1;
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut cols = vec![0usize; triplets.len()];
        let mut vals = vec![0.0; triplets.len()];
        for &(i, j, v) in triplets {
            cols[next[i]] = j;
            vals[next[i]] = v;
            next[i] += 1;
        }

        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        row_ptr.push(0);
        let mut order: Vec<usize> = Vec::new();
        for i in 0..n {
            let (lo, hi) = (counts[i], counts[i + 1]);
            order.clear();
            order.extend(lo..hi);
            // Stable sort keeps the accumulation order of duplicates fixed.
            order.sort_by_key(|&k| cols[k]);
            for &k in &order {
                if col_idx.len() > row_ptr[i] && *col_idx.last().unwrap() == cols[k] {
                    *values.last_mut().unwrap() += vals[k];
                } else {
                    col_idx.push(cols[k]);
                    values.push(vals[k]);
                }
            }
            row_ptr.push(col_idx.len());
        }
        CsrMatrix { n, row_ptr, col_idx, values }
    }

    pub fn identity(n: usize) -> Self {
        CsrMatrix { n, row_ptr: (0..=n).collect(), col_idx: (0..n).collect(), values: vec![1.0; n] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[r.clone()].binary_search(&j) {
            Ok(k) => self.values[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        (0..self.n).flat_map(|i| self.row(i).map(move |(j, v)| (i, j, v))).collect()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        (0..self.n).map(|i| self.row(i).map(|(j, v)| v * x[j]).sum()).collect()
    }

    /// `x^T A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        assert_eq!(x.len(), self.n);
        (0..self.n).map(|i| x[i] * self.row(i).map(|(j, v)| v * y[j]).sum::<f64>()).sum()
    }

    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        self.bilinear(x, x)
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| self.row(i).all(|(j, v)| self.get(j, i) == v))
    }

    /// Entry-wise sum of two matrices of equal dimension.
    pub fn add(&self, other: &CsrMatrix) -> CsrMatrix {
        assert_eq!(self.n, other.n);
        let mut t = self.triplets();
        t.extend(other.triplets());
        CsrMatrix::from_triplets(self.n, &t)
    }

    /// Zeroes the rows and columns of `dofs` and puts `diagonal` on their diagonal.
    pub fn constrain(&self, is_constrained: impl Fn(usize) -> bool, diagonal: f64) -> CsrMatrix {
        let mut t: Vec<_> =
            self.triplets().into_iter().filter(|&(i, j, _)| !is_constrained(i) && !is_constrained(j)).collect();
        for i in 0..self.n {
            if is_constrained(i) && diagonal != 0.0 {
                t.push((i, i, diagonal));
            }
        }
        CsrMatrix::from_triplets(self.n, &t)
    }

    /// Plain-text `i j value` listing, one entry per line.
    pub fn to_triplet_text(&self) -> String {
        let mut s = String::new();
        for (i, j, v) in self.triplets() {
            writeln!(s, "{i} {j} {v:e}").unwrap();
        }
        s
    }
}

/// Reverse Cuthill-McKee ordering of the graph of `matrix` restricted to `subset`.
/// Returns positions into `subset`.
fn reverse_cuthill_mckee(matrix: &CsrMatrix, subset: &[usize]) -> Vec<usize> {
    let n = matrix.dim();
    let mut local = vec![usize::MAX; n];
    for (k, &g) in subset.iter().enumerate() {
        local[g] = k;
    }
    let m = subset.len();
    let adj: Vec<Vec<usize>> = subset
        .iter()
        .map(|&g| matrix.row(g).filter_map(|(j, _)| (local[j] != usize::MAX && j != g).then_some(local[j])).collect())
        .collect();
    let degree: Vec<usize> = adj.iter().map(Vec::len).collect();

    // Breadth-first sweep appending to `order`; returns a minimum-degree vertex
    // of the deepest level.
    let bfs_levels = |start: usize, seen: &mut Vec<bool>, order: &mut Vec<usize>| -> usize {
        let mut queue = VecDeque::from([(start, 0usize)]);
        seen[start] = true;
        order.push(start);
        let mut deepest = (0usize, start);
        while let Some((v, level)) = queue.pop_front() {
            if level > deepest.0 || (level == deepest.0 && (degree[v], v) < (degree[deepest.1], deepest.1)) {
                deepest = (level, v);
            }
            let mut nbrs: Vec<usize> = adj[v].iter().copied().filter(|&w| !seen[w]).collect();
            nbrs.sort_by_key(|&w| (degree[w], w));
            for w in nbrs {
                seen[w] = true;
                order.push(w);
                queue.push_back((w, level + 1));
            }
        }
        deepest.1
    };

    let mut seen = vec![false; m];
    let mut order = Vec::with_capacity(m);
    for root in 0..m {
        if seen[root] {
            continue;
        }
        // Two sweeps to find a pseudo-peripheral start vertex.
        let mut scratch_seen = seen.clone();
        let mut scratch = Vec::new();
        let far = bfs_levels(root, &mut scratch_seen, &mut scratch);
        bfs_levels(far, &mut seen, &mut order);
    }
    order.reverse();
    order
}

/// Envelope (skyline) Cholesky factorization `P A P^T = L L^T` of the
/// principal submatrix of a sparse SPD matrix selected by `subset`.
#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    n: usize,
    /// Global index of each factor row.
    global: Vec<usize>,
    /// First stored column of each row.
    first: Vec<usize>,
    /// Start of each row in `data`; row `i` holds columns `first[i]..=i`.
    offset: Vec<usize>,
    data: Vec<f64>,
}

impl CholeskyFactor {
    pub fn new(matrix: &CsrMatrix) -> Result<Self, LinearSolveError> {
        let all: Vec<usize> = (0..matrix.dim()).collect();
        Self::for_subset(matrix, &all)
    }

    pub fn for_subset(matrix: &CsrMatrix, subset: &[usize]) -> Result<Self, LinearSolveError> {
        let n = matrix.dim();
        let perm = reverse_cuthill_mckee(matrix, subset);
        let global: Vec<usize> = perm.iter().map(|&k| subset[k]).collect();
        let mut position = vec![usize::MAX; n];
        for (p, &g) in global.iter().enumerate() {
            position[g] = p;
        }
        let m = global.len();

        let mut first = vec![0usize; m];
        for (p, &g) in global.iter().enumerate() {
            first[p] = matrix
                .row(g)
                .filter_map(|(j, _)| (position[j] != usize::MAX).then_some(position[j]))
                .filter(|&q| q <= p)
                .min()
                .unwrap_or(p);
        }
        let mut offset = Vec::with_capacity(m + 1);
        offset.push(0);
        for p in 0..m {
            offset.push(offset[p] + (p - first[p] + 1));
        }
        let mut data = vec![0.0; offset[m]];
        for (p, &g) in global.iter().enumerate() {
            for (j, v) in matrix.row(g) {
                let q = position[j];
                if q != usize::MAX && q <= p {
                    data[offset[p] + q - first[p]] = v;
                }
            }
        }

        for i in 0..m {
            let fi = first[i];
            for j in fi..=i {
                let fj = first[j];
                let start = fi.max(fj);
                let (row_i, rest) = (offset[i], offset[j]);
                let mut s = data[row_i + j - fi];
                for k in start..j {
                    s -= data[row_i + k - fi] * data[rest + k - fj];
                }
                if j < i {
                    s /= data[offset[j] + j - fj];
                    data[row_i + j - fi] = s;
                } else {
                    if !(s > 0.0) || !s.is_finite() {
                        return Err(LinearSolveError::NotPositiveDefinite { row: global[i], pivot: s });
                    }
                    data[row_i + i - fi] = s.sqrt();
                }
            }
        }
        Ok(CholeskyFactor { n, global, first, offset, data })
    }

    /// Number of unknowns in the factorized subset.
    pub fn size(&self) -> usize {
        self.global.len()
    }

    /// Solves the subset system. `rhs` is full-length; entries outside the subset
    /// are ignored and come back as zero.
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        assert_eq!(rhs.len(), self.n);
        let m = self.global.len();
        let mut y: Vec<f64> = self.global.iter().map(|&g| rhs[g]).collect();
        for i in 0..m {
            let fi = self.first[i];
            let row = &self.data[self.offset[i]..self.offset[i + 1]];
            let mut s = y[i];
            for k in fi..i {
                s -= row[k - fi] * y[k];
            }
            y[i] = s / row[i - fi];
        }
        for i in (0..m).rev() {
            let fi = self.first[i];
            let row = &self.data[self.offset[i]..self.offset[i + 1]];
            y[i] /= row[i - fi];
            let yi = y[i];
            for k in fi..i {
                y[k] -= row[k - fi] * yi;
            }
        }
        let mut out = vec![0.0; self.n];
        for (p, &g) in self.global.iter().enumerate() {
            out[g] = y[p];
        }
        out
    }
}

pub fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// Solves `op x = rhs` for a symmetric positive definite `op`, with one step of
/// iterative refinement. Fails if the residual exceeds `1e-10 * |rhs|`.
pub fn solve_linear_spd(op: &CsrMatrix, rhs: &[f64]) -> Result<Vec<f64>, LinearSolveError> {
    if rhs.len() != op.dim() {
        return Err(LinearSolveError::Dimension { expected: op.dim(), got: rhs.len() });
    }
    let factor = CholeskyFactor::new(op)?;
    let mut x = factor.solve(rhs);
    let residual = |x: &[f64]| -> Vec<f64> { op.mul_vec(x).iter().zip(rhs).map(|(ax, b)| b - ax).collect() };
    let r = residual(&x);
    let correction = factor.solve(&r);
    for (xi, ci) in x.iter_mut().zip(&correction) {
        *xi += ci;
    }
    let res = norm2(&residual(&x));
    let tolerance = 1e-10 * norm2(rhs);
    if res > tolerance {
        return Err(LinearSolveError::Inaccurate { residual: res, tolerance });
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_1d(n: usize) -> CsrMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        CsrMatrix::from_triplets(n, &t)
    }

    #[test]
    fn triplets_are_summed() {
        let a = CsrMatrix::from_triplets(2, &[(0, 0, 1.0), (0, 1, 2.0), (0, 0, 3.0), (1, 1, 1.0)]);
        assert_eq!(a.get(0, 0), 4.0);
        assert_eq!(a.get(0, 1), 2.0);
        assert_eq!(a.get(1, 0), 0.0);
        assert_eq!(a.nnz(), 3);
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let a = laplacian_1d(10);
        let x = solve_linear_spd(&a, &[0.0; 10]).unwrap();
        assert!(x.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn identity_returns_rhs() {
        let rhs: Vec<f64> = (0..7).map(|i| i as f64 - 3.5).collect();
        let x = solve_linear_spd(&CsrMatrix::identity(7), &rhs).unwrap();
        assert_eq!(x, rhs);
    }

    #[test]
    fn indefinite_is_rejected() {
        let a = CsrMatrix::from_triplets(2, &[(0, 0, 1.0), (0, 1, 2.0), (1, 0, 2.0), (1, 1, 1.0)]);
        assert!(matches!(solve_linear_spd(&a, &[1.0, 1.0]), Err(LinearSolveError::NotPositiveDefinite { .. })));
    }

    #[test]
    fn subset_factor_matches_full_solve() {
        let a = laplacian_1d(12);
        let subset: Vec<usize> = (2..9).collect();
        let f = CholeskyFactor::for_subset(&a, &subset).unwrap();
        let mut rhs = vec![0.0; 12];
        for &i in &subset {
            rhs[i] = (i as f64).sin();
        }
        let x = f.solve(&rhs);
        let ax = a.mul_vec(&x);
        for &i in &subset {
            assert!((ax[i] - rhs[i]).abs() < 1e-12);
        }
        assert!(x[0] == 0.0 && x[11] == 0.0);
    }

    #[test]
    fn multiply_then_solve_round_trip() {
        // Periodic-plus-shift stencil gives a non-banded graph for the ordering.
        let n = 40;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 4.5));
            let j = (i + 1) % n;
            let k = (i + 7) % n;
            for &(a, b) in &[(i, j), (i, k)] {
                t.push((a, b, -1.0));
                t.push((b, a, -1.0));
            }
        }
        let a = CsrMatrix::from_triplets(n, &t);
        assert!(a.is_symmetric());
        let truth: Vec<f64> = (0..n).map(|i| (0.3 * i as f64).cos() + 0.1 * i as f64).collect();
        let rhs = a.mul_vec(&truth);
        let x = solve_linear_spd(&a, &rhs).unwrap();
        let err = norm2(&x.iter().zip(&truth).map(|(a, b)| a - b).collect::<Vec<_>>());
        assert!(err / norm2(&truth) < 1e-8);
    }
}
