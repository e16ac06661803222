//! Compressed sparse row matrices and triplet accumulation.

/// Unsorted `(row, col, value)` triplets; duplicates are summed on conversion.
#[derive(Clone, Debug, Default)]
pub struct Triplets {
    pub n_rows: usize,
    pub n_cols: usize,
    rows: Vec<u32>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

impl Triplets {
    pub fn new(n_rows: usize, n_cols: usize) -> Triplets {
        assert!(n_rows < u32::MAX as usize && n_cols < u32::MAX as usize);
        Triplets { n_rows, n_cols, ..Default::default() }
    }

    #[inline]
    pub fn push(&mut self, r: usize, c: usize, v: f64) {
        debug_assert!(r < self.n_rows && c < self.n_cols);
        self.rows.push(r as u32);
        self.cols.push(c as u32);
        self.vals.push(v);
    }

    /// Adds a dense block `block[i * cols.len() + j]` at `(rows[i], cols[j])`.
    /// Zero entries are kept so that the sparsity pattern depends only on
    /// the mesh and the spaces.
    pub fn push_block(&mut self, rows: &[usize], cols: &[usize], block: &[f64]) {
        let nc = cols.len();
        for (i, &r) in rows.iter().enumerate() {
            for (j, &c) in cols.iter().enumerate() {
                self.push(r, c, block[i * nc + j]);
            }
        }
    }

    pub fn len(&self) -> usize {
        self.vals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vals.is_empty()
    }

    pub fn to_csr(&self) -> CsrMatrix {
        let n = self.n_rows;
        let mut count = vec![0usize; n + 1];
        for &r in &self.rows {
            count[r as usize + 1] += 1;
        }
        for i in 0..n {
            count[i + 1] += count[i];
        }
        let mut next = count.clone();
        let mut cols = vec![0u32; self.vals.len()];
        let mut vals = vec![0.0; self.vals.len()];
        for t in 0..self.vals.len() {
            let r = self.rows[t] as usize;
            cols[next[r]] = self.cols[t];
            vals[next[r]] = self.vals[t];
            next[r] += 1;
        }
        let mut indptr = Vec::with_capacity(n + 1);
        let mut indices = Vec::with_capacity(self.vals.len());
        let mut values = Vec::with_capacity(self.vals.len());
        indptr.push(0);
        let mut perm: Vec<usize> = Vec::new();
        for r in 0..n {
            let (a, b) = (count[r], count[r + 1]);
            perm.clear();
            perm.extend(a..b);
            perm.sort_unstable_by_key(|&t| cols[t]);
            let mut last = u32::MAX;
            for &t in &perm {
                if cols[t] == last {
                    *values.last_mut().unwrap() += vals[t];
                } else {
                    indices.push(cols[t] as usize);
                    values.push(vals[t]);
                    last = cols[t];
                }
            }
            indptr.push(indices.len());
        }
        CsrMatrix { n_rows: n, n_cols: self.n_cols, indptr, indices, values }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    pub n_rows: usize,
    pub n_cols: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    pub fn zeros(n_rows: usize, n_cols: usize) -> CsrMatrix {
        CsrMatrix { n_rows, n_cols, indptr: vec![0; n_rows + 1], indices: Vec::new(), values: Vec::new() }
    }

    pub fn identity(n: usize) -> CsrMatrix {
        CsrMatrix { n_rows: n, n_cols: n, indptr: (0..=n).collect(), indices: (0..n).collect(), values: vec![1.0; n] }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (a, b) = (self.indptr[i], self.indptr[i + 1]);
        (&self.indices[a..b], &self.values[a..b])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (idx, val) = self.row(i);
        match idx.binary_search(&j) {
            Ok(p) => val[p],
            Err(_) => 0.0,
        }
    }

    /// `y = A x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n_rows];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.n_rows) {
            let (idx, val) = self.row(i);
            *yi = idx.iter().zip(val).map(|(&j, &v)| v * x[j]).sum();
        }
    }

    /// `xᵀ A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        (0..self.n_rows)
            .map(|i| {
                let (idx, val) = self.row(i);
                x[i] * idx.iter().zip(val).map(|(&j, &v)| v * y[j]).sum::<f64>()
            })
            .sum()
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut count = vec![0usize; self.n_cols + 1];
        for &j in &self.indices {
            count[j + 1] += 1;
        }
        for j in 0..self.n_cols {
            count[j + 1] += count[j];
        }
        let mut next = count.clone();
        let mut indices = vec![0; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for i in 0..self.n_rows {
            let (idx, val) = self.row(i);
            for (&j, &v) in idx.iter().zip(val) {
                indices[next[j]] = i;
                values[next[j]] = v;
                next[j] += 1;
            }
        }
        CsrMatrix { n_rows: self.n_cols, n_cols: self.n_rows, indptr: count, indices, values }
    }

    /// `a A + b B` with the union sparsity pattern.
    pub fn add(&self, a: f64, other: &CsrMatrix, b: f64) -> CsrMatrix {
        assert_eq!((self.n_rows, self.n_cols), (other.n_rows, other.n_cols));
        let mut indptr = Vec::with_capacity(self.n_rows + 1);
        let mut indices = Vec::with_capacity(self.nnz().max(other.nnz()));
        let mut values = Vec::with_capacity(self.nnz().max(other.nnz()));
        indptr.push(0);
        for i in 0..self.n_rows {
            let (ia, va) = self.row(i);
            let (ib, vb) = other.row(i);
            let (mut p, mut q) = (0, 0);
            while p < ia.len() || q < ib.len() {
                if q >= ib.len() || (p < ia.len() && ia[p] < ib[q]) {
                    indices.push(ia[p]);
                    values.push(a * va[p]);
                    p += 1;
                } else if p >= ia.len() || ib[q] < ia[p] {
                    indices.push(ib[q]);
                    values.push(b * vb[q]);
                    q += 1;
                } else {
                    indices.push(ia[p]);
                    values.push(a * va[p] + b * vb[q]);
                    p += 1;
                    q += 1;
                }
            }
            indptr.push(indices.len());
        }
        CsrMatrix { n_rows: self.n_rows, n_cols: self.n_cols, indptr, indices, values }
    }

    pub fn scale(&mut self, s: f64) {
        for v in self.values.iter_mut() {
            *v *= s;
        }
    }

    /// Assembles a block matrix; `None` entries are zero blocks. Every block
    /// row and column must contain at least one block fixing its size, or
    /// be given through `row_sizes` / `col_sizes`.
    pub fn block(blocks: &[Vec<Option<&CsrMatrix>>], row_sizes: &[usize], col_sizes: &[usize]) -> CsrMatrix {
        let row_off: Vec<usize> = std::iter::once(0)
            .chain(row_sizes.iter().scan(0, |s, &x| {
                *s += x;
                Some(*s)
            }))
            .collect();
        let col_off: Vec<usize> = std::iter::once(0)
            .chain(col_sizes.iter().scan(0, |s, &x| {
                *s += x;
                Some(*s)
            }))
            .collect();
        let n_rows = *row_off.last().unwrap();
        let n_cols = *col_off.last().unwrap();
        let nnz: usize = blocks.iter().flatten().flatten().map(|m| m.nnz()).sum();
        let mut indptr = Vec::with_capacity(n_rows + 1);
        let mut indices = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        indptr.push(0);
        for (bi, brow) in blocks.iter().enumerate() {
            for i in 0..row_sizes[bi] {
                for (bj, blk) in brow.iter().enumerate() {
                    if let Some(m) = blk {
                        assert_eq!((m.n_rows, m.n_cols), (row_sizes[bi], col_sizes[bj]), "block ({bi},{bj}) has wrong shape");
                        let (idx, val) = m.row(i);
                        for (&j, &v) in idx.iter().zip(val) {
                            indices.push(col_off[bj] + j);
                            values.push(v);
                        }
                    }
                }
                indptr.push(indices.len());
            }
        }
        CsrMatrix { n_rows, n_cols, indptr, indices, values }
    }

    /// Largest `|A_ij − A_ji|`.
    pub fn max_asymmetry(&self) -> f64 {
        let t = self.transpose();
        let d = self.add(1.0, &t, -1.0);
        d.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n_rows.min(self.n_cols)).map(|i| self.get(i, i)).collect()
    }

    /// Lower triangle including the diagonal.
    pub fn lower(&self) -> CsrMatrix {
        let mut indptr = vec![0];
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for i in 0..self.n_rows {
            let (idx, val) = self.row(i);
            for (&j, &v) in idx.iter().zip(val) {
                if j <= i {
                    indices.push(j);
                    values.push(v);
                }
            }
            indptr.push(indices.len());
        }
        CsrMatrix { n_rows: self.n_rows, n_cols: self.n_cols, indptr, indices, values }
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n_cols]; self.n_rows];
        for (i, row) in d.iter_mut().enumerate() {
            let (idx, val) = self.row(i);
            for (&j, &v) in idx.iter().zip(val) {
                row[j] += v;
            }
        }
        d
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
