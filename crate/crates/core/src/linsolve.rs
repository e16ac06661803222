//! Sparse linear solvers: faer direct factorizations used as (possibly
//! stale) preconditioners for restarted GMRES.

use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::cholesky::ldlt::factor::LdltRegularization;
use faer::prelude::*;
use faer::sparse::linalg::cholesky::{factorize_symbolic_cholesky, LdltRef, SymbolicCholesky, SymmetricOrdering};
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::{SparseColMatRef, SymbolicSparseColMatRef};
use faer::{Conj, Mat, Par, Side};

use crate::error::{Error, Result};
use crate::sparse::{dot, norm2, CsrMatrix};

/// Number of worker threads, read from `DFHEAT_THREADS` (default 1).
pub fn thread_count() -> usize {
    std::env::var("DFHEAT_THREADS").ok().and_then(|s| s.parse::<usize>().ok()).filter(|&n| n > 0).unwrap_or(1)
}

fn parallelism() -> Par {
    match thread_count() {
        1 => Par::Seq,
        n => Par::rayon(n),
    }
}

pub trait Preconditioner {
    /// Returns an approximation of `A⁻¹ r`.
    fn apply(&self, r: &[f64]) -> Vec<f64>;
}

/// Identity preconditioner.
pub struct NoPreconditioner;

impl Preconditioner for NoPreconditioner {
    fn apply(&self, r: &[f64]) -> Vec<f64> {
        r.to_vec()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct GmresParams {
    pub rel_tol: f64,
    pub restart: usize,
    pub max_iter: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct GmresOutcome {
    pub iterations: usize,
    pub rel_residual: f64,
    pub converged: bool,
}

/// Iterations over which the residual estimate must at least halve.
const STALL_WINDOW: usize = 8;

/// Right-preconditioned restarted GMRES. `x` holds the initial guess and
/// receives the solution; convergence is judged on the true residual.
/// Stops early once the residual stagnates.
pub fn gmres(a: &CsrMatrix, b: &[f64], x: &mut [f64], prec: &dyn Preconditioner, params: GmresParams) -> GmresOutcome {
    let n = b.len();
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return GmresOutcome { iterations: 0, rel_residual: 0.0, converged: true };
    }
    let m = params.restart.max(1);
    let mut total = 0;
    let mut ax = vec![0.0; n];
    let mut previous = f64::INFINITY;
    loop {
        a.mul_vec_into(x, &mut ax);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        let beta = norm2(&r);
        let rel = beta / bnorm;
        // A restart cycle that gained less than a factor 2 has hit the round-off floor.
        if rel <= params.rel_tol || total >= params.max_iter || rel > 0.5 * previous {
            return GmresOutcome { iterations: total, rel_residual: rel, converged: rel <= params.rel_tol };
        }
        previous = rel;
        let mut v: Vec<Vec<f64>> = vec![r.iter().map(|ri| ri / beta).collect()];
        let mut z: Vec<Vec<f64>> = Vec::with_capacity(m);
        let mut h = vec![vec![0.0; m]; m + 1];
        let (mut cs, mut sn) = (vec![0.0; m], vec![0.0; m]);
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut k_used = 0;
        for k in 0..m {
            let zk = prec.apply(&v[k]);
            let mut w = a.mul_vec(&zk);
            z.push(zk);
            for _pass in 0..2 {
                for i in 0..=k {
                    let hij = dot(&w, &v[i]);
                    h[i][k] += hij;
                    for (wj, vj) in w.iter_mut().zip(&v[i]) {
                        *wj -= hij * vj;
                    }
                }
            }
            let hn = norm2(&w);
            h[k + 1][k] = hn;
            for i in 0..k {
                let t = cs[i] * h[i][k] + sn[i] * h[i + 1][k];
                h[i + 1][k] = -sn[i] * h[i][k] + cs[i] * h[i + 1][k];
                h[i][k] = t;
            }
            let denom = (h[k][k] * h[k][k] + h[k + 1][k] * h[k + 1][k]).sqrt();
            if denom == 0.0 {
                cs[k] = 1.0;
                sn[k] = 0.0;
            } else {
                cs[k] = h[k][k] / denom;
                sn[k] = h[k + 1][k] / denom;
            }
            h[k][k] = cs[k] * h[k][k] + sn[k] * h[k + 1][k];
            h[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            k_used = k + 1;
            total += 1;
            // Stop slightly below the target so the true residual check passes.
            let stalled = k >= STALL_WINDOW && g[k + 1].abs() > 0.5 * g[k - STALL_WINDOW].abs();
            if g[k + 1].abs() / bnorm <= 0.5 * params.rel_tol || hn == 0.0 || total >= params.max_iter || stalled {
                break;
            }
            v.push(w.iter().map(|wi| wi / hn).collect());
        }
        let mut y = vec![0.0; k_used];
        for i in (0..k_used).rev() {
            let mut s = g[i];
            for j in i + 1..k_used {
                s -= h[i][j] * y[j];
            }
            y[i] = if h[i][i] != 0.0 { s / h[i][i] } else { 0.0 };
        }
        for (j, zj) in z.iter().enumerate().take(k_used) {
            for (xi, zi) in x.iter_mut().zip(zj) {
                *xi += y[j] * zi;
            }
        }
        if k_used == 0 {
            return GmresOutcome { iterations: total, rel_residual: rel, converged: false };
        }
    }
}

fn csc_view<'a>(indptr: &'a [usize], indices: &'a [usize], values: &'a [f64], n: usize, m: usize) -> SparseColMatRef<'a, usize, f64> {
    SparseColMatRef::new(SymbolicSparseColMatRef::new_checked(n, m, indptr, None, indices), values)
}

/// Numeric factorization usable as a preconditioner.
pub enum Factorization {
    Ldlt { symbolic: std::sync::Arc<SymbolicCholesky<usize>>, values: Vec<f64> },
    Lu(Box<Lu<usize, f64>>),
}

impl Preconditioner for Factorization {
    fn apply(&self, r: &[f64]) -> Vec<f64> {
        let n = r.len();
        let mut rhs = Mat::<f64>::from_fn(n, 1, |i, _| r[i]);
        match self {
            Factorization::Ldlt { symbolic, values } => {
                let par = parallelism();
                let mut mem = MemBuffer::new(symbolic.solve_in_place_scratch::<f64>(1, par));
                let stack = MemStack::new(&mut mem);
                LdltRef::new(symbolic, values).solve_in_place_with_conj(Conj::No, rhs.as_mut(), par, stack);
            }
            Factorization::Lu(lu) => {
                lu.solve_in_place(rhs.as_mut());
            }
        }
        (0..n).map(|i| rhs[(i, 0)]).collect()
    }
}

/// Structure of the systems handled by a [`ReusableSolver`].
#[derive(Clone, Debug)]
pub enum SystemKind {
    /// Symmetric quasi-definite matrix; `signs[i]` is the expected sign of
    /// pivot `i` (+1 primal, −1 dual).
    QuasiDefinite { signs: Vec<i8> },
    /// General nonsymmetric matrix.
    General,
}

#[derive(Clone, Copy, Debug)]
pub struct LinearSolverConfig {
    /// Target relative residual `‖b − Ax‖ / ‖b‖`.
    pub rel_tol: f64,
    pub restart: usize,
    /// Iteration budget with a freshly computed factorization.
    pub max_iter: usize,
    /// Iteration budget before a stale factorization is replaced.
    pub stale_max_iter: usize,
    /// A stale solve needing more iterations than this refactorizes on the next call.
    pub refresh_iter: usize,
    /// Residual accepted, with a warning, when a fresh factorization
    /// stagnates above `rel_tol` (round-off floor of ill-conditioned systems).
    pub accept_tol: f64,
}

impl Default for LinearSolverConfig {
    fn default() -> Self {
        LinearSolverConfig { rel_tol: 1e-12, restart: 60, max_iter: 300, stale_max_iter: 30, refresh_iter: 8, accept_tol: 1e-9 }
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct SolverStats {
    pub solves: usize,
    pub factorizations: usize,
    pub gmres_iterations: usize,
    pub last_rel_residual: f64,
}

/// Direct-preconditioned GMRES that keeps its last factorization and
/// reuses it for later matrices with the same sparsity pattern until it
/// stops being an effective preconditioner.
pub struct ReusableSolver {
    kind: SystemKind,
    config: LinearSolverConfig,
    pattern: Option<(Vec<usize>, Vec<usize>)>,
    symbolic_ldlt: Option<std::sync::Arc<SymbolicCholesky<usize>>>,
    symbolic_lu: Option<SymbolicLu<usize>>,
    factor: Option<Factorization>,
    pub stats: SolverStats,
    /// Attainable relative residual seen with a fresh factorization, when above the target.
    floor: f64,
}

impl ReusableSolver {
    pub fn new(kind: SystemKind, config: LinearSolverConfig) -> ReusableSolver {
        ReusableSolver {
            kind,
            config,
            pattern: None,
            symbolic_ldlt: None,
            symbolic_lu: None,
            factor: None,
            floor: 0.0,
            stats: SolverStats::default(),
        }
    }

    /// Drops the stored factorization.
    pub fn invalidate(&mut self) {
        self.factor = None;
    }

    pub fn solve(&mut self, a: &CsrMatrix, b: &[f64], x0: Option<&[f64]>) -> Result<Vec<f64>> {
        if a.n_rows != a.n_cols || a.n_rows != b.len() {
            return Err(Error::InvalidArgument("linear system dimensions do not match".into()));
        }
        self.stats.solves += 1;
        let same_pattern = matches!(&self.pattern, Some((p, i)) if *p == a.indptr && *i == a.indices);
        if !same_pattern {
            self.symbolic_ldlt = None;
            self.symbolic_lu = None;
            self.factor = None;
            self.floor = 0.0;
            self.pattern = Some((a.indptr.clone(), a.indices.clone()));
        }
        let mut x = match x0 {
            Some(v) => v.to_vec(),
            None => vec![0.0; b.len()],
        };
        if let Some(f) = &self.factor {
            let mut trial = x.clone();
            let out = gmres(
                a,
                b,
                &mut trial,
                f,
                GmresParams { rel_tol: self.config.rel_tol, restart: self.config.restart, max_iter: self.config.stale_max_iter },
            );
            log::debug!("stale solve: {} iterations, residual {:.2e}", out.iterations, out.rel_residual);
            self.stats.gmres_iterations += out.iterations;
            if out.converged || out.rel_residual <= 2.0 * self.floor {
                self.stats.last_rel_residual = out.rel_residual;
                if out.iterations > self.config.refresh_iter {
                    self.factor = None;
                }
                return Ok(trial);
            }
        }
        self.factorize(a)?;
        let f = self.factor.as_ref().unwrap();
        let out = gmres(
            a,
            b,
            &mut x,
            f,
            GmresParams { rel_tol: self.config.rel_tol, restart: self.config.restart, max_iter: self.config.max_iter },
        );
        self.stats.gmres_iterations += out.iterations;
        self.stats.last_rel_residual = out.rel_residual;
        if !out.converged && out.rel_residual <= self.config.accept_tol {
            self.floor = out.rel_residual;
            log::warn!("linear solve stagnated at relative residual {:.3e}", out.rel_residual);
        } else if !out.converged {
            return Err(Error::LinearSolver(format!(
                "relative residual {:.3e} after {} iterations (target {:.1e})",
                out.rel_residual, out.iterations, self.config.rel_tol
            )));
        }
        Ok(x)
    }

    fn factorize(&mut self, a: &CsrMatrix) -> Result<()> {
        self.stats.factorizations += 1;
        self.factor = None;
        let n = a.n_rows;
        let par = parallelism();
        match &self.kind {
            SystemKind::QuasiDefinite { signs } => {
                // The CSR arrays of the lower triangle read as CSC give the upper triangle.
                let lower = a.lower();
                let mat = csc_view(&lower.indptr, &lower.indices, &lower.values, n, n);
                if self.symbolic_ldlt.is_none() {
                    let sym = factorize_symbolic_cholesky(mat.symbolic(), Side::Upper, SymmetricOrdering::Amd, Default::default())
                        .map_err(|e| Error::Singular(format!("symbolic factorization failed: {e:?}")))?;
                    self.symbolic_ldlt = Some(std::sync::Arc::new(sym));
                }
                let symbolic = self.symbolic_ldlt.clone().unwrap();
                let scale = a.diagonal().iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
                log::debug!("LDLT: n {n}, matrix nnz {}, factor nnz {}", lower.values.len(), symbolic.len_val());
                let mut values = vec![0.0; symbolic.len_val()];
                let req = symbolic.factorize_numeric_ldlt_scratch::<f64>(par, Default::default());
                let mut mem = MemBuffer::new(req);
                let stack = MemStack::new(&mut mem);
                let reg = LdltRegularization {
                    dynamic_regularization_signs: Some(signs),
                    dynamic_regularization_delta: 1e-10 * scale,
                    dynamic_regularization_epsilon: 1e-13 * scale,
                };
                symbolic
                    .factorize_numeric_ldlt(&mut values, mat, Side::Upper, reg, par, stack, Default::default())
                    .map_err(|e| Error::Singular(format!("LDLT factorization failed: {e:?}")))?;
                self.factor = Some(Factorization::Ldlt { symbolic, values });
            }
            SystemKind::General => {
                let t = a.transpose();
                let mat = csc_view(&t.indptr, &t.indices, &t.values, n, n);
                if self.symbolic_lu.is_none() {
                    let sym = SymbolicLu::try_new(mat.symbolic()).map_err(|e| Error::Singular(format!("symbolic LU failed: {e:?}")))?;
                    self.symbolic_lu = Some(sym);
                }
                let lu = Lu::try_new_with_symbolic(self.symbolic_lu.clone().unwrap(), mat)
                    .map_err(|e| Error::Singular(format!("LU factorization failed: {e:?}")))?;
                self.factor = Some(Factorization::Lu(Box::new(lu)));
            }
        }
        Ok(())
    }
}

/// One-shot solve with a fresh factorization.
pub fn solve_general(a: &CsrMatrix, b: &[f64], rel_tol: f64) -> Result<Vec<f64>> {
    let mut s = ReusableSolver::new(SystemKind::General, LinearSolverConfig { rel_tol, ..Default::default() });
    s.solve(a, b, None)
}

/// One-shot solve of a symmetric quasi-definite system.
pub fn solve_quasi_definite(a: &CsrMatrix, signs: Vec<i8>, b: &[f64], rel_tol: f64) -> Result<Vec<f64>> {
    let mut s = ReusableSolver::new(SystemKind::QuasiDefinite { signs }, LinearSolverConfig { rel_tol, ..Default::default() });
    s.solve(a, b, None)
}
