//! Primal-dual interior point method for small dense semidefinite programs.
//!
//! Infeasible-start path following with the HKM search direction and a
//! Mehrotra predictor-corrector step. The primal is
//!
//! ```text
//! maximize <C, X>  subject to  <A_k, X> = b_k,  X ⪰ 0
//! ```
//!
//! and the dual is `minimize b·y` subject to `Σ y_k A_k - C = Z ⪰ 0`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use super::{Residuals, SolveReport, SolveStatus, SolverError};

/// Largest supported matrix dimension.
pub const MAX_SDP_DIM: usize = 64;
/// Relative gap and infeasibility target.
pub const SDP_TOLERANCE: f64 = 1e-9;
/// Accepted when the iteration stalls before reaching [`SDP_TOLERANCE`].
const SDP_STALL_TOLERANCE: f64 = 1e-7;
const MAX_ITERATIONS: usize = 200;

/// Symmetric matrix stored as upper-triangle entries `(i, j, v)` with `i <= j`.
/// Repeated positions accumulate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SparseSymmetric {
    pub dim: usize,
    pub entries: Vec<(usize, usize, f64)>,
}

impl SparseSymmetric {
    pub fn new(dim: usize) -> Self {
        SparseSymmetric {
            dim,
            entries: Vec::new(),
        }
    }

    pub fn identity(dim: usize) -> Self {
        SparseSymmetric {
            dim,
            entries: (0..dim).map(|i| (i, i, 1.0)).collect(),
        }
    }

    /// Sets both `(i, j)` and `(j, i)` to `value`.
    pub fn push(&mut self, i: usize, j: usize, value: f64) {
        self.entries.push((i.min(j), i.max(j), value));
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for &(i, j, v) in &self.entries {
            m[(i, j)] += v;
            if i != j {
                m[(j, i)] += v;
            }
        }
        m
    }

    /// Every nonzero position of the full matrix, both triangles.
    fn full_entries(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::with_capacity(2 * self.entries.len());
        for &(i, j, v) in &self.entries {
            out.push((i, j, v));
            if i != j {
                out.push((j, i, v));
            }
        }
        out
    }

    fn inner(&self, x: &DMatrix<f64>) -> f64 {
        self.entries
            .iter()
            .map(|&(i, j, v)| {
                if i == j {
                    v * x[(i, i)]
                } else {
                    2.0 * v * x[(i, j)]
                }
            })
            .sum()
    }

    fn frobenius(&self) -> f64 {
        self.to_dense().norm()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SemidefiniteProgram {
    pub objective: DMatrix<f64>,
    pub constraints: Vec<SparseSymmetric>,
    pub rhs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SdpSolution {
    /// Primal matrix, row-major.
    pub x: Vec<Vec<f64>>,
    pub y: Vec<f64>,
    pub dual_value: f64,
}

impl SemidefiniteProgram {
    pub fn dim(&self) -> usize {
        self.objective.nrows()
    }

    fn validate(&self) -> Result<(), SolverError> {
        let n = self.dim();
        if self.objective.ncols() != n {
            return Err(SolverError::Malformed("objective is not square".into()));
        }
        if n == 0 || n > MAX_SDP_DIM {
            return Err(SolverError::Malformed(format!(
                "dimension {n} outside 1..={MAX_SDP_DIM}"
            )));
        }
        if self.constraints.len() != self.rhs.len() {
            return Err(SolverError::Malformed(
                "constraint and rhs counts differ".into(),
            ));
        }
        if (self.objective.clone() - self.objective.transpose()).amax() > 0.0 {
            return Err(SolverError::Malformed("objective is not symmetric".into()));
        }
        for (k, a) in self.constraints.iter().enumerate() {
            if a.dim != n
                || a.entries
                    .iter()
                    .any(|&(i, j, v)| i >= n || j >= n || i > j || !v.is_finite())
            {
                return Err(SolverError::Malformed(format!(
                    "constraint {k} is malformed"
                )));
            }
        }
        if self
            .objective
            .iter()
            .chain(&self.rhs)
            .any(|v| !v.is_finite())
        {
            return Err(SolverError::Malformed("non-finite data".into()));
        }
        Ok(())
    }

    fn apply(&self, x: &DMatrix<f64>) -> DVector<f64> {
        DVector::from_iterator(
            self.constraints.len(),
            self.constraints.iter().map(|a| a.inner(x)),
        )
    }

    fn adjoint(&self, y: &DVector<f64>) -> DMatrix<f64> {
        let n = self.dim();
        let mut out = DMatrix::zeros(n, n);
        for (a, &yk) in self.constraints.iter().zip(y.iter()) {
            for &(i, j, v) in &a.entries {
                out[(i, j)] += yk * v;
                if i != j {
                    out[(j, i)] += yk * v;
                }
            }
        }
        out
    }
}

struct Direction {
    dx: DMatrix<f64>,
    dy: DVector<f64>,
    dz: DMatrix<f64>,
}

fn sym(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

fn inner(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.component_mul(b).sum()
}

/// Largest `alpha` with `m + alpha * d ⪰ 0`, given `m ≻ 0`.
fn max_step(m: &DMatrix<f64>, d: &DMatrix<f64>) -> Option<f64> {
    let chol = m.clone().cholesky()?;
    let l = chol.l();
    let left = l.solve_lower_triangular(d)?;
    let scaled = l.solve_lower_triangular(&left.transpose())?;
    let lambda_min = SymmetricEigen::new(sym(&scaled)).eigenvalues.min();
    Some(if lambda_min >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / lambda_min
    })
}

/// Solves `sdp` to [`SDP_TOLERANCE`] in relative gap and infeasibility.
pub fn solve_sdp(sdp: &SemidefiniteProgram) -> Result<SolveReport<SdpSolution>, SolverError> {
    sdp.validate()?;
    let n = sdp.dim();
    let m = sdp.constraints.len();
    let c = &sdp.objective;
    let b = DVector::from_column_slice(&sdp.rhs);
    let full: Vec<_> = sdp
        .constraints
        .iter()
        .map(SparseSymmetric::full_entries)
        .collect();

    let sqrt_n = (n as f64).sqrt();
    let xi = sdp
        .constraints
        .iter()
        .zip(&sdp.rhs)
        .map(|(a, bk)| sqrt_n * (1.0 + bk.abs()) / (1.0 + a.frobenius()))
        .fold(10f64.max(sqrt_n), f64::max);
    let eta = sdp
        .constraints
        .iter()
        .map(SparseSymmetric::frobenius)
        .fold(10f64.max(sqrt_n).max(c.norm()), f64::max);
    let mut x = DMatrix::identity(n, n) * xi;
    let mut z = DMatrix::identity(n, n) * eta;
    let mut y = DVector::zeros(m);

    let norm_b = 1.0 + b.norm();
    let norm_c = 1.0 + c.norm();
    let mut last = None;

    for iteration in 0..MAX_ITERATIONS {
        let rp = &b - sdp.apply(&x);
        let rd = c - sdp.adjoint(&y) + &z;
        let pobj = inner(c, &x);
        let dobj = b.dot(&y);
        let residuals = Residuals {
            primal: rp.norm() / norm_b,
            dual: rd.norm() / norm_c,
            gap: (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs()),
        };
        if residuals.max() < SDP_TOLERANCE {
            return Ok(report(&x, &y, pobj, dobj, iteration, residuals));
        }
        last = Some((residuals, pobj, dobj));

        let mu = inner(&x, &z) / n as f64;
        let Some(z_chol) = z.clone().cholesky() else {
            return stalled(&x, &y, last, iteration, "dual matrix lost definiteness");
        };
        let z_inv = z_chol.inverse();

        // Schur complement M_kl = tr(A_k X A_l Z^{-1}).
        let mut schur = DMatrix::zeros(m, m);
        for k in 0..m {
            for l in k..m {
                let mut v = 0.0;
                for &(p, q, a) in &full[k] {
                    for &(r, s, w) in &full[l] {
                        v += a * w * x[(q, r)] * z_inv[(s, p)];
                    }
                }
                schur[(k, l)] = v;
                schur[(l, k)] = v;
            }
        }
        let Some(schur_chol) = schur.cholesky() else {
            return stalled(
                &x,
                &y,
                last,
                iteration,
                "Schur complement is not positive definite",
            );
        };

        let direction = |target: f64, correction: Option<&DMatrix<f64>>| -> Direction {
            let mut g = &z_inv * target - &x + &x * &rd * &z_inv;
            if let Some(k) = correction {
                g -= k * &z_inv;
            }
            let rhs = sdp.apply(&sym(&g)) - &rp;
            let dy = schur_chol.solve(&rhs);
            let dz = sdp.adjoint(&dy) - &rd;
            let mut dx_full = &z_inv * target - &x - &x * &dz * &z_inv;
            if let Some(k) = correction {
                dx_full -= k * &z_inv;
            }
            Direction {
                dx: sym(&dx_full),
                dy,
                dz,
            }
        };

        let steps = |d: &Direction, gamma: f64| -> Option<(f64, f64)> {
            let ap = max_step(&x, &d.dx)?;
            let ad = max_step(&z, &d.dz)?;
            Some(((gamma * ap).min(1.0), (gamma * ad).min(1.0)))
        };

        let predictor = direction(0.0, None);
        let Some((ap, ad)) = steps(&predictor, 1.0) else {
            return stalled(&x, &y, last, iteration, "step length computation failed");
        };
        let mu_aff = inner(&(&x + &predictor.dx * ap), &(&z + &predictor.dz * ad)) / n as f64;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);
        let correction = &predictor.dx * &predictor.dz;
        let corrector = direction(sigma * mu, Some(&correction));
        let Some((ap, ad)) = steps(&corrector, 0.95) else {
            return stalled(&x, &y, last, iteration, "step length computation failed");
        };
        if ap.max(ad) < 1e-12 {
            return stalled(&x, &y, last, iteration, "step length collapsed");
        }
        x += &corrector.dx * ap;
        x = sym(&x);
        y += &corrector.dy * ad;
        z += &corrector.dz * ad;
        z = sym(&z);
    }
    stalled(&x, &y, last, MAX_ITERATIONS, "iteration limit reached")
}

fn report(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    pobj: f64,
    dobj: f64,
    iterations: usize,
    residuals: Residuals,
) -> SolveReport<SdpSolution> {
    SolveReport {
        status: SolveStatus::Optimal,
        value: pobj,
        solution: SdpSolution {
            x: x.row_iter().map(|r| r.iter().copied().collect()).collect(),
            y: y.iter().copied().collect(),
            dual_value: dobj,
        },
        iterations,
        residuals,
    }
}

/// Accepts the current iterate if it is close enough, otherwise fails.
fn stalled(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    last: Option<(Residuals, f64, f64)>,
    iterations: usize,
    reason: &str,
) -> Result<SolveReport<SdpSolution>, SolverError> {
    match last {
        Some((residuals, pobj, dobj)) if residuals.max() < SDP_STALL_TOLERANCE => {
            Ok(report(x, y, pobj, dobj, iterations, residuals))
        }
        _ => Err(SolverError::NumericalFailure {
            iterations,
            reason: reason.to_string(),
            residuals: last.map(|(r, _, _)| r),
        }),
    }
}
