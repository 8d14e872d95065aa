//! Local-realistic, exclusivity-principle and quantum bounds on weighted
//! exclusivity graphs.
//!
//! For a weighted graph the three bounds are ordered
//! `independence_number <= lovasz_theta <= fractional_packing`.
//! Each [`BoundReport`] carries a certificate that [`BoundReport::verify`]
//! checks against the graph without re-running the optimization.

mod cliques;
mod independence;

pub use cliques::{maximal_cliques, TooManyCliques};
pub use independence::{max_weight_independent_set, MAX_INDEPENDENCE_VERTICES};

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;
use thiserror::Error;

use crate::graph::ExclusivityGraph;
use crate::solvers::{
    solve_lp, solve_sdp, LinearProgram, Residuals, SemidefiniteProgram, SolverError,
    SparseSymmetric, LP_TOLERANCE,
};

/// Largest graph handled by [`fractional_packing`].
pub const MAX_PACKING_VERTICES: usize = 300;
/// Largest graph handled by [`lovasz_theta`].
pub const MAX_THETA_VERTICES: usize = 64;
/// Maximal clique count at which [`fractional_packing`] gives up.
pub const MAX_CLIQUES: usize = 1_000_000;
/// Accuracy contract of [`lovasz_theta`].
pub const THETA_TOLERANCE: f64 = 1e-5;
/// Smallest eigenvalue accepted for a theta certificate matrix.
pub const PSD_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BoundMethod {
    #[serde(rename = "lr")]
    LocalRealistic,
    #[serde(rename = "fractional-packing")]
    FractionalPacking,
    #[serde(rename = "theta")]
    Theta,
}

impl BoundMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundMethod::LocalRealistic => "lr",
            BoundMethod::FractionalPacking => "fractional-packing",
            BoundMethod::Theta => "theta",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Certificate {
    IndependentSet {
        vertices: Vec<usize>,
        events: Vec<String>,
    },
    LpAssignment {
        x: Vec<f64>,
        cliques: Vec<Vec<usize>>,
        /// Dual multipliers, one per clique.
        clique_duals: Vec<f64>,
        /// Dual multipliers of `x_i <= 1`.
        bound_duals: Vec<f64>,
        residuals: Residuals,
    },
    SdpMatrix {
        /// Optimal `X`, row-major.
        matrix: Vec<Vec<f64>>,
        dual_value: f64,
        min_eigenvalue: f64,
        residuals: Residuals,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub method: BoundMethod,
    pub value: f64,
    pub certificate: Certificate,
    pub fingerprint: String,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundsError {
    #[error("{method} supports at most {limit} vertices, graph has {vertices}")]
    TooLarge {
        method: &'static str,
        vertices: usize,
        limit: usize,
    },
    #[error("more than {0} maximal cliques")]
    CliqueExplosion(usize),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CertificateError {
    #[error("certificate was issued for a different graph")]
    FingerprintMismatch,
    #[error("certificate kind does not match method {0}")]
    WrongKind(&'static str),
    #[error("vertices {0} and {1} of the independent set are adjacent")]
    NotIndependent(usize, usize),
    #[error("vertex {0} out of range")]
    VertexOutOfRange(usize),
    #[error("{0}")]
    Infeasible(String),
    #[error("certificate value {certificate} differs from reported {reported}")]
    ValueMismatch { certificate: f64, reported: f64 },
}

fn too_large(method: &'static str, g: &ExclusivityGraph, limit: usize) -> Result<(), BoundsError> {
    if g.len() > limit {
        Err(BoundsError::TooLarge {
            method,
            vertices: g.len(),
            limit,
        })
    } else {
        Ok(())
    }
}

/// Maximum weight of an independent set: the largest value a local-realistic
/// model can give the weighted sum of event probabilities.
pub fn independence_number(g: &ExclusivityGraph) -> Result<BoundReport, BoundsError> {
    too_large("independence_number", g, MAX_INDEPENDENCE_VERTICES)?;
    let (vertices, value) = max_weight_independent_set(g.adjacency(), g.weights());
    let events = vertices
        .iter()
        .map(|&v| g.vertices()[v].to_string())
        .collect();
    Ok(BoundReport {
        method: BoundMethod::LocalRealistic,
        value,
        certificate: Certificate::IndependentSet { vertices, events },
        fingerprint: g.fingerprint(),
    })
}

/// LP bound `max Σ w_i x_i` with `Σ_{i∈Q} x_i <= 1` for every maximal clique
/// `Q` and `0 <= x <= 1`.
pub fn fractional_packing(g: &ExclusivityGraph) -> Result<BoundReport, BoundsError> {
    too_large("fractional_packing", g, MAX_PACKING_VERTICES)?;
    let cliques = maximal_cliques(g.adjacency(), MAX_CLIQUES)
        .map_err(|e| BoundsError::CliqueExplosion(e.limit))?;
    let n = g.len();
    let mut lp = LinearProgram::new(g.weights().to_vec());
    for clique in &cliques {
        let mut row = vec![0.0; n];
        for &v in clique {
            row[v] = 1.0;
        }
        lp.add_constraint(row, 1.0);
    }
    let report = solve_lp(&lp)?;
    Ok(BoundReport {
        method: BoundMethod::FractionalPacking,
        value: report.value,
        certificate: Certificate::LpAssignment {
            x: report.solution.x,
            cliques,
            clique_duals: report.solution.duals,
            bound_duals: report.solution.bound_duals,
            residuals: report.residuals,
        },
        fingerprint: g.fingerprint(),
    })
}

/// The theta SDP of a weighted graph: maximize `<W, X>` with
/// `W_ij = sqrt(w_i w_j)`, subject to `tr X = 1`, `X_ij = 0` on edges, `X ⪰ 0`.
pub fn theta_program(g: &ExclusivityGraph) -> SemidefiniteProgram {
    let n = g.len();
    let w = g.weights();
    let objective = DMatrix::from_fn(n, n, |i, j| (w[i] * w[j]).sqrt());
    let mut constraints = vec![SparseSymmetric::identity(n)];
    let mut rhs = vec![1.0];
    for (i, j) in g.edges() {
        let mut a = SparseSymmetric::new(n);
        a.push(i, j, 1.0);
        constraints.push(a);
        rhs.push(0.0);
    }
    SemidefiniteProgram {
        objective,
        constraints,
        rhs,
    }
}

/// Weighted Lovász theta, accurate to [`THETA_TOLERANCE`].
pub fn lovasz_theta(g: &ExclusivityGraph) -> Result<BoundReport, BoundsError> {
    too_large("lovasz_theta", g, MAX_THETA_VERTICES)?;
    if g.is_empty() {
        return Ok(BoundReport {
            method: BoundMethod::Theta,
            value: 0.0,
            certificate: Certificate::SdpMatrix {
                matrix: Vec::new(),
                dual_value: 0.0,
                min_eigenvalue: 0.0,
                residuals: Residuals {
                    primal: 0.0,
                    dual: 0.0,
                    gap: 0.0,
                },
            },
            fingerprint: g.fingerprint(),
        });
    }
    let report = solve_sdp(&theta_program(g))?;
    let matrix = report.solution.x;
    Ok(BoundReport {
        method: BoundMethod::Theta,
        value: report.value,
        certificate: Certificate::SdpMatrix {
            min_eigenvalue: min_eigenvalue(&matrix),
            matrix,
            dual_value: report.solution.dual_value,
            residuals: report.residuals,
        },
        fingerprint: g.fingerprint(),
    })
}

fn min_eigenvalue(matrix: &[Vec<f64>]) -> f64 {
    let n = matrix.len();
    if n == 0 {
        return 0.0;
    }
    let m = DMatrix::from_fn(n, n, |i, j| matrix[i][j]);
    SymmetricEigen::new(m).eigenvalues.min()
}

impl BoundReport {
    /// Re-checks the certificate against `g`.
    pub fn verify(&self, g: &ExclusivityGraph) -> Result<(), CertificateError> {
        if self.fingerprint != g.fingerprint() {
            return Err(CertificateError::FingerprintMismatch);
        }
        let n = g.len();
        let w = g.weights();
        match (&self.method, &self.certificate) {
            (BoundMethod::LocalRealistic, Certificate::IndependentSet { vertices, events }) => {
                if let Some(&v) = vertices.iter().find(|&&v| v >= n) {
                    return Err(CertificateError::VertexOutOfRange(v));
                }
                for (k, &a) in vertices.iter().enumerate() {
                    for &b in &vertices[k + 1..] {
                        if g.is_edge(a, b) {
                            return Err(CertificateError::NotIndependent(a, b));
                        }
                    }
                }
                if events.len() != vertices.len()
                    || vertices
                        .iter()
                        .zip(events)
                        .any(|(&v, e)| g.vertices()[v].to_string() != *e)
                {
                    return Err(CertificateError::Infeasible(
                        "event labels do not match vertices".into(),
                    ));
                }
                let total: f64 = vertices.iter().map(|&v| w[v]).sum();
                check_value(total, self.value, 0.0)
            }
            (
                BoundMethod::FractionalPacking,
                Certificate::LpAssignment {
                    x,
                    cliques,
                    clique_duals,
                    bound_duals,
                    ..
                },
            ) => {
                let tol = LP_TOLERANCE;
                if x.len() != n || bound_duals.len() != n || clique_duals.len() != cliques.len() {
                    return Err(CertificateError::Infeasible(
                        "certificate dimensions do not match".into(),
                    ));
                }
                if x.iter().any(|&v| !(-tol..=1.0 + tol).contains(&v)) {
                    return Err(CertificateError::Infeasible("x outside [0, 1]".into()));
                }
                let mut cover = vec![0.0; n];
                for (clique, &y) in cliques.iter().zip(clique_duals) {
                    if let Some(&v) = clique.iter().find(|&&v| v >= n) {
                        return Err(CertificateError::VertexOutOfRange(v));
                    }
                    for (k, &a) in clique.iter().enumerate() {
                        if clique[k + 1..].iter().any(|&b| !g.is_edge(a, b)) {
                            return Err(CertificateError::Infeasible(format!(
                                "{clique:?} is not a clique"
                            )));
                        }
                    }
                    let load: f64 = clique.iter().map(|&v| x[v]).sum();
                    if load > 1.0 + tol {
                        return Err(CertificateError::Infeasible(format!(
                            "clique {clique:?} has load {load}"
                        )));
                    }
                    if y < -tol {
                        return Err(CertificateError::Infeasible(
                            "negative dual multiplier".into(),
                        ));
                    }
                    for &v in clique {
                        cover[v] += y;
                    }
                }
                // Every edge must lie in some listed clique.
                for (a, b) in g.edges() {
                    if !cliques.iter().any(|c| c.contains(&a) && c.contains(&b)) {
                        return Err(CertificateError::Infeasible(format!(
                            "edge ({a}, {b}) is not covered"
                        )));
                    }
                }
                for i in 0..n {
                    if cover[i] + bound_duals[i] < w[i] - tol {
                        return Err(CertificateError::Infeasible(format!(
                            "dual constraint {i} violated"
                        )));
                    }
                }
                let primal: f64 = w.iter().zip(x).map(|(a, b)| a * b).sum();
                let dual: f64 = clique_duals.iter().sum::<f64>() + bound_duals.iter().sum::<f64>();
                check_value(primal, self.value, tol)?;
                check_value(dual, self.value, tol)
            }
            (BoundMethod::Theta, Certificate::SdpMatrix { matrix, .. }) => {
                if n == 0 {
                    return check_value(0.0, self.value, 0.0);
                }
                if matrix.len() != n || matrix.iter().any(|r| r.len() != n) {
                    return Err(CertificateError::Infeasible(
                        "matrix dimensions do not match".into(),
                    ));
                }
                let lambda = min_eigenvalue(matrix);
                if lambda < -PSD_TOLERANCE {
                    return Err(CertificateError::Infeasible(format!(
                        "smallest eigenvalue {lambda}"
                    )));
                }
                let trace: f64 = (0..n).map(|i| matrix[i][i]).sum();
                if (trace - 1.0).abs() > 1e-7 {
                    return Err(CertificateError::Infeasible(format!("trace {trace}")));
                }
                if let Some((i, j)) = g
                    .edges()
                    .into_iter()
                    .find(|&(i, j)| matrix[i][j].abs() > 1e-7)
                {
                    return Err(CertificateError::Infeasible(format!(
                        "X[{i}][{j}] = {}",
                        matrix[i][j]
                    )));
                }
                let objective: f64 = (0..n)
                    .flat_map(|i| (0..n).map(move |j| (i, j)))
                    .map(|(i, j)| (w[i] * w[j]).sqrt() * matrix[i][j])
                    .sum();
                check_value(objective, self.value, 1e-6 * (1.0 + self.value.abs()))
            }
            (method, _) => Err(CertificateError::WrongKind(method.as_str())),
        }
    }
}

fn check_value(certificate: f64, reported: f64, tol: f64) -> Result<(), CertificateError> {
    if (certificate - reported).abs() <= tol {
        Ok(())
    } else {
        Err(CertificateError::ValueMismatch {
            certificate,
            reported,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{chsh_graph, complete_graph, cycle_graph, edgeless_graph};

    #[test]
    fn chsh_bounds() {
        let g = chsh_graph();
        let lr = independence_number(&g).unwrap();
        assert_eq!(lr.value, 3.0);
        lr.verify(&g).unwrap();
        let fp = fractional_packing(&g).unwrap();
        assert!((fp.value - 4.0).abs() < 1e-9);
        fp.verify(&g).unwrap();
        let theta = lovasz_theta(&g).unwrap();
        assert!(
            (theta.value - (2.0 + 2f64.sqrt())).abs() < 1e-6,
            "{}",
            theta.value
        );
        theta.verify(&g).unwrap();
    }

    #[test]
    fn pentagon_bounds() {
        let g = cycle_graph(5);
        assert_eq!(independence_number(&g).unwrap().value, 2.0);
        assert!((fractional_packing(&g).unwrap().value - 2.5).abs() < 1e-12);
        assert!((lovasz_theta(&g).unwrap().value - 5f64.sqrt()).abs() < 1e-6);
    }

    #[test]
    fn complete_and_edgeless() {
        let k4 = complete_graph(4);
        assert_eq!(independence_number(&k4).unwrap().value, 1.0);
        assert!((fractional_packing(&k4).unwrap().value - 1.0).abs() < 1e-12);
        assert!((lovasz_theta(&k4).unwrap().value - 1.0).abs() < 1e-6);
        let e = edgeless_graph(5);
        assert_eq!(independence_number(&e).unwrap().value, 5.0);
        assert!((lovasz_theta(&e).unwrap().value - 5.0).abs() < 1e-6);
        assert!((fractional_packing(&e).unwrap().value - 5.0).abs() < 1e-12);
    }

    #[test]
    fn empty_graph() {
        let g = edgeless_graph(0);
        assert_eq!(independence_number(&g).unwrap().value, 0.0);
        assert_eq!(fractional_packing(&g).unwrap().value, 0.0);
        let t = lovasz_theta(&g).unwrap();
        assert_eq!(t.value, 0.0);
        t.verify(&g).unwrap();
    }

    #[test]
    fn size_limits() {
        let g = edgeless_graph(41);
        assert!(matches!(
            independence_number(&g),
            Err(BoundsError::TooLarge { limit: 40, .. })
        ));
        assert!(matches!(
            lovasz_theta(&edgeless_graph(65)),
            Err(BoundsError::TooLarge { .. })
        ));
    }

    #[test]
    fn tampered_certificates_fail() {
        let g = chsh_graph();
        let mut lr = independence_number(&g).unwrap();
        lr.value = 4.0;
        assert!(matches!(
            lr.verify(&g),
            Err(CertificateError::ValueMismatch { .. })
        ));

        let mut lr = independence_number(&g).unwrap();
        if let Certificate::IndependentSet { vertices, .. } = &mut lr.certificate {
            vertices[1] = 1;
        }
        assert!(lr.verify(&g).is_err());

        let fp = fractional_packing(&g).unwrap();
        assert_eq!(
            fp.verify(&cycle_graph(5)),
            Err(CertificateError::FingerprintMismatch)
        );

        let mut theta = lovasz_theta(&g).unwrap();
        theta.method = BoundMethod::LocalRealistic;
        assert!(matches!(
            theta.verify(&g),
            Err(CertificateError::WrongKind(_))
        ));
    }

    #[test]
    fn weighted_theta_of_edgeless_graph_is_total_weight() {
        let g = edgeless_graph(3).with_weights(vec![1.0, 2.0, 0.5]).unwrap();
        assert!((lovasz_theta(&g).unwrap().value - 3.5).abs() < 1e-6);
        assert_eq!(independence_number(&g).unwrap().value, 3.5);
    }
}
