use super::{Graph, GraphError};

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_ITER: usize = 10_000;

/// Largest adjacency eigenvalue by power iteration from the all-ones vector.
///
/// Iterates on `A + I`, whose dominant eigenvalue is `λ1 + 1` even for
/// bipartite graphs where `A` has `-λ1` in its spectrum. Stops when the
/// eigen-residual `‖Ax - ρx‖₂` of the normalized iterate drops below `tol`;
/// for a symmetric matrix that bounds the distance from the Rayleigh
/// quotient `ρ` to the spectrum.
pub fn spectral_radius(g: &Graph, tol: f64, max_iter: usize) -> Result<f64, GraphError> {
    if g.n_nodes() == 0 {
        return Err(GraphError::EmptyGraph);
    }
    if !(tol > 0.0) {
        return Err(GraphError::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    let n = g.n_nodes();
    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    let mut ax = vec![0.0; n];
    let mut rho = 0.0;
    let mut residual = f64::INFINITY;

    for _ in 0..max_iter {
        for (v, out) in ax.iter_mut().enumerate() {
            *out = g.neighbors(v).iter().map(|&u| x[u]).sum();
        }
        rho = x.iter().zip(&ax).map(|(a, b)| a * b).sum();
        residual = ax
            .iter()
            .zip(&x)
            .map(|(a, b)| (a - rho * b).powi(2))
            .sum::<f64>()
            .sqrt();
        if residual <= tol {
            return Ok(rho);
        }
        // x <- (A + I) x, normalized
        let norm = ax.iter().zip(&x).map(|(a, b)| (a + b).powi(2)).sum::<f64>().sqrt();
        for (xi, ai) in x.iter_mut().zip(&ax) {
            *xi = (*xi + ai) / norm;
        }
    }
    Err(GraphError::NoConvergence {
        iterations: max_iter,
        last_estimate: rho,
        residual,
        last_iterate: x,
    })
}
