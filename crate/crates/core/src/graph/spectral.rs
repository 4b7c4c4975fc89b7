//! Iterative eigenvector computations on adjacency structures.
//!
//! `principal_eigenvector` runs power iteration on the adjacency operator.
//! `laplacian_homophily_vector` finds the eigenvector of the second-smallest
//! eigenvalue of the random-walk Laplacian `D^-1 L` by power iteration on a
//! shifted symmetric-Laplacian operator with the constant mode deflated.

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::DirectedGraph;
use crate::seeds;

/// Default convergence tolerance (L-inf change between normalized iterates).
pub const EIGEN_TOL: f64 = 1e-12;
/// Default iteration cap for the adjacency power method.
pub const EIGEN_MAX_ITER: usize = 10_000;
/// Iteration cap for the Laplacian solver; its spectral gaps can be tiny on
/// long-diameter graphs, so the cap is higher.
const LAPLACIAN_MAX_ITER: usize = 50_000;
/// Shift for the Laplacian power method; normalized-Laplacian eigenvalues
/// lie in [0, 2], so `SHIFT - lambda` is positive and order-reversing.
const LAPLACIAN_SHIFT: f64 = 2.1;
/// Fixed seed for the deterministic start vectors.
const START_SEED: u64 = 0x5eed_1ce0;

/// Outcome of the adjacency power method.
#[derive(Debug, Clone)]
pub struct SpectralResult {
    /// Entrywise-nonnegative eigenvector, unit L2 norm.
    pub vector: Vec<f64>,
    /// Rayleigh-quotient estimate of the spectral radius.
    pub value: f64,
    /// False when the iteration cap was hit; `vector` is the best iterate.
    pub converged: bool,
    /// True for an all-zero adjacency, where a flat vector is returned.
    pub zero_matrix: bool,
}

/// Outcome of the Laplacian eigenvector computation.
#[derive(Debug, Clone)]
pub struct LaplacianResult {
    /// Eigenvector of `D^-1 L` for the second-smallest eigenvalue, unit L2
    /// norm, first nonzero entry positive. Zero-degree units get entry 0.
    pub vector: Vec<f64>,
    /// The second-smallest eigenvalue.
    pub lambda2: f64,
    pub converged: bool,
    /// True when the graph is disconnected (lambda2 ~ 0) or the next
    /// eigenvalue ties with lambda2, so the eigenvector is not unique.
    pub degenerate: bool,
}

fn matvec_out(g: &DirectedGraph, x: &[f64], out: &mut [f64]) {
    for i in 0..g.n() {
        let mut acc = 0.0;
        for &j in g.out_neighbors(i) {
            acc += x[j];
        }
        out[i] = acc;
    }
}

/// `(A + I) x`; the unit shift keeps the dominant eigenvalue strictly
/// separated in magnitude on bipartite spectra (which are symmetric about
/// zero) without changing the eigenvector.
fn matvec_out_shifted(g: &DirectedGraph, x: &[f64], out: &mut [f64]) {
    matvec_out(g, x, out);
    for (o, v) in out.iter_mut().zip(x) {
        *o += v;
    }
}

fn l2_norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn linf_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Power iteration for the dominant eigenvector of the adjacency operator,
/// i.e. `v` with `(A v)_i = sum over out-neighbors j of v_j`. The start is
/// uniform, so the iterates stay entrywise nonnegative.
///
/// An all-zero adjacency yields the flat unit vector with `zero_matrix` set.
pub fn principal_eigenvector(g: &DirectedGraph, tol: f64, max_iter: usize) -> Result<SpectralResult> {
    let n = g.n();
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    let uniform = vec![1.0 / (n as f64).sqrt(); n];
    if g.num_directed_edges() == 0 {
        return Ok(SpectralResult {
            vector: uniform,
            value: 0.0,
            converged: true,
            zero_matrix: true,
        });
    }

    let mut v = uniform;
    let mut next = vec![0.0; n];
    let mut converged = false;
    for _ in 0..max_iter {
        matvec_out_shifted(g, &v, &mut next);
        let norm = l2_norm(&next);
        if norm == 0.0 {
            break;
        }
        for x in &mut next {
            *x /= norm;
        }
        let delta = linf_diff(&next, &v);
        std::mem::swap(&mut v, &mut next);
        if delta < tol {
            converged = true;
            break;
        }
    }
    matvec_out(g, &v, &mut next);
    let value = v.iter().zip(&next).map(|(a, b)| a * b).sum::<f64>();
    Ok(SpectralResult {
        vector: v,
        value,
        converged,
        zero_matrix: false,
    })
}

/// Applies `SHIFT * I - L_sym` restricted to the given units, where
/// `L_sym = I - D^-1/2 A D^-1/2` on units of nonzero degree.
fn shifted_lsym_matvec(
    g: &DirectedGraph,
    units: &[usize],
    inv_sqrt_deg: &[f64],
    x: &[f64],
    out: &mut [f64],
) {
    for (k, &i) in units.iter().enumerate() {
        let mut acc = 0.0;
        for &j in g.out_neighbors(i) {
            acc += x[j] * inv_sqrt_deg[j];
        }
        out[k] = (LAPLACIAN_SHIFT - 1.0) * x[i] + inv_sqrt_deg[i] * acc;
    }
}

/// Eigenvector of `D^-1 L` (L the unnormalized Laplacian, D the degree
/// matrix) for the second-smallest eigenvalue, computed in the symmetric
/// domain `L_sym = D^-1/2 L D^-1/2` and mapped back through `D^-1/2`.
///
/// Conventions, documented and tested:
/// - requires a symmetric graph; zero-degree units are excluded from the
///   operator and get entry 0;
/// - the returned vector is D-orthogonal to the constant vector
///   (`sum_i d_i h_i = 0`), which is the orthogonality notion matching the
///   `D^-1 L` eigenproblem;
/// - unit L2 norm, sign fixed so the first nonzero entry is positive;
/// - a disconnected graph (lambda2 ~ 0) or a tied next eigenvalue marks the
///   result `degenerate` instead of erroring.
pub fn laplacian_homophily_vector(g: &DirectedGraph) -> Result<LaplacianResult> {
    let n = g.n();
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    if !g.is_symmetric() {
        return Err(Error::InvalidParameter(
            "laplacian_homophily_vector requires a symmetric graph".into(),
        ));
    }

    let units: Vec<usize> = (0..n).filter(|&i| g.in_degree(i) > 0).collect();
    if units.is_empty() {
        // Edgeless graph: the whole spectrum is trivial.
        return Ok(LaplacianResult {
            vector: vec![0.0; n],
            lambda2: 0.0,
            converged: true,
            degenerate: true,
        });
    }

    let mut inv_sqrt_deg = vec![0.0; n];
    for &i in &units {
        inv_sqrt_deg[i] = 1.0 / (g.in_degree(i) as f64).sqrt();
    }
    // Constant mode of L_sym: D^1/2 * 1, normalized.
    let mut constant = vec![0.0; n];
    for &i in &units {
        constant[i] = (g.in_degree(i) as f64).sqrt();
    }
    let cn = l2_norm(&constant);
    for c in &mut constant {
        *c /= cn;
    }

    let (u2, mu2, conv2) = deflated_power(g, &units, &inv_sqrt_deg, &[constant.clone()]);
    let lambda2 = LAPLACIAN_SHIFT - mu2;
    // One more deflated run to detect a tied eigenvalue.
    let (_, mu3, _) = deflated_power(g, &units, &inv_sqrt_deg, &[constant, u2.clone()]);
    let lambda3 = LAPLACIAN_SHIFT - mu3;

    let gap_tol = 1e-8;
    let degenerate = lambda2.abs() < gap_tol || (lambda3 - lambda2).abs() < gap_tol;

    // Map back: h = D^-1/2 u2, zero on zero-degree units.
    let mut h: Vec<f64> = (0..n).map(|i| u2[i] * inv_sqrt_deg[i]).collect();
    let norm = l2_norm(&h);
    if norm > 0.0 {
        for x in &mut h {
            *x /= norm;
        }
    }
    if let Some(first) = h.iter().find(|x| x.abs() > 1e-12) {
        if *first < 0.0 {
            for x in &mut h {
                *x = -*x;
            }
        }
    }
    Ok(LaplacianResult {
        vector: h,
        lambda2,
        converged: conv2,
        degenerate,
    })
}

/// Power iteration on `SHIFT*I - L_sym` with the given directions projected
/// out each step. Returns (eigenvector in the symmetric domain, Rayleigh
/// value of the shifted operator, converged flag). Vectors are full length
/// with zeros off the active units.
fn deflated_power(
    g: &DirectedGraph,
    units: &[usize],
    inv_sqrt_deg: &[f64],
    deflate: &[Vec<f64>],
) -> (Vec<f64>, f64, bool) {
    let n = g.n();
    let mut rng = seeds::rng(START_SEED);
    let mut v = vec![0.0; n];
    for &i in units {
        v[i] = rng.random::<f64>() - 0.5;
    }
    project_out(&mut v, deflate);
    let norm = l2_norm(&v);
    if norm == 0.0 {
        // Deflation removed everything (single active unit); nothing to find.
        return (v, LAPLACIAN_SHIFT, true);
    }
    for x in &mut v {
        *x /= norm;
    }

    let mut applied = vec![0.0; units.len()];
    let mut next = vec![0.0; n];
    let mut converged = false;
    for _ in 0..LAPLACIAN_MAX_ITER {
        shifted_lsym_matvec(g, units, inv_sqrt_deg, &v, &mut applied);
        next.iter_mut().for_each(|x| *x = 0.0);
        for (k, &i) in units.iter().enumerate() {
            next[i] = applied[k];
        }
        project_out(&mut next, deflate);
        let norm = l2_norm(&next);
        if norm == 0.0 {
            break;
        }
        for x in &mut next {
            *x /= norm;
        }
        let delta = linf_diff(&next, &v);
        std::mem::swap(&mut v, &mut next);
        if delta < EIGEN_TOL {
            converged = true;
            break;
        }
    }
    shifted_lsym_matvec(g, units, inv_sqrt_deg, &v, &mut applied);
    let mut rayleigh = 0.0;
    for (k, &i) in units.iter().enumerate() {
        rayleigh += v[i] * applied[k];
    }
    (v, rayleigh, converged)
}

fn project_out(v: &mut [f64], directions: &[Vec<f64>]) {
    for d in directions {
        let dot: f64 = v.iter().zip(d).map(|(a, b)| a * b).sum();
        for (x, y) in v.iter_mut().zip(d) {
            *x -= dot * y;
        }
    }
}
