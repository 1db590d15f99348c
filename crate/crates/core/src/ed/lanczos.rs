//! Lanczos with full reorthogonalization for the lowest few eigenpairs of a
//! real symmetric operator given only as a matrix-vector product.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::tridiag;
use crate::error::{Error, Result};

/// Largest true residual `‖Hx − θx‖` accepted for a returned pair.
pub const RESIDUAL_GATE: f64 = 1e-9;

#[derive(Debug, Clone, Copy)]
pub struct LanczosOptions {
    /// Target for the Ritz residual estimate `|β_m y_m|`.
    pub tol: f64,
    /// Krylov dimension limit; the run is also capped by the problem size.
    pub max_iter: usize,
    /// How often the projected problem is re-solved.
    pub check_every: usize,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self { tol: 1e-11, max_iter: 3000, check_every: 8, seed: 0x01a2_c205 }
    }
}

#[derive(Debug, Clone)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vec<f64>,
    pub residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Two passes of classical Gram–Schmidt against the whole basis.
fn orthogonalize(w: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for v in basis {
            let c = dot(v, w);
            axpy(-c, v, w);
        }
    }
}

/// Random start vector restricted to `support` (a mask of allowed entries),
/// orthogonal to `basis`. Returns `None` when nothing is left.
fn fresh_vector(rng: &mut ChaCha8Rng, support: &[bool], basis: &[Vec<f64>]) -> Option<Vec<f64>> {
    let mut v: Vec<f64> = support.iter().map(|&on| if on { rng.random_range(-1.0..1.0) } else { 0.0 }).collect();
    orthogonalize(&mut v, basis);
    let n = norm(&v);
    if n < 1e-10 {
        return None;
    }
    v.iter_mut().for_each(|x| *x /= n);
    Some(v)
}

/// The `k` lowest eigenpairs of `apply` inside the subspace spanned by the
/// basis vectors where `support` is true.
///
/// When the operator leaves that subspace invariant (for example a symmetry
/// sector), every Krylov vector stays inside it exactly. On breakdown the
/// iteration restarts from a random vector orthogonal to the basis, so exact
/// multiplicities are recovered; the restarted block must converge its own
/// lowest Ritz value before the run is accepted.
pub fn lowest_eigenpairs<F>(apply: F, support: &[bool], k: usize, opts: &LanczosOptions) -> Result<Vec<EigenPair>>
where
    F: Fn(&[f64], &mut [f64]),
{
    let dim = support.len();
    let sector_dim = support.iter().filter(|&&b| b).count();
    let k = k.min(sector_dim);
    if k == 0 {
        return Ok(Vec::new());
    }
    let limit = opts.max_iter.min(sector_dim);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);

    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut v = fresh_vector(&mut rng, support, &basis).expect("non-empty sector");
    let mut w = vec![0.0; dim];
    let mut block_start = 0usize;

    loop {
        apply(&v, &mut w);
        let a = dot(&v, &w);
        basis.push(v.clone());
        alphas.push(a);
        orthogonalize(&mut w, &basis);
        let b = norm(&w);
        let m = basis.len();
        let breakdown = b < 1e-12 * (1.0 + a.abs());
        let tail = if breakdown { 0.0 } else { b };

        if m >= limit {
            let (ritz, r) = solve_projected(&alphas, &betas, tail, k);
            return finish(&apply, &basis, &ritz, m, r);
        }
        if breakdown {
            // The Krylov space is invariant. Anything missing from it is an
            // exact multiplicity, so continue in the orthogonal complement.
            match fresh_vector(&mut rng, support, &basis) {
                Some(next) => {
                    betas.push(0.0);
                    v = next;
                    block_start = m;
                    continue;
                }
                None => {
                    let (ritz, r) = solve_projected(&alphas, &betas, 0.0, k);
                    return finish(&apply, &basis, &ritz, m, r);
                }
            }
        }
        if m.is_multiple_of(opts.check_every) {
            let (ritz, max_res) = solve_projected(&alphas, &betas, tail, k);
            let block_ok = block_start == 0 || {
                let (_, r) = solve_projected(&alphas[block_start..], &betas[block_start..], tail, 1);
                r < opts.tol
            };
            if ritz.len() >= k && max_res < opts.tol && block_ok {
                return finish(&apply, &basis, &ritz, m, max_res);
            }
        }
        betas.push(b);
        v = w.iter().map(|x| x / b).collect();
    }
}

/// Eigen-decomposition of the tridiagonal projection. Returns the `k` lowest
/// Ritz values with their coefficient vectors and the largest residual
/// estimate among them.
fn solve_projected(alphas: &[f64], betas: &[f64], tail: f64, k: usize) -> (Vec<(f64, Vec<f64>)>, f64) {
    let m = alphas.len();
    let out = tridiag::lowest_pairs(alphas, &betas[..m - 1], k);
    let max_res = out.iter().map(|(_, y)| (tail * y[m - 1]).abs()).fold(0.0, f64::max);
    (out, max_res)
}

fn finish<F>(
    apply: &F,
    basis: &[Vec<f64>],
    ritz: &[(f64, Vec<f64>)],
    iterations: usize,
    estimate: f64,
) -> Result<Vec<EigenPair>>
where
    F: Fn(&[f64], &mut [f64]),
{
    let dim = basis[0].len();
    let mut out = Vec::with_capacity(ritz.len());
    let mut hx = vec![0.0; dim];
    for (_, y) in ritz {
        let mut x = vec![0.0; dim];
        for (c, v) in y.iter().zip(basis) {
            axpy(*c, v, &mut x);
        }
        let n = norm(&x);
        x.iter_mut().for_each(|e| *e /= n);
        apply(&x, &mut hx);
        let rq = dot(&x, &hx);
        let residual = hx.iter().zip(&x).map(|(h, xi)| (h - rq * xi).powi(2)).sum::<f64>().sqrt();
        if residual > RESIDUAL_GATE {
            return Err(Error::NoConvergence { residual: residual.max(estimate), iterations });
        }
        out.push(EigenPair { value: rq, vector: x, residual });
    }
    Ok(out)
}
