//! Lowest eigenpairs of a real symmetric tridiagonal matrix by Sturm-sequence
//! bisection and inverse iteration.
//!
//! Only the few lowest pairs are ever needed, and general dense QR routines
//! can return eigenvectors with residuals far above roundoff on long Lanczos
//! tridiagonals, so the vectors are computed directly from the eigenvalues.

/// Number of eigenvalues strictly below `x` for the matrix with diagonal `d`
/// and off-diagonal `e`.
fn sturm_count(d: &[f64], e: &[f64], x: f64, pivmin: f64) -> usize {
    let mut count = 0;
    let mut q = d[0] - x;
    for i in 0..d.len() {
        if i > 0 {
            q = d[i] - x - e[i - 1] * e[i - 1] / q;
        }
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Gershgorin interval containing the spectrum.
fn bounds(d: &[f64], e: &[f64]) -> (f64, f64) {
    let n = d.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { e[i - 1].abs() } else { 0.0 } + if i + 1 < n { e[i].abs() } else { 0.0 };
        lo = lo.min(d[i] - r);
        hi = hi.max(d[i] + r);
    }
    (lo, hi)
}

/// The `j`-th smallest eigenvalue (0-based).
fn bisect(d: &[f64], e: &[f64], j: usize, pivmin: f64) -> f64 {
    let (mut lo, mut hi) = bounds(d, e);
    let scale = lo.abs().max(hi.abs()).max(pivmin);
    lo -= 2.0 * f64::EPSILON * scale + pivmin;
    hi += 2.0 * f64::EPSILON * scale + pivmin;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 2.0 * f64::EPSILON * mid.abs().max(pivmin) {
            break;
        }
        if sturm_count(d, e, mid, pivmin) > j {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Solves `(T − θ) x = rhs` in place by Gaussian elimination with partial
/// pivoting; exactly zero pivots are replaced by `tiny`.
fn shifted_solve(d: &[f64], e: &[f64], theta: f64, tiny: f64, rhs: &mut [f64]) {
    let n = d.len();
    let mut diag: Vec<f64> = d.iter().map(|x| x - theta).collect();
    let mut up: Vec<f64> = e.to_vec();
    let mut up2 = vec![0.0; n.saturating_sub(2)];
    let mut low: Vec<f64> = e.to_vec();
    let mut swapped = vec![false; n.saturating_sub(1)];
    for i in 0..n.saturating_sub(1) {
        if diag[i].abs() >= low[i].abs() {
            if diag[i] == 0.0 {
                diag[i] = tiny;
            }
            let f = low[i] / diag[i];
            low[i] = f;
            diag[i + 1] -= f * up[i];
        } else {
            let f = diag[i] / low[i];
            diag[i] = low[i];
            low[i] = f;
            let t = up[i];
            up[i] = diag[i + 1];
            diag[i + 1] = t - f * diag[i + 1];
            if i + 2 < n {
                up2[i] = up[i + 1];
                up[i + 1] *= -f;
            }
            swapped[i] = true;
        }
    }
    if diag[n - 1] == 0.0 {
        diag[n - 1] = tiny;
    }
    for i in 0..n.saturating_sub(1) {
        if swapped[i] {
            rhs.swap(i, i + 1);
        }
        rhs[i + 1] -= low[i] * rhs[i];
    }
    for i in (0..n).rev() {
        let mut s = rhs[i];
        if i + 1 < n {
            s -= up[i] * rhs[i + 1];
        }
        if i + 2 < n {
            s -= up2[i] * rhs[i + 2];
        }
        rhs[i] = s / diag[i];
    }
}

fn normalize(v: &mut [f64]) {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= n);
}

/// The `k` lowest eigenpairs of one unreduced block (no zero off-diagonal).
fn block_pairs(d: &[f64], e: &[f64], k: usize) -> Vec<(f64, Vec<f64>)> {
    let n = d.len();
    if n == 1 {
        return vec![(d[0], vec![1.0])];
    }
    let (lo, hi) = bounds(d, e);
    let norm = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
    let pivmin = f64::MIN_POSITIVE.max(f64::EPSILON * f64::EPSILON * norm);
    let tiny = f64::EPSILON * norm;
    let mut out: Vec<(f64, Vec<f64>)> = Vec::new();
    for j in 0..k.min(n) {
        let theta = bisect(d, e, j, pivmin);
        // deterministic start with no special structure
        let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * ((i * 7 + 3) % 11) as f64).collect();
        for _ in 0..3 {
            shifted_solve(d, e, theta, tiny, &mut v);
            // keep clustered vectors orthogonal
            for (t, u) in &out {
                if (t - theta).abs() < 1e-3 * norm {
                    let c: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
                    v.iter_mut().zip(u).for_each(|(x, y)| *x -= c * y);
                }
            }
            normalize(&mut v);
        }
        out.push((theta, v));
    }
    out
}

/// The `k` lowest eigenpairs of the tridiagonal matrix with diagonal `d` and
/// off-diagonal `e` (`e.len() == d.len() − 1`), ascending. Zero off-diagonal
/// entries split the matrix into independent blocks.
pub fn lowest_pairs(d: &[f64], e: &[f64], k: usize) -> Vec<(f64, Vec<f64>)> {
    let n = d.len();
    let mut all = Vec::new();
    let mut start = 0;
    for end in 1..=n {
        if end == n || e[end - 1] == 0.0 {
            for (t, v) in block_pairs(&d[start..end], &e[start..end - 1], k) {
                let mut full = vec![0.0; n];
                full[start..end].copy_from_slice(&v);
                all.push((t, full));
            }
            start = end;
        }
    }
    all.sort_by(|a, b| a.0.total_cmp(&b.0));
    all.truncate(k);
    all
}
