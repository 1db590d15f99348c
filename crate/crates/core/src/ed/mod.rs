//! Exact diagonalization of the finite-J Hamiltonian in a truncated Fock
//! space. This is the ground-truth oracle the mean-field and Gaussian layers
//! are checked against.
//!
//! Basis states are `|m₁⟩ ⊗ |m₂⟩ ⊗ |n⟩` with `m₁` varying slowest and the
//! boson number `n` fastest:
//!
//! ```text
//! index = ((m₁ + J)(2J + 1) + (m₂ + J)) · n_cut + n
//! ```

pub mod lanczos;
mod tridiag;

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParams;
use lanczos::{lowest_eigenpairs, LanczosOptions};

pub const DEFAULT_DIM_CAP: usize = 200_000;
/// Gap below which the two lowest levels are reported as a degenerate pair.
pub const DEGENERACY_THRESHOLD: f64 = 1e-8;

/// Fock cutoff used when none is requested explicitly.
pub fn default_cutoff(params: &ModelParams) -> usize {
    if params.lambda <= 0.6 {
        40
    } else {
        80
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiniteModel {
    pub params: ModelParams,
    /// N = 2J spins per ensemble.
    pub two_j: usize,
    /// Number of retained Fock states, n = 0 .. n_cut − 1.
    pub n_cut: usize,
    pub dim_cap: usize,
}

impl FiniteModel {
    pub fn new(params: ModelParams, two_j: usize, n_cut: usize) -> Result<Self> {
        params.validate()?;
        if two_j == 0 {
            return Err(Error::InvalidParams("2J must be a positive integer".into()));
        }
        if n_cut == 0 {
            return Err(Error::InvalidParams("n_cut must be >= 1".into()));
        }
        Ok(Self { params, two_j, n_cut, dim_cap: DEFAULT_DIM_CAP })
    }

    pub fn with_cutoff(self, n_cut: usize) -> Self {
        Self { n_cut, ..self }
    }

    pub fn j(&self) -> f64 {
        self.two_j as f64 / 2.0
    }

    pub fn spin_dim(&self) -> usize {
        self.two_j + 1
    }

    pub fn dim(&self) -> usize {
        self.spin_dim() * self.spin_dim() * self.n_cut
    }

    /// `(m₁ + J, m₂ + J, n)` for a basis index.
    pub fn decode(&self, index: usize) -> (usize, usize, usize) {
        let n = index % self.n_cut;
        let rest = index / self.n_cut;
        (rest / self.spin_dim(), rest % self.spin_dim(), n)
    }

    pub fn encode(&self, k1: usize, k2: usize, n: usize) -> usize {
        (k1 * self.spin_dim() + k2) * self.n_cut + n
    }

    /// Parity `(−1)^(N_S1 + N_S2 + N_B)` of a basis state.
    pub fn parity_of(&self, index: usize) -> f64 {
        let (k1, k2, n) = self.decode(index);
        if (k1 + k2 + n) % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    fn check_cap(&self) -> Result<()> {
        if self.dim() > self.dim_cap {
            return Err(Error::DimensionCap { dim: self.dim(), cap: self.dim_cap });
        }
        Ok(())
    }

    /// `⟨m+1|J₊|m⟩` with `k = m + J`.
    fn raise(&self, k: usize) -> f64 {
        let j = self.j();
        let m = k as f64 - j;
        (j * (j + 1.0) - m * (m + 1.0)).max(0.0).sqrt()
    }

    /// `⟨m−1|J₋|m⟩` with `k = m + J`.
    fn lower(&self, k: usize) -> f64 {
        let j = self.j();
        let m = k as f64 - j;
        (j * (j + 1.0) - m * (m - 1.0)).max(0.0).sqrt()
    }

    /// Nonzero `⟨k'|Jₓ|k⟩` as `(k', value)`.
    fn jx_column(&self, k: usize) -> impl Iterator<Item = (usize, f64)> {
        let up = (k < self.two_j).then(|| (k + 1, 0.5 * self.raise(k)));
        let down = (k > 0).then(|| (k - 1, 0.5 * self.lower(k)));
        up.into_iter().chain(down)
    }

    /// Nonzero `⟨n'|b + b†|n⟩`.
    fn quadrature_column(&self, n: usize) -> impl Iterator<Item = (usize, f64)> {
        let down = (n > 0).then(|| (n - 1, (n as f64).sqrt()));
        let up = (n + 1 < self.n_cut).then(|| (n + 1, ((n + 1) as f64).sqrt()));
        down.into_iter().chain(up)
    }

    /// Every nonzero `(row, value)` of column `c` of H.
    fn hamiltonian_column(&self, c: usize, out: &mut Vec<(usize, f64)>) {
        out.clear();
        let p = &self.params;
        let j = self.j();
        let (k1, k2, n) = self.decode(c);
        let m1 = k1 as f64 - j;
        let m2 = k2 as f64 - j;
        out.push((c, p.spin_freq * (m1 + m2) + p.boson_freq * n as f64));

        if p.chi != 0.0 {
            let g = p.chi / j;
            for (r1, a1) in self.jx_column(k1) {
                for (r2, a2) in self.jx_column(k2) {
                    out.push((self.encode(r1, r2, n), g * a1 * a2));
                }
            }
        }
        if p.lambda != 0.0 {
            let g = p.lambda / j.sqrt();
            for (rn, bn) in self.quadrature_column(n) {
                for (r1, a1) in self.jx_column(k1) {
                    out.push((self.encode(r1, k2, rn), g * a1 * bn));
                }
                for (r2, a2) in self.jx_column(k2) {
                    out.push((self.encode(k1, r2, rn), g * a2 * bn));
                }
            }
        }
    }
}

/// Real symmetric matrix in compressed sparse row form.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSymmetric {
    pub dim: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
}

impl SparseSymmetric {
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.indptr[i]..self.indptr[i + 1];
        self.indices[range.clone()].iter().copied().zip(self.values[range].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|&(c, _)| c == j).map_or(0.0, |(_, v)| v)
    }

    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row(i).map(|(c, v)| v * x[c]).sum();
        }
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.dim, self.dim);
        for i in 0..self.dim {
            for (c, v) in self.row(i) {
                m[(i, c)] = v;
            }
        }
        m
    }

    /// Matrix Market coordinate dump (1-based `row col value`, all entries).
    pub fn write_matrix_market<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
        writeln!(w, "{} {} {}", self.dim, self.dim, self.nnz())?;
        for i in 0..self.dim {
            for (c, v) in self.row(i) {
                writeln!(w, "{} {} {:.17e}", i + 1, c + 1, v)?;
            }
        }
        Ok(())
    }
}

/// Assembles H from its lower triangle and mirrors it, so `H = Hᵀ` holds
/// bit-for-bit.
pub fn build_hamiltonian(model: &FiniteModel) -> Result<SparseSymmetric> {
    model.check_cap()?;
    let dim = model.dim();
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); dim];
    let mut column = Vec::new();
    for c in 0..dim {
        model.hamiltonian_column(c, &mut column);
        for &(r, v) in &column {
            if r >= c {
                rows[r].push((c, v));
            }
        }
    }
    // mirror the strict lower triangle
    for r in 0..dim {
        let mirrored: Vec<(usize, f64)> = rows[r].iter().filter(|&&(c, _)| c < r).copied().collect();
        for (c, v) in mirrored {
            rows[c].push((r, v));
        }
    }
    let mut indptr = Vec::with_capacity(dim + 1);
    let mut indices = Vec::new();
    let mut values = Vec::new();
    indptr.push(0);
    for mut row in rows {
        row.sort_by_key(|&(c, _)| c);
        // merge duplicate coordinates
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(row.len());
        for (c, v) in row {
            match merged.last_mut() {
                Some(last) if last.0 == c => last.1 += v,
                _ => merged.push((c, v)),
            }
        }
        for (c, v) in merged {
            if v != 0.0 {
                indices.push(c);
                values.push(v);
            }
        }
        indptr.push(indices.len());
    }
    Ok(SparseSymmetric { dim, indptr, indices, values })
}

/// Two lowest eigenstates of the finite model.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundState {
    pub e0: f64,
    pub e1: f64,
    pub gap: f64,
    pub state: Vec<f64>,
    pub excited: Vec<f64>,
    /// Largest `‖Hv − ev‖` of the two returned vectors.
    pub residual: f64,
    /// `gap < DEGENERACY_THRESHOLD`; parity of the pair is then not meaningful.
    pub degenerate: bool,
}

/// Lowest two levels from Lanczos runs in the even and odd parity sectors.
///
/// The matrix-vector product is the full H; starting vectors are supported
/// on one sector only, so any parity-breaking matrix element would show up
/// as a non-integer ⟨Π⟩ of the result.
pub fn ground_state(model: &FiniteModel) -> Result<GroundState> {
    ground_state_with(model, &LanczosOptions::default())
}

pub fn ground_state_with(model: &FiniteModel, opts: &LanczosOptions) -> Result<GroundState> {
    let h = build_hamiltonian(model)?;
    let apply = |x: &[f64], y: &mut [f64]| h.apply(x, y);
    let mut pairs = Vec::new();
    for sign in [1.0, -1.0] {
        let support: Vec<bool> = (0..model.dim()).map(|i| model.parity_of(i) == sign).collect();
        pairs.extend(lowest_eigenpairs(apply, &support, 2, opts)?);
    }
    pairs.sort_by(|a, b| a.value.total_cmp(&b.value));
    let mut it = pairs.into_iter();
    let g = it.next().expect("dimension >= 1");
    let (e1, excited, r1) = match it.next() {
        Some(x) => (x.value, x.vector, x.residual),
        None => (f64::INFINITY, vec![0.0; model.dim()], 0.0),
    };
    let gap = e1 - g.value;
    Ok(GroundState {
        e0: g.value,
        e1,
        gap,
        state: g.vector,
        excited,
        residual: g.residual.max(r1),
        degenerate: gap < DEGENERACY_THRESHOLD,
    })
}

/// Expectation values in a normalized state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdObservables {
    pub jx1: f64,
    pub jx2: f64,
    pub jz1: f64,
    pub jz2: f64,
    pub nb: f64,
    /// Re⟨b⟩
    pub b_re: f64,
    pub parity: f64,
}

pub fn observables(model: &FiniteModel, state: &[f64]) -> EdObservables {
    let j = model.j();
    let mut o = EdObservables { jx1: 0.0, jx2: 0.0, jz1: 0.0, jz2: 0.0, nb: 0.0, b_re: 0.0, parity: 0.0 };
    for (c, &amp) in state.iter().enumerate() {
        if amp == 0.0 {
            continue;
        }
        let (k1, k2, n) = model.decode(c);
        let w = amp * amp;
        o.jz1 += w * (k1 as f64 - j);
        o.jz2 += w * (k2 as f64 - j);
        o.nb += w * n as f64;
        o.parity += w * model.parity_of(c);
        for (r1, a) in model.jx_column(k1) {
            o.jx1 += state[model.encode(r1, k2, n)] * a * amp;
        }
        for (r2, a) in model.jx_column(k2) {
            o.jx2 += state[model.encode(k1, r2, n)] * a * amp;
        }
        if n > 0 {
            o.b_re += state[model.encode(k1, k2, n - 1)] * (n as f64).sqrt() * amp;
        }
    }
    o
}

/// Smallest cutoff on the ×1.5 ladder 1, 2, 3, 5, 8, … whose ground energy
/// moves by less than `tol` when the cutoff is raised to the next rung.
pub fn converge_cutoff(model: &FiniteModel, tol: f64) -> Result<usize> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParams(format!("cutoff tolerance must be > 0, got {tol}")));
    }
    let next = |n: usize| (3 * n).div_ceil(2);
    let e0 = |n: usize| ground_state(&model.with_cutoff(n)).map(|g| g.e0);
    let mut n = 1;
    let mut e_here = e0(n)?;
    loop {
        let m = next(n);
        let e_next = e0(m)?;
        if (e_here - e_next).abs() < tol {
            return Ok(n);
        }
        n = m;
        e_here = e_next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn p(om: f64, w: f64, chi: f64, lam: f64) -> ModelParams {
        ModelParams::new(om, w, chi, lam).unwrap()
    }

    #[test]
    fn basis_ordering_round_trips() {
        let m = FiniteModel::new(p(1.0, 1.0, 0.0, 0.0), 3, 5).unwrap();
        assert_eq!(m.dim(), 4 * 4 * 5);
        for i in 0..m.dim() {
            let (a, b, n) = m.decode(i);
            assert_eq!(m.encode(a, b, n), i);
        }
        assert_eq!(m.decode(1), (0, 0, 1));
        assert_eq!(m.decode(5), (0, 1, 0));
    }

    #[test]
    fn decoupled_spin_half() {
        let m = FiniteModel::new(p(1.0, 1.0, 0.0, 0.0), 1, 2).unwrap();
        let h = build_hamiltonian(&m).unwrap();
        assert!((0..h.dim).all(|i| h.row(i).all(|(c, _)| c == i)));
        let g = ground_state(&m).unwrap();
        assert_abs_diff_eq!(g.e0, -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(g.gap, 1.0, epsilon = 1e-12);
        let o = observables(&m, &g.state);
        assert_abs_diff_eq!(o.jz1, -0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(o.jz2, -0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(o.nb, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(o.parity, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn hamiltonian_is_exactly_symmetric() {
        let m = FiniteModel::new(p(1.0, 0.7, -0.6, 0.45), 4, 6).unwrap();
        let d = build_hamiltonian(&m).unwrap().to_dense();
        assert_eq!(d.clone(), d.transpose());
    }

    #[test]
    fn dimension_cap_enforced() {
        let mut m = FiniteModel::new(p(1.0, 1.0, 0.0, 0.3), 10, 40).unwrap();
        m.dim_cap = 1000;
        assert!(matches!(build_hamiltonian(&m), Err(Error::DimensionCap { .. })));
    }

    #[test]
    fn lambda_zero_needs_a_single_fock_state() {
        let m = FiniteModel::new(p(1.0, 1.0, 0.5, 0.0), 4, 1).unwrap();
        assert_eq!(converge_cutoff(&m, 1e-10).unwrap(), 1);
    }

    #[test]
    fn matrix_market_dump_parses_back() {
        let m = FiniteModel::new(p(1.0, 1.0, 0.4, 0.2), 2, 3).unwrap();
        let h = build_hamiltonian(&m).unwrap();
        let mut buf = Vec::new();
        h.write_matrix_market(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert!(lines.next().unwrap().starts_with("%%MatrixMarket"));
        assert_eq!(lines.next().unwrap(), format!("{} {} {}", h.dim, h.dim, h.nnz()));
        for line in lines {
            let f: Vec<&str> = line.split_whitespace().collect();
            let (r, c): (usize, usize) = (f[0].parse().unwrap(), f[1].parse().unwrap());
            let v: f64 = f[2].parse().unwrap();
            assert_eq!(v, h.get(r - 1, c - 1));
        }
    }
}
