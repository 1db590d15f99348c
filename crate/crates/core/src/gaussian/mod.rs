//! Quadratic (Holstein–Primakoff) fluctuations around the mean-field minimum.
//!
//! After rotating each ensemble onto its mean-field direction, displacing the
//! boson, and keeping terms of order N⁰, the Hamiltonian becomes three coupled
//! oscillators
//!
//! ```text
//! H₂ = Σᵢ εᵢ/2 (xᵢ² + pᵢ² − 1) + τ₁₂ x₁x₂ + τ₁₃ x₁x₃ + τ₂₃ x₂x₃
//! ```
//!
//! written as `½ rᵀ H r` with `r = (x₁, x₂, x₃, p₁, p₂, p₃)` and `H = H_x ⊕ H_p`.
//! [`williamson`] finds the symplectic `S` with `Sᵀ H S = diag(Δ, Δ)`; the
//! ground state covariance matrix is then `σ = S Sᵀ / 2`.

pub mod symplectic;

use std::f64::consts::SQRT_2;

use nalgebra::{Matrix3, Matrix6, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::solver::{minimize, MeanFieldSolution, SolverOptions};

pub use symplectic::{canonical_form, williamson_three_step};

/// Largest gradient norm accepted as an expansion point.
pub const STATIONARITY_GATE: f64 = 1e-8;
/// Negative `H_x` eigenvalues down to this magnitude are clamped to a gapless mode.
pub const GAPLESS_CLAMP: f64 = 1e-10;
/// Band around ½ for `Δx·Δp` that is treated as exactly ½ (a pure mode).
pub const UNCERTAINTY_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticCoefficients {
    pub eps1: f64,
    pub eps2: f64,
    pub eps3: f64,
    pub tau12: f64,
    pub tau13: f64,
    pub tau23: f64,
}

impl QuadraticCoefficients {
    pub fn eps(&self) -> [f64; 3] {
        [self.eps1, self.eps2, self.eps3]
    }

    /// The x-block: εᵢ on the diagonal, τᵢⱼ off it.
    pub fn x_block(&self) -> Matrix3<f64> {
        Matrix3::new(
            self.eps1, self.tau12, self.tau13, //
            self.tau12, self.eps2, self.tau23, //
            self.tau13, self.tau23, self.eps3,
        )
    }

    pub fn p_block(&self) -> Matrix3<f64> {
        Matrix3::from_diagonal(&self.eps().into())
    }

    /// `H = H_x ⊕ H_p` in the `(x₁, x₂, x₃, p₁, p₂, p₃)` ordering.
    pub fn hamiltonian_matrix(&self) -> Matrix6<f64> {
        let mut h = Matrix6::zeros();
        h.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.x_block());
        h.fixed_view_mut::<3, 3>(3, 3).copy_from(&self.p_block());
        h
    }
}

/// Coefficients of the quadratic Hamiltonian at a stationary mean-field point.
pub fn build_quadratic(params: &ModelParams, solution: &MeanFieldSolution) -> Result<QuadraticCoefficients> {
    if !(solution.gradient_norm < STATIONARITY_GATE) {
        return Err(Error::InvalidExpansionPoint { gradient_norm: solution.gradient_norm });
    }
    let c = solution.config;
    let (s1, c1) = c.theta1.sin_cos();
    let (s2, c2) = c.theta2.sin_cos();
    let om = params.spin_freq;
    let chi = params.chi;
    let lam = params.lambda;
    let shift = 2.0 * SQRT_2 * lam * c.alpha;
    Ok(QuadraticCoefficients {
        eps1: om * c1 - chi * s1 * s2 + shift * s1,
        eps2: om * c2 - chi * s1 * s2 + shift * s2,
        eps3: params.boson_freq,
        tau12: chi * c1 * c2,
        tau13: SQRT_2 * lam * c1,
        tau23: SQRT_2 * lam * c2,
    })
}

/// Normal-mode energies, the diagonalizing symplectic matrix and the ground
/// state covariance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianSpectrum {
    /// Symplectic eigenvalues, ascending.
    pub deltas: [f64; 3],
    /// `S` with `Sᵀ Γ S = Γ` and `Sᵀ H S = diag(Δ, Δ)`; `r = S r'`.
    pub symplectic: Matrix6<f64>,
    /// `σ = S Sᵀ / 2`.
    pub covariance: Matrix6<f64>,
    /// `(ΣΔᵢ − Σεᵢ)/2`, the order-N⁰ shift of the ground energy.
    pub ground_energy_correction: f64,
}

impl GaussianSpectrum {
    pub fn gap(&self) -> f64 {
        self.deltas[0]
    }
}

/// Lowest eigenvalue of the x-block; fails if it is below `-GAPLESS_CLAMP`.
fn check_stability(coeffs: &QuadraticCoefficients) -> Result<()> {
    let min_x = SymmetricEigen::new(coeffs.x_block()).eigenvalues.min();
    if min_x < -GAPLESS_CLAMP {
        return Err(Error::UnstableMode { eigenvalue: min_x });
    }
    // H_p must be positive definite for a symplectic normal form to exist
    let min_p = coeffs.eps().into_iter().fold(f64::INFINITY, f64::min);
    if !(min_p > 0.0) {
        return Err(Error::UnstableMode { eigenvalue: min_p });
    }
    Ok(())
}

/// `a·b` where an infinite factor times an exact zero counts as zero.
fn scaled(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        0.0
    } else {
        a * b
    }
}

/// Symplectic diagonalization through the eigen-decomposition of
/// `H_p^{1/2} H_x H_p^{1/2} = O diag(Δ²) Oᵀ`.
///
/// With `P = H_p`, `S = diag(P^{1/2} O Δ^{-1/2}, P^{-1/2} O Δ^{1/2})`. A gapless
/// mode (Δ = 0) yields infinite x-columns and an infinite x-variance, which
/// is the physical divergence at a critical point.
pub fn williamson(coeffs: &QuadraticCoefficients) -> Result<GaussianSpectrum> {
    check_stability(coeffs)?;
    let eps = coeffs.eps();
    let sqrt_p: [f64; 3] = eps.map(f64::sqrt);
    let m = Matrix3::from_fn(|i, j| sqrt_p[i] * coeffs.x_block()[(i, j)] * sqrt_p[j]);
    let eig = SymmetricEigen::new(m);

    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));
    let deltas: [f64; 3] = order.map(|k| eig.eigenvalues[k].max(0.0).sqrt());
    let rot = Matrix3::from_fn(|i, j| eig.eigenvectors[(i, order[j])]);

    let mut s = Matrix6::zeros();
    let mut cov = Matrix6::zeros();
    for i in 0..3 {
        for k in 0..3 {
            let inv_root = 1.0 / deltas[k].sqrt();
            s[(i, k)] = scaled(sqrt_p[i] * rot[(i, k)], inv_root);
            s[(3 + i, 3 + k)] = rot[(i, k)] * deltas[k].sqrt() / sqrt_p[i];
        }
    }
    // σ_x = P^{1/2} O Δ⁻¹ Oᵀ P^{1/2} / 2, σ_p = P^{-1/2} O Δ Oᵀ P^{-1/2} / 2
    for i in 0..3 {
        for j in 0..3 {
            let mut sx = 0.0;
            let mut sp = 0.0;
            for k in 0..3 {
                let w = rot[(i, k)] * rot[(j, k)];
                sx += scaled(w, 1.0 / deltas[k]);
                sp += w * deltas[k];
            }
            cov[(i, j)] = 0.5 * sqrt_p[i] * sqrt_p[j] * sx;
            cov[(3 + i, 3 + j)] = 0.5 * sp / (sqrt_p[i] * sqrt_p[j]);
        }
    }

    let ground_energy_correction = 0.5 * (deltas.iter().sum::<f64>() - eps.iter().sum::<f64>());
    Ok(GaussianSpectrum { deltas, symplectic: s, covariance: cov, ground_energy_correction })
}

/// Quadrature variances `(Δxᵢ)²` and `(Δpᵢ)²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fluctuations {
    pub dx2: [f64; 3],
    pub dp2: [f64; 3],
}

impl Fluctuations {
    /// Entanglement entropy of each mode with the other two.
    pub fn entropies(&self) -> Result<[f64; 3]> {
        let mut out = [0.0; 3];
        for (s, (dx2, dp2)) in out.iter_mut().zip(self.dx2.iter().zip(&self.dp2)) {
            *s = entanglement_entropy(dx2.sqrt(), dp2.sqrt())?;
        }
        Ok(out)
    }
}

pub fn covariance_observables(spectrum: &GaussianSpectrum) -> Fluctuations {
    let s = &spectrum.covariance;
    Fluctuations { dx2: [s[(0, 0)], s[(1, 1)], s[(2, 2)]], dp2: [s[(3, 3)], s[(4, 4)], s[(5, 5)]] }
}

/// Von Neumann entropy (nats) of a single-mode reduced Gaussian state with
/// standard deviations `dx`, `dp`.
pub fn entanglement_entropy(dx: f64, dp: f64) -> Result<f64> {
    let nu = dx * dp;
    if nu.is_nan() || nu < 0.5 - UNCERTAINTY_SLACK {
        return Err(Error::UncertaintyViolation { product: nu });
    }
    if nu.is_infinite() {
        return Ok(f64::INFINITY);
    }
    // a pure mode up to roundoff: S ~ −(ν−½)ln(ν−½) is below 1e-10 here
    if nu <= 0.5 + UNCERTAINTY_SLACK {
        return Ok(0.0);
    }
    let plus = nu + 0.5;
    let minus = nu - 0.5;
    Ok(plus * plus.ln() - minus * minus.ln())
}

/// Everything the fluctuation analysis produces at one parameter point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointAnalysis {
    pub solution: MeanFieldSolution,
    pub coefficients: QuadraticCoefficients,
    pub spectrum: GaussianSpectrum,
    pub fluctuations: Fluctuations,
}

pub fn analyze(params: &ModelParams, opts: &SolverOptions) -> Result<PointAnalysis> {
    let solution = minimize(params, opts)?;
    let coefficients = build_quadratic(params, &solution)?;
    let spectrum = williamson(&coefficients)?;
    let fluctuations = covariance_observables(&spectrum);
    Ok(PointAnalysis { solution, coefficients, spectrum, fluctuations })
}

/// Smallest excitation energy Δ_min at the mean-field ground state.
pub fn energy_gap(params: &ModelParams) -> Result<f64> {
    energy_gap_with(params, &SolverOptions::default())
}

pub fn energy_gap_with(params: &ModelParams, opts: &SolverOptions) -> Result<f64> {
    let solution = minimize(params, opts)?;
    let coeffs = build_quadratic(params, &solution)?;
    Ok(williamson(&coeffs)?.gap())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::MeanFieldConfiguration;
    use approx::assert_abs_diff_eq;

    fn p(om: f64, w: f64, chi: f64, lam: f64) -> ModelParams {
        ModelParams::new(om, w, chi, lam).unwrap()
    }

    fn trivial_solution(params: &ModelParams) -> MeanFieldSolution {
        minimize(params, &SolverOptions::default()).unwrap()
    }

    fn coeffs(eps: [f64; 3], tau: [f64; 3]) -> QuadraticCoefficients {
        QuadraticCoefficients { eps1: eps[0], eps2: eps[1], eps3: eps[2], tau12: tau[0], tau13: tau[1], tau23: tau[2] }
    }

    #[test]
    fn quadratic_examples() {
        let pp = p(1.0, 1.0, 0.0, 0.0);
        let q = build_quadratic(&pp, &trivial_solution(&pp)).unwrap();
        assert_eq!(q, coeffs([1.0, 1.0, 1.0], [0.0, 0.0, 0.0]));

        let pp = p(1.0, 1.0, 0.5, 0.0);
        let q = build_quadratic(&pp, &trivial_solution(&pp)).unwrap();
        assert_eq!((q.tau12, q.tau13, q.tau23), (0.5, 0.0, 0.0));

        let pp = p(1.0, 1.0, 0.0, 0.3);
        let q = build_quadratic(&pp, &trivial_solution(&pp)).unwrap();
        assert_abs_diff_eq!(q.tau13, SQRT_2 * 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(q.tau23, SQRT_2 * 0.3, epsilon = 1e-15);
    }

    #[test]
    fn quadratic_invariants_in_broken_phases() {
        for pp in [p(1.0, 1.0, -1.0, 0.3), p(1.2, 0.7, 2.0, 0.3), p(1.0, 1.0, 0.3, 0.9)] {
            let sol = trivial_solution(&pp);
            let q = build_quadratic(&pp, &sol).unwrap();
            assert_eq!(q.eps3, pp.boson_freq);
            let ratio = sol.config.theta1.cos() / sol.config.theta2.cos();
            assert_abs_diff_eq!(q.tau13 / q.tau23, ratio, epsilon = 1e-12);
        }
    }

    #[test]
    fn rejects_non_stationary_expansion_point() {
        let pp = p(1.0, 1.0, -1.0, 0.3);
        let mut sol = trivial_solution(&pp);
        sol.config = MeanFieldConfiguration::new(0.3, 0.1, 0.0);
        sol.gradient_norm = 0.1;
        assert!(matches!(build_quadratic(&pp, &sol), Err(Error::InvalidExpansionPoint { .. })));
    }

    #[test]
    fn decoupled_oscillators() {
        let s = williamson(&coeffs([1.0, 1.0, 1.0], [0.0; 3])).unwrap();
        assert_eq!(s.deltas, [1.0, 1.0, 1.0]);
        assert_abs_diff_eq!(s.symplectic, Matrix6::identity(), epsilon = 1e-15);
        assert_abs_diff_eq!(s.covariance, Matrix6::identity() * 0.5, epsilon = 1e-15);
        assert_eq!(s.ground_energy_correction, 0.0);
        let f = covariance_observables(&s);
        assert_eq!(f.dx2, [0.5; 3]);
        assert_eq!(f.dp2, [0.5; 3]);
        assert_eq!(f.entropies().unwrap(), [0.0; 3]);
    }

    #[test]
    fn two_coupled_oscillators() {
        // x± = (x₁ ± x₂)/√2 decouple with stiffness ε ± τ
        let (e, t, e3) = (1.3, 0.4, 0.9);
        let s = williamson(&coeffs([e, e, e3], [t, 0.0, 0.0])).unwrap();
        let mut expected = [(e * (e - t)).sqrt(), (e * (e + t)).sqrt(), e3];
        expected.sort_by(f64::total_cmp);
        for i in 0..3 {
            assert_abs_diff_eq!(s.deltas[i], expected[i], epsilon = 1e-14);
        }
    }

    #[test]
    fn unstable_mode_rejected_and_tiny_negative_clamped() {
        let err = williamson(&coeffs([1.0, 1.0, 1.0], [1.1, 0.0, 0.0])).unwrap_err();
        assert!(matches!(err, Error::UnstableMode { .. }));
        let err = williamson(&coeffs([-1.0, 1.0, 1.0], [0.0; 3])).unwrap_err();
        assert!(matches!(err, Error::UnstableMode { .. }));

        let s = williamson(&coeffs([1.0, 1.0, 1.0], [1.0 + 5e-11, 0.0, 0.0])).unwrap();
        assert_eq!(s.deltas[0], 0.0);
        let f = covariance_observables(&s);
        assert_eq!(f.dx2[0], f64::INFINITY);
        assert!(f.dp2[0].is_finite());
        assert_eq!(f.entropies().unwrap()[0], f64::INFINITY);
    }

    #[test]
    fn gap_closes_at_dicke_point() {
        let pp = p(1.0, 1.0, 0.0, 0.5 - 1e-6);
        let g = energy_gap(&pp).unwrap();
        assert!(g < 5e-3, "{g}");
        assert!(g < energy_gap(&p(1.0, 1.0, 0.0, 0.5 - 1e-4)).unwrap());
    }

    #[test]
    fn gap_examples() {
        assert!(energy_gap(&p(1.0, 1.0, -0.64, 0.3)).unwrap() < 1e-5);
        assert!(energy_gap(&p(1.0, 1.0, 1.0, 0.3)).unwrap() < 1e-5);
        assert_eq!(energy_gap(&p(1.0, 1.0, 0.0, 0.0)).unwrap(), 1.0);
    }

    #[test]
    fn entropy_examples() {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(entanglement_entropy(r, r).unwrap(), 0.0);
        let s = entanglement_entropy(1.0, 1.0).unwrap();
        assert_abs_diff_eq!(s, 1.5 * 1.5f64.ln() - 0.5 * 0.5f64.ln(), epsilon = 1e-15);
        assert_abs_diff_eq!(s, 0.954_771, epsilon = 1e-6);
        // inside the slack band: clamped to ν = ½
        assert_eq!(entanglement_entropy(0.5 - 1e-13, 1.0).unwrap(), 0.0);
        assert!(matches!(entanglement_entropy(0.4, 1.0), Err(Error::UncertaintyViolation { .. })));
        assert!(matches!(entanglement_entropy(f64::NAN, 1.0), Err(Error::UncertaintyViolation { .. })));
    }

    #[test]
    fn dicke_limit_antisymmetric_spin_mode_is_bare() {
        // at χ = 0 the antisymmetric spin mode decouples from the boson with Δ = Ω
        let pp = p(1.0, 1.0, 0.0, 0.35);
        let a = analyze(&pp, &SolverOptions::default()).unwrap();
        assert!(a.spectrum.deltas.iter().any(|d| (d - 1.0).abs() < 1e-12), "{:?}", a.spectrum.deltas);
    }
}
