//! Global minimization of the mean-field energy.
//!
//! The α-stationarity condition is linear in α, so α is eliminated exactly
//! (`α = λ(sin θ₁ + sin θ₂)/(√2 ω)`) and damped Newton runs on the reduced
//! two-angle surface
//!
//! ```text
//! e(θ₁, θ₂) = −(Ω/2)(cos θ₁ + cos θ₂) + (χ/2) sin θ₁ sin θ₂ − (λ²/2ω)(sin θ₁ + sin θ₂)²
//! ```
//!
//! Starts are every analytic branch plus a handful of seeded random points.

use std::f64::consts::{PI, SQRT_2};

use nalgebra::{Matrix2, Vector2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    analytic_branches, boundary_distances, gradient_norm, mean_field_energy, mean_field_gradient,
    MeanFieldConfiguration, ModelParams, Phase, PhaseLabel,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Gradient-norm tolerance.
    pub tol: f64,
    pub max_iter: usize,
    /// Number of random starts added to the analytic branches.
    pub extra_starts: usize,
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 200, extra_starts: 8, seed: 0x5eed_d1c4e }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldSolution {
    pub config: MeanFieldConfiguration,
    pub energy: f64,
    pub gradient_norm: f64,
    /// Parity image of `config`, present when the minimum is degenerate.
    pub degenerate_partner: Option<MeanFieldConfiguration>,
    /// Phase read off the minimizing configuration, with analytic distances.
    pub branch: PhaseLabel,
}

/// Angle magnitude below which a solution counts as the trivial branch.
const TRIVIAL_ANGLE: f64 = 1e-6;

fn eliminated_alpha(params: &ModelParams, t1: f64, t2: f64) -> f64 {
    params.lambda * (t1.sin() + t2.sin()) / (SQRT_2 * params.boson_freq)
}

fn reduced_energy(params: &ModelParams, t: &Vector2<f64>) -> f64 {
    let (s1, c1) = t[0].sin_cos();
    let (s2, c2) = t[1].sin_cos();
    let l2w = params.lambda * params.lambda / params.boson_freq;
    -0.5 * params.spin_freq * (c1 + c2) + 0.5 * params.chi * s1 * s2 - 0.5 * l2w * (s1 + s2) * (s1 + s2)
}

fn reduced_gradient_hessian(params: &ModelParams, t: &Vector2<f64>) -> (Vector2<f64>, Matrix2<f64>) {
    let (s1, c1) = t[0].sin_cos();
    let (s2, c2) = t[1].sin_cos();
    let om = params.spin_freq;
    let chi = params.chi;
    let l2w = params.lambda * params.lambda / params.boson_freq;
    let s = s1 + s2;
    let g = Vector2::new(
        0.5 * om * s1 + 0.5 * chi * s2 * c1 - l2w * s * c1,
        0.5 * om * s2 + 0.5 * chi * s1 * c2 - l2w * s * c2,
    );
    let h11 = 0.5 * om * c1 - 0.5 * chi * s1 * s2 - l2w * (c1 * c1 - s * s1);
    let h22 = 0.5 * om * c2 - 0.5 * chi * s1 * s2 - l2w * (c2 * c2 - s * s2);
    let h12 = (0.5 * chi - l2w) * c1 * c2;
    (g, Matrix2::new(h11, h12, h12, h22))
}

fn full_config(params: &ModelParams, t: &Vector2<f64>) -> MeanFieldConfiguration {
    let t1 = crate::model::canonical_angle(t[0]);
    let t2 = crate::model::canonical_angle(t[1]);
    MeanFieldConfiguration { theta1: t1, theta2: t2, alpha: eliminated_alpha(params, t1, t2) }
}

/// Damped Newton from one start. Returns the final point and whether the
/// gradient tolerance was reached.
fn newton(params: &ModelParams, start: Vector2<f64>, opts: &SolverOptions) -> (Vector2<f64>, f64, bool) {
    let mut t = start;
    let mut e = reduced_energy(params, &t);
    for _ in 0..opts.max_iter {
        let (g, h) = reduced_gradient_hessian(params, &t);
        if g.norm() < opts.tol {
            return (t, e, true);
        }
        let mut mu = 0.0;
        let step = loop {
            if let Some(chol) = (h + Matrix2::identity() * mu).cholesky() {
                break -chol.solve(&g);
            }
            mu = if mu == 0.0 { 1e-6 } else { mu * 10.0 };
        };
        // Armijo backtracking; fall back to a short gradient step if Newton
        // direction stalls.
        let slope = g.dot(&step);
        let mut s = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let trial = t + step * s;
            let et = reduced_energy(params, &trial);
            if et <= e + 1e-4 * s * slope {
                t = trial;
                e = et;
                accepted = true;
                break;
            }
            s *= 0.5;
        }
        if !accepted {
            // at roundoff level the line search can no longer see a decrease;
            // take the full step and let the gradient test decide
            t += step;
            e = reduced_energy(params, &t);
        }
    }
    let (g, _) = reduced_gradient_hessian(params, &t);
    let ok = g.norm() < opts.tol;
    (t, e, ok)
}

/// Phase of a minimizing configuration: trivial angles are Phase I, parallel
/// angles Phase II, antiparallel angles Phase III.
pub fn phase_of_configuration(config: &MeanFieldConfiguration) -> Phase {
    if config.theta1.abs() < TRIVIAL_ANGLE && config.theta2.abs() < TRIVIAL_ANGLE {
        Phase::ParamagneticNormal
    } else if (config.theta1 - config.theta2).abs() <= (config.theta1 + config.theta2).abs() {
        Phase::FerromagneticSuperradiant
    } else {
        Phase::AntiferromagneticNormal
    }
}

/// Lowest-energy stationary point of the mean-field energy.
///
/// Analytic candidates compete on strict energy order. Random-start
/// candidates must beat them by more than a roundoff margin, so the exact
/// closed-form point is reported whenever the numerics merely reproduce it.
pub fn minimize(params: &ModelParams, opts: &SolverOptions) -> Result<MeanFieldSolution> {
    params.validate()?;
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidParams(format!("solver tolerance must be > 0, got {}", opts.tol)));
    }

    let mut starts: Vec<(Vector2<f64>, bool)> =
        analytic_branches(params).into_iter().map(|c| (Vector2::new(c.theta1, c.theta2), true)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for _ in 0..opts.extra_starts {
        starts.push((Vector2::new(rng.random_range(-PI..PI), rng.random_range(-PI..PI)), false));
    }

    let mut best: Option<(Vector2<f64>, f64)> = None;
    let mut best_failed_gradient = f64::INFINITY;
    for (start, analytic) in starts {
        let (t, e, ok) = newton(params, start, opts);
        if !ok {
            let (g, _) = reduced_gradient_hessian(params, &t);
            best_failed_gradient = best_failed_gradient.min(g.norm());
            continue;
        }
        let better = match best {
            None => true,
            Some((_, eb)) if analytic => e < eb,
            Some((_, eb)) => e < eb - 1e-13 * (1.0 + eb.abs()),
        };
        if better {
            best = Some((t, e));
        }
    }

    let Some((t, _)) = best else {
        return Err(Error::NonConvergence { best_gradient: best_failed_gradient, iterations: opts.max_iter });
    };

    let mut config = full_config(params, &t);
    if config.theta1 < 0.0 || (config.theta1 == 0.0 && config.theta2 < 0.0) {
        config = config.parity_partner();
    }
    let energy = mean_field_energy(params, &config);
    let grad = gradient_norm(&mean_field_gradient(params, &config));
    let degenerate_partner = (config.theta1.abs() > opts.tol).then(|| config.parity_partner());
    Ok(MeanFieldSolution {
        config,
        energy,
        gradient_norm: grad,
        degenerate_partner,
        branch: PhaseLabel { phase: phase_of_configuration(&config), boundary_distances: boundary_distances(params) },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyDerivatives {
    pub de_dchi: f64,
    pub d2e_dchi2: f64,
}

/// Central differences of the minimized energy in χ: three-point for the
/// first derivative, five-point for the second.
pub fn energy_derivatives_chi(params: &ModelParams, h: f64, opts: &SolverOptions) -> Result<EnergyDerivatives> {
    if !(h > 0.0) {
        return Err(Error::InvalidParams(format!("derivative step must be > 0, got {h}")));
    }
    let e = |d: f64| minimize(&params.with_chi(params.chi + d), opts).map(|s| s.energy);
    let (em2, em1, e0, ep1, ep2) = (e(-2.0 * h)?, e(-h)?, e(0.0)?, e(h)?, e(2.0 * h)?);
    Ok(EnergyDerivatives {
        de_dchi: (ep1 - em1) / (2.0 * h),
        d2e_dchi2: (-ep2 + 16.0 * ep1 - 30.0 * e0 + 16.0 * em1 - em2) / (12.0 * h * h),
    })
}

/// Piecewise closed-form χ-derivatives of the ground-state energy, using the
/// analytic phase. On a boundary the lower-χ phase's expression is used.
pub fn energy_derivatives_chi_analytic(params: &ModelParams) -> EnergyDerivatives {
    let om = params.spin_freq;
    match crate::model::classify_phase(params).phase {
        Phase::ParamagneticNormal => EnergyDerivatives { de_dchi: 0.0, d2e_dchi2: 0.0 },
        Phase::FerromagneticSuperradiant => {
            // E = −(Ω/2)(Ω/K + K/Ω), K = (4λ² − χω)/ω, dK/dχ = −1
            let k = params.chi_normal_superradiant() + om - params.chi;
            EnergyDerivatives { de_dchi: -0.5 * om * (om / (k * k) - 1.0 / om), d2e_dchi2: -om * om / (k * k * k) }
        }
        Phase::AntiferromagneticNormal => {
            let chi = params.chi;
            EnergyDerivatives {
                de_dchi: -0.5 * om * (1.0 / om - om / (chi * chi)),
                d2e_dchi2: -om * om / (chi * chi * chi),
            }
        }
    }
}
