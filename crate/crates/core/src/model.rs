//! Model couplings, the mean-field energy surface and the analytic phase
//! diagram.
//!
//! Everything here is intensive (per spin): the ensemble size never enters.
//! The trial state is a product of two SU(2) coherent states rotated by
//! `theta1`, `theta2` about the y axis and a bosonic coherent state with
//! scaled amplitude `alpha`.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Distance in χ below which a point is treated as lying on a boundary.
pub const BOUNDARY_TIE_TOLERANCE: f64 = 1e-12;

/// The four couplings of the Hamiltonian, all in energy units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Spin transition frequency Ω.
    pub spin_freq: f64,
    /// Boson frequency ω.
    pub boson_freq: f64,
    /// Spin–spin coupling χ; negative is ferromagnetic.
    pub chi: f64,
    /// Spin–boson coupling λ.
    pub lambda: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self { spin_freq: 1.0, boson_freq: 1.0, chi: 0.0, lambda: 0.0 }
    }
}

impl ModelParams {
    pub fn new(spin_freq: f64, boson_freq: f64, chi: f64, lambda: f64) -> Result<Self> {
        let p = Self { spin_freq, boson_freq, chi, lambda };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.spin_freq, self.boson_freq, self.chi, self.lambda].iter().all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidParams(format!("non-finite coupling in {self:?}")));
        }
        if self.spin_freq <= 0.0 {
            return Err(Error::InvalidParams(format!("Omega must be > 0, got {}", self.spin_freq)));
        }
        if self.boson_freq <= 0.0 {
            return Err(Error::InvalidParams(format!("omega must be > 0, got {}", self.boson_freq)));
        }
        if self.lambda < 0.0 {
            return Err(Error::InvalidParams(format!("lambda must be >= 0, got {}", self.lambda)));
        }
        Ok(())
    }

    pub fn with_chi(self, chi: f64) -> Self {
        Self { chi, ..self }
    }

    pub fn with_lambda(self, lambda: f64) -> Self {
        Self { lambda, ..self }
    }

    pub fn with_spin_freq(self, spin_freq: f64) -> Self {
        Self { spin_freq, ..self }
    }

    /// χ on the paramagnetic-normal / ferromagnetic-superradiant line,
    /// `(4λ² − Ωω)/ω`.
    pub fn chi_normal_superradiant(&self) -> f64 {
        (4.0 * self.lambda * self.lambda - self.spin_freq * self.boson_freq) / self.boson_freq
    }

    /// χ on the paramagnetic / antiferromagnetic line, `Ω`.
    pub fn chi_paramagnetic_antiferro(&self) -> f64 {
        self.spin_freq
    }

    /// χ on the first-order ferromagnetic / antiferromagnetic line, `2λ²/ω`.
    pub fn chi_first_order(&self) -> f64 {
        2.0 * self.lambda * self.lambda / self.boson_freq
    }
}

/// Variational angles and scaled boson displacement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldConfiguration {
    pub theta1: f64,
    pub theta2: f64,
    pub alpha: f64,
}

/// Maps an angle onto `[-π, π]`. Values already in range are left untouched.
pub fn canonical_angle(theta: f64) -> f64 {
    if (-PI..=PI).contains(&theta) {
        theta
    } else {
        (theta + PI).rem_euclid(2.0 * PI) - PI
    }
}

impl MeanFieldConfiguration {
    pub fn new(theta1: f64, theta2: f64, alpha: f64) -> Self {
        Self { theta1: canonical_angle(theta1), theta2: canonical_angle(theta2), alpha }
    }

    pub const TRIVIAL: Self = Self { theta1: 0.0, theta2: 0.0, alpha: 0.0 };

    /// Image under the Z₂ parity transformation.
    pub fn parity_partner(&self) -> Self {
        Self { theta1: -self.theta1, theta2: -self.theta2, alpha: -self.alpha }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Phase {
    /// Phase I: spins along z, no boson condensate.
    ParamagneticNormal,
    /// Phase II: spins parallel along x, macroscopic boson field.
    FerromagneticSuperradiant,
    /// Phase III: spins antiparallel along x, no boson condensate.
    AntiferromagneticNormal,
}

impl Phase {
    pub fn roman(&self) -> &'static str {
        match self {
            Phase::ParamagneticNormal => "I",
            Phase::FerromagneticSuperradiant => "II",
            Phase::AntiferromagneticNormal => "III",
        }
    }

    pub fn description(&self) -> &'static str {
        match self {
            Phase::ParamagneticNormal => "paramagnetic normal",
            Phase::FerromagneticSuperradiant => "ferromagnetic superradiant",
            Phase::AntiferromagneticNormal => "antiferromagnetic normal",
        }
    }

    pub fn code(&self) -> i32 {
        match self {
            Phase::ParamagneticNormal => 1,
            Phase::FerromagneticSuperradiant => 2,
            Phase::AntiferromagneticNormal => 3,
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.roman())
    }
}

/// Signed χ-distances `χ − χ_boundary` to the three analytic lines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryDistances {
    /// I–II line, `χ − (4λ² − Ωω)/ω`.
    pub normal_superradiant: f64,
    /// I–III line, `χ − Ω`.
    pub paramagnetic_antiferro: f64,
    /// II–III line, `χ − 2λ²/ω`.
    pub first_order: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseLabel {
    pub phase: Phase,
    pub boundary_distances: BoundaryDistances,
}

pub fn boundary_distances(params: &ModelParams) -> BoundaryDistances {
    BoundaryDistances {
        normal_superradiant: params.chi - params.chi_normal_superradiant(),
        paramagnetic_antiferro: params.chi - params.chi_paramagnetic_antiferro(),
        first_order: params.chi - params.chi_first_order(),
    }
}

/// Energy per spin of the product trial state.
pub fn mean_field_energy(params: &ModelParams, config: &MeanFieldConfiguration) -> f64 {
    let (s1, c1) = config.theta1.sin_cos();
    let (s2, c2) = config.theta2.sin_cos();
    let a = config.alpha;
    -0.5 * params.spin_freq * (c1 + c2) + 0.5 * params.chi * s1 * s2 + params.boson_freq * a * a
        - SQRT_2 * params.lambda * a * (s1 + s2)
}

/// `(∂E/∂θ₁, ∂E/∂θ₂, ∂E/∂α)`.
pub fn mean_field_gradient(params: &ModelParams, config: &MeanFieldConfiguration) -> [f64; 3] {
    let (s1, c1) = config.theta1.sin_cos();
    let (s2, c2) = config.theta2.sin_cos();
    let a = config.alpha;
    let om = params.spin_freq;
    let chi = params.chi;
    let lam = params.lambda;
    [
        0.5 * om * s1 + 0.5 * chi * s2 * c1 - SQRT_2 * lam * a * c1,
        0.5 * om * s2 + 0.5 * chi * s1 * c2 - SQRT_2 * lam * a * c2,
        2.0 * (params.boson_freq * a - lam / SQRT_2 * (s1 + s2)),
    ]
}

pub fn gradient_norm(g: &[f64; 3]) -> f64 {
    g.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Closed-form stationary points: the trivial one, the symmetric
/// (θ₁ = θ₂) pair when it exists and the antisymmetric (θ₁ = −θ₂) pair when
/// it exists. Partners are listed positive-θ₁ first.
pub fn analytic_branches(params: &ModelParams) -> Vec<MeanFieldConfiguration> {
    let mut out = vec![MeanFieldConfiguration::TRIVIAL];
    let om = params.spin_freq;
    let w = params.boson_freq;

    let k = 4.0 * params.lambda * params.lambda - params.chi * w;
    if k > 0.0 {
        let c = om * w / k;
        if c.abs() <= 1.0 {
            let theta = c.acos();
            if theta != 0.0 {
                let alpha = SQRT_2 * params.lambda * theta.sin() / w;
                let b = MeanFieldConfiguration::new(theta, theta, alpha);
                out.push(b);
                out.push(b.parity_partner());
            }
        }
    }

    if params.chi != 0.0 {
        let c = om / params.chi;
        if c.abs() <= 1.0 {
            let theta = c.acos();
            if theta != 0.0 {
                let b = MeanFieldConfiguration::new(theta, -theta, 0.0);
                out.push(b);
                out.push(b.parity_partner());
            }
        }
    }
    out
}

/// Analytic phase from the three boundary inequalities. Points within
/// [`BOUNDARY_TIE_TOLERANCE`] of a line go to the lower-χ phase.
pub fn classify_phase(params: &ModelParams) -> PhaseLabel {
    let d = boundary_distances(params);
    let above = |x: f64| x > BOUNDARY_TIE_TOLERANCE;
    let phase = if above(d.paramagnetic_antiferro) && above(d.first_order) {
        Phase::AntiferromagneticNormal
    } else if above(d.normal_superradiant) && !above(d.paramagnetic_antiferro) {
        Phase::ParamagneticNormal
    } else {
        Phase::FerromagneticSuperradiant
    };
    PhaseLabel { phase, boundary_distances: d }
}

/// Order parameters and excitation numbers, normalized by J or N.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderParameters {
    /// ⟨J₁ₓ⟩/J
    pub jx1: f64,
    /// ⟨J₂ₓ⟩/J
    pub jx2: f64,
    /// ⟨b⟩/√N
    pub b: f64,
    /// ⟨N_S,1⟩/J
    pub ns1: f64,
    /// ⟨N_S,2⟩/J
    pub ns2: f64,
    /// ⟨N_B⟩/N
    pub nb: f64,
}

pub fn order_parameters(config: &MeanFieldConfiguration) -> OrderParameters {
    OrderParameters {
        jx1: -config.theta1.sin(),
        jx2: -config.theta2.sin(),
        b: config.alpha,
        ns1: 1.0 - config.theta1.cos(),
        ns2: 1.0 - config.theta2.cos(),
        nb: config.alpha * config.alpha,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn p(om: f64, w: f64, chi: f64, lam: f64) -> ModelParams {
        ModelParams::new(om, w, chi, lam).unwrap()
    }

    fn finite_difference_gradient(params: &ModelParams, c: &MeanFieldConfiguration) -> [f64; 3] {
        let h = 1e-6;
        let e = |t1: f64, t2: f64, a: f64| {
            mean_field_energy(params, &MeanFieldConfiguration { theta1: t1, theta2: t2, alpha: a })
        };
        [
            (e(c.theta1 + h, c.theta2, c.alpha) - e(c.theta1 - h, c.theta2, c.alpha)) / (2.0 * h),
            (e(c.theta1, c.theta2 + h, c.alpha) - e(c.theta1, c.theta2 - h, c.alpha)) / (2.0 * h),
            (e(c.theta1, c.theta2, c.alpha + h) - e(c.theta1, c.theta2, c.alpha - h)) / (2.0 * h),
        ]
    }

    #[test]
    fn rejects_invalid_params() {
        assert!(ModelParams::new(0.0, 1.0, 0.0, 0.0).is_err());
        assert!(ModelParams::new(1.0, -1.0, 0.0, 0.0).is_err());
        assert!(ModelParams::new(1.0, 1.0, 0.0, -0.1).is_err());
        assert!(ModelParams::new(1.0, 1.0, f64::NAN, 0.1).is_err());
        assert!(ModelParams::new(1.0, 1.0, -3.0, 0.1).is_ok());
    }

    #[test]
    fn energy_examples() {
        let e = mean_field_energy(&p(1.0, 1.0, 0.0, 0.0), &MeanFieldConfiguration::TRIVIAL);
        assert_eq!(e, -1.0);

        let pp = ModelParams { spin_freq: 0.0, ..p(1.0, 1.0, 0.7, 0.0) };
        let half = std::f64::consts::FRAC_PI_2;
        let e = mean_field_energy(&pp, &MeanFieldConfiguration::new(half, half, 0.0));
        assert_abs_diff_eq!(e, 0.35, epsilon = 1e-15);

        // symmetric branch at 4λ² − χω = 1.36; closed form −(1/2)(1/1.36 + 1.36)
        let theta = (1.0f64 / 1.36).acos();
        let alpha = SQRT_2 * 0.3 * theta.sin();
        let e = mean_field_energy(&p(1.0, 1.0, -1.0, 0.3), &MeanFieldConfiguration::new(theta, theta, alpha));
        assert_abs_diff_eq!(e, -1.047_647_058_823_529_4, epsilon = 1e-12);
    }

    #[test]
    fn gradient_examples() {
        let g = mean_field_gradient(&p(1.0, 1.0, 0.0, 0.0), &MeanFieldConfiguration::TRIVIAL);
        assert_eq!(g, [0.0, 0.0, 0.0]);

        let t = 0.5f64.acos();
        let g = mean_field_gradient(&p(1.0, 1.0, 2.0, 0.3), &MeanFieldConfiguration::new(t, -t, 0.0));
        for gi in g {
            assert_abs_diff_eq!(gi, 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn branches_deep_normal() {
        assert_eq!(analytic_branches(&p(1.0, 1.0, 0.0, 0.0)), vec![MeanFieldConfiguration::TRIVIAL]);
    }

    #[test]
    fn branches_dicke_limit() {
        let b = analytic_branches(&p(1.0, 1.0, 0.0, 0.6));
        let sym = b.iter().find(|c| c.theta1 > 0.0 && c.theta1 == c.theta2).unwrap();
        assert_abs_diff_eq!(sym.theta1.cos(), 1.0 / 1.44, epsilon = 1e-14);
        assert_abs_diff_eq!(sym.alpha, SQRT_2 * 0.6 * sym.theta1.sin(), epsilon = 1e-14);
        assert!(b.contains(&sym.parity_partner()));
    }

    #[test]
    fn branches_coupled_top_limit() {
        let b = analytic_branches(&p(1.0, 1.0, 2.0, 0.0));
        let anti = b.iter().find(|c| c.theta1 > 0.0 && c.theta1 == -c.theta2).unwrap();
        assert_abs_diff_eq!(anti.theta1.cos(), 0.5, epsilon = 1e-15);
        assert_eq!(anti.alpha, 0.0);
        // positive-θ₁ partner first
        let idx = b.iter().position(|c| c == anti).unwrap();
        assert_eq!(b[idx + 1], anti.parity_partner());
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify_phase(&p(1.0, 1.0, 0.0, 0.0)).phase, Phase::ParamagneticNormal);
        assert_eq!(classify_phase(&p(1.0, 1.0, -0.64 + 1e-6, 0.3)).phase, Phase::ParamagneticNormal);
        assert_eq!(classify_phase(&p(1.0, 1.0, -0.64 - 1e-6, 0.3)).phase, Phase::FerromagneticSuperradiant);
        assert_eq!(classify_phase(&p(1.0, 1.0, 2.0, 0.3)).phase, Phase::AntiferromagneticNormal);
    }

    #[test]
    fn classify_tie_break_goes_to_lower_chi_phase() {
        // exactly on χ = Ω: lower side is Phase I
        assert_eq!(classify_phase(&p(1.0, 1.0, 1.0, 0.3)).phase, Phase::ParamagneticNormal);
        // exactly on χ = 2λ²/ω with λ² = 0.8: lower side is Phase II
        let lam = 0.8f64.sqrt();
        let pp = p(1.0, 1.0, 2.0 * lam * lam, lam);
        assert_eq!(classify_phase(&pp).phase, Phase::FerromagneticSuperradiant);
        // exactly on the dashed line at λ = 0: lower side is Phase II
        assert_eq!(classify_phase(&p(1.0, 1.0, -1.0, 0.0)).phase, Phase::FerromagneticSuperradiant);
    }

    #[test]
    fn distances_consistent_with_label() {
        let l = classify_phase(&p(1.0, 1.0, 0.2, 0.3));
        assert_eq!(l.phase, Phase::ParamagneticNormal);
        assert_abs_diff_eq!(l.boundary_distances.normal_superradiant, 0.84, epsilon = 1e-14);
        assert_abs_diff_eq!(l.boundary_distances.paramagnetic_antiferro, -0.8, epsilon = 1e-14);
        assert_abs_diff_eq!(l.boundary_distances.first_order, 0.02, epsilon = 1e-14);
    }

    #[test]
    fn order_parameter_examples() {
        let o = order_parameters(&MeanFieldConfiguration::TRIVIAL);
        assert_eq!((o.jx1, o.jx2, o.b, o.ns1, o.ns2, o.nb), (-0.0, -0.0, 0.0, 0.0, 0.0, 0.0));

        let b = analytic_branches(&p(1.0, 1.0, 2.0, 0.0));
        let o = order_parameters(&b[1]);
        assert_abs_diff_eq!(o.jx1, -(3f64.sqrt()) / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(o.jx2, 3f64.sqrt() / 2.0, epsilon = 1e-15);
        assert_eq!(o.b, 0.0);

        let b = analytic_branches(&p(1.0, 1.0, -1.0, 0.3));
        let o = order_parameters(&b[1]);
        assert_eq!(o.jx1, o.jx2);
        assert!(o.nb > 0.0);
    }

    #[test]
    fn boundary_consistency_on_dashed_line() {
        // on χ = 4λ² − Ω the symmetric branch collapses onto the trivial one
        let pp = p(1.0, 1.0, 4.0 * 0.09 - 1.0, 0.3);
        let e_trivial = mean_field_energy(&pp, &MeanFieldConfiguration::TRIVIAL);
        assert_eq!(e_trivial, -1.0);
        let k = 4.0 * 0.09 - pp.chi;
        let theta = (1.0 / k).min(1.0).acos();
        assert!(theta < 1e-7);
        let c = MeanFieldConfiguration::new(theta, theta, SQRT_2 * 0.3 * theta.sin());
        assert_abs_diff_eq!(mean_field_energy(&pp, &c), -1.0, epsilon = 1e-13);
    }

    #[test]
    fn canonical_angles() {
        assert_eq!(canonical_angle(0.3), 0.3);
        assert_abs_diff_eq!(canonical_angle(3.0 * PI / 2.0), -PI / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(canonical_angle(-5.0 * PI / 2.0), -PI / 2.0, epsilon = 1e-14);
    }

    fn arb_params() -> impl Strategy<Value = ModelParams> {
        (0.1f64..3.0, 0.1f64..3.0, -3.0f64..3.0, 0.0f64..1.5)
            .prop_map(|(om, w, chi, lam)| ModelParams::new(om, w, chi, lam).unwrap())
    }

    fn arb_config() -> impl Strategy<Value = MeanFieldConfiguration> {
        (-PI..PI, -PI..PI, -2.0f64..2.0).prop_map(|(a, b, c)| MeanFieldConfiguration::new(a, b, c))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn gradient_matches_finite_differences(params in arb_params(), c in arb_config()) {
            let g = mean_field_gradient(&params, &c);
            let fd = finite_difference_gradient(&params, &c);
            for i in 0..3 {
                prop_assert!((g[i] - fd[i]).abs() < 1e-6, "component {i}: {} vs {}", g[i], fd[i]);
            }
        }
    }

    proptest! {
        #[test]
        fn branches_are_stationary_and_paired(params in arb_params()) {
            let branches = analytic_branches(&params);
            for b in &branches {
                let g = mean_field_gradient(&params, b);
                prop_assert!(gradient_norm(&g) < 1e-10, "{b:?}: {g:?}");
                let partner = b.parity_partner();
                let paired = branches.iter().any(|x| {
                    (x.theta1 - partner.theta1).abs() < 1e-15
                        && (x.theta2 - partner.theta2).abs() < 1e-15
                        && (x.alpha - partner.alpha).abs() < 1e-15
                });
                prop_assert!(paired, "no partner for {:?}", b);
                prop_assert_eq!(mean_field_energy(&params, b), mean_field_energy(&params, &partner));
            }
        }

        #[test]
        fn classification_is_scale_invariant(params in arb_params(), s in 0.05f64..20.0) {
            let l = classify_phase(&params);
            let d = l.boundary_distances;
            let margin = d.normal_superradiant.abs().min(d.paramagnetic_antiferro.abs()).min(d.first_order.abs());
            prop_assume!(margin > 1e-9);
            let scaled = ModelParams::new(
                s * params.spin_freq,
                s * params.boson_freq,
                s * params.chi,
                s * params.lambda,
            ).unwrap();
            prop_assert_eq!(classify_phase(&scaled).phase, l.phase);
        }
    }
}
