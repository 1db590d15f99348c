//! End-to-end acceptance checks, one test per criterion. Each test prints a
//! single `PASS`/`FAIL` line to the real stderr (bypassing test capture) and
//! then asserts.

use std::io::Write;
use std::time::{Duration, Instant};

use gdicke::ed::{build_hamiltonian, converge_cutoff, ground_state, observables, FiniteModel};
use gdicke::gaussian::{analyze, canonical_form, williamson};
use gdicke::solver::phase_of_configuration;
use gdicke::sweep::{critical_series, fit_exponent, locate_critical, AxisName, SeriesQuantity, Side};
use gdicke::{
    classify_phase, energy_derivatives_chi, minimize, ModelParams, Phase, QuadraticCoefficients, SolverOptions,
};
use nalgebra::{Matrix3, Matrix6, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(id: u32, title: &str, ok: bool, detail: &str) {
    let verdict = if ok { "PASS" } else { "FAIL" };
    let line = format!("[{verdict}] criterion {id}: {title} ({detail})\n");
    let _ = std::io::stderr().write_all(line.as_bytes());
}

fn params(chi: f64, lambda: f64) -> ModelParams {
    ModelParams::new(1.0, 1.0, chi, lambda).unwrap()
}

fn opts() -> SolverOptions {
    SolverOptions::default()
}

#[test]
fn criterion_1_boundary_reproduction() {
    let start = Instant::now();
    let base = params(0.0, 0.3);
    let lower = locate_critical(&base, AxisName::Chi, -1.0, 0.0).unwrap();
    let upper = locate_critical(&base, AxisName::Chi, 0.5, 1.5).unwrap();
    let err_lower = (lower.value + 0.64).abs();
    let err_upper = (upper.value - 1.0).abs();

    // numeric minimization on the grid, sequential
    let n = 101;
    let chis: Vec<f64> = (0..n).map(|i| -2.0 + 4.0 * i as f64 / (n - 1) as f64).collect();
    let lams: Vec<f64> = (0..n).map(|j| j as f64 / (n - 1) as f64).collect();
    let mut numeric = vec![vec![Phase::ParamagneticNormal; n]; n];
    let mut analytic = numeric.clone();
    for (i, &chi) in chis.iter().enumerate() {
        for (j, &lam) in lams.iter().enumerate() {
            let p = params(chi, lam);
            numeric[i][j] = phase_of_configuration(&minimize(&p, &opts()).unwrap().config);
            // the three boundary curves, written out directly
            let (dashed, dotted, solid) = (4.0 * lam * lam - 1.0, 1.0, 2.0 * lam * lam);
            analytic[i][j] = if chi > dotted && chi > solid {
                Phase::AntiferromagneticNormal
            } else if chi > dashed && chi <= dotted {
                Phase::ParamagneticNormal
            } else {
                Phase::FerromagneticSuperradiant
            };
        }
    }
    // a mismatch is tolerated only if the numeric phase holds analytically
    // in a neighbouring cell
    let mut mismatches = 0;
    let mut unexplained = 0;
    for i in 0..n {
        for j in 0..n {
            if numeric[i][j] == analytic[i][j] {
                continue;
            }
            mismatches += 1;
            let near = (i.saturating_sub(1)..=(i + 1).min(n - 1))
                .any(|a| (j.saturating_sub(1)..=(j + 1).min(n - 1)).any(|b| analytic[a][b] == numeric[i][j]));
            if !near {
                unexplained += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    let ok = err_lower < 1e-6 && err_upper < 1e-6 && unexplained == 0 && elapsed < Duration::from_secs(60);
    report(
        1,
        "boundary reproduction",
        ok,
        &format!(
            "chi_c- err {err_lower:.1e}, chi_c+ err {err_upper:.1e}, grid mismatches {mismatches} ({unexplained} beyond one cell), {:.1?}",
            elapsed
        ),
    );
    assert!(ok);
}

fn derivative_jumps(lam: f64, chi_c: f64) -> (f64, f64) {
    let (delta, h) = (1e-5, 2e-6);
    let below = energy_derivatives_chi(&params(chi_c - delta, lam), h, &opts()).unwrap();
    let above = energy_derivatives_chi(&params(chi_c + delta, lam), h, &opts()).unwrap();
    ((above.de_dchi - below.de_dchi).abs(), (above.d2e_dchi2 - below.d2e_dchi2).abs())
}

#[test]
fn criterion_2_transition_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let draws = 25;
    let mut worst_continuous_de: f64 = 0.0;
    let mut least_d2e = f64::INFINITY;
    let mut least_first_order_de = f64::INFINITY;
    for _ in 0..draws {
        let lam = rng.random_range(0.05..0.65);
        for chi_c in [4.0 * lam * lam - 1.0, 1.0] {
            let (de, d2e) = derivative_jumps(lam, chi_c);
            worst_continuous_de = worst_continuous_de.max(de);
            least_d2e = least_d2e.min(d2e);
        }
        let lam = rng.random_range(0.75..1.0);
        let (de, _) = derivative_jumps(lam, 2.0 * lam * lam);
        least_first_order_de = least_first_order_de.min(de);
    }
    let ok = worst_continuous_de < 1e-4 && least_d2e > 0.1 && least_first_order_de > 0.01;
    report(
        2,
        "transition order",
        ok,
        &format!(
            "continuous: max dE jump {worst_continuous_de:.1e}, min d2E jump {least_d2e:.3}; first order: min dE jump {least_first_order_de:.3}"
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_3_critical_exponents() {
    let start = Instant::now();
    let base = params(0.0, 0.3);
    let window = (1e-4, 1e-2);
    let lower = locate_critical(&base, AxisName::Chi, -1.0, 0.0).unwrap().value;
    let upper = locate_critical(&base, AxisName::Chi, 0.5, 1.5).unwrap().value;
    let slope = |c: f64, side: Side, q: SeriesQuantity| {
        let s = critical_series(&base, AxisName::Chi, c, side, window, 25, q).unwrap();
        fit_exponent(&s, window).unwrap().slope
    };
    let gap_slopes = [
        slope(lower, Side::Below, SeriesQuantity::Gap),
        slope(lower, Side::Above, SeriesQuantity::Gap),
        slope(upper, Side::Below, SeriesQuantity::Gap),
        slope(upper, Side::Above, SeriesQuantity::Gap),
    ];
    let dx_slopes =
        [slope(lower, Side::Below, SeriesQuantity::Dx2(0)), slope(lower, Side::Above, SeriesQuantity::Dx2(0))];

    // (Δx₃)² on [χc+ − 1e-2, χc+) measured from the exact boundary χ = Ω:
    // log-spaced approach plus a uniform grid
    let exact_upper = base.chi_paramagnetic_antiferro();
    let mut dx3_max: f64 = 0.0;
    let approach = (0..=200).map(|k| 1e-12 * 1e10f64.powf(k as f64 / 200.0));
    let uniform = (1..=200).map(|k| 1e-2 * k as f64 / 200.0);
    for d in approach.chain(uniform) {
        let a = analyze(&base.with_chi(exact_upper - d), &opts()).unwrap();
        dx3_max = dx3_max.max(a.fluctuations.dx2[2]);
    }
    let elapsed = start.elapsed();
    let ok = gap_slopes.iter().all(|s| (s - 0.5).abs() <= 0.05)
        && dx_slopes.iter().all(|s| (s + 0.5).abs() <= 0.05)
        && dx3_max < 10.0
        && elapsed < Duration::from_secs(10);
    report(
        3,
        "critical exponents",
        ok,
        &format!(
            "gap slopes {:.4?}, dx2_1 slopes {:.4?}, max dx2_3 {dx3_max:.4}, {:.1?}",
            gap_slopes, dx_slopes, elapsed
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_4_fluctuation_baselines() {
    let a = analyze(&params(0.0, 0.0), &opts()).unwrap();
    let s = a.fluctuations.entropies().unwrap();
    let vacuum = a.fluctuations.dx2.iter().chain(&a.fluctuations.dp2).all(|&v| v == 0.5) && s.iter().all(|&v| v == 0.0);

    // soft mode = the quadrature whose x-variance grows; its p-variance is squeezed
    let base = params(0.0, 0.3);
    let mut squeezed = Vec::new();
    for chi_c in [-0.64, 1.0] {
        for d in [-1e-3, 1e-3] {
            let f = analyze(&base.with_chi(chi_c + d), &opts()).unwrap().fluctuations;
            let soft = (0..3).max_by(|&i, &j| f.dx2[i].total_cmp(&f.dx2[j])).unwrap();
            squeezed.push((chi_c + d, soft + 1, f.dp2[soft]));
        }
    }
    let ok = vacuum && squeezed.iter().all(|&(_, _, p)| p < 0.5);
    let detail: Vec<String> = squeezed.iter().map(|(c, m, p)| format!("chi={c}: dp2_{m}={p:.4}")).collect();
    report(4, "fluctuation baselines", ok, &format!("vacuum exact: {vacuum}; {}", detail.join(", ")));
    assert!(ok);
}

#[test]
fn criterion_5_entropy_contrast() {
    let a = analyze(&params(1.0 - 1e-3, 0.3), &opts()).unwrap();
    let s = a.fluctuations.entropies().unwrap();
    let ok = s[0] > 1.0 && s[2] < 0.1;
    report(5, "entropy contrast", ok, &format!("S1 = {:.4}, S3 = {:.4}", s[0], s[2]));
    assert!(ok);
}

fn random_positive_definite(rng: &mut ChaCha8Rng) -> QuadraticCoefficients {
    loop {
        let c = QuadraticCoefficients {
            eps1: rng.random_range(0.05..4.0),
            eps2: rng.random_range(0.05..4.0),
            eps3: rng.random_range(0.05..4.0),
            tau12: rng.random_range(-2.0..2.0),
            tau13: rng.random_range(-2.0..2.0),
            tau23: rng.random_range(-2.0..2.0),
        };
        if c.x_block().cholesky().is_some() {
            return c;
        }
    }
}

fn max_abs(m: &Matrix6<f64>) -> f64 {
    m.iter().fold(0.0, |a, x| a.max(x.abs()))
}

#[test]
fn criterion_6_symplectic_suite() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let gamma = canonical_form();
    let (mut worst_form, mut worst_diag, mut worst_spectral, mut worst_complex) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..1000 {
        let c = random_positive_definite(&mut rng);
        let sp = williamson(&c).unwrap();
        let s = sp.symplectic;
        worst_form = worst_form.max(max_abs(&(s.transpose() * gamma * s - gamma)));
        let mut target = Matrix6::zeros();
        for i in 0..3 {
            target[(i, i)] = sp.deltas[i];
            target[(3 + i, 3 + i)] = sp.deltas[i];
        }
        worst_diag = worst_diag.max(max_abs(&(s.transpose() * c.hamiltonian_matrix() * s - target)));

        // Δ² are the eigenvalues of H_p^{1/2} H_x H_p^{1/2}
        let root = Matrix3::from_diagonal(&nalgebra::Vector3::from(c.eps().map(f64::sqrt)));
        let mut oracle: Vec<f64> =
            SymmetricEigen::new(root * c.x_block() * root).eigenvalues.iter().map(|e| e.sqrt()).collect();
        oracle.sort_by(f64::total_cmp);
        // ΓH has eigenvalues ±iΔ
        let mut imag: Vec<f64> = (gamma * c.hamiltonian_matrix())
            .complex_eigenvalues()
            .iter()
            .filter(|z| z.im > 0.0)
            .map(|z| z.im)
            .collect();
        imag.sort_by(f64::total_cmp);
        assert_eq!(imag.len(), 3);
        for i in 0..3 {
            worst_spectral = worst_spectral.max((sp.deltas[i] - oracle[i]).abs());
            worst_complex = worst_complex.max((sp.deltas[i] - imag[i]).abs());
        }
    }
    let ok = worst_form < 1e-10 && worst_diag < 1e-9 && worst_spectral < 1e-10 && worst_complex < 1e-10;
    report(
        6,
        "symplectic suite",
        ok,
        &format!(
            "max |SᵀΓS−Γ| {worst_form:.1e}, max |SᵀHS−diag| {worst_diag:.1e}, spectral oracle {worst_spectral:.1e}, ΓH eigenvalues {worst_complex:.1e}"
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_7_ed_oracle_suite() {
    let start = Instant::now();
    let points = [(0.2, 0.3), (-0.5, 0.6), (1.5, 0.3)];
    let two_js = [1usize, 2, 4, 6];
    let mut worst_commutator: f64 = 0.0;
    let mut worst_parity: f64 = 0.0;
    let mut worst_order: f64 = 0.0;
    let mut monotone = true;
    let mut summary = Vec::new();
    for (chi, lam) in points {
        let p = params(chi, lam);
        let e_mf = minimize(&p, &opts()).unwrap().energy;
        let mut errors = Vec::new();
        for &tj in &two_js {
            let probe = FiniteModel::new(p, tj, 1).unwrap();
            let m = probe.with_cutoff(converge_cutoff(&probe, 1e-8).unwrap());
            let h = build_hamiltonian(&m).unwrap();
            // [H, Π] with Π = (−1)^(k₁+k₂+n) rebuilt from the basis labels
            let parity = |i: usize| {
                let (k1, k2, n) = m.decode(i);
                if (k1 + k2 + n) % 2 == 0 {
                    1.0
                } else {
                    -1.0
                }
            };
            for i in 0..m.dim() {
                for (j, v) in h.row(i) {
                    worst_commutator = worst_commutator.max((v * (parity(j) - parity(i))).abs());
                }
            }
            let g = ground_state(&m).unwrap();
            if !g.degenerate {
                for state in [&g.state, &g.excited] {
                    let o = observables(&m, state);
                    worst_parity = worst_parity.max((o.parity.abs() - 1.0).abs());
                }
            }
            let o = observables(&m, &g.state);
            worst_order = worst_order.max(o.jx1.abs()).max(o.jx2.abs()).max(o.b_re.abs());
            errors.push((g.e0 / tj as f64 - e_mf).abs());
        }
        monotone &= errors.windows(2).all(|w| w[1] < w[0]) && errors[3] < errors[0];
        summary.push(format!(
            "({chi}, {lam}): {}",
            errors.iter().map(|e| format!("{e:.2e}")).collect::<Vec<_>>().join(" > ")
        ));
    }
    let elapsed = start.elapsed();
    let ok = worst_commutator < 1e-12
        && worst_parity < 1e-10
        && worst_order < 1e-10
        && monotone
        && elapsed < Duration::from_secs(300);
    report(
        7,
        "exact diagonalization",
        ok,
        &format!(
            "[H,Π] {worst_commutator:.1e}, |<Π>|−1 {worst_parity:.1e}, order parameters {worst_order:.1e}, |e0/N−E_MF| {}, {:.1?}",
            summary.join("; "),
            elapsed
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_8_limit_recovery() {
    let checks = [
        (params(0.0, 0.0), AxisName::Lambda, 0.3, 0.7, 0.5),
        (params(0.0, 0.0), AxisName::Chi, -1.5, -0.5, -1.0),
        (params(0.0, 0.0), AxisName::Chi, 0.5, 1.5, 1.0),
    ];
    let mut worst: f64 = 0.0;
    let mut detail = Vec::new();
    for (base, axis, lo, hi, expected) in checks {
        let c = locate_critical(&base, axis, lo, hi).unwrap();
        let at = c.gap_minimum_at.expect("continuous transition");
        worst = worst.max((at - expected).abs()).max((c.value - expected).abs());
        detail.push(format!("{} = {at:.9} (gap {:.1e})", axis.as_str(), c.gap_minimum.unwrap()));
    }
    // the analytic classification agrees with the located points
    let sanity = classify_phase(&params(0.0, 0.49)).phase == Phase::ParamagneticNormal
        && classify_phase(&params(0.0, 0.51)).phase == Phase::FerromagneticSuperradiant;
    let ok = worst < 1e-6 && sanity;
    report(8, "limit recovery", ok, &format!("max error {worst:.1e}; {}", detail.join(", ")));
    assert!(ok);
}
