//! Executable invariant suite behind the CLI `check` command.
//!
//! Every module's invariants run here on the fiducial point and on seeded
//! random parameters drawn from the standard ranges, so a single exit code
//! certifies the build. Two deliberate fault injections exist purely to
//! prove the suite has teeth: flipping the gap exponent to the decaying
//! orientation must break derivative consistency, and dropping the 1/2 in
//! the quadratic gap must break the exact-vs-quadratic agreement.

use crate::critical_times::{self, DEFAULT_DECOUPLING_TIME_YEARS};
use crate::gap_model;
use crate::quantities::{DimensionlessParams, ModelParams};
use crate::sampling::log_spaced;
use crate::spectral_oracle::{
    self, EnergyGrid, OracleConfig, QuadraticConvention, SpectralError, SpectralState,
};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Deliberate defects used to demonstrate that the suite catches them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaultInjection {
    /// Evaluate the log gap with the exponent argument inverted to
    /// `(t_0/t)^(2/3)`, the orientation inconsistent with the analytic
    /// rate.
    MisprintExponent,
    /// Evaluate the quadratic gap without its 1/2 prefactor.
    DropQuadraticHalf,
}

impl FaultInjection {
    pub fn as_str(self) -> &'static str {
        match self {
            FaultInjection::MisprintExponent => "misprint-exponent",
            FaultInjection::DropQuadraticHalf => "drop-quadratic-half",
        }
    }
}

#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn pass(name: &'static str, detail: String) -> Self {
        Self {
            name,
            passed: true,
            detail,
        }
    }

    fn fail(name: &'static str, detail: String) -> Self {
        Self {
            name,
            passed: false,
            detail,
        }
    }
}

const SEED: u64 = 0x6761_706c_6162;

fn random_params(rng: &mut ChaCha8Rng) -> ModelParams {
    let temp_nr = log_uniform(rng, 1e6, 1e8);
    let t_nr = log_uniform(rng, 1e6, 1e9);
    ModelParams::new(temp_nr, t_nr, 1.5e10, 3.0).expect("in-range parameters")
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..hi.ln())).exp()
}

/// Run the whole suite. `fault` injects one of the documented defects.
pub fn run_invariant_suite(fault: Option<FaultInjection>) -> Vec<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    vec![
        params_scale_consistency(&mut rng),
        params_round_trip(&mut rng),
        temperature_monotone(),
        gap_sign_negative(),
        derivative_consistency(fault, &mut rng),
        bracket_sign_structure(&mut rng),
        vanishing_gap(),
        root_residual(&mut rng),
        vieta_relations(&mut rng),
        approximation_errors(),
        asymptotic_ladders(),
        pair_boundary_flip(),
        entropy_nonpositive_random(&mut rng),
        trace_conservation(&mut rng),
        quadratic_scaling_limit(fault),
        quadratic_agreement(fault),
        wien_fine_grid_ratio(),
        wien_shape_identity(),
        grid_refinement_stability(),
        oracle_scaling_exponent(),
        sweep_ordering(),
        equilibrium_constancy(),
        entropy_dip_normalization(),
    ]
}

fn params_scale_consistency(rng: &mut ChaCha8Rng) -> CheckOutcome {
    let name = "params_scale_consistency";
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let p = random_params(rng);
        let d = p.dimensionless();
        let k = log_uniform(rng, 1e-3, 1e3);
        let scaled_temps =
            ModelParams::new(p.temp_nr() * k, p.t_nr(), p.t_0(), p.temp_0() * k).unwrap();
        let scaled_times =
            ModelParams::new(p.temp_nr(), p.t_nr() * k, p.t_0() * k, p.temp_0()).unwrap();
        worst = worst
            .max((scaled_temps.dimensionless().alpha / d.alpha - 1.0).abs())
            .max((scaled_times.dimensionless().beta / d.beta - 1.0).abs());
    }
    if worst <= 4.0 * f64::EPSILON {
        CheckOutcome::pass(name, format!("worst relative drift {worst:.2e}"))
    } else {
        CheckOutcome::fail(name, format!("relative drift {worst:.2e}"))
    }
}

fn params_round_trip(rng: &mut ChaCha8Rng) -> CheckOutcome {
    let name = "params_round_trip";
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let p = random_params(rng);
        let d = p.dimensionless();
        worst = worst
            .max((d.alpha * p.temp_0() / p.temp_nr() - 1.0).abs())
            .max((d.beta * p.t_nr() / p.t_0() - 1.0).abs());
    }
    if worst <= f64::EPSILON {
        CheckOutcome::pass(name, format!("worst relative drift {worst:.2e}"))
    } else {
        CheckOutcome::fail(name, format!("round trip off by {worst:.2e}"))
    }
}

fn temperature_monotone() -> CheckOutcome {
    let name = "temperature_monotone";
    let p = ModelParams::fiducial();
    let grid = log_spaced(1.0, 1e16, 200);
    let temps: Vec<f64> = grid
        .iter()
        .map(|&t| gap_model::temperature_at(&p, t).unwrap())
        .collect();
    let mono = temps.windows(2).all(|w| w[0] > w[1]) && temps.iter().all(|&v| v > 0.0);
    if mono {
        CheckOutcome::pass(name, "strictly decreasing and positive on 200 samples".into())
    } else {
        CheckOutcome::fail(name, "temperature law is not strictly decreasing".into())
    }
}

fn gap_sign_negative() -> CheckOutcome {
    let name = "gap_sign_negative";
    let p = ModelParams::fiducial();
    let grid = log_spaced(1e-3 * p.t_0(), 1e10 * p.t_0(), 200);
    for &t in &grid {
        let g = gap_model::ln_gap(&p, t).unwrap();
        if g.sign != -1 || !g.ln_magnitude.is_finite() {
            return CheckOutcome::fail(name, format!("sign {} at t = {t:e}", g.sign));
        }
    }
    CheckOutcome::pass(name, "sign -1 and finite log across 13 decades".into())
}

fn misprinted_ln_gap(p: &ModelParams, t: f64) -> f64 {
    let alpha = p.temp_nr() / p.temp_0();
    -t / p.t_nr() - 2.0 * t.ln() + alpha * (p.t_0() / t).cbrt().powi(2)
}

fn derivative_consistency(fault: Option<FaultInjection>, rng: &mut ChaCha8Rng) -> CheckOutcome {
    let name = "derivative_consistency";
    let misprint = fault == Some(FaultInjection::MisprintExponent);
    let eval = |p: &ModelParams, t: f64| -> f64 {
        if misprint {
            misprinted_ln_gap(p, t)
        } else {
            gap_model::ln_gap(p, t).unwrap().ln_magnitude
        }
    };

    // Fiducial point: strict relative tolerance on the standard grid.
    let p = ModelParams::fiducial();
    let mut worst = 0.0f64;
    let mut worst_t = 0.0f64;
    for &t in &log_spaced(1e3, 1e15, 50) {
        let h = t * 1e-5;
        let fd = (eval(&p, t + h) - eval(&p, t - h)) / (2.0 * h);
        let an = gap_model::bracket_rate(&p, t).unwrap();
        let rel = (fd - an).abs() / an.abs();
        if rel > worst {
            worst = rel;
            worst_t = t;
        }
    }
    if worst > 1e-6 {
        return CheckOutcome::fail(
            name,
            format!("fiducial: relative mismatch {worst:.3e} at t = {worst_t:.3e} yr"),
        );
    }

    // Random draws: same check with a floor on the denominator, since a
    // grid point may land arbitrarily close to a root where the analytic
    // rate passes through zero.
    for _ in 0..10 {
        let q = random_params(rng);
        for &t in &log_spaced(1e3, 1e15, 20) {
            let h = t * 1e-5;
            let fd = (eval(&q, t + h) - eval(&q, t - h)) / (2.0 * h);
            let an = gap_model::bracket_rate(&q, t).unwrap();
            let scale = q.gamma()
                + 2.0 / t
                + (2.0 / 3.0) * (q.temp_nr() / (q.t_0() * q.temp_0())) * (q.t_0() / t).cbrt();
            let tol = 1e-6 * an.abs().max(1e-3 * scale);
            if (fd - an).abs() > tol {
                return CheckOutcome::fail(
                    name,
                    format!("random draw: |fd - analytic| = {:.3e} at t = {t:.3e}", (fd - an).abs()),
                );
            }
        }
    }
    CheckOutcome::pass(name, format!("fiducial worst relative mismatch {worst:.3e}"))
}

fn bracket_sign_structure(rng: &mut ChaCha8Rng) -> CheckOutcome {
    let name = "bracket_sign_structure";
    let mut cases = vec![ModelParams::fiducial()];
    for _ in 0..10 {
        cases.push(random_params(rng));
    }
    for p in cases {
        let report = match critical_times::solve_critical_times(&p, DEFAULT_DECOUPLING_TIME_YEARS)
        {
            Ok(r) => r,
            Err(e) => return CheckOutcome::fail(name, format!("solver: {e}")),
        };
        let (Some(t1), Some(t2)) = (report.t_cr1, report.t_cr2) else {
            continue;
        };
        let before = gap_model::bracket_rate(&p, t1 / 10.0).unwrap();
        let between = gap_model::bracket_rate(&p, (t1 * t2).sqrt()).unwrap();
        let after = gap_model::bracket_rate(&p, t2 * 10.0).unwrap();
        if !(before < 0.0 && between > 0.0 && after < 0.0) {
            return CheckOutcome::fail(
                name,
                format!("signs ({before:e}, {between:e}, {after:e}) around ({t1:e}, {t2:e})"),
            );
        }
    }
    CheckOutcome::pass(name, "negative, positive, negative across both roots".into())
}

fn vanishing_gap() -> CheckOutcome {
    let name = "vanishing_gap";
    let p = ModelParams::fiducial();
    let report = critical_times::solve_critical_times(&p, DEFAULT_DECOUPLING_TIME_YEARS).unwrap();
    let t2 = report.t_cr2.unwrap();
    let at = |t: f64| gap_model::ln_gap(&p, t).unwrap().ln_magnitude;
    let drop = at(t2) - at(100.0 * t2);
    if drop <= 1e6 {
        return CheckOutcome::fail(name, format!("log drop over two decades only {drop:.3e}"));
    }
    let tail = log_spaced(t2, 1e3 * t2, 50);
    let lns: Vec<f64> = tail.iter().map(|&t| at(t)).collect();
    if !lns.windows(2).all(|w| w[0] > w[1]) {
        return CheckOutcome::fail(name, "log gap is not monotone beyond t_cr2".into());
    }
    CheckOutcome::pass(name, format!("log gap falls by {drop:.3e} from t_cr2 to 100 t_cr2"))
}

fn root_residual(rng: &mut ChaCha8Rng) -> CheckOutcome {
    let name = "root_residual";
    let mut cases = vec![ModelParams::fiducial()];
    for _ in 0..10 {
        cases.push(random_params(rng));
    }
    let mut worst = 0.0f64;
    for p in cases {
        let d = p.dimensionless();
        let report =
            critical_times::solve_critical_times(&p, DEFAULT_DECOUPLING_TIME_YEARS).unwrap();
        for root in &report.u_roots {
            if root.u <= 0.0 {
                continue;
            }
            let t = p.t_0() / (root.u * root.u * root.u);
            let residual = (gap_model::bracket_rate(&p, t).unwrap() * p.t_0()).abs();
            let bound = 1e-8 * (2.0 / 3.0) * d.alpha * root.u;
            worst = worst.max(residual / bound);
            if residual >= bound {
                return CheckOutcome::fail(
                    name,
                    format!("dimensionless residual {residual:.3e} >= bound {bound:.3e}"),
                );
            }
        }
    }
    CheckOutcome::pass(name, format!("worst residual at {worst:.2e} of the bound"))
}

fn vieta_relations(rng: &mut ChaCha8Rng) -> CheckOutcome {
    let name = "vieta_relations";
    let mut cases = vec![ModelParams::fiducial()];
    for _ in 0..10 {
        cases.push(random_params(rng));
    }
    for p in cases {
        let d = p.dimensionless();
        let report =
            critical_times::solve_critical_times(&p, DEFAULT_DECOUPLING_TIME_YEARS).unwrap();
        if report.u_roots.len() != 3 {
            continue;
        }
        let us: Vec<f64> = report.u_roots.iter().map(|r| r.u).collect();
        let scale = us.iter().fold(0.0f64, |m, u| m.max(u.abs()));
        let sum: f64 = us.iter().sum();
        let prod: f64 = us.iter().product();
        if sum.abs() > 1e-9 * scale {
            return CheckOutcome::fail(name, format!("root sum {sum:e} (scale {scale:e})"));
        }
        if (prod + d.beta / 2.0).abs() > 1e-9 * (d.beta / 2.0) {
            return CheckOutcome::fail(
                name,
                format!("root product {prod:e} vs -beta/2 = {:e}", -d.beta / 2.0),
            );
        }
    }
    CheckOutcome::pass(name, "sum 0 and product -beta/2 within 1e-9 relative".into())
}

fn approximation_errors() -> CheckOutcome {
    let name = "approximation_errors";
    let report = critical_times::solve_critical_times(
        &ModelParams::fiducial(),
        DEFAULT_DECOUPLING_TIME_YEARS,
    )
    .unwrap();
    let e1 = report.rel_err_1.unwrap();
    let e2 = report.rel_err_2.unwrap();
    if e1 < 0.05 && e2 < 0.05 {
        CheckOutcome::pass(name, format!("rel_err_1 = {e1:.3e}, rel_err_2 = {e2:.3e}"))
    } else {
        CheckOutcome::fail(name, format!("rel_err_1 = {e1:.3e}, rel_err_2 = {e2:.3e}"))
    }
}

fn asymptotic_ladders() -> CheckOutcome {
    let name = "asymptotic_ladders";
    let fid = ModelParams::fiducial();
    // rung k scales t_nr by 4^k: beta/alpha^(3/2) -> 0, so rel_err_1 -> 0
    let mut prev = f64::INFINITY;
    for k in 0..5 {
        let p = ModelParams::new(fid.temp_nr(), fid.t_nr() * 4f64.powi(k), fid.t_0(), fid.temp_0())
            .unwrap();
        let e = critical_times::solve_critical_times(&p, DEFAULT_DECOUPLING_TIME_YEARS)
            .unwrap()
            .rel_err_1
            .unwrap();
        if e >= prev {
            return CheckOutcome::fail(name, format!("rel_err_1 not decreasing at rung {k}: {e:e}"));
        }
        prev = e;
    }
    // rung k scales temp_nr by 2^k: alpha (t_nr/t_0) grows, rel_err_2 -> 0
    prev = f64::INFINITY;
    for k in 0..5 {
        let p = ModelParams::new(fid.temp_nr() * 2f64.powi(k), fid.t_nr(), fid.t_0(), fid.temp_0())
            .unwrap();
        let e = critical_times::solve_critical_times(&p, DEFAULT_DECOUPLING_TIME_YEARS)
            .unwrap()
            .rel_err_2
            .unwrap();
        if e >= prev {
            return CheckOutcome::fail(name, format!("rel_err_2 not decreasing at rung {k}: {e:e}"));
        }
        prev = e;
    }
    CheckOutcome::pass(name, "both approximation errors decrease along 5-rung ladders".into())
}

fn pair_boundary_flip() -> CheckOutcome {
    let name = "pair_boundary_flip";
    let d0 = ModelParams::fiducial().dimensionless();
    let threshold = critical_times::pair_threshold(&d0);
    let at = |beta: f64| {
        critical_times::pair_exists(&DimensionlessParams {
            alpha: d0.alpha,
            beta,
            t_0: d0.t_0,
        })
    };
    let below = at(threshold * (1.0 - 1e-6));
    let exact = at(threshold);
    let above = at(threshold * (1.0 + 1e-6));
    if below && !exact && !above {
        CheckOutcome::pass(name, "flips across the tangency threshold, tangency excluded".into())
    } else {
        CheckOutcome::fail(name, format!("below {below}, exact {exact}, above {above}"))
    }
}

fn random_state(rng: &mut ChaCha8Rng, grid: &EnergyGrid) -> SpectralState {
    let mut probs: Vec<f64> = (0..grid.len()).map(|_| rng.gen_range(1e-3..1.0)).collect();
    let total: f64 = probs.iter().sum();
    for p in &mut probs {
        *p /= total;
    }
    SpectralState::new(grid.clone(), probs).unwrap()
}

fn entropy_nonpositive_random(rng: &mut ChaCha8Rng) -> CheckOutcome {
    let name = "entropy_nonpositive_random";
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..1000 {
        let n = rng.gen_range(2..=64);
        let mut omega = 0.0;
        let omegas: Vec<f64> = (0..n)
            .map(|_| {
                omega += rng.gen_range(0.01..1.0);
                omega
            })
            .collect();
        let grid = EnergyGrid::new(omegas).unwrap();
        let a = random_state(rng, &grid);
        let b = random_state(rng, &grid);
        let ds = spectral_oracle::conditional_entropy(&a, &b).unwrap();
        let max_diff = a
            .probs()
            .iter()
            .zip(b.probs())
            .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        if ds > 0.0 && max_diff >= 1e-15 {
            return CheckOutcome::fail(name, format!("positive conditional entropy {ds:e}"));
        }
        worst = worst.max(ds);
    }
    CheckOutcome::pass(name, format!("1000 random pairs, largest value {worst:.3e}"))
}

fn trace_conservation(rng: &mut ChaCha8Rng) -> CheckOutcome {
    let name = "trace_conservation";
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let peak = log_uniform(rng, 1.0, 500.0);
        let grid = EnergyGrid::geometric(1e-2, 1e3, 128).unwrap();
        let temp = log_uniform(rng, 0.5, 50.0);
        let base = match spectral_oracle::blackbody_state(&grid, temp) {
            Ok(s) => s,
            Err(e) => return CheckOutcome::fail(name, format!("blackbody: {e}")),
        };
        let pert = match spectral_oracle::peaked_perturbation(&grid, peak, peak / 5.0, &base) {
            Ok(p) => p,
            Err(e) => return CheckOutcome::fail(name, format!("perturbation: {e}")),
        };
        let gamma_t = rng.gen_range(0.0..5.0);
        let mut amplitude = 1e-3;
        let state = loop {
            match spectral_oracle::state_at(&base, &pert, amplitude, gamma_t, 1.0) {
                Ok(s) => break s,
                Err(SpectralError::NonPhysicalState { max_amplitude, .. }) => {
                    amplitude = 0.5 * max_amplitude;
                }
                Err(e) => return CheckOutcome::fail(name, format!("state: {e}")),
            }
        };
        let sum: f64 = state.probs().iter().sum();
        worst = worst.max((sum - 1.0).abs());
    }
    if worst <= 1e-12 {
        CheckOutcome::pass(name, format!("worst trace drift {worst:.2e}"))
    } else {
        CheckOutcome::fail(name, format!("trace drift {worst:.2e}"))
    }
}

fn standard_setup() -> (SpectralState, spectral_oracle::Perturbation) {
    let peak = 1e6;
    let temp = peak / 20.0;
    let grid = EnergyGrid::standard(temp, peak).unwrap();
    let base = spectral_oracle::blackbody_state(&grid, temp).unwrap();
    let pert =
        spectral_oracle::base_proportional_perturbation(&grid, peak, peak / 20.0, &base).unwrap();
    (base, pert)
}

fn quadratic_scaling_limit(fault: Option<FaultInjection>) -> CheckOutcome {
    let name = "quadratic_scaling_limit";
    let drop_half = fault == Some(FaultInjection::DropQuadraticHalf);
    let (base, pert) = standard_setup();
    let eps = 1e-4;
    let exact = spectral_oracle::perturbative_conditional_entropy(&base, &pert, eps).unwrap();
    let mut quad = spectral_oracle::quadratic_gap(
        &base,
        &pert,
        eps,
        0.0,
        0.0,
        QuadraticConvention::DerivationConsistent,
    )
    .unwrap();
    if drop_half {
        quad *= 2.0;
    }
    let rel = (exact / quad - 1.0).abs();
    if rel <= 1e-3 {
        CheckOutcome::pass(name, format!("|exact/quadratic - 1| = {rel:.3e} at eps = 1e-4"))
    } else {
        CheckOutcome::fail(name, format!("|exact/quadratic - 1| = {rel:.3e} at eps = 1e-4"))
    }
}

fn quadratic_agreement(fault: Option<FaultInjection>) -> CheckOutcome {
    let name = "quadratic_agreement";
    let drop_half = fault == Some(FaultInjection::DropQuadraticHalf);
    let (base, pert) = standard_setup();
    let eps = 1e-3;
    let exact = spectral_oracle::perturbative_conditional_entropy(&base, &pert, eps).unwrap();
    let mut quad = spectral_oracle::quadratic_gap(
        &base,
        &pert,
        eps,
        0.0,
        0.0,
        QuadraticConvention::DerivationConsistent,
    )
    .unwrap();
    if drop_half {
        quad *= 2.0;
    }
    let rel = (quad - exact).abs() / exact.abs();
    if rel <= 1e-2 {
        CheckOutcome::pass(name, format!("relative deviation {rel:.3e} at eps = 1e-3"))
    } else {
        CheckOutcome::fail(name, format!("relative deviation {rel:.3e} at eps = 1e-3"))
    }
}

fn wien_fine_grid_ratio() -> CheckOutcome {
    let name = "wien_fine_grid_ratio";
    let peak = 1e6;
    let temp = peak / 20.0;
    let fine = EnergyGrid::geometric(temp / 100.0, 50.0 * peak, 10_000).unwrap();
    let base = spectral_oracle::blackbody_state(&fine, temp).unwrap();
    let pert =
        spectral_oracle::base_proportional_perturbation(&fine, peak, peak / 20.0, &base).unwrap();
    let s = 1e-3;
    let wien = spectral_oracle::wien_gap(temp, &pert, s, 0.0, 0.0).unwrap();
    let quad = spectral_oracle::quadratic_gap(
        &base,
        &pert,
        s,
        0.0,
        0.0,
        QuadraticConvention::DerivationConsistent,
    )
    .unwrap();
    let ratio = wien / quad;
    if (ratio - 1.0).abs() <= 0.05 {
        CheckOutcome::pass(name, format!("standard-grid calibration vs fine grid: {ratio:.4}"))
    } else {
        CheckOutcome::fail(name, format!("ratio {ratio:.4} outside 1 +/- 0.05"))
    }
}

fn wien_shape_identity() -> CheckOutcome {
    let name = "wien_shape_identity";
    let (_, pert) = standard_setup();
    let peak = pert.peak_omega();
    let temp = peak / 20.0;
    let w1 = spectral_oracle::wien_gap(temp, &pert, 1e-3, 0.0, 0.0).unwrap();
    let w2 = spectral_oracle::wien_gap(temp / 2.0, &pert, 1e-3, 0.0, 0.0).unwrap();
    let got = w2.abs().ln() - w1.abs().ln();
    let expect = peak / (temp / 2.0) - peak / temp + 3.0 * 0.5f64.ln();
    let rel = (got / expect - 1.0).abs();
    if rel <= 1e-9 {
        CheckOutcome::pass(name, format!("halved-temperature log ratio matches to {rel:.2e}"))
    } else {
        CheckOutcome::fail(name, format!("log ratio {got:e} vs expected {expect:e}"))
    }
}

fn grid_refinement_stability() -> CheckOutcome {
    let name = "grid_refinement_stability";
    let peak = 1e6;
    let temp = peak / 20.0;
    let s = 1e-2;
    let ln_at = |n: usize| -> f64 {
        let grid = EnergyGrid::geometric(temp / 100.0, 50.0 * peak, n).unwrap();
        let base = spectral_oracle::blackbody_state(&grid, temp).unwrap();
        let pert =
            spectral_oracle::base_proportional_perturbation(&grid, peak, peak / 20.0, &base)
                .unwrap();
        spectral_oracle::perturbative_conditional_entropy(&base, &pert, s)
            .unwrap()
            .abs()
            .ln()
    };
    let coarse = ln_at(2048);
    let refined = ln_at(4096);
    let rel = (refined - coarse).abs() / coarse.abs();
    if rel <= 1e-3 {
        CheckOutcome::pass(name, format!("ln|gap| moves {rel:.2e} relative under doubling"))
    } else {
        CheckOutcome::fail(name, format!("ln|gap| moves {rel:.2e} relative under doubling"))
    }
}

fn oracle_scaling_exponent() -> CheckOutcome {
    let name = "oracle_scaling_exponent";
    let report =
        spectral_oracle::oracle_report(&ModelParams::fiducial(), &OracleConfig::default())
            .unwrap();
    let e = report.scaling_exponent;
    if (e - 2.0).abs() <= 0.01 {
        CheckOutcome::pass(name, format!("measured exponent {e:.4}"))
    } else {
        CheckOutcome::fail(name, format!("measured exponent {e:.4} outside 2.00 +/- 0.01"))
    }
}

fn sweep_ordering() -> CheckOutcome {
    let name = "sweep_ordering";
    let fid = ModelParams::fiducial();
    for &temp_nr in &log_spaced(1e6, 1e8, 10) {
        for &t_nr in &log_spaced(1e6, 1e9, 10) {
            let p = ModelParams::new(temp_nr, t_nr, fid.t_0(), fid.temp_0()).unwrap();
            let report =
                critical_times::solve_critical_times(&p, DEFAULT_DECOUPLING_TIME_YEARS).unwrap();
            if !report.exists_pair {
                return CheckOutcome::fail(
                    name,
                    format!("no pair at temp_nr = {temp_nr:e}, t_nr = {t_nr:e}"),
                );
            }
            let t1 = report.t_cr1.unwrap();
            let t2 = report.t_cr2.unwrap();
            if !(t1 < p.t_0() && p.t_0() < t2) {
                return CheckOutcome::fail(
                    name,
                    format!("ordering broken at temp_nr = {temp_nr:e}, t_nr = {t_nr:e}"),
                );
            }
        }
    }
    CheckOutcome::pass(name, "t_cr1 < t_0 < t_cr2 on the full 10x10 default sweep".into())
}

fn equilibrium_constancy() -> CheckOutcome {
    let name = "equilibrium_constancy";
    let s0 = gap_model::equilibrium_entropy(3.0, 1.0).unwrap();
    let mut worst = 0.0f64;
    for k in [2.0, 10.0, 100.0] {
        let s = gap_model::equilibrium_entropy(3.0 / k, k.powi(3)).unwrap();
        worst = worst.max((s / s0 - 1.0).abs());
    }
    if worst <= 1e-12 {
        CheckOutcome::pass(name, format!("worst relative drift {worst:.2e} for k in 2, 10, 100"))
    } else {
        CheckOutcome::fail(name, format!("entropy drifts by {worst:.2e} under expansion scaling"))
    }
}

fn entropy_dip_normalization() -> CheckOutcome {
    let name = "entropy_dip_normalization";
    let p = ModelParams::fiducial();
    let eps = 0.1;
    let grid = log_spaced(1e3, 1e16, 101);
    let pts = match gap_model::actual_entropy_curve(&p, eps, &grid) {
        Ok(v) => v,
        Err(e) => return CheckOutcome::fail(name, format!("curve: {e}")),
    };
    let min = pts
        .iter()
        .min_by(|a, b| a.s_act.partial_cmp(&b.s_act).unwrap())
        .unwrap();
    let all_below = pts.iter().all(|q| q.s_act <= q.s_max);
    let recovered = pts.last().unwrap().s_act > 1.0 - 1e-3 * eps;
    let dip = (min.s_act - (1.0 - eps)).abs();
    if all_below && recovered && dip < 1e-12 {
        CheckOutcome::pass(name, format!("dip at t = {:.4e} yr reaches 1 - epsilon", min.t_years))
    } else {
        CheckOutcome::fail(
            name,
            format!("dip {dip:e}, bounded {all_below}, recovered {recovered}"),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_is_green_without_faults() {
        let outcomes = run_invariant_suite(None);
        let failed: Vec<&str> = outcomes
            .iter()
            .filter(|o| !o.passed)
            .map(|o| o.name)
            .collect();
        assert!(failed.is_empty(), "failing checks: {failed:?}");
    }

    #[test]
    fn misprint_exponent_fault_breaks_derivative_consistency() {
        let outcomes = run_invariant_suite(Some(FaultInjection::MisprintExponent));
        let derivative = outcomes
            .iter()
            .find(|o| o.name == "derivative_consistency")
            .unwrap();
        assert!(!derivative.passed);
    }

    #[test]
    fn drop_half_fault_breaks_quadratic_agreement() {
        let outcomes = run_invariant_suite(Some(FaultInjection::DropQuadraticHalf));
        let agreement = outcomes
            .iter()
            .find(|o| o.name == "quadratic_agreement")
            .unwrap();
        assert!(!agreement.passed);
        let scaling = outcomes
            .iter()
            .find(|o| o.name == "quadratic_scaling_limit")
            .unwrap();
        assert!(!scaling.passed);
    }
}
