//! Exact and asymptotic solutions of the critical-time balance equation.
//!
//! The gap's growth rate vanishes where the expansion terms balance the
//! nuclear decay rate:
//!
//! ```text
//! beta + 2 t_0/t = (2/3) alpha (t_0/t)^(1/3)
//! ```
//!
//! Substituting `u = (t_0/t)^(1/3)` turns this into the cubic
//! `f(u) = 2u^3 - (2/3) alpha u + beta`, solved here by bracketed bisection
//! refined with guarded Newton steps. The closed-form cubic formula cancels
//! catastrophically when `beta << alpha^(3/2)` (exactly the physical
//! regime), so it survives only as a test oracle at moderate `alpha`.
//!
//! A pair of positive roots exists precisely when the cubic's local minimum
//! is negative, i.e. `beta < (4/27) alpha^(3/2)`; tangency counts as no
//! pair since the rate does not change sign there. The cubic always has one
//! more real root, which is negative and unphysical.

use crate::quantities::{DimensionlessParams, ModelParams};
use thiserror::Error;

/// Standard epoch when matter and radiation cease interacting, years.
/// The model is not valid before this time; the exact value is extrinsic
/// to the model and configurable everywhere it is used.
pub const DEFAULT_DECOUPLING_TIME_YEARS: f64 = 3.8e5;

/// Bisection/Newton iteration cap. A bracket shrinks by 2^200 well below
/// any f64 spacing, so hitting the cap signals malformed input.
pub const MAX_ROOT_ITERATIONS: usize = 200;

/// Residual acceptance factor: a converged root must satisfy
/// `|f(u)| <= 1e-12 * max(beta, (2/3) alpha |u|)`.
const RESIDUAL_TOLERANCE_FACTOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("decoupling time must be strictly positive and finite (got {value} yr)")]
    InvalidDecouplingTime { value: f64 },
    #[error(
        "root refinement stalled on [{lo}, {hi}]: residual {residual:e} exceeds tolerance {tolerance:e}"
    )]
    NoConvergence {
        lo: f64,
        hi: f64,
        residual: f64,
        tolerance: f64,
    },
}

/// Root classification in the `u = (t_0/t)^(1/3)` variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum URootLabel {
    /// Largest positive root; maps to the early critical time `t_cr1`.
    PhysicalEarly,
    /// Smallest positive root; maps to the late critical time `t_cr2`.
    PhysicalLate,
    /// The remaining real root, always negative, with no physical time.
    UnphysicalNegative,
}

impl URootLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            URootLabel::PhysicalEarly => "physical_early",
            URootLabel::PhysicalLate => "physical_late",
            URootLabel::UnphysicalNegative => "unphysical_negative",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct URoot {
    pub u: f64,
    pub label: URootLabel,
}

/// Physical-validity flags for one critical time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RootValidity {
    /// The model only applies after decoupling.
    pub after_decoupling: bool,
    /// The perturbative gap formula needs `t > t_nr`.
    pub after_t_nr: bool,
}

/// Exact roots, asymptotic approximations, and validity classification.
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalTimesReport {
    pub exists_pair: bool,
    pub t_cr1: Option<f64>,
    pub t_cr2: Option<f64>,
    pub u_roots: Vec<URoot>,
    pub approx_t_cr1: f64,
    pub approx_t_cr2: f64,
    pub rel_err_1: Option<f64>,
    pub rel_err_2: Option<f64>,
    pub validity_1: Option<RootValidity>,
    pub validity_2: Option<RootValidity>,
}

/// The balance cubic `f(u) = 2u^3 - (2/3) alpha u + beta`.
///
/// `f(u) = 0` with `u > 0` exactly when `t = t_0 / u^3` is a critical time.
pub fn cubic_residual(d: &DimensionlessParams, u: f64) -> f64 {
    2.0 * u * u * u - (2.0 / 3.0) * d.alpha * u + d.beta
}

/// Derivative `f'(u) = 6u^2 - (2/3) alpha`.
pub fn cubic_residual_derivative(d: &DimensionlessParams, u: f64) -> f64 {
    6.0 * u * u - (2.0 / 3.0) * d.alpha
}

/// Threshold `(4/27) alpha^(3/2)`: the cubic's local minimum is negative,
/// hence two positive roots exist, exactly when `beta` is strictly below it.
pub fn pair_threshold(d: &DimensionlessParams) -> f64 {
    (4.0 / 27.0) * d.alpha * d.alpha.sqrt()
}

/// Whether a pair of positive critical times exists (tangency excluded).
pub fn pair_exists(d: &DimensionlessParams) -> bool {
    d.beta < pair_threshold(d)
}

/// Early-root approximation `t_0 (3 temp_0 / temp_nr)^(3/2)`, valid when
/// the decay term is negligible against the expansion terms.
pub fn approx_t_cr1(p: &ModelParams) -> f64 {
    let ratio = 3.0 * p.temp_0() / p.temp_nr();
    p.t_0() * ratio * ratio.sqrt()
}

/// Late-root approximation `t_0 ((2/3)(temp_nr/temp_0)(t_nr/t_0))^3`,
/// valid when the `2 t_0/t` term is negligible.
pub fn approx_t_cr2(p: &ModelParams) -> f64 {
    let base = (2.0 / 3.0) * (p.temp_nr() / p.temp_0()) * (p.t_nr() / p.t_0());
    p.t_0() * base.powi(3)
}

/// Safeguarded Newton iteration on a bracket with a guaranteed sign change.
/// Falls back to bisection whenever the Newton step leaves the bracket or
/// fails to halve the previous step.
fn refine_root(d: &DimensionlessParams, a: f64, b: f64) -> f64 {
    let fa = cubic_residual(d, a);
    if fa == 0.0 {
        return a;
    }
    let fb = cubic_residual(d, b);
    if fb == 0.0 {
        return b;
    }
    debug_assert!(fa * fb < 0.0, "refine_root needs a sign change");
    let (mut xl, mut xh) = if fa < 0.0 { (a, b) } else { (b, a) };
    let mut rts = 0.5 * (a + b);
    let mut dx_old = (b - a).abs();
    let mut dx = dx_old;
    let mut f = cubic_residual(d, rts);
    let mut df = cubic_residual_derivative(d, rts);
    for _ in 0..MAX_ROOT_ITERATIONS {
        let newton_safe = df != 0.0
            && ((rts - xh) * df - f) * ((rts - xl) * df - f) < 0.0
            && 2.0 * f.abs() < (dx_old * df).abs();
        if newton_safe {
            dx_old = dx;
            dx = f / df;
            let prev = rts;
            rts -= dx;
            if prev == rts {
                return rts;
            }
        } else {
            dx_old = dx;
            dx = 0.5 * (xh - xl);
            rts = xl + dx;
            if xl == rts {
                return rts;
            }
        }
        f = cubic_residual(d, rts);
        df = cubic_residual_derivative(d, rts);
        if f == 0.0 {
            return rts;
        }
        if f < 0.0 {
            xl = rts;
        } else {
            xh = rts;
        }
    }
    rts
}

fn checked_root(d: &DimensionlessParams, lo: f64, hi: f64) -> Result<f64, SolveError> {
    let u = refine_root(d, lo, hi);
    let residual = cubic_residual(d, u).abs();
    let tolerance =
        RESIDUAL_TOLERANCE_FACTOR * d.beta.max((2.0 / 3.0) * d.alpha * u.abs());
    if residual <= tolerance {
        Ok(u)
    } else {
        Err(SolveError::NoConvergence {
            lo,
            hi,
            residual,
            tolerance,
        })
    }
}

fn validity(p: &ModelParams, t: f64, t_dec: f64) -> RootValidity {
    RootValidity {
        after_decoupling: t > t_dec,
        after_t_nr: t > p.t_nr(),
    }
}

/// Solve the balance equation exactly and report the roots alongside their
/// asymptotic approximations, relative errors, and validity flags.
///
/// The absence of a positive pair is a valid outcome, not an error: the
/// report then carries only the negative root.
pub fn solve_critical_times(
    p: &ModelParams,
    t_dec: f64,
) -> Result<CriticalTimesReport, SolveError> {
    if !t_dec.is_finite() || t_dec <= 0.0 {
        return Err(SolveError::InvalidDecouplingTime { value: t_dec });
    }
    let d = p.dimensionless();
    let u_star = d.alpha.sqrt() / 3.0;
    // Bracketing needs a sign change at the cubic's minimum. Within a few
    // ulps of tangency the threshold comparison and the evaluated residual
    // can disagree; the residual is what the brackets see, so it decides,
    // and exact tangency counts as no pair either way.
    let exists = pair_exists(&d) && cubic_residual(&d, u_star) < 0.0;
    let approx_1 = approx_t_cr1(p);
    let approx_2 = approx_t_cr2(p);

    // The negative root always exists. f(0) = beta > 0 and f is provably
    // negative at -(sqrt(alpha/3) + beta^(1/3) + 1).
    let neg_lo = -((d.alpha / 3.0).sqrt() + d.beta.cbrt() + 1.0);
    let u_neg = checked_root(&d, neg_lo, 0.0)?;

    if !exists {
        return Ok(CriticalTimesReport {
            exists_pair: false,
            t_cr1: None,
            t_cr2: None,
            u_roots: vec![URoot {
                u: u_neg,
                label: URootLabel::UnphysicalNegative,
            }],
            approx_t_cr1: approx_1,
            approx_t_cr2: approx_2,
            rel_err_1: None,
            rel_err_2: None,
            validity_1: None,
            validity_2: None,
        });
    }

    // Local minimum at u* = sqrt(alpha)/3 separates the positive roots:
    // f(0) = beta > 0 > f(u*), and f(sqrt(alpha/3) + beta) >= beta > 0.
    let u_late = checked_root(&d, 0.0, u_star)?;
    let u_early = checked_root(&d, u_star, (d.alpha / 3.0).sqrt() + d.beta)?;

    let t_cr1 = p.t_0() / (u_early * u_early * u_early);
    let t_cr2 = p.t_0() / (u_late * u_late * u_late);

    Ok(CriticalTimesReport {
        exists_pair: true,
        t_cr1: Some(t_cr1),
        t_cr2: Some(t_cr2),
        u_roots: vec![
            URoot {
                u: u_early,
                label: URootLabel::PhysicalEarly,
            },
            URoot {
                u: u_late,
                label: URootLabel::PhysicalLate,
            },
            URoot {
                u: u_neg,
                label: URootLabel::UnphysicalNegative,
            },
        ],
        approx_t_cr1: approx_1,
        approx_t_cr2: approx_2,
        rel_err_1: Some((approx_1 - t_cr1).abs() / t_cr1),
        rel_err_2: Some((approx_2 - t_cr2).abs() / t_cr2),
        validity_1: Some(validity(p, t_cr1, t_dec)),
        validity_2: Some(validity(p, t_cr2, t_dec)),
    })
}

#[cfg(test)]
#[allow(clippy::excessive_precision)] // frozen oracle values keep their full digits
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn fid() -> ModelParams {
        ModelParams::fiducial()
    }

    fn fid_d() -> DimensionlessParams {
        fid().dimensionless()
    }

    #[test]
    fn residual_at_zero_is_beta() {
        assert_eq!(cubic_residual(&fid_d(), 0.0), 1.5e4);
    }

    // Frozen closed form: f(u*) = beta - (4/27) alpha^(3/2) at 50 digits.
    #[test]
    fn residual_at_local_minimum() {
        let d = fid_d();
        let u_star = d.alpha.sqrt() / 3.0;
        assert_relative_eq!(u_star, 192.45008972987526, max_relative = 1e-14);
        assert_relative_eq!(
            cubic_residual(&d, u_star),
            -2.8496124404425964e7,
            max_relative = 1e-12
        );
    }

    #[test]
    fn residual_small_case() {
        let d = DimensionlessParams {
            alpha: 3.0,
            beta: 4.0,
            t_0: 1.0,
        };
        assert_eq!(cubic_residual(&d, 1.0), 4.0);
    }

    #[test]
    fn pair_threshold_fiducial() {
        let d = fid_d();
        assert_relative_eq!(pair_threshold(&d), 2.8511124404425964e7, max_relative = 1e-12);
        assert!(pair_exists(&d));
    }

    #[test]
    fn pair_boundary_is_strict_and_flips() {
        let mut d = fid_d();
        let threshold = pair_threshold(&d);
        d.beta = threshold;
        assert!(!pair_exists(&d), "tangency counts as no pair");
        d.beta = threshold * (1.0 - 1e-6);
        assert!(pair_exists(&d));
        d.beta = threshold * (1.0 + 1e-6);
        assert!(!pair_exists(&d));
    }

    #[test]
    fn pair_absent_for_small_alpha() {
        let d = DimensionlessParams {
            alpha: 3.0,
            beta: 1e6,
            t_0: 1.0,
        };
        assert!(!pair_exists(&d));
    }

    #[test]
    fn approx_t_cr1_fiducial_and_scalings() {
        let p = fid();
        assert_relative_eq!(approx_t_cr1(&p), 405.0, max_relative = 1e-12);
        // alpha = 3 makes the prefactor exactly 1
        let q = ModelParams::new(9.0, 1e6, 1.5e10, 3.0).unwrap();
        assert_relative_eq!(approx_t_cr1(&q), q.t_0(), max_relative = 1e-14);
        let doubled = ModelParams::new(1e6, 1e6, 3.0e10, 3.0).unwrap();
        assert_relative_eq!(
            approx_t_cr1(&doubled),
            2.0 * approx_t_cr1(&p),
            max_relative = 1e-14
        );
    }

    #[test]
    fn approx_t_cr2_fiducial_and_scalings() {
        let p = fid();
        assert_relative_eq!(approx_t_cr2(&p) / p.t_0(), 3251.536859218615, max_relative = 1e-12);
        // (2/3) alpha (t_nr/t_0) = 1 gives t_0 exactly
        let q = ModelParams::new(4.5, 1.5e10, 1.5e10, 3.0).unwrap();
        assert_relative_eq!(approx_t_cr2(&q), q.t_0(), max_relative = 1e-12);
        let tripled = ModelParams::new(1e6, 3e6, 1.5e10, 3.0).unwrap();
        assert_relative_eq!(
            approx_t_cr2(&tripled),
            27.0 * approx_t_cr2(&p),
            max_relative = 1e-12
        );
    }

    // Frozen 50-digit roots of the fiducial cubic.
    #[test]
    fn fiducial_roots_match_high_precision_values() {
        let report = solve_critical_times(&fid(), DEFAULT_DECOUPLING_TIME_YEARS).unwrap();
        assert!(report.exists_pair);
        let t_cr1 = report.t_cr1.unwrap();
        let t_cr2 = report.t_cr2.unwrap();
        assert_relative_eq!(t_cr1, 405.12306236159151, max_relative = 1e-10);
        assert_relative_eq!(t_cr2, 4.8773046888278980e13, max_relative = 1e-10);
        assert_relative_eq!(t_cr2 / fid().t_0(), 3251.5364592185986, max_relative = 1e-10);
        assert!(t_cr1 < fid().t_0() && fid().t_0() < t_cr2);

        let us: Vec<f64> = report.u_roots.iter().map(|r| r.u).collect();
        assert_relative_eq!(us[0], 333.29957820616766, max_relative = 1e-10);
        assert_relative_eq!(us[1], 0.067500002767922216, max_relative = 1e-10);
        assert_relative_eq!(us[2], -333.36707820893558, max_relative = 1e-10);
        assert_eq!(report.u_roots[0].label, URootLabel::PhysicalEarly);
        assert_eq!(report.u_roots[1].label, URootLabel::PhysicalLate);
        assert_eq!(report.u_roots[2].label, URootLabel::UnphysicalNegative);
        assert_eq!(
            report
                .u_roots
                .iter()
                .filter(|r| r.u < 0.0)
                .count(),
            1
        );
    }

    // Frozen from the same 50-digit solve.
    #[test]
    fn fiducial_approximation_errors() {
        let report = solve_critical_times(&fid(), DEFAULT_DECOUPLING_TIME_YEARS).unwrap();
        let e1 = report.rel_err_1.unwrap();
        let e2 = report.rel_err_2.unwrap();
        assert_relative_eq!(e1, 3.037653815e-4, max_relative = 1e-6);
        assert_relative_eq!(e2, 1.230187702e-7, max_relative = 1e-2);
        assert!(e1 < 0.05 && e2 < 0.05);
    }

    #[test]
    fn fiducial_validity_flags() {
        let report = solve_critical_times(&fid(), DEFAULT_DECOUPLING_TIME_YEARS).unwrap();
        let v1 = report.validity_1.unwrap();
        let v2 = report.validity_2.unwrap();
        assert!(!v1.after_decoupling, "t_cr1 = 405 yr lies below decoupling");
        assert!(!v1.after_t_nr);
        assert!(v2.after_decoupling);
        assert!(v2.after_t_nr);
    }

    #[test]
    fn vieta_relations_hold() {
        let report = solve_critical_times(&fid(), DEFAULT_DECOUPLING_TIME_YEARS).unwrap();
        let us: Vec<f64> = report.u_roots.iter().map(|r| r.u).collect();
        let sum: f64 = us.iter().sum();
        let prod: f64 = us.iter().product();
        let scale = us.iter().fold(0.0f64, |m, u| m.max(u.abs()));
        assert!(sum.abs() <= 1e-9 * scale, "sum {sum}");
        let d = fid_d();
        assert_relative_eq!(prod, -d.beta / 2.0, max_relative = 1e-9);
    }

    #[test]
    fn no_pair_report_carries_only_negative_root() {
        let p = ModelParams::new(9.0, 1.0, 1e6, 3.0).unwrap(); // alpha 3, beta 1e6
        let report = solve_critical_times(&p, 1.0).unwrap();
        assert!(!report.exists_pair);
        assert!(report.t_cr1.is_none() && report.t_cr2.is_none());
        assert_eq!(report.u_roots.len(), 1);
        assert_eq!(report.u_roots[0].label, URootLabel::UnphysicalNegative);
        assert!(report.u_roots[0].u < 0.0);
        assert!(report.rel_err_1.is_none() && report.validity_2.is_none());
    }

    #[test]
    fn rejects_bad_decoupling_time() {
        assert!(matches!(
            solve_critical_times(&fid(), 0.0),
            Err(SolveError::InvalidDecouplingTime { value }) if value == 0.0
        ));
        assert!(solve_critical_times(&fid(), f64::NAN).is_err());
    }

    /// Closed-form depressed-cubic roots (trigonometric method), usable as
    /// an independent oracle at moderate alpha where it does not cancel.
    fn closed_form_roots(alpha: f64, beta: f64) -> [f64; 3] {
        // u^3 + p u + q with p = -alpha/3, q = beta/2
        let p = -alpha / 3.0;
        let q = beta / 2.0;
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (2.0 * p)) * (-3.0 / p).sqrt();
        let theta = arg.acos();
        let mut roots = [0.0f64; 3];
        for (k, r) in roots.iter_mut().enumerate() {
            *r = m * ((theta - 2.0 * std::f64::consts::PI * k as f64) / 3.0).cos();
        }
        roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
        roots
    }

    #[test]
    fn bisection_matches_closed_form_at_moderate_alpha() {
        let p = ModelParams::new(36.0, 0.5e6, 1e6, 3.0).unwrap(); // alpha 12, beta 2
        let d = p.dimensionless();
        assert!(pair_exists(&d));
        let report = solve_critical_times(&p, 1.0).unwrap();
        let mut us: Vec<f64> = report.u_roots.iter().map(|r| r.u).collect();
        us.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let oracle = closed_form_roots(d.alpha, d.beta);
        for (got, want) in us.iter().zip(oracle.iter()) {
            assert_relative_eq!(got, want, max_relative = 1e-12);
        }
    }
}
