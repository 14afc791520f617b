//! Closed-form evolution of the entropy gap and its equilibrium backdrop.
//!
//! The gap magnitude is astronomically large at realistic parameters (its
//! natural log is already ~3.2e5 at the reference time), so this module
//! never materializes |ΔS|. Every value is a [`LogGapValue`]: a sign plus
//! the natural log of the magnitude with the overall amplitude constant
//! factored out. Only differences of logs are ever exponentiated, and only
//! after a range check.
//!
//! With the temperature law `T(t) = temp_0 (t_0/t)^(2/3)`, the log gap is
//!
//! ```text
//! ln|ΔS(t)| = -t/t_nr - 2 ln t + alpha (t/t_0)^(2/3) + const,   t in years
//! ```
//!
//! The exponential term grows as `(t/t_0)^(2/3)`: it is `temp_nr / T(t)`
//! with the temperature law substituted, the orientation consistent with
//! the analytic rate [`bracket_rate`] and with the balance equation solved
//! in [`crate::critical_times`]. The additive constant from taking the log
//! of the dimensionful `t^-2` factor is fixed by the years convention and
//! cancels from every relative output.

use crate::critical_times::{self, SolveError};
use crate::quantities::ModelParams;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GapError {
    #[error("time must be strictly positive and finite (got {t} yr)")]
    NonPositiveTime { t: f64 },
    #[error("{name} must be strictly positive and finite (got {value})")]
    NonPositiveQuantity { name: &'static str, value: f64 },
    #[error("time grid must be strictly increasing and positive (violated at index {index})")]
    GridNotIncreasing { index: usize },
    #[error("epsilon_plot must lie in (0, 1) (got {value})")]
    EpsilonOutOfRange { value: f64 },
    #[error("no critical pair exists for these parameters, so the gap-dip normalization time is undefined")]
    NoCriticalPair,
    #[error("log-gap difference {value} exceeds the safe exponentiation range")]
    ExpRangeExceeded { value: f64 },
    #[error(transparent)]
    Solve(#[from] SolveError),
}

/// Largest log difference we are willing to exponentiate.
const MAX_EXP_ARG: f64 = 700.0;

fn ensure_time(t: f64) -> Result<(), GapError> {
    if !t.is_finite() || t <= 0.0 {
        return Err(GapError::NonPositiveTime { t });
    }
    Ok(())
}

fn ensure_quantity(name: &'static str, value: f64) -> Result<(), GapError> {
    if !value.is_finite() || value <= 0.0 {
        return Err(GapError::NonPositiveQuantity { name, value });
    }
    Ok(())
}

/// Entropy gap in log domain: `sign * exp(ln_magnitude)` in units of the
/// (unknown) amplitude constant. Under this model the sign is -1 for every
/// finite positive time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogGapValue {
    pub sign: i8,
    pub ln_magnitude: f64,
}

/// Evolution phase relative to the two critical times.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GapPhase {
    BeforeFirstCritical,
    Between,
    AfterSecondCritical,
}

impl GapPhase {
    pub fn as_str(self) -> &'static str {
        match self {
            GapPhase::BeforeFirstCritical => "before_tcr1",
            GapPhase::Between => "between",
            GapPhase::AfterSecondCritical => "after_tcr2",
        }
    }
}

impl std::fmt::Display for GapPhase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One sampled point of the gap evolution curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapCurvePoint {
    pub t_years: f64,
    /// `ln|ΔS(t)| - ln|ΔS(t_ref)|`.
    pub ln_gap_rel: f64,
    /// Logarithmic growth rate of the gap magnitude, per year.
    pub bracket_per_year: f64,
    pub phase: GapPhase,
}

/// One sampled point of the maximum-vs-actual entropy backdrop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyCurvePoint {
    pub t_years: f64,
    pub s_max: f64,
    pub s_act: f64,
}

/// Radiation temperature at time `t`: `temp_0 * (t_0 / t)^(2/3)`.
pub fn temperature_at(p: &ModelParams, t: f64) -> Result<f64, GapError> {
    ensure_time(t)?;
    Ok(p.temp_0() * (p.t_0() / t).cbrt().powi(2))
}

/// Log-domain entropy gap at time `t`, amplitude constant factored out.
pub fn ln_gap(p: &ModelParams, t: f64) -> Result<LogGapValue, GapError> {
    ensure_time(t)?;
    let alpha = p.temp_nr() / p.temp_0();
    let ln_magnitude = -t / p.t_nr() - 2.0 * t.ln() + alpha * (t / p.t_0()).cbrt().powi(2);
    Ok(LogGapValue {
        sign: -1,
        ln_magnitude,
    })
}

/// The bracketed rate factor of the gap's time derivative, per year:
///
/// ```text
/// -gamma - 2/t + (2/3) (temp_nr / (t_0 temp_0)) (t_0/t)^(1/3)
/// ```
///
/// The full derivative of ΔS is this rate times ΔS itself, so the rate's
/// zeros are exactly the critical times and its sign flips there.
pub fn bracket_rate(p: &ModelParams, t: f64) -> Result<f64, GapError> {
    ensure_time(t)?;
    Ok(-p.gamma() - 2.0 / t
        + (2.0 / 3.0) * (p.temp_nr() / (p.t_0() * p.temp_0())) * (p.t_0() / t).cbrt())
}

/// Equilibrium radiation entropy `(16/3) sigma V T^3` with `sigma = 1`.
///
/// Constant under pure expansion: `V ~ a^3` against `T ~ 1/a` cancels
/// exactly, which is why the gap (and not this backdrop) carries all the
/// irreversibility.
pub fn equilibrium_entropy(temp: f64, volume: f64) -> Result<f64, GapError> {
    equilibrium_entropy_with_sigma(temp, volume, 1.0)
}

/// Equilibrium entropy with an explicit radiation constant, in units of
/// `sigma K^3 V`.
pub fn equilibrium_entropy_with_sigma(
    temp: f64,
    volume: f64,
    sigma: f64,
) -> Result<f64, GapError> {
    ensure_quantity("temp", temp)?;
    ensure_quantity("volume", volume)?;
    ensure_quantity("sigma", sigma)?;
    Ok((16.0 / 3.0) * sigma * volume * temp.powi(3))
}

fn ensure_grid(t_grid: &[f64]) -> Result<(), GapError> {
    let mut prev = 0.0;
    for (index, &t) in t_grid.iter().enumerate() {
        if !t.is_finite() || t <= prev {
            return Err(GapError::GridNotIncreasing { index });
        }
        prev = t;
    }
    Ok(())
}

/// Classify `t` against an optional critical pair `(t_cr1, t_cr2)`.
///
/// Without a pair the gap magnitude decays monotonically toward
/// equilibrium, which is the same regime as the post-`t_cr2` phase.
pub fn classify_phase(t: f64, pair: Option<(f64, f64)>) -> GapPhase {
    match pair {
        Some((t_cr1, _)) if t < t_cr1 => GapPhase::BeforeFirstCritical,
        Some((_, t_cr2)) if t <= t_cr2 => GapPhase::Between,
        _ => GapPhase::AfterSecondCritical,
    }
}

/// Sample the gap evolution over `t_grid`, logs relative to
/// `reference_time`.
pub fn gap_curve(
    p: &ModelParams,
    t_grid: &[f64],
    reference_time: f64,
    pair: Option<(f64, f64)>,
) -> Result<Vec<GapCurvePoint>, GapError> {
    ensure_grid(t_grid)?;
    let ln_ref = ln_gap(p, reference_time)?.ln_magnitude;
    t_grid
        .iter()
        .map(|&t| {
            Ok(GapCurvePoint {
                t_years: t,
                ln_gap_rel: ln_gap(p, t)?.ln_magnitude - ln_ref,
                bracket_per_year: bracket_rate(p, t)?,
                phase: classify_phase(t, pair),
            })
        })
        .collect()
}

/// Maximum-entropy backdrop against the actual entropy, normalized so the
/// deepest point of the dip has magnitude `epsilon_plot`.
///
/// `s_max` is the constant 1 (entropy is conserved under pure expansion in
/// this homogeneous model) and `s_act = 1 - epsilon_plot *
/// exp(ln|ΔS(t)| - ln|ΔS(t_cr2)|)`. The dip at `t_cr2` is extremely narrow
/// on a log-time axis, so `t_cr2` itself is inserted into the sample grid
/// whenever it falls inside the grid's range; a generic grid would show a
/// flat line instead of the dip. This is a qualitative backdrop only.
pub fn actual_entropy_curve(
    p: &ModelParams,
    epsilon_plot: f64,
    t_grid: &[f64],
) -> Result<Vec<EntropyCurvePoint>, GapError> {
    if !epsilon_plot.is_finite() || epsilon_plot <= 0.0 || epsilon_plot >= 1.0 {
        return Err(GapError::EpsilonOutOfRange {
            value: epsilon_plot,
        });
    }
    ensure_grid(t_grid)?;
    let report =
        critical_times::solve_critical_times(p, critical_times::DEFAULT_DECOUPLING_TIME_YEARS)?;
    let t_cr2 = report.t_cr2.ok_or(GapError::NoCriticalPair)?;
    let ln_ref = ln_gap(p, t_cr2)?.ln_magnitude;

    let mut times: Vec<f64> = t_grid.to_vec();
    if let (Some(&lo), Some(&hi)) = (t_grid.first(), t_grid.last()) {
        if t_cr2 > lo && t_cr2 < hi && !times.contains(&t_cr2) {
            times.push(t_cr2);
            times.sort_by(|a, b| a.partial_cmp(b).unwrap());
        }
    }

    times
        .iter()
        .map(|&t| {
            let ln_diff = ln_gap(p, t)?.ln_magnitude - ln_ref;
            if ln_diff > MAX_EXP_ARG {
                return Err(GapError::ExpRangeExceeded { value: ln_diff });
            }
            Ok(EntropyCurvePoint {
                t_years: t,
                s_max: 1.0,
                s_act: 1.0 - epsilon_plot * ln_diff.exp(),
            })
        })
        .collect()
}

#[cfg(test)]
#[allow(clippy::excessive_precision)] // frozen oracle values keep their full digits
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn fid() -> ModelParams {
        ModelParams::fiducial()
    }

    #[test]
    fn temperature_at_reference_and_octaves() {
        let p = fid();
        assert_relative_eq!(temperature_at(&p, p.t_0()).unwrap(), 3.0, max_relative = 1e-14);
        assert_relative_eq!(
            temperature_at(&p, p.t_0() / 8.0).unwrap(),
            12.0,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            temperature_at(&p, 8.0 * p.t_0()).unwrap(),
            0.75,
            max_relative = 1e-14
        );
    }

    #[test]
    fn temperature_rejects_nonpositive_time() {
        let p = fid();
        assert!(matches!(
            temperature_at(&p, 0.0),
            Err(GapError::NonPositiveTime { .. })
        ));
        assert!(temperature_at(&p, -1.0).is_err());
        assert!(temperature_at(&p, f64::INFINITY).is_err());
    }

    // Frozen from a 50-digit evaluation of
    // -beta - 2 ln(1.5e10) + alpha at the fiducial point.
    #[test]
    fn ln_gap_at_reference_time() {
        let p = fid();
        let g = ln_gap(&p, p.t_0()).unwrap();
        assert_eq!(g.sign, -1);
        assert_relative_eq!(g.ln_magnitude, 3.1828647070125724e5, max_relative = 1e-12);
    }

    // Frozen: -beta*999 - 2 ln(1e3) + alpha*99 at 50 digits.
    #[test]
    fn ln_gap_difference_across_three_decades() {
        let p = fid();
        let d = ln_gap(&p, 1e3 * p.t_0()).unwrap().ln_magnitude
            - ln_gap(&p, p.t_0()).unwrap().ln_magnitude;
        assert_relative_eq!(d, 1.8014986184489442e7, max_relative = 1e-12);
    }

    #[test]
    fn gap_sign_is_always_negative() {
        let p = fid();
        for &t in &[1e-3 * p.t_0(), 1.0, p.t_0(), 1e10 * p.t_0()] {
            let g = ln_gap(&p, t).unwrap();
            assert_eq!(g.sign, -1);
            assert!(g.ln_magnitude.is_finite());
        }
    }

    #[test]
    fn bracket_rate_at_reference_time() {
        let p = fid();
        // (1/t_0) * (-beta - 2 + (2/3) alpha) = 207220.222... / 1.5e10
        assert_relative_eq!(
            bracket_rate(&p, p.t_0()).unwrap(),
            1.3814681481481481e-5,
            max_relative = 1e-12
        );
    }

    #[test]
    fn bracket_rate_dominated_by_expansion_at_small_time() {
        let p = fid();
        let b = bracket_rate(&p, 1.0).unwrap();
        assert!(b < 0.0, "expected -2/t to dominate, got {b}");
        assert_relative_eq!(b, -1.9634645248247338, max_relative = 1e-12);
    }

    #[test]
    fn equilibrium_entropy_examples() {
        assert_relative_eq!(
            equilibrium_entropy(1.0, 1.0).unwrap(),
            16.0 / 3.0,
            max_relative = 1e-15
        );
        let s1 = equilibrium_entropy(1.0, 1.0).unwrap();
        let s2 = equilibrium_entropy(2.0, 1.0).unwrap();
        assert_relative_eq!(s2 / s1, 8.0, max_relative = 1e-15);
        assert!(equilibrium_entropy(0.0, 1.0).is_err());
        assert!(equilibrium_entropy(1.0, -2.0).is_err());
        assert!(equilibrium_entropy_with_sigma(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn equilibrium_entropy_constant_under_expansion_scaling() {
        let s0 = equilibrium_entropy(3.0, 1.0).unwrap();
        for k in [2.0, 10.0, 100.0] {
            let s = equilibrium_entropy(3.0 / k, k.powi(3)).unwrap();
            assert_relative_eq!(s, s0, max_relative = 1e-12);
        }
    }

    #[test]
    fn phase_classification() {
        let pair = Some((405.0, 4.9e13));
        assert_eq!(classify_phase(10.0, pair), GapPhase::BeforeFirstCritical);
        assert_eq!(classify_phase(1e10, pair), GapPhase::Between);
        assert_eq!(classify_phase(1e15, pair), GapPhase::AfterSecondCritical);
        assert_eq!(classify_phase(1.0, None), GapPhase::AfterSecondCritical);
    }

    #[test]
    fn gap_curve_reference_row_is_zero() {
        let p = fid();
        let grid = [1e9, p.t_0(), 1e11];
        let pts = gap_curve(&p, &grid, p.t_0(), None).unwrap();
        assert_eq!(pts.len(), 3);
        assert_eq!(pts[1].ln_gap_rel, 0.0);
        assert!(pts[0].ln_gap_rel < 0.0);
    }

    #[test]
    fn gap_curve_rejects_unsorted_grid() {
        let p = fid();
        assert!(matches!(
            gap_curve(&p, &[1.0, 1.0], p.t_0(), None),
            Err(GapError::GridNotIncreasing { index: 1 })
        ));
        assert!(matches!(
            gap_curve(&p, &[-1.0, 2.0], p.t_0(), None),
            Err(GapError::GridNotIncreasing { index: 0 })
        ));
    }

    #[test]
    fn actual_entropy_curve_dips_to_epsilon_at_tcr2() {
        let p = fid();
        let grid = crate::sampling::log_spaced(1e3, 1e16, 101);
        let eps = 0.25;
        let pts = actual_entropy_curve(&p, eps, &grid).unwrap();
        assert_eq!(pts.len(), 102, "t_cr2 should be inserted");
        let min = pts
            .iter()
            .min_by(|a, b| a.s_act.partial_cmp(&b.s_act).unwrap())
            .unwrap();
        assert_relative_eq!(min.s_act, 1.0 - eps, max_relative = 1e-12);
        assert!(pts.iter().all(|q| q.s_act <= q.s_max));
        assert!(pts.iter().all(|q| q.s_max == 1.0));
        // gap decays by far more than exp(-700) over the final decades
        let last = pts.last().unwrap();
        assert!(last.s_act > 1.0 - 1e-3 * eps);
    }

    #[test]
    fn actual_entropy_curve_validates_epsilon() {
        let p = fid();
        for bad in [0.0, 1.0, -0.5, f64::NAN] {
            assert!(matches!(
                actual_entropy_curve(&p, bad, &[1.0, 2.0]),
                Err(GapError::EpsilonOutOfRange { .. })
            ));
        }
    }
}
