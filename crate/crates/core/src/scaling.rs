//! Power-law fits of fluctuation functions in log-log space.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fluctuation::FluctuationFunction;
use crate::scalar::Scalar;

/// Default half-width of the white-noise and 1/f bands in [`classify_regime`].
pub const DEFAULT_REGIME_TOLERANCE: f64 = 0.02;

/// Lower bound on the per-point residual variance used by the BIC comparison,
/// in squared log10 units. Keeps the likelihood finite on noiseless data.
pub const BIC_VARIANCE_FLOOR: f64 = 1e-12;

/// OLS line `log10 F = intercept + exponent * log10 t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerLawFit<T> {
    pub exponent: T,
    pub intercept: T,
    /// Smallest and largest scale used.
    pub fit_range: (usize, usize),
    pub n_points: usize,
    pub residual_sse: T,
    pub stderr: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelChoice {
    Single,
    TwoStage,
}

/// Two power laws joined at a break scale `t_c` (shared by both segments).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CrossoverFit<T> {
    pub t_c: usize,
    pub left: PowerLawFit<T>,
    pub right: PowerLawFit<T>,
    pub single: PowerLawFit<T>,
    pub preferred: ModelChoice,
    /// `BIC(two-stage) - BIC(single)`; negative favours the crossover.
    pub delta_bic: T,
}

/// Correlation regime read off a DFA exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    AntiCorrelated,
    WhiteNoise,
    LongRangeCorrelated,
    OneOverF,
    Unstable,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Regime::AntiCorrelated => "anti-correlated",
            Regime::WhiteNoise => "white-noise",
            Regime::LongRangeCorrelated => "long-range-correlated",
            Regime::OneOverF => "one-over-f",
            Regime::Unstable => "unstable",
        };
        f.write_str(s)
    }
}

/// Fits `F_q(t) ~ t^H` over the scales inside `range` (all scales when `None`).
pub fn fit_power_law<T: Scalar>(
    fluct: &FluctuationFunction<T>,
    q: T,
    range: Option<(usize, usize)>,
) -> Result<PowerLawFit<T>> {
    let row = fluct.row(q)?;
    let (lo, hi) = range.unwrap_or((0, usize::MAX));
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut scales = Vec::new();
    for (&t, &f) in fluct.scales.iter().zip(row) {
        if t < lo || t > hi {
            continue;
        }
        if !(f > T::zero()) || !f.is_finite() {
            return Err(Error::NonPositiveFluctuation {
                scale: t,
                value: f.to_f64_lossy(),
            });
        }
        scales.push(t);
        xs.push(T::from_count(t).log10());
        ys.push(f.log10());
    }
    if xs.len() < 3 {
        return Err(Error::TooFewPoints(xs.len()));
    }
    Ok(ols(&xs, &ys, (scales[0], scales[scales.len() - 1])))
}

fn ols<T: Scalar>(xs: &[T], ys: &[T], fit_range: (usize, usize)) -> PowerLawFit<T> {
    let n = T::from_count(xs.len());
    let xbar = xs.iter().copied().sum::<T>() / n;
    let ybar = ys.iter().copied().sum::<T>() / n;
    let sxx: T = xs.iter().map(|&x| (x - xbar) * (x - xbar)).sum();
    let sxy: T = xs.iter().zip(ys).map(|(&x, &y)| (x - xbar) * (y - ybar)).sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let sse: T = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| {
            let r = y - intercept - slope * x;
            r * r
        })
        .sum();
    let stderr = (sse / (n - T::lit(2.0)) / sxx).sqrt();
    PowerLawFit {
        exponent: slope,
        intercept,
        fit_range,
        n_points: xs.len(),
        residual_sse: sse,
        stderr,
    }
}

/// Gaussian log-residual BIC with `k` parameters over `n` points.
fn bic<T: Scalar>(sse: T, n: usize, k: usize) -> T {
    let nf = T::from_count(n);
    let var = (sse / nf).max(T::lit(BIC_VARIANCE_FLOOR));
    nf * var.ln() + T::from_count(k) * nf.ln()
}

/// Exhaustive search for the break scale minimizing the two-segment SSE.
///
/// Every candidate keeps at least three scales strictly on each side of the
/// break; the break scale itself belongs to both segments.
pub fn fit_crossover<T: Scalar>(fluct: &FluctuationFunction<T>, q: T) -> Result<CrossoverFit<T>> {
    let n = fluct.scales.len();
    if n < 7 {
        return Err(Error::TooFewScales(n));
    }
    let row = fluct.row(q)?;
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    for (&t, &f) in fluct.scales.iter().zip(row) {
        if !(f > T::zero()) || !f.is_finite() {
            return Err(Error::NonPositiveFluctuation {
                scale: t,
                value: f.to_f64_lossy(),
            });
        }
        xs.push(T::from_count(t).log10());
        ys.push(f.log10());
    }
    let s = &fluct.scales;
    let single = ols(&xs, &ys, (s[0], s[n - 1]));

    let tie = T::lit(1e-12);
    let mut best: Option<(usize, PowerLawFit<T>, PowerLawFit<T>, T)> = None;
    for b in 3..=n - 4 {
        let left = ols(&xs[..=b], &ys[..=b], (s[0], s[b]));
        let right = ols(&xs[b..], &ys[b..], (s[b], s[n - 1]));
        let total = left.residual_sse + right.residual_sse;
        // strict improvement required, so the smallest break wins ties
        if best.as_ref().is_none_or(|(_, _, _, sse)| total < *sse - tie) {
            best = Some((b, left, right, total));
        }
    }
    let (b, left, right, total) = best.expect("at least one candidate for n >= 7");
    let delta_bic = bic(total, n, 4) - bic(single.residual_sse, n, 2);
    Ok(CrossoverFit {
        t_c: s[b],
        left,
        right,
        single,
        preferred: if delta_bic < T::zero() {
            ModelChoice::TwoStage
        } else {
            ModelChoice::Single
        },
        delta_bic,
    })
}

/// Maps a DFA exponent onto its correlation regime.
///
/// The bands `|H - 0.5| <= tol` and `|H - 1| <= tol` take precedence over the
/// open intervals around them.
pub fn classify_regime<T: Scalar>(exponent: T, tolerance: T) -> Result<Regime> {
    if !exponent.is_finite() {
        return Err(Error::NonFinite(format!("exponent {exponent}")));
    }
    let half = T::lit(0.5);
    let one = T::one();
    Ok(if (exponent - half).abs() <= tolerance {
        Regime::WhiteNoise
    } else if (exponent - one).abs() <= tolerance {
        Regime::OneOverF
    } else if exponent < half {
        Regime::AntiCorrelated
    } else if exponent < one {
        Regime::LongRangeCorrelated
    } else {
        Regime::Unstable
    })
}
