//! Generalized Hurst exponents, mass exponents and the singularity spectrum.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fluctuation::FluctuationFunction;
use crate::scalar::Scalar;
use crate::scaling::fit_power_law;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultifractalSpectrum<T> {
    pub q_values: Vec<T>,
    pub h: Vec<T>,
    pub tau: Vec<T>,
    pub alpha: Vec<T>,
    pub f_alpha: Vec<T>,
    /// `max(alpha) - min(alpha)` over the evaluated q grid (not extrapolated).
    pub delta_alpha: T,
    pub fractal_dim: T,
}

impl<T: Scalar> MultifractalSpectrum<T> {
    /// Chains `tau_of_q`, `legendre` and `spectrum_width` from a given `h(q)`.
    pub fn from_hq(q_values: Vec<T>, h: Vec<T>, fractal_dim: T) -> Result<Self> {
        let tau = tau_of_q(&q_values, &h, fractal_dim)?;
        let (alpha, f_alpha) = legendre(&q_values, &tau)?;
        let delta_alpha = spectrum_width(&alpha)?;
        Ok(Self {
            q_values,
            h,
            tau,
            alpha,
            f_alpha,
            delta_alpha,
            fractal_dim,
        })
    }

    /// Fits `h(q)` on `fluct` and transforms it.
    pub fn from_fluctuation(
        fluct: &FluctuationFunction<T>,
        fit_range: Option<(usize, usize)>,
        fractal_dim: T,
    ) -> Result<Self> {
        let (q, h) = hq_curve(fluct, fit_range)?;
        Self::from_hq(q, h, fractal_dim)
    }
}

/// Power-law exponent of every `F_q(t)` row.
pub fn hq_curve<T: Scalar>(
    fluct: &FluctuationFunction<T>,
    fit_range: Option<(usize, usize)>,
) -> Result<(Vec<T>, Vec<T>)> {
    let h = fluct
        .q_values
        .iter()
        .map(|&q| fit_power_law(fluct, q, fit_range).map(|fit| fit.exponent))
        .collect::<Result<Vec<_>>>()?;
    Ok((fluct.q_values.clone(), h))
}

/// `tau(q) = q h(q) - D_f`.
pub fn tau_of_q<T: Scalar>(q_values: &[T], h: &[T], fractal_dim: T) -> Result<Vec<T>> {
    if q_values.len() != h.len() {
        return Err(Error::Config(format!(
            "{} moments but {} exponents",
            q_values.len(),
            h.len()
        )));
    }
    if let Some(bad) = h.iter().chain(q_values).chain([&fractal_dim]).find(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("h(q) input {bad}")));
    }
    Ok(q_values.iter().zip(h).map(|(&q, &h)| q * h - fractal_dim).collect())
}

/// Discrete Legendre transform: `alpha = d tau / dq` by central differences
/// inside the grid and one-sided differences at both ends; `f = q alpha - tau`.
pub fn legendre<T: Scalar>(q_values: &[T], tau: &[T]) -> Result<(Vec<T>, Vec<T>)> {
    let n = q_values.len();
    if n < 3 {
        return Err(Error::InvalidQGrid(format!(
            "Legendre transform needs at least 3 moments, got {n}"
        )));
    }
    if tau.len() != n {
        return Err(Error::Config(format!("{n} moments but {} tau values", tau.len())));
    }
    if q_values.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidQGrid("moments must be strictly increasing".into()));
    }
    let slope = |i: usize, j: usize| (tau[j] - tau[i]) / (q_values[j] - q_values[i]);
    let alpha: Vec<T> = (0..n)
        .map(|i| match i {
            0 => slope(0, 1),
            i if i == n - 1 => slope(n - 2, n - 1),
            i => slope(i - 1, i + 1),
        })
        .collect();
    let f_alpha = q_values
        .iter()
        .zip(&alpha)
        .zip(tau)
        .map(|((&q, &a), &t)| q * a - t)
        .collect();
    Ok((alpha, f_alpha))
}

/// `max(alpha) - min(alpha)`.
pub fn spectrum_width<T: Scalar>(alpha: &[T]) -> Result<T> {
    if alpha.is_empty() {
        return Err(Error::Empty("alpha"));
    }
    let (lo, hi) = alpha.iter().fold((T::infinity(), T::neg_infinity()), |(lo, hi), &a| {
        (lo.min(a), hi.max(a))
    });
    Ok(hi - lo)
}
