//! End-to-end analysis of a price panel for a list of return intervals.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{AtStage, Error, Result, StageError};
use crate::fluctuation::{mfdfa, DfaOptions, FluctuationFunction, ScaleGrid};
use crate::ingest::{MissingPolicy, PricePanel};
use crate::returns::ReturnPanel;
use crate::scalar::Scalar;
use crate::scaling::{classify_regime, fit_crossover, fit_power_law, CrossoverFit, PowerLawFit, Regime};
use crate::spectrum::MultifractalSpectrum;
use crate::xcorr::aic_series;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Moment grid `min, min + step, ..., max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QGrid {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl Default for QGrid {
    fn default() -> Self {
        Self {
            min: -2.0,
            max: 4.0,
            step: 0.25,
        }
    }
}

impl QGrid {
    pub fn values<T: Scalar>(&self) -> Result<Vec<T>> {
        if !(self.min.is_finite() && self.max.is_finite() && self.step.is_finite()) {
            return Err(Error::InvalidQGrid("non-finite bound".into()));
        }
        if !(self.step > 0.0) {
            return Err(Error::InvalidQGrid(format!("step must be positive, got {}", self.step)));
        }
        if self.max < self.min {
            return Err(Error::InvalidQGrid(format!("max {} below min {}", self.max, self.min)));
        }
        let span = (self.max - self.min) / self.step;
        let n = (span + 1e-9).floor() as usize + 1;
        if n > 10_000 {
            return Err(Error::InvalidQGrid(format!("{n} moments requested")));
        }
        Ok((0..n)
            .map(|i| {
                let q = self.min + self.step * i as f64;
                // land exactly on zero so the logarithmic average is used there
                T::lit(if q.abs() < 1e-9 * self.step { 0.0 } else { q })
            })
            .collect())
    }
}

impl FromStr for QGrid {
    type Err = Error;

    /// Parses `MIN:MAX:STEP`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || Error::InvalidQGrid(format!("expected MIN:MAX:STEP, got {s:?}"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let num = |p: &str| p.trim().parse::<f64>().map_err(|_| bad());
        let grid = Self {
            min: num(parts[0])?,
            max: num(parts[1])?,
            step: num(parts[2])?,
        };
        grid.values::<f64>()?;
        Ok(grid)
    }
}

/// Explicit log-spaced scale grid `MIN:MAX:COUNT`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScaleSpec {
    pub min: usize,
    pub max: usize,
    pub count: usize,
}

impl ScaleSpec {
    pub fn grid(&self) -> Result<ScaleGrid> {
        ScaleGrid::log_spaced(self.min, self.max, self.count)
    }
}

impl FromStr for ScaleSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || Error::InvalidScaleGrid(format!("expected MIN:MAX:COUNT, got {s:?}"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let num = |p: &str| p.trim().parse::<usize>().map_err(|_| bad());
        let spec = Self {
            min: num(parts[0])?,
            max: num(parts[1])?,
            count: num(parts[2])?,
        };
        spec.grid()?;
        Ok(spec)
    }
}

/// Parses an inclusive `MIN:MAX` scale range.
pub fn parse_range(s: &str) -> Result<(usize, usize)> {
    let bad = || Error::Config(format!("expected MIN:MAX, got {s:?}"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    let lo = a.trim().parse::<usize>().map_err(|_| bad())?;
    let hi = b.trim().parse::<usize>().map_err(|_| bad())?;
    if hi < lo {
        return Err(bad());
    }
    Ok((lo, hi))
}

/// Resolves the scale grid for a series of length `len`.
pub fn resolve_grid(scales: Option<ScaleSpec>, len: usize, detrend_order: usize) -> Result<ScaleGrid> {
    let grid = match scales {
        Some(spec) => spec.grid()?,
        None => ScaleGrid::default_for(len, detrend_order)?,
    };
    grid.check(len, detrend_order)?;
    Ok(grid)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub intervals: Vec<usize>,
    pub stride: usize,
    pub symbols: Option<Vec<String>>,
    pub scales: Option<ScaleSpec>,
    pub q: QGrid,
    pub dfa: DfaOptions,
    pub fit_range: Option<(usize, usize)>,
    pub regime_tolerance: f64,
    pub missing: MissingPolicy,
    pub seed: Option<u64>,
    pub fractal_dim: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            intervals: vec![1],
            stride: 1,
            symbols: None,
            scales: None,
            q: QGrid::default(),
            dfa: DfaOptions::default(),
            fit_range: None,
            regime_tolerance: crate::scaling::DEFAULT_REGIME_TOLERANCE,
            missing: MissingPolicy::Strict,
            seed: None,
            fractal_dim: 1.0,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.intervals.is_empty() || self.intervals.contains(&0) {
            return Err(Error::Config("intervals must be positive".into()));
        }
        if self.stride == 0 {
            return Err(Error::InvalidStride);
        }
        let q: Vec<f64> = self.q.values()?;
        if q.len() < 3 {
            return Err(Error::InvalidQGrid(format!(
                "{} moments; the spectrum needs at least 3",
                q.len()
            )));
        }
        if !(self.regime_tolerance >= 0.0) {
            return Err(Error::Config("regime tolerance must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DfaSummary<T> {
    pub fit: PowerLawFit<T>,
    pub regime: Regime,
}

/// Everything computed for one return interval.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntervalReport<T> {
    pub version: &'static str,
    /// Wall-clock creation time; the only field allowed to differ between identical runs.
    pub generated_at_unix: Option<u64>,
    pub config: PipelineConfig,
    pub interval: usize,
    pub n_returns: usize,
    pub n_stocks: usize,
    pub fluctuation: FluctuationFunction<T>,
    pub dfa: DfaSummary<T>,
    pub crossover: Option<CrossoverFit<T>>,
    pub spectrum: MultifractalSpectrum<T>,
    /// Always `"grid-bounded"`: the width is taken over the evaluated moments only.
    pub delta_alpha_basis: &'static str,
}

/// Runs returns, AIC, MF-DFA, power-law fits and the spectrum for one interval.
pub fn run_interval<T: Scalar>(
    panel: &PricePanel<T>,
    interval: usize,
    config: &PipelineConfig,
) -> Result<IntervalReport<T>, StageError> {
    let returns = ReturnPanel::from_prices(panel, interval, config.stride).at("returns")?;
    let aic = aic_series(&returns, config.symbols.as_deref()).at("xcorr")?;
    analyze_series(&aic.values, aic.n_stocks(), interval, config)
}

/// Fluctuation, fit and spectrum stages on an already built series.
pub fn analyze_series<T: Scalar>(
    series: &[T],
    n_stocks: usize,
    interval: usize,
    config: &PipelineConfig,
) -> Result<IntervalReport<T>, StageError> {
    config.validate().at("config")?;
    let grid = resolve_grid(config.scales, series.len(), config.dfa.detrend_order).at("fluctuation")?;
    let mut q: Vec<T> = config.q.values().at("config")?;
    let two = T::lit(2.0);
    if !q.contains(&two) {
        let at = q.partition_point(|&v| v < two);
        q.insert(at, two);
    }
    let fluct = mfdfa(series, &grid, &q, &config.dfa).at("fluctuation")?;
    let fit = fit_power_law(&fluct, two, config.fit_range).at("scaling")?;
    let regime = classify_regime(fit.exponent, T::lit(config.regime_tolerance)).at("scaling")?;
    let crossover = if fluct.scales.len() >= 7 {
        Some(fit_crossover(&fluct, two).at("scaling")?)
    } else {
        None
    };
    let spectrum =
        MultifractalSpectrum::from_fluctuation(&fluct, config.fit_range, T::lit(config.fractal_dim)).at("spectrum")?;
    Ok(IntervalReport {
        version: VERSION,
        generated_at_unix: None,
        config: config.clone(),
        interval,
        n_returns: series.len(),
        n_stocks,
        fluctuation: fluct,
        dfa: DfaSummary { fit, regime },
        crossover,
        spectrum,
        delta_alpha_basis: "grid-bounded",
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q_grid_parsing() {
        let g: QGrid = "-2:4:0.25".parse().unwrap();
        let v: Vec<f64> = g.values().unwrap();
        assert_eq!(v.len(), 25);
        assert_eq!(v[8], 0.0);
        assert_eq!(v[16], 2.0);
        assert_eq!(*v.last().unwrap(), 4.0);
        assert!(matches!("-2:4:0".parse::<QGrid>(), Err(Error::InvalidQGrid(_))));
        assert!("-2:4".parse::<QGrid>().is_err());
        assert!("4:-2:1".parse::<QGrid>().is_err());
        let odd: Vec<f64> = QGrid {
            min: -1.0,
            max: 1.0,
            step: 0.1,
        }
        .values()
        .unwrap();
        assert_eq!(odd.len(), 21);
        assert_eq!(odd[10], 0.0);
    }

    #[test]
    fn scale_and_range_parsing() {
        let s: ScaleSpec = "4:100:10".parse().unwrap();
        assert_eq!(s.grid().unwrap().scales()[0], 4);
        assert!("4:100".parse::<ScaleSpec>().is_err());
        assert!("0:100:3".parse::<ScaleSpec>().is_err());
        assert_eq!(parse_range("35:100").unwrap(), (35, 100));
        assert!(parse_range("100:35").is_err());
    }

    #[test]
    fn q2_is_always_present() {
        let series = crate::synth::white_noise::<f64>(&crate::synth::GeneratorSpec::white(1024, 2)).unwrap();
        let cfg = PipelineConfig {
            q: QGrid {
                min: -1.0,
                max: 3.0,
                step: 1.25,
            },
            ..Default::default()
        };
        let report = analyze_series(&series, 2, 1, &cfg).unwrap();
        assert!(report.fluctuation.q_index(2.0).is_ok());
        assert_eq!(report.spectrum.q_values, vec![-1.0, 0.25, 1.5, 2.0, 2.75]);
    }
}
