//! Average instantaneous cross-correlation of stock returns and the memory
//! and multifractal analysis of such series.
//!
//! The pipeline runs
//! prices ([`ingest`]) → normalized log-returns ([`returns`]) → IC / AIC series
//! ([`xcorr`]) → DFA and MF-DFA fluctuation functions ([`fluctuation`]) →
//! power-law and crossover fits ([`scaling`]) → `h(q)`, `tau(q)` and the
//! singularity spectrum ([`spectrum`]). [`synth`] provides seeded generators
//! with known scaling for validation.
//!
//! Everything numerical is generic over [`Scalar`] (`f32` or `f64`); the
//! `*F64` / `*F32` aliases below name the common instantiations.

// `!(x > y)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fluctuation;
pub mod ingest;
pub mod pipeline;
pub mod returns;
pub mod scalar;
pub mod scaling;
pub mod spectrum;
pub mod synth;
pub mod xcorr;

pub use error::{AtStage, Error, ErrorClass, Result, StageError};
pub use fluctuation::{
    dfa, mfdfa, profile, window_fluctuations, DfaOptions, Direction, FluctuationFunction, Profile, ScaleGrid,
    ZeroPolicy,
};
pub use ingest::{load_panel, read_panel, LoadedPanel, MissingPolicy, PricePanel};
pub use returns::{log_returns, normalize, ReturnPanel};
pub use scalar::Scalar;
pub use scaling::{classify_regime, fit_crossover, fit_power_law, CrossoverFit, ModelChoice, PowerLawFit, Regime};
pub use spectrum::{hq_curve, legendre, spectrum_width, tau_of_q, MultifractalSpectrum};
pub use synth::{cascade_analytic, GeneratorKind, GeneratorSpec};
pub use xcorr::{aic_series, ic_series, CorrelationSeries, SeriesKind};

pub type PricePanelF64 = PricePanel<f64>;
pub type ReturnPanelF64 = ReturnPanel<f64>;
pub type CorrelationSeriesF64 = CorrelationSeries<f64>;
pub type FluctuationFunctionF64 = FluctuationFunction<f64>;
pub type PowerLawFitF64 = PowerLawFit<f64>;
pub type CrossoverFitF64 = CrossoverFit<f64>;
pub type MultifractalSpectrumF64 = MultifractalSpectrum<f64>;

pub type PricePanelF32 = PricePanel<f32>;
pub type ReturnPanelF32 = ReturnPanel<f32>;
pub type CorrelationSeriesF32 = CorrelationSeries<f32>;
pub type FluctuationFunctionF32 = FluctuationFunction<f32>;
pub type PowerLawFitF32 = PowerLawFit<f32>;
pub type CrossoverFitF32 = CrossoverFit<f32>;
pub type MultifractalSpectrumF32 = MultifractalSpectrum<f32>;
