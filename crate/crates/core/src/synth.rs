//! Seeded synthetic series with known scaling, used as validation oracles.
//!
//! Randomness comes from ChaCha20 (`rand_chacha::ChaCha20Rng::seed_from_u64`)
//! and standard normals from `rand_distr::StandardNormal` (ziggurat). Both are
//! value-stable across platforms, so a seed pins the output exactly.

use chrono::{Datelike, Days, NaiveDate, Weekday};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::PricePanel;
use crate::scalar::Scalar;

/// Most negative circulant eigenvalue accepted (and clamped to zero) by [`fgn`].
pub const EMBEDDING_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeneratorKind {
    White,
    Fgn,
    Cascade,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    pub length: usize,
    pub hurst: f64,
    pub multiplier: f64,
    pub seed: u64,
    /// Cascade only: flip each split's orientation with a seeded coin.
    pub randomized: bool,
}

impl GeneratorSpec {
    pub fn white(length: usize, seed: u64) -> Self {
        Self {
            kind: GeneratorKind::White,
            length,
            hurst: 0.5,
            multiplier: 0.6,
            seed,
            randomized: false,
        }
    }

    pub fn fgn(length: usize, hurst: f64, seed: u64) -> Self {
        Self {
            kind: GeneratorKind::Fgn,
            hurst,
            ..Self::white(length, seed)
        }
    }

    pub fn cascade(length: usize, multiplier: f64) -> Self {
        Self {
            kind: GeneratorKind::Cascade,
            multiplier,
            ..Self::white(length, 0)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.length < 16 {
            return Err(Error::InvalidGenerator(format!("length {} below 16", self.length)));
        }
        if self.kind != GeneratorKind::White && !self.length.is_power_of_two() {
            return Err(Error::InvalidGenerator(format!(
                "length {} is not a power of two",
                self.length
            )));
        }
        if !(self.hurst > 0.0 && self.hurst < 1.0) {
            return Err(Error::InvalidGenerator(format!("hurst {} outside (0, 1)", self.hurst)));
        }
        if !(self.multiplier > 0.0 && self.multiplier < 1.0) {
            return Err(Error::InvalidGenerator(format!(
                "multiplier {} outside (0, 1)",
                self.multiplier
            )));
        }
        Ok(())
    }

    pub fn generate<T: Scalar>(&self) -> Result<Vec<T>> {
        match self.kind {
            GeneratorKind::White => white_noise(self),
            GeneratorKind::Fgn => fgn(self),
            GeneratorKind::Cascade => binomial_cascade(self),
        }
    }
}

fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

fn normals(rng: &mut ChaCha20Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

fn cast<T: Scalar>(xs: Vec<f64>) -> Vec<T> {
    xs.into_iter().map(T::lit).collect()
}

/// I.i.d. standard normal draws.
pub fn white_noise<T: Scalar>(spec: &GeneratorSpec) -> Result<Vec<T>> {
    spec.validate()?;
    Ok(cast(normals(&mut rng(spec.seed), spec.length)))
}

/// Autocovariance of unit-variance fractional Gaussian noise at lag `k`.
pub fn fgn_autocovariance(k: usize, hurst: f64) -> f64 {
    let k = k as f64;
    let two_h = 2.0 * hurst;
    0.5 * ((k + 1.0).powf(two_h) - 2.0 * k.powf(two_h) + (k - 1.0).abs().powf(two_h))
}

/// Fractional Gaussian noise by circulant embedding of its covariance.
pub fn fgn<T: Scalar>(spec: &GeneratorSpec) -> Result<Vec<T>> {
    spec.validate()?;
    let n = spec.length;
    let m = 2 * n;
    let mut row: Vec<Complex<f64>> = (0..m)
        .map(|j| {
            let lag = if j <= n { j } else { m - j };
            Complex::new(fgn_autocovariance(lag, spec.hurst), 0.0)
        })
        .collect();
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(m);
    fft.process(&mut row);

    let mut eig = Vec::with_capacity(m);
    for c in &row {
        if c.re < -EMBEDDING_TOLERANCE {
            return Err(Error::EmbeddingFailed(c.re));
        }
        eig.push(c.re.max(0.0));
    }

    let mut rng = rng(spec.seed);
    let z = normals(&mut rng, m);
    let mf = m as f64;
    let mut w = vec![Complex::new(0.0, 0.0); m];
    w[0] = Complex::new((eig[0] / mf).sqrt() * z[0], 0.0);
    w[n] = Complex::new((eig[n] / mf).sqrt() * z[1], 0.0);
    for k in 1..n {
        let s = (eig[k] / (2.0 * mf)).sqrt();
        w[k] = Complex::new(s * z[2 * k], s * z[2 * k + 1]);
        w[m - k] = w[k].conj();
    }
    fft.process(&mut w);
    Ok(w[..n].iter().map(|c| T::lit(c.re)).collect())
}

/// Binomial multiplicative cascade of `length = 2^levels` cells with mean one.
///
/// Every cell `x` splits into `(2 a x, 2 (1 - a) x)`; with `randomized` the
/// pair order is drawn from the seeded generator.
pub fn binomial_cascade<T: Scalar>(spec: &GeneratorSpec) -> Result<Vec<T>> {
    spec.validate()?;
    Ok(cast(cascade_cells(
        spec.length,
        spec.multiplier,
        spec.randomized.then_some(spec.seed),
    )))
}

fn cascade_cells(length: usize, a: f64, seed: Option<u64>) -> Vec<f64> {
    let mut rng = seed.map(rng);
    let (left, right) = (2.0 * a, 2.0 * (1.0 - a));
    let mut cells = vec![1.0];
    while cells.len() < length {
        let mut next = Vec::with_capacity(cells.len() * 2);
        for x in cells {
            let flip = rng.as_mut().is_some_and(|r| r.random::<bool>());
            let (l, r) = if flip { (right, left) } else { (left, right) };
            next.push(l * x);
            next.push(r * x);
        }
        cells = next;
    }
    cells
}

/// Closed-form scaling exponents of the binomial cascade at moment `q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CascadeExponents {
    pub h: f64,
    pub tau: f64,
    pub alpha: f64,
}

/// `tau(q) = -log2(a^q + (1-a)^q)`, `h(q) = (tau(q) + 1)/q` and `alpha = tau'(q)`.
///
/// At `q = 0` both numerator and denominator of `h` vanish; the limit is
/// `tau'(0) = -(log2 a + log2 (1-a)) / 2`.
pub fn cascade_analytic(q: f64, a: f64) -> CascadeExponents {
    let b = 1.0 - a;
    let (aq, bq) = (a.powf(q), b.powf(q));
    let tau = -(aq + bq).log2();
    let alpha = -(aq * a.ln() + bq * b.ln()) / ((aq + bq) * std::f64::consts::LN_2);
    let h = if q == 0.0 {
        -(a.log2() + b.log2()) / 2.0
    } else {
        (tau + 1.0) / q
    };
    CascadeExponents { h, tau, alpha }
}

/// Wide price panel whose returns share a market factor with cascade-modulated
/// volatility, giving the average cross-correlation long memory.
pub fn synthetic_panel<T: Scalar>(n_symbols: usize, n_days: usize, seed: u64) -> Result<PricePanel<T>> {
    if n_symbols == 0 || n_days < 2 {
        return Err(Error::InvalidGenerator(format!("panel {n_symbols} x {n_days}")));
    }
    let mut rng = rng(seed);
    let vol = cascade_cells(
        n_days.next_power_of_two().max(2),
        0.65,
        Some(seed ^ 0x9e37_79b9_7f4a_7c15),
    );
    let market: Vec<f64> = vol[..n_days]
        .iter()
        .map(|v| v.sqrt() * rng.sample::<f64, _>(StandardNormal))
        .collect();

    let mut columns = Vec::with_capacity(n_symbols);
    for _ in 0..n_symbols {
        let beta = 0.5 + rng.random::<f64>();
        let mut logp = 100f64.ln();
        let col = market
            .iter()
            .map(|&f| {
                let idio: f64 = rng.sample(StandardNormal);
                logp += 0.01 * (beta * f + idio);
                T::lit(logp.exp())
            })
            .collect();
        columns.push(col);
    }
    let symbols = (0..n_symbols).map(|i| format!("S{i:03}")).collect();
    PricePanel::new(trading_days(n_days), symbols, columns)
}

/// `n` consecutive weekdays from 2000-01-03.
fn trading_days(n: usize) -> Vec<NaiveDate> {
    let mut d = NaiveDate::from_ymd_opt(2000, 1, 3).expect("valid date");
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(d);
        }
        d = d + Days::new(1);
    }
    out
}
