//! Detrended fluctuation analysis and its multifractal generalization.
//!
//! A series is integrated into a profile, the profile is cut into
//! non-overlapping windows of size `t`, and a least-squares polynomial is
//! removed from each window. The root-mean-square residual of window `k` is
//! `f_k(t)`; the fluctuation function `F_q(t)` is the order-`q` generalized mean
//! of the `f_k(t)`, with the geometric mean at `q = 0`.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{mean, Scalar};

/// Replacement for `f_k = 0` under [`ZeroPolicy::Floor`].
pub const ZERO_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    /// Windows laid from the start of the profile; a short tail is discarded.
    #[default]
    Forward,
    /// Forward windows followed by windows laid from the end.
    Bidirectional,
}

impl FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "forward" => Ok(Self::Forward),
            "bidirectional" => Ok(Self::Bidirectional),
            other => Err(Error::Config(format!("unknown direction {other:?}"))),
        }
    }
}

/// Handling of zero window fluctuations when `q <= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ZeroPolicy {
    #[default]
    Error,
    /// Replace zeros with [`ZERO_FLOOR`] and count the replacements.
    Floor,
}

impl FromStr for ZeroPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "error" => Ok(Self::Error),
            "floor" => Ok(Self::Floor),
            other => Err(Error::Config(format!("unknown zero policy {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DfaOptions {
    pub detrend_order: usize,
    pub direction: Direction,
    pub subtract_mean: bool,
    pub zero_policy: ZeroPolicy,
}

impl Default for DfaOptions {
    fn default() -> Self {
        Self {
            detrend_order: 1,
            direction: Direction::Forward,
            subtract_mean: true,
            zero_policy: ZeroPolicy::Error,
        }
    }
}

/// Cumulative sum of a series.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile<T> {
    values: Vec<T>,
}

impl<T> Profile<T> {
    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// `B(t) = sum_{s <= t} (A(s) - m)`, with `m` the series mean when `subtract_mean`.
pub fn profile<T: Scalar>(series: &[T], subtract_mean: bool) -> Result<Profile<T>> {
    if series.is_empty() {
        return Err(Error::Empty("series"));
    }
    if series.len() < 2 {
        return Err(Error::SeriesTooShort {
            len: series.len(),
            min: 2,
        });
    }
    if let Some(bad) = series.iter().find(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("series value {bad}")));
    }
    let m = if subtract_mean {
        mean(series).unwrap_or_else(T::zero)
    } else {
        T::zero()
    };
    let mut acc = T::zero();
    let values = series
        .iter()
        .map(|&a| {
            acc = acc + (a - m);
            acc
        })
        .collect();
    Ok(Profile { values })
}

/// Strictly increasing window sizes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScaleGrid {
    scales: Vec<usize>,
}

impl ScaleGrid {
    pub fn new(scales: Vec<usize>) -> Result<Self> {
        if scales.is_empty() {
            return Err(Error::InvalidScaleGrid("no scales".into()));
        }
        if scales.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidScaleGrid("scales must be strictly increasing".into()));
        }
        if scales[0] == 0 {
            return Err(Error::InvalidScaleGrid("scale 0".into()));
        }
        Ok(Self { scales })
    }

    /// `count` logarithmically spaced integer scales in `[min, max]`, deduplicated after rounding.
    pub fn log_spaced(min: usize, max: usize, count: usize) -> Result<Self> {
        if min == 0 || max < min || count == 0 {
            return Err(Error::InvalidScaleGrid(format!("min {min}, max {max}, count {count}")));
        }
        if count == 1 || min == max {
            return Self::new(vec![min]);
        }
        let (lo, hi) = ((min as f64).ln(), (max as f64).ln());
        let step = (hi - lo) / (count - 1) as f64;
        let mut scales: Vec<usize> = (0..count)
            .map(|i| ((lo + step * i as f64).exp().round() as usize).clamp(min, max))
            .collect();
        scales.dedup();
        Self::new(scales)
    }

    /// Twenty log-spaced scales between `max(4, order + 2)` and `len / 4`.
    pub fn default_for(len: usize, detrend_order: usize) -> Result<Self> {
        let min = (detrend_order + 2).max(4);
        let max = len / 4;
        if max < min {
            return Err(Error::SeriesTooShort { len, min: 4 * min });
        }
        Self::log_spaced(min, max, 20)
    }

    pub fn scales(&self) -> &[usize] {
        &self.scales
    }

    pub fn len(&self) -> usize {
        self.scales.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scales.is_empty()
    }

    /// Keeps only scales inside `[min, max]`.
    pub fn restrict(&self, min: usize, max: usize) -> Result<Self> {
        Self::new(self.scales.iter().copied().filter(|&s| s >= min && s <= max).collect())
    }

    /// Checks every scale against a series length and detrending order.
    pub fn check(&self, len: usize, detrend_order: usize) -> Result<()> {
        let (min, max) = scale_bounds(len, detrend_order);
        match self.scales.iter().find(|&&s| s < min || s > max) {
            Some(&scale) => Err(Error::ScaleOutOfRange { scale, min, max }),
            None => Ok(()),
        }
    }
}

fn scale_bounds(len: usize, detrend_order: usize) -> (usize, usize) {
    (detrend_order + 2, len / 4)
}

/// Number of windows used at scale `t`.
pub fn window_count(len: usize, t: usize, direction: Direction) -> usize {
    match direction {
        Direction::Forward => len / t,
        Direction::Bidirectional => 2 * (len / t),
    }
}

/// RMS residual `f_k(t)` of every window after removing a degree-`detrend_order` fit.
pub fn window_fluctuations<T: Scalar>(
    profile: &Profile<T>,
    t: usize,
    detrend_order: usize,
    direction: Direction,
) -> Result<Vec<T>> {
    let len = profile.len();
    let (min, max) = scale_bounds(len, detrend_order);
    if t < min || t > max {
        return Err(Error::ScaleOutOfRange { scale: t, min, max });
    }
    let detrender = Detrender::new(t, detrend_order);
    let b = profile.values();
    let n = len / t;
    let mut out = Vec::with_capacity(window_count(len, t, direction));
    out.extend((0..n).map(|k| detrender.rms_residual(&b[k * t..(k + 1) * t])));
    if direction == Direction::Bidirectional {
        out.extend((0..n).map(|k| {
            let start = len - (k + 1) * t;
            detrender.rms_residual(&b[start..start + t])
        }));
    }
    Ok(out)
}

/// Fluctuation magnitudes `F_q(t)` for a set of moments and scales.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FluctuationFunction<T> {
    pub scales: Vec<usize>,
    pub q_values: Vec<T>,
    /// Indexed `[q][scale]`.
    pub values: Vec<Vec<T>>,
    pub n_windows: Vec<usize>,
    pub direction: Direction,
    /// Zero window fluctuations replaced under [`ZeroPolicy::Floor`].
    pub floored_windows: usize,
}

impl<T: Scalar> FluctuationFunction<T> {
    /// Row index of moment `q`, matched within a small absolute tolerance.
    pub fn q_index(&self, q: T) -> Result<usize> {
        let tol = T::lit(1e-9);
        self.q_values
            .iter()
            .position(|&v| (v - q).abs() <= tol)
            .ok_or_else(|| Error::UnknownMoment(q.to_f64_lossy()))
    }

    pub fn row(&self, q: T) -> Result<&[T]> {
        Ok(&self.values[self.q_index(q)?])
    }
}

/// Standard DFA: `F_2(t)^2` is the mean of `f_k(t)^2`.
pub fn dfa<T: Scalar>(series: &[T], grid: &ScaleGrid, opts: &DfaOptions) -> Result<FluctuationFunction<T>> {
    let prof = profile(series, opts.subtract_mean)?;
    grid.check(prof.len(), opts.detrend_order)?;
    let mut row = Vec::with_capacity(grid.len());
    let mut n_windows = Vec::with_capacity(grid.len());
    for &t in grid.scales() {
        let f = window_fluctuations(&prof, t, opts.detrend_order, opts.direction)?;
        n_windows.push(f.len());
        row.push(rms(&f));
    }
    Ok(FluctuationFunction {
        scales: grid.scales().to_vec(),
        q_values: vec![T::lit(2.0)],
        values: vec![row],
        n_windows,
        direction: opts.direction,
        floored_windows: 0,
    })
}

/// Multifractal DFA over the moments in `q_values`.
pub fn mfdfa<T: Scalar>(
    series: &[T],
    grid: &ScaleGrid,
    q_values: &[T],
    opts: &DfaOptions,
) -> Result<FluctuationFunction<T>> {
    if q_values.is_empty() {
        return Err(Error::InvalidQGrid("no moments".into()));
    }
    if let Some(q) = q_values.iter().find(|q| !q.is_finite()) {
        return Err(Error::InvalidQGrid(format!("non-finite moment {q}")));
    }
    let prof = profile(series, opts.subtract_mean)?;
    grid.check(prof.len(), opts.detrend_order)?;

    let mut values = vec![Vec::with_capacity(grid.len()); q_values.len()];
    let mut n_windows = Vec::with_capacity(grid.len());
    let mut floored = 0usize;
    for &t in grid.scales() {
        let f = window_fluctuations(&prof, t, opts.detrend_order, opts.direction)?;
        n_windows.push(f.len());
        let zeros = f.iter().filter(|v| **v == T::zero()).count();
        let mut floored_f: Option<Vec<T>> = None;
        for (row, &q) in values.iter_mut().zip(q_values) {
            if zeros > 0 && q <= T::zero() {
                match opts.zero_policy {
                    ZeroPolicy::Error => {
                        return Err(Error::ZeroFluctuation {
                            scale: t,
                            q: q.to_f64_lossy(),
                        })
                    }
                    ZeroPolicy::Floor => {
                        let ff = floored_f.get_or_insert_with(|| {
                            floored += zeros;
                            let floor = T::lit(ZERO_FLOOR);
                            f.iter().map(|&v| if v == T::zero() { floor } else { v }).collect()
                        });
                        row.push(generalized_mean(ff, q));
                        continue;
                    }
                }
            }
            row.push(generalized_mean(&f, q));
        }
    }
    Ok(FluctuationFunction {
        scales: grid.scales().to_vec(),
        q_values: q_values.to_vec(),
        values,
        n_windows,
        direction: opts.direction,
        floored_windows: floored,
    })
}

fn rms<T: Scalar>(f: &[T]) -> T {
    (f.iter().map(|&v| v * v).sum::<T>() / T::from_count(f.len())).sqrt()
}

/// Order-`q` generalized mean of non-negative values; geometric mean at `q = 0`.
///
/// Values are rescaled by the extreme that keeps every power bounded by one
/// (the maximum for `q > 0`, the minimum for `q < 0`). `q = 2` shares the DFA path.
fn generalized_mean<T: Scalar>(f: &[T], q: T) -> T {
    let n = T::from_count(f.len());
    if q == T::lit(2.0) {
        return rms(f);
    }
    if q == T::zero() {
        return (f.iter().map(|v| v.ln()).sum::<T>() / n).exp();
    }
    let pivot = if q > T::zero() {
        f.iter().fold(T::zero(), |a, &b| a.max(b))
    } else {
        f.iter().fold(T::infinity(), |a, &b| a.min(b))
    };
    if pivot == T::zero() {
        return T::zero();
    }
    let m = f.iter().map(|&v| (v / pivot).powf(q)).sum::<T>() / n;
    pivot * m.powf(q.recip())
}

/// Least-squares polynomial removal on windows of a fixed size.
enum Detrender<T> {
    Mean { t: usize },
    Line { t: usize, center: T, sxx: T },
    Poly(PolyFit<T>),
}

impl<T: Scalar> Detrender<T> {
    fn new(t: usize, order: usize) -> Self {
        let tf = T::from_count(t);
        match order {
            0 => Detrender::Mean { t },
            1 => Detrender::Line {
                t,
                center: (tf - T::one()) / T::lit(2.0),
                sxx: tf * (tf * tf - T::one()) / T::lit(12.0),
            },
            _ => Detrender::Poly(PolyFit::new(t, order)),
        }
    }

    fn rms_residual(&self, y: &[T]) -> T {
        match self {
            Detrender::Mean { t } => {
                let m = y.iter().copied().sum::<T>() / T::from_count(*t);
                let ss: T = y.iter().map(|&v| (v - m) * (v - m)).sum();
                (ss / T::from_count(*t)).sqrt()
            }
            Detrender::Line { t, center, sxx } => {
                let tf = T::from_count(*t);
                let ybar = y.iter().copied().sum::<T>() / tf;
                let sxy: T = y
                    .iter()
                    .enumerate()
                    .map(|(i, &v)| (T::from_count(i) - *center) * (v - ybar))
                    .sum();
                let slope = sxy / *sxx;
                let ss: T = y
                    .iter()
                    .enumerate()
                    .map(|(i, &v)| {
                        let r = v - ybar - slope * (T::from_count(i) - *center);
                        r * r
                    })
                    .sum();
                (ss / tf).sqrt()
            }
            Detrender::Poly(p) => p.rms_residual(y),
        }
    }
}

/// Householder QR of the window design matrix, factored once per scale.
struct PolyFit<T> {
    t: usize,
    cols: usize,
    /// Householder vectors, column-major, `cols` vectors of length `t`.
    reflectors: Vec<Vec<T>>,
}

impl<T: Scalar> PolyFit<T> {
    fn new(t: usize, order: usize) -> Self {
        let cols = order + 1;
        // abscissae mapped onto [-1, 1] to keep the Vandermonde columns well scaled
        let half = T::from_count(t - 1) / T::lit(2.0);
        let x: Vec<T> = (0..t).map(|i| (T::from_count(i) - half) / half).collect();
        let mut a: Vec<Vec<T>> = (0..cols)
            .map(|p| x.iter().map(|&xi| xi.powi(p as i32)).collect())
            .collect();
        let mut reflectors = Vec::with_capacity(cols);
        for j in 0..cols {
            let norm = a[j][j..].iter().map(|&v| v * v).sum::<T>().sqrt();
            let alpha = if a[j][j] > T::zero() { -norm } else { norm };
            let mut v = vec![T::zero(); t];
            v[j..].copy_from_slice(&a[j][j..]);
            v[j] = v[j] - alpha;
            let vnorm = v.iter().map(|&e| e * e).sum::<T>().sqrt();
            if vnorm > T::zero() {
                v.iter_mut().for_each(|e| *e = *e / vnorm);
            }
            for col in a.iter_mut().skip(j) {
                reflect(&v, col, j);
            }
            reflectors.push(v);
        }
        Self { t, cols, reflectors }
    }

    fn rms_residual(&self, y: &[T]) -> T {
        let mut z = y.to_vec();
        for (j, v) in self.reflectors.iter().enumerate() {
            reflect(v, &mut z, j);
        }
        // Q^T y: the first `cols` entries are fitted, the rest is the residual
        let ss: T = z[self.cols..].iter().map(|&r| r * r).sum();
        (ss / T::from_count(self.t)).sqrt()
    }
}

fn reflect<T: Scalar>(v: &[T], x: &mut [T], from: usize) {
    let dot: T = v[from..].iter().zip(&x[from..]).map(|(&a, &b)| a * b).sum();
    let two_dot = dot + dot;
    for (xi, &vi) in x[from..].iter_mut().zip(&v[from..]) {
        *xi = *xi - two_dot * vi;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_examples() {
        assert_eq!(profile(&[1.0, 1.0, 1.0], false).unwrap().values(), &[1.0, 2.0, 3.0]);
        assert_eq!(profile(&[1.0, -1.0, 1.0], false).unwrap().values(), &[1.0, 0.0, 1.0]);
        assert_eq!(profile(&[1.0, 1.0, 1.0], true).unwrap().values(), &[0.0, 0.0, 0.0]);
        assert!(matches!(profile::<f64>(&[], true), Err(Error::Empty(_))));
    }

    #[test]
    fn linear_windows_have_zero_fluctuation() {
        let p = Profile {
            values: (0..64).map(|i| 3.0 - 0.25 * i as f64).collect::<Vec<_>>(),
        };
        for order in 1..4 {
            for f in window_fluctuations(&p, 8, order, Direction::Bidirectional).unwrap() {
                assert!(f.abs() < 1e-12, "order {order}: {f}");
            }
        }
    }

    #[test]
    fn four_point_profile_against_hand_fit() {
        // y = [1, 2, 4, 8] on x = [1, 2, 3, 4]: normal equations give
        // slope = (4*49 - 10*15)/(4*30 - 100) = 2.3 and intercept = (15 - 2.3*10)/4 = -2
        // residuals [0.7, -0.6, -0.9, 0.8], mean square 2.3/4
        let p = Profile {
            values: vec![
                1.0, 2.0, 4.0, 8.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
            ],
        };
        let f = window_fluctuations(&p, 4, 1, Direction::Forward).unwrap();
        assert!((f[0] - (2.3f64 / 4.0).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn quadratic_detrend_matches_line_on_order_one_data() {
        let p = Profile {
            values: (0..200)
                .map(|i| ((i * 37 % 11) as f64).sin() + 0.01 * (i * i) as f64)
                .collect::<Vec<_>>(),
        };
        // a quadratic fit can only reduce the residual of a line fit
        let f1 = window_fluctuations(&p, 20, 1, Direction::Forward).unwrap();
        let f2 = window_fluctuations(&p, 20, 2, Direction::Forward).unwrap();
        for (a, b) in f1.iter().zip(&f2) {
            assert!(b <= &(a + 1e-12));
        }
        let f0 = window_fluctuations(&p, 20, 0, Direction::Forward).unwrap();
        for (a, b) in f0.iter().zip(&f1) {
            assert!(b <= &(a + 1e-12));
        }
    }

    #[test]
    fn scale_range_errors() {
        let p = profile(&[0.5; 40], true).unwrap();
        assert!(matches!(
            window_fluctuations(&p, 11, 1, Direction::Forward),
            Err(Error::ScaleOutOfRange { scale: 11, max: 10, .. })
        ));
        assert!(matches!(
            window_fluctuations(&p, 3, 2, Direction::Forward),
            Err(Error::ScaleOutOfRange { scale: 3, min: 4, .. })
        ));
    }

    #[test]
    fn window_counts() {
        let series: Vec<f64> = (0..103).map(|i| (i as f64 * 0.7).sin()).collect();
        let grid = ScaleGrid::new(vec![4, 7, 10, 25]).unwrap();
        for dir in [Direction::Forward, Direction::Bidirectional] {
            let opts = DfaOptions {
                direction: dir,
                ..Default::default()
            };
            let ff = dfa(&series, &grid, &opts).unwrap();
            let expect: Vec<usize> = grid.scales().iter().map(|&t| window_count(103, t, dir)).collect();
            assert_eq!(ff.n_windows, expect);
        }
    }

    #[test]
    fn constant_series_is_flat_zero() {
        let grid = ScaleGrid::new(vec![4, 8, 16]).unwrap();
        let ff = dfa(&[2.5f64; 100], &grid, &DfaOptions::default()).unwrap();
        assert!(ff.values[0].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn equal_windows_give_same_mean_for_all_q() {
        let f = [0.37f64; 9];
        for q in [-4.0, -1.0, 0.0, 0.5, 2.0, 3.0] {
            assert!((generalized_mean(&f, q) - 0.37).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_policy() {
        let grid = ScaleGrid::new(vec![4, 8]).unwrap();
        let series = vec![1.0f64; 64];
        let err = mfdfa(&series, &grid, &[-1.0, 2.0], &DfaOptions::default()).unwrap_err();
        assert!(matches!(err, Error::ZeroFluctuation { .. }));
        let opts = DfaOptions {
            zero_policy: ZeroPolicy::Floor,
            ..Default::default()
        };
        let ff = mfdfa(&series, &grid, &[-1.0, 0.0, 2.0], &opts).unwrap();
        assert_eq!(ff.floored_windows, 16 + 8);
        assert!((ff.values[0][0] - ZERO_FLOOR).abs() < 1e-24);
        assert_eq!(ff.values[2][0], 0.0);
        // q > 0 alone never trips the policy
        assert!(mfdfa(&series, &grid, &[1.0, 2.0], &DfaOptions::default()).is_ok());
    }

    #[test]
    fn log_spaced_grid() {
        let g = ScaleGrid::log_spaced(4, 1024, 20).unwrap();
        assert_eq!(g.scales()[0], 4);
        assert_eq!(*g.scales().last().unwrap(), 1024);
        assert!(g.scales().windows(2).all(|w| w[0] < w[1]));
        let g = ScaleGrid::log_spaced(4, 8, 20).unwrap();
        assert_eq!(g.scales(), &[4, 5, 6, 7, 8]);
        assert!(ScaleGrid::new(vec![4, 4]).is_err());
        assert_eq!(ScaleGrid::default_for(4096, 1).unwrap().len(), 20);
        assert!(ScaleGrid::default_for(12, 1).is_err());
    }
}
