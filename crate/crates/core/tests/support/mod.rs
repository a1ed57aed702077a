//! Independent reference implementations used only by tests.
#![allow(dead_code)]

pub mod schema;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// DFA fluctuation function computed with explicit loops and a line fit
/// solved from the 2x2 normal equations on abscissae `1..=t`.
pub fn naive_fq(series: &[f64], t: usize, q: f64, subtract_mean: bool, bidirectional: bool) -> f64 {
    let n = series.len();
    let mut m = 0.0;
    if subtract_mean {
        for v in series {
            m += v;
        }
        m /= n as f64;
    }
    let mut profile = vec![0.0; n];
    let mut acc = 0.0;
    for i in 0..n {
        acc += series[i] - m;
        profile[i] = acc;
    }
    let nw = n / t;
    let mut starts: Vec<usize> = (0..nw).map(|k| k * t).collect();
    if bidirectional {
        starts.extend((0..nw).map(|k| n - (k + 1) * t));
    }
    let mut f = Vec::new();
    for s in starts {
        let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
        for i in 0..t {
            let x = (i + 1) as f64;
            let y = profile[s + i];
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        let tf = t as f64;
        let det = tf * sxx - sx * sx;
        let slope = (tf * sxy - sx * sy) / det;
        let intercept = (sy * sxx - sx * sxy) / det;
        let mut ss = 0.0;
        for i in 0..t {
            let r = profile[s + i] - intercept - slope * (i + 1) as f64;
            ss += r * r;
        }
        f.push((ss / tf).sqrt());
    }
    let k = f.len() as f64;
    if q == 0.0 {
        (f.iter().map(|v| v.ln()).sum::<f64>() / k).exp()
    } else {
        (f.iter().map(|v| v.powf(q)).sum::<f64>() / k).powf(1.0 / q)
    }
}

/// Explicit double sum over pairs `i < j`.
pub fn naive_aic(columns: &[Vec<f64>], t: usize) -> f64 {
    let n = columns.len();
    let mut sum = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            sum += columns[i][t] * columns[j][t];
        }
    }
    2.0 * sum / (n * (n - 1)) as f64
}

pub fn random_series(seed: u64, len: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect()
}

pub fn random_len(seed: u64, lo: usize, hi: usize) -> usize {
    ChaCha8Rng::seed_from_u64(seed ^ 0xabcdef).random_range(lo..=hi)
}

/// Dyadic scales `2^lo ..= 2^hi`.
pub fn dyadic_scales(lo: u32, hi: u32) -> Vec<usize> {
    (lo..=hi).map(|k| 1usize << k).collect()
}

/// Lag-`k` sample autocovariance around the sample mean.
pub fn autocovariance(x: &[f64], k: usize) -> f64 {
    let n = x.len();
    let m = x.iter().sum::<f64>() / n as f64;
    (0..n - k).map(|i| (x[i] - m) * (x[i + k] - m)).sum::<f64>() / n as f64
}
