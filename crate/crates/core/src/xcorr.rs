//! Instantaneous (IC) and average instantaneous (AIC) cross-correlation series.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::returns::ReturnPanel;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SeriesKind {
    /// Product of two stocks' normalized returns.
    Ic { first: String, second: String },
    /// Pair-averaged product over a set of stocks.
    Aic { n_stocks: usize },
}

/// Scalar series indexed by return time step.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationSeries<T> {
    pub kind: SeriesKind,
    pub values: Vec<T>,
}

impl<T> CorrelationSeries<T> {
    pub fn n_stocks(&self) -> usize {
        match self.kind {
            SeriesKind::Ic { .. } => 2,
            SeriesKind::Aic { n_stocks } => n_stocks,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// `IC_ij(t) = R_i(t) R_j(t)`.
pub fn ic_series<T: Scalar>(panel: &ReturnPanel<T>, i: &str, j: &str) -> Result<CorrelationSeries<T>> {
    let a = panel.symbol_index(i)?;
    let b = panel.symbol_index(j)?;
    if a == b {
        return Err(Error::SameSymbol(i.to_string()));
    }
    Ok(CorrelationSeries {
        kind: SeriesKind::Ic {
            first: i.to_string(),
            second: j.to_string(),
        },
        values: pair_products(panel.normalized(a), panel.normalized(b)),
    })
}

fn pair_products<T: Scalar>(x: &[T], y: &[T]) -> Vec<T> {
    x.iter().zip(y).map(|(&a, &b)| a * b).collect()
}

/// Average of `R_i(t) R_j(t)` over all unordered pairs in `subset` (or the whole panel).
///
/// Uses `(S^2 - Q) / (N(N-1))` with `S = sum R_i` and `Q = sum R_i^2`, which is
/// linear in the number of stocks. A two-stock subset is evaluated as the plain
/// pair product so that it coincides with [`ic_series`] exactly.
pub fn aic_series<T: Scalar>(panel: &ReturnPanel<T>, subset: Option<&[String]>) -> Result<CorrelationSeries<T>> {
    let indices: Vec<usize> = match subset {
        Some(symbols) => symbols.iter().map(|s| panel.symbol_index(s)).collect::<Result<_>>()?,
        None => (0..panel.symbols().len()).collect(),
    };
    let n = indices.len();
    if n < 2 {
        return Err(Error::TooFewSymbols(n));
    }
    for (k, i) in indices.iter().enumerate() {
        if indices[..k].contains(i) {
            return Err(Error::Config(format!("symbol {} listed twice", panel.symbols()[*i])));
        }
    }
    let columns: Vec<&[T]> = indices.iter().map(|&i| panel.normalized(i)).collect();
    let values = if n == 2 {
        pair_products(columns[0], columns[1])
    } else {
        aic_from_columns(&columns)
    };
    Ok(CorrelationSeries {
        kind: SeriesKind::Aic { n_stocks: n },
        values,
    })
}

fn aic_from_columns<T: Scalar>(columns: &[&[T]]) -> Vec<T> {
    let len = columns[0].len();
    let n = T::from_count(columns.len());
    let denom = n * (n - T::one());
    let mut s = vec![T::zero(); len];
    let mut q = vec![T::zero(); len];
    for col in columns {
        for ((s, q), &r) in s.iter_mut().zip(q.iter_mut()).zip(col.iter()) {
            *s = *s + r;
            *q = *q + r * r;
        }
    }
    s.iter().zip(&q).map(|(&s, &q)| (s * s - q) / denom).collect()
}
