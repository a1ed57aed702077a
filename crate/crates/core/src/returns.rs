//! Log-returns over an interval and their per-symbol standardization.

use crate::error::{Error, Result};
use crate::ingest::PricePanel;
use crate::scalar::{mean, Scalar};

/// Raw and normalized log-returns of every symbol, stored column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnPanel<T> {
    interval: usize,
    stride: usize,
    symbols: Vec<String>,
    returns: Vec<Vec<T>>,
    normalized: Vec<Vec<T>>,
}

impl<T: Scalar> ReturnPanel<T> {
    /// Computes raw log-returns from `panel` and standardizes each column.
    pub fn from_prices(panel: &PricePanel<T>, interval: usize, stride: usize) -> Result<Self> {
        let returns = log_returns(panel, interval, stride)?;
        Self::from_raw(panel.symbols().to_vec(), returns, interval, stride)
    }

    /// Builds a panel from precomputed raw return columns.
    pub fn from_raw(symbols: Vec<String>, returns: Vec<Vec<T>>, interval: usize, stride: usize) -> Result<Self> {
        if symbols.len() != returns.len() {
            return Err(Error::Config(format!(
                "{} symbols but {} return columns",
                symbols.len(),
                returns.len()
            )));
        }
        let len = returns.first().map_or(0, Vec::len);
        if returns.iter().any(|c| c.len() != len) {
            return Err(Error::Config("return columns differ in length".into()));
        }
        let normalized = returns
            .iter()
            .zip(&symbols)
            .map(|(col, sym)| normalize(col).map_err(|e| name_symbol(e, sym)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            interval,
            stride,
            symbols,
            returns,
            normalized,
        })
    }

    pub fn interval(&self) -> usize {
        self.interval
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    /// Number of return observations per symbol.
    pub fn len(&self) -> usize {
        self.returns.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn symbol_index(&self, symbol: &str) -> Result<usize> {
        self.symbols
            .iter()
            .position(|s| s == symbol)
            .ok_or_else(|| Error::UnknownSymbol(symbol.to_string()))
    }

    pub fn raw(&self, symbol: usize) -> &[T] {
        &self.returns[symbol]
    }

    pub fn normalized(&self, symbol: usize) -> &[T] {
        &self.normalized[symbol]
    }

    pub fn normalized_columns(&self) -> &[Vec<T>] {
        &self.normalized
    }
}

fn name_symbol(e: Error, symbol: &str) -> Error {
    match e {
        Error::ZeroVariance(_) => Error::ZeroVariance(symbol.to_string()),
        other => other,
    }
}

/// Number of returns produced from `n_dates` prices.
pub fn return_count(n_dates: usize, interval: usize, stride: usize) -> usize {
    if interval >= n_dates || stride == 0 {
        return 0;
    }
    (n_dates - interval - 1) / stride + 1
}

/// `ln y(k*stride + interval) - ln y(k*stride)` for every symbol and valid `k`.
pub fn log_returns<T: Scalar>(panel: &PricePanel<T>, interval: usize, stride: usize) -> Result<Vec<Vec<T>>> {
    let n = panel.n_dates();
    if stride == 0 {
        return Err(Error::InvalidStride);
    }
    if interval == 0 || interval >= n {
        return Err(Error::IntervalOutOfRange { interval, n_dates: n });
    }
    let len = return_count(n, interval, stride);
    Ok(panel
        .columns()
        .iter()
        .map(|col| {
            let logs: Vec<T> = col.iter().map(|p| p.ln()).collect();
            (0..len)
                .map(|k| {
                    let start = k * stride;
                    logs[start + interval] - logs[start]
                })
                .collect()
        })
        .collect())
}

/// Standardizes a column to zero mean and unit population standard deviation.
pub fn normalize<T: Scalar>(raw: &[T]) -> Result<Vec<T>> {
    let m = mean(raw).ok_or(Error::Empty("return column"))?;
    let var = raw.iter().map(|&r| (r - m) * (r - m)).sum::<T>() / T::from_count(raw.len());
    let sigma = var.sqrt();
    // relative threshold so that rounding noise on a constant column is still caught
    let scale = raw.iter().fold(T::zero(), |acc, r| acc.max(r.abs()));
    if !(sigma > scale * T::epsilon() * T::lit(16.0)) || !sigma.is_finite() {
        return Err(Error::ZeroVariance(String::new()));
    }
    Ok(raw.iter().map(|&r| (r - m) / sigma).collect())
}
