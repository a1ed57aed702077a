//! Loading wide price CSVs into a rectangular [`PricePanel`].
//!
//! The input has a header whose first cell is literally `date`, followed by one
//! column per symbol. Dates are ISO-8601 (`YYYY-MM-DD`); a blank cell is a
//! missing price.

use std::collections::HashSet;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{io_err, Error, Result};
use crate::scalar::Scalar;

/// What to do with dates that have a missing or unusable price.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MissingPolicy {
    /// Any missing or non-positive cell is an error.
    #[default]
    Strict,
    /// Drop every date with a missing or non-positive cell.
    DropRows,
}

impl FromStr for MissingPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strict" => Ok(Self::Strict),
            "drop-rows" => Ok(Self::DropRows),
            other => Err(Error::Config(format!("unknown missing-data policy {other:?}"))),
        }
    }
}

/// Date x symbol matrix of strictly positive prices, stored column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PricePanel<T> {
    dates: Vec<NaiveDate>,
    symbols: Vec<String>,
    columns: Vec<Vec<T>>,
}

impl<T: Scalar> PricePanel<T> {
    /// Builds a panel from per-symbol price columns, checking every invariant.
    pub fn new(dates: Vec<NaiveDate>, symbols: Vec<String>, columns: Vec<Vec<T>>) -> Result<Self> {
        if dates.len() < 2 || symbols.is_empty() {
            return Err(Error::PanelTooSmall {
                dates: dates.len(),
                symbols: symbols.len(),
            });
        }
        if columns.len() != symbols.len() {
            return Err(Error::Config(format!(
                "{} symbols but {} price columns",
                symbols.len(),
                columns.len()
            )));
        }
        let mut seen = HashSet::new();
        for s in &symbols {
            if !seen.insert(s.as_str()) {
                return Err(Error::DuplicateSymbol(s.clone()));
            }
        }
        for (i, w) in dates.windows(2).enumerate() {
            if w[1] <= w[0] {
                return Err(Error::UnorderedDates { line: i as u64 + 3 });
            }
        }
        for (sym, col) in symbols.iter().zip(&columns) {
            if col.len() != dates.len() {
                return Err(Error::Config(format!(
                    "column {sym} has {} prices for {} dates",
                    col.len(),
                    dates.len()
                )));
            }
            if let Some((i, p)) = col
                .iter()
                .enumerate()
                .find(|(_, p)| !(**p > T::zero()) || !p.is_finite())
            {
                return Err(Error::NonPositivePrice {
                    line: i as u64 + 2,
                    symbol: sym.clone(),
                    value: p.to_string(),
                });
            }
        }
        Ok(Self {
            dates,
            symbols,
            columns,
        })
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn n_dates(&self) -> usize {
        self.dates.len()
    }

    pub fn n_symbols(&self) -> usize {
        self.symbols.len()
    }

    /// Price series of one symbol, in date order.
    pub fn column(&self, symbol: usize) -> &[T] {
        &self.columns[symbol]
    }

    pub fn columns(&self) -> &[Vec<T>] {
        &self.columns
    }

    pub fn price(&self, date: usize, symbol: usize) -> T {
        self.columns[symbol][date]
    }

    /// Writes the panel in the same wide CSV layout [`load_panel`] reads.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let csv_err = |e: csv::Error| Error::MalformedCsv {
            line: 0,
            msg: e.to_string(),
        };
        let mut header = Vec::with_capacity(self.symbols.len() + 1);
        header.push("date".to_string());
        header.extend(self.symbols.iter().cloned());
        w.write_record(&header).map_err(csv_err)?;
        for (d, date) in self.dates.iter().enumerate() {
            let mut row = Vec::with_capacity(header.len());
            row.push(date.format("%Y-%m-%d").to_string());
            row.extend(self.columns.iter().map(|c| c[d].to_string()));
            w.write_record(&row).map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::Io {
            path: "<writer>".into(),
            source: e,
        })
    }
}

/// Result of [`load_panel`]: the panel plus how many dates were discarded.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedPanel<T> {
    pub panel: PricePanel<T>,
    pub dropped_rows: usize,
}

/// Reads a wide price CSV from `path`.
pub fn load_panel<T: Scalar>(path: &Path, policy: MissingPolicy) -> Result<LoadedPanel<T>> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    read_panel(file, policy)
}

/// Reads a wide price CSV from any reader.
pub fn read_panel<T: Scalar, R: Read>(reader: R, policy: MissingPolicy) -> Result<LoadedPanel<T>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(false)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let mut records = rdr.records();
    let header = match records.next() {
        Some(Ok(h)) => h,
        Some(Err(e)) => return Err(Error::MalformedHeader(e.to_string())),
        None => return Err(Error::MalformedHeader("empty file".into())),
    };
    let first = header.get(0).map(|s| s.trim_start_matches('\u{feff}'));
    if first != Some("date") {
        return Err(Error::MalformedHeader(format!(
            "first header cell must be `date`, found {:?}",
            first.unwrap_or("")
        )));
    }
    let symbols: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    if let Some(blank) = symbols.iter().position(|s| s.is_empty()) {
        return Err(Error::MalformedHeader(format!("blank symbol in column {}", blank + 2)));
    }

    let mut dates = Vec::new();
    let mut columns: Vec<Vec<T>> = vec![Vec::new(); symbols.len()];
    let mut dropped = 0usize;
    let mut row_buf: Vec<T> = Vec::with_capacity(symbols.len());

    for (idx, rec) in records.enumerate() {
        let line = idx as u64 + 2;
        let rec = rec.map_err(|e| Error::MalformedCsv {
            line,
            msg: e.to_string(),
        })?;
        let date_cell = rec.get(0).unwrap_or("");
        let date = NaiveDate::parse_from_str(date_cell, "%Y-%m-%d").map_err(|_| Error::InvalidDate {
            line,
            value: date_cell.to_string(),
        })?;

        row_buf.clear();
        let mut usable = true;
        for (cell, symbol) in rec.iter().skip(1).zip(&symbols) {
            if cell.is_empty() {
                match policy {
                    MissingPolicy::Strict => {
                        return Err(Error::MissingPrice {
                            line,
                            symbol: symbol.clone(),
                        })
                    }
                    MissingPolicy::DropRows => {
                        usable = false;
                        continue;
                    }
                }
            }
            let value: T = cell.parse().map_err(|_| Error::NonNumericPrice {
                line,
                symbol: symbol.clone(),
                value: cell.to_string(),
            })?;
            if !value.is_finite() {
                return Err(Error::NonNumericPrice {
                    line,
                    symbol: symbol.clone(),
                    value: cell.to_string(),
                });
            }
            if value <= T::zero() {
                match policy {
                    MissingPolicy::Strict => {
                        return Err(Error::NonPositivePrice {
                            line,
                            symbol: symbol.clone(),
                            value: cell.to_string(),
                        })
                    }
                    MissingPolicy::DropRows => usable = false,
                }
            }
            row_buf.push(value);
        }

        if let Some(&prev) = dates.last() {
            if date <= prev {
                return Err(Error::UnorderedDates { line });
            }
        }
        if !usable {
            dropped += 1;
            continue;
        }
        dates.push(date);
        for (col, v) in columns.iter_mut().zip(&row_buf) {
            col.push(*v);
        }
    }

    let panel = PricePanel::new(dates, symbols, columns)?;
    Ok(LoadedPanel {
        panel,
        dropped_rows: dropped,
    })
}
