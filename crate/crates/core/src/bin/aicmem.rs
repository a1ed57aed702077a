//! `aicmem`: AIC series, DFA / MF-DFA, fits and spectra from the command line.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use aic_memory::error::io_err;
use aic_memory::pipeline::{
    self, resolve_grid, run_interval, IntervalReport, PipelineConfig, QGrid, ScaleSpec, VERSION,
};
use aic_memory::synth::{synthetic_panel, GeneratorKind};
use aic_memory::*;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

type CliResult<T = ()> = std::result::Result<T, StageError>;

#[derive(Parser)]
#[command(
    name = "aicmem",
    version,
    about = "Cross-correlation memory and multifractality of stock panels"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load a price panel and report its shape.
    Validate(ValidateArgs),
    /// Write AIC (or pairwise IC) series for each interval.
    Aic(AicArgs),
    /// DFA fluctuation function of a one-column series.
    Dfa(DfaArgs),
    /// MF-DFA fluctuation functions of a one-column series.
    Mfdfa(MfdfaArgs),
    /// Power-law and crossover fit of a fluctuation CSV.
    Fit(FitArgs),
    /// h(q), tau(q) and f(alpha) from an MF-DFA fluctuation CSV.
    Spectrum(SpectrumArgs),
    /// Seeded synthetic series or price panels.
    Synth(SynthArgs),
    /// Prices to AIC to MF-DFA to fits to spectrum, one report per interval.
    Pipeline(PipelineArgs),
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "strict")]
    missing: MissingPolicy,
}

#[derive(Args)]
struct PanelArgs {
    /// Price CSV: `date` column then one column per symbol.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = ".")]
    output_dir: PathBuf,
    /// Return intervals in rows, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    interval: Vec<usize>,
    #[arg(long, default_value_t = 1)]
    stride: usize,
    /// Symbol subset, comma separated.
    #[arg(long, value_delimiter = ',')]
    symbols: Option<Vec<String>>,
    #[arg(long, default_value = "strict")]
    missing: MissingPolicy,
}

#[derive(Args)]
struct AicArgs {
    #[command(flatten)]
    panel: PanelArgs,
    /// Write the IC series of two symbols `A,B` instead of the AIC.
    #[arg(long, value_delimiter = ',', num_args = 1)]
    pair: Option<Vec<String>>,
}

#[derive(Args)]
struct FluctArgs {
    /// Scale grid `MIN:MAX:COUNT` (log spaced); default depends on the series length.
    #[arg(long, value_name = "MIN:MAX:COUNT")]
    scales: Option<ScaleSpec>,
    #[arg(long, default_value_t = 1)]
    detrend_order: usize,
    #[arg(long, default_value = "forward")]
    direction: Direction,
    #[arg(long, default_value = "error")]
    zero_policy: ZeroPolicy,
    /// Build the profile without subtracting the series mean.
    #[arg(long)]
    keep_mean: bool,
}

impl FluctArgs {
    fn options(&self) -> DfaOptions {
        DfaOptions {
            detrend_order: self.detrend_order,
            direction: self.direction,
            subtract_mean: !self.keep_mean,
            zero_policy: self.zero_policy,
        }
    }
}

#[derive(Args)]
struct DfaArgs {
    /// Series CSV with a header; the last column is used.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = ".")]
    output_dir: PathBuf,
    #[command(flatten)]
    fluct: FluctArgs,
    #[arg(long)]
    plot_data: bool,
}

#[derive(Args)]
struct MfdfaArgs {
    #[command(flatten)]
    dfa: DfaArgs,
    /// Moment grid `MIN:MAX:STEP`.
    #[arg(
        long,
        value_name = "MIN:MAX:STEP",
        default_value = "-2:4:0.25",
        allow_hyphen_values = true
    )]
    q: QGrid,
}

#[derive(Args)]
struct FitArgs {
    /// Fluctuation CSV written by `dfa` or `mfdfa`.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = ".")]
    output_dir: PathBuf,
    /// Moment whose column is fitted.
    #[arg(long, default_value_t = 2.0, allow_hyphen_values = true)]
    moment: f64,
    /// Inclusive scale range `MIN:MAX` of the single power-law fit.
    #[arg(long, value_name = "MIN:MAX", value_parser = parse_fit_range)]
    fit_range: Option<(usize, usize)>,
    #[arg(long, default_value_t = scaling::DEFAULT_REGIME_TOLERANCE)]
    regime_tolerance: f64,
}

#[derive(Args)]
struct SpectrumArgs {
    /// Fluctuation CSV written by `mfdfa`.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = ".")]
    output_dir: PathBuf,
    #[arg(long, value_name = "MIN:MAX", value_parser = parse_fit_range)]
    fit_range: Option<(usize, usize)>,
    #[arg(long, default_value_t = 1.0)]
    fractal_dim: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum SynthKind {
    White,
    Fgn,
    Cascade,
    Panel,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, value_enum)]
    kind: SynthKind,
    #[arg(long, default_value = ".")]
    output_dir: PathBuf,
    #[arg(long, default_value_t = 16384)]
    length: usize,
    #[arg(long, default_value_t = 0.5)]
    hurst: f64,
    /// Cascade multiplier `a`.
    #[arg(long, default_value_t = 0.6)]
    multiplier: f64,
    /// Cascade only: random split orientation.
    #[arg(long)]
    randomized: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Panel only.
    #[arg(long, default_value_t = 50)]
    n_symbols: usize,
    /// Panel only.
    #[arg(long, default_value_t = 2900)]
    n_days: usize,
}

#[derive(Args)]
struct PipelineArgs {
    #[command(flatten)]
    panel: PanelArgs,
    #[command(flatten)]
    fluct: FluctArgs,
    #[arg(
        long,
        value_name = "MIN:MAX:STEP",
        default_value = "-2:4:0.25",
        allow_hyphen_values = true
    )]
    q: QGrid,
    #[arg(long, value_name = "MIN:MAX", value_parser = parse_fit_range)]
    fit_range: Option<(usize, usize)>,
    #[arg(long, default_value_t = scaling::DEFAULT_REGIME_TOLERANCE)]
    regime_tolerance: f64,
    #[arg(long, default_value_t = 1.0)]
    fractal_dim: f64,
    /// Recorded in the report.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    plot_data: bool,
    /// Omit the wall-clock timestamp from reports.
    #[arg(long)]
    no_timestamp: bool,
}

fn parse_fit_range(s: &str) -> Result<(usize, usize)> {
    pipeline::parse_range(s)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            let rendered = e.to_string();
            let line = rendered.lines().next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("aicmem: config: {line}");
            return ExitCode::from(1);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("aicmem: {e}");
            ExitCode::from(match e.class() {
                ErrorClass::Config => 1,
                ErrorClass::Data => 2,
                ErrorClass::Numerical => 3,
            })
        }
    }
}

fn run(command: Command) -> CliResult {
    match command {
        Command::Validate(a) => validate(a),
        Command::Aic(a) => aic(a),
        Command::Dfa(a) => fluctuation(a, None),
        Command::Mfdfa(a) => fluctuation(a.dfa, Some(a.q)),
        Command::Fit(a) => fit(a),
        Command::Spectrum(a) => spectrum(a),
        Command::Synth(a) => synth(a),
        Command::Pipeline(a) => run_pipeline(a),
    }
}

fn validate(a: ValidateArgs) -> CliResult {
    let loaded = load_panel::<f64>(&a.input, a.missing).at("ingest")?;
    let p = &loaded.panel;
    let summary = json!({
        "version": VERSION,
        "input": a.input,
        "missing": a.missing,
        "n_dates": p.n_dates(),
        "n_symbols": p.n_symbols(),
        "first_date": p.dates()[0].to_string(),
        "last_date": p.dates()[p.n_dates() - 1].to_string(),
        "dropped_rows": loaded.dropped_rows,
        "symbols": p.symbols(),
    });
    say(&to_json(&summary)?);
    Ok(())
}

fn aic(a: AicArgs) -> CliResult {
    let p = &a.panel;
    let loaded = load_panel::<f64>(&p.input, p.missing).at("ingest")?;
    create_dir(&p.output_dir)?;
    for &dt in &p.interval {
        let returns = ReturnPanel::from_prices(&loaded.panel, dt, p.stride).at("returns")?;
        let (series, name) = match &a.pair {
            Some(pair) => {
                if pair.len() != 2 {
                    return Err(Error::Config(format!("--pair needs two symbols, got {}", pair.len()))).at("config");
                }
                let s = ic_series(&returns, &pair[0], &pair[1]).at("xcorr")?;
                (s, format!("ic_{}_{}_dt{dt}.csv", pair[0], pair[1]))
            }
            None => (
                aic_series(&returns, p.symbols.as_deref()).at("xcorr")?,
                format!("aic_dt{dt}.csv"),
            ),
        };
        let mut out = String::from("index,value\n");
        for (i, v) in series.values.iter().enumerate() {
            writeln!(out, "{i},{v}").unwrap();
        }
        let path = p.output_dir.join(name);
        write_file(&path, &out)?;
        say(&path.display().to_string());
    }
    Ok(())
}

fn fluctuation(a: DfaArgs, q: Option<QGrid>) -> CliResult {
    let series = read_series(&a.input).at("ingest")?;
    let opts = a.fluct.options();
    let grid = resolve_grid(a.fluct.scales, series.len(), opts.detrend_order).at("fluctuation")?;
    let (ff, stem) = match q {
        Some(q) => {
            let q: Vec<f64> = q.values().at("config")?;
            (mfdfa(&series, &grid, &q, &opts).at("fluctuation")?, "mfdfa")
        }
        None => (dfa(&series, &grid, &opts).at("fluctuation")?, "dfa"),
    };
    create_dir(&a.output_dir)?;
    let path = a.output_dir.join(format!("{stem}.csv"));
    write_file(&path, &fluctuation_csv(&ff))?;
    if a.plot_data {
        write_fq_dat(&a.output_dir, stem, &ff)?;
    }
    say(&path.display().to_string());
    Ok(())
}

fn fit(a: FitArgs) -> CliResult {
    let ff = read_fluctuation(&a.input).at("ingest")?;
    let single = fit_power_law(&ff, a.moment, a.fit_range).at("scaling")?;
    let regime = classify_regime(single.exponent, a.regime_tolerance).at("scaling")?;
    let crossover = if ff.scales.len() >= 7 {
        Some(fit_crossover(&ff, a.moment).at("scaling")?)
    } else {
        None
    };
    let out = json!({
        "version": VERSION,
        "config": {
            "input": a.input,
            "moment": a.moment,
            "fit_range": a.fit_range,
            "regime_tolerance": a.regime_tolerance,
        },
        "exponent": single.exponent,
        "stderr": single.stderr,
        "regime": regime,
        "t_c": crossover.as_ref().map(|c| c.t_c),
        "preferred": crossover.as_ref().map(|c| c.preferred),
        "fit": single,
        "crossover": crossover,
    });
    let text = to_json(&out)?;
    create_dir(&a.output_dir)?;
    write_file(&a.output_dir.join("fit.json"), &text)?;
    say(&text);
    Ok(())
}

fn spectrum(a: SpectrumArgs) -> CliResult {
    let ff = read_fluctuation(&a.input).at("ingest")?;
    let spec = MultifractalSpectrum::from_fluctuation(&ff, a.fit_range, a.fractal_dim).at("spectrum")?;
    let out = json!({
        "version": VERSION,
        "config": {
            "input": a.input,
            "fit_range": a.fit_range,
            "fractal_dim": a.fractal_dim,
        },
        "spectrum": spec,
    });
    create_dir(&a.output_dir)?;
    write_file(&a.output_dir.join("spectrum.json"), &to_json(&out)?)?;
    write_spectrum_dat(&a.output_dir, "", &spec)?;
    say(&format!("delta_alpha {}", spec.delta_alpha));
    Ok(())
}

fn synth(a: SynthArgs) -> CliResult {
    create_dir(&a.output_dir)?;
    let kind = match a.kind {
        SynthKind::White => GeneratorKind::White,
        SynthKind::Fgn => GeneratorKind::Fgn,
        SynthKind::Cascade => GeneratorKind::Cascade,
        SynthKind::Panel => {
            let panel = synthetic_panel::<f64>(a.n_symbols, a.n_days, a.seed).at("synth")?;
            let path = a.output_dir.join("panel.csv");
            let mut buf = Vec::new();
            panel.write_csv(&mut buf).at("output")?;
            write_file(&path, std::str::from_utf8(&buf).expect("csv output is utf-8"))?;
            let sidecar = json!({
                "version": VERSION,
                "kind": "panel",
                "n_symbols": a.n_symbols,
                "n_days": a.n_days,
                "seed": a.seed,
            });
            write_file(&a.output_dir.join("panel.json"), &to_json(&sidecar)?)?;
            say(&path.display().to_string());
            return Ok(());
        }
    };
    let spec = GeneratorSpec {
        kind,
        length: a.length,
        hurst: a.hurst,
        multiplier: a.multiplier,
        seed: a.seed,
        randomized: a.randomized,
    };
    let series: Vec<f64> = spec.generate().at("synth")?;
    let stem = match kind {
        GeneratorKind::White => "white",
        GeneratorKind::Fgn => "fgn",
        GeneratorKind::Cascade => "cascade",
    };
    let mut out = String::from("value\n");
    for v in &series {
        writeln!(out, "{v}").unwrap();
    }
    let path = a.output_dir.join(format!("{stem}.csv"));
    write_file(&path, &out)?;
    let sidecar = json!({ "version": VERSION, "spec": spec, "seed": a.seed });
    write_file(&a.output_dir.join(format!("{stem}.json")), &to_json(&sidecar)?)?;
    say(&path.display().to_string());
    Ok(())
}

fn run_pipeline(a: PipelineArgs) -> CliResult {
    let p = &a.panel;
    let config = PipelineConfig {
        intervals: p.interval.clone(),
        stride: p.stride,
        symbols: p.symbols.clone(),
        scales: a.fluct.scales,
        q: a.q,
        dfa: a.fluct.options(),
        fit_range: a.fit_range,
        regime_tolerance: a.regime_tolerance,
        missing: p.missing,
        seed: a.seed,
        fractal_dim: a.fractal_dim,
    };
    config.validate().at("config")?;
    let loaded = load_panel::<f64>(&p.input, p.missing).at("ingest")?;
    create_dir(&p.output_dir)?;
    for &dt in &config.intervals {
        let mut report = run_interval(&loaded.panel, dt, &config)?;
        if !a.no_timestamp {
            report.generated_at_unix = SystemTime::now().duration_since(UNIX_EPOCH).ok().map(|d| d.as_secs());
        }
        let path = p.output_dir.join(format!("report_dt{dt}.json"));
        write_file(&path, &to_json(&report)?)?;
        if a.plot_data {
            write_report_dat(&p.output_dir, &report)?;
        }
        let tc = report.crossover.map_or("-".to_string(), |c| c.t_c.to_string());
        say(&format!(
            "dt={dt} n={} H={:.4} regime={} t_c={tc} delta_alpha={:.4}",
            report.n_returns, report.dfa.fit.exponent, report.dfa.regime, report.spectrum.delta_alpha
        ));
    }
    Ok(())
}

/// Prints a line to stdout, ignoring a closed pipe.
fn say(line: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{}", line.trim_end_matches('\n'));
}

fn to_json<S: Serialize>(value: &S) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(Error::from).at("output")?;
    s.push('\n');
    Ok(s)
}

fn create_dir(dir: &Path) -> CliResult {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e)).at("output")
}

fn write_file(path: &Path, contents: &str) -> CliResult {
    fs::write(path, contents).map_err(|e| io_err(path, e)).at("output")
}

fn fluctuation_csv(ff: &FluctuationFunction<f64>) -> String {
    let mut out = String::from("scale");
    for q in &ff.q_values {
        write!(out, ",{q}").unwrap();
    }
    out.push('\n');
    for (i, t) in ff.scales.iter().enumerate() {
        write!(out, "{t}").unwrap();
        for row in &ff.values {
            write!(out, ",{}", row[i]).unwrap();
        }
        out.push('\n');
    }
    out
}

fn write_fq_dat(dir: &Path, stem: &str, ff: &FluctuationFunction<f64>) -> CliResult {
    for (q, row) in ff.q_values.iter().zip(&ff.values) {
        let mut out = format!("# q = {q}\n# scale F_q\n");
        for (t, f) in ff.scales.iter().zip(row) {
            writeln!(out, "{t} {f}").unwrap();
        }
        write_file(&dir.join(format!("{stem}_fq_q{q}.dat")), &out)?;
    }
    Ok(())
}

fn write_spectrum_dat(dir: &Path, prefix: &str, s: &MultifractalSpectrum<f64>) -> CliResult {
    let columns = |head: &str, xs: &[f64], ys: &[f64]| {
        let mut out = format!("# {head}\n");
        for (x, y) in xs.iter().zip(ys) {
            writeln!(out, "{x} {y}").unwrap();
        }
        out
    };
    write_file(&dir.join(format!("{prefix}hq.dat")), &columns("q h", &s.q_values, &s.h))?;
    write_file(
        &dir.join(format!("{prefix}tau.dat")),
        &columns("q tau", &s.q_values, &s.tau),
    )?;
    write_file(
        &dir.join(format!("{prefix}falpha.dat")),
        &columns("alpha f", &s.alpha, &s.f_alpha),
    )
}

fn write_report_dat(dir: &Path, r: &IntervalReport<f64>) -> CliResult {
    let prefix = format!("dt{}_", r.interval);
    write_fq_dat(dir, &format!("dt{}", r.interval), &r.fluctuation)?;
    write_spectrum_dat(dir, &prefix, &r.spectrum)
}

fn csv_reader(path: &Path) -> Result<csv::Reader<fs::File>> {
    let file = fs::File::open(path).map_err(|e| io_err(path, e))?;
    Ok(csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file))
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    Error::MalformedCsv {
        line,
        msg: e.to_string(),
    }
}

fn parse_cell(cell: &str, line: u64) -> Result<f64> {
    cell.parse().map_err(|_| Error::MalformedCsv {
        line,
        msg: format!("non-numeric value {cell:?}"),
    })
}

/// Last column of a CSV with a header row.
fn read_series(path: &Path) -> Result<Vec<f64>> {
    let mut rdr = csv_reader(path)?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_error)?;
        let line = rec.position().map_or(0, |p| p.line());
        let cell = rec.iter().next_back().ok_or(Error::MalformedCsv {
            line,
            msg: "empty row".into(),
        })?;
        out.push(parse_cell(cell, line)?);
    }
    if out.is_empty() {
        return Err(Error::Empty("series"));
    }
    Ok(out)
}

/// Inverse of [`fluctuation_csv`].
fn read_fluctuation(path: &Path) -> Result<FluctuationFunction<f64>> {
    let mut rdr = csv_reader(path)?;
    let header = rdr.headers().map_err(csv_error)?.clone();
    if header.get(0) != Some("scale") || header.len() < 2 {
        return Err(Error::MalformedHeader(
            "expected `scale` followed by one column per q".into(),
        ));
    }
    let q_values = header
        .iter()
        .skip(1)
        .map(|h| {
            h.parse::<f64>()
                .map_err(|_| Error::MalformedHeader(format!("moment {h:?} is not a number")))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut scales = Vec::new();
    let mut values = vec![Vec::new(); q_values.len()];
    for rec in rdr.records() {
        let rec = rec.map_err(csv_error)?;
        let line = rec.position().map_or(0, |p| p.line());
        let scale = rec[0].parse::<usize>().map_err(|_| Error::MalformedCsv {
            line,
            msg: format!("scale {:?} is not a positive integer", &rec[0]),
        })?;
        scales.push(scale);
        for (row, cell) in values.iter_mut().zip(rec.iter().skip(1)) {
            row.push(parse_cell(cell, line)?);
        }
    }
    if scales.is_empty() {
        return Err(Error::Empty("fluctuation table"));
    }
    if scales.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::MalformedCsv {
            line: 0,
            msg: "scales must be strictly increasing".into(),
        });
    }
    Ok(FluctuationFunction {
        n_windows: vec![0; scales.len()],
        scales,
        q_values,
        values,
        direction: Direction::Forward,
        floored_windows: 0,
    })
}
