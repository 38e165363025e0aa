//! File-based command-line pipeline.
//!
//! Stages hand off through files: signal CSV, TFM1 matrices with an axes
//! sidecar, ridge/component/event/rate CSVs. Every output gets a
//! `<output>.manifest.json` next to it. Outputs of a stage are written all
//! together or not at all.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 data or format
//! error, 3 numerical failure.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};

use crate::cwt::{cwt, default_scale_grid, MotherWavelet, ScaleGrid, Scalogram};
use crate::error::{Error, Result};
use crate::io::{self, Axes, Matrix, RunManifest};
use crate::rate::{compare_rates, detect_peaks, intuitive_rate};
use crate::recon::{default_halfwidth, reconstruct};
use crate::ridge::{extract_ridge_in, peel, RidgeCurve, DEFAULT_LAMBDA, DEFAULT_PEEL_WIDTH};
use crate::signal::{builtin_signal, BuiltinName, TimeGrid};
use crate::sst::{default_threshold, omega, synchrosqueeze, FrequencyBins, SstPlane, DEFAULT_BINS, DEFAULT_THRESHOLD_RHO};

/// Environment variable capping the worker count (0 = automatic).
pub const THREADS_VAR: &str = "SSQ_THREADS";

#[derive(Debug, Parser)]
#[command(name = "waveshape", version, about = "Synchrosqueezing analysis of non-harmonic oscillatory signals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Synthesize a reference signal and its ground truth.
    Synth {
        #[arg(long)]
        signal: String,
        #[arg(long, default_value_t = 0.015625)]
        dt: f64,
        #[arg(long, default_value_t = 1024)]
        n: usize,
        #[arg(long, default_value_t = 0.0)]
        t0: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Continuous wavelet transform of a signal CSV.
    Cwt {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        #[arg(long, default_value_t = 32)]
        voices: usize,
        #[arg(long)]
        fmin: f64,
        #[arg(long)]
        fmax: f64,
        /// Highest harmonic of `fmax` the scale grid must cover.
        #[arg(long, default_value_t = 1)]
        harmonics: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Synchrosqueeze a stored scalogram.
    Sst {
        #[arg(long = "in-w")]
        input: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        alpha: f64,
        /// Magnitude threshold; defaults to `1e−8 + rho·median|W|`.
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_THRESHOLD_RHO)]
        rho: f64,
        #[arg(long, default_value_t = DEFAULT_BINS)]
        bins: usize,
        #[arg(long)]
        fmin: Option<f64>,
        #[arg(long)]
        fmax: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Extract ridges from a synchrosqueezed plane.
    Ridge {
        #[arg(long = "in-sst")]
        input: PathBuf,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, default_value_t = DEFAULT_LAMBDA)]
        lambda: f64,
        #[arg(long, default_value_t = DEFAULT_PEEL_WIDTH)]
        width: usize,
        /// Restrict the search to bins at or above this frequency.
        #[arg(long)]
        search_min: Option<f64>,
        /// Restrict the search to bins at or below this frequency.
        #[arg(long)]
        search_max: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Reconstruct a component from harmonic bands around a ridge.
    Recon {
        #[arg(long = "in-sst")]
        input: PathBuf,
        #[arg(long)]
        ridge: PathBuf,
        #[arg(long, default_value_t = 1)]
        harmonics: usize,
        #[arg(long)]
        halfwidth: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Intuitive rate from events or from peaks of a signal.
    Rate {
        #[arg(long, conflicts_with = "signal", required_unless_present = "signal")]
        events: Option<PathBuf>,
        #[arg(long)]
        signal: Option<PathBuf>,
        #[arg(long, default_value_t = 0.3)]
        min_sep: f64,
        #[arg(long, default_value_t = 0.5)]
        threshold: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare two rate or ridge curves.
    Compare {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        /// `lo,hi` in seconds; defaults to the common support.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        window: Option<Vec<f64>>,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_)
        | Error::Resolution(_)
        | Error::ClassMembership(_)
        | Error::InvalidComponent(_)
        | Error::DegenerateShape => 1,
        e if e.is_data_error() => 2,
        Error::NoOverlap => 2,
        _ => 3,
    }
}

/// Parses `args` (including the program name) and runs one stage.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let threads = match std::env::var(THREADS_VAR) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) => n,
            Err(_) => {
                eprintln!("error: {THREADS_VAR} must be a nonnegative integer, got '{v}'");
                return 1;
            }
        },
        Err(_) => 0,
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return 3;
        }
    };
    match pool.install(|| dispatch(cli.command)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Output files of a stage, written together with their manifests.
struct Outputs {
    manifest: RunManifest,
    files: Vec<(PathBuf, Vec<u8>)>,
    start: Instant,
}

impl Outputs {
    fn new(command: &str) -> Self {
        Outputs {
            manifest: RunManifest::new(command),
            files: Vec::new(),
            start: Instant::now(),
        }
    }

    fn add(&mut self, path: PathBuf, bytes: Vec<u8>) {
        self.files.push((path, bytes));
    }

    fn commit(mut self) -> Result<()> {
        self.manifest.outputs = self.files.iter().map(|(p, _)| p.clone()).collect();
        self.manifest.wall_time_s = self.start.elapsed().as_secs_f64();
        let json = self.manifest.to_json();
        let manifests: Vec<_> = self
            .files
            .iter()
            .map(|(p, _)| (io::manifest_path(p), json.clone()))
            .collect();
        self.files.extend(manifests);
        io::commit_outputs(&self.files)
    }
}

fn read_file(path: &Path) -> Result<fs::File> {
    fs::File::open(path).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

fn axes_path(matrix: &Path) -> PathBuf {
    matrix.with_extension("axes.csv")
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Synth { signal, dt, n, t0, seed, out } => synth(&signal, dt, n, t0, seed, out),
        Command::Cwt { input, delta, voices, fmin, fmax, harmonics, out } => {
            run_cwt(input, delta, voices, fmin, fmax, harmonics, out)
        }
        Command::Sst { input, alpha, gamma, rho, bins, fmin, fmax, out } => {
            run_sst(input, alpha, gamma, rho, bins, fmin, fmax, out)
        }
        Command::Ridge { input, count, lambda, width, search_min, search_max, out } => {
            run_ridge(input, count, lambda, width, search_min, search_max, out)
        }
        Command::Recon { input, ridge, harmonics, halfwidth, out } => run_recon(input, ridge, harmonics, halfwidth, out),
        Command::Rate { events, signal, min_sep, threshold, out } => run_rate(events, signal, min_sep, threshold, out),
        Command::Compare { a, b, window, out } => run_compare(a, b, window, out),
    }
}

fn synth(name: &str, dt: f64, n: usize, t0: f64, seed: u64, out: PathBuf) -> Result<()> {
    let which = BuiltinName::parse(name)
        .ok_or_else(|| Error::Config(format!("unknown signal '{name}' (expected f1, f2, f3 or f4)")))?;
    let grid = TimeGrid::new(t0, dt, n)?;
    let b = builtin_signal(which, &grid, seed)?;
    let mut o = Outputs::new("synth");
    o.manifest.param("signal", name);
    o.manifest.param("dt", dt);
    o.manifest.param("n", n);
    o.manifest.param("t0", t0);
    o.manifest.seed = Some(seed);

    let k = b.components.len();
    let mut header = vec!["t".to_string()];
    for prefix in ["if", "amplitude", "component"] {
        header.extend((1..=k).map(|i| format!("{prefix}{i}")));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header).map_err(|e| Error::Format(e.to_string()))?;
    for i in 0..n {
        let mut row = vec![grid.time(i)];
        for series in [&b.inst_freqs, &b.amplitudes, &b.components] {
            row.extend(series.iter().map(|c| c[i]));
        }
        w.write_record(row.iter().map(|v| v.to_string()))
            .map_err(|e| Error::Format(e.to_string()))?;
    }
    let truth = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
    o.add(io::sibling(&out, ".truth"), truth);
    o.add(out, io::encode_signal(&b.signal));
    o.commit()
}

fn run_cwt(input: PathBuf, delta: f64, voices: usize, fmin: f64, fmax: f64, harmonics: usize, out: PathBuf) -> Result<()> {
    let sig = io::decode_signal(read_file(&input)?)?;
    let w = MotherWavelet::bump(delta)?;
    let scales = default_scale_grid(&w, fmin, fmax, harmonics, voices)?;
    let sc = cwt(&sig, &w, &scales)?;
    for msg in &sc.warnings {
        eprintln!("warning: {msg}");
    }
    let mut axes = Axes::default();
    axes.set("delta", delta);
    axes.set("t0", sig.t0);
    axes.set("dt", sig.dt);
    axes.set("real_input", 1.0);
    axes.set_all("scale", scales.scales().to_vec());

    let mut o = Outputs::new("cwt");
    o.manifest.inputs.push(input);
    o.manifest.param("delta", delta);
    o.manifest.param("voices", voices);
    o.manifest.param("fmin", fmin);
    o.manifest.param("fmax", fmax);
    o.manifest.param("harmonics", harmonics);
    o.add(io::sibling(&out, ".dw"), io::encode_tfm(&Matrix::Complex(sc.dw)));
    o.add(axes_path(&out), axes.encode());
    o.add(out, io::encode_tfm(&Matrix::Complex(sc.w)));
    o.commit()
}

fn load_scalogram(path: &Path) -> Result<(Scalogram, Axes)> {
    let axes = Axes::decode(read_file(&axes_path(path))?)?;
    let w = io::read_tfm(path)?.into_complex();
    let dw = io::read_tfm(&io::sibling(path, ".dw"))?.into_complex();
    let scales = ScaleGrid::from_values(axes.array("scale")?.to_vec())?;
    if w.dim() != dw.dim() || w.nrows() != scales.len() {
        return Err(Error::Format("scalogram matrices do not match their axes".into()));
    }
    let grid = TimeGrid::new(axes.scalar("t0")?, axes.scalar("dt")?, w.ncols())
        .map_err(|e| Error::Format(e.to_string()))?;
    let sc = Scalogram {
        scales,
        grid,
        delta: axes.scalar("delta")?,
        w,
        dw,
        warnings: Vec::new(),
    };
    Ok((sc, axes))
}

#[allow(clippy::too_many_arguments)]
fn run_sst(
    input: PathBuf,
    alpha: f64,
    gamma: Option<f64>,
    rho: f64,
    nbins: usize,
    fmin: Option<f64>,
    fmax: Option<f64>,
    out: PathBuf,
) -> Result<()> {
    let (sc, in_axes) = load_scalogram(&input)?;
    let d = sc.delta;
    let lo = fmin.unwrap_or((1.0 - d) / sc.scales.a_max());
    let hi = fmax.unwrap_or((1.0 + d) / sc.scales.a_min());
    let bins = FrequencyBins::linear(lo, hi, nbins)?;
    let gamma = gamma.unwrap_or_else(|| default_threshold(&sc, rho));
    let om = omega(&sc, gamma);
    let plane = synchrosqueeze(&sc, &om, &bins, alpha, gamma)?;

    let mut axes = Axes::default();
    axes.set("delta", d);
    axes.set("t0", sc.grid.t0);
    axes.set("dt", sc.grid.dt);
    axes.set("alpha", alpha);
    axes.set("gamma", gamma);
    axes.set("real_input", in_axes.scalar("real_input").unwrap_or(0.0));
    axes.set_all("freq", bins.centers());

    let mut o = Outputs::new("sst");
    o.manifest.inputs.push(input);
    o.manifest.param("alpha", alpha);
    o.manifest.param("gamma", gamma);
    o.manifest.param("bins", nbins);
    o.manifest.param("fmin", lo);
    o.manifest.param("fmax", hi);
    o.add(axes_path(&out), axes.encode());
    o.add(out, io::encode_tfm(&Matrix::Complex(plane.s)));
    o.commit()
}

fn load_plane(path: &Path) -> Result<(SstPlane, Axes)> {
    let axes = Axes::decode(read_file(&axes_path(path))?)?;
    let s = io::read_tfm(path)?.into_complex();
    let bins = FrequencyBins::from_centers(axes.array("freq")?).map_err(|e| Error::Format(e.to_string()))?;
    if s.nrows() != bins.count {
        return Err(Error::Format("plane rows do not match the frequency axis".into()));
    }
    let grid = TimeGrid::new(axes.scalar("t0")?, axes.scalar("dt")?, s.ncols())
        .map_err(|e| Error::Format(e.to_string()))?;
    let plane = SstPlane {
        grid,
        bins,
        s,
        alpha: axes.scalar("alpha")?,
        gamma: axes.scalar("gamma")?,
    };
    Ok((plane, axes))
}

fn run_ridge(
    input: PathBuf,
    count: usize,
    lambda: f64,
    width: usize,
    search_min: Option<f64>,
    search_max: Option<f64>,
    out: PathBuf,
) -> Result<()> {
    if count == 0 {
        return Err(Error::Config("ridge count must be at least 1".into()));
    }
    let (plane, _) = load_plane(&input)?;
    let lo = search_min.unwrap_or(plane.bins.lo);
    let hi = search_max.unwrap_or(plane.bins.hi());
    let mut o = Outputs::new("ridge");
    o.manifest.inputs.push(input);
    o.manifest.param("count", count);
    o.manifest.param("lambda", lambda);
    o.manifest.param("width", width);
    o.manifest.param("search_min", lo);
    o.manifest.param("search_max", hi);
    let mut work = plane;
    for k in 0..count {
        let r = extract_ridge_in(&work, lambda, lo, hi)?;
        work = peel(&work, &r, width);
        let path = if count == 1 { out.clone() } else { io::sibling(&out, &format!("_{}", k + 1)) };
        o.add(path, io::encode_ridge(&r));
    }
    o.commit()
}

fn run_recon(input: PathBuf, ridge_path: PathBuf, harmonics: usize, halfwidth: Option<f64>, out: PathBuf) -> Result<()> {
    let (plane, axes) = load_plane(&input)?;
    let (t, freq, strength) = io::decode_ridge(read_file(&ridge_path)?)?;
    if t.len() != plane.grid.n {
        return Err(Error::Format(format!("ridge has {} rows, plane has {} columns", t.len(), plane.grid.n)));
    }
    let path = freq
        .iter()
        .map(|&f| plane.bins.bin_of(f).unwrap_or(if f < plane.bins.lo { 0 } else { plane.bins.count - 1 }))
        .collect();
    let ridge = RidgeCurve {
        grid: plane.grid,
        bins: plane.bins,
        path,
        freq,
        strength,
    };
    let w = MotherWavelet::bump(axes.scalar("delta")?)?;
    let hw = halfwidth.unwrap_or_else(|| default_halfwidth(&ridge));
    let est = reconstruct(&plane, &ridge, harmonics, hw, &w)?;
    let factor = if axes.scalar("real_input").unwrap_or(0.0) == 1.0 { 2.0 } else { 1.0 };

    let mut o = Outputs::new("recon");
    o.manifest.inputs.extend([input, ridge_path]);
    o.manifest.param("harmonics", harmonics);
    o.manifest.param("halfwidth", hw);
    o.manifest.param("factor", factor);
    o.add(out, io::encode_component(&est, factor));
    o.commit()
}

fn run_rate(events: Option<PathBuf>, signal: Option<PathBuf>, min_sep: f64, threshold: f64, out: PathBuf) -> Result<()> {
    let mut o = Outputs::new("rate");
    let ev = match (events, signal) {
        (Some(p), _) => {
            let ev = io::decode_events(read_file(&p)?)?;
            o.manifest.inputs.push(p);
            ev
        }
        (None, Some(p)) => {
            let sig = io::decode_signal(read_file(&p)?)?;
            let ev = detect_peaks(&sig, min_sep, threshold)?;
            o.manifest.inputs.push(p);
            o.manifest.param("min_sep", min_sep);
            o.manifest.param("threshold", threshold);
            o.add(io::sibling(&out, ".events"), io::encode_events(&ev));
            ev
        }
        (None, None) => return Err(Error::Config("either --events or --signal is required".into())),
    };
    let rate = intuitive_rate(&ev)?;
    o.add(out, io::encode_rate(&rate));
    o.commit()
}

fn run_compare(a: PathBuf, b: PathBuf, window: Option<Vec<f64>>, out: PathBuf) -> Result<()> {
    let ca = io::decode_rate(read_file(&a)?)?;
    let cb = io::decode_rate(read_file(&b)?)?;
    let win = match window.as_deref() {
        Some([lo, hi]) => (*lo, *hi),
        Some(other) => return Err(Error::Config(format!("--window takes lo,hi, got {} values", other.len()))),
        None => (f64::NEG_INFINITY, f64::INFINITY),
    };
    let cmp = compare_rates(&ca, &cb, win)?;
    let report = serde_json::json!({
        "rmse": cmp.rmse,
        "max_abs": cmp.max_abs,
        "mean_bias": cmp.mean_bias,
        "samples": cmp.samples,
    });
    let mut o = Outputs::new("compare");
    o.manifest.inputs.extend([a, b]);
    if let Some(w) = window {
        o.manifest.param("window", w);
    }
    o.add(out, serde_json::to_vec_pretty(&report).expect("report serializes"));
    o.commit()
}
