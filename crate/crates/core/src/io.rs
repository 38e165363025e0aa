//! File formats: TFM1 matrices, axis sidecars, CSV series and run manifests.
//!
//! TFM1 layout: the magic `TFM1`, little-endian `u32` rows and cols, a `u8`
//! flag (0 real, 1 complex), then row-major little-endian `f64` values with
//! complex entries interleaved as re, im.

use std::collections::BTreeMap;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rate::{EventList, RateCurve};
use crate::recon::ComponentEstimate;
use crate::ridge::RidgeCurve;
use crate::signal::SampledSignal;

const MAGIC: &[u8; 4] = b"TFM1";

/// A real or complex matrix as stored in TFM1.
#[derive(Debug, Clone, PartialEq)]
pub enum Matrix {
    Real(Array2<f64>),
    Complex(Array2<Complex64>),
}

impl Matrix {
    pub fn into_complex(self) -> Array2<Complex64> {
        match self {
            Matrix::Real(m) => m.mapv(|x| Complex64::new(x, 0.0)),
            Matrix::Complex(m) => m,
        }
    }
}

pub fn encode_tfm(m: &Matrix) -> Vec<u8> {
    let (rows, cols, flag) = match m {
        Matrix::Real(a) => (a.nrows(), a.ncols(), 0u8),
        Matrix::Complex(a) => (a.nrows(), a.ncols(), 1u8),
    };
    let width = if flag == 1 { 16 } else { 8 };
    let mut out = Vec::with_capacity(13 + rows * cols * width);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(rows as u32).to_le_bytes());
    out.extend_from_slice(&(cols as u32).to_le_bytes());
    out.push(flag);
    match m {
        Matrix::Real(a) => a.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes())),
        Matrix::Complex(a) => a.iter().for_each(|z| {
            out.extend_from_slice(&z.re.to_le_bytes());
            out.extend_from_slice(&z.im.to_le_bytes());
        }),
    }
    out
}

pub fn decode_tfm(mut r: impl Read) -> Result<Matrix> {
    let mut head = [0u8; 13];
    r.read_exact(&mut head)
        .map_err(|_| Error::Format("truncated matrix header".into()))?;
    if &head[..4] != MAGIC {
        return Err(Error::Format("bad matrix magic".into()));
    }
    let rows = u32::from_le_bytes(head[4..8].try_into().unwrap()) as usize;
    let cols = u32::from_le_bytes(head[8..12].try_into().unwrap()) as usize;
    let flag = head[12];
    let per = match flag {
        0 => 1,
        1 => 2,
        f => return Err(Error::Format(format!("unknown element flag {f}"))),
    };
    let mut body = Vec::new();
    r.read_to_end(&mut body)?;
    if body.len() != rows * cols * per * 8 {
        return Err(Error::Format(format!(
            "matrix payload has {} bytes, expected {}",
            body.len(),
            rows * cols * per * 8
        )));
    }
    let vals: Vec<f64> = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let shape = (rows, cols);
    let bad = || Error::Format("matrix shape mismatch".into());
    Ok(if flag == 0 {
        Matrix::Real(Array2::from_shape_vec(shape, vals).map_err(|_| bad())?)
    } else {
        let z = vals.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect();
        Matrix::Complex(Array2::from_shape_vec(shape, z).map_err(|_| bad())?)
    })
}

pub fn read_tfm(path: &Path) -> Result<Matrix> {
    decode_tfm(fs::File::open(path)?)
}

/// Key/value sidecar; repeated keys hold arrays (`scale`, `freq`).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Axes {
    pub entries: BTreeMap<String, Vec<f64>>,
}

impl Axes {
    pub fn set(&mut self, key: &str, value: f64) {
        self.entries.insert(key.to_string(), vec![value]);
    }

    pub fn set_all(&mut self, key: &str, values: Vec<f64>) {
        self.entries.insert(key.to_string(), values);
    }

    pub fn scalar(&self, key: &str) -> Result<f64> {
        match self.entries.get(key).map(Vec::as_slice) {
            Some([v]) => Ok(*v),
            _ => Err(Error::Format(format!("axis file lacks a single '{key}' entry"))),
        }
    }

    pub fn array(&self, key: &str) -> Result<&[f64]> {
        self.entries
            .get(key)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::Format(format!("axis file lacks '{key}' values")))
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = String::from("key,value\n");
        for (k, vs) in &self.entries {
            for v in vs {
                out.push_str(&format!("{k},{v}\n"));
            }
        }
        out.into_bytes()
    }

    pub fn decode(r: impl Read) -> Result<Self> {
        let mut axes = Axes::default();
        for rec in read_rows(r, &["key", "value"])? {
            let v = parse_num(&rec[1])?;
            axes.entries.entry(rec[0].clone()).or_default().push(v);
        }
        Ok(axes)
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Format(e.to_string())
}

fn parse_num(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::Format(format!("not a finite number: '{s}'")))
}

/// Reads a headed CSV, checking that the header starts with `expect`.
fn read_rows(r: impl Read, expect: &[&str]) -> Result<Vec<Vec<String>>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    let head = rdr.headers().map_err(csv_err)?.clone();
    if head.len() < expect.len() || head.iter().zip(expect).any(|(h, e)| h != *e) {
        return Err(Error::Format(format!(
            "expected header starting with '{}', found '{}'",
            expect.join(","),
            head.iter().collect::<Vec<_>>().join(",")
        )));
    }
    rdr.records()
        .map(|r| r.map(|rec| rec.iter().map(str::to_string).collect()).map_err(csv_err))
        .collect()
}

fn columns(rows: &[Vec<String>], count: usize) -> Result<Vec<Vec<f64>>> {
    let mut cols = vec![Vec::with_capacity(rows.len()); count];
    for r in rows {
        for (c, col) in cols.iter_mut().enumerate() {
            col.push(parse_num(&r[c])?);
        }
    }
    Ok(cols)
}

fn write_table(header: &str, rows: impl Iterator<Item = Vec<f64>>) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header.split(',')).expect("in-memory write");
    for r in rows {
        w.write_record(r.iter().map(|v| v.to_string())).expect("in-memory write");
    }
    w.into_inner().expect("in-memory write")
}

/// Uniform time step of `t`, checked to relative `1e−6`.
fn uniform_step(t: &[f64]) -> Result<f64> {
    if t.len() < 2 {
        return Err(Error::EmptySignal);
    }
    let dt = (t[t.len() - 1] - t[0]) / (t.len() - 1) as f64;
    if !(dt > 0.0) || t.iter().enumerate().any(|(i, x)| (x - (t[0] + i as f64 * dt)).abs() > 1e-6 * dt) {
        return Err(Error::Format("time column is not uniformly increasing".into()));
    }
    Ok(dt)
}

/// Signal CSV: `t,value`.
pub fn encode_signal(sig: &SampledSignal) -> Vec<u8> {
    let g = sig.grid();
    write_table("t,value", sig.samples.iter().enumerate().map(|(i, &x)| vec![g.time(i), x]))
}

pub fn decode_signal(r: impl Read) -> Result<SampledSignal> {
    let rows = read_rows(r, &["t", "value"])?;
    let c = columns(&rows, 2)?;
    let dt = uniform_step(&c[0])?;
    SampledSignal::new(c[0][0], dt, c[1].clone())
}

/// Ridge CSV: `t,freq,strength`.
pub fn encode_ridge(r: &RidgeCurve) -> Vec<u8> {
    write_table(
        "t,freq,strength",
        (0..r.freq.len()).map(|i| vec![r.grid.time(i), r.freq[i], r.strength[i]]),
    )
}

/// Returns `(t, freq, strength)` columns.
pub fn decode_ridge(r: impl Read) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let rows = read_rows(r, &["t", "freq", "strength"])?;
    let mut c = columns(&rows, 3)?.into_iter();
    Ok((c.next().unwrap(), c.next().unwrap(), c.next().unwrap()))
}

/// Component CSV: `t,real,imag,amplitude`, with values multiplied by `factor`.
pub fn encode_component(c: &ComponentEstimate, factor: f64) -> Vec<u8> {
    write_table(
        "t,real,imag,amplitude",
        c.values
            .iter()
            .enumerate()
            .map(|(i, z)| vec![c.grid.time(i), factor * z.re, factor * z.im, factor * z.norm()]),
    )
}

/// Event CSV: a single `t` column.
pub fn encode_events(e: &EventList) -> Vec<u8> {
    write_table("t", e.times().iter().map(|&t| vec![t]))
}

pub fn decode_events(r: impl Read) -> Result<EventList> {
    let rows = read_rows(r, &["t"])?;
    EventList::new(columns(&rows, 1)?.remove(0))
}

/// Rate CSV: `t,rate`, one row per step knot or dense sample.
pub fn encode_rate(c: &RateCurve) -> Vec<u8> {
    match c {
        RateCurve::Step { knots, values, .. } => {
            write_table("t,rate", knots.iter().zip(values).map(|(&t, &v)| vec![t, v]))
        }
        RateCurve::Dense { t0, dt, values } => write_table(
            "t,rate",
            values.iter().enumerate().map(|(i, &v)| vec![t0 + i as f64 * dt, v]),
        ),
    }
}

/// Reads a rate CSV, or the first two columns of a ridge CSV, as a step
/// curve ending at its last row.
pub fn decode_rate(r: impl Read) -> Result<RateCurve> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    let head: Vec<String> = rdr.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
    if head.len() < 2 || head[0] != "t" || !(head[1] == "rate" || head[1] == "freq") {
        return Err(Error::Format(format!("expected 't,rate' or 't,freq' header, found '{}'", head.join(","))));
    }
    let (mut t, mut v) = (Vec::new(), Vec::new());
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        t.push(parse_num(&rec[0])?);
        v.push(parse_num(&rec[1])?);
    }
    if t.is_empty() {
        return Err(Error::EmptySignal);
    }
    if let Some(i) = t.windows(2).position(|w| w[1] <= w[0]) {
        return Err(Error::UnorderedEvents(i + 1));
    }
    let end = t[t.len() - 1];
    Ok(RateCurve::Step { knots: t, values: v, end })
}

/// Provenance record written next to every output.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RunManifest {
    pub command: String,
    pub parameters: BTreeMap<String, serde_json::Value>,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub seed: Option<u64>,
    pub version: String,
    pub wall_time_s: f64,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        RunManifest {
            command: command.to_string(),
            parameters: BTreeMap::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            seed: None,
            version: env!("CARGO_PKG_VERSION").to_string(),
            wall_time_s: 0.0,
        }
    }

    pub fn param(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).unwrap_or(serde_json::Value::Null);
        self.parameters.insert(key.to_string(), v);
    }

    pub fn to_json(&self) -> Vec<u8> {
        serde_json::to_vec_pretty(self).expect("manifest serializes")
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        serde_json::from_slice(bytes).map_err(|e| Error::Format(e.to_string()))
    }
}

/// `<path>.manifest.json`.
pub fn manifest_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

/// `path` with `suffix` inserted before its extension.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}{suffix}.{}", ext.to_string_lossy()),
        None => format!("{stem}{suffix}"),
    };
    path.with_file_name(name)
}

/// Writes every file or none: each goes to a temporary name first and all
/// are renamed once every write succeeded.
pub fn commit_outputs(files: &[(PathBuf, Vec<u8>)]) -> Result<()> {
    let mut staged = Vec::with_capacity(files.len());
    let cleanup = |staged: &[PathBuf]| {
        for p in staged {
            let _ = fs::remove_file(p);
        }
    };
    for (path, bytes) in files {
        let mut tmp = path.as_os_str().to_owned();
        tmp.push(".partial");
        let tmp = PathBuf::from(tmp);
        let res = fs::File::create(&tmp).and_then(|mut f| f.write_all(bytes));
        staged.push(tmp);
        if let Err(e) = res {
            cleanup(&staged);
            return Err(e.into());
        }
    }
    for ((path, _), tmp) in files.iter().zip(&staged) {
        fs::rename(tmp, path)?;
    }
    Ok(())
}
