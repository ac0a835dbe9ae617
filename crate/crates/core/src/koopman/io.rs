//! Estimator file and spectral report.

use std::io::{BufRead, Write};
use std::path::Path;

use super::rrr::KoopmanEstimator;
use super::spectral::{ModeSpectrum, SpectralSummary};
use crate::algebra::C64;
use crate::error::{Error, Result};
use crate::textio::{self, fmt_csv, fmt_exact, header_value, parse_f64, parse_usize};

const END: &str = "end_header";
const CTX: &str = "estimator file";

pub const SPECTRUM_HEADER: &str = "index,re_lambda,im_lambda,abs_lambda,decay_rate,frequency";

pub fn write_estimator<W: Write + ?Sized>(w: &mut W, est: &KoopmanEstimator) -> std::io::Result<()> {
    writeln!(w, "# koopspin estimator (transfer matrix T, y ~ T x, row-major)")?;
    writeln!(w, "feature_dim = {}", est.feature_dim())?;
    writeln!(w, "rank = {}", est.rank())?;
    writeln!(w, "reg = {}", fmt_exact(est.reg()))?;
    writeln!(w, "dt = {}", fmt_exact(est.dt()))?;
    writeln!(w, "{END}")?;
    let d = est.feature_dim();
    let mut line = String::with_capacity(d * 25);
    for row in est.transfer().chunks(d) {
        line.clear();
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                line.push(' ');
            }
            line.push_str(&fmt_exact(*v));
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}

pub fn read_estimator<R: BufRead>(r: R) -> Result<KoopmanEstimator> {
    let mut lines = r.lines();
    let header = textio::read_header(&mut lines, END, CTX)?;
    let get = |k| header_value(&header, k, CTX);
    let d = parse_usize(get("feature_dim")?, "feature_dim")?;
    let rank = parse_usize(get("rank")?, "rank")?;
    let reg = parse_f64(get("reg")?, "reg")?;
    let dt = parse_f64(get("dt")?, "dt")?;
    let mut data = Vec::with_capacity(d * d);
    let mut rows = 0;
    for line in lines {
        let line = line.map_err(|e| Error::parse(CTX, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let before = data.len();
        for tok in line.split_ascii_whitespace() {
            data.push(parse_f64(tok, "transfer entry")?);
        }
        if data.len() - before != d {
            return Err(Error::parse(
                CTX,
                format!("row {} has {} entries, expected {d}", rows + 1, data.len() - before),
            ));
        }
        rows += 1;
    }
    if rows != d {
        return Err(Error::parse(CTX, format!("{rows} rows, expected {d}")));
    }
    KoopmanEstimator::from_transfer(d, rank, reg, dt, data)
}

pub fn save_estimator(path: &Path, est: &KoopmanEstimator) -> Result<()> {
    textio::write_file(path, |w| write_estimator(w, est))
}

pub fn load_estimator(path: &Path) -> Result<KoopmanEstimator> {
    read_estimator(textio::open(path)?)
}

/// CSV with one row per mode; `frequency` is reported as `|omega|`, the sign
/// being carried by `im_lambda`.
pub fn write_spectrum<W: Write + ?Sized>(w: &mut W, summary: &SpectralSummary) -> std::io::Result<()> {
    writeln!(w, "{SPECTRUM_HEADER}")?;
    for m in &summary.modes {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            m.index,
            fmt_csv(m.eigenvalue.re),
            fmt_csv(m.eigenvalue.im),
            fmt_csv(m.abs),
            fmt_csv(m.decay_rate),
            fmt_csv(m.frequency.abs())
        )?;
    }
    Ok(())
}

/// Parses a spectrum CSV back into mode records (frequency as written).
pub fn read_spectrum<R: BufRead>(r: R, dt: f64) -> Result<SpectralSummary> {
    let mut lines = r.lines();
    let head = lines
        .next()
        .ok_or_else(|| Error::parse("spectrum csv", "empty file"))?
        .map_err(|e| Error::parse("spectrum csv", e.to_string()))?;
    if head.trim() != SPECTRUM_HEADER {
        return Err(Error::parse("spectrum csv", format!("unexpected header '{head}'")));
    }
    let mut modes = Vec::new();
    for line in lines {
        let line = line.map_err(|e| Error::parse("spectrum csv", e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 6 {
            return Err(Error::parse("spectrum csv", format!("bad row '{line}'")));
        }
        let re = parse_f64(f[1], "re_lambda")?;
        let im = parse_f64(f[2], "im_lambda")?;
        modes.push(ModeSpectrum {
            index: parse_usize(f[0], "index")?,
            eigenvalue: C64::new(re, im),
            abs: parse_f64(f[3], "abs_lambda")?,
            arg: im.atan2(re),
            decay_rate: parse_f64(f[4], "decay_rate")?,
            frequency: parse_f64(f[5], "frequency")?,
        });
    }
    Ok(SpectralSummary { dt, modes })
}
