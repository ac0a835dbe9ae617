//! Trajectory text file.
//!
//! ```text
//! # koopspin trajectory
//! N = 5
//! J_par = ...
//! J_perp = ...
//! gamma = ...
//! dt = ...
//! steps = 200
//! substeps = 50
//! initial_label = d,u,u,u,u
//! basis_order = IXYZ-lex-site1-major
//! end_header
//! <time> <c_0> ... <c_{4^N - 1}>
//! ```

use std::io::{BufRead, Write};
use std::path::Path;

use super::integrate::Trajectory;
use super::params::SpinChainParams;
use crate::algebra::BASIS_ORDER;
use crate::error::{Error, Result};
use crate::textio::{self, fmt_exact, header_value, parse_f64, parse_usize};

const END: &str = "end_header";
const CTX: &str = "trajectory file";

pub fn write_trajectory<W: Write + ?Sized>(w: &mut W, traj: &Trajectory) -> std::io::Result<()> {
    let p = &traj.params;
    writeln!(w, "# koopspin trajectory")?;
    writeln!(w, "N = {}", p.n)?;
    writeln!(w, "J_par = {}", fmt_exact(p.j_par))?;
    writeln!(w, "J_perp = {}", fmt_exact(p.j_perp))?;
    writeln!(w, "gamma = {}", fmt_exact(p.gamma))?;
    writeln!(w, "dt = {}", fmt_exact(p.dt))?;
    writeln!(w, "steps = {}", p.steps)?;
    writeln!(w, "substeps = {}", p.substeps)?;
    writeln!(w, "initial_label = {}", traj.initial_label)?;
    writeln!(w, "basis_order = {BASIS_ORDER}")?;
    writeln!(w, "{END}")?;
    let mut line = String::new();
    for (t, state) in traj.times.iter().zip(&traj.states) {
        line.clear();
        line.push_str(&fmt_exact(*t));
        for c in state {
            line.push(' ');
            line.push_str(&fmt_exact(*c));
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}

pub fn read_trajectory<R: BufRead>(r: R) -> Result<Trajectory> {
    let mut lines = r.lines();
    let header = textio::read_header(&mut lines, END, CTX)?;
    let get = |k| header_value(&header, k, CTX);
    let basis = get("basis_order")?;
    if basis != BASIS_ORDER {
        return Err(Error::parse(CTX, format!("unsupported basis_order '{basis}'")));
    }
    let params = SpinChainParams {
        n: parse_usize(get("N")?, "N")?,
        j_par: parse_f64(get("J_par")?, "J_par")?,
        j_perp: parse_f64(get("J_perp")?, "J_perp")?,
        gamma: parse_f64(get("gamma")?, "gamma")?,
        dt: parse_f64(get("dt")?, "dt")?,
        steps: parse_usize(get("steps")?, "steps")?,
        substeps: parse_usize(get("substeps")?, "substeps")?,
    };
    params.validate()?;
    let initial_label = get("initial_label")?.to_string();
    let width = params.feature_dim();

    let mut times = Vec::with_capacity(params.steps);
    let mut states = Vec::with_capacity(params.steps);
    for (row, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::parse(CTX, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let mut tok = line.split_ascii_whitespace();
        let t = parse_f64(tok.next().unwrap_or(""), "snapshot time")?;
        let state = tok
            .map(|s| parse_f64(s, "snapshot coefficient"))
            .collect::<Result<Vec<_>>>()?;
        if state.len() != width {
            return Err(Error::parse(
                CTX,
                format!("record {} has {} coefficients, expected {width}", row + 1, state.len()),
            ));
        }
        times.push(t);
        states.push(state);
    }
    if states.len() != params.steps {
        return Err(Error::parse(
            CTX,
            format!("{} records but steps = {}", states.len(), params.steps),
        ));
    }
    Ok(Trajectory {
        params,
        initial_label,
        times,
        states,
    })
}

pub fn save_trajectory(path: &Path, traj: &Trajectory) -> Result<()> {
    textio::write_file(path, |w| write_trajectory(w, traj))
}

pub fn load_trajectory(path: &Path) -> Result<Trajectory> {
    read_trajectory(textio::open(path)?)
}
