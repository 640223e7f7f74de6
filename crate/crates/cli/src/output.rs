//! Plain CSV writers: one header line, '.' decimals, 17 significant digits.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::Serialize;
use wwlab::modes::{FullState, ModeSet};
use wwlab::volterra::AmplitudeTrace;

fn create(path: &Path) -> io::Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

/// Times are written in the caller's units (`time_unit` multiplies the
/// solver's dimensionless time).
pub fn write_trace(path: &Path, trace: &AmplitudeTrace, time_unit: f64) -> io::Result<()> {
    let mut w = create(path)?;
    writeln!(w, "t,re_c,im_c,norm_sq")?;
    for ((t, c), n) in trace.times.iter().zip(&trace.c_e).zip(&trace.norm_sq) {
        writeln!(w, "{:.16e},{:.16e},{:.16e},{:.16e}", t * time_unit, c.re, c.im, n)?;
    }
    w.flush()
}

pub fn write_kernel(path: &Path, rows: &[(f64, Complex64)]) -> io::Result<()> {
    let mut w = create(path)?;
    writeln!(w, "tau,re,im")?;
    for (tau, k) in rows {
        writeln!(w, "{:.16e},{:.16e},{:.16e}", tau, k.re, k.im)?;
    }
    w.flush()
}

pub fn write_spectrum(path: &Path, modes: &ModeSet, state: &FullState, freq_unit: f64) -> io::Result<()> {
    let mut w = create(path)?;
    writeln!(w, "omega,coupling_sq,population,density")?;
    let density = state.spectral_density(modes);
    for j in 0..modes.count() {
        writeln!(
            w,
            "{:.16e},{:.16e},{:.16e},{:.16e}",
            modes.omegas[j] * freq_unit,
            modes.weights[j],
            state.c_g[j].norm_sqr(),
            density[j]
        )?;
    }
    w.flush()
}

pub fn write_rows(path: &Path, header: &str, rows: &[Vec<f64>]) -> io::Result<()> {
    let mut w = create(path)?;
    writeln!(w, "{header}")?;
    for row in rows {
        let line: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    w.flush()
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> io::Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()
}
