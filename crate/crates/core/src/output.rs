//! Deterministic CSV/JSON export.
//!
//! Every CSV starts with `#`-prefixed metadata lines (parameter echo, build
//! id, layer name) followed by one header row. Floats are printed with the
//! shortest round-trip representation, so identical inputs produce
//! byte-identical files.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use ndarray::Array2;
use num_complex::Complex64;

use crate::instanton::{InstantonTrajectory, RateSweepRow};
use crate::model::{RunSettings, WignerGrid};

/// Metadata block shared by all writers.
#[derive(Debug, Clone)]
pub struct Metadata {
    pairs: Vec<(String, String)>,
}

impl Metadata {
    pub fn new(settings: &RunSettings, build_id: &str) -> Self {
        let p = settings.params;
        let g = settings.grid;
        let pairs = vec![
            ("build".into(), build_id.to_string()),
            ("G".into(), format!("{}", p.drive)),
            ("Delta".into(), format!("{}", p.detuning)),
            ("eta".into(), format!("{}", p.eta)),
            ("fock_cutoff".into(), format!("{}", settings.fock_cutoff)),
            (
                "grid".into(),
                format!("[{},{}]x[{},{}] {}x{}", g.x_min, g.x_max, g.p_min, g.p_max, g.nx, g.np),
            ),
            ("seed".into(), format!("{}", settings.seed)),
        ];
        Metadata { pairs }
    }

    pub fn with(mut self, key: &str, value: impl Into<String>) -> Self {
        self.pairs.push((key.to_string(), value.into()));
        self
    }

    fn write(&self, out: &mut impl Write) -> io::Result<()> {
        for (k, v) in &self.pairs {
            writeln!(out, "# {k} = {v}")?;
        }
        Ok(())
    }
}

fn create(path: &Path) -> io::Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

/// `x,p,W` rows over the grid.
pub fn write_wigner_csv(path: &Path, w: &WignerGrid, meta: &Metadata) -> io::Result<()> {
    let mut out = create(path)?;
    meta.write(&mut out)?;
    writeln!(out, "x,p,W")?;
    for i in 0..w.grid.nx {
        for j in 0..w.grid.np {
            writeln!(out, "{},{},{}", w.grid.x_at(i), w.grid.p_at(j), w.value(i, j))?;
        }
    }
    out.flush()
}

/// `x,p,neg_log_W` rows; non-positive or masked samples print as NaN.
pub fn write_neg_log_wigner_csv(path: &Path, w: &WignerGrid, meta: &Metadata) -> io::Result<()> {
    let mut out = create(path)?;
    meta.write(&mut out)?;
    writeln!(out, "x,p,neg_log_W")?;
    for i in 0..w.grid.nx {
        for j in 0..w.grid.np {
            let v = w.value(i, j);
            let nl = if v > 0.0 { -v.ln() } else { f64::NAN };
            writeln!(out, "{},{},{}", w.grid.x_at(i), w.grid.p_at(j), nl)?;
        }
    }
    out.flush()
}

/// `t,re_alpha,im_alpha,re_chi,im_chi,abs_L` along the uphill trajectory.
pub fn write_trajectory_csv(
    path: &Path,
    traj: &InstantonTrajectory,
    meta: &Metadata,
) -> io::Result<()> {
    let mut out = create(path)?;
    meta.write(&mut out)?;
    writeln!(out, "t,re_alpha,im_alpha,re_chi,im_chi,abs_L")?;
    for pt in &traj.points {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            pt.t,
            pt.alpha.re,
            pt.alpha.im,
            pt.chi.re,
            pt.chi.im,
            pt.l_value.norm()
        )?;
    }
    out.flush()
}

/// `G,Delta,eta,ln_rate,ln_rate_critical` table; the critical column is empty
/// outside its validity window.
pub fn write_rate_csv(path: &Path, rows: &[RateSweepRow], meta: &Metadata) -> io::Result<()> {
    let mut out = create(path)?;
    meta.write(&mut out)?;
    writeln!(out, "G,Delta,eta,ln_rate,ln_rate_critical")?;
    for r in rows {
        let crit = r.ln_rate_critical.map(|v| format!("{v}")).unwrap_or_default();
        writeln!(out, "{},{},{},{},{}", r.drive, r.detuning, r.eta, r.ln_rate, crit)?;
    }
    out.flush()
}

/// Generic point-list CSV with a caller-provided header.
pub fn write_points_csv(
    path: &Path,
    header: &str,
    rows: impl Iterator<Item = Vec<f64>>,
    meta: &Metadata,
) -> io::Result<()> {
    let mut out = create(path)?;
    meta.write(&mut out)?;
    writeln!(out, "{header}")?;
    for row in rows {
        let line: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    out.flush()
}

/// Complex matrix as `row,col,re,im` CSV.
pub fn write_matrix_csv(path: &Path, m: &Array2<Complex64>, meta: &Metadata) -> io::Result<()> {
    let mut out = create(path)?;
    meta.write(&mut out)?;
    writeln!(out, "row,col,re,im")?;
    for ((j, k), v) in m.indexed_iter() {
        writeln!(out, "{j},{k},{},{}", v.re, v.im)?;
    }
    out.flush()
}

/// Serialize any value as pretty JSON.
pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> io::Result<()> {
    let mut out = create(path)?;
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
    out.write_all(text.as_bytes())?;
    writeln!(out)?;
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::PhaseGrid;

    #[test]
    fn wigner_csv_is_deterministic() {
        let grid = PhaseGrid::square(1.0, 5).unwrap();
        let w = WignerGrid::from_fn(grid, |x, p| x * p + 0.125);
        let settings = RunSettings { grid, ..Default::default() };
        let meta = Metadata::new(&settings, "test-build").with("layer", "unit");
        let dir = std::env::temp_dir().join("catron-output-test");
        let p1 = dir.join("a.csv");
        let p2 = dir.join("b.csv");
        write_wigner_csv(&p1, &w, &meta).unwrap();
        write_wigner_csv(&p2, &w, &meta).unwrap();
        let a = std::fs::read(&p1).unwrap();
        let b = std::fs::read(&p2).unwrap();
        assert_eq!(a, b);
        let text = String::from_utf8(a).unwrap();
        assert!(text.starts_with("# build = test-build\n"));
        assert!(text.contains("x,p,W"));
        let _ = std::fs::remove_dir_all(&dir);
    }
}
