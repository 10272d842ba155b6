//! Output bundle: one directory per scenario holding CSV tables, JSON
//! summaries and optional binary field snapshots.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::Context;
use nls_core::effective::Trajectory;
use nls_core::grid::{write_snapshot, ComplexField};
use nls_core::modulation::ModulationTrack;
use nls_core::solver::{Diagnostics, MomentumLaw};
use serde::{Deserialize, Serialize};

pub const MANIFEST: &str = "manifest.json";
pub const DIAGNOSTICS: &str = "diagnostics.csv";
pub const TRACK: &str = "track.csv";
pub const TRAJECTORY: &str = "trajectory.csv";
pub const PROFILE: &str = "profile.csv";
pub const PREDICTION: &str = "prediction.json";
pub const COMPARISON: &str = "comparison.json";
pub const REPORT: &str = "report.json";

pub const DIAGNOSTICS_HEADER: [&str; 9] = ["t", "M", "Ea", "P1", "P2", "dPdt_rhs", "law_residual", "edge_mass", "spectral_tail"];
pub const TRACK_HEADER: [&str; 7] = ["t", "c", "v", "rho", "gamma", "fit_residual", "remainder_h1"];
pub const TRAJECTORY_HEADER: [&str; 6] = ["t", "C", "V", "U", "H", "invariant_drift"];
pub const PROFILE_HEADER: [&str; 5] = ["y", "A1", "B1", "A2", "B2"];

/// Shortest round-trip representation, so identical runs give identical files.
fn num(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        format!("{x:e}")
    }
}

pub struct Bundle {
    pub dir: PathBuf,
    files: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub name: String,
    pub kind: String,
    pub version: String,
    pub passed: bool,
    pub files: Vec<String>,
    pub config: serde_json::Value,
    pub resolved: serde_json::Value,
}

impl Bundle {
    pub fn create(dir: &Path) -> anyhow::Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Bundle { dir: dir.to_path_buf(), files: Vec::new() })
    }

    pub fn files(&self) -> &[String] {
        &self.files
    }

    fn writer(&mut self, name: &str) -> anyhow::Result<csv::Writer<File>> {
        self.files.push(name.to_string());
        let path = self.dir.join(name);
        csv::Writer::from_path(&path).with_context(|| format!("opening {}", path.display()))
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> anyhow::Result<()> {
        self.files.push(name.to_string());
        let path = self.dir.join(name);
        let text = serde_json::to_string_pretty(value)?;
        fs::write(&path, text + "\n").with_context(|| format!("writing {}", path.display()))
    }

    pub fn write_diagnostics(&mut self, diag: &Diagnostics, law: Option<&MomentumLaw>) -> anyhow::Result<()> {
        let mut w = self.writer(DIAGNOSTICS)?;
        w.write_record(DIAGNOSTICS_HEADER)?;
        for i in 0..diag.len() {
            let t = diag.times[i];
            let res = law
                .and_then(|l| l.times.iter().position(|&s| s == t).map(|j| l.residual[j]))
                .unwrap_or(f64::NAN);
            w.write_record([
                num(t),
                num(diag.mass[i]),
                num(diag.energy[i]),
                num(diag.momentum[i][0]),
                num(diag.momentum[i][1]),
                num(diag.momentum_rhs[i]),
                num(res),
                num(diag.edge_mass[i]),
                num(diag.spectral_tail[i]),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_track(&mut self, track: &ModulationTrack) -> anyhow::Result<()> {
        let mut w = self.writer(TRACK)?;
        w.write_record(TRACK_HEADER)?;
        for i in 0..track.len() {
            let p = &track.params[i];
            w.write_record([
                num(track.times[i]),
                num(p.c),
                num(p.v),
                num(p.rho),
                num(p.gamma),
                num(track.fit_residuals[i]),
                num(track.remainder_h1[i]),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_trajectory(&mut self, traj: &Trajectory) -> anyhow::Result<()> {
        let mut w = self.writer(TRAJECTORY)?;
        w.write_record(TRAJECTORY_HEADER)?;
        for ((t, s), d) in traj.t.iter().zip(&traj.states).zip(&traj.invariant_drift) {
            w.write_record([num(*t), num(s.c), num(s.v), num(s.u), num(s.h), num(*d)])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Columns `y, A1, B1, A2, B2`; missing second-order columns are written as zeros.
    pub fn write_profile(&mut self, y: &[f64], cols: [&[f64]; 4]) -> anyhow::Result<()> {
        let mut w = self.writer(PROFILE)?;
        w.write_record(PROFILE_HEADER)?;
        for (j, &yj) in y.iter().enumerate() {
            let get = |c: &[f64]| c.get(j).copied().unwrap_or(0.0);
            w.write_record([num(yj), num(get(cols[0])), num(get(cols[1])), num(get(cols[2])), num(get(cols[3]))])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Generic table with a header row.
    pub fn write_table(&mut self, name: &str, header: &[&str], rows: &[Vec<f64>]) -> anyhow::Result<()> {
        let mut w = self.writer(name)?;
        w.write_record(header)?;
        for r in rows {
            w.write_record(r.iter().map(|x| num(*x)))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_snapshot(&mut self, index: usize, field: &ComplexField) -> anyhow::Result<()> {
        let name = format!("snapshot_{index:05}.nlsf");
        let path = self.dir.join(&name);
        let f = BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?);
        write_snapshot(f, field)?;
        self.files.push(name);
        Ok(())
    }

    /// Written last; lists every file of the bundle.
    pub fn finish(mut self, mut manifest: Manifest) -> anyhow::Result<PathBuf> {
        manifest.files = std::mem::take(&mut self.files);
        manifest.files.push(MANIFEST.into());
        let path = self.dir.join(MANIFEST);
        fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")?;
        Ok(self.dir)
    }
}

/// Read a bundle CSV into its header and numeric rows (empty cells become NaN).
pub fn read_table(path: &Path) -> anyhow::Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let header = r.headers()?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|s| if s.is_empty() { Ok(f64::NAN) } else { s.parse::<f64>() })
            .collect::<Result<Vec<_>, _>>()
            .with_context(|| format!("bad number in {}", path.display()))?;
        rows.push(row);
    }
    Ok((header, rows))
}

pub fn read_manifest(dir: &Path) -> anyhow::Result<Manifest> {
    let text = fs::read_to_string(dir.join(MANIFEST))?;
    Ok(serde_json::from_str(&text)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nls_core::soliton::SolitonParams;

    #[test]
    fn track_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut b = Bundle::create(dir.path()).unwrap();
        let mut tr = ModulationTrack::default();
        for k in 0..3 {
            tr.times.push(k as f64 * 0.1);
            tr.params.push(SolitonParams::new(3.0, 1.0 + k as f64, 0.5, -1.0 / 3.0));
            tr.fit_residuals.push(1e-12);
            tr.remainder_h1.push(f64::NAN);
        }
        b.write_track(&tr).unwrap();
        let (h, rows) = read_table(&dir.path().join(TRACK)).unwrap();
        assert_eq!(h, TRACK_HEADER);
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[1][0], 0.1);
        assert_eq!(rows[2][1], 3.0);
        assert_eq!(rows[0][3], -1.0 / 3.0);
        assert!(rows[0][6].is_nan());
    }

    #[test]
    fn manifest_lists_files() {
        let dir = tempfile::tempdir().unwrap();
        let mut b = Bundle::create(dir.path()).unwrap();
        b.write_json(PREDICTION, &serde_json::json!({"c_inf": 4.0})).unwrap();
        b.write_table("x.csv", &["a", "b"], &[vec![1.0, 2.0]]).unwrap();
        let m = Manifest {
            name: "n".into(),
            kind: "k".into(),
            version: "0".into(),
            passed: true,
            files: vec![],
            config: serde_json::Value::Null,
            resolved: serde_json::Value::Null,
        };
        b.finish(m).unwrap();
        let back = read_manifest(dir.path()).unwrap();
        assert_eq!(back.files, [PREDICTION, "x.csv", MANIFEST]);
    }
}
