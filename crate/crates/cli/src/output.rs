//! Atomic result files. Every file is written to a temporary sibling and
//! renamed into place, so readers never see a partial file.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use tempfile::NamedTempFile;

use crate::error::CliError;

/// Shortest decimal that parses back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

pub struct OutputDir {
    root: PathBuf,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(root).map_err(|e| CliError::io(root, e))?;
        Ok(OutputDir {
            root: root.to_path_buf(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    fn write_with(
        &self,
        name: &str,
        fill: impl FnOnce(&mut NamedTempFile) -> Result<(), CliError>,
    ) -> Result<PathBuf, CliError> {
        let target = self.path(name);
        let mut tmp = NamedTempFile::new_in(&self.root).map_err(|e| CliError::io(&self.root, e))?;
        fill(&mut tmp)?;
        tmp.as_file().sync_all().map_err(|e| CliError::io(&target, e))?;
        tmp.persist(&target)
            .map_err(|e| CliError::io(&target, e.error))?;
        Ok(target)
    }

    pub fn write_bytes(&self, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
        let target = self.path(name);
        self.write_with(name, |f| f.write_all(bytes).map_err(|e| CliError::io(&target, e)))
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<PathBuf, CliError> {
        let mut text = serde_json::to_string_pretty(value).expect("report types serialize");
        text.push('\n');
        self.write_bytes(name, text.as_bytes())
    }

    /// Writes a header and rows of already formatted cells.
    pub fn write_csv(
        &self,
        name: &str,
        header: &[String],
        rows: impl IntoIterator<Item = Vec<String>>,
    ) -> Result<PathBuf, CliError> {
        self.write_with(name, |f| {
            let mut w = csv::Writer::from_writer(f);
            w.write_record(header)?;
            for row in rows {
                w.write_record(&row)?;
            }
            w.flush().map_err(|e| CliError::io(self.path(name), e))?;
            Ok(())
        })
    }
}

pub const PLOT_TRAJECTORY: &str = r#"#!/usr/bin/env python3
"""Loss and gradient-norm curves from trajectory.csv."""
import csv
import pathlib
import matplotlib.pyplot as plt

here = pathlib.Path(__file__).resolve().parent
with open(here / "trajectory.csv") as f:
    rows = list(csv.DictReader(f))
t = [int(r["t"]) for r in rows]
fig, (a, b) = plt.subplots(1, 2, figsize=(10, 4))
a.plot(t, [float(r["loss_x"]) for r in rows], label="f (x player)")
a.plot(t, [float(r["loss_y"]) for r in rows], label="g (y player)")
a.set_xlabel("step")
a.set_ylabel("loss")
a.legend()
b.semilogy(t, [float(r["grad_x_norm"]) for r in rows], label="|grad_x f|")
b.semilogy(t, [float(r["grad_y_norm"]) for r in rows], label="|grad_y g|")
b.set_xlabel("step")
b.legend()
fig.tight_layout()
fig.savefig(here / "trajectory.png", dpi=150)
"#;

pub const PLOT_SPECTRUM: &str = r#"#!/usr/bin/env python3
"""Eigenvalues of V', D2xx f, D2yy f and the linearized map from eigenvalues.csv."""
import csv
import pathlib
import matplotlib.pyplot as plt

here = pathlib.Path(__file__).resolve().parent
with open(here / "eigenvalues.csv") as f:
    rows = list(csv.DictReader(f))
fig, axes = plt.subplots(1, 2, figsize=(10, 4))
for name in ("dxx", "dyy"):
    vals = sorted(float(r["re"]) for r in rows if r["matrix"] == name)
    axes[0].plot(range(len(vals)), vals, "o", label=name)
axes[0].axhline(0.0, color="k", lw=0.5)
axes[0].set_xlabel("index")
axes[0].set_ylabel("eigenvalue")
axes[0].legend()
for name in ("vprime", "a"):
    pts = [(float(r["re"]), float(r["im"])) for r in rows if r["matrix"] == name]
    axes[1].plot([p[0] for p in pts], [p[1] for p in pts], "x", label=name)
axes[1].axvline(0.0, color="k", lw=0.5)
axes[1].set_xlabel("Re")
axes[1].set_ylabel("Im")
axes[1].legend()
fig.tight_layout()
fig.savefig(here / "spectrum.png", dpi=150)
"#;

pub const PLOT_SWEEP: &str = r#"#!/usr/bin/env python3
"""Predicted and fitted contraction rates against step size from sweep.csv."""
import csv
import pathlib
import matplotlib.pyplot as plt

here = pathlib.Path(__file__).resolve().parent
with open(here / "sweep.csv") as f:
    rows = list(csv.DictReader(f))
h = [float(r["h"]) for r in rows]
fig, ax = plt.subplots(figsize=(6, 4))
ax.plot(h, [float(r["predicted_rate"]) for r in rows], "o-", label="spectral radius")
ax.plot(h, [float(r["empirical_rate"]) for r in rows], "x--", label="fitted rate")
ax.axhline(1.0, color="k", lw=0.5)
ax.set_xscale("log")
ax.set_yscale("log")
ax.set_xlabel("step size h")
ax.legend()
fig.tight_layout()
fig.savefig(here / "sweep.png", dpi=150)
"#;

pub const PLOT_BENCH: &str = r#"#!/usr/bin/env python3
"""Mean per-step time per rule from bench.csv."""
import csv
import pathlib
import matplotlib.pyplot as plt

here = pathlib.Path(__file__).resolve().parent
with open(here / "bench.csv") as f:
    rows = list(csv.DictReader(f))
fig, ax = plt.subplots(figsize=(6, 4))
ax.bar([r["rule"] for r in rows], [float(r["mean_us"]) for r in rows])
ax.set_ylabel("mean step time (us)")
fig.tight_layout()
fig.savefig(here / "bench.png", dpi=150)
"#;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for v in [0.1, 1.0 / 3.0, 1e-300, 2.5e17, -0.0, 7.0] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
        assert_eq!(fmt_f64(0.1), "0.1");
        assert_eq!(fmt_f64(f64::NAN), "NaN");
    }

    #[test]
    fn writes_are_atomic_renames() {
        let dir = tempfile::tempdir().unwrap();
        let out = OutputDir::create(&dir.path().join("nested")).unwrap();
        let p = out
            .write_csv("a.csv", &["x".into()], vec![vec!["1.0".into()]])
            .unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "x\n1.0\n");
        out.write_bytes("a.csv", b"y\n").unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "y\n");
        assert_eq!(std::fs::read_dir(dir.path().join("nested")).unwrap().count(), 1);
    }
}
