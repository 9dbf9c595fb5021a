//! On-disk formats: grid dumps, trajectory manifests, CSV emitters.
//!
//! A grid dump is a single JSON header line followed by nx·np little-endian
//! 8-byte floats, row-major with x as the slow index. CSV numbers carry 17
//! significant digits so that parsing them back reproduces the exact f64.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::Method;
use crate::grid::PhaseSpaceGrid;
use crate::smearing::SmearingEnsemble;
use crate::state::WignerState;

#[derive(Debug, Serialize, Deserialize)]
struct DumpHeader {
    nx: usize,
    np: usize,
    x_min: f64,
    x_max: f64,
    p_min: f64,
    p_max: f64,
    time: f64,
    dtype: String,
}

/// Format an f64 with 17 significant digits (exact round trip).
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Write a state in the grid-dump format.
pub fn write_state_dump(state: &WignerState, path: &Path) -> Result<()> {
    let grid = state.grid();
    let header = DumpHeader {
        nx: grid.nx(),
        np: grid.np(),
        x_min: grid.x_min(),
        x_max: grid.x_max(),
        p_min: grid.p_min(),
        p_max: grid.p_max(),
        time: state.time(),
        dtype: "f64le".to_string(),
    };
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer(&mut out, &header)?;
    out.write_all(b"\n")?;
    for v in state.values().iter() {
        out.write_all(&v.to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

/// Read a state back from the grid-dump format.
pub fn read_state_dump(path: &Path) -> Result<WignerState> {
    let mut reader = BufReader::new(File::open(path)?);
    let mut header_line = String::new();
    reader.read_line(&mut header_line)?;
    let header: DumpHeader = serde_json::from_str(header_line.trim_end())?;
    if header.dtype != "f64le" {
        return Err(Error::Contract(format!(
            "unsupported dump dtype: {}",
            header.dtype
        )));
    }
    let grid = PhaseSpaceGrid::new(
        header.nx,
        header.np,
        (header.x_min, header.x_max),
        (header.p_min, header.p_max),
    )?;
    let mut payload = vec![0u8; header.nx * header.np * 8];
    reader.read_exact(&mut payload)?;
    let values: Vec<f64> = payload
        .chunks_exact(8)
        .map(|b| f64::from_le_bytes(b.try_into().expect("8-byte chunk")))
        .collect();
    let values = Array2::from_shape_vec((header.nx, header.np), values)
        .map_err(|e| Error::Contract(format!("dump payload shape: {e}")))?;
    // Dumps of partial runs may carry normalization drift; accept them as-is.
    Ok(WignerState::unchecked(grid, values, header.time))
}

/// Name of the dump file for a given step index.
pub fn snapshot_file_name(step: usize) -> String {
    format!("snap_{step:08}.wig")
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TrajectoryManifest {
    pub dt: f64,
    pub steps: usize,
    pub method: String,
    pub record_every: usize,
    pub hbar: f64,
}

impl TrajectoryManifest {
    pub fn new(dt: f64, steps: usize, method: &Method, record_every: usize, hbar: f64) -> Self {
        Self {
            dt,
            steps,
            method: method.to_string(),
            record_every,
            hbar,
        }
    }

    /// Manifest for the split-operator reference trajectory.
    pub fn oracle(dt: f64, steps: usize, record_every: usize, hbar: f64) -> Self {
        Self {
            dt,
            steps,
            method: "schrodinger_oracle".to_string(),
            record_every,
            hbar,
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut out = BufWriter::new(File::create(path)?);
        serde_json::to_writer(&mut out, self)?;
        out.write_all(b"\n")?;
        out.flush()?;
        Ok(())
    }
}

/// Time series of scalar observables, one row per snapshot.
pub struct ObservablesWriter {
    out: BufWriter<File>,
}

impl ObservablesWriter {
    pub fn create(path: &Path) -> Result<Self> {
        let mut out = BufWriter::new(File::create(path)?);
        writeln!(out, "t,norm,mean_x,mean_p,var_x,var_p,purity")?;
        Ok(Self { out })
    }

    pub fn record(&mut self, state: &WignerState, hbar: f64) -> Result<()> {
        writeln!(
            self.out,
            "{},{},{},{},{},{},{}",
            fmt_f64(state.time()),
            fmt_f64(state.total_mass()),
            fmt_f64(state.mean_x()),
            fmt_f64(state.mean_p()),
            fmt_f64(state.var_x()),
            fmt_f64(state.var_p()),
            fmt_f64(state.purity(hbar)),
        )?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.out.flush()?;
        Ok(())
    }
}

/// Twin-run distance series.
pub struct ComparisonWriter {
    out: BufWriter<File>,
}

impl ComparisonWriter {
    pub fn create(path: &Path) -> Result<Self> {
        let mut out = BufWriter::new(File::create(path)?);
        writeln!(out, "t,l2_distance")?;
        Ok(Self { out })
    }

    pub fn record(&mut self, t: f64, l2_distance: f64) -> Result<()> {
        writeln!(self.out, "{},{}", fmt_f64(t), fmt_f64(l2_distance))?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.out.flush()?;
        Ok(())
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct EnsembleSidecar {
    seed: u64,
    n: usize,
    sigma_xi: f64,
    sigma_eta: f64,
    hbar: f64,
}

/// Write the ensemble as CSV ("xi,eta") plus a JSON metadata sidecar at
/// `<path>.meta.json`.
pub fn write_ensemble_csv(ensemble: &SmearingEnsemble, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "xi,eta")?;
    for &(xi, eta) in ensemble.samples() {
        writeln!(out, "{},{}", fmt_f64(xi), fmt_f64(eta))?;
    }
    out.flush()?;
    let dist = ensemble.distribution();
    let sidecar = EnsembleSidecar {
        seed: ensemble.seed(),
        n: ensemble.len(),
        sigma_xi: dist.sigma_xi(),
        sigma_eta: dist.sigma_eta(),
        hbar: dist.hbar(),
    };
    let sidecar_path = path.with_extension("csv.meta.json");
    let mut meta = BufWriter::new(File::create(sidecar_path)?);
    serde_json::to_writer(&mut meta, &sidecar)?;
    meta.write_all(b"\n")?;
    meta.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::smearing::{make_distribution, sample};
    use crate::state::gaussian_wigner;

    #[test]
    fn dump_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let grid = make_grid(32, 16, (-8.0, 8.0), (-4.0, 4.0)).unwrap();
        let (w, _) = gaussian_wigner(&grid, 0.5, -0.25, 1.0, 0.5, 1.0).unwrap();
        let path = dir.path().join(snapshot_file_name(42));
        write_state_dump(&w, &path).unwrap();
        let back = read_state_dump(&path).unwrap();
        assert_eq!(back.grid(), w.grid());
        assert_eq!(back.values(), w.values());
        assert_eq!(back.time(), w.time());
    }

    #[test]
    fn dump_header_is_a_single_json_line() {
        let dir = tempfile::tempdir().unwrap();
        let grid = make_grid(16, 16, (-8.0, 8.0), (-4.0, 4.0)).unwrap();
        let (w, _) = gaussian_wigner(&grid, 0.0, 0.0, 1.0, 0.5, 1.0).unwrap();
        let path = dir.path().join("state.wig");
        write_state_dump(&w, &path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        let newline = bytes.iter().position(|&b| b == b'\n').unwrap();
        let header: serde_json::Value =
            serde_json::from_slice(&bytes[..newline]).unwrap();
        assert_eq!(header["nx"], 16);
        assert_eq!(header["dtype"], "f64le");
        assert_eq!(bytes.len() - newline - 1, 16 * 16 * 8);
    }

    #[test]
    fn seventeen_digit_floats_round_trip() {
        for v in [std::f64::consts::PI, -1.0 / 3.0, 1e-300, 6.02e23] {
            let s = fmt_f64(v);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back, v, "{s}");
        }
    }

    #[test]
    fn ensemble_csv_and_sidecar() {
        let dir = tempfile::tempdir().unwrap();
        let d = make_distribution(0.7, 1.0).unwrap();
        let e = sample(&d, 10, 3).unwrap();
        let path = dir.path().join("ensemble.csv");
        write_ensemble_csv(&e, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("xi,eta\n"));
        assert_eq!(text.lines().count(), 11);
        let meta: serde_json::Value = serde_json::from_str(
            &std::fs::read_to_string(dir.path().join("ensemble.csv.meta.json")).unwrap(),
        )
        .unwrap();
        assert_eq!(meta["n"], 10);
        assert_eq!(meta["seed"], 3);
    }
}
