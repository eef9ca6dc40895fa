//! File formats: CSV series, bath JSON, binary state dumps.

use std::fs;
use std::path::Path;

use noiseharvest_core::bath::{ClosedBath, Parity, PseudomodeBath};
use noiseharvest_core::lindblad::{Component, GreenSeries, Provenance};
use noiseharvest_core::measurement::GFEstimate;
use noiseharvest_core::simulator::{state_from_bytes, state_to_bytes, DensityMatrix};
use noiseharvest_core::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{HarvestError, Result};

/// Writes through a temporary sibling and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(HarvestError::io(dir))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    fs::write(&tmp, bytes).map_err(HarvestError::io(&tmp))?;
    fs::rename(&tmp, path).map_err(HarvestError::io(path))
}

fn csv_bytes(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<Vec<u8>> {
    let err = |source| HarvestError::Csv { path: path.to_path_buf(), source };
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(err)?;
    for r in rows {
        w.write_record(r).map_err(err)?;
    }
    w.into_inner().map_err(|e| HarvestError::Io { path: path.to_path_buf(), source: e.into_error() })
}

/// Plain CSV table.
pub fn write_table(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    write_atomic(path, &csv_bytes(path, header, rows)?)
}

fn read_rows(path: &Path, header: &[&str]) -> Result<Vec<csv::StringRecord>> {
    let err = |source| HarvestError::Csv { path: path.to_path_buf(), source };
    let mut r = csv::Reader::from_path(path).map_err(err)?;
    let found = r.headers().map_err(err)?.clone();
    if found.iter().ne(header.iter().copied()) {
        return Err(HarvestError::Config(format!("{}: expected header {:?}", path.display(), header.join(","))));
    }
    r.records().collect::<std::result::Result<_, _>>().map_err(err)
}

fn num(path: &Path, s: &str) -> Result<f64> {
    s.parse().map_err(|_| HarvestError::Config(format!("{}: bad number {s:?}", path.display())))
}

pub const SERIES_HEADER: [&str; 5] = ["t", "re", "im", "component", "provenance"];
pub const FREQ_HEADER: [&str; 3] = ["omega", "re", "im"];
pub const RESULTS_HEADER: [&str; 6] = ["t", "re", "im", "stderr_re", "stderr_im", "mode"];

pub fn write_series(path: &Path, s: &GreenSeries) -> Result<()> {
    let rows: Vec<Vec<String>> = s
        .times
        .iter()
        .zip(&s.values)
        .map(|(t, z)| vec![t.to_string(), z.re.to_string(), z.im.to_string(), s.component.label().into(), s.provenance.label().into()])
        .collect();
    write_table(path, &SERIES_HEADER, &rows)
}

pub fn read_series(path: &Path) -> Result<GreenSeries> {
    let rows = read_rows(path, &SERIES_HEADER)?;
    let bad = |what: &str| HarvestError::Config(format!("{}: unknown {what}", path.display()));
    let mut times = Vec::with_capacity(rows.len());
    let mut values = Vec::with_capacity(rows.len());
    let mut component = Component::Greater;
    let mut provenance = Provenance::Circuit;
    for r in &rows {
        times.push(num(path, &r[0])?);
        values.push(Complex64::new(num(path, &r[1])?, num(path, &r[2])?));
        component = Component::from_label(&r[3]).ok_or_else(|| bad("component"))?;
        provenance = Provenance::from_label(&r[4]).ok_or_else(|| bad("provenance"))?;
    }
    Ok(GreenSeries::new(times, values, component, provenance)?)
}

pub fn write_freq(path: &Path, omegas: &[f64], values: &[Complex64]) -> Result<()> {
    let rows: Vec<Vec<String>> = omegas.iter().zip(values).map(|(w, z)| vec![w.to_string(), z.re.to_string(), z.im.to_string()]).collect();
    write_table(path, &FREQ_HEADER, &rows)
}

pub fn write_results(path: &Path, estimates: &[GFEstimate]) -> Result<()> {
    let rows: Vec<Vec<String>> = estimates
        .iter()
        .map(|e| {
            let (sr, si) = match e.stderr {
                Some([a, b]) => (a.to_string(), b.to_string()),
                None => (String::new(), String::new()),
            };
            vec![e.t.to_string(), e.value.re.to_string(), e.value.im.to_string(), sr, si, e.mode.label().into()]
        })
        .collect();
    write_table(path, &RESULTS_HEADER, &rows)
}

/// Bath document shared by pseudomode and closed baths; closed baths have rate 0 and no parities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathJson {
    pub energies: Vec<f64>,
    pub couplings: Vec<f64>,
    pub rate: f64,
    pub parity: Vec<String>,
}

impl From<&PseudomodeBath> for BathJson {
    fn from(b: &PseudomodeBath) -> Self {
        BathJson {
            energies: b.energies.clone(),
            couplings: b.couplings.clone(),
            rate: b.rate,
            parity: b.parity.iter().map(|p| p.label().to_string()).collect(),
        }
    }
}

impl From<&ClosedBath> for BathJson {
    fn from(b: &ClosedBath) -> Self {
        BathJson { energies: b.energies.clone(), couplings: b.couplings.clone(), rate: 0.0, parity: Vec::new() }
    }
}

impl BathJson {
    pub fn to_pseudomode(&self) -> Result<PseudomodeBath> {
        let parity = self
            .parity
            .iter()
            .map(|s| Parity::from_label(s).ok_or_else(|| HarvestError::Config(format!("unknown parity {s:?}"))))
            .collect::<Result<Vec<_>>>()?;
        Ok(PseudomodeBath::new(self.energies.clone(), self.couplings.clone(), self.rate, parity)?)
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

pub fn read_bath(path: &Path) -> Result<BathJson> {
    let text = fs::read_to_string(path).map_err(HarvestError::io(path))?;
    serde_json::from_str(&text).map_err(|e| HarvestError::Config(format!("{}: {e}", path.display())))
}

pub fn write_state(path: &Path, rho: &DensityMatrix) -> Result<()> {
    write_atomic(path, &state_to_bytes(rho))
}

pub fn read_state(path: &Path) -> Result<DensityMatrix> {
    let bytes = fs::read(path).map_err(HarvestError::io(path))?;
    Ok(state_from_bytes(&bytes)?)
}
