//! File formats: bath and fit-report JSON, α grid, η table and J grid CSV.
//!
//! Floats are written with 17 significant digits, so every file reads back to
//! the exact values that were written.

use std::fs;
use std::io::Write;
use std::path::Path;

use anadif::bath::{AlphaGrid, Provenance};
use anadif::eta::{quapi_counter_term, EtaTable, Splitting, StrangEdges};
use anadif::expfit::FitReport;
use anadif::model::ExpTerm;
use anadif::{Complex64, ExponentialBath};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let io = |e: std::io::Error| CliError::Usage(format!("cannot write {}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexJson {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for ComplexJson {
    fn from(z: Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

impl From<ComplexJson> for Complex64 {
    fn from(z: ComplexJson) -> Self {
        Complex64::new(z.re, z.im)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermJson {
    pub p: ComplexJson,
    pub omega: ComplexJson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathJson {
    pub terms: Vec<TermJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_hbar_ps: Option<f64>,
}

impl BathJson {
    pub fn new(bath: &ExponentialBath, beta_hbar_ps: Option<f64>) -> Self {
        Self {
            terms: bath
                .terms()
                .iter()
                .map(|t| TermJson {
                    p: t.p.into(),
                    omega: t.omega.into(),
                })
                .collect(),
            beta_hbar_ps,
        }
    }

    pub fn bath(&self) -> Result<ExponentialBath, CliError> {
        let terms = self
            .terms
            .iter()
            .map(|t| ExpTerm::new(t.p.into(), t.omega.into()))
            .collect();
        Ok(ExponentialBath::new(terms)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralCheckJson {
    pub max_rel_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitReportJson {
    pub bath: BathJson,
    pub rms_residual: f64,
    pub max_residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub spectral_check: Option<SpectralCheckJson>,
}

impl FitReportJson {
    pub fn new(report: &FitReport, beta_hbar_ps: Option<f64>) -> Self {
        Self {
            bath: BathJson::new(&report.bath, beta_hbar_ps),
            rms_residual: report.rms_residual,
            max_residual: report.max_residual,
            iterations: report.iterations,
            converged: report.converged,
            spectral_check: report.spectral_check.map(|c| SpectralCheckJson {
                max_rel_err: c.max_rel_err,
            }),
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum AnyBath {
    Bath(BathJson),
    Report(FitReportJson),
}

/// Reads a bath file, or the bath inside a fit report.
pub fn read_bath(path: &Path) -> Result<BathJson, CliError> {
    let text = read_text(path)?;
    parse_bath(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

pub fn parse_bath(text: &str) -> Result<BathJson, CliError> {
    // untagged enums hide the position of the error, so try the plain form first
    match serde_json::from_str::<BathJson>(text) {
        Ok(b) => Ok(b),
        Err(first) => match serde_json::from_str::<AnyBath>(text) {
            Ok(AnyBath::Bath(b)) | Ok(AnyBath::Report(FitReportJson { bath: b, .. })) => Ok(b),
            Err(_) => Err(CliError::Usage(format!("bath JSON: {first}"))),
        },
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

pub const ALPHA_HEADER: [&str; 3] = ["t_ps", "re_alpha", "im_alpha"];

pub fn alpha_csv(grid: &AlphaGrid) -> String {
    let mut out = ALPHA_HEADER.join(",");
    out.push('\n');
    for (t, v) in grid.times().iter().zip(grid.values()) {
        out.push_str(&format!("{},{},{}\n", num(*t), num(v.re), num(v.im)));
    }
    out
}

fn csv_error(what: &str, e: csv::Error) -> CliError {
    let at = e
        .position()
        .map(|p| format!(" (line {})", p.line()))
        .unwrap_or_default();
    CliError::Usage(format!("{what}{at}: {e}"))
}

fn parse_field(field: &str, line: u64, name: &str) -> Result<f64, CliError> {
    field
        .trim()
        .parse::<f64>()
        .map_err(|_| CliError::Usage(format!("line {line}: {name} is not a number: {field:?}")))
}

pub fn parse_alpha_csv(text: &str, provenance: Provenance) -> Result<AlphaGrid, CliError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let header = rdr
        .headers()
        .map_err(|e| csv_error("alpha CSV", e))?
        .clone();
    if header.iter().map(str::trim).ne(ALPHA_HEADER) {
        return Err(CliError::Usage(format!(
            "line 1: alpha CSV header must be {}",
            ALPHA_HEADER.join(",")
        )));
    }
    let mut times = Vec::new();
    let mut values = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_error("alpha CSV", e))?;
        let line = rec.position().map_or(0, |p| p.line());
        times.push(parse_field(&rec[0], line, "t_ps")?);
        values.push(Complex64::new(
            parse_field(&rec[1], line, "re_alpha")?,
            parse_field(&rec[2], line, "im_alpha")?,
        ));
    }
    AlphaGrid::new(times, values, provenance)
        .map_err(|e| CliError::Usage(format!("alpha CSV: {e}")))
}

fn splitting_name(s: Splitting) -> &'static str {
    match s {
        Splitting::Trotter => "trotter",
        Splitting::Strang => "strang",
    }
}

pub fn eta_csv(table: &EtaTable) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "# splitting={}\n",
        splitting_name(table.splitting)
    ));
    out.push_str(&format!("# dt_ps={}\n", num(table.dt)));
    out.push_str(&format!("# n_steps={}\n", table.n_steps));
    match table.quapi_lambda {
        Some(l) => out.push_str(&format!("# quapi_lambda={}\n", num(l))),
        None => out.push_str("# quapi_lambda=none\n"),
    }
    out.push_str("kind,index,re,im\n");
    let mut row = |kind: &str, index: usize, z: Complex64| {
        out.push_str(&format!("{kind},{index},{},{}\n", num(z.re), num(z.im)));
    };
    row("self", 0, table.self_coeff);
    for (i, z) in table.interior.iter().enumerate() {
        row("interior", i + 1, *z);
    }
    if let Some(e) = &table.edges {
        row("edge_00", 0, e.eta_00);
        row("edge_N0", 0, e.eta_n0);
        for (i, z) in e.eta_k0.iter().enumerate() {
            row("edge_k0", i + 1, *z);
        }
        for (i, z) in e.eta_nk.iter().enumerate() {
            row("edge_Nk", i + 1, *z);
        }
    }
    out
}

pub fn parse_eta_csv(text: &str) -> Result<EtaTable, CliError> {
    let bad = |line: usize, msg: String| CliError::Usage(format!("eta CSV line {line}: {msg}"));
    let mut splitting = None;
    let mut dt = None;
    let mut n_steps = None;
    let mut quapi: Option<Option<f64>> = None;
    let mut header_seen = false;
    let mut self_coeff = None;
    let mut interior = Vec::new();
    let (mut e00, mut en0) = (None, None);
    let (mut k0, mut nk) = (Vec::new(), Vec::new());

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let l = raw.trim();
        if l.is_empty() {
            continue;
        }
        if let Some(meta) = l.strip_prefix('#') {
            let (key, value) = meta
                .trim()
                .split_once('=')
                .ok_or_else(|| bad(line, format!("expected key=value, got {meta:?}")))?;
            let value = value.trim();
            let float = |v: &str| {
                v.parse::<f64>()
                    .map_err(|_| bad(line, format!("{key} is not a number")))
            };
            match key.trim() {
                "splitting" => {
                    splitting = Some(match value {
                        "trotter" => Splitting::Trotter,
                        "strang" => Splitting::Strang,
                        other => return Err(bad(line, format!("unknown splitting {other:?}"))),
                    })
                }
                "dt_ps" => dt = Some(float(value)?),
                "n_steps" => {
                    n_steps = Some(
                        value
                            .parse::<usize>()
                            .map_err(|_| bad(line, "n_steps is not an integer".into()))?,
                    )
                }
                "quapi_lambda" => {
                    quapi = Some(if value == "none" {
                        None
                    } else {
                        Some(float(value)?)
                    })
                }
                other => return Err(bad(line, format!("unknown header key {other:?}"))),
            }
            continue;
        }
        if !header_seen {
            if l != "kind,index,re,im" {
                return Err(bad(line, "expected column header kind,index,re,im".into()));
            }
            header_seen = true;
            continue;
        }
        let f: Vec<&str> = l.split(',').collect();
        if f.len() != 4 {
            return Err(bad(line, format!("expected 4 fields, got {}", f.len())));
        }
        let index: usize = f[1]
            .trim()
            .parse()
            .map_err(|_| bad(line, "index is not an integer".into()))?;
        let z = Complex64::new(
            parse_field(f[2], line as u64, "re")?,
            parse_field(f[3], line as u64, "im")?,
        );
        let push_indexed = |v: &mut Vec<Complex64>, what: &str| {
            if index != v.len() + 1 {
                return Err(bad(line, format!("{what} index {index} out of order")));
            }
            v.push(z);
            Ok(())
        };
        match f[0].trim() {
            "self" => self_coeff = Some(z),
            "interior" => push_indexed(&mut interior, "interior")?,
            "edge_00" => e00 = Some(z),
            "edge_N0" => en0 = Some(z),
            "edge_k0" => push_indexed(&mut k0, "edge_k0")?,
            "edge_Nk" => push_indexed(&mut nk, "edge_Nk")?,
            other => return Err(bad(line, format!("unknown kind {other:?}"))),
        }
    }

    let missing = |what: &str| CliError::Usage(format!("eta CSV: missing {what}"));
    let splitting = splitting.ok_or_else(|| missing("# splitting"))?;
    let dt = dt.ok_or_else(|| missing("# dt_ps"))?;
    let n_steps = n_steps.ok_or_else(|| missing("# n_steps"))?;
    let quapi_lambda = quapi.ok_or_else(|| missing("# quapi_lambda"))?;
    if interior.len() != n_steps {
        return Err(CliError::Usage(format!(
            "eta CSV: {} interior rows for n_steps = {n_steps}",
            interior.len()
        )));
    }
    let edges = match splitting {
        Splitting::Trotter => None,
        Splitting::Strang => {
            if k0.len() + 1 != n_steps || nk.len() + 1 != n_steps {
                return Err(CliError::Usage(
                    "eta CSV: wrong number of edge_k0/edge_Nk rows".into(),
                ));
            }
            Some(StrangEdges {
                eta_00: e00.ok_or_else(|| missing("edge_00"))?,
                eta_n0: en0.ok_or_else(|| missing("edge_N0"))?,
                eta_k0: k0,
                eta_nk: nk,
            })
        }
    };
    Ok(EtaTable {
        splitting,
        dt,
        n_steps,
        interior,
        self_coeff: self_coeff.ok_or_else(|| missing("self"))?,
        edges,
        quapi_lambda,
        quapi_term: quapi_lambda.map_or(Complex64::new(0.0, 0.0), |l| quapi_counter_term(l, dt)),
    })
}

pub fn spectral_csv(omega: &[f64], j: &[f64]) -> String {
    let mut out = String::from("omega_per_ps,j\n");
    for (w, v) in omega.iter().zip(j) {
        out.push_str(&format!("{},{}\n", num(*w), num(*v)));
    }
    out
}
