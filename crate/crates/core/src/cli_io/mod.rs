//! Command-line front end: configuration, dispatch and result output.

mod config;
mod emit;

use std::collections::BTreeMap;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

pub use config::{
    parse_config, parse_config_str, parse_config_text, Angle, Command, ComplexArg, DvPairArg, Format, IntList,
    PairArgs, ParseOutcome, Preset, ProbeArgs, ProbeKind, ProtocolArgs, RunConfig,
};
pub use emit::{emit, to_csv, to_json};

use crate::algebra::{classify_pair, Classification};
use crate::error::Result;
use crate::experiments::{
    dv_scan, fig2a_scan, fig2a_slopes, fig2b_scan, fig3_scan, fit_loglog_slope, qfi_scan, switch_scan, FitResult,
    ScanResult, ScanRow,
};
use crate::fock::qfi_numeric_converged;
use crate::gaussian::{qfi_linear_generator, GaussianState};
use crate::generator::{local_generator, qcrb_rmse, EncodingProtocol};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "data", rename_all = "snake_case")]
pub enum Payload {
    Scan(ScanResult),
    Fields(BTreeMap<String, Value>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultEnvelope {
    pub schema_version: u32,
    pub command: String,
    /// The resolved configuration.
    pub config: Value,
    pub payload: Payload,
    pub fits: BTreeMap<String, FitResult>,
    /// False when any numerical check was flagged.
    pub trusted: bool,
    pub trust_flags: Vec<String>,
    pub duration_seconds: f64,
    pub timestamp_unix: u64,
}

fn untrusted_rows(scan: &ScanResult, column: &str, label: &str) -> Vec<String> {
    let Some(j) = scan.column_index(column) else {
        return Vec::new();
    };
    scan.rows
        .iter()
        .filter(|r| r.values[j] == Some(0.0))
        .map(|r| format!("{label} N={}", r.index))
        .collect()
}

fn classification_fields<T: Serialize>(c: &Classification<T>) -> Value {
    serde_json::to_value(c).unwrap_or(Value::Null)
}

fn qfi_fields(p: &EncodingProtocol<f64>, dim: usize, step: f64, nu: u32, fock: bool, flags: &mut Vec<String>) -> Result<BTreeMap<String, Value>> {
    let report = classify_pair(p.h_g(), p.h_lambda(), crate::algebra::DEFAULT_ADJOINT_CAP)?;
    let gen = local_generator(p, &report)?;
    let mut out = BTreeMap::new();
    out.insert("generator".into(), json!(gen.generator.to_string()));
    out.insert("generator_degree".into(), json!(gen.generator.degree()));
    let gaussian = match GaussianState::from_probe(p.probe()) {
        Ok(state) if gen.generator.degree() <= 1 => Some(qfi_linear_generator(&state, &gen.generator)?),
        _ => None,
    };
    out.insert("qfi_gaussian".into(), json!(gaussian));
    let numeric = if fock {
        let est = qfi_numeric_converged(p, dim, step)?;
        if !est.trusted {
            flags.push(format!("fock qfi flagged: coarse {} fine {} at dim {}", est.coarse, est.fine, est.dim));
        }
        out.insert("fock".into(), serde_json::to_value(est)?);
        Some(est.value)
    } else {
        None
    };
    let best = gaussian.or(numeric);
    out.insert("qfi".into(), json!(best));
    let rmse = match best {
        Some(q) => Some(qcrb_rmse(q, nu)?),
        None => None,
    };
    out.insert("qcrb_rmse".into(), json!(rmse));
    out.insert("nu".into(), json!(nu));
    Ok(out)
}

fn example1_scan(ns: &[u32], s_bar: f64, probe: &ProbeArgs, nu: u32) -> Result<(ScanResult, FitResult)> {
    let template = EncodingProtocol::shearing(1, s_bar, 0.0, probe.descriptor()?)?;
    let mut ns = ns.to_vec();
    ns.sort_unstable();
    ns.dedup();
    let pts = qfi_scan(&template, &ns)?;
    let fit = fit_loglog_slope(&pts, None)?;
    let rows = pts
        .iter()
        .map(|&(n, q)| {
            Ok(ScanRow {
                index: n as i64,
                values: vec![Some(q), Some(q / n.powi(4)), Some(qcrb_rmse(q, nu)?)],
            })
        })
        .collect::<Result<_>>()?;
    let mut metadata = BTreeMap::new();
    metadata.insert("s_bar".to_string(), s_bar.to_string());
    metadata.insert("nu".to_string(), nu.to_string());
    let scan = ScanResult {
        label: "example1".into(),
        index_name: "N".into(),
        columns: vec!["qfi".into(), "qfi_over_n4".into(), "qcrb_rmse".into()],
        rows,
        metadata,
    };
    Ok((scan, fit))
}

/// Runs a validated configuration.
pub fn run(cfg: &RunConfig) -> Result<ResultEnvelope> {
    cfg.validate()?;
    let start = Instant::now();
    let mut fits = BTreeMap::new();
    let mut flags = Vec::new();
    let payload = match &cfg.command {
        Command::Classify { pair, cap } => {
            let (g, h) = pair.operators()?;
            let report = classify_pair(&g, &h, *cap)?;
            let mut out = BTreeMap::new();
            out.insert("classification".into(), classification_fields(&report.classification));
            out.insert("nilpotency_index".into(), json!(report.nilpotency_index()));
            out.insert(
                "tower".into(),
                json!(report.tower.iter().map(|t| t.to_string()).collect::<Vec<_>>()),
            );
            Payload::Fields(out)
        }
        Command::Generator { protocol } => {
            let p = protocol.protocol()?;
            let report = classify_pair(p.h_g(), p.h_lambda(), crate::algebra::DEFAULT_ADJOINT_CAP)?;
            let gen = local_generator(&p, &report)?;
            let mut out = BTreeMap::new();
            out.insert("classification".into(), classification_fields(&report.classification));
            out.insert("generator".into(), json!(gen.generator.to_string()));
            out.insert("truncation_used".into(), json!(gen.truncation_used));
            out.insert("closed_form".into(), json!(gen.closed_form));
            Payload::Fields(out)
        }
        Command::Qfi {
            protocol,
            dim,
            step,
            nu,
            fock,
        } => Payload::Fields(qfi_fields(&protocol.protocol()?, *dim, *step, *nu, *fock, &mut flags)?),
        Command::Fig2a { k, n } => {
            let ks: Vec<usize> = k.0.iter().map(|&k| k as usize).collect();
            let scan = fig2a_scan(&ks, &n.0)?;
            if n.0.len() >= 3 {
                fits.extend(fig2a_slopes(&scan)?);
            }
            Payload::Scan(scan)
        }
        Command::Fig2b { n, kmax } => Payload::Scan(fig2b_scan(&n.0, *kmax)?),
        Command::Fig3 {
            n,
            xi,
            alpha,
            theta,
            dim,
            fock,
        } => {
            let scan = fig3_scan(&n.0, *xi, alpha.0, theta.0, *dim, *fock)?;
            flags.extend(untrusted_rows(&scan, "fock_trusted", "fock qfi untrusted at"));
            Payload::Scan(scan)
        }
        Command::Example1 { n, s_bar, probe, nu } => {
            let (scan, fit) = example1_scan(&n.0, *s_bar, probe, *nu)?;
            fits.insert("qfi".into(), fit);
            Payload::Scan(scan)
        }
        Command::Switch { x, p, n, dim } => {
            let scan = switch_scan(&n.0, *x, *p, *dim)?;
            for col in ["qfi_control", "qfi_joint", "qfi_definite"] {
                fits.insert(col.into(), fit_loglog_slope(&scan.column(col)?, None)?);
            }
            flags.extend(untrusted_rows(&scan, "trusted", "switch qfi untrusted at"));
            Payload::Scan(scan)
        }
        Command::Dvbound {
            pair,
            g_bar,
            n,
            amplitudes,
        } => {
            let probe = (!amplitudes.is_empty())
                .then(|| DVector::from_iterator(amplitudes.len(), amplitudes.iter().map(|a| a.0)));
            Payload::Scan(dv_scan((*pair).into(), &n.0, *g_bar, probe)?)
        }
    };
    let timestamp_unix = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    Ok(ResultEnvelope {
        schema_version: SCHEMA_VERSION,
        command: cfg.command_name().into(),
        config: serde_json::to_value(cfg)?,
        payload,
        fits,
        trusted: flags.is_empty(),
        trust_flags: flags,
        duration_seconds: start.elapsed().as_secs_f64(),
        timestamp_unix,
    })
}
