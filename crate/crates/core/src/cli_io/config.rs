//! Command-line and config-file parsing into a validated [`RunConfig`].

use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{parse_operator, LadderPolynomial};
use crate::error::{Error, Result};
use crate::experiments::DvPair;
use crate::fock::MAX_DIM;
use crate::generator::{EncodingProtocol, ProbeDescriptor};

/// Integers given as `a..b` (inclusive), `a,b,c` or a single value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IntList(pub Vec<u32>);

impl FromStr for IntList {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parse = |t: &str| t.trim().parse::<u32>().map_err(|e| format!("`{t}`: {e}"));
        let s = s.trim();
        if let Some((a, b)) = s.split_once("..") {
            let (a, b) = (parse(a)?, parse(b.trim_start_matches('='))?);
            if b < a {
                return Err(format!("empty range {a}..{b}"));
            }
            return Ok(Self((a..=b).collect()));
        }
        s.split(',').map(parse).collect::<std::result::Result<_, _>>().map(Self)
    }
}

/// Angle in radians; accepts `pi/4`, `3pi/4`, `-pi/2`, `2*pi/3` or a plain number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Angle(pub f64);

impl FromStr for Angle {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let t = s.trim().replace(' ', "");
        let Some(at) = t.find("pi") else {
            return t.parse::<f64>().map(Angle).map_err(|e| format!("angle `{s}`: {e}"));
        };
        let head = t[..at].trim_end_matches('*');
        let tail = &t[at + 2..];
        let factor = match head {
            "" | "+" => 1.0,
            "-" => -1.0,
            h => h.parse::<f64>().map_err(|e| format!("angle `{s}`: {e}"))?,
        };
        let divisor = if tail.is_empty() {
            1.0
        } else {
            let d = tail
                .strip_prefix('/')
                .ok_or_else(|| format!("angle `{s}`: expected `/` after pi"))?;
            d.parse::<f64>().map_err(|e| format!("angle `{s}`: {e}"))?
        };
        if divisor == 0.0 {
            return Err(format!("angle `{s}`: division by zero"));
        }
        Ok(Angle(factor * std::f64::consts::PI / divisor))
    }
}

/// Complex number written in the operator grammar, e.g. `0.3`, `0.3 + 0.1i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ComplexArg(pub Complex64);

impl FromStr for ComplexArg {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let poly: LadderPolynomial<f64> = parse_operator(s).map_err(|e| e.to_string())?;
        poly.as_scalar()
            .map(ComplexArg)
            .ok_or_else(|| format!("`{s}` is not a number"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// `H_g = X²`, `H_λ = P`
    ShearK1,
    /// `H_g = X`, `H_λ = P`
    XpConstant,
    /// `H_g = a†² + a²`, `H_λ = P`
    SqueezeInf,
}

impl Preset {
    pub fn operators(self) -> (&'static str, &'static str) {
        match self {
            Preset::ShearK1 => ("X^2", "P"),
            Preset::XpConstant => ("X", "P"),
            Preset::SqueezeInf => ("ad^2 + a^2", "P"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeKind {
    Vacuum,
    Coherent,
    Squeezed,
    Fock,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct PairArgs {
    /// Built-in operator pair.
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    /// Auxiliary generator H_g, e.g. "X^2".
    #[arg(long)]
    pub g: Option<String>,
    /// Parameter generator H_λ, e.g. "P".
    #[arg(long)]
    pub h: Option<String>,
}

impl PairArgs {
    pub fn operators(&self) -> Result<(LadderPolynomial<f64>, LadderPolynomial<f64>)> {
        let (g, h) = match (&self.preset, &self.g, &self.h) {
            (Some(p), None, None) => {
                let (g, h) = p.operators();
                (g.to_string(), h.to_string())
            }
            (None, Some(g), Some(h)) => (g.clone(), h.clone()),
            (Some(_), _, _) => return Err(Error::Validation("give either --preset or --g/--h, not both".into())),
            _ => return Err(Error::Validation("operator pair needs --preset or both --g and --h".into())),
        };
        Ok((parse_operator(&g)?, parse_operator(&h)?))
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ProbeArgs {
    #[arg(long, value_enum, default_value = "vacuum")]
    pub probe: ProbeKind,
    /// Coherent amplitude.
    #[arg(long, default_value = "0")]
    pub alpha: ComplexArg,
    /// Squeezing magnitude.
    #[arg(long, default_value_t = 0.0)]
    pub r: f64,
    /// Squeezing phase.
    #[arg(long, default_value = "0")]
    pub phi: Angle,
    /// Number-basis amplitudes, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub amplitudes: Vec<ComplexArg>,
}

impl ProbeArgs {
    pub fn descriptor(&self) -> Result<ProbeDescriptor<f64>> {
        let probe = match self.probe {
            ProbeKind::Vacuum => ProbeDescriptor::Vacuum,
            ProbeKind::Coherent => ProbeDescriptor::Coherent { alpha: self.alpha.0 },
            ProbeKind::Squeezed => ProbeDescriptor::SqueezedVacuum {
                r: self.r,
                phi: self.phi.0,
            },
            ProbeKind::Fock => ProbeDescriptor::FockBasisVector {
                amplitudes: self.amplitudes.iter().map(|a| a.0).collect(),
            },
        };
        probe.validate().map_err(|e| Error::Validation(e.to_string()))?;
        Ok(probe)
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct ProtocolArgs {
    #[command(flatten)]
    pub pair: PairArgs,
    /// Number of applications of each gate.
    #[arg(long = "N", alias = "n", default_value_t = 1)]
    pub n: u32,
    /// Auxiliary strength per application.
    #[arg(long = "g-bar", allow_hyphen_values = true)]
    pub g_bar: Option<f64>,
    /// Shearing strength; sets ḡ = s̄.
    #[arg(long = "s-bar", allow_hyphen_values = true)]
    pub s_bar: Option<f64>,
    /// Squeezing strength; sets ḡ = ξ̄/2.
    #[arg(long, allow_hyphen_values = true)]
    pub xi: Option<f64>,
    /// Target parameter λ̄.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub lambda: f64,
    #[command(flatten)]
    pub probe: ProbeArgs,
}

impl ProtocolArgs {
    pub fn g_bar(&self) -> Result<f64> {
        match (self.g_bar, self.s_bar, self.xi) {
            (Some(g), None, None) | (None, Some(g), None) => Ok(g),
            (None, None, Some(xi)) => Ok(xi / 2.0),
            (None, None, None) => Ok(0.0),
            _ => Err(Error::Validation("give only one of --g-bar, --s-bar, --xi".into())),
        }
    }

    pub fn protocol(&self) -> Result<EncodingProtocol<f64>> {
        let (g, h) = self.pair.operators()?;
        EncodingProtocol::new(h, g, self.n, self.lambda, self.g_bar()?, self.probe.descriptor()?)
            .map_err(|e| match e {
                Error::Domain(m) => Error::Validation(m),
                other => other,
            })
    }
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Command {
    /// Classify the adjoint tower of an operator pair.
    Classify {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, default_value_t = crate::algebra::DEFAULT_ADJOINT_CAP)]
        cap: usize,
    },
    /// Local generator of a protocol.
    Generator {
        #[command(flatten)]
        protocol: ProtocolArgs,
    },
    /// QFI of a protocol from the generator and, optionally, the Fock oracle.
    Qfi {
        #[command(flatten)]
        protocol: ProtocolArgs,
        #[arg(long, default_value_t = crate::fock::DEFAULT_DIM)]
        dim: usize,
        #[arg(long, default_value_t = crate::fock::DEFAULT_STEP)]
        step: f64,
        /// Repetitions for the QCRB.
        #[arg(long, default_value_t = 1)]
        nu: u32,
        #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
        fock: bool,
    },
    /// Leading-coefficient lines against N for fixed K.
    Fig2a {
        #[arg(long = "K", alias = "k", default_value = "1,4,6")]
        k: IntList,
        #[arg(long = "N", alias = "n", default_value = "1..100")]
        n: IntList,
    },
    /// Leading coefficient against K for fixed N.
    Fig2b {
        #[arg(long = "N", alias = "n", default_value = "6,10,16,20")]
        n: IntList,
        #[arg(long, default_value_t = 40)]
        kmax: usize,
    },
    /// Squeezing-protocol QFI and homodyne CFI against N.
    Fig3 {
        #[arg(long = "N", alias = "n", default_value = "1..12")]
        n: IntList,
        #[arg(long, default_value_t = 0.1)]
        xi: f64,
        #[arg(long, default_value = "0.3")]
        alpha: ComplexArg,
        #[arg(long, default_value = "pi/4")]
        theta: Angle,
        #[arg(long, default_value_t = crate::fock::DEFAULT_DIM)]
        dim: usize,
        #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
        fock: bool,
    },
    /// Shearing-protocol QFI scaling fit.
    Example1 {
        #[arg(long = "N", alias = "n", default_value = "8..64")]
        n: IntList,
        #[arg(long = "s-bar", default_value_t = 0.2, allow_hyphen_values = true)]
        s_bar: f64,
        #[command(flatten)]
        probe: ProbeArgs,
        #[arg(long, default_value_t = 1)]
        nu: u32,
    },
    /// Two-order SWITCH scan and fits.
    Switch {
        #[arg(long, default_value_t = 0.1, allow_hyphen_values = true)]
        x: f64,
        #[arg(long, default_value_t = 0.2, allow_hyphen_values = true)]
        p: f64,
        #[arg(long = "N", alias = "n", default_value = "1..6")]
        n: IntList,
        #[arg(long, default_value_t = crate::fock::DEFAULT_DIM)]
        dim: usize,
    },
    /// Finite-dimension variance bound demonstration.
    Dvbound {
        #[arg(long, value_enum, default_value = "qubit")]
        pair: DvPairArg,
        #[arg(long = "g-bar", default_value_t = 0.1, allow_hyphen_values = true)]
        g_bar: f64,
        #[arg(long = "N", alias = "n", default_value = "1..50")]
        n: IntList,
        /// Probe amplitudes; defaults to the equal superposition of the extreme eigenvectors of H_λ.
        #[arg(long, value_delimiter = ',')]
        amplitudes: Vec<ComplexArg>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DvPairArg {
    Qubit,
    Qutrit,
}

impl From<DvPairArg> for DvPair {
    fn from(p: DvPairArg) -> Self {
        match p {
            DvPairArg::Qubit => DvPair::Qubit,
            DvPairArg::Qutrit => DvPair::Qutrit,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Parser, Serialize, Deserialize)]
#[command(name = "ncmetro", version, about = "Nilpotency-index analysis and Fisher-information scaling of bosonic encoding protocols")]
#[command(args_override_self = true)]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Output format; inferred from the output extension, CSV otherwise.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

const COMMANDS: [&str; 9] = [
    "classify", "generator", "qfi", "fig2a", "fig2b", "fig3", "example1", "switch", "dvbound",
];

/// `key = value` lines; `#` starts a comment.
pub fn parse_config_text(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Validation(format!("config line {}: expected `key = value`", lineno + 1)))?;
        let k = k.trim();
        if k.is_empty() {
            return Err(Error::Validation(format!("config line {}: empty key", lineno + 1)));
        }
        let v = v.trim().trim_matches('"');
        out.push((k.to_string(), v.to_string()));
    }
    Ok(out)
}

fn flags_from_pairs(pairs: &[(String, String)]) -> (Option<String>, Vec<String>) {
    let mut command = None;
    let mut flags = Vec::new();
    for (k, v) in pairs {
        if k == "command" {
            command = Some(v.clone());
        } else {
            flags.push(format!("--{k}"));
            flags.push(v.clone());
        }
    }
    (command, flags)
}

fn clap_error(e: clap::Error) -> Error {
    Error::Validation(e.to_string().trim_end().to_string())
}

/// Parses argv, expanding `--config <file>`. Values given on the command line
/// take precedence over the file.
pub fn parse_config<I, S>(argv: I) -> std::result::Result<RunConfig, ParseOutcome>
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let argv: Vec<String> = argv.into_iter().map(Into::into).collect();
    let mut rest = Vec::with_capacity(argv.len());
    let mut config_path: Option<String> = None;
    let mut it = argv.iter().skip(1);
    while let Some(a) = it.next() {
        if a == "--config" {
            let p = it
                .next()
                .ok_or_else(|| ParseOutcome::Error(Error::Validation("--config needs a path".into())))?;
            config_path = Some(p.clone());
        } else if let Some(p) = a.strip_prefix("--config=") {
            config_path = Some(p.to_string());
        } else {
            rest.push(a.clone());
        }
    }
    let prog = argv.first().cloned().unwrap_or_else(|| "ncmetro".into());
    let mut full = vec![prog];
    match config_path {
        None => full.extend(rest),
        Some(path) => {
            let text = std::fs::read_to_string(&path).map_err(|source| {
                ParseOutcome::Error(Error::Io {
                    path: PathBuf::from(&path),
                    source,
                })
            })?;
            let pairs = parse_config_text(&text).map_err(ParseOutcome::Error)?;
            let (file_cmd, file_flags) = flags_from_pairs(&pairs);
            match rest.iter().position(|a| COMMANDS.contains(&a.as_str())) {
                Some(i) => {
                    full.extend(rest[..=i].iter().cloned());
                    full.extend(file_flags);
                    full.extend(rest[i + 1..].iter().cloned());
                }
                None => {
                    let cmd = file_cmd.ok_or_else(|| {
                        ParseOutcome::Error(Error::Validation("no command given on the command line or in the config".into()))
                    })?;
                    full.push(cmd);
                    full.extend(file_flags);
                    full.extend(rest);
                }
            }
        }
    }
    let cfg = RunConfig::try_parse_from(full).map_err(|e| {
        if e.use_stderr() {
            ParseOutcome::Error(clap_error(e))
        } else {
            ParseOutcome::Info(e.to_string())
        }
    })?;
    cfg.validate().map_err(ParseOutcome::Error)?;
    Ok(cfg)
}

/// A config given only as file text, with the command as the `command` key.
pub fn parse_config_str(text: &str) -> Result<RunConfig> {
    let pairs = parse_config_text(text)?;
    let (cmd, flags) = flags_from_pairs(&pairs);
    let cmd = cmd.ok_or_else(|| Error::Validation("config needs a `command` key".into()))?;
    let mut argv = vec!["ncmetro".to_string(), cmd];
    argv.extend(flags);
    let cfg = RunConfig::try_parse_from(argv).map_err(clap_error)?;
    cfg.validate()?;
    Ok(cfg)
}

/// Result of argv parsing that is not a config: help/version text or an error.
#[derive(Debug)]
pub enum ParseOutcome {
    Info(String),
    Error(Error),
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::Validation(msg.into())
}

fn check_ns(ns: &IntList) -> Result<()> {
    if ns.0.is_empty() {
        return Err(invalid("N list is empty"));
    }
    if ns.0.contains(&0) {
        return Err(invalid("N must be ≥ 1"));
    }
    Ok(())
}

fn check_dim(dim: usize) -> Result<()> {
    if !(8..=MAX_DIM).contains(&dim) {
        return Err(invalid(format!("dim must be in 8..={MAX_DIM}, got {dim}")));
    }
    Ok(())
}

impl RunConfig {
    pub fn command_name(&self) -> &'static str {
        match self.command {
            Command::Classify { .. } => "classify",
            Command::Generator { .. } => "generator",
            Command::Qfi { .. } => "qfi",
            Command::Fig2a { .. } => "fig2a",
            Command::Fig2b { .. } => "fig2b",
            Command::Fig3 { .. } => "fig3",
            Command::Example1 { .. } => "example1",
            Command::Switch { .. } => "switch",
            Command::Dvbound { .. } => "dvbound",
        }
    }

    pub fn output_format(&self) -> Format {
        if let Some(f) = self.format {
            return f;
        }
        match self.output.as_deref().and_then(Path::extension).and_then(|e| e.to_str()) {
            Some("json") => Format::Json,
            _ => Format::Csv,
        }
    }

    /// Checks every precondition of the targeted operation.
    pub fn validate(&self) -> Result<()> {
        match &self.command {
            Command::Classify { pair, cap } => {
                let (g, h) = pair.operators()?;
                if g.is_zero() || h.is_zero() {
                    return Err(invalid("operators must be nonzero"));
                }
                if *cap < 2 {
                    return Err(invalid(format!("cap must be ≥ 2, got {cap}")));
                }
            }
            Command::Generator { protocol } => {
                protocol.protocol()?;
            }
            Command::Qfi {
                protocol, dim, step, nu, ..
            } => {
                protocol.protocol()?;
                check_dim(*dim)?;
                if !(*step > 0.0) {
                    return Err(invalid(format!("step must be > 0, got {step}")));
                }
                if *nu == 0 {
                    return Err(invalid("nu must be ≥ 1"));
                }
            }
            Command::Fig2a { k, n } => {
                check_ns(n)?;
                if k.0.is_empty() {
                    return Err(invalid("K list is empty"));
                }
            }
            Command::Fig2b { n, kmax } => {
                check_ns(n)?;
                let max = *n.0.iter().max().unwrap() as usize;
                if *kmax < max + 1 {
                    return Err(invalid(format!("kmax must be ≥ max(N)+1 = {}", max + 1)));
                }
            }
            Command::Fig3 { n, xi, dim, alpha, theta, .. } => {
                check_ns(n)?;
                check_dim(*dim)?;
                if !(*xi > 0.0) {
                    return Err(invalid(format!("xi must be > 0, got {xi}")));
                }
                if !(alpha.0.re.is_finite() && alpha.0.im.is_finite() && theta.0.is_finite()) {
                    return Err(invalid("alpha and theta must be finite"));
                }
            }
            Command::Example1 { n, s_bar, probe, nu } => {
                check_ns(n)?;
                let (lo, hi) = (*n.0.iter().min().unwrap(), *n.0.iter().max().unwrap());
                if hi < 8 * lo {
                    return Err(invalid(format!("N window needs max ≥ 8·min, got {lo}..{hi}")));
                }
                if n.0.len() < 3 {
                    return Err(invalid("fit needs ≥ 3 values of N"));
                }
                if !s_bar.is_finite() {
                    return Err(invalid("s-bar must be finite"));
                }
                if probe.probe == ProbeKind::Fock {
                    return Err(invalid("example1 uses Gaussian probes"));
                }
                probe.descriptor()?;
                if *nu == 0 {
                    return Err(invalid("nu must be ≥ 1"));
                }
            }
            Command::Switch { x, p, n, dim } => {
                check_ns(n)?;
                check_dim(*dim)?;
                if x * p == 0.0 || !(x * p).is_finite() {
                    return Err(invalid("SWITCH scaling needs finite x·p ≠ 0"));
                }
                if n.0.len() < 3 {
                    return Err(invalid("fit needs ≥ 3 values of N"));
                }
            }
            Command::Dvbound {
                pair, g_bar, n, amplitudes,
            } => {
                check_ns(n)?;
                if !g_bar.is_finite() {
                    return Err(invalid("g-bar must be finite"));
                }
                if !amplitudes.is_empty() {
                    let d = match pair {
                        DvPairArg::Qubit => 2,
                        DvPairArg::Qutrit => 3,
                    };
                    if amplitudes.len() != d {
                        return Err(invalid(format!("probe needs {d} amplitudes, got {}", amplitudes.len())));
                    }
                    let norm: f64 = amplitudes.iter().map(|a| a.0.norm_sqr()).sum::<f64>().sqrt();
                    if (norm - 1.0).abs() > 1e-10 {
                        return Err(invalid(format!("probe norm {norm} is not 1")));
                    }
                }
            }
        }
        Ok(())
    }
}
