//! Scans and scaling fits built from the engines.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_complex::{Complex, Complex64};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{classify_pair, DEFAULT_ADJOINT_CAP};
use crate::error::{Error, Result};
use crate::fock::{dv_bound_check, qfi_numeric_converged, FockVector, MatrixOperator, SwitchEngine};
use crate::gaussian::{cfi_quadrature, qfi_linear_generator, GaussianState, HomodyneSpec};
use crate::generator::{k_peak, ln_peak_coefficient, local_generator, EncodingProtocol, ProbeDescriptor};

/// One row of a scan: the scan variable and one value per column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub index: i64,
    pub values: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub label: String,
    /// Name of the scan variable, `N` or `K`.
    pub index_name: String,
    pub columns: Vec<String>,
    pub rows: Vec<ScanRow>,
    pub metadata: BTreeMap<String, String>,
}

impl ScanResult {
    fn new(label: &str, index_name: &str, columns: Vec<String>) -> Self {
        Self {
            label: label.into(),
            index_name: index_name.into(),
            columns,
            rows: Vec::new(),
            metadata: BTreeMap::new(),
        }
    }

    fn meta(&mut self, key: &str, value: impl ToString) {
        self.metadata.insert(key.into(), value.to_string());
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// `(index, value)` pairs of one column, skipping missing cells.
    pub fn column(&self, name: &str) -> Result<Vec<(f64, f64)>> {
        let j = self
            .column_index(name)
            .ok_or_else(|| Error::Domain(format!("no column `{name}` in scan `{}`", self.label)))?;
        Ok(self
            .rows
            .iter()
            .filter_map(|r| r.values[j].map(|v| (r.index as f64, v)))
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
}

fn in_window(x: f64, window: Option<(f64, f64)>) -> bool {
    window.is_none_or(|(lo, hi)| x >= lo && x <= hi)
}

fn least_squares(points: &[(f64, f64)]) -> Result<(f64, f64, f64)> {
    if points.len() < 3 {
        return Err(Error::DegenerateFit(format!("need ≥ 3 points, got {}", points.len())));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx <= 0.0 {
        return Err(Error::DegenerateFit("all x values coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    let ss_res: f64 = points.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let r2 = if ss_tot == 0.0 { 1.0 } else { (1.0 - ss_res / ss_tot).clamp(0.0, 1.0) };
    Ok((slope, intercept, r2))
}

fn window_of(points: &[(f64, f64)]) -> (f64, f64) {
    let lo = points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let hi = points.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

/// Ordinary least squares of `y` on `x` inside `window` (inclusive).
pub fn fit_linear(rows: &[(f64, f64)], window: Option<(f64, f64)>) -> Result<FitResult> {
    let points: Vec<(f64, f64)> = rows.iter().copied().filter(|p| in_window(p.0, window)).collect();
    let (slope, intercept, r_squared) = least_squares(&points)?;
    Ok(FitResult {
        slope,
        intercept,
        r_squared,
        window: window_of(&points),
    })
}

/// Least squares of `ln y` on `ln x` inside `window`; the window is in `x`.
pub fn fit_loglog_slope(rows: &[(f64, f64)], window: Option<(f64, f64)>) -> Result<FitResult> {
    let selected: Vec<(f64, f64)> = rows.iter().copied().filter(|p| in_window(p.0, window)).collect();
    if let Some(bad) = selected.iter().find(|p| !(p.0 > 0.0 && p.1 > 0.0)) {
        return Err(Error::Domain(format!("log-log fit needs positive data, got {bad:?}")));
    }
    let logs: Vec<(f64, f64)> = selected.iter().map(|p| (p.0.ln(), p.1.ln())).collect();
    let (slope, intercept, r_squared) = least_squares(&logs)?;
    Ok(FitResult {
        slope,
        intercept,
        r_squared,
        window: window_of(&selected),
    })
}

/// `log10(N^{2(1+K)}/(K!)²)` for each `K` along `N`.
pub fn fig2a_scan(k_list: &[usize], n_range: &[u32]) -> Result<ScanResult> {
    if n_range.contains(&0) {
        return Err(Error::Domain("N must be ≥ 1".into()));
    }
    let mut ns = n_range.to_vec();
    ns.sort_unstable();
    ns.dedup();
    let columns = k_list.iter().map(|k| format!("logcoef_K{k}")).collect();
    let mut scan = ScanResult::new("fig2a", "N", columns);
    scan.rows = ns
        .iter()
        .map(|&n| ScanRow {
            index: n as i64,
            values: k_list
                .iter()
                .map(|&k| Some(ln_peak_coefficient(k, n) / std::f64::consts::LN_10))
                .collect(),
        })
        .collect();
    scan.meta("g_bar", 1);
    scan.meta("variance", 1);
    scan.meta("k_list", join(k_list));
    Ok(scan)
}

/// Slope of each `logcoef_K*` line against `log10 N`.
pub fn fig2a_slopes(scan: &ScanResult) -> Result<Vec<(String, FitResult)>> {
    scan.columns
        .iter()
        .map(|c| {
            let pts: Vec<(f64, f64)> = scan.column(c)?.into_iter().map(|(n, v)| (n.log10(), v)).collect();
            Ok((c.clone(), fit_linear(&pts, None)?))
        })
        .collect()
}

/// `log10` coefficient against `K = 0..=k_max` for each `N`, with the argmax sets.
pub fn fig2b_scan(n_list: &[u32], k_max: usize) -> Result<ScanResult> {
    let columns = n_list.iter().map(|n| format!("logcoef_N{n}")).collect();
    let mut scan = ScanResult::new("fig2b", "K", columns);
    for &n in n_list {
        let peak = k_peak(n, k_max)?;
        scan.meta(&format!("argmax_N{n}"), join(&peak));
    }
    scan.rows = (0..=k_max)
        .map(|k| ScanRow {
            index: k as i64,
            values: n_list
                .iter()
                .map(|&n| Some(ln_peak_coefficient(k, n) / std::f64::consts::LN_10))
                .collect(),
        })
        .collect();
    scan.meta("k_max", k_max);
    Ok(scan)
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",")
}

/// Generator-variance QFI `4 Var[ĥ]` on the Gaussian probe, for each `N`.
pub fn qfi_scan(template: &EncodingProtocol<f64>, n_range: &[u32]) -> Result<Vec<(f64, f64)>> {
    let report = classify_pair(template.h_g(), template.h_lambda(), DEFAULT_ADJOINT_CAP)?;
    let probe = GaussianState::from_probe(template.probe())?;
    n_range
        .iter()
        .map(|&n| {
            let p = template.with_n(n)?;
            let gen = local_generator(&p, &report)?.generator;
            Ok((n as f64, qfi_linear_generator(&probe, &gen)?))
        })
        .collect()
}

/// Log-log QFI slope of the shearing protocol over `N`.
pub fn example1_scaling(n_range: &[u32], s_bar: f64, probe: ProbeDescriptor<f64>) -> Result<FitResult> {
    let lo = n_range.iter().copied().min().unwrap_or(0);
    let hi = n_range.iter().copied().max().unwrap_or(0);
    if lo == 0 || hi < 8 * lo {
        return Err(Error::Domain(format!(
            "example (i) window needs N ≥ 1 and max ≥ 8·min, got {lo}..{hi}"
        )));
    }
    let template = EncodingProtocol::shearing(1, s_bar, 0.0, probe)?;
    fit_loglog_slope(&qfi_scan(&template, n_range)?, None)
}

/// Slope of `ln(F/N²)` against `N` for the squeezing protocol; tends to `2ξ̄`.
pub fn squeezing_rate(n_range: &[u32], xi_bar: f64, probe: ProbeDescriptor<f64>) -> Result<FitResult> {
    if !(xi_bar > 0.0) {
        return Err(Error::Domain(format!("ξ̄ must be > 0, got {xi_bar}")));
    }
    let template = EncodingProtocol::squeezing(1, xi_bar, 0.0, probe)?;
    let pts: Vec<(f64, f64)> = qfi_scan(&template, n_range)?
        .into_iter()
        .map(|(n, f)| (n, (f / (n * n)).ln()))
        .collect();
    fit_linear(&pts, None)
}

/// Closed form, Gaussian engine, Fock oracle and homodyne CFI of the squeezing
/// protocol with a coherent probe.
pub fn fig3_scan(n_range: &[u32], xi_bar: f64, alpha: Complex64, theta: f64, dim: usize, with_fock: bool) -> Result<ScanResult> {
    if !(xi_bar > 0.0) {
        return Err(Error::Domain(format!("ξ̄ must be > 0, got {xi_bar}")));
    }
    if n_range.contains(&0) {
        return Err(Error::Domain("N must be ≥ 1".into()));
    }
    let mut ns = n_range.to_vec();
    ns.sort_unstable();
    ns.dedup();
    let probe = ProbeDescriptor::Coherent {
        alpha: Complex::new(alpha.re, alpha.im),
    };
    let template = EncodingProtocol::squeezing(1, xi_bar, 0.0, probe)?;
    let report = classify_pair(template.h_g(), template.h_lambda(), DEFAULT_ADJOINT_CAP)?;
    let gauss_probe = GaussianState::from_probe(template.probe())?;
    let spec = HomodyneSpec { theta };

    let rows: Vec<Result<ScanRow>> = ns
        .par_iter()
        .map(|&n| {
            let p = template.with_n(n)?;
            let nf = n as f64;
            let closed = 2.0 * nf * nf * (2.0 * nf * xi_bar).cosh();
            let gen = local_generator(&p, &report)?.generator;
            let gauss = qfi_linear_generator(&gauss_probe, &gen)?;
            let (fock, trusted) = if with_fock {
                match qfi_numeric_converged(&p, dim, crate::fock::DEFAULT_STEP) {
                    Ok(est) => (Some(est.value), Some(if est.trusted { 1.0 } else { 0.0 })),
                    Err(_) => (None, Some(0.0)),
                }
            } else {
                (None, None)
            };
            let cfi = cfi_quadrature(&p, &spec)?;
            Ok(ScanRow {
                index: n as i64,
                values: vec![Some(closed), Some(gauss), fock, trusted, Some(cfi), Some(cfi / gauss)],
            })
        })
        .collect();
    let columns = ["qfi_closed", "qfi_gaussian", "qfi_fock", "fock_trusted", "cfi", "ratio"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let mut scan = ScanResult::new("fig3", "N", columns);
    scan.rows = rows.into_iter().collect::<Result<_>>()?;
    scan.meta("xi_bar", xi_bar);
    scan.meta("alpha", alpha);
    scan.meta("theta", theta);
    scan.meta("dim", dim);
    scan.meta("step", crate::fock::DEFAULT_STEP);
    scan.meta("fock", with_fock);
    Ok(scan)
}

/// Branch phase and QFI parts of the SWITCH on the vacuum, for each `N`.
pub fn switch_scan(n_range: &[u32], x: f64, p: f64, dim: usize) -> Result<ScanResult> {
    if n_range.contains(&0) {
        return Err(Error::Domain("N must be ≥ 1".into()));
    }
    let mut ns = n_range.to_vec();
    ns.sort_unstable();
    ns.dedup();
    let engine = SwitchEngine::new(dim)?;
    let probe = FockVector::vacuum(dim);
    let rows: Vec<Result<ScanRow>> = ns
        .par_iter()
        .map(|&n| {
            let state = engine.protocol(n, x, p, &probe)?;
            let expected = Complex64::from_polar(1.0, -((n * n) as f64) * x * p);
            let phase_error = (state.branch_overlap() - expected).norm();
            let q = engine.qfi(n, x, p, &probe, crate::fock::DEFAULT_STEP)?;
            let trusted = q.joint.trusted && q.control.trusted && q.definite.trusted;
            Ok(ScanRow {
                index: n as i64,
                values: vec![
                    Some(q.joint.value),
                    Some(q.control.value),
                    Some(q.definite.value),
                    Some(phase_error),
                    Some(if trusted { 1.0 } else { 0.0 }),
                ],
            })
        })
        .collect();
    let columns = ["qfi_joint", "qfi_control", "qfi_definite", "phase_error", "trusted"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let mut scan = ScanResult::new("switch", "N", columns);
    scan.rows = rows.into_iter().collect::<Result<_>>()?;
    scan.meta("x", x);
    scan.meta("p", p);
    scan.meta("dim", dim);
    scan.meta("probe", "vacuum");
    scan.meta("step", crate::fock::DEFAULT_STEP);
    Ok(scan)
}

/// Log-log slope of the control-qubit QFI (the order-superposition part) w.r.t. `x`.
pub fn switch_scaling(n_range: &[u32], x: f64, p: f64, dim: usize) -> Result<FitResult> {
    if x * p == 0.0 {
        return Err(Error::Domain("SWITCH scaling needs x·p ≠ 0".into()));
    }
    let scan = switch_scan(n_range, x, p, dim)?;
    fit_loglog_slope(&scan.column("qfi_control")?, None)
}

/// Discrete-variable pairs for the bound demonstration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DvPair {
    /// `h_g = σx/2`, `h_λ = σz/2`
    Qubit,
    /// `h_g = Sx`, `h_λ = Sz` for spin 1
    Qutrit,
}

impl DvPair {
    pub fn operators(self) -> (MatrixOperator, MatrixOperator) {
        let c = |x: f64| Complex64::new(x, 0.0);
        match self {
            DvPair::Qubit => (
                MatrixOperator::new(DMatrix::from_row_slice(2, 2, &[c(0.0), c(0.5), c(0.5), c(0.0)])),
                MatrixOperator::new(DMatrix::from_row_slice(2, 2, &[c(0.5), c(0.0), c(0.0), c(-0.5)])),
            ),
            DvPair::Qutrit => {
                let h = std::f64::consts::FRAC_1_SQRT_2;
                let z = c(0.0);
                (
                    MatrixOperator::new(DMatrix::from_row_slice(3, 3, &[z, c(h), z, c(h), z, c(h), z, c(h), z])),
                    MatrixOperator::new(DMatrix::from_row_slice(3, 3, &[c(1.0), z, z, z, z, z, z, z, c(-1.0)])),
                )
            }
        }
    }
}

/// `(|v_max⟩ + |v_min⟩)/√2` for the extreme eigenvectors of `h`.
pub fn extreme_superposition(h: &MatrixOperator) -> Result<DVector<Complex64>> {
    let pairs = h.spectrum()?.eigenpairs();
    let (lo, hi) = (&pairs[0].1, &pairs[pairs.len() - 1].1);
    Ok((lo + hi) / Complex64::new(2f64.sqrt(), 0.0))
}

/// `QFI`, bound and `QFI/N²` for a DV pair with the given probe.
pub fn dv_scan(pair: DvPair, n_range: &[u32], g_bar: f64, probe: Option<DVector<Complex64>>) -> Result<ScanResult> {
    let (h_g, h_l) = pair.operators();
    let (probe, probe_name) = match probe {
        Some(p) => (p, "explicit"),
        None => (extreme_superposition(&h_l)?, "extreme_superposition"),
    };
    let report = dv_bound_check(&h_g, &h_l, n_range, g_bar, &probe)?;
    let columns = ["qfi", "bound", "normalized"].iter().map(|s| s.to_string()).collect();
    let mut scan = ScanResult::new("dvbound", "N", columns);
    let mut rows: Vec<ScanRow> = report
        .rows
        .iter()
        .map(|r| ScanRow {
            index: r.n as i64,
            values: vec![Some(r.qfi), Some(r.bound), Some(r.normalized)],
        })
        .collect();
    rows.sort_by_key(|r| r.index);
    scan.rows = rows;
    scan.meta("pair", format!("{pair:?}").to_lowercase());
    scan.meta("g_bar", g_bar);
    scan.meta("spread", report.spread);
    scan.meta("probe", probe_name);
    Ok(scan)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loglog_fit_examples() {
        let sq: Vec<(f64, f64)> = (1..=6).map(|x| (x as f64, (x * x) as f64)).collect();
        let f = fit_loglog_slope(&sq, None).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12 && (f.r_squared - 1.0).abs() < 1e-12);
        let quart: Vec<(f64, f64)> = (1..=6).map(|x| (x as f64, 5.0 * (x as f64).powi(4))).collect();
        let f = fit_loglog_slope(&quart, None).unwrap();
        assert!((f.slope - 4.0).abs() < 1e-12 && (f.intercept - 5f64.ln()).abs() < 1e-12);
        assert!(fit_loglog_slope(&[(1.0, 1.0), (2.0, -1.0), (3.0, 2.0)], None).is_err());
        assert!(matches!(fit_loglog_slope(&sq[..2], None), Err(Error::DegenerateFit(_))));
        let f = fit_loglog_slope(&sq, Some((2.0, 4.0))).unwrap();
        assert_eq!(f.window, (2.0, 4.0));
    }

    #[test]
    fn fig2a_values() {
        let scan = fig2a_scan(&[0, 1, 4], &[1, 10, 100]).unwrap();
        let row = scan.rows.iter().find(|r| r.index == 10).unwrap();
        assert!((row.values[0].unwrap() - 2.0).abs() < 1e-12);
        assert!((row.values[1].unwrap() - 4.0).abs() < 1e-12);
        let slopes = fig2a_slopes(&scan).unwrap();
        assert!((slopes[2].1.slope - 10.0).abs() < 1e-12);
    }

    #[test]
    fn fig2b_argmax_and_unimodality() {
        let scan = fig2b_scan(&[6, 20], 40).unwrap();
        assert_eq!(scan.metadata["argmax_N6"], "5,6");
        assert_eq!(scan.metadata["argmax_N20"], "19,20");
        assert_eq!(scan.columns, vec!["logcoef_N6", "logcoef_N20"]);
        let col: Vec<f64> = scan.column("logcoef_N20").unwrap().into_iter().map(|p| p.1).collect();
        let peak = 19;
        assert!(col[..=peak].windows(2).all(|w| w[1] >= w[0]));
        assert!(col[peak + 1..].windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn example1_slopes() {
        let ns: Vec<u32> = (8..=64).collect();
        let f = example1_scaling(&ns, 0.2, ProbeDescriptor::Vacuum).unwrap();
        assert!((f.slope - 4.0).abs() < 0.05, "{f:?}");
        let f = example1_scaling(&ns, 0.0, ProbeDescriptor::Vacuum).unwrap();
        assert!((f.slope - 2.0).abs() < 0.01);
        assert!(example1_scaling(&[8, 9, 10], 0.2, ProbeDescriptor::Vacuum).is_err());
    }

    #[test]
    fn constant_commutator_is_heisenberg() {
        let template = EncodingProtocol::displacement_pair(1, 0.3, 0.0, ProbeDescriptor::Vacuum).unwrap();
        let ns: Vec<u32> = (8..=64).collect();
        let f = fit_loglog_slope(&qfi_scan(&template, &ns).unwrap(), None).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-9);
    }

    #[test]
    fn fig3_ratio_column() {
        let scan = fig3_scan(&[1, 5, 10], 0.1, Complex64::new(0.3, 0.0), std::f64::consts::FRAC_PI_4, 80, false).unwrap();
        for (n, r) in scan.column("ratio").unwrap() {
            let expected = 1.0 / (1.0 + (-4.0 * n * 0.1f64).exp());
            assert!((r - expected).abs() < 1e-10);
        }
        assert!(scan.column("qfi_fock").unwrap().is_empty());
    }

    #[test]
    fn switch_needs_nonzero_product() {
        assert!(switch_scaling(&[1, 2, 3], 0.0, 0.2, 40).is_err());
    }

    #[test]
    fn dv_scan_bounds() {
        let ns: Vec<u32> = (1..=50).collect();
        let scan = dv_scan(DvPair::Qutrit, &ns, 1.0, None).unwrap();
        assert_eq!(scan.metadata["spread"], "2");
        for (_, v) in scan.column("normalized").unwrap() {
            assert!(v <= 4.0 + 1e-9);
        }
    }
}
