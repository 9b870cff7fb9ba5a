//! Spectral bound on the local-generator variance in finite dimension.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::MatrixOperator;
use crate::error::{Error, Result};

/// Relative slack on `QFI ≤ N² spread²` for rounding.
const BOUND_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DvBoundRow {
    pub n: u32,
    pub qfi: f64,
    pub bound: f64,
    /// `qfi / N²`
    pub normalized: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DvBoundReport {
    /// `λ_max − λ_min` of `h_λ`.
    pub spread: f64,
    pub rows: Vec<DvBoundRow>,
}

/// For each `N`: `h = N U† h_λ U` with `U = exp(-iNḡ h_g)`, `QFI = 4 Var[h]`,
/// checked against `N² (λ_max − λ_min)²`.
pub fn dv_bound_check(
    h_g: &MatrixOperator,
    h_lambda: &MatrixOperator,
    n_list: &[u32],
    g_bar: f64,
    probe: &DVector<Complex64>,
) -> Result<DvBoundReport> {
    let d = h_lambda.dim();
    if d < 2 {
        return Err(Error::Domain("DV bound needs dimension ≥ 2".into()));
    }
    if h_g.dim() != d || probe.len() != d {
        return Err(Error::Domain(format!(
            "dimension mismatch: h_g {}, h_lambda {d}, probe {}",
            h_g.dim(),
            probe.len()
        )));
    }
    let norm = probe.norm();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::Domain(format!("probe norm {norm} is not 1")));
    }
    let g_spec = h_g.spectrum()?;
    let levels = h_lambda.spectrum()?.eigenvalues();
    let spread = levels[d - 1] - levels[0];

    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        if n == 0 {
            return Err(Error::Domain("N must be ≥ 1".into()));
        }
        let nf = n as f64;
        let u = g_spec.unitary(nf * g_bar);
        // Var of N U† h_λ U on ψ equals Var of N h_λ on Uψ
        let moved = u.apply(probe);
        let hv = h_lambda.apply(&moved);
        let mean = moved.dotc(&hv);
        let var = (hv.norm_squared() - mean.norm_sqr()).max(0.0);
        let qfi = 4.0 * nf * nf * var;
        let bound = nf * nf * spread * spread;
        if qfi > bound * (1.0 + BOUND_SLACK) {
            return Err(Error::BoundViolation { n, qfi, bound });
        }
        rows.push(DvBoundRow {
            n,
            qfi,
            bound,
            normalized: qfi / (nf * nf),
        });
    }
    Ok(DvBoundReport { spread, rows })
}
