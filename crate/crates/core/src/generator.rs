//! Local generator `ĥ = i U† ∂_λ U` of the block-encoded protocol
//! `U = e^{-iNλH_λ} e^{-iNḡH_g}`, and the leading-order QFI quantities.

use nalgebra::DMatrix;
use num_complex::{Complex, Complex64};
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::algebra::{Classification, LadderPolynomial, NilpotencyReport};
use crate::error::{Error, Result};
use crate::fock::{matrix_of, MatrixOperator};
use crate::scalar::Real;

const HERMITIAN_TOL: f64 = 1e-10;
const NORM_TOL: f64 = 1e-10;
/// Sub-block agreement required between two working truncations.
const CONJUGATION_TOL: f64 = 1e-8;
/// Largest working truncation used by [`generator_by_conjugation`].
pub const CONJUGATION_MAX_WORK: usize = 8192;

/// Initial state of the mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProbeDescriptor<T> {
    Vacuum,
    Coherent { alpha: Complex<T> },
    /// `S(ζ)|0⟩` with `ζ = r e^{iφ}`.
    SqueezedVacuum { r: T, phi: T },
    /// Explicit number-basis amplitudes, normalized.
    FockBasisVector { amplitudes: Vec<Complex<T>> },
}

impl<T: Real> ProbeDescriptor<T> {
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Vacuum => Ok(()),
            Self::Coherent { alpha } => {
                if alpha.re.is_finite() && alpha.im.is_finite() {
                    Ok(())
                } else {
                    Err(Error::Domain("coherent amplitude is not finite".into()))
                }
            }
            Self::SqueezedVacuum { r, phi } => {
                if r.is_finite() && phi.is_finite() {
                    Ok(())
                } else {
                    Err(Error::Domain("squeezing parameters are not finite".into()))
                }
            }
            Self::FockBasisVector { amplitudes } => {
                if amplitudes.is_empty() {
                    return Err(Error::Domain("explicit probe has no amplitudes".into()));
                }
                let norm = amplitudes
                    .iter()
                    .map(|a| a.norm_sqr().to_f64_lossy())
                    .sum::<f64>()
                    .sqrt();
                if (norm - 1.0).abs() > NORM_TOL.max(T::TOL_FLOOR) {
                    return Err(Error::Domain(format!("explicit probe norm {norm} is not 1")));
                }
                Ok(())
            }
        }
    }
}

/// `U(λ̄) = e^{-iNλ̄H_λ} e^{-iNḡH_g}` acting on a probe.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodingProtocol<T: Real> {
    h_lambda: LadderPolynomial<T>,
    h_g: LadderPolynomial<T>,
    n: u32,
    lambda_bar: T,
    g_bar: T,
    probe: ProbeDescriptor<T>,
}

impl<T: Real> EncodingProtocol<T> {
    pub fn new(
        h_lambda: LadderPolynomial<T>,
        h_g: LadderPolynomial<T>,
        n: u32,
        lambda_bar: T,
        g_bar: T,
        probe: ProbeDescriptor<T>,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("N must be ≥ 1".into()));
        }
        for (what, op) in [("H_lambda", &h_lambda), ("H_g", &h_g)] {
            if !op.is_hermitian() {
                return Err(Error::NotHermitian {
                    what: what.into(),
                    deviation: op.hermiticity_defect().to_f64_lossy(),
                });
            }
        }
        if !lambda_bar.is_finite() || !g_bar.is_finite() {
            return Err(Error::Domain("protocol parameters must be finite".into()));
        }
        probe.validate()?;
        Ok(Self {
            h_lambda,
            h_g,
            n,
            lambda_bar,
            g_bar,
            probe,
        })
    }

    /// Shearing gates `e^{-is X²}` then displacements `e^{-ixP}`; `ḡ = s̄`.
    pub fn shearing(n: u32, s_bar: T, x_bar: T, probe: ProbeDescriptor<T>) -> Result<Self> {
        let x = LadderPolynomial::position();
        Self::new(LadderPolynomial::momentum(), x.product(&x)?, n, x_bar, s_bar, probe)
    }

    /// Squeezing gates `e^{-i(ξ/2)(a†² + a²)}` then displacements; `ḡ = ξ̄/2`.
    pub fn squeezing(n: u32, xi_bar: T, x_bar: T, probe: ProbeDescriptor<T>) -> Result<Self> {
        let one = Complex::one();
        let g = LadderPolynomial::from_terms([((2, 0), one), ((0, 2), one)]);
        Self::new(LadderPolynomial::momentum(), g, n, x_bar, xi_bar / T::lit(2.0), probe)
    }

    /// `H_g = X`, `H_λ = P`: constant commutator.
    pub fn displacement_pair(n: u32, g_bar: T, lambda_bar: T, probe: ProbeDescriptor<T>) -> Result<Self> {
        Self::new(
            LadderPolynomial::momentum(),
            LadderPolynomial::position(),
            n,
            lambda_bar,
            g_bar,
            probe,
        )
    }

    pub fn h_lambda(&self) -> &LadderPolynomial<T> {
        &self.h_lambda
    }

    pub fn h_g(&self) -> &LadderPolynomial<T> {
        &self.h_g
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn lambda_bar(&self) -> T {
        self.lambda_bar
    }

    pub fn g_bar(&self) -> T {
        self.g_bar
    }

    pub fn probe(&self) -> &ProbeDescriptor<T> {
        &self.probe
    }

    pub fn with_n(&self, n: u32) -> Result<Self> {
        Self::new(
            self.h_lambda.clone(),
            self.h_g.clone(),
            n,
            self.lambda_bar,
            self.g_bar,
            self.probe.clone(),
        )
    }

    pub fn with_lambda_bar(&self, lambda_bar: T) -> Self {
        Self {
            lambda_bar,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorResult<T: Real> {
    pub generator: LadderPolynomial<T>,
    /// Number of tower entries summed.
    pub truncation_used: usize,
    /// The closed form of the `ad²C = -pC` family was used.
    pub closed_form: bool,
}

/// `N (iNḡ)^n / n!` for `n = 0..=k`.
fn series_weights<T: Real>(n: u32, g_bar: T, k: usize) -> Vec<Complex<T>> {
    let nf = T::from_u32(n).unwrap();
    let step = Complex::new(T::zero(), nf * g_bar);
    let mut w = Complex::new(nf, T::zero());
    let mut out = Vec::with_capacity(k + 1);
    for j in 0..=k {
        if j > 0 {
            w = w * step / T::from_usize(j).unwrap();
        }
        out.push(w);
    }
    out
}

fn check_hermitian<T: Real>(g: &LadderPolynomial<T>) -> Result<()> {
    let defect = g.hermiticity_defect().to_f64_lossy();
    let scale = g.max_abs_coefficient().to_f64_lossy().max(1.0);
    if defect > HERMITIAN_TOL.max(T::TOL_FLOOR * 10.0) * scale {
        return Err(Error::NotHermitian {
            what: "local generator".into(),
            deviation: defect,
        });
    }
    Ok(())
}

/// `ĥ_λ̄ = N Σ_n (iNḡ)^n/n! ad_{H_g}^n(H_λ)`, summed exactly for finite towers
/// and in closed form for the `ad²C = -pC` family.
pub fn local_generator<T: Real>(
    p: &EncodingProtocol<T>,
    report: &NilpotencyReport<T>,
) -> Result<GeneratorResult<T>> {
    let matches = report
        .tower
        .first()
        .map(|h| h.approx_eq(&p.h_lambda, T::tol(1e-12)))
        .unwrap_or(false);
    if !matches {
        return Err(Error::Domain("report was not built from this protocol's H_lambda".into()));
    }
    let result = match report.classification {
        Classification::Finite { k } | Classification::FiniteConstant { k, .. } => {
            let w = series_weights(p.n, p.g_bar, k);
            let mut acc = LadderPolynomial::zero();
            for (wj, tj) in w.iter().zip(&report.tower) {
                acc = &acc + &tj.scale(*wj);
            }
            GeneratorResult {
                generator: acc,
                truncation_used: k + 1,
                closed_form: false,
            }
        }
        Classification::ClosedInfinite { p: pc } => {
            let nf = T::from_u32(p.n).unwrap();
            let root = pc.sqrt();
            let theta = nf * p.g_bar;
            let c = &report.tower[1];
            let d = match report.tower.get(2) {
                Some(d) => d.clone(),
                None => p.h_g.commutator(c)?,
            };
            let c_coef = Complex::new(T::zero(), nf * (theta * root).sinh() / root);
            let d_coef = Complex::new(nf * (T::one() - (theta * root).cosh()) / pc, T::zero());
            let generator = &(&p.h_lambda.scale_real(nf) + &c.scale(c_coef)) + &d.scale(d_coef);
            GeneratorResult {
                generator,
                truncation_used: 3,
                closed_form: true,
            }
        }
        Classification::CapReached { cap } => return Err(Error::UnclassifiedPair { cap }),
    };
    check_hermitian(&result.generator)?;
    Ok(result)
}

/// The series truncated after `order` commutators, computed directly.
pub fn truncated_series<T: Real>(p: &EncodingProtocol<T>, order: usize) -> Result<LadderPolynomial<T>> {
    let w = series_weights(p.n, p.g_bar, order);
    let mut term = p.h_lambda.clone();
    let mut acc = term.scale(w[0]);
    for wj in &w[1..] {
        term = p.h_g.commutator(&term)?;
        if term.is_zero() {
            break;
        }
        acc = &acc + &term.scale(*wj);
    }
    Ok(acc)
}

fn ln_factorial(k: usize) -> f64 {
    (2..=k).map(|j| (j as f64).ln()).sum()
}

/// `ln(N^{2(1+K)} / (K!)²)`
pub fn ln_peak_coefficient(k: usize, n: u32) -> f64 {
    2.0 * (1.0 + k as f64) * (n as f64).ln() - 2.0 * ln_factorial(k)
}

/// Leading-order QFI `4 N^{2(1+K)}/(K!)² ḡ^{2K} Var_K`, evaluated in log space.
pub fn leading_qfi_coefficient<T: Real>(k: usize, n: u32, g_bar: T, var_k: T) -> Result<T> {
    if n == 0 {
        return Err(Error::Domain("N must be ≥ 1".into()));
    }
    if var_k < T::zero() {
        return Err(Error::Domain(format!("variance must be ≥ 0, got {var_k}")));
    }
    let g = g_bar.to_f64_lossy().abs();
    if var_k.is_zero() || (k > 0 && g == 0.0) {
        return Ok(T::zero());
    }
    let ln = 4f64.ln() + ln_peak_coefficient(k, n) + 2.0 * k as f64 * if k > 0 { g.ln() } else { 0.0 }
        + var_k.to_f64_lossy().ln();
    Ok(T::lit(ln.exp()))
}

/// All `K ∈ [0, k_max]` maximizing `N^{2(1+K)}/(K!)²`.
pub fn k_peak(n: u32, k_max: usize) -> Result<Vec<usize>> {
    if n == 0 {
        return Err(Error::Domain("N must be ≥ 1".into()));
    }
    if k_max < n as usize + 1 {
        return Err(Error::Domain(format!("k_max must be ≥ N+1 = {}, got {k_max}", n + 1)));
    }
    let values: Vec<f64> = (0..=k_max).map(|k| ln_peak_coefficient(k, n)).collect();
    let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tol = 1e-12 * best.abs().max(1.0);
    Ok((0..=k_max).filter(|&k| best - values[k] <= tol).collect())
}

/// Quantum Cramér-Rao RMSE `1/√(νF)`.
pub fn qcrb_rmse<T: Real>(qfi: T, nu: u32) -> Result<T> {
    if !(qfi > T::zero()) {
        return Err(Error::Domain(format!("QFI must be > 0, got {qfi}")));
    }
    if nu == 0 {
        return Err(Error::Domain("repetition count must be ≥ 1".into()));
    }
    Ok(T::one() / (T::from_u32(nu).unwrap() * qfi).sqrt())
}

/// `N U† H_λ U` restricted to the first `dim` levels, with `U = e^{-iNḡH_g}`
/// built at a working truncation `W ≥ dim`.
fn conjugated_at(h_g: &MatrixOperator, h_l: &MatrixOperator, n: f64, g_bar: f64, dim: usize) -> Result<DMatrix<Complex64>> {
    let u = h_g.spectrum()?.evolution_columns(n * g_bar, dim);
    Ok((u.adjoint() * h_l.matrix() * &u) * Complex64::new(n, 0.0))
}

/// Brute-force `N e^{iNḡH_g} H_λ e^{-iNḡH_g}` projected onto the lowest `dim`
/// levels. The working truncation starts at `dim` and doubles until two
/// successive ones agree within 1e-8 on the rows/columns below `dim/2`.
pub fn generator_by_conjugation(p: &EncodingProtocol<f64>, dim: usize) -> Result<MatrixOperator> {
    if dim < 8 {
        return Err(Error::Domain(format!("dim must be ≥ 8, got {dim}")));
    }
    let n = p.n as f64;
    let sub = dim / 2;
    let at = |w: usize| -> Result<DMatrix<Complex64>> {
        conjugated_at(&matrix_of(&p.h_g, w), &matrix_of(&p.h_lambda, w), n, p.g_bar, dim)
    };
    let mut work = dim;
    let mut current = at(work)?;
    let mut deviation = f64::INFINITY;
    while work * 2 <= CONJUGATION_MAX_WORK {
        let next = at(work * 2)?;
        deviation = 0.0;
        for j in 0..sub {
            for i in 0..sub {
                deviation = deviation.max((next[(i, j)] - current[(i, j)]).norm());
            }
        }
        if deviation < CONJUGATION_TOL {
            return Ok(MatrixOperator::new(next));
        }
        work *= 2;
        current = next;
    }
    Err(Error::TruncationInstability {
        dim: work / 2,
        doubled: work,
        deviation,
    })
}
