//! Two-branch quantum SWITCH on a single mode.
//!
//! `U_A = e^{-iNxP}` and `U_B = e^{-iNpX}` are applied in both orders,
//! controlled by a qubit prepared in `|+⟩`.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::qfi::{pure_state_qfi, QfiEstimate};
use super::{matrix_of, FockVector, Spectrum};
use crate::algebra::LadderPolynomial;
use crate::error::{Error, Result};

const NORM_TOL: f64 = 1e-10;
/// Below this `1 - |r|²` the control state is treated as pure.
const PURE_TOL: f64 = 1e-10;

/// Control qubit and the joint control-major state `(|0⟩⊗ψ₀, |1⟩⊗ψ₁)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SwitchState {
    pub control: [Complex64; 2],
    pub joint: DVector<Complex64>,
}

impl SwitchState {
    fn new(control: [Complex64; 2], joint: DVector<Complex64>) -> Result<Self> {
        let norm = joint.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::Domain(format!("switch state norm {norm} is not 1")));
        }
        Ok(Self { control, joint })
    }

    pub fn mode_dim(&self) -> usize {
        self.joint.len() / 2
    }

    /// Unnormalized mode component attached to control state `k`.
    pub fn branch(&self, k: usize) -> DVector<Complex64> {
        let d = self.mode_dim();
        self.joint.rows(k * d, d).into_owned()
    }

    /// Reduced density matrix of the control qubit.
    pub fn reduced_control(&self) -> [[Complex64; 2]; 2] {
        let b = [self.branch(0), self.branch(1)];
        let mut rho = [[Complex64::new(0.0, 0.0); 2]; 2];
        for (i, row) in rho.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = b[j].dotc(&b[i]);
            }
        }
        rho
    }

    pub fn bloch_vector(&self) -> [f64; 3] {
        let rho = self.reduced_control();
        [
            2.0 * rho[0][1].re,
            -2.0 * rho[0][1].im,
            rho[0][0].re - rho[1][1].re,
        ]
    }

    /// `⟨ψ₀|ψ₁⟩ / ‖ψ₀‖‖ψ₁‖`; equals `e^{-iN²xp}` on the untruncated ladder.
    pub fn branch_overlap(&self) -> Complex64 {
        let (a, b) = (self.branch(0), self.branch(1));
        a.dotc(&b) / (a.norm() * b.norm())
    }
}

/// QFI of the SWITCH output w.r.t. `x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwitchQfi {
    /// Whole joint state.
    pub joint: QfiEstimate,
    /// Reduced control qubit only.
    pub control: QfiEstimate,
    /// Fixed order `U_A U_B |ψ⟩` without a control.
    pub definite: QfiEstimate,
}

/// Cached spectra of `X` and `P` at one truncation.
#[derive(Debug, Clone)]
pub struct SwitchEngine {
    x: Spectrum,
    p: Spectrum,
}

fn checked(amps: DVector<Complex64>) -> Result<DVector<Complex64>> {
    let v = FockVector::from_amplitudes_unchecked(amps);
    v.check_leakage()?;
    Ok(v.amplitudes().clone())
}

fn bloch_qfi<F>(bloch: F, at: f64, step: f64) -> Result<QfiEstimate>
where
    F: Fn(f64) -> Result<[f64; 3]>,
{
    let r = bloch(at)?;
    let central = |h: f64| -> Result<[f64; 3]> {
        let (up, down) = (bloch(at + h)?, bloch(at - h)?);
        Ok(std::array::from_fn(|i| (up[i] - down[i]) / (2.0 * h)))
    };
    let fisher = |dr: &[f64; 3]| {
        let dot = |u: &[f64; 3], v: &[f64; 3]| u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
        let mixed = 1.0 - dot(&r, &r);
        if mixed < PURE_TOL {
            dot(dr, dr)
        } else {
            dot(dr, dr) + dot(&r, dr).powi(2) / mixed
        }
    };
    let coarse_d = central(step)?;
    let fine_d = central(step / 2.0)?;
    let rich: [f64; 3] = std::array::from_fn(|i| (4.0 * fine_d[i] - coarse_d[i]) / 3.0);
    let (coarse, fine) = (fisher(&coarse_d), fisher(&fine_d));
    let flagged = (coarse - fine).abs() > 5e-3 * fine.abs() && (coarse - fine).abs() > 1e-12;
    Ok(QfiEstimate {
        value: fisher(&rich),
        coarse,
        fine,
        flagged,
        dim: 2,
        trusted: !flagged,
    })
}

impl SwitchEngine {
    pub fn new(dim: usize) -> Result<Self> {
        Ok(Self {
            x: matrix_of(&LadderPolynomial::<f64>::position(), dim).spectrum()?,
            p: matrix_of(&LadderPolynomial::<f64>::momentum(), dim).spectrum()?,
        })
    }

    pub fn dim(&self) -> usize {
        self.x.dim()
    }

    fn check(&self, n: u32, probe: &FockVector) -> Result<()> {
        if n == 0 {
            return Err(Error::Domain("SWITCH needs N ≥ 1".into()));
        }
        if probe.dim() != self.dim() {
            return Err(Error::Domain(format!(
                "probe dim {} vs engine dim {}",
                probe.dim(),
                self.dim()
            )));
        }
        if (probe.norm() - 1.0).abs() > NORM_TOL {
            return Err(Error::Domain("SWITCH probe is not normalized".into()));
        }
        Ok(())
    }

    fn u_a(&self, n: f64, x: f64, v: &DVector<Complex64>) -> Result<DVector<Complex64>> {
        checked(self.p.apply(n * x, v))
    }

    fn u_b(&self, n: f64, p: f64, v: &DVector<Complex64>) -> Result<DVector<Complex64>> {
        checked(self.x.apply(n * p, v))
    }

    /// `U_A U_B |ψ⟩`
    pub fn definite_order(&self, n: u32, x: f64, p: f64, probe: &FockVector) -> Result<DVector<Complex64>> {
        self.check(n, probe)?;
        let nf = n as f64;
        self.u_a(nf, x, &self.u_b(nf, p, probe.amplitudes())?)
    }

    /// `(|0⟩⊗U_A U_B|ψ⟩ + |1⟩⊗U_B U_A|ψ⟩)/√2`
    pub fn protocol(&self, n: u32, x: f64, p: f64, probe: &FockVector) -> Result<SwitchState> {
        self.check(n, probe)?;
        let nf = n as f64;
        let ab = self.u_a(nf, x, &self.u_b(nf, p, probe.amplitudes())?)?;
        let ba = self.u_b(nf, p, &self.u_a(nf, x, probe.amplitudes())?)?;
        let d = self.dim();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let joint = DVector::from_fn(2 * d, |i, _| if i < d { ab[i] * h } else { ba[i - d] * h });
        let plus = Complex64::new(h, 0.0);
        SwitchState::new([plus, plus], joint)
    }

    /// QFI w.r.t. `x` at fixed `p`, for the joint state, the control qubit
    /// and the definite-order reference.
    pub fn qfi(&self, n: u32, x: f64, p: f64, probe: &FockVector, step: f64) -> Result<SwitchQfi> {
        let joint = pure_state_qfi(|t| Ok(self.protocol(n, t, p, probe)?.joint), x, step)?;
        let control = bloch_qfi(|t| Ok(self.protocol(n, t, p, probe)?.bloch_vector()), x, step)?;
        let definite = pure_state_qfi(|t| self.definite_order(n, t, p, probe), x, step)?;
        Ok(SwitchQfi {
            joint,
            control,
            definite,
        })
    }
}

/// One-shot SWITCH at the probe's truncation.
pub fn switch_protocol(n: u32, x: f64, p: f64, probe: &FockVector) -> Result<SwitchState> {
    SwitchEngine::new(probe.dim())?.protocol(n, x, p, probe)
}
