//! Single-mode Gaussian states under quadratic Hamiltonians.
//!
//! Conventions: `R = (X, P)`, `σ_ij = ⟨{ΔR_i, ΔR_j}⟩/2`, vacuum `σ = I/2`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::algebra::LadderPolynomial;
use crate::error::{Error, Result};
use crate::generator::{EncodingProtocol, ProbeDescriptor};
use crate::scalar::Real;

type Mat2<T> = [[T; 2]; 2];

fn mat_mul<T: Real>(a: &Mat2<T>, b: &Mat2<T>) -> Mat2<T> {
    let mut out = [[T::zero(); 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

fn mat_vec<T: Real>(a: &Mat2<T>, v: &[T; 2]) -> [T; 2] {
    [a[0][0] * v[0] + a[0][1] * v[1], a[1][0] * v[0] + a[1][1] * v[1]]
}

fn transpose<T: Real>(a: &Mat2<T>) -> Mat2<T> {
    [[a[0][0], a[1][0]], [a[0][1], a[1][1]]]
}

/// `Ω G` for `Ω = [[0, 1], [-1, 0]]`.
fn omega_mul<T: Real>(g: &Mat2<T>) -> Mat2<T> {
    [[g[1][0], g[1][1]], [-g[0][0], -g[0][1]]]
}

fn omega_vec<T: Real>(d: &[T; 2]) -> [T; 2] {
    [d[1], -d[0]]
}

fn unit<T: Real>(theta: T) -> [T; 2] {
    [theta.cos(), theta.sin()]
}

fn quad_form<T: Real>(u: &[T; 2], m: &Mat2<T>) -> T {
    u[0] * (m[0][0] * u[0] + m[0][1] * u[1]) + u[1] * (m[1][0] * u[0] + m[1][1] * u[1])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianState<T> {
    /// `(⟨X⟩, ⟨P⟩)`
    pub mean: [T; 2],
    pub cov: Mat2<T>,
}

impl<T: Real> GaussianState<T> {
    pub fn vacuum() -> Self {
        let h = T::lit(0.5);
        Self {
            mean: [T::zero(); 2],
            cov: [[h, T::zero()], [T::zero(), h]],
        }
    }

    /// `D(α)|0⟩`; mean `√2 (Re α, Im α)`.
    pub fn coherent(alpha: Complex<T>) -> Self {
        Self {
            mean: [T::SQRT_2() * alpha.re, T::SQRT_2() * alpha.im],
            ..Self::vacuum()
        }
    }

    /// `S(ζ)|0⟩`, `ζ = r e^{iφ}`: variance `e^{-2r}/2` along angle `φ/2`.
    pub fn squeezed_vacuum(r: T, phi: T) -> Self {
        let half = phi / T::lit(2.0);
        let u = unit(half);
        let v = [-u[1], u[0]];
        let (small, large) = ((-r - r).exp() / T::lit(2.0), (r + r).exp() / T::lit(2.0));
        let cov = std::array::from_fn(|i| std::array::from_fn(|j| small * u[i] * u[j] + large * v[i] * v[j]));
        Self {
            mean: [T::zero(); 2],
            cov,
        }
    }

    pub fn from_probe(probe: &ProbeDescriptor<T>) -> Result<Self> {
        match probe {
            ProbeDescriptor::Vacuum => Ok(Self::vacuum()),
            ProbeDescriptor::Coherent { alpha } => Ok(Self::coherent(*alpha)),
            ProbeDescriptor::SqueezedVacuum { r, phi } => Ok(Self::squeezed_vacuum(*r, *phi)),
            ProbeDescriptor::FockBasisVector { .. } => Err(Error::NotGaussian(
                "explicit number-basis probes are not Gaussian".into(),
            )),
        }
    }

    pub fn var_x(&self) -> T {
        self.cov[0][0]
    }

    pub fn var_p(&self) -> T {
        self.cov[1][1]
    }

    pub fn sigma_xp(&self) -> T {
        self.cov[0][1]
    }

    /// `⟨XP + PX⟩ − 2⟨X⟩⟨P⟩ = 2σ_XP`
    pub fn symmetrized_cov_xp(&self) -> T {
        self.cov[0][1] + self.cov[0][1]
    }

    /// `det σ`, equal to 1/4 for pure states.
    pub fn purity_det(&self) -> T {
        self.cov[0][0] * self.cov[1][1] - self.cov[0][1] * self.cov[1][0]
    }
}

/// `H = ½ RᵀGR + dᵀR`, constants dropped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticHamiltonian<T> {
    pub g: Mat2<T>,
    pub d: [T; 2],
}

impl<T: Real> QuadraticHamiltonian<T> {
    pub fn from_polynomial(poly: &LadderPolynomial<T>) -> Result<Self> {
        let degree = poly.degree();
        if degree > 2 {
            return Err(Error::NotGaussian(format!(
                "degree {degree} Hamiltonian `{poly}` is not quadratic"
            )));
        }
        if !poly.is_hermitian() {
            return Err(Error::NotHermitian {
                what: "Hamiltonian".into(),
                deviation: poly.hermiticity_defect().to_f64_lossy(),
            });
        }
        let c = |m, n| poly.coefficient(m, n);
        let half = T::lit(0.5);
        let i = Complex::new(T::zero(), T::one());
        let (c20, c02, c11) = (c(2, 0), c(0, 2), c(1, 1));
        let xx = (c20 + c02) * half + c11 * half;
        let pp = -(c20 + c02) * half + c11 * half;
        let xp = i * (c02 - c20) * half;
        let two = T::lit(2.0);
        let g = [[two * xx.re, two * xp.re], [two * xp.re, two * pp.re]];
        let (c10, c01) = (c(1, 0), c(0, 1));
        let d = [
            (c10 + c01).re * T::FRAC_1_SQRT_2(),
            (i * (c01 - c10)).re * T::FRAC_1_SQRT_2(),
        ];
        Ok(Self { g, d })
    }

    /// Heisenberg drift `A = ΩG`.
    fn drift(&self) -> Mat2<T> {
        omega_mul(&self.g)
    }
}

/// `(c0, c1, c2)` with `c0 = Σ z^k/(2k)!`, `c1 = Σ z^k/(2k+1)!`, `c2 = Σ z^k/(2k+2)!`.
fn flow_coefficients<T: Real>(z: T) -> (T, T, T) {
    if z.abs() < T::one() {
        let (mut c0, mut c1, mut c2) = (T::zero(), T::zero(), T::zero());
        let mut term = T::one();
        for k in 0..40u32 {
            let j = T::from_u32(2 * k).unwrap();
            if k > 0 {
                term = term * z / (j * (j - T::one()));
            }
            let t1 = term / (j + T::one());
            let t2 = t1 / (j + T::lit(2.0));
            c0 += term;
            c1 += t1;
            c2 += t2;
            if term.abs() < T::epsilon() * T::lit(1e-3) {
                break;
            }
        }
        (c0, c1, c2)
    } else if z > T::zero() {
        let s = z.sqrt();
        (s.cosh(), s.sinh() / s, (s.cosh() - T::one()) / z)
    } else {
        let s = (-z).sqrt();
        (s.cos(), s.sin() / s, (T::one() - s.cos()) / (-z))
    }
}

/// `exp(tA)` and `∫₀ᵗ exp(sA) ds` for traceless `A`.
fn flow<T: Real>(a: &Mat2<T>, t: T) -> (Mat2<T>, Mat2<T>) {
    // A² = δ I
    let delta = a[0][0] * a[0][0] + a[0][1] * a[1][0];
    let (c0, c1, c2) = flow_coefficients(delta * t * t);
    let s = std::array::from_fn(|i| {
        std::array::from_fn(|j| if i == j { c0 } else { T::zero() } + t * c1 * a[i][j])
    });
    let integral = std::array::from_fn(|i| {
        std::array::from_fn(|j| if i == j { t * c1 } else { T::zero() } + t * t * c2 * a[i][j])
    });
    (s, integral)
}

/// State after `exp(-itH)`.
pub fn evolve<T: Real>(state: &GaussianState<T>, ham: &QuadraticHamiltonian<T>, t: T) -> GaussianState<T> {
    let a = ham.drift();
    let (s, integral) = flow(&a, t);
    let shift = mat_vec(&integral, &omega_vec(&ham.d));
    let moved = mat_vec(&s, &state.mean);
    let mut cov = mat_mul(&mat_mul(&s, &state.cov), &transpose(&s));
    let sym = (cov[0][1] + cov[1][0]) / T::lit(2.0);
    cov[0][1] = sym;
    cov[1][0] = sym;
    GaussianState {
        mean: [moved[0] + shift[0], moved[1] + shift[1]],
        cov,
    }
}

/// `N` gates of `H_g` with strength `ḡ`, then `N` gates of `H_λ` with strength `λ̄`.
/// Gates of one kind commute, so each block is a single evolution.
pub fn apply_encoding<T: Real>(
    state: &GaussianState<T>,
    h_g: &QuadraticHamiltonian<T>,
    h_lambda: &QuadraticHamiltonian<T>,
    n: u32,
    g_bar: T,
    lambda_bar: T,
) -> GaussianState<T> {
    if n == 0 {
        return *state;
    }
    let nf = T::from_u32(n).unwrap();
    evolve(&evolve(state, h_g, nf * g_bar), h_lambda, nf * lambda_bar)
}

struct Compiled<T> {
    h_g: QuadraticHamiltonian<T>,
    h_lambda: QuadraticHamiltonian<T>,
    probe: GaussianState<T>,
}

fn compile<T: Real>(p: &EncodingProtocol<T>) -> Result<Compiled<T>> {
    Ok(Compiled {
        h_g: QuadraticHamiltonian::from_polynomial(p.h_g())?,
        h_lambda: QuadraticHamiltonian::from_polynomial(p.h_lambda())?,
        probe: GaussianState::from_probe(p.probe())?,
    })
}

/// Final Gaussian state of the protocol.
pub fn run_protocol<T: Real>(p: &EncodingProtocol<T>) -> Result<GaussianState<T>> {
    let c = compile(p)?;
    Ok(apply_encoding(&c.probe, &c.h_g, &c.h_lambda, p.n(), p.g_bar(), p.lambda_bar()))
}

/// `aX + bP + c` with real `a`, `b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearQuadrature<T> {
    pub a: T,
    pub b: T,
}

impl<T: Real> LinearQuadrature<T> {
    pub fn from_polynomial(gen: &LadderPolynomial<T>) -> Result<Self> {
        let degree = gen.degree();
        if degree > 1 {
            return Err(Error::HigherDegreeGenerator { degree });
        }
        if !gen.is_hermitian() {
            return Err(Error::NotHermitian {
                what: "generator".into(),
                deviation: gen.hermiticity_defect().to_f64_lossy(),
            });
        }
        let ham = QuadraticHamiltonian::from_polynomial(gen)?;
        Ok(Self {
            a: ham.d[0],
            b: ham.d[1],
        })
    }
}

/// `4 Var[gen]` on a Gaussian state, for generators linear in the quadratures.
pub fn qfi_linear_generator<T: Real>(probe: &GaussianState<T>, gen: &LadderPolynomial<T>) -> Result<T> {
    let LinearQuadrature { a, b } = LinearQuadrature::from_polynomial(gen)?;
    let var = quad_form(&[a, b], &probe.cov);
    Ok(T::lit(4.0) * var.max(T::zero()))
}

/// Homodyne measurement of `Q = X cos θ + P sin θ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HomodyneSpec<T> {
    pub theta: T,
}

pub fn homodyne_mean<T: Real>(state: &GaussianState<T>, spec: &HomodyneSpec<T>) -> T {
    let u = unit(spec.theta);
    u[0] * state.mean[0] + u[1] * state.mean[1]
}

/// `uᵀσu` with `u = (cos θ, sin θ)`.
pub fn homodyne_variance<T: Real>(state: &GaussianState<T>, spec: &HomodyneSpec<T>) -> T {
    quad_form(&unit(spec.theta), &state.cov)
}

/// Classical Fisher information of homodyne data about `λ̄`:
/// `(∂⟨Q⟩)²/Δ²Q + ½ (∂Δ²Q)²/(Δ²Q)²`, with exact derivatives from the
/// moment equations of the last evolution block.
pub fn cfi_quadrature<T: Real>(p: &EncodingProtocol<T>, spec: &HomodyneSpec<T>) -> Result<T> {
    let c = compile(p)?;
    let state = apply_encoding(&c.probe, &c.h_g, &c.h_lambda, p.n(), p.g_bar(), p.lambda_bar());
    let var = homodyne_variance(&state, spec);
    if var.to_f64_lossy() < 1e-300 {
        return Err(Error::DegenerateMeasurement {
            variance: var.to_f64_lossy(),
        });
    }
    let nf = T::from_u32(p.n()).unwrap();
    let a = c.h_lambda.drift();
    let od = omega_vec(&c.h_lambda.d);
    let am = mat_vec(&a, &state.mean);
    let d_mean = [nf * (am[0] + od[0]), nf * (am[1] + od[1])];
    let ac = mat_mul(&a, &state.cov);
    let act = transpose(&ac);
    let d_cov: Mat2<T> = std::array::from_fn(|i| std::array::from_fn(|j| nf * (ac[i][j] + act[i][j])));
    let u = unit(spec.theta);
    let dq = u[0] * d_mean[0] + u[1] * d_mean[1];
    let dv = quad_form(&u, &d_cov);
    Ok(dq * dq / var + T::lit(0.5) * dv * dv / (var * var))
}

impl<T: Real> Default for GaussianState<T> {
    fn default() -> Self {
        Self::vacuum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::parse_operator;
    use std::f64::consts::FRAC_PI_4;

    fn ham(s: &str) -> QuadraticHamiltonian<f64> {
        QuadraticHamiltonian::from_polynomial(&parse_operator(s).unwrap()).unwrap()
    }

    #[test]
    fn hamiltonian_conversion() {
        let h = ham("X^2");
        assert!((h.g[0][0] - 2.0).abs() < 1e-15 && h.g[0][1] == 0.0 && h.g[1][1].abs() < 1e-15);
        let h = ham("ad^2 + a^2");
        assert!((h.g[0][0] - 2.0).abs() < 1e-15 && (h.g[1][1] + 2.0).abs() < 1e-15);
        assert!(h.g[0][1].abs() < 1e-15);
        let h = ham("P");
        assert!(h.d[0].abs() < 1e-15 && (h.d[1] - 1.0).abs() < 1e-15);
        let h = ham("X P + P X");
        assert!((h.g[0][1] - 2.0).abs() < 1e-15);
        assert!(QuadraticHamiltonian::from_polynomial(&parse_operator::<f64>("X^3").unwrap()).is_err());
    }

    #[test]
    fn displacement_shifts_x() {
        let out = evolve(&GaussianState::vacuum(), &ham("P"), 0.3);
        assert!((out.mean[0] - 0.3).abs() < 1e-15 && out.mean[1].abs() < 1e-15);
        assert_eq!(out.cov, GaussianState::<f64>::vacuum().cov);
    }

    #[test]
    fn shear_in_heisenberg_picture() {
        // P → P − 2sX
        let s = 0.2;
        let out = evolve(&GaussianState::coherent(Complex::new(0.5, 0.0)), &ham("X^2"), s);
        let x0 = 2f64.sqrt() * 0.5;
        assert!((out.mean[0] - x0).abs() < 1e-15);
        assert!((out.mean[1] + 2.0 * s * x0).abs() < 1e-14);
        assert!((out.var_x() - 0.5).abs() < 1e-15);
        assert!((out.sigma_xp() + s).abs() < 1e-14);
        assert!((out.purity_det() - 0.25).abs() < 1e-14);
    }

    #[test]
    fn squeezing_protocol_variances() {
        let (n, xi) = (4u32, 0.1);
        let p = EncodingProtocol::squeezing(n, xi, 0.0, ProbeDescriptor::Coherent {
            alpha: Complex::new(0.3, 0.0),
        })
        .unwrap();
        let st = run_protocol(&p).unwrap();
        let r = n as f64 * xi;
        let plus = homodyne_variance(&st, &HomodyneSpec { theta: FRAC_PI_4 });
        let minus = homodyne_variance(&st, &HomodyneSpec { theta: -FRAC_PI_4 });
        assert!((plus - (-2.0 * r).exp() / 2.0).abs() < 1e-12);
        assert!((minus - (2.0 * r).exp() / 2.0).abs() < 1e-12);
        let zero = homodyne_variance(&st, &HomodyneSpec { theta: 0.0 });
        assert!((zero - (2.0 * r).cosh() / 2.0).abs() < 1e-12);
    }

    #[test]
    fn squeezed_probe_matches_gate() {
        // e^{-i(ξ/2)(a†²+a²)} = S(ζ) with ζ = iξ
        let xi = 0.35;
        let gate = evolve(&GaussianState::vacuum(), &ham("ad^2 + a^2"), xi / 2.0);
        let probe = GaussianState::squeezed_vacuum(xi, std::f64::consts::FRAC_PI_2);
        for i in 0..2 {
            for j in 0..2 {
                assert!((gate.cov[i][j] - probe.cov[i][j]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn large_and_negative_flow_arguments() {
        // rotation: H = (X² + P²)/2 for t = π swaps sign of the mean
        let out = evolve(&GaussianState::coherent(Complex::new(1.0, 0.0)), &ham("ad a"), std::f64::consts::PI);
        assert!((out.mean[0] + 2f64.sqrt()).abs() < 1e-14);
        let sq = evolve(&GaussianState::vacuum(), &ham("ad^2 + a^2"), 1.5);
        assert!((sq.purity_det() - 0.25).abs() < 1e-9);
    }

    #[test]
    fn n_zero_keeps_probe() {
        let probe = GaussianState::coherent(Complex::new(0.3, -0.1));
        let out = apply_encoding(&probe, &ham("X^2"), &ham("P"), 0, 0.5, 0.5);
        assert_eq!(out, probe);
    }

    #[test]
    fn linear_generator_qfi() {
        let n = 3.0f64;
        let xi = 0.1;
        let gen = &parse_operator::<f64>("X").unwrap().scale_real(-n * (n * xi).sinh())
            + &parse_operator::<f64>("P").unwrap().scale_real(n * (n * xi).cosh());
        let q = qfi_linear_generator(&GaussianState::coherent(Complex::new(0.3, 0.0)), &gen).unwrap();
        assert!((q - 2.0 * n * n * (2.0 * n * xi).cosh()).abs() < 1e-12);
        let higher = parse_operator::<f64>("X^2").unwrap();
        assert!(matches!(
            qfi_linear_generator(&GaussianState::vacuum(), &higher),
            Err(Error::HigherDegreeGenerator { degree: 2 })
        ));
    }

    #[test]
    fn homodyne_cfi_at_diagonal() {
        let (n, xi) = (5u32, 0.1);
        let p = EncodingProtocol::squeezing(n, xi, 0.2, ProbeDescriptor::Coherent {
            alpha: Complex::new(0.3, 0.0),
        })
        .unwrap();
        let cfi = cfi_quadrature(&p, &HomodyneSpec { theta: FRAC_PI_4 }).unwrap();
        let nf = n as f64;
        assert!((cfi / (nf * nf * (2.0 * nf * xi).exp()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn uninformative_quadrature_has_zero_cfi() {
        // P-displacements are invisible to a P measurement
        let p = EncodingProtocol::new(
            parse_operator("P").unwrap(),
            parse_operator("P").unwrap(),
            3,
            0.1,
            0.1,
            ProbeDescriptor::Vacuum,
        )
        .unwrap();
        let cfi = cfi_quadrature(&p, &HomodyneSpec {
            theta: std::f64::consts::FRAC_PI_2,
        })
        .unwrap();
        assert!(cfi < 1e-20, "{cfi}");
    }

    #[test]
    fn fock_probe_is_not_gaussian() {
        let probe = ProbeDescriptor::FockBasisVector {
            amplitudes: vec![Complex::new(0.0, 0.0), Complex::new(1.0, 0.0)],
        };
        assert!(matches!(GaussianState::<f64>::from_probe(&probe), Err(Error::NotGaussian(_))));
    }

    #[test]
    fn f32_squeezing_qfi() {
        let p = EncodingProtocol::<f32>::squeezing(2, 0.1, 0.0, ProbeDescriptor::Vacuum).unwrap();
        let st = run_protocol(&p).unwrap();
        assert!((st.purity_det() - 0.25).abs() < 1e-5);
    }
}
