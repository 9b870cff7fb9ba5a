use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Default bound on the total degree `m + n` of any product term.
pub const DEFAULT_MAX_DEGREE: u32 = 64;

/// Polynomial in one bosonic mode, stored normal-ordered.
///
/// The key `(m, n)` stands for the monomial `(a†)^m a^n`. Zero coefficients
/// are never stored, so the zero operator is the empty map and a multiple of
/// the identity has the single key `(0, 0)`.
#[derive(Clone, PartialEq, Default)]
pub struct LadderPolynomial<T> {
    terms: BTreeMap<(u32, u32), Complex<T>>,
}

impl<T: Real> LadderPolynomial<T> {
    pub fn zero() -> Self {
        Self {
            terms: BTreeMap::new(),
        }
    }

    pub fn identity() -> Self {
        Self::scalar(Complex::one())
    }

    pub fn scalar(c: Complex<T>) -> Self {
        Self::monomial(0, 0, c)
    }

    pub fn monomial(creation: u32, annihilation: u32, c: Complex<T>) -> Self {
        Self::from_terms([((creation, annihilation), c)])
    }

    /// Builds a canonical polynomial, summing repeated keys and chopping.
    pub fn from_terms<I>(terms: I) -> Self
    where
        I: IntoIterator<Item = ((u32, u32), Complex<T>)>,
    {
        let mut map = BTreeMap::new();
        for (key, c) in terms {
            *map.entry(key).or_insert_with(Complex::zero) += c;
        }
        Self::canonical(map)
    }

    fn canonical(mut terms: BTreeMap<(u32, u32), Complex<T>>) -> Self {
        let chop = T::chop();
        terms.retain(|_, c| c.norm() > chop);
        for c in terms.values_mut() {
            *c = Complex::new(c.re.snap_dyadic(), c.im.snap_dyadic());
        }
        Self { terms }
    }

    /// `â`
    pub fn annihilation() -> Self {
        Self::monomial(0, 1, Complex::one())
    }

    /// `â†`
    pub fn creation() -> Self {
        Self::monomial(1, 0, Complex::one())
    }

    /// `â†â`
    pub fn number() -> Self {
        Self::monomial(1, 1, Complex::one())
    }

    /// `X̂ = (â† + â)/√2`
    pub fn position() -> Self {
        let h = Complex::new(T::FRAC_1_SQRT_2(), T::zero());
        Self::from_terms([((1, 0), h), ((0, 1), h)])
    }

    /// `P̂ = i(â† − â)/√2`
    pub fn momentum() -> Self {
        let h = Complex::new(T::zero(), T::FRAC_1_SQRT_2());
        Self::from_terms([((1, 0), h), ((0, 1), -h)])
    }

    pub fn coefficient(&self, creation: u32, annihilation: u32) -> Complex<T> {
        self.terms
            .get(&(creation, annihilation))
            .copied()
            .unwrap_or_else(Complex::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = ((u32, u32), Complex<T>)> + '_ {
        self.terms.iter().map(|(&k, &c)| (k, c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree `max(m + n)`; zero for the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|&(m, n)| m + n).max().unwrap_or(0)
    }

    /// The scalar value if this is a multiple of the identity (including zero).
    pub fn as_scalar(&self) -> Option<Complex<T>> {
        match self.terms.len() {
            0 => Some(Complex::zero()),
            1 => self.terms.get(&(0, 0)).copied(),
            _ => None,
        }
    }

    pub fn max_abs_coefficient(&self) -> T {
        self.terms
            .values()
            .map(|c| c.norm())
            .fold(T::zero(), T::max)
    }

    pub fn scale(&self, c: Complex<T>) -> Self {
        Self::canonical(self.terms.iter().map(|(&k, &v)| (k, v * c)).collect())
    }

    pub fn scale_real(&self, c: T) -> Self {
        self.scale(Complex::new(c, T::zero()))
    }

    /// Hermitian conjugate: `c (a†)^m a^n  ->  c* (a†)^n a^m`.
    pub fn adjoint(&self) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|(&(m, n), c)| ((n, m), c.conj()))
                .collect(),
        }
    }

    /// Largest coefficient magnitude of `self − other`.
    pub fn distance(&self, other: &Self) -> T {
        let mut worst = T::zero();
        for key in self.terms.keys().chain(other.terms.keys()) {
            let d = (self.coefficient(key.0, key.1) - other.coefficient(key.0, key.1)).norm();
            worst = worst.max(d);
        }
        worst
    }

    pub fn approx_eq(&self, other: &Self, tol: T) -> bool {
        self.distance(other) <= tol
    }

    /// Largest deviation `|c(m,n) − conj(c(n,m))|` over all stored terms.
    pub fn hermiticity_defect(&self) -> T {
        self.terms
            .iter()
            .map(|(&(m, n), &c)| (c - self.coefficient(n, m).conj()).norm())
            .fold(T::zero(), T::max)
    }

    pub fn product(&self, rhs: &Self) -> Result<Self> {
        self.product_bounded(rhs, DEFAULT_MAX_DEGREE)
    }

    /// Normal-ordered product using `a^n (a†)^p = Σ_k C(n,k) C(p,k) k! (a†)^(p−k) a^(n−k)`.
    pub fn product_bounded(&self, rhs: &Self, max_degree: u32) -> Result<Self> {
        let mut out: BTreeMap<(u32, u32), Complex<T>> = BTreeMap::new();
        for (&(m, n), &c1) in &self.terms {
            for (&(p, q), &c2) in &rhs.terms {
                let degree = m + n + p + q;
                if degree > max_degree {
                    return Err(Error::DegreeLimit {
                        degree,
                        limit: max_degree,
                    });
                }
                let c = c1 * c2;
                let mut weight = T::one();
                for k in 0..=n.min(p) {
                    if k > 0 {
                        let f = T::from_u32((n - k + 1) * (p - k + 1)).unwrap()
                            / T::from_u32(k).unwrap();
                        weight *= f;
                    }
                    *out.entry((m + p - k, n + q - k))
                        .or_insert_with(Complex::zero) += c.scale(weight);
                }
            }
        }
        Ok(Self::canonical(out))
    }

    pub fn powi(&self, exponent: u32) -> Result<Self> {
        let mut acc = Self::identity();
        for _ in 0..exponent {
            acc = acc.product(self)?;
        }
        Ok(acc)
    }

    pub fn commutator(&self, rhs: &Self) -> Result<Self> {
        self.commutator_bounded(rhs, DEFAULT_MAX_DEGREE)
    }

    pub fn commutator_bounded(&self, rhs: &Self, max_degree: u32) -> Result<Self> {
        let ab = self.product_bounded(rhs, max_degree)?;
        let ba = rhs.product_bounded(self, max_degree)?;
        Ok(&ab - &ba)
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_defect() <= T::chop()
    }

    pub fn map_scalar<U: Real>(&self, f: impl Fn(T) -> U) -> LadderPolynomial<U> {
        LadderPolynomial::from_terms(
            self.terms
                .iter()
                .map(|(&k, c)| (k, Complex::new(f(c.re), f(c.im)))),
        )
    }
}

impl<T: Real> Add for &LadderPolynomial<T> {
    type Output = LadderPolynomial<T>;

    fn add(self, rhs: Self) -> LadderPolynomial<T> {
        let mut terms = self.terms.clone();
        for (&k, &c) in &rhs.terms {
            *terms.entry(k).or_insert_with(Complex::zero) += c;
        }
        LadderPolynomial::canonical(terms)
    }
}

impl<T: Real> Sub for &LadderPolynomial<T> {
    type Output = LadderPolynomial<T>;

    fn sub(self, rhs: Self) -> LadderPolynomial<T> {
        let mut terms = self.terms.clone();
        for (&k, &c) in &rhs.terms {
            *terms.entry(k).or_insert_with(Complex::zero) -= c;
        }
        LadderPolynomial::canonical(terms)
    }
}

impl<T: Real> Add for LadderPolynomial<T> {
    type Output = LadderPolynomial<T>;

    fn add(self, rhs: Self) -> Self {
        &self + &rhs
    }
}

impl<T: Real> Sub for LadderPolynomial<T> {
    type Output = LadderPolynomial<T>;

    fn sub(self, rhs: Self) -> Self {
        &self - &rhs
    }
}

impl<T: Real> Neg for &LadderPolynomial<T> {
    type Output = LadderPolynomial<T>;

    fn neg(self) -> LadderPolynomial<T> {
        LadderPolynomial {
            terms: self.terms.iter().map(|(&k, &c)| (k, -c)).collect(),
        }
    }
}

impl<T: Real> Neg for LadderPolynomial<T> {
    type Output = LadderPolynomial<T>;

    fn neg(self) -> Self {
        -&self
    }
}

impl<T: Real> fmt::Debug for LadderPolynomial<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Prints in the operator-expression grammar, so the output parses back.
impl<T: Real> fmt::Display for LadderPolynomial<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (&(m, n), c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({:e} + {:e}*i)", c.re, c.im)?;
            if m > 0 {
                write!(f, "*ad^{m}")?;
            }
            if n > 0 {
                write!(f, "*a^{n}")?;
            }
        }
        Ok(())
    }
}
