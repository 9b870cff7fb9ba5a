use num_complex::Complex;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::algebra::LadderPolynomial;
use crate::error::{Error, Result};
use crate::scalar::Real;

pub const DEFAULT_ADJOINT_CAP: usize = 32;

/// Tolerance on the closure ratio: imaginary part and residual.
const CLOSURE_TOL: f64 = 1e-10;

/// Structure of the adjoint tower `ad_g^n(h)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Classification<T> {
    /// `ad_g^k(h) != 0` and `ad_g^(k+1)(h) == 0`.
    Finite { k: usize },
    /// As `Finite`, with the last nonzero entry a multiple of the identity.
    FiniteConstant { k: usize, value: Complex<T> },
    /// `ad_g^2(C) = -p C` with `C = [g, h]` and `p > 0`; the tower never terminates.
    ClosedInfinite { p: T },
    /// Neither terminated nor closed within `cap` commutators.
    CapReached { cap: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct NilpotencyReport<T: Real> {
    pub classification: Classification<T>,
    /// `tower[n] = ad_g^n(h)`; every stored entry is nonzero.
    pub tower: Vec<LadderPolynomial<T>>,
}

impl<T: Real> NilpotencyReport<T> {
    /// The nilpotency index for the finite classifications.
    pub fn nilpotency_index(&self) -> Option<usize> {
        match self.classification {
            Classification::Finite { k } | Classification::FiniteConstant { k, .. } => Some(k),
            _ => None,
        }
    }
}

/// `ad_g^n(h)`, i.e. `[g, [g, ... [g, h]]]` with `n` commutators.
pub fn adjoint_power<T: Real>(
    g: &LadderPolynomial<T>,
    h: &LadderPolynomial<T>,
    n: usize,
) -> Result<LadderPolynomial<T>> {
    let mut acc = h.clone();
    for _ in 0..n {
        if acc.is_zero() {
            break;
        }
        acc = g.commutator(&acc)?;
    }
    Ok(acc)
}

/// Returns `p` when `ad_g(d) = -p c`, i.e. `ad_g^2(C) = -p C` for `d = [g, C]`.
fn closure_constant<T: Real>(c: &LadderPolynomial<T>, d_next: &LadderPolynomial<T>) -> Option<T> {
    let (key, pivot) = c
        .terms()
        .max_by(|x, y| x.1.norm().partial_cmp(&y.1.norm()).unwrap())?;
    let ratio = d_next.coefficient(key.0, key.1) / pivot;
    let tol = T::tol(CLOSURE_TOL);
    let scale = T::one().max(ratio.norm());
    if ratio.im.abs() > tol * scale {
        return None;
    }
    let residual = d_next - &c.scale(ratio);
    if residual.max_abs_coefficient() > tol * T::one().max(ratio.norm() * c.max_abs_coefficient()) {
        return None;
    }
    let p = -ratio.re;
    (p > tol).then_some(p)
}

/// Walks the adjoint tower of `h` under `g` and classifies it.
pub fn classify_pair<T: Real>(
    g: &LadderPolynomial<T>,
    h: &LadderPolynomial<T>,
    cap: usize,
) -> Result<NilpotencyReport<T>> {
    if g.is_zero() || h.is_zero() {
        return Err(Error::Domain("classify_pair needs nonzero operators".into()));
    }
    if cap < 2 {
        return Err(Error::Domain(format!("adjoint cap must be ≥ 2, got {cap}")));
    }

    let mut tower = vec![h.clone()];
    for n in 1..=cap {
        let next = g.commutator(&tower[n - 1])?;
        if next.is_zero() {
            let k = n - 1;
            let classification = match tower[k].as_scalar() {
                Some(value) if !value.is_zero() => Classification::FiniteConstant { k, value },
                _ => Classification::Finite { k },
            };
            return Ok(NilpotencyReport {
                classification,
                tower,
            });
        }
        tower.push(next);
        if n == 3 {
            if let Some(p) = closure_constant(&tower[1], &tower[3]) {
                return Ok(NilpotencyReport {
                    classification: Classification::ClosedInfinite { p },
                    tower,
                });
            }
        }
    }

    // cap == 2: the closure test still needs the third commutator.
    if tower.len() == 3 {
        let third = g.commutator(&tower[2])?;
        if let Some(p) = closure_constant(&tower[1], &third) {
            return Ok(NilpotencyReport {
                classification: Classification::ClosedInfinite { p },
                tower,
            });
        }
    }
    Ok(NilpotencyReport {
        classification: Classification::CapReached { cap },
        tower,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::parse_operator;

    type Poly = LadderPolynomial<f64>;

    fn op(s: &str) -> Poly {
        parse_operator(s).unwrap()
    }

    #[test]
    fn shear_pair_is_finite_one() {
        let r = classify_pair(&op("X^2"), &op("P"), DEFAULT_ADJOINT_CAP).unwrap();
        assert_eq!(r.classification, Classification::Finite { k: 1 });
        assert_eq!(r.tower.len(), 2);
        assert!(r.tower[0].approx_eq(&op("P"), 1e-12));
        assert!(r.tower[1].approx_eq(&op("2i X"), 1e-12));
    }

    #[test]
    fn displacement_pair_is_constant() {
        let r = classify_pair(&op("X"), &op("P"), DEFAULT_ADJOINT_CAP).unwrap();
        match r.classification {
            Classification::FiniteConstant { k, value } => {
                assert_eq!(k, 1);
                assert!((value - Complex::new(0.0, 1.0)).norm() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn squeeze_pair_closes_with_p_four() {
        let r = classify_pair(&op("ad^2 + a^2"), &op("P"), DEFAULT_ADJOINT_CAP).unwrap();
        match r.classification {
            Classification::ClosedInfinite { p } => assert!((p - 4.0).abs() < 1e-10),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn closure_found_even_at_minimal_cap() {
        let r = classify_pair(&op("ad^2 + a^2"), &op("P"), 2).unwrap();
        assert!(matches!(r.classification, Classification::ClosedInfinite { .. }));
        assert_eq!(r.tower.len(), 3);
    }

    #[test]
    fn commuting_pair_has_index_zero() {
        let r = classify_pair(&op("ad a"), &op("ad a ad a"), 8).unwrap();
        assert_eq!(r.classification, Classification::Finite { k: 0 });
    }

    #[test]
    fn cubic_shear_and_kerr() {
        // [X^3, P] = 3i X^2 commutes with X^3.
        let r = classify_pair(&op("X^3"), &op("P"), 8).unwrap();
        assert_eq!(r.classification, Classification::Finite { k: 1 });
        // The Kerr-type pair grows without closing.
        let r = classify_pair(&op("ad a ad a"), &op("X"), 4).unwrap();
        assert_eq!(r.classification, Classification::CapReached { cap: 4 });
        assert_eq!(r.tower.len(), 5);
    }

    #[test]
    fn adjoint_power_examples() {
        let g = op("X^2 - P^2");
        let h = op("P");
        assert_eq!(adjoint_power(&g, &h, 0).unwrap(), h);
        assert!(adjoint_power(&op("X^2"), &h, 2).unwrap().is_zero());
        let third = adjoint_power(&g, &h, 3).unwrap();
        assert!(third.approx_eq(&op("-4*2i X"), 1e-12), "{third}");
    }

    #[test]
    fn rejects_bad_input() {
        assert!(classify_pair(&Poly::zero(), &op("P"), 8).is_err());
        assert!(classify_pair(&op("X"), &op("P"), 1).is_err());
    }
}
