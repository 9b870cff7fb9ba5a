//! Eigendecomposition-based propagation for Hermitian matrices.
//!
//! The matrix is split into the connected components of its sparsity graph
//! (parity sectors for `X^2` or `a†^2 + a^2`) and each block is diagonalized
//! separately, in real arithmetic when the block is real.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::MatrixOperator;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
struct Block {
    indices: Vec<usize>,
    values: DVector<f64>,
    vectors: DMatrix<Complex64>,
}

/// Spectral decomposition `H = Σ λ |v⟩⟨v|` of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct Spectrum {
    dim: usize,
    blocks: Vec<Block>,
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

fn components(m: &DMatrix<Complex64>) -> Vec<Vec<usize>> {
    let n = m.nrows();
    let mut parent: Vec<usize> = (0..n).collect();
    for j in 0..n {
        for i in 0..j {
            if m[(i, j)] != Complex64::new(0.0, 0.0) {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let root = find(&mut parent, i);
        if slot[root] == usize::MAX {
            slot[root] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[root]].push(i);
    }
    groups
}

impl Spectrum {
    pub fn new(op: &MatrixOperator) -> Result<Self> {
        let defect = op.hermiticity_defect();
        if defect > 1e-10 {
            return Err(Error::NotHermitian {
                what: "matrix operator".into(),
                deviation: defect,
            });
        }
        let m = op.matrix();
        let blocks = components(m)
            .into_iter()
            .map(|indices| {
                let k = indices.len();
                let sub = DMatrix::from_fn(k, k, |r, c| m[(indices[r], indices[c])]);
                let (values, vectors) = if sub.iter().all(|z| z.im == 0.0) {
                    let eig = sub.map(|z| z.re).symmetric_eigen();
                    (eig.eigenvalues, eig.eigenvectors.map(|x| Complex64::new(x, 0.0)))
                } else {
                    let eig = sub.symmetric_eigen();
                    (eig.eigenvalues, eig.eigenvectors)
                };
                Block {
                    indices,
                    values,
                    vectors,
                }
            })
            .collect();
        Ok(Self {
            dim: op.dim(),
            blocks,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// All eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self
            .blocks
            .iter()
            .flat_map(|b| b.values.iter().copied())
            .collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    }

    /// Eigenvalue/eigenvector pairs, embedded in the full space.
    pub fn eigenpairs(&self) -> Vec<(f64, DVector<Complex64>)> {
        let mut out = Vec::with_capacity(self.dim);
        for b in &self.blocks {
            for (col, &lambda) in b.values.iter().enumerate() {
                let mut v = DVector::zeros(self.dim);
                for (r, &i) in b.indices.iter().enumerate() {
                    v[i] = b.vectors[(r, col)];
                }
                out.push((lambda, v));
            }
        }
        out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        out
    }

    fn phases(b: &Block, t: f64) -> DVector<Complex64> {
        b.values.map(|l| Complex64::from_polar(1.0, -t * l))
    }

    /// `exp(-i t H) ψ`
    pub fn apply(&self, t: f64, psi: &DVector<Complex64>) -> DVector<Complex64> {
        assert_eq!(psi.len(), self.dim, "state dimension mismatch");
        let mut out = DVector::zeros(self.dim);
        for b in &self.blocks {
            let local = DVector::from_iterator(b.indices.len(), b.indices.iter().map(|&i| psi[i]));
            let coeffs = b.vectors.ad_mul(&local).component_mul(&Self::phases(b, t));
            let back = &b.vectors * coeffs;
            for (r, &i) in b.indices.iter().enumerate() {
                out[i] = back[r];
            }
        }
        out
    }

    /// The first `count` columns of `exp(-i t H)`.
    pub fn evolution_columns(&self, t: f64, count: usize) -> DMatrix<Complex64> {
        let count = count.min(self.dim);
        let mut out = DMatrix::zeros(self.dim, count);
        for b in &self.blocks {
            let selected: Vec<(usize, usize)> = b
                .indices
                .iter()
                .enumerate()
                .filter(|(_, &i)| i < count)
                .map(|(r, &i)| (r, i))
                .collect();
            if selected.is_empty() {
                continue;
            }
            let phases = Self::phases(b, t);
            // columns of V diag(e^{-itλ}) V† picked at the selected local rows
            let rhs = DMatrix::from_fn(b.indices.len(), selected.len(), |k, s| {
                phases[k] * b.vectors[(selected[s].0, k)].conj()
            });
            let cols = &b.vectors * rhs;
            for (s, &(_, j)) in selected.iter().enumerate() {
                for (r, &i) in b.indices.iter().enumerate() {
                    out[(i, j)] = cols[(r, s)];
                }
            }
        }
        out
    }

    /// `exp(-i t H)` as a full matrix.
    pub fn unitary(&self, t: f64) -> MatrixOperator {
        MatrixOperator::new(self.evolution_columns(t, self.dim))
    }
}
