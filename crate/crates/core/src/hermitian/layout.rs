//! Labelled tensor-factor layouts and the index plumbing for partial traces,
//! operator lifts, and factor permutations.
//!
//! A layout is an ordered list of `(label, dimension)` factors. The first
//! factor is the most significant part of a basis index, matching the
//! convention of [`kron`](super::kron): if the layout is `[F, G]`, then basis
//! index `i` encodes `(i / dim(G), i % dim(G))`.

use num_complex::Complex64;

use super::matrix::{c64, ComplexMatrix, ComplexVector};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SpaceLayout {
    factors: Vec<(String, usize)>,
}

impl SpaceLayout {
    /// Builds a layout from `(label, dim)` pairs. Labels must be unique and
    /// dimensions at least 1.
    pub fn new<L: Into<String>>(factors: Vec<(L, usize)>) -> Result<Self> {
        let factors: Vec<(String, usize)> = factors
            .into_iter()
            .map(|(l, d)| (l.into(), d))
            .collect();
        for (label, dim) in &factors {
            if *dim == 0 {
                return Err(Error::Dimension(format!("factor {label} has dimension 0")));
            }
        }
        for i in 0..factors.len() {
            for j in (i + 1)..factors.len() {
                if factors[i].0 == factors[j].0 {
                    return Err(Error::Label(format!("duplicate factor label {}", factors[i].0)));
                }
            }
        }
        Ok(Self { factors })
    }

    pub fn single(label: impl Into<String>, dim: usize) -> Self {
        Self {
            factors: vec![(label.into(), dim)],
        }
    }

    /// Concatenates layouts left to right.
    pub fn concat(parts: &[&SpaceLayout]) -> Result<Self> {
        let mut factors = Vec::new();
        for p in parts {
            factors.extend(p.factors.iter().cloned());
        }
        Self::new(factors)
    }

    pub fn factors(&self) -> &[(String, usize)] {
        &self.factors
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.factors.iter().map(|(l, _)| l.as_str())
    }

    pub fn total_dim(&self) -> usize {
        self.factors.iter().map(|(_, d)| d).product()
    }

    pub fn dim_of(&self, label: &str) -> Result<usize> {
        self.position(label).map(|p| self.factors[p].1)
    }

    /// Product of the dimensions of `labels`.
    pub fn dim_of_all(&self, labels: &[&str]) -> Result<usize> {
        let mut d = 1;
        for l in labels {
            d *= self.dim_of(l)?;
        }
        Ok(d)
    }

    fn position(&self, label: &str) -> Result<usize> {
        self.factors
            .iter()
            .position(|(l, _)| l == label)
            .ok_or_else(|| Error::Label(format!("no factor labelled {label}")))
    }

    fn positions(&self, labels: &[&str]) -> Result<Vec<usize>> {
        let mut seen = Vec::with_capacity(labels.len());
        for l in labels {
            let p = self.position(l)?;
            if seen.contains(&p) {
                return Err(Error::Label(format!("factor {l} listed twice")));
            }
            seen.push(p);
        }
        Ok(seen)
    }

    fn strides(&self) -> Vec<usize> {
        let mut s = vec![1usize; self.factors.len()];
        for i in (0..self.factors.len().saturating_sub(1)).rev() {
            s[i] = s[i + 1] * self.factors[i + 1].1;
        }
        s
    }

    /// Global offsets contributed by every sub-index combination of the
    /// factors at `positions` (in the order given).
    fn offsets_for(&self, positions: &[usize]) -> Vec<usize> {
        let strides = self.strides();
        let dims: Vec<usize> = positions.iter().map(|&p| self.factors[p].1).collect();
        let total: usize = dims.iter().product();
        let mut out = vec![0usize; total];
        for (idx, slot) in out.iter_mut().enumerate() {
            let mut rem = idx;
            let mut offset = 0;
            for (k, &p) in positions.iter().enumerate() {
                let block: usize = dims[k + 1..].iter().product();
                let sub = rem / block;
                rem %= block;
                offset += sub * strides[p];
            }
            *slot = offset;
        }
        out
    }

    fn complement(&self, positions: &[usize]) -> Vec<usize> {
        (0..self.factors.len())
            .filter(|p| !positions.contains(p))
            .collect()
    }

    /// Traces out the factors named in `traced`, returning the reduced matrix
    /// and the layout of the remaining factors (in their original order).
    pub fn partial_trace(
        &self,
        m: &ComplexMatrix,
        traced: &[&str],
    ) -> Result<(ComplexMatrix, SpaceLayout)> {
        let n = self.total_dim();
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::Dimension(format!(
                "partial_trace: matrix is {}x{}, layout dim {n}",
                m.nrows(),
                m.ncols()
            )));
        }
        let tpos = self.positions(traced)?;
        let kpos = self.complement(&tpos);
        let toff = self.offsets_for(&tpos);
        let koff = self.offsets_for(&kpos);
        let dk = koff.len();
        let mut out = ComplexMatrix::zeros(dk, dk);
        for (a, &oa) in koff.iter().enumerate() {
            for (b, &ob) in koff.iter().enumerate() {
                let mut acc = Complex64::ZERO;
                for &ot in &toff {
                    acc += m[(oa + ot, ob + ot)];
                }
                out[(a, b)] = acc;
            }
        }
        let kept = SpaceLayout {
            factors: kpos.iter().map(|&p| self.factors[p].clone()).collect(),
        };
        Ok((out, kept))
    }

    /// Lifts `op`, acting on the factors named in `acting` (op's tensor order
    /// = the order of `acting`), to a dense matrix on the whole layout.
    pub fn embed_lift(&self, op: &ComplexMatrix, acting: &[&str]) -> Result<ComplexMatrix> {
        let apos = self.positions(acting)?;
        let d_act: usize = apos.iter().map(|&p| self.factors[p].1).product();
        if op.nrows() != d_act || op.ncols() != d_act {
            return Err(Error::Dimension(format!(
                "embed_lift: op is {}x{}, acting dims give {d_act}",
                op.nrows(),
                op.ncols()
            )));
        }
        let rpos = self.complement(&apos);
        let aoff = self.offsets_for(&apos);
        let roff = self.offsets_for(&rpos);
        let n = self.total_dim();
        let mut out = ComplexMatrix::zeros(n, n);
        for &or in &roff {
            for (a, &oa) in aoff.iter().enumerate() {
                for (b, &ob) in aoff.iter().enumerate() {
                    let z = op[(a, b)];
                    if z != Complex64::ZERO {
                        out[(or + oa, or + ob)] = z;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Applies `op` (acting on `acting`, same convention as
    /// [`embed_lift`](Self::embed_lift)) to a state vector without forming
    /// the lifted matrix.
    pub fn apply_to_vector(
        &self,
        op: &ComplexMatrix,
        acting: &[&str],
        v: &ComplexVector,
    ) -> Result<ComplexVector> {
        let n = self.total_dim();
        if v.len() != n {
            return Err(Error::Dimension(format!(
                "apply_to_vector: state has length {}, layout dim {n}",
                v.len()
            )));
        }
        let apos = self.positions(acting)?;
        let d_act: usize = apos.iter().map(|&p| self.factors[p].1).product();
        if op.nrows() != d_act || op.ncols() != d_act {
            return Err(Error::Dimension(format!(
                "apply_to_vector: op is {}x{}, acting dims give {d_act}",
                op.nrows(),
                op.ncols()
            )));
        }
        let rpos = self.complement(&apos);
        let aoff = self.offsets_for(&apos);
        let roff = self.offsets_for(&rpos);
        let mut out = ComplexVector::zeros(n);
        let mut scratch = vec![Complex64::ZERO; d_act];
        for &or in &roff {
            for (b, &ob) in aoff.iter().enumerate() {
                scratch[b] = v[or + ob];
            }
            for (a, &oa) in aoff.iter().enumerate() {
                let mut acc = Complex64::ZERO;
                for (b, s) in scratch.iter().enumerate() {
                    acc += op[(a, b)] * s;
                }
                out[or + oa] = acc;
            }
        }
        Ok(out)
    }

    /// Conjugation `(op ⊗ I) m (op ⊗ I)*` without forming the lift.
    pub fn conjugate(
        &self,
        op: &ComplexMatrix,
        acting: &[&str],
        m: &ComplexMatrix,
    ) -> Result<ComplexMatrix> {
        let left = self.apply_left(op, acting, m)?;
        let right = self.apply_left(op, acting, &left.adjoint())?;
        Ok(right.adjoint())
    }

    /// Left multiplication `(op ⊗ I) m`.
    pub fn apply_left(
        &self,
        op: &ComplexMatrix,
        acting: &[&str],
        m: &ComplexMatrix,
    ) -> Result<ComplexMatrix> {
        let n = self.total_dim();
        if m.nrows() != n {
            return Err(Error::Dimension(format!(
                "apply_left: matrix has {} rows, layout dim {n}",
                m.nrows()
            )));
        }
        let mut out = ComplexMatrix::zeros(n, m.ncols());
        for col in 0..m.ncols() {
            let v = ComplexVector::from_column_slice(m.column(col).as_slice());
            let w = self.apply_to_vector(op, acting, &v)?;
            out.set_column(col, &w);
        }
        Ok(out)
    }

    /// Index map realizing the factor permutation to `new_order`: entry `i`
    /// is the new global index of old global index `i`. Also returns the
    /// permuted layout.
    pub fn permutation_to(&self, new_order: &[&str]) -> Result<(Vec<usize>, SpaceLayout)> {
        if new_order.len() != self.factors.len() {
            return Err(Error::Label(
                "permutation must list every factor exactly once".into(),
            ));
        }
        let perm = self.positions(new_order)?;
        let new_layout = SpaceLayout {
            factors: perm.iter().map(|&p| self.factors[p].clone()).collect(),
        };
        let old_strides = self.strides();
        let new_strides = new_layout.strides();
        let n = self.total_dim();
        let mut map = vec![0usize; n];
        for (old, slot) in map.iter_mut().enumerate() {
            let mut rem = old;
            let mut sub = vec![0usize; self.factors.len()];
            for (p, s) in old_strides.iter().enumerate() {
                sub[p] = rem / s;
                rem %= s;
            }
            let mut idx = 0;
            for (k, &p) in perm.iter().enumerate() {
                idx += sub[p] * new_strides[k];
            }
            *slot = idx;
        }
        Ok((map, new_layout))
    }

    pub fn permute_vector(v: &ComplexVector, map: &[usize]) -> ComplexVector {
        let mut out = ComplexVector::zeros(v.len());
        for (old, &new) in map.iter().enumerate() {
            out[new] = v[old];
        }
        out
    }

    pub fn permute_matrix(m: &ComplexMatrix, map: &[usize]) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(m.nrows(), m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                out[(map[i], map[j])] = m[(i, j)];
            }
        }
        out
    }
}

/// First standard basis vector of the layout's space — every factor in its
/// zero state.
pub fn ground_state(layout: &SpaceLayout) -> ComplexVector {
    let mut v = ComplexVector::zeros(layout.total_dim());
    v[0] = c64(1.0, 0.0);
    v
}

/// The standard measurement of an output factor: `reject` projects onto the
/// factor's zero state, `accept` is its complement. Returns
/// `(ground, reject, accept)`.
pub fn ground_and_projectors(
    layout: &SpaceLayout,
    output_label: &str,
) -> Result<(ComplexVector, ComplexMatrix, ComplexMatrix)> {
    let d = layout.dim_of(output_label)?;
    let mut p0 = ComplexMatrix::zeros(d, d);
    p0[(0, 0)] = c64(1.0, 0.0);
    let reject = layout.embed_lift(&p0, &[output_label])?;
    let accept = ComplexMatrix::identity(layout.total_dim(), layout.total_dim()) - &reject;
    Ok((ground_state(layout), reject, accept))
}
