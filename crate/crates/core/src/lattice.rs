//! Labeled Hermitian matrices, dense spectra, and signed eigenvalue counts.
//!
//! Every operator in the crate ends up here as a [`HermitianOperator`]: a dense
//! complex matrix together with one [`BasisLabel`] per row. The labels record
//! where a basis vector lives (Fourier mode, radial node, spinor slot, fiber
//! index) so that spectra along a path can be compared label for label.

use std::io::{Read, Write};

use faer::{Mat, MatRef, Side};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = num_complex::Complex64;

/// Eigenvalues with `|λ| <= DEFAULT_ZERO_TOL` are reported as near-kernel.
pub const DEFAULT_ZERO_TOL: f64 = 1e-8;

/// Relative Hermiticity tolerance: `‖H − H†‖_max <= 1e-10 · max(1, ‖H‖_max)`.
pub const HERMITICITY_RTOL: f64 = 1e-10;

/// Spinor slot of a radial degree of freedom.
///
/// The cylinder discretization works in the rotated chiral frame
/// `a = (s₊ + s₋)/√2` (nodal unknowns) and `b = (s₊ − s₋)/√2` (cell unknowns).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Spinor {
    Sum,
    Difference,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BasisLabel {
    pub mode: i32,
    /// Radial node (for `Spinor::Sum`) or radial cell (for `Spinor::Difference`).
    pub node: Option<usize>,
    pub spinor: Option<Spinor>,
    pub fiber: usize,
}

impl BasisLabel {
    pub fn boundary(mode: i32, fiber: usize) -> Self {
        Self { mode, node: None, spinor: None, fiber }
    }

    pub fn radial(mode: i32, node: usize, spinor: Spinor, fiber: usize) -> Self {
        Self { mode, node: Some(node), spinor: Some(spinor), fiber }
    }
}

/// Max-norm of `H − H†`.
pub fn hermiticity_residual(h: MatRef<'_, C64>) -> f64 {
    assert_eq!(h.nrows(), h.ncols(), "hermiticity_residual needs a square matrix");
    let n = h.nrows();
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in 0..=j {
            let d = (h[(i, j)] - h[(j, i)].conj()).norm();
            worst = worst.max(d);
        }
    }
    worst
}

pub fn max_abs(h: MatRef<'_, C64>) -> f64 {
    let mut m = 0.0f64;
    for j in 0..h.ncols() {
        for i in 0..h.nrows() {
            m = m.max(h[(i, j)].norm());
        }
    }
    m
}

pub fn hermiticity_tolerance(h: MatRef<'_, C64>) -> f64 {
    HERMITICITY_RTOL * max_abs(h).max(1.0)
}

#[derive(Clone, Debug)]
pub struct HermitianOperator {
    matrix: Mat<C64>,
    labels: Vec<BasisLabel>,
    residual: f64,
}

impl HermitianOperator {
    /// Wraps user-supplied data; rejects matrices outside the Hermiticity tolerance.
    pub fn new(matrix: Mat<C64>, labels: Vec<BasisLabel>) -> Result<Self> {
        Self::checked(matrix, labels, false)
    }

    /// Same as [`HermitianOperator::new`] but reports failures as assembly bugs.
    pub fn assembled(matrix: Mat<C64>, labels: Vec<BasisLabel>) -> Result<Self> {
        Self::checked(matrix, labels, true)
    }

    /// Operator with plain integer labels (mode = row index); convenient for small tests.
    pub fn from_matrix(matrix: Mat<C64>) -> Result<Self> {
        let labels = (0..matrix.nrows()).map(|i| BasisLabel::boundary(i as i32, 0)).collect();
        Self::new(matrix, labels)
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        let m = Mat::from_fn(n, n, |i, j| C64::new(rows[i][j], 0.0));
        Self::from_matrix(m)
    }

    fn checked(matrix: Mat<C64>, labels: Vec<BasisLabel>, assembly: bool) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "operator matrix is {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.nrows() == 0 {
            return Err(Error::DimensionMismatch("operator has dimension 0".into()));
        }
        if labels.len() != matrix.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "{} labels for dimension {}",
                labels.len(),
                matrix.nrows()
            )));
        }
        let mut sorted = labels.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::DimensionMismatch("duplicate basis labels".into()));
        }
        let residual = hermiticity_residual(matrix.as_ref());
        let tolerance = hermiticity_tolerance(matrix.as_ref());
        if !residual.is_finite() || residual > tolerance {
            return Err(if assembly {
                Error::NonHermitianAssembly { residual, tolerance }
            } else {
                Error::NonHermitianInput { residual, tolerance }
            });
        }
        Ok(Self { matrix, labels, residual })
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn matrix(&self) -> MatRef<'_, C64> {
        self.matrix.as_ref()
    }

    pub fn labels(&self) -> &[BasisLabel] {
        &self.labels
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn into_matrix(self) -> Mat<C64> {
        self.matrix
    }

    /// Relabels the basis: row/column `i` of the result is row/column `perm[i]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.dim();
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::DimensionMismatch("not a permutation".into()));
        }
        let m = Mat::from_fn(n, n, |i, j| self.matrix[(perm[i], perm[j])]);
        let labels = perm.iter().map(|&p| self.labels[p]).collect();
        Self::new(m, labels)
    }

    /// `(1 − u)·self + u·other`; both operators must share the same labels.
    pub fn interpolate(&self, other: &Self, u: f64) -> Result<Self> {
        if self.labels != other.labels {
            return Err(Error::DimensionMismatch("interpolating operators with different labels".into()));
        }
        let n = self.dim();
        let m = Mat::from_fn(n, n, |i, j| self.matrix[(i, j)] * (1.0 - u) + other.matrix[(i, j)] * u);
        Self::assembled(m, self.labels.clone())
    }

    /// Plain-text dump: a `#`-prefixed label header, then one row per line of `re im` pairs.
    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# dim {}", self.dim())?;
        for (i, l) in self.labels.iter().enumerate() {
            writeln!(
                w,
                "# {} mode={} node={} spinor={} fiber={}",
                i,
                l.mode,
                l.node.map_or("-".to_string(), |n| n.to_string()),
                match l.spinor {
                    None => "-",
                    Some(Spinor::Sum) => "sum",
                    Some(Spinor::Difference) => "diff",
                },
                l.fiber
            )?;
        }
        for i in 0..self.dim() {
            let row: Vec<String> = (0..self.dim())
                .map(|j| {
                    let z = self.matrix[(i, j)];
                    format!("{:e} {:e}", z.re, z.im)
                })
                .collect();
            writeln!(w, "{}", row.join(" "))?;
        }
        Ok(())
    }

    /// Little-endian binary dump: magic `HOPD`, `u64` dim, labels, row-major `(re, im)` pairs.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(b"HOPD")?;
        w.write_all(&(self.dim() as u64).to_le_bytes())?;
        for l in &self.labels {
            w.write_all(&l.mode.to_le_bytes())?;
            w.write_all(&l.node.map_or(-1i64, |n| n as i64).to_le_bytes())?;
            let s: i8 = match l.spinor {
                None => -1,
                Some(Spinor::Sum) => 0,
                Some(Spinor::Difference) => 1,
            };
            w.write_all(&s.to_le_bytes())?;
            w.write_all(&(l.fiber as u32).to_le_bytes())?;
        }
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                let z = self.matrix[(i, j)];
                w.write_all(&z.re.to_le_bytes())?;
                w.write_all(&z.im.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        fn take<const N: usize, R: Read>(r: &mut R) -> Result<[u8; N]> {
            let mut buf = [0u8; N];
            r.read_exact(&mut buf)?;
            Ok(buf)
        }
        if &take::<4, _>(&mut r)? != b"HOPD" {
            return Err(Error::Config("not a HOPD matrix dump".into()));
        }
        let n = u64::from_le_bytes(take(&mut r)?) as usize;
        let mut labels = Vec::with_capacity(n);
        for _ in 0..n {
            let mode = i32::from_le_bytes(take(&mut r)?);
            let node = i64::from_le_bytes(take(&mut r)?);
            let spinor = match i8::from_le_bytes(take(&mut r)?) {
                0 => Some(Spinor::Sum),
                1 => Some(Spinor::Difference),
                _ => None,
            };
            let fiber = u32::from_le_bytes(take(&mut r)?) as usize;
            labels.push(BasisLabel { mode, node: (node >= 0).then_some(node as usize), spinor, fiber });
        }
        let mut m = Mat::<C64>::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let re = f64::from_le_bytes(take(&mut r)?);
                let im = f64::from_le_bytes(take(&mut r)?);
                m[(i, j)] = C64::new(re, im);
            }
        }
        Self::new(m, labels)
    }
}

/// Sorted real eigenvalues, with multiplicity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    values: Vec<f64>,
}

impl Spectrum {
    pub fn from_unsorted(mut values: Vec<f64>) -> Self {
        values.sort_by(f64::total_cmp);
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Values with `|λ| <= window`, still sorted.
    pub fn windowed(&self, window: f64) -> Vec<f64> {
        self.values.iter().copied().filter(|v| v.abs() <= window).collect()
    }

    /// The `count` eigenvalues of smallest modulus, sorted by modulus (ties: negative first).
    pub fn smallest_abs(&self, count: usize) -> Vec<f64> {
        let mut v = self.values.clone();
        v.sort_by(|a, b| a.abs().total_cmp(&b.abs()).then(a.total_cmp(b)));
        v.truncate(count);
        v
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignCount {
    /// `λ < −zero_tol`.
    pub negative: usize,
    /// `|λ| <= zero_tol`; counted as nonnegative for spectral flow.
    pub near_kernel: usize,
    /// `λ > zero_tol`.
    pub positive: usize,
}

impl SignCount {
    pub fn total(&self) -> usize {
        self.negative + self.near_kernel + self.positive
    }
}

pub fn neg_count(s: &Spectrum, zero_tol: f64) -> SignCount {
    assert!(zero_tol >= 0.0, "zero_tol must be nonnegative");
    let v = s.values();
    let negative = v.partition_point(|&x| x < -zero_tol);
    let positive = v.len() - v.partition_point(|&x| x <= zero_tol);
    SignCount { negative, near_kernel: v.len() - negative - positive, positive }
}

/// Groups indices into the connected components of the nonzero pattern of `h`.
fn components(h: MatRef<'_, C64>) -> Vec<Vec<usize>> {
    let n = h.nrows();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for j in 0..n {
        for i in 0..j {
            if h[(i, j)] != C64::new(0.0, 0.0) || h[(j, i)] != C64::new(0.0, 0.0) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(i);
    }
    groups
}

fn dense_eigenvalues(h: MatRef<'_, C64>) -> Result<Vec<f64>> {
    if h.nrows() == 1 {
        return Ok(vec![h[(0, 0)].re]);
    }
    h.self_adjoint_eigenvalues(Side::Lower).map_err(|_| Error::ConvergenceFailure)
}

/// All eigenvalues of `h`, ascending.
///
/// The matrix is first split into the connected components of its nonzero
/// pattern; each block is diagonalized separately. The result is the same
/// multiset as a single dense solve.
pub fn eig_spectrum(h: &HermitianOperator) -> Result<Spectrum> {
    let m = h.matrix();
    let groups = components(m);
    if groups.len() == 1 {
        return Ok(Spectrum::from_unsorted(dense_eigenvalues(m)?));
    }
    let mut values = Vec::with_capacity(h.dim());
    for g in groups {
        let block = Mat::from_fn(g.len(), g.len(), |i, j| m[(g[i], g[j])]);
        values.extend(dense_eigenvalues(block.as_ref())?);
    }
    Ok(Spectrum::from_unsorted(values))
}

/// Eigenvalues (ascending) and the matching orthonormal eigenvectors as columns.
pub fn eig_decomposition(h: &HermitianOperator) -> Result<(Spectrum, Mat<C64>)> {
    let evd = h.matrix().self_adjoint_eigen(Side::Lower).map_err(|_| Error::ConvergenceFailure)?;
    let s = evd.S().column_vector();
    let values: Vec<f64> = (0..h.dim()).map(|i| s[i].re).collect();
    Ok((Spectrum { values }, evd.U().to_owned()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn pauli_x_spectrum() {
        let h = HermitianOperator::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        let s = eig_spectrum(&h).unwrap();
        assert!((s.values()[0] + 1.0).abs() < 1e-14);
        assert!((s.values()[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn one_by_one() {
        let h = HermitianOperator::from_real_rows(&[&[-0.75]]).unwrap();
        assert_eq!(eig_spectrum(&h).unwrap().values(), &[-0.75]);
    }

    #[test]
    fn residual_examples() {
        let id = Mat::<C64>::identity(3, 3);
        assert_eq!(hermiticity_residual(id.as_ref()), 0.0);
        let sy = Mat::from_fn(2, 2, |i, j| match (i, j) {
            (0, 1) => c(0.0, 1.0),
            (1, 0) => c(0.0, -1.0),
            _ => c(0.0, 0.0),
        });
        assert_eq!(hermiticity_residual(sy.as_ref()), 0.0);
        let nil = Mat::from_fn(2, 2, |i, j| if (i, j) == (0, 1) { c(1.0, 0.0) } else { c(0.0, 0.0) });
        assert_eq!(hermiticity_residual(nil.as_ref()), 1.0);
        assert!(matches!(
            HermitianOperator::from_matrix(nil),
            Err(Error::NonHermitianInput { .. })
        ));
    }

    #[test]
    fn counting_examples() {
        let s = Spectrum::from_unsorted(vec![2.0, -1.0, 0.0, 1.0, -2.0]);
        let c = neg_count(&s, 1e-8);
        assert_eq!((c.negative, c.near_kernel, c.positive), (2, 1, 2));
        let c = neg_count(&Spectrum::from_unsorted(vec![0.5, 1.5]), 1e-8);
        assert_eq!(c.negative, 0);
        let c = neg_count(&Spectrum::from_unsorted(vec![-3.0, -2.0, -1.0, 0.0, 1.0]), 1e-8);
        assert_eq!(c.negative, 3);
    }

    #[test]
    fn duplicate_labels_rejected() {
        let m = Mat::<C64>::identity(2, 2);
        let l = BasisLabel::boundary(0, 0);
        assert!(HermitianOperator::new(m, vec![l, l]).is_err());
    }

    #[test]
    fn block_split_matches_dense() {
        // Two decoupled 2x2 blocks interleaved with a coupled one.
        let n = 6;
        let mut m = Mat::<C64>::zeros(n, n);
        let entries = [(0, 0, 1.0), (0, 3, 0.5), (3, 3, -2.0), (1, 1, 0.3), (2, 2, 4.0), (2, 5, 1.5), (5, 5, 0.0), (4, 4, -0.1)];
        for &(i, j, v) in &entries {
            m[(i, j)] = c(v, if i != j { 0.25 } else { 0.0 });
            m[(j, i)] = m[(i, j)].conj();
        }
        let h = HermitianOperator::from_matrix(m.clone()).unwrap();
        let split = eig_spectrum(&h).unwrap();
        let dense = dense_eigenvalues(m.as_ref()).unwrap();
        for (a, b) in split.values().iter().zip(dense.iter()) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn binary_dump_round_trip() {
        let m = Mat::from_fn(3, 3, |i, j| {
            if i == j {
                c(i as f64, 0.0)
            } else if i < j {
                c(0.5, 0.1 * (i + j) as f64)
            } else {
                c(0.5, -0.1 * (i + j) as f64)
            }
        });
        let labels = vec![
            BasisLabel::radial(-1, 0, Spinor::Sum, 0),
            BasisLabel::radial(-1, 1, Spinor::Difference, 0),
            BasisLabel::boundary(2, 1),
        ];
        let h = HermitianOperator::new(m, labels).unwrap();
        let mut buf = Vec::new();
        h.write_binary(&mut buf).unwrap();
        let back = HermitianOperator::read_binary(buf.as_slice()).unwrap();
        assert_eq!(back.labels(), h.labels());
        assert_eq!(hermiticity_residual(back.matrix()), 0.0);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(back.matrix()[(i, j)], h.matrix()[(i, j)]);
            }
        }
        let mut text = Vec::new();
        h.write_text(&mut text).unwrap();
        let text = String::from_utf8(text).unwrap();
        assert!(text.starts_with("# dim 3"));
        assert_eq!(text.lines().count(), 1 + 3 + 3);
    }
}
