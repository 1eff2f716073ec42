//! Boundary data on a circle: gauge symbols, boundary endomorphisms, the
//! truncated boundary Dirac operator and its gauge conjugates.
//!
//! The boundary operator acts on `C^{k·N}`-valued functions on the circle as
//! `σ·(−i d/dθ ⊗ I + A ⊗ I_N)`, truncated to Fourier modes `|m| <= M`. The
//! basis index of `(m, e, c)` (mode, bundle index, gauge index) is
//! `(m + M)·k·N + e·N + c`.

use std::f64::consts::PI;

use faer::{Mat, MatRef, Side};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{hermiticity_residual, hermiticity_tolerance, BasisLabel, HermitianOperator, C64};

/// Number of equispaced samples used to validate a gauge symbol.
pub const GAUGE_CHECK_SAMPLES: usize = 256;
pub const UNITARITY_TOL: f64 = 1e-9;
/// Minimum `|eigenvalue|` for a boundary endomorphism to count as invertible.
pub const MIN_F_EIGENVALUE: f64 = 1e-6;

fn czero() -> C64 {
    C64::new(0.0, 0.0)
}

fn cis(x: f64) -> C64 {
    C64::from_polar(1.0, x)
}

/// A unitary-valued trigonometric polynomial `g(θ) = Σ_{|m|<=d} ĝ(m) e^{imθ}`.
#[derive(Clone, Debug)]
pub struct TrigPolyGauge {
    n: usize,
    degree: usize,
    /// `coeffs[m + degree]` is `ĝ(m)`.
    coeffs: Vec<Mat<C64>>,
}

impl TrigPolyGauge {
    pub fn new(n: usize, coeffs: Vec<(i32, Mat<C64>)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Config("gauge rank N must be positive".into()));
        }
        let degree = coeffs.iter().map(|(m, _)| m.unsigned_abs() as usize).max().unwrap_or(0);
        let mut table = vec![Mat::<C64>::zeros(n, n); 2 * degree + 1];
        for (m, c) in coeffs {
            if c.nrows() != n || c.ncols() != n {
                return Err(Error::DimensionMismatch(format!(
                    "gauge coefficient for m = {m} is {}x{}, expected {n}x{n}",
                    c.nrows(),
                    c.ncols()
                )));
            }
            let slot = &mut table[(m + degree as i32) as usize];
            *slot = &*slot + &c;
        }
        let g = Self { n, degree, coeffs: table };
        g.validate()?;
        Ok(g)
    }

    fn validate(&self) -> Result<()> {
        let id = Mat::<C64>::identity(self.n, self.n);
        for s in 0..GAUGE_CHECK_SAMPLES {
            let theta = 2.0 * PI * s as f64 / GAUGE_CHECK_SAMPLES as f64;
            let g = self.eval(theta);
            let r = &g * g.adjoint() - &id;
            let residual = r.as_ref().norm_max();
            if !(residual <= UNITARITY_TOL) {
                return Err(Error::NotUnitary { theta, residual });
            }
            if g.as_ref().determinant().norm() < 1e-9 {
                return Err(Error::SingularGauge { theta });
            }
        }
        Ok(())
    }

    pub fn identity(n: usize) -> Self {
        Self { n, degree: 0, coeffs: vec![Mat::identity(n, n)] }
    }

    /// `e^{i·w·θ}` on a line bundle.
    pub fn scalar_winding(w: i32) -> Self {
        Self::diagonal_windings(&[w])
    }

    /// `diag(e^{i·w_1·θ}, …, e^{i·w_N·θ})`.
    pub fn diagonal_windings(windings: &[i32]) -> Self {
        let n = windings.len();
        assert!(n > 0, "need at least one winding");
        let degree = windings.iter().map(|w| w.unsigned_abs() as usize).max().unwrap();
        let mut coeffs = vec![Mat::<C64>::zeros(n, n); 2 * degree + 1];
        for (c, &w) in windings.iter().enumerate() {
            coeffs[(w + degree as i32) as usize][(c, c)] = C64::new(1.0, 0.0);
        }
        Self { n, degree, coeffs }
    }

    /// A constant unitary.
    pub fn constant(u: Mat<C64>) -> Result<Self> {
        Self::new(u.nrows(), vec![(0, u)])
    }

    /// Fourier-truncates a smooth unitary loop to degree `degree`.
    ///
    /// Coefficients are computed from `max(256, 8·(2d+1))` equispaced samples;
    /// the truncated symbol must still pass the unitarity check.
    pub fn from_samples<F>(n: usize, degree: usize, f: F) -> Result<Self>
    where
        F: Fn(f64) -> Mat<C64>,
    {
        let samples = GAUGE_CHECK_SAMPLES.max(8 * (2 * degree + 1));
        let values: Vec<Mat<C64>> = (0..samples).map(|s| f(2.0 * PI * s as f64 / samples as f64)).collect();
        let mut coeffs = Vec::with_capacity(2 * degree + 1);
        for m in -(degree as i32)..=degree as i32 {
            let mut c = Mat::<C64>::zeros(n, n);
            for (s, v) in values.iter().enumerate() {
                let phase = cis(-(m as f64) * 2.0 * PI * s as f64 / samples as f64);
                for j in 0..n {
                    for i in 0..n {
                        c[(i, j)] += v[(i, j)] * phase;
                    }
                }
            }
            coeffs.push((m, c * faer::Scale(C64::new(1.0 / samples as f64, 0.0))));
        }
        Self::new(n, coeffs)
    }

    /// `e^{i·w·θ}·exp(i·t·sin θ)`, truncated at Fourier degree `degree`.
    pub fn winding_exp_sin(w: i32, t: f64, degree: usize) -> Result<Self> {
        let tail = degree
            .checked_sub(w.unsigned_abs() as usize)
            .ok_or_else(|| Error::Config("truncation degree below the winding".into()))?;
        let inner = Self::from_samples(1, tail, |theta| Mat::from_fn(1, 1, |_, _| cis(t * theta.sin())))?;
        Self::scalar_winding(w).product(&inner)
    }

    pub fn rank(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// `ĝ(m)`, zero outside `[−d, d]`.
    pub fn coeff(&self, m: i32) -> Mat<C64> {
        if m.unsigned_abs() as usize > self.degree {
            Mat::zeros(self.n, self.n)
        } else {
            self.coeffs[(m + self.degree as i32) as usize].clone()
        }
    }

    fn coeff_ref(&self, m: i32) -> Option<MatRef<'_, C64>> {
        (m.unsigned_abs() as usize <= self.degree).then(|| self.coeffs[(m + self.degree as i32) as usize].as_ref())
    }

    pub fn eval(&self, theta: f64) -> Mat<C64> {
        let mut g = Mat::<C64>::zeros(self.n, self.n);
        for (idx, c) in self.coeffs.iter().enumerate() {
            let m = idx as i32 - self.degree as i32;
            let p = cis(m as f64 * theta);
            for j in 0..self.n {
                for i in 0..self.n {
                    g[(i, j)] += c[(i, j)] * p;
                }
            }
        }
        g
    }

    pub fn det(&self, theta: f64) -> C64 {
        self.eval(theta).as_ref().determinant()
    }

    /// Pointwise adjoint `g(θ)†`, which is `g⁻¹` for a unitary loop.
    pub fn inverse(&self) -> Result<Self> {
        let coeffs = (-(self.degree as i32)..=self.degree as i32)
            .map(|m| (m, self.coeff(-m).adjoint().to_owned()))
            .collect();
        Self::new(self.n, coeffs)
    }

    /// Pointwise product `(self·other)(θ) = self(θ)·other(θ)`.
    pub fn product(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch("gauge ranks differ".into()));
        }
        let d = self.degree + other.degree;
        let mut coeffs = Vec::with_capacity(2 * d + 1);
        for p in -(d as i32)..=d as i32 {
            let mut c = Mat::<C64>::zeros(self.n, self.n);
            for m in -(self.degree as i32)..=self.degree as i32 {
                if let (Some(a), Some(b)) = (self.coeff_ref(m), other.coeff_ref(p - m)) {
                    c += a * b;
                }
            }
            coeffs.push((p, c));
        }
        Self::new(self.n, coeffs)
    }

    /// `U·g(θ)·U†` for a constant unitary `U`.
    pub fn conjugated_by(&self, u: MatRef<'_, C64>) -> Result<Self> {
        let coeffs = (-(self.degree as i32)..=self.degree as i32)
            .map(|m| (m, u * self.coeff(m) * u.adjoint()))
            .collect();
        Self::new(self.n, coeffs)
    }

    /// Fourier coefficients of the Hermitian potential `W = i·(dg/dθ)·g†`,
    /// indexed by `p + 2d` for `|p| <= 2d`.
    ///
    /// For a unitary loop `g (−i d/dθ) g⁻¹ = −i d/dθ + W`, so conjugating the
    /// boundary operator only adds the multiplication operator `σ·W`.
    pub fn potential(&self) -> Vec<Mat<C64>> {
        let d = self.degree as i32;
        let mut w = vec![Mat::<C64>::zeros(self.n, self.n); (4 * d + 1) as usize];
        for m in -d..=d {
            let gm = self.coeff_ref(m).unwrap();
            for mp in -d..=d {
                let gmp = self.coeff_ref(mp).unwrap();
                // i·(i m ĝ(m))·ĝ(m')† = −m ĝ(m) ĝ(m')†, at frequency m − m'.
                let slot = &mut w[(m - mp + 2 * d) as usize];
                *slot -= (gm * gmp.adjoint()) * faer::Scale(C64::new(m as f64, 0.0));
            }
        }
        // Exact Hermiticity W(−p) = W(p)†; any defect is a unitarity defect of g.
        let sym: Vec<Mat<C64>> = (0..w.len())
            .map(|idx| {
                let mirror = w.len() - 1 - idx;
                (&w[idx] + w[mirror].adjoint()) * faer::Scale(C64::new(0.5, 0.0))
            })
            .collect();
        sym
    }
}

/// A Hermitian invertible endomorphism `F` of the bundle over one boundary circle.
#[derive(Clone, Debug)]
pub struct BoundaryEndomorphism {
    matrix: Mat<C64>,
    component_id: usize,
}

impl BoundaryEndomorphism {
    pub fn new(matrix: Mat<C64>, component_id: usize) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(Error::DimensionMismatch("boundary endomorphism must be square".into()));
        }
        let residual = hermiticity_residual(matrix.as_ref());
        let tolerance = hermiticity_tolerance(matrix.as_ref());
        if residual > tolerance {
            return Err(Error::NonHermitianInput { residual, tolerance });
        }
        let eigs = matrix
            .as_ref()
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|_| Error::ConvergenceFailure)?;
        let min_abs = eigs.iter().fold(f64::INFINITY, |m, e| m.min(e.abs()));
        if min_abs < MIN_F_EIGENVALUE {
            return Err(Error::NearSingularF { min_abs });
        }
        Ok(Self { matrix, component_id })
    }

    pub fn identity(k: usize, component_id: usize) -> Self {
        Self { matrix: Mat::identity(k, k), component_id }
    }

    pub fn diagonal(values: &[f64], component_id: usize) -> Result<Self> {
        let k = values.len();
        Self::new(
            Mat::from_fn(k, k, |i, j| if i == j { C64::new(values[i], 0.0) } else { czero() }),
            component_id,
        )
    }

    pub fn from_real_rows(rows: &[Vec<f64>], component_id: usize) -> Result<Self> {
        let k = rows.len();
        if rows.iter().any(|r| r.len() != k) {
            return Err(Error::DimensionMismatch("F rows must form a square matrix".into()));
        }
        Self::new(Mat::from_fn(k, k, |i, j| C64::new(rows[i][j], 0.0)), component_id)
    }

    pub fn matrix(&self) -> MatRef<'_, C64> {
        self.matrix.as_ref()
    }

    pub fn rank(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn component_id(&self) -> usize {
        self.component_id
    }

    pub fn is_diagonal(&self) -> bool {
        let k = self.rank();
        (0..k).all(|i| (0..k).all(|j| i == j || self.matrix[(i, j)] == czero()))
    }

    /// `v·F̃ + (1 − v)·F`, the straight-line deformation to the involution `F̃`.
    pub fn deform_to_involution(&self, v: f64) -> Result<Self> {
        let ft = split_by_f(self)?.involution();
        let m = &ft * faer::Scale(C64::new(v, 0.0)) + &self.matrix * faer::Scale(C64::new(1.0 - v, 0.0));
        Self::new(m, self.component_id)
    }

    /// `U·F·U†` for a unitary `U`.
    pub fn rotated(&self, u: MatRef<'_, C64>) -> Result<Self> {
        let m = u * &self.matrix * u.adjoint();
        let k = m.nrows();
        // Restore exact Hermiticity lost to rounding in the triple product.
        let m = Mat::from_fn(k, k, |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5);
        Self::new(m, self.component_id)
    }
}

/// Orthogonal splitting `E = E₊ ⊕ E₋` into the positive and negative eigenbundles of `F`.
#[derive(Clone, Debug)]
pub struct FiberSplitting {
    pub plus: Mat<C64>,
    pub minus: Mat<C64>,
    /// Orthonormal basis of `E₊` as columns (`k × k₊`).
    pub plus_basis: Mat<C64>,
    /// Orthonormal basis of `E₋` as columns (`k × k₋`).
    pub minus_basis: Mat<C64>,
    pub k_plus: usize,
    pub k_minus: usize,
}

impl FiberSplitting {
    /// `F̃ = Π₊ − Π₋`.
    pub fn involution(&self) -> Mat<C64> {
        &self.plus - &self.minus
    }
}

pub fn split_by_f(f: &BoundaryEndomorphism) -> Result<FiberSplitting> {
    let k = f.rank();
    let (values, vectors): (Vec<f64>, Mat<C64>) = if f.is_diagonal() {
        ((0..k).map(|i| f.matrix[(i, i)].re).collect(), Mat::identity(k, k))
    } else {
        let evd = f.matrix().self_adjoint_eigen(Side::Lower).map_err(|_| Error::ConvergenceFailure)?;
        let s = evd.S().column_vector();
        ((0..k).map(|i| s[i].re).collect(), evd.U().to_owned())
    };
    let min_abs = values.iter().fold(f64::INFINITY, |m, e| m.min(e.abs()));
    if min_abs < MIN_F_EIGENVALUE {
        return Err(Error::NearSingularF { min_abs });
    }
    let pos: Vec<usize> = (0..k).filter(|&i| values[i] > 0.0).collect();
    let neg: Vec<usize> = (0..k).filter(|&i| values[i] < 0.0).collect();
    let basis = |idx: &[usize]| Mat::from_fn(k, idx.len(), |i, j| vectors[(i, idx[j])]);
    let plus_basis = basis(&pos);
    let minus_basis = basis(&neg);
    let plus = &plus_basis * plus_basis.adjoint();
    let minus = &minus_basis * minus_basis.adjoint();
    Ok(FiberSplitting { plus, minus, plus_basis, minus_basis, k_plus: pos.len(), k_minus: neg.len() })
}

/// Orientation sign of a boundary circle relative to the reference (`r = 0`) end.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Orientation {
    Positive,
    Negative,
}

impl Orientation {
    pub fn sign(self) -> f64 {
        match self {
            Orientation::Positive => 1.0,
            Orientation::Negative => -1.0,
        }
    }

    pub fn sign_i64(self) -> i64 {
        match self {
            Orientation::Positive => 1,
            Orientation::Negative => -1,
        }
    }

    pub fn from_sign(s: i64) -> Result<Self> {
        match s {
            1 => Ok(Orientation::Positive),
            -1 => Ok(Orientation::Negative),
            _ => Err(Error::Config(format!("orientation sign must be ±1, got {s}"))),
        }
    }
}

/// Everything attached to one boundary circle.
#[derive(Clone, Debug)]
pub struct BoundaryComponentSpec {
    pub orientation: Orientation,
    /// Constant Hermitian connection `A` on the rank-`k` bundle.
    pub connection: Mat<C64>,
    pub f: BoundaryEndomorphism,
    pub gauge: TrigPolyGauge,
}

/// Which part of the splitting a boundary family acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BundlePart {
    Full,
    Plus,
    Minus,
}

impl BoundaryComponentSpec {
    /// The boundary operator on `E`, `E₊` or `E₋` with the compressed connection
    /// `Π A Π`. Returns `None` when the requested part has rank zero.
    pub fn circle_operator(&self, part: BundlePart, m_max: usize) -> Result<Option<CircleOperator>> {
        let a = match part {
            BundlePart::Full => self.connection.clone(),
            BundlePart::Plus | BundlePart::Minus => {
                let s = split_by_f(&self.f)?;
                let v = if part == BundlePart::Plus { s.plus_basis } else { s.minus_basis };
                if v.ncols() == 0 {
                    return Ok(None);
                }
                let c = v.adjoint() * &self.connection * &v;
                let k = c.nrows();
                Mat::from_fn(k, k, |i, j| (c[(i, j)] + c[(j, i)].conj()) * 0.5)
            }
        };
        build_circle_operator(a.nrows(), self.gauge.rank(), m_max, a.as_ref(), self.orientation).map(Some)
    }
}

/// Truncated boundary operator together with the structure needed to conjugate it.
#[derive(Clone, Debug)]
pub struct CircleOperator {
    op: HermitianOperator,
    k: usize,
    n: usize,
    m_max: usize,
    orientation: Orientation,
}

impl CircleOperator {
    pub fn operator(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn into_operator(self) -> HermitianOperator {
        self.op
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m_max(&self) -> usize {
        self.m_max
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn fiber_dim(&self) -> usize {
        self.k * self.n
    }

    /// Gershgorin lower bound on `|λ|` for the rows within `degree` modes of the
    /// truncation edge, valid uniformly along the straight path to `other`.
    ///
    /// A positive value certifies that no edge eigenvalue approaches zero.
    pub fn edge_margin(&self, other: &CircleOperator, degree: usize) -> f64 {
        let kn = self.fiber_dim();
        let dim = self.op.dim();
        let (a, b) = (self.op.matrix(), other.op.matrix());
        let mut margin = f64::INFINITY;
        for row in 0..dim {
            let m = (row / kn) as i64 - self.m_max as i64;
            if m.unsigned_abs() as usize + degree <= self.m_max {
                continue;
            }
            let (c0, c1) = (a[(row, row)].re, b[(row, row)].re);
            let center = if c0.signum() == c1.signum() { c0.abs().min(c1.abs()) } else { 0.0 };
            let radius = |h: MatRef<'_, C64>| (0..dim).filter(|&j| j != row).map(|j| h[(row, j)].norm()).sum::<f64>();
            margin = margin.min(center - radius(a).max(radius(b)));
        }
        margin
    }
}

fn circle_labels(k: usize, n: usize, m_max: usize) -> Vec<BasisLabel> {
    let mut labels = Vec::with_capacity((2 * m_max + 1) * k * n);
    for m in -(m_max as i32)..=m_max as i32 {
        for f in 0..k * n {
            labels.push(BasisLabel::boundary(m, f));
        }
    }
    labels
}

/// `σ·(−i d/dθ ⊗ I + A ⊗ I_N)` on Fourier modes `|m| <= M`.
pub fn build_circle_operator(
    k: usize,
    n: usize,
    m_max: usize,
    connection: MatRef<'_, C64>,
    orientation: Orientation,
) -> Result<CircleOperator> {
    if m_max < 1 {
        return Err(Error::InvalidTruncation { m_max });
    }
    if connection.nrows() != k || connection.ncols() != k {
        return Err(Error::DimensionMismatch(format!("connection must be {k}x{k}")));
    }
    let residual = hermiticity_residual(connection);
    let tolerance = hermiticity_tolerance(connection);
    if residual > tolerance {
        return Err(Error::NonHermitianInput { residual, tolerance });
    }
    let kn = k * n;
    let dim = (2 * m_max + 1) * kn;
    let sigma = orientation.sign();
    let mut h = Mat::<C64>::zeros(dim, dim);
    for mi in 0..=2 * m_max {
        let m = mi as f64 - m_max as f64;
        let base = mi * kn;
        for e in 0..k {
            for ep in 0..k {
                let a = connection[(e, ep)];
                for c in 0..n {
                    let v = if e == ep { a + m } else { a };
                    h[(base + e * n + c, base + ep * n + c)] = v * sigma;
                }
            }
        }
    }
    let op = HermitianOperator::assembled(h, circle_labels(k, n, m_max))?;
    Ok(CircleOperator { op, k, n, m_max, orientation })
}

/// Block Toeplitz compression of the multiplication operator with symbol
/// `Σ_p coeffs[p + half]·e^{ipθ}` (acting on the gauge index) to `|m| <= M`,
/// tensored with the identity on the bundle index.
pub(crate) fn toeplitz_compression(coeffs: &[Mat<C64>], k: usize, n: usize, m_max: usize) -> Mat<C64> {
    let half = (coeffs.len() / 2) as i64;
    let kn = k * n;
    let modes = 2 * m_max + 1;
    let mut t = Mat::<C64>::zeros(modes * kn, modes * kn);
    for mi in 0..modes {
        for mj in 0..modes {
            let p = mi as i64 - mj as i64;
            if p.abs() > half {
                continue;
            }
            let c = &coeffs[(p + half) as usize];
            for e in 0..k {
                for ci in 0..n {
                    for cj in 0..n {
                        t[(mi * kn + e * n + ci, mj * kn + e * n + cj)] = c[(ci, cj)];
                    }
                }
            }
        }
    }
    t
}

/// Compression of `g·B·g⁻¹` to the mode window, via the potential `W` of `g`.
pub fn gauge_conjugate(b: &CircleOperator, g: &TrigPolyGauge) -> Result<CircleOperator> {
    if g.rank() != b.n {
        return Err(Error::DimensionMismatch(format!(
            "gauge rank {} does not match operator gauge rank {}",
            g.rank(),
            b.n
        )));
    }
    if b.m_max < g.degree() + 2 {
        return Err(Error::TruncationTooTight { m_max: b.m_max, degree: g.degree() });
    }
    let w = toeplitz_compression(&g.potential(), b.k, b.n, b.m_max);
    let sigma = C64::new(b.orientation.sign(), 0.0);
    let m = b.op.matrix() + w * faer::Scale(sigma);
    let op = HermitianOperator::assembled(m, b.op.labels().to_vec())?;
    Ok(CircleOperator { op, ..*b })
}

/// Refinement parameters attached to a path.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplePolicy {
    pub initial_samples: usize,
    pub max_samples: usize,
}

impl Default for SamplePolicy {
    fn default() -> Self {
        Self { initial_samples: 17, max_samples: 1 << 10 }
    }
}

/// A continuous map `u ∈ [0, 1] → HermitianOperator` with fixed labels.
pub trait OperatorPath: Sync {
    fn labels(&self) -> &[BasisLabel];

    fn evaluate(&self, u: f64) -> Result<HermitianOperator>;

    fn dim(&self) -> usize {
        self.labels().len()
    }

    /// Upper bound on `‖dH/du‖`, when known.
    fn lipschitz_bound(&self) -> Option<f64> {
        None
    }

    fn sample_policy(&self) -> SamplePolicy {
        SamplePolicy::default()
    }
}

/// `u ↦ (1 − u)·start + u·end`.
#[derive(Clone, Debug)]
pub struct LinearPath {
    start: HermitianOperator,
    end: HermitianOperator,
    lipschitz: f64,
}

impl LinearPath {
    pub fn new(start: HermitianOperator, end: HermitianOperator) -> Result<Self> {
        if start.labels() != end.labels() {
            return Err(Error::DimensionMismatch("path endpoints carry different labels".into()));
        }
        let d = end.matrix() - start.matrix();
        // Max absolute row sum bounds the spectral norm of a Hermitian matrix.
        let lipschitz = (0..d.nrows())
            .map(|i| (0..d.ncols()).map(|j| d[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max);
        Ok(Self { start, end, lipschitz })
    }

    pub fn start(&self) -> &HermitianOperator {
        &self.start
    }

    pub fn end(&self) -> &HermitianOperator {
        &self.end
    }
}

impl OperatorPath for LinearPath {
    fn labels(&self) -> &[BasisLabel] {
        self.start.labels()
    }

    fn evaluate(&self, u: f64) -> Result<HermitianOperator> {
        if u == 0.0 {
            return Ok(self.start.clone());
        }
        if u == 1.0 {
            return Ok(self.end.clone());
        }
        self.start.interpolate(&self.end, u)
    }

    fn lipschitz_bound(&self) -> Option<f64> {
        Some(self.lipschitz)
    }
}

/// `u ↦ (1 − u)·B + u·g B g⁻¹`.
pub fn conjugation_path(b: &CircleOperator, g: &TrigPolyGauge) -> Result<LinearPath> {
    let conj = gauge_conjugate(b, g)?;
    LinearPath::new(b.op.clone(), conj.op)
}

/// Analytic flow of the circle conjugation path for fiber lines with windings
/// `n_j`: eigenvalues `σ(m + a_j − u·n_j)` give `−σ·Σ n_j`.
pub fn exact_circle_flow(windings: &[i64], orientation: Orientation) -> i64 {
    -orientation.sign_i64() * windings.iter().sum::<i64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::eig_spectrum;

    fn scalar(a: f64) -> Mat<C64> {
        Mat::from_fn(1, 1, |_, _| C64::new(a, 0.0))
    }

    fn assert_values(got: &[f64], want: &[f64], tol: f64) {
        assert_eq!(got.len(), want.len(), "{got:?} vs {want:?}");
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() < tol, "{got:?} vs {want:?}");
        }
    }

    #[test]
    fn circle_operator_examples() {
        let b = build_circle_operator(1, 1, 2, scalar(0.0).as_ref(), Orientation::Positive).unwrap();
        assert_values(eig_spectrum(b.operator()).unwrap().values(), &[-2.0, -1.0, 0.0, 1.0, 2.0], 1e-14);

        let b = build_circle_operator(1, 1, 2, scalar(0.3).as_ref(), Orientation::Positive).unwrap();
        assert_values(eig_spectrum(b.operator()).unwrap().values(), &[-1.7, -0.7, 0.3, 1.3, 2.3], 1e-14);

        let neg = build_circle_operator(1, 1, 2, scalar(0.3).as_ref(), Orientation::Negative).unwrap();
        assert_values(eig_spectrum(neg.operator()).unwrap().values(), &[-2.3, -1.3, -0.3, 0.7, 1.7], 1e-14);

        assert!(matches!(
            build_circle_operator(1, 1, 0, scalar(0.0).as_ref(), Orientation::Positive),
            Err(Error::InvalidTruncation { .. })
        ));
    }

    #[test]
    fn integer_spectrum_with_multiplicity() {
        let a = Mat::<C64>::zeros(2, 2);
        let b = build_circle_operator(2, 2, 3, a.as_ref(), Orientation::Positive).unwrap();
        let s = eig_spectrum(b.operator()).unwrap();
        for (i, v) in s.values().iter().enumerate() {
            assert_eq!(*v, (i / 4) as f64 - 3.0);
        }
    }

    #[test]
    fn identity_gauge_leaves_operator_unchanged() {
        let b = build_circle_operator(1, 2, 4, scalar(0.2).as_ref(), Orientation::Positive).unwrap();
        let c = gauge_conjugate(&b, &TrigPolyGauge::identity(2)).unwrap();
        assert_eq!(hermiticity_residual(c.operator().matrix()), 0.0);
        let diff = b.operator().matrix() - c.operator().matrix();
        assert_eq!(diff.as_ref().norm_max(), 0.0);
    }

    #[test]
    fn scalar_winding_shifts_interior_spectrum() {
        let b = build_circle_operator(1, 1, 6, scalar(0.0).as_ref(), Orientation::Positive).unwrap();
        let c = gauge_conjugate(&b, &TrigPolyGauge::scalar_winding(1)).unwrap();
        let want: Vec<f64> = (-6..=6).map(|m| m as f64 - 1.0).collect();
        assert_values(eig_spectrum(c.operator()).unwrap().values(), &want, 1e-13);

        let b = build_circle_operator(1, 2, 6, scalar(0.0).as_ref(), Orientation::Positive).unwrap();
        let g = TrigPolyGauge::diagonal_windings(&[2, 2]);
        let c = gauge_conjugate(&b, &g).unwrap();
        let want: Vec<f64> = (-6..=6).flat_map(|m| [m as f64 - 2.0; 2]).collect();
        assert_values(eig_spectrum(c.operator()).unwrap().values(), &want, 1e-13);
    }

    #[test]
    fn truncation_margin_enforced() {
        let b = build_circle_operator(1, 1, 3, scalar(0.0).as_ref(), Orientation::Positive).unwrap();
        assert!(matches!(
            gauge_conjugate(&b, &TrigPolyGauge::scalar_winding(2)),
            Err(Error::TruncationTooTight { .. })
        ));
    }

    #[test]
    fn conjugation_path_endpoints_and_midpoint() {
        let b = build_circle_operator(1, 1, 5, scalar(0.1).as_ref(), Orientation::Positive).unwrap();
        let path = conjugation_path(&b, &TrigPolyGauge::scalar_winding(3)).unwrap();
        let h0 = path.evaluate(0.0).unwrap();
        assert_eq!((h0.matrix() - b.operator().matrix()).as_ref().norm_max(), 0.0);
        let h = path.evaluate(0.25).unwrap();
        for i in 0..h.dim() {
            let m = i as f64 - 5.0;
            assert!((h.matrix()[(i, i)].re - (m + 0.1 - 0.75)).abs() < 1e-14);
        }
        let id = conjugation_path(&b, &TrigPolyGauge::identity(1)).unwrap();
        assert!((id.evaluate(0.7).unwrap().matrix() - b.operator().matrix()).as_ref().norm_max() < 1e-14);
    }

    #[test]
    fn exact_flow_examples() {
        assert_eq!(exact_circle_flow(&[1], Orientation::Positive), -1);
        assert_eq!(exact_circle_flow(&[1, 1], Orientation::Negative), 2);
        assert_eq!(exact_circle_flow(&[0], Orientation::Negative), 0);
    }

    #[test]
    fn split_examples() {
        let s = split_by_f(&BoundaryEndomorphism::diagonal(&[1.0, -1.0], 0).unwrap()).unwrap();
        assert_eq!((s.k_plus, s.k_minus), (1, 1));
        assert_eq!(s.plus[(0, 0)], C64::new(1.0, 0.0));
        assert_eq!(s.plus[(1, 1)], C64::new(0.0, 0.0));

        let s = split_by_f(&BoundaryEndomorphism::diagonal(&[2.0, 1.0], 0).unwrap()).unwrap();
        assert_eq!((s.k_plus, s.k_minus), (2, 0));

        let f = BoundaryEndomorphism::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]], 0).unwrap();
        let s = split_by_f(&f).unwrap();
        assert_eq!((s.k_plus, s.k_minus), (1, 1));
        for i in 0..2 {
            for j in 0..2 {
                assert!((s.plus[(i, j)].re - 0.5).abs() < 1e-14 && s.plus[(i, j)].im.abs() < 1e-14);
            }
        }
    }

    #[test]
    fn near_singular_f_rejected() {
        assert!(matches!(
            BoundaryEndomorphism::diagonal(&[1.0, 1e-8], 0),
            Err(Error::NearSingularF { .. })
        ));
    }

    #[test]
    fn non_unitary_symbol_rejected() {
        let half = scalar(0.5);
        assert!(matches!(TrigPolyGauge::new(1, vec![(0, half.clone()), (1, half)]), Err(Error::SingularGauge { .. }) | Err(Error::NotUnitary { .. })));
    }

    #[test]
    fn exp_sin_truncation_is_unitary_and_close() {
        let g = TrigPolyGauge::winding_exp_sin(1, 1.0, 12).unwrap();
        for s in 0..50 {
            let th = 0.123 * s as f64;
            let want = C64::from_polar(1.0, th + th.sin());
            assert!((g.eval(th)[(0, 0)] - want).norm() < 1e-9);
        }
    }
}
