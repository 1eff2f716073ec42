//! Dirac operator on the finite cylinder `S¹ × [0, L]` with local boundary
//! conditions at both ends.
//!
//! In the 2-spinor picture the operator is `[[0, −∂_r + B_u], [∂_r + B_u, 0]]`
//! acting on `(s₊, s₋)`, where `B_u = (1 − u)·B + u·gBg⁻¹` is the boundary
//! operator on the reference circle. The boundary relation at the end `r = r*`
//! is `s₋ = σ*·F*·s₊` with `σ(0) = +1` and `σ(L) = −1` (the inward normal flips
//! between the two ends). In configuration terms:
//!
//! * `r = 0`: `s₋(0) = F0·s₊(0)`
//! * `r = L`: `s₋(L) = −FL·s₊(L)`
//!
//! Discretization: in the rotated frame `a = (s₊ + s₋)/√2`, `b = (s₊ − s₋)/√2`
//! the operator reads `[[B, ∂_r], [−∂_r, −B]]`. The unknown `a` is continuous
//! piecewise linear on the radial nodes, `b` is piecewise constant on the
//! cells, and the mass matrix uses trapezoidal quadrature so it stays
//! diagonal. A boundary relation `s₋ = G·s₊` becomes `b = C·a` with
//! `C = (I − G)(I + G)⁻¹`: the `G = −1` eigenspace of `G` is imposed
//! essentially (`a = 0`), the rest enters through the boundary term of Green's
//! formula. The resulting bilinear form is symmetric, so Hermiticity of the
//! final matrix is structural.

use std::f64::consts::PI;

use faer::{Mat, MatRef, Side};
use serde::{Deserialize, Serialize};

use crate::boundary::{
    build_circle_operator, toeplitz_compression, BoundaryComponentSpec, BoundaryEndomorphism, OperatorPath,
    Orientation, TrigPolyGauge,
};
use crate::error::{Error, Result};
use crate::lattice::{hermiticity_residual, hermiticity_tolerance, BasisLabel, HermitianOperator, Spectrum, Spinor, C64};

/// Eigenvalues of `G` this close to `−1` are imposed as Dirichlet conditions on `a`.
const DIRICHLET_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct CylinderConfig {
    pub length: f64,
    pub radial_elements: usize,
    pub m_max: usize,
    pub k: usize,
    pub n: usize,
    pub connection: Mat<C64>,
    pub f0: BoundaryEndomorphism,
    pub fl: BoundaryEndomorphism,
    pub gauge: TrigPolyGauge,
}

impl CylinderConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.length > 0.0 && self.length.is_finite()) {
            return Err(Error::Config(format!("cylinder length must be positive, got {}", self.length)));
        }
        if self.radial_elements < 8 {
            return Err(Error::Config(format!(
                "need at least 8 radial elements, got {}",
                self.radial_elements
            )));
        }
        if self.m_max < 1 {
            return Err(Error::InvalidTruncation { m_max: self.m_max });
        }
        if self.m_max < self.gauge.degree() + 2 {
            return Err(Error::TruncationTooTight { m_max: self.m_max, degree: self.gauge.degree() });
        }
        if self.f0.rank() != self.k || self.fl.rank() != self.k {
            return Err(Error::DimensionMismatch(format!(
                "boundary endomorphisms must be {k}x{k}",
                k = self.k
            )));
        }
        if self.connection.nrows() != self.k || self.connection.ncols() != self.k {
            return Err(Error::DimensionMismatch(format!("connection must be {k}x{k}", k = self.k)));
        }
        if self.gauge.rank() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "gauge rank {} does not match N = {}",
                self.gauge.rank(),
                self.n
            )));
        }
        let residual = hermiticity_residual(self.connection.as_ref());
        let tolerance = hermiticity_tolerance(self.connection.as_ref());
        if residual > tolerance {
            return Err(Error::NonHermitianInput { residual, tolerance });
        }
        Ok(())
    }

    /// Advisory resolution check `n_r >= 8·L·(M + ‖A‖)`; returns a message when violated.
    pub fn resolution_warning(&self) -> Option<String> {
        let a_norm = (0..self.k)
            .map(|i| (0..self.k).map(|j| self.connection[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max);
        let need = 8.0 * self.length * (self.m_max as f64 + a_norm);
        ((self.radial_elements as f64) < need).then(|| {
            format!(
                "radial_elements = {} is below the advised 8·L·(M + ‖A‖) = {need:.1}",
                self.radial_elements
            )
        })
    }

    pub fn mode_fiber_dim(&self) -> usize {
        (2 * self.m_max + 1) * self.k * self.n
    }

    /// The two boundary circles: `r = 0` with positive orientation, `r = L` with negative.
    pub fn boundary_components(&self) -> [BoundaryComponentSpec; 2] {
        [
            BoundaryComponentSpec {
                orientation: Orientation::Positive,
                connection: self.connection.clone(),
                f: self.f0.clone(),
                gauge: self.gauge.clone(),
            },
            BoundaryComponentSpec {
                orientation: Orientation::Negative,
                connection: self.connection.clone(),
                f: self.fl.clone(),
                gauge: self.gauge.clone(),
            },
        ]
    }
}

/// Trial space and Robin coefficient at one end, in the bundle index only.
#[derive(Clone, Debug)]
struct EndCondition {
    /// Orthonormal basis (`k × r`) of the directions where `a` is free.
    trial: Mat<C64>,
    /// `C` restricted to the trial directions (diagonal in that basis).
    robin: Vec<f64>,
}

fn end_condition(f: &BoundaryEndomorphism, sign: f64) -> Result<EndCondition> {
    let k = f.rank();
    let (values, vectors): (Vec<f64>, Mat<C64>) = if f.is_diagonal() {
        ((0..k).map(|i| sign * f.matrix()[(i, i)].re).collect(), Mat::identity(k, k))
    } else {
        let g = f.matrix() * faer::Scale(C64::new(sign, 0.0));
        let evd = g.as_ref().self_adjoint_eigen(Side::Lower).map_err(|_| Error::ConvergenceFailure)?;
        let s = evd.S().column_vector();
        ((0..k).map(|i| s[i].re).collect(), evd.U().to_owned())
    };
    let free: Vec<usize> = (0..k).filter(|&i| (values[i] + 1.0).abs() > DIRICHLET_TOL).collect();
    let trial = Mat::from_fn(k, free.len(), |i, j| vectors[(i, free[j])]);
    let gram = trial.adjoint() * &trial;
    let defect = (&gram - Mat::<C64>::identity(free.len(), free.len())).as_ref().norm_max();
    if free.len() > 0 && !(defect < 1e-10) {
        return Err(Error::ConstraintRankFailure {
            detail: format!("trial basis Gram defect {defect:.3e}"),
        });
    }
    let robin = free.iter().map(|&i| (1.0 - values[i]) / (1.0 + values[i])).collect();
    Ok(EndCondition { trial, robin })
}

/// Assembled cylinder operator at one path parameter.
#[derive(Clone, Debug)]
pub struct CylinderOperator {
    op: HermitianOperator,
}

impl CylinderOperator {
    pub fn operator(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn into_operator(self) -> HermitianOperator {
        self.op
    }
}

/// Precomputed pieces shared by every `u` of one configuration.
#[derive(Clone, Debug)]
struct Assembler {
    radial_elements: usize,
    h: f64,
    k: usize,
    n: usize,
    modes: usize,
    /// `B` on the reference circle (orientation +1).
    b0: Mat<C64>,
    /// Compressed gauge potential; `B_u = b0 + u·potential`.
    potential: Mat<C64>,
    ends: [EndCondition; 2],
    labels: Vec<BasisLabel>,
    offsets: Vec<usize>,
}

impl Assembler {
    fn new(cfg: &CylinderConfig) -> Result<Self> {
        cfg.validate()?;
        let b0 = build_circle_operator(cfg.k, cfg.n, cfg.m_max, cfg.connection.as_ref(), Orientation::Positive)?
            .into_operator()
            .into_matrix();
        let potential = toeplitz_compression(&cfg.gauge.potential(), cfg.k, cfg.n, cfg.m_max);
        let ends = [end_condition(&cfg.f0, 1.0)?, end_condition(&cfg.fl, -1.0)?];
        let modes = 2 * cfg.m_max + 1;
        let nr = cfg.radial_elements;

        // Slot order: a_0, b_1, a_1, b_2, …, b_n, a_n.
        let mut labels = Vec::new();
        let mut offsets = Vec::with_capacity(2 * nr + 2);
        let push_a = |labels: &mut Vec<BasisLabel>, node: usize, width: usize| {
            for mi in 0..modes {
                for f in 0..width * cfg.n {
                    labels.push(BasisLabel::radial(mi as i32 - cfg.m_max as i32, node, Spinor::Sum, f));
                }
            }
        };
        offsets.push(0);
        push_a(&mut labels, 0, ends[0].trial.ncols());
        for e in 1..=nr {
            offsets.push(labels.len());
            for mi in 0..modes {
                for f in 0..cfg.k * cfg.n {
                    labels.push(BasisLabel::radial(mi as i32 - cfg.m_max as i32, e, Spinor::Difference, f));
                }
            }
            offsets.push(labels.len());
            let width = if e == nr { ends[1].trial.ncols() } else { cfg.k };
            push_a(&mut labels, e, width);
        }
        offsets.push(labels.len());
        if labels.is_empty() {
            return Err(Error::ConstraintRankFailure { detail: "empty trial space".into() });
        }
        Ok(Self {
            radial_elements: nr,
            h: cfg.length / nr as f64,
            k: cfg.k,
            n: cfg.n,
            modes,
            b0,
            potential,
            ends,
            labels,
            offsets,
        })
    }

    fn nb(&self) -> usize {
        self.modes * self.k * self.n
    }

    /// Lift of the bundle-index trial basis to the full mode ⊗ bundle ⊗ gauge space (`nb × reduced`).
    fn lift(&self, trial: MatRef<'_, C64>) -> Mat<C64> {
        let (k, n, r) = (self.k, self.n, trial.ncols());
        let mut q = Mat::<C64>::zeros(self.nb(), self.modes * r * n);
        for mi in 0..self.modes {
            for e in 0..k {
                for j in 0..r {
                    let v = trial[(e, j)];
                    if v == C64::new(0.0, 0.0) {
                        continue;
                    }
                    for c in 0..n {
                        q[(mi * k * n + e * n + c, mi * r * n + j * n + c)] = v;
                    }
                }
            }
        }
        q
    }

    fn assemble(&self, u: f64) -> Result<CylinderOperator> {
        let nr = self.radial_elements;
        let h = self.h;
        let nb = self.nb();
        let bu = &self.b0 + &self.potential * faer::Scale(C64::new(u, 0.0));
        let dim = self.labels.len();
        let mut mat = Mat::<C64>::zeros(dim, dim);
        let slot = |s: usize| self.offsets[s]..self.offsets[s + 1];

        // Lifted trial bases and Robin diagonals at both ends.
        let lifts: Vec<Mat<C64>> = self.ends.iter().map(|e| self.lift(e.trial.as_ref())).collect();
        let robin_diag = |end: &EndCondition| -> Vec<f64> {
            let r = end.trial.ncols();
            let mut d = Vec::with_capacity(self.modes * r * self.n);
            for _ in 0..self.modes {
                for j in 0..r {
                    for _ in 0..self.n {
                        d.push(end.robin[j]);
                    }
                }
            }
            d
        };

        // Nodal blocks a_i: (mass_i · B_u + boundary term) / mass_i.
        for node in 0..=nr {
            let s = 2 * node;
            let range = slot(s);
            let off = range.start;
            if node == 0 || node == nr {
                let end = if node == 0 { 0 } else { 1 };
                let q = &lifts[end];
                let block = q.adjoint() * &bu * q;
                let rd = robin_diag(&self.ends[end]);
                let mass = h / 2.0;
                let sign = if node == 0 { -1.0 } else { 1.0 };
                for i in 0..block.nrows() {
                    for j in 0..block.ncols() {
                        mat[(off + i, off + j)] = block[(i, j)];
                    }
                    mat[(off + i, off + i)] += C64::new(sign * rd[i] / mass, 0.0);
                }
            } else {
                for i in 0..nb {
                    for j in 0..nb {
                        mat[(off + i, off + j)] = bu[(i, j)];
                    }
                }
            }
        }
        // Cell blocks b_e: −B_u.
        for e in 1..=nr {
            let off = slot(2 * e - 1).start;
            for i in 0..nb {
                for j in 0..nb {
                    mat[(off + i, off + j)] = -bu[(i, j)];
                }
            }
        }
        // Couplings: K(a_i, b_e) = −∫_e φ_i', scaled by (m_i·h)^{-1/2}.
        for e in 1..=nr {
            let cell = slot(2 * e - 1).start;
            for (node, deriv) in [(e - 1, -1.0), (e, 1.0)] {
                let mass = if node == 0 || node == nr { h / 2.0 } else { h };
                let scale = -deriv / (mass * h).sqrt();
                let a = slot(2 * node).start;
                if node == 0 || node == nr {
                    let q = &lifts[if node == 0 { 0 } else { 1 }];
                    for i in 0..q.ncols() {
                        for j in 0..nb {
                            let v = q[(j, i)].conj() * scale;
                            if v != C64::new(0.0, 0.0) {
                                mat[(a + i, cell + j)] = v;
                                mat[(cell + j, a + i)] = v.conj();
                            }
                        }
                    }
                } else {
                    for i in 0..nb {
                        mat[(a + i, cell + i)] = C64::new(scale, 0.0);
                        mat[(cell + i, a + i)] = C64::new(scale, 0.0);
                    }
                }
            }
        }
        let op = HermitianOperator::assembled(mat, self.labels.clone())?;
        Ok(CylinderOperator { op })
    }
}

pub fn build_cylinder_operator(cfg: &CylinderConfig, u: f64) -> Result<CylinderOperator> {
    if !(0.0..=1.0).contains(&u) {
        return Err(Error::Config(format!("path parameter u = {u} outside [0, 1]")));
    }
    Assembler::new(cfg)?.assemble(u)
}

/// `u ↦ build_cylinder_operator(cfg, u)` with the configuration-dependent parts cached.
#[derive(Clone, Debug)]
pub struct CylinderPath {
    assembler: Assembler,
    lipschitz: f64,
}

impl CylinderPath {
    pub fn new(cfg: &CylinderConfig) -> Result<Self> {
        let assembler = Assembler::new(cfg)?;
        let p = &assembler.potential;
        let lipschitz = (0..p.nrows())
            .map(|i| (0..p.ncols()).map(|j| p[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max);
        Ok(Self { assembler, lipschitz })
    }

    /// The boundary operator `B_u` on the reference circle.
    pub fn boundary_matrix(&self, u: f64) -> Mat<C64> {
        &self.assembler.b0 + &self.assembler.potential * faer::Scale(C64::new(u, 0.0))
    }
}

pub fn cylinder_path(cfg: &CylinderConfig) -> Result<CylinderPath> {
    CylinderPath::new(cfg)
}

impl OperatorPath for CylinderPath {
    fn labels(&self) -> &[BasisLabel] {
        &self.assembler.labels
    }

    fn evaluate(&self, u: f64) -> Result<HermitianOperator> {
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::Config(format!("path parameter u = {u} outside [0, 1]")));
        }
        self.assembler.assemble(u).map(CylinderOperator::into_operator)
    }

    fn lipschitz_bound(&self) -> Option<f64> {
        Some(self.lipschitz)
    }
}

/// End conditions with `F = ±id` on a line, named by the signs of `(F0, FL)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CylinderBc {
    /// `F0 = −id`, `FL = +id`: point branch `−λ_i`.
    MinusIdId,
    /// `F0 = FL = +id`: no point branch.
    IdId,
    /// `F0 = +id`, `FL = −id`: point branch `+λ_i`.
    IdMinusId,
    /// `F0 = FL = −id`: no point branch.
    MinusIdMinusId,
}

impl CylinderBc {
    pub fn from_signs(f0: f64, fl: f64) -> Self {
        match (f0 > 0.0, fl > 0.0) {
            (false, true) => CylinderBc::MinusIdId,
            (true, true) => CylinderBc::IdId,
            (true, false) => CylinderBc::IdMinusId,
            (false, false) => CylinderBc::MinusIdMinusId,
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "minus_id_id" => Ok(CylinderBc::MinusIdId),
            "id_id" => Ok(CylinderBc::IdId),
            "id_minus_id" => Ok(CylinderBc::IdMinusId),
            "minus_id_minus_id" => Ok(CylinderBc::MinusIdMinusId),
            other => Err(Error::Config(format!("unknown cylinder boundary condition {other:?}"))),
        }
    }
}

/// Closed-form spectrum of the cylinder operator whose boundary block has
/// eigenvalues `lambdas`, restricted to `|λ| <= window`.
///
/// Per boundary eigenvalue `μ` the radial problem separates. With a
/// Dirichlet-type pairing of the ends (`MinusIdId`, `IdMinusId`) one gets the
/// constant mode `∓μ` and the branch `±√(μ² + (jπ/L)²)`, `j >= 1`; with the
/// mixed pairing the branch is `±√(μ² + ((j + ½)π/L)²)`, `j >= 0`, and there is
/// no constant mode.
pub fn exact_cylinder_spectrum(lambdas: &[f64], length: f64, bc: CylinderBc, window: f64) -> Spectrum {
    let mut out = Vec::new();
    for &mu in lambdas {
        let (point, offset, first) = match bc {
            CylinderBc::MinusIdId => (Some(-mu), 0.0, 1),
            CylinderBc::IdMinusId => (Some(mu), 0.0, 1),
            CylinderBc::IdId | CylinderBc::MinusIdMinusId => (None, 0.5, 0),
        };
        if let Some(p) = point {
            if p.abs() <= window {
                out.push(p);
            }
        }
        let mut j = first;
        loop {
            let kappa = (j as f64 + offset) * PI / length;
            let lam = (mu * mu + kappa * kappa).sqrt();
            if lam > window {
                break;
            }
            out.push(lam);
            out.push(-lam);
            j += 1;
        }
    }
    Spectrum::from_unsorted(out)
}

/// Closed-form spectrum of a whole configuration at path parameter `u`, when all
/// fiber data is diagonal and `F0`, `FL` have entries `±1`.
pub fn exact_spectrum_for_config(cfg: &CylinderConfig, u: f64, window: f64) -> Result<Spectrum> {
    cfg.validate()?;
    let k = cfg.k;
    let diag_ok = |m: MatRef<'_, C64>| (0..k).all(|i| (0..k).all(|j| i == j || m[(i, j)] == C64::new(0.0, 0.0)));
    if !diag_ok(cfg.connection.as_ref()) || !cfg.f0.is_diagonal() || !cfg.fl.is_diagonal() {
        return Err(Error::Config("closed-form cylinder spectrum needs diagonal fiber data".into()));
    }
    let path = CylinderPath::new(cfg)?;
    let bu = path.boundary_matrix(u);
    let (modes, n) = (2 * cfg.m_max + 1, cfg.n);
    let mut values = Vec::new();
    for e in 0..k {
        let (s0, sl) = (cfg.f0.matrix()[(e, e)].re, cfg.fl.matrix()[(e, e)].re);
        if (s0.abs() - 1.0).abs() > 1e-12 || (sl.abs() - 1.0).abs() > 1e-12 {
            return Err(Error::Config("closed-form cylinder spectrum needs F entries ±1".into()));
        }
        let idx: Vec<usize> = (0..modes).flat_map(|mi| (0..n).map(move |c| mi * k * n + e * n + c)).collect();
        let block = Mat::from_fn(idx.len(), idx.len(), |i, j| bu[(idx[i], idx[j])]);
        let lambdas = block
            .as_ref()
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|_| Error::ConvergenceFailure)?;
        values.extend(exact_cylinder_spectrum(&lambdas, cfg.length, CylinderBc::from_signs(s0, sl), window).into_values());
    }
    Ok(Spectrum::from_unsorted(values))
}
