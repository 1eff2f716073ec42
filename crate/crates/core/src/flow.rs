//! Spectral flow of operator paths, crossing censuses, spectral projections
//! and relative indices.
//!
//! The flow of a path is `neg(start) − neg(end)` with zero counted as
//! nonnegative. The census tracks individual eigenvalue branches through the
//! sampled partition and is compared against that count.

use std::io::Write;

use faer::{Mat, MatRef};
use serde::{Deserialize, Serialize};

use crate::boundary::{build_circle_operator, gauge_conjugate, OperatorPath, Orientation, TrigPolyGauge};
use crate::error::{Error, Result};
use crate::invariants::winding_number;
use crate::lattice::{eig_decomposition, eig_spectrum, neg_count, HermitianOperator, Spectrum, C64, DEFAULT_ZERO_TOL};

/// Eigenvalues closer than this to a projection cutoff are rejected.
pub const CUTOFF_TOL: f64 = 1e-8;
/// Required distance of every eigenvalue from the calibration window edges.
pub const WINDOW_BUFFER: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowOptions {
    pub zero_tol: f64,
    /// Half-width of the tracking window.
    pub window: f64,
    /// Intervals containing a crossing are bisected until narrower than this.
    pub crossing_resolution: f64,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self { zero_tol: DEFAULT_ZERO_TOL, window: 1.0, crossing_resolution: 1e-3 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub u_lo: f64,
    pub u_hi: f64,
    /// `+1` when the branch moves upward through zero.
    pub direction: i64,
    pub branch_id: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub u: f64,
    pub branch_id: usize,
    pub lambda: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralFlowResult {
    pub flow: i64,
    pub census_flow: i64,
    pub inconsistent_census: bool,
    pub partition: Vec<f64>,
    pub crossings: Vec<Crossing>,
    /// Near-kernel counts at `u = 0` and `u = 1`.
    pub endpoint_kernel: [usize; 2],
    /// Smallest `|λ|` seen on branches away from their detected crossings.
    pub min_gap: Option<f64>,
    pub max_hermiticity_residual: f64,
    pub dim: usize,
    pub warnings: Vec<String>,
    #[serde(skip)]
    pub curves: Vec<CurvePoint>,
}

impl SpectralFlowResult {
    pub fn write_census_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for c in &self.crossings {
            out.serialize(c)?;
        }
        if self.crossings.is_empty() {
            out.write_record(["u_lo", "u_hi", "direction", "branch_id"])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn write_curves_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for p in &self.curves {
            out.serialize(p)?;
        }
        if self.curves.is_empty() {
            out.write_record(["u", "branch_id", "lambda"])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

struct Sample {
    u: f64,
    spectrum: Spectrum,
    residual: f64,
}

fn evaluate_samples(path: &dyn OperatorPath, us: &[f64]) -> Result<Vec<Sample>> {
    let one = |&u: &f64| -> Result<Sample> {
        let op = path.evaluate(u)?;
        if op.labels() != path.labels() {
            return Err(Error::DimensionMismatch(format!("labels changed along the path at u = {u}")));
        }
        let spectrum = eig_spectrum(&op)?;
        Ok(Sample { u, spectrum, residual: op.residual() })
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        us.par_iter().map(one).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        us.iter().map(one).collect()
    }
}

fn in_window(a: &Sample, b: &Sample, j: usize, w: f64) -> bool {
    a.spectrum.values()[j].abs() <= w || b.spectrum.values()[j].abs() <= w
}

fn interval_crossings(a: &Sample, b: &Sample, opts: &FlowOptions) -> Vec<Crossing> {
    let (va, vb) = (a.spectrum.values(), b.spectrum.values());
    let mut out = Vec::new();
    for j in 0..va.len() {
        if !in_window(a, b, j, opts.window) {
            continue;
        }
        let (na, nb) = (va[j] < -opts.zero_tol, vb[j] < -opts.zero_tol);
        if na != nb {
            out.push(Crossing { u_lo: a.u, u_hi: b.u, direction: if na { 1 } else { -1 }, branch_id: j });
        }
    }
    out
}

fn needs_refinement(a: &Sample, b: &Sample, opts: &FlowOptions) -> bool {
    let (va, vb) = (a.spectrum.values(), b.spectrum.values());
    let w = opts.window;
    let mut inside = 0usize;
    for j in 0..va.len() {
        if in_window(a, b, j, w) {
            inside += 1;
            if (va[j] - vb[j]).abs() >= w / 4.0 {
                return true;
            }
        }
    }
    let dneg = neg_count(&a.spectrum, opts.zero_tol).negative.abs_diff(neg_count(&b.spectrum, opts.zero_tol).negative);
    if dneg > inside {
        return true;
    }
    dneg > 0 && b.u - a.u > opts.crossing_resolution
}

/// Spectral flow with default tracking options.
pub fn spectral_flow(path: &dyn OperatorPath, zero_tol: f64) -> Result<SpectralFlowResult> {
    spectral_flow_with(path, &FlowOptions { zero_tol, ..FlowOptions::default() })
}

pub fn spectral_flow_with(path: &dyn OperatorPath, opts: &FlowOptions) -> Result<SpectralFlowResult> {
    if !(opts.window > 0.0) || !(opts.zero_tol >= 0.0) {
        return Err(Error::Config("flow window must be positive and zero_tol nonnegative".into()));
    }
    let policy = path.sample_policy();
    let n0 = policy.initial_samples.max(2);
    let us: Vec<f64> = (0..n0).map(|i| i as f64 / (n0 - 1) as f64).collect();
    let mut samples = evaluate_samples(path, &us)?;

    loop {
        let flagged: Vec<(f64, f64)> = samples
            .windows(2)
            .filter(|p| needs_refinement(&p[0], &p[1], opts))
            .map(|p| (p[0].u, p[1].u))
            .collect();
        if flagged.is_empty() {
            break;
        }
        if samples.len() + flagged.len() > policy.max_samples || flagged.iter().any(|(a, b)| b - a < 1e-12) {
            return Err(Error::RefinementExhausted { samples: samples.len() + flagged.len() });
        }
        let mids: Vec<f64> = flagged.iter().map(|(a, b)| 0.5 * (a + b)).collect();
        samples.extend(evaluate_samples(path, &mids)?);
        samples.sort_by(|a, b| a.u.total_cmp(&b.u));
    }

    let first = &samples[0];
    let last = &samples[samples.len() - 1];
    let c0 = neg_count(&first.spectrum, opts.zero_tol);
    let c1 = neg_count(&last.spectrum, opts.zero_tol);
    let flow = c0.negative as i64 - c1.negative as i64;

    let mut crossings = Vec::new();
    for p in samples.windows(2) {
        crossings.extend(interval_crossings(&p[0], &p[1], opts));
    }
    let census_flow = crossings.iter().map(|c| c.direction).sum::<i64>();

    let mut min_gap: Option<f64> = None;
    for s in &samples {
        for (j, &v) in s.spectrum.values().iter().enumerate() {
            if v.abs() > opts.window {
                continue;
            }
            let near_crossing = crossings
                .iter()
                .any(|c| c.branch_id == j && (c.u_lo == s.u || c.u_hi == s.u));
            if near_crossing {
                continue;
            }
            min_gap = Some(min_gap.map_or(v.abs(), |g| g.min(v.abs())));
        }
    }

    let mut warnings = Vec::new();
    if c0.near_kernel > 0 {
        warnings.push(format!("{} near-kernel eigenvalue(s) at u = 0", c0.near_kernel));
    }
    if c1.near_kernel > 0 {
        warnings.push(format!("{} near-kernel eigenvalue(s) at u = 1", c1.near_kernel));
    }
    let inconsistent_census = census_flow != flow;
    if inconsistent_census {
        warnings.push(format!("crossing census gives {census_flow}, counting gives {flow}"));
    }

    let mut curves = Vec::new();
    for s in &samples {
        for (j, &v) in s.spectrum.values().iter().enumerate() {
            if v.abs() <= opts.window {
                curves.push(CurvePoint { u: s.u, branch_id: j, lambda: v });
            }
        }
    }

    Ok(SpectralFlowResult {
        flow,
        census_flow,
        inconsistent_census,
        partition: samples.iter().map(|s| s.u).collect(),
        crossings,
        endpoint_kernel: [c0.near_kernel, c1.near_kernel],
        min_gap,
        max_hermiticity_residual: samples.iter().map(|s| s.residual).fold(0.0, f64::max),
        dim: path.dim(),
        warnings,
        curves,
    })
}

/// Crossings of eigenvalue branches through zero inside `[−w, w]`.
pub fn crossing_census(path: &dyn OperatorPath, window: f64) -> Result<Vec<Crossing>> {
    spectral_flow_with(path, &FlowOptions { window, ..FlowOptions::default() }).map(|r| r.crossings)
}

/// Orthogonal projection onto an eigenspace sum, kept with its range basis.
#[derive(Clone, Debug)]
pub struct Projection {
    matrix: Mat<C64>,
    range: Mat<C64>,
}

impl Projection {
    pub fn matrix(&self) -> MatRef<'_, C64> {
        self.matrix.as_ref()
    }

    /// Orthonormal basis of the range, as columns.
    pub fn range(&self) -> MatRef<'_, C64> {
        self.range.as_ref()
    }

    pub fn rank(&self) -> usize {
        self.range.ncols()
    }

    /// `max(‖P² − P‖, ‖P − P†‖)`, entrywise.
    pub fn defect(&self) -> f64 {
        let p = &self.matrix;
        let sq = (p * p - p).as_ref().norm_max();
        let herm = (p - p.adjoint()).as_ref().norm_max();
        sq.max(herm)
    }
}

/// Projection onto the eigenspaces of `h` with eigenvalue `>= cutoff`.
pub fn spectral_projection(h: &HermitianOperator, cutoff: f64) -> Result<Projection> {
    let (spec, vecs) = eig_decomposition(h)?;
    if let Some(&ev) = spec.values().iter().find(|v| (*v - cutoff).abs() < CUTOFF_TOL) {
        return Err(Error::CutoffOnEigenvalue { cutoff, eigenvalue: ev, tolerance: CUTOFF_TOL });
    }
    let start = spec.values().partition_point(|&v| v < cutoff);
    let range = vecs.subcols(start, h.dim() - start).to_owned();
    let matrix = &range * range.adjoint();
    Ok(Projection { matrix, range })
}

/// Evidence that neither generating operator has spectrum near `±window`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowCertificate {
    pub window: f64,
    /// Smallest distance of any eigenvalue of either operator to `±window`.
    pub clearance: f64,
}

#[derive(Clone, Debug)]
pub struct ProjectionPair {
    pub p: Projection,
    pub q: Projection,
    pub window: f64,
    pub certificate: Option<WindowCertificate>,
}

impl ProjectionPair {
    /// Spectral projections of `hp` and `hq` at `cutoff`, with the window certificate checked.
    pub fn calibrated(hp: &HermitianOperator, hq: &HermitianOperator, cutoff: f64, window: f64) -> Result<Self> {
        if hp.labels() != hq.labels() {
            return Err(Error::DimensionMismatch("projection pair on different spaces".into()));
        }
        let mut clearance = f64::INFINITY;
        for h in [hp, hq] {
            for &v in eig_spectrum(h)?.values() {
                let d = (v.abs() - window).abs();
                if d < WINDOW_BUFFER {
                    return Err(Error::WindowNotCalibrated { eigenvalue: v, edge: window, buffer: WINDOW_BUFFER });
                }
                clearance = clearance.min(d);
            }
        }
        Ok(Self {
            p: spectral_projection(hp, cutoff)?,
            q: spectral_projection(hq, cutoff)?,
            window,
            certificate: Some(WindowCertificate { window, clearance }),
        })
    }
}

/// `[Q − P] = rank Q − rank P`, cross-checked against the kernel dimensions of
/// `P Q : im Q → im P` and its adjoint.
pub fn relative_index(pair: &ProjectionPair) -> Result<i64> {
    let cert = pair.certificate.ok_or(Error::WindowNotCalibrated {
        eigenvalue: f64::NAN,
        edge: pair.window,
        buffer: WINDOW_BUFFER,
    })?;
    if cert.clearance < WINDOW_BUFFER {
        return Err(Error::WindowNotCalibrated { eigenvalue: f64::NAN, edge: cert.window, buffer: WINDOW_BUFFER });
    }
    let by_rank = pair.q.rank() as i64 - pair.p.rank() as i64;
    let by_kernel = kernel_index(pair.p.range(), pair.q.range())?;
    if by_rank != by_kernel {
        return Err(Error::ToeplitzMismatch { classical: by_rank, relative: by_kernel });
    }
    Ok(by_rank)
}

/// `dim ker T − dim ker T†` for `T = U_P† U_Q`.
fn kernel_index(up: MatRef<'_, C64>, uq: MatRef<'_, C64>) -> Result<i64> {
    let (rp, rq) = (up.ncols(), uq.ncols());
    if rp == 0 || rq == 0 {
        return Ok(rq as i64 - rp as i64);
    }
    let t = up.adjoint() * uq;
    let sv = t.as_ref().singular_values().map_err(|_| Error::ConvergenceFailure)?;
    let rank = sv.iter().filter(|&&s| s > 1e-8).count();
    Ok((rq - rank) as i64 - (rp - rank) as i64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToeplitzReport {
    pub winding: i64,
    /// `−winding(det g)`.
    pub classical: i64,
    /// `[gPg⁻¹ − P]` on the internal circle model.
    pub relative: i64,
    pub m_max: usize,
    pub window: f64,
}

/// Toeplitz index of `g` by symbol calculus and by the relative index on a circle model.
pub fn toeplitz_report(g: &TrigPolyGauge) -> Result<ToeplitzReport> {
    let winding = winding_number(g, 1024)?;
    let classical = -winding;
    let d = g.degree();
    let m_max = d + 6;
    let a = Mat::from_fn(1, 1, |_, _| C64::new(0.1, 0.0));
    let b = build_circle_operator(1, g.rank(), m_max, a.as_ref(), Orientation::Positive)?;
    let bg = gauge_conjugate(&b, g)?;
    let window = m_max as f64 - d as f64 - 0.5;
    let pair = ProjectionPair::calibrated(b.operator(), bg.operator(), 0.0, window)?;
    let relative = relative_index(&pair)?;
    if relative != classical {
        return Err(Error::ToeplitzMismatch { classical, relative });
    }
    Ok(ToeplitzReport { winding, classical, relative, m_max, window })
}

pub fn toeplitz_index(g: &TrigPolyGauge) -> Result<i64> {
    toeplitz_report(g).map(|r| r.classical)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::{conjugation_path, LinearPath};
    use crate::lattice::BasisLabel;

    fn scalar(a: f64) -> Mat<C64> {
        Mat::from_fn(1, 1, |_, _| C64::new(a, 0.0))
    }

    fn diag_op(values: &[f64]) -> HermitianOperator {
        let n = values.len();
        HermitianOperator::from_matrix(Mat::from_fn(n, n, |i, j| if i == j { C64::new(values[i], 0.0) } else { C64::new(0.0, 0.0) }))
            .unwrap()
    }

    fn circle_flow(g: &TrigPolyGauge, m_max: usize) -> SpectralFlowResult {
        let b = build_circle_operator(1, g.rank(), m_max, scalar(0.1).as_ref(), Orientation::Positive).unwrap();
        spectral_flow(&conjugation_path(&b, g).unwrap(), DEFAULT_ZERO_TOL).unwrap()
    }

    #[test]
    fn constant_path_has_zero_flow() {
        let h = diag_op(&[-0.5, 0.3, 2.0]);
        let r = spectral_flow(&LinearPath::new(h.clone(), h).unwrap(), DEFAULT_ZERO_TOL).unwrap();
        assert_eq!(r.flow, 0);
        assert!(r.crossings.is_empty());
        assert_eq!(r.partition.len(), 17);
    }

    #[test]
    fn circle_examples() {
        let r = circle_flow(&TrigPolyGauge::scalar_winding(1), 8);
        assert_eq!(r.flow, -1);
        assert!(!r.inconsistent_census);
        assert_eq!(r.crossings.len(), 1);
        let c = r.crossings[0];
        assert_eq!(c.direction, -1);
        // The branch 0.1 − u crosses at u = 0.1.
        assert!(c.u_lo <= 0.1 && 0.1 <= c.u_hi && c.u_hi - c.u_lo <= 1e-3);

        let r = circle_flow(&TrigPolyGauge::scalar_winding(-1), 8);
        assert_eq!(r.flow, 1);
        assert_eq!(r.crossings.len(), 1);
        assert_eq!(r.crossings[0].direction, 1);

        let r = circle_flow(&TrigPolyGauge::diagonal_windings(&[1, 1]), 8);
        assert_eq!(r.flow, -2);
    }

    #[test]
    fn flow_matches_linear_crossing_point() {
        let a = diag_op(&[-1.0, 0.5, 3.0]);
        let b = diag_op(&[2.0, -0.25, 3.0]);
        let r = spectral_flow(&LinearPath::new(a, b).unwrap(), DEFAULT_ZERO_TOL).unwrap();
        assert_eq!(r.flow, 0);
        assert_eq!(r.census_flow, 0);
        assert_eq!(r.crossings.len(), 2);
    }

    #[test]
    fn endpoint_kernel_counts_as_nonnegative() {
        let a = diag_op(&[0.0, 1.0]);
        let b = diag_op(&[-1.0, 1.0]);
        let r = spectral_flow(&LinearPath::new(a, b).unwrap(), DEFAULT_ZERO_TOL).unwrap();
        assert_eq!(r.flow, -1);
        assert_eq!(r.endpoint_kernel, [1, 0]);
        assert!(!r.warnings.is_empty());
    }

    #[test]
    fn large_jumps_force_refinement() {
        let a = diag_op(&[-40.0, 1.0]);
        let b = diag_op(&[40.0, 1.0]);
        let r = spectral_flow(&LinearPath::new(a, b).unwrap(), DEFAULT_ZERO_TOL).unwrap();
        assert_eq!(r.flow, 1);
        assert!(!r.inconsistent_census);
        assert!(r.partition.len() > 17);
    }

    #[test]
    fn csv_columns() {
        let r = circle_flow(&TrigPolyGauge::scalar_winding(1), 4);
        let mut buf = Vec::new();
        r.write_census_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("u_lo,u_hi,direction,branch_id\n"));
        let mut buf = Vec::new();
        r.write_curves_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("u,branch_id,lambda\n"));
    }

    #[test]
    fn projection_examples() {
        let p = spectral_projection(&diag_op(&[-1.0, 1.0]), 0.0).unwrap();
        assert_eq!(p.rank(), 1);
        assert!(p.defect() < 1e-12);

        let b = build_circle_operator(1, 1, 4, scalar(0.0).as_ref(), Orientation::Positive).unwrap();
        assert_eq!(spectral_projection(b.operator(), -0.5).unwrap().rank(), 5);
        assert_eq!(spectral_projection(b.operator(), -100.0).unwrap().rank(), 9);
        assert!(matches!(
            spectral_projection(b.operator(), 1.0),
            Err(Error::CutoffOnEigenvalue { .. })
        ));
    }

    #[test]
    fn relative_index_examples() {
        let b = build_circle_operator(1, 1, 6, scalar(0.1).as_ref(), Orientation::Positive).unwrap();
        let same = ProjectionPair::calibrated(b.operator(), b.operator(), 0.0, 4.5).unwrap();
        assert_eq!(relative_index(&same).unwrap(), 0);

        let g = TrigPolyGauge::scalar_winding(1);
        let bg = gauge_conjugate(&b, &g).unwrap();
        let pair = ProjectionPair::calibrated(b.operator(), bg.operator(), 0.0, 6.0 - 1.0 - 0.5).unwrap();
        assert_eq!(pair.p.rank() as i64 - pair.q.rank() as i64, 1);
        assert_eq!(relative_index(&pair).unwrap(), -1);

        let g = TrigPolyGauge::scalar_winding(-2);
        let bg = gauge_conjugate(&b, &g).unwrap();
        let pair = ProjectionPair::calibrated(b.operator(), bg.operator(), 0.0, 6.0 - 2.0 - 0.5).unwrap();
        assert_eq!(relative_index(&pair).unwrap(), 2);

        let uncalibrated = ProjectionPair { certificate: None, ..same };
        assert!(matches!(relative_index(&uncalibrated), Err(Error::WindowNotCalibrated { .. })));
        assert!(matches!(
            ProjectionPair::calibrated(b.operator(), b.operator(), 0.0, 2.1),
            Err(Error::WindowNotCalibrated { .. })
        ));
    }

    #[test]
    fn toeplitz_examples() {
        assert_eq!(toeplitz_index(&TrigPolyGauge::identity(1)).unwrap(), 0);
        assert_eq!(toeplitz_index(&TrigPolyGauge::scalar_winding(1)).unwrap(), -1);
        assert_eq!(toeplitz_index(&TrigPolyGauge::diagonal_windings(&[1, -1])).unwrap(), 0);
        assert_eq!(toeplitz_index(&TrigPolyGauge::scalar_winding(-2)).unwrap(), 2);
    }

    #[test]
    fn labels_must_stay_constant() {
        struct Shifting(Vec<BasisLabel>);
        impl OperatorPath for Shifting {
            fn labels(&self) -> &[BasisLabel] {
                &self.0
            }
            fn evaluate(&self, u: f64) -> Result<HermitianOperator> {
                let h = diag_op(&[u - 0.5]);
                let label = if u > 0.5 { BasisLabel::boundary(1, 0) } else { BasisLabel::boundary(0, 0) };
                HermitianOperator::new(h.into_matrix(), vec![label])
            }
        }
        let p = Shifting(vec![BasisLabel::boundary(0, 0)]);
        assert!(matches!(spectral_flow(&p, DEFAULT_ZERO_TOL), Err(Error::DimensionMismatch(_))));
    }
}
