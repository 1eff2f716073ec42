//! Experiment runner: resolves configurations, executes EXP1–EXP9 and
//! collects assertions, quantities and CSV artifacts into reports.

pub mod config;
pub mod report;

use std::time::Instant;

use faer::Mat;
use serde::Serialize;

pub use config::{ExperimentConfig, ExperimentId, ResolvedConfig};
pub use report::{write_summary, Assertion, ExperimentReport, Table};

use crate::boundary::{
    build_circle_operator, conjugation_path, BoundaryComponentSpec, BundlePart, Orientation, TrigPolyGauge,
};
use crate::cylinder::{build_cylinder_operator, cylinder_path, exact_spectrum_for_config, CylinderConfig};
use crate::error::{Error, Result};
use crate::flow::{spectral_flow_with, toeplitz_report, FlowOptions, SpectralFlowResult};
use crate::invariants::{formula_rhs, winding_number, BoundaryData, FormulaRhs};
use crate::lattice::{eig_spectrum, C64};
use config::{CylinderSpec, EndPair, GaugeSpec, SweepRule};

/// Report under construction plus the options shared by its flow computations.
struct Run {
    report: ExperimentReport,
    opts: FlowOptions,
    flows_checked: usize,
    inconsistent: Vec<String>,
    max_residual: f64,
}

impl Run {
    fn new(cfg: &ResolvedConfig, title: &str) -> Self {
        Self {
            report: ExperimentReport::new(cfg.experiment, title, cfg.hash()),
            opts: FlowOptions { zero_tol: cfg.tolerances.zero_tol, window: cfg.tolerances.flow_window, ..FlowOptions::default() },
            flows_checked: 0,
            inconsistent: Vec::new(),
            max_residual: 0.0,
        }
    }

    fn record(&mut self, name: &str, r: SpectralFlowResult) -> i64 {
        self.flows_checked += 1;
        if r.inconsistent_census {
            self.inconsistent.push(name.to_string());
        }
        self.max_residual = self.max_residual.max(r.max_hermiticity_residual);
        for w in &r.warnings {
            self.report.warnings.push(format!("{name}: {w}"));
        }
        self.report.quantity(format!("flow.{name}"), r.flow);
        self.report.quantity(format!("samples.{name}"), r.partition.len());
        let flow = r.flow;
        self.report.flows.push((name.to_string(), r));
        flow
    }

    fn cylinder_flow(&mut self, name: &str, cfg: &CylinderConfig) -> Result<i64> {
        if let Some(w) = cfg.resolution_warning() {
            self.report.warnings.push(format!("{name}: {w}"));
        }
        let r = spectral_flow_with(&cylinder_path(cfg)?, &self.opts)?;
        Ok(self.record(name, r))
    }

    fn circle_flow(&mut self, name: &str, k: usize, shift: f64, m_max: usize, orientation: Orientation, g: &TrigPolyGauge) -> Result<i64> {
        let a = scalar_connection(k, shift);
        let b = build_circle_operator(k, g.rank(), m_max, a.as_ref(), orientation)?;
        let r = spectral_flow_with(&conjugation_path(&b, g)?, &self.opts)?;
        Ok(self.record(name, r))
    }

    /// Sum of the conjugation-path flows of one bundle part over all components.
    fn boundary_family(&mut self, name: &str, comps: &[BoundaryComponentSpec], part: BundlePart, m_max: usize) -> Result<i64> {
        let mut total = 0;
        for (i, c) in comps.iter().enumerate() {
            let label = format!("{name}.c{i}");
            match c.circle_operator(part, m_max)? {
                Some(b) => {
                    let r = spectral_flow_with(&conjugation_path(&b, &c.gauge)?, &self.opts)?;
                    total += self.record(&label, r);
                }
                None => self.report.quantity(format!("flow.{label}"), 0),
            }
        }
        Ok(total)
    }

    fn finish(mut self, started: Instant) -> ExperimentReport {
        self.report.assert(
            "census agrees with counting on every flow",
            Vec::<String>::new(),
            &self.inconsistent,
            self.inconsistent.is_empty(),
        );
        self.report.quantity("flows_computed", self.flows_checked);
        self.report.quantity("max_hermiticity_residual", self.max_residual);
        self.report.wall_time_s = started.elapsed().as_secs_f64();
        self.report
    }
}

fn scalar_connection(k: usize, shift: f64) -> Mat<C64> {
    Mat::from_fn(k, k, |i, j| C64::new(if i == j { shift } else { 0.0 }, 0.0))
}

fn orientation(sign: i64) -> Orientation {
    if sign < 0 {
        Orientation::Negative
    } else {
        Orientation::Positive
    }
}

/// Unwraps a step result into the report, turning errors into failed assertions.
macro_rules! attempt {
    ($run:expr, $name:expr, $expected:expr, $e:expr) => {
        match $e {
            Ok(v) => Some(v),
            Err(err) => {
                $run.report.assert_error($name, $expected, &err);
                None
            }
        }
    };
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let r = cfg.resolve()?;
    Ok(run_resolved(&r))
}

pub fn run_resolved(r: &ResolvedConfig) -> ExperimentReport {
    let started = Instant::now();
    let report = match r.experiment {
        ExperimentId::Exp1 => exp1(r),
        ExperimentId::Exp2 => exp2(r),
        ExperimentId::Exp3 => exp3(r),
        ExperimentId::Exp4 => exp4(r),
        ExperimentId::Exp5 => exp5(r),
        ExperimentId::Exp6 => exp6(r),
        ExperimentId::Exp7 => exp7(r),
        ExperimentId::Exp8 => exp8(r),
        ExperimentId::Exp9 => exp9(r),
    };
    report.finish(started)
}

#[derive(Serialize)]
struct MatchedEigen {
    exact: f64,
    discrete: f64,
    abs_error: f64,
    rel_error: f64,
}

/// Pairs each of the `count` smallest-modulus exact eigenvalues with the nearest unused discrete one.
fn match_smallest(discrete: &[f64], exact: &[f64], count: usize) -> Vec<MatchedEigen> {
    let mut want = exact.to_vec();
    want.sort_by(|a, b| a.abs().total_cmp(&b.abs()).then(a.total_cmp(b)));
    want.truncate(count);
    let mut used = vec![false; discrete.len()];
    want.into_iter()
        .map(|e| {
            let (idx, d) = discrete
                .iter()
                .enumerate()
                .filter(|(i, _)| !used[*i])
                .min_by(|a, b| (a.1 - e).abs().total_cmp(&(b.1 - e).abs()))
                .map(|(i, &d)| (i, d))
                .expect("discrete spectrum larger than the comparison set");
            used[idx] = true;
            let abs_error = (d - e).abs();
            MatchedEigen { exact: e, discrete: d, abs_error, rel_error: abs_error / e.abs().max(1e-6) }
        })
        .collect()
}

fn exp1(r: &ResolvedConfig) -> Run {
    let mut run = Run::new(r, "discrete cylinder spectrum against the closed form");
    let tol = &r.tolerances;
    let mut per_resolution: Vec<(usize, Vec<MatchedEigen>)> = Vec::new();
    for &nr in &r.resolutions {
        let name = format!("spectrum n_r={nr}");
        let spec = CylinderSpec { radial_elements: nr, ..r.cylinder.clone() };
        let step = (|| -> Result<Vec<MatchedEigen>> {
            let cfg = spec.build(&r.ends[0], &r.gauges[0])?;
            let op = build_cylinder_operator(&cfg, 0.0)?;
            let discrete = eig_spectrum(op.operator())?;
            let mut window = 10.0;
            let exact = loop {
                let e = exact_spectrum_for_config(&cfg, 0.0, window)?;
                if e.len() >= tol.eigen_count || window > 1e4 {
                    break e;
                }
                window *= 2.0;
            };
            Ok(match_smallest(discrete.values(), exact.values(), tol.eigen_count))
        })();
        if let Some(m) = attempt!(run, name.clone(), "spectrum", step) {
            per_resolution.push((nr, m));
        }
    }
    let mut rows = Vec::new();
    for (nr, m) in &per_resolution {
        for (i, e) in m.iter().enumerate() {
            rows.push(vec![
                nr.to_string(),
                i.to_string(),
                format!("{:.15e}", e.exact),
                format!("{:.15e}", e.discrete),
                format!("{:.6e}", e.abs_error),
                format!("{:.6e}", e.rel_error),
            ]);
        }
    }
    run.report.tables.push(Table {
        name: "spectra".into(),
        header: ["n_r", "index", "exact", "discrete", "abs_error", "rel_error"].map(String::from).to_vec(),
        rows,
    });
    if let Some((nr, m)) = per_resolution.first() {
        let worst = m.iter().map(|e| e.rel_error).fold(0.0, f64::max);
        run.report.quantity(format!("max_rel_error.n_r={nr}"), worst);
        run.report.assert(
            format!("{} smallest |λ| within relative error at n_r={nr}", tol.eigen_count),
            format!("< {}", tol.relative_error),
            worst,
            worst < tol.relative_error && m.len() == tol.eigen_count,
        );
    }
    for pair in per_resolution.windows(2) {
        let ((n1, coarse), (n2, fine)) = (&pair[0], &pair[1]);
        let mut ratios = Vec::new();
        let mut exact_modes = 0;
        for (c, f) in coarse.iter().zip(fine) {
            if c.abs_error < 1e-10 * c.exact.abs().max(1.0) {
                exact_modes += 1;
                continue;
            }
            ratios.push(c.abs_error / f.abs_error.max(f64::MIN_POSITIVE));
        }
        let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = ratios.iter().copied().fold(0.0, f64::max);
        run.report.quantity(format!("error_ratio_min.{n1}->{n2}"), lo);
        run.report.quantity(format!("error_ratio_max.{n1}->{n2}"), hi);
        run.report.quantity(format!("exactly_resolved_modes.{n1}"), exact_modes);
        run.report.assert(
            format!("error ratio n_r {n1} -> {n2}"),
            [tol.ratio_min, tol.ratio_max],
            [lo, hi],
            !ratios.is_empty() && lo >= tol.ratio_min && hi <= tol.ratio_max,
        );
    }
    run
}

fn exp2(r: &ResolvedConfig) -> Run {
    let mut run = Run::new(r, "circle flow equals minus the winding");
    let c = &r.circle;
    let k = 1;
    for g in &r.gauges {
        let name = format!("circle {}", g.label());
        let step = (|| -> Result<(i64, i64)> {
            let gauge = g.build()?;
            let w = winding_number(&gauge, 1024)?;
            let flow = run.circle_flow(&name, k, c.shift, c.m_max, orientation(c.orientation), &gauge)?;
            Ok((w, flow))
        })();
        if let Some((w, flow)) = attempt!(run, name.clone(), "flow", step) {
            run.report.assert_eq(format!("{name}: flow = -sigma*k*winding"), -c.orientation * k as i64 * w, flow);
        }
    }
    run
}

fn cylinder_rhs(cfg: &CylinderConfig) -> Result<FormulaRhs> {
    formula_rhs(&BoundaryData::new(cfg.boundary_components().to_vec())?)
}

/// Cylinder flow, the two boundary-family flows and the boundary formula for one configuration.
fn main_identity(run: &mut Run, name: &str, cfg: &CylinderConfig, m_max: usize) {
    let step = (|| -> Result<(i64, i64, i64, FormulaRhs)> {
        let rhs = cylinder_rhs(cfg)?;
        let cyl = run.cylinder_flow(&format!("{name} cylinder"), cfg)?;
        let comps = cfg.boundary_components();
        let plus = run.boundary_family(&format!("{name} Bplus"), &comps, BundlePart::Plus, m_max)?;
        let minus = run.boundary_family(&format!("{name} Bminus"), &comps, BundlePart::Minus, m_max)?;
        Ok((cyl, plus, minus, rhs))
    })();
    if let Some((cyl, plus, minus, rhs)) = attempt!(run, name.to_string(), "flows", step) {
        run.report.quantity(format!("rhs.{name}"), &rhs);
        run.report.assert_eq(format!("{name}: cylinder flow = formula"), rhs.e_plus, cyl);
        run.report.assert_eq(format!("{name}: cylinder flow = B+ family flow"), plus, cyl);
        run.report.assert_eq(format!("{name}: cylinder flow = -(B- family flow)"), -minus, cyl);
    }
}

fn exp3(r: &ResolvedConfig) -> Run {
    let mut run = Run::new(r, "cylinder flow against both boundary families");
    for ends in &r.ends {
        for g in &r.gauges {
            let name = g.label();
            match r.cylinder.build(ends, g) {
                Ok(cfg) => main_identity(&mut run, &name, &cfg, r.circle.m_max),
                Err(e) => run.report.assert_error(name, "valid configuration", &e),
            }
        }
    }
    run
}

fn exp4(r: &ResolvedConfig) -> Run {
    let mut run = Run::new(r, "cylinder flow independent of length and resolution");
    let g = &r.gauges[0];
    let mut flows = Vec::new();
    let mut expected = None;
    for &length in &r.lengths {
        for &nr in &r.resolutions {
            let name = format!("L={length} n_r={nr}");
            let spec = CylinderSpec { length, radial_elements: nr, ..r.cylinder.clone() };
            let step = (|| -> Result<(i64, i64)> {
                let cfg = spec.build(&r.ends[0], g)?;
                let rhs = cylinder_rhs(&cfg)?.e_plus;
                Ok((run.cylinder_flow(&name, &cfg)?, rhs))
            })();
            if let Some((f, rhs)) = attempt!(run, name, "flow", step) {
                flows.push(f);
                expected.get_or_insert(rhs);
            }
        }
    }
    let all_same = !flows.is_empty() && flows.iter().all(|&f| Some(f) == expected);
    run.report.assert("all runs return the same flow", expected, &flows, all_same && flows.len() == r.lengths.len() * r.resolutions.len());
    run
}

fn exp5(r: &ResolvedConfig) -> Run {
    let mut run = Run::new(r, "positive boundary endomorphisms give zero flow");
    for ends in &r.ends {
        for g in &r.gauges {
            let name = format!("{:?}/{:?} {}", ends.f0, ends.fl, g.label());
            let step = (|| -> Result<(i64, FormulaRhs)> {
                let cfg = r.cylinder.build(ends, g)?;
                Ok((run.cylinder_flow(&name, &cfg)?, cylinder_rhs(&cfg)?))
            })();
            if let Some((flow, rhs)) = attempt!(run, name.clone(), 0, step) {
                run.report.assert_eq(format!("{name}: flow"), 0, flow);
                run.report.assert_eq(format!("{name}: formula"), 0, rhs.e_plus);
            }
        }
    }
    run
}

fn exp6(r: &ResolvedConfig) -> Run {
    let mut run = Run::new(r, "boundary of a cylinder carries no total flow");
    let ends = &r.ends[0];
    for g in &r.gauges {
        let name = g.label();
        let step = (|| -> Result<(i64, FormulaRhs)> {
            let gauge = g.build()?;
            let comps: Vec<BoundaryComponentSpec> = [(&ends.f0, Orientation::Positive, 0), (&ends.fl, Orientation::Negative, 1)]
                .into_iter()
                .map(|(f, o, id)| {
                    let f = f.build(id)?;
                    Ok(BoundaryComponentSpec {
                        orientation: o,
                        connection: scalar_connection(f.rank(), r.circle.shift),
                        f,
                        gauge: gauge.clone(),
                    })
                })
                .collect::<Result<_>>()?;
            let total = run.boundary_family(&format!("{name} full"), &comps, BundlePart::Full, r.circle.m_max)?;
            Ok((total, formula_rhs(&BoundaryData::new(comps)?)?))
        })();
        if let Some((total, rhs)) = attempt!(run, name.clone(), 0, step) {
            run.report.quantity(format!("rhs.{name}"), &rhs);
            run.report.assert_eq(format!("{name}: total boundary flow"), 0, total);
            run.report.assert_eq(format!("{name}: rank-weighted winding sum"), 0, rhs.total_rank_sum);
            run.report.assert(format!("{name}: E+ and E- formulas agree"), rhs.e_plus, rhs.e_minus, rhs.agree);
        }
    }
    run
}

fn exp7(r: &ResolvedConfig) -> Run {
    let mut run = Run::new(r, "Toeplitz index, relative index and spectral flow");
    for g in &r.gauges {
        let name = g.label();
        let step = (|| -> Result<(i64, i64, i64, i64)> {
            let gauge = g.build()?;
            let t = toeplitz_report(&gauge)?;
            let m_max = r.circle.m_max.max(gauge.degree() + 2);
            let flow = run.circle_flow(&format!("{name} conjugation"), 1, r.circle.shift, m_max, Orientation::Positive, &gauge)?;
            Ok((t.winding, t.classical, t.relative, flow))
        })();
        if let Some((w, classical, relative, flow)) = attempt!(run, name.clone(), -1, step) {
            run.report.assert_eq(format!("{name}: toeplitz index = -winding"), -w, classical);
            run.report.assert_eq(format!("{name}: relative index = toeplitz index"), classical, relative);
            run.report.assert_eq(format!("{name}: spectral flow = toeplitz index"), classical, flow);
        }
    }
    run
}

fn exp8(r: &ResolvedConfig) -> Run {
    let mut run = Run::new(r, "homotopy invariance in F and in the gauge");
    let g = &r.gauges[0];
    let ends = &r.ends[0];
    let mut flows = Vec::new();
    let mut rhs_values = Vec::new();
    for &v in &r.deformation {
        let name = format!("F_v v={v}");
        let step = (|| -> Result<(i64, i64)> {
            let mut cfg = r.cylinder.build(ends, g)?;
            cfg.f0 = cfg.f0.deform_to_involution(v)?;
            let rhs = cylinder_rhs(&cfg)?.e_plus;
            Ok((run.cylinder_flow(&name, &cfg)?, rhs))
        })();
        if let Some((f, rhs)) = attempt!(run, name, "flow", step) {
            flows.push(f);
            rhs_values.push(rhs);
        }
    }
    let constant = flows.len() == r.deformation.len() && flows.windows(2).all(|w| w[0] == w[1]);
    run.report.assert("flow constant along F_v", flows.first(), &flows, constant);
    run.report.assert("flow equals formula along F_v", &rhs_values, &flows, rhs_values == flows);

    let h = &r.homotopy;
    let mut circle_flows = Vec::new();
    let mut cyl_flows = Vec::new();
    for &t in &h.values {
        let spec = GaugeSpec::WindingExpSin { winding: h.winding, t, degree: h.degree };
        let name = format!("g_t t={t}");
        let step = (|| -> Result<(i64, i64)> {
            let gauge = spec.build()?;
            let c = run.circle_flow(&format!("{name} circle"), 1, r.circle.shift, h.circle_m_max, Orientation::Positive, &gauge)?;
            let cfg = h.cylinder.build(&h.ends, &spec)?;
            Ok((c, run.cylinder_flow(&format!("{name} cylinder"), &cfg)?))
        })();
        if let Some((c, y)) = attempt!(run, name, "flow", step) {
            circle_flows.push(c);
            cyl_flows.push(y);
        }
    }
    let n = h.values.len();
    let expected_circle = -(h.winding as i64);
    run.report.assert(
        "circle flow constant along g_t",
        vec![expected_circle; n],
        &circle_flows,
        circle_flows == vec![expected_circle; n],
    );
    let cyl_constant = cyl_flows.len() == n && cyl_flows.windows(2).all(|w| w[0] == w[1]);
    run.report.assert("cylinder flow constant along g_t", cyl_flows.first(), &cyl_flows, cyl_constant);
    run
}

/// One fiber of a base sweep: cylinder flow and formula.
#[derive(Clone, Debug, Serialize)]
pub struct FiberResult {
    pub rule: SweepRule,
    pub b: f64,
    pub flow: i64,
    pub rhs: i64,
}

fn sweep_fibers_into(run: &mut Run, r: &ResolvedConfig) -> Vec<FiberResult> {
    let mut out = Vec::new();
    let g = &r.gauges[0];
    let sweeps: Vec<(Option<SweepRule>, Vec<(f64, (EndPair, CylinderSpec))>)> = if r.base_sweep.is_empty() {
        vec![(None, vec![(0.0, (r.ends[0].clone(), r.cylinder.clone()))])]
    } else {
        r.base_sweep
            .iter()
            .map(|s| (Some(s.rule), r.sweep_fibers(s).unwrap_or_default()))
            .collect()
    };
    for (rule, fibers) in sweeps {
        for (b, (ends, spec)) in fibers {
            let name = match rule {
                Some(rule) => format!("{rule:?} b={b:.4}"),
                None => "base".to_string(),
            };
            let step = (|| -> Result<(i64, i64)> {
                let cfg = spec.build(&ends, g)?;
                let rhs = cylinder_rhs(&cfg)?.e_plus;
                Ok((run.cylinder_flow(&name, &cfg)?, rhs))
            })();
            if let Some((flow, rhs)) = attempt!(run, name.clone(), "flow", step) {
                run.report.assert_eq(format!("{name}: flow = formula"), rhs, flow);
                out.push(FiberResult { rule: rule.unwrap_or(SweepRule::ShiftConnection), b, flow, rhs });
            }
        }
    }
    out
}

fn constancy(run: &mut Run, fibers: &[FiberResult], expected_count: usize) {
    let flows: Vec<i64> = fibers.iter().map(|f| f.flow).collect();
    let ok = flows.len() == expected_count && flows.windows(2).all(|w| w[0] == w[1]);
    run.report.quantity("fibers", fibers);
    run.report.assert("fiberwise flow constant over the base", flows.first(), &flows, ok);
}

fn exp9(r: &ResolvedConfig) -> Run {
    let mut run = Run::new(r, "fiberwise flow over a sampled base");
    let fibers = sweep_fibers_into(&mut run, r);
    let expected = r.base_sweep.iter().map(|s| s.values.len()).sum::<usize>().max(1);
    constancy(&mut run, &fibers, expected);
    run
}

#[derive(Clone, Debug)]
pub struct SweepReport {
    /// One report per sampled fiber.
    pub fibers: Vec<ExperimentReport>,
    /// The constancy assertion over all fibers.
    pub summary: ExperimentReport,
}

impl SweepReport {
    pub fn passed(&self) -> bool {
        self.summary.passed && self.fibers.iter().all(|f| f.passed)
    }
}

/// Runs each base sample as its own report, then checks constancy across them.
pub fn sweep_base(cfg: &ExperimentConfig) -> Result<SweepReport> {
    let r = cfg.resolve()?;
    if r.geometry != config::Geometry::Cylinder {
        return Err(Error::Config("base sweeps run on cylinder experiments".into()));
    }
    let started = Instant::now();
    let mut fibers = Vec::new();
    let mut results = Vec::new();
    let lists: Vec<config::BaseSweep> = if r.base_sweep.is_empty() { Vec::new() } else { r.base_sweep.clone() };
    if lists.is_empty() {
        let mut run = Run::new(&r, "base fiber");
        results.extend(sweep_fibers_into(&mut run, &r));
        fibers.push(run.finish(started));
    } else {
        for s in &lists {
            for (b, _) in r.sweep_fibers(s)? {
                let single = ResolvedConfig {
                    base_sweep: vec![config::BaseSweep { rule: s.rule, values: vec![b] }],
                    ..r.clone()
                };
                let t = Instant::now();
                let mut run = Run::new(&single, &format!("fiber {:?} b={b:.4}", s.rule));
                results.extend(sweep_fibers_into(&mut run, &single));
                fibers.push(run.finish(t));
            }
        }
    }
    let mut summary = Run::new(&r, "sweep constancy");
    let expected = lists.iter().map(|s| s.values.len()).sum::<usize>().max(1);
    constancy(&mut summary, &results, expected);
    Ok(SweepReport { fibers, summary: summary.finish(started) })
}
