use std::fmt;
use std::str::FromStr;

use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::boundary::{BoundaryEndomorphism, TrigPolyGauge};
use crate::cylinder::CylinderConfig;
use crate::error::{Error, Result};
use crate::lattice::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ExperimentId {
    #[serde(rename = "EXP1")]
    Exp1,
    #[serde(rename = "EXP2")]
    Exp2,
    #[serde(rename = "EXP3")]
    Exp3,
    #[serde(rename = "EXP4")]
    Exp4,
    #[serde(rename = "EXP5")]
    Exp5,
    #[serde(rename = "EXP6")]
    Exp6,
    #[serde(rename = "EXP7")]
    Exp7,
    #[serde(rename = "EXP8")]
    Exp8,
    #[serde(rename = "EXP9")]
    Exp9,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 9] = [
        ExperimentId::Exp1,
        ExperimentId::Exp2,
        ExperimentId::Exp3,
        ExperimentId::Exp4,
        ExperimentId::Exp5,
        ExperimentId::Exp6,
        ExperimentId::Exp7,
        ExperimentId::Exp8,
        ExperimentId::Exp9,
    ];

    pub fn number(self) -> usize {
        Self::ALL.iter().position(|&e| e == self).unwrap() + 1
    }

    pub fn geometry(self) -> Geometry {
        match self {
            ExperimentId::Exp2 | ExperimentId::Exp6 | ExperimentId::Exp7 => Geometry::Circle,
            _ => Geometry::Cylinder,
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "EXP{}", self.number())
    }
}

impl FromStr for ExperimentId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let n: usize = s
            .strip_prefix("EXP")
            .or_else(|| s.strip_prefix("exp"))
            .and_then(|d| d.parse().ok())
            .ok_or_else(|| Error::Config(format!("unknown experiment {s:?}")))?;
        Self::ALL.get(n.wrapping_sub(1)).copied().ok_or_else(|| Error::Config(format!("unknown experiment {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Geometry {
    Circle,
    Cylinder,
}

/// Real and optional imaginary parts of a small dense matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixSpec {
    pub re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<Vec<f64>>>,
}

impl MatrixSpec {
    pub fn to_mat(&self) -> Result<Mat<C64>> {
        let n = self.re.len();
        if n == 0 || self.re.iter().any(|r| r.len() != n) {
            return Err(Error::Config("matrix must be square and nonempty".into()));
        }
        if let Some(im) = &self.im {
            if im.len() != n || im.iter().any(|r| r.len() != n) {
                return Err(Error::Config("imaginary part has the wrong shape".into()));
            }
        }
        Ok(Mat::from_fn(n, n, |i, j| {
            C64::new(self.re[i][j], self.im.as_ref().map_or(0.0, |im| im[i][j]))
        }))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FSpec {
    Diagonal(Vec<f64>),
    Matrix(MatrixSpec),
}

impl FSpec {
    pub fn build(&self, component_id: usize) -> Result<BoundaryEndomorphism> {
        match self {
            FSpec::Diagonal(d) => BoundaryEndomorphism::diagonal(d, component_id),
            FSpec::Matrix(m) => BoundaryEndomorphism::new(m.to_mat()?, component_id),
        }
    }

    pub fn rank(&self) -> usize {
        match self {
            FSpec::Diagonal(d) => d.len(),
            FSpec::Matrix(m) => m.re.len(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourierCoeff {
    pub m: i32,
    pub coeff: MatrixSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GaugeSpec {
    /// `diag(e^{i n_1 θ}, …)`.
    Windings(Vec<i32>),
    /// `e^{i w θ}·exp(i t sin θ)` truncated to the given degree.
    WindingExpSin { winding: i32, t: f64, degree: usize },
    Fourier(Vec<FourierCoeff>),
}

impl GaugeSpec {
    pub fn build(&self) -> Result<TrigPolyGauge> {
        match self {
            GaugeSpec::Windings(w) if w.is_empty() => Err(Error::Config("empty winding list".into())),
            GaugeSpec::Windings(w) => Ok(TrigPolyGauge::diagonal_windings(w)),
            GaugeSpec::WindingExpSin { winding, t, degree } => TrigPolyGauge::winding_exp_sin(*winding, *t, *degree),
            GaugeSpec::Fourier(coeffs) => {
                let first = coeffs.first().ok_or_else(|| Error::Config("empty Fourier gauge".into()))?;
                let n = first.coeff.re.len();
                let list = coeffs.iter().map(|c| Ok((c.m, c.coeff.to_mat()?))).collect::<Result<Vec<_>>>()?;
                TrigPolyGauge::new(n, list)
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            GaugeSpec::Windings(w) => {
                let parts: Vec<String> = w.iter().map(|x| x.to_string()).collect();
                format!("windings[{}]", parts.join(","))
            }
            GaugeSpec::WindingExpSin { winding, t, .. } => format!("expsin[w={winding},t={t}]"),
            GaugeSpec::Fourier(c) => format!("fourier[{} terms]", c.len()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EndPair {
    pub f0: FSpec,
    pub fl: FSpec,
}

/// Cylinder geometry; unset fields take the experiment's default.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CylinderOverrides {
    pub length: Option<f64>,
    pub radial_elements: Option<usize>,
    pub m_max: Option<usize>,
    /// Connection `a·I`.
    pub shift: Option<f64>,
    /// Full connection matrix; takes precedence over `shift`.
    pub connection: Option<MatrixSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CylinderSpec {
    pub length: f64,
    pub radial_elements: usize,
    pub m_max: usize,
    pub shift: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub connection: Option<MatrixSpec>,
}

impl CylinderSpec {
    fn merged(&self, o: &CylinderOverrides) -> Self {
        Self {
            length: o.length.unwrap_or(self.length),
            radial_elements: o.radial_elements.unwrap_or(self.radial_elements),
            m_max: o.m_max.unwrap_or(self.m_max),
            shift: o.shift.unwrap_or(self.shift),
            connection: o.connection.clone().or_else(|| self.connection.clone()),
        }
    }

    pub fn connection(&self, k: usize) -> Result<Mat<C64>> {
        match &self.connection {
            Some(m) => {
                let a = m.to_mat()?;
                if a.nrows() != k {
                    return Err(Error::Config(format!("connection is {}x{0}, bundle rank is {k}", a.nrows())));
                }
                Ok(a)
            }
            None => Ok(Mat::from_fn(k, k, |i, j| C64::new(if i == j { self.shift } else { 0.0 }, 0.0))),
        }
    }

    pub fn build(&self, ends: &EndPair, gauge: &GaugeSpec) -> Result<CylinderConfig> {
        let f0 = ends.f0.build(0)?;
        let fl = ends.fl.build(1)?;
        if f0.rank() != fl.rank() {
            return Err(Error::Config("F0 and FL must have the same rank".into()));
        }
        let gauge = gauge.build()?;
        let cfg = CylinderConfig {
            length: self.length,
            radial_elements: self.radial_elements,
            m_max: self.m_max,
            k: f0.rank(),
            n: gauge.rank(),
            connection: self.connection(f0.rank())?,
            f0,
            fl,
            gauge,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CircleSpec {
    pub m_max: usize,
    pub shift: f64,
    /// `+1` or `−1`.
    pub orientation: i64,
}

impl Default for CircleSpec {
    fn default() -> Self {
        Self { m_max: 8, shift: 0.1, orientation: 1 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    pub zero_tol: f64,
    /// Half-width of the eigenvalue tracking window.
    pub flow_window: f64,
    pub relative_error: f64,
    pub ratio_min: f64,
    pub ratio_max: f64,
    /// Number of smallest-modulus eigenvalues compared against the closed form.
    pub eigen_count: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { zero_tol: 1e-8, flow_window: 1.0, relative_error: 1e-2, ratio_min: 3.0, ratio_max: 5.0, eigen_count: 20 }
    }
}

impl Tolerances {
    fn validate(&self) -> Result<()> {
        let positive = [self.zero_tol, self.flow_window, self.relative_error, self.ratio_min, self.ratio_max];
        if positive.iter().any(|v| !(*v > 0.0)) || self.ratio_min > self.ratio_max || self.eigen_count == 0 {
            return Err(Error::Config("tolerances must be positive with ratio_min <= ratio_max".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepRule {
    /// `F0_b = U_b F0 U_b†` with `U_b` a rotation by angle `b` and a seeded random phase.
    RotateF0,
    /// Connection `b·I`.
    ShiftConnection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaseSweep {
    pub rule: SweepRule,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HomotopySpec {
    pub values: Vec<f64>,
    pub winding: i32,
    pub degree: usize,
    pub circle_m_max: usize,
    pub cylinder: CylinderSpec,
    pub ends: EndPair,
}

/// User-facing configuration; everything but `experiment` is optional.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentId,
    #[serde(default)]
    pub geometry: Option<Geometry>,
    #[serde(default)]
    pub cylinder: Option<CylinderOverrides>,
    #[serde(default)]
    pub circle: Option<CircleSpec>,
    #[serde(default)]
    pub gauges: Option<Vec<GaugeSpec>>,
    #[serde(default)]
    pub ends: Option<Vec<EndPair>>,
    #[serde(default)]
    pub lengths: Option<Vec<f64>>,
    #[serde(default)]
    pub resolutions: Option<Vec<usize>>,
    /// Deformation parameters `v` of `F_v = v·F̃ + (1 − v)·F`.
    #[serde(default)]
    pub deformation: Option<Vec<f64>>,
    #[serde(default)]
    pub homotopy: Option<HomotopySpec>,
    #[serde(default)]
    pub base_sweep: Option<Vec<BaseSweep>>,
    #[serde(default)]
    pub tolerances: Option<Tolerances>,
    #[serde(default)]
    pub output: Option<String>,
    #[serde(default)]
    pub seed: Option<u64>,
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentId) -> Self {
        Self {
            experiment,
            geometry: None,
            cylinder: None,
            circle: None,
            gauges: None,
            ends: None,
            lengths: None,
            resolutions: None,
            deformation: None,
            homotopy: None,
            base_sweep: None,
            tolerances: None,
            output: None,
            seed: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid experiment config: {e}")))
    }

    /// Fills every unset field with the experiment's default and validates the result.
    pub fn resolve(&self) -> Result<ResolvedConfig> {
        let d = ResolvedConfig::defaults(self.experiment);
        let geometry = self.geometry.unwrap_or(d.geometry);
        if geometry != d.geometry {
            return Err(Error::Config(format!("{} runs on a {:?} geometry", self.experiment, d.geometry)));
        }
        let r = ResolvedConfig {
            experiment: self.experiment,
            geometry,
            cylinder: self.cylinder.as_ref().map_or(d.cylinder.clone(), |o| d.cylinder.merged(o)),
            circle: self.circle.clone().unwrap_or(d.circle),
            gauges: self.gauges.clone().unwrap_or(d.gauges),
            ends: self.ends.clone().unwrap_or(d.ends),
            lengths: self.lengths.clone().unwrap_or(d.lengths),
            resolutions: self.resolutions.clone().unwrap_or(d.resolutions),
            deformation: self.deformation.clone().unwrap_or(d.deformation),
            homotopy: self.homotopy.clone().unwrap_or(d.homotopy),
            base_sweep: self.base_sweep.clone().unwrap_or(d.base_sweep),
            tolerances: self.tolerances.clone().unwrap_or(d.tolerances),
            seed: self.seed.unwrap_or(d.seed),
        };
        r.validate()?;
        Ok(r)
    }
}

/// Fully populated configuration; this is what gets hashed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResolvedConfig {
    pub experiment: ExperimentId,
    pub geometry: Geometry,
    pub cylinder: CylinderSpec,
    pub circle: CircleSpec,
    pub gauges: Vec<GaugeSpec>,
    pub ends: Vec<EndPair>,
    pub lengths: Vec<f64>,
    pub resolutions: Vec<usize>,
    pub deformation: Vec<f64>,
    pub homotopy: HomotopySpec,
    pub base_sweep: Vec<BaseSweep>,
    pub tolerances: Tolerances,
    pub seed: u64,
}

fn split_ends() -> EndPair {
    EndPair { f0: FSpec::Diagonal(vec![1.0, -1.0]), fl: FSpec::Diagonal(vec![1.0, 1.0]) }
}

fn cyl(length: f64, radial_elements: usize, m_max: usize) -> CylinderSpec {
    CylinderSpec { length, radial_elements, m_max, shift: 0.1, connection: None }
}

impl ResolvedConfig {
    pub fn defaults(id: ExperimentId) -> Self {
        let w = |n: i32| GaugeSpec::Windings(vec![n]);
        let mut r = ResolvedConfig {
            experiment: id,
            geometry: id.geometry(),
            cylinder: cyl(1.0, 48, 4),
            circle: CircleSpec::default(),
            gauges: vec![w(1)],
            ends: vec![split_ends()],
            lengths: vec![],
            resolutions: vec![],
            deformation: vec![],
            homotopy: HomotopySpec {
                values: vec![0.0, 0.5, 1.0],
                winding: 1,
                degree: 12,
                circle_m_max: 14,
                cylinder: cyl(0.125, 16, 14),
                ends: EndPair { f0: FSpec::Diagonal(vec![-1.0]), fl: FSpec::Diagonal(vec![1.0]) },
            },
            base_sweep: vec![],
            tolerances: Tolerances::default(),
            seed: 7,
        };
        match id {
            ExperimentId::Exp1 => {
                r.gauges = vec![w(0)];
                r.ends = vec![EndPair { f0: FSpec::Diagonal(vec![-1.0]), fl: FSpec::Diagonal(vec![1.0]) }];
                r.resolutions = vec![48, 96];
            }
            ExperimentId::Exp2 => {
                r.gauges = vec![w(1), w(-1), w(2), GaugeSpec::Windings(vec![1, 1])];
            }
            ExperimentId::Exp3 => {
                r.gauges = vec![w(1), w(2)];
            }
            ExperimentId::Exp4 => {
                r.lengths = vec![0.5, 1.0, 2.0];
                r.resolutions = vec![48, 96];
            }
            ExperimentId::Exp5 => {
                r.ends = vec![
                    EndPair { f0: FSpec::Diagonal(vec![1.0, 1.0]), fl: FSpec::Diagonal(vec![1.0, 1.0]) },
                    EndPair { f0: FSpec::Diagonal(vec![2.0, 1.0]), fl: FSpec::Diagonal(vec![2.0, 1.0]) },
                ];
            }
            ExperimentId::Exp6 => {
                r.gauges = vec![w(1), w(2), w(-1)];
            }
            ExperimentId::Exp7 => {
                r.gauges = vec![w(1), w(-2), GaugeSpec::Windings(vec![1, -1])];
            }
            ExperimentId::Exp8 => {
                r.cylinder = cyl(0.5, 24, 4);
                r.ends = vec![EndPair {
                    f0: FSpec::Matrix(MatrixSpec { re: vec![vec![0.5, 1.0], vec![1.0, -0.5]], im: None }),
                    fl: FSpec::Diagonal(vec![1.0, 1.0]),
                }];
                r.deformation = vec![0.0, 0.25, 0.5, 0.75, 1.0];
            }
            ExperimentId::Exp9 => {
                r.cylinder = cyl(0.5, 24, 4);
                let angles = (0..8).map(|j| j as f64 * std::f64::consts::PI / 8.0).collect();
                let shifts = (1..=8).map(|j| j as f64 / 10.0).collect();
                r.base_sweep = vec![
                    BaseSweep { rule: SweepRule::RotateF0, values: angles },
                    BaseSweep { rule: SweepRule::ShiftConnection, values: shifts },
                ];
            }
        }
        r
    }

    fn validate(&self) -> Result<()> {
        self.tolerances.validate()?;
        if self.gauges.is_empty() {
            return Err(Error::Config("at least one gauge is required".into()));
        }
        if self.circle.orientation.abs() != 1 {
            return Err(Error::Config("circle orientation must be +1 or -1".into()));
        }
        for g in &self.gauges {
            g.build()?;
        }
        if self.geometry == Geometry::Cylinder {
            if self.ends.is_empty() {
                return Err(Error::Config("cylinder experiments need at least one end pair".into()));
            }
            for e in &self.ends {
                for g in &self.gauges {
                    self.cylinder.build(e, g)?;
                }
            }
        }
        if self.deformation.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::Config("deformation parameters must lie in [0, 1]".into()));
        }
        if self.lengths.iter().any(|l| !(*l > 0.0)) || self.resolutions.iter().any(|&n| n < 8) {
            return Err(Error::Config("lengths must be positive and resolutions at least 8".into()));
        }
        // Every swept fiber must keep F invertible.
        for s in &self.base_sweep {
            self.sweep_fibers(s)?;
        }
        Ok(())
    }

    /// The per-fiber cylinder data of one sweep rule: `(b, end pair, cylinder spec)`.
    pub fn sweep_fibers(&self, sweep: &BaseSweep) -> Result<Vec<(f64, (EndPair, CylinderSpec))>> {
        let base_ends = &self.ends[0];
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut out = Vec::with_capacity(sweep.values.len());
        for &b in &sweep.values {
            match sweep.rule {
                SweepRule::RotateF0 => {
                    let phase: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                    let f0 = base_ends.f0.build(0)?;
                    let k = f0.rank();
                    let u = rotation(k, b, phase);
                    let rotated = f0.rotated(u.as_ref())?;
                    let m = rotated.matrix();
                    let spec = MatrixSpec {
                        re: (0..k).map(|i| (0..k).map(|j| m[(i, j)].re).collect()).collect(),
                        im: Some((0..k).map(|i| (0..k).map(|j| m[(i, j)].im).collect()).collect()),
                    };
                    let ends = EndPair { f0: FSpec::Matrix(spec), fl: base_ends.fl.clone() };
                    ends.f0.build(0)?;
                    out.push((b, (ends, self.cylinder.clone())));
                }
                SweepRule::ShiftConnection => {
                    let mut c = self.cylinder.clone();
                    c.shift = b;
                    c.connection = None;
                    out.push((b, (base_ends.clone(), c)));
                }
            }
        }
        Ok(out)
    }

    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("resolved config serializes");
        hex::encode(Sha256::digest(&canonical))
    }
}

/// Unitary acting as a phase-twisted rotation by `angle` in the first two coordinates.
fn rotation(k: usize, angle: f64, phase: f64) -> Mat<C64> {
    let mut u = Mat::<C64>::identity(k, k);
    if k >= 2 {
        let (s, c) = angle.sin_cos();
        let e = C64::from_polar(1.0, phase);
        u[(0, 0)] = C64::new(c, 0.0);
        u[(0, 1)] = -e * s;
        u[(1, 0)] = e.conj() * s;
        u[(1, 1)] = C64::new(c, 0.0);
    }
    u
}

/// A config file holds one experiment object or an array of them.
pub fn parse_config_file(text: &str) -> Result<Vec<ExperimentConfig>> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::Config(format!("config is not valid JSON: {e}")))?;
    let list = match value {
        serde_json::Value::Array(items) => items,
        other => vec![other],
    };
    list.into_iter()
        .map(|v| serde_json::from_value(v).map_err(|e| Error::Config(format!("invalid experiment config: {e}"))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_round_trip() {
        for id in ExperimentId::ALL {
            assert_eq!(id.to_string().parse::<ExperimentId>().unwrap(), id);
        }
        assert!("EXP10".parse::<ExperimentId>().is_err());
        assert!("EXP0".parse::<ExperimentId>().is_err());
    }

    #[test]
    fn every_default_validates() {
        for id in ExperimentId::ALL {
            ExperimentConfig::new(id).resolve().unwrap();
        }
    }

    #[test]
    fn overrides_and_hash() {
        let c = ExperimentConfig::from_json(r#"{"experiment":"EXP3","cylinder":{"radial_elements":32}}"#).unwrap();
        let r = c.resolve().unwrap();
        assert_eq!(r.cylinder.radial_elements, 32);
        assert_eq!(r.cylinder.length, 1.0);
        assert_ne!(r.hash(), ExperimentConfig::new(ExperimentId::Exp3).resolve().unwrap().hash());
        assert_eq!(r.hash(), c.resolve().unwrap().hash());
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(ExperimentConfig::from_json(r#"{"experiment":"EXP3","bogus":1}"#).is_err());
        let c = ExperimentConfig::from_json(r#"{"experiment":"EXP2","geometry":"cylinder"}"#).unwrap();
        assert!(c.resolve().is_err());
        let c = ExperimentConfig::from_json(r#"{"experiment":"EXP5","ends":[{"f0":{"diagonal":[1.0,0.0]},"fl":{"diagonal":[1.0,1.0]}}]}"#)
            .unwrap();
        assert!(c.resolve().is_err());
        let c = ExperimentConfig::from_json(r#"{"experiment":"EXP1","tolerances":{"relative_error":-1.0}}"#).unwrap();
        assert!(c.resolve().is_err());
    }

    #[test]
    fn rotated_sweep_keeps_the_spectrum_of_f() {
        let r = ExperimentConfig::new(ExperimentId::Exp9).resolve().unwrap();
        let fibers = r.sweep_fibers(&r.base_sweep[0]).unwrap();
        assert_eq!(fibers.len(), 8);
        for (_, (ends, _)) in fibers {
            let f = ends.f0.build(0).unwrap();
            let split = crate::boundary::split_by_f(&f).unwrap();
            assert_eq!((split.k_plus, split.k_minus), (1, 1));
        }
    }
}
