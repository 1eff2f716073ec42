//! Boundary-side quantities: winding numbers, the degree-one odd Chern
//! integral and the rank-weighted winding sums over boundary components.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::boundary::{split_by_f, BoundaryComponentSpec, TrigPolyGauge};
use crate::error::{Error, Result};

pub const MIN_WINDING_SAMPLES: usize = 256;

/// Degree of `θ ↦ det g(θ)` by phase unwrapping on `samples` equispaced points.
pub fn winding_number(g: &TrigPolyGauge, samples: usize) -> Result<i64> {
    if samples < MIN_WINDING_SAMPLES {
        return Err(Error::Config(format!("winding needs at least {MIN_WINDING_SAMPLES} samples, got {samples}")));
    }
    let dets: Vec<_> = (0..samples).map(|j| g.det(2.0 * PI * j as f64 / samples as f64)).collect();
    for (j, d) in dets.iter().enumerate() {
        if d.norm() < 1e-12 {
            return Err(Error::SingularGauge { theta: 2.0 * PI * j as f64 / samples as f64 });
        }
    }
    let mut total = 0.0;
    for j in 0..samples {
        let step = (dets[(j + 1) % samples] / dets[j]).arg();
        if step.abs() >= PI / 2.0 {
            return Err(Error::PhaseJumpTooLarge { jump: step });
        }
        total += step;
    }
    let turns = total / (2.0 * PI);
    if (turns - turns.round()).abs() >= 1e-6 {
        return Err(Error::NonIntegerWinding { turns });
    }
    Ok(turns.round() as i64)
}

/// `(1/2πi)∮ tr(g⁻¹ dg)`, evaluated from the Fourier coefficients as
/// `Σ_m m·‖ĝ(m)‖²_F` (Parseval, using `g⁻¹ = g†`).
pub fn odd_chern_degree1_integral(g: &TrigPolyGauge) -> f64 {
    let d = g.degree() as i32;
    (-d..=d)
        .map(|m| {
            let c = g.coeff(m);
            let norm2: f64 = (0..c.nrows()).flat_map(|i| (0..c.ncols()).map(move |j| (i, j))).map(|(i, j)| c[(i, j)].norm_sqr()).sum();
            m as f64 * norm2
        })
        .sum()
}

#[derive(Clone, Debug)]
pub struct BoundaryData {
    components: Vec<BoundaryComponentSpec>,
}

impl BoundaryData {
    pub fn new(components: Vec<BoundaryComponentSpec>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Config("boundary data needs at least one component".into()));
        }
        Ok(Self { components })
    }

    pub fn components(&self) -> &[BoundaryComponentSpec] {
        &self.components
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentTerms {
    pub sigma: i64,
    pub k: usize,
    pub k_plus: usize,
    pub k_minus: usize,
    pub winding: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormulaRhs {
    /// `−Σ σ_c·k₊(c)·w_c`.
    pub e_plus: i64,
    /// `+Σ σ_c·k₋(c)·w_c`.
    pub e_minus: i64,
    /// `Σ σ_c·k(c)·w_c`; the two versions agree exactly when this vanishes.
    pub total_rank_sum: i64,
    pub agree: bool,
    pub components: Vec<ComponentTerms>,
}

pub fn formula_rhs(bd: &BoundaryData) -> Result<FormulaRhs> {
    let mut terms = Vec::with_capacity(bd.components.len());
    for c in &bd.components {
        let s = split_by_f(&c.f)?;
        terms.push(ComponentTerms {
            sigma: c.orientation.sign_i64(),
            k: c.f.rank(),
            k_plus: s.k_plus,
            k_minus: s.k_minus,
            winding: winding_number(&c.gauge, 1024)?,
        });
    }
    let e_plus = -terms.iter().map(|t| t.sigma * t.k_plus as i64 * t.winding).sum::<i64>();
    let e_minus = terms.iter().map(|t| t.sigma * t.k_minus as i64 * t.winding).sum::<i64>();
    let total_rank_sum = terms.iter().map(|t| t.sigma * t.k as i64 * t.winding).sum::<i64>();
    Ok(FormulaRhs { e_plus, e_minus, total_rank_sum, agree: e_plus == e_minus, components: terms })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::{BoundaryEndomorphism, Orientation};
    use crate::lattice::C64;
    use faer::Mat;
    use proptest::prelude::*;

    fn component(orientation: Orientation, f: &[f64], gauge: TrigPolyGauge) -> BoundaryComponentSpec {
        let k = f.len();
        BoundaryComponentSpec {
            orientation,
            connection: Mat::from_fn(k, k, |i, j| if i == j { C64::new(0.1, 0.0) } else { C64::new(0.0, 0.0) }),
            f: BoundaryEndomorphism::diagonal(f, 0).unwrap(),
            gauge,
        }
    }

    #[test]
    fn winding_examples() {
        assert_eq!(winding_number(&TrigPolyGauge::scalar_winding(1), 256).unwrap(), 1);
        assert_eq!(winding_number(&TrigPolyGauge::diagonal_windings(&[1, 2]), 256).unwrap(), 3);
        let c = TrigPolyGauge::constant(Mat::from_fn(2, 2, |i, j| if i != j { C64::new(0.0, 1.0) } else { C64::new(0.0, 0.0) })).unwrap();
        assert_eq!(winding_number(&c, 256).unwrap(), 0);
        assert!(matches!(winding_number(&c, 100), Err(Error::Config(_))));
        assert!(matches!(
            winding_number(&TrigPolyGauge::scalar_winding(100), 256),
            Err(Error::PhaseJumpTooLarge { .. })
        ));
    }

    #[test]
    fn odd_chern_examples() {
        assert!((odd_chern_degree1_integral(&TrigPolyGauge::scalar_winding(1)) - 1.0).abs() < 1e-12);
        assert!((odd_chern_degree1_integral(&TrigPolyGauge::scalar_winding(-2)) + 2.0).abs() < 1e-12);
        assert_eq!(odd_chern_degree1_integral(&TrigPolyGauge::identity(2)), 0.0);
        for t in [0.0, 0.5, 1.0] {
            let g = TrigPolyGauge::winding_exp_sin(1, t, 12).unwrap();
            assert!((odd_chern_degree1_integral(&g) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn rhs_examples() {
        let g = TrigPolyGauge::scalar_winding(1);
        let bd = BoundaryData::new(vec![
            component(Orientation::Positive, &[1.0, -1.0], g.clone()),
            component(Orientation::Negative, &[1.0, 1.0], g.clone()),
        ])
        .unwrap();
        let r = formula_rhs(&bd).unwrap();
        assert_eq!((r.e_plus, r.e_minus, r.agree, r.total_rank_sum), (1, 1, true, 0));

        let bd = BoundaryData::new(vec![
            component(Orientation::Positive, &[1.0], g.clone()),
            component(Orientation::Negative, &[1.0], g.clone()),
        ])
        .unwrap();
        assert_eq!(formula_rhs(&bd).unwrap().e_plus, 0);

        let g3 = TrigPolyGauge::scalar_winding(3);
        let bd = BoundaryData::new(vec![component(Orientation::Positive, &[-1.0, -1.0], g3)]).unwrap();
        let r = formula_rhs(&bd).unwrap();
        assert_eq!((r.e_plus, r.e_minus, r.agree), (0, 6, false));

        assert!(BoundaryData::new(vec![]).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn winding_is_additive_and_odd(a in proptest::collection::vec(-3i32..=3, 1..3), b in proptest::collection::vec(-3i32..=3, 1..3)) {
            let n = a.len().min(b.len());
            let ga = TrigPolyGauge::diagonal_windings(&a[..n]);
            let gb = TrigPolyGauge::diagonal_windings(&b[..n]);
            let wa = winding_number(&ga, 512).unwrap();
            let wb = winding_number(&gb, 512).unwrap();
            prop_assert_eq!(winding_number(&ga.product(&gb).unwrap(), 512).unwrap(), wa + wb);
            prop_assert_eq!(winding_number(&ga.inverse().unwrap(), 512).unwrap(), -wa);
            prop_assert!((odd_chern_degree1_integral(&ga) - wa as f64).abs() < 1e-9);
        }

        #[test]
        fn rhs_survives_deformation_to_involution(v in 0.0f64..=1.0, f1 in 0.2f64..3.0, f2 in -3.0f64..-0.2) {
            let g = TrigPolyGauge::scalar_winding(1);
            let f = BoundaryEndomorphism::from_real_rows(&[vec![f1, 0.3], vec![0.3, f2]], 0).unwrap();
            let make = |f: BoundaryEndomorphism| {
                let mut c = component(Orientation::Positive, &[1.0, 1.0], g.clone());
                c.f = f;
                BoundaryData::new(vec![c, component(Orientation::Negative, &[1.0, 1.0], g.clone())]).unwrap()
            };
            let base = formula_rhs(&make(f.clone())).unwrap();
            let deformed = formula_rhs(&make(f.deform_to_involution(v).unwrap())).unwrap();
            prop_assert_eq!(base.e_plus, deformed.e_plus);
            prop_assert_eq!(base.e_minus, deformed.e_minus);
        }
    }
}
