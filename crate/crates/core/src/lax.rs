//! Lax vector-field pairs, their compatibility residuals, the heavenly
//! equation residuals and Casimir defects, evaluated on jets of `u`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::expr::{Expr, Var};
use crate::grid::{spectral_derivative, Grid, GridFunction};
use crate::loop_algebra::{coadjoint_action, commutator, LaurentOneForm, LaurentVectorField};
use crate::report::VerificationReport;
use crate::Case;

/// A derivative multi-index, kept sorted.
pub type JetKey = Vec<Var>;

fn key(vars: &[Var]) -> JetKey {
    let mut k = vars.to_vec();
    k.sort();
    k
}

fn key_name(k: &[Var]) -> String {
    if k.is_empty() {
        return "u".into();
    }
    let suffix: String = k
        .iter()
        .map(|v| match v {
            Var::X1 => '1',
            Var::X2 => '2',
            Var::Y => 'y',
            Var::T => 't',
        })
        .collect();
    format!("u_{suffix}")
}

/// `u` and the partial derivatives a case consumes, sampled at fixed `(y, t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct JetField {
    pub case: Case,
    grid: Grid,
    fields: BTreeMap<JetKey, GridFunction>,
}

use Var::{T, X1, X2, Y};

/// Multi-indices required by each case. In the MP case `X1` is `x`.
pub fn required_keys(case: Case) -> Vec<JetKey> {
    let raw: &[&[Var]] = match case {
        Case::MikhalevPavlov => &[&[], &[X1], &[Y], &[T], &[X1, X1], &[X1, Y], &[X1, T], &[Y, Y]],
        Case::Plebanski => &[
            &[],
            &[X1, X1],
            &[X1, X2],
            &[X2, X2],
            &[X1, T],
            &[X2, Y],
            &[X1, X1, T],
            &[X1, X2, T],
            &[X1, X2, Y],
            &[X2, X2, Y],
        ],
    };
    raw.iter().map(|k| key(k)).collect()
}

impl JetField {
    /// Assembles a jet from explicitly supplied fields. Every required key
    /// must be present and all fields must share the case's grid.
    pub fn from_fields(case: Case, fields: BTreeMap<JetKey, GridFunction>) -> Result<Self> {
        let fields: BTreeMap<JetKey, GridFunction> = fields.into_iter().map(|(k, f)| (key(&k), f)).collect();
        let u = fields.get(&Vec::new()).ok_or_else(|| Error::MissingJet("u".into()))?;
        let grid = u.grid();
        if grid.dim() != case.torus_dim() {
            return Err(Error::WrongDimension(format!(
                "{} jets need a {}-dimensional grid",
                case.name(),
                case.torus_dim()
            )));
        }
        for k in required_keys(case) {
            let f = fields.get(&k).ok_or_else(|| Error::MissingJet(key_name(&k)))?;
            u.ensure_same_grid(f)?;
        }
        Ok(Self { case, grid, fields })
    }

    /// Samples `u` and its exact symbolic derivatives at fixed `(y, t)`.
    pub fn from_expression(case: Case, expr: &Expr, grid: Grid, y: f64, t: f64) -> Result<Self> {
        let mut fields = BTreeMap::new();
        for k in required_keys(case) {
            fields.insert(k.clone(), expr.diff_many(&k).sample(grid, y, t)?);
        }
        Self::from_fields(case, fields)
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn get(&self, vars: &[Var]) -> Result<&GridFunction> {
        let k = key(vars);
        self.fields.get(&k).ok_or_else(|| Error::MissingJet(key_name(&k)))
    }

    /// Replaces (or adds) one jet entry.
    pub fn set(&mut self, vars: &[Var], f: GridFunction) -> Result<()> {
        f.ensure_same_grid(self.fields.get(&Vec::new()).expect("jet holds u"))?;
        self.fields.insert(key(vars), f);
        Ok(())
    }

    pub fn max_abs(&self) -> f64 {
        self.fields.values().fold(0.0f64, |m, f| m.max(f.max_abs()))
    }

    /// Largest relative mismatch between a stored derivative and the spectral
    /// derivative (along a grid axis) of another stored entry.
    pub fn consistency_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for (k, f) in &self.fields {
            for (i, v) in k.iter().enumerate() {
                let axis = match (v, self.case) {
                    (X1, _) => 0,
                    (X2, Case::Plebanski) => 1,
                    _ => continue,
                };
                let mut lower = k.clone();
                lower.remove(i);
                if let Some(g) = self.fields.get(&lower) {
                    let d = spectral_derivative(g, axis, 1);
                    worst = worst.max(d.sup_distance(f) / f.max_abs().max(1.0));
                }
            }
        }
        worst
    }

    /// MP jet with the y-flow `u_y = -(3/2) u_x²` substituted (and
    /// `u_xy = -3 u_x u_xx` accordingly).
    pub fn with_y_flow_substituted(&self) -> Result<Self> {
        if self.case != Case::MikhalevPavlov {
            return Err(Error::InvalidParameter("the y-flow substitution applies to the MP case".into()));
        }
        let ux = self.get(&[X1])?.clone();
        let uxx = self.get(&[X1, X1])?.clone();
        let mut out = self.clone();
        out.set(&[Y], ux.map(|v| -1.5 * v * v))?;
        out.set(&[X1, Y], (&ux * &uxx).scale(-3.0))?;
        Ok(out)
    }
}

/// `∂_t + A(λ)` and `∂_y + B(λ)` together with the time derivatives of their
/// coefficients needed for the compatibility residual.
#[derive(Debug, Clone, PartialEq)]
pub struct LaxPair {
    pub case: Case,
    pub a: LaurentVectorField,
    pub b: LaurentVectorField,
    /// `∂_y A`
    pub a_y: LaurentVectorField,
    /// `∂_t B`
    pub b_t: LaurentVectorField,
}

/// MP: `A = (λ² + λu_x − u_y)∂x`, `B = (λ + u_x)∂x`.
/// Plebański: `A = u22 ∂1 + (λ − u12) ∂2`, `B = (−λ − u12) ∂1 + u11 ∂2`.
pub fn build_pair(jet: &JetField) -> Result<LaxPair> {
    let grid = jet.grid();
    let one = GridFunction::constant(grid, 1.0);
    let zero = GridFunction::zeros(grid);
    let g = |vars: &[Var]| jet.get(vars).cloned();
    let lvf = |terms: Vec<(i32, Vec<GridFunction>)>| LaurentVectorField::from_terms(grid, terms);
    match jet.case {
        Case::MikhalevPavlov => Ok(LaxPair {
            case: jet.case,
            a: lvf(vec![(2, vec![one.clone()]), (1, vec![g(&[X1])?]), (0, vec![g(&[Y])?.scale(-1.0)])])?,
            b: lvf(vec![(1, vec![one]), (0, vec![g(&[X1])?])])?,
            a_y: lvf(vec![(1, vec![g(&[X1, Y])?]), (0, vec![g(&[Y, Y])?.scale(-1.0)])])?,
            b_t: lvf(vec![(0, vec![g(&[X1, T])?])])?,
        }),
        Case::Plebanski => {
            let u12 = g(&[X1, X2])?;
            Ok(LaxPair {
                case: jet.case,
                a: lvf(vec![(1, vec![zero.clone(), one.clone()]), (0, vec![g(&[X2, X2])?, u12.scale(-1.0)])])?,
                b: lvf(vec![(1, vec![one.scale(-1.0), zero]), (0, vec![u12.scale(-1.0), g(&[X1, X1])?])])?,
                a_y: lvf(vec![(0, vec![g(&[X2, X2, Y])?, g(&[X1, X2, Y])?.scale(-1.0)])])?,
                b_t: lvf(vec![(0, vec![g(&[X1, X2, T])?.scale(-1.0), g(&[X1, X1, T])?])])?,
            })
        }
    }
}

/// Coefficients of `[∂_t + A, ∂_y + B] = B_t − A_y + [A, B]` per power of λ.
pub fn compatibility_residual(pair: &LaxPair) -> Result<LaurentVectorField> {
    pair.b_t.sub(&pair.a_y)?.add(&commutator(&pair.a, &pair.b)?)
}

/// MP: `u_xt + u_yy − u_y u_xx + u_x u_xy`;
/// Plebański: `u_tx1 + u_yx2 + u11 u22 − u12²`.
pub fn pde_residual(jet: &JetField) -> Result<GridFunction> {
    let g = |vars: &[Var]| jet.get(vars);
    match jet.case {
        Case::MikhalevPavlov => {
            let lin = g(&[X1, T])? + g(&[Y, Y])?;
            let quad = &(g(&[Y])? * g(&[X1, X1])?) - &(g(&[X1])? * g(&[X1, Y])?);
            Ok(&lin - &quad)
        }
        Case::Plebanski => {
            let lin = g(&[X1, T])? + g(&[X2, Y])?;
            let monge = &(g(&[X1, X1])? * g(&[X2, X2])?) - &(g(&[X1, X2])? * g(&[X1, X2])?);
            Ok(&lin + &monge)
        }
    }
}

/// The λ⁰ coefficient the compatibility residual must equal: `R` for MP and
/// `(−∂₂R, ∂₁R)` for Plebański, where `R` is the heavenly residual.
pub fn expected_lambda0(jet: &JetField) -> Result<Vec<GridFunction>> {
    let r = pde_residual(jet)?;
    Ok(match jet.case {
        Case::MikhalevPavlov => vec![r],
        Case::Plebanski => vec![spectral_derivative(&r, 1, 1).scale(-1.0), spectral_derivative(&r, 0, 1)],
    })
}

fn coefficient_scale(pair: &LaxPair) -> Result<f64> {
    let parts = [pair.b_t.clone(), pair.a_y.clone(), commutator(&pair.a, &pair.b)?];
    Ok(parts.iter().fold(0.0f64, |m, p| m.max(p.max_abs())))
}

/// Off-shell identity: λ⁰ of the compatibility residual equals the
/// heavenly residual (≤ 1e−10·scale) and every other power vanishes
/// (≤ 1e−12·scale). Returns one report for each part.
pub fn equivalence_check(jet: &JetField) -> Result<Vec<VerificationReport>> {
    let pair = build_pair(jet)?;
    let res = compatibility_residual(&pair)?;
    let scale = coefficient_scale(&pair)?.max(f64::MIN_POSITIVE);
    let expected = expected_lambda0(jet)?;
    let got = res.coeff_or_zero(0);
    let lambda0 = got.iter().zip(&expected).fold(0.0f64, |m, (a, b)| m.max(a.sup_distance(b))) / scale;
    let higher = res.powers().filter(|&p| p != 0).fold(0.0f64, |m, p| m.max(res.max_abs_at(p))) / scale;
    let case = jet.case.name();
    Ok(vec![
        VerificationReport::new("lax_equivalence_lambda0", case, lambda0, 1e-10),
        VerificationReport::new("lax_equivalence_other_powers", case, higher, 1e-12),
    ])
}

/// Truncated Casimir gradient and the orders of `ad*_{∇h} l` it controls.
#[derive(Debug, Clone, PartialEq)]
pub struct CasimirDefect {
    pub name: String,
    /// Power of λ → components of `ad*_{∇h} l` at that power.
    pub orders: BTreeMap<i32, Vec<GridFunction>>,
}

impl CasimirDefect {
    pub fn max_abs_at(&self, power: i32) -> f64 {
        self.orders.get(&power).map_or(0.0, |c| c.iter().fold(0.0f64, |m, f| m.max(f.max_abs())))
    }
}

/// The `p = 0` seed written in jet entries:
/// MP `λ − 2u_x`; Plebański `(λ + u11 − u12) dx1 + (λ + u12 − u22) dx2`.
pub fn jet_seed(jet: &JetField) -> Result<LaurentOneForm> {
    let grid = jet.grid();
    let one = GridFunction::constant(grid, 1.0);
    let g = |vars: &[Var]| jet.get(vars);
    match jet.case {
        Case::MikhalevPavlov => LaurentOneForm::from_terms(grid, [(1, vec![one]), (0, vec![g(&[X1])?.scale(-2.0)])]),
        Case::Plebanski => LaurentOneForm::from_terms(
            grid,
            [(1, vec![one.clone(), one]), (0, vec![g(&[X1, X1])? - g(&[X1, X2])?, g(&[X1, X2])? - g(&[X2, X2])?])],
        ),
    }
}

/// `ad*_{∇h} l` for the truncated Casimir gradients, keeping the orders that
/// the truncation determines: MP `∇h = 1 + u_x/λ − u_y/λ²` (orders 1, 0, −1);
/// Plebański `∇h₁ = (0,1) + (u22, −u12)/λ` and `∇h₂ = (−1,0) + (−u12, u11)/λ`
/// (orders 1, 0).
pub fn casimir_defect(jet: &JetField) -> Result<Vec<CasimirDefect>> {
    let grid = jet.grid();
    let seed = jet_seed(jet)?;
    let one = GridFunction::constant(grid, 1.0);
    let zero = GridFunction::zeros(grid);
    let g = |vars: &[Var]| jet.get(vars).cloned();
    let gradients: Vec<(&str, LaurentVectorField, i32)> = match jet.case {
        Case::MikhalevPavlov => vec![(
            "h",
            LaurentVectorField::from_terms(
                grid,
                [(0, vec![one]), (-1, vec![g(&[X1])?]), (-2, vec![g(&[Y])?.scale(-1.0)])],
            )?,
            -1,
        )],
        Case::Plebanski => {
            let u12 = g(&[X1, X2])?;
            vec![
                (
                    "h1",
                    LaurentVectorField::from_terms(
                        grid,
                        [(0, vec![zero.clone(), one.clone()]), (-1, vec![g(&[X2, X2])?, u12.scale(-1.0)])],
                    )?,
                    0,
                ),
                (
                    "h2",
                    LaurentVectorField::from_terms(
                        grid,
                        [(0, vec![one.scale(-1.0), zero]), (-1, vec![u12.scale(-1.0), g(&[X1, X1])?])],
                    )?,
                    0,
                ),
            ]
        }
    };
    gradients
        .into_iter()
        .map(|(name, grad, lowest)| {
            let full = coadjoint_action(&grad, &seed)?;
            let orders = (lowest..=1).map(|p| (p, full.coeff_or_zero(p))).collect();
            Ok(CasimirDefect { name: name.into(), orders })
        })
        .collect()
}
