//! Laurent-in-λ vector fields and 1-forms on the torus.
//!
//! Coefficients are stored sparsely by power of λ, so all λ-arithmetic is
//! exact. The splitting keeps λ^k with k >= 0 in the plus subalgebra.

use std::collections::BTreeMap;
use std::marker::PhantomData;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{dot, spectral_derivative, Grid, GridFunction};

/// Marker for elements of the loop algebra (vector fields).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Vector;
/// Marker for elements of the dual (1-forms).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Form;

/// Finite Laurent polynomial in λ whose coefficients are component tuples of
/// grid functions (one component per torus dimension).
#[derive(Debug, Serialize)]
#[serde(bound = "")]
pub struct Laurent<K> {
    grid: Grid,
    coeffs: BTreeMap<i32, Vec<GridFunction>>,
    #[serde(skip)]
    _kind: PhantomData<K>,
}

impl<K> Clone for Laurent<K> {
    fn clone(&self) -> Self {
        Self { grid: self.grid, coeffs: self.coeffs.clone(), _kind: PhantomData }
    }
}

impl<K> PartialEq for Laurent<K> {
    fn eq(&self, other: &Self) -> bool {
        self.grid == other.grid && self.coeffs == other.coeffs
    }
}

pub type LaurentVectorField = Laurent<Vector>;
pub type LaurentOneForm = Laurent<Form>;

/// Which half of the splitting a projection keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Half {
    Plus,
    Minus,
}

impl Half {
    /// λ^0 belongs to the plus half.
    pub fn contains(self, power: i32) -> bool {
        match self {
            Half::Plus => power >= 0,
            Half::Minus => power < 0,
        }
    }
}

impl<K> Laurent<K> {
    pub fn zero(grid: Grid) -> Self {
        Self { grid, coeffs: BTreeMap::new(), _kind: PhantomData }
    }

    /// Single term λ^power with the given components.
    pub fn monomial(power: i32, components: Vec<GridFunction>) -> Result<Self> {
        let grid = components
            .first()
            .map(GridFunction::grid)
            .ok_or_else(|| Error::InvalidParameter("no components".into()))?;
        let mut out = Self::zero(grid);
        out.add_term(power, components)?;
        Ok(out)
    }

    /// Builds from `(power, components)` pairs; repeated powers are summed.
    pub fn from_terms(grid: Grid, terms: impl IntoIterator<Item = (i32, Vec<GridFunction>)>) -> Result<Self> {
        let mut out = Self::zero(grid);
        for (p, c) in terms {
            out.add_term(p, c)?;
        }
        Ok(out)
    }

    pub fn add_term(&mut self, power: i32, components: Vec<GridFunction>) -> Result<()> {
        if components.len() != self.grid.dim() {
            return Err(Error::WrongDimension(format!(
                "{} components for a {}-dimensional torus",
                components.len(),
                self.grid.dim()
            )));
        }
        for c in &components {
            if c.grid() != self.grid {
                return Err(Error::GridMismatch("Laurent coefficient on a different grid".into()));
            }
        }
        self.accumulate(power, components);
        Ok(())
    }

    fn accumulate(&mut self, power: i32, components: Vec<GridFunction>) {
        match self.coeffs.get_mut(&power) {
            Some(existing) => {
                for (e, c) in existing.iter_mut().zip(&components) {
                    *e = &*e + c;
                }
            }
            None => {
                self.coeffs.insert(power, components);
            }
        }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn powers(&self) -> impl Iterator<Item = i32> + '_ {
        self.coeffs.keys().copied()
    }

    pub fn coeff(&self, power: i32) -> Option<&[GridFunction]> {
        self.coeffs.get(&power).map(Vec::as_slice)
    }

    /// Coefficient at `power`, or zeros when absent.
    pub fn coeff_or_zero(&self, power: i32) -> Vec<GridFunction> {
        self.coeffs.get(&power).cloned().unwrap_or_else(|| vec![GridFunction::zeros(self.grid); self.grid.dim()])
    }

    pub fn terms(&self) -> impl Iterator<Item = (i32, &[GridFunction])> {
        self.coeffs.iter().map(|(p, c)| (*p, c.as_slice()))
    }

    /// Largest absolute sample over all powers and components.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.values().flatten().map(GridFunction::max_abs).fold(0.0, f64::max)
    }

    pub fn max_abs_at(&self, power: i32) -> f64 {
        self.coeff(power).map_or(0.0, |c| c.iter().map(GridFunction::max_abs).fold(0.0, f64::max))
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map_coeffs(|_, c| c.scale(s))
    }

    /// Multiplies by λ^shift.
    pub fn shift(&self, shift: i32) -> Self {
        Self {
            grid: self.grid,
            coeffs: self.coeffs.iter().map(|(p, c)| (p + shift, c.clone())).collect(),
            _kind: PhantomData,
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (p, c) in &other.coeffs {
            out.accumulate(*p, c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }

    fn map_coeffs(&self, f: impl Fn(i32, &GridFunction) -> GridFunction) -> Self {
        Self {
            grid: self.grid,
            coeffs: self.coeffs.iter().map(|(p, c)| (*p, c.iter().map(|g| f(*p, g)).collect())).collect(),
            _kind: PhantomData,
        }
    }

    fn check_compatible<L>(&self, other: &Laurent<L>) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(format!("{:?} vs {:?}", self.grid, other.grid)));
        }
        Ok(())
    }

    /// Keeps the powers of one half of the splitting.
    pub fn project(&self, half: Half) -> Self {
        Self {
            grid: self.grid,
            coeffs: self.coeffs.iter().filter(|(p, _)| half.contains(**p)).map(|(p, c)| (*p, c.clone())).collect(),
            _kind: PhantomData,
        }
    }

    /// Spatial derivatives of every component, indexed `[axis][component]`.
    fn gradients(&self) -> BTreeMap<i32, Vec<Vec<GridFunction>>> {
        self.coeffs
            .iter()
            .map(|(p, comps)| {
                let d = (0..self.dim())
                    .map(|axis| comps.iter().map(|c| spectral_derivative(c, axis, 1)).collect())
                    .collect();
                (*p, d)
            })
            .collect()
    }
}

/// `P+ - P-` halved: the classical R-matrix of the splitting.
pub fn r_matrix(a: &LaurentVectorField) -> LaurentVectorField {
    a.map_coeffs(|p, c| c.scale(if Half::Plus.contains(p) { 0.5 } else { -0.5 }))
}

/// Lie commutator of vector fields:
/// `[a, b]_j = sum_i (a_i d_i b_j - b_i d_i a_j)`, with λ-powers adding.
pub fn commutator(a: &LaurentVectorField, b: &LaurentVectorField) -> Result<LaurentVectorField> {
    a.check_compatible(b)?;
    let dim = a.dim();
    let da = a.gradients();
    let db = b.gradients();
    let mut out = LaurentVectorField::zero(a.grid);
    for (&p, ap) in &a.coeffs {
        for (&q, bq) in &b.coeffs {
            let comps = (0..dim)
                .map(|j| {
                    let mut acc = GridFunction::zeros(a.grid);
                    for i in 0..dim {
                        acc = &acc + &(&ap[i] * &db[&q][i][j]);
                        acc = &acc - &(&bq[i] * &da[&p][i][j]);
                    }
                    acc
                })
                .collect();
            out.accumulate(p + q, comps);
        }
    }
    Ok(out)
}

/// The R-bracket `[Ra, b] + [a, Rb]`.
pub fn r_bracket(a: &LaurentVectorField, b: &LaurentVectorField) -> Result<LaurentVectorField> {
    commutator(&r_matrix(a), b)?.add(&commutator(a, &r_matrix(b))?)
}

/// Residue pairing at index `p`: the λ^-1 coefficient of `λ^-p (l | a)`, i.e.
/// the sum of `<l_i, a_j>` over power pairs with `i + j = p - 1`.
pub fn residue_pairing(l: &LaurentOneForm, a: &LaurentVectorField, p: i32) -> Result<f64> {
    l.check_compatible(a)?;
    let mut total = 0.0;
    for (&i, li) in &l.coeffs {
        if let Some(aj) = a.coeffs.get(&(p - 1 - i)) {
            total += li.iter().zip(aj).map(|(x, y)| dot(x, y)).sum::<f64>();
        }
    }
    Ok(total)
}

/// Coadjoint action `ad*_a l`, characterised by
/// `(ad*_a l | b) = -(l | [a, b])` for every `b`:
/// `(ad*_a l)_j = sum_i d_i(l_j a_i) + l_i d_j a_i`.
pub fn coadjoint_action(a: &LaurentVectorField, l: &LaurentOneForm) -> Result<LaurentOneForm> {
    a.check_compatible(l)?;
    let dim = a.dim();
    let da = a.gradients();
    let mut out = LaurentOneForm::zero(a.grid);
    for (&p, ap) in &a.coeffs {
        for (&q, lq) in &l.coeffs {
            let comps = (0..dim)
                .map(|j| {
                    let mut acc = GridFunction::zeros(a.grid);
                    for i in 0..dim {
                        acc = &acc + &spectral_derivative(&(&lq[j] * &ap[i]), i, 1);
                        acc = &acc + &(&lq[i] * &da[&p][j][i]);
                    }
                    acc
                })
                .collect();
            out.accumulate(p + q, comps);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{delta_kernel, TWO_PI};
    use crate::sampling::{random_trig, rng};
    use approx::assert_abs_diff_eq;

    fn grid1(n: usize) -> Grid {
        Grid::new_1d(n).unwrap()
    }

    fn random_field(grid: Grid, seed: u64, powers: &[i32]) -> LaurentVectorField {
        let mut r = rng(seed);
        LaurentVectorField::from_terms(
            grid,
            powers.iter().map(|&p| (p, (0..grid.dim()).map(|_| random_trig(grid, &mut r, 4)).collect())),
        )
        .unwrap()
    }

    fn random_form(grid: Grid, seed: u64, powers: &[i32]) -> LaurentOneForm {
        let mut r = rng(seed);
        LaurentOneForm::from_terms(
            grid,
            powers.iter().map(|&p| (p, (0..grid.dim()).map(|_| random_trig(grid, &mut r, 4)).collect())),
        )
        .unwrap()
    }

    #[test]
    fn commutator_of_unit_and_sine() {
        let grid = grid1(32);
        let a = LaurentVectorField::monomial(0, vec![GridFunction::constant(grid, 1.0)]).unwrap();
        let b = LaurentVectorField::monomial(0, vec![GridFunction::from_fn(grid, f64::sin)]).unwrap();
        let c = commutator(&a, &b).unwrap();
        assert!(c.coeff(0).unwrap()[0].sup_distance(&GridFunction::from_fn(grid, f64::cos)) < 1e-13);
    }

    #[test]
    fn commutator_self_vanishes_and_jacobi() {
        for grid in [grid1(32), Grid::new_2d(32, 32).unwrap()] {
            let a = random_field(grid, 1, &[-1, 0, 1]);
            let b = random_field(grid, 2, &[-2, 0]);
            let c = random_field(grid, 3, &[0, 2]);
            assert!(commutator(&a, &a).unwrap().max_abs() < 1e-12);
            let jac = commutator(&a, &commutator(&b, &c).unwrap())
                .unwrap()
                .add(&commutator(&b, &commutator(&c, &a).unwrap()).unwrap())
                .unwrap()
                .add(&commutator(&c, &commutator(&a, &b).unwrap()).unwrap())
                .unwrap();
            assert!(jac.max_abs() < 1e-10, "{}", jac.max_abs());
        }
    }

    #[test]
    fn projection_examples() {
        let grid = grid1(16);
        let ux = GridFunction::from_fn(grid, f64::cos);
        let uy = GridFunction::from_fn(grid, f64::sin);
        let a = LaurentVectorField::from_terms(
            grid,
            [(2, vec![GridFunction::constant(grid, 1.0)]), (1, vec![ux]), (0, vec![-&uy])],
        )
        .unwrap();
        assert_eq!(a.project(Half::Plus), a);
        let m = LaurentVectorField::monomial(-1, vec![GridFunction::from_fn(grid, f64::sin)]).unwrap();
        assert!(m.project(Half::Plus).max_abs() == 0.0);
        let r = random_field(grid, 9, &[-2, -1, 0, 3]);
        assert_eq!(r.project(Half::Plus).add(&r.project(Half::Minus)).unwrap(), r);
    }

    #[test]
    fn r_bracket_on_halves() {
        let grid = grid1(32);
        let a = random_field(grid, 4, &[0, 1]);
        let b = random_field(grid, 5, &[0, 2]);
        let diff = r_bracket(&a, &b).unwrap().sub(&commutator(&a, &b).unwrap()).unwrap();
        assert!(diff.max_abs() < 1e-13);
        let bm = random_field(grid, 6, &[-1, -3]);
        assert!(r_bracket(&a, &bm).unwrap().max_abs() < 1e-13);
    }

    #[test]
    fn r_bracket_jacobi_and_antisymmetry() {
        let grid = grid1(64);
        for seed in 0..5 {
            let a = random_field(grid, 10 + seed, &[-2, -1, 0, 1]);
            let b = random_field(grid, 20 + seed, &[-1, 0, 2]);
            let c = random_field(grid, 30 + seed, &[-3, 0, 1]);
            let ab = r_bracket(&a, &b).unwrap();
            let ba = r_bracket(&b, &a).unwrap();
            assert!(ab.add(&ba).unwrap().max_abs() <= 1e-12 * ab.max_abs().max(1.0));
            let jac = r_bracket(&a, &r_bracket(&b, &c).unwrap())
                .unwrap()
                .add(&r_bracket(&b, &r_bracket(&c, &a).unwrap()).unwrap())
                .unwrap()
                .add(&r_bracket(&c, &r_bracket(&a, &b).unwrap()).unwrap())
                .unwrap();
            assert!(jac.max_abs() < 1e-10, "{}", jac.max_abs());
        }
    }

    #[test]
    fn residue_pairing_examples() {
        let grid = grid1(32);
        let one = GridFunction::constant(grid, 1.0);
        let unit = LaurentVectorField::monomial(0, vec![one.clone()]).unwrap();
        let l = LaurentOneForm::monomial(-1, vec![one.clone()]).unwrap();
        assert_abs_diff_eq!(residue_pairing(&l, &unit, 0).unwrap(), TWO_PI, epsilon = 1e-13);
        let l0 = LaurentOneForm::monomial(0, vec![one.clone()]).unwrap();
        assert_eq!(residue_pairing(&l0, &unit, 0).unwrap(), 0.0);

        let u0 = GridFunction::from_fn(grid, |x| -2.0 * x.cos());
        let seed = LaurentOneForm::from_terms(grid, [(1, vec![one]), (0, vec![u0])]).unwrap();
        let s = grid.node(0, 7);
        let grad = LaurentVectorField::monomial(-1, vec![delta_kernel(&grid, s).unwrap().function]).unwrap();
        assert_abs_diff_eq!(residue_pairing(&seed, &grad, 0).unwrap(), -2.0 * s.cos(), epsilon = 1e-12);
    }

    #[test]
    fn coadjoint_formula_example() {
        let grid = grid1(32);
        let a = LaurentVectorField::monomial(0, vec![GridFunction::from_fn(grid, f64::sin)]).unwrap();
        let l = LaurentOneForm::monomial(0, vec![GridFunction::from_fn(grid, f64::cos)]).unwrap();
        let ad = coadjoint_action(&a, &l).unwrap();
        // f g' + 2 f' g with f = sin, g = cos
        let expected = GridFunction::from_fn(grid, |x| -x.sin() * x.sin() + 2.0 * x.cos() * x.cos());
        assert!(ad.coeff(0).unwrap()[0].sup_distance(&expected) < 1e-12);
        assert_abs_diff_eq!(ad.coeff(0).unwrap()[0].values()[0], 2.0, epsilon = 1e-12);

        let ac = LaurentVectorField::monomial(0, vec![GridFunction::constant(grid, 3.0)]).unwrap();
        let lc = LaurentOneForm::monomial(0, vec![GridFunction::constant(grid, -1.5)]).unwrap();
        assert!(coadjoint_action(&ac, &lc).unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn coadjoint_duality() {
        for (n, dim) in [(32, 1), (64, 1), (16, 2)] {
            let grid = if dim == 1 { grid1(n) } else { Grid::new_2d(n, n).unwrap() };
            for seed in 0..20u64 {
                let a = random_field(grid, 100 + seed, &[-1, 0, 1]);
                let l = random_form(grid, 200 + seed, &[-1, 0, 1]);
                let b = random_field(grid, 300 + seed, &[-2, -1, 0]);
                for p in [-1, 0, 1] {
                    let lhs = residue_pairing(&coadjoint_action(&a, &l).unwrap(), &b, p).unwrap();
                    let rhs = -residue_pairing(&l, &commutator(&a, &b).unwrap(), p).unwrap();
                    let scale = 1.0 + lhs.abs() + rhs.abs();
                    assert!((lhs - rhs).abs() <= 1e-9 * scale, "n={n} dim={dim}: {lhs} vs {rhs}");
                }
            }
        }
    }

    #[test]
    fn coadjoint_reproduces_y_flow() {
        let grid = grid1(64);
        let ux = GridFunction::from_fn(grid, |x| 0.7 * x.sin() + 0.2 * (2.0 * x).cos());
        let uxx = spectral_derivative(&ux, 0, 1);
        let one = GridFunction::constant(grid, 1.0);
        let a = LaurentVectorField::from_terms(grid, [(1, vec![one.clone()]), (0, vec![ux.clone()])]).unwrap();
        let l = LaurentOneForm::from_terms(grid, [(1, vec![one]), (0, vec![ux.scale(-2.0)])]).unwrap();
        let ad = coadjoint_action(&a, &l).unwrap();
        let expected = (&ux * &uxx).scale(-6.0);
        assert!(ad.coeff(0).unwrap()[0].sup_distance(&expected) < 1e-12);
        assert!(ad.max_abs_at(1) < 1e-12 && ad.max_abs_at(2) < 1e-12);
    }

    #[test]
    fn mismatched_grids_are_rejected() {
        let a = random_field(grid1(16), 1, &[0]);
        let b = random_field(grid1(32), 1, &[0]);
        assert!(matches!(commutator(&a, &b), Err(Error::GridMismatch(_))));
        assert!(LaurentVectorField::monomial(0, vec![]).is_err());
        let mut z = LaurentVectorField::zero(grid1(16));
        assert!(z.add_term(0, vec![GridFunction::zeros(grid1(16)); 2]).is_err());
    }
}
