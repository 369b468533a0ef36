//! Seed elements, coordinate gradients and Lie–Poisson bracket kernels for
//! the Mikhalev–Pavlov (1-torus) and Plebański (2-torus) cases.
//!
//! Brackets of coordinate functionals are evaluated through the loop algebra:
//! `{u0(t1), u0(t2)}_p = (l_p | [grad u0(t1), grad u0(t2)]_R)_0`, with δ and
//! Heaviside distributions replaced by the discrete [`delta_kernel`] and
//! [`green_kernel`]. The closed forms are evaluated with the same discrete
//! kernels, so numeric and closed-form tables are directly comparable.

use std::collections::BTreeSet;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{antiderivative_matrix, delta_kernel, green_kernel, spectral_derivative, Grid, GridFunction, TWO_PI};
use crate::loop_algebra::{r_bracket, residue_pairing, LaurentOneForm, LaurentVectorField};
use crate::Case;

/// A point of the dual space generating the bracket of index `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedElement {
    pub case: Case,
    pub p: i32,
    pub base: GridFunction,
    pub form: LaurentOneForm,
}

impl SeedElement {
    /// The coordinate field `u0`: `-2 u_x` (MP) or `u_x1 - u_x2` (Plebański).
    pub fn coordinate_field(&self) -> GridFunction {
        coordinate_field(self.case, &self.base)
    }
}

fn coordinate_field(case: Case, u: &GridFunction) -> GridFunction {
    match case {
        Case::MikhalevPavlov => spectral_derivative(u, 0, 1).scale(-2.0),
        Case::Plebanski => &spectral_derivative(u, 0, 1) - &spectral_derivative(u, 1, 1),
    }
}

fn check_case_grid(case: Case, grid: &Grid) -> Result<()> {
    if grid.dim() != case.torus_dim() {
        return Err(Error::WrongDimension(format!(
            "{} needs a {}-dimensional grid, got {}",
            case.name(),
            case.torus_dim(),
            grid.dim()
        )));
    }
    Ok(())
}

/// Assembles `λ^p (λ + u0) dx` (MP) or
/// `λ^p (λ + u0_x1) dx1 + λ^p (λ + u0_x2) dx2` (Plebański).
pub fn make_seed(case: Case, p: i32, u: &GridFunction) -> Result<SeedElement> {
    let grid = u.grid();
    check_case_grid(case, &grid)?;
    let one = GridFunction::constant(grid, 1.0);
    let u0 = coordinate_field(case, u);
    let form = match case {
        Case::MikhalevPavlov => LaurentOneForm::from_terms(grid, [(p + 1, vec![one]), (p, vec![u0])])?,
        Case::Plebanski => LaurentOneForm::from_terms(
            grid,
            [
                (p + 1, vec![one.clone(), one]),
                (p, vec![spectral_derivative(&u0, 0, 1), spectral_derivative(&u0, 1, 1)]),
            ],
        )?,
    };
    Ok(SeedElement { case, p, base: u.clone(), form })
}

fn check_samples(seed: &SeedElement, samples: &[f64]) -> Result<()> {
    if samples.len() != seed.case.torus_dim() {
        return Err(Error::InvalidParameter(format!(
            "{} sample coordinates given, {} expected",
            samples.len(),
            seed.case.torus_dim()
        )));
    }
    Ok(())
}

/// Discrete gradient of the coordinate functional `u0(samples)` at the seed.
///
/// MP: `λ^-(p+1) δ(x - s1) ∂x`. Plebański, `p = 0`: the symmetric form
/// `-(1/2λ) (θ(x1-s1)δ(x2-s2) ∂x1 + δ(x1-s1)θ(x2-s2) ∂x2)`; other `p`:
/// `λ^-(p+1) θ(s1-x1) δ(s2-x2) ∂x1`.
pub fn coordinate_gradient(seed: &SeedElement, samples: &[f64]) -> Result<LaurentVectorField> {
    check_samples(seed, samples)?;
    let grid = seed.base.grid();
    let power = -(seed.p + 1);
    match seed.case {
        Case::MikhalevPavlov => {
            let delta = delta_kernel(&grid, samples[0])?.function;
            LaurentVectorField::monomial(power, vec![delta])
        }
        Case::Plebanski => {
            let (g1, g2) = (grid.axis_grid(0), grid.axis_grid(1));
            if seed.p == 0 {
                let a = GridFunction::outer(
                    &green_kernel(&g1, samples[0])?.function,
                    &delta_kernel(&g2, samples[1])?.function,
                )?;
                let b = GridFunction::outer(
                    &delta_kernel(&g1, samples[0])?.function,
                    &green_kernel(&g2, samples[1])?.function,
                )?;
                LaurentVectorField::monomial(-1, vec![a.scale(-0.5), b.scale(-0.5)])
            } else {
                // θ(s1 - x1) = -G(x1 - s1) for the odd periodic sawtooth
                let theta = green_kernel(&g1, samples[0])?.function.scale(-1.0);
                let a = GridFunction::outer(&theta, &delta_kernel(&g2, samples[1])?.function)?;
                LaurentVectorField::monomial(power, vec![a, GridFunction::zeros(grid)])
            }
        }
    }
}

/// `(l_p | grad u0(samples))_0`, which reproduces `u0(samples)` (up to the
/// zero-mean convention in the Plebański case).
pub fn evaluate_coordinate(seed: &SeedElement, samples: &[f64]) -> Result<f64> {
    residue_pairing(&seed.form, &coordinate_gradient(seed, samples)?, 0)
}

/// Numerically evaluated bracket `(l_p | [grad u0(t1), grad u0(t2)]_R)_0`,
/// defined for every `p`.
pub fn lie_poisson_bracket(seed: &SeedElement, t1: &[f64], t2: &[f64]) -> Result<f64> {
    let a = coordinate_gradient(seed, t1)?;
    let b = coordinate_gradient(seed, t2)?;
    residue_pairing(&seed.form, &r_bracket(&a, &b)?, 0)
}

/// Powers for which the coordinate bracket does not vanish identically.
pub fn vanishing_powers(_seed: &SeedElement) -> BTreeSet<i32> {
    [-1, 0].into_iter().collect()
}

/// Discrete `δ'(s1 - s2)`: the derivative of the delta centred at `s2`,
/// read off at the node nearest `s1`.
fn delta_prime(grid: &Grid, s1: f64, s2: f64) -> Result<f64> {
    let d = spectral_derivative(&delta_kernel(grid, s2)?.function, 0, 1);
    Ok(d.values()[grid.nearest_node(0, s1)?])
}

fn sample_value(f: &GridFunction, samples: &[f64]) -> Result<f64> {
    let g = f.grid();
    let i = g.nearest_node(0, samples[0])?;
    let j = if g.dim() == 2 { g.nearest_node(1, samples[1])? } else { 0 };
    Ok(f.at(i, j))
}

/// Closed-form kernel for the pair, or `None` where no closed form applies
/// (Plebański `p = 0`).
///
/// * MP, `p = 0`: `-2 δ'(s1 - s2)`;
/// * MP, `p = -1`: `δ'(s1 - s2) (u0(s1) + u0(s2))`;
/// * Plebański, `p = -1`: `[u0_x1(s1,s2) + u0_x1(s3,s4)] θ(s3-s1) δ(s4-s2)`,
///   plus the term `(u0(s1,s2) - u0(s3,s4)) δ(s4-s2) / 2pi` that the periodic
///   Heaviside picks up from `θ' = δ - 1/2pi`.
pub fn closed_form_kernel(seed: &SeedElement, t1: &[f64], t2: &[f64]) -> Result<Option<f64>> {
    check_samples(seed, t1)?;
    check_samples(seed, t2)?;
    let grid = seed.base.grid();
    let u0 = seed.coordinate_field();
    match (seed.case, seed.p) {
        (Case::MikhalevPavlov, 0) => Ok(Some(-2.0 * delta_prime(&grid, t1[0], t2[0])?)),
        (Case::MikhalevPavlov, -1) => {
            let dp = delta_prime(&grid, t1[0], t2[0])?;
            Ok(Some(dp * (sample_value(&u0, t1)? + sample_value(&u0, t2)?)))
        }
        (Case::Plebanski, -1) => {
            let (g1, g2) = (grid.axis_grid(0), grid.axis_grid(1));
            let u0_x1 = spectral_derivative(&u0, 0, 1);
            let theta31 = green_kernel(&g1, t1[0])?.function.values()[g1.nearest_node(0, t2[0])?];
            let delta42 = delta_kernel(&g2, t1[1])?.function.values()[g2.nearest_node(0, t2[1])?];
            let main = (sample_value(&u0_x1, t1)? + sample_value(&u0_x1, t2)?) * theta31 * delta42;
            let zero_mode = (sample_value(&u0, t1)? - sample_value(&u0, t2)?) * delta42 / TWO_PI;
            Ok(Some(main + zero_mode))
        }
        (_, 0) => Ok(None),
        (_, p) => Err(Error::UnsupportedPower(p)),
    }
}

/// A table of bracket values over sample pairs, with the matching closed form.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BracketKernel {
    pub case: Case,
    pub p: i32,
    pub pairs: Vec<(Vec<f64>, Vec<f64>)>,
    pub numeric: Vec<f64>,
    pub closed_form: Option<Vec<f64>>,
}

impl BracketKernel {
    /// Largest closed-form magnitude (numeric if there is no closed form).
    pub fn scale(&self) -> f64 {
        let reference = self.closed_form.as_ref().unwrap_or(&self.numeric);
        reference.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// `max |numeric - closed| / scale`, if a closed form exists.
    pub fn relative_defect(&self) -> Option<f64> {
        let closed = self.closed_form.as_ref()?;
        let worst = self.numeric.iter().zip(closed).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        Some(worst / self.scale().max(f64::MIN_POSITIVE))
    }

    pub fn max_abs(&self) -> f64 {
        self.numeric.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Bracket kernel for a single pair of sample tuples; `p` must be 0 or -1.
pub fn bracket_kernel(seed: &SeedElement, t1: &[f64], t2: &[f64]) -> Result<BracketKernel> {
    kernel_table(seed, &[(t1.to_vec(), t2.to_vec())])
}

/// Bracket kernel over many pairs (evaluated in parallel, order preserved).
pub fn kernel_table(seed: &SeedElement, pairs: &[(Vec<f64>, Vec<f64>)]) -> Result<BracketKernel> {
    if !vanishing_powers(seed).contains(&seed.p) {
        return Err(Error::UnsupportedPower(seed.p));
    }
    let rows: Vec<(f64, Option<f64>)> = pairs
        .par_iter()
        .map(|(a, b)| Ok((lie_poisson_bracket(seed, a, b)?, closed_form_kernel(seed, a, b)?)))
        .collect::<Result<_>>()?;
    let numeric = rows.iter().map(|r| r.0).collect();
    let closed_form = rows.iter().map(|r| r.1).collect::<Option<Vec<f64>>>();
    Ok(BracketKernel { case: seed.case, p: seed.p, pairs: pairs.to_vec(), numeric, closed_form })
}

/// Largest swap-antisymmetry defect `|K(t1,t2) + K(t2,t1)|` over the pairs,
/// relative to the largest bracket value.
pub fn antisymmetry_defect(seed: &SeedElement, pairs: &[(Vec<f64>, Vec<f64>)]) -> Result<f64> {
    let vals: Vec<(f64, f64)> = pairs
        .par_iter()
        .map(|(a, b)| Ok((lie_poisson_bracket(seed, a, b)?, lie_poisson_bracket(seed, b, a)?)))
        .collect::<Result<_>>()?;
    let scale = vals.iter().fold(0.0f64, |m, (x, _)| m.max(x.abs())).max(f64::MIN_POSITIVE);
    Ok(vals.iter().fold(0.0f64, |m, (x, y)| m.max((x + y).abs())) / scale)
}

/// Largest bracket magnitude over the pairs for any `p`, relative to the
/// natural kernel scale `max(1, |u0|) / h^2`. Vanishes for `p` outside
/// [`vanishing_powers`].
pub fn vanishing_defect(seed: &SeedElement, pairs: &[(Vec<f64>, Vec<f64>)]) -> Result<f64> {
    let grid = seed.base.grid();
    let h = grid.spacing(0);
    let scale = seed.coordinate_field().max_abs().max(1.0) / (h * h);
    let worst = pairs
        .par_iter()
        .map(|(a, b)| lie_poisson_bracket(seed, a, b).map(f64::abs))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok(worst / scale)
}

/// Standard sample pairs: a few anchor nodes against every node of the
/// (first) axis. In the Plebański case the second coordinates coincide.
pub fn standard_pairs(case: Case, grid: &Grid) -> Vec<(Vec<f64>, Vec<f64>)> {
    let n = grid.size(0);
    let anchors = [n / 8, n / 3, n / 2 + 1, 7 * n / 8];
    let mut pairs = Vec::new();
    for &a in &anchors {
        for j in 0..n {
            let (s1, s3) = (grid.node(0, a), grid.node(0, j));
            match case {
                Case::MikhalevPavlov => pairs.push((vec![s1], vec![s3])),
                Case::Plebanski => {
                    let s2 = grid.node(1, grid.size(1) / 4);
                    pairs.push((vec![s1, s2], vec![s3, s2]));
                }
            }
        }
    }
    pairs
}

/// The integrated MP bracket at `p = 0`: the kernel table over all node
/// pairs, divided by 4 (`u0 = -2 u_x`) and integrated in both sample
/// variables. Returns `(numeric, closed)` where `closed[i][j] = θ(s_i - s_j) / 2`.
pub fn mp_integrated_bracket(grid: &Grid) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    check_case_grid(Case::MikhalevPavlov, grid)?;
    let n = grid.size(0);
    let seed = make_seed(Case::MikhalevPavlov, 0, &GridFunction::zeros(*grid))?;
    let entries: Vec<f64> = (0..n * n)
        .into_par_iter()
        .map(|k| lie_poisson_bracket(&seed, &[grid.node(0, k / n)], &[grid.node(0, k % n)]))
        .collect::<Result<_>>()?;
    let kernel = DMatrix::from_row_slice(n, n, &entries) / 4.0;
    let a = antiderivative_matrix(grid)?;
    let numeric = &a * kernel * a.transpose();
    let mut closed = DMatrix::zeros(n, n);
    for j in 0..n {
        let green = green_kernel(grid, grid.node(0, j))?;
        for i in 0..n {
            closed[(i, j)] = 0.5 * green.values()[i];
        }
    }
    Ok((numeric, closed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn mp_grid(n: usize) -> Grid {
        Grid::new_1d(n).unwrap()
    }

    #[test]
    fn mp_seed_coefficients() {
        let grid = mp_grid(16);
        let u = GridFunction::from_fn(grid, f64::sin);
        let seed = make_seed(Case::MikhalevPavlov, 0, &u).unwrap();
        assert_eq!(seed.form.powers().collect::<Vec<_>>(), vec![0, 1]);
        assert!(seed.form.coeff(1).unwrap()[0].sup_distance(&GridFunction::constant(grid, 1.0)) == 0.0);
        let expected = GridFunction::from_fn(grid, |x| -2.0 * x.cos());
        assert!(seed.form.coeff(0).unwrap()[0].sup_distance(&expected) < 1e-13);

        let s2 = make_seed(Case::MikhalevPavlov, 2, &GridFunction::zeros(grid)).unwrap();
        assert_eq!(s2.form.max_abs_at(3), 1.0);
        assert_eq!(s2.form.max_abs_at(2), 0.0);
    }

    #[test]
    fn plebanski_seed_has_both_components() {
        let grid = Grid::new_2d(16, 16).unwrap();
        let u = GridFunction::from_fn2(grid, |a, b| a.sin() * b.sin());
        let seed = make_seed(Case::Plebanski, -1, &u).unwrap();
        assert_eq!(seed.form.powers().collect::<Vec<_>>(), vec![-1, 0]);
        let c = seed.form.coeff(-1).unwrap();
        // u0 = cos x1 sin x2 - sin x1 cos x2 = sin(x2 - x1)
        let e1 = GridFunction::from_fn2(grid, |a, b| -(b - a).cos());
        let e2 = GridFunction::from_fn2(grid, |a, b| (b - a).cos());
        assert!(c[0].sup_distance(&e1) < 1e-12 && c[1].sup_distance(&e2) < 1e-12);
        assert!(make_seed(Case::Plebanski, 0, &GridFunction::zeros(mp_grid(16))).is_err());
    }

    #[test]
    fn coordinate_gradient_shapes() {
        let grid = mp_grid(32);
        let seed0 = make_seed(Case::MikhalevPavlov, 0, &GridFunction::zeros(grid)).unwrap();
        let g0 = coordinate_gradient(&seed0, &[1.0]).unwrap();
        assert_eq!(g0.powers().collect::<Vec<_>>(), vec![-1]);
        let seedm = make_seed(Case::MikhalevPavlov, -1, &GridFunction::zeros(grid)).unwrap();
        assert_eq!(coordinate_gradient(&seedm, &[1.0]).unwrap().powers().collect::<Vec<_>>(), vec![0]);
        assert!(coordinate_gradient(&seedm, &[1.0, 2.0]).is_err());

        let g2 = Grid::new_2d(16, 16).unwrap();
        let sp = make_seed(Case::Plebanski, -1, &GridFunction::zeros(g2)).unwrap();
        let gp = coordinate_gradient(&sp, &[1.0, 2.0]).unwrap();
        assert_eq!(gp.powers().collect::<Vec<_>>(), vec![0]);
        assert_eq!(gp.coeff(0).unwrap()[1].max_abs(), 0.0);
    }

    #[test]
    fn mp_coordinate_is_reproduced() {
        let grid = mp_grid(64);
        let u = GridFunction::from_fn(grid, f64::sin);
        for p in [-2, -1, 0, 1] {
            let seed = make_seed(Case::MikhalevPavlov, p, &u).unwrap();
            assert_abs_diff_eq!(evaluate_coordinate(&seed, &[0.0]).unwrap(), -2.0, epsilon = 1e-12);
        }
        let zero = make_seed(Case::MikhalevPavlov, 0, &GridFunction::zeros(grid)).unwrap();
        assert_eq!(evaluate_coordinate(&zero, &[1.0]).unwrap(), 0.0);
    }

    #[test]
    fn mp_reproducing_identity_off_grid() {
        let f = |x: f64| -2.0 * ((x).cos() + 0.6 * (2.0 * x).sin());
        for n in [64, 128] {
            let grid = mp_grid(n);
            let u = GridFunction::from_fn(grid, |x| x.sin() - 0.3 * (2.0 * x).cos());
            let seed = make_seed(Case::MikhalevPavlov, 0, &u).unwrap();
            for s in [0.3, 2.71, 5.9] {
                let err = (evaluate_coordinate(&seed, &[s]).unwrap() - f(s)).abs();
                assert!(err <= 3.0 * grid.spacing(0), "n={n} s={s}: {err}");
            }
        }
    }

    #[test]
    fn plebanski_coordinate_symmetric_point() {
        let grid = Grid::new_2d(32, 32).unwrap();
        let u = GridFunction::from_fn2(grid, |a, b| a.sin() * b.sin());
        for p in [-1, 0] {
            let seed = make_seed(Case::Plebanski, p, &u).unwrap();
            let v = evaluate_coordinate(&seed, &[PI / 2.0, PI / 2.0]).unwrap();
            assert!(v.abs() < 1e-12, "p={p}: {v}");
            // generic point: u0 = sin(x2 - x1)
            let (s1, s2) = (grid.node(0, 3), grid.node(1, 11));
            let v = evaluate_coordinate(&seed, &[s1, s2]).unwrap();
            assert_abs_diff_eq!(v, (s2 - s1).sin(), epsilon = 1e-11);
        }
    }

    #[test]
    fn bracket_power_restriction() {
        let grid = mp_grid(32);
        let seed = make_seed(Case::MikhalevPavlov, 1, &GridFunction::from_fn(grid, f64::sin)).unwrap();
        assert_eq!(bracket_kernel(&seed, &[0.5], &[1.0]), Err(Error::UnsupportedPower(1)));
        assert_eq!(vanishing_powers(&seed), [-1, 0].into_iter().collect());
    }

    #[test]
    fn mp_p0_matches_closed_form_exactly() {
        let grid = mp_grid(64);
        let seed = make_seed(Case::MikhalevPavlov, 0, &GridFunction::from_fn(grid, f64::sin)).unwrap();
        let table = kernel_table(&seed, &standard_pairs(Case::MikhalevPavlov, &grid)).unwrap();
        assert!(table.relative_defect().unwrap() < 1e-12);
    }

    #[test]
    fn mp_p_minus1_constant_field_vanishes() {
        let grid = mp_grid(32);
        let seed = make_seed(Case::MikhalevPavlov, -1, &GridFunction::constant(grid, 3.0)).unwrap();
        let table = kernel_table(&seed, &standard_pairs(Case::MikhalevPavlov, &grid)).unwrap();
        assert!(table.max_abs() < 1e-10);
    }

    #[test]
    fn other_powers_vanish() {
        let grid = mp_grid(32);
        let u = GridFunction::from_fn(grid, |x| x.sin() + 0.2 * (3.0 * x).cos());
        let pairs = standard_pairs(Case::MikhalevPavlov, &grid);
        for p in [-3, -2, 1, 2] {
            let seed = make_seed(Case::MikhalevPavlov, p, &u).unwrap();
            assert!(vanishing_defect(&seed, &pairs).unwrap() <= 1e-9);
        }
        let seed = make_seed(Case::MikhalevPavlov, 0, &u).unwrap();
        assert!(vanishing_defect(&seed, &pairs).unwrap() > 1e-3);
    }

    #[test]
    fn mp_p_minus1_first_order_convergence() {
        let mut previous = f64::INFINITY;
        for n in [32, 64, 128] {
            let grid = mp_grid(n);
            let u = GridFunction::from_fn(grid, |x| x.sin() + 0.3 * (2.0 * x).cos());
            let seed = make_seed(Case::MikhalevPavlov, -1, &u).unwrap();
            let pairs = standard_pairs(Case::MikhalevPavlov, &grid);
            let defect = kernel_table(&seed, &pairs).unwrap().relative_defect().unwrap();
            assert!(defect < 0.7 * previous, "n={n}: {defect} vs {previous}");
            assert!(antisymmetry_defect(&seed, &pairs).unwrap() <= 1e-10);
            previous = defect;
        }
        assert!(previous <= 5e-2);
    }

    #[test]
    fn plebanski_p_minus1_converges() {
        let mut previous = f64::INFINITY;
        for n in [16, 32] {
            let grid = Grid::new_2d(n, n).unwrap();
            let u = GridFunction::from_fn2(grid, |a, b| a.sin() * b.sin() + 0.3 * (a + 2.0 * b).cos());
            let seed = make_seed(Case::Plebanski, -1, &u).unwrap();
            let defect =
                kernel_table(&seed, &standard_pairs(Case::Plebanski, &grid)).unwrap().relative_defect().unwrap();
            assert!(defect < 0.7 * previous, "n={n}: {defect}");
            previous = defect;
        }
    }

    #[test]
    fn plebanski_p0_has_no_closed_form() {
        let grid = Grid::new_2d(16, 16).unwrap();
        let seed = make_seed(Case::Plebanski, 0, &GridFunction::from_fn2(grid, |a, b| (a - b).sin())).unwrap();
        let pairs = standard_pairs(Case::Plebanski, &grid);
        let t = kernel_table(&seed, &pairs[..8]).unwrap();
        assert!(t.closed_form.is_none() && t.relative_defect().is_none());
        assert!(antisymmetry_defect(&seed, &pairs[..8]).unwrap() <= 1e-10);
    }

    #[test]
    fn integrated_p0_bracket_is_half_heaviside() {
        let grid = mp_grid(32);
        let (numeric, closed) = mp_integrated_bracket(&grid).unwrap();
        let scale = closed.amax();
        assert!((numeric - closed).amax() <= 1e-10 * scale);
    }
}
