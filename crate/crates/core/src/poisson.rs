//! Dense Poisson operators on the 1-torus: `θ₀ = ½∂⁻¹`, `θ₋₁ = ½(∂⁻¹u_x + u_x∂⁻¹)`,
//! their inverses, and numerical skew / Jacobi / pencil / flow checks.

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};

use crate::error::{Error, Result};
use crate::grid::{antiderivative_matrix, apply_matrix, check_mean_free, derivative_matrix, dot, Grid, GridFunction};
use crate::hamiltonian::{cubic_gradient, LiftedField};
use crate::report::VerificationReport;
use crate::sampling::{default_band, random_trig, rng};

/// A Poisson operator materialized as an `n × n` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct PoissonOperator {
    pub name: String,
    pub matrix: DMatrix<f64>,
    pub depends_on_u: bool,
    pub base: Option<LiftedField>,
    /// Inputs must be mean-free (the operator contains `∂⁻¹` on the right).
    pub mean_free_input: bool,
    /// Further linear constraints `⟨c, a⟩ = 0` defining the domain on which
    /// every `∂⁻¹` inside the operator acts on mean-free functions.
    pub constraints: Vec<GridFunction>,
    grid: Grid,
}

impl PoissonOperator {
    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn apply(&self, f: &GridFunction) -> Result<GridFunction> {
        if f.grid() != self.grid {
            return Err(Error::GridMismatch(format!("{:?} vs {:?}", f.grid(), self.grid)));
        }
        if self.mean_free_input {
            check_mean_free(f)?;
        }
        Ok(apply_matrix(&self.matrix, f))
    }

    /// `‖A + Aᵀ‖∞ / ‖A‖∞` (max-entry norms).
    pub fn matrix_skew_defect(&self) -> f64 {
        let m = &self.matrix;
        (m + m.transpose()).amax() / m.amax().max(f64::MIN_POSITIVE)
    }

    fn combine(&self, other: &PoissonOperator, eps: f64, name: String) -> PoissonOperator {
        PoissonOperator {
            name,
            matrix: &self.matrix + &other.matrix * eps,
            depends_on_u: self.depends_on_u || other.depends_on_u,
            base: other.base.clone().or_else(|| self.base.clone()),
            mean_free_input: self.mean_free_input || other.mean_free_input,
            constraints: self.constraints.iter().chain(&other.constraints).cloned().collect(),
            grid: self.grid,
        }
    }
}

fn one_d(grid: &Grid) -> Result<()> {
    if grid.dim() != 1 {
        return Err(Error::WrongDimension("Poisson operators act on the 1-torus".into()));
    }
    Ok(())
}

/// `θ₀ = ½ ∂⁻¹`.
pub fn theta0(grid: &Grid) -> Result<PoissonOperator> {
    one_d(grid)?;
    Ok(PoissonOperator {
        name: "theta0".into(),
        matrix: antiderivative_matrix(grid)? * 0.5,
        depends_on_u: false,
        base: None,
        mean_free_input: true,
        constraints: Vec::new(),
        grid: *grid,
    })
}

/// `θ₀⁻¹ = 2∂`.
pub fn theta0_inv(grid: &Grid) -> Result<PoissonOperator> {
    one_d(grid)?;
    Ok(PoissonOperator {
        name: "theta0_inv".into(),
        matrix: derivative_matrix(grid)? * 2.0,
        depends_on_u: false,
        base: None,
        mean_free_input: false,
        constraints: Vec::new(),
        grid: *grid,
    })
}

fn scale_rows(m: &DMatrix<f64>, d: &[f64]) -> DMatrix<f64> {
    let mut out = m.clone();
    for (i, mut row) in out.row_iter_mut().enumerate() {
        row *= d[i];
    }
    out
}

fn scale_cols(m: &DMatrix<f64>, d: &[f64]) -> DMatrix<f64> {
    let mut out = m.clone();
    for (j, mut col) in out.column_iter_mut().enumerate() {
        col *= d[j];
    }
    out
}

/// `θ₋₁ = ½(∂⁻¹ u_x + u_x ∂⁻¹)`.
pub fn theta_minus1(u: &LiftedField) -> Result<PoissonOperator> {
    let grid = u.grid();
    let a = antiderivative_matrix(&grid)?;
    let v = u.u_x();
    let m = (scale_cols(&a, v.values()) + scale_rows(&a, v.values())) * 0.5;
    Ok(PoissonOperator {
        name: "theta_minus1".into(),
        matrix: m,
        depends_on_u: true,
        base: Some(u.clone()),
        mean_free_input: false,
        constraints: vec![v],
        grid,
    })
}

/// `½ ∂ r ∂⁻¹ r ∂` with `r = 1/√u_x`; requires `u_x > 0`.
pub fn theta_minus1_inv(u: &LiftedField) -> Result<PoissonOperator> {
    let grid = u.grid();
    let v = u.u_x();
    if v.min() <= 0.0 {
        return Err(Error::NonPositiveSlope { min: v.min() });
    }
    let r: Vec<f64> = v.values().iter().map(|x| 1.0 / x.sqrt()).collect();
    let d = derivative_matrix(&grid)?;
    let a = antiderivative_matrix(&grid)?;
    let inner = scale_cols(&scale_rows(&a, &r), &r);
    let m = &d * inner * &d * 0.5;
    Ok(PoissonOperator {
        name: "theta_minus1_inv".into(),
        matrix: m,
        depends_on_u: true,
        base: Some(u.clone()),
        mean_free_input: false,
        constraints: Vec::new(),
        grid,
    })
}

/// `θ₀ + ε θ₋₁(u)`.
pub fn pencil(eps: f64, u: &LiftedField) -> Result<PoissonOperator> {
    let t0 = theta0(&u.grid())?;
    Ok(t0.combine(&theta_minus1(u)?, eps, format!("theta0+{eps}*theta_minus1")))
}

/// How far `θ₋₁ θ₋₁⁻¹` is from a multiple of the identity on the admissible
/// (mean-free, Nyquist-free) subspace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InverseComposition {
    /// Least-squares multiple `α` of the identity.
    pub alpha: f64,
    /// `max |P C P - α P| / α`.
    pub residual: f64,
}

pub fn measure_inverse_composition(u: &LiftedField) -> Result<InverseComposition> {
    let grid = u.grid();
    let c = theta_minus1(u)?.matrix * theta_minus1_inv(u)?.matrix;
    let p = derivative_matrix(&grid)? * antiderivative_matrix(&grid)?;
    let pcp = &p * c * &p;
    let alpha = pcp.trace() / p.trace();
    let residual = (pcp - &p * alpha).amax() / alpha.abs().max(f64::MIN_POSITIVE);
    Ok(InverseComposition { alpha, residual })
}

fn random_covector(grid: Grid, r: &mut crate::sampling::CheckRng) -> GridFunction {
    random_trig(grid, r, default_band(grid))
}

/// Max over 100 seeded covector pairs of `|⟨a,θb⟩ + ⟨θa,b⟩|`, relative to
/// `‖a‖‖θb‖ + ‖θa‖‖b‖`.
pub fn skew_defect(op: &PoissonOperator, seed: u64) -> Result<f64> {
    let mut r = rng(seed);
    let mut worst = 0.0f64;
    let norm = |f: &GridFunction| dot(f, f).sqrt();
    for _ in 0..100 {
        let a = random_covector(op.grid, &mut r);
        let b = random_covector(op.grid, &mut r);
        let (ta, tb) = (op.apply(&a)?, op.apply(&b)?);
        let scale = norm(&a) * norm(&tb) + norm(&ta) * norm(&b);
        if scale > 0.0 {
            worst = worst.max((dot(&a, &tb) + dot(&ta, &b)).abs() / scale);
        }
    }
    Ok(worst)
}

/// Projects a mean-free covector onto the operator's domain: orthogonal to
/// the mean-free parts of all constraints. Returns the projection and the
/// relative norm removed.
pub fn project_to_domain(op: &PoissonOperator, a: &GridFunction) -> (GridFunction, f64) {
    let mut basis: Vec<GridFunction> = Vec::new();
    for c in &op.constraints {
        let mut e = c.map(|x| x - c.mean());
        for b in &basis {
            let coef = dot(&e, b);
            e = e.zip_map(b, |x, y| x - coef * y);
        }
        let norm = dot(&e, &e).sqrt();
        if norm > 1e-12 * c.max_abs().max(1.0) {
            basis.push(e.scale(1.0 / norm));
        }
    }
    let mut out = a.clone();
    for b in &basis {
        let coef = dot(&out, b);
        out = out.zip_map(b, |x, y| x - coef * y);
    }
    let before = dot(a, a).sqrt();
    let removed = if before > 0.0 { dot(&(a - &out), &(a - &out)).sqrt() / before } else { 0.0 };
    (out, removed)
}

/// Outcome of the trilinear Jacobi check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiDefect {
    /// Max over triples of `|cyclic sum| / Σ|terms|` (0 if every term is 0).
    pub defect: f64,
    /// Largest change of the cyclic sum between step `h` and the Richardson
    /// extrapolation from `h`, `h/2`, on the same normalization.
    pub richardson_gap: f64,
    /// Largest relative norm removed when projecting covectors to the domain.
    pub max_projection: f64,
    pub triples: usize,
}

pub type OperatorBuilder<'a> = &'a dyn Fn(&LiftedField) -> Result<PoissonOperator>;

/// Directional derivative `θ'[w]` by central differences of the builder.
fn directional(builder: OperatorBuilder, u: &LiftedField, w: &GridFunction, step: f64) -> Result<DMatrix<f64>> {
    let plus = builder(&u.perturbed(w, step))?;
    let minus = builder(&u.perturbed(w, -step))?;
    Ok((plus.matrix - minus.matrix) / (2.0 * step))
}

fn to_vec(f: &GridFunction) -> DVector<f64> {
    DVector::from_column_slice(f.values())
}

/// Cyclic sum `⟨a, θ'[θb]c⟩ + ⟨b, θ'[θc]a⟩ + ⟨c, θ'[θa]b⟩` over seeded random
/// band-limited covector triples, projected onto the operator's domain.
pub fn jacobi_defect(builder: OperatorBuilder, u: &LiftedField, triples: usize, seed: u64) -> Result<JacobiDefect> {
    let grid = u.grid();
    let h = grid.spacing(0);
    let theta = builder(u)?;
    let mut r = rng(seed);
    let base_step = 1e-5 * u.u_x().max_abs().max(1.0);
    let (mut defect, mut gap, mut projection) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..triples {
        let mut cov = Vec::with_capacity(3);
        for _ in 0..3 {
            let (c, removed) = project_to_domain(&theta, &random_covector(grid, &mut r));
            projection = projection.max(removed);
            cov.push(c);
        }
        let images: Vec<GridFunction> = cov.iter().map(|c| theta.apply(c)).collect::<Result<_>>()?;
        let cyclic = |step_factor: f64| -> Result<(f64, f64)> {
            let mut sum = 0.0;
            let mut abs = 0.0;
            for k in 0..3 {
                let (a, b, c) = (&cov[k], &images[(k + 1) % 3], &cov[(k + 2) % 3]);
                let dir_scale = crate::grid::spectral_derivative(b, 0, 1).max_abs();
                if dir_scale == 0.0 {
                    continue;
                }
                let step = step_factor * base_step / dir_scale;
                let d = directional(builder, u, b, step)?;
                let term = to_vec(a).dot(&(d * to_vec(c))) * h;
                sum += term;
                abs += term.abs();
            }
            Ok((sum, abs))
        };
        let (s1, a1) = cyclic(1.0)?;
        let (s2, _) = cyclic(0.5)?;
        let extrapolated = (4.0 * s2 - s1) / 3.0;
        if a1 > 0.0 {
            defect = defect.max(s1.abs() / a1);
            gap = gap.max((s1 - extrapolated).abs() / a1);
        }
    }
    Ok(JacobiDefect { defect, richardson_gap: gap, max_projection: projection, triples })
}

/// Jacobi check of the pencil `θ₀ + ε θ₋₁`.
pub fn pencil_jacobi_defect(eps: f64, u: &LiftedField, triples: usize, seed: u64) -> Result<JacobiDefect> {
    jacobi_defect(&|v: &LiftedField| pencil(eps, v), u, triples, seed)
}

/// `θ₀⁻¹ θ₋₁ grad`, one step of the recursion.
pub fn recursion_apply(grad: &GridFunction, u: &LiftedField) -> Result<GridFunction> {
    check_mean_free(grad)?;
    let inner = theta_minus1(u)?.apply(grad)?;
    theta0_inv(&u.grid())?.apply(&inner)
}

fn sup_residual(values: impl Iterator<Item = f64>) -> f64 {
    values.fold(0.0, |m, v| m.max(v.abs()))
}

/// Residual after removing the best constant (least squares).
fn constant_fit_defect(residual: &GridFunction) -> f64 {
    let mean = residual.values().iter().sum::<f64>() / residual.values().len() as f64;
    sup_residual(residual.values().iter().map(|r| r - mean))
}

/// Residual after removing the best combination `c1 + c2 v`.
fn affine_fit_defect(residual: &GridFunction, v: &GridFunction) -> f64 {
    let (r, x) = (residual.values(), v.values());
    let n = r.len() as f64;
    let (sx, sxx) = (x.iter().sum::<f64>(), x.iter().map(|a| a * a).sum::<f64>());
    let (sr, sxr) = (r.iter().sum::<f64>(), x.iter().zip(r).map(|(a, b)| a * b).sum::<f64>());
    let normal = Matrix2::new(n, sx, sx, sxx);
    let coeffs = if normal.determinant().abs() <= 1e-12 * n * sxx.max(1.0) {
        Vector2::new(sr / n, 0.0)
    } else {
        normal.lu().solve(&Vector2::new(sr, sxr)).unwrap_or(Vector2::new(sr / n, 0.0))
    };
    sup_residual(r.iter().zip(x).map(|(ri, xi)| ri - coeffs[0] - coeffs[1] * xi))
}

/// Best sign `σ` and the defect of `computed - σ target` after `fit`.
fn resolve_sign(computed: &GridFunction, target: &GridFunction, fit: impl Fn(&GridFunction) -> f64) -> (i32, f64) {
    let plus = fit(&(computed - target));
    let minus = fit(&(computed + target));
    if minus < plus {
        (-1, minus)
    } else {
        (1, plus)
    }
}

/// Applies `ϑ₀` and `ϑ₋₁` to `-6 u_x u_xx` and compares with `σ (3/2) u_x²`
/// (up to a constant) and `σ (5/2) u_x³` (up to `c1 + c2 u_x`), resolving
/// the sign `σ` for each.
pub fn flow_consistency(u: &LiftedField) -> Result<Vec<VerificationReport>> {
    let grid = u.grid();
    let n = grid.size(0) as f64;
    let v = u.u_x();
    let grad = cubic_gradient(u)?;

    let y = theta0(&grid)?.apply(&grad)?;
    let target_y = v.map(|x| 1.5 * x * x);
    let (sign_y, defect_y) = resolve_sign(&y, &target_y, constant_fit_defect);

    let t = theta_minus1(u)?.apply(&grad)?;
    let target_t = v.map(|x| 2.5 * x * x * x);
    let (sign_t, defect_t) = resolve_sign(&t, &target_t, |r| affine_fit_defect(r, &v));

    Ok(vec![
        VerificationReport::new("flow_consistency_theta0", "mp", defect_y, 1e-8).param("n", n).with_sign(sign_y),
        VerificationReport::new("flow_consistency_theta_minus1", "mp", defect_t, 1e-8).param("n", n).with_sign(sign_t),
    ])
}
