//! Local functionals on the 1-torus, their variational derivatives, a
//! finite-difference Gâteaux oracle and homotopy reconstruction.
//!
//! Fields with a non-zero mean slope (`u_x = 1 + ½ sin x`) are not periodic;
//! they are carried as [`LiftedField`]s `u = s·x + w` with `w` periodic.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{dot, spectral_derivative, Grid, GridFunction, TWO_PI};

/// `u(x) = slope·x + w(x)` with `w` periodic.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedField {
    slope: f64,
    periodic: GridFunction,
}

impl LiftedField {
    pub fn new(slope: f64, periodic: GridFunction) -> Result<Self> {
        if periodic.grid().dim() != 1 {
            return Err(Error::WrongDimension("lifted fields live on the 1-torus".into()));
        }
        if !slope.is_finite() {
            return Err(Error::InvalidParameter(format!("slope {slope}")));
        }
        Ok(Self { slope, periodic })
    }

    pub fn periodic(w: GridFunction) -> Result<Self> {
        Self::new(0.0, w)
    }

    pub fn from_fn(grid: Grid, slope: f64, w: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(slope, GridFunction::from_fn(grid, w))
    }

    pub fn grid(&self) -> Grid {
        self.periodic.grid()
    }

    pub fn slope(&self) -> f64 {
        self.slope
    }

    pub fn periodic_part(&self) -> &GridFunction {
        &self.periodic
    }

    /// Nodal values `s·x_j + w_j`.
    pub fn values(&self) -> GridFunction {
        let grid = self.grid();
        let ramp = GridFunction::from_fn(grid, |x| self.slope * x);
        &ramp + &self.periodic
    }

    /// `∂^k u`; for `k >= 1` this is periodic.
    pub fn derivative(&self, order: usize) -> GridFunction {
        match order {
            0 => self.values(),
            1 => spectral_derivative(&self.periodic, 0, 1).map(|v| v + self.slope),
            k => spectral_derivative(&self.periodic, 0, k),
        }
    }

    pub fn u_x(&self) -> GridFunction {
        self.derivative(1)
    }

    /// `μ·u`.
    pub fn scaled(&self, mu: f64) -> Self {
        Self { slope: mu * self.slope, periodic: self.periodic.scale(mu) }
    }

    /// `u + ε·dw` for a periodic perturbation.
    pub fn perturbed(&self, dw: &GridFunction, eps: f64) -> Self {
        let w = self.periodic.zip_map(dw, |a, b| a + eps * b);
        Self { slope: self.slope, periodic: w }
    }
}

type Eval = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;

/// Density `f(u, u_x, u_xx)` with its three partial derivatives.
#[derive(Clone)]
pub struct LocalDensity {
    name: String,
    f: Eval,
    df_du: Eval,
    df_dux: Eval,
    df_duxx: Eval,
    depends_on_u: bool,
}

impl fmt::Debug for LocalDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LocalDensity").field("name", &self.name).field("depends_on_u", &self.depends_on_u).finish()
    }
}

fn eval(f: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static) -> Eval {
    Arc::new(f)
}

impl LocalDensity {
    /// A custom density. `depends_on_u` must be true whenever `f` uses its
    /// first argument.
    pub fn new(
        name: impl Into<String>,
        depends_on_u: bool,
        f: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
        df_du: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
        df_dux: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
        df_duxx: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            f: eval(f),
            df_du: eval(df_du),
            df_dux: eval(df_dux),
            df_duxx: eval(df_duxx),
            depends_on_u,
        }
    }

    /// `u_x³`
    pub fn cubic_slope() -> Self {
        Self::new("u_x^3", false, |_, p, _| p * p * p, |_, _, _| 0.0, |_, p, _| 3.0 * p * p, |_, _, _| 0.0)
    }

    /// `u`
    pub fn linear() -> Self {
        Self::new("u", true, |u, _, _| u, |_, _, _| 1.0, |_, _, _| 0.0, |_, _, _| 0.0)
    }

    /// `½ u_x²`
    pub fn dirichlet() -> Self {
        Self::new("u_x^2/2", false, |_, p, _| 0.5 * p * p, |_, _, _| 0.0, |_, p, _| p, |_, _, _| 0.0)
    }

    /// `u·u_x²`
    pub fn mixed() -> Self {
        Self::new("u*u_x^2", true, |u, p, _| u * p * p, |_, p, _| p * p, |u, p, _| 2.0 * u * p, |_, _, _| 0.0)
    }

    /// `u_xx²`
    pub fn curvature() -> Self {
        Self::new("u_xx^2", false, |_, _, q| q * q, |_, _, _| 0.0, |_, _, _| 0.0, |_, _, q| 2.0 * q)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn depends_on_u(&self) -> bool {
        self.depends_on_u
    }

    pub fn eval(&self, u: f64, ux: f64, uxx: f64) -> f64 {
        (self.f)(u, ux, uxx)
    }

    /// Largest relative mismatch between the supplied partials and central
    /// differences of `f` at the given points.
    pub fn partials_defect(&self, points: &[(f64, f64, f64)]) -> f64 {
        let mut worst = 0.0f64;
        for &(u, p, q) in points {
            let step = |x: f64| 1e-5 * x.abs().max(1.0);
            let checks = [
                ((self.df_du)(u, p, q), ((self.f)(u + step(u), p, q) - (self.f)(u - step(u), p, q)) / (2.0 * step(u))),
                ((self.df_dux)(u, p, q), ((self.f)(u, p + step(p), q) - (self.f)(u, p - step(p), q)) / (2.0 * step(p))),
                (
                    (self.df_duxx)(u, p, q),
                    ((self.f)(u, p, q + step(q)) - (self.f)(u, p, q - step(q))) / (2.0 * step(q)),
                ),
            ];
            for (exact, fd) in checks {
                worst = worst.max((exact - fd).abs() / exact.abs().max(1.0));
            }
        }
        worst
    }
}

fn check_sloped(density: &LocalDensity, u: &LiftedField) -> Result<()> {
    if density.depends_on_u && u.slope() != 0.0 {
        return Err(Error::SlopedExplicitDensity(u.slope()));
    }
    Ok(())
}

/// `F[u] = ∫ f(u, u_x, u_xx) dx`.
#[derive(Debug, Clone)]
pub struct Functional {
    pub density: LocalDensity,
}

impl Functional {
    pub fn new(density: LocalDensity) -> Self {
        Self { density }
    }

    /// Grid quadrature of the density.
    pub fn value(&self, u: &LiftedField) -> Result<f64> {
        check_sloped(&self.density, u)?;
        let (v, p, q) = (u.values(), u.derivative(1), u.derivative(2));
        let h = u.grid().spacing(0);
        let sum: f64 =
            (0..v.values().len()).map(|j| self.density.eval(v.values()[j], p.values()[j], q.values()[j])).sum();
        Ok(sum * h)
    }

    /// `F[s·x] - F[0]`: the contribution of the linear ramp, which a
    /// periodic-direction homotopy cannot see.
    pub fn slope_offset(&self, slope: f64) -> Result<f64> {
        if slope == 0.0 {
            return Ok(0.0);
        }
        if self.density.depends_on_u {
            return Err(Error::SlopedExplicitDensity(slope));
        }
        Ok(TWO_PI * (self.density.eval(0.0, slope, 0.0) - self.density.eval(0.0, 0.0, 0.0)))
    }

    /// `F[u] - F[0]` reconstructed from a gradient field: the ramp offset plus
    /// the homotopy along the periodic part.
    pub fn reconstruct(
        &self,
        gradfield: &dyn Fn(&LiftedField) -> Result<GridFunction>,
        u: &LiftedField,
    ) -> Result<f64> {
        Ok(self.slope_offset(u.slope())? + homotopy_reconstruct(gradfield, u)?)
    }
}

/// Euler–Lagrange expression `∂f/∂u - D(∂f/∂u_x) + D²(∂f/∂u_xx)`.
pub fn variational_derivative(density: &LocalDensity, u: &LiftedField) -> Result<GridFunction> {
    check_sloped(density, u)?;
    let (v, p, q) = (u.values(), u.derivative(1), u.derivative(2));
    let grid = u.grid();
    let pointwise = |g: &Eval| {
        let vals = (0..grid.len()).map(|j| g(v.values()[j], p.values()[j], q.values()[j])).collect();
        GridFunction::new(grid, vals)
    };
    let a = pointwise(&density.df_du)?;
    let b = spectral_derivative(&pointwise(&density.df_dux)?, 0, 1);
    let c = spectral_derivative(&pointwise(&density.df_duxx)?, 0, 2);
    Ok(&(&a - &b) + &c)
}

/// Finite-difference gradient: `g_j = (F[u + ε e_j] - F[u - ε e_j]) / (2 ε h)`.
pub fn gateaux_gradient(functional: &Functional, u: &LiftedField) -> Result<GridFunction> {
    let grid = u.grid();
    let h = grid.spacing(0);
    let eps = 1e-4 * h * u.periodic_part().max_abs().max(1.0);
    let mut values = Vec::with_capacity(grid.len());
    let mut e = vec![0.0; grid.len()];
    for j in 0..grid.len() {
        e[j] = 1.0;
        let dir = GridFunction::new(grid, e.clone())?;
        e[j] = 0.0;
        let plus = functional.value(&u.perturbed(&dir, eps))?;
        let minus = functional.value(&u.perturbed(&dir, -eps))?;
        values.push((plus - minus) / (2.0 * eps * h));
    }
    GridFunction::new(grid, values)
}

/// Five-point Gauss–Legendre nodes and weights on `[0, 1]`.
fn gauss_legendre_unit() -> [(f64, f64); 5] {
    let raw = [
        (0.0, 128.0 / 225.0),
        (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
        (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
        (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
        (0.906_179_845_938_664, 0.236_926_885_056_189_1),
    ];
    raw.map(|(x, w)| (0.5 * (x + 1.0), 0.5 * w))
}

/// `∫₀¹ ⟨g(s·x + μ w), w⟩ dμ` by five-point Gauss–Legendre quadrature, where
/// `u = s·x + w`. For `s = 0` this is the homotopy formula `F[u] - F[0]`;
/// in general it is `F[u] - F[s·x]`.
pub fn homotopy_reconstruct(gradfield: &dyn Fn(&LiftedField) -> Result<GridFunction>, u: &LiftedField) -> Result<f64> {
    let w = u.periodic_part();
    let mut total = 0.0;
    for (mu, weight) in gauss_legendre_unit() {
        let point = LiftedField::new(u.slope(), w.scale(mu))?;
        let g = gradfield(&point)?;
        g.ensure_same_grid(w)?;
        total += weight * dot(&g, w);
    }
    Ok(total)
}

/// Gradient of `∫ u_x³ dx`: `-6 u_x u_xx`.
pub fn cubic_gradient(u: &LiftedField) -> Result<GridFunction> {
    Ok((&u.u_x() * &u.derivative(2)).scale(-6.0))
}

/// Gradient generating the t-flow through θ₋₁. It coincides with the y-flow
/// gradient, so both flows share one Hamiltonian.
pub fn t_flow_gradient(u: &LiftedField) -> Result<GridFunction> {
    cubic_gradient(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{random_trig, rng};
    use std::f64::consts::PI;

    fn grid(n: usize) -> Grid {
        Grid::new_1d(n).unwrap()
    }

    fn tilted(n: usize) -> LiftedField {
        // u_x = 1 + ½ sin x
        LiftedField::from_fn(grid(n), 1.0, |x| -0.5 * x.cos()).unwrap()
    }

    #[test]
    fn lifted_field_derivatives() {
        let u = tilted(32);
        let ex = GridFunction::from_fn(grid(32), |x| 1.0 + 0.5 * x.sin());
        assert!(u.u_x().sup_distance(&ex) < 1e-13);
        assert_eq!(u.scaled(0.5).slope(), 0.5);
        assert!(LiftedField::new(f64::NAN, GridFunction::zeros(grid(8))).is_err());
        assert!(LiftedField::periodic(GridFunction::zeros(Grid::new_2d(8, 8).unwrap())).is_err());
    }

    #[test]
    fn variational_derivative_examples() {
        let u = tilted(64);
        let g = variational_derivative(&LocalDensity::cubic_slope(), &u).unwrap();
        assert!(g.sup_distance(&cubic_gradient(&u).unwrap()) < 1e-10);

        let w = LiftedField::from_fn(grid(64), 0.0, |x| 2.0 + x.sin()).unwrap();
        let one = variational_derivative(&LocalDensity::linear(), &w).unwrap();
        assert!(one.sup_distance(&GridFunction::constant(grid(64), 1.0)) < 1e-14);
        let lap = variational_derivative(&LocalDensity::dirichlet(), &w).unwrap();
        assert!(lap.sup_distance(&GridFunction::from_fn(grid(64), f64::sin)) < 1e-12);

        assert_eq!(variational_derivative(&LocalDensity::linear(), &u), Err(Error::SlopedExplicitDensity(1.0)));
    }

    #[test]
    fn partials_are_consistent() {
        let pts = [(0.3, -1.2, 0.7), (2.0, 0.5, -3.0), (-1.0, 1.5, 0.1)];
        for d in [
            LocalDensity::cubic_slope(),
            LocalDensity::linear(),
            LocalDensity::dirichlet(),
            LocalDensity::mixed(),
            LocalDensity::curvature(),
        ] {
            assert!(d.partials_defect(&pts) < 1e-6, "{}", d.name());
        }
    }

    #[test]
    fn gateaux_matches_variational() {
        let mut r = rng(7);
        let g = grid(32);
        for d in [LocalDensity::cubic_slope(), LocalDensity::mixed(), LocalDensity::curvature()] {
            let u = LiftedField::periodic(random_trig(g, &mut r, 3)).unwrap();
            let exact = variational_derivative(&d, &u).unwrap();
            let fd = gateaux_gradient(&Functional::new(d.clone()), &u).unwrap();
            let rel = exact.sup_distance(&fd) / exact.max_abs().max(1e-300);
            assert!(rel < 1e-6, "{}: {rel}", d.name());
        }
        let fd = gateaux_gradient(&Functional::new(LocalDensity::cubic_slope()), &tilted(32)).unwrap();
        let exact = cubic_gradient(&tilted(32)).unwrap();
        assert!(exact.sup_distance(&fd) / exact.max_abs() < 1e-6);

        let lin = gateaux_gradient(
            &Functional::new(LocalDensity::linear()),
            &LiftedField::periodic(GridFunction::zeros(g)).unwrap(),
        )
        .unwrap();
        assert!(lin.sup_distance(&GridFunction::constant(g, 1.0)) < 1e-8);
        let konst = LocalDensity::new("c", false, |_, _, _| 3.0, |_, _, _| 0.0, |_, _, _| 0.0, |_, _, _| 0.0);
        let z = gateaux_gradient(&Functional::new(konst), &tilted(16)).unwrap();
        assert_eq!(z.max_abs(), 0.0);
    }

    #[test]
    fn homotopy_examples() {
        let g = grid(64);
        let odd = LiftedField::periodic(GridFunction::from_fn(g, f64::sin)).unwrap();
        assert!(homotopy_reconstruct(&cubic_gradient, &odd).unwrap().abs() < 1e-12);

        let u = tilted(64);
        let h = Functional::new(LocalDensity::cubic_slope());
        let total = h.reconstruct(&cubic_gradient, &u).unwrap();
        assert!((total - 11.0 * PI / 4.0).abs() < 1e-10, "{total}");
        assert!((h.value(&u).unwrap() - 11.0 * PI / 4.0).abs() < 1e-10);
        assert!((homotopy_reconstruct(&cubic_gradient, &u).unwrap() - 3.0 * PI / 4.0).abs() < 1e-10);

        let lin = LiftedField::periodic(GridFunction::from_fn(g, |x| 2.0 + x.sin())).unwrap();
        let ones = |v: &LiftedField| Ok(GridFunction::constant(v.grid(), 1.0));
        assert!((homotopy_reconstruct(&ones, &lin).unwrap() - 4.0 * PI).abs() < 1e-12);

        let t = Functional::new(LocalDensity::cubic_slope()).reconstruct(&t_flow_gradient, &u).unwrap();
        assert!((t - total).abs() < 1e-12);
    }

    #[test]
    fn homotopy_inverts_variational_derivative() {
        let mut r = rng(11);
        let g = grid(64);
        for d in
            [LocalDensity::cubic_slope(), LocalDensity::mixed(), LocalDensity::curvature(), LocalDensity::dirichlet()]
        {
            let u = LiftedField::periodic(random_trig(g, &mut r, 4)).unwrap();
            let f = Functional::new(d.clone());
            let grad = |v: &LiftedField| variational_derivative(&d, v);
            let zero = LiftedField::periodic(GridFunction::zeros(g)).unwrap();
            let expected = f.value(&u).unwrap() - f.value(&zero).unwrap();
            let got = homotopy_reconstruct(&grad, &u).unwrap();
            assert!((got - expected).abs() <= 1e-10 * expected.abs().max(1.0), "{}: {got} vs {expected}", d.name());
        }
    }
}
