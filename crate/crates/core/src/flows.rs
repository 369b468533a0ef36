//! Reduced hierarchy flows for `v = u_x` on the 1-torus, their exact
//! characteristic solutions, and residuals of the Plebański flow pair.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{low_pass, spectral_derivative, GridFunction};

/// `MpY`: `v_y = -3 v v_x`; `MpT`: `v_t = -(15/2) v² v_x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowKind {
    MpY,
    MpT,
}

impl FlowKind {
    /// Characteristic speed `c(v)`.
    pub fn speed(self, v: f64) -> f64 {
        match self {
            FlowKind::MpY => 3.0 * v,
            FlowKind::MpT => 7.5 * v * v,
        }
    }

    fn speed_derivative(self, v: f64) -> f64 {
        match self {
            FlowKind::MpY => 3.0,
            FlowKind::MpT => 15.0 * v,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FlowKind::MpY => "mp_y",
            FlowKind::MpT => "mp_t",
        }
    }
}

/// Right-hand side `-c(v) v_x`.
pub fn hierarchy_rhs(flow: FlowKind, v: &GridFunction) -> Result<GridFunction> {
    if v.grid().dim() != 1 {
        return Err(Error::WrongDimension("hierarchy flows act on the 1-torus".into()));
    }
    let vx = spectral_derivative(v, 0, 1);
    Ok(v.zip_map(&vx, |a, b| -flow.speed(a) * b))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions {
    /// Apply the 2/3 rule to the right-hand side.
    pub dealias: bool,
    /// Keep every `stride`-th state (the final state is always kept).
    pub stride: usize,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self { dealias: false, stride: 1 }
    }
}

/// Stored states with their conservation monitors.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub flow: FlowKind,
    pub times: Vec<f64>,
    pub states: Vec<GridFunction>,
    /// `∫ v³ dx`
    pub h0: Vec<f64>,
    /// `∫ v dx`
    pub momentum: Vec<f64>,
    /// `∫ v² dx`
    pub mass: Vec<f64>,
}

/// Largest deviation of a monitor from its initial value, divided by
/// `max(|Q(0)|, reference)`.
pub fn relative_drift(monitor: &[f64], reference: f64) -> f64 {
    let Some(&q0) = monitor.first() else { return 0.0 };
    let scale = q0.abs().max(reference).max(f64::MIN_POSITIVE);
    monitor.iter().fold(0.0f64, |m, q| m.max((q - q0).abs())) / scale
}

impl Trajectory {
    pub fn final_state(&self) -> &GridFunction {
        self.states.last().expect("trajectory holds the initial state")
    }

    /// Drifts of `(H₀, ∫v, ∫v²)`, normalized by `max(|Q(0)|, ∫|v₀|^k)`.
    pub fn drifts(&self) -> (f64, f64, f64) {
        let v0 = &self.states[0];
        let norm = |k: i32| v0.map(|x| x.abs().powi(k)).integral();
        (
            relative_drift(&self.h0, norm(3)),
            relative_drift(&self.momentum, norm(1)),
            relative_drift(&self.mass, norm(2)),
        )
    }

    pub fn min_max(&self, k: usize) -> (f64, f64) {
        (self.states[k].min(), self.states[k].max())
    }
}

/// `∫ v³ dx`
pub fn conserved_h0(v: &GridFunction) -> f64 {
    v.map(|x| x * x * x).integral()
}

fn axpy(a: &GridFunction, s: f64, b: &GridFunction) -> GridFunction {
    a.zip_map(b, |x, y| x + s * y)
}

/// Classical RK4 with fixed `dt` from 0 to `T` (the last step is shortened
/// to land on `T`).
pub fn evolve(flow: FlowKind, v0: &GridFunction, t_end: f64, dt: f64, options: EvolveOptions) -> Result<Trajectory> {
    if !(dt > 0.0 && dt.is_finite()) || !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidParameter(format!("dt = {dt}, T = {t_end}")));
    }
    let stride = options.stride.max(1);
    let rhs = |v: &GridFunction| -> Result<GridFunction> {
        let r = hierarchy_rhs(flow, v)?;
        Ok(if options.dealias { low_pass(&r, 2.0 / 3.0) } else { r })
    };
    let initial_slope = spectral_derivative(v0, 0, 1).max_abs();
    let steps = (t_end / dt - 1e-9).ceil().max(0.0) as usize;

    let mut traj = Trajectory { flow, times: vec![], states: vec![], h0: vec![], momentum: vec![], mass: vec![] };
    let mut record = |t: f64, v: &GridFunction| {
        traj.times.push(t);
        traj.h0.push(conserved_h0(v));
        traj.momentum.push(v.integral());
        traj.mass.push(v.map(|x| x * x).integral());
        traj.states.push(v.clone());
    };
    record(0.0, v0);

    let mut v = v0.clone();
    let mut t = 0.0;
    for step in 1..=steps {
        let h = dt.min(t_end - t);
        let k1 = rhs(&v)?;
        let k2 = rhs(&axpy(&v, 0.5 * h, &k1))?;
        let k3 = rhs(&axpy(&v, 0.5 * h, &k2))?;
        let k4 = rhs(&axpy(&v, h, &k3))?;
        let incr = &(&k1 + &k4) + &(&k2 + &k3).scale(2.0);
        v = axpy(&v, h / 6.0, &incr);
        t = if step == steps { t_end } else { t + h };

        let slope = spectral_derivative(&v, 0, 1).max_abs();
        if !slope.is_finite() || (initial_slope > 0.0 && slope > 1e3 * initial_slope) {
            return Err(Error::BlowupDetected { time: t, slope });
        }
        if step % stride == 0 || step == steps {
            record(t, &v);
        }
    }
    Ok(traj)
}

/// Solves `v = v₀(x - c(v) y)` by Newton's method, starting from `v₀(x)`.
/// Fails past the first characteristic crossing, where the relation stops
/// being uniquely solvable.
pub fn characteristics_solution(
    flow: FlowKind,
    v0: &dyn Fn(f64) -> f64,
    v0_prime: &dyn Fn(f64) -> f64,
    y: f64,
    x: f64,
) -> Result<f64> {
    let mut v = v0(x);
    for _ in 0..100 {
        let xi = x - flow.speed(v) * y;
        let jac = 1.0 + v0_prime(xi) * flow.speed_derivative(v) * y;
        if jac <= 0.0 || !jac.is_finite() {
            return Err(Error::NoConvergence { x });
        }
        let step = (v - v0(xi)) / jac;
        v -= step;
        if step.abs() <= 1e-15 * v.abs().max(1.0) {
            let xi = x - flow.speed(v) * y;
            if 1.0 + v0_prime(xi) * flow.speed_derivative(v) * y <= 0.0 {
                return Err(Error::NoConvergence { x });
            }
            return Ok(v);
        }
    }
    Err(Error::NoConvergence { x })
}

/// Characteristic solution sampled at every node of `like`'s grid.
pub fn characteristics_field(
    flow: FlowKind,
    v0: &dyn Fn(f64) -> f64,
    v0_prime: &dyn Fn(f64) -> f64,
    y: f64,
    like: &GridFunction,
) -> Result<GridFunction> {
    let grid = like.grid();
    let values =
        grid.nodes(0).into_iter().map(|x| characteristics_solution(flow, v0, v0_prime, y, x)).collect::<Result<_>>()?;
    GridFunction::new(grid, values)
}

/// Residuals of `(u_x2 - u_x1)_t = u11 u22 - u12²` and
/// `(u_x1 - u_x2)_y = u11 u22 - u12²`, given `u`, `u_t` and `u_y` on one grid.
pub fn plebanski_flow_residual(
    u: &GridFunction,
    u_t: &GridFunction,
    u_y: &GridFunction,
) -> Result<(GridFunction, GridFunction)> {
    if u.grid().dim() != 2 {
        return Err(Error::WrongDimension("the Plebański pair lives on the 2-torus".into()));
    }
    u.ensure_same_grid(u_t)?;
    u.ensure_same_grid(u_y)?;
    let d = |f: &GridFunction, axis| spectral_derivative(f, axis, 1);
    let u11 = spectral_derivative(u, 0, 2);
    let u22 = spectral_derivative(u, 1, 2);
    let u12 = d(&d(u, 0), 1);
    let monge = &(&u11 * &u22) - &(&u12 * &u12);
    let r_t = &(&d(u_t, 1) - &d(u_t, 0)) - &monge;
    let r_y = &(&d(u_y, 0) - &d(u_y, 1)) - &monge;
    Ok((r_t, r_y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use std::f64::consts::PI;

    fn grid(n: usize) -> Grid {
        Grid::new_1d(n).unwrap()
    }

    #[test]
    fn rhs_examples() {
        let g = grid(32);
        assert_eq!(hierarchy_rhs(FlowKind::MpY, &GridFunction::constant(g, 2.0)).unwrap().max_abs(), 0.0);
        assert_eq!(hierarchy_rhs(FlowKind::MpT, &GridFunction::constant(g, 2.0)).unwrap().max_abs(), 0.0);
        let r = hierarchy_rhs(FlowKind::MpY, &GridFunction::from_fn(g, f64::cos)).unwrap();
        assert!(r.values()[0].abs() < 1e-13);
        assert!((r.values()[4] - 1.5).abs() < 1e-13, "{}", r.values()[4]);
    }

    #[test]
    fn h0_examples() {
        let g = grid(64);
        assert!(conserved_h0(&GridFunction::from_fn(g, f64::cos)).abs() < 1e-13);
        assert!((conserved_h0(&GridFunction::from_fn(g, |x| 1.0 + 0.5 * x.sin())) - 11.0 * PI / 4.0).abs() < 1e-12);
        assert_eq!(conserved_h0(&GridFunction::zeros(g)), 0.0);
    }

    #[test]
    fn constant_state_is_stationary() {
        let v0 = GridFunction::constant(grid(32), 0.7);
        let t = evolve(FlowKind::MpY, &v0, 0.1, 0.01, EvolveOptions::default()).unwrap();
        assert_eq!(t.final_state(), &v0);
        assert_eq!(t.times.len(), 11);
        assert!((t.times[10] - 0.1).abs() < 1e-15);
    }

    #[test]
    fn characteristics_examples() {
        let v0 = |x: f64| 0.1 * x.sin();
        let v0p = |x: f64| 0.1 * x.cos();
        assert_eq!(characteristics_solution(FlowKind::MpY, &v0, &v0p, 0.0, 1.0).unwrap(), v0(1.0));
        let c = |_: f64| 0.4;
        let cp = |_: f64| 0.0;
        assert_eq!(characteristics_solution(FlowKind::MpT, &c, &cp, 3.0, 2.0).unwrap(), 0.4);
        let v = characteristics_solution(FlowKind::MpY, &v0, &v0p, 0.1, 1.0).unwrap();
        assert!((v - v0(1.0 - 3.0 * v * 0.1)).abs() < 1e-15);
        // sin x crosses at y = 1/3
        assert!(characteristics_solution(FlowKind::MpY, &f64::sin, &f64::cos, 0.5, PI).is_err());
    }

    #[test]
    fn evolve_matches_characteristics() {
        let g = grid(256);
        let v0 = GridFunction::from_fn(g, |x| 0.1 * x.sin());
        for flow in [FlowKind::MpY, FlowKind::MpT] {
            let t = evolve(flow, &v0, 0.1, 1e-3, EvolveOptions { dealias: false, stride: 10 }).unwrap();
            let exact = characteristics_field(flow, &|x| 0.1 * x.sin(), &|x| 0.1 * x.cos(), 0.1, &v0).unwrap();
            assert!(t.final_state().sup_distance(&exact) <= 1e-7);
            let (h0, p, m) = t.drifts();
            assert!(h0 <= 1e-8 && p <= 1e-8 && m <= 1e-8, "{h0} {p} {m}");
        }
    }

    #[test]
    fn rk4_order() {
        let g = grid(128);
        let v0 = GridFunction::from_fn(g, f64::sin);
        let exact = characteristics_field(FlowKind::MpY, &f64::sin, &f64::cos, 0.2, &v0).unwrap();
        let err = |dt: f64| {
            let t = evolve(FlowKind::MpY, &v0, 0.2, dt, EvolveOptions { dealias: false, stride: 1000 }).unwrap();
            t.final_state().sup_distance(&exact)
        };
        let (e1, e2, e3) = (err(0.02), err(0.01), err(0.005));
        for ratio in [e1 / e2, e2 / e3] {
            assert!((12.0..=20.0).contains(&ratio), "{e1} {e2} {e3}");
        }
    }

    #[test]
    fn blowup_is_detected() {
        let v0 = GridFunction::from_fn(grid(64), |x| 2.0 * x.sin());
        let r = evolve(FlowKind::MpY, &v0, 1.0, 1e-3, EvolveOptions::default());
        assert!(matches!(r, Err(Error::BlowupDetected { .. })));
    }

    #[test]
    fn dealias_keeps_smooth_solution() {
        let v0 = GridFunction::from_fn(grid(64), |x| 0.1 * x.sin());
        let a = evolve(FlowKind::MpY, &v0, 0.05, 1e-3, EvolveOptions { dealias: true, stride: 50 }).unwrap();
        let b = evolve(FlowKind::MpY, &v0, 0.05, 1e-3, EvolveOptions::default()).unwrap();
        assert!(a.final_state().sup_distance(b.final_state()) < 1e-10);
    }

    #[test]
    fn plebanski_residual_examples() {
        let g = Grid::new_2d(16, 16).unwrap();
        let z = GridFunction::zeros(g);
        let (a, b) = plebanski_flow_residual(&z, &z, &z).unwrap();
        assert_eq!(a.max_abs() + b.max_abs(), 0.0);

        // u = cos t sin x1 sin x2 at t = 0.3, u_t = -sin t sin x1 sin x2
        let t: f64 = 0.3;
        let u = GridFunction::from_fn2(g, |a, b| t.cos() * a.sin() * b.sin());
        let ut = GridFunction::from_fn2(g, |a, b| -t.sin() * a.sin() * b.sin());
        let (rt, ry) = plebanski_flow_residual(&u, &ut, &z).unwrap();
        let monge = |a: f64, b: f64| t.cos().powi(2) * ((a.sin() * b.sin()).powi(2) - (a.cos() * b.cos()).powi(2));
        let expect_t =
            GridFunction::from_fn2(g, |a, b| -t.sin() * (a.sin() * b.cos() - a.cos() * b.sin()) - monge(a, b));
        assert!(rt.sup_distance(&expect_t) < 1e-12);
        assert!(ry.sup_distance(&GridFunction::from_fn2(g, |a, b| -monge(a, b))) < 1e-12);

        let shifted = u.map(|x| x + 5.0);
        let (rt2, _) = plebanski_flow_residual(&shifted, &ut, &z).unwrap();
        assert!(rt2.sup_distance(&rt) < 1e-12);
        assert!(plebanski_flow_residual(&u, &GridFunction::zeros(Grid::new_2d(8, 8).unwrap()), &z).is_err());
    }
}
