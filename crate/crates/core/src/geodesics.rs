//! Fixed-step RK4 integration of the geodesic equation, exponential maps, and the
//! finite-difference Jacobian of the normal exponential map.

use nalgebra::Matrix2;

use crate::error::{Error, Result};
use crate::geometry::{Backend, Vec3};
use crate::submanifold::{NormalFrame, SubmanifoldSpec};

pub const DEFAULT_DT: f64 = 1e-3;
/// Allowed speed drift per unit length.
pub const DRIFT_BUDGET: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sample {
    pub t: f64,
    /// Canonical position (chart-reduced or on the surface).
    pub x: Vec3,
    pub v: Vec3,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    TMax,
    Event,
    Error,
}

#[derive(Clone, Debug)]
pub struct GeodesicPath {
    pub start: Vec3,
    pub initial_velocity: Vec3,
    pub dt: f64,
    /// Initial `g`-speed, conserved along the path.
    pub speed: f64,
    pub samples: Vec<Sample>,
    pub termination: Termination,
    /// `max_t |‖γ'(t)‖_g − ‖γ'(0)‖_g|`
    pub max_drift: f64,
    /// Scalar Jacobi field `(y, y')` at every sample, when integrated alongside.
    pub jacobi: Option<Vec<[f64; 2]>>,
}

/// Extended RK4 state: position, velocity and an optional scalar Jacobi field `(y, y')`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct State {
    pub x: Vec3,
    pub v: Vec3,
    pub y: f64,
    pub yd: f64,
}

fn accel(b: &Backend, x: &Vec3, v: &Vec3) -> Result<Vec3> {
    Ok(-b.christoffel_apply(x, v)?)
}

/// One RK4 step of `x' = v, v' = −Γ(v, v)` and, when `jacobi` is set, `y'' = −K(x) y`.
/// Implicit surfaces are re-projected afterwards and the speed restored to `speed`.
pub(crate) fn rk4_step(b: &Backend, s: &State, h: f64, speed: f64, jacobi: bool) -> Result<State> {
    let k = |x: &Vec3, v: &Vec3, y: f64, yd: f64| -> Result<(Vec3, Vec3, f64, f64)> {
        let a = accel(b, x, v)?;
        let ydd = if jacobi { -b.gauss_curvature(x)? * y } else { 0.0 };
        Ok((*v, a, yd, ydd))
    };
    let (k1x, k1v, k1y, k1d) = k(&s.x, &s.v, s.y, s.yd)?;
    let (k2x, k2v, k2y, k2d) = k(
        &(s.x + k1x * (0.5 * h)),
        &(s.v + k1v * (0.5 * h)),
        s.y + 0.5 * h * k1y,
        s.yd + 0.5 * h * k1d,
    )?;
    let (k3x, k3v, k3y, k3d) = k(
        &(s.x + k2x * (0.5 * h)),
        &(s.v + k2v * (0.5 * h)),
        s.y + 0.5 * h * k2y,
        s.yd + 0.5 * h * k2d,
    )?;
    let (k4x, k4v, k4y, k4d) = k(&(s.x + k3x * h), &(s.v + k3v * h), s.y + h * k3y, s.yd + h * k3d)?;
    let mut x = s.x + (k1x + k2x * 2.0 + k3x * 2.0 + k4x) * (h / 6.0);
    let mut v = s.v + (k1v + k2v * 2.0 + k3v * 2.0 + k4v) * (h / 6.0);
    if let Backend::ImplicitSurface(_) = b {
        x = b.project(&x);
        v = b.tangent_project(&x, &v);
        let now = b.norm(&x, &v)?;
        if now > 0.0 {
            v *= speed / now;
        }
    }
    Ok(State {
        x,
        v,
        y: s.y + h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y),
        yd: s.yd + h / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d),
    })
}

/// Integrates the geodesic with initial condition `(p, v)` on `[0, t_max]` with step `dt`
/// (the last step may be partial).
pub fn integrate_geodesic(b: &Backend, p: &Vec3, v: &Vec3, t_max: f64, dt: f64) -> Result<GeodesicPath> {
    integrate_until(b, p, v, t_max, dt, DRIFT_BUDGET, |_| false)
}

/// As [`integrate_geodesic`], also integrating `y'' + K(γ(t)) y = 0` from `(y0, yd0)` with the
/// same steps. `v` should be `g`-unit.
pub fn integrate_with_jacobi(
    b: &Backend,
    p: &Vec3,
    v: &Vec3,
    jacobi: (f64, f64),
    t_max: f64,
    dt: f64,
) -> Result<GeodesicPath> {
    integrate_inner(b, p, v, t_max, dt, DRIFT_BUDGET, Some(jacobi), |_| false)
}

/// As [`integrate_geodesic`], stopping early (termination `Event`) once `stop` returns true for a
/// freshly recorded sample.
pub fn integrate_until<F: FnMut(&Sample) -> bool>(
    b: &Backend,
    p: &Vec3,
    v: &Vec3,
    t_max: f64,
    dt: f64,
    drift_budget: f64,
    stop: F,
) -> Result<GeodesicPath> {
    integrate_inner(b, p, v, t_max, dt, drift_budget, None, stop)
}

#[allow(clippy::too_many_arguments)]
fn integrate_inner<F: FnMut(&Sample) -> bool>(
    b: &Backend,
    p: &Vec3,
    v: &Vec3,
    t_max: f64,
    dt: f64,
    drift_budget: f64,
    jacobi: Option<(f64, f64)>,
    mut stop: F,
) -> Result<GeodesicPath> {
    if !(dt > 0.0) || !(t_max >= 0.0) {
        return Err(Error::InvalidArgument(format!("need dt > 0 and t_max ≥ 0, got dt={dt}, t_max={t_max}")));
    }
    let x0 = match b {
        Backend::PeriodicChart(_) => *p,
        Backend::ImplicitSurface(_) => b.project(p),
    };
    let v0 = b.tangent_project(&x0, v);
    let speed = b.norm(&x0, &v0)?;
    let mut path = GeodesicPath {
        start: b.canonical(&x0),
        initial_velocity: v0,
        dt,
        speed,
        samples: vec![Sample {
            t: 0.0,
            x: b.canonical(&x0),
            v: v0,
        }],
        termination: Termination::TMax,
        max_drift: 0.0,
        jacobi: jacobi.map(|(y, yd)| vec![[y, yd]]),
    };
    let steps = (t_max / dt).ceil() as usize;
    let (y0, yd0) = jacobi.unwrap_or((0.0, 0.0));
    let mut state = State {
        x: x0,
        v: v0,
        y: y0,
        yd: yd0,
    };
    for k in 0..steps {
        let t0 = k as f64 * dt;
        let h = (t_max - t0).min(dt);
        if h <= 1e-15 {
            break;
        }
        state = rk4_step(b, &state, h, speed, jacobi.is_some())?;
        let t = if k + 1 == steps { t_max } else { (k + 1) as f64 * dt };
        let drift = (b.norm(&state.x, &state.v)? - speed).abs();
        path.max_drift = path.max_drift.max(drift);
        let budget = drift_budget * t.max(1.0) * speed.max(1.0);
        if drift > budget {
            return Err(Error::DriftExceeded { t, drift, budget });
        }
        // keep raw chart coordinates bounded
        state.x = b.canonical(&state.x);
        let sample = Sample {
            t,
            x: state.x,
            v: state.v,
        };
        path.samples.push(sample);
        if let Some(j) = path.jacobi.as_mut() {
            j.push([state.y, state.yd]);
        }
        if stop(&sample) {
            path.termination = Termination::Event;
            break;
        }
    }
    Ok(path)
}

impl GeodesicPath {
    pub fn t_end(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.t)
    }

    pub fn endpoint(&self) -> Vec3 {
        self.samples.last().map_or(self.start, |s| s.x)
    }

    /// Position and velocity at time `t ∈ [0, t_end]`, by a partial RK4 step from the nearest
    /// earlier sample.
    pub fn state_at(&self, b: &Backend, t: f64) -> Result<(Vec3, Vec3)> {
        let t = t.clamp(0.0, self.t_end());
        let mut k = ((t / self.dt).floor() as usize).min(self.samples.len() - 1);
        while k > 0 && self.samples[k].t > t {
            k -= 1;
        }
        let s = &self.samples[k];
        let h = t - s.t;
        if h <= 0.0 {
            return Ok((s.x, s.v));
        }
        let next = rk4_step(
            b,
            &State {
                x: s.x,
                v: s.v,
                y: 0.0,
                yd: 0.0,
            },
            h,
            self.speed,
            false,
        )?;
        Ok((b.canonical(&next.x), next.v))
    }

    pub fn point_at(&self, b: &Backend, t: f64) -> Result<Vec3> {
        Ok(self.state_at(b, t)?.0)
    }
}

/// Initial scalar Jacobi data along the frame's geodesic: `(1, κ)` for curves, `(0, 1)` for points.
pub fn jacobi_initial(b: &Backend, n: &SubmanifoldSpec, frame: &NormalFrame) -> Result<(f64, f64)> {
    match n.dim() {
        0 => Ok((0.0, 1.0)),
        _ => Ok((1.0, crate::submanifold::shape_operator(b, n, frame.s, frame.side)?)),
    }
}

/// `exp_p(v)`: unit-speed integration along `v/‖v‖_g` up to time `‖v‖_g`.
pub fn exp_map(b: &Backend, p: &Vec3, v: &Vec3) -> Result<Vec3> {
    exp_map_with(b, p, v, DEFAULT_DT)
}

pub fn exp_map_with(b: &Backend, p: &Vec3, v: &Vec3, dt: f64) -> Result<Vec3> {
    let len = b.norm(p, v)?;
    if len == 0.0 {
        return Ok(*p);
    }
    let path = integrate_geodesic(b, p, &(v / len), len, dt)?;
    Ok(path.endpoint())
}

/// `γ_n(t)` for a unit normal frame.
pub fn normal_exp(b: &Backend, frame: &NormalFrame, t: f64) -> Result<Vec3> {
    normal_exp_with(b, frame, t, DEFAULT_DT)
}

pub fn normal_exp_with(b: &Backend, frame: &NormalFrame, t: f64, dt: f64) -> Result<Vec3> {
    if t == 0.0 {
        return Ok(frame.base);
    }
    Ok(integrate_geodesic(b, &frame.base, &frame.n, t, dt)?.endpoint())
}

#[derive(Clone, Debug)]
pub struct JacobianReport {
    /// Columns `∂/∂s` and `∂/∂r` in chart coordinates or in the tangent basis at the image.
    pub matrix: Matrix2<f64>,
    pub det: f64,
    /// Richardson disagreement between steps `fd` and `fd/2` exceeded 10%.
    pub warning: bool,
}

/// Finite-difference Jacobian of `(s, r) ↦ ℰ(n(s), r)` at `(frame.s, t)`.
pub fn normal_exp_jacobian(
    b: &Backend,
    n: &SubmanifoldSpec,
    frame: &NormalFrame,
    t: f64,
    fd: f64,
) -> Result<JacobianReport> {
    if !(t > 0.0) {
        return Err(Error::InvalidArgument("normal_exp_jacobian needs t > 0".into()));
    }
    let at = |s: f64| -> Result<(Vec3, Vec3)> {
        let f = n.frame(b, s, frame.side)?;
        let path = integrate_geodesic(b, &f.base, &f.n, t, DEFAULT_DT)?;
        let last = path.samples.last().expect("non-empty path");
        Ok((last.x, last.v))
    };
    let (centre, vel) = at(frame.s)?;
    let col = |h: f64| -> Result<Vec3> {
        let (plus, _) = at(frame.s + h)?;
        let (minus, _) = at(frame.s - h)?;
        Ok(b.displacement(&minus, &plus) / (2.0 * h))
    };
    let coarse = col(fd)?;
    let fine = col(0.5 * fd)?;
    let diff = (coarse - fine).norm();
    let warning = diff > 0.1 * fine.norm() && diff > 1e-9;
    let (matrix, det) = jacobian_in_basis(b, &centre, &fine, &vel);
    Ok(JacobianReport { matrix, det, warning })
}

fn jacobian_in_basis(b: &Backend, at: &Vec3, ds: &Vec3, dr: &Vec3) -> (Matrix2<f64>, f64) {
    let (e1, e2) = b.tangent_basis(at);
    let m = Matrix2::new(ds.dot(&e1), dr.dot(&e1), ds.dot(&e2), dr.dot(&e2));
    (m, m.determinant())
}

/// First sign change of `det dℰ` along the frame's geodesic in `(0, t_max]`, refined by bisection.
/// Returns the bracket.
pub fn focal_bracket_by_jacobian(
    b: &Backend,
    n: &SubmanifoldSpec,
    frame: &NormalFrame,
    t_max: f64,
    dt: f64,
    fd: f64,
) -> Result<Option<(f64, f64)>> {
    let path_for = |s: f64| -> Result<GeodesicPath> {
        let f = n.frame(b, s, frame.side)?;
        integrate_geodesic(b, &f.base, &f.n, t_max, dt)
    };
    let centre = path_for(frame.s)?;
    let plus = path_for(frame.s + fd)?;
    let minus = path_for(frame.s - fd)?;
    let det_at_sample = |k: usize| {
        let ds = b.displacement(&minus.samples[k].x, &plus.samples[k].x) / (2.0 * fd);
        jacobian_in_basis(b, &centre.samples[k].x, &ds, &centre.samples[k].v).1
    };
    let det_at = |t: f64| -> Result<f64> {
        let (xc, vc) = centre.state_at(b, t)?;
        let xp = plus.point_at(b, t)?;
        let xm = minus.point_at(b, t)?;
        let ds = b.displacement(&xm, &xp) / (2.0 * fd);
        Ok(jacobian_in_basis(b, &xc, &ds, &vc).1)
    };
    let len = centre.samples.len().min(plus.samples.len()).min(minus.samples.len());
    if len < 2 {
        return Ok(None);
    }
    let reference = det_at_sample(1).signum();
    for k in 2..len {
        let d = det_at_sample(k);
        if d.signum() != reference && d != 0.0 {
            let lo = centre.samples[k - 1].t;
            let hi = centre.samples[k].t;
            let (lo, hi) = crate::numeric::bisect_boundary(
                |t| det_at(t).map(|d| d.signum() != reference),
                lo,
                hi,
                1e-10,
            )?;
            return Ok(Some((lo, hi)));
        }
    }
    Ok(None)
}
