//! Points and closed curves on a backend: unit normal bundle, shape operator, foot points and
//! embedding families.
//!
//! Sign convention: for a closed curve with unit normal `n` and `g`-unit tangent `e`, the stored
//! shape operator is `κ = g(∇_e n, e)`, which equals `g(n, Π(e, e))` with
//! `Π(x, y) = −(∇_X Y)^⊥`. The outward normal of a round chart circle of radius `r` gets
//! `κ = +1/r`. The focal-time Jacobi equation takes `y'(0) = κ` unchanged.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{Backend, Vec3};
use crate::numeric::golden_min;

/// Default tubular-neighborhood radius (aux units) under which foot points are metric-polished.
pub const TUBE_RADIUS: f64 = 0.05;

const STENCIL_STEP: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Plus,
    Minus,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Plus => 1.0,
            Side::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Side {
        match self {
            Side::Plus => Side::Minus,
            Side::Minus => Side::Plus,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Side::Plus => "+",
            Side::Minus => "-",
        }
    }
}

/// A unit normal vector `n` at `c(s)` (curves) or a unit direction at angle `2πs` (points).
#[derive(Clone, Debug, PartialEq)]
pub struct NormalFrame {
    pub s: f64,
    pub side: Side,
    pub base: Vec3,
    pub n: Vec3,
}

/// Closed curves given by named periodic parametrizations `s ∈ [0, 1)`.
#[derive(Clone, Debug, PartialEq)]
pub enum Curve {
    /// `s ↦ (L1·s, y0)` on a chart.
    HorizontalCircle { y0: f64 },
    /// Counter-clockwise round circle in chart coordinates.
    ChartCircle { center: [f64; 2], radius: f64 },
    /// Horizontal section `z = z0` of a sphere or ellipsoid; `z0 = 0` is the equator.
    Latitude { z0: f64 },
    /// Chart-linear (with minimal wraparound) or ambient-linear-then-projected interpolation.
    Interpolated {
        from: Box<Curve>,
        to: Box<Curve>,
        tau: f64,
    },
    /// `s ↦ base(s + warp·sin(2πs)/2π)`; a diffeomorphic reparametrization for `|warp| < 1`.
    Reparametrized { base: Box<Curve>, warp: f64 },
}

impl Curve {
    pub fn equator() -> Self {
        Curve::Latitude { z0: 0.0 }
    }

    pub fn point(&self, b: &Backend, s: f64) -> Vec3 {
        match self {
            Curve::HorizontalCircle { y0 } => Vec3::new(chart_periods(b)[0] * s, *y0, 0.0),
            Curve::ChartCircle { center, radius } => {
                let a = 2.0 * PI * s;
                Vec3::new(center[0] + radius * a.cos(), center[1] + radius * a.sin(), 0.0)
            }
            Curve::Latitude { z0 } => {
                let (ax, sigma) = latitude_scale(b, *z0);
                let a = 2.0 * PI * s;
                Vec3::new(ax[0] * sigma * a.cos(), ax[1] * sigma * a.sin(), *z0)
            }
            Curve::Interpolated { from, to, tau } => {
                let p0 = from.point(b, s);
                let p1 = to.point(b, s);
                match b {
                    Backend::PeriodicChart(_) => p0 + b.displacement(&p0, &p1) * *tau,
                    Backend::ImplicitSurface(_) => b.project(&(p0 + (p1 - p0) * *tau)),
                }
            }
            Curve::Reparametrized { base, warp } => base.point(b, warp_param(s, *warp)),
        }
    }

    /// `c'(s)`: closed form for the built-in curves, 5-point stencil for projected interpolants.
    pub fn tangent(&self, b: &Backend, s: f64) -> Vec3 {
        match self {
            Curve::HorizontalCircle { .. } => Vec3::new(chart_periods(b)[0], 0.0, 0.0),
            Curve::ChartCircle { radius, .. } => {
                let a = 2.0 * PI * s;
                Vec3::new(-a.sin(), a.cos(), 0.0) * (2.0 * PI * radius)
            }
            Curve::Latitude { z0 } => {
                let (ax, sigma) = latitude_scale(b, *z0);
                let a = 2.0 * PI * s;
                Vec3::new(-ax[0] * a.sin(), ax[1] * a.cos(), 0.0) * (2.0 * PI * sigma)
            }
            Curve::Interpolated { from, to, tau } => match b {
                Backend::PeriodicChart(_) => {
                    let t0 = from.tangent(b, s);
                    t0 + (to.tangent(b, s) - t0) * *tau
                }
                Backend::ImplicitSurface(_) => {
                    stencil(|u| self.point(b, u), s, STENCIL_STEP, |a, c| c - a)
                }
            },
            Curve::Reparametrized { base, warp } => {
                let dphi = 1.0 + warp * (2.0 * PI * s).cos();
                base.tangent(b, warp_param(s, *warp)) * dphi
            }
        }
    }

    fn fits(&self, b: &Backend) -> bool {
        match self {
            Curve::HorizontalCircle { .. } | Curve::ChartCircle { .. } => {
                matches!(b, Backend::PeriodicChart(_))
            }
            Curve::Latitude { z0 } => match b {
                Backend::ImplicitSurface(s) => z0.abs() < s.surface.axes()[2],
                Backend::PeriodicChart(_) => false,
            },
            Curve::Interpolated { from, to, .. } => from.fits(b) && to.fits(b),
            Curve::Reparametrized { base, warp } => warp.abs() < 1.0 && base.fits(b),
        }
    }
}

fn warp_param(s: f64, warp: f64) -> f64 {
    s + warp * (2.0 * PI * s).sin() / (2.0 * PI)
}

fn chart_periods(b: &Backend) -> [f64; 2] {
    match b {
        Backend::PeriodicChart(c) => c.periods,
        Backend::ImplicitSurface(_) => [1.0, 1.0],
    }
}

fn latitude_scale(b: &Backend, z0: f64) -> ([f64; 3], f64) {
    let ax = match b {
        Backend::ImplicitSurface(s) => s.surface.axes(),
        Backend::PeriodicChart(_) => [1.0; 3],
    };
    let sigma = (1.0 - z0 * z0 / (ax[2] * ax[2])).max(0.0).sqrt();
    (ax, sigma)
}

/// Fourth-order central difference of `f` at `s`, with `diff(a, b)` computing `b − a`.
fn stencil<F, D>(f: F, s: f64, h: f64, diff: D) -> Vec3
where
    F: Fn(f64) -> Vec3,
    D: Fn(Vec3, Vec3) -> Vec3,
{
    let (m2, m1, p1, p2) = (f(s - 2.0 * h), f(s - h), f(s + h), f(s + 2.0 * h));
    (diff(m1, p1) * 8.0 - diff(m2, p2)) / (12.0 * h)
}

#[derive(Clone, Debug, PartialEq)]
pub enum Shape {
    Point(Vec3),
    Curve(Curve),
}

/// The submanifold `N`: a point or a closed curve sampled at `samples` parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct SubmanifoldSpec {
    pub shape: Shape,
    pub samples: usize,
}

impl SubmanifoldSpec {
    pub fn point(p: Vec3) -> Self {
        SubmanifoldSpec {
            shape: Shape::Point(p),
            samples: 1,
        }
    }

    pub fn curve(c: Curve, samples: usize) -> Self {
        SubmanifoldSpec {
            shape: Shape::Curve(c),
            samples,
        }
    }

    pub fn dim(&self) -> usize {
        match self.shape {
            Shape::Point(_) => 0,
            Shape::Curve(_) => 1,
        }
    }

    pub fn curve_ref(&self) -> Option<&Curve> {
        match &self.shape {
            Shape::Curve(c) => Some(c),
            Shape::Point(_) => None,
        }
    }

    /// Sample parameters `s_i = i / samples` and their points.
    pub fn sample_points(&self, b: &Backend) -> Vec<(f64, Vec3)> {
        match &self.shape {
            Shape::Point(p) => vec![(0.0, b.canonical(p))],
            Shape::Curve(c) => (0..self.samples)
                .map(|i| {
                    let s = i as f64 / self.samples as f64;
                    (s, b.canonical(&c.point(b, s)))
                })
                .collect(),
        }
    }

    /// Checks compatibility with the backend, closure, immersion and embeddedness.
    pub fn validate(&self, b: &Backend) -> Result<()> {
        match &self.shape {
            Shape::Point(p) => {
                if let Backend::ImplicitSurface(s) = b {
                    if s.surface.level(p).abs() > 1e-9 {
                        return Err(Error::InvalidArgument("point is not on the surface".into()));
                    }
                }
                Ok(())
            }
            Shape::Curve(c) => {
                if !c.fits(b) {
                    return Err(Error::InvalidArgument("curve does not fit this backend".into()));
                }
                if self.samples < 3 {
                    return Err(Error::InvalidArgument("a closed curve needs at least 3 samples".into()));
                }
                if b.aux_distance(&c.point(b, 0.0), &c.point(b, 1.0)) > 1e-10 {
                    return Err(Error::InvalidArgument("curve is not closed".into()));
                }
                let pts = self.sample_points(b);
                for (s, p) in &pts {
                    let speed = b.norm(p, &c.tangent(b, *s))?;
                    if speed < 1e-6 {
                        return Err(Error::DegenerateTangent { s: *s });
                    }
                }
                let k = pts.len();
                let min_step = (0..k)
                    .map(|i| b.aux_distance(&pts[i].1, &pts[(i + 1) % k].1))
                    .fold(f64::INFINITY, f64::min);
                for i in 0..k {
                    for j in (i + 2)..k {
                        if i == 0 && j == k - 1 {
                            continue;
                        }
                        if b.aux_distance(&pts[i].1, &pts[j].1) < 0.5 * min_step {
                            return Err(Error::InvalidArgument(format!(
                                "curve self-intersects near s = {:.6} and s = {:.6}",
                                pts[i].0, pts[j].0
                            )));
                        }
                    }
                }
                Ok(())
            }
        }
    }

    /// The frame labeled `(s, side)`: unit normal for curves, direction at angle `2πs` for points.
    pub fn frame(&self, b: &Backend, s: f64, side: Side) -> Result<NormalFrame> {
        match &self.shape {
            Shape::Point(p) => point_direction(b, p, s),
            Shape::Curve(_) => unit_normal(b, self, s, side),
        }
    }

    /// The direction set marched by atlases and scans: `m` normals per side for curves
    /// (all `+` first, then all `−`), `m` circle directions for points.
    pub fn directions(&self, b: &Backend, m: usize) -> Result<Vec<NormalFrame>> {
        match &self.shape {
            Shape::Point(p) => direction_circle(b, p, m),
            Shape::Curve(_) => {
                let mut out = Vec::with_capacity(2 * m);
                for side in [Side::Plus, Side::Minus] {
                    for i in 0..m {
                        out.push(unit_normal(b, self, i as f64 / m as f64, side)?);
                    }
                }
                Ok(out)
            }
        }
    }
}

/// `g`-unit normal to the curve at `c(s)`. The `+` side is the left normal: `det[c', n] > 0`
/// in the chart, `n ∥ ν × c'` on an implicit surface with outward normal `ν`.
pub fn unit_normal(b: &Backend, n: &SubmanifoldSpec, s: f64, side: Side) -> Result<NormalFrame> {
    let c = n
        .curve_ref()
        .ok_or_else(|| Error::InvalidArgument("unit_normal needs a curve; use direction_circle".into()))?;
    let base = c.point(b, s);
    let tangent = c.tangent(b, s);
    if !(tangent.norm() > 1e-12) {
        return Err(Error::DegenerateTangent { s });
    }
    let raw = match b {
        Backend::PeriodicChart(_) => {
            let g = b.chart_metric(&base)?;
            let det = g.determinant();
            let (wx, wy) = (-tangent.y, tangent.x);
            Vec3::new(
                (g[(1, 1)] * wx - g[(0, 1)] * wy) / det,
                (-g[(1, 0)] * wx + g[(0, 0)] * wy) / det,
                0.0,
            )
        }
        Backend::ImplicitSurface(_) => b.surface_normal(&base).cross(&tangent),
    };
    if !(raw.norm() > 1e-12) {
        return Err(Error::DegenerateTangent { s });
    }
    let unit = b.normalize(&base, &raw)?;
    Ok(NormalFrame {
        s,
        side,
        base: b.canonical(&base),
        n: unit * side.sign(),
    })
}

/// Unit direction at `p` with Euclidean chart (or tangent-basis) angle `2πs`.
pub fn point_direction(b: &Backend, p: &Vec3, s: f64) -> Result<NormalFrame> {
    let (e1, e2) = b.tangent_basis(p);
    let a = 2.0 * PI * s;
    let raw = e1 * a.cos() + e2 * a.sin();
    Ok(NormalFrame {
        s,
        side: Side::Plus,
        base: b.canonical(p),
        n: b.normalize(p, &raw)?,
    })
}

/// `m` unit directions at equal Euclidean angles, starting from `(1, 0)`.
pub fn direction_circle(b: &Backend, p: &Vec3, m: usize) -> Result<Vec<NormalFrame>> {
    (0..m).map(|k| point_direction(b, p, k as f64 / m as f64)).collect()
}

/// Scalar shape operator `κ = g(∇_{c'} n, c') / g(c', c')` from a fourth-order difference of the
/// unit normal field along `c`.
pub fn shape_operator(b: &Backend, n: &SubmanifoldSpec, s: f64, side: Side) -> Result<f64> {
    let c = n
        .curve_ref()
        .ok_or_else(|| Error::InvalidArgument("points have no shape operator".into()))?;
    let h = STENCIL_STEP;
    let normal_at = |u: f64| unit_normal(b, n, u, side).map(|f| f.n);
    let (m2, m1, p1, p2) = (normal_at(s - 2.0 * h)?, normal_at(s - h)?, normal_at(s + h)?, normal_at(s + 2.0 * h)?);
    let dn = ((p1 - m1) * 8.0 - (p2 - m2)) / (12.0 * h);
    let frame = unit_normal(b, n, s, side)?;
    let base = c.point(b, s);
    let tangent = c.tangent(b, s);
    let cov = b.covariant_derivative(&base, &tangent, &frame.n, &dn)?;
    Ok(b.metric_eval(&base, &cov, &tangent)? / b.metric_eval(&base, &tangent, &tangent)?)
}

/// `1.1 · max |κ|` over all samples and both sides.
pub fn principal_curvature_bound(b: &Backend, n: &SubmanifoldSpec) -> Result<f64> {
    if n.dim() == 0 {
        return Err(Error::InvalidArgument("points have no shape operator".into()));
    }
    let mut worst: f64 = 0.0;
    for i in 0..n.samples {
        let s = i as f64 / n.samples as f64;
        for side in [Side::Plus, Side::Minus] {
            worst = worst.max(shape_operator(b, n, s, side)?.abs());
        }
    }
    Ok(1.1 * worst)
}

#[derive(Clone, Debug, PartialEq)]
pub struct FootPoint {
    pub s: f64,
    pub point: Vec3,
    /// Auxiliary distance from the query to `c(s)`.
    pub aux: f64,
    /// `g`-length estimate of the connecting segment, or `aux` when `coarse`.
    pub d_est: f64,
    pub coarse: bool,
}

pub fn foot_point(b: &Backend, n: &SubmanifoldSpec, q: &Vec3) -> Result<FootPoint> {
    foot_point_with(b, n, q, TUBE_RADIUS)
}

/// Nearest sample in aux distance (ties to the smallest `s`), polished by golden section to
/// `1e-8` in `s`.
pub fn foot_point_with(b: &Backend, n: &SubmanifoldSpec, q: &Vec3, tube: f64) -> Result<FootPoint> {
    let (s, point) = match &n.shape {
        Shape::Point(p) => (0.0, b.canonical(p)),
        Shape::Curve(c) => {
            let m = n.samples as f64;
            let mut best = (0usize, f64::INFINITY);
            for i in 0..n.samples {
                let d = b.aux_distance(&c.point(b, i as f64 / m), q);
                if d < best.1 {
                    best = (i, d);
                }
            }
            let s0 = best.0 as f64 / m;
            let (s, _) = golden_min(|u| b.aux_distance(&c.point(b, u), q), s0 - 1.0 / m, s0 + 1.0 / m, 1e-8);
            let s = s.rem_euclid(1.0);
            (s, b.canonical(&c.point(b, s)))
        }
    };
    let aux = b.aux_distance(&point, q);
    if aux < tube {
        let gap = b.displacement(&point, q);
        let d_est = b.segment_length(&point, &gap)?;
        Ok(FootPoint {
            s,
            point,
            aux,
            d_est,
            coarse: false,
        })
    } else {
        Ok(FootPoint {
            s,
            point,
            aux,
            d_est: aux,
            coarse: true,
        })
    }
}

/// Interpolates two submanifolds of the same kind; `τ = 0` and `τ = 1` return the endpoints.
pub fn embedding_family(
    b: &Backend,
    n0: &SubmanifoldSpec,
    n1: &SubmanifoldSpec,
    tau: f64,
) -> Result<SubmanifoldSpec> {
    if tau == 0.0 {
        return Ok(n0.clone());
    }
    if tau == 1.0 {
        return Ok(SubmanifoldSpec {
            samples: n0.samples,
            ..n1.clone()
        });
    }
    let shape = match (&n0.shape, &n1.shape) {
        (Shape::Point(p0), Shape::Point(p1)) => Shape::Point(match b {
            Backend::PeriodicChart(_) => b.canonical(&(p0 + b.displacement(p0, p1) * tau)),
            Backend::ImplicitSurface(_) => b.project(&(p0 + (p1 - p0) * tau)),
        }),
        (Shape::Curve(c0), Shape::Curve(c1)) => Shape::Curve(Curve::Interpolated {
            from: Box::new(c0.clone()),
            to: Box::new(c1.clone()),
            tau,
        }),
        _ => {
            return Err(Error::InvalidArgument(
                "embedding family endpoints must have the same dimension".into(),
            ))
        }
    };
    Ok(SubmanifoldSpec {
        shape,
        samples: n0.samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::MetricField;

    fn flat() -> Backend {
        Backend::flat_torus([1.0, 1.0])
    }

    fn line(y0: f64) -> SubmanifoldSpec {
        SubmanifoldSpec::curve(Curve::HorizontalCircle { y0 }, 256)
    }

    fn warped(a: f64) -> Backend {
        Backend::chart([1.0, 1.0], MetricField::WarpedDiag { amplitude: a, period: 1.0 })
    }

    fn circle(r: f64) -> SubmanifoldSpec {
        SubmanifoldSpec::curve(
            Curve::ChartCircle {
                center: [0.5, 0.5],
                radius: r,
            },
            128,
        )
    }

    #[test]
    fn flat_line_normals() {
        let n = line(0.0);
        let plus = unit_normal(&flat(), &n, 0.3, Side::Plus).unwrap();
        let minus = unit_normal(&flat(), &n, 0.3, Side::Minus).unwrap();
        assert_eq!(plus.n, Vec3::new(0.0, 1.0, 0.0));
        assert_eq!(minus.n, Vec3::new(0.0, -1.0, 0.0));
    }

    /// For `diag(1, f²)` and `c' = (1, 0)`, solving `g(n, c') = 0`, `g(n, n) = 1` by hand gives
    /// `n = (0, ±1/f)`.
    #[test]
    fn warped_line_normals() {
        let b = warped(0.2);
        for &s in &[0.0, 0.1, 0.25, 0.6] {
            let f = 1.0 + 0.2 * (2.0 * PI * s).sin();
            let fr = unit_normal(&b, &line(0.0), s, Side::Plus).unwrap();
            assert!(fr.n.x.abs() < 1e-15);
            assert!((fr.n.y - 1.0 / f).abs() < 1e-14);
        }
    }

    #[test]
    fn equator_normal_points_north() {
        let b = Backend::sphere(1.0);
        let n = SubmanifoldSpec::curve(Curve::equator(), 64);
        for i in 0..8 {
            let fr = unit_normal(&b, &n, i as f64 / 8.0, Side::Plus).unwrap();
            assert!((fr.n - Vec3::z()).norm() < 1e-8);
        }
    }

    #[test]
    fn normal_bundle_residuals() {
        let phi = crate::geometry::ScalarField::SinProduct {
            amplitude: 1.0,
            periods: [1.0, 1.0],
        };
        let b = warped(0.2).conformal_family(&phi, 0.3);
        for n in [line(0.1), circle(0.2)] {
            let c = n.curve_ref().unwrap();
            let mut prev: Option<Vec3> = None;
            for i in 0..n.samples {
                let s = i as f64 / n.samples as f64;
                for side in [Side::Plus, Side::Minus] {
                    let fr = unit_normal(&b, &n, s, side).unwrap();
                    let p = c.point(&b, s);
                    assert!((b.norm(&p, &fr.n).unwrap() - 1.0).abs() < 1e-10);
                    assert!(b.metric_eval(&p, &fr.n, &c.tangent(&b, s)).unwrap().abs() < 1e-10);
                }
                let fr = unit_normal(&b, &n, s, Side::Plus).unwrap();
                if let Some(prev) = prev {
                    assert!(prev.dot(&fr.n) > 0.0, "side flipped near s = {s}");
                }
                prev = Some(fr.n);
            }
        }
    }

    #[test]
    fn direction_circle_examples() {
        let b = flat();
        let dirs = direction_circle(&b, &Vec3::zeros(), 4).unwrap();
        let want = [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)];
        for (d, w) in dirs.iter().zip(want) {
            assert!((d.n - Vec3::new(w.0, w.1, 0.0)).norm() < 1e-15);
        }
        let one = direction_circle(&b, &Vec3::zeros(), 1).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].n, Vec3::x());

        let w = warped(0.2);
        for d in direction_circle(&w, &Vec3::new(0.3, 0.1, 0.0), 37).unwrap() {
            assert!((w.norm(&d.base, &d.n).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn shape_operator_ground_truths() {
        assert!(shape_operator(&flat(), &line(0.0), 0.3, Side::Plus).unwrap().abs() < 1e-12);

        let sphere = Backend::sphere(1.0);
        let eq = SubmanifoldSpec::curve(Curve::equator(), 64);
        for i in 0..16 {
            let s = i as f64 / 16.0;
            assert!(shape_operator(&sphere, &eq, s, Side::Plus).unwrap().abs() < 1e-6);
        }

        // outward normal of a CCW circle is the − side
        let r = 0.2;
        for i in 0..16 {
            let s = i as f64 / 16.0;
            let out = shape_operator(&flat(), &circle(r), s, Side::Minus).unwrap();
            let inn = shape_operator(&flat(), &circle(r), s, Side::Plus).unwrap();
            assert!((out - 1.0 / r).abs() < 1e-4, "{out}");
            assert!((out + inn).abs() < 1e-10);
        }
    }

    /// Independent route: `κ = g(n, Π(e, e)) = −g(n, ∇_{c'} c') / g(c', c')` with `c''` from a
    /// fine central difference of the closed-form tangent.
    #[test]
    fn shape_operator_matches_second_fundamental_form() {
        let b = warped(0.2).conformal_family(
            &crate::geometry::ScalarField::SinProduct {
                amplitude: 0.5,
                periods: [1.0, 1.0],
            },
            1.0,
        );
        for n in [line(0.13), circle(0.15)] {
            let c = n.curve_ref().unwrap();
            for i in 0..8 {
                let s = i as f64 / 8.0 + 0.01;
                let h = 1e-5;
                let p = c.point(&b, s);
                let t = c.tangent(&b, s);
                let dt = (c.tangent(&b, s + h) - c.tangent(&b, s - h)) / (2.0 * h);
                let acc = dt + b.christoffel_apply(&p, &t).unwrap();
                for side in [Side::Plus, Side::Minus] {
                    let fr = unit_normal(&b, &n, s, side).unwrap();
                    let want = -b.metric_eval(&p, &fr.n, &acc).unwrap() / b.metric_eval(&p, &t, &t).unwrap();
                    let got = shape_operator(&b, &n, s, side).unwrap();
                    assert!((got - want).abs() < 1e-6, "{got} vs {want}");
                }
            }
        }
    }

    #[test]
    fn shape_operator_is_parametrization_invariant() {
        let b = warped(0.2);
        let base = Curve::ChartCircle {
            center: [0.4, 0.5],
            radius: 0.2,
        };
        let n0 = SubmanifoldSpec::curve(base.clone(), 64);
        let warp = 0.4;
        let n1 = SubmanifoldSpec::curve(
            Curve::Reparametrized {
                base: Box::new(base),
                warp,
            },
            64,
        );
        for i in 0..32 {
            let s = i as f64 / 32.0;
            let k1 = shape_operator(&b, &n1, s, Side::Minus).unwrap();
            let k0 = shape_operator(&b, &n0, warp_param(s, warp), Side::Minus).unwrap();
            assert!((k0 - k1).abs() < 1e-6, "{k0} vs {k1}");
        }
    }

    #[test]
    fn curvature_bound_examples() {
        assert!(principal_curvature_bound(&flat(), &line(0.0)).unwrap() <= 1.1e-6);
        let r = 0.2;
        let d = principal_curvature_bound(&flat(), &circle(r)).unwrap();
        assert!((d - 1.1 / r).abs() < 1e-3);
        let phi = crate::geometry::ScalarField::SinProduct {
            amplitude: 1.0,
            periods: [1.0, 1.0],
        };
        let same = flat().conformal_family(&phi, 0.0);
        assert_eq!(
            principal_curvature_bound(&same, &circle(r)).unwrap(),
            principal_curvature_bound(&flat(), &circle(r)).unwrap()
        );
        assert!(principal_curvature_bound(&flat(), &SubmanifoldSpec::point(Vec3::zeros())).is_err());
    }

    #[test]
    fn curvature_bound_moves_continuously_along_embedding_family() {
        let b = warped(0.2);
        let n0 = SubmanifoldSpec::curve(
            Curve::ChartCircle {
                center: [0.5, 0.5],
                radius: 0.2,
            },
            64,
        );
        let n1 = SubmanifoldSpec::curve(
            Curve::ChartCircle {
                center: [0.5, 0.5],
                radius: 0.3,
            },
            64,
        );
        let d0 = principal_curvature_bound(&b, &n0).unwrap();
        let mut prev = 0.0;
        for &tau in &[0.025, 0.05, 0.1, 0.2] {
            let nt = embedding_family(&b, &n0, &n1, tau).unwrap();
            let dev = (principal_curvature_bound(&b, &nt).unwrap() - d0).abs();
            assert!(dev <= 20.0 * tau, "tau {tau}: {dev}");
            assert!(dev >= prev);
            prev = dev;
        }
    }

    #[test]
    fn foot_point_examples() {
        let b = flat();
        let n = line(0.0);
        let f = foot_point(&b, &n, &Vec3::new(0.3, 0.2, 0.0)).unwrap();
        assert!((f.s - 0.3).abs() < 1e-8);
        assert!((f.d_est - 0.2).abs() < 1e-12);
        assert!(f.coarse);
        let f = foot_point(&b, &n, &Vec3::new(0.77, 0.0, 0.0)).unwrap();
        assert!(f.d_est <= 1e-8);
        assert!(!f.coarse);
        let f = foot_point(&b, &n, &Vec3::new(0.3, 0.5, 0.0)).unwrap();
        assert!((f.s - 0.3).abs() < 1e-8);
        assert!((f.d_est - 0.5).abs() < 1e-12);
        let f = foot_point_with(&b, &n, &Vec3::new(0.3, 0.02, 0.0), 0.05).unwrap();
        assert!((f.d_est - 0.02).abs() < 1e-12 && !f.coarse);
    }

    #[test]
    fn embedding_family_examples() {
        let b = flat();
        let n0 = line(0.0);
        let n1 = line(0.1);
        let at0 = embedding_family(&b, &n0, &n1, 0.0).unwrap();
        let c0 = n0.curve_ref().unwrap();
        for i in 0..10 {
            let s = i as f64 / 10.0;
            assert!((at0.curve_ref().unwrap().point(&b, s) - c0.point(&b, s)).norm() <= 1e-15);
        }
        let at1 = embedding_family(&b, &n0, &n1, 1.0).unwrap();
        assert_eq!(at1.curve_ref().unwrap().point(&b, 0.4).y, 0.1);
        let mid = embedding_family(&b, &n0, &n1, 0.5).unwrap();
        assert!((mid.curve_ref().unwrap().point(&b, 0.4).y - 0.05).abs() < 1e-15);
        // wraparound picks the short way: y = 0.95 → y = 0.05 passes through 0
        let wrap = embedding_family(&b, &line(0.95), &n1, 0.5).unwrap();
        let y = b.canonical(&wrap.curve_ref().unwrap().point(&b, 0.2)).y;
        assert!((y - 0.025).abs() < 1e-12, "{y}");

        let s = Backend::sphere(1.0);
        let eq = SubmanifoldSpec::curve(Curve::equator(), 64);
        let lat = SubmanifoldSpec::curve(Curve::Latitude { z0: 0.2 }, 64);
        let half = embedding_family(&s, &eq, &lat, 0.5).unwrap();
        half.validate(&s).unwrap();
        let p = half.curve_ref().unwrap().point(&s, 0.3);
        assert!((p.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn validation_catches_problems() {
        let b = flat();
        assert!(line(0.0).validate(&b).is_ok());
        assert!(SubmanifoldSpec::curve(Curve::equator(), 16).validate(&b).is_err());
        let double = SubmanifoldSpec::curve(
            Curve::Reparametrized {
                base: Box::new(Curve::HorizontalCircle { y0: 0.0 }),
                warp: 1.5,
            },
            64,
        );
        assert!(double.validate(&b).is_err());
    }
}
