//! Model surfaces with Riemannian metrics.
//!
//! Two backends cover every scenario in the lab:
//!
//! * [`PeriodicChart`]: a flat torus chart `[0, L1) × [0, L2)` carrying an arbitrary smooth,
//!   periodic metric field. Christoffel symbols and the Gauss curvature come from central
//!   finite differences of the metric, so metrics can be treated as black boxes.
//! * [`ImplicitSurface`]: a level set `{h = 0}` in 3-space (sphere or ellipsoid) carrying the
//!   metric `e^{2ψ}·(induced)`.
//!
//! Points and tangent vectors are stored as 3-vectors. Chart points keep `z = 0`.

use std::f64::consts::PI;

use nalgebra::{Matrix2, Matrix4, Vector2, Vector3};

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;

/// Tolerance below which `det g` counts as singular.
pub const SINGULAR_TOL: f64 = 1e-12;

/// Smooth scalar fields used as conformal factors and metric perturbations.
///
/// Fields are evaluated on raw coordinates: chart fields read `(x, y)`, ambient fields read
/// `(x, y, z)`.
#[derive(Clone, Debug, PartialEq)]
pub enum ScalarField {
    Constant { value: f64 },
    /// `amplitude · sin(2πx/L1) · sin(2πy/L2)`
    SinProduct { amplitude: f64, periods: [f64; 2] },
    /// Periodic von Mises bump
    /// `amplitude · exp(c·(cos 2π(x−x0)/L1 + cos 2π(y−y0)/L2 − 2))`.
    PeriodicBump {
        amplitude: f64,
        center: [f64; 2],
        concentration: f64,
        periods: [f64; 2],
    },
    /// `a·x + b·y + c·z`
    Linear { coefficients: [f64; 3] },
    Sum { terms: Vec<(f64, ScalarField)> },
}

impl ScalarField {
    pub fn zero() -> Self {
        ScalarField::Constant { value: 0.0 }
    }

    pub fn eval(&self, p: &Vec3) -> f64 {
        match self {
            ScalarField::Constant { value } => *value,
            ScalarField::SinProduct { amplitude, periods } => {
                amplitude * (2.0 * PI * p.x / periods[0]).sin() * (2.0 * PI * p.y / periods[1]).sin()
            }
            ScalarField::PeriodicBump {
                amplitude,
                center,
                concentration,
                periods,
            } => {
                let cx = (2.0 * PI * (p.x - center[0]) / periods[0]).cos();
                let cy = (2.0 * PI * (p.y - center[1]) / periods[1]).cos();
                amplitude * (concentration * (cx + cy - 2.0)).exp()
            }
            ScalarField::Linear { coefficients: c } => c[0] * p.x + c[1] * p.y + c[2] * p.z,
            ScalarField::Sum { terms } => terms.iter().map(|(w, f)| w * f.eval(p)).sum(),
        }
    }

    pub fn is_constant(&self) -> bool {
        match self {
            ScalarField::Constant { .. } => true,
            ScalarField::Sum { terms } => terms.iter().all(|(w, f)| *w == 0.0 || f.is_constant()),
            _ => false,
        }
    }
}

/// Metric fields on a periodic chart.
#[derive(Clone, Debug, PartialEq)]
pub enum MetricField {
    Flat,
    /// Constant symmetric tensor `[[gxx, gxy], [gxy, gyy]]`.
    Constant { gxx: f64, gxy: f64, gyy: f64 },
    /// `diag(1, (1 + a·sin 2πx/L1)²)`
    WarpedDiag { amplitude: f64, period: f64 },
    /// `diag(1, 1 + a·sin 2πx/L1)`
    WarpedLinear { amplitude: f64, period: f64 },
    /// `e^{2·weight·φ} · base`
    Conformal {
        base: Box<MetricField>,
        phi: ScalarField,
        weight: f64,
    },
    /// `(1 − τ)·from + τ·to`
    Blend {
        from: Box<MetricField>,
        to: Box<MetricField>,
        tau: f64,
    },
}

impl MetricField {
    pub fn tensor(&self, p: &Vec3) -> Matrix2<f64> {
        match self {
            MetricField::Flat => Matrix2::identity(),
            MetricField::Constant { gxx, gxy, gyy } => Matrix2::new(*gxx, *gxy, *gxy, *gyy),
            MetricField::WarpedDiag { amplitude, period } => {
                let f = 1.0 + amplitude * (2.0 * PI * p.x / period).sin();
                Matrix2::new(1.0, 0.0, 0.0, f * f)
            }
            MetricField::WarpedLinear { amplitude, period } => {
                let f = 1.0 + amplitude * (2.0 * PI * p.x / period).sin();
                Matrix2::new(1.0, 0.0, 0.0, f)
            }
            MetricField::Conformal { base, phi, weight } => {
                if *weight == 0.0 {
                    base.tensor(p)
                } else {
                    base.tensor(p) * (2.0 * weight * phi.eval(p)).exp()
                }
            }
            MetricField::Blend { from, to, tau } => from.tensor(p) * (1.0 - tau) + to.tensor(p) * *tau,
        }
    }
}

/// Level sets `Σ xᵢ²/aᵢ² = 1`.
#[derive(Clone, Debug, PartialEq)]
pub enum Surface {
    Sphere { radius: f64 },
    Ellipsoid { axes: [f64; 3] },
}

impl Surface {
    pub fn axes(&self) -> [f64; 3] {
        match self {
            Surface::Sphere { radius } => [*radius; 3],
            Surface::Ellipsoid { axes } => *axes,
        }
    }

    pub fn level(&self, x: &Vec3) -> f64 {
        let a = self.axes();
        x.x * x.x / (a[0] * a[0]) + x.y * x.y / (a[1] * a[1]) + x.z * x.z / (a[2] * a[2]) - 1.0
    }

    pub fn gradient(&self, x: &Vec3) -> Vec3 {
        let a = self.axes();
        Vec3::new(
            2.0 * x.x / (a[0] * a[0]),
            2.0 * x.y / (a[1] * a[1]),
            2.0 * x.z / (a[2] * a[2]),
        )
    }

    /// Diagonal of the (constant) Hessian of the level function.
    pub fn hessian_diag(&self) -> Vec3 {
        let a = self.axes();
        Vec3::new(2.0 / (a[0] * a[0]), 2.0 / (a[1] * a[1]), 2.0 / (a[2] * a[2]))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicChart {
    pub periods: [f64; 2],
    pub metric: MetricField,
    pub fd_step: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ImplicitSurface {
    pub surface: Surface,
    pub psi: ScalarField,
    pub fd_step: f64,
    pub projection_tol: f64,
}

/// A compact 2-manifold with a Riemannian metric. Immutable once built.
#[derive(Clone, Debug, PartialEq)]
pub enum Backend {
    PeriodicChart(PeriodicChart),
    ImplicitSurface(ImplicitSurface),
}

/// The auxiliary metric space used for Hausdorff comparisons and spatial lookups.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AuxSpace {
    /// Wraparound Euclidean distance on the chart.
    Torus { periods: [f64; 2] },
    /// Ambient chordal distance.
    Ambient,
}

impl AuxSpace {
    pub fn displacement(&self, from: &Vec3, to: &Vec3) -> Vec3 {
        match self {
            AuxSpace::Torus { periods } => {
                let mut d = to - from;
                d.x -= periods[0] * (d.x / periods[0]).round();
                d.y -= periods[1] * (d.y / periods[1]).round();
                d.z = 0.0;
                d
            }
            AuxSpace::Ambient => to - from,
        }
    }

    pub fn distance(&self, p: &Vec3, q: &Vec3) -> f64 {
        match self {
            AuxSpace::Torus { periods } => {
                let wrap = |d: f64, l: f64| {
                    let r = d.abs() % l;
                    r.min(l - r)
                };
                let dx = wrap(q.x - p.x, periods[0]);
                let dy = wrap(q.y - p.y, periods[1]);
                dx.hypot(dy)
            }
            AuxSpace::Ambient => (q - p).norm(),
        }
    }
}

/// Auxiliary distance between points tagged with their spaces.
pub fn aux_distance(space_p: &AuxSpace, p: &Vec3, space_q: &AuxSpace, q: &Vec3) -> Result<f64> {
    if space_p != space_q {
        return Err(Error::BackendMismatch);
    }
    Ok(space_p.distance(p, q))
}

impl Backend {
    pub fn flat_torus(periods: [f64; 2]) -> Self {
        Self::chart(periods, MetricField::Flat)
    }

    /// Chart backend with the default finite-difference step `1e-4 · min(L1, L2)`.
    pub fn chart(periods: [f64; 2], metric: MetricField) -> Self {
        Backend::PeriodicChart(PeriodicChart {
            periods,
            metric,
            fd_step: 1e-4 * periods[0].min(periods[1]),
        })
    }

    pub fn sphere(radius: f64) -> Self {
        Self::implicit(Surface::Sphere { radius }, ScalarField::zero())
    }

    pub fn implicit(surface: Surface, psi: ScalarField) -> Self {
        let scale = surface.axes().iter().cloned().fold(f64::INFINITY, f64::min);
        Backend::ImplicitSurface(ImplicitSurface {
            surface,
            psi,
            fd_step: 1e-4 * scale,
            projection_tol: 1e-13,
        })
    }

    pub fn with_fd_step(mut self, step: f64) -> Self {
        match &mut self {
            Backend::PeriodicChart(c) => c.fd_step = step,
            Backend::ImplicitSurface(s) => s.fd_step = step,
        }
        self
    }

    pub fn fd_step(&self) -> f64 {
        match self {
            Backend::PeriodicChart(c) => c.fd_step,
            Backend::ImplicitSurface(s) => s.fd_step,
        }
    }

    pub fn aux_space(&self) -> AuxSpace {
        match self {
            Backend::PeriodicChart(c) => AuxSpace::Torus { periods: c.periods },
            Backend::ImplicitSurface(_) => AuxSpace::Ambient,
        }
    }

    pub fn aux_distance(&self, p: &Vec3, q: &Vec3) -> f64 {
        self.aux_space().distance(p, q)
    }

    pub fn displacement(&self, from: &Vec3, to: &Vec3) -> Vec3 {
        self.aux_space().displacement(from, to)
    }

    /// Reduces chart coordinates into `[0, L1) × [0, L2)`; projects ambient points onto the surface.
    pub fn canonical(&self, p: &Vec3) -> Vec3 {
        match self {
            Backend::PeriodicChart(c) => {
                let wrap = |x: f64, l: f64| {
                    let r = x.rem_euclid(l);
                    if r >= l {
                        0.0
                    } else {
                        r
                    }
                };
                Vec3::new(wrap(p.x, c.periods[0]), wrap(p.y, c.periods[1]), 0.0)
            }
            Backend::ImplicitSurface(_) => self.project(p),
        }
    }

    /// Newton projection onto `{h = 0}` along `∇h`. Identity on charts.
    pub fn project(&self, p: &Vec3) -> Vec3 {
        match self {
            Backend::PeriodicChart(_) => Vec3::new(p.x, p.y, 0.0),
            Backend::ImplicitSurface(s) => {
                let mut x = *p;
                for _ in 0..50 {
                    let h = s.surface.level(&x);
                    if h.abs() <= s.projection_tol {
                        break;
                    }
                    let g = s.surface.gradient(&x);
                    x -= g * (h / g.norm_squared());
                }
                x
            }
        }
    }

    /// Outward unit normal of the embedded surface; `e_z` on charts.
    pub fn surface_normal(&self, p: &Vec3) -> Vec3 {
        match self {
            Backend::PeriodicChart(_) => Vec3::z(),
            Backend::ImplicitSurface(s) => s.surface.gradient(p).normalize(),
        }
    }

    pub fn tangent_project(&self, p: &Vec3, v: &Vec3) -> Vec3 {
        match self {
            Backend::PeriodicChart(_) => Vec3::new(v.x, v.y, 0.0),
            Backend::ImplicitSurface(_) => {
                let n = self.surface_normal(p);
                v - n * n.dot(v)
            }
        }
    }

    /// Euclidean-orthonormal tangent basis `(e1, e2)` with `e1 × e2` along the surface normal.
    pub fn tangent_basis(&self, p: &Vec3) -> (Vec3, Vec3) {
        match self {
            Backend::PeriodicChart(_) => (Vec3::x(), Vec3::y()),
            Backend::ImplicitSurface(_) => {
                let n = self.surface_normal(p);
                let axis = if n.x.abs() <= n.y.abs() && n.x.abs() <= n.z.abs() {
                    Vec3::x()
                } else if n.y.abs() <= n.z.abs() {
                    Vec3::y()
                } else {
                    Vec3::z()
                };
                let e1 = (axis - n * n.dot(&axis)).normalize();
                let e2 = n.cross(&e1);
                (e1, e2)
            }
        }
    }

    fn chart_tensor(c: &PeriodicChart, p: &Vec3) -> Result<Matrix2<f64>> {
        let g = c.metric.tensor(p);
        if g.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFiniteMetric { point: *p });
        }
        Ok(g)
    }

    /// Chart metric tensor at `p`, checked for finiteness and positive definiteness.
    pub fn chart_metric(&self, p: &Vec3) -> Result<Matrix2<f64>> {
        match self {
            Backend::PeriodicChart(c) => {
                let g = Self::chart_tensor(c, p)?;
                if g[(0, 0)] <= 0.0 || g.determinant() <= 0.0 {
                    return Err(Error::NotPositiveDefinite { point: *p });
                }
                Ok(g)
            }
            Backend::ImplicitSurface(_) => Err(Error::InvalidArgument(
                "chart metric requested on an implicit surface".into(),
            )),
        }
    }

    /// Conformal factor `e^{2ψ}` of an implicit surface.
    fn conformal_factor(s: &ImplicitSurface, p: &Vec3) -> Result<f64> {
        let f = (2.0 * s.psi.eval(p)).exp();
        if !f.is_finite() || f <= 0.0 {
            return Err(Error::NonFiniteMetric { point: *p });
        }
        Ok(f)
    }

    /// `g_p(v, w)`.
    pub fn metric_eval(&self, p: &Vec3, v: &Vec3, w: &Vec3) -> Result<f64> {
        match self {
            Backend::PeriodicChart(_) => {
                let g = self.chart_metric(p)?;
                let v2 = Vector2::new(v.x, v.y);
                let w2 = Vector2::new(w.x, w.y);
                Ok(v2.dot(&(g * w2)))
            }
            Backend::ImplicitSurface(s) => Ok(Self::conformal_factor(s, p)? * v.dot(w)),
        }
    }

    pub fn norm(&self, p: &Vec3, v: &Vec3) -> Result<f64> {
        Ok(self.metric_eval(p, v, v)?.max(0.0).sqrt())
    }

    /// Rescales `v` to unit `g`-length.
    pub fn normalize(&self, p: &Vec3, v: &Vec3) -> Result<Vec3> {
        let n = self.norm(p, v)?;
        if n <= 0.0 || !n.is_finite() {
            return Err(Error::InvalidArgument("cannot normalize a zero vector".into()));
        }
        Ok(v / n)
    }

    /// Square roots of the extreme eigenvalues of `g` relative to the auxiliary metric:
    /// `sqrt(λ_min) |w| ≤ |w|_g ≤ sqrt(λ_max) |w|`.
    pub fn stretch_bounds(&self, p: &Vec3) -> Result<(f64, f64)> {
        match self {
            Backend::PeriodicChart(_) => {
                let g = self.chart_metric(p)?;
                let tr = g.trace();
                let det = g.determinant();
                let disc = (0.25 * tr * tr - det).max(0.0).sqrt();
                let lmax = 0.5 * tr + disc;
                let lmin = det / lmax;
                Ok((lmin.sqrt(), lmax.sqrt()))
            }
            Backend::ImplicitSurface(s) => {
                let f = Self::conformal_factor(s, p)?.sqrt();
                Ok((f, f))
            }
        }
    }

    fn chart_derivatives(&self, c: &PeriodicChart, p: &Vec3) -> Result<[Matrix2<f64>; 2]> {
        let h = c.fd_step;
        let dx = (Self::chart_tensor(c, &(p + Vec3::x() * h))? - Self::chart_tensor(c, &(p - Vec3::x() * h))?)
            / (2.0 * h);
        let dy = (Self::chart_tensor(c, &(p + Vec3::y() * h))? - Self::chart_tensor(c, &(p - Vec3::y() * h))?)
            / (2.0 * h);
        Ok([dx, dy])
    }

    fn psi_gradient(s: &ImplicitSurface, p: &Vec3) -> Vec3 {
        if s.psi.is_constant() {
            return Vec3::zeros();
        }
        let h = s.fd_step;
        let mut g = Vec3::zeros();
        for i in 0..3 {
            let mut e = Vec3::zeros();
            e[i] = h;
            g[i] = (s.psi.eval(&(p + e)) - s.psi.eval(&(p - e))) / (2.0 * h);
        }
        g
    }

    fn psi_hessian(s: &ImplicitSurface, p: &Vec3) -> nalgebra::Matrix3<f64> {
        let mut hess = nalgebra::Matrix3::zeros();
        if s.psi.is_constant() {
            return hess;
        }
        let h = s.fd_step.max(1e-4);
        let f = |x: Vec3| s.psi.eval(&x);
        let f0 = f(*p);
        for i in 0..3 {
            let mut ei = Vec3::zeros();
            ei[i] = h;
            hess[(i, i)] = (f(p + ei) - 2.0 * f0 + f(p - ei)) / (h * h);
            for j in (i + 1)..3 {
                let mut ej = Vec3::zeros();
                ej[j] = h;
                let v = (f(p + ei + ej) - f(p + ei - ej) - f(p - ei + ej) + f(p - ei - ej)) / (4.0 * h * h);
                hess[(i, j)] = v;
                hess[(j, i)] = v;
            }
        }
        hess
    }

    /// Symmetric Christoffel action `Γ(v, w)^k = Γ^k_{ij} v^i w^j`.
    pub fn christoffel_bilinear(&self, p: &Vec3, v: &Vec3, w: &Vec3) -> Result<Vec3> {
        match self {
            Backend::PeriodicChart(c) => {
                let g = Self::chart_tensor(c, p)?;
                let det = g.determinant();
                if !(det.abs() > SINGULAR_TOL) {
                    return Err(Error::SingularMetric { point: *p });
                }
                let ginv = Matrix2::new(g[(1, 1)], -g[(0, 1)], -g[(1, 0)], g[(0, 0)]) / det;
                let d = self.chart_derivatives(c, p)?;
                let v2 = Vector2::new(v.x, v.y);
                let w2 = Vector2::new(w.x, w.y);
                let dv = d[0] * v.x + d[1] * v.y;
                let dw = d[0] * w.x + d[1] * w.y;
                let first = (dv * w2 + dw * v2) * 0.5;
                let second = Vector2::new(v2.dot(&(d[0] * w2)), v2.dot(&(d[1] * w2))) * 0.5;
                let gamma = ginv * (first - second);
                Ok(Vec3::new(gamma.x, gamma.y, 0.0))
            }
            Backend::ImplicitSurface(s) => {
                let grad_h = s.surface.gradient(p);
                let hd = s.surface.hessian_diag();
                let vhw = v.x * hd.x * w.x + v.y * hd.y * w.y + v.z * hd.z * w.z;
                let mut out = grad_h * (vhw / grad_h.norm_squared());
                if !s.psi.is_constant() {
                    let gpsi = Self::psi_gradient(s, p);
                    let n = grad_h.normalize();
                    let gpsi_t = gpsi - n * n.dot(&gpsi);
                    out += w * v.dot(&gpsi) + v * w.dot(&gpsi) - gpsi_t * v.dot(w);
                }
                Ok(out)
            }
        }
    }

    /// `Γ(v, v)`; the geodesic equation reads `x'' = −Γ(x)(x', x')`.
    pub fn christoffel_apply(&self, p: &Vec3, v: &Vec3) -> Result<Vec3> {
        self.christoffel_bilinear(p, v, v)
    }

    /// Covariant derivative `∇_v W` of a field along a curve, given `W` and its coordinate
    /// derivative `dW`.
    pub fn covariant_derivative(&self, p: &Vec3, v: &Vec3, w: &Vec3, dw: &Vec3) -> Result<Vec3> {
        let raw = dw + self.christoffel_bilinear(p, v, w)?;
        Ok(self.tangent_project(p, &raw))
    }

    /// Gauss curvature: Brioschi formula on charts, bordered-Hessian formula with conformal
    /// correction `K = e^{−2ψ}(K₀ − Δψ)` on implicit surfaces.
    pub fn gauss_curvature(&self, p: &Vec3) -> Result<f64> {
        match self {
            Backend::PeriodicChart(c) => {
                let h = c.fd_step;
                let g = |dx: f64, dy: f64| Self::chart_tensor(c, &(p + Vec3::new(dx, dy, 0.0)));
                let g0 = g(0.0, 0.0)?;
                let (gxp, gxm, gyp, gym) = (g(h, 0.0)?, g(-h, 0.0)?, g(0.0, h)?, g(0.0, -h)?);
                let (gpp, gpm, gmp, gmm) = (g(h, h)?, g(h, -h)?, g(-h, h)?, g(-h, -h)?);
                let e = g0[(0, 0)];
                let f = g0[(0, 1)];
                let gg = g0[(1, 1)];
                let du = |k: (usize, usize)| (gxp[k] - gxm[k]) / (2.0 * h);
                let dv = |k: (usize, usize)| (gyp[k] - gym[k]) / (2.0 * h);
                let (e_u, e_v) = (du((0, 0)), dv((0, 0)));
                let (f_u, f_v) = (du((0, 1)), dv((0, 1)));
                let (g_u, g_v) = (du((1, 1)), dv((1, 1)));
                let e_vv = (gyp[(0, 0)] - 2.0 * e + gym[(0, 0)]) / (h * h);
                let g_uu = (gxp[(1, 1)] - 2.0 * gg + gxm[(1, 1)]) / (h * h);
                let f_uv = (gpp[(0, 1)] - gpm[(0, 1)] - gmp[(0, 1)] + gmm[(0, 1)]) / (4.0 * h * h);
                let a = nalgebra::Matrix3::new(
                    -0.5 * e_vv + f_uv - 0.5 * g_uu,
                    0.5 * e_u,
                    f_u - 0.5 * e_v,
                    f_v - 0.5 * g_u,
                    e,
                    f,
                    0.5 * g_v,
                    f,
                    gg,
                );
                let b = nalgebra::Matrix3::new(0.0, 0.5 * e_v, 0.5 * g_u, 0.5 * e_v, e, f, 0.5 * g_u, f, gg);
                let w = e * gg - f * f;
                if !(w > SINGULAR_TOL) {
                    return Err(Error::SingularMetric { point: *p });
                }
                Ok((a.determinant() - b.determinant()) / (w * w))
            }
            Backend::ImplicitSurface(s) => {
                let grad = s.surface.gradient(p);
                let hd = s.surface.hessian_diag();
                #[rustfmt::skip]
                let bordered = Matrix4::new(
                    hd.x, 0.0, 0.0, grad.x,
                    0.0, hd.y, 0.0, grad.y,
                    0.0, 0.0, hd.z, grad.z,
                    grad.x, grad.y, grad.z, 0.0,
                );
                let gn2 = grad.norm_squared();
                let k0 = -bordered.determinant() / (gn2 * gn2);
                if s.psi.is_constant() {
                    return Ok(k0 * (-2.0 * s.psi.eval(p)).exp());
                }
                let n = grad / gn2.sqrt();
                let gpsi = Self::psi_gradient(s, p);
                let hpsi = Self::psi_hessian(s, p);
                let mean = (hd.sum() - (n.x * n.x * hd.x + n.y * n.y * hd.y + n.z * n.z * hd.z)) / gn2.sqrt();
                let lap = hpsi.trace() - n.dot(&(hpsi * n)) - mean * n.dot(&gpsi);
                Ok((-2.0 * s.psi.eval(p)).exp() * (k0 - lap))
            }
        }
    }

    /// `g` length of the straight chart segment (or chord) from `from` to `from + gap`,
    /// by Simpson's rule.
    pub fn segment_length(&self, from: &Vec3, gap: &Vec3) -> Result<f64> {
        self.segment_length_with_end(from, gap, None)
    }

    /// As [`segment_length`](Self::segment_length), reusing the metric at the endpoint when the
    /// caller already has it.
    pub(crate) fn segment_length_with_end(&self, from: &Vec3, gap: &Vec3, end: Option<f64>) -> Result<f64> {
        let len_at = |x: &Vec3| -> Result<f64> {
            match self {
                Backend::PeriodicChart(_) => self.norm(x, gap),
                Backend::ImplicitSurface(s) => Ok(Self::conformal_factor(s, x)?.sqrt() * gap.norm()),
            }
        };
        let a = len_at(from)?;
        let m = len_at(&(from + gap * 0.5))?;
        let b = match end {
            Some(b) => b,
            None => len_at(&(from + gap))?,
        };
        Ok((a + 4.0 * m + b) / 6.0)
    }

    /// `e^{2τφ}·g`. `τ = 0` returns a backend with identical metric values.
    pub fn conformal_family(&self, phi: &ScalarField, tau: f64) -> Backend {
        match self {
            Backend::PeriodicChart(c) => Backend::PeriodicChart(PeriodicChart {
                metric: MetricField::Conformal {
                    base: Box::new(c.metric.clone()),
                    phi: phi.clone(),
                    weight: tau,
                },
                ..c.clone()
            }),
            Backend::ImplicitSurface(s) => Backend::ImplicitSurface(ImplicitSurface {
                psi: if tau == 0.0 {
                    s.psi.clone()
                } else {
                    ScalarField::Sum {
                        terms: vec![(1.0, s.psi.clone()), (tau, phi.clone())],
                    }
                },
                ..s.clone()
            }),
        }
    }

    /// `(1 − τ)·g0 + τ·g1` on a common chart. Positive definiteness is checked on a 64×64 grid.
    pub fn linear_blend(b0: &Backend, b1: &Backend, tau: f64) -> Result<Backend> {
        let (c0, c1) = match (b0, b1) {
            (Backend::PeriodicChart(c0), Backend::PeriodicChart(c1)) if c0.periods == c1.periods => (c0, c1),
            _ => {
                return Err(Error::InvalidArgument(
                    "linear_blend needs two chart backends with equal periods".into(),
                ))
            }
        };
        let metric = if tau == 0.0 {
            c0.metric.clone()
        } else if tau == 1.0 {
            c1.metric.clone()
        } else {
            MetricField::Blend {
                from: Box::new(c0.metric.clone()),
                to: Box::new(c1.metric.clone()),
                tau,
            }
        };
        let blended = Backend::PeriodicChart(PeriodicChart {
            periods: c0.periods,
            metric,
            fd_step: c0.fd_step,
        });
        const GRID: usize = 64;
        for i in 0..GRID {
            for j in 0..GRID {
                let p = Vec3::new(
                    c0.periods[0] * i as f64 / GRID as f64,
                    c0.periods[1] * j as f64 / GRID as f64,
                    0.0,
                );
                blended.chart_metric(&p)?;
            }
        }
        Ok(blended)
    }

    /// Sample points covering the manifold with spacing roughly `spacing` (aux units).
    pub fn grid(&self, spacing: f64) -> Vec<Vec3> {
        match self {
            Backend::PeriodicChart(c) => {
                let nx = (c.periods[0] / spacing).round().max(1.0) as usize;
                let ny = (c.periods[1] / spacing).round().max(1.0) as usize;
                let mut out = Vec::with_capacity(nx * ny);
                for j in 0..ny {
                    for i in 0..nx {
                        out.push(Vec3::new(
                            (i as f64 + 0.5) * c.periods[0] / nx as f64,
                            (j as f64 + 0.5) * c.periods[1] / ny as f64,
                            0.0,
                        ));
                    }
                }
                out
            }
            Backend::ImplicitSurface(s) => {
                let a = s.surface.axes();
                let scale = a.iter().cloned().fold(0.0, f64::max);
                let n_theta = (PI * scale / spacing).round().max(2.0) as usize;
                let mut out = Vec::new();
                for i in 0..n_theta {
                    let theta = (i as f64 + 0.5) * PI / n_theta as f64;
                    let n_phi = ((2.0 * PI * scale * theta.sin() / spacing).round() as usize).max(3);
                    for j in 0..n_phi {
                        let phi = 2.0 * PI * (j as f64 + 0.5) / n_phi as f64;
                        out.push(Vec3::new(
                            a[0] * theta.sin() * phi.cos(),
                            a[1] * theta.sin() * phi.sin(),
                            a[2] * theta.cos(),
                        ));
                    }
                }
                out
            }
        }
    }

    /// Maximum Gauss curvature over [`grid`](Self::grid) samples.
    pub fn curvature_bound(&self, spacing: f64) -> Result<f64> {
        let mut k = f64::NEG_INFINITY;
        for p in self.grid(spacing) {
            k = k.max(self.gauss_curvature(&p)?);
        }
        Ok(k)
    }

    /// Chart points on a regular grid including the origin, used for curvature bounds where the
    /// extremes sit on dyadic coordinates.
    pub fn lattice(&self, n: usize) -> Vec<Vec3> {
        match self {
            Backend::PeriodicChart(c) => {
                let mut out = Vec::with_capacity(n * n);
                for j in 0..n {
                    for i in 0..n {
                        out.push(Vec3::new(
                            c.periods[0] * i as f64 / n as f64,
                            c.periods[1] * j as f64 / n as f64,
                            0.0,
                        ));
                    }
                }
                out
            }
            Backend::ImplicitSurface(_) => self.grid(PI / n as f64),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn warped_linear() -> Backend {
        Backend::chart(
            [1.0, 1.0],
            MetricField::WarpedLinear {
                amplitude: 0.1,
                period: 1.0,
            },
        )
    }

    fn warped_diag(a: f64) -> Backend {
        Backend::chart([1.0, 1.0], MetricField::WarpedDiag { amplitude: a, period: 1.0 })
    }

    #[test]
    fn flat_metric_examples() {
        let b = Backend::flat_torus([1.0, 1.0]);
        let p = Vec3::new(0.3, 0.2, 0.0);
        assert_eq!(b.metric_eval(&p, &Vec3::x(), &Vec3::y()).unwrap(), 0.0);
        let v = Vec3::new(3.0, 4.0, 0.0);
        assert_eq!(b.metric_eval(&p, &v, &v).unwrap(), 25.0);
    }

    #[test]
    fn sphere_induced_metric() {
        let b = Backend::sphere(1.0);
        let p = Vec3::new(1.0, 0.0, 0.0);
        let v = Vec3::new(0.0, 0.6, 0.8);
        assert!((b.metric_eval(&p, &v, &v).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn non_finite_metric_is_reported() {
        let b = Backend::chart(
            [1.0, 1.0],
            MetricField::Constant {
                gxx: f64::NAN,
                gxy: 0.0,
                gyy: 1.0,
            },
        );
        let err = b.metric_eval(&Vec3::zeros(), &Vec3::x(), &Vec3::x()).unwrap_err();
        assert!(matches!(err, Error::NonFiniteMetric { .. }));
    }

    #[test]
    fn singular_metric_is_rejected() {
        let b = Backend::chart(
            [1.0, 1.0],
            MetricField::Constant {
                gxx: 1.0,
                gxy: 1.0,
                gyy: 1.0,
            },
        );
        let err = b.christoffel_apply(&Vec3::zeros(), &Vec3::x()).unwrap_err();
        assert!(matches!(err, Error::SingularMetric { .. }));
    }

    #[test]
    fn flat_christoffel_vanishes() {
        let b = Backend::flat_torus([1.0, 1.0]);
        let g = b.christoffel_apply(&Vec3::new(0.4, 0.1, 0.0), &Vec3::new(1.0, 2.0, 0.0)).unwrap();
        assert_eq!(g, Vec3::zeros());
        let phi = ScalarField::SinProduct {
            amplitude: 1.0,
            periods: [1.0, 1.0],
        };
        let b0 = b.conformal_family(&phi, 0.0);
        let g = b0.christoffel_apply(&Vec3::new(0.4, 0.1, 0.0), &Vec3::new(1.0, 2.0, 0.0)).unwrap();
        assert_eq!(g, Vec3::zeros());
    }

    /// Oracle: for `g = diag(1, G(x))`, `Γ^x_{yy} = −G'/2`, `Γ^y_{xy} = G'/(2G)`, all others vanish.
    #[test]
    fn warped_christoffel_matches_closed_form() {
        let b = warped_linear();
        for &x in &[0.25, 0.1, 0.6, 0.93] {
            let p = Vec3::new(x, 0.0, 0.0);
            let big_g = 1.0 + 0.1 * (2.0 * PI * x).sin();
            let dg = 0.1 * 2.0 * PI * (2.0 * PI * x).cos();
            let v = Vec3::new(0.0, 1.0, 0.0);
            let got = b.christoffel_apply(&p, &v).unwrap();
            assert!((got.x - (-0.5 * dg)).abs() < 1e-6, "x={x}: {got:?}");
            assert!(got.y.abs() < 1e-12);
            let v = Vec3::new(0.7, -1.3, 0.0);
            let got = b.christoffel_apply(&p, &v).unwrap();
            let want_x = -0.5 * dg * v.y * v.y;
            let want_y = 2.0 * dg / (2.0 * big_g) * v.x * v.y;
            assert!((got.x - want_x).abs() < 1e-6);
            assert!((got.y - want_y).abs() < 1e-6);
        }
    }

    #[test]
    fn christoffel_richardson_ratio() {
        let base = warped_diag(0.2);
        let p = Vec3::new(0.1, 0.3, 0.0);
        let v = Vec3::new(0.4, 1.1, 0.0);
        let eval = |h: f64| base.clone().with_fd_step(h).christoffel_apply(&p, &v).unwrap();
        let (a, b, c) = (eval(0.02), eval(0.01), eval(0.005));
        let ratio = (a - b).norm() / (b - c).norm();
        assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn curvature_ground_truths() {
        let flat = Backend::flat_torus([1.0, 1.0]);
        assert!(flat.gauss_curvature(&Vec3::new(0.3, 0.7, 0.0)).unwrap().abs() < 1e-12);

        let sphere = Backend::sphere(1.0);
        for p in sphere.grid(0.5) {
            assert!((sphere.gauss_curvature(&p).unwrap() - 1.0).abs() < 1e-6);
        }

        // K = −f''/f for diag(1, f²)
        let b = warped_diag(0.2);
        for &x in &[0.0, 0.25, 0.4, 0.75, 0.9] {
            let f = 1.0 + 0.2 * (2.0 * PI * x).sin();
            let fpp = -0.2 * 4.0 * PI * PI * (2.0 * PI * x).sin();
            let k = b.gauss_curvature(&Vec3::new(x, 0.37, 0.0)).unwrap();
            assert!((k + fpp / f).abs() < 1e-5, "x={x} k={k}");
        }
    }

    #[test]
    fn conformal_curvature_relation_on_flat_torus() {
        let phi = ScalarField::SinProduct {
            amplitude: 1.0,
            periods: [1.0, 1.0],
        };
        let flat = Backend::flat_torus([1.0, 1.0]);
        for &tau in &[0.05, 0.2] {
            let b = flat.conformal_family(&phi, tau);
            for p in flat.grid(0.13) {
                let ph = phi.eval(&p);
                let lap = -8.0 * PI * PI * ph;
                let want = (-2.0 * tau * ph).exp() * (0.0 - tau * lap);
                let got = b.gauss_curvature(&p).unwrap();
                assert!((got - want).abs() < 1e-4, "{got} vs {want}");
            }
        }
    }

    #[test]
    fn conformal_sphere_curvature() {
        // homothety: K scales by e^{-2c}
        let b = Backend::sphere(1.0).conformal_family(&ScalarField::Constant { value: 0.3 }, 1.0);
        let k = b.gauss_curvature(&Vec3::new(0.0, 0.6, 0.8)).unwrap();
        assert!((k - (-0.6f64).exp()).abs() < 1e-12);
        // ψ = a·z on the unit sphere: Δψ = −2az, K = e^{−2az}(1 + 2az)
        let a = 0.1;
        let b = Backend::implicit(
            Surface::Sphere { radius: 1.0 },
            ScalarField::Linear {
                coefficients: [0.0, 0.0, a],
            },
        );
        for p in Backend::sphere(1.0).grid(0.4) {
            let want = (-2.0 * a * p.z).exp() * (1.0 + 2.0 * a * p.z);
            assert!((b.gauss_curvature(&p).unwrap() - want).abs() < 1e-6);
        }
    }

    #[test]
    fn conformal_family_identity_and_definition() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let base = warped_diag(0.2);
        let phi = ScalarField::SinProduct {
            amplitude: 1.0,
            periods: [1.0, 1.0],
        };
        let same = base.conformal_family(&phi, 0.0);
        let scaled = base.conformal_family(&phi, 0.05);
        for _ in 0..100 {
            let p = Vec3::new(rng.gen(), rng.gen(), 0.0);
            let v = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), 0.0);
            let w = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), 0.0);
            let g0 = base.metric_eval(&p, &v, &w).unwrap();
            assert!((same.metric_eval(&p, &v, &w).unwrap() - g0).abs() <= 1e-15);
            let want = (2.0 * 0.05 * phi.eval(&p)).exp() * base.chart_metric(&p).unwrap();
            assert!((scaled.chart_metric(&p).unwrap() - want).abs().max() < 1e-15);
        }
    }

    #[test]
    fn linear_blend_examples() {
        let b0 = Backend::flat_torus([1.0, 1.0]);
        let b1 = Backend::chart(
            [1.0, 1.0],
            MetricField::Constant {
                gxx: 4.0,
                gxy: 0.0,
                gyy: 1.0,
            },
        );
        assert_eq!(Backend::linear_blend(&b0, &b1, 0.0).unwrap(), b0);
        assert_eq!(Backend::linear_blend(&b0, &b1, 1.0).unwrap(), b1);
        let mid = Backend::linear_blend(&b0, &b1, 0.5).unwrap();
        assert_eq!(mid.chart_metric(&Vec3::zeros()).unwrap(), Matrix2::new(2.5, 0.0, 0.0, 1.0));

        let bad = Backend::chart(
            [1.0, 1.0],
            MetricField::Constant {
                gxx: -3.0,
                gxy: 0.0,
                gyy: 1.0,
            },
        );
        assert!(matches!(
            Backend::linear_blend(&b0, &bad, 0.5),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn aux_distance_examples() {
        let t = AuxSpace::Torus { periods: [1.0, 1.0] };
        let p = Vec3::new(0.1, 0.0, 0.0);
        assert_eq!(aux_distance(&t, &p, &t, &p).unwrap(), 0.0);
        let q = Vec3::new(0.9, 0.0, 0.0);
        assert!((t.distance(&p, &q) - 0.2).abs() < 1e-15);
        let a = AuxSpace::Ambient;
        assert_eq!(a.distance(&Vec3::z(), &-Vec3::z()), 2.0);
        assert!(matches!(aux_distance(&t, &p, &a, &q), Err(Error::BackendMismatch)));
    }

    #[test]
    fn periodic_metric_agrees_across_boundary() {
        let phi = ScalarField::PeriodicBump {
            amplitude: 1.0,
            center: [0.75, 0.0],
            concentration: 2.0,
            periods: [1.0, 1.0],
        };
        let b = warped_diag(0.2).conformal_family(&phi, 0.3);
        for i in 0..50 {
            let s = i as f64 / 50.0;
            let a = b.chart_metric(&Vec3::new(0.0, s, 0.0)).unwrap();
            let c = b.chart_metric(&Vec3::new(1.0, s, 0.0)).unwrap();
            assert!((a - c).abs().max() < 1e-12);
            let a = b.chart_metric(&Vec3::new(s, 0.0, 0.0)).unwrap();
            let c = b.chart_metric(&Vec3::new(s, 1.0, 0.0)).unwrap();
            assert!((a - c).abs().max() < 1e-12);
        }
    }

    #[test]
    fn projection_lands_on_surface() {
        let b = Backend::implicit(Surface::Ellipsoid { axes: [1.0, 1.5, 0.7] }, ScalarField::zero());
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let p = Vec3::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let q = b.project(&p);
            if let Backend::ImplicitSurface(s) = &b {
                assert!(s.surface.level(&q).abs() <= 1e-12);
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn metric_eval_is_symmetric(x in 0.0..1.0f64, y in 0.0..1.0f64,
                                        v in prop::array::uniform2(-5.0..5.0f64),
                                        w in prop::array::uniform2(-5.0..5.0f64)) {
                let phi = ScalarField::SinProduct { amplitude: 1.0, periods: [1.0, 1.0] };
                let b = warped_diag(0.2).conformal_family(&phi, 0.3);
                let p = Vec3::new(x, y, 0.0);
                let v = Vec3::new(v[0], v[1], 0.0);
                let w = Vec3::new(w[0], w[1], 0.0);
                let gvw = b.metric_eval(&p, &v, &w).unwrap();
                let gwv = b.metric_eval(&p, &w, &v).unwrap();
                prop_assert!((gvw - gwv).abs() <= 1e-14 * (1.0 + gvw.abs()));
            }

            #[test]
            fn torus_triangle_inequality(a in prop::array::uniform2(0.0..1.0f64),
                                         b in prop::array::uniform2(0.0..1.0f64),
                                         c in prop::array::uniform2(0.0..1.0f64)) {
                let t = AuxSpace::Torus { periods: [1.0, 1.0] };
                let (a, b, c) = (Vec3::new(a[0], a[1], 0.0), Vec3::new(b[0], b[1], 0.0), Vec3::new(c[0], c[1], 0.0));
                prop_assert!(t.distance(&a, &c) <= t.distance(&a, &b) + t.distance(&b, &c));
                prop_assert_eq!(t.distance(&a, &b), t.distance(&b, &a));
            }

            #[test]
            fn ambient_triangle_inequality(a in prop::array::uniform3(-1.0..1.0f64),
                                           b in prop::array::uniform3(-1.0..1.0f64),
                                           c in prop::array::uniform3(-1.0..1.0f64)) {
                let s = AuxSpace::Ambient;
                let (a, b, c) = (Vec3::from(a), Vec3::from(b), Vec3::from(c));
                prop_assert!(s.distance(&a, &c) <= s.distance(&a, &b) + s.distance(&b, &c));
            }
        }
    }
}
