//! The distance function `u = d_g(N, ·)` from a dense spray of `N`-geodesics.
//!
//! Each ray carries its scalar Jacobi field, so the distance near a sample at time `t_s` with
//! unit velocity `v` is expanded to second order in the chart (or tangent-plane) offset `ξ`:
//!
//! `u ≈ t_s + g(v, ξ) + ½ (y'/y |ξ^⊥|²_g + g(v, Γ(ξ, ξ)))`
//!
//! The expansion is trusted within the local ray spacing of the sample and away from focal
//! points; elsewhere the `g`-length of the straight segment is used. The
//! estimate for `q` is the minimum over all passes of all rays near `q`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geodesics::{integrate_with_jacobi, jacobi_initial, GeodesicPath};
use crate::geometry::{Backend, Vec3};
use crate::spatial::SpatialIndex;
use crate::submanifold::{NormalFrame, SubmanifoldSpec};

/// Only every `COARSE`-th sample of a ray enters the fallback index.
const COARSE: usize = 8;
/// Resolution levels of the sample index; level `j` has query radius `search_radius / 2^j`.
const LEVELS: usize = 12;
/// Largest `|ξ|_g · |y'/y|` for which the second-order expansion is used.
const TAYLOR_TRUST: f64 = 0.5;

#[derive(Clone, Debug)]
pub struct AtlasRay {
    pub frame: NormalFrame,
    pub path: GeodesicPath,
    /// Local resolution at each sample: the largest aux gap to the neighboring rays at the same
    /// step or to the neighboring samples on this ray.
    pub spacing: Vec<f64>,
}

impl AtlasRay {
    fn jacobi(&self, k: usize) -> [f64; 2] {
        self.path.jacobi.as_ref().map_or([f64::NAN; 2], |j| j[k])
    }
}

/// Wavefronts of `N` up to `t_max`, one ray per direction.
#[derive(Clone, Debug)]
pub struct WavefrontAtlas {
    pub backend: Backend,
    pub submanifold: SubmanifoldSpec,
    /// Directions per side (curves) or on the circle (points).
    pub m: usize,
    pub dt: f64,
    pub t_max: f64,
    pub rays: Vec<AtlasRay>,
    /// Largest aux gap between neighboring samples, across adjacent rays or along a ray.
    pub certificate: f64,
    /// Largest aux distance between consecutive samples of one ray.
    pub step_aux: f64,
    /// `sqrt(λ_max)` over all samples.
    pub stretch_max: f64,
    /// `sqrt(λ_min)` over all samples.
    pub stretch_min: f64,
    /// Samples farther than this from a query are ignored.
    pub search_radius: f64,
    /// Every sample, filed at the finest level whose radius still covers its spacing.
    levels: Vec<Level>,
    /// Coarse subsample used when no sample resolves a query.
    index: SpatialIndex,
    refs: Vec<(u32, u32)>,
}

#[derive(Clone, Debug)]
struct Level {
    radius: f64,
    index: SpatialIndex,
    refs: Vec<(u32, u32)>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DistanceEstimate {
    pub d: f64,
    pub err: f64,
    /// Ray index of the minimizing sample.
    pub ray: usize,
    /// Time of the minimizing sample.
    pub t: f64,
}

/// Integrates all `m` directions (both sides for curves) and indexes the samples.
pub fn build_atlas(b: &Backend, n: &SubmanifoldSpec, m: usize, t_max: f64, dt: f64) -> Result<WavefrontAtlas> {
    if m < 16 {
        return Err(Error::InvalidArgument(format!("atlas needs at least 16 directions, got {m}")));
    }
    if !(t_max >= 0.0) || !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!("need t_max ≥ 0 and dt > 0, got {t_max}, {dt}")));
    }
    n.validate(b)?;
    let frames = n.directions(b, m)?;
    let built: Vec<Result<AtlasRay>> = frames
        .into_par_iter()
        .enumerate()
        .map(|(i, frame)| {
            let run = || -> Result<AtlasRay> {
                let init = jacobi_initial(b, n, &frame)?;
                let path = integrate_with_jacobi(b, &frame.base, &frame.n, init, t_max, dt)?;
                Ok(AtlasRay {
                    frame,
                    path,
                    spacing: Vec::new(),
                })
            };
            run().map_err(Error::at_direction(i))
        })
        .collect();
    let mut rays = built.into_iter().collect::<Result<Vec<_>>>()?;

    // neighbors are cyclic within each side block of m rays
    let next = |i: usize| (i / m) * m + (i % m + 1) % m;
    let prev = |i: usize| (i / m) * m + (i % m + m - 1) % m;
    let spacings: Vec<Vec<f64>> = (0..rays.len())
        .into_par_iter()
        .map(|i| {
            let own = &rays[i].path.samples;
            let (a, c) = (&rays[prev(i)].path.samples, &rays[next(i)].path.samples);
            (0..own.len())
                .map(|k| {
                    let mut gap: f64 = 0.0;
                    for other in [a, c] {
                        if k < other.len() {
                            gap = gap.max(b.aux_distance(&own[k].x, &other[k].x));
                        }
                    }
                    if k > 0 {
                        gap = gap.max(b.aux_distance(&own[k].x, &own[k - 1].x));
                    }
                    if k + 1 < own.len() {
                        gap = gap.max(b.aux_distance(&own[k].x, &own[k + 1].x));
                    }
                    gap
                })
                .collect()
        })
        .collect();
    let mut certificate: f64 = 0.0;
    let mut step_aux: f64 = 0.0;
    let mut stretch_max: f64 = 0.0;
    let mut stretch_min = f64::INFINITY;
    for (ray, spacing) in rays.iter_mut().zip(spacings) {
        let own = &ray.path.samples;
        for k in 0..own.len() {
            if k + 1 < own.len() {
                step_aux = step_aux.max(b.aux_distance(&own[k].x, &own[k + 1].x));
            }
            certificate = certificate.max(spacing[k]);
            let (lo, hi) = b.stretch_bounds(&own[k].x)?;
            stretch_max = stretch_max.max(hi);
            stretch_min = stretch_min.min(lo);
        }
        ray.spacing = spacing;
    }
    let search_radius = certificate.max(2.0 * step_aux).max(1e-9);

    let mut points = Vec::new();
    let mut refs = Vec::new();
    for (i, ray) in rays.iter().enumerate() {
        let last = ray.path.samples.len() - 1;
        for (k, s) in ray.path.samples.iter().enumerate() {
            if k % COARSE == 0 || k == last {
                points.push(s.x);
                refs.push((i as u32, k as u32));
            }
        }
    }
    let reach = search_radius + COARSE as f64 * step_aux;
    let index = SpatialIndex::new(b.aux_space(), points, reach);

    // per level: sample positions and their (ray, sample) references
    let mut filed = vec![(Vec::<Vec3>::new(), Vec::<(u32, u32)>::new()); LEVELS];
    for (i, ray) in rays.iter().enumerate() {
        for (k, s) in ray.path.samples.iter().enumerate() {
            let ratio = search_radius / ray.spacing[k];
            let j = if ratio.is_finite() { ratio.log2().floor().clamp(0.0, (LEVELS - 1) as f64) as usize } else { LEVELS - 1 };
            filed[j].0.push(s.x);
            filed[j].1.push((i as u32, k as u32));
        }
    }
    let levels = filed
        .into_par_iter()
        .enumerate()
        .filter(|(_, (pts, _))| !pts.is_empty())
        .map(|(j, (pts, refs))| {
            let radius = search_radius / (1u64 << j) as f64;
            Level {
                radius,
                index: SpatialIndex::new(b.aux_space(), pts, radius),
                refs,
            }
        })
        .collect();
    Ok(WavefrontAtlas {
        backend: b.clone(),
        submanifold: n.clone(),
        m,
        dt,
        t_max,
        rays,
        certificate,
        step_aux,
        stretch_max,
        stretch_min,
        search_radius,
        levels,
        index,
        refs,
    })
}

impl WavefrontAtlas {
    /// Global error bound `certificate · sqrt(λ_max) + dt`.
    pub fn err(&self) -> f64 {
        self.certificate * self.stretch_max + self.dt
    }

    pub fn direction_count(&self) -> usize {
        self.rays.len()
    }

    /// Total number of stored samples.
    pub fn sample_count(&self) -> usize {
        self.rays.iter().map(|r| r.path.samples.len()).sum()
    }

    /// Point of ray `i` at time `t`.
    pub fn ray_point(&self, i: usize, t: f64) -> Result<Vec3> {
        self.rays[i].path.point_at(&self.backend, t)
    }

    /// Expansion of the branch through sample `(i, k)` evaluated at `q`.
    fn estimate(&self, i: usize, k: usize, q: &Vec3) -> Result<f64> {
        let b = &self.backend;
        let ray = &self.rays[i];
        let s = &ray.path.samples[k];
        let w = b.displacement(&s.x, q);
        if w.norm() == 0.0 {
            return Ok(s.t);
        }
        let upper = s.t + b.segment_length(&s.x, &w)?;
        let xi = b.tangent_project(&s.x, &w);
        let [y, yd] = ray.jacobi(k);
        let xi_len = b.norm(&s.x, &xi)?;
        if w.norm() > ray.spacing[k] || !(y > 0.0) || xi_len * yd.abs() > TAYLOR_TRUST * y {
            return Ok(upper);
        }
        let a = b.metric_eval(&s.x, &s.v, &xi)?;
        if s.t + a < 0.0 {
            return Ok(upper);
        }
        let perp2 = (xi_len * xi_len - a * a).max(0.0);
        let gamma = b.christoffel_apply(&s.x, &xi)?;
        let taylor = s.t + a + 0.5 * (yd / y * perp2 + b.metric_eval(&s.x, &s.v, &gamma)?);
        Ok(taylor.min(upper))
    }
}

/// Nearest sample of every pass of the coarse index within the search radius, with a lower
/// bound on its segment estimate.
fn fallback(atlas: &WavefrontAtlas, q: &Vec3) -> Vec<(f64, usize, usize)> {
    let b = &atlas.backend;
    let r = atlas.search_radius;
    let reach = r + COARSE as f64 * atlas.step_aux;
    let mut hits: Vec<(u32, u32)> = Vec::new();
    atlas.index.for_each_within(q, reach, |j, _| hits.push(atlas.refs[j]));
    hits.sort_unstable();
    let mut out = Vec::new();
    let mut start = 0;
    while start < hits.len() {
        let mut end = start + 1;
        while end < hits.len() && hits[end].0 == hits[start].0 && hits[end].1 as usize <= hits[end - 1].1 as usize + COARSE {
            end += 1;
        }
        let i = hits[start].0 as usize;
        let samples = &atlas.rays[i].path.samples;
        let lo = (hits[start].1 as usize).saturating_sub(COARSE);
        let hi = (hits[end - 1].1 as usize + COARSE).min(samples.len() - 1);
        let mut near: Option<(usize, f64)> = None;
        for (k, s) in samples.iter().enumerate().take(hi + 1).skip(lo) {
            let d = b.aux_distance(&s.x, q);
            if d <= r && near.is_none_or(|(_, nd)| d < nd) {
                near = Some((k, d));
            }
        }
        if let Some((k, d)) = near {
            out.push((samples[k].t + 0.9 * atlas.stretch_min * d, i, k));
        }
        start = end;
    }
    out
}

/// `d(N, q)` with error bound and the minimizing sample. Ties go to the smallest ray index, then
/// the smallest time.
pub fn distance(atlas: &WavefrontAtlas, q: &Vec3) -> Result<DistanceEstimate> {
    let b = &atlas.backend;
    let q = b.canonical(q);
    let r = atlas.search_radius;

    // samples whose own spacing covers q
    let mut hits: Vec<(u32, u32, f64)> = Vec::new();
    for level in &atlas.levels {
        level.index.for_each_within(&q, level.radius, |j, d| {
            let (i, k) = level.refs[j];
            if d <= atlas.rays[i as usize].spacing[k as usize] {
                hits.push((i, k, d));
            }
        });
    }
    hits.sort_unstable_by_key(|a| (a.0, a.1));
    let mut resolved: Vec<(usize, usize)> = Vec::new();
    let mut start = 0;
    while start < hits.len() {
        let mut end = start + 1;
        let mut near = start;
        while end < hits.len() && hits[end].0 == hits[start].0 && hits[end].1 <= hits[end - 1].1 + 2 {
            if hits[end].2 < hits[near].2 {
                near = end;
            }
            end += 1;
        }
        resolved.push((hits[near].0 as usize, hits[near].1 as usize));
        start = end;
    }
    let mut deferred = if resolved.is_empty() { fallback(atlas, &q) } else { Vec::new() };
    let mut best: Option<(f64, usize, usize)> = None;
    let offer = |best: &mut Option<(f64, usize, usize)>, value: f64, i: usize, k: usize| {
        let better = match *best {
            None => true,
            Some((bv, bi, bk)) => value < bv || (value == bv && (i, k) < (bi, bk)),
        };
        if better {
            *best = Some((value, i, k));
        }
    };
    for (i, k) in resolved {
        offer(&mut best, atlas.estimate(i, k, &q)?, i, k);
    }
    deferred.sort_by(|a, b| a.0.total_cmp(&b.0).then((a.1, a.2).cmp(&(b.1, b.2))));
    for (lower, i, k) in deferred {
        if best.is_some_and(|(bv, _, _)| lower > bv) {
            break;
        }
        offer(&mut best, atlas.estimate(i, k, &q)?, i, k);
    }
    match best {
        Some((d, i, k)) => {
            let s = &atlas.rays[i].path.samples[k];
            let stretch = b.stretch_bounds(&s.x)?.1;
            Ok(DistanceEstimate {
                d: d.max(0.0),
                err: atlas.certificate * stretch + atlas.dt,
                ray: i,
                t: s.t,
            })
        }
        None => Err(Error::Coverage { point: q, radius: r }),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub tau: f64,
    pub d: f64,
    pub deviation: f64,
    pub err: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceTable {
    pub d0: f64,
    pub err0: f64,
    pub rows: Vec<ConvergenceRow>,
    /// Deviations nonincreasing along the ladder (slack `2·err`) and the last one below `tol`.
    pub verdict: bool,
}

/// `|d_τ(N_τ, q_τ) − d_0(N_0, q_0)|` along a ladder; `family(τ)` returns the member.
pub fn distance_convergence_probe<F>(
    family: F,
    taus: &[f64],
    m: usize,
    t_max: f64,
    dt: f64,
    tol: f64,
) -> Result<ConvergenceTable>
where
    F: Fn(f64) -> Result<(Backend, SubmanifoldSpec, Vec3)> + Sync,
{
    let eval = |tau: f64| -> Result<DistanceEstimate> {
        let (b, n, q) = family(tau)?;
        let atlas = build_atlas(&b, &n, m, t_max, dt)?;
        distance(&atlas, &q)
    };
    let base = eval(0.0)?;
    let rows = taus
        .par_iter()
        .map(|&tau| {
            let e = eval(tau)?;
            Ok(ConvergenceRow {
                tau,
                d: e.d,
                deviation: (e.d - base.d).abs(),
                err: e.err.max(base.err),
            })
        })
        .collect::<Vec<Result<_>>>()
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let decreasing = rows.windows(2).all(|w| w[1].deviation <= w[0].deviation + 2.0 * w[1].err);
    let verdict = decreasing && rows.last().is_none_or(|r| r.deviation < tol);
    Ok(ConvergenceTable {
        d0: base.d,
        err0: base.err,
        rows,
        verdict,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct EikonalStats {
    pub grid_spacing: f64,
    pub exclusion: f64,
    pub evaluated: usize,
    pub excluded: usize,
    /// Grid points whose stencil left the atlas coverage.
    pub dropped: usize,
    /// `|‖∇u‖_g − 1|` at evaluated points, in grid order.
    pub residuals: Vec<f64>,
}

impl EikonalStats {
    pub fn fraction_below(&self, tol: f64) -> f64 {
        if self.residuals.is_empty() {
            return 0.0;
        }
        self.residuals.iter().filter(|&&r| r < tol).count() as f64 / self.residuals.len() as f64
    }

    pub fn max(&self) -> f64 {
        self.residuals.iter().cloned().fold(0.0, f64::max)
    }

    pub fn mean(&self) -> f64 {
        if self.residuals.is_empty() {
            return 0.0;
        }
        self.residuals.iter().sum::<f64>() / self.residuals.len() as f64
    }

    pub fn quantile(&self, p: f64) -> f64 {
        if self.residuals.is_empty() {
            return f64::NAN;
        }
        let mut v = self.residuals.clone();
        v.sort_by(f64::total_cmp);
        let k = ((v.len() - 1) as f64 * p.clamp(0.0, 1.0)).round() as usize;
        v[k]
    }

    /// Histogram over `[0, top)` with a final overflow bin.
    pub fn histogram(&self, bins: usize, top: f64) -> Vec<(f64, f64, usize)> {
        let mut counts = vec![0usize; bins + 1];
        for &r in &self.residuals {
            let k = ((r / top) * bins as f64).floor();
            let k = if k.is_finite() && k >= 0.0 { (k as usize).min(bins) } else { bins };
            counts[k] += 1;
        }
        counts
            .into_iter()
            .enumerate()
            .map(|(k, c)| {
                let lo = top * k as f64 / bins as f64;
                let hi = if k == bins { f64::INFINITY } else { top * (k + 1) as f64 / bins as f64 };
                (lo, hi, c)
            })
            .collect()
    }
}

/// Eikonal residuals `|‖∇u‖_g − 1|` on a grid, skipping tubes of radius `exclusion` (default
/// `max(2·spacing, 2·err)`) around `N` and around `cut_points`.
pub fn eikonal_residual(
    atlas: &WavefrontAtlas,
    grid_spacing: f64,
    cut_points: &[Vec3],
    exclusion: Option<f64>,
) -> Result<EikonalStats> {
    let b = &atlas.backend;
    let exclusion = exclusion.unwrap_or_else(|| (2.0 * grid_spacing).max(2.0 * atlas.err()));
    let n_points: Vec<Vec3> = {
        let mut pts: Vec<Vec3> = atlas.submanifold.sample_points(b).into_iter().map(|e| e.1).collect();
        if atlas.submanifold.dim() == 1 {
            // densify so that the tube test does not leak between samples
            let c = atlas.submanifold.curve_ref().expect("curve");
            let k = (pts.len() * 8).max(512);
            pts = (0..k).map(|i| b.canonical(&c.point(b, i as f64 / k as f64))).collect();
        }
        pts
    };
    let n_index = SpatialIndex::new(b.aux_space(), n_points, exclusion);
    let cut_index = SpatialIndex::new(b.aux_space(), cut_points.iter().map(|p| b.canonical(p)).collect(), exclusion);
    let h = (0.25 * grid_spacing).min(1e-2);
    let grid = b.grid(grid_spacing);
    let results: Vec<Result<Option<Option<f64>>>> = grid
        .par_iter()
        .map(|q| {
            if n_index.nearest_within(q, exclusion).is_some() || cut_index.nearest_within(q, exclusion).is_some() {
                return Ok(None);
            }
            match gradient_norm(atlas, q, h) {
                Ok(r) => Ok(Some(Some((r - 1.0).abs()))),
                Err(Error::Coverage { .. }) => Ok(Some(None)),
                Err(e) => Err(e),
            }
        })
        .collect();
    let mut stats = EikonalStats {
        grid_spacing,
        exclusion,
        evaluated: 0,
        excluded: 0,
        dropped: 0,
        residuals: Vec::new(),
    };
    for r in results {
        match r? {
            None => stats.excluded += 1,
            Some(None) => stats.dropped += 1,
            Some(Some(res)) => {
                stats.evaluated += 1;
                stats.residuals.push(res);
            }
        }
    }
    Ok(stats)
}

/// `‖∇u‖_g` at `q` by central differences with step `h`.
fn gradient_norm(atlas: &WavefrontAtlas, q: &Vec3, h: f64) -> Result<f64> {
    let b = &atlas.backend;
    let u = |p: Vec3| distance(atlas, &p).map(|e| e.d);
    match b {
        Backend::PeriodicChart(_) => {
            let dx = (u(q + Vec3::x() * h)? - u(q - Vec3::x() * h)?) / (2.0 * h);
            let dy = (u(q + Vec3::y() * h)? - u(q - Vec3::y() * h)?) / (2.0 * h);
            let g = b.chart_metric(q)?;
            let ginv = g.try_inverse().ok_or(Error::SingularMetric { point: *q })?;
            let du = nalgebra::Vector2::new(dx, dy);
            Ok(du.dot(&(ginv * du)).max(0.0).sqrt())
        }
        Backend::ImplicitSurface(_) => {
            let (e1, e2) = b.tangent_basis(q);
            let dir = |e: Vec3| -> Result<f64> {
                let plus = b.project(&(q + e * h));
                let minus = b.project(&(q - e * h));
                Ok((u(plus)? - u(minus)?) / (plus - minus).dot(&e))
            };
            let (d1, d2) = (dir(e1)?, dir(e2)?);
            let (_, stretch) = b.stretch_bounds(q)?;
            Ok(d1.hypot(d2) / stretch)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::submanifold::Curve;
    use std::f64::consts::PI;

    fn flat_line_atlas(m: usize) -> WavefrontAtlas {
        let b = Backend::flat_torus([1.0, 1.0]);
        let n = SubmanifoldSpec::curve(Curve::HorizontalCircle { y0: 0.0 }, 64);
        build_atlas(&b, &n, m, 0.8, 1e-3).unwrap()
    }

    #[test]
    fn flat_line_distances() {
        let atlas = flat_line_atlas(64);
        let e = distance(&atlas, &Vec3::new(0.4, 0.3, 0.0)).unwrap();
        assert!((e.d - 0.3).abs() < 1e-3, "{e:?}");
        let e = distance(&atlas, &Vec3::new(0.4, 0.8, 0.0)).unwrap();
        assert!((e.d - 0.2).abs() < 1e-3, "{e:?}");
        assert!(e.ray >= 64, "approach from the − side");
        let e = distance(&atlas, &Vec3::new(0.123, 0.0, 0.0)).unwrap();
        assert!(e.d < 1e-9);
    }

    #[test]
    fn flat_line_rays_are_vertical() {
        let atlas = flat_line_atlas(64);
        for ray in &atlas.rays {
            for s in &ray.path.samples {
                assert!((s.x.x - ray.frame.base.x).abs() < 1e-12);
            }
        }
        assert!((atlas.certificate - 1.0 / 64.0).abs() < 1e-9);
    }

    #[test]
    fn certificate_halves_with_doubled_directions() {
        let b = Backend::sphere(1.0);
        let n = SubmanifoldSpec::point(Vec3::z());
        let a = build_atlas(&b, &n, 64, 1.0, 1e-3).unwrap();
        let c = build_atlas(&b, &n, 128, 1.0, 1e-3).unwrap();
        let ratio = a.certificate / c.certificate;
        assert!((1.8..=2.2).contains(&ratio), "{ratio}");
    }

    #[test]
    fn empty_interior_atlas() {
        let b = Backend::flat_torus([1.0, 1.0]);
        let n = SubmanifoldSpec::curve(Curve::HorizontalCircle { y0: 0.0 }, 64);
        let atlas = build_atlas(&b, &n, 32, 0.0, 1e-3).unwrap();
        assert!(distance(&atlas, &Vec3::new(0.3, 0.0, 0.0)).unwrap().d < 1e-12);
        assert!(matches!(
            distance(&atlas, &Vec3::new(0.3, 0.4, 0.0)),
            Err(Error::Coverage { .. })
        ));
    }

    #[test]
    fn sphere_pole_distance() {
        let b = Backend::sphere(1.0);
        let n = SubmanifoldSpec::curve(Curve::equator(), 64);
        let atlas = build_atlas(&b, &n, 128, 2.0, 1e-3).unwrap();
        let e = distance(&atlas, &Vec3::z()).unwrap();
        assert!((e.d - PI / 2.0).abs() < 1e-3, "{e:?}");
        let q = Vec3::new(0.3f64.cos(), 0.0, 0.3f64.sin());
        assert!((distance(&atlas, &q).unwrap().d - 0.3).abs() < 1e-5);
    }

    #[test]
    fn flat_point_between_rays() {
        let b = Backend::flat_torus([1.0, 1.0]);
        let p = Vec3::new(0.5, 0.5, 0.0);
        let n = SubmanifoldSpec::point(p);
        let atlas = build_atlas(&b, &n, 64, 0.8, 1e-3).unwrap();
        for &(a, r) in &[(0.01, 0.3), (0.77, 0.45), (2.0, 0.2)] {
            let q = p + Vec3::new(r * f64::cos(a), r * f64::sin(a), 0.0);
            let e = distance(&atlas, &q).unwrap();
            assert!((e.d - r).abs() < 1e-5, "angle {a}: {} vs {r}", e.d);
        }
    }

    #[test]
    fn eikonal_flat_line() {
        let atlas = flat_line_atlas(64);
        let stats = eikonal_residual(&atlas, 0.05, &[], Some(0.05)).unwrap();
        assert!(stats.evaluated > 0);
        // the cut line y = 0.5 sits at a cell boundary of the 0.05 grid and is never sampled
        assert!(stats.fraction_below(1e-2) >= 0.95, "{}", stats.max());
    }
}
