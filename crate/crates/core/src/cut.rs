//! Cut times, cut locus clouds, separating points, focal times, `N`-geodesic loops and the two
//! injectivity radius estimators.

use rayon::prelude::*;

use crate::distance::{distance, WavefrontAtlas};
use crate::error::{Error, Result};
use crate::geodesics::{integrate_with_jacobi, jacobi_initial, GeodesicPath};
use crate::geometry::{Backend, Vec3};
use crate::numeric::{bisect_boundary, golden_min, hermite_root};
use crate::spatial::SpatialIndex;
use crate::stability::PointCloud;
use crate::submanifold::{foot_point_with, NormalFrame, Shape, Side, SubmanifoldSpec};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CutOptions {
    /// Locate threshold on the excess and floor of the detection threshold.
    pub tol: f64,
    /// Spacing of the excess scan along each ray.
    pub scan_step: f64,
    /// Final bisection bracket width for cut times.
    pub locate_width: f64,
    /// Loop capture radius (aux units); rays must first leave a tube of thrice this radius.
    pub capture: f64,
    /// Largest normalized `|g(γ', c')|` at a return for it to count as a loop.
    pub angle_tol: f64,
    /// Largest aux distance to `N` of a polished return.
    pub hit_tol: f64,
    /// Tie tolerance between the focal and loop branches, and for focal-coincident cut points.
    pub focal_tol: f64,
    /// Cut points closer than this are clustered.
    pub pair_tol: f64,
    /// Parameter separation above which two frames count as distinct `N`-segments.
    pub frame_tol: f64,
}

impl Default for CutOptions {
    fn default() -> Self {
        CutOptions {
            tol: 1e-4,
            scan_step: 1e-2,
            locate_width: 1e-6,
            capture: 1e-2,
            angle_tol: 1e-3,
            hit_tol: 1e-6,
            focal_tol: 1e-3,
            pair_tol: 1e-3,
            frame_tol: 1e-2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CutTime {
    pub rho: f64,
    /// False when the excess stayed below the detection threshold up to `t_max`.
    pub detected: bool,
    pub detect_threshold: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LoopHit {
    pub t: f64,
    pub s_return: f64,
    pub angle_residual: f64,
    pub point: Vec3,
    /// Velocity at the return.
    pub velocity: Vec3,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CutProfile {
    pub index: usize,
    pub s: f64,
    pub side: Side,
    pub rho: f64,
    pub detected: bool,
    pub cut_point: Vec3,
    /// `+∞` when no focal point was found before `t_max`.
    pub focal: f64,
    /// First orthogonal return to `N`.
    pub loop_hit: Option<LoopHit>,
    /// Count of non-orthogonal returns seen before the loop (or `t_max`).
    pub oblique_returns: usize,
}

/// `e(t) = t − d(N, γ(t))` along an arbitrary path, with the oracle's error bound.
pub fn excess_along(atlas: &WavefrontAtlas, path: &GeodesicPath, t: f64) -> Result<(f64, f64)> {
    let q = path.point_at(&atlas.backend, t)?;
    let e = distance(atlas, &q)?;
    Ok((t - e.d, e.err))
}

/// Excess along atlas ray `i`.
pub fn excess(atlas: &WavefrontAtlas, i: usize, t: f64) -> Result<f64> {
    Ok(excess_along(atlas, &atlas.rays[i].path, t)?.0)
}

/// Cut time along atlas ray `i`.
pub fn cut_time(atlas: &WavefrontAtlas, i: usize, opts: &CutOptions) -> Result<CutTime> {
    cut_time_along(atlas, &atlas.rays[i].path, opts)
}

/// Cut time along a unit-speed `N`-geodesic. A cut is detected once the excess exceeds
/// `max(3·err, tol)` on the scan grid; the boundary of `{e > tol}` is then bisected.
pub fn cut_time_along(atlas: &WavefrontAtlas, path: &GeodesicPath, opts: &CutOptions) -> Result<CutTime> {
    let t_end = path.t_end();
    let steps = (t_end / opts.scan_step).ceil() as usize;
    let mut last_low = 0.0;
    let mut threshold = opts.tol;
    for k in 1..=steps {
        let t = (k as f64 * opts.scan_step).min(t_end);
        let (e, err) = excess_along(atlas, path, t)?;
        threshold = (3.0 * err).max(opts.tol);
        if e <= opts.tol {
            last_low = t;
        }
        if e > threshold {
            let (lo, hi) = bisect_boundary(
                |u| excess_along(atlas, path, u).map(|(e, _)| e > opts.tol),
                last_low,
                t,
                opts.locate_width,
            )?;
            return Ok(CutTime {
                rho: 0.5 * (lo + hi),
                detected: true,
                detect_threshold: threshold,
            });
        }
    }
    Ok(CutTime {
        rho: t_end,
        detected: false,
        detect_threshold: threshold,
    })
}

/// `(frame, ρ)` for every atlas direction, in atlas order.
pub fn tangential_cut_locus(atlas: &WavefrontAtlas, opts: &CutOptions) -> Result<Vec<(NormalFrame, CutTime)>> {
    (0..atlas.rays.len())
        .into_par_iter()
        .map(|i| cut_time(atlas, i, opts).map_err(Error::at_direction(i)))
        .collect::<Vec<_>>()
        .into_iter()
        .zip(&atlas.rays)
        .map(|(c, r)| c.map(|c| (r.frame.clone(), c)))
        .collect()
}

/// First zero of the scalar Jacobi field stored on `path`, polished on the cubic Hermite
/// interpolant; `+∞` if `y` keeps its sign.
pub fn focal_on_path(path: &GeodesicPath) -> f64 {
    let Some(j) = path.jacobi.as_ref() else {
        return f64::INFINITY;
    };
    let s = &path.samples;
    for k in 1..s.len() {
        let (y0, y1) = (j[k - 1][0], j[k][0]);
        // points start at y = 0; the first interval is skipped
        if k == 1 && y0 == 0.0 {
            continue;
        }
        if y1 == 0.0 {
            return s[k].t;
        }
        if (y0 > 0.0) != (y1 > 0.0) {
            return hermite_root(s[k - 1].t, y0, j[k - 1][1], s[k].t, y1, j[k][1], 1e-12);
        }
    }
    f64::INFINITY
}

/// First focal time along `γ_n` from the scalar Jacobi equation.
pub fn focal_time(b: &Backend, n: &SubmanifoldSpec, frame: &NormalFrame, t_max: f64, dt: f64) -> Result<f64> {
    let init = jacobi_initial(b, n, frame)?;
    let path = integrate_with_jacobi(b, &frame.base, &frame.n, init, t_max, dt)?;
    Ok(focal_on_path(&path))
}

/// Minimum focal time over the direction set.
pub fn f_min(b: &Backend, n: &SubmanifoldSpec, m: usize, t_max: f64, dt: f64) -> Result<f64> {
    let frames = n.directions(b, m)?;
    let times = frames
        .par_iter()
        .enumerate()
        .map(|(i, f)| focal_time(b, n, f, t_max, dt).map_err(Error::at_direction(i)))
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(times.into_iter().fold(f64::INFINITY, f64::min))
}

/// Dense samples of `N` for return detection.
pub struct ReturnProbe {
    index: SpatialIndex,
}

impl ReturnProbe {
    pub fn new(b: &Backend, n: &SubmanifoldSpec, capture: f64) -> Self {
        let pts = match &n.shape {
            Shape::Point(p) => vec![b.canonical(p)],
            Shape::Curve(c) => {
                let k = (n.samples * 8).max(2048);
                (0..k).map(|i| b.canonical(&c.point(b, i as f64 / k as f64))).collect()
            }
        };
        ReturnProbe {
            index: SpatialIndex::new(b.aux_space(), pts, 3.0 * capture),
        }
    }

    fn near(&self, q: &Vec3, r: f64) -> f64 {
        self.index.nearest_within(q, r).map_or(f64::INFINITY, |e| e.1)
    }
}

/// Returns of `path` to `N`: the first orthogonal one (if any) and the number of oblique ones
/// seen before it.
pub fn scan_returns(
    b: &Backend,
    n: &SubmanifoldSpec,
    probe: &ReturnProbe,
    path: &GeodesicPath,
    opts: &CutOptions,
) -> Result<(Option<LoopHit>, usize)> {
    let escape = 3.0 * opts.capture;
    let s = &path.samples;
    let dist: Vec<f64> = s.iter().map(|x| probe.near(&x.x, escape)).collect();
    let mut escaped = false;
    let mut oblique = 0;
    let mut k = 1;
    while k < s.len() {
        if !escaped {
            escaped = dist[k] > escape;
            k += 1;
            continue;
        }
        if dist[k] >= opts.capture {
            k += 1;
            continue;
        }
        let mut j = k;
        while j + 1 < s.len() && dist[j + 1] <= dist[j] {
            j += 1;
        }
        let lo = s[j.saturating_sub(1)].t;
        let hi = s[(j + 1).min(s.len() - 1)].t;
        let aux_at = |t: f64| -> f64 {
            match path.point_at(b, t) {
                Ok(q) => foot_aux(b, n, &q),
                Err(_) => f64::INFINITY,
            }
        };
        let (t_hit, aux) = golden_min(aux_at, lo, hi, 1e-11);
        if aux <= opts.hit_tol {
            let (q, vel) = path.state_at(b, t_hit)?;
            let (s_return, residual) = match &n.shape {
                Shape::Point(_) => (0.0, 0.0),
                Shape::Curve(c) => {
                    let fp = foot_point_with(b, n, &q, 0.0)?;
                    let tangent = c.tangent(b, fp.s);
                    let num = b.metric_eval(&q, &vel, &tangent)?.abs();
                    (fp.s, num / (b.norm(&q, &vel)? * b.norm(&q, &tangent)?))
                }
            };
            let hit = LoopHit {
                t: t_hit,
                s_return,
                angle_residual: residual,
                point: q,
                velocity: vel,
            };
            if residual <= opts.angle_tol {
                return Ok((Some(hit), oblique));
            }
            oblique += 1;
        }
        escaped = false;
        k = j + 1;
    }
    Ok((None, oblique))
}

fn foot_aux(b: &Backend, n: &SubmanifoldSpec, q: &Vec3) -> f64 {
    match &n.shape {
        Shape::Point(p) => b.aux_distance(p, q),
        Shape::Curve(_) => foot_point_with(b, n, q, 0.0).map_or(f64::INFINITY, |f| f.aux),
    }
}

/// The first loop of a single `N`-geodesic.
pub fn loop_from_frame(
    b: &Backend,
    n: &SubmanifoldSpec,
    frame: &NormalFrame,
    t_max: f64,
    dt: f64,
    opts: &CutOptions,
) -> Result<Option<LoopHit>> {
    let path = crate::geodesics::integrate_geodesic(b, &frame.base, &frame.n, t_max, dt)?;
    let probe = ReturnProbe::new(b, n, opts.capture);
    Ok(scan_returns(b, n, &probe, &path, opts)?.0)
}

/// Half the shortest loop length over the direction set; `+∞` if none.
pub fn loop_scan(
    b: &Backend,
    n: &SubmanifoldSpec,
    m: usize,
    t_max: f64,
    dt: f64,
    opts: &CutOptions,
) -> Result<f64> {
    let frames = n.directions(b, m)?;
    let probe = ReturnProbe::new(b, n, opts.capture);
    let lengths = frames
        .par_iter()
        .enumerate()
        .map(|(i, f)| {
            let run = || -> Result<f64> {
                let path = crate::geodesics::integrate_geodesic(b, &f.base, &f.n, t_max, dt)?;
                Ok(scan_returns(b, n, &probe, &path, opts)?.0.map_or(f64::INFINITY, |h| h.t))
            };
            run().map_err(Error::at_direction(i))
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(0.5 * lengths.into_iter().fold(f64::INFINITY, f64::min))
}

/// Cut time, focal time and loop data for every atlas direction, in atlas order.
pub fn profiles(atlas: &WavefrontAtlas, opts: &CutOptions) -> Result<Vec<CutProfile>> {
    let b = &atlas.backend;
    let n = &atlas.submanifold;
    let probe = ReturnProbe::new(b, n, opts.capture);
    (0..atlas.rays.len())
        .into_par_iter()
        .map(|i| {
            let run = || -> Result<CutProfile> {
                let ray = &atlas.rays[i];
                let cut = cut_time(atlas, i, opts)?;
                let (loop_hit, oblique_returns) = scan_returns(b, n, &probe, &ray.path, opts)?;
                Ok(CutProfile {
                    index: i,
                    s: ray.frame.s,
                    side: ray.frame.side,
                    rho: cut.rho,
                    detected: cut.detected,
                    cut_point: ray.path.point_at(b, cut.rho)?,
                    focal: focal_on_path(&ray.path),
                    loop_hit,
                    oblique_returns,
                })
            };
            run().map_err(Error::at_direction(i))
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect()
}

/// Deduplicated images of the tangential cut locus, tagged with the contributing directions.
pub fn cut_locus_cloud(atlas: &WavefrontAtlas, profiles: &[CutProfile]) -> PointCloud {
    let b = &atlas.backend;
    let mut cloud = PointCloud::new(b.aux_space(), 1e-6);
    for p in profiles.iter().filter(|p| p.detected) {
        cloud.insert(p.cut_point, p.index);
    }
    cloud
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Dichotomy {
    Sep,
    Focal,
    Both,
    /// Neither reached by distinct segments nor focal at the resolution used.
    Unresolved,
}

impl Dichotomy {
    pub fn label(self) -> &'static str {
        match self {
            Dichotomy::Sep => "sep",
            Dichotomy::Focal => "focal",
            Dichotomy::Both => "both",
            Dichotomy::Unresolved => "unresolved",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SepPoint {
    pub index: usize,
    pub point: Vec3,
    pub cluster: usize,
    /// Directions in the cluster.
    pub multiplicity: usize,
    pub sep: bool,
    pub flag: Dichotomy,
}

/// Clusters cut points within `pair_tol`; a cluster is separating when it contains two frames
/// more than `frame_tol` apart in parameter (or on opposite sides). One entry per detected
/// profile, in profile order.
pub fn separating_points(b: &Backend, profiles: &[CutProfile], opts: &CutOptions) -> Vec<SepPoint> {
    let live: Vec<&CutProfile> = profiles.iter().filter(|p| p.detected).collect();
    let index = SpatialIndex::new(
        b.aux_space(),
        live.iter().map(|p| b.canonical(&p.cut_point)).collect(),
        opts.pair_tol.max(1e-9),
    );
    let mut parent: Vec<usize> = (0..live.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for i in 0..live.len() {
        for (j, _) in index.within(index.point(i), opts.pair_tol) {
            let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
            if ri != rj {
                parent[ri.max(rj)] = ri.min(rj);
            }
        }
    }
    let roots: Vec<usize> = (0..live.len()).map(|i| find(&mut parent, i)).collect();
    let mut members: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for (i, r) in roots.iter().enumerate() {
        members.entry(*r).or_default().push(i);
    }
    let distinct = |a: &CutProfile, c: &CutProfile| {
        let ds = (a.s - c.s).rem_euclid(1.0);
        a.side != c.side || ds.min(1.0 - ds) > opts.frame_tol
    };
    let mut sep_cluster = std::collections::BTreeMap::new();
    for (r, ms) in &members {
        let sep = ms
            .iter()
            .enumerate()
            .any(|(x, &i)| ms[x + 1..].iter().any(|&j| distinct(live[i], live[j])));
        sep_cluster.insert(*r, sep);
    }
    live.iter()
        .enumerate()
        .map(|(i, p)| {
            let sep = sep_cluster[&roots[i]];
            let focal = p.focal.is_finite() && (p.focal - p.rho).abs() <= opts.focal_tol;
            let flag = match (sep, focal) {
                (true, true) => Dichotomy::Both,
                (true, false) => Dichotomy::Sep,
                (false, true) => Dichotomy::Focal,
                (false, false) => Dichotomy::Unresolved,
            };
            SepPoint {
                index: p.index,
                point: p.cut_point,
                cluster: roots[i],
                multiplicity: members[&roots[i]].len(),
                sep,
                flag,
            }
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DirectInj {
    pub value: f64,
    /// Directions without a detected cut (their `ρ` is only a lower bound).
    pub undetected: usize,
}

/// `min ρ` over the profiles.
pub fn injectivity_radius_direct(profiles: &[CutProfile]) -> DirectInj {
    DirectInj {
        value: profiles.iter().map(|p| p.rho).fold(f64::INFINITY, f64::min),
        undetected: profiles.iter().filter(|p| !p.detected).count(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Branch {
    Focal,
    Loop,
    Both,
    /// No focal point and no loop before `t_max`.
    Inconclusive,
}

impl Branch {
    pub fn label(self) -> &'static str {
        match self {
            Branch::Focal => "focal",
            Branch::Loop => "loop",
            Branch::Both => "both",
            Branch::Inconclusive => "inconclusive: increase t_max",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CharInj {
    pub value: f64,
    pub branch: Branch,
    pub f_min: f64,
    pub l_half: f64,
}

/// `min(f_min, ℓ_half)` with the minimizing branch; ties within `tie_tol` are labeled `Both`.
pub fn characterize(f_min: f64, l_half: f64, tie_tol: f64) -> CharInj {
    let value = f_min.min(l_half);
    let branch = if !value.is_finite() {
        Branch::Inconclusive
    } else if (f_min - l_half).abs() <= tie_tol {
        Branch::Both
    } else if f_min < l_half {
        Branch::Focal
    } else {
        Branch::Loop
    };
    CharInj {
        value,
        branch,
        f_min,
        l_half,
    }
}

/// Characterization from already computed profiles.
pub fn injectivity_radius_char_from(profiles: &[CutProfile], opts: &CutOptions) -> CharInj {
    let f = profiles.iter().map(|p| p.focal).fold(f64::INFINITY, f64::min);
    let l = profiles
        .iter()
        .filter_map(|p| p.loop_hit.map(|h| h.t))
        .fold(f64::INFINITY, f64::min);
    characterize(f, 0.5 * l, opts.focal_tol)
}

/// `min(f_min, ℓ_half)` computed from scratch over `m` directions.
pub fn injectivity_radius_char(
    b: &Backend,
    n: &SubmanifoldSpec,
    m: usize,
    t_max: f64,
    dt: f64,
    opts: &CutOptions,
) -> Result<CharInj> {
    let f = f_min(b, n, m, t_max, dt)?;
    let l = loop_scan(b, n, m, t_max, dt, opts)?;
    Ok(characterize(f, l, opts.focal_tol))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WarnerBound {
    /// `arctan(K/Δ)/√K`.
    pub paper: f64,
    /// `arctan(√K/Δ)/√K`.
    pub standard: f64,
}

/// Focal-free lengths for curvature bound `k` and principal curvature bound `delta`.
pub fn warner_bound(k: f64, delta: f64) -> Result<WarnerBound> {
    if !(k > 0.0) {
        return Err(Error::InvalidArgument(format!("curvature bound must be positive, got {k}")));
    }
    if !(delta >= 0.0) {
        return Err(Error::InvalidArgument(format!("principal curvature bound must be ≥ 0, got {delta}")));
    }
    let r = k.sqrt();
    if delta == 0.0 {
        let e = std::f64::consts::FRAC_PI_2 / r;
        return Ok(WarnerBound { paper: e, standard: e });
    }
    Ok(WarnerBound {
        paper: (k / delta).atan() / r,
        standard: (r / delta).atan() / r,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distance::build_atlas;
    use crate::submanifold::Curve;
    use std::f64::consts::PI;

    #[test]
    fn warner_examples() {
        let w = warner_bound(1.0, 0.0).unwrap();
        assert_eq!(w.paper, PI / 2.0);
        assert_eq!(w.standard, PI / 2.0);
        let w = warner_bound(1.0, 1.0).unwrap();
        assert!((w.paper - PI / 4.0).abs() < 1e-15 && (w.standard - PI / 4.0).abs() < 1e-15);
        let w = warner_bound(4.0, 2.0).unwrap();
        assert!((w.paper - 2f64.atan() / 2.0).abs() < 1e-15);
        assert!((w.standard - PI / 8.0).abs() < 1e-15);
        assert!((w.paper - 0.5536).abs() < 1e-4);
        assert!(warner_bound(0.0, 1.0).is_err());
        assert!(warner_bound(-1.0, 1.0).is_err());
    }

    #[test]
    fn characterize_labels() {
        assert_eq!(characterize(f64::INFINITY, 0.5, 1e-3).branch, Branch::Loop);
        assert_eq!(characterize(1.0, 1.0005, 1e-3).branch, Branch::Both);
        assert_eq!(characterize(0.6, 0.7, 1e-3).branch, Branch::Focal);
        assert_eq!(characterize(f64::INFINITY, f64::INFINITY, 1e-3).branch, Branch::Inconclusive);
    }

    #[test]
    fn focal_times_closed_forms() {
        let sphere = Backend::sphere(1.0);
        let eq = SubmanifoldSpec::curve(Curve::equator(), 64);
        let f = eq.frame(&sphere, 0.37, Side::Minus).unwrap();
        assert!((focal_time(&sphere, &eq, &f, 3.0, 1e-3).unwrap() - PI / 2.0).abs() < 1e-6);
        let p = SubmanifoldSpec::point(Vec3::x());
        let f = p.frame(&sphere, 0.2, Side::Plus).unwrap();
        assert!((focal_time(&sphere, &p, &f, 4.0, 1e-3).unwrap() - PI).abs() < 1e-6);
        let flat = Backend::flat_torus([1.0, 1.0]);
        let line = SubmanifoldSpec::curve(Curve::HorizontalCircle { y0: 0.0 }, 64);
        let f = line.frame(&flat, 0.1, Side::Plus).unwrap();
        assert_eq!(focal_time(&flat, &line, &f, 3.0, 1e-3).unwrap(), f64::INFINITY);
    }

    #[test]
    fn flat_line_cut_times_and_loops() {
        let b = Backend::flat_torus([1.0, 1.0]);
        let n = SubmanifoldSpec::curve(Curve::HorizontalCircle { y0: 0.0 }, 64);
        let atlas = build_atlas(&b, &n, 32, 1.2, 1e-3).unwrap();
        let opts = CutOptions::default();
        let profs = profiles(&atlas, &opts).unwrap();
        for p in &profs {
            assert!(p.detected);
            assert!((p.rho - 0.5).abs() < 1e-3, "{p:?}");
            let hit = p.loop_hit.expect("vertical wrap");
            assert!((hit.t - 1.0).abs() < 1e-6);
            assert!(hit.angle_residual < 1e-9);
        }
        let inj = injectivity_radius_char_from(&profs, &opts);
        assert_eq!(inj.branch, Branch::Loop);
        assert!((inj.value - 0.5).abs() < 1e-6);
        let seps = separating_points(&b, &profs, &opts);
        assert!(seps.iter().all(|s| s.sep && s.flag == Dichotomy::Sep));
    }

    #[test]
    fn sphere_equator_char_is_tie() {
        let b = Backend::sphere(1.0);
        let n = SubmanifoldSpec::curve(Curve::equator(), 64);
        let opts = CutOptions::default();
        let inj = injectivity_radius_char(&b, &n, 32, 3.3, 1e-3, &opts).unwrap();
        assert!((inj.f_min - PI / 2.0).abs() < 1e-6);
        assert!((inj.l_half - PI / 2.0).abs() < 1e-4, "{inj:?}");
        assert_eq!(inj.branch, Branch::Both);
    }

    #[test]
    fn oblique_returns_are_not_loops() {
        let b = Backend::flat_torus([1.0, 1.0]);
        let n = SubmanifoldSpec::curve(Curve::HorizontalCircle { y0: 0.0 }, 64);
        // a non-normal direction, marched by hand
        let path = crate::geodesics::integrate_geodesic(&b, &Vec3::new(0.1, 0.0, 0.0), &Vec3::new(0.6, 0.8, 0.0), 2.0, 1e-3)
            .unwrap();
        let opts = CutOptions::default();
        let probe = ReturnProbe::new(&b, &n, opts.capture);
        let (hit, oblique) = scan_returns(&b, &n, &probe, &path, &opts).unwrap();
        assert!(hit.is_none());
        assert!(oblique >= 1);
    }
}
