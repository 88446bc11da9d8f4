//! Hausdorff distances between cut loci and convergence sweeps over metric and embedding
//! families.

use rayon::prelude::*;

use crate::cut::{
    cut_locus_cloud, injectivity_radius_char_from, injectivity_radius_direct, profiles, Branch, CutOptions,
    CutProfile,
};
use crate::distance::build_atlas;
use crate::error::{Error, Result};
use crate::geometry::{AuxSpace, Backend, ScalarField, Vec3};
use crate::submanifold::{embedding_family, SubmanifoldSpec};

/// A finite set of points in one auxiliary space, with the directions that produced each point.
#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud {
    pub space: AuxSpace,
    pub points: Vec<Vec3>,
    pub provenance: Vec<Vec<usize>>,
    pub dedup_radius: f64,
}

impl PointCloud {
    pub fn new(space: AuxSpace, dedup_radius: f64) -> Self {
        PointCloud {
            space,
            points: Vec::new(),
            provenance: Vec::new(),
            dedup_radius,
        }
    }

    /// A cloud without deduplication or provenance.
    pub fn from_points(space: AuxSpace, points: Vec<Vec3>) -> Self {
        let provenance = vec![Vec::new(); points.len()];
        PointCloud {
            space,
            points,
            provenance,
            dedup_radius: 0.0,
        }
    }

    /// Adds `p` unless a stored point lies within the dedup radius, in which case `tag` is merged
    /// into that point's provenance.
    pub fn insert(&mut self, p: Vec3, tag: usize) {
        if let Some(k) = self.points.iter().position(|q| self.space.distance(q, &p) <= self.dedup_radius) {
            self.provenance[k].push(tag);
        } else {
            self.points.push(p);
            self.provenance.push(vec![tag]);
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HausdorffParts {
    /// `sup_{a∈A} d(a, B)`
    pub forward: f64,
    /// `sup_{b∈B} d(A, b)`
    pub backward: f64,
}

impl HausdorffParts {
    pub fn value(&self) -> f64 {
        self.forward.max(self.backward)
    }
}

fn directed(space: &AuxSpace, a: &[Vec3], b: &[Vec3]) -> f64 {
    a.par_iter()
        .map(|p| b.iter().map(|q| space.distance(p, q)).fold(f64::INFINITY, f64::min))
        .reduce(|| 0.0, f64::max)
}

/// Both one-sided components of the Hausdorff distance, by exhaustive search.
pub fn hausdorff_parts(a: &PointCloud, b: &PointCloud) -> Result<HausdorffParts> {
    if a.space != b.space {
        return Err(Error::BackendMismatch);
    }
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyCloud);
    }
    Ok(HausdorffParts {
        forward: directed(&a.space, &a.points, &b.points),
        backward: directed(&a.space, &b.points, &a.points),
    })
}

pub fn hausdorff(a: &PointCloud, b: &PointCloud) -> Result<f64> {
    Ok(hausdorff_parts(a, b)?.value())
}

/// Resolution parameters shared by every member of a sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Resolution {
    pub m: usize,
    pub dt: f64,
    pub t_max: f64,
    pub cut: CutOptions,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Family {
    /// `e^{2τφ}·g` with fixed `N`.
    Conformal {
        base: Backend,
        phi: ScalarField,
        n: SubmanifoldSpec,
    },
    /// `(1 − τ)·g0 + τ·g1` with fixed `N`.
    Blend {
        from: Backend,
        to: Backend,
        n: SubmanifoldSpec,
    },
    /// Fixed metric, `N_τ` interpolating `from` and `to`.
    Embedding {
        backend: Backend,
        from: SubmanifoldSpec,
        to: SubmanifoldSpec,
    },
}

impl Family {
    pub fn member(&self, tau: f64) -> Result<(Backend, SubmanifoldSpec)> {
        match self {
            Family::Conformal { base, phi, n } => Ok((base.conformal_family(phi, tau), n.clone())),
            Family::Blend { from, to, n } => Ok((Backend::linear_blend(from, to, tau)?, n.clone())),
            Family::Embedding { backend, from, to } => Ok((backend.clone(), embedding_family(backend, from, to, tau)?)),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Family::Conformal { .. } => "conformal",
            Family::Blend { .. } => "blend",
            Family::Embedding { .. } => "embedding",
        }
    }
}

/// Everything computed for one family member.
#[derive(Clone, Debug)]
pub struct MemberRun {
    pub tau: f64,
    pub err: f64,
    pub certificate: f64,
    pub profiles: Vec<CutProfile>,
    pub inj_direct: f64,
    pub inj_char: f64,
    pub branch: Branch,
    pub f_min: f64,
    pub l_half: f64,
    pub cloud: PointCloud,
    /// `min (t_f − ρ)` over directions with a detected cut.
    pub focal_margin: f64,
}

pub fn run_member(b: &Backend, n: &SubmanifoldSpec, tau: f64, res: &Resolution) -> Result<MemberRun> {
    let atlas = build_atlas(b, n, res.m, res.t_max, res.dt)?;
    let profs = profiles(&atlas, &res.cut)?;
    let direct = injectivity_radius_direct(&profs);
    let ch = injectivity_radius_char_from(&profs, &res.cut);
    let cloud = cut_locus_cloud(&atlas, &profs);
    let focal_margin = profs
        .iter()
        .filter(|p| p.detected)
        .map(|p| p.focal - p.rho)
        .fold(f64::INFINITY, f64::min);
    Ok(MemberRun {
        tau,
        err: atlas.err(),
        certificate: atlas.certificate,
        inj_direct: direct.value,
        inj_char: ch.value,
        branch: ch.branch,
        f_min: ch.f_min,
        l_half: ch.l_half,
        cloud,
        focal_margin,
        profiles: profs,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRecord {
    pub tau: f64,
    pub m: usize,
    pub dt: f64,
    pub t_max: f64,
    pub tol: f64,
    /// `max(err_τ, err_0)`
    pub err: f64,
    pub inj_direct: f64,
    pub inj_char: f64,
    pub branch: Option<Branch>,
    /// `|Inj_direct(τ) − Inj_direct(0)|`
    pub inj_deviation: f64,
    pub hausdorff: f64,
    pub forward: f64,
    pub backward: f64,
    pub rho_max_deviation: f64,
    pub rho_mean_deviation: f64,
    pub focal_margin: f64,
    /// Set when the member failed; the other columns are then NaN.
    pub failure: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepTolerances {
    pub inj: f64,
    pub hausdorff: f64,
    pub rho: f64,
    /// Required `t_f − ρ` for the focal-free flag.
    pub focal_margin: f64,
}

impl Default for SweepTolerances {
    fn default() -> Self {
        SweepTolerances {
            inj: 1e-2,
            hausdorff: 2e-2,
            rho: 1e-2,
            focal_margin: 1e-3,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SweepTable {
    pub family: String,
    pub base: SweepRecord,
    /// One record per `τ`, in ladder order.
    pub records: Vec<SweepRecord>,
    pub verdicts: Vec<Verdict>,
}

impl SweepTable {
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }

    pub fn verdict(&self, name: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.name == name)
    }

    pub fn column(&self, f: impl Fn(&SweepRecord) -> f64) -> Vec<f64> {
        self.records.iter().map(f).collect()
    }
}

fn check_ladder(taus: &[f64]) -> Result<()> {
    if taus.is_empty() {
        return Err(Error::InvalidArgument("empty τ ladder".into()));
    }
    if taus.iter().any(|t| !(*t > 0.0)) || taus.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidArgument("τ ladder must be positive and strictly decreasing".into()));
    }
    Ok(())
}

/// `values[i+1] ≤ values[i] + slack[i+1]` along the ladder.
pub fn nonincreasing_with_slack(values: &[f64], slack: &[f64]) -> bool {
    values
        .windows(2)
        .zip(slack.iter().skip(1))
        .all(|(w, s)| w[1].is_finite() && w[1] <= w[0] + s)
}

fn record(base: &MemberRun, run: &MemberRun, res: &Resolution) -> Result<SweepRecord> {
    let parts = hausdorff_parts(&run.cloud, &base.cloud)?;
    let mut max_dev: f64 = 0.0;
    let mut sum = 0.0;
    let mut count = 0usize;
    for (p, q) in run.profiles.iter().zip(&base.profiles) {
        if p.detected && q.detected && p.s == q.s && p.side == q.side {
            let d = (p.rho - q.rho).abs();
            max_dev = max_dev.max(d);
            sum += d;
            count += 1;
        }
    }
    Ok(SweepRecord {
        tau: run.tau,
        m: res.m,
        dt: res.dt,
        t_max: res.t_max,
        tol: res.cut.tol,
        err: run.err.max(base.err),
        inj_direct: run.inj_direct,
        inj_char: run.inj_char,
        branch: Some(run.branch),
        inj_deviation: (run.inj_direct - base.inj_direct).abs(),
        hausdorff: parts.value(),
        forward: parts.forward,
        backward: parts.backward,
        rho_max_deviation: max_dev,
        rho_mean_deviation: if count > 0 { sum / count as f64 } else { f64::NAN },
        focal_margin: run.focal_margin,
        failure: None,
    })
}

fn failed_record(tau: f64, res: &Resolution, e: &Error) -> SweepRecord {
    SweepRecord {
        tau,
        m: res.m,
        dt: res.dt,
        t_max: res.t_max,
        tol: res.cut.tol,
        err: f64::NAN,
        inj_direct: f64::NAN,
        inj_char: f64::NAN,
        branch: None,
        inj_deviation: f64::NAN,
        hausdorff: f64::NAN,
        forward: f64::NAN,
        backward: f64::NAN,
        rho_max_deviation: f64::NAN,
        rho_mean_deviation: f64::NAN,
        focal_margin: f64::NAN,
        failure: Some(e.to_string()),
    }
}

/// Runs `τ = 0` and every ladder member, compares each against `τ = 0` and derives the verdicts.
/// Member failures are recorded in their rows; the base member must succeed.
pub fn sweep(family: &Family, taus: &[f64], res: &Resolution, tols: &SweepTolerances) -> Result<(SweepTable, Vec<MemberRun>)> {
    check_ladder(taus)?;
    let (b0, n0) = family.member(0.0)?;
    let base = run_member(&b0, &n0, 0.0, res)?;
    let outcomes: Vec<Result<MemberRun>> = taus
        .par_iter()
        .map(|&tau| {
            let (b, n) = family.member(tau)?;
            run_member(&b, &n, tau, res)
        })
        .collect();
    let mut records = Vec::with_capacity(taus.len());
    let mut runs = Vec::with_capacity(taus.len());
    for (tau, out) in taus.iter().zip(outcomes) {
        match out.and_then(|run| record(&base, &run, res).map(|r| (r, run))) {
            Ok((r, run)) => {
                records.push(r);
                runs.push(run);
            }
            Err(e) => records.push(failed_record(*tau, res, &e)),
        }
    }
    let base_record = record(&base, &base, res)?;
    let mut table = SweepTable {
        family: family.kind().to_string(),
        base: base_record,
        records,
        verdicts: Vec::new(),
    };
    table.verdicts = sweep_verdicts(&table, tols);
    let mut all = vec![base];
    all.extend(runs);
    Ok((table, all))
}

fn sweep_verdicts(table: &SweepTable, tols: &SweepTolerances) -> Vec<Verdict> {
    let slack: Vec<f64> = table.column(|r| 2.0 * r.err);
    let mut out = Vec::new();
    let failures: Vec<String> = table
        .records
        .iter()
        .filter_map(|r| r.failure.as_ref().map(|f| format!("τ={}: {f}", r.tau)))
        .collect();
    out.push(Verdict {
        name: "members".into(),
        passed: failures.is_empty(),
        detail: if failures.is_empty() {
            "all members computed".into()
        } else {
            failures.join("; ")
        },
    });
    let mut series = |name: &str, values: Vec<f64>, tol: f64| {
        let last = values.last().cloned().unwrap_or(f64::NAN);
        let dec = nonincreasing_with_slack(&values, &slack);
        out.push(Verdict {
            name: format!("{name}.decreasing"),
            passed: dec,
            detail: format!("{values:?}"),
        });
        out.push(Verdict {
            name: format!("{name}.final"),
            passed: last < tol,
            detail: format!("{last:e} < {tol:e}"),
        });
    };
    series("inj", table.column(|r| r.inj_deviation), tols.inj);
    series("hausdorff", table.column(|r| r.hausdorff), tols.hausdorff);
    series("rho", table.column(|r| r.rho_max_deviation), tols.rho);
    let h = hausdorff_convergence_check(table);
    out.push(Verdict {
        name: "hausdorff.sides".into(),
        passed: h.passed,
        detail: format!("forward {:?}, backward {:?}", h.forward, h.backward),
    });
    out
}

/// Sweep over a metric family with fixed `N`.
pub fn sweep_metric_family(family: &Family, taus: &[f64], res: &Resolution, tols: &SweepTolerances) -> Result<SweepTable> {
    if matches!(family, Family::Embedding { .. }) {
        return Err(Error::InvalidArgument("sweep_metric_family needs a metric family".into()));
    }
    Ok(sweep(family, taus, res, tols)?.0)
}

/// Sweep over an embedding family with fixed metric.
pub fn sweep_embedding_family(
    b: &Backend,
    n0: &SubmanifoldSpec,
    n1: &SubmanifoldSpec,
    taus: &[f64],
    res: &Resolution,
    tols: &SweepTolerances,
) -> Result<SweepTable> {
    let family = Family::Embedding {
        backend: b.clone(),
        from: n0.clone(),
        to: n1.clone(),
    };
    Ok(sweep(&family, taus, res, tols)?.0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ContinuityRow {
    pub tau: f64,
    pub max_deviation: f64,
    pub mean_deviation: f64,
    pub err: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ContinuityTable {
    pub rows: Vec<ContinuityRow>,
    pub passed: bool,
}

/// Matched cut-time deviations `|ρ_τ(n_τ) − ρ_0(n_0)|`, directions matched by `(s, side)`.
pub fn cut_time_continuity_probe(table: &SweepTable, tol: f64) -> ContinuityTable {
    let rows: Vec<ContinuityRow> = table
        .records
        .iter()
        .map(|r| ContinuityRow {
            tau: r.tau,
            max_deviation: r.rho_max_deviation,
            mean_deviation: r.rho_mean_deviation,
            err: r.err,
        })
        .collect();
    let values: Vec<f64> = rows.iter().map(|r| r.max_deviation).collect();
    let slack: Vec<f64> = rows.iter().map(|r| 2.0 * r.err).collect();
    let passed = nonincreasing_with_slack(&values, &slack) && values.last().is_some_and(|v| *v < tol);
    ContinuityTable { rows, passed }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FocalFreeReport {
    /// `(τ, margin, flag)` with `τ = 0` first.
    pub rows: Vec<(f64, f64, bool)>,
    /// False when `τ = 0` itself is not focal-free with the required margin.
    pub hypothesis: bool,
    /// Largest ladder `τ` below which every flag is true (`None` if even the smallest fails).
    pub threshold: Option<f64>,
    pub summary: String,
}

/// Whether the cut locus stays free of focal points along the ladder.
pub fn focal_free_persistence_probe(table: &SweepTable, margin: f64) -> FocalFreeReport {
    let mut rows = vec![(0.0, table.base.focal_margin, table.base.focal_margin > margin)];
    rows.extend(table.records.iter().map(|r| (r.tau, r.focal_margin, r.focal_margin > margin)));
    let hypothesis = rows[0].2;
    let mut threshold = None;
    for r in rows[1..].iter().rev() {
        if r.2 {
            threshold = Some(r.0);
        } else {
            break;
        }
    }
    let summary = if !hypothesis {
        "hypothesis not satisfied".to_string()
    } else {
        match threshold {
            Some(t) => format!("focal-free for all τ ≤ {t}"),
            None => "focal points reappear at the smallest τ".to_string(),
        }
    };
    FocalFreeReport {
        rows,
        hypothesis,
        threshold,
        summary,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HausdorffCheck {
    pub forward: Vec<f64>,
    pub backward: Vec<f64>,
    pub forward_decreasing: bool,
    pub backward_decreasing: bool,
    pub passed: bool,
}

/// Both one-sided Hausdorff components must decrease along the ladder (slack `2·err`).
pub fn hausdorff_convergence_check(table: &SweepTable) -> HausdorffCheck {
    let slack = table.column(|r| 2.0 * r.err);
    let forward = table.column(|r| r.forward);
    let backward = table.column(|r| r.backward);
    let fd = nonincreasing_with_slack(&forward, &slack);
    let bd = nonincreasing_with_slack(&backward, &slack);
    HausdorffCheck {
        forward,
        backward,
        forward_decreasing: fd,
        backward_decreasing: bd,
        passed: fd && bd,
    }
}

/// Sides of a single comparison, for clouds that are not part of a sweep.
pub fn hausdorff_sides_check(pairs: &[(PointCloud, PointCloud)], slack: f64) -> Result<HausdorffCheck> {
    let mut forward = Vec::new();
    let mut backward = Vec::new();
    for (a, b) in pairs {
        let p = hausdorff_parts(a, b)?;
        forward.push(p.forward);
        backward.push(p.backward);
    }
    let s = vec![slack; pairs.len()];
    let fd = nonincreasing_with_slack(&forward, &s);
    let bd = nonincreasing_with_slack(&backward, &s);
    Ok(HausdorffCheck {
        forward,
        backward,
        forward_decreasing: fd,
        backward_decreasing: bd,
        passed: fd && bd,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn torus() -> AuxSpace {
        AuxSpace::Torus { periods: [1.0, 1.0] }
    }

    #[test]
    fn hausdorff_examples() {
        let a = PointCloud::from_points(torus(), vec![Vec3::new(0.1, 0.1, 0.0)]);
        let b = PointCloud::from_points(torus(), vec![Vec3::new(0.9, 0.1, 0.0)]);
        assert!((hausdorff(&a, &b).unwrap() - 0.2).abs() < 1e-15);
        assert_eq!(hausdorff(&a, &a).unwrap(), 0.0);
        let empty = PointCloud::new(torus(), 1e-6);
        assert!(matches!(hausdorff(&a, &empty), Err(Error::EmptyCloud)));
        let amb = PointCloud::from_points(AuxSpace::Ambient, vec![Vec3::z()]);
        assert!(matches!(hausdorff(&a, &amb), Err(Error::BackendMismatch)));
    }

    #[test]
    fn hausdorff_sides_attribute_missing_half() {
        let full: Vec<Vec3> = (0..20).map(|i| Vec3::new(i as f64 / 20.0, 0.5, 0.0)).collect();
        let half: Vec<Vec3> = full[..10].to_vec();
        let a = PointCloud::from_points(torus(), half);
        let b = PointCloud::from_points(torus(), full);
        let p = hausdorff_parts(&a, &b).unwrap();
        assert_eq!(p.forward, 0.0);
        assert!(p.backward > 0.2);
    }

    #[test]
    fn dedup_merges_provenance() {
        let mut c = PointCloud::new(torus(), 1e-6);
        c.insert(Vec3::new(0.5, 0.5, 0.0), 0);
        c.insert(Vec3::new(0.5 + 1e-7, 0.5, 0.0), 3);
        c.insert(Vec3::new(0.6, 0.5, 0.0), 4);
        assert_eq!(c.len(), 2);
        assert_eq!(c.provenance[0], vec![0, 3]);
    }

    #[test]
    fn triangle_inequality_on_random_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut cloud = |n: usize| {
            PointCloud::from_points(torus(), (0..n).map(|_| Vec3::new(rng.gen(), rng.gen(), 0.0)).collect())
        };
        for _ in 0..50 {
            let (a, b, c) = (cloud(20), cloud(30), cloud(10));
            let ab = hausdorff(&a, &b).unwrap();
            let bc = hausdorff(&b, &c).unwrap();
            let ac = hausdorff(&a, &c).unwrap();
            assert!(ac <= ab + bc + 1e-12);
            assert_eq!(ab, hausdorff(&b, &a).unwrap());
        }
    }

    #[test]
    fn slack_rule() {
        assert!(nonincreasing_with_slack(&[0.3, 0.2, 0.21], &[0.0, 0.0, 0.02]));
        assert!(!nonincreasing_with_slack(&[0.3, 0.2, 0.25], &[0.0, 0.0, 0.02]));
        assert!(!nonincreasing_with_slack(&[0.3, f64::NAN], &[0.0, 1.0]));
    }
}
