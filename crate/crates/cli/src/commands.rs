//! The four subcommands. Each writes its files into one directory and returns the verdicts.

use std::collections::BTreeMap;

use anyhow::{bail, Result};
use cutlab_core::cut::{
    cut_locus_cloud, injectivity_radius_char_from, injectivity_radius_direct, profiles, separating_points,
    warner_bound, Branch, CutProfile,
};
use cutlab_core::distance::eikonal_residual;
use cutlab_core::export;
use cutlab_core::geodesics::focal_bracket_by_jacobian;
use cutlab_core::stability::{
    cut_time_continuity_probe, focal_free_persistence_probe, hausdorff_convergence_check, sweep, MemberRun,
    SweepRecord, SweepTable, Verdict,
};
use cutlab_core::submanifold::principal_curvature_bound;
use cutlab_core::{build_atlas, integrate_geodesic, Backend, SubmanifoldSpec, WavefrontAtlas};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::config::{FamilyConfig, RunConfig};
use crate::output::{num, Outputs};

/// Largest accepted `|Inj_direct − Inj_char|`.
pub const CROSS_CHECK_TOL: f64 = 5e-3;
/// Slack on the Warner comparison and on focal-bracket agreement.
pub const FOCAL_SLACK: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Inj,
    Cutlocus,
    Sweep,
    Validate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Inj => "inj",
            Command::Cutlocus => "cutlocus",
            Command::Sweep => "sweep",
            Command::Validate => "validate",
        }
    }
}

pub struct Report {
    pub summary: Value,
    pub verdicts: Vec<Verdict>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }

    pub fn failed(&self) -> Vec<&str> {
        self.verdicts.iter().filter(|v| !v.passed).map(|v| v.name.as_str()).collect()
    }
}

fn verdict(name: &str, passed: bool, detail: String) -> Verdict {
    Verdict {
        name: name.to_string(),
        passed,
        detail,
    }
}

pub fn verdicts_json(vs: &[Verdict]) -> Value {
    Value::Array(
        vs.iter()
            .map(|v| json!({"name": v.name, "passed": v.passed, "detail": v.detail}))
            .collect(),
    )
}

pub fn run(command: Command, cfg: &RunConfig, out: &mut Outputs) -> Result<Report> {
    match command {
        Command::Inj => inj(cfg, out),
        Command::Cutlocus => cutlocus(cfg, out),
        Command::Sweep => sweep_cmd(cfg, out),
        Command::Validate => validate(cfg, out),
    }
}

fn atlas_and_profiles(cfg: &RunConfig, out: &mut Outputs) -> Result<(WavefrontAtlas, Vec<CutProfile>)> {
    let (b, n) = (cfg.backend(), cfg.submanifold());
    let r = &cfg.resolution;
    let atlas = out.time("atlas", || build_atlas(&b, &n, r.m, r.t_max, r.dt))?;
    let opts = cfg.cut_options();
    let profs = out.time("profiles", || profiles(&atlas, &opts))?;
    Ok((atlas, profs))
}

fn atlas_json(atlas: &WavefrontAtlas) -> Value {
    json!({
        "directions": atlas.direction_count(),
        "samples": atlas.sample_count(),
        "certificate": num(atlas.certificate),
        "err": num(atlas.err()),
    })
}

fn inj(cfg: &RunConfig, out: &mut Outputs) -> Result<Report> {
    let (atlas, profs) = atlas_and_profiles(cfg, out)?;
    let direct = injectivity_radius_direct(&profs);
    let ch = injectivity_radius_char_from(&profs, &cfg.cut_options());
    let gap = (direct.value - ch.value).abs();
    let verdicts = vec![
        verdict(
            "inj.conclusive",
            ch.branch != Branch::Inconclusive,
            ch.branch.label().to_string(),
        ),
        verdict(
            "inj.cross_check",
            gap <= CROSS_CHECK_TOL,
            format!("|{} − {}| = {gap:e} ≤ {CROSS_CHECK_TOL:e}", direct.value, ch.value),
        ),
    ];
    let summary = json!({
        "scenario": cfg.scenario,
        "inj_direct": num(direct.value),
        "inj_char": num(ch.value),
        "branch": ch.branch.label(),
        "f_min": num(ch.f_min),
        "l_half": num(ch.l_half),
        "undetected_directions": direct.undetected,
        "atlas": atlas_json(&atlas),
        "verdicts": verdicts_json(&verdicts),
    });
    out.json("inj.json", &summary)?;
    out.csv("profiles.csv", |w| export::write_profiles(w, &profs))?;
    out.csv("atlas.csv", |w| export::write_atlas_stats(w, &atlas))?;
    Ok(Report { summary, verdicts })
}

fn cutlocus(cfg: &RunConfig, out: &mut Outputs) -> Result<Report> {
    let (atlas, profs) = atlas_and_profiles(cfg, out)?;
    let cloud = cut_locus_cloud(&atlas, &profs);
    let sep = out.time("separating", || separating_points(&atlas.backend, &profs, &cfg.cut_options()));
    let mut flags: BTreeMap<&str, usize> = BTreeMap::new();
    for s in &sep {
        *flags.entry(s.flag.label()).or_default() += 1;
    }
    let verdicts = vec![verdict("cloud.nonempty", !cloud.is_empty(), format!("{} points", cloud.len()))];
    let summary = json!({
        "scenario": cfg.scenario,
        "cloud_points": cloud.len(),
        "detected_directions": sep.len(),
        "sep": sep.iter().filter(|s| s.sep).count(),
        "dichotomy": flags,
        "atlas": atlas_json(&atlas),
        "verdicts": verdicts_json(&verdicts),
    });
    out.json("cutlocus.json", &summary)?;
    out.csv("cloud.csv", |w| export::write_cloud(w, &cloud))?;
    out.csv("sep.csv", |w| export::write_sep(w, &sep))?;
    Ok(Report { summary, verdicts })
}

fn record_json(r: &SweepRecord) -> Value {
    json!({
        "tau": num(r.tau),
        "m": r.m,
        "dt": num(r.dt),
        "t_max": num(r.t_max),
        "tol": num(r.tol),
        "err": num(r.err),
        "inj_direct": num(r.inj_direct),
        "inj_char": num(r.inj_char),
        "branch": r.branch.map(|b| b.label()),
        "inj_deviation": num(r.inj_deviation),
        "hausdorff": num(r.hausdorff),
        "hausdorff_forward": num(r.forward),
        "hausdorff_backward": num(r.backward),
        "rho_max_deviation": num(r.rho_max_deviation),
        "rho_mean_deviation": num(r.rho_mean_deviation),
        "focal_margin": num(r.focal_margin),
        "failure": r.failure,
    })
}

/// Scaling the metric by `e^{2τ}` must scale `Inj` and every cut time by `e^τ`.
fn homothety_verdicts(table: &SweepTable, runs: &[MemberRun]) -> Vec<Verdict> {
    let base = &runs[0];
    let mut inj_worst: f64 = 0.0;
    let mut rho_worst: f64 = 0.0;
    let mut inj_ok = true;
    let mut rho_ok = true;
    for run in &runs[1..] {
        let k = run.tau.exp();
        let slack = 3.0 * run.err.max(base.err);
        let d = (run.inj_direct - k * base.inj_direct).abs();
        inj_worst = inj_worst.max(d);
        inj_ok &= d <= slack;
        for (p, q) in run.profiles.iter().zip(&base.profiles) {
            if p.detected && q.detected {
                let d = (p.rho - k * q.rho).abs();
                rho_worst = rho_worst.max(d);
                rho_ok &= d <= slack;
            }
        }
    }
    let members_ok = runs.len() == table.records.len() + 1;
    let mut out = vec![
        verdict("members", members_ok, format!("{} of {} members", runs.len() - 1, table.records.len())),
        verdict("homothety.inj", inj_ok && members_ok, format!("max |Inj_τ − e^τ·Inj_0| = {inj_worst:e}")),
        verdict("homothety.rho", rho_ok && members_ok, format!("max |ρ_τ − e^τ·ρ_0| = {rho_worst:e}")),
    ];
    // the cut locus itself does not move
    out.extend(table.verdicts.iter().filter(|v| v.name.starts_with("hausdorff")).cloned());
    out
}

fn sweep_cmd(cfg: &RunConfig, out: &mut Outputs) -> Result<Report> {
    let Some((family, taus, tols)) = cfg.family() else {
        bail!("scenario {} has no family block", cfg.scenario);
    };
    let res = cfg.sweep_resolution();
    let (table, runs) = out.time("sweep", || sweep(&family, &taus, &res, &tols))?;
    let homothety = matches!(cfg.family, Some(FamilyConfig::Homothety { .. }));
    let continuity = cut_time_continuity_probe(&table, tols.rho);
    let focal_free = focal_free_persistence_probe(&table, tols.focal_margin);
    let sides = hausdorff_convergence_check(&table);
    let mut verdicts = if homothety {
        homothety_verdicts(&table, &runs)
    } else {
        let mut v = table.verdicts.clone();
        v.push(verdict(
            "continuity",
            continuity.passed,
            format!("{:?}", continuity.rows.iter().map(|r| r.max_deviation).collect::<Vec<_>>()),
        ));
        v
    };
    if focal_free.hypothesis {
        verdicts.push(verdict("focal_free", focal_free.threshold.is_some(), focal_free.summary.clone()));
    }
    let summary = json!({
        "scenario": cfg.scenario,
        "family": table.family,
        "tau": taus,
        "resolution": {"m": res.m, "dt": num(res.dt), "t_max": num(res.t_max), "tol": num(res.cut.tol)},
        "tolerances": {
            "inj": num(tols.inj),
            "hausdorff": num(tols.hausdorff),
            "rho": num(tols.rho),
            "focal_margin": num(tols.focal_margin),
        },
        "base": record_json(&table.base),
        "records": table.records.iter().map(record_json).collect::<Vec<_>>(),
        "hausdorff_sides": {
            "forward": sides.forward.iter().cloned().map(num).collect::<Vec<_>>(),
            "backward": sides.backward.iter().cloned().map(num).collect::<Vec<_>>(),
            "forward_decreasing": sides.forward_decreasing,
            "backward_decreasing": sides.backward_decreasing,
        },
        "continuity": continuity.rows.iter().map(|r| json!({
            "tau": num(r.tau),
            "max_deviation": num(r.max_deviation),
            "mean_deviation": num(r.mean_deviation),
            "err": num(r.err),
        })).collect::<Vec<_>>(),
        "focal_free": {
            "rows": focal_free.rows.iter().map(|(t, m, f)| json!({"tau": num(*t), "margin": num(*m), "flag": f})).collect::<Vec<_>>(),
            "hypothesis": focal_free.hypothesis,
            "threshold": focal_free.threshold.map(num),
            "summary": focal_free.summary,
        },
        "verdicts": verdicts_json(&verdicts),
    });
    out.json("sweep.json", &summary)?;
    out.csv("sweep.csv", |w| export::write_sweep(w, &table))?;
    for (k, run) in runs.iter().enumerate() {
        out.csv(&format!("cloud_{k}.csv"), |w| export::write_cloud(w, &run.cloud))?;
    }
    Ok(Report { summary, verdicts })
}

/// Coarsest step of the integrator refinement check; the production step is too fine for the
/// differences to rise above round-off.
pub const REFINEMENT_STEP: f64 = 0.04;

/// Endpoint differences of a geodesic integrated at `dt`, `dt/2` and `dt/4`.
fn refinement(b: &Backend, n: &SubmanifoldSpec, s: f64, t: f64, dt: f64) -> Result<(f64, f64)> {
    let frame = n.frame(b, s, cutlab_core::Side::Plus)?;
    let end = |h: f64| -> Result<_> { Ok(integrate_geodesic(b, &frame.base, &frame.n, t, h)?.endpoint()) };
    let (a, c, d) = (end(dt)?, end(dt / 2.0)?, end(dt / 4.0)?);
    Ok((b.aux_distance(&a, &c), b.aux_distance(&c, &d)))
}

fn validate(cfg: &RunConfig, out: &mut Outputs) -> Result<Report> {
    let (atlas, profs) = atlas_and_profiles(cfg, out)?;
    let b = atlas.backend.clone();
    let n = atlas.submanifold.clone();
    let v = &cfg.validate;
    let r = &cfg.resolution;
    let mut verdicts = Vec::new();

    let cut_points: Vec<_> = profs.iter().filter(|p| p.detected).map(|p| p.cut_point).collect();
    let stats = out.time("eikonal", || eikonal_residual(&atlas, v.grid_spacing, &cut_points, v.exclusion))?;
    let fraction = stats.fraction_below(v.eikonal_tol);
    verdicts.push(verdict(
        "eikonal",
        stats.evaluated > 0 && fraction >= v.eikonal_fraction,
        format!("{fraction:.4} of {} points below {:e}", stats.evaluated, v.eikonal_tol),
    ));

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let params: Vec<f64> = (0..v.refinement_directions).map(|_| rng.gen::<f64>()).collect();
    let t = r.t_max.min(1.0);
    let mut rows = Vec::new();
    let mut order_ok = true;
    out.time("refinement", || -> Result<()> {
        for &s in &params {
            let (e1, e2) = refinement(&b, &n, s, t, REFINEMENT_STEP)?;
            let ratio = e1 / e2;
            // differences at round-off level carry no order information
            order_ok &= e1 <= 1e-10 || ratio >= 8.0;
            rows.push(json!({"s": num(s), "diff_dt": num(e1), "diff_half": num(e2), "ratio": num(ratio)}));
        }
        Ok(())
    })?;
    verdicts.push(verdict("integrator.refinement", order_ok, format!("{} directions to t = {t}, steps {REFINEMENT_STEP}/1,2,4", params.len())));

    let mut brackets = Vec::new();
    let mut bracket_ok = true;
    out.time("focal_brackets", || -> Result<()> {
        for &s in &params {
            let frame = n.frame(&b, s, cutlab_core::Side::Plus)?;
            let jacobi = cutlab_core::cut::focal_time(&b, &n, &frame, r.t_max, r.dt)?;
            let bracket = focal_bracket_by_jacobian(&b, &n, &frame, r.t_max, r.dt, 1e-5)?;
            let ok = match bracket {
                Some((lo, hi)) => jacobi >= lo - FOCAL_SLACK && jacobi <= hi + FOCAL_SLACK,
                None => !jacobi.is_finite() || jacobi > r.t_max - FOCAL_SLACK,
            };
            bracket_ok &= ok;
            brackets.push(json!({
                "s": num(s),
                "jacobi": num(jacobi),
                "bracket": bracket.map(|(lo, hi)| vec![num(lo), num(hi)]),
                "agree": ok,
            }));
        }
        Ok(())
    })?;
    verdicts.push(verdict("focal.bracket", bracket_ok, format!("{} directions", params.len())));

    let f_min = profs.iter().map(|p| p.focal).fold(f64::INFINITY, f64::min);
    let warner = if n.dim() == 0 {
        json!({"skipped": "point submanifold"})
    } else {
        let k = b
            .lattice(64)
            .iter()
            .map(|p| b.gauss_curvature(p))
            .collect::<cutlab_core::Result<Vec<_>>>()?
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max);
        let delta = principal_curvature_bound(&b, &n)?;
        if k > 0.0 {
            let w = warner_bound(k, delta)?;
            verdicts.push(verdict(
                "warner.standard",
                f_min >= w.standard - FOCAL_SLACK,
                format!("f_min {f_min} ≥ {} − {FOCAL_SLACK:e}", w.standard),
            ));
            json!({
                "k_bound": num(k),
                "delta": num(delta),
                "f_min": num(f_min),
                "epsilon_standard": num(w.standard),
                "epsilon_paper": num(w.paper),
                "standard_holds": f_min >= w.standard - FOCAL_SLACK,
                "paper_holds": f_min >= w.paper - FOCAL_SLACK,
            })
        } else {
            json!({"skipped": "no positive curvature bound", "k_bound": num(k), "delta": num(delta)})
        }
    };

    let summary = json!({
        "scenario": cfg.scenario,
        "eikonal": {
            "grid_spacing": num(stats.grid_spacing),
            "exclusion": num(stats.exclusion),
            "evaluated": stats.evaluated,
            "excluded": stats.excluded,
            "dropped": stats.dropped,
            "fraction_below_tol": num(fraction),
            "tol": num(v.eikonal_tol),
            "max": num(stats.max()),
            "mean": num(stats.mean()),
            "p95": num(stats.quantile(0.95)),
        },
        "refinement": rows,
        "focal_brackets": brackets,
        "warner": warner,
        "atlas": atlas_json(&atlas),
        "verdicts": verdicts_json(&verdicts),
    });
    out.json("validate.json", &summary)?;
    out.csv("eikonal_histogram.csv", |w| export::write_histogram(w, &stats, 20, 5.0 * v.eikonal_tol))?;
    Ok(Report { summary, verdicts })
}
