//! CSV writers. Reals are written with 17 significant digits so that files round-trip exactly.

use std::io::Write;

use csv::Writer;

use crate::cut::{CutProfile, SepPoint};
use crate::distance::{EikonalStats, WavefrontAtlas};
use crate::geometry::Vec3;
use crate::stability::{PointCloud, SweepRecord, SweepTable};

pub type CsvResult = csv::Result<()>;

/// `x` in the fixed 17-significant-digit format.
pub fn real(x: f64) -> String {
    format!("{x:.16e}")
}

fn point(p: &Vec3) -> [String; 3] {
    [real(p.x), real(p.y), real(p.z)]
}

/// One row per direction.
pub fn write_profiles<W: Write>(w: W, profiles: &[CutProfile]) -> CsvResult {
    let mut out = Writer::from_writer(w);
    out.write_record([
        "index", "s", "side", "rho", "detected", "cut_x", "cut_y", "cut_z", "focal", "loop_t", "loop_s",
        "loop_angle", "oblique_returns",
    ])?;
    for p in profiles {
        let [x, y, z] = point(&p.cut_point);
        let (lt, ls, la) = match &p.loop_hit {
            Some(h) => (real(h.t), real(h.s_return), real(h.angle_residual)),
            None => (real(f64::INFINITY), String::new(), String::new()),
        };
        out.write_record([
            p.index.to_string(),
            real(p.s),
            p.side.label().to_string(),
            real(p.rho),
            p.detected.to_string(),
            x,
            y,
            z,
            real(p.focal),
            lt,
            ls,
            la,
            p.oblique_returns.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// One row per cloud point; provenance directions are `;`-separated.
pub fn write_cloud<W: Write>(w: W, cloud: &PointCloud) -> CsvResult {
    let mut out = Writer::from_writer(w);
    out.write_record(["x", "y", "z", "directions"])?;
    for (p, tags) in cloud.points.iter().zip(&cloud.provenance) {
        let [x, y, z] = point(p);
        let tags: Vec<String> = tags.iter().map(|t| t.to_string()).collect();
        out.write_record([x, y, z, tags.join(";")])?;
    }
    out.flush()?;
    Ok(())
}

/// Separating-set membership and dichotomy flag of every detected cut point.
pub fn write_sep<W: Write>(w: W, points: &[SepPoint]) -> CsvResult {
    let mut out = Writer::from_writer(w);
    out.write_record(["index", "x", "y", "z", "cluster", "multiplicity", "sep", "flag"])?;
    for s in points {
        let [x, y, z] = point(&s.point);
        out.write_record([
            s.index.to_string(),
            x,
            y,
            z,
            s.cluster.to_string(),
            s.multiplicity.to_string(),
            s.sep.to_string(),
            s.flag.label().to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// The `τ = 0` record first, then the ladder.
pub fn write_sweep<W: Write>(w: W, table: &SweepTable) -> CsvResult {
    let mut out = Writer::from_writer(w);
    out.write_record([
        "tau",
        "m",
        "dt",
        "t_max",
        "tol",
        "err",
        "inj_direct",
        "inj_char",
        "branch",
        "inj_deviation",
        "hausdorff",
        "hausdorff_forward",
        "hausdorff_backward",
        "rho_max_deviation",
        "rho_mean_deviation",
        "focal_margin",
        "failure",
    ])?;
    let row = |r: &SweepRecord| -> Vec<String> {
        vec![
            real(r.tau),
            r.m.to_string(),
            real(r.dt),
            real(r.t_max),
            real(r.tol),
            real(r.err),
            real(r.inj_direct),
            real(r.inj_char),
            r.branch.map_or("", |b| b.label()).to_string(),
            real(r.inj_deviation),
            real(r.hausdorff),
            real(r.forward),
            real(r.backward),
            real(r.rho_max_deviation),
            real(r.rho_mean_deviation),
            real(r.focal_margin),
            r.failure.clone().unwrap_or_default(),
        ]
    };
    out.write_record(row(&table.base))?;
    for r in &table.records {
        out.write_record(row(r))?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_histogram<W: Write>(w: W, stats: &EikonalStats, bins: usize, top: f64) -> CsvResult {
    let mut out = Writer::from_writer(w);
    out.write_record(["lo", "hi", "count"])?;
    for (lo, hi, c) in stats.histogram(bins, top) {
        out.write_record([real(lo), real(hi), c.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

/// Resolution summary of an atlas as `key,value` rows.
pub fn write_atlas_stats<W: Write>(w: W, atlas: &WavefrontAtlas) -> CsvResult {
    let mut out = Writer::from_writer(w);
    out.write_record(["key", "value"])?;
    let rows = [
        ("directions", atlas.direction_count().to_string()),
        ("samples", atlas.sample_count().to_string()),
        ("dt", real(atlas.dt)),
        ("t_max", real(atlas.t_max)),
        ("certificate", real(atlas.certificate)),
        ("step_aux", real(atlas.step_aux)),
        ("stretch_min", real(atlas.stretch_min)),
        ("stretch_max", real(atlas.stretch_max)),
        ("err", real(atlas.err())),
    ];
    for (k, v) in rows {
        out.write_record([k.to_string(), v])?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::AuxSpace;

    #[test]
    fn reals_round_trip() {
        for x in [0.1, 1.0 / 3.0, std::f64::consts::PI, 1e-300, -2.5e17] {
            assert_eq!(real(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(real(0.5), "5.0000000000000000e-1");
    }

    #[test]
    fn cloud_csv() {
        let mut c = PointCloud::new(AuxSpace::Torus { periods: [1.0, 1.0] }, 1e-6);
        c.insert(Vec3::new(0.25, 0.5, 0.0), 3);
        c.insert(Vec3::new(0.25, 0.5, 0.0), 7);
        let mut buf = Vec::new();
        write_cloud(&mut buf, &c).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "x,y,z,directions\n2.5000000000000000e-1,5.0000000000000000e-1,0.0000000000000000e0,3;7\n"
        );
    }
}
