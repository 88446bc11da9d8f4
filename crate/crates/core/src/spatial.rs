//! Uniform bucket grid over chart or ambient coordinates.

use std::collections::HashMap;

use crate::geometry::{AuxSpace, Vec3};

#[derive(Clone, Debug)]
enum Grid {
    /// Periodic grid of `n[0] × n[1]` cells.
    Torus { periods: [f64; 2], n: [usize; 2] },
    Ambient { cell: f64 },
}

/// Exact fixed-radius neighbor queries in the auxiliary metric. Only occupied cells are stored.
#[derive(Clone, Debug)]
pub struct SpatialIndex {
    space: AuxSpace,
    points: Vec<Vec3>,
    grid: Grid,
    /// Point indices grouped by cell.
    order: Vec<u32>,
    cells: HashMap<[i64; 3], (u32, u32)>,
}

impl SpatialIndex {
    /// Builds the index with cells of width about `cell`. Chart points must be canonical.
    pub fn new(space: AuxSpace, points: Vec<Vec3>, cell: f64) -> Self {
        assert!(cell > 0.0, "cell width must be positive");
        let grid = match space {
            AuxSpace::Torus { periods } => Grid::Torus {
                periods,
                n: [
                    ((periods[0] / cell).floor() as usize).clamp(1, 1 << 20),
                    ((periods[1] / cell).floor() as usize).clamp(1, 1 << 20),
                ],
            },
            AuxSpace::Ambient => Grid::Ambient { cell },
        };
        let keys: Vec<[i64; 3]> = points.iter().map(|p| grid.key(p)).collect();
        let mut order: Vec<u32> = (0..points.len() as u32).collect();
        order.sort_by_key(|&k| (keys[k as usize], k));
        let mut cells = HashMap::new();
        let mut start = 0;
        while start < order.len() {
            let key = keys[order[start] as usize];
            let mut end = start + 1;
            while end < order.len() && keys[order[end] as usize] == key {
                end += 1;
            }
            cells.insert(key, (start as u32, end as u32));
            start = end;
        }
        SpatialIndex {
            space,
            points,
            grid,
            order,
            cells,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, k: usize) -> &Vec3 {
        &self.points[k]
    }

    /// Calls `f(index, distance)` for every point within aux distance `r` of `q`.
    pub fn for_each_within<F: FnMut(usize, f64)>(&self, q: &Vec3, r: f64, mut f: F) {
        let mut visit = |key: [i64; 3]| {
            if let Some(&(a, b)) = self.cells.get(&key) {
                for &k in &self.order[a as usize..b as usize] {
                    let d = self.space.distance(&self.points[k as usize], q);
                    if d <= r {
                        f(k as usize, d);
                    }
                }
            }
        };
        match &self.grid {
            Grid::Torus { periods, n } => {
                let w = [periods[0] / n[0] as f64, periods[1] / n[1] as f64];
                let span = |c: f64, w: f64, n: usize| -> (i64, i64) {
                    let lo = ((c - r) / w).floor() as i64;
                    let hi = ((c + r) / w).floor() as i64;
                    if hi - lo + 1 >= n as i64 {
                        (0, n as i64 - 1)
                    } else {
                        (lo, hi)
                    }
                };
                let (x0, x1) = span(q.x, w[0], n[0]);
                let (y0, y1) = span(q.y, w[1], n[1]);
                for j in y0..=y1 {
                    let jj = j.rem_euclid(n[1] as i64);
                    for i in x0..=x1 {
                        visit([i.rem_euclid(n[0] as i64), jj, 0]);
                    }
                }
            }
            Grid::Ambient { cell } => {
                let lo = ambient_cell(*cell, &(q - Vec3::repeat(r)));
                let hi = ambient_cell(*cell, &(q + Vec3::repeat(r)));
                for i in lo[0]..=hi[0] {
                    for j in lo[1]..=hi[1] {
                        for k in lo[2]..=hi[2] {
                            visit([i, j, k]);
                        }
                    }
                }
            }
        }
    }

    /// All points within `r` of `q` as `(index, distance)`, sorted by index.
    pub fn within(&self, q: &Vec3, r: f64) -> Vec<(usize, f64)> {
        let mut out = Vec::new();
        self.for_each_within(q, r, |k, d| out.push((k, d)));
        out.sort_unstable_by_key(|e| e.0);
        out
    }

    /// Nearest point within `r` (ties to the smallest index).
    pub fn nearest_within(&self, q: &Vec3, r: f64) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        self.for_each_within(q, r, |k, d| {
            if best.is_none_or(|(bk, bd)| d < bd || (d == bd && k < bk)) {
                best = Some((k, d));
            }
        });
        best
    }
}

impl Grid {
    fn key(&self, p: &Vec3) -> [i64; 3] {
        match self {
            Grid::Torus { periods, n } => {
                let idx = |c: f64, l: f64, n: usize| (((c.rem_euclid(l) / l) * n as f64).floor() as i64).min(n as i64 - 1);
                [idx(p.x, periods[0], n[0]), idx(p.y, periods[1], n[1]), 0]
            }
            Grid::Ambient { cell } => ambient_cell(*cell, p),
        }
    }
}

fn ambient_cell(cell: f64, p: &Vec3) -> [i64; 3] {
    [
        (p.x / cell).floor() as i64,
        (p.y / cell).floor() as i64,
        (p.z / cell).floor() as i64,
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute(space: &AuxSpace, pts: &[Vec3], q: &Vec3, r: f64) -> Vec<usize> {
        (0..pts.len()).filter(|&k| space.distance(&pts[k], q) <= r).collect()
    }

    #[test]
    fn torus_matches_linear_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let space = AuxSpace::Torus { periods: [1.0, 2.0] };
        let pts: Vec<Vec3> = (0..2000)
            .map(|_| Vec3::new(rng.gen::<f64>(), 2.0 * rng.gen::<f64>(), 0.0))
            .collect();
        let idx = SpatialIndex::new(space, pts.clone(), 0.05);
        for _ in 0..200 {
            let q = Vec3::new(rng.gen::<f64>(), 2.0 * rng.gen::<f64>(), 0.0);
            for r in [0.0, 0.01, 0.07, 0.3, 1.5] {
                let got: Vec<usize> = idx.within(&q, r).into_iter().map(|e| e.0).collect();
                assert_eq!(got, brute(&space, &pts, &q, r));
            }
        }
    }

    #[test]
    fn ambient_matches_linear_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let pts: Vec<Vec3> = (0..2000)
            .map(|_| {
                let v = Vec3::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
                v.normalize()
            })
            .collect();
        let idx = SpatialIndex::new(AuxSpace::Ambient, pts.clone(), 0.1);
        for _ in 0..200 {
            let q = Vec3::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5).normalize();
            for r in [0.0, 0.02, 0.15, 0.8] {
                let got: Vec<usize> = idx.within(&q, r).into_iter().map(|e| e.0).collect();
                assert_eq!(got, brute(&AuxSpace::Ambient, &pts, &q, r));
            }
        }
    }

    #[test]
    fn nearest_breaks_ties_by_index() {
        let pts = vec![Vec3::new(0.2, 0.0, 0.0), Vec3::new(0.0, 0.2, 0.0), Vec3::new(0.9, 0.0, 0.0)];
        let idx = SpatialIndex::new(AuxSpace::Torus { periods: [1.0, 1.0] }, pts, 0.1);
        let (k, d) = idx.nearest_within(&Vec3::zeros(), 0.5).unwrap();
        assert_eq!(k, 2);
        assert!((d - 0.1).abs() < 1e-12);
        assert!(idx.nearest_within(&Vec3::new(0.5, 0.5, 0.0), 0.1).is_none());
    }

    proptest! {
        #[test]
        fn wraparound_queries_are_exact(qx in 0.0f64..1.0, qy in 0.0f64..1.0, r in 0.0f64..0.6, cell in 0.01f64..0.5) {
            let space = AuxSpace::Torus { periods: [1.0, 1.0] };
            let pts: Vec<Vec3> = (0..20).flat_map(|i| (0..20).map(move |j| Vec3::new(i as f64 / 20.0, j as f64 / 20.0, 0.0))).collect();
            let idx = SpatialIndex::new(space, pts.clone(), cell);
            let q = Vec3::new(qx, qy, 0.0);
            let got: Vec<usize> = idx.within(&q, r).into_iter().map(|e| e.0).collect();
            prop_assert_eq!(got, brute(&space, &pts, &q, r));
        }
    }
}
