//! Synthetic vascular layouts on the unit square.
//!
//! Seed points are placed by Poisson-disk dart throwing; walkers start from
//! them and grow persistent random walks until the total centreline length
//! reaches the target set by `density_sv`. A larger `seeds_fraction` means
//! fewer distinct seed points shared by more walkers, i.e. more clustering.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::model::Grid;
use crate::stats::RngStream;

/// Number of random walkers per layout.
pub const WALKERS: usize = 24;
/// Length of one walk step, in domain sides.
pub const STEP_LENGTH: f64 = 0.04;
/// Total centreline length in domain sides per unit of `density_sv`.
pub const LENGTH_PER_DENSITY: f64 = 1e-3;
/// Standard deviation of the heading change per step, in radians.
const TURN_STD: f64 = 0.6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub a: [f64; 2],
    pub b: [f64; 2],
}

impl Segment {
    pub fn length(&self) -> f64 {
        (self.b[0] - self.a[0]).hypot(self.b[1] - self.a[1])
    }

    /// Euclidean distance from `p` to the closed segment.
    pub fn distance(&self, p: [f64; 2]) -> f64 {
        let (dx, dy) = (self.b[0] - self.a[0], self.b[1] - self.a[1]);
        let (px, py) = (p[0] - self.a[0], p[1] - self.a[1]);
        let len2 = dx * dx + dy * dy;
        let t = if len2 > 0.0 {
            ((px * dx + py * dy) / len2).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let (ex, ey) = (px - t * dx, py - t * dy);
        (ex * ex + ey * ey).sqrt()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VascularLayout {
    pub segments: Vec<Segment>,
    pub inlets: Vec<[f64; 2]>,
    pub density_sv: f64,
    pub seeds_fraction: f64,
}

impl VascularLayout {
    pub fn total_length(&self) -> f64 {
        self.segments.iter().map(Segment::length).sum()
    }

    /// Segment list as CSV (`x0,y0,x1,y1`).
    pub fn segments_csv(&self) -> String {
        let mut out = String::from("x0,y0,x1,y1\n");
        for s in &self.segments {
            let _ = writeln!(out, "{:e},{:e},{:e},{:e}", s.a[0], s.a[1], s.b[0], s.b[1]);
        }
        out
    }

    pub fn inlets_csv(&self) -> String {
        let mut out = String::from("x,y\n");
        for p in &self.inlets {
            let _ = writeln!(out, "{:e},{:e}", p[0], p[1]);
        }
        out
    }
}

/// Number of segments a layout with this density receives.
pub fn segment_count(density_sv: f64) -> usize {
    ((density_sv * LENGTH_PER_DENSITY / STEP_LENGTH).ceil() as usize).max(1)
}

fn poisson_disk(count: usize, rng: &mut RngStream) -> Vec<[f64; 2]> {
    let mut radius = 0.75 / (count as f64).sqrt();
    let mut points: Vec<[f64; 2]> = Vec::with_capacity(count);
    let mut failures = 0;
    while points.len() < count {
        let p = [rng.uniform(), rng.uniform()];
        let ok = points
            .iter()
            .all(|q| (p[0] - q[0]).hypot(p[1] - q[1]) >= radius);
        if ok {
            points.push(p);
            failures = 0;
        } else {
            failures += 1;
            if failures > 200 {
                radius *= 0.9;
                failures = 0;
            }
        }
    }
    points
}

fn reflect(mut x: f64, heading: &mut f64, flip: impl Fn(f64) -> f64) -> f64 {
    if x < 0.0 {
        x = -x;
        *heading = flip(*heading);
    } else if x > 1.0 {
        x = 2.0 - x;
        *heading = flip(*heading);
    }
    x.clamp(0.0, 1.0)
}

pub fn generate_network(density_sv: f64, seeds_fraction: f64, rng: &mut RngStream) -> VascularLayout {
    let distinct = ((WALKERS as f64 * (1.0 - seeds_fraction)).round() as usize).clamp(1, WALKERS);
    let seeds = poisson_disk(distinct, rng);

    let mut tips: Vec<([f64; 2], f64)> = Vec::with_capacity(WALKERS);
    let mut inlets = Vec::with_capacity(WALKERS);
    for w in 0..WALKERS {
        let s = seeds[w % distinct];
        let p = [
            (s[0] + rng.normal(0.0, 0.01)).clamp(0.0, 1.0),
            (s[1] + rng.normal(0.0, 0.01)).clamp(0.0, 1.0),
        ];
        let heading = rng.uniform_in(0.0, std::f64::consts::TAU);
        tips.push((p, heading));
        inlets.push(p);
    }

    let count = segment_count(density_sv);
    let mut segments = Vec::with_capacity(count);
    for k in 0..count {
        let (p, heading) = &mut tips[k % WALKERS];
        *heading += rng.normal(0.0, TURN_STD);
        let mut h = *heading;
        let x = reflect(p[0] + STEP_LENGTH * h.cos(), &mut h, |a| std::f64::consts::PI - a);
        let y = reflect(p[1] + STEP_LENGTH * h.sin(), &mut h, |a| -a);
        *heading = h;
        let q = [x, y];
        segments.push(Segment { a: *p, b: q });
        *p = q;
    }

    VascularLayout {
        segments,
        inlets,
        density_sv,
        seeds_fraction,
    }
}

/// Search radius of the local pass in [`extravascular_distance`].
const LOCAL_REACH: f64 = 0.1;

/// Per-node distance to the nearest vessel centreline.
///
/// Each segment first updates the nodes inside its bounding box grown by
/// `LOCAL_REACH`; nodes left farther than that from every segment fall back
/// to a full scan. Both passes take the minimum over a set that contains the
/// nearest segment, so the result equals the brute-force scan exactly.
pub fn extravascular_distance(layout: &VascularLayout, grid: &Grid) -> Vec<f64> {
    let mut d = vec![f64::INFINITY; grid.len()];
    let h = grid.spacing;
    let span = |lo: f64, hi: f64, n: usize| {
        let a = ((lo - LOCAL_REACH) / h).ceil().max(0.0) as usize;
        let b = (((hi + LOCAL_REACH) / h).floor().max(0.0) as usize).min(n - 1);
        a..=b
    };
    for s in &layout.segments {
        let xs = span(s.a[0].min(s.b[0]), s.a[0].max(s.b[0]), grid.nx);
        let ys = span(s.a[1].min(s.b[1]), s.a[1].max(s.b[1]), grid.ny);
        for j in ys {
            for i in xs.clone() {
                let k = grid.index(i, j);
                let (x, y) = grid.coords(k);
                d[k] = d[k].min(s.distance([x, y]));
            }
        }
    }
    for (k, dk) in d.iter_mut().enumerate() {
        if *dk > LOCAL_REACH {
            let (x, y) = grid.coords(k);
            *dk = layout
                .segments
                .iter()
                .map(|s| s.distance([x, y]))
                .fold(f64::INFINITY, f64::min);
        }
    }
    d
}

/// 1 at nodes within one grid spacing of an inlet, 0 elsewhere.
pub fn inlet_indicator(layout: &VascularLayout, grid: &Grid) -> Vec<f64> {
    let reach = grid.spacing * (1.0 + 1e-12);
    let reach2 = reach * reach;
    (0..grid.len())
        .map(|k| {
            let (x, y) = grid.coords(k);
            let near = layout
                .inlets
                .iter()
                .any(|p| (p[0] - x).powi(2) + (p[1] - y).powi(2) <= reach2);
            if near {
                1.0
            } else {
                0.0
            }
        })
        .collect()
}

/// Centreline length deposited at each grid node.
///
/// Segments are cut into pieces no longer than `spacing / 8`; each piece adds
/// its length to the node nearest its midpoint.
pub fn deposit_length(layout: &VascularLayout, grid: &Grid) -> Vec<f64> {
    let mut out = vec![0.0; grid.len()];
    let h = grid.spacing;
    for s in &layout.segments {
        let len = s.length();
        if len == 0.0 {
            continue;
        }
        let pieces = (len / (h / 8.0)).ceil().max(1.0) as usize;
        let piece = len / pieces as f64;
        for p in 0..pieces {
            let t = (p as f64 + 0.5) / pieces as f64;
            let x = s.a[0] + t * (s.b[0] - s.a[0]);
            let y = s.a[1] + t * (s.b[1] - s.a[1]);
            let i = ((x / h).round() as usize).min(grid.nx - 1);
            let j = ((y / h).round() as usize).min(grid.ny - 1);
            out[grid.index(i, j)] += piece;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_grid() -> Grid {
        Grid::square(40, 1.0)
    }

    #[test]
    fn same_stream_same_layout() {
        let a = generate_network(6000.0, 0.3, &mut RngStream::new(9, "net"));
        let b = generate_network(6000.0, 0.3, &mut RngStream::new(9, "net"));
        assert_eq!(a, b);
    }

    #[test]
    fn segments_stay_in_domain() {
        for seed in 0..20 {
            let l = generate_network(7000.0, 0.75, &mut RngStream::new(seed, "net"));
            for s in &l.segments {
                for p in [s.a, s.b] {
                    assert!((0.0..=1.0).contains(&p[0]) && (0.0..=1.0).contains(&p[1]));
                }
            }
            assert!(!l.inlets.is_empty());
        }
    }

    #[test]
    fn segment_count_ordered_by_density() {
        for seed in 0..50 {
            let lo = generate_network(5e3, 0.4, &mut RngStream::new(seed, "net"));
            let hi = generate_network(7e3, 0.4, &mut RngStream::new(seed, "net"));
            assert!(lo.segments.len() < hi.segments.len());
        }
    }

    #[test]
    fn uniform_seeds_cover_domain() {
        let grid = unit_grid();
        for seed in 0..50 {
            let l = generate_network(7e3, 0.0, &mut RngStream::new(seed, "net"));
            let d = extravascular_distance(&l, &grid);
            let max = d.iter().cloned().fold(0.0, f64::max);
            assert!(max < 0.25, "seed {seed}: max distance {max}");
        }
    }

    fn dispersion(layout: &VascularLayout) -> f64 {
        let d = extravascular_distance(layout, &unit_grid());
        let m = d.iter().sum::<f64>() / d.len() as f64;
        (d.iter().map(|x| (x - m).powi(2)).sum::<f64>() / d.len() as f64).sqrt()
    }

    #[test]
    fn clustering_grows_with_seeds_fraction() {
        let mut lo = 0.0;
        let mut hi = 0.0;
        for seed in 0..20 {
            lo += dispersion(&generate_network(6e3, 0.0, &mut RngStream::new(seed, "net")));
            hi += dispersion(&generate_network(6e3, 0.75, &mut RngStream::new(seed, "net")));
        }
        assert!(hi > lo, "{hi} <= {lo}");
    }

    #[test]
    fn point_segment_geometry() {
        let grid = unit_grid();
        let h = grid.spacing;
        let layout = VascularLayout {
            segments: vec![Segment {
                a: [0.0, 10.0 * h],
                b: [1.0, 10.0 * h],
            }],
            inlets: vec![[0.0, 10.0 * h]],
            density_sv: 5e3,
            seeds_fraction: 0.0,
        };
        let d = extravascular_distance(&layout, &grid);
        assert_eq!(d[grid.index(5, 10)], 0.0);
        assert!((d[grid.index(5, 11)] - h).abs() < 1e-15);
        let eta = inlet_indicator(&layout, &grid);
        assert_eq!(eta[grid.index(0, 10)], 1.0);
        assert_eq!(eta[grid.index(1, 10)], 1.0);
        assert_eq!(eta[grid.index(0, 11)], 1.0);
        assert_eq!(eta[grid.index(1, 11)], 0.0);
        assert_eq!(eta[grid.index(30, 30)], 0.0);
    }

    /// Endpoint distances plus the perpendicular foot when it falls inside.
    fn oracle_distance(s: &Segment, x: f64, y: f64) -> f64 {
        let da = ((s.a[0] - x).powi(2) + (s.a[1] - y).powi(2)).sqrt();
        let db = ((s.b[0] - x).powi(2) + (s.b[1] - y).powi(2)).sqrt();
        let (ux, uy) = (s.b[0] - s.a[0], s.b[1] - s.a[1]);
        let len = (ux * ux + uy * uy).sqrt();
        let along = ((x - s.a[0]) * ux + (y - s.a[1]) * uy) / len;
        let mut best = da.min(db);
        if along > 0.0 && along < len {
            let cross = ((x - s.a[0]) * uy - (y - s.a[1]) * ux).abs() / len;
            best = best.min(cross);
        }
        best
    }

    #[test]
    fn distance_matches_brute_force() {
        let grid = Grid::square(17, 1.0);
        for seed in 0..10 {
            let mut rng = RngStream::new(seed, "net");
            let l = generate_network(5e3, 0.5, &mut rng);
            let d = extravascular_distance(&l, &grid);
            for (k, dk) in d.iter().enumerate() {
                let (x, y) = grid.coords(k);
                let mut best = f64::INFINITY;
                for s in &l.segments {
                    best = best.min(oracle_distance(s, x, y));
                }
                assert!((dk - best).abs() < 1e-12, "{dk} vs {best}");
            }
            let eta = inlet_indicator(&l, &grid);
            for (k, e) in eta.iter().enumerate() {
                let (x, y) = grid.coords(k);
                let want = l
                    .inlets
                    .iter()
                    .any(|p| ((p[0] - x).powi(2) + (p[1] - y).powi(2)).sqrt() <= grid.spacing);
                assert_eq!(*e == 1.0, want);
            }
        }
    }

    #[test]
    fn deposit_conserves_length() {
        let grid = unit_grid();
        let l = generate_network(6e3, 0.2, &mut RngStream::new(3, "net"));
        let dep: f64 = deposit_length(&l, &grid).iter().sum();
        assert!((dep - l.total_length()).abs() < 1e-10);
    }
}
