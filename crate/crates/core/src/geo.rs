//! Planar and geodetic distances and an exact uniform-grid nearest-neighbour index.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

/// A coordinate pair. For [`DistanceMetric::Euclidean`] both axes are in miles;
/// for [`DistanceMetric::GreatCircle`] `x` is longitude and `y` latitude in degrees.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }
}

pub const EARTH_RADIUS_MI: f64 = 3958.7613;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistanceMetric {
    #[default]
    Euclidean,
    GreatCircle,
}

impl DistanceMetric {
    /// Distance in miles.
    pub fn distance(self, a: Point, b: Point) -> f64 {
        match self {
            DistanceMetric::Euclidean => (a.x - b.x).hypot(a.y - b.y),
            DistanceMetric::GreatCircle => {
                let (lat1, lat2) = (a.y.to_radians(), b.y.to_radians());
                let dlat = lat2 - lat1;
                let dlon = (b.x - a.x).to_radians();
                let h = (dlat / 2.0).sin().powi(2) + lat1.cos() * lat2.cos() * (dlon / 2.0).sin().powi(2);
                2.0 * EARTH_RADIUS_MI * h.sqrt().min(1.0).asin()
            }
        }
    }

    /// Maps a point into a 3-D space where straight-line distance is a
    /// monotone function of this metric's distance.
    fn embed(self, p: Point) -> [f64; 3] {
        match self {
            DistanceMetric::Euclidean => [p.x, p.y, 0.0],
            DistanceMetric::GreatCircle => {
                let (lat, lon) = (p.y.to_radians(), p.x.to_radians());
                [EARTH_RADIUS_MI * lat.cos() * lon.cos(), EARTH_RADIUS_MI * lat.cos() * lon.sin(), EARTH_RADIUS_MI * lat.sin()]
            }
        }
    }

    /// Embedded-space radius that covers every point within `miles`.
    fn embedded_radius(self, miles: f64) -> f64 {
        match self {
            DistanceMetric::Euclidean => miles,
            DistanceMetric::GreatCircle => {
                let half = (miles / (2.0 * EARTH_RADIUS_MI)).min(std::f64::consts::FRAC_PI_2);
                2.0 * EARTH_RADIUS_MI * half.sin()
            }
        }
    }
}

fn dist3(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Exact nearest-neighbour and radius queries over a fixed point set.
///
/// Results are ranked by `(distance, index)`, so ties go to the smallest index.
#[derive(Clone, Debug)]
pub struct SpatialGrid {
    metric: DistanceMetric,
    cell: f64,
    points: Vec<Point>,
    embedded: Vec<[f64; 3]>,
    cells: HashMap<[i64; 3], Vec<u32>>,
    lo: [i64; 3],
    hi: [i64; 3],
}

impl SpatialGrid {
    /// Builds the index. The cell edge is chosen from the point density when
    /// `cell_size` is `None`.
    pub fn new(metric: DistanceMetric, points: &[Point], cell_size: Option<f64>) -> Self {
        let embedded: Vec<[f64; 3]> = points.iter().map(|&p| metric.embed(p)).collect();
        let cell = cell_size.filter(|c| c.is_finite() && *c > 0.0).unwrap_or_else(|| auto_cell(&embedded));
        let mut cells: HashMap<[i64; 3], Vec<u32>> = HashMap::new();
        let mut lo = [i64::MAX; 3];
        let mut hi = [i64::MIN; 3];
        for (i, e) in embedded.iter().enumerate() {
            let key = key_of(*e, cell);
            for a in 0..3 {
                lo[a] = lo[a].min(key[a]);
                hi[a] = hi[a].max(key[a]);
            }
            cells.entry(key).or_default().push(i as u32);
        }
        SpatialGrid { metric, cell, points: points.to_vec(), embedded, cells, lo, hi }
    }

    pub fn metric(&self) -> DistanceMetric {
        self.metric
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: u32) -> Point {
        self.points[i as usize]
    }

    /// Nearest point to `q` and its distance in miles.
    pub fn nearest(&self, q: Point) -> Option<(u32, f64)> {
        if self.points.is_empty() {
            return None;
        }
        let qe = self.metric.embed(q);
        let qk = key_of(qe, self.cell);
        let max_ring = (0..3).map(|a| (qk[a] - self.lo[a]).abs().max((self.hi[a] - qk[a]).abs())).max().unwrap_or(0);
        let mut best: Option<(f64, u32, f64)> = None;
        for k in 0..=max_ring {
            self.for_ring(qk, k, |idx| {
                let e = dist3(qe, self.embedded[idx as usize]);
                let d = self.metric.distance(q, self.points[idx as usize]);
                let better = match best {
                    None => true,
                    Some((bd, bi, _)) => d < bd || (d == bd && idx < bi),
                };
                if better {
                    best = Some((d, idx, e));
                }
            });
            // Anything in ring k+1 or beyond lies at least k cells away.
            if let Some((_, _, e)) = best {
                if e < k as f64 * self.cell {
                    break;
                }
            }
        }
        best.map(|(d, i, _)| (i, d))
    }

    /// All points within `radius` miles of `q`, sorted by index.
    pub fn within(&self, q: Point, radius: f64) -> Vec<(u32, f64)> {
        if self.points.is_empty() || radius.is_nan() || radius < 0.0 {
            return Vec::new();
        }
        let qe = self.metric.embed(q);
        let r = self.metric.embedded_radius(radius) * (1.0 + 1e-9) + 1e-12;
        let lo = key_of([qe[0] - r, qe[1] - r, qe[2] - r], self.cell);
        let hi = key_of([qe[0] + r, qe[1] + r, qe[2] + r], self.cell);
        let mut out = Vec::new();
        for x in lo[0].max(self.lo[0])..=hi[0].min(self.hi[0]) {
            for y in lo[1].max(self.lo[1])..=hi[1].min(self.hi[1]) {
                for z in lo[2].max(self.lo[2])..=hi[2].min(self.hi[2]) {
                    if let Some(ids) = self.cells.get(&[x, y, z]) {
                        for &i in ids {
                            let d = self.metric.distance(q, self.points[i as usize]);
                            if d <= radius {
                                out.push((i, d));
                            }
                        }
                    }
                }
            }
        }
        out.sort_by_key(|&(i, _)| i);
        out
    }

    fn for_ring(&self, c: [i64; 3], k: i64, mut f: impl FnMut(u32)) {
        let range = |a: usize| (c[a] - k).max(self.lo[a])..=(c[a] + k).min(self.hi[a]);
        for x in range(0) {
            for y in range(1) {
                for z in range(2) {
                    let ring = (x - c[0]).abs().max((y - c[1]).abs()).max((z - c[2]).abs());
                    if ring != k {
                        continue;
                    }
                    if let Some(ids) = self.cells.get(&[x, y, z]) {
                        ids.iter().for_each(|&i| f(i));
                    }
                }
            }
        }
    }
}

fn key_of(e: [f64; 3], cell: f64) -> [i64; 3] {
    [(e[0] / cell).floor() as i64, (e[1] / cell).floor() as i64, (e[2] / cell).floor() as i64]
}

fn auto_cell(embedded: &[[f64; 3]]) -> f64 {
    if embedded.len() < 2 {
        return 1.0;
    }
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for e in embedded {
        for a in 0..3 {
            lo[a] = lo[a].min(e[a]);
            hi[a] = hi[a].max(e[a]);
        }
    }
    let extent = (0..3).map(|a| hi[a] - lo[a]).fold(0.0, f64::max);
    let cell = extent / (embedded.len() as f64).sqrt();
    if cell.is_finite() && cell > 1e-6 {
        cell
    } else {
        1.0
    }
}
