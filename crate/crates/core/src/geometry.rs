//! Scene representation and the geometric queries used by every optimizer:
//! point-to-building distances, segment/building clearance for occlusion,
//! reference-grid generation and feasible random initialization.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// 2D point in meters.
pub type Point2 = [f64; 2];
/// 3D point in meters.
pub type Point3 = [f64; 3];

/// Euclidean distance between two 2D points.
#[inline]
pub fn dist2(a: Point2, b: Point2) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Draws rejected by `semi_random_init` before giving up.
pub const INIT_SAMPLING_BUDGET: usize = 10_000;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("invalid scene: {0}")]
    InvalidScene(String),
    #[error("invalid grid spec: {0}")]
    InvalidGrid(String),
    #[error("initial placement sampling exhausted its budget of {budget} draws ({placed}/{requested} points placed)")]
    InfeasibleInit {
        budget: usize,
        placed: usize,
        requested: usize,
    },
}

/// Axis-aligned building volume: rectangular footprint extruded from the
/// ground plane up to `height`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Building {
    /// Minimum (x, y) corner of the footprint in meters.
    pub bbox_min: Point2,
    /// Maximum (x, y) corner of the footprint in meters.
    pub bbox_max: Point2,
    /// Roof elevation above the ground plane in meters.
    pub height: f64,
}

impl Building {
    pub fn new(bbox_min: Point2, bbox_max: Point2, height: f64) -> Result<Self, GeometryError> {
        if !(bbox_min[0] < bbox_max[0] && bbox_min[1] < bbox_max[1]) {
            return Err(GeometryError::InvalidScene(format!(
                "building bbox min {bbox_min:?} must be strictly below max {bbox_max:?}"
            )));
        }
        if !(height.is_finite() && height > 0.0) {
            return Err(GeometryError::InvalidScene(format!(
                "building height must be positive, got {height}"
            )));
        }
        Ok(Self {
            bbox_min,
            bbox_max,
            height,
        })
    }

    /// True if the 2D point lies strictly inside the footprint.
    pub fn footprint_contains(&self, p: Point2) -> bool {
        p[0] > self.bbox_min[0]
            && p[0] < self.bbox_max[0]
            && p[1] > self.bbox_min[1]
            && p[1] < self.bbox_max[1]
    }
}

/// Circular area of interest on the ground plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aoi {
    /// Center coordinates in meters.
    pub center: Point2,
    /// Radius in meters.
    pub radius: f64,
}

impl Aoi {
    pub fn new(center: Point2, radius: f64) -> Result<Self, GeometryError> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(GeometryError::InvalidScene(format!(
                "AOI radius must be positive, got {radius}"
            )));
        }
        Ok(Self { center, radius })
    }

    /// Distance threshold within which an ABS counts as serving this AOI.
    #[inline]
    pub fn service_radius(&self) -> f64 {
        2.0 * self.radius / 3.0
    }
}

/// Immutable 3D urban scene: ground extent, extruded buildings and the fixed
/// hover elevation shared by all ABSs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub extent_min: Point2,
    pub extent_max: Point2,
    pub buildings: Vec<Building>,
    /// Fixed ABS hover elevation in meters.
    pub hover_elevation: f64,
}

impl Scene {
    pub fn new(
        extent_min: Point2,
        extent_max: Point2,
        buildings: Vec<Building>,
        hover_elevation: f64,
    ) -> Result<Self, GeometryError> {
        if !(extent_min[0] < extent_max[0] && extent_min[1] < extent_max[1]) {
            return Err(GeometryError::InvalidScene(format!(
                "extent min {extent_min:?} must be strictly below max {extent_max:?}"
            )));
        }
        if !(hover_elevation.is_finite() && hover_elevation > 0.0) {
            return Err(GeometryError::InvalidScene(format!(
                "hover elevation must be positive, got {hover_elevation}"
            )));
        }
        for (i, b) in buildings.iter().enumerate() {
            Building::new(b.bbox_min, b.bbox_max, b.height)?;
            let inside = b.bbox_min[0] >= extent_min[0]
                && b.bbox_min[1] >= extent_min[1]
                && b.bbox_max[0] <= extent_max[0]
                && b.bbox_max[1] <= extent_max[1];
            if !inside {
                return Err(GeometryError::InvalidScene(format!(
                    "building {i} footprint exceeds scene extent"
                )));
            }
        }
        Ok(Self {
            extent_min,
            extent_max,
            buildings,
            hover_elevation,
        })
    }

    /// True if a 2D point lies within the ground extent (edges included).
    pub fn contains(&self, p: Point2) -> bool {
        p[0] >= self.extent_min[0]
            && p[0] <= self.extent_max[0]
            && p[1] >= self.extent_min[1]
            && p[1] <= self.extent_max[1]
    }

    /// Ground-extent side lengths (width, depth) in meters.
    pub fn size(&self) -> Point2 {
        [
            self.extent_max[0] - self.extent_min[0],
            self.extent_max[1] - self.extent_min[1],
        ]
    }

    /// Clamps a 2D point into the ground extent.
    pub fn clamp(&self, p: Point2) -> Point2 {
        [
            p[0].clamp(self.extent_min[0], self.extent_max[0]),
            p[1].clamp(self.extent_min[1], self.extent_max[1]),
        ]
    }

    /// Buildings tall enough to matter for collision avoidance at the hover
    /// elevation: `height >= hover_elevation - clearance` (ties included).
    pub fn blocking_buildings(&self, clearance: f64) -> Vec<Building> {
        let threshold = self.hover_elevation - clearance;
        self.buildings
            .iter()
            .copied()
            .filter(|b| b.height >= threshold)
            .collect()
    }
}

/// Reference-grid layout for the placement coverage term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub points_x: usize,
    pub points_y: usize,
    /// Margin kept from every extent edge, in meters.
    pub margin: f64,
}

impl GridSpec {
    pub fn new(points_x: usize, points_y: usize, margin: f64) -> Result<Self, GeometryError> {
        if points_x == 0 || points_y == 0 {
            return Err(GeometryError::InvalidGrid(
                "grid needs at least one point per axis".into(),
            ));
        }
        if margin < 0.0 {
            return Err(GeometryError::InvalidGrid(format!(
                "margin must be non-negative, got {margin}"
            )));
        }
        Ok(Self {
            points_x,
            points_y,
            margin,
        })
    }
}

/// Evenly spaced reference points across the scene, `margin` meters from every
/// edge. A single point per axis sits at that axis' midpoint.
pub fn generate_grid(scene: &Scene, spec: &GridSpec) -> Result<Vec<Point2>, GeometryError> {
    let axis = |min: f64, max: f64, n: usize| -> Result<Vec<f64>, GeometryError> {
        let width = max - min;
        if n == 1 {
            if spec.margin > width / 2.0 {
                return Err(GeometryError::InvalidGrid(format!(
                    "margin {} exceeds half extent {}",
                    spec.margin,
                    width / 2.0
                )));
            }
            return Ok(vec![(min + max) / 2.0]);
        }
        let span = width - 2.0 * spec.margin;
        if span <= 0.0 {
            return Err(GeometryError::InvalidGrid(format!(
                "margin {} leaves no room on an extent of width {width}",
                spec.margin
            )));
        }
        let step = span / (n - 1) as f64;
        Ok((0..n).map(|j| min + spec.margin + j as f64 * step).collect())
    };

    let xs = axis(scene.extent_min[0], scene.extent_max[0], spec.points_x)?;
    let ys = axis(scene.extent_min[1], scene.extent_max[1], spec.points_y)?;
    let mut grid = Vec::with_capacity(xs.len() * ys.len());
    for &y in &ys {
        for &x in &xs {
            grid.push([x, y]);
        }
    }
    Ok(grid)
}

/// Distance from a 2D point to the closest edge of a building footprint;
/// zero inside or on the footprint. Per-axis overshoot clamped at zero:
/// `d = sqrt(dx^2 + dy^2)` with `dx = max(max(m_x - p_x, p_x - M_x), 0)`.
pub fn distance_to_building(p: Point2, b: &Building) -> f64 {
    let dx = (b.bbox_min[0] - p[0]).max(p[0] - b.bbox_max[0]).max(0.0);
    let dy = (b.bbox_min[1] - p[1]).max(p[1] - b.bbox_max[1]).max(0.0);
    dx.hypot(dy)
}

/// Gradient of [`distance_to_building`] w.r.t. the point. Zero inside the
/// footprint and at the (measure-zero) corner ties.
pub fn distance_to_building_grad(p: Point2, b: &Building) -> Point2 {
    let dx = (b.bbox_min[0] - p[0]).max(p[0] - b.bbox_max[0]).max(0.0);
    let dy = (b.bbox_min[1] - p[1]).max(p[1] - b.bbox_max[1]).max(0.0);
    let d = dx.hypot(dy);
    if d == 0.0 {
        return [0.0, 0.0];
    }
    let sx = if p[0] < b.bbox_min[0] {
        -1.0
    } else if p[0] > b.bbox_max[0] {
        1.0
    } else {
        0.0
    };
    let sy = if p[1] < b.bbox_min[1] {
        -1.0
    } else if p[1] > b.bbox_max[1] {
        1.0
    } else {
        0.0
    };
    [dx * sx / d, dy * sy / d]
}

/// Signed distance from a 3D point to a building volume (footprint extruded
/// from z = 0 to z = height). Positive outside, negative inside (depth to the
/// nearest face).
pub fn signed_distance_to_volume(p: Point3, b: &Building) -> f64 {
    let q = [
        (b.bbox_min[0] - p[0]).max(p[0] - b.bbox_max[0]),
        (b.bbox_min[1] - p[1]).max(p[1] - b.bbox_max[1]),
        (0.0 - p[2]).max(p[2] - b.height),
    ];
    let outside = (q[0].max(0.0).powi(2) + q[1].max(0.0).powi(2) + q[2].max(0.0).powi(2)).sqrt();
    let inside = q[0].max(q[1]).max(q[2]).min(0.0);
    outside + inside
}

/// Closest approach of the segment `a -> b` to one building volume, as
/// (parameter t in [0,1], signed distance at t). The volume is convex, so the
/// signed distance along the segment is convex in t and golden-section search
/// finds the global minimum.
pub fn segment_volume_clearance(a: Point3, b: Point3, building: &Building) -> (f64, f64) {
    let point_at = |t: f64| -> Point3 {
        [
            a[0] + t * (b[0] - a[0]),
            a[1] + t * (b[1] - a[1]),
            a[2] + t * (b[2] - a[2]),
        ]
    };
    let f = |t: f64| signed_distance_to_volume(point_at(t), building);

    // Golden-section on [0, 1] down to ~1e-12 interval width.
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut t1 = hi - INV_PHI * (hi - lo);
    let mut t2 = lo + INV_PHI * (hi - lo);
    let (mut f1, mut f2) = (f(t1), f(t2));
    for _ in 0..60 {
        if f1 <= f2 {
            hi = t2;
            t2 = t1;
            f2 = f1;
            t1 = hi - INV_PHI * (hi - lo);
            f1 = f(t1);
        } else {
            lo = t1;
            t1 = t2;
            f1 = f2;
            t2 = lo + INV_PHI * (hi - lo);
            f2 = f(t2);
        }
    }
    let t = 0.5 * (lo + hi);
    let mut best = (t, f(t));
    // Endpoints can win when the minimizer sits on the boundary.
    for (te, fe) in [(0.0, f(0.0)), (1.0, f(1.0))] {
        if fe < best.1 {
            best = (te, fe);
        }
    }
    best
}

/// Cheap lower bound on the segment/volume clearance: 2D distance from the
/// footprint center to the segment's ground projection, minus the footprint
/// half-diagonal. Buildings are contained in the ball around their center,
/// so this never overestimates.
fn clearance_lower_bound(a: Point3, b: Point3, building: &Building) -> f64 {
    let c = [
        0.5 * (building.bbox_min[0] + building.bbox_max[0]),
        0.5 * (building.bbox_min[1] + building.bbox_max[1]),
    ];
    let half_diag = 0.5
        * (building.bbox_max[0] - building.bbox_min[0])
            .hypot(building.bbox_max[1] - building.bbox_min[1]);
    let d = [b[0] - a[0], b[1] - a[1]];
    let len_sq = d[0] * d[0] + d[1] * d[1];
    let t = if len_sq > 0.0 {
        (((c[0] - a[0]) * d[0] + (c[1] - a[1]) * d[1]) / len_sq).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let p = [a[0] + t * d[0], a[1] + t * d[1]];
    dist2(p, c) - half_diag
}

/// Minimum signed clearance of the segment `tx -> rx` against every building
/// volume in the scene: positive is the distance of the nearest miss,
/// negative the depth of the deepest penetration. Symmetric under swapping
/// the endpoints; `+inf` when the scene has no buildings.
pub fn los_clearance(tx: Point3, rx: Point3, scene: &Scene) -> f64 {
    los_clearance_argmin(tx, rx, scene).map_or(f64::INFINITY, |(_, _, d)| d)
}

/// Like [`los_clearance`], also reporting which building realizes the minimum
/// and where along the segment. `None` when the scene has no buildings.
///
/// Candidates are visited in order of a cheap clearance lower bound and the
/// exact search skips any building that provably cannot beat the running
/// minimum, so the result is exact.
pub fn los_clearance_argmin(tx: Point3, rx: Point3, scene: &Scene) -> Option<(usize, f64, f64)> {
    let mut order: Vec<(f64, usize)> = scene
        .buildings
        .iter()
        .enumerate()
        .map(|(i, b)| (clearance_lower_bound(tx, rx, b), i))
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut best: Option<(usize, f64, f64)> = None;
    for (lb, i) in order {
        if let Some((_, _, bd)) = best {
            if lb >= bd {
                break;
            }
        }
        let (t, d) = segment_volume_clearance(tx, rx, &scene.buildings[i]);
        if best.is_none_or(|(_, _, bd)| d < bd) {
            best = Some((i, t, d));
        }
    }
    best
}

/// Samples `n` hover positions uniformly over the scene extent, rejecting
/// draws inside a blocking-building footprint or closer than `min_sep` to an
/// already accepted point. Deterministic for a fixed seed.
pub fn semi_random_init(
    scene: &Scene,
    blocking: &[Building],
    n: usize,
    min_sep: f64,
    seed: u64,
) -> Result<Vec<Point2>, GeometryError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points: Vec<Point2> = Vec::with_capacity(n);
    let mut draws = 0usize;
    while points.len() < n {
        if draws >= INIT_SAMPLING_BUDGET {
            return Err(GeometryError::InfeasibleInit {
                budget: INIT_SAMPLING_BUDGET,
                placed: points.len(),
                requested: n,
            });
        }
        draws += 1;
        let p = [
            rng.gen_range(scene.extent_min[0]..=scene.extent_max[0]),
            rng.gen_range(scene.extent_min[1]..=scene.extent_max[1]),
        ];
        let in_building = blocking.iter().any(|b| distance_to_building(p, b) == 0.0);
        if in_building {
            continue;
        }
        if points.iter().any(|q| dist2(p, *q) < min_sep) {
            continue;
        }
        points.push(p);
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scene_1km() -> Scene {
        Scene::new([0.0, 0.0], [1000.0, 1000.0], vec![], 70.0).unwrap()
    }

    #[test]
    fn grid_matches_reference_layout() {
        // 5x5 grid on [0,1000]^2 with a 150 m margin spans [150, 850] with
        // 175 m spacing on each axis.
        let grid = generate_grid(&scene_1km(), &GridSpec::new(5, 5, 150.0).unwrap()).unwrap();
        assert_eq!(grid.len(), 25);
        for p in &grid {
            assert!(p[0] >= 150.0 - 1e-12 && p[0] <= 850.0 + 1e-12);
            assert!(p[1] >= 150.0 - 1e-12 && p[1] <= 850.0 + 1e-12);
        }
        assert_eq!(grid[0], [150.0, 150.0]);
        assert!((grid[1][0] - 325.0).abs() < 1e-12);
        assert_eq!(grid[24], [850.0, 850.0]);
    }

    #[test]
    fn grid_single_point_sits_at_midpoint() {
        let scene = Scene::new([0.0, 0.0], [100.0, 100.0], vec![], 70.0).unwrap();
        let grid = generate_grid(&scene, &GridSpec::new(1, 1, 0.0).unwrap()).unwrap();
        assert_eq!(grid, vec![[50.0, 50.0]]);
    }

    #[test]
    fn grid_two_by_two_with_margin() {
        // Hand-checked linear spacing: two points per axis land on the margin
        // lines {10, 90}.
        let scene = Scene::new([0.0, 0.0], [100.0, 100.0], vec![], 70.0).unwrap();
        let grid = generate_grid(&scene, &GridSpec::new(2, 2, 10.0).unwrap()).unwrap();
        assert_eq!(
            grid,
            vec![[10.0, 10.0], [90.0, 10.0], [10.0, 90.0], [90.0, 90.0]]
        );
    }

    #[test]
    fn grid_margin_too_large_is_rejected() {
        let scene = Scene::new([0.0, 0.0], [100.0, 100.0], vec![], 70.0).unwrap();
        assert!(generate_grid(&scene, &GridSpec::new(3, 3, 50.0).unwrap()).is_err());
        assert!(generate_grid(&scene, &GridSpec::new(1, 1, 60.0).unwrap()).is_err());
    }

    #[test]
    fn building_distance_examples() {
        let b = Building::new([0.0, 0.0], [10.0, 10.0], 50.0).unwrap();
        assert_eq!(distance_to_building([5.0, 5.0], &b), 0.0);
        assert_eq!(distance_to_building([13.0, 5.0], &b), 3.0);
        // 3-4-5 right triangle from the (10, 10) corner.
        assert_eq!(distance_to_building([13.0, 14.0], &b), 5.0);
    }

    #[test]
    fn building_distance_gradient_matches_finite_differences() {
        let b = Building::new([20.0, -10.0], [80.0, 40.0], 60.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let eps = 1e-6;
        for _ in 0..200 {
            let p = [rng.gen_range(-50.0..150.0), rng.gen_range(-80.0..120.0)];
            if distance_to_building(p, &b) < 1e-3 {
                continue;
            }
            let g = distance_to_building_grad(p, &b);
            for axis in 0..2 {
                let mut hi = p;
                let mut lo = p;
                hi[axis] += eps;
                lo[axis] -= eps;
                let fd = (distance_to_building(hi, &b) - distance_to_building(lo, &b)) / (2.0 * eps);
                assert!((fd - g[axis]).abs() < 1e-6, "axis {axis} at {p:?}");
            }
        }
    }

    #[test]
    fn blocking_threshold_includes_boundary() {
        let mk = |h: f64| Building::new([0.0, 0.0], [10.0, 10.0], h).unwrap();
        let scene = Scene::new(
            [0.0, 0.0],
            [1000.0, 1000.0],
            vec![mk(40.0), mk(60.0), mk(90.0), mk(55.0)],
            70.0,
        )
        .unwrap();
        // Threshold h - clearance = 55: the 40 m building drops out, the
        // 55 m boundary case stays in.
        let blocking = scene.blocking_buildings(15.0);
        let heights: Vec<f64> = blocking.iter().map(|b| b.height).collect();
        assert_eq!(heights, vec![60.0, 90.0, 55.0]);

        let none = Scene::new([0.0, 0.0], [100.0, 100.0], vec![mk(40.0)], 70.0).unwrap();
        assert!(none.blocking_buildings(0.0).is_empty());
    }

    #[test]
    fn segment_above_buildings_reports_vertical_gap() {
        let b = Building::new([10.0, 10.0], [30.0, 30.0], 50.0).unwrap();
        let scene = Scene::new([0.0, 0.0], [100.0, 100.0], vec![b], 70.0).unwrap();
        let c = los_clearance([0.0, 20.0, 70.0], [100.0, 20.0, 70.0], &scene);
        assert!((c - 20.0).abs() < 1e-6, "got {c}");
    }

    #[test]
    fn segment_through_box_center_is_negative() {
        let b = Building::new([10.0, 10.0], [30.0, 30.0], 50.0).unwrap();
        let scene = Scene::new([0.0, 0.0], [100.0, 100.0], vec![b], 70.0).unwrap();
        let c = los_clearance([0.0, 20.0, 25.0], [100.0, 20.0, 25.0], &scene);
        assert!(c < 0.0, "got {c}");
    }

    #[test]
    fn segment_penetration_depth_matches_brute_force() {
        // Segment crossing a 10x10x50 box at y=5, z=25: the deepest interior
        // point is 5 m from the nearest faces.
        let b = Building::new([0.0, 0.0], [10.0, 10.0], 50.0).unwrap();
        let tx = [-10.0, 5.0, 25.0];
        let rx = [20.0, 5.0, 25.0];
        let (_, d) = segment_volume_clearance(tx, rx, &b);
        assert!(d < 0.0);
        assert!((d + 5.0).abs() < 1e-6, "got {d}");

        // Brute-force oracle: dense sampling of the volume SDF along the
        // segment.
        let oracle = (0..=20_000)
            .map(|i| {
                let t = i as f64 / 20_000.0;
                signed_distance_to_volume(
                    [
                        tx[0] + t * (rx[0] - tx[0]),
                        tx[1] + t * (rx[1] - tx[1]),
                        tx[2] + t * (rx[2] - tx[2]),
                    ],
                    &b,
                )
            })
            .fold(f64::INFINITY, f64::min);
        assert!((d - oracle).abs() < 1e-6, "search {d} vs oracle {oracle}");
    }

    #[test]
    fn clearance_is_symmetric_in_endpoint_swap() {
        let b = Building::new([10.0, 0.0], [40.0, 25.0], 45.0).unwrap();
        let scene = Scene::new([0.0, 0.0], [100.0, 100.0], vec![b], 70.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let a = [
                rng.gen_range(0.0..100.0),
                rng.gen_range(0.0..100.0),
                rng.gen_range(0.0..80.0),
            ];
            let c = [
                rng.gen_range(0.0..100.0),
                rng.gen_range(0.0..100.0),
                rng.gen_range(0.0..80.0),
            ];
            let fwd = los_clearance(a, c, &scene);
            let rev = los_clearance(c, a, &scene);
            assert!((fwd - rev).abs() < 1e-9, "{fwd} vs {rev}");
        }
    }

    #[test]
    fn init_is_deterministic_and_respects_constraints() {
        let b = Building::new([400.0, 400.0], [600.0, 600.0], 90.0).unwrap();
        let scene = Scene::new([0.0, 0.0], [2000.0, 2000.0], vec![b], 70.0).unwrap();
        let blocking = scene.blocking_buildings(15.0);
        let a = semi_random_init(&scene, &blocking, 10, 400.0, 7).unwrap();
        let b2 = semi_random_init(&scene, &blocking, 10, 400.0, 7).unwrap();
        assert_eq!(a, b2);
        for (i, p) in a.iter().enumerate() {
            assert!(scene.contains(*p));
            assert!(blocking
                .iter()
                .all(|bl| distance_to_building(*p, bl) > 0.0));
            for q in &a[i + 1..] {
                assert!(dist2(*p, *q) >= 400.0);
            }
        }
    }

    #[test]
    fn init_single_point_any_scene() {
        let scene = scene_1km();
        let p = semi_random_init(&scene, &[], 1, 0.0, 42).unwrap();
        assert_eq!(p.len(), 1);
        assert!(scene.contains(p[0]));
    }

    #[test]
    fn init_budget_exhaustion_is_reported() {
        // 50 points at 400 m separation cannot fit in 1 km^2.
        let scene = scene_1km();
        let err = semi_random_init(&scene, &[], 50, 400.0, 1).unwrap_err();
        assert!(matches!(err, GeometryError::InfeasibleInit { .. }));
    }
}
