//! Differentiable coverage maps: per-ABS grids of linear path gain over the
//! discretized ground plane.
//!
//! The built-in model is deterministic line-of-sight: free-space gain times
//! the transmit element pattern times the receive element pattern times a
//! smooth occlusion factor driven by the segment/building clearance. Every
//! cell gain is differentiable w.r.t. the owning transmitter's position and
//! mechanical orientation; the four partials ride along in [`CoverageGrads`].
//! Externally computed maps can be imported through a small self-describing
//! binary format (all little-endian), flagged non-differentiable.

#![allow(clippy::needless_range_loop)]

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::antenna::{self, frame_dual, local_angles_dual, AntennaConfig, PatternKind};
use crate::dual::Dual4;
use crate::geometry::{los_clearance_argmin, Building, Point2, Point3, Scene};
use crate::units::{db_to_linear, dbm_to_watts, wavelength};

const MAP_MAGIC: &[u8; 8] = b"ABSCMAP\0";
const MAP_VERSION: u16 = 1;

#[derive(Debug, Error)]
pub enum PropagationError {
    #[error("free-space gain is undefined at zero distance")]
    ZeroDistance,
    #[error("coverage map I/O failed: {0}")]
    Io(#[from] std::io::Error),
    #[error("coverage map format error: {0}")]
    Format(String),
}

/// One transmitter: hover position, mounted antenna, transmit power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TxConfig {
    /// (x, y, z) in meters; z is the hover elevation.
    pub position: Point3,
    pub antenna: AntennaConfig,
    pub power_dbm: f64,
}

impl TxConfig {
    pub fn power_watts(&self) -> f64 {
        dbm_to_watts(self.power_dbm)
    }
}

/// Propagation model settings shared by coverage maps and per-UE power
/// computations.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagationConfig {
    /// Carrier frequency in Hz.
    pub f_c_hz: f64,
    /// Square cell side in meters.
    pub cell_size_m: f64,
    /// Height of the measurement plane / UE antennas in meters.
    pub rx_height_m: f64,
    /// Receive antenna applied at every cell.
    pub rx_antenna: AntennaConfig,
    /// Transition width of the occlusion sigmoid in meters.
    pub occlusion_softness_m: f64,
    /// Attenuation applied to a fully blocked link, dB.
    pub blockage_floor_db: f64,
    /// Sharpness of the smooth-min used by the differentiable pattern path.
    pub pattern_sharpness: f64,
}

impl Default for PropagationConfig {
    fn default() -> Self {
        Self {
            f_c_hz: 3.5e9,
            cell_size_m: 10.0,
            rx_height_m: 1.5,
            rx_antenna: AntennaConfig::dipole_upright(),
            occlusion_softness_m: 5.0,
            blockage_floor_db: 30.0,
            pattern_sharpness: 20.0,
        }
    }
}

impl PropagationConfig {
    /// Linear gain floor of a fully blocked link.
    pub fn blockage_floor_linear(&self) -> f64 {
        db_to_linear(-self.blockage_floor_db)
    }

    /// Default coverage-mask threshold: the blockage floor times the
    /// free-space gain across the longest 3D diagonal of the scene volume.
    pub fn default_mask_threshold(&self, scene: &Scene) -> f64 {
        let size = scene.size();
        let diag = (size[0].powi(2) + size[1].powi(2) + scene.hover_elevation.powi(2)).sqrt();
        self.blockage_floor_linear() * free_space_gain_unchecked(diag, self.f_c_hz)
    }
}

/// Per-ABS grid of linear path gains over the ground plane.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageMap {
    pub n_abs: usize,
    pub cells_x: usize,
    pub cells_y: usize,
    /// World coordinates of the minimum corner of cell (0, 0).
    pub origin: Point2,
    pub cell_size: f64,
    pub f_c_hz: f64,
    /// Row-major gains: index `(i * cells_y + iy) * cells_x + ix`.
    pub gains: Vec<f64>,
    /// False for imported maps, which cannot provide gradients.
    pub differentiable: bool,
}

impl CoverageMap {
    #[inline]
    pub fn idx(&self, abs: usize, ix: usize, iy: usize) -> usize {
        (abs * self.cells_y + iy) * self.cells_x + ix
    }

    #[inline]
    pub fn gain(&self, abs: usize, ix: usize, iy: usize) -> f64 {
        self.gains[self.idx(abs, ix, iy)]
    }

    pub fn cells_per_abs(&self) -> usize {
        self.cells_x * self.cells_y
    }

    /// World coordinates of a cell center.
    pub fn cell_center(&self, ix: usize, iy: usize) -> Point2 {
        [
            self.origin[0] + (ix as f64 + 0.5) * self.cell_size,
            self.origin[1] + (iy as f64 + 0.5) * self.cell_size,
        ]
    }

    /// Cell indices containing a world point, if inside the grid.
    pub fn cell_of(&self, p: Point2) -> Option<(usize, usize)> {
        let fx = (p[0] - self.origin[0]) / self.cell_size;
        let fy = (p[1] - self.origin[1]) / self.cell_size;
        if fx < 0.0 || fy < 0.0 {
            return None;
        }
        let (ix, iy) = (fx as usize, fy as usize);
        if ix >= self.cells_x || iy >= self.cells_y {
            return None;
        }
        Some((ix, iy))
    }
}

/// Partial derivatives of every cell gain w.r.t. the owning transmitter's
/// `(x, y, azimuth, tilt)`, in the same layout as [`CoverageMap::gains`].
#[derive(Debug, Clone)]
pub struct CoverageGrads {
    pub d: Vec<[f64; 4]>,
}

/// Free-space power gain `(lambda / (4 pi d))^2`.
pub fn free_space_gain(distance_m: f64, f_c_hz: f64) -> Result<f64, PropagationError> {
    if distance_m <= 0.0 {
        return Err(PropagationError::ZeroDistance);
    }
    Ok(free_space_gain_unchecked(distance_m, f_c_hz))
}

#[inline]
fn free_space_gain_unchecked(distance_m: f64, f_c_hz: f64) -> f64 {
    let k = wavelength(f_c_hz) / (4.0 * std::f64::consts::PI);
    (k / distance_m).powi(2)
}

/// Smooth occlusion factor in `(0, 1]`: full clearance maps to 1, deep
/// blockage to the linear floor, with a sigmoid transition of width
/// `softness` around grazing incidence.
pub fn occlusion_factor(clearance_m: f64, softness_m: f64, floor_linear: f64) -> f64 {
    let s = crate::placement::smooth_sigmoid(clearance_m, 0.0, 1.0 / softness_m);
    s * (1.0 - floor_linear) + floor_linear
}

/// Exact path gain between a transmitter and a receive point.
pub fn path_gain(scene: &Scene, tx: &TxConfig, rx: Point3, cfg: &PropagationConfig) -> f64 {
    let w = [
        rx[0] - tx.position[0],
        rx[1] - tx.position[1],
        rx[2] - tx.position[2],
    ];
    let d = (w[0] * w[0] + w[1] * w[1] + w[2] * w[2]).sqrt();
    if d == 0.0 {
        return 0.0;
    }
    let u = [w[0] / d, w[1] / d, w[2] / d];
    let fs = free_space_gain_unchecked(d, cfg.f_c_hz);
    let g_tx = antenna::mounted_gain(&tx.antenna, u);
    let g_rx = antenna::mounted_gain(&cfg.rx_antenna, [-u[0], -u[1], -u[2]]);
    let occl = match los_clearance_argmin(tx.position, rx, scene) {
        None => 1.0,
        Some((_, _, clearance)) => occlusion_factor(
            clearance,
            cfg.occlusion_softness_m,
            cfg.blockage_floor_linear(),
        ),
    };
    fs * g_tx * g_rx * occl
}

/// Received power in Watts at a point from one transmitter.
pub fn received_power(scene: &Scene, tx: &TxConfig, rx: Point3, cfg: &PropagationConfig) -> f64 {
    tx.power_watts() * path_gain(scene, tx, rx, cfg)
}

fn dual_pattern_gain(
    kind: PatternKind,
    gain_dbi: f64,
    az_off: Dual4,
    zenith: Dual4,
    sharpness: f64,
) -> Dual4 {
    match kind {
        PatternKind::Isotropic => Dual4::constant(db_to_linear(gain_dbi)),
        PatternKind::HalfwaveDipole => antenna::element_gain_dipole_dual(zenith, gain_dbi),
        PatternKind::Directional3gpp => {
            antenna::element_gain_directional_dual(az_off, zenith, gain_dbi, sharpness)
        }
    }
}

/// Signed distance from a dual point to a building volume; branches are
/// chosen on values, matching [`crate::geometry::signed_distance_to_volume`].
fn signed_distance_dual(p: [Dual4; 3], b: &Building) -> Dual4 {
    let pick_max = |a: Dual4, bb: Dual4| if a.val >= bb.val { a } else { bb };
    let q = [
        pick_max(Dual4::constant(b.bbox_min[0]) - p[0], p[0] - Dual4::constant(b.bbox_max[0])),
        pick_max(Dual4::constant(b.bbox_min[1]) - p[1], p[1] - Dual4::constant(b.bbox_max[1])),
        pick_max(-p[2], p[2] - Dual4::constant(b.height)),
    ];
    let mut sum_sq = Dual4::constant(0.0);
    let mut any_positive = false;
    for qi in q {
        if qi.val > 0.0 {
            sum_sq = sum_sq + qi * qi;
            any_positive = true;
        }
    }
    let outside = if any_positive {
        sum_sq.sqrt()
    } else {
        Dual4::constant(0.0)
    };
    let max_q = pick_max(pick_max(q[0], q[1]), q[2]);
    let inside = if max_q.val < 0.0 {
        max_q
    } else {
        Dual4::constant(0.0)
    };
    outside + inside
}

/// Segment/building clearance with positional tangents in slots (0, 1).
///
/// Exterior minima are stationary in t (the point-to-box distance is C^1
/// where positive) or pinned at an endpoint, so the envelope rule applies:
/// differentiate the point distance at the fixed minimizer. Interior minima
/// (penetration) sit on the crossing of two face-plane lines; the minimizer
/// itself shifts with the endpoints, so the crossing of the two active lines
/// is differentiated instead.
fn segment_clearance_dual(tx: Point3, rx: Point3, b: &Building, t: f64, c: f64) -> Dual4 {
    let x = Dual4::variable(tx[0], 0);
    let y = Dual4::variable(tx[1], 1);
    if c > 0.0 {
        let p = [
            x.scale(1.0 - t) + Dual4::constant(rx[0] * t),
            y.scale(1.0 - t) + Dual4::constant(rx[1] * t),
            Dual4::constant(tx[2] * (1.0 - t) + rx[2] * t),
        ];
        return signed_distance_dual(p, b);
    }

    // Inside the volume the distance along the segment is the max of six
    // lines in t, one per face plane: value, slope in t, and partials w.r.t.
    // the transmitter's (x, y) at fixed t.
    let w = [rx[0] - tx[0], rx[1] - tx[1], rx[2] - tx[2]];
    let p = [tx[0] + t * w[0], tx[1] + t * w[1], tx[2] + t * w[2]];
    let k = 1.0 - t;
    let lines = [
        (b.bbox_min[0] - p[0], -w[0], -k, 0.0),
        (p[0] - b.bbox_max[0], w[0], k, 0.0),
        (b.bbox_min[1] - p[1], -w[1], 0.0, -k),
        (p[1] - b.bbox_max[1], w[1], 0.0, k),
        (-p[2], -w[2], 0.0, 0.0),
        (p[2] - b.height, w[2], 0.0, 0.0),
    ];
    let active: Vec<&(f64, f64, f64, f64)> = lines
        .iter()
        .filter(|l| l.0 >= c - 1e-6 * (1.0 + c.abs()))
        .collect();
    let fallback = active
        .iter()
        .fold(&lines[0], |best, l| if l.0 > best.0 { l } else { best });

    let d = if t <= 1e-9 || t >= 1.0 - 1e-9 {
        // Endpoint minimizer: the envelope rule applies to the binding line.
        [fallback.2, fallback.3]
    } else {
        let down = active
            .iter()
            .fold(None::<&&(f64, f64, f64, f64)>, |acc, l| match acc {
                Some(a) if a.1 <= l.1 => Some(a),
                _ => Some(l),
            })
            .unwrap();
        let up = active
            .iter()
            .fold(None::<&&(f64, f64, f64, f64)>, |acc, l| match acc {
                Some(a) if a.1 >= l.1 => Some(a),
                _ => Some(l),
            })
            .unwrap();
        if down.1 < 0.0 && up.1 > 0.0 {
            // d/dq min_t max(l_down, l_up) at their crossing.
            let denom = down.1 - up.1;
            [
                (down.1 * up.2 - up.1 * down.2) / denom,
                (down.1 * up.3 - up.1 * down.3) / denom,
            ]
        } else {
            [fallback.2, fallback.3]
        }
    };
    Dual4 {
        val: c,
        d: [d[0], d[1], 0.0, 0.0],
    }
}

/// Path gain with partial derivatives w.r.t. the transmitter's
/// `(x, y, azimuth, tilt)`. Pattern clamps use the smooth-min variant, so the
/// value channel can deviate from [`path_gain`] by a fraction of a dB near
/// the clamp knees; optimization and finite-difference checks must both go
/// through this path.
pub fn path_gain_dual(
    scene: &Scene,
    tx: &TxConfig,
    rx: Point3,
    cfg: &PropagationConfig,
) -> Dual4 {
    let x = Dual4::variable(tx.position[0], 0);
    let y = Dual4::variable(tx.position[1], 1);
    let az = Dual4::variable(tx.antenna.azimuth, 2);
    let tilt = Dual4::variable(tx.antenna.tilt, 3);

    let w = [
        Dual4::constant(rx[0]) - x,
        Dual4::constant(rx[1]) - y,
        Dual4::constant(rx[2] - tx.position[2]),
    ];
    let d = (w[0] * w[0] + w[1] * w[1] + w[2] * w[2]).sqrt();
    let u = [w[0] / d, w[1] / d, w[2] / d];

    let k = wavelength(cfg.f_c_hz) / (4.0 * std::f64::consts::PI);
    let fs = Dual4::constant(k * k) / (d * d);

    let tx_frame = frame_dual(az, tilt);
    let (tx_az_off, tx_zen) = local_angles_dual(&tx_frame, u);
    let g_tx = dual_pattern_gain(
        tx.antenna.kind,
        tx.antenna.gain_dbi,
        tx_az_off,
        tx_zen,
        cfg.pattern_sharpness,
    );

    let rx_frame = frame_dual(
        Dual4::constant(cfg.rx_antenna.azimuth),
        Dual4::constant(cfg.rx_antenna.tilt),
    );
    let (rx_az_off, rx_zen) = local_angles_dual(&rx_frame, [-u[0], -u[1], -u[2]]);
    let g_rx = dual_pattern_gain(
        cfg.rx_antenna.kind,
        cfg.rx_antenna.gain_dbi,
        rx_az_off,
        rx_zen,
        cfg.pattern_sharpness,
    );

    // Occlusion: locate the binding building and segment parameter on plain
    // values, then differentiate the point-to-volume distance at that fixed
    // parameter (envelope rule: the inner minimizer is stationary).
    let occl = match los_clearance_argmin(tx.position, rx, scene) {
        None => Dual4::constant(1.0),
        Some((b_idx, t, c)) => {
            let clearance = segment_clearance_dual(tx.position, rx, &scene.buildings[b_idx], t, c);
            let floor = cfg.blockage_floor_linear();
            clearance
                .logistic(1.0 / cfg.occlusion_softness_m)
                .scale(1.0 - floor)
                + Dual4::constant(floor)
        }
    };

    fs * g_tx * g_rx * occl
}

fn map_dims(scene: &Scene, cell_size: f64) -> (usize, usize) {
    let size = scene.size();
    let cx = (size[0] / cell_size).ceil().max(1.0) as usize;
    let cy = (size[1] / cell_size).ceil().max(1.0) as usize;
    (cx, cy)
}

/// Coverage map over the scene's ground plane, exact evaluation.
pub fn compute_coverage_map(
    scene: &Scene,
    txs: &[TxConfig],
    cfg: &PropagationConfig,
) -> CoverageMap {
    let (cells_x, cells_y) = map_dims(scene, cfg.cell_size_m);
    let mut map = CoverageMap {
        n_abs: txs.len(),
        cells_x,
        cells_y,
        origin: scene.extent_min,
        cell_size: cfg.cell_size_m,
        f_c_hz: cfg.f_c_hz,
        gains: vec![0.0; txs.len() * cells_x * cells_y],
        differentiable: true,
    };
    for (i, tx) in txs.iter().enumerate() {
        for iy in 0..cells_y {
            for ix in 0..cells_x {
                let c = map.cell_center(ix, iy);
                let rx = [c[0], c[1], cfg.rx_height_m];
                let idx = map.idx(i, ix, iy);
                map.gains[idx] = path_gain(scene, tx, rx, cfg);
            }
        }
    }
    map
}

/// Coverage map plus per-cell gradients, smoothed evaluation. The returned
/// map's values come from the same smooth path as the gradients.
pub fn compute_coverage_map_with_grads(
    scene: &Scene,
    txs: &[TxConfig],
    cfg: &PropagationConfig,
) -> (CoverageMap, CoverageGrads) {
    let (cells_x, cells_y) = map_dims(scene, cfg.cell_size_m);
    let mut map = CoverageMap {
        n_abs: txs.len(),
        cells_x,
        cells_y,
        origin: scene.extent_min,
        cell_size: cfg.cell_size_m,
        f_c_hz: cfg.f_c_hz,
        gains: vec![0.0; txs.len() * cells_x * cells_y],
        differentiable: true,
    };
    let mut grads = CoverageGrads {
        d: vec![[0.0; 4]; txs.len() * cells_x * cells_y],
    };
    for (i, tx) in txs.iter().enumerate() {
        for iy in 0..cells_y {
            for ix in 0..cells_x {
                let c = map.cell_center(ix, iy);
                let rx = [c[0], c[1], cfg.rx_height_m];
                let g = path_gain_dual(scene, tx, rx, cfg);
                let idx = map.idx(i, ix, iy);
                map.gains[idx] = g.val;
                grads.d[idx] = g.d;
            }
        }
    }
    (map, grads)
}

/// Received signal strength: elementwise `P_tx * gain`, one grid per ABS in
/// the map's layout. Powers are per-ABS Watts.
pub fn rss(map: &CoverageMap, p_tx_watts: &[f64]) -> Vec<f64> {
    assert_eq!(map.n_abs, p_tx_watts.len());
    let per = map.cells_per_abs();
    map.gains
        .iter()
        .enumerate()
        .map(|(k, g)| p_tx_watts[k / per] * g)
        .collect()
}

/// Writes a coverage map in the binary exchange format.
pub fn save_coverage_map(map: &CoverageMap, path: &Path) -> Result<(), PropagationError> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAP_MAGIC)?;
    w.write_all(&MAP_VERSION.to_le_bytes())?;
    w.write_all(&(map.n_abs as u32).to_le_bytes())?;
    w.write_all(&(map.cells_x as u32).to_le_bytes())?;
    w.write_all(&(map.cells_y as u32).to_le_bytes())?;
    for v in [
        map.origin[0],
        map.origin[1],
        map.cell_size,
        map.f_c_hz,
    ] {
        w.write_all(&v.to_le_bytes())?;
    }
    for g in &map.gains {
        w.write_all(&g.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a coverage map written by [`save_coverage_map`]. The result is
/// flagged non-differentiable.
pub fn load_coverage_map(path: &Path) -> Result<CoverageMap, PropagationError> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAP_MAGIC {
        return Err(PropagationError::Format("bad magic bytes".into()));
    }
    let mut u16buf = [0u8; 2];
    r.read_exact(&mut u16buf)?;
    let version = u16::from_le_bytes(u16buf);
    if version != MAP_VERSION {
        return Err(PropagationError::Format(format!(
            "unsupported map version {version}, expected {MAP_VERSION}"
        )));
    }
    let mut u32buf = [0u8; 4];
    let mut read_u32 = |r: &mut BufReader<File>| -> Result<u32, PropagationError> {
        r.read_exact(&mut u32buf)?;
        Ok(u32::from_le_bytes(u32buf))
    };
    let n_abs = read_u32(&mut r)? as usize;
    let cells_x = read_u32(&mut r)? as usize;
    let cells_y = read_u32(&mut r)? as usize;
    let mut f64buf = [0u8; 8];
    let mut read_f64 = |r: &mut BufReader<File>| -> Result<f64, PropagationError> {
        r.read_exact(&mut f64buf)?;
        Ok(f64::from_le_bytes(f64buf))
    };
    let origin = [read_f64(&mut r)?, read_f64(&mut r)?];
    let cell_size = read_f64(&mut r)?;
    let f_c_hz = read_f64(&mut r)?;
    if cell_size <= 0.0 {
        return Err(PropagationError::Format(format!(
            "cell size must be positive, got {cell_size}"
        )));
    }
    let expected = n_abs
        .checked_mul(cells_x)
        .and_then(|v| v.checked_mul(cells_y))
        .ok_or_else(|| PropagationError::Format("dimension overflow".into()))?;
    let mut gains = Vec::with_capacity(expected);
    let mut buf = [0u8; 8];
    for _ in 0..expected {
        if let Err(e) = r.read_exact(&mut buf) {
            return Err(PropagationError::Format(format!(
                "gain payload shorter than the {expected} cells promised by the header: {e}"
            )));
        }
        gains.push(f64::from_le_bytes(buf));
    }
    if r.read(&mut buf)? != 0 {
        return Err(PropagationError::Format(
            "trailing bytes after the promised gain payload".into(),
        ));
    }
    if gains.iter().any(|g| !g.is_finite() || *g < 0.0) {
        return Err(PropagationError::Format(
            "gains must be finite and non-negative".into(),
        ));
    }
    Ok(CoverageMap {
        n_abs,
        cells_x,
        cells_y,
        origin,
        cell_size,
        f_c_hz,
        gains,
        differentiable: false,
    })
}

/// Convenience: transmitter bank for a deployment at the scene's hover
/// elevation with directional panels.
pub fn tx_bank(
    scene: &Scene,
    positions: &[Point2],
    azimuths: &[f64],
    tilts: &[f64],
    powers_dbm: &[f64],
) -> Vec<TxConfig> {
    positions
        .iter()
        .zip(azimuths.iter().zip(tilts.iter().zip(powers_dbm.iter())))
        .map(|(p, (az, (tilt, dbm)))| TxConfig {
            position: [p[0], p[1], scene.hover_elevation],
            antenna: AntennaConfig::directional(*az, *tilt),
            power_dbm: *dbm,
        })
        .collect()
}
