//! Antenna element patterns: the directional panel pattern from the 5G NR
//! channel-model standard (65-degree beamwidths, 30 dB floors, 8 dBi peak),
//! the classical half-wave dipole, and an isotropic reference. Each pattern
//! has an exact evaluation and a smoothed dual-number variant used when
//! gradients are requested.

use serde::{Deserialize, Serialize};

use crate::dual::Dual4;
use crate::units::db_to_linear;

/// Mechanical tilt lower bound for ABS panels (radians).
pub const TILT_MIN: f64 = std::f64::consts::PI / 7.0;
/// Mechanical tilt upper bound for ABS panels (radians).
pub const TILT_MAX: f64 = 6.0 * std::f64::consts::PI / 7.0;
/// Mechanical azimuth bound for ABS panels (radians, symmetric).
pub const AZIMUTH_BOUND: f64 = 2.0 * std::f64::consts::PI;

/// Half-power beamwidth of the directional element, degrees.
const BEAMWIDTH_DEG: f64 = 65.0;
/// Side-lobe floor of each principal cut, dB.
const CUT_FLOOR_DB: f64 = 30.0;
/// Total attenuation floor of the combined pattern, dB.
const TOTAL_FLOOR_DB: f64 = 30.0;
/// Peak element gain of the directional pattern, dBi.
pub const DIRECTIONAL_PEAK_DBI: f64 = 8.0;
/// Peak gain of a half-wave dipole, dBi.
pub const DIPOLE_PEAK_DBI: f64 = 2.15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PatternKind {
    Directional3gpp,
    HalfwaveDipole,
    Isotropic,
}

/// Mounted antenna: pattern kind plus mechanical orientation.
///
/// `tilt` is the downtilt of the boresight from the horizon: `pi/2` points
/// the panel straight at the ground, values past `pi/2` tilt it backwards.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AntennaConfig {
    pub kind: PatternKind,
    /// Mechanical azimuth in radians.
    pub azimuth: f64,
    /// Mechanical downtilt in radians.
    pub tilt: f64,
    /// Boresight gain in dBi.
    pub gain_dbi: f64,
}

impl AntennaConfig {
    /// Directional panel at the given mechanical orientation.
    pub fn directional(azimuth: f64, tilt: f64) -> Self {
        Self {
            kind: PatternKind::Directional3gpp,
            azimuth,
            tilt,
            gain_dbi: DIRECTIONAL_PEAK_DBI,
        }
    }

    /// Upright half-wave dipole (the UE default).
    pub fn dipole_upright() -> Self {
        Self {
            kind: PatternKind::HalfwaveDipole,
            azimuth: 0.0,
            tilt: 0.0,
            gain_dbi: DIPOLE_PEAK_DBI,
        }
    }

    pub fn isotropic() -> Self {
        Self {
            kind: PatternKind::Isotropic,
            azimuth: 0.0,
            tilt: 0.0,
            gain_dbi: 0.0,
        }
    }
}

/// Directional element gain in linear scale for local angles
/// (`azimuth_off` from boresight, `zenith` from the panel's up axis;
/// boresight sits at `zenith = pi/2`).
pub fn element_gain_directional(azimuth_off: f64, zenith: f64) -> f64 {
    element_gain_directional_peaked(azimuth_off, zenith, DIRECTIONAL_PEAK_DBI)
}

/// As [`element_gain_directional`] with an explicit peak gain.
pub fn element_gain_directional_peaked(azimuth_off: f64, zenith: f64, peak_dbi: f64) -> f64 {
    let theta_deg = zenith.to_degrees();
    let phi_deg = azimuth_off.to_degrees();
    let a_v = -(12.0 * ((theta_deg - 90.0) / BEAMWIDTH_DEG).powi(2)).min(CUT_FLOOR_DB);
    let a_h = -(12.0 * (phi_deg / BEAMWIDTH_DEG).powi(2)).min(CUT_FLOOR_DB);
    let a_db = peak_dbi - (-(a_v + a_h)).min(TOTAL_FLOOR_DB);
    db_to_linear(a_db)
}

/// Half-wave dipole gain in linear scale at the given zenith angle measured
/// from the dipole axis; zero along the axis by the limit.
pub fn element_gain_dipole(zenith: f64) -> f64 {
    element_gain_dipole_peaked(zenith, DIPOLE_PEAK_DBI)
}

/// As [`element_gain_dipole`] with an explicit peak gain.
pub fn element_gain_dipole_peaked(zenith: f64, peak_dbi: f64) -> f64 {
    let s = zenith.sin();
    if s == 0.0 {
        return 0.0;
    }
    let shape = ((std::f64::consts::FRAC_PI_2 * zenith.cos()).cos() / s).powi(2);
    db_to_linear(peak_dbi) * shape
}

/// Smoothed directional gain for the differentiable path: the hard min
/// clamps are replaced by a log-sum-exp soft minimum of the given sharpness.
pub fn element_gain_directional_dual(
    azimuth_off: Dual4,
    zenith: Dual4,
    peak_dbi: f64,
    sharpness: f64,
) -> Dual4 {
    let deg = 180.0 / std::f64::consts::PI;
    let theta_deg = zenith.scale(deg);
    let phi_deg = azimuth_off.scale(deg);
    let v = (theta_deg - Dual4::constant(90.0)).scale(1.0 / BEAMWIDTH_DEG);
    let h = phi_deg.scale(1.0 / BEAMWIDTH_DEG);
    let a_v = -(v.powi(2).scale(12.0)).smooth_min(Dual4::constant(CUT_FLOOR_DB), sharpness);
    let a_h = -(h.powi(2).scale(12.0)).smooth_min(Dual4::constant(CUT_FLOOR_DB), sharpness);
    let att = (-(a_v + a_h)).smooth_min(Dual4::constant(TOTAL_FLOOR_DB), sharpness);
    let a_db = Dual4::constant(peak_dbi) - att;
    // 10^(a/10) = exp(a ln10 / 10)
    a_db.scale(std::f64::consts::LN_10 / 10.0).exp()
}

/// Dipole gain on dual numbers; same removable-singularity guard as the
/// exact form.
pub fn element_gain_dipole_dual(zenith: Dual4, peak_dbi: f64) -> Dual4 {
    let s = zenith.sin();
    if s.val == 0.0 {
        return Dual4::constant(0.0);
    }
    let shape = (zenith.cos().scale(std::f64::consts::FRAC_PI_2).cos() / s).powi(2);
    shape.scale(db_to_linear(peak_dbi))
}

/// Orthonormal antenna frame in world coordinates: boresight, horizontal
/// cross axis, panel up.
pub struct Frame<T> {
    pub boresight: [T; 3],
    pub cross: [T; 3],
    pub up: [T; 3],
}

/// Frame from mechanical azimuth and downtilt (exact values).
pub fn frame(azimuth: f64, tilt: f64) -> Frame<f64> {
    let (sa, ca) = azimuth.sin_cos();
    let (st, ct) = tilt.sin_cos();
    Frame {
        boresight: [ct * ca, ct * sa, -st],
        cross: [-sa, ca, 0.0],
        up: [st * ca, st * sa, ct],
    }
}

/// Frame on dual numbers (azimuth/tilt may carry derivative seeds).
pub fn frame_dual(azimuth: Dual4, tilt: Dual4) -> Frame<Dual4> {
    let (sa, ca) = (azimuth.sin(), azimuth.cos());
    let (st, ct) = (tilt.sin(), tilt.cos());
    Frame {
        boresight: [ct * ca, ct * sa, -st],
        cross: [-sa, ca, Dual4::constant(0.0)],
        up: [st * ca, st * sa, ct],
    }
}

/// Local pattern angles of a unit direction within a frame:
/// (azimuth offset from boresight, zenith from panel up).
pub fn local_angles(f: &Frame<f64>, u: [f64; 3]) -> (f64, f64) {
    let dot = |a: &[f64; 3]| a[0] * u[0] + a[1] * u[1] + a[2] * u[2];
    let vx = dot(&f.boresight);
    let vy = dot(&f.cross);
    let vz = dot(&f.up);
    (vy.atan2(vx), vz.clamp(-1.0, 1.0).acos())
}

/// [`local_angles`] on dual numbers.
pub fn local_angles_dual(f: &Frame<Dual4>, u: [Dual4; 3]) -> (Dual4, Dual4) {
    let dot = |a: &[Dual4; 3]| a[0] * u[0] + a[1] * u[1] + a[2] * u[2];
    let vx = dot(&f.boresight);
    let vy = dot(&f.cross);
    let vz = dot(&f.up);
    (vy.atan2(vx), vz.acos_clamped())
}

/// Gain of a mounted antenna toward the unit direction `u` (world frame),
/// exact evaluation with hard pattern clamps.
pub fn mounted_gain(antenna: &AntennaConfig, u: [f64; 3]) -> f64 {
    match antenna.kind {
        PatternKind::Isotropic => db_to_linear(antenna.gain_dbi),
        PatternKind::HalfwaveDipole => {
            let f = frame(antenna.azimuth, antenna.tilt);
            let (_, zen) = local_angles(&f, u);
            element_gain_dipole_peaked(zen, antenna.gain_dbi)
        }
        PatternKind::Directional3gpp => {
            let f = frame(antenna.azimuth, antenna.tilt);
            let (az, zen) = local_angles(&f, u);
            element_gain_directional_peaked(az, zen, antenna.gain_dbi)
        }
    }
}
