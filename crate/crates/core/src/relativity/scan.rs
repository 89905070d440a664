//! Lower bounds on the speed of a hidden influence from quasi-simultaneous
//! measurements on two sites carried around by the Earth's rotation.
//!
//! First-order kinematic model: both sites register outcomes at the same lab
//! time with synchronisation uncertainty `δt`. The chord joining them rotates
//! rigidly about the z axis at `ω`. A candidate privileged frame moves at `β`
//! in the equatorial (x–y) plane at some azimuth. At session time `t` the
//! outcome events are separated in that frame by `D' = |Δx'|` and
//! `Δt' = γ |β·d(t)| / c`, so an influence explaining the correlations must be
//! faster than `D' / (c (Δt' + δt))` (units of c). Each frame's bound is the
//! best such value over the session; the overall bound is the worst frame.

use std::f64::consts::PI;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize, Serializer};

use super::{boost, EventKind, Frame, RelativityError, SpacetimeEvent, Units, C_SI, SPEED_CAP};

/// Mean Earth radius, used for latitude/longitude sites.
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;
/// Sidereal rotation rate of the Earth.
pub const EARTH_OMEGA_RAD_S: f64 = 7.292_115_9e-5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SitePosition {
    Planar {
        x_m: f64,
        y_m: f64,
        #[serde(default)]
        z_m: f64,
    },
    Geographic {
        lat_deg: f64,
        lon_deg: f64,
    },
}

impl SitePosition {
    /// Earth-centred coordinates, rotation axis along z.
    pub fn to_cartesian(&self) -> Vector3<f64> {
        match *self {
            SitePosition::Planar { x_m, y_m, z_m } => Vector3::new(x_m, y_m, z_m),
            SitePosition::Geographic { lat_deg, lon_deg } => {
                let (lat, lon) = (lat_deg.to_radians(), lon_deg.to_radians());
                EARTH_RADIUS_M
                    * Vector3::new(lat.cos() * lon.cos(), lat.cos() * lon.sin(), lat.sin())
            }
        }
    }
}

fn default_omega() -> f64 {
    EARTH_OMEGA_RAD_S
}
fn default_session() -> f64 {
    12.0 * 3600.0
}
fn default_step() -> f64 {
    1.0
}
fn default_betas() -> Vec<f64> {
    vec![0.0, 1e-3]
}
fn default_samples() -> usize {
    1441
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanGeometry {
    pub sites: [SitePosition; 2],
    #[serde(default = "default_omega")]
    pub omega_rad_s: f64,
    #[serde(default = "default_session")]
    pub session_s: f64,
    #[serde(default = "default_step")]
    pub azimuth_step_deg: f64,
    /// Candidate privileged-frame speeds; `0` is the lab frame.
    #[serde(default = "default_betas")]
    pub betas: Vec<f64>,
    /// Evenly spaced session times examined besides the exact alignment times.
    #[serde(default = "default_samples")]
    pub time_samples: usize,
}

impl ScanGeometry {
    /// Two sites `distance_m` apart on an east–west chord in the equatorial plane.
    pub fn chord(distance_m: f64) -> Self {
        Self {
            sites: [
                SitePosition::Planar {
                    x_m: 0.0,
                    y_m: 0.0,
                    z_m: 0.0,
                },
                SitePosition::Planar {
                    x_m: distance_m,
                    y_m: 0.0,
                    z_m: 0.0,
                },
            ],
            omega_rad_s: EARTH_OMEGA_RAD_S,
            session_s: default_session(),
            azimuth_step_deg: default_step(),
            betas: default_betas(),
            time_samples: default_samples(),
        }
    }

    pub fn swapped(&self) -> Self {
        Self {
            sites: [self.sites[1], self.sites[0]],
            ..self.clone()
        }
    }

    fn validate(&self) -> Result<(), RelativityError> {
        let bad = |m: &str| Err(RelativityError::Geometry(m.into()));
        if !self.session_s.is_finite() || self.session_s <= 0.0 {
            return bad("session duration must be positive");
        }
        if !self.omega_rad_s.is_finite() {
            return bad("omega must be finite");
        }
        if !(self.azimuth_step_deg > 0.0 && self.azimuth_step_deg <= 360.0) {
            return bad("azimuth step must be in (0, 360]");
        }
        if self.betas.is_empty() || self.betas.iter().any(|b| !(0.0..1.0).contains(b)) {
            return bad("frame speeds must lie in [0, 1)");
        }
        if self.time_samples < 2 {
            return bad("need at least two time samples");
        }
        if (self.sites[1].to_cartesian() - self.sites[0].to_cartesian()).norm() == 0.0 {
            return bad("sites coincide");
        }
        Ok(())
    }
}

/// Named geometry plus synchronisation assumption.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanPreset {
    pub name: &'static str,
    pub geometry: ScanGeometry,
    pub sync_s: f64,
    pub note: &'static str,
}

impl ScanPreset {
    pub fn all() -> Vec<ScanPreset> {
        vec![
            ScanPreset {
                name: "geneva-18km-6ns",
                geometry: ScanGeometry::chord(18e3),
                sync_s: 6e-9,
                note: "18 km east-west chord, 6 ns effective synchronisation: bound of order 1e4 c",
            },
            ScanPreset {
                name: "geneva-18km-0.6ns",
                geometry: ScanGeometry::chord(18e3),
                sync_s: 0.6e-9,
                note: "same chord, 0.6 ns effective synchronisation (tighter timing assumption): order 1e5 c",
            },
        ]
    }

    pub fn by_name(name: &str) -> Option<ScanPreset> {
        Self::all().into_iter().find(|p| p.name == name)
    }
}

/// A speed bound in units of c, or a value above [`SPEED_CAP`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpeedBound {
    Finite(f64),
    ExceedsCap,
}

impl SpeedBound {
    fn from_value(v: f64) -> Self {
        if v.is_finite() && v <= SPEED_CAP {
            SpeedBound::Finite(v)
        } else {
            SpeedBound::ExceedsCap
        }
    }

    pub fn value(&self) -> Option<f64> {
        match self {
            SpeedBound::Finite(v) => Some(*v),
            SpeedBound::ExceedsCap => None,
        }
    }

    fn raw(&self) -> f64 {
        self.value().unwrap_or(f64::INFINITY)
    }
}

impl std::fmt::Display for SpeedBound {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SpeedBound::Finite(v) => f.write_str(&crate::format::fmt_f64(*v)),
            SpeedBound::ExceedsCap => f.write_str("exceeds_cap"),
        }
    }
}

impl Serialize for SpeedBound {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        match self {
            SpeedBound::Finite(v) => ser.serialize_f64(*v),
            SpeedBound::ExceedsCap => ser.serialize_str("exceeds_cap"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrameBound {
    pub azimuth_deg: f64,
    pub beta: f64,
    pub v_min_over_c: SpeedBound,
    /// Session time of best simultaneity.
    pub best_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanResult {
    pub sync_s: f64,
    pub frames: Vec<FrameBound>,
    pub overall: SpeedBound,
}

impl ScanResult {
    /// `frame_azimuth_deg,frame_beta,v_min_over_c`, one row per frame, then an
    /// `overall` row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("frame_azimuth_deg,frame_beta,v_min_over_c\n");
        for f in &self.frames {
            out.push_str(&format!(
                "{},{},{}\n",
                crate::format::fmt_f64(f.azimuth_deg),
                crate::format::fmt_f64(f.beta),
                f.v_min_over_c
            ));
        }
        out.push_str(&format!("overall,,{}\n", self.overall));
        out
    }
}

/// Scans every candidate privileged frame; see the module docs for the model.
pub fn scan_speed_bound(
    geometry: &ScanGeometry,
    sync_s: f64,
) -> Result<ScanResult, RelativityError> {
    if !sync_s.is_finite() || sync_s <= 0.0 {
        return Err(RelativityError::Configuration(format!(
            "synchronisation uncertainty {sync_s} must be > 0"
        )));
    }
    geometry.validate()?;
    let d0 = geometry.sites[1].to_cartesian() - geometry.sites[0].to_cartesian();
    let n_az = (360.0 / geometry.azimuth_step_deg).round().max(1.0) as usize;
    let mut frames = Vec::new();
    for &beta in &geometry.betas {
        let azimuths: Vec<f64> = if beta == 0.0 {
            vec![0.0]
        } else {
            (0..n_az)
                .map(|i| i as f64 * geometry.azimuth_step_deg)
                .collect()
        };
        for az in azimuths {
            let (v, best_time_s) = frame_bound(geometry, d0, az, beta, sync_s)?;
            frames.push(FrameBound {
                azimuth_deg: az,
                beta,
                v_min_over_c: SpeedBound::from_value(v),
                best_time_s,
            });
        }
    }
    let overall = frames
        .iter()
        .map(|f| f.v_min_over_c.raw())
        .fold(f64::INFINITY, f64::min);
    Ok(ScanResult {
        sync_s,
        frames,
        overall: SpeedBound::from_value(overall),
    })
}

fn chord_at(d0: Vector3<f64>, omega: f64, t: f64) -> Vector3<f64> {
    let (s, c) = (omega * t).sin_cos();
    Vector3::new(c * d0.x - s * d0.y, s * d0.x + c * d0.y, d0.z)
}

fn frame_bound(
    g: &ScanGeometry,
    d0: Vector3<f64>,
    azimuth_deg: f64,
    beta: f64,
    sync_s: f64,
) -> Result<(f64, f64), RelativityError> {
    let (sa, ca) = azimuth_deg.to_radians().sin_cos();
    let frame = Frame::new([beta * ca, beta * sa, 0.0])?;
    let mut times: Vec<f64> = (0..g.time_samples)
        .map(|i| g.session_s * i as f64 / (g.time_samples - 1) as f64)
        .collect();
    // β·d(t) = β |d_xy| cos(ωt + α0 − φ) vanishes at ωt = φ − α0 + π/2 + kπ
    if g.omega_rad_s != 0.0 && beta > 0.0 {
        let alpha0 = d0.y.atan2(d0.x);
        let base = azimuth_deg.to_radians() - alpha0 + PI / 2.0;
        let w = g.omega_rad_s;
        let span = (w * g.session_s).abs() / PI;
        let k_lo = ((-base) / PI).floor() as i64 - 1 - span.ceil() as i64;
        let k_hi = k_lo + 2 * span.ceil() as i64 + 4;
        for k in k_lo..=k_hi {
            let t = (base + k as f64 * PI) / w;
            if (0.0..=g.session_s).contains(&t) {
                times.push(t);
            }
        }
    }
    let mut best = (f64::NEG_INFINITY, 0.0);
    for t in times {
        let d = chord_at(d0, g.omega_rad_s, t);
        let a = SpacetimeEvent::new(0, EventKind::OutcomeRegistered, [0.0; 3], 0.0, Units::Si);
        let b = SpacetimeEvent::new(1, EventKind::OutcomeRegistered, d.into(), 0.0, Units::Si);
        let (pa, pb) = (boost(&a, &frame), boost(&b, &frame));
        let dist = (pb.position - pa.position).norm();
        let dt = (pb.time - pa.time).abs();
        let v = dist / (C_SI * (dt + sync_s));
        if v > best.0 {
            best = (v, t);
        }
    }
    Ok(best)
}
