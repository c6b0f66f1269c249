//! Global poses from chained range/bearing/orientation measurements.

use core::f64::consts::PI;

use rand::Rng;

use crate::geometry::Point;
use crate::math;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    /// Heading in the global frame, normalized to (-π, π].
    pub phi: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, phi: f64) -> Self {
        Self {
            x,
            y,
            phi: normalize_angle(phi),
        }
    }

    pub fn position(&self) -> Point {
        Point::new(self.x, self.y)
    }
}

/// What an observer robot measures about a neighbour.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Measurement {
    /// Range.
    pub range: f64,
    /// Bearing in the observer's local frame.
    pub bearing: f64,
    /// Orientation of the observed robot relative to the observer.
    pub orientation: f64,
}

/// Wraps an angle into (-π, π].
pub fn normalize_angle(angle: f64) -> f64 {
    let mut a = libm::fmod(angle, 2.0 * PI);
    if a <= -PI {
        a += 2.0 * PI;
    } else if a > PI {
        a -= 2.0 * PI;
    }
    a
}

pub fn compose_pose(parent: &Pose, meas: &Measurement) -> Pose {
    let beta = meas.bearing + parent.phi;
    Pose::new(
        parent.x + meas.range * math::cos(beta),
        parent.y + meas.range * math::sin(beta),
        parent.phi + meas.orientation,
    )
}

pub fn localize_chain<'a, I>(base: &Pose, chain: I) -> Pose
where
    I: IntoIterator<Item = &'a Measurement>,
{
    chain
        .into_iter()
        .fold(*base, |pose, meas| compose_pose(&pose, meas))
}

/// The measurement `m` such that `compose_pose(observer, m) == target`.
pub fn relative_measurement(observer: &Pose, target: &Pose) -> Measurement {
    let dx = target.x - observer.x;
    let dy = target.y - observer.y;
    let range = math::hypot(dx, dy);
    let bearing = if range == 0.0 {
        0.0
    } else {
        normalize_angle(math::atan2(dy, dx) - observer.phi)
    };
    Measurement {
        range,
        bearing,
        orientation: normalize_angle(target.phi - observer.phi),
    }
}

/// Zero-mean uniform measurement noise. Disabled when all widths are zero.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MeasurementNoise {
    pub range: f64,
    pub bearing: f64,
    pub orientation: f64,
}

impl MeasurementNoise {
    pub fn is_off(&self) -> bool {
        self.range == 0.0 && self.bearing == 0.0 && self.orientation == 0.0
    }

    pub fn apply<R: Rng + ?Sized>(&self, meas: &Measurement, rng: &mut R) -> Measurement {
        if self.is_off() {
            return *meas;
        }
        let mut jitter = |width: f64| {
            if width > 0.0 {
                rng.random_range(-width..=width)
            } else {
                0.0
            }
        };
        Measurement {
            range: (meas.range + jitter(self.range)).max(0.0),
            bearing: normalize_angle(meas.bearing + jitter(self.bearing)),
            orientation: normalize_angle(meas.orientation + jitter(self.orientation)),
        }
    }
}
