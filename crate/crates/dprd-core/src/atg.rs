//! Air-to-ground (AtG) channel model: circular UAV trajectory geometry,
//! elevation-dependent LoS probability, and probabilistic path loss.

use serde::{Deserialize, Serialize};

use crate::math;

/// Environment coefficients of the AtG link.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelEnvironment {
    /// Environment coefficient `a` of the LoS-probability sigmoid.
    pub a: f64,
    /// Environment coefficient `b` of the LoS-probability sigmoid.
    pub b: f64,
    /// Excess loss on LoS links (dB).
    pub eta_los_db: f64,
    /// Excess loss on NLoS links (dB).
    pub eta_nlos_db: f64,
    /// Carrier frequency (Hz).
    pub carrier_hz: f64,
    /// Propagation speed (m/s).
    pub propagation_speed: f64,
}

impl ChannelEnvironment {
    pub fn validate(&self) -> Result<(), &'static str> {
        if !(self.a > 0.0) {
            return Err("environment coefficient a must be positive");
        }
        if !(self.b > 0.0) {
            return Err("environment coefficient b must be positive");
        }
        if !(self.eta_los_db >= 0.0) || self.eta_nlos_db < self.eta_los_db {
            return Err("excess losses must satisfy eta_nlos >= eta_los >= 0");
        }
        if !(self.carrier_hz > 0.0) || !(self.propagation_speed > 0.0) {
            return Err("carrier frequency and propagation speed must be positive");
        }
        Ok(())
    }
}

/// Circular flight geometry of the UAV relative to a fixed ground receiver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryConfig {
    /// Circle center (m).
    pub center: [f64; 2],
    /// Circle radius (m).
    pub radius: f64,
    /// Flight altitude (m).
    pub altitude: f64,
    /// Flight speed (m/s).
    pub speed: f64,
    /// Ground receiver position (m).
    pub ecv: [f64; 2],
    /// Length of one time slot (s).
    pub slot_duration: f64,
}

impl TrajectoryConfig {
    pub fn validate(&self) -> Result<(), &'static str> {
        if !(self.radius > 0.0) {
            return Err("trajectory radius must be positive");
        }
        if !(self.altitude > 0.0) {
            return Err("flight altitude must be positive");
        }
        if !(self.speed >= 0.0) {
            return Err("flight speed must be non-negative");
        }
        if !(self.slot_duration > 0.0) {
            return Err("slot duration must be positive");
        }
        Ok(())
    }

    /// Number of slots per trajectory lap, `2*pi*radius / (speed*slot)`.
    ///
    /// Infinite for a hovering UAV.
    pub fn slots_per_lap(&self) -> f64 {
        2.0 * math::PI * self.radius / (self.speed * self.slot_duration)
    }
}

/// Path loss in both scales; downstream SNR math consumes the linear factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathLoss {
    pub db: f64,
    pub linear: f64,
}

/// UAV position at slot `t` (1-based). The UAV starts at angle 0, i.e. at
/// `[center_x + radius, center_y]`, and advances `speed*slot_duration`
/// along the arc per slot.
pub fn uav_position(traj: &TrajectoryConfig, t: u64) -> [f64; 2] {
    debug_assert!(t >= 1);
    let arc = traj.speed * traj.slot_duration * (t - 1) as f64;
    let angle = arc / traj.radius;
    [
        traj.center[0] + traj.radius * libm::cos(angle),
        traj.center[1] + traj.radius * libm::sin(angle),
    ]
}

/// Horizontal projection distance between UAV and receiver (m).
pub fn horizontal_distance(p_uav: [f64; 2], q_ecv: [f64; 2]) -> f64 {
    math::hypot(p_uav[0] - q_ecv[0], p_uav[1] - q_ecv[1])
}

/// Elevation angle in degrees; 90 exactly when the UAV is overhead.
pub fn elevation_angle(altitude: f64, dis: f64) -> f64 {
    debug_assert!(altitude > 0.0 && dis >= 0.0);
    if dis == 0.0 {
        return 90.0;
    }
    180.0 / math::PI * math::atan(altitude / dis)
}

/// LoS probability `1 / (1 + a*exp(-b*(theta - a)))` for `theta` in degrees.
pub fn los_probability(env: &ChannelEnvironment, theta_deg: f64) -> f64 {
    1.0 / (1.0 + env.a * math::exp(-env.b * (theta_deg - env.a)))
}

/// AtG path loss for the given altitude and horizontal distance.
///
/// The dB value is `20*log10(sqrt(H^2 + dis^2)) + E*p_los + F` with
/// `E = eta_los - eta_nlos` and `F = 20*log10(4*pi*fc/c) + eta_nlos`; the
/// linear factor is `10^(dB/10)`.
pub fn atg_path_loss(env: &ChannelEnvironment, altitude: f64, dis: f64) -> PathLoss {
    let theta = elevation_angle(altitude, dis);
    let p_los = los_probability(env, theta);
    let e = env.eta_los_db - env.eta_nlos_db;
    let f = 20.0 * math::log(4.0 * math::PI * env.carrier_hz / env.propagation_speed)
        / math::log(10.0)
        + env.eta_nlos_db;
    let slant = math::hypot(altitude, dis);
    let db = 20.0 * math::log(slant) / math::log(10.0) + e * p_los + f;
    PathLoss {
        db,
        linear: math::pow(10.0, db / 10.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::fabs;

    fn env(a: f64, b: f64, eta_los: f64, eta_nlos: f64) -> ChannelEnvironment {
        ChannelEnvironment {
            a,
            b,
            eta_los_db: eta_los,
            eta_nlos_db: eta_nlos,
            carrier_hz: 2e9,
            propagation_speed: 3e8,
        }
    }

    fn baseline_traj(speed: f64) -> TrajectoryConfig {
        TrajectoryConfig {
            center: [250.0, 250.0],
            radius: 250.0,
            altitude: 500.0,
            speed,
            ecv: [50.0, 50.0],
            slot_duration: 1.0,
        }
    }

    #[test]
    fn hovering_uav_stays_at_start_angle() {
        let traj = baseline_traj(0.0);
        for t in [1, 5, 200] {
            let p = uav_position(&traj, t);
            assert!(fabs(p[0] - 500.0) < 1e-9 && fabs(p[1] - 250.0) < 1e-9);
        }
    }

    #[test]
    fn per_slot_arc_length_equals_speed() {
        let traj = baseline_traj(20.0);
        let p1 = uav_position(&traj, 1);
        let p2 = uav_position(&traj, 2);
        let chord = math::hypot(p1[0] - p2[0], p1[1] - p2[1]);
        // arc = 2 r sin(chord angle / 2); invert to recover arc length
        let arc = 2.0 * traj.radius * libm::asin(chord / (2.0 * traj.radius));
        assert!(fabs(arc - 20.0) < 1e-9);
    }

    #[test]
    fn positions_periodic_with_lap_period() {
        let traj = baseline_traj(20.0);
        let period = traj.slots_per_lap();
        assert!(fabs(period - 78.539_816) < 1e-5);
        // period is non-integer; compare t and t + round-trip via angle math
        for t in 1..=10u64 {
            let p = uav_position(&traj, t);
            let d = math::hypot(p[0] - traj.center[0], p[1] - traj.center[1]);
            assert!(fabs(d - traj.radius) / traj.radius < 1e-9);
        }
    }

    #[test]
    fn horizontal_distance_examples() {
        assert_eq!(horizontal_distance([0.0, 0.0], [3.0, 4.0]), 5.0);
        assert_eq!(horizontal_distance([50.0, 50.0], [50.0, 50.0]), 0.0);
        let d = horizontal_distance([500.0, 250.0], [50.0, 50.0]);
        assert!(fabs(d - math::sqrt(450.0f64 * 450.0 + 200.0 * 200.0)) < 1e-9);
        assert!(fabs(d - 492.44) < 0.005);
    }

    #[test]
    fn elevation_angle_examples() {
        assert!(fabs(elevation_angle(100.0, 100.0) - 45.0) < 1e-12);
        assert_eq!(elevation_angle(500.0, 0.0), 90.0);
        let theta = elevation_angle(500.0, 492.44);
        assert!(fabs(theta - 180.0 / math::PI * math::atan(500.0 / 492.44)) < 1e-12);
        assert!(fabs(theta - 45.44) < 0.01);
    }

    #[test]
    fn los_probability_examples() {
        let e = env(4.0, 0.5, 0.0, 0.0);
        assert!(fabs(los_probability(&e, 4.0) - 0.2) < 1e-12);

        let e = env(9.61, 0.16, 0.0, 0.0);
        let p = los_probability(&e, 45.0);
        let expect = 1.0 / (1.0 + 9.61 * math::exp(-0.16 * (45.0 - 9.61)));
        assert!(fabs(p - expect) < 1e-12);
        assert!(fabs(p - 0.9677) < 5e-4);

        let steep = env(4.0, 5.0, 0.0, 0.0);
        assert!(los_probability(&steep, 90.0) > 1.0 - 1e-9);
    }

    #[test]
    fn los_probability_monotone_in_theta() {
        for (a, b) in [(4.0, 0.5), (9.61, 0.16), (12.0, 0.11)] {
            let e = env(a, b, 0.0, 0.0);
            let mut prev = los_probability(&e, 0.5);
            let mut theta = 1.0;
            while theta <= 90.0 {
                let p = los_probability(&e, theta);
                // strictly increasing until f64 saturation at 1
                if prev < 1.0 - 1e-12 {
                    assert!(p > prev, "p_los not increasing at theta={theta}");
                } else {
                    assert!(p >= prev);
                }
                prev = p;
                theta += 0.5;
            }
        }
    }

    #[test]
    fn path_loss_f_term() {
        // F alone: fc=2e9, c=3e8, eta_nlos=0 -> 20 log10(4 pi fc / c)
        let f = 20.0 * libm::log10(4.0 * math::PI * 2e9 / 3e8);
        assert!(fabs(f - 38.46) < 0.01);
    }

    #[test]
    fn path_loss_constructed_cancellation() {
        // H^2 + dis^2 = 1, and E*p_los = -F by construction -> 0 dB.
        let e = env(4.0, 0.5, 0.0, 0.0);
        let pl = atg_path_loss(&e, 1.0, 0.0);
        // with eta_los = eta_nlos = 0, E = 0, so dB = F alone at slant 1
        let f = 20.0 * libm::log10(4.0 * math::PI * 2e9 / 3e8);
        assert!(fabs(pl.db - f) < 1e-9);
        assert!(fabs(pl.linear - math::pow(10.0, f / 10.0)) < 1e-9);
    }

    #[test]
    fn path_loss_baseline_geometry_regression() {
        let e = env(9.61, 0.16, 1.0, 20.0);
        let pl = atg_path_loss(&e, 500.0, 492.44);
        // direct composition of the LoS probability and loss formulas
        let theta = elevation_angle(500.0, 492.44);
        let p_los = los_probability(&e, theta);
        let expect = 20.0 * libm::log10(math::hypot(500.0, 492.44)) + (1.0 - 20.0) * p_los
            + 20.0 * libm::log10(4.0 * math::PI * 2e9 / 3e8)
            + 20.0;
        assert!(fabs(pl.db - expect) < 1e-9);
        // frozen regression value
        assert!(fabs(pl.db - 96.960) < 0.05, "got {}", pl.db);
    }

    #[test]
    fn path_loss_db_monotone_in_distance() {
        let e = env(9.61, 0.16, 1.0, 20.0);
        let mut prev = atg_path_loss(&e, 500.0, 0.0).db;
        for i in 1..=200 {
            let dis = i as f64 * 5.0;
            let db = atg_path_loss(&e, 500.0, dis).db;
            assert!(db >= prev, "path loss decreased at dis={dis}");
            prev = db;
        }
    }
}
