//! Rotorcraft flight energy: thrust for the carried mass, the induced
//! velocity that produces it, the resulting power draw and energy per leg.
//!
//! Parcels are loaded at the depot and dropped one per customer, so the
//! carried mass (and with it the power) falls along a route.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::{DroneSpec, EnvironmentConstants, Point2D};

/// Relative residual the induced-velocity solver drives below.
pub const SOLVER_TOLERANCE: f64 = 1e-12;
const MAX_FIXED_POINT_ITERS: usize = 200;
const MAX_BISECTION_ITERS: usize = 200;
const MASS_SNAP: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyModelInputs {
    pub total_mass: f64,
    pub ground_speed: f64,
    pub pitch: f64,
    pub air_density: f64,
    pub rotor_diameter: f64,
    pub rotor_count: u32,
    pub efficiency: f64,
    pub gravity: f64,
}

impl EnergyModelInputs {
    pub fn new(spec: &DroneSpec, consts: &EnvironmentConstants, parcel_mass: f64) -> Self {
        EnergyModelInputs {
            total_mass: spec.frame_mass() + parcel_mass,
            ground_speed: spec.ground_speed,
            pitch: consts.pitch_angle,
            air_density: consts.air_density,
            rotor_diameter: spec.rotor_diameter,
            rotor_count: spec.rotor_count,
            efficiency: spec.power_efficiency,
            gravity: consts.gravity,
        }
    }

    /// `pi * d^2 * r * rho`
    fn disk_factor(&self) -> f64 {
        PI * self.rotor_diameter.powi(2) * self.rotor_count as f64 * self.air_density
    }

    fn check(&self) -> Result<()> {
        if !(self.total_mass > 0.0 && self.total_mass.is_finite()) {
            return Err(Error::Energy(format!("total mass {} must be positive", self.total_mass)));
        }
        if !(self.ground_speed >= 0.0 && self.ground_speed.is_finite()) {
            return Err(Error::Energy(format!(
                "ground speed {} must be non-negative",
                self.ground_speed
            )));
        }
        if !(self.disk_factor() > 0.0 && self.disk_factor().is_finite()) {
            return Err(Error::Energy("rotor geometry and air density must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LegResult {
    pub thrust: f64,
    pub induced_velocity: f64,
    pub power: f64,
    pub energy: f64,
    pub residual: f64,
}

/// `m * g * (1 + tan(pitch))`
pub fn required_thrust(total_mass: f64, pitch: f64, gravity: f64) -> Result<f64> {
    if !(total_mass > 0.0) {
        return Err(Error::Energy(format!("total mass {total_mass} must be positive")));
    }
    if !(0.0..std::f64::consts::FRAC_PI_2).contains(&pitch) {
        return Err(Error::Energy(format!("pitch {pitch} rad outside [0, pi/2)")));
    }
    Ok(total_mass * gravity * (1.0 + pitch.tan()))
}

pub fn remaining_parcel_mass(current: f64, dropped: f64) -> Result<f64> {
    if dropped < 0.0 || dropped > current + MASS_SNAP {
        return Err(Error::MassUnderflow {
            carried: current,
            dropped,
        });
    }
    let rest = current - dropped;
    Ok(if rest < MASS_SNAP { 0.0 } else { rest })
}

/// Momentum-balance mismatch for a candidate induced velocity:
/// `v_i * pi d^2 r rho * sqrt((v cos th)^2 + (v sin th + v_i)^2) - 2 T`.
///
/// Strictly increasing in `v_i >= 0`, negative at zero.
pub fn induced_velocity_residual(induced: f64, thrust: f64, inputs: &EnergyModelInputs) -> f64 {
    let along = inputs.ground_speed * inputs.pitch.cos();
    let normal = inputs.ground_speed * inputs.pitch.sin() + induced;
    induced * inputs.disk_factor() * along.hypot(normal) - 2.0 * thrust
}

/// Hover solution, which also bounds the forward-flight root from above.
pub fn hover_induced_velocity(thrust: f64, inputs: &EnergyModelInputs) -> f64 {
    (2.0 * thrust / inputs.disk_factor()).sqrt()
}

/// Non-negative root of the induced-velocity equation.
///
/// Damped fixed-point iteration on `v_i = 2T / (A sqrt(..))` inside the
/// bracket `[0, hover]`; any step that leaves the bracket or fails to shrink
/// the residual is replaced by a bisection step.
pub fn solve_induced_velocity(thrust: f64, inputs: &EnergyModelInputs) -> Result<f64> {
    inputs.check()?;
    if !(thrust > 0.0 && thrust.is_finite()) {
        return Err(Error::Energy(format!("thrust {thrust} must be positive")));
    }
    let scale = 2.0 * thrust;
    let f = |v: f64| induced_velocity_residual(v, thrust, inputs);

    let mut lo = 0.0;
    let mut hi = hover_induced_velocity(thrust, inputs);
    if f(hi) <= 0.0 {
        // only possible at the hover limit itself
        return Ok(hi);
    }

    let along = inputs.ground_speed * inputs.pitch.cos();
    let lift = inputs.ground_speed * inputs.pitch.sin();
    let a = inputs.disk_factor();
    let mut x = hi;
    let mut fx = f(x);
    for _ in 0..MAX_FIXED_POINT_ITERS {
        if fx.abs() <= SOLVER_TOLERANCE * scale {
            return Ok(x);
        }
        if fx > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let g = scale / (a * along.hypot(lift + x));
        let mut next = 0.5 * (x + g);
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let fnext = f(next);
        if fnext.abs() >= fx.abs() {
            let mid = 0.5 * (lo + hi);
            x = mid;
            fx = f(mid);
        } else {
            x = next;
            fx = fnext;
        }
    }
    for _ in 0..MAX_BISECTION_ITERS {
        if fx.abs() <= SOLVER_TOLERANCE * scale || hi - lo <= f64::EPSILON * hi {
            return Ok(x);
        }
        if fx > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        x = 0.5 * (lo + hi);
        fx = f(x);
    }
    if fx.is_finite() && (hi - lo) <= 4.0 * f64::EPSILON * hi.max(1.0) {
        return Ok(x);
    }
    Err(Error::NoConvergence {
        thrust,
        speed: inputs.ground_speed,
    })
}

/// `(v sin th + v_i) * T / eff`
pub fn leg_power(thrust: f64, induced: f64, inputs: &EnergyModelInputs) -> Result<f64> {
    if !(inputs.efficiency > 0.0) {
        return Err(Error::Energy(format!(
            "efficiency {} must be positive",
            inputs.efficiency
        )));
    }
    Ok((inputs.ground_speed * inputs.pitch.sin() + induced) * thrust / inputs.efficiency)
}

/// Full breakdown for one leg flown with `parcel_mass` on board.
pub fn leg(
    spec: &DroneSpec,
    consts: &EnvironmentConstants,
    parcel_mass: f64,
    distance: f64,
) -> Result<LegResult> {
    if !(distance >= 0.0 && distance.is_finite()) {
        return Err(Error::Energy(format!("distance {distance} must be non-negative")));
    }
    if !(spec.ground_speed > 0.0) {
        return Err(Error::Energy("ground speed must be positive to cover distance".into()));
    }
    let inputs = EnergyModelInputs::new(spec, consts, parcel_mass);
    let thrust = required_thrust(inputs.total_mass, inputs.pitch, inputs.gravity)?;
    let induced = solve_induced_velocity(thrust, &inputs)?;
    let power = leg_power(thrust, induced, &inputs)?;
    Ok(LegResult {
        thrust,
        induced_velocity: induced,
        power,
        energy: power * distance / spec.ground_speed,
        residual: induced_velocity_residual(induced, thrust, &inputs),
    })
}

/// Joules to fly `distance` meters carrying `parcel_mass` kg.
pub fn leg_energy(
    spec: &DroneSpec,
    consts: &EnvironmentConstants,
    parcel_mass: f64,
    distance: f64,
) -> Result<f64> {
    if distance == 0.0 {
        return Ok(0.0);
    }
    Ok(leg(spec, consts, parcel_mass, distance)?.energy)
}

/// Energy of a route given as `(location, parcel mass dropped there)`.
///
/// The drone leaves the first stop carrying every parcel on the route and
/// sheds each one at its customer; depots drop nothing.
pub fn route_energy(
    spec: &DroneSpec,
    consts: &EnvironmentConstants,
    stops: &[(Point2D, f64)],
) -> Result<f64> {
    if stops.len() < 2 {
        return Err(Error::RouteTooShort(stops.len()));
    }
    let total: f64 = stops.iter().map(|s| s.1).sum();
    if total > spec.max_payload + MASS_SNAP {
        return Err(Error::PayloadExceeded {
            mass: total,
            cap: spec.max_payload,
        });
    }
    let mut carried = remaining_parcel_mass(total, stops[0].1)?;
    let mut energy = 0.0;
    for pair in stops.windows(2) {
        let (from, _) = pair[0];
        let (to, drop) = pair[1];
        energy += leg_energy(spec, consts, carried, from.distance(&to))?;
        carried = remaining_parcel_mass(carried, drop)?;
    }
    Ok(energy)
}

/// Usable battery energy in joules: enough to fly the rated range at full
/// payload, so any route within range and payload caps fits one battery.
pub fn battery_capacity(spec: &DroneSpec, consts: &EnvironmentConstants) -> Result<f64> {
    leg_energy(spec, consts, spec.max_payload, spec.max_range)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hover_inputs(mass: f64) -> EnergyModelInputs {
        EnergyModelInputs {
            total_mass: mass,
            ground_speed: 0.0,
            pitch: 0.0,
            air_density: 1.225,
            rotor_diameter: 0.5,
            rotor_count: 4,
            efficiency: 0.8,
            gravity: 9.81,
        }
    }

    /// Independent oracle: plain bisection on the residual over [0, hover].
    fn bisection_oracle(thrust: f64, inputs: &EnergyModelInputs) -> f64 {
        let a = PI * inputs.rotor_diameter.powi(2) * inputs.rotor_count as f64 * inputs.air_density;
        let f = |v: f64| {
            let c = inputs.ground_speed * inputs.pitch.cos();
            let s = inputs.ground_speed * inputs.pitch.sin() + v;
            v * a * (c * c + s * s).sqrt() - 2.0 * thrust
        };
        let (mut lo, mut hi) = (0.0, (2.0 * thrust / a).sqrt());
        for _ in 0..300 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn thrust_examples() {
        assert!((required_thrust(3.0, 0.0, 9.81).unwrap() - 29.43).abs() < 1e-12);
        assert!((required_thrust(3.0, PI / 4.0, 9.81).unwrap() - 58.86).abs() < 1e-9);
        assert!((required_thrust(3.5, 0.0, 9.81).unwrap() - 34.335).abs() < 1e-12);
        assert!(required_thrust(3.0, PI / 2.0, 9.81).is_err());
    }

    #[test]
    fn parcel_mass_drop() {
        assert!((remaining_parcel_mass(1.5, 0.5).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(remaining_parcel_mass(0.7, 0.7).unwrap(), 0.0);
        assert!(remaining_parcel_mass(0.5, 0.8).is_err());
    }

    #[test]
    fn hover_closed_form() {
        let inputs = hover_inputs(3.0);
        let v = solve_induced_velocity(29.43, &inputs).unwrap();
        let closed = (2.0 * 29.43 / (PI * 0.25 * 4.0 * 1.225)).sqrt();
        assert!((v - closed).abs() / closed < 1e-9);
        assert!((v - 3.911).abs() < 1e-3);
        let v4 = solve_induced_velocity(4.0 * 29.43, &inputs).unwrap();
        assert!((v4 / v - 2.0).abs() < 1e-9);
    }

    #[test]
    fn forward_flight_matches_bisection() {
        let inputs = EnergyModelInputs {
            ground_speed: 10.0,
            ..hover_inputs(3.0)
        };
        let v = solve_induced_velocity(29.43, &inputs).unwrap();
        let oracle = bisection_oracle(29.43, &inputs);
        assert!((v - oracle).abs() / oracle < 1e-9, "{v} vs {oracle}");
    }

    #[test]
    fn hover_power() {
        let inputs = hover_inputs(3.0);
        let v = solve_induced_velocity(29.43, &inputs).unwrap();
        let p = leg_power(29.43, v, &inputs).unwrap();
        assert!((p - 143.9).abs() < 0.05, "{p}");
        let half = EnergyModelInputs {
            efficiency: 0.4,
            ..inputs
        };
        assert!((leg_power(29.43, v, &half).unwrap() / p - 2.0).abs() < 1e-12);
        let moving = EnergyModelInputs {
            ground_speed: 7.0,
            ..inputs
        };
        assert_eq!(leg_power(29.43, 0.0, &moving).unwrap(), 0.0);
        let broken = EnergyModelInputs {
            efficiency: 0.0,
            ..inputs
        };
        assert!(leg_power(29.43, v, &broken).is_err());
    }

    #[test]
    fn leg_energy_linear_and_monotone() {
        let spec = DroneSpec::default();
        let c = EnvironmentConstants::default();
        assert_eq!(leg_energy(&spec, &c, 1.0, 0.0).unwrap(), 0.0);
        let e1 = leg_energy(&spec, &c, 0.5, 700.0).unwrap();
        let e2 = leg_energy(&spec, &c, 0.5, 1400.0).unwrap();
        assert!((e2 - 2.0 * e1).abs() <= 1e-9 * e2);
        let loaded = leg_energy(&spec, &c, 1.0, 1000.0).unwrap();
        let empty = leg_energy(&spec, &c, 0.0, 1000.0).unwrap();
        assert!(loaded > empty);
    }

    #[test]
    fn route_energy_degenerate_and_two_leg() {
        let spec = DroneSpec::default();
        let c = EnvironmentConstants::default();
        let d0 = Point2D::new(0.0, 0.0);
        let d1 = Point2D::new(1000.0, 0.0);
        let direct = route_energy(&spec, &c, &[(d0, 0.0), (d1, 0.0)]).unwrap();
        assert_eq!(direct, leg_energy(&spec, &c, 0.0, 1000.0).unwrap());

        let cust = Point2D::new(500.0, 0.0);
        let e = route_energy(&spec, &c, &[(d0, 0.0), (cust, 0.8), (d0, 0.0)]).unwrap();
        let heavy = leg_energy(&spec, &c, 0.8, 500.0).unwrap();
        let light = leg_energy(&spec, &c, 0.0, 500.0).unwrap();
        assert_eq!(e, heavy + light);
    }

    #[test]
    fn route_energy_symmetric_orders() {
        let spec = DroneSpec::default();
        let c = EnvironmentConstants::default();
        let d = Point2D::new(0.0, 0.0);
        let a = Point2D::new(300.0, 400.0);
        let b = Point2D::new(300.0, -400.0);
        let ab = route_energy(&spec, &c, &[(d, 0.0), (a, 0.6), (b, 0.6), (d, 0.0)]).unwrap();
        let ba = route_energy(&spec, &c, &[(d, 0.0), (b, 0.6), (a, 0.6), (d, 0.0)]).unwrap();
        assert!((ab - ba).abs() <= 1e-9 * ab);
    }

    #[test]
    fn route_errors() {
        let spec = DroneSpec::default();
        let c = EnvironmentConstants::default();
        let d = Point2D::new(0.0, 0.0);
        assert!(matches!(
            route_energy(&spec, &c, &[(d, 0.0)]),
            Err(Error::RouteTooShort(1))
        ));
        let far = Point2D::new(10.0, 0.0);
        assert!(matches!(
            route_energy(&spec, &c, &[(d, 0.0), (far, 2.0), (far, 1.0), (d, 0.0)]),
            Err(Error::PayloadExceeded { .. })
        ));
    }

    #[test]
    fn capacity_covers_loaded_range() {
        let spec = DroneSpec::default();
        let c = EnvironmentConstants::default();
        let cap = battery_capacity(&spec, &c).unwrap();
        assert!(cap > leg_energy(&spec, &c, 0.0, spec.max_range).unwrap());
    }
}
