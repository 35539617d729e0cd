//! Classical motion of the actual (damped) and image (anti-damped) oscillators.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{EpsError, Result};
use crate::format::sci17;
use crate::params::{EpsPoint, PhysParams};
use crate::transforms::damped_extended_hamiltonian;

/// Positions and velocities of both oscillators at `t = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitialConditions {
    pub q0: f64,
    pub qdot0: f64,
    pub p0: f64,
    pub pdot0: f64,
}

impl InitialConditions {
    pub fn new(q0: f64, qdot0: f64, p0: f64, pdot0: f64) -> Result<Self> {
        let ic = InitialConditions { q0, qdot0, p0, pdot0 };
        if [q0, qdot0, p0, pdot0].iter().any(|v| !v.is_finite()) {
            return Err(EpsError::Domain(format!("initial conditions must be finite: {ic:?}")));
        }
        Ok(ic)
    }

    /// Default image pairing `p0 = q0`, `pdot0 = −qdot0`.
    pub fn mirrored(q0: f64, qdot0: f64) -> Result<Self> {
        Self::new(q0, qdot0, q0, 0.0 - qdot0)
    }
}

/// Physical positions and velocities.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OscState {
    pub q: f64,
    pub qdot: f64,
    pub p: f64,
    pub pdot: f64,
}

impl OscState {
    fn is_finite(&self) -> bool {
        [self.q, self.qdot, self.p, self.pdot].iter().all(|v| v.is_finite())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyRecord {
    pub e_actual: f64,
    pub e_image: f64,
    /// Actual-oscillator part of the damped extended Hamiltonian.
    pub h2_actual: f64,
    /// Image part (with its minus sign).
    pub h2_image: f64,
    pub h2: f64,
}

/// A sampled path. `points` are the canonical coordinates of the time-independent damped
/// frame, `q2 = e^{λt}q`, `π_q2 = e^{λt}q̇`, `p2 = e^{−λt}p`, `π_p2 = −e^{−λt}ṗ`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EpsTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<OscState>,
    pub points: Vec<EpsPoint>,
    pub energies: Vec<EnergyRecord>,
}

pub fn damped_acceleration(x: f64, v: f64, rate: f64, omega: f64) -> f64 {
    -2.0 * rate * v - omega * omega * x
}

pub fn accel_actual(q: f64, qdot: f64, params: &PhysParams) -> f64 {
    damped_acceleration(q, qdot, params.lambda(), params.omega())
}

pub fn accel_image(p: f64, pdot: f64, params: &PhysParams) -> f64 {
    damped_acceleration(p, pdot, -params.lambda(), params.omega())
}

/// Damped-frame canonical point for a physical state at time `t`.
pub fn frame_point(state: &OscState, t: f64, lambda: f64) -> EpsPoint {
    let up = (lambda * t).exp();
    let down = (-lambda * t).exp();
    EpsPoint::new(up * state.q, down * state.p, up * state.qdot, -down * state.pdot)
}

pub fn energy_record(state: &OscState, t: f64, params: &PhysParams) -> EnergyRecord {
    let (l, w2) = (params.lambda(), params.omega() * params.omega());
    let (q, v, p, u) = (state.q, state.qdot, state.p, state.pdot);
    let h2_actual = 0.5 * (2.0 * l * t).exp() * (v * v + 2.0 * l * q * v + w2 * q * q);
    let h2_image = -0.5 * (-2.0 * l * t).exp() * (u * u - 2.0 * l * p * u + w2 * p * p);
    EnergyRecord {
        e_actual: 0.5 * (v * v + w2 * q * q),
        e_image: 0.5 * (u * u + w2 * p * p),
        h2_actual,
        h2_image,
        h2: h2_actual + h2_image,
    }
}

fn build(times: Vec<f64>, states: Vec<OscState>, params: &PhysParams) -> EpsTrajectory {
    let points = times
        .iter()
        .zip(&states)
        .map(|(t, s)| frame_point(s, *t, params.lambda()))
        .collect();
    let energies = times
        .iter()
        .zip(&states)
        .map(|(t, s)| energy_record(s, *t, params))
        .collect();
    EpsTrajectory {
        times,
        states,
        points,
        energies,
    }
}

/// `(x, ẋ)` of `ẍ + 2rẋ + ω²x = 0` with `Ω² = ω² − r²`.
fn damped_solution(x0: f64, v0: f64, rate: f64, big_omega: f64, t: f64) -> (f64, f64) {
    let (s, c) = (big_omega * t).sin_cos();
    let env = (-rate * t).exp();
    let b = (v0 + rate * x0) / big_omega;
    let x = env * (x0 * c + b * s);
    let v = -rate * x + env * (-x0 * big_omega * s + b * big_omega * c);
    (x, v)
}

pub fn analytic_state(ic: &InitialConditions, params: &PhysParams, t: f64) -> OscState {
    let w = params.reduced_frequency();
    let l = params.lambda();
    let (q, qdot) = damped_solution(ic.q0, ic.qdot0, l, w, t);
    let (p, pdot) = damped_solution(ic.p0, ic.pdot0, -l, w, t);
    OscState { q, qdot, p, pdot }
}

pub fn analytic_trajectory(ic: &InitialConditions, params: &PhysParams, times: &[f64]) -> Result<EpsTrajectory> {
    if params.lambda() >= params.omega() {
        return Err(EpsError::Domain("analytic solution requires lambda < omega".into()));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(EpsError::Domain("sample times must be strictly increasing".into()));
    }
    let states = times.iter().map(|t| analytic_state(ic, params, *t)).collect();
    Ok(build(times.to_vec(), states, params))
}

fn rhs(s: &OscState, params: &PhysParams) -> OscState {
    OscState {
        q: s.qdot,
        qdot: accel_actual(s.q, s.qdot, params),
        p: s.pdot,
        pdot: accel_image(s.p, s.pdot, params),
    }
}

fn axpy(s: &OscState, h: f64, k: &OscState) -> OscState {
    OscState {
        q: s.q + h * k.q,
        qdot: s.qdot + h * k.qdot,
        p: s.p + h * k.p,
        pdot: s.pdot + h * k.pdot,
    }
}

/// Classical fixed-step fourth-order Runge–Kutta; returns `steps + 1` samples.
pub fn integrate_rk4(ic: &InitialConditions, params: &PhysParams, dt: f64, steps: usize) -> Result<EpsTrajectory> {
    if !dt.is_finite() || dt <= 0.0 {
        return Err(EpsError::Domain(format!("dt must be finite and > 0, got {dt}")));
    }
    if steps == 0 {
        return Err(EpsError::Domain("at least one step is required".into()));
    }
    let mut s = OscState {
        q: ic.q0,
        qdot: ic.qdot0,
        p: ic.p0,
        pdot: ic.pdot0,
    };
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    times.push(0.0);
    states.push(s);
    for step in 1..=steps {
        let k1 = rhs(&s, params);
        let k2 = rhs(&axpy(&s, 0.5 * dt, &k1), params);
        let k3 = rhs(&axpy(&s, 0.5 * dt, &k2), params);
        let k4 = rhs(&axpy(&s, dt, &k3), params);
        s = OscState {
            q: s.q + dt / 6.0 * (k1.q + 2.0 * k2.q + 2.0 * k3.q + k4.q),
            qdot: s.qdot + dt / 6.0 * (k1.qdot + 2.0 * k2.qdot + 2.0 * k3.qdot + k4.qdot),
            p: s.p + dt / 6.0 * (k1.p + 2.0 * k2.p + 2.0 * k3.p + k4.p),
            pdot: s.pdot + dt / 6.0 * (k1.pdot + 2.0 * k2.pdot + 2.0 * k3.pdot + k4.pdot),
        };
        let t = step as f64 * dt;
        if !s.is_finite() {
            return Err(EpsError::Step { step, time: t });
        }
        times.push(t);
        states.push(s);
    }
    Ok(build(times, states, params))
}

/// Recomputes the energy ledger of a trajectory.
pub fn energy_ledger(traj: &EpsTrajectory, params: &PhysParams) -> Vec<EnergyRecord> {
    traj.times
        .iter()
        .zip(&traj.states)
        .map(|(t, s)| energy_record(s, *t, params))
        .collect()
}

/// Damped extended Hamiltonian evaluated on the stored canonical points.
pub fn h2_along(traj: &EpsTrajectory, params: &PhysParams) -> Vec<f64> {
    let h = damped_extended_hamiltonian(params);
    traj.points.iter().map(|pt| h.eval(pt, 0.0).re).collect()
}

/// Largest `|H2(t) − H2(0)|` relative to `|H2_actual(0)| + |H2_image(0)|`.
pub fn h2_relative_drift(traj: &EpsTrajectory) -> f64 {
    let e0 = &traj.energies[0];
    let scale = e0.h2_actual.abs() + e0.h2_image.abs();
    if scale == 0.0 {
        return 0.0;
    }
    traj.energies
        .iter()
        .map(|e| (e.h2 - e0.h2).abs())
        .fold(0.0, f64::max)
        / scale
}

pub const CSV_HEADER: &str = "t,q,qdot,p,pdot,E_actual,E_image,H2";

pub fn write_csv<W: Write>(traj: &EpsTrajectory, mut out: W) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for ((t, s), e) in traj.times.iter().zip(&traj.states).zip(&traj.energies) {
        let row = [*t, s.q, s.qdot, s.p, s.pdot, e.e_actual, e.e_image, e.h2].map(sci17);
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn params(l: f64) -> PhysParams {
        PhysParams::new(l, 1.0).unwrap()
    }

    #[test]
    fn accelerations() {
        assert_eq!(accel_actual(1.0, 0.0, &params(0.0)), -1.0);
        assert_abs_diff_eq!(accel_actual(0.0, 1.0, &params(0.1)), -0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(accel_actual(1.0, 1.0, &params(0.1)), -1.2, epsilon = 1e-15);
        assert_eq!(accel_image(1.0, 0.0, &params(0.0)), -1.0);
        assert_abs_diff_eq!(accel_image(0.0, 1.0, &params(0.1)), 0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(accel_image(1.0, -1.0, &params(0.1)), -1.2, epsilon = 1e-15);
    }

    #[test]
    fn image_is_actual_with_negated_rate() {
        let p = params(0.3);
        for (x, v) in [(1.0, 0.0), (0.3, -2.1), (-4.0, 7.5)] {
            assert_eq!(
                accel_image(x, v, &p).to_bits(),
                damped_acceleration(x, v, -0.3, 1.0).to_bits()
            );
        }
    }

    #[test]
    fn analytic_quarter_period_and_envelope() {
        let ic = InitialConditions::mirrored(1.0, 0.0).unwrap();
        let s = analytic_state(&ic, &params(0.0), PI / 2.0);
        assert!(s.q.abs() < 1e-12);
        let p = params(0.1);
        let big = p.reduced_frequency();
        let s = analytic_state(&ic, &p, 2.0 * PI / big);
        assert_abs_diff_eq!(s.q, (-0.2 * PI / big).exp(), epsilon = 1e-14);
    }

    #[test]
    fn analytic_solution_satisfies_equations_of_motion() {
        let p = params(0.2);
        let ic = InitialConditions::new(0.4, -1.0, 0.9, 0.3).unwrap();
        let h = 1e-4;
        for t in [0.3, 1.7, 5.0] {
            let a = analytic_state(&ic, &p, t - h);
            let b = analytic_state(&ic, &p, t);
            let c = analytic_state(&ic, &p, t + h);
            let qdd = (c.q - 2.0 * b.q + a.q) / (h * h);
            let pdd = (c.p - 2.0 * b.p + a.p) / (h * h);
            assert!((qdd - accel_actual(b.q, b.qdot, &p)).abs() < 1e-5);
            assert!((pdd - accel_image(b.p, b.pdot, &p)).abs() < 1e-5);
            assert!(((c.q - a.q) / (2.0 * h) - b.qdot).abs() < 1e-7);
        }
    }

    #[test]
    fn rk4_closed_orbit_without_damping() {
        let ic = InitialConditions::mirrored(1.0, 0.0).unwrap();
        let tr = integrate_rk4(&ic, &params(0.0), 2.0 * PI / 1000.0, 1000).unwrap();
        let last = tr.states.last().unwrap();
        assert!((last.q - 1.0).abs() < 1e-10 && last.qdot.abs() < 1e-10);
    }

    #[test]
    fn undamped_energies_are_constant() {
        let ic = InitialConditions::new(1.0, 0.5, -0.3, 0.2).unwrap();
        let tr = integrate_rk4(&ic, &params(0.0), 2.0 * PI / 1000.0, 3000).unwrap();
        let e0 = tr.energies[0];
        for e in &tr.energies {
            assert!((e.e_actual - e0.e_actual).abs() < 1e-10);
            assert!((e.e_image - e0.e_image).abs() < 1e-10);
        }
    }

    #[test]
    fn h2_is_conserved_and_matches_quadratic_form() {
        let p = params(0.1);
        let period = p.period();
        let ic = InitialConditions::new(1.0, 0.0, 0.5, 0.2).unwrap();
        let tr = integrate_rk4(&ic, &p, period / 1000.0, 10_000).unwrap();
        assert!(h2_relative_drift(&tr) < 1e-8, "{}", h2_relative_drift(&tr));
        for (a, b) in h2_along(&tr, &p).iter().zip(&tr.energies) {
            assert!((a - b.h2).abs() < 1e-12 * (1.0 + b.h2.abs()));
        }
    }

    #[test]
    fn mirrored_data_has_zero_h2_and_constant_energy_product() {
        let p = params(0.1);
        let period = p.period();
        let ic = InitialConditions::mirrored(1.0, 0.3).unwrap();
        let times: Vec<f64> = (0..=5).map(|k| k as f64 * period).collect();
        let tr = analytic_trajectory(&ic, &p, &times).unwrap();
        let prod0 = tr.energies[0].e_actual * tr.energies[0].e_image;
        for e in &tr.energies {
            assert!(e.h2.abs() < 1e-12);
            assert!((e.e_actual * e.e_image / prod0 - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let ic = InitialConditions::mirrored(1.0, 0.0).unwrap();
        assert!(integrate_rk4(&ic, &params(0.1), 0.0, 10).is_err());
        assert!(integrate_rk4(&ic, &params(0.1), 0.1, 0).is_err());
        assert!(analytic_trajectory(&ic, &params(0.1), &[0.0, 0.0]).is_err());
        assert!(InitialConditions::new(f64::NAN, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn runaway_image_reports_step() {
        let ic = InitialConditions::mirrored(1.0, 0.0).unwrap();
        let p = PhysParams::new(0.9, 1.0).unwrap();
        let err = integrate_rk4(&ic, &p, 1.0, 2000).unwrap_err();
        assert!(matches!(err, EpsError::Step { .. }));
    }

    #[test]
    fn csv_has_header_and_rows() {
        let ic = InitialConditions::mirrored(1.0, 0.0).unwrap();
        let tr = integrate_rk4(&ic, &params(0.1), 0.01, 10).unwrap();
        let mut buf = Vec::new();
        write_csv(&tr, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines.len(), 12);
        assert_eq!(lines[1].split(',').count(), 8);
    }
}
