//! Physical parameters, extended-phase-space points and the ω′ convention registry.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{EpsError, Result};
use crate::transforms;

/// Validated constants of one run. Mass is fixed to one.
///
/// Construct through [`validate_params`] or [`PhysParams::new`]; the fields are private so
/// the underdamped invariant `lambda < omega` always holds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PhysParams {
    lambda: f64,
    omega: f64,
    hbar: f64,
    delta: f64,
}

/// Unvalidated parameter record, e.g. straight out of a config file.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ParamsInput {
    pub lambda: Option<f64>,
    pub omega: Option<f64>,
    pub hbar: Option<f64>,
    pub delta: Option<f64>,
}

impl PhysParams {
    /// Damping `lambda` and bare frequency `omega` with `hbar = 1`, `delta = 1`.
    pub fn new(lambda: f64, omega: f64) -> Result<Self> {
        validate_params(&ParamsInput {
            lambda: Some(lambda),
            omega: Some(omega),
            ..Default::default()
        })
    }

    pub fn with_hbar(self, hbar: f64) -> Result<Self> {
        validate_params(&ParamsInput {
            hbar: Some(hbar),
            ..ParamsInput::from(self)
        })
    }

    pub fn with_delta(self, delta: f64) -> Result<Self> {
        validate_params(&ParamsInput {
            delta: Some(delta),
            ..ParamsInput::from(self)
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn mass(&self) -> f64 {
        1.0
    }

    /// Ω = √(ω² − λ²), the oscillation frequency of the damped motion.
    pub fn reduced_frequency(&self) -> f64 {
        ((self.omega - self.lambda) * (self.omega + self.lambda)).sqrt()
    }

    /// One period 2π/Ω of the damped motion.
    pub fn period(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.reduced_frequency()
    }
}

impl From<PhysParams> for ParamsInput {
    fn from(p: PhysParams) -> Self {
        ParamsInput {
            lambda: Some(p.lambda),
            omega: Some(p.omega),
            hbar: Some(p.hbar),
            delta: Some(p.delta),
        }
    }
}

/// Checks a candidate parameter record and fills in `hbar = 1`, `delta = √hbar` when unset.
pub fn validate_params(candidate: &ParamsInput) -> Result<PhysParams> {
    let lambda = candidate
        .lambda
        .ok_or_else(|| EpsError::Domain("lambda is required".into()))?;
    let omega = candidate
        .omega
        .ok_or_else(|| EpsError::Domain("omega is required".into()))?;
    let hbar = candidate.hbar.unwrap_or(1.0);

    for (name, v) in [("lambda", lambda), ("omega", omega), ("hbar", hbar)] {
        if !v.is_finite() {
            return Err(EpsError::Domain(format!("{name} must be finite, got {v}")));
        }
    }
    if lambda < 0.0 {
        return Err(EpsError::Domain(format!("lambda must be >= 0, got {lambda}")));
    }
    if omega <= 0.0 {
        return Err(EpsError::Domain(format!("omega must be > 0, got {omega}")));
    }
    if hbar <= 0.0 {
        return Err(EpsError::Domain(format!("hbar must be > 0, got {hbar}")));
    }
    if lambda >= omega {
        return Err(EpsError::Domain(format!(
            "underdamped regime required: lambda < omega, got lambda = {lambda}, omega = {omega}"
        )));
    }
    let delta = candidate.delta.unwrap_or_else(|| hbar.sqrt());
    if !delta.is_finite() || delta <= 0.0 {
        return Err(EpsError::Domain(format!("delta must be finite and > 0, got {delta}")));
    }
    Ok(PhysParams {
        lambda,
        omega,
        hbar,
        delta,
    })
}

/// A point `(q, p, π_q, π_p)` of extended phase space.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EpsPoint {
    pub q: f64,
    pub p: f64,
    pub pi_q: f64,
    pub pi_p: f64,
}

impl EpsPoint {
    pub fn new(q: f64, p: f64, pi_q: f64, pi_p: f64) -> Self {
        EpsPoint { q, p, pi_q, pi_p }
    }

    /// Coordinates in the order `(q, p, π_q, π_p)`.
    pub fn as_array(&self) -> [f64; 4] {
        [self.q, self.p, self.pi_q, self.pi_p]
    }

    pub fn is_finite(&self) -> bool {
        self.as_array().iter().all(|v| v.is_finite())
    }
}

/// Which value of the complex frequency ω′ to use.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OmegaPrimeConvention {
    /// ω′ = ω + iλ as printed.
    #[serde(rename = "paper")]
    PaperStated,
    /// ω′ read off the harmonic form obtained by pushing the Caldirola–Kanai
    /// Hamiltonian through the unitary scaling.
    #[default]
    Rederived,
}

impl OmegaPrimeConvention {
    pub fn label(&self) -> &'static str {
        match self {
            OmegaPrimeConvention::PaperStated => "paper",
            OmegaPrimeConvention::Rederived => "rederived",
        }
    }
}

/// The complex frequency ω′ under the requested convention.
pub fn omega_prime(params: &PhysParams, conv: OmegaPrimeConvention) -> Result<Complex64> {
    match conv {
        OmegaPrimeConvention::PaperStated => Ok(Complex64::new(params.omega, params.lambda)),
        OmegaPrimeConvention::Rederived => transforms::derive_transformed_frequency(params),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn input(lambda: f64, omega: f64) -> ParamsInput {
        ParamsInput {
            lambda: Some(lambda),
            omega: Some(omega),
            ..Default::default()
        }
    }

    #[test]
    fn zero_damping_baseline_is_valid() {
        let p = validate_params(&ParamsInput {
            delta: Some(1.0),
            ..input(0.0, 1.0)
        })
        .unwrap();
        assert_eq!(p.lambda(), 0.0);
        assert_eq!(p.reduced_frequency(), 1.0);
    }

    #[test]
    fn desk_point_is_valid_with_defaults() {
        let p = validate_params(&input(0.1, 1.0)).unwrap();
        assert_eq!(p.hbar(), 1.0);
        assert_eq!(p.delta(), 1.0);
        let p = validate_params(&ParamsInput {
            hbar: Some(4.0),
            ..input(0.1, 1.0)
        })
        .unwrap();
        assert_eq!(p.delta(), 2.0);
    }

    #[test]
    fn critical_damping_is_rejected() {
        let err = validate_params(&input(1.0, 1.0)).unwrap_err();
        match err {
            EpsError::Domain(msg) => assert!(msg.contains("lambda < omega"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_finite_and_non_positive_fields_are_rejected() {
        assert!(validate_params(&input(f64::NAN, 1.0)).is_err());
        assert!(validate_params(&input(0.1, f64::INFINITY)).is_err());
        assert!(validate_params(&input(-0.1, 1.0)).is_err());
        assert!(validate_params(&input(0.0, 0.0)).is_err());
        assert!(validate_params(&ParamsInput {
            hbar: Some(0.0),
            ..input(0.1, 1.0)
        })
        .is_err());
        assert!(validate_params(&ParamsInput {
            delta: Some(-1.0),
            ..input(0.1, 1.0)
        })
        .is_err());
        assert!(validate_params(&ParamsInput::default()).is_err());
    }

    #[test]
    fn paper_stated_omega_prime() {
        let p = PhysParams::new(0.1, 1.0).unwrap();
        let w = omega_prime(&p, OmegaPrimeConvention::PaperStated).unwrap();
        assert_eq!(w, Complex64::new(1.0, 0.1));
        let p = PhysParams::new(0.0, 1.0).unwrap();
        let w = omega_prime(&p, OmegaPrimeConvention::PaperStated).unwrap();
        assert_eq!(w, Complex64::new(1.0, 0.0));
    }

    #[test]
    fn conventions_agree_exactly_without_damping() {
        for k in 0..100 {
            let omega = 0.1 + 9.9 * (k as f64 + 0.5) / 100.0;
            let p = PhysParams::new(0.0, omega).unwrap();
            let a = omega_prime(&p, OmegaPrimeConvention::PaperStated).unwrap();
            let b = omega_prime(&p, OmegaPrimeConvention::Rederived).unwrap();
            assert_eq!(a, b, "omega = {omega}");
        }
    }

    proptest! {
        #[test]
        fn validation_is_idempotent(omega in 0.01f64..50.0, ratio in 0.0f64..0.99,
                                    hbar in proptest::option::of(0.01f64..10.0),
                                    delta in proptest::option::of(0.01f64..10.0)) {
            let first = validate_params(&ParamsInput {
                lambda: Some(ratio * omega), omega: Some(omega), hbar, delta,
            }).unwrap();
            let second = validate_params(&ParamsInput::from(first)).unwrap();
            prop_assert_eq!(first, second);
        }
    }
}
