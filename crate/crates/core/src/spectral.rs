//! Hermite-function eigenbasis with complex scale, product-form eigenfunctions of the
//! extended dynamical equation, their eigenvalues, and a finite-difference operator oracle.

use std::num::NonZeroUsize;

use gauss_quad::GaussHermite;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{EpsError, Result};
use crate::grid::{tail_is_negligible, Axis, GridSpec, GridState, Stencil};
use crate::params::{omega_prime, OmegaPrimeConvention, PhysParams};
use crate::transforms::{
    caldirola_kanai_hamiltonian, from_eps_frame, harmonic_form, to_eps_frame, Monomial, Oscillator,
    QuadraticHamiltonian, ScalingAction, Var,
};

/// Basis functions `ψ_0 … ψ_{n_max}` with scale α (`α = √(ω′/ħ)`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HermiteBasisSpec {
    pub n_max: usize,
    pub scale: Complex64,
    pub hbar: f64,
}

impl HermiteBasisSpec {
    pub fn new(n_max: usize, scale: Complex64, hbar: f64) -> Result<Self> {
        if !(scale.re.is_finite() && scale.im.is_finite()) || (scale * scale).re <= 0.0 || scale.re <= 0.0 {
            return Err(EpsError::Domain(format!(
                "basis scale must have Re(scale) > 0 and Re(scale²) > 0, got {scale}"
            )));
        }
        if !hbar.is_finite() || hbar <= 0.0 {
            return Err(EpsError::Domain(format!("hbar must be > 0, got {hbar}")));
        }
        Ok(HermiteBasisSpec { n_max, scale, hbar })
    }

    /// Scale `√(ω′/ħ)` (principal branch) for the given parameters and convention.
    pub fn for_params(n_max: usize, params: &PhysParams, conv: OmegaPrimeConvention) -> Result<Self> {
        let w = omega_prime(params, conv)?;
        Self::new(n_max, (w / params.hbar()).sqrt(), params.hbar())
    }
}

/// `(ψ_k(x) without its Gaussian factor)` for `k = 0..=n` by the three-term recurrence.
fn hermite_polys(n: usize, x: f64, alpha: Complex64) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(alpha.sqrt() * std::f64::consts::PI.powf(-0.25));
    if n >= 1 {
        out.push((2.0f64).sqrt() * alpha * x * out[0]);
    }
    for k in 1..n {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * alpha * x * out[k] - (kf / (kf + 1.0)).sqrt() * out[k - 1];
        out.push(next);
    }
    out
}

/// Precomputed basis: the recurrence values rescaled so that `∫|ψ_n|² dx = 1` exactly.
#[derive(Clone, Debug)]
pub struct HermiteBasis {
    pub spec: HermiteBasisSpec,
    norms: Vec<f64>,
}

impl HermiteBasis {
    pub fn new(spec: HermiteBasisSpec) -> Result<Self> {
        let spec = HermiteBasisSpec::new(spec.n_max, spec.scale, spec.hbar)?;
        let alpha = spec.scale;
        let norms = if alpha.im == 0.0 {
            vec![1.0; spec.n_max + 1]
        } else {
            // |poly|²·e^{−r x²} with r = Re α² is a polynomial against a Gaussian weight;
            // n + 1 Gauss–Hermite nodes integrate it exactly.
            let r = (alpha * alpha).re;
            (0..=spec.n_max)
                .map(|n| {
                    let gh = GaussHermite::new(NonZeroUsize::new(n + 1).expect("n + 1 > 0"));
                    let integral = gh.integrate(|y| hermite_polys(n, y / r.sqrt(), alpha)[n].norm_sqr()) / r.sqrt();
                    1.0 / integral.sqrt()
                })
                .collect()
        };
        Ok(HermiteBasis { spec, norms })
    }

    pub fn psi(&self, n: usize, x: f64) -> Result<Complex64> {
        if n > self.spec.n_max {
            return Err(EpsError::Domain(format!("index {n} exceeds n_max = {}", self.spec.n_max)));
        }
        let alpha = self.spec.scale;
        let gauss = (-(alpha * alpha) * x * x / 2.0).exp();
        Ok(hermite_polys(n, x, alpha)[n] * gauss * self.norms[n])
    }

    pub fn sample(&self, n: usize, grid: &GridSpec) -> Result<Vec<Complex64>> {
        grid.nodes().into_iter().map(|x| self.psi(n, x)).collect()
    }
}

/// Normalized oscillator eigenfunction `ψ_n(x)` with complex scale.
pub fn hermite_psi(n: i64, x: f64, spec: &HermiteBasisSpec) -> Result<Complex64> {
    if n < 0 {
        return Err(EpsError::Domain(format!("basis index must be >= 0, got {n}")));
    }
    let n = n as usize;
    let single = HermiteBasisSpec::new(n.max(spec.n_max), spec.scale, spec.hbar)?;
    HermiteBasis::new(single)?.psi(n, x)
}

/// How the momentum-space factor φ_m relates to the configuration-space scale α.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum ImageScale {
    /// φ_m carries the conjugate scale, so the sampled factor φ_m* equals `ψ_m(p; α)`.
    #[default]
    Conjugate,
    /// φ_m carries α itself; the sampled factor is `conj(ψ_m(p; α))`.
    Same,
}

fn image_factor(basis: &HermiteBasis, m: usize, x: f64, image: ImageScale) -> Result<Complex64> {
    let v = basis.psi(m, x)?;
    Ok(match image {
        ImageScale::Conjugate => v,
        ImageScale::Same => v.conj(),
    })
}

fn check_tails(grid: &GridSpec, alpha: Complex64, factors: &[&[Complex64]]) -> Result<()> {
    if grid.extent < 6.0 / alpha.norm() {
        return Err(EpsError::Grid(format!(
            "extent {} is below 6/|scale| = {}",
            grid.extent,
            6.0 / alpha.norm()
        )));
    }
    for f in factors {
        if !tail_is_negligible(f, 4, 1e-9) {
            return Err(EpsError::Grid("basis function is not negligible at the grid edge".into()));
        }
    }
    Ok(())
}

/// `χ_mn(q, p) = e^{−iqp/ħ}·ψ_n(q)·φ_m*(p)` with the rederived ω′.
pub fn chi_eigenfunction(n: usize, m: usize, gs: &GridSpec, params: &PhysParams) -> Result<GridState> {
    chi_eigenfunction_with(n, m, gs, params, OmegaPrimeConvention::Rederived, ImageScale::Conjugate)
}

pub fn chi_eigenfunction_with(
    n: usize,
    m: usize,
    gs: &GridSpec,
    params: &PhysParams,
    conv: OmegaPrimeConvention,
    image: ImageScale,
) -> Result<GridState> {
    gs.check()?;
    let basis = HermiteBasis::new(HermiteBasisSpec::for_params(n.max(m), params, conv)?)?;
    let u = basis.sample(n, gs)?;
    let v: Vec<Complex64> = gs
        .nodes()
        .into_iter()
        .map(|x| image_factor(&basis, m, x, image))
        .collect::<Result<_>>()?;
    check_tails(gs, basis.spec.scale, &[&u, &v])?;
    Ok(GridState::from_product(*gs, 0.0, Some(params.hbar()), &u, &v))
}

/// `ℰ_mn = (n − m)·ħ·ω′`.
pub fn eigenvalue(n: i64, m: i64, params: &PhysParams, conv: OmegaPrimeConvention) -> Result<Complex64> {
    Ok(omega_prime(params, conv)? * ((n - m) as f64 * params.hbar()))
}

/// The extended-frame operator whose eigenfunctions are the `χ_mn`: the harmonic form
/// with frequency `w`, conjugated by the cross phase.
pub fn eps_harmonic_hamiltonian(w: Complex64) -> Result<QuadraticHamiltonian> {
    to_eps_frame(&harmonic_form(w))
}

/// Applies the extended Hamiltonian `h` (Weyl-ordered, `π = −iħ∂`) with the default stencil.
pub fn apply_extended_hamiltonian(
    h: &QuadraticHamiltonian,
    state: &GridState,
    t: f64,
    params: &PhysParams,
) -> Result<GridState> {
    apply_extended_hamiltonian_with(h, state, t, params.hbar(), Stencil::default())
}

/// As [`apply_extended_hamiltonian`] with an explicit stencil. The result is zero on the
/// boundary band of width `stencil.half_width()`.
pub fn apply_extended_hamiltonian_with(
    h: &QuadraticHamiltonian,
    state: &GridState,
    t: f64,
    hbar: f64,
    stencil: Stencil,
) -> Result<GridState> {
    state.grid.check()?;
    // On e^{−iqp/ħ}·g the operator acts as its cross-phase conjugate on g.
    let h_eff = match state.cross_phase {
        Some(_) => from_eps_frame(h)?,
        None => h.clone(),
    };
    let coeff = |a: Var, b: Var| h_eff.coeff(Monomial::new(a, b)).eval(t);
    let c_qq = coeff(Var::Q, Var::Q);
    let c_pp = coeff(Var::P, Var::P);
    let c_qp = coeff(Var::Q, Var::P);
    let c_aa = coeff(Var::PiQ, Var::PiQ);
    let c_bb = coeff(Var::PiP, Var::PiP);
    let c_ab = coeff(Var::PiQ, Var::PiP);
    let c_qa = coeff(Var::Q, Var::PiQ);
    let c_pb = coeff(Var::P, Var::PiP);
    let c_qb = coeff(Var::Q, Var::PiP);
    let c_pa = coeff(Var::P, Var::PiQ);

    let zero = Complex64::new(0.0, 0.0);
    let need = |cs: &[Complex64]| cs.iter().any(|c| *c != zero);
    let dq = need(&[c_qa, c_pa, c_ab]).then(|| state.derivative(Axis::Q, stencil, 1));
    let dp = need(&[c_pb, c_qb]).then(|| state.derivative(Axis::P, stencil, 1));
    let dqq = need(&[c_aa]).then(|| state.derivative(Axis::Q, stencil, 2));
    let dpp = need(&[c_bb]).then(|| state.derivative(Axis::P, stencil, 2));
    let dqp = match (&dq, need(&[c_ab])) {
        (Some(d), true) => Some(d.derivative(Axis::P, stencil, 1)),
        _ => None,
    };

    let n = state.n();
    let xs = state.grid.nodes();
    let mi = Complex64::new(0.0, -hbar);
    let get = |o: &Option<GridState>, k: usize| o.as_ref().map_or(zero, |s| s.data[k]);
    let mut out = GridState::zeros(state.grid, state.time, state.cross_phase);
    out.data.par_iter_mut().enumerate().for_each(|(k, slot)| {
        let (q, p) = (xs[k / n], xs[k % n]);
        let g = state.data[k];
        let gq = get(&dq, k);
        let gp = get(&dp, k);
        let mut acc = (c_qq * q * q + c_pp * p * p + c_qp * q * p) * g;
        acc -= (c_aa * get(&dqq, k) + c_bb * get(&dpp, k) + c_ab * get(&dqp, k)) * hbar * hbar;
        // Weyl ordering: qπ_q → qπ_q − iħ/2.
        acc += c_qa * (mi * q * gq + mi * 0.5 * g);
        acc += c_pb * (mi * p * gp + mi * 0.5 * g);
        acc += c_qb * mi * q * gp;
        acc += c_pa * mi * p * gq;
        *slot = acc;
    });
    out.zero_band(stencil.half_width());
    Ok(out)
}

/// `‖ℋχ − ℰχ‖/‖χ‖` over the interior of the grid.
pub fn eigen_residual(
    h: &QuadraticHamiltonian,
    state: &GridState,
    energy: Complex64,
    t: f64,
    hbar: f64,
    stencil: Stencil,
) -> Result<f64> {
    let hx = apply_extended_hamiltonian_with(h, state, t, hbar, stencil)?;
    let diff = hx.lincomb(Complex64::new(1.0, 0.0), state, -energy)?;
    let band = stencil.half_width();
    Ok((diff.interior_norm_sq(band) / state.interior_norm_sq(band)).sqrt())
}

/// Eigenfunction of the damped dynamical equation at time `t`:
/// the unitary scaling applied to both factors of `χ_mn`, times `e^{−iℰt/ħ}`.
pub fn chi_prime(n: usize, m: usize, gs: &GridSpec, params: &PhysParams, t: f64) -> Result<GridState> {
    chi_prime_with(n, m, gs, params, t, OmegaPrimeConvention::Rederived, ImageScale::Conjugate)
}

pub fn chi_prime_with(
    n: usize,
    m: usize,
    gs: &GridSpec,
    params: &PhysParams,
    t: f64,
    conv: OmegaPrimeConvention,
    image: ImageScale,
) -> Result<GridState> {
    gs.check()?;
    let basis = HermiteBasis::new(HermiteBasisSpec::for_params(n.max(m), params, conv)?)?;
    let actual = ScalingAction::new(Oscillator::Actual, params, t);
    let image_action = ScalingAction::new(Oscillator::Image, params, t);
    let energy = eigenvalue(n as i64, m as i64, params, conv)?;
    let time_phase = (-Complex64::i() * energy * t / params.hbar()).exp();
    let nodes = gs.nodes();
    let u: Vec<Complex64> = nodes
        .iter()
        .map(|x| actual.apply_fn(|y| basis.psi(n, y).expect("index checked"), *x) * time_phase)
        .collect();
    let v: Vec<Complex64> = nodes
        .iter()
        .map(|x| image_action.apply_fn(|y| image_factor(&basis, m, y, image).expect("index checked"), *x))
        .collect();
    check_tails(gs, basis.spec.scale, &[&u, &v])?;
    Ok(GridState::from_product(*gs, t, Some(params.hbar()), &u, &v))
}

/// `‖iħ∂_tχ′ − ℋ₃(t)χ′‖/‖χ′‖` with a centered time difference of half-width `dt`,
/// where ℋ₃ is the Caldirola–Kanai pair in the extended frame.
pub fn dynamical_residual(
    n: usize,
    m: usize,
    gs: &GridSpec,
    params: &PhysParams,
    t: f64,
    dt: f64,
    conv: OmegaPrimeConvention,
    image: ImageScale,
) -> Result<f64> {
    let h = to_eps_frame(&caldirola_kanai_hamiltonian(params))?;
    let now = chi_prime_with(n, m, gs, params, t, conv, image)?;
    let ahead = chi_prime_with(n, m, gs, params, t + dt, conv, image)?;
    let behind = chi_prime_with(n, m, gs, params, t - dt, conv, image)?;
    let coef = Complex64::new(0.0, params.hbar() / (2.0 * dt));
    let lhs = ahead.lincomb(coef, &behind, -coef)?;
    let rhs = apply_extended_hamiltonian_with(&h, &now, t, params.hbar(), Stencil::default())?;
    let diff = lhs.lincomb(Complex64::new(1.0, 0.0), &rhs, Complex64::new(-1.0, 0.0))?;
    let band = Stencil::default().half_width();
    let mut diff = diff;
    diff.zero_band(band);
    Ok((diff.interior_norm_sq(band) / now.interior_norm_sq(band)).sqrt())
}

/// One row of the eigenvalue table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EigenvalueEntry {
    pub n: usize,
    pub m: usize,
    pub re: f64,
    pub im: f64,
}

pub fn eigenvalue_table(n_max: usize, params: &PhysParams, conv: OmegaPrimeConvention) -> Result<Vec<EigenvalueEntry>> {
    let mut out = Vec::with_capacity((n_max + 1) * (n_max + 1));
    for n in 0..=n_max {
        for m in 0..=n_max {
            let e = eigenvalue(n as i64, m as i64, params, conv)?;
            out.push(EigenvalueEntry { n, m, re: e.re, im: e.im });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::simpson;

    fn real_spec(n_max: usize) -> HermiteBasisSpec {
        HermiteBasisSpec::new(n_max, Complex64::new(1.0, 0.0), 1.0).unwrap()
    }

    #[test]
    fn ground_state_peak() {
        let v = hermite_psi(0, 0.0, &real_spec(0)).unwrap();
        assert!((v.re - std::f64::consts::PI.powf(-0.25)).abs() < 1e-15);
        assert_eq!(v.im, 0.0);
        assert_eq!(hermite_psi(1, 0.0, &real_spec(1)).unwrap().norm(), 0.0);
        assert!(matches!(hermite_psi(-1, 0.0, &real_spec(1)), Err(EpsError::Domain(_))));
    }

    #[test]
    fn matches_explicit_hermite_polynomials() {
        // H_3(y) = 8y³ − 12y, normalization (2³·3!·√π)^{−1/2}.
        let spec = HermiteBasisSpec::new(3, Complex64::new(1.3, 0.0), 1.0).unwrap();
        let a: f64 = 1.3;
        for x in [-1.1, 0.2, 0.9] {
            let y = a * x;
            let expected = (a / std::f64::consts::PI.sqrt()).sqrt() / (48.0f64).sqrt()
                * (8.0 * y.powi(3) - 12.0 * y)
                * (-y * y / 2.0).exp();
            let got = hermite_psi(3, x, &spec).unwrap();
            assert!((got.re - expected).abs() < 1e-14, "{x}");
        }
    }

    #[test]
    fn complex_scale_functions_have_unit_norm() {
        let g = GridSpec::new(10.0, 800).unwrap();
        let spec = HermiteBasisSpec::new(5, Complex64::new(1.0, 0.1), 1.0).unwrap();
        let basis = HermiteBasis::new(spec).unwrap();
        for n in 0..=5 {
            let dens: Vec<Complex64> = basis.sample(n, &g).unwrap().iter().map(|v| Complex64::new(v.norm_sqr(), 0.0)).collect();
            assert!((simpson(&g, &dens).re - 1.0).abs() < 1e-9, "n = {n}");
        }
    }

    #[test]
    fn real_scale_basis_is_orthonormal() {
        let g = GridSpec::new(10.0, 512).unwrap();
        let basis = HermiteBasis::new(HermiteBasisSpec::new(5, Complex64::new(0.8, 0.0), 1.0).unwrap()).unwrap();
        let s: Vec<Vec<Complex64>> = (0..=5).map(|n| basis.sample(n, &g).unwrap()).collect();
        for a in 0..=5 {
            for b in 0..=5 {
                let prod: Vec<Complex64> = s[a].iter().zip(&s[b]).map(|(x, y)| x.conj() * y).collect();
                let expected = if a == b { 1.0 } else { 0.0 };
                assert!((simpson(&g, &prod) - expected).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn invalid_scale_is_rejected() {
        assert!(HermiteBasisSpec::new(2, Complex64::new(1.0, 1.5), 1.0).is_err());
        assert!(HermiteBasisSpec::new(2, Complex64::new(-1.0, 0.0), 1.0).is_err());
    }

    #[test]
    fn eigenvalues() {
        let p = PhysParams::new(0.1, 1.0).unwrap();
        let paper = OmegaPrimeConvention::PaperStated;
        assert_eq!(eigenvalue(2, 2, &p, paper).unwrap(), Complex64::new(0.0, 0.0));
        assert_eq!(eigenvalue(1, 0, &p, paper).unwrap(), Complex64::new(1.0, 0.1));
        let q = PhysParams::new(0.0, 1.0).unwrap().with_hbar(2.0).unwrap();
        assert_eq!(eigenvalue(3, 1, &q, OmegaPrimeConvention::Rederived).unwrap(), Complex64::new(4.0, 0.0));
        for (n, m) in [(0, 3), (5, 2), (1, 1)] {
            for conv in [paper, OmegaPrimeConvention::Rederived] {
                assert_eq!(eigenvalue(n, m, &p, conv).unwrap(), -eigenvalue(m, n, &p, conv).unwrap());
            }
        }
        assert_eq!(eigenvalue_table(2, &p, paper).unwrap().len(), 9);
    }

    #[test]
    fn zero_state_and_linearity() {
        let g = GridSpec::new(8.0, 64).unwrap();
        let p = PhysParams::new(0.1, 1.0).unwrap();
        let h = to_eps_frame(&caldirola_kanai_hamiltonian(&p)).unwrap();
        let z = GridState::zeros(g, 0.0, Some(1.0));
        let hz = apply_extended_hamiltonian(&h, &z, 0.3, &p).unwrap();
        assert!(hz.data.iter().all(|v| v.norm() == 0.0));
        let a = chi_eigenfunction(1, 0, &g, &p).unwrap();
        let b = chi_eigenfunction(0, 2, &g, &p).unwrap();
        let (ca, cb) = (Complex64::new(0.3, -1.0), Complex64::new(2.0, 0.5));
        let lhs = apply_extended_hamiltonian(&h, &a.lincomb(ca, &b, cb).unwrap(), 0.3, &p).unwrap();
        let rhs = apply_extended_hamiltonian(&h, &a, 0.3, &p)
            .unwrap()
            .lincomb(ca, &apply_extended_hamiltonian(&h, &b, 0.3, &p).unwrap(), cb)
            .unwrap();
        let err = lhs.data.iter().zip(&rhs.data).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        assert!(err < 1e-12);
    }

    #[test]
    fn ground_state_is_rotationally_symmetric() {
        let g = GridSpec::new(8.0, 64).unwrap();
        let p = PhysParams::new(0.0, 1.0).unwrap();
        let chi = chi_eigenfunction(0, 0, &g, &p).unwrap();
        let n = g.len();
        for i in 0..n {
            for j in 0..n {
                let r2 = g.x(i).powi(2) + g.x(j).powi(2);
                let expected = (-r2 / 2.0).exp() / std::f64::consts::PI.sqrt();
                assert!((chi.value(i, j).norm() - expected).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn swap_symmetry() {
        let g = GridSpec::new(8.0, 64).unwrap();
        let p = PhysParams::new(0.0, 1.0).unwrap();
        let a = chi_eigenfunction(2, 1, &g, &p).unwrap();
        let b = chi_eigenfunction(1, 2, &g, &p).unwrap();
        for i in 0..g.len() {
            for j in 0..g.len() {
                assert!((a.value(i, j) - b.value(j, i)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn marginal_is_proportional_to_density() {
        // ∫χ_nn dp = √(2πħ)·(−i)^n·ψ_n(q)² at unit frequency.
        let g = GridSpec::new(10.0, 400).unwrap();
        let p = PhysParams::new(0.0, 1.0).unwrap();
        let basis = HermiteBasis::new(HermiteBasisSpec::for_params(2, &p, OmegaPrimeConvention::Rederived).unwrap()).unwrap();
        for n in 0..=2 {
            let chi = chi_eigenfunction(n, n, &g, &p).unwrap().materialize();
            let constant = (2.0 * std::f64::consts::PI).sqrt() * Complex64::new(0.0, -1.0).powu(n as u32);
            for i in (0..g.len()).step_by(7) {
                let marginal = simpson(&g, chi.row(i));
                let psi = basis.psi(n, g.x(i)).unwrap();
                assert!((marginal / constant - psi.norm_sqr()).norm() < 1e-6, "n = {n}");
            }
        }
    }

    #[test]
    fn eigenpair_residual_at_zero_damping() {
        let g = GridSpec::new(8.0, 256).unwrap();
        let p = PhysParams::new(0.0, 1.0).unwrap();
        let w = omega_prime(&p, OmegaPrimeConvention::Rederived).unwrap();
        let h = eps_harmonic_hamiltonian(w).unwrap();
        for (n, m) in [(0, 0), (3, 1), (2, 3)] {
            let chi = chi_eigenfunction(n, m, &g, &p).unwrap();
            let e = eigenvalue(n as i64, m as i64, &p, OmegaPrimeConvention::Rederived).unwrap();
            let r = eigen_residual(&h, &chi, e, 0.0, 1.0, Stencil::Eighth).unwrap();
            assert!(r < 1e-6, "({n},{m}): {r}");
        }
    }

    #[test]
    fn chi_prime_limits() {
        let g = GridSpec::new(8.0, 128).unwrap();
        let p = PhysParams::new(0.0, 1.0).unwrap();
        assert_eq!(chi_prime(2, 1, &g, &p, 0.0).unwrap(), chi_eigenfunction(2, 1, &g, &p).unwrap());
        let p = PhysParams::new(0.3, 1.0).unwrap();
        let a = chi_prime(2, 1, &g, &p, 0.0).unwrap();
        let b = chi_eigenfunction(2, 1, &g, &p).unwrap();
        for (x, y) in a.data.iter().zip(&b.data) {
            assert!((x.norm() - y.norm()).abs() < 1e-12);
        }
    }

    #[test]
    fn chi_prime_solves_damped_equation() {
        let g = GridSpec::new(8.0, 256).unwrap();
        let p = PhysParams::new(0.05, 1.0).unwrap();
        for (n, m) in [(0, 0), (1, 0), (2, 3)] {
            let r = dynamical_residual(n, m, &g, &p, 0.5, 1e-4, OmegaPrimeConvention::Rederived, ImageScale::Conjugate).unwrap();
            assert!(r < 1e-4, "({n},{m}): {r}");
        }
    }

    #[test]
    fn image_scale_choice_under_complex_frequency() {
        let g = GridSpec::new(8.0, 256).unwrap();
        let p = PhysParams::new(0.1, 1.0).unwrap();
        let conv = OmegaPrimeConvention::PaperStated;
        let w = omega_prime(&p, conv).unwrap();
        let h = eps_harmonic_hamiltonian(w).unwrap();
        let e = eigenvalue(1, 2, &p, conv).unwrap();
        let res = |image| {
            let chi = chi_eigenfunction_with(1, 2, &g, &p, conv, image).unwrap();
            eigen_residual(&h, &chi, e, 0.0, 1.0, Stencil::Eighth).unwrap()
        };
        let conj = res(ImageScale::Conjugate);
        let same = res(ImageScale::Same);
        assert!(conj < 1e-6, "{conj}");
        assert!(same > 1e-2, "{same}");
    }
}
