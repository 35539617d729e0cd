//! The invariant suite behind `epsosc verify`.

use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64;
use serde::Serialize;

use crate::classical::{
    accel_image, analytic_state, analytic_trajectory, damped_acceleration, h2_relative_drift, integrate_rk4,
    InitialConditions,
};
use crate::error::Result;
use crate::expsum::ExpSum;
use crate::grid::{simpson, GridSpec, Stencil};
use crate::params::{omega_prime, validate_params, OmegaPrimeConvention, ParamsInput, PhysParams};
use crate::propagator::{
    extended_propagator, initial_gaussian, l2_distance_up_to_phase, oracle_records, quadrature_evolve,
    semigroup_defect, uncertainties_closed_form, uncertainty_series, PropagatorParams,
};
use crate::spectral::{
    chi_eigenfunction, dynamical_residual, eigen_residual, eigenvalue, eps_harmonic_hamiltonian, HermiteBasis,
    HermiteBasisSpec, ImageScale,
};
use crate::transforms::{
    apply_ct, caldirola_kanai_hamiltonian, chain_hamiltonians, composed_chain, damped_extended_hamiltonian,
    derive_transformed_frequency, t4_unitary_scaling, transformation_chain, undamped_extended_hamiltonian,
    Monomial, Oscillator, QuadraticHamiltonian, ScalingAction,
};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct VerifyOptions {
    pub quick: bool,
    /// Adds this amount to one entry of every chain map before the symplectic check.
    pub perturb_symplectic: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OmegaPrimeRow {
    pub lambda: f64,
    pub omega: f64,
    pub paper_re: f64,
    pub paper_im: f64,
    pub rederived_re: f64,
    pub rederived_im: f64,
    pub identical: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
    pub omega_prime: Vec<OmegaPrimeRow>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
        for c in &self.checks {
            out.push_str(&format!(
                "{} {:width$}  {:>7.3}s  {}\n",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.seconds,
                c.detail
            ));
        }
        out.push_str("\nomega' conventions (paper = omega + i*lambda, rederived = chain result)\n");
        out.push_str("  lambda    omega   paper                      rederived                  identical\n");
        for r in &self.omega_prime {
            out.push_str(&format!(
                "  {:<8} {:<7} {:>11.8}{:+.8}i   {:>11.8}{:+.8}i   {}\n",
                r.lambda, r.omega, r.paper_re, r.paper_im, r.rederived_re, r.rederived_im, r.identical
            ));
        }
        let passed = self.checks.iter().filter(|c| c.passed).count();
        out.push_str(&format!("\n{passed}/{} checks passed\n", self.checks.len()));
        out
    }
}

/// `(passed, detail)`; errors count as failures.
type Outcome = Result<(bool, String)>;

fn run(name: &str, checks: &mut Vec<CheckResult>, f: impl FnOnce() -> Outcome) {
    let start = Instant::now();
    let (passed, detail) = match f() {
        Ok(v) => v,
        Err(e) => (false, format!("error: {e}")),
    };
    checks.push(CheckResult {
        name: name.to_string(),
        passed,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    });
}

fn desk() -> PhysParams {
    PhysParams::new(0.1, 1.0).expect("desk parameters are valid")
}

pub const OMEGA_PRIME_POINTS: [(f64, f64); 5] = [(0.0, 1.0), (0.05, 1.0), (0.1, 1.0), (0.3, 1.0), (0.5, 2.0)];

pub fn omega_prime_table() -> Result<Vec<OmegaPrimeRow>> {
    OMEGA_PRIME_POINTS
        .iter()
        .map(|&(l, w)| {
            let p = PhysParams::new(l, w)?;
            let a = omega_prime(&p, OmegaPrimeConvention::PaperStated)?;
            let b = omega_prime(&p, OmegaPrimeConvention::Rederived)?;
            Ok(OmegaPrimeRow {
                lambda: l,
                omega: w,
                paper_re: a.re,
                paper_im: a.im,
                rederived_re: b.re,
                rederived_im: b.im,
                identical: a == b,
            })
        })
        .collect()
}

pub fn run_verification(opts: &VerifyOptions) -> VerifyReport {
    let mut checks = Vec::new();
    let quick = opts.quick;

    run("params: conventions agree at lambda = 0", &mut checks, || {
        let mut worst = 0.0f64;
        for k in 0..100 {
            let p = PhysParams::new(0.0, 0.1 + 9.9 * (k as f64 + 0.5) / 100.0)?;
            let a = omega_prime(&p, OmegaPrimeConvention::PaperStated)?;
            let b = omega_prime(&p, OmegaPrimeConvention::Rederived)?;
            worst = worst.max((a - b).norm());
        }
        Ok((worst == 0.0, format!("max |paper - rederived| = {worst:e} over 100 frequencies")))
    });

    run("params: validation is idempotent", &mut checks, || {
        let mut ok = true;
        for (l, w, h) in [(0.0, 1.0, 1.0), (0.1, 1.0, 2.0), (0.49, 0.5, 0.3)] {
            let p = validate_params(&ParamsInput {
                lambda: Some(l),
                omega: Some(w),
                hbar: Some(h),
                delta: None,
            })?;
            ok &= validate_params(&ParamsInput::from(p))? == p;
        }
        Ok((ok, "3 records".into()))
    });

    run("chain: symplectic defect < 1e-10", &mut checks, || {
        let p = desk();
        let mut chain = transformation_chain(&p);
        chain.push(t4_unitary_scaling(&p));
        if let Some(eps) = opts.perturb_symplectic {
            chain = chain.iter().map(|t| t.perturbed(eps)).collect();
        }
        let mut worst = 0.0f64;
        let mut worst_name = String::new();
        for t in &chain {
            for time in [0.0, 0.5, 1.0, 2.0] {
                let d = t.symplectic_defect(time);
                if d > worst {
                    worst = d;
                    worst_name = t.name.clone();
                }
            }
        }
        Ok((worst < 1e-10, format!("max defect {worst:e} ({worst_name})")))
    });

    run("chain: H3 is the four-term Caldirola-Kanai pair", &mut checks, || {
        let p = desk();
        let h3 = apply_ct(&undamped_extended_hamiltonian(&p), &composed_chain(&p)?)?;
        let l = p.lambda();
        let rates_ok = [
            (crate::transforms::piq2(), -2.0 * l),
            (crate::transforms::q2(), 2.0 * l),
            (crate::transforms::pip2(), 2.0 * l),
            (crate::transforms::p2(), -2.0 * l),
        ]
        .iter()
        .all(|(m, r)| {
            let c = h3.coeff(*m);
            c.terms().len() == 1 && (c.terms()[0].rate - r).abs() < 1e-12
        });
        let diff = h3.max_difference(&caldirola_kanai_hamiltonian(&p));
        Ok((
            h3.len() == 4 && rates_ok && diff < 1e-12,
            format!("{} monomials, rates ok = {rates_ok}, max coefficient error {diff:e}", h3.len()),
        ))
    });

    run("chain: stepwise equals composed", &mut checks, || {
        let p = desk();
        let h = undamped_extended_hamiltonian(&p);
        let chain = transformation_chain(&p);
        let stepwise = apply_ct(&apply_ct(&h, &chain[0])?, &chain[1])?;
        let once = apply_ct(&h, &chain[0].then(&chain[1])?)?;
        let all = chain_hamiltonians(&p)?[3].1.max_difference(&apply_ct(&h, &composed_chain(&p)?)?);
        let d = stepwise.max_difference(&once).max(all);
        Ok((d < 1e-12, format!("max difference {d:e}")))
    });

    run("chain: lambda = 0 limit is time independent", &mut checks, || {
        let p = PhysParams::new(0.0, 1.0)?;
        let comp = composed_chain(&p)?;
        let h = undamped_extended_hamiltonian(&p);
        let same = apply_ct(&h, &comp)? == apply_ct(&h, &transformation_chain(&p)[0])?;
        Ok((comp.is_time_independent() && same, format!("time independent = {}, equals T1 output = {same}", comp.is_time_independent())))
    });

    run("chain: apply_ct is additive", &mut checks, || {
        let p = desk();
        let h1 = damped_extended_hamiltonian(&p);
        let h2 = QuadraticHamiltonian::from_terms(
            Monomial::all()
                .into_iter()
                .enumerate()
                .map(|(k, m)| (m, ExpSum::real(0.1 * k as f64 - 0.4, 0.05 * k as f64))),
        );
        let mut worst = 0.0f64;
        for t in transformation_chain(&p).iter().chain([&t4_unitary_scaling(&p)]) {
            let lhs = apply_ct(&(&h1 + &h2), t)?;
            let rhs = &(&apply_ct(&h1, t)? + &apply_ct(&h2, t)?) - &t.generator;
            worst = worst.max(lhs.max_difference(&rhs));
        }
        Ok((worst < 1e-12, format!("max difference {worst:e}")))
    });

    run("chain: rederived omega' has harmonic shape", &mut checks, || {
        let p = desk();
        let w = derive_transformed_frequency(&p)?;
        let err = (w - Complex64::new(p.reduced_frequency(), 0.0)).norm();
        Ok((err < 1e-12, format!("omega' = {w}, |omega' - Omega| = {err:e}")))
    });

    run("chain: unitary scaling preserves norm and inverts", &mut checks, || {
        let g = GridSpec::new(10.0, 256)?;
        let p = desk();
        let f: Vec<Complex64> = g
            .nodes()
            .iter()
            .map(|x| Complex64::new(PI.powf(-0.25) * (-0.5 * x * x).exp(), 0.0))
            .collect();
        let mut worst = 0.0f64;
        for dir in [Oscillator::Actual, Oscillator::Image] {
            let s = ScalingAction::new(dir, &p, 1.0);
            let out = s.apply_samples(&g, &f)?;
            let dens: Vec<Complex64> = out.iter().map(|v| Complex64::new(v.norm_sqr(), 0.0)).collect();
            worst = worst.max((simpson(&g, &dens).re - 1.0).abs());
            let back = s.invert_samples(&g, &out)?;
            worst = worst.max(back.iter().zip(&f).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max));
        }
        Ok((worst < 1e-8, format!("max norm/round-trip error {worst:e}")))
    });

    run("classical: RK4 matches analytic over 10 periods", &mut checks, || {
        let mut worst = 0.0f64;
        for ratio in [0.0, 0.01, 0.05, 0.1, 0.3] {
            let p = PhysParams::new(ratio, 1.0)?;
            let period = p.period();
            let ic = InitialConditions::mirrored(1.0, 0.5)?;
            let rk = integrate_rk4(&ic, &p, period / 1000.0, 10_000)?;
            for (t, s) in rk.times.iter().zip(&rk.states) {
                let a = analytic_state(&ic, &p, *t);
                // the image is compared relative to its e^{λt} growth
                worst = worst.max((a.q - s.q).abs()).max((a.p - s.p).abs() * (-ratio * t).exp());
            }
        }
        Ok((worst < 1e-8, format!("sup error over both oscillators {worst:e}")))
    });

    run("classical: H2 conserved", &mut checks, || {
        let p = desk();
        let ic = InitialConditions::new(1.0, 0.0, 0.5, 0.2)?;
        let drift = h2_relative_drift(&integrate_rk4(&ic, &p, p.period() / 1000.0, 10_000)?);
        Ok((drift < 1e-8, format!("relative drift {drift:e}")))
    });

    run("classical: period envelope of E_actual", &mut checks, || {
        let p = desk();
        let period = p.period();
        let ic = InitialConditions::mirrored(1.0, 0.0)?;
        let rk = integrate_rk4(&ic, &p, period / 1000.0, 10_000)?;
        let factor = (-2.0 * p.lambda() * period).exp();
        let mut worst = 0.0f64;
        for k in (0..9000).step_by(250) {
            let ratio = rk.energies[k + 1000].e_actual / rk.energies[k].e_actual;
            worst = worst.max((ratio / factor - 1.0).abs());
        }
        let times: Vec<f64> = (0..=10).map(|k| k as f64 * period).collect();
        let an = analytic_trajectory(&ic, &p, &times)?;
        let env_err = an
            .states
            .iter()
            .enumerate()
            .map(|(k, s)| (s.q - (-p.lambda() * times[k]).exp()).abs())
            .fold(0.0, f64::max);
        Ok((worst < 1e-6 && env_err < 1e-8, format!("max relative ratio error {worst:e}, analytic envelope error {env_err:e}")))
    });

    run("classical: image is actual with -lambda", &mut checks, || {
        let p = desk();
        let ok = [(1.0, 0.0), (0.3, -2.0), (-1.5, 0.7)]
            .iter()
            .all(|&(x, v)| accel_image(x, v, &p).to_bits() == damped_acceleration(x, v, -p.lambda(), p.omega()).to_bits());
        Ok((ok, "bitwise comparison on 3 states".into()))
    });

    run("spectral: basis orthonormality", &mut checks, || {
        let g = GridSpec::new(10.0, 512)?;
        let basis = HermiteBasis::new(HermiteBasisSpec::new(5, Complex64::new(1.0, 0.0), 1.0)?)?;
        let s: Vec<Vec<Complex64>> = (0..=5).map(|n| basis.sample(n, &g)).collect::<Result<_>>()?;
        let mut worst = 0.0f64;
        for a in 0..=5 {
            for b in 0..=5 {
                let prod: Vec<Complex64> = s[a].iter().zip(&s[b]).map(|(x, y)| x.conj() * y).collect();
                worst = worst.max((simpson(&g, &prod) - if a == b { 1.0 } else { 0.0 }).norm());
            }
        }
        Ok((worst < 1e-8, format!("max |<a|b> - delta_ab| = {worst:e}")))
    });

    run("spectral: eigenvalue antisymmetry", &mut checks, || {
        let p = desk();
        let mut ok = true;
        for conv in [OmegaPrimeConvention::PaperStated, OmegaPrimeConvention::Rederived] {
            for n in 0..4 {
                for m in 0..4 {
                    ok &= eigenvalue(n, m, &p, conv)? == -eigenvalue(m, n, &p, conv)?;
                }
            }
        }
        Ok((ok, "exact comparison for n, m <= 3".into()))
    });

    run("spectral: grid eigenpair residual < 1e-6", &mut checks, || {
        let g = GridSpec::new(8.0, 256)?;
        let p = PhysParams::new(0.0, 1.0)?;
        let h = eps_harmonic_hamiltonian(omega_prime(&p, OmegaPrimeConvention::Rederived)?)?;
        let pairs: Vec<(usize, usize)> = if quick {
            vec![(0, 0), (3, 1)]
        } else {
            (0..=3).flat_map(|n| (0..=3).map(move |m| (n, m))).collect()
        };
        let mut worst = 0.0f64;
        for (n, m) in pairs {
            let chi = chi_eigenfunction(n, m, &g, &p)?;
            let e = eigenvalue(n as i64, m as i64, &p, OmegaPrimeConvention::Rederived)?;
            worst = worst.max(eigen_residual(&h, &chi, e, 0.0, p.hbar(), Stencil::Eighth)?);
        }
        Ok((worst < 1e-6, format!("max residual {worst:e}")))
    });

    if !quick {
        run("spectral: residual converges under refinement", &mut checks, || {
            let p = PhysParams::new(0.0, 1.0)?;
            let h = eps_harmonic_hamiltonian(omega_prime(&p, OmegaPrimeConvention::Rederived)?)?;
            let e = eigenvalue(3, 1, &p, OmegaPrimeConvention::Rederived)?;
            let r = |n: usize| -> Result<f64> {
                let g = GridSpec::new(8.0, n)?;
                eigen_residual(&h, &chi_eigenfunction(3, 1, &g, &p)?, e, 0.0, p.hbar(), Stencil::Eighth)
            };
            let (coarse, fine) = (r(128)?, r(256)?);
            Ok((coarse / fine >= 4.0, format!("residual {coarse:e} -> {fine:e}, ratio {:.1}", coarse / fine)))
        });
    }

    run("spectral: chi' solves the damped equation", &mut checks, || {
        let g = GridSpec::new(8.0, 256)?;
        let p = PhysParams::new(0.05, 1.0)?;
        let pairs: &[(usize, usize)] = if quick { &[(1, 0)] } else { &[(0, 0), (1, 0), (2, 3), (3, 1)] };
        let mut worst = 0.0f64;
        for &(n, m) in pairs {
            worst = worst.max(dynamical_residual(n, m, &g, &p, 0.5, 1e-4, OmegaPrimeConvention::Rederived, ImageScale::Conjugate)?);
        }
        Ok((worst < 1e-4, format!("max residual {worst:e}")))
    });

    run("propagator: lambda -> 0 factorization", &mut checks, || {
        let p = PhysParams::new(0.0, 1.0)?;
        let pp = PropagatorParams::new(p, 0.0, 0.9)?;
        let standard = |x: f64, y: f64| {
            let (s, c) = (0.9f64.sin(), 0.9f64.cos());
            (Complex64::new(1.0, 0.0) / (2.0 * PI * Complex64::i() * s)).sqrt()
                * (Complex64::i() / (2.0 * s) * ((x * x + y * y) * c - 2.0 * x * y)).exp()
        };
        let mut worst = 0.0f64;
        for k in 0..100 {
            let f = k as f64;
            let (q, qi, pv, pi) = ((f * 0.37).sin() * 3.0, (f * 0.71).cos() * 2.0, (f * 1.3).sin(), (f * 0.19).cos() * 2.5);
            let exact = standard(q, qi) * standard(pv, pi).conj();
            worst = worst.max((extended_propagator(q, pv, qi, pi, &pp)? - exact).norm());
        }
        Ok((worst < 1e-8, format!("max deviation on 100 probes {worst:e}")))
    });

    run("propagator: semigroup composition", &mut checks, || {
        let p = desk();
        let probes = [[0.3, 0.1, -0.4, 0.9], [1.2, -0.8, 0.5, 0.2], [-1.5, 1.3, 1.0, -0.6]];
        let mut worst = 0.0f64;
        for times in [(0.0, 0.3, 0.6), (0.0, 0.2, 0.7), (0.5, 1.1, 1.4)] {
            worst = worst.max(semigroup_defect(&p, times, &probes)?);
        }
        Ok((worst < 1e-6, format!("max defect {worst:e}")))
    });

    run("propagator: short-time identity", &mut checks, || {
        let g = GridSpec::new(10.0, 256)?;
        let initial = initial_gaussian(1.0, 1.0, true).to_grid(&g);
        let out = quadrature_evolve(&initial, &PropagatorParams::new(desk(), 0.0, 1e-3)?)?;
        let d = out.l2_distance(&initial)?;
        Ok((d < 1e-3, format!("L2 change {d:e}")))
    });

    if !quick {
        run("propagator: full-period return at lambda = 0", &mut checks, || {
            let g = GridSpec::new(10.0, 256)?;
            let initial = initial_gaussian(2.0, 1.0, true).to_grid(&g);
            let out = quadrature_evolve(&initial, &PropagatorParams::new(PhysParams::new(0.0, 1.0)?, 0.0, 2.0 * PI)?)?;
            let d = l2_distance_up_to_phase(&initial, &out)?;
            Ok((d < 1e-5, format!("L2 distance up to phase {d:e}")))
        });
    }

    run("uncertainty: coherent state is stationary", &mut checks, || {
        let p = PhysParams::new(0.0, 1.0)?;
        let r0 = uncertainties_closed_form(1.0, 0.0, &p)?;
        let mut worst = (r0.dq - 0.5f64.sqrt()).abs();
        for k in 1..=50 {
            worst = worst.max(uncertainties_closed_form(1.0, 0.37 * k as f64, &p)?.max_abs_diff(&r0));
        }
        Ok((worst < 1e-9, format!("max deviation {worst:e}")))
    });

    run("uncertainty: per-oscillator violation, combined bound", &mut checks, || {
        let s = uncertainty_series(1.0, &desk(), 20.0, 400)?;
        let flagged_q = s.iter().any(|r| r.flag_q == 1);
        let flagged_p = s.iter().any(|r| r.flag_p == 1);
        let min_comb = s.iter().map(|r| r.prod_combined).fold(f64::INFINITY, f64::min);
        Ok((
            flagged_q && !flagged_p && min_comb >= 0.25 * (1.0 - 1e-6),
            format!("flag_q seen = {flagged_q}, flag_p seen = {flagged_p}, min prod_combined = {min_comb:.6}"),
        ))
    });

    run("uncertainty: combined product has no envelope", &mut checks, || {
        let p = desk();
        let period = p.period();
        let mut worst = 0.0f64;
        for k in 0..20 {
            let t = 0.31 * k as f64;
            let a = uncertainties_closed_form(2.0, t, &p)?;
            let b = uncertainties_closed_form(2.0, t + period, &p)?;
            worst = worst.max((a.prod_combined - b.prod_combined).abs());
        }
        Ok((worst < 1e-8, format!("max |prod(t + T) - prod(t)| = {worst:e}")))
    });

    run("uncertainty: closed form matches grid moments", &mut checks, || {
        let g = GridSpec::new(10.0, 256)?;
        let points: &[(f64, f64)] = if quick {
            &[(0.1, 2.0)]
        } else {
            &[(0.0, 1.0), (0.0, 2.0), (0.05, 1.0), (0.05, 2.0), (0.1, 1.0), (0.1, 2.0)]
        };
        let times: &[f64] = if quick { &[1.0] } else { &[0.0, 0.5, 1.0, 1.5, 2.0] };
        let mut worst = 0.0f64;
        for &(l, delta) in points {
            let p = PhysParams::new(l, 1.0)?;
            for r in oracle_records(delta, &p, times, &g, true)? {
                worst = worst.max(r.max_abs_diff);
            }
        }
        Ok((worst < 1e-6, format!("max |closed - grid| = {worst:e}")))
    });

    let table = omega_prime_table();
    run("omega' report: conventions coincide at lambda = 0", &mut checks, || {
        let rows = table.clone()?;
        let ok = rows.iter().filter(|r| r.lambda == 0.0).all(|r| r.identical);
        Ok((ok, format!("{} parameter points", rows.len())))
    });

    VerifyReport {
        checks,
        omega_prime: table.unwrap_or_default(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_suite_passes() {
        let r = run_verification(&VerifyOptions {
            quick: true,
            perturb_symplectic: None,
        });
        assert!(r.all_passed(), "{}", r.render());
        assert!(r.checks.len() >= 15);
        assert_eq!(r.omega_prime.len(), 5);
    }

    #[test]
    fn perturbation_is_detected_by_name() {
        let r = run_verification(&VerifyOptions {
            quick: true,
            perturb_symplectic: Some(1e-3),
        });
        let failed: Vec<&str> = r.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        assert_eq!(failed, vec!["chain: symplectic defect < 1e-10"]);
    }
}
