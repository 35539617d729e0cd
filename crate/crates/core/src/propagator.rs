//! The extended propagator of the damped pair, closed-form Gaussian evolution, a quadrature
//! oracle for both, and the four uncertainties with their products.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{EpsError, Result};
use crate::grid::{derivative_1d, simpson, simpson_real, GridSpec, GridState, Stencil};
use crate::params::{omega_prime, OmegaPrimeConvention, PhysParams};

/// Kernel caustics: `|sin ω′(t − t_i)|` below this is rejected.
pub const CAUSTIC_TOL: f64 = 1e-12;
/// Quadrature substeps must keep `|sin ω′Δt|` above this.
pub const SUBSTEP_CAUSTIC_TOL: f64 = 1e-3;
/// Relative slack used when flagging `prod < ħ/2`.
pub const FLAG_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PropagatorParams {
    pub params: PhysParams,
    pub t_initial: f64,
    pub t_final: f64,
    pub convention: OmegaPrimeConvention,
}

impl PropagatorParams {
    pub fn new(params: PhysParams, t_initial: f64, t_final: f64) -> Result<Self> {
        if !(t_initial.is_finite() && t_final.is_finite()) || t_final <= t_initial {
            return Err(EpsError::Domain(format!(
                "propagator needs finite t > t_i, got t_i = {t_initial}, t = {t_final}"
            )));
        }
        Ok(PropagatorParams {
            params,
            t_initial,
            t_final,
            convention: OmegaPrimeConvention::Rederived,
        })
    }

    pub fn with_convention(mut self, convention: OmegaPrimeConvention) -> Self {
        self.convention = convention;
        self
    }

    pub fn omega_prime(&self) -> Result<Complex64> {
        omega_prime(&self.params, self.convention)
    }
}

/// `prefactor · exp(a·x² + b·y² + c·x·y)`, `x` the final and `y` the initial coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KernelFactor {
    pub prefactor: Complex64,
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
}

impl KernelFactor {
    pub fn eval(&self, x: Complex64, y: Complex64) -> Complex64 {
        self.prefactor * (self.a * x * x + self.b * y * y + self.c * x * y).exp()
    }

    pub fn eval_real(&self, x: f64, y: f64) -> Complex64 {
        self.prefactor * (self.a * (x * x) + self.b * (y * y) + self.c * (x * y)).exp()
    }
}

/// Actual (damped) and image (anti-damped) kernel factors from `t_i` to `t`; `t < t_i` is
/// allowed and gives the backward kernel.
pub fn kernel_factors(
    params: &PhysParams,
    w: Complex64,
    t_i: f64,
    t: f64,
) -> Result<(KernelFactor, KernelFactor)> {
    let dt = t - t_i;
    let (s, c) = ((w * dt).sin(), (w * dt).cos());
    if s.norm() < CAUSTIC_TOL {
        return Err(EpsError::Caustic { dt, sin_abs: s.norm() });
    }
    let hbar = params.hbar();
    let l = params.lambda();
    let i = Complex64::i();
    let env = (l * (t + t_i)).exp();
    let grow = (l * dt).exp();
    let shrink = (-l * dt).exp();
    let ls = s * l / w;

    let ka = i * w * env / (2.0 * hbar * s);
    let actual = KernelFactor {
        prefactor: (w * env / (2.0 * PI * hbar * i * s)).sqrt(),
        a: ka * grow * (c - ls),
        b: ka * shrink * (c + ls),
        c: -ka * 2.0,
    };
    let ki = -i * w / (env * 2.0 * hbar * s);
    let image = KernelFactor {
        prefactor: (w / (env * -2.0 * PI * hbar * i * s)).sqrt(),
        a: ki * shrink * (c + ls),
        b: ki * grow * (c - ls),
        c: -ki * 2.0,
    };
    Ok((actual, image))
}

pub fn extended_kernel(pp: &PropagatorParams) -> Result<(KernelFactor, KernelFactor)> {
    kernel_factors(&pp.params, pp.omega_prime()?, pp.t_initial, pp.t_final)
}

/// `K(q, p, t; q_i, p_i, t_i)`.
pub fn extended_propagator(q: f64, p: f64, q_i: f64, p_i: f64, pp: &PropagatorParams) -> Result<Complex64> {
    let (ka, ki) = extended_kernel(pp)?;
    Ok(ka.eval_real(q, q_i) * ki.eval_real(p, p_i))
}

/// One coordinate factor `norm · exp(−a·x²)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GaussianFactor {
    pub norm: Complex64,
    pub a: Complex64,
}

impl GaussianFactor {
    pub fn value(&self, x: f64) -> Complex64 {
        self.norm * (-self.a * x * x).exp()
    }

    pub fn norm_sq(&self) -> f64 {
        self.norm.norm_sqr() * (PI / (2.0 * self.a.re)).sqrt()
    }

    /// `⟨x²⟩`, equal to the variance since the mean vanishes.
    pub fn var_x(&self) -> f64 {
        1.0 / (4.0 * self.a.re)
    }

    /// `⟨π²⟩` for `π = −iħ d/dx`.
    pub fn var_pi(&self, hbar: f64) -> f64 {
        hbar * hbar * self.a.norm_sqr() / self.a.re
    }
}

/// Product-form Gaussian `χ = q.value(q)·p.value(p)` times the optional cross phase.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GaussianState {
    pub time: f64,
    pub q: GaussianFactor,
    pub p: GaussianFactor,
    pub cross_phase: Option<f64>,
}

impl GaussianState {
    pub fn value(&self, q: f64, p: f64) -> Complex64 {
        let phase = match self.cross_phase {
            Some(hbar) => Complex64::from_polar(1.0, -q * p / hbar),
            None => Complex64::new(1.0, 0.0),
        };
        self.q.value(q) * self.p.value(p) * phase
    }

    pub fn norm_sq(&self) -> f64 {
        self.q.norm_sq() * self.p.norm_sq()
    }

    pub fn to_grid(&self, grid: &GridSpec) -> GridState {
        let nodes = grid.nodes();
        let u: Vec<Complex64> = nodes.iter().map(|x| self.q.value(*x)).collect();
        let v: Vec<Complex64> = nodes.iter().map(|x| self.p.value(*x)).collect();
        GridState::from_product(*grid, self.time, self.cross_phase, &u, &v)
    }
}

/// Initial minimum-uncertainty product `(πδ²)^{−1/2}·exp(−(q² + p²)/2δ²)` (with cross phase).
pub fn initial_gaussian(delta: f64, hbar: f64, cross_phase: bool) -> GaussianState {
    let f = GaussianFactor {
        norm: Complex64::new((PI * delta * delta).powf(-0.25), 0.0),
        a: Complex64::new(1.0 / (2.0 * delta * delta), 0.0),
    };
    GaussianState {
        time: 0.0,
        q: f,
        p: f,
        cross_phase: cross_phase.then_some(hbar),
    }
}

/// `(N(t), B(t))` with `ψ = N·exp(iBx²/2ħ)` solving the Caldirola–Kanai equation of rate `r`
/// from `ψ(0) = (πδ²)^{−1/4}·exp(−x²/2δ²)`.
fn caldirola_kanai_gaussian(delta: f64, t: f64, r: f64, big_omega: f64, hbar: f64) -> (Complex64, Complex64) {
    let z0 = Complex64::new(r, hbar / (delta * delta));
    let theta = big_omega * t;
    let (s, c) = theta.sin_cos();
    let d = c + z0 / big_omega * s;
    let z = (z0 * c - big_omega * s) / d;
    let b = (z - r) * (2.0 * r * t).exp();
    // Continuous branch of arg D: Im D ∝ sin θ, so arg D ∈ [kπ, (k+1)π] on θ ∈ [kπ, (k+1)π].
    let k = (theta / PI).floor();
    let mut arg = d.arg().rem_euclid(2.0 * PI) + 2.0 * PI * (k / 2.0).floor();
    while arg < k * PI - 1e-9 {
        arg += 2.0 * PI;
    }
    while arg > (k + 1.0) * PI + 1e-9 {
        arg -= 2.0 * PI;
    }
    let inv_sqrt_d = Complex64::from_polar(d.norm().powf(-0.5), -0.5 * arg);
    let n0 = (PI * delta * delta).powf(-0.25);
    let norm = inv_sqrt_d * n0 * (0.5 * r * t).exp();
    (norm, b)
}

/// Closed-form evolution of the initial Gaussian to time `t ≥ 0` (cross phase included).
pub fn evolve_gaussian_closed_form(delta: f64, t: f64, params: &PhysParams) -> Result<GaussianState> {
    evolve_gaussian_closed_form_with(delta, t, params, true)
}

pub fn evolve_gaussian_closed_form_with(
    delta: f64,
    t: f64,
    params: &PhysParams,
    cross_phase: bool,
) -> Result<GaussianState> {
    if !t.is_finite() || t < 0.0 {
        return Err(EpsError::Domain(format!("closed-form evolution needs finite t >= 0, got {t}")));
    }
    if !delta.is_finite() || delta <= 0.0 {
        return Err(EpsError::Domain(format!("delta must be > 0, got {delta}")));
    }
    if t == 0.0 {
        return Ok(initial_gaussian(delta, params.hbar(), cross_phase));
    }
    let hbar = params.hbar();
    let big = params.reduced_frequency();
    let l = params.lambda();
    let (nq, bq) = caldirola_kanai_gaussian(delta, t, l, big, hbar);
    // The image factor is the conjugate of a Caldirola–Kanai solution with rate −λ.
    let (np, bp) = caldirola_kanai_gaussian(delta, t, -l, big, hbar);
    let i = Complex64::i();
    let state = GaussianState {
        time: t,
        q: GaussianFactor {
            norm: nq,
            a: -i * bq / (2.0 * hbar),
        },
        p: GaussianFactor {
            norm: np.conj(),
            a: i * bp.conj() / (2.0 * hbar),
        },
        cross_phase: cross_phase.then_some(hbar),
    };
    for (name, f) in [("q", state.q), ("p", state.p)] {
        let finite = [f.norm.re, f.norm.im, f.a.re, f.a.im].iter().all(|v| v.is_finite());
        if !finite {
            return Err(EpsError::Horizon {
                time: t,
                reason: format!("{name}-factor coefficients are not finite"),
            });
        }
        if f.a.re <= 0.0 {
            return Err(EpsError::Horizon {
                time: t,
                reason: format!("{name}-factor is no longer normalizable (Re a = {})", f.a.re),
            });
        }
    }
    Ok(state)
}

fn apply_kernel_step(data: &[Complex64], grid: &GridSpec, ka: &KernelFactor, ki: &KernelFactor) -> Vec<Complex64> {
    let n = grid.len();
    let xs = grid.nodes();
    let w = grid.simpson_weights();
    let matrix = |k: &KernelFactor| -> Vec<Complex64> {
        (0..n * n)
            .into_par_iter()
            .map(|idx| {
                let (i, j) = (idx / n, idx % n);
                k.eval_real(xs[i], xs[j]) * w[j]
            })
            .collect()
    };
    let ma = matrix(ka);
    let mi = matrix(ki);
    // X = D · Miᵀ, then new = Ma · X.
    let mut x = vec![Complex64::new(0.0, 0.0); n * n];
    x.par_chunks_mut(n).enumerate().for_each(|(k, row)| {
        let d = &data[k * n..(k + 1) * n];
        for (j, slot) in row.iter_mut().enumerate() {
            let m = &mi[j * n..(j + 1) * n];
            *slot = d.iter().zip(m).map(|(a, b)| a * b).sum();
        }
    });
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    out.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        let m = &ma[i * n..(i + 1) * n];
        for (k, coef) in m.iter().enumerate() {
            let xr = &x[k * n..(k + 1) * n];
            for (slot, v) in row.iter_mut().zip(xr) {
                *slot += coef * v;
            }
        }
    });
    out
}

/// Substep schedule for an interval of length `span > 0`, avoiding caustics.
pub fn substeps(span: f64, w: Complex64) -> Vec<f64> {
    let quarter = PI / (2.0 * w.re);
    let n = (span / quarter).round() as usize;
    if n == 0 {
        vec![span + quarter, -quarter]
    } else {
        vec![span / n as f64; n]
    }
}

/// Applies the extended propagator by composite Simpson quadrature from `pp.t_initial`
/// to `pp.t_final`. The cross-phase flag of `initial` is carried through unchanged.
pub fn quadrature_evolve(initial: &GridState, pp: &PropagatorParams) -> Result<GridState> {
    initial.grid.check()?;
    let w = pp.omega_prime()?;
    let mut data = initial.data.clone();
    let mut t = pp.t_initial;
    for dt in substeps(pp.t_final - pp.t_initial, w) {
        let s = (w * dt).sin().norm();
        if s < SUBSTEP_CAUSTIC_TOL {
            return Err(EpsError::Caustic { dt, sin_abs: s });
        }
        let (ka, ki) = kernel_factors(&pp.params, w, t, t + dt)?;
        data = apply_kernel_step(&data, &initial.grid, &ka, &ki);
        t += dt;
    }
    if data.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(EpsError::Grid("quadrature produced non-finite samples".into()));
    }
    Ok(GridState {
        grid: initial.grid,
        time: pp.t_final,
        cross_phase: initial.cross_phase,
        data,
    })
}

/// L² distance after removing the best global phase.
pub fn l2_distance_up_to_phase(a: &GridState, b: &GridState) -> Result<f64> {
    let (a, b) = (a.materialize(), b.materialize());
    a.check_compatible(&b)?;
    let w = a.grid.simpson_weights();
    let n = a.n();
    let mut overlap = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            overlap += a.at(i, j).conj() * b.at(i, j) * w[i] * w[j];
        }
    }
    let phase = if overlap.norm() > 0.0 {
        overlap.conj() / overlap.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    Ok(a.lincomb(Complex64::new(1.0, 0.0), &b, -phase)?.norm())
}

/// Spreads of the four observables and their products at one instant. `dpi_q` and `dpi_p` are
/// the spreads of the velocities `q̇ = e^{−2λt}π_q` and `ṗ = −e^{2λt}π_p`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct UncertaintyRecord {
    pub t: f64,
    pub dq: f64,
    pub dpi_q: f64,
    pub dp: f64,
    pub dpi_p: f64,
    pub prod_q: f64,
    pub prod_p: f64,
    pub prod_combined: f64,
    pub flag_q: u8,
    pub flag_p: u8,
}

impl UncertaintyRecord {
    pub fn new(t: f64, dq: f64, dpi_q: f64, dp: f64, dpi_p: f64, hbar: f64) -> Self {
        let prod_q = dq * dpi_q;
        let prod_p = dp * dpi_p;
        let bound = 0.5 * hbar * (1.0 - FLAG_TOL);
        UncertaintyRecord {
            t,
            dq,
            dpi_q,
            dp,
            dpi_p,
            prod_q,
            prod_p,
            prod_combined: prod_q * prod_p,
            flag_q: u8::from(prod_q < bound),
            flag_p: u8::from(prod_p < bound),
        }
    }

    /// Largest absolute difference over the four spreads and three products.
    pub fn max_abs_diff(&self, other: &UncertaintyRecord) -> f64 {
        [
            self.dq - other.dq,
            self.dpi_q - other.dpi_q,
            self.dp - other.dp,
            self.dpi_p - other.dpi_p,
            self.prod_q - other.prod_q,
            self.prod_p - other.prod_p,
            self.prod_combined - other.prod_combined,
        ]
        .iter()
        .map(|d| d.abs())
        .fold(0.0, f64::max)
    }
}

/// Uncertainties from the coefficients of a Gaussian state.
pub fn uncertainties_from_gaussian(state: &GaussianState, params: &PhysParams) -> UncertaintyRecord {
    let hbar = params.hbar();
    let l = params.lambda();
    let t = state.time;
    UncertaintyRecord::new(
        t,
        state.q.var_x().sqrt(),
        (-2.0 * l * t).exp() * state.q.var_pi(hbar).sqrt(),
        state.p.var_x().sqrt(),
        (2.0 * l * t).exp() * state.p.var_pi(hbar).sqrt(),
        hbar,
    )
}

/// Closed-form spreads:
/// `Δq² = (δ²/2)e^{−2λt}[1 + c_x sin²Ωt + (λ/Ω) sin 2Ωt]`,
/// `Δq̇² = (ħκ/2)e^{−2λt}[1 + c_v sin²Ωt − (λ/Ω) sin 2Ωt]`, and the image pair with
/// `λ → −λ` in envelope and odd term, where `κ = ħ/δ²`,
/// `c_x = (κ² + λ²)/Ω² − 1`, `c_v = (ω⁴/κ² + λ²)/Ω² − 1`.
pub fn uncertainties_closed_form(delta: f64, t: f64, params: &PhysParams) -> Result<UncertaintyRecord> {
    if !t.is_finite() || !delta.is_finite() || delta <= 0.0 {
        return Err(EpsError::Domain(format!("need finite t and delta > 0, got t = {t}, delta = {delta}")));
    }
    let hbar = params.hbar();
    let l = params.lambda();
    let w = params.omega();
    let big = params.reduced_frequency();
    let kappa = hbar / (delta * delta);
    let c_x = (kappa * kappa + l * l) / (big * big) - 1.0;
    let c_v = (w.powi(4) / (kappa * kappa) + l * l) / (big * big) - 1.0;
    let (s, s2) = ((big * t).sin(), (2.0 * big * t).sin());
    let odd = l / big * s2;
    let sin2 = s * s;
    let down = (-2.0 * l * t).exp();
    let up = (2.0 * l * t).exp();
    let var_q = 0.5 * delta * delta * down * (1.0 + c_x * sin2 + odd);
    let var_qd = 0.5 * hbar * kappa * down * (1.0 + c_v * sin2 - odd);
    let var_p = 0.5 * delta * delta * up * (1.0 + c_x * sin2 - odd);
    let var_pd = 0.5 * hbar * kappa * up * (1.0 + c_v * sin2 + odd);
    let vars = [var_q, var_qd, var_p, var_pd];
    if vars.iter().any(|v| !v.is_finite() || *v <= 0.0) {
        return Err(EpsError::Horizon {
            time: t,
            reason: format!("variances left the valid range: {vars:?}"),
        });
    }
    Ok(UncertaintyRecord::new(t, var_q.sqrt(), var_qd.sqrt(), var_p.sqrt(), var_pd.sqrt(), hbar))
}

/// `steps + 1` uniform samples of the closed form on `[0, t_max]`.
pub fn uncertainty_series(delta: f64, params: &PhysParams, t_max: f64, steps: usize) -> Result<Vec<UncertaintyRecord>> {
    if steps < 2 {
        return Err(EpsError::Domain(format!("at least 2 steps required, got {steps}")));
    }
    if !t_max.is_finite() || t_max <= 0.0 {
        return Err(EpsError::Domain(format!("t_max must be > 0, got {t_max}")));
    }
    (0..=steps)
        .map(|k| uncertainties_closed_form(delta, t_max * k as f64 / steps as f64, params))
        .collect()
}

fn factor_moments(grid: &GridSpec, f: &[Complex64], hbar: f64) -> (f64, f64) {
    let xs = grid.nodes();
    let dens: Vec<f64> = f.iter().map(|v| v.norm_sqr()).collect();
    let norm = simpson_real(grid, &dens);
    let mean = simpson_real(grid, &dens.iter().zip(&xs).map(|(d, x)| d * x).collect::<Vec<_>>()) / norm;
    let second = simpson_real(grid, &dens.iter().zip(&xs).map(|(d, x)| d * x * x).collect::<Vec<_>>()) / norm;
    let df = derivative_1d(f, grid.spacing(), Stencil::Eighth, 1);
    let mean_pi = simpson(grid, &f.iter().zip(&df).map(|(v, d)| v.conj() * d).collect::<Vec<_>>())
        .im
        * hbar
        / norm;
    let pi2 = hbar * hbar * simpson_real(grid, &df.iter().map(|d| d.norm_sqr()).collect::<Vec<_>>()) / norm;
    ((second - mean * mean).max(0.0), (pi2 - mean_pi * mean_pi).max(0.0))
}

/// Uncertainties of a product-form grid state via its reconstructed one-coordinate factors.
pub fn moments_from_grid(state: &GridState, params: &PhysParams) -> Result<UncertaintyRecord> {
    let (u, v, residual) = state.factorize()?;
    if residual > 1e-6 {
        return Err(EpsError::Shape(format!(
            "state is not of product form (factorization residual {residual:e})"
        )));
    }
    let hbar = params.hbar();
    let l = params.lambda();
    let t = state.time;
    let (var_q, var_piq) = factor_moments(&state.grid, &u, hbar);
    let (var_p, var_pip) = factor_moments(&state.grid, &v, hbar);
    Ok(UncertaintyRecord::new(
        t,
        var_q.sqrt(),
        (-2.0 * l * t).exp() * var_piq.sqrt(),
        var_p.sqrt(),
        (2.0 * l * t).exp() * var_pip.sqrt(),
        hbar,
    ))
}

/// `⟨O⟩ = ∫O χ* dq dp / ∫χ* dq dp` for a c-number observable.
pub fn averaging_rule(state: &GridState, observable: impl Fn(f64, f64) -> f64) -> Result<Complex64> {
    let g = &state.grid;
    let w = g.simpson_weights();
    let xs = g.nodes();
    let n = state.n();
    let (mut num, mut den) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
    for i in 0..n {
        for j in 0..n {
            let c = state.value(i, j).conj() * w[i] * w[j];
            num += c * observable(xs[i], xs[j]);
            den += c;
        }
    }
    if den.norm() < 1e-300 {
        return Err(EpsError::Shape("∫χ* vanishes; the averaging rule is undefined".into()));
    }
    Ok(num / den)
}

/// Closed-form record next to the grid-moment record of the quadrature-evolved state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OracleRecord {
    pub closed: UncertaintyRecord,
    pub oracle: UncertaintyRecord,
    pub max_abs_diff: f64,
}

/// Evolves the initial Gaussian by quadrature to each requested time and compares moments.
pub fn oracle_records(
    delta: f64,
    params: &PhysParams,
    times: &[f64],
    grid: &GridSpec,
    cross_phase: bool,
) -> Result<Vec<OracleRecord>> {
    let initial = initial_gaussian(delta, params.hbar(), cross_phase).to_grid(grid);
    times
        .iter()
        .map(|&t| {
            let state = if t == 0.0 {
                initial.clone()
            } else {
                quadrature_evolve(&initial, &PropagatorParams::new(*params, 0.0, t)?)?
            };
            let oracle = moments_from_grid(&state, params)?;
            let closed = uncertainties_closed_form(delta, t, params)?;
            Ok(OracleRecord {
                closed,
                oracle,
                max_abs_diff: closed.max_abs_diff(&oracle),
            })
        })
        .collect()
}

/// Largest pointwise `|∫∫K(t₂;t₁)K(t₁;t₀) − K(t₂;t₀)|` over the probe points, with the
/// intermediate integrals done by Simpson quadrature along the steepest-descent line.
pub fn semigroup_defect(params: &PhysParams, times: (f64, f64, f64), probes: &[[f64; 4]]) -> Result<f64> {
    let w = omega_prime(params, OmegaPrimeConvention::Rederived)?;
    let (t0, t1, t2) = times;
    let (a1, i1) = kernel_factors(params, w, t0, t1)?;
    let (a2, i2) = kernel_factors(params, w, t1, t2)?;
    let (a, i) = kernel_factors(params, w, t0, t2)?;
    let compose = |late: &KernelFactor, early: &KernelFactor, x: f64, y: f64| {
        let total = late.b + early.a;
        let theta = ((PI - total.arg()) / 2.0 + PI / 2.0).rem_euclid(PI) - PI / 2.0;
        let dir = Complex64::from_polar(1.0, theta);
        let (half, intervals) = (8.0, 1600usize);
        let h = 2.0 * half / intervals as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..=intervals {
            let wk = if k == 0 || k == intervals { 1.0 } else if k % 2 == 1 { 4.0 } else { 2.0 };
            let z = dir * (-half + k as f64 * h);
            acc += late.eval(Complex64::new(x, 0.0), z) * early.eval(z, Complex64::new(y, 0.0)) * wk;
        }
        acc * dir * h / 3.0
    };
    Ok(probes
        .iter()
        .map(|[q, p, qi, pi]| {
            let composed = compose(&a2, &a1, *q, *qi) * compose(&i2, &i1, *p, *pi);
            (composed - a.eval_real(*q, *qi) * i.eval_real(*p, *pi)).norm()
        })
        .fold(0.0, f64::max))
}
