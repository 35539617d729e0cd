//! Quadratic extended Hamiltonians with exponential-in-time coefficients, and the chain of
//! time-dependent linear canonical transformations that takes the undamped extended
//! Hamiltonian to the decoupled Caldirola–Kanai form and on to a harmonic form.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde_json::{json, Value};

use crate::error::{EpsError, Result};
use crate::expsum::ExpSum;
use crate::grid::{interpolate, tail_is_negligible, GridSpec};
use crate::params::{EpsPoint, PhysParams};

/// Extended phase-space coordinate, in the fixed order `(q, p, π_q, π_p)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    Q,
    P,
    PiQ,
    PiP,
}

impl Var {
    pub const ALL: [Var; 4] = [Var::Q, Var::P, Var::PiQ, Var::PiP];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Var {
        Var::ALL[i]
    }

    pub fn name(self) -> &'static str {
        match self {
            Var::Q => "q",
            Var::P => "p",
            Var::PiQ => "pi_q",
            Var::PiP => "pi_p",
        }
    }

    pub fn is_momentum(self) -> bool {
        matches!(self, Var::PiQ | Var::PiP)
    }
}

/// A degree-two monomial `a·b` with `a ≤ b` in coordinate order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(Var, Var);

impl Monomial {
    pub fn new(a: Var, b: Var) -> Self {
        if a <= b {
            Monomial(a, b)
        } else {
            Monomial(b, a)
        }
    }

    pub fn vars(&self) -> (Var, Var) {
        (self.0, self.1)
    }

    pub fn is_square(&self) -> bool {
        self.0 == self.1
    }

    /// All ten monomials of the basis.
    pub fn all() -> Vec<Monomial> {
        let mut out = Vec::with_capacity(10);
        for i in 0..4 {
            for j in i..4 {
                out.push(Monomial(Var::from_index(i), Var::from_index(j)));
            }
        }
        out
    }

    /// Tag such as `q^2` or `pi_q*pi_p`.
    pub fn tag(&self) -> String {
        if self.is_square() {
            format!("{}^2", self.0.name())
        } else {
            format!("{}*{}", self.0.name(), self.1.name())
        }
    }

    pub fn from_tag(tag: &str) -> Option<Monomial> {
        Monomial::all().into_iter().find(|m| m.tag() == tag)
    }

    pub fn eval(&self, w: &[f64; 4]) -> f64 {
        w[self.0.index()] * w[self.1.index()]
    }
}

pub fn q2() -> Monomial {
    Monomial::new(Var::Q, Var::Q)
}
pub fn p2() -> Monomial {
    Monomial::new(Var::P, Var::P)
}
pub fn piq2() -> Monomial {
    Monomial::new(Var::PiQ, Var::PiQ)
}
pub fn pip2() -> Monomial {
    Monomial::new(Var::PiP, Var::PiP)
}

type Matrix4 = [[ExpSum; 4]; 4];

fn zero_matrix() -> Matrix4 {
    std::array::from_fn(|_| std::array::from_fn(|_| ExpSum::zero()))
}

fn identity_matrix() -> Matrix4 {
    std::array::from_fn(|i| std::array::from_fn(|j| ExpSum::constant(if i == j { 1.0 } else { 0.0 })))
}

fn mat_mul(a: &Matrix4, b: &Matrix4) -> Matrix4 {
    let mut out = zero_matrix();
    for i in 0..4 {
        for j in 0..4 {
            let mut acc = ExpSum::zero();
            for k in 0..4 {
                if !a[i][k].is_zero() && !b[k][j].is_zero() {
                    acc = &acc + &(&a[i][k] * &b[k][j]);
                }
            }
            out[i][j] = acc;
        }
    }
    out
}

fn transpose(a: &Matrix4) -> Matrix4 {
    std::array::from_fn(|i| std::array::from_fn(|j| a[j][i].clone()))
}

/// Standard symplectic form pairing `(q, π_q)` and `(p, π_p)`.
fn j_matrix() -> Matrix4 {
    let mut j = zero_matrix();
    j[0][2] = ExpSum::constant(1.0);
    j[1][3] = ExpSum::constant(1.0);
    j[2][0] = ExpSum::constant(-1.0);
    j[3][1] = ExpSum::constant(-1.0);
    j
}

fn eval_matrix(a: &Matrix4, t: f64) -> [[Complex64; 4]; 4] {
    std::array::from_fn(|i| std::array::from_fn(|j| a[i][j].eval(t)))
}

/// `Σ c_m(t)·m` over the ten monomials of extended phase space.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct QuadraticHamiltonian {
    terms: BTreeMap<Monomial, ExpSum>,
}

impl QuadraticHamiltonian {
    pub fn zero() -> Self {
        Self::default()
    }

    /// Builds a form from `(monomial, coefficient)` pairs, adding repeated monomials.
    pub fn from_terms<I: IntoIterator<Item = (Monomial, ExpSum)>>(terms: I) -> Self {
        let mut h = Self::zero();
        for (m, c) in terms {
            h.add_term(m, &c);
        }
        h
    }

    pub fn add_term(&mut self, m: Monomial, c: &ExpSum) {
        let sum = match self.terms.get(&m) {
            Some(old) => old + c,
            None => c.clone(),
        };
        if sum.is_zero() {
            self.terms.remove(&m);
        } else {
            self.terms.insert(m, sum);
        }
    }

    pub fn coeff(&self, m: Monomial) -> ExpSum {
        self.terms.get(&m).cloned().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &ExpSum)> {
        self.terms.iter()
    }

    /// Number of monomials with a nonzero coefficient.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_time_independent(&self) -> bool {
        self.terms.values().all(ExpSum::is_constant)
    }

    pub fn eval(&self, point: &EpsPoint, t: f64) -> Complex64 {
        let w = point.as_array();
        self.terms.iter().map(|(m, c)| c.eval(t) * m.eval(&w)).sum()
    }

    /// Symmetric matrix `A` with `H = wᵀ A w`.
    fn matrix(&self) -> Matrix4 {
        let mut a = zero_matrix();
        for (m, c) in &self.terms {
            let (x, y) = (m.0.index(), m.1.index());
            if x == y {
                a[x][x] = c.clone();
            } else {
                let half = c.scale(Complex64::new(0.5, 0.0));
                a[x][y] = half.clone();
                a[y][x] = half;
            }
        }
        a
    }

    fn from_matrix(b: &Matrix4) -> Self {
        let mut h = Self::zero();
        for i in 0..4 {
            for j in i..4 {
                let c = if i == j { b[i][i].clone() } else { &b[i][j] + &b[j][i] };
                h.add_term(Monomial(Var::from_index(i), Var::from_index(j)), &c);
            }
        }
        h
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::from_terms(self.terms.iter().map(|(m, e)| (*m, e.scale(c))))
    }

    /// Largest coefficient amplitude of `self − other`.
    pub fn max_difference(&self, other: &QuadraticHamiltonian) -> f64 {
        (self - other)
            .terms
            .values()
            .map(ExpSum::max_amp)
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &QuadraticHamiltonian, tol: f64) -> bool {
        self.max_difference(other) <= tol
    }

    /// `{tag: [[re, im, rate], …]}`.
    pub fn to_json(&self) -> Value {
        let map: serde_json::Map<String, Value> = self
            .terms
            .iter()
            .map(|(m, c)| (m.tag(), json!(c.triples())))
            .collect();
        Value::Object(map)
    }
}

impl fmt::Display for QuadraticHamiltonian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "[{c}]·{}", m.tag())?;
        }
        Ok(())
    }
}

impl std::ops::Add for &QuadraticHamiltonian {
    type Output = QuadraticHamiltonian;
    fn add(self, rhs: &QuadraticHamiltonian) -> QuadraticHamiltonian {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(*m, c);
        }
        out
    }
}

impl std::ops::Sub for &QuadraticHamiltonian {
    type Output = QuadraticHamiltonian;
    fn sub(self, rhs: &QuadraticHamiltonian) -> QuadraticHamiltonian {
        self + &rhs.scale(Complex64::new(-1.0, 0.0))
    }
}

/// A time-dependent linear canonical map.
///
/// `substitution` expresses the old coordinates in terms of the new ones,
/// `old = S(t)·new`; `generator` is the term added to the transformed Hamiltonian
/// (the time derivative of the generating function, in new coordinates).
#[derive(Clone, Debug, PartialEq)]
pub struct LinearCanonicalTransformation {
    pub name: String,
    pub substitution: [[ExpSum; 4]; 4],
    pub generator: QuadraticHamiltonian,
}

impl LinearCanonicalTransformation {
    pub fn identity() -> Self {
        Self {
            name: "identity".into(),
            substitution: identity_matrix(),
            generator: QuadraticHamiltonian::zero(),
        }
    }

    /// Builds the map `old = S(t)·new` with the generator it induces,
    /// `G = ½ wᵀ (Sᵀ J Ṡ) w`.
    pub fn from_substitution(name: &str, s: [[ExpSum; 4]; 4]) -> Self {
        let sdot: Matrix4 = std::array::from_fn(|i| std::array::from_fn(|j| s[i][j].derivative()));
        let m = mat_mul(&mat_mul(&transpose(&s), &j_matrix()), &sdot);
        let half = Complex64::new(0.5, 0.0);
        let m_half: Matrix4 = std::array::from_fn(|i| std::array::from_fn(|j| m[i][j].scale(half)));
        Self {
            name: name.into(),
            generator: QuadraticHamiltonian::from_matrix(&m_half),
            substitution: s,
        }
    }

    pub fn matrix_at(&self, t: f64) -> [[Complex64; 4]; 4] {
        eval_matrix(&self.substitution, t)
    }

    pub fn is_time_independent(&self) -> bool {
        self.substitution.iter().flatten().all(ExpSum::is_constant)
    }

    /// `‖Sᵀ J S − J‖_∞` at time `t`.
    pub fn symplectic_defect(&self, t: f64) -> f64 {
        let s = self.matrix_at(t);
        let j = eval_matrix(&j_matrix(), t);
        let mut worst: f64 = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..4 {
                    for l in 0..4 {
                        acc += s[k][a] * j[k][l] * s[l][b];
                    }
                }
                worst = worst.max((acc - j[a][b]).norm());
            }
        }
        worst
    }

    /// Apply `self`, then `next`.
    pub fn then(&self, next: &LinearCanonicalTransformation) -> Result<Self> {
        let pulled = apply_substitution(&self.generator, &next.substitution)?;
        Ok(Self {
            name: format!("{}∘{}", next.name, self.name),
            substitution: mat_mul(&self.substitution, &next.substitution),
            generator: &pulled + &next.generator,
        })
    }

    /// Inverse map, `S⁻¹ = −J Sᵀ J`, with its induced generator.
    pub fn inverse(&self) -> Self {
        let j = j_matrix();
        let inv = mat_mul(&mat_mul(&j, &transpose(&self.substitution)), &j);
        let inv: Matrix4 = std::array::from_fn(|i| std::array::from_fn(|k| -&inv[i][k]));
        Self::from_substitution(&format!("{}^-1", self.name), inv)
    }

    /// Copy with `eps` added to the `q ← q` entry; a deliberately broken map.
    pub fn perturbed(&self, eps: f64) -> Self {
        let mut out = self.clone();
        out.substitution[0][0] = &out.substitution[0][0] + &ExpSum::constant(eps);
        out.name = format!("{}+perturbed", self.name);
        out
    }

    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .substitution
            .iter()
            .map(|row| Value::Array(row.iter().map(|e| json!(e.triples())).collect()))
            .collect();
        json!({
            "name": self.name,
            "substitution": rows,
            "generator": self.generator.to_json(),
        })
    }
}

fn apply_substitution(h: &QuadraticHamiltonian, s: &Matrix4) -> Result<QuadraticHamiltonian> {
    let a = h.matrix();
    let b = mat_mul(&mat_mul(&transpose(s), &a), s);
    let out = QuadraticHamiltonian::from_matrix(&b);
    if out.terms.values().any(|c| !c.is_finite()) {
        return Err(EpsError::Shape(
            "substitution produced non-finite coefficients; the transformation is malformed".into(),
        ));
    }
    Ok(out)
}

/// Rewrites `h` in the new coordinates of `t` and adds the generator term.
pub fn apply_ct(h: &QuadraticHamiltonian, t: &LinearCanonicalTransformation) -> Result<QuadraticHamiltonian> {
    Ok(&apply_substitution(h, &t.substitution)? + &t.generator)
}

fn matrix_from_entries(entries: &[(usize, usize, ExpSum)]) -> Matrix4 {
    let mut s = zero_matrix();
    for (i, j, e) in entries {
        s[*i][*j] = e.clone();
    }
    s
}

/// Decoupling point map: `π_q = π_q1 − p1`, `π_p = π_p1 − q1`, positions unchanged.
pub fn t1_decouple() -> LinearCanonicalTransformation {
    let one = || ExpSum::constant(1.0);
    let s = matrix_from_entries(&[
        (0, 0, one()),
        (1, 1, one()),
        (2, 1, ExpSum::constant(-1.0)),
        (2, 2, one()),
        (3, 0, ExpSum::constant(-1.0)),
        (3, 3, one()),
    ]);
    LinearCanonicalTransformation::from_substitution("T1", s)
}

/// Damping shear: `π_q1 = π_q2 + λq2`, `π_p1 = π_p2 + λp2`.
pub fn t2_shear(params: &PhysParams) -> LinearCanonicalTransformation {
    let l = params.lambda();
    let one = || ExpSum::constant(1.0);
    let s = matrix_from_entries(&[
        (0, 0, one()),
        (1, 1, one()),
        (2, 0, ExpSum::constant(l)),
        (2, 2, one()),
        (3, 1, ExpSum::constant(l)),
        (3, 3, one()),
    ]);
    LinearCanonicalTransformation::from_substitution("T2", s)
}

/// Exponential rescaling generated by `F₂ = q2·π_q3·e^{−λt} + p2·π_p3·e^{λt}`.
pub fn t3_rescale(params: &PhysParams) -> LinearCanonicalTransformation {
    let l = params.lambda();
    let s = matrix_from_entries(&[
        (0, 0, ExpSum::real(1.0, l)),
        (1, 1, ExpSum::real(1.0, -l)),
        (2, 2, ExpSum::real(1.0, -l)),
        (3, 3, ExpSum::real(1.0, l)),
    ]);
    LinearCanonicalTransformation::from_substitution("T3", s)
}

/// Classical counterpart of the unitary scaling: `q3 = e^{−λt}x`, `π_q3 = e^{λt}(π_x − λx)`,
/// `p3 = e^{λt}y`, `π_p3 = e^{−λt}(π_y − λy)`.
pub fn t4_unitary_scaling(params: &PhysParams) -> LinearCanonicalTransformation {
    let l = params.lambda();
    let s = matrix_from_entries(&[
        (0, 0, ExpSum::real(1.0, -l)),
        (1, 1, ExpSum::real(1.0, l)),
        (2, 0, ExpSum::real(-l, l)),
        (2, 2, ExpSum::real(1.0, l)),
        (3, 1, ExpSum::real(-l, -l)),
        (3, 3, ExpSum::real(1.0, -l)),
    ]);
    LinearCanonicalTransformation::from_substitution("T4", s)
}

/// `[T1, T2, T3]`.
pub fn transformation_chain(params: &PhysParams) -> Vec<LinearCanonicalTransformation> {
    vec![t1_decouple(), t2_shear(params), t3_rescale(params)]
}

/// `½π_q² + pπ_q − ½π_p² − qπ_p + ½(f² − 1)(q² − p²)`; decouples under T1 into two
/// oscillators of frequency `f`.
pub fn extended_hamiltonian_at(f: f64) -> QuadraticHamiltonian {
    let c = 0.5 * (f * f - 1.0);
    QuadraticHamiltonian::from_terms([
        (piq2(), ExpSum::constant(0.5)),
        (Monomial::new(Var::P, Var::PiQ), ExpSum::constant(1.0)),
        (pip2(), ExpSum::constant(-0.5)),
        (Monomial::new(Var::Q, Var::PiP), ExpSum::constant(-1.0)),
        (q2(), ExpSum::constant(c)),
        (p2(), ExpSum::constant(-c)),
    ])
}

/// Undamped extended Hamiltonian at the reduced frequency Ω, the starting point of the
/// chain. At `ω = 1, λ = 0` only the four unit-frequency terms remain.
pub fn undamped_extended_hamiltonian(params: &PhysParams) -> QuadraticHamiltonian {
    extended_hamiltonian_at(params.reduced_frequency())
}

/// `½π_q² + ½w²q² − ½π_p² − ½w²p²`.
pub fn harmonic_form(w: Complex64) -> QuadraticHamiltonian {
    let w2 = w * w * 0.5;
    QuadraticHamiltonian::from_terms([
        (piq2(), ExpSum::constant(0.5)),
        (q2(), ExpSum::term(w2, 0.0)),
        (pip2(), ExpSum::constant(-0.5)),
        (p2(), ExpSum::term(-w2, 0.0)),
    ])
}

/// Time-independent damped form `½(π_q² + 2λqπ_q + ω²q²) − ½(π_p² + 2λpπ_p + ω²p²)`.
pub fn damped_extended_hamiltonian(params: &PhysParams) -> QuadraticHamiltonian {
    let (l, w2) = (params.lambda(), params.omega() * params.omega());
    QuadraticHamiltonian::from_terms([
        (piq2(), ExpSum::constant(0.5)),
        (Monomial::new(Var::Q, Var::PiQ), ExpSum::constant(l)),
        (q2(), ExpSum::constant(0.5 * w2)),
        (pip2(), ExpSum::constant(-0.5)),
        (Monomial::new(Var::P, Var::PiP), ExpSum::constant(-l)),
        (p2(), ExpSum::constant(-0.5 * w2)),
    ])
}

/// Caldirola–Kanai pair `½e^{−2λt}π_q² + ½ω²e^{2λt}q² − ½e^{2λt}π_p² − ½ω²e^{−2λt}p²`.
pub fn caldirola_kanai_hamiltonian(params: &PhysParams) -> QuadraticHamiltonian {
    let (l, w2) = (params.lambda(), params.omega() * params.omega());
    QuadraticHamiltonian::from_terms([
        (piq2(), ExpSum::real(0.5, -2.0 * l)),
        (q2(), ExpSum::real(0.5 * w2, 2.0 * l)),
        (pip2(), ExpSum::real(-0.5, 2.0 * l)),
        (p2(), ExpSum::real(-0.5 * w2, -2.0 * l)),
    ])
}

/// `[(label, ℋ), (label, ℋ₁), (label, ℋ₂), (label, ℋ₃)]` obtained by pushing the
/// undamped extended Hamiltonian through the chain one step at a time.
pub fn chain_hamiltonians(params: &PhysParams) -> Result<Vec<(String, QuadraticHamiltonian)>> {
    let mut h = undamped_extended_hamiltonian(params);
    let mut out = vec![("H".to_string(), h.clone())];
    for (k, t) in transformation_chain(params).iter().enumerate() {
        h = apply_ct(&h, t)?;
        out.push((format!("H{}", k + 1), h.clone()));
    }
    Ok(out)
}

/// Composition `T1, T2, T3` as a single map.
pub fn composed_chain(params: &PhysParams) -> Result<LinearCanonicalTransformation> {
    let chain = transformation_chain(params);
    chain[1..]
        .iter()
        .try_fold(chain[0].clone(), |acc, t| acc.then(t))
}

/// Operator on cross-phase-free data equivalent to `h` acting on `e^{−iqp/ħ}·data`.
pub fn from_eps_frame(h: &QuadraticHamiltonian) -> Result<QuadraticHamiltonian> {
    apply_ct(h, &t1_decouple())
}

/// The EPS-frame operator whose action on `e^{−iqp/ħ}·data` reduces to `h` on the data.
pub fn to_eps_frame(h: &QuadraticHamiltonian) -> Result<QuadraticHamiltonian> {
    apply_ct(h, &t1_decouple().inverse())
}

/// Reads `w` off a form that should equal `½π_q² + ½w²q² − ½π_p² − ½w²p²`.
pub fn read_harmonic_frequency(h: &QuadraticHamiltonian, tol: f64) -> Result<Complex64> {
    for (m, c) in h.terms() {
        let expected_square = [piq2(), q2(), pip2(), p2()].contains(m);
        if !expected_square && c.max_amp() > tol {
            return Err(EpsError::Derivation(format!(
                "cross monomial {} survives with coefficient {c}",
                m.tag()
            )));
        }
        if expected_square && !c.is_constant() {
            return Err(EpsError::Derivation(format!(
                "monomial {} keeps time dependence: {c}",
                m.tag()
            )));
        }
    }
    let kin_q = h.coeff(piq2()).constant_part();
    let kin_p = h.coeff(pip2()).constant_part();
    if (kin_q - 0.5).norm() > tol || (kin_p + 0.5).norm() > tol {
        return Err(EpsError::Derivation(format!(
            "kinetic coefficients ({kin_q}, {kin_p}) are not (1/2, -1/2)"
        )));
    }
    let pot_q = h.coeff(q2()).constant_part();
    let pot_p = h.coeff(p2()).constant_part();
    if (pot_q + pot_p).norm() > tol {
        return Err(EpsError::Derivation(format!(
            "actual and image potentials differ: {pot_q} vs {}",
            -pot_p
        )));
    }
    let w2 = pot_q * 2.0;
    let w = if w2.im == 0.0 && w2.re >= 0.0 {
        Complex64::new(w2.re.sqrt(), 0.0)
    } else {
        w2.sqrt()
    };
    if w.re <= 0.0 {
        return Err(EpsError::Derivation(format!("no frequency with positive real part for w² = {w2}")));
    }
    Ok(w)
}

/// ω′ obtained by pushing the Caldirola–Kanai Hamiltonian through the unitary scaling.
pub fn derive_transformed_frequency(params: &PhysParams) -> Result<Complex64> {
    let h = apply_ct(&caldirola_kanai_hamiltonian(params), &t4_unitary_scaling(params))?;
    read_harmonic_frequency(&h, 1e-10)
}

/// Full dump of the chain and the intermediate Hamiltonians.
pub fn chain_dump(params: &PhysParams) -> Result<Value> {
    let transforms: Vec<Value> = transformation_chain(params)
        .iter()
        .chain(std::iter::once(&t4_unitary_scaling(params)))
        .map(|t| t.to_json())
        .collect();
    let mut stages: Vec<Value> = chain_hamiltonians(params)?
        .into_iter()
        .map(|(label, h)| json!({"stage": label, "terms": h.to_json()}))
        .collect();
    let h4 = apply_ct(&caldirola_kanai_hamiltonian(params), &t4_unitary_scaling(params))?;
    stages.push(json!({"stage": "H4", "terms": h4.to_json()}));
    Ok(json!({
        "lambda": params.lambda(),
        "omega": params.omega(),
        "transformations": transforms,
        "hamiltonians": stages,
    }))
}

/// Which one-coordinate factor a scaling acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Oscillator {
    Actual,
    Image,
}

impl Oscillator {
    pub fn sign(self) -> f64 {
        match self {
            Oscillator::Actual => 1.0,
            Oscillator::Image => -1.0,
        }
    }
}

/// Quantum action of the unitary scaling on one coordinate factor at time `t`:
/// `g(x) = e^{sλt/2}·exp(−iλe^{2sλt}x²/2ħ)·f(e^{sλt}x)` with `s = ±1` for actual/image.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScalingAction {
    pub direction: Oscillator,
    pub lambda: f64,
    pub hbar: f64,
    pub t: f64,
}

impl ScalingAction {
    pub fn new(direction: Oscillator, params: &PhysParams, t: f64) -> Self {
        ScalingAction {
            direction,
            lambda: params.lambda(),
            hbar: params.hbar(),
            t,
        }
    }

    fn rate(&self) -> f64 {
        self.direction.sign() * self.lambda * self.t
    }

    pub fn apply_fn(&self, f: impl Fn(f64) -> Complex64, x: f64) -> Complex64 {
        let r = self.rate();
        let phase = -self.lambda * (2.0 * r).exp() * x * x / (2.0 * self.hbar);
        Complex64::from_polar((0.5 * r).exp(), phase) * f(r.exp() * x)
    }

    pub fn invert_fn(&self, g: impl Fn(f64) -> Complex64, y: f64) -> Complex64 {
        let r = self.rate();
        let phase = self.lambda * y * y / (2.0 * self.hbar);
        Complex64::from_polar((-0.5 * r).exp(), phase) * g((-r).exp() * y)
    }

    fn sampled(&self, grid: &GridSpec, samples: &[Complex64], forward: bool) -> Result<Vec<Complex64>> {
        grid.check()?;
        if samples.len() != grid.len() {
            return Err(EpsError::Grid(format!(
                "expected {} samples, got {}",
                grid.len(),
                samples.len()
            )));
        }
        let negligible_tail = tail_is_negligible(samples, 4, 1e-9);
        let lookup = |x: f64| -> Result<Complex64> {
            match interpolate(grid, samples, x) {
                Some(v) => Ok(v),
                None if negligible_tail => Ok(Complex64::new(0.0, 0.0)),
                None => Err(EpsError::Grid(format!(
                    "rescaled argument {x} leaves [-{0}, {0}] while the samples are not negligible there",
                    grid.extent
                ))),
            }
        };
        grid.nodes()
            .into_iter()
            .map(|x| {
                let r = self.rate();
                if forward {
                    let v = lookup(r.exp() * x)?;
                    Ok(self.apply_fn(|_| v, x))
                } else {
                    let v = lookup((-r).exp() * x)?;
                    Ok(self.invert_fn(|_| v, x))
                }
            })
            .collect()
    }

    pub fn apply_samples(&self, grid: &GridSpec, samples: &[Complex64]) -> Result<Vec<Complex64>> {
        self.sampled(grid, samples, true)
    }

    pub fn invert_samples(&self, grid: &GridSpec, samples: &[Complex64]) -> Result<Vec<Complex64>> {
        self.sampled(grid, samples, false)
    }
}

/// Applies the unitary scaling to 1-D samples.
pub fn unitary_scaling_action(
    samples: &[Complex64],
    grid: &GridSpec,
    direction: Oscillator,
    params: &PhysParams,
    t: f64,
) -> Result<Vec<Complex64>> {
    ScalingAction::new(direction, params, t).apply_samples(grid, samples)
}
