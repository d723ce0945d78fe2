//! Second-sheet S-matrix with a single `r`-th order resonance pole, its
//! partial-fraction expansion, and pole-term quantities obtained from
//! contour derivatives of analytic test functions.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::algebra::binom_f64;
use crate::error::{Error, Result};

/// Pole position `z_R = E_R − iΓ/2` together with its order `r`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResonancePole {
    energy: f64,
    width: f64,
    order: usize,
}

impl ResonancePole {
    pub fn new(energy: f64, width: f64, order: usize) -> Result<Self> {
        if !(energy.is_finite() && energy > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "resonance energy must be finite and > 0, got {energy}"
            )));
        }
        if !(width.is_finite() && width > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "resonance width must be finite and > 0, got {width}"
            )));
        }
        if order == 0 {
            return Err(Error::InvalidParameter("pole order must be >= 1".into()));
        }
        Ok(Self {
            energy,
            width,
            order,
        })
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn z_r(&self) -> Complex64 {
        Complex64::new(self.energy, -0.5 * self.width)
    }

    /// Mirror pole `z_R*` in the upper half-plane.
    pub fn z_r_conj(&self) -> Complex64 {
        self.z_r().conj()
    }
}

/// Background phase `γ(ω)`, an entire (polynomial) function of the energy.
#[derive(Clone, Debug, PartialEq)]
pub enum BackgroundPhase {
    Constant(f64),
    /// Coefficients of `γ(ω) = Σ_i c_i ω^i`, lowest power first.
    Polynomial(Vec<f64>),
}

impl Default for BackgroundPhase {
    fn default() -> Self {
        BackgroundPhase::Constant(0.0)
    }
}

impl BackgroundPhase {
    pub fn coefficients(&self) -> &[f64] {
        match self {
            BackgroundPhase::Constant(c) => std::slice::from_ref(c),
            BackgroundPhase::Polynomial(cs) => cs,
        }
    }

    pub fn eval(&self, omega: Complex64) -> Complex64 {
        self.coefficients()
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * omega + c)
    }

    /// `e^{2iγ(ω)}`.
    pub fn phase_factor(&self, omega: Complex64) -> Complex64 {
        (Complex64::i() * 2.0 * self.eval(omega)).exp()
    }

    fn validate(&self) -> Result<()> {
        if self.coefficients().iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter(
                "background phase coefficients must be finite".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SMatrixModel {
    pub pole: ResonancePole,
    pub gamma: BackgroundPhase,
    /// Fold `e^{2iγ(ω)}` into the kets, so pole-term ψ-legs carry the phase.
    pub absorb_gauge: bool,
}

impl SMatrixModel {
    /// Model with vanishing background phase and the gauge absorbed.
    pub fn new(pole: ResonancePole) -> Self {
        Self {
            pole,
            gamma: BackgroundPhase::default(),
            absorb_gauge: true,
        }
    }

    pub fn with_background(mut self, gamma: BackgroundPhase) -> Result<Self> {
        gamma.validate()?;
        self.gamma = gamma;
        Ok(self)
    }

    pub fn with_absorb_gauge(mut self, absorb: bool) -> Self {
        self.absorb_gauge = absorb;
        self
    }

    pub fn order(&self) -> usize {
        self.pole.order
    }

    pub fn width(&self) -> f64 {
        self.pole.width
    }
}

/// One term `c / (ω − i·a)^m` of a rational test function.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RationalTerm {
    pub a: f64,
    pub m: u32,
    pub c: Complex64,
}

impl RationalTerm {
    pub fn new(a: f64, m: u32, c: Complex64) -> Result<Self> {
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "test-function pole offset must be > 0, got {a}"
            )));
        }
        if m == 0 {
            return Err(Error::InvalidParameter(
                "test-function pole multiplicity must be >= 1".into(),
            ));
        }
        if !(c.re.is_finite() && c.im.is_finite()) {
            return Err(Error::InvalidParameter(
                "test-function weight must be finite".into(),
            ));
        }
        Ok(Self { a, m, c })
    }

    pub fn pole(&self) -> Complex64 {
        Complex64::new(0.0, self.a)
    }

    pub fn eval(&self, omega: Complex64) -> Complex64 {
        self.c / (omega - self.pole()).powu(self.m)
    }
}

/// `f(ω) = Σ_j c_j / (ω − i a_j)^{m_j}` with every `a_j > 0`: analytic in the
/// closed lower half-plane and square integrable on the real axis.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RationalTestFunction {
    terms: Vec<RationalTerm>,
}

impl RationalTestFunction {
    pub fn new(terms: Vec<RationalTerm>) -> Self {
        Self { terms }
    }

    /// The function identically zero.
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn terms(&self) -> &[RationalTerm] {
        &self.terms
    }

    pub fn eval(&self, omega: Complex64) -> Complex64 {
        self.terms.iter().map(|t| t.eval(omega)).sum()
    }

    /// Distance from `z` to the nearest singularity, infinite for the zero function.
    pub fn singularity_distance(&self, z: Complex64) -> f64 {
        self.terms
            .iter()
            .map(|t| (z - t.pole()).norm())
            .fold(f64::INFINITY, f64::min)
    }
}

/// Detector-side `⟨ψ⁻|ω⁻⟩` and preparation-side `⟨⁺ω|φ⁺⟩` amplitudes.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TestFunctionPair {
    pub psi: RationalTestFunction,
    pub phi: RationalTestFunction,
}

impl TestFunctionPair {
    pub fn new(psi: RationalTestFunction, phi: RationalTestFunction) -> Self {
        Self { psi, phi }
    }
}

/// `S_II(ω) = ((ω − z_R*)/(ω − z_R))^r · e^{2iγ(ω)}`.
pub fn s_matrix_eval(model: &SMatrixModel, omega: Complex64) -> Result<Complex64> {
    let z = model.pole.z_r();
    let distance = (omega - z).norm();
    if distance < 1e-14 * model.width() {
        return Err(Error::PoleEvaluation { distance });
    }
    let ratio = (omega - model.pole.z_r_conj()) / (omega - z);
    Ok(ratio.powu(model.order() as u32) * model.gamma.phase_factor(omega))
}

/// Coefficients `c_l = C(r,l)(−iΓ)^l`, `l = 1..r`, of
/// `S_II(ω) = e^{2iγ}(1 + Σ_l c_l/(ω − z_R)^l)`.
pub fn pole_expansion_coeffs(model: &SMatrixModel) -> Vec<Complex64> {
    let r = model.order() as u64;
    let gamma = model.width();
    (1..=r)
        .map(|l| {
            let phase = minus_i_pow(l as usize);
            if r <= 20 {
                phase * binom_f64(r, l as i64) * gamma.powi(l as i32)
            } else {
                phase * (ln_binom(r, l) + l as f64 * gamma.ln()).exp()
            }
        })
        .collect()
}

/// Evaluates the partial-fraction form of the S-matrix from
/// [`pole_expansion_coeffs`].
pub fn s_matrix_partial_fractions(model: &SMatrixModel, omega: Complex64) -> Result<Complex64> {
    let z = model.pole.z_r();
    let distance = (omega - z).norm();
    if distance < 1e-14 * model.width() {
        return Err(Error::PoleEvaluation { distance });
    }
    let inv = 1.0 / (omega - z);
    let mut power = Complex64::new(1.0, 0.0);
    let mut sum = Complex64::new(1.0, 0.0);
    for c in pole_expansion_coeffs(model) {
        power *= inv;
        sum += c * power;
    }
    Ok(sum * model.gamma.phase_factor(omega))
}

const START_NODES: usize = 64;
const MAX_NODES: usize = 4096;
const CONTOUR_TOL: f64 = 1e-12;

/// Derivatives `f⁽⁰⁾(z0) … f⁽ⁿ⁾(z0)` from the Cauchy integral formula on the
/// circle `|ω − z0| = radius`, discretised by the trapezoidal rule.
///
/// The node count doubles from 64 until two successive estimates of every
/// normalised Taylor coefficient `f⁽ᵏ⁾(z0)·radiusᵏ/k!` agree to `1e-12`
/// relative to `max |f|` on the circle. Fails with
/// [`Error::NoConvergence`] if 4096 nodes are not enough.
pub fn analytic_derivatives<F>(f: F, z0: Complex64, n_max: usize, radius: f64) -> Result<Vec<Complex64>>
where
    F: Fn(Complex64) -> Complex64,
{
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "contour radius must be finite and > 0, got {radius}"
        )));
    }
    if !(z0.re.is_finite() && z0.im.is_finite()) {
        return Err(Error::InvalidParameter("contour centre must be finite".into()));
    }

    let node = |j: usize, n: usize| {
        let theta = 2.0 * PI * j as f64 / n as f64;
        f(z0 + Complex64::from_polar(radius, theta))
    };

    let mut nodes = START_NODES;
    let mut samples: Vec<Complex64> = (0..nodes).map(|j| node(j, nodes)).collect();
    let mut previous = taylor_coefficients(&samples, n_max);
    loop {
        if nodes >= MAX_NODES {
            return Err(Error::NoConvergence { nodes });
        }
        let doubled = nodes * 2;
        // Even nodes of the refined rule coincide with the current ones.
        samples = samples
            .iter()
            .enumerate()
            .flat_map(|(j, &v)| [v, node(2 * j + 1, doubled)])
            .collect();
        nodes = doubled;

        let current = taylor_coefficients(&samples, n_max);
        let scale = samples.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if !scale.is_finite() || samples.iter().any(|v| v.is_nan()) {
            return Err(Error::NoConvergence { nodes });
        }
        let converged = current
            .iter()
            .zip(&previous)
            .all(|(a, b)| (a - b).norm() <= CONTOUR_TOL * scale);
        if converged {
            let mut factor = 1.0;
            return Ok(current
                .into_iter()
                .enumerate()
                .map(|(k, a)| {
                    if k > 0 {
                        factor *= k as f64 / radius;
                    }
                    a * factor
                })
                .collect());
        }
        previous = current;
    }
}

/// `a_k = (1/N) Σ_j f(ω_j) e^{−2πi jk/N}`, the Taylor coefficients scaled by `radiusᵏ`.
fn taylor_coefficients(samples: &[Complex64], n_max: usize) -> Vec<Complex64> {
    let n = samples.len();
    (0..=n_max)
        .map(|k| {
            let sum: Complex64 = samples
                .iter()
                .enumerate()
                .map(|(j, &v)| {
                    let phase = ((j * k) % n) as f64 / n as f64;
                    v * Complex64::from_polar(1.0, -2.0 * PI * phase)
                })
                .sum();
            sum / n as f64
        })
        .collect()
}

/// Contour radius for derivatives of order `<= n_max` about `z_R`.
///
/// Half the distance to the nearest test-function singularity, and no more
/// than `max(n_max, 1)/t` when a factor `e^{−iωt}` is present.
pub(crate) fn contour_radius(model: &SMatrixModel, singularity_distance: f64, t: f64, n_max: usize) -> f64 {
    let mut radius = if singularity_distance.is_finite() {
        0.5 * singularity_distance
    } else {
        0.25 * model.width()
    };
    if t > 0.0 {
        radius = radius.min(n_max.max(1) as f64 / t);
    }
    radius
}

/// `(−i)^k`.
fn minus_i_pow(k: usize) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, -1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, 1.0),
    }
}

fn factorial_f64(n: usize) -> f64 {
    (2..=n).map(|k| k as f64).product()
}

fn ln_factorial(n: u64) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

fn ln_binom(n: u64, k: u64) -> f64 {
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// `C(r, n+1)(−iΓ)^{n+1}(−2πi/n!) = −2πΓ·C(r, n+1)(−iΓ)ⁿ/n!`.
fn pole_weight(r: usize, n: usize, gamma: f64) -> Complex64 {
    let phase = minus_i_pow(n);
    let magnitude = if r <= 20 {
        binom_f64(r as u64, n as i64 + 1) * gamma.powi(n as i32) / factorial_f64(n)
    } else {
        (ln_binom(r as u64, n as u64 + 1) + n as f64 * gamma.ln() - ln_factorial(n as u64)).exp()
    };
    phase * (-2.0 * PI * gamma * magnitude)
}

/// ψ-leg of the pole term at detector delay `t`: `e^{−iωt}⟨ψ⁻|ω⁻⟩`, times
/// `e^{2iγ(ω)}` when the gauge is absorbed into the kets.
fn psi_leg<'a>(model: &'a SMatrixModel, psi: &'a RationalTestFunction, t: f64) -> impl Fn(Complex64) -> Complex64 + 'a {
    let gamma = &model.gamma;
    let absorb = model.absorb_gauge;
    move |omega| {
        let mut v = psi.eval(omega);
        if t != 0.0 {
            v *= (Complex64::new(0.0, -t) * omega).exp();
        }
        if absorb {
            v *= gamma.phase_factor(omega);
        }
        v
    }
}

/// Derivatives `ψ⁽ᵏ⁾(z_R)`, `k < r`, of the ψ-leg at detector delay `t`.
pub(crate) fn psi_derivatives(model: &SMatrixModel, psi: &RationalTestFunction, t: f64) -> Result<Vec<Complex64>> {
    let z = model.pole.z_r();
    let n_max = model.order() - 1;
    let radius = contour_radius(model, psi.singularity_distance(z), t, n_max);
    analytic_derivatives(psi_leg(model, psi, t), z, n_max, radius)
}

fn phi_derivatives(model: &SMatrixModel, phi: &RationalTestFunction) -> Result<Vec<Complex64>> {
    let z = model.pole.z_r();
    let n_max = model.order() - 1;
    let radius = contour_radius(model, phi.singularity_distance(z), 0.0, n_max);
    analytic_derivatives(|w| phi.eval(w), z, n_max, radius)
}

/// Pole term `(ψ⁻, φ⁺)_{P.T.}`:
/// `Σ_n C(r,n+1)(−iΓ)^{n+1}(−2πi/n!) Σ_k C(n,k) ψ⁽ᵏ⁾(z_R) φ⁽ⁿ⁻ᵏ⁾(z_R)`.
pub fn pole_term(pair: &TestFunctionPair, model: &SMatrixModel) -> Result<Complex64> {
    pole_term_at(pair, model, 0.0)
}

/// Pole term with the observable translated by `t >= 0`, i.e. the ψ-leg
/// replaced by `e^{−iωt}ψ(ω)`.
pub fn pole_term_at(pair: &TestFunctionPair, model: &SMatrixModel, t: f64) -> Result<Complex64> {
    if t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    let r = model.order();
    let gamma = model.width();
    let dpsi = psi_derivatives(model, &pair.psi, t)?;
    let dphi = phi_derivatives(model, &pair.phi)?;
    Ok((0..r)
        .map(|n| {
            let leibniz: Complex64 = (0..=n)
                .map(|k| binom_f64(n as u64, k as i64) * dpsi[k] * dphi[n - k])
                .sum();
            pole_weight(r, n, gamma) * leibniz
        })
        .sum())
}

/// Coefficients `b_k` of the complex basis-vector expansion,
/// `b_k = −2πΓ Σ_{n=k}^{r−1} C(r,n+1) C(n,k) ((−iΓ)ⁿ/n!) φ⁽ⁿ⁻ᵏ⁾(z_R)`,
/// so that the pole term equals `Σ_k b_k ψ⁽ᵏ⁾(z_R)`.
pub fn expansion_coeffs(phi: &RationalTestFunction, model: &SMatrixModel) -> Result<Vec<Complex64>> {
    let r = model.order();
    let gamma = model.width();
    let dphi = phi_derivatives(model, phi)?;
    Ok((0..r)
        .map(|k| {
            (k..r)
                .map(|n| pole_weight(r, n, gamma) * binom_f64(n as u64, k as i64) * dphi[n - k])
                .sum()
        })
        .collect())
}

/// Energy profile `|1/(E − z_R)^{n+1}|²` on the grid, scaled so its maximum is 1.
pub fn lineshape(model: &SMatrixModel, n: usize, grid: &[f64]) -> Result<Vec<f64>> {
    let r = model.order();
    if n >= r {
        return Err(Error::IndexOutOfRange { index: n, dim: r });
    }
    let z = model.pole.z_r();
    // Work with logarithms so high orders do not underflow.
    let logs: Vec<f64> = grid
        .iter()
        .map(|&e| -((n + 1) as f64) * (Complex64::new(e, 0.0) - z).norm_sqr().ln())
        .collect();
    let peak = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(logs.into_iter().map(|l| (l - peak).exp()).collect())
}
