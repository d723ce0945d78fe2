//! State operators on the resonance subspace and their time evolution.
//!
//! Coefficients are kept exactly in the dimensionless convention `Γ := 1`:
//! the physical coefficient of `|k⟩⟨l|` is `scale · Γ^{k+l} · A_{kl}`. Since
//! `diag(Γᵏ)` conjugates `P(t)` into `P(Γt)`, the evolution of `A` is a
//! polynomial in `τ = Γt` with exact coefficients, times `e^{−Γt}`.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::f64::consts::PI;

use crate::algebra::{
    binom_int, factorial, ExpPolyMatrix, GaussianRational, Polynomial, Scalar, SquareMatrix,
};
use crate::error::{Error, Result};
use crate::jordan::{conjugate_by_evolution, GamowSubspace, Normalization};
use crate::smatrix::{psi_derivatives, RationalTestFunction, SMatrixModel};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Representation {
    /// Dyads `|z⁻⟩⁽ᵏ⁾⟨⁻z|`, the state prepared in a decay experiment.
    Decay,
    /// Dyads `|z^γ⟩⁽ᵏ⁾⟨⁺z|`, as read off the pole term of a scattering experiment.
    Scattering,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateOperator {
    pub space: GamowSubspace,
    coeffs: SquareMatrix<GaussianRational>,
    scale: Complex64,
    pub representation: Representation,
}

impl StateOperator {
    /// Builds an operator from dimensionless coefficients `A_{kl}`.
    pub fn from_coefficients(
        space: GamowSubspace,
        coeffs: SquareMatrix<GaussianRational>,
        representation: Representation,
    ) -> Result<Self> {
        if coeffs.dim() != space.dim() {
            return Err(Error::InvalidParameter(format!(
                "coefficient matrix of dimension {} on a subspace of dimension {}",
                coeffs.dim(),
                space.dim()
            )));
        }
        Ok(Self {
            space,
            coeffs,
            scale: Complex64::new(1.0, 0.0),
            representation,
        })
    }

    /// Builds an operator from physical coefficients. Floats are converted
    /// exactly, so `matrix()` returns `m` unchanged up to the final rounding.
    pub fn from_matrix(
        space: GamowSubspace,
        m: &SquareMatrix<Complex64>,
        representation: Representation,
    ) -> Result<Self> {
        let gamma = GaussianRational::from_f64(space.pole.width(), 0.0)
            .ok_or_else(|| Error::InvalidParameter("width is not finite".into()))?;
        let inv_gamma = gamma.inv().expect("width is positive");
        let mut coeffs = SquareMatrix::zeros(m.dim());
        for ((k, l), v) in m.entries() {
            let exact = GaussianRational::from_f64(v.re, v.im).ok_or_else(|| {
                Error::InvalidParameter(format!("non-finite coefficient at ({k}, {l})"))
            })?;
            coeffs[(k, l)] = exact * pow(&inv_gamma, k + l);
        }
        Self::from_coefficients(space, coeffs, representation)
    }

    pub fn with_scale(mut self, scale: Complex64) -> Self {
        self.scale = scale;
        self
    }

    pub fn scale(&self) -> Complex64 {
        self.scale
    }

    /// Dimensionless coefficients `A_{kl}` (`Γ := 1`, scale factored out).
    pub fn coefficients(&self) -> &SquareMatrix<GaussianRational> {
        &self.coeffs
    }

    pub fn dim(&self) -> usize {
        self.coeffs.dim()
    }

    /// Physical coefficient matrix over the dyads `|k⟩⟨l|`.
    pub fn matrix(&self) -> SquareMatrix<Complex64> {
        let gamma = self.space.pole.width();
        SquareMatrix::from_fn(self.dim(), |k, l| {
            self.scale * gamma.powi((k + l) as i32) * self.coeffs[(k, l)].to_complex()
        })
    }

    pub fn norm(&self) -> f64 {
        self.matrix().frobenius_norm()
    }

    fn require_decay(&self) -> Result<()> {
        if self.representation != Representation::Decay {
            return Err(Error::WrongRepresentation { expected: "decay" });
        }
        Ok(())
    }
}

fn pow(x: &GaussianRational, k: usize) -> GaussianRational {
    (0..k).fold(GaussianRational::one(), |acc, _| acc * x.clone())
}

fn rational(num: &BigInt, den: &BigInt) -> GaussianRational {
    GaussianRational::from_ratio(num, den)
}

/// Dimensionless `W⁽ⁿ⁾`: `C(n,k)/n!` at `(k, n−k)`.
fn w_n_coefficients(dim: usize, n: usize) -> SquareMatrix<GaussianRational> {
    let nf = BigInt::from(factorial(n as u64));
    let mut a = SquareMatrix::zeros(dim);
    for k in 0..=n {
        a[(k, n - k)] = rational(&binom_int(n as i64, k as i64), &nf);
    }
    a
}

/// `W⁽ⁿ⁾ = (Γⁿ/n!) Σ_k C(n,k) |k⟩⟨n−k|` over derivative kets; in the
/// factorial basis the same operator reads `Γⁿ Σ_k |k⟩⟨n−k|`.
pub fn w_n(space: &GamowSubspace, n: usize) -> Result<StateOperator> {
    let r = space.dim();
    if n >= r {
        return Err(Error::IndexOutOfRange { index: n, dim: r });
    }
    StateOperator::from_coefficients(
        *space,
        in_basis(space.normalization, w_n_coefficients(r, n)),
        Representation::Decay,
    )
}

/// Re-expresses derivative-basis coefficients in the space's basis:
/// `|k⟩_f = |k⟩_d / k!` multiplies the coefficient of `|k⟩⟨l|` by `k!·l!`.
fn in_basis(normalization: Normalization, a: SquareMatrix<GaussianRational>) -> SquareMatrix<GaussianRational> {
    match normalization {
        Normalization::Derivative => a,
        Normalization::Factorial => SquareMatrix::from_fn(a.dim(), |k, l| {
            a[(k, l)].clone() * GaussianRational::from_bigint(&BigInt::from(factorial(k as u64) * factorial(l as u64)))
        }),
    }
}

/// Dimensionless coefficients of `W` with the factor `2πΓ` removed:
/// `Σ_n C(r,n+1)(−i)ⁿ (1/n!) Σ_k C(n,k)|k⟩⟨n−k|`.
pub fn w_total_coefficients(r: usize) -> SquareMatrix<GaussianRational> {
    let mut a = SquareMatrix::zeros(r);
    for n in 0..r {
        let weight = GaussianRational::from_bigint(&binom_int(r as i64, n as i64 + 1))
            * GaussianRational::i_pow(-(n as i64));
        a = a.add(&w_n_coefficients(r, n).scale(&weight));
    }
    a
}

/// `W = 2πΓ Σ_n C(r,n+1)(−i)ⁿ W⁽ⁿ⁾`.
pub fn w_total(space: &GamowSubspace) -> StateOperator {
    StateOperator {
        space: *space,
        coeffs: in_basis(space.normalization, w_total_coefficients(space.dim())),
        scale: Complex64::new(2.0 * PI * space.pole.width(), 0.0),
        representation: Representation::Decay,
    }
}

/// Operator determined by the pole term: the coefficients of [`w_total`] on
/// the scattering dyads.
pub fn w_pole_term(space: &GamowSubspace) -> StateOperator {
    StateOperator {
        representation: Representation::Scattering,
        ..w_total(space)
    }
}

/// The dyad `|k⟩⟨l|` with unit physical coefficient.
pub fn dyad(space: &GamowSubspace, k: usize, l: usize) -> Result<StateOperator> {
    let r = space.dim();
    for idx in [k, l] {
        if idx >= r {
            return Err(Error::IndexOutOfRange { index: idx, dim: r });
        }
    }
    let mut m = SquareMatrix::zeros(r);
    m[(k, l)] = Complex64::new(1.0, 0.0);
    StateOperator::from_matrix(*space, &m, Representation::Decay)
}

/// Polynomial part of `T(τ)·A·T(τ)†` in `τ = Γt`, exact.
pub fn evolve_exact(w: &StateOperator) -> Result<SquareMatrix<Polynomial<GaussianRational>>> {
    w.require_decay()?;
    Ok(conjugate_by_evolution(w.space.normalization, &w.coeffs))
}

/// `evolve_exact(W) − A`: identically zero iff `W` decays purely exponentially.
pub fn exponential_remainder(w: &StateOperator) -> Result<SquareMatrix<Polynomial<GaussianRational>>> {
    let evolved = evolve_exact(w)?;
    Ok(SquareMatrix::from_fn(w.dim(), |i, j| {
        &evolved[(i, j)] - &Polynomial::constant(w.coeffs[(i, j)].clone())
    }))
}

/// Largest integer magnitude carried exactly by an `f64`.
const F64_EXACT_INT: f64 = 9_007_199_254_740_992.0;

/// Polynomial part in `τ`, computed in floating point.
///
/// The conjugation runs in the derivative basis, where `P(τ)` has integer
/// coefficients. When `A` clears to Gaussian integers of moderate size every
/// `f64` operation of the conjugation is exact.
fn evolve_float_tau(w: &StateOperator) -> SquareMatrix<Polynomial<Complex64>> {
    let r = w.dim();
    let factorial_basis = w.space.normalization == Normalization::Factorial;
    let k_fact = |k: usize| BigInt::from(factorial(k as u64));
    // |k⟩_f = |k⟩_d / k!
    let a = if factorial_basis {
        SquareMatrix::from_fn(r, |k, l| {
            w.coeffs[(k, l)].clone() * rational(&BigInt::one(), &(k_fact(k) * k_fact(l)))
        })
    } else {
        w.coeffs.clone()
    };
    let back = |k: usize, l: usize| {
        if factorial_basis {
            (1..=k).chain(1..=l).map(|v| v as f64).product()
        } else {
            1.0
        }
    };

    if let Some((ints, denom)) = integer_form(&a) {
        let max_entry = ints.entries().map(|(_, v)| v.re.abs().max(v.im.abs())).fold(0.0, f64::max);
        // Column sums of |P| are at most 2^{r−1}.
        let bound = max_entry * 4f64.powi(r as i32) * (r * r) as f64;
        if bound < F64_EXACT_INT {
            let polys = conjugate_by_evolution(Normalization::Derivative, &ints);
            return SquareMatrix::from_fn(r, |k, l| {
                polys[(k, l)].scale(&Complex64::new(back(k, l) / denom, 0.0))
            });
        }
    }
    let polys = conjugate_by_evolution(Normalization::Derivative, &a.to_complex());
    SquareMatrix::from_fn(r, |k, l| polys[(k, l)].scale(&Complex64::new(back(k, l), 0.0)))
}

/// Multiplies through by the common denominator; `None` if the result does
/// not fit in `f64` integers.
fn integer_form(a: &SquareMatrix<GaussianRational>) -> Option<(SquareMatrix<Complex64>, f64)> {
    let mut lcm = BigInt::one();
    for (_, v) in a.entries() {
        lcm = lcm.lcm(v.re.denom()).lcm(v.im.denom());
    }
    let to_f64 = |x: &BigInt| {
        let f = x.to_f64()?;
        (x.abs() < BigInt::from(1u64 << 53)).then_some(f)
    };
    let denom = to_f64(&lcm)?;
    let mut out = SquareMatrix::zeros(a.dim());
    for ((i, j), v) in a.entries() {
        let re = v.re.numer() * (&lcm / v.re.denom());
        let im = v.im.numer() * (&lcm / v.im.denom());
        out[(i, j)] = Complex64::new(to_f64(&re)?, to_f64(&im)?);
    }
    Some((out, denom))
}

/// `T(t)·W·T(t)†` with the envelope `e^{−Γt}` carried as the rate.
pub fn evolve_symbolic(w: &StateOperator) -> Result<ExpPolyMatrix<Complex64>> {
    w.require_decay()?;
    let gamma = w.space.pole.width();
    let tau = evolve_float_tau(w);
    let polys = SquareMatrix::from_fn(w.dim(), |k, l| {
        let coeffs = tau[(k, l)]
            .coeffs()
            .iter()
            .enumerate()
            .map(|(p, c)| w.scale * gamma.powi((k + l + p) as i32) * c)
            .collect();
        Polynomial::new(coeffs)
    });
    Ok(ExpPolyMatrix::new(Complex64::new(-gamma, 0.0), polys))
}

/// `W(t)` at one time, with the envelope kept apart from the polynomial part.
#[derive(Clone, Debug, PartialEq)]
pub struct EvolvedOperator {
    pub t: f64,
    /// `e^{−Γt}`.
    pub envelope: f64,
    /// `e^{Γt}·W(t)`; equals `W` for a purely exponential decay.
    pub polynomial_part: SquareMatrix<Complex64>,
}

impl EvolvedOperator {
    pub fn value(&self) -> SquareMatrix<Complex64> {
        self.polynomial_part.scale(&Complex64::new(self.envelope, 0.0))
    }

    /// `‖W(t)‖_F`, without forming the product with a tiny envelope first.
    pub fn norm(&self) -> f64 {
        self.envelope * self.polynomial_part.frobenius_norm()
    }

    /// `‖e^{Γt}W(t) − W‖_F / ‖W‖_F` for the operator this came from.
    pub fn envelope_deviation(&self, w: &StateOperator) -> f64 {
        let base = w.matrix();
        relative(self.polynomial_part.sub(&base).frobenius_norm(), base.frobenius_norm())
    }
}

/// `W(t) = T(t)·W·T(t)†`.
pub fn evolve_operator(w: &StateOperator, t: f64) -> Result<EvolvedOperator> {
    w.require_decay()?;
    if t.is_nan() || t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    let gamma = w.space.pole.width();
    let tau = evolve_float_tau(w);
    let polynomial_part = SquareMatrix::from_fn(w.dim(), |k, l| {
        w.scale * gamma.powi((k + l) as i32) * tau[(k, l)].eval_f64(gamma * t)
    });
    Ok(EvolvedOperator {
        t,
        envelope: (-gamma * t).exp(),
        polynomial_part,
    })
}

/// [`evolve_operator`] evaluated from the exact polynomial coefficients.
pub fn evolve_operator_exact(w: &StateOperator, t: f64) -> Result<EvolvedOperator> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    let gamma = w.space.pole.width();
    let polys = evolve_exact(w)?;
    let polynomial_part = SquareMatrix::from_fn(w.dim(), |k, l| {
        w.scale * gamma.powi((k + l) as i32) * polys[(k, l)].eval_f64(gamma * t)
    });
    Ok(EvolvedOperator {
        t,
        envelope: (-gamma * t).exp(),
        polynomial_part,
    })
}

/// `max_t ‖W(t) − e^{−Γt}W‖_F / ‖W‖_F` over the grid.
pub fn decay_deviation(w: &StateOperator, t_grid: &[f64]) -> Result<f64> {
    if t_grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let base = w.matrix();
    let norm = base.frobenius_norm();
    let mut worst: f64 = 0.0;
    for &t in t_grid {
        let e = evolve_operator(w, t)?;
        let diff = e.polynomial_part.sub(&base).frobenius_norm() * e.envelope;
        worst = worst.max(relative(diff, norm));
    }
    Ok(worst)
}

/// `‖e^{Γt}W(t) − W‖_F / ‖W‖_F`: deviation with the envelope divided out.
pub fn envelope_deviation(w: &StateOperator, t: f64) -> Result<f64> {
    Ok(evolve_operator(w, t)?.envelope_deviation(w))
}

fn relative(diff: f64, norm: f64) -> f64 {
    if norm == 0.0 {
        diff
    } else {
        diff / norm
    }
}

/// `|(ψ⁻(t), φ⁺)_{P.T.}|²`.
pub fn pole_term_probability(
    pair: &crate::smatrix::TestFunctionPair,
    model: &SMatrixModel,
    t: f64,
) -> Result<f64> {
    Ok(crate::smatrix::pole_term_at(pair, model, t)?.norm_sqr())
}

/// `⟨ψ⁻(t)|W|ψ⁻(t)⟩ = Σ_{kl} W_{kl} ψ_k(t) conj(ψ_l(t))`, with
/// `ψ_k(t)` the `k`-th derivative of `e^{−iωt}ψ(ω)` at `z_R`.
pub fn detector_expectation(
    w: &StateOperator,
    psi: &RationalTestFunction,
    model: &SMatrixModel,
    t: f64,
) -> Result<Complex64> {
    w.require_decay()?;
    if t.is_nan() || t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    if model.order() != w.dim() {
        return Err(Error::InvalidParameter(format!(
            "model of order {} with an operator of dimension {}",
            model.order(),
            w.dim()
        )));
    }
    let d = psi_derivatives(model, psi, t)?;
    let m = w.matrix();
    let mut acc = Complex64::zero();
    for ((k, l), v) in m.entries() {
        acc += v * d[k] * d[l].conj();
    }
    Ok(acc)
}

/// Real part of [`detector_expectation`]; the whole value for Hermitian `W`.
pub fn detector_probability(
    w: &StateOperator,
    psi: &RationalTestFunction,
    model: &SMatrixModel,
    t: f64,
) -> Result<f64> {
    Ok(detector_expectation(w, psi, model, t)?.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smatrix::{RationalTerm, ResonancePole};
    use proptest::prelude::*;

    fn space(r: usize) -> GamowSubspace {
        GamowSubspace::new(ResonancePole::new(4.0, 0.6, r).unwrap(), Normalization::Derivative)
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: &SquareMatrix<Complex64>, b: &SquareMatrix<Complex64>, tol: f64) -> bool {
        a.sub(b).frobenius_norm() <= tol * b.frobenius_norm().max(1e-300)
    }

    #[test]
    fn w_n_examples() {
        let s = space(3);
        let g = s.pole.width();
        let w0 = w_n(&s, 0).unwrap().matrix();
        let mut expected = SquareMatrix::zeros(3);
        expected[(0, 0)] = c(1.0, 0.0);
        assert_eq!(w0, expected);

        let w1 = w_n(&s, 1).unwrap().matrix();
        let mut expected = SquareMatrix::zeros(3);
        expected[(0, 1)] = c(g, 0.0);
        expected[(1, 0)] = c(g, 0.0);
        assert!(close(&w1, &expected, 1e-15));

        let w2 = w_n(&s, 2).unwrap().matrix();
        let mut expected = SquareMatrix::zeros(3);
        expected[(0, 2)] = c(g * g / 2.0, 0.0);
        expected[(1, 1)] = c(g * g, 0.0);
        expected[(2, 0)] = c(g * g / 2.0, 0.0);
        assert!(close(&w2, &expected, 1e-15));

        assert!(matches!(w_n(&s, 3), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn w_total_examples() {
        let s = space(1);
        let g = s.pole.width();
        let w = w_total(&s).matrix();
        assert!((w[(0, 0)] - c(2.0 * PI * g, 0.0)).norm() < 1e-14);

        let s = space(2);
        let w = w_total(&s).matrix();
        let f = 2.0 * PI * g;
        let mut expected = SquareMatrix::zeros(2);
        expected[(0, 0)] = c(2.0 * f, 0.0);
        expected[(0, 1)] = c(0.0, -f * g);
        expected[(1, 0)] = c(0.0, -f * g);
        assert!(close(&w, &expected, 1e-15));

        let p = w_pole_term(&s);
        assert_eq!(p.representation, Representation::Scattering);
        assert_eq!(p.matrix(), w_total(&s).matrix());
    }

    #[test]
    fn w_total_anti_diagonal_heads() {
        let r = 5;
        let s = space(r);
        let g = s.pole.width();
        let w = w_total(&s).matrix();
        for n in 0..r {
            // A_{n,0}: bra order n, ket order 0, i.e. the dyad |0⟩⟨n|.
            let expected = 2.0 * PI * g
                * crate::algebra::binom_f64(r as u64, n as i64 + 1)
                * g.powi(n as i32)
                / (1..=n).map(|k| k as f64).product::<f64>()
                * Complex64::new(0.0, -1.0).powu(n as u32);
            assert!((w[(0, n)] - expected).norm() <= 1e-13 * expected.norm());
        }
    }

    #[test]
    fn from_matrix_round_trips() {
        let s = space(3);
        let m = SquareMatrix::from_fn(3, |i, j| c(i as f64 - 0.3 * j as f64, 0.1 * (i * j) as f64));
        let w = StateOperator::from_matrix(s, &m, Representation::Decay).unwrap();
        assert!(close(&w.matrix(), &m, 1e-15));
    }

    #[test]
    fn pure_exponential_for_w_n_and_w_total() {
        let grid: Vec<f64> = (0..20).map(|i| i as f64 * 10.0 / 19.0 / 0.6).collect();
        for r in 1..=6 {
            let s = space(r);
            for n in 0..r {
                let w = w_n(&s, n).unwrap();
                assert!(decay_deviation(&w, &grid).unwrap() <= 1e-13);
                assert!(exponential_remainder(&w).unwrap().entries().all(|(_, p)| p.is_zero()));
            }
            let w = w_total(&s);
            assert!(decay_deviation(&w, &grid).unwrap() <= 1e-13);
        }
    }

    #[test]
    fn factorial_basis_matches_the_direct_product() {
        let pole = ResonancePole::new(4.0, 0.6, 4).unwrap();
        let s = GamowSubspace::new(pole, Normalization::Factorial);
        let m = SquareMatrix::from_fn(4, |i, j| c(1.0 + i as f64, j as f64 - 0.5));
        let w = StateOperator::from_matrix(s, &m, Representation::Decay).unwrap();
        for &t in &[0.0, 0.7, 2.5] {
            let tm = crate::jordan::evolution_matrix(&s, t).unwrap().matrix;
            let direct = tm.matmul(&m).matmul(&tm.conj_transpose());
            assert!(close(&evolve_operator(&w, t).unwrap().value(), &direct, 1e-13));
        }
        let derivative = GamowSubspace::new(pole, Normalization::Derivative);
        for n in 0..4 {
            let w = w_n(&s, n).unwrap();
            assert!(exponential_remainder(&w).unwrap().entries().all(|(_, p)| p.is_zero()));
            assert!(w.coefficients().entries().all(|((k, l), v)| {
                *v == GaussianRational::from_integer((k + l == n) as i64)
            }));
            // Same operator, different coordinates.
            let d = w_n(&derivative, n).unwrap().matrix();
            let f = w.matrix();
            let rescaled = SquareMatrix::from_fn(4, |k, l| {
                f[(k, l)] / ((1..=k).chain(1..=l).map(|v| v as f64).product::<f64>())
            });
            assert!(close(&rescaled, &d, 1e-15));
        }
        let w = w_total(&s);
        assert!(exponential_remainder(&w).unwrap().entries().all(|(_, p)| p.is_zero()));
    }

    #[test]
    fn evolution_at_zero_is_the_operator() {
        let s = space(4);
        for w in [w_total(&s), dyad(&s, 3, 1).unwrap(), w_n(&s, 2).unwrap()] {
            let e = evolve_operator(&w, 0.0).unwrap();
            assert_eq!(e.envelope, 1.0);
            assert!(close(&e.value(), &w.matrix(), 1e-15));
        }
    }

    #[test]
    fn dyad_grows_a_t_squared_term() {
        let s = space(2);
        let g = s.pole.width();
        let w = dyad(&s, 1, 1).unwrap();
        let sym = evolve_symbolic(&w).unwrap();
        assert_eq!(sym.rate, c(-g, 0.0));
        let p = &sym.polys[(0, 0)];
        assert_eq!(p.degree(), Some(2));
        assert!((p.coeff(2) - c(1.0, 0.0)).norm() < 1e-15);

        let grid = [0.0, 1.0, 2.0, 4.0];
        let d: Vec<f64> = (1..=grid.len())
            .map(|n| decay_deviation(&w, &grid[..n]).unwrap())
            .collect();
        assert_eq!(d[0], 0.0);
        assert!(d.windows(2).all(|p| p[1] > p[0]));
    }

    #[test]
    fn scattering_operators_are_not_evolved() {
        let s = space(2);
        let w = w_pole_term(&s);
        assert!(matches!(evolve_operator(&w, 1.0), Err(Error::WrongRepresentation { .. })));
        assert!(matches!(decay_deviation(&w_total(&s), &[]), Err(Error::EmptyGrid)));
        assert!(matches!(evolve_operator(&w_total(&s), -1.0), Err(Error::NegativeTime(_))));
    }

    #[test]
    fn first_order_pole_probability_decays_exponentially() {
        let pole = ResonancePole::new(2.0, 0.4, 1).unwrap();
        let model = SMatrixModel::new(pole);
        let pair = crate::smatrix::TestFunctionPair::new(
            RationalTestFunction::new(vec![RationalTerm::new(1.0, 1, c(1.0, 0.2)).unwrap()]),
            RationalTestFunction::new(vec![RationalTerm::new(0.8, 2, c(0.5, -1.0)).unwrap()]),
        );
        let p0 = pole_term_probability(&pair, &model, 0.0).unwrap();
        let pt = crate::smatrix::pole_term(&pair, &model).unwrap().norm_sqr();
        assert!((p0 - pt).abs() <= 1e-14 * pt);
        for &t in &[0.5, 3.0, 12.0] {
            let ratio = pole_term_probability(&pair, &model, t).unwrap() / p0;
            assert!((ratio - (-0.4 * t).exp()).abs() <= 1e-10 * (-0.4 * t).exp());
        }
    }

    #[test]
    fn detector_ratio_follows_the_envelope_for_w_n() {
        let pole = ResonancePole::new(2.0, 0.5, 3).unwrap();
        let model = SMatrixModel::new(pole);
        let s = GamowSubspace::new(pole, Normalization::Derivative);
        let psi = RationalTestFunction::new(vec![
            RationalTerm::new(1.2, 1, c(1.0, 0.3)).unwrap(),
            RationalTerm::new(0.9, 2, c(-0.4, 0.7)).unwrap(),
        ]);
        for n in 0..3 {
            let w = w_n(&s, n).unwrap();
            let v0 = detector_expectation(&w, &psi, &model, 0.0).unwrap();
            for &t in &[0.5, 2.0, 4.0] {
                let vt = detector_expectation(&w, &psi, &model, t).unwrap();
                let expected = v0 * (-0.5 * t).exp();
                assert!((vt - expected).norm() <= 1e-10 * expected.norm(), "n={n} t={t}");
            }
        }
        // Normalised W⁽⁰⁾ reads 1 at t = 0.
        let w = w_n(&s, 0).unwrap();
        let v0 = detector_probability(&w, &psi, &model, 0.0).unwrap();
        let normalised = w.with_scale(c(1.0 / v0, 0.0));
        assert!((detector_probability(&normalised, &psi, &model, 0.0).unwrap() - 1.0).abs() < 1e-14);
    }

    fn gaussian() -> impl Strategy<Value = GaussianRational> {
        (-6i64..=6, -6i64..=6, 1i64..=4).prop_map(|(a, b, d)| {
            GaussianRational::from_fraction(a, d) + GaussianRational::from_fraction(b, d) * GaussianRational::i()
        })
    }

    fn coefficient_matrix(r: usize) -> impl Strategy<Value = SquareMatrix<GaussianRational>> {
        proptest::collection::vec(gaussian(), r * r).prop_map(move |v| SquareMatrix::from_fn(r, |i, j| v[i * r + j].clone()))
    }

    proptest! {
        #[test]
        fn evolution_preserves_hermiticity(a in coefficient_matrix(4), t in 0.0f64..8.0) {
            let h = a.add(&a.conj_transpose());
            let w = StateOperator::from_coefficients(space(4), h, Representation::Decay).unwrap();
            let m = evolve_operator(&w, t).unwrap().value();
            let scale = m.frobenius_norm();
            prop_assert!(m.sub(&m.conj_transpose()).frobenius_norm() <= 1e-13 * scale);
        }

        #[test]
        fn evolution_is_linear(a in coefficient_matrix(3), b in coefficient_matrix(3), k in gaussian()) {
            let op = |m: SquareMatrix<GaussianRational>| {
                StateOperator::from_coefficients(space(3), m, Representation::Decay).unwrap()
            };
            let lhs = evolve_exact(&op(a.scale(&k).add(&b))).unwrap();
            let ea = evolve_exact(&op(a)).unwrap();
            let eb = evolve_exact(&op(b)).unwrap();
            for i in 0..3 {
                for j in 0..3 {
                    prop_assert_eq!(&lhs[(i, j)], &(&ea[(i, j)].scale(&k) + &eb[(i, j)]));
                }
            }
        }
    }
}
