//! The `r`-dimensional resonance subspace, its Jordan-block Hamiltonian and
//! the semigroup evolution of kets and bras.
//!
//! Operators are stored over the dyad basis: entry `(k, l)` is the
//! coefficient of `|k⟩⟨l|`, so column `k` of a matrix is the image of the
//! basis ket `|k⟩`.

use num_bigint::BigInt;
use num_complex::Complex64;

use crate::algebra::{binom_int, factorial, i_pow, ExpPolyMatrix, Polynomial, Scalar, SquareMatrix};
use crate::error::{Error, Result};
use crate::smatrix::ResonancePole;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Normalization {
    /// `|k⟩` is the `k`-th derivative ket; `H|k⟩ = z_R|k⟩ + k|k−1⟩`.
    #[default]
    Derivative,
    /// `|k⟩ → |k⟩/k!`, the standard Jordan form with unit off-diagonal.
    Factorial,
}

impl std::str::FromStr for Normalization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "derivative" => Ok(Normalization::Derivative),
            "factorial" => Ok(Normalization::Factorial),
            other => Err(Error::InvalidParameter(format!(
                "unknown normalization {other:?} (expected derivative|factorial)"
            ))),
        }
    }
}

impl std::fmt::Display for Normalization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Normalization::Derivative => "derivative",
            Normalization::Factorial => "factorial",
        })
    }
}

/// Span of the generalized eigenvectors `|z_R⟩⁽⁰⁾ … |z_R⟩⁽ʳ⁻¹⁾`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GamowSubspace {
    pub pole: ResonancePole,
    pub normalization: Normalization,
}

impl GamowSubspace {
    pub fn new(pole: ResonancePole, normalization: Normalization) -> Self {
        Self { pole, normalization }
    }

    pub fn dim(&self) -> usize {
        self.pole.order()
    }

    pub fn z_r(&self) -> Complex64 {
        self.pole.z_r()
    }

    fn check_index(&self, k: usize) -> Result<()> {
        if k >= self.dim() {
            return Err(Error::IndexOutOfRange { index: k, dim: self.dim() });
        }
        Ok(())
    }

    /// Weight on `|k−1⟩` in `(H − z_R)|k⟩`.
    fn ladder_weight(&self, k: usize) -> i64 {
        match self.normalization {
            Normalization::Derivative => k as i64,
            Normalization::Factorial => 1,
        }
    }
}

/// `ξ = Σ_k ζ_k |z_R⟩⁽ᵏ⁾`.
#[derive(Clone, Debug, PartialEq)]
pub struct GamowVector {
    pub space: GamowSubspace,
    pub coords: Vec<Complex64>,
}

impl GamowVector {
    pub fn new(space: GamowSubspace, coords: Vec<Complex64>) -> Result<Self> {
        if coords.len() != space.dim() {
            return Err(Error::InvalidParameter(format!(
                "expected {} coordinates, got {}",
                space.dim(),
                coords.len()
            )));
        }
        Ok(Self { space, coords })
    }

    pub fn basis(space: GamowSubspace, k: usize) -> Result<Self> {
        space.check_index(k)?;
        let mut coords = vec![Complex64::new(0.0, 0.0); space.dim()];
        coords[k] = Complex64::new(1.0, 0.0);
        Ok(Self { space, coords })
    }
}

/// Linear operator on the subspace, as an `r × r` matrix over the dyads `|k⟩⟨l|`.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorOnM<C = Complex64> {
    pub space: GamowSubspace,
    pub matrix: SquareMatrix<C>,
}

impl<C: Scalar> OperatorOnM<C> {
    pub fn new(space: GamowSubspace, matrix: SquareMatrix<C>) -> Result<Self> {
        if matrix.dim() != space.dim() {
            return Err(Error::InvalidParameter(format!(
                "operator of dimension {} on a subspace of dimension {}",
                matrix.dim(),
                space.dim()
            )));
        }
        Ok(Self { space, matrix })
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn norm(&self) -> f64 {
        self.matrix.frobenius_norm()
    }

    pub fn compose(&self, rhs: &Self) -> Self {
        Self {
            space: self.space,
            matrix: self.matrix.matmul(&rhs.matrix),
        }
    }

    /// The same operator acting on the column of functionals `⟨ψ|z_R⟩⁽ᵏ⁾`.
    /// For the Hamiltonian this is the lower Jordan block.
    pub fn functional_form(&self) -> SquareMatrix<C> {
        self.matrix.transpose()
    }

    pub fn apply(&self, v: &GamowVector) -> GamowVector {
        let n = self.dim();
        let coords = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| self.matrix[(i, j)].to_complex() * v.coords[j])
                    .sum()
            })
            .collect();
        GamowVector { space: self.space, coords }
    }
}

/// `H` restricted to the subspace: `z_R` on the diagonal and the ladder
/// weights on the dyads `|k−1⟩⟨k|` (`k` for derivative normalization, 1 for
/// factorial). [`OperatorOnM::functional_form`] gives the lower Jordan block.
pub fn hamiltonian_matrix(space: &GamowSubspace) -> OperatorOnM {
    let z = space.z_r();
    let n = nilpotent_part::<Complex64>(space);
    let matrix = SquareMatrix::from_fn(space.dim(), |i, j| {
        if i == j {
            z
        } else {
            n[(i, j)]
        }
    });
    OperatorOnM { space: *space, matrix }
}

/// `H − z_R`, built directly so its entries are exact integers.
fn nilpotent_part<C: Scalar>(space: &GamowSubspace) -> SquareMatrix<C> {
    SquareMatrix::from_fn(space.dim(), |i, j| {
        if j == i + 1 {
            C::from_i64(space.ladder_weight(j))
        } else {
            C::zero()
        }
    })
}

/// `H|k⟩ = z_R|k⟩ + w_k|k−1⟩`.
pub fn apply_hamiltonian(space: &GamowSubspace, k: usize) -> Result<GamowVector> {
    let mut v = GamowVector::basis(*space, k)?;
    v.coords[k] = space.z_r();
    if k > 0 {
        v.coords[k - 1] = Complex64::new(space.ladder_weight(k) as f64, 0.0);
    }
    Ok(v)
}

/// `(H − z_R)^k`; the zero operator for `k >= r`.
pub fn nilpotent_power(space: &GamowSubspace, k: u32) -> OperatorOnM {
    OperatorOnM {
        space: *space,
        matrix: nilpotent_part::<Complex64>(space).pow(k),
    }
}

/// Exact-carrier variant of [`nilpotent_power`].
pub fn nilpotent_power_exact<C: Scalar>(space: &GamowSubspace, k: u32) -> SquareMatrix<C> {
    nilpotent_part::<C>(space).pow(k)
}

fn check_time(t: f64) -> Result<()> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    Ok(())
}

/// Polynomial part `P(t)` of the ket evolution `T(t) = e^{−iz_R t}·P(t)`:
/// entry `(p, k)` is `C(k,p)(−it)^{k−p}` (derivative) or
/// `(−it)^{k−p}/(k−p)!` (factorial) for `p <= k`. Independent of `Γ`.
pub fn evolution_polynomials<C: Scalar>(space: &GamowSubspace) -> SquareMatrix<Polynomial<C>> {
    SquareMatrix::from_fn(space.dim(), |p, k| {
        if p > k {
            return Polynomial::zero();
        }
        let d = k - p;
        let weight = match space.normalization {
            Normalization::Derivative => C::from_bigint(&binom_int(k as i64, p as i64)),
            Normalization::Factorial => {
                C::from_ratio(&BigInt::from(1), &BigInt::from(factorial(d as u64)))
            }
        };
        // (−i)^d
        let sign = if d % 2 == 0 { C::one() } else { -C::one() };
        Polynomial::monomial(weight * sign * i_pow::<C>(d as i64), d)
    })
}

/// `T(t)` with its envelope `e^{−iz_R t}` kept separate from the polynomial part.
pub fn evolution_symbolic<C: Scalar>(space: &GamowSubspace) -> ExpPolyMatrix<C> {
    ExpPolyMatrix::new(-Complex64::i() * space.z_r(), evolution_polynomials(space))
}

/// Ket evolution `(e^{iHt})^×` on the subspace; entry `(p, k)` is
/// `e^{−iz_R t} C(k,p)(−it)^{k−p}` for `p <= k`.
pub fn evolution_matrix(space: &GamowSubspace, t: f64) -> Result<OperatorOnM> {
    check_time(t)?;
    Ok(OperatorOnM {
        space: *space,
        matrix: evolution_symbolic::<Complex64>(space).eval(t),
    })
}

/// Bra evolution; entry `(l, q)` is `e^{iz_R* t} C(l,q)(it)^{l−q}` for `q <= l`.
/// Equals the conjugate transpose of [`evolution_matrix`].
pub fn evolution_matrix_bra(space: &GamowSubspace, t: f64) -> Result<OperatorOnM> {
    check_time(t)?;
    let envelope = (Complex64::i() * space.z_r().conj() * t).exp();
    let polys = evolution_polynomials::<Complex64>(space);
    let matrix = SquareMatrix::from_fn(space.dim(), |l, q| envelope * polys[(q, l)].conj().eval_f64(t));
    Ok(OperatorOnM { space: *space, matrix })
}

/// Polynomial part of `T(t)·A·T(t)†`; the envelope `e^{−Γt}` is implicit.
///
/// Entries are polynomials in the same time variable as `P(t)`; with `A`
/// expressed in units `Γ := 1` the variable is `Γt`.
pub fn conjugate_by_evolution<C: Scalar>(
    normalization: Normalization,
    a: &SquareMatrix<C>,
) -> SquareMatrix<Polynomial<C>> {
    let n = a.dim();
    // Only the order matters for P, any pole with that order will do.
    let pole = ResonancePole::new(1.0, 1.0, n.max(1)).expect("valid placeholder pole");
    let p = evolution_polynomials::<C>(&GamowSubspace::new(pole, normalization));
    if n == 0 {
        return SquareMatrix::from_fn(0, |_, _| Polynomial::zero());
    }

    // (P·A)[i][l] = Σ_k P[i][k] A[k][l]
    let pa = SquareMatrix::from_fn(n, |i, l| {
        let mut acc = Polynomial::zero();
        for k in i..n {
            if !a[(k, l)].is_zero() {
                acc += &p[(i, k)].scale(&a[(k, l)]);
            }
        }
        acc
    });
    // (P·A·P†)[i][j] = Σ_l (P·A)[i][l] conj(P[j][l])
    SquareMatrix::from_fn(n, |i, j| {
        let mut acc = Polynomial::zero();
        for l in j..n {
            if !pa[(i, l)].is_zero() {
                acc += &(&pa[(i, l)] * &p[(j, l)].conj());
            }
        }
        acc
    })
}
