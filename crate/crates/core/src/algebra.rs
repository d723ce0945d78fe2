//! Scalar, polynomial and small dense matrix arithmetic.
//!
//! Two coefficient carriers share one interface through [`Scalar`]:
//! [`GaussianRational`] for exact work and [`Complex64`] for numerics.
//! Polynomials are always in the single time variable `t`.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Index, IndexMut, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Coefficient field used by [`Polynomial`] and [`SquareMatrix`].
pub trait Scalar:
    Clone
    + PartialEq
    + fmt::Debug
    + Send
    + Sync
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn from_bigint(v: &BigInt) -> Self;

    fn from_i64(v: i64) -> Self {
        Self::from_bigint(&BigInt::from(v))
    }

    /// `num/den`; rounded for floating carriers.
    fn from_ratio(num: &BigInt, den: &BigInt) -> Self;

    /// The imaginary unit.
    fn imag_unit() -> Self;

    fn conj(&self) -> Self;

    fn to_complex(&self) -> Complex64;
}

impl Scalar for Complex64 {
    fn from_bigint(v: &BigInt) -> Self {
        Complex64::new(v.to_f64().unwrap_or(f64::NAN), 0.0)
    }

    fn from_i64(v: i64) -> Self {
        Complex64::new(v as f64, 0.0)
    }

    fn from_ratio(num: &BigInt, den: &BigInt) -> Self {
        let q = BigRational::new(num.clone(), den.clone());
        Complex64::new(q.to_f64().unwrap_or(f64::NAN), 0.0)
    }

    fn imag_unit() -> Self {
        Complex64::i()
    }

    fn conj(&self) -> Self {
        Complex64::conj(self)
    }

    fn to_complex(&self) -> Complex64 {
        *self
    }
}

/// Exact complex number `re + i·im` with arbitrary-precision rational parts.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct GaussianRational {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussianRational {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        Self { re, im }
    }

    pub fn from_integer(v: i64) -> Self {
        Self::new(BigRational::from_integer(v.into()), BigRational::zero())
    }

    /// `num/den` as a real Gaussian rational. Panics if `den == 0`.
    pub fn from_fraction(num: i64, den: i64) -> Self {
        Self::new(
            BigRational::new(num.into(), den.into()),
            BigRational::zero(),
        )
    }

    pub fn from_gaussian_integer(re: i64, im: i64) -> Self {
        Self::new(
            BigRational::from_integer(re.into()),
            BigRational::from_integer(im.into()),
        )
    }

    /// Exact conversion of a finite double (every finite `f64` is a dyadic rational).
    pub fn from_f64(re: f64, im: f64) -> Option<Self> {
        Some(Self::new(
            BigRational::from_float(re)?,
            BigRational::from_float(im)?,
        ))
    }

    pub fn i() -> Self {
        Self::new(BigRational::zero(), BigRational::one())
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn conjugate(&self) -> Self {
        Self::new(self.re.clone(), -self.im.clone())
    }

    /// Multiplicative inverse, `None` for zero.
    pub fn inv(&self) -> Option<Self> {
        let n = self.norm_sqr();
        if n.is_zero() {
            return None;
        }
        Some(Self::new(&self.re / &n, -&self.im / &n))
    }

    pub fn checked_div(&self, rhs: &Self) -> Option<Self> {
        rhs.inv().map(|inv| self * &inv)
    }

    /// `i^k` for any integer `k`.
    pub fn i_pow(k: i64) -> Self {
        match k.rem_euclid(4) {
            0 => Self::from_integer(1),
            1 => Self::i(),
            2 => Self::from_integer(-1),
            _ => -Self::i(),
        }
    }
}

impl fmt::Display for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "{}", self.re),
            (true, false) => write!(f, "{}i", self.im),
            (false, false) => {
                if self.im.is_negative() {
                    write!(f, "{}-{}i", self.re, -self.im.clone())
                } else {
                    write!(f, "{}+{}i", self.re, self.im)
                }
            }
        }
    }
}

impl<'a> Add<&'a GaussianRational> for &'a GaussianRational {
    type Output = GaussianRational;
    fn add(self, rhs: &GaussianRational) -> GaussianRational {
        GaussianRational::new(&self.re + &rhs.re, &self.im + &rhs.im)
    }
}

impl<'a> Sub<&'a GaussianRational> for &'a GaussianRational {
    type Output = GaussianRational;
    fn sub(self, rhs: &GaussianRational) -> GaussianRational {
        GaussianRational::new(&self.re - &rhs.re, &self.im - &rhs.im)
    }
}

impl<'a> Mul<&'a GaussianRational> for &'a GaussianRational {
    type Output = GaussianRational;
    fn mul(self, rhs: &GaussianRational) -> GaussianRational {
        GaussianRational::new(
            &self.re * &rhs.re - &self.im * &rhs.im,
            &self.re * &rhs.im + &self.im * &rhs.re,
        )
    }
}

impl Add for GaussianRational {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        &self + &rhs
    }
}

impl Sub for GaussianRational {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        &self - &rhs
    }
}

impl Mul for GaussianRational {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        &self * &rhs
    }
}

/// Panics on division by zero, like the integer types; use
/// [`GaussianRational::checked_div`] when the divisor may vanish.
impl Div for GaussianRational {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        self.checked_div(&rhs).expect("division by zero GaussianRational")
    }
}

impl Neg for GaussianRational {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.re, -self.im)
    }
}

impl Zero for GaussianRational {
    fn zero() -> Self {
        Self::new(BigRational::zero(), BigRational::zero())
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
}

impl One for GaussianRational {
    fn one() -> Self {
        Self::from_integer(1)
    }
}

impl Scalar for GaussianRational {
    fn from_bigint(v: &BigInt) -> Self {
        Self::new(BigRational::from_integer(v.clone()), BigRational::zero())
    }

    fn from_ratio(num: &BigInt, den: &BigInt) -> Self {
        Self::new(BigRational::new(num.clone(), den.clone()), BigRational::zero())
    }

    fn imag_unit() -> Self {
        Self::i()
    }

    fn conj(&self) -> Self {
        self.conjugate()
    }

    fn to_complex(&self) -> Complex64 {
        Complex64::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }
}

/// `i^k` in any carrier.
pub fn i_pow<C: Scalar>(k: i64) -> C {
    match k.rem_euclid(4) {
        0 => C::one(),
        1 => C::imag_unit(),
        2 => -C::one(),
        _ => -C::imag_unit(),
    }
}

/// Binomial coefficient `n choose k`, zero outside `0 <= k <= n`.
pub fn binom(n: u64, k: i64) -> BigUint {
    if k < 0 || k as u64 > n {
        return BigUint::zero();
    }
    let k = (k as u64).min(n - k as u64);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// [`binom`] as a signed integer, convenient for exact linear forms.
pub fn binom_int(n: i64, k: i64) -> BigInt {
    if n < 0 {
        return BigInt::zero();
    }
    BigInt::from(binom(n as u64, k))
}

/// [`binom`] rounded to `f64` (exact while the value is below 2^53).
pub fn binom_f64(n: u64, k: i64) -> f64 {
    binom(n, k).to_f64().unwrap_or(f64::INFINITY)
}

/// `n!` as a big integer.
pub fn factorial(n: u64) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, i| acc * BigUint::from(i))
}

/// Polynomial in `t`, coefficient index = power. Trailing zeros are trimmed,
/// so the zero polynomial has no coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial<C> {
    coeffs: Vec<C>,
}

impl<C: Scalar> Polynomial<C> {
    pub fn new(mut coeffs: Vec<C>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: C) -> Self {
        Self::new(vec![c])
    }

    /// `c·t^power`.
    pub fn monomial(c: C, power: usize) -> Self {
        let mut coeffs = vec![C::zero(); power + 1];
        coeffs[power] = c;
        Self::new(coeffs)
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    /// Coefficient of `t^power`, zero beyond the degree.
    pub fn coeff(&self, power: usize) -> C {
        self.coeffs.get(power).cloned().unwrap_or_else(C::zero)
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading_coeff(&self) -> Option<&C> {
        self.coeffs.last()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// True when every coefficient of `t^p`, `p >= 1`, is zero.
    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn eval(&self, t: &C) -> C {
        self.coeffs
            .iter()
            .rev()
            .fold(C::zero(), |acc, c| acc * t.clone() + c.clone())
    }

    /// Horner evaluation in floating point at a real time.
    pub fn eval_f64(&self, t: f64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::zero(), |acc, c| acc * t + c.to_complex())
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(p, c)| C::from_i64(p as i64) * c.clone())
                .collect(),
        )
    }

    pub fn scale(&self, factor: &C) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .map(|c| c.clone() * factor.clone())
                .collect(),
        )
    }

    /// Coefficient-wise conjugate, i.e. the conjugate polynomial for real `t`.
    pub fn conj(&self) -> Self {
        Self::new(self.coeffs.iter().map(Scalar::conj).collect())
    }

    pub fn to_complex(&self) -> Polynomial<Complex64> {
        Polynomial::new(self.coeffs.iter().map(Scalar::to_complex).collect())
    }
}

impl<C: Scalar> Add for &Polynomial<C> {
    type Output = Polynomial<C>;
    fn add(self, rhs: Self) -> Polynomial<C> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..n).map(|p| self.coeff(p) + rhs.coeff(p)).collect())
    }
}

impl<C: Scalar> Sub for &Polynomial<C> {
    type Output = Polynomial<C>;
    fn sub(self, rhs: Self) -> Polynomial<C> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..n).map(|p| self.coeff(p) - rhs.coeff(p)).collect())
    }
}

impl<C: Scalar> Mul for &Polynomial<C> {
    type Output = Polynomial<C>;
    fn mul(self, rhs: Self) -> Polynomial<C> {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![C::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        Polynomial::new(out)
    }
}

impl<C: Scalar> AddAssign<&Polynomial<C>> for Polynomial<C> {
    fn add_assign(&mut self, rhs: &Polynomial<C>) {
        *self = &*self + rhs;
    }
}

impl<C: Scalar> Neg for &Polynomial<C> {
    type Output = Polynomial<C>;
    fn neg(self) -> Polynomial<C> {
        Polynomial::new(self.coeffs.iter().cloned().map(Neg::neg).collect())
    }
}

/// `(−it)^a (it)^b = (−1)^a i^(a+b) t^(a+b)`.
pub fn monomial_product<C: Scalar>(a: usize, b: usize) -> Polynomial<C> {
    let sign = if a % 2 == 0 { C::one() } else { -C::one() };
    Polynomial::monomial(sign * i_pow::<C>((a + b) as i64), a + b)
}

/// `t ↦ e^{rate·t}·poly(t)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpPolynomial<C> {
    pub rate: Complex64,
    pub poly: Polynomial<C>,
}

impl<C: Scalar> ExpPolynomial<C> {
    pub fn new(rate: Complex64, poly: Polynomial<C>) -> Self {
        Self { rate, poly }
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        (self.rate * t).exp() * self.poly.eval_f64(t)
    }

    /// Product of two exp-polynomials: rates add, polynomials multiply.
    pub fn mul(&self, rhs: &Self) -> Self {
        Self::new(self.rate + rhs.rate, &self.poly * &rhs.poly)
    }

    pub fn to_complex(&self) -> ExpPolynomial<Complex64> {
        ExpPolynomial::new(self.rate, self.poly.to_complex())
    }
}

impl ExpPolynomial<Complex64> {
    /// `d/dt [e^{rt} p(t)] = e^{rt} (r·p(t) + p'(t))`.
    pub fn derivative(&self) -> Self {
        let scaled = self.poly.scale(&self.rate);
        Self::new(self.rate, &scaled + &self.poly.derivative())
    }
}

/// `|e^{rate·t}·poly(t)|` in floating point.
pub fn exp_poly_norm<C: Scalar>(p: &ExpPolynomial<C>, t: f64) -> f64 {
    p.eval(t).norm()
}

/// Dense square matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct SquareMatrix<T> {
    dim: usize,
    data: Vec<T>,
}

impl<T: Clone> SquareMatrix<T> {
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self { dim, data }
    }

    /// Returns `None` unless every row has length `rows.len()`.
    pub fn from_rows(rows: Vec<Vec<T>>) -> Option<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return None;
        }
        Some(Self {
            dim,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> Option<&T> {
        (i < self.dim && j < self.dim).then(|| &self.data[i * self.dim + j])
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        self.data.chunks(self.dim.max(1)).take(self.dim)
    }

    pub fn entries(&self) -> impl Iterator<Item = ((usize, usize), &T)> {
        let dim = self.dim;
        self.data
            .iter()
            .enumerate()
            .map(move |(idx, v)| ((idx / dim, idx % dim), v))
    }

    pub fn map<U: Clone>(&self, mut f: impl FnMut(&T) -> U) -> SquareMatrix<U> {
        SquareMatrix {
            dim: self.dim,
            data: self.data.iter().map(&mut f).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].clone())
    }
}

impl<T> Index<(usize, usize)> for SquareMatrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        assert!(i < self.dim && j < self.dim, "index ({i}, {j}) out of range");
        &self.data[i * self.dim + j]
    }
}

impl<T> IndexMut<(usize, usize)> for SquareMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        assert!(i < self.dim && j < self.dim, "index ({i}, {j}) out of range");
        &mut self.data[i * self.dim + j]
    }
}

impl<C: Scalar> SquareMatrix<C> {
    pub fn zeros(dim: usize) -> Self {
        Self::from_fn(dim, |_, _| C::zero())
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |i, j| if i == j { C::one() } else { C::zero() })
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let n = self.dim;
        Self::from_fn(n, |i, j| {
            (0..n).fold(C::zero(), |acc, k| {
                acc + self[(i, k)].clone() * rhs[(k, j)].clone()
            })
        })
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        Self::from_fn(self.dim, |i, j| self[(i, j)].clone() + rhs[(i, j)].clone())
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        Self::from_fn(self.dim, |i, j| self[(i, j)].clone() - rhs[(i, j)].clone())
    }

    pub fn scale(&self, factor: &C) -> Self {
        self.map(|v| v.clone() * factor.clone())
    }

    pub fn conj_transpose(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Self::identity(self.dim), |acc, _| acc.matmul(self))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    /// Frobenius norm evaluated in floating point.
    pub fn frobenius_norm(&self) -> f64 {
        self.data
            .iter()
            .map(|v| v.to_complex().norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn to_complex(&self) -> SquareMatrix<Complex64> {
        self.map(Scalar::to_complex)
    }
}

/// Matrix of exp-polynomials sharing one rate: `t ↦ e^{rate·t}·polys(t)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpPolyMatrix<C> {
    pub rate: Complex64,
    pub polys: SquareMatrix<Polynomial<C>>,
}

impl<C: Scalar> ExpPolyMatrix<C> {
    pub fn new(rate: Complex64, polys: SquareMatrix<Polynomial<C>>) -> Self {
        Self { rate, polys }
    }

    pub fn dim(&self) -> usize {
        self.polys.dim()
    }

    pub fn entry(&self, i: usize, j: usize) -> ExpPolynomial<C> {
        ExpPolynomial::new(self.rate, self.polys[(i, j)].clone())
    }

    pub fn eval(&self, t: f64) -> SquareMatrix<Complex64> {
        let envelope = (self.rate * t).exp();
        self.polys.map(|p| envelope * p.eval_f64(t))
    }

    /// Highest power of `t` over all entries; `None` if every entry is zero.
    pub fn max_degree(&self) -> Option<usize> {
        self.polys.entries().filter_map(|(_, p)| p.degree()).max()
    }

    /// True when no entry carries a power `t^p` with `p >= 1`.
    pub fn is_pure_exponential(&self) -> bool {
        self.polys.entries().all(|(_, p)| p.is_constant())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gr(re: i64, im: i64) -> GaussianRational {
        GaussianRational::from_gaussian_integer(re, im)
    }

    #[test]
    fn binom_small_cases() {
        assert_eq!(binom(0, 0), BigUint::from(1u32));
        assert_eq!(binom(4, 2), BigUint::from(6u32));
        assert_eq!(binom(5, 7), BigUint::zero());
        assert_eq!(binom(5, -1), BigUint::zero());
    }

    #[test]
    fn binom_beyond_u64() {
        // C(100, 50) = 100891344545564193334812497256
        assert_eq!(
            binom(100, 50).to_string(),
            "100891344545564193334812497256"
        );
    }

    #[test]
    fn binom_pascal_rule() {
        for n in 1..=64u64 {
            for k in 0..=n as i64 {
                assert_eq!(binom(n, k), binom(n - 1, k - 1) + binom(n - 1, k));
            }
        }
    }

    #[test]
    fn monomial_product_examples() {
        let one: Polynomial<GaussianRational> = monomial_product(0, 0);
        assert_eq!(one, Polynomial::constant(GaussianRational::one()));
        let t2: Polynomial<GaussianRational> = monomial_product(1, 1);
        assert_eq!(t2, Polynomial::monomial(GaussianRational::one(), 2));
        // (−i)²·i = −i
        let p: Polynomial<GaussianRational> = monomial_product(2, 1);
        assert_eq!(p, Polynomial::monomial(gr(0, -1), 3));
    }

    #[test]
    fn monomial_product_is_multiplicative() {
        for a in 0..5 {
            for b in 0..5 {
                for c in 0..5 {
                    for d in 0..5 {
                        let lhs = &monomial_product::<GaussianRational>(a, b)
                            * &monomial_product(c, d);
                        assert_eq!(lhs, monomial_product(a + c, b + d));
                    }
                }
            }
        }
    }

    #[test]
    fn exp_poly_norm_examples() {
        let one = Polynomial::constant(Complex64::new(1.0, 0.0));
        let p = ExpPolynomial::new(Complex64::zero(), one.clone());
        assert_eq!(exp_poly_norm(&p, 5.0), 1.0);
        let p = ExpPolynomial::new(Complex64::new(-1.0, 0.0), one);
        assert_eq!(exp_poly_norm(&p, 0.0), 1.0);
        let t = Polynomial::monomial(Complex64::new(1.0, 0.0), 1);
        let p = ExpPolynomial::new(Complex64::new(-2.0, 0.0), t);
        assert!((exp_poly_norm(&p, 1.0) - (-2.0f64).exp()).abs() < 1e-16);
    }

    #[test]
    fn polynomial_trims_trailing_zeros() {
        let p = Polynomial::new(vec![gr(1, 0), gr(0, 0), gr(0, 0)]);
        assert_eq!(p.degree(), Some(0));
        assert!(Polynomial::<GaussianRational>::new(vec![gr(0, 0)]).is_zero());
        assert_eq!(Polynomial::<GaussianRational>::zero().degree(), None);
    }

    #[test]
    fn gaussian_division_and_inverse() {
        let a = gr(3, 4);
        let inv = a.inv().unwrap();
        assert_eq!(&a * &inv, GaussianRational::one());
        assert!(GaussianRational::zero().inv().is_none());
        assert_eq!(gr(1, 1).checked_div(&gr(0, 1)).unwrap(), gr(1, -1));
    }

    #[test]
    fn exp_polynomial_product_adds_rates() {
        let a = ExpPolynomial::new(
            Complex64::new(-1.0, 2.0),
            Polynomial::monomial(Complex64::new(2.0, 0.0), 1),
        );
        let b = ExpPolynomial::new(
            Complex64::new(0.5, -1.0),
            Polynomial::constant(Complex64::new(0.0, 1.0)),
        );
        let c = a.mul(&b);
        assert_eq!(c.rate, Complex64::new(-0.5, 1.0));
        let t = 0.7;
        assert!((c.eval(t) - a.eval(t) * b.eval(t)).norm() < 1e-14);
    }

    fn small_gr() -> impl Strategy<Value = GaussianRational> {
        (-20i64..=20, 1i64..=6, -20i64..=20, 1i64..=6).prop_map(|(a, b, c, d)| {
            GaussianRational::new(
                BigRational::new(a.into(), b.into()),
                BigRational::new(c.into(), d.into()),
            )
        })
    }

    fn small_c64() -> impl Strategy<Value = Complex64> {
        (-2.0f64..2.0, -2.0f64..2.0).prop_map(|(a, b)| Complex64::new(a, b))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn exact_eval_is_a_homomorphism(
            p in prop::collection::vec(small_gr(), 0..=9),
            q in prop::collection::vec(small_gr(), 0..=9),
            t in (-8i64..=8).prop_map(|n| GaussianRational::from_fraction(n, 4)),
        ) {
            let p = Polynomial::new(p);
            let q = Polynomial::new(q);
            prop_assert_eq!((&p * &q).eval(&t), p.eval(&t) * q.eval(&t));
        }

        #[test]
        fn float_eval_is_a_homomorphism(
            p in prop::collection::vec(small_c64(), 1..=9),
            q in prop::collection::vec(small_c64(), 1..=9),
            t in -2.0f64..2.0,
        ) {
            let p = Polynomial::new(p);
            let q = Polynomial::new(q);
            let lhs = (&p * &q).eval_f64(t);
            let rhs = p.eval_f64(t) * q.eval_f64(t);
            // Relative to the magnitude of the unreduced terms; the product can cancel.
            let scale = p.coeffs().iter().map(|c| c.norm()).sum::<f64>()
                * q.coeffs().iter().map(|c| c.norm()).sum::<f64>()
                * 2f64.powi(16);
            prop_assert!((lhs - rhs).norm() <= 1e-12 * scale.max(rhs.norm()));
        }

        #[test]
        fn product_degree_adds(
            p in prop::collection::vec(small_gr(), 1..=9),
            q in prop::collection::vec(small_gr(), 1..=9),
        ) {
            let p = Polynomial::new(p);
            let q = Polynomial::new(q);
            prop_assume!(!p.is_zero() && !q.is_zero());
            prop_assert_eq!((&p * &q).degree(), Some(p.degree().unwrap() + q.degree().unwrap()));
        }
    }
}
