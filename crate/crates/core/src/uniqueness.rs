//! Exact certification that a combination of dyads `Σ A_{hk}|k⟩⟨h|` decays
//! as a pure exponential iff it is a sum of binomial anti-diagonals
//! `A_{n−k,k} = C(n,k)·A_{n,0}`.
//!
//! Indices follow the coefficient convention: `h` is the bra order and `k`
//! the ket order, so `A_{hk}` multiplies `|k⟩⟨h|`. Entry `(h, k)` of the
//! stored matrix is `A_{hk}`; [`CoefficientMatrix::to_dyad_matrix`] gives
//! the transpose used by [`crate::states`].

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::Serialize;
use std::fmt::Write as _;

use crate::algebra::{binom_int, monomial_product, GaussianRational, Polynomial, Scalar, SquareMatrix};
use crate::error::{Error, Result};
use crate::states::w_total_coefficients;

/// Largest `j` accepted by [`certify`].
pub const J_CAP: usize = 12;

#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientMatrix {
    j: usize,
    a: SquareMatrix<GaussianRational>,
}

impl CoefficientMatrix {
    pub fn zeros(j: usize) -> Self {
        Self { j, a: SquareMatrix::zeros(j + 1) }
    }

    /// `f(h, k)` gives `A_{hk}`.
    pub fn from_fn(j: usize, f: impl FnMut(usize, usize) -> GaussianRational) -> Self {
        Self { j, a: SquareMatrix::from_fn(j + 1, f) }
    }

    /// From a matrix whose entry `(k, l)` multiplies `|k⟩⟨l|`.
    pub fn from_dyad_matrix(m: &SquareMatrix<GaussianRational>) -> Option<Self> {
        let j = m.dim().checked_sub(1)?;
        Some(Self { j, a: m.transpose() })
    }

    pub fn to_dyad_matrix(&self) -> SquareMatrix<GaussianRational> {
        self.a.transpose()
    }

    pub fn j(&self) -> usize {
        self.j
    }

    /// `A_{hk}`; zero outside `0..=j`.
    pub fn get(&self, h: usize, k: usize) -> GaussianRational {
        self.a.get(h, k).cloned().unwrap_or_default()
    }

    pub fn set(&mut self, h: usize, k: usize, v: GaussianRational) {
        self.a[(h, k)] = v;
    }

    pub fn entries(&self) -> impl Iterator<Item = ((usize, usize), &GaussianRational)> {
        self.a.entries()
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero()
    }

    /// `(A_{n,0}, A_{n−1,1}, …, A_{0,n})`.
    pub fn anti_diagonal(&self, n: usize) -> Vec<GaussianRational> {
        (0..=n).map(|k| self.get(n - k, k)).collect()
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!(self.j, rhs.j, "coefficient matrices of different size");
        Self { j: self.j, a: self.a.add(&rhs.a) }
    }

    pub fn scale(&self, c: &GaussianRational) -> Self {
        Self { j: self.j, a: self.a.scale(c) }
    }
}

/// One condition `Σ_{k=l}^{n−m} A_{n−k,k} C(k,l) C(n−k,m) (−1)^{k−l} = 0`,
/// keeping only the unknowns inside the `j`-square.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintRow {
    pub l: usize,
    pub m: usize,
    pub n: usize,
    /// `((h, k), coefficient)`.
    pub terms: Vec<((usize, usize), BigInt)>,
}

impl ConstraintRow {
    pub fn evaluate(&self, a: &CoefficientMatrix) -> GaussianRational {
        self.terms.iter().fold(GaussianRational::zero(), |acc, ((h, k), c)| {
            acc + a.get(*h, *k) * GaussianRational::from_bigint(c)
        })
    }

    pub fn is_trivial(&self) -> bool {
        self.terms.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintSystem {
    pub j: usize,
    pub rows: Vec<ConstraintRow>,
}

impl ConstraintSystem {
    pub fn unknowns(&self) -> usize {
        (self.j + 1) * (self.j + 1)
    }

    pub fn is_satisfied_by(&self, a: &CoefficientMatrix) -> bool {
        self.rows.iter().all(|row| row.evaluate(a).is_zero())
    }
}

/// `T(t)·A·T(t)†` as exact polynomials in `t`, `e^{−Γt}` omitted, by direct
/// expansion of every dyad: `|k⟩⟨h| → Σ_{l,m} C(k,l)C(h,m)(−it)^{k−l}(it)^{h−m}|l⟩⟨m|`.
/// Entry `(m, l)` of the result is the coefficient of `|l⟩⟨m|`.
pub fn oracle_evolution(a: &CoefficientMatrix) -> SquareMatrix<Polynomial<GaussianRational>> {
    let size = a.j + 1;
    let mut out = SquareMatrix::from_fn(size, |_, _| Polynomial::zero());
    for ((h, k), coeff) in a.entries() {
        if coeff.is_zero() {
            continue;
        }
        for l in 0..=k {
            for m in 0..=h {
                let weight = GaussianRational::from_bigint(&(binom_int(k as i64, l as i64) * binom_int(h as i64, m as i64)));
                let term = monomial_product::<GaussianRational>(k - l, h - m).scale(&(weight * coeff.clone()));
                out[(m, l)] += &term;
            }
        }
    }
    out
}

/// True when every entry of [`oracle_evolution`] is constant in `t`.
pub fn is_time_constant(a: &CoefficientMatrix) -> bool {
    oracle_evolution(a).entries().all(|(_, p)| p.is_constant())
}

/// Conditions for the `2j`-dimensional embedding with `A_{hk} = 0` for
/// `h > j` or `k > j`: one row per `l < 2j`, `m < 2j − l`, `l+m < n <= 2j`.
pub fn build_constraints(j: usize) -> ConstraintSystem {
    let big_j = 2 * j;
    let mut rows = Vec::new();
    for l in 0..big_j {
        for m in 0..big_j - l {
            for n in m + l + 1..=big_j {
                let terms = (l..=n - m)
                    .filter(|&k| k <= j && n - k <= j)
                    .map(|k| {
                        let sign = if (k - l) % 2 == 0 { BigInt::one() } else { -BigInt::one() };
                        let c = binom_int(k as i64, l as i64) * binom_int((n - k) as i64, m as i64) * sign;
                        ((n - k, k), c)
                    })
                    .filter(|(_, c)| !c.is_zero())
                    .collect();
                rows.push(ConstraintRow { l, m, n, terms });
            }
        }
    }
    ConstraintSystem { j, rows }
}

/// Column order for elimination: every `A_{hk}` with `k >= 1` first, then
/// `A_{0,0}, A_{1,0}, …, A_{j,0}`, so the latter end up as the free variables.
fn column_order(j: usize) -> Vec<(usize, usize)> {
    let mut cols: Vec<(usize, usize)> = (1..=j).flat_map(|k| (0..=j).map(move |h| (h, k))).collect();
    cols.extend((0..=j).map(|n| (n, 0)));
    cols
}

fn normalize_row(row: &mut [BigInt]) {
    let g = row.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
    if !g.is_zero() && !g.is_one() {
        for x in row.iter_mut() {
            *x = &*x / &g;
        }
    }
}

/// Exact nullspace basis of [`build_constraints`], one element per free
/// unknown. Elimination is fraction-free over the integers, pivoting on the
/// first nonzero entry of each column.
pub fn solve_exponential_family(j: usize) -> Vec<CoefficientMatrix> {
    let system = build_constraints(j);
    nullspace(&system)
}

fn nullspace(system: &ConstraintSystem) -> Vec<CoefficientMatrix> {
    let j = system.j;
    let cols = column_order(j);
    let width = cols.len();
    let index_of = |h: usize, k: usize| cols.iter().position(|&c| c == (h, k)).expect("unknown in range");

    let mut rows: Vec<Vec<BigInt>> = system
        .rows
        .iter()
        .filter(|r| !r.is_trivial())
        .map(|r| {
            let mut dense = vec![BigInt::zero(); width];
            for ((h, k), c) in &r.terms {
                dense[index_of(*h, *k)] += c;
            }
            dense
        })
        .collect();

    let mut pivots: Vec<usize> = Vec::new();
    for c in 0..width {
        let rank = pivots.len();
        let Some(p) = (rank..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(rank, p);
        let pivot_row = rows[rank].clone();
        let pv = &pivot_row[c];
        for (i, row) in rows.iter_mut().enumerate() {
            if i == rank || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (x, p) in row.iter_mut().zip(&pivot_row) {
                *x = &*x * pv - p * &f;
            }
            normalize_row(row);
        }
        pivots.push(c);
        rows.retain(|r| r.iter().any(|x| !x.is_zero()));
    }

    let free: Vec<usize> = (0..width).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut out = CoefficientMatrix::zeros(j);
            let (h, k) = cols[f];
            out.set(h, k, GaussianRational::one());
            for (row, &c) in rows.iter().zip(&pivots) {
                if row[f].is_zero() {
                    continue;
                }
                let (h, k) = cols[c];
                out.set(h, k, GaussianRational::from_ratio(&-row[f].clone(), &row[c]));
            }
            out
        })
        .collect()
}

/// `A_{n−k,k} = ((n−k+1)!(k−1)!/((n−k)!k!))·A_{n−k+1,k−1}` from `A_{n,0} = 1`,
/// returning `(A_{n,0}, …, A_{0,n})`.
pub fn recurrence_chain(j: usize, n: usize) -> Result<Vec<GaussianRational>> {
    if n == 0 || n > j {
        return Err(Error::InvalidParameter(format!("recurrence needs 1 <= n <= j, got n = {n}, j = {j}")));
    }
    let mut chain = vec![GaussianRational::one()];
    for k in 1..=n {
        // (n−k+1)!(k−1)! / ((n−k)! k!) = (n−k+1)/k
        let ratio = GaussianRational::from_fraction((n - k + 1) as i64, k as i64);
        let next = chain[k - 1].clone() * ratio;
        chain.push(next);
    }
    Ok(chain)
}

/// `Σ_{k=l}^{n−m} C(n−m−l, k−l)(−1)^{k−l}`, which is `δ_{l, n−m}`.
pub fn delta_identity(n: usize, m: usize, l: usize) -> Result<GaussianRational> {
    if l + m > n {
        return Err(Error::InvalidParameter(format!("need l + m <= n, got n={n} m={m} l={l}")));
    }
    let top = (n - m - l) as i64;
    let sum = (l..=n - m).fold(BigInt::zero(), |acc, k| {
        let b = binom_int(top, (k - l) as i64);
        if (k - l) % 2 == 0 {
            acc + b
        } else {
            acc - b
        }
    });
    Ok(GaussianRational::from_bigint(&sum))
}

/// Splits `A` by anti-diagonal `n = h + k` into the `n <= j` part and the
/// `n > j` part. The two parts sum to `A`.
pub fn w_side_split(a: &CoefficientMatrix) -> (CoefficientMatrix, CoefficientMatrix) {
    let j = a.j;
    let lower = CoefficientMatrix::from_fn(j, |h, k| if h + k <= j { a.get(h, k) } else { GaussianRational::zero() });
    let upper = CoefficientMatrix::from_fn(j, |h, k| if h + k > j { a.get(h, k) } else { GaussianRational::zero() });
    (lower, upper)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BasisCheck {
    pub n: usize,
    /// Rows `h = 0..=j` of `A_{hk}`, as exact strings.
    pub matrix: Vec<Vec<String>>,
    pub binomial_anti_diagonal: bool,
    pub upper_part_zero: bool,
    pub satisfies_constraints: bool,
    pub time_constant: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Certificate {
    pub j: usize,
    pub constraint_count: usize,
    pub nontrivial_constraints: usize,
    pub unknowns: usize,
    pub nullspace_dimension: usize,
    pub basis: Vec<BasisCheck>,
    /// The pole-term operator for `r = j + 1`, with `2πΓ` removed and `Γ := 1`.
    pub pole_term_operator_in_family: bool,
    pub passed: bool,
}

impl Certificate {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let yes = |b: bool| if b { "yes" } else { "NO" };
        let _ = writeln!(s, "j = {}", self.j);
        let _ = writeln!(s, "unknowns = {}", self.unknowns);
        let _ = writeln!(s, "constraints = {} ({} nontrivial)", self.constraint_count, self.nontrivial_constraints);
        let _ = writeln!(s, "nullspace dimension = {} (expected {})", self.nullspace_dimension, self.j + 1);
        for b in &self.basis {
            let _ = writeln!(s);
            let _ = writeln!(s, "basis element n = {}", b.n);
            for row in &b.matrix {
                let _ = writeln!(s, "  [{}]", row.join(", "));
            }
            let _ = writeln!(s, "  binomial anti-diagonal: {}", yes(b.binomial_anti_diagonal));
            let _ = writeln!(s, "  upper part zero: {}", yes(b.upper_part_zero));
            let _ = writeln!(s, "  satisfies constraints: {}", yes(b.satisfies_constraints));
            let _ = writeln!(s, "  constant under evolution: {}", yes(b.time_constant));
        }
        let _ = writeln!(s);
        let _ = writeln!(s, "pole-term operator in family: {}", yes(self.pole_term_operator_in_family));
        let _ = writeln!(s, "result: {}", if self.passed { "PASS" } else { "FAIL" });
        s
    }
}

/// Runs every check for one `j`.
pub fn certify(j: usize) -> Result<Certificate> {
    if j > J_CAP {
        return Err(Error::JTooLarge { j, cap: J_CAP });
    }
    let system = build_constraints(j);
    let basis = nullspace(&system);

    let checks: Vec<BasisCheck> = basis
        .iter()
        .enumerate()
        .map(|(n, b)| {
            let binomial = (0..=2 * j).all(|d| {
                (0..=d).all(|k| {
                    let expected = if d == n {
                        GaussianRational::from_bigint(&binom_int(n as i64, k as i64))
                    } else {
                        GaussianRational::zero()
                    };
                    b.get(d - k, k) == expected
                })
            });
            BasisCheck {
                n,
                matrix: (0..=j).map(|h| (0..=j).map(|k| b.get(h, k).to_string()).collect()).collect(),
                binomial_anti_diagonal: binomial,
                upper_part_zero: w_side_split(b).1.is_zero(),
                satisfies_constraints: system.is_satisfied_by(b),
                time_constant: is_time_constant(b),
            }
        })
        .collect();

    let pole_term = pole_term_operator_in_family(j, &basis);
    let dim_ok = basis.len() == j + 1;
    let passed = dim_ok
        && pole_term
        && checks.iter().all(|c| {
            c.binomial_anti_diagonal && c.upper_part_zero && c.satisfies_constraints && c.time_constant
        });

    Ok(Certificate {
        j,
        constraint_count: system.rows.len(),
        nontrivial_constraints: system.rows.iter().filter(|r| !r.is_trivial()).count(),
        unknowns: system.unknowns(),
        nullspace_dimension: basis.len(),
        basis: checks,
        pole_term_operator_in_family: pole_term,
        passed,
    })
}

/// Checks that the coefficients of `W` for `r = j + 1` satisfy the
/// constraints and equal `Σ_n A_{n,0}·basis_n` with
/// `A_{n,0} = C(r,n+1)(−i)ⁿ/n!`.
fn pole_term_operator_in_family(j: usize, basis: &[CoefficientMatrix]) -> bool {
    let r = j + 1;
    let Some(w) = CoefficientMatrix::from_dyad_matrix(&w_total_coefficients(r)) else {
        return false;
    };
    if !build_constraints(j).is_satisfied_by(&w) || basis.len() != r {
        return false;
    }
    let mut combination = CoefficientMatrix::zeros(j);
    let mut factorial = BigInt::one();
    for (n, b) in basis.iter().enumerate() {
        if n > 0 {
            factorial *= n;
        }
        let head = GaussianRational::from_ratio(&binom_int(r as i64, n as i64 + 1), &factorial)
            * GaussianRational::i_pow(-(n as i64));
        if w.get(n, 0) != head {
            return false;
        }
        combination = combination.add(&b.scale(&head));
    }
    combination == w
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn int(v: i64) -> GaussianRational {
        GaussianRational::from_integer(v)
    }

    fn brute_triples(big_j: usize) -> usize {
        let mut count = 0;
        for l in 0..big_j {
            for m in 0..big_j {
                for n in 0..=big_j {
                    if m + l < big_j && n > m + l {
                        count += 1;
                    }
                }
            }
        }
        count
    }

    #[test]
    fn oracle_examples() {
        let e = oracle_evolution(&CoefficientMatrix::from_fn(0, |_, _| int(1)));
        assert_eq!(e[(0, 0)], Polynomial::constant(int(1)));

        let id = CoefficientMatrix::from_fn(1, |h, k| int((h == k) as i64));
        let e = oracle_evolution(&id);
        assert_eq!(e[(0, 0)], Polynomial::new(vec![int(1), int(0), int(1)]));

        // Γ·(|0⟩⟨1| + |1⟩⟨0|) with Γ := 1
        let w1 = CoefficientMatrix::from_fn(1, |h, k| int((h + k == 1) as i64));
        assert!(is_time_constant(&w1));
        assert!(!is_time_constant(&id));
    }

    #[test]
    fn constraint_examples() {
        assert!(build_constraints(0).rows.is_empty());

        let sys = build_constraints(1);
        let nontrivial: Vec<_> = sys.rows.iter().filter(|r| !r.is_trivial()).collect();
        // A_{1,0} − A_{0,1} = 0 once, and three multiples of A_{1,1} = 0
        assert_eq!(nontrivial.len(), 4);
        for row in &nontrivial {
            let unknowns: Vec<_> = row.terms.iter().map(|(hk, _)| *hk).collect();
            assert!(unknowns == [(1, 0), (0, 1)] || unknowns == [(1, 1)], "{row:?}");
        }
        let mut a = CoefficientMatrix::zeros(1);
        a.set(1, 0, int(3));
        a.set(0, 1, int(3));
        assert!(sys.is_satisfied_by(&a));
        a.set(1, 1, int(1));
        assert!(!sys.is_satisfied_by(&a));
        a.set(1, 1, int(0));
        a.set(0, 1, int(2));
        assert!(!sys.is_satisfied_by(&a));

        for j in 0..=6 {
            assert_eq!(build_constraints(j).rows.len(), brute_triples(2 * j));
        }
    }

    #[test]
    fn nullspace_examples() {
        let b = solve_exponential_family(0);
        assert_eq!(b, vec![CoefficientMatrix::from_fn(0, |_, _| int(1))]);

        let b = solve_exponential_family(2);
        assert_eq!(b.len(), 3);
        assert_eq!(b[2].anti_diagonal(2), vec![int(1), int(2), int(1)]);

        let b = solve_exponential_family(5);
        assert_eq!(b.len(), 6);
        assert!(b.iter().all(is_time_constant));
    }

    #[test]
    fn recurrence_examples() {
        assert_eq!(recurrence_chain(3, 1).unwrap(), vec![int(1), int(1)]);
        assert_eq!(recurrence_chain(4, 4).unwrap(), [1, 4, 6, 4, 1].map(int).to_vec());
        assert!(recurrence_chain(3, 0).is_err());
        assert!(recurrence_chain(3, 4).is_err());
        let basis = solve_exponential_family(6);
        for n in 1..=6 {
            assert_eq!(recurrence_chain(6, n).unwrap(), basis[n].anti_diagonal(n));
        }
    }

    #[test]
    fn delta_identity_is_a_kronecker_delta() {
        assert_eq!(delta_identity(3, 1, 2).unwrap(), int(1));
        assert_eq!(delta_identity(4, 1, 1).unwrap(), int(0));
        for n in 0..=10 {
            for m in 0..=n {
                for l in 0..=n - m {
                    assert_eq!(delta_identity(n, m, l).unwrap(), int((l == n - m) as i64));
                }
            }
        }
        assert!(delta_identity(2, 2, 1).is_err());
    }

    #[test]
    fn split_examples() {
        let ones = CoefficientMatrix::from_fn(1, |_, _| int(1));
        let (lower, upper) = w_side_split(&ones);
        assert_eq!(upper.entries().filter(|(_, v)| !v.is_zero()).map(|(i, _)| i).collect::<Vec<_>>(), vec![(1, 1)]);
        assert_eq!(lower.add(&upper), ones);
        for b in solve_exponential_family(4) {
            assert!(w_side_split(&b).1.is_zero());
        }
    }

    #[test]
    fn certificate_passes_and_rejects_large_j() {
        for j in 0..=4 {
            let c = certify(j).unwrap();
            assert!(c.passed, "{}", c.to_text());
            assert_eq!(c.nullspace_dimension, j + 1);
        }
        assert!(matches!(certify(13), Err(Error::JTooLarge { j: 13, cap: 12 })));
    }

    fn gaussian() -> impl Strategy<Value = GaussianRational> {
        (-5i64..=5, -5i64..=5, 1i64..=3).prop_map(|(a, b, d)| {
            GaussianRational::from_fraction(a, d) + GaussianRational::from_fraction(b, d) * GaussianRational::i()
        })
    }

    fn coefficient_matrix() -> impl Strategy<Value = CoefficientMatrix> {
        (0usize..=6).prop_flat_map(|j| {
            proptest::collection::vec(gaussian(), (j + 1) * (j + 1))
                .prop_map(move |v| CoefficientMatrix::from_fn(j, |h, k| v[h * (j + 1) + k].clone()))
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn split_is_a_partition(a in coefficient_matrix()) {
            let (lower, upper) = w_side_split(&a);
            prop_assert_eq!(lower.add(&upper), a);
        }

        #[test]
        fn time_constancy_iff_in_the_family(a in coefficient_matrix()) {
            let j = a.j();
            let in_family = build_constraints(j).is_satisfied_by(&a);
            prop_assert_eq!(is_time_constant(&a), in_family);
            // Rebuild from the anti-diagonal heads: equal exactly when in the family.
            let basis = solve_exponential_family(j);
            let rebuilt = basis.iter().enumerate().fold(CoefficientMatrix::zeros(j), |acc, (n, b)| {
                acc.add(&b.scale(&a.get(n, 0)))
            });
            prop_assert_eq!(rebuilt == a, in_family);
        }

        #[test]
        fn family_members_are_time_constant(heads in proptest::collection::vec(gaussian(), 1..=7)) {
            let j = heads.len() - 1;
            let basis = solve_exponential_family(j);
            let a = basis.iter().zip(&heads).fold(CoefficientMatrix::zeros(j), |acc, (b, c)| acc.add(&b.scale(c)));
            prop_assert!(is_time_constant(&a));
        }
    }
}
