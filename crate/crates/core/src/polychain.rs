//! The canonical chain of bifurcation polynomials `p_n(A)`.
//!
//! The chain is built exactly over the integers by two independent routes:
//! a three-term recurrence and a derivative-sum recurrence. Both must agree
//! coefficient for coefficient, and the chain satisfies a list of structural
//! identities (constant term, degree, leading-coefficient cycle, divisibility,
//! parity) that `check_structure` verifies.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt;

/// Dense univariate polynomial in `A` with exact integer coefficients.
///
/// Coefficients are stored lowest power first; the highest-index coefficient
/// is nonzero unless the polynomial is zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntPolynomial {
    coeffs: Vec<BigInt>,
}

/// Signalled by [`IntPolynomial::exact_div`].
#[derive(Debug, Clone, PartialEq)]
pub enum DivisionError {
    /// Division by the zero polynomial.
    ZeroDivisor,
    /// The division left a nonzero remainder (carried here).
    NonZeroRemainder(IntPolynomial),
    /// Remainder is zero but the quotient is not an integer polynomial.
    NonIntegerQuotient,
}

impl fmt::Display for DivisionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::ZeroDivisor => write!(f, "division by the zero polynomial"),
            Self::NonZeroRemainder(r) => write!(f, "nonzero remainder {r}"),
            Self::NonIntegerQuotient => write!(f, "quotient has non-integer coefficients"),
        }
    }
}

impl std::error::Error for DivisionError {}

impl IntPolynomial {
    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: i64) -> Self {
        Self::from_coeffs(vec![BigInt::from(c)])
    }

    /// Builds from raw coefficients (lowest power first), trimming trailing zeros.
    pub fn from_coeffs(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_i64_coeffs(coeffs: &[i64]) -> Self {
        Self::from_coeffs(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> BigInt {
        self.coeffs.get(k).cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading_coeff(&self) -> BigInt {
        self.coeffs.last().cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn constant_term(&self) -> BigInt {
        self.coeff(0)
    }

    /// True if only even powers of `A` carry nonzero coefficients.
    pub fn is_even_polynomial(&self) -> bool {
        self.coeffs
            .iter()
            .enumerate()
            .all(|(k, c)| k % 2 == 0 || c.is_zero())
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            out.push(self.coeff(k) + other.coeff(k));
        }
        Self::from_coeffs(out)
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            out.push(self.coeff(k) - other.coeff(k));
        }
        Self::from_coeffs(out)
    }

    pub fn neg(&self) -> Self {
        Self::from_coeffs(self.coeffs.iter().map(|c| -c).collect())
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        Self::from_coeffs(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::from_coeffs(out)
    }

    /// Multiplies by the linear factor `c0 + c1*A`.
    pub fn mul_linear(&self, c0: &BigInt, c1: &BigInt) -> Self {
        self.mul(&Self::from_coeffs(vec![c0.clone(), c1.clone()]))
    }

    /// Formal derivative with respect to `A`.
    pub fn derivative(&self) -> Self {
        let out = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c * BigInt::from(k))
            .collect();
        Self::from_coeffs(out)
    }

    pub fn eval_bigint(&self, x: &BigInt) -> BigInt {
        let mut acc = BigInt::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn eval_rational(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + BigRational::from(c.clone());
        }
        acc
    }

    /// Sign of `p(x)` at an exact rational point, via homogeneous integer
    /// evaluation: `sign(sum c_k num^k den^(d-k))`.
    pub fn sign_at(&self, x: &BigRational) -> i8 {
        if self.is_zero() {
            return 0;
        }
        let num = x.numer();
        let den = x.denom();
        let d = self.coeffs.len() - 1;
        let mut num_pow = BigInt::one();
        let mut acc = BigInt::zero();
        // den^(d-k) built from a precomputed table of descending powers.
        let mut den_pows = Vec::with_capacity(d + 1);
        let mut dp = BigInt::one();
        for _ in 0..=d {
            den_pows.push(dp.clone());
            dp *= den;
        }
        for (k, c) in self.coeffs.iter().enumerate() {
            acc += c * &num_pow * &den_pows[d - k];
            num_pow *= num;
        }
        bigint_sign(&acc)
    }

    /// Exact Euclidean division; succeeds only when the remainder is zero and
    /// the quotient stays over the integers.
    pub fn exact_div(&self, divisor: &Self) -> Result<Self, DivisionError> {
        if divisor.is_zero() {
            return Err(DivisionError::ZeroDivisor);
        }
        let (q, r) = rational_div_rem(self, divisor);
        if !r.is_zero() {
            let r_int = rational_to_int_scaled(&r);
            return Err(DivisionError::NonZeroRemainder(r_int));
        }
        rational_to_int_exact(&q).ok_or(DivisionError::NonIntegerQuotient)
    }

    /// Divides out the integer content (gcd of coefficients); the sign of the
    /// leading coefficient is preserved. Zero maps to zero.
    pub fn primitive_part(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut g = BigInt::zero();
        for c in &self.coeffs {
            g = num_integer::Integer::gcd(&g, c);
        }
        Self::from_coeffs(self.coeffs.iter().map(|c| c / &g).collect())
    }
}

pub(crate) fn bigint_sign(x: &BigInt) -> i8 {
    if x.is_zero() {
        0
    } else if x.is_positive() {
        1
    } else {
        -1
    }
}

/// Polynomial with exact rational coefficients, used internally for division
/// and Sturm remainders.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct RatPolynomial {
    pub coeffs: Vec<BigRational>,
}

impl RatPolynomial {
    pub fn from_int(p: &IntPolynomial) -> Self {
        Self {
            coeffs: p.coeffs.iter().map(|c| BigRational::from(c.clone())).collect(),
        }
    }

    pub fn trim(mut self) -> Self {
        while self.coeffs.last().is_some_and(Zero::is_zero) {
            self.coeffs.pop();
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Remainder of Euclidean division, in place conventions: returns (q, r).
    pub fn div_rem(&self, divisor: &Self) -> (Self, Self) {
        let dd = divisor.degree().expect("nonzero divisor");
        let lead = divisor.coeffs[dd].clone();
        let mut rem = self.clone().trim();
        let mut quo = vec![
            BigRational::zero();
            rem.coeffs.len().saturating_sub(dd).max(1)
        ];
        while let Some(rd) = rem.degree() {
            if rd < dd {
                break;
            }
            let factor = &rem.coeffs[rd] / &lead;
            let shift = rd - dd;
            quo[shift] = factor.clone();
            for (k, dc) in divisor.coeffs.iter().enumerate() {
                let t = &factor * dc;
                rem.coeffs[shift + k] -= t;
            }
            rem = rem.trim();
        }
        (Self { coeffs: quo }.trim(), rem)
    }

    /// Scales by a positive rational so coefficients become coprime integers;
    /// sign pattern is unchanged. Zero maps to zero.
    pub fn to_primitive_int(&self) -> IntPolynomial {
        if self.is_zero() {
            return IntPolynomial::zero();
        }
        let mut den_lcm = BigInt::one();
        for c in &self.coeffs {
            den_lcm = num_integer::Integer::lcm(&den_lcm, c.denom());
        }
        let ints: Vec<BigInt> = self
            .coeffs
            .iter()
            .map(|c| c.numer() * (&den_lcm / c.denom()))
            .collect();
        IntPolynomial::from_coeffs(ints).primitive_part()
    }
}

fn rational_div_rem(a: &IntPolynomial, b: &IntPolynomial) -> (RatPolynomial, RatPolynomial) {
    RatPolynomial::from_int(a).div_rem(&RatPolynomial::from_int(b))
}

fn rational_to_int_exact(p: &RatPolynomial) -> Option<IntPolynomial> {
    let mut out = Vec::with_capacity(p.coeffs.len());
    for c in &p.coeffs {
        if !c.denom().is_one() {
            return None;
        }
        out.push(c.numer().clone());
    }
    Some(IntPolynomial::from_coeffs(out))
}

fn rational_to_int_scaled(p: &RatPolynomial) -> IntPolynomial {
    p.to_primitive_int()
}

impl fmt::Display for IntPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
                first = false;
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            match k {
                0 => write!(f, "{mag}")?,
                _ => {
                    if !mag.is_one() {
                        write!(f, "{mag}*")?;
                    }
                    if k == 1 {
                        write!(f, "A")?;
                    } else {
                        write!(f, "A^{k}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

/// Builds `p_1 ... p_n_max` by the three-term recurrence
/// `p_n = [2 - (-1)^n A] p_{n-1} - p_{n-2}` with `p_1 = 1`, `p_2 = 2 - A`.
pub fn build_chain_recurrence(n_max: usize) -> Vec<IntPolynomial> {
    assert!(n_max >= 1, "n_max must be >= 1");
    let mut chain = Vec::with_capacity(n_max);
    chain.push(IntPolynomial::constant(1));
    if n_max >= 2 {
        chain.push(IntPolynomial::from_i64_coeffs(&[2, -1]));
    }
    let two = BigInt::from(2);
    for n in 3..=n_max {
        // 2 - A for even n, 2 + A for odd n
        let c1 = if n % 2 == 0 {
            BigInt::from(-1)
        } else {
            BigInt::one()
        };
        let next = chain[n - 2].mul_linear(&two, &c1).sub(&chain[n - 3]);
        chain.push(next);
    }
    chain
}

/// Builds the same chain through the derivative sums: `p_n = n + sum_{j<n} d_j`
/// where `d_j` follows the parity recurrence with `d_0 = 0`, `d_1 = -A`.
pub fn build_chain_via_eprime(n_max: usize) -> Vec<IntPolynomial> {
    assert!(n_max >= 1, "n_max must be >= 1");
    let terms = eprime_terms(n_max.saturating_sub(1));
    let mut chain = Vec::with_capacity(n_max);
    let mut acc = IntPolynomial::zero();
    for n in 1..=n_max {
        if n >= 2 {
            acc = acc.add(&terms[n - 1].value);
        }
        chain.push(IntPolynomial::constant(n as i64).add(&acc));
    }
    chain
}

/// One term `d_n` of the derivative chain: the polynomial value of the
/// x-derivative of the n-th nested exponential at x = 1.
#[derive(Debug, Clone)]
pub struct EPrimeTerm {
    pub value: IntPolynomial,
}

/// Computes `d_0 ... d_n`: `d_n = A * sum_{odd j < n} (1 + d_j)` for even n,
/// `d_n = -A * sum_{even j < n} (1 + d_j)` for odd n.
pub fn eprime_terms(n: usize) -> Vec<EPrimeTerm> {
    let mut terms: Vec<EPrimeTerm> = Vec::with_capacity(n + 1);
    terms.push(EPrimeTerm {
        value: IntPolynomial::zero(),
    });
    if n == 0 {
        return terms;
    }
    terms.push(EPrimeTerm {
        value: IntPolynomial::from_i64_coeffs(&[0, -1]),
    });
    // Running sums of (1 + d_j) over odd and even j respectively.
    let mut sum_odd = IntPolynomial::constant(1).add(&terms[1].value);
    let mut sum_even = IntPolynomial::constant(1); // j = 0 contributes 1 + 0
    let zero = BigInt::zero();
    let one = BigInt::one();
    let minus_one = BigInt::from(-1);
    for k in 2..=n {
        let value = if k % 2 == 0 {
            sum_odd.mul_linear(&zero, &one)
        } else {
            sum_even.mul_linear(&zero, &minus_one)
        };
        let contrib = IntPolynomial::constant(1).add(&value);
        if k % 2 == 0 {
            sum_even = sum_even.add(&contrib);
        } else {
            sum_odd = sum_odd.add(&contrib);
        }
        terms.push(EPrimeTerm { value });
    }
    terms
}

/// Immutable, memoized chain `p_1 ... p_n_max` shared by the root and
/// continuation machinery.
#[derive(Debug, Clone)]
pub struct Chain {
    polys: Vec<IntPolynomial>,
}

impl Chain {
    pub fn build(n_max: usize) -> Self {
        Self {
            polys: build_chain_recurrence(n_max),
        }
    }

    pub fn n_max(&self) -> usize {
        self.polys.len()
    }

    /// `p_n`, 1-based.
    pub fn poly(&self, n: usize) -> &IntPolynomial {
        &self.polys[n - 1]
    }

    pub fn polys(&self) -> &[IntPolynomial] {
        &self.polys
    }

    /// Exact quotient `p_n / (2 - A)` for even n.
    pub fn quotient_by_two_minus_a(&self, n: usize) -> Result<IntPolynomial, DivisionError> {
        assert!(n.is_multiple_of(2), "quotient by 2 - A is defined for even n");
        self.poly(n).exact_div(&IntPolynomial::from_i64_coeffs(&[2, -1]))
    }

    /// Evaluates `p_n` at an exact rational parameter value.
    pub fn eval(&self, n: usize, a: &BigRational) -> BigRational {
        self.poly(n).eval_rational(a)
    }
}

/// Which structural identity a violation entry refers to.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub enum StructureCheck {
    ConstantTerm,
    Degree,
    LeadingCoeff,
    TwoDividesEven,
    EvenQuotientParity,
    OddParity,
    DivisorChain { k: usize },
}

impl fmt::Display for StructureCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::ConstantTerm => write!(f, "constant term"),
            Self::Degree => write!(f, "degree"),
            Self::LeadingCoeff => write!(f, "leading coefficient"),
            Self::TwoDividesEven => write!(f, "p_2 | p_even"),
            Self::EvenQuotientParity => write!(f, "p_even/(2-A) evenness"),
            Self::OddParity => write!(f, "p_odd evenness"),
            Self::DivisorChain { k } => write!(f, "p_n | p_{{{k}n}}"),
        }
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct StructureViolation {
    pub n: usize,
    pub check: StructureCheck,
    pub detail: String,
}

/// Per-member summary plus any violations; `all_pass` on a correct chain.
#[derive(Debug, Clone, serde::Serialize)]
pub struct StructureReport {
    pub rows: Vec<StructureRow>,
    pub violations: Vec<StructureViolation>,
    /// For prime n: whether every non-leading coefficient is divisible by n.
    /// Informational only.
    pub prime_coefficient_notes: Vec<(usize, bool)>,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct StructureRow {
    pub n: usize,
    pub constant_term: String,
    pub degree: usize,
    pub leading_coeff: String,
    pub even_member_or_quotient_is_even: bool,
    pub divisible_by_p2: Option<bool>,
}

impl StructureReport {
    pub fn all_pass(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Verifies the structural identities of the chain: constant term n, degree
/// n-1, leading coefficient following the period-4 sign cycle, divisibility
/// by `p_2` at even orders, parities of `p_odd` and `p_even/(2-A)`, and
/// `p_n | p_kn` for every kn within the chain.
pub fn check_structure(chain: &Chain) -> StructureReport {
    let mut violations = Vec::new();
    let mut rows = Vec::new();
    let mut prime_notes = Vec::new();
    let p2 = IntPolynomial::from_i64_coeffs(&[2, -1]);
    for n in 1..=chain.n_max() {
        let p = chain.poly(n);
        let constant = p.constant_term();
        if constant != BigInt::from(n) {
            violations.push(StructureViolation {
                n,
                check: StructureCheck::ConstantTerm,
                detail: format!("p_{n}(0) = {constant}, expected {n}"),
            });
        }
        let degree = p.degree().unwrap_or(0);
        if degree != n - 1 {
            violations.push(StructureViolation {
                n,
                check: StructureCheck::Degree,
                detail: format!("deg p_{n} = {degree}, expected {}", n - 1),
            });
        }
        let lead = p.leading_coeff();
        let expect_lead = if n % 4 == 0 || n % 4 == 1 { 1 } else { -1 };
        if lead != BigInt::from(expect_lead) {
            violations.push(StructureViolation {
                n,
                check: StructureCheck::LeadingCoeff,
                detail: format!("lead(p_{n}) = {lead}, expected {expect_lead}"),
            });
        }
        let mut quotient_even = true;
        let mut div_by_p2 = None;
        if n % 2 == 0 {
            match p.exact_div(&p2) {
                Ok(q) => {
                    div_by_p2 = Some(true);
                    quotient_even = q.is_even_polynomial();
                    if !quotient_even {
                        violations.push(StructureViolation {
                            n,
                            check: StructureCheck::EvenQuotientParity,
                            detail: format!("p_{n}/(2-A) = {q} has odd powers"),
                        });
                    }
                }
                Err(e) => {
                    div_by_p2 = Some(false);
                    violations.push(StructureViolation {
                        n,
                        check: StructureCheck::TwoDividesEven,
                        detail: format!("p_2 does not divide p_{n}: {e}"),
                    });
                }
            }
        } else {
            quotient_even = p.is_even_polynomial();
            if n > 1 && !quotient_even {
                violations.push(StructureViolation {
                    n,
                    check: StructureCheck::OddParity,
                    detail: format!("p_{n} has odd powers"),
                });
            }
        }
        // p_n | p_kn for all kn in range
        for k in 2.. {
            let kn = k * n;
            if kn > chain.n_max() {
                break;
            }
            if chain.poly(kn).exact_div(p).is_err() {
                violations.push(StructureViolation {
                    n,
                    check: StructureCheck::DivisorChain { k },
                    detail: format!("p_{n} does not divide p_{kn}"),
                });
            }
        }
        if n >= 2 && is_prime(n) {
            let nn = BigInt::from(n);
            let ok = p
                .coeffs()
                .iter()
                .take(p.coeffs().len().saturating_sub(1))
                .all(|c| (c % &nn).is_zero());
            prime_notes.push((n, ok));
        }
        rows.push(StructureRow {
            n,
            constant_term: constant.to_string(),
            degree,
            leading_coeff: lead.to_string(),
            even_member_or_quotient_is_even: quotient_even,
            divisible_by_p2: div_by_p2,
        });
    }
    StructureReport {
        rows,
        violations,
        prime_coefficient_notes: prime_notes,
    }
}

fn is_prime(n: usize) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    /// First thirteen chain members, coefficients lowest power first.
    pub(crate) const TABLE_13: [&[i64]; 13] = [
        &[1],
        &[2, -1],
        &[3, 0, -1],
        &[4, -2, -2, 1],
        &[5, 0, -5, 0, 1],
        &[6, -3, -8, 4, 2, -1],
        &[7, 0, -14, 0, 7, 0, -1],
        &[8, -4, -20, 10, 12, -6, -2, 1],
        &[9, 0, -30, 0, 27, 0, -9, 0, 1],
        &[10, -5, -40, 20, 42, -21, -16, 8, 2, -1],
        &[11, 0, -55, 0, 77, 0, -44, 0, 11, 0, -1],
        &[12, -6, -70, 35, 112, -56, -72, 36, 20, -10, -2, 1],
        &[13, 0, -91, 0, 182, 0, -156, 0, 65, 0, -13, 0, 1],
    ];

    #[test]
    fn recurrence_matches_fixture() {
        let chain = build_chain_recurrence(13);
        for (i, expect) in TABLE_13.iter().enumerate() {
            assert_eq!(
                chain[i],
                IntPolynomial::from_i64_coeffs(expect),
                "row {}",
                i + 1
            );
        }
    }

    #[test]
    fn eprime_route_matches_recurrence() {
        let a = build_chain_recurrence(30);
        let b = build_chain_via_eprime(30);
        assert_eq!(a, b);
    }

    #[test]
    fn eprime_terms_have_degree_n() {
        let terms = eprime_terms(12);
        for (n, t) in terms.iter().enumerate().skip(1) {
            assert_eq!(t.value.degree(), Some(n), "degree of term {n}");
        }
    }

    #[test]
    fn single_member_chain() {
        let chain = build_chain_recurrence(1);
        assert_eq!(chain, vec![IntPolynomial::constant(1)]);
        assert_eq!(build_chain_via_eprime(1), chain);
    }

    #[test]
    fn structure_report_passes_to_40() {
        let chain = Chain::build(40);
        let report = check_structure(&chain);
        assert!(
            report.all_pass(),
            "violations: {:?}",
            report.violations
        );
        // Every prime order observed so far keeps its non-leading
        // coefficients divisible by the order.
        assert!(report.prime_coefficient_notes.iter().all(|(_, ok)| *ok));
    }

    #[test]
    fn quotient_p4_by_p2() {
        let chain = Chain::build(4);
        let q = chain.quotient_by_two_minus_a(4).unwrap();
        assert_eq!(q, IntPolynomial::from_i64_coeffs(&[2, 0, -1]));
    }

    #[test]
    fn p6_divided_by_p3_is_exact() {
        let chain = Chain::build(6);
        let q = chain.poly(6).exact_div(chain.poly(3)).unwrap();
        assert_eq!(q.mul(chain.poly(3)), *chain.poly(6));
    }

    #[test]
    fn p5_divided_by_p2_has_remainder() {
        let chain = Chain::build(5);
        match chain.poly(5).exact_div(chain.poly(2)) {
            Err(DivisionError::NonZeroRemainder(r)) => {
                // p_5(2) = 1, so the remainder is the nonzero constant 1.
                assert_eq!(r, IntPolynomial::constant(1));
            }
            other => panic!("expected remainder, got {other:?}"),
        }
    }

    #[test]
    fn division_by_zero_rejected() {
        let p = IntPolynomial::from_i64_coeffs(&[1, 2, 3]);
        assert_eq!(
            p.exact_div(&IntPolynomial::zero()),
            Err(DivisionError::ZeroDivisor)
        );
    }

    #[test]
    fn product_division_roundtrip() {
        let mut rng = crate::prng::Prng::new(0x5eed);
        for _ in 0..50 {
            let a = random_poly(&mut rng, 6);
            let b = random_poly(&mut rng, 4);
            if b.is_zero() {
                continue;
            }
            assert_eq!(a.mul(&b).exact_div(&b).unwrap(), a);
        }
    }

    fn random_poly(rng: &mut crate::prng::Prng, max_deg: usize) -> IntPolynomial {
        let deg = (rng.next_u64() as usize) % (max_deg + 1);
        let coeffs: Vec<BigInt> = (0..=deg)
            .map(|_| BigInt::from((rng.next_u64() % 21) as i64 - 10))
            .collect();
        IntPolynomial::from_coeffs(coeffs)
    }

    #[test]
    fn sign_at_rational_points() {
        let p = IntPolynomial::from_i64_coeffs(&[-2, 0, 1]); // A^2 - 2
        let half = BigRational::new(BigInt::from(1), BigInt::from(2));
        let two = BigRational::from(BigInt::from(2));
        assert_eq!(p.sign_at(&half), -1);
        assert_eq!(p.sign_at(&two), 1);
        let p2 = IntPolynomial::from_i64_coeffs(&[2, -1]);
        assert_eq!(p2.sign_at(&two), 0);
    }

    #[test]
    fn display_formatting() {
        let chain = build_chain_recurrence(4);
        assert_eq!(chain[3].to_string(), "A^3 - 2*A^2 - 2*A + 4");
        assert_eq!(chain[0].to_string(), "1");
    }
}
