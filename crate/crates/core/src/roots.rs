//! Certified real-root isolation for the chain members.
//!
//! Roots are isolated by Sturm sequences over exact rationals, so every
//! isolating interval comes with a proof that it contains exactly one root.
//! All positive roots of a chain member lie in (0, 2]; 2 itself is a root
//! precisely at even orders and is split off exactly before isolating the
//! rest, so no isolating interval straddles the known endpoint.

use crate::polychain::{bigint_sign, Chain, IntPolynomial, RatPolynomial};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum RootError {
    /// The Sturm sequence ends in a non-constant gcd: a multiple root, which
    /// contradicts the simplicity of the chain roots and signals corruption.
    MultipleRoot { n: usize },
    /// Root count disagrees with nu(n).
    CountMismatch {
        n: usize,
        found: usize,
        expected: usize,
    },
    /// A root escaped the interval (0, 2].
    Localization { n: usize, detail: String },
    /// Interlace intervals could not be made pairwise disjoint.
    IntervalsOverlap { n: usize },
    /// Expected exact root at 2 is missing (even orders).
    MissingExactTwo { n: usize },
}

impl fmt::Display for RootError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::MultipleRoot { n } => write!(f, "multiple root detected for member {n}"),
            Self::CountMismatch { n, found, expected } => {
                write!(f, "member {n}: found {found} roots, expected {expected}")
            }
            Self::Localization { n, detail } => write!(f, "member {n}: {detail}"),
            Self::IntervalsOverlap { n } => {
                write!(f, "member {n}: isolating intervals overlap after refinement")
            }
            Self::MissingExactTwo { n } => write!(f, "member {n}: no exact root at 2"),
        }
    }
}

impl std::error::Error for RootError {}

/// Isolating interval for a single simple real root.
///
/// Either an open interval `(lo, hi)` with a strict sign change, or an exact
/// rational point. Endpoints are dyadic.
#[derive(Debug, Clone, PartialEq)]
pub struct CertifiedRoot {
    pub lo: BigRational,
    pub hi: BigRational,
    /// Chain index of the polynomial this root belongs to.
    pub poly_index: usize,
    /// Sign of the polynomial at `lo` (0 for exact points).
    pub sign_lo: i8,
    /// Sign at `hi`.
    pub sign_hi: i8,
    /// Exact rational root (lo == hi).
    pub is_exact: bool,
}

impl CertifiedRoot {
    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn mid(&self) -> BigRational {
        (&self.lo + &self.hi) / BigRational::from(BigInt::from(2))
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        if self.is_exact {
            self.lo == *x
        } else {
            self.lo < *x && *x < self.hi
        }
    }

    /// Strictly left of the other root interval.
    pub fn strictly_before(&self, other: &CertifiedRoot) -> bool {
        if self.is_exact || other.is_exact {
            self.hi < other.lo || (self.hi == other.lo && self.is_exact != other.is_exact)
        } else {
            self.hi <= other.lo
        }
    }
}

/// Sturm sequence with primitive-integer members (positive rescaling keeps
/// the sign structure intact).
pub struct SturmSequence {
    seq: Vec<IntPolynomial>,
}

impl SturmSequence {
    pub fn build(p: &IntPolynomial) -> Self {
        let mut seq = vec![p.clone(), p.derivative()];
        loop {
            let len = seq.len();
            let (prev, cur) = (&seq[len - 2], &seq[len - 1]);
            if cur.is_zero() {
                seq.pop();
                break;
            }
            let (_, rem) = RatPolynomial::from_int(prev).div_rem(&RatPolynomial::from_int(cur));
            if rem.is_zero() {
                break;
            }
            let next = rem.to_primitive_int().neg();
            seq.push(next);
        }
        Self { seq }
    }

    /// Last member; a non-constant value means gcd(p, p') is non-trivial.
    pub fn gcd_degree(&self) -> Option<usize> {
        self.seq.last().and_then(|g| g.degree())
    }

    pub fn variations_at(&self, x: &BigRational) -> usize {
        let mut count = 0usize;
        let mut last = 0i8;
        for s in &self.seq {
            let sg = s.sign_at(x);
            if sg == 0 {
                continue;
            }
            if last != 0 && sg != last {
                count += 1;
            }
            last = sg;
        }
        count
    }

    pub fn variations_at_pos_infinity(&self) -> usize {
        let mut count = 0usize;
        let mut last = 0i8;
        for s in &self.seq {
            let sg = bigint_sign(&s.leading_coeff());
            if sg == 0 {
                continue;
            }
            if last != 0 && sg != last {
                count += 1;
            }
            last = sg;
        }
        count
    }

    /// Number of distinct roots in `(a, b]`, assuming all roots simple.
    pub fn count_in(&self, a: &BigRational, b: &BigRational) -> usize {
        self.variations_at(a) - self.variations_at(b)
    }

    pub fn count_in_to_infinity(&self, a: &BigRational) -> usize {
        self.variations_at(a) - self.variations_at_pos_infinity()
    }
}

/// nu(n): number of positive roots of the n-th member.
pub fn expected_root_count(n: usize) -> usize {
    if n.is_multiple_of(2) {
        n / 2
    } else {
        (n - 1) / 2
    }
}

/// Isolates all positive roots of the n-th chain member, sorted ascending.
///
/// Even orders divide out `(2 - A)` exactly first and re-insert the exact
/// root 2 after verifying it, so no isolating interval straddles the known
/// endpoint.
pub fn isolate_positive_roots(chain: &Chain, n: usize) -> Result<Vec<CertifiedRoot>, RootError> {
    let p = chain.poly(n);
    let mut out;
    if n.is_multiple_of(2) {
        if p.eval_bigint(&BigInt::from(2)) != BigInt::zero() {
            return Err(RootError::MissingExactTwo { n });
        }
        let q = chain
            .quotient_by_two_minus_a(n)
            .map_err(|e| RootError::Localization {
                n,
                detail: format!("(2 - A) division failed: {e}"),
            })?;
        out = isolate_in_unit_domain(&q, p, n)?;
        out.push(exact_root(BigRational::from(BigInt::from(2)), n));
    } else {
        out = isolate_in_unit_domain(p, p, n)?;
    }
    out.sort_by(|a, b| a.lo.cmp(&b.lo));
    let expected = expected_root_count(n);
    if n >= 2 && out.len() != expected {
        return Err(RootError::CountMismatch {
            n,
            found: out.len(),
            expected,
        });
    }
    Ok(out)
}

fn exact_root(at: BigRational, n: usize) -> CertifiedRoot {
    CertifiedRoot {
        lo: at.clone(),
        hi: at,
        poly_index: n,
        sign_lo: 0,
        sign_hi: 0,
        is_exact: true,
    }
}

/// Isolates roots of `f` inside (0, 2); sign data is recorded against the
/// full member `p` (same signs on that domain when `f` is the `(2 - A)`
/// quotient, because the divided factor is positive there).
fn isolate_in_unit_domain(
    f: &IntPolynomial,
    p: &IntPolynomial,
    n: usize,
) -> Result<Vec<CertifiedRoot>, RootError> {
    let sturm = SturmSequence::build(f);
    if sturm.gcd_degree().unwrap_or(0) > 0 {
        return Err(RootError::MultipleRoot { n });
    }
    let zero = BigRational::zero();
    let two = BigRational::from(BigInt::from(2));
    // no roots at or beyond 2 other than the handled exact root
    let beyond = sturm.count_in_to_infinity(&two);
    if beyond != 0 || f.sign_at(&two) == 0 {
        return Err(RootError::Localization {
            n,
            detail: format!("{beyond} roots at or beyond A = 2 in quotient/member"),
        });
    }
    if f.sign_at(&zero) == 0 {
        return Err(RootError::Localization {
            n,
            detail: "member vanishes at 0".into(),
        });
    }
    let mut found = Vec::new();
    let mut stack = vec![(zero, two.clone())];
    while let Some((a, b)) = stack.pop() {
        let count = sturm.count_in(&a, &b);
        if count == 0 {
            continue;
        }
        let sa = p.sign_at(&a);
        let sb = p.sign_at(&b);
        if count == 1 && sa != 0 && sb != 0 && sa != sb {
            found.push(CertifiedRoot {
                lo: a,
                hi: b,
                poly_index: n,
                sign_lo: sa,
                sign_hi: sb,
                is_exact: false,
            });
            continue;
        }
        let m = (&a + &b) / BigRational::from(BigInt::from(2));
        if f.sign_at(&m) == 0 {
            // exact rational root at the split point
            found.push(exact_root(m.clone(), n));
            // carve out a punctured neighborhood containing only m
            let mut eps = (&b - &a) / BigRational::from(BigInt::from(4));
            loop {
                let ml = &m - &eps;
                let mr = &m + &eps;
                if ml > a
                    && mr < b
                    && f.sign_at(&ml) != 0
                    && f.sign_at(&mr) != 0
                    && sturm.count_in(&ml, &mr) == 1
                {
                    stack.push((a, ml));
                    stack.push((mr, b));
                    break;
                }
                eps /= BigRational::from(BigInt::from(2));
            }
        } else {
            stack.push((a, m.clone()));
            stack.push((m, b));
        }
    }
    // shrink any isolating interval leaning on the endpoint 2, so the exact
    // root 2 of even members stays disjoint
    for root in &mut found {
        while !root.is_exact && root.hi == two {
            let m = root.mid();
            let sm = p.sign_at(&m);
            if sm == 0 {
                *root = exact_root(m, n);
                break;
            }
            if sm == root.sign_lo {
                root.lo = m;
            } else {
                root.hi = m;
                root.sign_hi = sm;
            }
        }
    }
    Ok(found)
}

/// Bisection refinement until the interval width is at most `width`.
/// Exact points are returned unchanged; refinement is idempotent on narrow
/// intervals. Exact rational arithmetic throughout, so the result is
/// unconditionally correct.
pub fn refine(root: &CertifiedRoot, p: &IntPolynomial, width: &BigRational) -> CertifiedRoot {
    assert!(width > &BigRational::zero());
    let mut r = root.clone();
    if r.is_exact {
        return r;
    }
    let two = BigRational::from(BigInt::from(2));
    while r.width() > *width {
        let m = (&r.lo + &r.hi) / &two;
        let sm = p.sign_at(&m);
        if sm == 0 {
            return exact_root(m, r.poly_index);
        }
        if sm == r.sign_lo {
            r.lo = m;
        } else {
            r.hi = m;
            r.sign_hi = sm;
        }
    }
    r
}

/// Per-order table of certified roots for members `2 ..= n_max`.
#[derive(Debug, Clone)]
pub struct RootTable {
    rows: Vec<Vec<CertifiedRoot>>,
    n_max: usize,
}

impl RootTable {
    pub fn build(chain: &Chain, n_max: usize) -> Result<Self, RootError> {
        assert!(n_max <= chain.n_max());
        let mut rows = Vec::with_capacity(n_max);
        for n in 1..=n_max {
            if n == 1 {
                rows.push(Vec::new());
                continue;
            }
            rows.push(isolate_positive_roots(chain, n)?);
        }
        Ok(Self { rows, n_max })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// Roots of the n-th member, ascending.
    pub fn roots(&self, n: usize) -> &[CertifiedRoot] {
        &self.rows[n - 1]
    }

    /// Refines every interval of row n to width at most `width`.
    pub fn refine_row(&mut self, chain: &Chain, n: usize, width: &BigRational) {
        let p = chain.poly(n);
        for r in &mut self.rows[n - 1] {
            *r = refine(r, p, width);
        }
    }
}

/// Merged ordering entry of an interlace check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InterlaceSlot {
    Separated(usize),
    Separator(usize),
}

#[derive(Debug, Clone)]
pub struct InterlaceReport {
    pub n: usize,
    /// Merged ascending ordering of both root families.
    pub ordering: Vec<InterlaceSlot>,
    pub pass: bool,
    pub detail: String,
}

/// Checks the separation law for the pair (n-1, n): roots of an even member
/// are separated by all roots of the preceding odd member; roots of an odd
/// member are separated by the roots below 2 of the preceding even member.
pub fn check_interlacing(
    table: &mut RootTable,
    chain: &Chain,
    n: usize,
) -> Result<InterlaceReport, RootError> {
    assert!(n >= 2);
    if n == 2 {
        // the pair (1, 2) is degenerate: p_1 = 1 admits no roots
        return Ok(InterlaceReport {
            n,
            ordering: vec![InterlaceSlot::Separated(0)],
            pass: true,
            detail: "degenerate pair (1, 2): nothing to separate".into(),
        });
    }
    let two = BigRational::from(BigInt::from(2));
    let mut width = BigRational::new(BigInt::one(), BigInt::from(1u64 << 16));
    for _attempt in 0..16 {
        table.refine_row(chain, n, &width);
        table.refine_row(chain, n - 1, &width);
        let separated: Vec<&CertifiedRoot> = table.roots(n).iter().collect();
        let separator: Vec<&CertifiedRoot> = table
            .roots(n - 1)
            .iter()
            .filter(|r| !(n % 2 == 1 && r.lo >= two))
            .collect();
        if let Some(report) = try_interlace(n, &separated, &separator) {
            return Ok(report);
        }
        width /= BigRational::from(BigInt::from(1u64 << 16));
    }
    Err(RootError::IntervalsOverlap { n })
}

fn try_interlace(
    n: usize,
    separated: &[&CertifiedRoot],
    separator: &[&CertifiedRoot],
) -> Option<InterlaceReport> {
    struct Tagged<'a> {
        root: &'a CertifiedRoot,
        slot: InterlaceSlot,
    }
    let mut all: Vec<Tagged> = Vec::new();
    for (i, r) in separated.iter().enumerate() {
        all.push(Tagged {
            root: r,
            slot: InterlaceSlot::Separated(i),
        });
    }
    for (i, r) in separator.iter().enumerate() {
        all.push(Tagged {
            root: r,
            slot: InterlaceSlot::Separator(i),
        });
    }
    all.sort_by(|a, b| a.root.lo.cmp(&b.root.lo));
    // disjointness: every consecutive pair must be strictly ordered
    for w in all.windows(2) {
        if !w[0].root.strictly_before(w[1].root) {
            return None;
        }
    }
    let ordering: Vec<InterlaceSlot> = all.iter().map(|t| t.slot.clone()).collect();
    // expected pattern: separated, separator, separated, ..., separated
    let mut pass = separated.len() == separator.len() + 1;
    if pass {
        for (k, slot) in ordering.iter().enumerate() {
            let want_separated = k % 2 == 0;
            let is_separated = matches!(slot, InterlaceSlot::Separated(_));
            if want_separated != is_separated {
                pass = false;
                break;
            }
        }
    }
    let detail = if pass {
        format!(
            "{} roots separated by {} in strict alternation",
            separated.len(),
            separator.len()
        )
    } else {
        "alternation violated".into()
    };
    Some(InterlaceReport {
        n,
        ordering,
        pass,
        detail,
    })
}

/// Does member m vanish at the given certified root of a higher member?
/// Exact for point roots; otherwise a unit Sturm count of `p_m` over the
/// isolating interval decides, since any root of `p_m` inside an isolating
/// interval of a multiple-order member coincides with the isolated root
/// whenever `p_m` divides that member.
pub fn member_vanishes_at(chain: &Chain, m: usize, root: &CertifiedRoot) -> bool {
    let pm = chain.poly(m);
    if root.is_exact {
        return pm.eval_rational(&root.lo).is_zero();
    }
    let mut r = root.clone();
    let p_own = chain.poly(root.poly_index);
    // endpoints must avoid roots of p_m for the variation count
    for _ in 0..64 {
        if pm.sign_at(&r.lo) != 0 && pm.sign_at(&r.hi) != 0 {
            let sturm = SturmSequence::build(pm);
            return sturm.count_in(&r.lo, &r.hi) >= 1;
        }
        let w = r.width() / BigRational::from(BigInt::from(2));
        r = refine(&r, p_own, &w);
        if r.is_exact {
            return pm.eval_rational(&r.lo).is_zero();
        }
    }
    false
}

/// Minimal order k with k | n whose member vanishes at the root.
pub fn minimal_owner(chain: &Chain, n: usize, root: &CertifiedRoot) -> usize {
    for m in 2..n {
        if n.is_multiple_of(m) && member_vanishes_at(chain, m, root) {
            return m;
        }
    }
    n
}
