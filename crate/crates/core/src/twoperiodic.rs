//! Period-doubled states for the general two-parameter (A, B) system.
//!
//! The scalar reduction is
//!
//! ```text
//! phi(B, x) = x (e^{g(x) B} + 1) - 2,    g(x) = (e^{(1-x)A} - 1) / (e^{(1-x)A} + 1)
//! ```
//!
//! on [0, 2]: interior zeros besides 1 are the period-doubled coexistence
//! states. For AB > 4 there are exactly two, one on each side of 1, and both
//! are transversal; for AB <= 4 there are none. `solve_2t` certifies that
//! multiplicity, not merely searches: a derivative-sign window isolates the
//! trivial zero and a verified exclusion sweep covers the rest of the domain.

use crate::interval::{escalate, Interval, IntervalError, IvCtx, PrecisionPolicy};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum TwoPeriodicError {
    /// AB = 4 exactly: the trivial zero is treble and the derivative-window
    /// certificate does not apply.
    DegeneratePitchfork,
    /// Couldn't certify a sign or exclusion at the precision ceiling.
    Precision(IntervalError),
    /// The sweep found a zero pattern contradicting the expected multiplicity.
    MultiplicityViolation { found: usize, expected: usize },
    /// Some subregion stayed unresolved after subdivision.
    Unresolved { lo: String, hi: String },
}

impl fmt::Display for TwoPeriodicError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::DegeneratePitchfork => write!(f, "AB = 4 exactly (pitchfork point)"),
            Self::Precision(e) => write!(f, "{e}"),
            Self::MultiplicityViolation { found, expected } => {
                write!(f, "found {found} zeros, expected {expected}")
            }
            Self::Unresolved { lo, hi } => write!(f, "unresolved region [{lo}, {hi}]"),
        }
    }
}

impl std::error::Error for TwoPeriodicError {}

impl From<IntervalError> for TwoPeriodicError {
    fn from(e: IntervalError) -> Self {
        Self::Precision(e)
    }
}

/// Enclosure of `phi(B, x)`.
pub fn eval_phi2(ctx: &mut IvCtx, a: &Interval, b: &Interval, x: &Interval) -> Interval {
    let one = Interval::one();
    let e1 = {
        let t = ctx.sub(&one, x);
        let arg = ctx.mul(&t, a);
        ctx.exp(&arg)
    };
    let num = ctx.sub(&e1, &one);
    let den = ctx.add(&e1, &one);
    let g = ctx.div(&num, &den);
    let gb = ctx.mul(&g, b);
    let egb = ctx.exp(&gb);
    let inner = ctx.add(&egb, &one);
    let xi = ctx.mul(x, &inner);
    ctx.add_i64(&xi, -2)
}

/// Enclosure of `d phi / dx`:
/// `(e^{gB} + 1) + x B g' e^{gB}` with `g' = -2 A e1 / (e1 + 1)^2`.
pub fn eval_dphi2_dx(ctx: &mut IvCtx, a: &Interval, b: &Interval, x: &Interval) -> Interval {
    let one = Interval::one();
    let e1 = {
        let t = ctx.sub(&one, x);
        let arg = ctx.mul(&t, a);
        ctx.exp(&arg)
    };
    let num = ctx.sub(&e1, &one);
    let den = ctx.add(&e1, &one);
    let g = ctx.div(&num, &den);
    let gb = ctx.mul(&g, b);
    let egb = ctx.exp(&gb);
    let den2 = ctx.mul(&den, &den);
    let gprime = {
        let t = ctx.mul(a, &e1);
        let t2 = ctx.mul_i64(&t, -2);
        ctx.div(&t2, &den2)
    };
    let slope = {
        let t = ctx.mul(x, b);
        let t2 = ctx.mul(&t, &gprime);
        ctx.mul(&t2, &egb)
    };
    let base = ctx.add(&egb, &one);
    ctx.add(&base, &slope)
}

/// Enclosure of `d^2 phi / dx^2`, the optional curvature diagnostic. With
/// `q = gB` the chain rule gives `phi'' = e^q (2q' + x(q'' + q'^2))`, where
/// `g'' = 2 A^2 e1 (1 - e1) / (e1 + 1)^3`.
pub fn eval_d2phi2_dx2(ctx: &mut IvCtx, a: &Interval, b: &Interval, x: &Interval) -> Interval {
    let one = Interval::one();
    let e1 = {
        let t = ctx.sub(&one, x);
        let arg = ctx.mul(&t, a);
        ctx.exp(&arg)
    };
    let num = ctx.sub(&e1, &one);
    let den = ctx.add(&e1, &one);
    let g = ctx.div(&num, &den);
    let gb = ctx.mul(&g, b);
    let egb = ctx.exp(&gb);
    let den2 = ctx.mul(&den, &den);
    let den3 = ctx.mul(&den2, &den);
    let qprime = {
        let t = ctx.mul(a, &e1);
        let t2 = ctx.mul_i64(&t, -2);
        let gp = ctx.div(&t2, &den2);
        ctx.mul(&gp, b)
    };
    let qsecond = {
        let a2 = ctx.mul(a, a);
        let om = ctx.sub(&one, &e1);
        let t = ctx.mul(&a2, &e1);
        let t2 = ctx.mul(&t, &om);
        let t3 = ctx.mul_i64(&t2, 2);
        let gpp = ctx.div(&t3, &den3);
        ctx.mul(&gpp, b)
    };
    let qp2 = ctx.mul(&qprime, &qprime);
    let inner = {
        let s = ctx.add(&qsecond, &qp2);
        let xs = ctx.mul(x, &s);
        let twoqp = ctx.mul_i64(&qprime, 2);
        ctx.add(&twoqp, &xs)
    };
    ctx.mul(&egb, &inner)
}

/// One certified nontrivial zero of `phi(B, .)`.
#[derive(Debug, Clone)]
pub struct Zero2T {
    pub lo: BigRational,
    pub hi: BigRational,
    /// Certified sign of `phi'` over the final enclosure (transversality).
    pub dphi_positive: bool,
}

impl Zero2T {
    pub fn mid(&self) -> BigRational {
        (&self.lo + &self.hi) / BigRational::from(BigInt::from(2))
    }
}

/// Result of the certified multiplicity computation.
#[derive(Debug, Clone)]
pub struct TwoPeriodicZeros {
    pub a: BigRational,
    pub b: BigRational,
    /// Nontrivial zeros, ascending; empty exactly when AB <= 4.
    pub zeros: Vec<Zero2T>,
}

/// Reconstructed initial data of a period-doubled state from its `v0` zero.
#[derive(Debug, Clone)]
pub struct TwoPeriodicState {
    pub v0: Interval,
    pub u0: Interval,
    pub u1: Interval,
    pub v1: Interval,
}

/// `u0 = 2 / (e^{(1-v0)A} + 1)` and the half-period complements.
pub fn reconstruct_state(ctx: &mut IvCtx, a: &BigRational, zero: &Zero2T) -> TwoPeriodicState {
    let ai = ctx.from_rational(a);
    let v0 = {
        let lo = ctx.from_rational(&zero.lo);
        let hi = ctx.from_rational(&zero.hi);
        lo.hull(&hi)
    };
    let one = Interval::one();
    let e1 = {
        let t = ctx.sub(&one, &v0);
        let arg = ctx.mul(&t, &ai);
        ctx.exp(&arg)
    };
    let den = ctx.add(&e1, &one);
    let two = Interval::from_i64(2, ctx.prec);
    let u0 = ctx.div(&two, &den);
    let u1 = ctx.sub(&two, &u0);
    let v1 = ctx.sub(&two, &v0);
    TwoPeriodicState { v0, u0, u1, v1 }
}

fn phi2_sign(
    policy: &PrecisionPolicy,
    a: &BigRational,
    b: &BigRational,
    x: &BigRational,
) -> Option<i8> {
    escalate(policy, |ctx| {
        let ai = ctx.from_rational(a);
        let bi = ctx.from_rational(b);
        let xi = ctx.from_rational(x);
        let v = eval_phi2(ctx, &ai, &bi, &xi);
        match v.sign() {
            0 => None,
            s => Some(s),
        }
    })
    .ok()
}

/// Interval-argument evaluations over wide cells are limited by dependency
/// overestimation, which more precision cannot remove; they run on a short
/// ladder while point evaluations keep the full one.
fn wide_cell_policy(policy: &PrecisionPolicy) -> PrecisionPolicy {
    PrecisionPolicy {
        start_bits: policy.start_bits,
        ceiling_bits: (policy.start_bits * 2).min(policy.ceiling_bits),
    }
}

fn phi2_excludes_zero_on(
    policy: &PrecisionPolicy,
    a: &BigRational,
    b: &BigRational,
    lo: &BigRational,
    hi: &BigRational,
) -> bool {
    escalate(&wide_cell_policy(policy), |ctx| {
        let ai = ctx.from_rational(a);
        let bi = ctx.from_rational(b);
        let lo_i = ctx.from_rational(lo);
        let hi_i = ctx.from_rational(hi);
        let xw = lo_i.hull(&hi_i);
        let v = eval_phi2(ctx, &ai, &bi, &xw);
        if v.sign() != 0 {
            return Some(true);
        }
        // centered form: phi(mid) + phi'(cell) (cell - mid); sharp where the
        // plain hull loses to the dependency problem near flat zeros
        let mid = (lo + hi) / BigRational::from(BigInt::from(2));
        let half_width = (hi - lo) / BigRational::from(BigInt::from(2));
        let mid_i = ctx.from_rational(&mid);
        let f_mid = eval_phi2(ctx, &ai, &bi, &mid_i);
        let slope = eval_dphi2_dx(ctx, &ai, &bi, &xw);
        let radius = {
            let h = ctx.from_rational(&half_width);
            ctx.mul(&slope.abs_hi_interval(ctx.prec), &h)
        };
        if f_mid.abs_lo_exceeds(&radius) {
            Some(true)
        } else {
            None
        }
    })
    .unwrap_or(false)
}

/// Proves `phi(B, .)` has no zero on `[lo, hi]`: marches left to right with
/// an adaptive cell width (grow on success, shrink on ambiguity).
fn exclusion_sweep(
    policy: &PrecisionPolicy,
    a: &BigRational,
    b: &BigRational,
    lo: &BigRational,
    hi: &BigRational,
) -> Result<(), TwoPeriodicError> {
    if lo >= hi {
        return Ok(());
    }
    let span = hi - lo;
    let two = BigRational::from(BigInt::from(2));
    let min_width = &span / BigRational::from(BigInt::one() << 40);
    let mut cur = lo.clone();
    let mut width = &span / BigRational::from(BigInt::from(4));
    while cur < *hi {
        let end = (&cur + &width).min(hi.clone());
        if phi2_excludes_zero_on(policy, a, b, &cur, &end) {
            cur = end;
            width = (&width * &two).min(span.clone());
        } else {
            width = &width / &two;
            if width < min_width {
                return Err(TwoPeriodicError::Unresolved {
                    lo: cur.to_string(),
                    hi: hi.to_string(),
                });
            }
        }
    }
    Ok(())
}

/// Certifies that `phi'` keeps one sign on the window `[lo, hi]`.
fn dphi2_window_sign(
    policy: &PrecisionPolicy,
    a: &BigRational,
    b: &BigRational,
    lo: &BigRational,
    hi: &BigRational,
) -> Option<i8> {
    escalate(&wide_cell_policy(policy), |ctx| {
        let ai = ctx.from_rational(a);
        let bi = ctx.from_rational(b);
        let lo_i = ctx.from_rational(lo);
        let hi_i = ctx.from_rational(hi);
        let xw = lo_i.hull(&hi_i);
        let d = eval_dphi2_dx(ctx, &ai, &bi, &xw);
        match d.sign() {
            0 => None,
            s => Some(s),
        }
    })
    .ok()
}

fn bisect_phi2(
    policy: &PrecisionPolicy,
    a: &BigRational,
    b: &BigRational,
    mut lo: BigRational,
    mut hi: BigRational,
    s_lo: i8,
    tol: &BigRational,
) -> Result<(BigRational, BigRational), TwoPeriodicError> {
    let two = BigRational::from(BigInt::from(2));
    while &hi - &lo > *tol {
        let mid = (&lo + &hi) / &two;
        let sm = phi2_sign(policy, a, b, &mid).ok_or(TwoPeriodicError::Precision(
            IntervalError::PrecisionExhausted {
                ceiling_bits: policy.ceiling_bits,
            },
        ))?;
        if sm == s_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo, hi))
}

/// Finds the single zero in `[seg_lo, seg_hi]` (sign change `s_lo` at the
/// left end) and certifies its uniqueness on the whole segment: a
/// derivative-sign window isolates the zero, and exclusion sweeps cover the
/// remainder, where the function is bounded away from zero by the window
/// padding. Exclusion right up against the bracket would never terminate,
/// which is what the window is for.
fn locate_unique_zero(
    policy: &PrecisionPolicy,
    a: &BigRational,
    b: &BigRational,
    seg_lo: &BigRational,
    seg_hi: &BigRational,
    s_lo: i8,
    tol: &BigRational,
) -> Result<Zero2T, TwoPeriodicError> {
    let coarse = tol.clone().min(BigRational::new(BigInt::one(), BigInt::from(1u64 << 16)));
    let bracket = bisect_phi2(policy, a, b, seg_lo.clone(), seg_hi.clone(), s_lo, &coarse)?;
    // expand a monotone window around the bracket
    let mut pad = BigRational::new(BigInt::one(), BigInt::from(256));
    let pad_min = BigRational::new(BigInt::one(), BigInt::from(1u64 << 52));
    let (w_lo, w_hi) = loop {
        if pad < pad_min {
            return Err(TwoPeriodicError::Unresolved {
                lo: bracket.0.to_string(),
                hi: bracket.1.to_string(),
            });
        }
        let w_lo = (&bracket.0 - &pad).max(seg_lo.clone());
        let w_hi = (&bracket.1 + &pad).min(seg_hi.clone());
        if dphi2_window_sign(policy, a, b, &w_lo, &w_hi).is_some() {
            break (w_lo, w_hi);
        }
        pad = &pad / BigRational::from(BigInt::from(2));
    };
    exclusion_sweep(policy, a, b, seg_lo, &w_lo)?;
    exclusion_sweep(policy, a, b, &w_hi, seg_hi)?;
    // refine to the requested tolerance and certify transversality
    let (lo, hi) = bisect_phi2(policy, a, b, bracket.0, bracket.1, s_lo, tol)?;
    let dphi_positive = dphi2_window_sign(policy, a, b, &lo, &hi) == Some(1);
    Ok(Zero2T {
        lo,
        hi,
        dphi_positive,
    })
}

/// The certified zero set of `phi(B, .)` besides the trivial zero.
///
/// For AB > 4 this returns exactly two transversal zeros `z1 < 1 < z2`; for
/// AB < 4 it returns the empty set. Either way the answer is verified: the
/// remainder of `[0, 2]` is covered by exclusion certificates.
pub fn solve_2t(
    policy: &PrecisionPolicy,
    a: &BigRational,
    b: &BigRational,
    tol: &BigRational,
) -> Result<TwoPeriodicZeros, TwoPeriodicError> {
    assert!(a > &BigRational::zero() && b > &BigRational::zero());
    let ab = a * b;
    let four = BigRational::from(BigInt::from(4));
    if ab == four {
        return Err(TwoPeriodicError::DegeneratePitchfork);
    }
    let supercritical = ab > four;
    let one = BigRational::one();
    let two = BigRational::from(BigInt::from(2));

    // derivative-sign window around the trivial zero; phi'(1) = 2 - AB/2
    let expected_window_sign = if supercritical { -1 } else { 1 };
    let mut delta = BigRational::new(BigInt::one(), BigInt::from(4));
    let delta_min = BigRational::new(BigInt::one(), BigInt::from(1u64 << 48));
    loop {
        if delta < delta_min {
            return Err(TwoPeriodicError::Precision(
                IntervalError::PrecisionExhausted {
                    ceiling_bits: policy.ceiling_bits,
                },
            ));
        }
        let lo = &one - &delta;
        let hi = &one + &delta;
        if dphi2_window_sign(policy, a, b, &lo, &hi) == Some(expected_window_sign) {
            break;
        }
        delta = &delta / &two;
    }
    let left_end = &one - &delta;
    let right_end = &one + &delta;

    let mut zeros = Vec::new();
    if supercritical {
        // phi(0) = -2 < 0 and phi just left of 1 is positive
        let s_left_end = phi2_sign(policy, a, b, &left_end);
        if s_left_end != Some(1) {
            return Err(TwoPeriodicError::MultiplicityViolation {
                found: 0,
                expected: 2,
            });
        }
        let z1 = locate_unique_zero(
            policy, a, b, &BigRational::zero(), &left_end, -1, tol,
        )?;
        // right side: phi just right of 1 is negative, phi(2) > 0
        let s_right_end = phi2_sign(policy, a, b, &right_end);
        if s_right_end != Some(-1) {
            return Err(TwoPeriodicError::MultiplicityViolation {
                found: 1,
                expected: 2,
            });
        }
        let z2 = locate_unique_zero(policy, a, b, &right_end, &two, -1, tol)?;
        zeros.push(z1);
        zeros.push(z2);
    } else {
        // subcritical: certify emptiness on both sides of the window
        exclusion_sweep(policy, a, b, &BigRational::zero(), &left_end)?;
        exclusion_sweep(policy, a, b, &right_end, &two)?;
    }
    Ok(TwoPeriodicZeros {
        a: a.clone(),
        b: b.clone(),
        zeros,
    })
}

/// Pitchfork diagnostics along the trivial solution: critical parameter,
/// linearization at the queried B, and the second and third x-derivatives at
/// the critical point. All values are exact rationals derived from the
/// closed forms; the second derivative vanishes there.
///
/// With `q(x)` the exponent of the outer exponential, the derivatives at
/// x = 1 are `phi'' = 2q' + q'' + q'^2` and
/// `phi''' = 3(q'' + q'^2) + q''' + 3q'q'' + q'^3`, where
/// `q'(1) = -AB/2`, `q''(1) = 0`, `q'''(1) = A^3 B / 4`. Hence
/// `phi''(1) = (AB/2)^2 - AB` and
/// `phi'''(1) = 3(AB)^2/4 - (AB)^3/8 + A^3 B / 4`, which at `AB = 4`
/// reduce to `0` and `4 + A^2 > 0`. A finite-difference cross-check of both
/// values lives in the test suite.
#[derive(Debug, Clone, PartialEq)]
pub struct PitchforkData {
    pub b_crit: BigRational,
    /// `2 - AB/2` at the queried B.
    pub dphi_at_1: BigRational,
    /// Second derivative at B = b_crit; identically zero.
    pub d2phi_at_1_crit: BigRational,
    /// Third derivative at B = b_crit: `4 + A^2`.
    pub d3phi_at_1_crit: BigRational,
}

pub fn pitchfork_data(a: &BigRational, b_query: &BigRational) -> PitchforkData {
    assert!(a > &BigRational::zero());
    let four = BigRational::from(BigInt::from(4));
    let two = BigRational::from(BigInt::from(2));
    let eight = BigRational::from(BigInt::from(8));
    let b_crit = &four / a;
    let ab = a * b_query;
    let dphi_at_1 = &two - &ab / &two;
    let ab_crit = a * &b_crit;
    let d2 = (&ab_crit / &two) * (&ab_crit / &two) - &ab_crit;
    let d3 = BigRational::from(BigInt::from(3)) * &ab_crit * &ab_crit / &four
        - &ab_crit * &ab_crit * &ab_crit / &eight
        + a * a * &ab_crit / &four;
    PitchforkData {
        b_crit,
        dphi_at_1,
        d2phi_at_1_crit: d2,
        d3phi_at_1_crit: d3,
    }
}

/// Sampled half-branches of the global period-doubled curve, parameterized
/// by B on a grid just above the critical value.
#[derive(Debug, Clone)]
pub struct Curve2T {
    pub a: BigRational,
    pub samples: Vec<CurveSample>,
    pub failures: Vec<(BigRational, String)>,
}

#[derive(Debug, Clone)]
pub struct CurveSample {
    pub b: BigRational,
    pub lower: Zero2T,
    pub upper: Zero2T,
}

pub fn trace_2t_curve(
    policy: &PrecisionPolicy,
    a: &BigRational,
    b_max: &BigRational,
    steps: usize,
    tol: &BigRational,
) -> Curve2T {
    assert!(steps >= 1);
    let b_crit = BigRational::from(BigInt::from(4)) / a;
    assert!(b_max > &b_crit, "b_max must exceed the critical value 4/A");
    let span = b_max - &b_crit;
    let mut samples = Vec::new();
    let mut failures = Vec::new();
    for k in 1..=steps {
        let b =
            &b_crit + &span * BigRational::new(BigInt::from(k as i64), BigInt::from(steps as i64));
        match solve_2t(policy, a, &b, tol) {
            Ok(z) if z.zeros.len() == 2 => {
                samples.push(CurveSample {
                    b,
                    lower: z.zeros[0].clone(),
                    upper: z.zeros[1].clone(),
                });
            }
            Ok(z) => failures.push((b, format!("{} zeros", z.zeros.len()))),
            Err(e) => failures.push((b, e.to_string())),
        }
    }
    Curve2T {
        a: a.clone(),
        samples,
        failures,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn phi2_fixed_values() {
        let mut ctx = IvCtx::new(128);
        let a = ctx.from_rational(&rat(3, 1));
        let b = ctx.from_rational(&rat(3, 1));
        // phi(0) = -2 exactly
        let v0 = eval_phi2(&mut ctx, &a, &b, &Interval::zero());
        assert!(v0.contains(&Interval::from_i64(-2, 64)));
        // phi(1) = 0
        let v1 = eval_phi2(&mut ctx, &a, &b, &Interval::one());
        assert!(v1.contains_zero());
        // phi(2) > 0
        let two = Interval::from_i64(2, 128);
        let v2 = eval_phi2(&mut ctx, &a, &b, &two);
        assert!(v2.is_positive());
    }

    #[test]
    fn phi2_positive_at_two_for_random_parameters() {
        let mut rng = crate::prng::Prng::new(0x2222);
        let mut ctx = IvCtx::new(192);
        for _ in 0..20 {
            let a = rng.dyadic_in((1, 10), (4, 1), 10);
            let b = rng.dyadic_in((1, 10), (4, 1), 10);
            let ai = ctx.from_rational(&a);
            let bi = ctx.from_rational(&b);
            let two = Interval::from_i64(2, 192);
            let v = eval_phi2(&mut ctx, &ai, &bi, &two);
            assert!(v.is_positive(), "phi(2) at A={a} B={b}: {v}");
        }
    }

    #[test]
    fn supercritical_multiplicity() {
        let policy = PrecisionPolicy::default();
        let tol = rat(1, 1i64 << 40);
        let z = solve_2t(&policy, &rat(3, 1), &rat(3, 1), &tol).unwrap();
        assert_eq!(z.zeros.len(), 2);
        assert!(z.zeros[0].hi < rat(1, 1));
        assert!(z.zeros[1].lo > rat(1, 1));
        assert!(z.zeros[0].dphi_positive && z.zeros[1].dphi_positive);
        // asymmetric parameters
        let z2 = solve_2t(&policy, &rat(4, 1), &rat(101, 100), &tol).unwrap();
        assert_eq!(z2.zeros.len(), 2);
    }

    #[test]
    fn subcritical_emptiness() {
        let policy = PrecisionPolicy::default();
        let tol = rat(1, 1i64 << 40);
        let z = solve_2t(&policy, &rat(19, 10), &rat(19, 10), &tol).unwrap();
        assert!(z.zeros.is_empty());
    }

    #[test]
    fn pitchfork_exact_values() {
        let d = pitchfork_data(&rat(2, 1), &rat(2, 1));
        assert_eq!(d.b_crit, rat(2, 1));
        assert_eq!(d.dphi_at_1, rat(0, 1));
        assert_eq!(d.d2phi_at_1_crit, rat(0, 1));
        // 4 + A^2
        assert_eq!(d.d3phi_at_1_crit, rat(8, 1));
        let d2 = pitchfork_data(&rat(1, 2), &rat(3, 1));
        assert_eq!(d2.b_crit, rat(8, 1));
        assert_eq!(d2.dphi_at_1, rat(2, 1) - rat(3, 4));
        assert_eq!(d2.d3phi_at_1_crit, rat(17, 4));
    }

    #[test]
    fn third_derivative_matches_finite_differences() {
        // Richardson-extrapolated central stencil for phi''' at the pitchfork
        let a = rat(2, 1);
        let d = pitchfork_data(&a, &rat(2, 1));
        let mut ctx = IvCtx::new(512);
        let ai = ctx.from_rational(&a);
        let bi = ctx.from_rational(&d.b_crit);
        let stencil = |ctx: &mut IvCtx, h: &BigRational| -> Interval {
            // (f(x+2h) - 2 f(x+h) + 2 f(x-h) - f(x-2h)) / (2 h^3)
            let one = rat(1, 1);
            let f_p2 = {
                let x = ctx.from_rational(&(&one + &(h * rat(2, 1))));
                eval_phi2(ctx, &ai, &bi, &x)
            };
            let f_p1 = {
                let x = ctx.from_rational(&(&one + h));
                eval_phi2(ctx, &ai, &bi, &x)
            };
            let f_m1 = {
                let x = ctx.from_rational(&(&one - h));
                eval_phi2(ctx, &ai, &bi, &x)
            };
            let f_m2 = {
                let x = ctx.from_rational(&(&one - &(h * rat(2, 1))));
                eval_phi2(ctx, &ai, &bi, &x)
            };
            let t1 = ctx.sub(&f_p2, &f_m2);
            let t2 = ctx.sub(&f_m1, &f_p1);
            let t2b = ctx.mul_i64(&t2, 2);
            let num = ctx.add(&t1, &t2b);
            let h3 = h * h * h * rat(2, 1);
            let den = ctx.from_rational(&h3);
            ctx.div(&num, &den)
        };
        let h1 = rat(1, 1 << 8);
        let h2 = rat(1, 1 << 9);
        let c1 = stencil(&mut ctx, &h1);
        let c2 = stencil(&mut ctx, &h2);
        // second-order stencil: Richardson kills the h^2 term
        let r = {
            let c2x4 = ctx.mul_i64(&c2, 4);
            let diff = ctx.sub(&c2x4, &c1);
            let three = Interval::from_i64(3, 512);
            ctx.div(&diff, &three)
        };
        let expect = ctx.from_rational(&d.d3phi_at_1_crit);
        let err = ctx.sub(&r, &expect);
        let bound = ctx.from_rational(&rat(1, 1 << 20));
        assert!(
            matches!(err.abs_hi().cmp(bound.hi()), Some(c) if c <= 0),
            "third derivative mismatch: {r} vs {expect}"
        );
    }

    #[test]
    fn second_derivative_encloses_zero_at_crit() {
        // central second difference at the pitchfork
        let a = rat(2, 1);
        let d = pitchfork_data(&a, &rat(2, 1));
        let mut ctx = IvCtx::new(512);
        let ai = ctx.from_rational(&a);
        let bi = ctx.from_rational(&d.b_crit);
        let h = rat(1, 1 << 10);
        let f_p = {
            let x = ctx.from_rational(&(rat(1, 1) + h.clone()));
            eval_phi2(&mut ctx, &ai, &bi, &x)
        };
        let f_0 = {
            let x = ctx.from_rational(&rat(1, 1));
            eval_phi2(&mut ctx, &ai, &bi, &x)
        };
        let f_m = {
            let x = ctx.from_rational(&(rat(1, 1) - h.clone()));
            eval_phi2(&mut ctx, &ai, &bi, &x)
        };
        let s = {
            let t = ctx.mul_i64(&f_0, -2);
            let t2 = ctx.add(&f_p, &t);
            ctx.add(&t2, &f_m)
        };
        let h2 = ctx.from_rational(&(&h * &h));
        let dd = ctx.div(&s, &h2);
        // phi''(1) = 0 there; the stencil error is O(h^2)
        let bound = ctx.from_rational(&rat(1, 1 << 12));
        assert!(
            matches!(dd.abs_lo().cmp(bound.hi()), Some(c) if c <= 0),
            "phi''(1) at crit: {dd}"
        );
    }

    #[test]
    fn reconstructed_state_symmetries() {
        let policy = PrecisionPolicy::default();
        let tol = rat(1, 1i64 << 44);
        let a = rat(3, 1);
        let b = rat(3, 1);
        let z = solve_2t(&policy, &a, &b, &tol).unwrap();
        let mut ctx = IvCtx::new(256);
        for zero in &z.zeros {
            let st = reconstruct_state(&mut ctx, &a, zero);
            // dynamics route for u1 must meet the complement route
            let ai = ctx.from_rational(&a);
            let one = Interval::one();
            let e = {
                let t = ctx.sub(&one, &st.v0);
                let arg = ctx.mul(&t, &ai);
                ctx.exp(&arg)
            };
            let u1_dyn = ctx.mul(&st.u0, &e);
            assert!(u1_dyn.intersects(&st.u1), "{u1_dyn} vs {}", st.u1);
            // v1 via dynamics: v0 e^{(u1-1)B}
            let bi = ctx.from_rational(&b);
            let ev = {
                let t = ctx.sub(&st.u1, &one);
                let arg = ctx.mul(&t, &bi);
                ctx.exp(&arg)
            };
            let v1_dyn = ctx.mul(&st.v0, &ev);
            assert!(v1_dyn.intersects(&st.v1), "{v1_dyn} vs {}", st.v1);
            assert!(st.u0.is_positive());
            let two = Interval::from_i64(2, 128);
            let diff = ctx.sub(&two, &st.u0);
            assert!(diff.is_positive());
        }
    }

    #[test]
    fn curve_towards_the_corners() {
        let policy = PrecisionPolicy::default();
        let tol = rat(1, 1i64 << 40);
        let a = rat(2, 1);
        let curve = trace_2t_curve(&policy, &a, &rat(50, 1), 12, &tol);
        assert!(curve.failures.is_empty(), "{:?}", curve.failures);
        assert_eq!(curve.samples.len(), 12);
        // monotone trend: lower decreasing, upper increasing
        for w in curve.samples.windows(2) {
            assert!(w[1].lower.lo < w[0].lower.hi);
            assert!(w[1].upper.hi > w[0].upper.lo);
        }
        // B = 100/A = 50: z1 < 0.05 and z2 > 1.95
        let last = curve.samples.last().unwrap();
        assert!(last.lower.hi < rat(5, 100));
        assert!(last.upper.lo > rat(195, 100));
    }

    #[test]
    fn curvature_diagnostic() {
        // second derivative: negative below the trivial zero and positive
        // above it at critical points; checked here at the interior zeros,
        // plus a finite-difference cross-check at an ordinary point
        let mut ctx = IvCtx::new(256);
        let a = ctx.from_rational(&rat(3, 1));
        let b = ctx.from_rational(&rat(3, 1));
        let lo = ctx.from_rational(&rat(1, 2));
        let d2_lo = eval_d2phi2_dx2(&mut ctx, &a, &b, &lo);
        assert!(d2_lo.is_negative(), "phi'' at 0.5: {d2_lo}");
        let hi = ctx.from_rational(&rat(3, 2));
        let d2_hi = eval_d2phi2_dx2(&mut ctx, &a, &b, &hi);
        assert!(d2_hi.is_positive(), "phi'' at 1.5: {d2_hi}");
        // phi''(1) = (AB/2)^2 - AB = 45/4 at A = B = 3
        let one = Interval::one();
        let d2_one = eval_d2phi2_dx2(&mut ctx, &a, &b, &one);
        let expect = ctx.from_rational(&(rat(81, 4) - rat(9, 1)));
        assert!(d2_one.intersects(&expect), "{d2_one} vs {expect}");
        // FD cross-check at x = 3/4
        let h = rat(1, 1 << 12);
        let probe = |ctx: &mut IvCtx, q: BigRational| {
            let x = ctx.from_rational(&q);
            eval_phi2(ctx, &a.clone(), &b.clone(), &x)
        };
        let f_p = probe(&mut ctx, rat(3, 4) + h.clone());
        let f_0 = probe(&mut ctx, rat(3, 4));
        let f_m = probe(&mut ctx, rat(3, 4) - h.clone());
        let stencil = {
            let t = ctx.mul_i64(&f_0, -2);
            let s = ctx.add(&f_p, &t);
            let s2 = ctx.add(&s, &f_m);
            let h2 = ctx.from_rational(&(&h * &h));
            ctx.div(&s2, &h2)
        };
        let x34 = ctx.from_rational(&rat(3, 4));
        let direct = eval_d2phi2_dx2(&mut ctx, &a, &b, &x34);
        let err = ctx.sub(&stencil, &direct);
        let bound = ctx.from_rational(&(&h * &h * rat(1000, 1)));
        assert!(
            matches!(err.abs_hi().cmp(bound.hi()), Some(c) if c <= 0),
            "FD mismatch: {stencil} vs {direct}"
        );
    }

    #[test]
    fn agrees_with_symmetric_fixed_points() {
        // with equal parameters the nontrivial zeros coincide with the
        // nontrivial fixed points of the second map
        let policy = PrecisionPolicy::default();
        let tol = rat(1, 1i64 << 40);
        let a = rat(11, 4);
        let z = solve_2t(&policy, &a, &a, &tol).unwrap();
        let chain = crate::polychain::Chain::build(2);
        let scan = crate::poincare::fixed_points(
            &chain,
            &policy,
            2,
            &a,
            &tol,
            &crate::poincare::FixedPointConfig::default(),
        );
        let nontrivial: Vec<_> = scan.points.iter().filter(|p| !p.trivial).collect();
        assert_eq!(z.zeros.len(), nontrivial.len());
        for (zz, fp) in z.zeros.iter().zip(&nontrivial) {
            assert!(zz.lo <= fp.hi && fp.lo <= zz.hi, "intervals must intersect");
        }
    }

    #[test]
    fn eval_e_adaptive_contract() {
        let policy = PrecisionPolicy::default();
        let v = crate::poincare::eval_e_adaptive(&policy, 4, &rat(5, 2), &rat(3, 4), 60).unwrap();
        assert!(v.is_positive());
        // a one-rung ceiling cannot reach 200 relative bits
        let tight = PrecisionPolicy::fixed(64);
        assert!(crate::poincare::eval_e_adaptive(&tight, 6, &rat(5, 2), &rat(3, 4), 200).is_err());
    }

    #[test]
    fn degenerate_pitchfork_rejected() {
        let policy = PrecisionPolicy::default();
        let r = solve_2t(&policy, &rat(2, 1), &rat(2, 1), &rat(1, 1024));
        assert!(matches!(r, Err(TwoPeriodicError::DegeneratePitchfork)));
    }
}
