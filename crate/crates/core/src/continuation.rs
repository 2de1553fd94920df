//! Global branches of higher-order states: local expansion coefficients at
//! the bifurcation points, pseudo-arclength tracing of the solution curves,
//! the assembled atlas, and order-existence queries.
//!
//! Each positive root r of the n-th chain member seeds an analytic curve
//! `(A(s), 1+s)` of nT-states with `A(s) = r + A1 s + A2 s^2 + O(s^3)`.
//! `local_expansion` measures A1, A2 numerically (solve ladder plus
//! Richardson extrapolation) because closed forms exist only for the first
//! few orders; the known low-order values calibrate it. `trace_branch`
//! follows the zero set of `phi_n` from the seed with a predictor-corrector,
//! certifying every accepted sample by an interval residual bound.

use crate::interval::{bigfloat_to_f64, Interval, IvCtx, PrecisionPolicy};
use crate::poincare::{eval_dphi_dx, eval_phi, phi_sign};
use crate::polychain::Chain;
use crate::roots::{self, CertifiedRoot, RootTable};
use astro_float::{BigFloat, RoundingMode, Sign};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum ContinuationError {
    /// The s-ladder did not exhibit the expected convergence order
    /// (possible non-quadratic degeneracy at the seed).
    NoConvergence { n: usize, detail: String },
    /// The 1-D solve for A at fixed x found no sign change.
    SeedSolveFailed { n: usize, x: String },
    /// Query parameter outside the traced range.
    InsufficientDepth { a: String, n_max: usize },
}

impl fmt::Display for ContinuationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NoConvergence { n, detail } => {
                write!(f, "expansion ladder at order {n} did not converge: {detail}")
            }
            Self::SeedSolveFailed { n, x } => {
                write!(f, "no parameter bracket at order {n}, x = {x}")
            }
            Self::InsufficientDepth { a, n_max } => {
                write!(f, "no order up to {n_max} certifies A = {a}")
            }
        }
    }
}

impl std::error::Error for ContinuationError {}

/// Exact rational value of a binary float.
pub fn bigfloat_to_rational(x: &BigFloat) -> BigRational {
    use astro_float::WORD_BIT_SIZE;
    if x.is_zero() {
        return BigRational::zero();
    }
    let (words, _n, sign, e, _) = x.as_raw_parts().expect("finite value");
    let mut m = BigInt::zero();
    for (i, w) in words.iter().enumerate() {
        m += BigInt::from(*w) << (WORD_BIT_SIZE * i);
    }
    if sign == Sign::Neg {
        m = -m;
    }
    let shift = e as i64 - (WORD_BIT_SIZE * words.len()) as i64;
    if shift >= 0 {
        BigRational::from(m << shift as usize)
    } else {
        BigRational::new(m, BigInt::one() << ((-shift) as usize))
    }
}

/// Measured Taylor data of a bifurcating curve `A(s) = r + A1 s + A2 s^2`.
///
/// `a1`/`a2` are (value, error-bar) pairs from the Richardson ladder; the
/// bars are the observed extrapolation residue plus the seed uncertainty.
#[derive(Debug, Clone)]
pub struct LocalExpansion {
    pub n: usize,
    pub root_lo: BigRational,
    pub root_hi: BigRational,
    pub a1: (BigRational, BigRational),
    pub a2: (BigRational, BigRational),
    /// Ladder ratios stayed near the quadratic-order value 4.
    pub order_ok: bool,
}

impl LocalExpansion {
    pub fn a1_encloses_zero(&self) -> bool {
        (&self.a1.0 - &self.a1.1) <= BigRational::zero()
            && BigRational::zero() <= (&self.a1.0 + &self.a1.1)
    }
}

/// Solves `phi_n(A, x) = 0` for A near `guess` at fixed x, by expanding a
/// sign-change window and bisecting to `width`.
fn solve_parameter_at_x(
    policy: &PrecisionPolicy,
    n: usize,
    x: &BigRational,
    guess: &BigRational,
    initial_radius: &BigRational,
    width: &BigRational,
) -> Result<BigRational, ContinuationError> {
    let two = BigRational::from(BigInt::from(2));
    let mut radius = initial_radius.clone();
    let mut lo;
    let mut hi;
    let s_lo;
    let mut tries = 0usize;
    loop {
        lo = guess - &radius;
        hi = guess + &radius;
        if lo <= BigRational::zero() {
            lo = guess / &two;
        }
        let sl = phi_sign(policy, n, &lo, x);
        let sh = phi_sign(policy, n, &hi, x);
        match (sl, sh) {
            (Some(a), Some(b)) if a != b => {
                s_lo = a;
                break;
            }
            _ => {
                radius = &radius * &two;
                tries += 1;
                if tries > 16 {
                    return Err(ContinuationError::SeedSolveFailed {
                        n,
                        x: x.to_string(),
                    });
                }
            }
        }
    }
    while &hi - &lo > *width {
        let mid = (&lo + &hi) / &two;
        match phi_sign(policy, n, &mid, x) {
            Some(s) if s == s_lo => lo = mid,
            Some(_) => hi = mid,
            None => {
                return Err(ContinuationError::SeedSolveFailed {
                    n,
                    x: x.to_string(),
                })
            }
        }
    }
    Ok((&lo + &hi) / &two)
}

/// Estimates A1 and A2 at a certified root by solving `phi_n(A, 1+s) = 0`
/// on a geometric ladder of s (both signs) and Richardson-extrapolating the
/// central-difference estimates.
pub fn local_expansion(
    chain: &Chain,
    policy: &PrecisionPolicy,
    n: usize,
    root: &CertifiedRoot,
) -> Result<LocalExpansion, ContinuationError> {
    assert!(n >= 2 && root.poly_index == n);
    let tight = roots::refine(
        root,
        chain.poly(n),
        &BigRational::new(BigInt::one(), BigInt::one() << 120),
    );
    let r_hat = tight.mid();
    let solve_width = BigRational::new(BigInt::one(), BigInt::one() << 90);
    let ladder_len = 9usize;
    let mut d1 = Vec::with_capacity(ladder_len);
    let mut d2 = Vec::with_capacity(ladder_len);
    let mut s = BigRational::new(BigInt::one(), BigInt::from(8));
    let two = BigRational::from(BigInt::from(2));
    let one = BigRational::one();
    for _ in 0..ladder_len {
        let radius = &s * &two;
        let a_plus = solve_parameter_at_x(policy, n, &(&one + &s), &r_hat, &radius, &solve_width)?;
        let a_minus = solve_parameter_at_x(policy, n, &(&one - &s), &r_hat, &radius, &solve_width)?;
        d1.push((&a_plus - &a_minus) / (&two * &s));
        d2.push((&a_plus + &a_minus - &two * &r_hat) / (&two * &s * &s));
        s = &s / &two;
    }
    let r1 = richardson(&d1);
    let r2 = richardson(&d2);
    let order_ok = ladder_order_near_four(&d1) && ladder_order_near_four(&d2);
    // seed uncertainty propagates into the curvature estimate as w / (2 s^2)
    let s_min = BigRational::new(BigInt::one(), BigInt::from(8i64 << (ladder_len - 1)));
    let seed_term = tight.width() / (&two * &s_min * &s_min);
    let a1 = (r1.0, r1.1.clone() + seed_term.clone());
    let a2 = (r2.0, r2.1 + seed_term);
    if !order_ok {
        return Err(ContinuationError::NoConvergence {
            n,
            detail: "ladder ratios far from 4".into(),
        });
    }
    Ok(LocalExpansion {
        n,
        root_lo: tight.lo,
        root_hi: tight.hi,
        a1,
        a2,
        order_ok,
    })
}

/// Last Richardson iterate and an error bar from the final differences.
fn richardson(d: &[BigRational]) -> (BigRational, BigRational) {
    let four = BigRational::from(BigInt::from(4));
    let three = BigRational::from(BigInt::from(3));
    let mut r: Vec<BigRational> = d.to_vec();
    for k in 0..r.len() - 1 {
        r[k] = (&four * &r[k + 1] - &r[k]) / &three;
    }
    let m = d.len() - 1;
    let err = (&r[m - 1] - &r[m - 2]).abs() * BigRational::from(BigInt::from(4))
        + BigRational::new(BigInt::one(), BigInt::one() << 60);
    (r[m - 1].clone(), err)
}

fn ladder_order_near_four(d: &[BigRational]) -> bool {
    // successive difference ratios approach 4 for a quadratic-order ladder;
    // already-converged tails are fine
    let tiny = BigRational::new(BigInt::one(), BigInt::one() << 70);
    let mut checked = 0usize;
    let mut ok = 0usize;
    for w in d.windows(3) {
        let num = (&w[0] - &w[1]).abs();
        let den = (&w[1] - &w[2]).abs();
        if den < tiny {
            continue;
        }
        let ratio = num / den;
        checked += 1;
        if ratio > BigRational::new(BigInt::from(2), BigInt::one())
            && ratio < BigRational::new(BigInt::from(8), BigInt::one())
        {
            ok += 1;
        }
    }
    checked == 0 || ok * 2 >= checked
}

/// Which half of the bifurcating curve to follow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Side {
    /// x > 1.
    Plus,
    /// x < 1.
    Minus,
}

impl Side {
    fn sign(self) -> i64 {
        match self {
            Side::Plus => 1,
            Side::Minus => -1,
        }
    }
}

/// One accepted point on a branch: exact dyadic coordinates and the
/// certified residual bound at them.
#[derive(Debug, Clone)]
pub struct BranchSample {
    pub a: BigRational,
    pub x: BigRational,
    /// Certified bound on |phi_n| at (a, x).
    pub residual: f64,
}

/// A traced half-branch.
#[derive(Debug, Clone)]
pub struct Branch {
    pub n: usize,
    pub side: Side,
    pub seed_lo: BigRational,
    pub seed_hi: BigRational,
    pub samples: Vec<BranchSample>,
    /// Sample indices where the parameter direction reverses.
    pub folds: Vec<usize>,
    pub a_min: BigRational,
    pub reached_a_max: bool,
    /// Corrector stall detail, if the trace ended early.
    pub stall: Option<String>,
    /// Samples that crossed back to the trivial level (never expected).
    pub side_violations: usize,
}

/// Predictor-corrector knobs. Step lengths are in plain (A, x) units.
#[derive(Debug, Clone)]
pub struct TraceConfig {
    pub prec_bits: usize,
    /// Certified residual bound each accepted sample must satisfy.
    pub residual_tol: f64,
    pub h_init: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub max_steps: usize,
    pub grow_after: usize,
}

impl Default for TraceConfig {
    fn default() -> Self {
        Self {
            prec_bits: 192,
            residual_tol: 1e-18,
            h_init: 1.0 / 64.0,
            h_min: 1.0 / (1 << 20) as f64,
            h_max: 1.0 / 8.0,
            max_steps: 40_000,
            grow_after: 4,
        }
    }
}

struct NewtonCtx {
    ctx: IvCtx,
    prec: usize,
}

impl NewtonCtx {
    fn new(prec: usize) -> Self {
        Self {
            ctx: IvCtx::new(prec),
            prec,
        }
    }

    fn phi_mid(&mut self, n: usize, a: &BigFloat, x: &BigFloat) -> BigFloat {
        let ai = Interval::point(a.clone());
        let xi = Interval::point(x.clone());
        eval_phi(&mut self.ctx, n, &ai, &xi).mid(self.prec)
    }

    fn dphi_dx_mid(&mut self, n: usize, a: &BigFloat, x: &BigFloat) -> BigFloat {
        let ai = Interval::point(a.clone());
        let xi = Interval::point(x.clone());
        eval_dphi_dx(&mut self.ctx, n, &ai, &xi).mid(self.prec)
    }

    /// Central finite difference of phi in the parameter.
    fn dphi_da_mid(&mut self, n: usize, a: &BigFloat, x: &BigFloat) -> BigFloat {
        let p = self.prec;
        let rm = RoundingMode::ToEven;
        let mut h = BigFloat::from_i8(1, p);
        h.set_exponent(-30);
        let a_plus = a.add(&h, p, rm);
        let a_minus = a.sub(&h, p, rm);
        let f_plus = self.phi_mid(n, &a_plus, x);
        let f_minus = self.phi_mid(n, &a_minus, x);
        let two_h = h.mul(&BigFloat::from_i8(2, p), p, rm);
        f_plus.sub(&f_minus, p, rm).div(&two_h, p, rm)
    }

    /// Certified residual bound at exact dyadic coordinates.
    fn certified_residual(&mut self, n: usize, a: &BigFloat, x: &BigFloat) -> f64 {
        let ai = Interval::point(a.clone());
        let xi = Interval::point(x.clone());
        let v = eval_phi(&mut self.ctx, n, &ai, &xi);
        bigfloat_to_f64(&v.abs_hi())
    }
}

/// Follows the zero curve of `phi_n` from `(r, 1)` on the chosen side until
/// the parameter exceeds `a_max`. Folds are recorded; a corrector stall ends
/// the trace with the last good samples kept.
pub fn trace_branch(
    chain: &Chain,
    _policy: &PrecisionPolicy,
    n: usize,
    root: &CertifiedRoot,
    side: Side,
    a_max: &BigRational,
    cfg: &TraceConfig,
) -> Branch {
    let p = cfg.prec_bits;
    let rm = RoundingMode::ToEven;
    let tight = roots::refine(
        root,
        chain.poly(n),
        &BigRational::new(BigInt::one(), BigInt::one() << 80),
    );
    let r_hat = tight.mid();
    let mut nw = NewtonCtx::new(p);
    let seed_a = rational_to_bigfloat(&r_hat, p);
    let seed_x = BigFloat::from_i8(1, p);
    let mut branch = Branch {
        n,
        side,
        seed_lo: tight.lo.clone(),
        seed_hi: tight.hi.clone(),
        samples: vec![BranchSample {
            a: r_hat.clone(),
            x: BigRational::one(),
            residual: 0.0,
        }],
        folds: Vec::new(),
        a_min: r_hat.clone(),
        reached_a_max: false,
        stall: None,
        side_violations: 0,
    };

    // bootstrap: one natural-continuation point at x = 1 +/- h, where the
    // curve is a graph over x
    let mut h = cfg.h_init;
    let mut prev: (BigFloat, BigFloat) = (seed_a.clone(), seed_x.clone());
    let mut cur: Option<(BigFloat, BigFloat)> = None;
    while h >= cfg.h_min {
        let x_target = seed_x.add(&scaled(side.sign() as f64 * h, p), p, rm);
        match newton_fixed_x(&mut nw, n, &seed_a, &x_target, cfg) {
            Some(a_sol) => {
                cur = Some((a_sol, x_target));
                break;
            }
            None => h *= 0.5,
        }
    }
    let Some(mut cur) = cur else {
        branch.stall = Some("seed bootstrap failed".into());
        return branch;
    };
    push_sample(&mut nw, n, &cur, &mut branch);

    let a_max_bf = rational_to_bigfloat(a_max, p);
    let mut streak = 0usize;
    let mut last_da_sign: Option<i8> = None;
    for _ in 0..cfg.max_steps {
        let ta = cur.0.sub(&prev.0, p, rm);
        let tx = cur.1.sub(&prev.1, p, rm);
        let norm = hypot(&ta, &tx, p);
        if norm.is_zero() {
            branch.stall = Some("degenerate tangent".into());
            break;
        }
        let ta = ta.div(&norm, p, rm);
        let tx = tx.div(&norm, p, rm);
        let hbf = scaled(h, p);
        let pred = (
            cur.0.add(&ta.mul(&hbf, p, rm), p, rm),
            cur.1.add(&tx.mul(&hbf, p, rm), p, rm),
        );
        match newton_arclength(&mut nw, n, &pred, &cur, (&ta, &tx), h, cfg) {
            Some(next) => {
                // direction reversal marks a fold
                let da = next.0.sub(&cur.0, p, rm);
                let da_sign = sign_of(&da);
                if let (Some(s_new), Some(s_old)) = (da_sign, last_da_sign) {
                    if s_new != s_old && s_new != 0 {
                        branch.folds.push(branch.samples.len() - 1);
                    }
                }
                if let Some(s) = da_sign {
                    if s != 0 {
                        last_da_sign = Some(s);
                    }
                }
                prev = cur;
                cur = next;
                push_sample(&mut nw, n, &cur, &mut branch);
                streak += 1;
                if streak >= cfg.grow_after {
                    h = (h * 2.0).min(cfg.h_max);
                    streak = 0;
                }
                if matches!(cur.0.cmp(&a_max_bf), Some(c) if c > 0) {
                    branch.reached_a_max = true;
                    break;
                }
            }
            None => {
                streak = 0;
                h *= 0.5;
                if h < cfg.h_min {
                    branch.stall = Some(format!(
                        "corrector stall at A ~ {:.6}, x ~ {:.6}",
                        bigfloat_to_f64(&cur.0),
                        bigfloat_to_f64(&cur.1)
                    ));
                    break;
                }
            }
        }
    }
    if branch.stall.is_none() && !branch.reached_a_max {
        branch.stall = Some("step budget exhausted".into());
    }
    branch
}

fn scaled(v: f64, p: usize) -> BigFloat {
    BigFloat::from_f64(v, p)
}

fn rational_to_bigfloat(q: &BigRational, p: usize) -> BigFloat {
    let num = crate::interval::bigint_to_bigfloat(q.numer());
    let den = crate::interval::bigint_to_bigfloat(q.denom());
    num.div(&den, p, RoundingMode::ToEven)
}

fn hypot(a: &BigFloat, b: &BigFloat, p: usize) -> BigFloat {
    let rm = RoundingMode::ToEven;
    let s = a.mul(a, p, rm).add(&b.mul(b, p, rm), p, rm);
    s.sqrt(p, rm)
}

fn sign_of(x: &BigFloat) -> Option<i8> {
    if x.is_zero() {
        return Some(0);
    }
    x.sign().map(|s| if s == Sign::Neg { -1 } else { 1 })
}

fn push_sample(nw: &mut NewtonCtx, n: usize, z: &(BigFloat, BigFloat), branch: &mut Branch) {
    let a_q = bigfloat_to_rational(&z.0);
    let x_q = bigfloat_to_rational(&z.1);
    let residual = nw.certified_residual(n, &z.0, &z.1);
    let one = BigRational::one();
    let violation = match branch.side {
        Side::Plus => x_q <= one,
        Side::Minus => x_q >= one,
    };
    if violation {
        branch.side_violations += 1;
    }
    if a_q < branch.a_min {
        branch.a_min = a_q.clone();
    }
    branch.samples.push(BranchSample {
        a: a_q,
        x: x_q,
        residual,
    });
}

/// Newton in A at fixed x (bootstrap near the seed).
fn newton_fixed_x(
    nw: &mut NewtonCtx,
    n: usize,
    a0: &BigFloat,
    x: &BigFloat,
    cfg: &TraceConfig,
) -> Option<BigFloat> {
    let p = nw.prec;
    let rm = RoundingMode::ToEven;
    let mut a = a0.clone();
    for _ in 0..30 {
        let f = nw.phi_mid(n, &a, x);
        let df = nw.dphi_da_mid(n, &a, x);
        if df.is_zero() || df.is_nan() || df.is_inf() {
            return None;
        }
        let step = f.div(&df, p, rm);
        a = a.sub(&step, p, rm);
        if bigfloat_to_f64(&step.abs()) < 1e-40 {
            break;
        }
    }
    let resid = nw.certified_residual(n, &a, x);
    if resid <= cfg.residual_tol && bigfloat_to_f64(&a) > 0.0 {
        Some(a)
    } else {
        None
    }
}

/// Pseudo-arclength corrector: Newton on
/// `(phi_n(A, x), tau . (z - z_prev) - h) = 0`.
fn newton_arclength(
    nw: &mut NewtonCtx,
    n: usize,
    pred: &(BigFloat, BigFloat),
    base: &(BigFloat, BigFloat),
    tau: (&BigFloat, &BigFloat),
    h: f64,
    cfg: &TraceConfig,
) -> Option<(BigFloat, BigFloat)> {
    let p = nw.prec;
    let rm = RoundingMode::ToEven;
    let mut a = pred.0.clone();
    let mut x = pred.1.clone();
    let h_bf = scaled(h, p);
    let mut converged = false;
    for _ in 0..14 {
        let f1 = nw.phi_mid(n, &a, &x);
        let da = a.sub(&base.0, p, rm);
        let dx = x.sub(&base.1, p, rm);
        let f2 = tau
            .0
            .mul(&da, p, rm)
            .add(&tau.1.mul(&dx, p, rm), p, rm)
            .sub(&h_bf, p, rm);
        let j11 = nw.dphi_da_mid(n, &a, &x);
        let j12 = nw.dphi_dx_mid(n, &a, &x);
        let det = j11.mul(tau.1, p, rm).sub(&j12.mul(tau.0, p, rm), p, rm);
        if det.is_zero() || det.is_nan() {
            return None;
        }
        // solve [j11 j12; tau0 tau1] d = -f by Cramer
        let d_a = f1
            .mul(tau.1, p, rm)
            .sub(&j12.mul(&f2, p, rm), p, rm)
            .div(&det, p, rm)
            .neg();
        let d_x = j11
            .mul(&f2, p, rm)
            .sub(&f1.mul(tau.0, p, rm), p, rm)
            .div(&det, p, rm)
            .neg();
        a = a.add(&d_a, p, rm);
        x = x.add(&d_x, p, rm);
        if a.is_nan() || x.is_nan() || a.is_inf() || x.is_inf() {
            return None;
        }
        let step = hypot(&d_a, &d_x, p);
        if bigfloat_to_f64(&step) < 1e-36 {
            converged = true;
            break;
        }
    }
    if !converged {
        return None;
    }
    // plausibility: positive parameter, state within (0, n)
    let xf = bigfloat_to_f64(&x);
    if bigfloat_to_f64(&a) <= 0.0 || xf <= 0.0 || xf >= n as f64 {
        return None;
    }
    let resid = nw.certified_residual(n, &a, &x);
    if resid <= cfg.residual_tol {
        Some((a, x))
    } else {
        None
    }
}

/// Root identity within the atlas: order and index into that order's row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct RootRef {
    pub order: usize,
    pub index: usize,
}

/// A component of the solution set: a seed root of minimal order plus the
/// two traced half-branches.
#[derive(Debug, Clone)]
pub struct Component {
    pub seed: RootRef,
    pub root_lo: BigRational,
    pub root_hi: BigRational,
    pub plus: Branch,
    pub minus: Branch,
}

impl Component {
    pub fn a_min(&self) -> BigRational {
        self.plus.a_min.clone().min(self.minus.a_min.clone())
    }
}

/// Ownership record for a root whose component belongs to a smaller order.
#[derive(Debug, Clone, serde::Serialize)]
pub struct InheritedRoot {
    pub root: RootRef,
    pub owner: RootRef,
}

/// Census row: how many components of order-n states exist and where the
/// inherited ones come from.
#[derive(Debug, Clone, serde::Serialize)]
pub struct OrderCensus {
    pub order: usize,
    pub total_components: usize,
    pub new_components: usize,
    pub inherited_from: Vec<usize>,
}

/// The assembled bifurcation atlas up to order `n_max`.
#[derive(Debug, Clone)]
pub struct Atlas {
    pub n_max: usize,
    pub a_max: BigRational,
    pub components: Vec<Component>,
    pub inherited: Vec<InheritedRoot>,
    pub failures: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct AtlasConfig {
    pub n_max: usize,
    pub a_max: BigRational,
    pub policy: PrecisionPolicy,
    pub trace: TraceConfig,
    pub workers: usize,
}

impl AtlasConfig {
    pub fn new(n_max: usize, a_max: BigRational) -> Self {
        Self {
            n_max,
            a_max,
            policy: PrecisionPolicy::default(),
            trace: TraceConfig::default(),
            workers: 1,
        }
    }
}

/// Locates, for every root of every order, its minimal-order owner; traces
/// each newly-owned root on both sides. Branches are independent work units;
/// assembly is a serial merge in root order.
pub fn build_atlas(chain: &Chain, table: &RootTable, cfg: &AtlasConfig) -> Atlas {
    assert!(cfg.n_max >= 2 && cfg.n_max <= chain.n_max() && cfg.n_max <= table.n_max());
    let mut inherited = Vec::new();
    let mut to_trace: Vec<(RootRef, CertifiedRoot)> = Vec::new();
    for n in 2..=cfg.n_max {
        for (i, root) in table.roots(n).iter().enumerate() {
            let owner_order = roots::minimal_owner(chain, n, root);
            if owner_order == n {
                to_trace.push((RootRef { order: n, index: i }, root.clone()));
            } else {
                let owner_index = locate_owner_index(chain, table, owner_order, root);
                inherited.push(InheritedRoot {
                    root: RootRef { order: n, index: i },
                    owner: RootRef {
                        order: owner_order,
                        index: owner_index,
                    },
                });
            }
        }
    }
    let worker_count = cfg.workers.max(1).min(to_trace.len().max(1));
    let mut components: Vec<Option<Component>> = vec![None; to_trace.len()];
    if worker_count <= 1 {
        for (slot, (seed, root)) in components.iter_mut().zip(&to_trace) {
            *slot = Some(trace_component(chain, cfg, *seed, root));
        }
    } else {
        let next = std::sync::atomic::AtomicUsize::new(0);
        let results = std::sync::Mutex::new(Vec::new());
        std::thread::scope(|scope| {
            for _ in 0..worker_count {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
                    if i >= to_trace.len() {
                        break;
                    }
                    let (seed, root) = &to_trace[i];
                    let comp = trace_component(chain, cfg, *seed, root);
                    results
                        .lock()
                        .expect("result collection")
                        .push((i, comp));
                });
            }
        });
        for (i, comp) in results.into_inner().expect("result collection") {
            components[i] = Some(comp);
        }
    }
    let mut out_components = Vec::with_capacity(components.len());
    let mut failures = Vec::new();
    for c in components.into_iter().flatten() {
        for (b, tag) in [(&c.plus, "+"), (&c.minus, "-")] {
            if let Some(stall) = &b.stall {
                failures.push(format!(
                    "order {} root {} side {tag}: {stall}",
                    c.seed.order, c.seed.index
                ));
            }
        }
        out_components.push(c);
    }
    Atlas {
        n_max: cfg.n_max,
        a_max: cfg.a_max.clone(),
        components: out_components,
        inherited,
        failures,
    }
}

fn trace_component(
    chain: &Chain,
    cfg: &AtlasConfig,
    seed: RootRef,
    root: &CertifiedRoot,
) -> Component {
    let plus = trace_branch(
        chain, &cfg.policy, seed.order, root, Side::Plus, &cfg.a_max, &cfg.trace,
    );
    let minus = trace_branch(
        chain, &cfg.policy, seed.order, root, Side::Minus, &cfg.a_max, &cfg.trace,
    );
    Component {
        seed,
        root_lo: root.lo.clone(),
        root_hi: root.hi.clone(),
        plus,
        minus,
    }
}

/// Index of the owner's root matching the inherited one (the owner's member
/// vanishes inside the inherited root's isolating interval).
fn locate_owner_index(
    chain: &Chain,
    table: &RootTable,
    owner_order: usize,
    root: &CertifiedRoot,
) -> usize {
    let mut tight = root.clone();
    for _ in 0..8 {
        let candidates: Vec<usize> = table
            .roots(owner_order)
            .iter()
            .enumerate()
            .filter(|(_, r)| r.lo <= tight.hi && tight.lo <= r.hi)
            .map(|(i, _)| i)
            .collect();
        if candidates.len() == 1 {
            return candidates[0];
        }
        let w = tight.width() / BigRational::from(BigInt::from(16));
        if w.is_zero() {
            break;
        }
        tight = roots::refine(&tight, chain.poly(root.poly_index), &w);
    }
    // exact roots (1 and 2) match by value
    table
        .roots(owner_order)
        .iter()
        .position(|r| r.is_exact && root.is_exact && r.lo == root.lo)
        .unwrap_or(0)
}

impl Atlas {
    /// Component count per order: nu(n) for n >= 2 (inherited roots still
    /// carry a component of that order), plus the trivial line at order 1.
    pub fn census(&self, table: &RootTable) -> Vec<OrderCensus> {
        let mut out = vec![OrderCensus {
            order: 1,
            total_components: 1,
            new_components: 1,
            inherited_from: Vec::new(),
        }];
        for n in 2..=self.n_max {
            let total = table.roots(n).len();
            let inherited_from: Vec<usize> = self
                .inherited
                .iter()
                .filter(|ir| ir.root.order == n)
                .map(|ir| ir.owner.order)
                .collect();
            out.push(OrderCensus {
                order: n,
                total_components: total,
                new_components: total - inherited_from.len(),
                inherited_from,
            });
        }
        out
    }

    pub fn component(&self, order: usize, index: usize) -> Option<&Component> {
        self.components
            .iter()
            .find(|c| c.seed.order == order && c.seed.index == index)
    }

    /// Smallest order m >= 2 whose minimal-order components certify two
    /// subharmonics at the given parameter: both half-branches must have
    /// dipped to `a` or below. Atlas-relative, bounded by `n_max`.
    pub fn min_order(&self, a: &BigRational) -> Result<usize, ContinuationError> {
        assert!(a <= &self.a_max, "query outside the traced parameter range");
        for n in 2..=self.n_max {
            let qualifies = self
                .components
                .iter()
                .any(|c| c.seed.order == n && &c.plus.a_min <= a && &c.minus.a_min <= a);
            if qualifies {
                return Ok(n);
            }
        }
        Err(ContinuationError::InsufficientDepth {
            a: a.to_string(),
            n_max: self.n_max,
        })
    }
}

/// Checks that no two components share a sample within `eps` in both
/// coordinates.
pub fn components_disjoint(atlas: &Atlas, eps: f64) -> bool {
    let to_f64 = |q: &BigRational| -> f64 {
        use num_traits::ToPrimitive;
        q.to_f64().unwrap_or(f64::NAN)
    };
    for (i, c1) in atlas.components.iter().enumerate() {
        for c2 in atlas.components.iter().skip(i + 1) {
            for b1 in [&c1.plus, &c1.minus] {
                for b2 in [&c2.plus, &c2.minus] {
                    for s1 in &b1.samples {
                        for s2 in &b2.samples {
                            let da = (to_f64(&s1.a) - to_f64(&s2.a)).abs();
                            let dx = (to_f64(&s1.x) - to_f64(&s2.x)).abs();
                            if da < eps && dx < eps {
                                return false;
                            }
                        }
                    }
                }
            }
        }
    }
    true
}

/// Cross-check helper: does some certified fixed point of the n-th map at
/// the sample's parameter meet the sample state?
pub fn sample_in_fixed_points(
    chain: &Chain,
    policy: &PrecisionPolicy,
    sample: &BranchSample,
    n: usize,
    tol: &BigRational,
) -> bool {
    let scan = crate::poincare::fixed_points(
        chain,
        policy,
        n,
        &sample.a,
        tol,
        &crate::poincare::FixedPointConfig::default(),
    );
    scan.points.iter().any(|p| {
        let pad = tol * BigRational::from(BigInt::from(4));
        &p.lo - &pad <= sample.x && sample.x <= &p.hi + &pad
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn close(q: &BigRational, target: f64, tol: f64) -> bool {
        use num_traits::ToPrimitive;
        (q.to_f64().unwrap() - target).abs() <= tol
    }

    #[test]
    fn expansion_order2() {
        // A(s) = 2 + (2/3) s^2 + O(s^3)
        let chain = Chain::build(2);
        let policy = PrecisionPolicy::default();
        let roots = roots::isolate_positive_roots(&chain, 2).unwrap();
        let exp = local_expansion(&chain, &policy, 2, &roots[0]).unwrap();
        assert!(exp.a1_encloses_zero(), "a1 = {:?}", exp.a1);
        assert!(close(&exp.a2.0, 2.0 / 3.0, 1e-7), "a2 = {:?}", exp.a2);
        assert!(close(&exp.a2.1, 0.0, 1e-7));
    }

    #[test]
    fn expansion_order3() {
        // A1 = (sqrt3 - 3)/4
        let chain = Chain::build(3);
        let policy = PrecisionPolicy::default();
        let roots = roots::isolate_positive_roots(&chain, 3).unwrap();
        let exp = local_expansion(&chain, &policy, 3, &roots[0]).unwrap();
        let expect = (3f64.sqrt() - 3.0) / 4.0;
        assert!(close(&exp.a1.0, expect, 1e-7), "a1 = {:?}", exp.a1);
    }

    #[test]
    fn expansion_order4() {
        // A1 = 0, A2 = (sqrt2 - 2)/2; the t^1 and t^2 coefficients of the
        // same series expansion reproduce the chain member and its printed
        // second derivative exactly, which pins this third-order value
        let chain = Chain::build(4);
        let policy = PrecisionPolicy::default();
        let roots = roots::isolate_positive_roots(&chain, 4).unwrap();
        let exp = local_expansion(&chain, &policy, 4, &roots[0]).unwrap();
        assert!(exp.a1_encloses_zero(), "a1 = {:?}", exp.a1);
        let expect = (2f64.sqrt() - 2.0) / 2.0;
        assert!(close(&exp.a2.0, expect, 1e-7), "a2 = {:?}", exp.a2);
    }

    #[test]
    fn branch_order2_matches_two_periodic_curve() {
        let chain = Chain::build(2);
        let policy = PrecisionPolicy::default();
        let roots = roots::isolate_positive_roots(&chain, 2).unwrap();
        let cfg = TraceConfig::default();
        let a_max = rat(3, 1);
        let plus = trace_branch(&chain, &policy, 2, &roots[0], Side::Plus, &a_max, &cfg);
        assert!(plus.reached_a_max, "stall: {:?}", plus.stall);
        assert_eq!(plus.side_violations, 0);
        assert!(plus.folds.is_empty());
        // supercritical: parameter never dips below the seed
        assert!(plus.a_min >= rat(2, 1) - rat(1, 1 << 20));
        // cross-check one sample against the two-parameter solver at A = B
        let sample = plus
            .samples
            .iter()
            .find(|s| s.a > rat(5, 2))
            .expect("sample beyond 2.5");
        let z =
            crate::twoperiodic::solve_2t(&policy, &sample.a, &sample.a, &rat(1, 1i64 << 44))
                .unwrap();
        let hit = z.zeros.iter().any(|zz| {
            let pad = rat(1, 1 << 24);
            &zz.lo - &pad <= sample.x && sample.x <= &zz.hi + &pad
        });
        assert!(hit, "branch sample not on the period-doubled curve");
    }

    #[test]
    fn branch_order3_transcritical_fold() {
        let chain = Chain::build(3);
        let policy = PrecisionPolicy::default();
        let roots = roots::isolate_positive_roots(&chain, 3).unwrap();
        let cfg = TraceConfig::default();
        let a_max = rat(3, 1);
        let plus = trace_branch(&chain, &policy, 3, &roots[0], Side::Plus, &a_max, &cfg);
        assert!(plus.reached_a_max, "stall: {:?}", plus.stall);
        assert_eq!(plus.side_violations, 0);
        // A1 < 0: the branch initially moves left of the seed, then folds
        let seed = (&plus.seed_lo + &plus.seed_hi) / rat(2, 1);
        assert!(plus.samples[2].a < seed, "initial direction");
        assert!(plus.a_min < seed);
        assert!(!plus.folds.is_empty(), "expected a turning point");
        let exp = local_expansion(&chain, &policy, 3, &roots[0]).unwrap();
        assert!(exp.a1.0 < BigRational::zero());
    }

    #[test]
    fn branch_order4_subcritical_both_sides() {
        let chain = Chain::build(4);
        let policy = PrecisionPolicy::default();
        let roots = roots::isolate_positive_roots(&chain, 4).unwrap();
        let cfg = TraceConfig::default();
        let a_max = rat(5, 2);
        for side in [Side::Plus, Side::Minus] {
            let b = trace_branch(&chain, &policy, 4, &roots[0], side, &a_max, &cfg);
            assert!(b.reached_a_max, "{side:?} stall: {:?}", b.stall);
            assert_eq!(b.side_violations, 0);
            let seed = (&b.seed_lo + &b.seed_hi) / rat(2, 1);
            assert!(b.a_min < seed, "{side:?} subcritical dip");
            assert!(!b.folds.is_empty(), "{side:?} fold");
        }
    }

    #[test]
    fn atlas_counts_to_4() {
        let chain = Chain::build(4);
        let table = RootTable::build(&chain, 4).unwrap();
        let cfg = AtlasConfig::new(4, rat(5, 2));
        let atlas = build_atlas(&chain, &table, &cfg);
        assert!(atlas.failures.is_empty(), "{:?}", atlas.failures);
        let census = atlas.census(&table);
        let totals: Vec<usize> = census.iter().map(|c| c.total_components).collect();
        assert_eq!(totals, vec![1, 1, 1, 2]);
        // the order-4 root at 2 belongs to order 2
        assert_eq!(atlas.inherited.len(), 1);
        assert_eq!(atlas.inherited[0].root.order, 4);
        assert_eq!(atlas.inherited[0].owner.order, 2);
        // three traced components: orders 2, 3, and the new order-4 seed
        assert_eq!(atlas.components.len(), 3);
        assert!(components_disjoint(&atlas, 1e-9));
        for c in &atlas.components {
            assert!(c.plus.reached_a_max && c.minus.reached_a_max);
        }
    }

    #[test]
    fn atlas_parallel_matches_serial() {
        let chain = Chain::build(3);
        let table = RootTable::build(&chain, 3).unwrap();
        let mut cfg = AtlasConfig::new(3, rat(2, 1));
        let serial = build_atlas(&chain, &table, &cfg);
        cfg.workers = 4;
        let parallel = build_atlas(&chain, &table, &cfg);
        assert_eq!(serial.components.len(), parallel.components.len());
        for (a, b) in serial.components.iter().zip(&parallel.components) {
            assert_eq!(a.seed, b.seed);
            assert_eq!(a.plus.samples.len(), b.plus.samples.len());
            assert_eq!(a.plus.a_min, b.plus.a_min);
        }
    }

    #[test]
    fn min_order_queries() {
        let chain = Chain::build(3);
        let table = RootTable::build(&chain, 3).unwrap();
        let cfg = AtlasConfig::new(3, rat(3, 1));
        let atlas = build_atlas(&chain, &table, &cfg);
        assert_eq!(atlas.min_order(&rat(5, 2)).unwrap(), 2);
        assert_eq!(atlas.min_order(&rat(9, 5)).unwrap(), 3);
        // shallow atlas: A = 1.5 not reachable by orders <= 2
        let chain2 = Chain::build(2);
        let table2 = RootTable::build(&chain2, 2).unwrap();
        let atlas2 = build_atlas(&chain2, &table2, &AtlasConfig::new(2, rat(3, 1)));
        assert!(matches!(
            atlas2.min_order(&rat(3, 2)),
            Err(ContinuationError::InsufficientDepth { .. })
        ));
    }

    #[test]
    fn samples_appear_in_fixed_point_scans() {
        let chain = Chain::build(3);
        let policy = PrecisionPolicy::default();
        let roots = roots::isolate_positive_roots(&chain, 3).unwrap();
        let cfg = TraceConfig::default();
        let b = trace_branch(&chain, &policy, 3, &roots[0], Side::Plus, &rat(2, 1), &cfg);
        let sample = b.samples.iter().rev().find(|s| s.x > rat(3, 2)).unwrap();
        assert!(sample_in_fixed_points(
            &chain,
            &policy,
            sample,
            3,
            &rat(1, 1i64 << 30)
        ));
    }

    #[test]
    fn bigfloat_rational_roundtrip() {
        let p = 192;
        let q = rat(-355, 128);
        let bf = rational_to_bigfloat(&q, p);
        assert_eq!(bigfloat_to_rational(&bf), q);
    }
}
