//! Certified evaluation of the nested-exponential family, the Poincare maps,
//! and the fixed-point functions.
//!
//! The family is
//!
//! ```text
//! E_0 = 1,  E_1 = e^{(1-x)A},
//! E_n = e^{[x(E_1 + E_3 + ... + E_{n-1}) - n/2] A}          (n even)
//! E_n = e^{[(n+1)/2 - x(E_0 + E_2 + ... + E_{n-1})] A}      (n odd)
//! ```
//!
//! with `P_n(x, x) = (x E_{2n-1}, x E_{2n})` and the fixed-point function
//! `phi_n = x (E_0 + ... + E_{n-1}) - n`. An independent oracle iterates the
//! one-period monodromy map directly. All evaluation happens on intervals, so
//! every result is a certified enclosure; the nested exponentials can reach
//! magnitudes far beyond hardware floating point, which is exactly why the
//! interval layer carries an adaptive precision budget.

use crate::interval::{escalate, Interval, IntervalError, IvCtx, PrecisionPolicy};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

/// Population pair after some number of half-period sweeps.
#[derive(Debug, Clone)]
pub struct PoincareState {
    pub u: Interval,
    pub v: Interval,
}

/// `E_0 ... E_n` at (A, x), memoized for the call chain through running
/// parity sums.
pub fn eval_e_all(ctx: &mut IvCtx, n: usize, a: &Interval, x: &Interval) -> Vec<Interval> {
    let mut e: Vec<Interval> = Vec::with_capacity(n + 1);
    e.push(Interval::one());
    if n == 0 {
        return e;
    }
    let one = Interval::one();
    let arg1 = {
        let t = ctx.sub(&one, x);
        ctx.mul(&t, a)
    };
    e.push(ctx.exp(&arg1));
    let mut sum_odd = e[1].clone(); // E_1 + E_3 + ... below the current index
    let mut sum_even = e[0].clone(); // E_0 + E_2 + ...
    for k in 2..=n {
        let arg = if k % 2 == 0 {
            let xs = ctx.mul(x, &sum_odd);
            let shifted = ctx.add_i64(&xs, -((k / 2) as i64));
            ctx.mul(&shifted, a)
        } else {
            let xs = ctx.mul(x, &sum_even);
            let half = Interval::from_i64(k.div_ceil(2) as i64, ctx.prec);
            let shifted = ctx.sub(&half, &xs);
            ctx.mul(&shifted, a)
        };
        let ek = ctx.exp(&arg);
        if k % 2 == 0 {
            sum_even = ctx.add(&sum_even, &ek);
        } else {
            sum_odd = ctx.add(&sum_odd, &ek);
        }
        e.push(ek);
    }
    e
}

/// Certified enclosure of `E_n(A, x)`.
pub fn eval_e(ctx: &mut IvCtx, n: usize, a: &Interval, x: &Interval) -> Interval {
    eval_e_all(ctx, n, a, x).pop().expect("nonempty")
}

/// `E_0 ... E_n` together with the x-derivatives `E_0' ... E_n'`.
pub fn eval_e_with_derivs(
    ctx: &mut IvCtx,
    n: usize,
    a: &Interval,
    x: &Interval,
) -> (Vec<Interval>, Vec<Interval>) {
    let mut e: Vec<Interval> = Vec::with_capacity(n + 1);
    let mut d: Vec<Interval> = Vec::with_capacity(n + 1);
    e.push(Interval::one());
    d.push(Interval::zero());
    if n == 0 {
        return (e, d);
    }
    let one = Interval::one();
    let arg1 = {
        let t = ctx.sub(&one, x);
        ctx.mul(&t, a)
    };
    let e1 = ctx.exp(&arg1);
    let d1 = {
        let na = ctx.neg(a);
        ctx.mul(&na, &e1)
    };
    e.push(e1);
    d.push(d1);
    let mut sum_odd = e[1].clone();
    let mut dsum_odd = d[1].clone();
    let mut sum_even = e[0].clone();
    let mut dsum_even = d[0].clone();
    for k in 2..=n {
        let (ek, dk) = if k % 2 == 0 {
            let xs = ctx.mul(x, &sum_odd);
            let shifted = ctx.add_i64(&xs, -((k / 2) as i64));
            let arg = ctx.mul(&shifted, a);
            let ek = ctx.exp(&arg);
            // exponent derivative: A (sum_odd + x sum_odd')
            let xd = ctx.mul(x, &dsum_odd);
            let inner = ctx.add(&sum_odd, &xd);
            let darg = ctx.mul(a, &inner);
            let dk = ctx.mul(&ek, &darg);
            (ek, dk)
        } else {
            let xs = ctx.mul(x, &sum_even);
            let half = Interval::from_i64(k.div_ceil(2) as i64, ctx.prec);
            let shifted = ctx.sub(&half, &xs);
            let arg = ctx.mul(&shifted, a);
            let ek = ctx.exp(&arg);
            let xd = ctx.mul(x, &dsum_even);
            let inner = ctx.add(&sum_even, &xd);
            let darg = ctx.mul(a, &inner);
            let ndk = ctx.mul(&ek, &darg);
            let dk = ctx.neg(&ndk);
            (ek, dk)
        };
        if k % 2 == 0 {
            sum_even = ctx.add(&sum_even, &ek);
            dsum_even = ctx.add(&dsum_even, &dk);
        } else {
            sum_odd = ctx.add(&sum_odd, &ek);
            dsum_odd = ctx.add(&dsum_odd, &dk);
        }
        e.push(ek);
        d.push(dk);
    }
    (e, d)
}

/// `P_n(x, x) = (x E_{2n-1}, x E_{2n})` for the symmetric case.
pub fn poincare_map(ctx: &mut IvCtx, n: usize, a: &Interval, x: &Interval) -> PoincareState {
    assert!(n >= 1);
    let e = eval_e_all(ctx, 2 * n, a, x);
    PoincareState {
        u: ctx.mul(x, &e[2 * n - 1]),
        v: ctx.mul(x, &e[2 * n]),
    }
}

/// One application of the monodromy map for the general (A, B) system:
/// `u1 = u0 e^{(1-v0)A}`, `v1 = v0 e^{(u1-1)B}`. Iterating this is the
/// independent oracle for `poincare_map` and `eval_e`.
pub fn oracle_monodromy(
    ctx: &mut IvCtx,
    u0: &Interval,
    v0: &Interval,
    a: &Interval,
    b: &Interval,
) -> PoincareState {
    let one = Interval::one();
    let exp_u = {
        let t = ctx.sub(&one, v0);
        let arg = ctx.mul(&t, a);
        ctx.exp(&arg)
    };
    let u1 = ctx.mul(u0, &exp_u);
    let exp_v = {
        let t = ctx.sub(&u1, &one);
        let arg = ctx.mul(&t, b);
        ctx.exp(&arg)
    };
    let v1 = ctx.mul(v0, &exp_v);
    PoincareState { u: u1, v: v1 }
}

/// All monodromy iterates `(u_1, v_1) ... (u_n, v_n)` from `(x, x)`.
pub fn iterate_monodromy(
    ctx: &mut IvCtx,
    n: usize,
    a: &Interval,
    b: &Interval,
    x: &Interval,
) -> Vec<PoincareState> {
    let mut states = Vec::with_capacity(n);
    let mut cur = PoincareState {
        u: x.clone(),
        v: x.clone(),
    };
    for _ in 0..n {
        cur = oracle_monodromy(ctx, &cur.u, &cur.v, a, b);
        states.push(cur.clone());
    }
    states
}

/// Certified enclosure of `phi_n(A, x) = x (E_0 + ... + E_{n-1}) - n`.
pub fn eval_phi(ctx: &mut IvCtx, n: usize, a: &Interval, x: &Interval) -> Interval {
    assert!(n >= 1);
    let e = eval_e_all(ctx, n - 1, a, x);
    let mut sum = Interval::zero();
    for ek in &e {
        sum = ctx.add(&sum, ek);
    }
    let xs = ctx.mul(x, &sum);
    ctx.add_i64(&xs, -(n as i64))
}

/// Certified enclosure of `d phi_n / dx = sum (E_j + x E_j')`. At `x = 1`
/// this encloses the exact chain value `p_n(A)`.
pub fn eval_dphi_dx(ctx: &mut IvCtx, n: usize, a: &Interval, x: &Interval) -> Interval {
    assert!(n >= 1);
    let (e, d) = eval_e_with_derivs(ctx, n - 1, a, x);
    let mut sum = Interval::zero();
    for (ek, dk) in e.iter().zip(&d) {
        let xd = ctx.mul(x, dk);
        let term = ctx.add(ek, &xd);
        sum = ctx.add(&sum, &term);
    }
    sum
}

/// Evaluates `E_n` at exact rational arguments, escalating precision until
/// the relative width of the enclosure is at most `2^-target_bits`; carries
/// the precision-exhaustion signal past the ceiling.
pub fn eval_e_adaptive(
    policy: &PrecisionPolicy,
    n: usize,
    a: &BigRational,
    x: &BigRational,
    target_bits: u32,
) -> Result<Interval, IntervalError> {
    escalate(policy, |ctx| {
        let ai = ctx.from_rational(a);
        let xi = ctx.from_rational(x);
        let v = eval_e(ctx, n, &ai, &xi);
        let w = v.rel_width(ctx.prec);
        let target = pow2(-(target_bits as i32), ctx.prec);
        if matches!(w.cmp(&target), Some(c) if c <= 0) {
            Some(v)
        } else {
            None
        }
    })
}

/// Evaluates `phi_n` at exact rational arguments, escalating precision until
/// the relative width of the result is at most `2^-target_bits`.
pub fn eval_phi_adaptive(
    policy: &PrecisionPolicy,
    n: usize,
    a: &BigRational,
    x: &BigRational,
    target_bits: u32,
) -> Result<Interval, IntervalError> {
    escalate(policy, |ctx| {
        let ai = ctx.from_rational(a);
        let xi = ctx.from_rational(x);
        let v = eval_phi(ctx, n, &ai, &xi);
        let w = v.rel_width(ctx.prec);
        let target = pow2(-(target_bits as i32), ctx.prec);
        if matches!(w.cmp(&target), Some(c) if c <= 0) {
            Some(v)
        } else {
            None
        }
    })
}

fn pow2(e: i32, prec: usize) -> astro_float::BigFloat {
    let mut x = astro_float::BigFloat::from_i8(1, prec);
    x.set_exponent(e + 1);
    x
}

/// Certified sign of `phi_n(A, x)` at exact rational arguments, or `None`
/// when the value straddles zero at the precision ceiling (true zeros do).
pub fn phi_sign(
    policy: &PrecisionPolicy,
    n: usize,
    a: &BigRational,
    x: &BigRational,
) -> Option<i8> {
    escalate(policy, |ctx| {
        let ai = ctx.from_rational(a);
        let xi = ctx.from_rational(x);
        let v = eval_phi(ctx, n, &ai, &xi);
        match v.sign() {
            0 => None,
            s => Some(s),
        }
    })
    .ok()
}

/// A fixed point of `P_n` at one parameter value: a certified enclosure of
/// one zero of `phi_n(A, .)`.
#[derive(Debug, Clone)]
pub struct FixedPoint {
    pub lo: BigRational,
    pub hi: BigRational,
    /// The always-present zero at x = 1 (reported, never re-derived).
    pub trivial: bool,
    /// Width of the phi-enclosure at the interval midpoint.
    pub residual_width: f64,
}

impl FixedPoint {
    pub fn mid(&self) -> BigRational {
        (&self.lo + &self.hi) / BigRational::from(BigInt::from(2))
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }
}

/// Scan result: certified zeros plus any regions the scan could not resolve
/// at the precision ceiling (reported, not guessed).
#[derive(Debug, Clone)]
pub struct FixedPointScan {
    pub n: usize,
    pub a: BigRational,
    pub points: Vec<FixedPoint>,
    pub unresolved: Vec<(BigRational, BigRational)>,
    /// The parameter sits exactly on a bifurcation value, where the trivial
    /// zero is degenerate.
    pub degenerate_at_one: bool,
}

#[derive(Debug, Clone)]
pub struct FixedPointConfig {
    /// Grid cells across (0, n) for the sign scan.
    pub grid_cells: usize,
    /// Subdivision depth bound for sign-ambiguous cells.
    pub max_depth: usize,
}

impl Default for FixedPointConfig {
    fn default() -> Self {
        Self {
            grid_cells: 1 << 10,
            max_depth: 48,
        }
    }
}

/// All zeros of `phi_n(A, .)` in (0, n), each enclosed to width `tol`.
///
/// The trivial zero x = 1 is reported from the known solution; a certified
/// derivative sign over a window around 1 excludes other zeros there, and a
/// sign scan with verified cell exclusion covers the rest of the domain.
pub fn fixed_points(
    chain: &crate::polychain::Chain,
    policy: &PrecisionPolicy,
    n: usize,
    a: &BigRational,
    tol: &BigRational,
    cfg: &FixedPointConfig,
) -> FixedPointScan {
    assert!(n >= 2 && n <= chain.n_max());
    assert!(a > &BigRational::zero() && tol > &BigRational::zero());
    let one = BigRational::from(BigInt::from(1));
    let pn_at_a = chain.eval(n, a);
    let degenerate = pn_at_a.is_zero();
    let mut points = Vec::new();
    let mut unresolved = Vec::new();

    // window around the trivial zero
    let mut delta = BigRational::new(BigInt::from(1), BigInt::from(8));
    let delta_min = BigRational::new(BigInt::from(1), BigInt::from(1u64 << 40));
    let mut window_ok = false;
    if !degenerate {
        while delta >= delta_min {
            if window_is_monotone(policy, n, a, &(&one - &delta), &(&one + &delta)) {
                window_ok = true;
                break;
            }
            delta = &delta / BigRational::from(BigInt::from(2));
        }
    }
    if !window_ok {
        // tangential parameter (or certification failure): the window is an
        // honestly unresolved neighborhood of the degenerate trivial zero
        delta = BigRational::new(BigInt::from(1), BigInt::from(256));
        unresolved.push(((&one - &delta).clone(), (&one + &delta).clone()));
    }
    points.push(FixedPoint {
        lo: one.clone(),
        hi: one.clone(),
        trivial: true,
        residual_width: 0.0,
    });

    let nn = BigRational::from(BigInt::from(n as i64));
    let segments = [
        (BigRational::zero(), &one - &delta),
        (&one + &delta, nn.clone()),
    ];
    for (seg_lo, seg_hi) in segments {
        if seg_lo >= seg_hi {
            continue;
        }
        let frac = (&seg_hi - &seg_lo) / &nn;
        let cells = ((cfg.grid_cells as f64) * rational_to_f64(&frac))
            .ceil()
            .max(4.0) as usize;
        scan_segment(
            policy, n, a, &seg_lo, &seg_hi, cells, tol, cfg, &mut points, &mut unresolved,
        );
    }
    points.sort_by(|p, q| p.lo.cmp(&q.lo));
    FixedPointScan {
        n,
        a: a.clone(),
        points,
        unresolved,
        degenerate_at_one: degenerate,
    }
}

fn rational_to_f64(q: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    q.to_f64().unwrap_or(0.0)
}

/// Wide-interval evaluations are dependency-limited; extra precision cannot
/// resolve them, so window and cell certificates run on a short ladder.
fn wide_cell_policy(policy: &PrecisionPolicy) -> PrecisionPolicy {
    PrecisionPolicy {
        start_bits: policy.start_bits,
        ceiling_bits: (policy.start_bits * 2).min(policy.ceiling_bits),
    }
}

/// Certifies that `dphi/dx` keeps one sign over the x-window `[lo, hi]`.
fn window_is_monotone(
    policy: &PrecisionPolicy,
    n: usize,
    a: &BigRational,
    lo: &BigRational,
    hi: &BigRational,
) -> bool {
    escalate(&wide_cell_policy(policy), |ctx| {
        let ai = ctx.from_rational(a);
        let lo_i = ctx.from_rational(lo);
        let hi_i = ctx.from_rational(hi);
        let xw = lo_i.hull(&hi_i);
        let d = eval_dphi_dx(ctx, n, &ai, &xw);
        if d.sign() != 0 {
            Some(true)
        } else {
            None
        }
    })
    .unwrap_or(false)
}

#[allow(clippy::too_many_arguments)]
fn scan_segment(
    policy: &PrecisionPolicy,
    n: usize,
    a: &BigRational,
    seg_lo: &BigRational,
    seg_hi: &BigRational,
    cells: usize,
    tol: &BigRational,
    cfg: &FixedPointConfig,
    points: &mut Vec<FixedPoint>,
    unresolved: &mut Vec<(BigRational, BigRational)>,
) {
    let step = (seg_hi - seg_lo) / BigRational::from(BigInt::from(cells as i64));
    let mut xs: Vec<BigRational> = Vec::with_capacity(cells + 1);
    let mut sg: Vec<i8> = Vec::with_capacity(cells + 1);
    for k in 0..=cells {
        let x = seg_lo + &step * BigRational::from(BigInt::from(k as i64));
        // phi(0) = -n exactly
        let s = if x.is_zero() {
            -1
        } else {
            certified_sign_with_nudge(policy, n, a, &x, &step)
        };
        xs.push(x);
        sg.push(s);
    }
    for k in 0..cells {
        process_cell(
            policy, n, a, &xs[k], &xs[k + 1], sg[k], sg[k + 1],
            tol, cfg.max_depth, points, unresolved,
        );
    }
}

/// Certified sign at x, nudging the probe slightly when the value straddles
/// zero at the ceiling (an unluckily placed grid point). Returns 0 only if
/// nudging fails as well.
fn certified_sign_with_nudge(
    policy: &PrecisionPolicy,
    n: usize,
    a: &BigRational,
    x: &BigRational,
    scale: &BigRational,
) -> i8 {
    if let Some(s) = phi_sign(policy, n, a, x) {
        return s;
    }
    let mut nudge = scale / BigRational::from(BigInt::from(7));
    for _ in 0..3 {
        if let Some(s) = phi_sign(policy, n, a, &(x + &nudge)) {
            return s;
        }
        nudge = &nudge / BigRational::from(BigInt::from(3));
    }
    0
}

#[allow(clippy::too_many_arguments)]
fn process_cell(
    policy: &PrecisionPolicy,
    n: usize,
    a: &BigRational,
    lo: &BigRational,
    hi: &BigRational,
    s_lo: i8,
    s_hi: i8,
    tol: &BigRational,
    depth: usize,
    points: &mut Vec<FixedPoint>,
    unresolved: &mut Vec<(BigRational, BigRational)>,
) {
    if s_lo == 0 || s_hi == 0 {
        unresolved.push((lo.clone(), hi.clone()));
        return;
    }
    if s_lo != s_hi {
        bisect_bracket(policy, n, a, lo, hi, s_lo, tol, points, unresolved);
        return;
    }
    // same sign: try verified exclusion over the whole cell
    if cell_excludes_zero(policy, n, a, lo, hi) {
        return;
    }
    if depth == 0 {
        unresolved.push((lo.clone(), hi.clone()));
        return;
    }
    let mid = (lo + hi) / BigRational::from(BigInt::from(2));
    let width = hi - lo;
    let s_mid = certified_sign_with_nudge(policy, n, a, &mid, &width);
    process_cell(
        policy, n, a, lo, &mid, s_lo, s_mid, tol, depth - 1, points, unresolved,
    );
    process_cell(
        policy, n, a, &mid, hi, s_mid, s_hi, tol, depth - 1, points, unresolved,
    );
}

/// Certifies that the cell contains no zero: plain interval evaluation
/// first, then the centered form `phi(mid) + phi'(cell) (cell - mid)`,
/// which stays sharp near flat zeros where the plain hull loses to the
/// dependency problem.
fn cell_excludes_zero(
    policy: &PrecisionPolicy,
    n: usize,
    a: &BigRational,
    lo: &BigRational,
    hi: &BigRational,
) -> bool {
    escalate(&wide_cell_policy(policy), |ctx| {
        let ai = ctx.from_rational(a);
        let lo_i = ctx.from_rational(lo);
        let hi_i = ctx.from_rational(hi);
        let xw = lo_i.hull(&hi_i);
        let v = eval_phi(ctx, n, &ai, &xw);
        if v.sign() != 0 {
            return Some(true);
        }
        let mid = (lo + hi) / BigRational::from(BigInt::from(2));
        let half_width = (hi - lo) / BigRational::from(BigInt::from(2));
        let mid_i = ctx.from_rational(&mid);
        let f_mid = eval_phi(ctx, n, &ai, &mid_i);
        let slope = eval_dphi_dx(ctx, n, &ai, &xw);
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

#[allow(clippy::too_many_arguments)]
fn bisect_bracket(
    policy: &PrecisionPolicy,
    n: usize,
    a: &BigRational,
    lo: &BigRational,
    hi: &BigRational,
    s_lo: i8,
    tol: &BigRational,
    points: &mut Vec<FixedPoint>,
    unresolved: &mut Vec<(BigRational, BigRational)>,
) {
    let two = BigRational::from(BigInt::from(2));
    let mut a_end = lo.clone();
    let mut b_end = hi.clone();
    let s_a = s_lo;
    while &b_end - &a_end > *tol {
        let mid = (&a_end + &b_end) / &two;
        let width = &b_end - &a_end;
        let s_mid = certified_sign_with_nudge(policy, n, a, &mid, &width);
        if s_mid == 0 {
            unresolved.push((a_end, b_end));
            return;
        }
        if s_mid == s_a {
            a_end = mid;
        } else {
            b_end = mid;
        }
    }
    let residual = residual_width_at(policy, n, a, &((&a_end + &b_end) / &two));
    points.push(FixedPoint {
        lo: a_end,
        hi: b_end,
        trivial: false,
        residual_width: residual,
    });
}

fn residual_width_at(policy: &PrecisionPolicy, n: usize, a: &BigRational, x: &BigRational) -> f64 {
    let single = PrecisionPolicy::fixed(policy.start_bits);
    escalate(&single, |ctx| {
        let ai = ctx.from_rational(a);
        let xi = ctx.from_rational(x);
        let v = eval_phi(ctx, n, &ai, &xi);
        Some(crate::interval::bigfloat_to_f64(&v.width(ctx.prec)))
    })
    .unwrap_or(f64::NAN)
}

/// Named half-period forcing profiles. Any profile with the same integrals
/// produces the same monodromy, because the closed-form solution depends only
/// on the cumulative integrals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ForcingShape {
    /// `alpha(t) = (pi A / T) sin(2 pi t / T)` on the first half-period and
    /// the mirrored pulse for `beta` on the second.
    SinePulse,
    /// Constant plateaus `2A/T` and `2B/T` on their half-periods.
    Square,
}

/// T-periodic forcing pair: `alpha` supported on `[0, T/2]`, `beta` on
/// `[T/2, T]`, with prescribed full-period integrals.
#[derive(Debug, Clone)]
pub struct ForcingProfile {
    pub period: BigRational,
    pub a_total: BigRational,
    pub b_total: BigRational,
    pub shape: ForcingShape,
}

impl ForcingProfile {
    pub fn new(
        period: BigRational,
        a_total: BigRational,
        b_total: BigRational,
        shape: ForcingShape,
    ) -> Self {
        assert!(period > BigRational::zero());
        Self {
            period,
            a_total,
            b_total,
            shape,
        }
    }

    /// Cumulative integral of `alpha` over `[0, t]`.
    pub fn alpha_integral(&self, ctx: &mut IvCtx, t: &BigRational) -> Interval {
        let half = &self.period / BigRational::from(BigInt::from(2));
        if *t >= half {
            return ctx.from_rational(&self.a_total);
        }
        match self.shape {
            ForcingShape::Square => {
                let q = BigRational::from(BigInt::from(2)) * &self.a_total * t / &self.period;
                ctx.from_rational(&q)
            }
            ForcingShape::SinePulse => {
                // (A/2)(1 - cos(2 pi t / T))
                let theta_q = BigRational::from(BigInt::from(2)) * t / &self.period;
                let theta = {
                    let pi = ctx.pi();
                    let f = ctx.from_rational(&theta_q);
                    ctx.mul(&pi, &f)
                };
                let c = ctx.cos(&theta);
                let one = Interval::one();
                let t1 = ctx.sub(&one, &c);
                let half_a =
                    ctx.from_rational(&(&self.a_total / BigRational::from(BigInt::from(2))));
                ctx.mul(&half_a, &t1)
            }
        }
    }

    /// Cumulative integral of `beta` over `[0, t]`.
    pub fn beta_integral(&self, ctx: &mut IvCtx, t: &BigRational) -> Interval {
        let half = &self.period / BigRational::from(BigInt::from(2));
        if *t <= half {
            return Interval::zero();
        }
        if *t >= self.period {
            return ctx.from_rational(&self.b_total);
        }
        match self.shape {
            ForcingShape::Square => {
                let q = BigRational::from(BigInt::from(2)) * &self.b_total * (t - &half)
                    / &self.period;
                ctx.from_rational(&q)
            }
            ForcingShape::SinePulse => {
                // (B/2)(1 + cos(2 pi t / T))
                let theta_q = BigRational::from(BigInt::from(2)) * t / &self.period;
                let theta = {
                    let pi = ctx.pi();
                    let f = ctx.from_rational(&theta_q);
                    ctx.mul(&pi, &f)
                };
                let c = ctx.cos(&theta);
                let one = Interval::one();
                let t1 = ctx.add(&one, &c);
                let half_b =
                    ctx.from_rational(&(&self.b_total / BigRational::from(BigInt::from(2))));
                ctx.mul(&half_b, &t1)
            }
        }
    }
}

/// Closed-form state at time `t in [0, T]`:
/// `u(t) = u0 e^{(1-v0) Ia(t)}`, `v(t) = v0 e^{(u(T)-1) Ib(t)}`.
/// At `t = T` this is exactly one monodromy application.
pub fn trajectory(
    ctx: &mut IvCtx,
    profile: &ForcingProfile,
    u0: &Interval,
    v0: &Interval,
    t: &BigRational,
) -> PoincareState {
    assert!(*t >= BigRational::zero() && *t <= profile.period);
    let one = Interval::one();
    let ia = profile.alpha_integral(ctx, t);
    let u_t = {
        let s = ctx.sub(&one, v0);
        let arg = ctx.mul(&s, &ia);
        let e = ctx.exp(&arg);
        ctx.mul(u0, &e)
    };
    let ib = profile.beta_integral(ctx, t);
    // u has already settled at its half-period value wherever beta acts
    let u_end = {
        let a_iv = ctx.from_rational(&profile.a_total);
        let s = ctx.sub(&one, v0);
        let arg = ctx.mul(&s, &a_iv);
        let e = ctx.exp(&arg);
        ctx.mul(u0, &e)
    };
    let v_t = {
        let s = ctx.sub(&u_end, &one);
        let arg = ctx.mul(&s, &ib);
        let e = ctx.exp(&arg);
        ctx.mul(v0, &e)
    };
    PoincareState { u: u_t, v: v_t }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polychain::Chain;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn iv(ctx: &mut IvCtx, n: i64, d: i64) -> Interval {
        ctx.from_rational(&rat(n, d))
    }

    #[test]
    fn e_at_one_is_one() {
        let mut ctx = IvCtx::new(128);
        let one = Interval::one();
        for a_num in [1i64, 3, 7] {
            let a = iv(&mut ctx, a_num, 2);
            let e = eval_e_all(&mut ctx, 16, &a, &one);
            for (k, ek) in e.iter().enumerate() {
                assert!(
                    ek.contains_value(Interval::one().lo()),
                    "E_{k} at x=1 should enclose 1, got {ek}"
                );
            }
        }
    }

    #[test]
    fn e_at_zero_parameter_is_one() {
        let mut ctx = IvCtx::new(128);
        let a = Interval::zero();
        let x = iv(&mut ctx, 7, 10);
        let e = eval_e_all(&mut ctx, 10, &a, &x);
        for ek in &e {
            assert!(ek.contains_value(Interval::one().lo()));
        }
    }

    #[test]
    fn e1_matches_rational_series() {
        // E_1(A=2, x=1/2) = e; series sum 1/k! with certified remainder
        let mut ctx = IvCtx::new(192);
        let a = iv(&mut ctx, 2, 1);
        let x = iv(&mut ctx, 1, 2);
        let e1 = eval_e(&mut ctx, 1, &a, &x);
        let mut term = BigRational::from(BigInt::from(1));
        let mut sum = BigRational::from(BigInt::from(1));
        for k in 1..=40u32 {
            term /= BigRational::from(BigInt::from(k));
            sum += term.clone();
        }
        let upper = &sum + &term * BigRational::from(BigInt::from(2));
        let reference = Interval::from_rational(&sum, 256).hull(&Interval::from_rational(&upper, 256));
        assert!(e1.intersects(&reference), "{e1} vs {reference}");
    }

    #[test]
    fn phi_at_zero_is_minus_n() {
        let mut ctx = IvCtx::new(128);
        let a = iv(&mut ctx, 5, 2);
        let x = Interval::zero();
        for n in 1..=9usize {
            let v = eval_phi(&mut ctx, n, &a, &x);
            let expect = Interval::from_i64(-(n as i64), 128);
            assert!(v.contains(&expect), "phi_{n}(0) = {v}");
        }
    }

    #[test]
    fn phi_at_zero_parameter_is_linear() {
        // phi_n(0, x) = n (x - 1)
        let mut ctx = IvCtx::new(128);
        let a = Interval::zero();
        for n in 1..=8usize {
            for (xn, xd) in [(1i64, 4i64), (3, 2), (7, 3)] {
                let x = iv(&mut ctx, xn, xd);
                let v = eval_phi(&mut ctx, n, &a, &x);
                let expect = rat(n as i64 * (xn - xd), xd);
                let e = ctx.from_rational(&expect);
                assert!(v.intersects(&e), "phi_{n}(0, {xn}/{xd})");
            }
        }
    }

    #[test]
    fn poincare_map_fixes_one() {
        let mut ctx = IvCtx::new(128);
        let one = Interval::one();
        for n in 1..=6usize {
            let a = iv(&mut ctx, 3, 1);
            let st = poincare_map(&mut ctx, n, &a, &one);
            assert!(st.u.contains_value(Interval::one().lo()));
            assert!(st.v.contains_value(Interval::one().lo()));
        }
    }

    #[test]
    fn poincare_map_matches_iterated_oracle() {
        let mut rng = crate::prng::Prng::new(0xfeed);
        for _ in 0..25 {
            let n = 1 + (rng.below(12) as usize);
            let a = rng.dyadic_in((1, 100), (4, 1), 12);
            let x = rng.dyadic_in((1, 100), (2, 1), 12);
            let mut ctx = IvCtx::new(192);
            let ai = ctx.from_rational(&a);
            let xi = ctx.from_rational(&x);
            let direct = poincare_map(&mut ctx, n, &ai, &xi);
            let iterated = iterate_monodromy(&mut ctx, n, &ai, &ai, &xi);
            let last = iterated.last().unwrap();
            assert!(
                direct.u.intersects(&last.u),
                "u mismatch at n={n} A={a} x={x}: {} vs {}",
                direct.u,
                last.u
            );
            assert!(direct.v.intersects(&last.v), "v mismatch at n={n}");
        }
    }

    #[test]
    fn second_map_is_square_of_first() {
        let mut ctx = IvCtx::new(192);
        let a = iv(&mut ctx, 5, 2);
        let x = iv(&mut ctx, 3, 4);
        let p2 = poincare_map(&mut ctx, 2, &a, &x);
        let once = oracle_monodromy(&mut ctx, &x, &x, &a, &a);
        let twice = oracle_monodromy(&mut ctx, &once.u, &once.v, &a, &a);
        assert!(p2.u.intersects(&twice.u));
        assert!(p2.v.intersects(&twice.v));
    }

    #[test]
    fn monodromy_trivia() {
        let mut ctx = IvCtx::new(128);
        let one = Interval::one();
        let a = iv(&mut ctx, 7, 2);
        let b = iv(&mut ctx, 9, 4);
        let st = oracle_monodromy(&mut ctx, &one, &one, &a, &b);
        assert!(st.u.contains_value(Interval::one().lo()));
        assert!(st.v.contains_value(Interval::one().lo()));
        // v0 = 1 leaves u unchanged
        let u0 = iv(&mut ctx, 5, 4);
        let st2 = oracle_monodromy(&mut ctx, &u0, &one, &a, &b);
        assert!(st2.u.intersects(&u0));
    }

    #[test]
    fn dphi_at_one_encloses_chain_value() {
        let chain = Chain::build(20);
        let mut rng = crate::prng::Prng::new(0xabcd);
        let mut ctx = IvCtx::new(192);
        for _ in 0..30 {
            let n = 1 + (rng.below(20) as usize);
            let a = rng.dyadic_in((1, 100), (4, 1), 10);
            let exact = chain.eval(n, &a);
            let ai = ctx.from_rational(&a);
            let one = Interval::one();
            let d = eval_dphi_dx(&mut ctx, n, &ai, &one);
            let exact_iv = Interval::from_rational(&exact, 256);
            assert!(d.contains(&exact_iv), "p_{n}({a}) = {exact} not inside {d}");
        }
    }

    #[test]
    fn dphi_matches_finite_differences() {
        // second-order central differences at a tame point
        let mut ctx = IvCtx::new(256);
        let a = iv(&mut ctx, 3, 2);
        let x = iv(&mut ctx, 5, 4);
        let d = eval_dphi_dx(&mut ctx, 4, &a, &x);
        let h = rat(1, 1 << 12);
        let x_plus = ctx.from_rational(&(rat(5, 4) + h.clone()));
        let x_minus = ctx.from_rational(&(rat(5, 4) - h.clone()));
        let f_plus = eval_phi(&mut ctx, 4, &a, &x_plus);
        let f_minus = eval_phi(&mut ctx, 4, &a, &x_minus);
        let diff = ctx.sub(&f_plus, &f_minus);
        let two_h = ctx.from_rational(&(h.clone() * rat(2, 1)));
        let fd = ctx.div(&diff, &two_h);
        let err = ctx.sub(&fd, &d);
        let bound = ctx.from_rational(&(h.clone() * h * rat(100, 1)));
        assert!(
            matches!(err.abs_hi().cmp(bound.hi()), Some(c) if c <= 0),
            "err {err} vs bound {bound}"
        );
    }

    #[test]
    fn pathological_phi5_magnitude() {
        // phi_5 at A = 5, x = 1/10 is about 2.39e16: representable in f64
        // but far beyond its unit resolution; certified tightly here
        let policy = PrecisionPolicy::default();
        let v = eval_phi_adaptive(&policy, 5, &rat(5, 1), &rat(1, 10), 40).unwrap();
        let lo = crate::interval::bigfloat_to_f64(v.lo());
        let hi = crate::interval::bigfloat_to_f64(v.hi());
        assert!(lo > 2.0e16 && hi < 3.0e16, "phi_5(5, 0.1) in [{lo}, {hi}]");
        // the blow-up region near x ~ 0.0127 exceeds 1e28
        let w = eval_phi_adaptive(&policy, 5, &rat(5, 1), &rat(1265, 100_000), 20).unwrap();
        let wl = crate::interval::bigfloat_to_f64(w.lo());
        assert!(wl > 1.0e28, "phi_5 near 0.01265 reaches {wl}");
    }

    #[test]
    fn fixed_points_n2() {
        let chain = Chain::build(4);
        let policy = PrecisionPolicy::default();
        let tol = rat(1, 1i64 << 40);
        // A = 3: two nontrivial zeros besides 1
        let scan = fixed_points(
            &chain,
            &policy,
            2,
            &rat(3, 1),
            &tol,
            &FixedPointConfig::default(),
        );
        assert!(
            scan.unresolved.is_empty(),
            "unresolved: {:?}",
            scan.unresolved
        );
        assert_eq!(scan.points.len(), 3);
        assert!(scan.points[0].hi < rat(1, 1));
        assert!(scan.points[1].trivial);
        assert!(scan.points[2].lo > rat(1, 1));
        // A = 1: only the trivial zero
        let scan1 = fixed_points(
            &chain,
            &policy,
            2,
            &rat(1, 1),
            &tol,
            &FixedPointConfig::default(),
        );
        assert!(scan1.unresolved.is_empty());
        assert_eq!(scan1.points.len(), 1);
        assert!(scan1.points[0].trivial);
    }

    #[test]
    fn fixed_points_at_exact_bifurcation_value() {
        // A = 2 is a root of the second member: the trivial zero is
        // degenerate there, and the scan reports the window around 1 as
        // unresolved instead of guessing
        let chain = Chain::build(2);
        let policy = PrecisionPolicy {
            start_bits: 128,
            ceiling_bits: 512,
        };
        let tol = rat(1, 1 << 20);
        let cfg = FixedPointConfig {
            grid_cells: 64,
            max_depth: 24,
        };
        let scan = fixed_points(&chain, &policy, 2, &rat(2, 1), &tol, &cfg);
        assert!(scan.degenerate_at_one);
        assert!(scan.points.iter().any(|p| p.trivial));
        assert!(
            scan.unresolved
                .iter()
                .any(|(lo, hi)| *lo < rat(1, 1) && rat(1, 1) < *hi),
            "expected an unresolved window around the trivial zero: {:?}",
            scan.unresolved
        );
    }

    #[test]
    fn fixed_point_symmetry_and_sums() {
        // at a certified fixed point, u_h = v_{n-h} and the iterates sum to n
        let chain = Chain::build(6);
        let policy = PrecisionPolicy::default();
        let tol = rat(1, 1i64 << 48);
        for (n, a) in [(2usize, rat(3, 1)), (3, rat(19, 10)), (4, rat(3, 2))] {
            let scan = fixed_points(&chain, &policy, n, &a, &tol, &FixedPointConfig::default());
            assert!(scan.unresolved.is_empty(), "n={n}");
            for pt in scan.points.iter().filter(|p| !p.trivial) {
                let mut ctx = IvCtx::new(256);
                let ai = ctx.from_rational(&a);
                let lo_i = ctx.from_rational(&pt.lo);
                let hi_i = ctx.from_rational(&pt.hi);
                let x = lo_i.hull(&hi_i);
                let states = iterate_monodromy(&mut ctx, n, &ai, &ai, &x);
                for h in 1..n {
                    let u_h = &states[h - 1].u;
                    let v_nh = &states[n - h - 1].v;
                    assert!(
                        u_h.intersects(v_nh),
                        "symmetry u_{h} = v_{} fails at n={n} A={a}",
                        n - h
                    );
                }
                let mut su = x.clone();
                let mut sv = x.clone();
                for st in states.iter().take(n - 1) {
                    su = ctx.add(&su, &st.u);
                    sv = ctx.add(&sv, &st.v);
                }
                let nn = Interval::from_i64(n as i64, 128);
                assert!(su.intersects(&nn), "sum u = {su} at n={n}");
                assert!(sv.intersects(&nn), "sum v = {sv} at n={n}");
            }
        }
    }

    #[test]
    fn trajectory_endpoints_and_profiles() {
        let mut ctx = IvCtx::new(192);
        let t_period = rat(2, 1);
        for shape in [ForcingShape::SinePulse, ForcingShape::Square] {
            let profile = ForcingProfile::new(t_period.clone(), rat(5, 2), rat(7, 4), shape);
            let u0 = iv(&mut ctx, 3, 4);
            let v0 = iv(&mut ctx, 6, 5);
            let st0 = trajectory(&mut ctx, &profile, &u0, &v0, &BigRational::zero());
            assert!(st0.u.intersects(&u0) && st0.v.intersects(&v0));
            // t = T matches the monodromy oracle
            let st_t = trajectory(&mut ctx, &profile, &u0, &v0, &t_period);
            let a = ctx.from_rational(&rat(5, 2));
            let b = ctx.from_rational(&rat(7, 4));
            let oracle = oracle_monodromy(&mut ctx, &u0, &v0, &a, &b);
            assert!(st_t.u.intersects(&oracle.u), "u: {} vs {}", st_t.u, oracle.u);
            assert!(st_t.v.intersects(&oracle.v), "v: {} vs {}", st_t.v, oracle.v);
            // v0 = 1: both components frozen at t = T/2
            let one = Interval::one();
            let st_half = trajectory(&mut ctx, &profile, &u0, &one, &rat(1, 1));
            assert!(st_half.u.intersects(&u0));
            assert!(st_half.v.intersects(&one));
        }
    }

    #[test]
    fn enclosure_tightens_with_precision() {
        let a = rat(7, 2);
        let x = rat(3, 4);
        let mut widths = Vec::new();
        for bits in [64usize, 128, 256] {
            let mut ctx = IvCtx::new(bits);
            let ai = ctx.from_rational(&a);
            let xi = ctx.from_rational(&x);
            let v = eval_phi(&mut ctx, 8, &ai, &xi);
            widths.push(crate::interval::bigfloat_to_f64(&v.width(bits)));
        }
        assert!(widths[0] > widths[1] && widths[1] > widths[2], "{widths:?}");
    }
}
