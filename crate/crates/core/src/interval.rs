//! Arbitrary-precision interval scalar with directed rounding.
//!
//! Every operation returns an enclosure of the exact result. Endpoints are
//! astro-float big floats; the lower endpoint is rounded toward minus
//! infinity, the upper toward plus infinity. Transcendental results are
//! additionally widened by two units in the last place, and `exp` clamps
//! arguments whose magnitude would overflow the binary exponent range, so
//! enclosures stay valid through the wildest nested-exponential blowups.

use astro_float::{BigFloat, Consts, RoundingMode, Sign};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;
use std::fmt;

const DOWN: RoundingMode = RoundingMode::Down;
const UP: RoundingMode = RoundingMode::Up;

/// Above this binary exponent of the argument, `exp` may overflow the
/// representable exponent range and is clamped to a safe bound instead.
const EXP_ARG_EXPONENT_LIMIT: i32 = 30;

#[derive(Debug, Clone, PartialEq)]
pub enum IntervalError {
    /// The enclosure could not be tightened to the requested width within the
    /// configured precision ceiling.
    PrecisionExhausted { ceiling_bits: usize },
}

impl fmt::Display for IntervalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::PrecisionExhausted { ceiling_bits } => {
                write!(f, "precision ceiling of {ceiling_bits} bits exhausted")
            }
        }
    }
}

impl std::error::Error for IntervalError {}

/// Working precision policy: start small, double on failure up to a ceiling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct PrecisionPolicy {
    pub start_bits: usize,
    pub ceiling_bits: usize,
}

impl Default for PrecisionPolicy {
    fn default() -> Self {
        Self {
            start_bits: 128,
            ceiling_bits: 16384,
        }
    }
}

impl PrecisionPolicy {
    pub fn fixed(bits: usize) -> Self {
        Self {
            start_bits: bits,
            ceiling_bits: bits,
        }
    }

    /// Precision ladder: start, 2*start, ..., ceiling.
    pub fn ladder(&self) -> impl Iterator<Item = usize> {
        let start = self.start_bits.max(32);
        let ceiling = self.ceiling_bits.max(start);
        let mut p = Some(start);
        std::iter::from_fn(move || {
            let cur = p?;
            p = if cur >= ceiling { None } else { Some((cur * 2).min(ceiling)) };
            Some(cur)
        })
    }
}

std::thread_local! {
    // astro-float's constants cache (ln 2, pi, ...) is expensive to rebuild;
    // one per thread, shared by every context on that thread
    static CONSTS: std::cell::RefCell<Consts> =
        std::cell::RefCell::new(Consts::new().expect("constants cache"));
}

fn with_consts<R>(f: impl FnOnce(&mut Consts) -> R) -> R {
    CONSTS.with(|cell| f(&mut cell.borrow_mut()))
}

/// Shared evaluation state: the working precision. Contexts are cheap to
/// create; the constants cache behind them is thread-local.
pub struct IvCtx {
    pub prec: usize,
}

impl IvCtx {
    pub fn new(prec: usize) -> Self {
        Self { prec }
    }
}

/// A closed interval `[lo, hi]` certified to contain the exact value.
#[derive(Debug, Clone)]
pub struct Interval {
    lo: BigFloat,
    hi: BigFloat,
}

impl Interval {
    pub fn point(x: BigFloat) -> Self {
        debug_assert!(!x.is_nan());
        Self { lo: x.clone(), hi: x }
    }

    pub fn new(lo: BigFloat, hi: BigFloat) -> Self {
        debug_assert!(!lo.is_nan() && !hi.is_nan());
        debug_assert!(matches!(lo.cmp(&hi), Some(c) if c <= 0) || lo.is_inf_neg() || hi.is_inf_pos());
        Self { lo, hi }
    }

    pub fn zero() -> Self {
        Self::point(BigFloat::from_i8(0, 64))
    }

    pub fn one() -> Self {
        Self::point(BigFloat::from_i8(1, 64))
    }

    pub fn from_i64(v: i64, prec: usize) -> Self {
        Self::point(BigFloat::from_i64(v, prec.max(64)))
    }

    /// Exact conversion of a big integer (no rounding).
    pub fn from_bigint(v: &BigInt) -> Self {
        Self::point(bigint_to_bigfloat(v))
    }

    /// Directed-rounded enclosure of an exact rational.
    pub fn from_rational(q: &BigRational, prec: usize) -> Self {
        let num = bigint_to_bigfloat(q.numer());
        let den = bigint_to_bigfloat(q.denom());
        Self {
            lo: num.div(&den, prec, DOWN),
            hi: num.div(&den, prec, UP),
        }
    }

    pub fn lo(&self) -> &BigFloat {
        &self.lo
    }

    pub fn hi(&self) -> &BigFloat {
        &self.hi
    }

    pub fn hull(&self, other: &Self) -> Self {
        Self {
            lo: self.lo.min(&other.lo),
            hi: self.hi.max(&other.hi),
        }
    }

    pub fn contains_zero(&self) -> bool {
        !self.is_positive() && !self.is_negative()
    }

    /// Certified `> 0`.
    pub fn is_positive(&self) -> bool {
        matches!(self.lo.sign(), Some(Sign::Pos)) && !self.lo.is_zero()
    }

    /// Certified `< 0`.
    pub fn is_negative(&self) -> bool {
        matches!(self.hi.sign(), Some(Sign::Neg)) && !self.hi.is_zero()
    }

    /// Certified sign: -1, 0 (straddles), +1.
    pub fn sign(&self) -> i8 {
        if self.is_positive() {
            1
        } else if self.is_negative() {
            -1
        } else {
            0
        }
    }

    pub fn intersects(&self, other: &Self) -> bool {
        let a = self.lo.cmp(&other.hi);
        let b = other.lo.cmp(&self.hi);
        matches!(a, Some(c) if c <= 0) && matches!(b, Some(c) if c <= 0)
    }

    pub fn contains(&self, other: &Self) -> bool {
        matches!(self.lo.cmp(&other.lo), Some(c) if c <= 0)
            && matches!(other.hi.cmp(&self.hi), Some(c) if c <= 0)
    }

    pub fn contains_value(&self, x: &BigFloat) -> bool {
        matches!(self.lo.cmp(x), Some(c) if c <= 0)
            && matches!(x.cmp(&self.hi), Some(c) if c <= 0)
    }

    /// Upper bound on the interval width, rounded up.
    pub fn width(&self, prec: usize) -> BigFloat {
        self.hi.sub(&self.lo, prec, UP)
    }

    /// Midpoint (not an enclosure; plain nearest rounding).
    pub fn mid(&self, prec: usize) -> BigFloat {
        if self.lo.is_inf_neg() {
            return self.hi.clone();
        }
        if self.hi.is_inf_pos() {
            return self.lo.clone();
        }
        let two = BigFloat::from_i8(2, 64);
        self.lo
            .add(&self.hi, prec, RoundingMode::ToEven)
            .div(&two, prec, RoundingMode::ToEven)
    }

    /// Upper bound of |value| over the interval.
    pub fn abs_hi(&self) -> BigFloat {
        self.lo.abs().max(&self.hi.abs())
    }

    /// Lower bound of |value| over the interval (zero if it contains zero).
    pub fn abs_lo(&self) -> BigFloat {
        if self.contains_zero() {
            BigFloat::from_i8(0, 64)
        } else {
            self.lo.abs().min(&self.hi.abs())
        }
    }

    /// Point interval at the upper bound of |value|.
    pub fn abs_hi_interval(&self, _prec: usize) -> Interval {
        Interval::point(self.abs_hi())
    }

    /// Certified: |self| stays strictly above every value of `other`.
    pub fn abs_lo_exceeds(&self, other: &Interval) -> bool {
        matches!(other.hi().cmp(&self.abs_lo()), Some(c) if c < 0)
    }

    pub fn to_f64(&self) -> f64 {
        bigfloat_to_f64(&self.mid(64))
    }

    /// Relative width: width / max(|lo|, |hi|, 1).
    pub fn rel_width(&self, prec: usize) -> BigFloat {
        let w = self.width(prec);
        let scale = self.abs_hi().max(&BigFloat::from_i8(1, 64));
        w.div(&scale, prec, UP)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

pub fn bigint_to_bigfloat(v: &BigInt) -> BigFloat {
    use astro_float::{Word, WORD_BIT_SIZE};
    let (sign, digits64) = v.to_u64_digits();
    if digits64.is_empty() {
        return BigFloat::from_i8(0, 64);
    }
    let s = match sign {
        num_bigint::Sign::Minus => Sign::Neg,
        _ => Sign::Pos,
    };
    // native word layout differs across targets
    let words: Vec<Word> = if WORD_BIT_SIZE == 64 {
        digits64.iter().map(|&d| d as Word).collect()
    } else {
        let mut out = Vec::with_capacity(digits64.len() * 2);
        for d in &digits64 {
            out.push((*d & 0xffff_ffff) as Word);
            out.push((*d >> 32) as Word);
        }
        out
    };
    // from_words treats the mantissa as a binary fraction scaled by 2^e
    let e = (words.len() * WORD_BIT_SIZE) as i32;
    BigFloat::from_words(&words, s, e)
}

pub fn bigfloat_to_f64(x: &BigFloat) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x.is_inf_pos() {
        return f64::INFINITY;
    }
    if x.is_inf_neg() {
        return f64::NEG_INFINITY;
    }
    if x.is_zero() {
        return 0.0;
    }
    let Some((words, _n, sign, e, _)) = x.as_raw_parts() else {
        return f64::NAN;
    };
    // top 64 mantissa bits as an integer, scaled back by their bit offset
    let wb = astro_float::WORD_BIT_SIZE;
    let mut acc: u64 = 0;
    let mut consumed = 0usize;
    for w in words.iter().rev().take((64 / wb).max(1)) {
        // Word is u32 on 32-bit targets
        let w64 = u64::from(*w);
        acc = if consumed == 0 {
            w64
        } else {
            acc.checked_shl(wb as u32).unwrap_or(0) | w64
        };
        consumed += wb;
    }
    let mag = acc as f64 * (e as f64 - consumed as f64).exp2();
    if sign == Sign::Neg {
        -mag
    } else {
        mag
    }
}

impl IvCtx {
    pub fn add(&mut self, a: &Interval, b: &Interval) -> Interval {
        Interval {
            lo: a.lo.add(&b.lo, self.prec, DOWN),
            hi: a.hi.add(&b.hi, self.prec, UP),
        }
    }

    pub fn sub(&mut self, a: &Interval, b: &Interval) -> Interval {
        Interval {
            lo: a.lo.sub(&b.hi, self.prec, DOWN),
            hi: a.hi.sub(&b.lo, self.prec, UP),
        }
    }

    pub fn neg(&mut self, a: &Interval) -> Interval {
        Interval {
            lo: a.hi.neg(),
            hi: a.lo.neg(),
        }
    }

    pub fn mul(&mut self, a: &Interval, b: &Interval) -> Interval {
        let cands_lo = [
            dmul(&a.lo, &b.lo, self.prec, DOWN),
            dmul(&a.lo, &b.hi, self.prec, DOWN),
            dmul(&a.hi, &b.lo, self.prec, DOWN),
            dmul(&a.hi, &b.hi, self.prec, DOWN),
        ];
        let cands_hi = [
            dmul(&a.lo, &b.lo, self.prec, UP),
            dmul(&a.lo, &b.hi, self.prec, UP),
            dmul(&a.hi, &b.lo, self.prec, UP),
            dmul(&a.hi, &b.hi, self.prec, UP),
        ];
        let mut lo = cands_lo[0].clone();
        for c in &cands_lo[1..] {
            lo = lo.min(c);
        }
        let mut hi = cands_hi[0].clone();
        for c in &cands_hi[1..] {
            hi = hi.max(c);
        }
        Interval { lo, hi }
    }

    /// Division; the divisor must not contain zero.
    pub fn div(&mut self, a: &Interval, b: &Interval) -> Interval {
        assert!(
            !b.contains_zero(),
            "interval division by zero-straddling divisor"
        );
        let cands_lo = [
            a.lo.div(&b.lo, self.prec, DOWN),
            a.lo.div(&b.hi, self.prec, DOWN),
            a.hi.div(&b.lo, self.prec, DOWN),
            a.hi.div(&b.hi, self.prec, DOWN),
        ];
        let cands_hi = [
            a.lo.div(&b.lo, self.prec, UP),
            a.lo.div(&b.hi, self.prec, UP),
            a.hi.div(&b.lo, self.prec, UP),
            a.hi.div(&b.hi, self.prec, UP),
        ];
        let mut lo = cands_lo[0].clone();
        for c in &cands_lo[1..] {
            lo = lo.min(c);
        }
        let mut hi = cands_hi[0].clone();
        for c in &cands_hi[1..] {
            hi = hi.max(c);
        }
        Interval { lo, hi }
    }

    pub fn add_i64(&mut self, a: &Interval, v: i64) -> Interval {
        let b = Interval::from_i64(v, self.prec);
        self.add(a, &b)
    }

    pub fn mul_i64(&mut self, a: &Interval, v: i64) -> Interval {
        let b = Interval::from_i64(v, self.prec);
        self.mul(a, &b)
    }

    /// Certified enclosure of `e^a` with graceful under/overflow:
    /// arguments beyond the exponent range clamp to `[0, min_positive]` or
    /// `[huge, +inf]` as appropriate.
    pub fn exp(&mut self, a: &Interval) -> Interval {
        let lo = self.exp_bound(&a.lo, DOWN);
        let hi = self.exp_bound(&a.hi, UP);
        Interval { lo, hi }
    }

    fn exp_bound(&mut self, arg: &BigFloat, rm: RoundingMode) -> BigFloat {
        let p = self.prec;
        if arg.is_inf_neg() {
            return match rm {
                UP => BigFloat::min_positive(p),
                _ => BigFloat::from_i8(0, p),
            };
        }
        if arg.is_inf_pos() {
            return match rm {
                UP => astro_float::INF_POS,
                _ => huge_finite(p),
            };
        }
        let oversized = arg.exponent().is_some_and(|e| e > EXP_ARG_EXPONENT_LIMIT);
        if oversized {
            return if matches!(arg.sign(), Some(Sign::Neg)) {
                match rm {
                    UP => BigFloat::min_positive(p),
                    _ => BigFloat::from_i8(0, p),
                }
            } else {
                match rm {
                    UP => astro_float::INF_POS,
                    _ => huge_finite(p),
                }
            };
        }
        let raw = with_consts(|cc| arg.exp(p, rm, cc));
        
        match rm {
            UP => {
                let w = widen_up(&raw, p);
                if w.is_zero() || w.is_nan() {
                    BigFloat::min_positive(p)
                } else {
                    w
                }
            }
            _ => {
                let w = widen_down(&raw, p);
                if w.is_nan() || matches!(w.sign(), Some(Sign::Neg)) {
                    BigFloat::from_i8(0, p)
                } else {
                    w
                }
            }
        }
    }

    /// Enclosure of `cos a` for a narrow interval, via endpoint evaluation
    /// widened by the interval width (|cos'| <= 1), clamped to [-1, 1].
    pub fn cos(&mut self, a: &Interval) -> Interval {
        let p = self.prec;
        let w = a.width(p);
        let c_lo = with_consts(|cc| a.lo.cos(p, DOWN, cc));
        let c_hi = with_consts(|cc| a.lo.cos(p, UP, cc));
        let lo = widen_down(&c_lo.sub(&w, p, DOWN), p);
        let hi = widen_up(&c_hi.add(&w, p, UP), p);
        let one = BigFloat::from_i8(1, p);
        let neg_one = BigFloat::from_i8(-1, p);
        Interval {
            lo: lo.max(&neg_one),
            hi: hi.min(&one),
        }
    }

    pub fn pi(&mut self) -> Interval {
        let lo = with_consts(|cc| cc.pi(self.prec, DOWN));
        let hi = with_consts(|cc| cc.pi(self.prec, UP));
        Interval {
            lo: widen_down(&lo, self.prec),
            hi: widen_up(&hi, self.prec),
        }
    }

    pub fn from_rational(&mut self, q: &BigRational) -> Interval {
        Interval::from_rational(q, self.prec)
    }
}

fn huge_finite(p: usize) -> BigFloat {
    // 2^(2^30): far above any finite value this crate certifies exactly,
    // far below the exponent ceiling.
    let mut x = BigFloat::from_i8(1, p);
    x.set_exponent(1 << 30);
    x
}

fn dmul(a: &BigFloat, b: &BigFloat, p: usize, rm: RoundingMode) -> BigFloat {
    // 0 * inf arises when an underflowed-to-zero bound meets an overflowed
    // bound; the true factors are finite, so zero is the sound candidate.
    if a.is_zero() || b.is_zero() {
        return BigFloat::from_i8(0, p);
    }
    a.mul(b, p, rm)
}

/// One-step outward nudge by 2 ulp; guards against any slack in the
/// library's final rounding of transcendental functions.
fn widen_up(x: &BigFloat, p: usize) -> BigFloat {
    if x.is_inf() || x.is_nan() {
        return x.clone();
    }
    let eps = ulp_like(x, p);
    x.add(&eps, p, UP)
}

fn widen_down(x: &BigFloat, p: usize) -> BigFloat {
    if x.is_inf() || x.is_nan() {
        return x.clone();
    }
    let eps = ulp_like(x, p);
    x.sub(&eps, p, DOWN)
}

fn ulp_like(x: &BigFloat, p: usize) -> BigFloat {
    if x.is_zero() {
        return BigFloat::min_positive(p);
    }
    let e = x.exponent().unwrap_or(0);
    let shift = e as i64 - p as i64 + 2;
    if shift < (i32::MIN as i64) + 70 {
        return BigFloat::min_positive(p);
    }
    let mut eps = BigFloat::from_i8(1, p);
    eps.set_exponent(shift as i32);
    eps
}

/// Runs `f` along the precision ladder until it reports success, then
/// returns the value; errors out at the ceiling.
pub fn escalate<T>(
    policy: &PrecisionPolicy,
    mut f: impl FnMut(&mut IvCtx) -> Option<T>,
) -> Result<T, IntervalError> {
    for p in policy.ladder() {
        let mut ctx = IvCtx::new(p);
        if let Some(v) = f(&mut ctx) {
            return Ok(v);
        }
    }
    Err(IntervalError::PrecisionExhausted {
        ceiling_bits: policy.ceiling_bits,
    })
}

/// Decimal string of a rational, exact when the denominator is 2^a 5^b,
/// otherwise rounded to `digits` fractional digits (away-from-zero last
/// digit bias never matters for display purposes here).
pub fn rational_to_decimal(q: &BigRational, digits: usize) -> String {
    use num_traits::Zero;
    let neg = q.is_negative();
    let qa = q.abs();
    let int = qa.to_integer();
    let mut frac = &qa - BigRational::from(int.clone());
    let mut out = String::new();
    if neg && !(int.is_zero() && frac.is_zero()) {
        out.push('-');
    }
    out.push_str(&int.to_string());
    if frac.is_zero() {
        return out;
    }
    out.push('.');
    let ten = BigInt::from(10);
    let mut produced = 0usize;
    while !frac.is_zero() && produced < digits {
        frac *= BigRational::from(ten.clone());
        let d = frac.to_integer();
        out.push_str(&d.to_string());
        frac -= BigRational::from(d);
        produced += 1;
    }
    out
}
