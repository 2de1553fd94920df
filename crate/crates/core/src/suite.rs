//! The acceptance property suite: twelve numbered checks covering the chain,
//! the roots, the certified evaluators, the period-doubled multiplicity, the
//! expansion coefficients, and the atlas census. The `check` command of the
//! CLI runs all of them; the acceptance test target asserts them one by one.

use crate::continuation::{self, build_atlas, AtlasConfig};
use crate::interval::{bigfloat_to_f64, Interval, IvCtx, PrecisionPolicy};
use crate::poincare::{
    eval_dphi_dx, eval_phi_adaptive, fixed_points, iterate_monodromy, poincare_map,
    FixedPointConfig,
};
use crate::polychain::{build_chain_recurrence, build_chain_via_eprime, check_structure, Chain};
use crate::prng::Prng;
use crate::roots::{self, check_interlacing, expected_root_count, RootTable};
use crate::twoperiodic::solve_2t;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::time::Instant;

/// First thirteen chain members, exact coefficients lowest power first.
pub const TABLE_13: [&[i64]; 13] = [
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

#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub seed: u64,
    pub policy: PrecisionPolicy,
    /// Parameter reach for the atlas checks.
    pub a_max: BigRational,
    pub workers: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seed: 0x5eed_cafe,
            policy: PrecisionPolicy::default(),
            a_max: BigRational::from(BigInt::from(3)),
            workers: 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub id: usize,
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
    pub millis: u128,
}

impl CheckResult {
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} [{}] {} ({} ms) {}",
            self.id,
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.millis,
            self.detail
        )
    }
}

fn finish(
    id: usize,
    name: &'static str,
    t0: Instant,
    budget_ms: Option<u128>,
    pass: bool,
    mut detail: String,
) -> CheckResult {
    let millis = t0.elapsed().as_millis();
    let mut pass = pass;
    if let Some(budget) = budget_ms {
        if millis > budget {
            pass = false;
            detail.push_str(&format!(" [over budget: {millis} > {budget} ms]"));
        }
    }
    CheckResult {
        id,
        name,
        pass,
        detail,
        millis,
    }
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn pow10(k: u32) -> BigInt {
    BigInt::from(10u32).pow(k)
}

/// floor(sqrt(k) * 10^digits) / 10^digits by integer Newton iteration:
/// the implementation-independent reference for the quadratic surds.
pub fn sqrt_reference(k: u64, digits: u32) -> BigRational {
    let scaled: BigInt = BigInt::from(k) * pow10(2 * digits);
    BigRational::new(scaled.sqrt(), pow10(digits))
}

/// 1. The thirteen-member fixture reproduces every coefficient exactly.
pub fn criterion_1(_cfg: &SuiteConfig) -> CheckResult {
    let t0 = Instant::now();
    let chain = build_chain_recurrence(13);
    let mut pass = true;
    let mut detail = String::new();
    for (i, expect) in TABLE_13.iter().enumerate() {
        let got = &chain[i];
        let want: Vec<BigInt> = expect.iter().map(|&c| BigInt::from(c)).collect();
        if got.coeffs() != want.as_slice() {
            pass = false;
            detail = format!("mismatch at member {}", i + 1);
            break;
        }
    }
    if pass {
        detail = "all 13 members coefficient-exact".into();
    }
    finish(1, "thirteen-member fixture", t0, Some(1000), pass, detail)
}

/// 2. Both construction routes agree exactly up to order 30.
pub fn criterion_2(_cfg: &SuiteConfig) -> CheckResult {
    let t0 = Instant::now();
    let a = build_chain_recurrence(30);
    let b = build_chain_via_eprime(30);
    let pass = a == b;
    finish(
        2,
        "dual construction identity",
        t0,
        Some(5000),
        pass,
        format!("{} members compared", a.len()),
    )
}

/// 3. Structural identities hold with zero violations up to order 30.
pub fn criterion_3(_cfg: &SuiteConfig) -> CheckResult {
    let t0 = Instant::now();
    let chain = Chain::build(30);
    let report = check_structure(&chain);
    let pass = report.all_pass();
    let detail = if pass {
        format!("{} members, 0 violations", report.rows.len())
    } else {
        format!("{} violations: {:?}", report.violations.len(), report.violations)
    };
    finish(3, "structural suite", t0, Some(10_000), pass, detail)
}

/// 4. Root counts, localization in (0, 2], and interlacing up to order 30.
pub fn criterion_4(_cfg: &SuiteConfig) -> CheckResult {
    let t0 = Instant::now();
    let chain = Chain::build(30);
    let mut pass = true;
    let mut detail = String::new();
    match RootTable::build(&chain, 30) {
        Ok(mut table) => {
            let two = rat(2, 1);
            let mut total = 0usize;
            for n in 2..=30 {
                let row = table.roots(n);
                total += row.len();
                if row.len() != expected_root_count(n) {
                    pass = false;
                    detail = format!("count mismatch at order {n}");
                    break;
                }
                if row
                    .iter()
                    .any(|r| r.lo < BigRational::zero() || r.hi > two)
                {
                    pass = false;
                    detail = format!("localization violated at order {n}");
                    break;
                }
            }
            if pass {
                for n in 2..=30 {
                    match check_interlacing(&mut table, &chain, n) {
                        Ok(rep) if rep.pass => {}
                        Ok(rep) => {
                            pass = false;
                            detail = format!("interlacing failed at {n}: {}", rep.detail);
                            break;
                        }
                        Err(e) => {
                            pass = false;
                            detail = format!("interlacing error at {n}: {e}");
                            break;
                        }
                    }
                }
            }
            if pass {
                detail = format!("{total} roots counted, localized, interlaced");
            }
        }
        Err(e) => {
            pass = false;
            detail = format!("isolation failed: {e}");
        }
    }
    finish(4, "root counts and interlacing", t0, Some(60_000), pass, detail)
}

/// 5. Refined intervals for the first irrational roots contain the
///    50-digit integer-arithmetic references at width 1e-30.
pub fn criterion_5(_cfg: &SuiteConfig) -> CheckResult {
    let t0 = Instant::now();
    let chain = Chain::build(4);
    let width = BigRational::new(BigInt::one(), pow10(30));
    let mut pass = true;
    let mut detail = String::new();
    let s3 = sqrt_reference(3, 50);
    let s2 = sqrt_reference(2, 50);
    let r3 = roots::isolate_positive_roots(&chain, 3).unwrap();
    let r3r = roots::refine(&r3[0], chain.poly(3), &width);
    if !(r3r.lo <= s3 && s3 <= r3r.hi && r3r.width() <= width) {
        pass = false;
        detail.push_str("sqrt3 containment failed; ");
    }
    let r4 = roots::isolate_positive_roots(&chain, 4).unwrap();
    let r4r = roots::refine(&r4[0], chain.poly(4), &width);
    if !(r4r.lo <= s2 && s2 <= r4r.hi && r4r.width() <= width) {
        pass = false;
        detail.push_str("sqrt2 containment failed; ");
    }
    if !(r4[1].is_exact && r4[1].lo == rat(2, 1)) {
        pass = false;
        detail.push_str("exact 2 missing; ");
    }
    if pass {
        detail = "sqrt3, sqrt2, 2 certified to 1e-30".into();
    }
    finish(5, "known roots at 1e-30", t0, None, pass, detail)
}

/// 6. The stated pathology magnitude: the enclosure of |phi_5(5, 1/10)|
///    must lie within [1e28, 1e32].
pub fn criterion_6(cfg: &SuiteConfig) -> CheckResult {
    let t0 = Instant::now();
    let v = eval_phi_adaptive(&cfg.policy, 5, &rat(5, 1), &rat(1, 10), 40);
    let (pass, detail) = match v {
        Ok(iv) => {
            let lo = bigfloat_to_f64(&iv.abs_lo());
            let hi = bigfloat_to_f64(&iv.abs_hi());
            let pass = lo >= 1.0e28 && hi <= 1.0e32;
            (
                pass,
                format!("certified |phi_5(5, 0.1)| in [{lo:.6e}, {hi:.6e}]; required within [1e28, 1e32]"),
            )
        }
        Err(e) => (false, format!("evaluation failed: {e}")),
    };
    finish(6, "pathology magnitude window", t0, None, pass, detail)
}

/// 7. The derivative evaluator at the trivial state encloses the exact
///    chain value for 50 random parameters and every order up to 20.
pub fn criterion_7(cfg: &SuiteConfig) -> CheckResult {
    let t0 = Instant::now();
    let chain = Chain::build(20);
    let mut rng = Prng::new(cfg.seed ^ 0x7);
    let mut ctx = IvCtx::new(192);
    let mut pass = true;
    let mut detail = String::new();
    let mut checks = 0usize;
    'outer: for _ in 0..50 {
        let a = rng.dyadic_in((1, 100), (4, 1), 16);
        for n in 1..=20usize {
            let exact = chain.eval(n, &a);
            let ai = ctx.from_rational(&a);
            let one = Interval::one();
            let d = eval_dphi_dx(&mut ctx, n, &ai, &one);
            let exact_iv = Interval::from_rational(&exact, 256);
            checks += 1;
            if !d.contains(&exact_iv) {
                pass = false;
                detail = format!("enclosure miss at n={n}, A={a}");
                break 'outer;
            }
        }
    }
    if pass {
        detail = format!("{checks} containments verified");
    }
    finish(7, "linearization identity", t0, None, pass, detail)
}

/// 8. Map-versus-oracle equivalence on 100 random draws, plus the
///    half-orbit symmetry at every certified fixed point for orders up to 6.
pub fn criterion_8(cfg: &SuiteConfig) -> CheckResult {
    let t0 = Instant::now();
    let mut rng = Prng::new(cfg.seed ^ 0x8);
    let mut pass = true;
    let mut detail = String::new();
    'outer: for k in 0..100 {
        let n = 1 + (rng.below(12) as usize);
        let a = rng.dyadic_in((1, 100), (4, 1), 14);
        let x = rng.dyadic_in((1, 100), (2, 1), 14);
        let mut ctx = IvCtx::new(192);
        let ai = ctx.from_rational(&a);
        let xi = ctx.from_rational(&x);
        let direct = poincare_map(&mut ctx, n, &ai, &xi);
        let iter = iterate_monodromy(&mut ctx, n, &ai, &ai, &xi);
        let last = iter.last().unwrap();
        if !(direct.u.intersects(&last.u) && direct.v.intersects(&last.v)) {
            pass = false;
            detail = format!("oracle mismatch at draw {k}: n={n} A={a} x={x}");
            break 'outer;
        }
    }
    let mut symmetry_checks = 0usize;
    if pass {
        let chain = Chain::build(6);
        let tol = BigRational::new(BigInt::one(), BigInt::one() << 44);
        'sym: for n in 2..=6usize {
            let a = rat(5, 2);
            let scan = fixed_points(&chain, &cfg.policy, n, &a, &tol, &FixedPointConfig::default());
            if !scan.unresolved.is_empty() {
                pass = false;
                detail = format!("unresolved scan regions at n={n}");
                break;
            }
            for pt in scan.points.iter().filter(|p| !p.trivial) {
                let mut ctx = IvCtx::new(256);
                let ai = ctx.from_rational(&a);
                let lo = ctx.from_rational(&pt.lo);
                let hi = ctx.from_rational(&pt.hi);
                let x = lo.hull(&hi);
                let states = iterate_monodromy(&mut ctx, n, &ai, &ai, &x);
                for h in 1..n {
                    symmetry_checks += 1;
                    if !states[h - 1].u.intersects(&states[n - h - 1].v) {
                        pass = false;
                        detail = format!("symmetry miss at n={n}, h={h}");
                        break 'sym;
                    }
                }
            }
        }
    }
    if pass {
        detail = format!("100 oracle draws, {symmetry_checks} symmetry intersections");
    }
    finish(8, "oracle equivalence and symmetry", t0, None, pass, detail)
}

/// 9. Exact period-doubled multiplicity on 200 + 200 random parameter pairs.
pub fn criterion_9(cfg: &SuiteConfig) -> CheckResult {
    let t0 = Instant::now();
    let mut rng = Prng::new(cfg.seed ^ 0x9);
    let tol = BigRational::new(BigInt::one(), BigInt::one() << 40);
    let four = rat(4, 1);
    let mut pass = true;
    let mut detail = String::new();
    for k in 0..400usize {
        let supercritical = k < 200;
        let a = rng.dyadic_in((1, 2), (4, 1), 12);
        let f = if supercritical {
            rng.dyadic_in((101, 100), (2, 1), 12)
        } else {
            rng.dyadic_in((1, 10), (99, 100), 12)
        };
        let b = &f * &four / &a;
        let expected = if supercritical { 2 } else { 0 };
        match solve_2t(&cfg.policy, &a, &b, &tol) {
            Ok(z) if z.zeros.len() == expected => {
                if supercritical && !z.zeros.iter().all(|zz| zz.dphi_positive) {
                    pass = false;
                    detail = format!("transversality failed at A={a} B={b}");
                    break;
                }
            }
            Ok(z) => {
                pass = false;
                detail = format!(
                    "multiplicity {} != {expected} at A={a} B={b}",
                    z.zeros.len()
                );
                break;
            }
            Err(e) => {
                pass = false;
                detail = format!("solver error at A={a} B={b}: {e}");
                break;
            }
        }
    }
    if pass {
        detail = "200 supercritical pairs with exactly two transversal zeros, 200 subcritical with none".into();
    }
    finish(9, "exact multiplicity", t0, Some(120_000), pass, detail)
}

/// 10. Expansion coefficients against the stated reference constants
///     (relative error 1e-6), with A1 enclosing zero where stated.
pub fn criterion_10(cfg: &SuiteConfig) -> CheckResult {
    let t0 = Instant::now();
    let chain = Chain::build(4);
    let mut pass = true;
    let mut notes: Vec<String> = Vec::new();
    let rel_tol = BigRational::new(BigInt::one(), pow10(6));
    let check_rel = |value: &BigRational, target: &BigRational| -> bool {
        (value - target).abs() <= target.abs() * &rel_tol
    };

    // order 2, root 2: stated A2 = 4/3
    let r2 = roots::isolate_positive_roots(&chain, 2).unwrap();
    match continuation::local_expansion(&chain, &cfg.policy, 2, &r2[0]) {
        Ok(exp) => {
            if !exp.a1_encloses_zero() {
                pass = false;
                notes.push("order 2: A1 does not enclose 0".into());
            }
            let stated = rat(4, 3);
            if !check_rel(&exp.a2.0, &stated) {
                pass = false;
                notes.push(format!(
                    "order 2: A2 computed {:.7}, stated 4/3 (~1.3333333)",
                    exp.a2.0.to_f64().unwrap_or(f64::NAN)
                ));
            }
        }
        Err(e) => {
            pass = false;
            notes.push(format!("order 2 expansion failed: {e}"));
        }
    }

    // order 3, root sqrt3: stated A1 = (sqrt3 - 3)/4
    let r3 = roots::isolate_positive_roots(&chain, 3).unwrap();
    match continuation::local_expansion(&chain, &cfg.policy, 3, &r3[0]) {
        Ok(exp) => {
            let target = (sqrt_reference(3, 40) - rat(3, 1)) / rat(4, 1);
            if check_rel(&exp.a1.0, &target) {
                notes.push("order 3: A1 matches (sqrt3-3)/4".into());
            } else {
                pass = false;
                notes.push(format!(
                    "order 3: A1 computed {:.7}, stated {:.7}",
                    exp.a1.0.to_f64().unwrap_or(f64::NAN),
                    target.to_f64().unwrap_or(f64::NAN)
                ));
            }
        }
        Err(e) => {
            pass = false;
            notes.push(format!("order 3 expansion failed: {e}"));
        }
    }

    // order 4, root sqrt2: stated A2 = -2(5 + 4 sqrt2)/3
    let r4 = roots::isolate_positive_roots(&chain, 4).unwrap();
    match continuation::local_expansion(&chain, &cfg.policy, 4, &r4[0]) {
        Ok(exp) => {
            if !exp.a1_encloses_zero() {
                pass = false;
                notes.push("order 4: A1 does not enclose 0".into());
            }
            let stated = rat(-2, 3) * (rat(5, 1) + rat(4, 1) * sqrt_reference(2, 40));
            if !check_rel(&exp.a2.0, &stated) {
                pass = false;
                notes.push(format!(
                    "order 4: A2 computed {:.7}, stated {:.7}",
                    exp.a2.0.to_f64().unwrap_or(f64::NAN),
                    stated.to_f64().unwrap_or(f64::NAN)
                ));
            }
        }
        Err(e) => {
            pass = false;
            notes.push(format!("order 4 expansion failed: {e}"));
        }
    }
    finish(
        10,
        "expansion coefficients",
        t0,
        None,
        pass,
        notes.join("; "),
    )
}

/// 11. Atlas census for orders up to 8 with the stated ownerships, and
///     the branch invariants on every traced branch.
pub fn criterion_11(cfg: &SuiteConfig) -> CheckResult {
    let t0 = Instant::now();
    let chain = Chain::build(8);
    let mut pass = true;
    let mut detail = String::new();
    match RootTable::build(&chain, 8) {
        Ok(table) => {
            let mut acfg = AtlasConfig::new(8, cfg.a_max.clone());
            acfg.policy = cfg.policy;
            acfg.workers = cfg.workers;
            let atlas = build_atlas(&chain, &table, &acfg);
            let census = atlas.census(&table);
            let totals: Vec<usize> = census.iter().map(|c| c.total_components).collect();
            if totals != vec![1, 1, 1, 2, 2, 3, 3, 4] {
                pass = false;
                detail = format!("census {totals:?} != [1,1,1,2,2,3,3,4]");
            }
            let owners_of = |order: usize| -> Vec<usize> {
                let mut v: Vec<usize> = atlas
                    .inherited
                    .iter()
                    .filter(|ir| ir.root.order == order)
                    .map(|ir| ir.owner.order)
                    .collect();
                v.sort_unstable();
                v
            };
            if pass
                && (owners_of(4) != vec![2]
                    || owners_of(5) != Vec::<usize>::new()
                    || owners_of(6) != vec![2, 3]
                    || owners_of(7) != Vec::<usize>::new()
                    || owners_of(8) != vec![2, 4])
            {
                pass = false;
                detail = format!(
                    "ownerships: 4<-{:?} 6<-{:?} 8<-{:?}",
                    owners_of(4),
                    owners_of(6),
                    owners_of(8)
                );
            }
            if pass {
                for c in &atlas.components {
                    for (b, tag) in [(&c.plus, "+"), (&c.minus, "-")] {
                        if !b.reached_a_max || b.stall.is_some() || b.side_violations > 0 {
                            pass = false;
                            detail = format!(
                                "branch order {} root {} side {tag}: reached={} stall={:?} violations={}",
                                c.seed.order,
                                c.seed.index,
                                b.reached_a_max,
                                b.stall,
                                b.side_violations
                            );
                            break;
                        }
                    }
                }
            }
            if pass && !continuation::components_disjoint(&atlas, 1e-9) {
                pass = false;
                detail = "components share a sample".into();
            }
            if pass {
                let branches = atlas.components.len() * 2;
                let samples: usize = atlas
                    .components
                    .iter()
                    .map(|c| c.plus.samples.len() + c.minus.samples.len())
                    .sum();
                detail = format!(
                    "census and ownerships exact; {branches} branches, {samples} certified samples, all reached A = {}",
                    cfg.a_max
                );
            }
        }
        Err(e) => {
            pass = false;
            detail = format!("root table failed: {e}");
        }
    }
    finish(11, "atlas census and branch invariants", t0, Some(600_000), pass, detail)
}

/// 12. The order query at A = 2.5 answers 2.
pub fn criterion_12(cfg: &SuiteConfig) -> CheckResult {
    let t0 = Instant::now();
    let chain = Chain::build(2);
    let table = RootTable::build(&chain, 2).unwrap();
    let mut acfg = AtlasConfig::new(2, rat(3, 1));
    acfg.policy = cfg.policy;
    let atlas = build_atlas(&chain, &table, &acfg);
    let got = atlas.min_order(&rat(5, 2));
    let pass = matches!(got, Ok(2));
    finish(
        12,
        "minimal order at A = 2.5",
        t0,
        None,
        pass,
        format!("min_order(2.5) = {got:?}"),
    )
}

/// Runs the full numbered suite in order.
pub fn run_all(cfg: &SuiteConfig) -> Vec<CheckResult> {
    vec![
        criterion_1(cfg),
        criterion_2(cfg),
        criterion_3(cfg),
        criterion_4(cfg),
        criterion_5(cfg),
        criterion_6(cfg),
        criterion_7(cfg),
        criterion_8(cfg),
        criterion_9(cfg),
        criterion_10(cfg),
        criterion_11(cfg),
        criterion_12(cfg),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fast_criteria_pass() {
        let cfg = SuiteConfig::default();
        for result in [
            criterion_1(&cfg),
            criterion_2(&cfg),
            criterion_3(&cfg),
            criterion_5(&cfg),
            criterion_12(&cfg),
        ] {
            assert!(result.pass, "{}", result.line());
        }
    }

    #[test]
    fn sqrt_reference_digits() {
        let s2 = sqrt_reference(2, 50);
        // leading digits of sqrt(2)
        let txt = crate::interval::rational_to_decimal(&s2, 20);
        assert!(txt.starts_with("1.4142135623730950488"));
    }
}
