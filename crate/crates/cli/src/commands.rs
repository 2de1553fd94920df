//! Command handlers: each produces its artifact files under the output
//! directory and returns the process exit code.

use crate::{FormatChoice, RunConfig, SideArg};
use anyhow::{Context, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;
use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use subharmonics::continuation::{self, build_atlas, AtlasConfig, Branch, Side, TraceConfig};
use subharmonics::interval::rational_to_decimal;
use subharmonics::poincare::{fixed_points, FixedPointConfig};
use subharmonics::polychain::{check_structure, Chain};
use subharmonics::roots::{self, check_interlacing, RootTable};
use subharmonics::suite::{run_all, SuiteConfig};
use subharmonics::twoperiodic::{pitchfork_data, solve_2t, trace_2t_curve};
use subharmonics::svg;

fn ensure_out(cfg: &RunConfig) -> Result<()> {
    fs::create_dir_all(&cfg.out)
        .with_context(|| format!("creating output directory {}", cfg.out.display()))
}

fn write_artifact(cfg: &RunConfig, name: &str, contents: &str) -> Result<PathBuf> {
    let path = cfg.out.join(name);
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(path)
}

pub fn write_manifest(cfg: &RunConfig, command: &str, wall: std::time::Duration) -> Result<()> {
    ensure_out(cfg)?;
    let manifest = format!(
        "command={command}\nversion={}\n{}wall_ms={}\n",
        env!("CARGO_PKG_VERSION"),
        cfg.echo(),
        wall.as_millis()
    );
    fs::write(cfg.out.join("manifest.txt"), manifest)?;
    Ok(())
}

/// Digits used when rendering a rational bound at tolerance `width`.
fn digits_for(width: &BigRational) -> usize {
    use num_traits::ToPrimitive;
    let w = width.to_f64().unwrap_or(1e-12);
    ((-w.log10()).ceil() as usize + 2).clamp(8, 80)
}

pub fn cmd_chain(cfg: &RunConfig, n_max: usize, check: bool) -> Result<i32> {
    ensure_out(cfg)?;
    let chain = Chain::build(n_max);
    if cfg.wants(FormatChoice::Json) {
        let rows: Vec<serde_json::Value> = chain
            .polys()
            .iter()
            .enumerate()
            .map(|(i, p)| {
                serde_json::json!({
                    "n": i + 1,
                    "coeffs": p.coeffs().iter().map(|c| c.to_string()).collect::<Vec<_>>(),
                })
            })
            .collect();
        write_artifact(
            cfg,
            "chain.json",
            &format!("{}\n", serde_json::to_string_pretty(&rows)?),
        )?;
    }
    let report = check_structure(&chain);
    let mut txt = String::new();
    let _ = writeln!(txt, "structure report for orders 1..={n_max}");
    for row in &report.rows {
        let _ = writeln!(
            txt,
            "n={:>3} constant={} degree={} leading={} parity_ok={} p2_divides={:?}",
            row.n,
            row.constant_term,
            row.degree,
            row.leading_coeff,
            row.even_member_or_quotient_is_even,
            row.divisible_by_p2
        );
    }
    if check {
        let _ = writeln!(txt, "divisor grid: p_n | p_kn checked for all kn <= {n_max}");
    }
    for (n, ok) in &report.prime_coefficient_notes {
        let _ = writeln!(
            txt,
            "info: prime order {n}: non-leading coefficients divisible by {n}: {ok}"
        );
    }
    if report.all_pass() {
        let _ = writeln!(txt, "RESULT: all-pass");
    } else {
        for v in &report.violations {
            let _ = writeln!(txt, "VIOLATION n={} {}: {}", v.n, v.check, v.detail);
        }
        let _ = writeln!(txt, "RESULT: {} violations", report.violations.len());
    }
    write_artifact(cfg, "structure_report.txt", &txt)?;
    Ok(if report.all_pass() { 0 } else { 1 })
}

pub fn cmd_roots(
    cfg: &RunConfig,
    n_max: usize,
    width: Option<BigRational>,
    svg_flag: bool,
) -> Result<i32> {
    ensure_out(cfg)?;
    let chain = Chain::build(n_max);
    let mut table = RootTable::build(&chain, n_max)?;
    let width = width.unwrap_or_else(|| cfg.tol.clone());
    for n in 2..=n_max {
        table.refine_row(&chain, n, &width);
    }
    let digits = digits_for(&width);
    if cfg.wants(FormatChoice::Csv) {
        let mut csv = String::from("n,index,lo,hi,is_exact_two\n");
        for n in 2..=n_max {
            for (i, r) in table.roots(n).iter().enumerate() {
                let _ = writeln!(
                    csv,
                    "{n},{i},{},{},{}",
                    rational_to_decimal(&r.lo, digits),
                    rational_to_decimal(&r.hi, digits),
                    r.is_exact && r.lo == BigRational::from(BigInt::from(2))
                );
            }
        }
        write_artifact(cfg, "roots.csv", &csv)?;
    }
    // interlace report plus plain gap statistics of the merged root set
    let mut txt = String::new();
    let mut all_pass = true;
    for n in 2..=n_max {
        match check_interlacing(&mut table, &chain, n) {
            Ok(rep) => {
                let _ = writeln!(txt, "pair ({}, {n}): {} - {}", n - 1, if rep.pass { "pass" } else { "FAIL" }, rep.detail);
                all_pass &= rep.pass;
            }
            Err(e) => {
                let _ = writeln!(txt, "pair ({}, {n}): ERROR {e}", n - 1);
                all_pass = false;
            }
        }
    }
    let mut mids: Vec<BigRational> = (2..=n_max)
        .flat_map(|n| table.roots(n).iter().map(|r| r.mid()))
        .collect();
    mids.sort();
    // roots shared across orders collapse to one abscissa
    let merge_eps = &width * BigRational::from(BigInt::from(4));
    mids.dedup_by(|a, b| (&*a - &*b).abs() <= merge_eps);
    if mids.len() >= 2 {
        let mut min_gap: Option<BigRational> = None;
        let mut max_gap: Option<BigRational> = None;
        for w in mids.windows(2) {
            let gap = &w[1] - &w[0];
            if min_gap.as_ref().is_none_or(|g| &gap < g) {
                min_gap = Some(gap.clone());
            }
            if max_gap.as_ref().is_none_or(|g| &gap > g) {
                max_gap = Some(gap);
            }
        }
        let _ = writeln!(
            txt,
            "gap statistics over {} distinct abscissas: min {}, max {}",
            mids.len(),
            rational_to_decimal(&min_gap.unwrap(), 12),
            rational_to_decimal(&max_gap.unwrap(), 12),
        );
    }
    write_artifact(cfg, "interlace_report.txt", &txt)?;
    if svg_flag || cfg.wants(FormatChoice::Svg) {
        write_artifact(cfg, "roots.svg", &svg::render_root_ladder(&chain, &table))?;
    }
    Ok(if all_pass { 0 } else { 1 })
}

pub fn cmd_fixed_points(cfg: &RunConfig, order: usize, a: &BigRational) -> Result<i32> {
    ensure_out(cfg)?;
    let chain = Chain::build(order.max(2));
    let scan = fixed_points(
        &chain,
        &cfg.policy(),
        order,
        a,
        &cfg.tol,
        &FixedPointConfig::default(),
    );
    let digits = digits_for(&cfg.tol);
    let mut csv = String::from("n,A,x_lo,x_hi,residual_width\n");
    for p in &scan.points {
        let _ = writeln!(
            csv,
            "{order},{},{},{},{:e}",
            rational_to_decimal(a, digits),
            rational_to_decimal(&p.lo, digits),
            rational_to_decimal(&p.hi, digits),
            p.residual_width,
        );
    }
    write_artifact(cfg, "fixed_points.csv", &csv)?;
    println!(
        "{} fixed points at A = {} (degenerate at 1: {})",
        scan.points.len(),
        a,
        scan.degenerate_at_one
    );
    if !scan.unresolved.is_empty() {
        println!("unresolved regions: {}", scan.unresolved.len());
        for (lo, hi) in &scan.unresolved {
            println!(
                "  [{}, {}]",
                rational_to_decimal(lo, 12),
                rational_to_decimal(hi, 12)
            );
        }
        return Ok(1);
    }
    Ok(0)
}

pub fn cmd_two_periodic(
    cfg: &RunConfig,
    a: &BigRational,
    b: Option<&BigRational>,
    b_max: &BigRational,
    steps: usize,
    svg_flag: bool,
) -> Result<i32> {
    ensure_out(cfg)?;
    let policy = cfg.policy();
    let digits = digits_for(&cfg.tol);
    // pitchfork diagnostics at the queried (A, B)
    let b_query = b.cloned().unwrap_or_else(|| a.clone());
    let pf = pitchfork_data(a, &b_query);
    let mut txt = String::new();
    let _ = writeln!(txt, "b_crit={}", rational_to_decimal(&pf.b_crit, 20));
    let _ = writeln!(txt, "dphi_at_1={}", rational_to_decimal(&pf.dphi_at_1, 20));
    let _ = writeln!(
        txt,
        "d2phi_at_1_crit={}",
        rational_to_decimal(&pf.d2phi_at_1_crit, 20)
    );
    let _ = writeln!(
        txt,
        "d3phi_at_1_crit={}",
        rational_to_decimal(&pf.d3phi_at_1_crit, 20)
    );
    match solve_2t(&policy, a, &b_query, &cfg.tol) {
        Ok(z) => {
            let _ = writeln!(txt, "zeros_at_queried_parameters={}", z.zeros.len());
            for zz in &z.zeros {
                let _ = writeln!(
                    txt,
                    "zero lo={} hi={} transversal={}",
                    rational_to_decimal(&zz.lo, digits),
                    rational_to_decimal(&zz.hi, digits),
                    zz.dphi_positive
                );
            }
        }
        Err(e) => {
            let _ = writeln!(txt, "solve_error={e}");
        }
    }
    write_artifact(cfg, "two_periodic.txt", &txt)?;

    let curve = trace_2t_curve(&policy, a, b_max, steps, &cfg.tol);
    if cfg.wants(FormatChoice::Csv) {
        let mut csv = String::from("B,z1_lo,z1_hi,z2_lo,z2_hi\n");
        for s in &curve.samples {
            let _ = writeln!(
                csv,
                "{},{},{},{},{}",
                rational_to_decimal(&s.b, 16),
                rational_to_decimal(&s.lower.lo, digits),
                rational_to_decimal(&s.lower.hi, digits),
                rational_to_decimal(&s.upper.lo, digits),
                rational_to_decimal(&s.upper.hi, digits),
            );
        }
        write_artifact(cfg, "two_periodic_curve.csv", &csv)?;
    }
    if svg_flag || cfg.wants(FormatChoice::Svg) {
        write_artifact(
            cfg,
            "two_periodic_curve.svg",
            &svg::render_two_periodic_curve(&curve),
        )?;
    }
    for (b, why) in &curve.failures {
        println!("curve point failed at B = {b}: {why}");
    }
    Ok(0)
}

fn branch_csv(branch: &Branch) -> String {
    let mut csv = String::from("index,A,x,residual\n");
    for (i, s) in branch.samples.iter().enumerate() {
        let _ = writeln!(
            csv,
            "{i},{},{},{:e}",
            rational_to_decimal(&s.a, 30),
            rational_to_decimal(&s.x, 30),
            s.residual
        );
    }
    csv
}

fn branch_summary(branch: &Branch) -> serde_json::Value {
    serde_json::json!({
        "order": branch.n,
        "side": format!("{:?}", branch.side),
        "seed_lo": rational_to_decimal(&branch.seed_lo, 30),
        "seed_hi": rational_to_decimal(&branch.seed_hi, 30),
        "samples": branch.samples.len(),
        "folds": branch.folds,
        "a_min": rational_to_decimal(&branch.a_min, 30),
        "reached_a_max": branch.reached_a_max,
        "stall": branch.stall,
        "side_violations": branch.side_violations,
    })
}

pub fn cmd_branch(
    cfg: &RunConfig,
    order: usize,
    root_index: usize,
    side: SideArg,
    a_max: &BigRational,
) -> Result<i32> {
    ensure_out(cfg)?;
    let chain = Chain::build(order.max(2));
    let row = roots::isolate_positive_roots(&chain, order)?;
    let Some(root) = row.get(root_index) else {
        anyhow::bail!(
            "order {order} has {} roots; index {root_index} is out of range",
            row.len()
        );
    };
    let side = match side {
        SideArg::Plus => Side::Plus,
        SideArg::Minus => Side::Minus,
    };
    let mut trace = TraceConfig::default();
    trace.prec_bits = trace.prec_bits.max(cfg.precision_bits);
    let branch = continuation::trace_branch(
        &chain,
        &cfg.policy(),
        order,
        root,
        side,
        a_max,
        &trace,
    );
    if cfg.wants(FormatChoice::Csv) {
        write_artifact(cfg, "branch.csv", &branch_csv(&branch))?;
    }
    if cfg.wants(FormatChoice::Json) {
        write_artifact(
            cfg,
            "branch.json",
            &format!("{}\n", serde_json::to_string_pretty(&branch_summary(&branch))?),
        )?;
    }
    println!(
        "{} samples, {} folds, a_min {}, reached {}",
        branch.samples.len(),
        branch.folds.len(),
        rational_to_decimal(&branch.a_min, 12),
        branch.reached_a_max
    );
    Ok(if branch.stall.is_some() { 1 } else { 0 })
}

pub fn cmd_atlas(cfg: &RunConfig, n_max: usize, a_max: &BigRational, svg_flag: bool) -> Result<i32> {
    ensure_out(cfg)?;
    let chain = Chain::build(n_max);
    let table = RootTable::build(&chain, n_max)?;
    let mut acfg = AtlasConfig::new(n_max, a_max.clone());
    acfg.policy = cfg.policy();
    acfg.workers = cfg.workers;
    let atlas = build_atlas(&chain, &table, &acfg);
    let census = atlas.census(&table);

    let mut invariant_violations = 0usize;
    for (n, row) in census.iter().enumerate().skip(1) {
        let expected = roots::expected_root_count(n + 1);
        if row.total_components != expected {
            invariant_violations += 1;
        }
    }
    for c in &atlas.components {
        for b in [&c.plus, &c.minus] {
            invariant_violations += b.side_violations;
        }
    }

    if cfg.wants(FormatChoice::Json) {
        let comps: Vec<serde_json::Value> = atlas
            .components
            .iter()
            .map(|c| {
                serde_json::json!({
                    "order": c.seed.order,
                    "root_index": c.seed.index,
                    "root_lo": rational_to_decimal(&c.root_lo, 30),
                    "root_hi": rational_to_decimal(&c.root_hi, 30),
                    "a_min": rational_to_decimal(&c.a_min(), 30),
                    "plus": branch_summary(&c.plus),
                    "minus": branch_summary(&c.minus),
                })
            })
            .collect();
        let doc = serde_json::json!({
            "n_max": atlas.n_max,
            "a_max": rational_to_decimal(&atlas.a_max, 30),
            "census": census,
            "inherited": atlas.inherited,
            "components": comps,
            "failures": atlas.failures,
        });
        write_artifact(
            cfg,
            "atlas.json",
            &format!("{}\n", serde_json::to_string_pretty(&doc)?),
        )?;
    }
    if cfg.wants(FormatChoice::Csv) {
        for c in &atlas.components {
            for (b, tag) in [(&c.plus, "plus"), (&c.minus, "minus")] {
                write_artifact(
                    cfg,
                    &format!("branch_n{}_r{}_{tag}.csv", c.seed.order, c.seed.index),
                    &branch_csv(b),
                )?;
            }
        }
    }
    let mut summary = String::from("order total new inherited_from\n");
    for row in &census {
        let _ = writeln!(
            summary,
            "{:>5} {:>5} {:>3} {:?}",
            row.order, row.total_components, row.new_components, row.inherited_from
        );
    }
    for f in &atlas.failures {
        let _ = writeln!(summary, "branch failure: {f}");
    }
    let _ = writeln!(summary, "invariant violations: {invariant_violations}");
    write_artifact(cfg, "atlas_summary.txt", &summary)?;
    if svg_flag || cfg.wants(FormatChoice::Svg) {
        write_artifact(cfg, "atlas.svg", &svg::render_atlas(&atlas))?;
    }
    for f in &atlas.failures {
        println!("warning: {f}");
    }
    Ok(if invariant_violations > 0 { 1 } else { 0 })
}

pub fn cmd_check(cfg: &RunConfig) -> Result<i32> {
    ensure_out(cfg)?;
    let suite_cfg = SuiteConfig {
        seed: cfg.seed,
        policy: cfg.policy(),
        a_max: BigRational::from(BigInt::from(3)),
        workers: cfg.workers,
    };
    let results = run_all(&suite_cfg);
    let mut txt = String::new();
    let mut all_pass = true;
    for r in &results {
        println!("{}", r.line());
        let _ = writeln!(txt, "{}", r.line());
        all_pass &= r.pass;
    }
    write_artifact(cfg, "check_report.txt", &txt)?;
    Ok(if all_pass { 0 } else { 1 })
}
