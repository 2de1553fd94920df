//! Browser demo bindings: three interactive renderings backed by the same
//! certified machinery as the CLI — the root ladder, the period-doubled
//! curve, and a small atlas.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::FromPrimitive;
use subharmonics::continuation::{build_atlas, AtlasConfig};
use subharmonics::interval::PrecisionPolicy;
use subharmonics::polychain::Chain;
use subharmonics::roots::RootTable;
use subharmonics::svg;
use subharmonics::twoperiodic::trace_2t_curve;
use wasm_bindgen::prelude::*;

fn rational(v: f64, fallback: i64) -> BigRational {
    BigRational::from_f64(v).unwrap_or_else(|| BigRational::from(BigInt::from(fallback)))
}

/// SVG ladder of the positive bifurcation roots for orders 2..=n_max.
#[wasm_bindgen]
pub fn roots_ladder_svg(n_max: u32) -> Result<String, JsError> {
    let n_max = (n_max as usize).clamp(2, 16);
    let chain = Chain::build(n_max);
    let table = RootTable::build(&chain, n_max).map_err(|e| JsError::new(&e.to_string()))?;
    Ok(svg::render_root_ladder(&chain, &table))
}

/// SVG of the period-doubled solution curve for the given first parameter,
/// traced in the second parameter up to `b_max`.
#[wasm_bindgen]
pub fn two_periodic_svg(a: f64, b_max: f64, steps: u32) -> Result<String, JsError> {
    if a <= 0.0 {
        return Err(JsError::new("the parameter must be positive"));
    }
    let a_q = rational(a, 2);
    let b_crit = BigRational::from(BigInt::from(4)) / &a_q;
    let mut b_q = rational(b_max, 8);
    if b_q <= b_crit {
        b_q = &b_crit * BigRational::new(BigInt::from(3), BigInt::from(2));
    }
    let steps = (steps as usize).clamp(4, 64);
    let policy = PrecisionPolicy::default();
    let tol = BigRational::new(BigInt::from(1), BigInt::from(1u64 << 30));
    let curve = trace_2t_curve(&policy, &a_q, &b_q, steps, &tol);
    Ok(svg::render_two_periodic_curve(&curve))
}

/// SVG of the bifurcation atlas up to `n_max` (capped for browser budgets),
/// with every branch traced to `a_max`.
#[wasm_bindgen]
pub fn atlas_svg(n_max: u32, a_max: f64) -> Result<String, JsError> {
    let n_max = (n_max as usize).clamp(2, 6);
    let a_q = rational(a_max.clamp(2.2, 4.0), 3);
    let chain = Chain::build(n_max);
    let table = RootTable::build(&chain, n_max).map_err(|e| JsError::new(&e.to_string()))?;
    let cfg = AtlasConfig::new(n_max, a_q);
    let atlas = build_atlas(&chain, &table, &cfg);
    Ok(svg::render_atlas(&atlas))
}

/// Plain-text polynomial chain, one member per line.
#[wasm_bindgen]
pub fn chain_text(n_max: u32) -> String {
    let n_max = (n_max as usize).clamp(1, 24);
    let chain = Chain::build(n_max);
    chain
        .polys()
        .iter()
        .enumerate()
        .map(|(i, p)| format!("p_{} = {}", i + 1, p))
        .collect::<Vec<_>>()
        .join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bindings_produce_svg() {
        assert!(roots_ladder_svg(8).unwrap().starts_with("<svg"));
        assert!(two_periodic_svg(2.0, 8.0, 6).unwrap().contains("polyline"));
        assert!(atlas_svg(3, 2.5).unwrap().contains("polyline"));
        assert!(chain_text(4).contains("p_4 = A^3 - 2*A^2 - 2*A + 4"));
    }
}
