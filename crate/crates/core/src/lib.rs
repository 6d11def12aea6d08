//! Computation, certification and optimization of the price of anarchy for
//! multiagent resource-allocation (coverage-type) games.
//!
//! The crate models games where each agent picks a subset of valued
//! resources, welfare scales each resource by a basis function `w` of its
//! coverage count, and agents are paid a designable share `f` of the welfare
//! they sit on. It provides:
//!
//! - [`game`]: instances, welfare/utility/potential evaluation, Nash checks;
//! - [`rules`]: the equal-split, marginal-contribution and factorial-sum
//!   distribution rules plus structural predicates;
//! - [`lp`]: a deterministic dense simplex backend;
//! - [`poa`]: exact price-of-anarchy programs (primal, dual, reduced dual)
//!   and reconstruction of tight worst-case instances;
//! - [`closed_form`]: explicit formulas cross-validating the programs;
//! - [`design`]: synthesis of the optimal distribution rule;
//! - [`dynamics`]: round-robin best-response with potential monitoring;
//! - [`oracle`]: exhaustive ground truth on desk-scale instances.

pub mod closed_form;
pub mod design;
pub mod dynamics;
pub mod error;
pub mod game;
pub mod lp;
pub mod oracle;
pub mod poa;
pub mod rules;

pub use error::{Error, Result};
pub use game::{Allocation, DistributionRule, GameInstance, WelfareBasis};

/// Formats a float with 12 significant digits, trimming trailing zeros.
/// All file output (CSV rows, reports) goes through this so that replayed
/// runs reproduce byte-identical artifacts.
pub fn fmt_g12(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if (-4..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        let trimmed = s.trim_end_matches('0').trim_end_matches('.');
        trimmed.to_string()
    } else {
        format!("{x:.11e}")
    }
}

#[cfg(test)]
mod fmt_tests {
    use super::fmt_g12;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_g12(0.0), "0");
        assert_eq!(fmt_g12(1.5), "1.5");
        assert_eq!(fmt_g12(2.0 / 3.0), "0.666666666667");
        assert_eq!(fmt_g12(123.456), "123.456");
        assert_eq!(fmt_g12(-0.25), "-0.25");
        assert_eq!(fmt_g12(1e15), "1.00000000000e15");
    }
}
