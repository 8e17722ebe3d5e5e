//! Inputs shared by the benchmarks.

use isingmacro::spectrum::{wick_coefficients, ChainParams};
use isingmacro::toeplitz::ToeplitzSymbol;

/// `xx` symbol of the ring with `2 * order` sites at `lambda`, large enough
/// for minors up to `order`.
pub fn chain_symbol(order: usize, lambda: f64) -> ToeplitzSymbol {
    let wick = wick_coefficients(&ChainParams::even(2 * order, lambda).expect("valid chain"))
        .expect("gapped chain");
    ToeplitzSymbol::from_fn(order, |m| wick.g(m - 1)).expect("finite coefficients")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symbol_has_requested_order() {
        let s = chain_symbol(16, 0.9);
        assert_eq!(s.max_order(), 16);
        assert!(s.coeff(0).is_finite());
    }
}
