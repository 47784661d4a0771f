//! Certified rational constants used in error budgets.

use num_rational::BigRational;

/// A rational upper bound on pi^2/6 = 1.6449340668482264...; error budgets
/// only ever need an upper bound for this constant.
pub fn pi2_over_6_upper() -> BigRational {
    BigRational::new(
        16449340668482266u64.into(),
        10u64.pow(16).into(),
    )
}

/// A rational upper bound on ln 2 = 0.6931471805...
pub fn ln2_upper() -> BigRational {
    BigRational::new(69315.into(), 100000.into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    #[test]
    fn bounds_are_upper() {
        assert!(pi2_over_6_upper().to_f64().unwrap() > std::f64::consts::PI.powi(2) / 6.0);
        assert!(ln2_upper().to_f64().unwrap() > std::f64::consts::LN_2);
    }
}
