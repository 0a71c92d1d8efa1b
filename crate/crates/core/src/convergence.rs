//! Observed-order bookkeeping for refinement studies.

/// Errors below this are treated as roundoff: the discrete identity holds
/// exactly and no rate can be measured.
pub const ROUNDOFF_FLOOR: f64 = 1e-10;

/// Observed orders between successive levels of a refinement sequence where
/// the mesh width halves each level.
pub fn observed_orders(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

/// Outcome of a refinement study.
#[derive(Debug, Clone, PartialEq)]
pub enum Convergence {
    /// Every level sits at or below the roundoff floor.
    Exact { max_error: f64 },
    /// Observed orders between successive levels.
    Rate { orders: Vec<f64> },
}

impl Convergence {
    pub fn classify(errors: &[f64], floor: f64) -> Self {
        if errors.iter().all(|e| e.abs() <= floor) {
            Convergence::Exact { max_error: errors.iter().fold(0.0_f64, |m, e| m.max(e.abs())) }
        } else {
            Convergence::Rate { orders: observed_orders(errors) }
        }
    }

    /// Every observed order is at least `min_order`, or the identity is exact.
    pub fn at_least(&self, min_order: f64) -> bool {
        match self {
            Convergence::Exact { .. } => true,
            Convergence::Rate { orders } => orders.iter().all(|q| *q >= min_order),
        }
    }

    pub fn within(&self, lo: f64, hi: f64) -> bool {
        match self {
            Convergence::Exact { .. } => true,
            Convergence::Rate { orders } => orders.iter().all(|q| *q >= lo && *q <= hi),
        }
    }
}

impl std::fmt::Display for Convergence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Convergence::Exact { max_error } => write!(f, "exact (max {max_error:.2e})"),
            Convergence::Rate { orders } => {
                let s: Vec<String> = orders.iter().map(|q| format!("{q:.3}")).collect();
                write!(f, "orders [{}]", s.join(", "))
            }
        }
    }
}

/// One Richardson step for a quantity with error `C h^order`, given values at
/// mesh widths `h` (fine) and `2h` (coarse).
pub fn richardson(fine: f64, coarse: f64, order: f64) -> f64 {
    let r = 2f64.powf(order);
    (r * fine - coarse) / (r - 1.0)
}
