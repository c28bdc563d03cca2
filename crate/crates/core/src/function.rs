//! Pointwise-evaluable real functions on an interval.

/// A real function that can be sampled anywhere in its kernel's domain.
pub trait RealFunction: Sync {
    fn value(&self, x: f64) -> f64;

    /// Points where the function may lose smoothness; quadrature panels are
    /// aligned to them.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }
}

/// A function with a known norm in the ℓ¹ kernel space.
pub trait Hypothesis: RealFunction {
    fn b_norm(&self) -> f64;
}

impl<F: Fn(f64) -> f64 + Sync> RealFunction for F {
    fn value(&self, x: f64) -> f64 {
        self(x)
    }
}

/// The identically zero function.
#[derive(Clone, Copy, Debug, Default)]
pub struct Zero;

impl RealFunction for Zero {
    fn value(&self, _: f64) -> f64 {
        0.0
    }
}

impl Hypothesis for Zero {
    fn b_norm(&self) -> f64 {
        0.0
    }
}
