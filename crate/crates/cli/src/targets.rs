//! Reference values that output rows and acceptance checks are compared with.

use std::fmt;

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Tolerance {
    Absolute(f64),
    Relative(f64),
    /// Achieved must be at least the target.
    AtLeast,
    /// Achieved must exceed the target.
    Above,
    /// Achieved within this ratio of the target, either way.
    Factor(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Target {
    pub id: &'static str,
    pub value: f64,
    pub tolerance: Tolerance,
}

impl Target {
    pub const fn new(id: &'static str, value: f64, tolerance: Tolerance) -> Self {
        Self { id, value, tolerance }
    }

    pub fn accepts(&self, achieved: f64) -> bool {
        if !achieved.is_finite() {
            return false;
        }
        let t = self.value;
        match self.tolerance {
            Tolerance::Absolute(tol) => (achieved - t).abs() <= tol,
            Tolerance::Relative(tol) => (achieved - t).abs() <= tol * t.abs(),
            Tolerance::AtLeast => achieved >= t,
            Tolerance::Above => achieved > t,
            Tolerance::Factor(k) => achieved > 0.0 && t > 0.0 && achieved / t <= k && t / achieved <= k,
        }
    }
}

impl fmt::Display for Tolerance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tolerance::Absolute(t) => write!(f, "±{t:e}"),
            Tolerance::Relative(t) => write!(f, "±{}% rel", t * 100.0),
            Tolerance::AtLeast => f.write_str(">="),
            Tolerance::Above => f.write_str(">"),
            Tolerance::Factor(k) => write!(f, "within ×{k}"),
        }
    }
}

/// Every reference value an experiment row can be tagged with.
pub fn registry() -> Vec<Target> {
    use Tolerance::*;
    vec![
        Target::new("overlap_alpha2", 1.1e-7, Relative(0.02)),
        Target::new("zeno_ideal_n8", 0.995, Absolute(1e-3)),
        Target::new("zeno_ideal_n30", 0.999, Absolute(1e-3)),
        Target::new("counting_single_step", 0.92865, Absolute(1e-3)),
        Target::new("counting_small_step", 0.99880, Absolute(1e-3)),
        Target::new("counting_zeno_8", 0.99044, Absolute(2e-3)),
        Target::new("best_outcome", 0.999995, Absolute(1e-5)),
        Target::new("large_alpha", 0.99, AtLeast),
        Target::new("bellcat_cost_alpha1", 11.55, Absolute(0.3)),
        Target::new("bellcat_cost_alpha4", 5.75, Absolute(0.3)),
        Target::new("reamp_success", (-0.02f64).exp(), Absolute(1e-3)),
        Target::new("reamp_failure", (-8.0f64).exp(), Factor(2.0)),
        Target::new("three_qubit_single_loss", 1.0 - 1e-3, AtLeast),
    ]
}

pub fn lookup(id: &str) -> Option<Target> {
    registry().into_iter().find(|t| t.id == id)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerances() {
        let t = Target::new("x", 1.0, Tolerance::Absolute(0.1));
        assert!(t.accepts(1.05) && !t.accepts(1.2) && !t.accepts(f64::NAN));
        assert!(Target::new("x", 2.0, Tolerance::Relative(0.02)).accepts(2.03));
        assert!(!Target::new("x", 2.0, Tolerance::Relative(0.02)).accepts(2.05));
        assert!(Target::new("x", 1.0, Tolerance::Factor(2.0)).accepts(0.6));
        assert!(!Target::new("x", 1.0, Tolerance::Factor(2.0)).accepts(2.1));
        assert!(Target::new("x", 0.5, Tolerance::AtLeast).accepts(0.5));
        assert!(!Target::new("x", 0.5, Tolerance::Above).accepts(0.5));
    }

    #[test]
    fn ids_are_unique() {
        let r = registry();
        for (i, a) in r.iter().enumerate() {
            assert!(r[i + 1..].iter().all(|b| b.id != a.id), "{}", a.id);
            assert_eq!(lookup(a.id), Some(*a));
        }
    }
}
