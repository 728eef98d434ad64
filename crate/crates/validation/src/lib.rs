//! Shared setup and reporting for the acceptance runs in `tests/`.

use std::fmt;

use memkin::perturbation::{perturbed_maxwellian, PerturbationSpec};
use memkin::{Maxwellian, Result, ScalarField, VelocityGrid};

/// Amplitude of the perturbation in the standard initial datum.
pub const DELTA2: f64 = 0.05;

/// `m + 0.05 v0` with the unit Maxwellian and the default bump.
pub fn standard_datum(grid: &VelocityGrid) -> Result<ScalarField> {
    perturbed_maxwellian(grid, &Maxwellian::default(), DELTA2, &PerturbationSpec::default())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    AtMost,
    AtLeast,
}

/// One measured quantity against its bound.
#[derive(Clone, Debug)]
pub struct Measurement {
    pub name: String,
    pub value: f64,
    pub relation: Relation,
    pub bound: f64,
}

impl Measurement {
    pub fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self { name: name.into(), value, relation: Relation::AtMost, bound }
    }

    pub fn at_least(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self { name: name.into(), value, relation: Relation::AtLeast, bound }
    }

    /// A yes/no property, reported as 1 (holds) or 0 against a bound of 1.
    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Self::at_least(name, if ok { 1.0 } else { 0.0 }, 1.0)
    }

    pub fn passed(&self) -> bool {
        match self.relation {
            Relation::AtMost => self.value <= self.bound,
            Relation::AtLeast => self.value >= self.bound,
        }
    }
}

impl fmt::Display for Measurement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rel = match self.relation {
            Relation::AtMost => "<=",
            Relation::AtLeast => ">=",
        };
        write!(f, "{} = {:.4e} ({rel} {:e})", self.name, self.value, self.bound)
    }
}

/// Outcome of one acceptance criterion.
#[derive(Clone, Debug)]
pub struct Verdict {
    pub criterion: u32,
    pub title: &'static str,
    pub measurements: Vec<Measurement>,
    pub seconds: f64,
}

impl Verdict {
    pub fn passed(&self) -> bool {
        !self.measurements.is_empty() && self.measurements.iter().all(Measurement::passed)
    }

    /// `criterion N: PASS|FAIL title; m1; m2; ...`
    pub fn line(&self) -> String {
        let parts: Vec<String> = self.measurements.iter().map(ToString::to_string).collect();
        format!(
            "criterion {}: {} {} [{:.1}s]; {}",
            self.criterion,
            if self.passed() { "PASS" } else { "FAIL" },
            self.title,
            self.seconds,
            parts.join("; ")
        )
    }

    /// Prints the line and panics with it when the criterion failed.
    pub fn report(&self) {
        let line = self.line();
        println!("{line}");
        assert!(self.passed(), "{line}");
    }
}
