use alloc::string::String;
use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
}

/// Named residuals and certificates with a pass flag each.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn new() -> Self {
        Self::default()
    }

    /// Passes when `value <= threshold`; NaN fails.
    pub fn at_most(&mut self, name: &str, value: f64, threshold: f64) -> &mut Self {
        self.checks.push(Check { name: name.into(), value, threshold, passed: value <= threshold });
        self
    }

    /// Passes when `value >= threshold`; NaN fails.
    pub fn at_least(&mut self, name: &str, value: f64, threshold: f64) -> &mut Self {
        self.checks.push(Check { name: name.into(), value, threshold, passed: value >= threshold });
        self
    }

    pub fn flag(&mut self, name: &str, passed: bool) -> &mut Self {
        let value = if passed { 1.0 } else { 0.0 };
        self.checks.push(Check { name: name.into(), value, threshold: 1.0, passed });
        self
    }

    pub fn extend(&mut self, other: VerificationReport) -> &mut Self {
        self.checks.extend(other.checks);
        self
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn value(&self, name: &str) -> f64 {
        self.get(name).map(|c| c.value).unwrap_or(f64::NAN)
    }
}
