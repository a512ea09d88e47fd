use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::BoundaryCondition;

pub const DEFAULT_C_STAB: f64 = 0.03125;
pub const DEFAULT_TOLERANCE: f64 = 1e-3;
pub const DEFAULT_MAX_ITERATIONS: usize = 20_000;

fn default_c_stab() -> f64 {
    DEFAULT_C_STAB
}

fn default_tolerance() -> f64 {
    DEFAULT_TOLERANCE
}

fn default_max_iterations() -> usize {
    DEFAULT_MAX_ITERATIONS
}

/// Physical constants, forcing frequency, boundary data and solver controls
/// for one frequency-domain solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseConfig {
    pub rho: f64,
    pub mu: f64,
    /// Angular frequency of the mode being solved.
    pub omega: f64,
    #[serde(default = "default_c_stab")]
    pub c_stab: f64,
    #[serde(rename = "tolerance", default = "default_tolerance")]
    pub solver_tolerance: f64,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    #[serde(rename = "bcs", default)]
    pub boundary_conditions: Vec<BoundaryCondition>,
}

impl CaseConfig {
    pub fn new(rho: f64, mu: f64, omega: f64) -> Self {
        Self {
            rho,
            mu,
            omega,
            c_stab: DEFAULT_C_STAB,
            solver_tolerance: DEFAULT_TOLERANCE,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            boundary_conditions: Vec::new(),
        }
    }

    pub fn with_bc(mut self, bc: BoundaryCondition) -> Self {
        self.boundary_conditions.push(bc);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, what: &str| if ok { Ok(()) } else { Err(Error::Config(what.to_string())) };
        check(self.rho > 0.0 && self.rho.is_finite(), "rho must be positive")?;
        check(self.mu > 0.0 && self.mu.is_finite(), "mu must be positive")?;
        check(self.omega >= 0.0 && self.omega.is_finite(), "omega must be non-negative")?;
        check(self.c_stab > 0.0 && self.c_stab.is_finite(), "c_stab must be positive")?;
        check(
            self.solver_tolerance > 0.0 && self.solver_tolerance < 1.0,
            "tolerance must lie in (0, 1)",
        )?;
        check(self.max_iterations >= 1, "max_iterations must be at least 1")?;
        for (k, bc) in self.boundary_conditions.iter().enumerate() {
            if self.boundary_conditions[..k].iter().any(|o| o.patch == bc.patch) {
                return Err(Error::Config(format!("patch `{}` has more than one condition", bc.patch)));
            }
            let finite = bc.value_real.iter().chain(&bc.value_imag).all(|v| v.is_finite());
            check(finite, &format!("bcs[{k}] has non-finite values"))?;
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: CaseConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("{e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialization cannot fail")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_filled_in() {
        let c = CaseConfig::from_json(r#"{"rho":1,"mu":1,"omega":0,"bcs":[{"patch":"wall","kind":"dirichlet","real":[0,0,0],"imag":[0,0,0]}]}"#).unwrap();
        assert_eq!(c.c_stab, 0.03125);
        assert_eq!(c.solver_tolerance, 1e-3);
        assert_eq!(c.max_iterations, DEFAULT_MAX_ITERATIONS);
        assert_eq!(c.boundary_conditions.len(), 1);
        let again = CaseConfig::from_json(&c.to_json()).unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn invalid_values_rejected() {
        for bad in [
            r#"{"rho":0,"mu":1,"omega":0}"#,
            r#"{"rho":1,"mu":-1,"omega":0}"#,
            r#"{"rho":1,"mu":1,"omega":-2}"#,
            r#"{"rho":1,"mu":1,"omega":0,"c_stab":0}"#,
            r#"{"rho":1,"mu":1,"omega":0,"tolerance":1.5}"#,
            r#"{"rho":1,"mu":1,"omega":0,"colour":3}"#,
        ] {
            assert!(matches!(CaseConfig::from_json(bad), Err(Error::Config(_))), "{bad}");
        }
    }

    #[test]
    fn duplicate_patch_condition_rejected() {
        let c = CaseConfig::new(1.0, 1.0, 0.0)
            .with_bc(BoundaryCondition::neumann("inlet", &[0.0, 0.0, 1.0], &[0.0; 3]))
            .with_bc(BoundaryCondition::dirichlet("inlet", &[0.0; 3], &[0.0; 3]));
        assert!(c.validate().is_err());
    }
}
