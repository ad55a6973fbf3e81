//! A design in either representation, and the backend that simulates it.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::components::ComponentRegistry;
use crate::netlist::{validate_circuit, Circuit};
use crate::sim::{simulate, SimConfig, SimError, SimRun};
use crate::stimulus::StimulusSet;
use crate::vhdl::{elaborate, parse_vhdl, simulate_vhdl, Diagnostic, ElaboratedDesign, VhdlUnit};

#[derive(Debug, Clone)]
pub enum Design {
    Circuit(Circuit),
    /// VHDL sources still to be parsed and elaborated.
    Vhdl { units: Vec<VhdlUnit>, top: String },
    Elaborated(Arc<ElaboratedDesign>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Repr {
    Netlist,
    Vhdl,
}

impl Design {
    pub fn repr(&self) -> Repr {
        match self {
            Design::Circuit(_) => Repr::Netlist,
            _ => Repr::Vhdl,
        }
    }

    /// Validates or elaborates. VHDL sources are replaced by their
    /// elaborated form.
    pub fn compile(&self, registry: &ComponentRegistry) -> Result<Design, BackendError> {
        match self {
            Design::Circuit(c) => {
                let report = validate_circuit(c, registry);
                if report.is_ok() {
                    Ok(self.clone())
                } else {
                    Err(BackendError::Rejected(report.errors.iter().map(ToString::to_string).collect()))
                }
            }
            Design::Vhdl { units, top } => {
                let (ast, mut diags) = parse_vhdl(units);
                if diags.iter().any(Diagnostic::is_error) {
                    return Err(BackendError::Vhdl(diags));
                }
                let (design, more) = elaborate(&ast, top, registry);
                diags.extend(more);
                match design {
                    Some(d) if !diags.iter().any(Diagnostic::is_error) => Ok(Design::Elaborated(Arc::new(d))),
                    _ => Err(BackendError::Vhdl(diags)),
                }
            }
            Design::Elaborated(_) => Ok(self.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BackendError {
    #[error("design rejected: {}", .0.join("; "))]
    Rejected(Vec<String>),
    #[error("VHDL has {} diagnostic(s)", .0.len())]
    Vhdl(Vec<Diagnostic>),
    #[error(transparent)]
    Sim(#[from] SimError),
}

impl BackendError {
    /// Human-readable lines, one per problem.
    pub fn diagnostics(&self) -> Vec<String> {
        match self {
            BackendError::Rejected(v) => v.clone(),
            BackendError::Vhdl(d) => d.iter().map(ToString::to_string).collect(),
            BackendError::Sim(e) => match e {
                SimError::Invalid(r) => r.errors.iter().map(ToString::to_string).collect(),
                other => vec![other.to_string()],
            },
        }
    }

    /// True when the design itself is at fault rather than the request.
    pub fn is_design_error(&self) -> bool {
        matches!(self, BackendError::Rejected(_) | BackendError::Vhdl(_) | BackendError::Sim(SimError::Invalid(_)))
    }
}

/// Simulation boundary: design plus stimulus in, trace and log out. An
/// external simulator can be plugged in by implementing this.
pub trait SimBackend: Send + Sync {
    fn name(&self) -> &str;
    /// Checks a design once so that repeated runs skip the front end.
    fn compile(&self, design: &Design) -> Result<Design, BackendError> {
        Ok(design.clone())
    }
    fn run(&self, design: &Design, stim: &StimulusSet, cfg: &SimConfig) -> Result<SimRun, BackendError>;
}

/// The built-in event kernel.
#[derive(Debug, Clone)]
pub struct InternalBackend {
    pub registry: Arc<ComponentRegistry>,
}

impl InternalBackend {
    pub fn new(registry: Arc<ComponentRegistry>) -> Self {
        InternalBackend { registry }
    }

    pub fn builtin() -> Self {
        InternalBackend::new(Arc::new(ComponentRegistry::builtin()))
    }
}

impl SimBackend for InternalBackend {
    fn name(&self) -> &str {
        "internal"
    }

    fn compile(&self, design: &Design) -> Result<Design, BackendError> {
        design.compile(&self.registry)
    }

    fn run(&self, design: &Design, stim: &StimulusSet, cfg: &SimConfig) -> Result<SimRun, BackendError> {
        match design.compile(&self.registry)? {
            Design::Circuit(c) => Ok(simulate(&c, stim, cfg, &self.registry)?),
            Design::Elaborated(d) => Ok(simulate_vhdl(&d, stim, cfg)?),
            Design::Vhdl { .. } => unreachable!("compile elaborates sources"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::LogicValue;
    use crate::stimulus::SignalSpec;

    #[test]
    fn vhdl_sources_compile_and_run() {
        let src = "entity inv is port (a : in std_logic; y : out std_logic); end;
architecture r of inv is begin y <= not a; end;";
        let d = Design::Vhdl { units: vec![VhdlUnit::new("inv.vhd", src)], top: "inv".into() };
        let stim = StimulusSet::new(10).with("a", SignalSpec::constant(LogicValue::Zero));
        let run = InternalBackend::builtin().run(&d, &stim, &SimConfig::new(10)).unwrap();
        assert_eq!(run.trace.sample("y", 5).unwrap(), LogicValue::One);
    }

    #[test]
    fn broken_vhdl_reports_diagnostics() {
        let d = Design::Vhdl { units: vec![VhdlUnit::new("x.vhd", "entity is")], top: "x".into() };
        let err = InternalBackend::builtin().run(&d, &StimulusSet::new(10), &SimConfig::new(10)).unwrap_err();
        assert!(err.is_design_error());
        assert!(err.diagnostics()[0].starts_with("x.vhd:1:8:"), "{:?}", err.diagnostics());
    }
}
