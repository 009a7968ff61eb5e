//! Wall-clock runtime of a circuit on current hardware, from its CNOT count.

use alloc::string::String;
use alloc::vec::Vec;

use super::gates::GateCost;
use crate::math;
use crate::{Error, Result};

/// Coherence and gate-time figures of a processor.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessorSpec {
    pub name: String,
    pub t1_seconds: Option<f64>,
    pub t2_seconds: f64,
    pub two_qubit_gate_seconds: f64,
}

impl ProcessorSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !ok(self.t2_seconds) || !ok(self.two_qubit_gate_seconds) || self.t1_seconds.is_some_and(|t| !ok(t)) {
            return Err(Error::invalid("processor", "times must be positive and finite"));
        }
        Ok(())
    }
}

/// Published figures for four processors.
pub fn reference_processors() -> Vec<ProcessorSpec> {
    let p = |name: &str, t1: Option<f64>, t2: f64, gate: f64| ProcessorSpec {
        name: name.into(),
        t1_seconds: t1,
        t2_seconds: t2,
        two_qubit_gate_seconds: gate,
    };
    alloc::vec![
        p("IBM Eagle r3", Some(275e-6), 117e-6, 636e-9),
        p("Google Sycamore", Some(22.9e-6), 15.5e-6, 20e-9),
        p("Quantinuum H2-1", None, 1.41e3, 6.46e-3),
        p("IonQ Forte", Some(10.0), 1.0, 931e-6),
    ]
}

/// Runtime and its ratio to the coherence times.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RuntimeEstimate {
    pub seconds: f64,
    pub fraction_t1: Option<f64>,
    pub fraction_t2: f64,
}

/// Serial: every CNOT after the other. Parallel: layers of
/// `total_qubits / 2` simultaneous CNOTs.
pub fn hardware_runtime(cost: &GateCost, proc: &ProcessorSpec, parallel: bool, total_qubits: u64) -> Result<RuntimeEstimate> {
    proc.validate()?;
    let layers = if parallel {
        let width = (total_qubits / 2).max(1) as f64;
        math::ceil(cost.cnot_gates / width)
    } else {
        cost.cnot_gates
    };
    let seconds = layers * proc.two_qubit_gate_seconds;
    Ok(RuntimeEstimate {
        seconds,
        fraction_t1: proc.t1_seconds.map(|t| seconds / t),
        fraction_t2: seconds / proc.t2_seconds,
    })
}
