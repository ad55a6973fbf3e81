//! Digital logic lab core: part models, netlists, an event-driven
//! four-valued simulator, a VHDL subset and waveform grading.

pub mod components;
pub mod demo;
pub mod design;
pub mod grader;
pub mod logic;
pub mod netlist;
pub mod sim;
pub mod stimulus;
pub mod vhdl;

pub use components::ComponentRegistry;
pub use logic::LogicValue;
pub use netlist::Circuit;
