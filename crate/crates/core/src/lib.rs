//! Technology mapping for single-flux-quantum logic.
//!
//! SFQ gates are clocked, so every gate input must arrive on the same clock
//! stage. Mapping therefore minimizes logical depth first and the DFFs needed
//! to balance path lengths second, then inserts those DFFs and the splitters
//! that give every multi-fanout net a fanout of one.

pub mod balance;
pub mod cuts;
pub mod dp;
pub mod error;
pub mod genlib;
pub mod mapped;
pub mod matcher;
pub mod netlist;
pub mod oracle;
pub mod peephole;
pub mod pipeline;
pub mod report;
pub mod subject;
pub mod truth;
