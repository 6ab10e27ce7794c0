//! Split-phase single-rendezvous MAC: coordination, pair state, trace and the
//! simulation loop.

pub mod coordination;
pub mod pair;
pub mod sim;
pub mod trace;

pub use coordination::{claim_channels, generate_prs, rendezvous_channel};
pub use pair::{InFlight, PacketRecord, SuPairState};
pub use sim::{run_metrics, run_simulation, ControlOutcome, SimInputs, Simulator};
pub use trace::{Event, EventTrace, TraceRecord};
