//! Two-chain transfer sampler over the power-prior parameter.
//!
//! Chain 1 first anneals the target likelihood (`gamma: 0 -> 1`); both chains
//! then anneal the source likelihood (`alpha: 0 -> 1`), chain 0 without the
//! target data. The stored rungs give `log C_S(alpha)` (chain 0) and
//! `log C_{T,S}(alpha)` (chain 1) on the ladder, and one importance step from
//! the nearest rung below reaches any other `alpha`.

mod fpp;
mod importance;
mod npp;
mod trace;
mod transfer;

pub use fpp::{grid_search_me, FppResult, DEFAULT_GRID};
pub use importance::{is_update, ImportanceUpdate};
pub use npp::{sample_npp, BetaPrior, NppResult};
pub use trace::{Rung, Snapshot, TsmcTrace, TRACE_MAGIC, TRACE_VERSION};
pub use transfer::{run_source_phase, run_target_phase, run_tsmc, TargetPhase, MIN_PARTICLES};
