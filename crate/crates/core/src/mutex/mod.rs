//! Shared-memory mutual exclusion: the register/process model, reference
//! algorithms, property checks and the poised-writer attack.

mod algorithms;
mod attack;
mod properties;
mod system;

pub use algorithms::{burns_lynch, one_register, semaphore};
pub use attack::{poised_attack, AttackBounds, AttackError, AttackFragment};
pub use properties::{check_mutex, critical_processes, MutexProperty, PropertyVerdict};
pub use system::{critical_count, region_of, Access, Instr, MemError, MemState, Region, Register, SharedMemSystem};
