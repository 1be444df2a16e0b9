//! Process-wide tolerance configuration.
//!
//! Read at startup by the runner; every operation that compares against an
//! algebraic identity or an envelope reconstruction reads these values.

use core::sync::atomic::{AtomicU64, Ordering};

static ALGEBRAIC: AtomicU64 = AtomicU64::new(1e-10f64.to_bits());
static ENVELOPE: AtomicU64 = AtomicU64::new(1e-8f64.to_bits());

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Algebraic identities (translation identity, jump relations, tangency).
    pub algebraic: f64,
    /// Envelope reconstruction from acoustic degeneracy.
    pub envelope: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            algebraic: 1e-10,
            envelope: 1e-8,
        }
    }
}

pub fn tolerances() -> Tolerances {
    Tolerances {
        algebraic: f64::from_bits(ALGEBRAIC.load(Ordering::Relaxed)),
        envelope: f64::from_bits(ENVELOPE.load(Ordering::Relaxed)),
    }
}

pub fn set_tolerances(t: Tolerances) {
    ALGEBRAIC.store(t.algebraic.to_bits(), Ordering::Relaxed);
    ENVELOPE.store(t.envelope.to_bits(), Ordering::Relaxed);
}
