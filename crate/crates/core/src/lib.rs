//! Exact calculus for klt surface singularities: dual graphs, discrepancies,
//! blow-up models, and the enumerations that classify boundary germs,
//! global configurations and non-1/11-lt exceptional del Pezzo surfaces.

pub mod birational;
pub mod delpezzo;
pub mod dualgraph;
pub mod exact;
pub mod germs;
pub mod search;
pub mod tables;
