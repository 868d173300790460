//! Unit conversions. Everything inside the crate is in Hartree atomic units
//! (hbar = e = m_e = 1); meV and nm are accepted only at the configuration
//! boundary through these constants.

/// 1 Hartree in electron volts.
pub const HARTREE_IN_EV: f64 = 27.2114;

/// 1 Bohr radius in nanometres.
pub const BOHR_IN_NM: f64 = 0.0529177;

pub fn mev_to_au(mev: f64) -> f64 {
    mev * 1e-3 / HARTREE_IN_EV
}

pub fn nm_to_au(nm: f64) -> f64 {
    nm / BOHR_IN_NM
}
