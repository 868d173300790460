//! Truncated photon-number bases and their ladder connectivity.
//!
//! Composite Hilbert-space indices factor as
//! `index = photon_block * matter_dim + matter_index`; this module owns the
//! photon-block side: occupation tuples, their lexicographic enumeration, and
//! the neighbor tables used by ladder-operator application.

use crate::error::{Error, Result};
use std::collections::HashMap;

/// Finite photon-number cutoff defining the computational basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FockTruncation {
    /// Each mode keeps occupations 0..=cutoff.
    PerMode { cutoff: u32 },
    /// Occupations with total sum <= cutoff (polynomial growth in mode count).
    TotalExcitation { cutoff: u32 },
}

impl FockTruncation {
    pub fn cutoff(&self) -> u32 {
        match *self {
            FockTruncation::PerMode { cutoff } | FockTruncation::TotalExcitation { cutoff } => {
                cutoff
            }
        }
    }

    pub fn with_cutoff(&self, cutoff: u32) -> Self {
        match self {
            FockTruncation::PerMode { .. } => FockTruncation::PerMode { cutoff },
            FockTruncation::TotalExcitation { .. } => FockTruncation::TotalExcitation { cutoff },
        }
    }

    /// Closed-form basis dimension; `None` means it overflows u128 and is
    /// over any conceivable budget.
    pub fn dimension(&self, n_modes: usize) -> Option<u128> {
        match *self {
            FockTruncation::PerMode { cutoff } => {
                let base = cutoff as u128 + 1;
                let mut acc: u128 = 1;
                for _ in 0..n_modes {
                    acc = acc.checked_mul(base)?;
                }
                Some(acc)
            }
            FockTruncation::TotalExcitation { cutoff } => {
                binomial(n_modes as u128 + cutoff as u128, cutoff as u128)
            }
        }
    }

    fn admits(&self, occ: &[u8]) -> bool {
        match *self {
            FockTruncation::PerMode { cutoff } => occ.iter().all(|&n| n as u32 <= cutoff),
            FockTruncation::TotalExcitation { cutoff } => {
                occ.iter().map(|&n| n as u32).sum::<u32>() <= cutoff
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.cutoff() == 0 {
            return Err(Error::Config("Fock cutoff must be >= 1".into()));
        }
        if self.cutoff() > u8::MAX as u32 {
            return Err(Error::Config(format!(
                "Fock cutoff {} exceeds the supported occupation range",
                self.cutoff()
            )));
        }
        Ok(())
    }
}

fn binomial(n: u128, k: u128) -> Option<u128> {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul(n - i)?;
        acc /= i + 1;
    }
    Some(acc)
}

/// Enumerated photon basis with ladder-neighbor tables.
#[derive(Debug, Clone)]
pub struct PhotonBasis {
    n_modes: usize,
    truncation: FockTruncation,
    states: Vec<Vec<u8>>,
    raise: Vec<Vec<Option<u32>>>,
    lower: Vec<Vec<Option<u32>>>,
}

impl PhotonBasis {
    /// The zero-mode basis: a single empty occupation tuple. Used by the
    /// photonless mean-field strategy so that composite indexing still works.
    pub fn unit() -> Self {
        Self {
            n_modes: 0,
            truncation: FockTruncation::PerMode { cutoff: 1 },
            states: vec![Vec::new()],
            raise: vec![Vec::new()],
            lower: vec![Vec::new()],
        }
    }

    pub fn new(n_modes: usize, truncation: FockTruncation) -> Result<Self> {
        truncation.validate()?;
        if n_modes == 0 {
            return Err(Error::EmptyBath);
        }
        let states = enumerate(n_modes, truncation);
        let index: HashMap<&[u8], u32> = states
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_slice(), i as u32))
            .collect();

        let mut raise = vec![vec![None; n_modes]; states.len()];
        let mut lower = vec![vec![None; n_modes]; states.len()];
        let mut scratch = vec![0u8; n_modes];
        for (p, occ) in states.iter().enumerate() {
            for mode in 0..n_modes {
                scratch.copy_from_slice(occ);
                if scratch[mode] < u8::MAX {
                    scratch[mode] += 1;
                    if truncation.admits(&scratch) {
                        if let Some(&q) = index.get(scratch.as_slice()) {
                            raise[p][mode] = Some(q);
                            lower[q as usize][mode] = Some(p as u32);
                        }
                    }
                }
            }
        }
        Ok(Self { n_modes, truncation, states, raise, lower })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn truncation(&self) -> FockTruncation {
        self.truncation
    }

    pub fn occupation(&self, block: usize) -> &[u8] {
        &self.states[block]
    }

    /// Block index of the state with occupation n_mode + 1, if representable.
    pub fn raised(&self, block: usize, mode: usize) -> Option<usize> {
        self.raise[block][mode].map(|q| q as usize)
    }

    pub fn lowered(&self, block: usize, mode: usize) -> Option<usize> {
        self.lower[block][mode].map(|q| q as usize)
    }

    pub fn index_of(&self, occ: &[u8]) -> Option<usize> {
        // Linear in basis size only in tests; hot paths use the tables.
        self.states.iter().position(|s| s.as_slice() == occ)
    }
}

fn enumerate(n_modes: usize, truncation: FockTruncation) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    let mut current = vec![0u8; n_modes];
    fill(&mut out, &mut current, 0, truncation);
    out
}

fn fill(out: &mut Vec<Vec<u8>>, current: &mut Vec<u8>, mode: usize, trunc: FockTruncation) {
    if mode == current.len() {
        out.push(current.clone());
        return;
    }
    let headroom = match trunc {
        FockTruncation::PerMode { cutoff } => cutoff,
        FockTruncation::TotalExcitation { cutoff } => {
            cutoff - current[..mode].iter().map(|&n| n as u32).sum::<u32>()
        }
    };
    for n in 0..=headroom {
        current[mode] = n as u8;
        fill(out, current, mode + 1, trunc);
    }
    current[mode] = 0;
}
