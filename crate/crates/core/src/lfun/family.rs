//! Zero lists for every primitive character of every modulus q ∈ (Q, 2Q).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::lfunction::lfunction_data;
use super::zeros::{scan_modulus, ZeroScan};
use crate::characters::{character_group, CharacterId};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharacterZeros {
    pub id: CharacterId,
    pub conductor: u64,
    pub parity: u32,
    pub scan: ZeroScan,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModulusZeros {
    pub modulus: u64,
    pub characters: Vec<CharacterZeros>,
}

impl ModulusZeros {
    /// Scan all primitive characters mod q on a shared grid.
    pub fn scan(q: u64, height: f64, grid_step: f64) -> Result<Self> {
        let group = character_group(q)?;
        let data = group
            .primitive()
            .map(lfunction_data)
            .collect::<Result<Vec<_>>>()?;
        let scans = scan_modulus(q, &data, height, grid_step)?;
        let characters = data
            .iter()
            .zip(scans)
            .map(|(d, scan)| CharacterZeros {
                id: d.character.id(),
                conductor: d.character.conductor(),
                parity: d.parity,
                scan,
            })
            .collect();
        Ok(Self {
            modulus: q,
            characters,
        })
    }

    pub fn is_complete(&self) -> bool {
        self.characters.iter().all(|c| c.scan.complete)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroFamily {
    pub scale: f64,
    pub height: f64,
    pub moduli: Vec<ModulusZeros>,
}

/// Integers q with Q < q < 2Q.
pub fn family_moduli(scale: f64) -> Vec<u64> {
    if !(scale > 0.0) {
        return Vec::new();
    }
    let lo = scale.floor() as u64 + 1;
    let hi = (2.0 * scale).ceil() as u64;
    (lo..hi).collect()
}

impl ZeroFamily {
    /// Error naming the first character whose scan is incomplete or shorter than `height`.
    pub fn require_complete(&self, height: f64) -> Result<()> {
        for m in &self.moduli {
            for c in &m.characters {
                if !c.scan.complete || c.scan.height < height {
                    return Err(Error::IncompleteZeros {
                        modulus: m.modulus,
                        index: index_of(&c.id),
                        height,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn character_count(&self) -> usize {
        self.moduli.iter().map(|m| m.characters.len()).sum()
    }

    pub fn zero_count(&self) -> usize {
        self.moduli
            .iter()
            .flat_map(|m| &m.characters)
            .map(|c| c.scan.count())
            .sum()
    }
}

fn index_of(id: &CharacterId) -> usize {
    character_group(id.modulus)
        .ok()
        .and_then(|g| g.get(&id.tuple).map(|c| c.index()))
        .unwrap_or(usize::MAX)
}

/// Scan the family at scale Q; moduli run in parallel and come back in increasing order.
pub fn scan_family(scale: f64, height: f64, grid_step: f64) -> Result<ZeroFamily> {
    let moduli = family_moduli(scale)
        .into_par_iter()
        .map(|q| ModulusZeros::scan(q, height, grid_step))
        .collect::<Result<Vec<_>>>()?;
    Ok(ZeroFamily {
        scale,
        height,
        moduli,
    })
}
