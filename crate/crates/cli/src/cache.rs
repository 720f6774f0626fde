//! On-disk zero cache: one JSON-lines file per modulus plus a manifest describing the
//! accuracy envelope the records were computed under.
//!
//! A modulus file holds a header line, one record per primitive character and a footer
//! carrying the record and ordinate counts, so a truncated file is always detected.
//! Ordinates are written as decimal strings with 17 significant digits.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use dirichlet_core::characters::CharacterId;
use dirichlet_core::lfun::{family_moduli, CharacterZeros, ModulusZeros, ZeroFamily, MAX_GRID_STEP};
use dirichlet_core::{ZeroRecord, ZeroScan};

pub const CACHE_ENV: &str = "DIRICHLET_ZERO_CACHE";
pub const DEFAULT_DIR: &str = ".zero-cache";
pub const FORMAT_VERSION: u32 = 1;
const MANIFEST: &str = "manifest.json";

#[derive(Debug, Error)]
pub enum CacheError {
    #[error("no cached zeros for q = {modulus} up to T = {height}")]
    Missing { modulus: u64, height: f64 },
    #[error("no cached record for character {id} up to T = {height}")]
    MissingCharacter { id: CharacterId, height: f64 },
    #[error("cache envelope mismatch: stored {stored:?}, requested {requested:?}")]
    EnvelopeMismatch { stored: Envelope, requested: Envelope },
    #[error("corrupt cache file {path}: {reason}")]
    Corrupt { path: PathBuf, reason: String },
    #[error("cached scan for q = {modulus} is incomplete")]
    Incomplete { modulus: u64 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Core(#[from] dirichlet_core::Error),
}

pub type CacheResult<T> = std::result::Result<T, CacheError>;

/// Everything that has to agree for a stored record to be reused.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub format: u32,
    pub code_version: String,
    pub grid_step: f64,
}

impl Envelope {
    pub fn current(grid_step: f64) -> Self {
        Self {
            format: FORMAT_VERSION,
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            grid_step,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    envelope: Envelope,
}

mod digits17 {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(xs: &[f64], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(xs.iter().map(|x| format!("{x:.16e}")))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        let raw: Vec<String> = Vec::deserialize(d)?;
        raw.iter().map(|s| s.parse::<f64>().map_err(D::Error::custom)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Header {
    modulus: u64,
    height: f64,
    characters: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Record {
    q: u64,
    tuple: Vec<u32>,
    conductor: u64,
    parity: u32,
    t_max: f64,
    grid_step: f64,
    complete: bool,
    main_term: f64,
    slack: f64,
    #[serde(with = "digits17")]
    ordinates: Vec<f64>,
    #[serde(with = "digits17")]
    brackets: Vec<f64>,
    multiplicities: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Footer {
    records: usize,
    ordinates: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum Line {
    Header(Header),
    Record(Record),
    Footer(Footer),
}

impl Record {
    fn from_zeros(modulus: u64, c: &CharacterZeros) -> Self {
        let s = &c.scan;
        Self {
            q: modulus,
            tuple: c.id.tuple.clone(),
            conductor: c.conductor,
            parity: c.parity,
            t_max: s.height,
            grid_step: s.grid_step,
            complete: s.complete,
            main_term: s.main_term,
            slack: s.slack,
            ordinates: s.zeros.iter().map(|z| z.ordinate).collect(),
            brackets: s.zeros.iter().map(|z| z.bracket).collect(),
            multiplicities: s.zeros.iter().map(|z| z.multiplicity).collect(),
        }
    }

    fn into_zeros(self) -> CharacterZeros {
        let zeros = self
            .ordinates
            .iter()
            .zip(&self.brackets)
            .zip(&self.multiplicities)
            .map(|((&ordinate, &bracket), &multiplicity)| ZeroRecord {
                ordinate,
                bracket,
                multiplicity,
            })
            .collect();
        CharacterZeros {
            id: CharacterId {
                modulus: self.q,
                tuple: self.tuple,
            },
            conductor: self.conductor,
            parity: self.parity,
            scan: ZeroScan {
                zeros,
                height: self.t_max,
                grid_step: self.grid_step,
                main_term: self.main_term,
                slack: self.slack,
                complete: self.complete,
            },
        }
    }
}

#[derive(Debug, Clone)]
pub struct ZeroCache {
    dir: PathBuf,
    envelope: Envelope,
}

impl ZeroCache {
    /// Open (creating if needed) a cache directory. An existing manifest must match `envelope`.
    pub fn open(dir: impl Into<PathBuf>, envelope: Envelope) -> CacheResult<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        let path = dir.join(MANIFEST);
        match fs::read(&path) {
            Ok(bytes) => {
                let m: Manifest = serde_json::from_slice(&bytes).map_err(|e| CacheError::Corrupt {
                    path: path.clone(),
                    reason: e.to_string(),
                })?;
                if m.envelope != envelope {
                    return Err(CacheError::EnvelopeMismatch {
                        stored: m.envelope,
                        requested: envelope,
                    });
                }
            }
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                let body = serde_json::to_vec_pretty(&Manifest {
                    envelope: envelope.clone(),
                })?;
                write_atomic(&dir, &path, &body)?;
            }
            Err(e) => return Err(e.into()),
        }
        Ok(Self { dir, envelope })
    }

    /// Directory from the environment, falling back to `.zero-cache`.
    pub fn default_dir() -> PathBuf {
        std::env::var_os(CACHE_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from(DEFAULT_DIR))
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn envelope(&self) -> &Envelope {
        &self.envelope
    }

    fn path(&self, q: u64) -> PathBuf {
        self.dir.join(format!("q{q:06}.jsonl"))
    }

    /// Write all primitive characters of one modulus. Only complete scans are accepted.
    pub fn write(&self, m: &ModulusZeros) -> CacheResult<()> {
        if !m.is_complete() {
            return Err(CacheError::Incomplete { modulus: m.modulus });
        }
        let height = m
            .characters
            .iter()
            .map(|c| c.scan.height)
            .fold(f64::INFINITY, f64::min);
        let mut body = Vec::new();
        let header = Line::Header(Header {
            modulus: m.modulus,
            height: if m.characters.is_empty() { f64::MAX } else { height },
            characters: m.characters.len(),
        });
        serde_json::to_writer(&mut body, &header)?;
        body.push(b'\n');
        let mut ordinates = 0;
        for c in &m.characters {
            let r = Record::from_zeros(m.modulus, c);
            ordinates += r.ordinates.len();
            serde_json::to_writer(&mut body, &Line::Record(r))?;
            body.push(b'\n');
        }
        let footer = Line::Footer(Footer {
            records: m.characters.len(),
            ordinates,
        });
        serde_json::to_writer(&mut body, &footer)?;
        body.push(b'\n');
        write_atomic(&self.dir, &self.path(m.modulus), &body)
    }

    /// All primitive characters of q, scanned at least to `height`.
    pub fn read(&self, q: u64, height: f64) -> CacheResult<ModulusZeros> {
        let path = self.path(q);
        let file = match fs::File::open(&path) {
            Ok(f) => f,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                return Err(CacheError::Missing { modulus: q, height })
            }
            Err(e) => return Err(e.into()),
        };
        let corrupt = |reason: String| CacheError::Corrupt {
            path: path.clone(),
            reason,
        };
        let mut header = None;
        let mut footer = None;
        let mut records = Vec::new();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line?;
            if footer.is_some() {
                return Err(corrupt(format!("data after footer at line {}", i + 1)));
            }
            let parsed: Line = serde_json::from_str(&line).map_err(|e| corrupt(format!("line {}: {e}", i + 1)))?;
            match parsed {
                Line::Header(h) if i == 0 => header = Some(h),
                Line::Record(r) if header.is_some() => records.push(r),
                Line::Footer(f) if header.is_some() => footer = Some(f),
                _ => return Err(corrupt(format!("unexpected line {}", i + 1))),
            }
        }
        let header = header.ok_or_else(|| corrupt("missing header".into()))?;
        let footer = footer.ok_or_else(|| corrupt("missing footer (truncated file?)".into()))?;
        let ordinates: usize = records.iter().map(|r| r.ordinates.len()).sum();
        if header.modulus != q
            || footer.records != records.len()
            || header.characters != records.len()
            || footer.ordinates != ordinates
        {
            return Err(corrupt("header/footer counts do not match the records".into()));
        }
        for r in &records {
            if r.q != q || r.ordinates.len() != r.brackets.len() || r.ordinates.len() != r.multiplicities.len() {
                return Err(corrupt(format!("malformed record for {:?}", r.tuple)));
            }
            if r.ordinates.windows(2).any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less)) {
                return Err(corrupt(format!("ordinates not strictly increasing for {:?}", r.tuple)));
            }
            if !r.complete {
                return Err(CacheError::Incomplete { modulus: q });
            }
        }
        if header.height < height {
            return Err(CacheError::Missing { modulus: q, height });
        }
        Ok(ModulusZeros {
            modulus: q,
            characters: records.into_iter().map(Record::into_zeros).collect(),
        })
    }

    /// One character's record.
    pub fn read_character(&self, id: &CharacterId, height: f64) -> CacheResult<CharacterZeros> {
        let m = self.read(id.modulus, height)?;
        m.characters
            .into_iter()
            .find(|c| c.id == *id)
            .ok_or_else(|| CacheError::MissingCharacter {
                id: id.clone(),
                height,
            })
    }

    /// Read modulus q, scanning and storing it first when `build` is set.
    pub fn get_or_build(&self, q: u64, height: f64, build: bool) -> CacheResult<ModulusZeros> {
        match self.read(q, height) {
            Err(CacheError::Missing { .. }) if build => {
                let m = ModulusZeros::scan(q, height, self.envelope.grid_step)?;
                if !m.is_complete() {
                    return Err(CacheError::Incomplete { modulus: q });
                }
                self.write(&m)?;
                Ok(m)
            }
            other => other,
        }
    }

    /// The family q ∈ (Q, 2Q) to height T; one modulus per parallel job.
    pub fn family(&self, scale: f64, height: f64, build: bool) -> CacheResult<ZeroFamily> {
        let moduli = family_moduli(scale)
            .into_par_iter()
            .map(|q| self.get_or_build(q, height, build))
            .collect::<CacheResult<Vec<_>>>()?;
        Ok(ZeroFamily {
            scale,
            height,
            moduli,
        })
    }
}

/// Write to a temporary file in `dir` and rename over `path`.
fn write_atomic(dir: &Path, path: &Path, body: &[u8]) -> CacheResult<()> {
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(body)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| CacheError::Io(e.error))?;
    Ok(())
}

/// Largest grid step a cache may be opened with.
pub fn check_grid_step(step: f64) -> CacheResult<f64> {
    if !(step > 0.0 && step <= MAX_GRID_STEP) {
        return Err(CacheError::Core(dirichlet_core::Error::InvalidConfig(format!(
            "grid step {step} must lie in (0, {MAX_GRID_STEP}]"
        ))));
    }
    Ok(step)
}

#[cfg(test)]
mod tests {
    #[test]
    fn seventeen_digits_round_trip() {
        let xs = [14.134_725_141_734_693, -0.1, 1.0 / 3.0, 1e-300, f64::MAX];
        let s = serde_json::to_string(&xs.iter().map(|x| format!("{x:.16e}")).collect::<Vec<_>>()).unwrap();
        let back: Vec<String> = serde_json::from_str(&s).unwrap();
        for (a, b) in xs.iter().zip(back) {
            assert_eq!(a.to_bits(), b.parse::<f64>().unwrap().to_bits());
        }
    }
}
