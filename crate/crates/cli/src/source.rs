use std::fs;
use std::path::PathBuf;
use std::str::FromStr;

use latagg_core::{Lattice, LatticeError};

/// Where a lattice comes from on the command line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LatticeSource {
    Chain(usize),
    M(usize),
    N5,
    Boolean(usize),
    File(PathBuf),
}

impl FromStr for LatticeSource {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let num = |t: &str| {
            t.parse::<usize>()
                .map_err(|_| format!("invalid size `{t}` in lattice source `{s}`"))
        };
        match s.split_once(':') {
            Some(("chain", n)) => Ok(LatticeSource::Chain(num(n)?)),
            Some(("m", k)) => Ok(LatticeSource::M(num(k)?)),
            Some(("boolean", k)) => Ok(LatticeSource::Boolean(num(k)?)),
            Some(("file", p)) if !p.is_empty() => Ok(LatticeSource::File(PathBuf::from(p))),
            None if s == "n5" => Ok(LatticeSource::N5),
            _ => Err(format!(
                "unknown lattice source `{s}` (expected chain:<n>, m:<k>, n5, boolean:<k> or file:<path>)"
            )),
        }
    }
}

impl LatticeSource {
    pub fn load(&self) -> Result<Lattice, super::Failure> {
        let lattice = match self {
            LatticeSource::Chain(n) => Lattice::chain(*n),
            LatticeSource::M(k) => Lattice::m_lattice(*k),
            LatticeSource::N5 => Ok(Lattice::n5()),
            LatticeSource::Boolean(k) => Lattice::boolean(*k),
            LatticeSource::File(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| super::Failure::Invalid(format!("{}: {e}", path.display())))?;
                Lattice::parse(&text)
            }
        };
        lattice.map_err(|e: LatticeError| super::Failure::Invalid(e.to_string()))
    }
}
