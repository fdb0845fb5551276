//! Second-quantized Hamiltonians stored as JSON term lists.
//!
//! ```json
//! {"num_modes": 8, "num_electrons": 4, "reference_energy": -74.97,
//!  "terms": [{"c": [re, im], "ops": [[mode, "+"], [mode, "-"]]}]}
//! ```
//!
//! `"+"` is a creation operator and `"-"` (or the typographic minus `"−"`) an
//! annihilation; operators apply right to left as written.

use std::path::Path;

use fermivqe_core::hamiltonian::{FermionHamiltonian, FermionOp, FermionTerm};
use fermivqe_core::C64;
use serde::Deserialize;

use crate::{Error, Result};

pub const BUNDLED_H2O: &str = include_str!("../../../data/h2o_cas44_sto3g.json");

#[derive(Debug, Clone)]
pub struct MolecularHamiltonian {
    pub hamiltonian: FermionHamiltonian,
    pub num_electrons: Option<usize>,
    /// Energy quoted by the generator of the file, if any.
    pub reference_energy: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    num_modes: usize,
    #[serde(default)]
    num_electrons: Option<usize>,
    #[serde(default)]
    reference_energy: Option<f64>,
    terms: Vec<RawTerm>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTerm {
    c: [f64; 2],
    ops: Vec<(usize, String)>,
}

pub fn parse_molecule(text: &str) -> Result<MolecularHamiltonian> {
    let raw: RawFile = serde_json::from_str(text)?;
    let mut terms = Vec::with_capacity(raw.terms.len());
    for (k, t) in raw.terms.iter().enumerate() {
        let ops = t
            .ops
            .iter()
            .map(|(mode, kind)| match kind.as_str() {
                "+" => Ok(FermionOp::create(*mode)),
                "-" | "\u{2212}" => Ok(FermionOp::annihilate(*mode)),
                other => Err(Error::Format(format!("term {k}: unknown operator kind {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        terms.push(FermionTerm::new(C64::new(t.c[0], t.c[1]), ops));
    }
    if let Some(n) = raw.num_electrons {
        if n > raw.num_modes {
            return Err(Error::Format(format!("{n} electrons do not fit in {} modes", raw.num_modes)));
        }
    }
    let hamiltonian = FermionHamiltonian::new(raw.num_modes, terms)?;
    Ok(MolecularHamiltonian { hamiltonian, num_electrons: raw.num_electrons, reference_energy: raw.reference_energy })
}

pub fn load_molecule(path: &Path) -> Result<MolecularHamiltonian> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_molecule(&text)
}

/// STO-3G water in a four-orbital, four-electron active space.
pub fn bundled_h2o() -> MolecularHamiltonian {
    parse_molecule(BUNDLED_H2O).expect("bundled Hamiltonian is well formed")
}
