//! JSON experiment descriptions.

use std::path::{Path, PathBuf};

use fermivqe_core::circuits::Paradigm;
use fermivqe_core::exactsolver::CouplingAxis;
use fermivqe_core::hamiltonian::{HubbardCouplings, HubbardModel};
use fermivqe_core::lattice::{Geometry, GeometryKind, Ordering, RegisterMap};
use fermivqe_core::vqe::{GradientMode, VqeConfig};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    TableSpinless,
    TableSpinful,
    Staircase,
    Scaling,
    Molecule,
    JwStats,
    Resources,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LatticeKind {
    Chain,
    Ladder,
    Rectangle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeometrySpec {
    pub kind: LatticeKind,
    #[serde(default = "one")]
    pub rows: usize,
    pub cols: usize,
}

fn one() -> usize {
    1
}

impl GeometrySpec {
    pub fn build(&self) -> Result<Geometry> {
        let kind = match self.kind {
            LatticeKind::Chain => GeometryKind::Chain,
            LatticeKind::Ladder => GeometryKind::Ladder,
            LatticeKind::Rectangle => GeometryKind::Rectangle,
        };
        let rows = if self.kind == LatticeKind::Ladder { 2 } else { self.rows };
        Ok(Geometry::build(kind, rows, self.cols)?)
    }

    pub fn label(&self) -> String {
        let rows = if self.kind == LatticeKind::Ladder { 2 } else { self.rows };
        let name = match self.kind {
            LatticeKind::Chain => "chain",
            LatticeKind::Ladder => "ladder",
            LatticeKind::Rectangle => "rectangle",
        };
        format!("{name}_{rows}x{}", self.cols)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderingSpec {
    #[default]
    RowMajor,
    Snake,
    SpinBlocked,
}

impl From<OrderingSpec> for Ordering {
    fn from(o: OrderingSpec) -> Self {
        match o {
            OrderingSpec::RowMajor => Ordering::RowMajor,
            OrderingSpec::Snake => Ordering::Snake,
            OrderingSpec::SpinBlocked => Ordering::SpinBlocked,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingSpec {
    #[serde(default = "unit")]
    pub t: f64,
    #[serde(default)]
    pub u: f64,
    #[serde(default)]
    pub v: f64,
    #[serde(default)]
    pub mu: f64,
}

fn unit() -> f64 {
    1.0
}

impl Default for CouplingSpec {
    fn default() -> Self {
        CouplingSpec { t: 1.0, u: 0.0, v: 0.0, mu: 0.0 }
    }
}

impl From<CouplingSpec> for HubbardCouplings {
    fn from(c: CouplingSpec) -> Self {
        HubbardCouplings { t: c.t, u: c.u, v: c.v, mu: c.mu }
    }
}

/// A Hubbard model on a lattice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub geometry: GeometrySpec,
    #[serde(default)]
    pub spinful: bool,
    #[serde(default)]
    pub ordering: OrderingSpec,
    #[serde(default)]
    pub couplings: CouplingSpec,
}

impl ModelSpec {
    pub fn model(&self) -> Result<HubbardModel> {
        let geometry = self.geometry.build()?;
        let registers = RegisterMap::new(&geometry, self.spinful, self.ordering.into());
        Ok(HubbardModel { geometry, registers, couplings: self.couplings.into() })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParadigmSpec {
    Fermionic,
    Qubit,
}

impl From<ParadigmSpec> for Paradigm {
    fn from(p: ParadigmSpec) -> Self {
        match p {
            ParadigmSpec::Fermionic => Paradigm::Fermionic,
            ParadigmSpec::Qubit => Paradigm::Qubit,
        }
    }
}

impl ParadigmSpec {
    pub fn name(self) -> &'static str {
        match self {
            ParadigmSpec::Fermionic => "fermionic",
            ParadigmSpec::Qubit => "qubit",
        }
    }
}

/// One (model, paradigm, L) entry of a table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellSpec {
    pub model: ModelSpec,
    pub paradigm: ParadigmSpec,
    pub layers: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradientSpec {
    FiniteDifference,
    Adjoint,
}

/// Serialized form of the optimizer settings; missing fields take the
/// library defaults.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VqeSettings {
    pub max_iterations: usize,
    pub restarts: usize,
    pub init_scale: f64,
    pub seed: u64,
    pub fd_step: f64,
    pub grad_tolerance: f64,
    pub fidelity_threshold: f64,
    pub gradient: GradientSpec,
}

impl Default for VqeSettings {
    fn default() -> Self {
        VqeConfig::default().into()
    }
}

impl From<VqeConfig> for VqeSettings {
    fn from(c: VqeConfig) -> Self {
        VqeSettings {
            max_iterations: c.max_iterations,
            restarts: c.restarts,
            init_scale: c.init_scale,
            seed: c.seed,
            fd_step: c.fd_step,
            grad_tolerance: c.grad_tolerance,
            fidelity_threshold: c.fidelity_threshold,
            gradient: match c.gradient_mode {
                GradientMode::FiniteDifference => GradientSpec::FiniteDifference,
                GradientMode::Adjoint => GradientSpec::Adjoint,
            },
        }
    }
}

impl From<VqeSettings> for VqeConfig {
    fn from(s: VqeSettings) -> Self {
        VqeConfig {
            max_iterations: s.max_iterations,
            restarts: s.restarts,
            init_scale: s.init_scale,
            seed: s.seed,
            fd_step: s.fd_step,
            grad_tolerance: s.grad_tolerance,
            fidelity_threshold: s.fidelity_threshold,
            gradient_mode: match s.gradient {
                GradientSpec::FiniteDifference => GradientMode::FiniteDifference,
                GradientSpec::Adjoint => GradientMode::Adjoint,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisSpec {
    U,
    V,
}

impl From<AxisSpec> for CouplingAxis {
    fn from(a: AxisSpec) -> Self {
        match a {
            AxisSpec::U => CouplingAxis::U,
            AxisSpec::V => CouplingAxis::V,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StaircaseSpec {
    pub model: ModelSpec,
    pub axis: AxisSpec,
    pub grid: Vec<f64>,
}

/// Size sweep over lattices `rows × cols` for each entry of `cols`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingSpec {
    /// Geometry template; its `cols` is replaced by each sweep size.
    pub model: ModelSpec,
    pub sizes: Vec<usize>,
    pub paradigms: Vec<ParadigmSpec>,
    /// Upper bound of the per-size layer scan.
    pub max_layers: usize,
    #[serde(default = "one")]
    pub min_layers: usize,
}

/// Which spatial-orbital pairs carry two-orbital gates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrbitalGraph {
    /// Neighbouring orbitals in file order.
    #[default]
    Chain,
    /// Every pair of orbitals.
    Complete,
}

/// Occupation of the molecular reference state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MoleculeReference {
    /// One electron per orbital with alternating spins, as for lattice models.
    #[default]
    Neel,
    /// The lowest spin orbitals filled.
    Lowest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MoleculeSpec {
    /// Term-list file; the bundled water Hamiltonian when absent.
    #[serde(default)]
    pub path: Option<PathBuf>,
    /// Overrides the electron count stored in the file.
    #[serde(default)]
    pub num_electrons: Option<usize>,
    #[serde(default)]
    pub orbital_graph: OrbitalGraph,
    #[serde(default)]
    pub reference: MoleculeReference,
    pub fermionic_layers: usize,
    pub qubit_layers: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default)]
    pub cells: Vec<CellSpec>,
    #[serde(default)]
    pub vqe: VqeSettings,
    #[serde(default)]
    pub staircase: Option<StaircaseSpec>,
    #[serde(default)]
    pub scaling: Option<ScalingSpec>,
    #[serde(default)]
    pub molecule: Option<MoleculeSpec>,
    #[serde(default = "default_output")]
    pub output: PathBuf,
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let c: ExperimentConfig = serde_json::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        VqeConfig::from(self.vqe).validate()?;
        for (k, c) in self.cells.iter().enumerate() {
            if c.layers == 0 {
                return bad(format!("cell {k} has zero layers"));
            }
        }
        match self.kind {
            ExperimentKind::TableSpinless | ExperimentKind::TableSpinful | ExperimentKind::Resources
                if self.cells.is_empty() =>
            {
                return bad("table and resource experiments need at least one cell".into());
            }
            ExperimentKind::Staircase if self.staircase.is_none() => return bad("missing \"staircase\" section".into()),
            ExperimentKind::Scaling => {
                let Some(s) = &self.scaling else { return bad("missing \"scaling\" section".into()) };
                if s.sizes.len() < 3 {
                    return bad("a scaling sweep needs at least 3 sizes".into());
                }
                if s.min_layers == 0 || s.max_layers < s.min_layers {
                    return bad("scaling layer bounds must satisfy 1 <= min_layers <= max_layers".into());
                }
            }
            ExperimentKind::Molecule => {
                let Some(m) = &self.molecule else { return bad("missing \"molecule\" section".into()) };
                if m.fermionic_layers == 0 || m.qubit_layers == 0 {
                    return bad("molecule layer counts must be at least 1".into());
                }
                if let Some(p) = &m.path {
                    if !p.exists() {
                        return bad(format!("Hamiltonian file {} does not exist", p.display()));
                    }
                }
            }
            ExperimentKind::JwStats if self.cells.is_empty() && self.molecule.is_none() => {
                return bad("jw_stats needs a cell or a molecule".into());
            }
            _ => {}
        }
        Ok(())
    }
}
