//! Campaign drivers and their table/JSON outputs.
//!
//! Every driver is deterministic for a fixed configuration: restarts are
//! seeded per index and collected in order, and no timings are recorded.

use std::fs;
use std::path::Path;

use fermivqe_core::circuits::{Ansatz, Paradigm, Resources};
use fermivqe_core::exactsolver::{global_ground, ground_in_sector, staircase, GroundSolution, DEGENERACY_TOL};
use fermivqe_core::fit::loglog_fit;
use fermivqe_core::fock::{reference_state, ReferencePattern, StateVector};
use fermivqe_core::hamiltonian::{jw_transform, FermionHamiltonian, HubbardModel};
use fermivqe_core::lattice::{Geometry, Ordering, RegisterMap};
use fermivqe_core::vqe::{RunSummary, RunTrace, Stats, VqeConfig, VqeProblem, CAPPING_RULE};
use serde::Serialize;

use crate::config::{
    CellSpec, ExperimentConfig, LatticeKind, ModelSpec, MoleculeReference, OrbitalGraph, ParadigmSpec,
};
use crate::molecule::{bundled_h2o, load_molecule, MolecularHamiltonian};
use crate::runner::run_restarts;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StatsReport {
    pub mean: f64,
    pub std: f64,
    pub p10: f64,
    pub p90: f64,
}

impl From<Stats> for StatsReport {
    fn from(s: Stats) -> Self {
        StatsReport { mean: s.mean, std: s.std, p10: s.p10, p90: s.p90 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub restarts: usize,
    pub l_i: StatsReport,
    pub reach_fraction: f64,
    pub r_c: f64,
    pub final_energy: StatsReport,
    pub final_fidelity: StatsReport,
    pub mean_evaluations: f64,
    pub line_search_failures: usize,
    pub max_leakage: f64,
}

impl From<&RunSummary> for ConvergenceReport {
    fn from(s: &RunSummary) -> Self {
        ConvergenceReport {
            restarts: s.restarts,
            l_i: s.l_i.into(),
            reach_fraction: s.reach_fraction,
            r_c: s.r_c,
            final_energy: s.final_energy.into(),
            final_fidelity: s.final_fidelity.into(),
            mean_evaluations: s.mean_evaluations,
            line_search_failures: s.line_search_failures,
            max_leakage: s.max_leakage,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ResourceReport {
    pub r_q: usize,
    pub l_p: usize,
    pub layers: usize,
    pub depth_per_layer: usize,
    pub depth_total: usize,
}

impl From<Resources> for ResourceReport {
    fn from(r: Resources) -> Self {
        ResourceReport {
            r_q: r.r_q,
            l_p: r.l_p,
            layers: r.layers,
            depth_per_layer: r.depth_per_layer,
            depth_total: r.depth_total,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroundReport {
    pub energy: f64,
    pub n_f: usize,
    pub degeneracy: usize,
    pub tied_sectors: Vec<usize>,
}

impl From<&GroundSolution> for GroundReport {
    fn from(g: &GroundSolution) -> Self {
        GroundReport { energy: g.energy, n_f: g.n_f, degeneracy: g.degeneracy(), tied_sectors: g.tied_sectors.clone() }
    }
}

/// One (model, paradigm, L) row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellReport {
    pub label: String,
    pub spinful: bool,
    pub paradigm: &'static str,
    pub resources: ResourceReport,
    pub ground: GroundReport,
    pub convergence: Option<ConvergenceReport>,
    /// Set when the cell could not be run; the remaining cells still are.
    pub error: Option<String>,
}

impl CellReport {
    pub fn failed(&self) -> bool {
        self.error.is_some()
    }
}

/// Traces of one cell, kept out of the JSON summary.
#[derive(Debug, Clone)]
pub struct CellTraces {
    pub cell: usize,
    pub traces: Vec<RunTrace>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableReport {
    pub capping_rule: &'static str,
    pub fidelity_threshold: f64,
    pub max_iterations: usize,
    pub cells: Vec<CellReport>,
}

fn reference_for(model: &HubbardModel, n_f: usize) -> Result<StateVector> {
    let modes = model.registers.num_modes();
    let pattern = if model.registers.spinful() {
        ReferencePattern::Mask(model.registers.neel_mask(n_f)?)
    } else {
        ReferencePattern::Spread
    };
    Ok(reference_state(modes, n_f, pattern)?)
}

pub fn cell_ansatz(cell: &CellSpec) -> Result<Ansatz> {
    let model = cell.model.model()?;
    Ok(Ansatz::build(&model.geometry, cell.paradigm.into(), &model.registers, cell.layers)?)
}

/// Resource counts of every cell; no simulation is run.
pub fn resource_table(config: &ExperimentConfig) -> Result<Vec<(CellSpec, ResourceReport)>> {
    config.cells.iter().map(|c| Ok((*c, cell_ansatz(c)?.resources().into()))).collect()
}

struct SolvedModel {
    spec: ModelSpec,
    model: HubbardModel,
    hamiltonian: FermionHamiltonian,
    ground: GroundSolution,
}

/// Solves each distinct model of `cells` once.
fn solve_models(cells: &[CellSpec]) -> Result<Vec<SolvedModel>> {
    let mut solved: Vec<SolvedModel> = Vec::new();
    for c in cells {
        if solved.iter().any(|s| s.spec == c.model) {
            continue;
        }
        let model = c.model.model()?;
        let hamiltonian = model.build()?;
        let ground = global_ground(&hamiltonian)?;
        solved.push(SolvedModel { spec: c.model, model, hamiltonian, ground });
    }
    Ok(solved)
}

fn run_cell(
    cell: &CellSpec,
    solved: &SolvedModel,
    vqe: &VqeConfig,
) -> Result<(ResourceReport, RunSummary, Vec<RunTrace>)> {
    let ansatz = Ansatz::build(&solved.model.geometry, cell.paradigm.into(), &solved.model.registers, cell.layers)?;
    let resources = ansatz.resources();
    let reference = reference_for(&solved.model, solved.ground.n_f)?;
    let problem = VqeProblem::new(&solved.hamiltonian, ansatz, reference, &solved.ground)?;
    let (summary, traces) = run_restarts(&problem, vqe)?;
    Ok((resources.into(), summary, traces))
}

/// Resource and convergence statistics for every cell of the configuration.
pub fn run_table(config: &ExperimentConfig) -> Result<(TableReport, Vec<CellTraces>)> {
    let vqe = VqeConfig::from(config.vqe);
    vqe.validate()?;
    let solved = solve_models(&config.cells)?;
    let mut cells = Vec::with_capacity(config.cells.len());
    let mut all_traces = Vec::new();
    for (k, cell) in config.cells.iter().enumerate() {
        let s = solved.iter().find(|s| s.spec == cell.model).expect("every model was solved");
        let label = cell.model.geometry.label();
        let ground = GroundReport::from(&s.ground);
        let report = match run_cell(cell, s, &vqe) {
            Ok((resources, summary, traces)) => {
                all_traces.push(CellTraces { cell: k, traces });
                CellReport {
                    label,
                    spinful: cell.model.spinful,
                    paradigm: cell.paradigm.name(),
                    resources,
                    ground,
                    convergence: Some((&summary).into()),
                    error: None,
                }
            }
            Err(e) => CellReport {
                label,
                spinful: cell.model.spinful,
                paradigm: cell.paradigm.name(),
                resources: cell_ansatz(cell).map(|a| a.resources().into()).unwrap_or(ResourceReport {
                    r_q: 0,
                    l_p: 0,
                    layers: cell.layers,
                    depth_per_layer: 0,
                    depth_total: 0,
                }),
                ground,
                convergence: None,
                error: Some(e.to_string()),
            },
        };
        cells.push(report);
    }
    let report = TableReport {
        capping_rule: CAPPING_RULE,
        fidelity_threshold: vqe.fidelity_threshold,
        max_iterations: vqe.max_iterations,
        cells,
    };
    Ok((report, all_traces))
}

/// Global ground state of every distinct model (or of the molecule).
pub fn run_ed(config: &ExperimentConfig) -> Result<Vec<(String, GroundReport)>> {
    if let Some(spec) = &config.molecule {
        let mol = load_spec_molecule(spec.path.as_deref())?;
        let ground = match spec.num_electrons.or(mol.num_electrons) {
            Some(n) => sector_ground(&mol.hamiltonian, n)?,
            None => global_ground(&mol.hamiltonian)?,
        };
        return Ok(vec![("molecule".into(), (&ground).into())]);
    }
    Ok(solve_models(&config.cells)?
        .iter()
        .map(|s| {
            let spin = if s.spec.spinful { "spinful" } else { "spinless" };
            (format!("{}_{spin}", s.spec.geometry.label()), (&s.ground).into())
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StaircaseRow {
    pub coupling: f64,
    pub energy: f64,
    pub n_f: usize,
}

pub fn run_staircase(config: &ExperimentConfig) -> Result<Vec<StaircaseRow>> {
    let spec = config.staircase.as_ref().ok_or_else(|| Error::Config("missing \"staircase\" section".into()))?;
    let model = spec.model.model()?;
    Ok(staircase(&model, spec.axis.into(), &spec.grid)?
        .into_iter()
        .map(|p| StaircaseRow { coupling: p.coupling, energy: p.energy, n_f: p.n_f })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ResourceKind {
    #[serde(rename = "R_Q")]
    Quantum,
    #[serde(rename = "R_C")]
    Classical,
}

impl ResourceKind {
    pub fn name(self) -> &'static str {
        match self {
            ResourceKind::Quantum => "R_Q",
            ResourceKind::Classical => "R_C",
        }
    }
}

/// Power law `R ∼ N^β` fitted on log–log axes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingFit {
    pub paradigm: &'static str,
    pub resource: ResourceKind,
    pub exponent: f64,
    pub stderr: f64,
    pub points: Vec<(f64, f64)>,
}

/// Outcome of the layer scan at one system size.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingPoint {
    pub paradigm: &'static str,
    pub sites: usize,
    /// Smallest converging layer count, `None` if the scan budget ran out.
    pub layers: Option<usize>,
    pub r_q: usize,
    pub l_p: usize,
    pub mean_l_i: f64,
    pub r_c: f64,
    pub mean_fidelity: f64,
    /// Mean final fidelity of every scanned layer count, smallest first.
    pub scan: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingReport {
    pub capping_rule: &'static str,
    pub fidelity_threshold: f64,
    pub points: Vec<ScalingPoint>,
    pub fits: Vec<ScalingFit>,
    /// Fits that could not be formed, with the reason.
    pub skipped_fits: Vec<String>,
}

/// Layer scan per size and paradigm, then log–log fits of `R_Q` and `R_C`
/// over the converged sizes.
pub fn run_scaling(config: &ExperimentConfig) -> Result<ScalingReport> {
    let spec = config.scaling.as_ref().ok_or_else(|| Error::Config("missing \"scaling\" section".into()))?;
    let vqe = VqeConfig::from(config.vqe);
    vqe.validate()?;
    let mut points = Vec::new();
    for &size in &spec.sizes {
        let mut model_spec = spec.model;
        model_spec.geometry.cols = size;
        let model = model_spec.model()?;
        let hamiltonian = model.build()?;
        let ground = global_ground(&hamiltonian)?;
        let reference = reference_for(&model, ground.n_f)?;
        for &paradigm in &spec.paradigms {
            let mut point = ScalingPoint {
                paradigm: paradigm.name(),
                sites: model.geometry.num_sites(),
                layers: None,
                r_q: 0,
                l_p: 0,
                mean_l_i: f64::NAN,
                r_c: f64::NAN,
                mean_fidelity: f64::NAN,
                scan: Vec::new(),
            };
            for layers in spec.min_layers..=spec.max_layers {
                let ansatz = Ansatz::build(&model.geometry, paradigm.into(), &model.registers, layers)?;
                let resources = ansatz.resources();
                let problem = VqeProblem::new(&hamiltonian, ansatz, reference.clone(), &ground)?;
                let (summary, _) = run_restarts(&problem, &vqe)?;
                point.scan.push((layers, summary.final_fidelity.mean));
                if summary.final_fidelity.mean >= vqe.fidelity_threshold {
                    point.layers = Some(layers);
                    point.r_q = resources.r_q;
                    point.l_p = resources.l_p;
                    point.mean_l_i = summary.l_i.mean;
                    point.r_c = summary.r_c;
                    point.mean_fidelity = summary.final_fidelity.mean;
                    break;
                }
            }
            points.push(point);
        }
    }
    let mut fits = Vec::new();
    let mut skipped_fits = Vec::new();
    for &paradigm in &spec.paradigms {
        let converged: Vec<&ScalingPoint> =
            points.iter().filter(|p| p.paradigm == paradigm.name() && p.layers.is_some()).collect();
        for kind in [ResourceKind::Quantum, ResourceKind::Classical] {
            let data: Vec<(f64, f64)> = converged
                .iter()
                .map(|p| (p.sites as f64, if kind == ResourceKind::Quantum { p.r_q as f64 } else { p.r_c }))
                .collect();
            match loglog_fit(&data) {
                Ok(f) => fits.push(ScalingFit {
                    paradigm: paradigm.name(),
                    resource: kind,
                    exponent: f.exponent,
                    stderr: f.stderr,
                    points: f.points,
                }),
                Err(e) => skipped_fits.push(format!("{} {}: {e}", paradigm.name(), kind.name())),
            }
        }
    }
    Ok(ScalingReport {
        capping_rule: CAPPING_RULE,
        fidelity_threshold: vqe.fidelity_threshold,
        points,
        fits,
        skipped_fits,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MoleculeReport {
    pub modes: usize,
    pub ground: GroundReport,
    /// Energy quoted in the Hamiltonian file.
    pub reference_energy: Option<f64>,
    pub capping_rule: &'static str,
    pub fidelity_threshold: f64,
    pub fermionic: CellReport,
    pub qubit: CellReport,
}

fn load_spec_molecule(path: Option<&Path>) -> Result<MolecularHamiltonian> {
    match path {
        Some(p) => load_molecule(p),
        None => Ok(bundled_h2o()),
    }
}

/// Ground state restricted to `n_f` particles, packaged like a global one.
fn sector_ground(h: &FermionHamiltonian, n_f: usize) -> Result<GroundSolution> {
    let (energy, vectors) = ground_in_sector(h, n_f)?;
    Ok(GroundSolution {
        energy,
        n_f,
        vectors,
        degeneracy_tol: DEGENERACY_TOL,
        sector_energies: Vec::new(),
        tied_sectors: Vec::new(),
    })
}

/// Both paradigms on a molecular Hamiltonian. Spin orbitals `2p, 2p+1` are
/// the two spins of site `p` of the orbital graph, so the ansätze are the
/// spinful lattice circuits on that graph.
pub fn run_molecule(config: &ExperimentConfig) -> Result<(MoleculeReport, Vec<CellTraces>)> {
    let spec = config.molecule.as_ref().ok_or_else(|| Error::Config("missing \"molecule\" section".into()))?;
    let vqe = VqeConfig::from(config.vqe);
    vqe.validate()?;
    let mol = load_spec_molecule(spec.path.as_deref())?;
    let h = &mol.hamiltonian;
    if h.modes() % 2 != 0 || h.modes() < 4 {
        return Err(Error::Format(format!("{} modes cannot be paired into spatial orbitals", h.modes())));
    }
    let ground = match spec.num_electrons.or(mol.num_electrons) {
        Some(n) => sector_ground(h, n)?,
        None => global_ground(h)?,
    };
    let orbitals = h.modes() / 2;
    let geometry = match spec.orbital_graph {
        OrbitalGraph::Chain => Geometry::chain(orbitals)?,
        OrbitalGraph::Complete => {
            let pairs: Vec<_> = (0..orbitals).flat_map(|a| (a + 1..orbitals).map(move |b| (a, b))).collect();
            Geometry::custom(orbitals, &pairs)?
        }
    };
    let registers = RegisterMap::new(&geometry, true, Ordering::RowMajor);
    let pattern = match spec.reference {
        MoleculeReference::Neel => ReferencePattern::Mask(registers.neel_mask(ground.n_f)?),
        MoleculeReference::Lowest => ReferencePattern::Lowest,
    };
    let reference = reference_state(h.modes(), ground.n_f, pattern)?;
    let mut traces = Vec::new();
    let mut run = |paradigm: ParadigmSpec, layers: usize, index: usize| -> Result<CellReport> {
        let ansatz = Ansatz::build(&geometry, paradigm.into(), &registers, layers)?;
        let resources = ansatz.resources();
        let problem = VqeProblem::new(h, ansatz, reference.clone(), &ground)?;
        let (summary, t) = run_restarts(&problem, &vqe)?;
        traces.push(CellTraces { cell: index, traces: t });
        Ok(CellReport {
            label: "molecule".into(),
            spinful: true,
            paradigm: paradigm.name(),
            resources: resources.into(),
            ground: (&ground).into(),
            convergence: Some((&summary).into()),
            error: None,
        })
    };
    let fermionic = run(ParadigmSpec::Fermionic, spec.fermionic_layers, 0)?;
    let qubit = run(ParadigmSpec::Qubit, spec.qubit_layers, 1)?;
    let report = MoleculeReport {
        modes: h.modes(),
        ground: (&ground).into(),
        reference_energy: mol.reference_energy,
        capping_rule: CAPPING_RULE,
        fidelity_threshold: vqe.fidelity_threshold,
        fermionic,
        qubit,
    };
    Ok((report, traces))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JwRow {
    pub term_index: usize,
    pub weight: u32,
    pub coefficient: f64,
    pub label: String,
}

/// Pauli strings of the Jordan–Wigner image of the first cell's model, or of
/// the molecule when there is no cell.
pub fn jw_stats(config: &ExperimentConfig) -> Result<Vec<JwRow>> {
    let h = match config.cells.first() {
        Some(c) => c.model.model()?.build()?,
        None => {
            let spec =
                config.molecule.as_ref().ok_or_else(|| Error::Config("jw_stats needs a cell or a molecule".into()))?;
            load_spec_molecule(spec.path.as_deref())?.hamiltonian
        }
    };
    let sum = jw_transform(&h);
    Ok(sum
        .strings
        .iter()
        .enumerate()
        .map(|(k, p)| JwRow { term_index: k, weight: p.weight(), coefficient: p.coeff, label: p.label(sum.qubits) })
        .collect())
}

fn lattice_name(kind: LatticeKind) -> &'static str {
    match kind {
        LatticeKind::Chain => "chain",
        LatticeKind::Ladder => "ladder",
        LatticeKind::Rectangle => "rectangle",
    }
}

fn paradigm_name(p: Paradigm) -> &'static str {
    match p {
        Paradigm::Fermionic => "fermionic",
        Paradigm::Qubit => "qubit",
    }
}

// ---- writers ----

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn fmt(x: f64) -> String {
    format!("{x}")
}

pub fn write_resources_csv<W: std::io::Write>(out: W, rows: &[(CellSpec, ResourceReport)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "geometry",
        "rows",
        "cols",
        "spinful",
        "paradigm",
        "layers",
        "r_q",
        "l_p",
        "depth_per_layer",
        "depth",
    ])?;
    for (c, r) in rows {
        let g = c.model.geometry;
        w.write_record([
            lattice_name(g.kind).to_string(),
            (if g.kind == LatticeKind::Ladder { 2 } else { g.rows }).to_string(),
            g.cols.to_string(),
            c.model.spinful.to_string(),
            paradigm_name(c.paradigm.into()).to_string(),
            r.layers.to_string(),
            r.r_q.to_string(),
            r.l_p.to_string(),
            r.depth_per_layer.to_string(),
            r.depth_total.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))
}

fn table_rows(w: &mut csv::Writer<fs::File>, cells: &[CellReport]) -> Result<()> {
    w.write_record([
        "cell",
        "geometry",
        "spinful",
        "paradigm",
        "layers",
        "r_q",
        "l_p",
        "depth",
        "n_f",
        "e0",
        "l_i_mean",
        "l_i_std",
        "l_i_p10",
        "l_i_p90",
        "reach_fraction",
        "r_c",
        "energy_mean",
        "energy_std",
        "fidelity_mean",
        "fidelity_std",
        "line_search_failures",
        "failed",
    ])?;
    for (k, c) in cells.iter().enumerate() {
        let mut rec = vec![
            k.to_string(),
            c.label.clone(),
            c.spinful.to_string(),
            c.paradigm.to_string(),
            c.resources.layers.to_string(),
            c.resources.r_q.to_string(),
            c.resources.l_p.to_string(),
            c.resources.depth_total.to_string(),
            c.ground.n_f.to_string(),
            fmt(c.ground.energy),
        ];
        match &c.convergence {
            Some(s) => rec.extend([
                fmt(s.l_i.mean),
                fmt(s.l_i.std),
                fmt(s.l_i.p10),
                fmt(s.l_i.p90),
                fmt(s.reach_fraction),
                fmt(s.r_c),
                fmt(s.final_energy.mean),
                fmt(s.final_energy.std),
                fmt(s.final_fidelity.mean),
                fmt(s.final_fidelity.std),
                s.line_search_failures.to_string(),
            ]),
            None => rec.extend(std::iter::repeat_n(String::new(), 11)),
        }
        rec.push(c.failed().to_string());
        w.write_record(&rec)?;
    }
    Ok(())
}

fn trace_rows(w: &mut csv::Writer<fs::File>, traces: &[CellTraces]) -> Result<()> {
    w.write_record(["cell", "restart", "iteration", "energy", "fidelity"])?;
    for ct in traces {
        for t in &ct.traces {
            for r in &t.records {
                w.write_record([
                    ct.cell.to_string(),
                    t.restart.to_string(),
                    r.iteration.to_string(),
                    fmt(r.energy),
                    fmt(r.fidelity),
                ])?;
            }
        }
    }
    Ok(())
}

fn finish(mut w: csv::Writer<fs::File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

/// `summary.json`, `table.csv` and `trace.csv`.
pub fn write_table(dir: &Path, report: &TableReport, traces: &[CellTraces]) -> Result<()> {
    create_dir(dir)?;
    write_json(&dir.join("summary.json"), report)?;
    let path = dir.join("table.csv");
    let mut w = csv_writer(&path)?;
    table_rows(&mut w, &report.cells)?;
    finish(w, &path)?;
    let path = dir.join("trace.csv");
    let mut w = csv_writer(&path)?;
    trace_rows(&mut w, traces)?;
    finish(w, &path)
}

/// `summary.json`, `table.csv` (fermionic row first) and `trace.csv`.
pub fn write_molecule(dir: &Path, report: &MoleculeReport, traces: &[CellTraces]) -> Result<()> {
    create_dir(dir)?;
    write_json(&dir.join("summary.json"), report)?;
    let path = dir.join("table.csv");
    let mut w = csv_writer(&path)?;
    table_rows(&mut w, &[report.fermionic.clone(), report.qubit.clone()])?;
    finish(w, &path)?;
    let path = dir.join("trace.csv");
    let mut w = csv_writer(&path)?;
    trace_rows(&mut w, traces)?;
    finish(w, &path)
}

pub fn write_staircase(dir: &Path, rows: &[StaircaseRow]) -> Result<()> {
    create_dir(dir)?;
    let path = dir.join("staircase.csv");
    let mut w = csv_writer(&path)?;
    w.write_record(["coupling", "e0", "n_f"])?;
    for r in rows {
        w.write_record([fmt(r.coupling), fmt(r.energy), r.n_f.to_string()])?;
    }
    finish(w, &path)?;
    write_json(&dir.join("summary.json"), &rows)
}

/// `scaling.csv` holds one row per (paradigm, size); fits go to `summary.json`.
pub fn write_scaling(dir: &Path, report: &ScalingReport) -> Result<()> {
    create_dir(dir)?;
    write_json(&dir.join("summary.json"), report)?;
    let path = dir.join("scaling.csv");
    let mut w = csv_writer(&path)?;
    w.write_record(["paradigm", "sites", "layers", "r_q", "l_p", "l_i_mean", "r_c", "fidelity_mean", "converged"])?;
    for p in &report.points {
        w.write_record([
            p.paradigm.to_string(),
            p.sites.to_string(),
            p.layers.map(|l| l.to_string()).unwrap_or_default(),
            p.r_q.to_string(),
            p.l_p.to_string(),
            fmt(p.mean_l_i),
            fmt(p.r_c),
            fmt(p.mean_fidelity),
            p.layers.is_some().to_string(),
        ])?;
    }
    finish(w, &path)
}

pub fn write_jw_stats<W: std::io::Write>(out: W, rows: &[JwRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["term_index", "weight", "coefficient", "label"])?;
    for r in rows {
        w.write_record([r.term_index.to_string(), r.weight.to_string(), fmt(r.coefficient), r.label.clone()])?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))
}
