//! Lattice geometries, register layouts and parallel bond schedules.
//!
//! Sites are numbered row-major from the top-left corner. Bonds are stored
//! canonically (`a < b`) in enumeration order: for each site, the bond to its
//! right neighbour and then the bond to the site below.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GeometryKind {
    Chain,
    Ladder,
    Rectangle,
    Custom,
}

/// Unordered nearest-neighbour pair, stored with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bond {
    pub a: usize,
    pub b: usize,
}

impl Bond {
    pub fn new(a: usize, b: usize) -> Result<Self> {
        if a == b {
            return Err(Error::Geometry(format!("self-loop bond on site {a}")));
        }
        Ok(Bond { a: a.min(b), b: a.max(b) })
    }

    pub fn touches(&self, site: usize) -> bool {
        self.a == site || self.b == site
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Geometry {
    kind: GeometryKind,
    rows: usize,
    cols: usize,
    bonds: Vec<Bond>,
}

impl Geometry {
    /// Builds one of the rectangular families. `chain` requires `rows == 1`,
    /// `ladder` requires `rows == 2`.
    pub fn build(kind: GeometryKind, rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Geometry(format!("rows and cols must be positive, got {rows}x{cols}")));
        }
        if rows * cols < 2 {
            return Err(Error::Geometry("a lattice needs at least two sites".into()));
        }
        match kind {
            GeometryKind::Chain if rows != 1 => {
                return Err(Error::Geometry(format!("a chain has one row, got {rows}")))
            }
            GeometryKind::Ladder if rows != 2 => {
                return Err(Error::Geometry(format!("a ladder has two rows, got {rows}")))
            }
            GeometryKind::Custom => return Err(Error::Geometry("custom geometries need an explicit bond list".into())),
            _ => {}
        }
        let mut bonds = Vec::with_capacity(rows * (cols - 1) + (rows - 1) * cols);
        for r in 0..rows {
            for c in 0..cols {
                let site = r * cols + c;
                if c + 1 < cols {
                    bonds.push(Bond { a: site, b: site + 1 });
                }
                if r + 1 < rows {
                    bonds.push(Bond { a: site, b: site + cols });
                }
            }
        }
        Ok(Geometry { kind, rows, cols, bonds })
    }

    pub fn chain(n: usize) -> Result<Self> {
        Self::build(GeometryKind::Chain, 1, n)
    }

    pub fn ladder(cols: usize) -> Result<Self> {
        Self::build(GeometryKind::Ladder, 2, cols)
    }

    pub fn rectangle(rows: usize, cols: usize) -> Result<Self> {
        Self::build(GeometryKind::Rectangle, rows, cols)
    }

    /// Arbitrary bond list over `sites` sites laid out as a single row.
    pub fn custom(sites: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        if sites == 0 {
            return Err(Error::Geometry("custom geometry needs at least one site".into()));
        }
        let mut seen = BTreeSet::new();
        let mut bonds = Vec::with_capacity(pairs.len());
        for &(a, b) in pairs {
            if a >= sites || b >= sites {
                return Err(Error::Geometry(format!("bond ({a}, {b}) references a site >= {sites}")));
            }
            let bond = Bond::new(a, b)?;
            if !seen.insert(bond) {
                return Err(Error::Geometry(format!("duplicate bond ({}, {})", bond.a, bond.b)));
            }
            bonds.push(bond);
        }
        Ok(Geometry { kind: GeometryKind::Custom, rows: 1, cols: sites, bonds })
    }

    pub fn kind(&self) -> GeometryKind {
        self.kind
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn num_sites(&self) -> usize {
        self.rows * self.cols
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    pub fn degree(&self, site: usize) -> usize {
        self.bonds.iter().filter(|b| b.touches(site)).count()
    }

    pub fn max_degree(&self) -> usize {
        (0..self.num_sites()).map(|s| self.degree(s)).max().unwrap_or(0)
    }

    /// (row, col) of a site in row-major numbering.
    pub fn position(&self, site: usize) -> (usize, usize) {
        (site / self.cols, site % self.cols)
    }

    fn is_bipartite(&self) -> bool {
        let n = self.num_sites();
        let adj = adjacency(n, &self.bonds);
        let mut side = vec![None::<bool>; n];
        for start in 0..n {
            if side[start].is_some() {
                continue;
            }
            side[start] = Some(false);
            let mut stack = vec![start];
            while let Some(x) = stack.pop() {
                let sx = side[x].unwrap_or(false);
                for &y in &adj[x] {
                    match side[y] {
                        None => {
                            side[y] = Some(!sx);
                            stack.push(y);
                        }
                        Some(sy) if sy == sx => return false,
                        _ => {}
                    }
                }
            }
        }
        true
    }
}

fn adjacency(n: usize, bonds: &[Bond]) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); n];
    for b in bonds {
        adj[b.a].push(b.b);
        adj[b.b].push(b.a);
    }
    adj
}

/// Bonds grouped into steps whose members share no site.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GateSchedule {
    steps: Vec<Vec<Bond>>,
}

impl GateSchedule {
    pub fn steps(&self) -> &[Vec<Bond>] {
        &self.steps
    }

    pub fn num_steps(&self) -> usize {
        self.steps.len()
    }

    /// True if no two bonds in any step share a site.
    pub fn is_proper(&self) -> bool {
        self.steps.iter().all(|step| {
            let mut used = BTreeSet::new();
            step.iter().all(|b| used.insert(b.a) && used.insert(b.b))
        })
    }
}

/// Per-vertex colour table used by both colouring routines.
struct ColorTable {
    at: Vec<Vec<Option<usize>>>,
}

impl ColorTable {
    fn new(n: usize, colors: usize) -> Self {
        ColorTable { at: vec![vec![None; colors]; n] }
    }

    fn is_free(&self, x: usize, c: usize) -> bool {
        self.at[x][c].is_none()
    }

    fn first_free(&self, x: usize) -> usize {
        self.at[x].iter().position(Option::is_none).expect("palette exhausted")
    }

    fn color_of(&self, x: usize, y: usize) -> Option<usize> {
        self.at[x].iter().position(|&n| n == Some(y))
    }

    fn set(&mut self, x: usize, y: usize, c: usize) {
        self.at[x][c] = Some(y);
        self.at[y][c] = Some(x);
    }

    fn unset(&mut self, x: usize, y: usize) {
        if let Some(c) = self.color_of(x, y) {
            self.at[x][c] = None;
            self.at[y][c] = None;
        }
    }

    /// Swaps colours `c` and `d` along the maximal alternating path leaving
    /// `start` through its `c`-coloured edge.
    fn flip_path(&mut self, start: usize, c: usize, d: usize) {
        let mut path = vec![start];
        let mut x = start;
        let mut cur = c;
        while let Some(y) = self.at[x][cur] {
            path.push(y);
            x = y;
            cur = if cur == c { d } else { c };
        }
        let mut colors = Vec::with_capacity(path.len());
        for w in path.windows(2) {
            colors.push(self.color_of(w[0], w[1]).expect("path edge is coloured"));
        }
        for w in path.windows(2) {
            self.unset(w[0], w[1]);
        }
        for (w, col) in path.windows(2).zip(colors) {
            self.set(w[0], w[1], if col == c { d } else { c });
        }
    }

    fn into_schedule(self, bonds: &[Bond]) -> GateSchedule {
        let colors = self.at.first().map_or(0, Vec::len);
        let mut steps = vec![Vec::new(); colors];
        for b in bonds {
            let c = self.color_of(b.a, b.b).expect("every bond coloured");
            steps[c].push(*b);
        }
        steps.retain(|s| !s.is_empty());
        for s in &mut steps {
            s.sort();
        }
        GateSchedule { steps }
    }
}

/// Proper edge colouring of the bond graph.
///
/// Bipartite graphs (all built-in lattices) are coloured with exactly
/// `max_degree` colours by alternating-path recolouring; any other graph
/// falls back to Misra–Gries, which needs at most `max_degree + 1`.
/// Output is deterministic: bonds are processed in enumeration order and the
/// smallest admissible colour is always taken.
pub fn edge_color(geometry: &Geometry) -> GateSchedule {
    let n = geometry.num_sites();
    let delta = geometry.max_degree();
    if geometry.bonds.is_empty() {
        return GateSchedule { steps: Vec::new() };
    }
    if geometry.is_bipartite() {
        let mut t = ColorTable::new(n, delta);
        for b in &geometry.bonds {
            let (u, v) = (b.a, b.b);
            if let Some(c) = (0..delta).find(|&c| t.is_free(u, c) && t.is_free(v, c)) {
                t.set(u, v, c);
                continue;
            }
            let a = t.first_free(u);
            let bcol = t.first_free(v);
            // a is busy at v; the a/b path from v never returns to u in a bipartite graph.
            t.flip_path(v, a, bcol);
            t.set(u, v, a);
        }
        t.into_schedule(&geometry.bonds)
    } else {
        misra_gries(geometry, n, delta)
    }
}

fn misra_gries(geometry: &Geometry, n: usize, delta: usize) -> GateSchedule {
    let adj = adjacency(n, &geometry.bonds);
    let mut t = ColorTable::new(n, delta + 1);
    for b in &geometry.bonds {
        let (u, v) = (b.a, b.b);
        if let Some(c) = (0..=delta).find(|&c| t.is_free(u, c) && t.is_free(v, c)) {
            t.set(u, v, c);
            continue;
        }
        // maximal fan of u starting at v
        let mut fan = vec![v];
        loop {
            let last = *fan.last().unwrap();
            let next = adj[u]
                .iter()
                .copied()
                .find(|&w| !fan.contains(&w) && t.color_of(u, w).is_some_and(|cw| t.is_free(last, cw)));
            match next {
                Some(w) => fan.push(w),
                None => break,
            }
        }
        let c = t.first_free(u);
        let d = t.first_free(*fan.last().unwrap());
        if c != d {
            // c is free at u, so the cd-path from u leaves through a d-edge.
            t.flip_path(u, d, c);
        }
        let is_fan_prefix = |t: &ColorTable, upto: usize| {
            (0..upto).all(|j| t.color_of(u, fan[j + 1]).is_some_and(|cj| t.is_free(fan[j], cj)))
        };
        let w_idx = (0..fan.len())
            .find(|&i| t.is_free(fan[i], d) && is_fan_prefix(&t, i))
            .expect("Misra-Gries fan vertex exists");
        let shifted: Vec<usize> = (0..w_idx).map(|j| t.color_of(u, fan[j + 1]).expect("fan edge coloured")).collect();
        for &f in &fan[1..=w_idx] {
            t.unset(u, f);
        }
        for (j, col) in shifted.into_iter().enumerate() {
            t.set(u, fan[j], col);
        }
        t.set(u, fan[w_idx], d);
    }
    t.into_schedule(&geometry.bonds)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    pub const BOTH: [Spin; 2] = [Spin::Up, Spin::Down];

    fn index(self) -> usize {
        match self {
            Spin::Up => 0,
            Spin::Down => 1,
        }
    }
}

/// How sites (and spins) are laid out on simulator registers. The register
/// order is also the Jordan–Wigner order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Ordering {
    /// Row-major sites; spinful registers interleaved `2j, 2j+1`.
    RowMajor,
    /// Boustrophedon sites (odd rows reversed); spinful registers interleaved.
    Snake,
    /// Row-major sites; all spin-up registers first, then all spin-down.
    SpinBlocked,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegisterMap {
    spinful: bool,
    ordering: Ordering,
    rows: usize,
    cols: usize,
}

impl RegisterMap {
    pub fn new(geometry: &Geometry, spinful: bool, ordering: Ordering) -> Self {
        RegisterMap { spinful, ordering, rows: geometry.rows, cols: geometry.cols }
    }

    pub fn spinful(&self) -> bool {
        self.spinful
    }

    pub fn ordering(&self) -> Ordering {
        self.ordering
    }

    pub fn num_sites(&self) -> usize {
        self.rows * self.cols
    }

    pub fn num_modes(&self) -> usize {
        if self.spinful {
            2 * self.num_sites()
        } else {
            self.num_sites()
        }
    }

    fn site_slot(&self, site: usize) -> usize {
        match self.ordering {
            Ordering::Snake => {
                let (r, c) = (site / self.cols, site % self.cols);
                if r % 2 == 1 {
                    r * self.cols + (self.cols - 1 - c)
                } else {
                    site
                }
            }
            Ordering::RowMajor | Ordering::SpinBlocked => site,
        }
    }

    /// Register index of `(site, spin)`. The spin is ignored for spinless maps.
    pub fn mode(&self, site: usize, spin: Spin) -> usize {
        let slot = self.site_slot(site);
        if !self.spinful {
            return slot;
        }
        match self.ordering {
            Ordering::SpinBlocked => spin.index() * self.num_sites() + slot,
            Ordering::RowMajor | Ordering::Snake => 2 * slot + spin.index(),
        }
    }

    /// Basis mask with `n_f` fermions spread evenly over the sites and spins
    /// alternating from site to site; sites receive a second fermion only once
    /// every site holds one.
    pub fn neel_mask(&self, n_f: usize) -> Result<u64> {
        let n = self.num_sites();
        let modes = self.num_modes();
        if n_f > modes {
            return Err(Error::TooManyParticles { n_f, modes });
        }
        if !self.spinful {
            return Ok(crate::fock::spread_mask(modes, n_f));
        }
        let first = n_f.min(n);
        let mut mask = 0u64;
        let mut occupied_sites = Vec::with_capacity(first);
        for k in 0..first {
            let site = k * n / first;
            let spin = if k % 2 == 0 { Spin::Up } else { Spin::Down };
            occupied_sites.push((site, spin));
            mask |= 1 << self.mode(site, spin);
        }
        let extra = n_f - first;
        for k in 0..extra {
            let (site, spin) = occupied_sites[k * n / extra];
            let other = if spin == Spin::Up { Spin::Down } else { Spin::Up };
            mask |= 1 << self.mode(site, other);
        }
        Ok(mask)
    }
}
