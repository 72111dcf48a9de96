//! Wang tilings with a pinned origin tile, the machine-to-tile reduction,
//! and the derived spin models with exact ground-state search.
//!
//! Grids are squares `{-n..n}^2` with open boundaries: adjacency constraints
//! apply only between cells inside the grid, and edge colors facing outward
//! are unconstrained. A tile set is a *yes*-instance of the bounded problem
//! when the grid cannot be tiled with tile 1 at the origin.

use std::collections::HashMap;

use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::turing::{Dir, Ntm};

pub type ColorId = u16;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TilingError {
    #[error("tile set must contain at least one tile")]
    NoTiles,
    #[error("tile {0} uses color {1} outside the palette")]
    UnknownColor(usize, u16),
    #[error("assignment covers radius {0} but {1} cells were given")]
    WrongCellCount(u32, usize),
    #[error("tile index {0} out of range")]
    TileOutOfRange(usize),
    #[error("spin tables must cover all {0} spins; table has {1} entries")]
    BadTable(usize, usize),
    #[error("energy search budget exceeded after {0} nodes")]
    BudgetExceeded(u64),
}

/// A unit square with one color per side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct WangTile {
    pub north: ColorId,
    pub east: ColorId,
    pub south: ColorId,
    pub west: ColorId,
}

/// An ordered tile list; `tiles[0]` is the distinguished origin tile.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TileSet {
    palette: Vec<String>,
    tiles: Vec<WangTile>,
}

impl TileSet {
    pub fn new(palette: Vec<String>, tiles: Vec<WangTile>) -> Result<Self, TilingError> {
        if tiles.is_empty() {
            return Err(TilingError::NoTiles);
        }
        for (i, t) in tiles.iter().enumerate() {
            for c in [t.north, t.east, t.south, t.west] {
                if c as usize >= palette.len() {
                    return Err(TilingError::UnknownColor(i, c));
                }
            }
        }
        Ok(TileSet { palette, tiles })
    }

    pub fn palette(&self) -> &[String] {
        &self.palette
    }

    pub fn tiles(&self) -> &[WangTile] {
        &self.tiles
    }

    pub fn len(&self) -> usize {
        self.tiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tiles.is_empty()
    }
}

/// A total assignment of tiles to the grid `{-n..n}^2`, row-major from the
/// bottom-left corner `(-n, -n)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TilingAssignment {
    pub radius: u32,
    pub cells: Vec<usize>,
}

impl TilingAssignment {
    pub fn side(&self) -> usize {
        2 * self.radius as usize + 1
    }

    /// Cell index for coordinates in `[-n, n]`.
    pub fn at(&self, x: i64, y: i64) -> usize {
        let n = self.radius as i64;
        let col = (x + n) as usize;
        let row = (y + n) as usize;
        self.cells[row * self.side() + col]
    }
}

/// A single adjacency or origin violation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    OriginNotFirstTile,
    Horizontal { left: (i64, i64) },
    Vertical { below: (i64, i64) },
}

/// Checks a complete assignment: horizontal east/west matches, vertical
/// north/south matches, and tile 1 at the origin.
pub fn verify_tiling(
    ts: &TileSet,
    a: &TilingAssignment,
) -> Result<(bool, Vec<Violation>), TilingError> {
    let side = a.side();
    if a.cells.len() != side * side {
        return Err(TilingError::WrongCellCount(a.radius, a.cells.len()));
    }
    for &c in &a.cells {
        if c >= ts.len() {
            return Err(TilingError::TileOutOfRange(c));
        }
    }
    let n = a.radius as i64;
    let mut violations = Vec::new();
    if a.at(0, 0) != 0 {
        violations.push(Violation::OriginNotFirstTile);
    }
    for y in -n..=n {
        for x in -n..=n {
            let t = ts.tiles[a.at(x, y)];
            if x < n {
                let r = ts.tiles[a.at(x + 1, y)];
                if t.east != r.west {
                    violations.push(Violation::Horizontal { left: (x, y) });
                }
            }
            if y < n {
                let u = ts.tiles[a.at(x, y + 1)];
                if t.north != u.south {
                    violations.push(Violation::Vertical { below: (x, y) });
                }
            }
        }
    }
    Ok((violations.is_empty(), violations))
}

/// Outcome of the bounded tiling search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TileOutcome {
    Tiling(TilingAssignment),
    Impossible,
}

/// Exhaustive search over the grid: cells are decided row-major from the
/// bottom-left with tiles tried in ascending index, so the returned tiling
/// is the lexicographically smallest one. `Impossible` is a proof: the
/// search is complete.
///
/// Before the descent, per-cell candidate domains are filtered to arc
/// consistency (a candidate must have a compatible partner in every
/// neighbouring cell's domain), which never removes a tile that occurs in
/// any complete tiling but collapses the forced regions immediately. The
/// descent additionally forward-checks the cell above each placement.
pub fn solve_btile(ts: &TileSet, n: u32) -> TileOutcome {
    let side = 2 * n as usize + 1;
    let total = side * side;
    let origin_idx = (n as usize) * side + n as usize;
    let k = ts.len();

    let mut dom: Vec<Vec<bool>> = vec![vec![true; k]; total];
    for slot in dom[origin_idx].iter_mut().skip(1) {
        *slot = false;
    }

    // Arc-consistency fixpoint.
    let mut queue: std::collections::VecDeque<usize> = (0..total).collect();
    let mut queued = vec![true; total];
    while let Some(c) = queue.pop_front() {
        queued[c] = false;
        let row = c / side;
        let col = c % side;
        let mut changed = false;
        for (t, tile) in ts.tiles.iter().copied().enumerate() {
            if !dom[c][t] {
                continue;
            }
            let supported = (col == 0
                || dom[c - 1]
                    .iter()
                    .enumerate()
                    .any(|(u, &on)| on && ts.tiles[u].east == tile.west))
                && (col + 1 == side
                    || dom[c + 1]
                        .iter()
                        .enumerate()
                        .any(|(u, &on)| on && ts.tiles[u].west == tile.east))
                && (row == 0
                    || dom[c - side]
                        .iter()
                        .enumerate()
                        .any(|(u, &on)| on && ts.tiles[u].north == tile.south))
                && (row + 1 == side
                    || dom[c + side]
                        .iter()
                        .enumerate()
                        .any(|(u, &on)| on && ts.tiles[u].south == tile.north));
            if !supported {
                dom[c][t] = false;
                changed = true;
            }
        }
        if changed {
            if dom[c].iter().all(|&on| !on) {
                return TileOutcome::Impossible;
            }
            let mut push = |i: usize, queue: &mut std::collections::VecDeque<usize>| {
                if !queued[i] {
                    queued[i] = true;
                    queue.push_back(i);
                }
            };
            if col > 0 {
                push(c - 1, &mut queue);
            }
            if col + 1 < side {
                push(c + 1, &mut queue);
            }
            if row > 0 {
                push(c - side, &mut queue);
            }
            if row + 1 < side {
                push(c + side, &mut queue);
            }
        }
    }

    // Which south colors each cell's domain can still offer, for the
    // one-row lookahead.
    let south_support = |dom_cell: &[bool], north: ColorId| -> bool {
        dom_cell
            .iter()
            .enumerate()
            .any(|(u, &on)| on && ts.tiles[u].south == north)
    };

    let fits = |cells: &[usize], dom: &[Vec<bool>], pos: usize, tile: usize| -> bool {
        if !dom[pos][tile] {
            return false;
        }
        let t = ts.tiles[tile];
        let col = pos % side;
        if col > 0 && ts.tiles[cells[pos - 1]].east != t.west {
            return false;
        }
        if pos >= side && ts.tiles[cells[pos - side]].north != t.south {
            return false;
        }
        if pos + side < total && !south_support(&dom[pos + side], t.north) {
            return false;
        }
        true
    };

    let mut cells: Vec<usize> = vec![usize::MAX; total];
    let mut pos = 0usize;
    let mut trial: Vec<usize> = vec![0; total];
    loop {
        if pos == total {
            return TileOutcome::Tiling(TilingAssignment { radius: n, cells });
        }
        let mut placed = false;
        while trial[pos] < k {
            let tile = trial[pos];
            trial[pos] += 1;
            if fits(&cells, &dom, pos, tile) {
                cells[pos] = tile;
                placed = true;
                break;
            }
        }
        if placed {
            pos += 1;
            if pos < total {
                trial[pos] = 0;
            }
        } else {
            trial[pos] = 0;
            if pos == 0 {
                return TileOutcome::Impossible;
            }
            pos -= 1;
        }
    }
}

// ---------------------------------------------------------------------------
// Machine-to-tile reduction
// ---------------------------------------------------------------------------

/// Maps a machine to a tile set that simulates its runs row by row: the
/// bottom row of the computation strip is pinned by the origin tile, each
/// higher row is one step, and a row above a final head admits no tile.
/// One transition tile per tuple; nondeterminism becomes a choice of which
/// transition tile to place.
///
/// The tape is treated as two-way infinite: the strip grows in both
/// directions regardless of the machine's tape-model flag. Machines whose
/// transition relation is total then admit no stuck configurations, and a
/// machine halts along all paths within `n` steps exactly when the radius
/// `n + 1` grid cannot be tiled.
pub fn reduce_nhaltall_to_tile(m: &Ntm) -> TileSet {
    let mut palette: Vec<String> = Vec::new();
    let color = |name: String, palette: &mut Vec<String>| -> ColorId {
        if let Some(i) = palette.iter().position(|c| *c == name) {
            return i as ColorId;
        }
        palette.push(name);
        (palette.len() - 1) as ColorId
    };
    let void = color("void".into(), &mut palette);
    let grow_l = color("grow<".into(), &mut palette);
    let grow_r = color("grow>".into(), &mut palette);
    let quiet = color("-".into(), &mut palette);
    let sym: Vec<ColorId> = m
        .symbols()
        .iter()
        .map(|s| color(format!("s:{s}"), &mut palette))
        .collect();
    let mut head = HashMap::new();
    for q in 0..m.states().len() {
        for x in 0..m.symbols().len() {
            head.insert(
                (q as u16, x as u16),
                color(
                    format!("h:{}:{}", m.states()[q], m.symbols()[x]),
                    &mut palette,
                ),
            );
        }
    }
    // Horizontal state colors are directional: a state passed rightwards
    // can only be consumed from the west, a state passed leftwards only
    // from the east. Two merge tiles can therefore never conjure a head out
    // of nothing by facing each other.
    let mut pass_r = HashMap::new();
    let mut pass_l = HashMap::new();
    let mut targets: Vec<u16> = m
        .delta()
        .values()
        .flat_map(|ts| ts.iter().map(|(q2, _, _)| *q2))
        .collect();
    targets.sort_unstable();
    targets.dedup();
    for &q in &targets {
        pass_r.insert(
            q,
            color(format!("q>:{}", m.states()[q as usize]), &mut palette),
        );
        pass_l.insert(
            q,
            color(format!("q<:{}", m.states()[q as usize]), &mut palette),
        );
    }

    let blank = sym[m.blank() as usize];
    let h0 = head[&(m.initial(), m.blank())];

    // (i) the origin tile: empty tape with the head at position zero.
    let mut tiles = vec![WangTile {
        north: h0,
        east: grow_r,
        south: void,
        west: grow_l,
    }];
    // (ii) empty-tape extensions, one per direction.
    tiles.push(WangTile {
        north: blank,
        east: grow_r,
        south: void,
        west: grow_r,
    });
    tiles.push(WangTile {
        north: blank,
        east: grow_l,
        south: void,
        west: grow_l,
    });
    // (iii) the empty tile for everything below and outside the strip.
    tiles.push(WangTile {
        north: void,
        east: void,
        south: void,
        west: void,
    });
    // (iv)/(v) one transition tile per tuple, in declared order.
    for ((q, x), tuples) in m.delta() {
        for &(q2, y, d) in tuples {
            let s = head[&(*q, *x)];
            let n = sym[y as usize];
            match d {
                Dir::Right => tiles.push(WangTile {
                    north: n,
                    east: pass_r[&q2],
                    south: s,
                    west: quiet,
                }),
                Dir::Left => tiles.push(WangTile {
                    north: n,
                    east: quiet,
                    south: s,
                    west: pass_l[&q2],
                }),
            }
        }
    }
    // (vi) two state-merge tiles per (target state, symbol) pair: the head
    // lands on the neighbouring cell, whose old content rides along.
    for &q in &targets {
        for (xi, &x) in sym.iter().enumerate() {
            let h = head[&(q, xi as u16)];
            tiles.push(WangTile {
                north: h,
                east: quiet,
                south: x,
                west: pass_r[&q],
            });
            tiles.push(WangTile {
                north: h,
                east: pass_l[&q],
                south: x,
                west: quiet,
            });
        }
    }
    // (vii) copy tiles.
    for &x in &sym {
        tiles.push(WangTile {
            north: x,
            east: quiet,
            south: x,
            west: quiet,
        });
    }
    TileSet::new(palette, tiles).expect("reduction emits a valid tile set")
}

// ---------------------------------------------------------------------------
// Spin models
// ---------------------------------------------------------------------------

/// Nearest-neighbour coupling tables plus one local field at the origin.
/// All values are non-negative; `hx[s][t]` couples a cell to its right
/// neighbour (first argument left), `hy[s][t]` to the cell above (first
/// argument bottom).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpinModel {
    pub spins: usize,
    pub hx: Vec<Vec<u64>>,
    pub hy: Vec<Vec<u64>>,
    pub hloc: Vec<u64>,
}

impl SpinModel {
    pub fn validate(&self) -> Result<(), TilingError> {
        if self.hx.len() != self.spins || self.hy.len() != self.spins {
            return Err(TilingError::BadTable(
                self.spins,
                self.hx.len().min(self.hy.len()),
            ));
        }
        for row in self.hx.iter().chain(self.hy.iter()) {
            if row.len() != self.spins {
                return Err(TilingError::BadTable(self.spins, row.len()));
            }
        }
        if self.hloc.len() != self.spins {
            return Err(TilingError::BadTable(self.spins, self.hloc.len()));
        }
        Ok(())
    }
}

/// A total spin assignment on the grid `{-n..n}^2`, row-major from the
/// bottom-left.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpinConfig {
    pub radius: u32,
    pub cells: Vec<usize>,
}

/// One penalty per mismatched adjacent edge color and one for an origin
/// tile other than tile 1.
pub fn reduce_tile_to_gse(ts: &TileSet) -> SpinModel {
    let k = ts.len();
    let delta = |a: ColorId, b: ColorId| -> u64 { u64::from(a != b) };
    let hx = (0..k)
        .map(|s| {
            (0..k)
                .map(|t| delta(ts.tiles[s].east, ts.tiles[t].west))
                .collect()
        })
        .collect();
    let hy = (0..k)
        .map(|s| {
            (0..k)
                .map(|t| delta(ts.tiles[s].north, ts.tiles[t].south))
                .collect()
        })
        .collect();
    let hloc = (0..k).map(|s| u64::from(s != 0)).collect();
    SpinModel {
        spins: k,
        hx,
        hy,
        hloc,
    }
}

/// Exact energy of a complete configuration: the origin field plus all
/// nearest-neighbour couplings inside the grid (open boundary).
pub fn energy(model: &SpinModel, c: &SpinConfig) -> u64 {
    let side = 2 * c.radius as usize + 1;
    let origin = (c.radius as usize) * side + c.radius as usize;
    let mut e = model.hloc[c.cells[origin]];
    for row in 0..side {
        for col in 0..side {
            let s = c.cells[row * side + col];
            if col + 1 < side {
                e += model.hx[s][c.cells[row * side + col + 1]];
            }
            if row + 1 < side {
                e += model.hy[s][c.cells[(row + 1) * side + col]];
            }
        }
    }
    e
}

/// Exact minimum energy and the lexicographically smallest minimizer.
///
/// Two branch-and-bound passes in row-major cell order. Every term is
/// non-negative, so the running partial sum is a lower bound. The first
/// pass orders spins by immediate cost (cheapest first), which tightens the
/// bound quickly and pins the exact minimum; the second pass descends in
/// spin order, cutting partials that exceed the minimum, and stops at the
/// first complete configuration, the lexicographically smallest minimizer.
/// The node budget guards against pathological models.
pub fn min_energy(
    model: &SpinModel,
    n: u32,
    budget: u64,
) -> Result<(u64, SpinConfig), TilingError> {
    model.validate()?;
    let side = 2 * n as usize + 1;
    let total = side * side;
    let origin = (n as usize) * side + n as usize;
    let k = model.spins;

    // Energy contributed by placing `spin` at `pos` given the cells to the
    // left and below, which are already assigned in row-major order.
    let delta_cost = |cells: &[usize], pos: usize, spin: usize| -> u64 {
        let mut e = 0;
        let col = pos % side;
        if col > 0 {
            e += model.hx[cells[pos - 1]][spin];
        }
        if pos >= side {
            e += model.hy[cells[pos - side]][spin];
        }
        if pos == origin {
            e += model.hloc[spin];
        }
        e
    };

    let mut nodes = 0u64;

    // Pass 1: exact minimum with greedy value ordering.
    let mut minimum: Option<u64> = None;
    {
        let mut cells = vec![0usize; total];
        let mut partial = vec![0u64; total + 1];
        // Per-position candidate lists sorted by delta cost, rebuilt on entry.
        let mut order: Vec<Vec<(u64, usize)>> = vec![Vec::new(); total];
        let mut cursor = vec![0usize; total];
        let mut pos = 0usize;
        let mut entered = vec![false; total];
        loop {
            if pos == total {
                let e = partial[total];
                if minimum.is_none_or(|b| e < b) {
                    minimum = Some(e);
                    if e == 0 {
                        break;
                    }
                }
                pos -= 1;
                continue;
            }
            if !entered[pos] {
                let mut cand: Vec<(u64, usize)> = (0..k)
                    .map(|s| (delta_cost(&cells, pos, s), s))
                    .collect();
                cand.sort_unstable();
                order[pos] = cand;
                cursor[pos] = 0;
                entered[pos] = true;
            }
            let mut advanced = false;
            if cursor[pos] < k {
                let (cost, spin) = order[pos][cursor[pos]];
                cursor[pos] += 1;
                nodes += 1;
                if nodes > budget {
                    return Err(TilingError::BudgetExceeded(nodes));
                }
                let e = partial[pos] + cost;
                if minimum.is_some_and(|b| e >= b) {
                    // Candidates are cost-sorted: the rest only get worse.
                    cursor[pos] = k;
                } else {
                    cells[pos] = spin;
                    partial[pos + 1] = e;
                    advanced = true;
                }
            }
            if advanced {
                pos += 1;
                if pos < total {
                    entered[pos] = false;
                }
                continue;
            }
            entered[pos] = false;
            if pos == 0 {
                break;
            }
            pos -= 1;
        }
    }
    let minimum = minimum.expect("greedy descent always completes one configuration");

    // Pass 2: lexicographically smallest configuration achieving it.
    let mut cells = vec![0usize; total];
    let mut partial = vec![0u64; total + 1];
    let mut trial = vec![0usize; total];
    let mut pos = 0usize;
    loop {
        if pos == total {
            return Ok((
                minimum,
                SpinConfig {
                    radius: n,
                    cells,
                },
            ));
        }
        let mut advanced = false;
        while trial[pos] < k {
            let spin = trial[pos];
            trial[pos] += 1;
            nodes += 1;
            if nodes > budget {
                return Err(TilingError::BudgetExceeded(nodes));
            }
            let e = partial[pos] + delta_cost(&cells, pos, spin);
            if e > minimum {
                continue;
            }
            cells[pos] = spin;
            partial[pos + 1] = e;
            advanced = true;
            break;
        }
        if advanced {
            pos += 1;
            if pos < total {
                trial[pos] = 0;
            }
            continue;
        }
        trial[pos] = 0;
        if pos == 0 {
            unreachable!("a configuration with the computed minimum exists");
        }
        pos -= 1;
    }
}

/// True iff the exact ground-state energy exceeds `threshold`.
pub fn solve_bgse(
    model: &SpinModel,
    n: u32,
    threshold: &BigRational,
    budget: u64,
) -> Result<bool, TilingError> {
    let (e, _) = min_energy(model, n, budget)?;
    Ok(BigRational::from_integer(e.into()) > *threshold)
}

/// Convenience: zero threshold.
pub fn gse_zero_threshold() -> BigRational {
    BigRational::zero()
}

// ---------------------------------------------------------------------------
// JSON wire format
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
pub struct TileJson {
    #[serde(rename = "N")]
    pub north: String,
    #[serde(rename = "E")]
    pub east: String,
    #[serde(rename = "S")]
    pub south: String,
    #[serde(rename = "W")]
    pub west: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TileSetJson {
    pub palette: Vec<String>,
    pub tiles: Vec<TileJson>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SpinModelJson {
    pub spins: usize,
    pub hx: Vec<Vec<u64>>,
    pub hy: Vec<Vec<u64>>,
    pub hloc: Vec<u64>,
}

/// Row-major cell grid, shared by tiling assignments and spin
/// configurations; indices are 0-based tile or spin numbers.
#[derive(Debug, Serialize, Deserialize)]
pub struct GridJson {
    pub radius: u32,
    pub cells: Vec<usize>,
}

impl TilingAssignment {
    pub fn to_json(&self) -> GridJson {
        GridJson {
            radius: self.radius,
            cells: self.cells.clone(),
        }
    }

    pub fn from_json(j: &GridJson) -> Result<Self, TilingError> {
        let side = 2 * j.radius as usize + 1;
        if j.cells.len() != side * side {
            return Err(TilingError::WrongCellCount(j.radius, j.cells.len()));
        }
        Ok(TilingAssignment {
            radius: j.radius,
            cells: j.cells.clone(),
        })
    }
}

impl SpinConfig {
    pub fn to_json(&self) -> GridJson {
        GridJson {
            radius: self.radius,
            cells: self.cells.clone(),
        }
    }

    pub fn from_json(j: &GridJson) -> Result<Self, TilingError> {
        let side = 2 * j.radius as usize + 1;
        if j.cells.len() != side * side {
            return Err(TilingError::WrongCellCount(j.radius, j.cells.len()));
        }
        Ok(SpinConfig {
            radius: j.radius,
            cells: j.cells.clone(),
        })
    }
}

impl TileSet {
    pub fn to_json(&self) -> TileSetJson {
        TileSetJson {
            palette: self.palette.clone(),
            tiles: self
                .tiles
                .iter()
                .map(|t| TileJson {
                    north: self.palette[t.north as usize].clone(),
                    east: self.palette[t.east as usize].clone(),
                    south: self.palette[t.south as usize].clone(),
                    west: self.palette[t.west as usize].clone(),
                })
                .collect(),
        }
    }

    pub fn from_json(j: &TileSetJson) -> Result<Self, TilingError> {
        let ids: HashMap<&str, ColorId> = j
            .palette
            .iter()
            .enumerate()
            .map(|(i, c)| (c.as_str(), i as ColorId))
            .collect();
        let find = |c: &str, tile: usize| -> Result<ColorId, TilingError> {
            ids.get(c)
                .copied()
                .ok_or(TilingError::UnknownColor(tile, u16::MAX))
        };
        let mut tiles = Vec::new();
        for (i, t) in j.tiles.iter().enumerate() {
            tiles.push(WangTile {
                north: find(&t.north, i)?,
                east: find(&t.east, i)?,
                south: find(&t.south, i)?,
                west: find(&t.west, i)?,
            });
        }
        TileSet::new(j.palette.clone(), tiles)
    }
}

impl SpinModel {
    pub fn to_json(&self) -> SpinModelJson {
        SpinModelJson {
            spins: self.spins,
            hx: self.hx.clone(),
            hy: self.hy.clone(),
            hloc: self.hloc.clone(),
        }
    }

    pub fn from_json(j: &SpinModelJson) -> Result<Self, TilingError> {
        let m = SpinModel {
            spins: j.spins,
            hx: j.hx.clone(),
            hy: j.hy.clone(),
            hloc: j.hloc.clone(),
        };
        m.validate()?;
        Ok(m)
    }
}
