//! Grid-world environments with terrain, labels, a coarse prior and a
//! windowed label sensor.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::world::{Sensor, World};
use super::RuntimeError;
use crate::label::LabelSet;
use crate::model::{Belief, Choice, LabeledMdp, StateSpec, DEFAULT_PRIOR_FLOOR};

/// Movement directions, in action-id order.
pub const DIRECTIONS: [(&str, i64, i64); 4] =
    [("forward", -1, 0), ("left", 0, -1), ("right", 0, 1), ("backward", 1, 0)];

/// Atomic propositions of grid scenarios.
pub const GRID_AP: [&str; 4] = ["b", "h", "o", "w"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    /// Open flat terrain.
    Flat,
    /// A band of rough blocks with valleys, crossed only around one end.
    Valley,
    /// Randomly placed rough blocks.
    Random,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PriorConfig {
    /// Concentration of moves between flat blocks.
    pub kappa_flat: f64,
    /// Concentration of moves touching a rough block.
    pub kappa_rough: f64,
    /// Believed success probability of moves touching a rough block.
    pub rough_success: f64,
    /// Total concentration on a label support with several entries.
    pub kappa_label: f64,
    /// Prior mean placed on the true label of such a support; the rest is
    /// spread evenly. Zero gives a uniform prior.
    pub label_accuracy: f64,
    /// Concentration on a single-entry label support.
    pub kappa_label_known: f64,
}

impl Default for PriorConfig {
    fn default() -> Self {
        PriorConfig {
            kappa_flat: 10000.0,
            kappa_rough: 1.0,
            rough_success: 0.5,
            kappa_label: 100.0,
            label_accuracy: 0.9,
            kappa_label_known: 50.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridConfig {
    pub width: usize,
    pub height: usize,
    /// Side of a cell in metres.
    pub cell_size: f64,
    /// Side of a coarse prior block, in cells.
    pub block: usize,
    pub layout: Layout,
    /// Number of rough blocks for [`Layout::Random`].
    pub rough_blocks: usize,
    /// Cost per direction in [`DIRECTIONS`] order.
    pub costs: [f64; 4],
    pub move_success: f64,
    pub ascend_limit_deg: f64,
    pub descend_limit_deg: f64,
    pub valley_depth: f64,
    pub hill_height: f64,
    pub bases: usize,
    pub water: usize,
    pub humans: usize,
    pub obstacles: usize,
    /// Window half-width of the label sensor, in cells.
    pub sensor_radius: usize,
    /// Added misreading probability per `cell_size` of distance.
    pub sensor_error: f64,
    pub sensor_error_max: f64,
    /// Track payload bits (carrying a human, carrying water) in the state.
    pub payload: bool,
    pub prior: PriorConfig,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            width: 10,
            height: 10,
            cell_size: 2.0,
            block: 2,
            layout: Layout::Valley,
            rough_blocks: 4,
            costs: [3.0, 5.0, 5.0, 6.0],
            move_success: 0.9,
            ascend_limit_deg: 15.0,
            descend_limit_deg: 20.0,
            valley_depth: 0.63,
            hill_height: 1.0,
            bases: 1,
            water: 1,
            humans: 1,
            obstacles: 2,
            sensor_radius: 1,
            sensor_error: 0.1,
            sensor_error_max: 0.9,
            payload: false,
            prior: PriorConfig::default(),
        }
    }
}

impl GridConfig {
    pub fn validate(&self) -> Result<(), RuntimeError> {
        let bad = |m: &str| Err(RuntimeError::Config(m.to_string()));
        if self.width < 4 || self.height < 4 {
            return bad("grid must be at least 4x4");
        }
        if self.block == 0 || self.width % self.block != 0 || self.height % self.block != 0 {
            return bad("block size must divide the grid");
        }
        if !(self.move_success > 0.0 && self.move_success <= 1.0) {
            return bad("move_success must lie in (0, 1]");
        }
        if !(self.cell_size > 0.0) || self.costs.iter().any(|c| !(*c >= 0.0)) {
            return bad("cell size and costs must be non-negative");
        }
        if !(0.0..=1.0).contains(&self.sensor_error_max) || self.sensor_error < 0.0 {
            return bad("sensor error must lie in [0, 1]");
        }
        let p = &self.prior;
        if [p.kappa_flat, p.kappa_rough, p.kappa_label, p.kappa_label_known].iter().any(|k| !(*k > 0.0))
            || !(p.rough_success > 0.0 && p.rough_success < 1.0)
            || !(0.0..1.0).contains(&p.label_accuracy)
        {
            return bad("prior concentrations must be positive");
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Terrain {
    Flat,
    Valley,
    Hill,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub terrain: Terrain,
    pub height: f64,
    pub label: LabelSet,
    /// The coarse map marks the enclosing block as rough.
    pub rough: bool,
    /// Label support revealed by the coarse map.
    pub support: Vec<LabelSet>,
}

/// A generated grid: cells, the true labeled MDP, the prior and home.
#[derive(Clone, Debug, PartialEq)]
pub struct GridScenario {
    pub config: GridConfig,
    pub seed: u64,
    pub cells: Vec<Cell>,
    pub start: usize,
    pub truth: LabeledMdp,
    pub prior: Belief,
    pub home: Vec<usize>,
}

fn ap() -> Vec<String> {
    GRID_AP.iter().map(|s| s.to_string()).collect()
}

fn prop(name: &str) -> LabelSet {
    LabelSet::EMPTY.with(GRID_AP.iter().position(|p| *p == name).expect("grid proposition"))
}

const MODES: usize = 4;
const CARRY_HUMAN: usize = 1;
const CARRY_WATER: usize = 2;

fn next_mode(mode: usize, label: LabelSet) -> usize {
    let mut m = mode;
    if label.contains(GRID_AP.iter().position(|p| *p == "h").unwrap()) {
        m |= CARRY_HUMAN;
    }
    if label.contains(GRID_AP.iter().position(|p| *p == "w").unwrap()) {
        m |= CARRY_WATER;
    }
    if label.contains(GRID_AP.iter().position(|p| *p == "b").unwrap()) {
        m = 0;
    }
    m
}

impl GridScenario {
    pub fn generate(config: &GridConfig, seed: u64) -> Result<GridScenario, RuntimeError> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..200 {
            if let Some(s) = Self::attempt(config, seed, &mut rng) {
                return Ok(s);
            }
        }
        Err(RuntimeError::Generation(format!("no valid layout after 200 attempts (seed {seed})")))
    }

    fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn cell_of(&self, state: usize) -> usize {
        state % self.num_cells()
    }

    pub fn row_col(&self, cell: usize) -> (usize, usize) {
        (cell / self.config.width, cell % self.config.width)
    }

    fn attempt(cfg: &GridConfig, seed: u64, rng: &mut ChaCha8Rng) -> Option<GridScenario> {
        let (w, h, b) = (cfg.width, cfg.height, cfg.block);
        let (bw, bh) = (w / b, h / b);
        let n = w * h;
        let block_of = |c: usize| (c / w / b) * bw + (c % w) / b;
        let cells_of_block = |blk: usize| -> Vec<usize> {
            let (br, bc) = (blk / bw, blk % bw);
            let mut out = Vec::new();
            for r in br * b..(br + 1) * b {
                for c in bc * b..(bc + 1) * b {
                    out.push(r * w + c);
                }
            }
            out
        };
        let mut terrain = vec![Terrain::Flat; n];
        let mut rough_block = vec![false; bw * bh];
        // Side of each flat cell relative to the band: 0 left, 1 right.
        let mut side: Vec<Option<usize>> = vec![None; n];

        match cfg.layout {
            Layout::Flat => {}
            Layout::Valley => {
                if bw < 3 || bh < 2 {
                    return None;
                }
                let band = rng.random_range(1..bw - 1);
                let corridor = if rng.random_bool(0.5) { 0 } else { bh - 1 };
                for br in 0..bh {
                    if br == corridor {
                        continue;
                    }
                    let blk = br * bw + band;
                    rough_block[blk] = true;
                    let cs = cells_of_block(blk);
                    let anti = rng.random_bool(0.5);
                    for (i, &c) in cs.iter().enumerate() {
                        let (r, col) = (i / b, i % b);
                        let diag = if anti { r + col == b - 1 } else { r == col };
                        if diag {
                            terrain[c] = Terrain::Valley;
                        }
                    }
                }
                for c in 0..n {
                    let col_block = (c % w) / b;
                    if col_block < band {
                        side[c] = Some(0);
                    } else if col_block > band {
                        side[c] = Some(1);
                    }
                }
            }
            Layout::Random => {
                let mut blocks: Vec<usize> = (0..bw * bh).collect();
                blocks.shuffle(rng);
                for &blk in blocks.iter().take(cfg.rough_blocks.min(bw * bh - 1)) {
                    rough_block[blk] = true;
                    let cs = cells_of_block(blk);
                    let k = rng.random_range(1..=b.max(1));
                    for &c in cs.choose_multiple(rng, k) {
                        terrain[c] = if rng.random_bool(0.75) { Terrain::Valley } else { Terrain::Hill };
                    }
                }
            }
        }

        let free: Vec<usize> = (0..n).filter(|&c| !rough_block[block_of(c)]).collect();
        // Features sit in distinct blocks.
        let pick = |rng: &mut ChaCha8Rng, pool: &[usize], used: &[usize]| -> Option<usize> {
            let options: Vec<usize> = pool
                .iter()
                .copied()
                .filter(|&c| used.iter().all(|&u| block_of(u) != block_of(c)))
                .collect();
            options.choose(rng).copied()
        };
        let mut used: Vec<usize> = Vec::new();
        let mut labels = vec![LabelSet::EMPTY; n];
        // In the valley layout, bases and the start lie on one side of the
        // band and water and humans on the other.
        let (near, far): (Vec<usize>, Vec<usize>) = match cfg.layout {
            Layout::Valley => {
                let s0 = rng.random_range(0..2);
                (
                    free.iter().copied().filter(|&c| side[c] == Some(s0)).collect(),
                    free.iter().copied().filter(|&c| side[c] == Some(1 - s0)).collect(),
                )
            }
            _ => (free.clone(), free.clone()),
        };
        // The robot starts at a base station, which is also home.
        let start = pick(rng, &near, &used)?;
        used.push(start);
        if cfg.bases > 0 {
            labels[start] = prop("b");
        }
        for (name, count, pool) in
            [("b", cfg.bases.saturating_sub(1), &near), ("w", cfg.water, &far), ("h", cfg.humans, &far)]
        {
            for _ in 0..count {
                let c = pick(rng, pool, &used)?;
                used.push(c);
                labels[c] = prop(name);
            }
        }
        let features = used.clone();
        for _ in 0..cfg.obstacles {
            let options: Vec<usize> = free.iter().copied().filter(|c| !used.contains(c)).collect();
            let c = *options.choose(rng)?;
            used.push(c);
            labels[c] = prop("o");
        }
        let _ = features;

        let heights: Vec<f64> = terrain
            .iter()
            .map(|t| match t {
                Terrain::Flat => 0.0,
                Terrain::Valley => -cfg.valley_depth,
                Terrain::Hill => cfg.hill_height,
            })
            .collect();

        let mut cells: Vec<Cell> = (0..n)
            .map(|c| Cell {
                terrain: terrain[c],
                height: heights[c],
                label: labels[c],
                rough: rough_block[block_of(c)],
                support: Vec::new(),
            })
            .collect();
        let o = prop("o");
        for blk in 0..bw * bh {
            let cs = cells_of_block(blk);
            let mut sup: Vec<LabelSet> =
                cs.iter().map(|&c| labels[c]).filter(|l| *l != o).collect();
            sup.sort();
            sup.dedup();
            for &c in &cs {
                cells[c].support = if labels[c] == o { vec![o] } else { sup.clone() };
            }
        }

        let mut scenario = GridScenario {
            config: cfg.clone(),
            seed,
            cells,
            start,
            truth: LabeledMdp {
                ap: ap(),
                actions: DIRECTIONS.iter().map(|d| d.0.to_string()).collect(),
                states: Vec::new(),
                initial_state: start,
                initial_label: labels[start],
            },
            prior: Belief::uniform(
                &LabeledMdp {
                    ap: ap(),
                    actions: Vec::new(),
                    states: Vec::new(),
                    initial_state: 0,
                    initial_label: LabelSet::EMPTY,
                },
                1.0,
            ),
            home: Vec::new(),
        };
        scenario.build_models();
        // Every feature must be reachable from the start and back without
        // touching rough blocks.
        if !scenario.flat_connected() || !scenario.pending_route() {
            return None;
        }
        Some(scenario)
    }

    pub fn neighbor(&self, cell: usize, dir: usize) -> Option<usize> {
        let (r, c) = self.row_col(cell);
        let (_, dr, dc) = DIRECTIONS[dir];
        let (nr, nc) = (r as i64 + dr, c as i64 + dc);
        if nr < 0 || nc < 0 || nr >= self.config.height as i64 || nc >= self.config.width as i64 {
            return None;
        }
        Some(nr as usize * self.config.width + nc as usize)
    }

    /// Whether the slope between two adjacent cells permits the move.
    pub fn legal(&self, from: usize, to: usize) -> bool {
        let dh = self.cells[to].height - self.cells[from].height;
        let angle = (dh.abs() / self.config.cell_size).atan().to_degrees();
        if dh > 0.0 {
            angle <= self.config.ascend_limit_deg
        } else {
            angle <= self.config.descend_limit_deg
        }
    }

    /// Cells reachable from `from` through cells accepted by `ok`.
    fn flood(&self, from: &[usize], ok: impl Fn(usize) -> bool) -> Vec<bool> {
        let mut seen = vec![false; self.num_cells()];
        let mut stack = from.to_vec();
        for &c in from {
            seen[c] = true;
        }
        while let Some(c) = stack.pop() {
            for d in 0..4 {
                if let Some(t) = self.neighbor(c, d) {
                    if !seen[t] && ok(t) && self.legal(c, t) {
                        seen[t] = true;
                        stack.push(t);
                    }
                }
            }
        }
        seen
    }

    /// Every smooth, obstacle-free cell is reachable from the start without
    /// touching rough blocks.
    fn flat_connected(&self) -> bool {
        let o = prop("o");
        let ok = |c: usize| !self.cells[c].rough && self.cells[c].label != o;
        let seen = self.flood(&[self.start], ok);
        (0..self.num_cells()).all(|c| !ok(c) || seen[c])
    }

    /// After a human is picked up the base must be reachable without
    /// entering a cell that may hold water.
    fn pending_route(&self) -> bool {
        let (o, w, h) = (prop("o"), prop("w"), prop("h"));
        let humans: Vec<usize> = (0..self.num_cells()).filter(|&c| self.cells[c].label == h).collect();
        let seen = self.flood(&humans, |c| {
            !self.cells[c].rough && self.cells[c].label != o && !self.cells[c].support.contains(&w)
        });
        humans.is_empty() || seen[self.start]
    }

    fn state_name(&self, cell: usize, mode: usize) -> String {
        let (r, c) = self.row_col(cell);
        if self.config.payload {
            format!("r{r}c{c}m{mode}")
        } else {
            format!("r{r}c{c}")
        }
    }

    fn build_models(&mut self) {
        let n = self.num_cells();
        let modes = if self.config.payload { MODES } else { 1 };
        let state = |cell: usize, mode: usize| mode * n + cell;
        let mut states = Vec::with_capacity(n * modes);
        let mut nominal: Vec<Vec<Vec<f64>>> = Vec::with_capacity(n * modes);
        let mut strength: Vec<Vec<f64>> = Vec::with_capacity(n * modes);
        for mode in 0..modes {
            for cell in 0..n {
                let mut choices = Vec::new();
                let mut nom = Vec::new();
                let mut kap = Vec::new();
                for dir in 0..4 {
                    let Some(t) = self.neighbor(cell, dir) else { continue };
                    let target_modes: Vec<usize> = if modes == 1 {
                        vec![0]
                    } else {
                        let mut ms: Vec<usize> =
                            self.cells[t].support.iter().map(|&l| next_mode(mode, l)).collect();
                        ms.sort();
                        ms.dedup();
                        ms
                    };
                    let legal = self.legal(cell, t);
                    let true_mode = if modes == 1 { 0 } else { next_mode(mode, self.cells[t].label) };
                    let rough = self.cells[cell].rough || self.cells[t].rough;
                    let success = if rough { self.config.prior.rough_success } else { self.config.move_success };
                    let mut successors = Vec::new();
                    let mut nm = Vec::new();
                    for &m in &target_modes {
                        let p = if legal && m == true_mode { self.config.move_success } else { 0.0 };
                        successors.push((state(t, m), p));
                        nm.push(success / target_modes.len() as f64);
                    }
                    let stay = if legal { 1.0 - self.config.move_success } else { 1.0 };
                    successors.push((state(cell, mode), stay));
                    nm.push(1.0 - success);
                    choices.push(Choice { action: dir, cost: self.config.costs[dir], successors });
                    nom.push(nm);
                    kap.push(if rough { self.config.prior.kappa_rough } else { self.config.prior.kappa_flat });
                }
                let c = &self.cells[cell];
                states.push(StateSpec {
                    name: self.state_name(cell, mode),
                    labels: c.support.iter().map(|&l| (l, if l == c.label { 1.0 } else { 0.0 })).collect(),
                    choices,
                });
                nominal.push(nom);
                strength.push(kap);
            }
        }
        self.truth.states = states;
        let prior = &self.config.prior;
        self.prior = Belief::from_template(
            &self.truth,
            DEFAULT_PRIOR_FLOOR,
            |x, k, j, _| strength[x][k] * nominal[x][k][j],
            |x, _, p| {
                let size = self.truth.states[x].labels.len() as f64;
                if size == 1.0 {
                    prior.kappa_label_known
                } else if prior.label_accuracy > 0.0 {
                    let share = if p > 0.0 { prior.label_accuracy } else { (1.0 - prior.label_accuracy) / (size - 1.0) };
                    prior.kappa_label * share
                } else {
                    prior.kappa_label / size
                }
            },
        );
        self.home = vec![state(self.start, 0)];
    }

    /// Label readings of every cell in the sensor window around `state`.
    /// Misreadings are uniform over the other labels in the cell's support.
    pub fn sense<R: Rng + ?Sized>(&self, state: usize, rng: &mut R) -> Vec<(usize, LabelSet)> {
        let n = self.num_cells();
        let cell = self.cell_of(state);
        let (r, c) = self.row_col(cell);
        let rad = self.config.sensor_radius as i64;
        let modes = if self.config.payload { MODES } else { 1 };
        let mut out = Vec::new();
        for dr in -rad..=rad {
            for dc in -rad..=rad {
                let (nr, nc) = (r as i64 + dr, c as i64 + dc);
                if nr < 0 || nc < 0 || nr >= self.config.height as i64 || nc >= self.config.width as i64 {
                    continue;
                }
                let t = nr as usize * self.config.width + nc as usize;
                let dist = ((dr * dr + dc * dc) as f64).sqrt();
                let err = (self.config.sensor_error * (dist - 1e-9).max(0.0).ceil()).min(self.config.sensor_error_max);
                let truth = self.cells[t].label;
                let others: Vec<LabelSet> = self.cells[t].support.iter().copied().filter(|&l| l != truth).collect();
                let reading = if !others.is_empty() && rng.random::<f64>() < err {
                    *others.choose(rng).expect("non-empty")
                } else {
                    truth
                };
                for m in 0..modes {
                    out.push((m * n + t, reading));
                }
            }
        }
        out
    }

    pub fn world(&self) -> World {
        World::new(self.truth.clone(), self.prior.clone(), self.home.clone(), Sensor::Grid(Box::new(self.clone())))
            .expect("generated grids are consistent")
    }

    /// Text rendering: `S` start, `b h w o` labels, `v` valley, `^` hill,
    /// `:` other rough cells.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for r in 0..self.config.height {
            for c in 0..self.config.width {
                let i = r * self.config.width + c;
                let cell = &self.cells[i];
                let ch = if i == self.start {
                    'S'
                } else if !cell.label.is_empty() {
                    GRID_AP[(0..4).find(|&k| cell.label.contains(k)).unwrap()].chars().next().unwrap()
                } else {
                    match (cell.terrain, cell.rough) {
                        (Terrain::Valley, _) => 'v',
                        (Terrain::Hill, _) => '^',
                        (Terrain::Flat, true) => ':',
                        (Terrain::Flat, false) => '.',
                    }
                };
                out.push(ch);
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generation_is_deterministic() {
        let cfg = GridConfig::default();
        let a = GridScenario::generate(&cfg, 7).unwrap();
        let b = GridScenario::generate(&cfg, 7).unwrap();
        assert_eq!(a.truth, b.truth);
        assert_eq!(a.prior, b.prior);
        assert_eq!(a.render(), b.render());
        a.truth.validate().unwrap();
    }

    #[test]
    fn slopes_make_valleys_one_way() {
        let cfg = GridConfig::default();
        let g = GridScenario::generate(&cfg, 3).unwrap();
        let v = (0..g.cells.len()).find(|&c| g.cells[c].terrain == Terrain::Valley).unwrap();
        for d in 0..4 {
            if let Some(t) = g.neighbor(v, d) {
                if g.cells[t].terrain == Terrain::Flat {
                    assert!(g.legal(t, v));
                    assert!(!g.legal(v, t));
                }
            }
        }
        // A valley cell never leaves under the true dynamics.
        for c in &g.truth.states[v].choices {
            assert_eq!(c.successors.iter().find(|s| s.0 == v).unwrap().1, 1.0);
        }
    }

    #[test]
    fn valley_layout_blocks_straight_crossings() {
        for seed in 0..20 {
            let g = GridScenario::generate(&GridConfig::default(), seed).unwrap();
            let w = g.config.width;
            for r in 0..g.config.height {
                let rough_cols: Vec<usize> = (0..w).filter(|&c| g.cells[r * w + c].rough).collect();
                if !rough_cols.is_empty() {
                    assert!(rough_cols.iter().any(|&c| g.cells[r * w + c].terrain == Terrain::Valley));
                }
            }
        }
    }

    #[test]
    fn payload_layers_give_four_modes() {
        let cfg = GridConfig { payload: true, ..GridConfig::default() };
        let g = GridScenario::generate(&cfg, 1).unwrap();
        assert_eq!(g.truth.num_states(), 400);
        g.truth.validate().unwrap();
        assert_eq!(next_mode(0, prop("h")), CARRY_HUMAN);
        assert_eq!(next_mode(CARRY_HUMAN | CARRY_WATER, prop("b")), 0);
    }

    #[test]
    fn own_cell_reads_exactly() {
        let g = GridScenario::generate(&GridConfig::default(), 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..50 {
            let obs = g.sense(g.start, &mut rng);
            let own = obs.iter().find(|o| o.0 == g.start).unwrap();
            assert_eq!(own.1, g.cells[g.start].label);
            assert!(obs.len() <= 9);
        }
    }

    #[test]
    fn sensor_error_grows_with_distance() {
        let cfg = GridConfig { obstacles: 0, layout: Layout::Flat, ..GridConfig::default() };
        let mut g = GridScenario::generate(&cfg, 2).unwrap();
        // Give every cell a two-label support so misreadings are possible.
        for c in g.cells.iter_mut() {
            c.support = vec![LabelSet::EMPTY, prop("b")];
            c.label = LabelSet::EMPTY;
        }
        let centre = 5 * g.config.width + 5;
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let (mut adj, mut diag) = (0usize, 0usize);
        let trials = 20_000;
        for _ in 0..trials {
            for (s, l) in g.sense(centre, &mut rng) {
                if l.is_empty() {
                    continue;
                }
                let (r, c) = g.row_col(s);
                if r == 5 || c == 5 {
                    adj += 1;
                } else {
                    diag += 1;
                }
            }
        }
        let adj_rate = adj as f64 / (4 * trials) as f64;
        let diag_rate = diag as f64 / (4 * trials) as f64;
        assert!((adj_rate - 0.1).abs() < 0.01, "{adj_rate}");
        assert!((diag_rate - 0.2).abs() < 0.01, "{diag_rate}");
    }
}
