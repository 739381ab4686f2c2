//! MAP-Elites grid over the unit square.

use alloc::format;
use alloc::vec::Vec;

use crate::arm::Genotype;
use crate::error::{Error, Result};
use crate::rng::RngStream;

pub const DEFAULT_RESOLUTION: (usize, usize) = (100, 100);

/// `(row, col)`; rows follow the second descriptor component.
pub type CellIndex = (usize, usize);

/// Per-elite sample statistics kept for the metrics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EliteStats {
    pub mean_fitness: f64,
    pub descriptor_variance: [f64; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct Elite {
    pub genotype: Genotype,
    /// Score the elite competes on.
    pub fitness: f64,
    pub descriptor: [f64; 2],
    pub n_samples: usize,
    pub stats: Option<EliteStats>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InsertOutcome {
    AddedNew,
    Replaced,
    Rejected,
}

impl InsertOutcome {
    pub fn accepted(self) -> bool {
        !matches!(self, InsertOutcome::Rejected)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridArchive {
    rows: usize,
    cols: usize,
    offset: f64,
    cells: Vec<Option<Elite>>,
    /// Flat indices of occupied cells, in first-occupation order.
    occupied: Vec<usize>,
}

impl GridArchive {
    pub fn new(rows: usize, cols: usize, offset: f64) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Config(format!(
                "grid resolution must be positive, got {rows}x{cols}"
            )));
        }
        Ok(Self {
            rows,
            cols,
            offset,
            cells: (0..rows * cols).map(|_| None).collect(),
            occupied: Vec::new(),
        })
    }

    /// An empty archive with the same resolution and offset.
    pub fn empty_like(&self) -> Self {
        Self::new(self.rows, self.cols, self.offset).expect("resolution already checked")
    }

    pub fn resolution(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn len(&self) -> usize {
        self.occupied.len()
    }

    pub fn is_empty(&self) -> bool {
        self.occupied.is_empty()
    }

    pub fn cell_index(&self, descriptor: [f64; 2]) -> Result<CellIndex> {
        let [x, y] = descriptor;
        if !((0.0..=1.0).contains(&x) && (0.0..=1.0).contains(&y)) {
            return Err(Error::Usage(format!(
                "descriptor ({x}, {y}) outside [0, 1]²"
            )));
        }
        let row = ((y * self.rows as f64) as usize).min(self.rows - 1);
        let col = ((x * self.cols as f64) as usize).min(self.cols - 1);
        Ok((row, col))
    }

    fn flat(&self, (row, col): CellIndex) -> usize {
        row * self.cols + col
    }

    fn unflat(&self, i: usize) -> CellIndex {
        (i / self.cols, i % self.cols)
    }

    pub fn get(&self, cell: CellIndex) -> Option<&Elite> {
        if cell.0 >= self.rows || cell.1 >= self.cols {
            return None;
        }
        self.cells[self.flat(cell)].as_ref()
    }

    /// Strict-improvement insertion: ties keep the incumbent.
    pub fn try_insert(&mut self, candidate: Elite) -> Result<InsertOutcome> {
        let cell = self.cell_index(candidate.descriptor)?;
        let i = self.flat(cell);
        let outcome = match &self.cells[i] {
            None => {
                self.occupied.push(i);
                InsertOutcome::AddedNew
            }
            Some(incumbent) if candidate.fitness > incumbent.fitness => InsertOutcome::Replaced,
            Some(_) => return Ok(InsertOutcome::Rejected),
        };
        self.cells[i] = Some(candidate);
        debug_assert_eq!(
            self.cell_index(self.cells[i].as_ref().unwrap().descriptor).ok(),
            Some(cell)
        );
        Ok(outcome)
    }

    /// Occupied cells in `(row, col)` order.
    pub fn iter(&self) -> impl Iterator<Item = (CellIndex, &Elite)> + '_ {
        self.cells
            .iter()
            .enumerate()
            .filter_map(move |(i, c)| c.as_ref().map(|e| (self.unflat(i), e)))
    }

    /// Σ (fitness + offset) over occupied cells, summed in cell order.
    pub fn qd_score(&self) -> f64 {
        self.iter().map(|(_, e)| e.fitness + self.offset).sum()
    }

    pub fn coverage(&self) -> f64 {
        self.len() as f64 / (self.rows * self.cols) as f64
    }

    /// Elite of a uniformly chosen occupied cell.
    pub fn sample_uniform_elite(&self, rng: &mut RngStream) -> Result<&Elite> {
        if self.occupied.is_empty() {
            return Err(Error::Usage("cannot sample from an empty archive".into()));
        }
        let i = self.occupied[rng.index(self.occupied.len())];
        Ok(self.cells[i].as_ref().expect("occupied cell"))
    }
}
