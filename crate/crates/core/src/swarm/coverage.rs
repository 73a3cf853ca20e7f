use serde::Serialize;

pub const DEFAULT_CELL_SIZE: f64 = 0.10;

/// Visited-cell grid over the arena. Cells are only ever set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoverageGrid {
    #[serde(skip)]
    cell_size_bits: u64,
    cols: usize,
    rows: usize,
    visited: Vec<bool>,
}

impl CoverageGrid {
    pub fn new(width: f64, height: f64, cell_size: f64) -> Self {
        let cols = ((width / cell_size).round() as usize).max(1);
        let rows = ((height / cell_size).round() as usize).max(1);
        Self { cell_size_bits: cell_size.to_bits(), cols, rows, visited: vec![false; cols * rows] }
    }

    /// 20 x 20 grid of 10 cm cells over a 2 x 2 m arena.
    pub fn default_arena() -> Self {
        Self::new(2.0, 2.0, DEFAULT_CELL_SIZE)
    }

    pub fn cell_size(&self) -> f64 {
        f64::from_bits(self.cell_size_bits)
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn len(&self) -> usize {
        self.visited.len()
    }

    pub fn is_empty(&self) -> bool {
        self.visited.is_empty()
    }

    pub fn visited_count(&self) -> usize {
        self.visited.iter().filter(|&&v| v).count()
    }

    pub fn is_visited(&self, col: usize, row: usize) -> bool {
        self.visited[row * self.cols + col]
    }

    /// `(col, row)` of the cell containing `pos`. Positions outside the grid
    /// are clamped; the upper boundary belongs to the last cell.
    pub fn cell_of(&self, pos: [f64; 2]) -> (usize, usize) {
        let index = |v: f64, n: usize| -> usize {
            let i = (v / self.cell_size()).floor();
            if i.is_nan() || i < 0.0 {
                0
            } else {
                (i as usize).min(n - 1)
            }
        };
        (index(pos[0], self.cols), index(pos[1], self.rows))
    }

    pub fn mark(&mut self, pos: [f64; 2]) {
        let (c, r) = self.cell_of(pos);
        self.visited[r * self.cols + c] = true;
    }

    /// Set every cell visited in `other` (same layout) in `self`.
    pub fn merge(&mut self, other: &CoverageGrid) {
        for (a, &b) in self.visited.iter_mut().zip(&other.visited) {
            *a |= b;
        }
    }

    pub fn percent(&self) -> f64 {
        100.0 * self.visited_count() as f64 / self.len() as f64
    }
}

/// Mark the cell containing `pos` and return the updated grid.
pub fn update_coverage(grid: &CoverageGrid, pos: [f64; 2]) -> CoverageGrid {
    let mut next = grid.clone();
    next.mark(pos);
    next
}

/// Percent of all cells visited. Obstacle cells stay in the denominator.
pub fn coverage_percent(grid: &CoverageGrid) -> f64 {
    grid.percent()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_has_400_cells() {
        let g = CoverageGrid::default_arena();
        assert_eq!((g.cols(), g.rows(), g.len()), (20, 20, 400));
        assert_eq!(coverage_percent(&g), 0.0);
    }

    #[test]
    fn cell_indexing_and_boundaries() {
        let g = CoverageGrid::default_arena();
        assert_eq!(g.cell_of([0.05, 0.05]), (0, 0));
        assert_eq!(g.cell_of([2.0, 2.0]), (19, 19));
        assert_eq!(g.cell_of([-0.3, 5.0]), (0, 19));
        assert_eq!(g.cell_of([0.15, 1.05]), (1, 10));
    }

    #[test]
    fn marking_is_idempotent() {
        let g = update_coverage(&CoverageGrid::default_arena(), [0.05, 0.05]);
        assert!(g.is_visited(0, 0));
        assert_eq!(coverage_percent(&g), 0.25);
        assert_eq!(update_coverage(&g, [0.07, 0.02]), g);
    }

    #[test]
    fn percent_anchors() {
        let mut g = CoverageGrid::default_arena();
        for i in 0..321 {
            let (c, r) = (i % 20, i / 20);
            g.mark([c as f64 * 0.1 + 0.05, r as f64 * 0.1 + 0.05]);
        }
        assert_eq!(g.visited_count(), 321);
        assert_eq!(coverage_percent(&g), 80.25);
        for i in 321..400 {
            let (c, r) = (i % 20, i / 20);
            g.mark([c as f64 * 0.1 + 0.05, r as f64 * 0.1 + 0.05]);
        }
        assert_eq!(coverage_percent(&g), 100.0);
    }
}
