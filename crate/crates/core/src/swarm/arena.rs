use rand::Rng;
use serde::{Deserialize, Serialize};

use super::SwarmError;
use crate::rng;

/// Axis-aligned rectangle in arena meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rect {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl Rect {
    pub fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Self {
        Self { x_min, y_min, x_max, y_max }
    }

    pub fn area(&self) -> f64 {
        (self.x_max - self.x_min) * (self.y_max - self.y_min)
    }

    /// Strict interior test; the boundary itself is free space.
    pub fn contains(&self, p: [f64; 2]) -> bool {
        p[0] > self.x_min && p[0] < self.x_max && p[1] > self.y_min && p[1] < self.y_max
    }

    /// Whether the open interiors overlap.
    pub fn overlaps(&self, other: &Rect) -> bool {
        self.x_min < other.x_max && other.x_min < self.x_max && self.y_min < other.y_max && other.y_min < self.y_max
    }

    fn inflate(&self, by: f64) -> Rect {
        Rect::new(self.x_min - by, self.y_min - by, self.x_max + by, self.y_max + by)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Corner {
    #[default]
    SouthWest,
    SouthEast,
    NorthEast,
    NorthWest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Arena {
    pub width: f64,
    pub height: f64,
    pub obstacles: Vec<Rect>,
    pub release_corner: Corner,
}

/// Side of the square kept clear of obstacles at the release corner.
const RELEASE_CLEARANCE: f64 = 0.4;
const MIN_OBSTACLE_GAP: f64 = 0.1;

impl Arena {
    pub fn empty(width: f64, height: f64) -> Self {
        Self { width, height, obstacles: Vec::new(), release_corner: Corner::SouthWest }
    }

    /// 2 x 2 m arena with up to five seeded rectangular obstacles covering at
    /// most 10% of the floor.
    pub fn random(seed: u64) -> Self {
        Self::random_with(2.0, 2.0, 5, 0.10, seed)
    }

    pub fn random_with(width: f64, height: f64, count: usize, max_fraction: f64, seed: u64) -> Self {
        let mut rng = rng::child_rng(seed, "arena", 0);
        let mut arena = Self::empty(width, height);
        let budget = max_fraction * width * height;
        let keep_out = arena.release_zone();
        let mut used = 0.0;
        for _ in 0..1000 {
            if arena.obstacles.len() == count {
                break;
            }
            let w = rng.random_range(0.15..=0.30);
            let h = rng.random_range(0.15..=0.30);
            let x = rng.random_range(0.0..=width - w);
            let y = rng.random_range(0.0..=height - h);
            let r = Rect::new(x, y, x + w, y + h);
            if used + r.area() > budget || r.overlaps(&keep_out) {
                continue;
            }
            if arena.obstacles.iter().any(|o| o.inflate(MIN_OBSTACLE_GAP).overlaps(&r)) {
                continue;
            }
            used += r.area();
            arena.obstacles.push(r);
        }
        arena
    }

    fn release_zone(&self) -> Rect {
        let c = RELEASE_CLEARANCE.min(self.width).min(self.height);
        let (x0, y0) = match self.release_corner {
            Corner::SouthWest => (0.0, 0.0),
            Corner::SouthEast => (self.width - c, 0.0),
            Corner::NorthEast => (self.width - c, self.height - c),
            Corner::NorthWest => (0.0, self.height - c),
        };
        Rect::new(x0, y0, x0 + c, y0 + c)
    }

    /// Center of the release corner's grid cell.
    pub fn release_point(&self, cell_size: f64) -> [f64; 2] {
        let h = 0.5 * cell_size;
        match self.release_corner {
            Corner::SouthWest => [h, h],
            Corner::SouthEast => [self.width - h, h],
            Corner::NorthEast => [self.width - h, self.height - h],
            Corner::NorthWest => [h, self.height - h],
        }
    }

    /// Centers of `n` distinct release cells packed into the smallest square
    /// block at the release corner, filled row by row from the corner.
    pub fn release_points(&self, n: usize, cell_size: f64) -> Vec<[f64; 2]> {
        let side = (1..).find(|k| k * k >= n).unwrap_or(1);
        let [x0, y0] = self.release_point(cell_size);
        let (sx, sy) = match self.release_corner {
            Corner::SouthWest => (1.0, 1.0),
            Corner::SouthEast => (-1.0, 1.0),
            Corner::NorthEast => (-1.0, -1.0),
            Corner::NorthWest => (1.0, -1.0),
        };
        (0..n)
            .map(|i| {
                let (c, r) = ((i % side) as f64, (i / side) as f64);
                [x0 + sx * c * cell_size, y0 + sy * r * cell_size]
            })
            .collect()
    }

    /// Heading of the release corner's inward diagonal, degrees.
    pub fn release_heading(&self) -> f64 {
        match self.release_corner {
            Corner::SouthWest => 45.0,
            Corner::SouthEast => 135.0,
            Corner::NorthEast => 225.0,
            Corner::NorthWest => 315.0,
        }
    }

    pub fn in_bounds(&self, p: [f64; 2]) -> bool {
        (0.0..=self.width).contains(&p[0]) && (0.0..=self.height).contains(&p[1])
    }

    /// Inside the arena and not inside any obstacle.
    pub fn is_free(&self, p: [f64; 2]) -> bool {
        self.in_bounds(p) && !self.obstacles.iter().any(|o| o.contains(p))
    }

    pub fn validate(&self, cell_size: f64) -> Result<(), SwarmError> {
        let bad = |m: String| Err(SwarmError::InvalidArena(m));
        if !(self.width > 0.0 && self.height > 0.0) || !self.width.is_finite() || !self.height.is_finite() {
            return bad(format!("dimensions must be positive, got {} x {}", self.width, self.height));
        }
        for (i, o) in self.obstacles.iter().enumerate() {
            if !(o.x_min < o.x_max && o.y_min < o.y_max) {
                return bad(format!("obstacle {i} is degenerate"));
            }
            if o.x_min < 0.0 || o.y_min < 0.0 || o.x_max > self.width || o.y_max > self.height {
                return bad(format!("obstacle {i} extends outside the arena"));
            }
            if let Some(j) = self.obstacles[..i].iter().position(|p| p.overlaps(o)) {
                return bad(format!("obstacles {j} and {i} overlap"));
            }
        }
        self.validate_release(1, cell_size)
    }

    /// Check that the release cells for `n` agents are inside the arena and
    /// unobstructed.
    pub fn validate_release(&self, n: usize, cell_size: f64) -> Result<(), SwarmError> {
        let h = 0.5 * cell_size;
        for p in self.release_points(n, cell_size) {
            let cell = Rect::new(p[0] - h, p[1] - h, p[0] + h, p[1] + h);
            if !self.in_bounds(p) || self.obstacles.iter().any(|o| o.overlaps(&cell)) {
                return Err(SwarmError::InvalidArena(format!(
                    "release cell at ({:.3}, {:.3}) is obstructed or outside the arena",
                    p[0], p[1]
                )));
            }
        }
        Ok(())
    }
}
