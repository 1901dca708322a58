use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default raster resolution, pixels per meter.
pub const DEFAULT_MASK_RESOLUTION: f64 = 10.0;

/// Binary ground-plane raster (e.g. drivable area). Row 0 is the row with the
/// smallest y; `origin` is the world position of the lower-left corner of
/// cell (0, 0).
#[derive(Debug, Clone, PartialEq)]
pub struct RasterMask {
    origin: [f64; 2],
    resolution: f64,
    width: usize,
    height: usize,
    cells: Vec<bool>,
}

impl RasterMask {
    pub fn new(
        origin: [f64; 2],
        resolution: f64,
        width: usize,
        height: usize,
        cells: Vec<bool>,
    ) -> Result<Self> {
        if !(resolution.is_finite() && resolution > 0.0) {
            return Err(Error::schema("resolution", "must be positive"));
        }
        if cells.len() != width * height {
            return Err(Error::schema(
                "rows",
                format!("expected {} cells, found {}", width * height, cells.len()),
            ));
        }
        Ok(RasterMask {
            origin,
            resolution,
            width,
            height,
            cells,
        })
    }

    pub fn origin(&self) -> [f64; 2] {
        self.origin
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, col: usize, row: usize) -> bool {
        self.cells[row * self.width + col]
    }

    /// True if (x, y) is within `distance` meters of some positive cell.
    pub fn within(&self, x: f64, y: f64, distance: f64) -> bool {
        let cell = 1.0 / self.resolution;
        let to_col = |v: f64| ((v - self.origin[0]) * self.resolution).floor();
        let to_row = |v: f64| ((v - self.origin[1]) * self.resolution).floor();
        let clamp = |v: f64, n: usize| v.clamp(0.0, n as f64 - 1.0) as usize;
        if self.width == 0 || self.height == 0 {
            return false;
        }
        // one extra cell each side so cells touching the window edge are tested
        let c0 = to_col(x - distance) - 1.0;
        let c1 = to_col(x + distance) + 1.0;
        let r0 = to_row(y - distance) - 1.0;
        let r1 = to_row(y + distance) + 1.0;
        if c1 < 0.0 || r1 < 0.0 || c0 >= self.width as f64 || r0 >= self.height as f64 {
            return false;
        }
        for row in clamp(r0, self.height)..=clamp(r1, self.height) {
            for col in clamp(c0, self.width)..=clamp(c1, self.width) {
                if !self.get(col, row) {
                    continue;
                }
                let x0 = self.origin[0] + col as f64 * cell;
                let y0 = self.origin[1] + row as f64 * cell;
                let dx = (x0 - x).max(0.0).max(x - (x0 + cell));
                let dy = (y0 - y).max(0.0).max(y - (y0 + cell));
                if dx.hypot(dy) <= distance {
                    return true;
                }
            }
        }
        false
    }
}

/// On-disk form: one string of `0`/`1` characters per row, row 0 first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RasterMaskFile {
    pub origin: [f64; 2],
    #[serde(default = "default_resolution")]
    pub resolution: f64,
    pub width: usize,
    pub height: usize,
    pub rows: Vec<String>,
}

fn default_resolution() -> f64 {
    DEFAULT_MASK_RESOLUTION
}

impl RasterMaskFile {
    pub fn into_mask(self) -> Result<RasterMask> {
        if self.rows.len() != self.height {
            return Err(Error::schema(
                "rows",
                format!("expected {} rows, found {}", self.height, self.rows.len()),
            ));
        }
        let mut cells = Vec::with_capacity(self.width * self.height);
        for (i, row) in self.rows.iter().enumerate() {
            if row.len() != self.width {
                return Err(Error::schema(
                    format!("rows[{i}]"),
                    format!("expected {} characters, found {}", self.width, row.len()),
                ));
            }
            for ch in row.chars() {
                match ch {
                    '0' => cells.push(false),
                    '1' => cells.push(true),
                    other => {
                        return Err(Error::schema(
                            format!("rows[{i}]"),
                            format!("unexpected character `{other}`"),
                        ))
                    }
                }
            }
        }
        RasterMask::new(self.origin, self.resolution, self.width, self.height, cells)
    }

    pub fn from_mask(mask: &RasterMask) -> Self {
        let rows = (0..mask.height)
            .map(|r| {
                (0..mask.width)
                    .map(|c| if mask.get(c, r) { '1' } else { '0' })
                    .collect()
            })
            .collect();
        RasterMaskFile {
            origin: mask.origin,
            resolution: mask.resolution,
            width: mask.width,
            height: mask.height,
            rows,
        }
    }
}
