//! Metric scale from reference-object corner points.
//!
//! The reference is a checkerboard whose inner corners have already been
//! located in reconstruction coordinates. Neighbouring corners are one
//! physical square apart, so the median neighbour distance in model units
//! relates model units to meters.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::Point;

/// Checkerboard corners in model units, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CornerGridJson", into = "CornerGridJson")]
pub struct CornerGrid {
    corners: Vec<Point>,
    rows: usize,
    cols: usize,
    square_size_real: f64,
}

#[derive(Serialize, Deserialize)]
struct CornerGridJson {
    rows: usize,
    cols: usize,
    square_size_real_m: f64,
    corners: Vec<[f64; 3]>,
}

impl TryFrom<CornerGridJson> for CornerGrid {
    type Error = Error;

    fn try_from(j: CornerGridJson) -> Result<Self> {
        let corners = j.corners.iter().map(|c| Point::new(c[0], c[1], c[2])).collect();
        CornerGrid::new(corners, j.rows, j.cols, j.square_size_real_m)
    }
}

impl From<CornerGrid> for CornerGridJson {
    fn from(g: CornerGrid) -> Self {
        CornerGridJson {
            rows: g.rows,
            cols: g.cols,
            square_size_real_m: g.square_size_real,
            corners: g.corners.iter().map(|p| [p.x, p.y, p.z]).collect(),
        }
    }
}

impl CornerGrid {
    pub fn new(corners: Vec<Point>, rows: usize, cols: usize, square_size_real: f64) -> Result<Self> {
        if rows < 2 || cols < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2x2 corners, got {rows}x{cols}"
            )));
        }
        if corners.len() != rows * cols {
            return Err(Error::InvalidGrid(format!(
                "{} corners for a {rows}x{cols} grid",
                corners.len()
            )));
        }
        if !(square_size_real > 0.0 && square_size_real.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "square size must be positive, got {square_size_real}"
            )));
        }
        if let Some(i) = corners
            .iter()
            .position(|p| !(p.x.is_finite() && p.y.is_finite() && p.z.is_finite()))
        {
            return Err(Error::InvalidGrid(format!("corner {i} is not finite")));
        }
        Ok(CornerGrid {
            corners,
            rows,
            cols,
            square_size_real,
        })
    }

    pub fn corners(&self) -> &[Point] {
        &self.corners
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Physical edge length of one square, in meters.
    pub fn square_size_real(&self) -> f64 {
        self.square_size_real
    }

    pub fn corner(&self, row: usize, col: usize) -> &Point {
        &self.corners[row * self.cols + col]
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::json("corner grid", e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::json(path.display().to_string(), e))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::json("corner grid", e))?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleEstimate {
    /// Meters per model unit.
    pub s: f64,
    pub median_distance: f64,
    pub distance_count: usize,
    pub distances: Vec<f64>,
}

/// Distances between grid-adjacent corners: every horizontal pair in
/// row-major order, then every vertical pair in column-major order.
pub fn adjacent_corner_distances(grid: &CornerGrid) -> Result<Vec<f64>> {
    let (rows, cols) = (grid.rows, grid.cols);
    let mut out = Vec::with_capacity(rows * (cols - 1) + cols * (rows - 1));
    for r in 0..rows {
        for c in 0..cols - 1 {
            out.push((grid.corner(r, c + 1) - grid.corner(r, c)).norm());
        }
    }
    for c in 0..cols {
        for r in 0..rows - 1 {
            out.push((grid.corner(r + 1, c) - grid.corner(r, c)).norm());
        }
    }
    if let Some(i) = out.iter().position(|&d| d == 0.0) {
        return Err(Error::DegenerateGrid(format!(
            "adjacent corner pair {i} coincides"
        )));
    }
    Ok(out)
}

/// Median with the even-length convention of averaging the two central
/// elements. `None` for an empty slice.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    })
}

pub fn estimate_scale(grid: &CornerGrid) -> Result<ScaleEstimate> {
    let distances = adjacent_corner_distances(grid)?;
    let median_distance = median(&distances).expect("grid has at least 4 adjacent pairs");
    Ok(ScaleEstimate {
        s: grid.square_size_real / median_distance,
        median_distance,
        distance_count: distances.len(),
        distances,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn planar(rows: usize, cols: usize, spacing: f64, real: f64) -> CornerGrid {
        let corners = (0..rows)
            .flat_map(|r| (0..cols).map(move |c| Point::new(c as f64 * spacing, r as f64 * spacing, 0.0)))
            .collect();
        CornerGrid::new(corners, rows, cols, real).unwrap()
    }

    #[test]
    fn unit_2x2() {
        let d = adjacent_corner_distances(&planar(2, 2, 1.0, 1.0)).unwrap();
        assert_eq!(d, vec![1.0; 4]);
    }

    #[test]
    fn count_3x3() {
        let d = adjacent_corner_distances(&planar(3, 3, 0.05, 1.0)).unwrap();
        assert_eq!(d.len(), 12);
        assert!(d.iter().all(|&x| (x - 0.05).abs() < 1e-15));
    }

    #[test]
    fn uniform_spacing_scale() {
        let est = estimate_scale(&planar(4, 5, 0.05, 0.012)).unwrap();
        assert!((est.s - 0.24).abs() < 1e-12);
        assert_eq!(est.distance_count, 4 * 4 + 5 * 3);
    }

    #[test]
    fn even_median_averages() {
        assert_eq!(median(&[4.0, 1.0, 3.0, 2.0]), Some(2.5));
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[]), None);
    }

    #[test]
    fn order_is_rows_then_columns() {
        // stretch the x axis so horizontal and vertical pairs differ
        let corners = (0..2)
            .flat_map(|r| (0..3).map(move |c| Point::new(2.0 * c as f64, r as f64, 0.0)))
            .collect();
        let g = CornerGrid::new(corners, 2, 3, 1.0).unwrap();
        assert_eq!(
            adjacent_corner_distances(&g).unwrap(),
            vec![2.0, 2.0, 2.0, 2.0, 1.0, 1.0, 1.0]
        );
    }

    #[test]
    fn coincident_corners_rejected() {
        let g = CornerGrid::new(vec![Point::origin(); 4], 2, 2, 1.0).unwrap();
        assert!(matches!(estimate_scale(&g), Err(Error::DegenerateGrid(_))));
    }

    #[test]
    fn invalid_grids() {
        assert!(CornerGrid::new(vec![Point::origin(); 3], 1, 3, 1.0).is_err());
        assert!(CornerGrid::new(vec![Point::origin(); 3], 2, 2, 1.0).is_err());
        assert!(CornerGrid::new(vec![Point::origin(); 4], 2, 2, 0.0).is_err());
        assert!(CornerGrid::new(vec![Point::new(f64::NAN, 0.0, 0.0); 4], 2, 2, 1.0).is_err());
    }

    #[test]
    fn json_layout() {
        let text = r#"{"rows":2,"cols":2,"square_size_real_m":0.02,
            "corners":[[0,0,0],[0.1,0,0],[0,0.1,0],[0.1,0.1,0]]}"#;
        let g = CornerGrid::from_json_str(text).unwrap();
        assert!((estimate_scale(&g).unwrap().s - 0.2).abs() < 1e-12);
        let back: serde_json::Value = serde_json::to_value(&g).unwrap();
        assert_eq!(back["square_size_real_m"], 0.02);
        assert_eq!(back["corners"][1][0], 0.1);
        let bad = r#"{"rows":2,"cols":3,"square_size_real_m":0.02,"corners":[[0,0,0]]}"#;
        assert!(CornerGrid::from_json_str(bad).is_err());
    }
}
