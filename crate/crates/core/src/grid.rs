//! Row-major pixel grids: real-valued images and integer label maps.

use crate::error::{Error, Result};

/// An image of real pixel values stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl Field {
    /// Wraps `values`, rejecting a length mismatch, an empty shape or non-finite entries.
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid(format!(
                "field shape {rows}x{cols} is empty"
            )));
        }
        if values.len() != rows * cols {
            return Err(Error::invalid(format!(
                "field {rows}x{cols} needs {} values, got {}",
                rows * cols,
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite value at ({}, {})",
                pos / cols,
                pos % cols
            )));
        }
        Ok(Self { rows, cols, values })
    }

    pub fn filled(rows: usize, cols: usize, value: f64) -> Self {
        assert!(rows > 0 && cols > 0, "empty field");
        Self {
            rows,
            cols,
            values: vec![value; rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(rows > 0 && cols > 0, "empty field");
        let mut values = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                values.push(f(r, c));
            }
        }
        Self { rows, cols, values }
    }

    pub(crate) fn from_raw(rows: usize, cols: usize, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), rows * cols);
        Self { rows, cols, values }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.values[row * self.cols + col] = value;
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }
}

/// Per-pixel cluster indices. Serves both as ground truth and as a segmentation estimate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelMap {
    rows: usize,
    cols: usize,
    labels: Vec<u32>,
}

impl LabelMap {
    pub fn new(rows: usize, cols: usize, labels: Vec<u32>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid(format!(
                "label map shape {rows}x{cols} is empty"
            )));
        }
        if labels.len() != rows * cols {
            return Err(Error::invalid(format!(
                "label map {rows}x{cols} needs {} labels, got {}",
                rows * cols,
                labels.len()
            )));
        }
        Ok(Self { rows, cols, labels })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> u32) -> Self {
        assert!(rows > 0 && cols > 0, "empty label map");
        let mut labels = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                labels.push(f(r, c));
            }
        }
        Self { rows, cols, labels }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u32 {
        self.labels[row * self.cols + col]
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    /// One past the largest label present.
    pub fn num_labels(&self) -> usize {
        self.labels.iter().max().map_or(0, |&m| m as usize + 1)
    }

    pub fn histogram(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_labels()];
        for &l in &self.labels {
            counts[l as usize] += 1;
        }
        counts
    }

    /// Applies `map[label]` to every pixel.
    pub fn relabel(&self, map: &[u32]) -> LabelMap {
        LabelMap {
            rows: self.rows,
            cols: self.cols,
            labels: self.labels.iter().map(|&l| map[l as usize]).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_rejects_bad_input() {
        assert!(Field::new(2, 2, vec![0.0; 3]).is_err());
        assert!(Field::new(0, 2, vec![]).is_err());
        assert!(Field::new(1, 2, vec![0.0, f64::NAN]).is_err());
        assert!(Field::new(1, 2, vec![0.0, 1.0]).is_ok());
    }

    #[test]
    fn label_histogram() {
        let l = LabelMap::new(2, 2, vec![0, 2, 2, 0]).unwrap();
        assert_eq!(l.num_labels(), 3);
        assert_eq!(l.histogram(), vec![2, 0, 2]);
        assert_eq!(l.relabel(&[1, 0, 0]).labels(), &[1, 0, 0, 1]);
    }
}
