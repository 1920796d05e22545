//! Sampled densities and their CSV form.

use crate::error::{Error, Result};
use crate::exec::Exec;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// `n` equally spaced points on `[min, max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl GridSpec {
    pub fn new(min: f64, max: f64, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::domain(format!("grid needs at least 2 points, got {n}")));
        }
        if !(min.is_finite() && max.is_finite() && max > min) {
            return Err(Error::domain(format!("grid bounds [{min}, {max}] are not increasing")));
        }
        Ok(Self { min, max, n })
    }

    pub fn step(&self) -> f64 {
        (self.max - self.min) / (self.n - 1) as f64
    }

    /// Grid points; the endpoints are exact and the grid is symmetric
    /// whenever `min = −max`.
    pub fn points(&self) -> Vec<f64> {
        let last = (self.n - 1) as f64;
        (0..self.n)
            .map(|k| {
                let k = k as f64;
                // Blend from both ends so x_k = −x_{n−1−k} for symmetric grids.
                (self.min * (last - k) + self.max * k) / last
            })
            .collect()
    }
}

/// Ordered sample points with values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityGrid {
    points: Vec<f64>,
    values: Vec<f64>,
}

impl DensityGrid {
    pub fn new(points: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if points.len() != values.len() {
            return Err(Error::GridMismatch(format!(
                "{} points but {} values",
                points.len(),
                values.len()
            )));
        }
        if points.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::GridMismatch("points are not strictly increasing".into()));
        }
        Ok(Self { points, values })
    }

    /// Sample a fallible function on `spec`.
    pub fn tabulate<F>(spec: &GridSpec, exec: Exec, f: F) -> Result<Self>
    where
        F: Fn(f64) -> Result<f64> + Sync + Send,
    {
        let points = spec.points();
        let values = exec.try_map(&points, |&x| f(x))?;
        Self::new(points, values)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.points.iter().copied().zip(self.values.iter().copied())
    }

    /// Common spacing, if the points are uniform to relative `1e-9`.
    pub fn uniform_step(&self) -> Option<f64> {
        if self.len() < 2 {
            return None;
        }
        let h = (self.points[self.len() - 1] - self.points[0]) / (self.len() - 1) as f64;
        let uniform = self.points.windows(2).all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h);
        uniform.then_some(h)
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Value at the grid point nearest to `x`.
    pub fn nearest(&self, x: f64) -> Option<(f64, f64)> {
        self.iter().min_by(|a, b| (a.0 - x).abs().total_cmp(&(b.0 - x).abs()))
    }

    /// Largest `|f(x_k) − f(x_{n−1−k})|` over mirrored pairs, for grids that
    /// are symmetric about 0.
    pub fn asymmetry(&self) -> f64 {
        let n = self.len();
        (0..n / 2)
            .map(|k| (self.values[k] - self.values[n - 1 - k]).abs())
            .fold(0.0, f64::max)
    }

    /// Post-emission sanity scan: every value finite and, if requested,
    /// mirrored pairs equal to `symmetry_tol`.
    pub fn sanity_check(&self, symmetry_tol: Option<f64>) -> Result<()> {
        if let Some((x, v)) = self.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::GridMismatch(format!("non-finite value {v} at {x}")));
        }
        if let Some(tol) = symmetry_tol {
            let a = self.asymmetry();
            if a > tol {
                return Err(Error::GridMismatch(format!("asymmetry {a:e} exceeds {tol:e}")));
            }
        }
        Ok(())
    }

    /// CSV with `#`-prefixed comment lines, header `xi,value`, LF endings
    /// and 17 significant digits.
    pub fn to_csv(&self, comments: &[String]) -> String {
        let mut out = String::new();
        for c in comments {
            let _ = writeln!(out, "# {c}");
        }
        out.push_str("xi,value\n");
        for (x, v) in self.iter() {
            let _ = writeln!(out, "{},{}", fmt17(x), fmt17(v));
        }
        out
    }

    /// Parse the format written by [`DensityGrid::to_csv`]; returns the
    /// comment lines (without the `# ` prefix) and the grid.
    pub fn from_csv(text: &str) -> Result<(Vec<String>, Self)> {
        let mut comments = Vec::new();
        let mut points = Vec::new();
        let mut values = Vec::new();
        let mut saw_header = false;
        for line in text.lines() {
            if let Some(c) = line.strip_prefix('#') {
                comments.push(c.trim_start().to_string());
                continue;
            }
            if !saw_header {
                if line.trim() != "xi,value" {
                    return Err(Error::GridMismatch(format!("unexpected header {line:?}")));
                }
                saw_header = true;
                continue;
            }
            let (a, b) = line
                .split_once(',')
                .ok_or_else(|| Error::GridMismatch(format!("malformed row {line:?}")))?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::GridMismatch(format!("bad number {s:?}: {e}")))
            };
            points.push(parse(a)?);
            values.push(parse(b)?);
        }
        Ok((comments, Self::new(points, values)?))
    }
}

/// Decimal float with 17 significant digits.
pub fn fmt17(v: f64) -> String {
    if v == 0.0 {
        // keep the sign of negative zero out of tables
        return "0.0000000000000000e0".to_string();
    }
    format!("{v:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_points_are_exact_mirrors() {
        let g = GridSpec::new(-10.0, 10.0, 101).unwrap();
        let p = g.points();
        assert_eq!(p[0], -10.0);
        assert_eq!(p[100], 10.0);
        assert_eq!(p[50], 0.0);
        for k in 0..101 {
            assert_eq!(p[k], -p[100 - k]);
        }
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(GridSpec::new(0.0, 1.0, 1).is_err());
        assert!(GridSpec::new(1.0, 0.0, 5).is_err());
        assert!(DensityGrid::new(vec![0.0, 1.0], vec![1.0]).is_err());
        assert!(DensityGrid::new(vec![0.0, 0.0], vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn csv_round_trip_is_lossless() {
        let g = DensityGrid::new(vec![-1.0, 0.1, 0.7], vec![1.0 / 3.0, -2e-300, 0.0]).unwrap();
        let text = g.to_csv(&["t=1".into()]);
        assert!(text.starts_with("# t=1\nxi,value\n"));
        assert!(!text.contains('\r'));
        let (comments, back) = DensityGrid::from_csv(&text).unwrap();
        assert_eq!(comments, vec!["t=1".to_string()]);
        assert_eq!(back, g);
    }

    #[test]
    fn seventeen_digits() {
        assert_eq!(fmt17(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt17(-2.5), "-2.5000000000000000e0");
    }
}
