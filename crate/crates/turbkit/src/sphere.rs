use crate::error::{Result, TurbError};

/// Quadrature nodes on the unit sphere for directional averages.
///
/// Fibonacci lattice with half-integer offset: node i sits at height
/// z = 1 - (2i+1)/n and azimuth i times the golden angle. Weights are the
/// equal-area value 4 pi / n.
#[derive(Debug, Clone)]
pub struct DirectionSet {
    dirs: Vec<[f64; 3]>,
    weight: f64,
}

impl DirectionSet {
    pub fn fibonacci(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(TurbError::InvalidConfig(format!(
                "direction count {n} must be at least 2"
            )));
        }
        let golden_angle = std::f64::consts::PI * (3.0 - 5.0_f64.sqrt());
        let dirs = (0..n)
            .map(|i| {
                let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
                let s = (1.0 - z * z).max(0.0).sqrt();
                let phi = golden_angle * i as f64;
                [s * phi.cos(), s * phi.sin(), z]
            })
            .collect();
        Ok(DirectionSet {
            dirs,
            weight: 4.0 * std::f64::consts::PI / n as f64,
        })
    }

    /// Explicit node list with equal weights, normalized to unit length.
    /// Useful for pinning a single direction in exactness checks.
    pub fn from_directions(dirs: Vec<[f64; 3]>) -> Result<Self> {
        if dirs.is_empty() {
            return Err(TurbError::InvalidConfig(
                "direction set must not be empty".into(),
            ));
        }
        let mut unit = Vec::with_capacity(dirs.len());
        for d in dirs {
            let norm = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
            if norm == 0.0 || !norm.is_finite() {
                return Err(TurbError::InvalidConfig(format!(
                    "direction {d:?} cannot be normalized"
                )));
            }
            unit.push([d[0] / norm, d[1] / norm, d[2] / norm]);
        }
        let weight = 4.0 * std::f64::consts::PI / unit.len() as f64;
        Ok(DirectionSet { dirs: unit, weight })
    }

    pub fn len(&self) -> usize {
        self.dirs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dirs.is_empty()
    }

    pub fn dirs(&self) -> &[[f64; 3]] {
        &self.dirs
    }

    /// Weight attached to every node (equal-area rule).
    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn total_weight(&self) -> f64 {
        self.weight * self.dirs.len() as f64
    }

    /// Average of f over the sphere: (1 / 4pi) sum_i w f(n_i).
    pub fn average<F: FnMut(&[f64; 3]) -> f64>(&self, mut f: F) -> f64 {
        let sum: f64 = self.dirs.iter().map(|d| f(d)).sum();
        sum * self.weight / (4.0 * std::f64::consts::PI)
    }

    /// Second moment matrix (1 / 4pi) sum_i w n_i n_i^T.
    pub fn second_moment(&self) -> [[f64; 3]; 3] {
        let mut m = [[0.0; 3]; 3];
        for d in &self.dirs {
            for a in 0..3 {
                for b in 0..3 {
                    m[a][b] += d[a] * d[b];
                }
            }
        }
        let scale = self.weight / (4.0 * std::f64::consts::PI);
        for row in &mut m {
            for v in row {
                *v *= scale;
            }
        }
        m
    }
}
