use serde::{Deserialize, Serialize};

use crate::design::halton;
use crate::error::{Error, Result};
use crate::kernels::Point;

fn default_grid_size() -> usize {
    1001
}

fn default_starts() -> usize {
    64
}

/// Box domain and the resolution of the acquisition search over it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub bounds: Vec<(f64, f64)>,
    /// Uniform grid size in 1D.
    #[serde(default = "default_grid_size")]
    pub grid_size: usize,
    /// Number of multi-start seeds in higher dimensions.
    #[serde(default = "default_starts")]
    pub starts: usize,
}

impl DomainSpec {
    pub fn new(bounds: Vec<(f64, f64)>) -> Self {
        Self {
            bounds,
            grid_size: default_grid_size(),
            starts: default_starts(),
        }
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.bounds.is_empty() || self.bounds.iter().any(|(lo, hi)| !(lo <= hi)) {
            return Err(Error::EmptyDomain);
        }
        if self.dim() == 1 && self.grid_size == 0 || self.dim() > 1 && self.starts == 0 {
            return Err(Error::EmptyDomain);
        }
        Ok(())
    }

    /// The 1D evaluation grid.
    pub fn grid(&self) -> Result<Vec<Point>> {
        self.validate()?;
        if self.dim() != 1 {
            return Err(Error::invalid("domain", "grids are built in 1D only"));
        }
        let (lo, hi) = self.bounds[0];
        let n = self.grid_size;
        if n == 1 {
            return Ok(vec![vec![lo]]);
        }
        Ok((0..n)
            .map(|i| vec![lo + (hi - lo) * i as f64 / (n - 1) as f64])
            .collect())
    }

    /// Size of the finite domain the acquisition is searched over.
    pub fn candidate_count(&self) -> usize {
        if self.dim() == 1 {
            self.grid_size
        } else {
            self.starts
        }
    }

    fn clamp(&self, x: &mut [f64]) {
        for (v, (lo, hi)) in x.iter_mut().zip(&self.bounds) {
            *v = v.clamp(*lo, *hi);
        }
    }
}

/// Index of the largest value, lowest index on ties; NaNs never win.
pub fn argmax(values: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values.iter().enumerate() {
        if best.is_none_or(|(_, b)| *v > b) && !v.is_nan() {
            best = Some((i, *v));
        }
    }
    best.map(|(i, _)| i)
}

/// Maximizes `f` over the domain: exhaustive grid in 1D, multi-start
/// coordinate refinement from Halton seeds otherwise.
pub fn maximize<F>(domain: &DomainSpec, grid: Option<&[Point]>, f: F) -> Result<(Point, f64)>
where
    F: Fn(&[Point]) -> Result<Vec<f64>>,
{
    domain.validate()?;
    if domain.dim() == 1 {
        let owned;
        let grid = match grid {
            Some(g) => g,
            None => {
                owned = domain.grid()?;
                &owned
            }
        };
        let values = f(grid)?;
        let i = argmax(&values).ok_or(Error::EmptyDomain)?;
        return Ok((grid[i].clone(), values[i]));
    }

    let starts: Vec<Point> = (1..=domain.starts as u64)
        .map(|i| {
            halton(i, domain.dim()).map(|u| {
                u.iter()
                    .zip(&domain.bounds)
                    .map(|(u, (lo, hi))| lo + (hi - lo) * u)
                    .collect()
            })
        })
        .collect::<Result<_>>()?;
    let start_values = f(&starts)?;
    let mut best: Option<(Point, f64)> = None;
    for (start, value) in starts.into_iter().zip(start_values) {
        let (x, v) = refine(domain, start, value, &f)?;
        if best.as_ref().is_none_or(|(_, b)| v > *b) && !v.is_nan() {
            best = Some((x, v));
        }
    }
    best.ok_or(Error::EmptyDomain)
}

fn refine<F>(domain: &DomainSpec, mut x: Point, mut value: f64, f: &F) -> Result<(Point, f64)>
where
    F: Fn(&[Point]) -> Result<Vec<f64>>,
{
    const LEVELS: usize = 12;
    let ranges: Vec<f64> = domain.bounds.iter().map(|(lo, hi)| hi - lo).collect();
    for level in 0..LEVELS {
        let frac = 0.1 * 0.5f64.powi(level as i32);
        loop {
            let mut candidates = Vec::with_capacity(2 * domain.dim());
            for (d, range) in ranges.iter().enumerate() {
                for sign in [1.0, -1.0] {
                    let mut c = x.clone();
                    c[d] += sign * frac * range;
                    domain.clamp(&mut c);
                    candidates.push(c);
                }
            }
            let values = f(&candidates)?;
            match argmax(&values) {
                Some(i) if values[i] > value => {
                    value = values[i];
                    x = candidates.swap_remove(i);
                }
                _ => break,
            }
        }
    }
    Ok((x, value))
}
