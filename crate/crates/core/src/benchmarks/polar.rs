//! Polar-to-Cartesian moment-transform comparison.
//!
//! Input means sit on an outward spiral, `r_i = 2 + 0.5·i` m and
//! `θ_i = i·π/4`, with `σ_r` fixed and the azimuth deviation swept linearly
//! over a range of degrees. Each transform is scored by SKL against a seeded
//! Monte-Carlo reference.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::metrics::skl;
use super::models::{derive_seed, polar2cartesian, streams};
use crate::error::{Error, Result};
use crate::gpq::{GpqTransform, RbfKernelParams};
use crate::sigma_points::sr_points;
use crate::transform::{mc_transform, ClassicalTransform, FnMap, GaussianDensity, MomentTransform};

#[derive(Debug, Clone, PartialEq)]
pub struct PolarConfig {
    pub n_positions: usize,
    pub n_sigmas: usize,
    /// Range standard deviation, metres.
    pub sigma_r: f64,
    /// Smallest and largest azimuth standard deviation, degrees.
    pub sigma_theta_deg: (f64, f64),
    pub lengthscales: Vec<f64>,
    pub alpha: f64,
    pub mc_samples: usize,
    pub seed: u64,
}

impl Default for PolarConfig {
    fn default() -> Self {
        Self {
            n_positions: 10,
            n_sigmas: 10,
            sigma_r: 0.5,
            sigma_theta_deg: (6.0, 36.0),
            lengthscales: vec![60.0, 6.0],
            alpha: 1.0,
            mc_samples: 10_000,
            seed: 0,
        }
    }
}

impl PolarConfig {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.sigma_theta_deg;
        if self.n_positions == 0 || self.n_sigmas == 0 {
            return Err(Error::InvalidParameter("empty position or sigma grid".into()));
        }
        if !(self.sigma_r > 0.0 && lo > 0.0 && hi >= lo) {
            return Err(Error::InvalidParameter("invalid polar noise levels".into()));
        }
        if self.mc_samples < 2 {
            return Err(Error::InvalidParameter("Monte Carlo needs at least 2 samples".into()));
        }
        Ok(())
    }

    pub fn positions(&self) -> Vec<(f64, f64)> {
        (0..self.n_positions)
            .map(|i| (2.0 + 0.5 * i as f64, i as f64 * std::f64::consts::FRAC_PI_4))
            .collect()
    }

    pub fn sigmas_deg(&self) -> Vec<f64> {
        let (lo, hi) = self.sigma_theta_deg;
        if self.n_sigmas == 1 {
            return vec![lo];
        }
        let step = (hi - lo) / (self.n_sigmas - 1) as f64;
        (0..self.n_sigmas).map(|j| lo + step * j as f64).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SklCell {
    pub position_index: usize,
    pub sigma_theta_deg: f64,
    pub transform: String,
    pub skl: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolarReport {
    /// Ordered by position, then azimuth deviation, then transform.
    pub cells: Vec<SklCell>,
    pub transforms: Vec<String>,
}

impl PolarReport {
    fn mean_where(&self, transform: &str, pred: impl Fn(&SklCell) -> bool) -> f64 {
        let vals: Vec<f64> = self
            .cells
            .iter()
            .filter(|c| c.transform == transform && pred(c))
            .map(|c| c.skl)
            .collect();
        vals.iter().sum::<f64>() / vals.len() as f64
    }

    /// Per-position SKL averaged over azimuth deviations.
    pub fn average_over_sigmas(&self, transform: &str) -> Vec<f64> {
        let n = self.cells.iter().map(|c| c.position_index).max().map_or(0, |m| m + 1);
        (0..n)
            .map(|i| self.mean_where(transform, |c| c.position_index == i))
            .collect()
    }

    /// Per-azimuth-deviation SKL averaged over positions.
    pub fn average_over_positions(&self, transform: &str) -> Vec<f64> {
        let mut sigmas: Vec<f64> = self.cells.iter().map(|c| c.sigma_theta_deg).collect();
        sigmas.sort_by(f64::total_cmp);
        sigmas.dedup();
        sigmas
            .iter()
            .map(|s| self.mean_where(transform, |c| c.sigma_theta_deg == *s))
            .collect()
    }

    pub fn overall_mean(&self, transform: &str) -> f64 {
        self.mean_where(transform, |_| true)
    }
}

pub fn polar_experiment(config: &PolarConfig) -> Result<PolarReport> {
    config.validate()?;
    let points = sr_points(2)?;
    let kernel = RbfKernelParams::new(config.alpha, config.lengthscales.clone())?.for_dim(2)?;
    let transforms: Vec<Box<dyn MomentTransform>> = vec![
        Box::new(ClassicalTransform::new(points.clone())),
        Box::new(GpqTransform::new(&points, &kernel)?),
    ];
    let names: Vec<String> = transforms.iter().map(|t| t.name()).collect();
    let g = FnMap::new(2, 2, polar2cartesian);

    let grid: Vec<(usize, (f64, f64), usize, f64)> = config
        .positions()
        .into_iter()
        .enumerate()
        .flat_map(|(i, pos)| {
            config
                .sigmas_deg()
                .into_iter()
                .enumerate()
                .map(move |(j, s)| (i, pos, j, s))
        })
        .collect();

    let cells: Vec<Vec<SklCell>> = grid
        .par_iter()
        .map(|&(i, (r, theta), j, s_deg)| {
            let s = s_deg.to_radians();
            let input = GaussianDensity::new(
                DVector::from_vec(vec![r, theta]),
                DMatrix::from_diagonal(&DVector::from_vec(vec![config.sigma_r.powi(2), s * s])),
            )?;
            let cell_index = (i * config.n_sigmas + j) as u64;
            let truth = mc_transform(
                &g,
                &input,
                config.mc_samples,
                derive_seed(config.seed, streams::MONTE_CARLO, cell_index),
            )?
            .output_density()?;
            transforms
                .iter()
                .zip(&names)
                .map(|(t, name)| {
                    let out = t.apply(&g, &input)?.output_density()?;
                    Ok(SklCell {
                        position_index: i,
                        sigma_theta_deg: s_deg,
                        transform: name.clone(),
                        skl: skl(&truth, &out)?,
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    Ok(PolarReport {
        cells: cells.into_iter().flatten().collect(),
        transforms: names,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_layout() {
        let c = PolarConfig::default();
        let s = c.sigmas_deg();
        assert_eq!(s.len(), 10);
        assert_eq!(s[0], 6.0);
        assert!((s[9] - 36.0).abs() < 1e-12);
        let p = c.positions();
        assert_eq!(p[0], (2.0, 0.0));
        assert_eq!(p.len(), 10);
    }

    #[test]
    fn small_experiment_shape() {
        let c = PolarConfig {
            n_positions: 2,
            n_sigmas: 3,
            mc_samples: 2000,
            ..PolarConfig::default()
        };
        let r = polar_experiment(&c).unwrap();
        assert_eq!(r.cells.len(), 12);
        assert_eq!(r.transforms, vec!["SR".to_string(), "GPQ-SR".to_string()]);
        assert_eq!(r.average_over_sigmas("SR").len(), 2);
        assert_eq!(r.average_over_positions("GPQ-SR").len(), 3);
        assert!(r.cells.iter().all(|c| c.skl >= 0.0));
    }
}
