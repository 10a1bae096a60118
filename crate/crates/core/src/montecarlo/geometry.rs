use std::f64::consts::PI;

use nalgebra::{Point2, Vector2};
use rand::Rng;
use rand_distr::{Distribution, Poisson};

use super::rng::open_unit;
use crate::config::SystemConfig;

/// Interferers are dropped on a disc this many cell radii wide.
pub const SIM_REGION_FACTOR: f64 = 10.0;

/// One draw of node positions. The BS sits at the origin.
#[derive(Debug, Clone)]
pub struct NetworkRealization {
    /// U_c users, uniform on the cell disc. Entry 0 is the typical CUE.
    pub cue_positions: Vec<Point2<f64>>,
    /// Interfering D2D transmitters, PPP(λ_d) on the simulation disc.
    pub d2d_tx_positions: Vec<Point2<f64>>,
    /// Rx minus Tx for each interfering pair, length R₀₀.
    pub d2d_rx_offsets: Vec<Vector2<f64>>,
    /// Receiver of the typical pair, uniform on the cell disc.
    pub typical_d2d_rx: Point2<f64>,
    pub typical_d2d_tx: Point2<f64>,
}

pub fn uniform_in_disc<R: Rng + ?Sized>(rng: &mut R, radius: f64) -> Point2<f64> {
    let r = radius * open_unit(rng).sqrt();
    let theta = 2.0 * PI * rng.random::<f64>();
    Point2::new(r * theta.cos(), r * theta.sin())
}

pub fn isotropic_offset<R: Rng + ?Sized>(rng: &mut R, length: f64) -> Vector2<f64> {
    let theta = 2.0 * PI * rng.random::<f64>();
    Vector2::new(length * theta.cos(), length * theta.sin())
}

/// Poisson-distributed count with the given mean (0 when the mean is 0).
pub fn poisson_count<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("finite positive mean").sample(rng) as usize
}

impl NetworkRealization {
    pub fn sample<R: Rng + ?Sized>(cfg: &SystemConfig, rng: &mut R) -> Self {
        let cell = cfg.radius;
        let region = SIM_REGION_FACTOR * cell;
        let cue_positions = (0..cfg.n_cue).map(|_| uniform_in_disc(rng, cell)).collect();
        let typical_d2d_rx = uniform_in_disc(rng, cell);
        let typical_d2d_tx = typical_d2d_rx + isotropic_offset(rng, cfg.d2d_pair_distance);
        let count = poisson_count(rng, cfg.lambda_d * PI * region * region);
        let mut d2d_tx_positions = Vec::with_capacity(count);
        let mut d2d_rx_offsets = Vec::with_capacity(count);
        for _ in 0..count {
            d2d_tx_positions.push(uniform_in_disc(rng, region));
            d2d_rx_offsets.push(isotropic_offset(rng, cfg.d2d_pair_distance));
        }
        Self {
            cue_positions,
            d2d_tx_positions,
            d2d_rx_offsets,
            typical_d2d_rx,
            typical_d2d_tx,
        }
    }

    /// D_{0,BS}: typical CUE to BS.
    pub fn typical_cue_distance(&self) -> f64 {
        self.cue_positions[0].coords.norm()
    }

    /// R_{0,BS}: typical D2D receiver to BS.
    pub fn typical_d2d_rx_distance(&self) -> f64 {
        self.typical_d2d_rx.coords.norm()
    }

    pub fn d2d_rx_positions(&self) -> impl Iterator<Item = Point2<f64>> + '_ {
        self.d2d_tx_positions
            .iter()
            .zip(&self.d2d_rx_offsets)
            .map(|(tx, off)| tx + off)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::montecarlo::rng::trial_rng;

    #[test]
    fn pairs_are_exactly_r00_apart() {
        let cfg = SystemConfig::table_defaults();
        let mut rng = trial_rng(3, 0, 0);
        let real = NetworkRealization::sample(&cfg, &mut rng);
        assert!(!real.d2d_tx_positions.is_empty());
        for (tx, rx) in real.d2d_tx_positions.iter().zip(real.d2d_rx_positions()) {
            assert!(((rx - tx).norm() - 35.0).abs() < 1e-9);
        }
        assert!(((real.typical_d2d_tx - real.typical_d2d_rx).norm() - 35.0).abs() < 1e-9);
        assert!(real.typical_d2d_rx_distance() <= cfg.radius);
        assert_eq!(real.cue_positions.len(), cfg.n_cue);
    }

    #[test]
    fn uniform_disc_radius_law() {
        // P(|x| <= R/2) = 1/4 under the area-uniform law
        let mut rng = trial_rng(9, 0, 0);
        let n = 100_000;
        let inner = (0..n)
            .filter(|_| uniform_in_disc(&mut rng, 2.0).coords.norm() <= 1.0)
            .count() as f64
            / n as f64;
        assert!((inner - 0.25).abs() < 4.0 * (0.25f64 * 0.75 / n as f64).sqrt());
    }
}
