//! Telling `|C₊⟩` from `|C₋⟩` by measuring the imaginary quadrature, where the
//! two cats show interleaved fringes.

use std::f64::consts::FRAC_PI_2;

use rand::{Rng, RngCore};

use crate::fock::{default_cutoff, quadrature_distribution, FockVector, Parity, Truncation};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CatVerdict {
    Plus,
    Minus,
    Inconclusive,
}

/// Likelihood-ratio classifier for imaginary-quadrature readings.
#[derive(Debug, Clone)]
pub struct HomodyneDiscriminator {
    threshold: f64,
    plus: FockVector,
    minus: FockVector,
    grid: Vec<f64>,
}

const GRID_POINTS: usize = 8001;

impl HomodyneDiscriminator {
    /// `threshold ≥ 1` is the likelihood ratio required for a verdict.
    pub fn new(alpha: f64, threshold: f64) -> Result<Self> {
        if !(threshold >= 1.0) {
            return Err(Error::invalid(format!("likelihood-ratio threshold must be at least 1, got {threshold}")));
        }
        let t = Truncation::new(default_cutoff(alpha));
        let half = 8.0 + alpha;
        let step = 2.0 * half / (GRID_POINTS - 1) as f64;
        Ok(Self {
            threshold,
            plus: t.cat(alpha, Parity::Even)?,
            minus: t.cat(alpha, Parity::Odd)?,
            grid: (0..GRID_POINTS).map(|i| -half + i as f64 * step).collect(),
        })
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    fn verdict(&self, plus: f64, minus: f64) -> CatVerdict {
        let (winner, ratio) = if plus >= minus {
            (
                CatVerdict::Plus,
                if minus > 0.0 {
                    plus / minus
                } else if plus > 0.0 {
                    f64::INFINITY
                } else {
                    1.0
                },
            )
        } else {
            (CatVerdict::Minus, if plus > 0.0 { minus / plus } else { f64::INFINITY })
        };
        if ratio >= self.threshold {
            winner
        } else {
            CatVerdict::Inconclusive
        }
    }

    pub fn classify(&self, x: f64) -> CatVerdict {
        let p = quadrature_distribution(&self.plus, FRAC_PI_2, &[x])[0];
        let m = quadrature_distribution(&self.minus, FRAC_PI_2, &[x])[0];
        self.verdict(p, m)
    }

    /// Probabilities of `[Plus, Minus, Inconclusive]` for `state`, integrated
    /// on the internal grid.
    pub fn outcome_probabilities(&self, state: &FockVector) -> [f64; 3] {
        let density = quadrature_distribution(state, FRAC_PI_2, &self.grid);
        let plus = quadrature_distribution(&self.plus, FRAC_PI_2, &self.grid);
        let minus = quadrature_distribution(&self.minus, FRAC_PI_2, &self.grid);
        let mut out = [0.0; 3];
        for i in 0..self.grid.len() {
            let slot = match self.verdict(plus[i], minus[i]) {
                CatVerdict::Plus => 0,
                CatVerdict::Minus => 1,
                CatVerdict::Inconclusive => 2,
            };
            out[slot] += density[i];
        }
        let total: f64 = out.iter().sum();
        out.map(|p| p / total)
    }

    /// Draws a reading from the state's quadrature density by inverting its
    /// piecewise-linear cumulative distribution.
    pub fn sample(&self, state: &FockVector, rng: &mut dyn RngCore) -> (f64, CatVerdict) {
        let density = quadrature_distribution(state, FRAC_PI_2, &self.grid);
        let mut cdf = Vec::with_capacity(self.grid.len());
        let mut acc = 0.0;
        cdf.push(0.0);
        for i in 1..self.grid.len() {
            acc += 0.5 * (density[i] + density[i - 1]) * (self.grid[i] - self.grid[i - 1]);
            cdf.push(acc);
        }
        let u = rng.gen::<f64>() * acc;
        let i = cdf.partition_point(|c| *c < u).clamp(1, self.grid.len() - 1);
        let frac = if cdf[i] > cdf[i - 1] { (u - cdf[i - 1]) / (cdf[i] - cdf[i - 1]) } else { 0.5 };
        let x = self.grid[i - 1] + frac * (self.grid[i] - self.grid[i - 1]);
        (x, self.classify(x))
    }
}

/// One sampled verdict on `state` against cats of amplitude `alpha`.
pub fn homodyne_cat_discriminate(state: &FockVector, alpha: f64, threshold: f64, rng: &mut dyn RngCore) -> Result<CatVerdict> {
    Ok(HomodyneDiscriminator::new(alpha, threshold)?.sample(state, rng).1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn plus(alpha: f64) -> FockVector {
        Truncation::new(default_cutoff(alpha)).cat(alpha, Parity::Even).unwrap()
    }

    #[test]
    fn unit_threshold_always_decides() {
        let d = HomodyneDiscriminator::new(1.5, 1.0).unwrap();
        let p = d.outcome_probabilities(&plus(1.5));
        assert_eq!(p[2], 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            assert_ne!(d.sample(&plus(1.5), &mut rng).1, CatVerdict::Inconclusive);
        }
    }

    #[test]
    fn confident_verdicts_are_rarely_wrong() {
        let alpha = 2.0;
        let state = plus(alpha);
        let p = HomodyneDiscriminator::new(alpha, 100.0).unwrap().outcome_probabilities(&state);
        assert!(p[1] < 1e-3, "{p:?}");
        let mut last = 1.0;
        for t in [10.0, 100.0, 1e3, 1e4] {
            let p = HomodyneDiscriminator::new(alpha, t).unwrap().outcome_probabilities(&state);
            let conditional = p[1] / (p[0] + p[1]);
            assert!(conditional < last);
            last = conditional;
        }
        assert!(last < 1e-4, "{last}");
    }

    #[test]
    fn conclusive_fraction_shrinks_with_threshold() {
        let alpha = 1.5;
        let state = plus(alpha);
        let mut last = 1.0 + 1e-12;
        for t in [1.0, 2.0, 5.0, 20.0, 100.0, 1e4] {
            let p = HomodyneDiscriminator::new(alpha, t).unwrap().outcome_probabilities(&state);
            let conclusive = p[0] + p[1];
            assert!(conclusive <= last + 1e-12);
            last = conclusive;
        }
    }

    #[test]
    fn sampling_matches_integrated_probabilities() {
        let alpha = 1.5;
        let d = HomodyneDiscriminator::new(alpha, 10.0).unwrap();
        let state = plus(alpha);
        let p = d.outcome_probabilities(&state);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 1000;
        let hits = (0..n).filter(|_| d.sample(&state, &mut rng).1 == CatVerdict::Plus).count() as f64 / n as f64;
        let sigma = (p[0] * (1.0 - p[0]) / n as f64).sqrt();
        assert!((hits - p[0]).abs() < 5.0 * sigma, "{hits} vs {}", p[0]);
    }
}
