//! Deliberately naive re-implementation of the cascade dynamics: dense
//! adjacency, scalar loops, its own shock sampler and a sequential RNG.

use rand::seq::SliceRandom;
use rand::Rng;

pub struct BruteForceCascade {
    n: usize,
    /// `holds[j][i]`: node `j` is a shareholder of node `i`.
    holds: Vec<Vec<bool>>,
    k: f64,
    r: f64,
    steps: usize,
    shock: usize,
}

impl BruteForceCascade {
    /// `edges` are `(investee, shareholder)` pairs.
    pub fn new(n: usize, edges: &[(u32, u32)], alpha: f64, gamma: f64, steps: usize, shock_fraction: f64) -> Self {
        let mut holds = vec![vec![false; n]; n];
        for &(i, j) in edges {
            if i != j {
                holds[j as usize][i as usize] = true;
            }
        }
        let t = steps as f64;
        let k = if steps == 1 { alpha } else { 1.0 - (1.0 - alpha).powf(2.0 / (t + 1.0)) };
        Self {
            n,
            holds,
            k,
            r: (gamma / t).exp() - 1.0,
            steps,
            shock: (shock_fraction * n as f64 + 1e-9).floor() as usize,
        }
    }

    /// Returns `(mean downtime, failure proportion)`, both net of the shock.
    pub fn run<R: Rng>(&self, rng: &mut R) -> (f64, f64) {
        let n = self.n;
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        let mut down = vec![false; n];
        let mut fresh = vec![false; n];
        for &i in &order[..self.shock] {
            down[i] = true;
            fresh[i] = true;
        }
        let mut p = vec![0.0f64; n];
        let mut excess_cells = 0usize;
        for _ in 0..self.steps {
            let mut next_fresh = vec![false; n];
            for j in 0..n {
                if down[j] {
                    continue;
                }
                let d = (0..n).filter(|&i| self.holds[j][i]).count();
                if d == 0 {
                    continue;
                }
                let m = (0..n).filter(|&i| self.holds[j][i] && fresh[i]).count();
                let x = m as f64 * self.k / d as f64;
                p[j] = x + p[j] * (1.0 - x) / (1.0 + self.r);
                if rng.random::<f64>() < p[j] {
                    next_fresh[j] = true;
                }
            }
            for j in 0..n {
                if next_fresh[j] {
                    down[j] = true;
                }
            }
            fresh = next_fresh;
            excess_cells += down.iter().filter(|&&b| b).count() - self.shock;
        }
        let failed = down.iter().filter(|&&b| b).count() - self.shock;
        (
            excess_cells as f64 / (n * self.steps) as f64,
            failed as f64 / n as f64,
        )
    }
}
