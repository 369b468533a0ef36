//! Seeded random band-limited fields used by the property checks.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::grid::{Grid, GridFunction};

pub type CheckRng = ChaCha8Rng;

pub fn rng(seed: u64) -> CheckRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random mean-free trigonometric polynomial with modes `1..=max_mode` along
/// each axis, coefficients uniform in `[-1, 1]` damped by `1/k`.
pub fn random_trig(grid: Grid, rng: &mut CheckRng, max_mode: usize) -> GridFunction {
    let mut terms = Vec::new();
    match grid.dim() {
        1 => {
            for k in 1..=max_mode {
                let (a, b) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                terms.push((k as f64, 0.0, a / k as f64, b / k as f64));
            }
        }
        _ => {
            let m = max_mode as i64;
            for k1 in 0..=m {
                for k2 in -m..=m {
                    if k1 == 0 && k2 <= 0 {
                        continue;
                    }
                    let norm = ((k1 * k1 + k2 * k2) as f64).sqrt();
                    let (a, b) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                    terms.push((k1 as f64, k2 as f64, a / norm, b / norm));
                }
            }
        }
    }
    GridFunction::from_fn2(grid, |x1, x2| {
        terms
            .iter()
            .map(|&(k1, k2, a, b)| {
                let phase = k1 * x1 + k2 * x2;
                a * phase.cos() + b * phase.sin()
            })
            .sum()
    })
}

/// Default band limit for random covectors: an eighth of the grid, so that
/// triple products stay below the Nyquist frequency.
pub fn default_band(grid: Grid) -> usize {
    (grid.size(0) / 8).clamp(1, 16)
}
