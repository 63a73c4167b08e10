//! Synthetic hourly bound series for the time-varying agents.
//!
//! These stand in for measured wind, solar and household data: simple
//! seeded generators with the right qualitative shape (persistence for
//! wind, a diurnal bell under a cloud process for solar, a double-peak
//! daily profile with a flexibility band for households). Outputs are
//! deterministic per seed.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

/// Generator family and its shape parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesKind {
    /// Mean-reverting autoregressive capacity factor, clipped to [0, 1].
    Wind {
        mean: f64,
        reversion: f64,
        sigma: f64,
    },
    /// Diurnal bell (zero at night) scaled by an autoregressive cloud
    /// factor.
    Solar { cloud_mean: f64, cloud_sigma: f64 },
    /// Double-peak daily demand with a symmetric flexibility band:
    /// the bounds are `[-(1 + flexibility), -(1 - flexibility)]` times the
    /// hour's demand.
    Household { scale: f64, flexibility: f64 },
}

impl SeriesKind {
    pub fn wind() -> Self {
        SeriesKind::Wind {
            mean: 0.42,
            reversion: 0.06,
            sigma: 0.10,
        }
    }

    pub fn solar() -> Self {
        SeriesKind::Solar {
            cloud_mean: 0.75,
            cloud_sigma: 0.12,
        }
    }

    pub fn household() -> Self {
        SeriesKind::Household {
            scale: 1.0,
            flexibility: 0.25,
        }
    }
}

/// One synthetic series: kind, capacity scale (kW) and seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesSpec {
    pub kind: SeriesKind,
    pub capacity_kw: f64,
    pub seed: u64,
}

/// Relative demand per hour of day: a morning and an evening peak over a
/// night floor.
fn household_profile(hour: usize) -> f64 {
    let h = hour as f64;
    let bump =
        |center: f64, width: f64| (-((h - center) * (h - center)) / (2.0 * width * width)).exp();
    let raw = 0.35 + 0.45 * bump(7.5, 1.6) + 0.65 * bump(19.0, 2.2);
    raw.min(1.0)
}

fn solar_envelope(hour: usize) -> f64 {
    let h = hour as f64;
    if !(6.0..=18.0).contains(&h) {
        return 0.0;
    }
    (std::f64::consts::PI * (h - 6.0) / 12.0)
        .sin()
        .max(0.0)
        .powf(1.3)
}

/// Generates `(p_min, p_max)` per step. Renewables are emitted as
/// must-take (`p_min == p_max`, non-negative); households as consumer
/// flexibility bands (both bounds non-positive). Values stay within
/// `[0, capacity]` in magnitude, modulo the flexibility margin.
pub fn generate_series(spec: &SeriesSpec, steps: usize) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let cap = spec.capacity_kw;
    let mut out = Vec::with_capacity(steps);

    match spec.kind {
        SeriesKind::Wind {
            mean,
            reversion,
            sigma,
        } => {
            let mut x: f64 = rng.gen_range(0.2..0.6);
            for _ in 0..steps {
                x += reversion * (mean - x) + sigma * normal.sample(&mut rng);
                let f = x.clamp(0.0, 1.0);
                out.push((cap * f, cap * f));
            }
        }
        SeriesKind::Solar {
            cloud_mean,
            cloud_sigma,
        } => {
            let mut cloud: f64 = cloud_mean;
            for t in 0..steps {
                cloud += 0.3 * (cloud_mean - cloud) + cloud_sigma * normal.sample(&mut rng);
                cloud = cloud.clamp(0.15, 1.0);
                let p = cap * solar_envelope(t % 24) * cloud;
                out.push((p, p));
            }
        }
        SeriesKind::Household { scale, flexibility } => {
            assert!((0.0..1.0).contains(&flexibility));
            for t in 0..steps {
                let noise = (0.12 * normal.sample(&mut rng)).clamp(-0.3, 0.3);
                let demand = (cap * scale * household_profile(t % 24) * (1.0 + noise)).max(0.0);
                out.push((-demand * (1.0 + flexibility), -demand * (1.0 - flexibility)));
            }
        }
    }
    out
}
