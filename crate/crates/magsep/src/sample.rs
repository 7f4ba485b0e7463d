//! Deterministic, seed-driven sampling of admissible phase-space points.

use crate::system::{MagneticSystem, PhasePoint};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Default sampling seed.
pub const DEFAULT_SEED: u64 = 0xC0FFEE;

/// How one coordinate is drawn.
#[derive(Clone, Copy, Debug)]
pub enum CoordRange {
    /// Uniform in [lo, hi].
    Interval(f64, f64),
    /// |x| uniform in [lo, hi], random sign (keeps clear of x = 0).
    Shell(f64, f64),
    /// x uniform in [lo, hi] with lo > 0 (positive-domain coordinates).
    PositiveShell(f64, f64),
    /// Exactly this value (pins a coordinate).
    Fixed(f64),
}

impl CoordRange {
    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        match *self {
            CoordRange::Interval(lo, hi) => rng.gen_range(lo..hi),
            CoordRange::Shell(lo, hi) => {
                let mag = rng.gen_range(lo..hi);
                if rng.gen_bool(0.5) {
                    mag
                } else {
                    -mag
                }
            }
            CoordRange::PositiveShell(lo, hi) => rng.gen_range(lo..hi),
            CoordRange::Fixed(v) => v,
        }
    }
}

/// A sampling box over phase space.
#[derive(Clone, Copy, Debug)]
pub struct SampleBox {
    pub x: [CoordRange; 3],
    pub p: [CoordRange; 3],
}

impl SampleBox {
    /// Generic box for systems with no singular set.
    pub fn plain() -> Self {
        SampleBox {
            x: [CoordRange::Interval(-1.2, 1.2); 3],
            p: [CoordRange::Interval(-1.0, 1.0); 3],
        }
    }

    pub fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> PhasePoint {
        PhasePoint {
            x: [0, 1, 2].map(|i| self.x[i].sample(rng)),
            p: [0, 1, 2].map(|i| self.p[i].sample(rng)),
        }
    }

    /// Draw `n` points admissible for `sys` (rejection sampling).
    pub fn sample_admissible(
        &self,
        sys: &MagneticSystem,
        seed: u64,
        n: usize,
    ) -> Vec<PhasePoint> {
        let mut rng = Self::rng(seed);
        let mut out = Vec::with_capacity(n);
        let mut attempts = 0usize;
        while out.len() < n && attempts < 100 * n + 1000 {
            attempts += 1;
            let pt = self.sample(&mut rng);
            if sys.check_admissible(&pt.x).is_ok() {
                out.push(pt);
            }
        }
        out
    }
}
