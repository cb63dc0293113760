//! Seeded random streams for kernel draws.
//!
//! A counter-based generator (ChaCha8) feeds a Box-Muller normal transform
//! and a Marsaglia-Tsang gamma sampler, so draws are reproducible across
//! platforms given the same seed and draw order.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::kernel::SymmetricKernel;

pub(crate) struct KernelStream {
    rng: ChaCha8Rng,
    spare_normal: Option<f64>,
}

impl KernelStream {
    pub fn new(seed: u64) -> Self {
        KernelStream {
            rng: ChaCha8Rng::seed_from_u64(seed),
            spare_normal: None,
        }
    }

    /// Uniform draw strictly inside (0,1), from the top 53 bits of a u64.
    pub fn uniform(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / 9007199254740992.0)
    }

    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Standard normal via Box-Muller; the paired draw is kept as a spare.
    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        let u1 = self.uniform();
        let u2 = self.uniform();
        let radius = (-2.0 * u1.ln()).sqrt();
        let angle = std::f64::consts::TAU * u2;
        self.spare_normal = Some(radius * angle.sin());
        radius * angle.cos()
    }

    /// Gamma(shape, 1) via Marsaglia-Tsang squeeze.
    pub fn gamma(&mut self, shape: f64) -> f64 {
        debug_assert!(shape > 0.0);
        if shape < 1.0 {
            let boost = self.uniform().powf(1.0 / shape);
            return self.gamma(shape + 1.0) * boost;
        }
        let d = shape - 1.0 / 3.0;
        let c = 1.0 / (9.0 * d).sqrt();
        loop {
            let x = self.normal();
            let t = 1.0 + c * x;
            if t <= 0.0 {
                continue;
            }
            let v = t * t * t;
            let u = self.uniform();
            let x2 = x * x;
            if u < 1.0 - 0.0331 * x2 * x2 {
                return d * v;
            }
            if u.ln() < 0.5 * x2 + d * (1.0 - v + v.ln()) {
                return d * v;
            }
        }
    }

    /// One draw from the kernel: normal directly, Student-t as a
    /// normal / chi-square ratio.
    pub fn draw(&mut self, kernel: &SymmetricKernel) -> f64 {
        match *kernel {
            SymmetricKernel::Normal => self.normal(),
            SymmetricKernel::StudentT { dof } => {
                let z = self.normal();
                let chi2 = 2.0 * self.gamma(0.5 * dof);
                z / (chi2 / dof).sqrt()
            }
        }
    }
}
