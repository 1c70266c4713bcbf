//! Private sampling primitives shared by the traffic and channel modules.
//! Callers guarantee scale > 0; zero-scale cases short-circuit upstream.

use rand::Rng;
use rand_distr::{Distribution, Exp, Normal};

/// Laplace(0, scale) via inverse CDF (rand_distr has no Laplace).
pub(crate) fn laplace(rng: &mut impl Rng, scale: f64) -> f64 {
    loop {
        let u: f64 = rng.random();
        let c = u - 0.5;
        let t = 1.0 - 2.0 * c.abs();
        // t == 0 only at the 2^-53 edge u == 0; redraw instead of returning inf.
        if t > 0.0 {
            return -scale * c.signum() * t.ln();
        }
    }
}

pub(crate) fn gaussian(rng: &mut impl Rng, sigma: f64) -> f64 {
    Normal::new(0.0, sigma)
        .expect("sigma validated positive")
        .sample(rng)
}

/// Uniform on [-half_width, half_width).
pub(crate) fn uniform_pm(rng: &mut impl Rng, half_width: f64) -> f64 {
    (rng.random::<f64>() * 2.0 - 1.0) * half_width
}

pub(crate) fn exponential(rng: &mut impl Rng, rate: f64) -> f64 {
    Exp::new(rate).expect("rate validated positive").sample(rng)
}
