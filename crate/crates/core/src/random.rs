//! Seeded generators for random states, observers and plane-wave modes.
//!
//! All randomness in the crate flows through [`rng`] so that a single seed
//! reproduces every audit bit for bit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{FourVector, C64};
use crate::currents::Observer;
use crate::fields::{ProcaMode, ScalarMode};

pub type SimRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Deterministic sub-seed for a labelled consumer of a parent seed.
pub fn derive_seed(seed: u64, label: &str) -> u64 {
    // FNV-1a over the label, mixed with the parent seed through splitmix64.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    let mut z = seed ^ h;
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn complex_normal(r: &mut SimRng) -> C64 {
    // Box-Muller; two uniforms per complex sample.
    let u1: f64 = r.gen_range(f64::EPSILON..1.0);
    let u2: f64 = r.gen::<f64>();
    let rad = (-2.0 * u1.ln()).sqrt();
    let th = std::f64::consts::TAU * u2;
    C64::new(rad * th.cos(), rad * th.sin()) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn random_state(r: &mut SimRng, dim: usize) -> Vec<C64> {
    (0..dim).map(|_| complex_normal(r)).collect()
}

pub fn random_direction(r: &mut SimRng) -> [f64; 3] {
    loop {
        let v = [r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)];
        let n2: f64 = v.iter().map(|c| c * c).sum();
        if n2 > 1e-6 && n2 <= 1.0 {
            let n = n2.sqrt();
            return v.map(|c| c / n);
        }
    }
}

/// Observer boosted in a random direction with speed below `max_speed`.
pub fn random_observer(r: &mut SimRng, max_speed: f64) -> Observer {
    let dir = random_direction(r);
    let speed = r.gen_range(0.0..max_speed);
    Observer::moving(dir.map(|c| c * speed)).expect("speed below one")
}

pub fn random_three_momentum(r: &mut SimRng, scale: f64) -> [f64; 3] {
    [r.gen_range(-scale..scale), r.gen_range(-scale..scale), r.gen_range(-scale..scale)]
}

/// Positive-frequency on-shell scalar modes with random amplitudes.
pub fn random_scalar_modes(r: &mut SimRng, count: usize, mass: f64, p_scale: f64) -> Vec<ScalarMode> {
    (0..count).map(|_| ScalarMode::on_shell(complex_normal(r), random_three_momentum(r, p_scale), mass)).collect()
}

/// Positive-frequency Proca modes with random polarisations satisfying p.eps = 0.
pub fn random_proca_modes(r: &mut SimRng, count: usize, mass: f64, p_scale: f64) -> Vec<ProcaMode> {
    (0..count)
        .map(|_| {
            let p3 = random_three_momentum(r, p_scale);
            let e = (p3.iter().map(|c| c * c).sum::<f64>() + mass * mass).sqrt();
            let p = FourVector::from_parts(e, p3);
            let raw: [C64; 4] = std::array::from_fn(|_| complex_normal(r));
            ProcaMode::project(complex_normal(r), p, raw)
        })
        .collect()
}

pub fn uniform(r: &mut SimRng, lo: f64, hi: f64) -> f64 {
    r.gen_range(lo..hi)
}
