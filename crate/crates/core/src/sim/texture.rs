//! Deterministic procedural textures: seeded value noise plus an optional
//! checker, with octaves faded out once they fall below the pixel footprint.

use serde::{Deserialize, Serialize};

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn lattice(seed: u64, i: i64, j: i64) -> f64 {
    let h = mix64(seed ^ mix64((i as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ (j as u64)));
    (h >> 11) as f64 / (1u64 << 53) as f64
}

fn smooth(t: f64) -> f64 {
    t * t * (3.0 - 2.0 * t)
}

/// Value noise in `[0, 1]` with unit lattice spacing. When `period` is set the
/// lattice repeats every `period` cells along `u`.
pub(crate) fn value_noise(seed: u64, u: f64, v: f64, period: Option<i64>) -> f64 {
    let (fu, fv) = (u.floor(), v.floor());
    let (tu, tv) = (smooth(u - fu), smooth(v - fv));
    let (i, j) = (fu as i64, fv as i64);
    let wrap = |k: i64| match period {
        Some(p) => k.rem_euclid(p),
        None => k,
    };
    let a = lattice(seed, wrap(i), j);
    let b = lattice(seed, wrap(i + 1), j);
    let c = lattice(seed, wrap(i), j + 1);
    let d = lattice(seed, wrap(i + 1), j + 1);
    let top = a + (b - a) * tu;
    let bottom = c + (d - c) * tu;
    top + (bottom - top) * tv
}

/// Weight of a feature with the given wavelength seen through a pixel
/// footprint: 1 when at least four pixels span it, 0 below two.
fn band_weight(wavelength: f64, footprint: f64) -> f64 {
    if footprint <= 0.0 {
        return 1.0;
    }
    let r = wavelength / footprint;
    smooth(((r - 2.0) / 2.0).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Texture {
    pub seed: u64,
    /// Lattice cells per metre of the coarsest octave.
    pub frequency: f64,
    pub octaves: u32,
    /// Mean intensity in `[0, 1]`.
    pub mean: f64,
    /// Gain applied around the mean before clamping.
    pub contrast: f64,
    /// Checker square size in metres, if any.
    pub checker: Option<f64>,
}

impl Texture {
    pub fn obstacle(seed: u64) -> Self {
        Self {
            seed,
            frequency: 16.0,
            octaves: 5,
            mean: 0.5,
            contrast: 1.6,
            checker: Some(0.08),
        }
    }

    pub fn floor(seed: u64) -> Self {
        Self {
            seed,
            frequency: 6.0,
            octaves: 3,
            mean: 0.42,
            contrast: 0.0,
            checker: None,
        }
    }

    pub fn backdrop(seed: u64) -> Self {
        Self {
            seed,
            frequency: 4.0,
            octaves: 6,
            mean: 0.6,
            contrast: 1.1,
            checker: None,
        }
    }

    /// Intensity in `[0, 1]` at surface coordinates `(u, v)` metres, averaged
    /// over a pixel footprint of `footprint` metres.
    pub fn sample(&self, u: f64, v: f64, footprint: f64) -> f64 {
        self.sample_with_period(u, v, footprint, None)
    }

    pub(crate) fn sample_with_period(&self, u: f64, v: f64, footprint: f64, period_m: Option<f64>) -> f64 {
        let mut sum = 0.0;
        let mut norm = 0.0;
        let mut freq = self.frequency;
        let mut amp = 1.0;
        for o in 0..self.octaves {
            let w = band_weight(1.0 / freq, footprint);
            let period = period_m.map(|p| (p * freq).round().max(1.0) as i64);
            let n = if w > 0.0 {
                let seed = self.seed.wrapping_add(o as u64 * 0x51_7cc1);
                value_noise(seed, u * freq, v * freq, period)
            } else {
                0.5
            };
            sum += amp * (0.5 + w * (n - 0.5));
            norm += amp;
            freq *= 2.0;
            amp *= 0.5;
        }
        let mut value = sum / norm;
        if let Some(size) = self.checker {
            let w = band_weight(2.0 * size, footprint);
            let parity = ((u / size).floor() as i64 + (v / size).floor() as i64).rem_euclid(2);
            let c = if parity == 0 { 0.25 } else { -0.25 };
            value += w * c * 0.5;
        }
        (self.mean + self.contrast * (value - 0.5)).clamp(0.0, 1.0)
    }
}
