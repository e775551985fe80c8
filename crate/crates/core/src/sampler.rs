//! Sobol collocation sampling and the validation-triggered resampling rule.
//!
//! Points come from a two-dimensional Sobol sequence (Joe–Kuo direction
//! numbers, Gray-code order, origin skipped). Each set gets an independent
//! random digital shift, so fresh sets can be drawn on every resample.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pdeset::Domain;

const BITS: usize = 32;
const SCALE: f64 = 1.0 / 4_294_967_296.0;

/// Factor by which the validation loss must exceed the training loss before
/// the training set is replaced.
pub const RESAMPLE_FACTOR: f64 = 1.1;

/// Collocation counts used by the reference experiments.
pub const STANDARD_POINT_COUNTS: [usize; 3] = [256, 512, 1024];

fn direction_numbers(dim: usize) -> [u32; BITS] {
    let mut v = [0u32; BITS];
    match dim {
        // van der Corput
        0 => {
            for (k, vk) in v.iter_mut().enumerate() {
                *vk = 1 << (31 - k);
            }
        }
        // s = 1, a = 0, m = [1]
        1 => {
            v[0] = 1 << 31;
            for k in 1..BITS {
                v[k] = v[k - 1] ^ (v[k - 1] >> 1);
            }
        }
        _ => unreachable!("only two Sobol dimensions are used"),
    }
    v
}

/// A 1- or 2-dimensional Sobol stream under a fixed digital shift.
#[derive(Debug, Clone)]
pub struct SobolStream {
    dim: usize,
    index: u32,
    state: [u32; 2],
    shift: [u32; 2],
    dirs: [[u32; BITS]; 2],
}

impl SobolStream {
    /// Canonical (unshifted) stream.
    pub fn new(dim: usize) -> Self {
        SobolStream::with_shift(dim, [0, 0])
    }

    pub fn with_shift(dim: usize, shift: [u32; 2]) -> Self {
        assert!(dim == 1 || dim == 2, "Sobol streams are 1- or 2-dimensional");
        SobolStream {
            dim,
            index: 0,
            state: [0, 0],
            shift,
            dirs: [direction_numbers(0), direction_numbers(1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of points emitted so far.
    pub fn index(&self) -> u32 {
        self.index
    }

    /// Next shifted point as 32-bit fixed-point coordinates.
    pub fn next_bits(&mut self) -> [u32; 2] {
        let c = self.index.trailing_ones() as usize;
        assert!(c < BITS, "Sobol stream exhausted");
        self.index += 1;
        let mut out = [0u32; 2];
        for d in 0..self.dim {
            self.state[d] ^= self.dirs[d][c];
            out[d] = self.state[d] ^ self.shift[d];
        }
        out
    }

    /// Next point in `[0, 1)^dim`.
    pub fn next_point(&mut self) -> Vec<f64> {
        let b = self.next_bits();
        b[..self.dim].iter().map(|&v| v as f64 * SCALE).collect()
    }

    /// Next point mapped to the centre of its 2⁻³² cell, strictly inside `(0, 1)^dim`.
    fn next_open(&mut self) -> [f64; 2] {
        let b = self.next_bits();
        [(b[0] as f64 + 0.5) * SCALE, (b[1] as f64 + 0.5) * SCALE]
    }
}

/// Free-standing form of [`SobolStream::next_point`].
pub fn sobol_next(stream: &mut SobolStream) -> Vec<f64> {
    stream.next_point()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub t: f64,
    pub x: f64,
}

/// Interior, initial-time and spatial-boundary points; `n` of each.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CollocationSet {
    pub interior: Vec<Point>,
    pub initial: Vec<Point>,
    /// Alternates left and right walls; both walls see the same Sobol times,
    /// so every contiguous batch is balanced across walls.
    pub boundary: Vec<Point>,
}

/// Digital shifts for one collocation set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct SetShifts {
    interior: [u32; 2],
    initial: u32,
    boundary: u32,
}

impl SetShifts {
    fn draw(rng: &mut ChaCha8Rng) -> Self {
        SetShifts {
            interior: [rng.gen(), rng.gen()],
            initial: rng.gen(),
            boundary: rng.gen(),
        }
    }
}

impl CollocationSet {
    fn generate(n: usize, shifts: SetShifts, domain: &Domain) -> Self {
        let width = domain.x_hi - domain.x_lo;
        let mut s = SobolStream::with_shift(2, shifts.interior);
        let interior = (0..n)
            .map(|_| {
                let [u, v] = s.next_open();
                Point {
                    t: u * domain.t_max,
                    x: domain.x_lo + v * width,
                }
            })
            .collect();
        let mut s = SobolStream::with_shift(1, [shifts.initial, 0]);
        let initial = (0..n)
            .map(|_| Point {
                t: 0.0,
                x: domain.x_lo + s.next_open()[0] * width,
            })
            .collect();
        let mut s = SobolStream::with_shift(1, [shifts.boundary, 0]);
        let mut boundary = Vec::with_capacity(n);
        for _ in 0..n / 2 {
            let t = s.next_open()[0] * domain.t_max;
            boundary.push(Point { t, x: domain.x_lo });
            boundary.push(Point { t, x: domain.x_hi });
        }
        CollocationSet {
            interior,
            initial,
            boundary,
        }
    }

    /// Points per set.
    pub fn n(&self) -> usize {
        self.interior.len()
    }

    /// Contiguous slice `k` of `n_batches` from each of the three sets.
    pub fn batch(&self, k: usize, n_batches: usize) -> CollocationSet {
        let slice = |v: &Vec<Point>| {
            let m = v.len() / n_batches;
            v[k * m..(k + 1) * m].to_vec()
        };
        CollocationSet {
            interior: slice(&self.interior),
            initial: slice(&self.initial),
            boundary: slice(&self.boundary),
        }
    }
}

fn check_count(n: usize) -> Result<()> {
    if !(n.is_power_of_two() && (8..=1 << 20).contains(&n)) {
        return Err(Error::Config(format!(
            "collocation count must be a power of two between 8 and 2^20, got {n}"
        )));
    }
    Ok(())
}

/// Draws training/validation collocation sets for one run, replacing them on demand.
#[derive(Debug, Clone)]
pub struct SetSampler {
    n: usize,
    domain: Domain,
    rng: ChaCha8Rng,
    draws: usize,
}

impl SetSampler {
    pub fn new(n: usize, seed: u64, domain: Domain) -> Result<Self> {
        check_count(n)?;
        domain.validate()?;
        Ok(SetSampler {
            n,
            domain,
            rng: ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_50b0_1c0d_e5e7),
            draws: 0,
        })
    }

    /// Fresh `(train, validation)` pair with shifts drawn from the run's stream.
    pub fn draw(&mut self) -> (CollocationSet, CollocationSet) {
        let train = SetShifts::draw(&mut self.rng);
        let mut val = SetShifts::draw(&mut self.rng);
        while val.interior == train.interior || val.initial == train.initial || val.boundary == train.boundary {
            val = SetShifts::draw(&mut self.rng);
        }
        self.draws += 1;
        (
            CollocationSet::generate(self.n, train, &self.domain),
            CollocationSet::generate(self.n, val, &self.domain),
        )
    }

    /// Number of resamples performed (draws after the first).
    pub fn resample_count(&self) -> usize {
        self.draws.saturating_sub(1)
    }
}

/// Initial `(train, validation)` sets for a run.
pub fn sample_sets(n: usize, seed: u64, domain: Domain) -> Result<(CollocationSet, CollocationSet)> {
    Ok(SetSampler::new(n, seed, domain)?.draw())
}

/// True when the validation loss exceeds the training loss by more than the resample factor.
pub fn should_resample(train_loss: f64, val_loss: f64) -> Result<bool> {
    if !(train_loss.is_finite() && val_loss.is_finite()) || train_loss < 0.0 || val_loss < 0.0 {
        return Err(Error::Structural(format!(
            "resample check needs finite non-negative losses, got train={train_loss}, val={val_loss}"
        )));
    }
    Ok(val_loss > RESAMPLE_FACTOR * train_loss)
}
