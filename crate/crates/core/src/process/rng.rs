//! Counter-based randomness: every draw is a hash of a seed and the
//! coordinates of the draw, so results do not depend on iteration order.

/// What a draw is used for; keeps streams for different purposes apart.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stream {
    Activation = 1,
    /// Rule-1 color choice of an active vertex.
    Draw = 2,
    /// Root color of an isolated cascade.
    Trace = 3,
    /// Value order for component solvers.
    Solve = 4,
}

/// Source of per-vertex randomness.
pub trait Randomness {
    /// Uniform in `[0, 1)`.
    fn unit(&self, stream: Stream, vertex: usize, step: u64) -> f64;

    /// Random priority of a palette color. A vertex choosing among colors
    /// takes the one with the smallest priority, which is a uniform choice.
    fn color_priority(&self, stream: Stream, vertex: usize, step: u64, color: u32) -> u64;
}

#[inline]
fn mix(mut x: u64) -> u64 {
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Seeded hash-based [`Randomness`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KeyedRng {
    seed: u64,
}

impl KeyedRng {
    pub fn new(seed: u64) -> Self {
        KeyedRng { seed: mix(seed ^ 0x6a09_e667_f3bc_c908) }
    }

    #[inline]
    fn bits(&self, stream: Stream, vertex: usize, step: u64, index: u64) -> u64 {
        let mut h = mix(self.seed ^ (stream as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
        h = mix(h ^ vertex as u64);
        h = mix(h ^ step.wrapping_mul(0xd1b5_4a32_d192_ed03));
        mix(h ^ index)
    }
}

impl Randomness for KeyedRng {
    #[inline]
    fn unit(&self, stream: Stream, vertex: usize, step: u64) -> f64 {
        (self.bits(stream, vertex, step, u64::MAX) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    #[inline]
    fn color_priority(&self, stream: Stream, vertex: usize, step: u64, color: u32) -> u64 {
        self.bits(stream, vertex, step, color as u64)
    }
}

/// Relabels the palette of an inner source: color `c` here gets the
/// priority that color `perm⁻¹(c)` has in `inner`. A process run with this
/// adapter produces the coloring of the inner run relabeled by `perm`.
#[derive(Clone, Debug)]
pub struct PermutedPalette<R> {
    inner: R,
    inverse: Vec<u32>,
}

impl<R: Randomness> PermutedPalette<R> {
    /// `perm[c]` is the new label of color `c`.
    pub fn new(inner: R, perm: &[u32]) -> Self {
        let mut inverse = vec![0; perm.len()];
        for (c, &pc) in perm.iter().enumerate() {
            inverse[pc as usize] = c as u32;
        }
        PermutedPalette { inner, inverse }
    }
}

impl<R: Randomness> Randomness for PermutedPalette<R> {
    fn unit(&self, stream: Stream, vertex: usize, step: u64) -> f64 {
        self.inner.unit(stream, vertex, step)
    }

    fn color_priority(&self, stream: Stream, vertex: usize, step: u64, color: u32) -> u64 {
        let c = self.inverse.get(color as usize).copied().unwrap_or(color);
        self.inner.color_priority(stream, vertex, step, c)
    }
}

impl<R: Randomness + ?Sized> Randomness for &R {
    fn unit(&self, stream: Stream, vertex: usize, step: u64) -> f64 {
        (**self).unit(stream, vertex, step)
    }

    fn color_priority(&self, stream: Stream, vertex: usize, step: u64, color: u32) -> u64 {
        (**self).color_priority(stream, vertex, step, color)
    }
}
