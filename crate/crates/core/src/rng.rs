//! Counter-addressed random streams.
//!
//! A [`Seed`] names a stream by `(master, experiment, sample index, role)`.
//! The four words are written verbatim into a ChaCha8 key, so distinct
//! addresses give distinct keys and streams never overlap. Nested roles are
//! folded into the role word with a SplitMix64 step.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Purpose of a stream inside one sample.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Role {
    Main,
    Inner,
    Outer,
    Reference,
    Tag(u64),
}

impl Role {
    fn word(self) -> u64 {
        match self {
            Role::Main => 0,
            Role::Inner => 1,
            Role::Outer => 2,
            Role::Reference => 3,
            Role::Tag(t) => 0x100 + t,
        }
    }
}

#[inline]
fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Seed {
    master: u64,
    experiment: u64,
    index: u64,
    role: u64,
}

impl Seed {
    pub fn new(master: u64) -> Self {
        Self {
            master,
            experiment: 0,
            index: 0,
            role: 0,
        }
    }

    pub fn master(&self) -> u64 {
        self.master
    }

    pub fn with_experiment(self, experiment: u64) -> Self {
        Self { experiment, ..self }
    }

    pub fn with_index(self, index: u64) -> Self {
        Self { index, ..self }
    }

    /// Sub-stream for `role`; `split(a)` and `split(b)` never coincide for
    /// `a != b`, and repeated splits nest.
    pub fn split(self, role: Role) -> Self {
        let role = if self.role == 0 {
            role.word()
        } else {
            splitmix(self.role ^ splitmix(role.word()))
        };
        Self { role, ..self }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.master.to_le_bytes());
        key[8..16].copy_from_slice(&self.experiment.to_le_bytes());
        key[16..24].copy_from_slice(&self.index.to_le_bytes());
        key[24..].copy_from_slice(&self.role.to_le_bytes());
        ChaCha8Rng::from_seed(key)
    }
}

impl From<u64> for Seed {
    fn from(master: u64) -> Self {
        Seed::new(master)
    }
}
