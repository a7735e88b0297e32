//! Deterministic generators for the benchmark families: dynamic QFT,
//! iterative phase estimation, counterfeit coin, and randomized dynamic
//! circuits built from measure-and-feedforward blocks.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{Angle, Circuit, Condition, Gate1q, Gate2q, Operation};

/// Dynamic (semiclassical) QFT on `n` qubits.
///
/// Qubit `i` first receives `u1(pi/2^(i-j))` conditioned on `c[j]` for
/// every earlier `j`, then `h` and `measure q[i] -> c[i]`. The op count is
/// `n(n-1)/2 + 2n`.
pub fn gen_dqft(n: usize) -> Circuit {
    assert!(n >= 1, "dqft needs at least one qubit");
    let mut ops = Vec::with_capacity(n * (n - 1) / 2 + 2 * n);
    for i in 0..n {
        for j in 0..i {
            ops.push(
                Operation::gate1(Gate1q::U1(Angle::pi_over_pow2((i - j) as u32, false)), i)
                    .with_condition(Condition::bit(j, true)),
            );
        }
        ops.push(Operation::gate1(Gate1q::H, i));
        ops.push(Operation::measure(i, i));
    }
    Circuit::new(n, n, ops).expect("dqft generator emits a valid circuit")
}

/// Iterative phase estimation with one ancilla (qubit 0) and `n - 1`
/// system qubits, run for `n - 1` rounds.
///
/// Round `r`: `h` on the ancilla, a controlled phase from the ancilla onto
/// system qubits `1 + r mod (n-1)` and `1 + (r+1) mod (n-1)` (each as the
/// `u1 / cx / u1 / cx / u1` ladder), one `u1(-pi/2^(r-j))` correction per
/// earlier round `j` conditioned on `c[j]`, then `h`, `measure -> c[r]`,
/// and `reset`.
pub fn gen_ipe(n: usize) -> Circuit {
    assert!(n >= 2, "ipe needs an ancilla and at least one system qubit");
    let anc = 0;
    let system = n - 1;
    let rounds = n - 1;
    let mut ops = Vec::new();
    for s in 1..n {
        ops.push(Operation::gate1(Gate1q::X, s));
    }
    for r in 0..rounds {
        ops.push(Operation::gate1(Gate1q::H, anc));
        let mut targets = vec![1 + r % system, 1 + (r + 1) % system];
        targets.dedup();
        let k = (r % 8) as u32 + 1;
        for s in targets {
            ops.push(Operation::gate1(Gate1q::U1(Angle::pi_over_pow2(k + 1, false)), anc));
            ops.push(Operation::gate2(Gate2q::Cx, anc, s));
            ops.push(Operation::gate1(Gate1q::U1(Angle::pi_over_pow2(k + 1, true)), s));
            ops.push(Operation::gate2(Gate2q::Cx, anc, s));
            ops.push(Operation::gate1(Gate1q::U1(Angle::pi_over_pow2(k + 1, false)), s));
        }
        for j in 0..r {
            ops.push(
                Operation::gate1(Gate1q::U1(Angle::pi_over_pow2((r - j) as u32, true)), anc)
                    .with_condition(Condition::bit(j, true)),
            );
        }
        ops.push(Operation::gate1(Gate1q::H, anc));
        ops.push(Operation::measure(anc, r));
        ops.push(Operation::reset(anc));
    }
    Circuit::new(n, rounds, ops).expect("ipe generator emits a valid circuit")
}

/// Counterfeit-coin search over `n - 1` coin qubits and one oracle qubit
/// (the last one).
///
/// 1. `h` on every coin, `cx coin -> oracle` fan-in, mid-circuit
///    `measure oracle -> c[n-1]`.
/// 2. Re-query branch: `if (c[n-1]==0) h coin` on every coin.
/// 3. Oracle re-prepared as `|->` (`reset; x; h`), one `cx` from the false
///    coin `(n-1)/2`, then `h` and `measure` on every coin.
pub fn gen_counterfeit_coin(n: usize) -> Circuit {
    gen_cc_inner(n, true)
}

fn gen_cc_inner(n: usize, with_branch: bool) -> Circuit {
    assert!(n >= 4, "counterfeit coin needs at least four qubits");
    let coins = n - 1;
    let oracle = n - 1;
    let flag = n - 1;
    let mut ops = Vec::new();
    for q in 0..coins {
        ops.push(Operation::gate1(Gate1q::H, q));
    }
    for q in 0..coins {
        ops.push(Operation::gate2(Gate2q::Cx, q, oracle));
    }
    ops.push(Operation::measure(oracle, flag));
    if with_branch {
        for q in 0..coins {
            ops.push(Operation::gate1(Gate1q::H, q).with_condition(Condition::bit(flag, false)));
        }
    }
    ops.push(Operation::reset(oracle));
    ops.push(Operation::gate1(Gate1q::X, oracle));
    ops.push(Operation::gate1(Gate1q::H, oracle));
    ops.push(Operation::gate2(Gate2q::Cx, coins / 2, oracle));
    ops.push(Operation::barrier((0..n).collect()));
    for q in 0..coins {
        ops.push(Operation::gate1(Gate1q::H, q));
        ops.push(Operation::measure(q, q));
    }
    Circuit::new(n, n, ops).expect("cc generator emits a valid circuit")
}

/// Randomized dynamic circuit of `n_blocks` blocks. Each block is a layer
/// of random `{h, x, z}` on every qubit, `cx` on a random subset of a random
/// pairing, then `measure q[a] -> c[a]` and one random `{h, x, z}` on
/// another qubit conditioned on `c[a]`.
pub fn gen_random_dqc(n: usize, n_blocks: usize, seed: u64) -> Circuit {
    assert!(n >= 2 && n_blocks >= 1, "random dqc needs n >= 2 and at least one block");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pick = |rng: &mut ChaCha8Rng| match rng.random_range(0..3) {
        0 => Gate1q::H,
        1 => Gate1q::X,
        _ => Gate1q::Z,
    };
    let mut order: Vec<usize> = (0..n).collect();
    let mut ops = Vec::new();
    for _ in 0..n_blocks {
        for q in 0..n {
            ops.push(Operation::gate1(pick(&mut rng), q));
        }
        order.shuffle(&mut rng);
        for pair in order.chunks_exact(2) {
            if rng.random_bool(0.5) {
                ops.push(Operation::gate2(Gate2q::Cx, pair[0], pair[1]));
            }
        }
        let measured = rng.random_range(0..n);
        let mut target = rng.random_range(0..n - 1);
        if target >= measured {
            target += 1;
        }
        ops.push(Operation::measure(measured, measured));
        ops.push(Operation::gate1(pick(&mut rng), target).with_condition(Condition::bit(measured, true)));
    }
    Circuit::new(n, n, ops).expect("random dqc generator emits a valid circuit")
}

/// Default block count: about 2.1k ops at 20 qubits and 5.6k at 30.
pub fn default_random_blocks(n: usize) -> usize {
    n.max((7 * n).saturating_sub(62))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Dqft,
    Ipe,
    Cc,
    Random,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Dqft => "dqft",
            Family::Ipe => "ipe",
            Family::Cc => "cc",
            Family::Random => "random",
        }
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "dqft" | "qft" => Ok(Family::Dqft),
            "ipe" | "pe" => Ok(Family::Ipe),
            "cc" => Ok(Family::Cc),
            "random" | "rand" => Ok(Family::Random),
            other => Err(format!("unknown benchmark family `{other}`")),
        }
    }
}

/// A benchmark instance: family, size, and for `random` the block count
/// and generator seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Benchmark {
    pub family: Family,
    pub n: usize,
    pub blocks: Option<usize>,
    pub seed: u64,
}

impl Benchmark {
    pub fn new(family: Family, n: usize) -> Self {
        Benchmark { family, n, blocks: None, seed: 0 }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn generate(&self) -> Result<Circuit, String> {
        let min = match self.family {
            Family::Dqft => 1,
            Family::Ipe | Family::Random => 2,
            Family::Cc => 4,
        };
        if self.n < min {
            return Err(format!("{} needs n >= {min}, got {}", self.family.name(), self.n));
        }
        Ok(match self.family {
            Family::Dqft => gen_dqft(self.n),
            Family::Ipe => gen_ipe(self.n),
            Family::Cc => gen_counterfeit_coin(self.n),
            Family::Random => {
                let blocks = self.blocks.unwrap_or_else(|| default_random_blocks(self.n));
                if blocks == 0 {
                    return Err("random needs at least one block".into());
                }
                gen_random_dqc(self.n, blocks, self.seed)
            }
        })
    }
}

impl fmt::Display for Benchmark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.family.name(), self.n)
    }
}

impl FromStr for Benchmark {
    type Err = String;

    /// Accepts `dqft20`, `dqft-20`, `dqft:20`, `pe_20`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let split = s
            .find(|c: char| c.is_ascii_digit() || c == '-' || c == ':' || c == '_')
            .ok_or_else(|| format!("`{s}` is not a benchmark name"))?;
        let family: Family = s[..split].parse()?;
        let digits = s[split..].trim_start_matches(['-', ':', '_']);
        let n = digits
            .parse()
            .map_err(|_| format!("`{s}` has no qubit count"))?;
        Ok(Benchmark::new(family, n))
    }
}
