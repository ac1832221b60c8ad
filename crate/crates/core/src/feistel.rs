//! Reduced-scale Feistel construction with per-round public functions and
//! independent secret subkeys.
//!
//! One round maps the state `(left ‖ right)` to
//! `(right ⊕ F_i(k_i ⊕ left) ‖ left)`. Writing the plaintext as `v₀ ‖ v₋₁`,
//! the state entering round `i` is `v_i ‖ v_{i-1}` and the round produces
//! `v_{i+1} = v_{i-1} ⊕ F_i(k_i ⊕ v_i)`. The ciphertext after `r` rounds is
//! `v_r ‖ v_{r-1}` with no extra swap.

use std::collections::HashSet;
use std::path::Path;
use std::sync::Mutex;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_BLOCK_BITS: u32 = 4;
pub const MAX_BLOCK_BITS: u32 = 32;

/// Format tag written into every cipher descriptor.
pub const DESCRIPTOR_FORMAT: &str = "qmitm-cipher/1";

/// An n-bit state split into two n/2-bit halves.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Block {
    pub left: u32,
    pub right: u32,
}

impl Block {
    pub const fn new(left: u32, right: u32) -> Self {
        Self { left, right }
    }

    pub fn xor(self, other: Block) -> Block {
        Block::new(self.left ^ other.left, self.right ^ other.right)
    }

    pub fn pack(self, half_bits: u32) -> u64 {
        ((self.left as u64) << half_bits) | self.right as u64
    }

    pub fn unpack(value: u64, half_bits: u32) -> Block {
        let mask = (1u64 << half_bits) - 1;
        Block::new((value >> half_bits) as u32, (value & mask) as u32)
    }

    fn check(self, half_bits: u32) -> Result<()> {
        for half in [self.left, self.right] {
            if (half as u64) >> half_bits != 0 {
                return Err(Error::OutOfRange { value: half as u64, bits: half_bits });
            }
        }
        Ok(())
    }
}

/// The public part of a cipher instance: one lookup table per round.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoundFunctions {
    half_bits: u32,
    tables: Vec<Vec<u32>>,
}

impl RoundFunctions {
    pub fn new(half_bits: u32, tables: Vec<Vec<u32>>) -> Result<Self> {
        if tables.is_empty() {
            return Err(Error::NoRounds);
        }
        let size = 1usize << half_bits;
        for (i, table) in tables.iter().enumerate() {
            if table.len() != size {
                return Err(Error::MalformedCipher(format!(
                    "round function {i} has {} entries, expected {size}",
                    table.len()
                )));
            }
            if let Some(&bad) = table.iter().find(|&&v| (v as usize) >= size) {
                return Err(Error::MalformedCipher(format!(
                    "round function {i} has entry {bad} outside {half_bits} bits"
                )));
            }
        }
        Ok(Self { half_bits, tables })
    }

    /// All-zero round functions, handy for degenerate checks.
    pub fn zero(half_bits: u32, rounds: usize) -> Self {
        Self { half_bits, tables: vec![vec![0; 1 << half_bits]; rounds] }
    }

    pub fn half_bits(&self) -> u32 {
        self.half_bits
    }

    pub fn block_bits(&self) -> u32 {
        2 * self.half_bits
    }

    /// Number of values a half-block can take.
    pub fn half_domain(&self) -> usize {
        1 << self.half_bits
    }

    pub fn mask(&self) -> u32 {
        ((1u64 << self.half_bits) - 1) as u32
    }

    pub fn rounds(&self) -> usize {
        self.tables.len()
    }

    pub fn table(&self, round: usize) -> &[u32] {
        &self.tables[round]
    }

    pub fn tables(&self) -> &[Vec<u32>] {
        &self.tables
    }

    #[inline]
    pub fn eval(&self, round: usize, x: u32) -> u32 {
        self.tables[round][x as usize]
    }

    #[inline]
    pub fn round(&self, round: usize, key: u32, state: Block) -> Block {
        Block::new(state.right ^ self.eval(round, key ^ state.left), state.left)
    }

    #[inline]
    pub fn unround(&self, round: usize, key: u32, state: Block) -> Block {
        Block::new(state.right, state.left ^ self.eval(round, key ^ state.right))
    }

    /// Encrypts with an explicit key vector, which may be a guess.
    pub fn encrypt_with(&self, keys: &[u32], p: Block) -> Block {
        debug_assert_eq!(keys.len(), self.rounds());
        keys.iter().enumerate().fold(p, |s, (i, &k)| self.round(i, k, s))
    }

    pub fn decrypt_with(&self, keys: &[u32], c: Block) -> Block {
        debug_assert_eq!(keys.len(), self.rounds());
        keys.iter().enumerate().rev().fold(c, |s, (i, &k)| self.unround(i, k, s))
    }

    /// Undoes the rounds covered by `guesses`, which must be a contiguous
    /// suffix `{r-m, …, r-1}` of the round indices (in any order). Returns the
    /// state `v_{t+1} ‖ v_t` entering the first undone round `t`.
    pub fn partial_decrypt(&self, c: Block, guesses: &[(usize, u32)]) -> Result<Block> {
        let r = self.rounds();
        let mut sorted = guesses.to_vec();
        sorted.sort_unstable_by_key(|&(round, _)| round);
        let first = r.wrapping_sub(sorted.len());
        let contiguous = sorted.len() <= r && sorted.iter().enumerate().all(|(i, &(round, _))| round == first + i);
        if !contiguous {
            return Err(Error::NonContiguousRounds { last: r.saturating_sub(1) });
        }
        c.check(self.half_bits)?;
        Ok(self.undo_suffix(c, &sorted))
    }

    /// Unchecked form of [`partial_decrypt`](Self::partial_decrypt) for a
    /// suffix key slice `keys[i]` guessing round `r - keys.len() + i`.
    #[inline]
    pub fn undo_rounds(&self, c: Block, keys: &[u32]) -> Block {
        let first = self.rounds() - keys.len();
        keys.iter().enumerate().rev().fold(c, |s, (i, &k)| self.unround(first + i, k, s))
    }

    fn undo_suffix(&self, c: Block, sorted: &[(usize, u32)]) -> Block {
        sorted.iter().rev().fold(c, |s, &(round, k)| self.unround(round, k, s))
    }
}

/// The intermediate values `v₋₁, v₀, …, v_r` of one encryption.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    values: Vec<u32>,
}

impl Trace {
    /// `v_i` for `-1 ≤ i ≤ r`.
    pub fn v(&self, i: isize) -> u32 {
        self.values[(i + 1) as usize]
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    /// State `v_{i+1} ‖ v_i`, i.e. the state after round `i`.
    pub fn state_after(&self, round: usize) -> Block {
        let i = round as isize;
        Block::new(self.v(i + 1), self.v(i))
    }
}

/// A concrete cipher instance: public round functions plus secret subkeys.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CipherSpec {
    seed: u64,
    functions: RoundFunctions,
    subkeys: Vec<u32>,
}

fn check_block_bits(n: u32) -> Result<()> {
    if !n.is_multiple_of(2) {
        return Err(Error::OddBlockSize(n));
    }
    if !(MIN_BLOCK_BITS..=MAX_BLOCK_BITS).contains(&n) {
        return Err(Error::UnsupportedBlockSize(n));
    }
    Ok(())
}

impl CipherSpec {
    /// Draws `r` independent uniform round functions and `r` uniform subkeys
    /// from a generator seeded with `seed`.
    pub fn generate(n: u32, r: usize, seed: u64) -> Result<Self> {
        check_block_bits(n)?;
        if r == 0 {
            return Err(Error::NoRounds);
        }
        let half_bits = n / 2;
        let size = 1u64 << half_bits;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tables = (0..r).map(|_| (0..size).map(|_| rng.gen_range(0..size) as u32).collect()).collect();
        let subkeys = (0..r).map(|_| rng.gen_range(0..size) as u32).collect();
        Ok(Self { seed, functions: RoundFunctions { half_bits, tables }, subkeys })
    }

    pub fn from_parts(n: u32, seed: u64, tables: Vec<Vec<u32>>, subkeys: Vec<u32>) -> Result<Self> {
        check_block_bits(n)?;
        let functions = RoundFunctions::new(n / 2, tables)?;
        if subkeys.len() != functions.rounds() {
            return Err(Error::MalformedCipher(format!("{} subkeys for {} rounds", subkeys.len(), functions.rounds())));
        }
        for &k in &subkeys {
            if k > functions.mask() {
                return Err(Error::OutOfRange { value: k as u64, bits: n / 2 });
            }
        }
        Ok(Self { seed, functions, subkeys })
    }

    pub fn n(&self) -> u32 {
        self.functions.block_bits()
    }

    pub fn r(&self) -> usize {
        self.functions.rounds()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn public(&self) -> &RoundFunctions {
        &self.functions
    }

    pub fn subkeys(&self) -> &[u32] {
        &self.subkeys
    }

    pub fn encrypt(&self, p: Block) -> Result<Block> {
        p.check(self.functions.half_bits)?;
        Ok(self.functions.encrypt_with(&self.subkeys, p))
    }

    pub fn decrypt(&self, c: Block) -> Result<Block> {
        c.check(self.functions.half_bits)?;
        Ok(self.functions.decrypt_with(&self.subkeys, c))
    }

    pub fn trace(&self, p: Block) -> Result<Trace> {
        p.check(self.functions.half_bits)?;
        let mut values = Vec::with_capacity(self.r() + 2);
        values.push(p.right);
        values.push(p.left);
        let mut state = p;
        for (i, &k) in self.subkeys.iter().enumerate() {
            state = self.functions.round(i, k, state);
            values.push(state.left);
        }
        Ok(Trace { values })
    }

    pub fn to_descriptor(&self, explicit: bool) -> CipherDescriptor {
        CipherDescriptor {
            format: DESCRIPTOR_FORMAT.to_string(),
            n: self.n(),
            r: self.r(),
            seed: self.seed,
            subkeys: explicit.then(|| self.subkeys.clone()),
            round_fns: explicit.then(|| self.functions.tables.clone()),
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_descriptor(true).to_toml()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        CipherDescriptor::from_toml(&std::fs::read_to_string(path)?)?.into_spec()
    }
}

/// Versioned, human-readable cipher description. Explicit tables and
/// subkeys, when present, take precedence over regeneration from the seed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CipherDescriptor {
    pub format: String,
    pub n: u32,
    pub r: usize,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subkeys: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub round_fns: Option<Vec<Vec<u32>>>,
}

impl CipherDescriptor {
    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn into_spec(self) -> Result<CipherSpec> {
        if self.format != DESCRIPTOR_FORMAT {
            return Err(Error::MalformedCipher(format!("unknown format tag {:?}", self.format)));
        }
        match (self.round_fns, self.subkeys) {
            (None, None) => CipherSpec::generate(self.n, self.r, self.seed),
            (Some(tables), Some(subkeys)) => {
                if tables.len() != self.r {
                    return Err(Error::MalformedCipher(format!(
                        "descriptor declares r={} but lists {} tables",
                        self.r,
                        tables.len()
                    )));
                }
                CipherSpec::from_parts(self.n, self.seed, tables, subkeys)
            }
            _ => Err(Error::MalformedCipher("round_fns and subkeys must be given together".into())),
        }
    }
}

/// Chosen-plaintext encryption oracle. Counts distinct plaintexts queried.
#[derive(Debug)]
pub struct EncryptionOracle {
    spec: CipherSpec,
    seen: Mutex<HashSet<u64>>,
}

impl EncryptionOracle {
    pub fn new(spec: CipherSpec) -> Self {
        Self { spec, seen: Mutex::new(HashSet::new()) }
    }

    /// Public round functions; everything an attacker may know offline.
    pub fn public(&self) -> &RoundFunctions {
        self.spec.public()
    }

    pub fn n(&self) -> u32 {
        self.spec.n()
    }

    pub fn rounds(&self) -> usize {
        self.spec.r()
    }

    pub fn query(&self, p: Block) -> Block {
        let half_bits = self.spec.public().half_bits;
        self.seen.lock().expect("query log poisoned").insert(p.pack(half_bits));
        self.spec.public().encrypt_with(&self.spec.subkeys, p)
    }

    /// Number of distinct plaintexts queried so far.
    pub fn distinct_queries(&self) -> u64 {
        self.seen.lock().expect("query log poisoned").len() as u64
    }

    /// The secret instance. Only verification harnesses should look here.
    pub fn secret(&self) -> &CipherSpec {
        &self.spec
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tiny() -> CipherSpec {
        CipherSpec::from_parts(4, 0, vec![vec![1, 2, 3, 0]], vec![1]).unwrap()
    }

    // Independent one-round reference: new left = right ^ F(k ^ left), new right = left.
    fn one_round_reference(f: &[u32], k: u32, (l, r): (u32, u32)) -> (u32, u32) {
        (r ^ f[(k ^ l) as usize], l)
    }

    #[test]
    fn generate_shapes() {
        let spec = CipherSpec::generate(12, 7, 0).unwrap();
        assert_eq!(spec.r(), 7);
        assert_eq!(spec.public().tables().len(), 7);
        assert!(spec.public().tables().iter().all(|t| t.len() == 64 && t.iter().all(|&v| v < 64)));
        assert_eq!(spec.subkeys().len(), 7);
        assert!(spec.subkeys().iter().all(|&k| k < 64));
        assert_eq!(spec, CipherSpec::generate(12, 7, 0).unwrap());
        assert_ne!(spec, CipherSpec::generate(12, 7, 1).unwrap());
    }

    #[test]
    fn generate_rejects_bad_sizes() {
        assert!(matches!(CipherSpec::generate(13, 7, 0), Err(Error::OddBlockSize(13))));
        assert!(matches!(CipherSpec::generate(2, 7, 0), Err(Error::UnsupportedBlockSize(2))));
        assert!(matches!(CipherSpec::generate(34, 7, 0), Err(Error::UnsupportedBlockSize(34))));
        assert!(matches!(CipherSpec::generate(12, 0, 0), Err(Error::NoRounds)));
    }

    #[test]
    fn one_round_hand_example() {
        // F0(1 ^ 2) = F0(3) = 0, so left = 3 ^ 0 = 3 and right = 2.
        let spec = tiny();
        assert_eq!(spec.encrypt(Block::new(2, 3)).unwrap(), Block::new(3, 2));
        assert_eq!(one_round_reference(&[1, 2, 3, 0], 1, (2, 3)), (3, 2));
        assert_eq!(spec.decrypt(Block::new(3, 2)).unwrap(), Block::new(2, 3));
        for l in 0..4 {
            for r in 0..4 {
                let c = spec.encrypt(Block::new(l, r)).unwrap();
                assert_eq!((c.left, c.right), one_round_reference(&[1, 2, 3, 0], 1, (l, r)));
            }
        }
    }

    #[test]
    fn zero_functions_swap_halves() {
        let zero = RoundFunctions::zero(6, 3);
        let keys = [5, 9, 17];
        assert_eq!(zero.encrypt_with(&keys, Block::new(1, 2)), Block::new(2, 1));
        let zero = RoundFunctions::zero(6, 2);
        assert_eq!(zero.encrypt_with(&keys[..2], Block::new(1, 2)), Block::new(1, 2));
    }

    #[test]
    fn range_check() {
        let spec = tiny();
        assert!(matches!(spec.encrypt(Block::new(4, 0)), Err(Error::OutOfRange { .. })));
        assert!(spec.decrypt(Block::new(0, 7)).is_err());
    }

    #[test]
    fn trace_matches_encrypt() {
        let spec = CipherSpec::generate(12, 7, 3).unwrap();
        let p = Block::new(17, 42);
        let t = spec.trace(p).unwrap();
        assert_eq!(t.v(-1), 42);
        assert_eq!(t.v(0), 17);
        assert_eq!(t.state_after(6), spec.encrypt(p).unwrap());
        for i in 0..7isize {
            let k = spec.subkeys()[i as usize];
            assert_eq!(t.v(i + 1), t.v(i - 1) ^ spec.public().eval(i as usize, k ^ t.v(i)));
        }
    }

    #[test]
    fn partial_decrypt_true_key_reaches_trace() {
        let spec = CipherSpec::generate(12, 7, 5).unwrap();
        let p = Block::new(33, 8);
        let c = spec.encrypt(p).unwrap();
        let t = spec.trace(p).unwrap();
        let k6 = spec.subkeys()[6];
        let s = spec.public().partial_decrypt(c, &[(6, k6)]).unwrap();
        assert_eq!(s, Block::new(t.v(6), t.v(5)));
        let suffix: Vec<_> = (3..7).map(|i| (i, spec.subkeys()[i])).collect();
        assert_eq!(spec.public().partial_decrypt(c, &suffix).unwrap(), t.state_after(2));
        assert_eq!(spec.public().undo_rounds(c, &spec.subkeys()[3..]), t.state_after(2));
    }

    #[test]
    fn partial_decrypt_edge_cases() {
        let spec = CipherSpec::generate(12, 7, 5).unwrap();
        let c = Block::new(1, 2);
        assert_eq!(spec.public().partial_decrypt(c, &[]).unwrap(), c);
        assert!(matches!(spec.public().partial_decrypt(c, &[(5, 0)]), Err(Error::NonContiguousRounds { last: 6 })));
        assert!(spec.public().partial_decrypt(c, &[(6, 0), (4, 0)]).is_err());
        // Wrong key still re-encrypts back under the same wrong key.
        let wrong = spec.subkeys()[6] ^ 1;
        let s = spec.public().partial_decrypt(c, &[(6, wrong)]).unwrap();
        assert_eq!(spec.public().round(6, wrong, s), c);
    }

    #[test]
    fn descriptor_round_trip() {
        let spec = CipherSpec::generate(12, 7, 11).unwrap();
        let text = spec.to_descriptor(true).to_toml().unwrap();
        let back = CipherDescriptor::from_toml(&text).unwrap().into_spec().unwrap();
        assert_eq!(back, spec);
        let short = spec.to_descriptor(false).to_toml().unwrap();
        assert!(!short.contains("round_fns"));
        assert_eq!(CipherDescriptor::from_toml(&short).unwrap().into_spec().unwrap(), spec);
        assert_eq!(text, spec.to_descriptor(true).to_toml().unwrap());
    }

    #[test]
    fn descriptor_rejects_partial_explicit() {
        let mut d = CipherSpec::generate(12, 7, 11).unwrap().to_descriptor(true);
        d.subkeys = None;
        assert!(d.into_spec().is_err());
        let mut d = CipherSpec::generate(12, 7, 11).unwrap().to_descriptor(false);
        d.format = "other/9".into();
        assert!(d.into_spec().is_err());
    }

    #[test]
    fn oracle_counts_distinct() {
        let oracle = EncryptionOracle::new(CipherSpec::generate(12, 7, 0).unwrap());
        let a = oracle.query(Block::new(1, 1));
        assert_eq!(oracle.query(Block::new(1, 1)), a);
        oracle.query(Block::new(1, 2));
        assert_eq!(oracle.distinct_queries(), 2);
    }

    proptest! {
        #[test]
        fn round_trip(half in 2u32..=10, r in 1usize..=9, seed: u64, raw: u64) {
            let spec = CipherSpec::generate(2 * half, r, seed).unwrap();
            let p = Block::unpack(raw & ((1u64 << (2 * half)) - 1), half);
            let c = spec.encrypt(p).unwrap();
            prop_assert_eq!(spec.decrypt(c).unwrap(), p);
            prop_assert_eq!(spec.encrypt(spec.decrypt(p).unwrap()).unwrap(), p);
        }

        #[test]
        fn pack_unpack(half in 2u32..=16, raw: u64) {
            let v = raw & ((1u64 << (2 * half)) - 1);
            prop_assert_eq!(Block::unpack(v, half).pack(half), v);
        }
    }
}
