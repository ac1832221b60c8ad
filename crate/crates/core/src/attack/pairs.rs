//! Chosen-plaintext structures, filtered pair tables and the plaintext →
//! ciphertext table used for δ-set lookups.

use std::collections::{HashMap, HashSet};
use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::table::read_array;
use crate::error::{Error, Result};
use crate::feistel::{Block, EncryptionOracle};

const PAIR_MAGIC: &[u8; 4] = b"QMPT";
const PAIR_VERSION: u16 = 1;

/// Plaintext → ciphertext table filled from oracle queries.
#[derive(Clone, Debug, Default)]
pub struct PlaintextTable {
    half_bits: u32,
    map: HashMap<u64, Block>,
}

impl PlaintextTable {
    pub fn new(half_bits: u32) -> Self {
        Self { half_bits, map: HashMap::new() }
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn get(&self, p: Block) -> Option<Block> {
        self.map.get(&p.pack(self.half_bits)).copied()
    }

    pub fn contains(&self, p: Block) -> bool {
        self.map.contains_key(&p.pack(self.half_bits))
    }

    /// Queries `p` unless it is already known. Returns `true` for a fresh query.
    pub fn fetch(&mut self, oracle: &EncryptionOracle, p: Block) -> bool {
        let key = p.pack(self.half_bits);
        if self.map.contains_key(&key) {
            return false;
        }
        self.map.insert(key, oracle.query(p));
        true
    }

    pub fn insert(&mut self, p: Block, c: Block) {
        self.map.insert(p.pack(self.half_bits), c);
    }
}

/// `2^k` structures of `2^{h+1}` plaintexts each: the left halves `m` and
/// `m ⊕ X` paired with every right half. Text `i` of structure `s` on side
/// `b` sits at index `((2s + b) << h) | j`.
#[derive(Clone, Debug)]
pub struct Structures {
    half_bits: u32,
    x: u32,
    lefts: Vec<u32>,
    texts: Vec<(Block, Block)>,
}

impl Structures {
    /// Draws `count` left halves with pairwise disjoint `{m, m ⊕ X}` and
    /// queries every plaintext.
    pub fn collect(oracle: &EncryptionOracle, x: u32, count: usize, seed: u64) -> Result<Self> {
        let half_bits = oracle.public().half_bits();
        let domain = oracle.public().half_domain();
        if x == 0 || x as usize >= domain {
            return Err(Error::InvalidParameter(format!("input difference {x:#x} invalid")));
        }
        if 2 * count > domain {
            return Err(Error::InvalidParameter(format!("{count} structures do not fit a {half_bits}-bit half")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5354_5255_4354);
        let mut used = HashSet::new();
        let mut lefts = Vec::with_capacity(count);
        while lefts.len() < count {
            let m = rng.gen_range(0..domain as u32);
            if !used.contains(&m) && !used.contains(&(m ^ x)) {
                used.insert(m);
                used.insert(m ^ x);
                lefts.push(m);
            }
        }
        Self::from_lefts(oracle, x, lefts)
    }

    /// Queries the structures with the given left halves `m`.
    pub fn from_lefts(oracle: &EncryptionOracle, x: u32, lefts: Vec<u32>) -> Result<Self> {
        let half_bits = oracle.public().half_bits();
        let domain = oracle.public().half_domain();
        if x == 0 || x as usize >= domain {
            return Err(Error::InvalidParameter(format!("input difference {x:#x} invalid")));
        }
        let mut used = HashSet::new();
        for &m in &lefts {
            if m as usize >= domain || !used.insert(m) || !used.insert(m ^ x) {
                return Err(Error::InvalidParameter(format!("structure left half {m:#x} overlaps another structure")));
            }
        }
        let mut texts = Vec::with_capacity(lefts.len() * 2 * domain);
        for &m in &lefts {
            for left in [m, m ^ x] {
                for j in 0..domain as u32 {
                    let p = Block::new(left, j);
                    texts.push((p, oracle.query(p)));
                }
            }
        }
        Ok(Self { half_bits, x, lefts, texts })
    }

    pub fn x(&self) -> u32 {
        self.x
    }

    pub fn lefts(&self) -> &[u32] {
        &self.lefts
    }

    pub fn texts(&self) -> &[(Block, Block)] {
        &self.texts
    }

    pub fn len(&self) -> usize {
        self.texts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.texts.is_empty()
    }

    /// Number of cross pairs `(P, P')` with `P` on the `m` side.
    pub fn cross_pairs(&self) -> u64 {
        (self.lefts.len() as u64) << (2 * self.half_bits)
    }

    pub fn plaintext_table(&self) -> PlaintextTable {
        let mut t = PlaintextTable::new(self.half_bits);
        for &(p, c) in &self.texts {
            t.insert(p, c);
        }
        t
    }

    /// A few known plaintext/ciphertext pairs for trial encryption.
    pub fn known_pairs(&self, count: usize) -> Vec<(Block, Block)> {
        self.texts.iter().step_by(37).take(count).copied().collect()
    }

    /// Cross pairs whose working states agree on `bucket` and pass `accept`,
    /// in `(structure, j, j')` order. `work[i]` is the working state of
    /// text `i` (its ciphertext, possibly with guessed rounds undone).
    pub fn filter_pairs(
        &self,
        work: &[Block],
        bucket: impl Fn(Block) -> u64,
        accept: impl Fn(Block, Block) -> bool,
    ) -> Vec<PairRecord> {
        assert_eq!(work.len(), self.texts.len());
        let side = 1usize << self.half_bits;
        let mut out = Vec::new();
        for s in 0..self.lefts.len() {
            let (a0, b0) = (2 * s * side, (2 * s + 1) * side);
            let mut buckets: HashMap<u64, Vec<usize>> = HashMap::new();
            for (i, &w) in work.iter().enumerate().skip(b0).take(side) {
                buckets.entry(bucket(w)).or_default().push(i);
            }
            for i in a0..a0 + side {
                let Some(partners) = buckets.get(&bucket(work[i])) else { continue };
                for &k in partners {
                    if accept(work[i], work[k]) {
                        out.push(PairRecord {
                            p: self.texts[i].0,
                            p_prime: self.texts[k].0,
                            w: work[i],
                            w_prime: work[k],
                        });
                    }
                }
            }
        }
        out
    }
}

/// A plaintext pair and the working states of its ciphertexts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PairRecord {
    pub p: Block,
    pub p_prime: Block,
    pub w: Block,
    pub w_prime: Block,
}

impl PairRecord {
    pub fn plaintext_difference(&self) -> Block {
        self.p.xor(self.p_prime)
    }

    pub fn output_difference(&self) -> Block {
        self.w.xor(self.w_prime)
    }
}

/// Filtered pairs of one attack, with the parameters that produced them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairTable {
    pub half_bits: u32,
    pub rounds: usize,
    pub x: u32,
    pub seed: u64,
    pub records: Vec<PairRecord>,
}

impl PairTable {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        w.write_all(PAIR_MAGIC)?;
        w.write_all(&PAIR_VERSION.to_le_bytes())?;
        w.write_all(&[(2 * self.half_bits) as u8, self.rounds as u8])?;
        w.write_all(&self.x.to_le_bytes())?;
        w.write_all(&self.seed.to_le_bytes())?;
        w.write_all(&(self.records.len() as u64).to_le_bytes())?;
        for r in &self.records {
            for b in [r.p, r.p_prime, r.w, r.w_prime] {
                w.write_all(&b.pack(self.half_bits).to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_from(mut r: impl Read) -> Result<Self> {
        let magic = read_array::<4>(&mut r)?;
        if &magic != PAIR_MAGIC {
            return Err(Error::TableFormat("not a pair table file".into()));
        }
        let version = u16::from_le_bytes(read_array(&mut r)?);
        if version != PAIR_VERSION {
            return Err(Error::TableFormat(format!("unsupported version {version}")));
        }
        let [n, rounds] = read_array::<2>(&mut r)?;
        let half_bits = n as u32 / 2;
        let x = u32::from_le_bytes(read_array(&mut r)?);
        let seed = u64::from_le_bytes(read_array(&mut r)?);
        let count = u64::from_le_bytes(read_array(&mut r)?);
        let mut records = Vec::with_capacity(count.min(1 << 24) as usize);
        for _ in 0..count {
            let mut b = [Block::default(); 4];
            for v in &mut b {
                *v = Block::unpack(u64::from_le_bytes(read_array(&mut r)?), half_bits);
            }
            records.push(PairRecord { p: b[0], p_prime: b[1], w: b[2], w_prime: b[3] });
        }
        Ok(Self { half_bits, rounds: rounds as usize, x, seed, records })
    }
}
