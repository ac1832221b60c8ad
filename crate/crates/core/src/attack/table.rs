//! The precomputed Δ-sequence table, keyed by `(X', Y)`.

use std::collections::HashMap;
use std::io::{Read, Write};

use crate::differential::{delta_sequence_unchecked, Characteristic5R, CharacteristicSolver, DeltaSequence};
use crate::error::{Error, Result};
use crate::feistel::RoundFunctions;
use crate::quantum::CostLedger;

const MAGIC: &[u8; 4] = b"QMTD";
const VERSION: u16 = 1;

/// Admissible output differences: the top `half_bits - free_bits` bits are
/// zero, the low `free_bits` bits range freely, and `X` itself is excluded.
pub fn admissible_x_primes(half_bits: u32, free_bits: u32, x: u32) -> impl Iterator<Item = u32> {
    debug_assert!(free_bits <= half_bits);
    (0..1u32 << free_bits).filter(move |&xp| xp != x)
}

pub fn is_admissible(x_prime: u32, free_bits: u32, x: u32) -> bool {
    x_prime >> free_bits == 0 && x_prime != x
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableEntry {
    pub ch: Characteristic5R,
    pub sequence: DeltaSequence,
}

/// Characteristics of every admissible `(X', Y)` key, computed as one
/// Grover-search processor per key.
#[derive(Clone, Debug)]
pub struct CharacteristicCensus {
    pub x: u32,
    pub free_bits: u32,
    pub characteristics: Vec<Characteristic5R>,
    /// Number of `(X', Y)` keys evaluated.
    pub keys: u64,
    /// Keys with at least one characteristic.
    pub populated_keys: u64,
    /// Parallel-join of the per-key ledgers (difference-equation searches only).
    pub ledger: CostLedger,
}

impl CharacteristicCensus {
    pub fn compute(public: &RoundFunctions, x: u32, free_bits: u32) -> Result<Self> {
        if free_bits > public.half_bits() {
            return Err(Error::InvalidParameter(format!("{free_bits} free bits exceed the half-block")));
        }
        let solver = CharacteristicSolver::new(public, x)?;
        let mut characteristics = Vec::new();
        let mut per_key = Vec::new();
        let mut populated_keys = 0u64;
        for x_prime in admissible_x_primes(public.half_bits(), free_bits, x) {
            let row4 = solver.row_for_x_prime(x_prime);
            for y in 0..public.half_domain() as u32 {
                let mut local = CostLedger::default();
                let found = solver.characteristics(x_prime, &row4, y, &mut local);
                populated_keys += u64::from(!found.is_empty());
                characteristics.extend(found);
                per_key.push(local);
            }
        }
        let keys = per_key.len() as u64;
        let ledger = CostLedger::join_parallel(&per_key);
        Ok(Self { x, free_bits, characteristics, keys, populated_keys, ledger })
    }
}

/// `T_δ`: every characteristic's Δ-sequence, looked up by sequence value.
#[derive(Clone, Debug)]
pub struct TableTdelta {
    half_bits: u32,
    rounds: usize,
    x: u32,
    delta: usize,
    free_bits: u32,
    seed: u64,
    keys: u64,
    entries: Vec<TableEntry>,
    index: HashMap<DeltaSequence, Vec<u32>>,
}

impl TableTdelta {
    /// Computes the Δ-sequences of a census and charges the precomputation:
    /// per-key depth (three searches plus the sequence evaluation), one
    /// processor per key holding `(6 + δ)` half-block registers, and one
    /// memory cell per stored Δ value.
    pub fn build(
        public: &RoundFunctions,
        census: &CharacteristicCensus,
        delta: usize,
        seed: u64,
        ledger: &mut CostLedger,
    ) -> Result<Self> {
        if delta == 0 || delta >= public.half_domain() {
            return Err(Error::InvalidParameter(format!("delta {delta} out of range")));
        }
        let entries: Vec<TableEntry> = census
            .characteristics
            .iter()
            .map(|ch| TableEntry { ch: *ch, sequence: delta_sequence_unchecked(public, ch.t2, ch.t3, ch.t4, delta) })
            .collect();
        let mut stage = census.ledger;
        // Each key's processor evaluates 3δ + 3 round functions per characteristic;
        // a key rarely holds more than a handful, so charge the worst key.
        let worst = max_per_key(&census.characteristics);
        stage.modeled_quantum_time += worst * (3 * delta as u64 + 3);
        stage.qubit_count = census.keys * (6 + delta as u64) * public.half_bits() as u64;
        stage.classical_memory = entries.len() as u64 * delta as u64;
        ledger.absorb(&stage);
        Ok(Self::from_entries(
            public.half_bits(),
            public.rounds(),
            census.x,
            delta,
            census.free_bits,
            seed,
            census.keys,
            entries,
        ))
    }

    #[allow(clippy::too_many_arguments)]
    fn from_entries(
        half_bits: u32,
        rounds: usize,
        x: u32,
        delta: usize,
        free_bits: u32,
        seed: u64,
        keys: u64,
        entries: Vec<TableEntry>,
    ) -> Self {
        let mut index: HashMap<DeltaSequence, Vec<u32>> = HashMap::new();
        for (i, e) in entries.iter().enumerate() {
            index.entry(e.sequence.clone()).or_default().push(i as u32);
        }
        Self { half_bits, rounds, x, delta, free_bits, seed, keys, entries, index }
    }

    pub fn x(&self) -> u32 {
        self.x
    }

    pub fn delta(&self) -> usize {
        self.delta
    }

    pub fn free_bits(&self) -> u32 {
        self.free_bits
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn half_bits(&self) -> u32 {
        self.half_bits
    }

    /// Size of the `(X', Y)` key space that was searched.
    pub fn key_space(&self) -> u64 {
        self.keys
    }

    pub fn entries(&self) -> &[TableEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Stored Δ values (one cell per half-block).
    pub fn memory_cells(&self) -> u64 {
        self.entries.len() as u64 * self.delta as u64
    }

    /// Number of distinct `(X', Y)` keys holding at least one sequence.
    pub fn populated_keys(&self) -> usize {
        let mut keys: Vec<(u32, u32)> = self.entries.iter().map(|e| (e.ch.x_prime, e.ch.y)).collect();
        keys.dedup();
        keys.len()
    }

    /// Entry indices whose sequence equals `seq`, ascending.
    pub fn lookup(&self, seq: &DeltaSequence) -> &[u32] {
        self.index.get(seq).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&[(2 * self.half_bits) as u8, self.rounds as u8, self.free_bits as u8])?;
        w.write_all(&(self.delta as u16).to_le_bytes())?;
        w.write_all(&self.x.to_le_bytes())?;
        w.write_all(&self.seed.to_le_bytes())?;
        w.write_all(&self.keys.to_le_bytes())?;
        w.write_all(&(self.entries.len() as u64).to_le_bytes())?;
        for e in &self.entries {
            for v in [e.ch.x_prime, e.ch.y, e.ch.t2, e.ch.t3, e.ch.t4] {
                w.write_all(&v.to_le_bytes())?;
            }
            w.write_all(&e.sequence.to_bits(self.half_bits))?;
        }
        Ok(())
    }

    pub fn read_from(mut r: impl Read) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::TableFormat("not a T_delta file".into()));
        }
        let version = u16::from_le_bytes(read_array(&mut r)?);
        if version != VERSION {
            return Err(Error::TableFormat(format!("unsupported version {version}")));
        }
        let [n, rounds, free_bits] = read_array::<3>(&mut r)?;
        let delta = u16::from_le_bytes(read_array(&mut r)?) as usize;
        let x = u32::from_le_bytes(read_array(&mut r)?);
        let seed = u64::from_le_bytes(read_array(&mut r)?);
        let keys = u64::from_le_bytes(read_array(&mut r)?);
        let count = u64::from_le_bytes(read_array(&mut r)?);
        let half_bits = n as u32 / 2;
        let seq_bytes = (delta * half_bits as usize).div_ceil(8);
        let mut entries = Vec::with_capacity(count.min(1 << 24) as usize);
        let mut buf = vec![0u8; seq_bytes];
        for _ in 0..count {
            let mut f = [0u32; 5];
            for v in &mut f {
                *v = u32::from_le_bytes(read_array(&mut r)?);
            }
            r.read_exact(&mut buf)?;
            entries.push(TableEntry {
                ch: Characteristic5R { x, x_prime: f[0], y: f[1], t2: f[2], t3: f[3], t4: f[4] },
                sequence: DeltaSequence::from_bits(&buf, half_bits, delta)?,
            });
        }
        Ok(Self::from_entries(half_bits, rounds as usize, x, delta, free_bits as u32, seed, keys, entries))
    }
}

fn max_per_key(chars: &[Characteristic5R]) -> u64 {
    chars.chunk_by(|a, b| (a.x_prime, a.y) == (b.x_prime, b.y)).map(|c| c.len() as u64).max().unwrap_or(0)
}

pub(crate) fn read_array<const N: usize>(r: &mut impl Read) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf)?;
    Ok(buf)
}
