//! Difference equations of the 5-round truncated distinguisher.
//!
//! The distinguisher occupies rounds 1..=5. For input difference `0 ‖ X` and
//! output difference `X' ‖ 0`, each middle difference `Y` fixes the
//! input/output differences of `F₂`, `F₃` and `F₄`:
//!
//! ```text
//! F₂(t₂) ⊕ F₂(t₂ ⊕ X)  = Y
//! F₃(t₃) ⊕ F₃(t₃ ⊕ Y)  = X ⊕ X'
//! F₄(t₄) ⊕ F₄(t₄ ⊕ X') = Y
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::feistel::RoundFunctions;
use crate::quantum::{grover_iterations, CostLedger};

/// Round holding `t₂` (first middle round of the distinguisher).
pub const MIDDLE_FIRST: usize = 2;

/// All `t` with `f(t) ⊕ f(t ⊕ a) = b`, ascending. Charged as one Grover search
/// over the table's domain.
pub fn solve_diff_eq(f: &[u32], a: u32, b: u32, ledger: &mut CostLedger) -> Vec<u32> {
    let sols: Vec<u32> = (0..f.len() as u32).filter(|&t| f[t as usize] ^ f[(t ^ a) as usize] == b).collect();
    ledger.charge_time(grover_iterations(f.len() as u64, sols.len() as u64));
    sols
}

/// One row of a difference distribution table: the solutions of
/// `f(t) ⊕ f(t ⊕ a) = b` for every `b`, bucketed by `b`.
#[derive(Clone, Debug)]
pub struct DiffRow {
    a: u32,
    offsets: Vec<u32>,
    solutions: Vec<u32>,
}

impl DiffRow {
    pub fn new(f: &[u32], a: u32) -> Self {
        let size = f.len();
        let out = |t: usize| (f[t] ^ f[t ^ a as usize]) as usize;
        let mut offsets = vec![0u32; size + 1];
        for t in 0..size {
            offsets[out(t) + 1] += 1;
        }
        for b in 0..size {
            offsets[b + 1] += offsets[b];
        }
        let mut fill = offsets.clone();
        let mut solutions = vec![0u32; size];
        for t in 0..size {
            let b = out(t);
            solutions[fill[b] as usize] = t as u32;
            fill[b] += 1;
        }
        Self { a, offsets, solutions }
    }

    pub fn input_difference(&self) -> u32 {
        self.a
    }

    pub fn solutions(&self, b: u32) -> &[u32] {
        let b = b as usize;
        &self.solutions[self.offsets[b] as usize..self.offsets[b + 1] as usize]
    }

    /// Same answer as [`solve_diff_eq`], with the same Grover charge.
    pub fn solve(&self, b: u32, ledger: &mut CostLedger) -> &[u32] {
        let sols = self.solutions(b);
        ledger.charge_time(grover_iterations(self.solutions.len() as u64, sols.len() as u64));
        sols
    }

    pub fn histogram(&self) -> Vec<usize> {
        self.offsets.windows(2).map(|w| (w[1] - w[0]) as usize).collect()
    }
}

/// Number of solutions of `f(t) ⊕ f(t ⊕ a) = b` for every `b`.
pub fn difference_census(f: &[u32], a: u32) -> Result<Vec<usize>> {
    if a == 0 {
        return Err(Error::InvalidParameter("census needs a nonzero input difference".into()));
    }
    if a as usize >= f.len() {
        return Err(Error::OutOfRange { value: a as u64, bits: f.len().trailing_zeros() });
    }
    Ok(DiffRow::new(f, a).histogram())
}

/// One differential characteristic of the distinguisher together with the
/// round-function inputs `t₂, t₃, t₄` that realize it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Characteristic5R {
    pub x: u32,
    pub x_prime: u32,
    pub y: u32,
    pub t2: u32,
    pub t3: u32,
    pub t4: u32,
}

impl Characteristic5R {
    pub fn x_double(&self) -> u32 {
        self.x ^ self.x_prime
    }

    /// Re-evaluates all three difference equations.
    pub fn holds(&self, public: &RoundFunctions) -> bool {
        let d = |round: usize, t: u32, a: u32| public.eval(round, t) ^ public.eval(round, t ^ a);
        self.x != self.x_prime
            && d(MIDDLE_FIRST, self.t2, self.x) == self.y
            && d(MIDDLE_FIRST + 1, self.t3, self.y) == self.x_double()
            && d(MIDDLE_FIRST + 2, self.t4, self.x_prime) == self.y
    }
}

/// Shared difference-table rows for one input difference `X`, reused across
/// many `(X', Y)` queries.
pub struct CharacteristicSolver<'a> {
    public: &'a RoundFunctions,
    x: u32,
    row2: DiffRow,
    rows3: Vec<DiffRow>,
}

impl<'a> CharacteristicSolver<'a> {
    pub fn new(public: &'a RoundFunctions, x: u32) -> Result<Self> {
        if public.rounds() < MIDDLE_FIRST + 3 {
            return Err(Error::Precondition(format!(
                "distinguisher needs at least {} rounds, cipher has {}",
                MIDDLE_FIRST + 3,
                public.rounds()
            )));
        }
        if x > public.mask() {
            return Err(Error::OutOfRange { value: x as u64, bits: public.half_bits() });
        }
        let f3 = public.table(MIDDLE_FIRST + 1);
        Ok(Self {
            public,
            x,
            row2: DiffRow::new(public.table(MIDDLE_FIRST), x),
            rows3: (0..public.half_domain() as u32).map(|y| DiffRow::new(f3, y)).collect(),
        })
    }

    pub fn x(&self) -> u32 {
        self.x
    }

    pub fn row_for_x_prime(&self, x_prime: u32) -> DiffRow {
        DiffRow::new(self.public.table(MIDDLE_FIRST + 2), x_prime)
    }

    /// Characteristics for one `(X', Y)`, charging three Grover searches.
    pub fn characteristics(
        &self,
        x_prime: u32,
        row4: &DiffRow,
        y: u32,
        ledger: &mut CostLedger,
    ) -> Vec<Characteristic5R> {
        debug_assert_eq!(row4.input_difference(), x_prime);
        let s2 = self.row2.solve(y, ledger);
        let s3 = self.rows3[y as usize].solve(self.x ^ x_prime, ledger);
        let s4 = row4.solve(y, ledger);
        let mut out = Vec::with_capacity(s2.len() * s3.len() * s4.len());
        for &t2 in s2 {
            for &t3 in s3 {
                for &t4 in s4 {
                    out.push(Characteristic5R { x: self.x, x_prime, y, t2, t3, t4 });
                }
            }
        }
        out
    }
}

/// Every characteristic with input difference `X` and output difference
/// `X'`, over all middle differences `Y`, in `(Y, t₂, t₃, t₄)` order.
pub fn enumerate_characteristics(
    public: &RoundFunctions,
    x: u32,
    x_prime: u32,
    ledger: &mut CostLedger,
) -> Result<Vec<Characteristic5R>> {
    if x == x_prime {
        return Err(Error::InvalidParameter("X' must differ from X".into()));
    }
    if x_prime > public.mask() {
        return Err(Error::OutOfRange { value: x_prime as u64, bits: public.half_bits() });
    }
    let solver = CharacteristicSolver::new(public, x)?;
    let row4 = solver.row_for_x_prime(x_prime);
    Ok((0..public.half_domain() as u32).flat_map(|y| solver.characteristics(x_prime, &row4, y, ledger)).collect())
}

/// The differences `Δ₁ … Δ_δ` at `v₅` produced by the δ-set offsets `1..=δ`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DeltaSequence(pub Vec<u32>);

impl DeltaSequence {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[u32] {
        &self.0
    }

    /// Bit length of the canonical serialization.
    pub fn bit_len(&self, half_bits: u32) -> usize {
        self.0.len() * half_bits as usize
    }

    /// Fixed-width big-endian bit concatenation `Δ₁‖Δ₂‖…‖Δ_δ`, zero-padded to
    /// whole bytes.
    pub fn to_bits(&self, half_bits: u32) -> Vec<u8> {
        let mut out = vec![0u8; self.bit_len(half_bits).div_ceil(8)];
        let mut pos = 0usize;
        for &d in &self.0 {
            for bit in (0..half_bits).rev() {
                if (d >> bit) & 1 == 1 {
                    out[pos / 8] |= 0x80 >> (pos % 8);
                }
                pos += 1;
            }
        }
        out
    }

    pub fn from_bits(bytes: &[u8], half_bits: u32, delta: usize) -> Result<Self> {
        let need = (delta * half_bits as usize).div_ceil(8);
        if bytes.len() != need {
            return Err(Error::TableFormat(format!("expected {need} bytes, got {}", bytes.len())));
        }
        let mut pos = 0usize;
        let values = (0..delta)
            .map(|_| {
                (0..half_bits).fold(0u32, |acc, _| {
                    let bit = (bytes[pos / 8] >> (7 - pos % 8)) & 1;
                    pos += 1;
                    (acc << 1) | bit as u32
                })
            })
            .collect();
        Ok(Self(values))
    }
}

fn check_delta(public: &RoundFunctions, delta: usize) -> Result<()> {
    if delta == 0 || delta >= public.half_domain() {
        return Err(Error::InvalidParameter(format!("delta {delta} must lie in 1..{}", public.half_domain())));
    }
    Ok(())
}

/// Δ-sequence predicted from `(t₂, t₃, t₄)` alone; no subkeys are involved.
pub fn delta_sequence_from_characteristic(
    public: &RoundFunctions,
    ch: &Characteristic5R,
    delta: usize,
) -> Result<DeltaSequence> {
    check_delta(public, delta)?;
    Ok(delta_sequence_unchecked(public, ch.t2, ch.t3, ch.t4, delta))
}

pub(crate) fn delta_sequence_unchecked(
    public: &RoundFunctions,
    t2: u32,
    t3: u32,
    t4: u32,
    delta: usize,
) -> DeltaSequence {
    let f = |round: usize, x: u32| public.eval(round, x);
    let (r2, r3, r4) = (MIDDLE_FIRST, MIDDLE_FIRST + 1, MIDDLE_FIRST + 2);
    DeltaSequence(
        (1..=delta as u32)
            .map(|j| {
                let d2 = f(r2, t2) ^ f(r2, t2 ^ j);
                let d3 = f(r3, t3) ^ f(r3, t3 ^ d2);
                let d4 = f(r4, t4) ^ f(r4, t4 ^ d3 ^ j);
                d4 ^ d2
            })
            .collect(),
    )
}
