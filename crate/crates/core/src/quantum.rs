//! Classical emulation of the quantum subroutines the attacks rely on.
//!
//! Every subroutine returns the exact classical answer (found by brute force)
//! and charges a modeled cost to a [`CostLedger`]. The unit of modeled time is
//! one oracle evaluation, i.e. one round-function call. Success probabilities
//! of real Grover runs are checked separately by [`grover_statevector`].

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_4;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Modeled resources of a (partly quantum) computation.
///
/// Sequential composition sums time, lookups and queries and takes the
/// maximum of width, qubits and memory.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CostLedger {
    pub modeled_quantum_time: u64,
    pub parallel_width: u64,
    pub qubit_count: u64,
    pub qram_lookups: u64,
    pub classical_queries: u64,
    pub classical_memory: u64,
}

impl CostLedger {
    pub fn charge_time(&mut self, units: u64) {
        self.modeled_quantum_time += units;
    }

    pub fn charge_lookups(&mut self, lookups: u64) {
        self.qram_lookups += lookups;
    }

    pub fn charge_queries(&mut self, queries: u64) {
        self.classical_queries += queries;
    }

    pub fn raise_width(&mut self, width: u64) {
        self.parallel_width = self.parallel_width.max(width);
    }

    pub fn raise_qubits(&mut self, qubits: u64) {
        self.qubit_count = self.qubit_count.max(qubits);
    }

    pub fn raise_memory(&mut self, cells: u64) {
        self.classical_memory = self.classical_memory.max(cells);
    }

    /// Sequential composition.
    pub fn merge(&self, other: &CostLedger) -> CostLedger {
        CostLedger {
            modeled_quantum_time: self.modeled_quantum_time + other.modeled_quantum_time,
            parallel_width: self.parallel_width.max(other.parallel_width),
            qubit_count: self.qubit_count.max(other.qubit_count),
            qram_lookups: self.qram_lookups + other.qram_lookups,
            classical_queries: self.classical_queries + other.classical_queries,
            classical_memory: self.classical_memory.max(other.classical_memory),
        }
    }

    pub fn absorb(&mut self, other: &CostLedger) {
        *self = self.merge(other);
    }

    /// Independent processors running side by side: time is the slowest
    /// processor, width and qubits add up.
    pub fn join_parallel<'a>(ledgers: impl IntoIterator<Item = &'a CostLedger>) -> CostLedger {
        ledgers.into_iter().fold(CostLedger::default(), |acc, l| CostLedger {
            modeled_quantum_time: acc.modeled_quantum_time.max(l.modeled_quantum_time),
            parallel_width: acc.parallel_width + l.parallel_width.max(1),
            qubit_count: acc.qubit_count + l.qubit_count,
            qram_lookups: acc.qram_lookups + l.qram_lookups,
            classical_queries: acc.classical_queries + l.classical_queries,
            classical_memory: acc.classical_memory.max(l.classical_memory),
        })
    }

    /// Branches of one superposition: a single circuit whose depth is the
    /// worst branch. Classical queries stay additive.
    pub fn join_superposed<'a>(ledgers: impl IntoIterator<Item = &'a CostLedger>) -> CostLedger {
        ledgers.into_iter().fold(CostLedger::default(), |acc, l| CostLedger {
            modeled_quantum_time: acc.modeled_quantum_time.max(l.modeled_quantum_time),
            parallel_width: acc.parallel_width.max(l.parallel_width),
            qubit_count: acc.qubit_count.max(l.qubit_count),
            qram_lookups: acc.qram_lookups.max(l.qram_lookups),
            classical_queries: acc.classical_queries + l.classical_queries,
            classical_memory: acc.classical_memory.max(l.classical_memory),
        })
    }
}

/// Grover iterations charged for `marked` solutions among `domain` items.
///
/// With at least one solution this is `max(1, ⌊π / (4θ)⌋)` where
/// `sin θ = √(M/N)`, the iteration count that maximizes the success
/// probability. With no solution a full `⌈(π/4)√N⌉` run is charged.
pub fn grover_iterations(domain: u64, marked: u64) -> u64 {
    assert!(domain >= 1, "empty search domain");
    if marked == 0 {
        return (FRAC_PI_4 * (domain as f64).sqrt()).ceil() as u64;
    }
    let ratio = (marked.min(domain) as f64 / domain as f64).sqrt();
    let theta = ratio.asin();
    ((FRAC_PI_4 / theta).floor() as u64).max(1)
}

/// `⌈√(num / den)⌉` in exact integer arithmetic.
pub fn ceil_sqrt_ratio(num: u128, den: u128) -> u64 {
    assert!(den > 0);
    let approx = ((num as f64) / (den as f64)).sqrt().ceil() as u128;
    let mut k = approx.saturating_sub(2);
    while k * k * den < num {
        k += 1;
    }
    k as u64
}

/// `⌈log₂ x⌉`, with `⌈log₂ 1⌉ = 0`.
pub fn ceil_log2(x: u64) -> u64 {
    assert!(x >= 1);
    (64 - (x - 1).leading_zeros()) as u64
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroverReport {
    /// Lowest-index marked element, if any.
    pub result: Option<usize>,
    pub iterations: u64,
    pub domain_size: usize,
    pub marked_count: usize,
    pub no_solution: bool,
}

/// Finds the marked elements of `predicate` over `0..domain` by exhaustive
/// scan and charges the Grover iterations a quantum search would need.
pub fn grover_emulate(
    domain: usize,
    predicate: impl Fn(usize) -> bool,
    ledger: &mut CostLedger,
) -> Result<GroverReport> {
    if domain == 0 {
        return Err(Error::InvalidParameter("Grover search over an empty domain".into()));
    }
    let mut result = None;
    let mut marked_count = 0;
    for x in 0..domain {
        if predicate(x) {
            marked_count += 1;
            result.get_or_insert(x);
        }
    }
    let iterations = grover_iterations(domain as u64, marked_count as u64);
    ledger.charge_time(iterations);
    Ok(GroverReport { result, iterations, domain_size: domain, marked_count, no_solution: marked_count == 0 })
}

/// Success probability after `iterations` Grover iterations on `domain`
/// items with the given marked set, computed by the exact two-amplitude
/// recurrence (every marked item shares one amplitude, every unmarked item
/// another).
pub fn grover_statevector(domain: usize, marked: &[usize], iterations: u64) -> Result<f64> {
    if domain == 0 || !domain.is_power_of_two() {
        return Err(Error::InvalidParameter(format!("domain {domain} is not a power of two")));
    }
    let mut seen = vec![false; domain];
    for &m in marked {
        if m >= domain || std::mem::replace(&mut seen[m], true) {
            return Err(Error::InvalidParameter(format!("marked element {m} invalid or repeated")));
        }
    }
    let n = domain as f64;
    let m = marked.len() as f64;
    let start = 1.0 / n.sqrt();
    let (mut good, mut bad) = (start, start);
    for _ in 0..iterations {
        // Oracle flips the marked amplitude, then inversion about the mean.
        let flipped = -good;
        let mean = (m * flipped + (n - m) * bad) / n;
        good = 2.0 * mean - flipped;
        bad = 2.0 * mean - bad;
    }
    Ok(m * good * good)
}

/// Repetitions of a procedure with success probability `p` under amplitude
/// amplification, `⌈1/√p⌉`. `Ok(None)` means unbounded (`p = 0`).
pub fn amplification_cost(p: f64) -> Result<Option<u64>> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("probability {p} outside [0, 1]")));
    }
    if p == 0.0 {
        return Ok(None);
    }
    Ok(Some((1.0 / p.sqrt()).ceil() as u64))
}

/// Reads one cell through the (emulated) QRAM, charging one lookup.
pub fn qram_lookup<'t, T>(table: &'t [T], address: usize, ledger: &mut CostLedger) -> Result<&'t T> {
    let cell = table.get(address).ok_or(Error::QramAddress { address, len: table.len() })?;
    ledger.charge_lookups(1);
    Ok(cell)
}

/// Per-processor Grover iterations when `processors` split the domain.
/// Raises the ledger's parallel width to `processors`.
pub fn parallel_grover_cost(domain: u64, marked: u64, processors: u64, ledger: &mut CostLedger) -> Result<u64> {
    if processors == 0 {
        return Err(Error::InvalidParameter("at least one processor is required".into()));
    }
    ledger.raise_width(processors);
    let share = domain.div_ceil(processors).max(1);
    // Expected marked elements per share, at least one for a successful search.
    let per_share = if marked == 0 { 0 } else { (marked * share).div_ceil(domain).max(1) };
    Ok(grover_iterations(share, per_share))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClawMode {
    /// Runs the subset-sampling claw algorithm classically.
    Faithful,
    /// Finds a claw by exhaustive scan.
    Oracle,
}

impl std::str::FromStr for ClawMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "faithful" => Ok(ClawMode::Faithful),
            "oracle" => Ok(ClawMode::Oracle),
            other => Err(Error::InvalidParameter(format!("unknown claw mode {other:?}"))),
        }
    }
}

/// A claw-finding problem between `f` on `0..domain_f` and `g` on
/// `0..domain_g`. Evaluators return `None` for elements that can never take
/// part in a claw.
pub struct ClawInstance<F, G> {
    pub domain_f: usize,
    pub domain_g: usize,
    pub f: F,
    pub g: G,
    /// Size `l` of the sampled subset of the `f` side.
    pub subset_size: Option<usize>,
    /// Depth of preparing the superposed `g` register, paid once per round.
    pub evaluation_depth: u64,
}

impl<F, G> ClawInstance<F, G> {
    pub fn new(domain_f: usize, domain_g: usize, f: F, g: G) -> Self {
        Self { domain_f, domain_g, f, g, subset_size: None, evaluation_depth: 0 }
    }

    /// `min(N, ⌊√M⌋)`, the largest admissible subset.
    pub fn default_subset_size(&self) -> usize {
        let root = (self.domain_g as f64).sqrt().floor() as usize;
        // guard against float rounding at perfect squares
        let root = (root.saturating_sub(1)..=root + 1).filter(|r| r * r <= self.domain_g).max().unwrap_or(0);
        self.domain_f.min(root).max(1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Claw {
    pub x: usize,
    pub y: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClawOutcome {
    pub claw: Option<Claw>,
    pub subset_size: usize,
    /// `⌈√(NM/l³)⌉` amplitude-amplification rounds.
    pub modeled_rounds: u64,
    pub per_round_cost: u64,
    /// Sampling rounds actually executed (faithful mode).
    pub rounds_executed: u64,
}

impl ClawOutcome {
    pub fn no_claw(&self) -> bool {
        self.claw.is_none()
    }

    pub fn modeled_time(&self) -> u64 {
        self.modeled_rounds * self.per_round_cost
    }
}

/// Per-round comparison cost: sorting `A` (`l·⌈log₂ l⌉`) plus a quantum
/// search over `B` with a binary search per probe (`⌈√|B|⌉·⌈log₂ l⌉`).
pub fn claw_round_cost(subset_size: usize, b_size: usize) -> u64 {
    let log = ceil_log2(subset_size as u64);
    let sort = subset_size as u64 * log;
    let search = ceil_sqrt_ratio(b_size as u128, 1) * log.max(1);
    sort + search
}

/// Default sampling cap for faithful mode: 32 times the expected number of
/// rounds `NM/l³` needed to hit a single claw, and never below 64.
pub fn default_claw_cap(domain_f: usize, domain_g: usize, subset_size: usize) -> u64 {
    let l3 = (subset_size as u128).pow(3);
    let expected = (domain_f as u128 * domain_g as u128).div_ceil(l3.max(1));
    (32 * expected).clamp(64, u64::MAX as u128) as u64
}

/// Emulated claw finding. Both modes charge the same modeled cost,
/// `⌈√(NM/l³)⌉ × (evaluation depth + sort + search)`.
pub fn claw_find<V, F, G>(
    inst: &ClawInstance<F, G>,
    seed: u64,
    mode: ClawMode,
    cap: Option<u64>,
    ledger: &mut CostLedger,
) -> Result<ClawOutcome>
where
    V: Ord + Clone,
    F: Fn(usize) -> Option<V>,
    G: Fn(usize) -> Option<V>,
{
    let (n, m) = (inst.domain_f, inst.domain_g);
    let l = inst.subset_size.unwrap_or_else(|| inst.default_subset_size());
    let bound = n.min(ceil_sqrt_ratio(m as u128, 1) as usize);
    if l == 0 || (n > 0 && m > 0 && l > bound) {
        return Err(Error::InvalidParameter(format!(
            "subset size {l} must satisfy 1 <= l <= min(N, ceil(sqrt(M))) = {bound}"
        )));
    }
    let b_size = (l * l).min(m);
    let mut outcome = ClawOutcome {
        claw: None,
        subset_size: l,
        modeled_rounds: ceil_sqrt_ratio(n as u128 * m as u128, (l as u128).pow(3)).max(1),
        per_round_cost: inst.evaluation_depth + claw_round_cost(l, b_size.max(1)),
        rounds_executed: 0,
    };
    ledger.charge_time(outcome.modeled_time());
    if n == 0 || m == 0 {
        return Ok(outcome);
    }

    match mode {
        ClawMode::Oracle => {
            let mut lowest: BTreeMap<V, usize> = BTreeMap::new();
            for a in 0..n {
                if let Some(v) = (inst.f)(a) {
                    lowest.entry(v).or_insert(a);
                }
            }
            outcome.claw = (0..m).find_map(|b| {
                let v = (inst.g)(b)?;
                lowest.get(&v).map(|&a| Claw { x: a, y: b })
            });
        }
        ClawMode::Faithful => {
            let cap = cap.unwrap_or_else(|| default_claw_cap(n, m, l));
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut f_memo: Vec<Option<Option<V>>> = vec![None; n];
            let mut g_memo: Vec<Option<Option<V>>> = vec![None; m];
            for _ in 0..cap {
                outcome.rounds_executed += 1;
                let a_set = index::sample(&mut rng, n, l);
                let b_set = index::sample(&mut rng, m, b_size);
                let mut sorted: Vec<(V, usize)> = a_set
                    .iter()
                    .filter_map(|a| {
                        let v = f_memo[a].get_or_insert_with(|| (inst.f)(a)).clone()?;
                        Some((v, a))
                    })
                    .collect();
                sorted.sort();
                let mut best: Option<Claw> = None;
                for b in b_set.iter() {
                    if best.is_some_and(|c| c.y < b) {
                        continue;
                    }
                    let Some(v) = g_memo[b].get_or_insert_with(|| (inst.g)(b)).clone() else {
                        continue;
                    };
                    let at = sorted.partition_point(|(fv, _)| *fv < v);
                    if let Some((_, a)) = sorted.get(at).filter(|(fv, _)| *fv == v) {
                        best = Some(Claw { x: *a, y: b });
                    }
                }
                if best.is_some() {
                    outcome.claw = best;
                    break;
                }
            }
        }
    }
    Ok(outcome)
}
