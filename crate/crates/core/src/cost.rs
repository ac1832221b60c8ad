//! Predicted complexities and log-log scaling checks against measured ledgers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::CostLedger;

/// Relative tolerance on fitted slopes.
pub const SLOPE_TOLERANCE: f64 = 0.15;

/// Resource exponents as multiples of `n`: resource ≈ `2^{coefficient·n}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexityClaim {
    pub rounds: usize,
    pub time: f64,
    pub data: f64,
    pub memory: f64,
    pub qubits: f64,
}

impl ComplexityClaim {
    /// `log₂` of each predicted resource at block size `n`.
    pub fn log2_at(&self, n: u32) -> [(Resource, f64); 4] {
        let n = n as f64;
        [
            (Resource::Time, self.time * n),
            (Resource::Data, self.data * n),
            (Resource::Memory, self.memory * n),
            (Resource::Qubits, self.qubits * n),
        ]
    }

    pub fn coefficient(&self, resource: Resource) -> f64 {
        match resource {
            Resource::Time => self.time,
            Resource::Data => self.data,
            Resource::Memory => self.memory,
            Resource::Qubits => self.qubits,
        }
    }
}

/// Predicted exponents for the `r`-round attack (`r ≥ 7`): time
/// `2^{2n/3 + (r-7)n/4}`, data `2^{2n/3}`, memory and qubits `2^{5n/6}`.
pub fn predicted_costs(r: usize) -> Result<ComplexityClaim> {
    if r < 7 {
        return Err(Error::InvalidParameter(format!("predictions cover r >= 7, got {r}")));
    }
    Ok(ComplexityClaim {
        rounds: r,
        time: 2.0 / 3.0 + (r - 7) as f64 / 4.0,
        data: 2.0 / 3.0,
        memory: 5.0 / 6.0,
        qubits: 5.0 / 6.0,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Resource {
    Time,
    Data,
    Memory,
    Qubits,
}

impl Resource {
    pub const ALL: [Resource; 4] = [Resource::Time, Resource::Data, Resource::Memory, Resource::Qubits];

    pub fn measure(self, ledger: &CostLedger) -> u64 {
        match self {
            Resource::Time => ledger.modeled_quantum_time,
            Resource::Data => ledger.classical_queries,
            Resource::Memory => ledger.classical_memory,
            Resource::Qubits => ledger.qubit_count,
        }
    }
}

/// One row of a predicted-versus-measured table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub resource: Resource,
    pub predicted_log2: f64,
    pub measured_log2: f64,
}

pub fn compare(claim: &ComplexityClaim, n: u32, ledger: &CostLedger) -> Vec<ComparisonRow> {
    claim
        .log2_at(n)
        .into_iter()
        .map(|(resource, predicted_log2)| ComparisonRow {
            resource,
            predicted_log2,
            measured_log2: (resource.measure(ledger).max(1) as f64).log2(),
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub resource: Resource,
    pub predicted: f64,
    pub fitted: f64,
    pub intercept: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub block_sizes: Vec<u32>,
    pub fits: Vec<SlopeFit>,
    pub pass: bool,
}

/// Least-squares fit of `log₂(resource)` against `n` for every resource.
/// A fit passes when the slope is within [`SLOPE_TOLERANCE`] of the claim.
pub fn scaling_check(claim: &ComplexityClaim, measurements: &[(u32, CostLedger)]) -> Result<ScalingReport> {
    let mut sizes: Vec<u32> = measurements.iter().map(|m| m.0).collect();
    sizes.sort_unstable();
    sizes.dedup();
    if sizes.len() < 2 {
        return Err(Error::InvalidParameter("scaling check needs at least two distinct block sizes".into()));
    }
    let fits: Vec<SlopeFit> = Resource::ALL
        .into_iter()
        .map(|resource| {
            let points: Vec<(f64, f64)> =
                measurements.iter().map(|(n, l)| (*n as f64, (resource.measure(l).max(1) as f64).log2())).collect();
            let (fitted, intercept) = least_squares(&points);
            let predicted = claim.coefficient(resource);
            SlopeFit {
                resource,
                predicted,
                fitted,
                intercept,
                pass: (fitted - predicted).abs() <= SLOPE_TOLERANCE * predicted,
            }
        })
        .collect();
    let pass = fits.iter().all(|f| f.pass);
    Ok(ScalingReport { block_sizes: sizes, fits, pass })
}

fn least_squares(points: &[(f64, f64)]) -> (f64, f64) {
    let k = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = points.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = points.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}
