use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::diagnostics::ledger::{
    blowup_flag, calibrate_first_order, calibrate_second_order, lyapunov_check, Ledger, LyapunovVerdict,
};
use crate::diagnostics::record::CSV_COLUMNS;
use crate::dynamics::Termination;
use crate::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub min: f64,
    pub max: f64,
}

/// Machine-readable summary of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub termination: Termination,
    pub steps: usize,
    pub records: usize,
    pub dt_halvings: u32,
    pub columns: BTreeMap<String, Range>,
    pub lyapunov: LyapunovVerdict,
    pub energy_strictly_decreasing: bool,
    pub max_relative_balance_residual: f64,
    pub first_order_constant: f64,
    pub second_order_constant: f64,
    /// Time of the first record whose blow-up indicator exceeded the factor.
    pub blowup_suspect_at: Option<f64>,
    pub blowup_growth: f64,
    pub holder_max: f64,
    pub sobolev_u: Range,
    pub sobolev_grad_d: Range,
}

fn range(values: impl Iterator<Item = f64>) -> Range {
    values.fold(Range { min: f64::INFINITY, max: f64::NEG_INFINITY }, |r, v| Range { min: r.min.min(v), max: r.max.max(v) })
}

impl RunSummary {
    pub fn from_ledger<T: Real>(
        ledger: &Ledger<T>,
        termination: Termination,
        steps: usize,
        dt_halvings: u32,
        a: T,
        residual_tol: T,
        blowup_factor: T,
    ) -> Self {
        let recs = ledger.records();
        let mut columns = BTreeMap::new();
        for (i, name) in CSV_COLUMNS.iter().enumerate() {
            columns.insert(name.to_string(), range(recs.iter().map(|r| r.csv_row()[i].to_f64_lossy())));
        }
        let first_ind = recs.first().map_or(0.0, |r| r.blowup_ind.to_f64_lossy());
        let max_ind = recs.iter().map(|r| r.blowup_ind.to_f64_lossy()).fold(0.0, f64::max);
        Self {
            termination,
            steps,
            records: recs.len(),
            dt_halvings,
            columns,
            lyapunov: lyapunov_check(recs, residual_tol),
            energy_strictly_decreasing: ledger.energy_strictly_decreasing(),
            max_relative_balance_residual: ledger.max_relative_residual().to_f64_lossy(),
            first_order_constant: calibrate_first_order(recs, a).to_f64_lossy(),
            second_order_constant: calibrate_second_order(recs, a).to_f64_lossy(),
            blowup_suspect_at: blowup_flag(recs, blowup_factor).map(|i| recs[i].t.to_f64_lossy()),
            blowup_growth: if first_ind > 0.0 { max_ind / first_ind } else { 1.0 },
            holder_max: recs.iter().map(|r| r.holder_max.to_f64_lossy()).fold(0.0, f64::max),
            sobolev_u: range(recs.iter().map(|r| r.sobolev_u.to_f64_lossy())),
            sobolev_grad_d: range(recs.iter().map(|r| r.sobolev_grad_d.to_f64_lossy())),
        }
    }
}
