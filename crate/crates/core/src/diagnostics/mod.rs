//! Energy ledger: balance law, first/second order inequalities, Lyapunov
//! monotonicity, the running smallness quantity `m(t)` and the blow-up
//! indicator, evaluated along a trajectory.

mod checks;
mod ledger;
mod record;
mod summary;

pub use checks::{one_constant_reduction_check, unit_identity_check};
pub use ledger::{
    blowup_flag, blowup_indicator, calibrate_first_order, calibrate_second_order, energy_balance_residual,
    first_order_inequality_gap, lyapunov_check, m_of_t, monotone_verdict, read_csv, second_order_inequality_gap,
    CsvLedger, Ledger, LyapunovVerdict, Verdict,
};
pub use record::{compute_record, DiagnosticsRecord, CSV_COLUMNS};
pub use summary::{Range, RunSummary};

use crate::dynamics::{RunOutcome, Solver, State};
use crate::error::Result;
use crate::Real;

/// Runs `solver` from `s0`, recording diagnostics at every output instant.
pub fn run_with_ledger<T: Real>(solver: &Solver<T>, s0: &State<T>) -> Result<(RunOutcome<T>, Ledger<T>)> {
    let mut ledger = Ledger::new();
    let outcome = solver.simulate(s0, |s, _| {
        ledger.push(compute_record(solver, s)?)?;
        Ok(())
    })?;
    Ok((outcome, ledger))
}
