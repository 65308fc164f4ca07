use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::diagnostics::record::{DiagnosticsRecord, CSV_COLUMNS};
use crate::error::{Error, Result};
use crate::Real;

/// Trapezoidal defect of the energy balance law between two records:
/// `(E(cur) − E(prev))/dt + ½(D(prev) + D(cur))`.
pub fn energy_balance_residual<T: Real>(prev: &DiagnosticsRecord<T>, cur: &DiagnosticsRecord<T>, dt: T) -> Result<T> {
    if !(dt > T::zero()) {
        return Err(Error::Precondition(format!("dt = {dt} must be positive")));
    }
    Ok((cur.e_total - prev.e_total) / dt + T::lit(0.5) * (prev.dissipation() + cur.dissipation()))
}

/// Running supremum of `(‖u‖₂ + ‖∇d‖₂)(‖∇u‖₂ + ‖∇²d‖₂)` over a history.
pub fn m_of_t<T: Real>(history: &[DiagnosticsRecord<T>]) -> Result<T> {
    if history.is_empty() {
        return Err(Error::Precondition("m(t) needs at least one record".into()));
    }
    Ok(history.iter().fold(T::zero(), |m, r| m.max(r.m_instant)))
}

/// Outcome of a monotonicity check on one column.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum Verdict {
    Monotone,
    ViolatedAt { t: f64 },
}

impl Verdict {
    pub fn is_monotone(&self) -> bool {
        matches!(self, Verdict::Monotone)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovVerdict {
    pub lyap0: Verdict,
    pub lyap1: Verdict,
}

impl LyapunovVerdict {
    pub fn is_monotone(&self) -> bool {
        self.lyap0.is_monotone() && self.lyap1.is_monotone()
    }
}

/// First record whose value exceeds its predecessor by more than
/// `slack · dt · |previous|`.
pub fn monotone_verdict<T: Real>(history: &[DiagnosticsRecord<T>], slack: T, value: impl Fn(&DiagnosticsRecord<T>) -> T) -> Verdict {
    for w in history.windows(2) {
        let (prev, cur) = (value(&w[0]), value(&w[1]));
        let dt = cur_dt(&w[0], &w[1]);
        if cur - prev > slack * dt * prev.abs() {
            return Verdict::ViolatedAt { t: w[1].t.to_f64_lossy() };
        }
    }
    Verdict::Monotone
}

fn cur_dt<T: Real>(prev: &DiagnosticsRecord<T>, cur: &DiagnosticsRecord<T>) -> T {
    cur.t - prev.t
}

/// Checks that `lyap0` and `lyap1` never increase beyond the residual
/// budget `slack` (relative, per unit time).
pub fn lyapunov_check<T: Real>(history: &[DiagnosticsRecord<T>], slack: T) -> LyapunovVerdict {
    LyapunovVerdict {
        lyap0: monotone_verdict(history, slack, |r| r.lyap0),
        lyap1: monotone_verdict(history, slack, |r| r.lyap1),
    }
}

/// `d/dt ‖∇d‖² + 2a‖∇²d‖² − C·∫(|u|² + |∇d|²)|∇²d|`.
pub fn first_order_inequality_gap<T: Real>(r: &DiagnosticsRecord<T>, a: T, c_star: T) -> T {
    first_order_lhs(r, a) - c_star * r.rhs_first
}

/// `d/dt(‖∇u‖² + ‖∇²d‖²) + ‖∇²u‖² + (3/2)a‖∇³d‖² − C·∫(|u|² + |∇d|²)(|∇u|² + |∇²d|²)`.
pub fn second_order_inequality_gap<T: Real>(r: &DiagnosticsRecord<T>, a: T, c_star: T) -> T {
    second_order_lhs(r, a) - c_star * r.rhs_second
}

fn first_order_lhs<T: Real>(r: &DiagnosticsRecord<T>, a: T) -> T {
    r.rate_grad_d_sq + T::lit(2.0) * a * r.l2_hess_d * r.l2_hess_d
}

fn second_order_lhs<T: Real>(r: &DiagnosticsRecord<T>, a: T) -> T {
    r.rate_h1 + r.l2_hess_u * r.l2_hess_u + T::lit(1.5) * a * r.l2_grad3_d * r.l2_grad3_d
}

/// Smallest `C ≥ 0` making the gap non-positive on every record; infinite
/// when some record has a positive left side and a vanishing right side.
fn calibrate<T: Real>(history: &[DiagnosticsRecord<T>], lhs: impl Fn(&DiagnosticsRecord<T>) -> T, rhs: impl Fn(&DiagnosticsRecord<T>) -> T) -> T {
    history.iter().fold(T::zero(), |c, r| {
        let (l, q) = (lhs(r), rhs(r));
        if l <= T::zero() {
            c
        } else if q > T::zero() {
            c.max(l / q)
        } else {
            T::infinity()
        }
    })
}

pub fn calibrate_first_order<T: Real>(history: &[DiagnosticsRecord<T>], a: T) -> T {
    calibrate(history, |r| first_order_lhs(r, a), |r| r.rhs_first)
}

pub fn calibrate_second_order<T: Real>(history: &[DiagnosticsRecord<T>], a: T) -> T {
    calibrate(history, |r| second_order_lhs(r, a), |r| r.rhs_second)
}

/// `‖u‖²_{H¹} + ‖∇d‖²_{H¹}`.
pub fn blowup_indicator<T: Real>(r: &DiagnosticsRecord<T>) -> T {
    r.l2_u * r.l2_u + r.l2_grad_u * r.l2_grad_u + r.l2_grad_d * r.l2_grad_d + r.l2_hess_d * r.l2_hess_d
}

/// Index of the first record whose indicator exceeds `factor` times the
/// initial one.
pub fn blowup_flag<T: Real>(history: &[DiagnosticsRecord<T>], factor: T) -> Option<usize> {
    let first = history.first()?.blowup_ind;
    history.iter().position(|r| r.blowup_ind > factor * first)
}

/// Ordered history of records; fills in the fields that depend on the
/// previous record.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Ledger<T> {
    records: Vec<DiagnosticsRecord<T>>,
}

impl<T: Real> Ledger<T> {
    pub fn new() -> Self {
        Self { records: Vec::new() }
    }

    pub fn push(&mut self, mut r: DiagnosticsRecord<T>) -> Result<&DiagnosticsRecord<T>> {
        if let Some(prev) = self.records.last() {
            let dt = r.t - prev.t;
            r.dt = dt;
            r.balance_residual = energy_balance_residual(prev, &r, dt)?;
            r.m_running = prev.m_running.max(r.m_instant);
        } else {
            r.dt = T::zero();
            r.balance_residual = T::zero();
            r.m_running = r.m_instant;
        }
        self.records.push(r);
        Ok(self.records.last().expect("just pushed"))
    }

    pub fn records(&self) -> &[DiagnosticsRecord<T>] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// `max_n |residual_n| / max(e_total, dissipation)_n` over records after the first.
    pub fn max_relative_residual(&self) -> T {
        self.records
            .iter()
            .skip(1)
            .map(|r| {
                let scale = r.e_total.max(r.dissipation());
                if scale > T::zero() {
                    r.balance_residual.abs() / scale
                } else {
                    r.balance_residual.abs()
                }
            })
            .fold(T::zero(), T::max)
    }

    pub fn max_abs_residual(&self) -> T {
        self.records.iter().skip(1).map(|r| r.balance_residual.abs()).fold(T::zero(), T::max)
    }

    /// True when `e_total` strictly decreases between every pair of records.
    pub fn energy_strictly_decreasing(&self) -> bool {
        self.records.windows(2).all(|w| w[1].e_total < w[0].e_total)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(CSV_COLUMNS)?;
        for r in &self.records {
            wr.write_record(r.csv_row().iter().map(|v| format!("{}", v.to_f64_lossy())))?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// A CSV ledger read back from disk: column names and rows.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvLedger {
    pub rows: Vec<[f64; 17]>,
}

impl CsvLedger {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = CSV_COLUMNS.iter().position(|c| *c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }
}

/// Parses a ledger written by [`Ledger::write_csv`], rejecting a wrong
/// header, short rows and unparsable numbers.
pub fn read_csv<R: Read>(r: R) -> Result<CsvLedger> {
    let mut rd = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
    let header = rd.headers()?.clone();
    if header.iter().ne(CSV_COLUMNS.iter().copied()) {
        return Err(Error::InvalidConfig(format!("unexpected CSV header: {:?}", header.iter().collect::<Vec<_>>())));
    }
    let mut rows = Vec::new();
    for (line, rec) in rd.records().enumerate() {
        let rec = rec?;
        let mut row = [0.0; 17];
        for (i, field) in rec.iter().enumerate() {
            row[i] = field
                .trim()
                .parse()
                .map_err(|_| Error::InvalidConfig(format!("row {}: bad number `{field}`", line + 1)))?;
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::InvalidConfig("CSV ledger has no rows".into()));
    }
    Ok(CsvLedger { rows })
}
