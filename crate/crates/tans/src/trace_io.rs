//! Trace and reconstruction CSV files.
//!
//! Traces are `t,value,hidden_state`, with `hidden_state` empty for AR(1)
//! traces. Reconstructions are `t,truth,recon,abs_err`.

use std::io::{Read, Write};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use tans_core::signals::SignalTrace;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t: usize,
    pub value: f64,
    pub hidden_state: Option<u8>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReconRow {
    pub t: usize,
    pub truth: f64,
    pub recon: f64,
    pub abs_err: f64,
}

pub fn trace_rows(trace: &SignalTrace) -> Vec<TraceRow> {
    trace
        .values
        .iter()
        .enumerate()
        .map(|(t, &value)| TraceRow {
            t,
            value,
            hidden_state: trace.hidden_states.get(t).copied(),
        })
        .collect()
}

pub fn recon_rows(truth: &[f64], recon: &[f64]) -> Vec<ReconRow> {
    truth
        .iter()
        .zip(recon)
        .enumerate()
        .map(|(t, (&truth, &recon))| ReconRow {
            t,
            truth,
            recon,
            abs_err: (truth - recon).abs(),
        })
        .collect()
}

pub fn write_csv<W: Write, R: Serialize>(w: W, rows: &[R]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

/// Read a trace CSV. Rows must be in time order starting at 0; hidden
/// states must be present on every row or on none.
pub fn read_trace<R: Read>(r: R, seed: u64) -> Result<SignalTrace> {
    let mut reader = csv::Reader::from_reader(r);
    let mut values = Vec::new();
    let mut hidden = Vec::new();
    for (k, row) in reader.deserialize::<TraceRow>().enumerate() {
        let row = row.with_context(|| format!("trace row {}", k + 1))?;
        if row.t != k {
            bail!("trace row {}: expected t = {k}, found {}", k + 1, row.t);
        }
        if !row.value.is_finite() {
            bail!("trace row {}: value is not finite", k + 1);
        }
        values.push(row.value);
        if let Some(h) = row.hidden_state {
            if h > 1 {
                bail!("trace row {}: hidden_state must be 0 or 1", k + 1);
            }
            hidden.push(h);
        }
    }
    if values.is_empty() {
        bail!("trace: no rows");
    }
    if !hidden.is_empty() && hidden.len() != values.len() {
        bail!("trace: hidden_state is missing on some rows");
    }
    Ok(SignalTrace::new(values, hidden, seed)?)
}
