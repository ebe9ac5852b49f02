//! Evaluation of scenario points and CSV output.

use rayon::prelude::*;
use std::io::Write;
use std::path::Path;

use super::config::{Protocol, ScenarioConfig, ScenarioPoint};
use crate::channel::{check_invariance, Channel};
use crate::error::{Error, Result};
use crate::format::format_sig;
use crate::modes::LogicalLabel;
use crate::protocols::{
    apply_local, bb84_run, bell_state_logical, chsh_s, concurrence, mub_fidelities, phi_minus, tomography_probs,
    tomography_reconstruct, Link,
};

/// Invariance tolerance used for the `invariance_max_dev` verdicts.
pub const INVARIANCE_TOL: f64 = 1e-9;

/// Significant digits in emitted CSV.
pub const CSV_DIGITS: usize = 12;

/// One output line; `None` renders as an empty cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub values: Vec<Option<f64>>,
}

impl SweepRow {
    /// Value of column `i`, `NaN` when empty.
    pub fn get(&self, i: usize) -> f64 {
        self.values.get(i).copied().flatten().unwrap_or(f64::NAN)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub headers: Vec<String>,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.headers.iter().position(|h| h == name)
    }

    /// All values of a named column.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r.get(i)).collect())
    }
}

fn headers(protocol: Protocol, sweep: &str) -> Vec<String> {
    let tail: Vec<String> = match protocol {
        Protocol::Bb84 => [
            "fidelity_0",
            "fidelity_1",
            "fidelity_plus",
            "fidelity_minus",
            "avg_fidelity",
            "qber_z",
            "qber_x",
            "key_fraction",
            "secure",
            "transmittivity",
            "survival",
        ]
        .map(String::from)
        .to_vec(),
        Protocol::MubFidelity => ["fidelity", "min_fidelity", "transmittivity", "survival", "invariance_max_dev"]
            .map(String::from)
            .to_vec(),
        Protocol::Chsh => ["s", "concurrence", "fidelity_phi_minus", "survival"].map(String::from).to_vec(),
        Protocol::Tomography => {
            let mut h: Vec<String> =
                ["fidelity_phi_minus", "concurrence", "s", "survival"].map(String::from).to_vec();
            for i in 0..4 {
                for j in 0..4 {
                    h.push(format!("rho_{i}{j}_re"));
                    h.push(format!("rho_{i}{j}_im"));
                }
            }
            h
        }
        Protocol::Coeffs => {
            return ["m", "m_prime", "p", "p_prime", "re", "im"].map(String::from).to_vec();
        }
    };
    std::iter::once(sweep.to_string()).chain(tail).collect()
}

/// Evaluates every sweep point, in parallel, and returns the rows in sweep
/// order.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<SweepTable> {
    let points = cfg.points()?;
    let headers = headers(cfg.protocol, cfg.sweep_column());
    if cfg.protocol == Protocol::Coeffs {
        let (_, point) = &points[0];
        return Ok(SweepTable { headers, rows: coeff_rows(point)? });
    }
    let rows = points
        .par_iter()
        .map(|(v, p)| {
            evaluate(p).map(|cols| SweepRow { values: std::iter::once(Some(*v)).chain(cols).collect() }).map_err(
                |e| Error::AtSweepPoint { context: format!("{} = {v}", cfg.sweep_column()), source: Box::new(e) },
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepTable { headers, rows })
}

fn evaluate(p: &ScenarioPoint) -> Result<Vec<Option<f64>>> {
    let channel = Channel::compile(&p.channel, &p.basis, &p.grid)?;
    let link = Link::new(p.encoding, channel);
    match p.protocol {
        Protocol::Bb84 => {
            let r = bb84_run(&link, p.theta)?;
            let survival = r.survivals.iter().sum::<f64>() / 4.0;
            let mut cols: Vec<Option<f64>> = r.fidelities.iter().map(|&f| Some(f)).collect();
            cols.extend([
                Some(r.avg_fidelity),
                Some(r.qber_z),
                Some(r.qber_x),
                Some(r.key_fraction),
                Some(if r.secure { 1.0 } else { 0.0 }),
                Some(link.transmittivity(&LogicalLabel::BB84)?),
                Some(survival),
            ]);
            Ok(cols)
        }
        Protocol::MubFidelity => {
            let f = mub_fidelities(&link, p.theta)?;
            let mean = f.iter().map(|x| x.0).sum::<f64>() / 6.0;
            let min = f.iter().map(|x| x.0).fold(f64::INFINITY, f64::min);
            let survival = f.iter().map(|x| x.1).sum::<f64>() / 6.0;
            let dev = link.channel().spatial_coupling().ok().map(|c| check_invariance(&c, INVARIANCE_TOL).max_dev);
            Ok(vec![Some(mean), Some(min), Some(link.transmittivity(&LogicalLabel::MUB)?), Some(survival), dev])
        }
        Protocol::Chsh | Protocol::Tomography => {
            let link_b = Link::new(p.encoding, Channel::compile(&p.channel_b, &p.basis, &p.grid)?);
            let pair = bell_state_logical(&link);
            let out = apply_local(&pair, &link, &link_b, p.theta, p.theta_b)?;
            let survival = out.survival();
            let rho = out.density()?;
            if p.protocol == Protocol::Chsh {
                return Ok(vec![
                    Some(chsh_s(&rho)),
                    Some(concurrence(&rho)),
                    Some(rho.fidelity_pure(&phi_minus())),
                    Some(survival),
                ]);
            }
            let est = tomography_reconstruct(&tomography_probs(&rho))?;
            let mut cols = vec![
                Some(est.fidelity_pure(&phi_minus())),
                Some(concurrence(&est)),
                Some(chsh_s(&est)),
                Some(survival),
            ];
            for z in est.matrix().transpose().iter() {
                cols.push(Some(z.re));
                cols.push(Some(z.im));
            }
            Ok(cols)
        }
        Protocol::Coeffs => unreachable!("handled by run_scenario"),
    }
}

fn coeff_rows(p: &ScenarioPoint) -> Result<Vec<SweepRow>> {
    let c = Channel::compile(&p.channel, &p.basis, &p.grid)?.spatial_coupling()?;
    let b = p.basis;
    let mut rows = Vec::with_capacity(b.spatial_dim() * b.spatial_dim());
    for i in 0..b.spatial_dim() {
        let (m, pi) = b.spatial_mode(i);
        for o in 0..b.spatial_dim() {
            let (mp, po) = b.spatial_mode(o);
            let z = c.c(m, mp, pi, po);
            rows.push(SweepRow {
                values: vec![Some(m as f64), Some(mp as f64), Some(pi as f64), Some(po as f64), Some(z.re), Some(z.im)],
            });
        }
    }
    Ok(rows)
}

/// Writes `table` as CSV: header row, `.` decimals, 12 significant digits,
/// LF line endings.
pub fn write_csv<W: Write>(table: &SweepTable, out: W) -> Result<()> {
    let io = |e: csv::Error| Error::Io { path: "<csv>".into(), source: e.into() };
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(&table.headers).map_err(io)?;
    for row in &table.rows {
        w.write_record(row.values.iter().map(|v| v.map_or(String::new(), |x| format_sig(x, CSV_DIGITS))))
            .map_err(io)?;
    }
    w.flush().map_err(|source| Error::Io { path: "<csv>".into(), source })
}

/// [`write_csv`] to a file.
pub fn emit_csv(table: &SweepTable, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|source| Error::Io { path: path.into(), source })?;
    write_csv(table, std::io::BufWriter::new(file)).map_err(|e| match e {
        Error::Io { source, .. } => Error::Io { path: path.into(), source },
        other => other,
    })
}
