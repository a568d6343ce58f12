use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::output::{Cell, Table};
use super::{CliError, Machine, SweepConfig};
use crate::channels::{eta_pqcm, eta_uqcm};
use crate::crb::{attainability_closed, total_variance_bound, QfimSpectrum};
use crate::qfim::{
    equatorial_derivatives, qfim_pqcm_closed, qfim_pure, qfim_shrink_closed, qfim_uqcm_closed,
    spectral_output, EquatorialQfim,
};
use crate::states::PhaseVector;
use crate::Result;

/// Above this d the attainability column is left empty; the spectral
/// evaluation costs O(d⁴).
pub const ATTAINABILITY_MAX_DIM: usize = 64;
const ATTAINABLE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComputeRow {
    pub d: usize,
    pub eta: f64,
    pub f_diag: f64,
    pub f_off: f64,
    pub lambda1: f64,
    /// Absent at d = 2, where F has a single eigenvalue.
    pub lambda2: Option<f64>,
    pub variance_min: f64,
    pub attainable: Option<bool>,
}

/// Phase vector used for row `d`; depends only on (seed, d).
pub fn phases_for(seed: u64, d: usize) -> Result<PhaseVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (d as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    PhaseVector::random(d, &mut rng)
}

fn machine_qfim(machine: Machine, d: usize, eta: f64) -> Result<EquatorialQfim> {
    match machine {
        Machine::Pure => qfim_pure(d),
        Machine::Uqcm => qfim_uqcm_closed(d),
        Machine::Pqcm => qfim_pqcm_closed(d),
        Machine::Shrink => qfim_shrink_closed(d, eta),
    }
}

fn machine_eta(machine: Machine, d: usize, eta: Option<f64>) -> f64 {
    match machine {
        Machine::Pure => 1.0,
        Machine::Uqcm => eta_uqcm(d),
        Machine::Pqcm => eta_pqcm(d),
        Machine::Shrink => eta.expect("validated: shrink carries eta"),
    }
}

pub fn cmd_compute(cfg: &SweepConfig) -> std::result::Result<Vec<ComputeRow>, CliError> {
    let mut rows = Vec::with_capacity(cfg.d_max - cfg.d_min + 1);
    for d in cfg.d_min..=cfg.d_max {
        let eta = machine_eta(cfg.machine, d, cfg.eta);
        let f = machine_qfim(cfg.machine, d, eta)?;
        let spectrum = QfimSpectrum::of(&f);
        let bound = total_variance_bound(d, eta)?;
        let attainable = if d <= ATTAINABILITY_MAX_DIM {
            let p = match &cfg.phases {
                Some(phases) => PhaseVector::new(phases.clone())?,
                None => phases_for(cfg.seed, d)?,
            };
            let sd = spectral_output(&p, eta)?;
            let l = attainability_closed(&sd, &equatorial_derivatives(&p))?;
            Some(l.is_attainable(ATTAINABLE_TOL))
        } else {
            None
        };
        rows.push(ComputeRow {
            d,
            eta,
            f_diag: f.diagonal,
            f_off: f.off_diagonal,
            lambda1: spectrum.lambda1,
            lambda2: (spectrum.mult2 > 0).then_some(spectrum.lambda2),
            variance_min: bound.total_variance_min,
            attainable,
        });
    }
    Ok(rows)
}

pub fn compute_table(rows: &[ComputeRow], cfg: &SweepConfig) -> Table {
    let mut t = Table::new(&[
        "d",
        "eta",
        "F_diag",
        "F_offdiag",
        "lambda1",
        "lambda2",
        "variance_min",
        "attainable",
    ]);
    if cfg.phases.is_none() {
        t.meta.push(("seed".into(), json!(cfg.seed)));
    }
    t.rows = rows
        .iter()
        .map(|r| {
            vec![
                Cell::Int(r.d as u64),
                Cell::Real(r.eta),
                Cell::Real(r.f_diag),
                Cell::Real(r.f_off),
                Cell::Real(r.lambda1),
                r.lambda2.map_or(Cell::Missing, Cell::Real),
                Cell::Real(r.variance_min),
                r.attainable.map_or(Cell::Missing, Cell::Bool),
            ]
        })
        .collect();
    t
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    /// Input vs UQCM-output diagonal with the scaled upper bound.
    InequalityCheck,
    /// UQCM vs PQCM diagonal.
    MachineComparison,
    /// Minimum total variances for input, UQCM and PQCM.
    TotalVariance,
}

impl Figure {
    pub fn from_number(n: u8) -> Option<Self> {
        match n {
            1 => Some(Self::InequalityCheck),
            2 => Some(Self::MachineComparison),
            3 => Some(Self::TotalVariance),
            _ => None,
        }
    }

    pub fn number(self) -> u8 {
        match self {
            Self::InequalityCheck => 1,
            Self::MachineComparison => 2,
            Self::TotalVariance => 3,
        }
    }
}

/// Figure data for d = 2..=d_max.
pub fn cmd_figure(figure: Figure, d_max: usize) -> std::result::Result<Table, CliError> {
    if d_max < 3 {
        return Err(super::usage("figures need dmax >= 3"));
    }
    let mut t = match figure {
        Figure::InequalityCheck => Table::new(&["d", "F_in_diag", "scaled_bound", "F_out_diag"]),
        Figure::MachineComparison => Table::new(&["d", "F_uqcm_diag", "F_pqcm_diag"]),
        Figure::TotalVariance => Table::new(&["d", "E_in", "E_uqcm", "E_pqcm"]),
    };
    t.meta.push(("figure".into(), json!(figure.number())));
    for d in 2..=d_max {
        let mut row = vec![Cell::Int(d as u64)];
        match figure {
            Figure::InequalityCheck => {
                let f_in = qfim_pure(d)?.diagonal;
                row.push(Cell::Real(f_in));
                row.push(Cell::Real(eta_uqcm(d) * f_in));
                row.push(Cell::Real(qfim_uqcm_closed(d)?.diagonal));
            }
            Figure::MachineComparison => {
                row.push(Cell::Real(qfim_uqcm_closed(d)?.diagonal));
                row.push(Cell::Real(qfim_pqcm_closed(d)?.diagonal));
            }
            Figure::TotalVariance => {
                for eta in [1.0, eta_uqcm(d), eta_pqcm(d)] {
                    row.push(Cell::Real(total_variance_bound(d, eta)?.total_variance_min));
                }
            }
        }
        t.rows.push(row);
    }
    Ok(t)
}
