use rayon::prelude::*;

use super::format::{format_number, CsvTable};
use super::RunConfig;
use crate::error::{QflowError, Result};
use crate::evolve::{
    analytic_td_factor, coherent_w, solve_g_coefficients, td_factor_from_w, TimeGrid,
};
use crate::models::{BipartiteModel, DepolarizingModel, REST};
use crate::qcore::DensityMatrix;
use crate::witness::{
    cpf_joint, reference_preparation, td_series, CpfSpecs, MeasurementSpec, Scheme, WitnessEngine,
    REVIVAL_TOL,
};

const CROSS_CHECK_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FigureKind {
    Fig1a,
    Fig1b,
    Fig2,
}

impl FigureKind {
    pub fn name(self) -> &'static str {
        match self {
            FigureKind::Fig1a => "fig1a",
            FigureKind::Fig1b => "fig1b",
            FigureKind::Fig2 => "fig2",
        }
    }
}

/// Inputs of a figure. `ratios` holds φ/γ for fig1a/fig1b and Ω/γ for fig2;
/// `phi` is only read by fig2.
#[derive(Clone, Debug, PartialEq)]
pub struct FigureOptions {
    pub gamma: f64,
    pub phi: f64,
    pub ratios: Vec<f64>,
    pub tmax: f64,
    pub step: f64,
}

impl FigureOptions {
    pub fn defaults(kind: FigureKind) -> Self {
        match kind {
            FigureKind::Fig1a | FigureKind::Fig1b => Self {
                gamma: 1.0,
                phi: 1.0,
                ratios: vec![0.25, 1.0, 4.0],
                tmax: 6.0,
                step: 0.01,
            },
            FigureKind::Fig2 => Self {
                gamma: 1.0,
                phi: 1.0,
                ratios: vec![0.0, 0.5, 1.0, 2.0, 5.0],
                tmax: 10.0,
                step: 0.005,
            },
        }
    }

    pub fn from_config(kind: FigureKind, config: &RunConfig) -> Self {
        let base = Self::defaults(kind);
        Self {
            gamma: config.gamma,
            phi: config.phi(),
            ratios: match kind {
                FigureKind::Fig2 => config.omega_over_gamma.clone(),
                _ => config.phi_over_gamma.clone(),
            },
            tmax: config.tmax.unwrap_or(base.tmax),
            step: config.step.unwrap_or(base.step),
        }
    }

    fn echo(&self, kind: FigureKind) -> String {
        let list = self
            .ratios
            .iter()
            .map(|&r| format_number(r))
            .collect::<Vec<_>>()
            .join(",");
        let ratio_name = if kind == FigureKind::Fig2 {
            "omega_over_gamma"
        } else {
            "phi_over_gamma"
        };
        let mut s = format!("command={} gamma={} ", kind.name(), self.gamma);
        if kind == FigureKind::Fig2 {
            s.push_str(&format!("phi={} ", self.phi));
        }
        s.push_str(&format!(
            "{ratio_name}={list} tmax={} step={}",
            self.tmax, self.step
        ));
        s
    }
}

/// Order-preserving parallel map that stops at the first error in item order.
pub(crate) fn par_map<T, U, F>(items: &[T], f: F) -> Result<Vec<U>>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> Result<U> + Sync,
{
    items.par_iter().map(&f).collect()
}

fn revival_flags(d: &[f64]) -> Vec<f64> {
    let mut flags: Vec<f64> = d
        .windows(2)
        .map(|w| if w[1] - w[0] > REVIVAL_TOL { 1.0 } else { 0.0 })
        .collect();
    flags.push(0.0);
    flags
}

/// Renders a figure as CSV text. Columns are assembled in the order of
/// `opts.ratios` regardless of how the work is scheduled.
pub fn render_figure(kind: FigureKind, opts: &FigureOptions) -> Result<String> {
    if opts.ratios.is_empty() {
        return Err(QflowError::InvalidInput("ratio list is empty".into()));
    }
    if !opts.gamma.is_finite() || opts.gamma <= 0.0 {
        return Err(QflowError::InvalidInput(format!(
            "gamma must be positive, got {}",
            opts.gamma
        )));
    }
    let grid = TimeGrid::uniform(opts.tmax, opts.step)?;
    let real = grid.scaled(1.0 / opts.gamma)?;
    let labels: Vec<String> = opts.ratios.iter().map(|&r| format_number(r)).collect();
    let (header, columns) = match kind {
        FigureKind::Fig1a => {
            let ds = par_map(&opts.ratios, |&r| {
                fig1a_column(opts.gamma, r * opts.gamma, &real)
            })?;
            let mut header: Vec<String> = labels.iter().map(|l| format!("d@{l}")).collect();
            header.extend(labels.iter().map(|l| format!("revival@{l}")));
            let flags: Vec<Vec<f64>> = ds.iter().map(|d| revival_flags(d)).collect();
            (header, ds.into_iter().chain(flags).collect::<Vec<_>>())
        }
        FigureKind::Fig1b => {
            let pairs = par_map(&opts.ratios, |&r| {
                fig1b_columns(opts.gamma, r * opts.gamma, &real)
            })?;
            let header = labels
                .iter()
                .flat_map(|l| [format!("cpf+@{l}"), format!("cpf-@{l}")])
                .collect();
            (
                header,
                pairs.into_iter().flat_map(|(a, b)| [a, b]).collect(),
            )
        }
        FigureKind::Fig2 => {
            let ds = par_map(&opts.ratios, |&r| {
                fig2_column(opts.gamma, opts.phi, r * opts.gamma, &real)
            })?;
            let mut header: Vec<String> = labels.iter().map(|l| format!("d@{l}")).collect();
            header.extend(labels.iter().map(|l| format!("revival@{l}")));
            let flags: Vec<Vec<f64>> = ds.iter().map(|d| revival_flags(d)).collect();
            (header, ds.into_iter().chain(flags).collect())
        }
    };
    let mut table = CsvTable::new(
        &opts.echo(kind),
        std::iter::once("t".to_string()).chain(header),
    );
    let mut row = Vec::with_capacity(columns.len() + 1);
    for (i, &t) in grid.times().iter().enumerate() {
        row.clear();
        row.push(t);
        row.extend(columns.iter().map(|col| col[i]));
        table.push(&row);
    }
    Ok(table.finish())
}

/// Closed-form `d(t)`, checked against the propagated distance of `|0⟩` and `|1⟩`.
fn fig1a_column(gamma: f64, phi: f64, grid: &TimeGrid) -> Result<Vec<f64>> {
    let d: Vec<f64> = grid
        .times()
        .iter()
        .map(|&t| analytic_td_factor(gamma, phi, t))
        .collect::<Result<_>>()?;
    let model: BipartiteModel = DepolarizingModel::stationary(gamma, phi)?.into();
    let env = model.initial_env();
    let engine = WitnessEngine::new(model, None)?;
    let trace = td_series(
        &engine,
        &DensityMatrix::basis(2, 0)?,
        &DensityMatrix::basis(2, 1)?,
        &env,
        grid,
    )?;
    let gap = d
        .iter()
        .zip(&trace.distances)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if gap > CROSS_CHECK_TOL {
        return Err(QflowError::Invariant(format!(
            "propagated trace distance deviates from d(t) by {gap:e} at phi/gamma = {}",
            phi / gamma
        )));
    }
    Ok(d)
}

/// Equal-time CPF for both intermediate outcomes, `|+⟩` preparation, `σ_z` measurements.
fn fig1b_columns(gamma: f64, phi: f64, grid: &TimeGrid) -> Result<(Vec<f64>, Vec<f64>)> {
    let model: BipartiteModel = DepolarizingModel::stationary(gamma, phi)?.into();
    let env = model.initial_env();
    let engine = WitnessEngine::new(model, None)?;
    let specs = CpfSpecs::uniform(MeasurementSpec::pauli_z());
    let rho = reference_preparation();
    let values = par_map(grid.times(), |&t| {
        let r = cpf_joint(&engine, &rho, &env, &specs, &Scheme::Deterministic, t, t)?;
        Ok((
            r.correlations[0].unwrap_or(f64::NAN),
            r.correlations[1].unwrap_or(f64::NAN),
        ))
    })?;
    Ok(values.into_iter().unzip())
}

/// `d(t)` with a driven environment started at rest; the undriven column is
/// checked against the incoherent model.
fn fig2_column(gamma: f64, phi: f64, omega: f64, grid: &TimeGrid) -> Result<Vec<f64>> {
    let w = coherent_w(gamma, phi, omega, grid)?;
    if omega == 0.0 {
        let mut p0 = [0.0; 4];
        p0[REST] = 1.0;
        let oracle = solve_g_coefficients(gamma, phi, p0, grid)?;
        let gap = (0..grid.len())
            .map(|i| (w[i] - oracle.w(i)).abs())
            .fold(0.0, f64::max);
        if gap > CROSS_CHECK_TOL {
            return Err(QflowError::Invariant(format!(
                "undriven column deviates from the incoherent model by {gap:e}"
            )));
        }
    }
    Ok(w.into_iter().map(td_factor_from_w).collect())
}
