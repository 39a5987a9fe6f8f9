//! Scenario runners. Each expands the scenario grid into cells, fans the cells
//! out over the worker pool and collects rows in grid order.

use rayon::prelude::*;

use hdfd_core::arrivals::ArrivalModel;
use hdfd_core::bounds::{fundamental_lb, hgms_lb, hgms_lb_loose};
use hdfd_core::model::{capacity_load, gamma_expansion, sigma_rate_vector, NetworkConfig};
use hdfd_core::schedulers::{AccessDistribution, SchedulerName, WeightFunction};
use hdfd_core::sim::{replicate, replication_seed, run_once, Aggregate, SimConfig};

use crate::config::{ScenarioName, ScenarioSpec};
use crate::error::{CliError, Result};
use crate::output::{Table, Value};

pub const SIM_COLUMNS: [&str; 20] = [
    "scenario",
    "scheduler",
    "rho",
    "seed",
    "weight",
    "sigma",
    "n_fd",
    "n_hd",
    "horizon",
    "replications",
    "alpha_th",
    "mean_queue",
    "stderr",
    "fd_hd",
    "fd_hd_stderr",
    "ul_dl",
    "ul_dl_stderr",
    "throughput",
    "fundamental_lb",
    "hgms_lb",
];

pub const SAMPLE_PATH_COLUMNS: [&str; 10] = [
    "scenario",
    "scheduler",
    "rho",
    "seed",
    "weight",
    "sigma",
    "n_fd",
    "n_hd",
    "slot",
    "avg_queue",
];

pub const WEIGHT_TABLE_COLUMNS: [&str; 16] = [
    "scenario",
    "scheduler",
    "rho",
    "seed",
    "weight",
    "sigma",
    "n_fd",
    "n_hd",
    "horizon",
    "replications",
    "alpha_th",
    "mean_queue",
    "stderr",
    "qcsma_mean_queue",
    "qcsma_stderr",
    "ratio",
];

pub const BOUNDS_COLUMNS: [&str; 14] = [
    "scenario",
    "scheduler",
    "rho",
    "seed",
    "weight",
    "sigma",
    "n_fd",
    "n_hd",
    "capacity_load",
    "gamma",
    "fundamental_lb",
    "hgms_lb",
    "hgms_lb_loose",
    "binding",
];

/// One point of the parameter grid.
#[derive(Debug, Clone)]
pub struct GridPoint {
    pub rho: f64,
    pub sigma: f64,
    pub n_fd: usize,
    pub weight: WeightFunction,
}

/// A grid point paired with a scheduler: one simulation.
#[derive(Debug, Clone)]
pub struct Cell {
    pub point: GridPoint,
    pub scheduler: SchedulerName,
}

/// Grid points in row order: rho, then sigma, then n_fd, then weight.
pub fn grid(spec: &ScenarioSpec) -> Vec<GridPoint> {
    let weights = spec.weight_functions();
    let mut out = Vec::new();
    for &rho in &spec.rho {
        for &sigma in &spec.sigma {
            for &n_fd in &spec.nfd_grid {
                for weight in &weights {
                    out.push(GridPoint {
                        rho,
                        sigma,
                        n_fd,
                        weight: weight.clone(),
                    });
                }
            }
        }
    }
    out
}

pub fn cells(spec: &ScenarioSpec) -> Vec<Cell> {
    let names = spec.scheduler_names();
    grid(spec)
        .into_iter()
        .flat_map(|point| {
            names.iter().map(move |&scheduler| Cell {
                point: point.clone(),
                scheduler,
            })
        })
        .collect()
}

pub fn network(spec: &ScenarioSpec, n_fd: usize) -> Result<NetworkConfig> {
    Ok(NetworkConfig::new(n_fd, spec.n_users() - n_fd)?)
}

fn arrivals(spec: &ScenarioSpec, p: &GridPoint) -> Result<(NetworkConfig, ArrivalModel)> {
    let net = network(spec, p.n_fd)?;
    let lam = sigma_rate_vector(&net, p.sigma, p.rho)?;
    Ok((net, ArrivalModel::bernoulli(&lam)))
}

/// The simulation behind a cell. Re-running it reproduces the row.
pub fn cell_config(spec: &ScenarioSpec, cell: &Cell) -> Result<SimConfig> {
    let (net, arr) = arrivals(spec, &cell.point)?;
    let kind = cell
        .scheduler
        .with_params(&spec.access_distribution(), spec.alpha_th);
    let mut sc = SimConfig::new(
        net,
        &arr.rates(),
        kind,
        cell.point.weight.clone(),
        spec.horizon,
    );
    sc.arrivals = arr;
    sc.replications = spec.replications;
    sc.master_seed = spec.seed;
    sc.warmup = spec.warmup;
    Ok(sc)
}

/// Fundamental, improved and loose bounds; `None` where the rates saturate.
fn bounds(
    net: &NetworkConfig,
    arr: &ArrivalModel,
    alpha: &AccessDistribution,
    f: &WeightFunction,
) -> (Option<f64>, Option<f64>, Option<f64>) {
    (
        fundamental_lb(net, arr).ok(),
        hgms_lb(net, arr, alpha, f).ok(),
        hgms_lb_loose(net, arr, f).ok(),
    )
}

fn point_prefix(spec: &ScenarioSpec, scheduler: &str, p: &GridPoint) -> Vec<Value> {
    vec![
        Value::text(spec.scenario.as_str()),
        Value::text(scheduler),
        Value::Float(p.rho),
        Value::Int(spec.seed),
        Value::text(p.weight.name()),
        Value::Float(p.sigma),
        Value::Int(p.n_fd as u64),
        Value::Int((spec.n_users() - p.n_fd) as u64),
    ]
}

fn run_cells(spec: &ScenarioSpec, cells: &[Cell]) -> Result<Vec<Aggregate>> {
    cells
        .par_iter()
        .map(|c| Ok(replicate(&cell_config(spec, c)?)?))
        .collect()
}

fn simulation_table(spec: &ScenarioSpec) -> Result<Table> {
    let cells = cells(spec);
    let aggs = run_cells(spec, &cells)?;
    let alpha = spec.access_distribution();
    let mut table = Table::new(&SIM_COLUMNS);
    for (cell, agg) in cells.iter().zip(&aggs) {
        let (net, arr) = arrivals(spec, &cell.point)?;
        let (fund, imp, _) = bounds(&net, &arr, &alpha, &cell.point.weight);
        let mut row = point_prefix(spec, cell.scheduler.as_str(), &cell.point);
        row.extend([
            Value::Int(spec.horizon),
            Value::Int(spec.replications as u64),
            Value::Float(spec.alpha_th),
            Value::Float(agg.overall_mean_queue.mean),
            Value::Float(agg.overall_mean_queue.stderr),
            Value::opt(agg.fd_hd_fairness.map(|m| m.mean)),
            Value::opt(agg.fd_hd_fairness.map(|m| m.stderr)),
            Value::opt(agg.ul_dl_fairness.map(|m| m.mean)),
            Value::opt(agg.ul_dl_fairness.map(|m| m.stderr)),
            Value::Float(agg.per_link_throughput.iter().map(|m| m.mean).sum()),
            Value::opt(fund),
            Value::opt(imp),
        ]);
        table.push(row);
    }
    Ok(table)
}

fn sample_path_table(spec: &ScenarioSpec) -> Result<Table> {
    let cells = cells(spec);
    let paths: Vec<Vec<(u64, f64)>> = cells
        .par_iter()
        .map(|c| {
            let mut sc = cell_config(spec, c)?;
            sc.replications = 1;
            sc.sample_stride = Some(spec.sample_stride);
            let r = run_once(&sc, replication_seed(spec.seed, 0))?;
            Ok(r.sample_path.unwrap_or_default())
        })
        .collect::<Result<_>>()?;
    let mut table = Table::new(&SAMPLE_PATH_COLUMNS);
    for (cell, path) in cells.iter().zip(paths) {
        for (slot, avg) in path {
            let mut row = point_prefix(spec, cell.scheduler.as_str(), &cell.point);
            row.extend([Value::Int(slot), Value::Float(avg)]);
            table.push(row);
        }
    }
    Ok(table)
}

fn weight_table(spec: &ScenarioSpec) -> Result<Table> {
    let names = spec.scheduler_names();
    let cells = cells(spec);
    let aggs = run_cells(spec, &cells)?;
    let mut table = Table::new(&WEIGHT_TABLE_COLUMNS);
    for (group, group_aggs) in cells.chunks(names.len()).zip(aggs.chunks(names.len())) {
        let q = group
            .iter()
            .position(|c| c.scheduler == SchedulerName::QCsma)
            .map(|k| group_aggs[k].overall_mean_queue)
            .expect("validated: Q-CSMA present");
        for (cell, agg) in group.iter().zip(group_aggs) {
            if cell.scheduler == SchedulerName::QCsma {
                continue;
            }
            let mean = agg.overall_mean_queue.mean;
            let mut row = point_prefix(spec, cell.scheduler.as_str(), &cell.point);
            row.extend([
                Value::Int(spec.horizon),
                Value::Int(spec.replications as u64),
                Value::Float(spec.alpha_th),
                Value::Float(mean),
                Value::Float(agg.overall_mean_queue.stderr),
                Value::Float(q.mean),
                Value::Float(q.stderr),
                Value::opt((mean > 0.0).then(|| q.mean / mean)),
            ]);
            table.push(row);
        }
    }
    Ok(table)
}

fn bounds_table(spec: &ScenarioSpec) -> Result<Table> {
    let alpha = spec.access_distribution();
    let mut table = Table::new(&BOUNDS_COLUMNS);
    for p in grid(spec) {
        let (net, arr) = arrivals(spec, &p)?;
        let lam = arr.rates();
        let (fund, imp, loose) = bounds(&net, &arr, &alpha, &p.weight);
        let binding = match (fund, imp) {
            (Some(f), Some(h)) if h > f => "improved",
            (Some(_), Some(_)) => "fundamental",
            _ => "NA",
        };
        let mut row = point_prefix(spec, SchedulerName::Hgms.as_str(), &p);
        row.extend([
            Value::Float(capacity_load(&net, &lam)?),
            Value::opt(gamma_expansion(&net, &lam).ok()),
            Value::opt(fund),
            Value::opt(imp),
            Value::opt(loose),
            Value::text(binding),
        ]);
        table.push(row);
    }
    Ok(table)
}

/// First grid `rho` (in row order) at which the binding bound differs from
/// the previous row's, i.e. where the improved bound overtakes the
/// fundamental one or the reverse.
pub fn turning_point(bounds: &Table) -> Option<f64> {
    let col = bounds.column("binding")?;
    let rho = bounds.column("rho")?;
    bounds
        .rows
        .windows(2)
        .find(|w| w[0][col] != w[1][col])
        .and_then(|w| w[1][rho].as_f64())
}

/// Runs the scenario on a pool of `workers` threads (all cores when `None`).
pub fn run_scenario(spec: &ScenarioSpec, workers: Option<usize>) -> Result<Table> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()
        .map_err(|e| CliError::InvalidValue(format!("worker pool: {e}")))?;
    pool.install(|| match spec.scenario {
        ScenarioName::SamplePath => sample_path_table(spec),
        ScenarioName::WeightTable => weight_table(spec),
        ScenarioName::BoundsCurve => bounds_table(spec),
        ScenarioName::DelaySweep
        | ScenarioName::FairnessSigma
        | ScenarioName::FairnessNfd
        | ScenarioName::FairnessRho
        | ScenarioName::Custom => simulation_table(spec),
    })
}
