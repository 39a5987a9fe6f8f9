//! Slotted simulation loop and replication harness.
//!
//! Each slot: the scheduler decides from the beginning-of-slot queues, then
//! arrivals are drawn link by link, then the queues update. Metrics average
//! the post-update queues over the horizon (after an optional warmup).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::arrivals::ArrivalModel;
use crate::error::{Error, Result};
use crate::model::{is_feasible, LinkRef, NetworkConfig, QueueVector, RateVector};
use crate::schedulers::{Scheduler, SchedulerKind, WeightFunction};

pub const DECILES: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub net: NetworkConfig,
    pub arrivals: ArrivalModel,
    pub scheduler: SchedulerKind,
    pub weight: WeightFunction,
    pub horizon: u64,
    pub replications: usize,
    pub master_seed: u64,
    /// Record `(slot, mean queue)` every `sample_stride` slots.
    pub sample_stride: Option<u64>,
    /// Slots excluded from the time averages.
    pub warmup: u64,
    /// Check schedule feasibility every slot and panic on violation.
    pub assert_feasible: bool,
}

impl SimConfig {
    /// Bernoulli arrivals at `lam`, full-run averaging, one replication.
    pub fn new(
        net: NetworkConfig,
        lam: &RateVector,
        scheduler: SchedulerKind,
        weight: WeightFunction,
        horizon: u64,
    ) -> Self {
        SimConfig {
            net,
            arrivals: ArrivalModel::bernoulli(lam),
            scheduler,
            weight,
            horizon,
            replications: 1,
            master_seed: 0,
            sample_stride: None,
            warmup: 0,
            assert_feasible: false,
        }
    }

    pub fn rates(&self) -> RateVector {
        self.arrivals.rates()
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::InvalidParameter("horizon must be at least 1".into()));
        }
        if self.replications == 0 {
            return Err(Error::InvalidParameter(
                "replications must be at least 1".into(),
            ));
        }
        if self.warmup >= self.horizon {
            return Err(Error::InvalidParameter(
                "warmup must be shorter than the horizon".into(),
            ));
        }
        if self.sample_stride == Some(0) {
            return Err(Error::InvalidParameter(
                "sample stride must be positive".into(),
            ));
        }
        if self.arrivals.len() != self.net.n_links() {
            return Err(Error::Dimension {
                expected: self.net.n_links(),
                actual: self.arrivals.len(),
            });
        }
        Scheduler::new(self.net, self.scheduler.clone(), self.weight.clone()).map(|_| ())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub per_link_mean_queue: Vec<f64>,
    pub overall_mean_queue: f64,
    /// `None` when either user class is empty or idle.
    pub fd_hd_fairness: Option<f64>,
    pub ul_dl_fairness: Option<f64>,
    pub per_link_throughput: Vec<f64>,
    pub sample_path: Option<Vec<(u64, f64)>>,
    pub seed_used: u64,
    pub arrived: Vec<u64>,
    pub served: Vec<u64>,
    pub final_queue: Vec<u64>,
    /// Mean per-link queue over each tenth of the horizon.
    pub decile_mean_queue: [f64; DECILES],
}

/// SplitMix64 finaliser.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of replication `index` under `master`.
pub fn replication_seed(master: u64, index: u64) -> u64 {
    mix64(master ^ mix64(index))
}

/// One replication. Deterministic in `(sc, seed)`.
pub fn run_once(sc: &SimConfig, seed: u64) -> Result<SimResult> {
    run_traced(sc, seed, |_, _| {})
}

/// [`run_once`] that also hands every post-update queue vector to `trace`.
pub fn run_traced(
    sc: &SimConfig,
    seed: u64,
    mut trace: impl FnMut(u64, &QueueVector),
) -> Result<SimResult> {
    sc.validate()?;
    let net = &sc.net;
    let n = net.n_links();
    let mut scheduler = Scheduler::new(*net, sc.scheduler.clone(), sc.weight.clone())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut q = QueueVector::zeros(n);
    let mut a = vec![0u64; n];
    let mut arrived = vec![0u64; n];
    let mut served = vec![0u64; n];
    let mut queue_sum = vec![0u128; n];
    let mut decile_sum = [0u128; DECILES];
    let mut decile_len = [0u64; DECILES];
    let mut path = sc
        .sample_stride
        .map(|s| Vec::with_capacity((sc.horizon / s) as usize));

    for t in 1..=sc.horizon {
        let x = scheduler.step(&q, &mut rng);
        if sc.assert_feasible {
            assert!(
                is_feasible(net, &x).unwrap_or(false),
                "infeasible schedule at slot {t}: {x:?}"
            );
        }
        sc.arrivals.sample_into(t, &mut rng, &mut a);
        for (tot, &ai) in arrived.iter_mut().zip(&a) {
            *tot += ai;
        }
        q.apply(&a, &x, &mut served);
        scheduler.observe(&q);
        trace(t, &q);

        let total = q.total();
        if t > sc.warmup {
            for (s, &v) in queue_sum.iter_mut().zip(q.as_slice()) {
                *s += u128::from(v);
            }
        }
        let d = (((t - 1) * DECILES as u64) / sc.horizon) as usize;
        decile_sum[d] += u128::from(total);
        decile_len[d] += 1;
        if let (Some(stride), Some(p)) = (sc.sample_stride, path.as_mut()) {
            if t % stride == 0 {
                p.push((t, total as f64 / n as f64));
            }
        }
    }

    let counted = (sc.horizon - sc.warmup) as f64;
    let per_link_mean_queue: Vec<f64> = queue_sum.iter().map(|&s| s as f64 / counted).collect();
    let overall_mean_queue = per_link_mean_queue.iter().sum::<f64>() / n as f64;
    let per_link_throughput = served
        .iter()
        .map(|&s| s as f64 / sc.horizon as f64)
        .collect();
    let mut decile_mean_queue = [0.0; DECILES];
    for d in 0..DECILES {
        if decile_len[d] > 0 {
            decile_mean_queue[d] = decile_sum[d] as f64 / (decile_len[d] as f64 * n as f64);
        }
    }

    Ok(SimResult {
        fd_hd_fairness: fairness_fd_hd(net, &per_link_mean_queue),
        ul_dl_fairness: fairness_ul_dl(net, &per_link_mean_queue),
        per_link_mean_queue,
        overall_mean_queue,
        per_link_throughput,
        sample_path: path,
        seed_used: seed,
        arrived,
        served,
        final_queue: q.as_slice().to_vec(),
        decile_mean_queue,
    })
}

fn ratio(num: f64, den: f64) -> Option<f64> {
    if den > 0.0 {
        Some(num / den)
    } else {
        None
    }
}

/// Mean FD-user backlog (UL + DL) over mean HD-user backlog.
pub fn fairness_fd_hd(net: &NetworkConfig, per_link_mean_queue: &[f64]) -> Option<f64> {
    if net.n_fd() == 0 || net.n_hd() == 0 {
        return None;
    }
    let user = |i: usize| {
        per_link_mean_queue[LinkRef::uplink(i).index()]
            + per_link_mean_queue[LinkRef::downlink(i).index()]
    };
    let fd = net.fd_users().map(user).sum::<f64>() / net.n_fd() as f64;
    let hd = net.hd_users().map(user).sum::<f64>() / net.n_hd() as f64;
    ratio(fd, hd)
}

/// Mean uplink backlog over mean downlink backlog.
pub fn fairness_ul_dl(net: &NetworkConfig, per_link_mean_queue: &[f64]) -> Option<f64> {
    let ul: f64 = net
        .users()
        .map(|i| per_link_mean_queue[LinkRef::uplink(i).index()])
        .sum();
    let dl: f64 = net
        .users()
        .map(|i| per_link_mean_queue[LinkRef::downlink(i).index()])
        .sum();
    ratio(ul, dl)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanStderr {
    pub mean: f64,
    /// Standard error of the mean across replications (0 for one replication).
    pub stderr: f64,
}

impl MeanStderr {
    pub fn of(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let stderr = if xs.len() > 1 {
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
            (var / n).sqrt()
        } else {
            0.0
        };
        MeanStderr { mean, stderr }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub overall_mean_queue: MeanStderr,
    pub fd_hd_fairness: Option<MeanStderr>,
    pub ul_dl_fairness: Option<MeanStderr>,
    pub per_link_mean_queue: Vec<MeanStderr>,
    pub per_link_throughput: Vec<MeanStderr>,
    pub runs: Vec<SimResult>,
}

fn optional_stat(
    runs: &[SimResult],
    get: impl Fn(&SimResult) -> Option<f64>,
) -> Option<MeanStderr> {
    let xs: Option<Vec<f64>> = runs.iter().map(get).collect();
    xs.map(|v| MeanStderr::of(&v))
}

fn per_link_stat(runs: &[SimResult], get: impl Fn(&SimResult) -> &[f64]) -> Vec<MeanStderr> {
    let n = get(&runs[0]).len();
    (0..n)
        .map(|l| MeanStderr::of(&runs.iter().map(|r| get(r)[l]).collect::<Vec<_>>()))
        .collect()
}

/// Runs every replication (in parallel on the current rayon pool) and
/// aggregates in replication order, so results do not depend on the pool.
pub fn replicate(sc: &SimConfig) -> Result<Aggregate> {
    sc.validate()?;
    let runs = (0..sc.replications as u64)
        .into_par_iter()
        .map(|r| run_once(sc, replication_seed(sc.master_seed, r)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Aggregate {
        overall_mean_queue: MeanStderr::of(
            &runs
                .iter()
                .map(|r| r.overall_mean_queue)
                .collect::<Vec<_>>(),
        ),
        fd_hd_fairness: optional_stat(&runs, |r| r.fd_hd_fairness),
        ul_dl_fairness: optional_stat(&runs, |r| r.ul_dl_fairness),
        per_link_mean_queue: per_link_stat(&runs, |r| &r.per_link_mean_queue),
        per_link_throughput: per_link_stat(&runs, |r| &r.per_link_throughput),
        runs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::equal_rate_vector;
    use crate::schedulers::{AccessDistribution, SchedulerName};

    fn kinds(n: usize) -> Vec<SchedulerKind> {
        let alpha = AccessDistribution::uniform(n).unwrap();
        SchedulerName::ALL
            .iter()
            .map(|s| s.with_params(&alpha, 0.01))
            .collect()
    }

    #[test]
    fn zero_load_gives_zero_queues() {
        let net = NetworkConfig::new(2, 2).unwrap();
        for kind in kinds(4) {
            let sc = SimConfig::new(
                net,
                &RateVector::zeros(8),
                kind,
                WeightFunction::Log1p,
                2000,
            );
            let r = run_once(&sc, 1).unwrap();
            assert!(r.per_link_mean_queue.iter().all(|&v| v == 0.0));
            assert_eq!(r.fd_hd_fairness, None);
            assert_eq!(r.ul_dl_fairness, None);
        }
    }

    #[test]
    fn saturated_single_link_under_gms_stays_bounded() {
        let net = NetworkConfig::new(0, 1).unwrap();
        let lam = RateVector::new(vec![0.0, 1.0]).unwrap();
        let sc = SimConfig::new(net, &lam, SchedulerKind::Gms, WeightFunction::Log1p, 10_000);
        let mut max_q = 0;
        run_traced(&sc, 3, |_, q| max_q = max_q.max(q.as_slice()[1])).unwrap();
        assert!(max_q <= 1);
    }

    #[test]
    fn conservation_holds_per_link() {
        let net = NetworkConfig::new(3, 2).unwrap();
        let lam = equal_rate_vector(&net, 0.9).unwrap();
        for kind in kinds(5) {
            let mut sc = SimConfig::new(net, &lam, kind, WeightFunction::Log1p, 20_000);
            sc.assert_feasible = true;
            let r = run_once(&sc, 8).unwrap();
            for l in 0..10 {
                assert_eq!(r.served[l] + r.final_queue[l], r.arrived[l]);
                assert!(r.per_link_throughput[l] <= 1.0);
            }
            let mean = r.per_link_mean_queue.iter().sum::<f64>() / 10.0;
            assert!((mean - r.overall_mean_queue).abs() < 1e-9);
        }
    }

    #[test]
    fn seeded_runs_are_identical() {
        let net = NetworkConfig::new(5, 5).unwrap();
        let lam = equal_rate_vector(&net, 0.8).unwrap();
        for kind in kinds(10) {
            let mut sc = SimConfig::new(net, &lam, kind, WeightFunction::Sqrt, 5000);
            sc.sample_stride = Some(100);
            let mut t1 = Vec::new();
            let mut t2 = Vec::new();
            let a = run_traced(&sc, 42, |_, q| t1.push(q.clone())).unwrap();
            let b = run_traced(&sc, 42, |_, q| t2.push(q.clone())).unwrap();
            assert_eq!(a, b);
            assert_eq!(t1, t2);
            assert_eq!(a.sample_path.as_ref().unwrap().len(), 50);
        }
    }

    #[test]
    fn single_replication_equals_run_once() {
        let net = NetworkConfig::new(5, 5).unwrap();
        let lam = equal_rate_vector(&net, 0.7).unwrap();
        let alpha = AccessDistribution::uniform(10).unwrap();
        let mut sc = SimConfig::new(
            net,
            &lam,
            SchedulerKind::Hgms(alpha),
            WeightFunction::Log1p,
            10_000,
        );
        sc.master_seed = 77;
        let agg = replicate(&sc).unwrap();
        let one = run_once(&sc, replication_seed(77, 0)).unwrap();
        assert_eq!(agg.runs, vec![one.clone()]);
        assert_eq!(agg.overall_mean_queue.mean, one.overall_mean_queue);
        assert_eq!(agg.overall_mean_queue.stderr, 0.0);
    }

    #[test]
    fn replicate_independent_of_pool_size() {
        let net = NetworkConfig::new(5, 5).unwrap();
        let lam = equal_rate_vector(&net, 0.85).unwrap();
        let mut sc = SimConfig::new(net, &lam, SchedulerKind::QCsma, WeightFunction::Log1p, 5000);
        sc.replications = 6;
        sc.master_seed = 5;
        let run_with = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| replicate(&sc).unwrap())
        };
        assert_eq!(run_with(1), run_with(4));
    }

    #[test]
    fn fairness_helpers() {
        let net = NetworkConfig::new(1, 1).unwrap();
        assert_eq!(fairness_fd_hd(&net, &[1.0, 1.0, 2.0, 2.0]), Some(0.5));
        assert_eq!(fairness_ul_dl(&net, &[3.0, 1.0, 3.0, 1.0]), Some(3.0));
        let hd = NetworkConfig::new(0, 2).unwrap();
        assert_eq!(fairness_fd_hd(&hd, &[1.0; 4]), None);
    }

    #[test]
    fn validation_errors() {
        let net = NetworkConfig::new(1, 1).unwrap();
        let lam = RateVector::zeros(4);
        let mut sc = SimConfig::new(net, &lam, SchedulerKind::Gms, WeightFunction::Log1p, 0);
        assert!(sc.validate().is_err());
        sc.horizon = 10;
        sc.replications = 0;
        assert!(sc.validate().is_err());
        sc.replications = 1;
        sc.sample_stride = Some(0);
        assert!(sc.validate().is_err());
        sc.sample_stride = None;
        sc.arrivals = ArrivalModel::bernoulli(&RateVector::zeros(6));
        assert!(sc.validate().is_err());
    }

    #[test]
    fn seed_mixing_spreads_indices() {
        let seeds: std::collections::HashSet<u64> =
            (0..1000).map(|i| replication_seed(1, i)).collect();
        assert_eq!(seeds.len(), 1000);
        assert_ne!(replication_seed(1, 0), replication_seed(2, 0));
    }
}
