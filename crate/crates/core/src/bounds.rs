//! Analytic lower bounds on the steady-state average queue length per link.

use crate::arrivals::ArrivalModel;
use crate::error::{Error, Result};
use crate::model::{LinkRef, NetworkConfig};
use crate::schedulers::{tx_prob_inverse, AccessDistribution, TxProb, WeightFunction};

/// A set of mutually conflicting links with their arrival moments.
#[derive(Debug, Clone, PartialEq)]
pub struct CliqueSpec {
    pub links: Vec<LinkRef>,
    pub rates: Vec<f64>,
    pub variances: Vec<f64>,
}

impl CliqueSpec {
    pub fn from_arrivals(links: Vec<LinkRef>, arrivals: &ArrivalModel) -> Self {
        let rates = links.iter().map(|l| arrivals.mean(l.index())).collect();
        let variances = links.iter().map(|l| arrivals.variance(l.index())).collect();
        CliqueSpec {
            links,
            rates,
            variances,
        }
    }

    pub fn total_rate(&self) -> f64 {
        self.rates.iter().sum()
    }
}

/// Lower bound on the expected sum of queue lengths in a clique under any
/// policy: `sum_l (lam_l + Var(A_l) - lam_l * lam_C) / (2 (1 - lam_C))`.
pub fn clique_lb(c: &CliqueSpec) -> Result<f64> {
    if c.rates.len() != c.variances.len() {
        return Err(Error::Dimension {
            expected: c.rates.len(),
            actual: c.variances.len(),
        });
    }
    let lam_c = c.total_rate();
    if lam_c >= 1.0 {
        return Err(Error::SaturatedClique(lam_c));
    }
    let num: f64 = c
        .rates
        .iter()
        .zip(&c.variances)
        .map(|(&l, &v)| l + v - l * lam_c)
        .sum();
    Ok(num / (2.0 * (1.0 - lam_c)))
}

/// Splits the links into the maximal-rate clique (both links of every HD
/// user plus the busier link of every FD user, UL on ties) and the rest.
pub fn emax_partition(cfg: &NetworkConfig, rates: &[f64]) -> Result<(Vec<LinkRef>, Vec<LinkRef>)> {
    cfg.check_len(rates.len())?;
    let mut e_max = Vec::with_capacity(cfg.n_users() + cfg.n_hd());
    let mut e_min = Vec::with_capacity(cfg.n_fd());
    for i in cfg.users() {
        let (ul, dl) = (LinkRef::uplink(i), LinkRef::downlink(i));
        if cfg.is_fd(i) {
            if rates[ul.index()] >= rates[dl.index()] {
                e_max.push(ul);
                e_min.push(dl);
            } else {
                e_max.push(dl);
                e_min.push(ul);
            }
        } else {
            e_max.push(ul);
            e_max.push(dl);
        }
    }
    Ok((e_max, e_min))
}

fn emax_clique(cfg: &NetworkConfig, arrivals: &ArrivalModel) -> Result<CliqueSpec> {
    cfg.check_len(arrivals.len())?;
    let rates: Vec<f64> = (0..arrivals.len()).map(|l| arrivals.mean(l)).collect();
    let (e_max, _) = emax_partition(cfg, &rates)?;
    Ok(CliqueSpec::from_arrivals(e_max, arrivals))
}

/// Scheduler-independent lower bound on the average per-link queue length.
pub fn fundamental_lb(cfg: &NetworkConfig, arrivals: &ArrivalModel) -> Result<f64> {
    let clique = emax_clique(cfg, arrivals)?;
    Ok(clique_lb(&clique)? / cfg.n_links() as f64)
}

/// Lower bound for the fixed-access H-GMS variants (longest or random DL).
pub fn hgms_lb(
    cfg: &NetworkConfig,
    arrivals: &ArrivalModel,
    alpha: &AccessDistribution,
    f: &WeightFunction,
) -> Result<f64> {
    if alpha.n_users() != cfg.n_users() {
        return Err(Error::AccessDistribution(format!(
            "{} user entries for a {}-user network",
            alpha.n_users(),
            cfg.n_users()
        )));
    }
    hgms_lb_with_alpha_max(cfg, arrivals, alpha.max_entry(), f)
}

/// The same bound with the largest access probability set to 1, which is
/// valid but loose for the adaptive variant.
pub fn hgms_lb_loose(
    cfg: &NetworkConfig,
    arrivals: &ArrivalModel,
    f: &WeightFunction,
) -> Result<f64> {
    hgms_lb_with_alpha_max(cfg, arrivals, 1.0, f)
}

fn hgms_lb_with_alpha_max(
    cfg: &NetworkConfig,
    arrivals: &ArrivalModel,
    alpha_max: f64,
    f: &WeightFunction,
) -> Result<f64> {
    let clique = emax_clique(cfg, arrivals)?;
    let fundamental = clique_lb(&clique)? / cfg.n_links() as f64;
    let lam_emax = clique.total_rate();
    let lam_min = (0..arrivals.len())
        .map(|l| arrivals.mean(l))
        .fold(f64::INFINITY, f64::min);
    let ratio = lam_min / alpha_max;
    let p = ratio / (1.0 - lam_emax + ratio);
    let q_min = match TxProb::new(p) {
        Ok(p) => tx_prob_inverse(f, p),
        // p == 0 when some link has no traffic: the inverse clamps to 0.
        Err(_) if p <= 0.0 => 0.0,
        Err(e) => return Err(e),
    };
    let prefactor = 1.0 - cfg.n_fd() as f64 / cfg.n_links() as f64;
    Ok(fundamental.max(prefactor * q_min))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{capacity_load, equal_rate_vector, RateVector};

    fn cfg(n_fd: usize, n_hd: usize) -> NetworkConfig {
        NetworkConfig::new(n_fd, n_hd).unwrap()
    }

    fn bern(c: &NetworkConfig, rho: f64) -> ArrivalModel {
        ArrivalModel::bernoulli(&equal_rate_vector(c, rho).unwrap())
    }

    #[test]
    fn clique_examples() {
        let single = CliqueSpec {
            links: vec![LinkRef::uplink(1)],
            rates: vec![0.5],
            variances: vec![0.25],
        };
        assert!((clique_lb(&single).unwrap() - 0.5).abs() < 1e-15);

        let zero = CliqueSpec {
            links: (1..=3).map(LinkRef::uplink).collect(),
            rates: vec![0.0; 3],
            variances: vec![0.0; 3],
        };
        assert_eq!(clique_lb(&zero).unwrap(), 0.0);

        let lam = 0.0475;
        let c = CliqueSpec {
            links: (0..20).map(LinkRef::from_index).collect(),
            rates: vec![lam; 20],
            variances: vec![lam * (1.0 - lam); 20],
        };
        let oracle = 20.0 * 0.0475 * (1.0 + 0.9525 - 0.95) / 0.1;
        assert!((clique_lb(&c).unwrap() - oracle).abs() < 1e-12);
        assert!((oracle - 9.52375).abs() < 1e-12);
    }

    #[test]
    fn saturated_clique_rejected() {
        let c = CliqueSpec {
            links: vec![LinkRef::uplink(1); 2],
            rates: vec![0.5, 0.5],
            variances: vec![0.25; 2],
        };
        assert_eq!(clique_lb(&c), Err(Error::SaturatedClique(1.0)));
    }

    #[test]
    fn partition_examples() {
        let c = cfg(0, 3);
        let (emax, emin) = emax_partition(&c, &[0.1; 6]).unwrap();
        assert_eq!(emax.len(), 6);
        assert!(emin.is_empty());

        let c = cfg(1, 1);
        let (emax, emin) = emax_partition(&c, &[0.2, 0.1, 0.05, 0.05]).unwrap();
        assert!(emax.contains(&LinkRef::uplink(1)));
        assert_eq!(emin, vec![LinkRef::downlink(1)]);
        let (emax, emin) = emax_partition(&c, &[0.1, 0.3, 0.05, 0.05]).unwrap();
        assert!(emax.contains(&LinkRef::downlink(1)));
        assert_eq!(emin, vec![LinkRef::uplink(1)]);

        let (emax, emin) = emax_partition(&c, &[0.1, 0.1, 0.05, 0.05]).unwrap();
        assert_eq!(emin, vec![LinkRef::downlink(1)]);
        assert_eq!(emax.len() + emin.len(), 4);
    }

    #[test]
    fn fundamental_examples() {
        let c = cfg(0, 10);
        let v = fundamental_lb(&c, &bern(&c, 0.95)).unwrap();
        assert!((v - 9.52375 / 20.0).abs() < 1e-12);
        assert_eq!(fundamental_lb(&c, &bern(&c, 0.0)).unwrap(), 0.0);

        let c = cfg(5, 5);
        let lam = 0.95 / 15.0;
        let oracle = 0.95 * (2.0 - 0.95 - lam) / (2.0 * 0.05 * 20.0);
        let v = fundamental_lb(&c, &bern(&c, 0.95)).unwrap();
        assert!((v - oracle).abs() < 1e-12);
        assert!((v - 0.4687).abs() < 1e-4);
    }

    #[test]
    fn hgms_example_dominates_fundamental() {
        let c = cfg(5, 5);
        let arr = bern(&c, 0.95);
        let alpha = AccessDistribution::uniform(10).unwrap();
        let v = hgms_lb(&c, &arr, &alpha, &WeightFunction::Log1p).unwrap();
        // Hand evaluation of the second branch.
        let a = (0.95 / 15.0) * 11.0;
        let ratio = a / (0.05 + a);
        let oracle = 0.75 * (2.0 * ratio - 1.0) / (1.0 - ratio);
        assert!((v - oracle).abs() < 1e-9, "{v} vs {oracle}");
        assert!((v - 9.70).abs() < 0.01);
        assert!(v > fundamental_lb(&c, &arr).unwrap());
    }

    #[test]
    fn hgms_low_load_reduces_to_fundamental() {
        let c = cfg(5, 5);
        let arr = bern(&c, 0.3);
        let alpha = AccessDistribution::uniform(10).unwrap();
        let v = hgms_lb(&c, &arr, &alpha, &WeightFunction::Log1p).unwrap();
        assert_eq!(v, fundamental_lb(&c, &arr).unwrap());
    }

    #[test]
    fn all_fd_prefactor_is_half() {
        let c = cfg(4, 0);
        let arr = bern(&c, 0.97);
        let alpha = AccessDistribution::uniform(4).unwrap();
        let v = hgms_lb(&c, &arr, &alpha, &WeightFunction::Linear).unwrap();
        let a: f64 = (0.97 / 4.0) * 5.0;
        let ratio = a / (1.0 - 0.97 + a);
        let q = (ratio / (1.0 - ratio)).ln();
        assert!((v - (0.5 * q).max(fundamental_lb(&c, &arr).unwrap())).abs() < 1e-12);
    }

    #[test]
    fn bounds_monotone_in_rho() {
        for (n_fd, n_hd) in [(0, 10), (5, 5), (10, 0), (3, 7)] {
            let c = cfg(n_fd, n_hd);
            let alpha = AccessDistribution::uniform(c.n_users()).unwrap();
            let mut prev = (0.0, 0.0);
            for k in 1..100 {
                let arr = bern(&c, k as f64 / 100.0);
                let fl = fundamental_lb(&c, &arr).unwrap();
                let hl = hgms_lb(&c, &arr, &alpha, &WeightFunction::Log1p).unwrap();
                assert!(hl >= fl);
                assert!(fl >= prev.0 && hl >= prev.1);
                prev = (fl, hl);
            }
        }
    }

    #[test]
    fn emax_rate_equals_capacity_load_for_equal_rates() {
        for (n_fd, n_hd) in [(0, 10), (5, 5), (10, 0), (2, 1)] {
            let c = cfg(n_fd, n_hd);
            for rho in [0.5, 0.9, 0.99, 0.999] {
                let lam = equal_rate_vector(&c, rho).unwrap();
                let clique = emax_clique(&c, &ArrivalModel::bernoulli(&lam)).unwrap();
                assert!((clique.total_rate() - capacity_load(&c, &lam).unwrap()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn saturation_propagates() {
        let c = cfg(5, 5);
        let arr = bern(&c, 1.01);
        assert!(matches!(
            fundamental_lb(&c, &arr),
            Err(Error::SaturatedClique(_))
        ));
        let alpha = AccessDistribution::uniform(10).unwrap();
        assert!(hgms_lb(&c, &arr, &alpha, &WeightFunction::Log1p).is_err());
    }

    #[test]
    fn loose_bound_is_below_fixed_alpha_bound() {
        let c = cfg(5, 5);
        let arr = bern(&c, 0.95);
        let alpha = AccessDistribution::uniform(10).unwrap();
        let tight = hgms_lb(&c, &arr, &alpha, &WeightFunction::Log1p).unwrap();
        let loose = hgms_lb_loose(&c, &arr, &WeightFunction::Log1p).unwrap();
        assert!(loose <= tight);
        assert!(loose >= fundamental_lb(&c, &arr).unwrap());
    }

    #[test]
    fn zero_rate_link_clamps_second_branch() {
        let c = cfg(1, 1);
        let lam = RateVector::new(vec![0.0, 0.3, 0.2, 0.2]).unwrap();
        let arr = ArrivalModel::bernoulli(&lam);
        let alpha = AccessDistribution::uniform(2).unwrap();
        assert_eq!(
            hgms_lb(&c, &arr, &alpha, &WeightFunction::Log1p).unwrap(),
            fundamental_lb(&c, &arr).unwrap()
        );
    }
}
