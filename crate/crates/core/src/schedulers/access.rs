use rand::Rng;

use crate::error::{Error, Result};

const SUM_TOLERANCE: f64 = 1e-12;

/// Polling probabilities over the `N` uplinks and the access point's
/// nominated downlink.
#[derive(Debug, Clone, PartialEq)]
pub struct AccessDistribution {
    alpha_user: Vec<f64>,
    alpha_ap: f64,
}

/// Outcome of an access draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Access {
    /// Uplink of this (1-based) user.
    User(usize),
    AccessPoint,
}

impl AccessDistribution {
    /// Builds the distribution with `alpha_ap = 1 - sum(alpha_user)`.
    pub fn new(alpha_user: Vec<f64>) -> Result<Self> {
        let alpha_ap = 1.0 - alpha_user.iter().sum::<f64>();
        Self::from_parts(alpha_user, alpha_ap)
    }

    pub fn from_parts(alpha_user: Vec<f64>, alpha_ap: f64) -> Result<Self> {
        if alpha_user.is_empty() {
            return Err(Error::AccessDistribution("no users".into()));
        }
        if let Some((i, a)) = alpha_user
            .iter()
            .enumerate()
            .find(|(_, a)| !(a.is_finite() && **a > 0.0))
        {
            return Err(Error::AccessDistribution(format!(
                "user {} has nonpositive access probability {a}",
                i + 1
            )));
        }
        if !(alpha_ap.is_finite() && alpha_ap > 0.0) {
            return Err(Error::AccessDistribution(format!(
                "access point probability {alpha_ap} is not positive"
            )));
        }
        let total = alpha_user.iter().sum::<f64>() + alpha_ap;
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::AccessDistribution(format!(
                "probabilities sum to {total}"
            )));
        }
        Ok(AccessDistribution {
            alpha_user,
            alpha_ap,
        })
    }

    /// `1/(N+1)` for every user and for the access point.
    pub fn uniform(n_users: usize) -> Result<Self> {
        let a = 1.0 / (n_users as f64 + 1.0);
        Self::from_parts(vec![a; n_users], a)
    }

    pub fn n_users(&self) -> usize {
        self.alpha_user.len()
    }

    pub fn alpha_user(&self) -> &[f64] {
        &self.alpha_user
    }

    pub fn alpha_ap(&self) -> f64 {
        self.alpha_ap
    }

    pub fn max_entry(&self) -> f64 {
        self.alpha_user
            .iter()
            .copied()
            .fold(self.alpha_ap, f64::max)
    }

    /// Inverse-CDF draw using one uniform variate.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Access {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (i, a) in self.alpha_user.iter().enumerate() {
            acc += a;
            if u < acc {
                return Access::User(i + 1);
            }
        }
        Access::AccessPoint
    }
}

/// Adaptive access distribution driven by uplink queue estimates and the
/// nominated downlink backlog, floored at `alpha_th` before normalisation.
pub fn hgms_access_dist_e(
    ul_estimates: &[u64],
    q_dl_star: u64,
    alpha_th: f64,
) -> Result<AccessDistribution> {
    if !(alpha_th > 0.0 && alpha_th < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha_th must lie in (0, 1), got {alpha_th}"
        )));
    }
    let denom = ul_estimates.iter().sum::<u64>() + q_dl_star;
    let share = |v: u64| {
        if denom == 0 {
            alpha_th
        } else {
            (v as f64 / denom as f64).max(alpha_th)
        }
    };
    let raw_user: Vec<f64> = ul_estimates.iter().map(|&v| share(v)).collect();
    let raw_ap = share(q_dl_star);
    let total = raw_user.iter().sum::<f64>() + raw_ap;
    let alpha_user: Vec<f64> = raw_user.iter().map(|a| a / total).collect();
    let alpha_ap = 1.0 - alpha_user.iter().sum::<f64>();
    AccessDistribution::from_parts(alpha_user, alpha_ap)
}

/// Probability map of the collision-based distributed initiation: user `i`
/// wins iff it alone sends an initiation message, otherwise the access
/// point's downlink initiates.
pub fn emulated_polling(alpha: &AccessDistribution) -> Result<AccessDistribution> {
    let a = alpha.alpha_user();
    let won: Vec<f64> = (0..a.len())
        .map(|i| {
            a[i] * a
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, x)| 1.0 - x)
                .product::<f64>()
        })
        .collect();
    AccessDistribution::new(won)
}
