//! Random-access schedulers: the Q-CSMA baseline and the H-GMS family.
//!
//! All of them share one contention mechanic. When the previous slot was
//! idle an initiator link is chosen; the initiator then transmits with
//! probability `tx_prob(f, q)` and, if its owner is FD, drags the opposite
//! direction along. While the schedule stays nonempty the same initiator
//! keeps re-drawing its coin. A failed coin releases the channel.

use rand::Rng;

use super::access::{hgms_access_dist_e, Access, AccessDistribution};
use super::weight::{tx_prob, WeightFunction};
use crate::error::{Error, Result};
use crate::model::{LinkRef, NetworkConfig, QueueVector, Schedule};

/// Scheduler memory carried between slots.
#[derive(Debug, Clone, PartialEq)]
pub struct CsmaState {
    initiator: Option<LinkRef>,
    last_schedule: Schedule,
    ul_estimates: Option<Vec<u64>>,
}

impl CsmaState {
    pub fn new(cfg: &NetworkConfig) -> Self {
        CsmaState {
            initiator: None,
            last_schedule: Schedule::idle(cfg.n_links()),
            ul_estimates: None,
        }
    }

    /// State for the estimate-driven variant, with all uplink estimates at 0.
    pub fn with_estimates(cfg: &NetworkConfig) -> Self {
        CsmaState {
            ul_estimates: Some(vec![0; cfg.n_users()]),
            ..CsmaState::new(cfg)
        }
    }

    /// Resumes from an in-flight transmission.
    pub fn holding(cfg: &NetworkConfig, initiator: LinkRef) -> Self {
        CsmaState {
            initiator: Some(initiator),
            last_schedule: Schedule::activate(cfg, initiator),
            ul_estimates: None,
        }
    }

    pub fn initiator(&self) -> Option<LinkRef> {
        self.initiator
    }

    pub fn last_schedule(&self) -> &Schedule {
        &self.last_schedule
    }

    pub fn ul_estimates(&self) -> Option<&[u64]> {
        self.ul_estimates.as_deref()
    }

    /// Records uplink backlogs piggybacked on packets served in the last
    /// slot. `q` is the queue vector after that slot's service and arrivals.
    pub fn observe(&mut self, q: &QueueVector) {
        if let Some(est) = self.ul_estimates.as_mut() {
            for link in self.last_schedule.active_links() {
                if link.direction == crate::model::Direction::Uplink {
                    est[link.user - 1] = q.get(link);
                }
            }
        }
    }

    fn contend<R: Rng + ?Sized>(
        &mut self,
        initiator: LinkRef,
        q: &QueueVector,
        cfg: &NetworkConfig,
        f: &WeightFunction,
        rng: &mut R,
    ) -> Schedule {
        let p = tx_prob(f, q.get(initiator)).value();
        let transmit = rng.gen::<f64>() < p;
        if transmit {
            self.initiator = Some(initiator);
            self.last_schedule = Schedule::activate(cfg, initiator);
        } else {
            self.initiator = None;
            self.last_schedule = Schedule::idle(cfg.n_links());
        }
        self.last_schedule.clone()
    }
}

/// Fully distributed baseline in which all `2N` links contend. Every slot a
/// decision link is drawn uniformly. On an idle channel it activates with
/// probability `tx_prob`. On a busy channel only the current initiator, when
/// drawn, re-draws its coin; any other draw leaves the schedule unchanged.
pub fn qcsma_step<R: Rng + ?Sized>(
    state: &mut CsmaState,
    q: &QueueVector,
    cfg: &NetworkConfig,
    f: &WeightFunction,
    rng: &mut R,
) -> Schedule {
    let decision = LinkRef::from_index(rng.gen_range(0..cfg.n_links()));
    match state.initiator {
        Some(il) if il != decision => state.last_schedule.clone(),
        _ => state.contend(decision, q, cfg, f, rng),
    }
}

/// How the access point nominates its downlink and polls the initiator.
#[derive(Debug, Clone, PartialEq)]
pub enum HgmsVariant {
    /// Longest downlink, fixed access distribution.
    Longest(AccessDistribution),
    /// Uniformly random downlink, fixed access distribution.
    Random(AccessDistribution),
    /// Longest downlink, access distribution adapted from uplink estimates.
    Estimated { alpha_th: f64 },
}

impl HgmsVariant {
    pub(crate) fn validate(&self, cfg: &NetworkConfig) -> Result<()> {
        match self {
            HgmsVariant::Longest(a) | HgmsVariant::Random(a) => {
                if a.n_users() != cfg.n_users() {
                    return Err(Error::AccessDistribution(format!(
                        "{} user entries for a {}-user network",
                        a.n_users(),
                        cfg.n_users()
                    )));
                }
                Ok(())
            }
            HgmsVariant::Estimated { alpha_th } => {
                if *alpha_th > 0.0 && *alpha_th < 1.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!(
                        "alpha_th must lie in (0, 1), got {alpha_th}"
                    )))
                }
            }
        }
    }
}

/// User whose downlink is longest; lowest index wins ties.
pub fn longest_downlink(q: &QueueVector, cfg: &NetworkConfig) -> usize {
    let mut best = 1;
    let mut best_q = q.get(LinkRef::downlink(1));
    for i in 2..=cfg.n_users() {
        let v = q.get(LinkRef::downlink(i));
        if v > best_q {
            best = i;
            best_q = v;
        }
    }
    best
}

/// One slot of H-GMS (or a variant). Initiation happens only after an idle
/// slot; otherwise the previous initiator re-draws its transmission coin.
pub fn hgms_step<R: Rng + ?Sized>(
    state: &mut CsmaState,
    q: &QueueVector,
    cfg: &NetworkConfig,
    f: &WeightFunction,
    variant: &HgmsVariant,
    rng: &mut R,
) -> Result<Schedule> {
    variant.validate(cfg)?;
    cfg.check_len(q.len())?;
    if let Some(il) = state.initiator {
        return Ok(state.contend(il, q, cfg, f, rng));
    }
    let star = match variant {
        HgmsVariant::Random(_) => rng.gen_range(1..=cfg.n_users()),
        _ => longest_downlink(q, cfg),
    };
    let access = match variant {
        HgmsVariant::Longest(a) | HgmsVariant::Random(a) => a.sample(rng),
        HgmsVariant::Estimated { alpha_th } => {
            let est = state
                .ul_estimates
                .get_or_insert_with(|| vec![0; cfg.n_users()]);
            let alpha = hgms_access_dist_e(est, q.get(LinkRef::downlink(star)), *alpha_th)?;
            alpha.sample(rng)
        }
    };
    let initiator = match access {
        Access::User(i) => LinkRef::uplink(i),
        Access::AccessPoint => LinkRef::downlink(star),
    };
    Ok(state.contend(initiator, q, cfg, f, rng))
}
