//! Scheduling policies for the collocated HD-FD network.

mod access;
mod centralized;
mod csma;
mod weight;

use std::fmt;
use std::str::FromStr;

use rand::Rng;

pub use access::{emulated_polling, hgms_access_dist_e, Access, AccessDistribution};
pub use centralized::{gms, mws};
pub use csma::{hgms_step, longest_downlink, qcsma_step, CsmaState, HgmsVariant};
pub use weight::{tx_prob, tx_prob_inverse, weight_eval, CustomWeight, TxProb, WeightFunction};

use crate::error::{Error, Result};
use crate::model::{NetworkConfig, QueueVector, Schedule};

/// Scheduler identity plus whatever configuration the variant needs.
#[derive(Debug, Clone, PartialEq)]
pub enum SchedulerKind {
    Mws,
    Gms,
    QCsma,
    Hgms(AccessDistribution),
    HgmsR(AccessDistribution),
    HgmsE { alpha_th: f64 },
}

/// Scheduler identity without parameters, used for names and parsing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SchedulerName {
    Mws,
    Gms,
    QCsma,
    Hgms,
    HgmsR,
    HgmsE,
}

impl SchedulerName {
    pub const ALL: [SchedulerName; 6] = [
        SchedulerName::Mws,
        SchedulerName::Gms,
        SchedulerName::QCsma,
        SchedulerName::Hgms,
        SchedulerName::HgmsR,
        SchedulerName::HgmsE,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SchedulerName::Mws => "MWS",
            SchedulerName::Gms => "GMS",
            SchedulerName::QCsma => "Q-CSMA",
            SchedulerName::Hgms => "H-GMS",
            SchedulerName::HgmsR => "H-GMS-R",
            SchedulerName::HgmsE => "H-GMS-E",
        }
    }

    /// Builds the kind with the given access distribution (fixed variants)
    /// and floor (adaptive variant).
    pub fn with_params(self, alpha: &AccessDistribution, alpha_th: f64) -> SchedulerKind {
        match self {
            SchedulerName::Mws => SchedulerKind::Mws,
            SchedulerName::Gms => SchedulerKind::Gms,
            SchedulerName::QCsma => SchedulerKind::QCsma,
            SchedulerName::Hgms => SchedulerKind::Hgms(alpha.clone()),
            SchedulerName::HgmsR => SchedulerKind::HgmsR(alpha.clone()),
            SchedulerName::HgmsE => SchedulerKind::HgmsE { alpha_th },
        }
    }
}

impl fmt::Display for SchedulerName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SchedulerName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_uppercase();
        SchedulerName::ALL
            .into_iter()
            .find(|n| n.as_str().replace('-', "") == norm)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown scheduler '{s}'")))
    }
}

impl SchedulerKind {
    pub fn name(&self) -> SchedulerName {
        match self {
            SchedulerKind::Mws => SchedulerName::Mws,
            SchedulerKind::Gms => SchedulerName::Gms,
            SchedulerKind::QCsma => SchedulerName::QCsma,
            SchedulerKind::Hgms(_) => SchedulerName::Hgms,
            SchedulerKind::HgmsR(_) => SchedulerName::HgmsR,
            SchedulerKind::HgmsE { .. } => SchedulerName::HgmsE,
        }
    }

    fn variant(&self) -> Option<HgmsVariant> {
        match self {
            SchedulerKind::Hgms(a) => Some(HgmsVariant::Longest(a.clone())),
            SchedulerKind::HgmsR(a) => Some(HgmsVariant::Random(a.clone())),
            SchedulerKind::HgmsE { alpha_th } => Some(HgmsVariant::Estimated {
                alpha_th: *alpha_th,
            }),
            _ => None,
        }
    }
}

/// A scheduler instance with its per-run state.
#[derive(Debug, Clone)]
pub struct Scheduler {
    cfg: NetworkConfig,
    kind: SchedulerKind,
    variant: Option<HgmsVariant>,
    weight: WeightFunction,
    state: CsmaState,
}

impl Scheduler {
    pub fn new(cfg: NetworkConfig, kind: SchedulerKind, weight: WeightFunction) -> Result<Self> {
        let variant = kind.variant();
        if let Some(v) = &variant {
            v.validate(&cfg)?;
        }
        let state = match kind {
            SchedulerKind::HgmsE { .. } => CsmaState::with_estimates(&cfg),
            _ => CsmaState::new(&cfg),
        };
        Ok(Scheduler {
            cfg,
            kind,
            variant,
            weight,
            state,
        })
    }

    pub fn kind(&self) -> &SchedulerKind {
        &self.kind
    }

    pub fn state(&self) -> &CsmaState {
        &self.state
    }

    /// Decides the schedule for the coming slot from beginning-of-slot queues.
    pub fn step<R: Rng + ?Sized>(&mut self, q: &QueueVector, rng: &mut R) -> Schedule {
        match &self.kind {
            SchedulerKind::Mws => mws(q, &self.cfg, rng),
            SchedulerKind::Gms => gms(q, &self.cfg, rng),
            SchedulerKind::QCsma => qcsma_step(&mut self.state, q, &self.cfg, &self.weight, rng),
            _ => {
                let variant = self
                    .variant
                    .as_ref()
                    .expect("csma variant set at construction");
                hgms_step(&mut self.state, q, &self.cfg, &self.weight, variant, rng)
                    .expect("variant validated at construction")
            }
        }
    }

    /// Feeds back end-of-slot queues (uplink estimate refresh).
    pub fn observe(&mut self, q: &QueueVector) {
        self.state.observe(q);
    }
}
