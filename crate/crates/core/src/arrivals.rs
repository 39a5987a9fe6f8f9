use rand::Rng;

use crate::error::{Error, Result};
use crate::model::RateVector;

/// Arrival process of one link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LinkArrival {
    /// One packet per slot with probability `p`.
    Bernoulli(f64),
    /// `batch` packets every `period` slots, starting in slot 1.
    DeterministicBatch { batch: u32, period: u32 },
}

impl LinkArrival {
    pub fn mean(&self) -> f64 {
        match *self {
            LinkArrival::Bernoulli(p) => p,
            LinkArrival::DeterministicBatch { batch, period } => batch as f64 / period as f64,
        }
    }

    /// Per-slot variance of the arrival count.
    pub fn variance(&self) -> f64 {
        match *self {
            LinkArrival::Bernoulli(p) => p * (1.0 - p),
            LinkArrival::DeterministicBatch { batch, period } => {
                let k = batch as f64;
                let t = period as f64;
                k * k / t - (k / t).powi(2)
            }
        }
    }

    pub fn a_max(&self) -> u64 {
        match *self {
            LinkArrival::Bernoulli(_) => 1,
            LinkArrival::DeterministicBatch { batch, .. } => u64::from(batch),
        }
    }
}

/// Per-link arrival processes.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrivalModel {
    links: Vec<LinkArrival>,
    // Bernoulli draws compare a raw 64-bit word against p * 2^64.
    thresholds: Vec<Option<u64>>,
}

fn bernoulli_threshold(p: f64) -> Option<u64> {
    if p >= 1.0 {
        None
    } else {
        Some((p * 2f64.powi(64)) as u64)
    }
}

impl ArrivalModel {
    pub fn new(links: Vec<LinkArrival>) -> Result<Self> {
        for (l, a) in links.iter().enumerate() {
            match *a {
                LinkArrival::Bernoulli(p) if !(0.0..=1.0).contains(&p) => {
                    return Err(Error::RateOutOfRange { link: l, value: p });
                }
                LinkArrival::DeterministicBatch { period: 0, .. } => {
                    return Err(Error::InvalidParameter(format!(
                        "link {l}: batch period is 0"
                    )));
                }
                _ => {}
            }
        }
        let thresholds = links
            .iter()
            .map(|a| match *a {
                LinkArrival::Bernoulli(p) => bernoulli_threshold(p),
                LinkArrival::DeterministicBatch { .. } => None,
            })
            .collect();
        Ok(ArrivalModel { links, thresholds })
    }

    /// Independent Bernoulli arrivals at the given rates.
    pub fn bernoulli(lam: &RateVector) -> Self {
        ArrivalModel::new(
            lam.as_slice()
                .iter()
                .map(|&p| LinkArrival::Bernoulli(p))
                .collect(),
        )
        .expect("rate vector entries lie in [0, 1]")
    }

    pub fn links(&self) -> &[LinkArrival] {
        &self.links
    }

    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }

    pub fn mean(&self, link: usize) -> f64 {
        self.links[link].mean()
    }

    pub fn variance(&self, link: usize) -> f64 {
        self.links[link].variance()
    }

    pub fn a_max(&self) -> u64 {
        self.links.iter().map(LinkArrival::a_max).max().unwrap_or(0)
    }

    pub fn rates(&self) -> RateVector {
        RateVector::new(
            self.links
                .iter()
                .map(LinkArrival::mean)
                .map(|m| m.min(1.0))
                .collect(),
        )
        .expect("means clamp into [0, 1]")
    }

    /// Draws slot-`t` arrivals (t >= 1) for every link in index order.
    pub fn sample_into<R: Rng + ?Sized>(&self, t: u64, rng: &mut R, out: &mut [u64]) {
        for (l, a) in self.links.iter().enumerate() {
            out[l] = match *a {
                LinkArrival::Bernoulli(p) => match self.thresholds[l] {
                    Some(th) => u64::from(rng.next_u64() < th),
                    None => {
                        debug_assert!(p >= 1.0);
                        rng.next_u64();
                        1
                    }
                },
                LinkArrival::DeterministicBatch { batch, period } => {
                    if (t - 1).is_multiple_of(u64::from(period)) {
                        u64::from(batch)
                    } else {
                        0
                    }
                }
            };
        }
    }
}
