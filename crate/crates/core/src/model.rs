//! Network topology, link indexing, feasible schedules, queue dynamics and
//! capacity-region arithmetic for a collocated star network with one
//! full-duplex access point.
//!
//! Users are numbered `1..=N`. The first `n_fd` users are full-duplex (FD),
//! the rest are half-duplex (HD). Each user owns an uplink (UL) and a downlink
//! (DL); the UL of user `i` sits at flat index `2(i-1)` and the DL at
//! `2(i-1)+1`.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    Uplink,
    Downlink,
}

impl Direction {
    pub fn opposite(self) -> Self {
        match self {
            Direction::Uplink => Direction::Downlink,
            Direction::Downlink => Direction::Uplink,
        }
    }

    fn offset(self) -> usize {
        match self {
            Direction::Uplink => 0,
            Direction::Downlink => 1,
        }
    }
}

/// A directed link between a user (1-based) and the access point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinkRef {
    pub user: usize,
    pub direction: Direction,
}

impl LinkRef {
    pub fn uplink(user: usize) -> Self {
        LinkRef {
            user,
            direction: Direction::Uplink,
        }
    }

    pub fn downlink(user: usize) -> Self {
        LinkRef {
            user,
            direction: Direction::Downlink,
        }
    }

    /// The other link of the same user.
    pub fn counterpart(self) -> Self {
        LinkRef {
            user: self.user,
            direction: self.direction.opposite(),
        }
    }

    /// Flat index into per-link vectors. Does not check the user bound.
    pub fn index(self) -> usize {
        2 * (self.user - 1) + self.direction.offset()
    }

    pub fn from_index(index: usize) -> Self {
        let direction = if index.is_multiple_of(2) {
            Direction::Uplink
        } else {
            Direction::Downlink
        };
        LinkRef {
            user: index / 2 + 1,
            direction,
        }
    }
}

impl fmt::Display for LinkRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.direction {
            Direction::Uplink => write!(f, "UL{}", self.user),
            Direction::Downlink => write!(f, "DL{}", self.user),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NetworkConfig {
    n_fd: usize,
    n_hd: usize,
}

impl NetworkConfig {
    pub fn new(n_fd: usize, n_hd: usize) -> Result<Self> {
        if n_fd + n_hd == 0 {
            return Err(Error::EmptyNetwork);
        }
        Ok(NetworkConfig { n_fd, n_hd })
    }

    pub fn n_fd(&self) -> usize {
        self.n_fd
    }

    pub fn n_hd(&self) -> usize {
        self.n_hd
    }

    pub fn n_users(&self) -> usize {
        self.n_fd + self.n_hd
    }

    pub fn n_links(&self) -> usize {
        2 * self.n_users()
    }

    pub fn is_fd(&self, user: usize) -> bool {
        user >= 1 && user <= self.n_fd
    }

    pub fn fd_users(&self) -> std::ops::RangeInclusive<usize> {
        1..=self.n_fd
    }

    pub fn hd_users(&self) -> std::ops::RangeInclusive<usize> {
        self.n_fd + 1..=self.n_users()
    }

    pub fn users(&self) -> std::ops::RangeInclusive<usize> {
        1..=self.n_users()
    }

    pub fn link_index(&self, link: LinkRef) -> Result<usize> {
        self.check_user(link.user)?;
        Ok(link.index())
    }

    pub fn check_user(&self, user: usize) -> Result<()> {
        if user == 0 || user > self.n_users() {
            return Err(Error::UserOutOfRange {
                user,
                n: self.n_users(),
            });
        }
        Ok(())
    }

    pub(crate) fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n_links() {
            return Err(Error::Dimension {
                expected: self.n_links(),
                actual: len,
            });
        }
        Ok(())
    }
}

/// Per-link arrival rates in packets per slot.
#[derive(Debug, Clone, PartialEq)]
pub struct RateVector(Vec<f64>);

impl RateVector {
    /// Accepts any vector with entries in `[0, 1]`. Loads outside the
    /// capacity region are allowed.
    pub fn new(rates: Vec<f64>) -> Result<Self> {
        for (link, &value) in rates.iter().enumerate() {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::RateOutOfRange { link, value });
            }
        }
        Ok(RateVector(rates))
    }

    pub fn zeros(len: usize) -> Self {
        RateVector(vec![0.0; len])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, link: LinkRef) -> f64 {
        self.0[link.index()]
    }

    /// Multiplies every entry by `factor`, re-checking the `[0, 1]` bound.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        RateVector::new(self.0.iter().map(|r| r * factor).collect())
    }
}

/// Per-link backlogs in packets.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QueueVector(Vec<u64>);

impl QueueVector {
    pub fn new(q: Vec<u64>) -> Self {
        QueueVector(q)
    }

    pub fn zeros(len: usize) -> Self {
        QueueVector(vec![0; len])
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, link: LinkRef) -> u64 {
        self.0[link.index()]
    }

    pub fn total(&self) -> u64 {
        self.0.iter().sum()
    }

    /// In-place form of [`queue_step`]. Returns per-link departures through
    /// `served` (a link that was scheduled with an empty backlog serves 0).
    pub fn apply(&mut self, arrivals: &[u64], x: &Schedule, served: &mut [u64]) {
        for (l, q) in self.0.iter_mut().enumerate() {
            let avail = *q + arrivals[l];
            let s = u64::from(x.0[l]).min(avail);
            served[l] += s;
            *q = avail - s;
        }
    }
}

/// An activation vector over all `2N` links. Holds arbitrary bits so that
/// infeasible vectors can be represented and rejected by [`is_feasible`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Schedule(Vec<bool>);

impl Schedule {
    pub fn from_bits(bits: Vec<bool>) -> Self {
        Schedule(bits)
    }

    pub fn idle(n_links: usize) -> Self {
        Schedule(vec![false; n_links])
    }

    pub fn single(n_links: usize, link: LinkRef) -> Self {
        let mut s = Schedule::idle(n_links);
        s.0[link.index()] = true;
        s
    }

    pub fn pair(n_links: usize, user: usize) -> Self {
        let mut s = Schedule::idle(n_links);
        s.0[LinkRef::uplink(user).index()] = true;
        s.0[LinkRef::downlink(user).index()] = true;
        s
    }

    /// Activates `link`, plus its counterpart when the owner is FD.
    pub fn activate(cfg: &NetworkConfig, link: LinkRef) -> Self {
        if cfg.is_fd(link.user) {
            Schedule::pair(cfg.n_links(), link.user)
        } else {
            Schedule::single(cfg.n_links(), link)
        }
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        !self.0.iter().any(|&b| b)
    }

    pub fn is_active(&self, link: LinkRef) -> bool {
        self.0[link.index()]
    }

    pub fn active_links(&self) -> impl Iterator<Item = LinkRef> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| LinkRef::from_index(i))
    }

    /// Total queue weight `sum_l x_l q_l`.
    pub fn weight(&self, q: &QueueVector) -> u64 {
        self.0
            .iter()
            .zip(q.as_slice())
            .filter(|(&b, _)| b)
            .map(|(_, &w)| w)
            .sum()
    }
}

/// Every member of the feasible set: the empty schedule, each single link,
/// and the UL/DL pair of each FD user. Cardinality `1 + 2N + N_F`.
pub fn enumerate_schedules(cfg: &NetworkConfig) -> Vec<Schedule> {
    let n = cfg.n_links();
    let mut out = Vec::with_capacity(1 + n + cfg.n_fd());
    out.push(Schedule::idle(n));
    out.extend((0..n).map(|l| Schedule::single(n, LinkRef::from_index(l))));
    out.extend(cfg.fd_users().map(|u| Schedule::pair(n, u)));
    out
}

pub fn is_feasible(cfg: &NetworkConfig, x: &Schedule) -> Result<bool> {
    cfg.check_len(x.len())?;
    let mut active = x.active_links();
    let first = match active.next() {
        None => return Ok(true),
        Some(l) => l,
    };
    match (active.next(), active.next()) {
        (None, _) => Ok(true),
        (Some(second), None) => Ok(second == first.counterpart() && cfg.is_fd(first.user)),
        _ => Ok(false),
    }
}

/// One slot of queue evolution: `q' = max(0, q + a - x)` per link.
pub fn queue_step(q: &QueueVector, a: &[u64], x: &Schedule) -> QueueVector {
    let next = q
        .as_slice()
        .iter()
        .zip(a)
        .zip(x.bits())
        .map(|((&q, &a), &x)| (q + a).saturating_sub(u64::from(x)))
        .collect();
    QueueVector(next)
}

/// Left-hand side of the HD-FD capacity constraint:
/// `sum_{FD} max(ul, dl) + sum_{HD} (ul + dl)`. The rate vector lies in the
/// HD-FD capacity region iff this is at most 1.
pub fn capacity_load(cfg: &NetworkConfig, lam: &RateVector) -> Result<f64> {
    cfg.check_len(lam.len())?;
    let fd: f64 = cfg
        .fd_users()
        .map(|i| {
            lam.get(LinkRef::uplink(i))
                .max(lam.get(LinkRef::downlink(i)))
        })
        .sum();
    let hd: f64 = cfg
        .hd_users()
        .map(|i| lam.get(LinkRef::uplink(i)) + lam.get(LinkRef::downlink(i)))
        .sum();
    Ok(fd + hd)
}

/// Load against the all-HD benchmark region: the plain sum of link rates.
pub fn hd_capacity_load(cfg: &NetworkConfig, lam: &RateVector) -> Result<f64> {
    cfg.check_len(lam.len())?;
    Ok(lam.as_slice().iter().sum())
}

/// Capacity-region expansion factor at `lam0`, the largest scaling that keeps
/// `lam0` inside the HD-FD region. The region has a single linear constraint
/// so the supremum is `1 / capacity_load`.
pub fn gamma_expansion(cfg: &NetworkConfig, lam0: &RateVector) -> Result<f64> {
    let load = capacity_load(cfg, lam0)?;
    if load <= 0.0 {
        return Err(Error::ZeroLoad);
    }
    Ok(1.0 / load)
}

/// Every link gets `rho / (N_F + 2 N_H)`, so the capacity load equals `rho`.
pub fn equal_rate_vector(cfg: &NetworkConfig, rho: f64) -> Result<RateVector> {
    sigma_rate_vector(cfg, 1.0, rho)
}

/// FD links get `rho * sigma / (sigma N_F + 2 N_H)` and HD links
/// `rho / (sigma N_F + 2 N_H)`.
pub fn sigma_rate_vector(cfg: &NetworkConfig, sigma: f64, rho: f64) -> Result<RateVector> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "sigma must be positive, got {sigma}"
        )));
    }
    if !(rho >= 0.0 && rho.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "rho must be nonnegative, got {rho}"
        )));
    }
    let denom = sigma * cfg.n_fd() as f64 + 2.0 * cfg.n_hd() as f64;
    let v_f = rho * sigma / denom;
    let v_h = rho / denom;
    let rates = (0..cfg.n_links())
        .map(|l| {
            if cfg.is_fd(LinkRef::from_index(l).user) {
                v_f
            } else {
                v_h
            }
        })
        .collect();
    RateVector::new(rates)
}
