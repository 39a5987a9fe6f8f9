use rand::Rng;

use crate::model::{LinkRef, NetworkConfig, QueueVector, Schedule};

/// Max-weight schedule over the feasible set; ties are broken uniformly
/// among all maximisers (including the empty schedule when every queue is 0).
pub fn mws<R: Rng + ?Sized>(q: &QueueVector, cfg: &NetworkConfig, rng: &mut R) -> Schedule {
    let n = cfg.n_links();
    let qs = q.as_slice();
    // Candidate encoding: 0 = idle, 1..=n single link l-1, n+1.. FD pair.
    let weight = |c: usize| -> u64 {
        match c {
            0 => 0,
            c if c <= n => qs[c - 1],
            c => {
                let user = c - n;
                qs[LinkRef::uplink(user).index()] + qs[LinkRef::downlink(user).index()]
            }
        }
    };
    let candidates = 1 + n + cfg.n_fd();
    let best = (0..candidates).map(weight).max().unwrap_or(0);
    let ties = (0..candidates).filter(|&c| weight(c) == best).count();
    let pick = if ties > 1 { rng.gen_range(0..ties) } else { 0 };
    let chosen = (0..candidates)
        .filter(|&c| weight(c) == best)
        .nth(pick)
        .unwrap_or(0);
    match chosen {
        0 => Schedule::idle(n),
        c if c <= n => Schedule::single(n, LinkRef::from_index(c - 1)),
        c => Schedule::pair(n, c - n),
    }
}

/// Greedy maximal schedule: serve a longest queue (uniform tie-break),
/// pairing both directions when its owner is full-duplex.
pub fn gms<R: Rng + ?Sized>(q: &QueueVector, cfg: &NetworkConfig, rng: &mut R) -> Schedule {
    let qs = q.as_slice();
    let best = qs.iter().copied().max().unwrap_or(0);
    let ties = qs.iter().filter(|&&v| v == best).count();
    let pick = if ties > 1 { rng.gen_range(0..ties) } else { 0 };
    let star = qs
        .iter()
        .enumerate()
        .filter(|(_, &v)| v == best)
        .nth(pick)
        .map(|(l, _)| l)
        .unwrap_or(0);
    Schedule::activate(cfg, LinkRef::from_index(star))
}
