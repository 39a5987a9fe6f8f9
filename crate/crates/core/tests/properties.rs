use approx::assert_relative_eq;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use hdfd_core::arrivals::ArrivalModel;
use hdfd_core::bounds::{fundamental_lb, hgms_lb};
use hdfd_core::model::{
    capacity_load, enumerate_schedules, equal_rate_vector, gamma_expansion, hd_capacity_load,
    is_feasible, queue_step, NetworkConfig, QueueVector, RateVector,
};
use hdfd_core::schedulers::{
    gms, mws, tx_prob, tx_prob_inverse, AccessDistribution, Scheduler, SchedulerName,
    WeightFunction,
};

fn network() -> impl Strategy<Value = NetworkConfig> {
    (0usize..5, 0usize..5)
        .prop_filter("at least one user", |(f, h)| f + h > 0)
        .prop_map(|(f, h)| NetworkConfig::new(f, h).unwrap())
}

fn network_and_queues(max_q: u64) -> impl Strategy<Value = (NetworkConfig, QueueVector)> {
    network().prop_flat_map(move |net| {
        prop::collection::vec(0..=max_q, net.n_links())
            .prop_map(move |q| (net, QueueVector::new(q)))
    })
}

proptest! {
    #[test]
    fn expansion_factor_between_one_and_two(
        (net, raw) in network().prop_flat_map(|n| (Just(n), prop::collection::vec(0.01f64..1.0, n.n_links())))
    ) {
        let lam = RateVector::new(raw).unwrap();
        let lam = lam.scaled(1.0 / hd_capacity_load(&net, &lam).unwrap()).unwrap();
        let g = gamma_expansion(&net, &lam).unwrap();
        prop_assert!((1.0 - 1e-12..=2.0 + 1e-12).contains(&g), "{g}");
    }

    #[test]
    fn all_hd_load_is_plain_sum(n in 1usize..8, seed in any::<u64>()) {
        let net = NetworkConfig::new(0, n).unwrap();
        let raw: Vec<f64> = (0..2 * n).map(|l| ((seed >> (l % 60)) & 0xff) as f64 / 2550.0).collect();
        let lam = RateVector::new(raw).unwrap();
        assert_relative_eq!(capacity_load(&net, &lam).unwrap(), hd_capacity_load(&net, &lam).unwrap());
    }

    #[test]
    fn queue_update_clamps_at_zero((net, q) in network_and_queues(5), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = gms(&q, &net, &mut rng);
        let a: Vec<u64> = (0..net.n_links()).map(|l| (seed >> l) & 1).collect();
        let next = queue_step(&q, &a, &x);
        for (l, &al) in a.iter().enumerate() {
            let served = u64::from(x.bits()[l]);
            prop_assert_eq!(next.as_slice()[l], (q.as_slice()[l] + al).saturating_sub(served));
        }
    }

    #[test]
    fn mws_dominates_gms_and_both_feasible((net, q) in network_and_queues(30), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = mws(&q, &net, &mut rng);
        let g = gms(&q, &net, &mut rng);
        prop_assert!(is_feasible(&net, &m).unwrap() && is_feasible(&net, &g).unwrap());
        prop_assert!(m.weight(&q) >= g.weight(&q));
        prop_assert!(enumerate_schedules(&net).iter().all(|x| x.weight(&q) <= m.weight(&q)));
    }

    #[test]
    fn distributed_schedules_stay_in_the_schedule_set((net, q) in network_and_queues(50), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let alpha = AccessDistribution::uniform(net.n_users()).unwrap();
        for name in SchedulerName::ALL {
            let mut s = Scheduler::new(net, name.with_params(&alpha, 0.01), WeightFunction::Sqrt).unwrap();
            for _ in 0..20 {
                let x = s.step(&q, &mut rng);
                prop_assert!(is_feasible(&net, &x).unwrap());
                s.observe(&q);
            }
        }
    }

    #[test]
    fn tx_prob_inverts(q in 0u64..1_000_000, k in 0usize..4) {
        let f = WeightFunction::from_name(["halflog", "log1p", "sqrt", "linear"][k]).unwrap();
        let back = tx_prob_inverse(&f, tx_prob(&f, q));
        prop_assert!((back - q as f64).abs() <= 1e-9 * (1.0 + q as f64), "{back} vs {q}");
    }

    #[test]
    fn bounds_grow_with_load(n_fd in 0usize..6, rho in 0.3f64..0.9) {
        let net = NetworkConfig::new(n_fd, 6 - n_fd).unwrap();
        let alpha = AccessDistribution::uniform(6).unwrap();
        let at = |r: f64| {
            let arr = ArrivalModel::bernoulli(&equal_rate_vector(&net, r).unwrap());
            (fundamental_lb(&net, &arr).unwrap(), hgms_lb(&net, &arr, &alpha, &WeightFunction::Log1p).unwrap())
        };
        let (f0, h0) = at(rho);
        let (f1, h1) = at(rho + 0.05);
        prop_assert!(f1 > f0 && h1 >= h0 && h0 >= f0);
    }
}
