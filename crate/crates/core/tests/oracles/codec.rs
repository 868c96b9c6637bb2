//! Mixed-radix and observation-layout checks.

use marketsched::env::{AgentAction, EnvConfig, JobType, PricingMode, SchedEnv};
use marketsched::obs::{
    encode_acceptor_obs, encode_full_obs, encode_offer_obs, encode_price_obs, encode_semi_acceptor_obs,
    encode_semi_offer_obs, mixed_radix_decode, mixed_radix_encode, Radices,
};
use marketsched::rng::{stream, Stream};
use rand::Rng;

/// Positional digits computed in 128-bit arithmetic, least significant first.
pub fn digits_oracle(index: u64, radices: &[u64]) -> Vec<u64> {
    let mut rest = u128::from(index);
    radices
        .iter()
        .map(|&r| {
            let d = rest % u128::from(r);
            rest /= u128::from(r);
            d as u64
        })
        .collect()
}

pub fn roundtrip(radices: &[u64], index: u64) -> Result<(), String> {
    let r = Radices::new(radices.to_vec()).map_err(|e| format!("{radices:?}: {e}"))?;
    let digits = mixed_radix_decode(index, &r).map_err(|e| format!("{radices:?} {index}: {e}"))?;
    if digits != digits_oracle(index, radices) {
        return Err(format!("radices {radices:?} index {index}: decoded {digits:?}"));
    }
    match mixed_radix_encode(&digits, &r) {
        Ok(i) if i == index => Ok(()),
        other => Err(format!("radices {radices:?} index {index}: re-encoded {other:?}")),
    }
}

/// Every index of every radix set with up to three dimensions of size 1..=4,
/// plus a few named sets. Returns the number of indices checked.
pub fn exhaustive_small() -> Result<u64, String> {
    let mut sets = vec![vec![3, 7], vec![3, 3, 3], vec![1], vec![2, 1, 5], vec![7, 7]];
    for a in 1..=4 {
        for b in 1..=4 {
            sets.push(vec![a, b]);
            for c in 1..=4 {
                sets.push(vec![a, b, c]);
            }
        }
    }
    let mut checked = 0;
    for radices in sets {
        let size: u64 = radices.iter().product();
        let r = Radices::new(radices.clone()).map_err(|e| e.to_string())?;
        if r.space_size() != Ok(size) {
            return Err(format!("{radices:?}: size {:?}, want {size}", r.space_size()));
        }
        for index in 0..size {
            roundtrip(&radices, index)?;
            checked += 1;
        }
        if mixed_radix_decode(size, &r).is_ok() {
            return Err(format!("{radices:?}: index {size} accepted"));
        }
    }
    Ok(checked)
}

/// `count` random radix sets whose product stays within 63 bits.
pub fn random_large(count: usize, seed: u64) -> Result<(), String> {
    let mut rng = stream(seed, Stream::Aux(3));
    for _ in 0..count {
        let mut radices = Vec::new();
        let mut size: u128 = 1;
        loop {
            let r = rng.random_range(1..=100_000u64);
            if size * u128::from(r) > i64::MAX as u128 || radices.len() >= 12 {
                break;
            }
            size *= u128::from(r);
            radices.push(r);
        }
        roundtrip(&radices, rng.random_range(0..size as u64))?;
        roundtrip(&radices, size as u64 - 1)?;
    }
    Ok(())
}

/// Every encoder on `count` random configurations after some random play:
/// lengths follow the layout formulas and values stay in [0, 1].
pub fn layouts(count: u64, seed: u64) -> Result<(), String> {
    let mut rng = stream(seed, Stream::Aux(4));
    for case in 0..count {
        let (n, m, k) = (rng.random_range(1..=5), rng.random_range(1..=5), rng.random_range(1..=4));
        let cfg = EnvConfig {
            num_agents: n,
            num_cores: m,
            num_slots: k,
            job_types: vec![
                JobType { id: 0, priority: rng.random_range(1..=9), burst: rng.random_range(1..=6), spawn_prob: 0.5 },
                JobType { id: 1, priority: rng.random_range(1..=9), burst: rng.random_range(1..=6), spawn_prob: 0.4 },
            ],
            pricing_mode: PricingMode::FreeCommercial,
            trading_enabled: true,
            guard_threshold: 1_000_000,
        };
        let mut env = SchedEnv::new(cfg, case).map_err(|e| e.to_string())?;
        for _ in 0..rng.random_range(0..30) {
            let actions: Vec<AgentAction> = (0..n)
                .map(|_| AgentAction {
                    accept: (0..m).map(|_| rng.random_range(0..3)).collect(),
                    offer: (0..k).map(|_| rng.random_range(0..=m)).collect(),
                    price: (0..k).map(|_| rng.random_range(0..10)).collect(),
                })
                .collect();
            env.step(&actions).map_err(|e| e.to_string())?;
        }
        let acceptor = 3 + 4 * n * k;
        let mut vectors = Vec::new();
        for a in 0..n {
            for c in 0..m {
                vectors.push(("acceptor", encode_acceptor_obs(&env, a, c).values, acceptor));
            }
            vectors.push(("semi acceptor", encode_semi_acceptor_obs(&env, a).values, m * acceptor));
            vectors.push(("semi offer", encode_semi_offer_obs(&env, a).values, 3 * m + 3 * k));
            vectors.push(("full", encode_full_obs(&env, a).values, m * acceptor + 3 * m + 3 * k));
            for s in 0..k {
                vectors.push(("offer", encode_offer_obs(&env, a, s).values, 3 * m + 3));
                vectors.push(("price", encode_price_obs(&env, a, s, rng.random_range(0..m)).values, 4));
            }
        }
        for (layout, v, len) in vectors {
            if v.len() != len {
                return Err(format!("case {case} N={n} M={m} K={k}: {layout} length {}, want {len}", v.len()));
            }
            if !v.iter().all(|x| (0.0..=1.0).contains(x)) {
                return Err(format!("case {case}: {layout} value outside [0, 1]"));
            }
        }
    }
    Ok(())
}
