//! Random connected networks for property and acceptance tests.

#![allow(dead_code)]

use gridledger::network::{Bus, Contract, Generator, Load, Network, TransmissionLine};
use gridledger::opf;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn draft(rng: &mut ChaCha8Rng) -> Network {
    let n = rng.gen_range(3..=20);
    let buses: Vec<Bus> = (0..n).map(|i| Bus { id: format!("b{i}"), name: String::new() }).collect();

    let mut pairs: Vec<(usize, usize)> = (1..n).map(|i| (rng.gen_range(0..i), i)).collect();
    for _ in 0..rng.gen_range(0..=n / 2) {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if a != b && !pairs.contains(&(a, b)) && !pairs.contains(&(b, a)) {
            pairs.push((a, b));
        }
    }

    // At least one clean and one emitting unit so that clean contracts and
    // emitting dispatch can both exist.
    let k = rng.gen_range(2..=10);
    let generators: Vec<Generator> = (0..k)
        .map(|j| {
            let clean = j == 0 || (j > 1 && rng.gen_bool(0.35));
            Generator {
                id: format!("g{j}"),
                bus: format!("b{}", rng.gen_range(0..n)),
                capacity: rng.gen_range(20.0..150.0),
                marginal_cost: rng.gen_range(5.0..80.0),
                emission_rate: if clean { 0.0 } else { rng.gen_range(0.3..1.1) },
            }
        })
        .collect();
    let clean_cap: f64 = generators.iter().filter(|g| g.emission_rate == 0.0).map(|g| g.capacity).sum();
    let dirty_cap: f64 = generators.iter().filter(|g| g.emission_rate > 0.0).map(|g| g.capacity).sum();
    // More load than clean capacity, so something emits.
    let total_load = clean_cap + rng.gen_range(0.1..0.6) * dirty_cap;

    let mut weights = Vec::new();
    for b in 0..n {
        if rng.gen_bool(0.6) {
            weights.push((b, rng.gen_range(0.2..1.0)));
        }
    }
    if weights.is_empty() {
        weights.push((rng.gen_range(0..n), 1.0));
    }
    let wsum: f64 = weights.iter().map(|w| w.1).sum();
    let loads: Vec<Load> = weights
        .iter()
        .map(|&(b, w)| Load { id: format!("d{b}"), bus: format!("b{b}"), demand: total_load * w / wsum })
        .collect();

    let lines = pairs
        .iter()
        .map(|&(a, b)| TransmissionLine {
            id: format!("b{a}-b{b}"),
            from_bus: format!("b{a}"),
            to_bus: format!("b{b}"),
            capacity: rng.gen_range(0.1..0.8) * total_load,
            reactance: rng.gen_range(0.5..2.0),
        })
        .collect();

    let biggest = loads.iter().max_by(|a, b| a.demand.total_cmp(&b.demand)).unwrap();
    let contracts = vec![Contract {
        load_bus: biggest.bus.clone(),
        generator: generators[0].id.clone(),
        contracted_energy: generators[0].capacity.min(biggest.demand) * rng.gen_range(0.3..0.9),
        contracted_emission_rate: 0.0,
    }];

    Network { buses, generators, loads, lines, contracts, ..Network::default() }
}

/// A feasible random network with 3-20 buses, 2-10 generators, emitting
/// dispatch and one clean contract. Tight line limits are relaxed until the
/// dispatch is feasible.
pub fn random_network(seed: u64) -> Network {
    let mut rng = rng(seed);
    let mut network = draft(&mut rng);
    for _ in 0..20 {
        match opf::solve_dcopf(&network) {
            Ok(_) => return network,
            Err(e) if e.is_infeasible() => {
                for l in &mut network.lines {
                    l.capacity *= 1.5;
                }
            }
            Err(e) => panic!("seed {seed}: {e}"),
        }
    }
    panic!("seed {seed}: could not make the network feasible");
}

/// Count of lines at their limit in the first period.
pub fn binding_lines(network: &Network) -> usize {
    let sol = opf::solve_dcopf(network).unwrap();
    network
        .lines
        .iter()
        .zip(&sol.flows[0])
        .filter(|(l, f)| l.capacity - f.abs() < 1e-6)
        .count()
}

/// Single-bus instance with up to five generators of distinct costs.
pub fn single_bus(seed: u64) -> Network {
    let mut rng = rng(seed);
    let k = rng.gen_range(1..=5);
    let mut costs: Vec<u32> = (1..=100).collect();
    costs.shuffle(&mut rng);
    let generators: Vec<Generator> = (0..k)
        .map(|j| Generator {
            id: format!("g{j}"),
            bus: "hub".into(),
            capacity: rng.gen_range(10.0..100.0),
            marginal_cost: costs[j] as f64,
            emission_rate: if rng.gen_bool(0.3) { 0.0 } else { rng.gen_range(0.2..1.2) },
        })
        .collect();
    let total: f64 = generators.iter().map(|g| g.capacity).sum();
    Network {
        buses: vec![Bus { id: "hub".into(), name: String::new() }],
        generators,
        loads: vec![Load { id: "load".into(), bus: "hub".into(), demand: rng.gen_range(0.05..0.95) * total }],
        ..Network::default()
    }
}

/// Fill generators in cost order until the load is met.
pub fn merit_order(network: &Network) -> Vec<f64> {
    let mut order: Vec<usize> = (0..network.generators.len()).collect();
    order.sort_by(|&a, &b| network.generators[a].marginal_cost.total_cmp(&network.generators[b].marginal_cost));
    let mut remaining: f64 = network.loads.iter().map(|l| l.demand).sum();
    let mut out = vec![0.0; network.generators.len()];
    for j in order {
        let take = remaining.min(network.generators[j].capacity);
        out[j] = take;
        remaining -= take;
    }
    out
}
