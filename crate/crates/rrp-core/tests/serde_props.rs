//! Property tests: serialization round-trips are the identity on
//! structured instances, configurations and flow files.

use proptest::prelude::*;

use rrp_core::fileio::{
    parse_configuration, parse_flows, parse_instance, serialize_configuration, serialize_flows,
    serialize_instance,
};
use rrp_core::net::{
    Bound, Configuration, Demand, FlowPath, HybridNetwork, LinkRef, NodeSet, RRPInstance,
    RoutingPolicy, StaticLink, Switch, SwitchLink, Wiring, Workload,
};
use rrp_core::rational::Rat;

fn arb_rat() -> impl Strategy<Value = Rat> {
    (0i64..1000, 1i64..60).prop_map(|(n, d)| Rat::new(n.into(), d.into()))
}

fn arb_bound() -> impl Strategy<Value = Bound> {
    prop_oneof![Just(Bound::Infinite), (0u64..6).prop_map(Bound::Finite)]
}

prop_compose! {
    fn arb_instance()(
        n in 2u64..6,
        link_flags in prop::collection::vec(any::<bool>(), 15),
        weights in prop::collection::vec(arb_rat(), 15),
        wires in prop::collection::vec(0u64..6, 0..5),
        demand_flags in prop::collection::vec(any::<bool>(), 10),
        amounts in prop::collection::vec(arb_rat(), 10),
        mu in arb_rat(),
        kappa in arb_rat(),
        sigma in arb_bound(),
        delta in arb_bound(),
        lambda in arb_bound(),
    ) -> RRPInstance {
        let names: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
        let mut net = HybridNetwork::explicit(names);
        let mut t = 0;
        for u in 0..n {
            for v in u + 1..n {
                if link_flags[t % link_flags.len()] {
                    net.static_links.push(StaticLink {
                        u,
                        v,
                        weight: weights[t % weights.len()].clone(),
                    });
                }
                t += 1;
            }
        }
        let wired: Vec<u64> = wires.into_iter().map(|w| w % n).collect();
        if wired.len() >= 2 {
            net.switches.push(Switch { id: "sw".into(), ports: wired.len() as u64 });
            let mut ext = vec![0u64; n as usize];
            net.wiring = Wiring::Links(
                wired
                    .iter()
                    .enumerate()
                    .map(|(p, &v)| {
                        let e = ext[v as usize];
                        ext[v as usize] += 1;
                        SwitchLink { node: v, ext_port: e, switch: 0, sw_port: p as u64 }
                    })
                    .collect(),
            );
        }
        let mut demands = Vec::new();
        let mut t = 0;
        'outer: for u in 0..n {
            for v in 0..n {
                if u == v { continue; }
                if demand_flags[t % demand_flags.len()] {
                    let amount = amounts[t % amounts.len()].clone() + Rat::new(1.into(), 1.into());
                    demands.push(Demand { src: u, dst: v, amount });
                    if demands.len() >= 5 { break 'outer; }
                }
                t += 1;
            }
        }
        RRPInstance {
            network: net,
            mu,
            workload: Workload::new(demands),
            kappa,
            policy: RoutingPolicy { sigma, delta, lambda },
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn instance_round_trip_is_identity(inst in arb_instance()) {
        let text = serialize_instance(&inst);
        let back = parse_instance(&text).unwrap();
        prop_assert_eq!(back, inst);
    }

    #[test]
    fn config_and_flow_round_trips(inst in arb_instance(), pick in any::<u64>()) {
        if inst.network.switches.is_empty() {
            return Ok(());
        }
        // a small deterministic matching derived from `pick`
        let ports = inst.network.switches[0].ports;
        let mut matching = Vec::new();
        if ports >= 2 && pick % 2 == 0 {
            matching.push((0, ports - 1));
        }
        let cfg = Configuration::normalized(vec![matching]);
        let text = serialize_configuration(&cfg, &inst.network);
        prop_assert_eq!(parse_configuration(&text, &inst.network).unwrap(), cfg);

        if let Some(d) = inst.workload.demands.first() {
            let flows = vec![(
                (d.src, d.dst),
                FlowPath { src: d.src, dst: d.dst, links: vec![LinkRef::dynamic(d.src, d.dst)] },
            )];
            let text = serialize_flows(&flows, &inst.network);
            prop_assert_eq!(parse_flows(&text, &inst.network).unwrap(), flows);
        }
    }

    #[test]
    fn hypercube_instances_round_trip(dim in 1u32..12, mu in arb_rat()) {
        let mut net = HybridNetwork::hypercube(dim);
        net.switches.push(Switch { id: "s".into(), ports: 1u64 << dim });
        net.wiring = Wiring::UniformSingleSwitch { ports_per_node: 1 };
        let demands = if dim >= 1 {
            vec![Demand { src: 0, dst: (1 << dim) - 1, amount: Rat::new(3.into(), 2.into()) }]
        } else {
            Vec::new()
        };
        let inst = RRPInstance {
            network: net,
            mu,
            workload: Workload::new(demands),
            kappa: Rat::new(10.into(), 1.into()),
            policy: RoutingPolicy {
                sigma: Bound::Finite(3),
                delta: Bound::Infinite,
                lambda: Bound::Infinite,
            },
        };
        let text = serialize_instance(&inst);
        let back = parse_instance(&text).unwrap();
        prop_assert_eq!(&back, &inst);
        let is_implicit = matches!(back.network.nodes, NodeSet::Hypercube { .. });
        prop_assert!(is_implicit);
    }
}
