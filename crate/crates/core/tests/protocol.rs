mod common;

use std::collections::BTreeMap;

use bearing_rigidity::controller::{
    build_subframeworks, evaluate, rigidity_grad, ControllerParams, Gains, LocalSubframework, Nu, SubframeworkTerms,
};
use bearing_rigidity::protocol::{
    communication_cost, distributed_rigidity_grad, distributed_rigidity_grad_frozen, metrics, run_round, Routing,
};
use bearing_rigidity::sensing::WeightSupport;
use bearing_rigidity::sensing::{undirected_sensing, RobotState};
use bearing_rigidity::{decompose, Decomposition, Execution, Framework, Graph, Point, Radius, DEFAULT_TOL};
use common::*;
use nalgebra::DVector;
use rand::Rng;

fn dummy_states(n: usize) -> Vec<RobotState> {
    (0..n)
        .map(|i| RobotState::new(DVector::from_vec(vec![i as f64, 0.0]), 0.0, 1.0, 0.5))
        .collect()
}

fn echo_compute(
    dec: &Decomposition,
) -> impl Fn(usize, usize, &BTreeMap<usize, RobotState>) -> bearing_rigidity::Result<SubframeworkTerms> + '_ {
    move |j, _, _| {
        let members = dec.balls[j].clone().unwrap();
        let nu = members
            .iter()
            .map(|&l| Nu { position: DVector::from_vec(vec![j as f64, l as f64]), yaw: 0.0 })
            .collect();
        Ok(SubframeworkTerms { center: j, members, eigenvalues: vec![], cost: 0.0, nu })
    }
}

fn brute_force_cost(g: &Graph, dec: &Decomposition) -> Vec<usize> {
    let dist = g.distances();
    let n = g.vertex_count();
    let d = |a: usize, b: usize| dist.get(a, b).unwrap();
    (0..n)
        .map(|i| {
            let mut c = 0;
            for l in 0..n {
                if d(l, i) < dec.q[l] {
                    c += 1;
                }
            }
            for j in 0..n {
                let Some(r) = dec.r_star[j].finite() else { continue };
                for l in 0..n {
                    if d(j, i) < d(j, l) && d(j, l) <= r {
                        c += 1;
                    }
                }
            }
            c
        })
        .collect()
}

#[test]
fn triangle_message_log() {
    let g = Graph::complete(3);
    let dec = Decomposition::from_radii(&g, vec![Radius::Finite(1); 3]);
    let res = run_round(&g, &dec, &dummy_states(3), echo_compute(&dec)).unwrap();
    assert_eq!(res.log.len(), 9);
    let states: Vec<_> = res.log.iter().filter(|e| e.kind == "state").collect();
    assert_eq!(states.len(), 3);
    assert!(states.iter().all(|e| e.tick == 1 && e.hops_remaining == 1 && e.receiver.is_none()));
    let nus: Vec<_> = res.log.iter().filter(|e| e.kind == "nu").collect();
    assert_eq!(nus.len(), 6);
    assert!(nus.iter().all(|e| e.tick == 2 && e.hops_remaining == 1 && e.receiver.is_some()));
    assert_eq!(res.ticks, 2);
    for i in 0..3 {
        let centers: Vec<usize> = res.delivered[i].iter().map(|(c, _)| *c).collect();
        assert_eq!(centers, vec![0, 1, 2]);
    }
}

#[test]
fn five_path_cost_by_enumeration() {
    let g = Graph::path(5);
    let radii = vec![Radius::Finite(1), Radius::Finite(1), Radius::Finite(2), Radius::Finite(1), Radius::Finite(1)];
    let dec = Decomposition::from_radii(&g, radii);
    let brute = brute_force_cost(&g, &dec);
    assert_eq!(communication_cost(&g, &dec), brute);
    let res = run_round(&g, &dec, &dummy_states(5), echo_compute(&dec)).unwrap();
    assert_eq!(res.transmissions, brute);
    assert_eq!(res.completion[&2], 4);
}

#[test]
fn random_radii_accounting() {
    let mut r = rng(61);
    for _ in 0..60 {
        let n = r.random_range(3..12);
        let g = random_connected_graph(&mut r, n, 0.2);
        let radii: Vec<Radius> = (0..n)
            .map(|_| if r.random::<f64>() < 0.15 { Radius::Infinite } else { Radius::Finite(r.random_range(1..4)) })
            .collect();
        let dec = Decomposition::from_radii(&g, radii);
        let brute = brute_force_cost(&g, &dec);
        assert_eq!(communication_cost(&g, &dec), brute);
        let res = run_round(&g, &dec, &dummy_states(n), echo_compute(&dec)).unwrap();
        assert_eq!(res.transmissions, brute);
        let dist = g.distances();
        for (i, held) in res.received_states.iter().enumerate() {
            for l in 0..n {
                assert_eq!(held.contains_key(&l), dist.get(l, i).unwrap() <= dec.q[l]);
            }
        }
        for (j, ball) in dec.balls.iter().enumerate() {
            let Some(ball) = ball else { continue };
            let reach = ball.iter().map(|&l| dist.get(j, l).unwrap()).max().unwrap();
            assert_eq!(res.completion[&j], 2 * reach);
            for &l in ball {
                assert_eq!(res.delivered[l].iter().filter(|(c, _)| *c == j).count(), 1);
            }
        }
    }
}

fn params() -> ControllerParams {
    ControllerParams { gains: Gains { lambda0: 1e-12, ..Gains::default() }, ..ControllerParams::default() }
}

#[test]
fn protocol_matches_centralized_gradient() {
    let mut r = rng(62);
    let mut done = 0;
    while done < 30 {
        let n = r.random_range(5..13);
        let states = random_states(&mut r, n, 3, 25.0, 20.0);
        let g = undirected_sensing(&states).unwrap();
        let pos: Vec<Point> = states.iter().map(|s| s.p.clone()).collect();
        let Ok(f) = Framework::new(g.clone(), 3, pos) else { continue };
        let Ok(dec) = decompose(&f, DEFAULT_TOL) else { continue };
        if !dec.r_star.iter().any(|x| x.is_finite()) {
            continue;
        }
        let p = params();
        let subs = build_subframeworks(&states, &dec.r_star, p.weight_support, p.comm_range);
        let Ok(central) = rigidity_grad(&subs, &states, &p.weights, p.gains.lambda0, Execution::default()) else {
            continue;
        };
        let (dist_grad, round) = distributed_rigidity_grad(&states, &dec.r_star, &p, Routing::Sensing).unwrap();
        assert_eq!(dist_grad, central);
        let map = central.nu_map();
        for (i, list) in round.delivered.iter().enumerate() {
            for (j, nu) in list {
                assert_eq!(&map[&(*j, i)], nu);
            }
        }
        assert_eq!(round.transmissions, communication_cost(&g, &dec));
        for (j, r) in dec.r_star.iter().enumerate() {
            if let Some(r) = r.finite() {
                assert_eq!(round.completion[&j], 2 * r);
            }
        }
        // over the radio graph the same values arrive, possibly sooner
        let (comm_grad, comm_round) = distributed_rigidity_grad(&states, &dec.r_star, &p, Routing::Comm).unwrap();
        assert_eq!(comm_grad, central);
        for (j, t) in &comm_round.completion {
            assert!(*t <= round.completion[j]);
        }
        done += 1;
    }
}

#[test]
fn frozen_members_survive_motion() {
    let mut r = rng(64);
    let mut done = 0;
    while done < 20 {
        let n = r.random_range(5..12);
        let states = random_states(&mut r, n, 3, 25.0, 20.0);
        let g = undirected_sensing(&states).unwrap();
        let pos: Vec<Point> = states.iter().map(|s| s.p.clone()).collect();
        let Ok(f) = Framework::new(g, 3, pos) else { continue };
        let Ok(dec) = decompose(&f, DEFAULT_TOL) else { continue };
        if !dec.is_rigid() {
            continue;
        }
        let p = ControllerParams { weight_support: WeightSupport::AllPairs, ..params() };
        // move and turn everyone; the sensing graph may change
        let moved: Vec<RobotState> = states
            .iter()
            .map(|s| RobotState {
                p: &s.p + DVector::from_fn(3, |_, _| r.random_range(-2.0..2.0)),
                psi: s.psi + r.random_range(-0.3..0.3),
                ..s.clone()
            })
            .collect();
        let Ok(now) = undirected_sensing(&moved) else { continue };
        if !now.is_connected() {
            continue;
        }
        let (grad, round) = match distributed_rigidity_grad_frozen(&moved, &dec, &p, Routing::Sensing) {
            Ok(x) => x,
            // the motion may genuinely destroy a subframework's rigidity
            Err(bearing_rigidity::Error::RigidityFloorBreached { .. }) => continue,
            Err(e) => panic!("{e}"),
        };
        for term in &grad.terms {
            let members = dec.balls[term.center].clone().unwrap();
            assert_eq!(term.members, members);
            let sub = LocalSubframework::with_members(term.center, 1, members, &moved, p.weight_support, p.comm_range);
            assert_eq!(&evaluate(&sub, &moved, &p.weights, p.gains.lambda0).unwrap(), term);
            let reach = term.members.iter().map(|&l| now.distances().get(term.center, l).unwrap()).max().unwrap();
            assert_eq!(round.completion[&term.center], 2 * reach);
        }
        assert_eq!(grad.terms.len(), n);
        done += 1;
    }
}

#[test]
fn unit_radii_metrics() {
    let mut r = rng(63);
    for _ in 0..20 {
        let n = r.random_range(3..15);
        let g = random_connected_graph(&mut r, n, 0.3);
        let dec = Decomposition::from_radii(&g, vec![Radius::Finite(1); n]);
        let m = metrics(&g, &g, &dec).unwrap();
        let diam = g.diameter().unwrap();
        for i in 0..n {
            assert_eq!(m.cost[i], 1 + g.degree(i));
            assert_eq!(m.round_trip[i], Some(2));
            assert_eq!(m.complexity[i], 1.0);
            assert_eq!(m.delay[i], Some(2.0 / diam as f64));
        }
    }
}

#[test]
fn disconnected_metrics_fail() {
    let g = Graph::new(4, [(0, 1), (2, 3)]).unwrap();
    let dec = Decomposition::from_radii(&g, vec![Radius::Finite(1); 4]);
    assert_eq!(metrics(&g, &g, &dec), Err(bearing_rigidity::Error::DisconnectedGraph));
}
