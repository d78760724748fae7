mod common;

use mei::backtrack::{
    assemble_step, backtrack, daily_average_mei, hourly_mei, mei_cdf, mei_dist, resolve_tank_ei, trace_step,
    BacktrackOptions, EiParts, FlowEdge, FlowSnapshot, PropagationError, StepTrace, TankResolveError,
};
use mei::hydraulics::{simulate_eps, SimOptions};
use mei::PumpSchedule;
use proptest::prelude::*;

use common::*;

const H_PER_KWH: f64 = 3.6e6 / (1000.0 * 9.81);

fn edge(from: usize, to: usize, flow: f64, head: f64) -> FlowEdge {
    FlowEdge {
        from,
        to,
        flow,
        head,
        link: None,
    }
}

fn ei(total: f64) -> EiParts {
    EiParts {
        transmission: total,
        treatment: 0.0,
        distribution: 0.0,
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() < 1e-12 * b.abs().max(1.0)
}

#[test]
fn pump_head_is_charged_at_wire_to_water_efficiency() {
    // source 2 -> pump (20 m at 80%) -> node 0 -> pipe (5 m) -> node 1
    let snap = FlowSnapshot::new(
        3,
        vec![edge(2, 0, 10.0, 20.0 / 0.8), edge(0, 1, 4.0, 5.0)],
        vec![6.0, 4.0, 0.0],
        vec![2],
        vec![true],
    );
    let trace = trace_step(snap).unwrap();
    assert!(close(trace.heads.get(0, 0).unwrap(), 25.0));
    assert!(close(trace.heads.get(0, 1).unwrap(), 30.0));
    let nodes = assemble_step(&trace, &[ei(0.4)]);
    let at1 = nodes[1].as_ref().unwrap();
    assert!(close(at1.distribution, 30.0 / H_PER_KWH));
    assert!(close(at1.total, 0.4 + 30.0 / H_PER_KWH));
}

#[test]
fn mixing_node_blends_sources_by_inflow() {
    // sources 1 (0.4 kWh/m3) and 2 (1.0 kWh/m3) meet at node 0
    let snap = FlowSnapshot::new(
        3,
        vec![edge(1, 0, 3.0, 0.0), edge(2, 0, 1.0, 0.0)],
        vec![4.0, 0.0, 0.0],
        vec![1, 2],
        vec![true, true],
    );
    let trace = trace_step(snap).unwrap();
    assert!(close(trace.fractions.get(0, 0), 0.75));
    assert!(close(trace.fractions.get(1, 0), 0.25));
    let m = assemble_step(&trace, &[ei(0.4), ei(1.0)])[0].clone().unwrap();
    assert!(close(m.total, 0.55));
    assert!(m.total >= 0.4);
}

#[test]
fn mixing_node_adds_path_heads_per_source() {
    // 0.9 m3/h of source A water spent 10 m, 0.1 m3/h of source B spent 50 m
    let snap = FlowSnapshot::new(
        3,
        vec![edge(1, 0, 0.9, 10.0), edge(2, 0, 0.1, 50.0)],
        vec![1.0, 0.0, 0.0],
        vec![1, 2],
        vec![true, true],
    );
    let trace = trace_step(snap).unwrap();
    let m = assemble_step(&trace, &[ei(0.3), ei(0.8)])[0].clone().unwrap();
    let expected = 0.9 * (0.3 + 10.0 / H_PER_KWH) + 0.1 * (0.8 + 50.0 / H_PER_KWH);
    assert!(close(m.total, expected));
}

#[test]
fn water_never_traced_to_a_source_is_an_error() {
    let snap = FlowSnapshot::new(3, vec![edge(0, 1, 1.0, 1.0)], vec![0.0, 1.0, 0.0], vec![2], vec![true]);
    assert!(matches!(trace_step(snap), Err(PropagationError::Untraceable { .. })));
}

#[test]
fn flow_cycle_is_solved_as_a_linear_system() {
    // source 3 feeds node 0; 0 -> 1 -> 2 -> 0 loop with a draw at each node
    let snap = FlowSnapshot::new(
        4,
        vec![
            edge(3, 0, 10.0, 2.0),
            edge(0, 1, 12.0, 1.0),
            edge(1, 2, 8.0, 1.0),
            edge(2, 0, 2.0, 1.0),
        ],
        vec![0.0, 4.0, 6.0, 0.0],
        vec![3],
        vec![true],
    );
    let trace = trace_step(snap).unwrap();
    assert!(trace.cyclic);
    for j in 0..3 {
        assert!(close(trace.fractions.get(0, j), 1.0));
    }
    // H0 = (10*2 + 2*(H2 + 1)) / 12, H1 = H0 + 1, H2 = H1 + 1
    let h0 = (20.0 + 2.0 * 3.0) / 10.0;
    assert!(close(trace.heads.get(0, 0).unwrap(), h0));
    assert!(close(trace.heads.get(0, 2).unwrap(), h0 + 2.0));
}

fn step(snap: FlowSnapshot, duration: f64) -> StepTrace {
    let mut snap = snap;
    snap.duration = duration;
    trace_step(snap).unwrap()
}

#[test]
fn tank_intensity_is_the_intensity_of_what_it_stored() {
    // reservoir 1 charges tank 2 through 0.1 kWh/m3 of head, then the tank
    // serves node 0
    let h = 0.1 * H_PER_KWH;
    let charge = step(
        FlowSnapshot::new(3, vec![edge(1, 2, 5.0, h)], vec![0.0; 3], vec![1, 2], vec![true, false]),
        2.0,
    );
    let release = step(
        FlowSnapshot::new(3, vec![edge(2, 0, 3.0, 0.0)], vec![3.0, 0.0, 0.0], vec![1, 2], vec![false, true]),
        1.0,
    );
    let state = resolve_tank_ei(&[charge, release.clone()], &[(0.4, 0.0)], 1).unwrap();
    assert!(close(state.total_ei(0), 0.5));
    assert!(close(state.ei[0].distribution, 0.1));
    assert!(close(state.charged_volume[0], 10.0));
    assert!(close(state.discharged_volume[0], 3.0));
    let served = assemble_step(&release, &[ei(0.4), state.ei[0]]);
    assert!(close(served[0].as_ref().unwrap().total, 0.5));
}

#[test]
fn tank_intensity_averages_over_charged_volume() {
    let fill = |head: f64, flow: f64, hours: f64| {
        step(
            FlowSnapshot::new(2, vec![edge(0, 1, flow, head)], vec![0.0; 2], vec![0, 1], vec![true, false]),
            hours,
        )
    };
    // 10 m3 at 0.2 kWh/m3 of head and 30 m3 at 0.6
    let traces = [fill(0.2 * H_PER_KWH, 10.0, 1.0), fill(0.6 * H_PER_KWH, 15.0, 2.0)];
    let state = resolve_tank_ei(&traces, &[(0.0, 0.0)], 1).unwrap();
    assert!(close(state.total_ei(0), 0.5));
}

#[test]
fn tank_charged_from_another_tank_inherits_its_intensity() {
    // nodes: 0 = reservoir, 1 = tank A, 2 = tank B
    let a_fill = step(
        FlowSnapshot::new(3, vec![edge(0, 1, 4.0, 0.2 * H_PER_KWH)], vec![0.0; 3], vec![0, 1, 2], vec![true, false, false]),
        1.0,
    );
    let b_fill = step(
        FlowSnapshot::new(3, vec![edge(1, 2, 2.0, 0.05 * H_PER_KWH)], vec![0.0; 3], vec![0, 1, 2], vec![false, true, false]),
        1.0,
    );
    let state = resolve_tank_ei(&[a_fill, b_fill], &[(0.3, 0.1)], 2).unwrap();
    assert!(close(state.total_ei(0), 0.6));
    assert!(close(state.total_ei(1), 0.65));
    assert!(close(state.ei[1].transmission, 0.3));
    assert!(close(state.ei[1].treatment, 0.1));
}

#[test]
fn tanks_filling_only_each_other_are_rejected() {
    let ab = step(
        FlowSnapshot::new(3, vec![edge(1, 2, 2.0, 1.0)], vec![0.0; 3], vec![0, 1, 2], vec![false, true, false]),
        1.0,
    );
    let ba = step(
        FlowSnapshot::new(3, vec![edge(2, 1, 2.0, 1.0)], vec![0.0; 3], vec![0, 1, 2], vec![false, false, true]),
        1.0,
    );
    let err = resolve_tank_ei(&[ab, ba], &[(0.3, 0.1)], 2).unwrap_err();
    assert_eq!(err, TankResolveError::Cycle { tanks: vec![0, 1] });
}

#[test]
fn desk_tank_intensity_matches_its_charging_water() {
    let net = desk();
    let sim = simulate_eps(&net, &desk_good_schedule(), &SimOptions::default()).unwrap();
    let report = backtrack(&net, &sim, &BacktrackOptions::default()).unwrap();
    let lay = &report.layout;
    for n in 0..lay.n_tanks {
        let node = lay.tank_node(n);
        let (mut energy, mut volume) = (0.0, 0.0);
        for (trace, st) in report.traces.iter().zip(&report.steps) {
            let net_in = trace.snapshot.net_inflow(node);
            if trace.snapshot.active_source_at(node).is_none() && net_in > 0.0 {
                energy += net_in * st.duration * st.nodes[node].as_ref().unwrap().total;
                volume += net_in * st.duration;
            }
        }
        assert!(volume > 0.0);
        assert!((energy / volume - report.tanks.total_ei(n)).abs() < 1e-9);
    }
}

#[test]
fn daily_and_hourly_averages_weight_by_delivered_volume() {
    let net = desk();
    let opts = SimOptions {
        dt_hours: 0.5,
        ..SimOptions::default()
    };
    let sim = simulate_eps(&net, &desk_good_schedule(), &opts).unwrap();
    let report = backtrack(&net, &sim, &BacktrackOptions::default()).unwrap();
    let daily = daily_average_mei(&report);
    let hourly = hourly_mei(&report);
    let lay = &report.layout;
    for j in 0..lay.n_junctions {
        let (mut e, mut v) = (0.0, 0.0);
        for hour in 0..24 {
            let (mut he, mut hv) = (0.0, 0.0);
            for st in report.steps.iter().filter(|s| s.hour == hour) {
                let m = st.nodes[j].as_ref().unwrap().total;
                he += m * st.demand[j] * st.duration;
                hv += st.demand[j] * st.duration;
            }
            assert!((hourly[hour][j].unwrap() - he / hv).abs() < 1e-12);
            e += he;
            v += hv;
        }
        assert!((daily.nodes[j].unwrap() - e / v).abs() < 1e-12);
    }
    let cdf = mei_cdf(&daily);
    assert_eq!(cdf.len(), lay.n_junctions);
    assert!(cdf.windows(2).all(|w| w[0].0 <= w[1].0 && w[0].1 < w[1].1));
    assert!((cdf.last().unwrap().1 - 1.0).abs() < 1e-12);
}

#[test]
fn sources_report_their_own_intensity() {
    let net = network("mixing.inp");
    let sim = simulate_eps(&net, &uniform_schedule(1, MIXING_PATTERN), &SimOptions::default()).unwrap();
    let report = backtrack(&net, &sim, &BacktrackOptions::default()).unwrap();
    for (trace, st) in report.traces.iter().zip(&report.steps) {
        for (s, &node) in trace.snapshot.source_nodes.iter().enumerate() {
            if trace.snapshot.active[s] {
                assert_eq!(st.nodes[node].as_ref().unwrap().total, report.source_eis[s].total());
            }
        }
    }
    let all_on = simulate_eps(&net, &PumpSchedule::all(1, true), &SimOptions::default()).unwrap();
    assert!(backtrack(&net, &all_on, &BacktrackOptions::default()).is_ok());
}

/// Random layered acyclic flow graph: nodes 0 and 1 are sources and every
/// other node receives flow from at least one earlier node.
fn random_dag() -> impl Strategy<Value = (usize, Vec<(usize, usize, f64, f64)>)> {
    (4usize..12).prop_flat_map(|n| {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| ((i + 1).max(2)..n).map(move |j| (i, j))).collect();
        let k = pairs.len();
        (
            Just(n),
            Just(pairs),
            proptest::collection::vec(prop_oneof![Just(0.0), 0.1..50.0f64], k),
            proptest::collection::vec(0.0..40.0f64, k),
            proptest::collection::vec(0usize..2, n),
            proptest::collection::vec(0.1..50.0f64, n),
        )
            .prop_map(|(n, pairs, flows, heads, feeder, extra)| {
                let mut edges: Vec<(usize, usize, f64, f64)> = pairs
                    .iter()
                    .zip(flows.iter().zip(&heads))
                    .filter(|(_, (q, _))| **q > 0.0)
                    .map(|(&(i, j), (&q, &h))| (i, j, q, h))
                    .collect();
                for j in 2..n {
                    edges.push((feeder[j], j, extra[j], extra[j] / 2.0));
                }
                (n, edges)
            })
    })
}

/// Source fractions and path-averaged heads by enumerating every path.
fn path_oracle(n: usize, edges: &[(usize, usize, f64, f64)]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let mut inflow = vec![0.0; n];
    for e in edges {
        inflow[e.1] += e.2;
    }
    let mut r = vec![vec![0.0; n]; 2];
    let mut hw = vec![vec![0.0; n]; 2];
    for s in 0..2 {
        r[s][s] = 1.0;
        let mut stack = vec![(s, 1.0, 0.0)];
        while let Some((node, w, len)) = stack.pop() {
            for &(_, to, q, h) in edges.iter().filter(|e| e.0 == node) {
                let w2 = w * q / inflow[to];
                r[s][to] += w2;
                hw[s][to] += w2 * (len + h);
                stack.push((to, w2, len + h));
            }
        }
    }
    (r, hw)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn propagation_matches_path_enumeration((n, edges) in random_dag()) {
        let mut inflow = vec![0.0; n];
        let mut outflow = vec![0.0; n];
        for e in &edges {
            inflow[e.1] += e.2;
            outflow[e.0] += e.2;
        }
        let demand: Vec<f64> = (0..n).map(|j| if j < 2 { 0.0 } else { (inflow[j] - outflow[j]).max(0.0) }).collect();
        let snap = FlowSnapshot::new(
            n,
            edges.iter().map(|&(a, b, q, h)| edge(a, b, q, h)).collect(),
            demand,
            vec![0, 1],
            vec![true, true],
        );
        let trace = trace_step(snap).unwrap();
        let (r, hw) = path_oracle(n, &edges);
        let eis = [ei(0.35), ei(0.9)];
        let nodes = assemble_step(&trace, &eis);
        for j in 2..n {
            prop_assert!((trace.fractions.node_sum(j) - 1.0).abs() < 1e-9);
            let mut mei = 0.0;
            for s in 0..2 {
                prop_assert!((trace.fractions.get(s, j) - r[s][j]).abs() < 1e-9);
                if r[s][j] > 0.0 {
                    let h = hw[s][j] / r[s][j];
                    prop_assert!((trace.heads.get(s, j).unwrap() - h).abs() < 1e-9 * h.max(1.0));
                    mei += r[s][j] * (eis[s].total() + mei_dist(h));
                }
            }
            let m = nodes[j].as_ref().unwrap();
            prop_assert!((m.total - mei).abs() < 1e-9);
            prop_assert!(m.total >= 0.35 - 1e-12);
            prop_assert!(m.distribution >= 0.0);
        }
    }

    #[test]
    fn head_to_energy_is_linear(h in 0.0..1000.0f64, k in 0.0..10.0f64) {
        prop_assert!((mei_dist(k * h) - k * mei_dist(h)).abs() < 1e-12 * mei_dist(h).max(1.0) * k.max(1.0));
        prop_assert!((mei_dist(h) * H_PER_KWH - h).abs() < 1e-9 * h.max(1.0));
    }
}
