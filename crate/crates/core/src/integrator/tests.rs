use super::*;
use crate::field::Grid;
use crate::propagator::{evolve_splitstep_history, PropagatorConfig};
use crate::state::{GaussianPacket, Potential, PotentialKind, Preset, Units};
use std::f64::consts::PI;

fn nodes() -> WaveFunction {
    Preset::NodeSuperposition.build()
}

fn cfg() -> IntegratorConfig {
    IntegratorConfig::default()
}

#[test]
fn central_trajectory_stays_put_and_hits_the_node() {
    let tr = integrate_trajectory(&nodes(), &Point::new1(0.0), 0.0, 3.0, &cfg()).unwrap();
    assert_eq!(tr.status, Status::HitNode);
    assert!(tr.samples.iter().all(|s| s.q[0].abs() < 1e-10));
    let tau = tr.tau_plus.event().unwrap();
    assert!((tau - PI / 2.0).abs() < 1e-6, "tau = {tau}");
    assert!(tr.last().psi_abs <= 1e-7 * nodes().amplitude_scale());
}

#[test]
fn maximal_interval_of_the_central_trajectory() {
    let (lo, hi) = maximal_interval(&nodes(), &Point::new1(0.0), 0.0, 3.0, &cfg()).unwrap();
    assert!((lo.event().unwrap() + PI / 2.0).abs() < 1e-6);
    assert!((hi.event().unwrap() - PI / 2.0).abs() < 1e-6);
}

#[test]
fn ground_state_trajectories_are_censored() {
    let s = Preset::Ground.build();
    let (lo, hi) = maximal_interval(&s, &Point::new1(0.7), 0.0, 5.0, &cfg()).unwrap();
    assert_eq!((lo, hi), (Tau::Censored, Tau::Censored));
}

#[test]
fn periodic_and_reflected_paths() {
    let s = nodes();
    let sampling = Sampling::Uniform(PI / 64.0);
    let a = integrate_sampled(&s, &Point::new1(0.5), 0.0, 2.0 * PI, &cfg(), &sampling).unwrap();
    assert_eq!(a.status, Status::Completed);
    assert_eq!(a.samples.len(), 129);
    for k in 0..=64 {
        let d = a.samples[k + 64].q[0] - a.samples[k].q[0];
        assert!(d.abs() < 1e-6, "k = {k}: {d}");
    }
    let b = integrate_sampled(&s, &Point::new1(-0.5), 0.0, 2.0 * PI, &cfg(), &sampling).unwrap();
    for (x, y) in a.samples.iter().zip(&b.samples) {
        assert_eq!(x.t, y.t);
        assert!((x.q[0] + y.q[0]).abs() < 1e-8);
    }
}

#[test]
fn long_periodic_trajectory_is_censored() {
    let (_, hi) = maximal_interval(&nodes(), &Point::new1(0.5), 0.0, 10.0 * PI, &cfg()).unwrap();
    assert_eq!(hi, Tau::Censored);
}

#[test]
fn forward_then_backward_returns_home() {
    let s = nodes();
    let q0 = Point::new1(-0.8);
    let f = integrate_trajectory(&s, &q0, 0.3, 1.1, &cfg()).unwrap();
    assert_eq!(f.status, Status::Completed);
    let b = integrate_trajectory(&s, &f.last().q, 1.4, -1.1, &cfg()).unwrap();
    assert_eq!(b.status, Status::Completed);
    assert!((b.last().q[0] - q0[0]).abs() < 1e-7);
    assert!((b.last().t - 0.3).abs() < 1e-14);
}

#[test]
fn trajectories_do_not_cross() {
    let s = nodes();
    let times: Vec<f64> = (1..=40).map(|k| 0.07 * k as f64).collect();
    let paths: Vec<Trajectory> = [-2.1, -1.3, -0.6, 0.2, 0.9, 1.6]
        .iter()
        .map(|&q| {
            integrate_sampled(
                &s,
                &Point::new1(q),
                0.0,
                2.8,
                &cfg(),
                &Sampling::Times(times.clone()),
            )
            .unwrap()
        })
        .collect();
    for w in paths.windows(2) {
        for (a, b) in w[0].samples.iter().zip(&w[1].samples) {
            assert_eq!(a.t, b.t);
            assert!(a.q[0] < b.q[0]);
        }
    }
}

#[test]
fn tighter_tolerance_barely_moves_endpoints() {
    let s = nodes();
    let tight = IntegratorConfig {
        rel_tol: 1e-11,
        ..cfg()
    };
    for &q in &[-1.7, 0.4, 2.3] {
        let a = integrate_trajectory(&s, &Point::new1(q), 0.0, 2.0, &cfg()).unwrap();
        let b = integrate_trajectory(&s, &Point::new1(q), 0.0, 2.0, &tight).unwrap();
        assert!((a.last().q[0] - b.last().q[0]).abs() < 1e-6);
    }
}

#[test]
fn sample_velocity_agrees_with_secants() {
    let s = nodes();
    let tr = integrate_sampled(
        &s,
        &Point::new1(1.4),
        0.0,
        1.0,
        &cfg(),
        &Sampling::Uniform(0.01),
    )
    .unwrap();
    for w in tr.samples.windows(2) {
        let secant = (w[1].q[0] - w[0].q[0]) / (w[1].t - w[0].t);
        let mid = 0.5 * (w[0].v[0] + w[1].v[0]);
        assert!((secant - mid).abs() < 1e-3 * (1.0 + mid.abs()));
    }
}

#[test]
fn packet_trajectories_scale_with_the_width() {
    let p = GaussianPacket::new(-1.0, 1.5, 0.7, Units::natural(1)).unwrap();
    let s = WaveFunction::Packet(p.clone());
    for &q in &[-2.0, -1.0, 0.3] {
        let tr = integrate_trajectory(&s, &Point::new1(q), 0.0, 2.0, &cfg()).unwrap();
        let expect = p.center(2.0) + (q - p.center(0.0)) * p.width(2.0) / p.width(0.0);
        assert!((tr.last().q[0] - expect).abs() < 1e-8);
    }
}

#[test]
fn escape_is_reported() {
    let s = WaveFunction::Packet(GaussianPacket::new(0.0, 3.0, 1.0, Units::natural(1)).unwrap());
    let c = IntegratorConfig {
        escape_radius: Some(4.0),
        ..cfg()
    };
    let tr = integrate_trajectory(&s, &Point::new1(0.0), 0.0, 5.0, &c).unwrap();
    assert_eq!(tr.status, Status::Escaped);
    assert!((tr.last().q[0] - 4.0).abs() < 1e-8);
    assert!((tr.tau_plus.event().unwrap() - 4.0 / 3.0).abs() < 1e-8);
}

#[test]
fn singular_set_is_reported() {
    let packet = Preset::GaussianPacket.build();
    let g = Grid::periodic_1d(-20.0, 20.0, 256).unwrap();
    let v = Potential::new(
        PotentialKind::PointSingular {
            centers: vec![Point::new1(0.0)],
            couplings: vec![0.0],
        },
        Units::natural(1),
    )
    .unwrap();
    let gs = crate::state::GridState::new(packet.sample(&g, 0.0).unwrap(), v, 1e4).unwrap();
    let h = evolve_splitstep_history(
        &gs,
        3.0,
        0.05,
        &PropagatorConfig {
            dt: 0.005,
            ..Default::default()
        },
    )
    .unwrap();
    let s = WaveFunction::History(h);
    let c = IntegratorConfig {
        sing_dist: 0.05,
        ..cfg()
    };
    let tr = integrate_trajectory(&s, &Point::new1(-2.0), 0.0, 3.0, &c).unwrap();
    assert_eq!(tr.status, Status::HitSingularPotential);
    assert!((tr.last().q[0] + 0.05).abs() < 1e-6);
}

#[test]
fn start_at_a_node_is_rejected() {
    let r = integrate_trajectory(&nodes(), &Point::new1(1.0), 0.0, 1.0, &cfg());
    assert!(matches!(r, Err(Error::Precondition(_))));
}

#[test]
fn impossible_tolerance_collapses() {
    let c = IntegratorConfig {
        rel_tol: 1e-16,
        abs_tol: 1e-18,
        min_step: 1e-2,
        ..cfg()
    };
    let tr = integrate_trajectory(&nodes(), &Point::new1(0.5), 0.0, 1.0, &c).unwrap();
    assert_eq!(tr.status, Status::StepCollapse);
    assert!(!tr.status.is_bad_event());
}

#[test]
fn csv_output_has_one_row_per_sample() {
    let tr = integrate_sampled(
        &nodes(),
        &Point::new1(0.5),
        0.0,
        1.0,
        &cfg(),
        &Sampling::Uniform(0.25),
    )
    .unwrap();
    let mut buf = Vec::new();
    write_trajectories_csv(&mut buf, &[tr.clone(), tr]).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "trajectory,t,q_1,psi_abs,v_1");
    assert_eq!(lines.len(), 1 + 2 * 5);
}
