use std::sync::Arc;

use marl_nn::SeededRng;
use particle_env::scenarios::{
    CooperativeCommunication, CooperativeNavigation, PhysicalDeception, PredatorPrey,
};
use particle_env::{
    AgentAction, AgentSpec, EnvError, Environment, JointAction, PhysicsParams, Scenario,
    ScenarioRegistry, Team, TrajectoryRecorder, Vec2, World,
};
use rand::Rng;

fn env(id: &str) -> Environment {
    Environment::new(ScenarioRegistry::with_builtins().get(id).unwrap())
}

fn zero_action(env: &Environment) -> JointAction {
    env.agent_specs()
        .iter()
        .map(|s| AgentAction {
            movement: vec![0.0; s.movement_dim],
            comm: if s.comm_dim > 0 {
                vec![1.0 / s.comm_dim as f64; s.comm_dim]
            } else {
                Vec::new()
            },
        })
        .collect()
}

fn random_action(env: &Environment, rng: &mut SeededRng) -> JointAction {
    env.agent_specs()
        .iter()
        .map(|s| {
            let movement = (0..s.movement_dim).map(|_| rng.random_range(-1.0..=1.0)).collect();
            let mut comm: Vec<f64> = (0..s.comm_dim).map(|_| rng.random_range(0.01..1.0)).collect();
            let total: f64 = comm.iter().sum();
            comm.iter_mut().for_each(|c| *c /= total);
            AgentAction { movement, comm }
        })
        .collect()
}

fn random_point(rng: &mut SeededRng) -> Vec2 {
    Vec2::new(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0))
}

const BUILTINS: [&str; 4] = [
    "cooperative_navigation",
    "cooperative_communication",
    "predator_prey",
    "physical_deception",
];

#[test]
fn cooperative_navigation_reset_contract() {
    let env = env("cooperative_navigation");
    let (world, obs) = env.reset(&mut SeededRng::new(1)).unwrap();
    assert_eq!(world.agents.len(), 3);
    assert_eq!(world.landmarks.len(), 3);
    assert_eq!(world.t, 0);
    for e in world.entities() {
        assert!(e.position.x.abs() <= 1.0 && e.position.y.abs() <= 1.0);
        assert_eq!(e.velocity, Vec2::ZERO);
    }
    assert_eq!(obs.len(), 3);
}

#[test]
fn reset_is_deterministic_per_seed() {
    for id in BUILTINS {
        let env = env(id);
        let a = env.reset(&mut SeededRng::new(77)).unwrap();
        let b = env.reset(&mut SeededRng::new(77)).unwrap();
        assert_eq!(a, b, "{id}");
        let c = env.reset(&mut SeededRng::new(78)).unwrap();
        assert_ne!(a.0, c.0, "{id}");
    }
}

#[test]
fn ten_thousand_resets_never_overlap() {
    let mut rng = SeededRng::new(5);
    for id in BUILTINS {
        let env = env(id);
        for _ in 0..10_000 {
            let (world, _) = env.reset(&mut rng).unwrap();
            let es: Vec<_> = world.entities().collect();
            for i in 0..es.len() {
                for j in i + 1..es.len() {
                    let d = es[i].position.dist(es[j].position);
                    assert!(d >= 0.9 * (es[i].radius + es[j].radius), "{id}: d={d}");
                }
            }
        }
    }
}

#[test]
fn registry_errors_name_the_problem() {
    let reg = ScenarioRegistry::with_builtins();
    match reg.get("simple_tag").unwrap_err() {
        EnvError::UnknownScenario { id, registered } => {
            assert_eq!(id, "simple_tag");
            assert_eq!(registered.len(), 4);
            assert!(registered.contains(&"predator_prey".to_string()));
        }
        other => panic!("unexpected {other:?}"),
    }
    for id in ["keep_away", "covert_communication"] {
        assert_eq!(reg.get(id).unwrap_err(), EnvError::NotImplemented(id.into()));
    }
}

#[derive(Debug)]
struct KeepAwayStub;

impl Scenario for KeepAwayStub {
    fn id(&self) -> &str {
        "keep_away"
    }
    fn agent_specs(&self) -> Vec<AgentSpec> {
        vec![AgentSpec {
            name: "a".into(),
            team: Team::Good,
            movement_dim: 2,
            comm_dim: 0,
            obs_dim: 4,
        }]
    }
    fn reset(&self, _rng: &mut SeededRng) -> particle_env::Result<World> {
        Ok(World {
            agents: vec![particle_env::Entity::agent(0.1)],
            landmarks: vec![],
            t: 0,
            scenario_id: "keep_away".into(),
            horizon: 0,
            comm: vec![vec![]],
            goal: None,
        })
    }
    fn observe(&self, world: &World, agent: usize) -> Vec<f64> {
        let a = &world.agents[agent];
        vec![a.velocity.x, a.velocity.y, a.position.x, a.position.y]
    }
    fn reward(&self, _world: &World) -> Vec<f64> {
        vec![0.0]
    }
}

#[test]
fn reserved_ids_accept_plugins() {
    let mut reg = ScenarioRegistry::with_builtins();
    reg.register(Arc::new(KeepAwayStub));
    let env = Environment::new(reg.get("keep_away").unwrap());
    let (w, _) = env.reset(&mut SeededRng::new(0)).unwrap();
    let (_, r) = env.step(&w, &vec![AgentAction::movement(1.0, 0.0)]).unwrap();
    assert_eq!(r.observations[0].len(), 4);
}

#[test]
fn zero_forces_leave_positions_unchanged() {
    for id in BUILTINS {
        let env = env(id);
        let (world, _) = env.reset(&mut SeededRng::new(3)).unwrap();
        let (next, _) = env.step(&world, &zero_action(&env)).unwrap();
        // Initial placements never overlap, so no contact forces act either.
        for (a, b) in world.entities().zip(next.entities()) {
            if a.position.x.abs() <= 1.0 && a.position.y.abs() <= 1.0 {
                assert_eq!(a.position, b.position, "{id}");
            }
        }
        assert_eq!(next.t, 1);
    }
}

#[test]
fn constant_force_follows_closed_form_recurrence() {
    // v_n = 0.75 v_{n-1} + f * 5 * 0.1  =>  v_n = 2 f (1 - 0.75^n)
    // p_n = p_0 + 0.1 * sum_{k<=n} v_k = p_0 + 0.2 f (n - 3 (1 - 0.75^n))
    let env = env("cooperative_navigation");
    let (mut world, _) = env.reset(&mut SeededRng::new(4)).unwrap();
    world.horizon = 100;
    world.agents[0].position = Vec2::new(-0.9, 0.9);
    world.agents[1].position = Vec2::new(0.5, -0.5);
    world.agents[2].position = Vec2::new(0.5, 0.5);
    let (fx, fy) = (0.1, -0.05);
    let (px0, py0) = (world.agents[0].position.x, world.agents[0].position.y);
    let mut action = zero_action(&env);
    action[0] = AgentAction::movement(fx, fy);
    for n in 1..=40 {
        let (next, _) = env.step(&world, &action).unwrap();
        world = next;
        let decay = 0.75_f64.powi(n);
        let a = &world.agents[0];
        assert!((a.velocity.x - 2.0 * fx * (1.0 - decay)).abs() < 1e-10);
        assert!((a.velocity.y - 2.0 * fy * (1.0 - decay)).abs() < 1e-10);
        let nf = n as f64;
        assert!((a.position.x - (px0 + 0.2 * fx * (nf - 3.0 * (1.0 - decay)))).abs() < 1e-10);
        assert!((a.position.y - (py0 + 0.2 * fy * (nf - 3.0 * (1.0 - decay)))).abs() < 1e-10);
    }
}

#[test]
fn lone_agent_speed_stays_below_analytic_bound() {
    let env = {
        let mut e = Environment::new(Arc::new(KeepAwayStub)).with_horizon(500);
        e.physics.boundary_stiffness = 0.0;
        e
    };
    let bound = PhysicsParams::default().speed_bound();
    assert_eq!(bound, 2.0);
    let mut rng = SeededRng::new(9);
    let (mut world, _) = env.reset(&mut rng).unwrap();
    for _ in 0..500 {
        let a = vec![AgentAction::movement(
            rng.random_range(-1.0..=1.0),
            rng.random_range(-1.0..=1.0),
        )];
        world = env.step(&world, &a).unwrap().0;
        let v = world.agents[0].velocity;
        assert!(v.x.abs() < bound && v.y.abs() < bound);
    }
}

#[test]
fn episode_ends_exactly_at_horizon() {
    let env = env("predator_prey");
    let (mut world, _) = env.reset(&mut SeededRng::new(2)).unwrap();
    let action = zero_action(&env);
    for t in 1..=25 {
        let (next, r) = env.step(&world, &action).unwrap();
        assert_eq!(r.done, t == 25);
        world = next;
    }
    assert!(matches!(
        env.step(&world, &action),
        Err(EnvError::EpisodeDone { t: 25, horizon: 25 })
    ));
}

#[test]
fn malformed_actions_are_rejected() {
    let env = env("cooperative_communication");
    let (world, _) = env.reset(&mut SeededRng::new(2)).unwrap();
    let good = zero_action(&env);
    assert!(env.step(&world, &good).is_ok());

    let mut wrong_count = good.clone();
    wrong_count.pop();
    let mut wrong_dim = good.clone();
    wrong_dim[1].movement = vec![0.0];
    let mut off_simplex = good.clone();
    off_simplex[0].comm = vec![0.5, 0.5, 0.5];
    let mut nan = good.clone();
    nan[1].movement[0] = f64::NAN;
    for bad in [wrong_count, wrong_dim, off_simplex, nan] {
        assert!(matches!(
            env.step(&world, &bad),
            Err(EnvError::MalformedAction { .. })
        ));
    }
}

#[test]
fn movement_is_clamped_to_unit_box() {
    let env = env("cooperative_navigation");
    let (world, _) = env.reset(&mut SeededRng::new(6)).unwrap();
    let mut big = zero_action(&env);
    big[0] = AgentAction::movement(30.0, -30.0);
    let mut unit = zero_action(&env);
    unit[0] = AgentAction::movement(1.0, -1.0);
    assert_eq!(env.step(&world, &big).unwrap(), env.step(&world, &unit).unwrap());
}

#[test]
fn agents_on_distinct_landmarks_zero_reward() {
    let env = env("cooperative_navigation");
    let (mut world, _) = env.reset(&mut SeededRng::new(8)).unwrap();
    for (a, l) in world.agents.iter_mut().zip(&world.landmarks) {
        a.position = l.position;
    }
    assert_eq!(CooperativeNavigation::coverage(&world), 0.0);
    assert_eq!(env.reward(&world), vec![-0.0; 3]);
    for i in 0..3 {
        let obs = env.observe(&world, i).unwrap();
        assert_eq!(&obs[4 + 2 * i..6 + 2 * i], &[0.0, 0.0]);
    }
}

#[test]
fn collisions_cost_one_per_pair() {
    let env = env("cooperative_navigation");
    let (mut world, _) = env.reset(&mut SeededRng::new(8)).unwrap();
    for (a, l) in world.agents.iter_mut().zip(&world.landmarks) {
        a.position = l.position;
    }
    world.agents[1].position = world.agents[0].position + Vec2::new(0.05, 0.0);
    let expected = -CooperativeNavigation::coverage(&world) - 1.0;
    assert_eq!(env.reward(&world), vec![expected; 3]);
}

#[test]
fn observation_lengths_match_documented_layouts() {
    let cases: [(&str, Vec<usize>); 4] = [
        ("cooperative_navigation", vec![14, 14, 14]),
        ("cooperative_communication", vec![3, 13]),
        ("predator_prey", vec![14, 14, 14, 14]),
        ("physical_deception", vec![12, 14, 14]),
    ];
    for (id, lens) in cases {
        let env = env(id);
        let (world, obs) = env.reset(&mut SeededRng::new(1)).unwrap();
        let got: Vec<usize> = obs.iter().map(Vec::len).collect();
        assert_eq!(got, lens, "{id}");
        let spec: Vec<usize> = env.agent_specs().iter().map(|s| s.obs_dim).collect();
        assert_eq!(spec, lens, "{id}");
        let (_, r) = env.step(&world, &zero_action(&env)).unwrap();
        assert_eq!(r.observations.iter().map(Vec::len).collect::<Vec<_>>(), lens);
    }
    let n = 3;
    assert_eq!(2 + 2 + n * 2 + (n - 1) * 2, 14);
}

#[test]
fn offset_entries_are_translation_invariant() {
    let mut rng = SeededRng::new(12);
    for id in BUILTINS {
        let env = env(id);
        for _ in 0..50 {
            let (world, obs) = env.reset(&mut rng).unwrap();
            let shift = Vec2::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
            let moved = env.observe_all(&world.translated(shift));
            for (i, (a, b)) in obs.iter().zip(&moved).enumerate() {
                let spec = &env.agent_specs()[i];
                // Movable agents lead with velocity and position; the rest is relative.
                let skip = if spec.movement_dim > 0 { 4 } else { a.len() };
                assert_eq!(&a[..2.min(skip)], &b[..2.min(skip)]);
                for (x, y) in a[skip..].iter().zip(&b[skip..]) {
                    assert!((x - y).abs() < 1e-12, "{id}");
                }
            }
        }
    }
}

#[test]
fn cooperative_navigation_is_permutation_symmetric() {
    let env = env("cooperative_navigation");
    let mut rng = SeededRng::new(13);
    let perms = [[1, 2, 0], [2, 0, 1], [0, 2, 1], [1, 0, 2], [2, 1, 0]];
    for k in 0..10_000 {
        let (mut world, _) = env.reset(&mut rng).unwrap();
        for a in world.agents.iter_mut() {
            a.position = random_point(&mut rng);
            a.velocity = Vec2::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        }
        let action = random_action(&env, &mut rng);
        let perm = perms[k % perms.len()];
        // new index j holds old agent perm[j]
        let mut pworld = world.clone();
        let mut paction = action.clone();
        for j in 0..3 {
            pworld.agents[j] = world.agents[perm[j]].clone();
            paction[j] = action[perm[j]].clone();
        }
        let (_, r) = env.step(&world, &action).unwrap();
        let (_, pr) = env.step(&pworld, &paction).unwrap();
        // Contact forces are summed in pair order, so allow rounding noise.
        assert!((r.rewards[0] - pr.rewards[0]).abs() < 1e-12);
        assert!(pr.rewards.iter().all(|&x| x == pr.rewards[0]));
        for j in 0..3 {
            let a = &r.observations[perm[j]];
            let b = &pr.observations[j];
            for (x, y) in a[..10].iter().zip(&b[..10]) {
                assert!((x - y).abs() < 1e-12);
            }
            let key = |c: &[f64]| [c[0], c[1]];
            let mut oa: Vec<[f64; 2]> = a[10..].chunks(2).map(key).collect();
            let mut ob: Vec<[f64; 2]> = b[10..].chunks(2).map(key).collect();
            oa.sort_by(|p, q| p.partial_cmp(q).unwrap());
            ob.sort_by(|p, q| p.partial_cmp(q).unwrap());
            for (p, q) in oa.iter().zip(&ob) {
                assert!((p[0] - q[0]).abs() < 1e-12 && (p[1] - q[1]).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn predator_prey_contact_terms_are_antisymmetric() {
    let scenario = PredatorPrey::default();
    let env = env("predator_prey");
    let mut rng = SeededRng::new(14);
    let mut saw_contact = 0;
    for _ in 0..10_000 {
        let (mut world, _) = env.reset(&mut rng).unwrap();
        let prey = world.agents[3].position;
        for a in world.agents.iter_mut().take(3) {
            // Land near the prey often enough to exercise contacts.
            a.position = if rng.random_bool(0.5) {
                prey + Vec2::new(rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.3))
            } else {
                random_point(&mut rng)
            };
        }
        let r = env.reward(&world);
        let events = scenario.contact_events(&world) as f64;
        saw_contact += (events > 0.0) as usize;
        for p in 0..3 {
            assert_eq!(r[p] + r[3], 0.0);
            assert_eq!(r[p], 10.0 * events);
        }
    }
    assert!(saw_contact > 1000);
}

#[test]
fn physical_deception_extremes_by_grid_search() {
    let env = env("physical_deception");
    let (mut world, _) = env.reset(&mut SeededRng::new(15)).unwrap();
    world.landmarks[0].position = Vec2::new(-0.5, -0.5);
    world.landmarks[1].position = Vec2::new(0.5, 0.5);
    world.goal = Some(0);
    let target = world.landmarks[0].position;
    let grid: Vec<Vec2> = (0..=8)
        .flat_map(|i| (0..=8).map(move |j| Vec2::new(-1.0 + 0.25 * i as f64, -1.0 + 0.25 * j as f64)))
        .collect();
    let mut best_adv = f64::NEG_INFINITY;
    let mut worst_coop = f64::INFINITY;
    for &pa in &grid {
        for &p1 in &grid {
            for &p2 in grid.iter().step_by(4) {
                let mut w = world.clone();
                w.agents[0].position = pa;
                w.agents[1].position = p1;
                w.agents[2].position = p2;
                let r = env.reward(&w);
                best_adv = best_adv.max(r[0]);
                worst_coop = worst_coop.min(r[1]);
                assert_eq!(r[1], r[2]);
            }
        }
    }
    // Adversary on the target, cooperators in the far corner.
    let far = Vec2::new(1.0, 1.0);
    let mut w = world.clone();
    w.agents[0].position = target;
    w.agents[1].position = far;
    w.agents[2].position = far;
    let r = env.reward(&w);
    assert_eq!(r[0], 0.0);
    assert!(r[0] >= best_adv);
    assert!(r[1] <= worst_coop);
    assert_eq!(r[1], -far.dist(target));
}

#[test]
fn physical_deception_signs_oppose_on_adversary_term() {
    let env = env("physical_deception");
    let mut rng = SeededRng::new(16);
    for _ in 0..1000 {
        let (world, _) = env.reset(&mut rng).unwrap();
        let mut w = world.clone();
        w.agents[0].position = random_point(&mut rng);
        let r0 = env.reward(&world);
        let r1 = env.reward(&w);
        // Moving the adversary changes its reward and the cooperators' by opposite amounts.
        let d_adv = r1[0] - r0[0];
        let d_coop = r1[1] - r0[1];
        assert!((d_adv + d_coop).abs() < 1e-12);
    }
}

#[test]
fn cooperative_communication_message_arrives_one_step_later() {
    let env = env("cooperative_communication");
    let (world, obs) = env.reset(&mut SeededRng::new(17)).unwrap();
    assert_eq!(&obs[1][10..], &[0.0, 0.0, 0.0]);
    let goal = world.goal.unwrap();
    let mut one_hot = vec![0.0; 3];
    one_hot[goal] = 1.0;
    assert_eq!(obs[0], one_hot);

    let msg = vec![0.2, 0.7, 0.1];
    let action = vec![AgentAction::comm(msg.clone()), AgentAction::movement(0.0, 0.0)];
    let (next, r) = env.step(&world, &action).unwrap();
    assert_eq!(&r.observations[1][10..], msg.as_slice());
    assert_eq!(next.comm[0], msg);
    let expected = -next.agents[1].position.dist(next.landmarks[goal].position);
    assert_eq!(r.rewards, vec![expected, expected]);
    // Speaker never moves.
    assert_eq!(next.agents[0].position, world.agents[0].position);
}

#[test]
fn trajectories_are_deterministic_and_well_formed() {
    let env = env("predator_prey");
    let run = || {
        let mut rng = SeededRng::new(21);
        let (mut world, _) = env.reset(&mut rng).unwrap();
        let dims: Vec<usize> = env.agent_specs().iter().map(|s| s.action_dim()).collect();
        let mut rec = TrajectoryRecorder::new(&world, &dims);
        loop {
            let action = random_action(&env, &mut rng);
            let (next, result) = env.step(&world, &action).unwrap();
            rec.record(&next, &action, &result);
            world = next;
            if result.done {
                break;
            }
        }
        rec
    };
    let a = run();
    assert_eq!(a.len(), 25);
    let csv = a.to_csv();
    assert_eq!(csv, run().to_csv());
    let width = a.header().split(',').count();
    assert_eq!(width, 1 + 4 * 4 + 2 * 2 + 4 * 2 + 4);
    for line in csv.lines() {
        assert_eq!(line.split(',').count(), width);
    }
}

#[test]
fn max_speed_holds_along_random_rollouts() {
    let env = env("predator_prey");
    let mut rng = SeededRng::new(22);
    for _ in 0..200 {
        let (mut world, _) = env.reset(&mut rng).unwrap();
        for _ in 0..25 {
            world = env.step(&world, &random_action(&env, &mut rng)).unwrap().0;
            for a in &world.agents {
                assert!(a.velocity.norm() <= a.max_speed.unwrap() + 1e-12);
            }
        }
    }
}

#[test]
fn scenario_types_report_their_ids() {
    assert_eq!(CooperativeCommunication.id(), "cooperative_communication");
    assert_eq!(PhysicalDeception::default().id(), "physical_deception");
}
