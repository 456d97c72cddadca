use std::sync::OnceLock;

use proptest::prelude::*;

use fable::causal::{choose_index, predict_reward, CausalLedger, RuleInputs};
use fable::episodic::{Cue, Episode, EpisodeMeta, EpisodicNetwork, RecalledEpisode};
use fable::features::{
    encode_feature, train_map, uniform_samples, Channel, Color, Coord, FeatureMaps, Geometry, ObjectSpec, PropertyMap,
    SomConfig,
};
use fable::hubs::{decode_reward, encode_reward, ActionGoal, BodyState, HubCode, HubCoder, HubKind, ObjectHub};
use fable::world::{displaced_volume, Jar, WorldState};

fn maps() -> &'static FeatureMaps {
    static MAPS: OnceLock<FeatureMaps> = OnceLock::new();
    MAPS.get_or_init(|| FeatureMaps::train(&SomConfig::default(), 42).unwrap())
}

fn color() -> impl Strategy<Value = Color> {
    prop_oneof![
        Just(Color::Red),
        Just(Color::Green),
        Just(Color::Blue),
        Just(Color::Yellow),
        Just(Color::White),
        Just(Color::Black)
    ]
}

fn geometry() -> impl Strategy<Value = Geometry> {
    prop_oneof![
        (0.5..10.0f64, 0.5..30.0f64).prop_map(|(radius, height)| Geometry::Cylinder { radius, height }),
        (0.5..20.0f64).prop_map(|edge| Geometry::Cube { edge }),
        (0.5..20.0f64).prop_map(|diameter| Geometry::Sphere { diameter }),
        (0.5..20.0f64, 0.5..20.0f64, 0.5..20.0f64).prop_map(|(length, width, height)| Geometry::Cuboid {
            length,
            width,
            height
        }),
    ]
}

fn object() -> impl Strategy<Value = ObjectSpec> {
    (color(), geometry(), 1.0..2000.0f64).prop_map(|(c, g, w)| ObjectSpec::new("o", c, g, w).unwrap())
}

fn cylinder(id: &str, weight: f64) -> ObjectSpec {
    ObjectSpec::new(id, Color::Red, Geometry::Cylinder { radius: 3.18, height: 11.5 }, weight).unwrap()
}

fn recalled(weight: f64, reward: f64) -> RecalledEpisode {
    let meta = EpisodeMeta { index: 0, object: cylinder("r", weight), observed_cm3: reward };
    let code = HubCode::new(HubKind::Object, [-1; 50]);
    RecalledEpisode {
        episode: Episode::new(BodyState::GoalRealized, &code, ActionGoal::Drop, meta),
        distance: 0,
        score: 0.9,
    }
}

fn weight_dominant() -> CausalLedger {
    let mut ledger = CausalLedger::default();
    let mut gains = fable::hubs::Gains::default();
    fable::causal::apply_rules(
        &RuleInputs::uniform([false, false, false, true], true, Some(365.0), 14.0),
        &mut ledger,
        &mut gains,
    );
    ledger
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn features_are_normalized(obj in object()) {
        for c in Channel::ALL {
            let f = encode_feature(&obj, c);
            prop_assert_eq!(f.values.len(), c.dim());
            prop_assert!(f.values.iter().all(|v| (0.0..=1.0).contains(v)));
        }
        let shape = encode_feature(&obj, Channel::Shape);
        prop_assert_eq!(shape.values.iter().filter(|&&v| v == 1.0).count(), 1);
    }

    #[test]
    fn activation_is_a_distribution(obj in object()) {
        for a in maps().perceive(&obj).unwrap() {
            let total: f64 = a.activity.iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-9);
            let best = a.activity.iter().cloned().fold(f64::MIN, f64::max);
            let first = a.activity.iter().position(|&x| x == best).unwrap();
            prop_assert_eq!(maps().get(a.channel).coord(first), a.winner);
        }
    }

    #[test]
    fn dual_dyad_stays_consistent(objects in prop::collection::vec(object(), 1..12), silence in 0usize..5) {
        let mut hub = ObjectHub::new(HubCoder::new(3));
        for (i, obj) in objects.iter().enumerate() {
            if i == objects.len() / 2 && silence < 4 {
                hub.gains_mut().set(Channel::ALL[silence], 0.0);
            }
            let acts = maps().perceive(obj).unwrap();
            let code = hub.bind(&acts).unwrap();
            prop_assert_eq!(code.active_units().len(), 5);
            prop_assert!(hub.connectivity().is_consistent());
        }
    }

    #[test]
    fn silenced_channel_never_changes_the_code(a in object(), other in color(), channel in 0usize..4) {
        let mut hub = ObjectHub::new(HubCoder::new(11));
        hub.gains_mut().set(Channel::Color, 0.0);
        let b = ObjectSpec { color: other, ..a.clone() };
        let ca = hub.code_for(&maps().perceive(&a).unwrap()).unwrap();
        let cb = hub.code_for(&maps().perceive(&b).unwrap()).unwrap();
        prop_assert_eq!(ca, cb);
        // silencing any further channel keeps that true
        hub.gains_mut().set(Channel::ALL[channel], if channel == 0 { 0.0 } else { 0.5 });
        prop_assert_eq!(hub.code_for(&maps().perceive(&a).unwrap()).unwrap(), hub.code_for(&maps().perceive(&b).unwrap()).unwrap());
    }

    #[test]
    fn retro_activation_inverts_bind(obj in object()) {
        let mut hub = ObjectHub::new(HubCoder::new(5));
        let acts = maps().perceive(&obj).unwrap();
        let code = hub.bind(&acts).unwrap();
        for (e, a) in hub.retro_activate(&code).iter().zip(&acts) {
            prop_assert_eq!(e.winner, Some(a.winner));
        }
    }

    #[test]
    fn reward_code_round_trips(v in 0.0..=500.0f64) {
        let code = encode_reward(v).code;
        let back = decode_reward(&code);
        prop_assert!((back - v).abs() <= 5.0 + 1e-9);
        prop_assert_eq!(encode_reward(back).code, code);
    }

    #[test]
    fn displacement_is_monotone_and_continuous(r in 0.5..10.0f64, h in 0.5..30.0f64, a in 1.0..5000.0f64, b in 1.0..5000.0f64) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let g = Geometry::Cylinder { radius: r, height: h };
        let d = |w: f64| displaced_volume(&ObjectSpec::new("x", Color::Red, g, w).unwrap(), 1.0);
        prop_assert!(d(lo) <= d(hi));
        let v = std::f64::consts::PI * r * r * h;
        prop_assert!((d(v - 1e-7) - d(v + 1e-7)).abs() <= 1e-6);
    }

    #[test]
    fn water_volume_is_conserved(objects in prop::collection::vec(object(), 1..8)) {
        let mut world = WorldState::new(Jar::default());
        let mut total = 0.0;
        let mut previous = world.level_cm();
        for (i, obj) in objects.iter().enumerate() {
            let obj = ObjectSpec { id: format!("o{i}"), ..obj.clone() };
            total += world.drop(&obj).unwrap();
            prop_assert!(world.level_cm() >= previous);
            prop_assert_eq!(world.target_reachable(), world.level_cm() >= world.jar().reach_level_cm);
            previous = world.level_cm();
        }
        let expected = Jar::default().initial_level_cm + total / Jar::default().cross_section_cm2;
        prop_assert!((world.level_cm() - expected).abs() <= 1e-9 * expected);
    }

    #[test]
    fn predictions_scale_with_rewards(
        pairs in prop::collection::vec((1.0..1000.0f64, 1.0..500.0f64), 2..6),
        target in 1.0..1000.0f64,
        c in 0.01..100.0f64,
        dominant in any::<bool>(),
    ) {
        let ledger = if dominant { weight_dominant() } else { CausalLedger::default() };
        let eps: Vec<_> = pairs.iter().map(|&(w, r)| recalled(w, r)).collect();
        let scaled: Vec<_> = pairs.iter().map(|&(w, r)| recalled(w, r * c)).collect();
        let t = cylinder("t", target);
        let p = predict_reward(&t, &eps, &ledger).unwrap();
        let q = predict_reward(&t, &scaled, &ledger).unwrap();
        prop_assert!((q - c * p).abs() <= 1e-9 * (1.0 + q.abs()));

        let candidates: Vec<Option<f64>> = pairs.iter().map(|&(_, r)| Some(r)).collect();
        let scaled_candidates: Vec<Option<f64>> = pairs.iter().map(|&(_, r)| Some(r * c)).collect();
        prop_assert_eq!(choose_index(&candidates).unwrap(), choose_index(&scaled_candidates).unwrap());
    }

    #[test]
    fn prediction_reproduces_known_weights(
        pairs in prop::collection::vec((1.0..1000.0f64, 1.0..500.0f64), 2..6),
        pick in any::<prop::sample::Index>(),
    ) {
        // one reward per weight, as the world would give
        let mut pairs = pairs;
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        pairs.dedup_by(|a, b| a.0 == b.0);
        let eps: Vec<_> = pairs.iter().map(|&(w, r)| recalled(w, r)).collect();
        let (w, r) = pairs[pick.index(pairs.len())];
        let p = predict_reward(&cylinder("t", w), &eps, &weight_dominant()).unwrap();
        prop_assert!((p - r).abs() <= 0.005 * r);
    }

    #[test]
    fn hebbian_weights_stay_symmetric(units in prop::collection::vec(prop::collection::btree_set(0usize..50, 5), 1..4)) {
        let mut net = EpisodicNetwork::new();
        for (i, set) in units.iter().enumerate() {
            let mut bits = [-1i8; 50];
            for &u in set {
                bits[u] = 1;
            }
            let code = HubCode::new(HubKind::Object, bits);
            let meta = EpisodeMeta { index: i, object: cylinder("m", 100.0), observed_cm3: 100.0 };
            net.encode(Episode::new(BodyState::Idle, &code, ActionGoal::Drop, meta)).unwrap();
            prop_assert!(net.is_symmetric());
        }
        let ep = net.episodes()[0].clone();
        let settled = net.settle(&Cue::object(&ep.object_code())).unwrap();
        prop_assert!(settled.energies.windows(2).all(|w| w[1] <= w[0]));
    }
}

fn spearman(x: &[f64], y: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            for k in i..=j {
                r[idx[k]] = (i + j) as f64 / 2.0;
            }
            i = j + 1;
        }
        r
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

/// Least-squares direction along which a scalar map's codebook grows.
fn principal_axis(map: &PropertyMap) -> (f64, f64) {
    let side = map.side() as f64;
    let c = (side - 1.0) / 2.0;
    let mean = map.codebooks().iter().map(|w| w[0]).sum::<f64>() / map.units() as f64;
    let (mut rr, mut cc, mut rc, mut rv, mut cv) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for u in 0..map.units() {
        let p = map.coord(u);
        let (r, q, v) = (p.row as f64 - c, p.col as f64 - c, map.codebooks()[u][0] - mean);
        rr += r * r;
        cc += q * q;
        rc += r * q;
        rv += r * v;
        cv += q * v;
    }
    let det = rr * cc - rc * rc;
    ((cc * rv - rc * cv) / det, (rr * cv - rc * rv) / det)
}

#[test]
fn size_map_preserves_topology() {
    let map = maps().get(Channel::Size);
    let (a, b) = principal_axis(map);
    let inputs: Vec<f64> = (0..200).map(|i| (i as f64 * 0.618_033_988_7).fract()).collect();
    let projected: Vec<f64> = inputs
        .iter()
        .map(|&x| {
            let w: Coord = map.best_matching_unit(&[x]);
            a * w.row as f64 + b * w.col as f64
        })
        .collect();
    let rho = spearman(&inputs, &projected);
    assert!(rho >= 0.8, "spearman {rho}");
}

#[test]
fn distant_features_get_distinct_winners() {
    let config = SomConfig::default();
    let (mut distinct, mut total) = (0usize, 0usize);
    for seed in 0..20u64 {
        for c in Channel::ALL {
            let samples = uniform_samples(c);
            let map = train_map(&samples, &config, seed).unwrap();
            let step = (samples.len() / 40).max(1);
            let picked: Vec<_> = samples.iter().step_by(step).collect();
            for (i, x) in picked.iter().enumerate() {
                for y in &picked[i + 1..] {
                    if x.distance(y) >= 0.2 {
                        total += 1;
                        if map.best_matching_unit(&x.values) != map.best_matching_unit(&y.values) {
                            distinct += 1;
                        }
                    }
                }
            }
        }
    }
    let rate = distinct as f64 / total as f64;
    assert!(rate >= 0.95, "distinct winners for {rate:.4} of {total} pairs");
}

#[test]
fn fable_weights_and_colors_are_far_apart() {
    // weights of the same-geometry cylinders that get compared, and all colors
    let weights = [14.0, 200.0, 300.0, 420.0];
    for (i, &a) in weights.iter().enumerate() {
        for &b in &weights[i + 1..] {
            let wa = maps().activate(&cylinder("a", a), Channel::Weight).unwrap().winner;
            let wb = maps().activate(&cylinder("b", b), Channel::Weight).unwrap().winner;
            assert!(wa.chebyshev(wb) >= 2, "{a} g vs {b} g: winners {wa} and {wb}");
        }
    }
    let colors = [Color::Red, Color::Green, Color::Blue, Color::Yellow, Color::White, Color::Black];
    let winner = |c: Color| {
        let obj = ObjectSpec { color: c, ..cylinder("c", 100.0) };
        maps().activate(&obj, Channel::Color).unwrap().winner
    };
    for (i, &a) in colors.iter().enumerate() {
        for &b in &colors[i + 1..] {
            assert!(winner(a).chebyshev(winner(b)) >= 2, "{a:?} vs {b:?}");
        }
    }
}

#[test]
fn duplicate_encoding_keeps_fixed_points() {
    let make = |i: usize, units: [usize; 5]| {
        let mut bits = [-1i8; 50];
        for u in units {
            bits[u] = 1;
        }
        let meta = EpisodeMeta { index: i, object: cylinder("d", 50.0), observed_cm3: 50.0 };
        Episode::new(BodyState::GoalFailed, &HubCode::new(HubKind::Object, bits), ActionGoal::Drop, meta)
    };
    let eps = [make(0, [1, 7, 13, 29, 41]), make(1, [2, 8, 19, 33, 47]), make(2, [0, 11, 22, 35, 44])];
    let mut once = EpisodicNetwork::new();
    let mut twice = EpisodicNetwork::new();
    for ep in &eps {
        once.encode(ep.clone()).unwrap();
        twice.encode(ep.clone()).unwrap();
        twice.encode(ep.clone()).unwrap();
    }
    for ep in &eps {
        let cue = Cue::object(&ep.object_code());
        assert_eq!(once.settle(&cue).unwrap().state, twice.settle(&cue).unwrap().state);
        let full = Cue::from_episode(ep, &(0..20).collect::<Vec<_>>());
        assert_eq!(once.settle(&full).unwrap().state, ep.flatten());
    }
}
