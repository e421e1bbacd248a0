mod common;

use std::sync::Arc;

use proptest::prelude::*;

use common::*;
use objrender::adapter::{clamp_to_tolerances, resolve_priority};
use objrender::context::{intelligibility_from_levels, EnvironmentInfo, ListenerInfo, NoiseState};
use objrender::geometry::{Direction3, Vec3};
use objrender::io::{read_mono, write_mono};
use objrender::renderers::{
    nearest_speaker_gains, pm_fir, render_block, vbap_gains, wfs_drive, DrivingFunction, RenderState, SpeakerDrive,
    SPEED_OF_SOUND,
};
use objrender::scene::{
    parse_scene, serialize_scene, validate_scene, EditorialConstraints, ObjectType, Property, Stem, Tolerances,
};
use objrender::{render, AdaptationAction, ActionKind, EngineOptions, Rulebook, ScenarioFile, SelectionTable};

const TYPES: [ObjectType; 6] = [
    ObjectType::Dialogue,
    ObjectType::Music,
    ObjectType::Ambience,
    ObjectType::Effect,
    ObjectType::Diffuse,
    ObjectType::Hoa,
];

fn az() -> impl Strategy<Value = f64> {
    -179.9f64..=180.0
}

/// Sorted azimuths at least `gap` degrees apart around the circle.
fn spaced_ring(n: std::ops::RangeInclusive<usize>, gap: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(az(), n).prop_filter("speakers too close", move |v| {
        let mut s = v.clone();
        s.sort_by(f64::total_cmp);
        let wrap_gap = s[0] + 360.0 - s[s.len() - 1];
        s.windows(2).all(|w| w[1] - w[0] >= gap) && (s.len() < 2 || wrap_gap >= gap)
    })
}

fn angle_between(a: f64, b: f64) -> f64 {
    wrap(a - b).abs()
}

fn render_all(x: &[f64], drive: &DrivingFunction, block: usize) -> Vec<Vec<f64>> {
    let mut state = RenderState::new(drive, FS, block);
    let mut out = vec![Vec::new(); drive.len()];
    for chunk in x.chunks(block) {
        let mut b = chunk.to_vec();
        b.resize(block, 0.0);
        for (o, y) in out.iter_mut().zip(render_block(&b, drive, &mut state).unwrap()) {
            o.extend(y);
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn vbap_has_unit_power_and_points_at_the_source(ring in spaced_ring(3..=8, 20.0), dir in az()) {
        // a ring with no gap wider than 180 degrees brackets every direction
        let mut s = ring.clone();
        s.sort_by(f64::total_cmp);
        let widest = s.windows(2).map(|w| w[1] - w[0]).fold(s[0] + 360.0 - s[s.len() - 1], f64::max);
        prop_assume!(widest < 179.0);
        let dirs: Vec<Direction3> = ring.iter().map(|&a| Direction3::horizontal(a)).collect();
        let g = vbap_gains(&Direction3::horizontal(dir), &dirs).unwrap();
        prop_assert!((g.power() - 1.0).abs() < 1e-9);
        prop_assert!(g.0.iter().all(|v| *v >= 0.0));
        prop_assert!(g.0.iter().filter(|v| **v > 0.0).count() <= 2);
        let (mut x, mut y) = (0.0, 0.0);
        for (gi, a) in g.0.iter().zip(&ring) {
            x += gi * a.to_radians().cos();
            y += gi * a.to_radians().sin();
        }
        prop_assert!(angle_between(y.atan2(x).to_degrees(), dir) < 1e-6);
    }

    #[test]
    fn nearest_speaker_is_one_hot_on_the_closest(ring in spaced_ring(1..=8, 1.0), dir in az()) {
        let dirs: Vec<Direction3> = ring.iter().map(|&a| Direction3::horizontal(a)).collect();
        let g = nearest_speaker_gains(&Direction3::horizontal(dir), &dirs);
        prop_assert_eq!(g.0.iter().filter(|v| **v == 1.0).count(), 1);
        prop_assert_eq!(g.0.iter().filter(|v| **v == 0.0).count(), ring.len() - 1);
        let on = g.0.iter().position(|v| *v == 1.0).unwrap();
        let best = ring.iter().map(|&a| angle_between(a, dir)).fold(f64::INFINITY, f64::min);
        prop_assert!(angle_between(ring[on], dir) <= best + 1e-9);
    }

    #[test]
    fn wfs_line_behind_the_source_has_zero_minimum_delay_and_unit_power(
        n in 2usize..10,
        spacing in 0.1f64..0.5,
        x0 in 1.0f64..3.0,
        extra in 0.5f64..5.0,
        src_az in -30.0f64..30.0,
    ) {
        let speakers: Vec<Direction3> = (0..n)
            .map(|i| {
                let y = (i as f64 - (n - 1) as f64 / 2.0) * spacing;
                Direction3::from_position(Vec3::new(x0, y, 0.0)).unwrap()
            })
            .collect();
        let far = speakers.iter().filter_map(|s| s.distance_m).fold(0.0, f64::max);
        let src = Direction3::with_distance(src_az, 0.0, far + extra);
        let d = wfs_drive(&src, &speakers, SPEED_OF_SOUND).unwrap();
        let min = d.speakers.iter().map(|s| s.delay_s).fold(f64::INFINITY, f64::min);
        prop_assert_eq!(min, 0.0);
        let power: f64 = d.speakers.iter().map(|s| s.gain * s.gain).sum();
        prop_assert!((power - 1.0).abs() < 1e-9);
        // the closest speaker to the source fires first
        let p = src.position().unwrap();
        let closest = speakers
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.position().unwrap().distance(&p).total_cmp(&b.1.position().unwrap().distance(&p)))
            .unwrap()
            .0;
        prop_assert_eq!(d.speakers[closest].delay_s, 0.0);
    }

    #[test]
    fn intelligibility_is_monotone_in_dialogue_level(
        d in prop::array::uniform7(-80.0f64..0.0),
        m in prop::array::uniform7(-80.0f64..0.0),
        boost in 0.0f64..30.0,
    ) {
        let base = intelligibility_from_levels(&d, &m);
        let louder = intelligibility_from_levels(&d.map(|v| v + boost), &m);
        prop_assert!((0.0..=1.0).contains(&base));
        prop_assert!(louder >= base - 1e-12);
        prop_assert!(intelligibility_from_levels(&d, &m.map(|v| v + boost)) <= base + 1e-12);
    }
}

fn gain_kind() -> impl Strategy<Value = ActionKind> {
    prop_oneof![
        (-40.0f64..40.0).prop_map(|db| ActionKind::GainOffset { db }),
        (-20.0f64..20.0).prop_map(|db| ActionKind::SpectralTilt { db }),
        (-60.0f64..60.0, -60.0f64..60.0).prop_map(|(d_az, d_el)| ActionKind::Reposition { d_az, d_el }),
        (-500.0f64..500.0).prop_map(|ms| ActionKind::TimeShift { ms }),
        (-1.0f64..2.0).prop_map(|amount| ActionKind::Decorrelate { amount }),
    ]
}

fn tolerances() -> impl Strategy<Value = Tolerances> {
    (0.0f64..12.0, 0.0f64..30.0, 0.0f64..200.0, 0.0f64..12.0, 0.0f64..0.9).prop_map(|(l, p, t, s, r)| Tolerances {
        level_db: l,
        position_deg: p,
        time_shift_ms: t,
        spectral_tilt_db: s,
        reverb_scale: r,
    })
}

fn within(kind: &ActionKind, t: &Tolerances) -> bool {
    match *kind {
        ActionKind::GainOffset { db } => db.abs() <= t.level_db,
        ActionKind::SpectralTilt { db } => db.abs() <= t.spectral_tilt_db,
        ActionKind::Reposition { d_az, d_el } => d_az.abs() <= t.position_deg && d_el.abs() <= t.position_deg,
        ActionKind::TimeShift { ms } => ms.abs() <= t.time_shift_ms,
        ActionKind::Decorrelate { amount } => (0.0..=1.0).contains(&amount),
        _ => true,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn clamping_stays_within_tolerance_and_is_idempotent(kind in gain_kind(), t in tolerances()) {
        let c = EditorialConstraints { tolerances: t, perceptual_priority: Property::default_priority() };
        let a = AdaptationAction::new("o", kind, "r");
        let once = clamp_to_tolerances(&a, &c);
        prop_assert!(within(&once.kind, &t), "{:?}", once.kind);
        prop_assert_eq!(clamp_to_tolerances(&once, &c), once.clone());
        if within(&a.kind, &t) {
            prop_assert_eq!(once, a);
        }
    }

    #[test]
    fn priority_resolution_is_a_stable_sort_then_truncation(
        order in Just(Property::ALL.to_vec()).prop_shuffle(),
        picks in prop::collection::vec(0usize..7, 0..12),
        budget in 0usize..14,
    ) {
        let requested: Vec<AdaptationAction> = picks
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                let mut a = AdaptationAction::new(format!("o{i}"), ActionKind::GainOffset { db: -1.0 }, "r");
                a.property = Property::ALL[p];
                a
            })
            .collect();
        let c = EditorialConstraints { tolerances: Tolerances::default(), perceptual_priority: order.clone() };
        let got = resolve_priority(&requested, &c, budget).unwrap();

        // reference: lowest priority (last in the order) first, ties in request order
        let rank = |p: Property| order.iter().position(|q| *q == p).unwrap();
        let mut want: Vec<(usize, usize)> = requested.iter().enumerate().map(|(i, a)| (i, rank(a.property))).collect();
        want.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        let want: Vec<AdaptationAction> = want.into_iter().take(budget).map(|(i, _)| requested[i].clone()).collect();
        prop_assert_eq!(got, want);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn render_block_is_linear(
        seed in 0u64..1000,
        ga in -2.0f64..2.0,
        gb in -2.0f64..2.0,
        gain in 0.0f64..2.0,
        delay_ms in 0.0f64..20.0,
    ) {
        let drive = DrivingFunction {
            speakers: vec![
                SpeakerDrive { gain, delay_s: delay_ms / 1e3, filter: None },
                SpeakerDrive { gain: 1.0, delay_s: 0.0, filter: Some(vec![0.5, 0.25, -0.125, 0.0625]) },
            ],
        };
        let a = white(seed, 3000);
        let b = white(seed + 1, 3000);
        let mix: Vec<f64> = a.iter().zip(&b).map(|(x, y)| ga * x + gb * y).collect();
        let ya = render_all(&a, &drive, 512);
        let yb = render_all(&b, &drive, 512);
        let ym = render_all(&mix, &drive, 512);
        for ch in 0..2 {
            for i in 0..ym[ch].len() {
                prop_assert!((ym[ch][i] - (ga * ya[ch][i] + gb * yb[ch][i])).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn block_size_does_not_change_the_output(seed in 0u64..1000, delay_ms in 0.0f64..30.0, az in -60.0f64..60.0) {
        let speakers = [Vec3::new(2.0, 0.5, 0.0), Vec3::new(2.0, -0.5, 0.0)];
        let a = az.to_radians();
        let target = Vec3::new(4.0 * a.cos(), 4.0 * a.sin(), 0.0);
        let firs = pm_fir(&speakers, &[Vec3::new(0.0, 0.0, 0.0)], target, 1e-3, SPEED_OF_SOUND, FS, 256).unwrap();
        let drive = DrivingFunction {
            speakers: firs
                .into_iter()
                .map(|f| SpeakerDrive { gain: 0.8, delay_s: delay_ms / 1e3, filter: Some(f) })
                .collect(),
        };
        let x = white(seed, 4096);
        let small = render_all(&x, &drive, 256);
        let large = render_all(&x, &drive, 1024);
        for ch in 0..2 {
            for i in 0..x.len() {
                prop_assert!((small[ch][i] - large[ch][i]).abs() < 1e-9, "ch {} sample {}", ch, i);
            }
        }
    }
}

#[derive(Debug, Clone)]
struct Fields {
    priority: i64,
    diffuseness: f64,
    level_db: f64,
}

fn fields() -> impl Strategy<Value = Fields> {
    (-3i64..14, -0.5f64..1.5, -80.0f64..20.0).prop_map(|(priority, diffuseness, level_db)| Fields {
        priority,
        diffuseness,
        level_db,
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn validation_agrees_with_a_direct_range_check(fs in prop::collection::vec(fields(), 1..5)) {
        let objects = fs
            .iter()
            .enumerate()
            .map(|(i, f)| {
                let mut o = object(&format!("o{i}"), ObjectType::Effect, Direction3::horizontal(0.0), vec![0.0; 16]);
                o.basic.priority = f.priority;
                o.basic.diffuseness = f.diffuseness;
                o.basic.level_db = f.level_db;
                o
            })
            .collect();
        let bad = fs
            .iter()
            .map(|f| {
                usize::from(!(0..=10).contains(&f.priority))
                    + usize::from(!(0.0..=1.0).contains(&f.diffuseness))
                    + usize::from(!(-60.0..=12.0).contains(&f.level_db))
            })
            .sum::<usize>();
        prop_assert_eq!(validate_scene(&scene(objects)).len(), bad);
    }
}

#[derive(Debug, Clone)]
struct Spec {
    kind: usize,
    priority: i64,
    level_db: f64,
    az: f64,
    el: f64,
    dist: Option<f64>,
    diffuseness: f64,
    extent: Option<f64>,
    group: Option<String>,
}

fn spec() -> impl Strategy<Value = Spec> {
    (
        (0usize..6, 0i64..=10, -60.0f64..=12.0),
        (az(), -90.0f64..=90.0, prop::option::of(0.1f64..20.0)),
        (0.0f64..=1.0, prop::option::of(0.0f64..359.0), prop::option::of("[a-z]{1,6}(_[a-z]{1,4})?")),
    )
        .prop_map(|((kind, priority, level_db), (az, el, dist), (diffuseness, extent, group))| Spec {
            kind,
            priority,
            level_db,
            az,
            el,
            dist,
            diffuseness,
            extent,
            group,
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn scene_documents_round_trip(specs in prop::collection::vec(spec(), 1..6)) {
        let dir = tempfile::tempdir().unwrap();
        write_mono(&dir.path().join("s.wav"), 48_000, &white(3, 200)).unwrap();
        // stems hold exactly what the 32-bit file holds
        let samples = Arc::new(read_mono(&dir.path().join("s.wav")).unwrap().samples);
        let objects = specs
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let pos = match s.dist {
                    Some(d) => Direction3::with_distance(s.az, s.el, d),
                    None => Direction3::new(s.az, s.el),
                };
                let mut o = object(&format!("o{i}"), TYPES[s.kind], pos, vec![]);
                o.stems = vec![Stem { path: "s.wav".into(), samples: samples.clone() }];
                o.basic.priority = s.priority;
                o.basic.level_db = s.level_db;
                o.basic.diffuseness = s.diffuseness;
                o.basic.extent_deg = s.extent;
                o.basic.group = s.group.clone();
                o
            })
            .collect();
        let original = scene(objects);
        prop_assert!(validate_scene(&original).is_empty());
        let text = serialize_scene(&original);
        let parsed = parse_scene(&text, dir.path()).unwrap();
        prop_assert_eq!(&parsed, &original);
        prop_assert_eq!(serialize_scene(&parsed), text);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn engine_output_is_finite_with_one_channel_per_speaker(
        ring in spaced_ring(1..=6, 5.0),
        dist in 1.0f64..4.0,
        objs in prop::collection::vec((0usize..6, az(), prop::option::of(0.5f64..8.0), 0u64..100), 1..4),
        noise_db in -70.0f64..-20.0,
        interval in 0.05f64..0.2,
    ) {
        let objects = objs
            .iter()
            .enumerate()
            .map(|(i, &(kind, a, d, seed))| {
                let pos = match d {
                    Some(d) => Direction3::with_distance(a, 0.0, d),
                    None => Direction3::horizontal(a),
                };
                object(&format!("o{i}"), TYPES[kind], pos, scaled(white(seed, 12_000), 0.1))
            })
            .collect();
        let s = scene(objects);
        let file = ScenarioFile {
            layout: common::ring(&ring, dist),
            listeners: vec![ListenerInfo::new("main")],
            environment: EnvironmentInfo::default(),
            noise: NoiseState { band_levels_db: [noise_db; 7], timestamp_s: 0.0 },
            noise_timeline: vec![],
            microphone: None,
            context_interval_s: interval,
        };
        let opts = EngineOptions { block_size: 256, ..EngineOptions::default() };
        let out = render(&s, &file, &Rulebook::builtin(), &SelectionTable::builtin(), &opts).unwrap();
        prop_assert_eq!(out.channels.len(), ring.len());
        for ch in &out.channels {
            prop_assert_eq!(ch.len(), s.duration);
            prop_assert!(ch.iter().all(|v| v.is_finite()));
        }
    }
}
