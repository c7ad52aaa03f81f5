use std::sync::Arc;

use carecall_core::dispatch::{Channel, ChannelSet, DispatchConfig, Dispatcher};
use carecall_core::grid::DEFAULT_LABELS;
use carecall_core::model::{
    CameraConfig, Hand, HandPreference, IntentScheme, JointId, JointSample, MappingMode, SessionConfig, SkeletonFrame,
};
use carecall_core::session::{EnqueueStatus, Session, SessionEvent};
use carecall_core::trace::{generate, GestureScript};
use proptest::prelude::*;

fn frame(i: u64, left: Option<[f64; 3]>, right: Option<[f64; 3]>) -> SkeletonFrame {
    let mut joints = Vec::new();
    if let Some([x, y, z]) = left {
        joints.push(JointSample::tracked(JointId::LeftHand, x, y, z));
    }
    if let Some([x, y, z]) = right {
        joints.push(JointSample::tracked(JointId::RightHand, x, y, z));
    }
    SkeletonFrame::new(i, i as f64 * 1000.0 / 30.0, joints)
}

fn labels() -> Vec<Arc<str>> {
    DEFAULT_LABELS.iter().map(|&l| Arc::from(l)).collect()
}

#[test]
fn small_depth_wobble_never_switches() {
    let config = SessionConfig {
        hand_preference: HandPreference::AutoNearness,
        ..SessionConfig::default()
    };
    let mut s = Session::new(config, None).unwrap();
    for i in 0..500u64 {
        let wobble = 0.05 * (i as f64 * 0.37).sin();
        let ev = s.process_frame(&frame(i, Some([200.0, 200.0, 2.0 + wobble]), Some([400.0, 200.0, 2.0])), None);
        assert!(matches!(ev[0], SessionEvent::Cursor { switched: false, .. }));
    }
    assert_eq!(s.counters().switches, 0);
    assert_eq!(s.primary(), Some(Hand::Left));
    // a clear gap does switch
    s.process_frame(&frame(500, Some([200.0, 200.0, 2.2]), Some([400.0, 200.0, 2.0])), None);
    assert_eq!(s.primary(), Some(Hand::Right));
    assert_eq!(s.counters().switches, 1);
}

#[test]
fn selection_fans_out_to_configured_channels() {
    let dir = tempfile::tempdir().unwrap();
    let dispatch = Dispatcher::new(
        DispatchConfig {
            outbox: dir.path().join("o.jsonl"),
            message_store_dir: dir.path().join("m"),
            ..DispatchConfig::default()
        },
        &labels(),
    )
    .unwrap();
    let config = SessionConfig {
        channels: ChannelSet::from_iter([Channel::Sms, Channel::Voice]),
        ..SessionConfig::default()
    };
    let mut s = Session::new(config, Some(dispatch.handle())).unwrap();
    // image center maps to the screen center, cell 4
    let mut last = Vec::new();
    for i in 0..60 {
        last = s.process_frame(&frame(i, Some([320.0, 240.0, 2.0]), None), None);
        if i < 59 {
            assert!(!last.iter().any(|e| matches!(e, SessionEvent::Selection(_))), "frame {i}");
        }
    }
    let kinds: Vec<&str> = last
        .iter()
        .map(|e| match e {
            SessionEvent::Cursor { .. } => "cursor",
            SessionEvent::Dwell { .. } => "dwell",
            SessionEvent::Selection(_) => "selection",
            SessionEvent::Dispatch { .. } => "dispatch",
            SessionEvent::Error { .. } => "error",
        })
        .collect();
    assert_eq!(kinds, ["cursor", "dwell", "selection", "dispatch", "dispatch"]);
    match (&last[2], &last[3], &last[4]) {
        (
            SessionEvent::Selection(sel),
            SessionEvent::Dispatch { channel: a, status: EnqueueStatus::Queued, .. },
            SessionEvent::Dispatch { channel: b, .. },
        ) => {
            assert_eq!(&*sel.label, "Emergency");
            assert_eq!(sel.frame_index, 59);
            assert_eq!((*a, *b), (Channel::Sms, Channel::Voice));
        }
        other => panic!("{other:?}"),
    }
    if let SessionEvent::Dwell { count, threshold, .. } = &last[1] {
        assert_eq!((*count, *threshold), (60, 60));
    }
}

#[test]
fn full_queue_surfaces_rejections_and_frames_continue() {
    let dir = tempfile::tempdir().unwrap();
    let dispatch = Dispatcher::new(
        DispatchConfig {
            outbox: dir.path().join("o.jsonl"),
            message_store_dir: dir.path().join("m"),
            queue_capacity: 1,
            ..DispatchConfig::default()
        },
        &labels(),
    )
    .unwrap();
    let config = SessionConfig {
        dwell_seconds: 0.1,
        ..SessionConfig::default()
    };
    let mut s = Session::new(config, Some(dispatch.handle())).unwrap();
    let mut statuses = Vec::new();
    for i in 0..60 {
        let ev = s.process_frame(&frame(i, Some([320.0, 240.0, 2.0]), None), None);
        assert!(ev[0].is_cursor());
        statuses.extend(ev.iter().filter_map(|e| match e {
            SessionEvent::Dispatch { status, reason, .. } => Some((*status, reason.clone())),
            _ => None,
        }));
    }
    assert_eq!(s.counters().frames, 60);
    assert!(statuses.len() >= 4);
    assert_eq!(statuses[0].0, EnqueueStatus::Queued);
    assert!(statuses[2..].iter().all(|(st, r)| *st == EnqueueStatus::Rejected && r.as_deref() == Some("dispatch queue full")));
    assert!(s.counters().dispatch_rejected >= 1);
}

#[test]
fn relative_mode_switch_re_anchors() {
    let config = SessionConfig {
        hand_preference: HandPreference::AutoNearness,
        mapping_mode: MappingMode::DynamicRelative,
        ..SessionConfig::default()
    };
    let mut s = Session::new(config, None).unwrap();
    for i in 0..10 {
        s.process_frame(&frame(i, Some([100.0 + i as f64 * 5.0, 300.0, 1.5]), Some([500.0, 100.0, 2.0])), None);
    }
    let before = s.cursor();
    // right hand jumps in front; its far-away position must not leak into a delta
    let ev = s.process_frame(&frame(10, Some([150.0, 300.0, 2.0]), Some([500.0, 100.0, 1.5])), None);
    assert!(matches!(ev[0], SessionEvent::Cursor { switched: true, primary: Some(Hand::Right), .. }));
    assert_eq!(s.cursor(), carecall_core::mapping::CursorPos { x: 683, y: 384 });
    assert_ne!(before, s.cursor());
    let focus = s.mapping().focus.unwrap();
    assert_eq!(focus.image, (500.0, 100.0));
}

fn replay(config: &SessionConfig, records: &[carecall_core::trace::TraceRecord]) -> Vec<SessionEvent> {
    let mut s = Session::new(config.clone(), None).unwrap();
    records.iter().flat_map(|r| s.process_record(r)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn replay_is_deterministic(
        seed in any::<u64>(),
        noise in 0.0..6.0f64,
        mode in prop_oneof![
            Just(MappingMode::FixedFactor),
            Just(MappingMode::DynamicAbsolute),
            Just(MappingMode::DynamicRelative),
        ],
        pref in prop_oneof![
            Just(HandPreference::Left),
            Just(HandPreference::AutoNearness),
            Just(HandPreference::AutoActivity),
        ],
        kinetic in any::<bool>(),
        scheme in prop_oneof![Just(IntentScheme::Dwell), Just(IntentScheme::Clasp), Just(IntentScheme::Fist)],
    ) {
        let script = GestureScript::from_toml(r#"
            [[segment]]
            frames = 70
            left = [[100.0, 100.0, 2.0], [300.0, 250.0, 1.7]]
            right = [[500.0, 300.0, 2.2]]
            mask = "open"
            [[segment]]
            frames = 40
            right = [[520.0, 120.0, 1.5], [320.0, 240.0, 1.5]]
            left = [[330.0, 240.0, 1.5]]
            mask = "fist"
        "#).unwrap();
        let records = generate(&script, &CameraConfig::default(), seed, noise);
        let config = SessionConfig {
            mapping_mode: mode,
            hand_preference: pref,
            kinetic_enabled: kinetic,
            intent_scheme: scheme,
            ..SessionConfig::default()
        };
        let a = replay(&config, &records);
        let b = replay(&config, &records);
        prop_assert_eq!(a.iter().filter(|e| e.is_cursor()).count(), records.len());
        prop_assert_eq!(a, b);
    }
}
