use blockbridge::engine::EngineInstance;
use blockbridge::{Engine, EngineConfig, PerformStatus, Sample, ScoreEvent};
use proptest::prelude::*;

fn render<S: Sample>(config: EngineConfig, orc: &str, sco: &str, blocks: u64) -> Vec<S> {
    let mut e = EngineInstance::<S>::new(config).unwrap();
    assert!(e.load(orc, sco).unwrap().ok);
    let mut out = Vec::new();
    for _ in 0..blocks {
        assert_eq!(e.perform_block(), PerformStatus::Continue);
        out.extend_from_slice(e.spout());
    }
    out
}

const TWO: &str = "
instr 1
  out oscil(p4, p5) * line(1, p3, 0)
endin
instr 2
  out oscil(p4, p5 * 1.5)
endin
";

#[test]
fn rendering_is_deterministic_and_reset_restores_it() {
    let config = EngineConfig::new(48000, 64, 1, 0, 1.0);
    let sco = "i 1 0 0.5 0.4 300\ni 2 0.1 0.2 0.3 500";
    let a = render::<f64>(config, TWO, sco, 500);
    let b = render::<f64>(config, TWO, sco, 500);
    assert_eq!(a, b);

    let mut e = Engine::new(config).unwrap();
    e.load(TWO, sco).unwrap();
    for _ in 0..100 {
        e.perform_block();
    }
    e.reset();
    assert_eq!(e.instruments().count(), 0);
    e.load(TWO, sco).unwrap();
    let mut again = Vec::new();
    for _ in 0..500 {
        e.perform_block();
        again.extend_from_slice(e.spout());
    }
    assert_eq!(a, again);
}

#[test]
fn voices_sum() {
    let config = EngineConfig::new(44100, 32, 1, 0, 1.0);
    let one = render::<f64>(config, TWO, "i 1 0 1 0.4 300", 400);
    let two = render::<f64>(config, TWO, "i 2 0.05 0.5 0.3 500", 400);
    let both = render::<f64>(config, TWO, "i 1 0 1 0.4 300\ni 2 0.05 0.5 0.3 500", 400);
    for ((a, b), c) in one.iter().zip(&two).zip(&both) {
        assert!((a + b - c).abs() <= 1e-12);
    }
}

#[test]
fn silence_without_events() {
    let config = EngineConfig::default();
    assert!(render::<f64>(config, TWO, "", 200).iter().all(|&s| s == 0.0));
    assert!(render::<f32>(config, TWO, "", 200).iter().all(|&s| s == 0.0));
}

#[test]
fn perform_block_sine_matches_oracle() {
    let config = EngineConfig::new(44100, 128, 1, 0, 32768.0);
    let out = render::<f64>(config, "instr 1\n out oscil(32768, 441)\nendin", "i 1 0 2", 345);
    for (k, s) in out.iter().enumerate() {
        let r = (441 * k as u64) % 44100;
        let want = 32768.0 * (std::f64::consts::TAU * r as f64 / 44100.0).sin();
        assert!((s - want).abs() <= 1e-9, "frame {k}: {s} vs {want}");
    }
}

#[test]
fn f32_engine_tracks_f64_engine() {
    let config = EngineConfig::new(44100, 32, 1, 0, 1.0);
    let sco = "i 1 0 1 0.4 300\ni 2 0.05 0.5 0.3 500";
    let wide = render::<f64>(config, TWO, sco, 300);
    let narrow = render::<f32>(config, TWO, sco, 300);
    for (a, b) in wide.iter().zip(&narrow) {
        assert!((a - *b as f64).abs() <= 1e-5);
    }
}

proptest! {
    #[test]
    fn channel_round_trip(name in "[a-z][a-z0-9_]{0,12}", value in proptest::num::f64::ANY) {
        let mut e = Engine::new(EngineConfig::default()).unwrap();
        e.set_channel(&name, value).unwrap();
        prop_assert_eq!(e.get_channel(&name).unwrap().to_bits(), value.to_bits());
    }

    #[test]
    fn live_events_match_score_events(ksmps in 1usize..200, after in 1u64..50, offset in 0.0f64..0.05) {
        // An event sent after `after` blocks with relative start `offset`
        // sounds exactly like a score event at the equivalent absolute time.
        let config = EngineConfig::new(44100, ksmps, 1, 0, 1.0);
        let orc = "instr 1\n out oscil(0.5, 1000) + line(0, 1, 1)\nendin";
        let at = after as f64 * config.block_seconds() + offset;
        let blocks = after + 200;
        let scored = render::<f64>(config, orc, &format!("i 1 {at} 0.02"), blocks);
        let mut e = Engine::new(config).unwrap();
        e.load(orc, "").unwrap();
        let mut live = Vec::new();
        for b in 0..blocks {
            if b == after {
                e.send_event(ScoreEvent::note(1, offset, 0.02, vec![])).unwrap();
            }
            e.perform_block();
            live.extend_from_slice(e.spout());
        }
        prop_assert_eq!(scored, live);
    }

    #[test]
    fn out_of_range_input_reads_zero(ch in 1usize..8) {
        let config = EngineConfig::new(44100, 16, 1, 1, 1.0);
        let mut e = Engine::new(config).unwrap();
        e.load(&format!("instr 1\n out in({ch})\nendin"), "i 1 0 1").unwrap();
        e.spin_mut().iter_mut().for_each(|s| *s = 1.0);
        e.perform_block();
        prop_assert!(e.spout().iter().all(|&s| s == 0.0));
    }
}
