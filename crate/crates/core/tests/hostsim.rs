use blockbridge::bridge::{ControlMessage, Envelope, ProcessorState};
use blockbridge::hostsim::{inject_main_task, render_blocks, run_sim, HostConfig, ThreadMode};
use blockbridge::EngineConfig;
use proptest::prelude::*;

const ORC: &str = "instr 1\n out oscil(12000, 330) * line(1, p3, 0.2)\nendin";
const SCO: &str = "i 1 0 3";

fn processor(config: EngineConfig) -> ProcessorState<f64> {
    let mut p = ProcessorState::new(config).unwrap();
    let port = p.port();
    let msgs = [
        ControlMessage::CompileOrc(ORC.into()),
        ControlMessage::ReadScore(SCO.into()),
        ControlMessage::Start,
    ];
    for (seq, msg) in msgs.into_iter().enumerate() {
        port_push(&port, seq as u64, msg);
    }
    p.apply_messages();
    p
}

fn port_push(port: &blockbridge::bridge::ProcessorPort, seq: u64, msg: ControlMessage) {
    // Goes through the wire form to mirror a real control context.
    let text = blockbridge::bridge::message::encode(&Envelope { seq, msg });
    let env = blockbridge::bridge::message::decode(&text).unwrap();
    port.send(env).unwrap();
}

fn config() -> EngineConfig {
    EngineConfig::new(44100, 32, 1, 0, 32768.0)
}

#[test]
fn unloaded_host_matches_offline_render() {
    let host = HostConfig::new(44100, ThreadMode::Dedicated);
    let dur = 2.0;
    let online = run_sim(&host, &mut processor(config()), dur, |_| 0.0);
    let offline = render_blocks::<f64>(ORC, SCO, config(), dur + 0.01).unwrap().host_samples();
    assert_eq!(online.dropouts, 0);
    let n = online.rendered.len();
    assert_eq!(online.rendered, offline[..n]);
}

#[test]
fn late_callbacks_still_advance_the_engine() {
    let host = HostConfig::new(44100, ThreadMode::Dedicated);
    let period = host.period();
    let clean = run_sim(&host, &mut processor(config()), 1.0, |_| 0.0);
    let rough = run_sim(&host, &mut processor(config()), 1.0, |k| if k % 5 == 0 { 1.5 * period } else { 0.2 * period });
    assert!(rough.dropouts > 0);
    assert_eq!(clean.rendered.len(), rough.rendered.len());
    for (i, (a, b)) in clean.rendered.chunks(host.quantum).zip(rough.rendered.chunks(host.quantum)).enumerate() {
        if rough.dropped_callbacks.contains(&(i as u64)) {
            assert!(b.iter().all(|&s| s == 0.0));
        } else {
            assert_eq!(a, b, "callback {i}");
        }
    }
}

#[test]
fn overlapping_tasks_add_up() {
    let base = HostConfig::new(44100, ThreadMode::Shared);
    let split = inject_main_task(&inject_main_task(&base, 0.5, 0.06), 0.52, 0.04);
    let merged = inject_main_task(&base, 0.5, 0.10);
    let a = run_sim(&split, &mut processor(config()), 1.5, |_| 0.0);
    let b = run_sim(&merged, &mut processor(config()), 1.5, |_| 0.0);
    assert_eq!(a.dropped_callbacks, b.dropped_callbacks);
    assert!(a.dropouts > 0);
}

#[test]
fn shared_thread_suffers_main_thread_work() {
    let mut shared = HostConfig::new(44100, ThreadMode::Shared);
    for i in 0..5 {
        shared = inject_main_task(&shared, 0.1 + 0.3 * i as f64, 0.05);
    }
    let mut dedicated = shared.clone();
    dedicated.mode = ThreadMode::Dedicated;
    let s = run_sim(&shared, &mut processor(config()), 2.0, |_| 0.0);
    let d = run_sim(&dedicated, &mut processor(config()), 2.0, |_| 0.0);
    assert_eq!(d.dropouts, 0);
    // Every callback whose whole period falls inside a task misses.
    let whole = (0.05 / shared.period()).floor() as u64 - 1;
    assert!(s.dropouts >= 5 * whole, "{} dropouts", s.dropouts);
    assert!(s.worst_lateness > 0.04);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn more_load_never_fewer_dropouts(lo in 0.0f64..1.5, extra in 0.0f64..1.0, tasks in proptest::collection::vec((0.0f64..1.0, 0.0f64..0.05), 0..4)) {
        let mut host = HostConfig::new(44100, ThreadMode::Shared);
        for (start, dur) in tasks {
            host = inject_main_task(&host, start, dur);
        }
        let period = host.period();
        let light = run_sim(&host, &mut processor(config()), 1.0, |_| lo * period);
        let heavy = run_sim(&host, &mut processor(config()), 1.0, |_| (lo + extra) * period);
        prop_assert!(heavy.dropouts >= light.dropouts);
        prop_assert_eq!(light.callbacks_total, heavy.callbacks_total);
    }

    #[test]
    fn callback_count_covers_duration(dur in 0.0f64..3.0, quantum in 1usize..512) {
        let mut host = HostConfig::new(44100, ThreadMode::Dedicated);
        host.quantum = quantum;
        let r = run_sim(&host, &mut processor(config()), dur, |_| 0.0);
        let covered = r.callbacks_total as f64 * quantum as f64 / 44100.0;
        prop_assert!(covered + 1e-9 >= dur);
        prop_assert!(covered - host.period() < dur + 1e-9);
        prop_assert_eq!(r.rendered.len(), r.callbacks_total as usize * quantum);
    }
}
