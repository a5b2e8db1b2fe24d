use crate::engine::ScoreEvent;

/// Frequency in Hz of MIDI key `key` (A4 = 69 = 440 Hz).
pub fn key_to_hz(key: u8) -> f64 {
    440.0 * 2f64.powf((key as f64 - 69.0) / 12.0)
}

/// Maps a channel voice message onto a score event.
///
/// Note-on on channel `n` starts a held note of instrument `n + 1` with
/// `p4` = velocity / 127 and `p5` = key frequency. Note-off (or note-on
/// with velocity 0) releases the held note with the same instrument and
/// key. Everything else is ignored.
pub fn midi_to_event(status: u8, d1: u8, d2: u8) -> Option<ScoreEvent> {
    let instr = (status & 0x0f) as i32 + 1;
    let key = d1 & 0x7f;
    let vel = d2 & 0x7f;
    match status & 0xf0 {
        0x90 if vel > 0 => Some(ScoreEvent::note(
            instr,
            0.0,
            -1.0,
            vec![vel as f64 / 127.0, key_to_hz(key)],
        )),
        0x80 | 0x90 => Some(ScoreEvent::note(-instr, 0.0, 0.0, vec![0.0, key_to_hz(key)])),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn note_on() {
        let ev = midi_to_event(0x90, 69, 127).unwrap();
        assert_eq!(ev.instr, 1);
        assert!(ev.is_held());
        assert_eq!(ev.pfields, vec![1.0, 440.0]);
        let ev = midi_to_event(0x90, 81, 64).unwrap();
        assert_eq!(ev.pfields[1], 880.0);
        assert_eq!(midi_to_event(0x93, 60, 1).unwrap().instr, 4);
    }

    #[test]
    fn note_off_pairs_with_note_on() {
        let on = midi_to_event(0x90, 69, 127).unwrap();
        for off in [midi_to_event(0x80, 69, 0).unwrap(), midi_to_event(0x90, 69, 0).unwrap()] {
            assert!(off.is_release());
            assert_eq!(off.instr, -on.instr);
            assert_eq!(off.pfields[1].to_bits(), on.pfields[1].to_bits());
        }
    }

    #[test]
    fn other_messages_ignored() {
        for status in [0xB0u8, 0xC0, 0xE0, 0xF8, 0x00] {
            assert!(midi_to_event(status, 1, 2).is_none());
        }
    }
}
