//! Score events and the line-based score format:
//!
//! ```text
//! i INSTR START DUR [P4 ...]
//! e [TIME]
//! ; comment
//! ```

use serde::{Deserialize, Serialize};

use super::orc::Diagnostic;
use super::orc::ast::Pos;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Note,
    End,
}

/// A note or end event. Times are seconds relative to the engine time at
/// which the event is submitted.
///
/// A note with a negative instrument number releases the oldest held
/// voice of the matching positive instrument; when the release carries
/// `p5`, only a held voice with an identical `p5` matches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreEvent {
    pub kind: EventKind,
    pub instr: i32,
    pub start: f64,
    /// Negative means held until released.
    pub dur: f64,
    /// p4 onward.
    pub pfields: Vec<f64>,
}

impl ScoreEvent {
    pub fn note(instr: i32, start: f64, dur: f64, pfields: Vec<f64>) -> Self {
        Self {
            kind: EventKind::Note,
            instr,
            start,
            dur,
            pfields,
        }
    }

    pub fn end(at: f64) -> Self {
        Self {
            kind: EventKind::End,
            instr: 0,
            start: at,
            dur: 0.0,
            pfields: Vec::new(),
        }
    }

    pub fn is_held(&self) -> bool {
        self.kind == EventKind::Note && self.dur < 0.0
    }

    pub fn is_release(&self) -> bool {
        self.kind == EventKind::Note && self.instr < 0
    }
}

fn number(tok: &str, what: &str, pos: Pos) -> Result<f64, Diagnostic> {
    match tok.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Diagnostic::new(pos, format!("invalid {what} '{tok}'"))),
    }
}

/// Parses score text. Either every line parses or no event is returned.
///
/// An `e` without a time ends the score when the last finite note seen so
/// far in the same text finishes.
pub fn parse_score(text: &str) -> Result<Vec<ScoreEvent>, Vec<Diagnostic>> {
    let mut events = Vec::new();
    let mut diags = Vec::new();
    let mut last_end: f64 = 0.0;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split(';').next().unwrap_or("");
        let mut fields = Vec::new();
        let mut col = 0;
        for piece in body.split_whitespace() {
            let offset = body[col..].find(piece).unwrap_or(0) + col;
            col = offset + piece.len();
            fields.push((piece, Pos { line, column: offset + 1 }));
        }
        let Some(&(head, head_pos)) = fields.first() else {
            continue;
        };
        let parsed = match head {
            "i" => parse_note(&fields[1..], head_pos),
            "e" => match fields.len() {
                1 => Ok(ScoreEvent::end(last_end)),
                2 => number(fields[1].0, "end time", fields[1].1).and_then(|t| {
                    if t < 0.0 {
                        Err(Diagnostic::new(fields[1].1, "end time must be >= 0"))
                    } else {
                        Ok(ScoreEvent::end(t))
                    }
                }),
                _ => Err(Diagnostic::new(fields[2].1, "'e' takes at most one field")),
            },
            other => Err(Diagnostic::new(head_pos, format!("unknown score statement '{other}'"))),
        };
        match parsed {
            Ok(ev) => {
                if ev.kind == EventKind::Note {
                    last_end = last_end.max(ev.start + ev.dur.max(0.0));
                }
                events.push(ev);
            }
            Err(d) => diags.push(d),
        }
    }

    if diags.is_empty() {
        Ok(events)
    } else {
        Err(diags)
    }
}

fn parse_note(fields: &[(&str, Pos)], head: Pos) -> Result<ScoreEvent, Diagnostic> {
    if fields.len() < 3 {
        return Err(Diagnostic::new(head, "'i' needs INSTR START DUR"));
    }
    let (itok, ipos) = fields[0];
    let instr = match itok.parse::<i32>() {
        Ok(n) if n != 0 => n,
        _ => return Err(Diagnostic::new(ipos, format!("invalid instrument number '{itok}'"))),
    };
    let start = number(fields[1].0, "start time", fields[1].1)?;
    if start < 0.0 {
        return Err(Diagnostic::new(fields[1].1, "start time must be >= 0"));
    }
    let dur = number(fields[2].0, "duration", fields[2].1)?;
    if dur == 0.0 && instr > 0 {
        return Err(Diagnostic::new(fields[2].1, "duration must be nonzero"));
    }
    let pfields = fields[3..]
        .iter()
        .map(|&(t, p)| number(t, "p-field", p))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ScoreEvent::note(instr, start, dur, pfields))
}
