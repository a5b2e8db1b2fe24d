//! Orchestra mini-language: parsing, semantic checks and compilation to a
//! flat stack code evaluated once per sample frame.

pub mod ast;
mod parser;

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::engine::EngineConfig;
use crate::sample::Sample;
use ast::{BinOp, Expr, InstrAst, Pos, Stmt};

pub use parser::parse;

/// A compile error located in the source text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl Diagnostic {
    pub(crate) fn new(pos: Pos, message: impl Into<String>) -> Self {
        Self {
            line: pos.line,
            column: pos.column,
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: {}", self.line, self.column, self.message)
    }
}

/// Outcome of compiling orchestra source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompileResult {
    pub ok: bool,
    /// Instrument numbers defined by the source, in source order.
    pub instruments: Vec<u32>,
    pub diagnostics: Vec<Diagnostic>,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Op<S> {
    Const(S),
    /// 1-based p-field index.
    PField(usize),
    Local(usize),
    Neg,
    Add,
    Sub,
    Mul,
    Div,
    /// Pops amp, freq; owns oscillator slot `n` of the voice.
    Oscil(usize),
    /// Pops from, dur, to.
    Line,
    In(usize),
    /// Index into the instrument's block-rate channel cache.
    Chan(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Code<S> {
    Assign(usize, Vec<Op<S>>),
    Out(Vec<Vec<Op<S>>>),
}

/// A compiled instrument, ready for per-sample evaluation.
#[derive(Debug, Clone)]
pub struct Instrument<S> {
    def: InstrAst,
    pub(crate) code: Vec<Code<S>>,
    pub(crate) n_locals: usize,
    pub(crate) n_osc: usize,
    pub(crate) max_stack: usize,
    pub(crate) channels: Vec<String>,
    /// Channel values sampled at the start of the current block.
    pub(crate) chan_cache: Vec<S>,
}

impl<S> Instrument<S> {
    pub fn number(&self) -> u32 {
        self.def.number
    }

    /// The statement list this instrument was compiled from.
    pub fn body(&self) -> &[Stmt] {
        &self.def.body
    }

    /// Bus channels read by this instrument.
    pub fn channels(&self) -> &[String] {
        &self.channels
    }
}

struct Compiler<'c, S> {
    config: &'c EngineConfig,
    locals: HashMap<String, usize>,
    channels: Vec<String>,
    n_osc: usize,
    diags: Vec<Diagnostic>,
    _s: std::marker::PhantomData<S>,
}

impl<S: Sample> Compiler<'_, S> {
    fn constant(&self, name: &str) -> Option<f64> {
        Some(match name {
            "sr" => self.config.sr as f64,
            "ksmps" => self.config.ksmps as f64,
            "nchnls" => self.config.nchnls as f64,
            "nchnls_i" => self.config.nchnls_i as f64,
            "zerodbfs" => self.config.zerodbfs,
            _ => return None,
        })
    }

    fn expr(&mut self, e: &Expr, out: &mut Vec<Op<S>>) {
        match e {
            Expr::Num(n) => out.push(Op::Const(S::from_real(*n))),
            Expr::PField(n) => out.push(Op::PField(*n)),
            Expr::Ident(name, pos) => {
                if let Some(&slot) = self.locals.get(name) {
                    out.push(Op::Local(slot));
                } else if let Some(v) = self.constant(name) {
                    out.push(Op::Const(S::from_real(v)));
                } else {
                    self.diags
                        .push(Diagnostic::new(*pos, format!("unknown identifier '{name}'")));
                    out.push(Op::Const(S::zero()));
                }
            }
            Expr::Neg(inner) => {
                self.expr(inner, out);
                out.push(Op::Neg);
            }
            Expr::Binary(l, op, r) => {
                self.expr(l, out);
                self.expr(r, out);
                out.push(match op {
                    BinOp::Add => Op::Add,
                    BinOp::Sub => Op::Sub,
                    BinOp::Mul => Op::Mul,
                    BinOp::Div => Op::Div,
                });
            }
            Expr::Oscil(amp, freq) => {
                self.expr(amp, out);
                self.expr(freq, out);
                out.push(Op::Oscil(self.n_osc));
                self.n_osc += 1;
            }
            Expr::Line(from, dur, to) => {
                self.expr(from, out);
                self.expr(dur, out);
                self.expr(to, out);
                out.push(Op::Line);
            }
            Expr::In(ch) => out.push(Op::In(*ch)),
            Expr::Chan(name) => {
                let idx = match self.channels.iter().position(|c| c == name) {
                    Some(i) => i,
                    None => {
                        self.channels.push(name.clone());
                        self.channels.len() - 1
                    }
                };
                out.push(Op::Chan(idx));
            }
        }
    }

    fn instrument(mut self, def: InstrAst) -> Result<Instrument<S>, Vec<Diagnostic>> {
        let mut code = Vec::with_capacity(def.body.len());
        let mut seen_out: Option<Pos> = None;
        for stmt in &def.body {
            match stmt {
                Stmt::Assign { name, value, pos } => {
                    if self.constant(name).is_some() {
                        self.diags
                            .push(Diagnostic::new(*pos, format!("cannot assign to built-in '{name}'")));
                        continue;
                    }
                    // The right-hand side is resolved before the target
                    // becomes visible.
                    let mut ops = Vec::new();
                    self.expr(value, &mut ops);
                    let next = self.locals.len();
                    let slot = *self.locals.entry(name.clone()).or_insert(next);
                    code.push(Code::Assign(slot, ops));
                }
                Stmt::Out { channels, pos } => {
                    if let Some(first) = seen_out {
                        self.diags.push(Diagnostic::new(
                            *pos,
                            format!("only one 'out' statement allowed (first at line {})", first.line),
                        ));
                        continue;
                    }
                    seen_out = Some(*pos);
                    if channels.len() > self.config.nchnls {
                        self.diags.push(Diagnostic::new(
                            *pos,
                            format!(
                                "'out' has {} channels but the engine has nchnls={}",
                                channels.len(),
                                self.config.nchnls
                            ),
                        ));
                        continue;
                    }
                    let exprs = channels
                        .iter()
                        .map(|e| {
                            let mut ops = Vec::new();
                            self.expr(e, &mut ops);
                            ops
                        })
                        .collect();
                    code.push(Code::Out(exprs));
                }
            }
        }
        if !self.diags.is_empty() {
            return Err(self.diags);
        }
        let max_stack = code
            .iter()
            .flat_map(|c| match c {
                Code::Assign(_, ops) => std::slice::from_ref(ops).iter(),
                Code::Out(v) => v.iter(),
            })
            .map(|ops| stack_depth(ops))
            .max()
            .unwrap_or(0);
        let n_chan = self.channels.len();
        Ok(Instrument {
            def,
            code,
            n_locals: self.locals.len(),
            n_osc: self.n_osc,
            max_stack,
            channels: self.channels,
            chan_cache: vec![S::zero(); n_chan],
        })
    }
}

fn stack_depth<S>(ops: &[Op<S>]) -> usize {
    let mut depth: usize = 0;
    let mut max = 0;
    for op in ops {
        match op {
            Op::Const(_) | Op::PField(_) | Op::Local(_) | Op::In(_) | Op::Chan(_) => depth += 1,
            Op::Neg => {}
            Op::Add | Op::Sub | Op::Mul | Op::Div | Op::Oscil(_) => depth -= 1,
            Op::Line => depth -= 2,
        }
        max = max.max(depth);
    }
    max
}

/// Parses and checks `source` against `config`. On success every
/// instrument in the source is returned; nothing is partially accepted.
pub fn compile<S: Sample>(
    source: &str,
    config: &EngineConfig,
) -> Result<Vec<Instrument<S>>, Vec<Diagnostic>> {
    let asts = parse(source)?;
    let mut diags = Vec::new();
    let mut seen: HashMap<u32, Pos> = HashMap::new();
    let mut out = Vec::with_capacity(asts.len());
    for def in asts {
        if let Some(prev) = seen.insert(def.number, def.pos) {
            diags.push(Diagnostic::new(
                def.pos,
                format!("instr {} already defined at line {}", def.number, prev.line),
            ));
            continue;
        }
        let c = Compiler::<S> {
            config,
            locals: HashMap::new(),
            channels: Vec::new(),
            n_osc: 0,
            diags: Vec::new(),
            _s: std::marker::PhantomData,
        };
        match c.instrument(def) {
            Ok(i) => out.push(i),
            Err(d) => diags.extend(d),
        }
    }
    if diags.is_empty() {
        Ok(out)
    } else {
        diags.sort_by_key(|d| (d.line, d.column));
        Err(diags)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> EngineConfig {
        EngineConfig::new(44100, 32, 2, 1, 32768.0)
    }

    #[test]
    fn unknown_identifier_located() {
        let err = compile::<f64>("instr 1\n out undefined_var\nendin", &cfg()).unwrap_err();
        assert_eq!(err.len(), 1);
        assert_eq!(err[0].line, 2);
        assert!(err[0].message.contains("unknown identifier"));
    }

    #[test]
    fn self_reference_before_assignment_rejected() {
        assert!(compile::<f64>("instr 1\n x = x + 1\n out x\nendin", &cfg()).is_err());
        assert!(compile::<f64>("instr 1\n x = 1\n x = x + 1\n out x\nendin", &cfg()).is_ok());
    }

    #[test]
    fn out_rules() {
        assert!(compile::<f64>("instr 1\n out 1, 2, 3\nendin", &cfg()).is_err());
        assert!(compile::<f64>("instr 1\n out 1\n out 2\nendin", &cfg()).is_err());
        assert!(compile::<f64>("instr 1\n a = 1\nendin", &cfg()).is_ok());
    }

    #[test]
    fn builtins_fold_to_constants() {
        let i = compile::<f64>("instr 1\n out sr / ksmps\nendin", &cfg()).unwrap();
        let Code::Out(v) = &i[0].code[0] else { panic!() };
        assert_eq!(v[0], vec![Op::Const(44100.0), Op::Const(32.0), Op::Div]);
        assert!(compile::<f64>("instr 1\n sr = 1\nendin", &cfg()).is_err());
    }

    #[test]
    fn duplicate_instrument_in_one_source() {
        let err = compile::<f64>("instr 1\nendin\ninstr 1\nendin", &cfg()).unwrap_err();
        assert_eq!(err[0].line, 3);
    }

    #[test]
    fn resources_counted() {
        let i = compile::<f64>(
            "instr 3\n a = oscil(oscil(1, 2), 3)\n b = chan(\"x\") + chan(\"y\") + chan(\"x\")\n out line(a, b, 1 + 2 * 3)\nendin",
            &cfg(),
        )
        .unwrap();
        assert_eq!(i[0].n_osc, 2);
        assert_eq!(i[0].channels(), ["x", "y"]);
        assert_eq!(i[0].n_locals, 2);
        assert_eq!(i[0].max_stack, 5);
    }
}
