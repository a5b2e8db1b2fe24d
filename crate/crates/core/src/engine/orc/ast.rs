/// 1-based source position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub column: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    PField(usize),
    Ident(String, Pos),
    Neg(Box<Expr>),
    Binary(Box<Expr>, BinOp, Box<Expr>),
    Oscil(Box<Expr>, Box<Expr>),
    Line(Box<Expr>, Box<Expr>, Box<Expr>),
    In(usize),
    Chan(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Stmt {
    Assign { name: String, value: Expr, pos: Pos },
    Out { channels: Vec<Expr>, pos: Pos },
}

#[derive(Debug, Clone, PartialEq)]
pub struct InstrAst {
    pub number: u32,
    pub pos: Pos,
    pub body: Vec<Stmt>,
}
