use std::fmt;

use num_bigint::BigInt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    X,
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Neg,
    Abs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Max,
    Min,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Gt,
    Lt,
    Eq,
    Geq,
    Leq,
}

/// An expression of the prefix DSL.
///
/// Comparisons are not expressions: they only exist inside the condition
/// slot of `ITE`, which the [`Cond`] type enforces structurally.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Lit(BigInt),
    Var(Var),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
    Ite(Box<Cond>, Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Cond {
    pub op: CmpOp,
    pub lhs: Expr,
    pub rhs: Expr,
}

impl Var {
    pub const ALL: [Var; 2] = [Var::X, Var::Y];

    pub fn name(self) -> &'static str {
        match self {
            Var::X => "x",
            Var::Y => "y",
        }
    }
}

impl UnaryOp {
    pub const ALL: [UnaryOp; 2] = [UnaryOp::Neg, UnaryOp::Abs];

    pub fn name(self) -> &'static str {
        match self {
            UnaryOp::Neg => "NEG",
            UnaryOp::Abs => "ABS",
        }
    }
}

impl BinaryOp {
    pub const ALL: [BinaryOp; 7] = [
        BinaryOp::Add,
        BinaryOp::Sub,
        BinaryOp::Mul,
        BinaryOp::Div,
        BinaryOp::Mod,
        BinaryOp::Max,
        BinaryOp::Min,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BinaryOp::Add => "ADD",
            BinaryOp::Sub => "SUB",
            BinaryOp::Mul => "MUL",
            BinaryOp::Div => "DIV",
            BinaryOp::Mod => "MOD",
            BinaryOp::Max => "MAX",
            BinaryOp::Min => "MIN",
        }
    }

    /// DIV and MOD are the only operators that can reject.
    pub fn is_partial(self) -> bool {
        matches!(self, BinaryOp::Div | BinaryOp::Mod)
    }
}

impl CmpOp {
    pub const ALL: [CmpOp; 5] = [CmpOp::Gt, CmpOp::Lt, CmpOp::Eq, CmpOp::Geq, CmpOp::Leq];

    pub fn name(self) -> &'static str {
        match self {
            CmpOp::Gt => "GT",
            CmpOp::Lt => "LT",
            CmpOp::Eq => "EQ",
            CmpOp::Geq => "GEQ",
            CmpOp::Leq => "LEQ",
        }
    }
}

impl Expr {
    pub fn lit(value: i64) -> Expr {
        Expr::Lit(BigInt::from(value))
    }

    pub fn var(v: Var) -> Expr {
        Expr::Var(v)
    }

    pub fn unary(op: UnaryOp, a: Expr) -> Expr {
        Expr::Unary(op, Box::new(a))
    }

    pub fn binary(op: BinaryOp, a: Expr, b: Expr) -> Expr {
        Expr::Binary(op, Box::new(a), Box::new(b))
    }

    pub fn ite(cond: Cond, then: Expr, otherwise: Expr) -> Expr {
        Expr::Ite(Box::new(cond), Box::new(then), Box::new(otherwise))
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, Expr::Lit(_) | Expr::Var(_))
    }

    /// Leaves have depth 0; every operator node (including the comparison
    /// inside an `ITE` condition) adds one level.
    pub fn depth(&self) -> usize {
        match self {
            Expr::Lit(_) | Expr::Var(_) => 0,
            Expr::Unary(_, a) => 1 + a.depth(),
            Expr::Binary(_, a, b) => 1 + a.depth().max(b.depth()),
            Expr::Ite(c, t, e) => 1 + c.depth().max(t.depth()).max(e.depth()),
        }
    }

    /// Number of nodes, counting the comparison node of each condition.
    pub fn size(&self) -> usize {
        match self {
            Expr::Lit(_) | Expr::Var(_) => 1,
            Expr::Unary(_, a) => 1 + a.size(),
            Expr::Binary(_, a, b) => 1 + a.size() + b.size(),
            Expr::Ite(c, t, e) => 1 + 1 + c.lhs.size() + c.rhs.size() + t.size() + e.size(),
        }
    }

    pub fn render(&self) -> String {
        self.to_string()
    }
}

impl Cond {
    pub fn new(op: CmpOp, lhs: Expr, rhs: Expr) -> Cond {
        Cond { op, lhs, rhs }
    }

    pub fn depth(&self) -> usize {
        1 + self.lhs.depth().max(self.rhs.depth())
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Lit(v) => write!(f, "{v}"),
            Expr::Var(v) => f.write_str(v.name()),
            Expr::Unary(op, a) => write!(f, "{}({a})", op.name()),
            Expr::Binary(op, a, b) => write!(f, "{}({a}, {b})", op.name()),
            Expr::Ite(c, t, e) => write!(f, "ITE({c}, {t}, {e})"),
        }
    }
}

impl fmt::Display for Cond {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({}, {})", self.op.name(), self.lhs, self.rhs)
    }
}
