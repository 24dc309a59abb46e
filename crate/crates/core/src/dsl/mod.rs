//! The `.cog` text format.
//!
//! ```text
//! strategy
//! agents Alice Bob
//!
//! agu(n) = <Alice, r, <Bob, r, agu(n+1), leaf[Alice: -2*n-1, Bob: -2*n-2]>, leaf[Alice: -2*n-1, Bob: -2*n]>
//!
//! root agu
//! ```
//!
//! Nested terms become classes of their own, named after the enclosing
//! equation with a numeric suffix and numbered in preorder after all
//! declared equations. [`print`] writes one equation per class, so printing
//! and parsing back gives the same system. `#` starts a line comment.

mod lexer;

use std::collections::{BTreeSet, HashMap};
use std::fmt::{self, Write as _};

use lexer::Tok;

use crate::coterm::{AffineUtility, Agent, Choice, CoSystem, Kind, NodeClass, ParamRef, UtilityFun};
use crate::error::ValidationError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{}:{}: {kind}", pos.line, pos.col)]
pub struct ParseError {
    pub pos: Pos,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseErrorKind {
    #[error("expected {}, found {found}", expected.join(" or "))]
    Syntax { expected: Vec<String>, found: String },
    #[error("unexpected character `{0}`")]
    UnexpectedChar(char),
    #[error("number `{0}` is too large")]
    NumberTooLarge(String),
    #[error("`{0}` is not in the agents list")]
    UnknownAgent(String),
    #[error("no equation named `{0}`")]
    UnknownEquation(String),
    #[error("choices are not allowed in a game")]
    ChoiceInGameKind,
    #[error("a strategy node needs a choice")]
    MissingChoice,
    #[error("equation `{0}` is defined twice")]
    DuplicateEquation(String),
    #[error("agent `{0}` is listed twice")]
    DuplicateAgent(String),
    #[error("payoff for `{0}` is given twice")]
    DuplicatePayoff(String),
    #[error("`{0}` is a reserved word")]
    Reserved(String),
    #[error("{0}")]
    Invalid(ValidationError),
}

enum Term {
    Leaf(Vec<(Agent, AffineUtility)>),
    Node {
        owner: Agent,
        choice: Option<Choice>,
        left: Ref,
        right: Ref,
    },
}

enum Ref {
    Named { name: String, pos: Pos, offset: u64 },
    Inline(Box<Term>),
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
    kind: Kind,
    roster: BTreeSet<Agent>,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn fail<T>(&self, expected: &[&str]) -> PResult<T> {
        Err(ParseError {
            pos: self.pos(),
            kind: ParseErrorKind::Syntax {
                expected: expected.iter().map(|s| s.to_string()).collect(),
                found: self.peek().describe(),
            },
        })
    }

    fn error<T>(pos: Pos, kind: ParseErrorKind) -> PResult<T> {
        Err(ParseError { pos, kind })
    }

    fn is_sym(&self, c: char) -> bool {
        *self.peek() == Tok::Sym(c)
    }

    fn is_word(&self, w: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == w)
    }

    fn sym(&mut self, c: char) -> PResult<()> {
        if self.is_sym(c) {
            self.bump();
            Ok(())
        } else {
            self.fail(&[&format!("`{c}`")])
        }
    }

    fn word(&mut self, w: &str) -> PResult<()> {
        if self.is_word(w) {
            self.bump();
            Ok(())
        } else {
            self.fail(&[&format!("`{w}`")])
        }
    }

    /// A name that is not a reserved word.
    fn ident(&mut self, what: &str) -> PResult<(String, Pos)> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let pos = self.pos();
                if crate::coterm::RESERVED.contains(&s.as_str()) {
                    return Self::error(pos, ParseErrorKind::Reserved(s));
                }
                self.bump();
                Ok((s, pos))
            }
            _ => self.fail(&[what]),
        }
    }

    fn nat(&mut self) -> PResult<u64> {
        match *self.peek() {
            Tok::Nat(k) => {
                self.bump();
                Ok(k)
            }
            _ => self.fail(&["a natural number"]),
        }
    }

    fn agent(&mut self) -> PResult<Agent> {
        let (name, pos) = self.ident("an agent")?;
        let a = Agent::new(name);
        if !self.roster.contains(&a) {
            return Self::error(pos, ParseErrorKind::UnknownAgent(a.name().to_owned()));
        }
        Ok(a)
    }

    /// `(n)` or `(n+k)`.
    fn index(&mut self) -> PResult<u64> {
        self.sym('(')?;
        self.word("n")?;
        let k = if self.is_sym('+') {
            self.bump();
            self.nat()?
        } else {
            0
        };
        self.sym(')')?;
        Ok(k)
    }

    fn file(&mut self) -> PResult<(Vec<(String, Pos, Term)>, String, Pos, u64)> {
        self.kind = if self.is_word("strategy") {
            Kind::Strategy
        } else if self.is_word("game") {
            Kind::Game
        } else {
            return self.fail(&["`strategy`", "`game`"]);
        };
        self.bump();
        self.word("agents")?;
        loop {
            let (name, pos) = self.ident("an agent name")?;
            if !self.roster.insert(Agent::new(name.clone())) {
                return Self::error(pos, ParseErrorKind::DuplicateAgent(name));
            }
            if !matches!(self.peek(), Tok::Ident(s) if !crate::coterm::RESERVED.contains(&s.as_str())) {
                break;
            }
            // an identifier followed by `(` starts the first equation
            if self.toks.get(self.at + 1).is_some_and(|t| t.0 == Tok::Sym('(')) {
                break;
            }
        }
        let mut eqs = Vec::new();
        loop {
            let (name, pos) = self.ident("an equation name")?;
            if self.index()? != 0 {
                return Self::error(pos, ParseErrorKind::Syntax {
                    expected: vec!["`(n)`".into()],
                    found: "an offset".into(),
                });
            }
            self.sym('=')?;
            let term = self.term()?;
            eqs.push((name, pos, term));
            if self.is_word("root") {
                break;
            }
        }
        self.word("root")?;
        let (root, pos) = self.ident("an equation name")?;
        let offset = if self.is_sym('(') { self.index()? } else { 0 };
        if *self.peek() != Tok::Eof {
            return self.fail(&["end of input"]);
        }
        Ok((eqs, root, pos, offset))
    }

    fn term(&mut self) -> PResult<Term> {
        if self.is_word("leaf") {
            self.bump();
            self.leaf()
        } else if self.is_sym('<') {
            self.bump();
            self.node()
        } else {
            self.fail(&["`leaf`", "`<`"])
        }
    }

    fn leaf(&mut self) -> PResult<Term> {
        self.sym('[')?;
        let mut payoffs: Vec<(Agent, AffineUtility)> = Vec::new();
        loop {
            let pos = self.pos();
            let a = self.agent()?;
            if payoffs.iter().any(|(b, _)| *b == a) {
                return Self::error(pos, ParseErrorKind::DuplicatePayoff(a.name().to_owned()));
            }
            self.sym(':')?;
            let u = self.affine()?;
            payoffs.push((a, u));
            if self.is_sym(',') {
                self.bump();
            } else if self.is_sym(']') {
                self.bump();
                return Ok(Term::Leaf(payoffs));
            } else {
                return self.fail(&["`,`", "`]`"]);
            }
        }
    }

    fn node(&mut self) -> PResult<Term> {
        let owner = self.agent()?;
        self.sym(',')?;
        let choice = if self.is_word("l") || self.is_word("r") {
            let (tok, pos) = self.bump();
            if self.kind == Kind::Game {
                return Self::error(pos, ParseErrorKind::ChoiceInGameKind);
            }
            self.sym(',')?;
            Some(if tok == Tok::Ident("l".into()) { Choice::L } else { Choice::R })
        } else {
            if self.kind == Kind::Strategy {
                return Self::error(self.pos(), ParseErrorKind::MissingChoice);
            }
            None
        };
        let left = self.reference()?;
        self.sym(',')?;
        let right = self.reference()?;
        self.sym('>')?;
        Ok(Term::Node {
            owner,
            choice,
            left,
            right,
        })
    }

    fn reference(&mut self) -> PResult<Ref> {
        if self.is_word("leaf") || self.is_sym('<') {
            return Ok(Ref::Inline(Box::new(self.term()?)));
        }
        match self.peek() {
            Tok::Ident(_) => {
                let (name, pos) = self.ident("an equation name")?;
                let offset = self.index()?;
                Ok(Ref::Named { name, pos, offset })
            }
            _ => self.fail(&["an equation name", "`leaf`", "`<`"]),
        }
    }

    /// Affine terms with the sign on the leading term:
    /// `k`, `-k`, `n`, `-n`, `a*n`, followed by an optional `+ b` or `- b`.
    fn affine(&mut self) -> PResult<AffineUtility> {
        let start = self.pos();
        let mut negative = false;
        while self.is_sym('-') {
            self.bump();
            negative = !negative;
        }
        let sign = if negative { -1 } else { 1 };
        let too_large = |s: String| ParseError {
            pos: start,
            kind: ParseErrorKind::NumberTooLarge(s),
        };
        let int = |k: u64| i64::try_from(k).map_err(|_| too_large(k.to_string()));
        let (slope, constant) = if self.is_word("n") {
            self.bump();
            (sign, None)
        } else {
            let k = sign * int(self.nat()?)?;
            if self.is_sym('*') {
                self.bump();
                self.word("n")?;
                (k, None)
            } else {
                (0, Some(k))
            }
        };
        if let Some(k) = constant {
            return Ok(AffineUtility::constant(k));
        }
        let intercept = if self.is_sym('+') || self.is_sym('-') {
            let (op, _) = self.bump();
            let mut neg = op == Tok::Sym('-');
            while self.is_sym('-') {
                self.bump();
                neg = !neg;
            }
            let k = int(self.nat()?)?;
            if neg {
                -k
            } else {
                k
            }
        } else {
            0
        };
        Ok(AffineUtility::new(slope, intercept))
    }
}

struct Lowering<'a> {
    ids: HashMap<&'a str, usize>,
    names: Vec<String>,
    classes: Vec<Option<NodeClass>>,
}

impl<'a> Lowering<'a> {
    fn fresh(&self, base: &str) -> String {
        (1..)
            .map(|i| format!("{base}_{i}"))
            .find(|n| !self.names.contains(n))
            .expect("unbounded supply of names")
    }

    fn term(&mut self, slot: usize, base: &str, term: &'a Term) -> PResult<()> {
        let class = match term {
            Term::Leaf(payoffs) => NodeClass::Leaf(payoffs.iter().cloned().collect::<UtilityFun>()),
            Term::Node {
                owner,
                choice,
                left,
                right,
            } => {
                let left = self.reference(base, left)?;
                let right = self.reference(base, right)?;
                NodeClass::Node {
                    owner: owner.clone(),
                    choice: *choice,
                    left,
                    right,
                }
            }
        };
        self.classes[slot] = Some(class);
        Ok(())
    }

    fn reference(&mut self, base: &str, r: &'a Ref) -> PResult<ParamRef> {
        match r {
            Ref::Named { name, pos, offset } => match self.ids.get(name.as_str()) {
                Some(&id) => Ok(ParamRef::new(id, *offset)),
                None => Parser::error(*pos, ParseErrorKind::UnknownEquation(name.clone())),
            },
            Ref::Inline(term) => {
                let slot = self.classes.len();
                let name = self.fresh(base);
                self.names.push(name);
                self.classes.push(None);
                self.term(slot, base, term)?;
                Ok(ParamRef::at(slot))
            }
        }
    }
}

/// Parses a `.cog` file and validates the resulting system.
pub fn parse(text: &str) -> Result<CoSystem, ParseError> {
    let mut p = Parser {
        toks: lexer::lex(text)?,
        at: 0,
        kind: Kind::Game,
        roster: BTreeSet::new(),
    };
    let (eqs, root, root_pos, root_offset) = p.file()?;

    let mut low = Lowering {
        ids: HashMap::new(),
        names: Vec::new(),
        classes: Vec::new(),
    };
    for (i, (name, pos, _)) in eqs.iter().enumerate() {
        if low.ids.insert(name, i).is_some() {
            return Parser::error(*pos, ParseErrorKind::DuplicateEquation(name.clone()));
        }
        low.names.push(name.clone());
        low.classes.push(None);
    }
    for (i, (name, _, term)) in eqs.iter().enumerate() {
        low.term(i, name, term)?;
    }
    let Some(&root_id) = low.ids.get(root.as_str()) else {
        return Parser::error(root_pos, ParseErrorKind::UnknownEquation(root));
    };
    let sys = CoSystem {
        kind: p.kind,
        roster: p.roster,
        classes: low.classes.into_iter().map(|c| c.expect("every slot is lowered")).collect(),
        names: low.names,
        root: ParamRef::new(root_id, root_offset),
    };
    sys.validate().map_err(|e| ParseError {
        pos: Pos { line: 1, col: 1 },
        kind: ParseErrorKind::Invalid(e),
    })?;
    Ok(sys)
}

struct Index(u64);

impl fmt::Display for Index {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            0 => f.write_str("(n)"),
            k => write!(f, "(n+{k})"),
        }
    }
}

/// Canonical text of a valid system: one equation per class, in class order.
pub fn print(sys: &CoSystem) -> String {
    let mut out = String::new();
    let agents: Vec<&str> = sys.roster.iter().map(Agent::name).collect();
    let _ = writeln!(out, "{}\nagents {}\n", sys.kind, agents.join(" "));
    for (name, class) in sys.names.iter().zip(&sys.classes) {
        let _ = write!(out, "{name}(n) = ");
        match class {
            NodeClass::Leaf(payoff) => {
                let body: Vec<String> = payoff.iter().map(|(a, u)| format!("{a}: {u}")).collect();
                let _ = writeln!(out, "leaf[{}]", body.join(", "));
            }
            NodeClass::Node {
                owner,
                choice,
                left,
                right,
            } => {
                let choice = choice.map(|c| format!("{c}, ")).unwrap_or_default();
                let _ = writeln!(
                    out,
                    "<{owner}, {choice}{}{}, {}{}>",
                    sys.names[left.class],
                    Index(left.offset),
                    sys.names[right.class],
                    Index(right.offset)
                );
            }
        }
    }
    let root = &sys.names[sys.root.class];
    match sys.root.offset {
        0 => {
            let _ = writeln!(out, "\nroot {root}");
        }
        k => {
            let _ = writeln!(out, "\nroot {root}{}", Index(k));
        }
    }
    out
}
