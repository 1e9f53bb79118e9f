//! The textual modeling language: lexer, parser, validator, pretty-printer.
//!
//! A model file declares a named system over enumerated variables, an
//! initialization, named actions, and an optional `run` composition:
//!
//! ```text
//! # Level crossing, one train.
//! system crossing {
//!   var light : { green, red }
//!   var loc   : { A, B, C, D }
//!
//!   init light := red, loc := B
//!
//!   action A1 { light = red -> light := green }
//!   action A3 { loc = B & light = green -> (loc := C [] loc := D) }
//!
//!   run A1 [] A3
//! }
//! ```
//!
//! Operator precedence, loosest to tightest: `[]`, `//`, `;` and `;;`, `\\`,
//! prefix guard `->`; all binary operators associate to the left and
//! parentheses override. So `A1 ; A2 \\ A3` is `A1 ; (A2 \\ A3)`, and a guard
//! extends to the smallest following action: `p -> A1 [] A2` is
//! `(p -> A1) [] A2`. Predicates use `=`, `!=`, `in { .. }` on variables,
//! combined with `!`, `&`, `|`, `=>` (that order, tightest first).
//!
//! Identifiers are alphanumeric words (`loc`, `A1`, `0`); `at[K]`-style
//! subscripted names are ordinary variables with the brackets in their name,
//! and `var at[L, A, B] : { a, null }` declares one such variable per
//! subscript. In value position a word that names a declared variable is a
//! variable copy; anything else is a domain literal. Comments run from `#` to
//! end of line.
//!
//! An action body may reference the labels of actions declared earlier in the
//! file (so compositions like `(fJ \\ tN) // (fJ \\ tI)` can be named); the
//! `run` clause composes labels with `[]` and `//` only, since the scheduler
//! picks among named actions. Omitting `run` means demonic choice over all
//! actions in declaration order.

use std::collections::HashSet;
use std::fmt;

use crate::action::{ActionError, ActionExpr};
use crate::pred::{Operand, PredExpr};
use crate::space::{SpaceError, StateSpace, VarDecl};

/// Nesting bound for expressions; keeps arbitrary input from exhausting the
/// stack.
const MAX_DEPTH: u32 = 200;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub file: Option<String>,
    pub line: u32,
    pub col: u32,
    pub message: String,
    /// The offending token's text, when the error is positional.
    pub found: Option<String>,
}

impl ParseError {
    pub fn with_file(mut self, file: impl Into<String>) -> ParseError {
        self.file = Some(file.into());
        self
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(file) = &self.file {
            write!(f, "{}:", file)?;
        }
        write!(f, "{}:{}: {}", self.line, self.col, self.message)?;
        if let Some(found) = &self.found {
            write!(f, " (found `{}`)", found)?;
        }
        Ok(())
    }
}

impl std::error::Error for ParseError {}

// ---------------- lexer ----------------

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    KwSystem,
    KwVar,
    KwInit,
    KwAction,
    KwRun,
    KwExport,
    KwImport,
    KwAbort,
    KwSkip,
    KwTrue,
    KwFalse,
    KwIn,
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    BoxOp,    // []
    Comma,
    Colon,
    Semi,     // ;
    SemiSemi, // ;;
    Becomes,  // :=
    Eq,
    Neq,
    Arrow,   // ->
    Implies, // =>
    Amp,
    Pipe,
    Bang,
    Prio, // //
    Dep,  // \\
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{}`", s),
            Tok::KwSystem => "`system`".into(),
            Tok::KwVar => "`var`".into(),
            Tok::KwInit => "`init`".into(),
            Tok::KwAction => "`action`".into(),
            Tok::KwRun => "`run`".into(),
            Tok::KwExport => "`export`".into(),
            Tok::KwImport => "`import`".into(),
            Tok::KwAbort => "`abort`".into(),
            Tok::KwSkip => "`skip`".into(),
            Tok::KwTrue => "`true`".into(),
            Tok::KwFalse => "`false`".into(),
            Tok::KwIn => "`in`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::BoxOp => "`[]`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Semi => "`;`".into(),
            Tok::SemiSemi => "`;;`".into(),
            Tok::Becomes => "`:=`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Neq => "`!=`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::Implies => "`=>`".into(),
            Tok::Amp => "`&`".into(),
            Tok::Pipe => "`|`".into(),
            Tok::Bang => "`!`".into(),
            Tok::Prio => "`//`".into(),
            Tok::Dep => "`\\\\`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: u32,
    col: u32,
}

fn bump(
    chars: &mut std::iter::Peekable<std::str::Chars<'_>>,
    line: &mut u32,
    col: &mut u32,
) -> char {
    let c = chars.next().unwrap();
    if c == '\n' {
        *line += 1;
        *col = 1;
    } else {
        *col += 1;
    }
    c
}

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut toks = Vec::new();
    let mut line: u32 = 1;
    let mut col: u32 = 1;
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        let start_line = line;
        let start_col = col;
        let mut push = |tok: Tok| {
            toks.push(Token { tok, line: start_line, col: start_col });
        };
        match c {
            ' ' | '\t' | '\r' | '\n' => {
                bump(&mut chars, &mut line, &mut col);
            }
            '#' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    bump(&mut chars, &mut line, &mut col);
                }
            }
            '{' => {
                bump(&mut chars, &mut line, &mut col);
                push(Tok::LBrace);
            }
            '}' => {
                bump(&mut chars, &mut line, &mut col);
                push(Tok::RBrace);
            }
            '(' => {
                bump(&mut chars, &mut line, &mut col);
                push(Tok::LParen);
            }
            ')' => {
                bump(&mut chars, &mut line, &mut col);
                push(Tok::RParen);
            }
            '[' => {
                bump(&mut chars, &mut line, &mut col);
                if chars.peek() == Some(&']') {
                    bump(&mut chars, &mut line, &mut col);
                    push(Tok::BoxOp);
                } else {
                    push(Tok::LBracket);
                }
            }
            ']' => {
                bump(&mut chars, &mut line, &mut col);
                push(Tok::RBracket);
            }
            ',' => {
                bump(&mut chars, &mut line, &mut col);
                push(Tok::Comma);
            }
            ';' => {
                bump(&mut chars, &mut line, &mut col);
                if chars.peek() == Some(&';') {
                    bump(&mut chars, &mut line, &mut col);
                    push(Tok::SemiSemi);
                } else {
                    push(Tok::Semi);
                }
            }
            ':' => {
                bump(&mut chars, &mut line, &mut col);
                if chars.peek() == Some(&'=') {
                    bump(&mut chars, &mut line, &mut col);
                    push(Tok::Becomes);
                } else {
                    push(Tok::Colon);
                }
            }
            '=' => {
                bump(&mut chars, &mut line, &mut col);
                if chars.peek() == Some(&'>') {
                    bump(&mut chars, &mut line, &mut col);
                    push(Tok::Implies);
                } else {
                    push(Tok::Eq);
                }
            }
            '!' => {
                bump(&mut chars, &mut line, &mut col);
                if chars.peek() == Some(&'=') {
                    bump(&mut chars, &mut line, &mut col);
                    push(Tok::Neq);
                } else {
                    push(Tok::Bang);
                }
            }
            '-' => {
                bump(&mut chars, &mut line, &mut col);
                if chars.peek() == Some(&'>') {
                    bump(&mut chars, &mut line, &mut col);
                    push(Tok::Arrow);
                } else {
                    return Err(ParseError {
                        file: None,
                        line: start_line,
                        col: start_col,
                        message: "stray `-`; did you mean `->`?".into(),
                        found: Some("-".into()),
                    });
                }
            }
            '&' => {
                bump(&mut chars, &mut line, &mut col);
                push(Tok::Amp);
            }
            '|' => {
                bump(&mut chars, &mut line, &mut col);
                push(Tok::Pipe);
            }
            '/' => {
                bump(&mut chars, &mut line, &mut col);
                if chars.peek() == Some(&'/') {
                    bump(&mut chars, &mut line, &mut col);
                    push(Tok::Prio);
                } else {
                    return Err(ParseError {
                        file: None,
                        line: start_line,
                        col: start_col,
                        message: "stray `/`; prioritised choice is `//`".into(),
                        found: Some("/".into()),
                    });
                }
            }
            '\\' => {
                bump(&mut chars, &mut line, &mut col);
                if chars.peek() == Some(&'\\') {
                    bump(&mut chars, &mut line, &mut col);
                    push(Tok::Dep);
                } else {
                    return Err(ParseError {
                        file: None,
                        line: start_line,
                        col: start_col,
                        message: "stray `\\`; the dependency operator is `\\\\`".into(),
                        found: Some("\\".into()),
                    });
                }
            }
            c if c.is_ascii_alphanumeric() || c == '_' => {
                let mut word = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        word.push(c);
                        bump(&mut chars, &mut line, &mut col);
                    } else {
                        break;
                    }
                }
                let tok = match word.as_str() {
                    "system" => Tok::KwSystem,
                    "var" => Tok::KwVar,
                    "init" => Tok::KwInit,
                    "action" => Tok::KwAction,
                    "run" => Tok::KwRun,
                    "export" => Tok::KwExport,
                    "import" => Tok::KwImport,
                    "abort" => Tok::KwAbort,
                    "skip" => Tok::KwSkip,
                    "true" => Tok::KwTrue,
                    "false" => Tok::KwFalse,
                    "in" => Tok::KwIn,
                    _ => Tok::Ident(word),
                };
                push(tok);
            }
            other => {
                return Err(ParseError {
                    file: None,
                    line: start_line,
                    col: start_col,
                    message: format!("unexpected character `{}`", other.escape_default()),
                    found: Some(other.to_string()),
                });
            }
        }
    }
    toks.push(Token { tok: Tok::Eof, line, col });
    Ok(toks)
}

// ---------------- system model ----------------

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamedAction {
    pub label: String,
    pub body: ActionExpr,
}

/// A parsed model. `parse_system` returns only validated models; hand-built
/// ones should be checked with [`SystemModel::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemModel {
    pub name: String,
    /// All declarations in source order, imported ones included.
    pub vars: Vec<VarDecl>,
    /// One literal per non-imported variable (validated total).
    pub init: Vec<(String, String)>,
    pub actions: Vec<NamedAction>,
    /// Explicit `run` clause over labels, if any.
    pub run: Option<ActionExpr>,
}

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum ModelError {
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error("at least one action required")]
    NoActions,
    #[error("duplicate action label `{0}`")]
    DuplicateLabel(String),
    #[error("init does not assign variable `{0}`")]
    InitMissing(String),
    #[error("init assigns variable `{0}` twice")]
    InitDuplicate(String),
    #[error("init assigns undeclared variable `{0}`")]
    InitUndeclared(String),
    #[error("imported variable `{0}` may not be initialized")]
    InitImported(String),
    #[error("init value `{value}` is not in the domain of `{var}`")]
    InitOutOfDomain { var: String, value: String },
    #[error("in action `{label}`: {source}")]
    Action { label: String, source: ActionError },
    #[error("imported variable `{var}` may not be referenced (in action `{label}`)")]
    ImportedReference { label: String, var: String },
    #[error("in run clause: {0}")]
    Run(ActionError),
    #[error("run clause may compose labels with `[]` and `//` only (found {0})")]
    RunOperator(&'static str),
    #[error("action `{label}` references `{target}`, which is not declared earlier; bodies may only reference labels declared before them")]
    ForwardReference { label: String, target: String },
}

impl SystemModel {
    /// Full well-formedness check; returns the state space over the
    /// non-imported variables.
    pub fn validate(&self) -> Result<StateSpace, ModelError> {
        let space = self.space()?;
        let imported: HashSet<&str> =
            self.vars.iter().filter(|v| v.imported).map(|v| v.name.as_str()).collect();

        // Initialization: total over non-imported variables, literals in
        // domain, no duplicates, nothing imported or undeclared.
        let mut seen: HashSet<&str> = HashSet::new();
        for (var, value) in &self.init {
            if imported.contains(var.as_str()) {
                return Err(ModelError::InitImported(var.clone()));
            }
            let vi = space
                .var_index(var)
                .ok_or_else(|| ModelError::InitUndeclared(var.clone()))?;
            if !seen.insert(var) {
                return Err(ModelError::InitDuplicate(var.clone()));
            }
            if space.value_index(vi, value).is_none() {
                return Err(ModelError::InitOutOfDomain {
                    var: var.clone(),
                    value: value.clone(),
                });
            }
        }
        for v in space.vars() {
            if !seen.contains(v.name.as_str()) {
                return Err(ModelError::InitMissing(v.name.clone()));
            }
        }

        // Actions: unique labels, bodies valid over the space with only
        // earlier labels in scope.
        if self.actions.is_empty() {
            return Err(ModelError::NoActions);
        }
        let mut labels: HashSet<String> = HashSet::new();
        for a in &self.actions {
            if labels.contains(&a.label) {
                return Err(ModelError::DuplicateLabel(a.label.clone()));
            }
            // Scope excludes the action's own label, so self-reference is a
            // forward reference and bodies always close out.
            a.body.validate(&space, Some(&labels)).map_err(|e| {
                self.classify_action_error(&a.label, &labels, &imported, e)
            })?;
            labels.insert(a.label.clone());
        }

        // Run clause: labels only, composed with [] and //.
        if let Some(run) = &self.run {
            check_run_shape(run)?;
            let all: HashSet<String> = labels;
            run.validate(&space, Some(&all)).map_err(ModelError::Run)?;
        }
        Ok(space)
    }

    /// Distinguish "undeclared" from "imported and therefore unusable", and
    /// from a forward label reference; both read better than a bare error.
    fn classify_action_error(
        &self,
        label: &str,
        earlier: &HashSet<String>,
        imported: &HashSet<&str>,
        e: ActionError,
    ) -> ModelError {
        let named = match &e {
            ActionError::UndeclaredVariable(v) => Some(v.clone()),
            ActionError::Pred(crate::pred::EvalError::UndeclaredVariable(v)) => Some(v.clone()),
            _ => None,
        };
        if let Some(v) = named {
            if imported.contains(v.as_str()) {
                return ModelError::ImportedReference { label: label.into(), var: v };
            }
        }
        if let ActionError::UnknownLabel(l) = &e {
            if !earlier.contains(l) && self.actions.iter().any(|a| &a.label == l) {
                return ModelError::ForwardReference {
                    label: label.into(),
                    target: l.clone(),
                };
            }
        }
        ModelError::Action { label: label.into(), source: e }
    }

    /// The state space over the non-imported variables.
    pub fn space(&self) -> Result<StateSpace, SpaceError> {
        StateSpace::new(self.vars.iter().filter(|v| !v.imported).cloned().collect())
    }

    /// Rank of the initial state; call only on validated models.
    pub fn init_state(&self, space: &StateSpace) -> crate::space::StateId {
        let mut vals = vec![0usize; space.var_count()];
        for (var, value) in &self.init {
            let vi = space.var_index(var).expect("validated init");
            vals[vi] = space.value_index(vi, value).expect("validated init");
        }
        space.encode(&vals)
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.actions.iter().map(|a| a.label.as_str())
    }

    /// The top-level composition: the `run` clause if present, otherwise
    /// demonic choice over all actions in declaration order.
    pub fn composition(&self) -> ActionExpr {
        match &self.run {
            Some(r) => r.clone(),
            None => {
                let mut labels = self.actions.iter().map(|a| ActionExpr::Ref(a.label.clone()));
                let first = labels.next().expect("validated model has actions");
                labels.fold(first, ActionExpr::choice)
            }
        }
    }

    /// The body of `label` with all label references substituted away.
    pub fn closed_action(&self, label: &str) -> Result<ActionExpr, ActionError> {
        let pos = self
            .actions
            .iter()
            .position(|a| a.label == label)
            .ok_or_else(|| ActionError::UnknownLabel(label.to_string()))?;
        self.close(&self.actions[pos].body.clone(), pos)
    }

    /// The full composition with all labels substituted away.
    pub fn closed_composition(&self) -> Result<ActionExpr, ActionError> {
        self.close(&self.composition(), self.actions.len())
    }

    /// Close an arbitrary expression over this system's labels (all of them
    /// in scope).
    pub fn close_expr(&self, expr: &ActionExpr) -> Result<ActionExpr, ActionError> {
        self.close(expr, self.actions.len())
    }

    /// Substitute labels declared before `limit`, recursively.
    fn close(&self, expr: &ActionExpr, limit: usize) -> Result<ActionExpr, ActionError> {
        expr.resolve_refs(&|name| {
            self.actions[..limit]
                .iter()
                .position(|a| a.label == name)
                .map(|pos| self.close(&self.actions[pos].body, pos).expect("earlier bodies close"))
        })
    }
}

fn check_run_shape(e: &ActionExpr) -> Result<(), ModelError> {
    match e {
        ActionExpr::Ref(_) => Ok(()),
        ActionExpr::Choice(a, b) | ActionExpr::Priority(a, b) => {
            check_run_shape(a)?;
            check_run_shape(b)
        }
        ActionExpr::Abort => Err(ModelError::RunOperator("`abort`")),
        ActionExpr::Skip => Err(ModelError::RunOperator("`skip`")),
        ActionExpr::Assign(_) => Err(ModelError::RunOperator("an assignment")),
        ActionExpr::Assume(_) => Err(ModelError::RunOperator("an assumption")),
        ActionExpr::Guarded(..) => Err(ModelError::RunOperator("a guard")),
        ActionExpr::Seq(..) | ActionExpr::GuardedSeq(..) => {
            Err(ModelError::RunOperator("a sequence"))
        }
        ActionExpr::Dep(..) => Err(ModelError::RunOperator("`\\\\`")),
    }
}

// ---------------- parser ----------------

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    depth: u32,
}

impl Parser {
    fn new(text: &str) -> Result<Parser, ParseError> {
        Ok(Parser { toks: lex(text)?, pos: 0, depth: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.pos + 1).min(self.toks.len() - 1)].tok
    }

    fn here(&self) -> (u32, u32) {
        (self.toks[self.pos].line, self.toks[self.pos].col)
    }

    fn advance(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        let t = &self.toks[self.pos];
        ParseError {
            file: None,
            line: t.line,
            col: t.col,
            message: message.into(),
            found: Some(t.tok.describe().trim_matches('`').to_string()),
        }
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.advance();
            Ok(())
        } else {
            Err(self.error(format!("expected {} {}", want.describe(), what)))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.advance();
                Ok(s)
            }
            _ => Err(self.error(format!("expected {}", what))),
        }
    }

    fn enter(&mut self) -> Result<DepthGuard<'_>, ParseError> {
        if self.depth >= MAX_DEPTH {
            return Err(self.error("expression nests too deeply"));
        }
        self.depth += 1;
        Ok(DepthGuard { parser: self })
    }

    // A variable or value name: `loc`, `0`, or subscripted `at[K]`.
    fn varname(&mut self) -> Result<String, ParseError> {
        let base = self.ident("a name")?;
        if *self.peek() == Tok::LBracket {
            self.advance();
            let sub = self.ident("a subscript")?;
            self.expect(Tok::RBracket, "to close the subscript")?;
            Ok(format!("{}[{}]", base, sub))
        } else {
            Ok(base)
        }
    }

    // ---- predicates ----

    fn pred(&mut self) -> Result<PredExpr, ParseError> {
        let guard = self.enter()?;
        let p = guard.parser.pred_or()?;
        if *guard.parser.peek() == Tok::Implies {
            guard.parser.advance();
            let q = guard.parser.pred()?; // right-associative
            return Ok(PredExpr::Implies(Box::new(p), Box::new(q)));
        }
        Ok(p)
    }

    fn pred_or(&mut self) -> Result<PredExpr, ParseError> {
        let mut p = self.pred_and()?;
        while *self.peek() == Tok::Pipe {
            self.advance();
            p = PredExpr::or(p, self.pred_and()?);
        }
        Ok(p)
    }

    fn pred_and(&mut self) -> Result<PredExpr, ParseError> {
        let mut p = self.pred_not()?;
        while *self.peek() == Tok::Amp {
            self.advance();
            p = PredExpr::and(p, self.pred_not()?);
        }
        Ok(p)
    }

    fn pred_not(&mut self) -> Result<PredExpr, ParseError> {
        if *self.peek() == Tok::Bang {
            self.advance();
            let guard = self.enter()?;
            let p = guard.parser.pred_not()?;
            return Ok(PredExpr::Not(Box::new(p)));
        }
        self.pred_atom()
    }

    fn pred_atom(&mut self) -> Result<PredExpr, ParseError> {
        match self.peek().clone() {
            Tok::KwTrue => {
                self.advance();
                Ok(PredExpr::Lit(true))
            }
            Tok::KwFalse => {
                self.advance();
                Ok(PredExpr::Lit(false))
            }
            Tok::LParen => {
                self.advance();
                let guard = self.enter()?;
                let p = guard.parser.pred()?;
                guard.parser.expect(Tok::RParen, "to close the predicate")?;
                Ok(p)
            }
            Tok::Ident(_) => {
                let var = self.varname()?;
                match self.peek().clone() {
                    Tok::Eq => {
                        self.advance();
                        let rhs = self.varname()?;
                        Ok(PredExpr::Cmp { var, negated: false, rhs: Operand::Lit(rhs) })
                    }
                    Tok::Neq => {
                        self.advance();
                        let rhs = self.varname()?;
                        Ok(PredExpr::Cmp { var, negated: true, rhs: Operand::Lit(rhs) })
                    }
                    Tok::KwIn => {
                        self.advance();
                        self.expect(Tok::LBrace, "to open the value set")?;
                        let mut values = vec![self.varname()?];
                        while *self.peek() == Tok::Comma {
                            self.advance();
                            values.push(self.varname()?);
                        }
                        self.expect(Tok::RBrace, "to close the value set")?;
                        Ok(PredExpr::In { var, values })
                    }
                    _ => Err(self.error("expected `=`, `!=`, or `in` after variable")),
                }
            }
            _ => Err(self.error("expected a predicate")),
        }
    }

    // ---- actions ----

    fn action(&mut self) -> Result<ActionExpr, ParseError> {
        let guard = self.enter()?;
        let mut a = guard.parser.action_prio()?;
        while *guard.parser.peek() == Tok::BoxOp {
            guard.parser.advance();
            a = ActionExpr::choice(a, guard.parser.action_prio()?);
        }
        Ok(a)
    }

    fn action_prio(&mut self) -> Result<ActionExpr, ParseError> {
        let mut a = self.action_seq()?;
        while *self.peek() == Tok::Prio {
            self.advance();
            a = ActionExpr::priority(a, self.action_seq()?);
        }
        Ok(a)
    }

    fn action_seq(&mut self) -> Result<ActionExpr, ParseError> {
        let mut a = self.action_dep()?;
        loop {
            match self.peek() {
                Tok::Semi => {
                    self.advance();
                    a = ActionExpr::seq(a, self.action_dep()?);
                }
                Tok::SemiSemi => {
                    self.advance();
                    a = ActionExpr::guarded_seq(a, self.action_dep()?);
                }
                _ => return Ok(a),
            }
        }
    }

    fn action_dep(&mut self) -> Result<ActionExpr, ParseError> {
        let mut a = self.action_prefix()?;
        while *self.peek() == Tok::Dep {
            self.advance();
            a = ActionExpr::dep(a, self.action_prefix()?);
        }
        Ok(a)
    }

    /// `p -> A` needs lookahead: a predicate and an action atom can both
    /// start with `(` or an identifier, so try the guard reading first and
    /// fall back on the atom.
    fn action_prefix(&mut self) -> Result<ActionExpr, ParseError> {
        let guard = self.enter()?;
        let snapshot = guard.parser.pos;
        if let Ok(p) = guard.parser.pred() {
            if *guard.parser.peek() == Tok::Arrow {
                guard.parser.advance();
                let body = guard.parser.action_prefix()?;
                return Ok(ActionExpr::Guarded(p, Box::new(body)));
            }
        }
        guard.parser.pos = snapshot;
        guard.parser.action_atom()
    }

    fn action_atom(&mut self) -> Result<ActionExpr, ParseError> {
        match self.peek().clone() {
            Tok::KwAbort => {
                self.advance();
                Ok(ActionExpr::Abort)
            }
            Tok::KwSkip => {
                self.advance();
                Ok(ActionExpr::Skip)
            }
            Tok::LBracket => {
                self.advance();
                let guard = self.enter()?;
                let p = guard.parser.pred()?;
                guard.parser.expect(Tok::RBracket, "to close the assumption")?;
                Ok(ActionExpr::Assume(p))
            }
            Tok::LParen => {
                self.advance();
                let guard = self.enter()?;
                let a = guard.parser.action()?;
                guard.parser.expect(Tok::RParen, "to close the action")?;
                Ok(a)
            }
            Tok::Ident(_) => {
                // Assignment (possibly multiple) or a label reference.
                let is_assign = match (self.peek(), self.peek2()) {
                    (Tok::Ident(_), Tok::Becomes) => true,
                    (Tok::Ident(_), Tok::LBracket) => true, // at[K] := ...
                    _ => false,
                };
                if !is_assign {
                    let label = self.ident("a label")?;
                    return Ok(ActionExpr::Ref(label));
                }
                let mut targets = Vec::new();
                loop {
                    let var = self.varname()?;
                    self.expect(Tok::Becomes, "in assignment")?;
                    let value = self.varname()?;
                    // Literal until name resolution; see resolve_operands.
                    targets.push((var, Operand::Lit(value)));
                    if *self.peek() == Tok::Comma {
                        self.advance();
                    } else {
                        break;
                    }
                }
                Ok(ActionExpr::Assign(targets))
            }
            _ => Err(self.error(
                "expected an action (`abort`, `skip`, assignment, `[p]`, label, or `(`)",
            )),
        }
    }

    // ---- systems ----

    fn system(&mut self) -> Result<SystemModel, ParseError> {
        self.expect(Tok::KwSystem, "to start the model")?;
        let name = self.ident("a system name")?;
        self.expect(Tok::LBrace, "to open the system body")?;
        let mut vars: Vec<VarDecl> = Vec::new();
        let mut init: Vec<(String, String)> = Vec::new();
        let mut init_seen = false;
        let mut actions: Vec<NamedAction> = Vec::new();
        let mut run: Option<ActionExpr> = None;
        loop {
            match self.peek().clone() {
                Tok::RBrace => {
                    self.advance();
                    break;
                }
                Tok::KwVar | Tok::KwExport | Tok::KwImport => {
                    self.var_decl(&mut vars)?;
                }
                Tok::KwInit => {
                    if init_seen {
                        return Err(self.error("duplicate `init` clause"));
                    }
                    init_seen = true;
                    self.advance();
                    loop {
                        let var = self.varname()?;
                        self.expect(Tok::Becomes, "in init")?;
                        let value = self.varname()?;
                        init.push((var, value));
                        if *self.peek() == Tok::Comma {
                            self.advance();
                        } else {
                            break;
                        }
                    }
                }
                Tok::KwAction => {
                    self.advance();
                    let label = self.ident("an action label")?;
                    self.expect(Tok::LBrace, "to open the action body")?;
                    let body = self.action()?;
                    self.expect(Tok::RBrace, "to close the action body")?;
                    actions.push(NamedAction { label, body });
                }
                Tok::KwRun => {
                    if run.is_some() {
                        return Err(self.error("duplicate `run` clause"));
                    }
                    self.advance();
                    run = Some(self.action()?);
                }
                Tok::Eof => return Err(self.error("expected `}` to close the system")),
                _ => {
                    return Err(self.error(
                        "expected `var`, `init`, `action`, `run`, or `}`",
                    ))
                }
            }
        }
        let mut model = SystemModel { name, vars, init, actions, run };
        let names: HashSet<String> = model.vars.iter().map(|v| v.name.clone()).collect();
        for a in &mut model.actions {
            resolve_operands(&mut a.body, &names);
        }
        Ok(model)
    }

    fn var_decl(&mut self, vars: &mut Vec<VarDecl>) -> Result<(), ParseError> {
        let mut exported = false;
        let mut imported = false;
        match self.peek() {
            Tok::KwExport => {
                exported = true;
                self.advance();
            }
            Tok::KwImport => {
                imported = true;
                self.advance();
            }
            _ => {}
        }
        self.expect(Tok::KwVar, "to declare a variable")?;
        let (line, col) = self.here();
        let base = self.ident("a variable name")?;
        // `at[L, A, B]` declares at[L], at[A], at[B]; a plain name declares
        // itself.
        let names: Vec<String> = if *self.peek() == Tok::LBracket {
            self.advance();
            let mut subs = vec![self.ident("a subscript")?];
            while *self.peek() == Tok::Comma {
                self.advance();
                subs.push(self.ident("a subscript")?);
            }
            self.expect(Tok::RBracket, "to close the subscripts")?;
            subs.into_iter().map(|s| format!("{}[{}]", base, s)).collect()
        } else {
            vec![base]
        };
        self.expect(Tok::Colon, "before the domain")?;
        self.expect(Tok::LBrace, "to open the domain")?;
        let mut domain = vec![self.ident("a domain value")?];
        while *self.peek() == Tok::Comma {
            self.advance();
            domain.push(self.ident("a domain value")?);
        }
        self.expect(Tok::RBrace, "to close the domain")?;
        for name in names {
            if vars.iter().any(|v| v.name == name) {
                return Err(ParseError {
                    file: None,
                    line,
                    col,
                    message: format!("duplicate variable `{}`", name),
                    found: Some(name),
                });
            }
            vars.push(VarDecl { name, domain: domain.clone(), exported, imported });
        }
        Ok(())
    }
}

/// Restores nothing; exists so every recursive entry point decrements the
/// depth counter on all exits.
struct DepthGuard<'a> {
    parser: &'a mut Parser,
}

impl Drop for DepthGuard<'_> {
    fn drop(&mut self) {
        self.parser.depth -= 1;
    }
}

impl std::ops::Deref for DepthGuard<'_> {
    type Target = Parser;
    fn deref(&self) -> &Parser {
        self.parser
    }
}

impl std::ops::DerefMut for DepthGuard<'_> {
    fn deref_mut(&mut self) -> &mut Parser {
        self.parser
    }
}

/// A value word that names a declared variable is a copy of that variable;
/// anything else stays a literal.
fn resolve_operands(expr: &mut ActionExpr, vars: &HashSet<String>) {
    let fix = |op: &mut Operand| {
        if let Operand::Lit(name) = op {
            if vars.contains(name.as_str()) {
                *op = Operand::Var(std::mem::take(name));
            }
        }
    };
    match expr {
        ActionExpr::Assign(targets) => {
            for (_, op) in targets {
                fix(op);
            }
        }
        ActionExpr::Assume(p) => resolve_pred_operands(p, vars),
        ActionExpr::Guarded(p, a) => {
            resolve_pred_operands(p, vars);
            resolve_operands(a, vars);
        }
        ActionExpr::Choice(a, b)
        | ActionExpr::Seq(a, b)
        | ActionExpr::GuardedSeq(a, b)
        | ActionExpr::Priority(a, b)
        | ActionExpr::Dep(a, b) => {
            resolve_operands(a, vars);
            resolve_operands(b, vars);
        }
        ActionExpr::Abort | ActionExpr::Skip | ActionExpr::Ref(_) => {}
    }
}

fn resolve_pred_operands(p: &mut PredExpr, vars: &HashSet<String>) {
    match p {
        PredExpr::Cmp { rhs, .. } => {
            if let Operand::Lit(name) = rhs {
                if vars.contains(name.as_str()) {
                    *rhs = Operand::Var(std::mem::take(name));
                }
            }
        }
        PredExpr::Not(a) => resolve_pred_operands(a, vars),
        PredExpr::And(a, b) | PredExpr::Or(a, b) | PredExpr::Implies(a, b) => {
            resolve_pred_operands(a, vars);
            resolve_pred_operands(b, vars);
        }
        PredExpr::Lit(_) | PredExpr::In { .. } => {}
    }
}

// ---------------- entry points ----------------

/// Parse and validate a model file.
pub fn parse_system(text: &str) -> Result<SystemModel, ParseError> {
    let mut p = Parser::new(text)?;
    let model = p.system()?;
    if *p.peek() != Tok::Eof {
        return Err(p.error("expected end of input after the system"));
    }
    // Well-formedness beyond grammar; reported at the start of the model
    // since the offending construct is named in the message.
    if let Err(e) = model.validate() {
        return Err(ParseError {
            file: None,
            line: 1,
            col: 1,
            message: e.to_string(),
            found: None,
        });
    }
    Ok(model)
}

/// Parse a standalone action over a known space. Label references are
/// rejected (there is no enclosing system).
pub fn parse_action(text: &str, space: &StateSpace) -> Result<ActionExpr, ParseError> {
    let mut p = Parser::new(text)?;
    let mut expr = p.action()?;
    if *p.peek() != Tok::Eof {
        return Err(p.error("expected end of input after the action"));
    }
    let names: HashSet<String> = space.vars().iter().map(|v| v.name.clone()).collect();
    resolve_operands(&mut expr, &names);
    expr.validate(space, None).map_err(|e| ParseError {
        file: None,
        line: 1,
        col: 1,
        message: e.to_string(),
        found: None,
    })?;
    Ok(expr)
}

/// Parse an action over a model's space with the model's labels in scope;
/// used for query expressions like `A1 \\ A2` against a loaded system.
pub fn parse_action_with_labels(
    text: &str,
    model: &SystemModel,
    space: &StateSpace,
) -> Result<ActionExpr, ParseError> {
    let mut p = Parser::new(text)?;
    let mut expr = p.action()?;
    if *p.peek() != Tok::Eof {
        return Err(p.error("expected end of input after the action"));
    }
    let names: HashSet<String> = space.vars().iter().map(|v| v.name.clone()).collect();
    resolve_operands(&mut expr, &names);
    let labels: HashSet<String> = model.labels().map(String::from).collect();
    expr.validate(space, Some(&labels)).map_err(|e| ParseError {
        file: None,
        line: 1,
        col: 1,
        message: e.to_string(),
        found: None,
    })?;
    Ok(expr)
}

/// Parse a standalone predicate over a known space.
pub fn parse_pred(text: &str, space: &StateSpace) -> Result<PredExpr, ParseError> {
    let mut p = Parser::new(text)?;
    let mut pred = p.pred()?;
    if *p.peek() != Tok::Eof {
        return Err(p.error("expected end of input after the predicate"));
    }
    let names: HashSet<String> = space.vars().iter().map(|v| v.name.clone()).collect();
    resolve_pred_operands(&mut pred, &names);
    pred.validate(space).map_err(|e| ParseError {
        file: None,
        line: 1,
        col: 1,
        message: e.to_string(),
        found: None,
    })?;
    Ok(pred)
}

// ---------------- pretty-printer ----------------

/// Binding strength of an action's top constructor; larger binds tighter.
fn action_level(e: &ActionExpr) -> u8 {
    match e {
        ActionExpr::Choice(..) => 1,
        ActionExpr::Priority(..) => 2,
        ActionExpr::Seq(..) | ActionExpr::GuardedSeq(..) => 3,
        ActionExpr::Dep(..) => 4,
        ActionExpr::Guarded(..) => 5,
        _ => 6,
    }
}

fn pred_level(p: &PredExpr) -> u8 {
    match p {
        PredExpr::Implies(..) => 1,
        PredExpr::Or(..) => 2,
        PredExpr::And(..) => 3,
        PredExpr::Not(..) => 4,
        _ => 5,
    }
}

pub fn print_pred(p: &PredExpr) -> String {
    fn wrap(p: &PredExpr, min: u8) -> String {
        let s = print_pred(p);
        if pred_level(p) < min {
            format!("({})", s)
        } else {
            s
        }
    }
    match p {
        PredExpr::Lit(true) => "true".into(),
        PredExpr::Lit(false) => "false".into(),
        PredExpr::Cmp { var, negated, rhs } => {
            let rhs = match rhs {
                Operand::Lit(v) | Operand::Var(v) => v.clone(),
            };
            format!("{} {} {}", var, if *negated { "!=" } else { "=" }, rhs)
        }
        PredExpr::In { var, values } => format!("{} in {{ {} }}", var, values.join(", ")),
        PredExpr::Not(a) => format!("!{}", wrap(a, 4)),
        PredExpr::And(a, b) => format!("{} & {}", wrap(a, 3), wrap(b, 4)),
        PredExpr::Or(a, b) => format!("{} | {}", wrap(a, 2), wrap(b, 3)),
        // Right-associative: the left operand needs parens at equal level.
        PredExpr::Implies(a, b) => format!("{} => {}", wrap(a, 2), wrap(b, 1)),
    }
}

pub fn print_action(e: &ActionExpr) -> String {
    fn wrap(e: &ActionExpr, min: u8) -> String {
        let s = print_action(e);
        if action_level(e) < min {
            format!("({})", s)
        } else {
            s
        }
    }
    match e {
        ActionExpr::Abort => "abort".into(),
        ActionExpr::Skip => "skip".into(),
        ActionExpr::Assign(targets) => targets
            .iter()
            .map(|(var, op)| {
                let v = match op {
                    Operand::Lit(v) | Operand::Var(v) => v.clone(),
                };
                format!("{} := {}", var, v)
            })
            .collect::<Vec<_>>()
            .join(", "),
        ActionExpr::Assume(p) => format!("[{}]", print_pred(p)),
        ActionExpr::Guarded(p, a) => format!("{} -> {}", print_pred(p), wrap(a, 5)),
        ActionExpr::Choice(a, b) => format!("{} [] {}", wrap(a, 1), wrap(b, 2)),
        ActionExpr::Priority(a, b) => format!("{} // {}", wrap(a, 2), wrap(b, 3)),
        ActionExpr::Seq(a, b) => format!("{} ; {}", wrap(a, 3), wrap(b, 4)),
        ActionExpr::GuardedSeq(a, b) => format!("{} ;; {}", wrap(a, 3), wrap(b, 4)),
        ActionExpr::Dep(a, b) => format!("{} \\\\ {}", wrap(a, 4), wrap(b, 5)),
        ActionExpr::Ref(l) => l.clone(),
    }
}

/// Canonical source for a model; parses back to a structurally identical
/// `SystemModel`.
pub fn print_system(m: &SystemModel) -> String {
    let mut out = String::new();
    out.push_str(&format!("system {} {{\n", m.name));
    for v in &m.vars {
        let marker = if v.imported {
            "import "
        } else if v.exported {
            "export "
        } else {
            ""
        };
        out.push_str(&format!("  {}var {} : {{ {} }}\n", marker, v.name, v.domain.join(", ")));
    }
    if !m.init.is_empty() {
        let assigns: Vec<String> =
            m.init.iter().map(|(var, value)| format!("{} := {}", var, value)).collect();
        out.push_str(&format!("\n  init {}\n", assigns.join(", ")));
    }
    out.push('\n');
    for a in &m.actions {
        out.push_str(&format!("  action {} {{ {} }}\n", a.label, print_action(&a.body)));
    }
    if let Some(run) = &m.run {
        out.push_str(&format!("\n  run {}\n", print_action(run)));
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semantics::{denote, equal};

    fn crossing_space() -> StateSpace {
        StateSpace::of(vec![
            ("light", vec!["green", "red"]),
            ("loc", vec!["A", "B", "C", "D"]),
        ])
        .unwrap()
    }

    const CROSSING: &str = "
# Example: a level crossing controller.
system crossing {
  var light : { green, red }
  var loc : { A, B, C, D }

  init light := red, loc := B

  action A1 { light = red -> light := green }
  action A2 { loc = A & light = green -> loc := B }
  action A3 { loc = B & light = green -> (loc := C [] loc := D) }
}
";

    #[test]
    fn parses_a_model() {
        let m = parse_system(CROSSING).unwrap();
        assert_eq!(m.name, "crossing");
        assert_eq!(m.vars.len(), 2);
        assert_eq!(m.vars[0].domain, vec!["green", "red"]);
        assert_eq!(m.vars[1].domain.len(), 4);
        assert_eq!(m.actions.len(), 3);
        assert_eq!(m.run, None);
        // Defaulted composition: choice over all three labels.
        let comp = m.composition();
        assert_eq!(
            comp,
            ActionExpr::choice(
                ActionExpr::choice(ActionExpr::Ref("A1".into()), ActionExpr::Ref("A2".into())),
                ActionExpr::Ref("A3".into()),
            )
        );
    }

    #[test]
    fn precedence_seq_binds_looser_than_dep() {
        let sp = crossing_space();
        let e = parse_action("skip ; skip \\\\ skip", &sp).unwrap();
        assert_eq!(
            e,
            ActionExpr::seq(ActionExpr::Skip, ActionExpr::dep(ActionExpr::Skip, ActionExpr::Skip))
        );
        // And [] is loosest, // in between.
        let e = parse_action("skip [] skip // skip ; skip", &sp).unwrap();
        assert_eq!(
            e,
            ActionExpr::choice(
                ActionExpr::Skip,
                ActionExpr::priority(
                    ActionExpr::Skip,
                    ActionExpr::seq(ActionExpr::Skip, ActionExpr::Skip)
                )
            )
        );
    }

    #[test]
    fn guard_extends_to_smallest_action() {
        let sp = crossing_space();
        let e = parse_action("light = red -> skip ; skip", &sp).unwrap();
        assert_eq!(
            e,
            ActionExpr::seq(
                ActionExpr::guarded(PredExpr::eq("light", "red"), ActionExpr::Skip),
                ActionExpr::Skip
            )
        );
        // Parenthesized guard body.
        let e = parse_action("light = red -> (skip ; skip)", &sp).unwrap();
        assert_eq!(
            e,
            ActionExpr::guarded(
                PredExpr::eq("light", "red"),
                ActionExpr::seq(ActionExpr::Skip, ActionExpr::Skip)
            )
        );
    }

    #[test]
    fn assumption_and_box_disambiguate() {
        let sp = crossing_space();
        let e = parse_action("[light = red] ; skip [] skip", &sp).unwrap();
        assert_eq!(
            e,
            ActionExpr::choice(
                ActionExpr::seq(
                    ActionExpr::Assume(PredExpr::eq("light", "red")),
                    ActionExpr::Skip
                ),
                ActionExpr::Skip
            )
        );
    }

    #[test]
    fn assignment_forms() {
        let sp = crossing_space();
        let e = parse_action("light := green, loc := A", &sp).unwrap();
        assert_eq!(
            e,
            ActionExpr::Assign(vec![
                ("light".into(), Operand::Lit("green".into())),
                ("loc".into(), Operand::Lit("A".into())),
            ])
        );
        // A value word naming a variable becomes a copy.
        let sp2 = StateSpace::of(vec![("x", vec!["0", "1"]), ("y", vec!["0", "1"])]).unwrap();
        let e = parse_action("x := y", &sp2).unwrap();
        assert_eq!(e, ActionExpr::Assign(vec![("x".into(), Operand::Var("y".into()))]));
    }

    #[test]
    fn guarded_seq_surface_syntax() {
        let sp = crossing_space();
        let e = parse_action("skip ;; light := red", &sp).unwrap();
        assert_eq!(
            e,
            ActionExpr::guarded_seq(ActionExpr::Skip, ActionExpr::assign("light", "red"))
        );
    }

    #[test]
    fn subscripted_variables() {
        let m = parse_system(
            "system s {
               var at[L, A] : { a, null }
               init at[L] := a, at[A] := null
               action move { at[L] = a -> at[L] := null, at[A] := a }
             }",
        )
        .unwrap();
        assert_eq!(m.vars[0].name, "at[L]");
        assert_eq!(m.vars[1].name, "at[A]");
        let sp = m.space().unwrap();
        assert_eq!(sp.state_count(), 4);
    }

    #[test]
    fn rejects_ill_formed_models() {
        let no_actions = "system s { var x : { 0 } init x := 0 }";
        let e = parse_system(no_actions).unwrap_err();
        assert!(e.message.contains("at least one action required"), "{}", e);

        let missing_init = "system s { var x : { 0, 1 } var y : { 0 } init x := 0 \
                            action a { skip } }";
        let e = parse_system(missing_init).unwrap_err();
        assert!(e.message.contains("init does not assign variable `y`"), "{}", e);

        let bad_value = "system s { var x : { 0, 1 } init x := 7 action a { skip } }";
        let e = parse_system(bad_value).unwrap_err();
        assert!(e.message.contains("not in the domain"), "{}", e);

        let dup_label =
            "system s { var x : { 0 } init x := 0 action a { skip } action a { skip } }";
        let e = parse_system(dup_label).unwrap_err();
        assert!(e.message.contains("duplicate action label"), "{}", e);
    }

    #[test]
    fn imported_variables_are_metadata_only() {
        let src = "system s {
            var x : { 0, 1 }
            import var env : { hot, cold }
            init x := 0
            action a { x = 0 -> x := 1 }
        }";
        let m = parse_system(src).unwrap();
        assert!(m.vars.iter().any(|v| v.imported && v.name == "env"));
        let sp = m.space().unwrap();
        assert_eq!(sp.state_count(), 2); // env not part of the state

        let used = "system s {
            var x : { 0, 1 }
            import var env : { hot, cold }
            init x := 0
            action a { env = hot -> x := 1 }
        }";
        let e = parse_system(used).unwrap_err();
        assert!(e.message.contains("imported variable `env` may not be referenced"), "{}", e);
    }

    #[test]
    fn run_clause_shape() {
        let ok = "system s { var x : { 0 } init x := 0
                   action a { skip } action b { skip }
                   run a // b }";
        let m = parse_system(ok).unwrap();
        assert_eq!(
            m.run,
            Some(ActionExpr::priority(ActionExpr::Ref("a".into()), ActionExpr::Ref("b".into())))
        );

        let bad = "system s { var x : { 0 } init x := 0
                    action a { skip } run a ; a }";
        let e = parse_system(bad).unwrap_err();
        assert!(e.message.contains("run clause may compose labels"), "{}", e);

        let unknown = "system s { var x : { 0 } init x := 0
                        action a { skip } run a [] c }";
        let e = parse_system(unknown).unwrap_err();
        assert!(e.message.contains("unknown action label `c`"), "{}", e);
    }

    #[test]
    fn bodies_may_reference_earlier_labels_only() {
        let ok = "system s { var x : { 0, 1 } var y : { 0, 1 }
                   init x := 0, y := 0
                   action a { x = 0 -> x := 1 }
                   action b { y = 0 -> y := 1 }
                   action both { a \\\\ b }
                   run both }";
        let m = parse_system(ok).unwrap();
        let closed = m.closed_action("both").unwrap();
        assert!(matches!(closed, ActionExpr::Dep(..)));
        let sp = m.space().unwrap();
        let d = denote(&closed, &sp).unwrap();
        // Both guards hold at (x=0, y=0); the bodies run in order, landing at
        // (x=1, y=1), which is state 3 (x is the high digit).
        assert_eq!(d.outcome(0), &crate::semantics::Outcome::Enabled(vec![3]));

        let fwd_ref = "system s { var x : { 0 } init x := 0
                        action a { b } action b { skip } }";
        let e = parse_system(fwd_ref).unwrap_err();
        assert!(e.message.contains("not declared earlier"), "{}", e);

        let self_ref = "system s { var x : { 0 } init x := 0 action a { a ; a } }";
        let e = parse_system(self_ref).unwrap_err();
        assert!(e.message.contains("not declared earlier"), "{}", e);
    }

    #[test]
    fn errors_carry_spans() {
        let e = parse_system("system s {\n  var x : { 0 }\n  init x := 0\n  action a { ^ }\n}")
            .unwrap_err();
        assert_eq!((e.line, e.col), (4, 14));
        let e = parse_action("skip ;", &crossing_space()).unwrap_err();
        assert_eq!(e.line, 1);
        assert!(e.message.contains("expected an action"), "{}", e);
    }

    #[test]
    fn depth_cap_rejects_pathological_nesting() {
        let mut src = String::new();
        for _ in 0..300 {
            src.push('(');
        }
        src.push_str("skip");
        for _ in 0..300 {
            src.push(')');
        }
        let e = parse_action(&src, &crossing_space()).unwrap_err();
        assert!(e.message.contains("nests too deeply"), "{}", e);
    }

    #[test]
    fn no_panic_on_arbitrary_bytes() {
        // A light smoke test here; the fuzz property test lives in the
        // integration suite.
        for garbage in ["\u{0}\u{1}\u{2}", "system", "][", "x := := :=", "ação", "-", "/", "\\"] {
            let _ = parse_system(garbage);
            let _ = parse_action(garbage, &crossing_space());
        }
    }

    #[test]
    fn pretty_print_round_trips_crossing() {
        let m = parse_system(CROSSING).unwrap();
        let printed = print_system(&m);
        let reparsed = parse_system(&printed).unwrap();
        assert_eq!(m, reparsed);
    }

    #[test]
    fn printer_emits_minimal_parens() {
        let sp = crossing_space();
        for (src, expect) in [
            ("skip ; skip \\\\ skip", "skip ; skip \\\\ skip"),
            ("(skip ; skip) \\\\ skip", "(skip ; skip) \\\\ skip"),
            ("skip [] skip // skip", "skip [] skip // skip"),
            ("(skip [] skip) // skip", "(skip [] skip) // skip"),
            ("light = red -> (loc := C [] loc := D)", "light = red -> (loc := C [] loc := D)"),
            ("skip ; (skip ; skip)", "skip ; (skip ; skip)"),
            ("[light = red | loc != B] ; skip", "[light = red | loc != B] ; skip"),
            ("loc in { C, D } -> skip", "loc in { C, D } -> skip"),
        ] {
            let e = parse_action(src, &sp).unwrap();
            assert_eq!(print_action(&e), expect);
            let back = parse_action(&print_action(&e), &sp).unwrap();
            assert_eq!(e, back, "round-trip of `{}`", src);
        }
    }

    #[test]
    fn printed_action_preserves_meaning() {
        let sp = crossing_space();
        let src = "loc = B & light = green -> (loc := C [] loc := D) ; light := red";
        let e = parse_action(src, &sp).unwrap();
        let back = parse_action(&print_action(&e), &sp).unwrap();
        assert!(equal(&denote(&e, &sp).unwrap(), &denote(&back, &sp).unwrap()));
    }
}
