//! Recursive-descent parser.
//!
//! Precedence, loosest first: `or`, `and`, `not`, comparisons, `+ -`, `* /`,
//! unary minus. Statements need no terminator; blocks are brace-delimited.

use thiserror::Error;

use super::lexer::{lex, LexError, TokKind, Token};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    And,
    Or,
}

#[derive(Debug, Clone)]
pub enum Expr {
    Int(i64),
    Bool(bool),
    Var(String),
    Neg(Box<Expr>),
    Not(Box<Expr>),
    Binary {
        op: BinOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    Call {
        name: String,
        args: Vec<Expr>,
        line: u32,
    },
}

#[derive(Debug, Clone)]
pub enum Stmt {
    Let {
        name: String,
        expr: Expr,
        line: u32,
    },
    Assign {
        name: String,
        expr: Expr,
        line: u32,
    },
    If {
        cond: Expr,
        then_branch: Vec<Stmt>,
        else_branch: Vec<Stmt>,
        line: u32,
    },
    While {
        cond: Expr,
        body: Vec<Stmt>,
        line: u32,
    },
    Return {
        expr: Expr,
        line: u32,
    },
    Assert {
        expr: Expr,
        line: u32,
    },
}

#[derive(Debug, Clone)]
pub struct FnDef {
    pub name: String,
    pub params: Vec<String>,
    pub body: Vec<Stmt>,
    pub line: u32,
}

#[derive(Debug, Clone)]
pub struct TestDef {
    pub name: String,
    pub body: Vec<Stmt>,
    pub line: u32,
}

#[derive(Debug, Clone, Default)]
pub struct Module {
    pub fns: Vec<FnDef>,
    pub tests: Vec<TestDef>,
}

#[derive(Debug, Error)]
pub enum ParseError {
    #[error(transparent)]
    Lex(#[from] LexError),
    #[error("parse error at line {line}: {message}")]
    Syntax { line: u32, message: String },
    #[error("duplicate definition of `{0}`")]
    Duplicate(String),
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn line(&self) -> u32 {
        self.peek()
            .map(|t| t.line)
            .or_else(|| self.tokens.last().map(|t| t.line))
            .unwrap_or(1)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            line: self.line(),
            message: message.into(),
        })
    }

    fn eat(&mut self, kind: TokKind) -> bool {
        if self.peek().map(|t| t.kind) == Some(kind) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, kind: TokKind, what: &str) -> Result<Token, ParseError> {
        match self.peek() {
            Some(t) if t.kind == kind => {
                let t = t.clone();
                self.pos += 1;
                Ok(t)
            }
            Some(t) => {
                let found = t.text.clone();
                self.err(format!("expected {what}, found `{found}`"))
            }
            None => self.err(format!("expected {what}, found end of input")),
        }
    }

    fn parse_module(&mut self) -> Result<Module, ParseError> {
        let mut module = Module::default();
        while let Some(t) = self.peek() {
            match t.kind {
                TokKind::KwFn => {
                    let f = self.parse_fn()?;
                    module.fns.push(f);
                }
                TokKind::KwTest => {
                    let t = self.parse_test()?;
                    module.tests.push(t);
                }
                _ => return self.err("expected `fn` or `test` at top level"),
            }
        }
        Ok(module)
    }

    fn parse_fn(&mut self) -> Result<FnDef, ParseError> {
        let kw = self.expect(TokKind::KwFn, "`fn`")?;
        let name = self.expect(TokKind::Ident, "function name")?.text;
        self.expect(TokKind::LParen, "`(`")?;
        let mut params = Vec::new();
        if !self.eat(TokKind::RParen) {
            loop {
                params.push(self.expect(TokKind::Ident, "parameter name")?.text);
                if self.eat(TokKind::RParen) {
                    break;
                }
                self.expect(TokKind::Comma, "`,`")?;
            }
        }
        let body = self.parse_block()?;
        Ok(FnDef {
            name,
            params,
            body,
            line: kw.line,
        })
    }

    fn parse_test(&mut self) -> Result<TestDef, ParseError> {
        let kw = self.expect(TokKind::KwTest, "`test`")?;
        let name = self.expect(TokKind::Ident, "test name")?.text;
        let body = self.parse_block()?;
        Ok(TestDef {
            name,
            body,
            line: kw.line,
        })
    }

    fn parse_block(&mut self) -> Result<Vec<Stmt>, ParseError> {
        self.expect(TokKind::LBrace, "`{`")?;
        let mut stmts = Vec::new();
        while !self.eat(TokKind::RBrace) {
            if self.peek().is_none() {
                return self.err("unterminated block");
            }
            stmts.push(self.parse_stmt()?);
        }
        Ok(stmts)
    }

    fn parse_stmt(&mut self) -> Result<Stmt, ParseError> {
        let t = match self.peek() {
            Some(t) => t.clone(),
            None => return self.err("expected statement"),
        };
        match t.kind {
            TokKind::KwLet => {
                self.pos += 1;
                let name = self.expect(TokKind::Ident, "variable name")?.text;
                self.expect(TokKind::Assign, "`=`")?;
                let expr = self.parse_expr()?;
                Ok(Stmt::Let {
                    name,
                    expr,
                    line: t.line,
                })
            }
            TokKind::Ident => {
                self.pos += 1;
                let name = t.text.clone();
                self.expect(TokKind::Assign, "`=`")?;
                let expr = self.parse_expr()?;
                Ok(Stmt::Assign {
                    name,
                    expr,
                    line: t.line,
                })
            }
            TokKind::KwIf => {
                self.pos += 1;
                let cond = self.parse_expr()?;
                let then_branch = self.parse_block()?;
                let else_branch = if self.eat(TokKind::KwElse) {
                    if self.peek().map(|t| t.kind) == Some(TokKind::KwIf) {
                        vec![self.parse_stmt()?]
                    } else {
                        self.parse_block()?
                    }
                } else {
                    Vec::new()
                };
                Ok(Stmt::If {
                    cond,
                    then_branch,
                    else_branch,
                    line: t.line,
                })
            }
            TokKind::KwWhile => {
                self.pos += 1;
                let cond = self.parse_expr()?;
                let body = self.parse_block()?;
                Ok(Stmt::While {
                    cond,
                    body,
                    line: t.line,
                })
            }
            TokKind::KwReturn => {
                self.pos += 1;
                let expr = self.parse_expr()?;
                Ok(Stmt::Return { expr, line: t.line })
            }
            TokKind::KwAssert => {
                self.pos += 1;
                let expr = self.parse_expr()?;
                Ok(Stmt::Assert { expr, line: t.line })
            }
            _ => self.err(format!("unexpected token `{}`", t.text)),
        }
    }

    fn parse_expr(&mut self) -> Result<Expr, ParseError> {
        self.parse_or()
    }

    fn parse_or(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.parse_and()?;
        while self.eat(TokKind::Or) {
            let rhs = self.parse_and()?;
            lhs = Expr::Binary {
                op: BinOp::Or,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            };
        }
        Ok(lhs)
    }

    fn parse_and(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.parse_not()?;
        while self.eat(TokKind::And) {
            let rhs = self.parse_not()?;
            lhs = Expr::Binary {
                op: BinOp::And,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            };
        }
        Ok(lhs)
    }

    fn parse_not(&mut self) -> Result<Expr, ParseError> {
        if self.eat(TokKind::Not) {
            Ok(Expr::Not(Box::new(self.parse_not()?)))
        } else {
            self.parse_comparison()
        }
    }

    fn parse_comparison(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.parse_additive()?;
        let op = match self.peek().map(|t| t.kind) {
            Some(TokKind::Lt) => Some(BinOp::Lt),
            Some(TokKind::Le) => Some(BinOp::Le),
            Some(TokKind::Gt) => Some(BinOp::Gt),
            Some(TokKind::Ge) => Some(BinOp::Ge),
            Some(TokKind::EqEq) => Some(BinOp::Eq),
            Some(TokKind::Ne) => Some(BinOp::Ne),
            _ => None,
        };
        match op {
            Some(op) => {
                self.pos += 1;
                let rhs = self.parse_additive()?;
                Ok(Expr::Binary {
                    op,
                    lhs: Box::new(lhs),
                    rhs: Box::new(rhs),
                })
            }
            None => Ok(lhs),
        }
    }

    fn parse_additive(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.parse_multiplicative()?;
        loop {
            let op = match self.peek().map(|t| t.kind) {
                Some(TokKind::Plus) => BinOp::Add,
                Some(TokKind::Minus) => BinOp::Sub,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.parse_multiplicative()?;
            lhs = Expr::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            };
        }
        Ok(lhs)
    }

    fn parse_multiplicative(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.parse_unary()?;
        loop {
            let op = match self.peek().map(|t| t.kind) {
                Some(TokKind::Star) => BinOp::Mul,
                Some(TokKind::Slash) => BinOp::Div,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.parse_unary()?;
            lhs = Expr::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            };
        }
        Ok(lhs)
    }

    fn parse_unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat(TokKind::Minus) {
            Ok(Expr::Neg(Box::new(self.parse_unary()?)))
        } else {
            self.parse_primary()
        }
    }

    fn parse_primary(&mut self) -> Result<Expr, ParseError> {
        let t = match self.peek() {
            Some(t) => t.clone(),
            None => return self.err("expected expression"),
        };
        match t.kind {
            TokKind::Int => {
                self.pos += 1;
                match t.text.parse::<i64>() {
                    Ok(v) => Ok(Expr::Int(v)),
                    Err(_) => self.err(format!("integer literal `{}` out of range", t.text)),
                }
            }
            TokKind::True => {
                self.pos += 1;
                Ok(Expr::Bool(true))
            }
            TokKind::False => {
                self.pos += 1;
                Ok(Expr::Bool(false))
            }
            TokKind::LParen => {
                self.pos += 1;
                let e = self.parse_expr()?;
                self.expect(TokKind::RParen, "`)`")?;
                Ok(e)
            }
            TokKind::Ident => {
                self.pos += 1;
                if self.eat(TokKind::LParen) {
                    let mut args = Vec::new();
                    if !self.eat(TokKind::RParen) {
                        loop {
                            args.push(self.parse_expr()?);
                            if self.eat(TokKind::RParen) {
                                break;
                            }
                            self.expect(TokKind::Comma, "`,`")?;
                        }
                    }
                    Ok(Expr::Call {
                        name: t.text,
                        args,
                        line: t.line,
                    })
                } else {
                    Ok(Expr::Var(t.text))
                }
            }
            _ => self.err(format!("unexpected token `{}` in expression", t.text)),
        }
    }
}

pub fn parse_module(text: &str) -> Result<Module, ParseError> {
    let tokens = lex(text)?;
    let mut parser = Parser { tokens, pos: 0 };
    parser.parse_module()
}
