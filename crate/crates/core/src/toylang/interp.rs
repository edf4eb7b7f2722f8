//! Tree-walking interpreter with optional fuel metering and line coverage.
//!
//! Fuel bounds the number of executed statements so embedded callers (the
//! in-process audit oracle) can classify divergent mutants without hanging;
//! the process-level runner executes without fuel and relies on the harness
//! deadline instead.

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use super::parser::{BinOp, Expr, FnDef, Module, ParseError, Stmt, TestDef};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Value {
    Int(i64),
    Bool(bool),
}

impl Value {
    fn type_name(self) -> &'static str {
        match self {
            Value::Int(_) => "int",
            Value::Bool(_) => "bool",
        }
    }
}

#[derive(Debug, Error)]
enum RuntimeError {
    #[error("line {line}: {message}")]
    Fault { line: u32, message: String },
    #[error("fuel exhausted")]
    FuelExhausted,
}

/// Outcome of running one test block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TestResult {
    Pass,
    Fail(String),
    /// Only possible when the interpreter was given a fuel budget.
    FuelExhausted,
}

/// Functions and tests from one or more parsed units, each statement tagged
/// with its unit index for coverage accounting.
pub struct LoadedProgram {
    pub unit_names: Vec<String>,
    fns: HashMap<String, (usize, FnDef)>,
    tests: Vec<(usize, TestDef)>,
}

impl LoadedProgram {
    pub fn link(units: Vec<(String, Module)>) -> Result<LoadedProgram, ParseError> {
        let mut fns = HashMap::new();
        let mut tests = Vec::new();
        let mut unit_names = Vec::new();
        let mut test_names = BTreeSet::new();
        for (idx, (name, module)) in units.into_iter().enumerate() {
            unit_names.push(name);
            for f in module.fns {
                if fns.insert(f.name.clone(), (idx, f.clone())).is_some() {
                    return Err(ParseError::Duplicate(f.name));
                }
            }
            for t in module.tests {
                if !test_names.insert(t.name.clone()) {
                    return Err(ParseError::Duplicate(t.name));
                }
                tests.push((idx, t));
            }
        }
        Ok(LoadedProgram {
            unit_names,
            fns,
            tests,
        })
    }

    /// Test names in declaration order.
    pub fn test_names(&self) -> Vec<String> {
        self.tests.iter().map(|(_, t)| t.name.clone()).collect()
    }
}

const MAX_CALL_DEPTH: usize = 64;

enum Flow {
    Normal,
    Returned(Value),
}

pub struct Interpreter<'p> {
    program: &'p LoadedProgram,
    fuel: Option<u64>,
    remaining: u64,
    depth: usize,
    /// (unit index, line) pairs executed, when coverage tracking is on.
    covered: Option<BTreeSet<(usize, u32)>>,
}

impl<'p> Interpreter<'p> {
    pub fn new(program: &'p LoadedProgram) -> Self {
        Interpreter {
            program,
            fuel: None,
            remaining: 0,
            depth: 0,
            covered: None,
        }
    }

    pub fn with_fuel(mut self, fuel: u64) -> Self {
        self.fuel = Some(fuel);
        self
    }

    pub fn with_coverage(mut self) -> Self {
        self.covered = Some(BTreeSet::new());
        self
    }

    /// Lines executed so far, per unit index.
    pub fn coverage(&self) -> Option<&BTreeSet<(usize, u32)>> {
        self.covered.as_ref()
    }

    /// Run one test block by name.
    pub fn run_test(&mut self, name: &str) -> Option<TestResult> {
        let (unit, test) = self
            .program
            .tests
            .iter()
            .find(|(_, t)| t.name == name)
            .map(|(u, t)| (*u, t.clone()))?;
        self.remaining = self.fuel.unwrap_or(0);
        self.depth = 0;
        let mut env = HashMap::new();
        Some(match self.exec_block(unit, &test.body, &mut env) {
            Ok(_) => TestResult::Pass,
            Err(RuntimeError::FuelExhausted) => TestResult::FuelExhausted,
            Err(RuntimeError::Fault { line, message }) => {
                TestResult::Fail(format!("line {line}: {message}"))
            }
        })
    }

    fn tick(&mut self) -> Result<(), RuntimeError> {
        if self.fuel.is_some() {
            if self.remaining == 0 {
                return Err(RuntimeError::FuelExhausted);
            }
            self.remaining -= 1;
        }
        Ok(())
    }

    fn touch(&mut self, unit: usize, line: u32) {
        if let Some(cov) = self.covered.as_mut() {
            cov.insert((unit, line));
        }
    }

    fn exec_block(
        &mut self,
        unit: usize,
        stmts: &[Stmt],
        env: &mut HashMap<String, Value>,
    ) -> Result<Flow, RuntimeError> {
        for stmt in stmts {
            match self.exec_stmt(unit, stmt, env)? {
                Flow::Returned(v) => return Ok(Flow::Returned(v)),
                Flow::Normal => {}
            }
        }
        Ok(Flow::Normal)
    }

    fn exec_stmt(
        &mut self,
        unit: usize,
        stmt: &Stmt,
        env: &mut HashMap<String, Value>,
    ) -> Result<Flow, RuntimeError> {
        self.tick()?;
        match stmt {
            Stmt::Let { name, expr, line } => {
                self.touch(unit, *line);
                let v = self.eval(unit, expr, env)?;
                env.insert(name.clone(), v);
                Ok(Flow::Normal)
            }
            Stmt::Assign { name, expr, line } => {
                self.touch(unit, *line);
                let v = self.eval(unit, expr, env)?;
                match env.get_mut(name) {
                    Some(slot) => {
                        *slot = v;
                        Ok(Flow::Normal)
                    }
                    None => Err(RuntimeError::Fault {
                        line: *line,
                        message: format!("assignment to undeclared variable `{name}`"),
                    }),
                }
            }
            Stmt::If {
                cond,
                then_branch,
                else_branch,
                line,
            } => {
                self.touch(unit, *line);
                if self.eval_bool(unit, cond, env, *line)? {
                    self.exec_block(unit, then_branch, env)
                } else {
                    self.exec_block(unit, else_branch, env)
                }
            }
            Stmt::While { cond, body, line } => {
                self.touch(unit, *line);
                while self.eval_bool(unit, cond, env, *line)? {
                    self.tick()?;
                    if let Flow::Returned(v) = self.exec_block(unit, body, env)? {
                        return Ok(Flow::Returned(v));
                    }
                }
                Ok(Flow::Normal)
            }
            Stmt::Return { expr, line } => {
                self.touch(unit, *line);
                let v = self.eval(unit, expr, env)?;
                Ok(Flow::Returned(v))
            }
            Stmt::Assert { expr, line } => {
                self.touch(unit, *line);
                if self.eval_bool(unit, expr, env, *line)? {
                    Ok(Flow::Normal)
                } else {
                    Err(RuntimeError::Fault {
                        line: *line,
                        message: "assertion failed".to_string(),
                    })
                }
            }
        }
    }

    fn eval_bool(
        &mut self,
        unit: usize,
        expr: &Expr,
        env: &mut HashMap<String, Value>,
        line: u32,
    ) -> Result<bool, RuntimeError> {
        match self.eval(unit, expr, env)? {
            Value::Bool(b) => Ok(b),
            v => Err(RuntimeError::Fault {
                line,
                message: format!("expected bool, found {}", v.type_name()),
            }),
        }
    }

    fn eval(
        &mut self,
        unit: usize,
        expr: &Expr,
        env: &mut HashMap<String, Value>,
    ) -> Result<Value, RuntimeError> {
        match expr {
            Expr::Int(v) => Ok(Value::Int(*v)),
            Expr::Bool(b) => Ok(Value::Bool(*b)),
            Expr::Var(name) => env.get(name).copied().ok_or_else(|| RuntimeError::Fault {
                line: 0,
                message: format!("unknown variable `{name}`"),
            }),
            Expr::Neg(inner) => match self.eval(unit, inner, env)? {
                Value::Int(v) => v.checked_neg().map(Value::Int).ok_or(RuntimeError::Fault {
                    line: 0,
                    message: "integer overflow in negation".to_string(),
                }),
                v => Err(RuntimeError::Fault {
                    line: 0,
                    message: format!("cannot negate {}", v.type_name()),
                }),
            },
            Expr::Not(inner) => match self.eval(unit, inner, env)? {
                Value::Bool(b) => Ok(Value::Bool(!b)),
                v => Err(RuntimeError::Fault {
                    line: 0,
                    message: format!("cannot apply `not` to {}", v.type_name()),
                }),
            },
            Expr::Binary { op, lhs, rhs } => self.eval_binary(unit, *op, lhs, rhs, env),
            Expr::Call { name, args, line } => {
                let (fn_unit, def) = match self.program.fns.get(name) {
                    Some((u, f)) => (*u, f.clone()),
                    None => {
                        return Err(RuntimeError::Fault {
                            line: *line,
                            message: format!("unknown function `{name}`"),
                        })
                    }
                };
                if args.len() != def.params.len() {
                    return Err(RuntimeError::Fault {
                        line: *line,
                        message: format!(
                            "`{name}` expects {} arguments, got {}",
                            def.params.len(),
                            args.len()
                        ),
                    });
                }
                if self.depth >= MAX_CALL_DEPTH {
                    return Err(RuntimeError::Fault {
                        line: *line,
                        message: "call depth limit exceeded".to_string(),
                    });
                }
                let mut frame = HashMap::with_capacity(def.params.len());
                for (param, arg) in def.params.iter().zip(args) {
                    let v = self.eval(unit, arg, env)?;
                    frame.insert(param.clone(), v);
                }
                self.depth += 1;
                self.touch(fn_unit, def.line);
                let flow = self.exec_block(fn_unit, &def.body, &mut frame);
                self.depth -= 1;
                match flow? {
                    Flow::Returned(v) => Ok(v),
                    Flow::Normal => Err(RuntimeError::Fault {
                        line: def.line,
                        message: format!("`{name}` ended without returning"),
                    }),
                }
            }
        }
    }

    fn eval_binary(
        &mut self,
        unit: usize,
        op: BinOp,
        lhs: &Expr,
        rhs: &Expr,
        env: &mut HashMap<String, Value>,
    ) -> Result<Value, RuntimeError> {
        // Short-circuit forms first.
        if matches!(op, BinOp::And | BinOp::Or) {
            let l = match self.eval(unit, lhs, env)? {
                Value::Bool(b) => b,
                v => {
                    return Err(RuntimeError::Fault {
                        line: 0,
                        message: format!("logical operand must be bool, found {}", v.type_name()),
                    })
                }
            };
            let short = match op {
                BinOp::And => !l,
                _ => l,
            };
            if short {
                return Ok(Value::Bool(l));
            }
            return match self.eval(unit, rhs, env)? {
                Value::Bool(b) => Ok(Value::Bool(b)),
                v => Err(RuntimeError::Fault {
                    line: 0,
                    message: format!("logical operand must be bool, found {}", v.type_name()),
                }),
            };
        }

        let l = self.eval(unit, lhs, env)?;
        let r = self.eval(unit, rhs, env)?;
        let fault = |message: String| RuntimeError::Fault { line: 0, message };
        match op {
            BinOp::Eq | BinOp::Ne => {
                let eq = match (l, r) {
                    (Value::Int(a), Value::Int(b)) => a == b,
                    (Value::Bool(a), Value::Bool(b)) => a == b,
                    (a, b) => {
                        return Err(fault(format!(
                            "cannot compare {} with {}",
                            a.type_name(),
                            b.type_name()
                        )))
                    }
                };
                Ok(Value::Bool(if op == BinOp::Eq { eq } else { !eq }))
            }
            _ => {
                let (a, b) = match (l, r) {
                    (Value::Int(a), Value::Int(b)) => (a, b),
                    (a, b) => {
                        return Err(fault(format!(
                            "arithmetic needs ints, found {} and {}",
                            a.type_name(),
                            b.type_name()
                        )))
                    }
                };
                match op {
                    BinOp::Add => a
                        .checked_add(b)
                        .map(Value::Int)
                        .ok_or_else(|| fault("integer overflow in `+`".into())),
                    BinOp::Sub => a
                        .checked_sub(b)
                        .map(Value::Int)
                        .ok_or_else(|| fault("integer overflow in `-`".into())),
                    BinOp::Mul => a
                        .checked_mul(b)
                        .map(Value::Int)
                        .ok_or_else(|| fault("integer overflow in `*`".into())),
                    BinOp::Div => a
                        .checked_div(b)
                        .map(Value::Int)
                        .ok_or_else(|| fault("division by zero".into())),
                    BinOp::Lt => Ok(Value::Bool(a < b)),
                    BinOp::Le => Ok(Value::Bool(a <= b)),
                    BinOp::Gt => Ok(Value::Bool(a > b)),
                    BinOp::Ge => Ok(Value::Bool(a >= b)),
                    BinOp::Eq | BinOp::Ne | BinOp::And | BinOp::Or => unreachable!(),
                }
            }
        }
    }
}
