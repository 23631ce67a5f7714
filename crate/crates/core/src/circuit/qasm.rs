// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

//! OpenQASM 2.0 subset reader and writer.
//!
//! Accepted: the `OPENQASM 2.0;` header, `include` lines, exactly one `qreg`,
//! and indexed applications of `u3`, `u`, `cx`, `swap`, `h`, `x`, `rz`, `ry`,
//! `rx`. Parameters are arithmetic expressions over reals and `pi`. Anything
//! else is an error.

use std::f64::consts::PI;
use std::fmt::Write as _;

use super::{Circuit, Gate};
use crate::error::{Result, TopasError};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(f64),
    Int(usize),
    Str,
    Sym(char),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> TopasError {
    TopasError::Syntax {
        line,
        column,
        message: message.into(),
    }
}

fn lex(text: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            col += i - start;
            out.push(Token {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                line: tl,
                col: tc,
            });
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            let mut real = false;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i < chars.len() && chars[i] == '.' {
                real = true;
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    real = true;
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            let tok = if real {
                Tok::Num(s.parse().map_err(|_| syntax(tl, tc, format!("bad number `{s}`")))?)
            } else {
                Tok::Int(s.parse().map_err(|_| syntax(tl, tc, format!("bad integer `{s}`")))?)
            };
            out.push(Token { tok, line: tl, col: tc });
            continue;
        }
        if c == '"' {
            i += 1;
            col += 1;
            while i < chars.len() && chars[i] != '"' {
                if chars[i] == '\n' {
                    return Err(syntax(tl, tc, "unterminated string"));
                }
                i += 1;
                col += 1;
            }
            if i == chars.len() {
                return Err(syntax(tl, tc, "unterminated string"));
            }
            i += 1;
            col += 1;
            out.push(Token {
                tok: Tok::Str,
                line: tl,
                col: tc,
            });
            continue;
        }
        if "()[],;+-*/^".contains(c) {
            i += 1;
            col += 1;
            out.push(Token {
                tok: Tok::Sym(c),
                line: tl,
                col: tc,
            });
            continue;
        }
        return Err(syntax(tl, tc, format!("unexpected character `{c}`")));
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    eof: (usize, usize),
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.toks.get(self.pos)
    }

    fn here(&self) -> (usize, usize) {
        self.peek().map_or(self.eof, |t| (t.line, t.col))
    }

    fn next(&mut self) -> Result<Token> {
        let (l, c) = self.here();
        let t = self
            .toks
            .get(self.pos)
            .cloned()
            .ok_or_else(|| syntax(l, c, "unexpected end of input"))?;
        self.pos += 1;
        Ok(t)
    }

    fn expect_sym(&mut self, s: char) -> Result<()> {
        let t = self.next()?;
        if t.tok == Tok::Sym(s) {
            Ok(())
        } else {
            Err(syntax(t.line, t.col, format!("expected `{s}`, found {:?}", t.tok)))
        }
    }

    fn eat_sym(&mut self, s: char) -> bool {
        if self.peek().is_some_and(|t| t.tok == Tok::Sym(s)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> Result<(String, usize, usize)> {
        let t = self.next()?;
        match t.tok {
            Tok::Ident(s) => Ok((s, t.line, t.col)),
            other => Err(syntax(t.line, t.col, format!("expected identifier, found {other:?}"))),
        }
    }

    fn int(&mut self) -> Result<usize> {
        let t = self.next()?;
        match t.tok {
            Tok::Int(v) => Ok(v),
            other => Err(syntax(t.line, t.col, format!("expected integer, found {other:?}"))),
        }
    }

    // expr := term (('+'|'-') term)*
    fn expr(&mut self) -> Result<f64> {
        let mut v = self.term()?;
        loop {
            if self.eat_sym('+') {
                v += self.term()?;
            } else if self.eat_sym('-') {
                v -= self.term()?;
            } else {
                return Ok(v);
            }
        }
    }

    fn term(&mut self) -> Result<f64> {
        let mut v = self.unary()?;
        loop {
            if self.eat_sym('*') {
                v *= self.unary()?;
            } else if self.eat_sym('/') {
                v /= self.unary()?;
            } else {
                return Ok(v);
            }
        }
    }

    fn unary(&mut self) -> Result<f64> {
        if self.eat_sym('-') {
            return Ok(-self.unary()?);
        }
        if self.eat_sym('+') {
            return self.unary();
        }
        let base = self.atom()?;
        if self.eat_sym('^') {
            return Ok(base.powf(self.unary()?));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<f64> {
        let t = self.next()?;
        match t.tok {
            Tok::Num(v) => Ok(v),
            Tok::Int(v) => Ok(v as f64),
            Tok::Ident(ref s) if s == "pi" => Ok(PI),
            Tok::Sym('(') => {
                let v = self.expr()?;
                self.expect_sym(')')?;
                Ok(v)
            }
            other => Err(syntax(t.line, t.col, format!("expected expression, found {other:?}"))),
        }
    }
}

struct Register {
    name: String,
    size: usize,
}

/// Parses the supported OpenQASM 2.0 subset into a [`Circuit`].
pub fn parse_qasm(text: &str) -> Result<Circuit> {
    let toks = lex(text)?;
    let eof = (text.lines().count().max(1), 1);
    let mut p = Parser { toks, pos: 0, eof };
    let mut reg: Option<Register> = None;
    let mut pending: Vec<(Gate, usize)> = Vec::new();

    while p.peek().is_some() {
        let (kw, line, col) = p.ident()?;
        match kw.as_str() {
            "OPENQASM" => {
                let t = p.next()?;
                match t.tok {
                    Tok::Num(v) if (v - 2.0).abs() < 1e-12 => {}
                    _ => return Err(syntax(t.line, t.col, "only OPENQASM 2.0 is supported")),
                }
                p.expect_sym(';')?;
            }
            "include" => {
                let t = p.next()?;
                if t.tok != Tok::Str {
                    return Err(syntax(t.line, t.col, "expected file name string"));
                }
                p.expect_sym(';')?;
            }
            "qreg" => {
                if reg.is_some() {
                    return Err(TopasError::UnsupportedStatement {
                        keyword: "second qreg".into(),
                        line,
                    });
                }
                let (name, ..) = p.ident()?;
                p.expect_sym('[')?;
                let size = p.int()?;
                p.expect_sym(']')?;
                p.expect_sym(';')?;
                reg = Some(Register { name, size });
            }
            "creg" | "measure" | "barrier" | "reset" | "if" | "gate" | "opaque" => {
                return Err(TopasError::UnsupportedStatement { keyword: kw, line });
            }
            _ => {
                let params = if p.eat_sym('(') {
                    let mut v = vec![p.expr()?];
                    while p.eat_sym(',') {
                        v.push(p.expr()?);
                    }
                    p.expect_sym(')')?;
                    v
                } else {
                    Vec::new()
                };
                let mut args = vec![qubit_arg(&mut p, reg.as_ref())?];
                while p.eat_sym(',') {
                    args.push(qubit_arg(&mut p, reg.as_ref())?);
                }
                p.expect_sym(';')?;
                let gate = build_gate(&kw, &params, &args, line, col)?;
                pending.push((gate, line));
            }
        }
    }
    let width = reg.map_or(0, |r| r.size);
    let mut c = Circuit::new(width);
    for (g, _) in pending {
        c.push(g)?;
    }
    Ok(c)
}

fn qubit_arg(p: &mut Parser, reg: Option<&Register>) -> Result<usize> {
    let (name, line, col) = p.ident()?;
    let reg = reg.ok_or_else(|| syntax(line, col, "gate applied before qreg declaration"))?;
    if name != reg.name {
        return Err(syntax(line, col, format!("unknown register `{name}`")));
    }
    if !p.eat_sym('[') {
        let (l, c) = p.here();
        return Err(syntax(l, c, "register broadcast is not supported; expected `[`"));
    }
    let index = p.int()?;
    p.expect_sym(']')?;
    if index >= reg.size {
        return Err(TopasError::QubitOutOfRange {
            index,
            width: reg.size,
        });
    }
    Ok(index)
}

fn build_gate(name: &str, params: &[f64], args: &[usize], line: usize, col: usize) -> Result<Gate> {
    let (n_params, n_args) = match name {
        "u3" | "u" => (3, 1),
        "cx" | "swap" => (0, 2),
        "h" | "x" => (0, 1),
        "rz" | "ry" | "rx" => (1, 1),
        _ => {
            return Err(TopasError::UnsupportedGate {
                name: name.to_string(),
                line,
            })
        }
    };
    if params.len() != n_params {
        return Err(syntax(
            line,
            col,
            format!("`{name}` takes {n_params} parameter(s), got {}", params.len()),
        ));
    }
    if args.len() != n_args {
        return Err(syntax(
            line,
            col,
            format!("`{name}` takes {n_args} qubit(s), got {}", args.len()),
        ));
    }
    Ok(match name {
        "u3" | "u" => Gate::u3(args[0], params[0], params[1], params[2]),
        "cx" => Gate::cnot(args[0], args[1]),
        "swap" => Gate::swap(args[0], args[1]),
        "h" => Gate::h(args[0]),
        "x" => Gate::x(args[0]),
        "rz" => Gate::rz(args[0], params[0]),
        "ry" => Gate::ry(args[0], params[0]),
        "rx" => Gate::rx(args[0], params[0]),
        _ => unreachable!(),
    })
}

/// Writes the circuit as OpenQASM 2.0 with register `q`. Angles carry 17
/// significant digits so that parsing the output reproduces the IR exactly.
pub fn emit_qasm(c: &Circuit) -> String {
    let mut s = String::from("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
    let _ = writeln!(s, "qreg q[{}];", c.width());
    for g in c.gates() {
        let _ = match *g {
            Gate::U3 {
                qubit,
                theta,
                phi,
                lambda,
            } => writeln!(s, "u3({theta:.16e},{phi:.16e},{lambda:.16e}) q[{qubit}];"),
            Gate::Cnot { control, target } => writeln!(s, "cx q[{control}],q[{target}];"),
            Gate::Swap { a, b } => writeln!(s, "swap q[{a}],q[{b}];"),
        };
    }
    s
}
