//! Shared helpers for the integration and acceptance suites.
//!
//! Each test target compiles this module independently and uses a subset.
#![allow(dead_code)]

use std::env;
use std::path::PathBuf;

/// Locates a corpus matrix by stem (`lung2`, `torso2`). Looks in
/// `$SPTRSV_DATA_DIR`, then `data/` relative to the workspace root and the
/// current directory.
pub fn find_matrix(stem: &str) -> Option<PathBuf> {
    let mut candidates = Vec::new();
    if let Ok(dir) = env::var("SPTRSV_DATA_DIR") {
        candidates.push(PathBuf::from(dir).join(format!("{stem}.mtx")));
    }
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    candidates.push(manifest.join("../../data").join(format!("{stem}.mtx")));
    candidates.push(PathBuf::from("data").join(format!("{stem}.mtx")));
    candidates.into_iter().find(|p| p.is_file())
}

/// Minimal interpreter for emitted kernel text: executes every `x[i] = ...;`
/// statement in file order with C expression semantics (left-associative
/// `+`/`-`, `*`/`/` binding tighter, parentheses, unary minus).
pub fn execute_kernel(source: &str, n: usize) -> Vec<f64> {
    let mut x = vec![0.0f64; n];
    for line in source.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with("void") || line == "}" {
            continue;
        }
        let (lhs, rhs) = line.split_once('=').expect("statement has an assignment");
        let idx: usize = lhs
            .trim()
            .strip_prefix("x[")
            .and_then(|s| s.strip_suffix("]").map(str::trim))
            .and_then(|s| s.parse().ok())
            .expect("left side is x[i]");
        let rhs = rhs.trim().strip_suffix(';').expect("statement ends with ;");
        let mut parser = Parser {
            tokens: tokenize(rhs),
            pos: 0,
            x: &x,
        };
        let value = parser.expr();
        assert!(parser.pos == parser.tokens.len(), "trailing tokens in {line:?}");
        x[idx] = value;
    }
    x
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    XRef(usize),
    Plus,
    Minus,
    Star,
    Slash,
    Open,
    Close,
}

fn tokenize(text: &str) -> Vec<Token> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b' ' => i += 1,
            b'+' => {
                tokens.push(Token::Plus);
                i += 1;
            }
            b'-' => {
                tokens.push(Token::Minus);
                i += 1;
            }
            b'*' => {
                tokens.push(Token::Star);
                i += 1;
            }
            b'/' => {
                tokens.push(Token::Slash);
                i += 1;
            }
            b'(' => {
                tokens.push(Token::Open);
                i += 1;
            }
            b')' => {
                tokens.push(Token::Close);
                i += 1;
            }
            b'x' => {
                let close = text[i..].find(']').expect("x[ ref closes") + i;
                let idx: usize = text[i + 2..close].parse().expect("x index parses");
                tokens.push(Token::XRef(idx));
                i = close + 1;
            }
            b'0'..=b'9' | b'.' => {
                let mut j = i;
                while j < bytes.len() {
                    match bytes[j] {
                        b'0'..=b'9' | b'.' => j += 1,
                        b'e' | b'E' => {
                            j += 1;
                            if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                                j += 1;
                            }
                        }
                        _ => break,
                    }
                }
                let v: f64 = text[i..j].parse().expect("number parses");
                tokens.push(Token::Num(v));
                i = j;
            }
            other => panic!("unexpected byte {:?} in {text:?}", other as char),
        }
    }
    tokens
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    x: &'a [f64],
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expr(&mut self) -> f64 {
        let mut acc = self.term();
        while let Some(op) = self.peek() {
            match op {
                Token::Plus => {
                    self.pos += 1;
                    acc += self.term();
                }
                Token::Minus => {
                    self.pos += 1;
                    acc -= self.term();
                }
                _ => break,
            }
        }
        acc
    }

    fn term(&mut self) -> f64 {
        let mut acc = self.factor();
        while let Some(op) = self.peek() {
            match op {
                Token::Star => {
                    self.pos += 1;
                    acc *= self.factor();
                }
                Token::Slash => {
                    self.pos += 1;
                    acc /= self.factor();
                }
                _ => break,
            }
        }
        acc
    }

    fn factor(&mut self) -> f64 {
        match self.next().expect("factor expected") {
            Token::Minus => -self.factor(),
            Token::Num(v) => v,
            Token::XRef(i) => self.x[i],
            Token::Open => {
                let v = self.expr();
                assert_eq!(self.next(), Some(Token::Close), "unbalanced parens");
                v
            }
            other => panic!("unexpected token {other:?}"),
        }
    }
}
