use super::lexer::{Token, TokenKind};
use super::{Expr, Func};
use crate::error::{Error, Result};

/// Parses a token stream.
///
/// Precedence from loosest to tightest: `+ -`, `* /`, unary `-`, `^`.
/// `^` is right associative and its exponent may carry a unary minus.
pub fn parse(tokens: &[Token]) -> Result<Expr> {
    let end = tokens.last().map(|t| t.position + t.lexeme.len()).unwrap_or(0);
    let mut p = Parser { tokens, pos: 0, end };
    if tokens.is_empty() {
        return Err(p.error("empty expression"));
    }
    let e = p.expr()?;
    if let Some(t) = p.peek() {
        let msg = if t.lexeme == ")" {
            "unbalanced parentheses: unmatched ')'".to_string()
        } else {
            format!("unexpected token '{}'", t.lexeme)
        };
        return Err(Error::Parse { offset: t.position, message: msg });
    }
    Ok(e)
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
    end: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&'a Token> {
        self.tokens.get(self.pos)
    }

    fn offset(&self) -> usize {
        self.peek().map(|t| t.position).unwrap_or(self.end)
    }

    fn error(&self, message: &str) -> Error {
        Error::Parse { offset: self.offset(), message: message.to_string() }
    }

    fn eat(&mut self, lexeme: &str) -> bool {
        if self.peek().is_some_and(|t| t.lexeme == lexeme) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat("+") {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat("-") {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat("*") {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat("/") {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat("-") {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        if self.eat("^") {
            let exponent = self.unary()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr> {
        let Some(tok) = self.peek() else {
            return Err(self.error("unexpected end of input"));
        };
        match tok.kind {
            TokenKind::Number => {
                self.pos += 1;
                let v: f64 = tok.lexeme.parse().map_err(|_| Error::Parse {
                    offset: tok.position,
                    message: "malformed number literal".into(),
                })?;
                Ok(Expr::Const(v))
            }
            TokenKind::Identifier => {
                self.pos += 1;
                self.identifier(tok)
            }
            TokenKind::Paren if tok.lexeme == "(" => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(")") {
                    return Err(Error::Parse {
                        offset: self.offset(),
                        message: format!("unbalanced parentheses: '(' at byte {} is not closed", tok.position),
                    });
                }
                Ok(inner)
            }
            _ => Err(Error::Parse {
                offset: tok.position,
                message: format!("unexpected token '{}'", tok.lexeme),
            }),
        }
    }

    fn identifier(&mut self, tok: &Token) -> Result<Expr> {
        let name = tok.lexeme.as_str();
        if let Some(digits) = name.strip_prefix('x') {
            if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) && !digits.starts_with('0') {
                let index: usize = digits.parse().map_err(|_| Error::Parse {
                    offset: tok.position,
                    message: format!("variable index too large in '{name}'"),
                })?;
                return Ok(Expr::Var(index));
            }
        }
        let (min_args, max_args) = match name {
            "max" | "min" => (2, usize::MAX),
            "abs" | "sqrt" | "exp" | "log" => (1, 1),
            _ => {
                return Err(Error::Parse {
                    offset: tok.position,
                    message: format!("unknown identifier '{name}'"),
                })
            }
        };
        if !self.eat("(") {
            return Err(self.error(&format!("expected '(' after '{name}'")));
        }
        let mut args = vec![self.expr()?];
        while self.eat(",") {
            args.push(self.expr()?);
        }
        if !self.eat(")") {
            return Err(Error::Parse {
                offset: self.offset(),
                message: format!("unbalanced parentheses: call '{name}' at byte {} is not closed", tok.position),
            });
        }
        if args.len() < min_args || args.len() > max_args {
            let expected = if max_args == usize::MAX {
                format!("at least {min_args}")
            } else {
                format!("exactly {min_args}")
            };
            return Err(Error::Parse {
                offset: tok.position,
                message: format!("wrong argument count for '{name}': expected {expected}, got {}", args.len()),
            });
        }
        let one = |mut a: Vec<Expr>| Box::new(a.remove(0));
        Ok(match name {
            "max" => Expr::Max(args),
            "min" => Expr::Min(args),
            "abs" => Expr::Abs(one(args)),
            "sqrt" => Expr::Call(Func::Sqrt, one(args)),
            "exp" => Expr::Call(Func::Exp, one(args)),
            _ => Expr::Call(Func::Log, one(args)),
        })
    }
}
