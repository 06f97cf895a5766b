//! Recursive-descent parser. Whitespace is insignificant; offsets in errors
//! are 1-based byte positions into the original text.

use super::{BinOp, Expr, Func, ParseError};

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

struct Lexer<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokens(text: &'a str) -> Result<Vec<(Token, usize)>, ParseError> {
        let mut lx = Lexer {
            bytes: text.as_bytes(),
            pos: 0,
        };
        let mut out = Vec::new();
        loop {
            lx.skip_ws();
            if lx.pos >= lx.bytes.len() {
                return Ok(out);
            }
            let start = lx.pos + 1; // 1-based
            let c = lx.bytes[lx.pos];
            let tok = match c {
                b'+' => {
                    lx.pos += 1;
                    Token::Plus
                }
                b'-' => {
                    lx.pos += 1;
                    Token::Minus
                }
                b'*' => {
                    lx.pos += 1;
                    Token::Star
                }
                b'/' => {
                    lx.pos += 1;
                    Token::Slash
                }
                b'^' => {
                    lx.pos += 1;
                    Token::Caret
                }
                b'(' => {
                    lx.pos += 1;
                    Token::LParen
                }
                b')' => {
                    lx.pos += 1;
                    Token::RParen
                }
                b'0'..=b'9' => lx.number(start)?,
                c if c == b'_' || c.is_ascii_alphabetic() => lx.ident(),
                other => {
                    return Err(ParseError::Syntax {
                        offset: start,
                        message: format!("unexpected character `{}`", other as char),
                    })
                }
            };
            out.push((tok, start));
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn number(&mut self, start: usize) -> Result<Token, ParseError> {
        let begin = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos < self.bytes.len() && self.bytes[self.pos] == b'.' {
            self.pos += 1;
            while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
        }
        if self.pos < self.bytes.len() && matches!(self.bytes[self.pos], b'e' | b'E') {
            // Exponent only if followed by digits (with optional sign);
            // otherwise leave the `e` for the identifier lexer.
            let mut probe = self.pos + 1;
            if probe < self.bytes.len() && matches!(self.bytes[probe], b'+' | b'-') {
                probe += 1;
            }
            if probe < self.bytes.len() && self.bytes[probe].is_ascii_digit() {
                self.pos = probe;
                while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
            }
        }
        let text = std::str::from_utf8(&self.bytes[begin..self.pos]).expect("ascii");
        text.parse::<f64>()
            .map(Token::Num)
            .map_err(|_| ParseError::Syntax {
                offset: start,
                message: format!("invalid number `{text}`"),
            })
    }

    fn ident(&mut self) -> Token {
        let begin = self.pos;
        while self.pos < self.bytes.len()
            && (self.bytes[self.pos] == b'_' || self.bytes[self.pos].is_ascii_alphanumeric())
        {
            self.pos += 1;
        }
        Token::Ident(
            std::str::from_utf8(&self.bytes[begin..self.pos])
                .expect("ascii")
                .to_string(),
        )
    }
}

struct Parser {
    tokens: Vec<(Token, usize)>,
    index: usize,
    end_offset: usize,
}

/// Parses an expression. The whole input must be consumed.
pub fn parse(text: &str) -> Result<Expr, ParseError> {
    if text.trim().is_empty() {
        return Err(ParseError::Syntax {
            offset: 1,
            message: "empty expression".to_string(),
        });
    }
    let tokens = Lexer::tokens(text)?;
    let mut parser = Parser {
        tokens,
        index: 0,
        end_offset: text.len() + 1,
    };
    let expr = parser.expr()?;
    if let Some((tok, offset)) = parser.peek() {
        return Err(ParseError::Syntax {
            offset,
            message: format!("unexpected token `{}`", describe(&tok)),
        });
    }
    Ok(expr)
}

fn describe(tok: &Token) -> String {
    match tok {
        Token::Num(v) => format!("{v}"),
        Token::Ident(s) => s.clone(),
        Token::Plus => "+".into(),
        Token::Minus => "-".into(),
        Token::Star => "*".into(),
        Token::Slash => "/".into(),
        Token::Caret => "^".into(),
        Token::LParen => "(".into(),
        Token::RParen => ")".into(),
    }
}

impl Parser {
    fn peek(&self) -> Option<(Token, usize)> {
        self.tokens.get(self.index).cloned()
    }

    fn advance(&mut self) -> Option<(Token, usize)> {
        let tok = self.tokens.get(self.index).cloned();
        if tok.is_some() {
            self.index += 1;
        }
        tok
    }

    fn expect(&mut self, want: Token, what: &str) -> Result<(), ParseError> {
        match self.advance() {
            Some((tok, _)) if tok == want => Ok(()),
            Some((tok, offset)) => Err(ParseError::Syntax {
                offset,
                message: format!("expected {what}, found `{}`", describe(&tok)),
            }),
            None => Err(ParseError::Syntax {
                offset: self.end_offset,
                message: format!("expected {what}, found end of input"),
            }),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        while let Some((tok, _)) = self.peek() {
            let op = match tok {
                Token::Plus => BinOp::Add,
                Token::Minus => BinOp::Sub,
                _ => break,
            };
            self.advance();
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        while let Some((tok, _)) = self.peek() {
            let op = match tok {
                Token::Star => BinOp::Mul,
                Token::Slash => BinOp::Div,
                _ => break,
            };
            self.advance();
            let rhs = self.factor()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    // factor := '-' factor | power; `^` binds tighter than unary minus.
    fn factor(&mut self) -> Result<Expr, ParseError> {
        if let Some((Token::Minus, _)) = self.peek() {
            self.advance();
            return Ok(-self.factor()?);
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if let Some((Token::Caret, _)) = self.peek() {
            self.advance();
            let exponent = self.factor()?; // right-associative
            return Ok(base.pow(exponent));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.advance() {
            Some((Token::Num(v), _)) => Ok(Expr::Num(v)),
            Some((Token::LParen, _)) => {
                let inner = self.expr()?;
                self.expect(Token::RParen, "`)`")?;
                Ok(inner)
            }
            Some((Token::Ident(name), offset)) => {
                if let Some((Token::LParen, _)) = self.peek() {
                    let func = Func::from_name(&name)
                        .ok_or(ParseError::UnknownFunction { offset, name })?;
                    self.advance();
                    let arg = self.expr()?;
                    self.expect(Token::RParen, "`)`")?;
                    return Ok(Expr::call(func, arg));
                }
                match name.as_str() {
                    "t" => Ok(Expr::Time),
                    "pi" => Ok(Expr::Num(std::f64::consts::PI)),
                    _ => Ok(Expr::Param(name)),
                }
            }
            Some((tok, offset)) => Err(ParseError::Syntax {
                offset,
                message: format!("expected a value, found `{}`", describe(&tok)),
            }),
            None => Err(ParseError::Syntax {
                offset: self.end_offset,
                message: "expected a value, found end of input".to_string(),
            }),
        }
    }
}
