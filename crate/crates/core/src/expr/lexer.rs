use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Number,
    Identifier,
    Operator,
    Paren,
    Comma,
}

/// A lexeme together with its byte offset in the source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub lexeme: String,
    pub position: usize,
}

/// Splits `source` into tokens, skipping ASCII whitespace.
pub fn tokenize(source: &str) -> Result<Vec<Token>> {
    let bytes = source.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let kind = if c.is_ascii_digit() || c == b'.' {
            i = scan_number(bytes, i)?;
            TokenKind::Number
        } else if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            TokenKind::Identifier
        } else {
            i += 1;
            match c {
                b'+' | b'-' | b'*' | b'/' | b'^' => TokenKind::Operator,
                b'(' | b')' => TokenKind::Paren,
                b',' => TokenKind::Comma,
                _ => {
                    let ch = source[start..].chars().next().unwrap_or('?');
                    return Err(Error::Lex {
                        offset: start,
                        message: format!("unknown character '{ch}'"),
                    });
                }
            }
        };
        tokens.push(Token {
            kind,
            lexeme: source[start..i].to_string(),
            position: start,
        });
    }
    Ok(tokens)
}

fn scan_number(bytes: &[u8], start: usize) -> Result<usize> {
    let malformed = |offset: usize| Error::Lex {
        offset,
        message: "malformed number literal".into(),
    };
    let mut i = start;
    let mut digits = 0;
    while i < bytes.len() && bytes[i].is_ascii_digit() {
        i += 1;
        digits += 1;
    }
    if i < bytes.len() && bytes[i] == b'.' {
        i += 1;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
            digits += 1;
        }
    }
    if digits == 0 {
        return Err(malformed(start));
    }
    if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
        i += 1;
        if i < bytes.len() && (bytes[i] == b'+' || bytes[i] == b'-') {
            i += 1;
        }
        let exp_start = i;
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
        if i == exp_start {
            return Err(malformed(start));
        }
    }
    if i < bytes.len() && (bytes[i] == b'.' || bytes[i].is_ascii_alphabetic() || bytes[i] == b'_') {
        return Err(malformed(start));
    }
    let text = std::str::from_utf8(&bytes[start..i]).map_err(|_| malformed(start))?;
    match text.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(i),
        _ => Err(malformed(start)),
    }
}
