use super::span::Span;
use super::SyntaxError;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    Str(String),
    // keywords
    Class,
    Extends,
    Static,
    Test,
    Void,
    KwInt,
    KwBool,
    KwStr,
    If,
    Else,
    While,
    Return,
    Try,
    Catch,
    Assert,
    New,
    Null,
    True,
    False,
    This,
    // punctuation
    LBrace,
    RBrace,
    LParen,
    RParen,
    Semi,
    Comma,
    Dot,
    Assign,
    EqEq,
    NotEq,
    Lt,
    Le,
    Gt,
    Ge,
    Plus,
    Minus,
    Star,
    Slash,
    Percent,
    Bang,
    AndAnd,
    OrOr,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(_) => "identifier",
            Tok::Int(_) => "integer literal",
            Tok::Str(_) => "string literal",
            Tok::Class => "`class`",
            Tok::Extends => "`extends`",
            Tok::Static => "`static`",
            Tok::Test => "`test`",
            Tok::Void => "`void`",
            Tok::KwInt => "`int`",
            Tok::KwBool => "`bool`",
            Tok::KwStr => "`str`",
            Tok::If => "`if`",
            Tok::Else => "`else`",
            Tok::While => "`while`",
            Tok::Return => "`return`",
            Tok::Try => "`try`",
            Tok::Catch => "`catch`",
            Tok::Assert => "`assert`",
            Tok::New => "`new`",
            Tok::Null => "`null`",
            Tok::True => "`true`",
            Tok::False => "`false`",
            Tok::This => "`this`",
            Tok::LBrace => "`{`",
            Tok::RBrace => "`}`",
            Tok::LParen => "`(`",
            Tok::RParen => "`)`",
            Tok::Semi => "`;`",
            Tok::Comma => "`,`",
            Tok::Dot => "`.`",
            Tok::Assign => "`=`",
            Tok::EqEq => "`==`",
            Tok::NotEq => "`!=`",
            Tok::Lt => "`<`",
            Tok::Le => "`<=`",
            Tok::Gt => "`>`",
            Tok::Ge => "`>=`",
            Tok::Plus => "`+`",
            Tok::Minus => "`-`",
            Tok::Star => "`*`",
            Tok::Slash => "`/`",
            Tok::Percent => "`%`",
            Tok::Bang => "`!`",
            Tok::AndAnd => "`&&`",
            Tok::OrOr => "`||`",
            Tok::Eof => "end of file",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

fn keyword(word: &str) -> Option<Tok> {
    Some(match word {
        "class" => Tok::Class,
        "extends" => Tok::Extends,
        "static" => Tok::Static,
        "test" => Tok::Test,
        "void" => Tok::Void,
        "int" => Tok::KwInt,
        "bool" => Tok::KwBool,
        "str" => Tok::KwStr,
        "if" => Tok::If,
        "else" => Tok::Else,
        "while" => Tok::While,
        "return" => Tok::Return,
        "try" => Tok::Try,
        "catch" => Tok::Catch,
        "assert" => Tok::Assert,
        "new" => Tok::New,
        "null" => Tok::Null,
        "true" => Tok::True,
        "false" => Tok::False,
        "this" => Tok::This,
        _ => return None,
    })
}

struct Cursor<'a> {
    src: &'a [u8],
    pos: usize,
    line: u32,
    col: u32,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn peek2(&self) -> Option<u8> {
        self.src.get(self.pos + 1).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek()?;
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else if c & 0xC0 != 0x80 {
            // count characters, not UTF-8 continuation bytes
            self.col += 1;
        }
        Some(c)
    }

    fn error(&self, message: impl Into<String>) -> SyntaxError {
        SyntaxError {
            line: self.line,
            col: self.col,
            message: message.into(),
            expected: Vec::new(),
        }
    }
}

pub fn tokenize(source: &str) -> Result<Vec<Token>, SyntaxError> {
    let mut cur = Cursor {
        src: source.as_bytes(),
        pos: 0,
        line: 1,
        col: 1,
    };
    let mut out = Vec::new();
    loop {
        // whitespace and comments
        loop {
            match (cur.peek(), cur.peek2()) {
                (Some(c), _) if c.is_ascii_whitespace() => {
                    cur.bump();
                }
                (Some(b'/'), Some(b'/')) => {
                    while let Some(c) = cur.peek() {
                        if c == b'\n' {
                            break;
                        }
                        cur.bump();
                    }
                }
                (Some(b'/'), Some(b'*')) => {
                    let err = cur.error("unterminated block comment");
                    cur.bump();
                    cur.bump();
                    loop {
                        match (cur.peek(), cur.peek2()) {
                            (Some(b'*'), Some(b'/')) => {
                                cur.bump();
                                cur.bump();
                                break;
                            }
                            (Some(_), _) => {
                                cur.bump();
                            }
                            (None, _) => return Err(err),
                        }
                    }
                }
                _ => break,
            }
        }

        let (line, col, start) = (cur.line, cur.col, cur.pos);
        let Some(c) = cur.peek() else {
            out.push(Token {
                tok: Tok::Eof,
                span: Span::new(line, col, start as u32, start as u32),
            });
            return Ok(out);
        };

        let tok = if c.is_ascii_alphabetic() || c == b'_' {
            while matches!(cur.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_') {
                cur.bump();
            }
            let word = &source[start..cur.pos];
            keyword(word).unwrap_or_else(|| Tok::Ident(word.to_string()))
        } else if c.is_ascii_digit() {
            while matches!(cur.peek(), Some(c) if c.is_ascii_digit()) {
                cur.bump();
            }
            let text = &source[start..cur.pos];
            let value = text
                .parse::<i64>()
                .map_err(|_| cur.error(format!("integer literal `{text}` out of range")))?;
            Tok::Int(value)
        } else if c == b'"' {
            let err = cur.error("unterminated string literal");
            cur.bump();
            let mut value = String::new();
            loop {
                match cur.peek() {
                    None | Some(b'\n') => return Err(err),
                    Some(b'"') => {
                        cur.bump();
                        break;
                    }
                    Some(b'\\') => {
                        cur.bump();
                        let esc = cur.bump().ok_or_else(|| err.clone())?;
                        value.push(match esc {
                            b'n' => '\n',
                            b't' => '\t',
                            b'"' => '"',
                            b'\\' => '\\',
                            other => {
                                return Err(cur.error(format!(
                                    "unknown escape `\\{}`",
                                    other as char
                                )))
                            }
                        });
                    }
                    Some(_) => {
                        // copy one UTF-8 scalar
                        let rest = &source[cur.pos..];
                        let ch = rest.chars().next().unwrap();
                        for _ in 0..ch.len_utf8() {
                            cur.bump();
                        }
                        value.push(ch);
                    }
                }
            }
            Tok::Str(value)
        } else {
            cur.bump();
            let two = |cur: &mut Cursor, next: u8, yes: Tok, no: Tok| {
                if cur.peek() == Some(next) {
                    cur.bump();
                    yes
                } else {
                    no
                }
            };
            match c {
                b'{' => Tok::LBrace,
                b'}' => Tok::RBrace,
                b'(' => Tok::LParen,
                b')' => Tok::RParen,
                b';' => Tok::Semi,
                b',' => Tok::Comma,
                b'.' => Tok::Dot,
                b'+' => Tok::Plus,
                b'-' => Tok::Minus,
                b'*' => Tok::Star,
                b'/' => Tok::Slash,
                b'%' => Tok::Percent,
                b'=' => two(&mut cur, b'=', Tok::EqEq, Tok::Assign),
                b'!' => two(&mut cur, b'=', Tok::NotEq, Tok::Bang),
                b'<' => two(&mut cur, b'=', Tok::Le, Tok::Lt),
                b'>' => two(&mut cur, b'=', Tok::Ge, Tok::Gt),
                b'&' if cur.peek() == Some(b'&') => {
                    cur.bump();
                    Tok::AndAnd
                }
                b'|' if cur.peek() == Some(b'|') => {
                    cur.bump();
                    Tok::OrOr
                }
                other => {
                    return Err(SyntaxError {
                        line,
                        col,
                        message: format!("unexpected character `{}`", other as char),
                        expected: Vec::new(),
                    })
                }
            }
        };
        out.push(Token {
            tok,
            span: Span::new(line, col, start as u32, cur.pos as u32),
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(src: &str) -> Vec<Tok> {
        tokenize(src).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn operators_and_keywords() {
        assert_eq!(
            toks("a == b != !c && d || e <= f"),
            vec![
                Tok::Ident("a".into()),
                Tok::EqEq,
                Tok::Ident("b".into()),
                Tok::NotEq,
                Tok::Bang,
                Tok::Ident("c".into()),
                Tok::AndAnd,
                Tok::Ident("d".into()),
                Tok::OrOr,
                Tok::Ident("e".into()),
                Tok::Le,
                Tok::Ident("f".into()),
                Tok::Eof
            ]
        );
        assert_eq!(toks("class test"), vec![Tok::Class, Tok::Test, Tok::Eof]);
    }

    #[test]
    fn comments_and_positions() {
        let t = tokenize("// hi\n  /* x\n y */ foo").unwrap();
        assert_eq!(t[0].tok, Tok::Ident("foo".into()));
        assert_eq!((t[0].span.line, t[0].span.col), (3, 7));
    }

    #[test]
    fn string_escapes() {
        assert_eq!(
            toks(r#""a\"b\n""#),
            vec![Tok::Str("a\"b\n".into()), Tok::Eof]
        );
        assert!(tokenize("\"open").is_err());
    }

    #[test]
    fn stray_character() {
        let e = tokenize("a # b").unwrap_err();
        assert_eq!((e.line, e.col), (1, 3));
    }
}
