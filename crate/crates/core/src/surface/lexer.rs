use std::fmt;

use super::SurfaceError;

#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Tok {
    Ident(String),
    Colon,
    Assign,
    Eq,
    Dot,
    Arrow,
    LBrack,
    RBrack,
    LParen,
    RParen,
    Query,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::Assign => f.write_str("`:=`"),
            Tok::Eq => f.write_str("`=`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::Arrow => f.write_str("`->`"),
            Tok::LBrack => f.write_str("`[`"),
            Tok::RBrack => f.write_str("`]`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Query => f.write_str("`?-`"),
        }
    }
}

pub fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\''
}

pub fn lex(src: &str) -> Result<Vec<(Tok, Pos)>, SurfaceError> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        let mut advance = |n: usize, i: &mut usize| {
            *i += n;
            col += n;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => advance(1, &mut i),
            '%' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            ':' if chars.get(i + 1) == Some(&'=') => {
                out.push((Tok::Assign, pos));
                advance(2, &mut i);
            }
            '-' if chars.get(i + 1) == Some(&'>') => {
                out.push((Tok::Arrow, pos));
                advance(2, &mut i);
            }
            '?' if chars.get(i + 1) == Some(&'-') => {
                out.push((Tok::Query, pos));
                advance(2, &mut i);
            }
            ':' | '=' | '.' | '[' | ']' | '(' | ')' => {
                out.push((
                    match c {
                        ':' => Tok::Colon,
                        '=' => Tok::Eq,
                        '.' => Tok::Dot,
                        '[' => Tok::LBrack,
                        ']' => Tok::RBrack,
                        '(' => Tok::LParen,
                        _ => Tok::RParen,
                    },
                    pos,
                ));
                advance(1, &mut i);
            }
            c if is_ident_char(c) => {
                let start = i;
                while i < chars.len() && is_ident_char(chars[i]) {
                    i += 1;
                }
                col += i - start;
                out.push((Tok::Ident(chars[start..i].iter().collect()), pos));
            }
            other => {
                return Err(SurfaceError::Syntax {
                    pos,
                    msg: format!("unexpected character `{other}`"),
                })
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokens_and_positions() {
        let toks = lex("get: (element -> sp) -> sp. % comment\n?- [x] H x := y.").unwrap();
        let kinds: Vec<Tok> = toks.iter().map(|t| t.0.clone()).collect();
        assert_eq!(kinds[0], Tok::Ident("get".into()));
        assert_eq!(kinds[1], Tok::Colon);
        assert!(kinds.contains(&Tok::Arrow));
        assert!(kinds.contains(&Tok::Assign));
        let q = toks.iter().find(|t| t.0 == Tok::Query).unwrap();
        assert_eq!(q.1, Pos { line: 2, col: 1 });
    }

    #[test]
    fn generated_prefix_is_rejected() {
        assert!(matches!(lex("$r1"), Err(SurfaceError::Syntax { .. })));
    }
}
