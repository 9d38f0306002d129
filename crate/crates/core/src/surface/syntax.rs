//! Raw syntax trees and the recursive-descent parser.

use crate::term_core::Kind;

use super::lexer::{lex, Pos, Tok};
use super::SurfaceError;

#[derive(Clone, Debug, PartialEq)]
pub enum RawType {
    Base(String, Pos),
    Arrow(Box<RawType>, Box<RawType>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum RawTerm {
    Ident(String, Pos),
    App(Box<RawTerm>, Box<RawTerm>),
    Lam {
        var: String,
        ann: Option<RawType>,
        body: Box<RawTerm>,
        pos: Pos,
    },
    Ascribe(Box<RawTerm>, RawType, Pos),
}

#[derive(Clone, Debug, PartialEq)]
pub enum DeclBody {
    Kind(Kind),
    Const(RawType),
    Def(RawType, RawTerm),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Item {
    Decl {
        name: String,
        pos: Pos,
        body: DeclBody,
    },
    Equation {
        lhs: RawTerm,
        rhs: RawTerm,
        pos: Pos,
    },
    /// `H := TERM.`
    Assign {
        name: String,
        pos: Pos,
        value: RawTerm,
    },
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
    end: Pos,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|t| &t.0)
    }

    fn peek2(&self) -> Option<&Tok> {
        self.toks.get(self.at + 1).map(|t| &t.0)
    }

    fn pos(&self) -> Pos {
        self.toks.get(self.at).map(|t| t.1).unwrap_or(self.end)
    }

    fn error<T>(&self, msg: String) -> Result<T, SurfaceError> {
        Err(SurfaceError::Syntax { pos: self.pos(), msg })
    }

    fn unexpected<T>(&self, wanted: &str) -> Result<T, SurfaceError> {
        match self.peek() {
            Some(t) => self.error(format!("expected {wanted}, found {t}")),
            None => self.error(format!("expected {wanted}, found end of input")),
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<Pos, SurfaceError> {
        if self.peek() == Some(&tok) {
            let p = self.pos();
            self.at += 1;
            Ok(p)
        } else {
            self.unexpected(&tok.to_string())
        }
    }

    fn ident(&mut self) -> Result<(String, Pos), SurfaceError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let out = (s.clone(), self.pos());
                self.at += 1;
                Ok(out)
            }
            _ => self.unexpected("an identifier"),
        }
    }

    fn ty(&mut self) -> Result<RawType, SurfaceError> {
        let arg = match self.peek() {
            Some(Tok::LParen) => {
                self.at += 1;
                let t = self.ty()?;
                self.expect(Tok::RParen)?;
                t
            }
            Some(Tok::Ident(_)) => {
                let (n, p) = self.ident()?;
                RawType::Base(n, p)
            }
            _ => return self.unexpected("a type"),
        };
        if self.peek() == Some(&Tok::Arrow) {
            self.at += 1;
            let res = self.ty()?;
            return Ok(RawType::Arrow(Box::new(arg), Box::new(res)));
        }
        Ok(arg)
    }

    fn lambda(&mut self) -> Result<RawTerm, SurfaceError> {
        let pos = self.expect(Tok::LBrack)?;
        let (var, _) = self.ident()?;
        let ann = if self.peek() == Some(&Tok::Colon) {
            self.at += 1;
            Some(self.ty()?)
        } else {
            None
        };
        self.expect(Tok::RBrack)?;
        let body = self.term()?;
        Ok(RawTerm::Lam {
            var,
            ann,
            body: Box::new(body),
            pos,
        })
    }

    fn atom(&mut self) -> Result<Option<RawTerm>, SurfaceError> {
        match self.peek() {
            Some(Tok::Ident(_)) => {
                let (n, p) = self.ident()?;
                Ok(Some(RawTerm::Ident(n, p)))
            }
            Some(Tok::LParen) => {
                let pos = self.pos();
                self.at += 1;
                let t = self.term()?;
                let t = if self.peek() == Some(&Tok::Colon) {
                    self.at += 1;
                    let ty = self.ty()?;
                    RawTerm::Ascribe(Box::new(t), ty, pos)
                } else {
                    t
                };
                self.expect(Tok::RParen)?;
                Ok(Some(t))
            }
            _ => Ok(None),
        }
    }

    fn term(&mut self) -> Result<RawTerm, SurfaceError> {
        if self.peek() == Some(&Tok::LBrack) {
            return self.lambda();
        }
        let Some(mut t) = self.atom()? else {
            return self.unexpected("a term");
        };
        loop {
            if self.peek() == Some(&Tok::LBrack) {
                let arg = self.lambda()?;
                return Ok(RawTerm::App(Box::new(t), Box::new(arg)));
            }
            match self.atom()? {
                Some(arg) => t = RawTerm::App(Box::new(t), Box::new(arg)),
                None => return Ok(t),
            }
        }
    }

    fn decl(&mut self) -> Result<Item, SurfaceError> {
        let (name, pos) = self.ident()?;
        self.expect(Tok::Colon)?;
        if let (Some(Tok::Ident(k)), Some(Tok::Dot)) = (self.peek(), self.peek2()) {
            let kind = match k.as_str() {
                "type" => Some(Kind::Type),
                "cotype" => Some(Kind::Cotype),
                _ => None,
            };
            if let Some(kind) = kind {
                self.at += 2;
                return Ok(Item::Decl {
                    name,
                    pos,
                    body: DeclBody::Kind(kind),
                });
            }
        }
        let ty = self.ty()?;
        let body = if self.peek() == Some(&Tok::Eq) {
            self.at += 1;
            DeclBody::Def(ty, self.term()?)
        } else {
            DeclBody::Const(ty)
        };
        self.expect(Tok::Dot)?;
        Ok(Item::Decl { name, pos, body })
    }

    fn items(&mut self) -> Result<Vec<Item>, SurfaceError> {
        let mut out = Vec::new();
        let mut in_query = false;
        while let Some(tok) = self.peek() {
            match (tok, self.peek2()) {
                (Tok::Query, _) => {
                    self.at += 1;
                    in_query = true;
                }
                (Tok::Ident(_), Some(Tok::Colon)) => out.push(self.decl()?),
                (Tok::Ident(_), Some(Tok::Assign)) => {
                    let (name, pos) = self.ident()?;
                    self.at += 1;
                    let value = self.term()?;
                    self.expect(Tok::Dot)?;
                    out.push(Item::Assign { name, pos, value });
                }
                _ if in_query => {
                    let pos = self.pos();
                    let lhs = self.term()?;
                    self.expect(Tok::Eq)?;
                    let rhs = self.term()?;
                    self.expect(Tok::Dot)?;
                    out.push(Item::Equation { lhs, rhs, pos });
                }
                _ => return self.unexpected("a declaration or `?-`"),
            }
        }
        Ok(out)
    }
}

pub fn parse_items(src: &str) -> Result<Vec<Item>, SurfaceError> {
    let toks = lex(src)?;
    let lines = src.split('\n').count();
    let end = Pos {
        line: lines,
        col: src.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1,
    };
    Parser { toks, at: 0, end }.items()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ident(s: &str) -> RawTerm {
        RawTerm::Ident(s.into(), Pos::default())
    }

    /// Drops positions so trees can be compared structurally.
    fn strip(t: &RawTerm) -> RawTerm {
        match t {
            RawTerm::Ident(s, _) => ident(s),
            RawTerm::App(f, a) => RawTerm::App(Box::new(strip(f)), Box::new(strip(a))),
            RawTerm::Lam { var, body, .. } => RawTerm::Lam {
                var: var.clone(),
                ann: None,
                body: Box::new(strip(body)),
                pos: Pos::default(),
            },
            RawTerm::Ascribe(t, ty, _) => RawTerm::Ascribe(Box::new(strip(t)), ty.clone(), Pos::default()),
        }
    }

    #[test]
    fn application_is_left_associative_and_lambda_extends_right() {
        let items = parse_items("?- [x] put x (H x) = [x] H x.").unwrap();
        let Item::Equation { lhs, .. } = &items[0] else {
            panic!("not an equation")
        };
        let app = |f, a| RawTerm::App(Box::new(f), Box::new(a));
        let want = RawTerm::Lam {
            var: "x".into(),
            ann: None,
            body: Box::new(app(app(ident("put"), ident("x")), app(ident("H"), ident("x")))),
            pos: Pos::default(),
        };
        assert_eq!(strip(lhs), want);
    }

    #[test]
    fn declarations_definitions_and_several_sentences() {
        let src = "conat : cotype.\ncosucc : conat -> conat.\nomega : conat = cosucc omega.\n\
                   ?- omega = (cosucc (cosucc H)). H = omega.";
        let items = parse_items(src).unwrap();
        assert_eq!(items.len(), 5);
        assert!(matches!(&items[0], Item::Decl { body: DeclBody::Kind(Kind::Cotype), .. }));
        assert!(matches!(&items[2], Item::Decl { body: DeclBody::Def(..), .. }));
        assert!(matches!(&items[4], Item::Equation { .. }));
    }

    #[test]
    fn arrows_associate_right() {
        let items = parse_items("get : (element -> sp) -> sp.").unwrap();
        let Item::Decl { body: DeclBody::Const(RawType::Arrow(a, _)), .. } = &items[0] else {
            panic!("bad parse")
        };
        assert!(matches!(**a, RawType::Arrow(..)));
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let err = parse_items("a : type.\n?- x = .").unwrap_err();
        match err {
            SurfaceError::Syntax { pos, .. } => assert_eq!(pos, Pos { line: 2, col: 8 }),
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn equations_need_a_query_marker() {
        assert!(parse_items("x = y.").is_err());
        assert!(parse_items("?-").unwrap().is_empty());
    }
}
