//! Model language. Statements end with `;` and may share a line; `#`
//! comments run to end of line.
//!
//! ```text
//! CONST lambda = 1e-3;
//! INIT up;
//! STATE dead DEATH;
//! up -> dead : 3*lambda;
//! ```
//!
//! States are created on first mention; `STATE` is only needed to mark a
//! death state or to declare one up front. Rates combine constants and
//! numeric literals with `+`, `*` and parentheses.

use super::{MarkovModel, ModelBuilder, ModelError, RateExpr, Span};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(f64),
    Arrow,
    Minus,
    Colon,
    Semi,
    Eq,
    Plus,
    Star,
    LParen,
    RParen,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Num(v) => format!("number {v}"),
            Tok::Arrow => "`->`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Star => "`*`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
        }
    }
}

fn syntax(at: Span, msg: impl Into<String>) -> ModelError {
    ModelError::Syntax { at, msg: msg.into() }
}

fn lex(text: &str) -> Result<Vec<(Tok, Span)>, ModelError> {
    let mut out = Vec::new();
    for (li, line) in text.lines().enumerate() {
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let at = Span {
                line: li + 1,
                col: i + 1,
            };
            let c = chars[i];
            if c == '#' {
                break;
            }
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            if c.is_ascii_alphabetic() || c == '_' {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push((Tok::Ident(chars[start..i].iter().collect()), at));
                continue;
            }
            if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        i = j;
                        while i < chars.len() && chars[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let lit: String = chars[start..i].iter().collect();
                let v = lit
                    .parse::<f64>()
                    .map_err(|_| syntax(at, format!("bad number `{lit}`")))?;
                out.push((Tok::Num(v), at));
                continue;
            }
            let tok = match c {
                '-' if chars.get(i + 1) == Some(&'>') => {
                    i += 1;
                    Tok::Arrow
                }
                '-' => Tok::Minus,
                ':' => Tok::Colon,
                ';' => Tok::Semi,
                '=' => Tok::Eq,
                '+' => Tok::Plus,
                '*' => Tok::Star,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                _ => return Err(syntax(at, format!("unexpected character `{c}`"))),
            };
            i += 1;
            out.push((tok, at));
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, Span)>,
    pos: usize,
    end: Span,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn here(&self) -> Span {
        self.toks.get(self.pos).map_or(self.end, |(_, s)| *s)
    }

    fn next(&mut self) -> Option<(Tok, Span)> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Tok) -> Result<Span, ModelError> {
        match self.next() {
            Some((t, at)) if t == want => Ok(at),
            Some((t, at)) => Err(syntax(
                at,
                format!("expected {}, found {}", want.describe(), t.describe()),
            )),
            None => Err(syntax(
                self.end,
                format!("expected {}, found end of input", want.describe()),
            )),
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, Span), ModelError> {
        match self.next() {
            Some((Tok::Ident(s), at)) => Ok((s, at)),
            Some((t, at)) => Err(syntax(at, format!("expected {what}, found {}", t.describe()))),
            None => Err(syntax(self.end, format!("expected {what}, found end of input"))),
        }
    }

    fn expr(&mut self) -> Result<RateExpr, ModelError> {
        let mut lhs = self.term()?;
        while self.peek() == Some(&Tok::Plus) {
            self.pos += 1;
            lhs = RateExpr::Sum(Box::new(lhs), Box::new(self.term()?));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<RateExpr, ModelError> {
        let mut lhs = self.atom()?;
        while self.peek() == Some(&Tok::Star) {
            self.pos += 1;
            lhs = RateExpr::Product(Box::new(lhs), Box::new(self.atom()?));
        }
        Ok(lhs)
    }

    fn atom(&mut self) -> Result<RateExpr, ModelError> {
        match self.next() {
            Some((Tok::Num(v), _)) => Ok(RateExpr::Num(v)),
            Some((Tok::Ident(s), _)) => Ok(RateExpr::Const(s)),
            Some((Tok::LParen, _)) => {
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Some((t, at)) => Err(syntax(at, format!("expected a rate term, found {}", t.describe()))),
            None => Err(syntax(self.end, "expected a rate term, found end of input")),
        }
    }
}

/// Parses and validates a model. Errors carry `line:col` positions.
pub fn parse_model(text: &str) -> Result<MarkovModel, ModelError> {
    let end = Span {
        line: text.lines().count().max(1),
        col: text.lines().last().map_or(1, |l| l.chars().count() + 1),
    };
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        end,
    };
    let mut b = ModelBuilder::new("");
    while p.peek().is_some() {
        let at = p.here();
        match p.next() {
            Some((Tok::Ident(kw), _)) if kw == "CONST" => {
                let (name, _) = p.ident("a constant name")?;
                p.expect(Tok::Eq)?;
                let negate = p.peek() == Some(&Tok::Minus);
                if negate {
                    p.pos += 1;
                }
                let value = match p.next() {
                    Some((Tok::Num(v), _)) if negate => -v,
                    Some((Tok::Num(v), _)) => v,
                    Some((t, at)) => return Err(syntax(at, format!("expected a number, found {}", t.describe()))),
                    None => return Err(syntax(p.end, "expected a number, found end of input")),
                };
                b.constant(&name, value, at)?;
            }
            Some((Tok::Ident(kw), _)) if kw == "STATE" => {
                let (name, _) = p.ident("a state name")?;
                let death = match p.peek() {
                    Some(Tok::Ident(d)) if d == "DEATH" => {
                        p.pos += 1;
                        true
                    }
                    _ => false,
                };
                b.state(&name, death, at)?;
            }
            Some((Tok::Ident(kw), _)) if kw == "INIT" => {
                let (name, _) = p.ident("a state name")?;
                b.init(&name, at)?;
            }
            Some((Tok::Ident(from), _)) => {
                p.expect(Tok::Arrow)?;
                let (to, _) = p.ident("a target state")?;
                p.expect(Tok::Colon)?;
                let expr = p.expr()?;
                b.transition(&from, &to, expr, at)?;
            }
            Some((t, at)) => return Err(syntax(at, format!("expected a statement, found {}", t.describe()))),
            None => unreachable!(),
        }
        p.expect(Tok::Semi)?;
    }
    b.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_state_model_on_one_line() {
        let m = parse_model("CONST lambda = 0.001;\nINIT up; STATE dead DEATH; up -> dead : lambda;").unwrap();
        assert_eq!(m.states().len(), 2);
        assert_eq!(m.transitions().len(), 1);
        assert_eq!(m.transitions()[0].rate, 0.001);
        assert_eq!(m.death_states().collect::<Vec<_>>(), vec![1]);
    }

    #[test]
    fn rate_expressions() {
        let m = parse_model(
            "CONST lambda = 1e-3; CONST mu = 2E-3;\nINIT a; STATE d DEATH;\n\
             a -> b : 3*lambda; b -> d : (lambda + mu) * 2 + .5*mu;",
        )
        .unwrap();
        assert!((m.transitions()[0].rate - 0.003).abs() < 1e-18);
        assert!((m.transitions()[1].rate - (0.006 + 0.001)).abs() < 1e-18);
    }

    #[test]
    fn print_parse_round_trip() {
        let text = "CONST l = 1e-6; CONST s = 2.5;\nINIT one; STATE dead DEATH;\none -> two : s*l + l;\ntwo -> dead : 2*(l + s);";
        let m = parse_model(text).unwrap();
        let printed = m.to_string();
        let again = parse_model(&printed).unwrap();
        assert_eq!(again.to_string(), printed);
        assert_eq!(
            again.transitions().iter().map(|t| t.rate).collect::<Vec<_>>(),
            m.transitions().iter().map(|t| t.rate).collect::<Vec<_>>()
        );
    }

    fn err(text: &str) -> ModelError {
        parse_model(text).unwrap_err()
    }

    #[test]
    fn rejections_carry_locations() {
        let e = err("CONST l = 1;\nINIT up;\nSTATE dead DEATH;\nup -> dead : l;\ndead -> up : l;");
        assert_eq!(
            e,
            ModelError::DeathHasExit {
                at: Span { line: 5, col: 1 },
                state: "dead".into()
            }
        );

        let e = err("INIT up;\nup -> dead : mu;");
        assert_eq!(
            e,
            ModelError::UnknownConstant {
                at: Span { line: 2, col: 1 },
                name: "mu".into()
            }
        );

        assert!(matches!(
            err("CONST l = 1;\nINIT up;\n  up => dead : l;"),
            ModelError::Syntax {
                at: Span { line: 3, col: 7 },
                ..
            }
        ));
        assert!(matches!(
            err("CONST l = 1;\nINIT up;\nup -> dead : l"),
            ModelError::Syntax {
                at: Span { line: 3, .. },
                ..
            }
        ));
        assert!(matches!(
            err("CONST l = 1; INIT up; up -> d : l * ;"),
            ModelError::Syntax {
                at: Span { line: 1, col: 37 },
                ..
            }
        ));
        assert!(
            matches!(err("INIT up; STATE lost; STATE d DEATH; CONST l = 1; up -> d : l;"),
            ModelError::Unreachable(s) if s == "lost")
        );
        assert!(matches!(
            err("CONST l = 1; INIT up; up -> d : 0*l;"),
            ModelError::NonPositiveRate { .. }
        ));
        assert!(matches!(
            err("CONST l = -1; INIT up; up -> d : l;"),
            ModelError::BadConstant { .. }
        ));
        assert!(matches!(
            err("CONST l = 1; STATE d DEATH; d -> x : l;"),
            ModelError::NoInitial
        ));
        assert!(matches!(
            err("CONST l = 1; INIT d; STATE d DEATH;"),
            ModelError::InitialIsDeath(_)
        ));
        assert!(matches!(
            err("CONST l = 1; CONST l = 2; INIT a;"),
            ModelError::Duplicate { .. }
        ));
        assert!(matches!(
            err("INIT a; $"),
            ModelError::Syntax {
                at: Span { line: 1, col: 9 },
                ..
            }
        ));
    }

    #[test]
    fn rebinding_a_constant_reevaluates_rates() {
        let m = parse_model("CONST l = 1; INIT up; STATE d DEATH; up -> d : 3*l;").unwrap();
        let m2 = m.with_constant("l", 0.5).unwrap();
        assert_eq!(m2.transitions()[0].rate, 1.5);
        assert!(m.with_constant("nope", 1.0).is_err());
        assert!(m.with_constant("l", 0.0).is_err());
    }
}
