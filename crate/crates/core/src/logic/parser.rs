//! Spec file grammar.
//!
//! ```text
//! spec    := por
//! por     := pand ( '|' pand )*
//! pand    := punary ( '&' punary )*
//! punary  := '!' punary | '(' por ')' | 'P' '>=' number '[' bor ']'
//! bor     := band ( '|' band )*
//! band    := buntil ( '&' buntil )*
//! buntil  := bunary ( 'U' '[' int ']' buntil )?
//! bunary  := '!' bunary | 'F' '[' int ']' bunary | 'G' '[' int ']' bunary
//!          | '(' bor ')' | 'true' | 'false' | ident
//! ```
//!
//! `F`, `G` and `U` are operators only when followed by `[`, and `P` only
//! when followed by `>=`; otherwise they are identifiers. `#` starts a
//! comment that runs to the end of the line.

use crate::model::DmcModel;
use crate::prob::Prob;

use super::{Bltl, LogicError, Pbltl};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(String),
    Not,
    Or,
    And,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Geq,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Token>, LogicError> {
    let mut out = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("");
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let column = i + 1;
            let push = |out: &mut Vec<Token>, tok| {
                out.push(Token {
                    tok,
                    line: line_no + 1,
                    column,
                })
            };
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            let single = match c {
                '!' => Some(Tok::Not),
                '|' => Some(Tok::Or),
                '&' => Some(Tok::And),
                '(' => Some(Tok::LParen),
                ')' => Some(Tok::RParen),
                '[' => Some(Tok::LBracket),
                ']' => Some(Tok::RBracket),
                _ => None,
            };
            if let Some(tok) = single {
                push(&mut out, tok);
                i += 1;
            } else if c == '>' && chars.get(i + 1) == Some(&'=') {
                push(&mut out, Tok::Geq);
                i += 2;
            } else if c.is_ascii_digit()
                || c == '.'
                || (c == '-' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()))
            {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || matches!(chars[i], '.' | '/' | '-' | '+'))
                {
                    i += 1;
                }
                push(&mut out, Tok::Number(chars[start..i].iter().collect()));
            } else if c.is_alphabetic() || c == '_' {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || matches!(chars[i], '_' | '\'' | '.')) {
                    i += 1;
                }
                push(&mut out, Tok::Ident(chars[start..i].iter().collect()));
            } else {
                return Err(LogicError::Syntax {
                    line: line_no + 1,
                    column,
                    message: format!("unexpected character `{c}`"),
                });
            }
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    model: &'a DmcModel,
    end: (usize, usize),
}

impl<'a> Parser<'a> {
    fn new(text: &str, model: &'a DmcModel) -> Result<Parser<'a>, LogicError> {
        let toks = lex(text)?;
        let lines = text.lines().count().max(1);
        let last_len = text.lines().last().map(|l| l.chars().count()).unwrap_or(0);
        Ok(Parser {
            toks,
            pos: 0,
            model,
            end: (lines, last_len + 1),
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|t| &t.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.toks.get(self.pos).map(|t| (t.line, t.column)).unwrap_or(self.end)
    }

    fn syntax(&self, message: impl Into<String>) -> LogicError {
        let (line, column) = self.here();
        LogicError::Syntax {
            line,
            column,
            message: message.into(),
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), LogicError> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.syntax(format!("expected {what}, found {}", self.describe())))
        }
    }

    fn describe(&self) -> String {
        match self.peek() {
            None => "end of input".to_string(),
            Some(Tok::Ident(s)) | Some(Tok::Number(s)) => format!("`{s}`"),
            Some(t) => format!("{t:?}"),
        }
    }

    fn is_keyword(&self, word: &str, next: Tok) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s == word) && self.peek_at(1) == Some(&next)
    }

    fn finish(&self) -> Result<(), LogicError> {
        if self.pos < self.toks.len() {
            Err(self.syntax(format!("unexpected {}", self.describe())))
        } else {
            Ok(())
        }
    }

    fn por(&mut self) -> Result<Pbltl, LogicError> {
        let mut lhs = self.pand()?;
        while self.peek() == Some(&Tok::Or) {
            self.pos += 1;
            lhs = Pbltl::Or(Box::new(lhs), Box::new(self.pand()?));
        }
        Ok(lhs)
    }

    fn pand(&mut self) -> Result<Pbltl, LogicError> {
        let mut lhs = self.punary()?;
        while self.peek() == Some(&Tok::And) {
            self.pos += 1;
            lhs = Pbltl::And(Box::new(lhs), Box::new(self.punary()?));
        }
        Ok(lhs)
    }

    fn punary(&mut self) -> Result<Pbltl, LogicError> {
        match self.peek() {
            Some(Tok::Not) => {
                self.pos += 1;
                Ok(Pbltl::Not(Box::new(self.punary()?)))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.por()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            _ if self.is_keyword("P", Tok::Geq) => {
                self.pos += 2;
                let (line, column) = self.here();
                let text = match self.peek() {
                    Some(Tok::Number(n)) => n.clone(),
                    _ => return Err(self.syntax(format!("expected a threshold, found {}", self.describe()))),
                };
                self.pos += 1;
                let bad = || LogicError::Threshold {
                    line,
                    column,
                    value: text.clone(),
                };
                let gamma = text.parse::<Prob>().map_err(|_| bad())?.value();
                if !(gamma > 0.0 && gamma < 1.0) {
                    return Err(bad());
                }
                self.expect(Tok::LBracket, "`[`")?;
                let formula = self.bor()?;
                self.expect(Tok::RBracket, "`]`")?;
                Ok(Pbltl::threshold(gamma, formula))
            }
            _ => Err(self.syntax(format!("expected `P>=`, `!` or `(`, found {}", self.describe()))),
        }
    }

    fn bor(&mut self) -> Result<Bltl, LogicError> {
        let mut lhs = self.band()?;
        while self.peek() == Some(&Tok::Or) {
            self.pos += 1;
            lhs = lhs.or(self.band()?);
        }
        Ok(lhs)
    }

    fn band(&mut self) -> Result<Bltl, LogicError> {
        let mut lhs = self.buntil()?;
        while self.peek() == Some(&Tok::And) {
            self.pos += 1;
            lhs = lhs.and(self.buntil()?);
        }
        Ok(lhs)
    }

    fn bound(&mut self) -> Result<u32, LogicError> {
        self.expect(Tok::LBracket, "`[`")?;
        let (line, column) = self.here();
        let text = match self.peek() {
            Some(Tok::Number(n)) => n.clone(),
            Some(Tok::Ident(n)) => n.clone(),
            _ => return Err(self.syntax(format!("expected a bound, found {}", self.describe()))),
        };
        self.pos += 1;
        let t = text
            .parse::<u32>()
            .map_err(|_| LogicError::Bound { line, column, text })?;
        self.expect(Tok::RBracket, "`]`")?;
        Ok(t)
    }

    fn buntil(&mut self) -> Result<Bltl, LogicError> {
        let lhs = self.bunary()?;
        if self.is_keyword("U", Tok::LBracket) {
            let (line, column) = self.here();
            self.pos += 1;
            let t = self.bound()?;
            let rhs = self.buntil()?;
            return Bltl::until(lhs, rhs, t).map_err(|message| LogicError::Type { line, column, message });
        }
        Ok(lhs)
    }

    fn bunary(&mut self) -> Result<Bltl, LogicError> {
        let (line, column) = self.here();
        for (word, globally) in [("F", false), ("G", true)] {
            if self.is_keyword(word, Tok::LBracket) {
                self.pos += 1;
                let t = self.bound()?;
                let inner = self.bunary()?;
                let phi = if globally {
                    Bltl::globally(inner, t)
                } else {
                    Bltl::eventually(inner, t)
                };
                return phi.map_err(|message| LogicError::Type { line, column, message });
            }
        }
        match self.peek().cloned() {
            Some(Tok::Not) => {
                self.pos += 1;
                Ok(!self.bunary()?)
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.bor()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                match name.as_str() {
                    "true" => Ok(Bltl::True),
                    "false" => Ok(Bltl::False),
                    _ => Bltl::atom(self.model, &name).ok_or(LogicError::UnknownAp { line, column, name }),
                }
            }
            _ => Err(self.syntax(format!("expected a formula, found {}", self.describe()))),
        }
    }
}

/// Parses a spec: one PBLTL formula, possibly spread over several lines.
pub fn parse_spec(text: &str, model: &DmcModel) -> Result<Pbltl, LogicError> {
    let mut p = Parser::new(text, model)?;
    let out = p.por()?;
    p.finish()?;
    Ok(out)
}

/// Parses a bare BLTL formula (no probability operator).
pub fn parse_formula(text: &str, model: &DmcModel) -> Result<Bltl, LogicError> {
    let mut p = Parser::new(text, model)?;
    let out = p.bor()?;
    p.finish()?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::coin_game;

    #[test]
    fn coin_game_spec() {
        let m = coin_game();
        let spec = parse_spec("P>=0.99 [ (F[7] L1 & F[7] W2) | (F[7] W1 & F[7] L2) ]", &m).unwrap();
        let Pbltl::Threshold { gamma, formula } = &spec else {
            panic!("expected a threshold, got {spec:?}");
        };
        assert_eq!(*gamma, 0.99);
        let Bltl::Or(a, b) = formula else { panic!() };
        assert!(matches!(**a, Bltl::And(_, _)));
        assert!(matches!(**b, Bltl::And(_, _)));
    }

    #[test]
    fn cross_agent_until_is_a_type_error() {
        let m = coin_game();
        let err = parse_spec("P>=0.5 [ H1 U[3] W2 ]", &m).unwrap_err();
        assert!(
            matches!(
                err,
                LogicError::Type {
                    line: 1,
                    column: 13,
                    ..
                }
            ),
            "{err}"
        );
    }

    #[test]
    fn negated_threshold() {
        let m = coin_game();
        let spec = parse_spec("!P>=0.3 [ T1 ]", &m).unwrap();
        assert!(matches!(spec, Pbltl::Not(ref p) if matches!(**p, Pbltl::Threshold { .. })));
    }

    #[test]
    fn errors_carry_positions() {
        let m = coin_game();
        assert!(matches!(
            parse_spec("P>=0.5 [ X9 ]", &m),
            Err(LogicError::UnknownAp {
                line: 1,
                column: 10,
                ..
            })
        ));
        assert!(matches!(
            parse_spec("P>=1 [ T1 ]", &m),
            Err(LogicError::Threshold { .. })
        ));
        assert!(matches!(
            parse_spec("P>=0 [ T1 ]", &m),
            Err(LogicError::Threshold { .. })
        ));
        assert!(matches!(
            parse_spec("P>=0.5 [ F[x] T1 ]", &m),
            Err(LogicError::Bound { .. })
        ));
        assert!(matches!(
            parse_spec("P>=0.5 [ F[-1] T1 ]", &m),
            Err(LogicError::Bound { .. })
        ));
        assert!(matches!(parse_spec("P>=0.5 [ T1 ", &m), Err(LogicError::Syntax { .. })));
        assert!(matches!(
            parse_spec("P>=0.5 [ T1 ] ]", &m),
            Err(LogicError::Syntax { .. })
        ));
        assert!(matches!(
            parse_spec("P>=0.5\n  [ T1 $ ]", &m),
            Err(LogicError::Syntax { line: 2, column: 8, .. })
        ));
    }

    #[test]
    fn comments_and_layout() {
        let m = coin_game();
        let text = "# winner within seven tosses\nP>=1/2 [\n  F[7] W1   # player one\n]\n";
        let spec = parse_spec(text, &m).unwrap();
        assert_eq!(spec.leaves()[0].0, 0.5);
    }

    #[test]
    fn precedence() {
        let m = coin_game();
        let phi = parse_formula("!T1 & H1 | W1", &m).unwrap();
        let want = (!Bltl::atom(&m, "T1").unwrap())
            .and(Bltl::atom(&m, "H1").unwrap())
            .or(Bltl::atom(&m, "W1").unwrap());
        assert_eq!(phi, want);
        let phi = parse_formula("in1 U[2] T1 U[1] H1", &m).unwrap();
        let Bltl::Until { rhs, .. } = phi else { panic!() };
        assert!(matches!(*rhs, Bltl::Until { .. }));
    }

    #[test]
    fn constant_eventually_needs_an_agent() {
        let m = coin_game();
        assert!(matches!(parse_formula("F[3] true", &m), Err(LogicError::Type { .. })));
        assert_eq!(parse_formula("true | T1", &m).unwrap().type_of().len(), 1);
    }
}
