use super::{Ltl, LtlError};

#[derive(Clone, Debug, PartialEq)]
enum Token {
    LParen,
    RParen,
    Not,
    And,
    Or,
    Implies,
    Next,
    Until,
    Always,
    Eventually,
    True,
    False,
    Ident(String),
}

fn describe(token: &Token) -> String {
    match token {
        Token::LParen => "`(`".into(),
        Token::RParen => "`)`".into(),
        Token::Not => "`!`".into(),
        Token::And => "`&&`".into(),
        Token::Or => "`||`".into(),
        Token::Implies => "`->`".into(),
        Token::Next => "`X`".into(),
        Token::Until => "`U`".into(),
        Token::Always => "`[]`".into(),
        Token::Eventually => "`<>`".into(),
        Token::True => "`true`".into(),
        Token::False => "`false`".into(),
        Token::Ident(name) => format!("`{name}`"),
    }
}

fn tokenize(text: &str) -> Result<Vec<(Token, usize)>, LtlError> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    let syntax = |position: usize, message: &str| LtlError::Syntax {
        position,
        message: message.to_string(),
    };
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let two = if i + 1 < bytes.len() { &bytes[i..i + 2] } else { &bytes[i..i + 1] };
        let (token, width) = match c {
            b'(' => (Token::LParen, 1),
            b')' => (Token::RParen, 1),
            b'!' => (Token::Not, 1),
            b'&' if two == b"&&" => (Token::And, 2),
            b'|' if two == b"||" => (Token::Or, 2),
            b'-' if two == b"->" => (Token::Implies, 2),
            b'[' if two == b"[]" => (Token::Always, 2),
            b'<' if two == b"<>" => (Token::Eventually, 2),
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let start = i;
                let mut end = i;
                while end < bytes.len() && (bytes[end].is_ascii_alphanumeric() || bytes[end] == b'_') {
                    end += 1;
                }
                let word = &text[start..end];
                let token = match word {
                    "X" => Token::Next,
                    "U" => Token::Until,
                    "true" => Token::True,
                    "false" => Token::False,
                    _ => Token::Ident(word.to_string()),
                };
                (token, end - start)
            }
            _ => {
                let ch = text[i..].chars().next().unwrap_or('?');
                return Err(syntax(i, &format!("unexpected character `{ch}`")));
            }
        };
        tokens.push((token, i));
        i += width;
    }
    Ok(tokens)
}

struct Parser<'a> {
    tokens: Vec<(Token, usize)>,
    pos: usize,
    end: usize,
    ap: Option<&'a [String]>,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end, |(_, p)| *p)
    }

    fn error(&self, message: String) -> LtlError {
        LtlError::Syntax { position: self.offset(), message }
    }

    fn eat(&mut self, token: &Token) -> bool {
        if self.peek() == Some(token) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn implication(&mut self) -> Result<Ltl, LtlError> {
        let lhs = self.disjunction()?;
        if self.eat(&Token::Implies) {
            let rhs = self.implication()?;
            return Ok(Ltl::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Ltl, LtlError> {
        let mut lhs = self.conjunction()?;
        while self.eat(&Token::Or) {
            let rhs = self.conjunction()?;
            lhs = Ltl::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Ltl, LtlError> {
        let mut lhs = self.until()?;
        while self.eat(&Token::And) {
            let rhs = self.until()?;
            lhs = Ltl::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn until(&mut self) -> Result<Ltl, LtlError> {
        let lhs = self.unary()?;
        if self.eat(&Token::Until) {
            let rhs = self.until()?;
            return Ok(Ltl::until(lhs, rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Ltl, LtlError> {
        match self.peek() {
            Some(Token::Not) => {
                self.pos += 1;
                Ok(Ltl::not(self.unary()?))
            }
            Some(Token::Next) => {
                self.pos += 1;
                Ok(Ltl::next(self.unary()?))
            }
            Some(Token::Always) => {
                self.pos += 1;
                Ok(Ltl::always(self.unary()?))
            }
            Some(Token::Eventually) => {
                self.pos += 1;
                Ok(Ltl::eventually(self.unary()?))
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<Ltl, LtlError> {
        let position = self.offset();
        match self.peek().cloned() {
            Some(Token::True) => {
                self.pos += 1;
                Ok(Ltl::True)
            }
            Some(Token::False) => {
                self.pos += 1;
                Ok(Ltl::False)
            }
            Some(Token::Ident(name)) => {
                if let Some(ap) = self.ap {
                    if !ap.iter().any(|p| *p == name) {
                        return Err(LtlError::UnknownAtom { name, position });
                    }
                }
                self.pos += 1;
                Ok(Ltl::Atom(name))
            }
            Some(Token::LParen) => {
                self.pos += 1;
                let inner = self.implication()?;
                if !self.eat(&Token::RParen) {
                    return Err(self.error("expected `)`".into()));
                }
                Ok(inner)
            }
            Some(other) => Err(self.error(format!("unexpected {}", describe(&other)))),
            None => Err(self.error("unexpected end of formula".into())),
        }
    }
}

fn parse(text: &str, ap: Option<&[String]>) -> Result<Ltl, LtlError> {
    let tokens = tokenize(text)?;
    if tokens.is_empty() {
        return Err(LtlError::Syntax { position: 0, message: "empty formula".into() });
    }
    let mut parser = Parser { tokens, pos: 0, end: text.len(), ap };
    let formula = parser.implication()?;
    if let Some(token) = parser.peek().cloned() {
        return Err(parser.error(format!("unexpected {} after complete formula", describe(&token))));
    }
    Ok(formula)
}

/// Parses a formula in the ASCII syntax: `!` not, `&&` and, `||` or, `->`
/// implies, `X` next, `U` until, `[]` always, `<>` eventually, `true`,
/// `false`, identifiers for atoms.
///
/// Precedence from tightest: unary operators, `U` (right-associative), `&&`,
/// `||`, `->` (right-associative).
pub fn parse_ltl(text: &str) -> Result<Ltl, LtlError> {
    parse(text, None)
}

/// Like [`parse_ltl`] but rejects atoms that are not in `ap`.
pub fn parse_ltl_with_ap(text: &str, ap: &[String]) -> Result<Ltl, LtlError> {
    parse(text, Some(ap))
}
