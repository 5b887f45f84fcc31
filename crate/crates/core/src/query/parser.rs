use super::lexer::{tokenize, Spanned, Tok};
use super::{ColumnRef, Expr, Literal, ParseError, ParseErrorKind};
use crate::table::{ColumnKind, Schema};

/// Parses and resolves a query against `schema`.
pub fn parse_query(text: &str, schema: &Schema) -> Result<Expr, ParseError> {
    if text.trim().is_empty() {
        return Err(ParseError::new(ParseErrorKind::EmptyQuery, 0, "query is empty"));
    }
    let tokens = tokenize(text)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        end: text.chars().count(),
        schema,
    };
    let expr = parser.parse_or()?;
    if let Some(tok) = parser.peek() {
        let (kind, detail) = match tok.tok {
            Tok::RParen => (ParseErrorKind::UnbalancedParen, "unmatched `)`".to_string()),
            Tok::Cmp(_) => (
                ParseErrorKind::UnexpectedToken,
                "chained comparisons are not supported".to_string(),
            ),
            ref other => (
                ParseErrorKind::UnexpectedToken,
                format!("unexpected {}", other.describe()),
            ),
        };
        return Err(ParseError::new(kind, tok.pos, detail));
    }
    Ok(expr)
}

struct Parser<'s> {
    tokens: Vec<Spanned>,
    pos: usize,
    end: usize,
    schema: &'s Schema,
}

enum Operand {
    Column(ColumnRef),
    Literal(Literal, usize),
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Spanned> {
        self.tokens.get(self.pos)
    }

    fn peek_tok(&self) -> Option<&Tok> {
        self.peek().map(|s| &s.tok)
    }

    fn here(&self) -> usize {
        self.peek().map_or(self.end, |t| t.pos)
    }

    fn unexpected(&self, expected: &str) -> ParseError {
        match self.peek() {
            Some(t) => ParseError::new(
                ParseErrorKind::UnexpectedToken,
                t.pos,
                format!("expected {expected}, found {}", t.tok.describe()),
            ),
            None => ParseError::new(
                ParseErrorKind::UnexpectedToken,
                self.end,
                format!("expected {expected}, found end of query"),
            ),
        }
    }

    fn parse_or(&mut self) -> Result<Expr, ParseError> {
        let mut left = self.parse_and()?;
        while self.peek_tok() == Some(&Tok::Or) {
            self.pos += 1;
            let right = self.parse_and()?;
            left = Expr::or(left, right);
        }
        Ok(left)
    }

    fn parse_and(&mut self) -> Result<Expr, ParseError> {
        let mut left = self.parse_not()?;
        while self.peek_tok() == Some(&Tok::And) {
            self.pos += 1;
            let right = self.parse_not()?;
            left = Expr::and(left, right);
        }
        Ok(left)
    }

    fn parse_not(&mut self) -> Result<Expr, ParseError> {
        if self.peek_tok() == Some(&Tok::Not) {
            self.pos += 1;
            let child = self.parse_not()?;
            return Ok(Expr::not(child));
        }
        self.parse_primary()
    }

    fn parse_primary(&mut self) -> Result<Expr, ParseError> {
        if let Some(open) = self.peek().filter(|t| t.tok == Tok::LParen).map(|t| t.pos) {
            self.pos += 1;
            let inner = self.parse_or()?;
            return match self.peek_tok() {
                Some(Tok::RParen) => {
                    self.pos += 1;
                    Ok(inner)
                }
                None => Err(ParseError::new(
                    ParseErrorKind::UnbalancedParen,
                    self.end,
                    format!("`(` at offset {open} is never closed"),
                )),
                Some(_) => Err(self.unexpected("`)`")),
            };
        }
        let expr = match self.parse_operand()? {
            Operand::Column(column) => self.parse_predicate(column)?,
            Operand::Literal(value, lit_pos) => {
                let op = match self.peek_tok() {
                    Some(Tok::Cmp(op)) => *op,
                    _ => return Err(self.unexpected("comparison operator")),
                };
                self.pos += 1;
                match self.parse_operand()? {
                    Operand::Column(column) => {
                        let value = self.check_literal(&column, value, lit_pos)?;
                        Expr::Compare {
                            column,
                            op: op.flipped(),
                            value,
                        }
                    }
                    Operand::Literal(_, pos) => {
                        return Err(ParseError::new(
                            ParseErrorKind::UnexpectedToken,
                            pos,
                            "comparison must involve a column",
                        ))
                    }
                }
            }
        };
        if let Some(Tok::Cmp(_)) = self.peek_tok() {
            return Err(ParseError::new(
                ParseErrorKind::UnexpectedToken,
                self.here(),
                "chained comparisons are not supported",
            ));
        }
        Ok(expr)
    }

    fn parse_predicate(&mut self, column: ColumnRef) -> Result<Expr, ParseError> {
        match self.peek_tok() {
            Some(Tok::Cmp(op)) => {
                let op = *op;
                self.pos += 1;
                let lit_pos = self.here();
                match self.parse_operand()? {
                    Operand::Literal(value, _) => {
                        let value = self.check_literal(&column, value, lit_pos)?;
                        Ok(Expr::Compare { column, op, value })
                    }
                    Operand::Column(_) => Err(ParseError::new(
                        ParseErrorKind::UnexpectedToken,
                        lit_pos,
                        "column-to-column comparisons are not supported",
                    )),
                }
            }
            Some(Tok::In) => {
                self.pos += 1;
                self.parse_list(column, false)
            }
            Some(Tok::Not) if self.tokens.get(self.pos + 1).map(|t| &t.tok) == Some(&Tok::In) => {
                self.pos += 2;
                self.parse_list(column, true)
            }
            _ => Err(self.unexpected("comparison operator or `in`")),
        }
    }

    fn parse_list(&mut self, column: ColumnRef, negated: bool) -> Result<Expr, ParseError> {
        self.expect(&Tok::LBracket, "`[`")?;
        let mut values = Vec::new();
        loop {
            let lit_pos = self.here();
            let value = self.parse_literal()?;
            values.push(self.check_literal(&column, value, lit_pos)?);
            match self.peek_tok() {
                Some(Tok::Comma) => self.pos += 1,
                Some(Tok::RBracket) => {
                    self.pos += 1;
                    break;
                }
                _ => return Err(self.unexpected("`,` or `]`")),
            }
        }
        Ok(Expr::Member {
            column,
            negated,
            values,
        })
    }

    fn expect(&mut self, tok: &Tok, what: &str) -> Result<(), ParseError> {
        if self.peek_tok() == Some(tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.unexpected(what))
        }
    }

    fn parse_operand(&mut self) -> Result<Operand, ParseError> {
        let Some(first) = self.peek().cloned() else {
            return Err(self.unexpected("column or literal"));
        };
        match first.tok {
            Tok::Word(_) => {
                let mut words = Vec::new();
                while let Some(Tok::Word(w)) = self.peek_tok() {
                    words.push(w.clone());
                    self.pos += 1;
                }
                let column = self.resolve(&words, first.pos)?;
                Ok(Operand::Column(column))
            }
            Tok::Backtick(ref name) => {
                self.pos += 1;
                let column = self.resolve(std::slice::from_ref(name), first.pos)?;
                Ok(Operand::Column(column))
            }
            _ => {
                let value = self.parse_literal()?;
                Ok(Operand::Literal(value, first.pos))
            }
        }
    }

    fn parse_literal(&mut self) -> Result<Literal, ParseError> {
        let Some(tok) = self.peek().cloned() else {
            return Err(self.unexpected("literal"));
        };
        let value = match tok.tok {
            Tok::Number(n) => Literal::Number(n),
            Tok::Str(s) => Literal::Str(s),
            Tok::True => Literal::Bool(true),
            Tok::False => Literal::Bool(false),
            Tok::Minus | Tok::Plus => {
                let negative = tok.tok == Tok::Minus;
                self.pos += 1;
                match self.peek_tok() {
                    Some(Tok::Number(n)) => {
                        let n = *n;
                        self.pos += 1;
                        return Ok(Literal::Number(if negative { -n } else { n }));
                    }
                    _ => return Err(self.unexpected("number after sign")),
                }
            }
            _ => return Err(self.unexpected("literal")),
        };
        self.pos += 1;
        Ok(value)
    }

    fn resolve(&self, words: &[String], pos: usize) -> Result<ColumnRef, ParseError> {
        let spaced = words.join(" ");
        let underscored = spaced.replace(' ', "_");
        for candidate in [&spaced, &underscored] {
            if let Some(index) = self.schema.index_of(candidate) {
                return Ok(ColumnRef {
                    name: candidate.clone(),
                    index,
                });
            }
        }
        Err(ParseError::new(
            ParseErrorKind::UnknownColumn,
            pos,
            format!("no column named `{spaced}`"),
        ))
    }

    fn check_literal(&self, column: &ColumnRef, value: Literal, pos: usize) -> Result<Literal, ParseError> {
        let kind = self.schema.column(column.index).kind;
        match (kind, &value) {
            (ColumnKind::Numeric, Literal::Number(_) | Literal::Bool(_)) => Ok(value),
            (ColumnKind::Categorical, Literal::Str(_)) => Ok(value),
            (ColumnKind::Numeric, _) => Err(ParseError::new(
                ParseErrorKind::TypeMismatch,
                pos,
                format!("numeric column `{}` compared with {value}", column.name),
            )),
            (ColumnKind::Categorical, _) => Err(ParseError::new(
                ParseErrorKind::TypeMismatch,
                pos,
                format!(
                    "categorical column `{}` compared with {value}; quote the value",
                    column.name
                ),
            )),
        }
    }
}
