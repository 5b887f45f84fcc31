use super::{CmpOp, ParseError, ParseErrorKind};

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Word(String),
    Backtick(String),
    Number(f64),
    Str(String),
    True,
    False,
    And,
    Or,
    Not,
    In,
    Cmp(CmpOp),
    Minus,
    Plus,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Word(w) => format!("identifier `{w}`"),
            Tok::Backtick(w) => format!("identifier `{w}`"),
            Tok::Number(n) => format!("number {n}"),
            Tok::Str(s) => format!("string '{s}'"),
            Tok::True => "`True`".into(),
            Tok::False => "`False`".into(),
            Tok::And => "`and`".into(),
            Tok::Or => "`or`".into(),
            Tok::Not => "`not`".into(),
            Tok::In => "`in`".into(),
            Tok::Cmp(op) => format!("`{}`", op.symbol()),
            Tok::Minus => "`-`".into(),
            Tok::Plus => "`+`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Comma => "`,`".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Spanned {
    pub tok: Tok,
    /// Character offset of the token's first character.
    pub pos: usize,
}

fn unexpected(pos: usize, detail: impl Into<String>) -> ParseError {
    ParseError::new(ParseErrorKind::UnexpectedToken, pos, detail)
}

pub(crate) fn tokenize(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let tok = match c {
            '(' => {
                i += 1;
                Tok::LParen
            }
            ')' => {
                i += 1;
                Tok::RParen
            }
            '[' => {
                i += 1;
                Tok::LBracket
            }
            ']' => {
                i += 1;
                Tok::RBracket
            }
            ',' => {
                i += 1;
                Tok::Comma
            }
            '&' => {
                i += if chars.get(i + 1) == Some(&'&') { 2 } else { 1 };
                Tok::And
            }
            '|' => {
                i += if chars.get(i + 1) == Some(&'|') { 2 } else { 1 };
                Tok::Or
            }
            '~' => {
                i += 1;
                Tok::Not
            }
            '-' => {
                i += 1;
                Tok::Minus
            }
            '+' => {
                i += 1;
                Tok::Plus
            }
            '=' | '!' | '<' | '>' => {
                let next = chars.get(i + 1).copied();
                let (op, width) = match (c, next) {
                    ('=', Some('=')) => (CmpOp::Eq, 2),
                    ('!', Some('=')) => (CmpOp::Ne, 2),
                    ('<', Some('=')) => (CmpOp::Le, 2),
                    ('>', Some('=')) => (CmpOp::Ge, 2),
                    ('<', _) => (CmpOp::Lt, 1),
                    ('>', _) => (CmpOp::Gt, 1),
                    ('=', _) => return Err(unexpected(start, "assignment `=` is not a comparison; use `==`")),
                    _ => return Err(unexpected(start, "unexpected `!`")),
                };
                i += width;
                Tok::Cmp(op)
            }
            '\'' | '"' => {
                let quote = c;
                i += 1;
                let mut value = String::new();
                loop {
                    match chars.get(i) {
                        None => return Err(unexpected(chars.len(), "unterminated string literal")),
                        Some('\\') => {
                            match chars.get(i + 1) {
                                Some(&escaped) => value.push(escaped),
                                None => return Err(unexpected(chars.len(), "unterminated string literal")),
                            }
                            i += 2;
                        }
                        Some(&ch) if ch == quote => {
                            i += 1;
                            break;
                        }
                        Some(&ch) => {
                            value.push(ch);
                            i += 1;
                        }
                    }
                }
                Tok::Str(value)
            }
            '`' => {
                i += 1;
                let mut name = String::new();
                loop {
                    match chars.get(i) {
                        None => return Err(unexpected(chars.len(), "unterminated backtick identifier")),
                        Some('`') if chars.get(i + 1) == Some(&'`') => {
                            name.push('`');
                            i += 2;
                        }
                        Some('`') => {
                            i += 1;
                            break;
                        }
                        Some(&ch) => {
                            name.push(ch);
                            i += 1;
                        }
                    }
                }
                Tok::Backtick(name)
            }
            c if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(char::is_ascii_digit)) => {
                let end = scan_number(&chars, i);
                let literal: String = chars[i..end].iter().collect();
                i = end;
                if chars.get(i).is_some_and(|&ch| ch.is_alphanumeric() || ch == '_') {
                    return Err(unexpected(start, format!("malformed number `{literal}{}`", chars[i])));
                }
                let value = literal
                    .parse()
                    .map_err(|_| unexpected(start, format!("malformed number `{literal}`")))?;
                Tok::Number(value)
            }
            c if c.is_alphabetic() || c == '_' => {
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                match word.to_ascii_lowercase().as_str() {
                    "and" => Tok::And,
                    "or" => Tok::Or,
                    "not" => Tok::Not,
                    "in" => Tok::In,
                    _ if word == "True" || word == "true" => Tok::True,
                    _ if word == "False" || word == "false" => Tok::False,
                    _ => Tok::Word(word),
                }
            }
            '.' => return Err(unexpected(start, "attribute access and method calls are not supported")),
            '@' => return Err(unexpected(start, "`@` variable references are not supported")),
            '*' | '/' | '%' | '^' => {
                return Err(unexpected(start, format!("arithmetic operator `{c}` is not supported")))
            }
            other => return Err(unexpected(start, format!("unexpected character `{other}`"))),
        };
        out.push(Spanned { tok, pos: start });
    }
    Ok(out)
}

fn scan_number(chars: &[char], mut i: usize) -> usize {
    while i < chars.len() && chars[i].is_ascii_digit() {
        i += 1;
    }
    if i < chars.len() && chars[i] == '.' {
        i += 1;
        while i < chars.len() && chars[i].is_ascii_digit() {
            i += 1;
        }
    }
    if i < chars.len() && matches!(chars[i], 'e' | 'E') {
        let mut j = i + 1;
        if j < chars.len() && matches!(chars[j], '+' | '-') {
            j += 1;
        }
        if j < chars.len() && chars[j].is_ascii_digit() {
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            i = j;
        }
    }
    i
}
