//! S-expression reader with source positions.

use std::fmt;

use super::error::Diagnostic;

/// 1-based source position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Sexp {
    Atom { text: String, pos: Pos },
    List { items: Vec<Sexp>, pos: Pos },
}

impl Sexp {
    pub fn pos(&self) -> Pos {
        match self {
            Sexp::Atom { pos, .. } | Sexp::List { pos, .. } => *pos,
        }
    }

    pub fn as_atom(&self) -> Option<&str> {
        match self {
            Sexp::Atom { text, .. } => Some(text),
            Sexp::List { .. } => None,
        }
    }

    pub fn as_list(&self) -> Option<&[Sexp]> {
        match self {
            Sexp::List { items, .. } => Some(items),
            Sexp::Atom { .. } => None,
        }
    }

    /// The leading atom of a list, if any: `(and ...)` gives `and`.
    pub fn head(&self) -> Option<&str> {
        self.as_list().and_then(|items| items.first()).and_then(Sexp::as_atom)
    }
}

/// Reads every top-level expression in `src`. Atoms are lowercased.
pub fn read_all(src: &str) -> Result<Vec<Sexp>, Diagnostic> {
    let mut reader = Reader { chars: src.chars().peekable(), line: 1, col: 1 };
    let mut out = Vec::new();
    let mut stack: Vec<(Pos, Vec<Sexp>)> = Vec::new();
    loop {
        reader.skip_trivia();
        let pos = reader.pos();
        let Some(c) = reader.peek() else { break };
        match c {
            '(' => {
                reader.bump();
                stack.push((pos, Vec::new()));
            }
            ')' => {
                reader.bump();
                let Some((open, items)) = stack.pop() else {
                    return Err(Diagnostic::new(pos, "unexpected ')'"));
                };
                let list = Sexp::List { items, pos: open };
                match stack.last_mut() {
                    Some((_, parent)) => parent.push(list),
                    None => out.push(list),
                }
            }
            _ => {
                let text = reader.atom();
                if text.is_empty() {
                    return Err(Diagnostic::new(pos, format!("unexpected character {c:?}")));
                }
                let atom = Sexp::Atom { text: text.to_lowercase(), pos };
                match stack.last_mut() {
                    Some((_, parent)) => parent.push(atom),
                    None => out.push(atom),
                }
            }
        }
    }
    if let Some((open, _)) = stack.last() {
        return Err(Diagnostic::new(*open, "unclosed '('"));
    }
    Ok(out)
}

struct Reader<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: u32,
    col: u32,
}

impl Reader<'_> {
    fn pos(&self) -> Pos {
        Pos { line: self.line, col: self.col }
    }

    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == ';' {
                while let Some(c) = self.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn atom(&mut self) -> String {
        let mut text = String::new();
        while let Some(c) = self.peek() {
            if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                break;
            }
            if !(c.is_ascii_graphic()) {
                break;
            }
            text.push(c);
            self.bump();
        }
        text
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_nested_lists_with_positions() {
        let exprs = read_all("(define\n  (Domain X))").unwrap();
        assert_eq!(exprs.len(), 1);
        let items = exprs[0].as_list().unwrap();
        assert_eq!(items[0].as_atom(), Some("define"));
        assert_eq!(items[1].pos(), Pos { line: 2, col: 3 });
        assert_eq!(items[1].head(), Some("domain"));
        assert_eq!(items[1].as_list().unwrap()[1].as_atom(), Some("x"));
    }

    #[test]
    fn comments_are_skipped() {
        let exprs = read_all("; header\n(a ; trailing\n b)").unwrap();
        assert_eq!(exprs[0].as_list().unwrap().len(), 2);
    }

    #[test]
    fn unbalanced_input_is_reported() {
        let err = read_all("(a (b)").unwrap_err();
        assert_eq!(err.pos, Pos { line: 1, col: 1 });
        let err = read_all("a)").unwrap_err();
        assert_eq!(err.pos, Pos { line: 1, col: 2 });
    }

    #[test]
    fn non_ascii_is_a_lexical_error() {
        assert!(read_all("(a é)").is_err());
    }
}
