//! Minimal s-expression reader for lingware files.
//!
//! Symbols, double-quoted strings and parenthesised lists. `;` starts a
//! comment running to the end of the line. Every node remembers the line it
//! started on so loaders can report diagnostics against the source text.

use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Sexp {
    Sym { text: String, line: usize },
    Str { text: String, line: usize },
    List { items: Vec<Sexp>, line: usize },
}

impl Sexp {
    pub fn line(&self) -> usize {
        match self {
            Sexp::Sym { line, .. } | Sexp::Str { line, .. } | Sexp::List { line, .. } => *line,
        }
    }

    pub fn as_sym(&self) -> Option<&str> {
        match self {
            Sexp::Sym { text, .. } => Some(text),
            _ => None,
        }
    }

    /// Text of a symbol or a string.
    pub fn as_text(&self) -> Option<&str> {
        match self {
            Sexp::Sym { text, .. } | Sexp::Str { text, .. } => Some(text),
            Sexp::List { .. } => None,
        }
    }

    pub fn as_list(&self) -> Option<&[Sexp]> {
        match self {
            Sexp::List { items, .. } => Some(items),
            _ => None,
        }
    }

    pub fn is_keyword(&self) -> bool {
        matches!(self, Sexp::Sym { text, .. } if text.starts_with(':'))
    }
}

impl fmt::Display for Sexp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sexp::Sym { text, .. } => f.write_str(text),
            Sexp::Str { text, .. } => write!(f, "{}", quote(text)),
            Sexp::List { items, .. } => {
                f.write_str("(")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{}", item)?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct ReadError {
    pub line: usize,
    pub message: String,
}

/// Double-quote a string, escaping `"` and `\`.
pub fn quote(text: &str) -> String {
    let mut out = String::with_capacity(text.len() + 2);
    out.push('"');
    for c in text.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}

/// True if `text` can be written without quotes and reads back as the same symbol.
pub fn is_bare_symbol(text: &str) -> bool {
    !text.is_empty()
        && !text.starts_with('?')
        && !text.starts_with(':')
        && text
            .chars()
            .all(|c| !c.is_whitespace() && !matches!(c, '(' | ')' | '"' | ';' | '\\'))
}

/// Read every top-level expression in `text`.
pub fn read_all(text: &str) -> Result<Vec<Sexp>, ReadError> {
    let (items, mut errors) = read_recovering(text);
    if errors.is_empty() {
        Ok(items)
    } else {
        Err(errors.remove(0))
    }
}

/// Read as much as possible, collecting every error. An open paren in the
/// first column while a list is still open closes that list as an error,
/// so one bad entry does not swallow the rest of the file.
pub fn read_recovering(text: &str) -> (Vec<Sexp>, Vec<ReadError>) {
    let mut reader = Reader { chars: text.chars().peekable(), line: 1, line_start: true };
    let mut out = Vec::new();
    let mut errors = Vec::new();
    // stack of open lists: (start line, items)
    let mut stack: Vec<(usize, Vec<Sexp>)> = Vec::new();
    loop {
        reader.skip_blank();
        let line = reader.line;
        let Some(&c) = reader.chars.peek() else { break };
        let node = match c {
            '(' => {
                if reader.line_start && !stack.is_empty() {
                    errors.push(ReadError { line: stack[0].0, message: "unclosed '('".into() });
                    stack.clear();
                }
                reader.bump();
                stack.push((line, Vec::new()));
                continue;
            }
            ')' => {
                reader.bump();
                let Some((start, items)) = stack.pop() else {
                    errors.push(ReadError { line, message: "unbalanced ')'".into() });
                    continue;
                };
                Sexp::List { items, line: start }
            }
            '"' => {
                reader.bump();
                match reader.string(line) {
                    Ok(text) => Sexp::Str { text, line },
                    Err(e) => {
                        errors.push(e);
                        return (out, errors);
                    }
                }
            }
            _ => Sexp::Sym { text: reader.symbol(), line },
        };
        match stack.last_mut() {
            Some((_, items)) => items.push(node),
            None => out.push(node),
        }
    }
    if let Some((start, _)) = stack.first() {
        errors.push(ReadError { line: *start, message: "unclosed '('".into() });
    }
    (out, errors)
}

struct Reader<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    line_start: bool,
}

impl Reader<'_> {
    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.line_start = true;
        } else {
            self.line_start = false;
        }
        Some(c)
    }

    fn skip_blank(&mut self) {
        while let Some(&c) = self.chars.peek() {
            if c == ';' {
                while let Some(&c) = self.chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    self.bump();
                }
            } else if c.is_whitespace() {
                self.bump();
            } else {
                break;
            }
        }
    }

    fn string(&mut self, start: usize) -> Result<String, ReadError> {
        let mut out = String::new();
        loop {
            match self.bump() {
                None => return Err(ReadError { line: start, message: "unterminated string".into() }),
                Some('"') => return Ok(out),
                Some('\\') => match self.bump() {
                    Some(c) => out.push(c),
                    None => return Err(ReadError { line: start, message: "unterminated string".into() }),
                },
                Some(c) => out.push(c),
            }
        }
    }

    fn symbol(&mut self) -> String {
        let mut out = String::new();
        while let Some(&c) = self.chars.peek() {
            if c.is_whitespace() || matches!(c, '(' | ')' | '"' | ';') {
                break;
            }
            out.push(c);
            self.bump();
        }
        out
    }
}
