use std::fmt;

use serde::Serialize;

/// A range of source text. Lines and columns are 1-based and counted in
/// characters; the end position is exclusive.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct SourceSpan {
    pub file: String,
    pub start_line: usize,
    pub start_col: usize,
    pub end_line: usize,
    pub end_col: usize,
}

impl SourceSpan {
    pub fn new(file: impl Into<String>, start: (usize, usize), end: (usize, usize)) -> Self {
        SourceSpan {
            file: file.into(),
            start_line: start.0,
            start_col: start.1,
            end_line: end.0,
            end_col: end.1,
        }
    }

    /// Smallest span covering both.
    pub fn to(&self, other: &SourceSpan) -> SourceSpan {
        let start = (self.start_line, self.start_col).min((other.start_line, other.start_col));
        let end = (self.end_line, self.end_col).max((other.end_line, other.end_col));
        SourceSpan::new(self.file.clone(), start, end)
    }

    /// The text this span covers in `source`. Newlines are `\n`, `\r\n` or a
    /// lone `\r`, matching the lexer.
    pub fn slice<'a>(&self, source: &'a str) -> Option<&'a str> {
        let start = offset_of(source, self.start_line, self.start_col)?;
        let end = offset_of(source, self.end_line, self.end_col)?;
        source.get(start..end.max(start))
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.start_line, self.start_col)
    }
}

fn offset_of(source: &str, line: usize, col: usize) -> Option<usize> {
    let (mut cur_line, mut cur_col) = (1usize, 1usize);
    let mut chars = source.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        if (cur_line, cur_col) == (line, col) {
            return Some(i);
        }
        match c {
            '\n' => {
                cur_line += 1;
                cur_col = 1;
            }
            '\r' => {
                if matches!(chars.peek(), Some((_, '\n'))) {
                    cur_col += 1;
                } else {
                    cur_line += 1;
                    cur_col = 1;
                }
            }
            _ => cur_col += 1,
        }
    }
    ((cur_line, cur_col) == (line, col)).then_some(source.len())
}
