use super::{ParseError, Position};

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    /// Names, value labels and numbers.
    Word(String),
    Punct(char),
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Token {
    pub tok: Tok,
    pub pos: Position,
}

const PUNCT: &[char] = &['{', '}', ':', ';', ',', '='];

pub(crate) fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    for (l, line) in text.lines().enumerate() {
        let mut chars = line.char_indices().peekable();
        let mut col = 0usize;
        while let Some(&(_, c)) = chars.peek() {
            let pos = Position::new(l + 1, col + 1);
            if c == '#' {
                break;
            }
            if c.is_whitespace() {
                chars.next();
                col += 1;
                continue;
            }
            if PUNCT.contains(&c) {
                chars.next();
                col += 1;
                out.push(Token {
                    tok: Tok::Punct(c),
                    pos,
                });
                continue;
            }
            if c.is_control() || matches!(c, '(' | ')' | '[' | ']' | '"') {
                return Err(ParseError::syntax(
                    pos,
                    format!("unexpected character '{}'", c.escape_debug()),
                ));
            }
            let mut word = String::new();
            while let Some(&(_, c)) = chars.peek() {
                if c.is_whitespace() || PUNCT.contains(&c) || c == '#' {
                    break;
                }
                if c.is_control() || matches!(c, '(' | ')' | '[' | ']' | '"') {
                    return Err(ParseError::syntax(
                        Position::new(l + 1, col + 1),
                        format!("unexpected character '{}'", c.escape_debug()),
                    ));
                }
                word.push(c);
                chars.next();
                col += 1;
            }
            out.push(Token {
                tok: Tok::Word(word),
                pos,
            });
        }
    }
    Ok(out)
}

/// Whether `s` can be written as a bare word.
pub(crate) fn is_word(s: &str) -> bool {
    !s.is_empty()
        && s.chars().all(|c| {
            !(c.is_whitespace()
                || c.is_control()
                || PUNCT.contains(&c)
                || matches!(c, '#' | '(' | ')' | '[' | ']' | '"'))
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn words_punct_and_comments() {
        let toks = tokenize("variable x { values: a, b } # trailing\n  cpt").unwrap();
        let kinds: Vec<String> = toks
            .iter()
            .map(|t| match &t.tok {
                Tok::Word(w) => w.clone(),
                Tok::Punct(c) => c.to_string(),
            })
            .collect();
        assert_eq!(kinds, ["variable", "x", "{", "values", ":", "a", ",", "b", "}", "cpt"]);
        assert_eq!(toks[9].pos, Position::new(2, 3));
    }

    #[test]
    fn rejects_stray_characters() {
        let err = tokenize("variable x (").unwrap_err();
        assert_eq!(err.position(), Position::new(1, 12));
    }
}
