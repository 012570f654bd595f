use super::ast::Span;
use super::FrontendError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    Sym(&'static str),
    /// `--@` line: the text after the marker, trimmed.
    Pragma(String),
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(v) => format!("`{v}`"),
            Tok::Sym(s) => format!("`{s}`"),
            Tok::Pragma(_) => "pragma".to_string(),
            Tok::Eof => "end of input".to_string(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

const SYMBOLS: &[&str] = &[
    "<<", ">>", "<>", "<=", ">=", "..", "^", "(", ")", "[", "]", "{", "}", ",", ";", ":", "=", "<",
    ">", "+", "-", "*", "/", ".", "|",
];

pub fn lex(src: &str) -> Result<Vec<Token>, FrontendError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);

    macro_rules! bump {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }

    while i < chars.len() {
        let c = chars[i];
        let span = Span::new(line, col);
        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '-' && chars.get(i + 1) == Some(&'-') {
            let pragma = chars.get(i + 2) == Some(&'@');
            let start = i;
            while i < chars.len() && chars[i] != '\n' {
                bump!();
            }
            if pragma {
                let text: String = chars[start + 3..i].iter().collect();
                out.push(Token {
                    tok: Tok::Pragma(text.trim().to_string()),
                    span,
                });
            }
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'*') {
            bump!();
            bump!();
            loop {
                if i >= chars.len() {
                    return Err(FrontendError::new(span, "unterminated block comment"));
                }
                if chars[i] == '*' && chars.get(i + 1) == Some(&'/') {
                    bump!();
                    bump!();
                    break;
                }
                bump!();
            }
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            let hex = c == '0' && matches!(chars.get(i + 1), Some('x') | Some('X'));
            if hex {
                bump!();
                bump!();
                while i < chars.len() && chars[i].is_ascii_hexdigit() {
                    bump!();
                }
            } else {
                while i < chars.len() && chars[i].is_ascii_digit() {
                    bump!();
                }
            }
            let text: String = chars[start..i].iter().collect();
            let value = if hex {
                i64::from_str_radix(&text[2..], 16)
            } else {
                text.parse::<i64>()
            }
            .map_err(|_| FrontendError::new(span, format!("invalid integer literal `{text}`")))?;
            out.push(Token {
                tok: Tok::Int(value),
                span,
            });
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                bump!();
            }
            out.push(Token {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                span,
            });
            continue;
        }
        let sym = SYMBOLS.iter().find(|s| {
            s.chars()
                .enumerate()
                .all(|(k, sc)| chars.get(i + k) == Some(&sc))
        });
        match sym {
            Some(s) => {
                for _ in 0..s.len() {
                    bump!();
                }
                out.push(Token {
                    tok: Tok::Sym(s),
                    span,
                });
            }
            None => return Err(FrontendError::new(span, format!("unexpected character `{c}`"))),
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        span: Span::new(line, col),
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(src: &str) -> Vec<Tok> {
        lex(src).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn splits_symbols_and_skips_comments() {
        assert_eq!(
            toks("a<<5>> /* x */ -- c\n<>0x1F"),
            vec![
                Tok::Ident("a".into()),
                Tok::Sym("<<"),
                Tok::Int(5),
                Tok::Sym(">>"),
                Tok::Sym("<>"),
                Tok::Int(31),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn pragma_lines_survive() {
        assert_eq!(
            toks("--@machine demo\nx"),
            vec![Tok::Pragma("machine demo".into()), Tok::Ident("x".into()), Tok::Eof]
        );
    }

    #[test]
    fn positions_are_one_based() {
        let t = lex("\n  foo").unwrap();
        assert_eq!((t[0].span.line, t[0].span.col), (2, 3));
    }

    #[test]
    fn rejects_stray_characters() {
        assert!(lex("a ? b").is_err());
    }
}
