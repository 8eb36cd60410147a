use super::ast::Pos;
use super::Diagnostic;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int {
        value: u128,
        suffix: Option<(bool, u32)>,
    },
    Str(String),
    Sym(&'static str),
    Eof,
}

const SYMBOLS: &[&str] = &[
    ":=", "..", "==", "!=", "<=", ">=", "<<", ">>", "&&", "||", "(", ")", "{", "}", "[", "]", ",",
    ";", ":", ".", "=", "<", ">", "+", "-", "*", "/", "%", "&", "|", "^", "!",
];

/// `u8`, `i16`: fixed-width type names.
pub fn type_name(s: &str) -> Option<(bool, u32)> {
    let signed = match s.as_bytes().first()? {
        b'u' => false,
        b'i' => true,
        _ => return None,
    };
    let digits = &s[1..];
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    Some((signed, digits.parse().ok()?))
}

/// Splits `src` into tokens. Lexical errors are reported and the offending
/// character skipped, so the parser still sees the rest of the input.
pub fn lex(src: &str) -> (Vec<(Tok, Pos)>, Vec<Diagnostic>) {
    let chars: Vec<char> = src.chars().collect();
    let mut toks = Vec::new();
    let mut diags = Vec::new();
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
        let pos = Pos { line, col };
        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                bump!();
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let s = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                bump!();
            }
            toks.push((Tok::Ident(chars[s..i].iter().collect()), pos));
            continue;
        }
        if c.is_ascii_digit() {
            let s = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                bump!();
            }
            let text: String = chars[s..i].iter().filter(|c| **c != '_').collect();
            match number(&text) {
                Ok((value, suffix)) => toks.push((Tok::Int { value, suffix }, pos)),
                Err(m) => diags.push(Diagnostic::error(pos, m)),
            }
            continue;
        }
        if c == '"' {
            bump!();
            let mut s = String::new();
            let mut closed = false;
            while i < chars.len() && chars[i] != '\n' {
                let c = chars[i];
                bump!();
                match c {
                    '"' => {
                        closed = true;
                        break;
                    }
                    '\\' if i < chars.len() => {
                        let e = chars[i];
                        let epos = Pos { line, col };
                        bump!();
                        match e {
                            'n' => s.push('\n'),
                            't' => s.push('\t'),
                            '"' | '\\' => s.push(e),
                            _ => diags
                                .push(Diagnostic::error(epos, format!("unknown escape `\\{e}`"))),
                        }
                    }
                    _ => s.push(c),
                }
            }
            if !closed {
                diags.push(Diagnostic::error(pos, "unterminated string"));
            }
            toks.push((Tok::Str(s), pos));
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
        match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            Some(s) => {
                for _ in 0..s.len() {
                    bump!();
                }
                toks.push((Tok::Sym(s), pos));
            }
            None => {
                diags.push(Diagnostic::error(
                    pos,
                    format!("unexpected character `{c}`"),
                ));
                bump!();
            }
        }
    }
    toks.push((Tok::Eof, Pos { line, col }));
    (toks, diags)
}

fn number(text: &str) -> Result<(u128, Option<(bool, u32)>), String> {
    let (digits, radix) = match text.strip_prefix("0x") {
        Some(h) => (h, 16),
        None => (text, 10),
    };
    let split = digits
        .find(|c: char| {
            if radix == 16 {
                !c.is_ascii_hexdigit()
            } else {
                !c.is_ascii_digit()
            }
        })
        .unwrap_or(digits.len());
    let (num, suffix) = digits.split_at(split);
    if num.is_empty() {
        return Err(format!("malformed number `{text}`"));
    }
    let value =
        u128::from_str_radix(num, radix).map_err(|_| format!("number `{text}` is too large"))?;
    let suffix = if suffix.is_empty() {
        None
    } else {
        Some(type_name(suffix).ok_or_else(|| format!("unknown literal suffix `{suffix}`"))?)
    };
    Ok((value, suffix))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<Tok> {
        let (t, d) = lex(src);
        assert!(d.is_empty(), "{d:?}");
        t.into_iter().map(|(t, _)| t).collect()
    }

    #[test]
    fn literals_and_ranges() {
        assert_eq!(
            kinds("0..3 15u4 0xffu8"),
            vec![
                Tok::Int {
                    value: 0,
                    suffix: None
                },
                Tok::Sym(".."),
                Tok::Int {
                    value: 3,
                    suffix: None
                },
                Tok::Int {
                    value: 15,
                    suffix: Some((false, 4))
                },
                Tok::Int {
                    value: 255,
                    suffix: Some((false, 8))
                },
                Tok::Eof,
            ]
        );
    }

    #[test]
    fn positions_count_lines_and_columns() {
        let (t, _) = lex("a\n  b := \"x\\\"y\";");
        let pos: Vec<(u32, u32)> = t.iter().map(|(_, p)| (p.line, p.col)).collect();
        assert_eq!(pos, vec![(1, 1), (2, 3), (2, 5), (2, 8), (2, 14), (2, 15)]);
        assert_eq!(t[3].0, Tok::Str("x\"y".into()));
    }

    #[test]
    fn errors_are_positioned_and_skipped() {
        let (t, d) = lex("a $ 12q \"open");
        assert_eq!(d.len(), 3);
        assert_eq!((d[0].line, d[0].column), (1, 3));
        assert_eq!((d[1].line, d[1].column), (1, 5));
        assert_eq!((d[2].line, d[2].column), (1, 9));
        assert_eq!(t.len(), 3);
    }
}
