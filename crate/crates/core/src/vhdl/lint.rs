//! Structural checks for generated VHDL: balanced blocks and parentheses
//! and legal identifiers. No substitute for an analyser, but catches the
//! mistakes a template change is likely to introduce.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Block {
    Entity,
    Architecture,
    Package,
    PackageBody,
    Process,
    If,
    Loop,
    Function,
    Procedure,
}

fn strip_comment(line: &str) -> &str {
    let mut in_str = false;
    let b = line.as_bytes();
    for i in 0..b.len() {
        match b[i] {
            b'"' => in_str = !in_str,
            b'-' if !in_str && b.get(i + 1) == Some(&b'-') => return &line[..i],
            _ => {}
        }
    }
    line
}

/// Splits a line into identifier-like words, skipping string and character
/// literals. Returns `Err` on an unterminated string.
fn words(line: &str, depth: &mut i64) -> Result<Vec<String>, String> {
    let b = line.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < b.len() {
        let c = b[i];
        if c == b'"' {
            match line[i + 1..].find('"') {
                Some(j) => i += j + 2,
                None => return Err("unterminated string".into()),
            }
            continue;
        }
        if c == b'\'' {
            // character literal or attribute tick
            i += if b.get(i + 2) == Some(&b'\'') { 3 } else { 1 };
            continue;
        }
        if c == b'(' {
            *depth += 1;
        } else if c == b')' {
            *depth -= 1;
            if *depth < 0 {
                return Err("unbalanced `)`".into());
            }
        }
        if c.is_ascii_alphanumeric() || c == b'_' {
            let start = i;
            while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'_') {
                i += 1;
            }
            out.push(line[start..i].to_string());
            continue;
        }
        i += 1;
    }
    Ok(out)
}

fn legal_identifier(w: &str) -> bool {
    let b = w.as_bytes();
    if b[0].is_ascii_digit() {
        // numeric literal
        return b.iter().all(|c| c.is_ascii_digit() || *c == b'_');
    }
    b[0].is_ascii_alphabetic() && !w.ends_with('_') && !w.contains("__")
}

/// Returns one message per problem found, each prefixed with a line number.
pub fn check(source: &str) -> Vec<String> {
    let mut problems = Vec::new();
    let mut stack: Vec<(Block, usize)> = Vec::new();
    let mut depth = 0i64;
    for (n, raw) in source.lines().enumerate() {
        let n = n + 1;
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        let ws = match words(line, &mut depth) {
            Ok(w) => w,
            Err(e) => {
                problems.push(format!("line {n}: {e}"));
                continue;
            }
        };
        for w in &ws {
            if !legal_identifier(w) {
                problems.push(format!("line {n}: illegal identifier `{w}`"));
            }
        }
        let lower: Vec<String> = ws.iter().map(|w| w.to_ascii_lowercase()).collect();
        let first = lower.first().map(String::as_str).unwrap_or("");
        let last = lower.last().map(String::as_str).unwrap_or("");
        let opens_is = line.to_ascii_lowercase().ends_with(" is");
        let opened = match first {
            "entity" if opens_is => Some(Block::Entity),
            "architecture" if opens_is => Some(Block::Architecture),
            "package" if lower.get(1).map(String::as_str) == Some("body") => {
                Some(Block::PackageBody)
            }
            "package" if opens_is => Some(Block::Package),
            "function" if opens_is => Some(Block::Function),
            "procedure" if opens_is => Some(Block::Procedure),
            "if" => Some(Block::If),
            "end" => None,
            _ if lower.iter().any(|w| w == "process") && !line.ends_with(';') => {
                Some(Block::Process)
            }
            _ if last == "loop" => Some(Block::Loop),
            _ => None,
        };
        if let Some(b) = opened {
            stack.push((b, n));
            continue;
        }
        if first == "end" {
            let kind = match lower.get(1).map(String::as_str) {
                Some("entity") => Block::Entity,
                Some("architecture") => Block::Architecture,
                Some("package") if lower.get(2).map(String::as_str) == Some("body") => {
                    Block::PackageBody
                }
                Some("package") => Block::Package,
                Some("process") => Block::Process,
                Some("if") => Block::If,
                Some("loop") => Block::Loop,
                Some("function") => Block::Function,
                Some("procedure") => Block::Procedure,
                other => {
                    problems.push(format!(
                        "line {n}: unqualified end `{}`",
                        other.unwrap_or("")
                    ));
                    continue;
                }
            };
            match stack.pop() {
                Some((b, _)) if b == kind => {}
                Some((b, at)) => problems.push(format!(
                    "line {n}: end {kind:?} closes {b:?} opened at line {at}"
                )),
                None => problems.push(format!("line {n}: end {kind:?} without a matching block")),
            }
        }
    }
    for (b, at) in stack {
        problems.push(format!("line {at}: {b:?} is never closed"));
    }
    if depth != 0 {
        problems.push("unbalanced parentheses".into());
    }
    problems
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn detects_unclosed_and_mismatched_blocks() {
        let ok = "entity a is\nend entity a;\narchitecture rtl of a is\nbegin\n  p: process (CLK)\n  begin\n    if x = '1' then\n      null;\n    end if;\n  end process p;\nend architecture rtl;\n";
        assert!(check(ok).is_empty(), "{:?}", check(ok));
        let bad = ok.replace("    end if;\n", "");
        assert!(!check(&bad).is_empty());
        assert!(!check("x <= f(a;").is_empty());
        assert!(!check("signal a__b : std_logic;").is_empty());
        assert!(check("x := character'pos('0'); -- (").is_empty());
    }
}
