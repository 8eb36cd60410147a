//! VHDL identifier allocation.

use std::collections::HashSet;

/// VHDL-93 and VHDL-2008 reserved words.
const KEYWORDS: &[&str] = &[
    "abs",
    "access",
    "after",
    "alias",
    "all",
    "and",
    "architecture",
    "array",
    "assert",
    "assume",
    "attribute",
    "begin",
    "block",
    "body",
    "buffer",
    "bus",
    "case",
    "component",
    "configuration",
    "constant",
    "context",
    "cover",
    "default",
    "disconnect",
    "downto",
    "else",
    "elsif",
    "end",
    "entity",
    "exit",
    "fairness",
    "file",
    "for",
    "force",
    "function",
    "generate",
    "generic",
    "group",
    "guarded",
    "if",
    "impure",
    "in",
    "inertial",
    "inout",
    "is",
    "label",
    "library",
    "linkage",
    "literal",
    "loop",
    "map",
    "mod",
    "nand",
    "new",
    "next",
    "nor",
    "not",
    "null",
    "of",
    "on",
    "open",
    "or",
    "others",
    "out",
    "package",
    "parameter",
    "port",
    "postponed",
    "procedure",
    "process",
    "property",
    "protected",
    "pure",
    "range",
    "record",
    "register",
    "reject",
    "release",
    "rem",
    "report",
    "restrict",
    "return",
    "rol",
    "ror",
    "select",
    "sequence",
    "severity",
    "shared",
    "signal",
    "sla",
    "sll",
    "sra",
    "srl",
    "strong",
    "subtype",
    "then",
    "to",
    "transport",
    "type",
    "unaffected",
    "units",
    "until",
    "use",
    "variable",
    "vmode",
    "vprop",
    "vunit",
    "wait",
    "when",
    "while",
    "with",
    "xnor",
    "xor",
];

/// Library names, predefined types and helpers the generated code refers to,
/// plus the fixed labels and names used by the templates.
const PREDEFINED: &[&str] = &[
    "ieee",
    "std",
    "work",
    "std_logic_1164",
    "numeric_std",
    "textio",
    "std_logic",
    "std_logic_vector",
    "std_ulogic",
    "unsigned",
    "signed",
    "boolean",
    "integer",
    "natural",
    "positive",
    "string",
    "character",
    "time",
    "bit",
    "bit_vector",
    "true",
    "false",
    "now",
    "note",
    "warning",
    "error",
    "failure",
    "resize",
    "to_integer",
    "to_unsigned",
    "to_signed",
    "shift_left",
    "shift_right",
    "rising_edge",
    "falling_edge",
    "text",
    "line",
    "read",
    "readline",
    "write",
    "writeline",
    "endfile",
    "read_mode",
    "sme_types",
    "word",
    "trace_row",
    "trace_defined",
    "parse_row",
    "to_dec",
    "to_sl",
    "to_u",
    "to_s",
    "wrap_s",
    "mul_wrap",
    "shamt",
    "clk",
    "rst",
    "p_main",
    "p_comb",
    "p_regs",
    "p_delay",
    "p_ram",
    "mem_array",
    "mem_array_t",
    "p_clock",
    "p_stimulus",
    "u_dut",
    "period",
    "finished",
    "trace",
    "f",
    "l",
    "row",
    "defined",
    "cycle",
    "failures",
    "toplevel",
    "testbench",
    "rtl",
    "sim",
];

fn is_reserved(lower: &str) -> bool {
    KEYWORDS.contains(&lower) || PREDEFINED.contains(&lower)
}

/// Rewrites `raw` into a legal basic identifier: letters, digits and single
/// underscores, starting with a letter and not ending in an underscore.
pub fn sanitize(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    for c in raw.chars() {
        let c = if c.is_ascii_alphanumeric() { c } else { '_' };
        if c == '_' && (out.is_empty() || out.ends_with('_')) {
            continue;
        }
        out.push(c);
    }
    while out.ends_with('_') {
        out.pop();
    }
    if out.is_empty() {
        out.push('x');
    }
    if out.as_bytes()[0].is_ascii_digit() {
        out.insert_str(0, "x_");
    }
    out
}

/// Hands out identifiers that are unique ignoring case and never clash with
/// a reserved word.
#[derive(Debug, Clone, Default)]
pub struct Namer {
    used: HashSet<String>,
}

impl Namer {
    pub fn new() -> Self {
        Self::default()
    }

    /// Marks `name` as taken without checking it.
    pub fn reserve(&mut self, name: &str) {
        self.used.insert(name.to_ascii_lowercase());
    }

    pub fn fresh(&mut self, raw: &str) -> String {
        let base = sanitize(raw);
        let mut n = 1;
        loop {
            let candidate = if n == 1 {
                base.clone()
            } else {
                format!("{base}_{n}")
            };
            let lower = candidate.to_ascii_lowercase();
            if !is_reserved(&lower) && self.used.insert(lower) {
                return candidate;
            }
            n += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn legal(s: &str) -> bool {
        let b = s.as_bytes();
        !b.is_empty()
            && b[0].is_ascii_alphabetic()
            && !s.ends_with('_')
            && !s.contains("__")
            && b.iter().all(|c| c.is_ascii_alphanumeric() || *c == b'_')
    }

    #[test]
    fn keywords_and_case_clashes_get_suffixes() {
        let mut n = Namer::new();
        assert_eq!(n.fresh("signal"), "signal_2");
        assert_eq!(n.fresh("Counter"), "Counter");
        assert_eq!(n.fresh("counter"), "counter_2");
        assert_eq!(n.fresh("3d..view_"), "x_3d_view");
        assert_eq!(n.fresh("__"), "x");
        assert_eq!(n.fresh("CLK"), "CLK_2");
    }

    proptest! {
        #[test]
        fn fresh_names_are_legal_and_distinct(raw in proptest::collection::vec("[A-Za-z0-9_. -]{0,8}", 1..30)) {
            let mut n = Namer::new();
            let mut seen = HashSet::new();
            for r in &raw {
                let name = n.fresh(r);
                prop_assert!(legal(&name), "{name}");
                prop_assert!(!is_reserved(&name.to_ascii_lowercase()));
                prop_assert!(seen.insert(name.to_ascii_lowercase()));
            }
        }
    }
}
