//! The shared `sme_types` package: array types, conversion helpers and the
//! trace reader used by testbenches.

use std::collections::BTreeSet;
use std::fmt::Write;

use crate::types::{Kind, ScalarType};

pub fn scalar_tag(ty: ScalarType) -> String {
    match ty.kind {
        Kind::Bool => "bool".into(),
        Kind::Unsigned => format!("u{}", ty.width),
        Kind::Signed => format!("i{}", ty.width),
    }
}

pub fn array_type_name(elem: ScalarType, len: u32) -> String {
    format!("{}_array_{len}", scalar_tag(elem))
}

pub fn scalar_type(ty: ScalarType) -> String {
    match ty.kind {
        Kind::Bool => "std_logic".into(),
        Kind::Unsigned => format!("unsigned({} downto 0)", ty.width - 1),
        Kind::Signed => format!("signed({} downto 0)", ty.width - 1),
    }
}

const HELPERS_DECL: &str = "
  function to_sl(b : boolean) return std_logic;
  function to_sl(v : unsigned) return std_logic;
  function to_u(b : std_logic; w : natural) return unsigned;
  function to_s(b : std_logic; w : natural) return signed;
  function wrap_s(v : signed; w : natural) return signed;
  function mul_wrap(a, b : unsigned) return unsigned;
  function mul_wrap(a, b : signed) return signed;
  function shamt(v : unsigned) return natural;
  function shamt(v : signed) return natural;
  function to_dec(v : unsigned) return string;
  procedure parse_row(l : inout line; row : out trace_row; defined : out trace_defined);
end package sme_types;
";

const HELPERS_BODY: &str = "package body sme_types is

  function to_sl(b : boolean) return std_logic is
  begin
    if b then
      return '1';
    end if;
    return '0';
  end function;

  -- Non-zero test.
  function to_sl(v : unsigned) return std_logic is
  begin
    return to_sl(v /= 0);
  end function;

  function to_u(b : std_logic; w : natural) return unsigned is
    variable r : unsigned(w - 1 downto 0) := (others => '0');
  begin
    r(0) := b;
    return r;
  end function;

  function to_s(b : std_logic; w : natural) return signed is
  begin
    return signed(to_u(b, w));
  end function;

  -- Sign-extends or truncates to w bits.
  function wrap_s(v : signed; w : natural) return signed is
    variable n : signed(v'length - 1 downto 0) := v;
  begin
    if w > v'length then
      return resize(n, w);
    end if;
    return n(w - 1 downto 0);
  end function;

  function mul_wrap(a, b : unsigned) return unsigned is
    variable p : unsigned(a'length + b'length - 1 downto 0) := a * b;
  begin
    return p(a'length - 1 downto 0);
  end function;

  function mul_wrap(a, b : signed) return signed is
    variable p : signed(a'length + b'length - 1 downto 0) := a * b;
  begin
    return p(a'length - 1 downto 0);
  end function;

  -- Shift amounts saturate; any count past the width gives the same result.
  function shamt(v : unsigned) return natural is
    variable n : unsigned(v'length - 1 downto 0) := v;
  begin
    if n > 127 then
      return 127;
    end if;
    return to_integer(n);
  end function;

  function shamt(v : signed) return natural is
  begin
    return shamt(unsigned(v));
  end function;

  function to_dec(v : unsigned) return string is
    variable n : unsigned(v'length - 1 downto 0) := v;
    variable s : string(1 to 20);
    variable i : natural := 20;
  begin
    if n = 0 then
      return \"0\";
    end if;
    while n /= 0 loop
      s(i) := character'val(character'pos('0') + to_integer(n rem 10));
      n := n / 10;
      i := i - 1;
    end loop;
    return s(i + 1 to 20);
  end function;

  -- Reads one CSV record of decimal cells or `U`.
  procedure parse_row(l : inout line; row : out trace_row; defined : out trace_defined) is
    variable c : character;
    variable ok : boolean;
    variable v : word;
  begin
    for i in row'range loop
      v := (others => '0');
      defined(i) := true;
      loop
        read(l, c, ok);
        exit when not ok or c = ',';
        if c = 'U' then
          defined(i) := false;
        elsif c >= '0' and c <= '9' then
          v := resize(v * 10, 64) + to_unsigned(character'pos(c) - character'pos('0'), 64);
        end if;
      end loop;
      row(i) := v;
    end loop;
  end procedure;

end package body sme_types;
";

/// Renders the package with one array type per `(element, length)` pair.
pub fn emit_package(arrays: &BTreeSet<(ScalarType, u32)>) -> String {
    let mut s = String::new();
    s.push_str(
        "library ieee;\nuse ieee.std_logic_1164.all;\nuse ieee.numeric_std.all;\nuse std.textio.all;\n\n",
    );
    s.push_str("package sme_types is\n\n");
    s.push_str("  subtype word is unsigned(63 downto 0);\n");
    s.push_str("  type trace_row is array (natural range <>) of word;\n");
    s.push_str("  type trace_defined is array (natural range <>) of boolean;\n");
    if !arrays.is_empty() {
        s.push('\n');
    }
    for &(elem, len) in arrays {
        let _ = writeln!(
            s,
            "  type {} is array (0 to {}) of {};",
            array_type_name(elem, len),
            len - 1,
            scalar_type(elem)
        );
    }
    s.push_str(HELPERS_DECL);
    s.push('\n');
    s.push_str(HELPERS_BODY);
    s
}
