//! Fixed-width value types and their wrap-around arithmetic.
//!
//! Every integer is carried as a `u64` bit pattern already masked to its
//! width. Signed values are two's complement within that width.

use std::fmt;

use crate::error::ModelError;

/// Largest supported integer width.
pub const MAX_WIDTH: u8 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Kind {
    Bool,
    Unsigned,
    Signed,
}

/// A scalar type: the thing a bus field or an array element holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ScalarType {
    pub kind: Kind,
    pub width: u8,
}

impl ScalarType {
    pub const BOOL: ScalarType = ScalarType {
        kind: Kind::Bool,
        width: 1,
    };

    pub fn unsigned(width: u8) -> Result<Self, ModelError> {
        Self::new(Kind::Unsigned, width)
    }

    pub fn signed(width: u8) -> Result<Self, ModelError> {
        Self::new(Kind::Signed, width)
    }

    pub fn new(kind: Kind, width: u8) -> Result<Self, ModelError> {
        match kind {
            Kind::Bool if width != 1 => Err(ModelError::InvalidWidth(width as u32)),
            _ if width == 0 || width > MAX_WIDTH => Err(ModelError::InvalidWidth(width as u32)),
            _ => Ok(ScalarType { kind, width }),
        }
    }

    /// Panicking constructor for statically known widths.
    pub fn u(width: u8) -> Self {
        Self::unsigned(width).expect("valid unsigned width")
    }

    /// Panicking constructor for statically known widths.
    pub fn i(width: u8) -> Self {
        Self::signed(width).expect("valid signed width")
    }

    pub fn is_bool(self) -> bool {
        self.kind == Kind::Bool
    }

    pub fn is_integer(self) -> bool {
        self.kind != Kind::Bool
    }

    pub fn mask(self) -> u64 {
        mask(self.width)
    }

    /// Reduces an arbitrary bit pattern to this type's width.
    pub fn wrap(self, bits: u64) -> u64 {
        bits & self.mask()
    }

    /// Wraps a mathematical integer into this type (mod 2^width).
    pub fn wrap_i128(self, v: i128) -> u64 {
        (v as u64) & self.mask()
    }

    /// Mathematical value of a bit pattern of this type.
    pub fn to_i128(self, bits: u64) -> i128 {
        match self.kind {
            Kind::Signed => sign_extend(bits, self.width) as i128,
            _ => (bits & self.mask()) as i128,
        }
    }

    /// Whether `v` is representable without wrapping.
    pub fn fits(self, v: i128) -> bool {
        v >= self.min_value() && v <= self.max_value()
    }

    pub fn min_value(self) -> i128 {
        match self.kind {
            Kind::Signed => -(1i128 << (self.width - 1)),
            _ => 0,
        }
    }

    pub fn max_value(self) -> i128 {
        match self.kind {
            Kind::Signed => (1i128 << (self.width - 1)) - 1,
            _ => (1i128 << self.width) - 1,
        }
    }
}

impl fmt::Display for ScalarType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            Kind::Bool => write!(f, "bool"),
            Kind::Unsigned => write!(f, "u{}", self.width),
            Kind::Signed => write!(f, "i{}", self.width),
        }
    }
}

/// A scalar type, optionally as a fixed-length array (variables only).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ValueType {
    pub scalar: ScalarType,
    pub array_len: Option<u32>,
}

impl ValueType {
    pub fn scalar(scalar: ScalarType) -> Self {
        ValueType {
            scalar,
            array_len: None,
        }
    }

    pub fn array(scalar: ScalarType, len: u32) -> Result<Self, ModelError> {
        if len == 0 {
            return Err(ModelError::InvalidArrayLength);
        }
        Ok(ValueType {
            scalar,
            array_len: Some(len),
        })
    }

    /// Number of scalar slots this type occupies.
    pub fn slots(&self) -> usize {
        self.array_len.unwrap_or(1) as usize
    }
}

impl From<ScalarType> for ValueType {
    fn from(s: ScalarType) -> Self {
        ValueType::scalar(s)
    }
}

impl fmt::Display for ValueType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.array_len {
            Some(n) => write!(f, "[{}; {}]", self.scalar, n),
            None => write!(f, "{}", self.scalar),
        }
    }
}

/// A typed scalar value. `defined == false` marks an indeterminate value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Value {
    pub ty: ScalarType,
    pub bits: u64,
    pub defined: bool,
}

impl Value {
    pub fn new(ty: ScalarType, bits: u64) -> Self {
        Value {
            ty,
            bits: ty.wrap(bits),
            defined: true,
        }
    }

    pub fn from_i128(ty: ScalarType, v: i128) -> Self {
        Value::new(ty, ty.wrap_i128(v))
    }

    pub fn zero(ty: ScalarType) -> Self {
        Value::new(ty, 0)
    }

    pub fn undefined(ty: ScalarType) -> Self {
        Value {
            ty,
            bits: 0,
            defined: false,
        }
    }

    pub fn bool(b: bool) -> Self {
        Value::new(ScalarType::BOOL, b as u64)
    }

    pub fn as_bool(&self) -> bool {
        self.bits != 0
    }

    pub fn as_i128(&self) -> i128 {
        self.ty.to_i128(self.bits)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.defined {
            return write!(f, "U");
        }
        match self.ty.kind {
            Kind::Bool => write!(f, "{}", self.bits != 0),
            _ => write!(f, "{}{}", self.as_i128(), self.ty),
        }
    }
}

pub fn mask(width: u8) -> u64 {
    if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

pub fn sign_extend(bits: u64, width: u8) -> i64 {
    if width >= 64 {
        return bits as i64;
    }
    let shift = 64 - width as u32;
    ((bits << shift) as i64) >> shift
}

/// Minimal unsigned width able to hold `max` (at least 1).
pub fn bits_for(max: u64) -> u8 {
    (64 - max.leading_zeros()).max(1) as u8
}

/// ⌈log2(n)⌉ for n ≥ 1, clamped to at least 1.
pub fn clog2(n: u64) -> u8 {
    if n <= 2 {
        1
    } else {
        bits_for(n - 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    /// Logical not on bool, bitwise complement on integers.
    Not,
    Neg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    Shl,
    Shr,
    BitAnd,
    BitOr,
    BitXor,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
}

impl BinaryOp {
    pub fn is_comparison(self) -> bool {
        matches!(
            self,
            BinaryOp::Eq | BinaryOp::Ne | BinaryOp::Lt | BinaryOp::Le | BinaryOp::Gt | BinaryOp::Ge
        )
    }

    pub fn is_logical(self) -> bool {
        matches!(self, BinaryOp::And | BinaryOp::Or)
    }

    pub fn is_shift(self) -> bool {
        matches!(self, BinaryOp::Shl | BinaryOp::Shr)
    }

    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Rem => "%",
            BinaryOp::Shl => "<<",
            BinaryOp::Shr => ">>",
            BinaryOp::BitAnd => "&",
            BinaryOp::BitOr => "|",
            BinaryOp::BitXor => "^",
            BinaryOp::Eq => "==",
            BinaryOp::Ne => "!=",
            BinaryOp::Lt => "<",
            BinaryOp::Le => "<=",
            BinaryOp::Gt => ">",
            BinaryOp::Ge => ">=",
            BinaryOp::And => "&&",
            BinaryOp::Or => "||",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DivideByZero;

pub fn eval_unary(op: UnaryOp, ty: ScalarType, a: u64) -> u64 {
    match (op, ty.kind) {
        (UnaryOp::Not, Kind::Bool) => (a == 0) as u64,
        (UnaryOp::Not, _) => ty.wrap(!a),
        (UnaryOp::Neg, _) => ty.wrap(a.wrapping_neg()),
    }
}

/// Evaluates `a op b` where `ty` is the operand type (the left operand's
/// type for shifts). Comparisons and logical operators return 0/1.
pub fn eval_binary(op: BinaryOp, ty: ScalarType, a: u64, b: u64) -> Result<u64, DivideByZero> {
    let signed = ty.kind == Kind::Signed;
    let sa = || sign_extend(a, ty.width);
    let sb = || sign_extend(b, ty.width);
    let r = match op {
        BinaryOp::Add => ty.wrap(a.wrapping_add(b)),
        BinaryOp::Sub => ty.wrap(a.wrapping_sub(b)),
        BinaryOp::Mul => ty.wrap(a.wrapping_mul(b)),
        BinaryOp::Div | BinaryOp::Rem => {
            if b == 0 {
                return Err(DivideByZero);
            }
            let v = if signed {
                let (x, y) = (sa(), sb());
                if op == BinaryOp::Div {
                    x.wrapping_div(y) as u64
                } else {
                    x.wrapping_rem(y) as u64
                }
            } else if op == BinaryOp::Div {
                a / b
            } else {
                a % b
            };
            ty.wrap(v)
        }
        BinaryOp::Shl => {
            if b >= ty.width as u64 {
                0
            } else {
                ty.wrap(a << b)
            }
        }
        BinaryOp::Shr => {
            if signed {
                let sh = b.min(63) as u32;
                ty.wrap((sa() >> sh) as u64)
            } else if b >= ty.width as u64 {
                0
            } else {
                a >> b
            }
        }
        BinaryOp::BitAnd => a & b,
        BinaryOp::BitOr => a | b,
        BinaryOp::BitXor => a ^ b,
        BinaryOp::And => ((a != 0) && (b != 0)) as u64,
        BinaryOp::Or => ((a != 0) || (b != 0)) as u64,
        BinaryOp::Eq => (a == b) as u64,
        BinaryOp::Ne => (a != b) as u64,
        BinaryOp::Lt | BinaryOp::Le | BinaryOp::Gt | BinaryOp::Ge => {
            let ord = if signed { sa().cmp(&sb()) } else { a.cmp(&b) };
            let r = match op {
                BinaryOp::Lt => ord.is_lt(),
                BinaryOp::Le => ord.is_le(),
                BinaryOp::Gt => ord.is_gt(),
                _ => ord.is_ge(),
            };
            r as u64
        }
    };
    Ok(r)
}

/// Converts a bit pattern between scalar types by taking its mathematical
/// value and wrapping it into the target width. Integer to bool tests for
/// non-zero.
pub fn eval_cast(from: ScalarType, to: ScalarType, bits: u64) -> u64 {
    match (from.kind, to.kind) {
        (_, Kind::Bool) => (bits != 0) as u64,
        _ => to.wrap_i128(from.to_i128(bits)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bin(op: BinaryOp, ty: ScalarType, a: i128, b: i128) -> i128 {
        let r = eval_binary(op, ty, ty.wrap_i128(a), ty.wrap_i128(b)).unwrap();
        ty.to_i128(r)
    }

    #[test]
    fn unsigned_add_wraps() {
        assert_eq!(bin(BinaryOp::Add, ScalarType::u(8), 250, 10), 4);
        assert_eq!(bin(BinaryOp::Add, ScalarType::u(4), 15, 1), 0);
    }

    #[test]
    fn signed_sub_wraps() {
        assert_eq!(bin(BinaryOp::Sub, ScalarType::i(4), -8, 1), 7);
        assert_eq!(bin(BinaryOp::Div, ScalarType::i(4), -8, -1), -8);
        assert_eq!(bin(BinaryOp::Rem, ScalarType::i(8), -7, 2), -1);
    }

    #[test]
    fn sixty_four_bit_edges() {
        let t = ScalarType::u(64);
        assert_eq!(eval_binary(BinaryOp::Add, t, u64::MAX, 1).unwrap(), 0);
        assert_eq!(eval_binary(BinaryOp::Shl, t, 1, 63).unwrap(), 1 << 63);
        assert_eq!(eval_binary(BinaryOp::Shl, t, 1, 64).unwrap(), 0);
        let s = ScalarType::i(64);
        assert_eq!(bin(BinaryOp::Lt, s, -1, 0), 1);
    }

    #[test]
    fn shifts_past_width() {
        assert_eq!(bin(BinaryOp::Shr, ScalarType::i(4), -4, 9), -1);
        assert_eq!(bin(BinaryOp::Shr, ScalarType::u(4), 8, 4), 0);
        assert_eq!(bin(BinaryOp::Shl, ScalarType::u(4), 3, 2), 12);
    }

    #[test]
    fn division_by_zero_reported() {
        assert_eq!(
            eval_binary(BinaryOp::Div, ScalarType::u(8), 1, 0),
            Err(DivideByZero)
        );
    }

    #[test]
    fn casts_wrap_mathematical_value() {
        let (u4, i4, u8_) = (ScalarType::u(4), ScalarType::i(4), ScalarType::u(8));
        assert_eq!(eval_cast(i4, u8_, i4.wrap_i128(-1)), 255);
        assert_eq!(eval_cast(u8_, i4, 0xF7), 7);
        assert_eq!(eval_cast(u8_, u4, 0x1F), 0xF);
        assert_eq!(eval_cast(u4, ScalarType::BOOL, 2), 1);
    }

    #[test]
    fn type_constructors_validate() {
        assert!(ScalarType::unsigned(0).is_err());
        assert!(ScalarType::unsigned(65).is_err());
        assert!(ScalarType::new(Kind::Bool, 2).is_err());
        assert!(ValueType::array(ScalarType::u(8), 0).is_err());
    }

    #[test]
    fn clog2_matches_definition() {
        assert_eq!(clog2(1), 1);
        assert_eq!(clog2(2), 1);
        assert_eq!(clog2(16), 4);
        assert_eq!(clog2(17), 5);
        assert_eq!(clog2(10), 4);
    }
}
