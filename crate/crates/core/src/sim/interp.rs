//! Tree-walking interpreter for elaborated process bodies.

use crate::elab::{CExpr, CStmt, CompiledBody};
use crate::types::{eval_binary, eval_cast, eval_unary};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum ExecError {
    /// Global field slot that was read while undefined.
    UndefinedRead(usize),
    DivideByZero,
    Assertion(u32),
    OutOfBounds,
}

/// Read-only view of the bus fields for the current wave.
pub(crate) struct Visible<'a> {
    pub current: &'a [u64],
    pub defined: &'a [bool],
    pub strict: bool,
}

pub(crate) struct Frame<'a> {
    pub store: &'a mut [u64],
    /// First global slot of each bound input / output bus.
    pub in_base: &'a [u32],
    pub out_base: &'a [u32],
    /// `(global slot, bits)` in program order.
    pub writes: &'a mut Vec<(u32, u64)>,
    /// Undefined slots read in lenient mode.
    pub lenient_reads: &'a mut Vec<usize>,
}

pub(crate) fn run(
    body: &CompiledBody,
    vis: &Visible<'_>,
    frame: &mut Frame<'_>,
) -> Result<(), ExecError> {
    exec_block(&body.stmts, vis, frame)
}

fn exec_block(stmts: &[CStmt], vis: &Visible<'_>, f: &mut Frame<'_>) -> Result<(), ExecError> {
    for s in stmts {
        match s {
            CStmt::SetVar { slot, value } => {
                let v = eval(value, vis, f)?;
                f.store[*slot as usize] = v;
            }
            CStmt::SetElem {
                base,
                len,
                index,
                value,
            } => {
                let i = eval(index, vis, f)?;
                if i >= *len as u64 {
                    return Err(ExecError::OutOfBounds);
                }
                let v = eval(value, vis, f)?;
                f.store[(*base as u64 + i) as usize] = v;
            }
            CStmt::SetField { port, field, value } => {
                let v = eval(value, vis, f)?;
                let slot = f.out_base[*port as usize] + *field;
                f.writes.push((slot, v));
            }
            CStmt::If {
                cond,
                then_branch,
                else_branch,
            } => {
                if eval(cond, vis, f)? != 0 {
                    exec_block(then_branch, vis, f)?;
                } else {
                    exec_block(else_branch, vis, f)?;
                }
            }
            CStmt::For {
                slot,
                start,
                end,
                body,
            } => {
                for i in *start..*end {
                    f.store[*slot as usize] = i;
                    exec_block(body, vis, f)?;
                }
            }
            CStmt::Assert { cond, message } => {
                if eval(cond, vis, f)? == 0 {
                    return Err(ExecError::Assertion(*message));
                }
            }
        }
    }
    Ok(())
}

fn eval(e: &CExpr, vis: &Visible<'_>, f: &mut Frame<'_>) -> Result<u64, ExecError> {
    Ok(match e {
        CExpr::Const(v) => *v,
        CExpr::Var(slot) => f.store[*slot as usize],
        CExpr::Elem { base, len, index } => {
            let i = eval(index, vis, f)?;
            if i >= *len as u64 {
                return Err(ExecError::OutOfBounds);
            }
            f.store[(*base as u64 + i) as usize]
        }
        CExpr::Field { port, field } => {
            let slot = (f.in_base[*port as usize] + *field) as usize;
            if !vis.defined[slot] {
                if vis.strict {
                    return Err(ExecError::UndefinedRead(slot));
                }
                f.lenient_reads.push(slot);
                return Ok(0);
            }
            vis.current[slot]
        }
        CExpr::Unary { op, ty, a } => eval_unary(*op, *ty, eval(a, vis, f)?),
        CExpr::Binary { op, ty, a, b } => {
            let x = eval(a, vis, f)?;
            // Short-circuit keeps guarded reads of undefined fields legal.
            match op {
                crate::types::BinaryOp::And if x == 0 => return Ok(0),
                crate::types::BinaryOp::Or if x != 0 => return Ok(1),
                _ => {}
            }
            let y = eval(b, vis, f)?;
            eval_binary(*op, *ty, x, y).map_err(|_| ExecError::DivideByZero)?
        }
        CExpr::Cast { from, to, a } => eval_cast(*from, *to, eval(a, vis, f)?),
    })
}
