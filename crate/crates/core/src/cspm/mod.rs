//! CSP_M export: a clocked process model of the network with assertions
//! that each channel only carries the values observed in simulation.
//!
//! Process bodies are abstracted to the observed value set of each field
//! they drive: every cycle a process offers one value per owned channel,
//! chosen internally, and then synchronises on `tock`.

pub mod syntax;

use std::collections::{BTreeSet, HashSet};
use std::fmt::Write;

use thiserror::Error;

use crate::model::Network;
use crate::trace::Trace;
use crate::types::{Kind, ScalarType};

/// Observed value sets larger than this are replaced by their interval.
pub const VALUE_SET_CAP: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObservedRange {
    pub column: String,
    pub min: i128,
    pub max: i128,
    /// Distinct values, or `None` when there were more than the cap.
    pub values: Option<BTreeSet<i128>>,
    /// Width of the zero-based range `0..=max - min`.
    pub bits: u32,
}

impl ObservedRange {
    pub fn from_values(column: &str, values: impl IntoIterator<Item = i128>) -> Option<Self> {
        let mut set = BTreeSet::new();
        let mut capped = false;
        let (mut min, mut max) = (i128::MAX, i128::MIN);
        for v in values {
            min = min.min(v);
            max = max.max(v);
            if !capped {
                set.insert(v);
                if set.len() > VALUE_SET_CAP {
                    capped = true;
                    set.clear();
                }
            }
        }
        if min > max {
            return None;
        }
        Some(ObservedRange {
            column: column.to_string(),
            min,
            max,
            values: (!capped).then_some(set),
            bits: range_bits(min, max),
        })
    }
}

/// Bits needed for `max - min + 1` distinct values, at least one.
pub fn range_bits(min: i128, max: i128) -> u32 {
    let span = (max - min) as u128 + 1;
    let bits = 128 - (span - 1).leading_zeros();
    bits.max(1)
}

/// One range per column with at least one defined value. Columns that are
/// `U` throughout are skipped with a warning.
pub fn collect_observed_ranges(trace: &Trace) -> (Vec<ObservedRange>, Vec<String>) {
    let mut ranges = Vec::new();
    let mut warnings = Vec::new();
    for (i, name) in trace.columns.iter().enumerate() {
        let ty = trace.types.get(i).copied().flatten();
        let signed = ty.filter(|t| t.kind == Kind::Signed);
        let values = trace
            .rows
            .iter()
            .filter_map(|r| r[i])
            .map(|bits| match signed {
                Some(t) => t.to_i128(bits),
                None => bits as i128,
            });
        match ObservedRange::from_values(name, values) {
            Some(r) => ranges.push(r),
            None => warnings.push(format!(
                "column `{name}` is never defined; no range collected"
            )),
        }
    }
    (ranges, warnings)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CspmError {
    #[error("the clock must run for at least one cycle")]
    NoCycles,
    #[error("no observed range for connected field `{0}`")]
    MissingRange(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmittedCspm {
    pub text: String,
    pub channels: Vec<String>,
    pub assertions: usize,
    pub warnings: Vec<String>,
}

fn ident(raw: &str) -> String {
    let mut out: String = raw
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect();
    if !out.starts_with(|c: char| c.is_ascii_alphabetic()) {
        out.insert(0, 'x');
    }
    out
}

struct Names(HashSet<String>);

impl Names {
    /// A name that is free together with its `prefixes` variants.
    fn fresh(&mut self, base: String, prefixes: &[&str]) -> String {
        let mut n = 1;
        loop {
            let c = if n == 1 {
                base.clone()
            } else {
                format!("{base}_{n}")
            };
            let all: Vec<String> = std::iter::once(c.clone())
                .chain(prefixes.iter().map(|p| format!("{p}{c}")))
                .collect();
            if all.iter().all(|x| !self.0.contains(x)) {
                self.0.extend(all);
                return c;
            }
            n += 1;
        }
    }
}

fn set_text(r: &ObservedRange) -> String {
    match &r.values {
        Some(vs) => {
            let items: Vec<String> = vs.iter().map(|v| (v - r.min).to_string()).collect();
            format!("{{{}}}", items.join(", "))
        }
        None => format!("{{0..{}}}", r.max - r.min),
    }
}

fn kind_note(ty: ScalarType) -> &'static str {
    match ty.kind {
        Kind::Bool => "bool",
        Kind::Unsigned => "unsigned",
        Kind::Signed => "signed",
    }
}

/// Emits the model. Channels are the fields driven by synthesizable
/// processes that at least one process reads; host-driven inputs are left
/// out of the model.
pub fn emit_cspm(
    net: &Network,
    ranges: &[ObservedRange],
    cycles: u64,
) -> Result<EmittedCspm, CspmError> {
    if cycles == 0 {
        return Err(CspmError::NoCycles);
    }
    struct Chan<'a> {
        name: String,
        range: &'a ObservedRange,
        ty: ScalarType,
    }
    let mut names = Names(HashSet::new());
    for fixed in ["tock", "CYCLES", "CLOCK", "SYSTEM"] {
        names.0.insert(fixed.to_string());
    }
    let mut chans = Vec::new();
    let mut owned: Vec<Vec<usize>> = vec![Vec::new(); net.processes.len()];
    for f in net.fields() {
        let Some(owner) = net.owner(f) else { continue };
        if net.process(owner).ignore() || net.bus(f.bus).readers.is_empty() {
            continue;
        }
        let column = net.field_name(f);
        let range = ranges
            .iter()
            .find(|r| r.column == column)
            .ok_or_else(|| CspmError::MissingRange(column.clone()))?;
        owned[owner.0].push(chans.len());
        chans.push(Chan {
            name: names.fresh(ident(&column.replace('.', "_")), &["T_", "OBS_", "SPEC_"]),
            range,
            ty: net.field_spec(f).ty,
        });
    }
    let procs: Vec<(usize, String)> = net
        .processes
        .iter()
        .filter(|p| !p.ignore())
        .map(|p| (p.id.0, names.fresh(format!("P_{}", ident(&p.name)), &[])))
        .collect();

    let mut warnings = Vec::new();
    if chans.is_empty() {
        warnings.push(format!(
            "network `{}` has no connected fields driven by the design; the model is the clock alone",
            net.name
        ));
    }

    let mut s = String::new();
    let _ = writeln!(s, "-- CSP_M model of network {}", net.name);
    let _ = writeln!(
        s,
        "-- The clock runs for {cycles} cycles. Channel value sets were observed in"
    );
    s.push_str("-- simulation; a longer simulation may observe more values.\n\n");
    s.push_str("channel tock\n\n");
    for c in &chans {
        let r = c.range;
        let shift = if r.min != 0 {
            format!(", shifted by {}", -r.min)
        } else {
            String::new()
        };
        let capped = if r.values.is_none() {
            ", value set capped"
        } else {
            ""
        };
        let _ = writeln!(
            s,
            "-- {}: {} {}..{}, {} bits{shift}{capped}",
            r.column,
            kind_note(c.ty),
            r.min,
            r.max,
            r.bits
        );
        let _ = writeln!(s, "nametype T_{} = {{0..{}}}", c.name, r.max - r.min);
        let _ = writeln!(s, "channel {} : T_{}", c.name, c.name);
        let _ = writeln!(s, "OBS_{} = {}\n", c.name, set_text(r));
    }
    let _ = writeln!(s, "CYCLES = {cycles}\n");
    s.push_str("CLOCK(n) = if n == 0 then SKIP else tock -> CLOCK(n - 1)\n\n");
    for (pid, pname) in &procs {
        let mut step = String::new();
        for &ci in &owned[*pid] {
            let c = &chans[ci];
            let _ = write!(step, "(|~| v : OBS_{0} @ {0}!v -> SKIP) ; ", c.name);
        }
        let _ = writeln!(s, "-- Process {}", net.processes[*pid].name);
        let _ = writeln!(
            s,
            "{pname}(n) =\n  if n == 0 then SKIP\n  else ({step}tock -> {pname}(n - 1))\n"
        );
    }
    let mut system = "CLOCK(CYCLES)".to_string();
    for (_, pname) in procs.iter().rev() {
        system = if system == "CLOCK(CYCLES)" {
            format!("{pname}(CYCLES) [| {{tock}} |] CLOCK(CYCLES)")
        } else {
            format!("{pname}(CYCLES) [| {{tock}} |] ({system})")
        };
    }
    let _ = writeln!(s, "SYSTEM = {system}\n");
    for c in &chans {
        let _ = writeln!(
            s,
            "SPEC_{0} = ({0}?x:OBS_{0} -> SPEC_{0}) [] SKIP\nassert SPEC_{0} [T= SYSTEM \\ diff(Events, {{|{0}|}})\n",
            c.name
        );
    }
    while s.ends_with("\n\n") {
        s.pop();
    }
    Ok(EmittedCspm {
        text: s,
        channels: chans.iter().map(|c| c.name.clone()).collect(),
        assertions: chans.len(),
        warnings,
    })
}

#[cfg(test)]
mod tests;
