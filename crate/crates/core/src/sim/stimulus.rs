//! Host drivers for networks that have no example-specific driver.

use crate::model::FieldRef;
use crate::trace::Trace;

use super::{driver, Driver, HostIo, Step};

fn owned(io: &HostIo<'_>) -> Vec<FieldRef> {
    io.network().process(io.process()).owned_fields().collect()
}

/// Writes every field the host owns with its initial value, or zero when
/// the field has none, in every cycle. Never finishes.
pub fn constant_driver<'a>() -> Box<dyn Driver + 'a> {
    driver(|io: &mut HostIo<'_>| {
        for f in owned(io) {
            let v = io.network().field_spec(f).initial.map_or(0, |v| v.bits);
            io.set(f, v)?;
        }
        Ok(Step::Continue)
    })
}

/// Replays the host's fields from a recorded trace, so that each one shows
/// the recorded value in the recorded cycle. A field on a clocked bus is
/// therefore written one cycle early. Undefined cells and cycles past the
/// end of the trace leave fields unwritten. Never finishes.
pub fn replay_driver<'a>(stimulus: Trace) -> Box<dyn Driver + 'a> {
    let mut columns: Option<Vec<(FieldRef, usize, usize)>> = None;
    driver(move |io: &mut HostIo<'_>| {
        if columns.is_none() {
            let mut cols = Vec::new();
            for f in owned(io) {
                let name = io.network().field_name(f);
                let Some(c) = stimulus.column_index(&name) else {
                    return Err(io.fail(format!("stimulus has no column `{name}`")));
                };
                let lead = io.network().bus(f.bus).clocked() as usize;
                cols.push((f, c, lead));
            }
            columns = Some(cols);
        }
        let cycle = io.cycle() as usize;
        for &(f, c, lead) in columns.as_ref().expect("resolved above") {
            if let Some(Some(v)) = stimulus.rows.get(cycle + lead).map(|r| r[c]) {
                io.set(f, v)?;
            }
        }
        Ok(Step::Continue)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{build_counter, counter_driver, HOST};
    use crate::sim::{run_simulation, SimConfig};

    #[test]
    fn replaying_a_trace_reproduces_it() {
        let net = build_counter(2, 4).unwrap();
        let host = net.process_by_name(HOST).unwrap();
        let recorded = run_simulation(&net, SimConfig::cycles(15), [(host, counter_driver(true))])
            .unwrap()
            .trace
            .unwrap();
        let replayed = run_simulation(
            &net,
            SimConfig::cycles(15),
            [(host, replay_driver(recorded.clone()))],
        )
        .unwrap()
        .trace
        .unwrap();
        assert_eq!(recorded.to_csv_string(), replayed.to_csv_string());
    }

    #[test]
    fn constant_driver_writes_initial_values() {
        let net = build_counter(2, 4).unwrap();
        let host = net.process_by_name(HOST).unwrap();
        let t = run_simulation(&net, SimConfig::cycles(4), [(host, constant_driver())])
            .unwrap()
            .trace
            .unwrap();
        let active: Vec<_> = t.column("Control.active").unwrap().collect();
        assert_eq!(active, vec![Some(0); 4]);
    }

    #[test]
    fn missing_columns_are_reported() {
        let net = build_counter(2, 4).unwrap();
        let host = net.process_by_name(HOST).unwrap();
        let err = run_simulation(
            &net,
            SimConfig::cycles(2),
            [(host, replay_driver(Trace::new(vec![])))],
        )
        .unwrap_err();
        assert!(err.to_string().contains("Control.active"), "{err}");
    }
}
