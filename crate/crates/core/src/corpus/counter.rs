//! Counter that increments a visible value every `n` active cycles.

use std::sync::Arc;

use crate::error::ModelError;
use crate::ir::{Expr, Stmt};
use crate::model::{declare_bus_shape, BusShape, FieldSpec, Network, ProcessDef};
use crate::sim::{driver, Driver, HostIo, SimConfig, SimError, SimReport, Simulator, Step};
use crate::types::{bits_for, ScalarType};

use super::HOST;

pub struct CounterShapes {
    pub control: Arc<BusShape>,
    pub leds: Arc<BusShape>,
}

pub fn counter_shapes(width: u8) -> Result<CounterShapes, ModelError> {
    Ok(CounterShapes {
        control: declare_bus_shape(
            "Control",
            vec![FieldSpec::new("active", ScalarType::BOOL)],
            true,
            true,
        )?,
        leds: declare_bus_shape(
            "LEDs",
            vec![FieldSpec::new("value", ScalarType::unsigned(width)?)],
            true,
            true,
        )?,
    })
}

pub fn counter_process(
    n: u64,
    width: u8,
    shapes: &CounterShapes,
) -> Result<ProcessDef, ModelError> {
    if n == 0 {
        return Err(ModelError::Body {
            process: "Counter".into(),
            message: "period must be at least 1".into(),
        });
    }
    let cty = ScalarType::u(bits_for(n - 1));
    let vty = ScalarType::unsigned(width)?;
    Ok(ProcessDef::new("Counter", true)
        .input("control", &shapes.control)
        .output("leds", &shapes.leds)
        .var("count", cty, None)
        .var("value", vty, None)
        .body(vec![Stmt::when(
            Expr::field("control", "active"),
            vec![Stmt::if_else(
                Expr::var("count").eq(Expr::lit(cty, (n - 1) as i128)),
                vec![
                    Stmt::set("count", Expr::lit(cty, 0)),
                    Stmt::set("value", Expr::var("value").add(Expr::lit(vty, 1))),
                    Stmt::write("leds", "value", Expr::var("value")),
                ],
                vec![Stmt::set(
                    "count",
                    Expr::var("count").add(Expr::lit(cty, 1)),
                )],
            )],
        )]))
}

/// The counter with a host process driving `Control` and observing `LEDs`.
pub fn build_counter(n: u64, width: u8) -> Result<Network, ModelError> {
    let shapes = counter_shapes(width)?;
    let mut net = Network::new("counter");
    let control = net.instantiate_bus_named(&shapes.control, "Control");
    let leds = net.instantiate_bus_named(&shapes.leds, "LEDs");
    net.add_process(counter_process(n, width, &shapes)?, &[control], &[leds])?;
    let host = ProcessDef::simulation(HOST)
        .output("control", &shapes.control)
        .input("leds", &shapes.leds);
    net.add_process(host, &[leds], &[control])?;
    Ok(net)
}

/// Holds `Control.active` at `active` forever.
pub fn counter_driver<'a>(active: bool) -> Box<dyn Driver + 'a> {
    driver(move |io: &mut HostIo<'_>| {
        io.put("control.active", active as u64)?;
        Ok(Step::Continue)
    })
}

pub fn run_counter(
    n: u64,
    width: u8,
    active: bool,
    cycles: u64,
    parallel: bool,
) -> Result<SimReport, SimError> {
    let net = build_counter(n, width).map_err(|e| SimError::InvalidNetwork(vec![e.to_string()]))?;
    let host = net.process_by_name(HOST).expect("counter host");
    let report = Simulator::new(
        &net,
        SimConfig::cycles(cycles),
        [(host, counter_driver(active))],
    )?
    .parallel(parallel)
    .run()?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn values(n: u64, width: u8, active: bool, cycles: u64) -> Vec<u64> {
        let r = run_counter(n, width, active, cycles, false).unwrap();
        r.trace
            .unwrap()
            .column("LEDs.value")
            .unwrap()
            .map(|c| c.unwrap())
            .collect()
    }

    #[test]
    fn period_two_hand_stepped() {
        assert_eq!(values(2, 4, true, 6), vec![0, 0, 0, 1, 1, 2]);
    }

    #[test]
    fn inactive_stays_zero() {
        assert!(values(3, 4, false, 50).iter().all(|&v| v == 0));
    }

    #[test]
    fn wraps_after_sixteen_increments() {
        let v = values(1, 4, true, 20);
        // one increment per cycle from cycle 2 on
        assert_eq!(v[17], 0);
        assert_eq!(v[18], 1);
    }

    #[test]
    fn zero_period_rejected() {
        assert!(build_counter(0, 4).is_err());
    }
}
