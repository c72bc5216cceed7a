//! Canonical `.neg` source for a diagram.

use std::fmt::Write;

use crate::diagram::{Diagram, RawDiagram};
use crate::rational::format_rational;

pub fn render(d: &Diagram) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "negotiation {} {{", d.name);
    let _ = writeln!(s, "  processes {};", d.processes.join(" "));
    s.push('\n');
    for n in d.node_ids() {
        let node = d.node(n);
        let domain: Vec<&str> = node.domain.iter().map(|p| d.process_name(p)).collect();
        let role = if n == d.init {
            " init"
        } else if n == d.fin {
            " final"
        } else {
            ""
        };
        let _ = writeln!(s, "  node {} [{}]{};", node.name, domain.join(" "), role);
    }
    s.push('\n');
    for loc in d.locations() {
        let t = d.transition(loc).expect("listed location exists");
        let _ = write!(s, "  outcome {}", d.location_name(loc));
        if let Some(p) = &t.annotations.prob {
            let _ = write!(s, " prob={}", format_rational(p));
        }
        if let Some(c) = &t.annotations.cost {
            let _ = write!(s, " cost={}", format_rational(c));
        }
        for (p, v) in &t.annotations.time {
            let _ = write!(s, " time({})={}", d.process_name(*p), format_rational(v));
        }
        s.push_str(" {");
        for (p, targets) in &t.moves {
            let names: Vec<&str> = targets.iter().map(|n| d.node_name(*n)).collect();
            let _ = write!(s, " {} -> {};", d.process_name(*p), names.join(", "));
        }
        s.push_str(" }\n");
    }
    for block in &d.analyses {
        let _ = writeln!(s, "\n  analysis {} {{", block.name);
        for (k, v) in &block.entries {
            let _ = writeln!(s, "    {k}={v}");
        }
        s.push_str("  }\n");
    }
    s.push_str("}\n");
    s
}

fn normalized(d: &Diagram) -> RawDiagram {
    let mut raw = d.to_raw();
    raw.outcome_order.clear();
    raw.outcomes.sort_by(|a, b| (&a.node, &a.outcome).cmp(&(&b.node, &b.outcome)));
    raw
}

/// Equality by names, ignoring how outcome names were numbered.
pub fn structurally_equal(a: &Diagram, b: &Diagram) -> bool {
    normalized(a) == normalized(b)
}
