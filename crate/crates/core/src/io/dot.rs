//! Graphviz export. Nodes are records with one port per process; every move
//! of an outcome is an edge from the process port to the successor's port,
//! labelled with the outcome. Output depends only on ids, so it is stable.

use std::fmt::Write;

use crate::diagram::Diagram;

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

pub fn emit_dot(d: &Diagram) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "digraph {} {{", quote(&d.name));
    s.push_str("  rankdir=LR;\n  node [shape=record, fontname=\"Helvetica\"];\n  edge [fontname=\"Helvetica\"];\n");
    for n in d.node_ids() {
        let node = d.node(n);
        let ports: Vec<String> = node.domain.iter().map(|p| format!("<{0}> {0}", d.process_name(p))).collect();
        let style = if n == d.init {
            ", style=bold"
        } else if n == d.fin {
            ", style=\"bold,dashed\""
        } else {
            ""
        };
        let _ = writeln!(s, "  {} [label=\"{{{}|{{{}}}}}\"{}];", quote(&node.name), node.name, ports.join("|"), style);
    }
    for loc in d.locations() {
        let t = d.transition(loc).expect("listed location exists");
        for (p, targets) in &t.moves {
            for m in targets {
                let pname = d.process_name(*p);
                let _ = writeln!(
                    s,
                    "  {}:{} -> {}:{} [label={}];",
                    quote(d.node_name(loc.node)),
                    quote(pname),
                    quote(d.node_name(*m)),
                    quote(pname),
                    quote(d.outcome_name(loc.outcome))
                );
            }
        }
    }
    s.push_str("}\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decompose::subnegotiation_of_node;
    use crate::fixtures;

    #[test]
    fn one_box_per_node_and_stable() {
        let d = fixtures::fig2();
        let dot = emit_dot(&d);
        assert_eq!(dot.matches("[label=\"{").count(), 9);
        assert_eq!(dot, emit_dot(&fixtures::fig2()));
        assert!(dot.contains("\"n3\":\"p2\" -> \"n5\":\"p2\" [label=\"b\"];"));
    }

    #[test]
    fn subnegotiation_of_n3() {
        let d = fixtures::fig2();
        let sub = subnegotiation_of_node(&d, d.find_node("n3").unwrap(), 100_000).unwrap();
        assert_eq!(emit_dot(&sub.diagram).matches("[label=\"{").count(), 3);
    }
}
