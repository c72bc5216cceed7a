//! The bundled example diagrams.

use crate::diagram::Diagram;
use crate::io::parse::parse;

pub const FIG1_SOURCE: &str = include_str!("../fixtures/fig1.neg");
pub const FIG1_ACYCLIC_SOURCE: &str = include_str!("../fixtures/fig1_acyclic.neg");
pub const FIG2_SOURCE: &str = include_str!("../fixtures/fig2.neg");
pub const FIG4_SOURCE: &str = include_str!("../fixtures/fig4.neg");

fn load(source: &str) -> Diagram {
    parse(source).expect("bundled fixture parses")
}

pub fn fig1() -> Diagram {
    load(FIG1_SOURCE)
}

pub fn fig1_acyclic() -> Diagram {
    load(FIG1_ACYCLIC_SOURCE)
}

pub fn fig2() -> Diagram {
    load(FIG2_SOURCE)
}

pub fn fig4() -> Diagram {
    load(FIG4_SOURCE)
}

pub fn all() -> Vec<Diagram> {
    vec![fig1(), fig1_acyclic(), fig2(), fig4()]
}
