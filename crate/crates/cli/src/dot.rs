//! Graphviz output for Hasse diagrams.

use std::fmt::Write;

use fsemilattice::algebra::FSemilattice;

fn quote(label: &str) -> String {
    format!("\"{}\"", label.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Cover edges drawn bottom to top; with `actions`, one dashed arc per
/// generator and non-fixed element.
pub fn hasse(a: &FSemilattice, actions: bool) -> String {
    let mut s = String::from("digraph hasse {\n  rankdir=BT;\n  node [shape=plaintext];\n");
    for x in 0..a.size() {
        let _ = writeln!(s, "  n{x} [label={}];", quote(a.label(x)));
    }
    for (lo, hi) in a.cover_edges() {
        let _ = writeln!(s, "  n{lo} -> n{hi};");
    }
    if actions {
        for i in 0..a.generator_count() {
            for x in 0..a.size() {
                let y = a.apply_generator(i, x);
                if y != x {
                    let _ = writeln!(
                        s,
                        "  n{x} -> n{y} [style=dashed, constraint=false, label=\"g{i}\"];"
                    );
                }
            }
        }
    }
    s.push('}');
    s
}
