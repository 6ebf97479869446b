//! Plain-text dump of a conic problem.
//!
//! ```text
//! sense maximize
//! block W_b 5
//! block W_c1 5
//! objective offset 0
//! coef W_b
//! 1 0 0.5 -0.25 ...        one line per matrix row, re/im pairs
//! constraint sinr >= 1
//! coef W_b
//! ...
//! end
//! ```

use alloc::string::String;
use core::fmt::Write;

use super::{ConicProblem, Sense};
use crate::cxmat::HermitianMatrix;

fn write_matrix(out: &mut String, name: &str, m: &HermitianMatrix) {
    let _ = writeln!(out, "coef {name}");
    for i in 0..m.dim() {
        let mut first = true;
        for j in 0..m.dim() {
            let z = m.get(i, j);
            if !first {
                out.push(' ');
            }
            first = false;
            let _ = write!(out, "{:e} {:e}", z.re, z.im);
        }
        out.push('\n');
    }
}

pub fn dump_problem(p: &ConicProblem) -> String {
    let mut out = String::new();
    let sense = match p.sense {
        Sense::Maximize => "maximize",
        Sense::Minimize => "minimize",
        Sense::Feasibility => "feasibility",
    };
    let _ = writeln!(out, "sense {sense}");
    for b in &p.blocks {
        let _ = writeln!(out, "block {} {}", b.name, b.dim);
    }
    let _ = writeln!(out, "objective offset {:e}", p.objective_offset);
    for (k, c) in &p.objective {
        write_matrix(&mut out, &p.blocks[*k].name, c);
    }
    for c in &p.constraints {
        let label = if c.label.is_empty() { "-" } else { c.label.as_str() };
        let _ = writeln!(out, "constraint {} {} {:e}", label, c.relation.symbol(), c.bound);
        for (k, a) in &c.terms {
            write_matrix(&mut out, &p.blocks[*k].name, a);
        }
    }
    out.push_str("end\n");
    out
}
