use fockcc::homotopy::{cc_degree, upper_bound_holds, variety_degree, SolveMethod, TrackerConfig};
use fockcc::truncation::{census, dimension, flag_levels, spinor_levels, LevelSet};
use serde_json::{json, Value};

use crate::Output;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Run {
    Always,
    Full,
    Never,
}

struct Column {
    label: String,
    d: usize,
    n: usize,
    dim: usize,
    degree: (usize, Run),
    ccdeg: (usize, Run),
}

struct Table {
    name: &'static str,
    sigma: LevelSet,
    columns: Vec<Column>,
}

fn col(label: String, d: usize, n: usize, dim: usize, degree: (usize, Run), ccdeg: (usize, Run)) -> Column {
    Column { label, d, n, dim, degree, ccdeg }
}

fn tables() -> Vec<Table> {
    use Run::*;
    let flag = [
        (2, 4, 8, (12, Always), (74, Always)),
        (2, 5, 11, (110, Full), (713, Full)),
        (2, 6, 14, (1274, Never), (8499, Never)),
        (3, 6, 15, (4550, Never), (30070, Never)),
        (2, 7, 17, (17136, Never), (116602, Never)),
        (3, 7, 19, (271320, Never), (1821528, Never)),
    ];
    let spinor = [
        (2, 4, 6, (2, Always), (13, Always)),
        (2, 5, 10, (12, Always), (98, Always)),
        (3, 6, 15, (286, Full), (2572, Never)),
        (3, 7, 21, (33592, Never), (318118, Never)),
    ];
    vec![
        Table {
            name: "flag",
            sigma: flag_levels(),
            columns: flag.iter().map(|&(d, n, dim, g, c)| col(format!("({d},{n})"), d, n, dim, g, c)).collect(),
        },
        Table {
            name: "spinor",
            sigma: spinor_levels(),
            columns: spinor.iter().map(|&(d, n, dim, g, c)| col(format!("n={n}"), d, n, dim, g, c)).collect(),
        },
    ]
}

struct Report {
    cells: Vec<Value>,
    text: String,
    failures: usize,
}

impl Report {
    fn check(&mut self, cell: String, expected: usize, got: Option<usize>) {
        let status = match got {
            Some(g) if g == expected => "PASS",
            _ => {
                self.failures += 1;
                "FAIL"
            }
        };
        let shown = got.map_or("none".to_string(), |g| g.to_string());
        self.text.push_str(&format!("{status} {cell}: expected {expected}, got {shown}\n"));
        self.cells.push(json!({"cell": cell, "status": status, "expected": expected, "got": got}));
    }

    fn skip(&mut self, cell: String, reason: &str) {
        self.text.push_str(&format!("SKIP {cell}: skipped ({reason})\n"));
        self.cells.push(json!({"cell": cell, "status": "SKIP", "reason": reason}));
    }

    fn error(&mut self, cell: String, e: fockcc::FockError) {
        self.failures += 1;
        self.text.push_str(&format!("FAIL {cell}: {e}\n"));
        self.cells.push(json!({"cell": cell, "status": "FAIL", "error": e.to_string()}));
    }
}

pub fn verify(full: bool, seeds: &[u64]) -> Output {
    let mut rep = Report { cells: Vec::new(), text: String::new(), failures: 0 };
    for (d, n, sets, linear, hyp) in [(2, 4, 254, 119, 74), (3, 6, 32766, 4790, 2186)] {
        let c = census(d, n);
        rep.check(format!("census ({d},{n}) level sets"), sets, Some(c.level_sets));
        rep.check(format!("census ({d},{n}) linear"), linear, Some(c.linear));
        rep.check(format!("census ({d},{n}) hypothesis"), hyp, Some(c.hypothesis));
    }
    let cfg = TrackerConfig::default();
    let enabled = |r: Run| r == Run::Always || (full && r == Run::Full);
    for t in tables() {
        for c in &t.columns {
            let name = format!("{} {}", t.name, c.label);
            rep.check(format!("{name} dim"), c.dim, Some(dimension(&t.sigma, c.d, c.n)));
            let mut degree = None;
            if enabled(c.degree.1) {
                let mut counts = Vec::new();
                for seed in [1, 2] {
                    match variety_degree(c.d, c.n, &t.sigma, &cfg, seed, SolveMethod::Auto) {
                        Ok(r) => counts.push(r.degree),
                        Err(e) => rep.error(format!("{name} degree"), e),
                    }
                }
                if counts.len() == 2 {
                    degree = (counts[0] == counts[1]).then_some(counts[0]);
                    rep.check(format!("{name} degree"), c.degree.0, degree);
                }
            } else {
                rep.skip(format!("{name} degree"), if c.degree.1 == Run::Full { "scale, use --full" } else { "scale" });
            }
            if enabled(c.ccdeg.1) {
                match cc_degree(c.d, c.n, &t.sigma, &cfg, seeds, SolveMethod::Auto) {
                    Ok(r) => {
                        rep.check(format!("{name} ccdeg"), c.ccdeg.0, r.ccdeg);
                        if let (Some(cc), Some(deg)) = (r.ccdeg, degree) {
                            let holds = upper_bound_holds(cc, c.dim, deg);
                            rep.check(format!("{name} upper bound (dim+1)*degree = {}", (c.dim + 1) * deg), 1, Some(holds as usize));
                        }
                    }
                    Err(e) => rep.error(format!("{name} ccdeg"), e),
                }
            } else {
                rep.skip(format!("{name} ccdeg"), if c.ccdeg.1 == Run::Full { "scale, use --full" } else { "scale" });
            }
        }
        rep.skip(format!("{} mingens row", t.name), "symbolic");
        rep.skip(format!("{} # real row", t.name), "varies with the Hamiltonian");
        rep.skip(format!("{} certify row", t.name), "certification out of scope");
    }
    let summary = format!("{} cells failed\n", rep.failures);
    rep.text.push_str(&summary);
    let ok = rep.failures == 0;
    Output { json: json!({"seeds": seeds, "full": full, "failures": rep.failures, "cells": rep.cells}), text: rep.text, csv: None, ok }
}
