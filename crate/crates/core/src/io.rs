//! Field files and CSV rows.
//!
//! A field file is plain text: a header `rcn-field m n eps L k delta`
//! followed by `n + 1` rows of `m` values, row `j = 0` first. Values are
//! written with 17 significant digits so reading back is bit-exact.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use crate::energy::EnergyBreakdown;
use crate::error::{RcnError, Result};
use crate::grid::{BoundaryConfig, PhaseField, StripGrid};

const MAGIC: &str = "rcn-field";

pub fn write_field(field: &PhaseField, mut out: impl Write) -> Result<()> {
    let g = field.grid();
    let c = field.config();
    writeln!(
        out,
        "{MAGIC} {} {} {:.17e} {:.17e} {} {:.17e}",
        g.m(),
        g.n(),
        g.eps(),
        g.height(),
        c.k,
        c.delta
    )?;
    let mut line = String::new();
    for row in field.values().chunks(g.m()) {
        line.clear();
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                line.push(' ');
            }
            write!(line, "{v:.17e}").expect("writing to a String");
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub fn read_field(input: impl BufRead) -> Result<PhaseField> {
    let mut lines = input.lines().enumerate();
    let (_, header) = lines.next().ok_or(RcnError::Parse {
        line: 1,
        msg: "empty file".into(),
    })?;
    let header = header?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 7 || parts[0] != MAGIC {
        return Err(parse_err(1, format!("expected `{MAGIC} m n eps L k delta`")));
    }
    let m: usize = parse(parts[1], 1)?;
    let n: usize = parse(parts[2], 1)?;
    let eps: f64 = parse(parts[3], 1)?;
    let height: f64 = parse(parts[4], 1)?;
    let k: usize = parse(parts[5], 1)?;
    let delta: f64 = parse(parts[6], 1)?;
    let grid = StripGrid::new(eps, height, m, n)?;

    let mut values = Vec::with_capacity(grid.len());
    let mut rows = 0;
    for (ln, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        if rows == n + 1 {
            return Err(parse_err(ln + 1, "more rows than the header declares"));
        }
        let before = values.len();
        for tok in line.split_whitespace() {
            values.push(parse::<f64>(tok, ln + 1)?);
        }
        if values.len() - before != m {
            return Err(parse_err(
                ln + 1,
                format!("expected {m} values, found {}", values.len() - before),
            ));
        }
        rows += 1;
    }
    if rows != n + 1 {
        return Err(parse_err(0, format!("expected {} rows, found {rows}", n + 1)));
    }
    let field = PhaseField::from_values(grid, BoundaryConfig::new(k, delta), values)?;
    field.check_finite()?;
    Ok(field)
}

pub fn save_field(field: &PhaseField, path: &std::path::Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);
    write_field(field, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn load_field(path: &std::path::Path) -> Result<PhaseField> {
    let file = std::fs::File::open(path)?;
    read_field(std::io::BufReader::new(file))
}

fn parse<T: std::str::FromStr>(tok: &str, line: usize) -> Result<T> {
    tok.parse()
        .map_err(|_| parse_err(line, format!("cannot parse `{tok}`")))
}

fn parse_err(line: usize, msg: impl Into<String>) -> RcnError {
    RcnError::Parse { line, msg: msg.into() }
}

pub const ENERGY_HEADER: &str = "eps,a,delta,bending,strain,total";
pub const SWEEP_HEADER: &str = "eps,a,delta,bending,strain,total,converged,iters";
pub const PROBE_HEADER: &str = "eps,energy_bending,energy_strain,energy_total";

pub fn energy_row(eps: f64, a: f64, delta: f64, e: &EnergyBreakdown) -> String {
    format!(
        "{eps},{a},{delta:.12e},{:.12e},{:.12e},{:.12e}",
        e.bending, e.strain, e.total
    )
}

pub fn sweep_row(eps: f64, a: f64, delta: f64, e: &EnergyBreakdown, converged: bool, iters: usize) -> String {
    format!("{},{converged},{iters}", energy_row(eps, a, delta, e))
}

pub fn probe_row(eps: f64, e: &EnergyBreakdown) -> String {
    format!("{eps},{:.12e},{:.12e},{:.12e}", e.bending, e.strain, e.total)
}
