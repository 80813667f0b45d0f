//! Sparse SDPA (`.dat-s`) export of the semidefinite form of the model.
//!
//! Variables, in order:
//! 1. `Z1` upper triangle (row-major, `i <= j`)
//! 2. `Z2` upper triangle
//! 3. `Q` all `n^2` entries
//! 4. `W` all `n^2` entries
//!
//! Block 1 is the PSD matrix `[[Z1, Q], [Q^T, Z2]]` of size `2n`. Block 2 is a
//! diagonal (LP) block holding, in order: the `W_ij >= |A_ij - Q_ij|` pairs,
//! the sum row (only when `eta > 0`), then `Q_ij >= 0` and `-Q_ij >= -1`.
//! The objective minimizes `(tr Z1 + tr Z2)/2 + lambda sum W`, expressed in
//! SDPA's dual form as `min c^T x` subject to `sum_k F_k x_k - F_0 >= 0`.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::graph::AdjacencyMatrix;

/// One nonzero of a constraint matrix `F_k` (1-based, `i <= j`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdpaEntry {
    pub matrix: usize,
    pub block: usize,
    pub i: usize,
    pub j: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdpaProblem {
    /// Number of primal variables `m`.
    pub m: usize,
    /// Block sizes; negative for diagonal blocks.
    pub blocks: Vec<i64>,
    pub c: Vec<f64>,
    pub entries: Vec<SdpaEntry>,
}

impl SdpaProblem {
    /// Checks indices against the declared structure.
    pub fn validate(&self) -> Result<()> {
        if self.c.len() != self.m {
            return Err(Error::input(format!(
                "cost vector has {} entries, expected {}",
                self.c.len(),
                self.m
            )));
        }
        if self.blocks.contains(&0) {
            return Err(Error::input("zero block size"));
        }
        for (k, e) in self.entries.iter().enumerate() {
            let at = || format!("entry {}", k + 1);
            if e.matrix > self.m {
                return Err(Error::input(format!(
                    "{}: matrix {} > m = {}",
                    at(),
                    e.matrix,
                    self.m
                )));
            }
            let Some(&size) = e.block.checked_sub(1).and_then(|b| self.blocks.get(b)) else {
                return Err(Error::input(format!("{}: no block {}", at(), e.block)));
            };
            let dim = size.unsigned_abs() as usize;
            if e.i == 0 || e.j == 0 || e.i > dim || e.j > dim {
                return Err(Error::input(format!(
                    "{}: index ({}, {}) outside block of size {dim}",
                    at(),
                    e.i,
                    e.j
                )));
            }
            if e.i > e.j {
                return Err(Error::input(format!(
                    "{}: lower-triangle index ({}, {})",
                    at(),
                    e.i,
                    e.j
                )));
            }
            if size < 0 && e.i != e.j {
                return Err(Error::input(format!(
                    "{}: off-diagonal entry in diagonal block",
                    at()
                )));
            }
            if !e.value.is_finite() {
                return Err(Error::input(format!("{}: non-finite value", at())));
            }
        }
        Ok(())
    }

    pub fn to_text(&self, comment: &str) -> String {
        let mut out = String::new();
        for line in comment.lines() {
            let _ = writeln!(out, "\"{line}");
        }
        let _ = writeln!(out, "{}", self.m);
        let _ = writeln!(out, "{}", self.blocks.len());
        let _ = writeln!(out, "{}", join(self.blocks.iter()));
        let _ = writeln!(out, "{}", join(self.c.iter()));
        for e in &self.entries {
            let _ = writeln!(out, "{} {} {} {} {}", e.matrix, e.block, e.i, e.j, e.value);
        }
        out
    }

    /// Parses `.dat-s` text and validates it against its own header.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(k, l)| (k + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty())
            .skip_while(|(_, l)| l.starts_with('"') || l.starts_with('*'));

        let mut header = |what: &str| {
            lines
                .next()
                .ok_or_else(|| Error::parse(0, format!("missing {what}")))
        };
        let (ln, l) = header("variable count")?;
        let m = first_token(l)
            .parse()
            .map_err(|_| Error::parse(ln, "bad variable count"))?;
        let (ln, l) = header("block count")?;
        let nblocks: usize = first_token(l)
            .parse()
            .map_err(|_| Error::parse(ln, "bad block count"))?;
        let (ln, l) = header("block structure")?;
        let blocks: Vec<i64> = numbers(l, ln)?;
        if blocks.len() < nblocks {
            return Err(Error::parse(ln, format!("expected {nblocks} block sizes")));
        }
        let blocks = blocks[..nblocks].to_vec();
        let (ln, l) = header("cost vector")?;
        let c: Vec<f64> = numbers(l, ln)?;
        if c.len() < m {
            return Err(Error::parse(
                ln,
                format!("expected {m} cost entries, found {}", c.len()),
            ));
        }
        let c = c[..m].to_vec();

        let mut entries = Vec::new();
        for (ln, l) in lines {
            let toks: Vec<&str> = split(l).collect();
            if toks.len() != 5 {
                return Err(Error::parse(
                    ln,
                    format!("expected 5 fields, found {}", toks.len()),
                ));
            }
            let idx = |t: &str| {
                t.parse::<usize>()
                    .map_err(|_| Error::parse(ln, format!("bad index {t:?}")))
            };
            entries.push(SdpaEntry {
                matrix: idx(toks[0])?,
                block: idx(toks[1])?,
                i: idx(toks[2])?,
                j: idx(toks[3])?,
                value: toks[4]
                    .parse()
                    .map_err(|_| Error::parse(ln, format!("bad value {:?}", toks[4])))?,
            });
        }
        let p = SdpaProblem {
            m,
            blocks,
            c,
            entries,
        };
        p.validate()?;
        Ok(p)
    }
}

fn join<T: std::fmt::Display>(it: impl Iterator<Item = T>) -> String {
    it.map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

fn split(l: &str) -> impl Iterator<Item = &str> {
    l.split(|c: char| c.is_whitespace() || ",{}()".contains(c))
        .filter(|t| !t.is_empty())
}

fn first_token(l: &str) -> &str {
    split(l).next().unwrap_or("")
}

fn numbers<T: std::str::FromStr>(l: &str, ln: usize) -> Result<Vec<T>> {
    split(l)
        .map(|t| {
            t.parse()
                .map_err(|_| Error::parse(ln, format!("bad number {t:?}")))
        })
        .collect()
}

/// Builds the SDPA model for a loop-augmented adjacency matrix.
pub fn build_sdpa(a: &AdjacencyMatrix, lambda: f64, gamma: f64, eta: usize) -> Result<SdpaProblem> {
    let am = &a.matrix;
    if !am.is_square() {
        return Err(Error::input("adjacency matrix must be square"));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::input(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    crate::graph::Gamma::new(gamma)?;
    let n = am.nrows();
    let tri = n * (n + 1) / 2;
    let sq = n * n;
    let z1 = 1;
    let z2 = z1 + tri;
    let q = z2 + tri;
    let w = q + sq;
    let m = 2 * tri + 2 * sq;

    let density_rows = usize::from(eta > 0);
    let lp_rows = 2 * sq + density_rows + 2 * sq;
    let dens_row = 2 * sq + 1;
    let lower = 2 * sq + density_rows;
    let upper = lower + sq;

    let mut c = vec![0.0; m];
    let mut entries = Vec::new();
    let mut push = |matrix, block, i, j, value| {
        entries.push(SdpaEntry {
            matrix,
            block,
            i,
            j,
            value,
        });
    };

    // F0: right-hand sides, all on the LP block
    for k in 0..sq {
        let aij = am[(k / n, k % n)];
        if aij != 0.0 {
            push(0, 2, 2 * k + 1, 2 * k + 1, aij);
            push(0, 2, 2 * k + 2, 2 * k + 2, -aij);
        }
    }
    if eta > 0 {
        push(0, 2, dens_row, dens_row, gamma * (eta * eta) as f64);
    }
    for k in 0..sq {
        push(0, 2, upper + k + 1, upper + k + 1, -1.0);
    }

    let mut t = 0;
    for i in 0..n {
        for j in i..n {
            if i == j {
                c[z1 - 1 + t] = 0.5;
                c[z2 - 1 + t] = 0.5;
            }
            push(z1 + t, 1, i + 1, j + 1, 1.0);
            push(z2 + t, 1, n + i + 1, n + j + 1, 1.0);
            t += 1;
        }
    }
    for k in 0..sq {
        let (i, j) = (k / n, k % n);
        let v = q + k;
        push(v, 1, i + 1, n + j + 1, 1.0);
        push(v, 2, 2 * k + 1, 2 * k + 1, 1.0);
        push(v, 2, 2 * k + 2, 2 * k + 2, -1.0);
        if eta > 0 {
            push(v, 2, dens_row, dens_row, 1.0);
        }
        push(v, 2, lower + k + 1, lower + k + 1, 1.0);
        push(v, 2, upper + k + 1, upper + k + 1, -1.0);
    }
    for k in 0..sq {
        let v = w + k;
        c[v - 1] = lambda;
        push(v, 2, 2 * k + 1, 2 * k + 1, 1.0);
        push(v, 2, 2 * k + 2, 2 * k + 2, 1.0);
    }

    let p = SdpaProblem {
        m,
        blocks: vec![2 * n as i64, -(lp_rows as i64)],
        c,
        entries,
    };
    p.validate()?;
    Ok(p)
}

/// Renders the model as `.dat-s` text.
pub fn export_sdpa(a: &AdjacencyMatrix, lambda: f64, gamma: f64, eta: usize) -> Result<String> {
    let p = build_sdpa(a, lambda, gamma, eta)?;
    let n = a.matrix.nrows();
    let comment = format!(
        "low-rank plus sparse split, n={n} lambda={lambda} gamma={gamma} eta={eta}\n\
         vars: Z1[{t}] Z2[{t}] Q[{s}] W[{s}]",
        t = n * (n + 1) / 2,
        s = n * n
    );
    Ok(p.to_text(&comment))
}
