//! Importer for chemist-notation FCIDUMP integral files.
//!
//! Spatial-orbital integrals `(pq|rs)` with 8-fold symmetry are expanded to
//! spin-orbitals and rewritten in the native coefficient convention, where
//! `g_ijkl` multiplies `a+_i a+_j a_k a_l` directly:
//!
//! `H2 = 1/2 sum_{pqrs, st} (pq|rs) a+_{p,s} a+_{r,t} a_{s,t} a_{q,s}`
//!
//! Spatial orbital `p` maps to spin-orbitals `2p-1` (alpha) and `2p` (beta).
//! Lines with a single orbital index (orbital energies) are ignored.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::fermion::FermionHamiltonian;

fn spin_orbital(spatial: usize, spin: usize) -> usize {
    2 * (spatial - 1) + spin + 1
}

/// The 8-fold symmetry orbit of a chemist-notation integral label.
fn orbit(p: usize, q: usize, r: usize, s: usize) -> Vec<(usize, usize, usize, usize)> {
    let mut members = vec![
        (p, q, r, s),
        (q, p, r, s),
        (p, q, s, r),
        (q, p, s, r),
        (r, s, p, q),
        (s, r, p, q),
        (r, s, q, p),
        (s, r, q, p),
    ];
    members.sort_unstable();
    members.dedup();
    members
}

/// Parse FCIDUMP text into a native Hamiltonian over `2 * NORB` spin-orbitals.
pub fn parse_fcidump(text: &str) -> Result<FermionHamiltonian> {
    let mut lines = text.lines().enumerate().peekable();

    // Namelist header: &FCI ... / (or &END), possibly spanning lines.
    let mut header = String::new();
    let mut header_end_line = 0;
    for (lineno, line) in lines.by_ref() {
        header.push(' ');
        header.push_str(line);
        header_end_line = lineno + 1;
        let upper = line.to_uppercase();
        if upper.contains('/') || upper.contains("&END") {
            break;
        }
    }
    let norb = header_field(&header, "NORB").ok_or_else(|| Error::Parse {
        line: header_end_line,
        message: "FCIDUMP header is missing NORB".into(),
    })?;
    let nelec = header_field(&header, "NELEC").ok_or_else(|| Error::Parse {
        line: header_end_line,
        message: "FCIDUMP header is missing NELEC".into(),
    })?;
    if norb == 0 {
        return Err(Error::Parse {
            line: header_end_line,
            message: "NORB must be positive".into(),
        });
    }

    let mut core = 0.0;
    let mut one_e: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut two_e: BTreeMap<(usize, usize, usize, usize), f64> = BTreeMap::new();

    for (lineno, raw) in lines {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 5 {
            return Err(Error::Parse {
                line: lineno + 1,
                message: format!("expected `value i j k l`, found {} fields", fields.len()),
            });
        }
        let value: f64 = fields[0].parse().map_err(|_| Error::Parse {
            line: lineno + 1,
            message: format!("invalid value {:?}", fields[0]),
        })?;
        let idx: Vec<usize> = fields[1..]
            .iter()
            .map(|f| {
                f.parse().map_err(|_| Error::Parse {
                    line: lineno + 1,
                    message: format!("invalid index {f:?}"),
                })
            })
            .collect::<Result<_>>()?;
        let (i, j, k, l) = (idx[0], idx[1], idx[2], idx[3]);
        if [i, j, k, l].iter().any(|&x| x > norb) {
            return Err(Error::Parse {
                line: lineno + 1,
                message: format!("orbital index above NORB={norb}"),
            });
        }
        match (i, j, k, l) {
            (0, 0, 0, 0) => core += value,
            (_, 0, 0, 0) => {} // orbital energy records are not used
            (_, _, 0, 0) => {
                // One-electron h_pq, stored once per symmetric pair.
                *one_e.entry((i.max(j), i.min(j))).or_insert(0.0) += value;
            }
            _ if i == 0 || j == 0 || k == 0 || l == 0 => {
                return Err(Error::Parse {
                    line: lineno + 1,
                    message: "mixed zero/nonzero indices".into(),
                })
            }
            _ => {
                let canon = *orbit(i, j, k, l).first().expect("orbit nonempty");
                *two_e.entry(canon).or_insert(0.0) += value;
            }
        }
    }

    let mut h = FermionHamiltonian::new(2 * norb, nelec, core);
    for (&(p, q), &v) in &one_e {
        for spin in 0..2 {
            h.set_one_body(spin_orbital(p, spin), spin_orbital(q, spin), v)?;
        }
    }
    // Accumulate exact tuples first; the orbit-spin expansion is already
    // Hermitian-symmetric, so mirror tuples receive equal totals.
    let mut raw: BTreeMap<(usize, usize, usize, usize), f64> = BTreeMap::new();
    for (&(p, q, r, s), &v) in &two_e {
        for (a, b, c, d) in orbit(p, q, r, s) {
            for sigma in 0..2 {
                for tau in 0..2 {
                    let i = spin_orbital(a, sigma);
                    let j = spin_orbital(c, tau);
                    let k = spin_orbital(d, tau);
                    let l = spin_orbital(b, sigma);
                    // a+_i a+_i and a_k a_k vanish identically.
                    if i == j || k == l {
                        continue;
                    }
                    *raw.entry((i, j, k, l)).or_insert(0.0) += 0.5 * v;
                }
            }
        }
    }
    for (&(i, j, k, l), &v) in &raw {
        h.set_two_body(i, j, k, l, v)?;
    }
    Ok(h)
}

fn header_field(header: &str, key: &str) -> Option<usize> {
    let upper = header.to_uppercase();
    let pos = upper.find(key)?;
    let rest = &upper[pos + key.len()..];
    let rest = rest.trim_start().strip_prefix('=')?.trim_start();
    let digits: String = rest.chars().take_while(char::is_ascii_digit).collect();
    digits.parse().ok()
}
