//! FCIDUMP text format: a namelist-style header (NORB, NELEC, MS2, ORBSYM)
//! followed by `value i j k l` records with 1-based orbital indices.
//!
//! Classification of records follows the interchange convention: all-zero
//! indices carry the core energy, `k = l = 0` marks a one-body entry, and
//! fully indexed records are chemist-notation two-body entries. Conflicting
//! duplicates (same canonical tuple, values differing by more than 1e-12) are
//! rejected with the offending line number rather than silently overwritten.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{IntegralSet, IntegralsError, OrbitalMeta, Result, DUPLICATE_TOL};

struct Header {
    norb: usize,
    nelec: usize,
    ms2: i32,
    orbsym: Vec<u8>,
    /// Number of input lines the header spanned.
    lines: usize,
}

fn parse_header(text: &str) -> Result<Header> {
    let bad = |line: usize, msg: &str| IntegralsError::MalformedHeader {
        line,
        msg: msg.to_string(),
    };
    let mut header_text = String::new();
    let mut lines = 0;
    let mut terminated = false;
    for (idx, line) in text.lines().enumerate() {
        lines = idx + 1;
        let upper = line.to_ascii_uppercase();
        header_text.push(' ');
        if let Some(pos) = upper.find("&END").or_else(|| upper.find('/')) {
            header_text.push_str(&line[..pos]);
            terminated = true;
            break;
        }
        header_text.push_str(line);
    }
    if !terminated {
        return Err(bad(lines, "missing &END (or /) terminator"));
    }
    let trimmed = header_text.trim_start();
    let upper = trimmed.to_ascii_uppercase();
    if !upper.starts_with("&FCI") {
        return Err(bad(1, "header must start with &FCI"));
    }
    let body = &trimmed[4..];

    // Tokenize into KEY=values segments; values are comma- or space-separated.
    let mut fields: BTreeMap<String, Vec<String>> = BTreeMap::new();
    let mut current: Option<String> = None;
    for token in body
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
    {
        if let Some(eq) = token.find('=') {
            let key = token[..eq].trim().to_ascii_uppercase();
            if key.is_empty() {
                return Err(bad(1, "empty key before '='"));
            }
            let entry = fields.entry(key.clone()).or_default();
            let rest = token[eq + 1..].trim();
            if !rest.is_empty() {
                entry.push(rest.to_string());
            }
            current = Some(key);
        } else if let Some(key) = &current {
            fields.get_mut(key).unwrap().push(token.to_string());
        } else {
            return Err(bad(1, &format!("unexpected token '{token}'")));
        }
    }

    let get_int = |fields: &BTreeMap<String, Vec<String>>, key: &str| -> Result<Option<i64>> {
        match fields.get(key) {
            None => Ok(None),
            Some(vals) if vals.len() == 1 => vals[0]
                .parse::<i64>()
                .map(Some)
                .map_err(|_| bad(1, &format!("{key} is not an integer: '{}'", vals[0]))),
            Some(_) => Err(bad(1, &format!("{key} given multiple values"))),
        }
    };

    let norb = get_int(&fields, "NORB")?.ok_or_else(|| bad(1, "missing NORB"))?;
    if norb < 1 {
        return Err(bad(1, "NORB must be positive"));
    }
    let norb = norb as usize;
    let nelec = get_int(&fields, "NELEC")?.ok_or_else(|| bad(1, "missing NELEC"))?;
    if nelec < 0 || nelec as usize > 2 * norb {
        return Err(bad(1, "NELEC outside 0..=2*NORB"));
    }
    let ms2 = get_int(&fields, "MS2")?.unwrap_or(0) as i32;
    let orbsym = match fields.get("ORBSYM") {
        None => vec![1; norb],
        Some(vals) => {
            if vals.len() != norb {
                return Err(bad(
                    1,
                    &format!("ORBSYM has {} entries, expected NORB={norb}", vals.len()),
                ));
            }
            let mut out = Vec::with_capacity(norb);
            for v in vals {
                let s: i64 = v
                    .parse()
                    .map_err(|_| bad(1, &format!("ORBSYM entry '{v}' is not an integer")))?;
                if !(0..=255).contains(&s) {
                    return Err(bad(1, &format!("ORBSYM entry {s} out of range")));
                }
                out.push(s as u8);
            }
            out
        }
    };
    Ok(Header {
        norb,
        nelec: nelec as usize,
        ms2,
        orbsym,
        lines,
    })
}

/// Parses FCIDUMP text into an [`IntegralSet`].
pub fn parse_fcidump(text: &str) -> Result<IntegralSet> {
    let header = parse_header(text)?;
    let occ = super::fcidump_reference_occ(header.norb, header.nelec, header.ms2)?;
    let mut meta = OrbitalMeta::new(header.orbsym, occ, header.ms2)?;
    meta.reference_two_sz = header.ms2;
    let mut h = IntegralSet::new(meta);

    let mut core_line: Option<usize> = None;
    let mut seen_t: BTreeMap<(usize, usize), (f64, usize)> = BTreeMap::new();
    let mut seen_v: BTreeMap<[u16; 4], usize> = BTreeMap::new();

    for (idx, line) in text.lines().enumerate().skip(header.lines) {
        let lineno = idx + 1;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }
        if tokens.len() != 5 {
            return Err(IntegralsError::MalformedRecord {
                line: lineno,
                msg: format!("expected 'value i j k l', got {} tokens", tokens.len()),
            });
        }
        let value: f64 = tokens[0]
            .replace(['D', 'd'], "E")
            .parse()
            .map_err(|_| IntegralsError::MalformedRecord {
                line: lineno,
                msg: format!("bad value '{}'", tokens[0]),
            })?;
        let mut idxs = [0i64; 4];
        for (t, out) in tokens[1..].iter().zip(idxs.iter_mut()) {
            *out = t.parse().map_err(|_| IntegralsError::MalformedRecord {
                line: lineno,
                msg: format!("bad index '{t}'"),
            })?;
        }
        let check = |ix: i64| -> Result<usize> {
            if ix < 1 || ix as usize > h.meta.n_orbitals {
                Err(IntegralsError::IndexOutOfRange {
                    line: lineno,
                    index: ix,
                    norb: h.meta.n_orbitals,
                })
            } else {
                Ok(ix as usize - 1)
            }
        };
        match idxs {
            [0, 0, 0, 0] => {
                if let Some(prev) = core_line {
                    if (h.core_energy - value).abs() > DUPLICATE_TOL {
                        return Err(IntegralsError::DuplicateEntry {
                            line: lineno,
                            i: 0,
                            j: 0,
                            k: 0,
                            l: 0,
                            old: h.core_energy,
                            new: value,
                        });
                    }
                    let _ = prev;
                }
                h.core_energy = value;
                core_line = Some(lineno);
            }
            [_, _, 0, 0] => {
                let i = check(idxs[0])?;
                let j = check(idxs[1])?;
                let key = (i.max(j), i.min(j));
                if let Some(&(old, _)) = seen_t.get(&key) {
                    if (old - value).abs() > DUPLICATE_TOL {
                        return Err(IntegralsError::DuplicateEntry {
                            line: lineno,
                            i: i + 1,
                            j: j + 1,
                            k: 0,
                            l: 0,
                            old,
                            new: value,
                        });
                    }
                }
                seen_t.insert(key, (value, lineno));
                h.set_t(i, j, value);
            }
            _ if idxs.iter().all(|&x| x != 0) => {
                let p = check(idxs[0])?;
                let q = check(idxs[1])?;
                let r = check(idxs[2])?;
                let s = check(idxs[3])?;
                let old = h.v(p, q, r, s);
                let key = super::canonical_key(p, q, r, s);
                if seen_v.contains_key(&key) && (old - value).abs() > DUPLICATE_TOL {
                    return Err(IntegralsError::DuplicateEntry {
                        line: lineno,
                        i: p + 1,
                        j: q + 1,
                        k: r + 1,
                        l: s + 1,
                        old,
                        new: value,
                    });
                }
                seen_v.insert(key, lineno);
                h.set_v(p, q, r, s, value);
            }
            _ => {
                return Err(IntegralsError::MalformedRecord {
                    line: lineno,
                    msg: format!(
                        "unsupported index pattern ({} {} {} {})",
                        idxs[0], idxs[1], idxs[2], idxs[3]
                    ),
                });
            }
        }
    }
    Ok(h)
}

/// Serializes an [`IntegralSet`] back to FCIDUMP text. Output is canonical:
/// two-body entries first (canonical representatives, sorted), then one-body,
/// then the core line; values in 16-digit scientific notation.
pub fn write_fcidump(h: &IntegralSet) -> String {
    let n = h.meta.n_orbitals;
    let mut out = String::new();
    let _ = write!(
        out,
        "&FCI NORB={},NELEC={},MS2={},\n ORBSYM=",
        n,
        h.meta.n_electrons(),
        h.meta.reference_two_sz
    );
    for (i, s) in h.meta.irrep_labels.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let _ = write!(out, "{s}");
    }
    out.push_str(",\n ISYM=1,\n&END\n");
    for (k, v) in h.two_body_entries() {
        let _ = writeln!(
            out,
            "{:>24.16E} {:>4} {:>4} {:>4} {:>4}",
            v,
            k[0] + 1,
            k[1] + 1,
            k[2] + 1,
            k[3] + 1
        );
    }
    for p in 0..n {
        for q in 0..=p {
            let t = h.t(p, q);
            if t != 0.0 {
                let _ = writeln!(
                    out,
                    "{:>24.16E} {:>4} {:>4} {:>4} {:>4}",
                    t,
                    p + 1,
                    q + 1,
                    0,
                    0
                );
            }
        }
    }
    let _ = writeln!(
        out,
        "{:>24.16E} {:>4} {:>4} {:>4} {:>4}",
        h.core_energy, 0, 0, 0, 0
    );
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const DIMER: &str = "&FCI NORB=2,NELEC=2,MS2=0,\n ORBSYM=1,1,\n ISYM=1,\n&END\n\
        -1.0 1 1 0 0\n-1.0 2 2 0 0\n0.0 0 0 0 0\n";

    #[test]
    fn parses_minimal_dump() {
        let h = parse_fcidump(DIMER).unwrap();
        assert_eq!(h.n_orbitals(), 2);
        assert_eq!(h.t(0, 0), -1.0);
        assert_eq!(h.t(1, 1), -1.0);
        assert_eq!(h.t(0, 1), 0.0);
        assert_eq!(h.core_energy, 0.0);
        assert_eq!(h.two_body_entries().count(), 0);
    }

    #[test]
    fn expands_two_body_symmetry() {
        let text = "&FCI NORB=2,NELEC=2,MS2=0,&END\n0.5 1 1 1 1\n0.25 1 2 1 1\n";
        let h = parse_fcidump(text).unwrap();
        assert_eq!(h.v(0, 0, 0, 0), 0.5);
        for (p, q, r, s) in [(0, 1, 0, 0), (1, 0, 0, 0), (0, 0, 0, 1), (0, 0, 1, 0)] {
            assert_eq!(h.v(p, q, r, s), 0.25);
        }
    }

    #[test]
    fn index_out_of_range() {
        let text = "&FCI NORB=2,NELEC=2,MS2=0,&END\n0.1 3 1 0 0\n";
        match parse_fcidump(text) {
            Err(IntegralsError::IndexOutOfRange { line, index, norb }) => {
                assert_eq!((line, index, norb), (2, 3, 2));
            }
            other => panic!("expected index error, got {other:?}"),
        }
    }

    #[test]
    fn conflicting_duplicate_rejected() {
        let text = "&FCI NORB=2,NELEC=2,MS2=0,&END\n0.5 1 1 1 1\n0.6 1 1 1 1\n";
        match parse_fcidump(text) {
            Err(IntegralsError::DuplicateEntry { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected duplicate error, got {other:?}"),
        }
        // Symmetry image with the same value is fine.
        let ok = "&FCI NORB=2,NELEC=2,MS2=0,&END\n0.5 1 2 1 1\n0.5 2 1 1 1\n";
        assert!(parse_fcidump(ok).is_ok());
    }

    #[test]
    fn malformed_header() {
        assert!(matches!(
            parse_fcidump("&FCI NELEC=2,&END\n"),
            Err(IntegralsError::MalformedHeader { .. })
        ));
        assert!(matches!(
            parse_fcidump("&FCI NORB=2,NELEC=2\n0.0 0 0 0 0\n"),
            Err(IntegralsError::MalformedHeader { .. })
        ));
    }

    #[test]
    fn fortran_d_exponents() {
        let text = "&FCI NORB=1,NELEC=2,MS2=0,&END\n-0.5D+01 1 1 0 0\n";
        let h = parse_fcidump(text).unwrap();
        assert_eq!(h.t(0, 0), -5.0);
    }

    #[test]
    fn round_trip_is_stable() {
        let text = "&FCI NORB=3,NELEC=4,MS2=0,\n ORBSYM=1,2,1,\n&END\n\
            0.5 1 1 1 1\n0.125 3 2 1 1\n-1.5 1 1 0 0\n-0.75 2 1 0 0\n0.25 0 0 0 0\n";
        let h = parse_fcidump(text).unwrap();
        let emitted = write_fcidump(&h);
        let h2 = parse_fcidump(&emitted).unwrap();
        assert_eq!(h, h2);
        assert_eq!(emitted, write_fcidump(&h2));
    }
}
