//! JSON fixture form of an [`IntegralSet`]: keys `norb`, `nelec`, `ms2`,
//! `orbsym`, `core`, `one_body` (triplets `[i, j, value]`) and `two_body`
//! (quintuplets `[i, j, k, l, value]`), indices 1-based as in FCIDUMP.

use serde::{Deserialize, Serialize};

use super::{IntegralSet, IntegralsError, OrbitalMeta, Result};

#[derive(Serialize, Deserialize)]
struct JsonForm {
    norb: usize,
    nelec: usize,
    ms2: i32,
    orbsym: Vec<u8>,
    core: f64,
    one_body: Vec<(usize, usize, f64)>,
    two_body: Vec<(usize, usize, usize, usize, f64)>,
}

pub fn integral_set_to_json(h: &IntegralSet) -> String {
    let n = h.meta.n_orbitals;
    let mut one_body = Vec::new();
    for p in 0..n {
        for q in 0..=p {
            if h.t(p, q) != 0.0 {
                one_body.push((p + 1, q + 1, h.t(p, q)));
            }
        }
    }
    let two_body = h
        .two_body_entries()
        .map(|(k, v)| {
            (
                k[0] as usize + 1,
                k[1] as usize + 1,
                k[2] as usize + 1,
                k[3] as usize + 1,
                v,
            )
        })
        .collect();
    let form = JsonForm {
        norb: n,
        nelec: h.meta.n_electrons(),
        ms2: h.meta.reference_two_sz,
        orbsym: h.meta.irrep_labels.clone(),
        core: h.core_energy,
        one_body,
        two_body,
    };
    serde_json::to_string_pretty(&form).expect("integral set serializes")
}

pub fn integral_set_from_json(text: &str) -> Result<IntegralSet> {
    let form: JsonForm =
        serde_json::from_str(text).map_err(|e| IntegralsError::Json(e.to_string()))?;
    if form.orbsym.len() != form.norb {
        return Err(IntegralsError::Json(format!(
            "orbsym length {} != norb {}",
            form.orbsym.len(),
            form.norb
        )));
    }
    let occ = super::fcidump_reference_occ(form.norb, form.nelec, form.ms2)?;
    let meta = OrbitalMeta::new(form.orbsym, occ, form.ms2)?;
    let mut h = IntegralSet::new(meta);
    h.core_energy = form.core;
    let check = |i: usize| -> Result<usize> {
        if i < 1 || i > form.norb {
            Err(IntegralsError::IndexOutOfRange {
                line: 0,
                index: i as i64,
                norb: form.norb,
            })
        } else {
            Ok(i - 1)
        }
    };
    for (i, j, v) in form.one_body {
        h.set_t(check(i)?, check(j)?, v);
    }
    for (i, j, k, l, v) in form.two_body {
        h.set_v(check(i)?, check(j)?, check(k)?, check(l)?, v);
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrals::build_hubbard;

    #[test]
    fn json_round_trip() {
        let h = build_hubbard(4, 1.0, 2.5).unwrap();
        let text = integral_set_to_json(&h);
        let back = integral_set_from_json(&text).unwrap();
        assert_eq!(h, back);
    }
}
