use serde::{Deserialize, Serialize};

use crate::epistasis::{enumerated_epistasis, MAX_ENUMERATION_N};
use crate::error::{Error, Result};
use crate::problems::{parity_onemax_basis, ParityF};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpistasisRow {
    pub n: usize,
    /// Epistasis of the parity function over the whole cube.
    pub epistasis_f: f64,
    /// The same after the change of basis that turns it into onemax.
    pub epistasis_f_prime: f64,
}

/// Rows for every even `n` from 2 to `max_n`, by full enumeration.
pub fn epistasis_table(max_n: usize) -> Result<Vec<EpistasisRow>> {
    if max_n > MAX_ENUMERATION_N {
        return Err(Error::InvalidParameter(format!(
            "max n is {MAX_ENUMERATION_N} for full enumeration, got {max_n}"
        )));
    }
    if max_n < 2 {
        return Err(Error::InvalidParameter("max n must be at least 2".into()));
    }
    (2..=max_n)
        .step_by(2)
        .map(|n| {
            let f = ParityF { n };
            Ok(EpistasisRow {
                n,
                epistasis_f: enumerated_epistasis(&f, None)?.value,
                epistasis_f_prime: enumerated_epistasis(&f, Some(&parity_onemax_basis(n)))?.value,
            })
        })
        .collect()
}

pub fn epistasis_table_csv(rows: &[EpistasisRow]) -> String {
    let mut out = String::from("n,epistasis_f,epistasis_f_prime\n");
    for r in rows {
        out.push_str(&format!("{},{},{}\n", r.n, r.epistasis_f, r.epistasis_f_prime));
    }
    out
}
