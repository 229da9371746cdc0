//! Built-in matrices. Names can be joined with `+` to form block-diagonal
//! systems, e.g. `schur+ap3`.

use crate::error::{Error, Result};
use crate::linalg::IntMatrix;
use crate::matrix_io::parse_catalogue;
use crate::rado::{diag_block, RadoProfile};

const BUILTIN: &str = "\
# x + y = z
[schur]
1 3
1 1 -1

[ap3]
1 3
1 -2 1

[ap4]
2 4
1 -2 1 0
0 1 -2 1

[ap5]
3 5
1 -2 1 0 0
0 1 -2 1 0
0 0 1 -2 1

[ap6]
4 6
1 -2 1 0 0 0
0 1 -2 1 0 0
0 0 1 -2 1 0
0 0 0 1 -2 1
";

/// Single-block names.
pub const BASE_NAMES: [&str; 5] = ["schur", "ap3", "ap4", "ap5", "ap6"];

/// Block-diagonal examples shipped alongside the base matrices.
pub const DIAG_NAMES: [&str; 3] = ["schur+schur", "schur+ap3", "ap3+ap3"];

fn base_matrix(name: &str) -> Option<IntMatrix> {
    parse_catalogue(BUILTIN)
        .expect("built-in catalogue parses")
        .into_iter()
        .find(|(n, _)| n == name)
        .map(|(_, m)| m)
}

/// The matrix for a catalogue name, including `a+b` block-diagonal names.
pub fn matrix(name: &str) -> Result<IntMatrix> {
    let parts: Vec<&str> = name.split('+').map(str::trim).collect();
    let mats: Vec<IntMatrix> = parts
        .iter()
        .map(|p| base_matrix(p).ok_or_else(|| Error::input(format!("unknown catalogue name `{p}`"))))
        .collect::<Result<_>>()?;
    if mats.len() == 1 {
        return Ok(mats.into_iter().next().unwrap());
    }
    let refs: Vec<&IntMatrix> = mats.iter().collect();
    IntMatrix::block_diagonal(&refs)
}

/// The profile for a catalogue name. Block-diagonal names are assembled from
/// their blocks' profiles so the certificate and witness are inherited.
pub fn profile(name: &str) -> Result<RadoProfile> {
    let parts: Vec<&str> = name.split('+').map(str::trim).collect();
    let profiles: Vec<RadoProfile> = parts
        .iter()
        .map(|p| {
            base_matrix(p)
                .map(|m| RadoProfile::new(*p, m))
                .ok_or_else(|| Error::input(format!("unknown catalogue name `{p}`")))
        })
        .collect::<Result<_>>()?;
    diag_block(&profiles)
}

/// Every shipped name: the base matrices followed by the block examples.
pub fn all_names() -> Vec<&'static str> {
    BASE_NAMES.iter().chain(DIAG_NAMES.iter()).copied().collect()
}
