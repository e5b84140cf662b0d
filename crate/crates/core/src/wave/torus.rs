use crate::error::{Error, Result};

/// Lattice points `λ ∈ ℤ²` with `|λ|² = n`.
pub fn lattice_points(n: u64) -> Vec<[i64; 2]> {
    let r = (n as f64).sqrt().floor() as i64 + 1;
    let mut out = Vec::new();
    for a in -r..=r {
        for b in -r..=r {
            if (a * a + b * b) as u64 == n {
                out.push([a, b]);
            }
        }
    }
    out
}

/// One representative per `±` pair, the one whose first nonzero coordinate
/// is positive, in lexicographic order.
pub fn canonical_representatives(n: u64) -> Result<Vec<[i64; 2]>> {
    if n == 0 {
        return Err(Error::Model("frequency 0 gives the constant mode only".into()));
    }
    let reps: Vec<[i64; 2]> = lattice_points(n).into_iter().filter(|&[a, b]| a > 0 || (a == 0 && b > 0)).collect();
    if reps.is_empty() {
        return Err(Error::Model(format!("{n} is not a sum of two squares; the lattice shell is empty")));
    }
    Ok(reps)
}
