//! Dense matrix exponential by scaling and squaring with a degree-13 Padé
//! approximant (Higham 2005).

use crate::error::{Error, Result};
use crate::linalg;
use crate::RMat;

const THETA_13: f64 = 5.371920351148152;

const PADE_13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

fn one_norm(a: &RMat) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `exp(a t)`.
pub fn matrix_exp(a: &RMat, t: f64) -> Result<RMat> {
    let n = linalg::check_square(a)?;
    linalg::check_finite(a, "matrix exponential argument")?;
    if !t.is_finite() {
        return Err(Error::NonFinite("matrix exponential time"));
    }
    if n == 0 {
        return Ok(RMat::zeros(0, 0));
    }
    let at = a * t;
    let norm = one_norm(&at);
    if norm == 0.0 {
        return Ok(RMat::identity(n, n));
    }
    let s = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil() as i32
    } else {
        0
    };
    let x = at * 2f64.powi(-s);

    let b = &PADE_13;
    let id = RMat::identity(n, n);
    let x2 = &x * &x;
    let x4 = &x2 * &x2;
    let x6 = &x4 * &x2;

    let u_inner = &x6 * (&x6 * b[13] + &x4 * b[11] + &x2 * b[9]);
    let u = &x * (u_inner + &x6 * b[7] + &x4 * b[5] + &x2 * b[3] + &id * b[1]);
    let v_inner = &x6 * (&x6 * b[12] + &x4 * b[10] + &x2 * b[8]);
    let v = v_inner + &x6 * b[6] + &x4 * b[4] + &x2 * b[2] + &id * b[0];

    let p = &v + &u;
    let q = v - u;
    let mut r = q.lu().solve(&p).ok_or(Error::Singular("Padé denominator"))?;
    for _ in 0..s {
        r = &r * &r;
    }
    Ok(r)
}
