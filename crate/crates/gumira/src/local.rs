//! Local analysis of the chaotic composition `F_{b,a}` at the origin:
//! linearisation spectrum, low-order resonance tests via resultants, and the
//! first Birkhoff twist coefficient.

use crate::error::{Error, Result};
use crate::params::ParamPair;
use num_complex::Complex64;

/// Coefficients of the characteristic polynomial of `DF_{b,a}(0,0)`:
/// `P(lambda) = lambda^2 + (2 - ab) lambda + 1`.
pub fn char_poly(pp: &ParamPair) -> (f64, f64, f64) {
    (1.0, 2.0 - pp.product(), 1.0)
}

/// Eigenvalues of `DF_{b,a}(0,0)`:
/// `-1 + ab/2 ± (i/2) sqrt(ab (4 - ab))` for `ab < 4` (elliptic), the real
/// reciprocal pair for `ab >= 4`.
pub fn eigen_origin_f(pp: &ParamPair) -> (Complex64, Complex64) {
    let ab = pp.product();
    let re = -1.0 + 0.5 * ab;
    let rad = ab * (4.0 - ab);
    if rad > 0.0 {
        let im = 0.5 * rad.sqrt();
        (Complex64::new(re, im), Complex64::new(re, -im))
    } else {
        let sq = (-rad).sqrt();
        let big = re + re.signum() * 0.5 * sq;
        if big == 0.0 {
            return (Complex64::new(re, 0.0), Complex64::new(re, 0.0));
        }
        (Complex64::new(big, 0.0), Complex64::new(1.0 / big, 0.0))
    }
}

/// Closed-form resultant `Res(P_{a,b}(lambda), lambda^k - 1)` for `k = 1, 2, 3`:
/// `4 - ab`, `(4 - ab) ab`, `(4 - ab)(1 - ab)^2`.
pub fn resonance_resultant(pp: &ParamPair, k: u8) -> f64 {
    let ab = pp.product();
    match k {
        1 => 4.0 - ab,
        2 => (4.0 - ab) * ab,
        3 => (4.0 - ab) * (1.0 - ab) * (1.0 - ab),
        _ => panic!("resonance order must be 1, 2 or 3"),
    }
}

/// Orders `k` in `{1, 2, 3}` whose resultant vanishes, i.e. for which the
/// origin eigenvalues are k-th roots of unity. Vanishing is an exact
/// floating-point zero: the products `ab = 1` and `ab = 4` are hit exactly
/// by representable inputs, anything else is a genuine non-resonance.
pub fn resonance_check(pp: &ParamPair) -> Vec<u8> {
    (1..=3)
        .filter(|&k| resonance_resultant(pp, k) == 0.0)
        .collect()
}

/// First Birkhoff coefficient of the normal form at the origin:
/// `sigma = 3 (a + b) sqrt(ab (4 - ab)) / (4 b (4 - ab))`, positive on the
/// whole elliptic domain `0 < ab < 4`.
pub fn birkhoff_sigma(pp: &ParamPair) -> Result<f64> {
    let ab = pp.product();
    if ab >= 4.0 {
        return Err(Error::DomainError {
            context: "birkhoff coefficient needs ab < 4",
        });
    }
    let (a, b) = (pp.a(), pp.b());
    Ok(3.0 * (a + b) * (ab * (4.0 - ab)).sqrt() / (4.0 * b * (4.0 - ab)))
}

/// Bundle of the local data at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalReport {
    pub char_poly: (f64, f64, f64),
    pub eigenvalues: (Complex64, Complex64),
    pub resonant_orders: Vec<u8>,
    pub sigma: Option<f64>,
    /// The same coefficient with the roles of `a` and `b` exchanged; the
    /// closed form is not symmetric and both views are exposed.
    pub sigma_swapped: Option<f64>,
}

pub fn local_report(pp: &ParamPair) -> LocalReport {
    LocalReport {
        char_poly: char_poly(pp),
        eigenvalues: eigen_origin_f(pp),
        resonant_orders: resonance_check(pp),
        sigma: birkhoff_sigma(pp).ok(),
        sigma_swapped: birkhoff_sigma(&pp.swapped()).ok(),
    }
}

/// Resultant of two real polynomials (ascending-degree coefficient slices)
/// via the Sylvester determinant; cross-validates the closed forms.
pub fn sylvester_resultant(p: &[f64], q: &[f64]) -> f64 {
    let m = p.len() - 1;
    let n = q.len() - 1;
    assert!(m >= 1 && n >= 1);
    let size = m + n;
    let mut mat = vec![vec![0.0; size]; size];
    for r in 0..n {
        for (k, &c) in p.iter().enumerate() {
            mat[r][r + (m - k)] = c;
        }
    }
    for r in 0..m {
        for (k, &c) in q.iter().enumerate() {
            mat[n + r][r + (n - k)] = c;
        }
    }
    det_in_place(mat)
}

fn det_in_place(mut m: Vec<Vec<f64>>) -> f64 {
    let n = m.len();
    let mut sign = 1.0;
    for c in 0..n {
        let pivot = (c..n)
            .max_by(|&i, &j| m[i][c].abs().partial_cmp(&m[j][c].abs()).unwrap())
            .unwrap();
        if m[pivot][c] == 0.0 {
            return 0.0;
        }
        if pivot != c {
            m.swap(pivot, c);
            sign = -sign;
        }
        for r in c + 1..n {
            let f = m[r][c] / m[c][c];
            for k in c..n {
                m[r][k] -= f * m[c][k];
            }
        }
    }
    sign * (0..n).map(|i| m[i][i]).product::<f64>()
}
