//! Exact search for polynomial invariants of the `k`-periodically forced
//! recurrence `x_{n+2} = -x_n + x_{n+1} / (beta_n + x_{n+1}^2)`.
//!
//! The ansatz is a phase-indexed polynomial `I(x, y, n) = sum c^{i,j}_n x^i y^j`
//! over all monomials with `1 <= i + j <= 4`. Requiring
//! `I(y, -x + y/(beta_n + y^2), n+1) = I(x, y, n)` for every phase, clearing
//! the denominator `(beta_n + y^2)^4` and matching monomials yields a linear
//! system over the rationals; its exact nullspace decides integrability.
//! Cycle entries are exact rationals so the decision is a rank computation,
//! never a floating-point tolerance call.

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::BTreeMap;

/// The 14 ansatz monomials `(i, j)`, grouped by total degree.
pub const ANSATZ_MONOMIALS: [(u32, u32); 14] = [
    (1, 0),
    (0, 1),
    (2, 0),
    (1, 1),
    (0, 2),
    (3, 0),
    (2, 1),
    (1, 2),
    (0, 3),
    (4, 0),
    (3, 1),
    (2, 2),
    (1, 3),
    (0, 4),
];

/// Positive rational forcing cycle `beta_0, ..., beta_{k-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaCycle {
    betas: Vec<BigRational>,
}

#[allow(clippy::len_without_is_empty)]
impl BetaCycle {
    pub fn new(betas: Vec<BigRational>) -> Result<Self> {
        if betas.is_empty() {
            return Err(Error::DomainError {
                context: "cycle must be non-empty",
            });
        }
        if let Some(index) = betas.iter().position(|b| !b.is_positive()) {
            return Err(Error::NonPositiveBeta { index });
        }
        Ok(BetaCycle { betas })
    }

    /// Convenience constructor from integer fractions.
    pub fn from_fractions(fractions: &[(i64, i64)]) -> Result<Self> {
        let betas = fractions
            .iter()
            .map(|&(p, q)| BigRational::new(BigInt::from(p), BigInt::from(q)))
            .collect();
        BetaCycle::new(betas)
    }

    /// Cycle length (construction guarantees at least 1).
    pub fn len(&self) -> usize {
        self.betas.len()
    }

    pub fn beta(&self, n: usize) -> &BigRational {
        &self.betas[n % self.betas.len()]
    }

    pub fn betas(&self) -> &[BigRational] {
        &self.betas
    }

    /// Smallest divisor `d` of the length with `beta_{n+d} = beta_n` for all `n`.
    pub fn minimal_period(&self) -> usize {
        let k = self.betas.len();
        (1..=k)
            .filter(|&d| k.is_multiple_of(d))
            .find(|&d| (0..k).all(|n| self.betas[n] == self.betas[(n + d) % k]))
            .unwrap_or(k)
    }
}

/// Coefficients `c^{i,j}_n` of one invariant candidate, one 14-vector per phase.
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantAnsatz {
    pub coeffs: Vec<Vec<BigRational>>,
}

impl InvariantAnsatz {
    pub fn phases(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeff(&self, phase: usize, monomial: usize) -> &BigRational {
        &self.coeffs[phase % self.coeffs.len()][monomial]
    }

    /// Evaluate `I(x, y, phase)` in double precision.
    pub fn eval(&self, phase: usize, x: f64, y: f64) -> f64 {
        self.coeffs[phase % self.coeffs.len()]
            .iter()
            .zip(ANSATZ_MONOMIALS.iter())
            .map(|(c, &(i, j))| c.to_f64().unwrap() * x.powi(i as i32) * y.powi(j as i32))
            .sum()
    }

    /// All-zero candidate (useful as a control in tests).
    pub fn zero(k: usize) -> Self {
        InvariantAnsatz {
            coeffs: vec![vec![BigRational::zero(); ANSATZ_MONOMIALS.len()]; k],
        }
    }
}

/// Sparse exact polynomial in `x, y`.
#[derive(Debug, Clone, PartialEq, Default)]
struct Poly2 {
    terms: BTreeMap<(u32, u32), BigRational>,
}

impl Poly2 {
    fn zero() -> Self {
        Poly2::default()
    }

    fn constant(c: BigRational) -> Self {
        let mut p = Poly2::zero();
        if !c.is_zero() {
            p.terms.insert((0, 0), c);
        }
        p
    }

    fn monomial(i: u32, j: u32) -> Self {
        let mut p = Poly2::zero();
        p.terms.insert((i, j), BigRational::one());
        p
    }

    fn add_scaled(&mut self, other: &Poly2, scale: &BigRational) {
        if scale.is_zero() {
            return;
        }
        for (&key, coeff) in &other.terms {
            let entry = self.terms.entry(key).or_insert_with(BigRational::zero);
            *entry += coeff * scale;
            if entry.is_zero() {
                self.terms.remove(&key);
            }
        }
    }

    fn mul(&self, other: &Poly2) -> Poly2 {
        let mut out = Poly2::zero();
        for (&(i1, j1), c1) in &self.terms {
            for (&(i2, j2), c2) in &other.terms {
                let key = (i1 + i2, j1 + j2);
                let entry = out.terms.entry(key).or_insert_with(BigRational::zero);
                *entry += c1 * c2;
                if entry.is_zero() {
                    out.terms.remove(&key);
                }
            }
        }
        out
    }

    fn pow(&self, e: u32) -> Poly2 {
        let mut out = Poly2::constant(BigRational::one());
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

/// The monomial-matching linear system of one cycle: unknowns are the
/// `14 k` ansatz coefficients (phase-major), one row per vanishing monomial.
#[derive(Debug, Clone)]
pub struct ConstraintSystem {
    pub k: usize,
    pub n_cols: usize,
    pub rows: Vec<Vec<BigRational>>,
}

/// For phase `n`, the polynomial multiplying the coefficient of monomial
/// `(i, j)` taken at phase `n+1`: `y^i (y - x d)^j d^{4-j}` with
/// `d = beta_n + y^2`.
fn pushforward_monomial(i: u32, j: u32, den: &Poly2) -> Poly2 {
    let y_i = Poly2::monomial(0, i);
    let mut lin = Poly2::monomial(0, 1); // y
    let x_den = Poly2::monomial(1, 0).mul(den);
    lin.add_scaled(&x_den, &-BigRational::one()); // y - x d
    y_i.mul(&lin.pow(j)).mul(&den.pow(4 - j))
}

/// Build the exact constraint system for `cycle`.
pub fn build_constraints(cycle: &BetaCycle) -> ConstraintSystem {
    let k = cycle.len();
    let m = ANSATZ_MONOMIALS.len();
    let n_cols = k * m;
    let mut rows = Vec::new();
    for n in 0..k {
        let mut den = Poly2::monomial(0, 2);
        den.add_scaled(&Poly2::constant(BigRational::one()), cycle.beta(n));
        let den4 = den.pow(4);

        // coefficient of each unknown, as a polynomial in (x, y); for a
        // 1-cycle both contributions land in the same column and accumulate
        let mut columns: Vec<Poly2> = vec![Poly2::zero(); n_cols];
        for (idx, &(i, j)) in ANSATZ_MONOMIALS.iter().enumerate() {
            let forward = pushforward_monomial(i, j, &den);
            columns[((n + 1) % k) * m + idx].add_scaled(&forward, &BigRational::one());
            let back = Poly2::monomial(i, j).mul(&den4);
            columns[n * m + idx].add_scaled(&back, &-BigRational::one());
        }

        // collect every monomial appearing in any column into one row each
        let mut monomials: std::collections::BTreeSet<(u32, u32)> = std::collections::BTreeSet::new();
        for col in &columns {
            monomials.extend(col.terms.keys().copied());
        }
        for key in monomials {
            let row: Vec<BigRational> = columns
                .iter()
                .map(|col| col.terms.get(&key).cloned().unwrap_or_else(BigRational::zero))
                .collect();
            rows.push(row);
        }
    }
    ConstraintSystem { k, n_cols, rows }
}

/// Exact nullspace of a constraint system.
#[derive(Debug, Clone)]
pub struct Nullspace {
    pub rank: usize,
    pub basis: Vec<InvariantAnsatz>,
}

impl Nullspace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

/// Fraction-free elimination over the integers followed by exact rational
/// back-substitution. Each basis vector is normalised to integer content 1
/// with a positive leading coefficient and re-verified symbolically.
pub fn solve_nullspace(system: &ConstraintSystem) -> Nullspace {
    let n_cols = system.n_cols;
    // clear denominators row-wise
    let mut mat: Vec<Vec<BigInt>> = system
        .rows
        .iter()
        .map(|row| {
            let lcm = row
                .iter()
                .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
            row.iter()
                .map(|c| c.numer() * (&lcm / c.denom()))
                .collect()
        })
        .collect();

    // integer row echelon, splitting common content after each update
    let mut pivot_cols: Vec<usize> = Vec::new();
    let mut row_i = 0;
    for col in 0..n_cols {
        let pivot_row = (row_i..mat.len())
            .filter(|&r| !mat[r][col].is_zero())
            .min_by_key(|&r| mat[r][col].magnitude().bits());
        let Some(pivot_row) = pivot_row else { continue };
        mat.swap(row_i, pivot_row);
        for r in row_i + 1..mat.len() {
            if mat[r][col].is_zero() {
                continue;
            }
            let g = mat[row_i][col].gcd(&mat[r][col]);
            let piv_m = &mat[row_i][col] / &g;
            let cur_m = &mat[r][col] / &g;
            for c in col..n_cols {
                let val = &mat[r][c] * &piv_m - &mat[row_i][c] * &cur_m;
                mat[r][c] = val;
            }
            reduce_content(&mut mat[r]);
        }
        pivot_cols.push(col);
        row_i += 1;
        if row_i == mat.len() {
            break;
        }
    }
    let rank = pivot_cols.len();

    // back-substitute one basis vector per free column
    let free_cols: Vec<usize> = (0..n_cols).filter(|c| !pivot_cols.contains(c)).collect();
    let mut basis = Vec::with_capacity(free_cols.len());
    for &f in &free_cols {
        let mut v = vec![BigRational::zero(); n_cols];
        v[f] = BigRational::one();
        for (i, &pc) in pivot_cols.iter().enumerate().rev() {
            let mut sum = BigRational::zero();
            for c in pc + 1..n_cols {
                if !v[c].is_zero() && !mat[i][c].is_zero() {
                    sum += BigRational::from(mat[i][c].clone()) * &v[c];
                }
            }
            v[pc] = -sum / BigRational::from(mat[i][pc].clone());
        }
        basis.push(normalize_vector(v, system.k));
    }
    let ns = Nullspace { rank, basis };
    debug_assert!(ns
        .basis
        .iter()
        .all(|a| system_residual_is_zero(system, a)));
    ns
}

fn reduce_content(row: &mut [BigInt]) {
    let mut g = BigInt::zero();
    for v in row.iter() {
        g = g.gcd(v);
        if g.is_one() {
            return;
        }
    }
    if g.is_zero() || g.is_one() {
        return;
    }
    for v in row.iter_mut() {
        *v = &*v / &g;
    }
}

/// Scale to integer entries with content 1 and positive first non-zero.
fn normalize_vector(v: Vec<BigRational>, k: usize) -> InvariantAnsatz {
    let lcm = v.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let mut ints: Vec<BigInt> = v.iter().map(|c| c.numer() * (&lcm / c.denom())).collect();
    let mut g = BigInt::zero();
    for c in &ints {
        g = g.gcd(c);
    }
    if !g.is_zero() && !g.is_one() {
        for c in ints.iter_mut() {
            *c = &*c / &g;
        }
    }
    if let Some(first) = ints.iter().find(|c| !c.is_zero()) {
        if first.is_negative() {
            for c in ints.iter_mut() {
                *c = -&*c;
            }
        }
    }
    let m = ANSATZ_MONOMIALS.len();
    let coeffs = (0..k)
        .map(|n| {
            (0..m)
                .map(|idx| BigRational::from(ints[n * m + idx].clone()))
                .collect()
        })
        .collect();
    InvariantAnsatz { coeffs }
}

fn system_residual_is_zero(system: &ConstraintSystem, ansatz: &InvariantAnsatz) -> bool {
    let m = ANSATZ_MONOMIALS.len();
    system.rows.iter().all(|row| {
        let mut sum = BigRational::zero();
        for (col, coeff) in row.iter().enumerate() {
            if !coeff.is_zero() {
                sum += coeff * &ansatz.coeffs[col / m][col % m];
            }
        }
        sum.is_zero()
    })
}

/// Symbolic re-verification, independent of the assembled system: substitute
/// the candidate into the invariance relation and expand; the residual
/// polynomial must vanish identically at every phase.
pub fn verify_invariant_exact(ansatz: &InvariantAnsatz, cycle: &BetaCycle) -> bool {
    let k = cycle.len();
    if ansatz.phases() != k {
        return false;
    }
    for n in 0..k {
        let mut den = Poly2::monomial(0, 2);
        den.add_scaled(&Poly2::constant(BigRational::one()), cycle.beta(n));
        let den4 = den.pow(4);
        let mut residual = Poly2::zero();
        for (idx, &(i, j)) in ANSATZ_MONOMIALS.iter().enumerate() {
            residual.add_scaled(
                &pushforward_monomial(i, j, &den),
                &ansatz.coeffs[(n + 1) % k][idx],
            );
            residual.add_scaled(
                &Poly2::monomial(i, j).mul(&den4),
                &-&ansatz.coeffs[n][idx],
            );
        }
        if !residual.is_zero() {
            return false;
        }
    }
    true
}

/// Numeric spot-check: iterate the scalar recurrence and return the largest
/// jump of the phase-indexed invariant along `n_steps` steps from each seed.
pub fn verify_invariant(
    ansatz: &InvariantAnsatz,
    cycle: &BetaCycle,
    n_steps: usize,
    seeds: &[(f64, f64)],
) -> f64 {
    let k = cycle.len();
    let betas: Vec<f64> = cycle.betas().iter().map(|b| b.to_f64().unwrap()).collect();
    let mut worst = 0.0_f64;
    for &(x0, y0) in seeds {
        let (mut x, mut y) = (x0, y0);
        let mut value = ansatz.eval(0, x, y);
        for n in 0..n_steps {
            let beta = betas[n % k];
            let next = -x + y / (beta + y * y);
            x = y;
            y = next;
            let new_value = ansatz.eval(n + 1, x, y);
            worst = worst.max((new_value - value).abs());
            value = new_value;
        }
    }
    worst
}

/// One-call integrability decision for a cycle.
#[derive(Debug, Clone)]
pub struct IntegrabilityReport {
    pub nullspace: Nullspace,
    pub minimal_period: usize,
    /// Non-trivial nullspace with minimal period 1 or 2 re-read at a longer
    /// cycle length.
    pub inherited: bool,
}

pub fn search_invariant(cycle: &BetaCycle) -> IntegrabilityReport {
    let nullspace = solve_nullspace(&build_constraints(cycle));
    let minimal_period = cycle.minimal_period();
    IntegrabilityReport {
        inherited: nullspace.dim() > 0 && minimal_period <= 2 && cycle.len() > minimal_period,
        nullspace,
        minimal_period,
    }
}
