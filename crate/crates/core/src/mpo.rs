//! Diagonal matrix product operators: exact trace evaluation, bounded
//! negativity search, and the onward maps to polynomial grids and positive
//! maps.
//!
//! A family `B_1..B_k` of `D x D` integer matrices defines, for every tuple
//! `(i_1..i_n)`, the diagonal entry `tr(B_{i_1} ... B_{i_n})`. The operator
//! of size `n` is positive semidefinite exactly when all those traces are
//! non-negative, so the bounded solver searches tuples for a negative trace.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matsem::{BigMatrix, MatrixFamily, MatsemError};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MpoError {
    #[error("family must be non-empty")]
    EmptyFamily,
    #[error("family mixes dimensions {0} and {1}")]
    MixedDimensions(usize, usize),
    #[error("tuple index {0} out of range 1..={1}")]
    IndexOutOfRange(usize, usize),
    #[error("tuple must contain at least one index")]
    EmptyTuple,
    #[error("point {0} has {1} coordinates, expected {2}")]
    ArityMismatch(usize, usize, usize),
    #[error("at least one evaluation point is required")]
    NoPoints,
    #[error("dimension {0} is not a perfect square; pad the family first")]
    NotASquare(usize),
    #[error("size guard exceeded: {0} terms requested, budget {1}")]
    SizeGuard(u128, u128),
    #[error("matrix entry is not a decimal integer: {0}")]
    BadEntry(String),
}

/// `k` integer matrices of uniform dimension `D`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MpoFamily {
    matrices: Vec<BigMatrix>,
}

/// An index tuple certifying one diagonal entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceWitness(pub Vec<usize>);

impl TraceWitness {
    pub fn len(&self) -> usize {
        self.0.len()
    }
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl MpoFamily {
    pub fn new(matrices: Vec<BigMatrix>) -> Result<Self, MpoError> {
        let Some(first) = matrices.first() else {
            return Err(MpoError::EmptyFamily);
        };
        let d = first.dim();
        for m in &matrices {
            if m.dim() != d {
                return Err(MpoError::MixedDimensions(d, m.dim()));
            }
        }
        Ok(MpoFamily { matrices })
    }

    pub fn from_matrix_family(fam: &MatrixFamily) -> Self {
        MpoFamily {
            matrices: fam.matrices().to_vec(),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrices[0].dim()
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    pub fn matrices(&self) -> &[BigMatrix] {
        &self.matrices
    }
}

impl fmt::Display for MpoFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} matrices of dimension {}", self.len(), self.dim())
    }
}

/// Exact trace of the ordered product selected by `idx`.
pub fn rho_entry(fam: &MpoFamily, idx: &TraceWitness) -> Result<BigInt, MpoError> {
    if idx.0.is_empty() {
        return Err(MpoError::EmptyTuple);
    }
    let mut acc: Option<BigMatrix> = None;
    for &i in &idx.0 {
        let m = fam
            .matrices
            .get(i)
            .ok_or(MpoError::IndexOutOfRange(i + 1, fam.len()))?;
        acc = Some(match acc {
            None => m.clone(),
            Some(p) => p.mul(m),
        });
    }
    Ok(acc.unwrap().trace())
}

fn is_canonical_rotation(t: &[usize]) -> bool {
    let n = t.len();
    for shift in 1..n {
        for i in 0..n {
            let a = t[i];
            let b = t[(i + shift) % n];
            match a.cmp(&b) {
                std::cmp::Ordering::Less => break,
                std::cmp::Ordering::Greater => return false,
                std::cmp::Ordering::Equal => continue,
            }
        }
    }
    true
}

/// Minimal-length, lexicographically smallest tuple with a negative trace,
/// or `None` if every tuple of length at most `n` has non-negative trace.
///
/// Traces are cyclic, so only the lexicographically smallest rotation of
/// each cyclic class is evaluated; the smallest negative tuple is always
/// such a representative, so the canonical answer is unaffected.
pub fn solve_bmpo(fam: &MpoFamily, n: u64) -> Option<TraceWitness> {
    let k = fam.len();
    for len in 1..=(n as usize) {
        let mut tuple = vec![0usize; len];
        'tuples: loop {
            if is_canonical_rotation(&tuple) {
                let trace = rho_entry(fam, &TraceWitness(tuple.clone()))
                    .expect("indices are in range by construction");
                if trace.is_negative() {
                    return Some(TraceWitness(tuple));
                }
            }
            let mut pos = len;
            loop {
                if pos == 0 {
                    break 'tuples;
                }
                pos -= 1;
                tuple[pos] += 1;
                if tuple[pos] < k {
                    break;
                }
                tuple[pos] = 0;
            }
        }
    }
    None
}

/// Block-embeds a corner-zero family into trace form: each `A_i` becomes
/// `blockdiag(A_i (x) A_i, 1)` and one extra matrix `blockdiag(E_11, -1)`
/// is appended. A corner-zero product of `l` factors yields a negative
/// trace at `l + 1` factors and vice versa.
pub fn reduce_zulc_to_mpo(fam: &MatrixFamily) -> Result<MpoFamily, MpoError> {
    let d = fam.dim();
    let big = d * d + 1;
    let mut out = Vec::with_capacity(fam.len() + 1);
    for a in fam.matrices() {
        let kron = a.kron(a);
        let mut entries = vec![BigInt::zero(); big * big];
        for i in 0..d * d {
            for j in 0..d * d {
                entries[i * big + j] = kron.entry(i, j).clone();
            }
        }
        entries[big * big - 1] = BigInt::from(1);
        out.push(BigMatrix::new(big, entries).expect("square by construction"));
    }
    let mut last = vec![BigInt::zero(); big * big];
    last[0] = BigInt::from(1);
    last[big * big - 1] = BigInt::from(-1);
    out.push(BigMatrix::new(big, last).expect("square by construction"));
    MpoFamily::new(out)
}

// ---------------------------------------------------------------------------
// Polynomial grid
// ---------------------------------------------------------------------------

/// A `D x D` grid of polynomials in `k` variables where the `(a, b)` entry
/// is `sum_j coeff[j][a][b] * x_j^2`; the coefficient grid is exactly the
/// source family.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolynomialFamily {
    family: MpoFamily,
}

impl PolynomialFamily {
    pub fn family(&self) -> &MpoFamily {
        &self.family
    }

    pub fn dim(&self) -> usize {
        self.family.dim()
    }

    pub fn vars(&self) -> usize {
        self.family.len()
    }

    /// The coefficient of `x_j^2` at grid position `(a, b)`.
    pub fn coeff(&self, j: usize, a: usize, b: usize) -> &BigInt {
        self.family.matrices()[j].entry(a, b)
    }

    /// Evaluates the grid at one point: the matrix `sum_j B_j x_j^2`.
    fn grid_at(&self, point: &[BigRational]) -> Vec<BigRational> {
        let d = self.dim();
        let mut out = vec![BigRational::zero(); d * d];
        for (j, m) in self.family.matrices().iter().enumerate() {
            let sq = &point[j] * &point[j];
            if sq.is_zero() {
                continue;
            }
            for a in 0..d {
                for b in 0..d {
                    let c = m.entry(a, b);
                    if !c.is_zero() {
                        out[a * d + b] += BigRational::from(c.clone()) * &sq;
                    }
                }
            }
        }
        out
    }
}

/// The coefficient grid of the polynomial form of `fam`.
pub fn reduce_mpo_to_poly(fam: &MpoFamily) -> PolynomialFamily {
    PolynomialFamily { family: fam.clone() }
}

/// Exact evaluation of the size-`n` cyclic contraction at rational points:
/// the trace of the product of the per-point grid matrices.
pub fn eval_pn(pf: &PolynomialFamily, points: &[Vec<BigRational>]) -> Result<BigRational, MpoError> {
    if points.is_empty() {
        return Err(MpoError::NoPoints);
    }
    let k = pf.vars();
    for (i, p) in points.iter().enumerate() {
        if p.len() != k {
            return Err(MpoError::ArityMismatch(i, p.len(), k));
        }
    }
    let d = pf.dim();
    let mut acc: Option<Vec<BigRational>> = None;
    for p in points {
        let q = pf.grid_at(p);
        acc = Some(match acc {
            None => q,
            Some(a) => {
                let mut out = vec![BigRational::zero(); d * d];
                for i in 0..d {
                    for l in 0..d {
                        if a[i * d + l].is_zero() {
                            continue;
                        }
                        for j in 0..d {
                            if !q[l * d + j].is_zero() {
                                out[i * d + j] += &a[i * d + l] * &q[l * d + j];
                            }
                        }
                    }
                }
                out
            }
        });
    }
    let m = acc.unwrap();
    let mut tr = BigRational::zero();
    for i in 0..d {
        tr += &m[i * d + i];
    }
    Ok(tr)
}

// ---------------------------------------------------------------------------
// Positive-map form
// ---------------------------------------------------------------------------

/// The reshuffled matrices of a positive-map presentation: `D = s^2` and
/// `C_i[(a1,a2),(b1,b2)] = B_i[(a1,b1),(a2,b2)]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PositiveMapSpec {
    pub s: usize,
    pub maps: Vec<BigMatrix>,
}

/// Index-reshuffles a family whose dimension is a perfect square.
pub fn reduce_mpo_to_stab(fam: &MpoFamily) -> Result<PositiveMapSpec, MpoError> {
    let d = fam.dim();
    let s = (d as f64).sqrt().round() as usize;
    if s * s != d {
        return Err(MpoError::NotASquare(d));
    }
    let mut maps = Vec::with_capacity(fam.len());
    for b in fam.matrices() {
        let mut entries = vec![BigInt::zero(); d * d];
        for a1 in 0..s {
            for a2 in 0..s {
                for b1 in 0..s {
                    for b2 in 0..s {
                        let row = a1 * s + a2;
                        let col = b1 * s + b2;
                        entries[row * d + col] = b.entry(a1 * s + b1, a2 * s + b2).clone();
                    }
                }
            }
        }
        maps.push(BigMatrix::new(d, entries).expect("square by construction"));
    }
    Ok(PositiveMapSpec { s, maps })
}

/// Zero-pads every matrix to the next perfect-square dimension; traces of
/// all products are unchanged because the new blocks are zero.
pub fn pad_to_square(fam: &MpoFamily) -> MpoFamily {
    let d = fam.dim();
    let mut s = 0usize;
    while s * s < d {
        s += 1;
    }
    let target = s * s;
    if target == d {
        return fam.clone();
    }
    let matrices = fam
        .matrices()
        .iter()
        .map(|m| {
            let mut entries = vec![BigInt::zero(); target * target];
            for i in 0..d {
                for j in 0..d {
                    entries[i * target + j] = m.entry(i, j).clone();
                }
            }
            BigMatrix::new(target, entries).expect("square by construction")
        })
        .collect();
    MpoFamily { matrices }
}

/// Basis labels of the cyclic contraction vector: for each cycle
/// `(i_1..i_n)` over `[s]^n`, the component `((i_1,i_2), ..., (i_n,i_1))`.
fn chi_labels(s: usize, n: usize) -> Vec<Vec<usize>> {
    let mut chi = Vec::new();
    let mut cycle = vec![0usize; n];
    loop {
        let label: Vec<usize> = (0..n)
            .map(|m| cycle[m] * s + cycle[(m + 1) % n])
            .collect();
        chi.push(label);
        let mut pos = n;
        loop {
            if pos == 0 {
                break;
            }
            pos -= 1;
            cycle[pos] += 1;
            if cycle[pos] < s {
                break;
            }
            cycle[pos] = 0;
        }
        if cycle.iter().all(|&c| c == 0) {
            break;
        }
    }
    chi
}

/// The contraction-vector quadratic form of a single index tuple,
/// `<chi| C_{t_1} (x) ... (x) C_{t_n} |chi>`, evaluated term by term. The
/// trace shortcut is avoided so the result genuinely cross-checks
/// [`rho_entry`].
pub fn stab_entry(spec: &PositiveMapSpec, tuple: &[usize]) -> Result<BigInt, MpoError> {
    if tuple.is_empty() {
        return Err(MpoError::EmptyTuple);
    }
    let k = spec.maps.len();
    for &t in tuple {
        if t >= k {
            return Err(MpoError::IndexOutOfRange(t + 1, k));
        }
    }
    let n = tuple.len();
    let chi = chi_labels(spec.s, n);
    let mut total = BigInt::zero();
    for row in &chi {
        for col in &chi {
            let mut term = BigInt::from(1);
            for m in 0..n {
                let c = spec.maps[tuple[m]].entry(row[m], col[m]);
                if c.is_zero() {
                    term = BigInt::zero();
                    break;
                }
                term *= c;
            }
            total += term;
        }
    }
    Ok(total)
}

/// Evaluates the reshuffled maps against the explicitly materialized cyclic
/// contraction vector, for every index tuple of length `n` in lexicographic
/// order. A size guard keeps the term count at desk scale.
pub fn apply_stab_diagonal(spec: &PositiveMapSpec, n: u64) -> Result<Vec<BigInt>, MpoError> {
    if n == 0 {
        return Err(MpoError::EmptyTuple);
    }
    let s = spec.s;
    let k = spec.maps.len();
    let n = n as usize;
    let labels: u128 = (s as u128).pow(n as u32);
    let tuples: u128 = (k as u128).pow(n as u32);
    let budget: u128 = 200_000_000;
    let cost = labels
        .checked_mul(labels)
        .and_then(|x| x.checked_mul(n as u128))
        .and_then(|x| x.checked_mul(tuples))
        .ok_or(MpoError::SizeGuard(u128::MAX, budget))?;
    if cost > budget {
        return Err(MpoError::SizeGuard(cost, budget));
    }

    let mut out = Vec::new();
    let mut tuple = vec![0usize; n];
    loop {
        out.push(stab_entry(spec, &tuple)?);
        let mut pos = n;
        loop {
            if pos == 0 {
                break;
            }
            pos -= 1;
            tuple[pos] += 1;
            if tuple[pos] < k {
                break;
            }
            tuple[pos] = 0;
        }
        if tuple.iter().all(|&t| t == 0) {
            break;
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// JSON wire format
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
pub struct MpoJson {
    pub kind: String,
    #[serde(flatten)]
    pub family: crate::matsem::MatrixFamilyJson,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct PolyJson {
    #[serde(rename = "D")]
    pub dim: usize,
    pub k: usize,
    /// `coeff[j][a][b]` is the coefficient of `x_j^2` at `(a, b)`.
    pub coeff: Vec<Vec<Vec<String>>>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct StabJson {
    pub s: usize,
    #[serde(flatten)]
    pub family: crate::matsem::MatrixFamilyJson,
}

impl MpoFamily {
    pub fn to_json(&self) -> MpoJson {
        MpoJson {
            kind: "mpo".into(),
            family: MatrixFamily::new(self.matrices.clone())
                .expect("families are valid")
                .to_json(),
        }
    }

    pub fn from_json(j: &MpoJson) -> Result<Self, MpoError> {
        let fam = MatrixFamily::from_json(&j.family).map_err(|e| match e {
            MatsemError::MixedDimensions(a, b) => MpoError::MixedDimensions(a, b),
            MatsemError::EmptyFamily => MpoError::EmptyFamily,
            other => MpoError::BadEntry(other.to_string()),
        })?;
        Ok(MpoFamily::from_matrix_family(&fam))
    }
}

impl PolynomialFamily {
    pub fn to_json(&self) -> PolyJson {
        let d = self.dim();
        PolyJson {
            dim: d,
            k: self.vars(),
            coeff: self
                .family
                .matrices()
                .iter()
                .map(|m| {
                    (0..d)
                        .map(|a| (0..d).map(|b| m.entry(a, b).to_string()).collect())
                        .collect()
                })
                .collect(),
        }
    }

    pub fn from_json(j: &PolyJson) -> Result<Self, MpoError> {
        let mut matrices = Vec::new();
        for grid in &j.coeff {
            let mut entries = Vec::new();
            for row in grid {
                for e in row {
                    entries.push(
                        e.parse::<BigInt>()
                            .map_err(|_| MpoError::BadEntry(e.clone()))?,
                    );
                }
            }
            matrices.push(
                BigMatrix::new(j.dim, entries)
                    .map_err(|e| MpoError::BadEntry(e.to_string()))?,
            );
        }
        Ok(PolynomialFamily {
            family: MpoFamily::new(matrices)?,
        })
    }
}

impl PositiveMapSpec {
    pub fn to_json(&self) -> StabJson {
        StabJson {
            s: self.s,
            family: MatrixFamily::new(self.maps.clone())
                .expect("maps are valid")
                .to_json(),
        }
    }

    pub fn from_json(j: &StabJson) -> Result<Self, MpoError> {
        let fam = MatrixFamily::from_json(&j.family)
            .map_err(|e| MpoError::BadEntry(e.to_string()))?;
        if j.s * j.s != fam.dim() {
            return Err(MpoError::NotASquare(fam.dim()));
        }
        Ok(PositiveMapSpec {
            s: j.s,
            maps: fam.matrices().to_vec(),
        })
    }
}
