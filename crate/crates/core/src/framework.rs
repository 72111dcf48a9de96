//! The bounded-instance algebra: threshold polynomials, reduction arrows,
//! lifting, composition, and the problem registry.
//!
//! A bounded problem accepts pairs of an instance and a unary step budget
//! `n`, monotonically in `n`. A reduction arrow couples an instance map
//! with a strictly increasing threshold polynomial `p`, and lifting sends
//! `(x, n)` to `(R(x), p(n))`. Bounds are stored as binary integers but
//! carry unary size semantics.
//!
//! The registry binds each problem id to its exact bounded solver and an
//! independent certificate verifier. For the universally quantified
//! problems (all-paths halting, tiling impossibility, ground-state energy)
//! the "certificate" is the exhaustive bounded re-check itself.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matsem::{self, MatrixFamily, ProductWitness};
use crate::mpo::{self, MpoFamily, PolynomialFamily, PositiveMapSpec, TraceWitness};
use crate::pcp::{self, MatchWitness, PcpInstance};
use crate::tiling::{self, SpinModel, TileOutcome, TileSet};
use crate::turing::{AllPathsOutcome, ComputationPath, Ntm};

#[derive(Debug, Error)]
pub enum FrameworkError {
    #[error("threshold polynomial needs a positive coefficient at degree >= 1")]
    NotIncreasing,
    #[error("bound {0} does not fit the machine word after lifting")]
    BoundOverflow(String),
    #[error("problem {0:?} is not registered")]
    UnknownProblem(String),
    #[error("instance is for problem {actual:?}, arrow starts at {expected:?}")]
    ProblemMismatch { expected: String, actual: String },
    #[error("arrows do not chain: {0:?} ends at {1:?} but {2:?} starts at {3:?}")]
    ChainMismatch(String, String, String, String),
    #[error("map {map:?} cannot take a {got} instance")]
    MapTypeMismatch { map: String, got: &'static str },
    #[error("certificate kind {got:?} does not fit problem {problem:?}")]
    CertificateMismatch { problem: String, got: String },
    #[error("manifest references unknown instance map {0:?}")]
    UnknownMap(String),
    #[error(transparent)]
    Turing(#[from] crate::turing::TuringError),
    #[error(transparent)]
    Pcp(#[from] crate::pcp::PcpError),
    #[error(transparent)]
    Matsem(#[from] crate::matsem::MatsemError),
    #[error(transparent)]
    Mpo(#[from] crate::mpo::MpoError),
    #[error(transparent)]
    Tiling(#[from] crate::tiling::TilingError),
}

// ---------------------------------------------------------------------------
// Threshold polynomials
// ---------------------------------------------------------------------------

/// A polynomial with non-negative integer coefficients (constant term
/// first) and at least one positive coefficient of degree >= 1, enough to
/// be strictly increasing on the naturals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThresholdPolynomial {
    coeffs: Vec<BigUint>,
}

impl ThresholdPolynomial {
    pub fn new(coeffs: Vec<u64>) -> Result<Self, FrameworkError> {
        Self::from_big(coeffs.into_iter().map(BigUint::from).collect())
    }

    pub fn from_big(mut coeffs: Vec<BigUint>) -> Result<Self, FrameworkError> {
        while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        if !coeffs.iter().skip(1).any(|c| !c.is_zero()) {
            return Err(FrameworkError::NotIncreasing);
        }
        Ok(ThresholdPolynomial { coeffs })
    }

    /// The identity polynomial `p(n) = n`.
    pub fn identity() -> Self {
        ThresholdPolynomial {
            coeffs: vec![BigUint::zero(), BigUint::one()],
        }
    }

    /// `p(n) = n + c`.
    pub fn shift(c: u64) -> Self {
        ThresholdPolynomial {
            coeffs: vec![BigUint::from(c), BigUint::one()],
        }
    }

    pub fn coeffs(&self) -> &[BigUint] {
        &self.coeffs
    }

    pub fn eval(&self, n: u64) -> BigUint {
        let n = BigUint::from(n);
        let mut acc = BigUint::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * &n + c;
        }
        acc
    }

    pub fn eval_u64(&self, n: u64) -> Result<u64, FrameworkError> {
        let v = self.eval(n);
        u64::try_from(&v).map_err(|_| FrameworkError::BoundOverflow(v.to_string()))
    }

    /// The composition `self(inner(n))`, coefficients recomputed exactly.
    pub fn compose(&self, inner: &ThresholdPolynomial) -> ThresholdPolynomial {
        // Horner over polynomial coefficients.
        let mut acc: Vec<BigUint> = vec![BigUint::zero()];
        for c in self.coeffs.iter().rev() {
            acc = poly_mul(&acc, &inner.coeffs);
            if acc.is_empty() {
                acc.push(BigUint::zero());
            }
            acc[0] += c;
        }
        ThresholdPolynomial::from_big(acc)
            .expect("composition of strictly increasing polynomials is strictly increasing")
    }
}

fn poly_mul(a: &[BigUint], b: &[BigUint]) -> Vec<BigUint> {
    if a.iter().all(|c| c.is_zero()) || b.iter().all(|c| c.is_zero()) {
        return vec![BigUint::zero()];
    }
    let mut out = vec![BigUint::zero(); a.len() + b.len() - 1];
    for (i, ca) in a.iter().enumerate() {
        if ca.is_zero() {
            continue;
        }
        for (j, cb) in b.iter().enumerate() {
            if !cb.is_zero() {
                out[i + j] += ca * cb;
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Instances and certificates
// ---------------------------------------------------------------------------

/// Every instance payload the registry understands.
#[derive(Debug, Clone, PartialEq)]
pub enum Instance {
    Machine(Ntm),
    Correspondence(PcpInstance),
    Matrices(MatrixFamily),
    Operator(MpoFamily),
    Polynomials(PolynomialFamily),
    Maps(PositiveMapSpec),
    Tiles(TileSet),
    Spins {
        model: SpinModel,
        threshold: BigRational,
    },
}

impl Instance {
    pub fn kind(&self) -> &'static str {
        match self {
            Instance::Machine(_) => "machine",
            Instance::Correspondence(_) => "correspondence",
            Instance::Matrices(_) => "matrices",
            Instance::Operator(_) => "operator",
            Instance::Polynomials(_) => "polynomials",
            Instance::Maps(_) => "maps",
            Instance::Tiles(_) => "tiles",
            Instance::Spins { .. } => "spins",
        }
    }
}

/// Certificates the bounded solvers emit and the verifiers re-check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Certificate {
    /// A computation path (existential halting).
    Path(ComputationPath),
    /// An index sequence: match, product, or trace tuple (0-based).
    Indices(Vec<usize>),
    /// The universal problems carry no succinct yes-certificate; verifying
    /// means re-running the exhaustive bounded check.
    Exhaustive,
}

impl Certificate {
    /// The witness size that decides acceptance, when one exists.
    fn size(&self) -> Option<u64> {
        match self {
            Certificate::Path(p) => Some(p.0.len() as u64),
            Certificate::Indices(ix) => Some(ix.len() as u64),
            Certificate::Exhaustive => None,
        }
    }
}

/// A problem instance paired with its unary-semantics bound.
#[derive(Debug, Clone)]
pub struct BoundedInstance {
    pub problem: String,
    pub payload: Instance,
    pub bound: u64,
}

// ---------------------------------------------------------------------------
// Instance maps and arrows
// ---------------------------------------------------------------------------

/// The registered instance maps. `Chain` applies maps left to right.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InstanceMap {
    NhaltToPcp,
    PcpToZulc,
    ZulcToMm,
    ZulcToMpo,
    MpoToPoly,
    MpoToStab,
    NhaltAllToTile,
    TileToGse,
    Chain(Vec<InstanceMap>),
}

impl InstanceMap {
    pub fn id(&self) -> String {
        match self {
            InstanceMap::NhaltToPcp => "nhalt_to_pcp".into(),
            InstanceMap::PcpToZulc => "pcp_to_zulc".into(),
            InstanceMap::ZulcToMm => "zulc_to_mm".into(),
            InstanceMap::ZulcToMpo => "zulc_to_mpo".into(),
            InstanceMap::MpoToPoly => "mpo_to_poly".into(),
            InstanceMap::MpoToStab => "mpo_to_stab".into(),
            InstanceMap::NhaltAllToTile => "nhaltall_to_tile".into(),
            InstanceMap::TileToGse => "tile_to_gse".into(),
            InstanceMap::Chain(maps) => maps
                .iter()
                .map(|m| m.id())
                .collect::<Vec<_>>()
                .join("+"),
        }
    }

    pub fn from_id(id: &str) -> Result<InstanceMap, FrameworkError> {
        if id.contains('+') {
            let maps = id
                .split('+')
                .map(InstanceMap::from_id)
                .collect::<Result<Vec<_>, _>>()?;
            return Ok(InstanceMap::Chain(maps));
        }
        Ok(match id {
            "nhalt_to_pcp" => InstanceMap::NhaltToPcp,
            "pcp_to_zulc" => InstanceMap::PcpToZulc,
            "zulc_to_mm" => InstanceMap::ZulcToMm,
            "zulc_to_mpo" => InstanceMap::ZulcToMpo,
            "mpo_to_poly" => InstanceMap::MpoToPoly,
            "mpo_to_stab" => InstanceMap::MpoToStab,
            "nhaltall_to_tile" => InstanceMap::NhaltAllToTile,
            "tile_to_gse" => InstanceMap::TileToGse,
            other => return Err(FrameworkError::UnknownMap(other.to_string())),
        })
    }

    pub fn apply(&self, inst: &Instance) -> Result<Instance, FrameworkError> {
        let mismatch = |got: &Instance| FrameworkError::MapTypeMismatch {
            map: self.id(),
            got: got.kind(),
        };
        Ok(match (self, inst) {
            (InstanceMap::NhaltToPcp, Instance::Machine(m)) => {
                Instance::Correspondence(pcp::reduce_nhalt_to_pcp(m)?)
            }
            (InstanceMap::PcpToZulc, Instance::Correspondence(p)) => {
                Instance::Matrices(matsem::reduce_pcp_to_zulc(p)?)
            }
            (InstanceMap::ZulcToMm, Instance::Matrices(f)) => {
                Instance::Matrices(matsem::reduce_zulc_to_mm(f)?)
            }
            (InstanceMap::ZulcToMpo, Instance::Matrices(f)) => {
                Instance::Operator(mpo::reduce_zulc_to_mpo(f)?)
            }
            (InstanceMap::MpoToPoly, Instance::Operator(f)) => {
                Instance::Polynomials(mpo::reduce_mpo_to_poly(f))
            }
            (InstanceMap::MpoToStab, Instance::Operator(f)) => {
                // Padding never changes a trace, so the identity threshold
                // polynomial stays exact.
                Instance::Maps(mpo::reduce_mpo_to_stab(&mpo::pad_to_square(f))?)
            }
            (InstanceMap::NhaltAllToTile, Instance::Machine(m)) => {
                Instance::Tiles(tiling::reduce_nhaltall_to_tile(m))
            }
            (InstanceMap::TileToGse, Instance::Tiles(t)) => Instance::Spins {
                model: tiling::reduce_tile_to_gse(t),
                threshold: BigRational::zero(),
            },
            (InstanceMap::Chain(maps), start) => {
                let mut cur = start.clone();
                for m in maps {
                    cur = m.apply(&cur)?;
                }
                cur
            }
            (_, other) => return Err(mismatch(other)),
        })
    }
}

/// A reduction arrow: source and target problem ids, the instance map, and
/// the threshold polynomial relating the bounds.
#[derive(Debug, Clone)]
pub struct ReductionArrow {
    pub source: String,
    pub target: String,
    pub map: InstanceMap,
    pub threshold: ThresholdPolynomial,
}

impl ReductionArrow {
    /// Lifts a bounded instance across the arrow: the payload through the
    /// instance map and the bound through the threshold polynomial.
    pub fn lift(&self, inst: &BoundedInstance) -> Result<BoundedInstance, FrameworkError> {
        if inst.problem != self.source {
            return Err(FrameworkError::ProblemMismatch {
                expected: self.source.clone(),
                actual: inst.problem.clone(),
            });
        }
        Ok(BoundedInstance {
            problem: self.target.clone(),
            payload: self.map.apply(&inst.payload)?,
            bound: self.threshold.eval_u64(inst.bound)?,
        })
    }

    /// Sequential composition: `self` then `next`.
    pub fn compose(&self, next: &ReductionArrow) -> Result<ReductionArrow, FrameworkError> {
        if self.target != next.source {
            return Err(FrameworkError::ChainMismatch(
                self.map.id(),
                self.target.clone(),
                next.map.id(),
                next.source.clone(),
            ));
        }
        let map = match (&self.map, &next.map) {
            (InstanceMap::Chain(a), InstanceMap::Chain(b)) => {
                let mut v = a.clone();
                v.extend(b.clone());
                InstanceMap::Chain(v)
            }
            (InstanceMap::Chain(a), m) => {
                let mut v = a.clone();
                v.push(m.clone());
                InstanceMap::Chain(v)
            }
            (m, InstanceMap::Chain(b)) => {
                let mut v = vec![m.clone()];
                v.extend(b.clone());
                InstanceMap::Chain(v)
            }
            (m1, m2) => InstanceMap::Chain(vec![m1.clone(), m2.clone()]),
        };
        Ok(ReductionArrow {
            source: self.source.clone(),
            target: next.target.clone(),
            map,
            threshold: next.threshold.compose(&self.threshold),
        })
    }
}

// ---------------------------------------------------------------------------
// Registry
// ---------------------------------------------------------------------------

type Solver = Box<dyn Fn(&Instance, u64) -> Result<Option<Certificate>, FrameworkError> + Send + Sync>;
type Verifier =
    Box<dyn Fn(&Instance, u64, &Certificate) -> Result<bool, FrameworkError> + Send + Sync>;

/// One registered problem: a certificate kind tag, the bounded solver, and
/// the from-scratch verifier.
pub struct ProblemEntry {
    pub id: String,
    pub certificate_kind: String,
    solver: Solver,
    verifier: Verifier,
}

impl ProblemEntry {
    pub fn new(
        id: impl Into<String>,
        certificate_kind: impl Into<String>,
        solver: Solver,
        verifier: Verifier,
    ) -> Self {
        ProblemEntry {
            id: id.into(),
            certificate_kind: certificate_kind.into(),
            solver,
            verifier,
        }
    }
}

/// Problem and arrow registry. Everything is immutable after construction
/// and safe to share across workers; solvers are re-entrant.
pub struct Registry {
    problems: BTreeMap<String, ProblemEntry>,
    arrows: Vec<ReductionArrow>,
}

/// Outcome of a threshold search below a horizon. A missing threshold
/// never asserts non-membership of the unbounded problem: the instance may
/// simply need a larger budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Threshold {
    Found(u64),
    NotFoundWithinHorizon,
}

impl Threshold {
    pub fn found(&self) -> Option<u64> {
        match self {
            Threshold::Found(n) => Some(*n),
            Threshold::NotFoundWithinHorizon => None,
        }
    }
}

/// Monotonicity check result for one instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AxiomReport {
    pub horizon: u64,
    pub accepted: Vec<bool>,
    pub first_violation: Option<u64>,
}

impl Registry {
    pub fn empty() -> Self {
        Registry {
            problems: BTreeMap::new(),
            arrows: Vec::new(),
        }
    }

    /// The built-in problems and the full reduction tree.
    pub fn standard() -> Self {
        let mut r = Registry::empty();
        r.register(ProblemEntry::new(
            "bnhalt",
            "computation-path",
            Box::new(|inst, n| match inst {
                Instance::Machine(m) => Ok(m.halts_exists_within(n).map(Certificate::Path)),
                other => Err(FrameworkError::MapTypeMismatch {
                    map: "bnhalt".into(),
                    got: other.kind(),
                }),
            }),
            Box::new(|inst, n, cert| match (inst, cert) {
                (Instance::Machine(m), Certificate::Path(p)) => {
                    if p.0.len() as u64 > n {
                        return Ok(false);
                    }
                    match m.replay(p) {
                        Ok(end) => Ok(m.is_final(end.state)),
                        Err(_) => Ok(false),
                    }
                }
                _ => Err(FrameworkError::CertificateMismatch {
                    problem: "bnhalt".into(),
                    got: "non-path".into(),
                }),
            }),
        ));
        r.register(ProblemEntry::new(
            "bnhalt-all",
            "exhaustive-check",
            Box::new(|inst, n| match inst {
                Instance::Machine(m) => Ok(match m.halts_all_within(n) {
                    AllPathsOutcome::AllHalt => Some(Certificate::Exhaustive),
                    AllPathsOutcome::Offending(_) => None,
                }),
                other => Err(FrameworkError::MapTypeMismatch {
                    map: "bnhalt-all".into(),
                    got: other.kind(),
                }),
            }),
            Box::new(|inst, n, cert| match (inst, cert) {
                (Instance::Machine(m), Certificate::Exhaustive) => {
                    Ok(matches!(m.halts_all_within(n), AllPathsOutcome::AllHalt))
                }
                _ => Err(FrameworkError::CertificateMismatch {
                    problem: "bnhalt-all".into(),
                    got: "non-exhaustive".into(),
                }),
            }),
        ));
        r.register(ProblemEntry::new(
            "bpcp",
            "domino-sequence",
            Box::new(|inst, n| match inst {
                Instance::Correspondence(p) => {
                    Ok(p.solve_bpcp(n).map(|w| Certificate::Indices(w.0)))
                }
                other => Err(FrameworkError::MapTypeMismatch {
                    map: "bpcp".into(),
                    got: other.kind(),
                }),
            }),
            Box::new(|inst, n, cert| match (inst, cert) {
                (Instance::Correspondence(p), Certificate::Indices(ix)) => {
                    if ix.is_empty() || ix.len() as u64 > n {
                        return Ok(false);
                    }
                    match p.verify_match(&MatchWitness(ix.clone())) {
                        Ok(v) => Ok(v),
                        Err(_) => Ok(false),
                    }
                }
                _ => Err(FrameworkError::CertificateMismatch {
                    problem: "bpcp".into(),
                    got: "non-indices".into(),
                }),
            }),
        ));
        r.register(ProblemEntry::new(
            "bzulc",
            "product-sequence",
            Box::new(|inst, n| match inst {
                Instance::Matrices(f) => {
                    Ok(matsem::solve_bzulc(f, n).map(|w| Certificate::Indices(w.0)))
                }
                other => Err(FrameworkError::MapTypeMismatch {
                    map: "bzulc".into(),
                    got: other.kind(),
                }),
            }),
            Box::new(|inst, n, cert| match (inst, cert) {
                (Instance::Matrices(f), Certificate::Indices(ix)) => {
                    if ix.is_empty() || ix.len() as u64 > n {
                        return Ok(false);
                    }
                    match f.product(&ProductWitness(ix.clone())) {
                        Ok(p) => Ok(p.entry(0, 0).is_zero()),
                        Err(_) => Ok(false),
                    }
                }
                _ => Err(FrameworkError::CertificateMismatch {
                    problem: "bzulc".into(),
                    got: "non-indices".into(),
                }),
            }),
        ));
        r.register(ProblemEntry::new(
            "bmm",
            "product-sequence",
            Box::new(|inst, n| match inst {
                Instance::Matrices(f) => {
                    Ok(matsem::solve_bmm(f, n).map(|w| Certificate::Indices(w.0)))
                }
                other => Err(FrameworkError::MapTypeMismatch {
                    map: "bmm".into(),
                    got: other.kind(),
                }),
            }),
            Box::new(|inst, n, cert| match (inst, cert) {
                (Instance::Matrices(f), Certificate::Indices(ix)) => {
                    if ix.is_empty() || ix.len() as u64 > n {
                        return Ok(false);
                    }
                    match f.product(&ProductWitness(ix.clone())) {
                        Ok(p) => Ok(p.is_zero()),
                        Err(_) => Ok(false),
                    }
                }
                _ => Err(FrameworkError::CertificateMismatch {
                    problem: "bmm".into(),
                    got: "non-indices".into(),
                }),
            }),
        ));
        r.register(ProblemEntry::new(
            "bmpo",
            "trace-tuple",
            Box::new(|inst, n| match inst {
                Instance::Operator(f) => {
                    Ok(mpo::solve_bmpo(f, n).map(|w| Certificate::Indices(w.0)))
                }
                other => Err(FrameworkError::MapTypeMismatch {
                    map: "bmpo".into(),
                    got: other.kind(),
                }),
            }),
            Box::new(|inst, n, cert| match (inst, cert) {
                (Instance::Operator(f), Certificate::Indices(ix)) => {
                    if ix.is_empty() || ix.len() as u64 > n {
                        return Ok(false);
                    }
                    match mpo::rho_entry(f, &TraceWitness(ix.clone())) {
                        Ok(t) => Ok(t < num_bigint::BigInt::zero()),
                        Err(_) => Ok(false),
                    }
                }
                _ => Err(FrameworkError::CertificateMismatch {
                    problem: "bmpo".into(),
                    got: "non-indices".into(),
                }),
            }),
        ));
        r.register(ProblemEntry::new(
            "bpoly",
            "basis-tuple",
            Box::new(|inst, n| match inst {
                // Negativity of the cyclic contraction is witnessed at a
                // standard-basis point tuple, which is exactly a negative
                // trace tuple of the coefficient family.
                Instance::Polynomials(pf) => {
                    Ok(mpo::solve_bmpo(pf.family(), n).map(|w| Certificate::Indices(w.0)))
                }
                other => Err(FrameworkError::MapTypeMismatch {
                    map: "bpoly".into(),
                    got: other.kind(),
                }),
            }),
            Box::new(|inst, n, cert| match (inst, cert) {
                (Instance::Polynomials(pf), Certificate::Indices(ix)) => {
                    if ix.is_empty() || ix.len() as u64 > n {
                        return Ok(false);
                    }
                    // Re-check through the polynomial evaluator, not the
                    // trace route the solver used.
                    let k = pf.vars();
                    if ix.iter().any(|&i| i >= k) {
                        return Ok(false);
                    }
                    let points: Vec<Vec<BigRational>> = ix
                        .iter()
                        .map(|&i| {
                            (0..k)
                                .map(|j| {
                                    if i == j {
                                        BigRational::one()
                                    } else {
                                        BigRational::zero()
                                    }
                                })
                                .collect()
                        })
                        .collect();
                    Ok(mpo::eval_pn(pf, &points)? < BigRational::zero())
                }
                _ => Err(FrameworkError::CertificateMismatch {
                    problem: "bpoly".into(),
                    got: "non-indices".into(),
                }),
            }),
        ));
        r.register(ProblemEntry::new(
            "bstab",
            "contraction-tuple",
            Box::new(|inst, n| match inst {
                Instance::Maps(spec) => {
                    for len in 1..=n {
                        let diag = mpo::apply_stab_diagonal(spec, len)?;
                        let k = spec.maps.len();
                        for (flat, v) in diag.iter().enumerate() {
                            if v < &num_bigint::BigInt::zero() {
                                // Decode the lexicographic tuple index.
                                let mut tuple = vec![0usize; len as usize];
                                let mut rem = flat;
                                for slot in (0..len as usize).rev() {
                                    tuple[slot] = rem % k;
                                    rem /= k;
                                }
                                return Ok(Some(Certificate::Indices(tuple)));
                            }
                        }
                    }
                    Ok(None)
                }
                other => Err(FrameworkError::MapTypeMismatch {
                    map: "bstab".into(),
                    got: other.kind(),
                }),
            }),
            Box::new(|inst, n, cert| match (inst, cert) {
                (Instance::Maps(spec), Certificate::Indices(ix)) => {
                    if ix.is_empty() || ix.len() as u64 > n {
                        return Ok(false);
                    }
                    match mpo::stab_entry(spec, ix) {
                        Ok(v) => Ok(v < num_bigint::BigInt::zero()),
                        Err(_) => Ok(false),
                    }
                }
                _ => Err(FrameworkError::CertificateMismatch {
                    problem: "bstab".into(),
                    got: "non-indices".into(),
                }),
            }),
        ));
        r.register(ProblemEntry::new(
            "btile",
            "exhaustive-check",
            Box::new(|inst, n| match inst {
                Instance::Tiles(ts) => {
                    let radius = u32::try_from(n)
                        .map_err(|_| FrameworkError::BoundOverflow(n.to_string()))?;
                    Ok(match tiling::solve_btile(ts, radius) {
                        TileOutcome::Impossible => Some(Certificate::Exhaustive),
                        TileOutcome::Tiling(_) => None,
                    })
                }
                other => Err(FrameworkError::MapTypeMismatch {
                    map: "btile".into(),
                    got: other.kind(),
                }),
            }),
            Box::new(|inst, n, cert| match (inst, cert) {
                (Instance::Tiles(ts), Certificate::Exhaustive) => {
                    let radius = u32::try_from(n)
                        .map_err(|_| FrameworkError::BoundOverflow(n.to_string()))?;
                    Ok(matches!(
                        tiling::solve_btile(ts, radius),
                        TileOutcome::Impossible
                    ))
                }
                _ => Err(FrameworkError::CertificateMismatch {
                    problem: "btile".into(),
                    got: "non-exhaustive".into(),
                }),
            }),
        ));
        r.register(ProblemEntry::new(
            "bgse",
            "exhaustive-check",
            Box::new(|inst, n| match inst {
                Instance::Spins { model, threshold } => {
                    let radius = u32::try_from(n)
                        .map_err(|_| FrameworkError::BoundOverflow(n.to_string()))?;
                    Ok(
                        if tiling::solve_bgse(model, radius, threshold, 200_000_000)? {
                            Some(Certificate::Exhaustive)
                        } else {
                            None
                        },
                    )
                }
                other => Err(FrameworkError::MapTypeMismatch {
                    map: "bgse".into(),
                    got: other.kind(),
                }),
            }),
            Box::new(|inst, n, cert| match (inst, cert) {
                (Instance::Spins { model, threshold }, Certificate::Exhaustive) => {
                    let radius = u32::try_from(n)
                        .map_err(|_| FrameworkError::BoundOverflow(n.to_string()))?;
                    Ok(tiling::solve_bgse(model, radius, threshold, 200_000_000)?)
                }
                _ => Err(FrameworkError::CertificateMismatch {
                    problem: "bgse".into(),
                    got: "non-exhaustive".into(),
                }),
            }),
        ));

        let arrow = |source: &str, target: &str, map: InstanceMap, coeffs: &[u64]| ReductionArrow {
            source: source.into(),
            target: target.into(),
            map,
            threshold: ThresholdPolynomial::new(coeffs.to_vec()).expect("built-in polynomials"),
        };
        r.arrows.push(arrow("bnhalt", "bpcp", InstanceMap::NhaltToPcp, &[2, 3, 1]));
        r.arrows.push(arrow("bpcp", "bzulc", InstanceMap::PcpToZulc, &[0, 1]));
        r.arrows.push(arrow("bzulc", "bmm", InstanceMap::ZulcToMm, &[2, 1]));
        r.arrows.push(arrow("bzulc", "bmpo", InstanceMap::ZulcToMpo, &[1, 1]));
        r.arrows.push(arrow("bmpo", "bpoly", InstanceMap::MpoToPoly, &[0, 1]));
        r.arrows.push(arrow("bmpo", "bstab", InstanceMap::MpoToStab, &[0, 1]));
        r.arrows.push(arrow(
            "bnhalt-all",
            "btile",
            InstanceMap::NhaltAllToTile,
            &[1, 1],
        ));
        r.arrows.push(arrow("btile", "bgse", InstanceMap::TileToGse, &[0, 1]));
        r
    }

    pub fn register(&mut self, entry: ProblemEntry) {
        self.problems.insert(entry.id.clone(), entry);
    }

    pub fn add_arrow(&mut self, arrow: ReductionArrow) {
        self.arrows.push(arrow);
    }

    pub fn problem(&self, id: &str) -> Result<&ProblemEntry, FrameworkError> {
        self.problems
            .get(id)
            .ok_or_else(|| FrameworkError::UnknownProblem(id.to_string()))
    }

    pub fn problems(&self) -> impl Iterator<Item = &ProblemEntry> {
        self.problems.values()
    }

    pub fn arrows(&self) -> &[ReductionArrow] {
        &self.arrows
    }

    pub fn arrow(&self, source: &str, target: &str) -> Option<&ReductionArrow> {
        self.arrows
            .iter()
            .find(|a| a.source == source && a.target == target)
    }

    /// A composed arrow along the unique registered path between two ids,
    /// if one exists (breadth-first over the arrow graph).
    pub fn arrow_chain(&self, source: &str, target: &str) -> Option<ReductionArrow> {
        if let Some(a) = self.arrow(source, target) {
            return Some(a.clone());
        }
        let mut frontier: Vec<ReductionArrow> = self
            .arrows
            .iter()
            .filter(|a| a.source == source)
            .cloned()
            .collect();
        let mut steps = 0;
        while !frontier.is_empty() && steps < 8 {
            let mut next = Vec::new();
            for partial in &frontier {
                if partial.target == target {
                    return Some(partial.clone());
                }
                for a in self.arrows.iter().filter(|a| a.source == partial.target) {
                    if let Ok(c) = partial.compose(a) {
                        next.push(c);
                    }
                }
            }
            frontier = next;
            steps += 1;
        }
        None
    }

    /// Does the bounded problem accept `(payload, n)`?
    pub fn accepted(&self, id: &str, payload: &Instance, n: u64) -> Result<bool, FrameworkError> {
        Ok((self.problem(id)?.solver)(payload, n)?.is_some())
    }

    /// Runs the bounded solver and returns the certificate, if any.
    pub fn solve(
        &self,
        id: &str,
        payload: &Instance,
        n: u64,
    ) -> Result<Option<Certificate>, FrameworkError> {
        (self.problem(id)?.solver)(payload, n)
    }

    /// Re-checks a certificate from scratch; never consults solver state.
    pub fn verify(
        &self,
        id: &str,
        payload: &Instance,
        n: u64,
        cert: &Certificate,
    ) -> Result<bool, FrameworkError> {
        (self.problem(id)?.verifier)(payload, n, cert)
    }

    /// The smallest accepting bound up to `horizon`.
    ///
    /// Witness-style solvers answer with one call at the horizon (the
    /// returned witness has minimal size); the exhaustive problems scan
    /// upward, which is sound because acceptance is monotone.
    pub fn min_threshold(
        &self,
        id: &str,
        payload: &Instance,
        horizon: u64,
    ) -> Result<Threshold, FrameworkError> {
        match self.solve(id, payload, horizon)? {
            None => Ok(Threshold::NotFoundWithinHorizon),
            Some(cert) => match cert.size() {
                Some(s) => Ok(Threshold::Found(s)),
                None => {
                    // Acceptance is monotone and already known at the
                    // horizon; scan the smaller bounds only.
                    for n in 0..horizon {
                        if self.accepted(id, payload, n)? {
                            return Ok(Threshold::Found(n));
                        }
                    }
                    Ok(Threshold::Found(horizon))
                }
            },
        }
    }

    /// Verifies acceptance monotonicity in `n` for one instance.
    pub fn check_bounded_axioms(
        &self,
        id: &str,
        payload: &Instance,
        horizon: u64,
    ) -> Result<AxiomReport, FrameworkError> {
        let mut accepted = Vec::with_capacity(horizon as usize + 1);
        for n in 0..=horizon {
            accepted.push(self.accepted(id, payload, n)?);
        }
        let first_violation = accepted
            .windows(2)
            .position(|w| w[0] && !w[1])
            .map(|i| i as u64);
        Ok(AxiomReport {
            horizon,
            accepted,
            first_violation,
        })
    }
}

// ---------------------------------------------------------------------------
// Registry manifest
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
pub struct ManifestProblem {
    pub id: String,
    #[serde(rename = "certificate-kind")]
    pub certificate_kind: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ManifestArrow {
    pub source: String,
    pub target: String,
    #[serde(rename = "map-id")]
    pub map_id: String,
    /// Coefficients, constant term first.
    pub polynomial: Vec<u64>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RegistryManifest {
    pub problems: Vec<ManifestProblem>,
    pub arrows: Vec<ManifestArrow>,
}

impl Registry {
    pub fn manifest(&self) -> RegistryManifest {
        RegistryManifest {
            problems: self
                .problems
                .values()
                .map(|p| ManifestProblem {
                    id: p.id.clone(),
                    certificate_kind: p.certificate_kind.clone(),
                })
                .collect(),
            arrows: self
                .arrows
                .iter()
                .map(|a| ManifestArrow {
                    source: a.source.clone(),
                    target: a.target.clone(),
                    map_id: a.map.id(),
                    polynomial: a
                        .threshold
                        .coeffs()
                        .iter()
                        .map(|c| u64::try_from(c).unwrap_or(u64::MAX))
                        .collect(),
                })
                .collect(),
        }
    }

    /// Validates a manifest against this registry: every problem id and
    /// map id must be known, and arrows are rebuilt from it.
    pub fn arrows_from_manifest(
        &self,
        m: &RegistryManifest,
    ) -> Result<Vec<ReductionArrow>, FrameworkError> {
        for p in &m.problems {
            self.problem(&p.id)?;
        }
        m.arrows
            .iter()
            .map(|a| {
                self.problem(&a.source)?;
                self.problem(&a.target)?;
                Ok(ReductionArrow {
                    source: a.source.clone(),
                    target: a.target.clone(),
                    map: InstanceMap::from_id(&a.map_id)?,
                    threshold: ThresholdPolynomial::new(a.polynomial.clone())?,
                })
            })
            .collect()
    }
}
