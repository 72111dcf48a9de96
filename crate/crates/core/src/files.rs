//! Schema-versioned JSON envelopes for instances, certificates, corpora and
//! reports.
//!
//! Every file carries a top-level `"schema"` field of the form
//! `"<kind>/<version>"`. Instance payloads follow the per-problem formats of
//! the owning modules.

use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::framework::{Certificate, Instance};
use crate::matsem::{MatrixFamily, MatrixFamilyJson};
use crate::mpo::{MpoFamily, PolyJson, PolynomialFamily, PositiveMapSpec, StabJson};
use crate::pcp::{PcpInstance, PcpJson, WitnessJson};
use crate::tiling::{SpinModel, SpinModelJson, TileSet, TileSetJson};
use crate::turing::{ComputationPath, Ntm, NtmJson};

pub const INSTANCE_SCHEMA: &str = "instance/1";
pub const CORPUS_SCHEMA: &str = "corpus/1";
pub const CERTIFICATE_SCHEMA: &str = "certificate/1";
pub const REPORT_SCHEMA: &str = "report/1";
pub const REGISTRY_SCHEMA: &str = "registry/1";

#[derive(Debug, Error)]
pub enum FileError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("expected schema {expected:?}, found {found:?}")]
    SchemaMismatch { expected: String, found: String },
    #[error("unknown problem id {0:?}")]
    UnknownProblem(String),
    #[error("payload does not fit problem {0:?}: {1}")]
    BadPayload(String, String),
    #[error("certificate kind {0:?} is not recognised")]
    BadCertificate(String),
}

/// A problem instance with an optional bound.
#[derive(Debug, Serialize, Deserialize)]
pub struct InstanceFile {
    pub schema: String,
    pub problem: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<u64>,
    pub payload: Value,
}

/// A list of machine descriptions.
#[derive(Debug, Serialize, Deserialize)]
pub struct CorpusFile {
    pub schema: String,
    pub machines: Vec<NtmJson>,
}

/// A certificate for one problem.
#[derive(Debug, Serialize, Deserialize)]
pub struct CertificateFile {
    pub schema: String,
    pub problem: String,
    pub kind: String,
    pub payload: Value,
}

fn check_schema(found: &str, expected: &str) -> Result<(), FileError> {
    if found != expected {
        return Err(FileError::SchemaMismatch {
            expected: expected.to_string(),
            found: found.to_string(),
        });
    }
    Ok(())
}

fn bad(problem: &str, err: impl std::fmt::Display) -> FileError {
    FileError::BadPayload(problem.to_string(), err.to_string())
}

/// Decodes an instance payload according to the problem id.
pub fn parse_instance(problem: &str, payload: &Value) -> Result<Instance, FileError> {
    match problem {
        "bnhalt" | "bnhalt-all" => {
            let j: NtmJson = serde_json::from_value(payload.clone())?;
            Ok(Instance::Machine(
                Ntm::from_json(&j).map_err(|e| bad(problem, e))?,
            ))
        }
        "bpcp" => {
            let j: PcpJson = serde_json::from_value(payload.clone())?;
            Ok(Instance::Correspondence(
                PcpInstance::from_json(&j).map_err(|e| bad(problem, e))?,
            ))
        }
        "bzulc" | "bmm" => {
            let j: MatrixFamilyJson = serde_json::from_value(payload.clone())?;
            Ok(Instance::Matrices(
                MatrixFamily::from_json(&j).map_err(|e| bad(problem, e))?,
            ))
        }
        "bmpo" => {
            let j: crate::mpo::MpoJson = serde_json::from_value(payload.clone())?;
            Ok(Instance::Operator(
                MpoFamily::from_json(&j).map_err(|e| bad(problem, e))?,
            ))
        }
        "bpoly" => {
            let j: PolyJson = serde_json::from_value(payload.clone())?;
            Ok(Instance::Polynomials(
                PolynomialFamily::from_json(&j).map_err(|e| bad(problem, e))?,
            ))
        }
        "bstab" => {
            let j: StabJson = serde_json::from_value(payload.clone())?;
            Ok(Instance::Maps(
                PositiveMapSpec::from_json(&j).map_err(|e| bad(problem, e))?,
            ))
        }
        "btile" => {
            let j: TileSetJson = serde_json::from_value(payload.clone())?;
            Ok(Instance::Tiles(
                TileSet::from_json(&j).map_err(|e| bad(problem, e))?,
            ))
        }
        "bgse" => {
            #[derive(Deserialize)]
            struct GseJson {
                model: SpinModelJson,
                #[serde(default)]
                threshold: Option<String>,
            }
            let j: GseJson = serde_json::from_value(payload.clone())?;
            let threshold = match j.threshold {
                None => BigRational::from_integer(0.into()),
                Some(s) => s
                    .parse::<BigRational>()
                    .map_err(|e| bad(problem, format!("threshold {s:?}: {e}")))?,
            };
            Ok(Instance::Spins {
                model: SpinModel::from_json(&j.model).map_err(|e| bad(problem, e))?,
                threshold,
            })
        }
        other => Err(FileError::UnknownProblem(other.to_string())),
    }
}

/// Encodes an instance payload for the problem that owns it.
pub fn render_instance(inst: &Instance) -> Value {
    match inst {
        Instance::Machine(m) => serde_json::to_value(m.to_json()).unwrap(),
        Instance::Correspondence(p) => serde_json::to_value(p.to_json()).unwrap(),
        Instance::Matrices(f) => serde_json::to_value(f.to_json()).unwrap(),
        Instance::Operator(f) => serde_json::to_value(f.to_json()).unwrap(),
        Instance::Polynomials(pf) => serde_json::to_value(pf.to_json()).unwrap(),
        Instance::Maps(spec) => serde_json::to_value(spec.to_json()).unwrap(),
        Instance::Tiles(ts) => serde_json::to_value(ts.to_json()).unwrap(),
        Instance::Spins { model, threshold } => serde_json::json!({
            "model": model.to_json(),
            "threshold": threshold.to_string(),
        }),
    }
}

pub fn instance_file(problem: &str, inst: &Instance, bound: Option<u64>) -> InstanceFile {
    InstanceFile {
        schema: INSTANCE_SCHEMA.into(),
        problem: problem.into(),
        bound,
        payload: render_instance(inst),
    }
}

pub fn read_instance_file(text: &str) -> Result<(InstanceFile, Instance), FileError> {
    let file: InstanceFile = serde_json::from_str(text)?;
    check_schema(&file.schema, INSTANCE_SCHEMA)?;
    let inst = parse_instance(&file.problem, &file.payload)?;
    Ok((file, inst))
}

pub fn corpus_file(machines: &[Ntm]) -> CorpusFile {
    CorpusFile {
        schema: CORPUS_SCHEMA.into(),
        machines: machines.iter().map(|m| m.to_json()).collect(),
    }
}

pub fn read_corpus_file(text: &str) -> Result<Vec<Ntm>, FileError> {
    let file: CorpusFile = serde_json::from_str(text)?;
    check_schema(&file.schema, CORPUS_SCHEMA)?;
    file.machines
        .iter()
        .map(|j| Ntm::from_json(j).map_err(|e| bad("corpus", e)))
        .collect()
}

/// Renders a certificate; paths and index sequences serialize as 1-based
/// index lists, exhaustive checks as a marker object.
pub fn certificate_file(problem: &str, kind: &str, cert: &Certificate) -> CertificateFile {
    let payload = match cert {
        Certificate::Path(p) => serde_json::json!({ "choices": p.0 }),
        Certificate::Indices(ix) => serde_json::to_value(WitnessJson {
            indices: ix.iter().map(|i| i + 1).collect(),
        })
        .unwrap(),
        Certificate::Exhaustive => serde_json::json!({ "exhaustive": true }),
    };
    CertificateFile {
        schema: CERTIFICATE_SCHEMA.into(),
        problem: problem.into(),
        kind: kind.into(),
        payload,
    }
}

pub fn read_certificate_file(text: &str) -> Result<(CertificateFile, Certificate), FileError> {
    let file: CertificateFile = serde_json::from_str(text)?;
    check_schema(&file.schema, CERTIFICATE_SCHEMA)?;
    let cert = match file.kind.as_str() {
        "computation-path" => {
            #[derive(Deserialize)]
            struct PathJson {
                choices: Vec<usize>,
            }
            let p: PathJson = serde_json::from_value(file.payload.clone())?;
            Certificate::Path(ComputationPath(p.choices))
        }
        "domino-sequence" | "product-sequence" | "trace-tuple" | "basis-tuple"
        | "contraction-tuple" => {
            let w: WitnessJson = serde_json::from_value(file.payload.clone())?;
            let mut ix = Vec::with_capacity(w.indices.len());
            for i in w.indices {
                if i == 0 {
                    return Err(FileError::BadCertificate("0-based index".into()));
                }
                ix.push(i - 1);
            }
            Certificate::Indices(ix)
        }
        "exhaustive-check" => Certificate::Exhaustive,
        other => return Err(FileError::BadCertificate(other.to_string())),
    };
    Ok((file, cert))
}
