//! Instance files: a JSON description of a pointed metric space with a
//! generating set of bijections, plus harness parameters.
//!
//! ```json
//! {
//!   "points": ["0", "a", "b"],
//!   "base": "0",
//!   "metric": [[0, 1, 1], [1, 0, 2], [1, 2, 0]],
//!   "generators": [["0", "b", "a"]],
//!   "mode": "exact",
//!   "seed": 7,
//!   "trials": 20
//! }
//! ```
//!
//! The metric is either a full distance matrix (entries are JSON numbers
//! or `"p/q"` fraction strings) or an object
//! `{"coords": [[x, y, ...], ...], "p": 1 | 2 | "inf"}` asking for the
//! Minkowski distance on the listed coordinates. Each generator lists the
//! image of every point, in point order, by label. `generators`, `seed`
//! and `trials` may be omitted (no generators means the trivial group);
//! `mode` selects exact rational arithmetic (`"exact"`, the default) or
//! `f64` with the standard relative tolerance (`"float"`).
//!
//! Decimal literals are parsed exactly in exact mode (`0.25` means `1/4`),
//! so the same file can be run under both backends. Euclidean coordinates
//! (`"p": 2`) require float mode; the square roots involved have no exact
//! rational representation.
//!
//! Loading is strict: [`load_instance`] rejects any structural or semantic
//! problem. The verification harness instead uses [`parse_for_verify`],
//! which distinguishes files too malformed to report on from structurally
//! sound instances whose metric or group data fail validation — the latter
//! still produce a (failing) report.

use std::path::Path;

use num::BigRational;
use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::group::{ActingGroup, GroupError, PointBijection, DEFAULT_CLOSURE_LIMIT};
use crate::metric::{MetricError, Minkowski, PointedMetricSpace};
use crate::scalar::Scalar;

/// Default number of randomized trials per check when a file does not say.
pub const DEFAULT_TRIALS: u32 = 20;

#[derive(Debug, thiserror::Error)]
pub enum InstanceError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("malformed JSON: {0}")]
    Json(String),
    #[error("mode must be \"exact\" or \"float\", got {0:?}")]
    BadMode(String),
    #[error("duplicate point label {0:?}")]
    DuplicateLabel(String),
    #[error("unknown point label {0:?}")]
    UnknownLabel(String),
    #[error("cannot parse scalar {0:?}")]
    BadScalar(String),
    #[error("exponent of a Minkowski metric must be 1, 2 or \"inf\"")]
    BadExponent,
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Group(#[from] GroupError),
}

#[derive(Deserialize)]
struct RawInstance {
    points: Vec<String>,
    base: String,
    metric: RawMetric,
    #[serde(default)]
    generators: Vec<Vec<String>>,
    mode: Option<String>,
    #[serde(default)]
    seed: u64,
    trials: Option<u32>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawMetric {
    Matrix(Vec<Vec<serde_json::Value>>),
    Coords { coords: Vec<Vec<serde_json::Value>>, p: serde_json::Value },
}

/// A fully validated instance over one scalar backend.
#[derive(Debug, Clone)]
pub struct Instance<S> {
    pub space: PointedMetricSpace<S>,
    pub group: ActingGroup,
    pub seed: u64,
    pub trials: u32,
    /// SHA-256 of the source bytes, hex-encoded; identifies the instance
    /// in reports.
    pub hash: String,
}

/// An instance under whichever backend its `mode` selected.
#[derive(Debug, Clone)]
pub enum AnyInstance {
    Exact(Instance<BigRational>),
    Float(Instance<f64>),
}

impl AnyInstance {
    pub fn mode(&self) -> &'static str {
        match self {
            AnyInstance::Exact(_) => "exact",
            AnyInstance::Float(_) => "float",
        }
    }

    pub fn hash(&self) -> &str {
        match self {
            AnyInstance::Exact(i) => &i.hash,
            AnyInstance::Float(i) => &i.hash,
        }
    }
}

/// Outcome of the lenient parse used by the verification harness.
#[derive(Debug)]
pub enum VerifyTarget {
    /// Structurally and semantically sound; ready to run checks on.
    Ready(AnyInstance),
    /// Structurally sound JSON whose metric or group failed validation;
    /// enough survives to emit a report that fails at the validation gate.
    Invalid { hash: String, mode: &'static str, error: InstanceError },
}

fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for byte in digest {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}

fn scalar_from_json<S: Scalar>(value: &serde_json::Value) -> Result<S, InstanceError> {
    let text = match value {
        serde_json::Value::Number(n) => n.to_string(),
        serde_json::Value::String(s) => s.clone(),
        other => other.to_string(),
    };
    S::parse(&text).map_err(|_| InstanceError::BadScalar(text))
}

fn index_of(points: &[String], label: &str) -> Result<usize, InstanceError> {
    points
        .iter()
        .position(|p| p == label)
        .ok_or_else(|| InstanceError::UnknownLabel(label.to_string()))
}

/// Checks performed before any metric/group semantics: well-formed JSON,
/// known mode, distinct labels, resolvable base and generator labels,
/// parseable scalars. Failures here leave nothing worth reporting on.
struct Checked<S> {
    labels: Vec<String>,
    base: String,
    metric: CheckedMetric<S>,
    /// Image index lists; bijectivity is a semantic concern.
    generators: Vec<Vec<usize>>,
    seed: u64,
    trials: u32,
}

enum CheckedMetric<S> {
    Matrix(Vec<Vec<S>>),
    Coords(Vec<Vec<S>>, Minkowski),
}

fn structural_pass<S: Scalar>(raw: &RawInstance) -> Result<Checked<S>, InstanceError> {
    for (i, label) in raw.points.iter().enumerate() {
        if raw.points[..i].contains(label) {
            return Err(InstanceError::DuplicateLabel(label.clone()));
        }
    }
    index_of(&raw.points, &raw.base)?;
    let metric = match &raw.metric {
        RawMetric::Matrix(rows) => {
            let mut matrix = Vec::with_capacity(rows.len());
            for row in rows {
                let parsed: Result<Vec<S>, _> = row.iter().map(scalar_from_json).collect();
                matrix.push(parsed?);
            }
            CheckedMetric::Matrix(matrix)
        }
        RawMetric::Coords { coords, p } => {
            let exponent = match p {
                serde_json::Value::Number(n) if n.to_string() == "1" => Minkowski::One,
                serde_json::Value::Number(n) if n.to_string() == "2" => Minkowski::Two,
                serde_json::Value::String(s) if s == "inf" => Minkowski::Inf,
                _ => return Err(InstanceError::BadExponent),
            };
            let mut parsed_coords = Vec::with_capacity(coords.len());
            for row in coords {
                let parsed: Result<Vec<S>, _> = row.iter().map(scalar_from_json).collect();
                parsed_coords.push(parsed?);
            }
            CheckedMetric::Coords(parsed_coords, exponent)
        }
    };
    let mut generators = Vec::with_capacity(raw.generators.len());
    for images in &raw.generators {
        if images.len() != raw.points.len() {
            return Err(GroupError::WrongLength {
                expected: raw.points.len(),
                got: images.len(),
            }
            .into());
        }
        let indices: Result<Vec<usize>, _> =
            images.iter().map(|label| index_of(&raw.points, label)).collect();
        generators.push(indices?);
    }
    Ok(Checked {
        labels: raw.points.clone(),
        base: raw.base.clone(),
        metric,
        generators,
        seed: raw.seed,
        trials: raw.trials.unwrap_or(DEFAULT_TRIALS),
    })
}

/// The semantic pass: metric axioms and group closure. Failures here are
/// reportable by the verification harness.
fn semantic_pass<S: Scalar>(
    checked: Checked<S>,
    hash: String,
) -> Result<Instance<S>, InstanceError> {
    let space = match checked.metric {
        CheckedMetric::Matrix(matrix) => {
            PointedMetricSpace::new(checked.labels, &checked.base, matrix)?
        }
        CheckedMetric::Coords(coords, p) => {
            PointedMetricSpace::from_coords(checked.labels, &checked.base, &coords, p)?
        }
    };
    let group = if checked.generators.is_empty() {
        ActingGroup::trivial(space.n())
    } else {
        let bijections: Result<Vec<PointBijection>, GroupError> = checked
            .generators
            .into_iter()
            .map(PointBijection::from_images)
            .collect();
        ActingGroup::close_generators(bijections?, DEFAULT_CLOSURE_LIMIT)?
    };
    Ok(Instance { space, group, seed: checked.seed, trials: checked.trials, hash })
}

fn mode_of(raw: &RawInstance) -> Result<&'static str, InstanceError> {
    match raw.mode.as_deref() {
        None | Some("exact") => Ok("exact"),
        Some("float") => Ok("float"),
        Some(other) => Err(InstanceError::BadMode(other.to_string())),
    }
}

/// Loads and fully validates an instance from JSON text.
pub fn load_instance_str(text: &str) -> Result<AnyInstance, InstanceError> {
    let hash = sha256_hex(text.as_bytes());
    let raw: RawInstance =
        serde_json::from_str(text).map_err(|e| InstanceError::Json(e.to_string()))?;
    match mode_of(&raw)? {
        "exact" => Ok(AnyInstance::Exact(semantic_pass(structural_pass(&raw)?, hash)?)),
        _ => Ok(AnyInstance::Float(semantic_pass(structural_pass(&raw)?, hash)?)),
    }
}

/// Loads and fully validates an instance file.
pub fn load_instance(path: &Path) -> Result<AnyInstance, InstanceError> {
    let text = std::fs::read_to_string(path).map_err(|e| InstanceError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    load_instance_str(&text)
}

/// Lenient parse for the verification harness: structural problems are
/// hard errors, semantic validation failures yield a reportable
/// [`VerifyTarget::Invalid`].
pub fn parse_for_verify_str(text: &str) -> Result<VerifyTarget, InstanceError> {
    let hash = sha256_hex(text.as_bytes());
    let raw: RawInstance =
        serde_json::from_str(text).map_err(|e| InstanceError::Json(e.to_string()))?;
    let mode = mode_of(&raw)?;
    match mode {
        "exact" => {
            let checked = structural_pass::<BigRational>(&raw)?;
            match semantic_pass(checked, hash.clone()) {
                Ok(instance) => Ok(VerifyTarget::Ready(AnyInstance::Exact(instance))),
                Err(error) => Ok(VerifyTarget::Invalid { hash, mode, error }),
            }
        }
        _ => {
            let checked = structural_pass::<f64>(&raw)?;
            match semantic_pass(checked, hash.clone()) {
                Ok(instance) => Ok(VerifyTarget::Ready(AnyInstance::Float(instance))),
                Err(error) => Ok(VerifyTarget::Invalid { hash, mode, error }),
            }
        }
    }
}

/// File variant of [`parse_for_verify_str`].
pub fn parse_for_verify(path: &Path) -> Result<VerifyTarget, InstanceError> {
    let text = std::fs::read_to_string(path).map_err(|e| InstanceError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_for_verify_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    const SWAP: &str = r#"{
        "points": ["0", "a", "b"],
        "base": "0",
        "metric": [[0, 1, 1], [1, 0, 2], [1, 2, 0]],
        "generators": [["0", "b", "a"]],
        "mode": "exact",
        "seed": 7
    }"#;

    #[test]
    fn loads_the_swap_example() {
        let AnyInstance::Exact(instance) = load_instance_str(SWAP).unwrap() else {
            panic!("exact mode expected");
        };
        assert_eq!(instance.space.n(), 3);
        assert_eq!(instance.group.order(), 2);
        assert_eq!(instance.seed, 7);
        assert_eq!(instance.trials, DEFAULT_TRIALS);
        assert_eq!(instance.hash.len(), 64);
        assert_eq!(instance.space.d(1, 2), &rat(2, 1));
    }

    #[test]
    fn minimal_singleton_instance_loads_with_defaults() {
        let text = r#"{"points": ["0"], "base": "0", "metric": [[0]]}"#;
        let AnyInstance::Exact(instance) = load_instance_str(text).unwrap() else {
            panic!("exact is the default mode");
        };
        assert_eq!(instance.space.n(), 1);
        assert_eq!(instance.group.order(), 1);
        assert_eq!(instance.seed, 0);
    }

    #[test]
    fn decimals_and_fractions_parse_exactly() {
        let text = r#"{
            "points": ["0", "a"],
            "base": "0",
            "metric": [[0, "3/4"], ["0.75", 0]],
            "mode": "exact"
        }"#;
        let AnyInstance::Exact(instance) = load_instance_str(text).unwrap() else {
            panic!("exact mode expected");
        };
        assert_eq!(instance.space.d(0, 1), &rat(3, 4));
    }

    #[test]
    fn coordinate_metrics_build_minkowski_distances() {
        let text = r#"{
            "points": ["p0", "p1", "p2"],
            "base": "p0",
            "metric": {"coords": [[0, 0], [1, 0], [0, 2]], "p": 1},
            "mode": "exact"
        }"#;
        let AnyInstance::Exact(instance) = load_instance_str(text).unwrap() else {
            panic!("exact mode expected");
        };
        assert_eq!(instance.space.d(1, 2), &rat(3, 1));
    }

    #[test]
    fn euclidean_coords_need_float_mode() {
        let exact = r#"{
            "points": ["p0", "p1"],
            "base": "p0",
            "metric": {"coords": [[0, 0], [1, 1]], "p": 2},
            "mode": "exact"
        }"#;
        assert!(matches!(
            load_instance_str(exact),
            Err(InstanceError::Metric(MetricError::EuclideanNeedsFloat))
        ));
        let float = exact.replace("\"exact\"", "\"float\"");
        let AnyInstance::Float(instance) = load_instance_str(&float).unwrap() else {
            panic!("float mode expected");
        };
        assert!((instance.space.d(0, 1) - 2.0_f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn structural_problems_are_hard_errors_even_for_verify() {
        let cases = [
            ("not json at all", "Json"),
            (r#"{"points": ["0", "0"], "base": "0", "metric": [[0,1],[1,0]]}"#, "DuplicateLabel"),
            (r#"{"points": ["0"], "base": "x", "metric": [[0]]}"#, "UnknownLabel"),
            (r#"{"points": ["0"], "base": "0", "metric": [[0]], "mode": "both"}"#, "BadMode"),
            (r#"{"points": ["0", "a"], "base": "0", "metric": [[0, "x"], ["x", 0]]}"#, "BadScalar"),
            (r#"{"points": ["0"], "base": "0", "metric": {"coords": [[0]], "p": 3}}"#, "BadExponent"),
            (r#"{"points": ["0", "a"], "base": "0", "metric": [[0,1],[1,0]], "generators": [["0","z"]]}"#, "UnknownLabel"),
        ];
        for (text, expected) in cases {
            let err = parse_for_verify_str(text).unwrap_err();
            assert!(
                format!("{err:?}").starts_with(expected),
                "expected {expected} for {text}: got {err:?}"
            );
        }
    }

    #[test]
    fn semantic_problems_stay_reportable_for_verify() {
        // d(0,b)=5 > d(0,a)+d(a,b)=3 violates the triangle inequality.
        let bad_metric = r#"{
            "points": ["0", "a", "b"],
            "base": "0",
            "metric": [[0, 1, 5], [1, 0, 2], [5, 2, 0]]
        }"#;
        assert!(load_instance_str(bad_metric).is_err());
        match parse_for_verify_str(bad_metric).unwrap() {
            VerifyTarget::Invalid { mode, error, hash } => {
                assert_eq!(mode, "exact");
                assert_eq!(hash.len(), 64);
                assert!(matches!(
                    error,
                    InstanceError::Metric(MetricError::TriangleViolation { .. })
                ));
            }
            VerifyTarget::Ready(_) => panic!("triangle violation must not be Ready"),
        }

        // A non-bijective "generator" is likewise semantic.
        let bad_generator = r#"{
            "points": ["0", "a"],
            "base": "0",
            "metric": [[0, 1], [1, 0]],
            "generators": [["a", "a"]]
        }"#;
        assert!(matches!(
            parse_for_verify_str(bad_generator).unwrap(),
            VerifyTarget::Invalid { error: InstanceError::Group(_), .. }
        ));
    }

    #[test]
    fn identical_text_hashes_identically_and_differs_otherwise() {
        let a = load_instance_str(SWAP).unwrap();
        let b = load_instance_str(SWAP).unwrap();
        assert_eq!(a.hash(), b.hash());
        let other = load_instance_str(&SWAP.replace("\"seed\": 7", "\"seed\": 8")).unwrap();
        assert_ne!(a.hash(), other.hash());
    }
}
