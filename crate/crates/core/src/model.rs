//! JSON model files.
//!
//! Every file is an object with a `"kind"` field; matrices are nested
//! row-major arrays and rational functions are `{"num": […], "den": […]}`
//! with coefficients in ascending powers. A machine report that embeds a
//! model under `"model"` loads as that model.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kyp::{KypInstance, KypMode};
use crate::linalg::Matrix;
use crate::performance::{Direction, PositiveStateSpace};
use crate::posdom::{DominatedProblem, RationalTransferMatrix};
use crate::power::PowerNetwork;
use crate::pqp::PqpInstance;
use crate::stability::TimeDomain;
use crate::synthesis::SynthesisProblem;

fn empty() -> Matrix {
    Matrix::zeros(0, 0)
}

fn is_empty(m: &Matrix) -> bool {
    m.rows() == 0 || m.cols() == 0
}

/// An empty matrix takes the shape implied by its neighbours.
fn fit(m: &mut Matrix, rows: usize, cols: usize) {
    if is_empty(m) {
        *m = Matrix::zeros(rows, cols);
    }
}

fn fit_tf(m: &mut RationalTransferMatrix, rows: usize, cols: usize) {
    if m.rows() == 0 || m.cols() == 0 {
        *m = RationalTransferMatrix::zeros(rows, cols);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSpaceModel {
    pub a: Matrix,
    #[serde(default = "empty")]
    pub b: Matrix,
    #[serde(default = "empty")]
    pub c: Matrix,
    #[serde(default = "empty")]
    pub d: Matrix,
    #[serde(default)]
    pub time_domain: TimeDomain,
    /// Candidate certificate to check.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi: Option<Vec<f64>>,
}

impl StateSpaceModel {
    fn normalize(&mut self) {
        let n = self.a.rows();
        fit(&mut self.b, n, 0);
        fit(&mut self.c, 0, n);
        fit(&mut self.d, self.c.rows(), self.b.cols());
    }

    pub fn system(&self) -> Result<PositiveStateSpace> {
        PositiveStateSpace::new(self.a.clone(), self.b.clone(), self.c.clone(), self.d.clone(), self.time_domain)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisModel {
    pub a: Matrix,
    #[serde(default = "empty")]
    pub b: Matrix,
    #[serde(default = "empty")]
    pub c: Matrix,
    #[serde(default = "empty")]
    pub d: Matrix,
    pub e: Matrix,
    pub f: Matrix,
    #[serde(default = "empty")]
    pub g: Matrix,
    #[serde(default = "empty")]
    pub h: Matrix,
    #[serde(default = "default_direction")]
    pub direction: Direction,
    /// Upper bound per gain; all ones when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unbounded: Option<Vec<bool>>,
    /// Fixed gains to verify instead of synthesizing.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gains: Option<Vec<f64>>,
}

fn default_direction() -> Direction {
    Direction::Linf
}

impl SynthesisModel {
    fn normalize(&mut self) {
        let n = self.a.rows();
        fit(&mut self.b, n, 0);
        fit(&mut self.c, 0, n);
        fit(&mut self.d, self.c.rows(), self.b.cols());
        fit(&mut self.g, self.c.rows(), self.e.cols());
        fit(&mut self.h, self.e.cols(), self.b.cols());
    }

    pub fn from_problem(p: &SynthesisProblem) -> Self {
        let mut m = Self {
            a: p.a.clone(),
            b: p.b.clone(),
            c: p.c.clone(),
            d: p.d.clone(),
            e: p.e.clone(),
            f: p.f.clone(),
            g: p.g.clone(),
            h: p.h.clone(),
            direction: p.direction,
            bounds: Some(p.bounds.clone()),
            unbounded: p.unbounded.iter().any(|u| *u).then(|| p.unbounded.clone()),
            gains: None,
        };
        m.normalize();
        m
    }

    pub fn problem(&self) -> Result<SynthesisProblem> {
        let mut p = SynthesisProblem::new(
            self.a.clone(),
            self.b.clone(),
            self.c.clone(),
            self.d.clone(),
            self.e.clone(),
            self.f.clone(),
            self.g.clone(),
            self.h.clone(),
            self.direction,
        )?;
        let m = p.num_gains();
        if let Some(b) = &self.bounds {
            if b.len() != m {
                return Err(Error::Model(format!("field `bounds`: expected {m} entries, got {}", b.len())));
            }
            p.bounds = b.clone();
        }
        if let Some(u) = &self.unbounded {
            if u.len() != m {
                return Err(Error::Model(format!("field `unbounded`: expected {m} entries, got {}", u.len())));
            }
            p.unbounded = u.clone();
        }
        if let Some(g) = &self.gains {
            if g.len() != m {
                return Err(Error::Model(format!("field `gains`: expected {m} entries, got {}", g.len())));
            }
        }
        p.check_dimensions()?;
        Ok(p)
    }
}

/// Either a single transfer matrix (dominance test) or a dominated
/// interconnection (synthesis).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferMatrixModel {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<RationalTransferMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub problem: Option<DominatedProblem>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gains: Option<Vec<f64>>,
}

impl TransferMatrixModel {
    fn normalize(&mut self) {
        if let Some(p) = &mut self.problem {
            let n = p.a.rows();
            fit_tf(&mut p.b, n, 0);
            fit_tf(&mut p.c, 0, n);
            let (l, k) = (p.c.rows(), p.b.cols());
            fit_tf(&mut p.d, l, k);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KypModel {
    pub a: Matrix,
    pub b: Matrix,
    pub q: Matrix,
    #[serde(default)]
    pub time_domain: TimeDomain,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<KypMode>,
}

impl KypModel {
    pub fn instance(&self) -> Result<KypInstance> {
        KypInstance::new(self.a.clone(), self.b.clone(), self.q.clone(), self.time_domain)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PqpModel {
    pub objective: Matrix,
    #[serde(default)]
    pub constraints: Vec<Matrix>,
    #[serde(default)]
    pub bounds: Vec<f64>,
}

impl PqpModel {
    pub fn instance(&self) -> Result<PqpInstance> {
        PqpInstance::new(self.objective.clone(), self.constraints.clone(), self.bounds.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelFile {
    StateSpace(StateSpaceModel),
    Synthesis(SynthesisModel),
    TransferMatrix(TransferMatrixModel),
    Kyp(KypModel),
    Pqp(PqpModel),
    PowerNetwork(PowerNetwork),
}

#[derive(Deserialize)]
struct Header {
    kind: Option<String>,
    model: Option<serde_json::Value>,
}

/// Body of a model file; `"kind"` is the only key the body may not know.
fn body<T: DeserializeOwned + Serialize>(text: &str) -> Result<T> {
    let mut de = serde_json::Deserializer::from_str(text);
    let parsed: T = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        json_error(e.inner(), &path)
    })?;
    let given: serde_json::Value = serde_json::from_str(text).map_err(|e| json_error(&e, ""))?;
    let known = serde_json::to_value(&parsed).expect("model serializes");
    if let (Some(given), Some(known)) = (given.as_object(), known.as_object()) {
        if let Some(key) = given.keys().find(|k| *k != "kind" && !known.contains_key(*k) && !given[*k].is_null()) {
            return Err(Error::Model(format!("unknown field `{key}`")));
        }
    }
    Ok(parsed)
}

fn json_error(e: &serde_json::Error, path: &str) -> Error {
    let at = if path.is_empty() || path == "." { String::new() } else { format!(" at `{path}`") };
    if e.line() > 0 {
        Error::Model(format!("line {} column {}{at}: {e}", e.line(), e.column()))
    } else {
        Error::Model(format!("{e}{at}"))
    }
}

impl ModelFile {
    pub fn kind(&self) -> &'static str {
        match self {
            ModelFile::StateSpace(_) => "state_space",
            ModelFile::Synthesis(_) => "synthesis",
            ModelFile::TransferMatrix(_) => "transfer_matrix",
            ModelFile::Kyp(_) => "kyp",
            ModelFile::Pqp(_) => "pqp",
            ModelFile::PowerNetwork(_) => "power_network",
        }
    }

    /// Parses, normalizes empty blocks and re-checks module invariants.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let header: Header = serde_json::from_str(text).map_err(|e| json_error(&e, ""))?;
        let kind = match (header.kind, header.model) {
            (Some(k), _) => k,
            (None, Some(inner)) => return Self::from_json_str(&serde_json::to_string(&inner).expect("JSON value")),
            (None, None) => return Err(Error::Model("missing field `kind`".into())),
        };
        let mut model = match kind.as_str() {
            "state_space" => ModelFile::StateSpace(body(text)?),
            "synthesis" => ModelFile::Synthesis(body(text)?),
            "transfer_matrix" => ModelFile::TransferMatrix(body(text)?),
            "kyp" => ModelFile::Kyp(body(text)?),
            "pqp" => ModelFile::Pqp(body(text)?),
            "power_network" => ModelFile::PowerNetwork(body(text)?),
            other => {
                return Err(Error::Model(format!(
                    "field `kind`: unknown value `{other}`, expected one of state_space, synthesis, \
                     transfer_matrix, kyp, pqp, power_network"
                )))
            }
        };
        model.normalize();
        model.validate()?;
        Ok(model)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Model(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("model serializes")
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    fn normalize(&mut self) {
        match self {
            ModelFile::StateSpace(m) => m.normalize(),
            ModelFile::Synthesis(m) => m.normalize(),
            ModelFile::TransferMatrix(m) => m.normalize(),
            _ => {}
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ModelFile::StateSpace(m) => {
                m.system()?;
                match &m.xi {
                    Some(xi) if xi.len() != m.a.rows() => Err(Error::Model(format!(
                        "field `xi`: expected {} entries, got {}",
                        m.a.rows(),
                        xi.len()
                    ))),
                    _ => Ok(()),
                }
            }
            ModelFile::Synthesis(m) => m.problem().map(|_| ()),
            ModelFile::TransferMatrix(m) => {
                if m.matrix.is_none() && m.problem.is_none() {
                    return Err(Error::Model("transfer_matrix needs `matrix` or `problem`".into()));
                }
                if let Some(p) = &m.problem {
                    p.check_dimensions()?;
                    if let Some(g) = &m.gains {
                        if g.len() != p.num_gains() {
                            return Err(Error::Model(format!(
                                "field `gains`: expected {} entries, got {}",
                                p.num_gains(),
                                g.len()
                            )));
                        }
                    }
                }
                Ok(())
            }
            ModelFile::Kyp(m) => m.instance().map(|_| ()),
            ModelFile::Pqp(m) => m.instance().map(|_| ()),
            ModelFile::PowerNetwork(n) => n.validate(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::transport_problem;

    #[test]
    fn state_space_defaults() {
        let m = ModelFile::from_json_str(r#"{"kind": "state_space", "a": [[-1, 0.5], [0, -2]]}"#).unwrap();
        match &m {
            ModelFile::StateSpace(s) => {
                assert_eq!(s.b.shape(), (2, 0));
                assert_eq!(s.c.shape(), (0, 2));
                assert_eq!(s.time_domain, TimeDomain::Continuous);
            }
            _ => panic!("wrong kind"),
        }
        let again = ModelFile::from_json_str(&m.to_json_string()).unwrap();
        assert_eq!(m, again);
    }

    #[test]
    fn synthesis_round_trip_is_exact() {
        let mut prob = transport_problem();
        prob.a[(0, 0)] = -0.1 - 0.2; // not exactly representable in short decimal
        let model = ModelFile::Synthesis(SynthesisModel::from_problem(&prob));
        let text = model.to_json_string();
        let again = ModelFile::from_json_str(&text).unwrap();
        assert_eq!(model, again);
        match again {
            ModelFile::Synthesis(s) => assert_eq!(s.problem().unwrap(), prob),
            _ => panic!("wrong kind"),
        }
    }

    #[test]
    fn diagnostics_name_line_and_field() {
        let text = "{\n  \"kind\": \"kyp\",\n  \"a\": [[-1]],\n  \"b\": [[0]],\n  \"q\": [[0, 1], [1, \"x\"]]\n}";
        let err = ModelFile::from_json_str(text).unwrap_err().to_string();
        assert!(err.contains("q"), "{err}");
        let err = ModelFile::from_json_str(r#"{"kind": "kyp", "a": [[-1]], "b": [[0]]}"#).unwrap_err().to_string();
        assert!(err.contains("missing field `q`"), "{err}");
        let err = ModelFile::from_json_str(r#"{"kind": "nope"}"#).unwrap_err().to_string();
        assert!(err.contains("unknown value `nope`"), "{err}");
        let err = ModelFile::from_json_str("{\n\"kind\": \"pqp\",\n\"objective\": [[1, 2]\n}").unwrap_err().to_string();
        assert!(err.contains("line 4"), "{err}");
    }

    #[test]
    fn invariants_rechecked() {
        let err = ModelFile::from_json_str(r#"{"kind": "pqp", "objective": [[-1, -1], [-1, -1]]}"#).unwrap_err();
        assert!(matches!(err, Error::NotMetzler { .. }));
        let err = ModelFile::from_json_str(r#"{"kind": "kyp", "a": [[1]], "b": [[1]], "q": [[0, 0], [0, -1]]}"#).unwrap_err();
        assert!(matches!(err, Error::Unstable(_)));
    }

    #[test]
    fn embedded_model_loads() {
        let m = ModelFile::from_json_str(r#"{"kind": "pqp", "objective": [[-1]]}"#).unwrap();
        let report = serde_json::json!({"model": m.to_json_value(), "result": {"value": 0.0}});
        assert_eq!(ModelFile::from_json_str(&report.to_string()).unwrap(), m);
    }

    #[test]
    fn rational_entries() {
        let text = r#"{"kind": "transfer_matrix", "matrix": [[{"num": [1], "den": [1, 1]}]]}"#;
        match ModelFile::from_json_str(text).unwrap() {
            ModelFile::TransferMatrix(t) => assert_eq!(t.matrix.unwrap().shape(), (1, 1)),
            _ => panic!("wrong kind"),
        }
    }
}
