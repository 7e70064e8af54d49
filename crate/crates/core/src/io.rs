//! JSON job documents and number formatting.
//!
//! ```json
//! {"system": {"local_spectra": [[0, 1], [0, 1]]},
//!  "beta": 1.0,
//!  "state": {"kind": "two_qubit_psi", "params": {"p0": 0.2, "p1": 0.6, "p2": 0.2}}}
//! ```

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::Error;
use crate::linalg::{c64, ComplexMatrix};
use crate::model::{gibbs, CompositeSystem};
use crate::states::{self, QuantumState};

/// Significant digits of every printed number.
pub const SIGNIFICANT_DIGITS: usize = 12;

pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().unwrap_or(x)
}

pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{}", round_sig(x))
    }
}

/// Rounds every float in a JSON tree; non-finite numbers become strings.
pub fn round_json(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().unwrap_or(f64::NAN);
            serde_json::Number::from_f64(round_sig(x)).map(Value::Number).unwrap_or_else(|| Value::String(fmt_num(x)))
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round_json).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_json(v))).collect()),
        other => other,
    }
}

/// Problems with a job document, as opposed to numerical failures.
#[derive(Debug, thiserror::Error)]
pub enum InputError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Invalid(String),
}

/// Either an input problem or a numerical failure while building the state.
#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error(transparent)]
    Input(#[from] InputError),
    #[error(transparent)]
    Numerical(#[from] Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    pub local_spectra: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub block_tolerance: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateKind {
    Ghz,
    Dicke,
    CoherentGibbs,
    TwoQubitPsi,
    Dense,
    SupplementalRho,
    SupplementalSigma,
    TensorPower,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSpec {
    pub kind: StateKind,
    #[serde(default, skip_serializing_if = "Map::is_empty")]
    pub params: Map<String, Value>,
    /// Rows of `[re, im]` pairs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<[f64; 2]>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<SystemSpec>,
    pub beta: f64,
    pub state: StateSpec,
    /// Second state for pairwise commands.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<StateSpec>,
}

impl JobDocument {
    pub fn from_str(text: &str) -> Result<Self, InputError> {
        let doc: Self = serde_json::from_str(text)?;
        if !(doc.beta > 0.0) || !doc.beta.is_finite() {
            return Err(InputError::Invalid(format!("beta = {} must be finite and > 0", doc.beta)));
        }
        Ok(doc)
    }

    pub fn read(path: &str) -> Result<Self, InputError> {
        let text = std::fs::read_to_string(path).map_err(|source| InputError::Io {
            path: path.to_string(),
            source,
        })?;
        Self::from_str(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serialisable")
    }

    pub fn system(&self) -> Result<Option<Arc<CompositeSystem>>, LoadError> {
        self.system
            .as_ref()
            .map(|s| Ok(Arc::new(CompositeSystem::with_tolerance(s.local_spectra.clone(), s.block_tolerance)?)))
            .transpose()
    }

    pub fn build_state(&self) -> Result<QuantumState, LoadError> {
        build(&self.state, self.system()?, self.beta)
    }

    pub fn build_target(&self) -> Result<Option<QuantumState>, LoadError> {
        let sys = self.system()?;
        self.target.as_ref().map(|t| build(t, sys, self.beta)).transpose()
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RegisterParams {
    n: usize,
    #[serde(default)]
    k: Option<usize>,
    #[serde(default = "one")]
    omega0: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PsiParams {
    p0: f64,
    p1: f64,
    p2: f64,
    #[serde(default = "one")]
    omega0: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GibbsParams {
    #[serde(default)]
    beta: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PowerParams {
    n: usize,
    base: StateSpec,
}

fn one() -> f64 {
    1.0
}

fn params<T: serde::de::DeserializeOwned>(spec: &StateSpec) -> Result<T, InputError> {
    serde_json::from_value(Value::Object(spec.params.clone()))
        .map_err(|e| InputError::Invalid(format!("params of {:?}: {e}", spec.kind)))
}

fn need_system(sys: Option<Arc<CompositeSystem>>, kind: StateKind) -> Result<Arc<CompositeSystem>, InputError> {
    sys.ok_or_else(|| InputError::Invalid(format!("state kind {kind:?} needs a \"system\"")))
}

fn build(spec: &StateSpec, sys: Option<Arc<CompositeSystem>>, beta: f64) -> Result<QuantumState, LoadError> {
    let state = match spec.kind {
        StateKind::Ghz => {
            let p: RegisterParams = params(spec)?;
            states::ghz(p.n, p.omega0)?
        }
        StateKind::Dicke => {
            let p: RegisterParams = params(spec)?;
            let k = p.k.ok_or_else(|| InputError::Invalid("dicke needs params.k".into()))?;
            states::dicke(p.n, k, p.omega0)?
        }
        StateKind::TwoQubitPsi => {
            let p: PsiParams = params(spec)?;
            states::two_qubit_psi(p.p0, p.p1, p.p2, p.omega0)?
        }
        StateKind::CoherentGibbs => {
            let p: GibbsParams = params(spec)?;
            let sys = need_system(sys, spec.kind)?;
            let g = gibbs(&sys, p.beta.unwrap_or(beta))?;
            states::coherent_gibbs(sys, &g)?
        }
        StateKind::Dense => {
            let sys = need_system(sys, spec.kind)?;
            let rows = spec
                .matrix
                .as_ref()
                .ok_or_else(|| InputError::Invalid("dense state needs \"matrix\"".into()))?;
            let rows: Vec<Vec<_>> = rows.iter().map(|r| r.iter().map(|z| c64(z[0], z[1])).collect()).collect();
            states::dense(sys, ComplexMatrix::from_rows(&rows)?)?
        }
        StateKind::SupplementalRho => states::supplemental_rho(),
        StateKind::SupplementalSigma => states::supplemental_sigma(),
        StateKind::TensorPower => {
            let p: PowerParams = params(spec)?;
            let base = build(&p.base, sys, beta)?;
            states::tensor_power(&base, p.n)?
        }
    };
    Ok(state)
}

/// A document reproducing `rho` exactly as a dense state.
pub fn export_state(rho: &QuantumState, beta: f64) -> JobDocument {
    let sys = rho.system();
    let m = rho.matrix();
    let matrix = (0..m.dim())
        .map(|i| (0..m.dim()).map(|j| [m.get(i, j).re, m.get(i, j).im]).collect())
        .collect();
    JobDocument {
        system: Some(SystemSpec {
            local_spectra: sys.local_spectra().to_vec(),
            block_tolerance: Some(sys.block_tolerance()),
        }),
        beta,
        state: StateSpec {
            kind: StateKind::Dense,
            params: Map::new(),
            matrix: Some(matrix),
        },
        target: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clock::qfi;
    use crate::divergence::w_coh;

    #[test]
    fn formatting() {
        assert_eq!(fmt_num(std::f64::consts::LN_2), "0.69314718056");
        assert_eq!(fmt_num(1.0), "1");
        assert_eq!(fmt_num(-1234567.891234567), "-1234567.89123");
        assert_eq!(fmt_num(f64::INFINITY), "inf");
        assert_eq!(round_json(serde_json::json!({"a": [1.0 / 3.0]}))["a"][0], serde_json::json!(0.333333333333));
    }

    #[test]
    fn parse_two_qubit_document() {
        let doc = JobDocument::from_str(
            r#"{"beta": 1.0, "state": {"kind": "two_qubit_psi", "params": {"p0": 0.2, "p1": 0.6, "p2": 0.2}}}"#,
        )
        .unwrap();
        assert_eq!(doc.build_state().unwrap().dim(), 4);
    }

    #[test]
    fn input_errors() {
        assert!(JobDocument::from_str(r#"{"beta": -1, "state": {"kind": "ghz", "params": {"n": 2}}}"#).is_err());
        assert!(JobDocument::from_str(r#"{"beta": 1, "state": {"kind": "nope"}}"#).is_err());
        let doc = JobDocument::from_str(r#"{"beta": 1, "state": {"kind": "dense"}}"#).unwrap();
        assert!(matches!(doc.build_state(), Err(LoadError::Input(_))));
        let doc = JobDocument::from_str(
            r#"{"system": {"local_spectra": [[0, 1]]}, "beta": 1,
                "state": {"kind": "dense", "matrix": [[[0.5, 0], [0, 1]], [[0, 0], [0.5, 0]]]}}"#,
        )
        .unwrap();
        assert!(matches!(doc.build_state(), Err(LoadError::Numerical(Error::NonHermitian { .. }))));
    }

    #[test]
    fn round_trip_preserves_resources() {
        let doc = JobDocument::from_str(
            r#"{"system": {"local_spectra": [[0, 1], [0, 1.5]]}, "beta": 0.7,
                "state": {"kind": "tensor_power", "params": {"n": 1, "base": {"kind": "coherent_gibbs"}}}}"#,
        )
        .unwrap();
        for rho in [doc.build_state().unwrap(), crate::states::supplemental_rho(), crate::states::dicke(3, 1, 1.0).unwrap()] {
            let text = export_state(&rho, 0.7).to_json();
            let back = JobDocument::from_str(&text).unwrap().build_state().unwrap();
            let g = gibbs(rho.system(), 0.7).unwrap();
            let gb = gibbs(back.system(), 0.7).unwrap();
            assert!((w_coh(&rho, &g).unwrap().value - w_coh(&back, &gb).unwrap().value).abs() <= 1e-12);
            let a = qfi(rho.matrix(), &rho.hamiltonian()).unwrap();
            let b = qfi(back.matrix(), &back.hamiltonian()).unwrap();
            assert!((a - b).abs() <= 1e-12);
        }
    }
}
