//! JSON model files, schema `qflow-model/1`.
//!
//! ```json
//! {
//!   "schema": "qflow-model/1",
//!   "class": "unitary",
//!   "ds": 2,
//!   "de_or_Nc": 2,
//!   "parameters": { "h_s": M, "h_e": M, "h_i": M },
//!   "initial_env": [1.0, 0.0]
//! }
//! ```
//!
//! A matrix `M` is a list of rows, each entry a `[re, im]` pair. `initial_env`
//! is either such a matrix or a list of real populations (a diagonal state).
//! A Lindblad generator `L` is `{ "hamiltonian": M, "jumps": [{ "op": M, "rate": r }] }`;
//! `hamiltonian` and `jumps` may be omitted. Kraus maps are lists of matrices.
//!
//! | class               | parameters                                                          |
//! |---------------------|---------------------------------------------------------------------|
//! | `depolarizing`      | `gamma`, `phi`, optional `omega`, optional `modulation: {amplitude, frequency}` |
//! | `classical_mixture` | `lindblads: [L]` (weights come from `initial_env`)                  |
//! | `stochastic_env`    | `lindblads: [L]`, `rates[to][from]`, `jumps: [{to, from, kraus}]`   |
//! | `quantum_bystander` | `system: L`, `environment: L`, `collisions: [{op, rate, kraus}]`     |
//! | `unitary`           | `h_s`, `h_e`, `h_i` (the last on the full `ds·de` space)             |
//! | `born_markov`       | `system: L`                                                          |

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Deserialize;

use super::classes::{
    BornMarkovModel, ClassicalMixtureModel, Collision, QuantumBystanderModel, StochasticEnvModel,
    UnitaryModel,
};
use super::depolarizing::{DepolarizingModel, Modulation};
use super::BipartiteModel;
use crate::error::{QflowError, Result};
use crate::qcore::{
    lindblad_superoperator, CMatrix, DensityMatrix, KrausMap, QOperator, Superoperator, C64,
};

pub const SCHEMA: &str = "qflow-model/1";

type RawMatrix = Vec<Vec<[f64; 2]>>;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    schema: String,
    class: String,
    ds: usize,
    #[serde(rename = "de_or_Nc")]
    de_or_nc: usize,
    #[serde(default)]
    parameters: serde_json::Value,
    initial_env: Option<RawEnv>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawEnv {
    Populations(Vec<f64>),
    Matrix(RawMatrix),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLindblad {
    hamiltonian: Option<RawMatrix>,
    #[serde(default)]
    jumps: Vec<RawJump>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawJump {
    op: RawMatrix,
    rate: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DepolarizingParams {
    gamma: f64,
    phi: f64,
    #[serde(default)]
    omega: f64,
    modulation: Option<SineParams>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SineParams {
    amplitude: f64,
    frequency: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MixtureParams {
    lindblads: Vec<RawLindblad>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StochasticParams {
    lindblads: Vec<RawLindblad>,
    rates: Vec<Vec<f64>>,
    #[serde(default)]
    jumps: Vec<RawStochasticJump>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStochasticJump {
    to: usize,
    from: usize,
    kraus: Vec<RawMatrix>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BystanderParams {
    system: RawLindblad,
    environment: RawLindblad,
    #[serde(default)]
    collisions: Vec<RawCollision>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCollision {
    op: RawMatrix,
    rate: f64,
    kraus: Vec<RawMatrix>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct UnitaryParams {
    h_s: RawMatrix,
    h_e: RawMatrix,
    h_i: RawMatrix,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BornMarkovParams {
    system: RawLindblad,
}

fn bad(msg: impl Into<String>) -> QflowError {
    QflowError::ModelFile(msg.into())
}

fn params<T: DeserializeOwned>(v: serde_json::Value, class: &str) -> Result<T> {
    serde_json::from_value(v).map_err(|e| bad(format!("{class} parameters: {e}")))
}

fn matrix(raw: &RawMatrix, dim: usize, what: &str) -> Result<QOperator> {
    if raw.len() != dim || raw.iter().any(|r| r.len() != dim) {
        return Err(bad(format!("{what} must be {dim}x{dim}")));
    }
    let m = CMatrix::from_fn(dim, dim, |i, j| C64::new(raw[i][j][0], raw[i][j][1]));
    QOperator::new(m)
}

fn lindblad(raw: &RawLindblad, dim: usize, what: &str) -> Result<Superoperator> {
    let h = match &raw.hamiltonian {
        Some(m) => matrix(m, dim, &format!("{what} hamiltonian"))?,
        None => QOperator::zeros(dim),
    };
    let jumps = raw
        .jumps
        .iter()
        .map(|j| Ok((matrix(&j.op, dim, &format!("{what} jump"))?, j.rate)))
        .collect::<Result<Vec<_>>>()?;
    lindblad_superoperator(&h, &jumps)
}

fn kraus(raw: &[RawMatrix], dim: usize) -> Result<KrausMap> {
    let ops = raw
        .iter()
        .map(|m| matrix(m, dim, "Kraus operator"))
        .collect::<Result<Vec<_>>>()?;
    KrausMap::new(ops)
}

fn env_state(raw: Option<&RawEnv>, dim: usize) -> Result<DensityMatrix> {
    match raw {
        None => Err(bad("initial_env is required for this class")),
        Some(RawEnv::Populations(p)) => {
            if p.len() != dim {
                return Err(bad(format!("initial_env needs {dim} populations")));
            }
            DensityMatrix::diagonal(p)
        }
        Some(RawEnv::Matrix(m)) => DensityMatrix::new(matrix(m, dim, "initial_env")?),
    }
}

fn populations(raw: Option<&RawEnv>, dim: usize) -> Result<Vec<f64>> {
    match raw {
        Some(RawEnv::Populations(p)) if p.len() == dim => Ok(p.clone()),
        _ => Err(bad(format!("initial_env must list {dim} populations"))),
    }
}

/// Parses a model document.
pub fn parse_model(text: &str) -> Result<BipartiteModel> {
    let raw: RawModel = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
    if raw.schema != SCHEMA {
        return Err(bad(format!(
            "unsupported schema {:?}, expected {SCHEMA}",
            raw.schema
        )));
    }
    if raw.ds == 0 || raw.de_or_nc == 0 {
        return Err(bad("dimensions must be positive"));
    }
    let (ds, de) = (raw.ds, raw.de_or_nc);
    let env = raw.initial_env.as_ref();
    let class = raw.class.as_str();
    let model: BipartiteModel = match class {
        "depolarizing" => {
            if ds != 2 || de != 4 {
                return Err(bad("depolarizing models have ds = 2 and de_or_Nc = 4"));
            }
            let p: DepolarizingParams = params(raw.parameters, class)?;
            let pops: [f64; 4] = match env {
                None => {
                    let s = p.gamma + p.phi;
                    let k = p.gamma / (3.0 * s);
                    [k, k, k, p.phi / s]
                }
                Some(_) => populations(env, 4)?.try_into().expect("length 4"),
            };
            let modulation = p
                .modulation
                .map(|m| Modulation::sine(m.amplitude, m.frequency))
                .transpose()?;
            DepolarizingModel::new(p.gamma, p.phi, p.omega, modulation, pops)?.into()
        }
        "classical_mixture" => {
            let p: MixtureParams = params(raw.parameters, class)?;
            if p.lindblads.len() != de {
                return Err(bad(format!("expected {de} lindblads")));
            }
            let gens = p
                .lindblads
                .iter()
                .map(|l| lindblad(l, ds, "mixture"))
                .collect::<Result<Vec<_>>>()?;
            ClassicalMixtureModel::new(gens, populations(env, de)?)?.into()
        }
        "stochastic_env" => {
            let p: StochasticParams = params(raw.parameters, class)?;
            if p.lindblads.len() != de {
                return Err(bad(format!("expected {de} lindblads")));
            }
            let gens = p
                .lindblads
                .iter()
                .map(|l| lindblad(l, ds, "conditional"))
                .collect::<Result<Vec<_>>>()?;
            let jumps = p
                .jumps
                .iter()
                .map(|j| Ok(((j.to, j.from), kraus(&j.kraus, ds)?)))
                .collect::<Result<Vec<_>>>()?;
            StochasticEnvModel::with_kraus(gens, p.rates, jumps, populations(env, de)?)?.into()
        }
        "quantum_bystander" => {
            let p: BystanderParams = params(raw.parameters, class)?;
            let collisions = p
                .collisions
                .iter()
                .map(|col| {
                    Ok(Collision {
                        op: matrix(&col.op, de, "collision operator")?,
                        rate: col.rate,
                        map: kraus(&col.kraus, ds)?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            QuantumBystanderModel::new(
                lindblad(&p.system, ds, "system")?,
                lindblad(&p.environment, de, "environment")?,
                collisions,
                env_state(env, de)?,
            )?
            .into()
        }
        "unitary" => {
            let p: UnitaryParams = params(raw.parameters, class)?;
            UnitaryModel::new(
                matrix(&p.h_s, ds, "h_s")?,
                matrix(&p.h_e, de, "h_e")?,
                matrix(&p.h_i, ds * de, "h_i")?,
                env_state(env, de)?,
            )?
            .into()
        }
        "born_markov" => {
            let p: BornMarkovParams = params(raw.parameters, class)?;
            BornMarkovModel::new(lindblad(&p.system, ds, "system")?, env_state(env, de)?)?.into()
        }
        other => return Err(bad(format!("unknown model class {other:?}"))),
    };
    Ok(model)
}

pub fn load_model(path: &Path) -> Result<BipartiteModel> {
    let text = std::fs::read_to_string(path)?;
    parse_model(&text).map_err(|e| match e {
        QflowError::ModelFile(msg) => bad(format!("{}: {msg}", path.display())),
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXCHANGE: &str = r#"{
        "schema": "qflow-model/1",
        "class": "unitary",
        "ds": 2,
        "de_or_Nc": 2,
        "parameters": {
            "h_s": [[[0,0],[0,0]],[[0,0],[0,0]]],
            "h_e": [[[0,0],[0,0]],[[0,0],[0,0]]],
            "h_i": [[[0,0],[0,0],[0,0],[0,0]],
                    [[0,0],[0,0],[1,0],[0,0]],
                    [[0,0],[1,0],[0,0],[0,0]],
                    [[0,0],[0,0],[0,0],[0,0]]]
        },
        "initial_env": [0.0, 1.0]
    }"#;

    #[test]
    fn parses_unitary_model() {
        let m = parse_model(EXCHANGE).unwrap();
        assert_eq!(m.class_name(), "unitary");
        assert_eq!(m.system_dim(), 2);
    }

    #[test]
    fn depolarizing_defaults_to_stationary_env() {
        let text = r#"{"schema":"qflow-model/1","class":"depolarizing","ds":2,"de_or_Nc":4,
                       "parameters":{"gamma":1.0,"phi":3.0}}"#;
        let m = parse_model(text).unwrap();
        let p = m.initial_env().populations();
        assert!((p[3] - 0.75).abs() < 1e-15);
    }

    #[test]
    fn rejects_wrong_schema_and_unknown_fields() {
        assert!(parse_model(&EXCHANGE.replace("qflow-model/1", "qflow-model/9")).is_err());
        let extra = EXCHANGE.replace("\"class\"", "\"bogus\": 1, \"class\"");
        assert!(parse_model(&extra).is_err());
        let non_herm = EXCHANGE.replace("[[0,0],[1,0],[0,0],[0,0]]", "[[0,0],[2,0],[0,0],[0,0]]");
        assert!(parse_model(&non_herm).is_err());
    }
}
