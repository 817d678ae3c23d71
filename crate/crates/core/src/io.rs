//! JSON file formats for states, Kraus sets and system specs.
//!
//! Complex numbers are `[re, im]` pairs. A state file is either
//! `{"kind": "pure", "amplitudes": [[re, im], …]}` or
//! `{"kind": "mixed", "matrix": [[[re, im], …], …]}`; a Kraus file is
//! `{"operators": [matrix, …]}`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kraus::KrausSet;
use crate::linalg::{ComplexMatrix, C64};
use crate::resource::SystemSpec;
use crate::states::{density_from_pure, validate, DensityMatrix, PureState};

pub type Pair = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StateKind {
    Pure,
    Mixed,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateFile {
    pub kind: StateKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitudes: Option<Vec<Pair>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<Pair>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KrausFile {
    pub operators: Vec<Vec<Vec<Pair>>>,
}

/// A parsed state. Pure inputs keep their amplitudes for the bounds that need them.
#[derive(Debug, Clone)]
pub enum StateInput {
    Pure(PureState),
    Mixed(DensityMatrix),
}

impl StateInput {
    pub fn dim(&self) -> usize {
        match self {
            StateInput::Pure(p) => p.dim(),
            StateInput::Mixed(m) => m.dim(),
        }
    }

    pub fn density(&self) -> DensityMatrix {
        match self {
            StateInput::Pure(p) => density_from_pure(p),
            StateInput::Mixed(m) => m.clone(),
        }
    }

    pub fn pure(&self) -> Option<&PureState> {
        match self {
            StateInput::Pure(p) => Some(p),
            StateInput::Mixed(_) => None,
        }
    }

    pub fn to_file(&self) -> StateFile {
        match self {
            StateInput::Pure(p) => StateFile {
                kind: StateKind::Pure,
                amplitudes: Some(p.amplitudes().iter().map(|z| [z.re, z.im]).collect()),
                matrix: None,
            },
            StateInput::Mixed(m) => StateFile {
                kind: StateKind::Mixed,
                amplitudes: None,
                matrix: Some(matrix_to_pairs(m.matrix())),
            },
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("state serializes")
    }
}

pub fn matrix_to_pairs(m: &ComplexMatrix) -> Vec<Vec<Pair>> {
    (0..m.dim())
        .map(|i| (0..m.dim()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

pub fn matrix_from_pairs(rows: &[Vec<Pair>]) -> Result<ComplexMatrix> {
    let n = rows.len();
    if n == 0 {
        return Err(Error::InvalidData("empty matrix".into()));
    }
    let mut data = Vec::with_capacity(n * n);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(Error::InvalidData(format!(
                "row {i} has {} entries, expected {n}",
                row.len()
            )));
        }
        data.extend(row.iter().map(|[re, im]| C64::new(*re, *im)));
    }
    ComplexMatrix::from_row_major(n, data)
}

fn check_finite(values: impl IntoIterator<Item = f64>) -> Result<()> {
    if values.into_iter().all(f64::is_finite) {
        Ok(())
    } else {
        Err(Error::InvalidData("non-finite entry".into()))
    }
}

impl StateFile {
    pub fn into_state(self) -> Result<StateInput> {
        match (self.kind, self.amplitudes, self.matrix) {
            (_, Some(_), Some(_)) => Err(Error::InvalidData(
                "state file has both `amplitudes` and `matrix`".into(),
            )),
            (kind, Some(amps), None) => {
                check_finite(amps.iter().flatten().copied())?;
                if amps.is_empty() {
                    return Err(Error::InvalidData("empty amplitude list".into()));
                }
                let psi = PureState::new(amps.iter().map(|[re, im]| C64::new(*re, *im)).collect())?;
                Ok(match kind {
                    StateKind::Pure => StateInput::Pure(psi),
                    StateKind::Mixed => StateInput::Mixed(density_from_pure(&psi)),
                })
            }
            (StateKind::Mixed, None, Some(rows)) => {
                check_finite(rows.iter().flatten().flatten().copied())?;
                let m = matrix_from_pairs(&rows)?;
                let report = validate(&m);
                if !report.valid {
                    log::debug!("state validation failed: {report:?}");
                }
                Ok(StateInput::Mixed(DensityMatrix::from_matrix(m)?))
            }
            (StateKind::Pure, None, Some(_)) => {
                Err(Error::InvalidData("pure state needs `amplitudes`, not `matrix`".into()))
            }
            (_, None, None) => Err(Error::InvalidData("state file needs `amplitudes` or `matrix`".into())),
        }
    }
}

pub fn parse_state(text: &str) -> Result<StateInput> {
    serde_json::from_str::<StateFile>(text)?.into_state()
}

pub fn read_state(path: impl AsRef<Path>) -> Result<StateInput> {
    parse_state(&fs::read_to_string(path)?)
}

pub fn write_state(path: impl AsRef<Path>, state: &StateInput) -> Result<()> {
    fs::write(path, state.to_json() + "\n")?;
    Ok(())
}

pub fn parse_kraus(text: &str) -> Result<KrausSet> {
    let file: KrausFile = serde_json::from_str(text)?;
    let operators = file
        .operators
        .iter()
        .map(|rows| {
            check_finite(rows.iter().flatten().flatten().copied())?;
            matrix_from_pairs(rows)
        })
        .collect::<Result<Vec<_>>>()?;
    KrausSet::new(operators)
}

pub fn read_kraus(path: impl AsRef<Path>) -> Result<KrausSet> {
    parse_kraus(&fs::read_to_string(path)?)
}

pub fn kraus_to_json(ks: &KrausSet) -> String {
    let file = KrausFile {
        operators: ks.operators().iter().map(matrix_to_pairs).collect(),
    };
    serde_json::to_string_pretty(&file).expect("kraus set serializes")
}

pub fn read_spec(path: impl AsRef<Path>) -> Result<SystemSpec> {
    SystemSpec::from_json(&fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pure_state_round_trip() {
        let psi = PureState::normalized(vec![C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(0.5, -0.5)]).unwrap();
        let text = StateInput::Pure(psi.clone()).to_json();
        let back = parse_state(&text).unwrap();
        assert_eq!(back.pure().unwrap().amplitudes(), psi.amplitudes());
    }

    #[test]
    fn mixed_state_round_trip() {
        let rho = DensityMatrix::maximally_mixed(3);
        let back = parse_state(&StateInput::Mixed(rho.clone()).to_json()).unwrap();
        assert!(back.pure().is_none());
        assert_eq!(back.density().matrix().as_slice(), rho.matrix().as_slice());
    }

    #[test]
    fn spec_examples_parse() {
        let s = parse_state(r#"{"kind":"pure","amplitudes":[[0,0],[0,0],[1,0]]}"#).unwrap();
        assert_eq!(s.dim(), 3);
        let m = parse_state(r#"{"kind":"mixed","matrix":[[[0.5,0],[0,0]],[[0,0],[0.5,0]]]}"#).unwrap();
        assert_eq!(m.density().populations(), vec![0.5, 0.5]);
        let k = parse_state(r#"{"kind":"mixed","amplitudes":[[1,0],[0,0]]}"#).unwrap();
        assert!(k.pure().is_none());
    }

    #[test]
    fn malformed_inputs_are_rejected() {
        assert!(matches!(parse_state("{"), Err(Error::InvalidData(_))));
        assert!(matches!(
            parse_state(r#"{"kind":"pure","amplitudes":[[1,0],[1,0]]}"#),
            Err(Error::NotNormalized { .. })
        ));
        assert!(parse_state(r#"{"kind":"pure","matrix":[[[1,0]]]}"#).is_err());
        assert!(parse_state(r#"{"kind":"mixed","matrix":[[[1,0],[0,0]]]}"#).is_err());
        assert!(parse_state(r#"{"kind":"mixed","matrix":[[[1,0],[0,1]],[[0,0],[0,0]]]}"#).is_err());
        assert!(parse_state(r#"{"kind":"mixed"}"#).is_err());
    }

    #[test]
    fn kraus_round_trip_and_completeness() {
        let id = r#"{"operators":[[[[1,0],[0,0]],[[0,0],[1,0]]]]}"#;
        let ks = parse_kraus(id).unwrap();
        assert_eq!(ks.len(), 1);
        assert_eq!(parse_kraus(&kraus_to_json(&ks)).unwrap().operators(), ks.operators());
        let half = r#"{"operators":[[[[0.5,0],[0,0]],[[0,0],[0.5,0]]]]}"#;
        assert!(matches!(parse_kraus(half), Err(Error::IncompleteKrausSet { .. })));
    }
}
