//! Model persistence: one JSON document per model, weights as row-major
//! nested arrays, numbers as IEEE-754 doubles in decimal. Loading validates
//! dimensional consistency and rejects anything inconsistent.

use std::path::Path;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{BinaryRbm, TwoLayerDbm, TwoLayerDbn};

/// Any of the supported model families.
#[derive(Clone, Debug)]
pub enum Model {
    Rbm(BinaryRbm),
    Dbm(TwoLayerDbm),
    Dbn(TwoLayerDbn),
}

impl Model {
    pub fn num_visible(&self) -> usize {
        match self {
            Model::Rbm(m) => m.num_visible(),
            Model::Dbm(m) => m.num_visible(),
            Model::Dbn(m) => m.num_visible(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Model::Rbm(_) => "rbm",
            Model::Dbm(_) => "dbm2",
            Model::Dbn(_) => "dbn2",
        }
    }

    pub fn total_units(&self) -> usize {
        match self {
            Model::Rbm(m) => m.num_visible() + m.num_hidden(),
            Model::Dbm(m) => m.num_visible() + m.num_hidden_1() + m.num_hidden_2(),
            Model::Dbn(m) => m.num_visible() + m.num_hidden_1() + m.num_hidden_2(),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct RbmDoc {
    visible_bias: Vec<f64>,
    hidden_bias: Vec<f64>,
    weights: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type")]
enum ModelDoc {
    #[serde(rename = "rbm")]
    Rbm {
        visible_bias: Vec<f64>,
        hidden_bias: Vec<f64>,
        weights: Vec<Vec<f64>>,
    },
    #[serde(rename = "dbm2")]
    Dbm2 {
        visible_bias: Vec<f64>,
        hidden_bias_1: Vec<f64>,
        hidden_bias_2: Vec<f64>,
        weights_1: Vec<Vec<f64>>,
        weights_2: Vec<Vec<f64>>,
    },
    #[serde(rename = "dbn2")]
    Dbn2 {
        top_rbm: RbmDoc,
        directed_weights: Vec<Vec<f64>>,
        directed_visible_bias: Vec<f64>,
        recognition_bias: Vec<f64>,
    },
}

fn matrix_from_rows(name: &str, rows: Vec<Vec<f64>>) -> Result<Array2<f64>> {
    if rows.is_empty() {
        return Err(Error::ModelFormat(format!("{name}: empty matrix")));
    }
    let ncols = rows[0].len();
    if ncols == 0 || rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::ModelFormat(format!("{name}: ragged or empty rows")));
    }
    let nrows = rows.len();
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    Array2::from_shape_vec((nrows, ncols), flat)
        .map_err(|e| Error::ModelFormat(format!("{name}: {e}")))
}

fn matrix_to_rows(m: &Array2<f64>) -> Vec<Vec<f64>> {
    m.rows().into_iter().map(|r| r.to_vec()).collect()
}

fn rbm_from_doc(doc: RbmDoc) -> Result<BinaryRbm> {
    let weights = matrix_from_rows("weights", doc.weights)?;
    BinaryRbm::new(Array1::from(doc.visible_bias), Array1::from(doc.hidden_bias), weights)
}

impl Model {
    pub fn to_json(&self) -> Result<String> {
        let doc = match self {
            Model::Rbm(m) => ModelDoc::Rbm {
                visible_bias: m.visible_bias().to_vec(),
                hidden_bias: m.hidden_bias().to_vec(),
                weights: matrix_to_rows(m.weights()),
            },
            Model::Dbm(m) => ModelDoc::Dbm2 {
                visible_bias: m.visible_bias().to_vec(),
                hidden_bias_1: m.hidden_bias_1().to_vec(),
                hidden_bias_2: m.hidden_bias_2().to_vec(),
                weights_1: matrix_to_rows(m.weights_1()),
                weights_2: matrix_to_rows(m.weights_2()),
            },
            Model::Dbn(m) => ModelDoc::Dbn2 {
                top_rbm: RbmDoc {
                    visible_bias: m.top_rbm().visible_bias().to_vec(),
                    hidden_bias: m.top_rbm().hidden_bias().to_vec(),
                    weights: matrix_to_rows(m.top_rbm().weights()),
                },
                directed_weights: matrix_to_rows(m.directed_weights()),
                directed_visible_bias: m.directed_visible_bias().to_vec(),
                recognition_bias: m.recognition_bias().to_vec(),
            },
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ModelDoc = serde_json::from_str(text)?;
        match doc {
            ModelDoc::Rbm { visible_bias, hidden_bias, weights } => {
                Ok(Model::Rbm(rbm_from_doc(RbmDoc { visible_bias, hidden_bias, weights })?))
            }
            ModelDoc::Dbm2 { visible_bias, hidden_bias_1, hidden_bias_2, weights_1, weights_2 } => {
                let w1 = matrix_from_rows("weights_1", weights_1)?;
                let w2 = matrix_from_rows("weights_2", weights_2)?;
                Ok(Model::Dbm(TwoLayerDbm::new(
                    Array1::from(visible_bias),
                    Array1::from(hidden_bias_1),
                    Array1::from(hidden_bias_2),
                    w1,
                    w2,
                )?))
            }
            ModelDoc::Dbn2 { top_rbm, directed_weights, directed_visible_bias, recognition_bias } => {
                let top = rbm_from_doc(top_rbm)?;
                let w = matrix_from_rows("directed_weights", directed_weights)?;
                Ok(Model::Dbn(TwoLayerDbn::new(
                    top,
                    w,
                    Array1::from(directed_visible_bias),
                    Some(Array1::from(recognition_bias)),
                )?))
            }
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }
}
