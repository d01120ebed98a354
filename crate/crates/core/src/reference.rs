//! Benchmark lattice for KoBoL at T = 0.25, t = 0.1 with reference values.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::levy_models::LevyModel;

const TABLE: &str = include_str!("../data/table1.json");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NuTable {
    pub nu: f64,
    /// rows[i][j] at (a1[i], a2[j])
    pub rows: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkTable {
    #[serde(rename = "T")]
    pub big_t: f64,
    pub t: f64,
    pub lambda_minus: f64,
    pub lambda_plus: f64,
    pub mu: f64,
    pub m2: f64,
    pub a1: Vec<f64>,
    pub a2: Vec<f64>,
    pub values: Vec<NuTable>,
}

impl BenchmarkTable {
    pub fn model(&self, nu: f64) -> Result<LevyModel> {
        LevyModel::kobol(nu, self.lambda_minus, self.lambda_plus, self.mu, self.m2)
    }

    /// (a1, a2) in row-major order.
    pub fn points(&self) -> Vec<(f64, f64)> {
        self.a1
            .iter()
            .flat_map(|&x| self.a2.iter().map(move |&y| (x, y)))
            .collect()
    }

    /// Reference values in the order of [`Self::points`].
    pub fn values(&self, nu: f64) -> Option<Vec<f64>> {
        self.values
            .iter()
            .find(|v| v.nu == nu)
            .map(|v| v.rows.concat())
    }
}

pub fn benchmark() -> BenchmarkTable {
    serde_json::from_str(TABLE).expect("embedded benchmark table is valid JSON")
}
