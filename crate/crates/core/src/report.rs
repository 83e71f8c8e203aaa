//! Pass/fail records with JSON witnesses, shared by every checker.

use serde::Serialize;
use serde_json::{json, Value};

use crate::linalg::Matrix;
use crate::scalar::{format_scalar, Field};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub detail: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Value>,
}

impl Check {
    pub fn pass(name: impl Into<String>, detail: impl Into<String>) -> Self {
        Check { name: name.into(), passed: true, detail: detail.into(), witness: None }
    }

    pub fn fail(name: impl Into<String>, detail: impl Into<String>) -> Self {
        Check { name: name.into(), passed: false, detail: detail.into(), witness: None }
    }

    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check { name: name.into(), passed, detail: detail.into(), witness: None }
    }

    pub fn with_witness(mut self, witness: Value) -> Self {
        self.witness = Some(witness);
        self
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Report {
    pub name: String,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn new(name: impl Into<String>) -> Self {
        Report { name: name.into(), passed: true, checks: Vec::new() }
    }

    pub fn push(&mut self, check: Check) {
        self.passed &= check.passed;
        self.checks.push(check);
    }

    pub fn extend(&mut self, other: Report) {
        for c in other.checks {
            self.push(c);
        }
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

pub fn vector_json<F: Field>(v: &[F]) -> Value {
    Value::Array(v.iter().map(|x| Value::String(format_scalar(x))).collect())
}

pub fn vectors_json<F: Field>(vs: &[Vec<F>]) -> Value {
    Value::Array(vs.iter().map(|v| vector_json(v)).collect())
}

pub fn matrix_json<F: Field>(m: &Matrix<F>) -> Value {
    Value::Array(m.row_iter().map(vector_json).collect())
}

pub fn index_json(v: &[usize]) -> Value {
    json!(v)
}
