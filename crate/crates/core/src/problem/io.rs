//! Versioned JSON instance files.
//!
//! Floats are written in shortest round-trip form and parsed with correct
//! rounding, so write-then-read reproduces every value bit for bit.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::error::{Result, ShamError};
use crate::{Matrix, Point};

use super::{
    BoxSet, Constraint, ConstraintSet, GeneratorMeta, ProblemInstance, QuadraticObjective,
    SocConstraintData, GENERATOR_VERSION,
};

pub const INSTANCE_SCHEMA: &str = "sham-instance";
pub const INSTANCE_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintRecord {
    #[serde(rename = "Q")]
    pub q_mat: Vec<Vec<f64>>,
    pub a: Vec<f64>,
    pub q: Vec<f64>,
    pub b: f64,
}

/// On-disk layout. Matrices are stored as lists of rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub schema: String,
    pub schema_version: u32,
    pub dimension: usize,
    pub m: usize,
    pub mu: f64,
    #[serde(rename = "L_f")]
    pub l_f: f64,
    #[serde(rename = "Q_f")]
    pub q_quad: Vec<Vec<f64>>,
    pub q_f: Vec<f64>,
    pub constraints: Vec<ConstraintRecord>,
    pub box_lo: Vec<f64>,
    pub box_hi: Vec<f64>,
    pub seed: Option<u64>,
}

fn rows_of(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| m.row(i).iter().copied().collect())
        .collect()
}

fn matrix_from_rows(rows: &[Vec<f64>], ncols: usize, what: &str) -> Result<Matrix> {
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(ShamError::InvalidInput(format!(
            "{what}: every row must have {ncols} entries"
        )));
    }
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    Ok(Matrix::from_row_slice(rows.len(), ncols, &flat))
}

fn check_finite(values: &[f64], what: &str) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(ShamError::InvalidInput(format!("{what} contains non-finite values")))
    }
}

impl InstanceFile {
    /// Fails when a constraint has no SOC representation (the box family).
    pub fn from_instance(inst: &ProblemInstance) -> Result<Self> {
        let n = inst.dimension();
        let constraints = inst
            .constraints
            .constraints()
            .iter()
            .map(|c| match c {
                Constraint::Soc(d) => Ok(ConstraintRecord {
                    q_mat: rows_of(&d.q_mat),
                    a: d.a.iter().copied().collect(),
                    q: d.q.iter().copied().collect(),
                    b: d.b,
                }),
                // a^T x + b <= 0  <=>  ||.|| over zero rows <= (-a)^T x + (-b)
                Constraint::Affine { a, b } => Ok(ConstraintRecord {
                    q_mat: Vec::new(),
                    a: Vec::new(),
                    q: a.iter().map(|v| -v).collect(),
                    b: -b,
                }),
                Constraint::Box { .. } => Err(ShamError::InvalidInput(
                    "box constraints have no representation in the instance file".into(),
                )),
            })
            .collect::<Result<Vec<_>>>()?;
        let file = Self {
            schema: INSTANCE_SCHEMA.to_string(),
            schema_version: INSTANCE_SCHEMA_VERSION,
            dimension: n,
            m: constraints.len(),
            mu: inst.objective.mu,
            l_f: inst.objective.l_f,
            q_quad: rows_of(&inst.objective.q_mat),
            q_f: inst.objective.c.iter().copied().collect(),
            constraints,
            box_lo: inst.simple_set.lo.iter().copied().collect(),
            box_hi: inst.simple_set.hi.iter().copied().collect(),
            seed: inst.meta.as_ref().map(|m| m.seed),
        };
        file.check_values()?;
        Ok(file)
    }

    fn check_values(&self) -> Result<()> {
        check_finite(&[self.mu, self.l_f], "objective constants")?;
        check_finite(&self.q_quad.concat(), "Q_f")?;
        check_finite(&self.q_f, "q_f")?;
        check_finite(&self.box_lo, "box_lo")?;
        check_finite(&self.box_hi, "box_hi")?;
        for (i, c) in self.constraints.iter().enumerate() {
            check_finite(&c.q_mat.concat(), &format!("constraints[{i}].Q"))?;
            check_finite(&c.a, &format!("constraints[{i}].a"))?;
            check_finite(&c.q, &format!("constraints[{i}].q"))?;
            check_finite(&[c.b], &format!("constraints[{i}].b"))?;
        }
        Ok(())
    }

    pub fn into_instance(self) -> Result<ProblemInstance> {
        if self.schema != INSTANCE_SCHEMA || self.schema_version != INSTANCE_SCHEMA_VERSION {
            return Err(ShamError::InvalidInput(format!(
                "unsupported schema {} v{}",
                self.schema, self.schema_version
            )));
        }
        self.check_values()?;
        let n = self.dimension;
        if self.m != self.constraints.len() {
            return Err(ShamError::InvalidInput(format!(
                "m = {} but {} constraints listed",
                self.m,
                self.constraints.len()
            )));
        }
        if self.q_quad.len() != n {
            return Err(ShamError::DimensionMismatch { expected: n, actual: self.q_quad.len() });
        }
        let objective = QuadraticObjective::new(
            matrix_from_rows(&self.q_quad, n, "Q_f")?,
            Point::from_vec(self.q_f),
            self.l_f,
            self.mu,
        )?;
        let constraints = self
            .constraints
            .into_iter()
            .enumerate()
            .map(|(i, c)| {
                let q_mat = matrix_from_rows(&c.q_mat, n, &format!("constraints[{i}].Q"))?;
                Ok(Constraint::Soc(SocConstraintData::new(
                    q_mat,
                    Point::from_vec(c.a),
                    Point::from_vec(c.q),
                    c.b,
                )?))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut inst = ProblemInstance::new(
            objective,
            ConstraintSet::new(n, constraints)?,
            BoxSet::new(Point::from_vec(self.box_lo), Point::from_vec(self.box_hi))?,
        )?;
        inst.meta = self.seed.map(|seed| GeneratorMeta {
            seed,
            mu: self.mu,
            objective_scale: 1.0 / n as f64,
            version: GENERATOR_VERSION.to_string(),
        });
        Ok(inst)
    }
}

/// Writes `bytes` to a sibling temporary file, then renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| ShamError::InvalidInput(format!("{} is not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let write = || -> std::io::Result<()> {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    };
    write().map_err(|e| {
        let _ = fs::remove_file(&tmp);
        ShamError::io(path, e)
    })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| ShamError::format(path, e))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| ShamError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| ShamError::format(path, e))
}

pub fn write_instance(path: &Path, inst: &ProblemInstance) -> Result<()> {
    write_json(path, &InstanceFile::from_instance(inst)?)
}

pub fn read_instance(path: &Path) -> Result<ProblemInstance> {
    read_json::<InstanceFile>(path)?.into_instance()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::generate_instance;

    #[test]
    fn round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("inst.json");
        let inst = generate_instance(7, 5, 0.3, 9).unwrap();
        write_instance(&path, &inst).unwrap();
        let back = read_instance(&path).unwrap();
        assert_eq!(back.objective, inst.objective);
        assert_eq!(back.constraints, inst.constraints);
        assert_eq!(back.simple_set, inst.simple_set);
        assert_eq!(back.meta.as_ref().unwrap().seed, 9);

        // The file itself is a fixed point of read/write.
        let first = fs::read(&path).unwrap();
        let path2 = dir.path().join("again.json");
        write_instance(&path2, &back).unwrap();
        assert_eq!(first, fs::read(&path2).unwrap());
    }

    #[test]
    fn field_names() {
        let inst = generate_instance(2, 1, 0.0, 1).unwrap();
        let v = serde_json::to_value(InstanceFile::from_instance(&inst).unwrap()).unwrap();
        let obj = v.as_object().unwrap();
        for key in [
            "dimension", "m", "mu", "L_f", "Q_f", "q_f", "constraints", "box_lo", "box_hi", "seed",
        ] {
            assert!(obj.contains_key(key), "missing {key}");
        }
        let c = obj["constraints"][0].as_object().unwrap();
        assert_eq!(c.keys().collect::<Vec<_>>(), vec!["Q", "a", "b", "q"]);
    }

    #[test]
    fn affine_constraints_survive_as_zero_row_cones() {
        let inst = ProblemInstance::new(
            QuadraticObjective::new(Matrix::identity(1, 1), Point::zeros(1), 1.0, 1.0).unwrap(),
            ConstraintSet::new(1, vec![Constraint::affine(Point::from_vec(vec![-1.0]), 1.0)])
                .unwrap(),
            BoxSet::uniform(1, -1e3, 1e3).unwrap(),
        )
        .unwrap();
        let back = InstanceFile::from_instance(&inst).unwrap().into_instance().unwrap();
        let x = Point::from_vec(vec![0.25]);
        assert_eq!(back.constraints.constraints()[0].value(&x), 0.75);
    }

    #[test]
    fn rejects_wrong_schema_and_counts() {
        let inst = generate_instance(3, 2, 0.0, 1).unwrap();
        let mut f = InstanceFile::from_instance(&inst).unwrap();
        f.m = 3;
        assert!(f.clone().into_instance().is_err());
        f.m = 2;
        f.schema_version = 99;
        assert!(f.into_instance().is_err());
    }
}
