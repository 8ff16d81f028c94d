//! JSON interchange schemas.
//!
//! Complex scalars are two-element `[re, im]` arrays, matrices are row-major
//! nested arrays, and all dimensions are explicit. Games are stored by their
//! zero cells, strategies by explicit effect lists with either a pure state
//! or a density matrix, constraint systems by their constraint list.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::correlation::Correlation;
use crate::games::SynchronousGame;
use crate::lcs::{Constraint, LcsSystem};
use crate::numerics::{CMatrix, CVector, DensityMatrix};
use crate::strategy::{MixedStrategy, PmeStrategy, Povm, TensorStrategy};
use crate::{Error, Result};

/// One complex scalar on the wire.
pub type WireComplex = [f64; 2];
/// Row-major matrix on the wire.
pub type WireMatrix = Vec<Vec<WireComplex>>;
/// Vector on the wire.
pub type WireVector = Vec<WireComplex>;

pub fn matrix_to_wire(m: &CMatrix) -> WireMatrix {
    (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

pub fn matrix_from_wire(w: &WireMatrix) -> Result<CMatrix> {
    let rows = w.len();
    let cols = w.first().map(|r| r.len()).unwrap_or(0);
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidFormat {
            reason: "empty matrix".into(),
        });
    }
    let mut entries = Vec::with_capacity(rows * cols);
    for row in w {
        if row.len() != cols {
            return Err(Error::InvalidFormat {
                reason: "ragged matrix rows".into(),
            });
        }
        for &[re, im] in row {
            entries.push(Complex64::new(re, im));
        }
    }
    CMatrix::from_entries(rows, cols, entries)
}

pub fn vector_to_wire(v: &CVector) -> WireVector {
    v.entries().iter().map(|c| [c.re, c.im]).collect()
}

pub fn vector_from_wire(w: &WireVector) -> CVector {
    CVector::new(w.iter().map(|&[re, im]| Complex64::new(re, im)).collect())
}

/// Synchronous game stored by its zero set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GameFile {
    pub questions: usize,
    pub answers: usize,
    /// Tuples [x, y, a, b] with V = 0.
    pub zero_cells: Vec<[usize; 4]>,
}

impl GameFile {
    pub fn from_game(g: &SynchronousGame) -> Self {
        Self {
            questions: g.questions(),
            answers: g.answers(),
            zero_cells: g.zero_cells(),
        }
    }

    pub fn to_game(&self) -> Result<SynchronousGame> {
        for cell in &self.zero_cells {
            let [x, y, a, b] = *cell;
            if x >= self.questions || y >= self.questions || a >= self.answers || b >= self.answers
            {
                return Err(Error::InvalidFormat {
                    reason: format!("zero cell {cell:?} out of range"),
                });
            }
        }
        let zeros: std::collections::HashSet<[usize; 4]> =
            self.zero_cells.iter().cloned().collect();
        SynchronousGame::from_predicate(self.questions, self.answers, |x, y, a, b| {
            !zeros.contains(&[x, y, a, b])
        })
    }
}

/// Tensor-product strategy with either a pure state or a density matrix.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StrategyFile {
    #[serde(rename = "dimA")]
    pub dim_a: usize,
    #[serde(rename = "dimB")]
    pub dim_b: usize,
    /// Per question, per answer, one matrix.
    pub alice: Vec<Vec<WireMatrix>>,
    pub bob: Vec<Vec<WireMatrix>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub state: Option<WireVector>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<WireMatrix>,
}

/// A parsed strategy file: pure or mixed.
pub enum LoadedStrategy {
    Pure(TensorStrategy),
    Mixed(MixedStrategy),
}

impl StrategyFile {
    pub fn from_strategy(s: &TensorStrategy) -> Self {
        Self {
            dim_a: s.dim_a(),
            dim_b: s.dim_b(),
            alice: (0..s.questions())
                .map(|x| s.alice(x).effects().iter().map(matrix_to_wire).collect())
                .collect(),
            bob: (0..s.questions())
                .map(|y| s.bob(y).effects().iter().map(matrix_to_wire).collect())
                .collect(),
            state: Some(vector_to_wire(s.state())),
            rho: None,
        }
    }

    fn povms(side: &[Vec<WireMatrix>], dim: usize, which: &str) -> Result<Vec<Povm>> {
        side.iter()
            .map(|per_q| {
                let effects = per_q
                    .iter()
                    .map(matrix_from_wire)
                    .collect::<Result<Vec<_>>>()?;
                for e in &effects {
                    if e.rows() != dim {
                        return Err(Error::InvalidFormat {
                            reason: format!("{which} effect dimension {} != {dim}", e.rows()),
                        });
                    }
                }
                Povm::new(effects)
            })
            .collect()
    }

    pub fn load(&self) -> Result<LoadedStrategy> {
        let alice = Self::povms(&self.alice, self.dim_a, "alice")?;
        let bob = Self::povms(&self.bob, self.dim_b, "bob")?;
        match (&self.state, &self.rho) {
            (Some(state), None) => Ok(LoadedStrategy::Pure(TensorStrategy::new(
                alice,
                bob,
                vector_from_wire(state),
            )?)),
            (None, Some(rho)) => Ok(LoadedStrategy::Mixed(MixedStrategy::new(
                alice,
                bob,
                DensityMatrix::new(matrix_from_wire(rho)?)?,
            )?)),
            _ => Err(Error::InvalidFormat {
                reason: "strategy needs exactly one of `state` or `rho`".into(),
            }),
        }
    }
}

/// Projective maximally-entangled strategy: only Alice's projections are
/// stored.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PmeFile {
    pub dim: usize,
    /// Per question, per answer, one projection matrix.
    pub projections: Vec<Vec<WireMatrix>>,
}

impl PmeFile {
    pub fn from_pme(s: &PmeStrategy) -> Self {
        Self {
            dim: s.dim(),
            projections: s
                .projections()
                .iter()
                .map(|per_q| per_q.iter().map(matrix_to_wire).collect())
                .collect(),
        }
    }

    pub fn to_pme(&self) -> Result<PmeStrategy> {
        let projections = self
            .projections
            .iter()
            .map(|per_q| per_q.iter().map(matrix_from_wire).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        for per_q in &projections {
            for p in per_q {
                if p.rows() != self.dim {
                    return Err(Error::InvalidFormat {
                        reason: format!("projection dimension {} != {}", p.rows(), self.dim),
                    });
                }
            }
        }
        PmeStrategy::new(projections)
    }
}

/// Linear constraint system mod d.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LcsFile {
    pub modulus: u64,
    /// Optional explicit variable count; inferred from the supports when
    /// absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variables: Option<usize>,
    pub constraints: Vec<LcsConstraintFile>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LcsConstraintFile {
    pub support: Vec<usize>,
    pub coeffs: Vec<u64>,
    pub rhs: u64,
}

impl LcsFile {
    pub fn from_system(s: &LcsSystem) -> Self {
        Self {
            modulus: s.modulus(),
            variables: Some(s.variables()),
            constraints: s
                .constraints()
                .iter()
                .map(|c| LcsConstraintFile {
                    support: c.support.clone(),
                    coeffs: c.coefficients.clone(),
                    rhs: c.rhs,
                })
                .collect(),
        }
    }

    pub fn to_system(&self) -> Result<LcsSystem> {
        let inferred = self
            .constraints
            .iter()
            .flat_map(|c| c.support.iter())
            .max()
            .map(|&v| v + 1)
            .unwrap_or(0);
        let variables = self.variables.unwrap_or(inferred);
        LcsSystem::new(
            self.modulus,
            variables,
            self.constraints
                .iter()
                .map(|c| Constraint {
                    support: c.support.clone(),
                    coefficients: c.coeffs.clone(),
                    rhs: c.rhs,
                })
                .collect(),
        )
    }
}

/// Correlation table with explicit shape, nested [x][y][a][b].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorrelationFile {
    #[serde(rename = "questionsX")]
    pub questions_x: usize,
    #[serde(rename = "questionsY")]
    pub questions_y: usize,
    #[serde(rename = "answersA")]
    pub answers_a: usize,
    #[serde(rename = "answersB")]
    pub answers_b: usize,
    pub table: Vec<Vec<Vec<Vec<f64>>>>,
}

impl CorrelationFile {
    pub fn from_correlation(p: &Correlation) -> Self {
        let table = (0..p.questions_x())
            .map(|x| {
                (0..p.questions_y())
                    .map(|y| {
                        (0..p.answers_a())
                            .map(|a| (0..p.answers_b()).map(|b| p.get(x, y, a, b)).collect())
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Self {
            questions_x: p.questions_x(),
            questions_y: p.questions_y(),
            answers_a: p.answers_a(),
            answers_b: p.answers_b(),
            table,
        }
    }

    pub fn to_correlation(&self) -> Result<Correlation> {
        let mut flat =
            Vec::with_capacity(self.questions_x * self.questions_y * self.answers_a * self.answers_b);
        if self.table.len() != self.questions_x {
            return Err(Error::InvalidFormat {
                reason: "table depth does not match questionsX".into(),
            });
        }
        for slice_x in &self.table {
            if slice_x.len() != self.questions_y {
                return Err(Error::InvalidFormat {
                    reason: "table depth does not match questionsY".into(),
                });
            }
            for slice_y in slice_x {
                if slice_y.len() != self.answers_a {
                    return Err(Error::InvalidFormat {
                        reason: "table depth does not match answersA".into(),
                    });
                }
                for row in slice_y {
                    if row.len() != self.answers_b {
                        return Err(Error::InvalidFormat {
                            reason: "table depth does not match answersB".into(),
                        });
                    }
                    flat.extend_from_slice(row);
                }
            }
        }
        Correlation::new(
            self.questions_x,
            self.questions_y,
            self.answers_a,
            self.answers_b,
            flat,
        )
    }
}

/// Any input document the toolkit accepts, distinguished by its fields.
#[derive(Debug)]
pub enum InputDocument {
    Game(GameFile),
    Strategy(StrategyFile),
    Pme(PmeFile),
    Lcs(LcsFile),
    Correlation(CorrelationFile),
}

/// Parses a JSON document and sniffs its schema from the present fields.
pub fn parse_input(text: &str) -> Result<InputDocument> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::InvalidFormat {
        reason: format!("JSON parse error at line {} column {}: {e}", e.line(), e.column()),
    })?;
    let obj = value.as_object().ok_or_else(|| Error::InvalidFormat {
        reason: "top-level JSON value must be an object".into(),
    })?;
    let parse = |what: &str, err: serde_json::Error| Error::InvalidFormat {
        reason: format!("malformed {what} document: {err}"),
    };
    if obj.contains_key("zero_cells") {
        Ok(InputDocument::Game(
            serde_json::from_value(value.clone()).map_err(|e| parse("game", e))?,
        ))
    } else if obj.contains_key("projections") {
        Ok(InputDocument::Pme(
            serde_json::from_value(value.clone()).map_err(|e| parse("pme", e))?,
        ))
    } else if obj.contains_key("constraints") {
        Ok(InputDocument::Lcs(
            serde_json::from_value(value.clone()).map_err(|e| parse("lcs", e))?,
        ))
    } else if obj.contains_key("alice") {
        Ok(InputDocument::Strategy(
            serde_json::from_value(value.clone()).map_err(|e| parse("strategy", e))?,
        ))
    } else if obj.contains_key("table") {
        Ok(InputDocument::Correlation(
            serde_json::from_value(value.clone()).map_err(|e| parse("correlation", e))?,
        ))
    } else {
        Err(Error::InvalidFormat {
            reason: "unrecognized document: expected game, strategy, pme, lcs, or correlation fields"
                .into(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    #[test]
    fn game_roundtrip() {
        let g = corpus::magic_square_game();
        let file = GameFile::from_game(&g);
        let text = serde_json::to_string(&file).unwrap();
        let InputDocument::Game(parsed) = parse_input(&text).unwrap() else {
            panic!("expected a game document");
        };
        let back = parsed.to_game().unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn pme_roundtrip() {
        let s = corpus::two_mub_qubit_pme();
        let file = PmeFile::from_pme(&s);
        let text = serde_json::to_string(&file).unwrap();
        let InputDocument::Pme(parsed) = parse_input(&text).unwrap() else {
            panic!("expected a pme document");
        };
        let back = parsed.to_pme().unwrap();
        assert_eq!(back.dim(), 2);
        for x in 0..2 {
            for a in 0..2 {
                assert!(back
                    .projection(x, a)
                    .sub(s.projection(x, a))
                    .norm_fro()
                    < 1e-15);
            }
        }
    }

    #[test]
    fn strategy_roundtrip_and_exclusive_state() {
        let s = corpus::edge_two_coloring_strategy();
        let file = StrategyFile::from_strategy(&s);
        let text = serde_json::to_string(&file).unwrap();
        let InputDocument::Strategy(parsed) = parse_input(&text).unwrap() else {
            panic!("expected a strategy document");
        };
        assert!(matches!(parsed.load().unwrap(), LoadedStrategy::Pure(_)));

        let mut both = StrategyFile::from_strategy(&s);
        both.rho = Some(matrix_to_wire(&CMatrix::identity(1)));
        assert!(both.load().is_err());
    }

    #[test]
    fn lcs_roundtrip_with_inferred_variables() {
        let s = corpus::magic_square_lcs();
        let mut file = LcsFile::from_system(&s);
        file.variables = None;
        let text = serde_json::to_string(&file).unwrap();
        let InputDocument::Lcs(parsed) = parse_input(&text).unwrap() else {
            panic!("expected an lcs document");
        };
        let back = parsed.to_system().unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn correlation_roundtrip() {
        let p = corpus::two_mub_qubit_pme().correlation().unwrap();
        let file = CorrelationFile::from_correlation(&p);
        let text = serde_json::to_string(&file).unwrap();
        let InputDocument::Correlation(parsed) = parse_input(&text).unwrap() else {
            panic!("expected a correlation document");
        };
        let back = parsed.to_correlation().unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn parse_error_reports_location() {
        let err = parse_input("{ not json").unwrap_err();
        let Error::InvalidFormat { reason } = err else {
            panic!("expected a format error");
        };
        assert!(reason.contains("line"), "missing location in: {reason}");
    }
}
