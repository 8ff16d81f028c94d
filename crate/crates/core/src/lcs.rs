//! Linear constraint systems mod d: solution-group presentations, the
//! synchronous game construction, operator-solution verification, and
//! conversion of verified solutions into perfect strategies.

use num_complex::Complex64;

use crate::games::SynchronousGame;
use crate::numerics::CMatrix;
use crate::strategy::PmeStrategy;
use crate::{Error, Result};

/// One linear constraint Σ coefficients[j]·x_{support[j]} = rhs (mod d).
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub support: Vec<usize>,
    pub coefficients: Vec<u64>,
    pub rhs: u64,
}

/// A linear constraint system over Z_d.
#[derive(Debug, Clone, PartialEq)]
pub struct LcsSystem {
    modulus: u64,
    variables: usize,
    constraints: Vec<Constraint>,
}

/// Hard cap on the answer alphabet d^k of the derived game.
const MAX_ANSWERS: u64 = 4096;

impl LcsSystem {
    pub fn new(modulus: u64, variables: usize, constraints: Vec<Constraint>) -> Result<Self> {
        if modulus < 2 {
            return Err(Error::InvalidLcs {
                reason: format!("modulus must be at least 2, got {modulus}"),
            });
        }
        for (k, c) in constraints.iter().enumerate() {
            if c.support.len() != c.coefficients.len() {
                return Err(Error::InvalidLcs {
                    reason: format!("constraint {k}: support and coefficient counts differ"),
                });
            }
            let mut seen = std::collections::HashSet::new();
            for &v in &c.support {
                if v >= variables {
                    return Err(Error::InvalidLcs {
                        reason: format!("constraint {k}: variable {v} out of range"),
                    });
                }
                if !seen.insert(v) {
                    return Err(Error::InvalidLcs {
                        reason: format!("constraint {k}: repeated variable {v}"),
                    });
                }
            }
            for &coeff in &c.coefficients {
                if coeff % modulus == 0 {
                    return Err(Error::InvalidLcs {
                        reason: format!("constraint {k}: zero coefficient mod {modulus}"),
                    });
                }
            }
        }
        Ok(Self {
            modulus,
            variables,
            constraints,
        })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn variables(&self) -> usize {
        self.variables
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    /// Largest constraint support size.
    pub fn max_support(&self) -> usize {
        self.constraints.iter().map(|c| c.support.len()).max().unwrap_or(0)
    }
}

/// Abstract generator of the solution group: one unitary per variable plus
/// the central order-d element.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Generator {
    Variable(usize),
    Central,
}

/// Why a relation is present.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelationKind {
    GeneratorOrder,
    CentralOrder,
    CentralCommutation,
    SupportCommutation,
    ConstraintProduct,
}

/// A relation is a word in the generators (with integer exponents) whose
/// product is the group identity.
#[derive(Debug, Clone, PartialEq)]
pub struct Relation {
    pub kind: RelationKind,
    pub word: Vec<(Generator, i64)>,
}

/// Presentation of the solution group of an LCS: generators of order d, a
/// central order-d element, commutation within each constraint's support,
/// and one product relation per constraint.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionGroupPresentation {
    pub modulus: u64,
    pub variables: usize,
    pub relations: Vec<Relation>,
}

/// Builds the solution-group presentation of a constraint system.
pub fn solution_group(s: &LcsSystem) -> SolutionGroupPresentation {
    let d = s.modulus() as i64;
    let mut relations = Vec::new();
    for v in 0..s.variables() {
        relations.push(Relation {
            kind: RelationKind::GeneratorOrder,
            word: vec![(Generator::Variable(v), d)],
        });
    }
    relations.push(Relation {
        kind: RelationKind::CentralOrder,
        word: vec![(Generator::Central, d)],
    });
    for v in 0..s.variables() {
        relations.push(Relation {
            kind: RelationKind::CentralCommutation,
            word: vec![
                (Generator::Variable(v), 1),
                (Generator::Central, 1),
                (Generator::Variable(v), -1),
                (Generator::Central, -1),
            ],
        });
    }
    for c in s.constraints() {
        for i in 0..c.support.len() {
            for j in (i + 1)..c.support.len() {
                relations.push(Relation {
                    kind: RelationKind::SupportCommutation,
                    word: vec![
                        (Generator::Variable(c.support[i]), 1),
                        (Generator::Variable(c.support[j]), 1),
                        (Generator::Variable(c.support[i]), -1),
                        (Generator::Variable(c.support[j]), -1),
                    ],
                });
            }
        }
        let mut word: Vec<(Generator, i64)> = c
            .support
            .iter()
            .zip(&c.coefficients)
            .map(|(&v, &coeff)| (Generator::Variable(v), (coeff % s.modulus()) as i64))
            .collect();
        word.push((Generator::Central, -((c.rhs % s.modulus()) as i64)));
        relations.push(Relation {
            kind: RelationKind::ConstraintProduct,
            word,
        });
    }
    SolutionGroupPresentation {
        modulus: s.modulus(),
        variables: s.variables(),
        relations,
    }
}

/// Answer encoding of the derived game: an answer is a base-d integer whose
/// digit j (least significant first) assigns a value to the j-th support
/// variable of the question's constraint. Digits beyond the support are
/// padding and must be zero; answers with nonzero padding lose automatically.
pub fn decode_answer(answer: usize, modulus: u64, digits: usize) -> Vec<u64> {
    let mut a = answer as u64;
    let mut out = Vec::with_capacity(digits);
    for _ in 0..digits {
        out.push(a % modulus);
        a /= modulus;
    }
    out
}

/// Synchronous game of a constraint system: questions are constraints,
/// answers are padded support assignments, and two answers win when both
/// satisfy their constraints and agree on shared variables.
pub fn lcs_to_sync_game(s: &LcsSystem) -> Result<SynchronousGame> {
    let k = s.max_support();
    let d = s.modulus();
    let answers = d.checked_pow(k as u32).filter(|&n| n <= MAX_ANSWERS).ok_or(
        Error::InvalidLcs {
            reason: format!("answer alphabet d^k = {d}^{k} exceeds the supported size"),
        },
    )? as usize;
    let m = s.constraints().len();

    // One satisfying-assignment table per question.
    let valid: Vec<Vec<Option<Vec<u64>>>> = s
        .constraints()
        .iter()
        .map(|c| {
            (0..answers)
                .map(|ans| {
                    let digits = decode_answer(ans, d, k);
                    if digits[c.support.len()..].iter().any(|&v| v != 0) {
                        return None;
                    }
                    let sum: u64 = c
                        .coefficients
                        .iter()
                        .zip(&digits)
                        .map(|(&coeff, &val)| coeff * val % d)
                        .sum();
                    if sum % d == c.rhs % d {
                        Some(digits[..c.support.len()].to_vec())
                    } else {
                        None
                    }
                })
                .collect()
        })
        .collect();

    SynchronousGame::from_predicate(m, answers, |x, y, a, b| {
        let (Some(av), Some(bv)) = (&valid[x][a], &valid[y][b]) else {
            return false;
        };
        let cx = &s.constraints()[x];
        let cy = &s.constraints()[y];
        for (i, &vx) in cx.support.iter().enumerate() {
            for (j, &vy) in cy.support.iter().enumerate() {
                if vx == vy && av[i] != bv[j] {
                    return false;
                }
            }
        }
        true
    })
}

/// Concrete operator images of the solution-group generators.
#[derive(Debug, Clone)]
pub struct OperatorSolution {
    dim: usize,
    variables: Vec<CMatrix>,
    central: CMatrix,
}

impl OperatorSolution {
    pub fn new(variables: Vec<CMatrix>, central: CMatrix) -> Result<Self> {
        let dim = central.rows();
        if !central.is_square() {
            return Err(Error::NotSquare {
                rows: central.rows(),
                cols: central.cols(),
            });
        }
        for v in &variables {
            if v.rows() != dim || v.cols() != dim {
                return Err(Error::DimensionMismatch {
                    context: "operator solution dimension",
                    expected: dim,
                    got: v.rows(),
                });
            }
        }
        Ok(Self {
            dim,
            variables,
            central,
        })
    }

    /// Central element fixed to ω·I, the scalar demanded by the game-algebra
    /// quotient.
    pub fn with_scalar_central(variables: Vec<CMatrix>, modulus: u64) -> Result<Self> {
        let dim = variables
            .first()
            .map(|m| m.rows())
            .ok_or(Error::ZeroDimension)?;
        let central = CMatrix::identity(dim).scale(omega(modulus));
        Self::new(variables, central)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generator(&self, g: Generator) -> Result<&CMatrix> {
        match g {
            Generator::Variable(v) => self.variables.get(v).ok_or(Error::UnknownGenerator {
                x: v,
                a: usize::MAX,
            }),
            Generator::Central => Ok(&self.central),
        }
    }

    /// π(g)^e with negative exponents taken as adjoints (valid once
    /// unitarity has been verified).
    fn power(&self, g: Generator, e: i64) -> Result<CMatrix> {
        let base = self.generator(g)?;
        let mut acc = CMatrix::identity(self.dim);
        let op = if e >= 0 { base.clone() } else { base.adjoint() };
        for _ in 0..e.unsigned_abs() {
            acc = acc.mul(&op);
        }
        Ok(acc)
    }

    pub fn word_product(&self, word: &[(Generator, i64)]) -> Result<CMatrix> {
        let mut acc = CMatrix::identity(self.dim);
        for &(g, e) in word {
            acc = acc.mul(&self.power(g, e)?);
        }
        Ok(acc)
    }
}

/// Principal primitive d-th root of unity.
pub fn omega(modulus: u64) -> Complex64 {
    let theta = 2.0 * std::f64::consts::PI / modulus as f64;
    Complex64::new(theta.cos(), theta.sin())
}

/// Residual report of [`verify_operator_solution`].
#[derive(Debug, Clone)]
pub struct SolutionReport {
    /// Worst unitarity defect ‖U†U − I‖_F over all generators.
    pub unitarity: f64,
    /// Per-relation residuals ‖π(w) − I‖_F.
    pub relation_residuals: Vec<(RelationKind, f64)>,
    pub max_relation_residual: f64,
    /// ‖π(J) − ω·I‖_F.
    pub central_residual: f64,
    pub relations_pass: bool,
    /// Whether π(J) is the required scalar ω·I within tolerance.
    pub central_is_omega: bool,
    pub pass: bool,
}

/// Evaluates every relation of the presentation under the operator solution
/// and checks the central element against ω·I.
pub fn verify_operator_solution(
    p: &SolutionGroupPresentation,
    rep: &OperatorSolution,
    tol: f64,
) -> Result<SolutionReport> {
    let dim = rep.dim();
    let mut unitarity = 0.0_f64;
    for v in 0..p.variables {
        let u = rep.generator(Generator::Variable(v))?;
        unitarity = unitarity.max(u.adjoint().mul(u).sub(&CMatrix::identity(dim)).norm_fro());
    }
    let j = rep.generator(Generator::Central)?;
    unitarity = unitarity.max(j.adjoint().mul(j).sub(&CMatrix::identity(dim)).norm_fro());

    let ident = CMatrix::identity(dim);
    let mut relation_residuals = Vec::with_capacity(p.relations.len());
    let mut max_relation_residual = unitarity;
    for rel in &p.relations {
        let prod = rep.word_product(&rel.word)?;
        let residual = prod.sub(&ident).norm_fro();
        max_relation_residual = max_relation_residual.max(residual);
        relation_residuals.push((rel.kind, residual));
    }

    let central_residual = j.sub(&ident.scale(omega(p.modulus))).norm_fro();
    let relations_pass = max_relation_residual <= tol;
    let central_is_omega = central_residual <= tol;
    Ok(SolutionReport {
        unitarity,
        relation_residuals,
        max_relation_residual,
        central_residual,
        relations_pass,
        central_is_omega,
        pass: relations_pass && central_is_omega,
    })
}

/// Spectral projection of a unitary of order d onto the ω^value eigenspace:
/// (1/d) Σ_t ω^{−value·t} U^t.
fn root_of_unity_projection(u: &CMatrix, modulus: u64, value: u64) -> CMatrix {
    let d = modulus as f64;
    let mut acc = CMatrix::zeros(u.rows(), u.cols());
    let mut power = CMatrix::identity(u.rows());
    for t in 0..modulus {
        let phase = omega(modulus).powu((value * t % modulus) as u32).conj();
        acc = acc.add(&power.scale(phase));
        if t + 1 < modulus {
            power = power.mul(u);
        }
    }
    acc.scale(Complex64::new(1.0 / d, 0.0))
}

/// Converts a verified operator solution into the projective strategy whose
/// question-x measurement is the joint spectral family of the commuting
/// unitaries on constraint x's support, indexed by padded assignments.
///
/// Unsatisfying assignments receive the zero projection automatically, so
/// the induced correlation is perfect for the derived game.
pub fn representation_to_strategy(s: &LcsSystem, rep: &OperatorSolution) -> Result<PmeStrategy> {
    let presentation = solution_group(s);
    let report = verify_operator_solution(&presentation, rep, 1e-9)?;
    if !report.pass {
        return Err(Error::RelationsViolated {
            residual: report.max_relation_residual.max(report.central_residual),
            tolerance: 1e-9,
        });
    }
    let d = s.modulus();
    let k = s.max_support();
    let answers = (d as usize).pow(k as u32);
    let dim = rep.dim();

    let mut projections = Vec::with_capacity(s.constraints().len());
    for c in s.constraints() {
        // Spectral projections of each support unitary, value-indexed.
        let spectral: Vec<Vec<CMatrix>> = c
            .support
            .iter()
            .map(|&v| {
                let u = rep.generator(Generator::Variable(v))?;
                Ok((0..d).map(|val| root_of_unity_projection(u, d, val)).collect())
            })
            .collect::<Result<Vec<_>>>()?;
        let mut per_question = Vec::with_capacity(answers);
        for ans in 0..answers {
            let digits = decode_answer(ans, d, k);
            if digits[c.support.len()..].iter().any(|&v| v != 0) {
                per_question.push(CMatrix::zeros(dim, dim));
                continue;
            }
            let mut p = CMatrix::identity(dim);
            for (j, &val) in digits[..c.support.len()].iter().enumerate() {
                p = p.mul(&spectral[j][val as usize]);
            }
            per_question.push(p);
        }
        projections.push(per_question);
    }
    PmeStrategy::new(projections)
}
