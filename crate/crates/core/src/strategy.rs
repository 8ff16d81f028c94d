//! Tensor-product, projective maximally-entangled, and mixed strategies,
//! and the correlations they induce.

use num_complex::Complex64;

use crate::correlation::Correlation;
use crate::numerics::{
    columns_to_matrix, eigh_with_tol, partial_trace, schmidt, tensor, vec_of, CMatrix, CVector,
    DensityMatrix, Keep, SCHMIDT_RTOL,
};
use crate::{Error, Result};

/// Validation tolerance for POVM completeness, positivity, projectivity,
/// and state normalization.
pub const VALIDATION_TOL: f64 = 1e-10;

/// Positive-operator-valued measure: effects are PSD and sum to the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    effects: Vec<CMatrix>,
}

impl Povm {
    pub fn new(effects: Vec<CMatrix>) -> Result<Self> {
        let dim = match effects.first() {
            Some(e) => e.rows(),
            None => {
                return Err(Error::InvalidPovm {
                    reason: "no effects",
                    residual: 0.0,
                })
            }
        };
        let mut sum = CMatrix::zeros(dim, dim);
        for e in &effects {
            if e.rows() != dim || e.cols() != dim {
                return Err(Error::DimensionMismatch {
                    context: "POVM effect dimension",
                    expected: dim,
                    got: e.rows(),
                });
            }
            let herm = e.hermiticity_defect();
            if herm > VALIDATION_TOL {
                return Err(Error::InvalidPovm {
                    reason: "effect is not Hermitian",
                    residual: herm,
                });
            }
            let (vals, _) = eigh_with_tol(e, 1e-6)?;
            let min = vals.last().copied().unwrap_or(0.0);
            if min < -VALIDATION_TOL {
                return Err(Error::InvalidPovm {
                    reason: "effect is not positive semidefinite",
                    residual: -min,
                });
            }
            sum = sum.add(e);
        }
        let completeness = sum.sub(&CMatrix::identity(dim)).norm_fro();
        if completeness > VALIDATION_TOL {
            return Err(Error::InvalidPovm {
                reason: "effects do not sum to the identity",
                residual: completeness,
            });
        }
        Ok(Self { effects })
    }

    pub fn outcomes(&self) -> usize {
        self.effects.len()
    }

    pub fn dim(&self) -> usize {
        self.effects[0].rows()
    }

    pub fn effects(&self) -> &[CMatrix] {
        &self.effects
    }
}

/// Finite-dimensional tensor-product strategy: local POVM families for both
/// players and a shared pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorStrategy {
    dim_a: usize,
    dim_b: usize,
    alice: Vec<Povm>,
    bob: Vec<Povm>,
    state: CVector,
}

impl TensorStrategy {
    pub fn new(alice: Vec<Povm>, bob: Vec<Povm>, state: CVector) -> Result<Self> {
        if alice.is_empty() || alice.len() != bob.len() {
            return Err(Error::DimensionMismatch {
                context: "question count (alice vs bob)",
                expected: alice.len(),
                got: bob.len(),
            });
        }
        let dim_a = alice[0].dim();
        let dim_b = bob[0].dim();
        let n_a = alice[0].outcomes();
        let n_b = bob[0].outcomes();
        for p in &alice {
            if p.dim() != dim_a || p.outcomes() != n_a {
                return Err(Error::DimensionMismatch {
                    context: "alice POVM shapes must be uniform",
                    expected: dim_a,
                    got: p.dim(),
                });
            }
        }
        for p in &bob {
            if p.dim() != dim_b || p.outcomes() != n_b {
                return Err(Error::DimensionMismatch {
                    context: "bob POVM shapes must be uniform",
                    expected: dim_b,
                    got: p.dim(),
                });
            }
        }
        if state.dim() != dim_a * dim_b {
            return Err(Error::DimensionMismatch {
                context: "state dimension",
                expected: dim_a * dim_b,
                got: state.dim(),
            });
        }
        state.assert_unit(VALIDATION_TOL)?;
        Ok(Self {
            dim_a,
            dim_b,
            alice,
            bob,
            state,
        })
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn questions(&self) -> usize {
        self.alice.len()
    }

    pub fn answers_a(&self) -> usize {
        self.alice[0].outcomes()
    }

    pub fn answers_b(&self) -> usize {
        self.bob[0].outcomes()
    }

    pub fn alice(&self, x: usize) -> &Povm {
        &self.alice[x]
    }

    pub fn bob(&self, y: usize) -> &Povm {
        &self.bob[y]
    }

    pub fn state(&self) -> &CVector {
        &self.state
    }

    /// p(a,b|x,y) = <ψ| E_{x,a} ⊗ F_{y,b} |ψ>.
    pub fn correlation(&self) -> Result<Correlation> {
        let m = self.questions();
        let (na, nb) = (self.answers_a(), self.answers_b());
        let mut table = vec![0.0; m * m * na * nb];
        for x in 0..m {
            for a in 0..na {
                // (E ⊗ I)|ψ> computed once per (x,a) sweep.
                let e = &self.alice[x].effects()[a];
                let e_psi = apply_left(e, &self.state, self.dim_a, self.dim_b);
                for y in 0..m {
                    for b in 0..nb {
                        let f = &self.bob[y].effects()[b];
                        let ef_psi = apply_right(f, &e_psi, self.dim_a, self.dim_b);
                        let p = self.state.inner(&ef_psi).re;
                        table[((x * m + y) * na + a) * nb + b] = p.clamp(0.0, 1.0);
                    }
                }
            }
        }
        Correlation::new(m, m, na, nb, table)
    }

    /// Reduced density matrices of the shared state.
    pub fn reduced_states(&self) -> Result<(DensityMatrix, DensityMatrix)> {
        let rho = CMatrix::projector(&self.state);
        let rho_a = DensityMatrix::new(partial_trace(&rho, self.dim_a, self.dim_b, Keep::A)?)?;
        let rho_b = DensityMatrix::new(partial_trace(&rho, self.dim_a, self.dim_b, Keep::B)?)?;
        Ok((rho_a, rho_b))
    }
}

/// (E ⊗ I)|ψ> for E acting on the first factor.
pub(crate) fn apply_left(e: &CMatrix, psi: &CVector, da: usize, db: usize) -> CVector {
    let mut out = CVector::zeros(da * db);
    for i in 0..da {
        for j in 0..da {
            let s = e[(i, j)];
            if s == Complex64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..db {
                let v = out[i * db + k] + s * psi[j * db + k];
                out[i * db + k] = v;
            }
        }
    }
    out
}

/// (I ⊗ F)|ψ> for F acting on the second factor.
pub(crate) fn apply_right(f: &CMatrix, psi: &CVector, da: usize, db: usize) -> CVector {
    let mut out = CVector::zeros(da * db);
    for k in 0..db {
        for l in 0..db {
            let s = f[(k, l)];
            if s == Complex64::new(0.0, 0.0) {
                continue;
            }
            for i in 0..da {
                let v = out[i * db + k] + s * psi[i * db + l];
                out[i * db + k] = v;
            }
        }
    }
    out
}

/// Projective maximally-entangled strategy: Alice measures projectively,
/// Bob's effects are the entrywise transposes, and the shared state is the
/// maximally entangled one. Only Alice's projections are stored.
#[derive(Debug, Clone, PartialEq)]
pub struct PmeStrategy {
    dim: usize,
    projections: Vec<Vec<CMatrix>>,
}

impl PmeStrategy {
    pub fn new(projections: Vec<Vec<CMatrix>>) -> Result<Self> {
        let dim = match projections.first().and_then(|q| q.first()) {
            Some(p) => p.rows(),
            None => {
                return Err(Error::InvalidProjection {
                    reason: "no projections",
                    residual: 0.0,
                })
            }
        };
        let n = projections[0].len();
        for per_question in &projections {
            if per_question.len() != n {
                return Err(Error::DimensionMismatch {
                    context: "answers per question must be uniform",
                    expected: n,
                    got: per_question.len(),
                });
            }
            let mut sum = CMatrix::zeros(dim, dim);
            for p in per_question {
                if p.rows() != dim || p.cols() != dim {
                    return Err(Error::DimensionMismatch {
                        context: "projection dimension",
                        expected: dim,
                        got: p.rows(),
                    });
                }
                let herm = p.hermiticity_defect();
                if herm > VALIDATION_TOL {
                    return Err(Error::InvalidProjection {
                        reason: "not Hermitian",
                        residual: herm,
                    });
                }
                let idem = p.mul(p).sub(p).norm_fro();
                if idem > VALIDATION_TOL {
                    return Err(Error::InvalidProjection {
                        reason: "not idempotent",
                        residual: idem,
                    });
                }
                sum = sum.add(p);
            }
            let completeness = sum.sub(&CMatrix::identity(dim)).norm_fro();
            if completeness > VALIDATION_TOL {
                return Err(Error::InvalidProjection {
                    reason: "projections do not sum to the identity",
                    residual: completeness,
                });
            }
        }
        Ok(Self { dim, projections })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn questions(&self) -> usize {
        self.projections.len()
    }

    pub fn answers(&self) -> usize {
        self.projections[0].len()
    }

    pub fn projection(&self, x: usize, a: usize) -> &CMatrix {
        &self.projections[x][a]
    }

    pub fn projections(&self) -> &[Vec<CMatrix>] {
        &self.projections
    }

    /// Bob's effect for (y,b): the entrywise transpose in the stored basis.
    pub fn bob_projection(&self, y: usize, b: usize) -> CMatrix {
        self.projections[y][b].transpose()
    }

    /// p(a,b|x,y) = Tr(Ẽ_{x,a} Ẽ_{y,b}) / d.
    pub fn correlation(&self) -> Result<Correlation> {
        let m = self.questions();
        let n = self.answers();
        let d = self.dim as f64;
        let mut table = vec![0.0; m * m * n * n];
        for x in 0..m {
            for y in 0..m {
                for a in 0..n {
                    for b in 0..n {
                        let p = self.projections[x][a]
                            .mul(&self.projections[y][b])
                            .trace()
                            .re
                            / d;
                        table[((x * m + y) * n + a) * n + b] = p.clamp(0.0, 1.0);
                    }
                }
            }
        }
        Correlation::new(m, m, n, n, table)
    }

    /// Expands the stored projections into an explicit tensor strategy with
    /// transposed Bob effects and the maximally entangled state.
    pub fn as_tensor(&self) -> Result<TensorStrategy> {
        let alice = self
            .projections
            .iter()
            .map(|per_q| Povm::new(per_q.clone()))
            .collect::<Result<Vec<_>>>()?;
        let bob = self
            .projections
            .iter()
            .map(|per_q| Povm::new(per_q.iter().map(|p| p.transpose()).collect()))
            .collect::<Result<Vec<_>>>()?;
        TensorStrategy::new(alice, bob, maximally_entangled(self.dim)?)
    }
}

/// Strategy with a mixed shared state in place of a pure one.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedStrategy {
    dim_a: usize,
    dim_b: usize,
    alice: Vec<Povm>,
    bob: Vec<Povm>,
    rho: DensityMatrix,
}

impl MixedStrategy {
    pub fn new(alice: Vec<Povm>, bob: Vec<Povm>, rho: DensityMatrix) -> Result<Self> {
        if alice.is_empty() || alice.len() != bob.len() {
            return Err(Error::DimensionMismatch {
                context: "question count (alice vs bob)",
                expected: alice.len(),
                got: bob.len(),
            });
        }
        let dim_a = alice[0].dim();
        let dim_b = bob[0].dim();
        if rho.dim() != dim_a * dim_b {
            return Err(Error::DimensionMismatch {
                context: "mixed state dimension",
                expected: dim_a * dim_b,
                got: rho.dim(),
            });
        }
        Ok(Self {
            dim_a,
            dim_b,
            alice,
            bob,
            rho,
        })
    }

    pub fn rho(&self) -> &DensityMatrix {
        &self.rho
    }

    /// p(a,b|x,y) = Tr(ρ (E_{x,a} ⊗ F_{y,b})).
    pub fn correlation(&self) -> Result<Correlation> {
        let m = self.alice.len();
        let (na, nb) = (self.alice[0].outcomes(), self.bob[0].outcomes());
        let mut table = vec![0.0; m * m * na * nb];
        for x in 0..m {
            for y in 0..m {
                for a in 0..na {
                    for b in 0..nb {
                        let op = tensor(&self.alice[x].effects()[a], &self.bob[y].effects()[b]);
                        let p = self.rho.matrix().mul(&op).trace().re;
                        table[((x * m + y) * na + a) * nb + b] = p.clamp(0.0, 1.0);
                    }
                }
            }
        }
        Correlation::new(m, m, na, nb, table)
    }
}

/// vec(I_d / sqrt(d)): the maximally entangled state on C^d ⊗ C^d.
pub fn maximally_entangled(d: usize) -> Result<CVector> {
    if d == 0 {
        return Err(Error::ZeroDimension);
    }
    let m = CMatrix::identity(d).scale(Complex64::new(1.0 / (d as f64).sqrt(), 0.0));
    vec_of(&m)
}

/// Restricts a strategy to the joint support of its reduced states, producing
/// an equivalent strategy whose reduced states have full rank.
///
/// The compression bases are the Schmidt vectors of the shared state with
/// coefficients above the relative cutoff.
pub fn restrict_to_support(s: &TensorStrategy) -> Result<TensorStrategy> {
    let sc = schmidt(s.state(), s.dim_a(), s.dim_b())?;
    let rank = sc.rank(SCHMIDT_RTOL);
    let left = columns_to_matrix(&sc.left[..rank]);
    let right = columns_to_matrix(&sc.right[..rank]);

    let alice = (0..s.questions())
        .map(|x| {
            let effects = s
                .alice(x)
                .effects()
                .iter()
                .map(|e| left.adjoint().mul(e).mul(&left))
                .collect();
            Povm::new(effects)
        })
        .collect::<Result<Vec<_>>>()?;
    let bob = (0..s.questions())
        .map(|y| {
            let effects = s
                .bob(y)
                .effects()
                .iter()
                .map(|f| right.adjoint().mul(f).mul(&right))
                .collect();
            Povm::new(effects)
        })
        .collect::<Result<Vec<_>>>()?;

    // In the Schmidt bases the state becomes Σ s_i |i>|i>.
    let mut state = CVector::zeros(rank * rank);
    for (i, c) in sc.coefficients[..rank].iter().enumerate() {
        state[i * rank + i] = Complex64::new(*c, 0.0);
    }
    TensorStrategy::new(alice, bob, state.normalize())
}
