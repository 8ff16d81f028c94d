//! Reference games, strategies, and operator solutions used across the test
//! suites and as CLI fixtures.

use num_complex::Complex64;

use crate::games::SynchronousGame;
use crate::lcs::{lcs_to_sync_game, representation_to_strategy, Constraint, LcsSystem, OperatorSolution};
use crate::numerics::CMatrix;
use crate::strategy::{maximally_entangled, PmeStrategy, Povm, TensorStrategy};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Dimension-1 projective strategy with `questions` questions and `answers`
/// answers; every question deterministically answers 0.
pub fn trivial_pme(questions: usize, answers: usize) -> PmeStrategy {
    let projections = (0..questions)
        .map(|_| {
            (0..answers)
                .map(|a| CMatrix::from_real(1, 1, &[if a == 0 { 1.0 } else { 0.0 }]).unwrap())
                .collect()
        })
        .collect();
    PmeStrategy::new(projections).expect("trivial strategy is valid")
}

/// Single-question qubit strategy measuring in the computational basis.
pub fn computational_qubit_pme() -> PmeStrategy {
    let p0 = CMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, 0.0]).unwrap();
    let p1 = CMatrix::from_real(2, 2, &[0.0, 0.0, 0.0, 1.0]).unwrap();
    PmeStrategy::new(vec![vec![p0, p1]]).expect("basis projections are valid")
}

/// Two-question qubit strategy measuring in two mutually unbiased bases
/// (computational and Hadamard).
pub fn two_mub_qubit_pme() -> PmeStrategy {
    let p0 = CMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, 0.0]).unwrap();
    let p1 = CMatrix::from_real(2, 2, &[0.0, 0.0, 0.0, 1.0]).unwrap();
    let plus = CMatrix::from_real(2, 2, &[0.5, 0.5, 0.5, 0.5]).unwrap();
    let minus = CMatrix::from_real(2, 2, &[0.5, -0.5, -0.5, 0.5]).unwrap();
    PmeStrategy::new(vec![vec![p0, p1], vec![plus, minus]]).expect("MUB projections are valid")
}

/// Two-vertex graph-coloring game on a single edge with two colors:
/// identical questions need identical colors, adjacent questions need
/// distinct colors.
pub fn edge_two_coloring_game() -> SynchronousGame {
    SynchronousGame::from_predicate(2, 2, |x, y, a, b| if x == y { a == b } else { a != b })
        .expect("coloring predicate is synchronous")
}

/// Deterministic perfect strategy for [`edge_two_coloring_game`]: vertex x
/// answers color x. Dimension-1 diagonal projections on a product state.
pub fn edge_two_coloring_strategy() -> TensorStrategy {
    let povm_for = |color: usize| {
        Povm::new(vec![
            CMatrix::from_real(1, 1, &[if color == 0 { 1.0 } else { 0.0 }]).unwrap(),
            CMatrix::from_real(1, 1, &[if color == 1 { 1.0 } else { 0.0 }]).unwrap(),
        ])
        .unwrap()
    };
    let alice = vec![povm_for(0), povm_for(1)];
    let bob = vec![povm_for(0), povm_for(1)];
    let state = crate::numerics::CVector::from_real(&[1.0]);
    TensorStrategy::new(alice, bob, state).expect("deterministic strategy is valid")
}

/// Imperfect strategy answering color 0 at every vertex.
pub fn constant_color_strategy() -> TensorStrategy {
    let povm = Povm::new(vec![
        CMatrix::from_real(1, 1, &[1.0]).unwrap(),
        CMatrix::from_real(1, 1, &[0.0]).unwrap(),
    ])
    .unwrap();
    let alice = vec![povm.clone(), povm.clone()];
    let bob = vec![povm.clone(), povm];
    let state = crate::numerics::CVector::from_real(&[1.0]);
    TensorStrategy::new(alice, bob, state).expect("constant strategy is valid")
}

/// The two-MUB strategy embedded into dimension 3 with an unused third
/// dimension absorbed by the first effect of each question.
pub fn padded_mub_strategy() -> TensorStrategy {
    let s = two_mub_qubit_pme().as_tensor().unwrap();
    let embed = |m: &CMatrix, absorb_pad: bool| {
        let mut out = CMatrix::zeros(3, 3);
        for i in 0..2 {
            for j in 0..2 {
                out[(i, j)] = m[(i, j)];
            }
        }
        if absorb_pad {
            out[(2, 2)] = c(1.0, 0.0);
        }
        out
    };
    let lift_povm = |p: &Povm| {
        Povm::new(
            p.effects()
                .iter()
                .enumerate()
                .map(|(a, e)| embed(e, a == 0))
                .collect(),
        )
        .unwrap()
    };
    let alice = (0..2).map(|x| lift_povm(s.alice(x))).collect();
    let bob = (0..2).map(|y| lift_povm(s.bob(y))).collect();
    // State keeps its support on the embedded 2x2 block.
    let base = s.state();
    let mut state = crate::numerics::CVector::zeros(9);
    for i in 0..2 {
        for j in 0..2 {
            state[i * 3 + j] = base[i * 2 + j];
        }
    }
    TensorStrategy::new(alice, bob, state).expect("padded strategy is valid")
}

/// Depolarized two-sided copy of a projective strategy: each effect is mixed
/// with the uniform POVM at rate `eta`, the state stays maximally entangled.
pub fn depolarized_pme_strategy(s: &PmeStrategy, eta: f64) -> TensorStrategy {
    let d = s.dim();
    let n = s.answers() as f64;
    let mix = |e: &CMatrix| {
        e.scale(c(1.0 - eta, 0.0))
            .add(&CMatrix::identity(d).scale(c(eta / n, 0.0)))
    };
    let alice = (0..s.questions())
        .map(|x| Povm::new((0..s.answers()).map(|a| mix(s.projection(x, a))).collect()).unwrap())
        .collect();
    let bob = (0..s.questions())
        .map(|y| {
            Povm::new(
                (0..s.answers())
                    .map(|b| mix(&s.bob_projection(y, b)))
                    .collect(),
            )
            .unwrap()
        })
        .collect();
    TensorStrategy::new(alice, bob, maximally_entangled(d).unwrap())
        .expect("depolarized strategy is valid")
}

/// The 3×3 grid parity system mod 2: rows sum to 0, columns sum to 1.
/// Classically unsatisfiable, with a four-dimensional operator solution.
pub fn magic_square_lcs() -> LcsSystem {
    let mut constraints = Vec::new();
    for r in 0..3 {
        constraints.push(Constraint {
            support: vec![3 * r, 3 * r + 1, 3 * r + 2],
            coefficients: vec![1, 1, 1],
            rhs: 0,
        });
    }
    for col in 0..3 {
        constraints.push(Constraint {
            support: vec![col, col + 3, col + 6],
            coefficients: vec![1, 1, 1],
            rhs: 1,
        });
    }
    LcsSystem::new(2, 9, constraints).expect("grid parity system is valid")
}

/// Synchronous game derived from [`magic_square_lcs`]: 6 questions
/// (3 rows, 3 columns), 8 answers (padded 3-bit assignments).
pub fn magic_square_game() -> SynchronousGame {
    lcs_to_sync_game(&magic_square_lcs()).expect("grid system stays in range")
}

/// Two-qubit observable solution of [`magic_square_lcs`] with the central
/// element represented by −I: the classic Pauli grid
///
/// ```text
///    I⊗Z    Z⊗I    Z⊗Z
///    X⊗I    I⊗X    X⊗X
///   −X⊗Z   −Z⊗X    Y⊗Y
/// ```
///
/// Rows multiply to +I, columns to −I, and entries within each line commute.
pub fn magic_square_solution() -> OperatorSolution {
    let ident = CMatrix::identity(2);
    let x = CMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
    let z = CMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, -1.0]).unwrap();
    let y = CMatrix::from_entries(
        2,
        2,
        vec![c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)],
    )
    .unwrap();
    let t = crate::numerics::tensor;
    let variables = vec![
        t(&ident, &z),
        t(&z, &ident),
        t(&z, &z),
        t(&x, &ident),
        t(&ident, &x),
        t(&x, &x),
        t(&x, &z).scale(c(-1.0, 0.0)),
        t(&z, &x).scale(c(-1.0, 0.0)),
        t(&y, &y),
    ];
    OperatorSolution::with_scalar_central(variables, 2).expect("Pauli grid is a valid solution")
}

/// Perfect projective strategy for the grid-parity game obtained by pushing
/// [`magic_square_solution`] through the joint-spectral-projection pipeline.
pub fn magic_square_pme() -> PmeStrategy {
    representation_to_strategy(&magic_square_lcs(), &magic_square_solution())
        .expect("the Pauli solution verifies at machine precision")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlation::{game_loss, is_synchronous};

    #[test]
    fn corpus_strategies_validate() {
        assert_eq!(trivial_pme(3, 2).questions(), 3);
        assert_eq!(computational_qubit_pme().dim(), 2);
        assert_eq!(two_mub_qubit_pme().questions(), 2);
        assert_eq!(magic_square_pme().dim(), 4);
        assert_eq!(magic_square_pme().questions(), 6);
        assert_eq!(magic_square_pme().answers(), 8);
    }

    #[test]
    fn magic_square_strategy_is_perfect_and_synchronous() {
        let s = magic_square_pme();
        let p = s.correlation().unwrap();
        assert!(is_synchronous(&p, 1e-10));
        let loss = game_loss(&p, &magic_square_game()).unwrap();
        assert!(loss <= 1e-10);
    }

    #[test]
    fn depolarized_strategy_moves_away_from_ideal() {
        let s = two_mub_qubit_pme();
        let clean = s.correlation().unwrap();
        let noisy = depolarized_pme_strategy(&s, 1e-2).correlation().unwrap();
        let dist = crate::correlation::l1_distance(&clean, &noisy).unwrap();
        assert!(dist > 1e-4);
        assert!(dist < 1.0);
    }
}
