//! Synchronous games, the ∨-combinator, and perfect-strategy lifting.

use num_complex::Complex64;

use crate::correlation::game_loss;
use crate::numerics::{partial_trace, rho_seminorm, CMatrix, DensityMatrix, Keep};
use crate::strategy::{Povm, TensorStrategy};
use crate::{Error, Result};

/// Synchronous nonlocal game: shared question and answer sets, and a
/// predicate that forces identical answers to identical questions.
#[derive(Debug, Clone, PartialEq)]
pub struct SynchronousGame {
    questions: usize,
    answers: usize,
    predicate: Vec<bool>,
}

impl SynchronousGame {
    /// Builds a game from an explicit predicate, rejecting rule sets that
    /// allow distinct answers to a repeated question.
    pub fn from_predicate(
        questions: usize,
        answers: usize,
        v: impl Fn(usize, usize, usize, usize) -> bool,
    ) -> Result<Self> {
        let mut predicate = vec![false; questions * questions * answers * answers];
        for x in 0..questions {
            for y in 0..questions {
                for a in 0..answers {
                    for b in 0..answers {
                        let val = v(x, y, a, b);
                        if val && x == y && a != b {
                            return Err(Error::NotSynchronousGame { x, a, b });
                        }
                        predicate[((x * questions + y) * answers + a) * answers + b] = val;
                    }
                }
            }
        }
        Ok(Self {
            questions,
            answers,
            predicate,
        })
    }

    pub fn questions(&self) -> usize {
        self.questions
    }

    pub fn answers(&self) -> usize {
        self.answers
    }

    #[inline]
    pub fn predicate(&self, x: usize, y: usize, a: usize, b: usize) -> bool {
        self.predicate[((x * self.questions + y) * self.answers + a) * self.answers + b]
    }

    /// Tuples (x,y,a,b) with V = 0, the compact file representation.
    pub fn zero_cells(&self) -> Vec<[usize; 4]> {
        let mut cells = Vec::new();
        for x in 0..self.questions {
            for y in 0..self.questions {
                for a in 0..self.answers {
                    for b in 0..self.answers {
                        if !self.predicate(x, y, a, b) {
                            cells.push([x, y, a, b]);
                        }
                    }
                }
            }
        }
        cells
    }
}

/// The combined game that lets the players pick which of the two games to
/// answer: question pairs, disjoint answer union, mixed answers lose.
///
/// Question (x1,x2) is encoded as `x1 * g2.questions() + x2`; answers of the
/// second game are shifted by `g1.answers()`.
pub fn or_game(g1: &SynchronousGame, g2: &SynchronousGame) -> SynchronousGame {
    let m = g1.questions() * g2.questions();
    let n = g1.answers() + g2.answers();
    let n1 = g1.answers();
    let m2 = g2.questions();
    SynchronousGame::from_predicate(m, n, |q, r, a, b| {
        let (x1, x2) = (q / m2, q % m2);
        let (y1, y2) = (r / m2, r % m2);
        if a < n1 && b < n1 {
            g1.predicate(x1, y1, a, b)
        } else if a >= n1 && b >= n1 {
            g2.predicate(x2, y2, a - n1, b - n1)
        } else {
            false
        }
    })
    .expect("the combinator preserves synchronicity")
}

/// Lifts a perfect strategy for `g1` to a perfect strategy for
/// `or_game(g1, g2)`: question (x1,x2) plays x1's measurement and assigns
/// zero effects to every second-game answer.
pub fn lift_strategy(
    s: &TensorStrategy,
    g1: &SynchronousGame,
    g2: &SynchronousGame,
) -> Result<TensorStrategy> {
    let loss = game_loss(&s.correlation()?, g1)?;
    if loss > 1e-10 {
        return Err(Error::NotPerfect {
            loss,
            tolerance: 1e-10,
        });
    }
    let combined = or_game(g1, g2);
    let zero_a = CMatrix::zeros(s.dim_a(), s.dim_a());
    let zero_b = CMatrix::zeros(s.dim_b(), s.dim_b());
    let mut alice = Vec::with_capacity(combined.questions());
    let mut bob = Vec::with_capacity(combined.questions());
    for q in 0..combined.questions() {
        let x1 = q / g2.questions();
        let mut ea: Vec<CMatrix> = s.alice(x1).effects().to_vec();
        ea.extend(std::iter::repeat(zero_a.clone()).take(g2.answers()));
        alice.push(Povm::new(ea)?);
        let mut fb: Vec<CMatrix> = s.bob(x1).effects().to_vec();
        fb.extend(std::iter::repeat(zero_b.clone()).take(g2.answers()));
        bob.push(Povm::new(fb)?);
    }
    TensorStrategy::new(alice, bob, s.state().clone())
}

/// Outcome of [`check_or_independence`].
#[derive(Debug, Clone)]
pub struct OrIndependenceReport {
    /// Game loss of the strategy on the combined game.
    pub loss: f64,
    /// Worst projectivity defect ‖E² − E‖_F over Alice's effects.
    pub projectivity_defect: f64,
    /// max over (x1, a1, x2, x2') of ‖E_{(x1,x2),a1} − E_{(x1,x2'),a1}‖_ρA.
    pub max_residual: f64,
    /// True when the loss stayed within the requested tolerance.
    pub perfect_within_tol: bool,
}

/// Measures how much Alice's first-game effects depend on the second-game
/// question, in the reduced-state seminorm. For exact perfect projective
/// strategies of the combined game the residual vanishes.
pub fn check_or_independence(
    s: &TensorStrategy,
    g1: &SynchronousGame,
    g2: &SynchronousGame,
    tol: f64,
) -> Result<OrIndependenceReport> {
    let combined = or_game(g1, g2);
    let corr = s.correlation()?;
    let loss = game_loss(&corr, &combined)?;
    let perfect_within_tol = loss <= tol;

    let rho_full = CMatrix::projector(s.state());
    let rho_a = DensityMatrix::new(partial_trace(&rho_full, s.dim_a(), s.dim_b(), Keep::A)?)?;

    let mut projectivity_defect = 0.0_f64;
    for q in 0..combined.questions() {
        for e in s.alice(q).effects() {
            projectivity_defect = projectivity_defect.max(e.mul(e).sub(e).norm_fro());
        }
    }

    let m2 = g2.questions();
    let mut max_residual = 0.0_f64;
    for x1 in 0..g1.questions() {
        for a1 in 0..g1.answers() {
            for x2 in 0..m2 {
                for x2p in (x2 + 1)..m2 {
                    let e = &s.alice(x1 * m2 + x2).effects()[a1];
                    let ep = &s.alice(x1 * m2 + x2p).effects()[a1];
                    let r = rho_seminorm(&e.sub(ep), &rho_a)?;
                    max_residual = max_residual.max(r);
                }
            }
        }
    }
    Ok(OrIndependenceReport {
        loss,
        projectivity_defect,
        max_residual,
        perfect_within_tol,
    })
}

/// Applies a unitary change of basis on each local side of a strategy.
/// Useful for constructing scrambled but equivalent instances.
pub fn conjugate_strategy(s: &TensorStrategy, ua: &CMatrix, ub: &CMatrix) -> Result<TensorStrategy> {
    let alice = (0..s.questions())
        .map(|x| {
            let effects = s
                .alice(x)
                .effects()
                .iter()
                .map(|e| ua.mul(e).mul(&ua.adjoint()))
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
                .map(|f| ub.mul(f).mul(&ub.adjoint()))
                .collect();
            Povm::new(effects)
        })
        .collect::<Result<Vec<_>>>()?;
    let state = crate::numerics::tensor(ua, ub).mul_vec(s.state());
    TensorStrategy::new(alice, bob, state.scale(Complex64::new(1.0, 0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    #[test]
    fn predicate_rejects_desynchronized_rules() {
        let r = SynchronousGame::from_predicate(1, 2, |_, _, _, _| true);
        assert!(matches!(r, Err(Error::NotSynchronousGame { .. })));
    }

    #[test]
    fn or_game_of_trivial_games() {
        // 1-question 1-answer always-win game, combined with itself:
        // 1 question, 2 answers, mixed answer pairs lose.
        let g = SynchronousGame::from_predicate(1, 1, |_, _, _, _| true).unwrap();
        let gg = or_game(&g, &g);
        assert_eq!(gg.questions(), 1);
        assert_eq!(gg.answers(), 2);
        assert!(gg.predicate(0, 0, 0, 0));
        assert!(gg.predicate(0, 0, 1, 1));
        assert!(!gg.predicate(0, 0, 0, 1));
        assert!(!gg.predicate(0, 0, 1, 0));
    }

    #[test]
    fn or_game_output_is_synchronous() {
        let g1 = corpus::edge_two_coloring_game();
        let g2 = SynchronousGame::from_predicate(1, 1, |_, _, _, _| true).unwrap();
        let gg = or_game(&g1, &g2);
        for q in 0..gg.questions() {
            for a in 0..gg.answers() {
                for b in 0..gg.answers() {
                    if a != b {
                        assert!(!gg.predicate(q, q, a, b));
                    }
                }
            }
        }
    }

    #[test]
    fn or_game_matches_case_rule_cell_by_cell() {
        let g1 = corpus::edge_two_coloring_game();
        let g2 = SynchronousGame::from_predicate(2, 2, |x, y, a, b| x != y || a == b).unwrap();
        let gg = or_game(&g1, &g2);
        let (m2, n1) = (g2.questions(), g1.answers());
        for q in 0..gg.questions() {
            for r in 0..gg.questions() {
                for a in 0..gg.answers() {
                    for b in 0..gg.answers() {
                        let expected = if a < n1 && b < n1 {
                            g1.predicate(q / m2, r / m2, a, b)
                        } else if a >= n1 && b >= n1 {
                            g2.predicate(q % m2, r % m2, a - n1, b - n1)
                        } else {
                            false
                        };
                        assert_eq!(gg.predicate(q, r, a, b), expected);
                    }
                }
            }
        }
    }

    #[test]
    fn lift_two_coloring_strategy() {
        let g1 = corpus::edge_two_coloring_game();
        let g2 = SynchronousGame::from_predicate(1, 1, |_, _, _, _| true).unwrap();
        let s = corpus::edge_two_coloring_strategy();
        let lifted = lift_strategy(&s, &g1, &g2).unwrap();
        let combined = or_game(&g1, &g2);
        let loss = game_loss(&lifted.correlation().unwrap(), &combined).unwrap();
        assert!(loss <= 1e-10, "lifted loss {loss}");

        // Restricted to first-game answers the correlation is unchanged.
        let base = s.correlation().unwrap();
        let full = lifted.correlation().unwrap();
        for x in 0..g1.questions() {
            for y in 0..g1.questions() {
                for a in 0..g1.answers() {
                    for b in 0..g1.answers() {
                        assert!((full.get(x, y, a, b) - base.get(x, y, a, b)).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn lift_rejects_imperfect_input() {
        let g1 = corpus::edge_two_coloring_game();
        let g2 = SynchronousGame::from_predicate(1, 1, |_, _, _, _| true).unwrap();
        // Strategy answering the same color everywhere loses on the edge.
        let bad = corpus::constant_color_strategy();
        assert!(matches!(
            lift_strategy(&bad, &g1, &g2),
            Err(Error::NotPerfect { .. })
        ));
    }

    #[test]
    fn independence_zero_for_lifted_strategy() {
        let g1 = corpus::edge_two_coloring_game();
        let g2 = SynchronousGame::from_predicate(2, 2, |x, y, a, b| x != y || a == b).unwrap();
        let s = corpus::edge_two_coloring_strategy();
        let lifted = lift_strategy(&s, &g1, &g2).unwrap();
        let report = check_or_independence(&lifted, &g1, &g2, 1e-9).unwrap();
        assert!(report.perfect_within_tol);
        assert!(report.max_residual <= 1e-12, "residual {}", report.max_residual);
    }
}
