//! Correlation tables, the ℓ¹ metric, synchronicity, and game loss.

use crate::games::SynchronousGame;
use crate::{Error, Result};

/// Joint conditional probability table p(a,b|x,y) over finite question and
/// answer sets, stored dense.
#[derive(Debug, Clone, PartialEq)]
pub struct Correlation {
    questions_x: usize,
    questions_y: usize,
    answers_a: usize,
    answers_b: usize,
    table: Vec<f64>,
}

/// Validation tolerances for correlation tables: entries may undershoot 0 or
/// overshoot 1 by `ENTRY_TOL`; each (x,y) slice must sum to 1 within `SUM_TOL`.
pub const ENTRY_TOL: f64 = 1e-10;
pub const SUM_TOL: f64 = 1e-9;

impl Correlation {
    /// Builds a table from a flat (x,y,a,b) row-major layout and validates
    /// the probability constraints.
    pub fn new(
        questions_x: usize,
        questions_y: usize,
        answers_a: usize,
        answers_b: usize,
        table: Vec<f64>,
    ) -> Result<Self> {
        let expected = questions_x * questions_y * answers_a * answers_b;
        if table.len() != expected {
            return Err(Error::DimensionMismatch {
                context: "correlation table",
                expected,
                got: table.len(),
            });
        }
        let c = Self {
            questions_x,
            questions_y,
            answers_a,
            answers_b,
            table,
        };
        for &p in &c.table {
            if !(-ENTRY_TOL..=1.0 + ENTRY_TOL).contains(&p) {
                return Err(Error::InvalidFormat {
                    reason: format!("correlation entry {p} outside [0,1]"),
                });
            }
        }
        for x in 0..questions_x {
            for y in 0..questions_y {
                let mut sum = 0.0;
                for a in 0..answers_a {
                    for b in 0..answers_b {
                        sum += c.get(x, y, a, b);
                    }
                }
                if (sum - 1.0).abs() > SUM_TOL {
                    return Err(Error::InvalidFormat {
                        reason: format!("correlation slice (x={x},y={y}) sums to {sum}"),
                    });
                }
            }
        }
        Ok(c)
    }

    pub fn questions_x(&self) -> usize {
        self.questions_x
    }

    pub fn questions_y(&self) -> usize {
        self.questions_y
    }

    pub fn answers_a(&self) -> usize {
        self.answers_a
    }

    pub fn answers_b(&self) -> usize {
        self.answers_b
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, a: usize, b: usize) -> f64 {
        self.table[((x * self.questions_y + y) * self.answers_a + a) * self.answers_b + b]
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    fn same_shape(&self, other: &Self) -> bool {
        self.questions_x == other.questions_x
            && self.questions_y == other.questions_y
            && self.answers_a == other.answers_a
            && self.answers_b == other.answers_b
    }

    /// Largest diagonal-question off-diagonal-answer entry, or `None` when
    /// the shape is not symmetric (X = Y, A = B).
    pub fn synchronicity_defect(&self) -> Option<f64> {
        if self.questions_x != self.questions_y || self.answers_a != self.answers_b {
            return None;
        }
        let mut worst = 0.0_f64;
        for x in 0..self.questions_x {
            for a in 0..self.answers_a {
                for b in 0..self.answers_b {
                    if a != b {
                        worst = worst.max(self.get(x, x, a, b));
                    }
                }
            }
        }
        Some(worst)
    }
}

/// ℓ¹ distance Σ |p − q| over all (x,y,a,b).
pub fn l1_distance(p: &Correlation, q: &Correlation) -> Result<f64> {
    if !p.same_shape(q) {
        return Err(Error::DimensionMismatch {
            context: "l1 distance between correlations",
            expected: p.table.len(),
            got: q.table.len(),
        });
    }
    Ok(p.table
        .iter()
        .zip(&q.table)
        .map(|(a, b)| (a - b).abs())
        .sum())
}

/// True iff identical questions force identical answers within `tol`.
///
/// Shape mismatches (X ≠ Y or A ≠ B) report as `false`.
pub fn is_synchronous(p: &Correlation, tol: f64) -> bool {
    match p.synchronicity_defect() {
        Some(defect) => defect <= tol,
        None => false,
    }
}

/// Sum of probability mass on predicate-violating tuples.
pub fn game_loss(p: &Correlation, g: &SynchronousGame) -> Result<f64> {
    if p.questions_x != g.questions()
        || p.questions_y != g.questions()
        || p.answers_a != g.answers()
        || p.answers_b != g.answers()
    {
        return Err(Error::DimensionMismatch {
            context: "game loss (correlation vs game shape)",
            expected: g.questions() * g.questions() * g.answers() * g.answers(),
            got: p.table.len(),
        });
    }
    let mut loss = 0.0;
    for x in 0..g.questions() {
        for y in 0..g.questions() {
            for a in 0..g.answers() {
                for b in 0..g.answers() {
                    if !g.predicate(x, y, a, b) {
                        loss += p.get(x, y, a, b);
                    }
                }
            }
        }
    }
    Ok(loss)
}

/// True iff p places at most `tol` on every predicate-violating cell.
pub fn is_perfect(p: &Correlation, g: &SynchronousGame, tol: f64) -> Result<bool> {
    if p.questions_x != g.questions() || p.answers_a != g.answers() {
        return Err(Error::DimensionMismatch {
            context: "perfection check (correlation vs game shape)",
            expected: g.questions(),
            got: p.questions_x,
        });
    }
    for x in 0..g.questions() {
        for y in 0..g.questions() {
            for a in 0..g.answers() {
                for b in 0..g.answers() {
                    if !g.predicate(x, y, a, b) && p.get(x, y, a, b) > tol {
                        return Ok(false);
                    }
                }
            }
        }
    }
    Ok(true)
}
