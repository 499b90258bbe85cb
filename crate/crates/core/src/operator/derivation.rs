use std::sync::OnceLock;

use nalgebra::DMatrix;

use super::SymMatrix;
use crate::error::Result;
use crate::ptuples::{check_dims, enumerate_tuples, relation_unchecked, Relation, TupleTable};

/// One matrix coordinate `a_{kl}` (0-based) feeding entry `(row, col)` of
/// the derivation matrix with coefficient `sign`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Feed {
    pub row: usize,
    pub col: usize,
    pub k: usize,
    pub l: usize,
    pub sign: i8,
}

/// The linear map `A -> D_A` written out as a list of feeds.
///
/// Off-diagonal entry `(α, β)` with `α, β` adjacent reads the coordinate
/// `a_{qr}` (`q = α \ β`, `r = β \ α`), so `a_{kl}` and `a_{lk}` feed the
/// transposed positions. Diagonal entry `(α, α)` reads `a_{ii}` for `i ∈ α`.
#[derive(Debug, Clone)]
pub struct DerivationPattern {
    table: TupleTable,
    feeds: Vec<Feed>,
}

impl DerivationPattern {
    pub fn new(n: usize, p: usize) -> Result<Self> {
        check_dims(n, p)?;
        let table = enumerate_tuples(n, p)?;
        let mut feeds = Vec::new();
        for (row, a) in table.tuples().iter().enumerate() {
            for (col, b) in table.tuples().iter().enumerate() {
                match relation_unchecked(a, b) {
                    Relation::Equal => feeds.extend(a.indices().iter().map(|&i| Feed {
                        row,
                        col,
                        k: i - 1,
                        l: i - 1,
                        sign: 1,
                    })),
                    Relation::Adjacent { q, r, sign } => feeds.push(Feed {
                        row,
                        col,
                        k: q - 1,
                        l: r - 1,
                        sign,
                    }),
                    Relation::Disjointish => {}
                }
            }
        }
        Ok(Self { table, feeds })
    }

    pub fn table(&self) -> &TupleTable {
        &self.table
    }

    pub fn feeds(&self) -> &[Feed] {
        &self.feeds
    }

    pub fn dim(&self) -> usize {
        self.table.len()
    }

    /// Applies the pattern to an arbitrary square matrix, treating `a_{kl}`
    /// and `a_{lk}` as independent coordinates.
    pub fn apply(&self, a: &DMatrix<f64>) -> DMatrix<f64> {
        let dim = self.dim();
        let mut d = DMatrix::zeros(dim, dim);
        for f in &self.feeds {
            d[(f.row, f.col)] += f64::from(f.sign) * a[(f.k, f.l)];
        }
        d
    }
}

/// `D_A` in the lexicographic wedge basis.
#[derive(Debug, Clone)]
pub struct DerivationMatrix {
    pub(crate) pattern: DerivationPattern,
    pub(crate) entries: DMatrix<f64>,
}

impl DerivationMatrix {
    pub fn n(&self) -> usize {
        self.pattern.table.n()
    }

    pub fn p(&self) -> usize {
        self.pattern.table.p()
    }

    pub fn dim(&self) -> usize {
        self.pattern.dim()
    }

    pub fn table(&self) -> &TupleTable {
        &self.pattern.table
    }

    pub fn pattern(&self) -> &DerivationPattern {
        &self.pattern
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[(row, col)]
    }
}

pub fn build_derivation(a: &SymMatrix, p: usize) -> Result<DerivationMatrix> {
    debug_assert!(
        sign_convention_holds(),
        "derivation sign convention drifted"
    );
    let pattern = DerivationPattern::new(a.n(), p)?;
    let entries = pattern.apply(a.as_matrix());
    Ok(DerivationMatrix { pattern, entries })
}

/// `det D` via full-pivoting LU.
pub fn mp_via_determinant(d: &DerivationMatrix) -> f64 {
    d.entries.clone().full_piv_lu().determinant()
}

/// The two displayed wedge-basis matrices for `(n, p) = (3, 2)` and
/// `(4, 2)`. `"d"` marks a diagonal entry, `"0"` a structural zero, and
/// `"±kl"` the coordinate `±a_{kl}` (1-based).
pub const DISPLAYED_N3: [[&str; 3]; 3] = [
    ["d", "+23", "-13"],
    ["+32", "d", "+12"],
    ["-31", "+21", "d"],
];

pub const DISPLAYED_N4: [[&str; 6]; 6] = [
    ["d", "+23", "+24", "-13", "-14", "0"],
    ["+32", "d", "+34", "+12", "0", "-14"],
    ["+42", "+43", "d", "0", "+12", "+13"],
    ["-31", "+21", "0", "d", "+34", "-24"],
    ["-41", "0", "+21", "+43", "d", "+23"],
    ["0", "-41", "+31", "-42", "+32", "d"],
];

fn pattern_matches<const D: usize>(n: usize, shown: &[[&str; D]; D]) -> bool {
    let Ok(pattern) = DerivationPattern::new(n, 2) else {
        return false;
    };
    for (row, line) in shown.iter().enumerate() {
        for (col, cell) in line.iter().enumerate() {
            let feeds: Vec<&Feed> = pattern
                .feeds()
                .iter()
                .filter(|f| f.row == row && f.col == col)
                .collect();
            let ok = match *cell {
                "0" => feeds.is_empty(),
                "d" => {
                    row == col
                        && feeds.len() == 2
                        && pattern.table().get(row).indices().iter().all(|&i| {
                            feeds
                                .iter()
                                .any(|f| f.k == i - 1 && f.l == i - 1 && f.sign == 1)
                        })
                }
                s => {
                    let sign: i8 = if s.starts_with('-') { -1 } else { 1 };
                    let digits: Vec<usize> = s[1..]
                        .chars()
                        .map(|c| c.to_digit(10).unwrap_or(0) as usize)
                        .collect();
                    feeds.len() == 1
                        && feeds[0].sign == sign
                        && feeds[0].k + 1 == digits[0]
                        && feeds[0].l + 1 == digits[1]
                }
            };
            if !ok {
                return false;
            }
        }
    }
    true
}

/// Checks the `(-1)^(pos + pos)` rule against both displayed matrices.
pub fn sign_convention_holds() -> bool {
    static CHECK: OnceLock<bool> = OnceLock::new();
    *CHECK.get_or_init(|| pattern_matches(3, &DISPLAYED_N3) && pattern_matches(4, &DISPLAYED_N4))
}
