//! Increasing p-tuples of `{1..n}` in lexicographic order.
//!
//! Tuple entries are 1-based; ranks are 0-based.

use std::fmt;

use crate::error::{Error, Result};

/// Largest supported ambient dimension. `C(12, 6) = 924` basis elements.
pub const MAX_DIM: usize = 12;

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: usize = 1;
    for i in 1..=k {
        acc = acc * (n - k + i) / i;
    }
    acc
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PTuple(Vec<usize>);

impl PTuple {
    pub fn new(indices: Vec<usize>, n: usize) -> Result<Self> {
        let p = indices.len();
        let increasing = indices.windows(2).all(|w| w[0] < w[1]);
        let in_range = indices.iter().all(|&i| (1..=n).contains(&i));
        if p == 0 || !increasing || !in_range {
            return Err(Error::MalformedTuple { indices, n, p });
        }
        Ok(Self(indices))
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, k: usize) -> bool {
        self.0.binary_search(&k).is_ok()
    }

    /// 1-based position of `k` in the tuple.
    pub fn position(&self, k: usize) -> Option<usize> {
        self.0.binary_search(&k).ok().map(|i| i + 1)
    }

    /// Sum of `values[i - 1]` over the tuple entries.
    pub fn sum_of(&self, values: &[f64]) -> f64 {
        self.0.iter().map(|&i| values[i - 1]).sum()
    }
}

impl fmt::Display for PTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, k) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{k}")?;
        }
        write!(f, ")")
    }
}

/// How two tuples of the same table relate inside the derivation matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Equal,
    /// `|a ∩ b| = p - 1`, `q = a \ b`, `r = b \ a`,
    /// `sign = (-1)^(pos(q in a) + pos(r in b))`.
    Adjacent {
        q: usize,
        r: usize,
        sign: i8,
    },
    Disjointish,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TupleTable {
    n: usize,
    p: usize,
    tuples: Vec<PTuple>,
    membership: Vec<Vec<usize>>,
}

impl TupleTable {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn tuples(&self) -> &[PTuple] {
        &self.tuples
    }

    pub fn get(&self, rank: usize) -> &PTuple {
        &self.tuples[rank]
    }

    /// Ranks of the tuples containing `k` (1-based), increasing.
    pub fn containing(&self, k: usize) -> &[usize] {
        &self.membership[k - 1]
    }

    pub fn rank(&self, t: &PTuple) -> Result<usize> {
        tuple_rank(t, self)
    }

    pub fn unrank(&self, r: usize) -> Result<PTuple> {
        tuple_unrank(r, self)
    }
}

pub fn check_dims(n: usize, p: usize) -> Result<()> {
    let reason = if p < 1 {
        "p must be at least 1"
    } else if p > n {
        "p must not exceed n"
    } else if n > MAX_DIM {
        "n exceeds the size cap of 12"
    } else {
        return Ok(());
    };
    Err(Error::InvalidDimensions {
        n,
        p,
        reason: reason.to_string(),
    })
}

pub fn enumerate_tuples(n: usize, p: usize) -> Result<TupleTable> {
    check_dims(n, p)?;
    let count = binomial(n, p);
    let mut tuples = Vec::with_capacity(count);
    let mut current: Vec<usize> = (1..=p).collect();
    loop {
        tuples.push(PTuple(current.clone()));
        // Advance to the lexicographic successor.
        let mut i = p;
        while i > 0 && current[i - 1] == n - p + i {
            i -= 1;
        }
        if i == 0 {
            break;
        }
        current[i - 1] += 1;
        for j in i..p {
            current[j] = current[j - 1] + 1;
        }
    }
    debug_assert_eq!(tuples.len(), count);

    let mut membership = vec![Vec::with_capacity(binomial(n - 1, p - 1)); n];
    for (r, t) in tuples.iter().enumerate() {
        for &k in t.indices() {
            membership[k - 1].push(r);
        }
    }
    Ok(TupleTable {
        n,
        p,
        tuples,
        membership,
    })
}

fn validate_for(t: &PTuple, table: &TupleTable) -> Result<()> {
    let ok = t.len() == table.p
        && t.0.windows(2).all(|w| w[0] < w[1])
        && t.0.iter().all(|&i| (1..=table.n).contains(&i));
    if ok {
        Ok(())
    } else {
        Err(Error::MalformedTuple {
            indices: t.0.clone(),
            n: table.n,
            p: table.p,
        })
    }
}

/// Lexicographic rank via the combinatorial number system.
pub fn tuple_rank(t: &PTuple, table: &TupleTable) -> Result<usize> {
    validate_for(t, table)?;
    let (n, p) = (table.n, table.p);
    let mut rank = 0;
    let mut prev = 0;
    for (i, &c) in t.0.iter().enumerate() {
        for skipped in prev + 1..c {
            rank += binomial(n - skipped, p - i - 1);
        }
        prev = c;
    }
    Ok(rank)
}

pub fn tuple_unrank(r: usize, table: &TupleTable) -> Result<PTuple> {
    let (n, p) = (table.n, table.p);
    let count = table.len();
    if r >= count {
        return Err(Error::RankOutOfRange {
            rank: r,
            n,
            p,
            count,
        });
    }
    let mut rest = r;
    let mut out = Vec::with_capacity(p);
    let mut c = 1;
    for i in 0..p {
        loop {
            let block = binomial(n - c, p - i - 1);
            if rest < block {
                out.push(c);
                c += 1;
                break;
            }
            rest -= block;
            c += 1;
        }
    }
    Ok(PTuple(out))
}

pub fn tuple_relation(a: &PTuple, b: &PTuple, table: &TupleTable) -> Result<Relation> {
    validate_for(a, table)?;
    validate_for(b, table)?;
    Ok(relation_unchecked(a, b))
}

pub(crate) fn relation_unchecked(a: &PTuple, b: &PTuple) -> Relation {
    if a == b {
        return Relation::Equal;
    }
    let mut only_a = a.0.iter().filter(|k| !b.contains(**k));
    let mut only_b = b.0.iter().filter(|k| !a.contains(**k));
    let (q, r) = match (only_a.next(), only_a.next(), only_b.next()) {
        (Some(&q), None, Some(&r)) => (q, r),
        _ => return Relation::Disjointish,
    };
    let pos_q = a.position(q).expect("q in a");
    let pos_r = b.position(r).expect("r in b");
    let sign = if (pos_q + pos_r).is_multiple_of(2) { 1 } else { -1 };
    Relation::Adjacent { q, r, sign }
}

/// Checks two tables describe the same index set.
pub fn same_table(a: &TupleTable, b: &TupleTable) -> Result<()> {
    if a.n == b.n && a.p == b.p {
        Ok(())
    } else {
        Err(Error::MismatchedTables {
            n1: a.n,
            p1: a.p,
            n2: b.n,
            p2: b.p,
        })
    }
}
