#![allow(dead_code)]

pub mod pde;

use num_bigint::BigInt;
use num_rational::BigRational;
use ppsh_core::ptuples::enumerate_tuples;

pub const PRINTED_TABLE: &str = include_str!("../../data/printed_table.txt");
pub const SIGMA_GOLDEN: &str = include_str!("../../data/sigma_golden.txt");

/// `(p, n, text)` rows of a `p n | text` data file.
pub fn table_rows(src: &str) -> Vec<(usize, usize, String)> {
    src.lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|l| {
            let (head, body) = l.split_once('|').expect("row needs '|'");
            let mut it = head.split_whitespace().map(|t| t.parse::<usize>().unwrap());
            (
                it.next().unwrap(),
                it.next().unwrap(),
                body.trim().to_string(),
            )
        })
        .collect()
}

/// Product of all p-tuple sums, computed directly in exact arithmetic.
pub fn exact_tuple_product(lambda: &[BigRational], p: usize) -> BigRational {
    let table = enumerate_tuples(lambda.len(), p).unwrap();
    table
        .tuples()
        .iter()
        .map(|t| {
            t.indices()
                .iter()
                .map(|&i| lambda[i - 1].clone())
                .fold(BigRational::from_integer(0.into()), |a, b| a + b)
        })
        .fold(BigRational::from_integer(1.into()), |a, b| a * b)
}

pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}
