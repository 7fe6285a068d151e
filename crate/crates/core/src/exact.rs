//! Exact rational scalars and the small linear-algebra kernel used everywhere else.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// The scalar type of every computation in the crate.
pub type Q = BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExactError {
    #[error("square root of negative rational {0}")]
    NegativeSqrt(String),
    #[error("singular matrix")]
    Singular,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("cannot parse rational from {0:?}")]
    Parse(String),
}

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// Canonical "p/q" form, denominator omitted when it is 1.
pub fn fmt_q(x: &Q) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn parse_q(s: &str) -> Result<Q, ExactError> {
    let t = s.trim();
    let err = || ExactError::Parse(s.to_string());
    match t.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| err())?;
            let d: BigInt = d.trim().parse().map_err(|_| err())?;
            if d.is_zero() {
                return Err(err());
            }
            Ok(Q::new(n, d))
        }
        None => Ok(Q::from_integer(t.parse().map_err(|_| err())?)),
    }
}

/// Integer value of an integral rational, if it fits in i64.
pub fn to_i64(x: &Q) -> Option<i64> {
    if !x.denom().is_one() {
        return None;
    }
    i64::try_from(x.numer()).ok()
}

fn exact_isqrt(n: &BigInt) -> Option<BigInt> {
    let r = n.sqrt();
    (&r * &r == *n).then_some(r)
}

/// Rational square root when it exists.
pub fn sqrt_rational(x: &Q) -> Result<Option<Q>, ExactError> {
    if x.is_negative() {
        return Err(ExactError::NegativeSqrt(fmt_q(x)));
    }
    let n = exact_isqrt(x.numer());
    let d = exact_isqrt(x.denom());
    Ok(match (n, d) {
        (Some(n), Some(d)) => Some(Q::new(n, d)),
        _ => None,
    })
}

/// Rational roots of `a x^2 + b x + c = 0`, ascending and deduplicated.
pub fn solve_quadratic(a: &Q, b: &Q, c: &Q) -> Vec<Q> {
    if a.is_zero() {
        if b.is_zero() {
            return Vec::new();
        }
        return vec![-c / b];
    }
    let disc = b * b - qi(4) * a * c;
    if disc.is_negative() {
        return Vec::new();
    }
    let Some(s) = sqrt_rational(&disc).ok().flatten() else {
        return Vec::new();
    };
    let two_a = qi(2) * a;
    let mut roots = vec![(-b - &s) / &two_a, (-b + &s) / &two_a];
    roots.sort();
    roots.dedup();
    roots
}

/// Solves `m x = v` by Gaussian elimination with first-nonzero pivoting.
pub fn solve_linear(m: &[Vec<Q>], v: &[Q]) -> Result<Vec<Q>, ExactError> {
    let n = m.len();
    if v.len() != n || m.iter().any(|r| r.len() != n) {
        return Err(ExactError::Dimension(format!("{}x? matrix, vector {}", n, v.len())));
    }
    let mut a: Vec<Vec<Q>> = m
        .iter()
        .zip(v)
        .map(|(row, x)| {
            let mut r = row.clone();
            r.push(x.clone());
            r
        })
        .collect();
    for col in 0..n {
        let p = (col..n).find(|&r| !a[r][col].is_zero()).ok_or(ExactError::Singular)?;
        a.swap(col, p);
        let pivot = a[col][col].clone();
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = &a[r][col] / &pivot;
            for k in col..=n {
                if a[col][k].is_zero() {
                    continue;
                }
                let t = &f * &a[col][k];
                a[r][k] -= t;
            }
        }
    }
    Ok((0..n).map(|i| &a[i][n] / &a[i][i]).collect())
}

/// Determinant by elimination; exact.
pub fn determinant(m: &[Vec<Q>]) -> Q {
    let n = m.len();
    let mut a = m.to_vec();
    let mut det = Q::one();
    for col in 0..n {
        let Some(p) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return Q::zero();
        };
        if p != col {
            a.swap(col, p);
            det = -det;
        }
        let pivot = a[col][col].clone();
        det *= &pivot;
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let f = &a[r][col] / &pivot;
            for k in col..n {
                let t = &f * &a[col][k];
                a[r][k] -= t;
            }
        }
    }
    det
}

pub fn mat_vec(m: &[Vec<Q>], x: &[Q]) -> Vec<Q> {
    m.iter()
        .map(|row| row.iter().zip(x).fold(Q::zero(), |acc, (a, b)| acc + a * b))
        .collect()
}
