use std::cmp::Ordering;
use std::fmt;

/// Exponent vector α ∈ ℕⁿ.
///
/// Ordering is graded lexicographic: total degree first, then lexicographic
/// with x1 > x2 > ... > xn, so within one degree a larger power of x1 sorts
/// earlier. The constant monomial is the smallest element.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Monomial {
    exps: Box<[u32]>,
}

impl Monomial {
    pub fn new(exps: Vec<u32>) -> Self {
        Monomial { exps: exps.into_boxed_slice() }
    }

    pub fn one(n: usize) -> Self {
        Monomial { exps: vec![0; n].into_boxed_slice() }
    }

    /// The monomial x_j (0-based `j`).
    pub fn var(n: usize, j: usize) -> Self {
        let mut e = vec![0; n];
        e[j] = 1;
        Monomial::new(e)
    }

    pub fn from_sparse(n: usize, pairs: &[(usize, u32)]) -> Self {
        let mut e = vec![0; n];
        for &(j, p) in pairs {
            e[j] += p;
        }
        Monomial::new(e)
    }

    pub fn n(&self) -> usize {
        self.exps.len()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exps
    }

    pub fn degree(&self) -> u32 {
        self.exps.iter().sum()
    }

    pub fn is_constant(&self) -> bool {
        self.exps.iter().all(|&e| e == 0)
    }

    /// Non-zero exponents as (variable, power) pairs in increasing variable order.
    pub fn support(&self) -> Vec<(usize, u32)> {
        self.exps
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(j, &e)| (j, e))
            .collect()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        debug_assert_eq!(self.n(), other.n());
        Monomial::new(self.exps.iter().zip(other.exps.iter()).map(|(a, b)| a + b).collect())
    }

    /// α − β when β ≤ α componentwise.
    pub fn checked_div(&self, other: &Monomial) -> Option<Monomial> {
        let mut out = Vec::with_capacity(self.n());
        for (&a, &b) in self.exps.iter().zip(other.exps.iter()) {
            if b > a {
                return None;
            }
            out.push(a - b);
        }
        Some(Monomial::new(out))
    }

    /// 2α.
    pub fn doubled(&self) -> Monomial {
        Monomial::new(self.exps.iter().map(|e| 2 * e).collect())
    }

    pub fn eval(&self, point: &[f64]) -> f64 {
        let mut v = 1.0;
        for (&e, &x) in self.exps.iter().zip(point) {
            if e > 0 {
                v *= x.powi(e as i32);
            }
        }
        v
    }

    /// Re-index into a smaller variable set: `vars[i]` is the global index of
    /// local variable i. Returns `None` if the monomial uses a variable
    /// outside `vars`.
    pub fn restrict(&self, vars: &[usize]) -> Option<Monomial> {
        let total: u32 = vars.iter().map(|&v| self.exps[v]).sum();
        if total != self.degree() {
            return None;
        }
        Some(Monomial::new(vars.iter().map(|&v| self.exps[v]).collect()))
    }

    /// Inverse of [`restrict`](Self::restrict).
    pub fn extend(&self, n: usize, vars: &[usize]) -> Monomial {
        let mut e = vec![0; n];
        for (i, &v) in vars.iter().enumerate() {
            e[v] = self.exps[i];
        }
        Monomial::new(e)
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.exps
            .len()
            .cmp(&other.exps.len())
            .then_with(|| self.degree().cmp(&other.degree()))
            .then_with(|| {
                for (a, b) in self.exps.iter().zip(other.exps.iter()) {
                    match b.cmp(a) {
                        Ordering::Equal => continue,
                        o => return o,
                    }
                }
                Ordering::Equal
            })
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &self.exps[..])
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_constant() {
            return write!(f, "1");
        }
        let mut first = true;
        for (j, e) in self.support() {
            if !first {
                write!(f, "*")?;
            }
            first = false;
            if e == 1 {
                write!(f, "x{}", j + 1)?;
            } else {
                write!(f, "x{}^{}", j + 1, e)?;
            }
        }
        Ok(())
    }
}
