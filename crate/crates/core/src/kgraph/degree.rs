use std::fmt;
use std::ops::Add;

/// An element of ℕ^k. Colors are indexed from 0 internally.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Degree(Vec<u32>);

impl Degree {
    pub fn new(coords: Vec<u32>) -> Self {
        Degree(coords)
    }

    pub fn zero(k: usize) -> Self {
        Degree(vec![0; k])
    }

    /// `(n, …, n)`.
    pub fn uniform(k: usize, n: u32) -> Self {
        Degree(vec![n; k])
    }

    /// The generator `e_i`.
    pub fn unit(k: usize, color: usize) -> Self {
        let mut v = vec![0; k];
        v[color] = 1;
        Degree(v)
    }

    pub fn k(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[u32] {
        &self.0
    }

    pub fn get(&self, color: usize) -> u32 {
        self.0[color]
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    /// Coordinatewise `≤`.
    pub fn le(&self, other: &Degree) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// Coordinatewise maximum, `m ∨ n`.
    pub fn join(&self, other: &Degree) -> Degree {
        Degree(self.0.iter().zip(&other.0).map(|(a, b)| *a.max(b)).collect())
    }

    pub fn checked_sub(&self, other: &Degree) -> Option<Degree> {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.checked_sub(*b))
            .collect::<Option<Vec<_>>>()
            .map(Degree)
    }

    pub fn max_coord(&self) -> u32 {
        self.0.iter().copied().max().unwrap_or(0)
    }

    pub fn min_coord(&self) -> u32 {
        self.0.iter().copied().min().unwrap_or(0)
    }

    /// `|n| = n_1 + … + n_k`.
    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    /// `Some(n)` when the degree is `(n, …, n)`.
    pub fn cubic(&self) -> Option<u32> {
        let first = *self.0.first()?;
        self.0.iter().all(|&c| c == first).then_some(first)
    }

    /// Every degree `m ≤ self`, in lexicographic order.
    pub fn below(&self) -> Vec<Degree> {
        let mut out = vec![Vec::with_capacity(self.k())];
        for &bound in &self.0 {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    (0..=bound).map(move |c| {
                        let mut p = prefix.clone();
                        p.push(c);
                        p
                    })
                })
                .collect();
        }
        out.into_iter().map(Degree).collect()
    }

    /// Every degree with `|m| ≤ total`.
    pub fn with_total_at_most(k: usize, total: u32) -> Vec<Degree> {
        Degree::uniform(k, total)
            .below()
            .into_iter()
            .filter(|d| d.total() <= total)
            .collect()
    }
}

impl Add for &Degree {
    type Output = Degree;
    fn add(self, rhs: &Degree) -> Degree {
        Degree(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl fmt::Display for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str(")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_operations() {
        let a = Degree::new(vec![2, 0, 1]);
        let b = Degree::new(vec![1, 3, 1]);
        assert_eq!(a.join(&b), Degree::new(vec![2, 3, 1]));
        assert_eq!(&a + &b, Degree::new(vec![3, 3, 2]));
        assert_eq!(a.checked_sub(&b), None);
        assert_eq!(a.join(&b).checked_sub(&a), Some(Degree::new(vec![0, 3, 0])));
        assert!(Degree::zero(3).le(&a));
        assert_eq!(a.to_string(), "(2,0,1)");
        assert_eq!(Degree::uniform(2, 3).cubic(), Some(3));
        assert_eq!(a.cubic(), None);
    }

    #[test]
    fn enumerates_boxes() {
        let all = Degree::new(vec![1, 2]).below();
        assert_eq!(all.len(), 6);
        assert_eq!(all[0], Degree::zero(2));
        assert_eq!(Degree::with_total_at_most(2, 2).len(), 6);
        assert_eq!(Degree::with_total_at_most(3, 3).len(), 20);
    }
}
