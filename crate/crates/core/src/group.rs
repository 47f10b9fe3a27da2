//! Finite groups given by multiplication tables.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// A finite group on `{0, .., n-1}` with a designated symmetric generating
/// set. Word lengths with respect to that set are precomputed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGroup {
    order: usize,
    table: Vec<u32>,
    identity: u32,
    inverse: Vec<u32>,
    generators: Vec<u32>,
    word_length: Vec<u32>,
}

impl FiniteGroup {
    /// Validates closure, associativity, identity and inverses, and checks
    /// that `generators` is symmetric, identity-free and generating.
    pub fn from_table(rows: Vec<Vec<u32>>, generators: Vec<u32>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::NotAGroup("empty table".into()));
        }
        let mut table = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::NotAGroup(format!("row {i} has {} entries", row.len())));
            }
            if let Some(&bad) = row.iter().find(|&&x| x as usize >= n) {
                return Err(Error::NotAGroup(format!("entry {bad} out of range")));
            }
            table.extend_from_slice(row);
        }
        let mul = |a: usize, b: usize| table[a * n + b] as usize;
        let identity = (0..n)
            .find(|&e| (0..n).all(|x| mul(e, x) == x && mul(x, e) == x))
            .ok_or_else(|| Error::NotAGroup("no two-sided identity".into()))?;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if mul(mul(a, b), c) != mul(a, mul(b, c)) {
                        return Err(Error::NotAGroup(format!("({a}*{b})*{c} != {a}*({b}*{c})")));
                    }
                }
            }
        }
        let mut inverse = Vec::with_capacity(n);
        for a in 0..n {
            let inv = (0..n)
                .find(|&b| mul(a, b) == identity && mul(b, a) == identity)
                .ok_or_else(|| Error::NotAGroup(format!("{a} has no inverse")))?;
            inverse.push(inv as u32);
        }
        let mut group = Self {
            order: n,
            table,
            identity: identity as u32,
            inverse,
            generators: Vec::new(),
            word_length: Vec::new(),
        };
        group.set_generators(generators)?;
        Ok(group)
    }

    /// `Z/n` with the given generating residues.
    pub fn cyclic(n: u32, generators: &[u32]) -> Result<Self> {
        let rows = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        Self::from_table(rows, generators.to_vec())
    }

    /// `Z/n` generated by `±1`.
    pub fn cyclic_pm1(n: u32) -> Self {
        let gens: Vec<u32> = if n == 2 { alloc::vec![1] } else { alloc::vec![1, n - 1] };
        Self::cyclic(n, &gens).expect("cyclic table is a group")
    }

    fn set_generators(&mut self, mut generators: Vec<u32>) -> Result<()> {
        generators.sort_unstable();
        generators.dedup();
        for &g in &generators {
            if g as usize >= self.order {
                return Err(Error::UnknownGenerator(format!("{g}")));
            }
            if g == self.identity {
                return Err(Error::InvalidParameter("generating set contains the identity".into()));
            }
            if generators.binary_search(&self.inverse[g as usize]).is_err() {
                return Err(Error::InvalidParameter(format!("generating set is not symmetric at {g}")));
            }
        }
        let mut length = alloc::vec![u32::MAX; self.order];
        length[self.identity as usize] = 0;
        let mut queue = VecDeque::from([self.identity]);
        while let Some(x) = queue.pop_front() {
            for &g in &generators {
                let y = self.mul(x, g);
                if length[y as usize] == u32::MAX {
                    length[y as usize] = length[x as usize] + 1;
                    queue.push_back(y);
                }
            }
        }
        if length.contains(&u32::MAX) {
            return Err(Error::InvalidParameter("generators do not generate the group".into()));
        }
        self.generators = generators;
        self.word_length = length;
        Ok(())
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> u32 {
        self.identity
    }

    pub fn mul(&self, a: u32, b: u32) -> u32 {
        self.table[a as usize * self.order + b as usize]
    }

    pub fn inv(&self, a: u32) -> u32 {
        self.inverse[a as usize]
    }

    pub fn generators(&self) -> &[u32] {
        &self.generators
    }

    /// Word length with respect to the designated generators.
    pub fn word_length(&self, a: u32) -> u32 {
        self.word_length[a as usize]
    }

    pub fn elements(&self) -> impl Iterator<Item = u32> {
        0..self.order as u32
    }

    pub fn non_identity(&self) -> impl Iterator<Item = u32> + '_ {
        self.elements().filter(move |&a| a != self.identity)
    }

    pub fn rows(&self) -> Vec<Vec<u32>> {
        self.table.chunks(self.order).map(<[u32]>::to_vec).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclic_word_lengths() {
        let z4 = FiniteGroup::cyclic_pm1(4);
        assert_eq!(z4.word_length(0), 0);
        assert_eq!(z4.word_length(1), 1);
        assert_eq!(z4.word_length(2), 2);
        assert_eq!(z4.word_length(3), 1);
        assert_eq!(z4.inv(1), 3);
    }

    #[test]
    fn rejects_non_groups() {
        // constant table: no identity
        let rows = alloc::vec![alloc::vec![0, 0], alloc::vec![0, 0]];
        assert!(matches!(FiniteGroup::from_table(rows, alloc::vec![]), Err(Error::NotAGroup(_))));
        // a loop that is not associative
        let rows = alloc::vec![
            alloc::vec![0, 1, 2, 3, 4],
            alloc::vec![1, 0, 3, 4, 2],
            alloc::vec![2, 4, 0, 1, 3],
            alloc::vec![3, 2, 4, 0, 1],
            alloc::vec![4, 3, 1, 2, 0],
        ];
        assert!(matches!(FiniteGroup::from_table(rows, alloc::vec![1]), Err(Error::NotAGroup(_))));
    }

    #[test]
    fn rejects_bad_generating_sets() {
        assert!(FiniteGroup::cyclic(4, &[0, 1, 3]).is_err());
        assert!(FiniteGroup::cyclic(4, &[1]).is_err());
        assert!(FiniteGroup::cyclic(4, &[2]).is_err());
        assert!(FiniteGroup::cyclic(4, &[1, 3]).is_ok());
    }
}
