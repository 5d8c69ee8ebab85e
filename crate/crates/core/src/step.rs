//! Functions constant on the atoms of a fixed depth.

/// A tower of finite partitions, each level refining the previous one.
pub trait Levels {
    fn level_len(&self, depth: u32) -> usize;
    /// Index at `depth − 1` of the atom containing atom `index` of `depth`.
    fn parent(&self, depth: u32, index: usize) -> usize;

    /// Ancestor at `target ≤ depth`.
    fn ancestor(&self, depth: u32, index: usize, target: u32) -> usize {
        let mut i = index;
        for d in (target + 1..=depth).rev() {
            i = self.parent(d, i);
        }
        i
    }
}

/// Values on the atoms of one depth of a [`Levels`] tower.
#[derive(Clone, Debug, PartialEq)]
pub struct StepFunction<V> {
    depth: u32,
    values: Vec<V>,
}

impl<V: Clone> StepFunction<V> {
    pub fn new(depth: u32, values: Vec<V>) -> Self {
        StepFunction { depth, values }
    }

    pub fn constant<L: Levels + ?Sized>(levels: &L, depth: u32, value: V) -> Self {
        StepFunction {
            depth,
            values: vec![value; levels.level_len(depth)],
        }
    }

    pub fn from_fn<L: Levels + ?Sized>(levels: &L, depth: u32, f: impl FnMut(usize) -> V) -> Self {
        StepFunction {
            depth,
            values: (0..levels.level_len(depth)).map(f).collect(),
        }
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn values(&self) -> &[V] {
        &self.values
    }

    pub fn into_values(self) -> Vec<V> {
        self.values
    }

    pub fn get(&self, index: usize) -> &V {
        &self.values[index]
    }

    /// Value on atom `index` of a depth at least as fine as this function's.
    pub fn value_at<L: Levels + ?Sized>(&self, levels: &L, depth: u32, index: usize) -> &V {
        assert!(depth >= self.depth, "evaluation below the function's depth");
        &self.values[levels.ancestor(depth, index, self.depth)]
    }

    /// The same function written at a finer depth.
    pub fn refine<L: Levels + ?Sized>(&self, levels: &L, depth: u32) -> Self {
        if depth == self.depth {
            return self.clone();
        }
        StepFunction::from_fn(levels, depth, |i| self.value_at(levels, depth, i).clone())
    }

    pub fn map<W>(&self, f: impl FnMut(&V) -> W) -> StepFunction<W> {
        StepFunction {
            depth: self.depth,
            values: self.values.iter().map(f).collect(),
        }
    }

    /// Pointwise combination at the finer of the two depths.
    pub fn zip_with<W: Clone, X, L: Levels + ?Sized>(
        &self,
        other: &StepFunction<W>,
        levels: &L,
        mut f: impl FnMut(&V, &W) -> X,
    ) -> StepFunction<X> {
        let depth = self.depth.max(other.depth);
        let values = (0..levels.level_len(depth))
            .map(|i| f(self.value_at(levels, depth, i), other.value_at(levels, depth, i)))
            .collect();
        StepFunction { depth, values }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Binary tree: level `d` has `2^d` atoms.
    struct Dyadic;

    impl Levels for Dyadic {
        fn level_len(&self, depth: u32) -> usize {
            1 << depth
        }
        fn parent(&self, _: u32, index: usize) -> usize {
            index / 2
        }
    }

    #[test]
    fn refinement_replicates_values() {
        let f = StepFunction::new(1, vec![3, 5]);
        let g = f.refine(&Dyadic, 3);
        assert_eq!(g.values(), &[3, 3, 3, 3, 5, 5, 5, 5]);
        assert_eq!(*f.value_at(&Dyadic, 2, 3), 5);
    }

    #[test]
    fn zip_uses_finer_depth() {
        let f = StepFunction::new(1, vec![1, 2]);
        let g = StepFunction::new(2, vec![10, 20, 30, 40]);
        let h = f.zip_with(&g, &Dyadic, |a, b| a * b);
        assert_eq!(h.depth(), 2);
        assert_eq!(h.values(), &[10, 20, 60, 80]);
    }
}
