use super::MathError;

/// Largest order accepted by [`enumerate_partitions`].
pub const PARTITION_GUARD: usize = 128;

/// An integer partition of `i` in multiplicity form: `multiplicities[l - 1]`
/// is the number of parts equal to `l`, so Σ l·j_l = i.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IntegerPartition {
    multiplicities: Vec<u32>,
}

impl IntegerPartition {
    pub fn from_multiplicities(multiplicities: Vec<u32>) -> Self {
        Self { multiplicities }
    }

    pub fn multiplicities(&self) -> &[u32] {
        &self.multiplicities
    }

    /// The partitioned integer, Σ l·j_l.
    pub fn order(&self) -> usize {
        self.multiplicities
            .iter()
            .enumerate()
            .map(|(l, &j)| (l + 1) * j as usize)
            .sum()
    }

    /// Number of parts, Σ j_l.
    pub fn parts(&self) -> usize {
        self.multiplicities.iter().map(|&j| j as usize).sum()
    }
}

/// Visits every partition of `i` as a multiplicity slice of length `i`,
/// without allocating per partition. Parts are generated largest first.
pub fn for_each_partition<F: FnMut(&[u32])>(i: usize, mut visit: F) {
    let mut mults = vec![0u32; i];
    recurse(i, i, &mut mults, &mut visit);
}

fn recurse<F: FnMut(&[u32])>(remaining: usize, max_part: usize, mults: &mut [u32], visit: &mut F) {
    if remaining == 0 {
        visit(mults);
        return;
    }
    for part in (1..=remaining.min(max_part)).rev() {
        mults[part - 1] += 1;
        recurse(remaining - part, part, mults, visit);
        mults[part - 1] -= 1;
    }
}

/// All partitions of `i`; `i = 0` yields the single empty partition.
pub fn enumerate_partitions(i: usize) -> Result<Vec<IntegerPartition>, MathError> {
    if i > PARTITION_GUARD {
        return Err(MathError::GuardExceeded {
            requested: i,
            limit: PARTITION_GUARD,
        });
    }
    let mut out = Vec::new();
    for_each_partition(i, |m| out.push(IntegerPartition::from_multiplicities(m.to_vec())));
    Ok(out)
}
