//! Transitive closure by repeated boolean matrix products.

pub type Dense = Vec<Vec<bool>>;

/// M ∨ M·M ∨ M·M·M ∨ ... until nothing changes.
pub fn power_fixpoint(m: &Dense) -> Dense {
    let n = m.len();
    let mut acc = m.clone();
    let mut power = m.clone();
    loop {
        let mut next = vec![vec![false; n]; n];
        for i in 0..n {
            for k in 0..n {
                if power[i][k] {
                    for j in 0..n {
                        next[i][j] |= m[k][j];
                    }
                }
            }
        }
        let mut changed = false;
        for i in 0..n {
            for j in 0..n {
                if next[i][j] && !acc[i][j] {
                    acc[i][j] = true;
                    changed = true;
                }
            }
        }
        if !changed {
            return acc;
        }
        power = next;
    }
}

/// Every irreflexive n×n matrix, in mask order.
pub fn irreflexive_matrices(n: usize) -> impl Iterator<Item = Dense> {
    let cells: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|(i, j)| i != j).collect();
    (0u64..(1 << cells.len())).map(move |mask| {
        let mut d = vec![vec![false; n]; n];
        for (b, &(i, j)) in cells.iter().enumerate() {
            d[i][j] = mask & (1 << b) != 0;
        }
        d
    })
}
