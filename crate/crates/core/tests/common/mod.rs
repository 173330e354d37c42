//! Shared generators for integration tests.
#![allow(dead_code)]

/// Every unlabelled rooted tree on `k` vertices, as parent-child edge lists on
/// `0..k` with root 0. Children are multisets of smaller trees taken in
/// non-increasing id order, so each shape appears once.
pub fn rooted_trees(k: usize) -> Vec<Vec<(usize, usize)>> {
    let mut all: Vec<Vec<(usize, usize)>> = vec![Vec::new()];
    let mut size: Vec<usize> = vec![1];
    let mut by_size: Vec<Vec<usize>> = vec![Vec::new(), vec![0]];
    for n in 2..=k {
        let mut made = Vec::new();
        let mut acc = Vec::new();
        fill(n - 1, all.len() - 1, &size, &mut acc, &mut |kids| {
            let mut edges = Vec::new();
            let mut offset = 1;
            for &id in kids {
                edges.push((0, offset));
                edges.extend(all[id].iter().map(|&(a, b)| (a + offset, b + offset)));
                offset += size[id];
            }
            made.push(edges);
        });
        let mut ids = Vec::new();
        for e in made {
            ids.push(all.len());
            all.push(e);
            size.push(n);
        }
        by_size.push(ids);
    }
    by_size[k].iter().map(|&i| all[i].clone()).collect()
}

fn fill(rem: usize, max_id: usize, size: &[usize], acc: &mut Vec<usize>, emit: &mut impl FnMut(&[usize])) {
    if rem == 0 {
        emit(acc);
        return;
    }
    for id in (0..=max_id).rev() {
        if size[id] <= rem {
            acc.push(id);
            fill(rem - size[id], id, size, acc, emit);
            acc.pop();
        }
    }
}

/// All `2^(k-1)` orientations of a tree's edges.
pub fn orientations(edges: &[(usize, usize)]) -> impl Iterator<Item = Vec<(usize, usize)>> + '_ {
    (0u32..1 << edges.len()).map(move |bits| {
        edges
            .iter()
            .enumerate()
            .map(|(i, &(a, b))| if bits >> i & 1 == 1 { (b, a) } else { (a, b) })
            .collect()
    })
}

#[test]
fn rooted_tree_counts() {
    let counts: Vec<usize> = (1..=9).map(|k| rooted_trees(k).len()).collect();
    assert_eq!(counts, vec![1, 1, 2, 4, 9, 20, 48, 115, 286]);
}
