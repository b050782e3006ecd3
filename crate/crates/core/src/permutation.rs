//! Small permutation utilities shared by the first-quantized code.

/// Rearranges `items` into the next lexicographic permutation. Returns false
/// (leaving `items` sorted ascending) once the last permutation was reached.
/// Starting from a sorted slice this visits every distinct arrangement of a
/// multiset exactly once.
pub fn next_permutation<T: Ord>(items: &mut [T]) -> bool {
    if items.len() < 2 {
        return false;
    }
    let Some(pivot) = (0..items.len() - 1).rev().find(|&i| items[i] < items[i + 1]) else {
        items.reverse();
        return false;
    };
    let successor = (pivot + 1..items.len())
        .rev()
        .find(|&j| items[j] > items[pivot])
        .expect("pivot has a larger element to its right");
    items.swap(pivot, successor);
    items[pivot + 1..].reverse();
    true
}

/// All distinct arrangements of a multiset, in lexicographic order.
pub fn distinct_permutations<T: Ord + Clone>(items: &[T]) -> Vec<Vec<T>> {
    let mut current = items.to_vec();
    current.sort();
    let mut out = vec![current.clone()];
    while next_permutation(&mut current) {
        out.push(current.clone());
    }
    out
}

/// Every permutation of `0..n` with its sign, generated by Heap's algorithm
/// (each step is a single transposition, so the sign alternates).
pub fn signed_permutations(n: usize) -> Vec<(Vec<usize>, i8)> {
    let mut perm: Vec<usize> = (0..n).collect();
    let mut sign = 1i8;
    let mut counters = vec![0usize; n];
    let mut out = vec![(perm.clone(), sign)];
    let mut i = 1;
    while i < n {
        if counters[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(counters[i], i);
            }
            sign = -sign;
            out.push((perm.clone(), sign));
            counters[i] += 1;
            i = 1;
        } else {
            counters[i] = 0;
            i += 1;
        }
    }
    out
}

/// Sign of the permutation that sorts `items`, or `None` when two entries are
/// equal.
pub fn sorting_sign<T: Ord>(items: &[T]) -> Option<i8> {
    let mut inversions = 0usize;
    for i in 0..items.len() {
        for j in i + 1..items.len() {
            match items[i].cmp(&items[j]) {
                std::cmp::Ordering::Equal => return None,
                std::cmp::Ordering::Greater => inversions += 1,
                std::cmp::Ordering::Less => {}
            }
        }
    }
    Some(if inversions.is_multiple_of(2) { 1 } else { -1 })
}

pub fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}
