//! Brute-force oracles that share no code with the library.

#![allow(dead_code)]

/// Reachability of the raw edges (Floyd-Warshall).
pub fn closure(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<bool>> {
    let mut r = vec![vec![false; n]; n];
    for &(a, b) in edges {
        r[a][b] = true;
    }
    for k in 0..n {
        for i in 0..n {
            if r[i][k] {
                for j in 0..n {
                    if r[k][j] {
                        r[i][j] = true;
                    }
                }
            }
        }
    }
    r
}

/// First assignment from `domains` that is all-different and respects
/// `reach` (`reach[i][j]` means `x_i < x_j`).
pub fn find(reach: &[Vec<bool>], domains: &[Vec<i64>]) -> Option<Vec<i64>> {
    fn go(reach: &[Vec<bool>], domains: &[Vec<i64>], cur: &mut Vec<i64>) -> bool {
        let k = cur.len();
        if k == domains.len() {
            return true;
        }
        for &v in &domains[k] {
            let ok = cur
                .iter()
                .enumerate()
                .all(|(j, &w)| w != v && (!reach[j][k] || w < v) && (!reach[k][j] || v < w));
            if ok {
                cur.push(v);
                if go(reach, domains, cur) {
                    return true;
                }
                cur.pop();
            }
        }
        false
    }
    let mut cur = Vec::new();
    go(reach, domains, &mut cur).then_some(cur)
}

pub fn boxed(bounds: &[(i64, i64)]) -> Vec<Vec<i64>> {
    bounds.iter().map(|&(l, u)| (l..=u).collect()).collect()
}

/// Is there a support inside `bounds` with `x_i = v`?
pub fn supported(reach: &[Vec<bool>], bounds: &[(i64, i64)], i: usize, v: i64) -> bool {
    let mut doms = boxed(bounds);
    doms[i] = vec![v];
    find(reach, &doms).is_some()
}

/// Per variable, smallest and largest value with a support inside `bounds`.
pub fn hull(n: usize, edges: &[(usize, usize)], bounds: &[(i64, i64)]) -> Option<Vec<(i64, i64)>> {
    let reach = closure(n, edges);
    find(&reach, &boxed(bounds))?;
    let mut out = Vec::new();
    for (i, &(l, u)) in bounds.iter().enumerate() {
        let lo = (l..=u).find(|&v| supported(&reach, bounds, i, v)).unwrap();
        let hi = (l..=u)
            .rev()
            .find(|&v| supported(&reach, bounds, i, v))
            .unwrap();
        out.push((lo, hi));
    }
    Some(out)
}

/// Satisfiability by trying every assignment.
pub fn truth_table(num_vars: u32, clauses: &[Vec<i32>]) -> bool {
    (0u32..1 << num_vars).any(|mask| {
        clauses.iter().all(|c| {
            c.iter().any(|&lit| {
                let bit = mask >> (lit.unsigned_abs() - 1) & 1 == 1;
                bit == (lit > 0)
            })
        })
    })
}

/// Labels distinct in `0..=e`, edge differences distinct.
pub fn graceful(edges: &[(usize, usize)], labels: &[i64]) -> bool {
    let e = edges.len() as i64;
    let mut l = labels.to_vec();
    l.sort_unstable();
    l.dedup();
    if l.len() != labels.len() || l.iter().any(|&x| x < 0 || x > e) {
        return false;
    }
    let mut d: Vec<i64> = edges
        .iter()
        .map(|&(a, b)| (labels[a] - labels[b]).abs())
        .collect();
    d.sort_unstable();
    d.dedup();
    d.len() == edges.len() && d[0] > 0
}
