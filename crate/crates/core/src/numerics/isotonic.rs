/// Euclidean projection onto nondecreasing vectors (pool adjacent violators).
pub fn project_isotonic(v: &[f64]) -> Vec<f64> {
    // blocks of (sum, count); merged while the previous mean exceeds the new one
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(v.len());
    for &x in v {
        let mut cur = (x, 1usize);
        while let Some(&(s, n)) = blocks.last() {
            if s / n as f64 > cur.0 / cur.1 as f64 {
                cur = (cur.0 + s, cur.1 + n);
                blocks.pop();
            } else {
                break;
            }
        }
        blocks.push(cur);
    }
    let mut out = Vec::with_capacity(v.len());
    for (s, n) in blocks {
        out.extend(std::iter::repeat_n(s / n as f64, n));
    }
    out
}
