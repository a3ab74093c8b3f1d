/// Solves `Σ_k x_k^n z_k = b_n`, `n = 0..len-1`, in Newton divided-difference
/// form (Björck-Pereyra). Nodes must be distinct.
pub fn solve_moment_vandermonde(nodes: &[f64], rhs: &[f64]) -> Vec<f64> {
    assert_eq!(nodes.len(), rhs.len(), "one right-hand side per node");
    let n = nodes.len();
    let mut b = rhs.to_vec();
    if n < 2 {
        return b;
    }
    let last = n - 1;
    for k in 0..last {
        for i in (k + 1..=last).rev() {
            b[i] -= nodes[k] * b[i - 1];
        }
    }
    for k in (0..last).rev() {
        for i in k + 1..=last {
            b[i] /= nodes[i] - nodes[i - k - 1];
        }
        for i in k..last {
            b[i] -= b[i + 1];
        }
    }
    b
}
