//! Exact element integrals on simplices via the barycentric monomial formula
//! `int_T prod lambda_i^{a_i} = d! |T| prod a_i! / (d + sum a_i)!`.

use crate::mesh::ElementGeometry;

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// Integral of a barycentric monomial over a simplex of dimension `dim`.
pub fn simplex_monomial(dim: usize, exponents: &[u32], volume: f64) -> f64 {
    let total: u32 = exponents.iter().sum();
    let num: f64 = exponents.iter().map(|&a| factorial(a)).product();
    factorial(dim as u32) * volume * num / factorial(dim as u32 + total)
}

/// Normalisation making the bubble equal one at the barycentre.
pub fn bubble_scale(dim: usize) -> f64 {
    ((dim + 1) as f64).powi(dim as i32 + 1)
}

/// `int_T b` for the normalised bubble.
pub fn bubble_integral(dim: usize, volume: f64) -> f64 {
    bubble_scale(dim) * simplex_monomial(dim, &vec![1; dim + 1], volume)
}

/// `H[x][y] = int_T d_x b d_y b` for the normalised bubble.
pub fn bubble_gradient_gram(dim: usize, geo: &ElementGeometry) -> [[f64; 3]; 3] {
    let n = dim + 1;
    let cb = bubble_scale(dim);
    // I[m][n] = int (prod_{l != m} lambda_l)(prod_{l != n} lambda_l)
    let mut integrals = vec![vec![0.0; n]; n];
    for m in 0..n {
        for k in 0..n {
            let exps: Vec<u32> = (0..n)
                .map(|l| u32::from(l != m) + u32::from(l != k))
                .collect();
            integrals[m][k] = simplex_monomial(dim, &exps, geo.volume);
        }
    }
    let mut h = [[0.0; 3]; 3];
    for x in 0..dim {
        for y in 0..dim {
            let mut s = 0.0;
            for m in 0..n {
                for k in 0..n {
                    s += geo.gradients[m][x] * geo.gradients[k][y] * integrals[m][k];
                }
            }
            h[x][y] = cb * cb * s;
        }
    }
    h
}

fn grad_dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Elasticity block for trial `phi e_b` and test `psi e_a` given
/// `gram[x][y] = int d_x phi d_y psi`:
/// `mu delta_ab tr(gram) + mu gram[a][b] + lambda gram[b][a]`.
fn elasticity_entry(gram: &[[f64; 3]; 3], dim: usize, a: usize, b: usize, mu: f64, lambda: f64) -> f64 {
    let trace: f64 = (0..dim).map(|x| gram[x][x]).sum();
    let diag = if a == b { mu * trace } else { 0.0 };
    // gram[x][y] pairs the trial derivative x with the test derivative y.
    diag + mu * gram[a][b] + lambda * gram[b][a]
}

/// Local elasticity matrix over vertex dofs (vertex-major, component-minor)
/// followed by bubble dofs when `with_bubble` is set. The vertex-bubble
/// coupling vanishes identically because `int_T grad b = 0`.
pub fn elasticity(geo: &ElementGeometry, dim: usize, mu: f64, lambda: f64, with_bubble: bool) -> Vec<Vec<f64>> {
    let nv = dim + 1;
    let n = nv * dim + if with_bubble { dim } else { 0 };
    let mut k = vec![vec![0.0; n]; n];
    for j in 0..nv {
        for l in 0..nv {
            let mut gram = [[0.0; 3]; 3];
            for x in 0..dim {
                for y in 0..dim {
                    gram[x][y] = geo.volume * geo.gradients[l][x] * geo.gradients[j][y];
                }
            }
            for a in 0..dim {
                for b in 0..dim {
                    k[j * dim + a][l * dim + b] = elasticity_entry(&gram, dim, a, b, mu, lambda);
                }
            }
        }
    }
    if with_bubble {
        let gram = bubble_gradient_gram(dim, geo);
        let off = nv * dim;
        for a in 0..dim {
            for b in 0..dim {
                k[off + a][off + b] = elasticity_entry(&gram, dim, a, b, mu, lambda);
            }
        }
    }
    k
}

/// Local coupling matrix `-alpha int q div v` with rows over displacement
/// dofs (vertex dofs then bubbles) and columns over the d+1 pressure dofs.
pub fn coupling(geo: &ElementGeometry, dim: usize, alpha: f64, with_bubble: bool) -> Vec<Vec<f64>> {
    let nv = dim + 1;
    let n = nv * dim + if with_bubble { dim } else { 0 };
    let mean = geo.volume / nv as f64;
    let mut g = vec![vec![0.0; nv]; n];
    for j in 0..nv {
        for a in 0..dim {
            for k in 0..nv {
                g[j * dim + a][k] = -alpha * geo.gradients[j][a] * mean;
            }
        }
    }
    if with_bubble {
        // -int lambda_k d_a b = int b d_a lambda_k since b vanishes on dT.
        let ib = bubble_integral(dim, geo.volume);
        for a in 0..dim {
            for k in 0..nv {
                g[nv * dim + a][k] = alpha * geo.gradients[k][a] * ib;
            }
        }
    }
    g
}

/// `coef * int grad lambda_j . grad lambda_k`.
pub fn stiffness(geo: &ElementGeometry, dim: usize, coef: f64) -> Vec<Vec<f64>> {
    let nv = dim + 1;
    (0..nv)
        .map(|j| {
            (0..nv)
                .map(|k| coef * geo.volume * grad_dot(&geo.gradients[j], &geo.gradients[k]))
                .collect()
        })
        .collect()
}

/// Consistent P1 mass matrix.
pub fn mass(geo: &ElementGeometry, dim: usize) -> Vec<Vec<f64>> {
    let nv = dim + 1;
    let off = simplex_monomial(dim, &{
        let mut e = vec![0; nv];
        e[0] = 1;
        e[1] = 1;
        e
    }, geo.volume);
    (0..nv)
        .map(|j| (0..nv).map(|k| if j == k { 2.0 * off } else { off }).collect())
        .collect()
}
