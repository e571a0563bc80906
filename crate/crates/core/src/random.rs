//! Seeded generators for random states, observables and fixtures.
//!
//! Streams come from ChaCha8 keyed by a 64-bit seed, with the ChaCha
//! stream id selecting an independent substream (one per fuzz trial).

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{hermitian_eigenpairs, ComplexMatrix};
use crate::observables::RealObservable;
use crate::states::{BlochVector, DensityOperator};

pub const PRNG_ALGORITHM: &str =
    "ChaCha8 (rand_chacha), key = seed_from_u64(seed), stream = trial index";

pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn random_matrix<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(dim, |_, _| Complex64::new(gaussian(rng), gaussian(rng)))
}

/// `G` with only the first `rank` columns nonzero.
fn random_tall<R: Rng + ?Sized>(rng: &mut R, dim: usize, rank: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(dim, |_, j| {
        if j < rank {
            Complex64::new(gaussian(rng), gaussian(rng))
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize, scale: f64) -> ComplexMatrix {
    random_matrix(rng, dim).hermitian_part().scale_real(scale)
}

/// Columns are an orthonormal basis (eigenvectors of a random Hermitian).
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    let pairs = hermitian_eigenpairs(&random_hermitian(rng, dim, 1.0), 1e-9)
        .expect("Hermitian by construction");
    ComplexMatrix::from_fn(dim, |i, j| pairs.vectors[j][i])
}

/// `G G* / tr(G G*)` with `G` of the given column rank; rank below `dim`
/// gives a non-faithful state.
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, dim: usize, rank: usize) -> DensityOperator {
    let g = random_tall(rng, dim, rank.clamp(1, dim));
    let m = &g * &g.adjoint();
    let m = m.scale_real(1.0 / m.trace().re).hermitian_part();
    DensityOperator::new(m).expect("G G* / tr is a state")
}

/// A state with minimum eigenvalue at least `floor` (requires `floor * dim < 1`).
pub fn random_faithful_density<R: Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
    floor: f64,
) -> DensityOperator {
    let base = random_density(rng, dim, dim);
    let w = floor * dim as f64;
    let m = &base.matrix().scale_real(1.0 - w) + &ComplexMatrix::identity(dim).scale_real(floor);
    DensityOperator::new(m).expect("convex combination of states")
}

pub fn random_bloch<R: Rng + ?Sized>(rng: &mut R, unit: bool) -> BlochVector {
    loop {
        let v = [gaussian(rng), gaussian(rng), gaussian(rng)];
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n < 1e-6 {
            continue;
        }
        let radius = if unit {
            1.0
        } else {
            rng.random::<f64>().cbrt()
        };
        let s = radius / n;
        return BlochVector {
            r1: v[0] * s,
            r2: v[1] * s,
            r3: v[2] * s,
        };
    }
}

/// `n` distinct outcomes drawn from a grid of quarter-integers in `[-4, 4]`.
pub fn random_outcomes<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::with_capacity(n);
    while out.len() < n {
        let x = rng.random_range(-16i32..=16) as f64 / 4.0;
        if !out.contains(&x) {
            out.push(x);
        }
    }
    out
}

/// Unsharp observable: random PSD `E_x` normalized as `S^{-1/2} E_x S^{-1/2}`
/// with `S = sum E_x`.
pub fn random_observable<R: Rng + ?Sized>(rng: &mut R, dim: usize, n: usize) -> RealObservable {
    let raw: Vec<ComplexMatrix> = (0..n)
        .map(|k| {
            let rank = if k == 0 {
                dim
            } else {
                rng.random_range(1..=dim)
            };
            let g = random_tall(rng, dim, rank);
            &g * &g.adjoint()
        })
        .collect();
    let s = crate::linalg::sum(dim, raw.iter());
    let inv_sqrt = hermitian_eigenpairs(&s, 1e-9)
        .expect("Hermitian by construction")
        .apply_function(|l| 1.0 / l.sqrt());
    let outcomes = random_outcomes(rng, n);
    let pairs = outcomes
        .into_iter()
        .zip(raw)
        .map(|(x, e)| (x, (&(&inv_sqrt * &e) * &inv_sqrt).hermitian_part()))
        .collect();
    RealObservable::new(pairs).expect("normalized effects form an observable")
}

/// Projection-valued observable: eigenvectors of a random Hermitian grouped
/// into `n <= dim` nonempty blocks.
pub fn random_sharp_observable<R: Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
    n: usize,
) -> RealObservable {
    let n = n.clamp(1, dim);
    let u = random_unitary(rng, dim);
    let mut blocks: Vec<usize> = (0..dim)
        .map(|k| if k < n { k } else { rng.random_range(0..n) })
        .collect();
    // shuffle block assignment
    for i in (1..dim).rev() {
        let j = rng.random_range(0..=i);
        blocks.swap(i, j);
    }
    let outcomes = random_outcomes(rng, n);
    let pairs = (0..n)
        .map(|b| {
            let diag: Vec<f64> = blocks
                .iter()
                .map(|&k| if k == b { 1.0 } else { 0.0 })
                .collect();
            let p = (&(&u * &ComplexMatrix::diag_real(&diag)) * &u.adjoint()).hermitian_part();
            (outcomes[b], p)
        })
        .collect();
    RealObservable::new(pairs).expect("spectral projections form an observable")
}

/// Commutative observable: effects diagonal in a shared random basis with a
/// random column-stochastic table of eigenvalues.
pub fn random_commutative_observable<R: Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
    n: usize,
) -> RealObservable {
    let u = random_unitary(rng, dim);
    let mut table = vec![vec![0.0; dim]; n];
    for k in 0..dim {
        let weights: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 1e-3).collect();
        let total: f64 = weights.iter().sum();
        for (row, w) in table.iter_mut().zip(&weights) {
            row[k] = w / total;
        }
    }
    let outcomes = random_outcomes(rng, n);
    let pairs = outcomes
        .into_iter()
        .zip(table)
        .map(|(x, diag)| {
            (
                x,
                (&(&u * &ComplexMatrix::diag_real(&diag)) * &u.adjoint()).hermitian_part(),
            )
        })
        .collect();
    RealObservable::new(pairs).expect("stochastic table gives an observable")
}

/// A probability vector of length `n` with entries bounded away from zero.
pub fn random_probabilities<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 0.05).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}
