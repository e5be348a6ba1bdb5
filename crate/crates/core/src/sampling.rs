use rand::seq::SliceRandom;
use rand::Rng;

/// Plain random Latin hypercube in `[0,1]^d`.
///
/// Each column is an independent permutation of the strata `0..n`, with a
/// uniform offset inside each stratum.
pub fn latin_hypercube<R: Rng + ?Sized>(n: usize, d: usize, rng: &mut R) -> Vec<Vec<f64>> {
    assert!(n >= 1 && d >= 1, "latin_hypercube needs n >= 1 and d >= 1");
    let mut points = vec![vec![0.0; d]; n];
    let mut strata: Vec<usize> = (0..n).collect();
    let width = 1.0 / n as f64;
    for j in 0..d {
        strata.shuffle(rng);
        for (point, &k) in points.iter_mut().zip(&strata) {
            let u: f64 = rng.gen();
            // stay strictly inside [k/n, (k+1)/n)
            point[j] = ((k as f64 + u) * width).min((k + 1) as f64 * width - f64::EPSILON);
        }
    }
    points
}

/// Uniform draws in `[0,1]^d`.
pub fn uniform_cube<R: Rng + ?Sized>(n: usize, d: usize, rng: &mut R) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..d).map(|_| rng.gen::<f64>()).collect()).collect()
}
