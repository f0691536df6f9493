//! The two eigensolver back ends side by side: Householder + QL on the
//! full matrix, and Lanczos with full reorthogonalization on the sparse
//! operator.

use std::time::Instant;

use spo_core::eigen::{lowest_eigenvalues_sparse, EigenMethod, EigenOptions};
use spo_core::{PathHamiltonian, QuboInstance, Schedule};

fn main() -> spo_core::Result<()> {
    for n in [6, 8, 10] {
        let inst = QuboInstance::random(n, 5)?;
        let sched = Schedule::linear(n, 50, 1.0, 2.5)?;
        let op = PathHamiltonian::new(&inst).at(&sched, 35);
        let mut results = Vec::new();
        for method in [EigenMethod::Dense, EigenMethod::Lanczos] {
            let start = Instant::now();
            let values = lowest_eigenvalues_sparse(&op, 4, &EigenOptions::with_method(method))?;
            println!("n={n:>2} {method:<8?} {:>8.2} ms  {values:.10?}", start.elapsed().as_secs_f64() * 1e3);
            results.push(values);
        }
        let diff = results[0].iter().zip(&results[1]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        println!("      max difference {diff:.1e}");
    }
    Ok(())
}
