//! Fixtures shared by the benchmarks.

use eigcount::oracle::{pencil_with_spectrum, spectrum_around};
use eigcount::{DenseMatrix, Disk, Pencil};
use num_complex::Complex64;

pub fn unit_disk() -> Disk {
    Disk::new(Complex64::new(0.0, 0.0), 1.0).expect("valid disk")
}

/// Dense `n × n` pencil with about a third of its spectrum in the unit disk.
pub fn fixture(n: usize, seed: u64) -> (DenseMatrix, Pencil) {
    let rp = pencil_with_spectrum(&spectrum_around(unit_disk(), n, 0.05, seed), seed);
    let p = rp.pencil();
    (rp.a, p)
}
