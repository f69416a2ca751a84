//! Fixtures shared by the benchmarks.

use detent_core::graph::{generate_family, Family, Graph};
use detent_core::kernels::{transfer_current, Kernel};

pub fn torus(side: usize) -> Graph {
    generate_family(&Family::Torus2d { side }).expect("torus")
}

pub fn torus_current(side: usize) -> Kernel {
    transfer_current(&torus(side)).expect("transfer current")
}

pub fn k4_current() -> Kernel {
    transfer_current(&generate_family(&Family::Complete { n: 4 }).unwrap()).unwrap()
}
