#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use weakcollapse::{DensityOperator, Operator, Projector, ProtocolConfig, StateVector, C64};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gauss(rng: &mut impl Rng) -> f64 {
    let u: f64 = 1.0 - rng.random::<f64>();
    let v: f64 = rng.random();
    (-2.0 * u.ln()).sqrt() * (std::f64::consts::TAU * v).cos()
}

pub fn complex(rng: &mut impl Rng) -> C64 {
    C64::new(gauss(rng), gauss(rng))
}

pub fn random_hermitian(rng: &mut impl Rng, d: usize) -> Operator {
    Operator::from_fn(d, |_, _| complex(rng)).hermitian_part()
}

pub fn random_ket(rng: &mut impl Rng, d: usize) -> StateVector {
    let v = StateVector::from_fn(d, |_, _| complex(rng));
    let n = v.norm();
    v / C64::new(n, 0.0)
}

pub fn random_density(rng: &mut impl Rng, d: usize) -> DensityOperator {
    let g = DMatrix::from_fn(d, d, |_, _| complex(rng));
    let m = &g * g.adjoint();
    let t = m.trace();
    let op = Operator::from_matrix(m / t).unwrap().hermitian_part();
    DensityOperator::new(op).unwrap()
}

pub fn random_projector(rng: &mut impl Rng, d: usize) -> Projector {
    Projector::onto(&random_ket(rng, d)).unwrap()
}

pub fn random_config(rng: &mut impl Rng, d: usize) -> ProtocolConfig {
    let dtm = 0.2 + 2.0 * rng.random::<f64>();
    let dtc = 0.2 + 2.0 * rng.random::<f64>();
    random_config_with(rng, d, dtm, dtc)
}

pub fn random_config_with(rng: &mut impl Rng, d: usize, dtm: f64, dtc: f64) -> ProtocolConfig {
    ProtocolConfig::new(
        random_density(rng, d),
        random_density(rng, d),
        random_projector(rng, d),
        random_hermitian(rng, d),
        dtm,
        dtc,
        1.0,
    )
    .unwrap()
}

/// Random amplitude with modulus in `[0.05, 0.95]`.
pub fn random_amplitude(rng: &mut impl Rng) -> C64 {
    C64::from_polar(0.05 + 0.9 * rng.random::<f64>(), std::f64::consts::TAU * rng.random::<f64>())
}
