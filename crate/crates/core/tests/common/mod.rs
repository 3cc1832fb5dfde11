#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use weakcollapse::{DensityOperator, Operator, Projector, ProtocolConfig, StateVector, SuperOp, C64};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gauss(rng: &mut impl Rng) -> f64 {
    // Box-Muller
    let u1: f64 = rng.random::<f64>().max(1e-300);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

pub fn complex(rng: &mut impl Rng) -> C64 {
    C64::new(gauss(rng), gauss(rng))
}

pub fn random_operator(rng: &mut impl Rng, d: usize) -> Operator {
    Operator::from_fn(d, |_, _| complex(rng))
}

pub fn random_hermitian(rng: &mut impl Rng, d: usize) -> Operator {
    random_operator(rng, d).hermitian_part()
}

pub fn random_ket(rng: &mut impl Rng, d: usize) -> StateVector {
    let v = StateVector::from_fn(d, |_, _| complex(rng));
    let n = v.norm();
    v / C64::new(n, 0.0)
}

pub fn random_density(rng: &mut impl Rng, d: usize) -> DensityOperator {
    let g = random_operator(rng, d);
    let m = &g * &g.adjoint();
    let t = m.trace().re;
    DensityOperator::new((&m * (1.0 / t)).hermitian_part()).unwrap()
}

pub fn random_pure(rng: &mut impl Rng, d: usize) -> DensityOperator {
    DensityOperator::pure(&random_ket(rng, d)).unwrap()
}

pub fn random_projector(rng: &mut impl Rng, d: usize) -> Projector {
    Projector::onto(&random_ket(rng, d)).unwrap()
}

pub fn random_superop(rng: &mut impl Rng, d: usize) -> SuperOp {
    let n = d * d;
    SuperOp::from_matrix(d, nalgebra::DMatrix::from_fn(n, n, |_, _| complex(rng))).unwrap()
}

/// Random unitary from the QR factors of a Ginibre matrix.
pub fn random_unitary(rng: &mut impl Rng, d: usize) -> Operator {
    let g = random_operator(rng, d).into_matrix();
    let q = g.qr().q();
    Operator::from_matrix(q).unwrap()
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
