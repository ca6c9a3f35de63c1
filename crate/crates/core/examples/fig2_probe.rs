use bicsim_core::presets::preset;
use bicsim_core::spectral::{average_g2_type2, classify_states, diagonalize};
use bicsim_core::{build_basis, build_hamiltonian};
use std::time::Instant;

fn main() {
    let p = preset("fig2").unwrap();
    let spec = p.spec;
    let t0 = Instant::now();
    let basis = build_basis(spec.m, spec.n).unwrap();
    let h = build_hamiltonian(&spec, &basis, spec.phi).unwrap();
    println!("built H dim={} nnz={} in {:.2?}", h.dim(), h.matrix.nnz(), t0.elapsed());
    let t1 = Instant::now();
    let mut r = diagonalize(&h).unwrap();
    println!("diagonalized in {:.2?}, residual sample {:.2e}", t1.elapsed(), r.residual_sample);
    classify_states(&mut r, &basis);
    let counts: Vec<usize> = (1..=3)
        .map(|k| r.classification.iter().filter(|c| **c == bicsim_core::StateClass::Cluster(k as u8)).count())
        .collect();
    let uncl = r.classification.iter().filter(|c| **c == bicsim_core::StateClass::Unclassified).count();
    println!("class counts type1/2/3 = {counts:?}, unclassified = {uncl}");
    for target in [35.1712, 34.0262, 28.1621, 18.0666, 35.1916] {
        let k = r.nearest(target);
        println!(
            "target {target}: nearest E = {:.6} (diff {:.2e}), class {:?}, G2 = {:.4}",
            r.energies[k],
            (r.energies[k] - target).abs(),
            r.classification[k],
            r.g2[k]
        );
    }
    let type1_g2: Vec<f64> = r
        .classification
        .iter()
        .zip(&r.g2)
        .filter(|(c, _)| c.is_type1())
        .map(|(_, g)| *g)
        .collect();
    let mut sorted = type1_g2.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    let min_t2 = r
        .classification
        .iter()
        .zip(&r.g2)
        .filter(|(c, _)| c.is_type2())
        .map(|(_, g)| *g)
        .fold(f64::INFINITY, f64::min);
    println!("median type1 G2 = {median:.5}, min type2 G2 = {min_t2:.5}, ratio = {:.2}", min_t2 / median);
    println!("avg type2 G2 = {:.5}", average_g2_type2(&r, &spec).unwrap());
    println!("total wall: {:.2?}", t0.elapsed());
}
