use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spectral_cig::spectral::spectral_statistics;
use spectral_cig::synth::{
    companion_spectral_radius, generate, node_clusters, simulate_var, true_psd, ModelKind, ModelSpec,
};

#[test]
fn model2_adds_inter_cluster_edges_at_high_rate() {
    let mut spec = ModelSpec::model2(16, 2);
    spec.kind = ModelKind::Model2 { p_er: 0.5 };
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let truth = generate(&spec, &mut rng).unwrap();
    let clusters = node_clusters(16, spec.clusters);
    let cross = truth.edges.pairs().filter(|&(a, b)| clusters[a] != clusters[b]).count();
    assert!(cross > 0);
    let eig = truth.model.precision.clone().symmetric_eigen().eigenvalues;
    assert!(eig.min() >= 0.5 - 1e-9);
}

#[test]
fn simulated_spectrum_approaches_true_psd() {
    let spec = ModelSpec::model1(4, 1);
    let mut spec = spec;
    spec.clusters = 2;
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let truth = generate(&spec, &mut rng).unwrap();
    assert!(companion_spectral_radius(&truth.model.coefficients) <= 0.95 + 1e-12);
    let series = simulate_var(&truth.model, 1 << 15, 100, &mut rng).unwrap();
    let stats = spectral_statistics(&series, 200).unwrap();
    for k in 0..stats.anchors() {
        let f = stats.grid.anchor(k);
        let exact = true_psd(&truth.model, f).unwrap();
        let rel = (&stats.s_hat[k] - &exact).norm() / exact.norm();
        assert!(rel < 0.2, "f = {f}: relative error {rel}");
    }
}
