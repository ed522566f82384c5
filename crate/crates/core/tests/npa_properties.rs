use bellbound_core::bell::{chained, chsh, ebi, BellExpression};
use bellbound_core::linalg::symmetric_eigenvalues;
use bellbound_core::npa::{
    max_guessing_probability, tsirelson_bound, MomentRelaxation, NpaLevel, ValueConstraint,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn expressions() -> Vec<BellExpression> {
    vec![ebi(), chsh(), chained(3).unwrap()]
}

#[test]
fn optimal_moment_matrices_are_structured() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let relaxations = [
        MomentRelaxation::new(&chsh(), NpaLevel::Two).unwrap(),
        MomentRelaxation::new(&ebi(), NpaLevel::OneAB).unwrap(),
    ];
    for case in 0..50 {
        // Mostly the small scenario; every fifth case the 3x4 one.
        let r = &relaxations[usize::from(case % 5 == 4)];
        let s = r.structure();
        let objective: Vec<f64> = (0..s.num_classes())
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        let moments = r.optimal_moments(&objective).unwrap();
        let m = s.assemble(&moments);
        assert_eq!(m[(0, 0)], 1.0, "case {case}");
        for i in 0..s.size() {
            for j in 0..i {
                assert_eq!(m[(i, j)], m[(j, i)], "case {case} ({i},{j})");
            }
        }
        let lmin = symmetric_eigenvalues(&m).unwrap()[0];
        assert!(lmin >= -1e-6, "case {case}: {lmin}");
    }
}

#[test]
fn random_class_vectors_assemble_symmetric() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let r = MomentRelaxation::new(&chained(3).unwrap(), NpaLevel::One).unwrap();
    let s = r.structure();
    for _ in 0..50 {
        let mut v: Vec<f64> = (0..s.num_classes())
            .map(|_| rng.random_range(-1.0..1.0))
            .collect();
        v[0] = 1.0;
        let m = s.assemble(&v);
        assert_eq!(m.symmetry_error(), 0.0);
        assert_eq!(s.class_values(&m), v);
    }
}

#[test]
fn higher_levels_do_not_loosen_the_bound() {
    for e in expressions() {
        let one = tsirelson_bound(&e, NpaLevel::One).unwrap();
        let one_ab = tsirelson_bound(&e, NpaLevel::OneAB).unwrap();
        let two = tsirelson_bound(&e, NpaLevel::Two).unwrap();
        assert!(one_ab <= one + 1e-7, "{}: {one_ab} > {one}", e.name());
        assert!(two <= one + 1e-7, "{}: {two} > {one}", e.name());
        assert!(two <= one_ab + 1e-7, "{}: {two} > {one_ab}", e.name());
    }
}

#[test]
fn guessing_probability_falls_as_the_violation_grows() {
    for e in expressions() {
        let classical = e.classical_bound_value().unwrap();
        let r = MomentRelaxation::new(&e, NpaLevel::Two).unwrap();
        let grid: Vec<f64> = (0..=10)
            .map(|k| classical + (r.max_value() - classical) * k as f64 / 10.0)
            .collect();
        let pg: Vec<f64> = grid
            .iter()
            .map(|&v| {
                r.guessing(v, (0, 0), ValueConstraint::Equal)
                    .unwrap()
                    .guessing_probability
            })
            .collect();
        for (k, w) in pg.windows(2).enumerate() {
            assert!(w[1] <= w[0] + 1e-5, "{} step {k}: {pg:?}", e.name());
        }
        assert!(pg[10] < pg[0] - 0.1, "{}: {pg:?}", e.name());
    }
}

#[test]
fn nothing_is_certified_at_the_classical_bound() {
    for e in expressions() {
        let classical = e.classical_bound_value().unwrap();
        let p = max_guessing_probability(&e, classical, (0, 0), NpaLevel::Two).unwrap();
        let bits = -p.log2();
        assert!(bits <= 1e-3, "{}: {bits}", e.name());
    }
}
