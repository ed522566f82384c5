use alloc::vec::Vec;

use super::{BellExpression, MeasurementStrategy};
use crate::linalg::{bloch_operator, kron, ComplexMatrix};
use crate::states::TwoQubitState;

/// Conditional distribution `p(ab|xy)` with outcome 0 meaning eigenvalue +1.
#[derive(Debug, Clone, PartialEq)]
pub struct Behavior {
    alice_settings: usize,
    bob_settings: usize,
    /// Indexed by `x·l + y`, inner index `2a + b`.
    table: Vec<[f64; 4]>,
}

impl Behavior {
    pub fn alice_settings(&self) -> usize {
        self.alice_settings
    }

    pub fn bob_settings(&self) -> usize {
        self.bob_settings
    }

    pub fn p(&self, a: usize, b: usize, x: usize, y: usize) -> f64 {
        self.table[x * self.bob_settings + y][2 * a + b]
    }

    /// `E_xy = Σ (−1)^{a+b} p(ab|xy)`.
    pub fn correlator(&self, x: usize, y: usize) -> f64 {
        let p = &self.table[x * self.bob_settings + y];
        p[0] - p[1] - p[2] + p[3]
    }

    /// `⟨A_x⟩` computed under Bob's setting `y`.
    pub fn alice_mean(&self, x: usize, y: usize) -> f64 {
        let p = &self.table[x * self.bob_settings + y];
        p[0] + p[1] - p[2] - p[3]
    }

    pub fn bob_mean(&self, x: usize, y: usize) -> f64 {
        let p = &self.table[x * self.bob_settings + y];
        p[0] - p[1] + p[2] - p[3]
    }

    /// Largest deviation of any `Σ_ab p(ab|xy)` from one.
    pub fn normalization_error(&self) -> f64 {
        self.table
            .iter()
            .map(|p| (p.iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Largest dependence of either party's marginal on the other's setting.
    pub fn signaling(&self) -> f64 {
        let (k, l) = (self.alice_settings, self.bob_settings);
        let mut worst: f64 = 0.0;
        for x in 0..k {
            for y in 1..l {
                worst = worst.max((self.alice_mean(x, y) - self.alice_mean(x, 0)).abs());
            }
        }
        for y in 0..l {
            for x in 1..k {
                worst = worst.max((self.bob_mean(x, y) - self.bob_mean(0, y)).abs());
            }
        }
        worst
    }

    /// Value of `expr` recomputed from the probabilities.
    pub fn bell_value(&self, expr: &BellExpression) -> f64 {
        let alice: Vec<f64> = (0..self.alice_settings)
            .map(|x| self.alice_mean(x, 0))
            .collect();
        let bob: Vec<f64> = (0..self.bob_settings)
            .map(|y| self.bob_mean(0, y))
            .collect();
        expr.evaluate(|x, y| self.correlator(x, y), &alice, &bob)
    }

    /// Rows `(x, y, a, b, p)` in lexicographic order.
    pub fn rows(&self) -> impl Iterator<Item = (usize, usize, usize, usize, f64)> + '_ {
        (0..self.alice_settings).flat_map(move |x| {
            (0..self.bob_settings).flat_map(move |y| {
                (0..4).map(move |ab| {
                    (
                        x,
                        y,
                        ab / 2,
                        ab % 2,
                        self.table[x * self.bob_settings + y][ab],
                    )
                })
            })
        })
    }
}

/// `p(ab|xy) = tr(ρ M_x^a ⊗ M_y^b)` with `M^{0,1} = (I ± n·σ)/2`.
pub fn behavior_from(state: &TwoQubitState, strategy: &MeasurementStrategy) -> Behavior {
    let id = ComplexMatrix::identity(2);
    let projectors = |n: &[f64; 3]| {
        let op = bloch_operator(n);
        [
            id.add(&op).expect("2x2").scale_real(0.5),
            id.sub(&op).expect("2x2").scale_real(0.5),
        ]
    };
    let alice: Vec<_> = strategy.alice.iter().map(projectors).collect();
    let bob: Vec<_> = strategy.bob.iter().map(projectors).collect();
    let mut table = Vec::with_capacity(alice.len() * bob.len());
    for ma in &alice {
        for mb in &bob {
            let mut p = [0.0; 4];
            for a in 0..2 {
                for b in 0..2 {
                    p[2 * a + b] = state.expect(&kron(&ma[a], &mb[b])).re;
                }
            }
            table.push(p);
        }
    }
    Behavior {
        alice_settings: alice.len(),
        bob_settings: bob.len(),
        table,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bell::{ebi, ebi_reference_strategy, expectation};
    use crate::states::{correlation_data, maximally_mixed, pure_state, singlet};
    use core::f64::consts::FRAC_PI_4;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn singlet_aligned_is_anticorrelated() {
        let z =
            MeasurementStrategy::new(alloc::vec![[0.0, 0.0, 1.0]], alloc::vec![[0.0, 0.0, 1.0]])
                .unwrap();
        let b = behavior_from(&singlet(), &z);
        assert!(b.p(0, 0, 0, 0).abs() < 1e-15);
        assert!(b.p(1, 1, 0, 0).abs() < 1e-15);
        assert!((b.p(0, 1, 0, 0) - 0.5).abs() < 1e-15);
        assert!((b.p(1, 0, 0, 0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn maximally_mixed_is_uniform() {
        let b = behavior_from(&maximally_mixed(), &ebi_reference_strategy());
        assert!(b.rows().all(|(.., p)| (p - 0.25).abs() < 1e-15));
        assert_eq!(b.rows().count(), 48);
    }

    #[test]
    fn bell_value_from_probabilities() {
        let s = pure_state(FRAC_PI_4).unwrap();
        let b = behavior_from(&s, &ebi_reference_strategy());
        assert!((b.bell_value(&ebi()) - 4.0 * libm::sqrt(3.0)).abs() < 1e-10);
        let direct = expectation(&s, &ebi(), &ebi_reference_strategy()).unwrap();
        assert!((b.bell_value(&ebi()) - direct).abs() < 1e-12);
    }

    #[test]
    fn random_behaviors_are_valid_and_no_signaling() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let psi = core::array::from_fn(|_| {
                num_complex::Complex64::new(
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                )
            });
            let s = TwoQubitState::from_pure(&psi)
                .unwrap()
                .with_white_noise(rng.random_range(0.0..1.0))
                .unwrap();
            let dir = |rng: &mut ChaCha8Rng| {
                let v: [f64; 3] = core::array::from_fn(|_| rng.random_range(-1.0..1.0));
                crate::linalg::normalize3(&v, 1e-3).unwrap_or([0.0, 0.0, 1.0])
            };
            let strat = MeasurementStrategy {
                alice: (0..3).map(|_| dir(&mut rng)).collect(),
                bob: (0..4).map(|_| dir(&mut rng)).collect(),
            };
            let b = behavior_from(&s, &strat);
            assert!(b.rows().all(|(.., p)| p >= -1e-15));
            assert!(b.normalization_error() <= 1e-12);
            assert!(b.signaling() <= 1e-10);
            let cd = correlation_data(&s);
            for x in 0..3 {
                for y in 0..4 {
                    let want = crate::linalg::dot3(&strat.alice[x], &cd.t.mul_vec(&strat.bob[y]));
                    assert!((b.correlator(x, y) - want).abs() < 1e-12);
                }
            }
        }
    }
}
