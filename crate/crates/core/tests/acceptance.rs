//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line.
//!
//! Run with `cargo test -p gbs-core --test acceptance -- --nocapture` to see
//! the per-criterion lines and timings.

use std::panic::{catch_unwind, resume_unwind, UnwindSafe};
use std::time::{Duration, Instant};

use num_integer::Integer as _;

use gbs_core::covering::{covering_from_permutations, gamma_k, lift_labels, CoveringGraph};
use gbs_core::iso::{char_vector, dual_graph, iso_normal_forms, iso_subgroups, verify_certificate};
use gbs_core::modular::modular_image;
use gbs_core::moves::{apply, random_deform};
use gbs_core::normalform::{euclid_slide_pair, normal_form_of_cover, NormalForm};
use gbs_core::{comm, Int};

fn int(v: i64) -> Int {
    Int::from(v)
}

fn criterion<F: FnOnce() + UnwindSafe>(number: usize, description: &str, body: F) {
    let start = Instant::now();
    let outcome = catch_unwind(body);
    let elapsed = start.elapsed();
    match outcome {
        Ok(()) => println!("criterion {number} ({description}): PASS in {elapsed:.2?}"),
        Err(payload) => {
            println!("criterion {number} ({description}): FAIL in {elapsed:.2?}");
            resume_unwind(payload);
        }
    }
}

/// All normalised pairs 1 <= |m| <= n <= 20, both signs of m.
fn grid() -> Vec<(Int, Int)> {
    let mut pairs = Vec::new();
    for n in 1..=20i64 {
        for m in 1..=n {
            pairs.push((int(m), int(n)));
            pairs.push((int(-m), int(n)));
        }
    }
    pairs
}

fn comm_matrix(pairs: &[(Int, Int)]) -> Vec<Vec<bool>> {
    pairs
        .iter()
        .map(|(m1, n1)| {
            pairs
                .iter()
                .map(|(m2, n2)| {
                    comm::commensurable(m1, n1, m2, n2)
                        .expect("nonzero inputs")
                        .commensurable
                })
                .collect()
        })
        .collect()
}

#[test]
fn criterion_1_classification_table() {
    criterion(1, "classification on the grid |m| <= n <= 20", || {
        let start = Instant::now();
        let pairs = grid();
        let index = |m: i64, n: i64| {
            pairs
                .iter()
                .position(|(pm, pn)| *pm == int(m) && *pn == int(n))
                .expect("pair in grid")
        };
        let matrix = comm_matrix(&pairs);
        let count = pairs.len();

        for a in 0..count {
            assert!(matrix[a][a], "reflexivity at {:?}", pairs[a]);
            for b in 0..count {
                assert_eq!(matrix[a][b], matrix[b][a], "symmetry at {a},{b}");
            }
        }
        for a in 0..count {
            for b in 0..count {
                if !matrix[a][b] {
                    continue;
                }
                for c in 0..count {
                    if matrix[b][c] {
                        assert!(matrix[a][c], "transitivity broken at {a},{b},{c}");
                    }
                }
            }
        }

        let ratio_two = [(2, 4), (3, 6), (5, 10), (4, 8)];
        for (m1, n1) in ratio_two {
            for (m2, n2) in ratio_two {
                for s1 in [1, -1] {
                    for s2 in [1, -1] {
                        assert!(
                            matrix[index(s1 * m1, n1)][index(s2 * m2, n2)],
                            "BS({},{n1}) ~ BS({},{n2}) expected",
                            s1 * m1,
                            s2 * m2
                        );
                    }
                }
            }
        }
        let powers_of_two = [2, 4, 8, 16];
        for n1 in powers_of_two {
            for n2 in powers_of_two {
                for s1 in [1, -1] {
                    for s2 in [1, -1] {
                        assert!(matrix[index(s1, n1)][index(s2, n2)]);
                    }
                }
            }
        }
        // BS(2,3) is commensurable with exactly BS(±2,3) inside the grid.
        let a = index(2, 3);
        for b in 0..count {
            let expected = pairs[b] == (int(2), int(3)) || pairs[b] == (int(-2), int(3));
            assert_eq!(matrix[a][b], expected, "class of BS(2,3) at {:?}", pairs[b]);
        }
        assert!(
            !matrix[index(1, 2)][index(2, 4)],
            "BS(1,2) and BS(2,4) must differ"
        );

        assert!(
            start.elapsed() < Duration::from_secs(60),
            "criterion 1 too slow"
        );
    });
}

#[test]
fn criterion_2_euclid_oracle() {
    criterion(2, "slide Euclid vs gcd, exhaustive", || {
        let start = Instant::now();
        for a in 1..=30u64 {
            for b in 0..=60u64 {
                for c in 0..=60u64 {
                    let d = a.gcd(&b.abs_diff(c));
                    assert_eq!(euclid_slide_pair(a, b, c), (d, b % d), "a={a} b={b} c={c}");
                }
            }
        }
        assert!(
            start.elapsed() < Duration::from_secs(5),
            "criterion 2 too slow"
        );
    });
}

#[test]
fn criterion_3_four_sheet_golden() {
    criterion(
        3,
        "four-sheet cover normalises to NF(p,1,2;[0,0,1,1])",
        || {
            for p in [2i64, 3, 5] {
                let cover =
                    covering_from_permutations(2, 4, vec![vec![1, 2, 3, 0], vec![1, 0, 3, 2]])
                        .unwrap();
                let form = normal_form_of_cover(&cover, &int(p)).unwrap();
                let expected = NormalForm::new(int(p), 1, 2, vec![0, 0, 1, 1]).unwrap();
                assert_eq!(form, expected, "base {p}");
                // Literal loops: (1, p^2), (p, p), (p, p), (1, 1), (1, 1).
                let mut labels: Vec<(Int, Int)> = form
                    .to_graph()
                    .edges()
                    .iter()
                    .map(|e| (e.a.clone(), e.omega.clone()))
                    .collect();
                labels.sort();
                let mut expected_labels = vec![
                    (int(1), int(p * p)),
                    (int(p), int(p)),
                    (int(p), int(p)),
                    (int(1), int(1)),
                    (int(1), int(1)),
                ];
                expected_labels.sort();
                assert_eq!(labels, expected_labels, "base {p}");
            }
        },
    );
}

#[test]
fn criterion_4_gamma_embeddings() {
    criterion(4, "gamma_k covers realise the full-rank bouquets", || {
        let start = Instant::now();
        for k in 3..=8usize {
            for n in [2i64, 3, 4] {
                let cover = gamma_k(k).unwrap();
                let emb = normal_form_of_cover(&cover, &int(n)).unwrap();
                let target = normal_form_of_cover(&CoveringGraph::trivial(k), &int(n)).unwrap();
                assert_eq!(emb, target, "k={k} n={n}");
                assert!(
                    iso_subgroups(&cover, &int(n), &CoveringGraph::trivial(k), &int(n)).unwrap(),
                    "k={k} n={n}"
                );
            }
        }
        assert!(
            start.elapsed() < Duration::from_secs(10),
            "criterion 4 too slow"
        );
    });
}

/// All normal forms with the given primitive base, `l = 1`, `m <= max_m`,
/// `k <= max_k`.
fn enumerate_forms(r: i64, max_m: u64, max_k: usize) -> Vec<NormalForm> {
    let mut out = Vec::new();
    for m in 1..=max_m {
        for k in 2..=max_k {
            let mut stack: Vec<Vec<u64>> = vec![vec![]];
            for _ in 0..k - 1 {
                let mut next = Vec::new();
                for prefix in &stack {
                    for p in 0..m {
                        let mut v = prefix.clone();
                        v.push(p);
                        next.push(v);
                    }
                }
                stack = next;
            }
            for ps in stack {
                out.push(NormalForm::new(int(r), 1, m, ps).unwrap());
            }
        }
    }
    out
}

#[test]
fn criterion_5_move_invariance() {
    criterion(
        5,
        "1000 reduced random trajectories keep all invariants",
        || {
            let start = Instant::now();
            let mut forms = Vec::new();
            for r in [2i64, 3] {
                forms.extend(enumerate_forms(r, 4, 5));
            }
            assert!(
                forms.len() >= 900,
                "expected roughly a thousand start forms"
            );
            let mut failures = 0usize;
            for run in 0..1000usize {
                let form = &forms[run % forms.len()];
                let g0 = form.to_graph();
                let betti = g0.betti_number();
                let image = modular_image(&g0);
                let (_, log) = random_deform(&g0, 50, run as u64, true);
                let mut current = g0;
                for mv in &log {
                    current = apply(&current, mv).expect("logged move replays");
                    if current.betti_number() != betti || modular_image(&current) != image {
                        failures += 1;
                        break;
                    }
                    match dual_graph(&current, form.base(), form.level(), form.modulus()) {
                        Ok(d) => {
                            if !d.potential_matches_residues(form.residues()) {
                                failures += 1;
                                break;
                            }
                        }
                        Err(_) => {
                            failures += 1;
                            break;
                        }
                    }
                }
            }
            assert_eq!(failures, 0);
            assert!(
                start.elapsed() < Duration::from_secs(120),
                "criterion 5 too slow"
            );
        },
    );
}

#[test]
fn criterion_6_iso_oracle_equivalence() {
    criterion(6, "isomorphism decision matches the shift oracle", || {
        // Exhaustive over r = 2, l·m <= 6, k <= 4.
        let mut forms = Vec::new();
        for l in 1..=6u64 {
            for m in 1..=(6 / l) {
                for k in 2..=4usize {
                    let mut stack: Vec<Vec<u64>> = vec![vec![]];
                    for _ in 0..k - 1 {
                        let mut next = Vec::new();
                        for prefix in &stack {
                            for p in 0..m {
                                let mut v = prefix.clone();
                                v.push(p);
                                next.push(v);
                            }
                        }
                        stack = next;
                    }
                    for ps in stack {
                        forms.push(NormalForm::new(int(2), l, m, ps).unwrap());
                    }
                }
            }
        }

        let oracle = |a: &NormalForm, b: &NormalForm| -> bool {
            if a.level() * a.modulus() != b.level() * b.modulus() || a.k() != b.k() {
                return false;
            }
            let va = char_vector(a).entries;
            let vb = char_vector(b).entries;
            let len = va.len();
            (0..len).any(|c| (0..len).all(|j| va[j] == vb[(j + c) % len]))
        };

        for a in &forms {
            for b in &forms {
                let got = iso_normal_forms(a, b);
                assert_eq!(got.is_some(), oracle(a, b), "{a} vs {b}");
                if let Some(cert) = got {
                    assert!(verify_certificate(a, b, &cert), "{a} vs {b}");
                }
            }
        }

        let a = NormalForm::new(int(2), 2, 3, vec![0, 2]).unwrap();
        let b = NormalForm::new(int(2), 1, 6, vec![1, 5]).unwrap();
        assert!(iso_normal_forms(&a, &b).is_some());
        let c = NormalForm::new(int(2), 1, 2, vec![0, 0]).unwrap();
        let d = NormalForm::new(int(2), 1, 2, vec![0, 1]).unwrap();
        assert!(iso_normal_forms(&c, &d).is_none());
    });
}

#[test]
fn criterion_7_covering_invariants() {
    criterion(
        7,
        "500 random covers: regular degree and Betti number",
        || {
            use rand::seq::SliceRandom;
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
            let mut produced = 0usize;
            while produced < 500 {
                let d = rng.gen_range(1..=3usize);
                let n = rng.gen_range(1..=8usize);
                let perms: Vec<Vec<usize>> = (0..d)
                    .map(|_| {
                        let mut p: Vec<usize> = (0..n).collect();
                        p.shuffle(&mut rng);
                        p
                    })
                    .collect();
                let Ok(cover) = covering_from_permutations(d, n, perms) else {
                    continue;
                };
                produced += 1;
                let g = lift_labels(&cover, &int(2), &int(5));
                assert_eq!(g.betti_number(), n * (d - 1) + 1);
                for v in 0..n {
                    assert_eq!(g.edges().iter().filter(|e| e.source == v).count(), d);
                    assert_eq!(g.edges().iter().filter(|e| e.target == v).count(), d);
                }
            }
        },
    );
}

#[test]
fn criterion_8_witness_validation() {
    criterion(
        8,
        "every positive grid verdict has a checkable witness",
        || {
            let pairs = grid();
            let mut positive = 0usize;
            for (m1, n1) in &pairs {
                for (m2, n2) in &pairs {
                    let verdict = comm::commensurable(m1, n1, m2, n2).unwrap();
                    if !verdict.commensurable {
                        continue;
                    }
                    positive += 1;
                    let cert = comm::witness(m1, n1, m2, n2).unwrap_or_else(|e| {
                        panic!("witness for BS({m1},{n1}) ~ BS({m2},{n2}): {e}")
                    });
                    comm::validate_certificate(&cert, m1, n1, m2, n2).unwrap_or_else(|e| {
                        panic!("certificate for BS({m1},{n1}) ~ BS({m2},{n2}): {e}")
                    });
                }
            }
            assert!(
                positive > 420,
                "the grid has at least its diagonal positive"
            );
        },
    );
}
