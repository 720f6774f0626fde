use num_complex::Complex64;
use proptest::prelude::*;

use dirichlet_core::lfun::{dirichlet_l, find_zeros, hardy_z, lfunction_data, scan_family};
use dirichlet_core::simplezeros::{multiplicity_detect, MULTIPLICITY_TOLERANCE};
use dirichlet_core::stats::{
    bdh_variance, explicit_formula_residual, f_phi, prime_sum, tables_for, PairCorrConfig, PrimeSumKind,
};
use dirichlet_core::{character_group, DirichletCharacter, TestFunction, ZeroRecord};

/// |L(½+it, χ)| = |E(t)|·|Z*(t)| with E(t) = ∏_{p | q, p ∤ d}(1 − χ*(p)p^{−½−it}).
#[test]
fn induced_characters_share_critical_zeros() {
    for q in [12u64, 15, 20, 21] {
        let g = character_group(q).unwrap();
        for chi in g.characters().iter().filter(|c| !c.is_primitive() && !c.is_principal()) {
            let prim = chi.induced_primitive().unwrap();
            let d = lfunction_data(&prim).unwrap();
            let extra: Vec<u64> = dirichlet_core::arith::factorize(q)
                .into_iter()
                .map(|(p, _)| p)
                .filter(|p| prim.modulus() % p != 0)
                .collect();
            let euler = |t: f64| -> f64 {
                let s = Complex64::new(0.5, t);
                extra
                    .iter()
                    .map(|&p| (1.0 - prim.value(p) * (-s * (p as f64).ln()).exp()).norm())
                    .product()
            };
            for k in 0..40 {
                let t = 0.77 * k as f64 - 15.0;
                let l = dirichlet_l(Complex64::new(0.5, t), chi).unwrap().norm();
                let z = hardy_z(t, &d).unwrap().abs();
                assert!((l - euler(t) * z).abs() < 1e-9 * l.max(1.0), "q={q} t={t}");
            }
            let scan = find_zeros(&d, 20.0, 0.1).unwrap();
            for z in &scan.zeros {
                let l = dirichlet_l(Complex64::new(0.5, z.ordinate), chi).unwrap().norm();
                assert!(l < 1e-7, "q={q} gamma={}", z.ordinate);
            }
        }
    }
}

#[test]
fn explicit_formula_complete_form_for_more_moduli() {
    let phi = TestFunction::sinc_squared();
    for q in [11u64, 12, 13] {
        let g = character_group(q).unwrap();
        for chi in g.primitive() {
            for x in [1.0, 3.0, 50.0] {
                let ef = explicit_formula_residual(chi, x, &phi, 500.0).unwrap();
                assert!(ef.complete_residual() < ef.zero_tail, "q={q} X={x}: {}", ef.complete_residual());
            }
        }
    }
}

#[test]
fn desk_zeros_are_simple() {
    for q in 1..=20u64 {
        let g = character_group(q).unwrap();
        for chi in g.primitive() {
            let d = lfunction_data(chi).unwrap();
            let scan = find_zeros(&d, 200.0, 0.1).unwrap();
            let merged = multiplicity_detect(&scan.zeros, MULTIPLICITY_TOLERANCE).unwrap();
            assert_eq!(merged.len(), scan.zeros.len(), "q={q}");
        }
    }
}

#[test]
fn family_statistics_are_reproducible() {
    let fam = scan_family(10.0, 40.0, 0.1).unwrap();
    let cfg = PairCorrConfig::new(10.0, 0.7, 40.0).unwrap();
    let a = f_phi(&cfg, &fam).unwrap();
    let b = f_phi(&cfg, &fam).unwrap();
    assert_eq!(a.value.to_bits(), b.value.to_bits());
    let json = serde_json::to_string(&a).unwrap();
    assert!(json.contains("\"kind\":\"f_phi\""));
}

fn characters_up_to(max_q: u64) -> Vec<DirichletCharacter> {
    (1..=max_q)
        .flat_map(|q| character_group(q).unwrap().characters().to_vec())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn prime_sum_conjugates(idx in 0usize..400, x in 2.0f64..2000.0) {
        let chars = characters_up_to(30);
        let chi = &chars[idx % chars.len()];
        let phi = TestFunction::sinc_squared();
        let t = tables_for(x, &phi).unwrap();
        let a = prime_sum(chi, x, &phi, &t, PrimeSumKind::Full).unwrap();
        let b = prime_sum(&chi.conjugate(), x, &phi, &t, PrimeSumKind::Full).unwrap();
        prop_assert!((a - b.conj()).norm() < 1e-9 * a.norm().max(1.0));
    }

    #[test]
    fn bdh_nondecreasing(x in 10.0f64..3000.0, q in 1u64..60) {
        let lo = bdh_variance(x, q).unwrap().value;
        let hi = bdh_variance(x, q + 1).unwrap().value;
        prop_assert!(hi >= lo);
    }

    #[test]
    fn multiplicity_merge_is_idempotent(mut ords in proptest::collection::vec(-100.0f64..100.0, 0..40), dup in 0usize..40) {
        if !ords.is_empty() {
            let g = ords[dup % ords.len()];
            ords.push(g);
        }
        ords.sort_by(f64::total_cmp);
        let zs: Vec<ZeroRecord> = ords.iter().map(|&g| ZeroRecord::simple(g, 1e-10)).collect();
        let once = multiplicity_detect(&zs, 1e-6).unwrap();
        let twice = multiplicity_detect(&once, 1e-6).unwrap();
        prop_assert_eq!(once.len(), twice.len());
        let total: u32 = once.iter().map(|z| z.multiplicity).sum();
        prop_assert_eq!(total as usize, zs.len());
    }
}
