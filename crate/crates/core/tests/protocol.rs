use confboost::boost::rlc::{apply_and_indicate_ring, ring_ties};
use confboost::boost::{boost_rlc, InvalidPolicy, RlcOptions};
use confboost::encoding::{fold_labels, standardize};
use confboost::gc::{GarbleMode, OtMode};
use confboost::matrix::Matrix;
use confboost::protocol::{
    confidential_ds_select, reconstruct_model, run_learning, DsSelectConfig, setup, transcript_report, Construction, Phase,
    ProtocolConfig, ProtocolError, TransportKind,
};
use confboost::shares;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

/// Two noisy Gaussian blobs, standardized and label-folded.
fn toy(n: usize, k: usize, seed: u64) -> (Matrix<f64>, Vec<i8>) {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    let mut y = Vec::new();
    for i in 0..n {
        let label: i8 = if i % 2 == 0 { 1 } else { -1 };
        rows.push(
            (0..k)
                .map(|j| rng.gen_range(-1.0..1.0) + if j == 0 { 0.8 * label as f64 } else { 0.0 })
                .collect(),
        );
        y.push(label);
    }
    let x = Matrix::from_rows(rows).unwrap();
    let (xs, _) = standardize(&x).unwrap();
    (fold_labels(&xs, &y).unwrap(), y)
}

fn config(c: Construction, tau: usize, seed: u64) -> ProtocolConfig {
    let mut cfg = ProtocolConfig::new(c, tau);
    cfg.seeds.cloud = seed;
    cfg.seeds.csp = seed + 1000;
    cfg.seeds.data = seed + 2000;
    cfg
}

#[test]
fn setup_places_data() {
    let (z, _) = toy(4, 2, 1);
    let cfg = config(Construction::HeGc, 1, 1);
    let (cloud, csp, users) = setup(&cfg, &z).unwrap();
    assert_eq!(cloud.encrypted_shape(), Some((4, 3)));
    assert!(cloud.share().is_none() && csp.share().is_none());
    assert_eq!(csp.weights(), &[0.25; 4]);
    assert_eq!(users.encryptions, 12);

    let cfg = config(Construction::SecShGc, 1, 1);
    let (cloud, csp, _) = setup(&cfg, &z).unwrap();
    let fp = cloud.fixed_point();
    let joined = shares::reconstruct(cloud.share().unwrap(), csp.share().unwrap(), &fp).unwrap();
    assert_eq!(joined, fp.encode_matrix(&z).unwrap());
}

#[test]
fn base_apply_matches_plain_products() {
    let (z, _) = toy(3, 1, 2);
    let cfg = config(Construction::HeGc, 2, 5);
    let (mut cloud, mut csp, _) = setup(&cfg, &z).unwrap();
    let fp = cloud.fixed_point();
    let ez = fp.encode_matrix(&z).unwrap();
    for t in 0..2 {
        let w = fp.encode_slice(&cloud.pool()[t].w).unwrap();
        let eu = cloud.base_apply(t).unwrap();
        let opened = csp.open_masked(&eu).unwrap();
        let expect: Vec<u64> = ez.iter_rows().map(|r| fp.dot(r, &w)).collect();
        assert_eq!(opened, expect);
    }
    assert!(matches!(
        cloud.base_apply(4),
        Err(ProtocolError::IterationOutOfRange { t: 4, .. })
    ));

    let cfg = config(Construction::SecShGc, 2, 5);
    let (mut cloud, mut csp, _) = setup(&cfg, &z).unwrap();
    let w = fp.encode_slice(&cloud.pool()[0].w).unwrap();
    let ew = cloud.encrypt_weights(0).unwrap();
    let (answer, u1) = csp.masked_share_products(&ew).unwrap();
    let u0 = cloud.open_share(0, &answer).unwrap();
    for ((a, b), row) in u0.iter().zip(&u1).zip(ez.iter_rows()) {
        assert_eq!(fp.sub(*a, *b), fp.dot(row, &w));
    }
}

fn check_against_oracle(c: Construction, n: usize, k: usize, seed: u64) {
    let (z, _) = toy(n, k, seed);
    let mut cfg = config(c, 3, seed);
    cfg.p_max = 5;
    let out = run_learning(&cfg, &z, TransportKind::InProcess).unwrap();
    let fp = out.fixed_point;
    let mut opts = RlcOptions::new(cfg.tau);
    opts.p_max = cfg.p_max;
    opts.quantize = Some(fp);
    opts.keep_indicators = true;
    let oracle = boost_rlc(&z, &opts, cfg.seeds.cloud).unwrap();
    assert_eq!(out.p_used, oracle.p_used);
    assert_eq!(out.indicators, oracle.indicators);
    assert_eq!(out.rounds, oracle.rounds);
    let model = reconstruct_model(&out.model, fp).unwrap();
    assert_eq!(model, oracle.model);
    // And the oracle's ring indicators agree with real arithmetic off ties.
    let ez = fp.encode_matrix(&z).unwrap();
    for (t, ind) in out.indicators.iter().enumerate() {
        let w = fp.encode_slice(&confboost::boost::RlcPool::take(seed, k, t + 1)[t].w).unwrap();
        assert_eq!(ind, &apply_and_indicate_ring(&ez, &w, &fp).unwrap());
        let _ = ring_ties(&ez, &w, &fp);
    }
    let tr = &out.transcript;
    tr.validate_phases().unwrap();
    assert_eq!(tr.iterations, out.p_used);
}

#[test]
fn he_gc_matches_oracle() {
    check_against_oracle(Construction::HeGc, 12, 3, 11);
}

#[test]
fn secsh_gc_matches_oracle() {
    check_against_oracle(Construction::SecShGc, 12, 3, 12);
}

#[test]
fn constructions_agree_and_transports_agree() {
    let (z, _) = toy(10, 2, 3);
    let he = run_learning(&config(Construction::HeGc, 2, 7), &z, TransportKind::InProcess).unwrap();
    let ss = run_learning(&config(Construction::SecShGc, 2, 7), &z, TransportKind::InProcess).unwrap();
    assert_eq!(he.indicators, ss.indicators);
    assert_eq!(he.model, ss.model);
    let tcp = run_learning(&config(Construction::HeGc, 2, 7), &z, TransportKind::Tcp).unwrap();
    assert_eq!(tcp.transcript, he.transcript);
    assert_eq!(tcp.model, he.model);
}

#[test]
fn cost_counters_follow_the_construction() {
    let (z, _) = toy(8, 2, 4);
    let he = run_learning(&config(Construction::HeGc, 2, 9), &z, TransportKind::InProcess).unwrap();
    let t = &he.transcript;
    assert_eq!(t.csp.encryptions, 0);
    assert_eq!(t.csp.decryptions, (t.iterations * 8) as u64);
    assert_eq!(t.cloud.encryptions, (t.iterations * 8) as u64);
    let ss = run_learning(&config(Construction::SecShGc, 2, 9), &z, TransportKind::InProcess).unwrap();
    let t = &ss.transcript;
    assert_eq!(t.cloud.decryptions, (t.iterations * 8) as u64);
    assert_eq!(t.cloud.encryptions, (t.iterations * 3) as u64);
    assert_eq!(t.csp.encryptions, (t.iterations * 8) as u64);
    let r = transcript_report(t);
    assert!(r.phases_valid);
    assert!(r.bytes_by_phase.contains_key(Phase::GcTables.name()));
}

#[test]
fn offline_precompute_changes_nothing_visible() {
    let (z, _) = toy(8, 2, 5);
    let mut cfg = config(Construction::HeGc, 2, 3);
    let a = run_learning(&cfg, &z, TransportKind::InProcess).unwrap();
    cfg.offline_precompute = true;
    let b = run_learning(&cfg, &z, TransportKind::InProcess).unwrap();
    assert_eq!(a.model, b.model);
    assert_eq!(a.transcript.entries, b.transcript.entries);
}

#[test]
fn trusted_dealer_and_four_row_give_same_result() {
    let (z, _) = toy(8, 2, 6);
    let base = run_learning(&config(Construction::SecShGc, 2, 4), &z, TransportKind::InProcess).unwrap();
    let mut cfg = config(Construction::SecShGc, 2, 4);
    cfg.secure_profile = false;
    cfg.ot_mode = OtMode::TrustedDealer;
    cfg.garble_mode = GarbleMode::FourRow;
    let alt = run_learning(&cfg, &z, TransportKind::InProcess).unwrap();
    assert_eq!(base.indicators, alt.indicators);
    cfg.secure_profile = true;
    assert!(matches!(
        run_learning(&cfg, &z, TransportKind::InProcess),
        Err(ProtocolError::ConfigInvalid(_))
    ));
}

#[test]
fn single_record_does_not_panic() {
    let z = Matrix::from_rows(vec![vec![0.5, -0.25, 1.0]]).unwrap();
    let mut cfg = config(Construction::HeGc, 2, 1);
    cfg.policy = InvalidPolicy::Reject;
    let out = run_learning(&cfg, &z, TransportKind::InProcess).unwrap();
    assert!(out.p_used <= cfg.p_max);
    assert_eq!(out.pool_exhausted, out.model.len() < 2);
}

/// Exhaustive plaintext selection written out longhand.
fn oracle_ds(x: &Matrix<f64>, y: &[i8], fp: &confboost::encoding::FixedPointParams, s: usize, rounds: usize) -> Vec<usize> {
    let n = x.rows();
    let mut cands = Vec::new();
    for j in 0..x.cols() {
        for m in 0..s {
            let v = -4.0 + 8.0 * (m as f64 + 0.5) / s as f64;
            let ev: Vec<bool> = (0..n)
                .map(|i| {
                    let below = fp.is_negative(fp.sub(fp.encode(x.row(i)[j]).unwrap(), fp.encode(v).unwrap()));
                    below != (y[i] == 1)
                })
                .collect();
            cands.push(ev.clone());
            cands.push(ev.iter().map(|b| !b).collect());
        }
    }
    let mut d = vec![1.0 / n as f64; n];
    let mut picks = Vec::new();
    for _ in 0..rounds {
        let errs: Vec<f64> = cands
            .iter()
            .map(|ev| (0..n).filter(|&i| ev[i]).map(|i| d[i]).sum())
            .collect();
        let mut best = 0;
        for c in 1..errs.len() {
            if errs[c] < errs[best] {
                best = c;
            }
        }
        let e = errs[best].max(1e-10);
        if e >= 0.5 {
            break;
        }
        let a = 0.5 * ((1.0 - e) / e).ln();
        for i in 0..n {
            d[i] *= if cands[best][i] { a.exp() } else { (-a).exp() };
        }
        let tot: f64 = d.iter().sum();
        d.iter_mut().for_each(|w| *w /= tot);
        picks.push(best);
    }
    picks
}

#[test]
fn ds_selection_matches_exhaustive_search() {
    let (z, y) = toy(20, 2, 8);
    // Undo the fold: x_i = z_i * y_i without the intercept column.
    let x = Matrix::from_rows(
        z.iter_rows()
            .zip(&y)
            .map(|(r, &l)| r[..2].iter().map(|v| v * l as f64).collect())
            .collect(),
    )
    .unwrap();
    let cfg = DsSelectConfig {
        protocol: config(Construction::HeGc, 1, 21),
        bins: 4,
        rounds: 3,
    };
    let out = confidential_ds_select(&cfg, &x, &y, TransportKind::InProcess).unwrap();
    let picks: Vec<usize> = out.model.selections.iter().map(|s| s.candidate).collect();
    assert_eq!(picks, oracle_ds(&x, &y, &out.fixed_point, 4, 3));
    assert_eq!(out.errors.len(), 2 * 4);
    out.transcript.validate_phases().unwrap();
    let t = &out.transcript;
    let per = (t.ring_bits - 1) as u64;
    assert_eq!(t.csp.and_gates_garbled, 8 * 20 * per);
    let m = out.model.reconstruct();
    assert_eq!(m.len(), picks.len());

    let bad = DsSelectConfig { bins: 1, ..cfg };
    assert!(matches!(
        confidential_ds_select(&bad, &x, &y, TransportKind::InProcess),
        Err(ProtocolError::BinCountInvalid(1))
    ));
}
