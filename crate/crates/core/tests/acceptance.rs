//! Acceptance suite: one test per criterion, each printing a pass/fail
//! line. All arithmetic is exact; every comparison is equality, tolerance
//! zero. Run with `cargo test --test acceptance -- --nocapture` to see the
//! per-criterion lines.

use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use reductio_core::framework::{Certificate, Instance, Registry, Threshold};
use reductio_core::matsem::{
    gamma, reduce_pcp_to_zulc, reduce_zulc_to_mm, solve_bmm, solve_bzulc, BigMatrix,
};
use reductio_core::mpo::{
    apply_stab_diagonal, eval_pn, pad_to_square, reduce_mpo_to_poly, reduce_mpo_to_stab,
    reduce_zulc_to_mpo, rho_entry, solve_bmpo, MpoFamily, TraceWitness,
};
use reductio_core::pcp::{pcp_threshold, reduce_nhalt_to_pcp, Domino, PcpInstance};
use reductio_core::tiling::{
    energy, min_energy, reduce_nhaltall_to_tile, reduce_tile_to_gse, solve_btile, verify_tiling,
    SpinConfig, TileOutcome, TileSet, TilingAssignment, WangTile,
};
use reductio_core::turing::{
    generate_corpus, AllPathsOutcome, CorpusSpec, Dir, Ntm, TapeModel,
};

fn announce(criterion: &str, started: Instant) {
    println!("{criterion}: PASS ({:.2?})", started.elapsed());
}

struct Lcg(u64);

impl Lcg {
    fn next(&mut self) -> u64 {
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        self.0 >> 33
    }
    fn below(&mut self, n: u64) -> u64 {
        self.next() % n
    }
}

/// The shared machine corpus: at most two non-final states, two symbols,
/// branching at most two, semi-infinite tape, fixed seed.
fn machine_corpus() -> Vec<Ntm> {
    generate_corpus(&CorpusSpec {
        states: 2,
        symbols: 2,
        branching: 2,
        limit: 110,
        seed: CorpusSpec::default().seed,
        tape: TapeModel::SemiInfinite,
    })
    .expect("corpus parameters are valid")
}

/// Deterministic small correspondence instances: up to three dominoes over
/// two letters, word lengths up to two, one side of each domino non-empty.
fn small_pcp_corpus(count: usize) -> Vec<PcpInstance> {
    let mut rng = Lcg(0x5ca1_ab1e_0000_0001);
    let mut out = Vec::new();
    while out.len() < count {
        let k = 1 + rng.below(3) as usize;
        let mut dominoes = Vec::new();
        for _ in 0..k {
            let tl = rng.below(3) as usize;
            let bl = if tl == 0 {
                1 + rng.below(2) as usize
            } else {
                rng.below(3) as usize
            };
            let top = (0..tl).map(|_| rng.below(2) as u16).collect();
            let bottom = (0..bl).map(|_| rng.below(2) as u16).collect();
            dominoes.push(Domino { top, bottom });
        }
        if let Ok(inst) = PcpInstance::new(vec!["a".into(), "b".into()], dominoes) {
            out.push(inst);
        }
    }
    out
}

fn one_step_halter() -> Ntm {
    Ntm::new(
        vec!["_".into()],
        "_",
        vec!["q0".into(), "qf".into()],
        "q0",
        &["qf".into()],
        TapeModel::SemiInfinite,
        &[(
            ("q0".into(), "_".into()),
            vec![("qf".into(), "_".into(), Dir::Right)],
        )],
    )
    .unwrap()
}

#[test]
fn criterion_01_pcp_threshold_law() {
    let started = Instant::now();
    let corpus = machine_corpus();
    assert!(corpus.len() >= 100, "corpus must hold at least 100 machines");
    let mut halting = 0usize;
    for m in &corpus {
        let inst = reduce_nhalt_to_pcp(m).expect("corpus machines are semi-infinite");
        let min_match = inst.solve_bpcp(pcp_threshold(3)).map(|w| w.len() as u64);
        for n in 0..=3u64 {
            let halts = m.halts_exists_within(n).is_some();
            let matched = min_match.is_some_and(|l| l <= pcp_threshold(n));
            assert_eq!(
                halts,
                matched,
                "existential halting within {n} must equal matching within {}",
                pcp_threshold(n)
            );
        }
        if m.min_halting_time(3).is_some() {
            halting += 1;
        }
    }
    assert!(halting > 0, "the corpus must exercise halting machines");
    assert!(halting < corpus.len(), "and non-halting ones");
    announce("criterion 01 pcp-threshold-law", started);
}

#[test]
fn criterion_02_gamma_morphism_and_injectivity() {
    let started = Instant::now();
    let mut rng = Lcg(0xd1d1_0000_0002);
    let word = |rng: &mut Lcg| -> Vec<u8> {
        let l = rng.below(9) as usize;
        (0..l).map(|_| rng.below(3) as u8).collect()
    };
    let mut seen: std::collections::HashMap<Vec<BigInt>, (Vec<u8>, Vec<u8>)> =
        std::collections::HashMap::new();
    let mut distinct = 0usize;
    for _ in 0..1000 {
        let (w1, w2) = (word(&mut rng), word(&mut rng));
        let (u1, u2) = (word(&mut rng), word(&mut rng));
        let cat1: Vec<u8> = w1.iter().chain(u1.iter()).copied().collect();
        let cat2: Vec<u8> = w2.iter().chain(u2.iter()).copied().collect();
        let lhs = gamma(&cat1, &cat2).unwrap();
        let rhs = gamma(&w1, &w2).unwrap().mul(&gamma(&u1, &u2).unwrap());
        assert_eq!(lhs, rhs, "morphism identity must be exact");

        let g = gamma(&w1, &w2).unwrap();
        match seen.insert(g.entries().to_vec(), (w1.clone(), w2.clone())) {
            None => distinct += 1,
            Some(prev) => assert_eq!(prev, (w1, w2), "encoding collision"),
        }
    }
    assert!(distinct >= 900, "the sample must cover many distinct pairs");
    announce("criterion 02 gamma-morphism-injectivity", started);
}

#[test]
fn criterion_03_pcp_zulc_length_identity() {
    let started = Instant::now();
    let corpus = small_pcp_corpus(50);
    let mut matched = 0usize;
    for inst in &corpus {
        let fam = reduce_pcp_to_zulc(inst).expect("reduction succeeds");
        let match_len = inst.solve_bpcp(6).map(|w| w.len());
        let corner_len = solve_bzulc(&fam, 6).map(|w| w.len());
        assert_eq!(
            match_len, corner_len,
            "minimal match and corner-zero lengths must agree on {inst:?}"
        );
        if match_len.is_some() {
            matched += 1;
        }
    }
    assert!(matched > 0, "the corpus must contain yes-instances");
    announce("criterion 03 pcp-zulc-length-identity", started);
}

#[test]
fn criterion_04_mortality_shift_law() {
    let started = Instant::now();
    let corpus = small_pcp_corpus(50);
    let mut checked = 0usize;
    for inst in &corpus {
        let fam = reduce_pcp_to_zulc(inst).expect("reduction succeeds");
        let Some(zulc_min) = solve_bzulc(&fam, 5).map(|w| w.len() as u64) else {
            continue;
        };
        let mm = reduce_zulc_to_mm(&fam).expect("derived families are invertible");
        let w = solve_bmm(&mm, zulc_min + 2).expect("mortality witness must exist");
        assert_eq!(w.len() as u64, zulc_min + 2, "minimal zero product length");
        assert!(mm.product(&w).unwrap().is_zero(), "witness recomputes to zero");
        checked += 1;
    }
    assert!(checked > 0, "some instances must reach the mortality check");
    announce("criterion 04 mortality-shift-law", started);
}

#[test]
fn criterion_05_operator_shift_law() {
    let started = Instant::now();
    let corpus = small_pcp_corpus(50);
    let mut checked = 0usize;
    for inst in &corpus {
        let fam = reduce_pcp_to_zulc(inst).expect("reduction succeeds");
        for m in fam.matrices() {
            assert!(!m.det().is_zero(), "families must be invertible");
        }
        let Some(zulc_min) = solve_bzulc(&fam, 4).map(|w| w.len() as u64) else {
            continue;
        };
        let mpo = reduce_zulc_to_mpo(&fam).expect("integer input");
        let w = solve_bmpo(&mpo, zulc_min + 1).expect("negative trace must exist");
        assert_eq!(w.len() as u64, zulc_min + 1, "minimal negative-trace length");
        assert!(
            rho_entry(&mpo, &w).unwrap().is_negative(),
            "witness recomputes negative"
        );
        assert_eq!(solve_bmpo(&mpo, zulc_min), None, "no shorter negative trace");
        checked += 1;
    }
    assert!(checked > 0, "some instances must reach the operator check");
    announce("criterion 05 operator-shift-law", started);
}

#[test]
fn criterion_06_polynomial_basis_identity() {
    let started = Instant::now();
    let mut rng = Lcg(0x0006_0006_0006);
    for dim in 1..=3usize {
        for k in 1..=3usize {
            let matrices: Vec<BigMatrix> = (0..k)
                .map(|_| {
                    let entries: Vec<i64> =
                        (0..dim * dim).map(|_| rng.below(11) as i64 - 5).collect();
                    BigMatrix::from_i64(dim, &entries).unwrap()
                })
                .collect();
            let fam = MpoFamily::new(matrices).unwrap();
            let pf = reduce_mpo_to_poly(&fam);
            let basis = |i: usize| -> Vec<BigRational> {
                (0..k)
                    .map(|j| {
                        if i == j {
                            BigRational::one()
                        } else {
                            BigRational::zero()
                        }
                    })
                    .collect()
            };
            for len in 1..=4usize {
                let mut tuple = vec![0usize; len];
                loop {
                    let points: Vec<_> = tuple.iter().map(|&i| basis(i)).collect();
                    let via_poly = eval_pn(&pf, &points).unwrap();
                    let via_trace = rho_entry(&fam, &TraceWitness(tuple.clone())).unwrap();
                    assert_eq!(
                        via_poly,
                        BigRational::from(via_trace),
                        "basis identity at D={dim} k={k} tuple {tuple:?}"
                    );
                    let mut pos = len;
                    loop {
                        if pos == 0 {
                            break;
                        }
                        pos -= 1;
                        tuple[pos] += 1;
                        if tuple[pos] < k {
                            break;
                        }
                        tuple[pos] = 0;
                    }
                    if tuple.iter().all(|&t| t == 0) {
                        break;
                    }
                }
            }
        }
    }
    announce("criterion 06 polynomial-basis-identity", started);
}

#[test]
fn criterion_07_contraction_identity() {
    let started = Instant::now();
    let mut rng = Lcg(0x0007_0007_0007);
    for k in 1..=3usize {
        let matrices: Vec<BigMatrix> = (0..k)
            .map(|_| {
                let entries: Vec<i64> = (0..16).map(|_| rng.below(9) as i64 - 4).collect();
                BigMatrix::from_i64(4, &entries).unwrap()
            })
            .collect();
        let fam = MpoFamily::new(matrices).unwrap();
        let spec = reduce_mpo_to_stab(&fam).unwrap();
        assert_eq!(spec.s, 2);
        for n in 1..=3u64 {
            let diag = apply_stab_diagonal(&spec, n).unwrap();
            let mut tuple = vec![0usize; n as usize];
            let mut idx = 0usize;
            loop {
                assert_eq!(
                    diag[idx],
                    rho_entry(&fam, &TraceWitness(tuple.clone())).unwrap(),
                    "contraction identity at k={k} n={n} tuple {tuple:?}"
                );
                idx += 1;
                let mut pos = tuple.len();
                loop {
                    if pos == 0 {
                        break;
                    }
                    pos -= 1;
                    tuple[pos] += 1;
                    if tuple[pos] < k {
                        break;
                    }
                    tuple[pos] = 0;
                }
                if tuple.iter().all(|&t| t == 0) {
                    break;
                }
            }
            assert_eq!(idx, diag.len());
        }
    }
    announce("criterion 07 contraction-identity", started);
}

#[test]
fn criterion_08_tiling_halting_law() {
    let started = Instant::now();
    // Same machine structures as criterion 1, evaluated on the two-way
    // reading the tile construction natively simulates.
    let corpus = machine_corpus();
    assert!(corpus.len() >= 100);
    let mut impossible_seen = 0usize;
    for m in &corpus {
        let m = m.with_tape_model(TapeModel::TwoWayInfinite);
        let tiles = reduce_nhaltall_to_tile(&m);
        for n in 0..=3u64 {
            let halts_all = matches!(m.halts_all_within(n), AllPathsOutcome::AllHalt);
            let impossible = matches!(
                solve_btile(&tiles, n as u32 + 1),
                TileOutcome::Impossible
            );
            assert_eq!(
                halts_all, impossible,
                "universal halting within {n} must equal untileability at radius {}",
                n + 1
            );
            if impossible {
                impossible_seen += 1;
            }
        }
    }
    assert!(impossible_seen > 0, "the corpus must exercise untileable grids");
    announce("criterion 08 tiling-halting-law", started);
}

/// Exhaustive ground-state oracle: enumerate every configuration.
fn exhaustive_min_energy(model: &reductio_core::tiling::SpinModel, n: u32) -> u64 {
    let side = 2 * n as usize + 1;
    let total = side * side;
    let k = model.spins;
    let mut cells = vec![0usize; total];
    let mut best = u64::MAX;
    loop {
        let cfg = SpinConfig {
            radius: n,
            cells: cells.clone(),
        };
        best = best.min(energy(model, &cfg));
        let mut pos = total;
        loop {
            if pos == 0 {
                return best;
            }
            pos -= 1;
            cells[pos] += 1;
            if cells[pos] < k {
                break;
            }
            cells[pos] = 0;
        }
    }
}

/// Small deterministic tile sets with at most four tiles.
fn small_tile_sets() -> Vec<TileSet> {
    let t = |n: u16, e: u16, s: u16, w: u16| WangTile {
        north: n,
        east: e,
        south: s,
        west: w,
    };
    vec![
        // One self-matching tile.
        TileSet::new(vec!["g".into()], vec![t(0, 0, 0, 0)]).unwrap(),
        // North/south mismatch everywhere.
        TileSet::new(
            vec!["r".into(), "b".into(), "g".into()],
            vec![t(0, 2, 1, 2)],
        )
        .unwrap(),
        // A two-tile horizontal checkerboard.
        TileSet::new(
            vec!["x".into(), "y".into(), "c".into()],
            vec![t(2, 0, 2, 1), t(2, 1, 2, 0)],
        )
        .unwrap(),
        // Three tiles, one of which only fits against itself.
        TileSet::new(
            vec!["p".into(), "q".into(), "c".into()],
            vec![t(0, 0, 0, 0), t(0, 1, 0, 0), t(1, 2, 1, 2)],
        )
        .unwrap(),
        // Four tiles with a column constraint.
        TileSet::new(
            vec!["a".into(), "b".into(), "c".into(), "d".into()],
            vec![t(0, 2, 1, 2), t(1, 2, 0, 2), t(0, 3, 0, 3), t(1, 3, 1, 3)],
        )
        .unwrap(),
    ]
}

#[test]
fn criterion_09_ground_state_equivalence() {
    let started = Instant::now();
    let budget = 400_000_000;
    for (i, ts) in small_tile_sets().iter().enumerate() {
        assert!(ts.len() <= 4);
        let model = reduce_tile_to_gse(ts);

        // Radius 1: the exhaustive oracle pins the exact minimum.
        let oracle = exhaustive_min_energy(&model, 1);
        let (e1, cfg1) = min_energy(&model, 1, budget).unwrap();
        assert_eq!(e1, oracle, "set {i}: search must equal the oracle");
        assert_eq!(energy(&model, &cfg1), e1, "minimizer energy recomputes");

        // Ground state zero exactly when a tiling exists, radius up to 3.
        let mut previous = None;
        for n in 0..=3u32 {
            let (e, _) = min_energy(&model, n, budget).unwrap();
            let tileable = matches!(solve_btile(ts, n), TileOutcome::Tiling(_));
            assert_eq!(
                e == 0,
                tileable,
                "set {i} radius {n}: zero energy must equal tileability"
            );
            if let Some(p) = previous {
                assert!(e >= p, "set {i}: minima must grow with the radius");
            }
            previous = Some(e);
        }
    }

    // Violation-counting identity on 500 random assignments.
    let mut rng = Lcg(0x0009_0009_0009);
    let sets = small_tile_sets();
    for round in 0..500 {
        let ts = &sets[round % sets.len()];
        let model = reduce_tile_to_gse(ts);
        let radius = rng.below(2) as u32;
        let side = 2 * radius as usize + 1;
        let cells: Vec<usize> = (0..side * side)
            .map(|_| rng.below(ts.len() as u64) as usize)
            .collect();
        let a = TilingAssignment {
            radius,
            cells: cells.clone(),
        };
        let (_, violations) = verify_tiling(ts, &a).unwrap();
        let cfg = SpinConfig { radius, cells };
        assert_eq!(
            energy(&model, &cfg),
            violations.len() as u64,
            "energy must count violations exactly"
        );
    }
    announce("criterion 09 ground-state-equivalence", started);
}

#[test]
fn criterion_10_bounded_axioms_and_witness_soundness() {
    let started = Instant::now();
    let registry = Registry::standard();
    let machines: Vec<Ntm> = machine_corpus().into_iter().take(12).collect();
    let pcps = small_pcp_corpus(10);

    let mut cases: Vec<(String, Instance, u64)> = Vec::new();
    for m in &machines {
        cases.push(("bnhalt".into(), Instance::Machine(m.clone()), 4));
        cases.push((
            "bnhalt-all".into(),
            Instance::Machine(m.with_tape_model(TapeModel::TwoWayInfinite)),
            4,
        ));
        let tiles = reduce_nhaltall_to_tile(&m.with_tape_model(TapeModel::TwoWayInfinite));
        cases.push(("btile".into(), Instance::Tiles(tiles.clone()), 3));
        cases.push((
            "bgse".into(),
            Instance::Spins {
                model: reduce_tile_to_gse(&tiles),
                threshold: BigRational::zero(),
            },
            2,
        ));
    }
    for p in &pcps {
        cases.push(("bpcp".into(), Instance::Correspondence(p.clone()), 7));
        let fam = reduce_pcp_to_zulc(p).unwrap();
        cases.push(("bzulc".into(), Instance::Matrices(fam.clone()), 5));
        let mm = reduce_zulc_to_mm(&fam).unwrap();
        cases.push(("bmm".into(), Instance::Matrices(mm), 5));
        let mpo = reduce_zulc_to_mpo(&fam).unwrap();
        cases.push(("bmpo".into(), Instance::Operator(mpo.clone()), 4));
        cases.push((
            "bpoly".into(),
            Instance::Polynomials(reduce_mpo_to_poly(&mpo)),
            4,
        ));
        let stab = reduce_mpo_to_stab(&pad_to_square(&mpo)).unwrap();
        cases.push(("bstab".into(), Instance::Maps(stab), 2));
    }

    let mut verified = 0usize;
    for (problem, payload, horizon) in &cases {
        let report = registry
            .check_bounded_axioms(problem, payload, *horizon)
            .unwrap_or_else(|e| panic!("{problem}: {e}"));
        assert_eq!(
            report.first_violation, None,
            "{problem}: acceptance must be monotone in the bound"
        );
        // Witness soundness: whatever the solver emits, the independent
        // verifier accepts, and a corrupted variant does not.
        if let Some(cert) = registry.solve(problem, payload, *horizon).unwrap() {
            assert!(
                registry.verify(problem, payload, *horizon, &cert).unwrap(),
                "{problem}: witness must verify from scratch"
            );
            if let Certificate::Indices(ix) = &cert {
                let mut bad = ix.clone();
                bad[0] = bad[0].wrapping_add(usize::MAX / 2);
                let corrupted = Certificate::Indices(bad);
                assert!(
                    !registry
                        .verify(problem, payload, *horizon, &corrupted)
                        .unwrap(),
                    "{problem}: corrupted witnesses must fail"
                );
            }
            verified += 1;
        }
    }
    assert!(verified > 0, "some instances must produce certificates");
    announce("criterion 10 bounded-axioms-witness-soundness", started);
}

#[test]
fn criterion_11_worked_micro_numbers() {
    let started = Instant::now();
    // A one-step halter matches in exactly p(1) = 6 dominoes.
    let inst = reduce_nhalt_to_pcp(&one_step_halter()).unwrap();
    let w = inst.solve_bpcp(6).expect("match exists");
    assert_eq!(w.len(), 6);
    assert_eq!(inst.solve_bpcp(5), None);

    // The single red/blue tile has ground-state energy 6 on the 3x3 grid.
    let ts = TileSet::new(
        vec!["red".into(), "blue".into(), "g".into()],
        vec![WangTile {
            north: 0,
            east: 2,
            south: 1,
            west: 2,
        }],
    )
    .unwrap();
    let model = reduce_tile_to_gse(&ts);
    let (e, _) = min_energy(&model, 1, 1_000_000).unwrap();
    assert_eq!(e, 6);
    announce("criterion 11 worked-micro-numbers", started);
}

#[test]
fn registry_thresholds_follow_the_arrows_on_a_sample() {
    // A cross-module spot check through the registry: the one-step halter's
    // thresholds down the existential branch.
    let started = Instant::now();
    let registry = Registry::standard();
    let m = Instance::Machine(one_step_halter());
    assert_eq!(
        registry.min_threshold("bnhalt", &m, 3).unwrap(),
        Threshold::Found(1)
    );
    let pcp = registry
        .arrow("bnhalt", "bpcp")
        .unwrap()
        .map
        .apply(&m)
        .unwrap();
    assert_eq!(
        registry.min_threshold("bpcp", &pcp, 20).unwrap(),
        Threshold::Found(6)
    );
    announce("sample registry-threshold walk", started);
}
