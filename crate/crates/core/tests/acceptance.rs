//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! fails if any criterion fails. Run with `--nocapture` to see the report.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::sync::Arc;
use std::time::{Duration, Instant};

use nakamoto_core::consensus::*;
use nakamoto_core::ecc::*;
use nakamoto_core::hashing::*;
use nakamoto_core::ledger::*;
use nakamoto_core::netsim::*;
use nakamoto_core::notary::*;
use nakamoto_core::u256::U256;
use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest as _, Sha256};

type Check = fn() -> Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn big(dec: &str) -> BigUint {
    dec.parse().unwrap()
}

fn big_from(v: &U256) -> BigUint {
    BigUint::from_bytes_be(&v.to_be_bytes())
}

fn scenario(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn curve_constants() -> Result<String, String> {
    let two = BigUint::from(2u32);
    let p = two.pow(256) - two.pow(32) - two.pow(9) - two.pow(8) - two.pow(7) - two.pow(6) - two.pow(4) - 1u32;
    let gx = big("55066263022277343669578718895168534326250603453777594175500187360389116729240");
    let gy = big("32670510020758816978083085130507043184471273380659243275938904335757337482424");
    ensure!((&gy * &gy) % &p == (&gx * &gx * &gx + 7u32) % &p, "printed base point is not on y^2 = x^3 + 7");
    ensure!(big_from(&FIELD_PRIME) == p, "library prime differs from the printed p");
    let g = CurvePoint::generator();
    ensure!(big_from(&g.x().unwrap().value()) == gx && big_from(&g.y().unwrap().value()) == gy, "generator differs");
    ensure!(integer_mul(&GROUP_ORDER, &g).is_infinity(), "n * G is not the point at infinity");
    ensure!(!integer_mul(&GROUP_ORDER.checked_sub(&U256::ONE).unwrap(), &g).is_infinity(), "(n-1) * G is infinity");
    Ok("base point on curve, n*G = infinity".into())
}

fn emission() -> Result<String, String> {
    ensure!(reward_at_height(0) == Amount::from_coins(50).unwrap(), "height 0 reward");
    ensure!(reward_at_height(210_000) == Amount::from_coins(25).unwrap(), "height 210,000 reward");
    ensure!(reward_at_height(420_000).to_sat() == 1_250_000_000, "height 420,000 reward is not 12.5 coins");
    // oracle: sum each epoch's blocks times its halved reward until it reaches zero
    let mut oracle: u64 = 0;
    for epoch in 0..64 {
        oracle += 210_000 * ((50 * COIN) >> epoch);
    }
    let total = final_supply().to_sat();
    ensure!(total == oracle && total == 2_099_999_997_690_000, "final supply {total} vs oracle {oracle}");
    ensure!(cumulative_supply(u64::MAX).to_sat() == total, "supply at the far future differs");
    ensure!(total < 21_000_000 * COIN, "supply reaches 21M");
    ensure!(cumulative_supply(390_000) == Amount::from_coins(15_000_000).unwrap(), "15M not reached at 390,000");
    ensure!(cumulative_supply(389_999) < Amount::from_coins(15_000_000).unwrap(), "15M reached early");
    Ok(format!("final supply {total} sat"))
}

fn inflation() -> Result<String, String> {
    let rate = annualized_issuance(2).ok_or("no issuance for epoch 2")?;
    // oracle: 12.5 coins * 52,560 blocks over 15.75M coins, reduced
    let (num, den) = (1_250_000_000u128 * 52_560, 1_575_000_000_000_000u128);
    ensure!(rate.numerator * den == num * rate.denominator, "rate {}/{}", rate.numerator, rate.denominator);
    let pct = 100.0 * rate.as_f64();
    ensure!(format!("{pct:.2}") == "4.17", "rate {pct:.4}% does not round to 4.17%");
    ensure!(rate.within((35, 1000), (45, 1000)), "rate {pct}% outside [3.5%, 4.5%]");
    Ok(format!("{pct:.4}%"))
}

fn hash_conformance() -> Result<String, String> {
    let million = vec![b'a'; 1_000_000];
    let sha = [
        (&b"abc"[..], "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"),
        (&b""[..], "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"),
        (&million[..], "cdc76e5c9914fb9281a1c7e284d73e67f1809a48a497200e046d39ccc7112cd0"),
    ];
    let ripemd = [
        (&b"abc"[..], "8eb208f7e05d987a9b044a8e98c6b087f15a0bfc"),
        (&b""[..], "9c1185a5c5e9fc54612808977ee8f548b2258d31"),
        (&million[..], "52783243c1697bdbe16d37f97f68f08325dc1528"),
    ];
    for (msg, hex) in sha {
        ensure!(sha256(msg).to_hex() == hex, "sha256 of {}-byte input", msg.len());
    }
    for (msg, hex) in ripemd {
        ensure!(ripemd160(msg).to_hex() == hex, "ripemd160 of {}-byte input", msg.len());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..1000 {
        let len = rng.random_range(0..300);
        let data: Vec<u8> = (0..len).map(|_| rng.random()).collect();
        let composed: [u8; 32] = Sha256::digest(Sha256::digest(&data)).into();
        ensure!(double_sha256(&data).0 == composed, "double_sha256 differs on a {len}-byte input");
        ensure!(double_sha256(&data) == sha256(sha256(&data).as_bytes()), "double_sha256 is not sha256 twice");
    }
    Ok("6 vectors, 1000 random double hashes".into())
}

fn address_fixture() -> Result<String, String> {
    let fixture = "14xuSZXtfGw5XqfYxEjp4crwYGYQDWmZ12";
    let (version, payload) = base58check_decode(fixture).map_err(|e| format!("fixture: {e}"))?;
    ensure!(version == 0x00 && payload.len() == 20, "fixture decodes to version {version}, {} bytes", payload.len());
    ensure!(base58check_encode(version, &payload).unwrap() == fixture, "fixture does not re-encode");

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut addresses = Vec::new();
    for _ in 0..1000 {
        let payload: [u8; 20] = rng.random();
        let version: u8 = rng.random();
        let text = base58check_encode(version, &payload).unwrap();
        ensure!(base58check_decode(&text) == Ok((version, payload.to_vec())), "round trip failed for {text}");
        addresses.push(text);
    }
    let alphabet = base58::ALPHABET;
    let (mut rejected, trials) = (0u32, 10_000u32);
    for i in 0..trials {
        let mut bytes = addresses[i as usize % addresses.len()].clone().into_bytes();
        let pos = rng.random_range(0..bytes.len());
        let replacement = loop {
            let c = alphabet[rng.random_range(0..58)];
            if c != bytes[pos] {
                break c;
            }
        };
        bytes[pos] = replacement;
        rejected += u32::from(base58check_decode(std::str::from_utf8(&bytes).unwrap()).is_err());
    }
    let rate = rejected as f64 / trials as f64;
    ensure!(rate >= 0.999, "only {rate} of corruptions rejected");
    Ok(format!("corruption rejection {rate}"))
}

fn retarget_oracle(prev: &Target, actual: u64) -> BigUint {
    let expected = 1_209_600u64;
    let clamped = actual.clamp(expected / 4, expected * 4);
    (big_from(&prev.value()) * clamped / expected).min(big_from(&U256::MAX))
}

fn retarget_rules() -> Result<String, String> {
    let params = ChainParams::default();
    let prev = Target::from_leading_zero_bits(20).unwrap();
    for (actual, label) in [(1_209_600u64, "exact"), (604_800, "half"), (12_096, "1/100")] {
        let got = retarget(prev, actual as i64, &params).map_err(|e| e.to_string())?;
        let want = retarget_oracle(&prev, actual);
        ensure!(big_from(&got.value()) == want, "{label} timespan: got {got}, oracle {want:x}");
    }
    let half = retarget(prev, 604_800, &params).unwrap();
    ensure!(big_from(&half.value()) == big_from(&prev.value()) >> 1u32, "half timespan did not halve the threshold");
    let clamped = retarget(prev, 12_096, &params).unwrap();
    ensure!(big_from(&clamped.value()) == big_from(&prev.value()) / 4u32, "1/100 timespan not clamped at 4x");
    ensure!(retarget(prev, 1_209_600, &params).unwrap() == prev, "exact timespan changed the target");
    Ok("exact, half and clamped quarter".into())
}

fn consensus_interval() -> Result<String, String> {
    let config = load_scenario(&scenario("honest_10min.json")).map_err(|e| e.to_string())?;
    ensure!(config.miners.len() == 5 && config.duration_blocks == 10_000, "scenario is not 5 miners / 10,000 blocks");
    let metrics = run_simulation(&config).map_err(|e| e.to_string())?.metrics;
    let interval = metrics.mean_block_interval_s;
    ensure!(metrics.active_height >= 10_000, "only {} blocks on the chain", metrics.active_height);
    ensure!((interval - 600.0).abs() <= 30.0, "mean interval {interval} s");
    ensure!(metrics.converged, "honest nodes disagree at the end");

    // a chain mined at exactly 600 s spacing keeps its target across two retargets
    let start = Target::from_leading_zero_bits(1).unwrap();
    let spec = GenesisSpec { target: start, ..GenesisSpec::default() };
    let mut chain = ChainState::new(make_genesis_with(b"spacing", &spec).unwrap(), ChainParams::default()).unwrap();
    let payout = GenesisSpec::default().payout;
    for _ in 0..2 * 2016 + 1 {
        let now = chain.tip_block().header.timestamp + 600;
        let b = mine_block(chain.build_template(&[], payout.clone(), now), 0, u64::MAX).unwrap();
        ensure!(matches!(chain.connect_block(b)[0], ChainEvent::ExtendedActiveChain { .. }), "block refused");
    }
    ensure!(chain.active_blocks().all(|b| b.header.target == start), "target moved at a retarget boundary");
    Ok(format!("mean interval {interval} s over {} blocks; target constant through height 4033", metrics.active_height))
}

fn proportional_lottery() -> Result<String, String> {
    let config = SimConfig {
        node_count: 10,
        peer_degree: 4,
        latency_model: LatencyModel::default(),
        miners: vec![MinerConfig { node: 0, hashpower: 3.0 }, MinerConfig { node: 5, hashpower: 1.0 }],
        block_interval_target_s: 600.0,
        duration_blocks: 10_000,
        rng_seed: 31,
        attacker: None,
    };
    let table = miner_share_experiment(&config, 1).map_err(|e| e.to_string())?;
    ensure!(table.total >= 10_000, "{} blocks", table.total);
    ensure!((table.shares[0] - 0.75).abs() <= 0.02 && (table.shares[1] - 0.25).abs() <= 0.02, "shares {:?}", table.shares);
    ensure!(table.p_value > 0.001, "chi-square p = {}", table.p_value);
    Ok(format!("shares {:.4}/{:.4}, chi2 {:.3}, p {:.3}", table.shares[0], table.shares[1], table.chi_square, table.p_value))
}

fn sybil_resistance() -> Result<String, String> {
    let base = SimConfig {
        node_count: 12,
        peer_degree: 4,
        latency_model: LatencyModel::default(),
        miners: [4.0, 2.0, 1.0, 1.0].iter().enumerate().map(|(i, &h)| MinerConfig { node: 3 * i, hashpower: h }).collect(),
        block_interval_target_s: 600.0,
        duration_blocks: 2000,
        rng_seed: 41,
        attacker: None,
    };
    let report = sybil_experiment(&base, 100).map_err(|e| e.to_string())?;
    ensure!(report.identical, "counts differ: {:?} vs {:?}", report.baseline_blocks, report.with_sybils_blocks);
    ensure!(report.sybil_blocks == 0, "sybil identities found {} blocks", report.sybil_blocks);
    ensure!(report.compared_finds >= 2000, "compared only {} finds", report.compared_finds);
    Ok(format!("{} finds, counts {:?} both ways", report.compared_finds, report.baseline_blocks))
}

/// Attacker-vs-honest race as a biased random walk, no network or blocks.
fn gamblers_ruin(q: f64, z: u64, trials: u64, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut wins = 0;
    for _ in 0..trials {
        let (mut honest, mut attacker) = (0u64, 0u64);
        loop {
            if rng.random_bool(q) {
                attacker += 1;
            } else {
                honest += 1;
            }
            if honest >= z && attacker > honest {
                wins += 1;
                break;
            }
            if honest >= attacker + 200 {
                break;
            }
        }
    }
    wins as f64 / trials as f64
}

fn double_spend() -> Result<String, String> {
    const TRIALS: u64 = 10_000;
    const ORACLE_TRIALS: u64 = 100_000;
    let mut cells = Vec::new();
    for (i, q) in [0.1, 0.25, 0.4].into_iter().enumerate() {
        for (j, z) in [1u64, 3, 6].into_iter().enumerate() {
            let oracle = gamblers_ruin(q, z, ORACLE_TRIALS, 500 + (3 * i + j) as u64);
            let freq = double_spend_experiment(q, z, TRIALS, 900 + (3 * i + j) as u64).map_err(|e| e.to_string())?;
            let se = (oracle * (1.0 - oracle) * (1.0 / TRIALS as f64 + 1.0 / ORACLE_TRIALS as f64)).sqrt();
            ensure!((freq - oracle).abs() <= 3.0 * se, "q={q} z={z}: {freq} vs oracle {oracle} (se {se:.5})");
            cells.push(format!("q={q},z={z}:{freq}/{oracle}"));
        }
    }
    for z in [1, 3, 6] {
        let zero = double_spend_experiment(0.0, z, 1000, 77).map_err(|e| e.to_string())?;
        ensure!(zero == 0.0, "q=0 z={z} gave {zero}");
    }
    let majority = double_spend_experiment(0.6, 6, TRIALS, 78).map_err(|e| e.to_string())?;
    ensure!(majority > 0.99, "q=0.6 gave {majority}");
    Ok(format!("{}; q=0 -> 0; q=0.6 -> {majority}", cells.join(" ")))
}

fn fork_behavior() -> Result<String, String> {
    let owner = Scalar::from_u64(7);
    let owner_script = LockingScript::PayToPubKeyHash(hash160(&derive_public_key(&owner).unwrap().to_bytes()));
    let spec = GenesisSpec {
        payout: owner_script.clone(),
        target: Target::from_leading_zero_bits(1).unwrap(),
        ..GenesisSpec::default()
    };
    let genesis = make_genesis_with(b"fork", &spec).unwrap();
    let coin = OutPoint::new(txid(&genesis.transactions[0]), 0);
    let mut chain = ChainState::new(genesis, ChainParams::default()).unwrap();
    let mine_on = |chain: &ChainState, parent: Digest256, txs: Vec<Transaction>, tag: u64| {
        let now = chain.block(&parent).unwrap().header.timestamp + 600;
        let t = chain.assemble_block(&parent, txs, Amount::ZERO, owner_script.clone(), now, tag).unwrap();
        Arc::new(mine_block(t, 0, u64::MAX).unwrap())
    };
    for _ in 0..100 {
        let b = mine_on(&chain, chain.tip(), vec![], 0);
        chain.connect_block(b);
    }
    let pay_to = |tag: &[u8]| {
        let mut tx = Transaction::spend(
            vec![TxInput::unsigned(coin)],
            vec![TxOutput::new(reward_at_height(0), LockingScript::PayToPubKeyHash(hash160(tag)))],
        );
        tx.sign_inputs(&[&[owner]]).unwrap();
        tx
    };
    let base = chain.tip();
    let first = mine_on(&chain, base, vec![pay_to(b"alice")], 1);
    let second = mine_on(&chain, base, vec![pay_to(b"bob")], 2);
    let e1 = chain.connect_block(Arc::clone(&first));
    let e2 = chain.connect_block(Arc::clone(&second));
    ensure!(matches!(e1[0], ChainEvent::ExtendedActiveChain { .. }), "first block: {e1:?}");
    ensure!(matches!(e2[0], ChainEvent::CreatedSideChain { .. }), "second block: {e2:?}");
    ensure!(chain.tip() == first.hash(), "equal-height race did not keep the first-seen tip");
    let extension = mine_on(&chain, second.hash(), vec![], 3);
    let e3 = chain.connect_block(Arc::clone(&extension));
    let expected = ChainEvent::TriggeredReorg {
        old_tip: first.hash(),
        new_tip: extension.hash(),
        rolled_back: vec![first.hash()],
    };
    ensure!(e3 == vec![expected], "extension of the loser: {e3:?}");

    let blocks: Vec<Arc<Block>> = chain.active_blocks().cloned().collect();
    let mut replayed = ChainState::new((*blocks[0]).clone(), ChainParams::default()).unwrap();
    for b in &blocks[1..] {
        replayed.validate_block(b).map_err(|e| format!("replay: {e}"))?;
        replayed.connect_block(Arc::clone(b));
    }
    ensure!(replayed.utxo() == chain.utxo(), "replayed UTXO set differs");
    let mut snapshot: Vec<_> = chain.utxo().iter().map(|(o, e)| (*o, e.clone())).collect();
    snapshot.sort_by_key(|(o, _)| *o);
    let mut again: Vec<_> = replayed.utxo().iter().map(|(o, e)| (*o, e.clone())).collect();
    again.sort_by_key(|(o, _)| *o);
    ensure!(snapshot == again, "snapshots differ");

    let stale = chain.stale_blocks();
    ensure!(stale == vec![first.hash()], "stale set {stale:?}");
    for h in &stale {
        let height = chain.height_of(h).unwrap();
        let rival = chain.active_hash_at(height).ok_or("no active block at the stale height")?;
        ensure!(rival != *h, "stale block is active");
    }
    Ok(format!("reorg depth 1 at height {}, {} UTXOs replayed", chain.height(), snapshot.len()))
}

fn ledger_scripts() -> Result<String, String> {
    let keys: Vec<Scalar> = (21..24).map(Scalar::from_u64).collect();
    let publics: Vec<PublicKey> = keys.iter().map(|k| derive_public_key(k).unwrap()).collect();
    let p2pkh = |k: &PublicKey| LockingScript::PayToPubKeyHash(hash160(&k.to_bytes()));
    let coins = |c: u64| Amount::from_coins(c).unwrap();
    let mut utxo = UtxoSet::new();
    let mut fund = |tag: &str, amount: Amount, script: LockingScript| {
        let o = OutPoint::new(sha256(tag.as_bytes()), 0);
        utxo.insert(o, UtxoEntry { output: TxOutput::new(amount, script), height: 0, is_coinbase: false });
        o
    };
    let locked = fund(
        "locked",
        coins(1),
        LockingScript::HeightLock { unlock_height: 52_560, inner: Box::new(p2pkh(&publics[0])) },
    );
    let multi = fund("multi", coins(1), LockingScript::MultiSig { required: 2, keys: publics.clone() });
    let pizza_funds = fund("pizza", Amount::from_sat(10_000 * COIN + 1_000).unwrap(), p2pkh(&publics[1]));
    let spend = |from: OutPoint, amount: Amount, signers: &[Scalar]| {
        let mut tx = Transaction::spend(vec![TxInput::unsigned(from)], vec![TxOutput::new(amount, p2pkh(&publics[2]))]);
        tx.sign_inputs(&[signers]).unwrap();
        tx
    };

    let lock_tx = spend(locked, coins(1), &keys[..1]);
    ensure!(
        matches!(validate_transaction(&lock_tx, &utxo, 52_559), Err(LedgerError::ImmatureHeightLock { .. })),
        "height lock spendable at 52,559"
    );
    ensure!(validate_transaction(&lock_tx, &utxo, 52_560).is_ok(), "height lock not spendable at 52,560");

    let (mut singles, mut pairs) = (0, 0);
    for mask in 1u32..8 {
        let subset: Vec<Scalar> = (0..3).filter(|i| mask >> i & 1 == 1).map(|i| keys[i]).collect();
        let ok = validate_transaction(&spend(multi, coins(1), &subset), &utxo, 1).is_ok();
        match subset.len() {
            1 => {
                ensure!(!ok, "single signature {mask:03b} accepted");
                singles += 1;
            }
            2 => {
                ensure!(ok, "signature pair {mask:03b} rejected");
                pairs += 1;
            }
            _ => {}
        }
    }
    ensure!((singles, pairs) == (3, 3), "enumerated {singles} singles, {pairs} pairs");

    let pizza = spend(pizza_funds, coins(10_000), &keys[1..2]);
    let fee = validate_transaction(&pizza, &utxo, 57_043).map_err(|e| format!("pizza: {e}"))?;
    ensure!(fee.to_sat() == 1_000, "pizza fee {}", fee.to_sat());
    ensure!(pizza.outputs[0].amount == coins(10_000), "pizza amount");
    Ok("height lock 52,559/52,560; 3 singles rejected, 3 pairs accepted; 10,000-coin payment valid".into())
}

fn notarization() -> Result<String, String> {
    let genesis = make_genesis(GENESIS_MESSAGE.as_bytes()).unwrap();
    let times = "The Times 03/Jan/2009 Chancellor on brink of second bailout for banks";
    ensure!(genesis_message(&genesis) == Some(times.as_bytes()), "genesis message differs");

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("chain.dat");
    write_chain(&path, [&genesis]).map_err(|e| e.to_string())?;
    let payout = GenesisSpec::default().payout;
    let doc = b"Deed of sale, lot 12, signed by both parties.".to_vec();
    let other = b"An unrelated memo".to_vec();
    let mut heights = Vec::new();
    for d in [&other, &doc] {
        let chain = load_chain(&path, ChainParams::default()).map_err(|e| e.to_string())?;
        let now = chain.tip_block().header.timestamp + 600;
        let block = mine_block(notarization_template(&chain, &document_digest(d), payout.clone(), now), 0, u64::MAX)
            .map_err(|e| e.to_string())?;
        append_block(&path, &block).map_err(|e| e.to_string())?;
        heights.push(chain.height() + 1);
    }
    let chain = load_chain(&path, ChainParams::default()).map_err(|e| e.to_string())?;
    let found = locate_document(&chain, &document_digest(&doc)).ok_or("document not found")?;
    ensure!(found.height == heights[1], "found at {} instead of {}", found.height, heights[1]);
    ensure!(found.timestamp == chain.block(&found.block).unwrap().header.timestamp, "timestamp mismatch");
    ensure!(locate_document(&chain, &document_digest(&other)).map(|a| a.height) == Some(heights[0]), "memo");
    for i in 0..doc.len() {
        for delta in [1u8, 0x80] {
            let mut edited = doc.clone();
            edited[i] ^= delta;
            ensure!(locate_document(&chain, &document_digest(&edited)).is_none(), "edit at byte {i} still verifies");
        }
    }
    Ok(format!("found at height {}, every one-byte edit rejected", found.height))
}

#[test]
fn acceptance() {
    let criteria: [(u32, &str, Check, Duration); 13] = [
        (1, "curve constants", curve_constants, Duration::from_secs(1)),
        (2, "emission schedule", emission, Duration::from_secs(1)),
        (3, "post-halving inflation", inflation, Duration::from_secs(1)),
        (4, "hash conformance", hash_conformance, Duration::from_secs(10)),
        (5, "address fixture", address_fixture, Duration::from_secs(10)),
        (6, "retarget", retarget_rules, Duration::from_secs(1)),
        (7, "consensus interval", consensus_interval, Duration::from_secs(60)),
        (8, "proportional lottery", proportional_lottery, Duration::from_secs(60)),
        (9, "sybil resistance", sybil_resistance, Duration::from_secs(60)),
        (10, "double spend", double_spend, Duration::from_secs(300)),
        (11, "fork behavior", fork_behavior, Duration::from_secs(10)),
        (12, "ledger scripts", ledger_scripts, Duration::from_secs(10)),
        (13, "notarization", notarization, Duration::from_secs(10)),
    ];
    let mut failures = Vec::new();
    for (n, name, check, budget) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(_) if elapsed > budget => Err(format!("took {elapsed:.1?}, budget {budget:?}")),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("PASS {n:>2} {name}: {detail} [{elapsed:.2?}]"),
            Err(why) => {
                println!("FAIL {n:>2} {name}: {why} [{elapsed:.2?}]");
                failures.push(n);
            }
        }
    }
    assert!(failures.is_empty(), "failed criteria: {failures:?}");
}

#[test]
fn oracle_sanity() {
    // the walk oracle agrees with the closed form for z = 0 without truncation effects:
    // success iff the attacker ever leads, probability q / (1 - q) for q < 1/2
    let q = 0.3;
    let est = gamblers_ruin(q, 0, 200_000, 3);
    let exact = q / (1.0 - q);
    let se = (exact * (1.0 - exact) / 200_000.0).sqrt();
    assert!((est - exact).abs() < 4.0 * se, "{est} vs {exact}");
}
