use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use nakamoto_core::consensus::{
    append_block, genesis_message, load_chain, make_genesis_with, mine_block, write_chain, ChainParams, GenesisSpec,
    Target, GENESIS_MESSAGE,
};
use nakamoto_core::ecc::{
    derive_address, derive_public_key, generate_private_key, sign, verify, Address, PublicKey, Scalar, Signature,
    DEFAULT_VERSION,
};
use nakamoto_core::hashing::{double_sha256, hash160, merkle_root, Digest256};
use nakamoto_core::ledger::{
    annualized_issuance, cumulative_supply, reward_at_height, LockingScript, HALVING_INTERVAL, LAST_EPOCH,
};
use nakamoto_core::netsim::{double_spend_experiment, load_scenario, run_simulation, NetsimError};
use nakamoto_core::notary::{document_digest, locate_document, notarization_template};
use nakamoto_core::u256::U256;

#[derive(Parser)]
#[command(name = "nakamoto", version, about = "Keys, desk-scale mining, emission tables and network simulation")]
struct Cli {
    /// Seed for every randomized step; the same seed gives the same output.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for output files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format; `schedule` defaults to csv, everything else to json.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a private key, its public key and address.
    Keygen,
    /// Address of a public key (65-byte uncompressed hex) or of a private key.
    Address {
        #[arg(long, conflicts_with = "private_key", required_unless_present = "private_key")]
        public_key: Option<String>,
        #[arg(long)]
        private_key: Option<String>,
        #[arg(long, default_value_t = DEFAULT_VERSION)]
        version: u8,
    },
    /// Sign the double SHA-256 of a message or file.
    Sign {
        #[arg(long)]
        private_key: String,
        #[command(flatten)]
        input: MessageInput,
    },
    /// Check a signature over the double SHA-256 of a message or file.
    Verify {
        #[arg(long)]
        public_key: String,
        #[arg(long)]
        signature: String,
        #[command(flatten)]
        input: MessageInput,
    },
    /// Merkle root of txids given as hex, in order.
    Merkle {
        #[arg(required = true)]
        txids: Vec<String>,
    },
    /// Subsidy per halving epoch with cumulative supply and annual issuance.
    Schedule {
        #[arg(long, default_value_t = LAST_EPOCH + 1)]
        max_epochs: u64,
    },
    /// Mine blocks onto a chain file, creating it with a genesis block if absent.
    Mine {
        #[arg(long)]
        chain: PathBuf,
        #[arg(long, default_value_t = 1)]
        count: u64,
        /// Leading zero bits required of a new chain's genesis target.
        #[arg(long, default_value_t = 8)]
        difficulty: u32,
        /// Genesis message for a new chain.
        #[arg(long, default_value = GENESIS_MESSAGE)]
        message: String,
        /// Base58Check address receiving the block rewards.
        #[arg(long)]
        address: Option<String>,
    },
    /// Run a scenario file; writes metrics.json, blocks.csv and events.csv.
    Simulate { scenario: PathBuf },
    /// Monte Carlo success rate of the withholding double spend.
    Attack {
        #[arg(long)]
        q: f64,
        #[arg(long)]
        z: u64,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
    },
    /// Mine a block committing to a file's digest, or with --verify find that block.
    Notarize {
        file: PathBuf,
        #[arg(long)]
        chain: PathBuf,
        #[arg(long)]
        verify: bool,
    },
}

#[derive(clap::Args)]
#[group(required = true, multiple = false)]
struct MessageInput {
    #[arg(long)]
    message: Option<String>,
    #[arg(long)]
    file: Option<PathBuf>,
}

struct CliError {
    kind: &'static str,
    message: String,
}

fn fail(kind: &'static str, message: impl ToString) -> CliError {
    CliError { kind, message: message.to_string() }
}

enum Output {
    One(Map<String, Value>),
    Many(Vec<Map<String, Value>>),
}

fn object(value: Value) -> Map<String, Value> {
    match value {
        Value::Object(m) => m,
        _ => unreachable!("rows are objects"),
    }
}

fn render(output: &Output, format: Format) -> String {
    match format {
        Format::Json => {
            let value = match output {
                Output::One(m) => Value::Object(m.clone()),
                Output::Many(rows) => Value::Array(rows.iter().cloned().map(Value::Object).collect()),
            };
            serde_json::to_string_pretty(&value).expect("json") + "\n"
        }
        Format::Csv => {
            let rows: Vec<&Map<String, Value>> = match output {
                Output::One(m) => vec![m],
                Output::Many(rows) => rows.iter().collect(),
            };
            let mut w = csv::Writer::from_writer(Vec::new());
            if let Some(first) = rows.first() {
                w.write_record(first.keys()).expect("in-memory write");
            }
            for row in rows {
                w.write_record(row.values().map(|v| match v {
                    Value::String(s) => s.clone(),
                    Value::Null => String::new(),
                    other => other.to_string(),
                }))
                .expect("in-memory write");
            }
            String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
        }
    }
}

fn decode_hex(what: &'static str, text: &str) -> Result<Vec<u8>, CliError> {
    hex::decode(text.trim()).map_err(|e| fail("BadHex", format!("{what}: {e}")))
}

fn parse_private_key(text: &str) -> Result<Scalar, CliError> {
    let bytes: [u8; 32] = decode_hex("private key", text)?
        .try_into()
        .map_err(|v: Vec<u8>| fail("BadKey", format!("private key must be 32 bytes, got {}", v.len())))?;
    let k = Scalar::from_canonical(U256::from_be_bytes(&bytes)).ok_or_else(|| fail("BadKey", "private key >= n"))?;
    if k.is_zero() {
        return Err(fail("ZeroKey", "private key is zero"));
    }
    Ok(k)
}

fn parse_public_key(text: &str) -> Result<PublicKey, CliError> {
    PublicKey::from_bytes(&decode_hex("public key", text)?).map_err(|e| fail("BadKey", e))
}

fn read_input(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| fail("FileUnreadable", format!("{}: {e}", path.display())))
}

fn message_bytes(input: &MessageInput) -> Result<Vec<u8>, CliError> {
    match (&input.message, &input.file) {
        (Some(m), _) => Ok(m.as_bytes().to_vec()),
        (None, Some(path)) => read_input(path),
        (None, None) => Err(fail("Usage", "give --message or --file")),
    }
}

fn key_triple(secret: &Scalar) -> Result<Output, CliError> {
    let public = derive_public_key(secret).map_err(|e| fail("ZeroKey", e))?;
    Ok(Output::One(object(json!({
        "private_key": hex::encode(secret.to_be_bytes()),
        "public_key": public.to_hex(),
        "address": derive_address(&public, DEFAULT_VERSION).to_string(),
    }))))
}

fn cmd_keygen(seed: Option<u64>) -> Result<Output, CliError> {
    let mut rng = match seed {
        Some(s) => ChaCha8Rng::seed_from_u64(s),
        None => ChaCha8Rng::from_rng(&mut rand::rng()),
    };
    let mut last = None;
    // a zero key has probability about 2^-256; draw once more before giving up
    for _ in 0..2 {
        match generate_private_key(&rng.random()) {
            Ok(k) => return key_triple(&k),
            Err(e) => last = Some(e),
        }
    }
    Err(fail("ZeroKey", last.expect("loop ran")))
}

fn cmd_address(public_key: Option<String>, private_key: Option<String>, version: u8) -> Result<Output, CliError> {
    let key = match (public_key, private_key) {
        (Some(p), _) => parse_public_key(&p)?,
        (None, Some(s)) => derive_public_key(&parse_private_key(&s)?).map_err(|e| fail("ZeroKey", e))?,
        (None, None) => return Err(fail("Usage", "give --public-key or --private-key")),
    };
    let address = derive_address(&key, version);
    Ok(Output::One(object(json!({
        "address": address.to_string(),
        "version": version,
        "hash160": address.payload.to_hex(),
    }))))
}

fn cmd_sign(private_key: &str, input: &MessageInput) -> Result<Output, CliError> {
    let secret = parse_private_key(private_key)?;
    let digest = double_sha256(&message_bytes(input)?);
    let sig = sign(&secret, &digest).map_err(|e| fail("SignFailed", e))?;
    let public = derive_public_key(&secret).map_err(|e| fail("ZeroKey", e))?;
    Ok(Output::One(object(json!({
        "digest": digest.to_hex(),
        "signature": sig.to_hex(),
        "public_key": public.to_hex(),
    }))))
}

fn cmd_verify(public_key: &str, signature: &str, input: &MessageInput) -> Result<Output, CliError> {
    let key = parse_public_key(public_key)?;
    let sig = Signature::from_bytes(&decode_hex("signature", signature)?).map_err(|e| fail("BadSignature", e))?;
    let digest = double_sha256(&message_bytes(input)?);
    if !verify(&key, &digest, &sig) {
        return Err(fail("BadSignature", format!("signature does not verify over digest {digest}")));
    }
    Ok(Output::One(object(json!({ "valid": true, "digest": digest.to_hex() }))))
}

fn cmd_merkle(txids: &[String]) -> Result<Output, CliError> {
    let leaves = txids
        .iter()
        .map(|t| Digest256::from_hex(t.trim()).map_err(|e| fail("BadHex", e)))
        .collect::<Result<Vec<_>, _>>()?;
    let root = merkle_root(&leaves).map_err(|e| fail("EmptyTree", e))?;
    Ok(Output::One(object(json!({ "leaves": leaves.len(), "root": root.to_hex() }))))
}

fn cmd_schedule(max_epochs: u64) -> Result<Output, CliError> {
    let rows = (0..max_epochs.min(LAST_EPOCH + 1))
        .map(|epoch| {
            let start = epoch * HALVING_INTERVAL;
            let issuance = annualized_issuance(epoch)
                .map(|r| Value::from(nakamoto_core::netsim::round_sig(r.as_f64())))
                .unwrap_or(Value::Null);
            object(json!({
                "epoch": epoch,
                "start_height": start,
                "reward_sat": reward_at_height(start).to_sat(),
                "cumulative_supply_sat": cumulative_supply(start + HALVING_INTERVAL).to_sat(),
                "annualized_issuance": issuance,
            }))
        })
        .collect();
    Ok(Output::Many(rows))
}

fn payout_script(address: Option<&str>) -> Result<LockingScript, CliError> {
    match address {
        Some(text) => {
            let a: Address = text.parse().map_err(|e| fail("BadAddress", e))?;
            Ok(LockingScript::PayToPubKeyHash(a.payload))
        }
        None => Ok(LockingScript::PayToPubKeyHash(hash160(b"nakamoto cli miner"))),
    }
}

/// Writes a genesis block to `chain` when the file does not exist yet.
fn ensure_chain(chain: &Path, message: &str, difficulty: u32, payout: &LockingScript) -> Result<bool, CliError> {
    if chain.exists() {
        return Ok(false);
    }
    let target = Target::from_leading_zero_bits(difficulty)
        .ok_or_else(|| fail("BadDifficulty", format!("{difficulty} bits leaves no valid hash")))?;
    let spec = GenesisSpec { payout: payout.clone(), target, ..GenesisSpec::default() };
    let genesis = make_genesis_with(message.as_bytes(), &spec).map_err(|e| fail("BadGenesis", e))?;
    write_chain(chain, [&genesis]).map_err(|e| fail("ChainFile", e))?;
    Ok(true)
}

fn cmd_mine(
    chain_path: &Path,
    count: u64,
    difficulty: u32,
    message: &str,
    address: Option<&str>,
) -> Result<Output, CliError> {
    let payout = payout_script(address)?;
    let created = ensure_chain(chain_path, message, difficulty, &payout)?;
    let mut chain = load_chain(chain_path, ChainParams::default()).map_err(|e| fail("ChainFile", e))?;
    let mut rows = Vec::new();
    if created {
        let g = chain.tip_block();
        rows.push(object(json!({
            "height": 0,
            "hash": g.hash().to_hex(),
            "attempts": g.header.nonce + 1,
            "message": genesis_message(g).map(|m| String::from_utf8_lossy(m).into_owned()),
        })));
    }
    for _ in 0..count {
        let scheduled = chain.scheduled_target(&chain.tip()).map_err(|e| fail("Rejected", e))?;
        if created && scheduled != Target::from_leading_zero_bits(difficulty).expect("checked") {
            return Err(fail("Rejected", "scheduled target changed"));
        }
        let now = chain.tip_block().header.timestamp + 600;
        let template = chain.build_template(&[], payout.clone(), now);
        let block = mine_block(template, 0, u64::MAX).map_err(|e| fail("Exhausted", e))?;
        chain.validate_block(&block).map_err(|e| fail("Rejected", e))?;
        append_block(chain_path, &block).map_err(|e| fail("ChainFile", e))?;
        rows.push(object(json!({
            "height": chain.height() + 1,
            "hash": block.hash().to_hex(),
            "attempts": block.header.nonce + 1,
            "message": null,
        })));
        chain.connect_block(block);
    }
    Ok(Output::Many(rows))
}

fn netsim_error(e: NetsimError) -> CliError {
    match e {
        NetsimError::BadScenario { .. } | NetsimError::InvalidConfig { .. } => fail("BadScenario", e),
        NetsimError::InvalidFraction(_) => fail("InvalidFraction", e),
        NetsimError::CannotConnect { .. } => fail("CannotConnect", e),
    }
}

fn cmd_simulate(scenario: &Path, seed: Option<u64>, out: &Path) -> Result<Output, CliError> {
    let mut config = load_scenario(scenario).map_err(netsim_error)?;
    if let Some(s) = seed {
        config.rng_seed = s;
    }
    let output = run_simulation(&config).map_err(netsim_error)?;
    output.write_to(out).map_err(|e| fail("OutputUnwritable", format!("{}: {e}", out.display())))?;
    let mut metrics = object(serde_json::to_value(&output.metrics).expect("metrics serialize"));
    metrics.insert("output_dir".into(), Value::from(out.display().to_string()));
    Ok(Output::One(metrics))
}

fn cmd_attack(q: f64, z: u64, trials: u64, seed: Option<u64>) -> Result<Output, CliError> {
    let seed = seed.unwrap_or(0);
    let frequency = double_spend_experiment(q, z, trials, seed).map_err(netsim_error)?;
    Ok(Output::One(object(json!({
        "q": q,
        "z": z,
        "trials": trials,
        "seed": seed,
        "success_frequency": frequency,
    }))))
}

fn cmd_notarize(file: &Path, chain_path: &Path, check: bool) -> Result<Output, CliError> {
    let digest = document_digest(&read_input(file)?);
    if check {
        let chain = load_chain(chain_path, ChainParams::default()).map_err(|e| fail("ChainFile", e))?;
        let found = locate_document(&chain, &digest)
            .ok_or_else(|| fail("NotFound", format!("digest {digest} is not in {}", chain_path.display())))?;
        return Ok(Output::One(object(json!({
            "digest": digest.to_hex(),
            "height": found.height,
            "timestamp": found.timestamp,
            "block": found.block.to_hex(),
        }))));
    }
    let payout = payout_script(None)?;
    ensure_chain(chain_path, GENESIS_MESSAGE, 8, &payout)?;
    let chain = load_chain(chain_path, ChainParams::default()).map_err(|e| fail("ChainFile", e))?;
    let now = chain.tip_block().header.timestamp + 600;
    let block = mine_block(notarization_template(&chain, &digest, payout, now), 0, u64::MAX)
        .map_err(|e| fail("Exhausted", e))?;
    chain.validate_block(&block).map_err(|e| fail("Rejected", e))?;
    append_block(chain_path, &block).map_err(|e| fail("ChainFile", e))?;
    Ok(Output::One(object(json!({
        "digest": digest.to_hex(),
        "height": chain.height() + 1,
        "timestamp": block.header.timestamp,
        "block": block.hash().to_hex(),
    }))))
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Keygen => "keygen",
        Command::Address { .. } => "address",
        Command::Sign { .. } => "sign",
        Command::Verify { .. } => "verify",
        Command::Merkle { .. } => "merkle",
        Command::Schedule { .. } => "schedule",
        Command::Mine { .. } => "mine",
        Command::Simulate { .. } => "simulate",
        Command::Attack { .. } => "attack",
        Command::Notarize { .. } => "notarize",
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let default_format = if matches!(cli.command, Command::Schedule { .. }) { Format::Csv } else { Format::Json };
    let format = cli.format.unwrap_or(default_format);
    let output = match &cli.command {
        Command::Keygen => cmd_keygen(cli.seed)?,
        Command::Address { public_key, private_key, version } => {
            cmd_address(public_key.clone(), private_key.clone(), *version)?
        }
        Command::Sign { private_key, input } => cmd_sign(private_key, input)?,
        Command::Verify { public_key, signature, input } => cmd_verify(public_key, signature, input)?,
        Command::Merkle { txids } => cmd_merkle(txids)?,
        Command::Schedule { max_epochs } => cmd_schedule(*max_epochs)?,
        Command::Mine { chain, count, difficulty, message, address } => {
            cmd_mine(chain, *count, *difficulty, message, address.as_deref())?
        }
        Command::Simulate { scenario } => {
            let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
            cmd_simulate(scenario, cli.seed, &out)?
        }
        Command::Attack { q, z, trials } => cmd_attack(*q, *z, *trials, cli.seed)?,
        Command::Notarize { file, chain, verify } => cmd_notarize(file, chain, *verify)?,
    };
    let text = render(&output, format);
    match (&cli.out, &cli.command) {
        (Some(dir), c) if !matches!(c, Command::Simulate { .. }) => {
            let ext = if format == Format::Csv { "csv" } else { "json" };
            let path = dir.join(format!("{}.{ext}", command_name(c)));
            fs::create_dir_all(dir)
                .and_then(|_| fs::write(&path, &text))
                .map_err(|e| fail("OutputUnwritable", format!("{}: {e}", path.display())))?;
        }
        _ => print!("{text}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}: {}", e.kind, e.message.replace('\n', " "));
            ExitCode::FAILURE
        }
    }
}
