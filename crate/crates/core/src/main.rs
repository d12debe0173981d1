use clap::{Args, Parser, Subcommand};
use confboost::ahe::{keygen, KeyFile};
use confboost::boost::cv::{cv_accuracy, DEFAULT_CV_SEED};
use confboost::boost::rlc::INTERCEPT_RANGE;
use confboost::boost::{boost_ds, boost_lmc, boost_rlc, BoostedModel, InvalidPolicy, RlcOptions};
use confboost::encoding::{fold_labels, max_abs, standardize, FixedPointParams};
use confboost::gc::{GarbleMode, OtMode};
use confboost::harness::config::ConfigFile;
use confboost::harness::experiments::{write_report, ExperimentSpec};
use confboost::harness::leakage::DEFAULT_PAIR_SAMPLE;
use confboost::harness::{
    exit, leakage_analysis, run_experiment, schema, synth, BaseKind, DatasetRef, ExperimentKind,
    HarnessError,
};
use confboost::protocol::ds_select::DsSelectConfig;
use confboost::protocol::{
    confidential_ds_select, reconstruct_model, run_learning, transcript_report, Construction,
    ProtocolConfig, TransportKind,
};
use confboost::Dataset;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "confboost", version, about = "Confidential boosting with two non-colluding servers")]
struct Cli {
    /// TOML file mirroring the command-line flags; flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a Paillier key pair.
    Keygen(KeygenArgs),
    /// Train with the two-party protocol.
    Train(TrainArgs),
    /// Train in the clear (reference and baselines).
    TrainPlain(PlainArgs),
    /// Confidential decision-stump selection.
    DsSelect(DsArgs),
    /// Write a synthetic dataset as CSV.
    Synth(SynthArgs),
    /// Characterization-vector leakage analysis.
    Leakage(LeakageArgs),
    /// Run an experiment and write its JSON and CSV reports.
    Bench(BenchArgs),
    /// Validate a JSON report against its bundled schema.
    Report(ReportArgs),
}

#[derive(Args)]
struct DataArgs {
    /// Bundled name (ionosphere, credit), "synthetic", or a CSV path.
    #[arg(long)]
    dataset: Option<String>,
    /// Label column of a CSV: "last", a 0-based index or a header name.
    #[arg(long)]
    label_column: Option<String>,
    /// CSV label value that maps to +1.
    #[arg(long)]
    positive: Option<String>,
}

#[derive(Args)]
struct KeygenArgs {
    #[arg(long)]
    key_bits: Option<u32>,
    /// Use 2048-bit keys.
    #[arg(long)]
    full_keys: bool,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    construction: Option<Construction>,
    #[arg(long)]
    tau: Option<usize>,
    #[arg(long)]
    pmax: Option<usize>,
    /// Fractional bits of the fixed-point encoding.
    #[arg(long)]
    bits: Option<u32>,
    #[arg(long)]
    ring_bits: Option<u32>,
    #[arg(long)]
    key_bits: Option<u32>,
    /// Use 2048-bit keys.
    #[arg(long)]
    full_keys: bool,
    #[arg(long)]
    sigma: Option<u32>,
    #[arg(long)]
    seed_cloud: Option<u64>,
    #[arg(long)]
    seed_csp: Option<u64>,
    #[arg(long)]
    seed_data: Option<u64>,
    /// base or dealer (dealer needs --insecure).
    #[arg(long)]
    ot: Option<String>,
    /// half-gates or four-row.
    #[arg(long)]
    garble: Option<String>,
    /// Discard invalid classifiers instead of negating them.
    #[arg(long)]
    reject_invalid: bool,
    /// Compute all E(Z)w before the first round (HE+GC).
    #[arg(long)]
    offline: bool,
    /// Allow test-only shortcuts such as dealer OT.
    #[arg(long)]
    insecure: bool,
    /// inproc or tcp.
    #[arg(long)]
    transport: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Where to write the cost report.
    #[arg(long)]
    transcript: Option<PathBuf>,
}

#[derive(Args)]
struct PlainArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    base: Option<BaseKind>,
    #[arg(long)]
    tau: Option<usize>,
    #[arg(long)]
    pmax: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Score RLCs in a fixed-point ring with this many fractional bits.
    #[arg(long)]
    bits: Option<u32>,
    #[arg(long)]
    reject_invalid: bool,
    /// Report k-fold CV accuracy instead of training once.
    #[arg(long)]
    cv: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DsArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    bins: Option<usize>,
    #[arg(long)]
    tau: Option<usize>,
    #[arg(long)]
    bits: Option<u32>,
    #[arg(long)]
    key_bits: Option<u32>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// 150000 records instead of the desk-scale 10000.
    #[arg(long)]
    full_scale: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LeakageArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    pair_sample: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    data: DataArgs,
    /// cv-accuracy, convergence, precision-sweep, cost-scaling, leakage or
    /// baseline-compare.
    #[arg(long)]
    experiment: Option<ExperimentKind>,
    #[arg(long)]
    base: Option<BaseKind>,
    #[arg(long)]
    tau: Option<usize>,
    #[arg(long)]
    pmax: Option<usize>,
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated record counts for cost scaling.
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    /// Comma-separated bit counts for the precision sweep.
    #[arg(long, value_delimiter = ',')]
    bit_list: Option<Vec<u32>>,
    /// Comma-separated checkpoints for convergence.
    #[arg(long, value_delimiter = ',')]
    taus: Option<Vec<usize>>,
    #[arg(long)]
    key_bits: Option<u32>,
    /// Output prefix; writes PREFIX.json and PREFIX.csv.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// JSON file to check.
    #[arg(long)]
    input: PathBuf,
    /// model, transcript, experiment or leakage.
    #[arg(long)]
    schema: String,
}

struct Ctx {
    file: ConfigFile,
}

impl Ctx {
    fn pick<T: serde::de::DeserializeOwned>(&self, cmd: &str, key: &str, flag: Option<T>) -> Result<Option<T>, HarnessError> {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.file.get(cmd, key),
        }
    }

    fn parsed<T: std::str::FromStr>(&self, cmd: &str, key: &str, flag: Option<T>) -> Result<Option<T>, HarnessError>
    where
        T::Err: std::fmt::Display,
    {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.file.get_parsed(cmd, key),
        }
    }

    fn switch(&self, cmd: &str, key: &str, flag: bool) -> Result<bool, HarnessError> {
        Ok(flag || self.file.get::<bool>(cmd, key)?.unwrap_or(false))
    }

    fn dataset(&self, cmd: &str, a: &DataArgs) -> Result<DatasetRef, HarnessError> {
        let name = self
            .pick(cmd, "dataset", a.dataset.clone())?
            .ok_or_else(|| HarnessError::Config("--dataset is required".into()))?;
        let mut r = DatasetRef::parse(&name);
        if let DatasetRef::Csv { label, positive, .. } = &mut r {
            if let Some(l) = self.pick(cmd, "label-column", a.label_column.clone())? {
                *label = l;
            }
            *positive = self.pick(cmd, "positive", a.positive.clone())?;
        }
        Ok(r)
    }
}

fn write_json<T: Serialize>(value: &T, path: Option<&Path>) -> Result<(), HarnessError> {
    let s = serde_json::to_string_pretty(value).expect("serializable") + "\n";
    match path {
        Some(p) => std::fs::write(p, s).map_err(|e| HarnessError::Io(format!("{}: {e}", p.display()))),
        None => {
            print!("{s}");
            Ok(())
        }
    }
}

fn key_bits(ctx: &Ctx, cmd: &str, flag: Option<u32>, full: bool) -> Result<u32, HarnessError> {
    if ctx.switch(cmd, "full-keys", full)? {
        return Ok(2048);
    }
    Ok(ctx
        .pick(cmd, "key-bits", flag)?
        .unwrap_or(ProtocolConfig::DEFAULT_KEY_BITS))
}

fn folded(d: &Dataset) -> Result<(confboost::Matrix<f64>, confboost::encoding::Standardizer), HarnessError> {
    let (x, s) = standardize(&d.features)?;
    Ok((fold_labels(&x, &d.labels)?, s))
}

fn cmd_keygen(ctx: &Ctx, a: KeygenArgs) -> Result<(), HarnessError> {
    let bits = key_bits(ctx, "keygen", a.key_bits, a.full_keys)?;
    let mut rng = match ctx.pick("keygen", "seed", a.seed)? {
        Some(s) => ChaCha20Rng::seed_from_u64(s),
        None => ChaCha20Rng::from_entropy(),
    };
    let kp = keygen(bits, &mut rng).map_err(|e| HarnessError::Config(e.to_string()))?;
    let out: Option<PathBuf> = ctx.pick("keygen", "out", a.out)?;
    write_json(&KeyFile::from_pair(&kp), out.as_deref())
}

fn protocol_config(ctx: &Ctx, a: &TrainArgs) -> Result<ProtocolConfig, HarnessError> {
    let c = "train";
    let construction = ctx
        .parsed(c, "construction", a.construction)?
        .unwrap_or(Construction::HeGc);
    let tau = ctx.pick(c, "tau", a.tau)?.unwrap_or(20);
    let mut cfg = ProtocolConfig::new(construction, tau);
    if let Some(p) = ctx.pick(c, "pmax", a.pmax)? {
        cfg.p_max = p;
    }
    if let Some(b) = ctx.pick(c, "bits", a.bits)? {
        cfg.frac_bits = b;
    }
    cfg.ring_bits = ctx.pick(c, "ring-bits", a.ring_bits)?;
    cfg.key_bits = key_bits(ctx, c, a.key_bits, a.full_keys)?;
    if let Some(s) = ctx.pick(c, "sigma", a.sigma)? {
        cfg.sigma = s;
    }
    if let Some(s) = ctx.pick(c, "seed-cloud", a.seed_cloud)? {
        cfg.seeds.cloud = s;
    }
    if let Some(s) = ctx.pick(c, "seed-csp", a.seed_csp)? {
        cfg.seeds.csp = s;
    }
    if let Some(s) = ctx.pick(c, "seed-data", a.seed_data)? {
        cfg.seeds.data = s;
    }
    cfg.ot_mode = match ctx.pick(c, "ot", a.ot.clone())?.as_deref() {
        None | Some("base") => OtMode::BaseOt,
        Some("dealer") => OtMode::TrustedDealer,
        Some(o) => return Err(HarnessError::Config(format!("unknown OT mode {o:?}"))),
    };
    cfg.garble_mode = match ctx.pick(c, "garble", a.garble.clone())?.as_deref() {
        None | Some("half-gates") => GarbleMode::HalfGates,
        Some("four-row") => GarbleMode::FourRow,
        Some(g) => return Err(HarnessError::Config(format!("unknown garbling mode {g:?}"))),
    };
    if ctx.switch(c, "reject-invalid", a.reject_invalid)? {
        cfg.policy = InvalidPolicy::Reject;
    }
    cfg.offline_precompute = ctx.switch(c, "offline", a.offline)?;
    cfg.secure_profile = !ctx.switch(c, "insecure", a.insecure)?;
    Ok(cfg)
}

fn cmd_train(ctx: &Ctx, a: TrainArgs) -> Result<(), HarnessError> {
    let cfg = protocol_config(ctx, &a)?;
    let transport = match ctx.pick("train", "transport", a.transport.clone())?.as_deref() {
        None | Some("inproc") => TransportKind::InProcess,
        Some("tcp") => TransportKind::Tcp,
        Some(t) => return Err(HarnessError::Config(format!("unknown transport {t:?}"))),
    };
    let data = ctx.dataset("train", &a.data)?.load()?;
    let (z, stdz) = folded(&data)?;
    let out = run_learning(&cfg, &z, transport)?;
    let mut model = reconstruct_model(&out.model, out.fixed_point)?;
    model.standardizer = Some(stdz);
    let raw_acc = data
        .features
        .iter_rows()
        .zip(&data.labels)
        .filter(|(r, &y)| model.predict_raw(r) == y)
        .count() as f64
        / data.n() as f64;
    log::info!(
        "{}: accepted {} of {} tried, training accuracy {:.4}",
        cfg.construction.name(),
        out.model.len(),
        out.p_used,
        raw_acc
    );
    if let Some(p) = ctx.pick("train", "transcript", a.transcript.clone())? {
        write_json(&transcript_report(&out.transcript), Some(&p))?;
    }
    let path: Option<PathBuf> = ctx.pick("train", "out", a.out)?;
    write_json(&model, path.as_deref())
}

fn cmd_train_plain(ctx: &Ctx, a: PlainArgs) -> Result<(), HarnessError> {
    let c = "train-plain";
    let base = ctx.parsed(c, "base", a.base)?.unwrap_or(BaseKind::Rlc);
    let tau = ctx.pick(c, "tau", a.tau)?.unwrap_or(200);
    let seed = ctx.pick(c, "seed", a.seed)?.unwrap_or(1);
    let bits: Option<u32> = ctx.pick(c, "bits", a.bits)?;
    let mut opts = RlcOptions::new(tau);
    if let Some(p) = ctx.pick(c, "pmax", a.pmax)? {
        opts.p_max = p;
    }
    if ctx.switch(c, "reject-invalid", a.reject_invalid)? {
        opts.policy = InvalidPolicy::Reject;
    }
    let data = ctx.dataset(c, &a.data)?.load()?;
    let train = |x: &confboost::Matrix<f64>, y: &[i8]| -> Result<BoostedModel, confboost::boost::BoostError> {
        match base {
            BaseKind::Rlc => {
                let z = fold_labels(x, y)?;
                let mut o = opts;
                if let Some(b) = bits {
                    o.quantize = Some(FixedPointParams::for_products(b, z.cols(), max_abs(&z), INTERCEPT_RANGE)?);
                }
                let out = boost_rlc(&z, &o, seed)?;
                log::debug!("accepted {} of {} tried", out.model.len(), out.p_used);
                Ok(out.model)
            }
            BaseKind::Ds => boost_ds(x, y, tau),
            BaseKind::Lmc => boost_lmc(x, y, tau),
        }
    };
    if let Some(folds) = ctx.pick(c, "cv", a.cv)? {
        let r = cv_accuracy(&data, folds, DEFAULT_CV_SEED, |s| train(s.x, s.y))?;
        let path: Option<PathBuf> = ctx.pick(c, "out", a.out)?;
        return write_json(&r, path.as_deref());
    }
    let (x, s) = standardize(&data.features)?;
    let mut model = train(&x, &data.labels)?;
    model.standardizer = Some(s);
    let path: Option<PathBuf> = ctx.pick(c, "out", a.out)?;
    write_json(&model, path.as_deref())
}

fn cmd_ds(ctx: &Ctx, a: DsArgs) -> Result<(), HarnessError> {
    let c = "ds-select";
    let mut pc = ProtocolConfig::new(Construction::HeGc, 1);
    pc.key_bits = ctx.pick(c, "key-bits", a.key_bits)?.unwrap_or(pc.key_bits);
    if let Some(b) = ctx.pick(c, "bits", a.bits)? {
        pc.frac_bits = b;
    }
    if let Some(s) = ctx.pick(c, "seed", a.seed)? {
        pc.seeds.cloud = s;
        pc.seeds.csp = s.wrapping_add(1);
        pc.seeds.data = s.wrapping_add(2);
    }
    let cfg = DsSelectConfig {
        protocol: pc,
        bins: ctx.pick(c, "bins", a.bins)?.unwrap_or(16),
        rounds: ctx.pick(c, "tau", a.tau)?.unwrap_or(10),
    };
    let data = ctx.dataset(c, &a.data)?.load()?;
    let (x, s) = standardize(&data.features)?;
    let out = confidential_ds_select(&cfg, &x, &data.labels, TransportKind::InProcess)?;
    let mut model = out.model.reconstruct();
    model.standardizer = Some(s);
    let path: Option<PathBuf> = ctx.pick(c, "out", a.out)?;
    write_json(&model, path.as_deref())
}

fn cmd_synth(ctx: &Ctx, a: SynthArgs) -> Result<(), HarnessError> {
    let c = "synth";
    let full = ctx.switch(c, "full-scale", a.full_scale)?;
    let n = ctx
        .pick(c, "n", a.n)?
        .unwrap_or(if full { 150_000 } else { 10_000 });
    let k = ctx.pick(c, "k", a.k)?.unwrap_or(10);
    let seed = ctx.pick(c, "seed", a.seed)?.unwrap_or(7);
    let d = synth::gen_synthetic(n, k, seed)?;
    let out: PathBuf = ctx
        .pick(c, "out", a.out)?
        .ok_or_else(|| HarnessError::Config("--out is required".into()))?;
    synth::write_csv(&d, &out)
}

fn cmd_leakage(ctx: &Ctx, a: LeakageArgs) -> Result<(), HarnessError> {
    let c = "leakage";
    let data = ctx.dataset(c, &a.data)?.load()?;
    let r = leakage_analysis(
        &data,
        ctx.pick(c, "p", a.p)?.unwrap_or(200),
        ctx.pick(c, "seed", a.seed)?.unwrap_or(1),
        ctx.pick(c, "pair-sample", a.pair_sample)?
            .unwrap_or(DEFAULT_PAIR_SAMPLE),
    )?;
    let path: Option<PathBuf> = ctx.pick(c, "out", a.out)?;
    write_json(&r, path.as_deref())
}

fn cmd_bench(ctx: &Ctx, a: BenchArgs) -> Result<(), HarnessError> {
    let c = "bench";
    let kind = ctx
        .parsed(c, "experiment", a.experiment)?
        .ok_or_else(|| HarnessError::Config("--experiment is required".into()))?;
    let mut spec = ExperimentSpec::new(kind, ctx.dataset(c, &a.data)?);
    if let Some(b) = ctx.parsed(c, "base", a.base)? {
        spec.base = b;
    }
    if let Some(t) = ctx.pick(c, "tau", a.tau)? {
        spec.tau = t;
    }
    spec.p_max = ctx.pick(c, "pmax", a.pmax)?;
    if let Some(f) = ctx.pick(c, "folds", a.folds)? {
        spec.folds = f;
    }
    if let Some(s) = ctx.pick(c, "seed", a.seed)? {
        spec.seed = s;
    }
    if let Some(v) = ctx.pick(c, "sizes", a.sizes)? {
        spec.sizes = v;
    }
    if let Some(v) = ctx.pick(c, "bit-list", a.bit_list)? {
        spec.bits = v;
    }
    if let Some(v) = ctx.pick(c, "taus", a.taus)? {
        spec.taus = v;
    }
    if let Some(k) = ctx.pick(c, "key-bits", a.key_bits)? {
        spec.protocol.key_bits = k;
    }
    let out: Option<PathBuf> = ctx.pick(c, "out", a.out)?;
    let report = run_experiment(&spec)?;
    match out {
        Some(p) => write_report(&report, &p),
        None => write_json(&report, None),
    }
}

fn cmd_report(a: ReportArgs) -> Result<(), HarnessError> {
    let text = std::fs::read_to_string(&a.input)
        .map_err(|e| HarnessError::Io(format!("{}: {e}", a.input.display())))?;
    let doc: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| HarnessError::Schema(e.to_string()))?;
    let s = match a.schema.as_str() {
        "model" => schema::MODEL,
        "transcript" => schema::TRANSCRIPT_REPORT,
        "experiment" => schema::EXPERIMENT_REPORT,
        "leakage" => schema::LEAKAGE_REPORT,
        other => return Err(HarnessError::Config(format!("unknown schema {other:?}"))),
    };
    schema::validate(s, &doc)?;
    println!("{}: valid {} report", a.input.display(), a.schema);
    Ok(())
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    let file = match &cli.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let ctx = Ctx { file };
    match cli.cmd {
        Cmd::Keygen(a) => cmd_keygen(&ctx, a),
        Cmd::Train(a) => cmd_train(&ctx, a),
        Cmd::TrainPlain(a) => cmd_train_plain(&ctx, a),
        Cmd::DsSelect(a) => cmd_ds(&ctx, a),
        Cmd::Synth(a) => cmd_synth(&ctx, a),
        Cmd::Leakage(a) => cmd_leakage(&ctx, a),
        Cmd::Bench(a) => cmd_bench(&ctx, a),
        Cmd::Report(a) => cmd_report(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("CONFBOOST_LOG", "info")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { exit::CONFIG } else { exit::OK };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::from(exit::OK as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
