mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use config::RunConfig;
use report::{envelope, hex_digest, CliError};

#[derive(Parser, Debug)]
#[command(name = "meandim", version, about = "Covering dimension, mean dimension and embedding checks in exact arithmetic")]
pub struct Cli {
    /// Seed for every randomized step
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Write the report here instead of standard output
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Plain-text key=value configuration
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Include wall time in the report
    #[arg(long, global = true)]
    pub timing: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Finite covers of finite sets
    #[command(subcommand)]
    Cover(CoverOp),
    /// Abstract and geometric simplicial complexes
    #[command(subcommand)]
    Complex(ComplexOp),
    /// Box covers of the unit cube
    #[command(subcommand)]
    Cube(CubeOp),
    /// Staged block subshifts
    #[command(subcommand)]
    Blocksys(BlocksysOp),
    /// Finite permutation systems and periodic dimension
    #[command(subcommand)]
    Dynsys(DynsysOp),
    /// Embedding toolkit
    #[command(subcommand)]
    Embed(EmbedOp),
    /// Run the acceptance suite
    Verify(VerifyArgs),
}

#[derive(Subcommand, Debug)]
pub enum CoverOp {
    /// Order of a cover, or the order at one point
    Order {
        file: PathBuf,
        #[arg(long)]
        point: Option<String>,
    },
    /// Largest member diameter under the ground metric
    Mesh { file: PathBuf },
    /// Common refinement of two covers
    Join { a: PathBuf, b: PathBuf },
    /// Whether BETA refines ALPHA
    Refines { beta: PathBuf, alpha: PathBuf },
    /// Pull a cover back along a map given as {"domain": [...], "f": {p: q}}
    Pullback { cover: PathBuf, map: PathBuf },
    /// Merge GAMMA's members along PHI ({"V": "U", ...}) into a refinement of ALPHA
    Merge { alpha: PathBuf, gamma: PathBuf, phi: PathBuf },
    /// Smallest order found among refinements
    DUpper {
        file: PathBuf,
        #[arg(long)]
        budget: Option<usize>,
        #[arg(long, default_value = "assignments")]
        generator: String,
    },
}

#[derive(Subcommand, Debug)]
pub enum ComplexOp {
    /// Dimension and face counts
    Dim { file: PathBuf },
    /// Nerve of a cover file
    Nerve { cover: PathBuf },
    /// Star cover; with --eps, subdivide until stars are finer than eps
    Stars {
        file: PathBuf,
        #[arg(long)]
        eps: Option<String>,
    },
    /// Barycentric subdivision
    Subdivide {
        file: PathBuf,
        #[arg(long, default_value_t = 1)]
        times: usize,
    },
    /// Largest edge length
    Mesh { file: PathBuf },
}

#[derive(Subcommand, Debug)]
pub enum CubeOp {
    /// Exact order by cell enumeration
    Order {
        file: PathBuf,
        #[arg(long, default_value = "closed")]
        semantics: String,
    },
    /// Check that no box meets opposite faces
    FaceCheck { file: PathBuf },
    /// Brick cover of order n with mesh at most eps
    Brick {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        eps: String,
    },
    /// Fixed-point-free retraction measurement; the punctured square without FILE
    LebesgueWitness {
        file: Option<PathBuf>,
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Smallest order over grid-cell covers
    Exhaustive {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        grid: usize,
        #[arg(long)]
        max_sets: usize,
    },
}

#[derive(Subcommand, Debug)]
pub enum BlocksysOp {
    /// Build stages for target mean dimension r
    Build {
        #[arg(long)]
        r: String,
        #[arg(long, default_value_t = 5)]
        stages: usize,
        #[arg(long, default_value_t = 2)]
        alphabet: usize,
    },
    /// Lower and upper bounds of a built system
    Bounds {
        file: PathBuf,
        /// Comma-separated k values for the upper bound
        #[arg(long, default_value = "1,10,100")]
        k: String,
        #[arg(long, default_value_t = 1)]
        power: u64,
    },
    /// Sample pairs and look for close shifts
    Probe {
        file: PathBuf,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        n: Option<usize>,
    },
}

#[derive(Subcommand, Debug)]
pub enum DynsysOp {
    /// Random system with the given cycle lengths
    Random {
        #[arg(long)]
        lengths: String,
    },
    /// Find an n-marker, or test the given one
    Marker {
        file: PathBuf,
        #[arg(long)]
        n: usize,
        /// Comma-separated point ids to test instead of searching
        #[arg(long)]
        set: Option<String>,
    },
    /// Build the tower function and check its defect set
    Rokhlin {
        file: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        marker: Option<String>,
        #[arg(long)]
        u: Option<String>,
        /// Use a linear ramp stop rate on U instead of the indicator of F
        #[arg(long)]
        ramp: bool,
    },
    /// Periodic dimension of a descriptor
    Perdim {
        file: PathBuf,
        #[arg(long, default_value_t = 12)]
        k_max: usize,
        #[arg(long)]
        power: Option<usize>,
    },
    /// 2n+1 indices keeping two orbits apart
    Indices {
        #[arg(long)]
        n: usize,
        #[arg(long, allow_hyphen_values = true)]
        offset: Option<i64>,
        #[arg(long)]
        period: Option<u64>,
    },
}

#[derive(Subcommand, Debug)]
pub enum EmbedOp {
    /// General position test, optionally after perturbation
    GeneralPosition {
        file: PathBuf,
        #[arg(long)]
        perturb: Option<String>,
    },
    /// Window map and first separating index of pairs
    Window {
        file: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        lo: i64,
        #[arg(long, allow_hyphen_values = true)]
        hi: i64,
    },
    /// Epsilon-injective map; the 200-point fixture without FILE
    Menger { file: Option<PathBuf> },
    /// Sampled and symbolic determinant checks of a pattern
    PatternTest {
        file: Option<PathBuf>,
        /// Random pattern of this size instead of FILE
        #[arg(long)]
        random: Option<usize>,
        #[arg(long)]
        affine: bool,
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Partition-of-unity map builder
    Pou {
        file: PathBuf,
        #[arg(long)]
        lemma: String,
        #[arg(long)]
        s: Option<usize>,
        #[arg(long)]
        l: Option<usize>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value = "1/4,1/2,3/4,1")]
        lambdas: String,
    },
    /// Anchor index for a sequence on [-3M/2, M/2-1]
    N1Find {
        #[arg(long)]
        m: usize,
        /// Comma-separated values, 2M of them
        #[arg(long, allow_hyphen_values = true)]
        values: String,
    },
    /// Equivariant map of the sphere with the equator reflection
    SphereDemo {
        #[arg(long)]
        samples: Option<usize>,
    },
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Comma-separated criterion ids
    #[arg(long)]
    pub only: Option<String>,
}

/// Shared state for one run: configuration, seed and the bytes read so far.
pub struct Ctx {
    pub config: RunConfig,
    pub seed_flag: Option<u64>,
    pub inputs: Vec<Vec<u8>>,
}

impl Ctx {
    pub fn seed(&self) -> Result<u64, CliError> {
        self.config.num("seed", self.seed_flag, 0)
    }
}

fn command_name(c: &Command) -> String {
    let dbg = format!("{c:?}");
    let mut words = dbg.split(|ch: char| !ch.is_alphanumeric()).filter(|w| !w.is_empty());
    let group = words.next().unwrap_or_default().to_lowercase();
    match c {
        Command::Verify(_) => group,
        _ => {
            let op = words.next().unwrap_or_default();
            let mut kebab = String::new();
            for (i, ch) in op.chars().enumerate() {
                if ch.is_uppercase() && i > 0 {
                    kebab.push('-');
                }
                kebab.push(ch.to_ascii_lowercase());
            }
            format!("{group} {kebab}")
        }
    }
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<(), CliError> {
    match out {
        Some(p) => std::fs::write(p, format!("{text}\n")).map_err(|e| CliError::io(&p.display().to_string(), e)),
        None => {
            use std::io::Write;
            match writeln!(std::io::stdout().lock(), "{text}") {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::io("<stdout>", e)),
                _ => Ok(()),
            }
        }
    }
}

fn fail(command: &str, e: &CliError) -> ExitCode {
    println!("{}", serde_json::to_string_pretty(&e.to_json(command)).expect("json"));
    eprintln!("meandim: {}: {}", e.kind, e.message);
    ExitCode::from(1)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("usage error").trim_start_matches("error: ").to_string();
            eprint!("{msg}");
            let err = CliError::usage(first);
            println!("{}", serde_json::to_string_pretty(&err.to_json("")).expect("json"));
            return ExitCode::from(1);
        }
    };
    let name = command_name(&cli.command);
    let config = match &cli.config {
        None => RunConfig::default(),
        Some(p) => {
            let shown = p.display().to_string();
            let text = match std::fs::read_to_string(p) {
                Ok(t) => t,
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => return fail(&name, &CliError::not_found(&shown)),
                Err(e) => return fail(&name, &CliError::io(&shown, e)),
            };
            match RunConfig::parse(&text, &shown) {
                Ok(c) => c,
                Err(e) => return fail(&name, &e),
            }
        }
    };
    let timing = match config.flag("timing", cli.timing) {
        Ok(t) => t,
        Err(e) => return fail(&name, &e),
    };
    let out = cli.out.clone().or_else(|| config.get("out").map(PathBuf::from));
    let mut ctx = Ctx { config, seed_flag: cli.seed, inputs: vec![std::env::args().skip(1).collect::<Vec<_>>().join("\0").into_bytes()] };
    let start = Instant::now();
    let outcome = match commands::run(&cli.command, &mut ctx) {
        Ok(o) => o,
        Err(e) => return fail(&name, &e),
    };
    let elapsed = timing.then(|| start.elapsed().as_secs_f64());
    let report = envelope(&name, &hex_digest(&ctx.inputs), &outcome, elapsed);
    let text = serde_json::to_string_pretty(&report).expect("json");
    if let Err(e) = emit(&text, out.as_ref()) {
        return fail(&name, &e);
    }
    if outcome.passed() {
        ExitCode::SUCCESS
    } else {
        for (n, ok) in &outcome.assertions {
            if !ok {
                eprintln!("meandim: assertion failed: {n}");
            }
        }
        ExitCode::from(2)
    }
}
