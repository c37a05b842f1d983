mod system;

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fractdim::boxdim::{self, DEFAULT_EXTRA_DEPTH};
use fractdim::dims::{self, DimOptions, McOptions, OptimizeOptions};
use fractdim::numeric::{classify_pisot_salem, IntPoly};
use fractdim::overlap::{self, DEFAULT_AWSC_EPS, DEFAULT_CAP};
use fractdim::projent::{self, Mode, ProjentOptions};
use fractdim::sponge::{self, SpongeOptions, SpongeSpec};
use fractdim::{fmt12, Error};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "fractdim", version, about = "Dimension theory of iterated function systems with exact overlaps")]
struct Cli {
    /// Worker threads (default: available cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// System description (TOML).
    #[arg(long)]
    system: PathBuf,
    /// Output directory for the report and CSV artifacts.
    #[arg(long, default_value = "fractdim-out")]
    out: PathBuf,
    /// Cap on candidate maps per enumeration level.
    #[arg(long, default_value_t = DEFAULT_CAP)]
    cap: u128,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Auto,
    Exact,
    Anchored,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Auto => Mode::Auto,
            ModeArg::Exact => Mode::Exact,
            ModeArg::Anchored => Mode::Anchored,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Projection entropy h_pi from grid-partition entropies.
    Entropy {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "uniform")]
        measure: String,
        #[arg(long, default_value_t = 12)]
        levels: usize,
        #[arg(long, value_enum, default_value = "auto")]
        mode: ModeArg,
    },
    /// Distinct maps N_n, overlap multiplicity t_n and the AWSC verdict.
    Overlap {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 10)]
        levels: usize,
        #[arg(long, default_value_t = DEFAULT_AWSC_EPS)]
        eps: f64,
    },
    /// Certified box counts and the box-counting dimension.
    Boxdim {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 8)]
        levels: usize,
    },
    /// Dimension of the projected measure.
    Dim {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "uniform")]
        measure: String,
        #[arg(long, default_value_t = 12)]
        levels: usize,
        #[arg(long, value_enum, default_value = "auto")]
        mode: ModeArg,
        /// Always compute projection entropies, even under a verified open set condition.
        #[arg(long)]
        no_closed_form: bool,
    },
    /// Monte Carlo local dimension.
    Localdim {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "uniform")]
        measure: String,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 256)]
        points: usize,
        #[arg(long, default_value_t = 4)]
        k_min: u32,
        #[arg(long, default_value_t = 12)]
        k_max: u32,
    },
    /// Hausdorff and box dimensions of a self-affine sponge.
    Sponge {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 6)]
        levels: usize,
        #[arg(long, default_value_t = 1)]
        z_level: usize,
    },
    /// Maximize dimension over Bernoulli measures on blocks.
    Optimize {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        block: usize,
        #[arg(long, default_value_t = 4)]
        starts: usize,
        #[arg(long, default_value_t = 2000)]
        iters: u64,
    },
    /// Pisot / Salem test for a monic integer polynomial.
    Classify {
        /// Comma-separated coefficients, highest degree first.
        #[arg(long, allow_hyphen_values = true)]
        poly: String,
        /// Read the coefficients constant term first.
        #[arg(long)]
        constant_first: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Occupancy raster (binary PGM) of a 2-D attractor.
    Render {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 6)]
        level: usize,
    },
}

#[derive(Debug)]
enum CliError {
    Core(Error),
    Io(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_resource() => 3,
            _ => 2,
        }
    }
}

type Res<T> = Result<T, CliError>;

/// Rounds every float to 12 significant digits.
fn round_json(v: &mut serde_json::Value) {
    match v {
        serde_json::Value::Number(n) if n.is_f64() => {
            if let Some(x) = n.as_f64().and_then(|x| fmt12(x).parse::<f64>().ok()) {
                if let Some(r) = serde_json::Number::from_f64(x) {
                    *n = r;
                }
            }
        }
        serde_json::Value::Array(a) => a.iter_mut().for_each(round_json),
        serde_json::Value::Object(o) => o.values_mut().for_each(round_json),
        _ => {}
    }
}

#[derive(Serialize)]
struct Report<'a, T: Serialize> {
    command: &'a str,
    result: &'a T,
}

struct Output {
    dir: PathBuf,
}

impl Output {
    fn new(dir: &Path) -> Res<Self> {
        fs::create_dir_all(dir)?;
        Ok(Output { dir: dir.to_path_buf() })
    }

    fn file(&self, name: &str) -> Res<BufWriter<File>> {
        Ok(BufWriter::new(File::create(self.dir.join(name))?))
    }

    fn report<T: Serialize>(&self, command: &str, result: &T, summary: &str) -> Res<()> {
        let mut v = serde_json::to_value(Report { command, result }).map_err(|e| CliError::Io(e.to_string()))?;
        round_json(&mut v);
        let mut text = serde_json::to_string_pretty(&v).map_err(|e| CliError::Io(e.to_string()))?;
        text.push('\n');
        fs::write(self.dir.join("report.json"), text)?;
        fs::write(self.dir.join("summary.txt"), summary)?;
        print!("{summary}");
        Ok(())
    }
}

fn bracket(v: f64, lo: f64, hi: f64) -> String {
    format!("{} [{}, {}]", fmt12(v), fmt12(lo), fmt12(hi))
}

fn run(cmd: Command) -> Res<()> {
    match cmd {
        Command::Entropy {
            common,
            measure,
            levels,
            mode,
        } => {
            let spec = system::load_system(&common.system)?;
            let m = system::parse_measure(&measure, spec.alphabet())?;
            let opts = ProjentOptions {
                mode: mode.into(),
                cap: common.cap,
                ..Default::default()
            };
            let pe = projent::projection_entropy(&spec, &m, levels, &opts)?;
            let out = Output::new(&common.out)?;
            projent::write_levels_csv(&pe, out.file("levels.csv")?)?;
            let e = &pe.estimate;
            let mut s = format!(
                "h_pi {} ({}, levels {}..{})\nshift entropy {}\n",
                bracket(e.value, e.lower, e.upper),
                e.method,
                pe.n1,
                pe.n2,
                fmt12(m.shift_entropy())
            );
            if let Some(n) = &pe.note {
                s += &format!("note: {n}\n");
            }
            out.report("entropy", &pe, &s)
        }
        Command::Overlap { common, levels, eps } => {
            let spec = system::load_system(&common.system)?;
            let p = overlap::awsc_diagnostic(&spec, levels, eps, common.cap)?;
            let out = Output::new(&common.out)?;
            overlap::write_profile_csv(&p, out.file("profile.csv")?)?;
            let mut s = String::from("n  N_n  t_n(interior)  t_n(touch)\n");
            for r in &p.rows {
                s += &format!("{}  {}  {}  {}\n", r.n, r.distinct, r.t_interior, r.t_touch);
            }
            s += &format!("growth rate {} (eps {}): {}\n", fmt12(p.growth_rate), fmt12(p.eps), p.verdict);
            out.report("overlap", &p, &s)
        }
        Command::Boxdim { common, levels } => {
            let spec = system::load_system(&common.system)?;
            let bd = boxdim::box_dimension_with(&spec, levels, DEFAULT_EXTRA_DEPTH, common.cap)?;
            let out = Output::new(&common.out)?;
            boxdim::write_counts_csv(&bd, out.file("counts.csv")?)?;
            let mut s = String::from("n  lower  upper\n");
            for c in &bd.counts {
                s += &format!("{}  {}  {}\n", c.level, c.lower, c.upper);
            }
            s += &format!(
                "box dimension {} (fit from level {})\n",
                bracket(bd.value, bd.lower, bd.upper),
                bd.fit_from
            );
            out.report("boxdim", &bd, &s)
        }
        Command::Dim {
            common,
            measure,
            levels,
            mode,
            no_closed_form,
        } => {
            let spec = system::load_system(&common.system)?;
            let m = system::parse_measure(&measure, spec.alphabet())?;
            let opts = DimOptions {
                projent: ProjentOptions {
                    mode: mode.into(),
                    cap: common.cap,
                    ..Default::default()
                },
                levels,
                closed_form: !no_closed_form,
            };
            let r = dims::dim_product(&spec, &m, &opts)?;
            let out = Output::new(&common.out)?;
            let s = r.summary();
            out.report("dim", &r, &s)
        }
        Command::Localdim {
            common,
            measure,
            seed,
            samples,
            points,
            k_min,
            k_max,
        } => {
            let spec = system::load_system(&common.system)?;
            let m = system::parse_measure(&measure, spec.alphabet())?;
            let opts = McOptions {
                samples,
                points,
                k_min,
                k_max,
                seed,
            };
            let ld = dims::local_dimension_mc(&spec, &m, &opts)?;
            let out = Output::new(&common.out)?;
            dims::write_slopes_csv(&ld, out.file("slopes.csv")?)?;
            let mut s = format!(
                "local dimension {} +- {} (std error {}, {} points, {} samples, seed {})\n",
                fmt12(ld.mean),
                fmt12(ld.std),
                fmt12(ld.stderr),
                ld.slopes.len(),
                ld.samples,
                ld.seed
            );
            if !ld.dropped.is_empty() {
                s += &format!("radii exponents dropped for too few samples: {:?}\n", ld.dropped);
            }
            out.report("localdim", &ld, &s)
        }
        Command::Sponge {
            common,
            levels,
            z_level,
        } => {
            let spec = system::load_system(&common.system)?;
            let (sp, order) = SpongeSpec::from_ifs(&spec)?;
            let opts = SpongeOptions {
                cap: common.cap,
                z_level,
                ..Default::default()
            };
            let r = sponge::sponge_dimensions(&sp, levels, &opts)?;
            let chain = sponge::build_theta_chain(&sp, z_level, common.cap)?;
            let zt = sponge::z_recursion(&chain, &sp);
            let out = Output::new(&common.out)?;
            sponge::write_weights_csv(&chain, &r.weights, out.file("weights.csv")?)?;
            sponge::write_z_csv(&chain, &zt, out.file("z.csv")?)?;
            let verdicts: Vec<String> = r.awsc.iter().map(|v| v.to_string()).collect();
            let s = format!(
                "factor order {:?}\ndim_H {} (weight measure), upper bound {} (Z_0 at level {}){}\ndim_B {}\nAWSC per prefix: {}\n",
                order,
                bracket(r.dim_h, r.dim_h_lower, r.dim_h_upper_bracket),
                fmt12(r.z_bound),
                r.z_level,
                if r.collapsed { ", bounds agree" } else { "" },
                fmt12(r.dim_b),
                verdicts.join(", ")
            );
            out.report("sponge", &r, &s)
        }
        Command::Optimize {
            common,
            seed,
            block,
            starts,
            iters,
        } => {
            let spec = system::load_system(&common.system)?;
            let mut opts = OptimizeOptions::with_seed(seed);
            opts.block = block;
            opts.starts = starts;
            opts.max_iters = iters;
            opts.dim.projent.cap = common.cap;
            let r = dims::variational_optimize(&spec, &opts)?;
            let out = Output::new(&common.out)?;
            dims::write_trace_csv(&r, out.file("trace.csv")?)?;
            write_class_weights(&r, out.file("weights.csv")?)?;
            let mut s = format!("best dimension {}\n", fmt12(r.value));
            for (c, w) in r.classes.iter().zip(&r.weights) {
                s += &format!("  {c}: {}\n", fmt12(*w));
            }
            if r.budget_exhausted {
                s += "iteration budget exhausted; value is the best found\n";
            }
            out.report("optimize", &r, &s)
        }
        Command::Classify {
            poly,
            constant_first,
            out,
        } => {
            let p = IntPoly::parse(&poly)?;
            let p = if constant_first {
                p
            } else {
                IntPoly::new(p.coeffs().iter().rev().cloned().collect())
            };
            let c = classify_pisot_salem(&p)?;
            let s = format!(
                "{}\npolynomial (constant first) {}\ndominant root in [{}, {}] ~ {}\n",
                c.class,
                p,
                c.dominant_lo,
                c.dominant_hi,
                fmt12(c.dominant_approx)
            );
            match out {
                Some(dir) => Output::new(&dir)?.report("classify", &c, &s),
                None => {
                    print!("{s}");
                    Ok(())
                }
            }
        }
        Command::Render { common, level } => {
            let spec = system::load_system(&common.system)?;
            if spec.dim() != 2 {
                return Err(Error::Unsupported("render needs a 2-D system".into()).into());
            }
            let (exps, _) = boxdim::almost_cube_exponents(&spec, level);
            let cells = boxdim::count_cells(&spec, &exps, DEFAULT_EXTRA_DEPTH, common.cap)?;
            let out = Output::new(&common.out)?;
            boxdim::write_pgm(&cells, out.file("occupancy.pgm")?)?;
            #[derive(Serialize)]
            struct RenderInfo {
                level: usize,
                exponents: Vec<usize>,
                lower: usize,
                upper: usize,
            }
            let info = RenderInfo {
                level,
                exponents: exps,
                lower: cells.lower.len(),
                upper: cells.upper.len(),
            };
            let s = format!(
                "occupancy.pgm: {} certified cells, {} covered cells\n",
                info.lower, info.upper
            );
            out.report("render", &info, &s)
        }
    }
}

fn write_class_weights<W: std::io::Write>(r: &dims::OptimizeResult, out: W) -> Res<()> {
    let mut w = csv_writer(out);
    w.write_record(["class", "weight"]).map_err(|e| CliError::Io(e.to_string()))?;
    for (c, p) in r.classes.iter().zip(&r.weights) {
        w.write_record([c.as_str(), &fmt12(*p)]).map_err(|e| CliError::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

fn csv_writer<W: std::io::Write>(out: W) -> csv::Writer<W> {
    csv::Writer::from_writer(out)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 64 } else { 0 });
        }
    };
    if let Some(t) = cli.threads {
        if t == 0 || rayon::ThreadPoolBuilder::new().num_threads(t).build_global().is_err() {
            eprintln!("error: invalid thread count {t}");
            return ExitCode::from(64);
        }
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Core(err) => eprintln!("error: {err}"),
                CliError::Io(msg) => eprintln!("error: {msg}"),
            }
            ExitCode::from(e.code())
        }
    }
}
