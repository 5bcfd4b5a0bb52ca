mod files;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use mlrelax::linearization::{flower_skeleton, mccormick_from_flower, LinError, Linearization};
use mlrelax::model::{Hypergraph, VarKey, VarSet};
use mlrelax::relax::{enumerate_flowers, separate_flower, ExtendedFlower, FlowerKind, RelaxError, DEFAULT_CENTER_GUARD};
use mlrelax::verify::{self, sampler, CheckReport, Relaxation, VerifyError};
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Verify(#[from] VerifyError),
    #[error(transparent)]
    Lin(#[from] LinError),
    #[error(transparent)]
    Relax(#[from] RelaxError),
}

#[derive(Parser)]
#[command(name = "mlrelax", version, about = "Exact linear relaxations of multilinear sets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// LP bound of an instance under a relaxation.
    Bound {
        instance: PathBuf,
        #[arg(long, value_enum, default_value = "standard")]
        relaxation: RelaxationArg,
        /// Use the relaxations of these linearization files instead.
        #[arg(long = "lin", conflicts_with = "relaxation")]
        lin: Vec<PathBuf>,
        #[arg(long)]
        max_neighbors: Option<usize>,
        /// Round limit for the cutting-plane and dynamic loops.
        #[arg(long, default_value_t = 1000)]
        max_iters: usize,
    },
    /// Machine-check a structural result.
    Check {
        #[command(subcommand)]
        which: CheckCommand,
    },
    /// McCormick linearization certifying a flower inequality.
    Construct {
        instance: PathBuf,
        #[arg(long, value_name = "1,2,...")]
        center: String,
        #[arg(long = "neighbor", value_name = "1,2,...", required = true)]
        neighbors: Vec<String>,
        /// Also write Graphviz output here.
        #[arg(long)]
        dot: Option<PathBuf>,
        /// Drop redundant neighbors instead of rejecting the flower.
        #[arg(long)]
        minimalize: bool,
    },
    /// List non-redundant extended flowers centered at edges.
    Flowers {
        instance: PathBuf,
        #[arg(long)]
        max_neighbors: Option<usize>,
        #[arg(long)]
        count_only: bool,
    },
    /// Most violated extended flower inequality at a point.
    Separate {
        instance: PathBuf,
        point: PathBuf,
        #[arg(long)]
        max_neighbors: Option<usize>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum RelaxationArg {
    Standard,
    Flower,
    CuttingPlane,
    Dynamic,
}

#[derive(Subcommand)]
enum CheckCommand {
    /// Eliminating an edge variable from FR gives FR of the smaller hypergraph.
    LemmaProjection {
        /// Instances whose hypergraphs are checked (every edge unless --edge).
        instances: Vec<PathBuf>,
        #[arg(long, value_name = "1,2,...")]
        edge: Option<String>,
        #[command(flatten)]
        random: RandomArgs,
    },
    /// LP validity of z_I <= z_J matches reachability.
    LemmaPath {
        linearizations: Vec<PathBuf>,
        #[command(flatten)]
        random: RandomArgs,
    },
    /// FR equals the intersection of projected McCormick relaxations.
    Theorem {
        instances: Vec<PathBuf>,
        /// Extra linearizations (of the first instance's hypergraph).
        #[arg(long = "lin")]
        lin: Vec<PathBuf>,
        /// Random extra linearizations per hypergraph.
        #[arg(long, default_value_t = 0)]
        extras: usize,
        #[command(flatten)]
        random: RandomArgs,
    },
    /// The two restriction propositions.
    Fig3,
}

#[derive(clap::Args)]
struct RandomArgs {
    /// Seed for sampled hypergraphs and linearizations.
    #[arg(long, env = "MLRELAX_SEED", default_value_t = 0)]
    seed: u64,
    /// Number of sampled hypergraphs (or linearizations) to check in addition to the files.
    #[arg(long, default_value_t = 0)]
    samples: usize,
}

/// A JSON document with the format tag in front.
#[derive(Serialize)]
struct Tagged<T: Serialize> {
    format: u32,
    #[serde(flatten)]
    body: T,
}

fn print<T: Serialize>(body: T) {
    use std::io::Write;
    let doc = Tagged { format: 1, body };
    let text = serde_json::to_string_pretty(&doc).expect("reports serialize");
    // A closed pipe (e.g. `| head`) is not an error worth a panic.
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

const SAMPLE_CONFIG: sampler::SamplerConfig = sampler::SamplerConfig::new(3, 5, 4);

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Bound { instance, relaxation, lin, max_neighbors, max_iters } => {
            let inst = files::load_instance(&instance)?;
            let report = if !lin.is_empty() {
                let mut systems = Vec::new();
                for path in &lin {
                    let (d, g, _) = files::load_linearization(path)?;
                    check_same_graph(path, &g, inst.hypergraph())?;
                    systems.push(d.relaxation_system());
                }
                verify::bound_static(&inst, &Relaxation::Systems(systems))?
            } else {
                match relaxation {
                    RelaxationArg::Standard => verify::bound_static(&inst, &Relaxation::Standard)?,
                    RelaxationArg::Flower => verify::bound_static(&inst, &Relaxation::Flower(max_neighbors))?,
                    RelaxationArg::CuttingPlane => verify::bound_cutting_plane(&inst, max_neighbors, max_iters)?,
                    RelaxationArg::Dynamic => verify::bound_dynamic_linearization(&inst, max_neighbors, max_iters)?,
                }
            };
            print(report);
            Ok(ExitCode::SUCCESS)
        }
        Command::Check { which } => {
            let reports = run_check(which)?;
            let holds = reports.iter().all(|r| r.holds);
            print(json!({ "holds": holds, "reports": reports }));
            Ok(if holds { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Construct { instance, center, neighbors, dot, minimalize } => {
            let inst = files::load_instance(&instance)?;
            let g = inst.hypergraph();
            let center = VarKey::from_set(files::parse_set(&center)?);
            let neighbors = neighbors.iter().map(|n| files::parse_set(n).map(VarKey::from_set)).collect::<Result<Vec<_>, _>>()?;
            let mut f = ExtendedFlower::new(center, neighbors)?;
            f.check_in(g)?;
            if minimalize {
                f = f.minimalize();
            }
            let d = match mccormick_from_flower(g, &f) {
                Ok(d) => d,
                Err(LinError::RedundantFlower { flower, neighbor }) => {
                    let owners: Vec<serde_json::Value> = (0..f.k())
                        .map(|i| json!({ "neighbor": f.neighbors()[i].members(), "exclusive": f.exclusive_elements(i) }))
                        .collect();
                    print(json!({
                        "error": "redundant_flower",
                        "flower": flower,
                        "redundant_neighbor": neighbor.members(),
                        "exclusive_cover": owners,
                    }));
                    return Ok(ExitCode::from(1));
                }
                Err(e) => return Err(e.into()),
            };
            if let Some(path) = dot {
                std::fs::write(&path, d.to_dot()).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            }
            let skeleton = flower_skeleton(&f)?;
            let class = d.classify(g);
            let l_sets: Vec<&[u32]> = skeleton.l_sets.iter().map(VarSet::members).collect();
            print(json!({
                "flower": f,
                "l_sets": l_sets,
                "class": class,
                "linearization": d.to_file(Some(g)),
            }));
            Ok(ExitCode::SUCCESS)
        }
        Command::Flowers { instance, max_neighbors, count_only } => {
            let inst = files::load_instance(&instance)?;
            let flowers = enumerate_flowers(inst.hypergraph(), max_neighbors);
            let with_edge = flowers.iter().filter(|(f, _)| f.neighbors().iter().any(|n| !n.is_singleton())).count();
            let proper = flowers.iter().filter(|(_, k)| *k == FlowerKind::Flower).count();
            let mut doc = json!({
                "count": flowers.len(),
                "with_edge_neighbor": with_edge,
                "all_singleton": flowers.len() - with_edge,
                "flower_kind": proper,
                "extended_only_kind": flowers.len() - proper,
            });
            if !count_only {
                let list: Vec<&ExtendedFlower> = flowers.iter().map(|(f, _)| f).collect();
                doc["flowers"] = serde_json::to_value(list).expect("flowers serialize");
            }
            print(doc);
            Ok(ExitCode::SUCCESS)
        }
        Command::Separate { instance, point, max_neighbors } => {
            let inst = files::load_instance(&instance)?;
            let point = files::load_point(&point)?;
            match separate_flower(inst.hypergraph(), &point, max_neighbors, DEFAULT_CENTER_GUARD)? {
                None => {
                    print(json!({ "result": "none" }));
                    Ok(ExitCode::SUCCESS)
                }
                Some(sep) => {
                    print(json!({ "result": "violated", "separation": sep }));
                    Ok(ExitCode::from(1))
                }
            }
        }
    }
}

fn check_same_graph(path: &std::path::Path, lin_graph: &Hypergraph, g: &Hypergraph) -> Result<(), CliError> {
    let d_ok = lin_graph == g;
    if !d_ok {
        return Err(CliError::Input(format!(
            "{}: linearization is for edges {:?}, the instance has {:?}",
            path.display(),
            lin_graph.to_raw(),
            g.to_raw()
        )));
    }
    Ok(())
}

fn run_check(which: CheckCommand) -> Result<Vec<CheckReport>, CliError> {
    let mut reports = Vec::new();
    match which {
        CheckCommand::LemmaProjection { instances, edge, random } => {
            let edge = edge.as_deref().map(files::parse_set).transpose()?;
            let mut graphs: Vec<Hypergraph> =
                instances.iter().map(|p| files::load_instance(p).map(|i| i.hypergraph().clone())).collect::<Result<_, _>>()?;
            let mut rng = sampler::rng(random.seed);
            graphs.extend((0..random.samples).map(|_| sampler::random_hypergraph(&mut rng, SAMPLE_CONFIG)));
            if graphs.is_empty() {
                return Err(CliError::Input("give an instance or --samples".into()));
            }
            for g in &graphs {
                match &edge {
                    Some(e) => reports.push(verify::check_projection_lemma(g, e)?),
                    None => {
                        for e in g.edges() {
                            reports.push(verify::check_projection_lemma(g, e)?);
                        }
                    }
                }
            }
        }
        CheckCommand::LemmaPath { linearizations, random } => {
            let mut ds: Vec<Linearization> =
                linearizations.iter().map(|p| files::load_linearization(p).map(|(d, _, _)| d)).collect::<Result<_, _>>()?;
            let mut rng = sampler::rng(random.seed);
            while ds.len() < linearizations.len() + random.samples {
                let g = sampler::random_hypergraph(&mut rng, sampler::SamplerConfig::new(3, 5, 3));
                let d = sampler::random_linearization(&mut rng, &g);
                if d.num_nodes() <= 12 {
                    ds.push(d);
                }
            }
            if ds.is_empty() {
                return Err(CliError::Input("give a linearization or --samples".into()));
            }
            for d in &ds {
                reports.push(verify::check_path_lemma(d)?);
            }
        }
        CheckCommand::Theorem { instances, lin, extras, random } => {
            let graphs: Vec<Hypergraph> =
                instances.iter().map(|p| files::load_instance(p).map(|i| i.hypergraph().clone())).collect::<Result<_, _>>()?;
            let mut rng = sampler::rng(random.seed);
            let mut jobs: Vec<(Hypergraph, Vec<Linearization>)> = Vec::new();
            for (i, g) in graphs.into_iter().enumerate() {
                let mut extra = Vec::new();
                if i == 0 {
                    for path in &lin {
                        let (d, lg, _) = files::load_linearization(path)?;
                        check_same_graph(path, &lg, &g)?;
                        extra.push(d);
                    }
                }
                jobs.push((g, extra));
            }
            if !lin.is_empty() && jobs.is_empty() {
                return Err(CliError::Input("--lin needs an instance".into()));
            }
            jobs.extend((0..random.samples).map(|_| (sampler::random_hypergraph(&mut rng, SAMPLE_CONFIG), Vec::new())));
            if jobs.is_empty() {
                return Err(CliError::Input("give an instance or --samples".into()));
            }
            for (g, mut extra) in jobs {
                extra.extend((0..extras).map(|_| sampler::random_linearization(&mut rng, &g)));
                reports.push(verify::check_theorem(&g, &extra)?);
            }
        }
        CheckCommand::Fig3 => reports.push(verify::check_fig3_propositions()?),
    }
    Ok(reports)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
