//! Command-line front end for the subflip workbench. Every subcommand is
//! a thin shim over the library; outputs reuse the module text formats
//! verbatim and identical inputs yield byte-identical outputs.

use std::collections::BTreeMap;
use std::fs;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use subflip::graph::{gen, pattern_order, Graph, PatternKind, VertexSet};
use subflip::io;
use subflip::logic::{
    classify, ep_normal_form, evaluate, mso_collapse, nep_check, parse_formula, render,
    NEPInstance,
};
use subflip::rank::{
    bound_f, flat_witness, rank_with_limits, sc_depth_with_cap, FlatnessQuery, FlipMode, Radius,
    RankLimits, RankQuery,
};
use subflip::sparsify::{
    build_transductions, cover_sparsify, decompose, p_cover_check, recover, recover_covered,
    sparsify, CoverFamily,
};
use subflip::transduction::apply;
use subflip::verify::{run_all, run_criterion, VerifyConfig, CRITERIA};
use subflip::Partition;

#[derive(Parser)]
#[command(name = "subflip", version, about = "flips, subflips, and existential positive transductions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Flip,
    Subflip,
}

impl From<ModeArg> for FlipMode {
    fn from(m: ModeArg) -> FlipMode {
        match m {
            ModeArg::Flip => FlipMode::Flip,
            ModeArg::Subflip => FlipMode::Subflip,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a stock graph and print it in the graph text format.
    Gen {
        /// clique | independent | path | cycle | co-matching | half-graph |
        /// biclique | star-crossing | clique-crossing
        kind: String,
        /// Order t (or n); crossings take the radius first: `r t`.
        params: Vec<usize>,
        /// Add a self-loop on every vertex.
        #[arg(long)]
        reflexive: bool,
        /// Print crossing layers as trailing comment lines.
        #[arg(long)]
        layers: bool,
    },
    /// Largest order of a semi-induced pattern in the graph.
    Param {
        #[arg(long)]
        graph: String,
        #[arg(long)]
        kind: String,
    },
    /// Print the subflip G ⊖ P.
    Subflip {
        #[arg(long)]
        graph: String,
        #[arg(long)]
        partition: String,
    },
    /// Print the flip G ⊕ (P,F) for an explicit relation.
    Flip {
        #[arg(long)]
        graph: String,
        #[arg(long)]
        partition: String,
        /// Comma-separated part pairs, e.g. `0 1,1 1`.
        #[arg(long)]
        pairs: String,
    },
    /// Refine a partition so subflips approximate every flip of it.
    Transfer {
        #[arg(long)]
        graph: String,
        #[arg(long)]
        partition: String,
        #[arg(long)]
        t: usize,
        /// Also enumerate flips and verify the distance guarantee.
        #[arg(long)]
        verify: bool,
    },
    /// Exact flipper/subflipper rank.
    Rank {
        #[arg(long)]
        graph: String,
        /// Radius, a number or `inf`.
        #[arg(long)]
        r: String,
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum)]
        mode: ModeArg,
    },
    /// Exact SC-depth.
    Scdepth {
        #[arg(long)]
        graph: String,
    },
    /// Search for a flatness witness among the given tuples.
    Flat {
        #[arg(long)]
        graph: String,
        /// Tuples as `v v;v v;...`.
        #[arg(long)]
        tuples: String,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        r: String,
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum)]
        mode: ModeArg,
    },
    /// Evaluate the budget recursion f(t,m,k,d).
    Boundf { t: u64, m: u64, k: u64, d: u32 },
    /// Compute an optimal-depth subflip decomposition tree.
    Decompose {
        #[arg(long)]
        graph: String,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 8)]
        dmax: usize,
    },
    /// Sparsify a reflexive graph; prints the witness file.
    Sparsify {
        #[arg(long)]
        graph: String,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 8)]
        dmax: usize,
        /// Also assemble the transductions and report them.
        #[arg(long)]
        transductions: bool,
    },
    /// Recover the original graph from a sparsify witness file.
    Recover {
        #[arg(long)]
        witness: String,
    },
    /// Sparsify through a 2-cover; prints the union and its biclique order.
    Cover {
        #[arg(long)]
        graph: String,
        /// Cover sets as `0 1 2;2 3 0`.
        #[arg(long)]
        sets: String,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 8)]
        dmax: usize,
    },
    /// Parse, classify, normalize, or collapse a formula.
    Formula {
        text: String,
        #[arg(long)]
        classify: bool,
        #[arg(long)]
        normal_form: bool,
        #[arg(long)]
        collapse: bool,
    },
    /// Check the monadic non-equality property on an instance.
    Nep {
        /// Colored graph file.
        #[arg(long)]
        graph: String,
        #[arg(long)]
        formula: String,
        /// x-tuple variables, space separated.
        #[arg(long)]
        x_vars: String,
        /// y-tuple variables, space separated.
        #[arg(long)]
        y_vars: String,
        /// Tuples as `v v;v v;...`.
        #[arg(long)]
        tuples: String,
        /// Rewrite into a disjoint instance first.
        #[arg(long)]
        disjointify: bool,
    },
    /// Apply a transduction file to a witness (colored graph) file.
    Transduce {
        #[arg(long)]
        transduction: String,
        #[arg(long)]
        witness: String,
    },
    /// Evaluate a formula on a colored graph under an assignment.
    Eval {
        #[arg(long)]
        graph: String,
        #[arg(long)]
        formula: String,
        /// Assignment `x=0,y=3`.
        #[arg(long, default_value = "")]
        assign: String,
    },
    /// Run the invariant battery and print a pass/fail table.
    VerifySuite {
        /// Run a reduced-scope smoke pass.
        #[arg(long)]
        quick: bool,
        #[arg(long)]
        seed: Option<u64>,
        /// Run a single criterion (1..=12).
        #[arg(long)]
        criterion: Option<usize>,
    },
}

fn read_graph(path: &str) -> Result<Graph> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
    Ok(io::parse_graph(&text)?)
}

fn read_partition(path: &str, host: usize) -> Result<Partition> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
    Ok(io::parse_partition(&text, host)?)
}

fn parse_radius(r: &str) -> Result<Radius> {
    if r == "inf" {
        Ok(Radius::Infinite)
    } else {
        Ok(Radius::Finite(r.parse().context("radius must be a number or `inf`")?))
    }
}

fn parse_tuples(text: &str) -> Result<Vec<Vec<usize>>> {
    text.split(';')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            t.split_whitespace()
                .map(|v| v.parse::<usize>().map_err(|_| anyhow!("bad vertex id `{v}`")))
                .collect()
        })
        .collect()
}

fn parse_sets(text: &str) -> Result<Vec<VertexSet>> {
    Ok(parse_tuples(text)?.into_iter().map(|t| t.into_iter().collect()).collect())
}

/// Desk-scale caps, overridable through SUBFLIP_MAX_N.
fn rank_limits() -> RankLimits {
    let mut limits = RankLimits::default();
    if let Ok(cap) = std::env::var("SUBFLIP_MAX_N") {
        if let Ok(cap) = cap.parse::<usize>() {
            limits.max_vertices_flip = cap;
            limits.max_vertices_subflip = cap;
        }
    }
    limits
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen { kind, params, reflexive, layers } => {
            let need = |i: usize| -> Result<usize> {
                params.get(i).copied().ok_or_else(|| anyhow!("missing parameter {i}"))
            };
            let (graph, layer_sets) = match kind.as_str() {
                "clique" => (gen::clique(need(0)?)?, None),
                "independent" => (gen::independent(need(0)?)?, None),
                "path" => (gen::path(need(0)?)?, None),
                "cycle" => (gen::cycle(need(0)?)?, None),
                "co-matching" => (gen::co_matching(need(0)?)?, None),
                "half-graph" => (gen::half_graph(need(0)?)?, None),
                "biclique" => (gen::biclique(need(0)?)?, None),
                "star-crossing" => {
                    let c = gen::star_crossing(need(0)?, need(1)?)?;
                    (c.graph, Some(c.layers))
                }
                "clique-crossing" => {
                    let c = gen::clique_crossing(need(0)?, need(1)?)?;
                    (c.graph, Some(c.layers))
                }
                other => bail!("unknown generator `{other}`"),
            };
            let graph = if reflexive { graph.with_all_loops() } else { graph };
            print!("{}", io::render_graph(&graph));
            if layers {
                if let Some(layer_sets) = layer_sets {
                    for (i, layer) in layer_sets.iter().enumerate() {
                        let ids: Vec<String> = layer.iter().map(|v| v.to_string()).collect();
                        println!("# layer {i}: {}", ids.join(" "));
                    }
                }
            }
        }
        Command::Param { graph, kind } => {
            let g = read_graph(&graph)?;
            let kind = PatternKind::parse(&kind)
                .ok_or_else(|| anyhow!("unknown pattern kind `{kind}`"))?;
            println!("{}", pattern_order(&g, kind));
        }
        Command::Subflip { graph, partition } => {
            let g = read_graph(&graph)?;
            let p = read_partition(&partition, g.vertex_count())?;
            print!("{}", io::render_graph(&subflip::flip::subflip(&g, &p)?));
        }
        Command::Flip { graph, partition, pairs } => {
            let g = read_graph(&graph)?;
            let p = read_partition(&partition, g.vertex_count())?;
            let pair_list: Vec<(usize, usize)> = parse_tuples(&pairs)?
                .into_iter()
                .map(|t| {
                    if t.len() == 2 {
                        Ok((t[0], t[1]))
                    } else {
                        Err(anyhow!("each pair needs two part ids"))
                    }
                })
                .collect::<Result<_>>()?;
            let spec = subflip::flip::FlipSpec::new(p, &pair_list)?;
            print!("{}", io::render_graph(&subflip::flip::flip(&g, &spec)?));
        }
        Command::Transfer { graph, partition, t, verify } => {
            let g = read_graph(&graph)?;
            let p = read_partition(&partition, g.vertex_count())?;
            let result = subflip::approx::transfer_refinement(&g, &p, t, true)?;
            print!("{}", io::render_partition(&result.refinement));
            let bound = result.k * result.t.pow(result.k as u32);
            println!("# size {} within bound {}", result.refinement.len(), bound);
            if verify {
                let ok = subflip::approx::verify_transfer(&g, &p, &result)?;
                println!("# guarantee {}", if ok { "holds" } else { "VIOLATED" });
            }
        }
        Command::Rank { graph, r, k, mode } => {
            let g = read_graph(&graph)?;
            let q = RankQuery { radius: parse_radius(&r)?, budget: k, mode: mode.into() };
            println!("{}", rank_with_limits(&g, &q, &rank_limits())?);
        }
        Command::Scdepth { graph } => {
            let g = read_graph(&graph)?;
            let cap = std::env::var("SUBFLIP_MAX_N")
                .ok()
                .and_then(|c| c.parse().ok())
                .unwrap_or(5);
            println!("{}", sc_depth_with_cap(&g, cap)?);
        }
        Command::Flat { graph, tuples, m, r, k, mode } => {
            let g = read_graph(&graph)?;
            let w = parse_tuples(&tuples)?;
            let len = w.first().map(|t| t.len()).unwrap_or(1);
            let q = FlatnessQuery {
                radius: parse_radius(&r)?,
                budget: k,
                target: m,
                tuple_len: len,
                mode: mode.into(),
            };
            match flat_witness(&g, &w, &q)? {
                Some(witness) => {
                    for tuple in &witness.selected {
                        let ids: Vec<String> = tuple.iter().map(|v| v.to_string()).collect();
                        println!("selected {}", ids.join(" "));
                    }
                    print!("{}", io::render_partition(&witness.partition));
                    if let Some(rel) = &witness.relation {
                        let pairs: Vec<String> =
                            rel.iter().map(|(a, b)| format!("{a} {b}")).collect();
                        println!("relation {}", pairs.join(","));
                    }
                }
                None => println!("none"),
            }
        }
        Command::Boundf { t, m, k, d } => println!("{}", bound_f(t, m, k, d)?),
        Command::Decompose { graph, k, dmax } => {
            let g = read_graph(&graph)?;
            match decompose(&g, k, dmax)? {
                Some(tree) => {
                    println!("depth {}", tree.depth());
                    if g.is_reflexive() {
                        let w = sparsify(&g, &tree, k, tree.depth())?;
                        print!("{}", io::render_sparsify_witness(&w));
                    }
                }
                None => println!("none within depth {dmax}"),
            }
        }
        Command::Sparsify { graph, k, dmax, transductions } => {
            let g = read_graph(&graph)?;
            let tree = decompose(&g, k, dmax)?
                .ok_or_else(|| anyhow!("no decomposition within depth {dmax}"))?;
            let witness = sparsify(&g, &tree, k, tree.depth())?;
            print!("{}", io::render_sparsify_witness(&witness));
            if transductions {
                let ts = build_transductions(&g, &witness)?;
                let sp = apply(&ts.sparsify.0, &ts.sparsify.1)?;
                let rc = apply(&ts.recover.0, &ts.recover.1)?;
                println!(
                    "# transductions: sparsify ok={}, recover ok={}",
                    sp.graph == witness.result,
                    rc.graph == g,
                );
            }
        }
        Command::Recover { witness } => {
            let text = fs::read_to_string(&witness).with_context(|| format!("reading {witness}"))?;
            let w = io::parse_sparsify_witness(&text)?;
            print!("{}", io::render_graph(&recover(&w)?));
        }
        Command::Cover { graph, sets, k, dmax } => {
            let g = read_graph(&graph)?;
            let sets = parse_sets(&sets)?;
            if !p_cover_check(g.vertex_count(), &sets, 2) {
                bail!("sets do not form a 2-cover");
            }
            let family = CoverFamily::build(&g, sets, 2, k, dmax)?;
            let max_d = family.decompositions.iter().map(|t| t.depth()).max().unwrap_or(0);
            let res = cover_sparsify(&g, &family, k, max_d)?;
            print!("{}", io::render_graph(&res.result));
            println!("# union biclique order {}", res.union_biclique_order);
            let back = recover_covered(&res, g.vertex_count())?;
            println!("# recovery exact {}", back == g);
        }
        Command::Formula { text, classify: do_classify, normal_form, collapse } => {
            let f = parse_formula(&text)?;
            println!("{}", render(&f));
            if do_classify {
                let c = classify(&f)?;
                println!(
                    "positive {} existential {} ep {} qrank {} positive-in {}",
                    c.positive,
                    c.existential,
                    c.ep,
                    c.qrank,
                    c.positive_in.into_iter().collect::<Vec<_>>().join(" "),
                );
            }
            if normal_form {
                let nf = ep_normal_form(&f)?;
                println!("radius {}", nf.radius);
                for (i, disjunct) in nf.disjuncts.iter().enumerate() {
                    for conjunct in disjunct {
                        println!(
                            "disjunct {i} conjunct [{}] {}",
                            conjunct.free_vars.join(" "),
                            render(&conjunct.formula)
                        );
                    }
                }
            }
            if collapse {
                println!("collapsed {}", render(&mso_collapse(&f)?));
            }
        }
        Command::Nep { graph, formula, x_vars, y_vars, tuples, disjointify: do_disjoint } => {
            let text = fs::read_to_string(&graph).with_context(|| format!("reading {graph}"))?;
            let colored = io::parse_colored_graph(&text)?;
            let inst = NEPInstance {
                formula: parse_formula(&formula)?,
                x_vars: x_vars.split_whitespace().map(str::to_string).collect(),
                y_vars: y_vars.split_whitespace().map(str::to_string).collect(),
                colored,
                tuples: parse_tuples(&tuples)?,
            };
            if do_disjoint {
                let out = subflip::logic::disjointify(&inst)?;
                println!("formula {}", render(&out.formula));
                for tuple in &out.tuples {
                    let ids: Vec<String> = tuple.iter().map(|v| v.to_string()).collect();
                    println!("tuple {}", ids.join(" "));
                }
                println!("nep {}", nep_check(&out)?);
            } else {
                println!("{}", nep_check(&inst)?);
            }
        }
        Command::Transduce { transduction, witness } => {
            let t_text = fs::read_to_string(&transduction)
                .with_context(|| format!("reading {transduction}"))?;
            let w_text =
                fs::read_to_string(&witness).with_context(|| format!("reading {witness}"))?;
            let t = io::parse_transduction(&t_text)?;
            let w = io::parse_witness(&w_text)?;
            let out = apply(&t, &w)?;
            let ids: Vec<String> = out.vertex_ids.iter().map(|v| v.to_string()).collect();
            println!("# domain {}", ids.join(" "));
            print!("{}", io::render_graph(&out.graph));
        }
        Command::Eval { graph, formula, assign } => {
            let text = fs::read_to_string(&graph).with_context(|| format!("reading {graph}"))?;
            let colored = io::parse_colored_graph(&text)?;
            let f = parse_formula(&formula)?;
            let mut assignment = BTreeMap::new();
            for pair in assign.split(',').filter(|p| !p.trim().is_empty()) {
                let (var, value) = pair
                    .split_once('=')
                    .ok_or_else(|| anyhow!("assignments look like `x=0`"))?;
                assignment.insert(var.trim().to_string(), value.trim().parse()?);
            }
            println!("{}", evaluate(&colored, &f, &assignment, &BTreeMap::new())?);
        }
        Command::VerifySuite { quick, seed, criterion } => {
            let mut cfg = VerifyConfig { quick, ..VerifyConfig::default() };
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            let reports = match criterion {
                Some(id) => {
                    if !CRITERIA.iter().any(|&(i, _)| i == id) {
                        bail!("criterion must be 1..={}", CRITERIA.len());
                    }
                    vec![run_criterion(id, &cfg)]
                }
                None => run_all(&cfg),
            };
            let mut all_ok = true;
            for report in &reports {
                let status = if report.passed { "PASS" } else { "FAIL" };
                println!("[{status}] {:02} {} — {}", report.id, report.name, report.details);
                all_ok &= report.passed;
            }
            if !all_ok {
                bail!("verify-suite found failures");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
