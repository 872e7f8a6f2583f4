mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use kerneldim::commutator::{al_check, conjecture_experiment};
use kerneldim::field::{FieldChoice, DEFAULT_PRIME};
use kerneldim::graphs::LabeledDigraph;
use kerneldim::linalg::ExactMatrix;
use kerneldim::ordering::{
    delta, ic_matrix, ic_matrix_via_maximal, ic_via_maximal, max_t, maximal_graph, UniverseFilter,
};
use kerneldim::par::{set_worker_count, Execution};
use kerneldim::specialization::{block_lj_direct, block_lj_via_operator, Exponents};
use kerneldim::structure::{check_structure, compute_structure_inputs, int_nullity, structure_report, Check, StructureOptions};
use serde_json::{json, Value};

use report::{Format, Report};

/// Experiments on the kernel of generalized-commutator operators.
#[derive(Parser)]
#[command(name = "kerneldim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Report format.
    #[arg(long, global = true, value_enum, default_value = "json")]
    out: Format,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    /// Worker threads for the parallel loops.
    #[arg(long, global = true, env = "KERNELDIM_WORKERS")]
    workers: Option<usize>,

    /// Run every loop on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Sample the nullity of L(A_1..A_k) on random matrices.
    Conjecture {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Check that the standard polynomial of degree m vanishes on n x n matrices.
    AlCheck {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long, default_value_t = 5)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Signed count of Eulerian paths of a labeled digraph.
    EulerianSum {
        /// Graph JSON file.
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        start: usize,
        /// List the individual paths (implied for graphs with at most 8 edges).
        #[arg(long)]
        enumerate: bool,
    },
    /// The block L_j of the specialized operator, with polynomial entries.
    Block {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        j: usize,
        #[arg(long, value_enum, default_value = "direct")]
        method: BlockMethod,
    },
    /// Initial-coefficient matrices Ic(L_j).
    Ic {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        r: usize,
        /// A block index or `all`.
        #[arg(long, default_value = "all", value_parser = parse_j_sel)]
        j: JSel,
        #[arg(long, value_enum, default_value = "both")]
        method: IcMethod,
        #[command(flatten)]
        field: FieldArgs,
    },
    /// The largest graph of U(a, j) and the Ic row it yields.
    MaximalGraph {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        a: usize,
        #[arg(long)]
        j: usize,
    },
    /// Run every structural check for one (n, r).
    StructureReport {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        r: usize,
        #[command(flatten)]
        field: FieldArgs,
        /// Trials per randomized rank.
        #[arg(long, default_value_t = 3)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also take the randomized nullity of the whole n^2 x n^2 operator.
        #[arg(long)]
        full_operator: bool,
        /// Replace one Ic matrix with the contents of a JSON file
        /// `{"j": J, "matrix": [[...]]}` before checking.
        #[arg(long, hide = true)]
        inject_ic: Option<PathBuf>,
    },
}

#[derive(Args)]
struct FieldArgs {
    /// Scalar field: rationals or a prime field.
    #[arg(long, value_enum, default_value = "q")]
    field: FieldKind,
    /// Prime for `--field gfp`.
    #[arg(long, env = "KERNELDIM_PRIME", default_value_t = DEFAULT_PRIME)]
    p: u64,
}

impl FieldArgs {
    fn choice(&self) -> Result<FieldChoice> {
        let choice = match self.field {
            FieldKind::Q => FieldChoice::Rational,
            FieldKind::Gfp => FieldChoice::Prime { p: self.p },
        };
        choice.validate()?;
        Ok(choice)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FieldKind {
    Q,
    Gfp,
}

#[derive(Clone, Copy, ValueEnum)]
enum BlockMethod {
    Direct,
    Operator,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum IcMethod {
    Definition,
    Maximal,
    Both,
}

#[derive(Clone, Copy)]
enum JSel {
    All,
    One(usize),
}

fn parse_j_sel(s: &str) -> Result<JSel, String> {
    if s == "all" {
        return Ok(JSel::All);
    }
    s.parse().map(JSel::One).map_err(|_| format!("expected `all` or a block index, got {s:?}"))
}

fn value_name<T: ValueEnum>(v: T) -> String {
    v.to_possible_value().expect("no skipped variants").get_name().to_string()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            if let Err(e) = report.emit(cli.out, cli.output.as_deref()) {
                eprintln!("error: {e:#}");
                return ExitCode::from(2);
            }
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
                eprintln!("check failed: {}", failed.join(", "));
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Result<Report> {
    if let Some(w) = cli.workers {
        if w == 0 {
            bail!("--workers must be at least 1");
        }
        set_worker_count(w).map_err(anyhow::Error::msg)?;
    }
    let exec = if cli.sequential { Execution::Sequential } else { Execution::Parallel };
    match &cli.command {
        Command::Conjecture { n, k, field, trials, seed } => conjecture(*n, *k, field.choice()?, *trials, *seed, exec),
        Command::AlCheck { n, m, field, trials, seed } => al(*n, *m, field.choice()?, *trials, *seed, exec),
        Command::EulerianSum { graph, start, enumerate } => eulerian(graph, *start, *enumerate),
        Command::Block { n, r, j, method } => block(*n, *r, *j, *method, exec),
        Command::Ic { n, r, j, method, field } => ic(*n, *r, *j, *method, field.choice()?, exec),
        Command::MaximalGraph { n, r, a, j } => maximal(*n, *r, *a, *j, exec),
        Command::StructureReport { n, r, field, trials, seed, full_operator, inject_ic } => {
            let opts = StructureOptions {
                field: field.choice()?,
                trials: *trials,
                seed: *seed,
                full_operator: *full_operator,
            };
            structure(*n, *r, opts, inject_ic.as_deref(), exec)
        }
    }
}

fn conjecture(n: usize, k: usize, field: FieldChoice, trials: usize, seed: u64, exec: Execution) -> Result<Report> {
    if trials == 0 {
        bail!("--trials must be at least 1");
    }
    let rep = conjecture_experiment(n, k, field, trials, seed, exec)?;
    let misses: Vec<Value> = rep
        .nullities
        .iter()
        .enumerate()
        .filter(|&(_, &d)| d != rep.predicted_nullity)
        .map(|(t, &d)| json!({"trial": t, "nullity": d}))
        .collect();
    let check = Check::new(
        "predicted_nullity",
        !rep.asserted || rep.meets(19, 20),
        json!({
            "matching_trials": rep.matching_trials,
            "trials": rep.trials,
            "threshold": "19/20",
            "asserted": rep.asserted,
            "mismatches": misses,
        }),
    );
    Ok(Report {
        command: "conjecture",
        config: json!({"n": n, "k": k, "field": field, "trials": trials, "seed": seed}),
        csv_header: vec!["trial", "nullity", "predicted"],
        csv_rows: rep
            .nullities
            .iter()
            .enumerate()
            .map(|(t, d)| vec![t.to_string(), d.to_string(), rep.predicted_nullity.to_string()])
            .collect(),
        result: serde_json::to_value(&rep)?,
        checks: vec![check],
    })
}

fn al(n: usize, m: usize, field: FieldChoice, trials: usize, seed: u64, exec: Execution) -> Result<Report> {
    if trials == 0 {
        bail!("--trials must be at least 1");
    }
    if m > 10 {
        eprintln!("warning: m = {m} sums over {m}! permutations per trial; this may take a long time");
    }
    let rep = al_check(n, m, field, trials, seed, exec)?;
    let check = Check::new(
        "standard_polynomial_vanishes",
        rep.passed,
        json!({"nonvanishing_trials": rep.nonvanishing_trials}),
    );
    Ok(Report {
        command: "al-check",
        config: json!({"n": n, "m": m, "field": field, "trials": trials, "seed": seed}),
        csv_header: vec!["trial", "vanished"],
        csv_rows: (0..trials)
            .map(|t| vec![t.to_string(), (!rep.nonvanishing_trials.contains(&t)).to_string()])
            .collect(),
        result: serde_json::to_value(&rep)?,
        checks: vec![check],
    })
}

/// Graph files use the library's graph JSON, or the shorthand
/// `{"n": N, "edges": [[src, tar], ...]}` with labels in list order.
fn read_graph(path: &Path) -> Result<LabeledDigraph> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let value: Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    if let Some(list) = value.get("edges").and_then(Value::as_array) {
        let n = value.get("n").and_then(Value::as_u64).context("graph JSON: missing integer \"n\"")? as usize;
        let edges: Vec<(usize, usize)> =
            serde_json::from_value(Value::Array(list.clone())).context("graph JSON: edges must be [src, tar] pairs")?;
        return Ok(LabeledDigraph::from_edges(n, &edges)?);
    }
    Ok(LabeledDigraph::from_json(&value)?)
}

fn int_json(v: i128) -> Value {
    i64::try_from(v).map(Value::from).unwrap_or_else(|_| Value::String(v.to_string()))
}

fn eulerian(path: &Path, start: usize, enumerate: bool) -> Result<Report> {
    let g = read_graph(path)?;
    if start >= g.n() {
        bail!("--start must lie in 0..{} (got {start})", g.n());
    }
    let sum = g.signed_sum(start);
    let mut checks = Vec::new();
    let mut paths = None;
    if enumerate || g.edge_count() <= 8 {
        let listed = g.enumerate_signed(start);
        let listed_sum: i128 = listed.iter().map(|p| p.sign as i128).sum();
        checks.push(Check::new(
            "dp_matches_enumeration",
            listed_sum == sum,
            json!({"dp": int_json(sum), "enumerated": int_json(listed_sum)}),
        ));
        paths = Some(listed);
    }
    if g.has_repeated_edge() {
        checks.push(Check::new(
            "repeated_edge_cancels",
            sum == 0,
            json!({"signed_sum": int_json(sum)}),
        ));
    }
    let end = g.eulerian_end(start);
    Ok(Report {
        command: "eulerian-sum",
        config: json!({"graph": path.display().to_string(), "start": start, "enumerate": enumerate}),
        csv_header: vec!["start", "end", "signed_sum", "path_count"],
        csv_rows: vec![vec![
            start.to_string(),
            end.map(|e| e.to_string()).unwrap_or_default(),
            sum.to_string(),
            paths.as_ref().map(|p| p.len().to_string()).unwrap_or_default(),
        ]],
        result: json!({
            "graph": g.to_json(),
            "start": start,
            "end": end,
            "has_repeated_edge": g.has_repeated_edge(),
            "signed_sum": int_json(sum),
            "paths": paths,
        }),
        checks,
    })
}

fn check_index(name: &str, v: usize, n: usize) -> Result<()> {
    if v >= n {
        bail!("--{name} must lie in 0..{n} (got {v})");
    }
    Ok(())
}

fn block(n: usize, r: usize, j: usize, method: BlockMethod, exec: Execution) -> Result<Report> {
    check_index("j", j, n)?;
    let exps = Exponents::canonical(r)?;
    let b = match method {
        BlockMethod::Direct => block_lj_direct(n, &exps, j, exec)?,
        BlockMethod::Operator => block_lj_via_operator(n, &exps, j)?,
    };
    let rendered: Vec<Vec<String>> = (0..n).map(|a| b.body.row(a).iter().map(|p| p.render()).collect()).collect();
    let mut result = b.to_json();
    result["rendered"] = json!(rendered);
    Ok(Report {
        command: "block",
        config: json!({"n": n, "r": r, "j": j, "method": value_name(method)}),
        csv_header: vec!["row", "col", "entry"],
        csv_rows: rendered
            .iter()
            .enumerate()
            .flat_map(|(a, row)| row.iter().enumerate().map(move |(c, e)| vec![a.to_string(), c.to_string(), e.clone()]))
            .collect(),
        result,
        checks: Vec::new(),
    })
}

fn need_n_above_r(n: usize, r: usize) -> Result<()> {
    if r == 0 || n <= r {
        bail!("need 1 <= r < n (got n={n}, r={r})");
    }
    Ok(())
}

fn ic(n: usize, r: usize, sel: JSel, method: IcMethod, field: FieldChoice, exec: Execution) -> Result<Report> {
    need_n_above_r(n, r)?;
    if !field.admissible_for(r)? {
        bail!("characteristic {} divides 2(2r+1)r! for r={r}", field.characteristic());
    }
    let exps = Exponents::canonical(r)?;
    let js: Vec<usize> = match sel {
        JSel::All => (0..n).collect(),
        JSel::One(j) => {
            check_index("j", j, n)?;
            vec![j]
        }
    };
    let mut blocks = Vec::new();
    let mut disagreements = Vec::new();
    let mut over = Vec::new();
    let mut nullities = Vec::new();
    let mut csv_rows = Vec::new();
    for &j in &js {
        let def = (method != IcMethod::Maximal)
            .then(|| block_lj_direct(n, &exps, j, exec).and_then(|b| ic_matrix(&b)))
            .transpose()?;
        let max = (method != IcMethod::Definition)
            .then(|| ic_matrix_via_maximal(n, &exps, j, exec))
            .transpose()?;
        if let (Some(d), Some((m, _))) = (&def, &max) {
            for a in 0..n {
                if d.row(a) != m.row(a) {
                    disagreements.push(json!({"j": j, "a": a, "definition": d.row(a), "maximal_graph": m.row(a)}));
                }
            }
        }
        let matrix: &ExactMatrix<i64> = def.as_ref().or(max.as_ref().map(|(m, _)| m)).expect("some method");
        let nullity = int_nullity(matrix, field)?;
        let bound = (j != 0).then(|| delta(j, n, r));
        if bound.is_some_and(|d| nullity > d) {
            over.push(json!({"j": j, "nullity": nullity, "delta": bound}));
        }
        nullities.push(nullity);
        for a in 0..n {
            for b in 0..n {
                csv_rows.push(vec![j.to_string(), a.to_string(), b.to_string(), matrix.get(a, b).to_string()]);
            }
        }
        blocks.push(json!({
            "j": j,
            "matrix": matrix.to_json_with(|v| json!(v)),
            "nullity": nullity,
            "delta": bound,
            "maximal_rows": max.map(|(_, rows)| rows),
        }));
    }
    let mut checks = Vec::new();
    if method == IcMethod::Both {
        checks.push(Check::new("ic_routes_agree", disagreements.is_empty(), json!({"disagreements": disagreements})));
    }
    checks.push(Check::new("nullity_within_delta", over.is_empty(), json!({"violations": over})));
    if let Some(pos) = js.iter().position(|&j| j == 0) {
        checks.push(Check::new("ic_l0_nonsingular", nullities[pos] == 0, json!({"nullity": nullities[pos]})));
    }
    if matches!(sel, JSel::All) {
        let total: usize = nullities.iter().sum();
        checks.push(Check::new(
            "ic_nullity_total_is_k",
            total == 2 * r,
            json!({"total": total, "k": 2 * r}),
        ));
    }
    let j_config = match sel {
        JSel::All => json!("all"),
        JSel::One(j) => json!(j),
    };
    Ok(Report {
        command: "ic",
        config: json!({"n": n, "r": r, "j": j_config, "method": value_name(method), "field": field}),
        csv_header: vec!["j", "a", "b", "value"],
        csv_rows,
        result: json!({"blocks": blocks, "nullity_total": nullities.iter().sum::<usize>()}),
        checks,
    })
}

fn maximal(n: usize, r: usize, a: usize, j: usize, exec: Execution) -> Result<Report> {
    need_n_above_r(n, r)?;
    check_index("a", a, n)?;
    check_index("j", j, n)?;
    let exps = Exponents::canonical(r)?;
    let g = maximal_graph(a, j, n, &exps)?;
    let t = max_t(a, j, n, &exps)?;
    let row = ic_via_maximal(a, j, n, &exps)?;
    let def = ic_matrix(&block_lj_direct(n, &exps, j, exec)?)?;
    let checks = vec![
        Check::new(
            "maximal_graph_in_universe",
            UniverseFilter::full(a, j, &exps).contains(&g, &exps),
            json!({"graph": g.to_json()}),
        ),
        Check::new(
            "row_matches_definition",
            def.row(a) == row.row.as_slice(),
            json!({"definition": def.row(a), "maximal_graph": row.row}),
        ),
    ];
    let edges = g.edges();
    Ok(Report {
        command: "maximal-graph",
        config: json!({"n": n, "r": r, "a": a, "j": j}),
        csv_header: vec!["label", "src", "tar"],
        csv_rows: edges.iter().map(|&(l, s, t)| vec![l.to_string(), s.to_string(), t.to_string()]).collect(),
        result: json!({
            "max_t": t,
            "graph": g.to_json(),
            "edges": edges,
            "ic_row": row,
        }),
        checks,
    })
}

fn structure(n: usize, r: usize, opts: StructureOptions, inject: Option<&Path>, exec: Execution) -> Result<Report> {
    let mut report = match inject {
        None => structure_report(n, r, opts, exec)?,
        Some(path) => {
            let mut inputs = compute_structure_inputs(n, r, opts, exec)?;
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let value: Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
            let j = value.get("j").and_then(Value::as_u64).context("fixture: missing integer \"j\"")? as usize;
            check_index("j", j, n)?;
            let rows: Vec<Vec<i64>> =
                serde_json::from_value(value.get("matrix").cloned().unwrap_or(Value::Null)).context("fixture: bad \"matrix\"")?;
            let m = ExactMatrix::from_rows(rows)?;
            if m.rows() != n || m.cols() != n {
                bail!("fixture matrix must be {n} x {n}");
            }
            inputs.ic[j] = m;
            check_structure(&inputs, opts, exec)?
        }
    };
    let checks = std::mem::take(&mut report.checks);
    let mut result = serde_json::to_value(&report)?;
    if let Some(obj) = result.as_object_mut() {
        obj.remove("checks");
        obj.remove("passed");
        obj.remove("options");
        obj.insert("nullity_total".into(), json!(report.ic_nullities.iter().sum::<usize>()));
    }
    Ok(Report {
        command: "structure-report",
        config: json!({
            "n": n,
            "r": r,
            "field": opts.field,
            "trials": opts.trials,
            "seed": opts.seed,
            "full_operator": opts.full_operator,
            "inject_ic": inject.map(|p| p.display().to_string()),
        }),
        csv_header: vec!["check", "passed"],
        csv_rows: checks.iter().map(|c| vec![c.name.clone(), c.passed.to_string()]).collect(),
        result,
        checks,
    })
}
