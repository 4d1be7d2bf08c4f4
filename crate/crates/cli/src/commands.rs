use std::path::Path;

use serde::Serialize;
use twodsd::bootstrap::{case1_replicates, stream_rng, Case1Replicate};
use twodsd::dominance::{classify, default_tolerance, index, mvr, tail_diagnostics, Classification, Index2DSD, MVREstimate, TailDiagnostics};
use twodsd::empirical::target_function;
use twodsd::scenarios::{median, mvr_estimates, OracleResult, PowerCurveConfig, PowerCurveResult, MONTE_CARLO_DOMAIN};
use twodsd::testing::{min_rejected_epsilon, run_test_with_replicates};
use twodsd::{
    BootstrapConfig, Direction, DistributionSpec, OrderKind, RateAndBandwidth, Sample, ScenarioSpec, TestResult,
    TestSpec,
};

use crate::args::{
    Command, DiagnoseArgs, IndexArgs, InputArgs, MvrArgs, OracleArgs, OutputArgs, SampleArgs, SimulateArgs,
    SimulateMode, TestArgs,
};
use crate::error::{CliError, CliResult};
use crate::ingest::{ingest, ingest_columns, write_column_csv, ColumnSpec, IngestReport};
use crate::output::{
    to_json, write_plot_data, write_text, Envelope, Format, PlotMeta, PlotTable, Table, SCHEMA_VERSION, TOOL,
};

pub fn run(command: Command) -> CliResult<()> {
    match command {
        Command::Index(a) => run_index(&a),
        Command::Mvr(a) => run_mvr(&a),
        Command::Test(a) => run_test_cmd(&a),
        Command::Simulate(a) => run_simulate(a),
        Command::Oracle(a) => run_oracle(&a),
        Command::Diagnose(a) => run_diagnose(&a),
        Command::Sample(a) => run_sample(&a),
    }
}

pub struct Pair {
    pub x1: Sample,
    pub x2: Sample,
    pub reports: [IngestReport; 2],
}

pub fn load_pair(input: &InputArgs) -> CliResult<Pair> {
    match &input.x2 {
        Some(x2) => {
            let (s1, r1) = ingest(&input.x1, &input.col1, input.header)?;
            let col2 = input.col2.clone().unwrap_or(ColumnSpec::Index(0));
            let (s2, r2) = ingest(x2, &col2, input.header)?;
            Ok(Pair {
                x1: s1,
                x2: s2,
                reports: [r1, r2],
            })
        }
        None => {
            let col2 = input
                .col2
                .clone()
                .ok_or_else(|| CliError::Usage("without --x2, select both columns with --col1 and --col2".into()))?;
            let mut cols = ingest_columns(&input.x1, &[input.col1.clone(), col2], input.header)?;
            let (s2, r2) = cols.pop().expect("two columns");
            let (s1, r1) = cols.pop().expect("two columns");
            Ok(Pair {
                x1: s1,
                x2: s2,
                reports: [r1, r2],
            })
        }
    }
}

fn emit<C: Serialize, R: Serialize>(
    command: &str,
    seed: Option<u64>,
    config: &C,
    result: &R,
    output: &OutputArgs,
    table: Option<Table>,
) -> CliResult<()> {
    let text = match output.format {
        Format::Json => to_json(&Envelope {
            schema_version: SCHEMA_VERSION,
            tool: TOOL,
            command,
            seed,
            config,
            result,
        }),
        Format::Csv => table
            .unwrap_or_else(|| Table::single_row(&serde_json::to_value(result).expect("results serialise to JSON")))
            .to_csv(),
    };
    write_text(&text, output.out.as_deref())
}

#[derive(Debug, Serialize)]
pub struct MvrPair {
    pub first_dominated: MVREstimate,
    pub second_dominated: MVREstimate,
}

fn mvr_pair(idx: &Index2DSD) -> MvrPair {
    let first = mvr(idx);
    MvrPair {
        first_dominated: first,
        second_dominated: first.reversed(),
    }
}

#[derive(Debug, Serialize)]
pub struct IndexOutput {
    pub inputs: [IngestReport; 2],
    /// Index of `(x1, x2)`.
    pub index: Index2DSD,
    pub mvr: MvrPair,
    pub classification: Option<Classification>,
}

fn run_index(a: &IndexArgs) -> CliResult<()> {
    let pair = load_pair(&a.input)?;
    let idx = index(&pair.x1, &pair.x2, a.order)?;
    let classification = a
        .epsilon
        .map(|e| classify(&idx, e, a.tol.unwrap_or_else(|| default_tolerance(&idx))))
        .transpose()?;
    let out = IndexOutput {
        inputs: pair.reports,
        index: idx,
        mvr: mvr_pair(&idx),
        classification,
    };
    emit("index", None, a, &out, &a.output, None)
}

#[derive(Debug, Serialize)]
pub struct MvrOutput {
    pub inputs: [IngestReport; 2],
    pub order: OrderKind,
    pub estimates: Vec<MVREstimate>,
}

fn directions(arg: crate::args::DirectionArg) -> Vec<Direction> {
    match arg.single() {
        Some(d) => vec![d],
        None => vec![Direction::FirstDominated, Direction::SecondDominated],
    }
}

fn run_mvr(a: &MvrArgs) -> CliResult<()> {
    let pair = load_pair(&a.input)?;
    let idx = index(&pair.x1, &pair.x2, a.order)?;
    let both = mvr_pair(&idx);
    let estimates = directions(a.direction)
        .into_iter()
        .map(|d| match d {
            Direction::FirstDominated => both.first_dominated,
            Direction::SecondDominated => both.second_dominated,
        })
        .collect();
    let out = MvrOutput {
        inputs: pair.reports,
        order: a.order,
        estimates,
    };
    let table = Table::from_rows(
        &out.estimates
            .iter()
            .map(|e| serde_json::to_value(e).expect("serialisable"))
            .collect::<Vec<_>>(),
    );
    emit("mvr", None, a, &out, &a.output, Some(table))
}

#[derive(Debug, Serialize)]
pub struct TestEntry {
    #[serde(flatten)]
    pub result: TestResult,
    /// Present when requested: infimum of the epsilons at which test (a)
    /// rejects, or null when Case 2 rejects nowhere in [0, 0.5).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_rejected_epsilon: Option<Option<f64>>,
}

#[derive(Debug, Serialize)]
pub struct TestOutput {
    pub inputs: [IngestReport; 2],
    pub tests: Vec<TestEntry>,
}

fn run_test_cmd(a: &TestArgs) -> CliResult<()> {
    let pair = load_pair(&a.input)?;
    let cfg = BootstrapConfig::new(a.bootstrap.replicates, a.bootstrap.seed)
        .with_c(a.c)
        .with_parallelism(a.bootstrap.parallelism());
    let spec = |direction| TestSpec {
        variant: a.variant,
        epsilon: a.epsilon,
        alpha: a.alpha,
        method: a.method,
        order: a.order,
        direction,
    };
    let results = directions(a.direction)
        .into_iter()
        .map(|d| run_test_with_replicates(&pair.x1, &pair.x2, &spec(d), &cfg))
        .collect::<twodsd::Result<Vec<_>>>()?;

    let mut tests = Vec::with_capacity(results.len());
    for (result, _) in &results {
        let min = if a.min_epsilon {
            let s = result.spec;
            Some(min_rejected_epsilon(&pair.x1, &pair.x2, s.method, s.order, s.direction, s.alpha, &cfg)?)
        } else {
            None
        };
        tests.push(TestEntry {
            result: result.clone(),
            min_rejected_epsilon: min,
        });
    }

    if let Some(dir) = &a.plot_data {
        write_test_plot_data(dir, &pair, a.order, &results, &cfg)?;
    }

    let out = TestOutput {
        inputs: pair.reports,
        tests,
    };
    let table = Table::from_rows(
        &out.tests
            .iter()
            .map(|t| serde_json::to_value(t).expect("serialisable"))
            .collect::<Vec<_>>(),
    );
    emit("test", Some(a.bootstrap.seed), a, &out, &a.output, Some(table))
}

fn direction_name(d: Direction) -> &'static str {
    match d {
        Direction::FirstDominated => "first_dominated",
        Direction::SecondDominated => "second_dominated",
    }
}

const TARGET_POINTS: usize = 2000;

fn write_test_plot_data(
    dir: &Path,
    pair: &Pair,
    order: OrderKind,
    results: &[(TestResult, Vec<Case1Replicate>)],
    cfg: &BootstrapConfig,
) -> CliResult<()> {
    let mut tables = Vec::new();
    let mut meta_tables = Vec::new();
    for (result, reps) in results {
        let d = result.spec.direction;
        let reps = if reps.is_empty() {
            let (lo, hi) = d.arrange(&pair.x1, &pair.x2);
            case1_replicates(lo, hi, order, cfg)?
        } else {
            reps.clone()
        };
        let mut t = Table::new(["kind", "signed", "abs", "epsilon0"]);
        t.push(vec![
            "estimate".into(),
            result.index.signed.to_string(),
            result.index.abs.to_string(),
            result.epsilon_hat0.to_string(),
        ]);
        for r in &reps {
            t.push(vec![
                "replicate".into(),
                r.signed.to_string(),
                r.abs.to_string(),
                r.epsilon0.to_string(),
            ]);
        }
        let file = format!("cloud_{}.csv", direction_name(d));
        meta_tables.push(PlotTable {
            file: file.clone(),
            x: "signed",
            y: vec!["abs"],
            log_scale_x: false,
        });
        tables.push((file, t));
    }

    let s1 = target_function(&pair.x1, order)?;
    let s2 = target_function(&pair.x2, order)?;
    let grid: Vec<f64> = if order == OrderKind::Lorenz {
        (0..=TARGET_POINTS).map(|k| k as f64 / TARGET_POINTS as f64).collect()
    } else {
        let mut pooled: Vec<f64> = pair.x1.values().iter().chain(pair.x2.values()).copied().collect();
        pooled.sort_by(f64::total_cmp);
        pooled.dedup();
        let step = pooled.len().div_ceil(TARGET_POINTS).max(1);
        let mut g: Vec<f64> = pooled.iter().step_by(step).copied().collect();
        if g.last() != pooled.last() {
            g.push(*pooled.last().expect("nonempty"));
        }
        g
    };
    let mut t = Table::new(["x", "s1", "s2", "difference"]);
    for &x in &grid {
        let (a, b) = (s1.eval(x), s2.eval(x));
        t.push(vec![x.to_string(), a.to_string(), b.to_string(), (a - b).to_string()]);
    }
    let positive = pair.x1.min() > 0.0 && pair.x2.min() > 0.0;
    meta_tables.push(PlotTable {
        file: "targets.csv".into(),
        x: "x",
        y: vec!["s1", "s2", "difference"],
        log_scale_x: order != OrderKind::Lorenz && positive,
    });
    tables.push(("targets.csv".into(), t));

    let meta = PlotMeta {
        schema_version: SCHEMA_VERSION,
        kind: "test",
        tables: meta_tables,
    };
    let refs: Vec<(&str, Table)> = tables.iter().map(|(n, t)| (n.as_str(), t.clone())).collect();
    write_plot_data(dir, &meta, &refs)
}

pub fn load_scenario(id: &str) -> CliResult<ScenarioSpec> {
    if ScenarioSpec::BUILTIN_IDS.contains(&id) || id == "4" {
        return Ok(ScenarioSpec::builtin(id)?);
    }
    let path = Path::new(id);
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let spec: ScenarioSpec =
        serde_json::from_str(&text).map_err(|e| CliError::input(path, format!("invalid scenario file: {e}")))?;
    spec.validate()?;
    Ok(spec)
}

#[derive(Debug, Serialize)]
pub struct ConsistencyPoint {
    pub n: usize,
    pub median_abs_error: f64,
    pub median_epsilon_hat0: f64,
}

#[derive(Debug, Serialize)]
pub struct ConsistencyResult {
    pub scenario: String,
    pub order: OrderKind,
    pub direction: Direction,
    pub oracle_epsilon0: f64,
    pub runs: usize,
    pub seed: u64,
    pub points: Vec<ConsistencyPoint>,
}

fn run_simulate(mut a: SimulateArgs) -> CliResult<()> {
    if a.full {
        a.runs = 500;
        a.replicates = 2000;
    }
    let scenario = load_scenario(&a.scenario)?;
    match a.mode {
        SimulateMode::Power => {
            let cfg = PowerCurveConfig {
                n: a.n,
                runs: a.runs,
                replicates: a.replicates,
                alpha: a.alpha,
                epsilon_grid: a.epsilon_grid.clone(),
                method: a.method,
                c: a.c,
                seed: a.seed,
                parallelism: a.parallelism(),
            };
            let result = twodsd::power_curve(&scenario, &cfg)?;
            let table = power_table(&result);
            if let Some(dir) = &a.plot_data {
                let meta = PlotMeta {
                    schema_version: SCHEMA_VERSION,
                    kind: "power_curve",
                    tables: vec![PlotTable {
                        file: "power.csv".into(),
                        x: "epsilon",
                        y: vec!["rejection_rate"],
                        log_scale_x: false,
                    }],
                };
                write_plot_data(dir, &meta, &[("power.csv", table.clone())])?;
            }
            emit("simulate", Some(a.seed), &a, &result, &a.output, Some(table))
        }
        SimulateMode::Consistency => {
            if a.n_grid.is_empty() {
                return Err(CliError::Usage("--n-grid must list at least one sample size".into()));
            }
            let oracle = scenario.oracle()?.epsilon0;
            let mut points = Vec::with_capacity(a.n_grid.len());
            for &n in &a.n_grid {
                let est = mvr_estimates(&scenario, n, a.runs, a.seed, a.parallelism())?;
                let mut errors: Vec<f64> = est.iter().map(|e| (e - oracle).abs()).collect();
                let mut est = est;
                points.push(ConsistencyPoint {
                    n,
                    median_abs_error: median(&mut errors),
                    median_epsilon_hat0: median(&mut est),
                });
            }
            let result = ConsistencyResult {
                scenario: scenario.id.clone(),
                order: scenario.order,
                direction: scenario.direction,
                oracle_epsilon0: oracle,
                runs: a.runs,
                seed: a.seed,
                points,
            };
            let table = Table::from_rows(
                &result
                    .points
                    .iter()
                    .map(|p| serde_json::to_value(p).expect("serialisable"))
                    .collect::<Vec<_>>(),
            );
            emit("simulate", Some(a.seed), &a, &result, &a.output, Some(table))
        }
    }
}

pub fn power_table(result: &PowerCurveResult) -> Table {
    let mut t = Table::new(["epsilon", "rejection_rate", "rejections"]);
    for ((e, r), k) in result.epsilon_grid.iter().zip(&result.rejection_rate).zip(&result.rejections) {
        t.push(vec![e.to_string(), r.to_string(), k.to_string()]);
    }
    t
}

#[derive(Debug, Serialize)]
pub struct OracleEntry {
    pub scenario: String,
    pub direction: Direction,
    #[serde(flatten)]
    pub oracle: OracleResult,
    pub published_mvr: Option<f64>,
    /// `|epsilon0 - published_mvr|` when a published value exists.
    pub abs_error: Option<f64>,
}

fn run_oracle(a: &OracleArgs) -> CliResult<()> {
    let ids: Vec<String> = if a.scenario == "all" {
        ScenarioSpec::BUILTIN_IDS.iter().map(|s| s.to_string()).collect()
    } else {
        vec![a.scenario.clone()]
    };
    let mut entries = Vec::with_capacity(ids.len());
    for id in &ids {
        let sc = load_scenario(id)?;
        let oracle = sc.oracle()?;
        entries.push(OracleEntry {
            scenario: sc.id.clone(),
            direction: sc.direction,
            abs_error: sc.published_mvr.map(|p| (oracle.epsilon0 - p).abs()),
            published_mvr: sc.published_mvr,
            oracle,
        });
    }
    let mut table = Table::new(["scenario", "order", "direction", "epsilon0", "signed", "abs", "published_mvr", "abs_error"]);
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for e in &entries {
        table.push(vec![
            e.scenario.clone(),
            e.oracle.order.to_string(),
            direction_name(e.direction).into(),
            e.oracle.epsilon0.to_string(),
            e.oracle.signed.to_string(),
            e.oracle.abs.to_string(),
            opt(e.published_mvr),
            opt(e.abs_error),
        ]);
    }
    emit("oracle", None, a, &entries, &a.output, Some(table))
}

#[derive(Debug, Serialize)]
pub struct DiagnoseOutput {
    pub inputs: [IngestReport; 2],
    pub order: OrderKind,
    pub index: Index2DSD,
    pub mvr: MvrPair,
    pub degenerate: bool,
    pub tail: TailDiagnostics,
    pub rate: RateAndBandwidth,
    pub ties: [usize; 2],
}

fn ties(s: &Sample) -> usize {
    s.values().windows(2).filter(|w| w[0] == w[1]).count()
}

fn run_diagnose(a: &DiagnoseArgs) -> CliResult<()> {
    let pair = load_pair(&a.input)?;
    let idx = index(&pair.x1, &pair.x2, a.order)?;
    let mvr = mvr_pair(&idx);
    let out = DiagnoseOutput {
        order: a.order,
        index: idx,
        degenerate: mvr.first_dominated.degenerate,
        mvr,
        tail: tail_diagnostics(&pair.x1, &pair.x2, a.order)?,
        rate: RateAndBandwidth::new(pair.x1.len(), pair.x2.len(), a.c)?,
        ties: [ties(&pair.x1), ties(&pair.x2)],
        inputs: pair.reports,
    };
    emit("diagnose", None, a, &out, &a.output, None)
}

fn run_sample(a: &SampleArgs) -> CliResult<()> {
    if a.n == 0 {
        return Err(twodsd::Error::EmptySample.into());
    }
    let (spec, stream) = match (&a.scenario, &a.dist) {
        (Some(id), _) => {
            let sc = load_scenario(id)?;
            let spec = if a.population == 1 { sc.pop1 } else { sc.pop2 };
            (spec, u64::from(a.population - 1))
        }
        (None, Some(json)) => {
            let spec: DistributionSpec = serde_json::from_str(json)
                .map_err(|e| CliError::Usage(format!("invalid --dist: {e}")))?;
            (spec, 0)
        }
        (None, None) => return Err(CliError::Usage("give --scenario or --dist".into())),
    };
    spec.validate()?;
    let mut rng = stream_rng(a.seed, MONTE_CARLO_DOMAIN, a.run, stream);
    let values: Vec<f64> = (0..a.n).map(|_| spec.draw(&mut rng)).collect();
    let mut buf = Vec::new();
    write_column_csv(&mut buf, &a.column_name, &values).map_err(|e| CliError::Write {
        path: a.out.clone().unwrap_or_else(|| "<stdout>".into()),
        source: std::io::Error::other(e),
    })?;
    write_text(std::str::from_utf8(&buf).expect("csv output is utf-8"), a.out.as_deref())
}
