//! Subcommand implementations.

use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde_json::json;
use situ_core::approach::{
    detect_members, detect_sgf, detect_sgv, ApproachConfig, ApproachOutput, ApproachStats, Direction,
};
use situ_core::graph::bgf::{load_sgf, load_sgv, SgfFile, SgvFile};
use situ_core::graph::build::{build_models, BuildConfig, BuiltModels, EdgeType, ModelKind};
use situ_core::graph::idf::{idf_bytes, Idf};
use situ_core::graph::mgv::{BalanceBy, MgvParams};
use situ_core::groups::{
    baseline_sgf, f1_against_baseline, gc_heuristic, histogram_of_objects, vertex_traversal,
    vertex_traversal_members, ClusterOutput, GroupStats, HeuristicConfig, SizeQuery,
};
use situ_core::rpp::{
    cct, cct_join, cjoin, direction_column, r2a, CctOption, JoinCondition, RppRelation,
};
use situ_core::synth::{generate_files, presets, GroundTruth, ScenarioSpec};
use situ_core::trace::{parse_rdf, Trace};
use situ_core::{Error, Result};

use crate::args::{
    ApproachArgs, BuildArgs, GenTraceArgs, GroupArgs, InputArgs, MgvArgs, OutputArgs, Preset,
    ReportArgs, RppArgs,
};
use crate::report::{approach_incidences, f1_of_sets, Report, RunDoc, StatsDoc};

/// Member-graph bound used when a partitioned model is needed and neither
/// `--max-graph` nor `--min-graph-size` is given.
const DEFAULT_MAX_GRAPH: u64 = 4;

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn print_json(v: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("JSON value serialises"));
}

/// File name without its final extension.
fn stem_of(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "trace".into())
}

fn paths_json(paths: &[PathBuf]) -> Vec<String> {
    paths.iter().map(|p| p.display().to_string()).collect()
}

// ---------------------------------------------------------------- gen-trace

fn preset_spec(preset: Preset, a: &GenTraceArgs) -> ScenarioSpec {
    match preset {
        Preset::RandomGroups => presets::random_groups(a.seed, a.frames, a.objects),
        Preset::StableGroups => presets::stable_groups(a.seed, a.frames),
        Preset::OneGroup => presets::one_group_among_six(a.frames),
        Preset::SparseGroup => presets::sparse_largest_group(a.seed, a.frames, (a.frames / 100).max(1)),
        Preset::PairEvents => presets::pair_events(a.seed, a.windows, a.sigma),
        Preset::Wanderers => presets::wanderers(a.seed, a.frames, a.objects),
    }
}

pub fn gen_trace(a: &GenTraceArgs) -> Result<()> {
    let (spec, default_stem) = match (&a.spec, a.preset) {
        (Some(p), _) => (ScenarioSpec::load(p)?, stem_of(p)),
        (None, Some(preset)) => (
            preset_spec(preset, a),
            preset.to_possible_value().expect("named preset").get_name().to_string(),
        ),
        (None, None) => return Err(Error::Config("give --spec or --preset".into())),
    };
    let stem = a.stem.clone().unwrap_or(default_stem);
    std::fs::create_dir_all(&a.out).map_err(|e| Error::io(&a.out, e))?;
    if let Some(p) = &a.save_spec {
        write_text(p, &(serde_json::to_string_pretty(&spec)? + "\n"))?;
    }
    let (trace, gt) = generate_files(&spec, a.seed, &a.out, &stem)?;
    print_json(&json!({
        "rdf": a.out.join(format!("{stem}.rdf")).display().to_string(),
        "ground_truth": a.out.join(format!("{stem}.gt.json")).display().to_string(),
        "frames": trace.chars.frame_count,
        "objects": trace.meta.uo,
        "instances": trace.meta.oi,
        "planted_groups": gt.groups.len(),
        "planted_approaches": gt.approaches.len(),
        "planted_retreats": gt.retreats.len(),
    }));
    Ok(())
}

// ------------------------------------------------------------- build-graphs

fn apply_mgv(cfg: &mut BuildConfig, m: &MgvArgs, trace: &Trace) -> Result<()> {
    let balance: BalanceBy = m.balance_by.parse()?;
    let min = match m.min_graph_size {
        Some(n) => n,
        None => {
            MgvParams::for_max_graph(
                balance,
                m.max_graph.unwrap_or(DEFAULT_MAX_GRAPH),
                trace.chars.frame_count,
                trace.meta.uo as u64,
            )
            .min_graph_size
        }
    };
    *cfg = cfg.clone().with_mgv(balance, min);
    Ok(())
}

fn build(trace: &Trace, model: ModelKind, edge: Option<EdgeType>, m: &MgvArgs) -> Result<BuiltModels> {
    let mut cfg = BuildConfig::new(model);
    cfg.edge_type = edge;
    cfg.th_track = m.th_track;
    if matches!(model, ModelKind::Mgv | ModelKind::All) {
        apply_mgv(&mut cfg, m, trace)?;
    }
    build_models(trace, &cfg)
}

fn sgv_counts(files: &[SgvFile]) -> serde_json::Value {
    json!({
        "graphs": files.len(),
        "nodes": files.iter().map(|f| f.graph.nodes.len()).sum::<usize>(),
        "edges": files.iter().map(|f| f.graph.edges.len()).sum::<usize>(),
        "components": files.iter().map(|f| f.characteristics.components).sum::<usize>(),
    })
}

pub fn build_graphs(a: &BuildArgs) -> Result<()> {
    let trace = parse_rdf(&a.rdf)?;
    let model: ModelKind = a.model.parse()?;
    let edge = a.edge_type.as_deref().map(str::parse).transpose()?;
    let built = build(&trace, model, edge, &a.mgv)?;
    let stem = a.stem.clone().unwrap_or_else(|| stem_of(&a.rdf));
    std::fs::create_dir_all(&a.out).map_err(|e| Error::io(&a.out, e))?;
    let paths = built.write(&a.out, &stem)?;
    let mut summary = json!({ "files": paths_json(&paths), "checkpoints": built.checkpoints });
    if let Some(f) = &built.sgf {
        summary["sgf"] = json!({
            "graphs": f.set.graphs.len(),
            "nodes": f.set.total_nodes(),
            "edges": f.set.total_edges(),
        });
    }
    if let Some(f) = &built.sgv {
        summary["sgv"] = sgv_counts(std::slice::from_ref(f));
    }
    if built.mgv.is_some() {
        summary["mgv"] = sgv_counts(&built.mgv_files());
    }
    print_json(&summary);
    Ok(())
}

// ------------------------------------------------------------ model loading

/// Everything a detection run can read.
struct Models {
    idf: Idf,
    sgf: Option<SgfFile>,
    sgv: Option<SgvFile>,
    mgv: Vec<SgvFile>,
}

impl Models {
    fn sgf(&self) -> Result<&SgfFile> {
        self.sgf.as_ref().ok_or_else(|| Error::Config("the per-frame model is not loaded".into()))
    }
    fn sgv(&self) -> Result<&SgvFile> {
        self.sgv.as_ref().ok_or_else(|| Error::Config("the per-video model is not loaded".into()))
    }
    fn mgv(&self) -> Result<&[SgvFile]> {
        if self.mgv.is_empty() {
            return Err(Error::Config("the partitioned model is not loaded".into()));
        }
        Ok(&self.mgv)
    }
}

fn load_models(input: &InputArgs, needed: &[ModelKind], m: &MgvArgs) -> Result<Models> {
    match (&input.rdf, &input.models) {
        (Some(rdf), _) => {
            let trace = parse_rdf(rdf)?;
            let frames: Vec<_> = trace.frames.iter().filter(|f| !f.records.is_empty()).cloned().collect();
            let mut models = Models {
                idf: Idf::from_bytes(idf_bytes(&trace.chars, &frames)?)?,
                sgf: None,
                sgv: None,
                mgv: Vec::new(),
            };
            for &kind in needed {
                let built = build(&trace, kind, None, m)?;
                match kind {
                    ModelKind::Sgf => models.sgf = built.sgf,
                    ModelKind::Sgv => models.sgv = built.sgv,
                    ModelKind::Mgv => models.mgv = built.mgv_files(),
                    ModelKind::All => {}
                }
            }
            Ok(models)
        }
        (None, Some(dir)) => {
            let stem = match &input.stem {
                Some(s) => s.clone(),
                None => only_idf_stem(dir)?,
            };
            let mut models = Models {
                idf: Idf::open(dir.join(format!("{stem}.idf")))?,
                sgf: None,
                sgv: None,
                mgv: Vec::new(),
            };
            for &kind in needed {
                match kind {
                    ModelKind::Sgf => models.sgf = Some(load_sgf(dir.join(format!("{stem}.sgf.bgf")))?),
                    ModelKind::Sgv => models.sgv = Some(load_sgv(dir.join(format!("{stem}.sgv.bgf")))?),
                    ModelKind::Mgv => models.mgv = load_members(dir, &stem)?,
                    ModelKind::All => {}
                }
            }
            Ok(models)
        }
        (None, None) => Err(Error::Config("give --rdf or --models".into())),
    }
}

fn only_idf_stem(dir: &Path) -> Result<String> {
    let mut stems = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.extension().is_some_and(|x| x == "idf") {
            stems.push(stem_of(&path));
        }
    }
    match stems.as_slice() {
        [one] => Ok(one.clone()),
        [] => Err(Error::Config(format!("no data file in {}", dir.display()))),
        _ => Err(Error::Config(format!(
            "several data files in {}; choose one with --stem",
            dir.display()
        ))),
    }
}

fn load_members(dir: &Path, stem: &str) -> Result<Vec<SgvFile>> {
    let prefix = format!("{stem}.mgv.");
    let mut indexed = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        if let Some(i) = name
            .strip_prefix(&prefix)
            .and_then(|r| r.strip_suffix(".bgf"))
            .and_then(|i| i.parse::<usize>().ok())
        {
            indexed.push((i, path));
        }
    }
    if indexed.is_empty() {
        return Err(Error::Config(format!(
            "no partitioned model files {prefix}*.bgf in {}",
            dir.display()
        )));
    }
    indexed.sort();
    indexed.into_iter().map(|(_, p)| load_sgv(p)).collect()
}

fn parse_model(s: &str) -> Result<ModelKind> {
    match s.parse()? {
        ModelKind::All => Err(Error::Config("detection runs on one model: sgf, sgv or mgv".into())),
        m => Ok(m),
    }
}

fn finish_output(o: &OutputArgs, result_json: &str, report: &Report) -> Result<()> {
    if let Some(p) = &o.out {
        write_text(p, result_json)?;
    }
    if let Some(p) = &o.report {
        write_text(p, &report.render(crate::args::Format::Json))?;
    }
    print!("{}", report.render(o.format));
    Ok(())
}

// ------------------------------------------------------------ detect-groups

fn run_groups(
    m: &Models,
    model: ModelKind,
    algorithm: &str,
    query: SizeQuery,
    heuristic: Option<HeuristicConfig>,
    cl: Option<&str>,
    threads: Option<usize>,
) -> Result<(ClusterOutput, RunDoc)> {
    let (output, stats, per_graph) = match (model, algorithm) {
        (ModelKind::Sgf, "ho") => {
            let r = histogram_of_objects(m.sgf()?, &m.idf, query, cl)?;
            (r.output, r.stats, Vec::new())
        }
        (ModelKind::Sgf, "gc") => {
            let h = heuristic.ok_or_else(|| Error::Config("gc needs a heuristic".into()))?;
            let r = gc_heuristic(m.sgf()?, &m.idf, query, h, cl, false)?;
            (r.output, r.stats, Vec::new())
        }
        (ModelKind::Sgf, "baseline") => {
            let r = baseline_sgf(m.sgf()?, &m.idf, query, cl)?;
            (r.output, r.stats, Vec::new())
        }
        (ModelKind::Sgv, "vt" | "baseline") => {
            let r = vertex_traversal(m.sgv()?, &m.idf, query, cl, algorithm == "baseline")?;
            (r.output, r.stats, Vec::new())
        }
        (ModelKind::Mgv, "vt" | "baseline") => {
            let (out, results) =
                vertex_traversal_members(m.mgv()?, &m.idf, query, cl, algorithm == "baseline", threads)?;
            let per: Vec<GroupStats> = results.into_iter().map(|r| r.stats).collect();
            (out, GroupStats::total(&per), per)
        }
        (model, alg) => {
            return Err(Error::Config(format!(
                "algorithm {alg:?} is not available on model {model} (sgf: ho, gc, baseline; sgv/mgv: vt, baseline)"
            )))
        }
    };
    let doc = RunDoc {
        model: model.to_string(),
        algorithm: algorithm.to_string(),
        results: output.entries.len(),
        instances: output.frames().len(),
        k: None,
        stats: StatsDoc::from(&stats),
        per_graph: per_graph.iter().map(StatsDoc::from).collect(),
    };
    Ok((output, doc))
}

pub fn detect_groups(a: &GroupArgs, threads: Option<usize>) -> Result<()> {
    let model = parse_model(&a.model)?;
    let algorithm = a
        .algorithm
        .clone()
        .unwrap_or_else(|| if model == ModelKind::Sgf { "ho" } else { "vt" }.into())
        .to_ascii_lowercase();
    let query = SizeQuery::new(a.s, a.p.parse()?)?;
    let heuristic = match algorithm.as_str() {
        "gc" => Some(HeuristicConfig::parse(&a.heuristic, a.threshold, a.alpha)?),
        _ => None,
    };
    let baseline = match a.baseline.to_ascii_lowercase().as_str() {
        "none" => None,
        "sgf" => Some((ModelKind::Sgf, "baseline")),
        "sgv-vt" | "sgv" => Some((ModelKind::Sgv, "baseline")),
        "mgv-vt" | "mgv" => Some((ModelKind::Mgv, "baseline")),
        other => {
            return Err(Error::Config(format!(
                "unknown baseline {other:?} (none, sgf, sgv-vt, mgv-vt)"
            )))
        }
    };
    let mut needed = vec![model];
    if let Some((b, _)) = baseline {
        if b != model {
            needed.push(b);
        }
    }
    let models = load_models(&a.input, &needed, &a.mgv)?;
    let cl = a.class.as_deref();
    let (output, candidate) = run_groups(&models, model, &algorithm, query, heuristic, cl, threads)?;

    let (base_output, base_doc) = match (baseline, &a.baseline_file) {
        (_, Some(p)) => (Some(ClusterOutput::from_json(&read_text(p)?)?), None),
        (Some((b, alg)), None) => {
            let (o, d) = run_groups(&models, b, alg, query, None, cl, threads)?;
            (Some(o), Some(d))
        }
        (None, None) => (None, None),
    };
    let report = Report {
        kind: "groups".into(),
        query: format!("s={} p={}", query.s, query.p),
        candidate,
        baseline: base_doc,
        f1: base_output.as_ref().map(|b| f1_against_baseline(&output, b)),
        identical: base_output.as_ref().map(|b| &output == b),
        planted: None,
    };
    finish_output(&a.output, &output.to_json()?, &report)
}

// ---------------------------------------------------------- detect-approach

fn run_approach(
    m: &Models,
    model: ModelKind,
    cfg: &ApproachConfig,
    cl: Option<&str>,
    threads: Option<usize>,
) -> Result<(ApproachOutput, RunDoc)> {
    let (output, k, stats, per_graph) = match model {
        ModelKind::Sgf => {
            let r = detect_sgf(m.sgf()?, cfg, cl)?;
            (r.output, r.k, r.stats, Vec::new())
        }
        ModelKind::Sgv => {
            let r = detect_sgv(m.sgv()?, &m.idf, cfg, cl)?;
            (r.output, r.k, r.stats, Vec::new())
        }
        _ => {
            let (out, results) = detect_members(m.mgv()?, &m.idf, cfg, cl, threads)?;
            let k = results.first().map_or(0, |r| r.k);
            let per: Vec<ApproachStats> = results.into_iter().map(|r| r.stats).collect();
            let mut total = ApproachStats::default();
            for s in &per {
                total.fetches += s.fetches;
                total.comparisons += s.comparisons;
                total.fetch_time += s.fetch_time;
                total.compute_time += s.compute_time;
                total.traversal_time += s.traversal_time;
            }
            (out, k, total, per)
        }
    };
    let doc = RunDoc {
        model: model.to_string(),
        algorithm: "approach".into(),
        results: output.pairs.len(),
        instances: output.count_instances(),
        k: Some(k),
        stats: StatsDoc::from(&stats),
        per_graph: per_graph.iter().map(StatsDoc::from).collect(),
    };
    Ok((output, doc))
}

pub fn detect_approach(a: &ApproachArgs, threads: Option<usize>) -> Result<()> {
    let model = parse_model(&a.model)?;
    let cfg = ApproachConfig::new(a.direction.parse()?, a.epsilon, a.k.parse()?)?;
    let baseline = match a.baseline.to_ascii_lowercase().as_str() {
        "none" => None,
        other => Some(parse_model(other)?),
    };
    let planted = match &a.ground_truth {
        Some(p) => {
            let gt = GroundTruth::from_json(&read_text(p)?)?;
            Some(match cfg.direction {
                Direction::MovingCloser => gt.approaches.len(),
                Direction::FarApart => gt.retreats.len(),
            })
        }
        None => None,
    };
    let mut needed = vec![model];
    if let Some(b) = baseline.filter(|b| *b != model) {
        needed.push(b);
    }
    let models = load_models(&a.input, &needed, &a.mgv)?;
    let cl = a.class.as_deref();
    let (output, candidate) = run_approach(&models, model, &cfg, cl, threads)?;
    let base = baseline
        .map(|b| run_approach(&models, b, &cfg, cl, threads))
        .transpose()?;
    let report = Report {
        kind: "approach".into(),
        query: format!("direction={} epsilon={} k={}", cfg.direction, cfg.epsilon, cfg.k_mode),
        candidate,
        f1: base
            .as_ref()
            .map(|(b, _)| f1_of_sets(&approach_incidences(&output), &approach_incidences(b))),
        identical: base.as_ref().map(|(b, _)| &output == b),
        baseline: base.map(|(_, d)| d),
        planted,
    };
    finish_output(&a.output, &output.to_json()?, &report)
}

// ---------------------------------------------------------------------- rpp

fn load_relation(json: &Option<PathBuf>, rdf: &Option<PathBuf>) -> Result<Option<RppRelation>> {
    match (json, rdf) {
        (Some(p), _) => Ok(Some(RppRelation::load(p)?)),
        (None, Some(p)) => Ok(Some(RppRelation::from_trace(&parse_rdf(p)?)?)),
        (None, None) => Ok(None),
    }
}

pub fn rpp(a: &RppArgs) -> Result<()> {
    let left = load_relation(&a.relation, &a.rdf)?
        .ok_or_else(|| Error::Config("give --relation or --rdf".into()))?;
    let right = load_relation(&a.join_relation, &a.join_rdf)?;
    let cct_option: Option<CctOption> = a.cct.as_deref().map(str::parse).transpose()?;
    let (relation, comparisons) = match (&a.gba, &a.aoa) {
        (Some(gba), Some(aoa)) => {
            let arel = r2a(&left, gba, aoa)?;
            if let Some(right) = right {
                let rarel = r2a(&right, gba, aoa)?;
                let mut cond = JoinCondition::similar(
                    &a.on,
                    a.right_on.as_deref().unwrap_or(&a.on),
                    a.metric.parse()?,
                    a.th,
                );
                cond.op = a.op.parse()?;
                let joined = match cct_option {
                    Some(opt) => cct_join(&arel, &rarel, opt, &cond)?,
                    None => cjoin(&arel, &rarel, &cond)?,
                };
                (joined.relation, Some(joined.comparisons))
            } else if let Some(col) = &a.direction {
                let arel = match cct_option {
                    None => arel,
                    Some(CctOption::Both) => match cct(&arel, CctOption::Both)? {
                        situ_core::rpp::CctOutput::Arrable(x) => x,
                        situ_core::rpp::CctOutput::Flat(_) => unreachable!("both keeps sequences"),
                    },
                    Some(_) => {
                        return Err(Error::Config(
                            "--direction needs sequences; combine it with --cct both or no compression".into(),
                        ))
                    }
                };
                (direction_column(&arel, col, a.i, a.j, a.eps)?, None)
            } else if let Some(opt) = cct_option {
                (cct(&arel, opt)?.relation().clone(), None)
            } else {
                (arel.relation, None)
            }
        }
        _ => {
            if right.is_some() || a.direction.is_some() || cct_option.is_some() {
                return Err(Error::Config(
                    "compression, joins and --direction need --gba and --aoa".into(),
                ));
            }
            (left, None)
        }
    };
    let text = relation.to_json()?;
    match &a.out {
        Some(p) => {
            write_text(p, &text)?;
            let mut summary = json!({
                "out": p.display().to_string(),
                "rows": relation.rows.len(),
                "columns": relation.schema.iter().map(|c| c.name.clone()).collect::<Vec<_>>(),
            });
            if let Some(c) = comparisons {
                summary["comparisons"] = json!(c);
            }
            print_json(&summary);
        }
        None => print!("{text}"),
    }
    Ok(())
}

// ------------------------------------------------------------------- report

fn bare_run(results: usize, instances: usize) -> RunDoc {
    RunDoc {
        model: "-".into(),
        algorithm: "-".into(),
        results,
        instances,
        k: None,
        stats: StatsDoc::default(),
        per_graph: Vec::new(),
    }
}

fn run_from_report(path: &Option<PathBuf>) -> Result<Option<(String, RunDoc)>> {
    match path {
        Some(p) => {
            let r: Report = serde_json::from_str(&read_text(p)?)?;
            Ok(Some((r.query, r.candidate)))
        }
        None => Ok(None),
    }
}

pub fn report(a: &ReportArgs) -> Result<()> {
    let cand_text = read_text(&a.candidate)?;
    let base_text = read_text(&a.baseline)?;
    let is_approach = |t: &str| -> Result<bool> {
        Ok(serde_json::from_str::<serde_json::Value>(t)?.get("pairs").is_some())
    };
    let (kind, f1, identical, cand, base) = match (is_approach(&cand_text)?, is_approach(&base_text)?) {
        (true, true) => {
            let c = ApproachOutput::from_json(&cand_text)?;
            let b = ApproachOutput::from_json(&base_text)?;
            (
                "approach",
                f1_of_sets(&approach_incidences(&c), &approach_incidences(&b)),
                c == b,
                bare_run(c.pairs.len(), c.count_instances()),
                bare_run(b.pairs.len(), b.count_instances()),
            )
        }
        (false, false) => {
            let c = ClusterOutput::from_json(&cand_text)?;
            let b = ClusterOutput::from_json(&base_text)?;
            (
                "groups",
                f1_against_baseline(&c, &b),
                c == b,
                bare_run(c.entries.len(), c.frames().len()),
                bare_run(b.entries.len(), b.frames().len()),
            )
        }
        _ => {
            return Err(Error::Validation(
                "candidate and baseline are results of different kinds".into(),
            ))
        }
    };
    let cand_run = run_from_report(&a.candidate_report)?;
    let base_run = run_from_report(&a.baseline_report)?;
    let report = Report {
        kind: kind.into(),
        query: cand_run.as_ref().map_or_else(|| "-".into(), |(q, _)| q.clone()),
        candidate: cand_run.map_or(cand, |(_, r)| r),
        baseline: Some(base_run.map_or(base, |(_, r)| r)),
        f1: Some(f1),
        identical: Some(identical),
        planted: None,
    };
    print!("{}", report.render(a.format));
    Ok(())
}
