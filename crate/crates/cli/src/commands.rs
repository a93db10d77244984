//! Subcommand implementations, independent of argument parsing.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use actor_concepts::baseline::{compare as compare_partitions, hc_average_linkage, Partition};
use actor_concepts::ingest::{
    check_mentions, derive_rps, parse_embeddings, parse_relations, rp_vector_tokens,
};
use actor_concepts::negrid::normalize_surface;
use actor_concepts::similarity::{matrix_dumps, mean_vector};
use actor_concepts::{
    run_pipeline, ComparisonReport, ConceptReport, EmbeddingStore, NeGrid, PipelineOutput,
    ReportFormat, RepresentativePhrase, RpId, VERSION,
};
use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use crate::inputs::{read_config, read_raw, InputPaths, Inputs};
use crate::manifest::{Exclusions, Reproducible, RunManifest, Timing};
use crate::output::OutputBatch;

fn json_text<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub errors: Vec<String>,
    pub mentions: usize,
    pub rps: usize,
    pub embeddings: usize,
    pub embedding_dim: usize,
    pub duplicate_embeddings: Vec<String>,
    pub relations: usize,
    pub chains: usize,
    pub rp_tokens: usize,
    pub oov_tokens: usize,
    /// Share of RP tokens with no vector.
    pub oov_rate: f64,
    pub unembeddable_rps: Vec<String>,
    /// NE surfaces seen in mentions that belong to no chain.
    pub ne_surfaces_without_chain: Vec<String>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.errors.is_empty()
    }

    pub fn render(&self, format: ReportFormat) -> String {
        if format == ReportFormat::Json {
            return json_text(self);
        }
        let mut out = String::new();
        for e in &self.errors {
            let _ = writeln!(out, "error: {e}");
        }
        let _ = writeln!(
            out,
            "mentions: {} ({} representative phrases)",
            self.mentions, self.rps
        );
        let _ = writeln!(
            out,
            "embeddings: {} vectors of dim {}",
            self.embeddings, self.embedding_dim
        );
        if !self.duplicate_embeddings.is_empty() {
            let _ = writeln!(
                out,
                "duplicate embedding rows: {}",
                self.duplicate_embeddings.join(", ")
            );
        }
        let _ = writeln!(
            out,
            "relations: {} links in {} chains",
            self.relations, self.chains
        );
        let _ = writeln!(
            out,
            "OOV rate: {:.4} ({} of {} RP tokens)",
            self.oov_rate, self.oov_tokens, self.rp_tokens
        );
        let _ = writeln!(
            out,
            "unembeddable RPs: {}",
            list_or_none(&self.unembeddable_rps)
        );
        let _ = writeln!(
            out,
            "NE surfaces absent from chains: {}",
            list_or_none(&self.ne_surfaces_without_chain)
        );
        let _ = writeln!(out, "{} errors", self.errors.len());
        out
    }
}

fn list_or_none(items: &[String]) -> String {
    if items.is_empty() {
        "none".to_string()
    } else {
        items.join(", ")
    }
}

fn located(path: &Path, e: impl std::fmt::Display) -> String {
    format!("{}: {e}", path.display())
}

/// Runs every ingest check without clustering. Never fails on bad input;
/// problems land in `errors`.
pub fn validate(paths: &InputPaths) -> ValidationReport {
    let mut report = ValidationReport::default();

    let config = match read_config(paths.config.as_deref()) {
        Ok((cfg, _)) => Some(cfg),
        Err(e) => {
            report.errors.push(format!("{e:#}"));
            None
        }
    };

    let mentions = match read_raw(&paths.mentions) {
        Ok(raw) => {
            let (mentions, errors) = check_mentions(raw.bytes.as_slice());
            report
                .errors
                .extend(errors.iter().map(|e| located(&raw.path, e)));
            if mentions.is_empty() && errors.is_empty() {
                report.errors.push(located(&raw.path, "no mentions"));
            }
            mentions
        }
        Err(e) => {
            report.errors.push(format!("{e:#}"));
            Vec::new()
        }
    };
    report.mentions = mentions.len();

    let store = config.as_ref().and_then(|cfg| {
        report.embedding_dim = cfg.embedding_dim;
        let raw = match read_raw(&paths.embeddings) {
            Ok(raw) => raw,
            Err(e) => {
                report.errors.push(format!("{e:#}"));
                return None;
            }
        };
        match parse_embeddings(raw.bytes.as_slice(), cfg.embedding_dim) {
            Ok(loaded) => {
                report.duplicate_embeddings = loaded.duplicates;
                Some(loaded.store)
            }
            Err(e) => {
                report.errors.push(located(&raw.path, e));
                None
            }
        }
    });
    report.embeddings = store.as_ref().map_or(0, EmbeddingStore::len);

    let relations = match &paths.relations {
        Some(path) => match read_raw(path) {
            Ok(raw) => parse_relations(raw.bytes.as_slice()).unwrap_or_else(|e| {
                report.errors.push(located(&raw.path, e));
                Vec::new()
            }),
            Err(e) => {
                report.errors.push(format!("{e:#}"));
                Vec::new()
            }
        },
        None => Vec::new(),
    };
    report.relations = relations.len();
    let grid = NeGrid::from_relations(&relations, config.as_ref().map_or(1.0, |c| c.wt));
    report.chains = grid.chains().len();

    let rps = match derive_rps(&mentions) {
        Ok(rps) => rps,
        Err(e) => {
            report.errors.push(located(&paths.mentions, e));
            Vec::new()
        }
    };
    report.rps = rps.len();

    if let Some(store) = &store {
        for rp in &rps {
            let n = rp.rp_text.split_whitespace().count();
            let covered: usize = rp_vector_tokens(rp, store)
                .iter()
                .map(|t| t.span.1 - t.span.0)
                .sum();
            report.rp_tokens += n;
            report.oov_tokens += n - covered;
            if covered == 0 {
                report.unembeddable_rps.push(rp.rp_text.clone());
            }
        }
        if report.rp_tokens > 0 {
            report.oov_rate = report.oov_tokens as f64 / report.rp_tokens as f64;
        }
    }

    let surfaces: BTreeSet<String> = mentions
        .iter()
        .flat_map(|m| m.ne_components.iter())
        .map(|c| normalize_surface(&c.surface))
        .filter(|s| !s.is_empty() && !grid.in_any_chain(s))
        .collect();
    report.ne_surfaces_without_chain = surfaces.into_iter().collect();
    report
}

#[derive(Debug, Clone)]
pub struct ClusterRequest {
    pub inputs: InputPaths,
    pub out: PathBuf,
    pub format: ReportFormat,
    pub dump_matrices: Option<PathBuf>,
}

#[derive(Debug)]
pub struct ClusterOutcome {
    pub output: PipelineOutput,
    pub report: ConceptReport,
    pub manifest: RunManifest,
    pub written: Vec<PathBuf>,
}

pub const MANIFEST_FILE: &str = "manifest.json";

pub fn report_file(format: ReportFormat) -> String {
    format!("report.{}", format.extension())
}

fn exclusions(output: &PipelineOutput) -> Exclusions {
    let texts = |ids: &[RpId]| ids.iter().map(|&i| output.rps[i].rp_text.clone()).collect();
    Exclusions {
        unembeddable_rps: texts(&output.bundle.excluded),
        headless_rps: texts(&output.bundle.head_excluded),
    }
}

/// Runs the full pipeline and writes report, optional matrix dumps and the
/// manifest. Nothing is left on disk if any step fails.
pub fn cluster(req: &ClusterRequest) -> Result<ClusterOutcome> {
    let started = Instant::now();
    let inputs = Inputs::load(&req.inputs)?;
    let output = run_pipeline(
        &inputs.mentions,
        &inputs.store,
        &inputs.relations,
        &inputs.config,
    )?;
    let report = ConceptReport::build(&output.clusters, &output.rps, &inputs.mentions);

    let mut files: Vec<(PathBuf, String, String)> = Vec::new();
    let report_name = report_file(req.format);
    files.push((
        req.out.join(&report_name),
        report_name,
        report.render(req.format),
    ));
    if let Some(dir) = &req.dump_matrices {
        for (name, body) in matrix_dumps(&output.bundle, &output.rps) {
            files.push((dir.join(name), name.to_string(), body));
        }
    }
    let outputs: BTreeMap<String, String> = files
        .iter()
        .map(|(_, name, body)| (name.clone(), crate::inputs::sha256_hex(body.as_bytes())))
        .collect();

    let run = Reproducible {
        engine_version: VERSION.to_string(),
        inputs: inputs.digests.clone(),
        config: inputs.config.clone(),
        counts: output.counts(),
        exclusions: exclusions(&output),
        outputs,
    };
    let timing = Timing {
        threads: rayon::current_num_threads(),
        stages: output.timings.clone(),
        total_seconds: started.elapsed().as_secs_f64(),
    };
    let manifest = RunManifest::new(run, timing);
    files.push((
        req.out.join(MANIFEST_FILE),
        MANIFEST_FILE.to_string(),
        manifest.to_json(),
    ));

    let mut batch = OutputBatch::new();
    for (path, _, body) in &files {
        batch
            .write(path, body.as_bytes())
            .with_context(|| format!("cannot write {}", path.display()))?;
    }
    log::info!("wrote {} files", batch.written().len());
    Ok(ClusterOutcome {
        output,
        report,
        manifest,
        written: batch.commit(),
    })
}

/// Mean vectors of every embeddable RP, the input of the HC baseline.
pub fn baseline_points(
    rps: &[RepresentativePhrase],
    store: &EmbeddingStore,
) -> Vec<(RpId, Vec<f64>)> {
    rps.iter()
        .filter_map(|r| mean_vector(r, store).map(|v| (r.rp_id, v)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineReport {
    pub distance_thr: f64,
    /// RP texts per cluster, clusters ordered by smallest rp_id.
    pub clusters: Vec<Vec<String>>,
    /// Unclustered RPs, including those without any vector.
    pub not: Vec<String>,
    pub unclustered_fraction: f64,
}

impl BaselineReport {
    pub fn render(&self, format: ReportFormat) -> String {
        if format == ReportFormat::Json {
            return json_text(self);
        }
        let mut out = String::new();
        for (i, c) in self.clusters.iter().enumerate() {
            let _ = writeln!(out, "[{i}] {}", c.join(", "));
        }
        let _ = writeln!(out, "NOT — {}", self.not.join(", "));
        out
    }
}

fn load_for_baseline(paths: &InputPaths) -> Result<(Inputs, Vec<RepresentativePhrase>)> {
    let inputs = Inputs::load(paths)?;
    if inputs.mentions.is_empty() {
        bail!(actor_concepts::Error::NoMentions);
    }
    let rps = derive_rps(&inputs.mentions)?;
    Ok((inputs, rps))
}

pub fn baseline(paths: &InputPaths, distance_thr: Option<f64>) -> Result<BaselineReport> {
    let (inputs, rps) = load_for_baseline(paths)?;
    let thr = distance_thr.unwrap_or(inputs.config.hc_distance_thr);
    let points = baseline_points(&rps, &inputs.store);
    let hc = hc_average_linkage(&points, thr)?;
    let text = |id: &RpId| rps[*id].rp_text.clone();
    let clustered: BTreeSet<RpId> = hc.clusters.iter().flatten().copied().collect();
    let not: Vec<String> = rps
        .iter()
        .filter(|r| !clustered.contains(&r.rp_id))
        .map(|r| r.rp_text.clone())
        .collect();
    Ok(BaselineReport {
        distance_thr: thr,
        clusters: hc
            .clusters
            .iter()
            .map(|c| c.iter().map(text).collect())
            .collect(),
        unclustered_fraction: not.len() as f64 / rps.len() as f64,
        not,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub distance_thr: f64,
    #[serde(flatten)]
    pub stats: ComparisonReport,
    /// RPs the pipeline clusters but the baseline leaves out.
    pub rescued: Vec<String>,
    /// RPs the baseline clusters but the pipeline leaves out.
    pub dropped: Vec<String>,
}

impl Comparison {
    pub fn render(&self, format: ReportFormat) -> String {
        if format == ReportFormat::Json {
            return json_text(self);
        }
        let s = &self.stats;
        let mut out = String::new();
        let _ = writeln!(out, "RPs compared: {}", s.universe_size);
        let _ = writeln!(
            out,
            "clusters: pipeline {}, baseline {}",
            s.ours_clusters, s.baseline_clusters
        );
        let _ = writeln!(
            out,
            "unclustered: pipeline {:.4}, baseline {:.4} (distance threshold {})",
            s.ours_unclustered_fraction, s.baseline_unclustered_fraction, self.distance_thr
        );
        let _ = writeln!(out, "pair agreement: {:.4}", s.agreement);
        let _ = writeln!(
            out,
            "clustered only by the pipeline: {}",
            list_or_none(&self.rescued)
        );
        let _ = writeln!(
            out,
            "clustered only by the baseline: {}",
            list_or_none(&self.dropped)
        );
        out
    }
}

/// Pipeline against the HC baseline over the RPs both can place.
pub fn compare(paths: &InputPaths, distance_thr: Option<f64>) -> Result<Comparison> {
    let (inputs, rps) = load_for_baseline(paths)?;
    let thr = distance_thr.unwrap_or(inputs.config.hc_distance_thr);
    let output = run_pipeline(
        &inputs.mentions,
        &inputs.store,
        &inputs.relations,
        &inputs.config,
    )?;
    let hc = hc_average_linkage(&baseline_points(&rps, &inputs.store), thr)?;
    // unembeddable RPs are never clustered, so the HC universe covers both
    let ours = Partition::from_clusters(&output.clusters, hc.universe());
    let stats = compare_partitions(&ours, &hc)?;
    let texts = |a: &Partition, b: &Partition| -> Vec<String> {
        b.unclustered
            .iter()
            .filter(|r| !a.unclustered.contains(r))
            .map(|&r| rps[r].rp_text.clone())
            .collect()
    };
    Ok(Comparison {
        distance_thr: thr,
        rescued: texts(&ours, &hc),
        dropped: texts(&hc, &ours),
        stats,
    })
}
