use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fem::{solve_robin, Mesh, SourceSpec};
use crate::geometry::{AsymmetryOptions, Domain};
use crate::levelset::{fem_residuals, LevelGrid};
use crate::radial::RadialSolution;
use crate::rearrange::DecreasingProfile;
use crate::verify::{check_isoperimetric, check_theorem, DomainStudy, Theorem, TheoremReport};

use super::config::{DomainEntry, RunConfig};

/// One checker invocation.
#[derive(Clone, Debug, PartialEq)]
pub struct Job {
    pub index: usize,
    pub domain: usize,
    pub theorem: Theorem,
    pub beta: f64,
    pub source: String,
    pub k: Option<f64>,
}

/// Jobs in report order: domain, β, theorem, source, k.
pub fn plan_jobs(cfg: &RunConfig) -> Vec<Job> {
    let mut jobs = Vec::new();
    for d in 0..cfg.domains.len() {
        for &beta in &cfg.betas {
            for &theorem in &cfg.theorems {
                let sources: Vec<String> = if theorem == Theorem::BosselDaners {
                    vec!["none".to_string()]
                } else if theorem.constant_source_only() {
                    vec!["constant".to_string()]
                } else {
                    cfg.sources.clone()
                };
                for source in sources {
                    let ks: Vec<Option<f64>> = if theorem.uses_k() {
                        cfg.ks.iter().map(|k| Some(*k)).collect()
                    } else {
                        vec![None]
                    };
                    for k in ks {
                        jobs.push(Job {
                            index: jobs.len(),
                            domain: d,
                            theorem,
                            beta,
                            source: source.clone(),
                            k,
                        });
                    }
                }
            }
        }
    }
    jobs
}

/// Flattened report; failed jobs carry `status = error` and `na` numeric cells.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResultRow {
    pub job: usize,
    pub config_hash: String,
    pub theorem: Theorem,
    pub domain: String,
    pub beta: f64,
    pub k: Option<f64>,
    pub source: String,
    pub report: Option<TheoremReport>,
    pub error: Option<String>,
}

impl ResultRow {
    pub fn pass(&self) -> bool {
        self.report.as_ref().is_some_and(|r| r.pass)
    }

    pub fn status(&self) -> &'static str {
        match &self.report {
            None => "error",
            Some(r) if r.pass => "pass",
            Some(_) => "fail",
        }
    }
}

/// Table columns, in order.
pub const COLUMNS: [&str; 18] = [
    "job",
    "config_hash",
    "theorem",
    "domain",
    "beta",
    "k",
    "source",
    "h",
    "lhs_gap",
    "alpha",
    "constant",
    "power",
    "rhs",
    "margin",
    "error",
    "pass",
    "status",
    "notes",
];

fn num(x: f64) -> String {
    format!("{x:.12e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_else(|| "na".into())
}

impl ResultRow {
    pub fn to_tsv(&self) -> String {
        let r = self.report.as_ref();
        let notes = match (&self.error, r) {
            (Some(e), _) => e.clone(),
            (None, Some(r)) if !r.notes.is_empty() => r.notes.join("; "),
            _ => "none".into(),
        };
        let cells = [
            self.job.to_string(),
            self.config_hash.clone(),
            self.theorem.to_string(),
            self.domain.clone(),
            num(self.beta),
            opt(self.k),
            self.source.clone(),
            opt(r.map(|r| r.h)),
            opt(r.map(|r| r.lhs_gap)),
            opt(r.map(|r| r.alpha)),
            opt(r.map(|r| r.constant)),
            r.map(|r| r.power.to_string()).unwrap_or_else(|| "na".into()),
            opt(r.map(|r| r.rhs)),
            opt(r.map(|r| r.margin)),
            opt(r.map(|r| r.error)),
            self.pass().to_string(),
            self.status().to_string(),
            notes.replace(['\t', '\n'], " "),
        ];
        cells.join("\t")
    }
}

/// Per-domain geometry summary.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DomainSummary {
    pub domain: String,
    pub alpha: Option<f64>,
    pub deficit: Option<f64>,
    pub gamma_star: Option<f64>,
    pub isoperimetric_pass: bool,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOutput {
    pub config_hash: String,
    pub rows: Vec<ResultRow>,
    pub domains: Vec<DomainSummary>,
}

impl RunOutput {
    pub fn all_pass(&self) -> bool {
        !self.rows.is_empty() && self.rows.iter().all(ResultRow::pass)
    }
}

fn asymmetry_opts(cfg: &RunConfig) -> AsymmetryOptions {
    AsymmetryOptions {
        seed: cfg.seed,
        ..AsymmetryOptions::default()
    }
}

fn build_study(entry: &DomainEntry, cfg: &RunConfig) -> Result<DomainStudy> {
    let opts = asymmetry_opts(cfg);
    let mut base = match &entry.mesh {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            Mesh::from_text(&text)?
        }
        None => crate::fem::generate_mesh(&entry.domain, cfg.h)?,
    };
    for _ in 1..cfg.refinements {
        base = base.refine()?;
    }
    DomainStudy::from_mesh(&entry.domain, base, opts)
}

/// Fraction of levels where the level-set inequality holds at relative tolerance 10h, f ≡ 1.
fn levelset_fraction(study: &DomainStudy, beta: f64, levels: usize) -> Result<f64> {
    let mesh: &Arc<Mesh> = study.fine();
    let u = solve_robin(mesh, &SourceSpec::Constant(1.0), beta)?;
    let rs = RadialSolution::constant_source(mesh.area(), 2, beta, 1.0)?;
    let grid = LevelGrid::new(&u, rs.v_m(), levels)?;
    let fstar = DecreasingProfile::constant(1.0, mesh.area())?;
    let report = fem_residuals(&u, &fstar, beta, &grid, None)?;
    Ok(report.fraction_satisfied(10.0 * mesh.h()))
}

fn run_job(job: &Job, study: &DomainStudy, cfg: &RunConfig) -> Result<TheoremReport> {
    let f = match job.source.as_str() {
        "none" => SourceSpec::Constant(1.0),
        name => SourceSpec::from_name(name)?,
    };
    let mut r = check_theorem(study, job.theorem, &f, job.beta, job.k.unwrap_or(1.0), cfg.gamma2)?;
    if job.theorem == Theorem::Pointwise {
        r.diagnostics
            .insert("levelset_fraction".into(), levelset_fraction(study, job.beta, cfg.tgrid)?);
    }
    Ok(r)
}

/// Runs every job; a failing job becomes an error row and never aborts the batch.
pub fn run_experiments(cfg: &RunConfig) -> RunOutput {
    let hash = cfg.hash();
    let studies: Vec<std::result::Result<DomainStudy, String>> = cfg
        .domains
        .par_iter()
        .map(|d| build_study(d, cfg).map_err(|e| e.to_string()))
        .collect();
    let domains = cfg
        .domains
        .par_iter()
        .zip(&studies)
        .map(|(entry, st)| summarize(&entry.domain, entry, st, cfg))
        .collect();
    let rows = plan_jobs(cfg)
        .par_iter()
        .map(|job| {
            let entry = &cfg.domains[job.domain];
            let outcome = match &studies[job.domain] {
                Ok(st) => run_job(job, st, cfg).map_err(|e| e.to_string()),
                Err(e) => Err(e.clone()),
            };
            let (report, error) = match outcome {
                Ok(r) => (Some(r), None),
                Err(e) => (None, Some(e)),
            };
            ResultRow {
                job: job.index,
                config_hash: hash.clone(),
                theorem: job.theorem,
                domain: entry.label(),
                beta: job.beta,
                k: job.k,
                source: job.source.clone(),
                report,
                error,
            }
        })
        .collect();
    RunOutput {
        config_hash: hash,
        rows,
        domains,
    }
}

fn summarize(
    domain: &Domain,
    entry: &DomainEntry,
    study: &std::result::Result<DomainStudy, String>,
    cfg: &RunConfig,
) -> DomainSummary {
    let iso = match study {
        Ok(_) => check_isoperimetric(domain, cfg.gamma2, asymmetry_opts(cfg)).map_err(|e| e.to_string()),
        Err(e) => Err(e.clone()),
    };
    match iso {
        Ok(r) => DomainSummary {
            domain: entry.label(),
            alpha: Some(r.alpha),
            deficit: Some(r.deficit),
            gamma_star: Some(r.gamma_star),
            isoperimetric_pass: r.pass,
            error: None,
        },
        Err(e) => DomainSummary {
            domain: entry.label(),
            alpha: None,
            deficit: None,
            gamma_star: None,
            isoperimetric_pass: false,
            error: Some(e),
        },
    }
}

/// Aggregate table text with a header line.
pub fn results_table(rows: &[ResultRow]) -> String {
    let mut s = COLUMNS.join("\t");
    s.push('\n');
    for r in rows {
        s.push_str(&r.to_tsv());
        s.push('\n');
    }
    s
}

/// `alpha^power gap theorem`, sorted ascending, for rows of the given α-power.
pub fn plot_data(rows: &[ResultRow], power: u32) -> String {
    let mut pts: Vec<(f64, f64, Theorem)> = rows
        .iter()
        .filter_map(|r| r.report.as_ref())
        .filter(|r| r.power == power)
        .map(|r| (r.alpha.powi(power as i32), r.lhs_gap, r.theorem))
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut s = format!("# alpha^{power} gap theorem\n");
    for (x, y, t) in pts {
        let _ = writeln!(s, "{} {} {}", num(x), num(y), t);
    }
    s
}

fn domains_table(ds: &[DomainSummary]) -> String {
    let mut s = String::from("domain\talpha\tdeficit\tgamma_star\tisoperimetric_pass\tnotes\n");
    for d in ds {
        let _ = writeln!(
            s,
            "{}\t{}\t{}\t{}\t{}\t{}",
            d.domain,
            opt(d.alpha),
            opt(d.deficit),
            opt(d.gamma_star),
            d.isoperimetric_pass,
            d.error.as_deref().unwrap_or("none")
        );
    }
    s
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Writes `results.tsv`, `domains.tsv`, `config.txt`, `jobs/<job>_<theorem>.json` and the plot files.
pub fn emit_reports(out: &RunOutput, cfg: &RunConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    if out.rows.is_empty() {
        return Err(Error::param("rows", "nothing to write"));
    }
    let jobs = dir.join("jobs");
    fs::create_dir_all(&jobs).map_err(|e| Error::io(&jobs, e))?;
    let mut written = Vec::new();
    let mut put = |path: PathBuf, text: &str| -> Result<()> {
        write(&path, text)?;
        written.push(path);
        Ok(())
    };
    put(dir.join("config.txt"), &cfg.canonical())?;
    put(dir.join("results.tsv"), &results_table(&out.rows))?;
    put(dir.join("domains.tsv"), &domains_table(&out.domains))?;
    put(dir.join("plot_gap_vs_alpha2.dat"), &plot_data(&out.rows, 2))?;
    put(dir.join("plot_gap_vs_alpha3.dat"), &plot_data(&out.rows, 3))?;
    for r in &out.rows {
        let text = serde_json::to_string_pretty(r)? + "\n";
        put(jobs.join(format!("{:04}_{}.json", r.job, r.theorem)), &text)?;
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::parse_config;

    fn config(domains: &str, extra: &str) -> RunConfig {
        parse_config(&format!(
            "[run]\nseed = 1\nh = 0.1\n{extra}\n[physics]\nbeta = 1\nk = 1\n[gamma]\ngamma2 = 2.5\nprovenance = test\n[domains]\n{domains}\n"
        ))
        .unwrap()
    }

    #[test]
    fn job_plan_order_and_counts() {
        let mut c = config("disc r=1\nellipse a=2 b=1", "");
        c.sources = vec!["constant".into(), "bump".into()];
        c.ks = vec![1.0, 0.5];
        let jobs = plan_jobs(&c);
        // per domain: 2 Lorentz theorems × 2 sources × 2 k + 3 fixed-source theorems
        assert_eq!(jobs.len(), 2 * (2 * 2 * 2 + 3));
        assert!(jobs.iter().enumerate().all(|(i, j)| j.index == i));
        assert!(jobs.iter().filter(|j| j.theorem == Theorem::Pointwise).all(|j| j.source == "constant" && j.k.is_none()));
        assert!(jobs.iter().filter(|j| j.theorem == Theorem::BosselDaners).all(|j| j.source == "none"));
    }

    #[test]
    fn disc_only_run_passes() {
        let c = config("disc r=1", "");
        let out = run_experiments(&c);
        assert_eq!(out.rows.len(), 5);
        for r in &out.rows {
            let rep = r.report.as_ref().unwrap();
            assert!(r.pass() && rep.gap_within_error(), "{}", r.to_tsv());
        }
        assert!(out.all_pass());
        let table = results_table(&out.rows);
        assert_eq!(table.lines().count(), 6);
        assert!(table.lines().all(|l| l.split('\t').count() == COLUMNS.len()));
        assert!(!table.contains("\t\t"));
    }

    #[test]
    fn bad_mesh_is_isolated() {
        let dir = tempfile::tempdir().unwrap();
        let bad = dir.path().join("bad.mesh");
        fs::write(&bad, "nodes 3 triangles 1 bedges 3\n0 0\n1 0\n").unwrap();
        let mut c = config(&format!("disc r=1\nrect w=1 h=1 mesh={}", bad.display()), "");
        c.theorems = vec![Theorem::SaintVenant];
        let out = run_experiments(&c);
        assert_eq!(out.rows.len(), 2);
        assert!(out.rows[0].pass());
        assert_eq!(out.rows[1].status(), "error");
        assert!(out.rows[1].to_tsv().contains("na"));
        assert!(!out.all_pass());
    }

    #[test]
    fn reports_are_deterministic() {
        let mut c = config("ellipse a=1.5 b=1\nrect w=2 h=0.5", "");
        c.theorems = vec![Theorem::LorentzK1, Theorem::Pointwise];
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let files_a = emit_reports(&run_experiments(&c), &c, a.path()).unwrap();
        let files_b = emit_reports(&run_experiments(&c), &c, b.path()).unwrap();
        assert_eq!(files_a.len(), files_b.len());
        for (fa, fb) in files_a.iter().zip(&files_b) {
            assert_eq!(fs::read(fa).unwrap(), fs::read(fb).unwrap(), "{}", fa.display());
        }
        let plot = fs::read_to_string(a.path().join("plot_gap_vs_alpha2.dat")).unwrap();
        let xs: Vec<f64> = plot
            .lines()
            .skip(1)
            .map(|l| l.split_whitespace().next().unwrap().parse().unwrap())
            .collect();
        assert_eq!(xs.len(), 2);
        assert!(xs.windows(2).all(|w| w[0] <= w[1]));
        let p3 = fs::read_to_string(a.path().join("plot_gap_vs_alpha3.dat")).unwrap();
        assert_eq!(p3.lines().count(), 3);
    }

    #[test]
    fn ellipse_family_alpha_is_monotone() {
        let mut c = config("ellipse a=1.1 b=1\nellipse a=1.2 b=1\nellipse a=1.5 b=1\nellipse a=2 b=1", "");
        c.theorems = vec![Theorem::SaintVenant];
        let out = run_experiments(&c);
        let alphas: Vec<f64> = out.rows.iter().map(|r| r.report.as_ref().unwrap().alpha).collect();
        let rhs: Vec<f64> = out.rows.iter().map(|r| r.report.as_ref().unwrap().rhs).collect();
        assert!(alphas.windows(2).all(|w| w[0] < w[1]), "{alphas:?}");
        assert!(rhs.windows(2).all(|w| w[0] < w[1]), "{rhs:?}");
    }
}
