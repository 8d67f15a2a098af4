use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use talenti::fem::{generate_mesh, integrate_field, solve_robin, Integral, Mesh, MeshStats, SourceSpec};
use talenti::geometry::{fraenkel_asymmetry_with, AsymmetryOptions, Domain};
use talenti::geometry::asymmetry::raster_asymmetry_at;
use talenti::harness::{emit_reports, parse_config_with, run_experiments, Overrides};
use talenti::radial::{robin_disc_eigenvalue, BallClosedForm, RadialSolution};
use talenti::{Error, Result};

#[derive(Parser)]
#[command(name = "talenti", version, about = "Robin–Poisson comparison checks on planar domains")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve −Δu = f with ∂u/∂ν + βu = 0 and export the nodal field.
    Solve(SolveArgs),
    /// Fraenkel asymmetry of one domain.
    Asymmetry {
        #[arg(long)]
        domain: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Closed forms on the disc: f ≡ 1 solution, torsion and principal eigenvalue.
    Oracle {
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
    },
    /// Run every check listed in a config file.
    Verify(VerifyArgs),
    /// Mesh utilities.
    #[command(subcommand)]
    Mesh(MeshCmd),
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    domain: String,
    #[arg(long, default_value_t = 0.05)]
    h: f64,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    /// constant, constant=C, radial or bump
    #[arg(long, default_value = "constant")]
    source: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    h: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    gamma2: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum MeshCmd {
    /// Mesh a domain and print its statistics.
    Generate {
        #[arg(long)]
        domain: String,
        #[arg(long, default_value_t = 0.05)]
        h: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Uniformly refine a mesh file.
    Refine {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print statistics of a mesh file.
    Stats {
        #[arg(long)]
        input: PathBuf,
    },
    /// Validate a mesh file and print its statistics.
    Import {
        #[arg(long)]
        input: PathBuf,
    },
    /// Mesh a domain and write it in the text format.
    Export {
        #[arg(long)]
        domain: String,
        #[arg(long, default_value_t = 0.05)]
        h: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn print_stats(s: &MeshStats) {
    println!(
        "nodes {} triangles {} boundary_edges {} area {:.12e} boundary_length {:.12e} max_edge {:.6e} min_angle_deg {:.3}",
        s.nodes, s.triangles, s.boundary_edges, s.area, s.boundary_length, s.max_edge, s.min_angle_deg
    );
}

fn load_mesh(path: &Path) -> Result<Mesh> {
    Mesh::from_text(&read(path)?)
}

fn solve(a: &SolveArgs) -> Result<()> {
    let d: Domain = a.domain.parse()?;
    let mesh = Arc::new(generate_mesh(&d, a.h)?);
    let f = SourceSpec::from_name(&a.source)?;
    let u = solve_robin(&mesh, &f, a.beta)?;
    print_stats(&mesh.stats());
    println!(
        "u_min {:.12e} u_max {:.12e} integral {:.12e}",
        u.min(),
        u.max(),
        integrate_field(&u, Integral::Domain)?
    );
    if let Some(out) = &a.out {
        write(out, &u.to_text())?;
        println!("wrote {}", out.display());
    }
    Ok(())
}

fn asymmetry(domain: &str, seed: u64) -> Result<()> {
    let d: Domain = domain.parse()?;
    let a = fraenkel_asymmetry_with(
        &d,
        AsymmetryOptions {
            seed,
            ..AsymmetryOptions::default()
        },
    );
    let (raster, err) = raster_asymmetry_at(&d, a.center, d.diameter() / 512.0)?;
    println!(
        "alpha {:.12e} center {:.12e} {:.12e} radius {:.12e} raster {:.6e} raster_error {:.2e}",
        a.value, a.center.x, a.center.y, a.radius, raster, err
    );
    Ok(())
}

fn oracle(radius: f64, beta: f64) -> Result<()> {
    let b = BallClosedForm::new(radius, beta)?;
    let area = std::f64::consts::PI * radius * radius;
    let rs = RadialSolution::constant_source(area, 2, beta, 1.0)?;
    println!("u(0) {:.15e}", b.u(0.0));
    println!("u(R) {:.15e}", b.u(radius));
    println!("v_m {:.15e}", rs.v_m());
    println!("torsion {:.15e}", b.torsion());
    println!("lambda {:.15e}", robin_disc_eigenvalue(radius, beta)?);
    Ok(())
}

fn verify(a: &VerifyArgs) -> Result<bool> {
    let over = Overrides {
        h: a.h,
        beta: a.beta,
        gamma2: a.gamma2,
        seed: a.seed,
    };
    let cfg = parse_config_with(&read(&a.config)?, &over)?;
    let out_dir = a.out.clone().unwrap_or_else(|| cfg.out.clone());
    let out = run_experiments(&cfg);
    emit_reports(&out, &cfg, &out_dir)?;
    for r in &out.rows {
        match &r.report {
            Some(rep) => println!(
                "{:>4} {:<13} {:<22} beta={} k={} f={} gap={:.4e} rhs={:.4e} margin={:+.4e} {}",
                r.job,
                r.theorem.name(),
                r.domain,
                r.beta,
                r.k.map_or("na".to_string(), |k| k.to_string()),
                r.source,
                rep.lhs_gap,
                rep.rhs,
                rep.margin,
                r.status()
            ),
            None => println!("{:>4} {:<13} {:<22} error: {}", r.job, r.theorem.name(), r.domain, r.error.as_deref().unwrap_or("")),
        }
    }
    let passed = out.rows.iter().filter(|r| r.pass()).count();
    println!(
        "config {} : {passed}/{} pass, reports in {}",
        out.config_hash,
        out.rows.len(),
        out_dir.display()
    );
    Ok(out.all_pass())
}

fn mesh(cmd: &MeshCmd) -> Result<()> {
    match cmd {
        MeshCmd::Generate { domain, h, out } => {
            let m = generate_mesh(&domain.parse()?, *h)?;
            print_stats(&m.stats());
            if let Some(out) = out {
                write(out, &m.to_text())?;
            }
        }
        MeshCmd::Refine { input, out } => {
            let m = load_mesh(input)?.refine()?;
            print_stats(&m.stats());
            write(out, &m.to_text())?;
        }
        MeshCmd::Stats { input } | MeshCmd::Import { input } => print_stats(&load_mesh(input)?.stats()),
        MeshCmd::Export { domain, h, out } => {
            let m = generate_mesh(&domain.parse()?, *h)?;
            write(out, &m.to_text())?;
            println!("wrote {}", out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.cmd {
        Cmd::Solve(a) => solve(a).map(|_| true),
        Cmd::Asymmetry { domain, seed } => asymmetry(domain, *seed).map(|_| true),
        Cmd::Oracle { radius, beta } => oracle(*radius, *beta).map(|_| true),
        Cmd::Verify(a) => verify(a),
        Cmd::Mesh(m) => mesh(m).map(|_| true),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
