//! The `oplab` command line: single solves, Green columns, potential ratio
//! scans, capacity estimates, and the named experiments.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::config::{parse_radii, ExperimentConfig};
use crate::error::{Error, Result};
use crate::geometry::{BoxN, Rect};
use crate::grid::Grid;
use crate::measure::{total_variation, Measure};
use crate::obstacle::{solve_naive, solve_op, Obstacle, SolverOptions};
use crate::operator::{assemble, estimate_capacity, CoefficientField};
use crate::potential::ratio_scan;
use crate::textio::parse_measure;

#[derive(Parser)]
#[command(
    name = "oplab",
    version,
    about = "Obstacle problems with measure data: solvers and potential-theory experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a Dirichlet or obstacle problem for a measure datum
    Solve {
        /// Measure file (defaults to the zero measure)
        #[arg(long)]
        measure: Option<PathBuf>,
        /// Subdivisions per unit length
        #[arg(long, default_value_t = 32)]
        n: usize,
        /// Rectangle as x0,y0,x1,y1
        #[arg(long, default_value = "0,0,1,1")]
        domain: String,
        /// Coefficient field: identity | scaled:<c> | diag:<a>,<b> | nonsym
        #[arg(long, default_value = "identity")]
        coeff: String,
        /// Obstacle: none | const:<value>
        #[arg(long, default_value = "none")]
        obstacle: String,
        /// Which solver: auto | op | naive | dirichlet
        #[arg(long, default_value = "auto")]
        mode: String,
        /// Relaxation factor or `auto`
        #[arg(long, default_value = "auto")]
        omega: String,
        /// Output directory
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve for a unit point mass and write the Green column
    Green {
        /// Source location as x,y
        #[arg(long)]
        y: String,
        #[arg(long, default_value_t = 64)]
        n: usize,
        #[arg(long, default_value = "0,0,1,1")]
        domain: String,
        #[arg(long, default_value = "identity")]
        coeff: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Ball-average ratio scan of two mutually singular measures
    PotentialScan {
        /// Denominator measure file
        #[arg(long)]
        mu: PathBuf,
        /// Numerator measure file
        #[arg(long)]
        nu: PathBuf,
        /// Scan center as x,y or x,y,z
        #[arg(long)]
        center: String,
        /// Radii: comma list or geo:<start>:<factor>:<count>
        #[arg(long, default_value = "geo:0.25:0.5:9")]
        radii: String,
        /// Output CSV file
        #[arg(long)]
        out: PathBuf,
    },
    /// Capacity estimates for a node or disk under refinement
    Capacity {
        /// Comma-separated grid sizes
        #[arg(long, default_value = "16,32,64,128,256")]
        levels: String,
        /// Target set: center | disk:<radius>
        #[arg(long, default_value = "center")]
        target: String,
        #[arg(long, default_value = "0,0,1,1")]
        domain: String,
        /// Output CSV file
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a named experiment: delta | invariance | ratio | capacity
    #[command(after_help = "\
Configuration keys (file lines `key = value`, `#` comments; also usable with --set):
  experiment   study name: delta | invariance | ratio | capacity
  grid_sizes   comma-separated subdivisions per unit, strictly increasing
  k            obstacle level: the floor sits at -k (default 0.35)
  atom         singular atom location, x,y (default 0.5,0.5)
  tau_atom     obstacle-shaping atom location, x,y (default 0.25,0.25)
  coeff        identity | scaled:<c> | diag:<a>,<b> | nonsym
  radii        comma list or geo:<start>:<factor>:<count>
  seed         random seed for the randomized probes
  domain       rectangle x0,y0,x1,y1 (default 0,0,1,1)
  omega        relaxation factor in (0,2), or `auto` for per-level tuning
  density_amp  amplitude of the smooth density in the invariance study
  disk_radius  disk radius for the capacity study (default 0.2)
  out          output directory for the report")]
    Experiment {
        name: String,
        /// Configuration file (key = value lines)
        #[arg(long)]
        config: Option<PathBuf>,
        /// Override a configuration key, as key=value (repeatable)
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        /// Output directory (defaults to oplab-out/<name>)
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Entry point returning the process exit code: 0 on success and on all
/// verdicts passing, 1 on runtime or verdict failure, 2 on usage errors.
pub fn cli_main<I>(argv: I) -> i32
where
    I: IntoIterator<Item = String>,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Solve {
            measure,
            n,
            domain,
            coeff,
            obstacle,
            mode,
            omega,
            out,
        } => cmd_solve(measure, n, &domain, &coeff, &obstacle, &mode, &omega, &out),
        Command::Green {
            y,
            n,
            domain,
            coeff,
            out,
        } => cmd_green(&y, n, &domain, &coeff, &out),
        Command::PotentialScan {
            mu,
            nu,
            center,
            radii,
            out,
        } => cmd_scan(&mu, &nu, &center, &radii, &out),
        Command::Capacity {
            levels,
            target,
            domain,
            out,
        } => cmd_capacity(&levels, &target, &domain, &out),
        Command::Experiment {
            name,
            config,
            set,
            out,
        } => cmd_experiment(&name, config.as_deref(), &set, out),
    }
}

fn parse_rect(s: &str) -> Result<Rect> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Config(format!("bad rectangle {s:?}")))?;
    if parts.len() != 4 {
        return Err(Error::Config(format!("bad rectangle {s:?}")));
    }
    Rect::new(parts[0], parts[1], parts[2], parts[3])
}

fn parse_point2(s: &str) -> Result<(f64, f64)> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Config(format!("bad point {s:?}")))?;
    if parts.len() != 2 {
        return Err(Error::Config(format!("bad point {s:?}")));
    }
    Ok((parts[0], parts[1]))
}

fn load_measure(path: Option<&Path>, fallback_domain: Rect) -> Result<Measure> {
    match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| Error::Io(format!("cannot read {}: {e}", p.display())))?;
            parse_measure(&text)
        }
        None => Measure::new(2, BoxN::from_rect(fallback_domain)),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_solve(
    measure: Option<PathBuf>,
    n: usize,
    domain: &str,
    coeff: &str,
    obstacle: &str,
    mode: &str,
    omega: &str,
    out: &Path,
) -> Result<i32> {
    let rect = parse_rect(domain)?;
    let grid = Grid::build(rect, n)?;
    let field = CoefficientField::from_selector(grid, coeff)?;
    let op = assemble(&grid, &field)?;
    let mu = load_measure(measure.as_deref(), rect)?;
    let mut opts = SolverOptions::tuned_for(n);
    if omega != "auto" {
        opts.omega = omega
            .parse()
            .map_err(|_| Error::Config(format!("bad omega {omega:?}")))?;
    }
    std::fs::create_dir_all(out)?;
    let mut summary = vec![
        ("n".to_string(), format!("{n}")),
        ("h".to_string(), format!("{:.12e}", grid.h())),
        ("coeff".to_string(), coeff.to_string()),
        (
            "measure_total_variation".to_string(),
            format!("{:.12e}", total_variation(&mu)),
        ),
    ];
    let psi = match obstacle {
        "none" => None,
        s => {
            let v = s
                .strip_prefix("const:")
                .and_then(|v| v.parse::<f64>().ok())
                .ok_or_else(|| Error::Config(format!("bad obstacle {s:?}")))?;
            Some(Obstacle::constant(grid.interior_count(), v, "constant")?)
        }
    };
    let effective_mode = match (mode, &psi) {
        ("auto", None) => "dirichlet",
        ("auto", Some(_)) => "op",
        (m, _) => m,
    };
    summary.push(("mode".into(), effective_mode.to_string()));
    match (effective_mode, psi) {
        ("dirichlet", _) => {
            let u = op.solve_dirichlet(&mu)?;
            write_field(out, "u.csv", &u)?;
            summary.push(("u_max_norm".into(), format!("{:.12e}", u.max_norm())));
            summary.push(("u_min".into(), format!("{:.12e}", u.min())));
            summary.push(("u_l1".into(), format!("{:.12e}", u.l1_norm())));
        }
        ("op", Some(psi)) => {
            let res = solve_op(&op, &mu, &psi, &opts)?;
            write_field(out, "u.csv", &res.u)?;
            write_reaction(out, &res.u.grid(), &res.lambda0)?;
            summary.push(("u_max_norm".into(), format!("{:.12e}", res.u.max_norm())));
            summary.push(("u_min".into(), format!("{:.12e}", res.u.min())));
            summary.push(("iterations".into(), format!("{}", res.iterations)));
            summary.push((
                "comp_residual".into(),
                format!("{:.12e}", res.comp_residual),
            ));
            summary.push((
                "lambda0_total".into(),
                format!("{:.12e}", res.lambda0.iter().sum::<f64>()),
            ));
            summary.push((
                "singular_atoms".into(),
                format!("{}", res.singular_reaction.atoms().len()),
            ));
            summary.push((
                "singular_mass".into(),
                format!(
                    "{:.12e}",
                    res.singular_reaction
                        .atoms()
                        .iter()
                        .map(|a| a.mass)
                        .sum::<f64>()
                ),
            ));
        }
        ("naive", Some(psi)) => {
            let res = solve_naive(&op, &mu, &psi, &opts)?;
            write_field(out, "u.csv", &res.u)?;
            write_reaction(out, &res.u.grid(), &res.reaction)?;
            summary.push(("u_max_norm".into(), format!("{:.12e}", res.u.max_norm())));
            summary.push(("u_min".into(), format!("{:.12e}", res.u.min())));
            summary.push(("iterations".into(), format!("{}", res.iterations)));
            summary.push((
                "comp_residual".into(),
                format!("{:.12e}", res.comp_residual),
            ));
            summary.push((
                "reaction_total".into(),
                format!("{:.12e}", res.reaction.iter().sum::<f64>()),
            ));
        }
        (m, None) => {
            return Err(Error::Config(format!(
                "mode {m:?} needs an obstacle; pass --obstacle const:<value>"
            )));
        }
        (m, _) => {
            return Err(Error::Config(format!("unknown mode {m:?}")));
        }
    }
    let text: String = summary
        .iter()
        .map(|(k, v)| format!("{k} = {v}\n"))
        .collect();
    std::fs::write(out.join("summary.txt"), text)?;
    println!("wrote {}", out.display());
    Ok(0)
}

fn write_field(dir: &Path, name: &str, u: &crate::grid::NodalFunction) -> Result<()> {
    let mut buf = Vec::new();
    u.write_csv(&mut buf)?;
    std::fs::write(dir.join(name), buf)?;
    Ok(())
}

fn write_reaction(dir: &Path, grid: &Grid, reaction: &[f64]) -> Result<()> {
    let f = crate::grid::NodalFunction::new(*grid, reaction.to_vec());
    write_field(dir, "reaction.csv", &f)
}

fn cmd_green(y: &str, n: usize, domain: &str, coeff: &str, out: &Path) -> Result<i32> {
    let rect = parse_rect(domain)?;
    let grid = Grid::build(rect, n)?;
    let field = CoefficientField::from_selector(grid, coeff)?;
    let op = assemble(&grid, &field)?;
    let point = parse_point2(y)?;
    let g = op.discrete_green(point)?;
    if let Some(parent) = out.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let mut buf = Vec::new();
    g.write_csv(&mut buf)?;
    std::fs::write(out, buf)?;
    println!("wrote {}", out.display());
    Ok(0)
}

fn cmd_scan(mu: &Path, nu: &Path, center: &str, radii: &str, out: &Path) -> Result<i32> {
    let mu = load_measure(Some(mu), Rect::unit_square())?;
    let nu = load_measure(Some(nu), Rect::unit_square())?;
    let parts: Vec<f64> = center
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Config(format!("bad center {center:?}")))?;
    if parts.len() != mu.dim() as usize {
        return Err(Error::Config(format!(
            "center needs {} coordinates",
            mu.dim()
        )));
    }
    let mut x = [0.0; 3];
    x[..parts.len()].copy_from_slice(&parts);
    let radii = parse_radii(radii).ok_or_else(|| Error::Config(format!("bad radii {radii:?}")))?;
    let scan = ratio_scan(&mu, &nu, x, &radii)?;
    if let Some(parent) = out.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let mut buf = Vec::new();
    scan.write_csv(&mut buf)?;
    std::fs::write(out, buf)?;
    println!("wrote {}", out.display());
    Ok(0)
}

fn cmd_capacity(levels: &str, target: &str, domain: &str, out: &Path) -> Result<i32> {
    let rect = parse_rect(domain)?;
    let sizes: Vec<usize> = levels
        .split(',')
        .map(|s| s.trim().parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Config(format!("bad levels {levels:?}")))?;
    let center = (0.5 * (rect.x0 + rect.x1), 0.5 * (rect.y0 + rect.y1));
    let disk_radius = match target {
        "center" => None,
        s => Some(
            s.strip_prefix("disk:")
                .and_then(|r| r.parse::<f64>().ok())
                .ok_or_else(|| Error::Config(format!("bad target {s:?}")))?,
        ),
    };
    let mut csv = String::from("# capacity estimates\nn,h,estimate\n");
    for n in sizes {
        let grid = Grid::build(rect, n)?;
        let nodes: Vec<usize> = match disk_radius {
            None => {
                let ci = ((center.0 - rect.x0) / grid.hx()).round() as isize;
                let cj = ((center.1 - rect.y0) / grid.hy()).round() as isize;
                grid.interior_index(ci, cj).into_iter().collect()
            }
            Some(r) => (0..grid.interior_count())
                .filter(|&i| {
                    let (x, y) = grid.node_position(i);
                    (x - center.0).hypot(y - center.1) <= r
                })
                .collect(),
        };
        let cap = estimate_capacity(&grid, &nodes)?;
        csv.push_str(&format!("{n},{:.12e},{:.12e}\n", grid.h(), cap));
    }
    if let Some(parent) = out.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(out, csv)?;
    println!("wrote {}", out.display());
    Ok(0)
}

fn cmd_experiment(
    name: &str,
    config: Option<&Path>,
    overrides: &[String],
    out: Option<PathBuf>,
) -> Result<i32> {
    let mut cfg = match config {
        Some(path) => {
            let cfg = ExperimentConfig::from_file(path)?;
            if cfg.experiment != name {
                return Err(Error::Config(format!(
                    "config file is for experiment {:?}, not {name:?}",
                    cfg.experiment
                )));
            }
            cfg
        }
        None => ExperimentConfig::default_for(name)?,
    };
    for item in overrides {
        let Some((k, v)) = item.split_once('=') else {
            return Err(Error::Config(format!("bad override {item:?}; use key=value")));
        };
        cfg.apply(k.trim(), v.trim())?;
    }
    if let Some(dir) = out {
        cfg.out = Some(dir);
    }
    cfg.validate()?;
    let report = crate::experiments::run(&cfg)?;
    let dir = cfg
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("oplab-out").join(name));
    report.write_to_dir(&dir)?;
    for v in &report.verdicts {
        println!(
            "{}: {} [{}]",
            if v.pass { "pass" } else { "FAIL" },
            v.criterion,
            v.detail
        );
    }
    println!(
        "report written to {} ({})",
        dir.display(),
        if report.all_pass() { "pass" } else { "fail" }
    );
    Ok(if report.all_pass() { 0 } else { 1 })
}
