use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use bohmian::propagator::Scheme;
use bohmian::scenario::{
    parse_list, parse_window, run_scenario, Command, ScenarioConfig, OUTPUT_DIR_VAR,
};
use bohmian::Result;

/// Bohmian trajectories, equivariance checks and flux audits.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct Common {
    /// JSON config; flags override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Scenario preset: eq4, ground or gaussian-packet.
    #[arg(long)]
    scenario: Option<String>,
    #[arg(long, env = OUTPUT_DIR_VAR)]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Trajectory fan with termination events.
    Trajectories {
        #[command(flatten)]
        common: Common,
        /// Comma-separated start points, replacing the fan.
        #[arg(long)]
        q0: Option<String>,
        #[arg(long)]
        horizon: Option<f64>,
        #[arg(long)]
        sample_dt: Option<f64>,
    },
    /// Sampled ensemble transported to several times, with KS statistics.
    Ensemble {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        count: Option<usize>,
        /// Comma-separated output times.
        #[arg(long)]
        times: Option<String>,
        #[arg(long)]
        write_points: bool,
    },
    /// Flux bound on bad events against Monte Carlo.
    FluxAudit {
        #[command(flatten)]
        common: Common,
        /// Comma-separated tube radii.
        #[arg(long)]
        eps: Option<String>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        r: Option<f64>,
        #[arg(long = "T")]
        horizon: Option<f64>,
        #[arg(long)]
        mc: Option<usize>,
    },
    /// Nodes of the wave function in a space-time window.
    Nodes {
        #[command(flatten)]
        common: Common,
        /// `q_lo:q_hi x t_lo:t_hi`, e.g. -2:2x-0.5:2.
        #[arg(long, allow_hyphen_values = true)]
        window: Option<String>,
    },
    /// ODE endpoints against the quantile map.
    QuantileCheck {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        t: Option<f64>,
    },
    /// Wave function on the grid at a later time.
    Evolve {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        t: Option<f64>,
        #[arg(long, value_parser = ["analytic", "split-step"])]
        scheme: Option<String>,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
    },
}

fn base(common: &Common) -> Result<ScenarioConfig> {
    let mut c = match &common.config {
        Some(p) => ScenarioConfig::load(p)?,
        None => ScenarioConfig::default(),
    };
    if let Some(s) = &common.scenario {
        c.scenario = s.clone();
    }
    if let Some(d) = &common.output_dir {
        c.output_dir = Some(d.clone());
    }
    Ok(c)
}

fn seed(common: &Common, target: &mut u64) {
    if let Some(s) = common.seed {
        *target = s;
    }
}

fn configure(cmd: Cmd) -> Result<ScenarioConfig> {
    let (mut c, command) = match cmd {
        Cmd::Trajectories {
            common,
            q0,
            horizon,
            sample_dt,
        } => {
            let mut c = base(&common)?;
            if let Some(q) = q0 {
                c.trajectories.q0 = Some(parse_list(&q)?);
            }
            c.trajectories.horizon = horizon.unwrap_or(c.trajectories.horizon);
            c.trajectories.sample_dt = sample_dt.unwrap_or(c.trajectories.sample_dt);
            (c, Command::Trajectories)
        }
        Cmd::Ensemble {
            common,
            count,
            times,
            write_points,
        } => {
            let mut c = base(&common)?;
            seed(&common, &mut c.ensemble.seed);
            c.ensemble.count = count.unwrap_or(c.ensemble.count);
            if let Some(t) = times {
                c.ensemble.times = parse_list(&t)?;
            }
            c.ensemble.write_points |= write_points;
            (c, Command::Ensemble)
        }
        Cmd::FluxAudit {
            common,
            eps,
            delta,
            r,
            horizon,
            mc,
        } => {
            let mut c = base(&common)?;
            seed(&common, &mut c.flux.seed);
            if let Some(e) = eps {
                c.flux.eps = parse_list(&e)?;
            }
            c.flux.delta = delta.unwrap_or(c.flux.delta);
            c.flux.r = r.unwrap_or(c.flux.r);
            c.flux.horizon = horizon.unwrap_or(c.flux.horizon);
            c.flux.mc = mc.unwrap_or(c.flux.mc);
            (c, Command::FluxAudit)
        }
        Cmd::Nodes { common, window } => {
            let mut c = base(&common)?;
            if let Some(w) = window {
                let (q, t) = parse_window(&w)?;
                c.nodes.q = q;
                c.nodes.t = t;
            }
            (c, Command::Nodes)
        }
        Cmd::QuantileCheck { common, t } => {
            let mut c = base(&common)?;
            c.quantile.t = t.unwrap_or(c.quantile.t);
            (c, Command::QuantileCheck)
        }
        Cmd::Evolve {
            common,
            t,
            scheme,
            dt,
            points,
        } => {
            let mut c = base(&common)?;
            c.evolve.t = t.unwrap_or(c.evolve.t);
            match scheme.as_deref() {
                Some("analytic") => c.propagator.scheme = Scheme::Analytic,
                Some("split-step") => c.propagator.scheme = Scheme::SplitStep,
                _ => {}
            }
            c.propagator.dt = dt.unwrap_or(c.propagator.dt);
            c.grid.points = points.unwrap_or(c.grid.points);
            (c, Command::Evolve)
        }
    };
    c = c.resolved(command)?;
    Ok(c)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = configure(cli.command).and_then(|c| run_scenario(&c));
    match outcome {
        Ok(o) => {
            for f in &o.files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
