//! `dualband`: design, simulate and explore dual-band rat-race couplers and
//! Gysel power dividers.
//!
//! Data goes to stdout (or `--output`), diagnostics to stderr. Usage errors
//! exit with 2; solver and simulation failures exit with 1 after printing a
//! `{"code", "message"}` object on stderr.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use dualband::fmt::to_json_sig6;
use dualband::io::{DesignReport, DesignRequest, DesignSource};
use dualband::polarization::FeedDelay;
use dualband::report::{self, FigureKind, GridRequest, SpaceQuery};
use dualband::shifter::ImpedanceWindow;
use dualband::sim::write_touchstone;
use dualband::solver::SolverOptions;
use dualband::space::parse_k_list;
use dualband::{Device, Error, Topology};

#[derive(Parser)]
#[command(
    name = "dualband",
    version,
    about = "Dual-band rat-race coupler and Gysel divider design tool"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a design and print the JSON design and feasibility report.
    Design {
        #[command(flatten)]
        design: DesignArgs,
        /// Write the report here instead of stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Sweep a design and export Touchstone or metric CSV.
    Simulate {
        #[command(flatten)]
        source: SourceArgs,
        /// Sweep start in Hz (default 0.5 f1).
        #[arg(long)]
        fstart: Option<f64>,
        /// Sweep stop in Hz (default 1.25 f2).
        #[arg(long)]
        fstop: Option<f64>,
        /// Number of grid points.
        #[arg(long, default_value_t = 201)]
        points: usize,
        /// Artifact format.
        #[arg(long = "out", value_enum, default_value_t = OutFormat::Touchstone)]
        format: OutFormat,
        /// Write the artifact here instead of stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Design-space sweep over the frequency ratio, as CSV.
    SweepSpace {
        /// Quantity to tabulate.
        #[arg(long, value_enum)]
        figure: FigureArg,
        /// Shifter topology (shifter figure only).
        #[arg(long, value_parser = parse_topology)]
        topology: Option<Topology>,
        /// Comma-separated ratio-of-ratios list.
        #[arg(long, default_value = "1,2,4,10")]
        k: String,
        /// First frequency ratio f2/f1.
        #[arg(long, default_value_t = 1.1)]
        m_start: f64,
        /// Last frequency ratio f2/f1.
        #[arg(long, default_value_t = 3.0)]
        m_stop: f64,
        /// Frequency-ratio step.
        #[arg(long, default_value_t = 0.01)]
        m_step: f64,
        /// Linear power-division ratio at f1.
        #[arg(long, default_value_t = 1.0)]
        n1: f64,
        /// Port impedance, ohm.
        #[arg(long, default_value_t = 50.0)]
        z0: f64,
        /// Lower bound of the realizable impedance window, ohm.
        #[arg(long, default_value_t = 20.0)]
        z_min: f64,
        /// Upper bound of the realizable impedance window, ohm.
        #[arg(long, default_value_t = 150.0)]
        z_max: f64,
        /// Write the CSV here instead of stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Feed polarization of an orthogonally fed patch at both design bands.
    Polarization {
        #[command(flatten)]
        source: SourceArgs,
        /// Excited input port.
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=4))]
        port: u8,
        /// Insert a plain quarter-wave delay in the y feed.
        #[arg(long, conflicts_with = "dual_band_delay")]
        quarter_wave: bool,
        /// Insert a dual-band (C-section) delay in the y feed.
        #[arg(long)]
        dual_band_delay: bool,
        /// Evaluation frequency in Hz; repeatable. Defaults to f1 and f2.
        #[arg(long = "freq")]
        frequencies: Vec<f64>,
        /// Write the report here instead of stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Start the HTTP service.
    Serve {
        /// Listen address.
        #[arg(long, default_value = "127.0.0.1:8080")]
        bind: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Touchstone,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum FigureArg {
    Lengths,
    Impedances,
    Shifter,
}

#[derive(Args, Default)]
struct DesignArgs {
    /// Device: rrc (rat-race coupler) or gpd (Gysel divider); default rrc.
    #[arg(long, value_parser = parse_device)]
    device: Option<Device>,
    /// Lower design frequency, Hz.
    #[arg(long)]
    f1: Option<f64>,
    /// Upper design frequency, Hz.
    #[arg(long)]
    f2: Option<f64>,
    /// Power-division ratio at f1, dB.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "n1")]
    n1_db: Option<f64>,
    /// Power-division ratio at f2, dB.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "n2")]
    n2_db: Option<f64>,
    /// Power-division ratio at f1, linear.
    #[arg(long)]
    n1: Option<f64>,
    /// Power-division ratio at f2, linear.
    #[arg(long)]
    n2: Option<f64>,
    /// Port impedance, ohm.
    #[arg(long)]
    z0: Option<f64>,
    /// Shifter topology: c, pi, t or tl.
    #[arg(long, value_parser = parse_topology)]
    topology: Option<Topology>,
    /// Shifter reference impedance for dividers, ohm.
    #[arg(long)]
    zgamma: Option<f64>,
    /// Isolation resistors: balanced or n=<value>.
    #[arg(long)]
    r_choice: Option<String>,
    /// Lower bound of the realizable impedance window, ohm.
    #[arg(long)]
    z_min: Option<f64>,
    /// Upper bound of the realizable impedance window, ohm.
    #[arg(long)]
    z_max: Option<f64>,
}

impl DesignArgs {
    fn given(&self) -> bool {
        self.device.is_some()
            || self.f1.is_some()
            || self.f2.is_some()
            || self.n1_db.is_some()
            || self.n2_db.is_some()
            || self.n1.is_some()
            || self.n2.is_some()
            || self.z0.is_some()
            || self.topology.is_some()
            || self.zgamma.is_some()
            || self.r_choice.is_some()
            || self.z_min.is_some()
            || self.z_max.is_some()
    }

    fn request(&self) -> DesignRequest {
        let (Some(f1), Some(f2), Some(topology)) = (self.f1, self.f2, self.topology) else {
            usage_error(
                ErrorKind::MissingRequiredArgument,
                "--f1, --f2 and --topology are required",
            );
        };
        if self.n1.is_none() && self.n1_db.is_none() || self.n2.is_none() && self.n2_db.is_none() {
            usage_error(
                ErrorKind::MissingRequiredArgument,
                "give --n1-db/--n2-db (or linear --n1/--n2)",
            );
        }
        let window = (self.z_min.is_some() || self.z_max.is_some()).then(|| {
            let d = ImpedanceWindow::default();
            ImpedanceWindow::new(self.z_min.unwrap_or(d.z_min), self.z_max.unwrap_or(d.z_max))
        });
        DesignRequest {
            device: self.device.unwrap_or(Device::Rrc),
            topology,
            f1,
            f2,
            n1: self.n1,
            n2: self.n2,
            n1_db: self.n1_db,
            n2_db: self.n2_db,
            z0: self.z0.unwrap_or(50.0),
            z_gamma: self.zgamma,
            r_choice: self.r_choice.clone(),
            window,
        }
    }
}

/// A design given either as a file (request or saved report) or inline.
#[derive(Args)]
struct SourceArgs {
    /// Design request or report JSON file.
    #[arg(long)]
    design: Option<PathBuf>,
    #[command(flatten)]
    inline: DesignArgs,
}

impl SourceArgs {
    fn request(&self) -> Result<DesignRequest, Error> {
        match &self.design {
            Some(_) if self.inline.given() => usage_error(
                ErrorKind::ArgumentConflict,
                "--design cannot be combined with inline design flags",
            ),
            Some(path) => {
                let text = read(path)?;
                let v: serde_json::Value =
                    serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?;
                Ok(DesignSource::from_value(v)?.request().clone())
            }
            None => Ok(self.inline.request()),
        }
    }
}

fn parse_topology(s: &str) -> Result<Topology, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_device(s: &str) -> Result<Device, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn usage_error(kind: ErrorKind, msg: &str) -> ! {
    Cli::command().error(kind, msg).exit()
}

fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))
}

fn emit(text: &str, output: Option<&Path>) -> Result<(), Error> {
    match output {
        Some(p) => fs::write(p, text)
            .map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn json(value: &impl serde::Serialize) -> Result<String, Error> {
    let mut s = to_json_sig6(value).map_err(|e| Error::InvalidInput(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn run(cli: Cli) -> Result<(), Error> {
    let opts = SolverOptions::default();
    match cli.command {
        Command::Design { design, output } => {
            let req = design.request();
            let d = req.design(&opts)?;
            emit(&json(&DesignReport::new(&req, &d))?, output.as_deref())
        }
        Command::Simulate {
            source,
            fstart,
            fstop,
            points,
            format,
            output,
        } => {
            let req = source.request()?;
            let spec = req.spec()?;
            let grid = GridRequest {
                fstart_hz: fstart,
                fstop_hz: fstop,
                points: Some(points),
            }
            .resolve(spec.f1, spec.f2)?;
            let sim = report::simulate(&req, &grid, usize::MAX, &opts)?;
            let r = &sim.report;
            for e in &r.exactness {
                eprintln!(
                    "exactness at {:e} Hz: max error {:.3e}, |S11| {:.1} dB",
                    e.frequency_hz, e.max_error, e.s11_db
                );
            }
            if !r.failed_points.is_empty() {
                eprintln!(
                    "{} of {} points could not be evaluated",
                    r.failed_points.len(),
                    r.points
                );
            }
            if r.failed_points.len() == r.points {
                return Err(Error::SingularAssembly {
                    freq_hz: r.failed_points[0].frequency_hz,
                });
            }
            let text = match format {
                OutFormat::Touchstone => write_touchstone(&sim.sweep, spec.z0),
                OutFormat::Csv => r.metrics.to_csv(),
            };
            emit(&text, output.as_deref())
        }
        Command::SweepSpace {
            figure,
            topology,
            k,
            m_start,
            m_stop,
            m_step,
            n1,
            z0,
            z_min,
            z_max,
            output,
        } => {
            let kind = match figure {
                FigureArg::Lengths => FigureKind::Lengths,
                FigureArg::Impedances => FigureKind::Impedances,
                FigureArg::Shifter => FigureKind::Shifter,
            };
            if kind == FigureKind::Shifter && topology.is_none() {
                usage_error(
                    ErrorKind::MissingRequiredArgument,
                    "--figure shifter needs --topology c|pi|t",
                );
            }
            let k = parse_k_list(&k).unwrap_or_else(|e| {
                usage_error(
                    ErrorKind::ValueValidation,
                    &format!("malformed --k list: {e}"),
                )
            });
            let q = SpaceQuery {
                k,
                m_start,
                m_stop,
                m_step,
                n1,
                z0,
                topology,
                window: Some(ImpedanceWindow::new(z_min, z_max)),
            };
            emit(&q.run(kind, &opts)?.to_csv(), output.as_deref())
        }
        Command::Polarization {
            source,
            port,
            quarter_wave,
            dual_band_delay,
            frequencies,
            output,
        } => {
            let req = source.request()?;
            let delay = if dual_band_delay {
                FeedDelay::DualBand { f2: req.spec()?.f2 }
            } else {
                FeedDelay::from_flag(quarter_wave)
            };
            let reports = report::polarization(&req, port as usize, delay, &frequencies, &opts)?;
            emit(&json(&reports)?, output.as_deref())
        }
        Command::Serve { bind } => {
            let rt =
                tokio::runtime::Runtime::new().map_err(|e| Error::InvalidInput(e.to_string()))?;
            eprintln!("listening on http://{bind}");
            rt.block_on(dualband_service::serve(&bind))
                .map_err(|e| Error::InvalidInput(format!("cannot serve on {bind}: {e}")))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let body = serde_json::json!({ "code": e.code(), "message": e.to_string() });
            eprintln!("{body}");
            ExitCode::from(1)
        }
    }
}
