//! `riley`: batch front end for the Riley slice library.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::warn;
use riley_core::farey::farey_word;
use riley_core::io::{polynomial_json, verdict_json, write_cloud_csv, write_limit_csv, write_rays_csv};
use riley_core::limitset::{limit_set, rasterize, DEFAULT_CAP, DEFAULT_EPSILON};
use riley_core::pleating::{default_t_start, trace_ray, DEFAULT_RAY_SAMPLES};
use riley_core::slice::{cusp_cloud, render_slice, Classifier, ClassifyOptions};
use riley_core::traces::{farey_polynomial_direct, farey_polynomial_recursive};
use riley_core::{Complex64, ConeOrders, Error, Result, SlicePoint, Slope, Viewport};

#[derive(Parser, Debug)]
#[command(name = "riley", version, about = "Farey polynomials, pleating rays, cusps and limit sets of Riley slices")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "RILEY_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the Farey word of a slope.
    Word {
        slope: Slope,
        #[arg(long, default_value = "inf,inf")]
        orders: ConeOrders,
    },
    /// Print the Farey polynomial of a slope as JSON.
    Poly {
        slope: Slope,
        #[arg(long, default_value = "inf,inf")]
        orders: ConeOrders,
        #[arg(long, value_enum, default_value_t = Method::Direct)]
        method: Method,
    },
    /// Write the cusp cloud for all slopes up to a denominator as CSV.
    Cusps {
        #[arg(long)]
        max_denominator: u32,
        #[arg(long, default_value = "inf,inf")]
        orders: ConeOrders,
        /// Output file (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Trace one pleating ray and write its samples as CSV.
    Ray {
        slope: Slope,
        #[arg(long, default_value = "inf,inf")]
        orders: ConeOrders,
        #[arg(long, default_value_t = DEFAULT_RAY_SAMPLES)]
        samples: usize,
        /// Most negative trace on the ray (default depends on the denominator).
        #[arg(long, allow_hyphen_values = true)]
        t_start: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Classify a parameter value and print the verdict as JSON.
    Classify {
        #[arg(allow_hyphen_values = true)]
        re: f64,
        #[arg(allow_hyphen_values = true)]
        im: f64,
        #[arg(long, default_value = "inf,inf")]
        orders: ConeOrders,
        #[arg(long, default_value_t = ClassifyOptions::default().max_denominator)]
        max_denominator: u32,
        #[arg(long, default_value_t = ClassifyOptions::default().word_depth)]
        word_depth: usize,
        #[arg(long, default_value_t = ClassifyOptions::default().tol)]
        tol: f64,
    },
    /// Render an image as binary PPM.
    #[command(subcommand)]
    Render(Render),
}

#[derive(Subcommand, Debug)]
enum Render {
    /// Bounds, rays and cusps of a slice.
    Slice {
        #[arg(long, default_value = "inf,inf")]
        orders: ConeOrders,
        #[arg(long, default_value_t = 30)]
        max_denominator: u32,
        #[arg(long, default_value = "-5,5,-5,5", allow_hyphen_values = true)]
        viewport: Viewport,
        #[command(flatten)]
        image: ImageArgs,
    },
    /// Limit set of the group at one parameter value.
    Limitset {
        /// Parameter as `RE,IM`.
        #[arg(long, allow_hyphen_values = true)]
        rho: String,
        #[arg(long, default_value = "inf,inf")]
        orders: ConeOrders,
        #[arg(long, default_value_t = 14)]
        depth: usize,
        #[arg(long, default_value_t = DEFAULT_EPSILON)]
        epsilon: f64,
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: usize,
        #[arg(long, default_value = "-3,3,-3,3", allow_hyphen_values = true)]
        viewport: Viewport,
        /// Also write the points as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        image: ImageArgs,
    },
}

#[derive(Args, Debug)]
struct ImageArgs {
    #[arg(long, default_value_t = 800)]
    width: usize,
    #[arg(long, default_value_t = 800)]
    height: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Method {
    Direct,
    Recursive,
}

fn parse_rho(s: &str) -> Result<Complex64> {
    let bad = || Error::Validation(format!("rho must look like `RE,IM`, got `{s}`"));
    let (re, im) = s.split_once(',').ok_or_else(bad)?;
    let re: f64 = re.trim().parse().map_err(|_| bad())?;
    let im: f64 = im.trim().parse().map_err(|_| bad())?;
    Ok(Complex64::new(re, im))
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Word { slope, orders: _ } => {
            println!("{}", farey_word(slope)?);
        }
        Command::Poly { slope, orders, method } => {
            let p = match method {
                Method::Direct => farey_polynomial_direct(slope, orders)?,
                Method::Recursive => farey_polynomial_recursive(slope, orders)?,
            };
            println!("{}", polynomial_json(&p));
        }
        Command::Cusps {
            max_denominator,
            orders,
            out,
        } => {
            let cloud = cusp_cloud(max_denominator, orders)?;
            for (s, e) in &cloud.failures {
                warn!("slope {s}: {e}");
            }
            let mut w = output(out.as_deref())?;
            write_cloud_csv(&mut w, &cloud)?;
            w.flush()?;
        }
        Command::Ray {
            slope,
            orders,
            samples,
            t_start,
            out,
        } => {
            let ray = trace_ray(slope, orders, t_start.unwrap_or_else(|| default_t_start(slope)), samples)?;
            let mut w = output(out.as_deref())?;
            write_rays_csv(&mut w, &[ray])?;
            w.flush()?;
        }
        Command::Classify {
            re,
            im,
            orders,
            max_denominator,
            word_depth,
            tol,
        } => {
            let rho = Complex64::new(re, im);
            if !rho.is_finite() {
                return Err(Error::Validation("rho must be finite".into()));
            }
            let classifier = Classifier::new(
                orders,
                ClassifyOptions {
                    max_denominator,
                    word_depth,
                    tol,
                },
            )?;
            let verdict = classifier.classify(rho);
            println!("{}", verdict_json(rho, orders, &verdict));
        }
        Command::Render(Render::Slice {
            orders,
            max_denominator,
            viewport,
            image,
        }) => {
            let r = render_slice(orders, max_denominator, viewport, image.width, image.height)?;
            if r.degenerate {
                warn!("orders {orders}: degenerate slice, image carries a warning band only");
            }
            for (s, e) in &r.failures {
                warn!("slope {s}: {e}");
            }
            r.raster.write_ppm(BufWriter::new(File::create(&image.out)?))?;
        }
        Command::Render(Render::Limitset {
            rho,
            orders,
            depth,
            epsilon,
            cap,
            viewport,
            csv,
            image,
        }) => {
            let cloud = limit_set(SlicePoint::new(parse_rho(&rho)?, orders), depth, epsilon, cap)?;
            if cloud.truncated {
                warn!("point cap {cap} reached; cloud truncated");
            }
            if let Some(path) = csv {
                let mut w = output(Some(&path))?;
                write_limit_csv(&mut w, &cloud)?;
                w.flush()?;
            }
            let raster = rasterize(&cloud, viewport, image.width, image.height)?;
            raster.write_ppm(BufWriter::new(File::create(&image.out)?))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: thread count must be >= 1");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() || matches!(e, Error::Io(_)) {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
