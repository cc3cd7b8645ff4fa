//! `zetalab` — command-line front door for the zeta laboratory.
//!
//! Exit codes: 0 success, 1 computation error (typed error name printed to
//! stderr), 2 usage error.

use clap::{Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use zetalab_core::group::build_bolza_group;
use zetalab_core::hp::Cplx;
use zetalab_core::orderfinder::{leading_coefficient, winding_order, ContourOrderReport};
use zetalab_core::schottky::{build_from_config, parse_config, schottky_ruelle};
use zetalab_core::spectrum::{
    enumerate_spectrum, load_spectrum, load_spectrum_checked, save_spectrum, LengthSpectrum,
};
use zetalab_core::topology::{genus_from_order, ledger_for_genus};
use zetalab_core::zeta::{
    csv_header, csv_row, ruelle_product, selberg_product, selberg_relation_residual,
};

#[derive(Parser)]
#[command(name = "zetalab", version, about = "Dynamical zeta function laboratory")]
struct Cli {
    /// Working precision in bits (default 200; a Schottky config file may
    /// supply its own when the flag is omitted).
    #[arg(long, global = true)]
    precision_bits: Option<u32>,
    /// Significant digits in printed and CSV output.
    #[arg(long, global = true, default_value_t = 10)]
    digits: usize,
    /// Worker threads (falls back to ZETALAB_THREADS, then all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Enumerate a primitive length spectrum and write the spectrum file.
    Spectrum {
        #[arg(long, default_value = "bolza")]
        group: String,
        #[arg(long)]
        cutoff: f64,
        /// Explicit output path.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Digest-keyed cache directory; reused when a fresh file matches.
        #[arg(long)]
        cache_dir: Option<PathBuf>,
    },
    /// Evaluate a zeta Euler product at points read from a CSV file.
    Zeta {
        #[arg(long)]
        spectrum: PathBuf,
        /// ruelle or selberg
        #[arg(long, default_value = "ruelle")]
        kind: String,
        /// Selberg product truncation order M.
        #[arg(long, default_value_t = 20)]
        mmax: u32,
        /// Input CSV of evaluation points, one `s_re,s_im` per line.
        #[arg(long)]
        points: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also write a companion plot script next to the CSV.
        #[arg(long)]
        plot: bool,
    },
    /// Check the telescoping Selberg relation at one point.
    VerifySelberg {
        #[arg(long)]
        spectrum: PathBuf,
        /// Evaluation point, e.g. `2`, `2+1i`, `1.5-0.5i`.
        #[arg(long)]
        s: String,
        #[arg(long, default_value_t = 20)]
        mmax: u32,
    },
    /// Measure the vanishing order of the Schottky Ruelle zeta at a point.
    OrderZero {
        /// Schottky config file (`key = value`).
        #[arg(long)]
        schottky: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        radius: f64,
        #[arg(long, default_value_t = 256)]
        samples: usize,
        #[arg(long, default_value_t = 0.0)]
        center_re: f64,
        #[arg(long, default_value_t = 0.0)]
        center_im: f64,
        /// Also fit the leading coefficient at the measured order.
        #[arg(long)]
        coeff: bool,
    },
    /// Print the topology ledger and predicted vanishing order for a genus.
    Predict {
        #[arg(long)]
        genus: u32,
    },
    /// Infer the genus from a measured vanishing order.
    GenusInfer {
        #[arg(long)]
        order: i64,
    },
    /// Time the core pipelines at a small scale.
    Bench {
        #[arg(long, default_value_t = 6.0)]
        cutoff: f64,
    },
}

enum Failure {
    Usage(String),
    Computation(String),
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn comp(err: impl std::fmt::Display) -> Failure {
    Failure::Computation(err.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_threads(cli.threads);
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Computation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn init_threads(flag: Option<usize>) {
    let n = flag.or_else(|| {
        std::env::var("ZETALAB_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(n) = n {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

fn sig(v: f64, digits: usize) -> String {
    format!("{:.*e}", digits.saturating_sub(1), v)
}

fn parse_complex(text: &str) -> Option<(f64, f64)> {
    let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if let Some(body) = t.strip_suffix('i') {
        // split off the real part at the last sign that is not an exponent's
        let split = body
            .char_indices()
            .skip(1)
            .filter(|&(i, c)| {
                (c == '+' || c == '-') && !matches!(body.as_bytes()[i - 1], b'e' | b'E')
            })
            .map(|(i, _)| i)
            .last();
        let (re_str, im_str) = match split {
            Some(i) => (&body[..i], &body[i..]),
            None => ("0", body),
        };
        let im = match im_str {
            "" | "+" => 1.0,
            "-" => -1.0,
            s => s.parse().ok()?,
        };
        Some((re_str.parse().ok()?, im))
    } else {
        Some((t.parse().ok()?, 0.0))
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let digits = cli.digits;
    match cli.command {
        Cmd::Spectrum {
            group,
            cutoff,
            out,
            cache_dir,
        } => {
            let prec = cli.precision_bits.unwrap_or(200);
            cmd_spectrum(&group, cutoff, out, cache_dir, prec, digits)
        }
        Cmd::Zeta {
            spectrum,
            kind,
            mmax,
            points,
            out,
            plot,
        } => {
            let prec = cli.precision_bits.unwrap_or(200);
            cmd_zeta(&spectrum, &kind, mmax, &points, &out, plot, prec, digits)
        }
        Cmd::VerifySelberg { spectrum, s, mmax } => {
            let prec = cli.precision_bits.unwrap_or(200);
            cmd_verify_selberg(&spectrum, &s, mmax, prec, digits)
        }
        Cmd::OrderZero {
            schottky,
            radius,
            samples,
            center_re,
            center_im,
            coeff,
        } => cmd_order_zero(
            &schottky,
            radius,
            samples,
            (center_re, center_im),
            coeff,
            cli.precision_bits,
            digits,
        ),
        Cmd::Predict { genus } => cmd_predict(genus, digits),
        Cmd::GenusInfer { order } => cmd_genus_infer(order),
        Cmd::Bench { cutoff } => {
            let prec = cli.precision_bits.unwrap_or(200);
            cmd_bench(cutoff, prec)
        }
    }
}

fn cmd_spectrum(
    group_name: &str,
    cutoff: f64,
    out: Option<PathBuf>,
    cache_dir: Option<PathBuf>,
    prec: u32,
    digits: usize,
) -> Result<(), Failure> {
    if group_name != "bolza" {
        return Err(usage(format!("unknown group `{group_name}`, try `bolza`")));
    }
    if !(cutoff > 0.0) {
        return Err(usage("--cutoff must be positive"));
    }
    let group = build_bolza_group(prec).map_err(comp)?;
    let path = match (&out, &cache_dir) {
        (Some(p), _) => p.clone(),
        (None, Some(dir)) => dir.join(format!(
            "{}-{}-cutoff{cutoff}-p{prec}.spectrum",
            group.name,
            group.digest()
        )),
        (None, None) => return Err(usage("one of --out or --cache-dir is required")),
    };
    if cache_dir.is_some() && path.exists() {
        match load_spectrum_checked(&path, &group) {
            Ok(spec) if spec.cutoff == cutoff && spec.precision_bits == prec => {
                println!("cache hit: {}", path.display());
                print_spectrum_summary(&spec, digits);
                return Ok(());
            }
            // stale or foreign cache entry: recompute below and overwrite
            _ => println!("cache stale: {}", path.display()),
        }
    }
    let spec = enumerate_spectrum(&group, cutoff, prec).map_err(comp)?;
    if let Some(dir) = &cache_dir {
        std::fs::create_dir_all(dir).map_err(comp)?;
    }
    save_spectrum(&spec, &path).map_err(comp)?;
    println!("wrote {}", path.display());
    print_spectrum_summary(&spec, digits);
    Ok(())
}

fn print_spectrum_summary(spec: &LengthSpectrum, digits: usize) {
    let systole = spec.systole().map(|s| s.to_f64()).unwrap_or(f64::NAN);
    println!(
        "spectrum: {} distinct lengths, total multiplicity {}, systole {}",
        spec.entries.len(),
        spec.total_multiplicity(),
        sig(systole, digits)
    );
}

#[allow(clippy::too_many_arguments)]
fn cmd_zeta(
    spectrum: &Path,
    kind: &str,
    mmax: u32,
    points: &Path,
    out: &Path,
    plot: bool,
    prec: u32,
    digits: usize,
) -> Result<(), Failure> {
    let spec = load_spectrum(spectrum).map_err(comp)?;
    let text = std::fs::read_to_string(points).map_err(comp)?;
    let mut rows = vec![csv_header().to_string()];
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line == "s_re,s_im" {
            continue;
        }
        let (re_str, im_str) = line
            .split_once(',')
            .ok_or_else(|| usage(format!("points line {}: expected `s_re,s_im`", lineno + 1)))?;
        let (re, im): (f64, f64) = match (re_str.trim().parse(), im_str.trim().parse()) {
            (Ok(re), Ok(im)) => (re, im),
            _ => {
                return Err(usage(format!(
                    "points line {}: bad numbers `{line}`",
                    lineno + 1
                )))
            }
        };
        let s = Cplx::with_val(prec, re, im);
        let ev = match kind {
            "ruelle" => ruelle_product(&spec, &s),
            "selberg" => selberg_product(&spec, &s, mmax),
            other => return Err(usage(format!("unknown kind `{other}`"))),
        };
        rows.push(csv_row(&ev, digits));
    }
    std::fs::write(out, rows.join("\n") + "\n").map_err(comp)?;
    println!("wrote {} ({} evaluations)", out.display(), rows.len() - 1);
    if plot {
        let script = plot_script(out);
        let path = out.with_extension("plot.py");
        std::fs::write(&path, script).map_err(comp)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn plot_script(csv: &Path) -> String {
    let name = csv
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "zeta.csv".into());
    format!(
        "#!/usr/bin/env python3\n\
         # plot |zeta| along the evaluation points of {name}\n\
         import csv\n\
         import math\n\
         import matplotlib.pyplot as plt\n\
         \n\
         xs, ys = [], []\n\
         with open({name:?}) as fh:\n\
         \x20   for row in csv.DictReader(fh):\n\
         \x20       xs.append(float(row[\"s_re\"]))\n\
         \x20       ys.append(math.hypot(float(row[\"value_re\"]), float(row[\"value_im\"])))\n\
         plt.plot(xs, ys, marker=\"o\")\n\
         plt.xlabel(\"Re s\")\n\
         plt.ylabel(\"|zeta(s)|\")\n\
         plt.tight_layout()\n\
         plt.savefig({name:?} + \".png\", dpi=150)\n"
    )
}

fn cmd_verify_selberg(
    spectrum: &Path,
    s_text: &str,
    mmax: u32,
    prec: u32,
    digits: usize,
) -> Result<(), Failure> {
    let (re, im) =
        parse_complex(s_text).ok_or_else(|| usage(format!("bad complex point `{s_text}`")))?;
    let spec = load_spectrum(spectrum).map_err(comp)?;
    let s = Cplx::with_val(prec, re, im);
    let (residual, bound) = selberg_relation_residual(&spec, &s, mmax);
    println!(
        "selberg relation at s = ({}, {}), M = {mmax}: residual {} bound {}",
        sig(re, digits),
        sig(im, digits),
        sig(residual.to_f64(), digits),
        sig(bound.to_f64(), digits)
    );
    if residual <= bound {
        Ok(())
    } else {
        Err(comp("ResidualExceedsBound: telescoping check failed"))
    }
}

fn cmd_order_zero(
    config: &Path,
    radius: f64,
    samples: usize,
    center: (f64, f64),
    coeff: bool,
    prec_flag: Option<u32>,
    digits: usize,
) -> Result<(), Failure> {
    if !(radius > 0.0) {
        return Err(usage("--radius must be positive"));
    }
    if samples < 64 {
        return Err(usage("--samples must be at least 64"));
    }
    let text = std::fs::read_to_string(config).map_err(comp)?;
    let mut cfg = parse_config(&text).map_err(comp)?;
    if let Some(p) = prec_flag {
        cfg.precision_bits = p;
    }
    let group = build_from_config(&cfg).map_err(comp)?;
    let prec = cfg.precision_bits;
    let n = cfg.max_order;
    let f = |s: &Cplx| match schottky_ruelle(&group, s, n) {
        Ok(ev) => ev.value,
        // a failed evaluation poisons the sample; the order finder then
        // reports UnwrapFailure instead of guessing
        Err(_) => Cplx::with_val(prec, f64::NAN, f64::NAN),
    };
    let c = Cplx::with_val(prec, center.0, center.1);
    let mut report = winding_order(&f, &c, radius, samples).map_err(comp)?;
    if coeff {
        let radii = [radius, radius / 2.0, radius / 4.0];
        let (value, residual) = leading_coefficient(&f, report.winding, &c, &radii).map_err(comp)?;
        report.leading_coefficient = Some(value);
        report.residual = residual;
    }
    println!("{report}");
    println!("{}", report_csv(&report, digits));
    Ok(())
}

fn report_csv(r: &ContourOrderReport, digits: usize) -> String {
    let (cre, cim) = r.center.to_f64();
    let (lre, lim) = r
        .leading_coefficient
        .as_ref()
        .map(|c| c.to_f64())
        .unwrap_or((f64::NAN, f64::NAN));
    format!(
        "center_re,center_im,radius,samples,winding,min_modulus,coeff_re,coeff_im,residual\n{},{},{},{},{},{},{},{},{}",
        sig(cre, digits),
        sig(cim, digits),
        sig(r.radius, digits),
        r.samples,
        r.winding,
        sig(r.min_modulus_on_contour, digits),
        sig(lre, digits),
        sig(lim, digits),
        sig(r.residual, digits)
    )
}

fn cmd_predict(genus: u32, digits: usize) -> Result<(), Failure> {
    let ledger = ledger_for_genus(genus).map_err(comp)?;
    println!("genus: {}", ledger.genus);
    println!("euler_characteristic: {}", ledger.euler_characteristic);
    println!("b1_surface: {}", ledger.betti_surface);
    println!("b1_unit_tangent: {}", ledger.betti_unit_tangent);
    println!("predicted_order: {}", ledger.predicted_order);
    println!(
        "leading_coefficient_magnitude: {}",
        sig(ledger.fried_coefficient_magnitude, digits)
    );
    println!("convention: s^{{chi(Sigma)}} zeta_R holomorphic and nonzero at s = 0");
    println!(
        "orientable_bundles_assumed: {}",
        ledger.orientable_bundles_assumed
    );
    Ok(())
}

fn cmd_genus_infer(order: i64) -> Result<(), Failure> {
    let genus = genus_from_order(order).map_err(comp)?;
    println!("order {order} is realized by a compact oriented surface of genus {genus}");
    Ok(())
}

fn cmd_bench(cutoff: f64, prec: u32) -> Result<(), Failure> {
    if !(cutoff > 0.0) {
        return Err(usage("--cutoff must be positive"));
    }
    let t0 = std::time::Instant::now();
    let group = build_bolza_group(prec).map_err(comp)?;
    let t_group = t0.elapsed();
    let t0 = std::time::Instant::now();
    let spec = enumerate_spectrum(&group, cutoff, prec).map_err(comp)?;
    let t_spec = t0.elapsed();
    let s = Cplx::with_val(prec, 2.0, 0.0);
    let t0 = std::time::Instant::now();
    let _ = ruelle_product(&spec, &s);
    let t_zeta = t0.elapsed();
    println!(
        "bench: group {t_group:?}, spectrum cutoff {cutoff} ({} lengths) {t_spec:?}, ruelle at s=2 {t_zeta:?}",
        spec.entries.len()
    );
    Ok(())
}
