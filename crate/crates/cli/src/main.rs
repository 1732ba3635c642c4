use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};
use sphere_census::annuli::{
    check_hypothesis_h, decompose, pole_preimages, theorem3_bound, HypothesisCheck,
};
use sphere_census::census::growth_report;
use sphere_census::degree::{global_degree, global_degree_sampled};
use sphere_census::format::round_sig;
use sphere_census::gallery::run_all;
use sphere_census::lefschetz::lefschetz_index;
use sphere_census::strip_lift::{lift, verify_index};
use sphere_census::winding::SampledCurve;
use sphere_census::{parse_map, MapSpec, SpherePoint};

const SEED_VAR: &str = "SPHERE_CENSUS_SEED";

#[derive(Parser)]
#[command(
    name = "sphere-census",
    version,
    about = "Fixed-point census for sphere maps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fixed-point counts of fⁿ for n = 1..n-max, as CSV
    Census {
        #[arg(long)]
        map: String,
        #[arg(long, default_value_t = 8)]
        n_max: u32,
        /// Output path; stdout when omitted
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Topological degree from the preimages of a value
    Degree {
        #[arg(long)]
        map: String,
        /// Value as `re,im`; a seeded regular value when omitted
        #[arg(long)]
        value: Option<String>,
    },
    /// Lefschetz index of the map along a curve read from CSV
    Index {
        #[arg(long)]
        map: String,
        #[arg(long)]
        curve: PathBuf,
    },
    /// Annulus decomposition of f⁻¹(A)
    Annuli {
        #[arg(long)]
        map: String,
    },
    /// Lift each annulus component to the strip and certify its index
    StripIndex {
        #[arg(long)]
        map: String,
        /// Deck translate of the lift; 0 when omitted
        #[arg(long = "lift", allow_hyphen_values = true)]
        lifts: Vec<i64>,
    },
    /// Probe the essential-image hypothesis
    CheckH {
        #[arg(long)]
        map: String,
        /// Where the witness curve goes on failure
        #[arg(long, default_value = "witness.csv")]
        out: PathBuf,
    },
    /// Run every built-in check
    Gallery,
}

enum Failure {
    Parse(String),
    Analysis { kind: &'static str, message: String },
}

impl Failure {
    fn analysis(kind: &'static str, err: impl std::fmt::Display) -> Self {
        Failure::Analysis {
            kind,
            message: err.to_string(),
        }
    }

    fn io(err: io::Error) -> Self {
        Failure::analysis("io", err)
    }
}

fn parse_spec(text: &str) -> Result<MapSpec, Failure> {
    parse_map(text).map_err(|e| Failure::Parse(format!("map spec: {e}")))
}

fn seed() -> Result<u64, Failure> {
    match std::env::var(SEED_VAR) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Failure::Parse(format!("{SEED_VAR} is not an unsigned integer: {v:?}"))),
        Err(_) => Ok(0),
    }
}

fn parse_value(text: &str) -> Result<SpherePoint, Failure> {
    let bad = || Failure::Parse(format!("value must be `re,im`: {text:?}"));
    let (re, im) = text.split_once(',').ok_or_else(bad)?;
    let re: f64 = re.trim().parse().map_err(|_| bad())?;
    let im: f64 = im.trim().parse().map_err(|_| bad())?;
    if !re.is_finite() || !im.is_finite() {
        return Err(bad());
    }
    Ok(SpherePoint::north(Complex64::new(re, im)))
}

/// Serialize with every float rounded to 12 significant digits.
fn to_json<T: Serialize>(value: &T) -> Value {
    let mut v = serde_json::to_value(value).expect("reports serialize");
    round_floats(&mut v);
    v
}

fn round_floats(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(x) = n
                .as_f64()
                .and_then(|x| serde_json::Number::from_f64(round_sig(x)))
            {
                *n = x;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_floats),
        Value::Object(map) => map.values_mut().for_each(round_floats),
        _ => {}
    }
}

fn print_json(v: &Value) {
    println!("{v}");
}

fn run(command: Command) -> Result<ExitCode, Failure> {
    let seed = seed()?;
    match command {
        Command::Census { map, n_max, out } => {
            let f = parse_spec(&map)?;
            if n_max == 0 {
                return Err(Failure::Parse("n-max must be positive".into()));
            }
            let report =
                growth_report(&f, n_max, seed).map_err(|e| Failure::analysis("census", e))?;
            let result = match out {
                Some(path) => {
                    let file = File::create(&path).map_err(Failure::io)?;
                    report.write_csv(BufWriter::new(file))
                }
                None => report.write_csv(io::stdout().lock()),
            };
            result.map_err(|e| Failure::analysis("io", e))?;
        }
        Command::Degree { map, value } => {
            let f = parse_spec(&map)?;
            let report = match value {
                Some(text) => global_degree(&f, parse_value(&text)?),
                None => global_degree_sampled(&f, seed),
            }
            .map_err(|e| Failure::analysis("degree", e))?;
            print_json(&to_json(&report));
        }
        Command::Index { map, curve } => {
            let f = parse_spec(&map)?;
            let file = File::open(&curve).map_err(Failure::io)?;
            let gamma =
                SampledCurve::read_csv(file).map_err(|e| Failure::Parse(format!("curve: {e}")))?;
            let index = lefschetz_index(&f, &gamma).map_err(|e| Failure::analysis("index", e))?;
            print_json(&json!({
                "map": f.to_string(),
                "samples": gamma.len(),
                "chart": to_json(&gamma.chart()),
                "index": index,
            }));
        }
        Command::Annuli { map } => {
            let f = parse_spec(&map)?;
            let preimages = pole_preimages(&f).map_err(|e| Failure::analysis("annuli", e))?;
            let components = decompose(&f, seed).map_err(|e| Failure::analysis("annuli", e))?;
            let rows: Vec<Value> = components
                .iter()
                .map(|c| {
                    let mut v = to_json(c);
                    v["fixed_point_bound"] = match theorem3_bound(c) {
                        Ok(b) => json!(b),
                        Err(_) => Value::Null,
                    };
                    v
                })
                .collect();
            print_json(&json!({
                "map": f.to_string(),
                "pole_preimages": to_json(&preimages),
                "components": rows,
            }));
        }
        Command::StripIndex { map, lifts } => {
            let f = parse_spec(&map)?;
            let lifts = if lifts.is_empty() { vec![0] } else { lifts };
            let components =
                decompose(&f, seed).map_err(|e| Failure::analysis("strip-index", e))?;
            let mut failed = false;
            for (i, c) in components.iter().enumerate() {
                for &k in &lifts {
                    let outcome = lift(&f, c, k).and_then(|strip| verify_index(&strip));
                    let line = match outcome {
                        Ok(r) => json!({"component": i, "k": k, "result": to_json(&r)}),
                        Err(e) => {
                            failed = true;
                            json!({"component": i, "k": k, "error": e.to_string()})
                        }
                    };
                    print_json(&line);
                }
            }
            if failed {
                return Ok(ExitCode::from(1));
            }
        }
        Command::CheckH { map, out } => {
            let f = parse_spec(&map)?;
            match check_hypothesis_h(&f).map_err(|e| Failure::analysis("check-h", e))? {
                HypothesisCheck::Pass => print_json(&json!({"map": f.to_string(), "pass": true})),
                HypothesisCheck::Fail(w) => {
                    let mut file = BufWriter::new(File::create(&out).map_err(Failure::io)?);
                    w.curve
                        .write_csv(&mut file)
                        .and_then(|_| file.flush())
                        .map_err(Failure::io)?;
                    print_json(&json!({
                        "map": f.to_string(),
                        "pass": false,
                        "witness": {
                            "center": to_json(&w.center),
                            "radius": round_sig(w.radius),
                            "loop_winding": w.loop_winding,
                            "image_winding": w.image_winding,
                            "curve": out.display().to_string(),
                        },
                    }));
                    return Err(Failure::Analysis {
                        kind: "hypothesis_failed",
                        message: format!(
                            "image of an inessential loop winds {} times about S",
                            w.image_winding
                        ),
                    });
                }
            }
        }
        Command::Gallery => {
            let checks = run_all(seed);
            for c in &checks {
                let mut v = to_json(c);
                // wall time is not reproducible
                v.as_object_mut().map(|o| o.remove("seconds"));
                print_json(&v);
            }
            if !checks.iter().all(|c| c.pass) {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(Failure::Parse(message)) => {
            eprintln!("{}", json!({"error": "parse", "message": message}));
            ExitCode::from(2)
        }
        Err(Failure::Analysis { kind, message }) => {
            eprintln!("{}", json!({"error": kind, "message": message}));
            ExitCode::from(1)
        }
    }
}
