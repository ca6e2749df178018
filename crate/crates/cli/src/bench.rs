//! Benchmark grid: times the randomized construction phase by phase against
//! the exact-SVD baseline on seeded synthetic instances, and reports the
//! cost deviation between the two on shared sampled closed sets.

use pcsketch::coreset::{build_projective_coreset, coreset_cost, CoresetParams};
use pcsketch::geometry::random_closed_set;
use pcsketch::matrix::{random_dense, random_sparse};
use pcsketch::util::derive_seed;
use pcsketch::Error;
use std::process::ExitCode;
use std::str::FromStr;

/// One grid entry: shape, density, and coreset rank.
#[derive(Debug, Clone, Copy)]
pub struct BenchCase {
    pub n: usize,
    pub d: usize,
    pub density: f64,
    pub m: usize,
}

impl FromStr for BenchCase {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 4 {
            return Err(format!("'{s}': expected n:d:density:m"));
        }
        let n = parts[0].parse().map_err(|_| format!("bad n '{}'", parts[0]))?;
        let d = parts[1].parse().map_err(|_| format!("bad d '{}'", parts[1]))?;
        let density: f64 = parts[2]
            .parse()
            .map_err(|_| format!("bad density '{}'", parts[2]))?;
        let m = parts[3].parse().map_err(|_| format!("bad m '{}'", parts[3]))?;
        if !(density > 0.0 && density <= 1.0) {
            return Err(format!("density {density} outside (0, 1]"));
        }
        Ok(BenchCase { n, d, density, m })
    }
}

#[derive(clap::Args)]
pub struct BenchArgs {
    /// Grid entry n:d:density:m; repeat for more rows (density 1 = dense)
    #[arg(long = "case", required = true, env = "PCSKETCH_CASES", value_delimiter = ';')]
    cases: Vec<BenchCase>,
    #[arg(long, env = "PCSKETCH_EPSILON", default_value_t = 0.5)]
    epsilon: f64,
    #[arg(long, env = "PCSKETCH_CONSTANT_C", default_value_t = 1.0)]
    constant_c: f64,
    /// Also time the exact-SVD baseline and compare costs against it
    #[arg(long, env = "PCSKETCH_EXACT_BASELINE")]
    exact_baseline: bool,
    /// Closed sets sampled per case for the accuracy comparison
    #[arg(long, env = "PCSKETCH_CLOSED_SETS", default_value_t = 5)]
    closed_sets: usize,
    #[arg(long, env = "PCSKETCH_SEED", default_value_t = 0)]
    seed: u64,
}

pub fn cmd_bench(args: BenchArgs) -> Result<ExitCode, Error> {
    for (idx, case) in args.cases.iter().enumerate() {
        let instance_seed = derive_seed(args.seed, idx as u64);
        let a = if case.density < 1.0 {
            random_sparse(case.n, case.d, case.density, instance_seed)
        } else {
            random_dense(case.n, case.d, instance_seed)
        };
        let params = match CoresetParams::new(1, 1, args.epsilon, 0.1) {
            Ok(p) => p
                .with_rank_override(Some(case.m))
                .with_sketch_constant(args.constant_c),
            Err(e) => {
                println!("case={idx} status=skipped reason=\"{e}\"");
                continue;
            }
        };
        if let Err(e) = params.validate_against(case.n, case.d) {
            println!("case={idx} status=skipped reason=\"{e}\"");
            continue;
        }

        let coreset = match build_projective_coreset(&a, &params, derive_seed(args.seed, 1000 + idx as u64)) {
            Ok(c) => c,
            Err(e) => {
                println!("case={idx} status=skipped reason=\"{e}\"");
                continue;
            }
        };

        let mut line = format!(
            "case={idx} n={} d={} density={} m={} nnz={} \
             t_sketch_s={:.6} t_orthonormalize_s={:.6} t_small_svd_s={:.6} \
             t_project_s={:.6} t_total_s={:.6}",
            case.n,
            case.d,
            case.density,
            case.m,
            a.nnz(),
            coreset.timings.sketch.as_secs_f64(),
            coreset.timings.orthonormalize.as_secs_f64(),
            coreset.timings.small_svd.as_secs_f64(),
            coreset.timings.project.as_secs_f64(),
            coreset.construction_time.as_secs_f64()
        );

        if args.exact_baseline {
            match crate::exact_baseline(&a, &params) {
                Ok((exact, t_exact)) => {
                    let mut max_dev = 0.0f64;
                    for ci in 0..args.closed_sets {
                        let set = random_closed_set(
                            case.d,
                            1,
                            1,
                            false,
                            0.0,
                            derive_seed(args.seed, 2000 + ci as u64),
                        );
                        let approx = coreset_cost(&coreset, &set)?;
                        let reference = coreset_cost(&exact, &set)?;
                        if reference > 0.0 {
                            max_dev = max_dev.max((approx - reference).abs() / reference);
                        }
                    }
                    line.push_str(&format!(
                        " t_exact_s={t_exact:.6} max_rel_dev={max_dev:.6e}"
                    ));
                }
                Err(e) => line.push_str(&format!(" exact_error=\"{e}\"")),
            }
        }
        println!("{line}");
    }
    Ok(ExitCode::SUCCESS)
}
