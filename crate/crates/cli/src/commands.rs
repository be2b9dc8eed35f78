use std::io::Write;
use std::path::Path;
use std::time::Instant;

use dpca::kernel::{embed, fit_kdpca, fit_kmdpca, fit_kpca, Block, DualModel, DEFAULT_EPSILON, DEFAULT_MULTI_EPSILON};
use dpca::synth::{
    gen_gaussian_clusters, gen_generative, three_ring_protocol, two_ring_protocol, GaussianClusterSpec,
    GenerativeModelSpec, SyntheticProtocol,
};
use dpca::{
    evaluate, fit_cpca, fit_dpca, fit_dpca_ridged, fit_mdpca, fit_mdpca_ridged, fit_pca, project, Dataset, KernelSpec,
    Normalization, SeededRng, SubspaceModel,
};
use ndarray::{Array2, ArrayView2};
use serde_json::{json, Value};

use crate::args::{BenchArgs, Command, InputArgs, KernelArgs, LinearArgs, SynthArgs, SynthKind};
use crate::error::{CliError, CliResult};
use crate::io::{component_header, read_dataset, read_labels, rows_of, write_json, write_labels, write_matrix};

pub fn run(command: Command) -> CliResult<()> {
    match command {
        Command::Pca(a) => linear("pca", &a, None, |t, _| fit_pca(t, a.input.d)),
        Command::Cpca { common, alpha } => linear("cpca", &common, Some(json!({ "alpha": alpha })), |t, b| {
            fit_cpca(t, one(b)?, alpha, common.input.d)
        }),
        Command::Dpca(a) => linear("dpca", &a, None, |t, b| match a.ridge {
            Some(r) => fit_dpca_ridged(t, one(b)?, a.input.d, r),
            None => fit_dpca(t, one(b)?, a.input.d),
        }),
        Command::Mdpca { common, weights } => {
            let echo = weights.as_ref().map(|w| json!({ "weights": w }));
            linear("mdpca", &common, echo, |t, b| {
                let w = weights.clone().unwrap_or_else(|| uniform(b.len()));
                match common.ridge {
                    Some(r) => fit_mdpca_ridged(t, b, &w, common.input.d, r),
                    None => fit_mdpca(t, b, &w, common.input.d),
                }
            })
        }
        Command::Kpca(a) => kernel("kpca", &a, |t, _| fit_kpca(t, &a.kernel, a.input.d)),
        Command::Kdpca(a) => kernel("kdpca", &a, |t, b| {
            fit_kdpca(t, one(b)?, &a.kernel, a.epsilon.unwrap_or(DEFAULT_EPSILON), a.input.d)
        }),
        Command::Kmdpca { common, weights } => kernel("kmdpca", &common, |t, b| {
            let w = weights.clone().unwrap_or_else(|| uniform(b.len()));
            let eps = common.epsilon.unwrap_or(DEFAULT_MULTI_EPSILON);
            fit_kmdpca(t, b, &common.kernel, &w, eps, common.input.d)
        }),
        Command::Synth(a) => synth(&a),
        Command::Bench(a) => bench(&a),
    }
}

fn uniform(count: usize) -> Vec<f64> {
    vec![1.0 / count.max(1) as f64; count]
}

fn one(backgrounds: &[Dataset]) -> dpca::Result<&Dataset> {
    backgrounds.first().ok_or(dpca::Error::NoBackgrounds)
}

/// How many `--background` flags a method accepts.
fn check_background_count(method: &str, count: usize) -> CliResult<()> {
    let ok = match method {
        "pca" | "kpca" => count == 0,
        "cpca" | "dpca" | "kdpca" => count == 1,
        _ => count >= 1,
    };
    if ok {
        return Ok(());
    }
    let wanted = match method {
        "pca" | "kpca" => "no --background",
        "cpca" | "dpca" | "kdpca" => "exactly one --background",
        _ => "at least one --background",
    };
    Err(CliError::Usage(format!("{method} takes {wanted} (got {count})")))
}

fn config_echo(method: &str, input: &InputArgs, extra: Option<Value>) -> Value {
    let mut config = json!({
        "command": method,
        "target": input.target,
        "backgrounds": input.background,
        "d": input.d,
        "seed": input.seed,
        "normalization": Normalization::from(input.normalization),
        "labels": input.labels,
    });
    if let (Some(Value::Object(extra)), Value::Object(map)) = (extra, &mut config) {
        map.extend(extra);
    }
    config
}

/// Writes embedding.csv, model.json and, with labels, metrics.json.
fn write_outputs(input: &InputArgs, embedding: ArrayView2<f64>, model: Value) -> CliResult<()> {
    let out = &input.out_dir;
    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    write_matrix(&out.join("embedding.csv"), &component_header("pc", embedding.ncols()), embedding)?;
    write_json(&out.join("model.json"), &model)?;
    if let Some(path) = &input.labels {
        let labels = read_labels(path)?;
        let report = evaluate(embedding, &labels, input.seed)?;
        write_json(&out.join("metrics.json"), &report)?;
    }
    Ok(())
}

fn linear<F>(method: &str, args: &LinearArgs, extra: Option<Value>, fit: F) -> CliResult<()>
where
    F: FnOnce(&Dataset, &[Dataset]) -> dpca::Result<SubspaceModel>,
{
    let input = &args.input;
    check_background_count(method, input.background.len())?;
    let target = read_dataset(&input.target)?.centered();
    let backgrounds = input
        .background
        .iter()
        .map(|p| read_dataset(p).map(Dataset::centered))
        .collect::<CliResult<Vec<_>>>()?;
    let model = fit(&target, &backgrounds)?.with_normalization(input.normalization.into());
    let embedding = project(&model, &target)?.coordinates;

    let mut extra = extra.unwrap_or_else(|| json!({}));
    if let Some(r) = args.ridge {
        extra["ridge"] = json!(r);
    }
    let doc = json!({
        "method": model.method(),
        "config": config_echo(method, input, Some(extra)),
        "eigenvalues": model.eigenvalues().to_vec(),
        "basis": rows_of(model.basis()),
        "background_scales": model.background_scales().to_vec(),
        "target_mean": model.target_mean().to_vec(),
        "weights": model.weights(),
        "normalization": model.normalization(),
    });
    write_outputs(input, embedding.view(), doc)
}

fn kernel<F>(method: &str, args: &KernelArgs, fit: F) -> CliResult<()>
where
    F: FnOnce(&Dataset, &[Dataset]) -> dpca::Result<DualModel>,
{
    let input = &args.input;
    check_background_count(method, input.background.len())?;
    if method == "kpca" && args.epsilon.is_some() {
        return Err(CliError::Usage("kpca does not take --epsilon".into()));
    }
    // kernel methods center in feature space, so inputs are used as read
    let target = read_dataset(&input.target)?;
    let backgrounds = input
        .background
        .iter()
        .map(|p| read_dataset(p))
        .collect::<CliResult<Vec<_>>>()?;
    let model = fit(&target, &backgrounds)?.with_normalization(input.normalization.into());
    let embedding = embed(&model, Block::Target)?.coordinates;

    let extra = json!({ "kernel": args.kernel, "epsilon": model.epsilon() });
    let doc = json!({
        "method": model.method(),
        "config": config_echo(method, input, Some(extra)),
        "eigenvalues": model.eigenvalues().to_vec(),
        "coefficients": rows_of(model.coefficients().view()),
        "background_scales": model.background_scales().to_vec(),
        "kernel": model.kernel(),
        "epsilon": model.epsilon(),
        "weights": model.weights(),
        "block_sizes": model.system().blocks().iter().map(|r| r.len()).collect::<Vec<_>>(),
        "normalization": model.normalization(),
    });
    write_outputs(input, embedding.view(), doc)
}

fn write_protocol(out: &Path, p: &SyntheticProtocol) -> CliResult<()> {
    let data = p.target.data();
    let header = component_header("x", data.dim());
    write_matrix(&out.join("target.csv"), &header, data.rows())?;
    write_labels(&out.join("labels.csv"), p.target.labels())?;
    for (i, b) in p.backgrounds.iter().enumerate() {
        write_matrix(&out.join(format!("background_{}.csv", i + 1)), &header, b.rows())?;
    }
    Ok(())
}

fn synth(a: &SynthArgs) -> CliResult<()> {
    let family = if a.generative {
        SynthKind::Generative
    } else if a.paper_vii_c {
        SynthKind::Clusters
    } else {
        SynthKind::Circles
    };
    if let Some(kind) = a.kind.filter(|k| *k != family) {
        return Err(CliError::Usage(format!(
            "synth family {kind:?} does not match the protocol flag ({family:?})"
        )));
    }
    let out = &a.out_dir;
    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    if a.generative {
        let spec = GenerativeModelSpec {
            dim: a.dim,
            k: a.k,
            sigma_b: a.sigma_b.clone(),
            sigma_x: a.sigma_x.clone(),
            seed: a.seed,
        };
        let s = gen_generative(&spec, a.target_samples, a.background_samples)?;
        let header = component_header("x", a.dim);
        write_matrix(&out.join("target.csv"), &header, s.target.data().rows())?;
        write_labels(&out.join("labels.csv"), s.target.labels())?;
        write_matrix(&out.join("background_1.csv"), &header, s.background.rows())?;
        let planted = s.planted.view().insert_axis(ndarray::Axis(0));
        write_matrix(&out.join("planted.csv"), &header, planted)?;
        return Ok(());
    }
    let protocol = if a.paper_vii_b {
        two_ring_protocol(a.noise, a.seed)?
    } else if a.paper_vii_d {
        three_ring_protocol(a.noise, a.seed)?
    } else {
        let spec = if a.variance {
            GaussianClusterSpec::literal_covariance()
        } else {
            GaussianClusterSpec::default()
        };
        gen_gaussian_clusters(&spec, a.seed)?
    };
    write_protocol(out, &protocol)
}

fn random_dataset(rng: &mut SeededRng, n: usize, dim: usize, scale: f64) -> Dataset {
    let rows = Array2::from_shape_simple_fn((n, dim), || scale * rng.normal());
    Dataset::from_rows(rows).expect("finite samples")
}

fn time_fit(method: &str, x: &Dataset, y1: &Dataset, y2: &Dataset) -> dpca::Result<()> {
    let linear = KernelSpec::Linear;
    let xc = x.clone().centered();
    let bg = [y1.clone().centered(), y2.clone().centered()];
    match method {
        "pca" => fit_pca(&xc, 2).map(drop),
        "cpca" => fit_cpca(&xc, &bg[0], 1.0, 2).map(drop),
        "dpca" => fit_dpca(&xc, &bg[0], 2).map(drop),
        "mdpca" => fit_mdpca(&xc, &bg, &[0.5, 0.5], 2).map(drop),
        "kpca" => fit_kpca(x, &linear, 2).map(drop),
        "kdpca" => fit_kdpca(x, y1, &linear, DEFAULT_EPSILON, 2).map(drop),
        "kmdpca" => fit_kmdpca(x, &[y1.clone(), y2.clone()], &linear, &[0.5, 0.5], DEFAULT_MULTI_EPSILON, 2).map(drop),
        other => Err(dpca::Error::InvalidSpec(format!("unknown method {other}"))),
    }
}

const BENCH_METHODS: [&str; 7] = ["pca", "cpca", "dpca", "mdpca", "kpca", "kdpca", "kmdpca"];

/// One CSV row per (method, size, dimension) with the best of `repeats`
/// wall-clock times. Failing cells are recorded, not fatal.
fn bench(a: &BenchArgs) -> CliResult<()> {
    if let Some(m) = a.methods.iter().find(|m| !BENCH_METHODS.contains(&m.as_str())) {
        return Err(CliError::Usage(format!("unknown bench method {m:?}")));
    }
    let mut out: Box<dyn Write> = match &a.out {
        Some(p) => Box::new(std::fs::File::create(p).map_err(|e| CliError::io(p, e))?),
        None => Box::new(std::io::stdout().lock()),
    };
    let stdout_err = |e| CliError::io("<bench output>", e);
    writeln!(out, "method,m,n,D,N,seconds,status").map_err(stdout_err)?;
    for method in &a.methods {
        for &dim in &a.dims {
            for &total in &a.sizes {
                let m = total / 2;
                let n = total - m;
                let mut rng = SeededRng::new(a.seed);
                let x = random_dataset(&mut rng, m.max(1), dim.max(1), 2.0);
                let y1 = random_dataset(&mut rng, n.max(1), dim.max(1), 1.0);
                let y2 = random_dataset(&mut rng, n.max(1), dim.max(1), 1.5);
                let mut best = f64::INFINITY;
                let mut status = String::from("ok");
                for _ in 0..a.repeats.max(1) {
                    let start = Instant::now();
                    if let Err(e) = time_fit(method, &x, &y1, &y2) {
                        status = format!("error: {e}").replace(',', ";");
                        break;
                    }
                    best = best.min(start.elapsed().as_secs_f64());
                }
                let seconds = if best.is_finite() { format!("{best:.6e}") } else { "nan".into() };
                let total_n = match method.as_str() {
                    "pca" | "kpca" => m,
                    "kmdpca" | "mdpca" => m + 2 * n,
                    _ => m + n,
                };
                writeln!(out, "{method},{m},{n},{dim},{total_n},{seconds},{status}").map_err(stdout_err)?;
            }
        }
    }
    Ok(())
}
