use std::path::Path;

use serde_json::json;

use modkit::constructions::adversarial::adversarial;
use modkit::constructions::basic::{four_item_worstcase, pawlik, symmetric_example};
use modkit::constructions::km::{km20, km70, km_certificates, structural_claims, KmFunction, KmOracle, Level};
use modkit::expander::bounds::{bound_suite, published_profile, union_bound_rate, BoundProfile};
use modkit::expander::{check_recombination, frequent_collection, recombine, sample_biregular, verify_expansion, BipartiteGraph};
use modkit::function::Evaluator;
use modkit::io::FunctionFile;
use modkit::learner::{learn, learner_error_profile, Method, ProfileRow};
use modkit::metrics::{
    closest_linear, kalton_ratio, kalton_search, modularity_eps, symmetric_modularity_eps, FitMode, Variant,
};
use modkit::metrics::fit::ACTIVE_TOL;
use modkit::report::Check;
use modkit::{Collection, Error, LinearFunction, Mode, Oracle, SetFunction};

use crate::input::{self, load_source, Source};
use crate::report::ReportDocument;
use crate::{Command, ConstructKind, ExpanderCommand, LevelArg, MethodArg, VariantArg, VerifyTarget};

type Result<T> = std::result::Result<T, Error>;

const VALUE_TOL: f64 = 1e-9;

pub fn run(cmd: Command) -> Result<ReportDocument> {
    match cmd {
        Command::Eval { function, sets } => eval(&function, &sets),
        Command::Eps {
            function,
            variant,
            samples,
            seed,
        } => eps(&function, variant, samples, seed),
        Command::Fit {
            function,
            samples,
            seed,
            out,
        } => fit(&function, samples, seed, out.as_deref()),
        Command::Learn {
            function,
            method,
            delta,
            out,
            profile,
            samples_per_size,
            seed,
        } => learn_cmd(&function, method, delta, out.as_deref(), profile.as_deref(), samples_per_size, seed),
        Command::Construct {
            kind,
            k,
            n,
            eps,
            delta,
            seed,
            out,
        } => construct(kind, k, n, eps, delta, seed, out.as_deref()),
        Command::Verify {
            target,
            level,
            samples,
            pairs,
            seed,
            k,
        } => verify(target, level, samples, pairs.unwrap_or(samples * 10), seed, k),
        Command::Expander { action } => expander(action),
        Command::Bounds { preset, params } => bounds(preset.as_deref(), params.as_deref()),
        Command::Search {
            n,
            budget,
            seed,
            warm,
            out,
        } => search(n, budget, seed, warm.as_deref(), out.as_deref()),
    }
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

fn linear_json(g: &LinearFunction) -> serde_json::Value {
    json!({ "c0": g.c0, "coeffs": g.coeffs })
}

fn eval(spec: &str, sets: &[String]) -> Result<ReportDocument> {
    let src = load_source(spec)?;
    let n = src.n();
    let mut doc = ReportDocument::new("eval");
    doc.input("fn", spec);
    doc.input("sets", sets);
    let mut values = Vec::new();
    for text in sets {
        let row = match &src {
            Source::Function(f) => {
                let s = input::item_set(text, n)?;
                json!({ "set": s.to_item_list(), "value": f.evaluate(s)? })
            }
            Source::Km(k) => {
                let s = input::wide_set(text, n)?;
                let (value, rule) = k.explain(s);
                json!({ "set": s.to_item_list(), "value": value, "rule": rule })
            }
            Source::Adversarial(a) => {
                let s = input::large_set(text, n)?;
                json!({ "set": text, "size": s.len(), "imbalance": a.imbalance(&s), "value": a.value(&s) })
            }
        };
        values.push(row);
    }
    doc.result("n", n);
    doc.result("values", values);
    Ok(doc)
}

fn mode_of(samples: Option<usize>, seed: u64) -> Mode {
    samples.map_or(Mode::Exact, |c| Mode::sampled(c, seed))
}

fn eps(spec: &str, variant: VariantArg, samples: Option<usize>, seed: u64) -> Result<ReportDocument> {
    let f = load_source(spec)?.function()?;
    let mode = mode_of(samples, seed);
    let mut doc = ReportDocument::new("eps");
    doc.input("fn", spec);
    doc.input("mode", mode);
    let variants: &[Variant] = match variant {
        VariantArg::Weak => &[Variant::Weak],
        VariantArg::Strong => &[Variant::Strong],
        VariantArg::Both => &[Variant::Weak, Variant::Strong],
    };
    let delta = if mode.is_exact() && f.n() <= modkit::function::MAX_TABLE_ITEMS {
        Some(closest_linear(&f, FitMode::Exact)?.delta)
    } else {
        None
    };
    let mut witnesses = serde_json::Map::new();
    for &v in variants {
        let name = match v {
            Variant::Weak => "weak",
            Variant::Strong => "strong",
        };
        let (value, witness) = if let (Evaluator::Symmetric(_), true) = (f.evaluator(), mode.is_exact()) {
            let sv = symmetric_modularity_eps(&f, v)?;
            (sv.value, json!({ "sizes": sv.sizes }))
        } else {
            let viol = modularity_eps(&f, v, mode)?;
            (viol.value, json!([viol.s.to_item_list(), viol.t.to_item_list()]))
        };
        doc.result(&format!("eps_{name}"), value);
        witnesses.insert(name.into(), witness);
        if let Some(d) = delta {
            doc.result(&format!("ratio_{name}"), if value > 1e-12 { d / value } else { 0.0 });
        }
    }
    doc.result("delta", delta);
    doc.result("witnesses", witnesses);
    doc.result("tolerances", json!({ "value": VALUE_TOL, "active": ACTIVE_TOL }));
    Ok(doc)
}

fn fit(spec: &str, samples: Option<usize>, seed: u64, out: Option<&Path>) -> Result<ReportDocument> {
    let f = load_source(spec)?.function()?;
    let mode = samples.map_or(FitMode::Exact, |count| FitMode::SampledConstraints { count, seed });
    let fit = closest_linear(&f, mode)?;
    let mut doc = ReportDocument::new("fit");
    doc.input("fn", spec);
    doc.input("mode", mode);
    doc.result("g", linear_json(&fit.g));
    doc.result("delta", fit.delta);
    doc.result("exact", fit.exact);
    doc.result("rounds", fit.rounds);
    let active: Vec<_> = fit
        .active_sets
        .iter()
        .zip(&fit.weights)
        .map(|(s, w)| json!({ "set": s.to_item_list(), "weight": w, "residual": f.value(*s) - fit.g.eval(*s) }))
        .collect();
    doc.result("active", active);
    if fit.exact {
        let worst = modkit::max_distance(&f, &SetFunction::linear(fit.g.clone())?, Mode::Exact)?;
        doc.check(&Check::new(
            "residual_matches_delta",
            (worst.value - fit.delta).abs() <= 1e-7 * (1.0 + fit.delta),
            format!("max |f - g| = {} vs Δ = {}", worst.value, fit.delta),
        ));
    }
    let mass: f64 = fit.weights.iter().map(|w| w.abs()).sum();
    doc.check(&Check::new(
        "dual_weights_normalized",
        fit.weights.is_empty() || (mass - 1.0).abs() <= 1e-6,
        format!("Σ|w| = {mass}"),
    ));
    if let Some(path) = out {
        write_json(path, &FunctionFile::from_linear(&fit.g))?;
        doc.result("out", path.display().to_string());
    }
    Ok(doc)
}

fn profile_csv(rows: &[ProfileRow]) -> String {
    let mut s = String::from("size,max_err,bound,samples\n");
    for r in rows {
        s.push_str(&format!("{},{},{},{}\n", r.size, r.max_err, r.bound, r.samples));
    }
    s
}

#[allow(clippy::too_many_arguments)]
fn learn_cmd(
    spec: &str,
    method: MethodArg,
    delta: Option<f64>,
    out: Option<&Path>,
    profile: Option<&Path>,
    samples_per_size: usize,
    seed: u64,
) -> Result<ReportDocument> {
    let src = load_source(spec)?;
    let oracle = src.oracle()?;
    let n = oracle.n();
    let (delta, delta_source) = match (delta, &src) {
        (Some(d), _) => (d, "supplied"),
        (None, Source::Adversarial(a)) => (a.spec.delta, "instance"),
        (None, Source::Function(f)) if n <= modkit::function::MAX_TABLE_ITEMS => {
            (closest_linear(f, FitMode::Exact)?.delta, "closest_linear")
        }
        _ => return Err(usage("--delta is required when n > 24")),
    };
    let method = match method {
        MethodArg::Hadamard => Method::Hadamard,
        MethodArg::Lp => Method::Lp,
    };
    let r = learn(oracle, method, Some(delta))?;
    let rows = learner_error_profile(&r.h, oracle, delta, samples_per_size, seed)?;
    let mut doc = ReportDocument::new("learn");
    doc.input("fn", spec);
    doc.input("method", method);
    doc.input("samples_per_size", samples_per_size);
    doc.input("seed", seed);
    doc.result("n", n);
    doc.result("delta", delta);
    doc.result("delta_source", delta_source);
    doc.result("query_count", r.query_count);
    doc.result("h", linear_json(&r.h));
    doc.result("profile", &rows);
    for row in &rows {
        doc.check(&Check::new(
            format!("envelope_size_{}", row.size),
            row.max_err <= row.bound + VALUE_TOL,
            format!("max error {} vs bound {}", row.max_err, row.bound),
        ));
    }
    if let Source::Adversarial(a) = &src {
        let t = &a.hidden_t;
        let err = (r.h.eval_large(t) - a.value(t))
            .abs()
            .max((r.h.eval_large(&t.complement()) - a.value(&t.complement())).abs());
        doc.result("error_at_hidden_pair", err);
        doc.result("hardness_floor", a.hardness_floor());
        let applies = a.predicted_gap() / 2.0 >= a.hardness_floor();
        doc.result("hardness_floor_applies", applies);
        if applies {
            doc.check(&Check::new(
                "hardness_floor",
                err >= a.hardness_floor() - VALUE_TOL,
                format!("max error on T, T̄ = {err} vs floor {}", a.hardness_floor()),
            ));
        }
    }
    if let Some(path) = out {
        write_json(path, &FunctionFile::from_linear(&r.h))?;
        doc.result("out", path.display().to_string());
    }
    let csv_path = profile.map(Path::to_path_buf).or_else(|| out.map(|p| p.with_extension("csv")));
    if let Some(path) = csv_path {
        std::fs::write(&path, profile_csv(&rows))?;
        doc.result("profile_csv", path.display().to_string());
    }
    Ok(doc)
}

fn km_descriptor(f: &KmFunction) -> serde_json::Value {
    let u = f.universe();
    let (variant, eps) = f.claimed();
    json!({
        "name": f.name(),
        "k": u.k(),
        "n": u.n(),
        "m": f.m(),
        "rules": format!("{:?}", f.rules()),
        "claimed": { "variant": variant, "eps": eps },
        "vectors": (0..u.n()).map(|i| u.vector(i).to_vec()).collect::<Vec<_>>(),
        "generators": u.generators().iter().map(|g| g.to_item_list()).collect::<Vec<_>>(),
    })
}

#[allow(clippy::too_many_arguments)]
fn construct(
    kind: ConstructKind,
    k: Option<usize>,
    n: Option<usize>,
    eps: Option<f64>,
    delta: Option<f64>,
    seed: u64,
    out: Option<&Path>,
) -> Result<ReportDocument> {
    let mut doc = ReportDocument::new("construct");
    let need = |x: Option<usize>, what: &str| x.ok_or_else(|| usage(format!("--{what} is required")));
    let artifact: serde_json::Value = match kind {
        ConstructKind::Pawlik => {
            let k = k.unwrap_or(4);
            doc.input("kind", "pawlik");
            doc.input("k", k);
            serde_json::to_value(FunctionFile::from_function(&pawlik(k)?)?)?
        }
        ConstructKind::Symm => {
            let n = need(n, "n")?;
            let e = eps.ok_or_else(|| usage("--eps is required"))?;
            doc.input("kind", "symm");
            doc.input("n", n);
            doc.input("eps", e);
            serde_json::to_value(FunctionFile::from_function(&symmetric_example(n, e)?)?)?
        }
        ConstructKind::Four => {
            doc.input("kind", "four");
            serde_json::to_value(FunctionFile::from_function(&four_item_worstcase())?)?
        }
        ConstructKind::Km20 => {
            doc.input("kind", "km20");
            serde_json::to_value(FunctionFile::from_function(&km20().to_set_function()?)?)?
        }
        ConstructKind::Km70 => {
            doc.input("kind", "km70");
            km_descriptor(&km70())
        }
        ConstructKind::Adversarial => {
            let n = need(n, "n")?;
            let d = delta.unwrap_or(((n as f64).ln() / n as f64).sqrt());
            doc.input("kind", "adversarial");
            doc.input("n", n);
            doc.input("delta", d);
            doc.input("seed", seed);
            let a = adversarial(n, d, seed)?;
            doc.result("predicted_gap", a.predicted_gap());
            doc.result("hardness_floor", a.hardness_floor());
            serde_json::to_value(a)?
        }
    };
    if let Some(n) = artifact.get("n") {
        doc.result("n", n);
    }
    match out {
        Some(path) => {
            write_json(path, &artifact)?;
            doc.result("out", path.display().to_string());
        }
        None => doc.result("artifact", artifact),
    }
    Ok(doc)
}

fn verify(target: VerifyTarget, level: LevelArg, samples: usize, pairs: usize, seed: u64, k: usize) -> Result<ReportDocument> {
    let mut doc = ReportDocument::new("verify");
    doc.input("level", matches!(level, LevelArg::Exact).then_some("exact").unwrap_or("sampled"));
    if !matches!(level, LevelArg::Exact) {
        doc.input("samples", samples);
        doc.input("pairs", pairs);
        doc.input("seed", seed);
    }
    match target {
        VerifyTarget::Km70 | VerifyTarget::Km20 => {
            let f = if matches!(target, VerifyTarget::Km70) { km70() } else { km20() };
            doc.input("target", f.name());
            let lvl = match level {
                LevelArg::Exact => Level::Exact,
                LevelArg::Sampled => Level::Sampled { samples, pairs, seed },
            };
            let report = km_certificates(&f, lvl)?;
            doc.checks(&report.checks);
            let structural = structural_claims(f.universe());
            let strong = matches!(target, VerifyTarget::Km70);
            doc.checks(structural.checks.iter().filter(|c| strong || c.name.starts_with("weak_")));
            doc.result("n", report.n);
            doc.result("m", report.m);
            doc.result("claimed", json!({ "variant": f.claimed().0, "eps": f.claimed().1 }));
            doc.result("max_violation", report.max_violation);
            doc.result("violation_witness", report.violation_witness);
            doc.result("generator_pair_violation", report.generator_pair_violation);
            doc.result("certificate", &report.certificate);
            doc.result("structural", &structural.checks);
        }
        VerifyTarget::Pawlik => {
            let f = pawlik(k)?;
            doc.input("target", "pawlik");
            doc.input("k", k);
            let mode = match level {
                LevelArg::Exact => Mode::Exact,
                LevelArg::Sampled => Mode::sampled(pairs, seed),
            };
            for (v, claimed, name) in [(Variant::Weak, 1.0, "weak"), (Variant::Strong, 2.0, "strong")] {
                let viol = modularity_eps(&f, v, mode)?;
                let ok = if mode.is_exact() {
                    viol.value == claimed
                } else {
                    viol.value <= claimed
                };
                doc.result(&format!("eps_{name}"), viol.value);
                doc.check(
                    &Check::new(format!("eps_{name}"), ok, format!("found {} vs claimed {claimed}", viol.value))
                        .with_witness(Some(format!("{} {}", viol.s, viol.t))),
                );
            }
            let fit = closest_linear(&f, FitMode::Exact)?;
            doc.result("delta", fit.delta);
            doc.check(&Check::new("delta_below_3/2", fit.delta < 1.5, format!("Δ = {}", fit.delta)));
        }
    }
    Ok(doc)
}

fn expander(action: ExpanderCommand) -> Result<ReportDocument> {
    match action {
        ExpanderCommand::Sample { k, r, theta, seed, out } => {
            let g = sample_biregular(k, r, theta, seed)?;
            let mut doc = ReportDocument::new("expander sample");
            doc.input("k", k);
            doc.input("r", r);
            doc.input("theta", theta);
            doc.input("seed", seed);
            doc.result("left", g.left);
            doc.result("right", g.right);
            doc.result("edges", g.edges.len());
            let right_degree = (r as f64 / theta).round() as usize;
            doc.check(&Check::new("left_regular", g.left_degrees().iter().all(|&d| d == r), format!("degree {r}")));
            doc.check(&Check::new(
                "right_regular",
                g.right_degrees().iter().all(|&d| d == right_degree),
                format!("degree {right_degree}"),
            ));
            match out {
                Some(path) => {
                    write_json(&path, &g)?;
                    doc.result("out", path.display().to_string());
                }
                None => doc.result("graph", &g),
            }
            Ok(doc)
        }
        ExpanderCommand::Verify { graph, alpha } => {
            let g: BipartiteGraph = read_json(&graph)?;
            let rep = verify_expansion(&g, alpha)?;
            let mut doc = ReportDocument::new("expander verify");
            doc.input("graph", graph.display().to_string());
            doc.input("alpha", alpha);
            doc.result("max_size", rep.max_size);
            doc.result("subsets_checked", rep.subsets_checked);
            doc.result("worst", rep.worst.iter().map(|v| v + 1).collect::<Vec<_>>());
            doc.result("worst_neighbours", rep.worst_neighbours);
            doc.check(
                &Check::new(
                    "expansion",
                    rep.ok,
                    format!("|N(S)| >= |S| for all |S| <= {}", rep.max_size),
                )
                .with_witness(Some(format!("{:?} has {} neighbours", rep.worst, rep.worst_neighbours))),
            );
            Ok(doc)
        }
        ExpanderCommand::Recombine {
            graph,
            function,
            sources,
            per_item,
            eps,
            seed,
            out,
        } => {
            let g: BipartiteGraph = read_json(&graph)?;
            let f = load_source(&function)?.function()?;
            let sources: Collection = match (sources, per_item) {
                (Some(path), _) => read_json(&path)?,
                (None, Some(p)) => frequent_collection(f.n(), g.left, p, seed)?,
                (None, None) => return Err(usage("give --sources or --per-item")),
            };
            let rec = recombine(&g, &sources, &f, eps)?;
            let c = check_recombination(&g, &sources, &rec);
            let mut doc = ReportDocument::new("expander recombine");
            doc.input("graph", graph.display().to_string());
            doc.input("fn", function);
            doc.input("seed", seed);
            doc.result("accounting", &rec.accounting);
            doc.result("sources", sources.sets().iter().map(|s| s.to_item_list()).collect::<Vec<_>>());
            doc.result("targets", rec.targets.sets().iter().map(|s| s.to_item_list()).collect::<Vec<_>>());
            doc.check(&Check::new("partition", c.partition, "edge labels partition each source"));
            doc.check(&Check::new("disjoint", c.disjoint, "labels entering a right vertex are disjoint"));
            doc.check(&Check::new("frequency", c.frequency, "item frequencies are preserved"));
            let a = &rec.accounting;
            doc.check(&Check::new(
                "accounting",
                c.accounting,
                format!("{} <= {} <= {}", a.lower, a.sum_labels, a.upper),
            ));
            if let Some(path) = out {
                write_json(&path, &rec.targets)?;
                doc.result("out", path.display().to_string());
            }
            Ok(doc)
        }
        ExpanderCommand::Rate { alpha, r, theta } => {
            let rate = union_bound_rate(alpha, r, theta)?;
            let mut doc = ReportDocument::new("expander rate");
            doc.input("alpha", alpha);
            doc.input("r", r);
            doc.input("theta", theta);
            doc.result("rate", rate);
            doc.check(&Check::new("decays", rate < 1.0, format!("rate {rate}")));
            Ok(doc)
        }
    }
}

fn bounds(preset: Option<&str>, params: Option<&Path>) -> Result<ReportDocument> {
    let mut doc = ReportDocument::new("bounds");
    let profile: BoundProfile = match (preset, params) {
        (_, Some(path)) => {
            doc.input("params", path.display().to_string());
            read_json(path)?
        }
        (Some("published") | None, None) => {
            doc.input("preset", "published");
            published_profile()
        }
        (Some(other), None) => return Err(usage(format!("unknown preset {other:?}; available: published"))),
    };
    let suite = bound_suite(&profile)?;
    doc.result("profile", &suite.profile);
    let entries: serde_json::Map<String, serde_json::Value> = suite
        .entries
        .iter()
        .map(|e| (e.name.clone(), serde_json::to_value(e).expect("serializable")))
        .collect();
    doc.result("bounds", entries);
    doc.result("values", suite.values());
    doc.checks(&suite.checks);
    Ok(doc)
}

fn search(n: usize, budget: usize, seed: u64, warm: Option<&str>, out: Option<&Path>) -> Result<ReportDocument> {
    let warm_fn = warm.map(load_source).transpose()?.map(|s| s.function()).transpose()?;
    let r = kalton_search(n, budget, seed, warm_fn.as_ref())?;
    let mut doc = ReportDocument::new("search");
    doc.input("n", n);
    doc.input("budget", budget);
    doc.input("seed", seed);
    doc.input("warm", warm);
    let best = SetFunction::table(n, r.table.clone())?;
    let again = kalton_ratio(&best, Variant::Strong)?;
    doc.result("ratio", r.ratio);
    doc.result("delta", r.delta);
    doc.result("eps", r.eps);
    doc.result("vertices", r.vertices);
    doc.result("improvements", r.improvements);
    doc.result("table", &r.table);
    doc.check(&Check::new(
        "ratio_reverified",
        (again.ratio - r.ratio).abs() <= 1e-7,
        format!("recomputed Δ/ε = {}", again.ratio),
    ));
    if let Some(path) = out {
        write_json(path, &FunctionFile::from_function(&best)?)?;
        doc.result("out", path.display().to_string());
    }
    Ok(doc)
}
