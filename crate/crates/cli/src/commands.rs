use std::fs;

use serde::Serialize;
use serde_json::json;
use taglab::collatz::{collatz_traces, summarize, CollatzError, Verdict};
use taglab::cycle::{OrbitDump, PeriodicSet};
use taglab::experiments::{
    census_word, exp1_census, exp2_period_census, exp3_sensitivity, exp4_randomness, exp5_entropy,
    read_census_csv, symbol_stream, write_census_csv, write_entropy_csv, write_periods_jsonl,
    write_randomness_csv, write_sensitivity_csv, write_survival_csv, Exp1Config, ExperimentError,
    ExperimentRecord, StreamMode,
};
use taglab::generator::{
    generate_candidates, indexed_rng, screen_system, BalanceMode, ClassSpec, PilotConfig,
    ScreenConfig, SurviveMode,
};
use taglab::run::{run, throughput_bench, Reach};
use taglab::soak::{post_soak_word, soak, SoakConfig};
use taglab::{reaches, RunBudget, TagSystem, Word};

use crate::output::{print_json, Failure, OutDir};
use crate::{
    BalanceArg, BenchArgs, BudgetArgs, CollatzArgs, Command, Exp1Args, Exp2Args, Exp4Args,
    Exp5Args, GenerateArgs, InitialArgs, ModeArg, ReachArgs, RunArgs, ScreenArgs, ScreenOptions,
    SoakArgs, StreamArgs, SurviveArg, SystemArgs, WordArgs,
};

pub fn dispatch(cli: &crate::Cli) -> Result<(), Failure> {
    let out = OutDir::create(&cli.out, !cli.no_timestamp)?;
    out.echo_config(&cli.command)?;
    match &cli.command {
        Command::Run(a) => cmd_run(&out, a),
        Command::Reach(a) => cmd_reach(&out, a),
        Command::ClassifyPeriod(a) => cmd_classify(&out, a),
        Command::CollatzVerify(a) => cmd_collatz(&out, a),
        Command::Generate(a) => cmd_generate(&out, a),
        Command::Screen(a) => cmd_screen(&out, a),
        Command::Exp1(a) => cmd_exp1(&out, a).map(|histogram| print_json(&histogram)),
        Command::Exp2(a) => cmd_exp2(&out, a),
        Command::Exp3(a) => cmd_exp3(&out, a),
        Command::Exp4(a) => cmd_exp4(&out, a),
        Command::Exp5(a) => cmd_exp5(&out, a),
        Command::Soak(a) => cmd_soak(&out, &cli.out, a),
        Command::Bench(a) => cmd_bench(&out, a),
    }
}

fn load_system(args: &SystemArgs) -> Result<(TagSystem, String), Failure> {
    match &args.system {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::config("system_file", format!("{}: {e}", path.display())))?;
            let t = text
                .parse()
                .map_err(|e| Failure::config("system_file", e))?;
            let id = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            Ok((t, id))
        }
        None => {
            let t = TagSystem::preset(&args.preset).map_err(|e| Failure::config("preset", e))?;
            Ok((t, args.preset.clone()))
        }
    }
}

fn budget(args: &BudgetArgs) -> Result<RunBudget, Failure> {
    let max_length = usize::try_from(args.max_length).map_err(|e| Failure::config("budget", e))?;
    RunBudget::new(args.max_steps, max_length).map_err(|e| Failure::config("budget", e))
}

fn parse_word(t: &TagSystem, text: &str) -> Result<Word, Failure> {
    t.parse_word(text).map_err(|e| Failure::config("word", e))
}

fn initial_word(t: &TagSystem, args: &InitialArgs) -> Result<Word, Failure> {
    match &args.word {
        Some(w) => parse_word(t, w),
        None => Ok(census_word(t.mu(), args.length, args.seed, 0)),
    }
}

fn experiment_failure(e: ExperimentError) -> Failure {
    match e {
        ExperimentError::Stream(s) => Failure::config("stream", s),
        ExperimentError::EmptyWord => Failure::config("word", e),
        other => Failure::config("io", other),
    }
}

fn cmd_run(out: &OutDir, a: &RunArgs) -> Result<(), Failure> {
    let (t, _) = load_system(&a.system)?;
    let w = initial_word(&t, &a.initial)?;
    let report = run(&t, &w, budget(&a.budget)?, !a.no_detect);
    let value = json!({
        "initial_word": t.format_word(&w),
        "outcome": report.outcome,
        "resolution_step": report.outcome.resolution_step(),
        "final_length": report.word.len(),
        "final_word": t.format_word(&report.word),
        "max_length": report.max_length,
    });
    out.write_json("run.json", &value)?;
    print_json(&value);
    Ok(())
}

fn cmd_reach(out: &OutDir, a: &ReachArgs) -> Result<(), Failure> {
    let (t, _) = load_system(&a.system)?;
    let w = parse_word(&t, &a.word)?;
    let target = parse_word(&t, &a.target)?;
    let result = reaches(&t, &w, &target, budget(&a.budget)?);
    let value = match &result {
        Reach::FoundAtStep(step) => json!({ "found": true, "step": step }),
        Reach::NotWithinBudget {
            outcome,
            definitive_miss,
        } => {
            json!({ "found": false, "outcome": outcome, "definitive_miss": definitive_miss })
        }
    };
    out.write_json("reach.json", &value)?;
    print_json(&value);
    match result {
        Reach::FoundAtStep(_) => Ok(()),
        Reach::NotWithinBudget {
            definitive_miss: true,
            ..
        } => Ok(()),
        Reach::NotWithinBudget { outcome, .. } => Err(Failure::budget(format!(
            "target not reached; run ended {}",
            outcome.kind()
        ))),
    }
}

fn cmd_classify(out: &OutDir, a: &WordArgs) -> Result<(), Failure> {
    let (t, _) = load_system(&a.system)?;
    let w = initial_word(&t, &a.initial)?;
    let set = PeriodicSet::of_trajectory(&t, &w, budget(&a.budget)?)
        .map_err(Failure::budget)?
        .canonicalize();
    let dump = OrbitDump::new(&t, &set);
    out.write_json("orbit.json", &dump)?;
    print_json(&dump);
    Ok(())
}

fn cmd_collatz(out: &OutDir, a: &CollatzArgs) -> Result<(), Failure> {
    if a.max_n == 0 {
        return Err(Failure::config("max_n", "max-n must be at least 1"));
    }
    let budget = RunBudget::new(a.max_steps, 1 << 40).map_err(|e| Failure::config("budget", e))?;
    let traces = collatz_traces(a.max_n, budget).map_err(|e| match e {
        CollatzError::NonPositive => Failure::config("max_n", e),
        mismatch => Failure::oracle(mismatch),
    })?;
    let mut csv = String::from("n,phases,tag_steps,max_word_length\n");
    for t in &traces {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            t.n0,
            t.phases.len(),
            t.tag_steps,
            t.max_word_length
        ));
    }
    out.write_text("collatz.csv", &csv)?;
    print!("{csv}");
    let summary = summarize(a.max_n, &traces);
    out.write_json("collatz-summary.json", &summary)?;
    eprintln!("{}", serde_json::to_string(&summary).expect("serializable"));
    match traces
        .iter()
        .find(|t| t.verdict == Verdict::BudgetExhausted)
    {
        Some(t) => Err(Failure::budget(format!(
            "n = {} did not reach 1 within the budget",
            t.n0
        ))),
        None => Ok(()),
    }
}

fn screen_config(o: &ScreenOptions) -> Result<ScreenConfig, Failure> {
    let max_length =
        usize::try_from(o.pilot_max_length).map_err(|e| Failure::config("budget", e))?;
    Ok(ScreenConfig {
        balance: match o.balance {
            BalanceArg::Eq0 => BalanceMode::Eq0,
            BalanceArg::Le0 => BalanceMode::Le0,
        },
        survive: match o.survive {
            SurviveArg::All => SurviveMode::All,
            SurviveArg::Any => SurviveMode::Any,
        },
        pilot: PilotConfig {
            words: o.pilot_words,
            word_length: o.pilot_length,
            budget: RunBudget::new(o.pilot_max_steps, max_length)
                .map_err(|e| Failure::config("budget", e))?,
        },
    })
}

#[derive(Serialize)]
struct CandidateLine<'a> {
    index: u64,
    seed: u64,
    system: String,
    #[serde(flatten)]
    report: &'a taglab::generator::ScreenReport,
}

fn cmd_generate(out: &OutDir, a: &GenerateArgs) -> Result<(), Failure> {
    let spec = ClassSpec {
        mu: a.mu,
        v_min: a.v.0,
        v_max: a.v.1,
        excess_max: a.excess_max,
    };
    let config = screen_config(&a.screen)?;
    let candidates = generate_candidates(&spec, a.seed, a.count, &config)
        .map_err(|e| Failure::config("class", e))?;
    let mut jsonl = String::new();
    let mut text = String::new();
    for c in &candidates {
        let line = CandidateLine {
            index: c.index,
            seed: a.seed,
            system: c.system.to_string(),
            report: &c.report,
        };
        jsonl.push_str(&serde_json::to_string(&line).expect("serializable"));
        jsonl.push('\n');
        text.push_str(&format!("# candidate {}\n{}", c.index, c.system));
        text.push_str(&serde_json::to_string(&c.report).expect("serializable"));
        text.push('\n');
    }
    out.write_text("candidates.jsonl", &jsonl)?;
    print!("{text}");
    Ok(())
}

fn cmd_screen(out: &OutDir, a: &ScreenArgs) -> Result<(), Failure> {
    let (t, _) = load_system(&a.system)?;
    let report = screen_system(&t, &screen_config(&a.screen)?, &mut indexed_rng(a.seed, 0));
    out.write_json("screen.json", &report)?;
    print_json(&report);
    Ok(())
}

fn exp1_config(a: &Exp1Args) -> Result<Exp1Config, Failure> {
    Ok(Exp1Config {
        n_words: a.words,
        word_length: a.length,
        budget: budget(&a.budget)?,
        seed: a.seed,
    })
}

fn cmd_exp1(
    out: &OutDir,
    a: &Exp1Args,
) -> Result<serde_json::Map<String, serde_json::Value>, Failure> {
    write_census(out, a).map(|(_, histogram)| histogram)
}

/// Runs and writes a census, returning its records and outcome histogram.
fn write_census(
    out: &OutDir,
    a: &Exp1Args,
) -> Result<
    (
        Vec<ExperimentRecord>,
        serde_json::Map<String, serde_json::Value>,
    ),
    Failure,
> {
    let (t, id) = load_system(&a.system)?;
    if a.words == 0 {
        return Err(Failure::config("words", "at least one word is required"));
    }
    let census = exp1_census(&t, &id, &exp1_config(a)?);
    write_census_csv(&out.path("census.csv"), &census.records).map_err(experiment_failure)?;
    write_survival_csv(&out.path("survival.csv"), &census.survival).map_err(experiment_failure)?;
    let histogram: serde_json::Map<String, serde_json::Value> = census
        .histogram
        .iter()
        .map(|(k, v)| (k.as_str().to_owned(), json!(v)))
        .collect();
    out.write_json("histogram.json", &histogram)?;
    Ok((census.records, histogram))
}

fn cmd_exp2(out: &OutDir, a: &Exp2Args) -> Result<(), Failure> {
    let (t, id) = load_system(&a.exp1.system)?;
    let mut records = match &a.census {
        Some(path) => read_census_csv(path).map_err(experiment_failure)?,
        None => write_census(out, &a.exp1)?.0,
    };
    let budget = budget(&a.exp1.budget)?;
    let first = records.iter().map(|r| r.word_index + 1).max().unwrap_or(0);
    for (next, text) in (first..).zip(&a.extra_words) {
        let w = parse_word(&t, text)?;
        let report = run(&t, &w, budget, true);
        records.push(ExperimentRecord {
            system_id: id.clone(),
            word_index: next,
            initial_word: t.format_word(&w),
            outcome: report.outcome.kind(),
            steps: report.outcome.steps(),
            period: report.outcome.period(),
            entry_step: report.outcome.entry_step(),
            resolution_step: report.outcome.resolution_step(),
            max_length: report.max_length,
        });
    }
    let census = exp2_period_census(&t, &records).map_err(experiment_failure)?;
    write_periods_jsonl(&out.path("periods.jsonl"), &census.orbits).map_err(experiment_failure)?;
    out.write_json("period_types.json", &census.histogram)?;
    print_json(&census.histogram);
    Ok(())
}

fn cmd_exp3(out: &OutDir, a: &WordArgs) -> Result<(), Failure> {
    let (t, _) = load_system(&a.system)?;
    let w = initial_word(&t, &a.initial)?;
    let s = exp3_sensitivity::<f64>(&t, &w, budget(&a.budget)?).map_err(experiment_failure)?;
    write_sensitivity_csv(&out.path("sensitivity.csv"), &s.rows).map_err(experiment_failure)?;
    let summary =
        json!({ "base_word": t.format_word(&w), "substitutions": s.rows.len(), "score": s.score });
    out.write_json("sensitivity.json", &summary)?;
    print_json(&summary);
    Ok(())
}

fn stream_mode(m: ModeArg) -> StreamMode {
    match m {
        ModeArg::Scanned => StreamMode::Scanned,
        ModeArg::WholeWord => StreamMode::WholeWord,
    }
}

fn export_stream(
    t: &TagSystem,
    w: &Word,
    budget: RunBudget,
    s: &StreamArgs,
) -> Result<usize, Failure> {
    let length =
        usize::try_from(s.stream_length).map_err(|e| Failure::config("stream_length", e))?;
    if let Some(path) = &s.export_stream {
        let stream = symbol_stream(t, w, budget, length, stream_mode(s.mode));
        let bytes: Vec<u8> = stream.iter().map(|&b| b'0' + b).collect();
        fs::write(path, bytes)
            .map_err(|e| Failure::config("io", format!("{}: {e}", path.display())))?;
    }
    Ok(length)
}

fn cmd_exp4(out: &OutDir, a: &Exp4Args) -> Result<(), Failure> {
    let (t, _) = load_system(&a.word.system)?;
    let w = initial_word(&t, &a.word.initial)?;
    let budget = budget(&a.word.budget)?;
    let length = export_stream(&t, &w, budget, &a.stream)?;
    let results = exp4_randomness::<f64>(&t, &w, budget, length, stream_mode(a.stream.mode))
        .map_err(experiment_failure)?;
    write_randomness_csv(&out.path("randomness.csv"), &results).map_err(experiment_failure)?;
    print_json(&results);
    Ok(())
}

fn cmd_exp5(out: &OutDir, a: &Exp5Args) -> Result<(), Failure> {
    let (t, _) = load_system(&a.word.system)?;
    let w = initial_word(&t, &a.word.initial)?;
    let budget = budget(&a.word.budget)?;
    let length = export_stream(&t, &w, budget, &a.stream)?;
    let report = exp5_entropy::<f64>(&t, &w, budget, length, a.order, stream_mode(a.stream.mode))
        .map_err(experiment_failure)?;
    write_entropy_csv(&out.path("entropy.csv"), &report).map_err(experiment_failure)?;
    print_json(&json!({ "order": report.order, "entropy_rate": report.entropy_rate }));
    Ok(())
}

fn cmd_soak(out: &OutDir, dir: &std::path::Path, a: &SoakArgs) -> Result<(), Failure> {
    let path = a
        .checkpoint
        .clone()
        .unwrap_or_else(|| dir.join("soak-checkpoint.json"));
    let config = SoakConfig {
        target_step: a.steps,
        checkpoint_every: a.every,
    };
    let summary = soak(
        &TagSystem::post(),
        &post_soak_word(),
        &path,
        config,
        a.resume,
    )
    .map_err(|e| Failure::config("soak", e))?;
    out.write_json("soak.json", &summary)?;
    print_json(&summary);
    Ok(())
}

fn cmd_bench(out: &OutDir, a: &BenchArgs) -> Result<(), Failure> {
    let (t, _) = load_system(&a.system)?;
    let w = match &a.word {
        Some(text) => parse_word(&t, text)?,
        None => post_soak_word(),
    };
    let max_length = usize::try_from(a.max_length).map_err(|e| Failure::config("max_length", e))?;
    let r = throughput_bench(&t, &w, a.steps, max_length).map_err(Failure::budget)?;
    let value = json!({
        "steps": r.steps,
        "elapsed_seconds": r.elapsed.as_secs_f64(),
        "steps_per_second": r.steps_per_second,
        "final_length": r.final_length,
        "max_length": r.max_length,
    });
    out.write_json("bench.json", &value)?;
    print_json(&value);
    Ok(())
}
