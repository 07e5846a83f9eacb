use std::path::Path;
use std::time::Instant;

use plp_core::defaults::{self, Answer, Engine, EngineError, InstanceAnswer, Semantics};
use plp_core::ground::{ground_instances_of_query, GroundError};
use plp_core::logical::Interval;
use plp_core::oracle::Oracle;
use plp_core::samples::{self, Expected};
use plp_core::syntax::{parse_program, parse_query, render_query, Classification, Program, Query, QueryBounds};

use crate::report::*;
use crate::RunConfig;

pub type CmdResult = Result<u8, String>;

fn load(path: &Path) -> Result<Program, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    parse_program(&text).map_err(|e| format!("{}:{e}", path.display()))
}

/// Accepts the query with or without the leading `?` and final `.`.
fn load_query(text: &str) -> Result<Query, String> {
    let t = text.trim();
    let mut full = String::new();
    if !t.starts_with('?') {
        full.push('?');
    }
    full.push_str(t);
    if !t.ends_with('.') {
        full.push('.');
    }
    parse_query(&full).map_err(|e| format!("query {text:?}: {e}"))
}

/// Errors from the engine, with a hint where a flag would help.
fn engine_error(e: EngineError) -> String {
    match e {
        EngineError::Ground(GroundError::NoConstants) => format!("{e}; name some with --constant"),
        other => other.to_string(),
    }
}

fn engine(config: &RunConfig, p: &Program, q: Option<&Query>) -> Result<Engine, String> {
    Engine::with_constants(p, q, &config.constants, config.engine()).map_err(engine_error)
}

fn bound_names(q: &Query) -> (&str, &str) {
    match &q.bounds {
        QueryBounds::Variables { lower, upper } => (lower, upper),
        QueryBounds::Numeric { .. } => ("L", "U"),
    }
}

pub fn check(config: &RunConfig, file: &Path) -> CmdResult {
    let p = load(file)?;
    let consistent = defaults::is_consistent(&p, &config.constants, config.engine()).map_err(engine_error)?;
    if config.json {
        print_json(&CheckReport { consistent });
    } else {
        println!("{}", if consistent { "consistent" } else { "inconsistent" });
    }
    Ok(if consistent { 0 } else { 1 })
}

pub fn partition(config: &RunConfig, file: &Path) -> CmdResult {
    let p = load(file)?;
    if p.iter().all(|c| c.classify() == Classification::Classical) {
        if config.json {
            print_json(&PartitionReport { consistent: true, levels: Some(Vec::new()) });
        } else {
            println!("no defaults; empty partition");
        }
        return Ok(0);
    }
    let e = engine(config, &p, None)?;
    let Some(zp) = e.z_partition().map_err(|e| e.to_string())? else {
        if config.json {
            print_json(&PartitionReport { consistent: false, levels: None });
        } else {
            println!("nil: the defaults have no z-partition, so the program is inconsistent");
        }
        return Ok(1);
    };
    let levels: Vec<Vec<String>> = zp.levels().iter().map(|l| l.iter().map(|c| c.to_string()).collect()).collect();
    if config.json {
        print_json(&PartitionReport { consistent: true, levels: Some(levels) });
    } else {
        for (i, level) in levels.iter().enumerate() {
            println!("D{i}:");
            for c in level {
                println!("  {c}");
            }
        }
    }
    Ok(0)
}

fn inconsistent_query(config: &RunConfig, q: &Query, s: Semantics) -> CmdResult {
    if config.json {
        print_json(&QueryReport {
            query: render_query(q),
            semantics: s.to_string(),
            consistent: false,
            answer: None,
            substitutions: Vec::new(),
            witness: None,
        });
    } else {
        println!("inconsistent: the program has no z-partition, so {s}-entailment is undefined");
    }
    Ok(1)
}

pub fn query(config: &RunConfig, file: &Path, text: &str, s: Semantics, witness: bool) -> CmdResult {
    let p = load(file)?;
    let q = load_query(text)?;
    let e = engine(config, &p, Some(&q))?;
    let consistent = e.is_consistent().map_err(|e| e.to_string())?;
    if s.is_default_semantics() && !consistent {
        return inconsistent_query(config, &q, s);
    }
    // tight rows for every instance; numeric queries are decided on top
    let tight_q = Query { bounds: QueryBounds::Variables { lower: "L".into(), upper: "U".into() }, ..q.clone() };
    let Answer::Tight(rows) = e.answer(&tight_q, s).map_err(|e| e.to_string())? else {
        unreachable!("variable bounds give a tight answer")
    };
    let verdict = match &q.bounds {
        QueryBounds::Variables { .. } => None,
        QueryBounds::Numeric { .. } => Some(match e.answer(&q, s).map_err(|e| e.to_string())? {
            Answer::Yes(thetas) => thetas,
            _ => Vec::new(),
        }),
    };
    let entailed = |row: &InstanceAnswer| verdict.as_ref().map(|yes| yes.contains(&row.theta));
    let code = match &verdict {
        Some(yes) if yes.is_empty() => 1,
        _ => 0,
    };
    let space = e.reasoner().space();
    if config.json {
        let substitutions = rows
            .iter()
            .map(|r| SubstitutionReport {
                theta: theta_map(&r.theta),
                lower: r.bounds.interval.lower().into(),
                upper: r.bounds.interval.upper().into(),
                entailed: entailed(r),
            })
            .collect();
        let witnesses = witness.then(|| {
            rows.iter()
                .map(|r| WitnessReport {
                    theta: theta_map(&r.theta),
                    lower: r.bounds.lower_witness.as_ref().map(|w| world_masses(space, w)),
                    upper: r.bounds.upper_witness.as_ref().map(|w| world_masses(space, w)),
                })
                .collect()
        });
        print_json(&QueryReport {
            query: render_query(&q),
            semantics: s.to_string(),
            consistent,
            answer: verdict.as_ref().map(|yes| if yes.is_empty() { "no" } else { "yes" }),
            substitutions,
            witness: witnesses,
        });
        return Ok(code);
    }
    if let Some(yes) = &verdict {
        println!("{}", if yes.is_empty() { "No" } else { "Yes" });
    }
    let names = bound_names(&q);
    for r in &rows {
        let i = &r.bounds.interval;
        let mark = match entailed(r) {
            Some(true) => "  entailed",
            Some(false) => "  not entailed",
            None => "",
        };
        let note = if i.is_empty() { "  (no relevant model)" } else { "" };
        println!("{}  ~ {}{note}{mark}", answer_text(&r.theta, names, i), i.to_decimal_string());
        if witness {
            for (end, w) in [("lower", &r.bounds.lower_witness), ("upper", &r.bounds.upper_witness)] {
                let Some(w) = w else { continue };
                println!("  {end} bound attained by:");
                for (world, p) in w.iter() {
                    let atoms: Vec<String> = space.atoms_of(*world).iter().map(|a| a.to_string()).collect();
                    println!("    {:>8}  {{{}}}", p.to_string(), atoms.join(", "));
                }
            }
        }
    }
    Ok(code)
}

pub fn oracle(config: &RunConfig, file: &Path, text: &str, s: Semantics) -> CmdResult {
    let p = load(file)?;
    let q = load_query(text)?;
    let e = engine(config, &p, Some(&q))?;
    if !e.is_consistent().map_err(|e| e.to_string())? {
        return inconsistent_query(config, &q, s);
    }
    let oracle = Oracle::new(&e, config.oracle_cap);
    let mut rows = Vec::new();
    for (theta, gq) in ground_instances_of_query(&q, e.universe()).map_err(|e| e.to_string())? {
        let mine = e.tight(&gq.consequent, &gq.antecedent, s).map_err(|e| e.to_string())?.interval;
        let theirs = oracle.tight(&gq.consequent, &gq.antecedent, s).map_err(|e| e.to_string())?;
        rows.push((theta, mine, theirs));
    }
    let agree = rows.iter().all(|(_, a, b)| a == b);
    if config.json {
        print_json(&OracleReport {
            query: render_query(&q),
            semantics: s.to_string(),
            consistent: true,
            substitutions: rows
                .iter()
                .map(|(theta, a, b)| OracleRow {
                    theta: theta_map(theta),
                    engine: a.into(),
                    oracle: b.into(),
                    agree: a == b,
                })
                .collect(),
            agree,
        });
    } else {
        for (theta, a, b) in &rows {
            let verdict = if a == b { "AGREE" } else { "DISAGREE" };
            println!("{theta}  engine {a}  oracle {b}  {verdict}");
        }
    }
    Ok(if agree { 0 } else { 1 })
}

fn run_sample(program: &str, query: &str, s: Semantics, config: &RunConfig) -> Result<Interval, String> {
    let p = parse_program(program).map_err(|e| e.to_string())?;
    let q = load_query(query)?;
    let e = Engine::new(&p, Some(&q), config.engine()).map_err(|e| e.to_string())?;
    match e.answer(&q, s).map_err(|e| e.to_string())? {
        Answer::Tight(rows) if rows.len() == 1 => Ok(rows[0].bounds.interval.clone()),
        _ => Err("bundled query should have one ground instance".into()),
    }
}

pub fn selftest(config: &RunConfig) -> CmdResult {
    let mut rows = Vec::new();
    for sample in samples::samples() {
        for (s, expected) in &sample.expected {
            let start = Instant::now();
            let computed = run_sample(sample.program, sample.query, *s, config)?;
            let ms = start.elapsed().as_secs_f64() * 1e3;
            let (want, verdict, note) = match expected {
                Expected::Exact(want) => (want.clone(), if &computed == want { "pass" } else { "fail" }, None),
                Expected::Informational { derived, published } => {
                    let note = if &computed == derived {
                        format!("published value {published}; the definitions give {derived} because the penguin level drowns the legs default")
                    } else {
                        format!("computed {computed} differs from the hand derivation {derived}; published value {published}")
                    };
                    (published.clone(), "info", Some(note))
                }
            };
            rows.push((
                ms,
                SelftestRow {
                    example: sample.name.to_string(),
                    semantics: s.to_string(),
                    expected: (&want).into(),
                    computed: (&computed).into(),
                    verdict,
                    note,
                },
                want,
                computed,
            ));
        }
    }
    let failed = rows.iter().filter(|r| r.1.verdict == "fail").count();
    if config.json {
        print_json(&rows.into_iter().map(|r| r.1).collect::<Vec<_>>());
    } else {
        println!("{:<18} {:<4} {:<12} {:<12} {:>8}  verdict", "example", "sem", "expected", "computed", "ms");
        for (ms, row, want, computed) in &rows {
            println!(
                "{:<18} {:<4} {:<12} {:<12} {:>8.2}  {}",
                row.example,
                row.semantics,
                want.to_string(),
                computed.to_string(),
                ms,
                row.verdict
            );
            if let Some(note) = &row.note {
                println!("{:>20}{note}", "");
            }
        }
        println!("{} checks, {failed} failed", rows.iter().filter(|r| r.1.verdict != "info").count());
    }
    Ok(if failed == 0 { 0 } else { 1 })
}
