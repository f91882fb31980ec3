//! One function per subcommand, each returning a [`Report`].

use serde_json::{json, Value};
use treeshift::coding::{
    brute_force_preimage, check_reconstruction, compare_with_oracle, enumerate_admissible, markovize,
    support_gap_search, admissible_count, CodingLevel, GapOutcome, Strategy,
};
use treeshift::entropy::{cond_entropy, counterexample_report, f_sequence, partition_entropy};
use treeshift::freegroup::{ball, parent_structure};
use treeshift::measures::{validate, Check};
use treeshift::patterns::join;
use treeshift::scalar::format_rational;
use treeshift::{Budget, GroupSpec, Pattern, Unit, WindowPartition};

use crate::config::{group_spec, measure, transition_system, MeasureConfig, RawConfig, RunConfig};
use crate::error::{input, CliResult};
use crate::inputs::{CodeFile, PartitionFile};
use crate::output::{decimal, entropy_json, exact_or_dash, Report, Status};

fn level(cfg: &RunConfig) -> CliResult<CodingLevel> {
    Ok(CodingLevel::new(cfg.spec, cfg.alphabet, cfg.n)?)
}

/// Values along `a^j` in increasing `j`, for rank-one patterns.
fn along_axis(p: &Pattern) -> Option<String> {
    let mut v = p
        .iter()
        .map(|(w, x)| w.z_exponent().map(|j| (j, x)))
        .collect::<Option<Vec<_>>>()?;
    v.sort();
    let vals: Vec<String> = v.iter().map(|(_, x)| x.to_string()).collect();
    Some(format!("({})", vals.join(",")))
}

fn check_str(c: &Check) -> String {
    match c {
        Check::Pass => "pass".into(),
        Check::Fail(why) => format!("fail: {why}"),
    }
}

pub fn ball_cmd(spec: GroupSpec, n: usize) -> CliResult<Report> {
    let b = ball(&spec, n);
    let tree = parent_structure(&b, &spec)?;
    let mut r = Report::new(
        vec!["index", "word", "parent", "generator"],
        json!({
            "rank": spec.rank(),
            "mode": spec.mode().to_string(),
            "n": n,
            "size": b.len(),
            "elements": b.iter().map(|w| w.to_string()).collect::<Vec<_>>(),
        }),
    );
    for (i, w) in b.iter().enumerate() {
        let (parent, generator) = match tree.parent(i) {
            Some((t, p)) => (b.words()[p].to_string(), spec.word(t).to_string()),
            None => ("-".into(), "-".into()),
        };
        r.rows.push(vec![i.to_string(), w.to_string(), parent, generator]);
    }
    r.notes.push(format!("size {}", b.len()));
    Ok(r)
}

/// Validates the configured measure without rejecting it first, so failures are reported
/// rather than raised.
pub fn validate_cmd(raw: &RawConfig) -> CliResult<Report> {
    let spec = group_spec(raw.group.rank, &raw.group.mode)?;
    let (checks, passed) = match &raw.measure {
        MeasureConfig::TreeMarkov { pi, matrices } => {
            let ts = transition_system(pi, matrices, &spec)?;
            let rep = validate(&ts, &spec)?;
            let checks = vec![
                ("stochastic", check_str(&rep.stochastic)),
                ("stationary", check_str(&rep.stationary)),
                (
                    "reversible",
                    rep.reversible.as_ref().map(check_str).unwrap_or_else(|| "n/a".into()),
                ),
            ];
            (checks, rep.passed())
        }
        other => {
            measure(other, &spec, raw.alphabet)?;
            (vec![("distribution", "pass".to_string())], true)
        }
    };
    let mut r = Report::new(
        vec!["check", "result"],
        json!({
            "passed": passed,
            "checks": checks.iter().map(|(k, v)| json!({"check": k, "result": v})).collect::<Vec<_>>(),
        }),
    );
    r.rows = checks.into_iter().map(|(k, v)| vec![k.to_string(), v]).collect();
    if !passed {
        r.status = Status::Finding;
    }
    Ok(r)
}

pub fn markovize_cmd(cfg: &RunConfig) -> CliResult<Report> {
    let level = level(cfg)?;
    let ts = markovize(&cfg.measure, &level, cfg.budget)?;
    let mut r = Report::new(vec!["entry", "generator", "i", "j", "value"], Value::Null);
    let mut states = Vec::new();
    for l in 0..level.l_size() {
        let p = level.symbol_pattern(l).to_string();
        r.rows.push(vec!["state".into(), "-".into(), l.to_string(), "-".into(), p.clone()]);
        states.push(p);
    }
    let pi: Vec<String> = ts.pi().iter().map(format_rational).collect();
    for (i, v) in pi.iter().enumerate() {
        r.rows.push(vec!["pi".into(), "-".into(), i.to_string(), "-".into(), v.clone()]);
    }
    let mut mats = serde_json::Map::new();
    for (s, m) in ts.matrices() {
        let name = cfg.spec.word(*s).to_string();
        let mut entries = Vec::new();
        for i in 0..m.dim() {
            for (j, v) in m.row(i) {
                let v = format_rational(v);
                r.rows.push(vec!["P".into(), name.clone(), i.to_string(), j.to_string(), v.clone()]);
                entries.push(json!([i, j, v]));
            }
        }
        mats.insert(name, Value::Array(entries));
    }
    r.notes.push(format!("{} states, {} generators", level.l_size(), ts.matrices().len()));
    r.json = json!({"n": cfg.n, "states": states, "pi": pi, "matrices": mats});
    Ok(r)
}

pub fn admissible_cmd(cfg: &RunConfig, m: usize, count_only: bool) -> CliResult<Report> {
    let level = level(cfg)?;
    let ts = markovize(&cfg.measure, &level, cfg.budget)?;
    if count_only {
        let c = admissible_count(&ts, &cfg.spec, m)?;
        let mut r = Report::new(vec!["m", "count"], json!({"m": m, "count": c.to_string()}));
        r.rows.push(vec![m.to_string(), c.to_string()]);
        return Ok(r);
    }
    let set = enumerate_admissible(&ts, &cfg.spec, m, cfg.budget)?;
    let sites: Vec<String> = set.domain().iter().map(|w| w.to_string()).collect();
    let mut r = Report::new(vec!["pattern"], Value::Null);
    let mut list = Vec::new();
    for p in set.iter() {
        let vals: Vec<String> = p.values().iter().map(|v| v.to_string()).collect();
        r.rows.push(vec![vals.join(" ")]);
        list.push(p.values().to_vec());
    }
    r.notes.push(format!("sites: {}", sites.join(" ")));
    r.notes.push(format!("{} admissible patterns on B(e,{m})", set.len()));
    r.json = json!({"m": m, "sites": sites, "count": set.len(), "patterns": list});
    Ok(r)
}

pub fn verify_lemma_cmd(cfg: &RunConfig, strategy: Strategy) -> CliResult<Report> {
    let level = level(cfg)?;
    let rep = check_reconstruction(&cfg.measure, &level, cfg.budget, strategy)?;
    let violations: Vec<Value> = rep
        .violations
        .iter()
        .map(|v| {
            json!({
                "site": v.site.to_string(),
                "center": v.center,
                "at_site": v.at_site,
                "pattern": v.pattern.as_ref().map(|p| p.to_string()),
            })
        })
        .collect();
    let mut r = Report::new(
        vec!["n", "strategy", "patterns_checked", "comparisons", "violations"],
        json!({
            "n": rep.n,
            "strategy": rep.strategy.to_string(),
            "patterns_checked": rep.patterns_checked.to_string(),
            "comparisons": rep.comparisons.to_string(),
            "violations": rep.violation_count.to_string(),
            "examples": violations,
        }),
    );
    r.rows.push(vec![
        rep.n.to_string(),
        rep.strategy.to_string(),
        rep.patterns_checked.to_string(),
        rep.comparisons.to_string(),
        rep.violation_count.to_string(),
    ]);
    r.notes.push(format!(
        "{} patterns checked, {} violations",
        rep.patterns_checked, rep.violation_count
    ));
    for v in &rep.violations {
        r.notes.push(format!("violation at f={}: z(e)={} z(f)={}", v.site, v.center, v.at_site));
    }
    if !rep.holds() {
        r.status = Status::Finding;
    }
    Ok(r)
}

pub fn oracle_compare_cmd(cfg: &RunConfig, m: usize, strategy: Strategy) -> CliResult<Report> {
    let level = level(cfg)?;
    let c = compare_with_oracle(&cfg.measure, &level, m, cfg.budget, strategy)?;
    let show = |v: &[Pattern]| v.iter().map(|p| p.to_string()).collect::<Vec<_>>();
    let mut r = Report::new(
        vec!["m", "strategy", "admissible", "image", "equal"],
        json!({
            "m": m,
            "strategy": c.strategy.to_string(),
            "admissible": c.admissible_count.to_string(),
            "image": c.image_count.to_string(),
            "equal": c.equal,
            "local_inclusion": c.local_inclusion,
            "admissible_not_image": show(&c.admissible_not_image),
            "image_not_admissible": show(&c.image_not_admissible),
        }),
    );
    r.rows.push(vec![
        m.to_string(),
        c.strategy.to_string(),
        c.admissible_count.to_string(),
        c.image_count.to_string(),
        c.equal.to_string(),
    ]);
    for p in &c.admissible_not_image {
        r.notes.push(format!("admissible, not an image: {p}"));
    }
    for p in &c.image_not_admissible {
        r.notes.push(format!("image, not admissible: {p}"));
    }
    if let Some(local) = c.local_inclusion {
        r.notes.push(format!("local inclusion: {local}"));
    }
    if !c.equal {
        r.status = Status::Finding;
    }
    Ok(r)
}

pub fn support_gap_cmd(cfg: &RunConfig, code: &CodeFile, m_max: usize, brute_len: usize) -> CliResult<Report> {
    let code = code.build(&cfg.spec, cfg.alphabet)?;
    let rep = support_gap_search(&cfg.measure, &code, &cfg.spec, m_max, cfg.budget)?;
    let mut r = Report::new(vec!["m", "admissible", "image"], Value::Null);
    for (m, a, i) in &rep.rows {
        r.rows.push(vec![m.to_string(), a.to_string(), i.to_string()]);
    }
    let rows: Vec<Value> = rep
        .rows
        .iter()
        .map(|(m, a, i)| json!({"m": m, "admissible": a, "image": i}))
        .collect();
    match &rep.outcome {
        GapOutcome::Gap { m, witness } => {
            r.status = Status::Finding;
            r.notes.push(format!("gap at m={m}: witness {witness}"));
            let axis = along_axis(witness);
            if let Some(seq) = &axis {
                r.notes.push(format!("witness along a^j: {seq}"));
            }
            let mut brute = Value::Null;
            if cfg.spec.rank() == 1 {
                let found = brute_force_preimage(&cfg.measure, &code, &cfg.spec, witness, brute_len, cfg.budget)?;
                if let Some(y) = found {
                    return Err(treeshift::Error::Internal(format!(
                        "brute-force search found a preimage {y:?} of the witness"
                    ))
                    .into());
                }
                r.notes.push(format!(
                    "brute-force preimage search over words of length <= {brute_len}: none"
                ));
                brute = json!({"max_len": brute_len, "preimage": null});
            }
            r.json = json!({
                "gap": true,
                "m": m,
                "witness": witness.to_string(),
                "witness_along_axis": axis,
                "brute_force": brute,
                "rows": rows,
            });
        }
        GapOutcome::NoGap { m_max } => {
            r.notes.push(format!("no gap up to m_max={m_max}"));
            r.json = json!({"gap": false, "m_max": m_max, "rows": rows});
        }
    }
    Ok(r)
}

pub fn entropy_cmd(
    cfg: &RunConfig,
    partition: &PartitionFile,
    conditional: Option<&PartitionFile>,
) -> CliResult<Report> {
    let p = partition.build(&cfg.spec, cfg.alphabet, cfg.budget)?;
    let mut values = vec![("H(P)", partition_entropy(&cfg.measure, &p, cfg.budget, cfg.unit)?)];
    if let Some(qf) = conditional {
        let q = qf.build(&cfg.spec, cfg.alphabet, cfg.budget)?;
        let joint = join(&p, &q, cfg.budget)?;
        values.push(("H(Q)", partition_entropy(&cfg.measure, &q, cfg.budget, cfg.unit)?));
        values.push(("H(P v Q)", partition_entropy(&cfg.measure, &joint, cfg.budget, cfg.unit)?));
        values.push(("H(P|Q)", cond_entropy(&cfg.measure, &p, &q, cfg.budget, cfg.unit)?));
    }
    let mut r = Report::new(vec!["quantity", "exact", "decimal", "unit"], Value::Null);
    let mut obj = serde_json::Map::new();
    for (name, v) in &values {
        r.rows.push(vec![name.to_string(), exact_or_dash(v), decimal(v), v.unit().to_string()]);
        obj.insert(name.to_string(), entropy_json(v));
    }
    r.json = Value::Object(obj);
    Ok(r)
}

pub fn f_seq_cmd(cfg: &RunConfig, n_max: usize) -> CliResult<Report> {
    let alpha = WindowPartition::alpha(cfg.alphabet);
    let seq = f_sequence(&cfg.measure, &alpha, &cfg.spec, n_max, cfg.budget, cfg.unit)?;
    let mut r = Report::new(vec!["m", "exact", "decimal", "unit"], Value::Null);
    for (m, v) in seq.iter().enumerate() {
        r.rows.push(vec![m.to_string(), exact_or_dash(v), decimal(v), v.unit().to_string()]);
    }
    let stabilized = seq.len() >= 2 && seq[seq.len() - 2].equals(&seq[seq.len() - 1]);
    r.notes.push(if stabilized {
        format!("stabilized at {}", seq[seq.len() - 1])
    } else {
        "not stabilized".into()
    });
    r.json = json!({
        "values": seq.iter().map(entropy_json).collect::<Vec<_>>(),
        "stabilized": stabilized,
    });
    Ok(r)
}

pub fn counterexample_cmd(n_max: usize, budget: Budget, unit: Unit) -> CliResult<Report> {
    let rep = counterexample_report(n_max, budget, unit)?;
    let render = |v: &treeshift::EntropyValue| v.render();
    let mut r = Report::new(vec!["n", "H_Pn", "H_join", "H_cond", "F_Pn"], Value::Null);
    let mut rows = Vec::new();
    for row in &rep.rows {
        r.rows.push(vec![
            row.n.to_string(),
            render(&row.h_pn),
            render(&row.h_join),
            render(&row.h_cond),
            render(&row.f_pn),
        ]);
        rows.push(json!({
            "n": row.n,
            "H_Pn": entropy_json(&row.h_pn),
            "H_join": entropy_json(&row.h_join),
            "H_cond": entropy_json(&row.h_cond),
            "F_Pn": entropy_json(&row.f_pn),
        }));
    }
    let fseq: Vec<String> = rep.f_sequence.iter().map(render).collect();
    r.notes.push(format!("unit: {unit}"));
    r.notes.push(format!("f_sequence m=0..{n_max}: {}", fseq.join(" ")));
    r.notes.push(format!(
        "h = {} ({})",
        rep.h,
        if rep.stabilized { "stabilized" } else { "not stabilized" }
    ));
    r.notes.push(format!("verdict: {}", rep.verdict()));
    r.json = json!({
        "unit": unit.to_string(),
        "rows": rows,
        "f_sequence": rep.f_sequence.iter().map(entropy_json).collect::<Vec<_>>(),
        "h": entropy_json(&rep.h),
        "stabilized": rep.stabilized,
        "verdict": rep.verdict(),
        "refutes": rep.refutes(),
    });
    Ok(r)
}

pub fn parse_strategy(s: &str) -> CliResult<Strategy> {
    s.parse().map_err(|e: treeshift::Error| input(e.to_string()))
}
