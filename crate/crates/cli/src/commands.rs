//! Implementations behind the `qsum` subcommands.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use qsum_core::adversary::{AnnouncementModel, AttackStrategy, ExtractionRule};
use qsum_core::analysis::{
    channel_detection_probability, conditional_pass_probability, escape_probability, eve_detection_probability,
    multi_fake_escape_probability, ExactProbability, ExperimentRecord, Scenario,
};
use qsum_core::protocol::{PartyId, PreparedKind, ProtocolKind, Verdict};
use qsum_core::qudit::Dimension;

use crate::error::{CliError, Result};
use crate::report::{run_scenario, Report};
use crate::scenario::{ScenarioFile, SecretsSpec};

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub out: Option<PathBuf>,
}

impl Overrides {
    pub fn apply(&self, scenario: &mut ScenarioFile) {
        if let Some(seed) = self.seed {
            scenario.seed = seed;
        }
        if let Some(trials) = self.trials {
            scenario.trials = trials;
        }
        if let Some(out) = &self.out {
            scenario.output = Some(out.clone());
        }
    }
}

/// Where `run` writes its report when the scenario names no output.
pub fn default_report_path(scenario_path: &Path) -> PathBuf {
    scenario_path.with_extension("report.jsonl")
}

/// Loads, validates and executes a scenario file; writes the report.
pub fn cmd_run(path: &Path, overrides: &Overrides) -> Result<(Report, PathBuf)> {
    let mut scenario = ScenarioFile::load(path)?;
    overrides.apply(&mut scenario);
    let report = run_scenario(&scenario)?;
    let out = scenario.output.clone().unwrap_or_else(|| default_report_path(path));
    report.write(&out)?;
    Ok((report, out))
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn number<T: std::str::FromStr>(params: &[String], i: usize, name: &str) -> Result<T> {
    let raw = params.get(i).ok_or_else(|| usage(format!("missing parameter <{name}>")))?;
    raw.parse().map_err(|_| usage(format!("<{name}> must be a non-negative integer, got {raw:?}")))
}

fn dimension(params: &[String], i: usize) -> Result<Dimension> {
    Ok(Dimension::new(number(params, i, "d")?)?)
}

fn no_extra(params: &[String], max: usize) -> Result<()> {
    match params.get(max) {
        Some(extra) => Err(usage(format!("unexpected parameter {extra:?}"))),
        None => Ok(()),
    }
}

/// Exact oracle value, printed as `"num/den = decimal"` plus an optional note.
pub fn cmd_oracle(kind: &str, params: &[String]) -> Result<String> {
    let (p, note) = match kind {
        "escape" => {
            no_extra(params, 3)?;
            let (n, q) = (number(params, 0, "N")?, number(params, 1, "q")?);
            match params.get(2) {
                Some(_) => (multi_fake_escape_probability(n, q, number(params, 2, "count")?)?, None),
                None => (escape_probability(n, q)?, None),
            }
        }
        "conditional_pass" => {
            no_extra(params, 4)?;
            let n = number(params, 0, "n")?;
            let d = dimension(params, 1)?;
            let r = number(params, 2, "r")?;
            let model: AnnouncementModel = match params.get(3) {
                Some(m) => m.parse()?,
                None => AnnouncementModel::default(),
            };
            let p = conditional_pass_probability(n, d, r, model)?;
            let reference = Scenario::ConditionalPass { n, d, r, model }.reference()?;
            let note = reference
                .filter(|c| !c.matches_oracle)
                .map(|c| format!("differs from {} = {}", c.expression, c.value));
            (p, note)
        }
        "eve_detection" => {
            no_extra(params, 2)?;
            let d = dimension(params, 0)?;
            match params.get(1) {
                Some(_) => (channel_detection_probability(d, number(params, 1, "decoys")?)?, None),
                None => (eve_detection_probability(d)?, None),
            }
        }
        other => {
            return Err(usage(format!(
                "unknown oracle {other:?} (expected escape, conditional_pass or eve_detection)"
            )))
        }
    };
    let mut out = format_probability(p);
    if let Some(note) = note {
        write!(out, "\nnote: {note}").unwrap();
    }
    Ok(out)
}

pub fn format_probability(p: ExactProbability) -> String {
    format!("{p} = {}", p.value())
}

/// `key=value` pairs; later keys win.
fn key_values(params: &[String]) -> Result<BTreeMap<String, String>> {
    params
        .iter()
        .map(|p| {
            p.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| usage(format!("expected key=value, got {p:?}")))
        })
        .collect()
}

fn parse_value<T: std::str::FromStr>(key: &str, raw: &str) -> Result<T> {
    raw.parse().map_err(|_| usage(format!("{key}: cannot parse {raw:?}")))
}

/// Builds the single-run scenario for `demo`.
pub fn demo_scenario(protocol: &str, params: &[String], seed: Option<u64>) -> Result<ScenarioFile> {
    let mut kv = key_values(params)?;
    let mut s = ScenarioFile::parse("", Path::new("demo.toml"))?;
    s.name = format!("demo-{protocol}");
    s.length = 2;
    s.q = 4;
    let preset = match protocol {
        "yy2018" => (ProtocolKind::Yy2018, None),
        "improved" => (ProtocolKind::Improved, None),
        "attack1" => (ProtocolKind::Yy2018, Some("attack1")),
        "attack2" => (ProtocolKind::Yy2018, Some("attack2")),
        "fake_state" => (ProtocolKind::Improved, Some("fake_state")),
        other => {
            return Err(usage(format!(
                "unknown protocol {other:?} (expected yy2018, improved, attack1, attack2 or fake_state)"
            )))
        }
    };
    s.protocol = preset.0;
    if protocol == "attack2" {
        s.d = 5;
    }
    let attack = kv.remove("attack").or(preset.1.map(String::from)).unwrap_or_else(|| "honest".into());
    if let Some(v) = kv.remove("protocol") {
        s.protocol = match v.as_str() {
            "yy2018" => ProtocolKind::Yy2018,
            "improved" => ProtocolKind::Improved,
            _ => return Err(usage(format!("protocol: unknown value {v:?}"))),
        };
    }
    let mut take = |key: &str| kv.remove(key);
    if let Some(v) = take("n") {
        s.n = parse_value("n", &v)?;
    }
    if let Some(v) = take("d") {
        s.d = parse_value("d", &v)?;
    }
    if let Some(v) = take("N").or_else(|| take("length")) {
        s.length = parse_value("N", &v)?;
    }
    if let Some(v) = take("q") {
        s.q = parse_value("q", &v)?;
    }
    if let Some(v) = take("decoys") {
        s.decoys_per_channel = parse_value("decoys", &v)?;
    }
    if let Some(v) = take("model") {
        s.announcement_model = v.parse()?;
    }
    if let Some(v) = take("seed") {
        s.seed = parse_value("seed", &v)?;
    }
    if let Some(v) = take("secrets") {
        let lists = v
            .split(';')
            .map(|l| l.split(',').map(|x| parse_value("secrets", x.trim())).collect::<Result<Vec<usize>>>())
            .collect::<Result<Vec<_>>>()?;
        s.secrets = SecretsSpec::Explicit(lists);
    }
    let r = take("r").map(|v| parse_value("r", &v)).transpose()?.unwrap_or(0);
    let count = take("count").map(|v| parse_value("count", &v)).transpose()?.unwrap_or(1);
    let party = take("party").map(|v| parse_value("party", &v)).transpose()?.unwrap_or(2usize);
    let digit = take("digit").map(|v| parse_value("digit", &v)).transpose()?.unwrap_or(0);
    let fraction = take("fraction").map(|v| parse_value("fraction", &v)).transpose()?.unwrap_or(1.0);
    s.attack = match attack.as_str() {
        "honest" => AttackStrategy::Honest,
        "attack1" => AttackStrategy::Attack1,
        "attack2" => AttackStrategy::Attack2 {
            party: PartyId::new(party)?,
            digit,
        },
        "fake_state" => AttackStrategy::FakeState { r, count },
        "intercept_resend" | "eve" => AttackStrategy::InterceptResend { fraction },
        other => return Err(usage(format!("attack: unknown kind {other:?}"))),
    };
    if let Some(key) = kv.keys().next() {
        return Err(usage(format!("unknown parameter {key:?}")));
    }
    if let Some(seed) = seed {
        s.seed = seed;
    }
    s.trials = 1;
    Ok(s)
}

fn describe(kind: &PreparedKind, n: usize) -> String {
    match kind {
        PreparedKind::Omega => format!("genuine omega state on {n} components"),
        PreparedKind::InverseFourierProduct { r } => format!("measured to r = {r}, then F† on every component"),
        PreparedKind::RotatedOmega { target } => {
            format!("rotated state: component 1 to {target}, F-rotated components kept by P1")
        }
        PreparedKind::ReducedOmega { excluded } => format!("omega state on {} components, skipping {excluded}", n - 1),
        PreparedKind::FourierProduct { r } => format!("fake product (F|{r}⟩)^{n}"),
    }
}

fn digits(v: &[usize]) -> String {
    format!("{v:?}")
}

/// One seeded run printed step by step.
pub fn cmd_demo(protocol: &str, params: &[String], seed: Option<u64>) -> Result<String> {
    let scenario = demo_scenario(protocol, params, seed)?;
    let dim = scenario.validate()?;
    let run_seed = scenario.run_seed(0);
    let secrets = scenario.secrets_for(dim, run_seed)?;
    let config = scenario.config(dim, run_seed);
    let (strategy, eve) = scenario.attack.split()?;
    let result = match scenario.protocol {
        ProtocolKind::Yy2018 => qsum_core::protocol::run_yy2018(&config, &secrets, eve.as_ref(), strategy)?,
        ProtocolKind::Improved => qsum_core::protocol::run_improved(
            &config,
            &secrets,
            eve.as_ref(),
            strategy,
            scenario.announcement_model,
        )?,
    };
    let t = &result.transcript;
    let improved = scenario.protocol == ProtocolKind::Improved;
    let step = |i: usize| if improved { format!("S{i}") } else { format!("Step {i}") };
    let mut o = String::new();
    let w = &mut o;
    writeln!(
        w,
        "{} protocol: n = {}, d = {}, N = {}{}, seed = {}, attack = {}",
        scenario.protocol,
        scenario.n,
        scenario.d,
        scenario.length,
        if improved { format!(", q = {}", scenario.q) } else { String::new() },
        scenario.seed,
        scenario.attack.name(),
    )
    .unwrap();
    for s in &secrets {
        writeln!(w, "  {} K = {}", s.owner, digits(&s.digits)).unwrap();
    }
    writeln!(w, "{}: P1 prepares {} states", step(1), t.preparation.len()).unwrap();
    for p in &t.preparation {
        writeln!(w, "  state {}: {}", p.position, describe(&p.kind, scenario.n)).unwrap();
    }
    writeln!(w, "{}: components sent with decoys", step(2)).unwrap();
    for c in &t.channels {
        writeln!(
            w,
            "  {}: {} qudits, {} decoys, {} intercepted, error rate {:.3} -> {}",
            c.receiver,
            c.slots,
            c.decoys.len(),
            c.interceptions.len(),
            c.error_rate,
            if c.passed { "pass" } else { "FAIL" }
        )
        .unwrap();
    }
    let mut next = 3;
    if let Some(corr) = &t.correlation {
        writeln!(w, "{}: correlation check on {} sampled states", step(3), corr.samples.len()).unwrap();
        for s in &corr.samples {
            writeln!(
                w,
                "  state {} in {} basis, announced {} -> {}",
                s.position,
                s.basis,
                digits(&s.announced),
                if s.passed { "pass" } else { "FAIL" }
            )
            .unwrap();
        }
        writeln!(w, "  error rate {:.3} -> {}", corr.error_rate, if corr.passed { "pass" } else { "abort" }).unwrap();
        next = 4;
    }
    if !t.announcements.is_empty() {
        let what = if improved {
            "remaining states measured in the Fourier basis; M_j = K_j ⊕ L_j announced"
        } else {
            "each party applies U_k F, measures, and announces"
        };
        writeln!(w, "{}: {what}", step(next)).unwrap();
        for a in &t.announcements {
            writeln!(w, "  {} M = {}", a.party, digits(&a.payload)).unwrap();
        }
        if improved {
            writeln!(w, "  P1 adds her own value and every announcement").unwrap();
        } else {
            writeln!(w, "{}: P1 adds her own value and every announcement", step(4)).unwrap();
        }
    }
    match &t.verdict {
        Verdict::Completed { sum } => {
            let expected = qsum_core::protocol::reference_sum(dim, &secrets);
            writeln!(w, "verdict: completed, sum = {} (true sum {})", digits(sum), digits(&expected)).unwrap();
        }
        Verdict::AbortedChannel { receiver } => writeln!(w, "verdict: aborted, channel to {receiver} failed").unwrap(),
        Verdict::AbortedCorrelation => writeln!(w, "verdict: aborted by the correlation check").unwrap(),
    }
    for e in &result.report.extractions {
        let truth = secrets[e.party.index()].digits[e.digit];
        let tag = if e.blind { " (blind guess)" } else { "" };
        match &e.rule {
            ExtractionRule::SubtractPrepared { r } => writeln!(
                w,
                "  P1 extracts {} digit {}{tag}: k = m ⊖ r = {} ⊖ {} = {} (mod {}); true {}",
                e.party, e.digit, e.announced, r, e.guess, scenario.d, truth
            )
            .unwrap(),
            ExtractionRule::AddHeldOutcomes { held } => {
                let terms: Vec<String> = std::iter::once(e.announced).chain(held.iter().copied()).map(|x| x.to_string()).collect();
                writeln!(
                    w,
                    "  P1 extracts {} digit {}: k = m ⊕ l_2 ⊕ … ⊕ l_n = {} = {} (mod {}); true {}",
                    e.party,
                    e.digit,
                    terms.join(" ⊕ "),
                    e.guess,
                    scenario.d,
                    truth
                )
                .unwrap();
                writeln!(w, "  k_{} = {}", e.party.label(), e.guess).unwrap();
            }
        }
    }
    if result.report.detected {
        writeln!(w, "adversary detected").unwrap();
    } else if !strategy.is_honest() || eve.is_some() {
        writeln!(w, "adversary undetected").unwrap();
    }
    Ok(o)
}

fn coerce(key: &str, raw: &str) -> Result<serde_json::Value> {
    if key == "model" {
        let m: AnnouncementModel = raw.parse()?;
        return Ok(serde_json::to_value(m).expect("models serialize"));
    }
    Ok(serde_json::from_str(raw).unwrap_or_else(|_| serde_json::Value::String(raw.to_string())))
}

/// Builds a named analysis scenario with `key=value` overrides.
pub fn estimate_scenario(name: &str, params: &[String]) -> Result<Scenario> {
    let base = Scenario::from_name(name)?;
    let mut value = serde_json::to_value(&base).expect("scenarios serialize");
    let object = value.as_object_mut().expect("scenarios are objects");
    for (key, raw) in key_values(params)? {
        let key = if key == "N" { "length".to_string() } else { key };
        if key == "scenario" || !object.contains_key(&key) {
            return Err(usage(format!("{name}: unknown parameter {key:?}")));
        }
        object.insert(key.clone(), coerce(&key, &raw)?);
    }
    serde_json::from_value(value).map_err(|e| usage(format!("{name}: {e}")))
}

/// Monte Carlo estimate of a named scenario against its exact oracle.
pub fn cmd_estimate(name: &str, params: &[String], overrides: &Overrides) -> Result<ExperimentRecord> {
    let scenario = estimate_scenario(name, params)?;
    let start = Instant::now();
    let mut record = scenario.run(overrides.trials.unwrap_or(10_000), overrides.seed.unwrap_or(0))?;
    record.wall_time_ms = Some(start.elapsed().as_millis());
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strings(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn oracle_strings() {
        assert_eq!(cmd_oracle("escape", &strings(&["10", "30"])).unwrap(), "1/4 = 0.25");
        assert_eq!(cmd_oracle("conditional_pass", &strings(&["3", "2", "0", "adaptive"])).unwrap(), "3/4 = 0.75");
        assert_eq!(cmd_oracle("eve_detection", &strings(&["2"])).unwrap(), "1/4 = 0.25");
        let four = cmd_oracle("conditional_pass", &strings(&["4", "2", "0", "adaptive"])).unwrap();
        assert!(four.starts_with("5/8 = 0.625\nnote: differs"), "{four}");
    }

    #[test]
    fn oracle_errors() {
        assert!(matches!(cmd_oracle("nope", &[]), Err(CliError::Usage(_))));
        assert!(cmd_oracle("escape", &strings(&["10"])).is_err());
        assert!(cmd_oracle("escape", &strings(&["0", "3"])).is_err());
        assert!(cmd_oracle("eve_detection", &strings(&["1"])).is_err());
        assert!(cmd_oracle("escape", &strings(&["1", "2", "3", "4"])).is_err());
    }

    #[test]
    fn demo_parameters() {
        let s = demo_scenario("yy2018", &strings(&["n=3", "d=10", "N=2"]), Some(4)).unwrap();
        assert_eq!((s.n, s.d, s.length, s.seed), (3, 10, 2, 4));
        assert!(demo_scenario("yy2018", &strings(&["colour=red"]), None).is_err());
        assert!(demo_scenario("teleport", &[], None).is_err());
        let s = demo_scenario("improved", &strings(&["attack=fake_state", "r=1"]), None).unwrap();
        assert_eq!(s.attack, AttackStrategy::FakeState { r: 1, count: 1 });
    }

    #[test]
    fn estimate_overrides() {
        let s = estimate_scenario("conditional_pass", &strings(&["n=4", "d=3", "model=first"])).unwrap();
        assert_eq!(
            s,
            Scenario::ConditionalPass {
                n: 4,
                d: Dimension::new(3).unwrap(),
                r: 0,
                model: AnnouncementModel::P1First
            }
        );
        assert!(estimate_scenario("escape", &strings(&["zeta=1"])).is_err());
        assert!(matches!(
            estimate_scenario("teleport", &[]),
            Err(CliError::Core(qsum_core::Error::UnknownScenario(_)))
        ));
    }
}
